//! Monte-Carlo fiber bodies: sampled sos forms, support numbers, boundary
//! points, face dimensions and normal-cone probes.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{GramError, Result};
use crate::gram::GramContext;
use crate::linalg::{column_space, SymMat};
use crate::polyalg::Form;
use crate::sdp::{self, SdpSolution, SdpStatus, SliceProblem};

/// Relative threshold for the numeric rank of stacked face subspaces.
pub const FACE_SPAN_TOL: f64 = 1e-6;
/// Distance above which two face affine hulls count as different.
pub const HULL_TOL: f64 = 1e-5;
/// Largest tolerated fraction of failed per-sample solves.
pub const MAX_FAILURE_RATE: f64 = 0.05;

const MAX_TRIALS: u64 = 1_000_000;
const MIN_ACCEPTANCE: f64 = 1e-4;
const BATCH: u64 = 256;

/// Sos forms sampled uniformly on the unit sphere of coefficient space.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub ctx: GramContext,
    pub forms: Vec<Form<f64>>,
    pub seed: u64,
    /// Per-sample factor: sphere area × acceptance rate / (dim V + 1).
    pub weights: Vec<f64>,
    pub trials: u64,
    g0: Vec<SymMat<f64>>,
    starts: Vec<Vec<f64>>,
}

/// Surface area of the unit sphere in `R^m`.
pub fn sphere_area(m: usize) -> f64 {
    // Γ(m/2) by the recursion Γ(s+1) = sΓ(s) from Γ(1) or Γ(1/2)
    let mut gamma = if m % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut s = if m % 2 == 0 { 1.0 } else { 0.5 };
    while s + 0.5 < m as f64 / 2.0 {
        gamma *= s;
        s += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / gamma
}

fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn probe_points(n: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::new();
    let vals = [-1.0, 0.0, 1.0];
    let mut idx = vec![0usize; n];
    loop {
        let p: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
        if p.iter().any(|v| *v != 0.0) {
            pts.push(p);
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < 3 {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    pts
}

struct Trial {
    form: Form<f64>,
    g0: SymMat<f64>,
    start: Vec<f64>,
}

fn run_trial(ctx: &GramContext, seed: u64, index: u64, probes: &[Vec<f64>]) -> Result<Option<Trial>> {
    let mut rng = substream(seed, index);
    let m = ctx.big_m();
    let mut c: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let nrm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= nrm);
    let form = Form::new(ctx.target_order().clone(), c)?;
    if probes.iter().any(|p| form.eval(p) < 0.0) {
        return Ok(None);
    }
    let g0 = ctx.v_rep(&form)?;
    Ok(sdp::interior_point(&g0, ctx.kernel_f64())?.map(|start| Trial { form, g0, start }))
}

/// Rejection sampling with one ChaCha substream per trial index.
pub fn sample_forms(ctx: &GramContext, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(GramError::InvalidInput("sample count must be at least 1".into()));
    }
    let probes = probe_points(ctx.n());
    let mut accepted: Vec<Trial> = Vec::with_capacity(count);
    let mut trials = 0u64;
    let mut next = 0u64;
    while accepted.len() < count {
        if next >= MAX_TRIALS {
            let rate = accepted.len() as f64 / next as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(GramError::SamplingFailure { accepted: accepted.len(), trials: next });
            }
        }
        let batch: Vec<Result<Option<Trial>>> =
            (next..next + BATCH).into_par_iter().map(|i| run_trial(ctx, seed, i, &probes)).collect();
        for (offset, t) in batch.into_iter().enumerate() {
            if accepted.len() == count {
                break;
            }
            trials = next + offset as u64 + 1;
            if let Some(t) = t? {
                accepted.push(t);
            }
        }
        next += BATCH;
    }
    let rate = count as f64 / trials as f64;
    let m = ctx.big_m();
    let weight = sphere_area(m) * rate / (m as f64 + 1.0);
    let mut forms = Vec::with_capacity(count);
    let mut g0 = Vec::with_capacity(count);
    let mut starts = Vec::with_capacity(count);
    for t in accepted {
        forms.push(t.form);
        g0.push(t.g0);
        starts.push(t.start);
    }
    Ok(SampleSet { ctx: ctx.clone(), forms, seed, weights: vec![weight; count], trials, g0, starts })
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.forms.len() as f64 / self.trials as f64
    }

    /// Restriction to the first `k` samples (same weights).
    pub fn prefix(&self, k: usize) -> SampleSet {
        let k = k.min(self.len());
        SampleSet {
            ctx: self.ctx.clone(),
            forms: self.forms[..k].to_vec(),
            seed: self.seed,
            weights: self.weights[..k].to_vec(),
            trials: self.trials,
            g0: self.g0[..k].to_vec(),
            starts: self.starts[..k].to_vec(),
        }
    }

    /// Strictly feasible slice coordinates found while sampling.
    pub fn start(&self, i: usize) -> &[f64] {
        &self.starts[i]
    }

    /// Optimal face solve for sample `i` in direction `w` (ambient tensor).
    pub fn solve(&self, i: usize, w: &SymMat<f64>) -> Result<SdpSolution> {
        let c = self.ctx.objective_matrix(w)?;
        let p = SliceProblem::new(self.g0[i].clone(), self.ctx.kernel_f64().to_vec(), c).with_start(self.starts[i].clone());
        let sol = sdp::solve(&p)?;
        match sol.status {
            SdpStatus::Optimal => Ok(sol),
            SdpStatus::Infeasible => Err(GramError::Infeasible),
            SdpStatus::NumericalFailure => Err(GramError::SolverFailure(format!("gap {:e}", sol.gap))),
        }
    }

    fn solve_all(&self, w: &SymMat<f64>) -> Vec<Result<SdpSolution>> {
        (0..self.len()).into_par_iter().map(|i| self.solve(i, w)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "count": self.len(),
            "trials": self.trials,
            "acceptanceRate": self.acceptance_rate(),
            "weight": self.weights.first(),
            "forms": self.forms.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn check_direction(w: &SymMat<f64>) -> Result<()> {
    if w.max_abs() == 0.0 {
        return Err(GramError::InvalidInput("zero direction".into()));
    }
    Ok(())
}

/// Keeps successful results, failing if more than 5% failed.
fn successes<T>(results: Vec<Result<T>>) -> Result<(Vec<(usize, T)>, usize)> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failed = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push((i, v)),
            Err(e) => {
                log::warn!("sample {i}: {e}");
                failed += 1;
            }
        }
    }
    if failed as f64 > MAX_FAILURE_RATE * total as f64 || ok.is_empty() {
        return Err(GramError::TooManyFailures { failed, total });
    }
    Ok((ok, failed))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportEstimate {
    pub h: f64,
    pub stderr: f64,
    pub failures: usize,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Support number `h(w) = ∫ min_{X ∈ fiber} ⟨w, X⟩` (min convention).
pub fn support_estimate(w: &SymMat<f64>, samples: &SampleSet) -> Result<SupportEstimate> {
    check_direction(w)?;
    let (ok, failures) = successes(samples.solve_all(w))?;
    let values: Vec<f64> = ok.iter().map(|(i, s)| samples.weights[*i] * s.objective_value).collect();
    let (mean, se) = mean_and_stderr(&values);
    Ok(SupportEstimate { h: mean, stderr: se, failures })
}

/// Boundary point of the fiber body exposed by a direction.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudRecord {
    /// Direction, orthonormal W-coordinates.
    pub direction: Vec<f64>,
    /// Weighted mean optimizer, orthonormal W-coordinates.
    pub point: Vec<f64>,
    pub count: usize,
    pub stderr: f64,
    /// Samples whose face had positive dimension.
    pub nonpoint_faces: usize,
}

impl CloudRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "direction": self.direction,
            "point": self.point,
            "count": self.count,
            "stderr": self.stderr,
            "nonpointFaces": self.nonpoint_faces,
        })
    }
}

pub fn boundary_point(w: &SymMat<f64>, samples: &SampleSet) -> Result<CloudRecord> {
    check_direction(w)?;
    let ctx = &samples.ctx;
    let results: Vec<Result<(Vec<f64>, bool)>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let sol = samples.solve(i, w)?;
            let coords: Vec<f64> = ctx.orthonormal_coords(&sol.x).iter().map(|v| v * samples.weights[i]).collect();
            let u = ctx.image_forms(&sol.x)?;
            let r = u.len();
            let face_dim = r * (r + 1) / 2 - crate::polyalg::prod_space_dims(&u)?.dim_u2;
            Ok((coords, face_dim > 0))
        })
        .collect();
    let (ok, _) = successes(results)?;
    let dim = ctx.dim_w();
    let count = ok.len();
    let mut point = vec![0.0; dim];
    let mut var = 0.0;
    for k in 0..dim {
        let col: Vec<f64> = ok.iter().map(|(_, (c, _))| c[k]).collect();
        let (m, se) = mean_and_stderr(&col);
        point[k] = m;
        var += se * se;
    }
    let nonpoint_faces = ok.iter().filter(|(_, (_, p))| *p).count();
    if nonpoint_faces > 0 {
        log::warn!("{nonpoint_faces} of {count} per-sample faces are not points");
    }
    Ok(CloudRecord { direction: ctx.orthonormal_coords(w), point, count, stderr: var.sqrt(), nonpoint_faces })
}

#[derive(Clone, Debug)]
pub struct FaceDimEstimate {
    pub dim: usize,
    /// Orthonormal basis (context pairing) of the detected direction space.
    pub basis: Vec<SymMat<f64>>,
    pub per_sample: Vec<usize>,
}

impl FaceDimEstimate {
    pub fn to_json(&self, ctx: &GramContext) -> Value {
        json!({
            "dim": self.dim,
            "basis": self.basis.iter().map(|b| ctx.orthonormal_coords(b)).collect::<Vec<_>>(),
            "perSample": self.per_sample,
        })
    }
}

fn face_subspace_coords(samples: &SampleSet, i: usize, w: &SymMat<f64>) -> Result<(SdpSolution, Vec<Vec<f64>>)> {
    let ctx = &samples.ctx;
    let sol = samples.solve(i, w)?;
    let u = ctx.image_forms(&sol.x)?;
    let sub = ctx.face_subspace(&u)?;
    Ok((sol, sub.iter().map(|k| ctx.orthonormal_coords(k)).collect()))
}

/// Span of the per-sample face direction spaces.
pub fn face_dim_estimate(w: &SymMat<f64>, samples: &SampleSet) -> Result<FaceDimEstimate> {
    check_direction(w)?;
    let ctx = &samples.ctx;
    let results: Vec<Result<Vec<Vec<f64>>>> =
        (0..samples.len()).into_par_iter().map(|i| face_subspace_coords(samples, i, w).map(|(_, s)| s)).collect();
    let (ok, _) = successes(results)?;
    let per_sample: Vec<usize> = ok.iter().map(|(_, s)| s.len()).collect();
    let stacked: Vec<Vec<f64>> = ok.into_iter().flat_map(|(_, s)| s).collect();
    let span = column_space(&stacked, FACE_SPAN_TOL)?;
    let basis: Vec<SymMat<f64>> = span.iter().map(|c| ctx.from_orthonormal(c)).collect();
    Ok(FaceDimEstimate { dim: basis.len(), basis, per_sample })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeVerdict {
    InCone,
    NotInCone,
    Undetermined,
}

impl ProbeVerdict {
    pub fn name(self) -> &'static str {
        match self {
            ProbeVerdict::InCone => "InCone",
            ProbeVerdict::NotInCone => "NotInCone",
            ProbeVerdict::Undetermined => "Undetermined",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeResult {
    pub verdict: ProbeVerdict,
    pub differing: usize,
    pub total: usize,
    pub max_distance: f64,
}

impl ProbeResult {
    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict.name(),
            "differing": self.differing,
            "total": self.total,
            "maxDistance": self.max_distance,
        })
    }
}

/// Distance of `p` from the affine space `base + span(basis)` (orthonormal basis).
fn affine_distance(p: &[f64], base: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
    for b in basis {
        let c: f64 = d.iter().zip(b).map(|(x, y)| x * y).sum();
        d.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
    d.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Hausdorff-type distance between two affine hulls given by a point and
/// an orthonormal basis of directions.
fn hull_distance(a: &(Vec<f64>, Vec<Vec<f64>>), b: &(Vec<f64>, Vec<Vec<f64>>)) -> f64 {
    let mut dist = affine_distance(&a.0, &b.0, &b.1).max(affine_distance(&b.0, &a.0, &a.1));
    let zero = vec![0.0; a.0.len()];
    for v in &a.1 {
        dist = dist.max(affine_distance(v, &zero, &b.1));
    }
    for v in &b.1 {
        dist = dist.max(affine_distance(v, &zero, &a.1));
    }
    dist
}

/// Sampled evidence whether `w'` lies in the normal cone of the face in
/// direction `w`.
pub fn nc_probe(w: &SymMat<f64>, w_prime: &SymMat<f64>, samples: &SampleSet) -> Result<ProbeResult> {
    check_direction(w)?;
    check_direction(w_prime)?;
    let ctx = &samples.ctx;
    let hull = |i: usize, dir: &SymMat<f64>| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let (sol, sub) = face_subspace_coords(samples, i, dir)?;
        let span = column_space(&sub, FACE_SPAN_TOL)?;
        Ok((ctx.orthonormal_coords(&sol.x), span))
    };
    let results: Vec<Result<f64>> = (0..samples.len())
        .into_par_iter()
        .map(|i| Ok(hull_distance(&hull(i, w)?, &hull(i, w_prime)?)))
        .collect();
    let (ok, _) = successes(results)?;
    let total = ok.len();
    let differing = ok.iter().filter(|(_, d)| *d > HULL_TOL).count();
    let max_distance = ok.iter().fold(0.0f64, |m, (_, d)| m.max(*d));
    let verdict = if differing as f64 > 0.1 * total as f64 {
        ProbeVerdict::NotInCone
    } else if differing == 0 {
        ProbeVerdict::InCone
    } else {
        ProbeVerdict::Undetermined
    };
    Ok(ProbeResult { verdict, differing, total, max_distance })
}

/// Unit directions in orthonormal W-coordinates: a Fibonacci lattice for
/// dim W = 3, seeded Gaussian directions otherwise.
pub fn default_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 3 {
        return crate::sextic::fibonacci_sphere(count).into_iter().map(|p| p.to_vec()).collect();
    }
    (0..count as u64)
        .map(|i| {
            let mut rng = substream(seed ^ 0xd1ec_7105, i);
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes one CSV row per direction (orthonormal W-coordinates).
pub fn export_cloud<W: Write>(directions: &[Vec<f64>], samples: &SampleSet, sink: W) -> Result<usize> {
    if directions.is_empty() {
        return Err(GramError::InvalidInput("no directions".into()));
    }
    let ctx = &samples.ctx;
    let k = ctx.dim_w();
    let mut writer = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = (1..=k).map(|i| format!("dir_{i}")).collect();
    header.extend((1..=k).map(|i| format!("pt_{i}")));
    header.push("n_samples".into());
    header.push("stderr".into());
    writer.write_record(&header)?;
    let mut written = 0;
    for d in directions {
        if d.len() != k {
            return Err(GramError::DimensionMismatch { expected: k, found: d.len() });
        }
        let rec = boundary_point(&ctx.from_orthonormal(d), samples)?;
        let mut row: Vec<String> = rec.direction.iter().chain(rec.point.iter()).map(|v| format_float(*v)).collect();
        row.push(rec.count.to_string());
        row.push(format_float(rec.stderr));
        writer.write_record(&row)?;
        written += 1;
    }
    writer.flush()?;
    Ok(written)
}
