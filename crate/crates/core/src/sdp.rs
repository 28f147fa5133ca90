//! Log-det barrier path following over an affine slice `G0 + Σ λ_i R_i` of the
//! psd cone. Newton steps act on λ only; the slice dimension is tiny.

use crate::error::{GramError, Result};
use crate::linalg::{eigh, numeric_rank, Matrix, SymMat};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpParams {
    /// Target relative duality gap `n/t ≤ gap_tol·(1+|obj|)`.
    pub gap_tol: f64,
    /// Gap below which a stalled run is still reported optimal.
    pub accept_gap: f64,
    /// Barrier parameter growth per outer step.
    pub growth: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
}

impl Default for SdpParams {
    fn default() -> Self {
        SdpParams { gap_tol: 1e-13, accept_gap: 1e-8, growth: 1.5, max_newton: 3000 }
    }
}

#[derive(Clone, Debug)]
pub struct SliceProblem {
    pub g0: SymMat<f64>,
    pub basis: Vec<SymMat<f64>>,
    pub objective: SymMat<f64>,
    pub params: SdpParams,
    /// Optional strictly feasible λ; phase I is skipped when it is usable.
    pub start: Option<Vec<f64>>,
}

impl SliceProblem {
    pub fn new(g0: SymMat<f64>, basis: Vec<SymMat<f64>>, objective: SymMat<f64>) -> Self {
        SliceProblem { g0, basis, objective, params: SdpParams::default(), start: None }
    }

    pub fn with_start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    pub fn with_params(mut self, params: SdpParams) -> Self {
        self.params = params;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub lambda: Vec<f64>,
    pub x: SymMat<f64>,
    pub objective_value: f64,
    pub status: SdpStatus,
    pub min_eigenvalue: f64,
    /// Duality gap bound `n/t` at termination.
    pub gap: f64,
    pub newton_steps: usize,
    /// On infeasibility: psd `Z` with `⟨Z, G0 + Σλ_iR_i⟩ < 0` on the whole
    /// (trace-capped) slice.
    pub certificate: Option<SymMat<f64>>,
    /// On infeasibility: minus the phase-I optimum bound (positive).
    pub phase1_value: Option<f64>,
}

/// Dense workspace for one slice; `basis` may carry the extra phase-I direction.
struct Slice {
    n: usize,
    g0: Vec<f64>,
    basis: Vec<Vec<f64>>,
    x: Vec<f64>,
    l: Vec<f64>,
    linv: Vec<f64>,
    tmp: Vec<f64>,
    a: Vec<Vec<f64>>,
}

fn dense(m: &SymMat<f64>) -> Vec<f64> {
    let n = m.size();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
    out
}

struct Step {
    dir: Vec<f64>,
    decrement: f64,
}

impl Slice {
    fn new(g0: &SymMat<f64>, basis: Vec<Vec<f64>>) -> Self {
        let n = g0.size();
        let k = basis.len();
        Slice {
            n,
            g0: dense(g0),
            basis,
            x: vec![0.0; n * n],
            l: vec![0.0; n * n],
            linv: vec![0.0; n * n],
            tmp: vec![0.0; n * n],
            a: vec![vec![0.0; n * n]; k],
        }
    }

    fn assemble(&mut self, lam: &[f64]) {
        self.x.copy_from_slice(&self.g0);
        for (c, r) in lam.iter().zip(&self.basis) {
            if *c != 0.0 {
                for (x, v) in self.x.iter_mut().zip(r) {
                    *x += c * v;
                }
            }
        }
    }

    fn cholesky(&mut self) -> bool {
        let n = self.n;
        let (x, l) = (&self.x, &mut self.l);
        for j in 0..n {
            let mut s = x[j * n + j];
            for k in 0..j {
                s -= l[j * n + k] * l[j * n + k];
            }
            if !(s > 0.0) || !s.is_finite() {
                return false;
            }
            let d = s.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = x[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }

    fn is_pd(&mut self, lam: &[f64]) -> bool {
        self.assemble(lam);
        self.cholesky()
    }

    /// Inverse of the lower-triangular Cholesky factor.
    fn invert_l(&mut self) {
        let n = self.n;
        let (l, li) = (&self.l, &mut self.linv);
        li.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            li[j * n + j] = 1.0 / l[j * n + j];
            for i in j + 1..n {
                let mut s = 0.0;
                for k in j..i {
                    s -= l[i * n + k] * li[k * n + j];
                }
                li[i * n + j] = s / l[i * n + i];
            }
        }
    }

    /// Newton direction for `t·cᵀλ − log det X(λ)`; `None` if `X(λ)` is not pd.
    fn newton(&mut self, lam: &[f64], t: f64, c: &[f64]) -> Option<Step> {
        if !self.is_pd(lam) {
            return None;
        }
        self.invert_l();
        let n = self.n;
        let k = self.basis.len();
        for i in 0..k {
            // tmp = Linv R_i, a_i = tmp Linvᵀ
            let r = &self.basis[i];
            for p in 0..n {
                for q in 0..n {
                    let mut s = 0.0;
                    for m in 0..=p {
                        s += self.linv[p * n + m] * r[m * n + q];
                    }
                    self.tmp[p * n + q] = s;
                }
            }
            let a = &mut self.a[i];
            for p in 0..n {
                for q in 0..=p {
                    let mut s = 0.0;
                    for m in 0..=q {
                        s += self.tmp[p * n + m] * self.linv[q * n + m];
                    }
                    a[p * n + q] = s;
                    a[q * n + p] = s;
                }
            }
        }
        let mut g = vec![0.0; k];
        let mut h = vec![0.0; k * k];
        for i in 0..k {
            let tr: f64 = (0..n).map(|p| self.a[i][p * n + p]).sum();
            g[i] = t * c[i] - tr;
            for j in 0..=i {
                let v: f64 = self.a[i].iter().zip(&self.a[j]).map(|(x, y)| x * y).sum();
                h[i * k + j] = v;
                h[j * k + i] = v;
            }
        }
        let dir = solve_psd_system(&h, &g, k)?;
        let dec2: f64 = -g.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
        Some(Step { dir, decrement: dec2.max(0.0).sqrt() })
    }

    /// `X(λ)⁻¹` from the current Cholesky factor.
    fn inverse(&mut self, lam: &[f64]) -> Option<Vec<f64>> {
        if !self.is_pd(lam) {
            return None;
        }
        self.invert_l();
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in i.max(j)..n {
                    s += self.linv[m * n + i] * self.linv[m * n + j];
                }
                out[i * n + j] = s;
            }
        }
        Some(out)
    }
}

/// Solves `H d = −g` for a symmetric psd `H`, falling back to a tiny ridge.
fn solve_psd_system(h: &[f64], g: &[f64], k: usize) -> Option<Vec<f64>> {
    let scale = (0..k).map(|i| h[i * k + i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for ridge in [0.0, 1e-14, 1e-11, 1e-8] {
        let mut l = vec![0.0; k * k];
        let mut ok = true;
        'outer: for j in 0..k {
            let mut s = h[j * k + j] + ridge * scale;
            for m in 0..j {
                s -= l[j * k + m] * l[j * k + m];
            }
            if !(s > 0.0) {
                ok = false;
                break 'outer;
            }
            let d = s.sqrt();
            l[j * k + j] = d;
            for i in j + 1..k {
                let mut s = h[i * k + j];
                for m in 0..j {
                    s -= l[i * k + m] * l[j * k + m];
                }
                l[i * k + j] = s / d;
            }
        }
        if !ok {
            continue;
        }
        let mut y: Vec<f64> = g.iter().map(|v| -v).collect();
        for i in 0..k {
            for m in 0..i {
                y[i] -= l[i * k + m] * y[m];
            }
            y[i] /= l[i * k + i];
        }
        for i in (0..k).rev() {
            for m in i + 1..k {
                y[i] -= l[m * k + i] * y[m];
            }
            y[i] /= l[i * k + i];
        }
        if y.iter().all(|v| v.is_finite()) {
            return Some(y);
        }
    }
    None
}

enum Centering {
    Done,
    Stalled,
}

struct Runner<'a> {
    slice: Slice,
    lam: Vec<f64>,
    steps: usize,
    params: &'a SdpParams,
}

impl Runner<'_> {
    /// Damped Newton until the decrement falls below `tol`.
    fn center(&mut self, t: f64, c: &[f64], tol: f64) -> Centering {
        for _ in 0..200 {
            if self.steps >= self.params.max_newton {
                return Centering::Stalled;
            }
            let Some(step) = self.slice.newton(&self.lam, t, c) else { return Centering::Stalled };
            self.steps += 1;
            if step.decrement <= tol {
                // one more full step is free accuracy when it stays feasible
                let trial: Vec<f64> = self.lam.iter().zip(&step.dir).map(|(l, d)| l + d).collect();
                if step.decrement > 0.0 && self.slice.is_pd(&trial) {
                    self.lam = trial;
                }
                return Centering::Done;
            }
            let mut alpha = if step.decrement < 0.5 { 1.0 } else { 1.0 / (1.0 + step.decrement) };
            loop {
                let trial: Vec<f64> = self.lam.iter().zip(&step.dir).map(|(l, d)| l + alpha * d).collect();
                if self.slice.is_pd(&trial) {
                    self.lam = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    return Centering::Stalled;
                }
            }
            if self.lam.iter().any(|v| !v.is_finite() || v.abs() > 1e15) {
                return Centering::Stalled;
            }
        }
        Centering::Stalled
    }
}

fn lambda_min(m: &SymMat<f64>) -> Result<f64> {
    Ok(eigh(m)?.values.last().copied().unwrap_or(0.0))
}

fn check_basis(g0: &SymMat<f64>, basis: &[SymMat<f64>]) -> Result<()> {
    let n = g0.size();
    for b in basis {
        if b.size() != n {
            return Err(GramError::DimensionMismatch { expected: n, found: b.size() });
        }
    }
    if basis.is_empty() {
        return Ok(());
    }
    let m = Matrix::from_rows(&basis.iter().map(|b| b.packed().to_vec()).collect::<Vec<_>>())?;
    let rank = numeric_rank(&m, 1e-10)?;
    if rank < basis.len() {
        return Err(GramError::DependentBasis { rank, expected: basis.len() });
    }
    Ok(())
}

enum PhaseOne {
    Feasible(Vec<f64>),
    Infeasible { certificate: SymMat<f64>, bound: f64 },
    Undecided { best: f64 },
}

/// Maximizes `s` subject to `G0 + Σ λ_i R_i − s I ≻ 0`.
/// With `margin = None` stops at the first strictly feasible point; with
/// `Some(m)` decides `max s > −m` instead.
fn phase_one(g0: &SymMat<f64>, basis: &[SymMat<f64>], params: &SdpParams, margin: Option<f64>) -> Result<PhaseOne> {
    let n = g0.size();
    let k = basis.len();
    // block diag(X(λ) − sI, T − tr X(λ)): the trace cap keeps phase I bounded
    // even when the slice itself is not
    let cap = g0.trace() + 1e4 * (g0.frobenius_norm() + 1.0) * n as f64;
    let widen = |m: &SymMat<f64>, corner: f64| {
        let mut out = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                out[i * (n + 1) + j] = m[(i, j)];
            }
        }
        out[n * (n + 1) + n] = corner;
        out
    };
    let mut dense_basis: Vec<Vec<f64>> = basis.iter().map(|b| widen(b, -b.trace())).collect();
    let mut minus_id = vec![0.0; (n + 1) * (n + 1)];
    for i in 0..n {
        minus_id[i * (n + 1) + i] = -1.0;
    }
    dense_basis.push(minus_id);
    let g0_wide = widen(g0, cap - g0.trace());
    let s0 = lambda_min(g0)?;
    let scale = g0.frobenius_norm().max(1e-300);
    if margin.is_none() && s0 > 0.0 {
        return Ok(PhaseOne::Feasible(vec![0.0; k]));
    }
    let mut lam = vec![0.0; k + 1];
    lam[k] = s0 - 0.1 * scale - 1e-12;
    let mut c = vec![0.0; k + 1];
    c[k] = -1.0 / scale;
    let mut slice = Slice::new(&SymMat::zeros(n + 1), dense_basis);
    slice.g0 = g0_wide;
    let mut runner = Runner { slice, lam, steps: 0, params };
    let mut t = 1.0;
    let tol = margin.unwrap_or(0.0);
    loop {
        if let Centering::Stalled = runner.center(t, &c, 0.25) {
            let s = runner.lam[k];
            if margin.is_some() {
                return Ok(PhaseOne::Undecided { best: s });
            }
            return Err(GramError::SolverFailure(format!("phase I stalled at s = {s:e}")));
        }
        let s = runner.lam[k];
        let bound = s + (n + 1) as f64 * scale / t;
        if margin.is_none() && s > 0.0 {
            runner.lam.truncate(k);
            return Ok(PhaseOne::Feasible(runner.lam));
        }
        if margin.is_some() && s > -tol {
            return Ok(PhaseOne::Feasible(runner.lam[..k].to_vec()));
        }
        if bound < -tol || (margin.is_none() && bound <= 0.0) {
            let lam = runner.lam.clone();
            let w = n + 1;
            let zinv = runner.slice.inverse(&lam).unwrap_or_else(|| vec![0.0; w * w]);
            let tr: f64 = (0..n).map(|i| zinv[i * w + i]).sum();
            let z = SymMat::from_fn(n, |i, j| zinv[i * w + j] / tr);
            return Ok(PhaseOne::Infeasible { certificate: z, bound: -bound });
        }
        if t > 1e16 {
            return Ok(PhaseOne::Undecided { best: s });
        }
        t *= 4.0;
    }
}

/// `true` iff `max_λ λ_min(G0 + Σ λ_i R_i) > −1e-9`.
pub fn feasible(g0: &SymMat<f64>, basis: &[SymMat<f64>]) -> Result<bool> {
    check_basis(g0, basis)?;
    match phase_one(g0, basis, &SdpParams::default(), Some(1e-9))? {
        PhaseOne::Feasible(_) => Ok(true),
        PhaseOne::Infeasible { .. } => Ok(false),
        PhaseOne::Undecided { best } => Ok(best > -1e-9),
    }
}

/// A strictly feasible λ (`X(λ) ≻ 0`), or `None` if the slice has empty interior.
pub fn interior_point(g0: &SymMat<f64>, basis: &[SymMat<f64>]) -> Result<Option<Vec<f64>>> {
    check_basis(g0, basis)?;
    match phase_one(g0, basis, &SdpParams::default(), None) {
        Ok(PhaseOne::Feasible(lam)) => Ok(Some(lam)),
        Ok(_) => Ok(None),
        Err(GramError::SolverFailure(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn finish(p: &SliceProblem, lam: Vec<f64>, status: SdpStatus, gap: f64, steps: usize) -> Result<SdpSolution> {
    let x = SymMat::combination(&lam, &p.basis, p.g0.size()).add(&p.g0);
    let min_eigenvalue = lambda_min(&x)?;
    Ok(SdpSolution {
        objective_value: p.objective.trace_dot(&x),
        lambda: lam,
        x,
        status,
        min_eigenvalue,
        gap,
        newton_steps: steps,
        certificate: None,
        phase1_value: None,
    })
}

/// Minimizes `tr(C X)` over `X = G0 + Σ λ_i R_i ⪰ 0`; the returned optimizer is
/// the central-path limit, i.e. the analytic center of the optimal face.
pub fn solve(p: &SliceProblem) -> Result<SdpSolution> {
    check_basis(&p.g0, &p.basis)?;
    let n = p.g0.size();
    let k = p.basis.len();
    let mut dense_basis: Vec<Vec<f64>> = p.basis.iter().map(dense).collect();
    let mut slice = Slice::new(&p.g0, std::mem::take(&mut dense_basis));
    let start = match &p.start {
        Some(s) if s.len() == k && slice.is_pd(s) => s.clone(),
        _ => match phase_one(&p.g0, &p.basis, &p.params, None) {
            Ok(PhaseOne::Feasible(lam)) => lam,
            Ok(PhaseOne::Infeasible { certificate, bound }) => {
                let mut sol = finish(p, vec![0.0; k], SdpStatus::Infeasible, f64::INFINITY, 0)?;
                sol.certificate = Some(certificate);
                sol.phase1_value = Some(bound);
                return Ok(sol);
            }
            Ok(PhaseOne::Undecided { .. }) | Err(GramError::SolverFailure(_)) => {
                return finish(p, vec![0.0; k], SdpStatus::NumericalFailure, f64::INFINITY, 0);
            }
            Err(e) => return Err(e),
        },
    };
    let raw: Vec<f64> = p.basis.iter().map(|b| p.objective.trace_dot(b)).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut runner = Runner { slice, lam: start, steps: 0, params: &p.params };
    if norm == 0.0 || k == 0 {
        let zero = vec![0.0; k];
        let status = match runner.center(0.0, &zero, 1e-10) {
            Centering::Done => SdpStatus::Optimal,
            Centering::Stalled => SdpStatus::NumericalFailure,
        };
        return finish(p, runner.lam, status, 0.0, runner.steps);
    }
    // the argmin only depends on the ray of c; normalizing makes C and 2^k C identical
    let c: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let base = p.objective.trace_dot(&p.g0) / norm;
    let mut t = 1.0;
    loop {
        let outcome = runner.center(t, &c, 0.25);
        let gap = n as f64 / t;
        let obj = base + c.iter().zip(&runner.lam).map(|(a, b)| a * b).sum::<f64>();
        match outcome {
            Centering::Stalled => {
                let status = if gap <= p.params.accept_gap * (1.0 + obj.abs()) {
                    SdpStatus::Optimal
                } else {
                    SdpStatus::NumericalFailure
                };
                return finish(p, runner.lam, status, gap * norm, runner.steps);
            }
            Centering::Done => {
                if gap <= p.params.gap_tol * (1.0 + obj.abs()) {
                    return finish(p, runner.lam, SdpStatus::Optimal, gap * norm, runner.steps);
                }
            }
        }
        t *= p.params.growth;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sm(rows: &[&[f64]]) -> SymMat<f64> {
        SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn interval_slice() {
        let p = SliceProblem::new(SymMat::identity(2), vec![sm(&[&[1.0, 0.0], &[0.0, -1.0]])], sm(&[&[1.0, 0.0], &[0.0, 0.0]]));
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.lambda[0] + 1.0).abs() < 1e-9, "{:?}", s.lambda);
        assert!(s.objective_value.abs() < 1e-9);
        assert!((s.x[(1, 1)] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pinned_negative_entry_is_infeasible() {
        let p = SliceProblem::new(
            SymMat::identity(2).scale(&-1.0),
            vec![sm(&[&[1.0, 0.0], &[0.0, 0.0]])],
            sm(&[&[0.3, 0.1], &[0.1, 0.7]]),
        );
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
        let z = s.certificate.unwrap();
        assert!(eigh(&z).unwrap().values[1] >= -1e-12);
        for lam in [-100.0, 0.0, 10.0, 100.0] {
            assert!(z.trace_dot(&p.g0.axpy(&lam, &p.basis[0])) < 0.0);
        }
        assert!(s.phase1_value.unwrap() > 0.0);
        assert!(!feasible(&p.g0, &p.basis).unwrap());
    }

    #[test]
    fn zero_objective_gives_analytic_center() {
        let p = SliceProblem::new(SymMat::identity(2), vec![sm(&[&[1.0, 0.0], &[0.0, -1.0]])], SymMat::zeros(2));
        let s = solve(&p).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!(s.lambda[0].abs() < 1e-10);
    }

    #[test]
    fn psd_base_is_feasible() {
        assert!(feasible(&SymMat::identity(3), &[sm(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]])]).unwrap());
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let r = sm(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let p = SliceProblem::new(SymMat::identity(2), vec![r.clone(), r.scale(&2.0)], SymMat::identity(2));
        assert!(matches!(solve(&p), Err(GramError::DependentBasis { .. })));
    }
}
