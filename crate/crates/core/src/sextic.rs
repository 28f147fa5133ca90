//! Binary sextics: rank-2 Gram points from root groupings, the cone S,
//! rank-1 completion and the quadrics bounding the normal cones.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{GramError, Result};
use crate::gram::{make_context, GramContext};
use crate::linalg::{adjugate, det3, eigh, poly_roots, solve_dense, Matrix, SymMat};
use crate::polyalg::{Form, MonomialOrder};

/// Tolerance for detecting real or repeated zeros.
pub const ROOT_SEPARATION: f64 = 1e-7;

pub fn sextic_context() -> GramContext {
    make_context(2, 3).expect("binary sextic context")
}

/// Coordinates `λ_i = tr(w R_i)` of a direction in W.
///
/// With these coordinates `w = Σ λ_i / ‖R_i‖² · R_i` and the cone S is
/// `{λ₂² ≤ 4λ₁λ₃, λ₁ ≥ 0, λ₃ ≥ 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SCoords(pub [f64; 3]);

impl SCoords {
    pub fn from_w(ctx: &GramContext, w: &SymMat<f64>) -> SCoords {
        let k = ctx.kernel_f64();
        SCoords([w.trace_dot(&k[0]), w.trace_dot(&k[1]), w.trace_dot(&k[2])])
    }

    pub fn to_w(&self, ctx: &GramContext) -> SymMat<f64> {
        let k = ctx.kernel_f64();
        let c: Vec<f64> = (0..3).map(|i| self.0[i] / k[i].trace_dot(&k[i])).collect();
        ctx.from_w_coords(&c)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `λ₂² ≤ 4λ₁λ₃` with `λ₁, λ₃ ≥ 0`.
pub fn in_s(l: &SCoords) -> bool {
    let [l1, l2, l3] = l.0;
    l1 >= 0.0 && l3 >= 0.0 && l2 * l2 <= 4.0 * l1 * l3
}

/// Strict interior of S with a relative margin.
pub fn in_s_interior(l: &SCoords, margin: f64) -> bool {
    let [l1, l2, l3] = l.0;
    let s = l.norm();
    l1 > margin * s && l3 > margin * s && l2 * l2 < 4.0 * l1 * l3 - margin * s * s
}

/// Monic binary sextic `Π (x − z y)(x − z̄ y)` over the given zeros.
pub fn form_from_zeros(upper: &[Complex<f64>]) -> Form<f64> {
    // running product as coefficients of x^k y^(deg-k), highest x power first
    let mut p = vec![1.0];
    for z in upper {
        let quad = [1.0, -2.0 * z.re, z.norm_sqr()];
        let mut next = vec![0.0; p.len() + 2];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in quad.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        p = next;
    }
    let d = p.len() - 1;
    Form::new(MonomialOrder::shared(2, d), p).expect("length matches")
}

/// The two sextics whose rank-2 normal cones are tabulated.
pub fn lemma_sextics() -> [Form<f64>; 2] {
    let c = |re: f64, im: f64| Complex::new(re, im);
    [
        form_from_zeros(&[c(1.0, 6.0), c(2.0, 5.0), c(3.0, 4.0)]),
        form_from_zeros(&[c(-4.0, 2.0), c(-2.0, 2.0), c(-1.0, 2.0)]),
    ]
}

#[derive(Clone, Debug)]
pub struct Rank2Set {
    /// Rank-2 Gram tensors, one per root grouping.
    pub points: Vec<SymMat<f64>>,
    /// Index of the grouping with all selected zeros in the upper half plane.
    pub distinguished: usize,
    /// Selected zero of each conjugate pair, per grouping.
    pub groupings: Vec<[Complex<f64>; 3]>,
}

impl Rank2Set {
    pub fn theta_f(&self) -> &SymMat<f64> {
        &self.points[self.distinguished]
    }

    pub fn others(&self) -> impl Iterator<Item = &SymMat<f64>> {
        self.points.iter().enumerate().filter(move |(i, _)| *i != self.distinguished).map(|(_, p)| p)
    }
}

/// Zeros of `f(x, 1)` in the upper half plane, sorted by real then imaginary part.
pub fn upper_zeros(f: &Form<f64>) -> Result<(f64, [Complex<f64>; 3])> {
    if f.n() != 2 || f.degree() != 6 {
        return Err(GramError::InvalidInput("expected a binary sextic".into()));
    }
    let c = f.coeffs();
    let lead = c[0];
    if !(lead > 0.0) {
        return Err(GramError::DegenerateForm("coefficient of x^6 must be positive".into()));
    }
    let ascending: Vec<Complex<f64>> = c.iter().rev().map(|&v| Complex::new(v, 0.0)).collect();
    let roots = poly_roots(&ascending)?;
    for (i, z) in roots.iter().enumerate() {
        let scale = z.norm().max(1.0);
        if z.im.abs() <= ROOT_SEPARATION * scale {
            return Err(GramError::DegenerateForm(format!("real zero near {z}")));
        }
        for w in &roots[i + 1..] {
            if (z - w).norm() <= ROOT_SEPARATION * scale {
                return Err(GramError::DegenerateForm(format!("repeated zero near {z}")));
            }
        }
    }
    let mut upper: Vec<Complex<f64>> = roots.into_iter().filter(|z| z.im > 0.0).collect();
    if upper.len() != 3 {
        return Err(GramError::DegenerateForm("zeros are not in conjugate pairs".into()));
    }
    upper.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok((lead, [upper[0], upper[1], upper[2]]))
}

/// The four rank-2 Gram tensors `h₁⊗h₁ + h₂⊗h₂` with `g = h₁ + i h₂` running
/// over the factorizations `f = g ḡ`.
pub fn rank2_points(f: &Form<f64>) -> Result<Rank2Set> {
    let ctx = sextic_context();
    let (lead, up) = upper_zeros(f)?;
    let scale = lead.sqrt();
    let mut points = Vec::with_capacity(4);
    let mut groupings = Vec::with_capacity(4);
    for mask in 0..4u32 {
        let pick = |k: usize, z: Complex<f64>| if k > 0 && mask & (1 << (k - 1)) != 0 { z.conj() } else { z };
        let z = [pick(0, up[0]), pick(1, up[1]), pick(2, up[2])];
        let g = [
            Complex::new(1.0, 0.0),
            -(z[0] + z[1] + z[2]),
            z[0] * z[1] + z[0] * z[2] + z[1] * z[2],
            -(z[0] * z[1] * z[2]),
        ];
        let h1: Vec<f64> = g.iter().map(|c| scale * c.re).collect();
        let h2: Vec<f64> = g.iter().map(|c| scale * c.im).collect();
        let theta = SymMat::outer(&h1).add(&SymMat::outer(&h2));
        let back = ctx.mu_apply(&theta)?;
        let err = back.sub(f)?.norm();
        if err > 1e-9 * f.norm() {
            return Err(GramError::SolverFailure(format!("rank-2 point reproduces f only to {err:e}")));
        }
        points.push(theta);
        groupings.push(z);
    }
    Ok(Rank2Set { points, distinguished: 0, groupings })
}

fn completion_residual(a: &[f64; 4], target: &[f64; 3]) -> [f64; 3] {
    [
        2.0 * (a[0] * a[2] - a[1] * a[1]) - target[0],
        2.0 * (a[0] * a[3] - a[1] * a[2]) - target[1],
        2.0 * (a[1] * a[3] - a[2] * a[2]) - target[2],
    ]
}

fn completion_jacobian(a: &[f64; 4]) -> [[f64; 4]; 3] {
    [
        [2.0 * a[2], -4.0 * a[1], 2.0 * a[0], 0.0],
        [2.0 * a[3], -2.0 * a[2], -2.0 * a[1], 2.0 * a[0]],
        [0.0, 2.0 * a[3], -4.0 * a[2], 2.0 * a[1]],
    ]
}

/// Levenberg-Marquardt with minimum-norm steps on the underdetermined system.
fn completion_solve(mut a: [f64; 4], target: &[f64; 3]) -> Option<[f64; 4]> {
    let norm = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = completion_residual(&a, target);
    let mut damping = 1e-3;
    for _ in 0..200 {
        if norm(&r) < 1e-14 {
            return Some(a);
        }
        let j = completion_jacobian(&a);
        let jjt = Matrix::from_fn(3, 3, |p, q| (0..4).map(|k| j[p][k] * j[q][k]).sum::<f64>() + if p == q { damping } else { 0.0 });
        let Some(y) = solve_dense(&jjt, &r) else {
            damping *= 10.0;
            continue;
        };
        let mut trial = a;
        for k in 0..4 {
            trial[k] -= (0..3).map(|p| j[p][k] * y[p]).sum::<f64>();
        }
        let rt = completion_residual(&trial, target);
        if norm(&rt) < norm(&r) {
            a = trial;
            r = rt;
            damping = (damping * 0.1).max(1e-15);
        } else {
            damping *= 10.0;
            if damping > 1e10 {
                return None;
            }
        }
    }
    (norm(&r) < 1e-12).then_some(a)
}

/// A cubic `q` with `pr_W(q⊗q) = c·w`, `c > 0`, if one exists (exactly when
/// `w ∉ S`).
pub fn rank1_complete(ctx: &GramContext, w: &SymMat<f64>) -> Option<Form<f64>> {
    let l = SCoords::from_w(ctx, w);
    let s = l.norm();
    if s == 0.0 {
        return None;
    }
    let target = [l.0[0] / s, l.0[1] / s, l.0[2] / s];
    let accept = |a: [f64; 4]| {
        let proj = SCoords::from_w(ctx, &SymMat::outer(&a));
        let ps = proj.norm();
        let err: f64 = (0..3).map(|i| (proj.0[i] / ps - target[i]).powi(2)).sum::<f64>().sqrt();
        (ps > 0.0 && err <= 1e-8).then(|| Form::new(MonomialOrder::shared(2, 3), a.to_vec()).expect("cubic"))
    };
    if let Some(a) = completion_closed_form(&target) {
        let scale = SCoords::from_w(ctx, &SymMat::outer(&a)).norm().sqrt();
        if scale > 0.0 {
            let a = a.map(|v| v / scale);
            let polished = completion_solve(a, &target).unwrap_or(a);
            if let Some(q) = accept(polished).or_else(|| accept(a)) {
                return Some(q);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0b1c);
    for &a2 in &[0.0, 0.5, -0.5, 1.0, -1.0, 0.25, -0.25, 2.0, -2.0] {
        for _ in 0..4 {
            let start = [rng.sample(StandardNormal), a2, rng.sample(StandardNormal), rng.sample(StandardNormal)];
            if let Some(q) = completion_solve(start, &target).and_then(accept) {
                return Some(q);
            }
        }
    }
    None
}

/// Divided-power coefficients of `l^3` for a linear form `l = (u, v)`.
fn cube(l: [f64; 2]) -> [f64; 4] {
    [l[0].powi(3), l[0] * l[0] * l[1], l[0] * l[1] * l[1], l[1].powi(3)]
}

/// Divided-power coefficients of `l1 * l2^2`.
fn line_times_square(l1: [f64; 2], l2: [f64; 2]) -> [f64; 4] {
    let [u, v] = l1;
    let [p, q] = l2;
    [u * p * p, (v * p * p + 2.0 * u * p * q) / 3.0, (u * q * q + 2.0 * v * p * q) / 3.0, v * q * q]
}

/// Explicit preimage via covariance: `l(q)` is twice the Hessian of `q` read
/// in divided powers, so `l(q o P) = det(P)^2 l(q) o P`.
fn completion_closed_form(t: &[f64; 3]) -> Option<[f64; 4]> {
    let [l1, l2, l3] = *t;
    let disc = l2 * l2 - 4.0 * l1 * l3;
    if disc > 0.0 {
        // l1 x^2 + l2 xy + l3 y^2 = k L1 L2; q = L1^3 + sign(k) L2^3
        let root = disc.sqrt();
        let (k, m1, m2) = if l1.abs() >= l3.abs() {
            let r1 = (-l2 - l2.signum() * root) / (2.0 * l1);
            let r2 = l3 / (l1 * r1);
            (l1, [1.0, -r1], [1.0, -r2])
        } else {
            let s1 = (-l2 - l2.signum() * root) / (2.0 * l3);
            let s2 = l1 / (l3 * s1);
            (l3, [-s1, 1.0], [-s2, 1.0])
        };
        let (c1, c2) = (cube(m1), cube(m2));
        let sign = k.signum();
        return Some(std::array::from_fn(|i| c1[i] + sign * c2[i]));
    }
    if l1 > 0.0 || l3 > 0.0 || (l1 == 0.0 && l3 == 0.0) {
        return None;
    }
    // -(l1 x^2 + l2 xy + l3 y^2) = L1^2 + L2^2; q = L1^3 - 3 L1 L2^2
    let (a, b, c) = (-l1, -l2, -l3);
    let (m1, m2) = if a >= c {
        let s = a.sqrt();
        ([s, b / (2.0 * s)], [0.0, (c - b * b / (4.0 * a)).max(0.0).sqrt()])
    } else {
        let s = c.sqrt();
        ([b / (2.0 * s), s], [(a - b * b / (4.0 * c)).max(0.0).sqrt(), 0.0])
    };
    let det = m1[0] * m2[1] - m1[1] * m2[0];
    if det.abs() <= 1e-9 * (a + c) {
        // negative semidefinite: -L1^2 is the Hessian of L1^2 M
        let other = if a >= c { [0.0, 1.0] } else { [1.0, 0.0] };
        return Some(line_times_square(other, m1));
    }
    let (c1, c2) = (cube(m1), line_times_square(m1, m2));
    Some(std::array::from_fn(|i| c1[i] - 3.0 * c2[i]))
}

/// Truncated polynomial of degree ≤ 2 in three variables.
#[derive(Clone, Copy, Debug, Default)]
struct Quad {
    c: f64,
    l: [f64; 3],
    q: [[f64; 3]; 3],
}

impl Quad {
    fn mul(&self, o: &Quad) -> Quad {
        let mut out = Quad { c: self.c * o.c, ..Default::default() };
        for i in 0..3 {
            out.l[i] = self.c * o.l[i] + o.c * self.l[i];
        }
        for i in 0..3 {
            for j in 0..3 {
                out.q[i][j] = self.c * o.q[i][j] + o.c * self.q[i][j] + self.l[i] * o.l[j];
            }
        }
        out
    }

    fn add_scaled(&mut self, o: &Quad, s: f64) {
        self.c += s * o.c;
        for i in 0..3 {
            self.l[i] += s * o.l[i];
            for j in 0..3 {
                self.q[i][j] += s * o.q[i][j];
            }
        }
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<(Vec<usize>, f64)>) {
        if prefix.len() == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for v in 0..n {
            if !prefix.contains(&v) {
                prefix.push(v);
                rec(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// Boundary quadric of the normal cone at a rank-2 point.
#[derive(Clone, Debug)]
pub struct NcQuadric {
    /// Quadratic part of `det(θ + Σ λ_i R_i)` as a symmetric matrix.
    pub taylor2: SymMat<f64>,
    /// `taylor2⁻¹`, signed so the normal cone is `{μ : μᵀ D μ ≥ 0}` on the
    /// nappe containing `axis` (μ in SCoords).
    pub dual_form: SymMat<f64>,
    /// SCoords of a direction interior to the normal cone.
    pub axis: [f64; 3],
}

/// Orthonormal basis (4×2) of the kernel of a rank-2 point.
fn kernel_of_rank2(theta: &SymMat<f64>) -> Result<Matrix<f64>> {
    let e = eigh(theta)?;
    let max = e.values[0].abs();
    if e.values[1] <= 1e-8 * max || e.values[2].abs() > 1e-8 * max {
        return Err(GramError::InvalidInput("expected a psd tensor of rank 2".into()));
    }
    Ok(Matrix::from_fn(4, 2, |r, c| e.vectors[(r, 2 + c)]))
}

/// Linear map `S ↦ (tr(S Kᵀ R_i K))_i` from Sym²(R²) (coordinates s11, s12, s22).
fn cone_map(ctx: &GramContext, k: &Matrix<f64>) -> Matrix<f64> {
    let units = [
        SymMat::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(),
        SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        SymMat::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap(),
    ];
    Matrix::from_fn(3, 3, |i, j| units[j].congruence(k).trace_dot(&ctx.kernel_f64()[i]))
}

/// Exact membership of a direction (SCoords) in the normal cone at a rank-2
/// point: the preimage under the cone map must be psd.
pub fn normal_cone_contains(ctx: &GramContext, theta: &SymMat<f64>, l: &SCoords, tol: f64) -> Result<bool> {
    let k = kernel_of_rank2(theta)?;
    let map = cone_map(ctx, &k);
    let s = solve_dense(&map, &l.0).ok_or(GramError::DegenerateContact)?;
    let scale = l.norm().max(f64::MIN_POSITIVE);
    let (a, b, c) = (s[0] / scale, s[1] / scale, s[2] / scale);
    Ok(a >= -tol && c >= -tol && a * c - b * b >= -tol)
}

pub fn nc_quadric(ctx: &GramContext, theta: &SymMat<f64>) -> Result<NcQuadric> {
    let k = kernel_of_rank2(theta)?;
    let n = theta.size();
    let entries: Vec<Quad> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let mut e = Quad { c: theta[(i, j)], ..Default::default() };
            for (m, r) in ctx.kernel_f64().iter().enumerate() {
                e.l[m] = r[(i, j)];
            }
            e
        })
        .collect();
    let mut det = Quad::default();
    for (perm, sign) in permutations(n) {
        let mut term = Quad { c: 1.0, ..Default::default() };
        for (row, &col) in perm.iter().enumerate() {
            term = term.mul(&entries[row * n + col]);
        }
        det.add_scaled(&term, sign);
    }
    let taylor2 = SymMat::from_fn(3, |i, j| 0.5 * (det.q[i][j] + det.q[j][i]));
    let dt = det3(&taylor2);
    let scale = taylor2.max_abs();
    if dt.abs() <= 1e-12 * scale.powi(3) {
        return Err(GramError::DegenerateContact);
    }
    let mut dual = adjugate(&taylor2).scale(&(1.0 / dt));
    let map = cone_map(ctx, &k);
    let axis_v = map.matvec(&[1.0, 0.0, 1.0])?;
    let axis = [axis_v[0], axis_v[1], axis_v[2]];
    let val: f64 = (0..3).map(|i| (0..3).map(|j| axis[i] * dual[(i, j)] * axis[j]).sum::<f64>()).sum();
    if val < 0.0 {
        dual = dual.scale(&-1.0);
    }
    Ok(NcQuadric { taylor2, dual_form: dual, axis })
}

fn quad_value(d: &SymMat<f64>, x: &[f64; 3]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| x[i] * d[(i, j)] * x[j]).sum::<f64>()).sum()
}

/// `min_{t∈[0,1]} λ_max(t A + (1−t) B)`: negative iff the double cones
/// `xᵀAx ≥ 0` and `xᵀBx ≥ 0` meet only at the origin.
pub fn pencil_margin(a: &SymMat<f64>, b: &SymMat<f64>) -> Result<(f64, f64)> {
    let f = |t: f64| -> Result<f64> { Ok(eigh(&a.scale(&t).add(&b.scale(&(1.0 - t))))?.values[0]) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mut best = (f1.min(f2), if f1 <= f2 { x1 } else { x2 });
    for t in [0.0, 1.0] {
        let v = f(t)?;
        if v < best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// Points on the unit sphere with near-uniform spacing.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PairCheck {
    pub pair: (usize, usize),
    pub margin: f64,
    pub t: f64,
    pub sampled_common: usize,
    pub disjoint: bool,
}

#[derive(Clone, Debug)]
pub struct ConeReport {
    pub quadrics: Vec<NcQuadric>,
    pub pairs: Vec<PairCheck>,
    pub disjoint: bool,
}

pub const CONE_SAMPLES: usize = 100_000;

/// Pairwise disjointness of the double cones at the three non-distinguished
/// rank-2 points.
pub fn cone_report(ctx: &GramContext, f: &Form<f64>) -> Result<ConeReport> {
    let set = rank2_points(f)?;
    let quadrics: Vec<NcQuadric> = set.others().map(|t| nc_quadric(ctx, t)).collect::<Result<_>>()?;
    let normalized: Vec<SymMat<f64>> = quadrics.iter().map(|q| q.dual_form.scale(&(1.0 / q.dual_form.frobenius_norm()))).collect();
    let sphere = fibonacci_sphere(CONE_SAMPLES);
    let mut pairs = Vec::new();
    for a in 0..normalized.len() {
        for b in a + 1..normalized.len() {
            let (margin, t) = pencil_margin(&normalized[a], &normalized[b])?;
            let sampled_common = sphere
                .iter()
                .filter(|x| quad_value(&normalized[a], x) >= 0.0 && quad_value(&normalized[b], x) >= 0.0)
                .count();
            let disjoint = margin < -1e-12;
            if disjoint && sampled_common > 0 {
                return Err(GramError::SolverFailure(format!(
                    "cone pair ({a},{b}): pencil certifies disjointness but {sampled_common} samples lie in both"
                )));
            }
            pairs.push(PairCheck { pair: (a, b), margin, t, sampled_common, disjoint });
        }
    }
    let disjoint = pairs.iter().all(|p| p.disjoint);
    Ok(ConeReport { quadrics, pairs, disjoint })
}

pub fn cones_disjoint(ctx: &GramContext, f: &Form<f64>) -> Result<bool> {
    Ok(cone_report(ctx, f)?.disjoint)
}

impl ConeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "disjoint": self.disjoint,
            "quadrics": self.quadrics.iter().map(|q| json!({
                "taylor2": q.taylor2.to_rows(),
                "dualForm": q.dual_form.to_rows(),
                "axis": q.axis,
            })).collect::<Vec<_>>(),
            "pairs": self.pairs.iter().map(|p| json!({
                "pair": [p.pair.0, p.pair.1],
                "pencilMargin": p.margin,
                "t": p.t,
                "sampledCommon": p.sampled_common,
                "disjoint": p.disjoint,
            })).collect::<Vec<_>>(),
        })
    }
}
