//! Ternary quartics: the Q(w) calculus on W, direction classification,
//! completions, splittings, the 3-dimensional face directions and exact
//! rational certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::error::{GramError, Result};
use crate::gram::{make_context, GramContext};
use crate::linalg::{adjugate, det3, eigh, rational_ldl, rational_solve, Matrix, SolveOutcome, SymMat};
use crate::polyalg::{Form, MonomialOrder};
use crate::scalar::{format_rational, rational_from_f64, Scalar};
use crate::SymMatQ;

/// Relative eigenvalue threshold deciding the rank of Q(w).
pub const Q_RANK_TOL: f64 = 1e-8;
/// Eigenvalues between this and `Q_RANK_TOL` (relative) are ambiguous.
pub const Q_ZERO_TOL: f64 = 1e-9;

pub fn quartic_context() -> GramContext {
    make_context(3, 2).expect("ternary quartic context")
}

/// Q(w) from λ = (λ₁, …, λ₆).
pub fn q_of_lambda<T: Scalar>(l: &[T]) -> SymMat<T> {
    assert_eq!(l.len(), 6, "six Q-coordinates");
    let n = |v: &T| -v.clone();
    SymMat::from_rows(&[
        vec![l[2].clone(), n(&l[5]), n(&l[4])],
        vec![n(&l[5]), l[1].clone(), n(&l[3])],
        vec![n(&l[4]), n(&l[3]), l[0].clone()],
    ])
    .expect("symmetric by construction")
}

pub fn lambda_of_q<T: Scalar>(q: &SymMat<T>) -> [T; 6] {
    [
        q[(2, 2)].clone(),
        q[(1, 1)].clone(),
        q[(0, 0)].clone(),
        -q[(1, 2)].clone(),
        -q[(0, 2)].clone(),
        -q[(0, 1)].clone(),
    ]
}

/// Q-coordinates `λ_i = ⟨w, R_i/2⟩` in the apolar pairing.
pub fn lambda_of_w(ctx: &GramContext, w: &SymMat<f64>) -> [f64; 6] {
    let k = ctx.kernel_f64();
    std::array::from_fn(|i| 0.5 * ctx.pair(w, &k[i]))
}

pub fn lambda_of_w_exact<T: Scalar>(ctx: &GramContext, w: &SymMat<T>) -> [T; 6] {
    let k = ctx.kernel_as::<T>();
    let half = T::from_ratio(1, 2);
    std::array::from_fn(|i| ctx.pair_exact(w, &k[i]) * half.clone())
}

/// `w = Σ λ_i / ⟨R̂_i, R̂_i⟩ · R̂_i` with `R̂_i = R_i/2`.
pub fn w_of_lambda(ctx: &GramContext, l: &[f64]) -> SymMat<f64> {
    let k = ctx.kernel_f64();
    // coefficient of R_i is λ_i / (2 ⟨R̂_i,R̂_i⟩) = 2 λ_i / ⟨R_i,R_i⟩
    let c: Vec<f64> = (0..6).map(|i| 2.0 * l[i] / ctx.pair(&k[i], &k[i])).collect();
    ctx.from_w_coords(&c)
}

pub fn w_of_lambda_exact<T: Scalar>(ctx: &GramContext, l: &[T]) -> SymMat<T> {
    let k = ctx.kernel_as::<T>();
    let two = T::from_int(2);
    let c: Vec<T> = (0..6).map(|i| two.clone() * l[i].clone() / ctx.pair_exact(&k[i], &k[i])).collect();
    SymMat::combination(&c, &k, ctx.big_n())
}

pub fn q_of_w(ctx: &GramContext, w: &SymMat<f64>) -> SymMat<f64> {
    q_of_lambda(&lambda_of_w(ctx, w))
}

pub fn w_of_q(ctx: &GramContext, q: &SymMat<f64>) -> SymMat<f64> {
    w_of_lambda(ctx, &lambda_of_q(q))
}

/// Ternary quadric `xᵀ A x` in the order x², y², z², xy, xz, yz.
pub fn quadric_of_matrix<T: Scalar>(a: &SymMat<T>) -> Form<T> {
    let two = T::from_int(2);
    let c = vec![
        a[(0, 0)].clone(),
        a[(1, 1)].clone(),
        a[(2, 2)].clone(),
        two.clone() * a[(0, 1)].clone(),
        two.clone() * a[(0, 2)].clone(),
        two * a[(1, 2)].clone(),
    ];
    Form::new(MonomialOrder::shared(3, 2), c).expect("six coefficients")
}

pub fn matrix_of_quadric<T: Scalar>(q: &Form<T>) -> SymMat<T> {
    let c = q.coeffs();
    let h = T::from_ratio(1, 2);
    SymMat::from_rows(&[
        vec![c[0].clone(), h.clone() * c[3].clone(), h.clone() * c[4].clone()],
        vec![h.clone() * c[3].clone(), c[1].clone(), h.clone() * c[5].clone()],
        vec![h.clone() * c[4].clone(), h * c[5].clone(), c[2].clone()],
    ])
    .expect("symmetric by construction")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionTag {
    ThreeDimFace,
    ExtremeByRank1,
    ExtremeBySplit,
    ExtremeBorderline,
}

impl DirectionTag {
    pub fn name(self) -> &'static str {
        match self {
            DirectionTag::ThreeDimFace => "ThreeDimFace",
            DirectionTag::ExtremeByRank1 => "ExtremeByRank1",
            DirectionTag::ExtremeBySplit => "ExtremeBySplit",
            DirectionTag::ExtremeBorderline => "ExtremeBorderline",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DirectionClass {
    pub tag: DirectionTag,
    pub q: SymMat<f64>,
    pub det_q: f64,
    pub rank_q: usize,
}

impl DirectionClass {
    pub fn to_json(&self) -> Value {
        json!({
            "tag": self.tag.name(),
            "Q": self.q.map(|v| v + 0.0).to_rows(),
            "detQ": self.det_q + 0.0,
            "rankQ": self.rank_q,
        })
    }
}

pub fn classify_q(q: &SymMat<f64>) -> Result<DirectionClass> {
    let e = eigh(q)?;
    let s = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s == 0.0 {
        return Err(GramError::InvalidInput("zero direction".into()));
    }
    let rank_q = e.values.iter().filter(|v| v.abs() > Q_RANK_TOL * s).count();
    let ambiguous = e.values.iter().any(|v| v.abs() > Q_ZERO_TOL * s && v.abs() <= Q_RANK_TOL * s);
    let det_q = det3(q);
    let tag = if ambiguous {
        DirectionTag::ExtremeBorderline
    } else if rank_q == 1 {
        DirectionTag::ThreeDimFace
    } else if rank_q == 2 {
        DirectionTag::ExtremeBySplit
    } else if e.values.iter().filter(|v| **v < 0.0).count() % 2 == 0 {
        DirectionTag::ExtremeByRank1
    } else {
        DirectionTag::ExtremeBySplit
    };
    Ok(DirectionClass { tag, q: q.clone(), det_q, rank_q })
}

pub fn classify(ctx: &GramContext, w: &SymMat<f64>) -> Result<DirectionClass> {
    classify_q(&q_of_w(ctx, w))
}

#[derive(Clone, Debug)]
pub struct Completion {
    /// Quadric of `adj Q(w)`.
    pub q: Form<f64>,
    /// `det Q(w)`, the factor in `pr_W(q⊗q) = det Q(w) · w`.
    pub factor: f64,
    /// Relative residual of the projection identity.
    pub residual: f64,
}

/// Quadric `q` with `pr_W(q⊗q) = det Q(w) · w` for `det Q(w) > 0`.
pub fn rank1_complete(ctx: &GramContext, w: &SymMat<f64>) -> Result<Completion> {
    let qw = q_of_w(ctx, w);
    let det = det3(&qw);
    let nrm = qw.frobenius_norm();
    if det <= 1e-10 * nrm.powi(3) {
        return Err(GramError::WrongClass(format!("det Q(w) = {det:e} is not positive")));
    }
    let q = quadric_of_matrix(&adjugate(&qw));
    let proj = ctx.w_component(&SymMat::outer(q.coeffs()))?;
    let target = ctx.w_component(w)?.scale(&det);
    let residual = proj.sub(&target).frobenius_norm() / target.frobenius_norm();
    if residual > 1e-8 {
        return Err(GramError::SolverFailure(format!("projection identity residual {residual:e}")));
    }
    Ok(Completion { q, factor: det, residual })
}

#[derive(Clone, Debug)]
pub struct Split {
    pub q1: SymMatQ,
    pub q2: SymMatQ,
    pub det1: BigRational,
    pub det2: BigRational,
}

impl Split {
    pub fn q1_f64(&self) -> SymMat<f64> {
        self.q1.map(|v| v.to_f64())
    }

    pub fn q2_f64(&self) -> SymMat<f64> {
        self.q2.map(|v| v.to_f64())
    }

    pub fn to_json(&self) -> Value {
        let rows = |m: &SymMatQ| -> Vec<Vec<String>> {
            m.to_rows().iter().map(|r| r.iter().map(format_rational).collect()).collect()
        };
        json!({
            "Q1": rows(&self.q1),
            "Q2": rows(&self.q2),
            "det1": format_rational(&self.det1),
            "det2": format_rational(&self.det2),
        })
    }
}

fn exact_sym(m: &SymMat<f64>) -> SymMatQ {
    m.map(|v| rational_from_f64(*v))
}

/// `Q = Q₁ + Q₂` with `det Q₁, det Q₂ > 0`, for `det Q < 0` or rank 2.
///
/// The sum is exact: `Q₂ = Q − Q₁` is formed over ℚ from the binary values
/// of `Q` and the rounded `Q₁`.
pub fn split_psd_pair(q: &SymMat<f64>) -> Result<Split> {
    let e = eigh(q)?;
    let s = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s == 0.0 {
        return Err(GramError::InvalidInput("zero matrix".into()));
    }
    let sign = |v: f64| if v > Q_ZERO_TOL * s { 1 } else if v < -Q_ZERO_TOL * s { -1 } else { 0 };
    let signs: Vec<i32> = e.values.iter().map(|&v| sign(v)).collect();
    let nonzero: Vec<usize> = (0..3).filter(|&i| signs[i] != 0).collect();
    let zero: Vec<usize> = (0..3).filter(|&i| signs[i] == 0).collect();
    let positives = signs.iter().filter(|&&v| v > 0).count();
    // order: nonzero eigenvalues (descending) then the kernel direction
    let order: Vec<usize> = nonzero.iter().chain(zero.iter()).copied().collect();
    let d: Vec<f64> = order.iter().map(|&i| e.values[i]).collect();
    let basis = Matrix::from_fn(3, 3, |r, c| e.vectors[(r, order[c])]);
    let q1_diag: SymMat<f64> = match (nonzero.len(), positives) {
        (3, 2) => SymMat::diag(&[d[0] / 2.0, 2.0 * d[1], -d[2]]),
        (3, 0) => SymMat::diag(&[2.0 * d[0], -d[1], d[2] / 2.0]),
        (2, 2) => SymMat::diag(&[d[0] / 2.0, 2.0 * d[1], 1.0]),
        (2, 1) => SymMat::diag(&[d[0] / 2.0, -d[1], 1.0]),
        (2, 0) => {
            let c = d[1].abs();
            let b = 1.5f64.sqrt() * d[1].abs();
            SymMat::from_rows(&[vec![2.0 * d[0], 0.0, 0.0], vec![0.0, -d[1], b], vec![0.0, b, c]])?
        }
        _ => {
            return Err(GramError::WrongClass(format!(
                "no splitting recipe for eigenvalue signs {signs:?} (det Q ≥ 0 with full rank, or rank < 2)"
            )))
        }
    };
    let q1 = exact_sym(&q1_diag.congruence(&basis));
    let q2 = exact_sym(q).sub(&q1);
    let det1 = det3(&q1);
    let det2 = det3(&q2);
    if !det1.is_positive() || !det2.is_positive() {
        return Err(GramError::SolverFailure(format!(
            "split lost positivity in rounding (dets {:e}, {:e})",
            det1.to_f64(),
            det2.to_f64()
        )));
    }
    Ok(Split { q1, q2, det1, det2 })
}

/// Split of Q(w) together with `θ = Σ q_i⊗q_i / det Q_i`, `q_i` the quadric
/// of `adj Q_i`; `pr_W(θ) = w`.
pub fn split_tensor(ctx: &GramContext, w: &SymMat<f64>) -> Result<(Split, SymMat<f64>)> {
    let split = split_psd_pair(&q_of_w(ctx, w))?;
    let mut theta = SymMat::zeros(ctx.big_n());
    for (qi, di) in [(split.q1_f64(), split.det1.to_f64()), (split.q2_f64(), split.det2.to_f64())] {
        let form = quadric_of_matrix(&adjugate(&qi));
        theta = theta.axpy(&(1.0 / di), &SymMat::outer(form.coeffs()));
    }
    Ok((split, theta))
}

fn sym_of(p: &Form<f64>, q: &Form<f64>) -> SymMat<f64> {
    SymMat::sym_outer(p.coeffs(), q.coeffs())
}

fn linear(v: &[f64]) -> Form<f64> {
    Form::new(MonomialOrder::shared(3, 1), v.to_vec()).expect("three coefficients")
}

/// Direction space of the 3-dimensional face in a direction with rank Q(w) = 1.
///
/// With `Q(w) = c·v vᵀ` (v scaled to first nonzero entry 1) and `l`, `m`
/// completing v to a basis, returns `2(v² ∘ l² − vl ⊗ vl)`,
/// `2(v² ∘ m² − vm ⊗ vm)` and `2(v² ∘ lm − vl ∘ vm)`.
pub fn face_direction_subspace(ctx: &GramContext, w: &SymMat<f64>) -> Result<Vec<SymMat<f64>>> {
    let class = classify(ctx, w)?;
    if class.tag != DirectionTag::ThreeDimFace {
        return Err(GramError::WrongClass(format!("rank Q(w) = {} (expected 1)", class.rank_q)));
    }
    let q = &class.q;
    let k = (0..3).max_by(|&a, &b| q[(a, a)].abs().total_cmp(&q[(b, b)].abs())).expect("three entries");
    let mut v: Vec<f64> = (0..3).map(|i| q[(i, k)] / q[(k, k)]).collect();
    if let Some(first) = v.iter().position(|x| x.abs() > 1e-12) {
        let s = v[first];
        v.iter_mut().for_each(|x| *x /= s);
    }
    let lead = v.iter().position(|x| x.abs() > 1e-12).expect("nonzero vector");
    let others: Vec<usize> = (0..3).filter(|&i| i != lead).collect();
    let unit = |i: usize| {
        let mut e = vec![0.0; 3];
        e[i] = 1.0;
        linear(&e)
    };
    let vf = linear(&v);
    let v2 = vf.square();
    let (l, m) = (unit(others[0]), unit(others[1]));
    let (vl, vm) = (vf.mul(&l)?, vf.mul(&m)?);
    let g = |a: &Form<f64>, va: &Form<f64>| sym_of(&v2, &a.square()).sub(&sym_of(va, va)).scale(&2.0);
    let p = sym_of(&v2, &l.mul(&m)?).sub(&sym_of(&vl, &vm)).scale(&2.0);
    Ok(vec![g(&l, &vl), g(&m, &vm), p])
}

/// Generator of the normal cone at a rank-5 extreme point whose image is
/// `span(q)^⊥`: the direction with `Q(w) = adj Q_q`.
pub fn normal_cone_generator(ctx: &GramContext, q: &Form<f64>) -> Result<SymMat<f64>> {
    let a = adjugate(&matrix_of_quadric(q));
    if det3(&a) <= 0.0 {
        return Err(GramError::WrongClass("quadric is not of rank 3".into()));
    }
    Ok(w_of_q(ctx, &a))
}

/// Exact sos certificate from a face in a direction with rational Q(w).
#[derive(Clone, Debug)]
pub struct RationalCertificate {
    pub theta: SymMatQ,
    /// Pairs `(weight, f_i)` with `Σ weight · f_i² = f`.
    pub sos: Vec<(BigRational, Form<BigRational>)>,
    pub f_check: bool,
    /// Quadric of `adj Q(w)`; the image of θ is its apolar complement.
    pub q: Form<BigRational>,
}

impl RationalCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "theta": self.theta.to_rows().iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "sos": self.sos.iter().map(|(w, f)| json!({"weight": format_rational(w), "form": f.to_json()})).collect::<Vec<_>>(),
            "fCheck": self.f_check,
            "q": self.q.to_json(),
        })
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Basis of `{u ∈ R[x]_2 : ⟨u, q⟩ = 0}` in the apolar pairing.
pub fn apolar_complement(q: &Form<BigRational>) -> Result<Vec<Vec<BigRational>>> {
    let w: Vec<BigRational> = q.order().apolar_weights();
    let row: Vec<BigRational> = w.iter().zip(q.coeffs()).map(|(a, b)| a * b).collect();
    let a = Matrix::from_rows(&[row])?;
    match rational_solve(&a, &[rat(0)])? {
        SolveOutcome::Solution { nullspace, .. } => Ok(nullspace),
        SolveOutcome::Inconsistent => unreachable!("homogeneous system"),
    }
}

/// Rational Gram tensor and sos decomposition of `f` supported on
/// `span(q)^⊥`, where `q` is the quadric of `adj Q(λ)`.
pub fn rational_certificate(f: &Form<BigRational>, lambda: &[BigRational]) -> Result<RationalCertificate> {
    let ctx = quartic_context();
    if f.n() != 3 || f.degree() != 4 {
        return Err(GramError::InvalidInput("expected a ternary quartic".into()));
    }
    if lambda.len() != 6 {
        return Err(GramError::DimensionMismatch { expected: 6, found: lambda.len() });
    }
    let qw = q_of_lambda(lambda);
    if !det3(&qw).is_positive() {
        return Err(GramError::WrongClass("det Q(w) must be positive".into()));
    }
    let q = quadric_of_matrix(&adjugate(&qw));
    let u = apolar_complement(&q)?;
    let r = u.len();
    let big_n = ctx.big_n();
    let b = Matrix::from_fn(big_n, r, |i, j| u[j][i].clone());
    // unknowns: upper triangle of S (r×r); θ = B S Bᵀ
    let mut slots = Vec::new();
    let mut columns = Vec::new();
    for k in 0..r {
        for l in k..r {
            let mut e = SymMat::zeros(r);
            e.set(k, l, BigRational::one());
            let t = e.congruence(&b);
            columns.push(ctx.mu_apply(&t)?.coeffs().to_vec());
            slots.push((k, l));
        }
    }
    let rows = f.coeffs().len();
    let a = Matrix::from_fn(rows, slots.len(), |i, j| columns[j][i].clone());
    let (particular, nullspace) = match rational_solve(&a, f.coeffs())? {
        SolveOutcome::Solution { particular, nullspace } => (particular, nullspace),
        SolveOutcome::Inconsistent => {
            return Err(GramError::PreconditionViolated("f is not in the span of U²".into()))
        }
    };
    if !nullspace.is_empty() {
        return Err(GramError::PreconditionViolated(format!("Gram tensor supported on U is not unique ({} free)", nullspace.len())));
    }
    let mut s = SymMat::zeros(r);
    for (&(k, l), v) in slots.iter().zip(particular) {
        s.set(k, l, v);
    }
    let ldl = match rational_ldl(&s.to_dense()) {
        Ok(ldl) => ldl,
        Err(GramError::NotPsd { .. }) => {
            return Err(GramError::PreconditionViolated("the Gram tensor supported on U is not psd".into()))
        }
        Err(e) => return Err(e),
    };
    if ldl.rank() != r {
        return Err(GramError::PreconditionViolated(format!("Gram tensor has rank {} < {r}", ldl.rank())));
    }
    let theta = s.congruence(&b);
    let order = MonomialOrder::shared(3, 2);
    let mut sos = Vec::with_capacity(r);
    for k in 0..r {
        let mut y = vec![rat(0); r];
        for i in 0..r {
            y[ldl.perm[i]] = ldl.l[(i, k)].clone();
        }
        let coeffs = b.matvec(&y)?;
        sos.push((ldl.d[k].clone(), Form::new(order.clone(), coeffs)?));
    }
    let mut total = Form::zero(3, 4);
    for (wgt, fi) in &sos {
        total = total.add(&fi.square().scale(wgt))?;
    }
    let f_check = total == *f && ctx.mu_apply(&theta)? == *f;
    if !f_check {
        return Err(GramError::SolverFailure("exact reconstruction failed".into()));
    }
    Ok(RationalCertificate { theta, sos, f_check, q })
}
