//! Gram-map contexts: μ, the kernel W, the V-representative, pairings, faces
//! and normal-cone dimensions.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{GramError, Result};
use crate::linalg::{column_space, eigh, nullspace, numeric_rank, Matrix, SymMat};
use crate::polyalg::{check_independent, prod_space_dims, sym2_pair, Form, MonomialOrder, RANK_TOL};
use crate::scalar::Scalar;
use crate::sdp::{self, SdpStatus, SliceProblem};

/// Scalar product used on `Sym²R[x]_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// `tr(AB)`.
    Trace,
    /// `tr(MAMB)` with `M` the apolar Gram matrix of the monomial basis.
    Apolar,
}

impl Pairing {
    pub fn name(self) -> &'static str {
        match self {
            Pairing::Trace => "trace",
            Pairing::Apolar => "apolar",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GramContext {
    n: usize,
    d: usize,
    basis: Arc<MonomialOrder>,
    target: Arc<MonomialOrder>,
    /// target monomial of each packed upper-triangle slot
    slot_target: Vec<usize>,
    /// number of ordered pairs (i,j) with m_i m_j = target monomial
    pair_counts: Vec<i64>,
    mu: Matrix<i64>,
    kernel: Vec<SymMat<i64>>,
    kernel_f64: Vec<SymMat<f64>>,
    pairing: Pairing,
    weights: Vec<f64>,
    kernel_gram: SymMat<f64>,
    orthonormal: Vec<SymMat<f64>>,
}

/// Face of a Gram spectrahedron in a direction, with its dimensions.
#[derive(Clone, Debug)]
pub struct FaceReport {
    pub optimizer: SymMat<f64>,
    pub rank: usize,
    pub face_dim: usize,
    pub nc_dim_ambient: usize,
    pub nc_dim_w: i64,
    pub u_basis: Vec<Form<f64>>,
    pub objective_value: f64,
}

impl FaceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "faceDim": self.face_dim,
            "ncDimAmbient": self.nc_dim_ambient,
            "ncDimW": self.nc_dim_w,
            "objective": self.objective_value,
            "optimizer": self.optimizer.to_rows(),
            "U": self.u_basis.iter().map(|q| q.to_json()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NcDims {
    pub ambient: usize,
    pub in_w: i64,
}

fn int_rows(r: &SymMat<i64>) -> Vec<Vec<i64>> {
    (0..r.size()).map(|i| (0..r.size()).map(|j| r[(i, j)]).collect()).collect()
}

fn binom2(r: usize) -> usize {
    r * r.saturating_sub(1) / 2
}

/// Builds the context for forms of degree `2d` in `n` variables.
pub fn make_context(n: usize, d: usize) -> Result<GramContext> {
    let supported = (n == 2 && d == 3) || (n == 3 && d == 2);
    let best_effort = (1..=3).contains(&n) && (1..=3).contains(&d) && 2 * d <= 6;
    if !(supported || best_effort) {
        return Err(GramError::UnsupportedContext { n, d });
    }
    let basis = MonomialOrder::shared(n, d);
    let target = MonomialOrder::shared(n, 2 * d);
    let big_n = basis.len();
    let big_m = target.len();
    let mut slot_target = Vec::with_capacity(big_n * (big_n + 1) / 2);
    let mut slots_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); big_m];
    let mut pair_counts = vec![0i64; big_m];
    for i in 0..big_n {
        for j in i..big_n {
            let e: Vec<u32> = basis.exponents()[i].iter().zip(&basis.exponents()[j]).map(|(a, b)| a + b).collect();
            let m = target.position(&e).expect("product in target order");
            slot_target.push(m);
            slots_of[m].push((i, j));
            pair_counts[m] += if i == j { 1 } else { 2 };
        }
    }
    let cols = slot_target.len();
    let mut mu = Matrix::from_fn(big_m, cols, |_, _| 0i64);
    let mut slot = 0;
    for i in 0..big_n {
        for j in i..big_n {
            mu[(slot_target[slot], slot)] = if i == j { 1 } else { 2 };
            slot += 1;
        }
    }
    // integer kernel: for each target monomial relate its first slot to every
    // other slot, weighting so that the μ-contributions cancel
    let mut kernel: Vec<(Vec<u32>, SymMat<i64>)> = Vec::new();
    for (m, slots) in slots_of.iter().enumerate() {
        let Some(&(a0, b0)) = slots.first() else { continue };
        let c0 = if a0 == b0 { 1 } else { 2 };
        for &(a, b) in &slots[1..] {
            let c = if a == b { 1 } else { 2 };
            let g = if c0 == 2 && c == 2 { 2 } else { 1 };
            let mut r = SymMat::from_fn(big_n, |_, _| 0i64);
            r.set(a0, b0, c / g);
            r.set(a, b, -(c0 / g));
            kernel.push((target.exponents()[m].clone(), r));
        }
    }
    if n == 3 && d == 2 {
        // canonical order: x²y², x²z², y²z², x²yz, xy²z, xyz²
        let canonical: [[u32; 3]; 6] = [[2, 2, 0], [2, 0, 2], [0, 2, 2], [2, 1, 1], [1, 2, 1], [1, 1, 2]];
        kernel.sort_by_key(|(e, _)| canonical.iter().position(|c| c[..] == e[..]).unwrap_or(usize::MAX));
    }
    let kernel: Vec<SymMat<i64>> = kernel.into_iter().map(|(_, r)| r).collect();
    let kernel_f64: Vec<SymMat<f64>> = kernel.iter().map(|r| r.map(|&v| v as f64)).collect();
    let pairing = if n == 3 { Pairing::Apolar } else { Pairing::Trace };
    let weights: Vec<f64> = basis.apolar_weights();
    let mut ctx = GramContext {
        n,
        d,
        basis,
        target,
        slot_target,
        pair_counts,
        mu,
        kernel,
        kernel_f64,
        pairing,
        weights,
        kernel_gram: SymMat::zeros(0),
        orthonormal: Vec::new(),
    };
    let k = ctx.kernel_f64.len();
    ctx.kernel_gram = SymMat::from_fn(k, |i, j| ctx.pair(&ctx.kernel_f64[i], &ctx.kernel_f64[j]));
    // Gram-Schmidt in the context pairing
    let mut ortho: Vec<SymMat<f64>> = Vec::with_capacity(k);
    for r in &ctx.kernel_f64 {
        let mut v = r.clone();
        for e in &ortho {
            let c = ctx.pair(&v, e);
            if c != 0.0 {
                v = v.axpy(&-c, e);
            }
        }
        let nrm = ctx.pair(&v, &v).sqrt();
        ortho.push(v.scale(&(1.0 / nrm)));
    }
    ctx.orthonormal = ortho;
    Ok(ctx)
}

impl GramContext {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `N = dim R[x]_d`.
    pub fn big_n(&self) -> usize {
        self.basis.len()
    }

    /// `M = dim R[x]_{2d}`.
    pub fn big_m(&self) -> usize {
        self.target.len()
    }

    pub fn dim_w(&self) -> usize {
        self.kernel.len()
    }

    pub fn dim_sym2(&self) -> usize {
        let n = self.big_n();
        n * (n + 1) / 2
    }

    pub fn basis_order(&self) -> &Arc<MonomialOrder> {
        &self.basis
    }

    pub fn target_order(&self) -> &Arc<MonomialOrder> {
        &self.target
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn mu(&self) -> &Matrix<i64> {
        &self.mu
    }

    /// Integer basis of `W = ker μ`.
    pub fn kernel_basis(&self) -> &[SymMat<i64>] {
        &self.kernel
    }

    pub fn kernel_f64(&self) -> &[SymMat<f64>] {
        &self.kernel_f64
    }

    pub fn kernel_as<T: Scalar>(&self) -> Vec<SymMat<T>> {
        self.kernel.iter().map(|r| r.map(|&v| T::from_int(v))).collect()
    }

    /// Apolar weights `α!/d!` of the degree-d basis.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Basis of `W` orthonormal in the context pairing.
    pub fn orthonormal_basis(&self) -> &[SymMat<f64>] {
        &self.orthonormal
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n != self.big_n() {
            return Err(GramError::DimensionMismatch { expected: self.big_n(), found: n });
        }
        Ok(())
    }

    /// Gram map `μ(G) = Σ G_ij m_i m_j`.
    pub fn mu_apply<T: Scalar>(&self, g: &SymMat<T>) -> Result<Form<T>> {
        self.check_size(g.size())?;
        let mut coeffs = vec![T::zero(); self.big_m()];
        let mut slot = 0;
        for i in 0..self.big_n() {
            for j in i..self.big_n() {
                let v = g[(i, j)].clone();
                let m = self.slot_target[slot];
                coeffs[m] = if i == j { coeffs[m].clone() + v } else { coeffs[m].clone() + v.clone() + v };
                slot += 1;
            }
        }
        Form::new(self.target.clone(), coeffs)
    }

    /// Right inverse of μ with image trace-orthogonal to W: each coefficient is
    /// spread evenly over the ordered pairs of monomials producing it.
    pub fn v_rep<T: Scalar>(&self, f: &Form<T>) -> Result<SymMat<T>> {
        if **f.order() != *self.target {
            return Err(GramError::MismatchedOrders);
        }
        let mut slot = 0;
        let mut data = Vec::with_capacity(self.dim_sym2());
        for i in 0..self.big_n() {
            for _j in i..self.big_n() {
                let m = self.slot_target[slot];
                data.push(f.coeffs()[m].clone() / T::from_int(self.pair_counts[m]));
                slot += 1;
            }
        }
        SymMat::from_packed(self.big_n(), data)
    }

    /// Context pairing of two tensors.
    pub fn pair(&self, a: &SymMat<f64>, b: &SymMat<f64>) -> f64 {
        match self.pairing {
            Pairing::Trace => a.trace_dot(b),
            Pairing::Apolar => sym2_pair(a, b, &self.weights).expect("sizes match"),
        }
    }

    /// Exact context pairing.
    pub fn pair_exact<T: Scalar>(&self, a: &SymMat<T>, b: &SymMat<T>) -> T {
        match self.pairing {
            Pairing::Trace => a.trace_dot(b),
            Pairing::Apolar => {
                let w: Vec<T> = self.basis.apolar_weights();
                sym2_pair(a, b, &w).expect("sizes match")
            }
        }
    }

    /// Coefficients `c` of the W-component `Σ c_i R_i` of θ (orthogonal
    /// projection in the context pairing).
    pub fn pr_w(&self, theta: &SymMat<f64>) -> Result<Vec<f64>> {
        self.check_size(theta.size())?;
        let b: Vec<f64> = self.kernel_f64.iter().map(|r| self.pair(theta, r)).collect();
        if b.is_empty() {
            return Ok(b);
        }
        crate::linalg::solve_spd(&self.kernel_gram, &b)
            .ok_or_else(|| GramError::SolverFailure("kernel Gram matrix not positive definite".into()))
    }

    /// Exact projection coefficients; the kernel basis must be pairing-orthogonal.
    pub fn pr_w_exact<T: Scalar>(&self, theta: &SymMat<T>) -> Result<Vec<T>> {
        self.check_size(theta.size())?;
        let k = self.kernel_as::<T>();
        for i in 0..k.len() {
            for j in 0..i {
                if !self.pair_exact(&k[i], &k[j]).is_zero() {
                    return Err(GramError::InvalidInput("exact projection needs an orthogonal kernel basis".into()));
                }
            }
        }
        Ok(k.iter().map(|r| self.pair_exact(theta, r) / self.pair_exact(r, r)).collect())
    }

    pub fn from_w_coords(&self, c: &[f64]) -> SymMat<f64> {
        SymMat::combination(c, &self.kernel_f64, self.big_n())
    }

    pub fn w_component(&self, theta: &SymMat<f64>) -> Result<SymMat<f64>> {
        Ok(self.from_w_coords(&self.pr_w(theta)?))
    }

    /// Coordinates of the W-component of `w` in the orthonormal basis.
    pub fn orthonormal_coords(&self, w: &SymMat<f64>) -> Vec<f64> {
        self.orthonormal.iter().map(|e| self.pair(w, e)).collect()
    }

    pub fn from_orthonormal(&self, coords: &[f64]) -> SymMat<f64> {
        SymMat::combination(coords, &self.orthonormal, self.big_n())
    }

    /// Matrix `C` with `tr(C X) = ⟨w_W, X⟩` in the context pairing.
    pub fn objective_matrix(&self, w: &SymMat<f64>) -> Result<SymMat<f64>> {
        let ww = self.w_component(w)?;
        Ok(match self.pairing {
            Pairing::Trace => ww,
            Pairing::Apolar => SymMat::from_fn(ww.size(), |i, j| self.weights[i] * ww[(i, j)] * self.weights[j]),
        })
    }

    pub fn slice_problem(&self, f: &Form<f64>, w: &SymMat<f64>) -> Result<SliceProblem> {
        Ok(SliceProblem::new(self.v_rep(f)?, self.kernel_f64.clone(), self.objective_matrix(w)?))
    }

    /// Face of `gram(f)` minimizing `⟨w, ·⟩`.
    pub fn face(&self, f: &Form<f64>, w: &SymMat<f64>) -> Result<FaceReport> {
        self.face_with_start(f, w, None)
    }

    pub fn face_with_start(&self, f: &Form<f64>, w: &SymMat<f64>, start: Option<&[f64]>) -> Result<FaceReport> {
        let mut p = self.slice_problem(f, w)?;
        p.start = start.map(|s| s.to_vec());
        let sol = sdp::solve(&p)?;
        match sol.status {
            SdpStatus::Optimal => {}
            SdpStatus::Infeasible => return Err(GramError::Infeasible),
            SdpStatus::NumericalFailure => {
                return Err(GramError::SolverFailure(format!("no convergence (gap {:e})", sol.gap)))
            }
        }
        let u_basis = self.image_forms(&sol.x)?;
        let rank = u_basis.len();
        let face_dim = if rank == 0 { 0 } else { rank * (rank + 1) / 2 - prod_space_dims(&u_basis)?.dim_u2 };
        let nc = self.nc_dim(&u_basis)?;
        Ok(FaceReport {
            optimizer: sol.x,
            rank,
            face_dim,
            nc_dim_ambient: nc.ambient,
            nc_dim_w: nc.in_w,
            u_basis,
            objective_value: sol.objective_value,
        })
    }

    /// Orthonormal basis of the column space of a psd tensor, as forms.
    pub fn image_forms(&self, x: &SymMat<f64>) -> Result<Vec<Form<f64>>> {
        let e = eigh(x)?;
        let max = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rank = if max == 0.0 { 0 } else { e.values.iter().filter(|v| v.abs() > RANK_TOL * max).count() };
        (0..rank).map(|k| Form::new(self.basis.clone(), e.vector(k))).collect()
    }

    /// Normal-cone dimension from the multiplication-map nullity.
    pub fn nc_dim(&self, u: &[Form<f64>]) -> Result<NcDims> {
        let r = u.len();
        let dims = prod_space_dims(u)?;
        let ambient = self.dim_sym2() + binom2(r) - dims.nullity;
        Ok(NcDims { ambient, in_w: ambient as i64 - self.big_m() as i64 })
    }

    /// Normal-cone dimension via `dim Sym² − dim(ker μ ∩ Sym(U ⊗ R[x]_d))`.
    pub fn nc_dim_oracle(&self, u: &[Form<f64>]) -> Result<usize> {
        check_independent(u)?;
        let big_n = self.big_n();
        let mut gens: Vec<Vec<f64>> = Vec::with_capacity(u.len() * big_n);
        for q in u {
            for j in 0..big_n {
                let mut e = vec![0.0; big_n];
                e[j] = 1.0;
                gens.push(SymMat::sym_outer(q.coeffs(), &e).packed().to_vec());
            }
        }
        let span = column_space(&gens, RANK_TOL)?;
        let s = span.len();
        if s == 0 {
            return Ok(self.dim_sym2());
        }
        let mu = self.mu.map(|&v| v as f64);
        let images: Vec<Vec<f64>> = span.iter().map(|b| mu.matvec(b)).collect::<Result<_>>()?;
        let rank = numeric_rank(&Matrix::from_rows(&images)?, RANK_TOL)?;
        Ok(self.dim_sym2() - (s - rank))
    }

    /// Basis of `{K : im K ⊆ U, μ(K) = 0}`.
    pub fn face_subspace(&self, u: &[Form<f64>]) -> Result<Vec<SymMat<f64>>> {
        check_independent(u)?;
        let r = u.len();
        if r == 0 {
            return Ok(Vec::new());
        }
        let ob = column_space(&u.iter().map(|q| q.coeffs().to_vec()).collect::<Vec<_>>(), RANK_TOL)?;
        let b = Matrix::from_rows(&ob)?.transpose();
        let mut units = Vec::with_capacity(r * (r + 1) / 2);
        let mut columns = Vec::with_capacity(r * (r + 1) / 2);
        for k in 0..r {
            for l in k..r {
                let mut e = SymMat::zeros(r);
                e.set(k, l, 1.0);
                let t = e.congruence(&b);
                columns.push(self.mu_apply(&t)?.coeffs().to_vec());
                units.push(t);
            }
        }
        let a = Matrix::from_rows(&columns)?.transpose();
        let kernel = nullspace(&a, RANK_TOL)?;
        Ok(kernel
            .into_iter()
            .map(|s| {
                let k = SymMat::combination(&s, &units, self.big_n());
                let nrm = self.pair(&k, &k).sqrt();
                k.scale(&(1.0 / nrm))
            })
            .collect())
    }

    pub fn dump_json(&self) -> Value {
        json!({
            "n": self.n,
            "d": self.d,
            "N": self.big_n(),
            "M": self.big_m(),
            "dimW": self.dim_w(),
            "pairing": self.pairing.name(),
            "basis_monomials": (0..self.big_n()).map(|i| self.basis.key(i)).collect::<Vec<_>>(),
            "target_monomials": (0..self.big_m()).map(|i| self.target.key(i)).collect::<Vec<_>>(),
            "mu": self.mu.to_rows(),
            "kernel_basis": self.kernel.iter().map(int_rows).collect::<Vec<_>>(),
            "kernel_pairings": self.kernel_f64.iter().map(|r| self.pair(r, r)).collect::<Vec<_>>(),
        })
    }
}
