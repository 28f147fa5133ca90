//! Homogeneous forms over a fixed graded monomial order, the apolarity pairing
//! and ranks of multiplication maps.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{GramError, Result};
use crate::linalg::{numeric_rank, Matrix, SymMat};
use crate::scalar::{format_rational, parse_rational, Scalar};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MonomialOrder {
    n: usize,
    d: usize,
    exponents: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl PartialEq for MonomialOrder {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.exponents == other.exponents
    }
}

impl Eq for MonomialOrder {}

fn graded_lex(n: usize, d: usize) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    if n == 1 {
        return vec![vec![d as u32]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in graded_lex(n - 1, d - first) {
            rest.insert(0, first as u32);
            out.push(rest);
        }
    }
    out
}

/// Monomials of degree `d` in `n` variables. Graded lex, except that ternary
/// quadrics use `[x², y², z², xy, xz, yz]`.
pub fn monomial_basis(n: usize, d: usize) -> MonomialOrder {
    let exponents = if n == 3 && d == 2 {
        vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2], vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]
    } else {
        graded_lex(n, d)
    };
    let index = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    MonomialOrder { n, d, exponents, index }
}

impl MonomialOrder {
    /// Cached shared instance for `(n, d)`.
    pub fn shared(n: usize, d: usize) -> Arc<MonomialOrder> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialOrder>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial cache poisoned");
        guard.entry((n, d)).or_insert_with(|| Arc::new(monomial_basis(n, d))).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn position(&self, exps: &[u32]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// `α!/d!` for each monomial: the apolarity Gram matrix is diagonal with these entries.
    pub fn apolar_weights<T: Scalar>(&self) -> Vec<T> {
        let dfact = factorial(self.d as u32);
        self.exponents
            .iter()
            .map(|e| T::from_ratio(e.iter().map(|&a| factorial(a)).product(), dfact))
            .collect()
    }

    /// Exponent string key such as `"400"`.
    pub fn key(&self, i: usize) -> String {
        self.exponents[i].iter().map(|e| e.to_string()).collect()
    }

    pub fn monomial_name(&self, i: usize) -> String {
        const VARS: [&str; 6] = ["x", "y", "z", "w", "u", "v"];
        let mut s = String::new();
        for (k, &e) in self.exponents[i].iter().enumerate() {
            let v = VARS.get(k).copied().unwrap_or("t");
            match e {
                0 => {}
                1 => s.push_str(v),
                _ => s.push_str(&format!("{v}^{e}")),
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

fn factorial(k: u32) -> i64 {
    (1..=k as i64).product()
}

/// Dense coefficient vector aligned with a shared monomial order.
#[derive(Clone)]
pub struct Form<T> {
    order: Arc<MonomialOrder>,
    coeffs: Vec<T>,
}

impl<T: PartialEq> PartialEq for Form<T> {
    fn eq(&self, other: &Self) -> bool {
        *self.order == *other.order && self.coeffs == other.coeffs
    }
}

impl<T: fmt::Debug> fmt::Debug for Form<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(n={}, d={}, {:?})", self.order.n, self.order.d, self.coeffs)
    }
}

fn same_order<T>(a: &Form<T>, b: &Form<T>) -> Result<()> {
    if Arc::ptr_eq(&a.order, &b.order) || *a.order == *b.order {
        Ok(())
    } else {
        Err(GramError::MismatchedOrders)
    }
}

impl<T> Form<T> {
    pub fn order(&self) -> &Arc<MonomialOrder> {
        &self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.order.n
    }

    pub fn degree(&self) -> usize {
        self.order.d
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Form<U> {
        Form { order: self.order.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<T: Scalar> Form<T> {
    pub fn new(order: Arc<MonomialOrder>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != order.len() {
            return Err(GramError::DimensionMismatch { expected: order.len(), found: coeffs.len() });
        }
        Ok(Form { order, coeffs })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        let order = MonomialOrder::shared(n, d);
        let coeffs = vec![T::zero(); order.len()];
        Form { order, coeffs }
    }

    /// Builds from `(exponents, coefficient)` pairs; repeated monomials add up.
    pub fn from_terms(n: usize, d: usize, terms: &[(&[u32], T)]) -> Result<Self> {
        let mut f: Form<T> = Form::zero(n, d);
        for (e, c) in terms {
            let i = f
                .order
                .position(e)
                .ok_or_else(|| GramError::InvalidInput(format!("monomial {e:?} not of degree {d} in {n} variables")))?;
            f.coeffs[i] = f.coeffs[i].clone() + c.clone();
        }
        Ok(f)
    }

    pub fn coeff(&self, exps: &[u32]) -> T {
        self.order.position(exps).map_or(T::zero(), |i| self.coeffs[i].clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_order(self, other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Form { order: self.order.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_order(self, other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Form { order: self.order.clone(), coeffs })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(GramError::MismatchedOrders);
        }
        let mut out: Form<T> = Form::zero(self.n(), self.degree() + other.degree());
        let mut e = vec![0u32; self.n()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for k in 0..e.len() {
                    e[k] = self.order.exponents[i][k] + other.order.exponents[j][k];
                }
                let p = out.order.position(&e).expect("product monomial in order");
                out.coeffs[p] = out.coeffs[p].clone() + a.clone() * b.clone();
            }
        }
        Ok(out)
    }

    pub fn square(&self) -> Self {
        self.mul(self).expect("same variables")
    }

    pub fn eval(&self, point: &[T]) -> T {
        let mut acc = T::zero();
        for (c, e) in self.coeffs.iter().zip(&self.order.exponents) {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn to_f64(&self) -> Form<f64> {
        self.map(|c| c.to_f64())
    }
}

impl Form<f64> {
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Value {
        let mut coeffs = BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                coeffs.insert(self.order.key(i), json!(c));
            }
        }
        json!({"n": self.n(), "d": self.degree(), "coeffs": coeffs})
    }
}

impl Form<BigRational> {
    pub fn to_json(&self) -> Value {
        let mut coeffs = BTreeMap::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !num_traits::Zero::is_zero(c) {
                coeffs.insert(self.order.key(i), Value::String(format_rational(c)));
            }
        }
        json!({"n": self.n(), "d": self.degree(), "coeffs": coeffs})
    }
}

fn parse_form_json<T: Scalar>(v: &Value, parse: impl Fn(&Value) -> Option<T>) -> Result<Form<T>> {
    let bad = |msg: &str| GramError::InvalidInput(format!("form JSON: {msg}"));
    let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing n"))? as usize;
    let d = v.get("d").and_then(Value::as_u64).ok_or_else(|| bad("missing d"))? as usize;
    if n == 0 || n > 9 || d > 9 {
        return Err(bad("unsupported n or d"));
    }
    let mut f: Form<T> = Form::zero(n, d);
    if let Some(obj) = v.get("coeffs") {
        let obj = obj.as_object().ok_or_else(|| bad("coeffs must be an object"))?;
        for (k, c) in obj {
            let exps: Option<Vec<u32>> = k.chars().map(|ch| ch.to_digit(10)).collect();
            let exps = exps.filter(|e| e.len() == n).ok_or_else(|| bad(&format!("bad key {k}")))?;
            let i = f.order.position(&exps).ok_or_else(|| bad(&format!("key {k} has wrong degree")))?;
            f.coeffs[i] = parse(c).ok_or_else(|| bad(&format!("bad coefficient for {k}")))?;
        }
    }
    Ok(f)
}

/// Parses `{"n":3,"d":4,"coeffs":{"400":1.0,...}}`; missing keys are zero.
pub fn form_from_json(v: &Value) -> Result<Form<f64>> {
    parse_form_json(v, |c| match c {
        Value::Number(x) => x.as_f64(),
        Value::String(s) => parse_rational(s).map(|r| r.to_f64()),
        _ => None,
    })
}

/// Exact variant accepting `"p/q"` strings, integers and decimal literals.
pub fn form_q_from_json(v: &Value) -> Result<Form<BigRational>> {
    parse_form_json(v, |c| match c {
        Value::String(s) => parse_rational(s),
        Value::Number(x) => parse_rational(&x.to_string()),
        _ => None,
    })
}

/// `⟨f,g⟩ = (1/d!) f(∂) g`.
pub fn apolarity<T: Scalar>(f: &Form<T>, g: &Form<T>) -> Result<T> {
    same_order(f, g)?;
    let w: Vec<T> = f.order.apolar_weights();
    Ok(apolar_dot(&w, &f.coeffs, &g.coeffs))
}

/// Weighted dot product with the diagonal apolar weights.
pub fn apolar_dot<T: Scalar>(weights: &[T], a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for ((w, x), y) in weights.iter().zip(a).zip(b) {
        acc = acc + (x.clone() * y.clone()) * w.clone();
    }
    acc
}

/// `tr(M A M B)` with `M = diag(weights)`.
pub fn sym2_pair<T: Scalar>(a: &SymMat<T>, b: &SymMat<T>, weights: &[T]) -> Result<T> {
    let n = a.size();
    if b.size() != n || weights.len() != n {
        return Err(GramError::DimensionMismatch { expected: n, found: b.size().min(weights.len()) });
    }
    let mut acc = T::zero();
    for i in 0..n {
        for j in i..n {
            let p = a[(i, j)].clone() * b[(i, j)].clone() * weights[i].clone() * weights[j].clone();
            acc = if i == j { acc + p } else { acc + p.clone() + p };
        }
    }
    Ok(acc)
}

/// Dimensions attached to the multiplication map of a subspace `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProdDims {
    pub dim_u2: usize,
    pub dim_uv: usize,
    pub nullity: usize,
}

/// Checks that the forms are independent and of a common order.
pub fn check_independent(u: &[Form<f64>]) -> Result<()> {
    let Some(first) = u.first() else { return Ok(()) };
    for q in u {
        same_order(first, q)?;
    }
    let m = Matrix::from_rows(&u.iter().map(|q| q.coeffs.clone()).collect::<Vec<_>>())?;
    let rank = numeric_rank(&m, RANK_TOL)?;
    if rank < u.len() {
        return Err(GramError::DependentBasis { rank, expected: u.len() });
    }
    Ok(())
}

/// `dim U²`, `rank dφ(U)` and `nullity dφ(U)` for `dφ(U): (p_i) ↦ 2 Σ p_i q_i`.
pub fn prod_space_dims(u: &[Form<f64>]) -> Result<ProdDims> {
    if u.is_empty() {
        return Ok(ProdDims { dim_u2: 0, dim_uv: 0, nullity: 0 });
    }
    check_independent(u)?;
    let (n, d) = (u[0].n(), u[0].degree());
    let target = MonomialOrder::shared(n, 2 * d);
    let basis = MonomialOrder::shared(n, d);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(u.len() * basis.len());
    for q in u {
        for j in 0..basis.len() {
            let mut e = vec![0.0; basis.len()];
            e[j] = 2.0;
            let m = Form::new(basis.clone(), e)?;
            columns.push(m.mul(q)?.coeffs);
        }
    }
    let dphi = Matrix::from_rows(&columns)?.transpose();
    let dim_uv = numeric_rank(&dphi, RANK_TOL)?;
    let mut products = Vec::new();
    for i in 0..u.len() {
        for j in i..u.len() {
            products.push(u[i].mul(&u[j])?.coeffs);
        }
    }
    let dim_u2 = numeric_rank(&Matrix::from_rows(&products)?, RANK_TOL)?;
    debug_assert_eq!(products[0].len(), target.len());
    Ok(ProdDims { dim_u2, dim_uv, nullity: u.len() * basis.len() - dim_uv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(n: usize, d: usize, e: &[u32]) -> Form<f64> {
        Form::from_terms(n, d, &[(e, 1.0)]).unwrap()
    }

    #[test]
    fn fixed_orders() {
        let b = monomial_basis(2, 3);
        assert_eq!(b.exponents(), &[vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        let q = monomial_basis(3, 2);
        let names: Vec<String> = (0..6).map(|i| q.monomial_name(i)).collect();
        assert_eq!(names, ["x^2", "y^2", "z^2", "xy", "xz", "yz"]);
        assert_eq!(monomial_basis(1, 4).exponents(), &[vec![4]]);
        assert_eq!(monomial_basis(3, 4).len(), 15);
        assert_eq!(monomial_basis(2, 6).len(), 7);
    }

    #[test]
    fn apolarity_examples() {
        assert_eq!(apolarity(&mono(2, 3, &[3, 0]), &mono(2, 3, &[3, 0])).unwrap(), 1.0);
        let v = apolarity(&mono(2, 3, &[2, 1]), &mono(2, 3, &[2, 1])).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(apolarity(&mono(3, 2, &[2, 0, 0]), &mono(3, 2, &[0, 2, 0])).unwrap(), 0.0);
        assert!(apolarity(&mono(3, 2, &[2, 0, 0]), &mono(2, 2, &[2, 0])).is_err());
    }

    #[test]
    fn sym2_pair_on_squares() {
        let w: Vec<f64> = MonomialOrder::shared(3, 2).apolar_weights();
        let x2 = SymMat::outer(mono(3, 2, &[2, 0, 0]).coeffs());
        let y2 = SymMat::outer(mono(3, 2, &[0, 2, 0]).coeffs());
        assert_eq!(sym2_pair(&x2, &x2, &w).unwrap(), 1.0);
        assert_eq!(sym2_pair(&x2, &y2, &w).unwrap(), 0.0);
    }

    #[test]
    fn multiplication() {
        let x_plus_y = Form::from_terms(2, 1, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]).unwrap();
        let sq = x_plus_y.square();
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(sq.eval(&[2.0, 3.0]), 25.0);
    }

    #[test]
    fn full_space_dims() {
        let u: Vec<Form<f64>> = (0..6)
            .map(|i| {
                let mut c = vec![0.0; 6];
                c[i] = 1.0;
                Form::new(MonomialOrder::shared(3, 2), c).unwrap()
            })
            .collect();
        assert_eq!(prod_space_dims(&u).unwrap(), ProdDims { dim_u2: 15, dim_uv: 15, nullity: 21 });
    }

    #[test]
    fn dependent_basis_rejected() {
        let q = mono(3, 2, &[2, 0, 0]);
        assert!(matches!(prod_space_dims(&[q.clone(), q.scale(&2.0)]), Err(GramError::DependentBasis { rank: 1, .. })));
    }

    #[test]
    fn json_round_trip() {
        let v = json!({"n": 3, "d": 4, "coeffs": {"400": 1.0, "220": 2.5}});
        let f = form_from_json(&v).unwrap();
        assert_eq!(f.coeff(&[2, 2, 0]), 2.5);
        assert_eq!(form_from_json(&f.to_json()).unwrap(), f);
        let q = form_q_from_json(&json!({"n": 2, "d": 1, "coeffs": {"10": "1/3", "01": 2}})).unwrap();
        assert_eq!(q.coeff(&[1, 0]), BigRational::from_ratio(1, 3));
        assert!(form_from_json(&json!({"n": 3, "d": 4, "coeffs": {"40": 1.0}})).is_err());
    }
}
