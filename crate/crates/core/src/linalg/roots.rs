use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GramError, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 500;
const RESTARTS: usize = 4;

fn horner<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut dp = p;
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + *c;
    }
    (p, dp)
}

/// Rounding bound for Horner evaluation at `z`, up to a factor of eps.
fn eval_scale<T: Real>(coeffs: &[Complex<T>], z: Complex<T>) -> T {
    let r = z.norm();
    coeffs.iter().rev().fold(T::zero(), |s, c| s * r + c.norm()) * T::lit(coeffs.len() as f64)
}

fn initial_guesses<T: Real>(coeffs: &[Complex<T>], jitter: Option<&mut ChaCha8Rng>) -> Vec<Complex<T>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let center = -coeffs[n - 1] / (lead * T::lit(n as f64));
    // radius from the centered polynomial's constant term, bounded below
    let (p0, _) = horner(coeffs, center);
    let mut radius = (p0.norm() / lead.norm()).powf(T::one() / T::lit(n as f64));
    if !(radius > T::zero()) || !radius.is_finite() {
        radius = T::one();
    }
    let mut out = Vec::with_capacity(n);
    let mut rng = jitter;
    for k in 0..n {
        let mut angle = T::lit(2.0) * T::PI() * T::lit(k as f64) / T::lit(n as f64) + T::lit(0.4);
        let mut r = radius;
        if let Some(g) = rng.as_deref_mut() {
            angle += T::lit(g.random_range(-0.5..0.5));
            r *= T::lit(g.random_range(0.5..1.5));
        }
        out.push(center + Complex::from_polar(r, angle));
    }
    out
}

fn aberth<T: Real>(coeffs: &[Complex<T>], mut z: Vec<Complex<T>>) -> Option<Vec<Complex<T>>> {
    let n = z.len();
    let mut done = vec![false; n];
    let tol = T::eps() * T::lit(4.0);
    for _ in 0..MAX_ITER {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = horner(coeffs, z[k]);
            if p.norm() <= tol * eval_scale(coeffs, z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != k {
                    s = s + (z[k] - z[j]).inv();
                }
            }
            let w = ratio / (Complex::new(T::one(), T::zero()) - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                return None;
            }
            z[k] = z[k] - w;
            if w.norm() <= tol * z[k].norm().max(T::min_positive_value()) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Some(z);
        }
    }
    None
}

/// All complex roots of `Σ coeffs[k]·x^k` (ascending coefficients), with multiplicity.
pub fn poly_roots<T: Real>(coeffs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    if coeffs.is_empty() || coeffs.last().map_or(true, |c| c.norm() == T::zero()) {
        return Err(GramError::InvalidInput("leading coefficient must be nonzero".into()));
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let norm = coeffs.iter().fold(T::zero(), |s, c| s + c.norm_sqr()).sqrt();
    for attempt in 0..RESTARTS {
        let start = if attempt == 0 { initial_guesses(coeffs, None) } else { initial_guesses(coeffs, Some(&mut rng)) };
        if let Some(z) = aberth(coeffs, start) {
            let ok = z.iter().all(|&r| {
                let (p, _) = horner(coeffs, r);
                let scale = coeffs
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |s, (k, c)| s + c.norm() * r.norm().powi(k as i32));
                p.norm() <= T::lit(1e-8).max(T::eps().sqrt()) * scale.max(norm)
            });
            if ok {
                return Ok(z);
            }
        }
    }
    Err(GramError::ConvergenceFailure { what: "Aberth-Ehrlich", iterations: MAX_ITER })
}
