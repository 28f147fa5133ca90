//! Invariants checked on random inputs.

use gramfiber::gram::{make_context, GramContext};
use gramfiber::linalg::{adjugate, det3, eigh, poly_roots, rational_ldl, Matrix, SymMat};
use gramfiber::polyalg::{apolarity, prod_space_dims, sym2_pair, Form, MonomialOrder};
use gramfiber::quartic::{lambda_of_w, matrix_of_quadric, q_of_lambda};
use gramfiber::scalar::{format_rational, parse_rational, rational_from_f64};
use gramfiber::sdp::{self, SliceProblem};
use gramfiber::sextic::{form_from_zeros, in_s, rank1_complete, rank2_points, sextic_context, SCoords};
use gramfiber::BigRational;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn form_from(n: usize, d: usize, c: &[f64]) -> Form<f64> {
    Form::new(MonomialOrder::shared(n, d), c.to_vec()).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

fn small_rationals(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-20i64..=20, 1i64..=6), len)
        .prop_map(|v| v.into_iter().map(|(p, q)| BigRational::new(p.into(), q.into())).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apolarity_is_symmetric(a in small_rationals(15), b in small_rationals(15)) {
        let o = MonomialOrder::shared(3, 4);
        let f = Form::new(o.clone(), a).unwrap();
        let g = Form::new(o, b).unwrap();
        prop_assert_eq!(apolarity(&f, &g).unwrap(), apolarity(&g, &f).unwrap());
    }

    #[test]
    fn pairing_of_squares(a in prop::collection::vec(-3.0f64..3.0, 6), b in prop::collection::vec(-3.0f64..3.0, 6)) {
        let (q, p) = (form_from(3, 2, &a), form_from(3, 2, &b));
        let w: Vec<f64> = q.order().apolar_weights();
        let lhs = sym2_pair(&SymMat::outer(&a), &SymMat::outer(&b), &w).unwrap();
        let rhs = apolarity(&q, &p).unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn quartic_lemma_identity(a in prop::collection::vec(-3.0f64..3.0, 6)) {
        let ctx = make_context(3, 2).unwrap();
        let q = form_from(3, 2, &a);
        let got = q_of_lambda(&lambda_of_w(&ctx, &SymMat::outer(&a)));
        let expect = adjugate(&matrix_of_quadric(&q));
        prop_assert!(got.sub(&expect).max_abs() <= 1e-10 * (1.0 + expect.max_abs()));
    }

    #[test]
    fn product_space_dimensions(seed in any::<u64>(), r in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<Form<f64>> = (0..r).map(|_| form_from(3, 2, &gaussian(&mut rng, 6))).collect();
        let dims = prod_space_dims(&u).unwrap();
        prop_assert!(dims.dim_u2 <= dims.dim_uv);
        prop_assert!(dims.dim_uv <= r * 6);
        prop_assert_eq!(dims.nullity + dims.dim_uv, r * 6);
    }

    #[test]
    fn adjugate_identity(a in prop::collection::vec(-5i64..=5, 6), singular in any::<bool>()) {
        let mut m = SymMat::from_rows(&[
            vec![a[0] as f64, a[1] as f64, a[2] as f64],
            vec![a[1] as f64, a[3] as f64, a[4] as f64],
            vec![a[2] as f64, a[4] as f64, a[5] as f64],
        ]).unwrap();
        if singular {
            let v = [a[0] as f64, a[1] as f64, 1.0];
            m = SymMat::outer(&v).add(&SymMat::outer(&[1.0, 0.0, a[2] as f64]));
        }
        let prod = m.to_dense().matmul(&adjugate(&m).to_dense()).unwrap();
        let det = det3(&m);
        let scale = 1.0 + m.max_abs().powi(3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { det } else { 0.0 };
                prop_assert!((prod[(i, j)] - expect).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn roots_satisfy_vieta(c in prop::collection::vec(-5.0f64..5.0, 3..9)) {
        let mut coeffs: Vec<Complex<f64>> = c.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let lead = coeffs.last().unwrap().re;
        prop_assume!(lead.abs() > 0.1 && coeffs[0].re.abs() > 1e-3);
        let n = coeffs.len() - 1;
        coeffs[n] = Complex::new(lead, 0.0);
        let roots = poly_roots(&coeffs).unwrap();
        let sum: Complex<f64> = roots.iter().sum();
        let prod: Complex<f64> = roots.iter().product();
        let e_sum = -coeffs[n - 1] / coeffs[n];
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let e_prod = coeffs[0] / coeffs[n] * sign;
        prop_assert!((sum - e_sum).norm() <= 1e-8 * (1.0 + e_sum.norm()));
        prop_assert!((prod - e_prod).norm() <= 1e-8 * (1.0 + e_prod.norm()));
    }

    #[test]
    fn rational_round_trips(p in -1_000_000i64..1_000_000, q in 1i64..1_000_000, x in -1e6f64..1e6) {
        let r = BigRational::new(p.into(), q.into());
        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        let exact = rational_from_f64(x);
        prop_assert_eq!(num_traits::ToPrimitive::to_f64(&exact).unwrap(), x);
    }

    #[test]
    fn ldl_reconstructs_gram_products(entries in prop::collection::vec(-4i64..=4, 12)) {
        // A = Bᵀ B is psd by construction
        let b = Matrix::from_fn(3, 4, |i, j| BigRational::from_integer(entries[i * 4 + j].into()));
        let a = b.transpose().matmul(&b).unwrap();
        let ldl = rational_ldl(&a).unwrap();
        prop_assert_eq!(ldl.reconstruct(), a);
    }
}

#[test]
fn eigh_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 0..1000 {
        let n = 1 + t % 36;
        let a = SymMat::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let e = eigh(&a).unwrap();
        let v = &e.vectors;
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| v[(i, k)] * e.values[k] * v[(j, k)]).sum();
                err = err.max((s - a[(i, j)]).abs());
            }
        }
        assert!(err <= 1e-9 * a.frobenius_norm(), "size {n}: {err}");
    }
}

fn random_subspace(ctx: &GramContext, r: usize, structured: bool, rng: &mut ChaCha8Rng) -> Vec<Form<f64>> {
    let (n, d) = (ctx.n(), ctx.d());
    let lower = MonomialOrder::shared(n, d - 1).len();
    if structured && r <= lower {
        let l = form_from(n, 1, &gaussian(rng, n));
        (0..r).map(|_| l.mul(&form_from(n, d - 1, &gaussian(rng, lower))).unwrap()).collect()
    } else {
        (0..r).map(|_| form_from(n, d, &gaussian(rng, ctx.big_n()))).collect()
    }
}

#[test]
fn nc_dim_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for ctx in [make_context(2, 3).unwrap(), make_context(3, 2).unwrap()] {
        for r in 2..=ctx.big_n() {
            for t in 0..100 {
                let u = random_subspace(&ctx, r, t % 2 == 1, &mut rng);
                let dims = ctx.nc_dim(&u).unwrap();
                assert_eq!(dims.ambient, ctx.nc_dim_oracle(&u).unwrap(), "n={} r={r}", ctx.n());
            }
        }
    }
}

#[test]
fn face_dimension_matches_face_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ctx in [make_context(2, 3).unwrap(), make_context(3, 2).unwrap()] {
        let samples = gramfiber::fiberbody::sample_forms(&ctx, 10, 3).unwrap();
        for f in &samples.forms {
            let w = ctx.from_w_coords(&gaussian(&mut rng, ctx.dim_w()));
            let rep = ctx.face(f, &w).unwrap();
            assert_eq!(rep.face_dim, ctx.face_subspace(&rep.u_basis).unwrap().len());
        }
        let k = ctx.kernel_f64();
        let rep = ctx.face(&samples.forms[0], &k[0]).unwrap();
        assert_eq!(rep.face_dim, ctx.face_subspace(&rep.u_basis).unwrap().len());
    }
}

#[test]
fn vrep_is_a_trace_orthogonal_right_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for ctx in [make_context(2, 3).unwrap(), make_context(3, 2).unwrap()] {
        for _ in 0..100 {
            let c: Vec<BigRational> =
                (0..ctx.big_m()).map(|_| BigRational::new(rng.random_range(-50i64..=50).into(), rng.random_range(1i64..=7).into())).collect();
            let f = Form::new(ctx.target_order().clone(), c).unwrap();
            let g = ctx.v_rep(&f).unwrap();
            assert_eq!(ctx.mu_apply(&g).unwrap(), f);
            let gf = g.map(|v| num_traits::ToPrimitive::to_f64(v).unwrap());
            for r in ctx.kernel_f64() {
                assert!(gf.trace_dot(r).abs() <= 1e-12 * (1.0 + gf.max_abs()));
            }
        }
    }
}

fn random_smooth_sextic(rng: &mut ChaCha8Rng) -> Form<f64> {
    let zeros: Vec<Complex<f64>> =
        (0..3).map(|_| Complex::new(rng.random_range(-3.0..3.0), rng.random_range(0.2..3.0))).collect();
    form_from_zeros(&zeros).scale(&rng.random_range(0.5..2.0))
}

#[test]
fn rank_two_points_of_random_sextics() {
    let ctx = sextic_context();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let f = random_smooth_sextic(&mut rng);
        for p in rank2_points(&f).unwrap().points {
            assert!(ctx.mu_apply(&p).unwrap().sub(&f).unwrap().norm() <= 1e-9 * f.norm());
            let e = eigh(&p).unwrap();
            assert!(e.values[2].abs() <= 1e-8 * e.values[0]);
        }
    }
}

#[test]
fn rank_one_images_avoid_interior_of_s() {
    let ctx = sextic_context();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let a = gaussian(&mut rng, 4);
        let l = SCoords::from_w(&ctx, &SymMat::outer(&a));
        let [l1, l2, l3] = l.0;
        let s = l.norm();
        assert!(!(l1 > 0.0 && l3 > 0.0 && 4.0 * l1 * l3 - l2 * l2 > 1e-9 * s * s), "{l:?}");
    }
    let mut hit = 0;
    let mut tried = 0;
    while tried < 10_000 {
        let l = SCoords([rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]);
        if in_s(&l) {
            continue;
        }
        tried += 1;
        if rank1_complete(&ctx, &l.to_w(&ctx)).is_some() {
            hit += 1;
        }
    }
    assert_eq!(hit, tried);
}

#[test]
fn s_is_contained_in_the_distinguished_cone() {
    let ctx = sextic_context();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for f in gramfiber::sextic::lemma_sextics() {
        let theta = rank2_points(&f).unwrap().theta_f().clone();
        for _ in 0..1000 {
            let l1: f64 = rng.random_range(0.0..1.0);
            let l3: f64 = rng.random_range(0.0..1.0);
            let l2 = rng.random_range(-1.0..1.0) * 2.0 * (l1 * l3).sqrt();
            let l = SCoords([l1, l2, l3]);
            assert!(gramfiber::sextic::normal_cone_contains(&ctx, &theta, &l, 1e-9).unwrap());
        }
    }
}

fn feasible_lambda(p: &SliceProblem, lam: &[f64]) -> bool {
    let x = p.basis.iter().zip(lam).fold(p.g0.clone(), |acc, (b, l)| acc.axpy(l, b));
    gramfiber::linalg::cholesky(&x).is_some()
}

#[test]
fn sdp_optimum_lower_bounds_feasible_points() {
    let ctx = sextic_context();
    let samples = gramfiber::fiberbody::sample_forms(&ctx, 40, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..200 {
        let f = &samples.forms[t % samples.len()];
        let w = ctx.from_w_coords(&gaussian(&mut rng, 3));
        let p = ctx.slice_problem(f, &w).unwrap();
        let sol = sdp::solve(&p).unwrap();
        let scale = 1.0 + sol.lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut checked = 0;
        for _ in 0..100_000 {
            let lam: Vec<f64> = sol.lambda.iter().map(|c| c + scale * rng.random_range(-1.0..1.0)).collect();
            if !feasible_lambda(&p, &lam) {
                continue;
            }
            checked += 1;
            let x = p.basis.iter().zip(&lam).fold(p.g0.clone(), |acc, (b, l)| acc.axpy(l, b));
            let val = p.objective.trace_dot(&x);
            assert!(sol.objective_value <= val + 1e-8 * (1.0 + val.abs()));
        }
        assert!(checked > 0);
    }
}

#[test]
fn sdp_scaling_properties() {
    let ctx = make_context(3, 2).unwrap();
    let samples = gramfiber::fiberbody::sample_forms(&ctx, 20, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for f in &samples.forms {
        let w = ctx.from_w_coords(&gaussian(&mut rng, 6));
        let a = sdp::solve(&ctx.slice_problem(f, &w).unwrap()).unwrap();
        let b = sdp::solve(&ctx.slice_problem(f, &w.scale(&10.0)).unwrap()).unwrap();
        for (x, y) in a.lambda.iter().zip(&b.lambda) {
            assert!((x - y).abs() <= 1e-7 * (1.0 + x.abs()));
        }
        let r = 3.5;
        let c = sdp::solve(&ctx.slice_problem(&f.scale(&r), &w).unwrap()).unwrap();
        assert!(c.x.sub(&a.x.scale(&r)).max_abs() <= 1e-7 * (1.0 + c.x.max_abs()));
    }
}
