use gramfiber::gram::{make_context, Pairing};
use gramfiber::linalg::SymMat;
use gramfiber::polyalg::{prod_space_dims, Form, MonomialOrder};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sym_i(rows: [[i64; 4]; 4]) -> SymMat<i64> {
    SymMat::from_fn(4, |i, j| rows[i][j])
}

fn unit6(entries: &[(usize, usize, i64)]) -> SymMat<i64> {
    let mut m = SymMat::from_fn(6, |_, _| 0i64);
    for &(i, j, v) in entries {
        m.set(i, j, v);
    }
    m
}

fn random_form(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Form<f64> {
    let order = MonomialOrder::shared(n, d);
    let c = (0..order.len()).map(|_| rng.sample(StandardNormal)).collect();
    Form::new(order, c).unwrap()
}

#[test]
fn sextic_kernel_matches_printed_basis() {
    let ctx = make_context(2, 3).unwrap();
    let printed = [
        sym_i([[0, 0, 1, 0], [0, -2, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]]),
        sym_i([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]),
        sym_i([[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, -2, 0], [0, 1, 0, 0]]),
    ];
    assert_eq!(ctx.kernel_basis(), &printed);
    assert_eq!(ctx.pairing(), Pairing::Trace);
}

#[test]
fn quartic_kernel_matches_printed_basis() {
    let ctx = make_context(3, 2).unwrap();
    let printed = [
        unit6(&[(0, 1, 1), (3, 3, -2)]),
        unit6(&[(0, 2, 1), (4, 4, -2)]),
        unit6(&[(1, 2, 1), (5, 5, -2)]),
        unit6(&[(0, 5, 1), (3, 4, -1)]),
        unit6(&[(1, 4, 1), (3, 5, -1)]),
        unit6(&[(2, 3, 1), (4, 5, -1)]),
    ];
    assert_eq!(ctx.kernel_basis(), &printed);
}

#[test]
fn kernel_is_annihilated_and_vrep_inverts_mu() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, d) in [(2, 3), (3, 2), (2, 1), (2, 2), (3, 1)] {
        let ctx = make_context(n, d).unwrap();
        for r in ctx.kernel_as::<BigRational>() {
            assert!(ctx.mu_apply(&r).unwrap().is_zero());
        }
        let f = random_form(n, 2 * d, &mut rng);
        let g = ctx.v_rep(&f).unwrap();
        let back = ctx.mu_apply(&g).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        for r in ctx.kernel_f64() {
            assert!(g.trace_dot(r).abs() < 1e-12);
        }
    }
    assert_eq!(make_context(2, 1).unwrap().dim_w(), 0);
    assert!(make_context(4, 2).is_err());
}

#[test]
fn pr_w_examples() {
    let ctx = make_context(3, 2).unwrap();
    let r2 = ctx.kernel_f64()[1].clone();
    let c = ctx.pr_w(&r2).unwrap();
    for (i, v) in c.iter().enumerate() {
        assert!((v - if i == 1 { 1.0 } else { 0.0 }).abs() < 1e-14);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_form(3, 4, &mut rng);
    let v = ctx.v_rep(&f).unwrap();
    let _ = ctx.pr_w(&v).unwrap();
}

#[test]
fn nc_dim_anchors() {
    let sextic = make_context(2, 3).unwrap();
    let o = MonomialOrder::shared(2, 3);
    // x^3 + y^3 and x^2 y: coprime cubics
    let u = vec![Form::new(o.clone(), vec![1.0, 0.0, 0.0, 1.0]).unwrap(), Form::new(o, vec![0.0, 1.0, 0.0, 0.0]).unwrap()];
    let nc = sextic.nc_dim(&u).unwrap();
    assert_eq!((nc.ambient, nc.in_w), (10, 3));
    assert_eq!(sextic.nc_dim_oracle(&u).unwrap(), 10);

    let quartic = make_context(3, 2).unwrap();
    let full: Vec<Form<f64>> = (0..6)
        .map(|i| {
            let mut c = vec![0.0; 6];
            c[i] = 1.0;
            Form::new(MonomialOrder::shared(3, 2), c).unwrap()
        })
        .collect();
    let nc = quartic.nc_dim(&full).unwrap();
    assert_eq!(nc.in_w, 0);
    assert_eq!(quartic.nc_dim_oracle(&full).unwrap(), nc.ambient);
    assert_eq!(quartic.face_subspace(&full).unwrap().len(), 6);
    assert_eq!(quartic.face_subspace(&full[..1]).unwrap().len(), 0);
    let _ = prod_space_dims(&full).unwrap();
}
