use mhdpol_core::background::{BackgroundEval, BackgroundField};
use mhdpol_core::symbols::{
    build_a, build_p1, build_p2, build_ptilde, build_q, build_subprincipal, build_w2, det_q,
    mixed_derivative_trace, norm_inf, subprincipal_definitional, symmetrizer, two_i_subprincipal, PhasePoint,
    Sheet,
};
use mhdpol_core::verify::oracle::{numeric_det_real, numeric_eig_sym};
use mhdpol_core::verify::sampling::{generic_hypotheses, point_on_sheet};
use mhdpol_core::Error;
use nalgebra::{DMatrix, Matrix3, Vector3};
use proptest::prelude::*;

fn uniform(rho: f64, gamma_p: f64, h: [f64; 3]) -> BackgroundEval {
    BackgroundEval::uniform(rho, gamma_p / 1.4, 1.4, Vector3::from(h)).unwrap()
}

fn pt(tau: f64, xi: [f64; 3]) -> PhasePoint {
    PhasePoint::new(0.0, [0.0; 3], tau, xi)
}

fn dense<const D: usize>(m: &nalgebra::SMatrix<f64, D, D>) -> DMatrix<f64> {
    DMatrix::from_fn(D, D, |i, j| m[(i, j)])
}

#[test]
fn acoustic_a() {
    let bg = uniform(1.0, 1.0, [0.0; 3]);
    let a = build_a(&bg, &Vector3::new(1.0, 0.0, 0.0)).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let expected = match (i, j) {
                (0, 1) | (1, 7) | (7, 1) => 1.0,
                _ => 0.0,
            };
            assert!((a[(i, j)] - expected).abs() < 1e-15, "A[{i},{j}] = {}", a[(i, j)]);
        }
    }
}

#[test]
fn symmetrizer_example() {
    let bg = uniform(2.0, 3.0, [1.0, 1.0, 0.0]);
    let a = build_a(&bg, &Vector3::new(0.0, 1.0, 2.0)).unwrap();
    let sa = symmetrizer(&bg).unwrap() * a;
    assert!(norm_inf(&(sa - sa.transpose())) <= 1e-12 * norm_inf(&sa));
}

#[test]
fn symmetrizer_unit_background() {
    let s = symmetrizer(&uniform(1.0, 1.0, [0.3, -0.2, 0.9])).unwrap();
    let diag = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0];
    for i in 0..8 {
        for j in 0..8 {
            let expected = match (i, j) {
                _ if i == j => diag[i],
                (0, 7) | (7, 0) => -1.0,
                _ => 0.0,
            };
            assert!((s[(i, j)] - expected).abs() < 1e-15);
        }
    }
    assert!(numeric_eig_sym(&dense(&s))[0] > 0.0);
}

#[test]
fn q_at_zero_tau_is_a() {
    let bg = uniform(1.3, 2.1, [0.4, 0.5, -1.0]);
    let xi = Vector3::new(0.3, 1.0, -0.2);
    assert_eq!(build_q(&pt(0.0, xi.into()), &bg).unwrap(), build_a(&bg, &xi).unwrap());
}

#[test]
fn det_examples() {
    let bg = uniform(1.3, 2.1, [0.4, 0.5, -1.0]);
    assert_eq!(det_q(&pt(0.0, [1.0, 2.0, 0.5]), &bg).unwrap(), 0.0);

    let bg = uniform(1.0, 1.0, [0.0; 3]);
    let p = pt(2.0, [1.0, 0.0, 0.0]);
    assert!((det_q(&p, &bg).unwrap() - 192.0).abs() < 1e-12);
    let lu = numeric_det_real(&dense(&build_q(&p, &bg).unwrap()));
    assert!((lu - 192.0).abs() < 1e-9 * 192.0);
}

#[test]
fn det_vanishes_on_fast_sheet_when_perpendicular() {
    let bg = uniform(1.0, 2.0, [0.0, 0.0, 1.5]);
    let xi = [1.0, -0.5, 0.0];
    let ws = mhdpol_core::spectra::wave_speeds(&bg, &Vector3::from(xi)).unwrap();
    let tau = ws.cf() * Vector3::from(xi).norm();
    let p = pt(tau, xi);
    let scale = tau.powi(8);
    assert!(det_q(&p, &bg).unwrap().abs() <= 1e-12 * scale);
}

#[test]
fn p2_at_zero_xi() {
    let bg = uniform(1.7, 2.0, [1.0, -1.0, 0.5]);
    let p2 = build_p2(&pt(1.5, [0.0; 3]), &bg).unwrap();
    assert!((p2 - Matrix3::identity() * (1.7 * 2.25)).norm() < 1e-14);
}

#[test]
fn p2_transverse_entry() {
    // H along z, xi in the x-z plane: the y-y entry is rho tau^2 - (H.xi)^2
    let bg = uniform(1.2, 1.0, [0.0, 0.0, 0.8]);
    let p2 = build_p2(&pt(0.7, [0.6, 0.0, 1.1]), &bg).unwrap();
    let s = 0.8 * 1.1;
    assert!((p2[(1, 1)] - (1.2 * 0.49 - s * s)).abs() < 1e-14);
}

#[test]
fn p1_vanishes_for_constant_background() {
    let bg = uniform(1.0, 1.0, [1.0, 2.0, 0.0]);
    assert_eq!(build_p1(&pt(0.3, [1.0, 1.0, 1.0]), &bg).unwrap().norm(), 0.0);
    assert_eq!(build_subprincipal(&pt(0.3, [1.0, 1.0, 1.0]), &bg).unwrap().norm(), 0.0);
}

#[test]
fn p1_linear_pressure() {
    let gamma = 1.4;
    let field = BackgroundField::parse("1", "1+x2", ["1", "0", "0"], gamma).unwrap();
    let bg = field.eval(0.0, [0.0; 3]).unwrap();
    let p1 = build_p1(&pt(0.5, [0.0, 0.0, 1.0]), &bg).unwrap();
    // i(gamma - 1) grad p (x) xi + i xi (x) grad p with grad p = e2, xi = e3
    for i in 0..3 {
        for j in 0..3 {
            let expected = match (i, j) {
                (1, 2) => gamma - 1.0,
                (2, 1) => 1.0,
                _ => 0.0,
            };
            assert!(p1[(i, j)].re.abs() < 1e-15);
            assert!((p1[(i, j)].im - expected).abs() < 1e-14, "p1[{i},{j}] = {}", p1[(i, j)]);
        }
    }
    let doubled = build_p1(&pt(0.5, [0.0, 0.0, 2.0]), &bg).unwrap();
    assert!((doubled - p1 * nalgebra::Complex::new(2.0, 0.0)).norm() < 1e-14);
}

#[test]
fn subprincipal_dual_route() {
    let field = BackgroundField::parse("1", "1+x3", ["0", "0", "2"], 5.0 / 3.0).unwrap();
    let bg = field.eval(0.0, [0.0; 3]).unwrap();
    let p = pt(0.4, [1.0, 0.0, 0.0]);
    let closed = build_subprincipal(&p, &bg).unwrap();
    let defn = subprincipal_definitional(&p, &bg).unwrap();
    assert!((closed - defn).norm() <= 1e-10 * (1.0 + closed.norm()));
    let s = two_i_subprincipal(&p, &bg);
    assert!((s + s.transpose()).norm() == 0.0);
    assert!(s.diagonal().norm() == 0.0);
    assert!(s.norm() > 0.0);
}

#[test]
fn w2_examples() {
    let bg = uniform(1.0, 1.0, [1.0, 0.0, 0.0]);
    let w2 = build_w2(&bg, &Vector3::new(0.0, 1.0, 0.0));
    assert!((w2 - Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0))).norm() < 1e-15);
    let w2 = build_w2(&bg, &Vector3::new(-3.0, 0.0, 0.0));
    assert_eq!(w2.norm(), 0.0);
}

#[test]
fn ptilde_rejects_parallel_xi() {
    let bg = uniform(1.0, 2.0, [1.0, 1.0, 0.0]);
    let r = build_ptilde(&pt(0.5, [2.0, 2.0, 0.0]), &bg, Sheet::Alfven);
    assert!(matches!(r, Err(Error::DegenerateMode(_))));
}

#[test]
fn ptilde_off_characteristic() {
    let bg = uniform(1.1, 1.7, [0.3, 0.9, -0.4]);
    let p = pt(0.77, [0.5, -1.0, 0.8]);
    let p2 = build_p2(&p, &bg).unwrap();
    let q = mhdpol_core::spectra::characteristic_factors(&p, &bg).unwrap();
    for sheet in [Sheet::Alfven, Sheet::Slow, Sheet::Fast] {
        let pt2 = build_ptilde(&p, &bg, sheet).unwrap();
        let r = pt2 * p2 - Matrix3::identity() * q[sheet.index() - 1];
        assert!(r.norm() <= 1e-8 * pt2.norm() * p2.norm(), "{sheet:?}");
    }
}

fn background() -> impl Strategy<Value = BackgroundEval> {
    (0.2f64..5.0, 0.2f64..5.0, 1.1f64..2.0, prop::array::uniform3(-2.0f64..2.0))
        .prop_map(|(rho, p, gamma, h)| BackgroundEval::uniform(rho, p, gamma, Vector3::from(h)).unwrap())
}

fn xi() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0).prop_filter("nonzero", |v| Vector3::from(*v).norm() > 0.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn det_matches_lu(bg in background(), xi in xi(), tau in -3.0f64..3.0) {
        let p = pt(tau, xi);
        let q = dense(&build_q(&p, &bg).unwrap());
        let lu = numeric_det_real(&q);
        let f = det_q(&p, &bg).unwrap();
        let scale = (tau.abs() + q.norm()).powi(8);
        prop_assert!((lu - f).abs() <= 1e-9 * lu.abs().max(1e-6 * scale), "lu={lu} f={f}");
    }

    #[test]
    fn p2_spectrum_is_the_factors(bg in background(), xi in xi(), tau in -3.0f64..3.0) {
        let p = pt(tau, xi);
        prop_assume!(generic_hypotheses(&bg, &Vector3::from(xi)));
        let mut eig = numeric_eig_sym(&dense(&build_p2(&p, &bg).unwrap()));
        let mut q = mhdpol_core::spectra::characteristic_factors(&p, &bg).unwrap().to_vec();
        eig.sort_by(f64::total_cmp);
        q.sort_by(f64::total_cmp);
        let scale = eig.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in eig.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn symmetrizer_is_pd_and_symmetrizes(bg in background(), xi in xi()) {
        let s = symmetrizer(&bg).unwrap();
        prop_assert!(numeric_eig_sym(&dense(&s))[0] > 0.0);
        let sa = s * build_a(&bg, &Vector3::from(xi)).unwrap();
        prop_assert!(norm_inf(&(sa - sa.transpose())) <= 1e-12 * norm_inf(&sa));
    }

    #[test]
    fn w2_trace(bg in background(), xi in xi()) {
        let xi = Vector3::from(xi);
        let w2 = build_w2(&bg, &xi);
        let c = xi.cross(&bg.h).norm_squared();
        prop_assert!((w2.trace() - 2.0 * c).abs() <= 1e-12 * (1.0 + xi.norm_squared() * bg.h2()));
        prop_assert!((w2 - w2.transpose()).norm() == 0.0);
        prop_assert!(numeric_eig_sym(&dense(&w2))[0] >= -1e-12 * (1.0 + w2.norm()));
    }

    #[test]
    fn homogeneity(bg in background(), xi in xi(), tau in -3.0f64..3.0, big in any::<bool>()) {
        let lambda = if big { 10.0 } else { 2.0 };
        let p = pt(tau, xi);
        let xs = Vector3::from(xi);
        let p2 = build_p2(&p, &bg).unwrap();
        let p2s = build_p2(&p.scaled(lambda), &bg).unwrap();
        prop_assert!((p2s - p2 * lambda * lambda).norm() <= 1e-12 * p2s.norm().max(1.0));
        let a = build_a(&bg, &xs).unwrap();
        let al = build_a(&bg, &(xs * lambda)).unwrap();
        prop_assert!((al - a * lambda).norm() <= 1e-12 * al.norm().max(1.0));
    }

    #[test]
    fn ptilde_annihilates_p2_on_sheet(seed in any::<u64>(), sheet in 1usize..=3) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bg = mhdpol_core::verify::sampling::random_uniform_background(&mut rng);
        let xi = mhdpol_core::verify::sampling::random_xi(&mut rng);
        prop_assume!(generic_hypotheses(&bg, &xi));
        let sheet = Sheet::from_index(sheet).unwrap();
        let p = point_on_sheet(&mut rng, &bg, [0.0; 3], xi, sheet).unwrap();
        let p2 = build_p2(&p, &bg).unwrap();
        let pt2 = build_ptilde(&p, &bg, sheet).unwrap();
        prop_assert!((pt2 * p2).norm() <= 1e-8 * pt2.norm() * p2.norm());
    }
}

#[test]
fn mixed_derivative_trace_matches_finite_differences() {
    let field = BackgroundField::parse("1 + 0.2*sin(x1)", "2 + 0.3*x2*x3", ["cos(x3)", "0.5*x1", "1 + 0.1*x2"], 1.4)
        .unwrap();
    let p = PhasePoint::new(0.0, [0.3, -0.4, 0.8], 0.9, [0.7, -0.2, 1.3]);
    let h = 1e-4;
    let p2_at = |x: Vector3<f64>, xi: Vector3<f64>| {
        let bg = field.eval(0.0, x.into()).unwrap();
        let q = PhasePoint { x, xi, ..p };
        build_p2(&q, &bg).unwrap()
    };
    let mut fd = Matrix3::zeros();
    for j in 0..3 {
        let ex = Vector3::ith(j, h);
        let d = |sx: f64, sk: f64| p2_at(p.x + ex * sx, p.xi + ex * sk);
        fd += (d(1.0, 1.0) - d(1.0, -1.0) - d(-1.0, 1.0) + d(-1.0, -1.0)) / (4.0 * h * h);
    }
    let bg = field.eval(0.0, p.x.into()).unwrap();
    let an = mixed_derivative_trace(&p, &bg);
    assert!((an - fd).norm() <= 1e-6 * (1.0 + an.norm()), "analytic {an} fd {fd}");
}
