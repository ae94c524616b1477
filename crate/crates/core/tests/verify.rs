use mhdpol_core::background::BackgroundEval;
use mhdpol_core::symbols::{build_q, PhasePoint};
use mhdpol_core::verify::oracle::{numeric_adjugate, numeric_det, numeric_det_real, numeric_eig_sym, numeric_kernel};
use mhdpol_core::verify::{check_names, run_identity_suite, Bound, Mutation, SuiteOptions};
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

#[test]
fn adjugate_examples() {
    let id = DMatrix::<f64>::identity(3, 3);
    assert_eq!(numeric_adjugate(&id), id);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
    let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0]));
    assert_eq!(numeric_adjugate(&d), expected);
}

#[test]
fn adjugate_identity_on_random_matrix() {
    let m = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 });
    let det = numeric_det_real(&m);
    let r = numeric_adjugate(&m) * &m - DMatrix::identity(5, 5) * det;
    assert!(r.norm() <= 1e-10 * det.abs().max(1.0));
}

#[test]
fn adjugate_vanishes_at_zero_tau() {
    let bg = BackgroundEval::uniform(1.0, 1.0 / 1.4, 1.4, Vector3::new(1.0, 0.0, 0.0)).unwrap();
    let q = build_q(&PhasePoint::new(0.0, [0.0; 3], 0.0, [0.0, 1.0, 0.0]), &bg).unwrap();
    let adj = numeric_adjugate(&DMatrix::from_fn(8, 8, |i, j| q[(i, j)]));
    assert!(adj.amax() <= 1e-12);
}

#[test]
fn determinant_oracles_agree() {
    let m = DMatrix::from_fn(4, 4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
    let c = m.map(|v| Complex64::new(v, 0.0));
    let hilbert4 = 1.0 / 6_048_000.0;
    assert!((numeric_det_real(&m) - hilbert4).abs() <= 1e-12 * hilbert4);
    assert!((numeric_det(&c).re - hilbert4).abs() <= 1e-12 * hilbert4);
}

#[test]
fn symmetric_eigen_and_kernel() {
    let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    let e = numeric_eig_sym(&m);
    for (a, b) in e.iter().zip([0.0, 1.0, 3.0]) {
        assert!((a - b).abs() < 1e-14);
    }
    let k = numeric_kernel(&m, 1e-10);
    assert_eq!(k.len(), 1);
    assert!((k[0][2].abs() - 1.0).abs() < 1e-14);
}

fn small(seed: u64) -> SuiteOptions {
    SuiteOptions {
        seed,
        samples: 120,
        ..SuiteOptions::default()
    }
}

#[test]
fn suite_is_deterministic_and_passes() {
    let a = run_identity_suite(&small(5));
    let b = run_identity_suite(&SuiteOptions {
        threads: Some(1),
        ..small(5)
    });
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.pass, "{a}");
    assert_eq!(a.checks.len(), check_names().len());
    for c in &a.checks {
        assert!(c.samples >= 100, "{} has {} samples", c.name, c.samples);
        match c.bound {
            Bound::Upper => assert!(c.statistic <= c.tolerance),
            Bound::Lower => assert!(c.statistic >= c.tolerance),
        }
    }
    let csv = a.to_csv();
    assert!(csv.starts_with("check,name,samples,max_residual,tolerance,pass\n"));
    assert_eq!(csv.lines().count(), a.checks.len() + 1);
}

#[test]
fn seeds_change_the_residuals() {
    assert_ne!(run_identity_suite(&small(1)).to_csv(), run_identity_suite(&small(2)).to_csv());
}

#[test]
fn subset_keeps_check_ids() {
    let names = check_names();
    let r = run_identity_suite(&SuiteOptions {
        only: vec![names[3].to_string()],
        ..small(5)
    });
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].id, 4);
    assert!(r.check(names[3]).is_some());
}

#[test]
fn cross_sign_mutation_is_caught() {
    let r = run_identity_suite(&SuiteOptions {
        mutation: Some(Mutation::P2CrossSign),
        ..small(5)
    });
    assert!(!r.pass);
    assert!(r.failures() >= 3, "{r}");
}
