use mhdpol_core::background::{equilibrium_residual, parse_expr, BackgroundField, BinOp, Expr, Func, Var};
use mhdpol_core::Error;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn literal() {
    assert_eq!(parse_expr("2").unwrap(), Expr::Num(2.0));
}

#[test]
fn square_plus_three() {
    let e = parse_expr("x1*x1 + 3").unwrap();
    let d = e.eval_dual(0.0, [2.0, 0.0, 0.0]).unwrap();
    assert_eq!(d.re, 7.0);
    assert_eq!(d.eps, [0.0, 4.0, 0.0, 0.0]);
    let h = 1e-5;
    let fd = (e.eval(0.0, [2.0 + h, 0.0, 0.0]).unwrap() - e.eval(0.0, [2.0 - h, 0.0, 0.0]).unwrap()) / (2.0 * h);
    assert!(close(fd, 4.0, 1e-9));
}

#[test]
fn unbalanced_paren_offset() {
    match parse_expr("tanh(") {
        Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 5),
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn unknown_identifier() {
    assert!(matches!(parse_expr("2*y + 1"), Err(Error::UnknownIdentifier { ref name, offset: 2 }) if name == "y"));
    assert!(matches!(parse_expr("log(x1)"), Err(Error::UnknownIdentifier { .. })));
}

#[test]
fn power_is_right_associative_and_unary_minus_binds_base() {
    let e = parse_expr("2^3^2").unwrap();
    assert_eq!(e.eval(0.0, [0.0; 3]).unwrap(), 512.0);
    assert_eq!(parse_expr("-2^2").unwrap().eval(0.0, [0.0; 3]).unwrap(), 4.0);
}

#[test]
fn domain_errors() {
    let e = parse_expr("sqrt(x1)").unwrap();
    assert!(matches!(e.eval(0.0, [-1.0, 0.0, 0.0]), Err(Error::Domain(_))));
    let e = parse_expr("1/x2").unwrap();
    assert!(matches!(e.eval(0.0, [0.0; 3]), Err(Error::Domain(_))));
}

#[test]
fn constant_background_has_no_derivatives() {
    let bg = BackgroundField::constant(1.0, 1.0, [1.0, 0.0, 0.0], 5.0 / 3.0).unwrap();
    for x in [[0.0; 3], [1.0, -2.0, 3.5]] {
        let ev = bg.eval(0.3, x).unwrap();
        assert_eq!(ev.grad_rho.norm(), 0.0);
        assert_eq!(ev.grad_p.norm(), 0.0);
        assert_eq!(ev.nabla_h.norm(), 0.0);
        assert!(close(ev.c2(), 5.0 / 3.0, 1e-15));
        assert_eq!(ev.h2(), 1.0);
    }
}

#[test]
fn linear_pressure_gradient() {
    let bg = BackgroundField::parse("1", "1+x2", ["1", "0", "0"], 1.4).unwrap();
    let ev = bg.eval(0.0, [0.0; 3]).unwrap();
    assert_eq!(ev.grad_p.as_slice(), &[0.0, 1.0, 0.0]);
}

#[test]
fn exponential_density() {
    let bg = BackgroundField::parse("exp(x1)", "1", ["0", "0", "0"], 1.4).unwrap();
    let ev = bg.eval(0.0, [1.0, 0.0, 0.0]).unwrap();
    let e = std::f64::consts::E;
    assert!(close(ev.rho, e, 1e-15));
    assert!(close(ev.grad_rho[0], e, 1e-15));
    let h = 1e-5;
    let up = bg.eval(0.0, [1.0 + h, 0.0, 0.0]).unwrap().rho;
    let dn = bg.eval(0.0, [1.0 - h, 0.0, 0.0]).unwrap().rho;
    assert!(close((up - dn) / (2.0 * h), ev.grad_rho[0], 1e-9));
}

#[test]
fn non_physical_density() {
    let bg = BackgroundField::parse("x1", "1", ["0", "0", "0"], 1.4).unwrap();
    assert!(matches!(bg.eval(0.0, [-1.0, 0.0, 0.0]), Err(Error::NonPhysical(_))));
}

#[test]
fn equilibrium_examples() {
    let bg = BackgroundField::constant(2.0, 3.0, [1.0, -1.0, 0.5], 1.4).unwrap();
    assert_eq!(equilibrium_residual(&bg, [0.4, 0.1, -2.0]).unwrap().as_slice(), &[0.0, 0.0, 0.0]);

    let bg = BackgroundField::parse("1", "1+x2", ["1", "0", "0"], 1.4).unwrap();
    assert_eq!(equilibrium_residual(&bg, [0.0; 3]).unwrap().as_slice(), &[0.0, 1.0, 0.0]);

    let bg = BackgroundField::parse("1", "1 - x2*x2/2", ["x2", "0", "0"], 1.4).unwrap();
    for i in -5..=5 {
        for j in -5..=5 {
            let x = [0.3 * f64::from(i), 0.2 * f64::from(j), 0.1];
            assert!(equilibrium_residual(&bg, x).unwrap().norm() <= 1e-14);
        }
    }
}

#[test]
fn curl_and_divergence_match_finite_differences() {
    let bg = BackgroundField::parse("1", "1", ["sin(x2)*x3", "x1*x1 - x3", "cos(x1 + x2)"], 1.4).unwrap();
    let x = [0.3, -0.7, 1.1];
    let ev = bg.eval(0.0, x).unwrap();
    let h = 1e-5;
    let mut jac = [[0.0; 3]; 3];
    for (i, row) in jac.iter_mut().enumerate() {
        let mut up = x;
        let mut dn = x;
        up[i] += h;
        dn[i] -= h;
        let hu = bg.eval(0.0, up).unwrap().h;
        let hd = bg.eval(0.0, dn).unwrap().h;
        for k in 0..3 {
            row[k] = (hu[k] - hd[k]) / (2.0 * h);
        }
    }
    let curl = [jac[1][2] - jac[2][1], jac[2][0] - jac[0][2], jac[0][1] - jac[1][0]];
    let div = jac[0][0] + jac[1][1] + jac[2][2];
    for k in 0..3 {
        assert!(close(ev.curl_h()[k], curl[k], 1e-8));
    }
    assert!(close(ev.div_h(), div, 1e-8));
}

#[test]
fn display_round_trips() {
    for src in ["x1*x1 + 3", "-(x2 - 1)^2", "tanh(0.5*x3)/sqrt(2 + t)", "abs(sin(x1))*exp(-x2)"] {
        let e = parse_expr(src).unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.1f64..3.0).prop_map(Expr::Num),
        prop_oneof![Just(Var::T), Just(Var::X1), Just(Var::X2), Just(Var::X3)].prop_map(Expr::Var),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Pow)
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dual_derivatives_match_central_differences(
        e in expr_strategy(),
        y in prop::array::uniform4(-1.5f64..1.5),
    ) {
        let at = |z: [f64; 4]| e.eval(z[0], [z[1], z[2], z[3]]);
        let d = e.eval_dual(y[0], [y[1], y[2], y[3]]);
        prop_assume!(d.is_ok());
        let d = d.unwrap();
        prop_assume!(d.re.abs() < 1e6 && d.eps.iter().all(|v| v.abs() < 1e6));
        for k in 0..4 {
            let fd = |h: f64| -> Option<f64> {
                let mut up = y;
                let mut dn = y;
                up[k] += h;
                dn[k] -= h;
                Some((at(up).ok()? - at(dn).ok()?) / (2.0 * h))
            };
            let (Some(f1), Some(f2)) = (fd(1e-6), fd(2e-6)) else { continue };
            let scale = 1.0 + d.re.abs() + d.eps[k].abs();
            // skip kinks and points where the difference quotient itself is unstable
            if (f1 - f2).abs() > 1e-7 * scale {
                continue;
            }
            prop_assert!(
                (f1 - d.eps[k]).abs() <= 1e-6 * scale,
                "{e}: d/dvar{k} ad={} fd={f1}", d.eps[k]
            );
        }
    }
}
