use nalgebra::Vector3;

use crate::background::BackgroundEval;
use crate::error::{Error, Result};
use crate::spectra::magnetosonic_roots;
use crate::symbols::{background_partial, check_disjoint_hypotheses, factor_scale, PhasePoint, Sheet, EPS_DEG};

/// Relative floor on the magnetosonic radical argument below which the
/// slow and fast roots are not differentiable.
pub const RADICAL_EPS: f64 = 1e-14;

/// `q_sheet` at `pt`: `rho tau^2` minus the sheet's root.
pub fn sheet_factor(sheet: Sheet, pt: &PhasePoint, bg: &BackgroundEval) -> f64 {
    let rt2 = bg.rho * pt.tau * pt.tau;
    match sheet {
        Sheet::Alfven => {
            let s = bg.h.dot(&pt.xi);
            rt2 - s * s
        }
        Sheet::Slow => rt2 - magnetosonic_roots(bg, &pt.xi).slow,
        Sheet::Fast => rt2 - magnetosonic_roots(bg, &pt.xi).fast,
    }
}

/// `|q_sheet| / (rho (tau^2 + (c^2 + h^2)|xi|^2))`
pub fn sheet_residual(sheet: Sheet, pt: &PhasePoint, bg: &BackgroundEval) -> f64 {
    sheet_factor(sheet, pt, bg).abs() / factor_scale(pt, bg)
}

/// Root value and its derivatives along `(t, x1, x2, x3)` and `xi`.
struct RootGradient {
    dz: [f64; 4],
    dxi: Vector3<f64>,
}

fn root_gradient(sheet: Sheet, pt: &PhasePoint, bg: &BackgroundEval) -> Result<RootGradient> {
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let x2 = xi.norm_squared();
    if x2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    if sheet == Sheet::Alfven {
        let mut dz = [0.0; 4];
        for (k, d) in dz.iter_mut().enumerate() {
            let (_, _, dh) = background_partial(bg, k);
            *d = 2.0 * s * dh.dot(xi);
        }
        return Ok(RootGradient { dz, dxi: h * (2.0 * s) });
    }

    let r = magnetosonic_roots(bg, xi);
    if r.radical_arg <= RADICAL_EPS * r.sum * r.sum {
        return Err(Error::RadicalDegenerate {
            argument: r.radical_arg,
        });
    }
    let root = r.radical_arg.sqrt();
    let gp = bg.gamma_p();
    let g = gp + h.norm_squared();
    // d fast from (d sum, d product); slow = product / fast
    let chain = |d_sum: f64, d_prod: f64| -> f64 {
        let d_fast = 0.5 * (d_sum + (r.sum * d_sum - 2.0 * d_prod) / root);
        match sheet {
            Sheet::Fast => d_fast,
            _ => (d_prod - r.slow * d_fast) / r.fast,
        }
    };
    let mut dz = [0.0; 4];
    for (k, d) in dz.iter_mut().enumerate() {
        let (_, d_gp, dh) = background_partial(bg, k);
        let ds = dh.dot(xi);
        let d_sum = (d_gp + 2.0 * h.dot(&dh)) * x2;
        let d_prod = d_gp * s * s * x2 + 2.0 * gp * s * ds * x2;
        *d = chain(d_sum, d_prod);
    }
    let mut dxi = Vector3::zeros();
    for i in 0..3 {
        let d_sum = 2.0 * g * xi[i];
        let d_prod = 2.0 * gp * s * x2 * h[i] + 2.0 * gp * s * s * xi[i];
        dxi[i] = chain(d_sum, d_prod);
    }
    Ok(RootGradient { dz, dxi })
}

/// Hamilton field of `q_sheet` as `(dt, dx, dtau, dxi)` per unit parameter:
/// `(d_tau q, d_xi q, -d_t q, -d_x q)`.
pub fn hamilton_field(sheet: Sheet, pt: &PhasePoint, bg: &BackgroundEval) -> Result<[f64; 8]> {
    bg.check_physical()?;
    let g = root_gradient(sheet, pt, bg)?;
    let t2 = pt.tau * pt.tau;
    let mut v = [0.0; 8];
    v[0] = 2.0 * bg.rho * pt.tau;
    for i in 0..3 {
        v[1 + i] = -g.dxi[i];
    }
    for k in 0..4 {
        let (d_rho, _, _) = background_partial(bg, k);
        let dq = d_rho * t2 - g.dz[k];
        if k == 0 {
            v[4] = -dq;
        } else {
            v[4 + k] = -dq;
        }
    }
    Ok(v)
}

/// Replaces `tau` by the root of `q_sheet = 0` with the same sign
/// (positive when `tau = 0`).
pub fn project_to_sheet(pt: &PhasePoint, sheet: Sheet, bg: &BackgroundEval) -> Result<PhasePoint> {
    bg.check_physical()?;
    if pt.xi.norm() == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let root = match sheet {
        Sheet::Alfven => bg.h.dot(&pt.xi).powi(2),
        Sheet::Slow => magnetosonic_roots(bg, &pt.xi).slow,
        Sheet::Fast => magnetosonic_roots(bg, &pt.xi).fast,
    };
    let sign = if pt.tau < 0.0 { -1.0 } else { 1.0 };
    Ok(pt.with_tau(sign * (root / bg.rho).sqrt()))
}

/// Fails with `DegenerateMode` when `pt` is too close to another sheet for
/// `p~2` of `sheet` to exist.
pub fn check_sheet_isolated(sheet: Sheet, pt: &PhasePoint, bg: &BackgroundEval) -> Result<()> {
    check_disjoint_hypotheses(pt, bg)?;
    let scale = factor_scale(pt, bg);
    for other in Sheet::ALL {
        if other != sheet && sheet_factor(other, pt, bg).abs() < EPS_DEG * scale {
            return Err(Error::DegenerateMode(format!(
                "sheet {sheet} meets sheet {other}"
            )));
        }
    }
    Ok(())
}
