use crate::background::BackgroundField;
use crate::error::{Error, Result};
use nalgebra::Vector3;

use crate::geometry::hamilton::{
    check_sheet_isolated, hamilton_field, project_to_sheet, sheet_factor, sheet_residual,
};
use crate::geometry::ode::{dopri5_guarded, OdeOptions, StepStats, StopReason};
use crate::spectra::EPS_C;
use crate::symbols::factor_scale;
use crate::symbols::{PhasePoint, Sheet};

/// Start points farther than this from their sheet are rejected.
pub const ON_SHEET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub s: f64,
    pub point: PhasePoint,
    /// `|q_sheet| / (rho (tau^2 + (c^2 + h^2)|xi|^2))`
    pub q_residual: f64,
}

/// A sampled bicharacteristic of one sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub sheet: Sheet,
    pub tol: f64,
    pub samples: Vec<RaySample>,
    pub q_drift: f64,
    pub stats: StepStats,
}

impl Ray {
    pub fn span(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayOptions {
    pub span: f64,
    pub tol: f64,
    pub samples: usize,
    /// Move the start point onto the sheet by solving for `tau`.
    pub project: bool,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            span: 1.0,
            tol: 1e-9,
            samples: 64,
            project: false,
        }
    }
}

pub fn trace_ray(start: &PhasePoint, sheet: Sheet, bg: &BackgroundField, span: f64, tol: f64) -> Result<Ray> {
    trace_ray_with(
        start,
        sheet,
        bg,
        &RayOptions {
            span,
            tol,
            ..RayOptions::default()
        },
    )
}

/// Right-hand side of the ray ODE, refusing points where the sheet is not
/// isolated from the other two.
pub(crate) fn ray_rhs(sheet: Sheet, bg: &BackgroundField, y: &[f64; 8]) -> Result<[f64; 8]> {
    let pt = PhasePoint::from_array(y);
    let ev = bg.eval(pt.t, pt.base())?;
    check_sheet_isolated(sheet, &pt, &ev)?;
    hamilton_field(sheet, &pt, &ev)
}

/// Quantities whose vanishing makes the sheet non-isolated: the unit
/// `xi x H`, then `xi . H`, `|H|^2 - rho c^2` and the other two sheet factors,
/// all normalized.
fn degeneracy_witnesses(sheet: Sheet, bg: &BackgroundField, y: &[f64; 8]) -> Result<(Vector3<f64>, [f64; 4])> {
    let pt = PhasePoint::from_array(y);
    let ev = bg.eval(pt.t, pt.base())?;
    let nn = pt.xi.norm() * ev.h.norm();
    let rc2 = ev.rho * ev.c2();
    let h2 = ev.h.norm_squared();
    let scale = factor_scale(&pt, &ev);
    let mut others = Sheet::ALL.into_iter().filter(|&o| o != sheet);
    let mut other = || sheet_factor(others.next().expect("two other sheets"), &pt, &ev) / scale;
    Ok((
        pt.xi.cross(&ev.h) / nn,
        [pt.xi.dot(&ev.h) / nn, (h2 - rc2) / (h2 + rc2), other(), other()],
    ))
}

/// Rejects a step whose end points are admissible but which passes through
/// a degeneracy: a sign change of a scalar witness, or a chord of the unit
/// `xi x H` passing within `EPS_C` of the origin.
pub(crate) fn step_guard(sheet: Sheet, bg: &BackgroundField, y0: &[f64; 8], y1: &[f64; 8]) -> Result<()> {
    const NAMES: [&str; 4] = ["xi . H", "|H|^2 - rho c^2", "first other sheet factor", "second other sheet factor"];
    let (c0, w0) = degeneracy_witnesses(sheet, bg, y0)?;
    let (c1, w1) = degeneracy_witnesses(sheet, bg, y1)?;
    for k in 0..4 {
        if w0[k] * w1[k] <= 0.0 {
            return Err(Error::DegenerateMode(format!("{} vanishes within a step", NAMES[k])));
        }
    }
    let d = c1 - c0;
    let t = if d.norm_squared() > 0.0 {
        (-c0.dot(&d) / d.norm_squared()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if (c0 + d * t).norm() <= EPS_C {
        return Err(Error::DegenerateMode("xi x H vanishes within a step".into()));
    }
    Ok(())
}

pub(crate) fn stop_error(reason: StopReason<Error>) -> String {
    match reason {
        StopReason::Failed(e) => e.to_string(),
        StopReason::StepUnderflow => "step size underflow".into(),
        StopReason::MaxSteps => "maximum number of steps reached".into(),
    }
}

pub fn trace_ray_with(start: &PhasePoint, sheet: Sheet, bg: &BackgroundField, opts: &RayOptions) -> Result<Ray> {
    let ev0 = bg.eval(start.t, start.base())?;
    let start = if opts.project {
        project_to_sheet(start, sheet, &ev0)?
    } else {
        *start
    };
    let residual = sheet_residual(sheet, &start, &ev0);
    if !(residual <= ON_SHEET_TOL) {
        return Err(Error::NotOnSheet { residual });
    }
    // the start must itself be admissible
    ray_rhs(sheet, bg, &start.to_array())?;

    let integ = dopri5_guarded(
        |_, y: &[f64; 8]| ray_rhs(sheet, bg, y),
        |a: &[f64; 8], b: &[f64; 8]| step_guard(sheet, bg, a, b),
        start.to_array(),
        opts.span,
        opts.samples,
        &OdeOptions::with_tol(opts.tol),
    )?;
    let mut samples = Vec::with_capacity(integ.s.len());
    let mut q_drift = 0.0f64;
    for (s, y) in integ.s.iter().zip(&integ.y) {
        let point = PhasePoint::from_array(y);
        let ev = bg.eval(point.t, point.base())?;
        let q_residual = sheet_residual(sheet, &point, &ev);
        q_drift = q_drift.max(q_residual);
        samples.push(RaySample {
            s: *s,
            point,
            q_residual,
        });
    }
    let ray = Ray {
        sheet,
        tol: opts.tol,
        samples,
        q_drift,
        stats: integ.stats,
    };
    match integ.stop {
        None => Ok(ray),
        Some(stop) => Err(Error::RayStopped {
            reason: stop_error(stop.reason),
            s_reached: stop.s_reached,
            partial: Box::new(ray),
        }),
    }
}
