//! One function per subcommand. Each returns the text to emit and a status.

use std::f64::consts::TAU;

use mhdpol_core::background::{equilibrium_residual, BackgroundField};
use mhdpol_core::classify::classify_point;
use mhdpol_core::geometry::{
    auto_polarization, dencker_transport, direction_distance, simplified_transport, trace_ray_with, CVector3,
    PolarizationFrame, Ray, RayOptions,
};
use mhdpol_core::spectra::wave_speeds;
use mhdpol_core::symbols::{PhasePoint, Sheet};
use mhdpol_core::verify::{run_identity_suite, BackgroundSource, Mutation, SuiteOptions};
use mhdpol_core::Error;
use nalgebra::Vector3;
use num_complex::Complex64;

use crate::config::{PolarizationSpec, Scenario};
use crate::error::{CliError, Status};
use crate::output::Csv;
use crate::svg::{friedrichs_svg, Curve};

/// Everything a command produced.
#[derive(Debug, Default)]
pub struct Output {
    /// Primary document: CSV, or plain text for `classify` and `verify`.
    pub body: String,
    /// CSV written only when `--out` is given (`verify`).
    pub csv: Option<String>,
    /// Extra files, e.g. the Friedrichs SVG.
    pub files: Vec<(std::path::PathBuf, String)>,
    pub warnings: Vec<String>,
    pub status: Option<Status>,
}

impl Output {
    pub fn status(&self) -> Status {
        self.status.unwrap_or(Status::Ok)
    }
}

pub struct Context<'a> {
    pub command_line: &'a str,
    pub scenario: Option<&'a Scenario>,
}

impl Context<'_> {
    fn scenario(&self) -> Result<&Scenario, CliError> {
        self.scenario
            .ok_or_else(|| CliError::Usage("this command needs --config FILE".into()))
    }

    fn csv(&self) -> Csv {
        let hash = self.scenario.map_or_else(|| "none".to_string(), Scenario::hash);
        Csv::new(self.command_line, &hash)
    }
}

/// Residual of `grad p + H x curl H` at `x`, if above
/// `1e-10 (|grad p| + |H||curl H| + 1)`.
pub fn equilibrium_warning(field: &BackgroundField, t: f64, x: [f64; 3]) -> Result<Option<String>, CliError> {
    let ev = field.eval(t, x)?;
    let r = equilibrium_residual(field, x)?;
    let scale = ev.grad_p.norm() + ev.h.norm() * ev.curl_h().norm() + 1.0;
    Ok((r.norm() > 1e-10 * scale).then(|| {
        format!(
            "background is not in equilibrium at x = ({}, {}, {}): |grad p + H x curl H| = {:e}; p1 assumes equilibrium",
            x[0],
            x[1],
            x[2],
            r.norm()
        )
    }))
}

fn base_of(scenario: &Scenario) -> (f64, [f64; 3]) {
    scenario.point.map_or((0.0, [0.0; 3]), |p| (p.t, p.x))
}

fn start_point(ctx: &Context, point: Option<PhasePoint>) -> Result<PhasePoint, CliError> {
    point
        .or_else(|| ctx.scenario.and_then(|s| s.point).map(|p| p.phase_point()))
        .ok_or_else(|| CliError::Usage("no phase point: pass --point or set `point` in the scenario".into()))
}

fn push_warning(out: &mut Output, csv: Option<&mut Csv>, w: Option<String>) {
    if let Some(w) = w {
        if let Some(csv) = csv {
            csv.comment("warning", &w);
        }
        out.warnings.push(w);
    }
}

pub fn speeds(ctx: &Context, xis: &[[f64; 3]]) -> Result<Output, CliError> {
    let scenario = ctx.scenario()?;
    let field = scenario.field()?;
    let (t, x) = base_of(scenario);
    let ev = field.eval(t, x)?;
    let xis: Vec<[f64; 3]> = if xis.is_empty() {
        vec![scenario
            .point
            .ok_or_else(|| CliError::Usage("no direction: pass --xi or set `point.xi` in the scenario".into()))?
            .xi]
    } else {
        xis.to_vec()
    };
    let mut out = Output::default();
    let mut csv = ctx.csv();
    push_warning(&mut out, Some(&mut csv), equilibrium_warning(&field, t, x)?);
    csv.columns(&["xi1", "xi2", "xi3", "cs", "ca", "cf", "c", "h"]);
    for xi in xis {
        let xi = Vector3::from(xi);
        let ws = wave_speeds(&ev, &xi)?;
        let n = xi / xi.norm();
        csv.row(&[n[0], n[1], n[2], ws.cs(), ws.ca(), ws.cf(), ws.c2.sqrt(), ws.h2.sqrt()]);
    }
    out.body = csv.into_string();
    Ok(out)
}

pub fn friedrichs(ctx: &Context, n_theta: Option<usize>, svg: Option<std::path::PathBuf>) -> Result<Output, CliError> {
    let scenario = ctx.scenario()?;
    let n = n_theta.unwrap_or(scenario.friedrichs.n_theta);
    if n == 0 {
        return Err(CliError::Usage("the number of angles must be positive".into()));
    }
    let field = scenario.field()?;
    let (t, x) = base_of(scenario);
    let ev = field.eval(t, x)?;
    let h = ev.h;
    if h.norm() == 0.0 {
        return Err(CliError::Config("the Friedrichs diagram needs H != 0 at the base point".into()));
    }
    let e1 = h / h.norm();
    let seed = match scenario.friedrichs.normal {
        Some(v) => Vector3::from(v),
        None => {
            let k = e1.iamin();
            Vector3::ith(k, 1.0)
        }
    };
    let e2 = seed - e1 * e1.dot(&seed);
    if e2.norm() <= 1e-12 * seed.norm() {
        return Err(CliError::Config("friedrichs.normal must not be parallel to H".into()));
    }
    let e2 = e2 / e2.norm();

    let mut out = Output::default();
    let mut csv = ctx.csv();
    push_warning(&mut out, Some(&mut csv), equilibrium_warning(&field, t, x)?);
    csv.comment("plane", &format!("({}, {}, {}) x ({}, {}, {})", e1[0], e1[1], e1[2], e2[0], e2[1], e2[2]));
    csv.columns(&["theta", "cs", "ca", "cf"]);
    let mut theta = Vec::with_capacity(n);
    let (mut cs, mut ca, mut cf) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..n {
        let th = TAU * k as f64 / n as f64;
        let xi = e1 * th.cos() + e2 * th.sin();
        let ws = wave_speeds(&ev, &xi)?;
        csv.row(&[th, ws.cs(), ws.ca(), ws.cf()]);
        theta.push(th);
        cs.push(ws.cs());
        ca.push(ws.ca());
        cf.push(ws.cf());
    }
    out.body = csv.into_string();
    if let Some(path) = svg.or_else(|| scenario.friedrichs.svg.clone()) {
        let doc = friedrichs_svg(
            &theta,
            &[
                Curve { label: "slow", color: "#1f77b4", values: &cs },
                Curve { label: "Alfven", color: "#2ca02c", values: &ca },
                Curve { label: "fast", color: "#d62728", values: &cf },
            ],
        );
        out.files.push((path, doc));
    }
    Ok(out)
}

pub fn classify(ctx: &Context, point: Option<PhasePoint>) -> Result<Output, CliError> {
    let scenario = ctx.scenario()?;
    let field = scenario.field()?;
    let pt = start_point(ctx, point)?;
    let ev = field.eval(pt.t, pt.base())?;
    let mut out = Output::default();
    push_warning(&mut out, None, equilibrium_warning(&field, pt.t, pt.base())?);
    let r = classify_point(&pt, &ev)?;
    let w = r.witnesses;
    let sheets: Vec<String> = w.sheets.indices().iter().map(|j| format!("S{j}")).collect();
    let order = r.vanishing_order.map_or_else(|| "unknown".to_string(), |v| v.to_string());
    out.body = format!(
        "regime: {}\nkernel_dim: {}\nvanishing_order: {}\nsheets: {}\ntau: {:e}\nxi.H: {:e}\n|xi x H|: {:e}\n|H|^2 - rho c^2: {:e}\n",
        r.regime,
        r.kernel_dim,
        order,
        if sheets.is_empty() { "none".to_string() } else { sheets.join(" ") },
        w.tau,
        w.xi_dot_h,
        w.xi_cross_h,
        w.h2_minus_rho_c2,
    );
    Ok(out)
}

fn ray_options(scenario: &Scenario) -> RayOptions {
    RayOptions {
        span: scenario.ray.span,
        tol: scenario.ray.tol,
        samples: scenario.ray.samples,
        project: scenario.ray.project,
    }
}

/// Traces the scenario ray; a stopped ray comes back with its reason.
fn traced(
    ctx: &Context,
    point: Option<PhasePoint>,
    sheet: Option<Sheet>,
) -> Result<(BackgroundField, Ray, Option<(String, f64)>, Option<String>), CliError> {
    let scenario = ctx.scenario()?;
    let field = scenario.field()?;
    let start = start_point(ctx, point)?;
    let sheet = sheet.unwrap_or_else(|| scenario.sheet());
    let warning = equilibrium_warning(&field, start.t, start.base())?;
    match trace_ray_with(&start, sheet, &field, &ray_options(scenario)) {
        Ok(ray) => Ok((field, ray, None, warning)),
        Err(Error::RayStopped {
            reason,
            s_reached,
            partial,
        }) => Ok((field, *partial, Some((reason, s_reached)), warning)),
        Err(e) => Err(e.into()),
    }
}

const RAY_COLUMNS: [&str; 10] = ["s", "t", "x1", "x2", "x3", "tau", "xi1", "xi2", "xi3", "q_residual"];

fn ray_row(s: f64, p: &PhasePoint, q: f64) -> Vec<f64> {
    vec![s, p.t, p.x[0], p.x[1], p.x[2], p.tau, p.xi[0], p.xi[1], p.xi[2], q]
}

fn ray_header(csv: &mut Csv, ray: &Ray, stop: &Option<(String, f64)>) {
    csv.comment("sheet", &ray.sheet.index().to_string());
    csv.comment("q_drift", &format!("{:e}", ray.q_drift));
    if let Some((reason, s)) = stop {
        csv.comment("stopped", &format!("s = {s}: {reason}"));
    }
}

pub fn ray(ctx: &Context, point: Option<PhasePoint>, sheet: Option<Sheet>) -> Result<Output, CliError> {
    let (_, ray, stop, warning) = traced(ctx, point, sheet)?;
    let mut out = Output::default();
    let mut csv = ctx.csv();
    push_warning(&mut out, Some(&mut csv), warning);
    ray_header(&mut csv, &ray, &stop);
    csv.columns(&RAY_COLUMNS);
    for smp in &ray.samples {
        csv.row(&ray_row(smp.s, &smp.point, smp.q_residual));
    }
    out.body = csv.into_string();
    if let Some((reason, s)) = stop {
        out.warnings.push(format!("ray stopped at s = {s}: {reason}"));
        out.status = Some(Status::RayStopped);
    }
    Ok(out)
}

fn initial_polarization(spec: &PolarizationSpec, start: &PhasePoint, field: &BackgroundField) -> Result<CVector3, CliError> {
    Ok(match spec {
        PolarizationSpec::Named(_) => auto_polarization(start, field)?,
        PolarizationSpec::Real(v) => CVector3::new(v[0].into(), v[1].into(), v[2].into()),
        PolarizationSpec::Complex(v) => CVector3::new(
            Complex64::new(v[0][0], v[0][1]),
            Complex64::new(v[1][0], v[1][1]),
            Complex64::new(v[2][0], v[2][1]),
        ),
    })
}

pub fn transport(ctx: &Context, point: Option<PhasePoint>, sheet: Option<Sheet>) -> Result<Output, CliError> {
    let scenario = ctx.scenario()?;
    let (field, ray, stop, warning) = traced(ctx, point, sheet)?;
    let start = ray
        .samples
        .first()
        .ok_or_else(|| CliError::Config("ray has no samples".into()))?
        .point;
    let w0 = initial_polarization(&scenario.transport.polarization, &start, &field)?;
    let frame: PolarizationFrame = dencker_transport(&ray, &field, &w0)?;
    let simple = simplified_transport(&ray, &field, &w0)?;

    let mut out = Output::default();
    let mut csv = ctx.csv();
    push_warning(&mut out, Some(&mut csv), warning);
    ray_header(&mut csv, &ray, &stop);
    csv.comment("max_kernel_residual", &format!("{:e}", frame.max_kernel_residual));
    let mut cols = RAY_COLUMNS.to_vec();
    cols.extend([
        "w1_re",
        "w1_im",
        "w2_re",
        "w2_im",
        "w3_re",
        "w3_im",
        "kernel_residual",
        "d1_re",
        "d1_im",
        "d2_re",
        "d2_im",
        "d3_re",
        "d3_im",
        "simplified_distance",
    ]);
    csv.columns(&cols);
    for ((r, f), s) in ray.samples.iter().zip(&frame.samples).zip(&simple.samples) {
        let mut row = ray_row(r.s, &r.point, r.q_residual);
        for z in f.w.iter() {
            row.extend([z.re, z.im]);
        }
        row.push(f.kernel_residual);
        for z in f.direction.iter() {
            row.extend([z.re, z.im]);
        }
        row.push(direction_distance(&f.direction, &s.direction));
        csv.row(&row);
    }
    out.body = csv.into_string();
    if let Some((reason, s)) = stop {
        out.warnings.push(format!("ray stopped at s = {s}: {reason}"));
        out.status = Some(Status::RayStopped);
    }
    Ok(out)
}

pub struct VerifyArgs {
    pub seed: u64,
    pub samples: usize,
    pub threads: Option<usize>,
    pub mutation: Option<Mutation>,
}

pub fn verify(ctx: &Context, args: &VerifyArgs) -> Result<Output, CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let background = match ctx.scenario {
        Some(s) => BackgroundSource::Field(s.field()?),
        None => BackgroundSource::Random,
    };
    let report = run_identity_suite(&SuiteOptions {
        seed: args.seed,
        samples: args.samples,
        mutation: args.mutation,
        threads: args.threads,
        background,
        only: Vec::new(),
    });
    let mut csv = ctx.csv();
    csv.comment("seed", &args.seed.to_string());
    csv.raw(&report.to_csv());
    Ok(Output {
        body: format!("{report}\n"),
        csv: Some(csv.into_string()),
        status: Some(if report.pass {
            Status::Ok
        } else {
            Status::VerificationFailed
        }),
        ..Output::default()
    })
}
