//! Randomized identity suite: every closed form against an oracle.

use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::background::{BackgroundEval, BackgroundField};
use crate::classify::{check_kernel_mapping, classify_point, vanishing_order, Regime};
use crate::error::Result;
use crate::geometry::hamilton::{hamilton_field, sheet_factor, RADICAL_EPS};
use crate::geometry::transport::hamilton_derivative_projector;
use crate::geometry::bracket::{bracket_from_gradients, phase_gradient};
use crate::spectra::{
    build_projectors, characteristic_factors, eigenvalues_a, kernel_basis, magnetosonic_roots, multiplicity_case,
    wave_speeds, CaseTag, KERNEL_TOL,
};
use crate::symbols::{
    build_a, build_p1, build_ptilde, build_q, build_subprincipal, det_q, mixed_derivative_trace, norm_inf,
    p2_with_cross_sign, subprincipal_definitional, symmetrizer, two_i_subprincipal, Matrix8, MatrixSymbol,
    PhasePoint, Sheet,
};
use crate::verify::oracle::{
    condition_number, numeric_adjugate, numeric_det, numeric_det_real, numeric_eig_general, numeric_eig_sym,
    numeric_kernel,
};
use crate::verify::sampling::{
    generic_hypotheses, generic_hypotheses_with, log_uniform, mhd_sigma2_point, point_on_sheet, random_base_point, random_field,
    random_sheet, random_uniform_background, random_xi, sample_rng, uniaxial_sigma2_point, MARGIN,
};

/// Deliberate corruption of a formula, used to show the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the sign of `(H.xi)(xi H^T + H xi^T)` in `p2`.
    P2CrossSign,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSource {
    /// Random constant backgrounds and random analytic fields.
    Random,
    /// One user field, sampled at random points of `[-1, 1]^3`.
    Field(BackgroundField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: usize,
    pub mutation: Option<Mutation>,
    pub threads: Option<usize>,
    pub background: BackgroundSource,
    /// Names of the checks to run; empty runs all of them.
    pub only: Vec<String>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 1000,
            mutation: None,
            threads: None,
            background: BackgroundSource::Random,
            only: Vec::new(),
        }
    }
}

/// Whether the statistic is an upper bound (`max <= tol`) or, for negative
/// controls, a lower bound (`min >= tol`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub samples: usize,
    pub statistic: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub requested: usize,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,name,samples,max_residual,tolerance,pass\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{}",
                c.id, c.name, c.samples, c.statistic, c.tolerance, c.pass
            );
        }
        out
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "identity suite: seed {} samples {}", self.seed, self.requested)?;
        for c in &self.checks {
            let rel = match c.bound {
                Bound::Upper => "max",
                Bound::Lower => "min",
            };
            writeln!(
                f,
                "{:>2} {:<28} n={:<6} {rel}={:<12.4e} tol={:<9.1e} {}",
                c.id,
                c.name,
                c.samples,
                c.statistic,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "overall: {} ({} of {} checks failed)",
            if self.pass { "PASS" } else { "FAIL" },
            self.failures(),
            self.checks.len()
        )
    }
}

struct Ctx {
    seed: u64,
    cross_sign: f64,
    source: BackgroundSource,
}

const ATTEMPTS: usize = 64;
const BRACKET_MARGIN: f64 = 1e-2;

impl Ctx {
    fn p2(&self, pt: &PhasePoint, bg: &BackgroundEval) -> Matrix3<f64> {
        p2_with_cross_sign(pt, bg, self.cross_sign)
    }

    /// A spatially constant background.
    fn uniform(&self, rng: &mut ChaCha8Rng) -> Option<BackgroundEval> {
        match &self.source {
            BackgroundSource::Random => Some(random_uniform_background(rng)),
            BackgroundSource::Field(f) => {
                let ev = f.eval(0.0, random_base_point(rng)).ok()?;
                BackgroundEval::uniform(ev.rho, ev.p, ev.gamma, ev.h).ok()
            }
        }
    }

    /// A non-constant field and an evaluation point.
    fn field(&self, rng: &mut ChaCha8Rng) -> (BackgroundField, [f64; 3]) {
        let f = match &self.source {
            BackgroundSource::Random => random_field(rng),
            BackgroundSource::Field(f) => f.clone(),
        };
        (f, random_base_point(rng))
    }
}

type SampleFn = fn(&Ctx, &mut ChaCha8Rng, usize) -> Result<Option<f64>>;

fn retry<T>(mut f: impl FnMut() -> Option<T>) -> Option<T> {
    (0..ATTEMPTS).find_map(|_| f())
}

fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        num / den
    }
}

fn dm8(m: &Matrix8) -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |i, j| m[(i, j)])
}

fn dm3(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

fn random_tau(rng: &mut ChaCha8Rng, bg: &BackgroundEval, xi: &Vector3<f64>) -> Result<f64> {
    let cf = wave_speeds(bg, xi)?.cf() * xi.norm();
    Ok(rng.random_range(-1.5..1.5) * cf)
}

fn det_factorization(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    for _ in 0..ATTEMPTS {
        let Some(bg) = ctx.uniform(rng) else { continue };
        let xi = random_xi(rng);
        let tau = random_tau(rng, &bg, &xi)?;
        let pt = PhasePoint::new(0.0, [0.0; 3], tau, xi.into());
        let q = dm8(&build_q(&pt, &bg)?);
        if condition_number(&q) >= 1e8 {
            continue;
        }
        let lu = numeric_det_real(&q);
        let f = det_q(&pt, &bg)?;
        return Ok(Some(rel((lu - f).abs(), f.abs())));
    }
    Ok(None)
}

fn sorted_eigs(m: &DMatrix<f64>) -> Option<Vec<num_complex::Complex64>> {
    let mut ev = numeric_eig_general(m)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    Some(ev)
}

fn eigenvalues_of_a(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = random_xi(rng);
    let formula = eigenvalues_a(&bg, &xi)?;
    let Some(num) = sorted_eigs(&dm8(&build_a(&bg, &xi)?)) else {
        return Ok(Some(f64::INFINITY));
    };
    let scale = 1.0 + formula.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = formula
        .iter()
        .zip(&num)
        .map(|(f, n)| (f - n.re).abs().max(n.im.abs()))
        .fold(0.0, f64::max);
    Ok(Some(dev / scale))
}

fn multiplicity_cases(ctx: &Ctx, rng: &mut ChaCha8Rng, index: usize) -> Result<Option<f64>> {
    let want = [
        CaseTag::GenericTransverse,
        CaseTag::PerpendicularDegenerate,
        CaseTag::ParallelSubAlfvenic,
        CaseTag::ParallelSuperAlfvenic,
    ][index % 4];
    for _ in 0..ATTEMPTS {
        let Some(bg) = ctx.uniform(rng) else { continue };
        let nh = bg.h.norm();
        if nh < MARGIN {
            continue;
        }
        let h2 = nh * nh;
        let rc2 = bg.rho * bg.c2();
        let len = log_uniform(rng, 0.1, 10.0);
        let xi = match want {
            CaseTag::GenericTransverse => {
                let xi = random_xi(rng);
                if !generic_hypotheses(&bg, &xi) {
                    continue;
                }
                let ev = eigenvalues_a(&bg, &xi)?;
                let scale = 1.0 + ev[7].abs();
                // distinct nonzero eigenvalues well separated
                let distinct: Vec<f64> = [ev[0], ev[1], ev[2], 0.0, ev[5], ev[6], ev[7]].to_vec();
                if distinct.windows(2).any(|w| (w[1] - w[0]) < MARGIN * scale) {
                    continue;
                }
                xi
            }
            CaseTag::PerpendicularDegenerate => mhd_sigma2_point(rng, &bg).xi,
            CaseTag::ParallelSubAlfvenic | CaseTag::ParallelSuperAlfvenic => {
                let sub = want == CaseTag::ParallelSubAlfvenic;
                if (sub && h2 >= rc2 * (1.0 - MARGIN)) || (!sub && h2 <= rc2 * (1.0 + MARGIN)) {
                    continue;
                }
                bg.h * (len / nh)
            }
        };
        let case = multiplicity_case(&bg, &xi)?;
        if case.tag != want {
            return Ok(Some(1.0));
        }
        let Some(num) = sorted_eigs(&dm8(&build_a(&bg, &xi)?)) else {
            return Ok(Some(1.0));
        };
        let scale = 1.0 + num.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let total: usize = case.eigenvalues.iter().map(|e| e.1).sum();
        let ok = total == 8
            && case.eigenvalues.iter().all(|(lam, mult)| {
                num.iter().filter(|z| (*z - lam).norm() <= 1e-6 * scale).count() == *mult
            });
        return Ok(Some(if ok { 0.0 } else { 1.0 }));
    }
    Ok(None)
}

fn symmetrizer_check(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = random_xi(rng);
    let s = symmetrizer(&bg)?;
    let sd = dm8(&s);
    if s != s.transpose() || numeric_eig_sym(&sd)[0] <= 0.0 {
        return Ok(Some(f64::INFINITY));
    }
    let sa = s * build_a(&bg, &xi)?;
    Ok(Some(rel(norm_inf(&(sa - sa.transpose())), norm_inf(&sa))))
}

fn wave_speed_invariants(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = random_xi(rng);
    let w = wave_speeds(&bg, &xi)?;
    let a2 = w.a * w.a;
    let top = w.cf2;
    let mut worst = 0.0f64;
    // ordering, with rounding slack relative to the largest speed
    worst = worst.max((w.cs2 - a2.min(w.c2)).max(0.0) / top);
    worst = worst.max((a2.max(w.c2) - w.cf2).max(0.0) / top);
    worst = worst.max((w.cs2 * w.cf2 - a2 * w.c2).abs() / (top * top));
    // the textbook minus-root agrees with the product form
    let minus = 0.5 * ((w.c2 + w.h2) - ((w.c2 - w.h2).powi(2) + 4.0 * w.b2 * w.c2).sqrt());
    worst = worst.max((minus.max(0.0) - w.cs2).abs() / top);
    if a2 >= MARGIN * w.h2 && w.b2 >= MARGIN * w.h2 && !(w.cs2 < a2 && a2 < w.cf2) {
        worst = f64::INFINITY;
    }
    Ok(Some(worst))
}

fn generic_point(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Option<(BackgroundEval, PhasePoint)>> {
    for _ in 0..ATTEMPTS {
        let Some(bg) = ctx.uniform(rng) else { continue };
        let xi = random_xi(rng);
        if !generic_hypotheses(&bg, &xi) {
            continue;
        }
        let tau = random_tau(rng, &bg, &xi)?;
        return Ok(Some((bg, PhasePoint::new(0.0, [0.0; 3], tau, xi.into()))));
    }
    Ok(None)
}

fn p2_spectrum(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some((bg, pt)) = generic_point(ctx, rng)? else { return Ok(None) };
    let p2 = ctx.p2(&pt, &bg);
    let ev = numeric_eig_sym(&dm3(&p2));
    let mut q = characteristic_factors(&pt, &bg)?.to_vec();
    q.sort_by(f64::total_cmp);
    let dev = ev.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Some(rel(dev, p2.norm())))
}

fn projectors(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some((bg, pt)) = generic_point(ctx, rng)? else { return Ok(None) };
    let p = build_projectors(&pt, &bg)?;
    let pis = p.as_array();
    let id = Matrix3::identity();
    let mut worst = 0.0f64;
    for (i, a) in pis.iter().enumerate() {
        worst = worst.max((a * a - a).norm());
        worst = worst.max((a - a.transpose()).norm());
        worst = worst.max((a.trace() - 1.0).abs());
        for (j, b) in pis.iter().enumerate() {
            if i != j {
                worst = worst.max((a * b).norm());
            }
        }
    }
    worst = worst.max((pis[0] + pis[1] + pis[2] - id).norm());
    let q = characteristic_factors(&pt, &bg)?;
    let p2 = ctx.p2(&pt, &bg);
    let recon = pis[0] * q[0] + pis[1] * q[1] + pis[2] * q[2];
    worst = worst.max(rel((p2 - recon).norm(), p2.norm()));
    Ok(Some(worst))
}

fn parametrix(ctx: &Ctx, rng: &mut ChaCha8Rng, sheet: Sheet) -> Result<Option<f64>> {
    for _ in 0..ATTEMPTS {
        let Some(bg) = ctx.uniform(rng) else { continue };
        let xi = random_xi(rng);
        if !generic_hypotheses(&bg, &xi) {
            continue;
        }
        let on = point_on_sheet(rng, &bg, [0.0; 3], xi, sheet)?;
        let delta = if rng.random_bool(0.25) { 0.0 } else { rng.random_range(-0.05..0.05) };
        let pt = on.with_tau(on.tau * (1.0 + delta));
        let pt2 = match build_ptilde(&pt, &bg, sheet) {
            Ok(m) => m,
            Err(crate::Error::DegenerateMode(_)) => continue,
            Err(e) => return Err(e),
        };
        let p2 = ctx.p2(&pt, &bg);
        let qj = characteristic_factors(&pt, &bg)?[sheet.index() - 1];
        let r = pt2 * p2 - Matrix3::identity() * qj;
        return Ok(Some(rel(r.norm(), pt2.norm() * p2.norm())));
    }
    Ok(None)
}

fn parametrix_1(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    parametrix(ctx, rng, Sheet::Alfven)
}

fn parametrix_2(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    parametrix(ctx, rng, Sheet::Slow)
}

fn parametrix_3(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    parametrix(ctx, rng, Sheet::Fast)
}

fn subprincipal(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let (field, x) = ctx.field(rng);
    let Ok(bg) = field.eval(0.0, x) else { return Ok(None) };
    let xi = random_xi(rng);
    let tau = random_tau(rng, &bg, &xi)?;
    let pt = PhasePoint::new(0.0, x, tau, xi.into());
    let r = two_i_subprincipal(&pt, &bg);
    let scale = r.norm() + 2.0 * build_p1(&pt, &bg)?.norm() + mixed_derivative_trace(&pt, &bg).norm();
    if scale == 0.0 {
        return Ok(Some(0.0));
    }
    let mut worst = (r + r.transpose()).norm() / scale;
    for i in 0..3 {
        worst = worst.max(r[(i, i)].abs() / scale);
    }
    let two_i = num_complex::Complex64::new(0.0, 2.0);
    let def = subprincipal_definitional(&pt, &bg)? * two_i;
    let closed = build_subprincipal(&pt, &bg)? * two_i;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(def[(i, j)].im.abs() / scale);
            worst = worst.max((def[(i, j)] - closed[(i, j)]).norm() / scale);
        }
    }
    Ok(Some(worst))
}

/// Squared Alfven, slow and fast speeds pairwise at least `margin * cf^2`
/// apart. Near-parallel `xi` passes the angle hypotheses with gaps of order
/// `sin^2`.
fn speeds_separated(bg: &BackgroundEval, xi: &Vector3<f64>, margin: f64) -> Result<bool> {
    let w = wave_speeds(bg, xi)?;
    let a2 = w.a * w.a;
    let gap = (a2 - w.cs2).abs().min((w.cf2 - a2).abs()).min(w.cf2 - w.cs2);
    Ok(gap >= margin * w.cf2)
}

fn char_point_on_field(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    margin: f64,
) -> Result<Option<(BackgroundField, BackgroundEval, PhasePoint, Sheet)>> {
    for _ in 0..ATTEMPTS {
        let (field, x) = ctx.field(rng);
        let Ok(bg) = field.eval(0.0, x) else { continue };
        let xi = random_xi(rng);
        if !generic_hypotheses_with(&bg, &xi, margin) || !speeds_separated(&bg, &xi, margin)? {
            continue;
        }
        let sheet = random_sheet(rng);
        let r = magnetosonic_roots(&bg, &xi);
        if sheet != Sheet::Alfven && r.radical_arg < 1e-6 * r.sum * r.sum {
            continue;
        }
        let pt = point_on_sheet(rng, &bg, x, xi, sheet)?;
        if build_ptilde(&pt, &bg, sheet).is_err() {
            continue;
        }
        return Ok(Some((field, bg, pt, sheet)));
    }
    Ok(None)
}

fn ptilde_ps_pi(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some((_, bg, pt, sheet)) = char_point_on_field(ctx, rng, MARGIN)? else { return Ok(None) };
    let pt2 = build_ptilde(&pt, &bg, sheet)?;
    let ps = build_subprincipal(&pt, &bg)?;
    let pi = *build_projectors(&pt, &bg)?.get(sheet);
    let c = |m: &Matrix3<f64>| m.map(|v| num_complex::Complex64::new(v, 0.0));
    let prod = c(&pt2) * ps * c(&pi);
    // p^s vanishes identically when only rho varies; the identity then holds trivially
    Ok(Some(rel(prod.norm(), pt2.norm() * ps.norm() * pi.norm())))
}

fn bracket_lemma(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some((field, bg, pt, sheet)) = char_point_on_field(ctx, rng, BRACKET_MARGIN)? else { return Ok(None) };
    let cross = ctx.cross_sign;
    let f = &field;
    let ptilde = move |p: &PhasePoint| build_ptilde(p, &f.eval(p.t, p.base())?, sheet);
    let p2 = move |p: &PhasePoint| Ok(p2_with_cross_sign(p, &f.eval(p.t, p.base())?, cross));
    let br = bracket_from_gradients(&phase_gradient(&ptilde, &pt)?, &phase_gradient(&p2, &pt)?);
    let pi = *build_projectors(&pt, &bg)?.get(sheet);
    let v = crate::verify::sampling::unit_vector(rng);
    let a = pi * v;
    if a.norm() < 1e-3 {
        return Ok(None);
    }
    let hpi = hamilton_derivative_projector(&pt, &field, sheet)?;
    let lhs = br * pi * a;
    let rhs = hpi * a * -2.0;
    let den = (br.norm() + 2.0 * hpi.norm()) * a.norm();
    Ok(Some(rel((lhs - rhs).norm(), den)))
}

fn sigma2_point(ctx: &Ctx, rng: &mut ChaCha8Rng, regime: Regime) -> Option<(BackgroundEval, PhasePoint)> {
    retry(|| {
        let bg = ctx.uniform(rng)?;
        let nh = bg.h.norm();
        if nh < MARGIN {
            return None;
        }
        match regime {
            Regime::MhdTypeSigma2 => Some((bg, mhd_sigma2_point(rng, &bg))),
            _ => {
                let h2 = nh * nh;
                let rc2 = bg.rho * bg.c2();
                if (h2 - rc2).abs() < MARGIN * (h2 + rc2) {
                    return None;
                }
                Some((bg, uniaxial_sigma2_point(rng, &bg)))
            }
        }
    })
}

fn alternate(index: usize) -> (Regime, usize) {
    if index % 2 == 0 {
        (Regime::MhdTypeSigma2, 6)
    } else {
        (Regime::UniaxialSigma2, 2)
    }
}

fn kernel_dims(ctx: &Ctx, rng: &mut ChaCha8Rng, index: usize) -> Result<Option<f64>> {
    let (regime, dim) = alternate(index);
    let Some((bg, pt)) = sigma2_point(ctx, rng, regime) else { return Ok(None) };
    let q = build_q(&pt, &bg)?;
    let oracle = numeric_kernel(&dm8(&q), KERNEL_TOL).len();
    let svd = kernel_basis(&MatrixSymbol::from_real(&q, 1), KERNEL_TOL).len();
    let report = classify_point(&pt, &bg)?;
    let bad = (oracle != dim) as u8 + (svd != dim) as u8 + (report.regime != regime) as u8 + (report.kernel_dim != dim) as u8;
    Ok(Some(f64::from(bad)))
}

fn vanishing_orders(ctx: &Ctx, rng: &mut ChaCha8Rng, index: usize) -> Result<Option<f64>> {
    let (bg, pt, want) = match index % 3 {
        0 => {
            let Some((bg, pt)) = sigma2_point(ctx, rng, Regime::MhdTypeSigma2) else { return Ok(None) };
            (bg, pt, 6)
        }
        1 => {
            let Some((bg, pt)) = sigma2_point(ctx, rng, Regime::UniaxialSigma2) else { return Ok(None) };
            (bg, pt, 2)
        }
        _ => {
            let Some((bg, pt)) = generic_point(ctx, rng)? else { return Ok(None) };
            let pt = point_on_sheet(rng, &bg, [0.0; 3], pt.xi, Sheet::Fast)?;
            (bg, pt, 1)
        }
    };
    let got = vanishing_order(&pt, &bg, 8)?;
    Ok(Some(if got == Some(want) { 0.0 } else { 1.0 }))
}

fn kernel_mapping(ctx: &Ctx, rng: &mut ChaCha8Rng, index: usize) -> Result<Option<f64>> {
    let (regime, _) = alternate(index);
    let Some((bg, pt)) = sigma2_point(ctx, rng, regime) else { return Ok(None) };
    Ok(Some(check_kernel_mapping(&pt, &bg, regime)?))
}

fn kernel_mapping_negative(ctx: &Ctx, rng: &mut ChaCha8Rng, index: usize) -> Result<Option<f64>> {
    let (regime, _) = alternate(index);
    let Some((bg, pt)) = sigma2_point(ctx, rng, regime) else { return Ok(None) };
    let off = pt.with_tau(pt.tau + 0.1 * pt.fiber_norm());
    Ok(Some(check_kernel_mapping(&off, &bg, regime)?))
}

fn reduced_matrix(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = crate::verify::sampling::unit_vector(rng);
    let v = bg.h / bg.rho.sqrt();
    let a = xi.dot(&v);
    let b = xi.cross(&v).norm();
    let c2 = bg.c2();
    let mut m = DMatrix::<f64>::zeros(7, 7);
    m[(0, 1)] = 1.0;
    m[(1, 4)] = b;
    m[(1, 6)] = 1.0;
    m[(2, 4)] = -a;
    m[(3, 5)] = -a;
    m[(4, 1)] = b;
    m[(4, 2)] = -a;
    m[(5, 3)] = -a;
    m[(6, 1)] = c2;
    let Some(ev) = numeric_eig_general(&m) else { return Ok(Some(f64::INFINITY)) };
    let big = ev.iter().fold(a.abs().max(b).max(c2.sqrt()), |acc, z| acc.max(z.norm()));
    let mut worst = 0.0f64;
    for z in &ev {
        let l2 = z * z;
        let p = z * (l2 - a * a) * ((l2 - a * a) * (l2 - c2) - l2 * b * b);
        worst = worst.max(p.norm() / big.powi(7));
    }
    // every closed-form root of the 7x7 system is an eigenvalue
    let w = wave_speeds(&bg, &xi)?;
    for root in [0.0, a, -a, w.cs(), -w.cs(), w.cf(), -w.cf()] {
        let d = ev.iter().map(|z| (z - root).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d.powi(2) / big.powi(2));
    }
    Ok(Some(worst))
}

fn hadamard_ratio(adj: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let rows: Vec<f64> = (0..n).map(|k| m.row(k).norm()).collect();
    let mut worst = 0.0f64;
    for c in 0..n {
        for r in 0..n {
            let bound: f64 = (0..n).filter(|&k| k != r).map(|k| rows[k]).product();
            worst = worst.max(rel(adj[(c, r)].abs(), bound));
        }
    }
    worst
}

fn adjugate_tau_zero(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = random_xi(rng);
    let q = dm8(&build_q(&PhasePoint::new(0.0, [0.0; 3], 0.0, xi.into()), &bg)?);
    Ok(Some(hadamard_ratio(&numeric_adjugate(&q), &q)))
}

fn adjugate_limit(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some((bg, pt)) = generic_point(ctx, rng)? else { return Ok(None) };
    let ev = eigenvalues_a(&bg, &pt.xi)?;
    let top = ev[7].abs();
    let lo = ev
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 1e-8 * top)
        .fold(f64::INFINITY, f64::min);
    let m = |tau: f64| -> Result<DMatrix<f64>> {
        let q = dm8(&build_q(&pt.with_tau(tau), &bg)?);
        Ok(numeric_adjugate(&q) / tau)
    };
    let m1 = m(1e-3 * lo)?;
    let m2 = m(1e-4 * lo)?;
    Ok(Some(rel((&m1 - &m2).amax(), m2.amax())))
}

fn adjugate_identity_p2(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    let Some(bg) = retry(|| ctx.uniform(rng)) else { return Ok(None) };
    let xi = random_xi(rng);
    let tau = random_tau(rng, &bg, &xi)?;
    let p2 = dm3(&ctx.p2(&PhasePoint::new(0.0, [0.0; 3], tau, xi.into()), &bg));
    let adj = numeric_adjugate(&p2);
    let det = numeric_det(&p2.map(|v| num_complex::Complex64::new(v, 0.0))).re;
    let r = &adj * &p2 - DMatrix::identity(3, 3) * det;
    Ok(Some(rel(r.amax(), adj.amax() * p2.amax() * 3.0)))
}

fn hamilton_fd(ctx: &Ctx, rng: &mut ChaCha8Rng, _: usize) -> Result<Option<f64>> {
    for _ in 0..ATTEMPTS {
        let (field, x) = ctx.field(rng);
        let Ok(bg) = field.eval(0.0, x) else { continue };
        let xi = random_xi(rng);
        let sheet = random_sheet(rng);
        let r = magnetosonic_roots(&bg, &xi);
        if sheet != Sheet::Alfven && r.radical_arg < 1e-6 * r.sum * r.sum.max(RADICAL_EPS) {
            continue;
        }
        let tau = random_tau(rng, &bg, &xi)?;
        let pt = PhasePoint::new(0.0, x, tau, xi.into());
        let analytic = hamilton_field(sheet, &pt, &bg)?;
        let y = pt.to_array();
        let mut grad = [0.0; 8];
        let mut usable = true;
        for k in 0..8 {
            let h = 1e-6 * y[k].abs().max(1.0);
            let mut up = y;
            let mut dn = y;
            up[k] += h;
            dn[k] -= h;
            let val = |z: &[f64; 8]| -> Option<f64> {
                let p = PhasePoint::from_array(z);
                let ev = field.eval(p.t, p.base()).ok()?;
                Some(sheet_factor(sheet, &p, &ev))
            };
            match (val(&up), val(&dn)) {
                (Some(a), Some(b)) => grad[k] = (a - b) / (up[k] - dn[k]),
                _ => usable = false,
            }
        }
        if !usable {
            continue;
        }
        let fd = [grad[4], grad[5], grad[6], grad[7], -grad[0], -grad[1], -grad[2], -grad[3]];
        let diff = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        return Ok(Some(rel(diff, norm)));
    }
    Ok(None)
}

struct CheckSpec {
    name: &'static str,
    tolerance: f64,
    bound: Bound,
    /// Samples drawn per requested sample.
    multiplier: usize,
    run: SampleFn,
}

const fn upper(name: &'static str, tolerance: f64, run: SampleFn) -> CheckSpec {
    CheckSpec {
        name,
        tolerance,
        bound: Bound::Upper,
        multiplier: 1,
        run,
    }
}

fn checks() -> Vec<CheckSpec> {
    vec![
        upper("det_factorization", 1e-9, det_factorization),
        upper("eigenvalues_a", 1e-8, eigenvalues_of_a),
        CheckSpec {
            multiplier: 4,
            ..upper("multiplicity_cases", 0.0, multiplicity_cases)
        },
        upper("symmetrizer", 1e-12, symmetrizer_check),
        upper("wave_speed_invariants", 1e-12, wave_speed_invariants),
        upper("p2_spectrum", 1e-8, p2_spectrum),
        upper("projectors", 1e-9, projectors),
        upper("parametrix_gamma1", 1e-8, parametrix_1),
        upper("parametrix_gamma2", 1e-8, parametrix_2),
        upper("parametrix_gamma3", 1e-8, parametrix_3),
        upper("subprincipal", 1e-10, subprincipal),
        upper("ptilde_ps_pi", 1e-6, ptilde_ps_pi),
        upper("bracket_lemma", 1e-5, bracket_lemma),
        upper("kernel_dims", 0.0, kernel_dims),
        upper("vanishing_order", 0.0, vanishing_orders),
        upper("kernel_mapping", 1e-8, kernel_mapping),
        CheckSpec {
            bound: Bound::Lower,
            ..upper("kernel_mapping_negative", 1e-3, kernel_mapping_negative)
        },
        upper("reduced_7x7", 1e-8, reduced_matrix),
        upper("adjugate_tau_zero", 1e-10, adjugate_tau_zero),
        upper("adjugate_limit", 1e-2, adjugate_limit),
        upper("adjugate_identity_p2", 1e-12, adjugate_identity_p2),
        upper("hamilton_fd", 1e-6, hamilton_fd),
    ]
}

/// Names of all checks, in report order.
pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|c| c.name).collect()
}

fn run_check(ctx: &Ctx, id: usize, spec: &CheckSpec, samples: usize) -> CheckResult {
    let n = samples * spec.multiplier;
    let values: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(ctx.seed, id as u64, i as u64);
            match (spec.run)(ctx, &mut rng, i) {
                Ok(Some(v)) if v.is_nan() => Some(f64::INFINITY),
                Ok(v) => v,
                Err(_) => Some(match spec.bound {
                    Bound::Upper => f64::INFINITY,
                    Bound::Lower => 0.0,
                }),
            }
        })
        .collect();
    let admissible: Vec<f64> = values.into_iter().flatten().collect();
    let statistic = match spec.bound {
        Bound::Upper => admissible.iter().copied().fold(0.0, f64::max),
        Bound::Lower => admissible.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let enough = admissible.len() >= n.min(100).max(1);
    let within = match spec.bound {
        Bound::Upper => statistic <= spec.tolerance,
        Bound::Lower => statistic >= spec.tolerance,
    };
    CheckResult {
        id,
        name: spec.name,
        samples: admissible.len(),
        statistic,
        tolerance: spec.tolerance,
        bound: spec.bound,
        pass: enough && within,
    }
}

/// Runs every check. Samples are drawn from per-check, per-index streams,
/// so the report does not depend on the thread count.
pub fn run_identity_suite(opts: &SuiteOptions) -> VerifyReport {
    let ctx = Ctx {
        seed: opts.seed,
        cross_sign: match opts.mutation {
            Some(Mutation::P2CrossSign) => -1.0,
            None => 1.0,
        },
        source: opts.background.clone(),
    };
    let run = || -> Vec<CheckResult> {
        checks()
            .iter()
            .enumerate()
            .filter(|(_, spec)| opts.only.is_empty() || opts.only.iter().any(|n| n == spec.name))
            .map(|(i, spec)| run_check(&ctx, i + 1, spec, opts.samples))
            .collect()
    };
    let results = match opts.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    let pass = results.iter().all(|c| c.pass);
    VerifyReport {
        seed: opts.seed,
        requested: opts.samples,
        checks: results,
        pass,
    }
}
