//! Seeded random backgrounds, frequencies and constructed phase points.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::background::{BackgroundEval, BackgroundField};
use crate::error::Result;
use crate::geometry::project_to_sheet;
use crate::symbols::{PhasePoint, Sheet};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for sample `index` of check `check`.
pub fn sample_rng(seed: u64, check: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(check.wrapping_mul(0x1000_0000_01b3) ^ splitmix64(index)));
    ChaCha8Rng::seed_from_u64(key)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Spatially constant background: `rho, p` log-uniform on `[0.1, 10]`,
/// `gamma` uniform on `[1.1, 2]`, `H` uniform on `[-3, 3]^3`.
pub fn random_uniform_background<R: Rng>(rng: &mut R) -> BackgroundEval {
    let rho = log_uniform(rng, 0.1, 10.0);
    let p = log_uniform(rng, 0.1, 10.0);
    let gamma = rng.random_range(1.1..2.0);
    let h = Vector3::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    );
    BackgroundEval::uniform(rho, p, gamma, h).expect("sampled background is physical")
}

/// Unit direction times a log-uniform length on `[0.1, 10]`.
pub fn random_xi<R: Rng>(rng: &mut R) -> Vector3<f64> {
    unit_vector(rng) * log_uniform(rng, 0.1, 10.0)
}

pub fn random_base_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    ]
}

fn coef<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn phase_arg<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}*x1 + {}*x2 + {}*x3 + {}",
        coef(rng, -1.5, 1.5),
        coef(rng, -1.5, 1.5),
        coef(rng, -1.5, 1.5),
        coef(rng, -1.0, 1.0)
    )
}

/// Smooth non-constant background with order-one gradients on `[-1, 1]^3`.
/// Density and pressure stay within 30% of their base values, so they are
/// positive everywhere.
pub fn random_field<R: Rng>(rng: &mut R) -> BackgroundField {
    let rho0 = log_uniform(rng, 0.3, 3.0);
    let p0 = log_uniform(rng, 0.3, 3.0);
    let gamma = rng.random_range(1.1..2.0);
    let rho = format!("{rho0}*(1 + {}*tanh({}))", coef(rng, -0.3, 0.3), phase_arg(rng));
    let p = format!("{p0}*(1 + {}*sin({}))", coef(rng, -0.3, 0.3), phase_arg(rng));
    let h: Vec<String> = (0..3)
        .map(|_| format!("{} + {}*cos({})", coef(rng, -2.0, 2.0), coef(rng, -0.5, 0.5), phase_arg(rng)))
        .collect();
    BackgroundField::parse(&rho, &p, [&h[0], &h[1], &h[2]], gamma).expect("generated expressions parse")
}

/// Relative margins used to keep samples away from the excluded sets.
pub const MARGIN: f64 = 1e-3;

/// `xi . H`, `xi x H` and `|H|^2 - rho c^2` all at least `MARGIN` away from
/// zero, relative to their natural scales.
pub fn generic_hypotheses(bg: &BackgroundEval, xi: &Vector3<f64>) -> bool {
    generic_hypotheses_with(bg, xi, MARGIN)
}

/// [`generic_hypotheses`] with a caller-chosen relative margin.
pub fn generic_hypotheses_with(bg: &BackgroundEval, xi: &Vector3<f64>, margin: f64) -> bool {
    let nx = xi.norm();
    let nh = bg.h.norm();
    let h2 = nh * nh;
    let rc2 = bg.rho * bg.c2();
    xi.dot(&bg.h).abs() >= margin * nx * nh
        && xi.cross(&bg.h).norm() >= margin * nx * nh
        && (h2 - rc2).abs() >= margin * (h2 + rc2)
}

pub fn random_sheet<R: Rng>(rng: &mut R) -> Sheet {
    Sheet::ALL[rng.random_range(0..3)]
}

/// A point of `{q_sheet = 0}` over the given background, with random sign
/// of `tau`.
pub fn point_on_sheet<R: Rng>(rng: &mut R, bg: &BackgroundEval, x: [f64; 3], xi: Vector3<f64>, sheet: Sheet) -> Result<PhasePoint> {
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let pt = PhasePoint::new(0.0, x, sign, xi.into());
    project_to_sheet(&pt, sheet, bg)
}

/// `tau = 0` and `xi` perpendicular to `H`.
pub fn mhd_sigma2_point<R: Rng>(rng: &mut R, bg: &BackgroundEval) -> PhasePoint {
    let hh = bg.h.normalize();
    let mut xi = random_xi(rng);
    // second pass removes the rounding left by the first
    xi -= hh * xi.dot(&hh);
    xi -= hh * xi.dot(&hh);
    PhasePoint::new(0.0, [0.0; 3], 0.0, xi.into())
}

/// `xi` parallel to `H` and `tau = +-|xi||H| / sqrt(rho)`.
pub fn uniaxial_sigma2_point<R: Rng>(rng: &mut R, bg: &BackgroundEval) -> PhasePoint {
    let len = log_uniform(rng, 0.1, 10.0);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let xi = bg.h * (sign * len / bg.h.norm());
    let tau_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let tau = tau_sign * xi.norm() * bg.h.norm() / bg.rho.sqrt();
    PhasePoint::new(0.0, [0.0; 3], tau, xi.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = sample_rng(42, 3, 7).random();
        let b: u64 = sample_rng(42, 3, 7).random();
        let c: u64 = sample_rng(42, 3, 8).random();
        let d: u64 = sample_rng(42, 4, 7).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn random_fields_are_physical() {
        let mut rng = sample_rng(1, 0, 0);
        for _ in 0..50 {
            let f = random_field(&mut rng);
            for _ in 0..10 {
                let x = random_base_point(&mut rng);
                let ev = f.eval(0.0, x).unwrap();
                assert!(ev.rho > 0.0 && ev.p > 0.0);
            }
        }
    }
}
