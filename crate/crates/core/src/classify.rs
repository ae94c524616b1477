//! Position of a phase point in the characteristic variety of `q` and the
//! propagation regime there.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::background::BackgroundEval;
use crate::error::{Error, Result};
use crate::spectra::{kernel_basis, smallest_singular_subspaces, wave_speeds, EPS_C, KERNEL_TOL};
use crate::symbols::{build_q, det_q, q_partial, Matrix8, MatrixSymbol, PhasePoint};

pub const EPS_SHEET: f64 = 1e-10;

/// Residuals `|q_j| / scale` of the seven first-order factors of `det q`:
/// `tau`, `tau -+ c_s|xi|`, `tau -+ (xi.H)/sqrt(rho)`, `tau -+ c_f|xi|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetSet {
    pub residuals: [f64; 7],
    pub members: [bool; 7],
}

impl SheetSet {
    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    /// Membership of `S_j`, `j` in `1..=7`.
    pub fn contains(&self, j: usize) -> bool {
        self.members[j - 1]
    }

    pub fn indices(&self) -> Vec<usize> {
        (1..=7).filter(|&j| self.contains(j)).collect()
    }
}

fn sheet_scale(pt: &PhasePoint, bg: &BackgroundEval) -> f64 {
    pt.tau.abs() + (bg.c2().sqrt() + bg.h2().sqrt()) * pt.xi.norm() + 1.0
}

pub fn sheet_membership(pt: &PhasePoint, bg: &BackgroundEval) -> Result<SheetSet> {
    let ws = wave_speeds(bg, &pt.xi)?;
    let n = pt.xi.norm();
    let scale = sheet_scale(pt, bg);
    let cs = ws.cs() * n;
    let cf = ws.cf() * n;
    let al = bg.h.dot(&pt.xi) / bg.rho.sqrt();
    let t = pt.tau;
    let q = [t, t - cs, t + cs, t - al, t + al, t - cf, t + cf];
    let residuals = q.map(|v| v.abs() / scale);
    Ok(SheetSet {
        residuals,
        members: residuals.map(|r| r <= EPS_SHEET),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Elliptic,
    RealPrincipalType,
    UniaxialSigma2,
    MhdTypeSigma2,
    Excluded,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Elliptic => "elliptic",
            Regime::RealPrincipalType => "real-principal-type",
            Regime::UniaxialSigma2 => "uniaxial-sigma2",
            Regime::MhdTypeSigma2 => "mhd-type-sigma2",
            Regime::Excluded => "excluded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witnesses {
    pub tau: f64,
    pub xi_dot_h: f64,
    pub xi_cross_h: f64,
    pub h2_minus_rho_c2: f64,
    pub sheets: SheetSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub witnesses: Witnesses,
    pub kernel_dim: usize,
    pub vanishing_order: Option<u32>,
}

pub fn classify_point(pt: &PhasePoint, bg: &BackgroundEval) -> Result<RegimeReport> {
    let ws = wave_speeds(bg, &pt.xi)?;
    let sheets = sheet_membership(pt, bg)?;
    let nx = pt.xi.norm();
    let nh = bg.h.norm();
    let s = pt.xi.dot(&bg.h);
    let cross = pt.xi.cross(&bg.h).norm();
    let h2 = nh * nh;
    let rc2 = bg.rho * ws.c2;
    let witnesses = Witnesses {
        tau: pt.tau,
        xi_dot_h: s,
        xi_cross_h: cross,
        h2_minus_rho_c2: h2 - rc2,
        sheets,
    };

    let scale = sheet_scale(pt, bg);
    let perpendicular = s.abs() <= EPS_C * nx * nh;
    let parallel = cross <= EPS_C * nx * nh;
    let crossing = (h2 - rc2).abs() <= EPS_C * (h2 + rc2);
    let tau_zero = sheets.contains(1);
    let tau_fast = sheets.contains(6) || sheets.contains(7);
    let alfven = nx * nh / bg.rho.sqrt();
    let tau_alfven = (pt.tau.abs() - alfven).abs() <= EPS_SHEET * scale;

    let regime = if nh == 0.0 {
        Regime::Excluded
    } else if sheets.count() == 0 {
        Regime::Elliptic
    } else if tau_zero && perpendicular && !tau_fast {
        Regime::MhdTypeSigma2
    } else if parallel && crossing {
        // triple coincidence of slow, Alfven and fast speeds
        Regime::Excluded
    } else if parallel && !tau_zero && tau_alfven {
        Regime::UniaxialSigma2
    } else if sheets.count() == 1 {
        Regime::RealPrincipalType
    } else {
        Regime::Excluded
    };

    let q = build_q(pt, bg)?;
    let kernel_dim = kernel_basis(&MatrixSymbol::from_real(&q, 1), KERNEL_TOL).len();
    let vanishing_order = if regime == Regime::Elliptic {
        None
    } else {
        vanishing_order(pt, bg, 8).ok().flatten()
    };
    Ok(RegimeReport {
        regime,
        witnesses,
        kernel_dim,
        vanishing_order,
    })
}

const VANISHING_RADII: [f64; 3] = [1e-4, 5e-5, 2.5e-5];
const VANISHING_DIRECTIONS: usize = 32;

/// Order of vanishing of `det q` at `pt`, from log-log slopes of
/// `|det q|` along random directions in `(tau, xi)`.
///
/// Radii are relative to `|(tau, xi)|`. Directions whose two successive
/// slopes differ by more than 0.1 are still dominated by higher-order terms
/// and are skipped. The estimate is the median clean slope; `None` when no
/// direction gives a clean fit or the median is not within 0.1 of an
/// integer in `0..=max_order`.
pub fn vanishing_order(pt: &PhasePoint, bg: &BackgroundEval, max_order: u32) -> Result<Option<u32>> {
    let ws = wave_speeds(bg, &pt.xi)?;
    let sigma = pt.tau.abs() + (ws.c2.sqrt() + ws.h2.sqrt()) * pt.xi.norm();
    let det0 = det_q(pt, bg)?;
    let residual = det0.abs() / sigma.powi(8);
    if residual > 1e-9 {
        return Err(Error::NotOnCharacteristic { residual });
    }
    let fiber = pt.fiber_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11_0de5);
    let mut slopes = Vec::with_capacity(VANISHING_DIRECTIONS);
    for _ in 0..VANISHING_DIRECTIONS {
        let mut d = [0.0f64; 4];
        for v in &mut d {
            *v = rng.sample(StandardNormal);
        }
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut logs = [0.0; 3];
        let mut usable = true;
        for (slot, r) in VANISHING_RADII.iter().enumerate() {
            let step = r * fiber / n;
            let mut p = *pt;
            p.tau += step * d[0];
            for k in 0..3 {
                p.xi[k] += step * d[k + 1];
            }
            let v = det_q(&p, bg)?.abs();
            if !(v > 0.0 && v.is_finite()) {
                usable = false;
                break;
            }
            logs[slot] = v.ln();
        }
        if !usable {
            continue;
        }
        let ln2 = std::f64::consts::LN_2;
        let s1 = (logs[0] - logs[1]) / ln2;
        let s2 = (logs[1] - logs[2]) / ln2;
        if (s1 - s2).abs() > 0.1 {
            continue;
        }
        let slope = (logs[0] - logs[2]) / (2.0 * ln2);
        slopes.push(slope);
    }
    slopes.sort_by(f64::total_cmp);
    let median = slopes.get(slopes.len() / 2).copied();
    Ok(median.and_then(|m| {
        let k = m.round();
        if (m - k).abs() > 0.1 || k < 0.0 || k > f64::from(max_order) {
            None
        } else {
            Some(k as u32)
        }
    }))
}

/// Phase-space vector in the coordinates `(t, x1, x2, x3, tau, xi1, xi2, xi3)`.
pub type PhaseVector = [f64; 8];

const T: usize = 0;
const TAU: usize = 4;

fn field(entries: &[(usize, f64)]) -> PhaseVector {
    let mut v = [0.0; 8];
    for &(k, c) in entries {
        v[k] += c;
    }
    v
}

fn x(i: usize) -> usize {
    1 + i
}

fn xi(i: usize) -> usize {
    5 + i
}

/// Spanning vector fields of `T Sigma` at `Sigma_2`, evaluated at `pt`.
pub fn tangent_generators(pt: &PhasePoint, bg: &BackgroundEval, regime: Regime) -> Result<Vec<PhaseVector>> {
    let z = pt.xi;
    let h = bg.h;
    let tau = pt.tau;
    let s = z.dot(&h);
    match regime {
        Regime::MhdTypeSigma2 => {
            let mut g = vec![
                field(&[(xi(0), z[0]), (xi(1), z[1]), (xi(2), z[2])]),
                field(&[(TAU, tau)]),
                field(&[(T, 1.0)]),
            ];
            g.extend((0..3).map(|i| field(&[(xi(i), tau)])));
            g.extend((0..3).map(|i| field(&[(x(i), tau)])));
            g.extend((0..3).map(|i| field(&[(x(i), s)])));
            g.push(field(&[(xi(0), s)]));
            g.push(field(&[(xi(2), s)]));
            Ok(g)
        }
        Regime::UniaxialSigma2 => {
            let n2 = z.norm_squared();
            let mut g = vec![
                field(&[(xi(0), z[1]), (xi(1), -z[0])]),
                field(&[(xi(0), z[2]), (xi(2), -z[0])]),
                field(&[(xi(2), z[1]), (xi(1), -z[2])]),
                field(&[(xi(0), h[1]), (xi(1), -h[0])]),
                field(&[(xi(2), h[0]), (xi(0), -h[2])]),
                field(&[(xi(2), h[1]), (xi(1), -h[2])]),
                field(&[(T, 1.0)]),
            ];
            g.extend((0..3).map(|i| field(&[(TAU, z[i] * tau), (xi(i), n2)])));
            g.extend((0..3).map(|i| field(&[(TAU, tau * h[i]), (xi(i), s)])));
            Ok(g)
        }
        other => Err(Error::WrongRegime(other.to_string())),
    }
}

fn expected_kernel_dim(regime: Regime) -> Result<usize> {
    match regime {
        Regime::MhdTypeSigma2 => Ok(6),
        Regime::UniaxialSigma2 => Ok(2),
        other => Err(Error::WrongRegime(other.to_string())),
    }
}

fn to_complex(m: &Matrix8) -> DMatrix<Complex64> {
    DMatrix::from_fn(8, 8, |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// Largest relative component of `(D_j q) nu` outside `Im q`, over the
/// generators `D_j` and kernel vectors `nu`.
///
/// `ker q` and the complement of `Im q` are the singular subspaces of the
/// `r` smallest singular values, `r` being the kernel dimension of the regime
/// (6 for MHD type, 2 for uniaxial). The denominator carries a floor of
/// `1e-4 |q|` so that generators whose coefficients vanish on `Sigma_2`
/// only up to rounding do not produce noise.
pub fn check_kernel_mapping(pt: &PhasePoint, bg: &BackgroundEval, regime: Regime) -> Result<f64> {
    let gens = tangent_generators(pt, bg, regime)?;
    let r = expected_kernel_dim(regime)?;
    let q = build_q(pt, bg)?;
    let (uk, vk) = smallest_singular_subspaces(&to_complex(&q), r);
    let floor = 1e-4 * q.norm();
    let partials: Vec<Matrix8> = (0..8).map(|k| q_partial(pt, bg, k)).collect();
    let mut worst = 0.0f64;
    for g in &gens {
        let mut dq = Matrix8::zeros();
        for (k, c) in g.iter().enumerate() {
            if *c != 0.0 {
                dq += partials[k] * *c;
            }
        }
        let proj = uk.adjoint() * to_complex(&dq) * &vk;
        let num = proj.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        worst = worst.max(num / (dq.norm() + floor));
    }
    Ok(worst)
}
