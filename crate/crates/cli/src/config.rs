//! JSON scenario files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mhdpol_core::background::{parse_expr, BackgroundField, Expr};
use mhdpol_core::symbols::{PhasePoint, Sheet};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A background component: a number or an expression in `t, x1, x2, x3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Value(f64),
    Expr(String),
}

impl FieldSpec {
    fn to_expr(&self) -> Result<Expr, CliError> {
        match self {
            FieldSpec::Value(v) => Ok(Expr::constant(*v)),
            FieldSpec::Expr(s) => Ok(parse_expr(s)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub rho: FieldSpec,
    pub p: FieldSpec,
    pub h: [FieldSpec; 3],
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub x: [f64; 3],
    pub tau: f64,
    pub xi: [f64; 3],
}

impl PointSpec {
    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint::new(self.t, self.x, self.tau, self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RaySpec {
    pub sheet: usize,
    pub span: f64,
    pub tol: f64,
    pub samples: usize,
    /// Solve for `tau` so the start lies on the sheet.
    pub project: bool,
}

impl Default for RaySpec {
    fn default() -> Self {
        Self {
            sheet: 1,
            span: 1.0,
            tol: 1e-9,
            samples: 64,
            project: true,
        }
    }
}

/// Initial polarization: `"auto"`, a real 3-vector, or three `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationSpec {
    Real([f64; 3]),
    Complex([[f64; 2]; 3]),
    Named(String),
}

impl Default for PolarizationSpec {
    fn default() -> Self {
        PolarizationSpec::Named("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportSpec {
    pub polarization: PolarizationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FriedrichsSpec {
    pub n_theta: usize,
    /// Second vector of the plane; defaults to the axis least aligned with `H`.
    pub normal: Option<[f64; 3]>,
    pub svg: Option<PathBuf>,
}

impl Default for FriedrichsSpec {
    fn default() -> Self {
        Self {
            n_theta: 360,
            normal: None,
            svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub background: BackgroundSpec,
    #[serde(default)]
    pub point: Option<PointSpec>,
    #[serde(default)]
    pub ray: RaySpec,
    #[serde(default)]
    pub transport: TransportSpec,
    #[serde(default)]
    pub friedrichs: FriedrichsSpec,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text)?;
        if !(1..=3).contains(&s.ray.sheet) {
            return Err(CliError::Config(format!("ray.sheet must be 1, 2 or 3, got {}", s.ray.sheet)));
        }
        if let PolarizationSpec::Named(name) = &s.transport.polarization {
            if name != "auto" {
                return Err(CliError::Config(format!("unknown polarization `{name}`")));
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_json(&text)
    }

    pub fn field(&self) -> Result<BackgroundField, CliError> {
        let b = &self.background;
        Ok(BackgroundField::new(
            b.rho.to_expr()?,
            b.p.to_expr()?,
            [b.h[0].to_expr()?, b.h[1].to_expr()?, b.h[2].to_expr()?],
            b.gamma,
        )?)
    }

    pub fn sheet(&self) -> Sheet {
        Sheet::from_index(self.ray.sheet).expect("validated on load")
    }

    /// SHA-256 of the canonical serialization, so formatting does not matter.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&canonical).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
