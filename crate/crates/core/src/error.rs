use thiserror::Error;

use crate::geometry::Ray;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected one of {}", .expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-physical background: {0}")]
    NonPhysical(String),

    #[error("spatial frequency is zero")]
    ZeroFrequency,

    #[error("degenerate mode: {0}")]
    DegenerateMode(String),

    #[error("unclassified degeneracy: {0}")]
    UnclassifiedDegeneracy(String),

    #[error("radical of the magnetosonic speeds is degenerate (argument {argument:e})")]
    RadicalDegenerate { argument: f64 },

    #[error("start point is not on the characteristic sheet (relative residual {residual:e})")]
    NotOnSheet { residual: f64 },

    #[error("ray stopped at s = {s_reached}: {reason}")]
    RayStopped {
        reason: String,
        s_reached: f64,
        partial: Box<Ray>,
    },

    #[error("initial polarization is not in ker p2 (relative residual {residual:e})")]
    NotInKernel { residual: f64 },

    #[error("point is not on the characteristic variety (relative |det q| = {residual:e})")]
    NotOnCharacteristic { residual: f64 },

    #[error("operation requires a uniaxial or MHD-type Sigma_2 point, got {0}")]
    WrongRegime(String),
}
