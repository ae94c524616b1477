//! Hamilton fields, bicharacteristics and polarization transport.

pub mod bracket;
pub mod hamilton;
pub mod ode;
pub mod ray;
pub mod transport;

pub use bracket::{poisson_bracket_matrix, poisson_bracket_scalar};
pub use hamilton::{hamilton_field, project_to_sheet, sheet_factor, sheet_residual};
pub use ray::{trace_ray, trace_ray_with, Ray, RayOptions, RaySample};
pub use transport::{
    auto_polarization, dencker_transport, direction_distance, normalized_direction, simplified_transport,
    CVector3, PolarizationFrame, PolarizationSample,
};
