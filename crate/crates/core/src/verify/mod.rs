//! Independent oracles and the randomized identity suite.

pub mod oracle;
pub mod sampling;
mod suite;

pub use suite::{
    check_names, run_identity_suite, BackgroundSource, Bound, CheckResult, Mutation, SuiteOptions, VerifyReport,
};
