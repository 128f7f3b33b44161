//! Early-exercise boundaries and prices of American floating-strike Asian options.

pub mod boundary;
pub mod cli;
pub mod config;
pub mod error;
pub mod expiry;
pub mod front_fixing;
pub mod integral;
pub mod lognormal;
pub mod mc;
pub mod model;
pub mod normal;
pub mod output;
pub mod psor;
pub mod quadrature;
mod roots;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{AveragingSpec, GridSpec, ModelParams, OptionKind};
