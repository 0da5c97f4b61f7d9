pub mod correspondence;
pub mod curves;
pub mod error;
pub mod expansion;
pub mod identities;
pub mod linalg;
pub mod periods;
pub mod quadrature;
pub mod report;
pub mod series;
pub mod suite;
pub mod theta;

pub use error::{Error, Result};
