//! Apery-type log-power series `f_{l,k}(z, nu)`, the matrices of their
//! difference-equation system, and exact and numeric verification of that system.

pub mod error;
pub mod exact;

pub use error::{Error, Result};
pub mod series;
pub mod r_function;
pub mod family;
pub mod matrix;
pub mod verify;
