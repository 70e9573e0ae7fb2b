pub mod cli;
pub mod distort;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod milp;
pub mod model;
pub mod problems;
pub mod risk;
pub mod rowgen;
pub mod unrestricted;
pub mod worst_case;

pub use error::{Error, Result};
