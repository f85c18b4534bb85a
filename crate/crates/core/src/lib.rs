pub mod cli;
pub mod coupling;
pub mod error;
pub mod fitting;
pub mod io;
pub mod lindblad;
pub mod minimize;
pub mod model;
pub mod spline;
pub mod transmon;

pub use error::{Error, Result};
