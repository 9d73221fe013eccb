pub mod bits;
pub mod checkpoint;
pub mod cli;
pub mod ed;
pub mod entropy;
pub mod error;
pub mod fitkit;
pub mod lanczos;
pub mod mbft;
pub mod modes;
pub mod quadratic;
pub mod quadrature;
pub mod rdm;
pub mod workflows;

pub use error::{Error, Result};
