pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod svg;

pub use error::{Error, Result};
