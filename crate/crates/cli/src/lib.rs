//! Command-line pipeline and HTTP service around the `wordpixel` core.

pub mod bundle;
pub mod cli;
pub mod error;
pub mod server;

pub use crate::bundle::{BundleOptions, SessionBundle};
pub use crate::cli::run;
pub use crate::error::CliError;
