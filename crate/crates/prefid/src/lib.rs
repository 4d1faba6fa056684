//! File formats, report rendering, table reproduction and the `prefid`
//! command line on top of `prefid-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod reproduce;

pub use error::{Error, Result};
