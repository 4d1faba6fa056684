//! Identification of multicriteria preference models (OWA, weighted sum,
//! hybrid and Choquet integral) from notes or rankings, with D-optimal
//! sample selection.
#![no_std]

extern crate alloc;

pub mod dataset;
pub mod doptimal;
pub mod error;
pub mod evaluate;
pub mod identify;
pub mod linalg;
pub mod models;
pub mod simulate;

pub use error::{Error, Result};
