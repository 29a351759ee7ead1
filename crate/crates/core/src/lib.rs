pub mod charp;
pub mod cli;
pub mod error;
pub mod exactnum;
pub mod foliation;
pub mod gauss;
pub mod ode;
pub mod regsing;
pub mod selftest;
pub mod series;
pub mod size;

pub use error::{Error, Result};
