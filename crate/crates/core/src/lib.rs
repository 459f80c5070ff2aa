pub mod asymptotics;
pub mod density;
pub mod depth;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linprog;
pub mod quantile;
pub mod regression;
pub mod solver;
pub mod sweep;
pub mod symmetry;

pub use error::{Error, Result};
