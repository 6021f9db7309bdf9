//! Finite-rank spectral laboratory for the quadratic Szegő equation
//! `i ∂_t u = 2J Π(|u|²) + J̄ u²` on the Hardy space of the circle.

pub mod cli;
pub mod conservation;
pub mod conv;
pub mod corpus;
pub mod error;
pub mod flow;
pub mod hankel;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod poisson;
pub mod poly;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::{FourierSymbol, RationalSymbol};
pub use num_complex::Complex64 as C64;

/// Worker count for embarrassingly parallel loops, capped by `SZEGO_LAB_THREADS`.
pub(crate) fn worker_threads() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    std::env::var("SZEGO_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .map_or(avail, |n| n.min(avail))
}
