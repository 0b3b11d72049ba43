//! Uniformity tests on the high-dimensional unit sphere.
//!
//! Three classical statistics are computed from the pairwise inner products
//! of a sample on S^{p-1}:
//!
//! * the Rayleigh statistic, a U-statistic with the inner-product kernel;
//! * the Bingham statistic, a U-statistic with the squared inner-product kernel;
//! * the packing statistic, built on the largest squared inner product
//!   (the smallest pairwise angle).
//!
//! Their minimum upper-tail p-value is combined into a single test whose
//! threshold `1 - (1 - level)^{1/3}` relies on the three statistics being
//! asymptotically independent under uniformity.
//!
//! Alongside the tests the crate ships samplers for the uniform law, for
//! heavy-tailed projected ("alpha-spherical") laws and for the
//! Fisher-von Mises-Langevin family, plus a seeded parallel Monte Carlo
//! harness for size/power studies.
//!
//! ```
//! use sphereuni::sampling::{sample_uniform_sphere, SeedSpec};
//! use sphereuni::statistics::run_all_tests;
//!
//! let sample = sample_uniform_sphere(50, 40, SeedSpec::new(7, 0)).unwrap();
//! let outcomes = run_all_tests(&sample, 0.05).unwrap();
//! assert_eq!(outcomes.len(), 4);
//! ```

pub mod error;
pub mod experiments;
pub mod nulldist;
pub mod oracles;
pub mod sampling;
pub mod statistics;

mod linalg;

pub use error::{Error, Result};
