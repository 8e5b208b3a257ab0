//! Moran's I on discrete-valued lattices and graphs, the closed-form normal
//! approximation of its permutation distribution, and the spatial
//! self-information `J = -ln φ(Ī)` built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: binary spatial weights (torus and bounded grids, perturbations).
//! * [`scheme`]: samples, value schemes and fixed-width bucketization.
//! * [`moran`]: Moran's I, the unscaled statistic `Ī` and pair-set counts.
//! * [`analytic`]: approximate mean/variance of `Ī`, corrections, `J`.
//! * [`montecarlo`]: permutation sampler, exhaustive enumerator and
//!   distribution-comparison metrics.
//! * [`experiments`]: the synthetic robustness sweeps.
//! * [`raster`]: tiling and per-patch analysis of slope-style rasters.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod montecarlo;
pub mod moran;
pub mod raster;
pub mod rng;
pub mod scheme;
pub mod sum;

pub use analytic::{AnalyticDist, AnalyticOptions, PairMoments, TailSide};
pub use error::{Error, Result};
pub use graph::{Contiguity, WeightGraph};
pub use montecarlo::{EmpiricalDist, ExactDist};
pub use moran::PairCounts;
pub use scheme::{Sample, ValueScheme};
