//! A computational laboratory for homeomorphisms of one-dimensional continua
//! and the maps they induce on hyperspaces of compact subsets.
//!
//! The building blocks:
//!
//! * [`geometry`] — finite metric graphs (geodesic or planar-embedded), points,
//!   subset masks, dense nets, connected components.
//! * [`spaces`] — concrete stages (interval, circle, star, truncated fan) and a
//!   piecewise-linear homeomorphism representation with exact inverses.
//! * [`hyperspace`] — Hausdorff distance on sampled compact sets, induced
//!   set-image maps, random hyperspace nets.
//! * [`entropy`] — trajectory bundles, separation matrices, exact/greedy
//!   maximal separated subsets, entropy profiles and explicit witness families.
//! * [`dynamics`] — limit-set and non-wandering estimation, wandering
//!   components, pair classification, periodic-subcontinuum condition checks.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases live at the crate root.

pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod hyperspace;
pub mod real;
pub mod spaces;

pub use error::CoreError;
pub use real::Real;

/// Crate version, stamped into result provenance headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Result<T> = std::result::Result<T, CoreError>;

// Concrete double-precision aliases. The CLI and most experiments use these.
pub type Space64 = geometry::Space<f64>;
pub type GraphPoint64 = geometry::GraphPoint<f64>;
pub type SubsetMask64 = geometry::SubsetMask<f64>;
pub type Homeo64 = spaces::Homeo<f64>;
pub type FanSpace64 = spaces::FanSpace<f64>;
pub type CompactSet64 = hyperspace::CompactSet<f64>;
pub type HyperNet64 = hyperspace::HyperNet<f64>;
pub type TrajectoryBundle64 = entropy::TrajectoryBundle<f64>;
pub type EntropyProfile64 = entropy::EntropyProfile<f64>;

// Single-precision aliases, for callers that trade accuracy for footprint.
pub type Space32 = geometry::Space<f32>;
pub type GraphPoint32 = geometry::GraphPoint<f32>;
pub type CompactSet32 = hyperspace::CompactSet<f32>;
