//! Planning library for cooperative raster printing with a fleet of mobile
//! robots.
//!
//! The pipeline turns a binary raster image into per-robot print plans:
//!
//! 1. [`raster`] loads the image and extracts the printable pixel set.
//! 2. [`clustering`] partitions the printable pixels into balanced cells
//!    (constrained k-means: k-means++ seeding, an exact balanced assignment
//!    step solved as a min-cost flow, and centroid updates).
//! 3. [`assignment`] matches robots to cells by minimizing summed squared
//!    start-to-goal distances (Hungarian method) and builds synchronized
//!    straight-line approach trajectories with a clearance check.
//! 4. [`pathplan`] rasterizes each cell into a serpentine plan discretized
//!    with an integer line algorithm, and evaluates per-robot print times
//!    and the product-over-sum balance objective.
//! 5. [`simulate`] replays everything on a discrete clock, emitting progress
//!    frames and proximity events.
//!
//! [`pipeline`] wires the stages together behind a single config, and
//! [`suite`] generates the synthetic benchmark images.
//!
//! All stages are deterministic: a config plus a seed fully determines every
//! output byte.

pub mod assignment;
pub mod clustering;
pub mod error;
pub mod geom;
pub mod pathplan;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod rng;
pub mod simulate;
pub mod suite;

pub use error::{Error, Result};
pub use geom::Vec2;
