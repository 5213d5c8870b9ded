//! Random tessellations and the tree estimators built on them.
//!
//! The crate covers the STIT process on polytope windows for discrete
//! directional distributions, the axis-aligned weighted Mondrian special case,
//! oblique Mondrian processes obtained from a feature matrix, and randomized
//! regression trees and forests that average labels over tessellation cells.
//! It is `no_std` with `alloc`; file formats and the command-line harness live
//! in the companion `stit-lab` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod geom;
pub mod linalg;
pub mod mondrian;
pub mod oblique;
pub mod regress;
pub mod rng;
pub mod stats;
pub mod tessellate;

pub use error::{Error, Result};
pub use geom::{AxisBox, HPolytope, Halfspace, Hyperplane, Zonotope};
pub use mondrian::WeightedMondrianSpec;
pub use oblique::{BoundInputs, FeatureMatrix, SubspaceSpec};
pub use regress::{Dataset, ForestModel, SamplerSpec, TreeEstimator};
pub use rng::{StreamKey, StreamRng};
pub use tessellate::{DirectionalDistribution, DiscreteDirectionalDistribution, TessellationTree};
