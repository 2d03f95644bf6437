//! Exact volumes, second moments and isotropic constants of random polytopes.
//!
//! The pipeline is: sample a coordinate matrix ([`distributions`]), build the
//! simplicial facet complex of its convex hull ([`hull`]), integrate exactly
//! over the cones from an interior apex ([`moments`], built on the closed-form
//! simplex moments in [`simplex_geometry`]), and whiten the covariance to get
//! the isotropic constant ([`isotropic`]). [`oracle`] provides independent
//! Monte Carlo estimators and [`experiments`] runs seeded batches over grids
//! of dimensions and point counts.

#![forbid(unsafe_code)]

pub mod bodies;
pub mod distributions;
pub mod experiments;
pub mod hull;
pub mod isotropic;
pub mod linalg;
pub mod moments;
pub mod oracle;
pub mod rng;
pub mod simplex_geometry;

pub use distributions::{sample_matrix, validate_star_conditions, ConditionReport, DistributionSpec, SampleMatrix};
pub use hull::{convex_hull, symmetric_hull, Facet, HullError, HullOptions, Polytope};
pub use isotropic::{functional_value, isotropic_constant, AffineMap, IsotropicResult};
pub use oracle::{rejection_mc, sample_uniform, MomentEstimate};
pub use experiments::{run_experiment, run_trial, ExperimentConfig, TrialRecord};
pub use moments::{MomentError, MomentSummary};
pub use simplex_geometry::{GeometryError, SimplexFacetMoment};
