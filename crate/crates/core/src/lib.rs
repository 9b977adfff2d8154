//! Numerical analysis of polynomial plurisubharmonic exhaustions of `C^n`
//! whose logarithm solves the homogeneous complex Monge-Ampère equation.
//!
//! The crate evaluates a potential `ρ` exactly (polynomials in `z` and `z̄`
//! with exact Wirtinger derivatives), classifies points by the rank of the
//! Levi matrix `ρ_{μν̄}`, computes the complex gradient `Z` and its real
//! fields, traces the leaves of the associated foliation, recovers
//! weighted-homogeneity weights, and runs the bidegree checks that
//! distinguish circled potentials.

pub mod burns;
pub mod catalog;
pub mod error;
pub mod foliation;
pub mod gradient;
pub mod homogeneity;
pub mod integrate;
pub mod levi;
pub mod linalg;
pub mod oracle;
pub mod potential;
pub mod registry;
pub mod sampling;

pub use burns::{burns_check, BurnsReport, Verdict};
pub use error::{Error, Result};
pub use foliation::{trace_leaf, LeafConfig, LeafTrace};
pub use gradient::{extended_gradient, complex_gradient, GradientField, GradientMethod, GradientSample};
pub use homogeneity::{find_weights, WeightOutcome, WeightVector};
pub use levi::{levi_data, ma_residual, rank_identity_residual, restricted_levi_eigen, LeviData, LeviJet, Stratum};
pub use potential::{CPoint, MultiExponent, PolyExpr, PolyPotential, C64};
pub use registry::{Registry, Strategy};
pub use sampling::{Sampler, ScanConfig};
