//! Direct-method stability verification for orthogonally parameterized
//! additive and quadratic functional equations with values in β-homogeneous
//! F-normed spaces.
//!
//! Maps are evaluated on integer lattices `Z^d`. Coefficients are exact
//! rationals; codomain values are `f64` vectors.

pub mod additive;
pub mod axioms;
pub mod direct_method;
pub mod error;
pub mod experiment;
pub mod fspace;
pub mod model;
pub mod ortho;
pub mod pipeline;
pub mod quadratic;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ProblemKind};
pub use fspace::{CodomainVec, FNormSpace, NormKind};
pub use ortho::{GroupPoint, OrthoRelation, Relation};
pub use rational::Rational;
pub use report::StabilityReport;
