//! Experiment configuration and the single entry point that runs it.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::additive::{self, AdditiveProblem, DEFAULT_RESIDUAL_TOL};
use crate::direct_method::StopRule;
use crate::error::{Error, Result};
use crate::fspace::{FNormSpace, NormKind};
use crate::model::MapModel;
use crate::ortho::OrthoRelation;
use crate::pipeline::Sampling;
use crate::quadratic::{self, QuadraticProblem};
use crate::rational::Rational;
use crate::report::{ConditionSummary, PassFlags, StabilityReport, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Additive,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    #[serde(default)]
    pub kind: NormKind,
    /// Codomain dimension; defaults to that of the map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

fn default_relation() -> OrthoRelation {
    OrthoRelation::DiagonalAugmented
}

fn default_box_radius() -> u32 {
    Sampling::default().box_radius
}

fn default_pair_limit() -> usize {
    Sampling::default().pair_limit
}

fn default_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<i64>,
    pub beta: f64,
    #[serde(default = "default_relation")]
    pub relation: OrthoRelation,
    #[serde(default)]
    pub space: SpaceConfig,
    pub map: MapModel,
    /// Domain dimension; defaults to the map's, or 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_dim: Option<usize>,
    #[serde(default = "default_box_radius")]
    pub box_radius: u32,
    #[serde(default = "default_pair_limit")]
    pub pair_limit: usize,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

impl ExperimentConfig {
    pub fn additive(m: Rational, beta: f64, map: MapModel) -> Self {
        ExperimentConfig {
            problem: ProblemKind::Additive,
            m: Some(m),
            lambda: None,
            ..Self::base(ProblemKind::Additive, beta, map)
        }
    }

    pub fn quadratic(lambda: i64, beta: f64, map: MapModel) -> Self {
        ExperimentConfig {
            lambda: Some(lambda),
            ..Self::base(ProblemKind::Quadratic, beta, map)
        }
    }

    fn base(problem: ProblemKind, beta: f64, map: MapModel) -> Self {
        ExperimentConfig {
            problem,
            m: None,
            lambda: None,
            beta,
            relation: default_relation(),
            space: SpaceConfig::default(),
            map,
            domain_dim: None,
            box_radius: default_box_radius(),
            pair_limit: default_pair_limit(),
            stop: StopRule::default(),
            residual_tol: default_residual_tol(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn sampling(&self) -> Result<Sampling> {
        let domain_dim = match (self.domain_dim, self.map.domain_dim()) {
            (Some(d), Some(m)) if d != m => {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: d,
                })
            }
            (Some(d), _) | (None, Some(d)) => d,
            (None, None) => Sampling::default().domain_dim,
        };
        if domain_dim == 0 {
            return Err(Error::InvalidArgument("domain dimension must be positive".into()));
        }
        if self.pair_limit == 0 {
            return Err(Error::InvalidArgument("pair_limit must be at least 1".into()));
        }
        Ok(Sampling {
            domain_dim,
            box_radius: self.box_radius,
            pair_limit: self.pair_limit,
        })
    }

    pub fn space(&self) -> Result<FNormSpace> {
        let codomain = self.map.codomain_dim();
        if let Some(d) = self.space.dim {
            if d != codomain {
                return Err(Error::DimensionMismatch {
                    expected: codomain,
                    actual: d,
                });
            }
        }
        FNormSpace::new(self.space.kind, self.beta, codomain)
    }

    fn validate(&self) -> Result<()> {
        match self.problem {
            ProblemKind::Additive if self.m.is_none() => {
                Err(Error::InvalidArgument("additive problem needs M".into()))
            }
            ProblemKind::Additive if self.lambda.is_some() => {
                Err(Error::InvalidArgument("additive problem takes M, not lambda".into()))
            }
            ProblemKind::Quadratic if self.lambda.is_none() => {
                Err(Error::InvalidArgument("quadratic problem needs lambda".into()))
            }
            ProblemKind::Quadratic if self.m.is_some() => {
                Err(Error::InvalidArgument("quadratic problem takes lambda, not M".into()))
            }
            _ => Ok(()),
        }?;
        if !(self.stop.tol > 0.0 && self.stop.tol.is_finite()) || self.stop.n_max == 0 {
            return Err(Error::InvalidArgument("stop needs tol > 0 and n_max >= 1".into()));
        }
        if self.residual_tol.is_nan() || self.residual_tol < 0.0 {
            return Err(Error::InvalidArgument("residual_tol must be nonnegative".into()));
        }
        self.map.validate()
    }

    fn conditions(&self) -> Option<ConditionSummary> {
        match self.problem {
            ProblemKind::Additive => additive::conditions(self.m.as_ref()?, self.beta).ok(),
            ProblemKind::Quadratic => quadratic::conditions(self.lambda?, self.beta).ok(),
        }
    }
}

/// Runs the configured pipeline. Failures are recorded in `pass.failure`
/// rather than returned, so a report is always produced.
pub fn run_experiment(config: &ExperimentConfig) -> StabilityReport {
    let start = Instant::now();
    let outcome = (|| {
        config.validate()?;
        let sampling = config.sampling()?;
        let space = config.space()?;
        match config.problem {
            ProblemKind::Additive => additive::solve_additive(
                &AdditiveProblem {
                    m: config.m.clone().expect("validated"),
                    beta: config.beta,
                    relation: config.relation,
                    f: config.map.clone(),
                    space,
                },
                &sampling,
                &config.stop,
                config.residual_tol,
            ),
            ProblemKind::Quadratic => quadratic::solve_quadratic(
                &QuadraticProblem {
                    lambda: config.lambda.expect("validated"),
                    beta: config.beta,
                    relation: config.relation,
                    f: config.map.clone(),
                    space,
                },
                &sampling,
                &config.stop,
                config.residual_tol,
            ),
        }
    })();
    let timing = |start: Instant| Timing {
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    match outcome {
        Ok(out) => StabilityReport {
            config: config.clone(),
            defect: Some(out.defect),
            conditions: Some(out.conditions),
            series: Some(out.series),
            bound: Some(out.bound),
            distances: Some(out.distances),
            residuals: Some(out.residuals),
            pass: out.pass,
            timing: timing(start),
        },
        Err(err) => StabilityReport {
            config: config.clone(),
            defect: None,
            conditions: config.conditions(),
            series: None,
            bound: None,
            distances: None,
            residuals: None,
            pass: PassFlags::failed(&err),
            timing: timing(start),
        },
    }
}
