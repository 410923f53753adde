//! Machinery shared by the additive and quadratic stability pipelines.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::direct_method::{construct, exact_distance, Construction, EvaluableMap, ExactVec, LemmaParams, StopRule, STEP_SLACK};
use crate::error::Result;
use crate::fspace::FNormSpace;
use crate::ortho::{box_points, orthogonal_pairs, GroupPoint, Relation};
use crate::report::{DistanceSummary, ResidualSummary};

pub(crate) type Pair = (GroupPoint, GroupPoint);

/// Sampling parameters shared by both pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub domain_dim: usize,
    pub box_radius: u32,
    pub pair_limit: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            domain_dim: 2,
            box_radius: 3,
            pair_limit: 500,
        }
    }
}

/// Enumerated related pairs plus the diagonal pairs a derivation consumes.
/// Returns the pairs and whether every diagonal template was related.
pub(crate) fn derivation_pairs<R: Relation + ?Sized>(
    rel: &R,
    sampling: &Sampling,
    templates: &[fn(&GroupPoint) -> Pair],
) -> (Vec<Pair>, bool) {
    let mut pairs = orthogonal_pairs(rel, sampling.domain_dim, sampling.box_radius, sampling.pair_limit);
    let mut seen: BTreeSet<Pair> = pairs.iter().cloned().collect();
    let mut all_related = true;
    for x in box_points(sampling.domain_dim, sampling.box_radius) {
        for template in templates {
            let pair = template(&x);
            if rel.relates(&pair.0, &pair.1) {
                if seen.insert(pair.clone()) {
                    pairs.push(pair);
                }
            } else {
                all_related = false;
            }
        }
    }
    (pairs, all_related)
}

/// Maximum of `defect` over the pairs.
pub(crate) fn max_defect<F>(pairs: &[Pair], defect: F) -> Result<f64>
where
    F: Fn(&Pair) -> Result<f64> + Sync,
{
    let values: Vec<f64> = pairs.par_iter().map(&defect).collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

pub(crate) type Constructed = BTreeMap<GroupPoint, Construction>;

/// Runs the construction at every distinct point.
pub(crate) fn construct_all<F: EvaluableMap + ?Sized>(
    f: &F,
    points: BTreeSet<GroupPoint>,
    params: &LemmaParams,
    space: &FNormSpace,
    stop: &StopRule,
) -> Result<Constructed> {
    let points: Vec<GroupPoint> = points.into_iter().collect();
    let results: Vec<Construction> = points
        .par_iter()
        .map(|x| construct(f, x, params, space, stop))
        .collect::<Result<_>>()?;
    Ok(points.into_iter().zip(results).collect())
}

/// `‖f − g‖` on the image set is the final `h` value of each trace.
pub(crate) fn distance_summary(
    image_points: &[GroupPoint],
    constructed: &Constructed,
    params: &LemmaParams,
) -> Result<DistanceSummary> {
    let mut max_dist = 0.0;
    let mut argmax: Option<&GroupPoint> = None;
    for p in image_points {
        let d = constructed[p].trace.rows.last().map_or(0.0, |r| r.h_value);
        if argmax.is_none() || d > max_dist {
            max_dist = d;
            argmax = Some(p);
        }
    }
    let mut steps_checked = 0;
    let mut step_violations = 0;
    let mut h_violations = 0;
    let mut max_step: f64 = 0.0;
    let mut iterations = 0;
    for trace in constructed.values().map(|c| &c.trace) {
        steps_checked += trace.rows.len().saturating_sub(1);
        step_violations += trace.step_bound_violations(params.c, params.beta);
        h_violations += trace.h_difference_violations(params.c, params.beta);
        max_step = max_step.max(trace.max_step_norm());
        iterations = iterations.max(trace.rows.len().saturating_sub(1));
    }
    Ok(DistanceSummary {
        image_points: image_points.len(),
        max_fg_distance_on_image_set: max_dist,
        argmax_point: argmax.cloned(),
        max_step_norm: max_step,
        steps_checked,
        step_bound_violations: step_violations,
        h_difference_violations: h_violations,
        iterations,
        trace: argmax.map(|p| constructed[p].trace.clone()),
    })
}

/// Equation residual of the limit and of every traced iterate.
///
/// `points` lists the arguments of the equation for a pair; `residual`
/// combines their exact values (in the same order) into the residual vector,
/// which is rounded once before taking the norm.
#[allow(clippy::too_many_arguments)]
pub(crate) fn residual_summary<P, Q>(
    pairs: &[Pair],
    points: P,
    residual: Q,
    constructed: &Constructed,
    epsilon: f64,
    params: &LemmaParams,
    space: &FNormSpace,
    residual_tol: f64,
) -> Result<ResidualSummary>
where
    P: Fn(&Pair) -> Vec<GroupPoint>,
    Q: Fn(&[&ExactVec]) -> ExactVec,
{
    let mut max_residual: f64 = 0.0;
    let mut per_n_violations = 0;
    for pair in pairs {
        let args = points(pair);
        let entries: Vec<&Construction> = args.iter().map(|p| &constructed[p]).collect();
        let limits: Vec<&ExactVec> = entries.iter().map(|c| c.exact.last().expect("nonempty")).collect();
        max_residual = max_residual.max(norm(space, &residual(&limits))?);

        let steps = entries.iter().map(|c| c.exact.len()).min().unwrap_or(0);
        for n in 0..steps {
            let iterates: Vec<&ExactVec> = entries.iter().map(|c| &c.exact[n]).collect();
            let row = &entries[0].trace.rows[n];
            let bound = (row.a.abs_pow(params.beta) + row.b.abs_pow(params.beta)) * epsilon + STEP_SLACK;
            if norm(space, &residual(&iterates))? > bound {
                per_n_violations += 1;
            }
        }
    }
    Ok(ResidualSummary {
        pairs_checked: pairs.len(),
        max_equation_residual: max_residual,
        residual_tol,
        per_n_bound_violations: per_n_violations,
    })
}

/// `‖v‖` with `v` rounded once.
pub(crate) fn norm(space: &FNormSpace, v: &ExactVec) -> Result<f64> {
    let zero: ExactVec = vec![Default::default(); v.len()];
    exact_distance(space, v, &zero)
}
