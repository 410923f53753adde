//! Stability of the orthogonally parameterized Jensen-additive equation
//! `f(x + y) = M [f(x) + f(y)]` for `x ⊥ y`.
//!
//! The defect is reduced to the one-step hypothesis of the direct method with
//! `α = (4 − M)/(8M)`, `γ = 1/8`, `ω = 2` (so `u = 1/(2M)`, `v = (2 − M)/(4M)`)
//! and `C = [1/|8M|^β + 1/|8M − 16M²|^β + 1] ε`.

use std::collections::BTreeSet;

use crate::direct_method::{
    check_convergence, coeffs_recurrence, series_sum, stability_bound, ConvergenceCheck, EvaluableMap, ExactVec,
    LemmaParams, StopRule,
};
use crate::error::{Error, Result};
use crate::fspace::FNormSpace;
use crate::ortho::{box_points, GroupPoint, Relation};
use crate::pipeline::{self, Pair, Sampling};
use crate::rational::Rational;
use crate::report::{
    BoundSummary, CoefficientComparison, ConditionSummary, DefectSummary, PassFlags, StabilityOutcome,
    StatedCondition,
};

/// Default tolerance on the equation residual of the constructed map.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

pub struct AdditiveProblem<F, R> {
    pub m: Rational,
    pub beta: f64,
    pub relation: R,
    pub f: F,
    pub space: FNormSpace,
}

/// Rejects `M = 0` and `M = 1/2`.
pub fn validate_m(m: &Rational) -> Result<()> {
    if m.is_zero() {
        return Err(Error::InvalidM {
            value: m.to_string(),
            reason: "M must be nonzero",
        });
    }
    if *m == Rational::new(1, 2) {
        return Err(Error::InvalidM {
            value: m.to_string(),
            reason: "M = 1/2 is excluded",
        });
    }
    Ok(())
}

fn validate_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")))
    }
}

/// `α = (4 − M)/(8M)`, `γ = 1/8`.
pub fn lemma_coefficients(m: &Rational) -> (Rational, Rational) {
    let alpha = Rational((Rational::from_integer(4).0 - &m.0) / (Rational::from_integer(8).0 * &m.0));
    (alpha, Rational::new(1, 8))
}

/// `|(M − 4)/(8M)|^β + (1/8)^β < 1`, as stated with the theorem.
pub fn stated_condition(m: &Rational, beta: f64) -> StatedCondition {
    let first = Rational((&m.0 - Rational::from_integer(4).0) / (Rational::from_integer(8).0 * &m.0));
    let value = first.abs_pow(beta) + Rational::new(1, 8).abs_pow(beta);
    StatedCondition {
        expression: "|(M-4)/(8M)|^beta + (1/8)^beta < 1".into(),
        value,
        holds: value < 1.0,
    }
}

/// Convergence diagnostics for `u = 1/(2M)`, `v = (2 − M)/(4M)`.
pub fn lemma_condition(m: &Rational, beta: f64) -> Result<ConvergenceCheck> {
    validate_m(m)?;
    let (alpha, gamma) = lemma_coefficients(m);
    Ok(check_convergence(&alpha, &gamma, beta))
}

pub fn conditions(m: &Rational, beta: f64) -> Result<ConditionSummary> {
    let lemma = lemma_condition(m, beta)?;
    let (alpha, gamma) = lemma_coefficients(m);
    Ok(ConditionSummary {
        stated: stated_condition(m, beta),
        lemma,
        alpha,
        gamma,
        omega: 2,
    })
}

/// `ε / |1 − 2M|^β`.
pub fn f0_bound(epsilon: f64, m: &Rational, beta: f64) -> Result<f64> {
    if *m == Rational::new(1, 2) {
        return Err(Error::InvalidM {
            value: m.to_string(),
            reason: "M = 1/2 makes |1 - 2M| vanish",
        });
    }
    let denom = Rational(Rational::one().0 - Rational::from_integer(2).0 * &m.0);
    Ok(epsilon / denom.abs_pow(beta))
}

/// `(|1/(1 − 2M)|^β + 1) / |M|^β · ε`, bounding `‖f(2x) − f(−2x)‖`.
pub fn even_diff_bound(epsilon: f64, m: &Rational, beta: f64) -> Result<f64> {
    validate_m(m)?;
    let inv = Rational(Rational::one().0 - Rational::from_integer(2).0 * &m.0).recip();
    Ok((inv.abs_pow(beta) + 1.0) / m.abs_pow(beta) * epsilon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub params: LemmaParams,
    pub u: Rational,
    pub v: Rational,
    /// `C / ε`.
    pub defect_factor: f64,
    /// `C / ε` exactly, when `β = 1`.
    pub defect_factor_exact: Option<Rational>,
}

/// `1/|8M|^β + 1/|8M − 16M²|^β + 1`.
fn defect_factor(m: &Rational, beta: f64) -> (f64, Option<Rational>) {
    let eight_m = Rational(Rational::from_integer(8).0 * &m.0);
    let quad = Rational(&eight_m.0 - Rational::from_integer(16).0 * &m.0 * &m.0);
    let approx = 1.0 / eight_m.abs_pow(beta) + 1.0 / quad.abs_pow(beta) + 1.0;
    let exact = (beta == 1.0).then(|| {
        Rational(eight_m.abs().recip().0 + quad.abs().recip().0 + Rational::one().0)
    });
    (exact.as_ref().map_or(approx, Rational::to_f64), exact)
}

pub fn reduce_additive(m: &Rational, beta: f64, epsilon: f64) -> Result<Reduction> {
    validate_m(m)?;
    validate_beta(beta)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    let (alpha, gamma) = lemma_coefficients(m);
    let conv = check_convergence(&alpha, &gamma, beta);
    if !conv.series_converges {
        return Err(Error::ConditionViolation {
            what: format!(
                "reduced coefficients u = 1/(2M) = {}, v = (2-M)/(4M) = {} do not both lie in (-1, 1)",
                conv.u, conv.v
            ),
            u_term: conv.u_term,
            v_term: conv.v_term,
        });
    }
    let (factor, exact) = defect_factor(m, beta);
    Ok(Reduction {
        params: LemmaParams {
            alpha,
            gamma,
            omega: 2,
            beta,
            c: factor * epsilon,
        },
        u: conv.u,
        v: conv.v,
        defect_factor: factor,
        defect_factor_exact: exact,
    })
}

fn diagonal_templates() -> [fn(&GroupPoint) -> Pair; 3] {
    [
        |x| (x.clone(), x.clone()),
        |x| (x.clone(), -x),
        |x| (GroupPoint::zero(x.dim()), GroupPoint::zero(x.dim())),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectMeasurement {
    pub epsilon: f64,
    pub pairs: Vec<(GroupPoint, GroupPoint)>,
    pub diagonal_derivation: bool,
}

fn residual_args((x, y): &Pair) -> Vec<GroupPoint> {
    vec![x + y, x.clone(), y.clone()]
}

/// `g0 − M (g1 + g2)`.
fn equation_residual(m: &Rational, g: &[&ExactVec]) -> ExactVec {
    g[0].iter()
        .zip(g[1].iter().zip(g[2]))
        .map(|(s, (a, b))| s - &m.0 * (a + b))
        .collect()
}

/// `max ‖f(x + y) − M (f(x) + f(y))‖` over enumerated related pairs and the
/// related diagonal pairs `(x, x)`, `(x, −x)`, `(0, 0)`.
pub fn measure_defect_additive<F, R>(
    problem: &AdditiveProblem<F, R>,
    sampling: &Sampling,
) -> Result<DefectMeasurement>
where
    F: EvaluableMap,
    R: Relation,
{
    if sampling.pair_limit < 1 {
        return Err(Error::InvalidArgument("pair_limit must be at least 1".into()));
    }
    let (pairs, diagonal_derivation) =
        pipeline::derivation_pairs(&problem.relation, sampling, &diagonal_templates());
    let epsilon = pipeline::max_defect(&pairs, |pair| {
        let values = residual_args(pair)
            .iter()
            .map(|p| problem.f.eval_exact(p))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ExactVec> = values.iter().collect();
        pipeline::norm(&problem.space, &equation_residual(&problem.m, &refs))
    })?;
    Ok(DefectMeasurement {
        epsilon,
        pairs,
        diagonal_derivation,
    })
}

/// `Σ_{n≥1} a_n^β + b_n^β` for a geometrically decaying double sequence.
pub(crate) fn printed_series(beta: f64, coeff: impl Fn(i32) -> (f64, f64)) -> f64 {
    let mut sum = 0.0;
    for n in 1..=4000 {
        let (a, b) = coeff(n);
        let term = a.abs().powf(beta) + b.abs().powf(beta);
        sum += term;
        if term < 1e-18 * sum.max(1.0) {
            break;
        }
    }
    sum
}

fn printed_comparison(m: &Rational) -> Vec<CoefficientComparison> {
    let (alpha, gamma) = lemma_coefficients(m);
    (1..=4u32)
        .map(|n| {
            let lemma = coeffs_recurrence(&alpha, &gamma, n as usize);
            let two_n = 2i64.pow(n);
            let den = 2 * 4i64.pow(n);
            let printed_a = Rational::new(two_n + 1, den);
            let printed_b = Rational::new(two_n - 1, den);
            CoefficientComparison {
                n: n as usize,
                equal: lemma.a == printed_a && lemma.b == printed_b,
                lemma_a: lemma.a,
                lemma_b: lemma.b,
                printed_a,
                printed_b,
            }
        })
        .collect()
}

/// Measures the defect, reduces to the direct method, constructs `g` on the
/// sampled box and checks the distance bound on `2X` and the equation on
/// related pairs.
pub fn solve_additive<F, R>(
    problem: &AdditiveProblem<F, R>,
    sampling: &Sampling,
    stop: &StopRule,
    residual_tol: f64,
) -> Result<StabilityOutcome>
where
    F: EvaluableMap,
    R: Relation,
{
    validate_m(&problem.m)?;
    validate_beta(problem.beta)?;
    if problem.space.beta != problem.beta {
        return Err(Error::InvalidArgument(format!(
            "space beta {} differs from problem beta {}",
            problem.space.beta, problem.beta
        )));
    }
    let conditions = conditions(&problem.m, problem.beta)?;
    let measured = measure_defect_additive(problem, sampling)?;
    let epsilon = measured.epsilon;
    let reduction = reduce_additive(&problem.m, problem.beta, epsilon)?;
    let params = &reduction.params;
    let series = series_sum(&params.alpha, &params.gamma, params.beta, stop.tol.min(1e-12))?;
    let bound = stability_bound(params.c, series.value);

    let printed = printed_series(problem.beta, |n| {
        let p = 2f64.powi(n);
        let d = 2.0 * 4f64.powi(n);
        ((p + 1.0) / d, (p - 1.0) / d)
    });
    let comparison = printed_comparison(&problem.m);

    let image_points: Vec<GroupPoint> = box_points(sampling.domain_dim, sampling.box_radius)
        .iter()
        .map(|x| x.scale_i64(2))
        .collect();
    let mut needed: BTreeSet<GroupPoint> = image_points.iter().cloned().collect();
    for pair in &measured.pairs {
        needed.extend(residual_args(pair));
    }
    let constructed = pipeline::construct_all(&problem.f, needed, params, &problem.space, stop)?;

    let distances = pipeline::distance_summary(&image_points, &constructed, params)?;
    let residuals = pipeline::residual_summary(
        &measured.pairs,
        residual_args,
        |g| equation_residual(&problem.m, g),
        &constructed,
        epsilon,
        params,
        &problem.space,
        residual_tol,
    )?;

    let bound_respected = distances.max_fg_distance_on_image_set <= bound + stop.tol;
    let residual_ok = residuals.max_equation_residual <= residual_tol;
    let steps_within_envelope = distances.step_bound_violations == 0;

    Ok(StabilityOutcome {
        defect: DefectSummary {
            epsilon,
            pairs_checked: measured.pairs.len(),
            diagonal_derivation: measured.diagonal_derivation,
            f0_bound: f0_bound(epsilon, &problem.m, problem.beta)?,
            derived_bound: even_diff_bound(epsilon, &problem.m, problem.beta)?,
            derived_bound_label: "||f(2x) - f(-2x)||".into(),
        },
        conditions,
        bound: BoundSummary {
            c: params.c,
            defect_factor: reduction.defect_factor,
            defect_factor_exact: reduction.defect_factor_exact.clone(),
            s: series.value,
            bound,
            printed_series: printed,
            printed_bound: stability_bound(params.c, printed),
            coefficients_differ: comparison.iter().any(|c| !c.equal),
            coefficient_comparison: comparison,
        },
        series,
        distances,
        residuals,
        pass: PassFlags {
            bound_respected,
            residual_ok,
            steps_within_envelope,
            all: bound_respected && residual_ok && steps_within_envelope,
            failure: None,
        },
    })
}
