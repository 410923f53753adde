//! Stability of the λ-parameterized quadratic equation
//! `f(λx + λy) + f(λx − λy) = 2λ² [f(x) + f(y)]` for `x ⊥ y`.
//!
//! Reduction: `α = 3/(8λ²)`, `γ = 1/(8λ²)`, `ω = 2λ` (so `u = 1/(2λ²)`,
//! `v = 1/(4λ²)`) and `C = (2 + 2^β) |1/(8λ²)|^β [|1/(2 − 4λ²)|^β + 1] ε`.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::additive::printed_series;
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

pub struct QuadraticProblem<F, R> {
    pub lambda: i64,
    pub beta: f64,
    pub relation: R,
    pub f: F,
    pub space: FNormSpace,
}

pub fn validate_lambda(lambda: i64) -> Result<()> {
    if lambda == 0 {
        return Err(Error::InvalidLambda { value: lambda });
    }
    // 4λ² and ω^n must stay representable for the exact arithmetic.
    if lambda.unsigned_abs() > 1 << 20 {
        return Err(Error::InvalidArgument(format!("|lambda| = {} is too large", lambda.unsigned_abs())));
    }
    Ok(())
}

fn lambda_sq(lambda: i64) -> Rational {
    Rational::from_integer(lambda * lambda)
}

/// `(α, γ) = (3/(8λ²), 1/(8λ²))`.
pub fn lemma_coefficients(lambda: i64) -> (Rational, Rational) {
    let d = 8 * lambda * lambda;
    (Rational::new(3, d), Rational::new(1, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCondition {
    /// `(1/(2λ²))^β + (1/(4λ²))^β ≤ 1`.
    pub stated: StatedCondition,
    /// Strict `|u|^β + |v|^β < 1` on the reduced coefficients.
    pub lemma: ConvergenceCheck,
}

pub fn check_lambda_condition(lambda: i64, beta: f64) -> Result<LambdaCondition> {
    validate_lambda(lambda)?;
    let (alpha, gamma) = lemma_coefficients(lambda);
    let lemma = check_convergence(&alpha, &gamma, beta);
    let value = lemma.u_term + lemma.v_term;
    Ok(LambdaCondition {
        stated: StatedCondition {
            expression: "(1/(2 lambda^2))^beta + (1/(4 lambda^2))^beta <= 1".into(),
            value,
            holds: value <= 1.0,
        },
        lemma,
    })
}

pub fn conditions(lambda: i64, beta: f64) -> Result<ConditionSummary> {
    let LambdaCondition { stated, lemma } = check_lambda_condition(lambda, beta)?;
    let (alpha, gamma) = lemma_coefficients(lambda);
    Ok(ConditionSummary {
        stated,
        lemma,
        alpha,
        gamma,
        omega: 2 * lambda,
    })
}

/// `2 − 4λ²`.
fn two_minus_four_lambda_sq(lambda: i64) -> Rational {
    Rational(Rational::from_integer(2).0 - Rational::from_integer(4).0 * lambda_sq(lambda).0)
}

/// `ε / |2 − 4λ²|^β`.
pub fn f0_bound_quadratic(epsilon: f64, lambda: i64, beta: f64) -> Result<f64> {
    validate_lambda(lambda)?;
    Ok(epsilon / two_minus_four_lambda_sq(lambda).abs_pow(beta))
}

/// `[|1/(2 − 4λ²)|^β + 1] ε`, bounding `‖f(2λx) − 4λ² f(x)‖`.
pub fn doubling_bound(epsilon: f64, lambda: i64, beta: f64) -> Result<f64> {
    validate_lambda(lambda)?;
    Ok((two_minus_four_lambda_sq(lambda).recip().abs_pow(beta) + 1.0) * epsilon)
}

pub use crate::additive::Reduction;

/// `(2 + 2^β) |1/(8λ²)|^β [|1/(2 − 4λ²)|^β + 1]`.
fn defect_factor(lambda: i64, beta: f64) -> (f64, Option<Rational>) {
    let inv8 = Rational::new(1, 8 * lambda * lambda);
    let inv2 = two_minus_four_lambda_sq(lambda).recip();
    let approx = (2.0 + 2f64.powf(beta)) * inv8.abs_pow(beta) * (inv2.abs_pow(beta) + 1.0);
    let exact = (beta == 1.0)
        .then(|| Rational(Rational::from_integer(4).0 * inv8.0 * (inv2.abs().0 + Rational::one().0)));
    (exact.as_ref().map_or(approx, Rational::to_f64), exact)
}

pub fn reduce_quadratic(lambda: i64, beta: f64, epsilon: f64) -> Result<Reduction> {
    validate_lambda(lambda)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and nonnegative, got {epsilon}"
        )));
    }
    let (alpha, gamma) = lemma_coefficients(lambda);
    let conv = check_convergence(&alpha, &gamma, beta);
    if !conv.series_converges {
        return Err(Error::ConditionViolation {
            what: format!("reduced coefficients u = {}, v = {} do not both lie in (-1, 1)", conv.u, conv.v),
            u_term: conv.u_term,
            v_term: conv.v_term,
        });
    }
    let (factor, exact) = defect_factor(lambda, beta);
    Ok(Reduction {
        params: LemmaParams {
            alpha,
            gamma,
            omega: 2 * lambda,
            beta,
            c: factor * epsilon,
        },
        u: conv.u,
        v: conv.v,
        defect_factor: factor,
        defect_factor_exact: exact,
    })
}

fn diagonal_templates() -> [fn(&GroupPoint) -> Pair; 4] {
    [
        |x| (x.clone(), x.clone()),
        |x| (x.clone(), -x),
        |x| (-x, -x),
        |x| (GroupPoint::zero(x.dim()), GroupPoint::zero(x.dim())),
    ]
}

fn equation_args(lambda: i64, (x, y): &Pair) -> Vec<GroupPoint> {
    let lx = x.scale_i64(lambda);
    let ly = y.scale_i64(lambda);
    vec![&lx + &ly, &lx - &ly, x.clone(), y.clone()]
}

/// `g0 + g1 − 2λ² (g2 + g3)`.
fn equation_residual(lambda: i64, g: &[&ExactVec]) -> ExactVec {
    let k = BigRational::from_integer((2 * lambda * lambda).into());
    (0..g[0].len())
        .map(|i| &g[0][i] + &g[1][i] - &k * (&g[2][i] + &g[3][i]))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectMeasurement {
    pub epsilon: f64,
    pub pairs: Vec<(GroupPoint, GroupPoint)>,
    pub diagonal_derivation: bool,
}

/// `max ‖f(λx + λy) + f(λx − λy) − 2λ² [f(x) + f(y)]‖` over enumerated related
/// pairs and the related diagonal pairs.
pub fn measure_defect_quadratic<F, R>(
    problem: &QuadraticProblem<F, R>,
    sampling: &Sampling,
) -> Result<DefectMeasurement>
where
    F: EvaluableMap,
    R: Relation,
{
    validate_lambda(problem.lambda)?;
    if sampling.pair_limit < 1 {
        return Err(Error::InvalidArgument("pair_limit must be at least 1".into()));
    }
    let (pairs, diagonal_derivation) =
        pipeline::derivation_pairs(&problem.relation, sampling, &diagonal_templates());
    let epsilon = pipeline::max_defect(&pairs, |pair| {
        let values = equation_args(problem.lambda, pair)
            .iter()
            .map(|p| problem.f.eval_exact(p))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ExactVec> = values.iter().collect();
        pipeline::norm(&problem.space, &equation_residual(problem.lambda, &refs))
    })?;
    Ok(DefectMeasurement {
        epsilon,
        pairs,
        diagonal_derivation,
    })
}

fn printed_comparison(lambda: i64) -> Vec<CoefficientComparison> {
    let (alpha, gamma) = lemma_coefficients(lambda);
    (1..=4u32)
        .map(|n| {
            let lemma = coeffs_recurrence(&alpha, &gamma, n as usize);
            let two_n = 2i64.pow(n);
            let den = Rational(Rational::from_integer(4).pow(n).0 * lambda_sq(lambda).pow(n).0);
            let printed_a = Rational(Rational::from_integer(two_n + 1).0 / &den.0);
            let printed_b = Rational(Rational::from_integer(two_n - 1).0 / &den.0);
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
/// sampled box and checks the distance bound on `2λX` and the equation on
/// related pairs.
pub fn solve_quadratic<F, R>(
    problem: &QuadraticProblem<F, R>,
    sampling: &Sampling,
    stop: &StopRule,
    residual_tol: f64,
) -> Result<StabilityOutcome>
where
    F: EvaluableMap,
    R: Relation,
{
    let lambda = problem.lambda;
    let conditions = conditions(lambda, problem.beta)?;
    if problem.space.beta != problem.beta {
        return Err(Error::InvalidArgument(format!(
            "space beta {} differs from problem beta {}",
            problem.space.beta, problem.beta
        )));
    }
    let reduction = reduce_quadratic(lambda, problem.beta, 0.0)?;
    let measured = measure_defect_quadratic(problem, sampling)?;
    let epsilon = measured.epsilon;
    let reduction = Reduction {
        params: LemmaParams {
            c: reduction.defect_factor * epsilon,
            ..reduction.params
        },
        ..reduction
    };
    let params = &reduction.params;
    let series = series_sum(&params.alpha, &params.gamma, params.beta, stop.tol.min(1e-12))?;
    let bound = stability_bound(params.c, series.value);

    let l2 = (lambda * lambda) as f64;
    let printed = printed_series(problem.beta, |n| {
        let p = 2f64.powi(n);
        let d = (4.0 * l2).powi(n);
        ((p + 1.0) / d, (p - 1.0) / d)
    });
    let comparison = printed_comparison(lambda);

    let image_points: Vec<GroupPoint> = box_points(sampling.domain_dim, sampling.box_radius)
        .iter()
        .map(|x| x.scale_i64(2 * lambda))
        .collect();
    let mut needed: BTreeSet<GroupPoint> = image_points.iter().cloned().collect();
    for pair in &measured.pairs {
        needed.extend(equation_args(lambda, pair));
    }
    let constructed = pipeline::construct_all(&problem.f, needed, params, &problem.space, stop)?;

    let distances = pipeline::distance_summary(&image_points, &constructed, params)?;
    let residuals = pipeline::residual_summary(
        &measured.pairs,
        |pair| equation_args(lambda, pair),
        |g| equation_residual(lambda, g),
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
            f0_bound: f0_bound_quadratic(epsilon, lambda, problem.beta)?,
            derived_bound: doubling_bound(epsilon, lambda, problem.beta)?,
            derived_bound_label: "||f(2 lambda x) - 4 lambda^2 f(x)||".into(),
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fspace::NormKind;
    use crate::model::{MapBase, MapModel};
    use crate::ortho::OrthoRelation;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn square() -> MapModel {
        MapModel::exact(MapBase::Quadratic {
            q: vec![vec![1, 0], vec![0, 1]],
        })
    }

    #[test]
    fn lambda_condition() {
        let c = check_lambda_condition(1, 1.0).unwrap();
        assert!(c.stated.holds && c.lemma.holds);
        assert_eq!(c.stated.value, 0.75);
        let c = check_lambda_condition(2, 1.0).unwrap();
        assert!(c.stated.holds);
        assert_eq!(c.stated.value, 1.0 / 8.0 + 1.0 / 16.0);
        assert_eq!(check_lambda_condition(0, 1.0).unwrap_err().code(), "invalid-argument");
        // (1/2)^(1/2) + (1/4)^(1/2) > 1, but the series still converges.
        let c = check_lambda_condition(1, 0.5).unwrap();
        assert!(!c.stated.holds && c.lemma.series_converges);
    }

    #[test]
    fn bounds() {
        assert_eq!(f0_bound_quadratic(1.0, 1, 1.0).unwrap(), 0.5);
        assert_eq!(f0_bound_quadratic(0.0, 1, 1.0).unwrap(), 0.0);
        assert!((f0_bound_quadratic(1.0, 2, 1.0).unwrap() - 1.0 / 14.0).abs() < 1e-16);
        assert_eq!(doubling_bound(1.0, 1, 1.0).unwrap(), 1.5);
        assert_eq!(doubling_bound(0.0, 1, 1.0).unwrap(), 0.0);
        assert_eq!(doubling_bound(2.0, 1, 1.0).unwrap(), 3.0);
        assert!(doubling_bound(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn reduction_examples() {
        let red = reduce_quadratic(1, 1.0, 1.0).unwrap();
        assert_eq!((red.params.alpha.clone(), red.params.gamma.clone()), (r(3, 8), r(1, 8)));
        assert_eq!(red.params.omega, 2);
        assert_eq!(red.defect_factor_exact, Some(r(3, 4)));
        assert_eq!(red.params.c, 0.75);

        let red = reduce_quadratic(2, 1.0, 1.0).unwrap();
        assert_eq!((red.params.alpha.clone(), red.params.gamma.clone()), (r(3, 32), r(1, 32)));
        assert_eq!(red.params.omega, 4);
        assert_eq!(red.defect_factor_exact, Some(r(15, 112)));
        assert_eq!((red.u, red.v), (r(1, 8), r(1, 16)));
    }

    #[test]
    fn square_norm_has_zero_defect() {
        for lambda in [1, 2, -3] {
            for relation in [OrthoRelation::InnerProduct, OrthoRelation::Trivial] {
                let problem = QuadraticProblem {
                    lambda,
                    beta: 1.0,
                    relation,
                    f: square(),
                    space: FNormSpace::new(NormKind::PowerEuclidean, 1.0, 1).unwrap(),
                };
                let d = measure_defect_quadratic(&problem, &Sampling::default()).unwrap();
                assert_eq!(d.epsilon, 0.0);
            }
        }
    }

    #[test]
    fn square_norm_is_its_own_solution() {
        let problem = QuadraticProblem {
            lambda: 2,
            beta: 1.0,
            relation: OrthoRelation::DiagonalAugmented,
            f: square(),
            space: FNormSpace::new(NormKind::PowerEuclidean, 1.0, 1).unwrap(),
        };
        let out = solve_quadratic(&problem, &Sampling::default(), &StopRule::default(), 1e-8).unwrap();
        assert_eq!(out.defect.epsilon, 0.0);
        assert_eq!(out.bound.bound, 0.0);
        assert_eq!(out.distances.max_fg_distance_on_image_set, 0.0);
        assert_eq!(out.residuals.max_equation_residual, 0.0);
        assert!(out.pass.all);
    }

    #[test]
    fn printed_coefficients_differ_by_two() {
        for c in printed_comparison(3) {
            assert!(!c.equal);
            assert_eq!(c.printed_a, Rational(&c.lemma_a.0 * Rational::from_integer(2).0));
            assert_eq!(c.printed_b, Rational(&c.lemma_b.0 * Rational::from_integer(2).0));
        }
    }
}
