//! The direct-method engine.
//!
//! Given a map `f` with `‖f(x) − α f(ωx) + γ f(−ωx)‖ ≤ C` for all `x`, the
//! iterates
//!
//! ```text
//! g_n(x) = A_n f(ωⁿx) − B_n f(−ωⁿx),   A_{n+1} = αA_n + γB_n,  B_{n+1} = γA_n + αB_n
//! ```
//!
//! with `A_0 = 1, B_0 = 0` form a Cauchy sequence whose limit `g` stays within
//! `C (Σ_{n≥1} |A_n|^β + |B_n|^β + 1)` of `f`. Coefficients are exact
//! rationals; codomain values and norms are doubles.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fspace::{CodomainVec, FNormSpace};
use crate::ortho::GroupPoint;
use crate::rational::Rational;

/// Slack allowed on per-step and h-difference bounds.
pub const STEP_SLACK: f64 = 1e-9;

/// A pure, deterministic map `Z^d → R^m`.
pub trait EvaluableMap: Sync {
    fn eval(&self, x: &GroupPoint) -> Result<CodomainVec>;

    /// The exact value behind [`eval`](Self::eval). Maps whose values are not
    /// doubles (large integer bases, say) override this so the iteration at
    /// `ωⁿx` sees the map itself rather than its rounding.
    fn eval_exact(&self, x: &GroupPoint) -> Result<ExactVec> {
        to_exact(&self.eval(x)?, 0)
    }
}

impl<F> EvaluableMap for F
where
    F: Fn(&GroupPoint) -> Result<CodomainVec> + Sync,
{
    fn eval(&self, x: &GroupPoint) -> Result<CodomainVec> {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub alpha: Rational,
    pub gamma: Rational,
    pub omega: i64,
    pub beta: f64,
    /// Bound on the one-step defect `‖f(x) − α f(ωx) + γ f(−ωx)‖`.
    pub c: f64,
}

impl LemmaParams {
    /// `u = α + γ`.
    pub fn u(&self) -> Rational {
        Rational(&self.alpha.0 + &self.gamma.0)
    }

    /// `v = α − γ`.
    pub fn v(&self) -> Rational {
        Rational(&self.alpha.0 - &self.gamma.0)
    }

    fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::InvalidArgument("omega must be a nonzero integer".into()));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "defect constant must be finite and nonnegative, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffPair {
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
}

/// Successive `(A_n, B_n)` from the linear recurrence, starting at `n = 0`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    alpha: Rational,
    gamma: Rational,
    next: CoeffPair,
}

impl Coefficients {
    pub fn new(alpha: &Rational, gamma: &Rational) -> Self {
        Coefficients {
            alpha: alpha.clone(),
            gamma: gamma.clone(),
            next: CoeffPair {
                n: 0,
                a: Rational::one(),
                b: Rational::zero(),
            },
        }
    }
}

impl Iterator for Coefficients {
    type Item = CoeffPair;

    fn next(&mut self) -> Option<CoeffPair> {
        let cur = &self.next;
        let a = &self.alpha.0 * &cur.a.0 + &self.gamma.0 * &cur.b.0;
        let b = &self.gamma.0 * &cur.a.0 + &self.alpha.0 * &cur.b.0;
        let following = CoeffPair {
            n: cur.n + 1,
            a: Rational(a),
            b: Rational(b),
        };
        Some(std::mem::replace(&mut self.next, following))
    }
}

pub fn coeffs_recurrence(alpha: &Rational, gamma: &Rational, n: usize) -> CoeffPair {
    Coefficients::new(alpha, gamma)
        .nth(n)
        .expect("coefficient iterator is infinite")
}

/// `A_n = (uⁿ + vⁿ)/2`, `B_n = (uⁿ − vⁿ)/2` with `u = α + γ`, `v = α − γ`.
pub fn coeffs_closed(alpha: &Rational, gamma: &Rational, n: usize) -> CoeffPair {
    let un = num_traits::pow(&alpha.0 + &gamma.0, n);
    let vn = num_traits::pow(&alpha.0 - &gamma.0, n);
    let two = Rational::from_integer(2).0;
    CoeffPair {
        n,
        a: Rational((&un + &vn) / &two),
        b: Rational((un - vn) / two),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub u: Rational,
    pub v: Rational,
    /// `|u|^β`.
    pub u_term: f64,
    /// `|v|^β`.
    pub v_term: f64,
    pub sum: f64,
    /// The lemma hypothesis `|u|^β + |v|^β < 1` (exact when `β = 1`).
    pub holds: bool,
    /// `max(|u|, |v|) < 1`: the coefficient series converges.
    pub series_converges: bool,
}

pub fn check_convergence(alpha: &Rational, gamma: &Rational, beta: f64) -> ConvergenceCheck {
    let u = Rational(&alpha.0 + &gamma.0);
    let v = Rational(&alpha.0 - &gamma.0);
    let u_term = u.abs_pow(beta);
    let v_term = v.abs_pow(beta);
    let one = Rational::one();
    let holds = if beta == 1.0 {
        Rational(u.abs().0 + v.abs().0) < one
    } else {
        u_term + v_term < 1.0
    };
    let series_converges = u.abs() < one && v.abs() < one;
    ConvergenceCheck {
        u,
        v,
        u_term,
        v_term,
        sum: u_term + v_term,
        holds,
        series_converges,
    }
}

/// Upper bound on `Σ_{k≥n} |A_k|^β + |B_k|^β`, from
/// `|A_k|^β + |B_k|^β ≤ 2^{1−β} (|u|^{kβ} + |v|^{kβ})`.
pub fn tail_certificate(u_term: f64, v_term: f64, beta: f64, n: usize) -> f64 {
    let geo = |r: f64| {
        if r == 0.0 {
            0.0
        } else {
            r.powi(n as i32) / (1.0 - r)
        }
    };
    2f64.powf(1.0 - beta) * (geo(u_term) + geo(v_term))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSum {
    /// `Σ_{n=1}^{N−1} |A_n|^β + |B_n|^β`.
    pub partial: f64,
    /// Certified bound on the remaining terms `n ≥ N`.
    pub tail: f64,
    /// `partial + tail`, an upper bound on the full series.
    pub value: f64,
    /// Number of terms summed explicitly (`N − 1`).
    pub terms: usize,
    pub tol: f64,
    /// Indices among the summed terms where `|A_n|^β + |B_n|^β` exceeds
    /// `max(|u|^{nβ}, |v|^{nβ})`.
    pub max_bound_violations: usize,
}

/// Sums `|A_n|^β + |B_n|^β` from `n = 1` until the tail certificate drops
/// below `tol`.
pub fn series_sum(alpha: &Rational, gamma: &Rational, beta: f64, tol: f64) -> Result<SeriesSum> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
    }
    let conv = check_convergence(alpha, gamma, beta);
    if !conv.series_converges {
        return Err(Error::ConditionViolation {
            what: format!(
                "coefficient series diverges (u = {}, v = {})",
                conv.u, conv.v
            ),
            u_term: conv.u_term,
            v_term: conv.v_term,
        });
    }
    let mut partial = 0.0;
    let mut max_bound_violations = 0;
    for pair in Coefficients::new(alpha, gamma).skip(1) {
        let tail = tail_certificate(conv.u_term, conv.v_term, beta, pair.n);
        if tail < tol {
            return Ok(SeriesSum {
                partial,
                tail,
                value: partial + tail,
                terms: pair.n - 1,
                tol,
                max_bound_violations,
            });
        }
        let term = pair.a.abs_pow(beta) + pair.b.abs_pow(beta);
        let claimed = conv.u_term.powi(pair.n as i32).max(conv.v_term.powi(pair.n as i32));
        if term > claimed * (1.0 + 1e-12) {
            max_bound_violations += 1;
        }
        partial += term;
    }
    unreachable!("coefficient iterator is infinite")
}

/// `C (S + 1)`.
pub fn stability_bound(c: f64, s: f64) -> f64 {
    c * (s + 1.0)
}

/// Iterate value held exactly: the noise-bearing doubles are exact rationals
/// and the coefficients are exact, so `g_n` is too.
pub type ExactVec = Vec<BigRational>;

/// Nearest doubles, failing on overflow.
pub fn round_exact(v: &[BigRational], step: usize) -> Result<CodomainVec> {
    let out: Vec<f64> = v.iter().map(|c| Rational(c.clone()).to_f64()).collect();
    if out.iter().any(|c| !c.is_finite()) {
        return Err(Error::Overflow { step });
    }
    Ok(CodomainVec(out))
}

pub fn to_exact(v: &CodomainVec, step: usize) -> Result<ExactVec> {
    v.0.iter()
        .map(|&c| BigRational::from_float(c).ok_or(Error::Overflow { step }))
        .collect()
}

/// `uⁿ (a − b)/2 + vⁿ (a + b)/2`, equal to `A_n a − B_n b`.
fn combine(un: &Rational, vn: &Rational, fp: &[BigRational], fm: &[BigRational]) -> Result<ExactVec> {
    if fp.len() != fm.len() {
        return Err(Error::DimensionMismatch {
            expected: fp.len(),
            actual: fm.len(),
        });
    }
    let two = Rational::from_integer(2).0;
    Ok(fp
        .iter()
        .zip(fm)
        .map(|(a, b)| {
            let odd = (a - b) / &two;
            let even = (a + b) / &two;
            &un.0 * odd + &vn.0 * even
        })
        .collect())
}

/// `‖a − b‖` with the difference formed exactly and rounded once.
pub fn exact_distance(space: &FNormSpace, a: &[BigRational], b: &[BigRational]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diff: ExactVec = a.iter().zip(b).map(|(x, y)| x - y).collect();
    space.eval(&round_exact(&diff, 0)?)
}

fn eval_at<F: EvaluableMap + ?Sized>(f: &F, p: &GroupPoint, step: usize) -> Result<ExactVec> {
    f.eval_exact(p).map_err(|e| match e {
        Error::Overflow { .. } => Error::Overflow { step },
        other => other,
    })
}

/// `g_n(x) = A_n f(ωⁿx) − B_n f(−ωⁿx)`, evaluated through the even/odd split.
pub fn iterate_g<F: EvaluableMap + ?Sized>(
    f: &F,
    x: &GroupPoint,
    params: &LemmaParams,
    n: usize,
) -> Result<CodomainVec> {
    params.validate()?;
    let omega_n = num_traits::pow(BigInt::from(params.omega), n);
    let p = x.scale(&omega_n);
    let fp = eval_at(f, &p, n)?;
    let fm = eval_at(f, &-&p, n)?;
    round_exact(&combine(&params.u().pow(n as u32), &params.v().pow(n as u32), &fp, &fm)?, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub n_max: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            tol: 1e-10,
            n_max: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
    pub g: CodomainVec,
    /// `‖g_n − g_{n+1}‖`; absent on the final row.
    pub step_norm: Option<f64>,
    /// `h(x, n) = ‖f(x) − g_n(x)‖`.
    pub h_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub point: GroupPoint,
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    /// Steps violating `‖g_n − g_{n+1}‖ ≤ C (|A_n|^β + |B_n|^β) + slack`.
    pub fn step_bound_violations(&self, c: f64, beta: f64) -> usize {
        self.rows
            .iter()
            .filter(|r| match r.step_norm {
                Some(s) => s > c * (r.a.abs_pow(beta) + r.b.abs_pow(beta)) + STEP_SLACK,
                None => false,
            })
            .count()
    }

    /// Steps violating `|h(x, n+1) − h(x, n)| ≤ C (|A_n|^β + |B_n|^β) + slack`.
    pub fn h_difference_violations(&self, c: f64, beta: f64) -> usize {
        self.rows
            .windows(2)
            .filter(|w| {
                let bound = c * (w[0].a.abs_pow(beta) + w[0].b.abs_pow(beta)) + STEP_SLACK;
                (w[1].h_value - w[0].h_value).abs() > bound
            })
            .count()
    }

    pub fn max_step_norm(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.step_norm)
            .fold(0.0, f64::max)
    }
}

/// Result of [`construct`]: the final iterate, its trace, and the exact value
/// of every traced iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub g: CodomainVec,
    pub trace: IterationTrace,
    pub exact: Vec<ExactVec>,
}

/// Iterates `g_n(x)` until the remaining-step envelope
/// `C Σ_{k≥n} (|A_k|^β + |B_k|^β)` drops below `stop.tol`, taking at least one
/// step. Step norms and `h` values are taken on exact differences.
pub fn construct<F: EvaluableMap + ?Sized>(
    f: &F,
    x: &GroupPoint,
    params: &LemmaParams,
    space: &FNormSpace,
    stop: &StopRule,
) -> Result<Construction> {
    params.validate()?;
    if stop.n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if stop.tol.is_nan() || stop.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            stop.tol
        )));
    }
    let conv = check_convergence(&params.alpha, &params.gamma, params.beta);
    if !conv.series_converges {
        return Err(Error::ConditionViolation {
            what: format!("coefficient series diverges (u = {}, v = {})", conv.u, conv.v),
            u_term: conv.u_term,
            v_term: conv.v_term,
        });
    }

    let omega = BigInt::from(params.omega);
    let fx_exact = eval_at(f, x, 0)?;
    let fx = round_exact(&fx_exact, 0)?;
    let mut coeffs = Coefficients::new(&params.alpha, &params.gamma);
    let first = coeffs.next().expect("infinite");
    let mut rows: Vec<TraceRow> = vec![TraceRow {
        n: 0,
        a: first.a,
        b: first.b,
        g: fx.clone(),
        step_norm: None,
        h_value: 0.0,
    }];
    let mut exact = vec![fx_exact.clone()];
    let mut p = x.clone();

    for pair in coeffs {
        let n = pair.n;
        p = p.scale(&omega);
        let fp = eval_at(f, &p, n)?;
        let fm = eval_at(f, &-&p, n)?;
        let un = Rational(&pair.a.0 + &pair.b.0);
        let vn = Rational(&pair.a.0 - &pair.b.0);
        let g_exact = combine(&un, &vn, &fp, &fm)?;
        let g = round_exact(&g_exact, n)?;

        let prev = rows.last_mut().expect("nonempty");
        prev.step_norm = Some(exact_distance(space, exact.last().expect("nonempty"), &g_exact)?);
        let h_value = exact_distance(space, &fx_exact, &g_exact)?;
        rows.push(TraceRow {
            n,
            a: pair.a,
            b: pair.b,
            g,
            step_norm: None,
            h_value,
        });
        exact.push(g_exact);

        let envelope = params.c * tail_certificate(conv.u_term, conv.v_term, params.beta, n);
        if envelope < stop.tol {
            let g = rows.last().expect("nonempty").g.clone();
            return Ok(Construction {
                g,
                trace: IterationTrace {
                    point: x.clone(),
                    rows,
                },
                exact,
            });
        }
        if n >= stop.n_max {
            return Err(Error::NonConvergence {
                n_max: stop.n_max,
                tol: stop.tol,
                envelope,
            });
        }
    }
    unreachable!("coefficient iterator is infinite")
}

/// [`construct`] without the exact iterates.
pub fn construct_g<F: EvaluableMap + ?Sized>(
    f: &F,
    x: &GroupPoint,
    params: &LemmaParams,
    space: &FNormSpace,
    stop: &StopRule,
) -> Result<(CodomainVec, IterationTrace)> {
    let c = construct(f, x, params, space, stop)?;
    Ok((c.g, c.trace))
}
