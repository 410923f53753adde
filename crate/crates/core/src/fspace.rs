//! β-homogeneous F-normed codomains and sampling checks of the F-norm laws.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::axioms::{AxiomReport, CheckBuilder};
use crate::error::{Error, Result};

/// Relative tolerance for β-homogeneity checks.
pub const HOMOGENEITY_RTOL: f64 = 1e-9;
/// Slack for triangle-inequality checks, relative to `1 + ‖y1‖ + ‖y2‖`.
pub const TRIANGLE_SLACK: f64 = 1e-12;
/// Slack for unit-scalar symmetry checks, relative to `1 + ‖y‖`.
pub const SYMMETRY_SLACK: f64 = 1e-12;
/// Length of the scalar sequence `1/n` used for the continuity check.
pub const CONTINUITY_STEPS: usize = 1000;

/// A point of the real codomain `R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodomainVec(pub Vec<f64>);

impl CodomainVec {
    pub fn zeros(dim: usize) -> Self {
        CodomainVec(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, t: f64) -> Self {
        CodomainVec(self.0.iter().map(|v| v * t).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        CodomainVec(self.0.iter().zip(&other.0).map(|(a, b)| op(*a, *b)).collect())
    }
}

impl Add for &CodomainVec {
    type Output = CodomainVec;
    fn add(self, rhs: &CodomainVec) -> CodomainVec {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CodomainVec {
    type Output = CodomainVec;
    fn sub(self, rhs: &CodomainVec) -> CodomainVec {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &CodomainVec {
    type Output = CodomainVec;
    fn neg(self) -> CodomainVec {
        CodomainVec(self.0.iter().map(|v| -v).collect())
    }
}

impl fmt::Display for CodomainVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `(Euclidean length)^β`.
    #[default]
    PowerEuclidean,
    /// `Σ |y_i|^β`, the finite analogue of the `L^p` metric.
    DiscreteEllp,
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power-euclidean" => Ok(NormKind::PowerEuclidean),
            "discrete-ellp" => Ok(NormKind::DiscreteEllp),
            _ => Err(Error::Parse {
                what: "norm kind",
                input: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::PowerEuclidean => "power-euclidean",
            NormKind::DiscreteEllp => "discrete-ellp",
        })
    }
}

/// A β-homogeneous F-norm on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FNormSpace {
    pub kind: NormKind,
    pub beta: f64,
    pub dim: usize,
}

impl FNormSpace {
    /// A genuine F-norm: `beta` in (0, 1] and `dim >= 1`.
    pub fn new(kind: NormKind, beta: f64, dim: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must lie in (0, 1], got {beta}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(FNormSpace { kind, beta, dim })
    }

    /// Skips the `beta` range check. Used to build deliberately broken spaces
    /// for exercising the axiom checker.
    pub fn new_unchecked(kind: NormKind, beta: f64, dim: usize) -> Self {
        FNormSpace { kind, beta, dim }
    }

    pub fn eval(&self, y: &CodomainVec) -> Result<f64> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: y.dim(),
            });
        }
        Ok(self.eval_slice(&y.0))
    }

    pub(crate) fn eval_slice(&self, y: &[f64]) -> f64 {
        match self.kind {
            NormKind::PowerEuclidean => {
                let len = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                pow_beta(len, self.beta)
            }
            NormKind::DiscreteEllp => y.iter().map(|v| pow_beta(v.abs(), self.beta)).sum(),
        }
    }

    /// `‖a − b‖`.
    pub fn distance(&self, a: &CodomainVec, b: &CodomainVec) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                actual: b.dim(),
            });
        }
        self.eval(&(a - b))
    }
}

fn pow_beta(t: f64, beta: f64) -> f64 {
    if beta == 1.0 {
        t
    } else if t == 0.0 {
        0.0
    } else {
        t.powf(beta)
    }
}

fn sample_vec(rng: &mut ChaCha8Rng, dim: usize) -> CodomainVec {
    // Mix magnitudes so both tiny and large vectors are exercised.
    let scale = match rng.gen_range(0..3) {
        0 => 1e-3,
        1 => 1.0,
        _ => 1e3,
    };
    CodomainVec((0..dim).map(|_| rng.gen_range(-10.0..=10.0) * scale).collect())
}

/// Checks definiteness, unit-scalar symmetry, the triangle inequality,
/// β-homogeneity and continuity along `λ_n = 1/n` on deterministic samples.
///
/// The first samples are fixed probes: the zero vector followed by the
/// standard basis vectors (each paired with itself for the triangle check).
pub fn check_fnorm_axioms(space: &FNormSpace, sample_count: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim;
    let mut samples = Vec::with_capacity(sample_count);
    samples.push(CodomainVec::zeros(dim));
    for i in 0..dim {
        let mut e = CodomainVec::zeros(dim);
        e.0[i] = 1.0;
        samples.push(e);
    }
    while samples.len() < sample_count {
        samples.push(sample_vec(&mut rng, dim));
    }
    samples.truncate(sample_count.max(1));

    let mut definiteness = CheckBuilder::new("definiteness");
    let mut symmetry = CheckBuilder::new("unit-symmetry");
    let mut triangle = CheckBuilder::new("triangle");
    let mut homogeneity = CheckBuilder::new("beta-homogeneity");
    let mut continuity = CheckBuilder::new("scalar-continuity");

    for (i, y) in samples.iter().enumerate() {
        let ny = space.eval_slice(&y.0);

        let nonzero = !y.is_zero();
        let ok = if nonzero { ny > 0.0 } else { ny == 0.0 };
        definiteness.record(ok, nonzero, || format!("y={y}: ||y||={ny}"));

        let nneg = space.eval_slice(&(-y).0);
        symmetry.record((nneg - ny).abs() <= SYMMETRY_SLACK * (1.0 + ny), nonzero, || {
            format!("y={y}: ||-y||={nneg} != ||y||={ny}")
        });

        let other = if i <= dim || i == 0 { y } else { &samples[i - 1] };
        let sum = space.eval_slice(&(y + other).0);
        let rhs = ny + space.eval_slice(&other.0);
        triangle.record(sum <= rhs + TRIANGLE_SLACK * (1.0 + rhs), nonzero, || {
            format!("y1={y}, y2={other}: ||y1+y2||={sum} > ||y1||+||y2||={rhs}")
        });

        let t: f64 = if i % 5 == 0 {
            -1.0
        } else {
            rng.gen_range(-10.0..=10.0)
        };
        let lhs = space.eval_slice(&y.scale(t).0);
        let expected = pow_beta(t.abs(), space.beta) * ny;
        homogeneity.record(
            (lhs - expected).abs() <= HOMOGENEITY_RTOL * (1.0 + expected),
            nonzero,
            || format!("y={y}, t={t}: ||t y||={lhs} != |t|^beta ||y||={expected}"),
        );

        // Continuity along λ_n = 1/n: monotone decay towards zero.
        if i < 100 {
            let mut prev = ny;
            let mut ok = true;
            for n in 2..=CONTINUITY_STEPS {
                let v = space.eval_slice(&y.scale(1.0 / n as f64).0);
                if v > prev * (1.0 + HOMOGENEITY_RTOL) {
                    ok = false;
                    break;
                }
                prev = v;
            }
            let limit = pow_beta(1.0 / CONTINUITY_STEPS as f64, space.beta) * ny;
            ok &= prev <= limit * (1.0 + HOMOGENEITY_RTOL) + f64::MIN_POSITIVE;
            continuity.record(ok, nonzero, || {
                format!("y={y}: ||y/n|| does not decrease to 0 (last {prev})")
            });
        }
    }

    let mut report = AxiomReport::new(format!(
        "F-norm {} (beta={}, dim={}) on {} samples",
        space.kind,
        space.beta,
        space.dim,
        samples.len()
    ));
    report.checks = vec![
        definiteness.finish(),
        symmetry.finish(),
        triangle.finish(),
        homogeneity.finish(),
        continuity.finish(),
    ];
    report
}
