//! Orthogonality relations on the lattice `Z^d` and their axiom checkers.
//!
//! Relations are evaluated exactly on arbitrary-precision integer points.
//! Existential axioms are only checked through explicit witness providers;
//! a relation without one reports "not checkable" instead of passing.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::axioms::{AxiomReport, CheckBuilder};
use crate::error::{Error, Result};

/// A point of the Abelian group `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupPoint(pub Vec<BigInt>);

impl GroupPoint {
    pub fn zero(dim: usize) -> Self {
        GroupPoint(vec![BigInt::zero(); dim])
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        GroupPoint(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut p = GroupPoint::zero(dim);
        p.0[i] = BigInt::from(1);
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        GroupPoint(self.0.iter().map(|c| c * k).collect())
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self.scale(&BigInt::from(k))
    }

    pub fn dot(&self, other: &GroupPoint) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> BigInt {
        self.0.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl Add for &GroupPoint {
    type Output = GroupPoint;
    fn add(self, rhs: &GroupPoint) -> GroupPoint {
        GroupPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &GroupPoint {
    type Output = GroupPoint;
    fn sub(self, rhs: &GroupPoint) -> GroupPoint {
        GroupPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &GroupPoint {
    type Output = GroupPoint;
    fn neg(self) -> GroupPoint {
        GroupPoint(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coord {
    Small(i64),
    Big(String),
}

impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coords: Vec<Coord> = self
            .0
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => Coord::Small(v),
                None => Coord::Big(c.to_string()),
            })
            .collect();
        coords.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<Coord>::deserialize(deserializer)?;
        coords
            .into_iter()
            .map(|c| match c {
                Coord::Small(v) => Ok(BigInt::from(v)),
                Coord::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(GroupPoint)
    }
}

/// A binary relation `⊥` on `Z^d`.
pub trait Relation: Sync {
    /// Exact predicate; callers guarantee equal dimensions.
    fn relates(&self, x: &GroupPoint, y: &GroupPoint) -> bool;

    /// A `y` with `x ⊥ y` and `x + y ⊥ x − y`, when the relation can supply one.
    fn fs_witness(&self, _x: &GroupPoint) -> Option<GroupPoint> {
        None
    }

    fn name(&self) -> String;
}

/// The shipped relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrthoRelation {
    /// `x ⊥ y` iff `Σ x_i y_i = 0`.
    InnerProduct,
    /// Every pair is related.
    Trivial,
    /// Inner-product orthogonality plus `(x, x)` and `(x, −x)` for every `x`.
    DiagonalAugmented,
    /// `x ⊥ y` iff `x = y`. Violates the Fechner–Sikorska axioms; for testing.
    Diagonal,
    /// No pair is related; for testing.
    Empty,
}

impl std::str::FromStr for OrthoRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner-product" => Ok(OrthoRelation::InnerProduct),
            "trivial" => Ok(OrthoRelation::Trivial),
            "diagonal-augmented" => Ok(OrthoRelation::DiagonalAugmented),
            "diagonal" => Ok(OrthoRelation::Diagonal),
            "empty" => Ok(OrthoRelation::Empty),
            _ => Err(Error::Parse {
                what: "relation",
                input: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for OrthoRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrthoRelation::InnerProduct => "inner-product",
            OrthoRelation::Trivial => "trivial",
            OrthoRelation::DiagonalAugmented => "diagonal-augmented",
            OrthoRelation::Diagonal => "diagonal",
            OrthoRelation::Empty => "empty",
        })
    }
}

/// Quarter turn in the plane; a witness for `x ⊥ y`, `x + y ⊥ x − y` under
/// inner-product orthogonality on `Z^2`.
fn quarter_turn(x: &GroupPoint) -> Option<GroupPoint> {
    if x.dim() != 2 {
        return None;
    }
    Some(GroupPoint(vec![-&x.0[1], x.0[0].clone()]))
}

impl Relation for OrthoRelation {
    fn relates(&self, x: &GroupPoint, y: &GroupPoint) -> bool {
        match self {
            OrthoRelation::InnerProduct => x.dot(y).is_zero(),
            OrthoRelation::Trivial => true,
            OrthoRelation::DiagonalAugmented => x.dot(y).is_zero() || x == y || *x == -y,
            OrthoRelation::Diagonal => x == y,
            OrthoRelation::Empty => false,
        }
    }

    fn fs_witness(&self, x: &GroupPoint) -> Option<GroupPoint> {
        match self {
            OrthoRelation::InnerProduct | OrthoRelation::DiagonalAugmented => quarter_turn(x),
            OrthoRelation::Trivial => Some(x.clone()),
            OrthoRelation::Diagonal | OrthoRelation::Empty => None,
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// Dimension-checked evaluation of `x ⊥ y`.
pub fn related<R: Relation + ?Sized>(rel: &R, x: &GroupPoint, y: &GroupPoint) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(rel.relates(x, y))
}

/// All points of `[−R, R]^d` in lexicographic order.
pub fn box_points(dim: usize, radius: u32) -> Vec<GroupPoint> {
    let r = radius as i64;
    let side = (2 * r + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut coords = vec![0i64; dim];
            for c in coords.iter_mut().rev() {
                *c = (idx % side) as i64 - r;
                idx /= side;
            }
            GroupPoint::from_i64(&coords)
        })
        .collect()
}

/// Related pairs `(x, y)` with both points in `[−R, R]^d`, in lexicographic
/// order of `(x, y)`, truncated to `limit`.
pub fn orthogonal_pairs<R: Relation + ?Sized>(
    rel: &R,
    dim: usize,
    box_radius: u32,
    limit: usize,
) -> Vec<(GroupPoint, GroupPoint)> {
    let pts = box_points(dim, box_radius);
    let mut out = Vec::new();
    'outer: for x in &pts {
        for y in &pts {
            if out.len() >= limit {
                break 'outer;
            }
            if rel.relates(x, y) {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}

const SAMPLE_RADIUS: i64 = 6;

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> GroupPoint {
    GroupPoint::from_i64(
        &(0..dim)
            .map(|_| rng.gen_range(-SAMPLE_RADIUS..=SAMPLE_RADIUS))
            .collect::<Vec<_>>(),
    )
}

/// Fixed probe points followed by pseudo-random ones.
fn sample_points(dim: usize, count: usize, seed: u64) -> Vec<GroupPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![GroupPoint::zero(dim)];
    for i in 0..dim {
        pts.push(GroupPoint::basis(dim, i));
    }
    let ones = GroupPoint::from_i64(&vec![1; dim]);
    pts.push(ones);
    while pts.len() < count {
        pts.push(random_point(&mut rng, dim));
    }
    pts.truncate(count.max(1));
    pts
}

/// Related pairs for sampling universally quantified axioms: structured probes
/// first, then candidates biased towards pairs that are likely related.
fn sample_related_pairs<R: Relation + ?Sized>(
    rel: &R,
    dim: usize,
    count: usize,
    seed: u64,
) -> Vec<(GroupPoint, GroupPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0fa1);
    let e1 = GroupPoint::basis(dim, 0);
    let zero = GroupPoint::zero(dim);
    let mut candidates = vec![
        (e1.clone(), e1.clone()),
        (e1.clone(), -&e1),
        (zero.clone(), zero.clone()),
        (zero.clone(), e1.clone()),
        (e1.clone(), zero.clone()),
    ];
    if dim >= 2 {
        candidates.push((e1.clone(), GroupPoint::basis(dim, 1)));
    }
    let mut out: Vec<_> = candidates
        .into_iter()
        .filter(|(x, y)| rel.relates(x, y))
        .take(count)
        .collect();

    let max_attempts = 20 * count.max(1);
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let x = random_point(&mut rng, dim);
        let y = match attempts % 6 {
            0 => random_point(&mut rng, dim),
            1 => match quarter_turn(&x) {
                Some(t) => t.scale_i64(rng.gen_range(-3..=3)),
                None => random_point(&mut rng, dim),
            },
            2 => x.clone(),
            3 => -&x,
            4 => GroupPoint::zero(dim),
            _ => {
                // Orthogonal completion of x against a random vector in the
                // first two coordinates.
                let w = random_point(&mut rng, dim);
                if dim >= 2 {
                    let mut y = w.clone();
                    y.0[0] = &x.0[1] * &w.0[0];
                    y.0[1] = -&x.0[0] * &w.0[0];
                    for i in 2..dim {
                        y.0[i] = BigInt::zero();
                    }
                    y
                } else {
                    w
                }
            }
        };
        if rel.relates(&x, &y) {
            out.push((x, y));
        }
    }
    out
}

/// Fechner–Sikorska axioms: (1) `x ⊥ y ⇒ x ⊥ −y, −x ⊥ y, 2x ⊥ 2y`;
/// (2) every `x` admits `y` with `x ⊥ y` and `x + y ⊥ x − y`.
pub fn check_fs_axioms<R: Relation + ?Sized>(
    rel: &R,
    dim: usize,
    sample_count: usize,
    seed: u64,
) -> AxiomReport {
    let mut closure = CheckBuilder::new("fs-1 sign/doubling closure");
    for (x, y) in sample_related_pairs(rel, dim, sample_count, seed) {
        let nx = -&x;
        let ny = -&y;
        let (x2, y2) = (x.scale_i64(2), y.scale_i64(2));
        let failed = if !rel.relates(&x, &ny) {
            Some("x ⊥ -y")
        } else if !rel.relates(&nx, &y) {
            Some("-x ⊥ y")
        } else if !rel.relates(&x2, &y2) {
            Some("2x ⊥ 2y")
        } else {
            None
        };
        let nontrivial = !x.is_zero() && !y.is_zero();
        closure.record(failed.is_none(), nontrivial, || {
            format!("({x}, {y}): {} fails", failed.unwrap_or_default())
        });
    }

    let points = sample_points(dim, sample_count, seed);
    let existence = if points.iter().all(|x| rel.fs_witness(x).is_some()) {
        let mut b = CheckBuilder::new("fs-2 witness existence");
        for x in &points {
            let y = rel.fs_witness(x).expect("checked above");
            let ok = rel.relates(x, &y) && rel.relates(&(x + &y), &(x - &y));
            b.record(ok, !x.is_zero(), || {
                format!("x={x}, witness y={y}: x ⊥ y and x+y ⊥ x-y do not both hold")
            });
        }
        b.finish()
    } else {
        CheckBuilder::not_checkable(
            "fs-2 witness existence",
            "relation supplies no witness for some sampled x",
        )
    };

    let mut report = AxiomReport::new(format!(
        "Fechner-Sikorska axioms for {} on Z^{dim}",
        rel.name()
    ));
    report.checks = vec![closure.finish(), existence];
    report
}

fn zero_pairs_check<R: Relation + ?Sized>(rel: &R, points: &[GroupPoint]) -> CheckBuilder {
    let mut b = CheckBuilder::new("a: 0 ⊥ x and x ⊥ 0");
    let dim = points.first().map(GroupPoint::dim).unwrap_or(0);
    let zero = GroupPoint::zero(dim);
    for x in points {
        let ok = rel.relates(&zero, x) && rel.relates(x, &zero);
        b.record(ok, !x.is_zero(), || format!("x={x}: 0 ⊥ x or x ⊥ 0 fails"));
    }
    b
}

/// Generalized Cauchy orthogonality: (a) zero pairs; (b) `x ⊥ x ⇒ x ⊥ −x`.
pub fn check_gc_axioms<R: Relation + ?Sized>(
    rel: &R,
    dim: usize,
    sample_count: usize,
    seed: u64,
) -> AxiomReport {
    let points = sample_points(dim, sample_count, seed);
    let zero = zero_pairs_check(rel, &points);
    let mut diag = CheckBuilder::new("b: x ⊥ x ⇒ x ⊥ -x");
    for x in points.iter().filter(|x| rel.relates(x, x)) {
        diag.record(rel.relates(x, &-x), !x.is_zero(), || {
            format!("x={x}: x ⊥ x but not x ⊥ -x")
        });
    }
    let mut report = AxiomReport::new(format!(
        "generalized Cauchy orthogonality for {} on Z^{dim}",
        rel.name()
    ));
    report.checks = vec![zero.finish(), diag.finish()];
    report
}

/// The relation properties used for the quadratic equation:
/// (a) zero pairs; (b) `x ⊥ x ⇒ −x ⊥ −x` and `x ⊥ −x`.
pub fn check_sec3_axioms<R: Relation + ?Sized>(
    rel: &R,
    dim: usize,
    sample_count: usize,
    seed: u64,
) -> AxiomReport {
    let points = sample_points(dim, sample_count, seed);
    let zero = zero_pairs_check(rel, &points);
    let mut diag = CheckBuilder::new("b: x ⊥ x ⇒ -x ⊥ -x, x ⊥ -x");
    for x in points.iter().filter(|x| rel.relates(x, x)) {
        let nx = -x;
        let ok = rel.relates(&nx, &nx) && rel.relates(x, &nx);
        diag.record(ok, !x.is_zero(), || {
            format!("x={x}: x ⊥ x but -x ⊥ -x or x ⊥ -x fails")
        });
    }
    let mut report = AxiomReport::new(format!(
        "quadratic-equation relation properties for {} on Z^{dim}",
        rel.name()
    ));
    report.checks = vec![zero.finish(), diag.finish()];
    report
}

/// Relative tolerance for real inner-product orthogonality.
pub const REAL_ORTHO_RTOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Inner-product orthogonality on `R^d` up to a relative tolerance.
pub fn real_orthogonal(x: &[f64], y: &[f64]) -> bool {
    dot(x, y).abs() <= REAL_ORTHO_RTOL * norm(x) * norm(y)
}

/// Witness for the fourth Rätz axiom: `y = √λ·|x|·u` where `u` is a unit
/// vector orthogonal to `x` inside `span(x, direction)`. Without a direction,
/// the plane is the first two coordinates (quarter turn) in `R^2`, otherwise
/// the coordinate axis where `x` is smallest.
pub fn ratz_witness(x: &[f64], lambda: f64, direction: Option<&[f64]>) -> Vec<f64> {
    let d = x.len();
    let nx = norm(x);
    if nx == 0.0 {
        return vec![0.0; d];
    }
    let w: Vec<f64> = match direction {
        Some(w) => w.to_vec(),
        None if d == 2 => vec![-x[1], x[0]],
        None => {
            let j = (0..d)
                .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
                .unwrap_or(0);
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            e
        }
    };
    let proj = dot(&w, x) / (nx * nx);
    let mut u: Vec<f64> = w.iter().zip(x).map(|(wi, xi)| wi - proj * xi).collect();
    let nu = norm(&u);
    for v in &mut u {
        *v /= nu;
    }
    let scale = lambda.sqrt() * nx;
    u.iter().map(|v| v * scale).collect()
}

/// Rätz axioms for inner-product orthogonality on real vector samples in `R^dim`.
pub fn check_ratz_axioms(dim: usize, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "Rätz orthogonality needs dimension at least 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vec_sample =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.gen_range(-10.0..=10.0)).collect() };
    let fmt_vec = |v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|c| format!("{c:.6}")).collect();
        format!("({})", parts.join(", "))
    };

    let mut zero_ax = CheckBuilder::new("ratz-1 zero pairs");
    let mut indep = CheckBuilder::new("ratz-2 linear independence");
    let mut homog = CheckBuilder::new("ratz-3 scalar closure");
    let mut witness = CheckBuilder::new("ratz-4 witness");
    let zero = vec![0.0; dim];

    for i in 0..sample_count {
        let x = if i == 0 { zero.clone() } else { vec_sample(&mut rng) };
        zero_ax.record(real_orthogonal(&x, &zero) && real_orthogonal(&zero, &x), i > 0, || {
            format!("x={}", fmt_vec(&x))
        });

        // A related pair: orthogonal completion of a random vector against x.
        let w = vec_sample(&mut rng);
        let nx2 = dot(&x, &x);
        let y: Vec<f64> = if nx2 == 0.0 {
            w.clone()
        } else {
            let p = dot(&w, &x) / nx2;
            w.iter().zip(&x).map(|(wi, xi)| wi - p * xi).collect()
        };
        if real_orthogonal(&x, &y) && nx2 > 0.0 && norm(&y) > 0.0 {
            let gram = nx2 * dot(&y, &y) - dot(&x, &y).powi(2);
            indep.record(gram > REAL_ORTHO_RTOL * nx2 * dot(&y, &y), true, || {
                format!("x={}, y={}", fmt_vec(&x), fmt_vec(&y))
            });
            let a: f64 = rng.gen_range(-5.0..=5.0);
            let b: f64 = rng.gen_range(-5.0..=5.0);
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let by: Vec<f64> = y.iter().map(|v| b * v).collect();
            homog.record(real_orthogonal(&ax, &by), true, || {
                format!("x={}, y={}, a={a}, b={b}", fmt_vec(&x), fmt_vec(&y))
            });
        }

        let lambda: f64 = match i % 4 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=10.0),
        };
        let dir = vec_sample(&mut rng);
        let y = ratz_witness(&x, lambda, if dim == 2 { None } else { Some(&dir) });
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let t: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lambda * a - b).collect();
        let ok = real_orthogonal(&x, &y) && real_orthogonal(&s, &t);
        witness.record(ok, nx2 > 0.0, || {
            format!("x={}, lambda={lambda}, y={}", fmt_vec(&x), fmt_vec(&y))
        });
    }

    let mut report = AxiomReport::new(format!("Rätz axioms for inner-product orthogonality on R^{dim}"));
    report.checks = vec![zero_ax.finish(), indep.finish(), homog.finish(), witness.finish()];
    Ok(report)
}
