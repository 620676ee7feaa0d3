//! Fixed point data of a circle action: a multiset of fixed points, each
//! carrying the multiset of its nonzero weights.
//!
//! Everything here is dimension generic. The text format is one fixed point
//! per line, weights separated by commas, with `#` starting a comment:
//!
//! ```text
//! # CP^2 with a = b = 1
//! 1, 2
//! -1, 1
//! -1, -2
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpDataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("fixed point has {found} weights, expected {expected}")]
    NonUniform { expected: usize, found: usize },
    #[error("weight 0 is not allowed")]
    ZeroWeight,
    #[error("a fixed point needs at least one weight")]
    EmptyPoint,
    #[error("no fixed points, so the dimension cannot be inferred")]
    NoPoints,
    #[error("chi_y needs at least one fixed point")]
    Empty,
    #[error("chi^{i} depends on t: {values:?}")]
    NotConstant { i: usize, values: Vec<String> },
    #[error("chi^{i} = {value} is not an integer")]
    NonInteger { i: usize, value: String },
    #[error("chi^{i} = {chi} but (-1)^i N_{i} = {expected}")]
    IndexMismatch { i: usize, chi: i64, expected: i64 },
    #[error("sample point hits a pole of the fixed point sum")]
    PoleCollision,
    #[error("Chern numbers are defined here only for n = 2 (got n = {0})")]
    WrongDimension(usize),
    #[error("weight {0} is not +1 or -1")]
    NotSemiFree(i64),
    #[error("weight {0} is too large to evaluate")]
    WeightTooLarge(i64),
}

/// The weights at one fixed point, kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct WeightMultiset(Vec<i64>);

impl WeightMultiset {
    pub fn new(mut weights: Vec<i64>) -> Result<Self, FpDataError> {
        if weights.is_empty() {
            return Err(FpDataError::EmptyPoint);
        }
        if weights.contains(&0) {
            return Err(FpDataError::ZeroWeight);
        }
        weights.sort_unstable();
        Ok(WeightMultiset(weights))
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of negative weights.
    pub fn index(&self) -> usize {
        self.0.iter().filter(|w| **w < 0).count()
    }

    /// Multiset union.
    pub fn union(&self, other: &WeightMultiset) -> WeightMultiset {
        let mut w = self.0.clone();
        w.extend_from_slice(&other.0);
        w.sort_unstable();
        WeightMultiset(w)
    }
}

impl TryFrom<Vec<i64>> for WeightMultiset {
    type Error = FpDataError;
    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        WeightMultiset::new(v)
    }
}

impl From<WeightMultiset> for Vec<i64> {
    fn from(w: WeightMultiset) -> Self {
        w.0
    }
}

impl fmt::Display for WeightMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FixedPointData {
    n: usize,
    points: Vec<WeightMultiset>,
}

impl FixedPointData {
    pub fn new(n: usize, mut points: Vec<WeightMultiset>) -> Result<Self, FpDataError> {
        for p in &points {
            if p.len() != n {
                return Err(FpDataError::NonUniform {
                    expected: n,
                    found: p.len(),
                });
            }
        }
        points.sort();
        Ok(FixedPointData { n, points })
    }

    pub fn empty(n: usize) -> Self {
        FixedPointData {
            n,
            points: Vec::new(),
        }
    }

    /// Builds data from raw weight lists, inferring `n` from the first one.
    pub fn from_weights<I>(lists: I) -> Result<Self, FpDataError>
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let points = lists
            .into_iter()
            .map(WeightMultiset::new)
            .collect::<Result<Vec<_>, _>>()?;
        let n = points.first().ok_or(FpDataError::NoPoints)?.len();
        FixedPointData::new(n, points)
    }

    /// The standard rotation of S^2: one fixed point of each index.
    pub fn sphere_rotation() -> Self {
        FixedPointData::from_weights([vec![1], vec![-1]]).expect("static data")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[WeightMultiset] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiset union of two data sets of the same dimension.
    pub fn disjoint_union(&self, other: &FixedPointData) -> Result<Self, FpDataError> {
        if self.n != other.n {
            return Err(FpDataError::NonUniform {
                expected: self.n,
                found: other.n,
            });
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        FixedPointData::new(self.n, points)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let parts: Vec<String> = p.weights().iter().map(|w| w.to_string()).collect();
            out.push_str(&parts.join(","));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for FixedPointData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for FixedPointData {
    type Err = FpDataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut points = Vec::new();
        let mut n = None;
        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let weights = body
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| FpDataError::Parse {
                    line,
                    message: e.to_string(),
                })?;
            let point = WeightMultiset::new(weights).map_err(|e| FpDataError::Parse {
                line,
                message: e.to_string(),
            })?;
            let expected = *n.get_or_insert(point.len());
            if point.len() != expected {
                return Err(FpDataError::Parse {
                    line,
                    message: format!("expected {expected} weights, found {}", point.len()),
                });
            }
            points.push(point);
        }
        let n = n.ok_or(FpDataError::NoPoints)?;
        FixedPointData::new(n, points)
    }
}

/// N_0..N_n.
pub fn index_counts(d: &FixedPointData) -> Vec<u64> {
    let mut counts = vec![0u64; d.n() + 1];
    for p in d.points() {
        counts[p.index()] += 1;
    }
    counts
}

pub fn todd_genus(d: &FixedPointData) -> u64 {
    index_counts(d)[0]
}

/// Sample values of t used for the fixed point sum.
fn sample_points() -> Vec<BigRational> {
    [(2, 1), (3, 1), (5, 2), (7, 3), (11, 4)]
        .iter()
        .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
        .collect()
}

fn rational_pow(t: &BigRational, w: i64) -> Result<BigRational, FpDataError> {
    let e = u32::try_from(w.unsigned_abs()).map_err(|_| FpDataError::WeightTooLarge(w))?;
    let num = t.numer().pow(e);
    let den = t.denom().pow(e);
    Ok(if w >= 0 {
        BigRational::new(num, den)
    } else {
        BigRational::new(den, num)
    })
}

/// Evaluates the fixed point sum for every chi^i at one value of t.
pub fn chi_y_at(d: &FixedPointData, t: &BigRational) -> Result<Vec<BigRational>, FpDataError> {
    let n = d.n();
    let mut total = vec![BigRational::zero(); n + 1];
    for p in d.points() {
        let powers = p
            .weights()
            .iter()
            .map(|&w| rational_pow(t, w))
            .collect::<Result<Vec<_>, _>>()?;
        let mut denom = BigRational::one();
        for x in &powers {
            let factor = BigRational::one() - x;
            if factor.is_zero() {
                return Err(FpDataError::PoleCollision);
            }
            denom *= factor;
        }
        // elementary symmetric polynomials of the t^w
        let mut sigma = vec![BigRational::zero(); n + 1];
        sigma[0] = BigRational::one();
        for x in &powers {
            for j in (1..=n).rev() {
                let add = &sigma[j - 1] * x;
                sigma[j] += add;
            }
        }
        for (acc, s) in total.iter_mut().zip(sigma) {
            *acc += s / &denom;
        }
    }
    Ok(total)
}

/// chi^0..chi^n, checked for independence of t, integrality and agreement
/// with the signed index counts.
pub fn chi_y(d: &FixedPointData) -> Result<Vec<i64>, FpDataError> {
    if d.is_empty() {
        return Err(FpDataError::Empty);
    }
    let mut samples = Vec::new();
    for t in sample_points() {
        match chi_y_at(d, &t) {
            Ok(v) => samples.push(v),
            Err(FpDataError::PoleCollision) => continue,
            Err(e) => return Err(e),
        }
        if samples.len() == 3 {
            break;
        }
    }
    if samples.len() < 3 {
        return Err(FpDataError::PoleCollision);
    }
    let counts = index_counts(d);
    let mut chi = Vec::with_capacity(d.n() + 1);
    for i in 0..=d.n() {
        let first = &samples[0][i];
        if samples.iter().any(|s| &s[i] != first) {
            return Err(FpDataError::NotConstant {
                i,
                values: samples.iter().map(|s| s[i].to_string()).collect(),
            });
        }
        if !first.is_integer() {
            return Err(FpDataError::NonInteger {
                i,
                value: first.to_string(),
            });
        }
        let value = first
            .to_integer()
            .to_i64()
            .ok_or_else(|| FpDataError::NonInteger {
                i,
                value: first.to_string(),
            })?;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let expected = sign * counts[i] as i64;
        if value != expected {
            return Err(FpDataError::IndexMismatch {
                i,
                chi: value,
                expected,
            });
        }
        chi.push(value);
    }
    Ok(chi)
}

/// (c1^2, c2) of a 4-manifold: (10 N_0 - N_1, 2 N_0 + N_1).
pub fn chern_numbers_4d(d: &FixedPointData) -> Result<(i64, i64), FpDataError> {
    if d.n() != 2 {
        return Err(FpDataError::WrongDimension(d.n()));
    }
    let c = index_counts(d);
    let (n0, n1) = (c[0] as i64, c[1] as i64);
    Ok((10 * n0 - n1, 2 * n0 + n1))
}

/// Every weight +w is matched by a -w somewhere.
pub fn weight_pairing_check(d: &FixedPointData) -> bool {
    let mut balance: BTreeMap<i64, i64> = BTreeMap::new();
    for p in d.points() {
        for &w in p.weights() {
            *balance.entry(w.abs()).or_default() += w.signum();
        }
    }
    balance.values().all(|b| *b == 0)
}

/// With a the smallest positive weight: +a at index j is matched by -a at index j + 1.
pub fn smallest_weight_check(d: &FixedPointData) -> bool {
    let Some(a) = d
        .points()
        .iter()
        .flat_map(|p| p.weights().iter().copied())
        .filter(|w| *w > 0)
        .min()
    else {
        return true;
    };
    let n = d.n();
    let mut plus = vec![0usize; n + 1];
    let mut minus = vec![0usize; n + 1];
    for p in d.points() {
        let idx = p.index();
        plus[idx] += p.weights().iter().filter(|w| **w == a).count();
        minus[idx] += p.weights().iter().filter(|w| **w == -a).count();
    }
    (0..n).all(|j| plus[j] == minus[j + 1])
}

/// Some two consecutive index counts are both nonzero. False on empty data.
pub fn adjacent_index_check(d: &FixedPointData) -> bool {
    let c = index_counts(d);
    c.windows(2).any(|w| w[0] > 0 && w[1] > 0)
}

/// All pairs (p, q), with weights unioned.
pub fn product(d1: &FixedPointData, d2: &FixedPointData) -> FixedPointData {
    let mut points = Vec::with_capacity(d1.len() * d2.len());
    for p in d1.points() {
        for q in d2.points() {
            points.push(p.union(q));
        }
    }
    FixedPointData::new(d1.n() + d2.n(), points).expect("uniform sizes")
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// For semi-free data, N_i = N_0 * C(n, i).
pub fn semifree_count_check(d: &FixedPointData) -> Result<bool, FpDataError> {
    for p in d.points() {
        if let Some(&w) = p.weights().iter().find(|w| w.abs() != 1) {
            return Err(FpDataError::NotSemiFree(w));
        }
    }
    let c = index_counts(d);
    let n = d.n() as u64;
    Ok(c
        .iter()
        .enumerate()
        .all(|(i, &ni)| ni == c[0] * binomial(n, i as u64)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub index_counts: Vec<u64>,
    pub todd: u64,
    pub chi: Vec<i64>,
    pub euler: u64,
    /// chi_y at y = 1.
    pub signature: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c1_squared: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c2: Option<i64>,
}

/// Computes every invariant, running the exact chi_y evaluation when there
/// are fixed points (for empty data all sums are zero).
pub fn invariant_report(d: &FixedPointData) -> Result<InvariantReport, FpDataError> {
    let counts = index_counts(d);
    let chi = if d.is_empty() {
        vec![0; d.n() + 1]
    } else {
        chi_y(d)?
    };
    let (c1_squared, c2) = match chern_numbers_4d(d) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(_) => (None, None),
    };
    Ok(InvariantReport {
        todd: counts[0],
        euler: counts.iter().sum(),
        signature: chi.iter().sum(),
        index_counts: counts,
        chi,
        c1_squared,
        c2,
    })
}
