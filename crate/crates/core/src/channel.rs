//! Channel and input-distribution types, and the Chernoff distance between
//! the output distributions of two input letters.
//!
//! Distances are in nats. Disjoint output supports give `f64::INFINITY`, which
//! is carried through every later computation unchanged (`exp(-inf) == 0`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, sum};

/// Row sums may deviate from 1 by less than this and still be accepted.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A discrete memoryless channel `p(y|x)`, rows indexed by input letter.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    transition: Vec<Vec<f64>>,
    log_transition: Vec<Vec<f64>>,
}

impl Channel {
    /// Validates a raw row-stochastic matrix.
    ///
    /// Rows whose sum is within [`STOCHASTIC_TOL`] of 1 are renormalized.
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self> {
        if transition.is_empty() || transition[0].is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let cols = transition[0].len();
        let mut rows = Vec::with_capacity(transition.len());
        for (r, row) in transition.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RaggedRow {
                    row: r,
                    len: row.len(),
                    expected: cols,
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: r, col: c });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
            let total = sum(row.iter().copied());
            if (total - 1.0).abs() >= STOCHASTIC_TOL {
                return Err(Error::NonStochasticRow { row: r, sum: total });
            }
            rows.push(row.into_iter().map(|v| v / total).collect::<Vec<_>>());
        }
        if rows.len() < 2 {
            return Err(Error::InputAlphabetTooSmall(rows.len()));
        }
        let log_transition = rows
            .iter()
            .map(|row| row.iter().map(|p| p.ln()).collect())
            .collect();
        Ok(Self {
            transition: rows,
            log_transition,
        })
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    /// Noiseless channel on `k` letters.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.transition.len()
    }

    pub fn output_size(&self) -> usize {
        self.transition[0].len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.transition[x][y]
    }

    pub(crate) fn log_row(&self, x: usize) -> &[f64] {
        &self.log_transition[x]
    }

    /// Chernoff distances `d_s(x,x') = -ln Σ_y p(y|x)^{1-s} p(y|x')^s`.
    pub fn chernoff_distances(&self, s: f64) -> Result<DistanceMatrix> {
        chernoff_distance_matrix(self, s)
    }
}

/// Probability vector over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p}")));
        }
        let total = sum(probs.iter().copied());
        if (total - 1.0).abs() >= STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// `(1 - p1, p1)` on a binary alphabet.
    pub fn binary(p1: f64) -> Result<Self> {
        Self::new(vec![1.0 - p1, p1])
    }

    /// Checks that the distribution lives on the channel's input alphabet.
    pub fn for_channel(self, ch: &Channel) -> Result<Self> {
        if self.probs.len() != ch.input_size() {
            return Err(Error::DimensionMismatch {
                expected: ch.input_size(),
                got: self.probs.len(),
            });
        }
        Ok(self)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Entropy in nats.
    pub fn entropy(&self) -> f64 {
        -sum(self.probs.iter().map(|&p| crate::numeric::xlnx(p)))
    }
}

/// Pairwise Chernoff distances for one value of `s`, row-major `|X| x |X|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    s: f64,
    size: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from explicit entries, e.g. a user-supplied distortion
    /// measure. Entries must be nonnegative (possibly `+inf`).
    pub fn from_rows(s: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        let mut d = Vec::with_capacity(size * size);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::RaggedRow {
                    row: r,
                    len: row.len(),
                    expected: size,
                });
            }
            for (c, v) in row.into_iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
                d.push(v);
            }
        }
        Ok(Self { s, size, d })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, x2: usize) -> f64 {
        self.d[x * self.size + x2]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.d[x * self.size..(x + 1) * self.size]
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

/// Distance matrix of `ch` at Chernoff parameter `s ∈ [0,1]`.
///
/// At `s = 0` the factor `p(y|x')^0` is the indicator `p(y|x') > 0` (the
/// limit from the right); `s = 1` is handled symmetrically. All sums are
/// accumulated in the log domain.
pub fn chernoff_distance_matrix(ch: &Channel, s: f64) -> Result<DistanceMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s = {s} not in [0,1]")));
    }
    let k = ch.input_size();
    let mut d = vec![0.0; k * k];
    for x in 0..k {
        for x2 in 0..k {
            // Equal rows give Σ_y p(y|x) = 1 for every s; skip the rounding.
            if x == x2 || ch.transition()[x] == ch.transition()[x2] {
                continue;
            }
            let a = ch.log_row(x);
            let b = ch.log_row(x2);
            let terms = a.iter().zip(b).map(|(&la, &lb)| {
                let ta = if s < 1.0 { (1.0 - s) * la } else if la.is_finite() { 0.0 } else { f64::NEG_INFINITY };
                let tb = if s > 0.0 { s * lb } else if lb.is_finite() { 0.0 } else { f64::NEG_INFINITY };
                ta + tb
            });
            let lse = log_sum_exp(terms);
            // Hölder: the sum is at most 1, rounding can push it a hair over.
            d[x * k + x2] = if lse == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (-lse).max(0.0)
            };
        }
    }
    Ok(DistanceMatrix { s, size: k, d })
}

/// `Σ_{x,x'} q(x) q(x') d(x,x')`; `+inf` when an infinite entry carries
/// positive weight.
pub fn expected_distance(dm: &DistanceMatrix, q: &InputDistribution) -> Result<f64> {
    if q.len() != dm.size() {
        return Err(Error::DimensionMismatch {
            expected: dm.size(),
            got: q.len(),
        });
    }
    let p = q.probs();
    let mut terms = Vec::with_capacity(p.len() * p.len());
    for (x, &qx) in p.iter().enumerate() {
        for (x2, &qx2) in p.iter().enumerate() {
            let w = qx * qx2;
            if w == 0.0 {
                continue;
            }
            let d = dm.get(x, x2);
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            terms.push(w * d);
        }
    }
    Ok(sum(terms))
}

/// On-disk channel description: `{"transition": [[...]], "input": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub transition: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<f64>>,
}

impl ChannelSpec {
    /// Validated channel and input distribution; a missing `input` means
    /// uniform.
    pub fn build(&self) -> Result<(Channel, InputDistribution)> {
        let ch = Channel::new(self.transition.clone())?;
        let q = match &self.input {
            Some(p) => InputDistribution::new(p.clone())?,
            None => InputDistribution::uniform(ch.input_size()),
        }
        .for_channel(&ch)?;
        Ok((ch, q))
    }
}
