//! Reward functions and the exponentiated payoff distribution.
//!
//! Two forms are exposed. [`exact_payoff`] is the closed-form distribution
//! `q(y~) ∝ exp(r(y, y~)/τ)` over a finite, enumerable candidate set; it is
//! intractable for continuous boxes, so the sampling pipeline instead bins
//! Monte Carlo candidates by their discretized IoU reward index and uses
//! [`bin_payoff`]: `Q = softmax(log |B[I_r]| − I_r/τ)`, which weights each
//! occupied bin by its candidate count times `exp(−I_r/τ)`.
//!
//! All logarithms are natural; entropies and divergences are in nats.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::BBox;
use crate::math;
use crate::sampler::RngStream;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PayoffError {
    /// Temperature must be strictly positive.
    NonPositiveTemperature,
    /// No candidates / no occupied bins to normalize over.
    EmptySupport,
    /// Support and probability (or reward) lists disagree in length.
    LengthMismatch,
    /// Probabilities are negative, non-finite, or do not sum to one.
    NotADistribution,
    /// KL requires both distributions on the identical support.
    SupportMismatch,
    /// KL is undefined where q > 0 but p = 0.
    ZeroDenominator,
}

impl fmt::Display for PayoffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayoffError::NonPositiveTemperature => write!(f, "temperature must be > 0"),
            PayoffError::EmptySupport => write!(f, "empty candidate support"),
            PayoffError::LengthMismatch => write!(f, "support/probability length mismatch"),
            PayoffError::NotADistribution => write!(f, "probabilities do not form a distribution"),
            PayoffError::SupportMismatch => write!(f, "distributions have different supports"),
            PayoffError::ZeroDenominator => write!(f, "q is positive where p is zero"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PayoffError {}

/// Reversed 0–99 discretization of an IoU score: `I_r = max(0, 99 − ⌊100·IoU⌋)`.
///
/// Lower index means higher IoU; index 0 holds candidates with IoU ≥ 0.99.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewardIndex(u8);

impl RewardIndex {
    pub const MIN: RewardIndex = RewardIndex(0);
    pub const MAX: RewardIndex = RewardIndex(99);

    /// Discretize an IoU score in `[0, 1]`.
    #[inline]
    pub fn from_iou(iou: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&iou));
        // Truncation equals floor for the non-negative product.
        let idx = 99i64 - (100.0 * iou) as i64;
        RewardIndex(idx.max(0) as u8)
    }

    /// Construct from a raw index value; values above 99 are rejected.
    pub fn from_value(v: u8) -> Option<Self> {
        (v <= 99).then_some(RewardIndex(v))
    }

    pub fn value(&self) -> u8 {
        self.0
    }
}

impl fmt::Display for RewardIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// IoU reward between a ground-truth box and a candidate.
pub fn reward_iou(gt: &BBox, cand: &BBox) -> f64 {
    gt.iou(cand)
}

/// Negated character-level Levenshtein distance.
///
/// This is the text-metric baseline that cannot order coordinate strings by
/// spatial proximity: against truth "0.88", the candidates "0.58" and "0.85"
/// both score −1 even though 0.85 is far closer.
pub fn reward_edit(gt_text: &str, cand_text: &str) -> f64 {
    -(levenshtein(gt_text, cand_text) as f64)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Candidate boxes grouped by reward index, as built by the Monte Carlo
/// sampling loop. Storage is a flat 100-slot table indexed by `I_r`, so
/// iteration is always in ascending index order and the per-candidate insert
/// on the hot sampling path is a direct index.
#[derive(Clone, Debug)]
pub struct PayoffBins {
    slots: [Vec<BBox>; 100],
    total: u64,
}

impl Default for PayoffBins {
    fn default() -> Self {
        Self {
            slots: core::array::from_fn(|_| Vec::new()),
            total: 0,
        }
    }
}

impl PayoffBins {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drop all candidates but keep slot capacity for reuse.
    pub fn clear(&mut self) {
        for slot in &mut self.slots {
            slot.clear();
        }
        self.total = 0;
    }

    pub fn add(&mut self, index: RewardIndex, candidate: BBox) {
        self.slots[index.value() as usize].push(candidate);
        self.total += 1;
    }

    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of occupied bins.
    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| !s.is_empty()).count()
    }

    /// Lowest occupied reward index (highest IoU present).
    pub fn min_index(&self) -> Option<RewardIndex> {
        self.slots
            .iter()
            .position(|s| !s.is_empty())
            .map(|i| RewardIndex(i as u8))
    }

    pub fn candidates(&self, index: RewardIndex) -> Option<&[BBox]> {
        let slot = &self.slots[index.value() as usize];
        (!slot.is_empty()).then_some(slot.as_slice())
    }

    /// Occupied `(index, count)` pairs in ascending index order.
    pub fn counts(&self) -> impl Iterator<Item = (RewardIndex, u64)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(i, s)| (RewardIndex(i as u8), s.len() as u64))
    }
}

/// A finite distribution over labelled outcomes.
///
/// Probabilities are non-negative and sum to one within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution<L> {
    support: Vec<L>,
    probs: Vec<f64>,
}

impl<L> DiscreteDistribution<L> {
    pub fn new(support: Vec<L>, probs: Vec<f64>) -> Result<Self, PayoffError> {
        if support.is_empty() {
            return Err(PayoffError::EmptySupport);
        }
        if support.len() != probs.len() {
            return Err(PayoffError::LengthMismatch);
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(PayoffError::NotADistribution);
        }
        let sum: f64 = probs.iter().sum();
        if math::abs(sum - 1.0) > 1e-12 {
            return Err(PayoffError::NotADistribution);
        }
        Ok(Self { support, probs })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[L] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, label: &L) -> Option<f64>
    where
        L: PartialEq,
    {
        self.support
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }

    /// Shannon entropy in nats, with `0·ln 0 := 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * math::ln(p))
            .sum::<f64>()
    }

    /// Draw an index from the distribution by inverse-CDF scan.
    pub fn sample_index(&self, rng: &mut RngStream) -> usize {
        let u: f64 = rng.uniform_01();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// `KL(q ‖ p) = Σ q ln(q/p)` in nats; both distributions must share the
/// identical support.
pub fn kl<L: PartialEq>(
    q: &DiscreteDistribution<L>,
    p: &DiscreteDistribution<L>,
) -> Result<f64, PayoffError> {
    if q.support != p.support {
        return Err(PayoffError::SupportMismatch);
    }
    let mut acc = 0.0;
    for (qi, pi) in q.probs.iter().zip(&p.probs) {
        if *qi > 0.0 {
            if *pi <= 0.0 {
                return Err(PayoffError::ZeroDenominator);
            }
            acc += qi * math::ln(qi / pi);
        }
    }
    Ok(acc)
}

/// Numerically stable softmax (max-subtraction, explicit renormalization).
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| math::exp(z - max)).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Binned Monte Carlo form of the payoff distribution over reward indices:
/// probability of occupied bin `I` is proportional to `|B[I]|·exp(−I/τ)`.
pub fn bin_payoff(
    bins: &PayoffBins,
    tau: f64,
) -> Result<DiscreteDistribution<RewardIndex>, PayoffError> {
    let counts: Vec<(RewardIndex, u64)> = bins.counts().collect();
    payoff_from_counts(&counts, tau)
}

/// [`bin_payoff`] on a bare `(index, count)` census. This is what an oracle
/// pooling candidate counts across many sampling calls evaluates; bins with a
/// zero count are rejected.
pub fn payoff_from_counts(
    counts: &[(RewardIndex, u64)],
    tau: f64,
) -> Result<DiscreteDistribution<RewardIndex>, PayoffError> {
    if !(tau > 0.0) {
        return Err(PayoffError::NonPositiveTemperature);
    }
    if counts.is_empty() {
        return Err(PayoffError::EmptySupport);
    }
    if counts.iter().any(|(_, c)| *c == 0) {
        return Err(PayoffError::EmptySupport);
    }
    let logits: Vec<f64> = counts
        .iter()
        .map(|(idx, c)| math::ln(*c as f64) - idx.value() as f64 / tau)
        .collect();
    let probs = softmax(&logits);
    let support: Vec<RewardIndex> = counts.iter().map(|(idx, _)| *idx).collect();
    DiscreteDistribution::new(support, probs)
}

/// Exact exponentiated payoff distribution `q(y~) ∝ exp(r/τ)` over an
/// enumerable candidate set with precomputed rewards.
pub fn exact_payoff<L: Clone>(
    candidates: &[L],
    rewards: &[f64],
    tau: f64,
) -> Result<DiscreteDistribution<L>, PayoffError> {
    if !(tau > 0.0) {
        return Err(PayoffError::NonPositiveTemperature);
    }
    if candidates.is_empty() {
        return Err(PayoffError::EmptySupport);
    }
    if candidates.len() != rewards.len() {
        return Err(PayoffError::LengthMismatch);
    }
    let logits: Vec<f64> = rewards.iter().map(|r| r / tau).collect();
    let probs = softmax(&logits);
    DiscreteDistribution::new(candidates.to_vec(), probs)
}

/// Serialize a box the way [`reward_edit`] sees coordinates: the 2-decimal
/// text form.
pub fn coord_text(b: &BBox) -> String {
    b.coord_string()
}
