//! IoU-based Monte Carlo coordinate sampling and deterministic augmentation.
//!
//! One augmentation draw perturbs the ground-truth box `N` times with
//! independent uniform coordinate noise, bins valid perturbations by reward
//! index, weights the occupied bins by the exponentiated payoff distribution,
//! picks a bin, and picks a candidate uniformly inside it. Invalid
//! perturbations (inverted or flattened after clamping) are resampled and
//! never enter the bins, so bin statistics reflect genuinely valid
//! candidates only.
//!
//! Every random decision flows through an [`RngStream`] derived from a
//! `(master_seed, record, element, replica)` tuple, so augmenting a dataset
//! is a pure function of its bytes and the configuration: parallel and
//! serial runs produce identical output.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::UIElement;
use crate::geometry::{BBox, RawBBox};
use crate::math;
use crate::payoff::{bin_payoff, PayoffBins, PayoffError, RewardIndex};

/// All knobs of one augmentation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AugmentationConfig {
    /// Maximum coordinate deviation in normalized units, in `(0, 1)`.
    pub epsilon: f64,
    /// Monte Carlo iterations per box.
    pub n_trials: u32,
    /// Payoff temperature.
    pub tau: f64,
    /// Samples per original, original included (replica 0 is the original).
    pub k_replicas: u32,
    /// Seed from which every per-(record, element, replica) stream derives.
    pub master_seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.02,
            n_trials: 10_000,
            tau: 3.0,
            k_replicas: 4,
            master_seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(SampleError::InvalidConfig("epsilon must be in (0, 1)"));
        }
        if self.n_trials == 0 {
            return Err(SampleError::InvalidConfig("n_trials must be >= 1"));
        }
        if !(self.tau > 0.0) {
            return Err(SampleError::InvalidConfig("tau must be > 0"));
        }
        if self.k_replicas == 0 {
            return Err(SampleError::InvalidConfig("k_replicas must be >= 1"));
        }
        Ok(())
    }
}

/// How replacement boxes are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Bin candidates by reward index and sample through the exponentiated
    /// payoff distribution.
    IouPayoff,
    /// Uniform draw from the valid perturbations, ignoring the payoff
    /// weighting (the random-noise baseline).
    UniformNoise,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampleError {
    InvalidConfig(&'static str),
    /// Fewer than `wanted` valid perturbations were produced within the
    /// 10x attempt budget (pathological epsilon for the given box).
    InsufficientValidCandidates { wanted: u32, produced: u32 },
    Payoff(PayoffError),
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::InvalidConfig(msg) => write!(f, "invalid augmentation config: {msg}"),
            SampleError::InsufficientValidCandidates { wanted, produced } => write!(
                f,
                "only {produced} of {wanted} valid perturbations within the attempt budget"
            ),
            SampleError::Payoff(e) => write!(f, "payoff error: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SampleError {}

impl From<PayoffError> for SampleError {
    fn from(e: PayoffError) -> Self {
        SampleError::Payoff(e)
    }
}

/// Deterministic pseudo-random stream. ChaCha8 keyed by a derived seed:
/// identical seeds produce identical sequences on every platform.
#[derive(Clone, Debug)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn from_words(words: [u64; 4]) -> Self {
        let mut seed = [0u8; 32];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        Self(ChaCha8Rng::from_seed(seed))
    }

    /// Convenience stream keyed by a single value (tests, one-off draws).
    pub fn from_seed_value(seed: u64) -> Self {
        let mut s = seed;
        Self::from_words([
            split_mix64(&mut s),
            split_mix64(&mut s),
            split_mix64(&mut s),
            split_mix64(&mut s),
        ])
    }

    /// Uniform draw in `[0, 1)`: the top 53 bits of one ChaCha word.
    #[inline]
    pub fn uniform_01(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in the symmetric interval `[-bound, bound)`.
    #[inline]
    pub fn uniform_sym(&mut self, bound: f64) -> f64 {
        2.0 * bound * self.uniform_01() - bound
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }

    /// Standard normal draw via Box-Muller (two uniforms per call).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform_01(); // (0, 1]
        let u2 = self.uniform_01();
        math::box_muller(u1, u2)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Direct access for call sites that want the `rand` traits.
    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}

pub(crate) fn split_mix64_step(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

use split_mix64_step as split_mix64;

/// Derive the stream for one `(record, element, replica)` work item.
///
/// Each tuple component is mixed through its own bijective SplitMix64 step,
/// so distinct tuples map to distinct 256-bit seeds and a worker can derive
/// its stream without coordination.
pub fn derive_stream(
    master_seed: u64,
    record_idx: u64,
    element_idx: u32,
    replica_idx: u32,
) -> RngStream {
    let mut w0 = master_seed;
    let mut w1 = record_idx;
    let mut w2 = ((element_idx as u64) << 32) | replica_idx as u64;
    let w0 = split_mix64(&mut w0);
    let w1 = split_mix64(&mut w1);
    let w2 = split_mix64(&mut w2);
    let mut w3 = w0 ^ w1.rotate_left(21) ^ w2.rotate_left(42);
    let w3 = split_mix64(&mut w3);
    RngStream::from_words([w0, w1, w2, w3])
}

/// Shift each coordinate by an independent uniform draw from
/// `[-epsilon, epsilon]`. Output is deliberately unvalidated.
///
/// Draw order is fixed as `(x_min, y_min, x_max, y_max)`; the determinism
/// contract depends on it.
pub fn perturb(b: &BBox, epsilon: f64, rng: &mut RngStream) -> RawBBox {
    RawBBox::new(
        b.x_min() + rng.uniform_sym(epsilon),
        b.y_min() + rng.uniform_sym(epsilon),
        b.x_max() + rng.uniform_sym(epsilon),
        b.y_max() + rng.uniform_sym(epsilon),
    )
}

fn collect_bins_budgeted(
    bins: &mut PayoffBins,
    center: &BBox,
    epsilon: f64,
    n_trials: u32,
    budget: u64,
    rng: &mut RngStream,
) -> Result<(), SampleError> {
    bins.clear();
    let mut attempts = 0u64;
    let mut produced = 0u32;
    while produced < n_trials {
        if attempts >= budget {
            return Err(SampleError::InsufficientValidCandidates {
                wanted: n_trials,
                produced,
            });
        }
        attempts += 1;
        if let Ok(candidate) = perturb(center, epsilon, rng).validate() {
            let idx = RewardIndex::from_iou(center.iou(&candidate));
            bins.add(idx, candidate);
            produced += 1;
        }
    }
    Ok(())
}

/// Run the `N`-trial perturbation census for one box, reusing the bin
/// storage of `bins`.
pub fn collect_bins_into(
    bins: &mut PayoffBins,
    center: &BBox,
    epsilon: f64,
    n_trials: u32,
    rng: &mut RngStream,
) -> Result<(), SampleError> {
    collect_bins_budgeted(bins, center, epsilon, n_trials, 10 * n_trials as u64, rng)
}

/// Allocating variant of [`collect_bins_into`].
pub fn collect_bins(
    center: &BBox,
    epsilon: f64,
    n_trials: u32,
    rng: &mut RngStream,
) -> Result<PayoffBins, SampleError> {
    let mut bins = PayoffBins::new();
    collect_bins_into(&mut bins, center, epsilon, n_trials, rng)?;
    Ok(bins)
}

/// Pick a bin through the payoff distribution, then a candidate uniformly
/// within the bin.
pub fn sample_from_bins(
    bins: &PayoffBins,
    tau: f64,
    rng: &mut RngStream,
) -> Result<BBox, SampleError> {
    let dist = bin_payoff(bins, tau)?;
    let bin = dist.support()[dist.sample_index(rng)];
    let candidates = bins
        .candidates(bin)
        .expect("sampled bin is occupied by construction");
    Ok(candidates[rng.below(candidates.len())])
}

/// One full augmentation draw for a single box (the payoff strategy).
pub fn augment_bbox(
    b: &BBox,
    cfg: &AugmentationConfig,
    rng: &mut RngStream,
) -> Result<BBox, SampleError> {
    cfg.validate()?;
    let bins = collect_bins(b, cfg.epsilon, cfg.n_trials, rng)?;
    sample_from_bins(&bins, cfg.tau, rng)
}

/// Uniform-noise baseline: a single valid perturbation, which is a uniform
/// draw from the valid-perturbation distribution.
pub fn uniform_bbox(b: &BBox, epsilon: f64, rng: &mut RngStream) -> Result<BBox, SampleError> {
    const ATTEMPTS: u32 = 10_000;
    for _ in 0..ATTEMPTS {
        if let Ok(candidate) = perturb(b, epsilon, rng).validate() {
            return Ok(candidate);
        }
    }
    Err(SampleError::InsufficientValidCandidates {
        wanted: 1,
        produced: 0,
    })
}

/// Replace an element's box with a sampled one; type and description pass
/// through untouched. A per-element `epsilon` override wins over the global
/// value.
pub fn augment_element(
    e: &UIElement,
    cfg: &AugmentationConfig,
    strategy: Strategy,
    rng: &mut RngStream,
) -> Result<UIElement, SampleError> {
    cfg.validate()?;
    let epsilon = e.epsilon.unwrap_or(cfg.epsilon);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SampleError::InvalidConfig(
            "per-element epsilon must be in (0, 1)",
        ));
    }
    let bbox = match strategy {
        Strategy::IouPayoff => {
            let bins = collect_bins(&e.bbox, epsilon, cfg.n_trials, rng)?;
            sample_from_bins(&bins, cfg.tau, rng)?
        }
        Strategy::UniformNoise => uniform_bbox(&e.bbox, epsilon, rng)?,
    };
    Ok(UIElement {
        element_type: e.element_type.clone(),
        bbox,
        description: e.description.clone(),
        epsilon: e.epsilon,
    })
}

/// Augment every element of an ordered sequence independently, preserving
/// order and length.
///
/// Each element gets its own stream derived from
/// `(master_seed, record_idx, element_idx, replica_idx)`, so an element's
/// output never depends on its neighbours' contents or on how much
/// randomness they consumed.
pub fn augment_sequence(
    elems: &[UIElement],
    cfg: &AugmentationConfig,
    strategy: Strategy,
    record_idx: u64,
    replica_idx: u32,
) -> Result<Vec<UIElement>, SampleError> {
    elems
        .iter()
        .enumerate()
        .map(|(element_idx, e)| {
            let mut rng = derive_stream(
                cfg.master_seed,
                record_idx,
                element_idx as u32,
                replica_idx,
            );
            augment_element(e, cfg, strategy, &mut rng)
        })
        .collect()
}

/// Produce the `k_replicas` training views of one record's elements.
/// Replica 0 is always the originals, verbatim.
pub fn augment_replicas(
    elems: &[UIElement],
    cfg: &AugmentationConfig,
    strategy: Strategy,
    record_idx: u64,
) -> Result<Vec<Vec<UIElement>>, SampleError> {
    cfg.validate()?;
    let mut replicas = Vec::with_capacity(cfg.k_replicas as usize);
    replicas.push(elems.to_vec());
    for replica_idx in 1..cfg.k_replicas {
        replicas.push(augment_sequence(
            elems,
            cfg,
            strategy,
            record_idx,
            replica_idx,
        )?);
    }
    Ok(replicas)
}
