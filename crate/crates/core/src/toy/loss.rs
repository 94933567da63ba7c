//! The MLE / IAML / reward-weighted loss family with analytic gradients.
//!
//! The IAML loss is the Monte Carlo realization of training toward the
//! exponentiated payoff distribution: materialize `k` replica passes of the
//! dataset (pass 0 verbatim originals, later passes sampled around the
//! ground truth) and take the mean teacher-forced negative log-likelihood
//! over the replica batch. With `k_replicas = 1` it is exactly the MLE loss
//! on the original batch.

use alloc::vec;
use alloc::vec::Vec;

use crate::element::UIElement;
use crate::sampler::{augment_replicas, AugmentationConfig, SampleError, Strategy};
use crate::toy::model::ToyModel;
use crate::toy::screens::SyntheticScreen;
use crate::toy::token::encode_box;

/// One training example: input features, target token sequence, and the
/// sequence-level reward its targets carry (mean element IoU against ground
/// truth; 1.0 for verbatim originals).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainItem {
    pub features: Vec<f64>,
    pub tokens: Vec<usize>,
    pub reward: f64,
}

/// Concatenated coordinate tokens of an ordered element list (4 per element).
pub fn elements_to_tokens(elements: &[UIElement]) -> Vec<usize> {
    let mut tokens = Vec::with_capacity(4 * elements.len());
    for e in elements {
        tokens.extend(encode_box(&e.bbox).iter().map(|t| t.id()));
    }
    tokens
}

/// The verbatim training item of one screen.
pub fn original_item(screen: &SyntheticScreen) -> TrainItem {
    TrainItem {
        features: screen.features.clone(),
        tokens: elements_to_tokens(&screen.elements),
        reward: 1.0,
    }
}

/// Materialize the k-replica training set, ordered pass by pass: pass 0 is
/// every original in dataset order, pass r >= 1 is replica r of every screen.
///
/// Batching each pass like an epoch keeps optimizer step counts and sample
/// positions identical to running `k` epochs of MLE over the originals.
pub fn materialize_passes(
    screens: &[SyntheticScreen],
    cfg: &AugmentationConfig,
    strategy: Strategy,
) -> Result<Vec<Vec<TrainItem>>, SampleError> {
    cfg.validate()?;
    let mut passes: Vec<Vec<TrainItem>> = Vec::with_capacity(cfg.k_replicas as usize);
    passes.push(screens.iter().map(original_item).collect());
    for replica_idx in 1..cfg.k_replicas {
        let mut pass = Vec::with_capacity(screens.len());
        for screen in screens {
            let augmented = crate::sampler::augment_sequence(
                &screen.elements,
                cfg,
                strategy,
                screen.index,
                replica_idx,
            )?;
            let reward = mean_iou(&screen.elements, &augmented);
            pass.push(TrainItem {
                features: screen.features.clone(),
                tokens: elements_to_tokens(&augmented),
                reward,
            });
        }
        passes.push(pass);
    }
    Ok(passes)
}

fn mean_iou(gt: &[UIElement], aug: &[UIElement]) -> f64 {
    let total: f64 = gt
        .iter()
        .zip(aug)
        .map(|(g, a)| g.bbox.iou(&a.bbox))
        .sum();
    total / gt.len().max(1) as f64
}

/// Mean teacher-forced negative log-likelihood over a batch, with its
/// analytic gradient. Rewards on the items are ignored.
pub fn loss_mle(model: &ToyModel, batch: &[TrainItem]) -> (f64, Vec<f64>) {
    assert!(!batch.is_empty(), "empty batch");
    let mut grad = vec![0.0; model.param_count()];
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for item in batch {
        total += model.accumulate_nll_grad(&item.features, &item.tokens, scale, &mut grad);
    }
    (total * scale, grad)
}

/// Reward-weighted maximum likelihood: mean of `reward · nll` over the
/// batch. Rewards scale each example's contribution to both the loss and the
/// gradient, so all-zero rewards give a zero loss and zero gradient.
pub fn loss_weighted(model: &ToyModel, batch: &[TrainItem]) -> (f64, Vec<f64>) {
    assert!(!batch.is_empty(), "empty batch");
    let mut grad = vec![0.0; model.param_count()];
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for item in batch {
        let w = item.reward * scale;
        if w == 0.0 {
            // Contributes nothing; skip the backward pass.
            total += 0.0;
            continue;
        }
        let nll = model.accumulate_nll_grad(&item.features, &item.tokens, w, &mut grad);
        total += item.reward * nll;
    }
    (total * scale, grad)
}

/// IAML loss of a set of screens: materialize the replica passes under the
/// payoff sampler and evaluate [`loss_mle`] on the full replica batch.
///
/// Materialization derives every stream from the config, so repeated calls
/// with the same arguments see the identical batch; finite-difference checks
/// of the returned gradient are therefore well posed.
pub fn loss_iaml(
    model: &ToyModel,
    screens: &[SyntheticScreen],
    cfg: &AugmentationConfig,
) -> Result<(f64, Vec<f64>), SampleError> {
    let passes = materialize_passes(screens, cfg, Strategy::IouPayoff)?;
    let batch: Vec<TrainItem> = passes.into_iter().flatten().collect();
    Ok(loss_mle(model, &batch))
}

/// Replicas of a single element list, exposed for tests that need the raw
/// augmented geometry rather than token sequences.
pub fn replicas_of(
    elements: &[UIElement],
    cfg: &AugmentationConfig,
    strategy: Strategy,
    record_idx: u64,
) -> Result<Vec<Vec<UIElement>>, SampleError> {
    augment_replicas(elements, cfg, strategy, record_idx)
}
