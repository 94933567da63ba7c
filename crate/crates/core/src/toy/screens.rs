//! Synthetic screen generator: a stand-in for screenshot encoding so the
//! coordinate-generation math can be exercised without a vision tower.
//!
//! Each screen carries `elements_per_screen` ground-truth elements with boxes
//! drawn uniformly over valid boxes (width and height in `[0.05, 0.4]`), and
//! a feature vector holding, per element, a type one-hot plus center/size
//! cues corrupted with Gaussian noise of the configured level.

use alloc::format;
use alloc::vec::Vec;

use crate::element::UIElement;
use crate::geometry::BBox;
use crate::sampler::{derive_stream, RngStream};

/// Element-type vocabulary of the synthetic benchmark.
pub const ELEMENT_TYPES: [&str; 3] = ["button", "pictogram", "text"];

/// Feature width per element: one-hot type plus (cx, cy, w, h) cues.
pub const FEATURES_PER_ELEMENT: usize = ELEMENT_TYPES.len() + 4;

// Domain tag separating screen-generation streams from augmentation streams
// that might share the same seed value.
const SCREEN_DOMAIN: u64 = 0x5343_524e_4745_4e31;

/// One synthetic screen: the model input features, the ground-truth
/// elements, and the provenance needed to regenerate it.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticScreen {
    pub features: Vec<f64>,
    pub elements: Vec<UIElement>,
    /// `(seed, index)` pair this screen was derived from.
    pub seed: u64,
    pub index: u64,
}

/// Generate a reproducible synthetic dataset.
pub fn gen_screens(
    n: usize,
    elements_per_screen: usize,
    noise: f64,
    seed: u64,
) -> Vec<SyntheticScreen> {
    assert!(n >= 1, "need at least one screen");
    assert!(elements_per_screen >= 1, "need at least one element");
    assert!(noise >= 0.0, "noise level must be non-negative");
    (0..n as u64)
        .map(|index| gen_screen(index, elements_per_screen, noise, seed))
        .collect()
}

fn gen_screen(index: u64, elements_per_screen: usize, noise: f64, seed: u64) -> SyntheticScreen {
    let mut rng = derive_stream(seed ^ SCREEN_DOMAIN, index, 0, 0);
    let mut elements = Vec::with_capacity(elements_per_screen);
    let mut features = Vec::with_capacity(elements_per_screen * FEATURES_PER_ELEMENT);
    for e in 0..elements_per_screen {
        let type_idx = rng.below(ELEMENT_TYPES.len());
        let b = random_box(&mut rng);
        for (t, _) in ELEMENT_TYPES.iter().enumerate() {
            features.push(if t == type_idx { 1.0 } else { 0.0 });
        }
        let center = b.center();
        for cue in [center.x, center.y, b.width(), b.height()] {
            features.push(cue + noise * rng.standard_normal());
        }
        elements.push(UIElement::new(
            ELEMENT_TYPES[type_idx],
            b,
            format!("{} {}", ELEMENT_TYPES[type_idx], e),
        ));
    }
    SyntheticScreen {
        features,
        elements,
        seed,
        index,
    }
}

fn random_box(rng: &mut RngStream) -> BBox {
    let w = 0.05 + 0.35 * rng.uniform_01();
    let h = 0.05 + 0.35 * rng.uniform_01();
    let x0 = (1.0 - w) * rng.uniform_01();
    let y0 = (1.0 - h) * rng.uniform_01();
    BBox::new(x0, y0, x0 + w, y0 + h).expect("generated extents are valid by construction")
}
