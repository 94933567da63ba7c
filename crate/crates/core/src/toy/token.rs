//! Coordinate-token codec: 100 bins per coordinate, matching the 0.01
//! granularity of the reward-index discretization.

use crate::geometry::BBox;

/// One quantized coordinate: a bin identifier in `{0, …, 99}`.
///
/// `encode(v) = min(99, ⌊100·v⌋)`; `decode(t) = (t + 0.5)/100` (bin center).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoordToken(u8);

impl CoordToken {
    pub const VOCAB: usize = 100;

    pub fn encode(v: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&v));
        let t = crate::math::floor(100.0 * v) as i64;
        CoordToken(t.clamp(0, 99) as u8)
    }

    pub fn from_id(id: usize) -> Option<Self> {
        (id < Self::VOCAB).then_some(CoordToken(id as u8))
    }

    pub fn decode(&self) -> f64 {
        (self.0 as f64 + 0.5) / 100.0
    }

    pub fn value(&self) -> u8 {
        self.0
    }

    pub fn id(&self) -> usize {
        self.0 as usize
    }
}

/// Quantize a box into its four coordinate tokens
/// `(x_min, y_min, x_max, y_max)`.
pub fn encode_box(b: &BBox) -> [CoordToken; 4] {
    [
        CoordToken::encode(b.x_min()),
        CoordToken::encode(b.y_min()),
        CoordToken::encode(b.x_max()),
        CoordToken::encode(b.y_max()),
    ]
}

/// Reconstruct a valid box from four coordinate tokens.
///
/// Deterministic repair for model-generated sequences: inverted token pairs
/// are swapped, and a degenerate pair (both coordinates in one bin) widens to
/// the bin's edges instead of collapsing onto its center.
pub fn decode_box(tokens: [CoordToken; 4]) -> BBox {
    fn axis(a: CoordToken, b: CoordToken) -> (f64, f64) {
        let lo = a.min(b);
        let hi = a.max(b);
        if lo == hi {
            (lo.0 as f64 / 100.0, (lo.0 as f64 + 1.0) / 100.0)
        } else {
            (lo.decode(), hi.decode())
        }
    }
    let (x_min, x_max) = axis(tokens[0], tokens[2]);
    let (y_min, y_max) = axis(tokens[1], tokens[3]);
    BBox::new(x_min, y_min, x_max, y_max)
        .expect("token axes always span a positive extent inside the unit square")
}
