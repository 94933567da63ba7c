//! Bounding-box arithmetic: validity, clamping, IoU, and point containment.
//!
//! All coordinates are normalized screen coordinates in `[0, 1]`. A [`BBox`]
//! always has strictly positive width and height, so IoU denominators are
//! positive and the metric is total on valid inputs. Unvalidated perturbation
//! output is carried by [`RawBBox`] until [`RawBBox::validate`] clamps and
//! checks it.

use alloc::format;
use alloc::string::String;
use core::fmt;

/// Why a raw rectangle was rejected during validation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxError {
    /// A coordinate was NaN or infinite.
    NotFinite,
    /// A coordinate fell outside `[0, 1]` (strict construction only).
    OutOfRange,
    /// Width or height was not strictly positive (after clamping, for
    /// [`RawBBox::validate`]).
    EmptyExtent,
}

impl fmt::Display for BoxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxError::NotFinite => write!(f, "coordinate is not finite"),
            BoxError::OutOfRange => write!(f, "coordinate outside the unit square"),
            BoxError::EmptyExtent => write!(f, "box has no positive width or height"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for BoxError {}

/// An unvalidated axis-aligned rectangle with unbounded real coordinates.
///
/// This is the carrier for perturbation output before any validity handling;
/// it may be inverted, degenerate, or outside the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawBBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl RawBBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Clamp every coordinate to the unit square, then accept the box iff it
    /// still has strictly positive width and height.
    ///
    /// Clamp-then-check order means perturbations that push a coordinate just
    /// past a screen edge survive, while inverted or flattened boxes are
    /// rejected.
    pub fn validate(self) -> Result<BBox, BoxError> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(BoxError::NotFinite);
        }
        let x_min = self.x_min.clamp(0.0, 1.0);
        let y_min = self.y_min.clamp(0.0, 1.0);
        let x_max = self.x_max.clamp(0.0, 1.0);
        let y_max = self.y_max.clamp(0.0, 1.0);
        if x_min >= x_max || y_min >= y_max {
            return Err(BoxError::EmptyExtent);
        }
        Ok(BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }
}

impl From<BBox> for RawBBox {
    fn from(b: BBox) -> Self {
        RawBBox::new(b.x_min, b.y_min, b.x_max, b.y_max)
    }
}

/// A validated, normalized axis-aligned bounding box.
///
/// Invariant: `0 <= x_min < x_max <= 1` and `0 <= y_min < y_max <= 1`.
/// Fields are private so every `BBox` in the system satisfies it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BBox {
    /// Strict constructor: rejects anything outside the unit square as well
    /// as inverted or zero-area extents. Use [`RawBBox::validate`] for the
    /// lenient clamp-first path.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, BoxError> {
        let coords = [x_min, y_min, x_max, y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(BoxError::NotFinite);
        }
        if coords.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(BoxError::OutOfRange);
        }
        if x_min >= x_max || y_min >= y_max {
            return Err(BoxError::EmptyExtent);
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Intersection area with another box; zero when disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let ix = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let iy = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        ix * iy
    }

    /// Intersection-over-Union: overlap area divided by union area.
    ///
    /// Valid boxes have positive area, so the denominator is always
    /// positive and the result lies in `[0, 1]`.
    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        inter / (self.area() + other.area() - inter)
    }

    /// Midpoint of the box, used as the click point derived from a
    /// predicted element.
    pub fn center(&self) -> Point {
        Point {
            x: 0.5 * (self.x_min + self.x_max),
            y: 0.5 * (self.y_min + self.y_max),
        }
    }

    /// Closed-boundary containment: a point exactly on an edge counts as
    /// inside, so a click on the border of an element is a hit.
    pub fn contains(&self, p: Point) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    /// Serialize the four coordinates with exactly two fractional digits,
    /// matching the 0.01 granularity used everywhere coordinates become text.
    pub fn coord_string(&self) -> String {
        format!(
            "({:.2}, {:.2}, {:.2}, {:.2})",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// A point in the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Validating constructor for points arriving from external input.
    pub fn new(x: f64, y: f64) -> Result<Self, BoxError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(BoxError::NotFinite);
        }
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(BoxError::OutOfRange);
        }
        Ok(Self { x, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    /// Rasterized counting oracle: fraction of grid-cell centers in the
    /// intersection over centers in the union. Independent of the analytic
    /// area formulas.
    fn grid_iou(a: &BBox, b: &BBox, n: usize) -> f64 {
        let step = 1.0 / n as f64;
        let inside = |lo: f64, hi: f64, c: f64| lo <= c && c <= hi;
        let mut inter = 0u64;
        let mut union = 0u64;
        for i in 0..n {
            let x = (i as f64 + 0.5) * step;
            let in_ax = inside(a.x_min, a.x_max, x);
            let in_bx = inside(b.x_min, b.x_max, x);
            if !in_ax && !in_bx {
                continue;
            }
            for j in 0..n {
                let y = (j as f64 + 0.5) * step;
                let in_a = in_ax && inside(a.y_min, a.y_max, y);
                let in_b = in_bx && inside(b.y_min, b.y_max, y);
                if in_a && in_b {
                    inter += 1;
                }
                if in_a || in_b {
                    union += 1;
                }
            }
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_identity_is_one() {
        let b = bx(0.2, 0.3, 0.7, 0.9);
        assert_eq!(b.iou(&b), 1.0);
    }

    #[test]
    fn iou_disjoint_is_zero() {
        let a = bx(0.0, 0.0, 0.4, 0.4);
        let b = bx(0.5, 0.5, 1.0, 1.0);
        assert_eq!(a.iou(&b), 0.0);
    }

    #[test]
    fn iou_quarter_overlap_is_one_seventh() {
        // overlap 0.0625, union 0.4375
        let a = bx(0.0, 0.0, 0.5, 0.5);
        let b = bx(0.25, 0.25, 0.75, 0.75);
        let expected = 1.0 / 7.0;
        assert!((a.iou(&b) - expected).abs() < 1e-12);
        assert!((grid_iou(&a, &b, 1000) - expected).abs() < 1e-3);
    }

    #[test]
    fn validate_clamps_lower_bound() {
        let r = RawBBox::new(-0.1, 0.2, 0.5, 0.6);
        let b = r.validate().unwrap();
        assert_eq!((b.x_min(), b.y_min(), b.x_max(), b.y_max()), (0.0, 0.2, 0.5, 0.6));
    }

    #[test]
    fn validate_clamps_upper_bound() {
        let r = RawBBox::new(0.3, 0.3, 1.4, 1.4);
        let b = r.validate().unwrap();
        assert_eq!((b.x_min(), b.y_min(), b.x_max(), b.y_max()), (0.3, 0.3, 1.0, 1.0));
    }

    #[test]
    fn validate_rejects_inverted() {
        let r = RawBBox::new(0.5, 0.2, 0.4, 0.6);
        assert_eq!(r.validate().unwrap_err(), BoxError::EmptyExtent);
    }

    #[test]
    fn validate_rejects_flattened_by_clamp() {
        // Both x coordinates clamp to 1.0, leaving zero width.
        let r = RawBBox::new(1.2, 0.2, 1.4, 0.6);
        assert_eq!(r.validate().unwrap_err(), BoxError::EmptyExtent);
    }

    #[test]
    fn validate_rejects_nan() {
        let r = RawBBox::new(f64::NAN, 0.2, 0.4, 0.6);
        assert_eq!(r.validate().unwrap_err(), BoxError::NotFinite);
    }

    #[test]
    fn strict_new_rejects_out_of_range() {
        assert_eq!(
            BBox::new(-0.1, 0.2, 0.5, 0.6).unwrap_err(),
            BoxError::OutOfRange
        );
    }

    #[test]
    fn center_of_unit_box() {
        let p = bx(0.0, 0.0, 1.0, 1.0).center();
        assert_eq!((p.x, p.y), (0.5, 0.5));
    }

    #[test]
    fn center_of_offset_box() {
        let p = bx(0.2, 0.4, 0.4, 0.8).center();
        assert!((p.x - 0.3).abs() < 1e-15);
        assert!((p.y - 0.6).abs() < 1e-15);
    }

    #[test]
    fn contains_is_closed_on_boundaries() {
        let b = bx(0.4, 0.4, 0.6, 0.6);
        assert!(b.contains(Point { x: 0.5, y: 0.5 }));
        assert!(b.contains(Point { x: 0.4, y: 0.5 }));
        assert!(b.contains(Point { x: 0.6, y: 0.6 }));
        assert!(!b.contains(Point { x: 0.39, y: 0.5 }));
    }

    #[test]
    fn coord_string_two_decimals() {
        let b = bx(0.1, 0.1, 0.88, 0.9);
        assert_eq!(b.coord_string(), "(0.10, 0.10, 0.88, 0.90)");
    }

    #[test]
    fn grid_oracle_agreement_on_random_pairs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
        // Box edges are drawn on the 0.001 raster so boundary cells are
        // unambiguously in or out; cell-center counting of non-aligned edges
        // carries O(perimeter/n) error that can exceed the tolerance.
        for _ in 0..1000 {
            let random_box = |rng: &mut rand_chacha::ChaCha8Rng| {
                let w = rng.gen_range(50..900u32);
                let h = rng.gen_range(50..900u32);
                let x0 = rng.gen_range(0..1000 - w);
                let y0 = rng.gen_range(0..1000 - h);
                bx(
                    x0 as f64 / 1000.0,
                    y0 as f64 / 1000.0,
                    (x0 + w) as f64 / 1000.0,
                    (y0 + h) as f64 / 1000.0,
                )
            };
            let a = random_box(&mut rng);
            let b = random_box(&mut rng);
            let exact = a.iou(&b);
            let raster = grid_iou(&a, &b, 1000);
            assert!(
                (exact - raster).abs() <= 2e-3,
                "grid oracle disagreement: exact={exact} raster={raster}"
            );
        }
    }

    fn arb_bbox() -> impl Strategy<Value = BBox> {
        (0.0f64..0.95, 0.0f64..0.95, 0.01f64..0.9, 0.01f64..0.9).prop_map(|(x0, y0, w, h)| {
            let x1 = (x0 + w).min(1.0);
            let y1 = (y0 + h).min(1.0);
            BBox::new(x0, y0, x1, y1).unwrap()
        })
    }

    proptest! {
        #[test]
        fn iou_symmetric(a in arb_bbox(), b in arb_bbox()) {
            prop_assert_eq!(a.iou(&b), b.iou(&a));
        }

        #[test]
        fn iou_in_unit_interval(a in arb_bbox(), b in arb_bbox()) {
            let v = a.iou(&b);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn iou_one_only_for_identical(a in arb_bbox(), b in arb_bbox()) {
            if a.iou(&b) == 1.0 {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn center_always_contained(b in arb_bbox()) {
            prop_assert!(b.contains(b.center()));
        }

        #[test]
        fn validate_accepts_all_strict_boxes(b in arb_bbox()) {
            let r = RawBBox::from(b);
            prop_assert_eq!(r.validate().unwrap(), b);
        }
    }
}
