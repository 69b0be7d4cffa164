use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box: top-left corner `(x, y)` and extents `(w, h)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(Error::Param(format!("box ({x}, {y}, {w}, {h}) has non-finite fields")));
        }
        if w < 0.0 || h < 0.0 {
            return Err(Error::Param(format!("box extents must be >= 0, got w={w} h={h}")));
        }
        Ok(BoundingBox { x, y, w, h })
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Zero-area boxes are allowed but several metrics are undefined on them.
    pub fn is_degenerate(&self) -> bool {
        self.area() <= 0.0
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        self.w.hypot(self.h)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        BoundingBox {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    /// Scales position and extent about the origin.
    pub fn scale(&self, k: f64) -> Self {
        BoundingBox {
            x: self.x * k,
            y: self.y * k,
            w: self.w * k,
            h: self.h * k,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }

    pub fn intersection_area(&self, other: &Self) -> f64 {
        let iw = (self.right().min(other.right()) - self.x.max(other.x)).max(0.0);
        let ih = (self.bottom().min(other.bottom()) - self.y.max(other.y)).max(0.0);
        iw * ih
    }

    /// Smallest axis-aligned box containing both.
    pub fn hull(&self, other: &Self) -> Self {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BoundingBox {
            x,
            y,
            w: self.right().max(other.right()) - x,
            h: self.bottom().max(other.bottom()) - y,
        }
    }
}

/// Intersection over union. Undefined when the union has zero area.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> Result<f64> {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "IoU of zero-area boxes {a:?} and {b:?}"
        )));
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Generalized IoU: `IoU - |C \ (A u B)| / |C|` with `C` the enclosing hull.
pub fn giou(a: &BoundingBox, b: &BoundingBox) -> Result<f64> {
    let hull = a.hull(b).area();
    if hull <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "GIoU with zero-area hull for {a:?} and {b:?}"
        )));
    }
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    let iou = iou(a, b)?;
    Ok(iou - (hull - union) / hull)
}

/// Euclidean distance between box centers.
pub fn center_distance(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Center distance divided by the ground-truth diagonal.
pub fn normalized_distance(gt: &BoundingBox, pred: &BoundingBox) -> Result<f64> {
    let diag = gt.diagonal();
    if diag <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "ground-truth box {gt:?} has zero diagonal"
        )));
    }
    Ok(center_distance(gt, pred) / diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn iou_points() {
        let a = bb(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&bb(0.0, 0.0, 1.0, 1.0), &bb(5.0, 5.0, 1.0, 1.0)).unwrap(), 0.0);
        assert!((iou(&a, &bb(1.0, 1.0, 2.0, 2.0)).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        let z = bb(3.0, 3.0, 0.0, 0.0);
        assert!(matches!(iou(&z, &z), Err(Error::UndefinedMetric(_))));
        // one degenerate box is fine
        assert_eq!(iou(&a, &z).unwrap(), 0.0);
    }

    #[test]
    fn giou_points() {
        let a = bb(0.0, 0.0, 2.0, 2.0);
        assert_eq!(giou(&a, &a).unwrap(), 1.0);
        let g = giou(&bb(0.0, 0.0, 1.0, 1.0), &bb(2.0, 0.0, 1.0, 1.0)).unwrap();
        assert!((g + 1.0 / 3.0).abs() < 1e-15);
        let g = giou(&a, &bb(1.0, 1.0, 2.0, 2.0)).unwrap();
        assert!((g + 5.0 / 63.0).abs() < 1e-15);
        let z = bb(1.0, 1.0, 0.0, 0.0);
        assert!(giou(&z, &z).is_err());
    }

    #[test]
    fn distance_points() {
        let a = bb(0.0, 0.0, 2.0, 2.0);
        assert_eq!(center_distance(&a, &a), 0.0);
        assert_eq!(center_distance(&a, &bb(3.0, 4.0, 2.0, 2.0)), 5.0);
        assert_eq!(center_distance(&a, &a.translate(0.0, 2.0)), 2.0);

        let gt = bb(0.0, 0.0, 3.0, 4.0);
        assert_eq!(normalized_distance(&gt, &gt).unwrap(), 0.0);
        assert!((normalized_distance(&gt, &gt.translate(3.0, 4.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((normalized_distance(&gt, &bb(5.0, 0.0, 3.0, 4.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(normalized_distance(&bb(0.0, 0.0, 0.0, 0.0), &gt).is_err());
    }

    #[test]
    fn constructor_rejects_invalid() {
        assert!(BoundingBox::new(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(bb(0.0, 0.0, 0.0, 5.0).is_degenerate());
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-50.0f64..50.0, -50.0f64..50.0, 0.1f64..40.0, 0.1f64..40.0)
            .prop_map(|(x, y, w, h)| BoundingBox { x, y, w, h })
    }

    proptest! {
        #[test]
        fn giou_bounded_by_iou(a in arb_box(), b in arb_box()) {
            let i = iou(&a, &b).unwrap();
            let g = giou(&a, &b).unwrap();
            prop_assert!(g <= i + 1e-12);
            prop_assert!(g > -1.0);
            prop_assert!((0.0..=1.0).contains(&i));
        }

        #[test]
        fn symmetric_and_similarity_invariant(
            a in arb_box(), b in arb_box(),
            dx in -100.0f64..100.0, dy in -100.0f64..100.0, k in 0.1f64..10.0,
        ) {
            let i = iou(&a, &b).unwrap();
            let g = giou(&a, &b).unwrap();
            prop_assert!((i - iou(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((g - giou(&b, &a).unwrap()).abs() < 1e-12);
            let (ta, tb) = (a.translate(dx, dy), b.translate(dx, dy));
            prop_assert!((i - iou(&ta, &tb).unwrap()).abs() < 1e-9);
            prop_assert!((g - giou(&ta, &tb).unwrap()).abs() < 1e-9);
            let (sa, sb) = (a.scale(k), b.scale(k));
            prop_assert!((i - iou(&sa, &sb).unwrap()).abs() < 1e-9);
            prop_assert!((g - giou(&sa, &sb).unwrap()).abs() < 1e-9);
        }
    }
}
