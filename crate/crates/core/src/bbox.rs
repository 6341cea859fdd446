//! Axis-aligned boxes in pixel coordinates, origin at the top-left corner.

/// Rectangle `[l, r, t, b]`: `l`/`r` are the left/right column coordinates,
/// `t`/`b` the top/bottom row coordinates. Width and height are `r - l` and
/// `b - t`; crops cover columns `l..r` and rows `t..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundingBox {
    pub l: i32,
    pub r: i32,
    pub t: i32,
    pub b: i32,
}

impl BoundingBox {
    pub fn new(l: i32, r: i32, t: i32, b: i32) -> Self {
        BoundingBox { l, r, t, b }
    }

    pub fn width(&self) -> i32 {
        self.r - self.l
    }

    pub fn height(&self) -> i32 {
        self.b - self.t
    }

    /// Centroid of the rectangle.
    pub fn center(&self) -> (f64, f64) {
        ((self.l + self.r) as f64 / 2.0, (self.t + self.b) as f64 / 2.0)
    }

    pub fn is_proper(&self) -> bool {
        self.l < self.r && self.t < self.b
    }

    /// Intersect with the frame rectangle `[0, w) x [0, h)`. The result may
    /// be empty (`!is_proper`).
    pub fn clamp_to(&self, w: usize, h: usize) -> BoundingBox {
        BoundingBox {
            l: self.l.max(0),
            r: self.r.min(w as i32),
            t: self.t.max(0),
            b: self.b.min(h as i32),
        }
    }

    pub fn contained_in(&self, w: usize, h: usize) -> bool {
        self.l >= 0 && self.t >= 0 && self.r <= w as i32 && self.b <= h as i32
    }

    /// Closed-interval overlap test, used for foreground/donor screening
    /// where regions are pixel-inclusive.
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.l <= other.r && other.l <= self.r && self.t <= other.b && other.t <= self.b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_of_unit_box() {
        let b = BoundingBox::new(0, 10, 0, 10);
        assert_eq!(b.center(), (5.0, 5.0));
        assert_eq!(b.width(), 10);
    }

    #[test]
    fn clamp_cuts_to_frame() {
        let b = BoundingBox::new(-5, 12, 3, 40).clamp_to(10, 20);
        assert_eq!(b, BoundingBox::new(0, 10, 3, 20));
        assert!(!BoundingBox::new(20, 30, 0, 5).clamp_to(10, 10).is_proper());
    }

    #[test]
    fn inclusive_intersection() {
        let a = BoundingBox::new(0, 10, 0, 10);
        assert!(a.intersects(&BoundingBox::new(10, 20, 0, 10))); // touching counts
        assert!(!a.intersects(&BoundingBox::new(11, 20, 0, 10)));
    }
}
