//! Strip unfolding across the two parallel walls.

use super::{GeometryError, KeyholeDomain, KeyholeSpec, Point, Wall};

/// The `c`-th mirror image of a point in apex-centered coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Image {
    pub reflections: u32,
    /// Offset from the apex along the wall (`[dx, dy]`, `dy = 0` in 2D).
    pub transverse: [f64; 2],
    /// Distance from the hole's wall along the inward normal.
    pub axial: f64,
}

impl Image {
    pub fn distance(&self) -> f64 {
        let [dx, dy] = self.transverse;
        (dx * dx + dy * dy + self.axial * self.axial).sqrt()
    }
}

/// Reflection order and unfolded distance of an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathClass {
    pub reflections: u32,
    pub distance: f64,
}

/// Axial coordinate of the `c`-th image: `2⌈c/2⌉h + (−1)^c y`.
#[inline]
pub(crate) fn image_axial(c: u32, y: f64, h: f64) -> f64 {
    let lift = 2.0 * c.div_ceil(2) as f64 * h;
    if c.is_multiple_of(2) {
        lift + y
    } else {
        lift - y
    }
}

#[inline]
fn apex_frame(p: &Point, domain: &KeyholeDomain, hole: &KeyholeSpec) -> ([f64; 2], f64) {
    let [cx, cy] = hole.center();
    let dy = match domain.dimension() {
        super::Dimension::Two => 0.0,
        super::Dimension::Three => p.y - cy,
    };
    let axial = match hole.wall() {
        Wall::Floor => p.z,
        Wall::Ceiling => domain.height() - p.z,
    };
    ([p.x - cx, dy], axial)
}

/// Images of `point` for `c = 0..=max_c`.
pub fn unfold_images(
    point: &Point,
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    max_c: u32,
) -> Result<Vec<Image>, GeometryError> {
    domain.check_contains(point)?;
    let (transverse, y) = apex_frame(point, domain, hole);
    let h = domain.height();
    Ok((0..=max_c)
        .map(|c| Image {
            reflections: c,
            transverse,
            axial: image_axial(c, y, h),
        })
        .collect())
}

/// Minimal `c ≤ max_c` whose image falls inside the hole's view, or `None`.
///
/// Image axial distances are nondecreasing in `c` and the view widens with
/// axial distance, so the first hit is the minimal order. The unfolded chord
/// keeps the transverse coordinates of its endpoints, both inside the
/// domain's cross-section, so it never leaves through a side wall.
pub fn classify_path(
    point: &Point,
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    max_c: u32,
) -> Result<Option<PathClass>, GeometryError> {
    domain.check_contains(point)?;
    Ok(classify_unchecked(point, domain, hole, max_c))
}

#[inline]
pub(crate) fn classify_unchecked(
    point: &Point,
    domain: &KeyholeDomain,
    hole: &KeyholeSpec,
    max_c: u32,
) -> Option<PathClass> {
    let ([dx, dy], y) = apex_frame(point, domain, hole);
    let h = domain.height();
    (0..=max_c).find_map(|c| {
        let axial = image_axial(c, y, h);
        hole.sees(dx, dy, axial).then(|| PathClass {
            reflections: c,
            distance: (dx * dx + dy * dy + axial * axial).sqrt(),
        })
    })
}
