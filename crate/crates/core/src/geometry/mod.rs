//! Keyhole domains in 2D and 3D.
//!
//! The interior is the box `[0, L] × [0, L_y] × [0, h]` (the `y` extent is
//! absent in 2D). Holes sit in the floor (`z = 0`) or the ceiling (`z = h`);
//! the external node is at the hole's apex on that wall, looking along the
//! inward normal through a wedge (2D slit) or cone/pyramid (3D hole).
//!
//! Points use `z` for height in both dimensions; 2D points have `y = 0`.
//! Lengths are in wavelengths.

mod region;
mod unfold;

pub use region::{region_measure, region_measures_monte_carlo, RegionMeasure, RegionMethod};
pub use unfold::{classify_path, unfold_images, Image, PathClass};

use std::f64::consts::PI;

/// Ratio treated as "much smaller than" by the thin-hole check.
pub const MUCH_LESS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid hole: {0}")]
    InvalidHole(String),
    #[error("point ({x}, {y}, {z}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64, z: f64 },
    #[error("{shape:?} hole cannot be used in a {dimension:?} domain")]
    ShapeMismatch {
        shape: HoleShape,
        dimension: Dimension,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Two,
    Three,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wall {
    #[default]
    Floor,
    Ceiling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoleShape {
    /// 2D slit of width `w`.
    Slit,
    /// 3D circular hole of diameter `ŵ`.
    Circular,
    /// 3D square hole of side `s`.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub fn planar(x: f64, z: f64) -> Self {
        Self { x, y: 0.0, z }
    }
    pub fn spatial(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Opening of a hole as seen from its apex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosAngle {
    /// Full wedge angle `φ = 2 arctan(w / 2d)`.
    Planar { phi: f64 },
    /// Polar half-angle `ψ` (face half-angle for squares) and the total
    /// solid angle of the view.
    Solid { psi: f64, solid_angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyholeSpec {
    center: [f64; 2],
    width: f64,
    depth: f64,
    shape: HoleShape,
    wall: Wall,
}

impl KeyholeSpec {
    fn build(
        center: [f64; 2],
        width: f64,
        depth: f64,
        shape: HoleShape,
    ) -> Result<Self, GeometryError> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(GeometryError::InvalidHole(format!(
                "width must be > 0, got {width}"
            )));
        }
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(GeometryError::InvalidHole(format!(
                "depth must be > 0, got {depth}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidHole("center must be finite".into()));
        }
        Ok(Self {
            center,
            width,
            depth,
            shape,
            wall: Wall::Floor,
        })
    }

    /// 2D slit of width `w` and depth `d` centered at `x` along its wall.
    pub fn slit(x: f64, width: f64, depth: f64) -> Result<Self, GeometryError> {
        Self::build([x, 0.0], width, depth, HoleShape::Slit)
    }

    /// 2D slit whose width is chosen so the full wedge angle is `phi`.
    pub fn slit_with_angle(x: f64, phi: f64, depth: f64) -> Result<Self, GeometryError> {
        check_half_angle(0.5 * phi)?;
        Self::slit(x, 2.0 * depth * (0.5 * phi).tan(), depth)
    }

    pub fn circular(center: [f64; 2], diameter: f64, depth: f64) -> Result<Self, GeometryError> {
        Self::build(center, diameter, depth, HoleShape::Circular)
    }

    /// Circular hole with polar half-angle `psi`.
    pub fn circular_with_angle(
        center: [f64; 2],
        psi: f64,
        depth: f64,
    ) -> Result<Self, GeometryError> {
        check_half_angle(psi)?;
        Self::circular(center, 2.0 * depth * psi.tan(), depth)
    }

    pub fn square(center: [f64; 2], side: f64, depth: f64) -> Result<Self, GeometryError> {
        Self::build(center, side, depth, HoleShape::Square)
    }

    /// Square hole whose pyramid of view subtends `solid_angle`, using
    /// `Ω = 4 arcsin(sin² a)` for face half-angle `a`.
    pub fn square_with_solid_angle(
        center: [f64; 2],
        solid_angle: f64,
        depth: f64,
    ) -> Result<Self, GeometryError> {
        if !(solid_angle > 0.0 && solid_angle < 2.0 * PI) {
            return Err(GeometryError::InvalidHole(format!(
                "solid angle {solid_angle} out of (0, 2π)"
            )));
        }
        let a = (0.25 * solid_angle).sin().sqrt().asin();
        Self::square(center, 2.0 * depth * a.tan(), depth)
    }

    pub fn on_wall(mut self, wall: Wall) -> Self {
        self.wall = wall;
        self
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    pub fn depth(&self) -> f64 {
        self.depth
    }
    pub fn shape(&self) -> HoleShape {
        self.shape
    }
    pub fn wall(&self) -> Wall {
        self.wall
    }

    /// `arctan(w / 2d)`: `φ/2` for slits, `ψ` for circles, face half-angle
    /// for squares.
    pub fn half_angle(&self) -> f64 {
        (self.width / (2.0 * self.depth)).atan()
    }

    fn tan_half_angle(&self) -> f64 {
        self.width / (2.0 * self.depth)
    }

    /// Whether the hole satisfies `w ≪ d ≪ 1`, which the sector
    /// approximation assumes.
    pub fn is_thin(&self) -> bool {
        self.width <= MUCH_LESS * self.depth && self.depth <= MUCH_LESS
    }

    /// Whether an apex-relative offset lies inside the view.
    pub(crate) fn sees(&self, dx: f64, dy: f64, axial: f64) -> bool {
        let reach = axial * self.tan_half_angle();
        match self.shape {
            HoleShape::Slit => dx.abs() <= reach,
            HoleShape::Circular => dx * dx + dy * dy <= reach * reach,
            HoleShape::Square => dx.abs() <= reach && dy.abs() <= reach,
        }
    }

    /// Largest transverse offset visible at the given axial distance.
    fn reach_radius(&self, axial: f64) -> f64 {
        let r = axial * self.tan_half_angle();
        match self.shape {
            HoleShape::Square => r * std::f64::consts::SQRT_2,
            _ => r,
        }
    }
}

fn check_half_angle(half: f64) -> Result<(), GeometryError> {
    if !(half > 0.0 && half < 0.5 * PI) {
        return Err(GeometryError::InvalidHole(format!(
            "half-angle {half} out of (0, π/2)"
        )));
    }
    Ok(())
}

/// LOS opening of `hole` in a domain of the given dimension.
pub fn los_angle(hole: &KeyholeSpec, dimension: Dimension) -> Result<LosAngle, GeometryError> {
    let half = hole.half_angle();
    match (dimension, hole.shape) {
        (Dimension::Two, HoleShape::Slit) => Ok(LosAngle::Planar { phi: 2.0 * half }),
        (Dimension::Three, HoleShape::Circular) => Ok(LosAngle::Solid {
            psi: half,
            solid_angle: 2.0 * PI * (1.0 - half.cos()),
        }),
        (Dimension::Three, HoleShape::Square) => Ok(LosAngle::Solid {
            psi: half,
            solid_angle: 4.0 * (half.sin().powi(2)).asin(),
        }),
        (dimension, shape) => Err(GeometryError::ShapeMismatch { shape, dimension }),
    }
}

/// Non-fatal findings about a domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainWarning {
    /// The hole violates `w ≪ d ≪ 1`.
    ThickHole { hole: usize, width: f64, depth: f64 },
    /// The LOS regions of two holes intersect inside the domain.
    OverlappingViews { first: usize, second: usize },
}

impl std::fmt::Display for DomainWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::ThickHole { hole, width, depth } => write!(
                f,
                "hole {hole}: width {width} / depth {depth} is not thin; sector approximation may be poor"
            ),
            Self::OverlappingViews { first, second } => write!(
                f,
                "holes {first} and {second} have overlapping line-of-sight regions; multi-hole product is not justified"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyholeDomain {
    dimension: Dimension,
    height: f64,
    length: f64,
    breadth: f64,
    holes: Vec<KeyholeSpec>,
}

impl KeyholeDomain {
    /// 2D rectangle of height `h` and length `L`.
    pub fn planar(
        height: f64,
        length: f64,
        holes: Vec<KeyholeSpec>,
    ) -> Result<Self, GeometryError> {
        Self::build(Dimension::Two, height, length, 0.0, holes)
    }

    /// 3D cuboid of height `h`, length `L` and breadth `L_y`.
    pub fn cuboid(
        height: f64,
        length: f64,
        breadth: f64,
        holes: Vec<KeyholeSpec>,
    ) -> Result<Self, GeometryError> {
        Self::build(Dimension::Three, height, length, breadth, holes)
    }

    fn build(
        dimension: Dimension,
        height: f64,
        length: f64,
        breadth: f64,
        holes: Vec<KeyholeSpec>,
    ) -> Result<Self, GeometryError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(GeometryError::InvalidDomain(format!(
                    "{name} must be finite and > 0, got {v}"
                )))
            }
        };
        positive("height", height)?;
        positive("length", length)?;
        if dimension == Dimension::Three {
            positive("breadth", breadth)?;
        }
        let d = Self {
            dimension,
            height,
            length,
            breadth,
            holes,
        };
        for (i, hole) in d.holes.iter().enumerate() {
            los_angle(hole, dimension)?;
            let [cx, cy] = hole.center;
            let inside_y = dimension == Dimension::Two || (0.0..=breadth).contains(&cy);
            if !(0.0..=length).contains(&cx) || !inside_y {
                return Err(GeometryError::InvalidHole(format!(
                    "hole {i} center ({cx}, {cy}) is not on the wall"
                )));
            }
        }
        Ok(d)
    }

    /// Same domain with a different height; used by height sweeps.
    pub fn with_height(&self, height: f64) -> Result<Self, GeometryError> {
        Self::build(
            self.dimension,
            height,
            self.length,
            self.breadth,
            self.holes.clone(),
        )
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    /// Extent along `y`; zero in 2D.
    pub fn breadth(&self) -> f64 {
        self.breadth
    }
    pub fn holes(&self) -> &[KeyholeSpec] {
        &self.holes
    }

    /// Area (2D) or volume (3D).
    pub fn volume(&self) -> f64 {
        match self.dimension {
            Dimension::Two => self.height * self.length,
            Dimension::Three => self.height * self.length * self.breadth,
        }
    }

    pub fn centroid(&self) -> Point {
        Point {
            x: 0.5 * self.length,
            y: 0.5 * self.breadth,
            z: 0.5 * self.height,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let y_ok = match self.dimension {
            Dimension::Two => p.y == 0.0,
            Dimension::Three => (0.0..=self.breadth).contains(&p.y),
        };
        y_ok && (0.0..=self.length).contains(&p.x) && (0.0..=self.height).contains(&p.z)
    }

    pub(crate) fn check_contains(&self, p: &Point) -> Result<(), GeometryError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(GeometryError::OutsideDomain {
                x: p.x,
                y: p.y,
                z: p.z,
            })
        }
    }

    /// Pairs of holes whose LOS regions intersect inside the domain.
    pub fn overlapping_views(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.holes.len() {
            for j in i + 1..self.holes.len() {
                if self.views_overlap(&self.holes[i], &self.holes[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn views_overlap(&self, a: &KeyholeSpec, b: &KeyholeSpec) -> bool {
        let h = self.height;
        let axial = |hole: &KeyholeSpec, z: f64| match hole.wall {
            Wall::Floor => z,
            Wall::Ceiling => h - z,
        };
        // The summed reach is linear in height, so its maximum is at a wall.
        let reach = |ra: fn(&KeyholeSpec, f64) -> f64| {
            [0.0, h]
                .iter()
                .map(|&z| ra(a, axial(a, z)) + ra(b, axial(b, z)))
                .fold(0.0, f64::max)
        };
        let dx = (a.center[0] - b.center[0]).abs();
        let dy = (a.center[1] - b.center[1]).abs();
        match (self.dimension, a.shape, b.shape) {
            (Dimension::Two, _, _) => dx < reach(|s, ax| ax * s.tan_half_angle()),
            (_, HoleShape::Square, HoleShape::Square) => {
                let m = reach(|s, ax| ax * s.tan_half_angle());
                dx < m && dy < m
            }
            _ => dx.hypot(dy) < reach(KeyholeSpec::reach_radius),
        }
    }

    pub fn warnings(&self) -> Vec<DomainWarning> {
        let mut w: Vec<DomainWarning> = self
            .holes
            .iter()
            .enumerate()
            .filter(|(_, hole)| !hole.is_thin())
            .map(|(i, hole)| DomainWarning::ThickHole {
                hole: i,
                width: hole.width,
                depth: hole.depth,
            })
            .collect();
        w.extend(
            self.overlapping_views()
                .into_iter()
                .map(|(first, second)| DomainWarning::OverlappingViews { first, second }),
        );
        w
    }
}
