//! Planar geometry shared by the world, the simulator and the policy.

use core::fmt;

use serde::{Deserialize, Serialize};

/// Number of discrete headings (and node directions).
pub const DIRECTIONS: usize = 12;
/// Angular size of one heading step in degrees.
pub const HEADING_STEP_DEG: u16 = 30;

const COS30: f64 = 0.866_025_403_784_438_6;

// Exact where representable so that forward moves at 30 degree multiples
// keep one coordinate on the 1/8 m lattice.
const UNIT: [(f64, f64); DIRECTIONS] = [
    (1.0, 0.0),
    (COS30, 0.5),
    (0.5, COS30),
    (0.0, 1.0),
    (-0.5, COS30),
    (-COS30, 0.5),
    (-1.0, 0.0),
    (-COS30, -0.5),
    (-0.5, -COS30),
    (0.0, -1.0),
    (0.5, -COS30),
    (COS30, -0.5),
];

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(other.x - self.x, other.y - self.y)
    }

    /// Direction from `self` to `other` in degrees, counter-clockwise from +x, in (-180, 180].
    pub fn angle_to(&self, other: &Point) -> f64 {
        libm::atan2(other.y - self.y, other.x - self.x).to_degrees()
    }

    pub fn offset(&self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// One of the twelve 30 degree headings, counter-clockwise from +x.
///
/// Serialized as degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct Heading(u8);

impl Heading {
    pub const EAST: Heading = Heading(0);
    pub const NORTH: Heading = Heading(3);
    pub const WEST: Heading = Heading(6);
    pub const SOUTH: Heading = Heading(9);

    pub fn from_index(index: usize) -> Self {
        Heading((index % DIRECTIONS) as u8)
    }

    /// Snap arbitrary degrees to the nearest heading.
    pub fn nearest(degrees: f64) -> Self {
        let wrapped = wrap_360(degrees);
        let idx = libm::round(wrapped / HEADING_STEP_DEG as f64) as usize;
        Heading::from_index(idx)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn degrees(self) -> u16 {
        self.0 as u16 * HEADING_STEP_DEG
    }

    pub fn left(self) -> Self {
        Heading::from_index(self.index() + 1)
    }

    pub fn right(self) -> Self {
        Heading::from_index(self.index() + DIRECTIONS - 1)
    }

    /// Unit vector of this heading.
    pub fn unit(self) -> (f64, f64) {
        UNIT[self.index()]
    }

    /// Signed number of left turns (positive) or right turns (negative) to reach `target`.
    /// A half turn resolves to the left.
    pub fn turns_to(self, target: Heading) -> i32 {
        let diff = (target.index() + DIRECTIONS - self.index()) % DIRECTIONS;
        if diff <= DIRECTIONS / 2 {
            diff as i32
        } else {
            diff as i32 - DIRECTIONS as i32
        }
    }
}

impl TryFrom<u16> for Heading {
    type Error = HeadingError;

    fn try_from(degrees: u16) -> Result<Self, Self::Error> {
        if degrees % HEADING_STEP_DEG != 0 || degrees >= 360 {
            return Err(HeadingError(degrees));
        }
        Ok(Heading((degrees / HEADING_STEP_DEG) as u8))
    }
}

impl From<Heading> for u16 {
    fn from(h: Heading) -> u16 {
        h.degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("heading {0} is not a multiple of 30 in [0, 330]")]
pub struct HeadingError(pub u16);

/// Agent position and heading.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Degrees, a multiple of 30 in [0, 330].
    pub heading: Heading,
}

impl Pose {
    pub fn new(position: Point, heading: Heading) -> Self {
        Self { x: position.x, y: position.y, heading }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Wrap degrees into [0, 360).
pub fn wrap_360(deg: f64) -> f64 {
    let r = deg % 360.0;
    if r < 0.0 {
        r + 360.0
    } else {
        r
    }
}

/// Wrap degrees into (-180, 180].
pub fn wrap_180(deg: f64) -> f64 {
    let r = wrap_360(deg);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Bearing of `target` relative to an observer at `origin` facing `heading`,
/// in degrees, positive to the left. A coincident target has bearing 0.
pub fn bearing(origin: &Point, heading: Heading, target: &Point) -> f64 {
    if origin.x == target.x && origin.y == target.y {
        return 0.0;
    }
    wrap_180(origin.angle_to(target) - heading.degrees() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_heading_rounds() {
        assert_eq!(Heading::nearest(35.0).index(), 1);
        assert_eq!(Heading::nearest(-10.0).index(), 0);
        assert_eq!(Heading::nearest(350.0).index(), 0);
        assert_eq!(Heading::nearest(344.0).index(), 11);
    }

    #[test]
    fn turns_take_the_short_way() {
        assert_eq!(Heading::EAST.turns_to(Heading::NORTH), 3);
        assert_eq!(Heading::EAST.turns_to(Heading::SOUTH), -3);
        assert_eq!(Heading::EAST.turns_to(Heading::WEST), 6);
        assert_eq!(Heading::from_index(11).turns_to(Heading::from_index(1)), 2);
    }

    #[test]
    fn unit_vectors_are_normalised() {
        for i in 0..DIRECTIONS {
            let (c, s) = Heading::from_index(i).unit();
            assert!((c * c + s * s - 1.0).abs() < 1e-15);
            let deg = (i as f64 * 30.0).to_radians();
            assert!((c - libm::cos(deg)).abs() < 1e-15);
            assert!((s - libm::sin(deg)).abs() < 1e-15);
        }
    }

    #[test]
    fn bearing_sign_is_left_positive() {
        let o = Point::new(0.0, 0.0);
        assert!((bearing(&o, Heading::EAST, &Point::new(1.0, 1.0)) - 45.0).abs() < 1e-12);
        assert!((bearing(&o, Heading::NORTH, &Point::new(1.0, 0.0)) + 90.0).abs() < 1e-12);
        assert_eq!(bearing(&o, Heading::NORTH, &o), 0.0);
    }

    #[test]
    fn heading_rejects_off_grid_degrees() {
        assert!(Heading::try_from(45).is_err());
        assert!(Heading::try_from(360).is_err());
        assert_eq!(Heading::try_from(330).unwrap().index(), 11);
    }
}
