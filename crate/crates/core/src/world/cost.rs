use core::cmp::Ordering;
use core::ops::Add;

use serde::{Deserialize, Serialize};

/// Path cost as weighted counts of straight and diagonal cell moves.
///
/// The value is `straight + diagonal * sqrt(2)` cells. Two costs are equal
/// only when both counts match, so independently computed optimal costs
/// compare equal exactly. Ordering goes through the `f64` value: for counts
/// below ~1e6 the gap between distinct values (at least 1/(2n)) dwarfs the
/// rounding error, so it agrees with exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost { straight: 0, diagonal: 0 };

    pub const fn new(straight: u32, diagonal: u32) -> Self {
        Self { straight, diagonal }
    }

    /// Length in cells.
    pub fn cells(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * core::f64::consts::SQRT_2
    }

    pub fn meters(&self, resolution: f64) -> f64 {
        self.cells() * resolution
    }

    /// Cost of one move with the given weight.
    pub fn step(diagonal: bool, weight: u32) -> Self {
        if diagonal {
            PathCost::new(0, weight)
        } else {
            PathCost::new(weight, 0)
        }
    }

    /// Octile distance between cells, a lower bound for any unit-weight path.
    pub fn octile(dx: u64, dy: u64) -> Self {
        let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
        PathCost::new((hi - lo) as u32, lo as u32)
    }

    pub(crate) fn key(&self) -> u64 {
        self.cells().to_bits()
    }
}

impl Add for PathCost {
    type Output = PathCost;

    fn add(self, rhs: PathCost) -> PathCost {
        PathCost::new(self.straight + rhs.straight, self.diagonal + rhs.diagonal)
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.cells().total_cmp(&other.cells())
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
