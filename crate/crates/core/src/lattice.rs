//! Frequency vectors on `Z²` and dyadic scales.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A frequency vector `n = (n1, n2) ∈ Z²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub n1: i32,
    pub n2: i32,
}

impl LatticeIndex {
    pub const ZERO: LatticeIndex = LatticeIndex { n1: 0, n2: 0 };

    pub const fn new(n1: i32, n2: i32) -> Self {
        Self { n1, n2 }
    }

    /// `|n|²` as an exact integer.
    pub fn norm_sq(self) -> i64 {
        let (a, b) = (self.n1 as i64, self.n2 as i64);
        a * a + b * b
    }

    pub fn norm(self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// Japanese bracket `⟨n⟩ = (1 + |n|²)^{1/2}`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.norm_sq() as f64).sqrt()
    }

    /// Sup-norm `max(|n1|, |n2|)`, the half-width of the smallest box containing `n`.
    pub fn box_radius(self) -> u32 {
        self.n1.unsigned_abs().max(self.n2.unsigned_abs())
    }

    pub fn component(self, axis: usize) -> i32 {
        if axis == 0 {
            self.n1
        } else {
            self.n2
        }
    }

    pub fn dot(self, other: LatticeIndex) -> i64 {
        self.n1 as i64 * other.n1 as i64 + self.n2 as i64 * other.n2 as i64
    }

    /// All points of the closed ball `|n| ≤ radius`, ordered by `(|n|², n1, n2)`.
    ///
    /// The ordering makes the list for a smaller radius a prefix of the list
    /// for a larger one.
    pub fn ball(radius: u32) -> Vec<LatticeIndex> {
        let r = radius as i32;
        let r2 = (radius as i64) * (radius as i64);
        let mut pts: Vec<LatticeIndex> = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| LatticeIndex::new(a, b)))
            .filter(|n| n.norm_sq() <= r2)
            .collect();
        pts.sort_by_key(|n| (n.norm_sq(), n.n1, n.n2));
        pts
    }
}

impl std::ops::Add for LatticeIndex {
    type Output = LatticeIndex;
    fn add(self, o: LatticeIndex) -> LatticeIndex {
        LatticeIndex::new(self.n1 + o.n1, self.n2 + o.n2)
    }
}

impl std::ops::Sub for LatticeIndex {
    type Output = LatticeIndex;
    fn sub(self, o: LatticeIndex) -> LatticeIndex {
        LatticeIndex::new(self.n1 - o.n1, self.n2 - o.n2)
    }
}

impl std::ops::Neg for LatticeIndex {
    type Output = LatticeIndex;
    fn neg(self) -> LatticeIndex {
        LatticeIndex::new(-self.n1, -self.n2)
    }
}

impl std::ops::Mul<LatticeIndex> for i32 {
    type Output = LatticeIndex;
    fn mul(self, n: LatticeIndex) -> LatticeIndex {
        LatticeIndex::new(self * n.n1, self * n.n2)
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n1, self.n2)
    }
}

/// A dyadic scale `N ∈ {1, 2, 4, ...}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dyadic(u32);

impl Dyadic {
    pub fn new(n: u32) -> Result<Self> {
        if n >= 1 && n.is_power_of_two() {
            Ok(Dyadic(n))
        } else {
            Err(Error::NotDyadic(n as u64))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Membership in the sharp Littlewood–Paley shell: `|n| ≤ 1` for `N = 1`,
    /// `N/2 < |n| ≤ N` otherwise.
    pub fn shell_contains(self, n: LatticeIndex) -> bool {
        let r2 = n.norm_sq();
        let big = (self.0 as i64) * (self.0 as i64);
        if self.0 == 1 {
            r2 <= 1
        } else {
            4 * r2 > big && r2 <= big
        }
    }

    /// Points of the shell, ordered as in [`LatticeIndex::ball`].
    pub fn shell_points(self) -> Vec<LatticeIndex> {
        LatticeIndex::ball(self.0)
            .into_iter()
            .filter(|&n| self.shell_contains(n))
            .collect()
    }

    /// All dyadic scales `1, 2, ..., self`.
    pub fn up_to(self) -> impl Iterator<Item = Dyadic> {
        let top = self.0;
        (0..=top.trailing_zeros()).map(|e| Dyadic(1 << e))
    }
}

impl TryFrom<u32> for Dyadic {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dyadic::new(n)
    }
}

impl From<Dyadic> for u32 {
    fn from(d: Dyadic) -> u32 {
        d.0
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_dyadic() {
        assert!(Dyadic::new(0).is_err());
        assert!(Dyadic::new(6).is_err());
        assert_eq!(Dyadic::new(16).unwrap().get(), 16);
    }

    #[test]
    fn shells_partition_the_ball() {
        let top = Dyadic::new(16).unwrap();
        let mut total = 0;
        for m in top.up_to() {
            total += m.shell_points().len();
        }
        assert_eq!(total, LatticeIndex::ball(16).len());
    }

    #[test]
    fn shell_membership_matches_annulus() {
        let one = Dyadic::new(1).unwrap();
        let two = Dyadic::new(2).unwrap();
        let diag = LatticeIndex::new(1, 1);
        assert!(!one.shell_contains(diag));
        assert!(two.shell_contains(diag));
        assert!(one.shell_contains(LatticeIndex::ZERO));
        assert!(!two.shell_contains(LatticeIndex::new(1, 0)));
    }

    #[test]
    fn ball_is_prefix_ordered() {
        let small = LatticeIndex::ball(3);
        let big = LatticeIndex::ball(6);
        assert_eq!(&big[..small.len()], &small[..]);
    }
}
