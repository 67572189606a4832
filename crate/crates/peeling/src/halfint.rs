//! Exact half-integer arithmetic.
//!
//! Boundary-distance bookkeeping lives on the lattice ℤ/2: per-step
//! increments are −k, 0, or +½ and the policy offsets are 0 or ±½. Storing
//! the doubled value in an `i64` keeps every identity exact — parity checks
//! and cancellation tests must never depend on floating-point rounding.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

/// A half-integer represented by its doubled value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    doubled: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { doubled: 0 };
    pub const HALF: HalfInt = HalfInt { doubled: 1 };
    pub const ONE: HalfInt = HalfInt { doubled: 2 };

    /// Constructs from the doubled value (`doubled = 3` means 3/2).
    pub const fn from_doubled(doubled: i64) -> Self {
        HalfInt { doubled }
    }

    /// Constructs from a whole integer.
    pub const fn from_int(value: i64) -> Self {
        HalfInt { doubled: 2 * value }
    }

    /// The doubled value — exact, no rounding.
    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    /// Whether the value is a whole integer.
    pub const fn is_integer(self) -> bool {
        self.doubled % 2 == 0
    }

    /// Lossy conversion for statistics and output formatting.
    pub fn as_f64(self) -> f64 {
        self.doubled as f64 * 0.5
    }

    pub fn min(self, other: Self) -> Self {
        if self.doubled <= other.doubled {
            self
        } else {
            other
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            doubled: self.doubled + rhs.doubled,
        }
    }
}

impl AddAssign for HalfInt {
    fn add_assign(&mut self, rhs: HalfInt) {
        self.doubled += rhs.doubled;
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            doubled: self.doubled - rhs.doubled,
        }
    }
}

impl SubAssign for HalfInt {
    fn sub_assign(&mut self, rhs: HalfInt) {
        self.doubled -= rhs.doubled;
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt {
            doubled: -self.doubled,
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = HalfInt::HALF;
        let b = HalfInt::from_int(-3);
        assert_eq!((a + b).doubled(), -5);
        assert_eq!((a - b).doubled(), 7);
        assert_eq!((-a).doubled(), -1);
        assert_eq!(a + -a, HalfInt::ZERO);
    }

    #[test]
    fn parity_detection() {
        assert!(HalfInt::from_int(7).is_integer());
        assert!(!HalfInt::HALF.is_integer());
        assert!((HalfInt::HALF + HalfInt::HALF).is_integer());
    }

    #[test]
    fn ordering_and_min() {
        let vals = [
            HalfInt::from_doubled(-3),
            HalfInt::ZERO,
            HalfInt::HALF,
            HalfInt::ONE,
        ];
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(
            HalfInt::ZERO.min(HalfInt::from_doubled(-3)),
            HalfInt::from_doubled(-3)
        );
    }

    #[test]
    fn display_forms() {
        assert_eq!(HalfInt::from_int(4).to_string(), "4");
        assert_eq!(HalfInt::from_doubled(-5).to_string(), "-5/2");
        assert_eq!(HalfInt::HALF.to_string(), "1/2");
    }

    #[test]
    fn conversion_round_trip() {
        assert_eq!(HalfInt::from_doubled(9).as_f64(), 4.5);
        assert_eq!(HalfInt::from_int(-2).as_f64(), -2.0);
    }
}
