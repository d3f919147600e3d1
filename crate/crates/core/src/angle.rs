//! Angles on the unit circle.

use std::f64::consts::{PI, TAU};

/// An angle reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct CircleAngle(f64);

impl CircleAngle {
    pub fn new(theta: f64) -> Self {
        CircleAngle(reduce(theta))
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Distance along the circle, in `[0, π]`.
    pub fn circular_distance(self, other: CircleAngle) -> f64 {
        circular_distance(self.0, other.0)
    }

    pub fn to_unit(self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, self.0)
    }
}

impl From<f64> for CircleAngle {
    fn from(theta: f64) -> Self {
        CircleAngle::new(theta)
    }
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn reduce(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Principal value in `[-π, π)`.
#[inline]
pub fn principal(theta: f64) -> f64 {
    let r = reduce(theta + PI) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    principal(a - b).abs()
}
