//! Blaschke factors and finite Blaschke products.
//!
//! A finite Blaschke product is stored as
//!
//! ```text
//! B(z) = α · z^m · ∏ᵢ (|zᵢ|/zᵢ) (zᵢ − z) / (1 − z̄ᵢ z)
//! ```
//!
//! with a unimodular rotation `α`, an origin multiplicity `m` and the
//! multiset of nonzero zeros `zᵢ`. Every factor is normalized so that its
//! value at the origin is `|zᵢ| > 0`.

use num_complex::Complex64;

use crate::angle::CircleAngle;
use crate::error::{Error, Result};

/// Zeros closer than this are treated as one zero with multiplicity.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

/// Tolerance on `|α| = 1`.
pub const ROTATION_TOLERANCE: f64 = 1e-14;

/// Above this many factors products are formed pairwise.
pub const PAIRWISE_THRESHOLD: usize = 64;

const POLE_GUARD: f64 = 1e-15;
const DISC_SLACK: f64 = 1e-12;

/// One normalized disc automorphism `(|a|/a)(a − z)/(1 − āz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlaschkeFactor {
    zero: Complex64,
}

impl BlaschkeFactor {
    pub fn new(zero: Complex64) -> Result<Self> {
        let r = zero.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!(
                "factor zero {zero} must satisfy 0 < |a| < 1 (|a| = {r})"
            )));
        }
        Ok(BlaschkeFactor { zero })
    }

    pub fn zero(&self) -> Complex64 {
        self.zero
    }

    /// Value at a point of the closed disc.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disc(z)?;
        let a = self.zero;
        let den = Complex64::new(1.0, 0.0) - a.conj() * z;
        if den.norm() < POLE_GUARD {
            return Err(Error::Domain(format!("pole of factor with zero {a} at {z}")));
        }
        Ok(factor_value(a, z))
    }

    /// Boundary value at `e^{iθ}`; always unimodular.
    pub fn eval_boundary(&self, theta: CircleAngle) -> Complex64 {
        factor_value(self.zero, theta.to_unit())
    }
}

#[inline]
pub(crate) fn factor_value(a: Complex64, z: Complex64) -> Complex64 {
    let ac = a.conj();
    (ac * (a - z)) / ((Complex64::new(1.0, 0.0) - ac * z) * a.norm())
}

/// Value and derivative of a single factor.
#[inline]
pub(crate) fn factor_value_and_derivative(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
    let ac = a.conj();
    let r = a.norm();
    let den = Complex64::new(1.0, 0.0) - ac * z;
    let unit = ac / r;
    let value = unit * (a - z) / den;
    // d/dz (a − z)/(1 − āz) = (|a|² − 1)/(1 − āz)²
    let deriv = unit * (r * r - 1.0) / (den * den);
    (value, deriv)
}

/// Product of the factor values for `zeros` at `z`, formed pairwise for
/// long zero lists to keep rounding growth logarithmic.
pub(crate) fn factor_product(zeros: &[Complex64], z: Complex64) -> Complex64 {
    if zeros.len() <= PAIRWISE_THRESHOLD {
        zeros
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &a| acc * factor_value(a, z))
    } else {
        let (left, right) = zeros.split_at(zeros.len() / 2);
        factor_product(left, z) * factor_product(right, z)
    }
}

/// Pairwise product of real numbers.
pub(crate) fn pairwise_real_product(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_THRESHOLD {
        values.iter().product()
    } else {
        let (left, right) = values.split_at(values.len() / 2);
        pairwise_real_product(left) * pairwise_real_product(right)
    }
}

#[inline]
pub(crate) fn powu(z: Complex64, mut exp: u32) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        exp >>= 1;
        if exp > 0 {
            base *= base;
        }
    }
    acc
}

fn check_closed_disc(z: Complex64) -> Result<()> {
    let r = z.norm();
    if !(r <= 1.0 + DISC_SLACK) {
        return Err(Error::Domain(format!(
            "evaluation point {z} lies outside the closed unit disc"
        )));
    }
    Ok(())
}

/// A finite Blaschke product `α · z^m · ∏ factors`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    rotation: Complex64,
    origin_multiplicity: u32,
    zeros: Vec<Complex64>,
}

impl BlaschkeProduct {
    pub fn new(rotation: Complex64, origin_multiplicity: u32, zeros: Vec<Complex64>) -> Result<Self> {
        if !((rotation.norm() - 1.0).abs() <= ROTATION_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "rotation {rotation} is not unimodular (|α| − 1 = {:e})",
                rotation.norm() - 1.0
            )));
        }
        for (i, z) in zeros.iter().enumerate() {
            let r = z.norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "zero {i} = {z} must satisfy 0 < |z| < 1 (|z| = {r})"
                )));
            }
        }
        Ok(BlaschkeProduct {
            rotation,
            origin_multiplicity,
            zeros,
        })
    }

    /// `z ↦ z`.
    pub fn identity() -> Self {
        Self::monomial(1)
    }

    /// `z ↦ z^m`.
    pub fn monomial(m: u32) -> Self {
        BlaschkeProduct {
            rotation: Complex64::new(1.0, 0.0),
            origin_multiplicity: m,
            zeros: Vec::new(),
        }
    }

    /// Product with rotation 1.
    pub fn from_zeros(origin_multiplicity: u32, zeros: Vec<Complex64>) -> Result<Self> {
        Self::new(Complex64::new(1.0, 0.0), origin_multiplicity, zeros)
    }

    pub fn rotation(&self) -> Complex64 {
        self.rotation
    }

    pub fn origin_multiplicity(&self) -> u32 {
        self.origin_multiplicity
    }

    /// The nonzero zeros, with repetition for multiplicity.
    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.origin_multiplicity as usize + self.zeros.len()
    }

    pub fn fixes_origin(&self) -> bool {
        self.origin_multiplicity >= 1
    }

    /// Returns a copy with a different (unimodular) rotation.
    pub fn with_rotation(&self, rotation: Complex64) -> Result<Self> {
        Self::new(rotation, self.origin_multiplicity, self.zeros.clone())
    }

    /// Value at a point of the closed disc.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disc(z)?;
        for &a in &self.zeros {
            if (Complex64::new(1.0, 0.0) - a.conj() * z).norm() < POLE_GUARD {
                return Err(Error::Domain(format!("pole of factor with zero {a} at {z}")));
            }
        }
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without domain checks, for points already known to lie in
    /// the closed disc.
    #[inline]
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        self.rotation * powu(z, self.origin_multiplicity) * factor_product(&self.zeros, z)
    }

    /// Boundary value `B(e^{iθ})`.
    pub fn eval_boundary(&self, theta: CircleAngle) -> Complex64 {
        self.eval_unchecked(theta.to_unit())
    }

    /// `(B(z), B'(z))` by the product rule; stable at zeros of `B`.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let m = self.origin_multiplicity;
        let (mut p, mut dp) = if m == 0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (powu(z, m), powu(z, m - 1) * m as f64)
        };
        for &a in &self.zeros {
            let (f, df) = factor_value_and_derivative(a, z);
            dp = dp * f + p * df;
            p *= f;
        }
        (self.rotation * p, self.rotation * dp)
    }

    /// `B'(0)`. Requires the product to fix the origin.
    pub fn derivative_at_origin(&self) -> Result<Complex64> {
        match self.origin_multiplicity {
            0 => Err(Error::Usage(
                "derivative_at_origin requires a product fixing 0".into(),
            )),
            1 => {
                let moduli: Vec<f64> = self.zeros.iter().map(|z| z.norm()).collect();
                Ok(self.rotation * pairwise_real_product(&moduli))
            }
            _ => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    /// Rotate so that `B'(0)` is real and positive.
    pub fn normalize_rotation(&self) -> Result<Self> {
        match self.origin_multiplicity {
            0 => Err(Error::Usage("normalize_rotation requires a product fixing 0".into())),
            1 => Self::new(Complex64::new(1.0, 0.0), 1, self.zeros.clone()),
            m => Err(Error::Usage(format!(
                "cannot normalize: origin multiplicity {m} gives B'(0) = 0"
            ))),
        }
    }

    /// The zero of least modulus among the nonzero zeros.
    pub fn smallest_nonzero_zero(&self) -> Option<Complex64> {
        self.zeros
            .iter()
            .copied()
            .min_by(|a, b| a.norm().total_cmp(&b.norm()))
    }
}

/// Snap roots that lie within `tol` of each other (single linkage) to their
/// common mean, so multiplicities become exact repetitions.
pub fn cluster_zeros(roots: &mut [Complex64], tol: f64) {
    let n = roots.len();
    let mut group = vec![usize::MAX; n];
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = i;
        let mut stack = vec![i];
        let mut members = vec![i];
        while let Some(k) = stack.pop() {
            for j in 0..n {
                if group[j] == usize::MAX && (roots[j] - roots[k]).norm() < tol {
                    group[j] = i;
                    stack.push(j);
                    members.push(j);
                }
            }
        }
        if members.len() > 1 {
            let mean = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
            for &j in &members {
                roots[j] = mean;
            }
        }
    }
}

/// Whether two multisets of points agree up to `tol`, matching greedily.
pub fn multiset_matches(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for &x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, &y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if d < tol && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, _)) => {
                used[j] = true;
                continue 'outer;
            }
            None => return false,
        }
    }
    true
}
