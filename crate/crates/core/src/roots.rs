//! Preimages `B⁻¹(w)` of a finite Blaschke product.
//!
//! The roots of `B(z) = w` are the roots of the degree-`D` polynomial
//! `P = N − w·Q`, where `B = N/Q`. All of them are found at once with the
//! Aberth–Ehrlich iteration. The Newton ratio `P/P'` is evaluated through
//! the product form, `P'/P = Q'/Q + B'/(B − w)`, so the (badly scaled)
//! coefficients of `P` are never formed.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::product::{cluster_zeros, BlaschkeProduct, CLUSTER_TOLERANCE};

/// Roots closer to the circle than this signal numerical breakdown.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Residual allowance per unit of `|B'(z)|`, a few ulps of `z`.
const CONDITIONED_RESIDUAL: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreimageSolver {
    pub max_iterations: usize,
    /// Relative step size at which a root is considered converged.
    pub step_tolerance: f64,
    /// Newton polishing steps on `B − w` after the simultaneous iteration.
    pub polish_steps: usize,
    pub residual_tolerance: f64,
}

impl Default for PreimageSolver {
    fn default() -> Self {
        PreimageSolver {
            max_iterations: 500,
            step_tolerance: 1e-14,
            polish_steps: 3,
            residual_tolerance: 1e-10,
        }
    }
}

impl PreimageSolver {
    /// All `degree(B)` solutions of `B(z) = w`, with multiplicity.
    pub fn preimages(&self, b: &BlaschkeProduct, w: Complex64) -> Result<Vec<Complex64>> {
        if !(w.norm() < 1.0) {
            return Err(Error::Domain(format!("target {w} is not inside the unit disc")));
        }
        let degree = b.degree();
        if degree == 0 {
            return Err(Error::Usage("preimages of a constant product".into()));
        }
        if w == Complex64::new(0.0, 0.0) {
            let mut roots = vec![Complex64::new(0.0, 0.0); b.origin_multiplicity() as usize];
            roots.extend_from_slice(b.zeros());
            return Ok(roots);
        }

        let mut roots = initial_guesses(degree, w);
        let mut converged = vec![false; degree];
        let mut iterations = 0;
        while iterations < self.max_iterations && converged.iter().any(|c| !c) {
            iterations += 1;
            for k in 0..degree {
                if converged[k] {
                    continue;
                }
                let zk = roots[k];
                let ratio = newton_ratio(b, w, zk);
                if ratio == Complex64::new(0.0, 0.0) {
                    converged[k] = true;
                    continue;
                }
                let repulsion: Complex64 = roots
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &zj)| {
                        let d = zk - zj;
                        if d == Complex64::new(0.0, 0.0) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            d.inv()
                        }
                    })
                    .sum();
                let mut step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if !step.is_finite() {
                    step = ratio;
                }
                if !step.is_finite() {
                    // Landed on a pole of B; nudge towards the origin.
                    roots[k] = zk * 0.5;
                    continue;
                }
                roots[k] = zk - step;
                if step.norm() <= self.step_tolerance * zk.norm().max(1.0) {
                    converged[k] = true;
                }
            }
        }

        for z in roots.iter_mut() {
            for _ in 0..self.polish_steps {
                let (v, d) = b.eval_with_derivative(*z);
                let step = (v - w) / d;
                if step.is_finite() {
                    *z -= step;
                }
            }
        }

        // A root correct to machine precision still leaves a residual of
        // about ε·|B'(z)|, which exceeds any fixed tolerance near the circle.
        let mut worst_residual = 0.0f64;
        let mut acceptable = true;
        for &z in &roots {
            let (v, d) = b.eval_with_derivative(z);
            let residual = (v - w).norm();
            worst_residual = worst_residual.max(residual);
            acceptable &= residual < self.residual_tolerance.max(CONDITIONED_RESIDUAL * d.norm());
        }
        if !acceptable {
            return Err(Error::RootFinding {
                iterations,
                worst_residual,
            });
        }
        if let Some(bad) = roots.iter().find(|z| z.norm() >= 1.0 - BOUNDARY_MARGIN) {
            return Err(Error::Consistency(format!(
                "preimage {bad} of interior point {w} lies on or outside the unit circle"
            )));
        }
        cluster_zeros(&mut roots, CLUSTER_TOLERANCE);
        log::trace!("preimages: degree {degree}, {iterations} iterations, residual {worst_residual:e}");
        Ok(roots)
    }
}

/// Convenience wrapper around [`PreimageSolver::default`].
pub fn preimages(b: &BlaschkeProduct, w: Complex64) -> Result<Vec<Complex64>> {
    PreimageSolver::default().preimages(b, w)
}

fn initial_guesses(degree: usize, w: Complex64) -> Vec<Complex64> {
    // Preimages satisfy |z| ≥ |w| by Schwarz; start on a circle between
    // |w| and 1, rotated off the real axis to avoid symmetric stalls.
    let radius = 0.5 * (1.0 + w.norm());
    let offset = 0.4 + w.arg();
    (0..degree)
        .map(|k| Complex64::from_polar(radius, offset + TAU * k as f64 / degree as f64))
        .collect()
}

/// `P(z)/P'(z)` for `P = Q·(B − w)`.
fn newton_ratio(b: &BlaschkeProduct, w: Complex64, z: Complex64) -> Complex64 {
    let (value, deriv) = b.eval_with_derivative(z);
    let diff = value - w;
    if diff == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let q_log_derivative: Complex64 = b
        .zeros()
        .iter()
        .map(|a| {
            let ac = a.conj();
            -ac / (Complex64::new(1.0, 0.0) - ac * z)
        })
        .sum();
    (q_log_derivative + deriv / diff).inv()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::multiset_matches;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_roots() {
        let roots = preimages(&BlaschkeProduct::monomial(2), c(0.25, 0.0)).unwrap();
        assert!(multiset_matches(&roots, &[c(0.5, 0.0), c(-0.5, 0.0)], 1e-12));
    }

    #[test]
    fn identity_preimage() {
        let w = c(0.3, 0.1);
        let roots = preimages(&BlaschkeProduct::identity(), w).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - w).norm() < 1e-15);
    }

    #[test]
    fn zeros_are_preimages_of_zero() {
        let b = BlaschkeProduct::from_zeros(1, vec![c(0.5, 0.0)]).unwrap();
        let roots = preimages(&b, c(0.0, 0.0)).unwrap();
        assert!(multiset_matches(&roots, &[c(0.0, 0.0), c(0.5, 0.0)], 1e-15));
    }

    #[test]
    fn rotated_product_with_multiple_origin_zero() {
        let b = BlaschkeProduct::new(
            Complex64::from_polar(1.0, 1.1),
            3,
            vec![c(0.2, 0.7), c(-0.6, -0.1)],
        )
        .unwrap();
        let w = c(-0.1, 0.35);
        let roots = preimages(&b, w).unwrap();
        assert_eq!(roots.len(), 5);
        for z in roots {
            assert!(z.norm() < 1.0);
            assert!((b.eval(z).unwrap() - w).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_targets() {
        assert!(matches!(
            preimages(&BlaschkeProduct::identity(), c(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            preimages(&BlaschkeProduct::monomial(0), c(0.1, 0.0)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn ill_conditioned_roots_near_the_circle() {
        // Degree-128 composite of the geometric family: some preimages of a
        // zero at 1 − 2⁻⁸ sit within 1e-9 of the circle where |B'| ~ 6e6.
        let gens = crate::families::geometric_generators(8, 0.5, 1.0).unwrap();
        let mut inner = gens[0].clone();
        for g in &gens[1..7] {
            inner = crate::compose_step(g, &inner, 1 << 20).unwrap();
        }
        let target = gens[7].zeros()[0];
        let roots = preimages(&inner, target).unwrap();
        assert_eq!(roots.len(), 128);
        for z in roots {
            let (v, d) = inner.eval_with_derivative(z);
            assert!((v - target).norm() < 1e-10_f64.max(16.0 * f64::EPSILON * d.norm()));
        }
    }

    #[test]
    fn reports_non_convergence() {
        let solver = PreimageSolver {
            max_iterations: 0,
            polish_steps: 0,
            ..PreimageSolver::default()
        };
        let b = BlaschkeProduct::from_zeros(1, vec![c(0.3, 0.4), c(-0.7, 0.1)]).unwrap();
        assert!(matches!(
            solver.preimages(&b, c(0.2, 0.0)),
            Err(Error::RootFinding { .. })
        ));
    }
}
