//! Forward composition `Bₙ = bₙ ∘ ⋯ ∘ b₁` by zero tracking.
//!
//! Since every generator fixes the origin, the zeros of `Bₙ` are kept by
//! `Bₙ₊₁`, and the new zeros are the `Bₙ`-preimages of the nonzero zeros
//! of `bₙ₊₁`. Composites are materialized only while their degree stays
//! below a cap; beyond it every query goes through [`CompositionSequence::nested_eval`].

use num_complex::Complex64;

use crate::diagnostics::{tail_verdict, Verdict};
use crate::error::{Error, Result};
use crate::product::{factor_product, powu, BlaschkeProduct};
use crate::roots::PreimageSolver;

pub const DEFAULT_DEGREE_CAP: u64 = 4096;

/// Relative tolerance on `|α| = 1` when recovering the rotation of a composite.
pub const ROTATION_MATCH_TOLERANCE: f64 = 1e-10;

fn probe_points() -> [Complex64; 4] {
    [
        Complex64::new(0.1, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::from_polar(0.9, 0.3),
        Complex64::from_polar(1.0, 0.7),
    ]
}

/// `b ∘ B` as an explicit Blaschke product.
pub fn compose_step(b: &BlaschkeProduct, inner: &BlaschkeProduct, degree_cap: u64) -> Result<BlaschkeProduct> {
    compose_step_with(&PreimageSolver::default(), b, inner, degree_cap)
}

pub fn compose_step_with(
    solver: &PreimageSolver,
    b: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    degree_cap: u64,
) -> Result<BlaschkeProduct> {
    if !b.fixes_origin() {
        return Err(Error::Usage("outer map of a composition step must fix 0".into()));
    }
    let degree = (b.degree() as u64).saturating_mul(inner.degree() as u64);
    if degree > degree_cap {
        return Err(Error::Capacity {
            degree,
            cap: degree_cap,
        });
    }

    // b = z^k · ∏ f_w: each zero of B is repeated k times, and each nonzero
    // zero w of b contributes B⁻¹(w).
    let k = b.origin_multiplicity();
    let origin_multiplicity = k * inner.origin_multiplicity();
    let mut zeros = Vec::with_capacity(degree as usize - origin_multiplicity as usize);
    for _ in 0..k {
        zeros.extend_from_slice(inner.zeros());
    }
    for &w in b.zeros() {
        for z in solver.preimages(inner, w)? {
            if z == Complex64::new(0.0, 0.0) {
                return Err(Error::Consistency(
                    "nonzero zero of the outer map has the origin as preimage".into(),
                ));
            }
            zeros.push(z);
        }
    }

    let unrotated = BlaschkeProduct::from_zeros(origin_multiplicity, zeros)?;
    let rotation = recover_rotation(b, inner, &unrotated)?;
    unrotated.with_rotation(rotation)
}

fn recover_rotation(
    b: &BlaschkeProduct,
    inner: &BlaschkeProduct,
    unrotated: &BlaschkeProduct,
) -> Result<Complex64> {
    let mut worst = 0.0f64;
    for p in probe_points() {
        let near_zero = unrotated.zeros().iter().any(|a| (a - p).norm() < 1e-3);
        let base = powu(p, unrotated.origin_multiplicity()) * factor_product(unrotated.zeros(), p);
        if near_zero || !(base.norm() > 1e-200) {
            continue;
        }
        let target = b.eval_unchecked(inner.eval_unchecked(p));
        let alpha = target / base;
        let err = (alpha.norm() - 1.0).abs();
        if err <= ROTATION_MATCH_TOLERANCE {
            return Ok(alpha / alpha.norm());
        }
        worst = worst.max(err);
    }
    Err(Error::Consistency(format!(
        "composite does not match nested evaluation at any probe point (||α| − 1| = {worst:e})"
    )))
}

/// Generators `b₁, b₂, …` together with the composites materialized so far.
#[derive(Debug, Clone)]
pub struct CompositionSequence {
    generators: Vec<BlaschkeProduct>,
    /// `materialized[n]` is `Bₙ`; `materialized[0]` is the identity.
    materialized: Vec<BlaschkeProduct>,
    degree_cap: u64,
    solver: PreimageSolver,
}

impl CompositionSequence {
    pub fn new(generators: Vec<BlaschkeProduct>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if !g.fixes_origin() {
                return Err(Error::InvalidInput(format!(
                    "generator {} does not fix the origin",
                    i + 1
                )));
            }
        }
        Ok(CompositionSequence {
            generators,
            materialized: vec![BlaschkeProduct::identity()],
            degree_cap: DEFAULT_DEGREE_CAP,
            solver: PreimageSolver::default(),
        })
    }

    pub fn with_degree_cap(mut self, cap: u64) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn with_solver(mut self, solver: PreimageSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn degree_cap(&self) -> u64 {
        self.degree_cap
    }

    pub fn generators(&self) -> &[BlaschkeProduct] {
        &self.generators
    }

    /// The generator `bₙ` (1-based).
    pub fn generator(&self, n: usize) -> Option<&BlaschkeProduct> {
        n.checked_sub(1).and_then(|i| self.generators.get(i))
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn push(&mut self, generator: BlaschkeProduct) -> Result<()> {
        if !generator.fixes_origin() {
            return Err(Error::InvalidInput(format!(
                "generator {} does not fix the origin",
                self.generators.len() + 1
            )));
        }
        self.generators.push(generator);
        Ok(())
    }

    /// `deg Bₙ = ∏ deg bᵢ`, or `None` on overflow.
    pub fn degree(&self, n: usize) -> Option<u64> {
        self.generators[..n.min(self.generators.len())]
            .iter()
            .try_fold(1u64, |acc, g| acc.checked_mul(g.degree() as u64))
    }

    /// Number of composites materialized so far (excluding `B₀`).
    pub fn materialized_len(&self) -> usize {
        self.materialized.len() - 1
    }

    /// `Bₙ`, if already materialized.
    pub fn composite(&self, n: usize) -> Option<&BlaschkeProduct> {
        self.materialized.get(n)
    }

    /// Materialize `B₁ … Bₙ` and return `Bₙ`.
    pub fn materialize(&mut self, n: usize) -> Result<&BlaschkeProduct> {
        if n > self.generators.len() {
            return Err(Error::Usage(format!(
                "cannot materialize B_{n}: only {} generators",
                self.generators.len()
            )));
        }
        while self.materialized.len() <= n {
            let k = self.materialized.len();
            let next = compose_step_with(
                &self.solver,
                &self.generators[k - 1],
                &self.materialized[k - 1],
                self.degree_cap,
            )?;
            log::debug!("materialized B_{k}: degree {}", next.degree());
            self.materialized.push(next);
        }
        Ok(&self.materialized[n])
    }

    /// `bₙ(…b₁(z)…)` by direct iteration.
    pub fn nested_eval(&self, n: usize, z: Complex64) -> Result<Complex64> {
        if n > self.generators.len() {
            return Err(Error::Usage(format!(
                "nested_eval: n = {n} exceeds {} generators",
                self.generators.len()
            )));
        }
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!("{z} lies outside the closed unit disc")));
        }
        Ok(self.nested_eval_range(0, n, z))
    }

    /// Apply `b_{from+1}, …, b_{to}` to `z`.
    pub(crate) fn nested_eval_range(&self, from: usize, to: usize, z: Complex64) -> Complex64 {
        self.generators[from..to]
            .iter()
            .fold(z, |w, g| g.eval_unchecked(w))
    }

    /// `∏ bᵢ'(0)` over the first `n` generators.
    pub fn chain_rule_derivative(&self, n: usize) -> Result<Complex64> {
        self.generators[..n.min(self.generators.len())]
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, g| {
                Ok(acc * g.derivative_at_origin()?)
            })
    }
}

/// Truncations `z^m ∏_{i≤N} (|zᵢ|/zᵢ)(zᵢ − z)/(1 − z̄ᵢ z)` of an infinite
/// Blaschke product given by an ordered zero list.
#[derive(Debug, Clone)]
pub struct PartialLimit {
    origin_multiplicity: u32,
    zeros: Vec<Complex64>,
    /// `tails[n] = Σ_{i>n} (1 − |zᵢ|)`
    tails: Vec<f64>,
}

impl PartialLimit {
    /// Largest last-decade increment of the Blaschke partial sums that is
    /// still accepted. A harmonic-type list adds `log 10` per decade; a
    /// summable one of moderate length adds a few hundredths.
    pub const DEFAULT_TAIL_THRESHOLD: f64 = 0.1;

    pub fn new(origin_multiplicity: u32, zeros: Vec<Complex64>) -> Result<Self> {
        Self::with_tail_threshold(origin_multiplicity, zeros, Self::DEFAULT_TAIL_THRESHOLD)
    }

    pub fn with_tail_threshold(origin_multiplicity: u32, zeros: Vec<Complex64>, threshold: f64) -> Result<Self> {
        for (i, z) in zeros.iter().enumerate() {
            let r = z.norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidInput(format!("zero {i} = {z} is not in the punctured disc")));
            }
        }
        let terms: Vec<f64> = zeros.iter().map(|z| 1.0 - z.norm()).collect();
        let mut partials = Vec::with_capacity(terms.len());
        let mut acc = 0.0;
        for t in &terms {
            acc += t;
            partials.push(acc);
        }
        // Fewer than ten zeros carry no tail information.
        if partials.len() >= 10 {
            let (verdict, increment) = tail_verdict(&partials, threshold);
            if verdict == Verdict::LikelyDivergent {
                return Err(Error::DivergentBlaschkeSum { increment });
            }
        }
        let mut tails = vec![0.0; terms.len() + 1];
        for i in (0..terms.len()).rev() {
            tails[i] = tails[i + 1] + terms[i];
        }
        Ok(PartialLimit {
            origin_multiplicity,
            zeros,
            tails,
        })
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Value of the truncation after `n` zeros.
    pub fn eval(&self, z: Complex64, n: usize) -> Result<Complex64> {
        if !(z.norm() < 1.0) {
            return Err(Error::Domain(format!("{z} is not inside the unit disc")));
        }
        let n = n.min(self.zeros.len());
        Ok(powu(z, self.origin_multiplicity) * factor_product(&self.zeros[..n], z))
    }

    /// Upper bound for `|Π_{N'} − Π_n|` on `|z| ≤ r`, any `N' > n` among the
    /// supplied zeros: `(1 + r)/(1 − r) · Σ_{i>n}(1 − |zᵢ|)`.
    pub fn truncation_bound(&self, n: usize, r: f64) -> f64 {
        let n = n.min(self.zeros.len());
        (1.0 + r) / (1.0 - r) * self.tails[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::multiset_matches;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_zero_generator(a: Complex64) -> BlaschkeProduct {
        BlaschkeProduct::from_zeros(1, vec![a]).unwrap()
    }

    #[test]
    fn squares_compose_to_fourth_power() {
        let sq = BlaschkeProduct::monomial(2);
        let c4 = compose_step(&sq, &sq, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(c4.origin_multiplicity(), 4);
        assert!(c4.zeros().is_empty());
        assert!((c4.rotation() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn factor_after_square() {
        let b = single_zero_generator(c(0.25, 0.0));
        let composite = compose_step(&b, &BlaschkeProduct::monomial(2), DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(composite.degree(), 4);
        assert_eq!(composite.origin_multiplicity(), 2);
        assert!(multiset_matches(composite.zeros(), &[c(0.5, 0.0), c(-0.5, 0.0)], 1e-12));
        for &z in &[c(0.3, 0.2), c(-0.7, 0.1), c(0.0, 0.9)] {
            let nested = b.eval(z * z).unwrap();
            assert!((composite.eval(z).unwrap() - nested).norm() < 1e-14);
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let sq = BlaschkeProduct::monomial(2);
        let err = compose_step(&sq, &BlaschkeProduct::monomial(4), 4).unwrap_err();
        assert_eq!(err, Error::Capacity { degree: 8, cap: 4 });
    }

    #[test]
    fn rotation_recovered_for_high_origin_multiplicity() {
        // 0.1^m underflows; recovery must fall back to another probe.
        let outer = BlaschkeProduct::new(Complex64::from_polar(1.0, 0.8), 300, vec![]).unwrap();
        let inner = BlaschkeProduct::monomial(2);
        let composite = compose_step(&outer, &inner, 1 << 20).unwrap();
        assert!((composite.rotation() - Complex64::from_polar(1.0, 0.8)).norm() < 1e-10);
    }

    #[test]
    fn nested_eval_examples() {
        let seq = CompositionSequence::new(vec![BlaschkeProduct::monomial(2); 3]).unwrap();
        assert!((seq.nested_eval(3, c(0.9, 0.0)).unwrap() - c(0.43046721, 0.0)).norm() < 1e-15);
        let z = c(0.2, -0.3);
        assert_eq!(seq.nested_eval(0, z).unwrap(), z);
        assert!(seq.nested_eval(4, z).is_err());
    }

    #[test]
    fn sequence_rejects_non_fixing_generator() {
        let g = BlaschkeProduct::from_zeros(0, vec![c(0.5, 0.0)]).unwrap();
        assert!(CompositionSequence::new(vec![g.clone()]).is_err());
        let mut seq = CompositionSequence::new(vec![]).unwrap();
        assert!(seq.push(g).is_err());
    }

    #[test]
    fn degree_law_and_overflow() {
        let seq = CompositionSequence::new(vec![BlaschkeProduct::monomial(2); 70]).unwrap();
        assert_eq!(seq.degree(10), Some(1024));
        assert_eq!(seq.degree(70), None);
    }

    #[test]
    fn materialization_respects_cap() {
        let mut seq = CompositionSequence::new(vec![BlaschkeProduct::monomial(2); 5])
            .unwrap()
            .with_degree_cap(8);
        assert_eq!(seq.materialize(3).unwrap().degree(), 8);
        assert!(matches!(seq.materialize(4), Err(Error::Capacity { .. })));
        assert_eq!(seq.materialized_len(), 3);
    }

    #[test]
    fn partial_limit_examples() {
        let empty = PartialLimit::new(1, vec![]).unwrap();
        assert_eq!(empty.eval(c(0.7, 0.0), 10).unwrap(), c(0.7, 0.0));

        let one = PartialLimit::new(1, vec![c(0.5, 0.0)]).unwrap();
        let expected = 0.25 * (0.5 - 0.25) / (1.0 - 0.125);
        assert!((one.eval(c(0.25, 0.0), 1).unwrap() - c(expected, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_limit_geometric_truncations_agree() {
        // 1 − 2⁻ⁱ rounds to 1 for i ≥ 54, so the sequence stops at 50.
        let zeros: Vec<Complex64> = (1..=50)
            .map(|i| Complex64::from_polar(1.0 - 0.5f64.powi(i), 0.7 * i as f64))
            .collect();
        let limit = PartialLimit::new(1, zeros).unwrap();
        let z = c(0.5, 0.0);
        let a = limit.eval(z, 40).unwrap();
        let b = limit.eval(z, 50).unwrap();
        assert!((a - b).norm() < 1e-10);
        // the tail bound dominates the observed truncation differences
        for n in [5usize, 10, 20, 40] {
            let diff = (limit.eval(z, n).unwrap() - b).norm();
            assert!(diff <= limit.truncation_bound(n, 0.5), "n = {n}");
        }
    }

    #[test]
    fn partial_limit_refuses_divergent_sum() {
        // 1 − |zᵢ| = 1/i: harmonic, last decade adds ≈ ln 10.
        let zeros: Vec<Complex64> = (2..=1000).map(|i| c(1.0 - 1.0 / i as f64, 0.0)).collect();
        assert!(matches!(
            PartialLimit::new(1, zeros),
            Err(Error::DivergentBlaschkeSum { .. })
        ));
    }
}
