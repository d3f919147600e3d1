//! Convergence criteria for forward iteration: the classification sum
//! `Σ(1 − |bₙ'(0)|)`, the Frostman sum `Σ(1 − bₙ'(0))·log(1/(1 − bₙ'(0)))`,
//! the Blaschke sum of a zero set, the Schwarz-type lower bound for
//! self-maps fixing the origin, and interior Cauchy gauges.
//!
//! Convergence verdicts are heuristics on finitely many terms and always
//! travel together with the raw partial sums.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::composition::CompositionSequence;
use crate::error::{Error, Result};
use crate::fmt_num;

/// Default largest last-decade increment still flagged as convergent.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    LikelyConvergent,
    LikelyDivergent,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LikelyConvergent => "likely convergent",
            Verdict::LikelyDivergent => "likely divergent",
        }
    }
}

/// Increment of the partial sums over the last decade `(⌊N/10⌋, N]`.
pub fn last_decade_increment(partials: &[f64]) -> f64 {
    match partials.len() {
        0 => 0.0,
        n if n < 10 => partials[n - 1],
        n => partials[n - 1] - partials[n / 10 - 1],
    }
}

pub fn tail_verdict(partials: &[f64], threshold: f64) -> (Verdict, f64) {
    let inc = last_decade_increment(partials);
    let verdict = if inc < threshold {
        Verdict::LikelyConvergent
    } else {
        Verdict::LikelyDivergent
    };
    (verdict, inc)
}

/// Running sums. Plain left-to-right addition of nonnegative terms, which
/// keeps the output exactly nondecreasing.
pub fn partial_sums<I: IntoIterator<Item = f64>>(terms: I) -> Vec<f64> {
    let mut acc = 0.0;
    terms
        .into_iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub values: Vec<f64>,
    pub last_decade_increment: f64,
    pub verdict: Verdict,
}

impl Partials {
    fn from_terms<I: IntoIterator<Item = f64>>(terms: I, threshold: f64) -> Self {
        let values = partial_sums(terms);
        let (verdict, last_decade_increment) = tail_verdict(&values, threshold);
        Partials {
            values,
            last_decade_increment,
            verdict,
        }
    }

    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn check_len(seq: &CompositionSequence, n: usize) -> Result<()> {
    if n > seq.len() {
        return Err(Error::Usage(format!("requested {n} terms but the sequence has {}", seq.len())));
    }
    Ok(())
}

/// Partial sums of `Σ_{k≤n} (1 − |b_k'(0)|)`.
pub fn classification_sum(seq: &CompositionSequence, n: usize) -> Result<Partials> {
    classification_sum_with(seq, n, DEFAULT_TAIL_THRESHOLD)
}

pub fn classification_sum_with(seq: &CompositionSequence, n: usize, threshold: f64) -> Result<Partials> {
    check_len(seq, n)?;
    let terms = seq.generators()[..n]
        .iter()
        .map(|g| g.derivative_at_origin().map(|d| 1.0 - d.norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partials::from_terms(terms, threshold))
}

/// `x·log(1/x)` with the limiting value 0 at `x = 0`.
#[inline]
pub fn frostman_term(one_minus: f64) -> f64 {
    if one_minus <= 0.0 {
        0.0
    } else {
        one_minus * (1.0 / one_minus).ln()
    }
}

/// Partial sums of `Σ_{k≤n} (1 − b_k'(0))·log(1/(1 − b_k'(0)))`.
///
/// Generators must be normalized (`b_k'(0)` real and positive).
pub fn frostman_sum(seq: &CompositionSequence, n: usize) -> Result<Partials> {
    frostman_sum_with(seq, n, DEFAULT_TAIL_THRESHOLD)
}

pub fn frostman_sum_with(seq: &CompositionSequence, n: usize, threshold: f64) -> Result<Partials> {
    check_len(seq, n)?;
    let mut terms = Vec::with_capacity(n);
    for (i, g) in seq.generators()[..n].iter().enumerate() {
        let d = g.derivative_at_origin()?;
        if d.norm() == 0.0 {
            return Err(Error::DegreeCollapse { index: i + 1 });
        }
        if !(d.re > 0.0 && d.im.abs() <= 1e-12) {
            return Err(Error::NotNormalized {
                index: i + 1,
                re: d.re,
                im: d.im,
            });
        }
        terms.push(frostman_term(1.0 - d.re));
    }
    Ok(Partials::from_terms(terms, threshold))
}

/// `Σ (1 − |z|)` over a zero multiset.
pub fn blaschke_sum(zeros: &[Complex64]) -> f64 {
    zeros.iter().fold(0.0, |acc, z| acc + (1.0 - z.norm()))
}

/// Lower bound `|z|·(1 − (1 − λ)(1 + |z|)/(1 − |z|))` for `|g(z)|`, where
/// `g` fixes 0 and `|g'(0)| = λ`. The value may be negative (vacuous).
pub fn schwarz_lower_bound(lambda: f64, z: Complex64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidInput(format!("λ = {lambda} must lie in (0, 1]")));
    }
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::Domain(format!("|z| = {r} must be < 1")));
    }
    let mu = 1.0 - lambda;
    Ok(r * (1.0 - mu * (1.0 + r) / (1.0 - r)))
}

/// Uniform polar grid on the closed disc `|z| ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarGrid {
    pub radii: usize,
    pub angles: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid {
            radii: 64,
            angles: 256,
        }
    }
}

impl PolarGrid {
    /// Grid points (the centre is omitted: every gauge vanishes there).
    pub fn points(&self, radius: f64) -> Vec<Complex64> {
        let mut pts = Vec::with_capacity(self.radii * self.angles);
        for i in 1..=self.radii {
            let r = radius * i as f64 / self.radii as f64;
            for j in 0..self.angles {
                let t = std::f64::consts::TAU * j as f64 / self.angles as f64;
                pts.push(Complex64::from_polar(r, t));
            }
        }
        pts
    }
}

/// `sup |B_{n+m}(z) − Bₙ(z)|` over the polar grid of the given radius,
/// evaluated by nested iteration.
pub fn interior_cauchy_gauge(
    seq: &CompositionSequence,
    n: usize,
    m: usize,
    radius: f64,
    grid: PolarGrid,
) -> Result<f64> {
    if !(0.0..1.0).contains(&radius) {
        return Err(Error::InvalidInput(format!("gauge radius {radius} must lie in [0, 1)")));
    }
    check_len(seq, n + m)?;
    if m == 0 {
        return Ok(0.0);
    }
    let points = grid.points(radius);
    let diffs: Vec<f64> = points
        .par_iter()
        .map(|&z| {
            let bn = seq.nested_eval_range(0, n, z);
            let bnm = seq.nested_eval_range(n, n + m, bn);
            (bnm - bn).norm()
        })
        .collect();
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

/// Classification partial sums recomputed from materialized composites via
/// `|Bₖ'(0)| / |Bₖ₋₁'(0)|`.
pub fn classification_from_composites(seq: &mut CompositionSequence, n: usize) -> Result<Vec<f64>> {
    seq.materialize(n)?;
    let mut terms = Vec::with_capacity(n);
    for k in 1..=n {
        let prev = seq.composite(k - 1).expect("materialized").derivative_at_origin()?.norm();
        let cur = seq.composite(k).expect("materialized").derivative_at_origin()?.norm();
        terms.push(1.0 - cur / prev);
    }
    Ok(partial_sums(terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorGauge {
    pub n: usize,
    pub m: usize,
    pub radius: f64,
    pub sup_difference: f64,
}

/// Summary of the convergence diagnostics of a composition sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub classification_partials: Vec<f64>,
    pub frostman_partials: Vec<f64>,
    /// Over the zeros of the last materialized composite, if any.
    pub blaschke_sum: Option<f64>,
    pub interior_gauges: Vec<InteriorGauge>,
    pub verdicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsOptions {
    pub terms: usize,
    pub tail_threshold: f64,
    /// `(n, m)` pairs for the interior gauges.
    pub gauge_pairs: Vec<(usize, usize)>,
    pub gauge_radius: f64,
    pub grid: PolarGrid,
}

impl DiagnosticsReport {
    /// Collect the diagnostics; `blaschke_sum` is taken over the zeros of
    /// the last materialized composite (`None` when none is).
    pub fn build(seq: &CompositionSequence, opts: &DiagnosticsOptions) -> Result<Self> {
        let classification = classification_sum_with(seq, opts.terms, opts.tail_threshold)?;
        let mut verdicts = vec![format!("classification: {}", classification.verdict.as_str())];
        let frostman_partials = match frostman_sum_with(seq, opts.terms, opts.tail_threshold) {
            Ok(p) => {
                verdicts.push(format!("frostman: {}", p.verdict.as_str()));
                p.values
            }
            Err(e) => {
                verdicts.push(format!("frostman: undefined ({e})"));
                Vec::new()
            }
        };
        let blaschke_sum = match seq.materialized_len() {
            0 => None,
            n => seq.composite(n).map(|b| blaschke_sum(b.zeros())),
        };
        let interior_gauges = opts
            .gauge_pairs
            .iter()
            .map(|&(n, m)| {
                interior_cauchy_gauge(seq, n, m, opts.gauge_radius, opts.grid).map(|sup_difference| {
                    InteriorGauge {
                        n,
                        m,
                        radius: opts.gauge_radius,
                        sup_difference,
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticsReport {
            classification_partials: classification.values,
            frostman_partials,
            blaschke_sum,
            interior_gauges,
            verdicts,
        })
    }

    /// Flat `key = value` text, one entry per line.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.classification_partials.iter().enumerate() {
            let _ = writeln!(out, "classification.{} = {}", i + 1, fmt_num(*v));
        }
        for (i, v) in self.frostman_partials.iter().enumerate() {
            let _ = writeln!(out, "frostman.{} = {}", i + 1, fmt_num(*v));
        }
        match self.blaschke_sum {
            Some(v) => {
                let _ = writeln!(out, "blaschke_sum = {}", fmt_num(v));
            }
            None => {
                let _ = writeln!(out, "blaschke_sum = not computed (no composite materialized)");
            }
        }
        for g in &self.interior_gauges {
            let _ = writeln!(
                out,
                "gauge.n{}.m{}.r{} = {}",
                g.n,
                g.m,
                g.radius,
                fmt_num(g.sup_difference)
            );
        }
        for (i, v) in self.verdicts.iter().enumerate() {
            let _ = writeln!(out, "verdict.{} = {}", i + 1, v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::BlaschkeProduct;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn geometric(n: usize) -> CompositionSequence {
        let gens = (1..=n)
            .map(|k| {
                BlaschkeProduct::from_zeros(1, vec![Complex64::from_polar(1.0 - 0.5f64.powi(k as i32), k as f64)])
                    .unwrap()
            })
            .collect();
        CompositionSequence::new(gens).unwrap()
    }

    #[test]
    fn squares_diverge() {
        let seq = CompositionSequence::new(vec![BlaschkeProduct::monomial(2); 5]).unwrap();
        let p = classification_sum(&seq, 5).unwrap();
        assert_eq!(p.values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(p.verdict, Verdict::LikelyDivergent);
        assert_eq!(frostman_sum(&seq, 5).unwrap_err(), Error::DegreeCollapse { index: 1 });
    }

    #[test]
    fn geometric_classification_converges_to_one() {
        let seq = geometric(50);
        let p = classification_sum(&seq, 50).unwrap();
        assert!((p.last() - (1.0 - 0.5f64.powi(50))).abs() < 1e-12);
        // 50 terms are too few for the default threshold: the last decade
        // (5, 50] still adds 2⁻⁵.
        assert!((p.last_decade_increment - (0.5f64.powi(5) - 0.5f64.powi(50))).abs() < 1e-15);
        assert_eq!(p.verdict, Verdict::LikelyDivergent);
    }

    #[test]
    fn geometric_frostman_limit() {
        let seq = geometric(50);
        let p = frostman_sum(&seq, 50).unwrap();
        // Σ n·2⁻ⁿ·ln 2 = 2 ln 2
        assert!((p.last() - 2.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((2.0 * std::f64::consts::LN_2 - 1.386_294_4).abs() < 1e-7);
    }

    #[test]
    fn frostman_edge_cases() {
        assert_eq!(frostman_term(0.0), 0.0);
        let identity = CompositionSequence::new(vec![BlaschkeProduct::identity()]).unwrap();
        assert_eq!(frostman_sum(&identity, 1).unwrap().values, vec![0.0]);
        let rotated = CompositionSequence::new(vec![BlaschkeProduct::new(c(0.0, 1.0), 1, vec![c(0.5, 0.0)]).unwrap()])
            .unwrap();
        assert!(matches!(frostman_sum(&rotated, 1), Err(Error::NotNormalized { index: 1, .. })));
    }

    #[test]
    fn blaschke_sum_examples() {
        assert!(blaschke_sum(&[]) == 0.0 && blaschke_sum(&[]).is_sign_positive());
        assert_eq!(blaschke_sum(&[c(0.5, 0.0), c(0.0, 0.5)]), 1.0);
    }

    #[test]
    fn schwarz_bound_examples() {
        let z = c(0.3, 0.4);
        assert!((schwarz_lower_bound(1.0, z).unwrap() - 0.5).abs() < 1e-15);
        assert!((schwarz_lower_bound(0.9, c(0.5, 0.0)).unwrap() - 0.35).abs() < 1e-15);
        assert!(matches!(schwarz_lower_bound(0.5, c(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(schwarz_lower_bound(0.0, c(0.1, 0.0)).is_err());
        // vacuous bound is returned as-is
        assert!(schwarz_lower_bound(0.1, c(0.09, 0.0)).unwrap() < 0.0);
    }

    #[test]
    fn gauge_trivial_cases() {
        let seq = geometric(20);
        let grid = PolarGrid { radii: 4, angles: 16 };
        assert_eq!(interior_cauchy_gauge(&seq, 5, 0, 0.5, grid).unwrap(), 0.0);
        let id = CompositionSequence::new(vec![BlaschkeProduct::identity(); 6]).unwrap();
        assert_eq!(interior_cauchy_gauge(&id, 2, 4, 0.9, grid).unwrap(), 0.0);
        assert!(interior_cauchy_gauge(&seq, 15, 10, 0.5, grid).is_err());
        assert!(interior_cauchy_gauge(&seq, 1, 1, 1.0, grid).is_err());
    }

    #[test]
    fn last_decade_definition() {
        let p: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert_eq!(last_decade_increment(&p), 90.0);
        assert_eq!(last_decade_increment(&[0.5, 0.7]), 0.7);
        assert_eq!(last_decade_increment(&[]), 0.0);
    }

    #[test]
    fn report_key_value_lines() {
        let seq = geometric(3);
        let report = DiagnosticsReport::build(
            &seq,
            &DiagnosticsOptions {
                terms: 3,
                tail_threshold: DEFAULT_TAIL_THRESHOLD,
                gauge_pairs: vec![(1, 1)],
                gauge_radius: 0.5,
                grid: PolarGrid { radii: 2, angles: 8 },
            },
        )
        .unwrap();
        let text = report.to_key_value();
        assert!(text.contains("classification.3 = "));
        assert!(text.contains("frostman.1 = "));
        assert!(text.contains("gauge.n1.m1.r0.5 = "));
        assert_eq!(text.lines().count(), 3 + 3 + 1 + 1 + 2);
    }
}
