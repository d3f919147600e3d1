//! Property checks at desk scale, one per acceptance criterion.
//!
//! Every check returns a [`CriterionOutcome`] carrying its measured
//! quantities. The CSV body written from the outcomes contains only
//! numbers derived from seeded computations, so two runs with the same
//! configuration produce identical bytes; wall-clock times are kept out of
//! it and judged separately.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::{circular_distance, CircleAngle};
use crate::boundary::{
    boundary_arg_shift, measure_preservation_test, psi_l1_distance, radial_limit_probe, rybkin_bound,
    rybkin_gap_term, span_zeros, winding_number,
};
use crate::composition::{CompositionSequence, DEFAULT_DEGREE_CAP};
use crate::counterexample::{build_sequence, divergence_report, DivergenceOptions, RadiiSpec};
use crate::diagnostics::{classification_sum, frostman_sum, schwarz_lower_bound};
use crate::error::Result;
use crate::families::{geometric_generators, random_generators, random_product};
use crate::fmt_num;
use crate::product::BlaschkeProduct;
use crate::stats::ks_critical_value;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// Seed of the random generator suite (criteria 1–5).
    pub seed: u64,
    /// Seed of the measure-preservation samples (criterion 6).
    pub ks_seed: u64,
    pub ks_samples: usize,
    pub counterexample_terms: usize,
    pub counterexample_angles: usize,
    pub window: usize,
    pub degree_cap: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            ks_seed: 7,
            ks_samples: 1_000_000,
            counterexample_terms: 100_000,
            counterexample_angles: 100,
            window: 1000,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub metrics: Vec<Metric>,
    /// Violated conditions; empty when the numerical checks pass.
    pub failures: Vec<String>,
    pub elapsed: Duration,
    pub time_limit: Option<Duration>,
}

impl CriterionOutcome {
    pub fn numerics_passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn within_time_limit(&self) -> bool {
        self.time_limit.is_none_or(|limit| self.elapsed <= limit)
    }

    pub fn passed(&self) -> bool {
        self.numerics_passed() && self.within_time_limit()
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// `[PASS] 3 chain rule … (0.01 s)` followed by the failed conditions.
    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "[{}] {} {} ({:.2} s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        );
        if let Some(limit) = self.time_limit {
            let _ = write!(line, ", limit {} s", limit.as_secs());
        }
        line.push(')');
        for f in &self.failures {
            let _ = write!(line, "; {f}");
        }
        if !self.within_time_limit() {
            line.push_str("; time limit exceeded");
        }
        line
    }
}

/// Collects metrics and failed conditions for one criterion.
struct Check {
    metrics: Vec<Metric>,
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            metrics: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn run(id: u8, title: &'static str, time_limit: Option<u64>, body: impl FnOnce(&mut Check) -> Result<()>) -> CriterionOutcome {
    let start = Instant::now();
    let mut check = Check::new();
    if let Err(e) = body(&mut check) {
        check.failures.push(format!("error: {e}"));
    }
    let elapsed = start.elapsed();
    log::info!("criterion {id} finished in {:.2} s", elapsed.as_secs_f64());
    CriterionOutcome {
        id,
        title,
        metrics: check.metrics,
        failures: check.failures,
        elapsed,
        time_limit: time_limit.map(Duration::from_secs),
    }
}

/// The eight seeded degree-2 generators with `B₁ … B₈` materialized.
pub fn random_suite(cfg: &VerifyConfig) -> Result<CompositionSequence> {
    let mut seq = CompositionSequence::new(random_generators(cfg.seed, 8, 2))?.with_degree_cap(cfg.degree_cap);
    seq.materialize(8)?;
    Ok(seq)
}

/// Uniform points in the disc `|z| ≤ radius`.
fn disc_points(rng: &mut ChaCha8Rng, count: usize, radius: f64) -> Vec<Complex64> {
    (0..count)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, rng.gen_range(0.0..TAU))
        })
        .collect()
}

/// Random products fixing 0 with one to three further zeros.
fn small_products(seed: u64, count: usize, modulus: (f64, f64)) -> Vec<BlaschkeProduct> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let extra = rng.gen_range(1..=3);
            random_product(&mut rng, 1, extra, modulus)
        })
        .collect()
}

pub fn degree_law(cfg: &VerifyConfig) -> CriterionOutcome {
    run(1, "degree law and representation equivalence", Some(10), |c| {
        let seq = random_suite(cfg)?;
        let b8 = seq.composite(8).expect("materialized");
        c.metric("degree", b8.degree() as f64);
        c.require(b8.degree() == 256 && seq.degree(8) == Some(256), || {
            format!("degree {} (law {:?}) != 256", b8.degree(), seq.degree(8))
        });
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let mut worst = 0.0f64;
        for z in disc_points(&mut rng, 500, 0.9) {
            worst = worst.max((b8.eval(z)? - seq.nested_eval(8, z)?).norm());
        }
        c.metric("max_product_vs_nested", worst);
        c.require(worst < 1e-9, || format!("product vs nested {worst:e} ≥ 1e-9"));
        Ok(())
    })
}

pub fn zero_nesting(cfg: &VerifyConfig) -> CriterionOutcome {
    run(2, "zero nesting", None, |c| {
        let seq = random_suite(cfg)?;
        let mut worst_product = 0.0f64;
        let mut worst_nested = 0.0f64;
        for n in 1..=7 {
            let bn = seq.composite(n).expect("materialized");
            let next = seq.composite(n + 1).expect("materialized");
            let mut zeros = bn.zeros().to_vec();
            if bn.origin_multiplicity() > 0 {
                zeros.push(Complex64::new(0.0, 0.0));
            }
            for z in zeros {
                worst_product = worst_product.max(next.eval(z)?.norm());
                worst_nested = worst_nested.max(seq.nested_eval(n + 1, z)?.norm());
            }
        }
        c.metric("max_product_modulus", worst_product);
        c.metric("max_nested_modulus", worst_nested);
        c.require(worst_product < 1e-8, || format!("|B_(n+1)(zero)| = {worst_product:e} ≥ 1e-8"));
        c.require(worst_nested < 1e-8, || format!("nested |B_(n+1)(zero)| = {worst_nested:e} ≥ 1e-8"));
        Ok(())
    })
}

pub fn chain_rule(cfg: &VerifyConfig) -> CriterionOutcome {
    run(3, "chain rule and smallest-zero bound", None, |c| {
        let seq = random_suite(cfg)?;
        let mut worst_rel = 0.0f64;
        for n in 1..=8 {
            let direct = seq.composite(n).expect("materialized").derivative_at_origin()?;
            let chain = seq.chain_rule_derivative(n)?;
            worst_rel = worst_rel.max((direct - chain).norm() / chain.norm());
        }
        c.metric("max_relative_error", worst_rel);
        c.require(worst_rel < 1e-10, || format!("relative error {worst_rel:e} ≥ 1e-10"));
        let mut min_margin = f64::INFINITY;
        for g in seq.generators() {
            if let Some(z) = g.smallest_nonzero_zero() {
                min_margin = min_margin.min(z.norm() - g.derivative_at_origin()?.norm());
            }
        }
        c.metric("min_smallest_zero_margin", min_margin);
        c.require(min_margin >= -1e-12, || format!("|z*| − |b'(0)| = {min_margin:e} < −1e-12"));
        Ok(())
    })
}

pub fn schwarz_bounds(cfg: &VerifyConfig) -> CriterionOutcome {
    run(4, "Schwarz upper and lower bounds", None, |c| {
        let seq = random_suite(cfg)?;
        let products: Vec<&BlaschkeProduct> = seq
            .generators()
            .iter()
            .chain((1..=8).map(|n| seq.composite(n).expect("materialized")))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
        let mut upper_excess = f64::NEG_INFINITY;
        let mut lower_deficit = f64::NEG_INFINITY;
        let mut lower_points = 0usize;
        for g in products {
            let lambda = g.derivative_at_origin()?.norm();
            for z in disc_points(&mut rng, 10_000, 1.0) {
                let v = g.eval(z)?.norm();
                upper_excess = upper_excess.max(v - z.norm());
                if z.norm() <= lambda {
                    lower_deficit = lower_deficit.max(schwarz_lower_bound(lambda, z)? - v);
                    lower_points += 1;
                }
            }
            for z in disc_points(&mut rng, 10_000, lambda) {
                lower_deficit = lower_deficit.max(schwarz_lower_bound(lambda, z)? - g.eval(z)?.norm());
                lower_points += 1;
            }
        }
        c.metric("max_upper_excess", upper_excess);
        c.metric("max_lower_deficit", lower_deficit);
        c.metric("lower_bound_points", lower_points as f64);
        c.require(upper_excess <= 1e-12, || format!("|B(z)| − |z| = {upper_excess:e} > 1e-12"));
        c.require(lower_deficit <= 1e-12, || format!("lower bound exceeded by {lower_deficit:e}"));
        Ok(())
    })
}

pub fn arg_identity(cfg: &VerifyConfig) -> CriterionOutcome {
    run(5, "boundary argument identity and winding number", None, |c| {
        let products = small_products(cfg.seed.wrapping_add(3), 5, (0.1, 0.9));
        let angles = 1024;
        let mut worst_probe = 0.0f64;
        let mut skipped = 0usize;
        let mut worst_winding = 0.0f64;
        for p in &products {
            for j in 0..angles {
                let theta = TAU * (j as f64 + 0.5) / angles as f64;
                if p.zeros().iter().any(|z| circular_distance(theta, z.arg()) < 1e-3) {
                    skipped += 1;
                    continue;
                }
                let t = CircleAngle::new(theta);
                let shift = boundary_arg_shift(p, t)?.shift;
                let probe = radial_limit_probe(p, t, &[1e-8])?[0];
                worst_probe = worst_probe.max((probe - Complex64::from_polar(1.0, theta + shift)).norm());
            }
            let w = winding_number(p, 1 << 16);
            worst_winding = worst_winding.max(TAU * (w - p.degree() as f64).abs());
        }
        let seq = random_suite(cfg)?;
        for n in 1..=4 {
            let b = seq.composite(n).expect("materialized");
            let w = winding_number(b, 1 << 18);
            worst_winding = worst_winding.max(TAU * (w - b.degree() as f64).abs());
        }
        c.metric("max_probe_mismatch", worst_probe);
        c.metric("skipped_angles", skipped as f64);
        c.metric("max_winding_error", worst_winding);
        c.require(worst_probe < 1e-6, || format!("probe mismatch {worst_probe:e} ≥ 1e-6"));
        c.require(worst_winding < 1e-6, || format!("winding error {worst_winding:e} ≥ 1e-6"));
        Ok(())
    })
}

pub fn measure_preservation(cfg: &VerifyConfig) -> CriterionOutcome {
    run(6, "measure preservation", Some(30), |c| {
        let products = small_products(cfg.ks_seed, 5, (0.05, 0.95));
        let critical = ks_critical_value(cfg.ks_samples, 0.01);
        c.metric("critical_value", critical);
        for (i, p) in products.iter().enumerate() {
            let d = measure_preservation_test(p, cfg.ks_samples, cfg.ks_seed.wrapping_add(i as u64))?;
            c.metric(format!("ks_{}_degree_{}", i + 1, p.degree()), d);
            c.require(d < critical, || format!("product {} KS {d:e} ≥ {critical:e}", i + 1));
        }
        Ok(())
    })
}

pub fn rybkin_envelope(_cfg: &VerifyConfig) -> CriterionOutcome {
    run(7, "L1 envelope for a Frostman-summable sequence", None, |c| {
        let seq = CompositionSequence::new(geometric_generators(15, 0.5, 1.0)?)?;
        let mut worst_excess = f64::NEG_INFINITY;
        let mut worst_instability = 0.0f64;
        for n in 0..=10 {
            for m in 1..=5 {
                let coarse = psi_l1_distance(&seq, n, m, 4096)?;
                let fine = psi_l1_distance(&seq, n, m, 8192)?;
                let bound = rybkin_bound(&span_zeros(&seq, n, m));
                worst_excess = worst_excess.max(coarse - bound);
                worst_instability = worst_instability.max((coarse - fine).abs());
            }
        }
        // Gaps 2⁻ᵏ, summed directly: beyond k = 53 the moduli round to 1.
        let tail: f64 = (11..=200).map(|k| rybkin_gap_term(0.5f64.powi(k))).sum();
        c.metric("max_l1_minus_bound", worst_excess);
        c.metric("max_node_doubling_change", worst_instability);
        c.metric("bound_tail_from_11", tail);
        c.require(worst_excess <= 1e-3, || format!("L1 exceeds bound by {worst_excess:e}"));
        c.require(worst_instability < 1e-4, || format!("node doubling changes L1 by {worst_instability:e}"));
        c.require(tail < 0.01, || format!("bound tail {tail:.5} ≥ 0.01"));
        Ok(())
    })
}

pub fn counterexample_contrast(cfg: &VerifyConfig) -> CriterionOutcome {
    run(8, "interior convergence against boundary oscillation", Some(300), |c| {
        let n = cfg.counterexample_terms;
        let ce = build_sequence(&RadiiSpec::default(), n)?;
        let classification = classification_sum(&ce.sequence, n)?;
        let frostman = frostman_sum(&ce.sequence, n)?;
        let ci = classification.last_decade_increment;
        let fi = frostman.last_decade_increment;
        c.metric("classification_last_decade", ci);
        c.metric("frostman_last_decade", fi);
        c.require(ci < 1e-3, || format!("classification last-decade increment {ci:.5} ≥ 1e-3"));
        c.require(fi > 10.0 * ci, || format!("Frostman increment {fi:.5} ≤ 10 × {ci:.5}"));

        let angles = cfg.counterexample_angles;
        let thetas: Vec<f64> = (0..angles).map(|j| TAU * (j as f64 + 0.5) / angles as f64).collect();
        let opts = DivergenceOptions {
            window: cfg.window,
            ..DivergenceOptions::default()
        };
        let report = divergence_report(&ce.sequence, &thetas, n, &opts)?;
        let gauge = report.interior_gauges.last().copied().unwrap_or(f64::NAN);
        c.metric("interior_gauge_final", gauge);
        c.require(gauge < 1e-6, || format!("interior gauge {gauge:e} ≥ 1e-6"));

        let mut finals = report.final_oscillations();
        finals.sort_by(f64::total_cmp);
        c.metric("oscillation_final_min", finals.first().copied().unwrap_or(f64::NAN));
        c.metric("oscillation_final_median", finals.get(finals.len() / 2).copied().unwrap_or(f64::NAN));
        let persistent = report.persistent_count(cfg.window);
        let needed = (angles * 9).div_ceil(10);
        c.metric("persistent_angles", persistent as f64);
        c.require(persistent >= needed, || {
            format!("oscillation stays at or above its first-window value for {persistent} of {angles} angles (need {needed})")
        });
        Ok(())
    })
}

/// In-process reproducibility: a seeded composition check and a short
/// divergence report, each computed twice and compared byte for byte.
pub fn determinism(cfg: &VerifyConfig) -> CriterionOutcome {
    run(9, "determinism", None, |c| {
        let first = csv_body(&[degree_law(cfg)]);
        let second = csv_body(&[degree_law(cfg)]);
        let small = || -> Result<String> {
            let ce = build_sequence(&RadiiSpec::default(), 2000)?;
            let opts = DivergenceOptions {
                window: 100,
                ..DivergenceOptions::default()
            };
            let thetas: Vec<f64> = (0..10).map(|j| 0.3 + 0.6 * j as f64).collect();
            Ok(divergence_report(&ce.sequence, &thetas, 2000, &opts)?.to_csv())
        };
        let same_suite = first == second;
        let same_report = small()? == small()?;
        c.metric("suite_identical", f64::from(u8::from(same_suite)));
        c.metric("report_identical", f64::from(u8::from(same_report)));
        c.require(same_suite, || "seeded suite output differs between runs".into());
        c.require(same_report, || "divergence report differs between runs".into());
        Ok(())
    })
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionOutcome> {
    vec![
        degree_law(cfg),
        zero_nesting(cfg),
        chain_rule(cfg),
        schwarz_bounds(cfg),
        arg_identity(cfg),
        measure_preservation(cfg),
        rybkin_envelope(cfg),
        counterexample_contrast(cfg),
        determinism(cfg),
    ]
}

pub const VERIFY_CSV_HEADER: &str = "criterion,metric,value";

/// `criterion,metric,value` rows, plus one `numerics_passed` row per
/// criterion. Timings are excluded.
pub fn csv_body(outcomes: &[CriterionOutcome]) -> String {
    let mut out = String::from(VERIFY_CSV_HEADER);
    out.push('\n');
    for o in outcomes {
        for m in &o.metrics {
            let _ = writeln!(out, "{},{},{}", o.id, m.name, fmt_num(m.value));
        }
        let _ = writeln!(out, "{},numerics_passed,{}", o.id, u8::from(o.numerics_passed()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_formatting() {
        let o = CriterionOutcome {
            id: 3,
            title: "example",
            metrics: vec![Metric {
                name: "x".into(),
                value: 0.5,
            }],
            failures: vec!["x too big".into()],
            elapsed: Duration::from_millis(20),
            time_limit: Some(Duration::from_secs(1)),
        };
        assert!(!o.passed());
        assert!(o.within_time_limit());
        assert!(o.summary_line().starts_with("[FAIL] 3 example"));
        assert!(o.summary_line().ends_with("; x too big"));
        assert_eq!(
            csv_body(&[o]),
            "criterion,metric,value\n3,x,5.0000000000000000e-1\n3,numerics_passed,0\n"
        );
    }

    #[test]
    fn errors_become_failures() {
        let o = run(1, "t", None, |_| Err(crate::Error::Usage("boom".into())));
        assert_eq!(o.failures, vec!["error: usage error: boom".to_string()]);
    }
}
