//! The five experiments behind the subcommands.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use blaschke::boundary::{
    circle_orbit, orbit_csv_rows, orbit_measure_preservation_test, psi_l1_distance, rybkin_bound, span_zeros,
};
use blaschke::counterexample::{divergence_report, DivergenceOptions};
use blaschke::diagnostics::{classification_sum, frostman_sum, DiagnosticsOptions, DiagnosticsReport, PolarGrid};
use blaschke::stats::ks_critical_value;
use blaschke::verify::{csv_body, run_all, VERIFY_CSV_HEADER};
use blaschke::{fmt_num, CircleAngle};

use crate::config::ExperimentConfig;
use crate::report::{provenance, ArtifactWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Compose,
    Diagnose,
    Boundary,
    Counterexample,
    Verify,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Compose => "compose",
            Operation::Diagnose => "diagnose",
            Operation::Boundary => "boundary",
            Operation::Counterexample => "counterexample",
            Operation::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    /// Human-readable summary, also written to `summary.txt`.
    pub summary: String,
    /// False when a check selected by the operation failed.
    pub success: bool,
}

pub fn run(op: Operation, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = ArtifactWriter::new(&cfg.output.directory, provenance(op.name(), cfg))?;
    let (summary, success) = match op {
        Operation::Compose => (compose(cfg, &mut out)?, true),
        Operation::Diagnose => (diagnose(cfg, &mut out)?, true),
        Operation::Boundary => (boundary(cfg, &mut out)?, true),
        Operation::Counterexample => (counterexample(cfg, &mut out)?, true),
        Operation::Verify => verify(cfg, &mut out)?,
    };
    out.write("summary.txt", &summary)?;
    Ok(RunOutcome {
        artifacts: out.into_paths(),
        summary,
        success,
    })
}

fn compose(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<String> {
    let mut seq = cfg.build_sequence().context("compose: building the sequence")?.sequence;
    let steps = cfg.compose.steps.unwrap_or(seq.len());
    seq.materialize(steps)
        .with_context(|| format!("compose: materializing B_1 … B_{steps}"))?;

    let mut composites = String::from("n,degree,origin_multiplicity,rotation_re,rotation_im,derivative_re,derivative_im\n");
    let mut zeros = String::from("n,index,re,im\n");
    for n in 1..=steps {
        let b = seq.composite(n).expect("materialized");
        let d = b.derivative_at_origin().unwrap_or_default();
        let _ = writeln!(
            composites,
            "{n},{},{},{},{},{},{}",
            b.degree(),
            b.origin_multiplicity(),
            fmt_num(b.rotation().re),
            fmt_num(b.rotation().im),
            fmt_num(d.re),
            fmt_num(d.im)
        );
        for (i, z) in b.zeros().iter().enumerate() {
            let _ = writeln!(zeros, "{n},{},{},{}", i + 1, fmt_num(z.re), fmt_num(z.im));
        }
    }
    out.write("composites.csv", &composites)?;
    out.write("zeros.csv", &zeros)?;

    let mut summary = String::new();
    if let Some(b) = seq.composite(steps) {
        let _ = writeln!(summary, "steps = {steps}");
        let _ = writeln!(summary, "degree = {}", b.degree());
        let _ = writeln!(summary, "origin_multiplicity = {}", b.origin_multiplicity());
    }
    Ok(summary)
}

fn diagnose(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<String> {
    let mut seq = cfg.build_sequence().context("diagnose: building the sequence")?.sequence;
    let terms = cfg.diagnose.terms.unwrap_or(seq.len());
    // The Blaschke sum needs the zeros of a composite; skip it when the
    // composite would exceed the degree cap.
    match seq.degree(terms) {
        Some(d) if d <= seq.degree_cap() => {
            seq.materialize(terms)
                .with_context(|| format!("diagnose: materializing B_{terms}"))?;
        }
        _ => log::info!("diagnose: B_{terms} exceeds the degree cap; Blaschke sum not computed"),
    }
    let opts = DiagnosticsOptions {
        terms,
        tail_threshold: cfg.diagnose.tail_threshold,
        gauge_pairs: cfg.diagnose.gauge_pairs.iter().map(|&[n, m]| (n, m)).collect(),
        gauge_radius: cfg.diagnose.gauge_radius,
        grid: PolarGrid {
            radii: cfg.diagnose.grid_radii,
            angles: cfg.diagnose.grid_angles,
        },
    };
    let report = DiagnosticsReport::build(&seq, &opts).context("diagnose: computing diagnostics")?;

    let with_frostman = report.frostman_partials.len() == report.classification_partials.len();
    let mut partials = String::from(if with_frostman {
        "k,classification,frostman\n"
    } else {
        "k,classification\n"
    });
    for (i, c) in report.classification_partials.iter().enumerate() {
        let _ = write!(partials, "{},{}", i + 1, fmt_num(*c));
        if with_frostman {
            let _ = write!(partials, ",{}", fmt_num(report.frostman_partials[i]));
        }
        partials.push('\n');
    }
    out.write("partials.csv", &partials)?;

    let mut gauges = String::from("n,m,radius,sup_difference\n");
    for g in &report.interior_gauges {
        let _ = writeln!(gauges, "{},{},{},{}", g.n, g.m, fmt_num(g.radius), fmt_num(g.sup_difference));
    }
    out.write("gauges.csv", &gauges)?;
    Ok(report.to_key_value())
}

fn boundary(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<String> {
    let seq = cfg.build_sequence().context("boundary: building the sequence")?.sequence;
    let opts = &cfg.boundary;
    let mut summary = String::new();

    let steps = opts.orbit_steps.unwrap_or(seq.len());
    let mut orbits = String::from("start,");
    orbits.push_str(blaschke::boundary::ORBIT_CSV_HEADER);
    orbits.push('\n');
    for (i, &theta) in opts.orbit_angles.iter().enumerate() {
        let samples = circle_orbit(&seq, CircleAngle::new(theta), steps)
            .with_context(|| format!("boundary: orbit of start angle {theta}"))?;
        let mut rows = String::new();
        orbit_csv_rows(&mut rows, &samples);
        for line in rows.lines() {
            let _ = writeln!(orbits, "{},{line}", i + 1);
        }
        if let Some(last) = samples.last() {
            let _ = writeln!(summary, "orbit.{}.psi_arg = {}", i + 1, fmt_num(last.psi_arg));
        }
    }
    out.write("orbits.csv", &orbits)?;

    let mut l1 = String::from("n,m,nodes,l1,rybkin_bound\n");
    for &[n, m] in &opts.l1_pairs {
        let d = psi_l1_distance(&seq, n, m, opts.nodes)
            .with_context(|| format!("boundary: L1 distance for n = {n}, m = {m}"))?;
        let bound = rybkin_bound(&span_zeros(&seq, n, m));
        let _ = writeln!(l1, "{n},{m},{},{},{}", opts.nodes, fmt_num(d), fmt_num(bound));
        let _ = writeln!(summary, "l1.n{n}.m{m} = {} (bound {})", fmt_num(d), fmt_num(bound));
    }
    out.write("l1.csv", &l1)?;

    let mut ks = String::from("n,samples,statistic,critical_value\n");
    let seed = cfg.seed.unwrap_or_default();
    let critical = ks_critical_value(opts.ks_samples, 0.01);
    for (i, &n) in opts.ks_steps.iter().enumerate() {
        let d = orbit_measure_preservation_test(&seq, n, opts.ks_samples, seed.wrapping_add(i as u64))
            .with_context(|| format!("boundary: KS test at step {n}"))?;
        let _ = writeln!(ks, "{n},{},{},{}", opts.ks_samples, fmt_num(d), fmt_num(critical));
        let _ = writeln!(summary, "ks.n{n} = {} (critical {})", fmt_num(d), fmt_num(critical));
    }
    out.write("ks.csv", &ks)?;
    Ok(summary)
}

fn counterexample(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<String> {
    let built = cfg.build_sequence().context("counterexample: building the sequence")?;
    let seq = &built.sequence;
    let ce = &cfg.counterexample;
    let terms = ce.terms.unwrap_or(seq.len());
    let thetas: Vec<f64> = (0..ce.angles).map(|j| TAU * (j as f64 + 0.5) / ce.angles as f64).collect();
    let opts = DivergenceOptions {
        window: ce.window,
        gauge_span: ce.gauge_span,
        gauge_radius: ce.gauge_radius,
        gauge_points: ce.gauge_points,
    };
    let report = divergence_report(seq, &thetas, terms, &opts).context("counterexample: divergence report")?;
    out.write("counterexample.csv", &report.to_csv())?;

    if let Some(angles) = &built.zero_angles {
        let mut zeros = String::from("n,radius,theta\n");
        for (k, (g, t)) in seq.generators().iter().zip(angles).enumerate().take(terms) {
            let r = g.zeros().first().map(|z| z.norm()).unwrap_or(0.0);
            let _ = writeln!(zeros, "{},{},{}", k + 1, fmt_num(r), fmt_num(*t));
        }
        out.write("zero_angles.csv", &zeros)?;
    }

    let mut summary = String::new();
    let classification = classification_sum(seq, terms).context("counterexample: classification sum")?;
    let _ = writeln!(
        summary,
        "classification.last_decade = {}",
        fmt_num(classification.last_decade_increment)
    );
    match frostman_sum(seq, terms) {
        Ok(f) => {
            let _ = writeln!(summary, "frostman.last_decade = {}", fmt_num(f.last_decade_increment));
        }
        Err(e) => {
            let _ = writeln!(summary, "frostman.last_decade = undefined ({e})");
        }
    }
    if let Some(g) = report.interior_gauges.last() {
        let _ = writeln!(summary, "interior_gauge.final = {}", fmt_num(*g));
    }
    let mut finals = report.final_oscillations();
    finals.sort_by(f64::total_cmp);
    if let (Some(min), Some(med)) = (finals.first(), finals.get(finals.len() / 2)) {
        let _ = writeln!(summary, "oscillation.final.min = {}", fmt_num(*min));
        let _ = writeln!(summary, "oscillation.final.median = {}", fmt_num(*med));
    }
    let _ = writeln!(
        summary,
        "oscillation.persistent_angles = {} of {}",
        report.persistent_count(ce.window),
        ce.angles
    );
    Ok(summary)
}

fn verify(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<(String, bool)> {
    let outcomes = run_all(&cfg.verify_config());
    let body = csv_body(&outcomes);
    debug_assert!(body.starts_with(VERIFY_CSV_HEADER));
    out.write("verify.csv", &body)?;
    let mut summary = String::new();
    for o in &outcomes {
        summary.push_str(&o.summary_line());
        summary.push('\n');
    }
    Ok((summary, outcomes.iter().all(|o| o.passed())))
}
