//! A sequence whose composites converge inside the disc while the boundary
//! maps keep drifting.
//!
//! Zeros `zₙ = rₙe^{iθₙ}` where `Σ(1 − rₙ)` converges but the angles
//! `θₙ = Σ_{i≤n}(1 − rᵢ)log(1/(1 − rᵢ))` grow without bound. Each generator
//! is `bₙ(z) = z·(|zₙ|/zₙ)(zₙ − z)/(1 − z̄ₙz)`, so `bₙ'(0) = rₙ`.

use std::fmt::Write as _;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::reduce;
use crate::boundary::walk_orbit;
use crate::composition::CompositionSequence;
use crate::diagnostics::{frostman_term, partial_sums};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::product::BlaschkeProduct;

/// How the radii `rₙ` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiiSpec {
    /// `1 − rₙ = 1/((n + offset)·log(n + offset)^exponent)`.
    Default { offset: f64, exponent: f64 },
    Explicit(Vec<f64>),
}

impl Default for RadiiSpec {
    fn default() -> Self {
        RadiiSpec::Default {
            offset: 2.0,
            exponent: 2.0,
        }
    }
}

impl RadiiSpec {
    /// The gaps `1 − rₙ` for `n = 1..=count`.
    pub fn gaps(&self, count: usize) -> Result<Vec<f64>> {
        let gaps: Vec<f64> = match self {
            RadiiSpec::Default { offset, exponent } => {
                if !(*offset > 0.0 && (1.0 + offset).ln() > 0.0) {
                    return Err(Error::InvalidInput(format!("radius offset {offset} makes log(1 + offset) ≤ 0")));
                }
                (1..=count)
                    .map(|n| {
                        let s = n as f64 + offset;
                        1.0 / (s * s.ln().powf(*exponent))
                    })
                    .collect()
            }
            RadiiSpec::Explicit(radii) => {
                if radii.len() < count {
                    return Err(Error::InvalidInput(format!(
                        "{count} radii requested but only {} given",
                        radii.len()
                    )));
                }
                radii[..count].iter().map(|r| 1.0 - r).collect()
            }
        };
        if let Some((i, g)) = gaps.iter().enumerate().find(|(_, g)| !(**g > 0.0 && **g < 1.0)) {
            return Err(Error::InvalidInput(format!("radius r_{} = {} is not in (0, 1)", i + 1, 1.0 - g)));
        }
        Ok(gaps)
    }

    pub fn radii(&self, count: usize) -> Result<Vec<f64>> {
        match self {
            RadiiSpec::Explicit(radii) => {
                self.gaps(count)?;
                Ok(radii[..count].to_vec())
            }
            _ => Ok(self.gaps(count)?.iter().map(|g| 1.0 - g).collect()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RadiiSpec::Default { offset, exponent } => {
                format!("1-r_n = 1/((n+{offset})*log(n+{offset})^{exponent})")
            }
            RadiiSpec::Explicit(r) => format!("explicit ({} radii)", r.len()),
        }
    }
}

/// Radii of the default family, `1 − rₙ = 1/((n + 2)·log²(n + 2))`.
pub fn default_radii(count: usize) -> Vec<f64> {
    RadiiSpec::default().radii(count).expect("default radii lie in (0, 1)")
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub sequence: CompositionSequence,
    pub radii: Vec<f64>,
    /// `1 − rₙ`, computed directly rather than from `rₙ` for accuracy.
    pub gaps: Vec<f64>,
    /// Unreduced zero arguments `θₙ`.
    pub angles: Vec<f64>,
}

pub fn build_sequence(spec: &RadiiSpec, count: usize) -> Result<Counterexample> {
    if count == 0 {
        return Err(Error::InvalidInput("counterexample needs at least one generator".into()));
    }
    let gaps = spec.gaps(count)?;
    let radii = spec.radii(count)?;
    let angles = partial_sums(gaps.iter().map(|&g| frostman_term(g)));
    let generators = radii
        .iter()
        .zip(&angles)
        .map(|(&r, &t)| BlaschkeProduct::from_zeros(1, vec![Complex64::from_polar(r, reduce(t))]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Counterexample {
        sequence: CompositionSequence::new(generators)?,
        radii,
        gaps,
        angles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceOptions {
    /// Length of the trailing window for the oscillation of `arg ψₙ`;
    /// checkpoints are the multiples of it.
    pub window: usize,
    /// `m` in the trailing interior gauge `sup|Bₙ − B_{n−m}|`.
    pub gauge_span: usize,
    pub gauge_radius: f64,
    /// Points on the circle `|z| = gauge_radius`; by the maximum principle
    /// the sup over the disc is attained there.
    pub gauge_points: usize,
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        DivergenceOptions {
            window: 1000,
            gauge_span: 1,
            gauge_radius: 0.5,
            gauge_points: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceRow {
    pub n: usize,
    pub theta: f64,
    pub interior_gauge: f64,
    pub boundary_osc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub checkpoints: Vec<usize>,
    pub thetas: Vec<f64>,
    /// Trailing interior gauge at each checkpoint.
    pub interior_gauges: Vec<f64>,
    /// `oscillations[j][c]`: oscillation of `arg ψ` for angle `j` over the
    /// window ending at checkpoint `c`.
    pub oscillations: Vec<Vec<f64>>,
}

pub const DIVERGENCE_CSV_HEADER: &str = "n,theta,interior_gauge,boundary_osc";

impl DivergenceReport {
    pub fn rows(&self) -> impl Iterator<Item = DivergenceRow> + '_ {
        self.checkpoints.iter().enumerate().flat_map(move |(c, &n)| {
            self.thetas.iter().zip(&self.oscillations).map(move |(&theta, osc)| DivergenceRow {
                n,
                theta,
                interior_gauge: self.interior_gauges[c],
                boundary_osc: osc[c],
            })
        })
    }

    /// Oscillations at the last checkpoint, one per angle.
    pub fn final_oscillations(&self) -> Vec<f64> {
        self.oscillations.iter().map(|o| o.last().copied().unwrap_or(0.0)).collect()
    }

    /// Number of angles whose oscillation never drops below its value at
    /// the first checkpoint at or after `n`.
    pub fn persistent_count(&self, n: usize) -> usize {
        let Some(start) = self.checkpoints.iter().position(|&c| c >= n) else {
            return 0;
        };
        self.oscillations
            .iter()
            .filter(|o| o[start..].iter().all(|&v| v >= o[start]))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(DIVERGENCE_CSV_HEADER);
        out.push('\n');
        for row in self.rows() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                row.n,
                fmt_num(row.theta),
                fmt_num(row.interior_gauge),
                fmt_num(row.boundary_osc)
            );
        }
        out
    }
}

/// Contrast the interior gauge with the oscillation of the boundary
/// arguments `arg ψₙ(θ)` for each starting angle in `thetas`.
pub fn divergence_report(
    seq: &CompositionSequence,
    thetas: &[f64],
    n: usize,
    opts: &DivergenceOptions,
) -> Result<DivergenceReport> {
    let window = opts.window;
    if window < 2 || n < window {
        return Err(Error::Usage(format!("need n ≥ window ≥ 2, got n = {n}, window = {window}")));
    }
    if n > seq.len() {
        return Err(Error::Usage(format!("report length {n} exceeds {} generators", seq.len())));
    }
    if opts.gauge_span > window {
        return Err(Error::Usage(format!("gauge span {} exceeds window {window}", opts.gauge_span)));
    }
    if !(opts.gauge_radius >= 0.0 && opts.gauge_radius < 1.0) {
        return Err(Error::InvalidInput(format!("gauge radius {} must lie in [0, 1)", opts.gauge_radius)));
    }
    let checkpoints: Vec<usize> = (1..=n / window).map(|c| c * window).collect();

    let oscillations = thetas
        .par_iter()
        .map(|&theta| angle_oscillations(seq, theta, n, window))
        .collect::<Vec<_>>();

    let points: Vec<Complex64> = (0..opts.gauge_points)
        .map(|j| Complex64::from_polar(opts.gauge_radius, TAU * j as f64 / opts.gauge_points as f64))
        .collect();
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&z| trailing_differences(seq, z, &checkpoints, opts.gauge_span))
        .collect();
    let interior_gauges = (0..checkpoints.len())
        .map(|c| per_point.iter().map(|d| d[c]).fold(0.0, f64::max))
        .collect();

    Ok(DivergenceReport {
        checkpoints,
        thetas: thetas.to_vec(),
        interior_gauges,
        oscillations,
    })
}

/// Oscillation of `arg ψ` over each window `[c − window, c]`.
fn angle_oscillations(seq: &CompositionSequence, theta: f64, n: usize, window: usize) -> Vec<f64> {
    // A starting angle whose orbit hits a zero argument exactly is
    // measure-zero bad luck; step off it.
    for attempt in 0..8 {
        let start = theta + attempt as f64 * 1e-9;
        let mut out = Vec::with_capacity(n / window);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let res = walk_orbit(seq, start, n, |k, _, psi, _| {
            lo = lo.min(psi);
            hi = hi.max(psi);
            if k % window == 0 {
                out.push(hi - lo);
                lo = psi;
                hi = psi;
            }
        });
        match res {
            Ok(()) => return out,
            Err(e) => log::warn!("orbit of {theta} perturbed: {e}"),
        }
    }
    vec![f64::NAN; n / window]
}

/// `|Bₖ(z) − B_{k−span}(z)|` at each checkpoint `k`.
fn trailing_differences(seq: &CompositionSequence, z: Complex64, checkpoints: &[usize], span: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut w = z;
    let mut saved = z;
    let mut next = 0;
    let last = checkpoints.last().copied().unwrap_or(0);
    for k in 0..=last {
        if k > 0 {
            w = seq.generators()[k - 1].eval_unchecked(w);
        }
        let c = checkpoints[next];
        if k + span == c {
            saved = w;
        }
        if k == c {
            out.push((w - saved).norm());
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    out
}
