//! Boundary circle maps of Blaschke products fixing the origin.
//!
//! For `b(z) = α z ∏ (|zᵢ|/zᵢ)(zᵢ − z)/(1 − z̄ᵢ z)` the displacement of the
//! boundary map has the closed form
//!
//! ```text
//! arg(b(e^{iθ})/e^{iθ}) = arg α − 2 Σᵢ arctan[(1 − |zᵢ|) / ((1 + |zᵢ|) tan((θ − θᵢ)/2))]
//! ```
//!
//! Orbits accumulate these shifts instead of unwrapping principal
//! arguments of evaluated values, so no branch bookkeeping is needed.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::angle::{circular_distance, principal, reduce, CircleAngle};
use crate::composition::CompositionSequence;
use crate::diagnostics::{classification_sum, Verdict};
use crate::error::{Error, Result};
use crate::product::BlaschkeProduct;
use crate::stats::{ks_uniform_statistic, NeumaierSum};
use crate::fmt_num;

/// Angles this close to a zero argument are treated as singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

/// Smallest quadrature size accepted by [`psi_l1_distance`].
pub const MIN_QUADRATURE_NODES: usize = 256;

/// Smallest sample accepted by [`measure_preservation_test`].
pub const MIN_KS_SAMPLES: usize = 10_000;

/// `2 + log(2π²)`.
pub fn rybkin_constant() -> f64 {
    2.0 + (2.0 * PI * PI).ln()
}

/// Signed displacement `arg(b̂(e^{iθ})/e^{iθ})` in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryShift {
    pub shift: f64,
}

/// One step of a boundary orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSample {
    pub n: usize,
    /// Position `θₙ` of the orbit.
    pub theta: CircleAngle,
    /// Accumulated (unreduced) `arg ψₙ(e^{iθ₀})`.
    pub psi_arg: f64,
    /// Shift applied at this step.
    pub shift: f64,
}

/// Closed-form boundary displacement of a product with a simple zero at 0.
pub fn boundary_arg_shift(b: &BlaschkeProduct, theta: CircleAngle) -> Result<BoundaryShift> {
    if b.origin_multiplicity() != 1 {
        return Err(Error::Usage(format!(
            "boundary_arg_shift needs origin multiplicity 1, got {}",
            b.origin_multiplicity()
        )));
    }
    shift_at(b, theta.radians()).map(|shift| BoundaryShift { shift })
}

/// Displacement for any product fixing 0; for origin multiplicity `m > 1`
/// it includes the `(m − 1)θ` term with `θ ∈ [0, 2π)`.
fn shift_at(b: &BlaschkeProduct, theta: f64) -> Result<f64> {
    let m = b.origin_multiplicity();
    if m == 0 {
        return Err(Error::Usage("boundary maps are defined here for products fixing 0".into()));
    }
    let mut shift = (m - 1) as f64 * theta + b.rotation().arg();
    for &a in b.zeros() {
        let rho = a.norm();
        let zero_arg = a.arg();
        if circular_distance(theta, zero_arg) < SINGULARITY_TOLERANCE {
            return Err(Error::Singularity {
                theta,
                zero_arg: reduce(zero_arg),
                tolerance: SINGULARITY_TOLERANCE,
                step: None,
            });
        }
        let t = ((theta - zero_arg) / 2.0).tan();
        shift -= 2.0 * ((1.0 - rho) / ((1.0 + rho) * t)).atan();
    }
    Ok(shift)
}

/// Iterate the boundary maps `b̂₁, …, b̂ₙ` from `θ₀`, calling `visit` after
/// each step with `(k, θₖ, accumulated arg, shift)`.
pub(crate) fn walk_orbit<F>(seq: &CompositionSequence, theta0: f64, n: usize, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, f64, f64),
{
    let mut theta = reduce(theta0);
    let mut psi = 0.0;
    for (k, g) in seq.generators()[..n].iter().enumerate() {
        let s = shift_at(g, theta).map_err(|e| e.at_step(k + 1))?;
        psi += s;
        theta = reduce(theta + s);
        visit(k + 1, theta, psi, s);
    }
    Ok(())
}

/// The boundary orbit of `θ₀` under forward iteration, one sample per step.
pub fn circle_orbit(seq: &CompositionSequence, theta0: CircleAngle, n: usize) -> Result<Vec<PsiSample>> {
    if n > seq.len() {
        return Err(Error::Usage(format!("orbit of length {n} exceeds {} generators", seq.len())));
    }
    let mut out = Vec::with_capacity(n);
    walk_orbit(seq, theta0.radians(), n, |k, theta, psi_arg, shift| {
        out.push(PsiSample {
            n: k,
            theta: CircleAngle::new(theta),
            psi_arg,
            shift,
        })
    })?;
    Ok(out)
}

/// `(arg ψ_n, arg ψ_{n+m})` at one node, nudging the node off singular orbits.
fn psi_pair(seq: &CompositionSequence, theta: f64, n: usize, m: usize, spacing: f64) -> (f64, f64) {
    let offsets = [0.0, 0.5 * spacing, 0.25 * spacing, -0.25 * spacing];
    for off in offsets {
        let mut at_n = 0.0;
        let mut at_nm = 0.0;
        let res = walk_orbit(seq, theta + off, n + m, |k, _, psi, _| {
            if k == n {
                at_n = psi;
            }
            if k == n + m {
                at_nm = psi;
            }
        });
        match res {
            Ok(()) => return (at_n, at_nm),
            Err(e) => log::info!("quadrature node {theta} offset by {off}: {e}"),
        }
    }
    // Four consecutive singular hits cannot happen for distinct offsets
    // unless the data are degenerate; fall back to a tiny perturbation.
    let mut at_n = 0.0;
    let mut at_nm = 0.0;
    let _ = walk_orbit(seq, theta + 1e-9, n + m, |k, _, psi, _| {
        if k == n {
            at_n = psi;
        }
        if k == n + m {
            at_nm = psi;
        }
    });
    (at_n, at_nm)
}

/// Midpoint-rule estimate of `‖ψ_{n+m} − ψₙ‖₁ = (1/2π)∫|ψ_{n+m} − ψₙ| dθ`.
pub fn psi_l1_distance(seq: &CompositionSequence, n: usize, m: usize, nodes: usize) -> Result<f64> {
    if nodes < MIN_QUADRATURE_NODES {
        return Err(Error::Usage(format!(
            "psi_l1_distance needs at least {MIN_QUADRATURE_NODES} nodes, got {nodes}"
        )));
    }
    if n + m > seq.len() {
        return Err(Error::Usage(format!("n + m = {} exceeds {} generators", n + m, seq.len())));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let h = TAU / nodes as f64;
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = (j as f64 + 0.5) * h;
            let (a, b) = psi_pair(seq, theta, n, m, h);
            // chord distance |e^{ib} − e^{ia}|
            2.0 * ((b - a) / 2.0).sin().abs()
        })
        .collect();
    let mut sum = NeumaierSum::default();
    for v in values {
        sum.add(v);
    }
    Ok(sum.value() / nodes as f64)
}

/// Per-zero bound term `(2 + log 2π²)(1 − |z|) + 2(1 − |z|)log(1/(1 − |z|))`.
pub fn rybkin_term(modulus: f64) -> f64 {
    rybkin_gap_term(1.0 - modulus)
}

/// [`rybkin_term`] as a function of the gap `x = 1 − |z|`, for zeros too
/// close to the circle to be represented by their modulus.
pub fn rybkin_gap_term(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    rybkin_constant() * x + 2.0 * x * (1.0 / x).ln()
}

/// Sum of the per-zero terms over a zero multiset.
pub fn rybkin_bound(zeros: &[Complex64]) -> f64 {
    zeros.iter().map(|z| rybkin_term(z.norm())).sum()
}

/// The coarser bound that charges every generator `M` copies of the term of
/// its smallest nonzero zero, `M = max dₖ` over the given generators.
pub fn rybkin_smallest_zero_bound(generators: &[BlaschkeProduct]) -> f64 {
    let max_nonzero = generators.iter().map(|g| g.zeros().len()).max().unwrap_or(0) as f64;
    generators
        .iter()
        .filter_map(|g| g.smallest_nonzero_zero())
        .map(|z| max_nonzero * rybkin_term(z.norm()))
        .sum()
}

/// Nonzero zeros of `b_{n+1}, …, b_{n+m}`.
pub fn span_zeros(seq: &CompositionSequence, n: usize, m: usize) -> Vec<Complex64> {
    let end = (n + m).min(seq.len());
    seq.generators()[n.min(end)..end]
        .iter()
        .flat_map(|g| g.zeros().iter().copied())
        .collect()
}

/// Boundary image angle in `[0, 2π)`, from direct evaluation.
#[inline]
fn boundary_image(b: &BlaschkeProduct, theta: f64) -> f64 {
    reduce(b.eval_unchecked(Complex64::from_polar(1.0, theta)).arg())
}

/// Kolmogorov–Smirnov distance between the pushforward of `sample_count`
/// seeded uniform angles under `b̂` and the uniform law on `[0, 2π)`.
pub fn measure_preservation_test(b: &BlaschkeProduct, sample_count: usize, seed: u64) -> Result<f64> {
    if !b.fixes_origin() {
        return Err(Error::Usage("measure preservation needs a product fixing 0".into()));
    }
    if sample_count < MIN_KS_SAMPLES {
        return Err(Error::Usage(format!(
            "measure preservation needs at least {MIN_KS_SAMPLES} samples, got {sample_count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<f64> = (0..sample_count)
        .map(|_| boundary_image(b, rng.gen_range(0.0..TAU)))
        .collect();
    Ok(ks_uniform_statistic(&mut images, 0.0, TAU))
}

/// Kolmogorov–Smirnov distance for the pushforward under `ψₙ = b̂ₙ∘…∘b̂₁`,
/// computed along boundary orbits, so `n` is not limited by the degree cap.
/// Samples whose orbit meets a singular angle are dropped.
pub fn orbit_measure_preservation_test(
    seq: &CompositionSequence,
    n: usize,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    if n > seq.len() {
        return Err(Error::Usage(format!("orbit of length {n} exceeds {} generators", seq.len())));
    }
    if sample_count < MIN_KS_SAMPLES {
        return Err(Error::Usage(format!(
            "measure preservation needs at least {MIN_KS_SAMPLES} samples, got {sample_count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<f64> = (0..sample_count).map(|_| rng.gen_range(0.0..TAU)).collect();
    let mut images: Vec<f64> = starts
        .par_iter()
        .filter_map(|&t| {
            let mut last = t;
            match walk_orbit(seq, t, n, |_, theta, _, _| last = theta) {
                Ok(()) => Some(reduce(last)),
                Err(e) => {
                    log::info!("sample {t} dropped: {e}");
                    None
                }
            }
        })
        .collect();
    Ok(ks_uniform_statistic(&mut images, 0.0, TAU))
}

/// Same statistic for the deterministic midpoint grid `2π(j + ½)/n`.
pub fn pushforward_grid_ks(b: &BlaschkeProduct, grid_size: usize) -> Result<f64> {
    if !b.fixes_origin() || grid_size == 0 {
        return Err(Error::Usage("grid pushforward needs a product fixing 0 and a nonempty grid".into()));
    }
    let h = TAU / grid_size as f64;
    let mut images: Vec<f64> = (0..grid_size)
        .map(|j| boundary_image(b, (j as f64 + 0.5) * h))
        .collect();
    Ok(ks_uniform_statistic(&mut images, 0.0, TAU))
}

/// Distances `|b̂ₖ(e^{iθ})/e^{iθ} − 1|` per sampled angle.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityConvergence {
    /// `distances[a][k − 1]` for angle `a` and generator `k`.
    pub distances: Vec<Vec<f64>>,
    /// Whether the classification sum looked convergent (the hypothesis).
    pub precondition_ok: bool,
    pub max_at_last_step: f64,
    pub below_tolerance: bool,
}

pub fn identity_convergence_check(
    seq: &CompositionSequence,
    thetas: &[CircleAngle],
    n: usize,
    tolerance: f64,
) -> Result<IdentityConvergence> {
    let classification = classification_sum(seq, n)?;
    let precondition_ok = classification.verdict == Verdict::LikelyConvergent;
    if !precondition_ok {
        log::warn!(
            "identity convergence check: classification sum looks divergent (last-decade increment {:e})",
            classification.last_decade_increment
        );
    }
    let distances: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&t| {
            let u = t.to_unit();
            seq.generators()[..n]
                .iter()
                .map(|g| (g.eval_unchecked(u) / u - 1.0).norm())
                .collect()
        })
        .collect();
    let max_at_last_step = distances
        .iter()
        .filter_map(|d| d.last().copied())
        .fold(0.0, f64::max);
    Ok(IdentityConvergence {
        distances,
        precondition_ok,
        max_at_last_step,
        below_tolerance: max_at_last_step < tolerance,
    })
}

/// Values `P((1 − δ)e^{iθ})` along the radius.
pub fn radial_limit_probe(p: &BlaschkeProduct, theta: CircleAngle, deltas: &[f64]) -> Result<Vec<Complex64>> {
    deltas
        .iter()
        .map(|&d| {
            if !(d > 0.0 && d <= 0.1) {
                return Err(Error::InvalidInput(format!("radial offset {d} must lie in (0, 0.1]")));
            }
            Ok(p.eval_unchecked(Complex64::from_polar(1.0 - d, theta.radians())))
        })
        .collect()
}

/// Total change of `arg P(e^{iθ})` over one positive sweep, divided by 2π.
/// `samples` must resolve the map (each step below π in arg).
pub fn winding_number(p: &BlaschkeProduct, samples: usize) -> f64 {
    let h = TAU / samples as f64;
    let mut prev = p.eval_unchecked(Complex64::new(1.0, 0.0)).arg();
    let mut total = NeumaierSum::default();
    for j in 1..=samples {
        let cur = p.eval_unchecked(Complex64::from_polar(1.0, j as f64 * h)).arg();
        total.add(principal(cur - prev));
        prev = cur;
    }
    total.value() / TAU
}

pub const ORBIT_CSV_HEADER: &str = "n,theta,psi_arg,shift";

/// CSV rows `n,theta,psi_arg,shift` (no header).
pub fn orbit_csv_rows(out: &mut String, samples: &[PsiSample]) {
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.n,
            fmt_num(s.theta.radians()),
            fmt_num(s.psi_arg),
            fmt_num(s.shift)
        );
    }
}
