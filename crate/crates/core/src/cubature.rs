//! Randomized cubature construction and measure recombination.
//!
//! The doubling construction keeps `ell * d` slots. Until the target mean
//! enters the hull of the slot points, each round draws a fresh batch of
//! `2^k` blocks, accumulates their scaled sum, and averages it into every
//! slot; after `k` rounds slot `i` holds the running mean of its `2^k` raw
//! draws. Termination extracts at most `d + 1` slots by a min-norm witness
//! plus Caratheodory elimination, and the returned weights expand back over
//! the raw draws as `2^{-k} lambda_m` exactly as accumulated.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::geom::{self, PointSet, WeightedMeasure};
use crate::math;
use crate::rng::RngStream;

/// Default cap on the doubling exponent.
pub const DEFAULT_MAX_K: u32 = 40;
/// Fresh candidate draws per round in scheme (a) for continuous specs.
const SCHEME_A_CANDIDATES_PER_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubatureStatus {
    Success,
    BudgetExhausted,
}

/// Outcome of the doubling construction.
#[derive(Debug, Clone)]
pub struct CubatureResult {
    /// Measure over at most `d + 1` slot points reproducing the target.
    pub reduced: Option<WeightedMeasure>,
    /// The same measure expanded over the raw draws: weight
    /// `2^{-k} lambda_m` on draw `(j, i_m)`, laid out with `j` outermost.
    pub expanded: Option<WeightedMeasure>,
    /// Final doubling exponent.
    pub k: u32,
    /// Total draws consumed: `ell * d * 2^k`.
    pub samples_drawn: u64,
    /// Max per-coordinate deviation of the reduced mean from the target;
    /// on budget exhaustion, the distance from the target to the slot hull.
    pub residual: f64,
    pub status: CubatureStatus,
}

/// Reduce convex weights over a point set to at most `dim + 1` support
/// indices, tracking which original slots survive.
fn reduce_with_indices(
    dim: usize,
    points: &[f64],
    weights_in: &[f64],
) -> Result<(Vec<usize>, Vec<f64>)> {
    // Drop zero-weight slots up front; clamp witness roundoff.
    let mut idx: Vec<usize> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for (i, &wi) in weights_in.iter().enumerate() {
        if wi > 0.0 {
            idx.push(i);
            w.push(wi);
        }
    }
    if idx.is_empty() {
        return Err(Error::Reduction(String::from("witness carries no positive weight")));
    }
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi /= total;
    }
    while idx.len() > dim + 1 {
        let mut flat = Vec::with_capacity(idx.len() * dim);
        for &i in &idx {
            flat.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        let support = PointSet::from_flat(dim, flat)?;
        let (keep, new_w) = geom::caratheodory_step(dim, &support, &w)?;
        idx = keep.iter().map(|&j| idx[j]).collect();
        w = new_w;
    }
    Ok((idx, w))
}

/// Run the doubling cubature construction against a known target mean.
///
/// `ell >= 2` controls the slot count `ell * d`. The construction draws
/// `ell * d` points, then doubles the per-slot batch while the target lies
/// outside the slot hull, up to `max_k` rounds. On success both the slot
/// measure and its expansion over raw draws are returned and reproduce the
/// target within `tol`.
///
/// All raw draws are retained for the expansion, so memory grows as
/// `2^k * ell * d`; `target` must be the spec's mean or the loop will run
/// to `max_k`.
pub fn run_algorithm1(
    spec: &DistributionSpec,
    ell: u64,
    target: &[f64],
    max_k: u32,
    tol: f64,
    stream: &mut RngStream,
) -> Result<CubatureResult> {
    if ell < 2 {
        return Err(Error::Parameter(format!("ell = {ell} must be at least 2")));
    }
    if tol <= 0.0 {
        return Err(Error::Parameter(String::from("tol must be positive")));
    }
    let dim = spec.dim();
    if target.len() != dim {
        return Err(Error::DimMismatch { expected: dim, got: target.len() });
    }
    let m = (ell as usize) * dim;

    // Raw draws in draw order: block j holds slots 1..m, flat at
    // raw[(j*m + i) * dim ..].
    let mut raw: Vec<f64> = Vec::with_capacity(m * dim);
    spec.sample_into(m, stream, &mut raw);
    let mut slots: Vec<f64> = raw.clone();
    let mut k = 0u32;

    loop {
        let probe = geom::distance_to_hull_flat(dim, &slots, target, tol)?;
        if probe.distance <= tol {
            // Extract at most d + 1 slots from the witness.
            let (idx, w) = reduce_with_indices(dim, &slots, &probe.coefficients)?;
            let mut flat = Vec::with_capacity(idx.len() * dim);
            for &i in &idx {
                flat.extend_from_slice(&slots[i * dim..(i + 1) * dim]);
            }
            let reduced = WeightedMeasure::new(PointSet::from_flat(dim, flat)?, w.clone())?;
            let mean = reduced.mean();
            let mut residual: f64 = 0.0;
            for (a, b) in mean.iter().zip(target) {
                residual = residual.max(math::abs(a - b));
            }
            // Expansion over raw draws: weight 2^{-k} lambda_m on draw
            // (j, i_m), j outermost.
            let blocks = 1usize << k;
            let scale = 1.0 / blocks as f64;
            let mut exp_flat = Vec::with_capacity(blocks * idx.len() * dim);
            let mut exp_w = Vec::with_capacity(blocks * idx.len());
            for j in 0..blocks {
                for (&i, &wi) in idx.iter().zip(&w) {
                    let at = (j * m + i) * dim;
                    exp_flat.extend_from_slice(&raw[at..at + dim]);
                    exp_w.push(scale * wi);
                }
            }
            let expanded = WeightedMeasure::new(PointSet::from_flat(dim, exp_flat)?, exp_w)?;
            return Ok(CubatureResult {
                reduced: Some(reduced),
                expanded: Some(expanded),
                k,
                samples_drawn: (m * blocks) as u64,
                residual,
                status: CubatureStatus::Success,
            });
        }
        if k >= max_k {
            return Ok(CubatureResult {
                reduced: None,
                expanded: None,
                k,
                samples_drawn: (m * (1usize << k)) as u64,
                residual: probe.distance,
                status: CubatureStatus::BudgetExhausted,
            });
        }
        // Fresh batch: blocks j = 2^k .. 2^{k+1} - 1, accumulated at 2^{-k}.
        let blocks = 1u64 << k;
        let scale = 1.0 / blocks as f64;
        let mut z = vec![0.0; m * dim];
        let mut point: Vec<f64> = Vec::with_capacity(dim);
        for _j in blocks..(2 * blocks) {
            for i in 0..m {
                point.clear();
                spec.sample_one(stream, &mut point);
                raw.extend_from_slice(&point);
                for c in 0..dim {
                    z[i * dim + c] += scale * point[c];
                }
            }
        }
        for (x, zi) in slots.iter_mut().zip(&z) {
            *x = (*x + zi) / 2.0;
        }
        k += 1;
    }
}

/// Reduce a discrete measure to at most `dim + 1` support points with the
/// same mean; repeated Caratheodory elimination (each pass strips at least
/// one point while the support exceeds `dim + 1`).
pub fn recombine(measure: &WeightedMeasure, tol: f64) -> Result<WeightedMeasure> {
    geom::caratheodory_reduce(measure, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaiveMode {
    /// Draw `d` points, then scan candidate augmenting points.
    A,
    /// Draw `2d` points and test the target directly.
    B,
}

/// Outcome of the rejection-style schemes.
#[derive(Debug, Clone)]
pub struct NaiveResult {
    /// Measure over at most `d + 1` of the drawn points hitting the target.
    pub measure: WeightedMeasure,
    /// Completed outer iterations (rounds).
    pub iterations: u64,
    pub samples_drawn: u64,
}

/// Rejection-style construction: repeat independent rounds until the
/// target mean lands in the hull of a fresh draw.
///
/// Mode B draws `2d` points per round and tests directly, so the round
/// count is geometric with success probability `p_{2d}`. Mode A draws `d`
/// points and scans candidate augmenting points — the support atoms for
/// empirical specs, otherwise up to `64 d` fresh draws.
pub fn naive_scheme(
    spec: &DistributionSpec,
    mode: NaiveMode,
    target: &[f64],
    max_iter: u64,
    stream: &mut RngStream,
) -> Result<NaiveResult> {
    let dim = spec.dim();
    if target.len() != dim {
        return Err(Error::DimMismatch { expected: dim, got: target.len() });
    }
    if max_iter == 0 {
        return Err(Error::Parameter(String::from("maxIter must be positive")));
    }
    let mut samples = 0u64;
    let mut buf: Vec<f64> = Vec::new();
    for round in 1..=max_iter {
        buf.clear();
        match mode {
            NaiveMode::B => {
                spec.sample_into(2 * dim, stream, &mut buf);
                samples += 2 * dim as u64;
                let probe = geom::distance_to_hull_flat(dim, &buf, target, geom::GEOM_TOL)?;
                if probe.distance <= geom::GEOM_TOL {
                    let (idx, w) = reduce_with_indices(dim, &buf, &probe.coefficients)?;
                    let mut flat = Vec::with_capacity(idx.len() * dim);
                    for &i in &idx {
                        flat.extend_from_slice(&buf[i * dim..(i + 1) * dim]);
                    }
                    let measure =
                        WeightedMeasure::new(PointSet::from_flat(dim, flat)?, w)?;
                    return Ok(NaiveResult { measure, iterations: round, samples_drawn: samples });
                }
            }
            NaiveMode::A => {
                spec.sample_into(dim, stream, &mut buf);
                samples += dim as u64;
                let candidates: Vec<f64> = match spec {
                    DistributionSpec::Empirical(m) => m.support().as_flat().to_vec(),
                    _ => {
                        let count = SCHEME_A_CANDIDATES_PER_DIM * dim;
                        let mut c = Vec::with_capacity(count * dim);
                        spec.sample_into(count, stream, &mut c);
                        samples += count as u64;
                        c
                    }
                };
                let mut trial = vec![0.0; (dim + 1) * dim];
                trial[..dim * dim].copy_from_slice(&buf[..dim * dim]);
                for cand in candidates.chunks_exact(dim) {
                    trial[dim * dim..].copy_from_slice(cand);
                    let probe =
                        geom::distance_to_hull_flat(dim, &trial, target, geom::GEOM_TOL)?;
                    if probe.distance <= geom::GEOM_TOL {
                        let (idx, w) = reduce_with_indices(dim, &trial, &probe.coefficients)?;
                        let mut flat = Vec::with_capacity(idx.len() * dim);
                        for &i in &idx {
                            flat.extend_from_slice(&trial[i * dim..(i + 1) * dim]);
                        }
                        let measure =
                            WeightedMeasure::new(PointSet::from_flat(dim, flat)?, w)?;
                        return Ok(NaiveResult {
                            measure,
                            iterations: round,
                            samples_drawn: samples,
                        });
                    }
                }
            }
        }
    }
    Err(Error::Budget(format!("no success within {max_iter} rounds")))
}

/// Independent re-check of a cubature output.
#[derive(Debug, Clone)]
pub struct CubatureCheck {
    /// Per-coordinate residuals of the reduced measure against the target.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Named violations (negative weight, bad normalization, ...).
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Re-check weights and moments of raw `(support, weights)` data without
/// trusting the producing code path.
pub fn verify_raw(
    dim: usize,
    support: &[f64],
    weights: &[f64],
    target: &[f64],
    tol: f64,
) -> CubatureCheck {
    let mut violations = Vec::new();
    if support.is_empty() || weights.is_empty() {
        violations.push(String::from("degenerate-input: empty measure"));
        return CubatureCheck {
            residuals: vec![],
            max_residual: f64::INFINITY,
            violations,
            pass: false,
        };
    }
    if support.len() != weights.len() * dim {
        violations.push(format!(
            "degenerate-input: {} coordinates for {} weights",
            support.len(),
            weights.len()
        ));
        return CubatureCheck {
            residuals: vec![],
            max_residual: f64::INFINITY,
            violations,
            pass: false,
        };
    }
    let mut sum = math::KahanSum::new();
    for (j, &w) in weights.iter().enumerate() {
        if !(w >= 0.0) {
            violations.push(format!("negative weight {w} at index {j}"));
        }
        sum.add(w);
    }
    if math::abs(sum.value() - 1.0) > geom::WEIGHT_TOL {
        violations.push(format!("weights sum to {}", sum.value()));
    }
    let mut mean = vec![math::KahanSum::new(); dim];
    for (p, &w) in support.chunks_exact(dim).zip(weights) {
        for (acc, &x) in mean.iter_mut().zip(p) {
            acc.add(w * x);
        }
    }
    let residuals: Vec<f64> = mean
        .iter()
        .zip(target)
        .map(|(acc, &t)| math::abs(acc.value() - t))
        .collect();
    let max_residual = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    if max_residual > tol {
        violations.push(format!("residual {max_residual} above tol {tol}"));
    }
    let pass = violations.is_empty();
    CubatureCheck { residuals, max_residual, violations, pass }
}

/// Verify a cubature result against its target: weight nonnegativity and
/// normalization re-checked independently, residuals by direct summation,
/// on both the reduced and the expanded measure.
pub fn verify_cubature(result: &CubatureResult, target: &[f64], tol: f64) -> CubatureCheck {
    let Some(reduced) = &result.reduced else {
        return CubatureCheck {
            residuals: vec![],
            max_residual: f64::INFINITY,
            violations: vec![String::from("degenerate-input: no measure (budget exhausted?)")],
            pass: false,
        };
    };
    let dim = reduced.dim();
    let mut check = verify_raw(dim, reduced.support().as_flat(), reduced.weights(), target, tol);
    if let Some(expanded) = &result.expanded {
        let e = verify_raw(dim, expanded.support().as_flat(), expanded.weights(), target, tol);
        for v in e.violations {
            check.violations.push(format!("expanded: {v}"));
        }
        check.max_residual = check.max_residual.max(e.max_residual);
        check.pass = check.pass && e.pass;
    }
    check
}
