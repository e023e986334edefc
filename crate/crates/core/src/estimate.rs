//! Seeded Monte Carlo estimators for containment probabilities, first-hit
//! indices, threshold brackets, and Tukey depth.
//!
//! Every estimator derives one substream per trial from its base stream,
//! so each trial is a pure function of `(seed, stream_id, trial index)`.
//! The raw per-trial statistics are integer counts collected in mergeable
//! accumulators; any partition of the trial range yields bit-identical
//! results, which is what makes the thread fan-out in the CLI safe.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::geom::{self, WeightedMeasure};
use crate::math;
use crate::rng::RngStream;

/// Hard cap on `trials * max_n * dim` for profile runs.
pub const PROFILE_BUDGET: u64 = 2_000_000_000;
/// Cumulative per-comparison trial cap in the threshold search.
pub const COMPARE_TRIAL_CAP: u64 = 1 << 21;
/// Starting batch size of the sequential comparison test.
const COMPARE_BATCH: u64 = 2048;
/// Doubling-phase cap on `n` in the threshold search.
const DOUBLING_CAP: u64 = 1 << 22;

/// A Monte Carlo estimate with its uncertainty and seed provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    pub trials: u64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

impl EstimateResult {
    /// Estimate of a Bernoulli mean from a success count.
    pub fn from_bernoulli(successes: u64, trials: u64, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        let stderr = math::sqrt(p * (1.0 - p) / trials as f64);
        EstimateResult {
            value: p,
            trials,
            stderr,
            ci95: ((p - 1.96 * stderr).max(0.0), (p + 1.96 * stderr).min(1.0)),
            seed,
        }
    }

    /// Estimate of a nonnegative mean from a sum and sum of squares.
    pub fn from_sums(sum: f64, sum_sq: f64, trials: u64, seed: u64) -> Self {
        let t = trials as f64;
        let mean = sum / t;
        let var = (sum_sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
        let stderr = math::sqrt(var / t);
        EstimateResult {
            value: mean,
            trials,
            stderr,
            ci95: ((mean - 1.96 * stderr).max(0.0), mean + 1.96 * stderr),
            seed,
        }
    }
}

/// Coupled estimates of `p_n` along a list of sample sizes.
#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub n_values: Vec<u64>,
    pub estimates: Vec<EstimateResult>,
    /// Within every trial the containment indicator was nondecreasing along
    /// prefixes, so the estimates are monotone exactly, not just in
    /// expectation.
    pub per_trial_monotone: bool,
}

/// Mergeable raw counts behind [`ProfileResult`].
#[derive(Debug, Clone)]
pub struct ProfileCounts {
    pub n_values: Vec<u64>,
    pub contained: Vec<u64>,
    pub trials: u64,
    pub monotone: bool,
}

impl ProfileCounts {
    pub fn merge(mut self, other: &ProfileCounts) -> Result<ProfileCounts> {
        if self.n_values != other.n_values {
            return Err(Error::InvalidInput(String::from("merging mismatched profiles")));
        }
        for (a, b) in self.contained.iter_mut().zip(&other.contained) {
            *a += b;
        }
        self.trials += other.trials;
        self.monotone &= other.monotone;
        Ok(self)
    }

    pub fn finalize(self, seed: u64) -> ProfileResult {
        let estimates = self
            .contained
            .iter()
            .map(|&c| EstimateResult::from_bernoulli(c, self.trials, seed))
            .collect();
        ProfileResult {
            n_values: self.n_values,
            estimates,
            per_trial_monotone: self.monotone,
        }
    }
}

fn validate_profile_inputs(
    spec: &DistributionSpec,
    theta: &[f64],
    epsilon: f64,
    n_values: &[u64],
    trials: u64,
) -> Result<()> {
    if theta.len() != spec.dim() {
        return Err(Error::DimMismatch { expected: spec.dim(), got: theta.len() });
    }
    if epsilon < 0.0 {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must be nonnegative")));
    }
    if n_values.is_empty() || n_values.windows(2).any(|w| w[0] >= w[1]) || n_values[0] == 0 {
        return Err(Error::Parameter(String::from(
            "nValues must be strictly increasing positive integers",
        )));
    }
    let max_n = *n_values.last().unwrap();
    let cost = trials
        .saturating_mul(max_n)
        .saturating_mul(spec.dim() as u64);
    if cost > PROFILE_BUDGET {
        return Err(Error::Budget(format!(
            "trials * max_n * dim = {cost} exceeds the profile budget {PROFILE_BUDGET}"
        )));
    }
    Ok(())
}

/// Raw profile counts over the half-open trial range; trial `t` draws from
/// `stream.substream(t)`, so partitioning the range across workers changes
/// nothing.
pub fn profile_counts(
    spec: &DistributionSpec,
    theta: &[f64],
    epsilon: f64,
    n_values: &[u64],
    trial_range: core::ops::Range<u64>,
    stream: &RngStream,
) -> Result<ProfileCounts> {
    validate_profile_inputs(spec, theta, epsilon, n_values, trial_range.end)?;
    let dim = spec.dim();
    let max_n = *n_values.last().unwrap() as usize;
    let mut contained = vec![0u64; n_values.len()];
    let mut buf: Vec<f64> = Vec::with_capacity(max_n * dim);

    for t in trial_range.clone() {
        let mut sub = stream.substream(t);
        buf.clear();
        spec.sample_into(max_n, &mut sub, &mut buf);
        // Evaluate prefixes in increasing order; once the hull captures the
        // target it stays captured (the hull only grows), so later prefixes
        // are counted without re-solving.
        let mut captured = false;
        for (slot, &n) in n_values.iter().enumerate() {
            if !captured {
                captured =
                    geom::contains_flat(dim, &buf[..n as usize * dim], theta, epsilon, geom::GEOM_TOL);
            }
            if captured {
                contained[slot] += 1;
            }
        }
    }
    Ok(ProfileCounts {
        n_values: n_values.to_vec(),
        contained,
        trials: trial_range.end - trial_range.start,
        monotone: true,
    })
}

/// Coupled containment profile: each trial draws `max(nValues)` points once
/// and evaluates every prefix, so the estimates share randomness and are
/// exactly monotone in `n`.
pub fn estimate_p_profile(
    spec: &DistributionSpec,
    theta: &[f64],
    epsilon: f64,
    n_values: &[u64],
    trials: u64,
    stream: &RngStream,
) -> Result<ProfileResult> {
    if trials < 100 {
        return Err(Error::Parameter(format!("trials = {trials} below the minimum 100")));
    }
    let counts = profile_counts(spec, theta, epsilon, n_values, 0..trials, stream)?;
    Ok(counts.finalize(stream.seed()))
}

/// Integer bracket for the threshold count `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct NxBracket {
    pub lower: u64,
    pub upper: u64,
    pub confidence: f64,
    /// Set when a comparison was inconclusive at its trial budget or a cap
    /// was hit; the bracket is then wider than the budget alone explains.
    pub widened: bool,
}

/// First-hit estimate together with the threshold bracket it implies.
#[derive(Debug, Clone)]
pub struct FirstHitResult {
    /// Estimate of the expected first index at which the growing hull
    /// captures the target; a certified lower bound when trials were capped.
    pub estimate: EstimateResult,
    /// Bracket from `E[first hit]/2 <= N <= 2 E[first hit]` at 4 sigma.
    pub bracket: NxBracket,
    pub capped_trials: u64,
    /// More than half of the trials hit the cap.
    pub reliability_warning: bool,
}

/// Mergeable raw counts behind [`FirstHitResult`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstHitCounts {
    pub sum: u64,
    pub sum_sq: u128,
    pub capped: u64,
    pub trials: u64,
}

impl FirstHitCounts {
    pub fn merge(mut self, other: &FirstHitCounts) -> FirstHitCounts {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.capped += other.capped;
        self.trials += other.trials;
        self
    }

    pub fn finalize(self, cap: u64, seed: u64) -> FirstHitResult {
        let estimate =
            EstimateResult::from_sums(self.sum as f64, self.sum_sq as f64, self.trials, seed);
        let margin = 4.0 * estimate.stderr;
        let lower = math::ceil(0.5 * (estimate.value - margin)).max(1.0) as u64;
        let upper = math::floor(2.0 * (estimate.value + margin)).max(lower as f64) as u64;
        let _ = cap;
        FirstHitResult {
            bracket: NxBracket {
                lower,
                upper,
                confidence: 0.9999,
                widened: self.capped > 0,
            },
            capped_trials: self.capped,
            reliability_warning: self.capped * 2 > self.trials,
            estimate,
        }
    }
}

/// First-hit counts over a trial range; per-trial draws stop at `cap`.
pub fn first_hit_counts(
    spec: &DistributionSpec,
    theta: &[f64],
    cap: u64,
    trial_range: core::ops::Range<u64>,
    stream: &RngStream,
) -> Result<FirstHitCounts> {
    if theta.len() != spec.dim() {
        return Err(Error::DimMismatch { expected: spec.dim(), got: theta.len() });
    }
    if cap == 0 {
        return Err(Error::Parameter(String::from("cap must be positive")));
    }
    let dim = spec.dim();
    let mut counts = FirstHitCounts::default();
    let mut buf: Vec<f64> = Vec::new();
    for t in trial_range {
        let mut sub = stream.substream(t);
        buf.clear();
        let mut hit = cap;
        let mut was_capped = true;
        for n in 1..=cap {
            spec.sample_one(&mut sub, &mut buf);
            if geom::contains_flat(dim, &buf, theta, 0.0, geom::GEOM_TOL) {
                hit = n;
                was_capped = false;
                break;
            }
        }
        counts.sum += hit;
        counts.sum_sq += (hit as u128) * (hit as u128);
        counts.capped += was_capped as u64;
        counts.trials += 1;
    }
    Ok(counts)
}

/// Estimate the expected first index at which the growing sample hull
/// captures `theta`, with trials capped at `cap` draws (capped trials count
/// at the cap, making the estimate a certified lower bound).
pub fn estimate_first_hit(
    spec: &DistributionSpec,
    theta: &[f64],
    trials: u64,
    cap: u64,
    stream: &RngStream,
) -> Result<FirstHitResult> {
    if trials < 100 {
        return Err(Error::Parameter(format!("trials = {trials} below the minimum 100")));
    }
    let counts = first_hit_counts(spec, theta, cap, 0..trials, stream)?;
    Ok(counts.finalize(cap, stream.seed()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CompareVerdict {
    AtLeastHalf,
    BelowHalf,
    Inconclusive,
}

/// Sequential test of `p_n >= 1/2` with a two-sided Hoeffding radius; the
/// error budget is split across the doubling batch checks.
fn compare_p_to_half(
    spec: &DistributionSpec,
    theta: &[f64],
    n: u64,
    err_budget: f64,
    stream: &RngStream,
) -> Result<CompareVerdict> {
    let dim = spec.dim();
    let err_check = err_budget / 16.0;
    let mut successes = 0u64;
    let mut trials = 0u64;
    let mut batch = COMPARE_BATCH;
    let mut buf: Vec<f64> = Vec::with_capacity(n as usize * dim);
    while trials < COMPARE_TRIAL_CAP {
        let target = (trials + batch).min(COMPARE_TRIAL_CAP);
        while trials < target {
            let mut sub = stream.substream(trials);
            buf.clear();
            spec.sample_into(n as usize, &mut sub, &mut buf);
            if geom::contains_flat(dim, &buf, theta, 0.0, geom::GEOM_TOL) {
                successes += 1;
            }
            trials += 1;
        }
        let p_hat = successes as f64 / trials as f64;
        let radius = math::sqrt(math::ln(2.0 / err_check) / (2.0 * trials as f64));
        if p_hat - radius >= 0.5 {
            return Ok(CompareVerdict::AtLeastHalf);
        }
        if p_hat + radius < 0.5 {
            return Ok(CompareVerdict::BelowHalf);
        }
        batch *= 2;
    }
    Ok(CompareVerdict::Inconclusive)
}

/// Bracket the threshold count `N = inf{n : p_n >= 1/2}` by a doubling
/// search followed by bisection, each comparison certified by a sequential
/// Hoeffding test; the per-comparison error budgets are split geometrically
/// so the bracket holds at the stated confidence.
pub fn estimate_n(
    spec: &DistributionSpec,
    theta: &[f64],
    confidence: f64,
    stream: &RngStream,
) -> Result<NxBracket> {
    if !(confidence > 0.5 && confidence < 1.0) {
        return Err(Error::Parameter(format!("confidence = {confidence} outside (0.5, 1)")));
    }
    if theta.len() != spec.dim() {
        return Err(Error::DimMismatch { expected: spec.dim(), got: theta.len() });
    }
    let err_total = 1.0 - confidence;
    let mut comparison = 0u32;
    let mut next_budget = || {
        comparison += 1;
        err_total * math::powi(0.5, comparison as i32)
    };

    let mut widened = false;
    let mut inconclusive: BTreeSet<u64> = BTreeSet::new();

    // Doubling phase: find a certified upper endpoint.
    let mut lo = 0u64; // largest n certified below 1/2
    let mut hi; // smallest n certified at least 1/2
    let mut n = 1u64;
    loop {
        let sub = stream.substream(0x1000_0000 + n);
        match compare_p_to_half(spec, theta, n, next_budget(), &sub)? {
            CompareVerdict::AtLeastHalf => {
                hi = n;
                break;
            }
            CompareVerdict::BelowHalf => lo = n,
            CompareVerdict::Inconclusive => {
                widened = true;
                inconclusive.insert(n);
            }
        }
        n *= 2;
        if n > DOUBLING_CAP {
            return Ok(NxBracket {
                lower: lo + 1,
                upper: DOUBLING_CAP,
                confidence,
                widened: true,
            });
        }
    }

    // Bisection, skipping points already known to be inconclusive.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let probe = (mid..hi)
            .chain((lo + 1..mid).rev())
            .find(|m| !inconclusive.contains(m));
        let Some(m) = probe else {
            break;
        };
        let sub = stream.substream(0x2000_0000 + m);
        match compare_p_to_half(spec, theta, m, next_budget(), &sub)? {
            CompareVerdict::AtLeastHalf => hi = m,
            CompareVerdict::BelowHalf => lo = lo.max(m),
            CompareVerdict::Inconclusive => {
                widened = true;
                inconclusive.insert(m);
            }
        }
    }
    Ok(NxBracket { lower: lo + 1, upper: hi, confidence, widened })
}

/// Depth estimate from a direction scan.
#[derive(Debug, Clone)]
pub struct TukeyEstimate {
    /// De-biased estimate at the minimizing direction (fresh sample).
    pub estimate: EstimateResult,
    /// Minimizing direction from the scan stage.
    pub direction: Vec<f64>,
    /// Raw scan minimum (biased low; the min of correlated empirical means).
    pub scan_min: f64,
}

/// Upper-bound estimator of the (epsilon-relaxed) Tukey depth: minimize the
/// empirical mass of `{x : <c, x - theta> <= epsilon}` over sampled unit
/// directions, then re-estimate at the argmin with a fresh sample to remove
/// the selection bias of the minimum.
pub fn estimate_tukey_mc(
    spec: &DistributionSpec,
    theta: &[f64],
    epsilon: f64,
    n_directions: u64,
    n_samples: u64,
    stream: &RngStream,
) -> Result<TukeyEstimate> {
    if theta.len() != spec.dim() {
        return Err(Error::DimMismatch { expected: spec.dim(), got: theta.len() });
    }
    if n_directions == 0 {
        return Err(Error::Parameter(String::from("nDirections must be at least 1")));
    }
    if n_samples < 100 {
        return Err(Error::Parameter(format!("nSamples = {n_samples} below the minimum 100")));
    }
    if epsilon < 0.0 {
        return Err(Error::Parameter(String::from("epsilon must be nonnegative")));
    }
    let dim = spec.dim();
    let scan = spec.sample(n_samples as usize, &mut stream.substream(0))?;
    let mut dir_stream = stream.substream(1);
    let mut dir = vec![0.0; dim];
    let mut best_dir = vec![0.0; dim];
    let mut best_count = u64::MAX;
    for _ in 0..n_directions {
        dir_stream.unit_direction(dim, &mut dir);
        let mut count = 0u64;
        for p in scan.iter() {
            let mut ip = 0.0;
            for k in 0..dim {
                ip += dir[k] * (p[k] - theta[k]);
            }
            if ip <= epsilon {
                count += 1;
            }
        }
        if count < best_count {
            best_count = count;
            best_dir.copy_from_slice(&dir);
        }
    }
    let scan_min = best_count as f64 / n_samples as f64;

    // De-bias: fresh sample at the argmin direction.
    let fresh = spec.sample(n_samples as usize, &mut stream.substream(2))?;
    let mut count = 0u64;
    for p in fresh.iter() {
        let mut ip = 0.0;
        for k in 0..dim {
            ip += best_dir[k] * (p[k] - theta[k]);
        }
        if ip <= epsilon {
            count += 1;
        }
    }
    Ok(TukeyEstimate {
        estimate: EstimateResult::from_bernoulli(count, n_samples, stream.seed()),
        direction: best_dir,
        scan_min,
    })
}

/// Exact halfspace depth of `theta` for a weighted planar point set.
///
/// Angular sweep: a direction at angle `phi` excludes the open halfplane
/// beyond `theta`; each point enters the closed lower halfspace at
/// `a_i + pi/2` and leaves at `a_i - pi/2`. The closed-halfspace minimum is
/// attained on an open arc between consecutive critical angles, so sweeping
/// arc values suffices. Mass sitting exactly at `theta` is always counted.
/// O(n log n).
pub fn empirical_tukey_2d(measure: &WeightedMeasure, theta: &[f64]) -> Result<f64> {
    if measure.dim() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: measure.dim() });
    }
    if theta.len() != 2 {
        return Err(Error::DimMismatch { expected: 2, got: theta.len() });
    }
    let two_pi = 2.0 * math::PI;
    let norm_angle = |a: f64| {
        let mut x = a % two_pi;
        if x < 0.0 {
            x += two_pi;
        }
        x
    };

    let mut center_mass = 0.0;
    // (angle, weight delta)
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * measure.len());
    let mut offsets: Vec<(f64, f64, f64)> = Vec::with_capacity(measure.len());
    for (p, &w) in measure.support().iter().zip(measure.weights()) {
        let dx = p[0] - theta[0];
        let dy = p[1] - theta[1];
        if math::abs(dx) < 1e-12 && math::abs(dy) < 1e-12 {
            center_mass += w;
            continue;
        }
        let a = math::atan2(dy, dx);
        events.push((norm_angle(a + math::PI / 2.0), w));
        events.push((norm_angle(a - math::PI / 2.0), -w));
        offsets.push((dx, dy, w));
    }
    if events.is_empty() {
        return Ok(center_mass);
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Weight on the wrap-around arc (after the last event, before the
    // first), by direct evaluation at its midpoint.
    let start_angle = (events.last().unwrap().0 + events[0].0 + two_pi) / 2.0;
    let (c, s) = (math::cos(start_angle), math::sin(start_angle));
    let mut weight = 0.0;
    for &(dx, dy, w) in &offsets {
        if c * dx + s * dy <= 0.0 {
            weight += w;
        }
    }

    let mut min_weight = weight;
    let mut i = 0;
    while i < events.len() {
        let angle = events[i].0;
        // Apply all deltas sharing this critical angle, then record the
        // value on the open arc that follows.
        while i < events.len() && events[i].0 - angle < 1e-12 {
            weight += events[i].1;
            i += 1;
        }
        if weight < min_weight {
            min_weight = weight;
        }
    }
    Ok(center_mass + min_weight.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointSet;

    fn stream(seed: u64) -> RngStream {
        RngStream::new(seed, 0)
    }

    fn gaussian(d: usize) -> DistributionSpec {
        DistributionSpec::gaussian(d).unwrap()
    }

    #[test]
    fn profile_matches_symmetric_formula() {
        let spec = gaussian(2);
        let trials = 40_000;
        let prof = estimate_p_profile(&spec, &[0.0, 0.0], 0.0, &[3, 4, 6], trials, &stream(41))
            .unwrap();
        assert!(prof.per_trial_monotone);
        let expect = [0.25, 0.5, 0.8125];
        for (est, &e) in prof.estimates.iter().zip(&expect) {
            assert!(
                math::abs(est.value - e) <= 4.0 * est.stderr,
                "estimate {} vs exact {e}",
                est.value
            );
        }
        // Coupled estimates are exactly monotone.
        assert!(prof.estimates[0].value <= prof.estimates[1].value);
        assert!(prof.estimates[1].value <= prof.estimates[2].value);
    }

    #[test]
    fn profile_matches_two_point_formula() {
        let spec = DistributionSpec::two_point(0.1).unwrap();
        let prof =
            estimate_p_profile(&spec, &[0.0], 0.0, &[2, 3], 100_000, &stream(42)).unwrap();
        for (est, &e) in prof.estimates.iter().zip(&[0.18, 0.27]) {
            assert!(math::abs(est.value - e) <= 4.0 * est.stderr);
        }
    }

    #[test]
    fn profile_single_point_never_captures() {
        let spec = gaussian(2);
        let prof =
            estimate_p_profile(&spec, &[0.3, -0.2], 0.0, &[1], 1000, &stream(43)).unwrap();
        assert_eq!(prof.estimates[0].value, 0.0);
    }

    #[test]
    fn profile_counts_merge_is_partition_invariant() {
        let spec = gaussian(2);
        let s = stream(44);
        let whole = profile_counts(&spec, &[0.0, 0.0], 0.0, &[3, 5], 0..4000, &s).unwrap();
        let a = profile_counts(&spec, &[0.0, 0.0], 0.0, &[3, 5], 0..1234, &s).unwrap();
        let b = profile_counts(&spec, &[0.0, 0.0], 0.0, &[3, 5], 1234..4000, &s).unwrap();
        let merged = a.merge(&b).unwrap();
        assert_eq!(whole.contained, merged.contained);
        assert_eq!(whole.trials, merged.trials);
    }

    #[test]
    fn profile_budget_guard() {
        let spec = gaussian(3);
        let r = estimate_p_profile(&spec, &[0.0; 3], 0.0, &[1_000_000], 1_000_000, &stream(45));
        assert!(matches!(r, Err(Error::Budget(_))));
    }

    #[test]
    fn profile_rejects_unsorted_n() {
        let spec = gaussian(1);
        assert!(estimate_p_profile(&spec, &[0.0], 0.0, &[3, 3], 100, &stream(0)).is_err());
        assert!(estimate_p_profile(&spec, &[0.0], 0.0, &[], 100, &stream(0)).is_err());
    }

    /// Expected first-hit index for the one-dimensional gaussian by
    /// enumeration over sign sequences: the hull captures the origin once
    /// both signs appeared, so P(hit > n) counts the 2 constant-sign
    /// sequences among 2^n.
    fn first_hit_mean_sign_oracle() -> f64 {
        let mut expectation = 1.0; // P(hit > 0) = 1
        for n in 1..60u32 {
            let total = 1u64 << n.min(62);
            let constant = 2u64;
            expectation += constant as f64 / total as f64;
        }
        expectation
    }

    #[test]
    fn first_hit_gaussian_1d() {
        let oracle = first_hit_mean_sign_oracle();
        assert!(math::abs(oracle - 3.0) < 1e-12);
        let spec = gaussian(1);
        let r = estimate_first_hit(&spec, &[0.0], 40_000, 200, &stream(46)).unwrap();
        assert!(r.capped_trials == 0);
        assert!(
            math::abs(r.estimate.value - oracle) <= 4.0 * r.estimate.stderr,
            "mean {} vs oracle {oracle}",
            r.estimate.value
        );
        // Bracket covers the true threshold N = 2.
        assert!(r.bracket.lower <= 2 && 2 <= r.bracket.upper);
    }

    #[test]
    fn first_hit_two_point_geometric_oracle() {
        // P(hit > n) = eps^n + (1-eps)^n for n >= 1.
        let eps = 0.25f64;
        let mut oracle = 1.0;
        for n in 1..400 {
            oracle += math::powi(eps, n) + math::powi(1.0 - eps, n);
        }
        assert!(math::abs(oracle - (1.0 + eps / (1.0 - eps) + (1.0 - eps) / eps)) < 1e-12);
        let spec = DistributionSpec::two_point(eps).unwrap();
        let r = estimate_first_hit(&spec, &[0.0], 40_000, 500, &stream(47)).unwrap();
        assert!(math::abs(r.estimate.value - oracle) <= 4.0 * r.estimate.stderr);
    }

    #[test]
    fn first_hit_point_mass_is_one() {
        let support = PointSet::from_points(&[&[0.5, 0.5]]).unwrap();
        let spec = DistributionSpec::empirical(WeightedMeasure::uniform(support));
        let r = estimate_first_hit(&spec, &[0.5, 0.5], 500, 10, &stream(48)).unwrap();
        assert_eq!(r.estimate.value, 1.0);
        assert_eq!(r.estimate.stderr, 0.0);
    }

    #[test]
    fn first_hit_cap_warning() {
        // two_point(0.01) rarely shows the positive spike within 5 draws.
        let spec = DistributionSpec::two_point(0.01).unwrap();
        let r = estimate_first_hit(&spec, &[0.0], 200, 5, &stream(49)).unwrap();
        assert!(r.capped_trials > 0);
        assert!(r.reliability_warning);
        assert!(r.bracket.widened);
    }

    #[test]
    fn threshold_bracket_gaussian() {
        for d in 1..=2usize {
            let spec = gaussian(d);
            let b = estimate_n(&spec, &vec![0.0; d], 0.95, &stream(50 + d as u64)).unwrap();
            let truth = 2 * d as u64;
            assert!(
                b.lower <= truth && truth <= b.upper,
                "d = {d}: bracket [{}, {}] misses {truth}",
                b.lower,
                b.upper
            );
            assert!(b.upper - b.lower <= 2, "bracket too wide: [{}, {}]", b.lower, b.upper);
        }
    }

    #[test]
    fn threshold_bracket_two_point() {
        // Closed form: smallest n with 1 - eps^n - (1-eps)^n >= 1/2.
        let eps = 0.2f64;
        let p = |n: u64| 1.0 - math::powi(eps, n as i32) - math::powi(1.0 - eps, n as i32);
        let mut truth = 1;
        while p(truth) < 0.5 {
            truth += 1;
        }
        assert_eq!(truth, 4);
        let spec = DistributionSpec::two_point(eps).unwrap();
        let b = estimate_n(&spec, &[0.0], 0.95, &stream(52)).unwrap();
        assert!(b.lower <= truth && truth <= b.upper);
    }

    #[test]
    fn threshold_bracket_point_mass() {
        let support = PointSet::from_points(&[&[1.0]]).unwrap();
        let spec = DistributionSpec::empirical(WeightedMeasure::uniform(support));
        let b = estimate_n(&spec, &[1.0], 0.9, &stream(53)).unwrap();
        assert_eq!((b.lower, b.upper), (1, 1));
        assert!(!b.widened);
    }

    #[test]
    fn threshold_rejects_bad_confidence() {
        let spec = gaussian(1);
        assert!(estimate_n(&spec, &[0.0], 0.5, &stream(0)).is_err());
        assert!(estimate_n(&spec, &[0.0], 1.0, &stream(0)).is_err());
    }

    #[test]
    fn lemma_sandwich_links_first_hit_and_threshold() {
        // The first-hit bracket must contain the midpoint of the threshold
        // bracket for the oracle specs.
        let cases: Vec<(DistributionSpec, Vec<f64>)> = vec![
            (gaussian(1), vec![0.0]),
            (gaussian(2), vec![0.0; 2]),
            (gaussian(3), vec![0.0; 3]),
            (DistributionSpec::two_point(0.2).unwrap(), vec![0.0]),
        ];
        for (spec, theta) in cases {
            let fh = estimate_first_hit(&spec, &theta, 20_000, 400, &stream(54)).unwrap();
            let nb = estimate_n(&spec, &theta, 0.95, &stream(55)).unwrap();
            let mid = (nb.lower + nb.upper) / 2;
            assert!(
                fh.bracket.lower <= mid && mid <= fh.bracket.upper,
                "{spec}: first-hit [{}, {}] misses threshold midpoint {mid}",
                fh.bracket.lower,
                fh.bracket.upper
            );
        }
    }

    #[test]
    fn tukey_mc_gaussian() {
        let spec = gaussian(2);
        let r = estimate_tukey_mc(&spec, &[0.0, 0.0], 0.0, 512, 20_000, &stream(56)).unwrap();
        // Never significantly below the exact depth 1/2.
        assert!(r.estimate.value >= 0.5 - 4.0 * r.estimate.stderr);
        assert!(r.scan_min <= r.estimate.value + 4.0 * r.estimate.stderr);
    }

    #[test]
    fn tukey_mc_two_point() {
        let spec = DistributionSpec::two_point(0.2).unwrap();
        let r = estimate_tukey_mc(&spec, &[0.0], 0.0, 64, 20_000, &stream(57)).unwrap();
        let exact = 0.2;
        assert!(math::abs(r.estimate.value - exact) <= 4.0 * r.estimate.stderr);
    }

    #[test]
    fn tukey_mc_outside_hull_hits_zero() {
        let support =
            PointSet::from_points(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]).unwrap();
        let m = WeightedMeasure::uniform(support);
        let spec = DistributionSpec::empirical(m.clone());
        let theta = [-1.0, -1.0];
        let r = estimate_tukey_mc(&spec, &theta, 0.0, 2048, 500, &stream(58)).unwrap();
        assert_eq!(r.estimate.value, 0.0);
        // Exact sweep agrees.
        assert_eq!(empirical_tukey_2d(&m, &theta).unwrap(), 0.0);
    }

    #[test]
    fn sweep_depth_cross() {
        let support =
            PointSet::from_points(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]])
                .unwrap();
        let m = WeightedMeasure::uniform(support);
        let d = empirical_tukey_2d(&m, &[0.0, 0.0]).unwrap();
        assert!(math::abs(d - 0.5) < 1e-12);
    }

    #[test]
    fn sweep_depth_triangle_centroid() {
        let support =
            PointSet::from_points(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let m = WeightedMeasure::uniform(support);
        let centroid = [1.0 / 3.0, 1.0 / 3.0];
        let d = empirical_tukey_2d(&m, &centroid).unwrap();
        assert!(math::abs(d - 1.0 / 3.0) < 1e-12);
    }

    #[test]
    fn sweep_depth_mass_at_theta() {
        let support = PointSet::from_points(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        let m = WeightedMeasure::new(support, vec![0.25, 0.75]).unwrap();
        // Halfplane away from (1,0) keeps only the coincident mass.
        let d = empirical_tukey_2d(&m, &[0.0, 0.0]).unwrap();
        assert!(math::abs(d - 0.25) < 1e-12);
    }

    /// Brute-force oracle: evaluate the closed-halfplane weight at every
    /// critical angle and at nudged angles inside the adjacent arcs.
    fn brute_depth(m: &WeightedMeasure, theta: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let mut angles = alloc::vec::Vec::new();
        for p in m.support().iter() {
            let dx = p[0] - theta[0];
            let dy = p[1] - theta[1];
            if math::abs(dx) < 1e-12 && math::abs(dy) < 1e-12 {
                continue;
            }
            let a = math::atan2(dy, dx);
            for delta in [-1e-6, 0.0, 1e-6] {
                angles.push(a + math::PI / 2.0 + delta);
                angles.push(a - math::PI / 2.0 + delta);
            }
        }
        if angles.is_empty() {
            angles.push(0.0);
        }
        for &phi in &angles {
            let (c, s) = (math::cos(phi), math::sin(phi));
            let mut w = 0.0;
            for (p, &wi) in m.support().iter().zip(m.weights()) {
                if c * (p[0] - theta[0]) + s * (p[1] - theta[1]) <= 1e-14 {
                    w += wi;
                }
            }
            best = best.min(w);
        }
        best
    }

    #[test]
    fn sweep_matches_brute_force_on_random_inputs() {
        let mut s = stream(59);
        for case in 0..60 {
            let n = 12;
            let mut flat = alloc::vec::Vec::new();
            for _ in 0..(2 * n) {
                flat.push(s.uniform_in(-1.0, 1.0));
            }
            let support = PointSet::from_flat(2, flat).unwrap();
            let mut weights: alloc::vec::Vec<f64> = (0..n).map(|_| s.uniform() + 0.1).collect();
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            let m = WeightedMeasure::new(support, weights).unwrap();
            let theta = [s.uniform_in(-0.5, 0.5), s.uniform_in(-0.5, 0.5)];
            let fast = empirical_tukey_2d(&m, &theta).unwrap();
            let slow = brute_depth(&m, &theta);
            assert!(
                math::abs(fast - slow) < 1e-9,
                "case {case}: sweep {fast} vs brute {slow}"
            );
        }
    }

    #[test]
    fn increment_inequality_holds_on_coupled_profile() {
        // Coupled prefix estimates for the planar gaussian: the increment
        // ratio inequality with depth 1/2 within noise.
        let spec = gaussian(2);
        let ns: Vec<u64> = (2..=9).collect();
        let trials = 60_000;
        let prof =
            estimate_p_profile(&spec, &[0.0, 0.0], 0.0, &ns, trials, &stream(60)).unwrap();
        let p: Vec<f64> = prof.estimates.iter().map(|e| e.value).collect();
        let t = trials as f64;
        for i in 1..p.len() - 1 {
            let n = ns[i] as f64;
            let coef = n * 0.5 / (n - 2.0);
            let lhs = p[i + 1] - p[i];
            let rhs = coef * (p[i] - p[i - 1]);
            let se_l = math::sqrt((lhs.max(0.0) * (1.0 - lhs).max(0.0)).max(1e-12) / t);
            let se_r = math::sqrt(((p[i] - p[i - 1]).max(0.0)).max(1e-12) / t);
            let slack = 5.0 * (se_l + coef * se_r);
            assert!(
                lhs <= rhs + slack,
                "n = {n}: increment {lhs} > {rhs} + {slack}"
            );
        }
    }
}
