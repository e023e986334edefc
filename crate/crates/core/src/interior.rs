//! Experiments on the deterministic interior body of the random polytope:
//! the depth level set `K^alpha = {theta : depth(theta) >= alpha}`.
//!
//! For the gaussian the level set is the ball of radius `-quantile(alpha)`,
//! which gives closed-form gauges and membership oracles; everything else
//! falls back to one-sided sampled verdicts where indeterminate is an
//! honest third answer, never silently coerced.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bounds;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimate;
use crate::geom::{self, PointSet};
use crate::math;
use crate::rng::RngStream;

/// Boundary probes per dimension for inclusion nets.
const INCLUSION_NET_PROBES_PER_DIM: usize = 64;
/// Defaults for sampled membership verdicts.
const VERDICT_DIRECTIONS: u64 = 4096;
const VERDICT_SAMPLES: u64 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthVerdict {
    Member,
    NotMember,
    /// The sampled test could not separate the depth from `alpha`.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictProvenance {
    Exact,
    Sampled,
}

/// Is `theta` in the depth level set `K^alpha`?
///
/// Exact when the spec carries a depth oracle; otherwise one-sided at four
/// standard errors around the direction-scan estimate.
pub fn kalpha_contains(
    spec: &DistributionSpec,
    theta: &[f64],
    alpha: f64,
    stream: &RngStream,
) -> Result<(DepthVerdict, VerdictProvenance)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    if let Some(depth) = spec.exact_tukey(theta, 0.0) {
        let verdict = if depth >= alpha { DepthVerdict::Member } else { DepthVerdict::NotMember };
        return Ok((verdict, VerdictProvenance::Exact));
    }
    let est = estimate::estimate_tukey_mc(
        spec,
        theta,
        0.0,
        VERDICT_DIRECTIONS,
        VERDICT_SAMPLES,
        stream,
    )?;
    let margin = 4.0 * est.estimate.stderr;
    let verdict = if est.estimate.value <= alpha - margin {
        DepthVerdict::NotMember
    } else if est.estimate.value >= alpha + margin {
        DepthVerdict::Member
    } else {
        DepthVerdict::Indeterminate
    };
    Ok((verdict, VerdictProvenance::Sampled))
}

/// Radius of the gaussian depth level set, `None` when the set is empty.
fn gaussian_kalpha_radius(alpha: f64) -> Option<f64> {
    if alpha > 0.5 {
        return None;
    }
    Some(-math::normal_quantile(alpha))
}

/// Inclusion-trial outcome counts over a trial range: per trial, draw `n`
/// points and test that every net point lies in the hull. Trial `t` draws
/// from `stream.substream(t)`, so the count is partition-invariant.
pub fn inclusion_counts(
    spec: &DistributionSpec,
    net: Option<&PointSet>,
    n: u64,
    trial_range: core::ops::Range<u64>,
    stream: &RngStream,
) -> Result<u64> {
    let dim = spec.dim();
    if let Some(net) = net {
        if net.dim() != dim {
            return Err(Error::DimMismatch { expected: dim, got: net.dim() });
        }
    }
    let mut successes = 0u64;
    let mut buf: Vec<f64> = Vec::with_capacity(n as usize * dim);
    for t in trial_range {
        let mut sub = stream.substream(t);
        buf.clear();
        spec.sample_into(n as usize, &mut sub, &mut buf);
        let ok = match net {
            None => true, // empty level set: vacuous inclusion
            Some(net) => net
                .iter()
                .all(|p| geom::contains_flat(dim, &buf, p, 0.0, geom::GEOM_TOL)),
        };
        successes += ok as u64;
    }
    Ok(successes)
}

/// Report of an inclusion experiment.
#[derive(Debug, Clone)]
pub struct InclusionReport {
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    /// Sample size per trial (the theorem's own bound).
    pub n: u64,
    pub trials: u64,
    pub success_frequency: f64,
    /// Binomial standard error of the frequency.
    pub stderr: f64,
    pub net_size: usize,
    pub theorem_n: u64,
}

/// Build the net and theorem sample size for an inclusion experiment.
///
/// Returns `(net, theorem_n)`; the net is `None` when the level set is
/// empty (inclusion is then vacuous). Only specs with a computable
/// level-set gauge are supported.
pub fn inclusion_setup(
    spec: &DistributionSpec,
    alpha: f64,
    eps: f64,
    delta: f64,
    stream: &RngStream,
) -> Result<(Option<PointSet>, u64)> {
    let dim = spec.dim();
    let radius = match spec {
        DistributionSpec::Gaussian { .. } => gaussian_kalpha_radius(alpha),
        _ => {
            return Err(Error::UnsupportedSpec(format!(
                "no level-set gauge available for {spec}"
            )))
        }
    };
    let theorem_n = bounds::interior_sample_size(dim as u64, alpha, delta, eps)?;
    let net = match radius {
        None => None,
        Some(r) if r <= 0.0 => {
            // K^alpha = {0}.
            Some(PointSet::from_flat(dim, vec![0.0; dim])?)
        }
        Some(r) => {
            let mut net_stream = stream.substream(u64::MAX);
            Some(geom::epsilon_net(
                |x: &[f64]| math::norm(x) / r,
                eps,
                dim,
                INCLUSION_NET_PROBES_PER_DIM * dim,
                &mut net_stream,
            )?)
        }
    };
    Ok((net, theorem_n))
}

/// Test the interior-body guarantee on a spec with a computable level-set
/// gauge (gaussian): draw `n` points per trial, `n` from the sample-size
/// bound, and check that an epsilon-net of `K^alpha` lies in the hull, so
/// that the hull covers `(1 - eps) K^alpha`.
pub fn inclusion_experiment(
    spec: &DistributionSpec,
    alpha: f64,
    eps: f64,
    delta: f64,
    trials: u64,
    stream: &RngStream,
) -> Result<InclusionReport> {
    if trials == 0 {
        return Err(Error::Parameter(String::from("trials must be positive")));
    }
    let (net, theorem_n) = inclusion_setup(spec, alpha, eps, delta, stream)?;
    let successes = inclusion_counts(spec, net.as_ref(), theorem_n, 0..trials, stream)?;
    let freq = successes as f64 / trials as f64;
    Ok(InclusionReport {
        alpha,
        eps,
        delta,
        n: theorem_n,
        trials,
        success_frequency: freq,
        stderr: math::sqrt(freq * (1.0 - freq) / trials as f64),
        net_size: net.map_or(0, |n| n.len()),
        theorem_n,
    })
}

/// Three membership verdicts for one grid point.
#[derive(Debug, Clone)]
pub struct SandwichRow {
    pub theta: Vec<f64>,
    /// Strict level set `{depth > alpha}`.
    pub strict_inner: DepthVerdict,
    /// Polar of the floating body.
    pub polar: DepthVerdict,
    /// Level set `{depth >= alpha}`.
    pub level: DepthVerdict,
    pub provenance: VerdictProvenance,
}

/// Outcome of the floating-body sandwich test.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    /// Rows violating `strict ⊂ polar ⊂ level` among determinate verdicts.
    pub violations: usize,
    pub indeterminate: usize,
}

/// Check the sandwich `{depth > alpha} ⊂ polar(floating body) ⊂ K^alpha`
/// on a grid of query points.
///
/// The gaussian path uses closed forms: the floating body is the ball of
/// radius `1/q` with `q = quantile(1 - alpha)`, its polar the ball of
/// radius `q`, equal to `K^alpha`. Other symmetric specs get sampled
/// verdicts: a direction `c` whose empirical tail `P(<c, X> >= <c, theta>)`
/// is significantly below `alpha` witnesses polar non-membership, and
/// indeterminates abstain rather than count as violations.
pub fn floating_sandwich_check(
    spec: &DistributionSpec,
    alpha: f64,
    theta_grid: &PointSet,
    stream: &RngStream,
) -> Result<SandwichReport> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 0.5)")));
    }
    let dim = spec.dim();
    if theta_grid.dim() != dim {
        return Err(Error::DimMismatch { expected: dim, got: theta_grid.dim() });
    }
    let mut rows = Vec::with_capacity(theta_grid.len());
    let mut violations = 0usize;
    let mut indeterminate = 0usize;

    for (row_idx, theta) in theta_grid.iter().enumerate() {
        let row = match spec {
            DistributionSpec::Gaussian { .. } => {
                let q = math::normal_quantile(1.0 - alpha);
                let r = math::norm(theta);
                SandwichRow {
                    theta: theta.to_vec(),
                    strict_inner: if r < q { DepthVerdict::Member } else { DepthVerdict::NotMember },
                    polar: if r <= q { DepthVerdict::Member } else { DepthVerdict::NotMember },
                    level: if r <= q { DepthVerdict::Member } else { DepthVerdict::NotMember },
                    provenance: VerdictProvenance::Exact,
                }
            }
            _ => sampled_sandwich_row(spec, alpha, theta, &stream.substream(row_idx as u64))?,
        };
        if row.strict_inner == DepthVerdict::Member && row.polar == DepthVerdict::NotMember {
            violations += 1;
        }
        if row.polar == DepthVerdict::Member && row.level == DepthVerdict::NotMember {
            violations += 1;
        }
        if row.strict_inner == DepthVerdict::Indeterminate
            || row.polar == DepthVerdict::Indeterminate
            || row.level == DepthVerdict::Indeterminate
        {
            indeterminate += 1;
        }
        rows.push(row);
    }
    Ok(SandwichReport { rows, violations, indeterminate })
}

fn sampled_sandwich_row(
    spec: &DistributionSpec,
    alpha: f64,
    theta: &[f64],
    stream: &RngStream,
) -> Result<SandwichRow> {
    let dim = spec.dim();
    let est = estimate::estimate_tukey_mc(
        spec,
        theta,
        0.0,
        VERDICT_DIRECTIONS,
        VERDICT_SAMPLES,
        stream,
    )?;
    let margin = 4.0 * est.estimate.stderr;
    let one_sided = |lo_member: f64| {
        if est.estimate.value >= lo_member + margin {
            DepthVerdict::Member
        } else if est.estimate.value <= lo_member - margin {
            DepthVerdict::NotMember
        } else {
            DepthVerdict::Indeterminate
        }
    };
    let strict_inner = one_sided(alpha);
    let level = one_sided(alpha);

    // Polar: scan directions for a tail witness.
    let sample = spec.sample(VERDICT_SAMPLES as usize, &mut stream.substream(10))?;
    let mut dir_stream = stream.substream(11);
    let mut dir = vec![0.0; dim];
    let mut polar = DepthVerdict::Member;
    let mut any_indeterminate = false;
    for _ in 0..256 {
        dir_stream.unit_direction(dim, &mut dir);
        let level_at = math::dot(&dir, theta);
        if level_at <= 0.0 {
            continue; // constraint only binds on the theta side
        }
        let tail = sample
            .iter()
            .filter(|p| math::dot(&dir, p) >= level_at)
            .count() as f64
            / sample.len() as f64;
        let se = math::sqrt((tail * (1.0 - tail)).max(1e-12) / sample.len() as f64);
        if tail <= alpha - 4.0 * se {
            polar = DepthVerdict::NotMember;
            break;
        }
        if tail < alpha + 4.0 * se {
            any_indeterminate = true;
        }
    }
    if polar == DepthVerdict::Member && any_indeterminate {
        polar = DepthVerdict::Indeterminate;
    }
    Ok(SandwichRow {
        theta: theta.to_vec(),
        strict_inner,
        polar,
        level,
        provenance: VerdictProvenance::Sampled,
    })
}
