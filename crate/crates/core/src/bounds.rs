//! Closed-form bound calculators.
//!
//! Each operation returns a [`BoundReport`]: a named list of values tagged
//! upper/lower/exact together with the inequality family it implements, so
//! reports can be laid side by side with Monte Carlo estimates. Partiality
//! is expected — missing moment inputs skip entries, a zero depth yields
//! explicit infinities rather than errors.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::MomentData;
use crate::math::{self, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

#[derive(Debug, Clone)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    pub kind: BoundKind,
    /// Inequality family the entry implements.
    pub source: String,
}

/// Named collection of bound values.
#[derive(Debug, Clone, Default)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    fn push(&mut self, name: &str, value: f64, kind: BoundKind, source: &str) {
        self.entries.push(BoundEntry {
            name: String::from(name),
            value,
            kind,
            source: String::from(source),
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exact containment probability for a symmetric distribution in general
/// position: `1 - 2^{-(n-1)} sum_{i<d} C(n-1, i)` (Wendel's formula).
///
/// The same expression is the universal upper bound for absolutely
/// continuous distributions. Integer arithmetic below n = 64 — the identity
/// `wendel_exact(2d, d) = 1/2` holds to the last bit — and compensated
/// log-space summation above.
pub fn wendel_exact(n: u64, d: u64) -> f64 {
    assert!(n >= 1 && d >= 1);
    if n <= 63 {
        let mut sum: u128 = 0;
        for i in 0..d.min(n) {
            sum += math::binomial_u128(n - 1, i);
        }
        let denom = 1u128 << (n - 1);
        if sum >= denom {
            return 0.0;
        }
        return 1.0 - sum as f64 / denom as f64;
    }
    // Log space: each term exp(ln C(n-1, i) - (n-1) ln 2), summed ascending
    // with compensation.
    let ln2 = core::f64::consts::LN_2;
    let mut acc = KahanSum::new();
    for i in 0..d.min(n) {
        let t = math::ln_choose((n - 1) as f64, i as f64) - (n - 1) as f64 * ln2;
        acc.add(math::exp(t));
    }
    (1.0 - acc.value()).clamp(0.0, 1.0)
}

/// Bounds relating `p_n` to a known `p_m` for `n >= m >= d + 1`.
///
/// The ratio pair uses `C(n, d+1)/C(m, d+1)`; the subset-count entries are
/// the dimension-free `C(n, m) p_m` upper bound and the threshold bound
/// `N <= m / p_m`. Upper probability entries are clipped at 1.
pub fn sandwich_bounds(p_m: f64, m: u64, n: u64, d: u64) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&p_m) {
        return Err(Error::Parameter(format!("p_m = {p_m} outside [0, 1]")));
    }
    if n < m || m < d + 1 {
        return Err(Error::Parameter(format!(
            "need n >= m >= d + 1, got n = {n}, m = {m}, d = {d}"
        )));
    }
    let ln_ratio =
        math::ln_choose(n as f64, (d + 1) as f64) - math::ln_choose(m as f64, (d + 1) as f64);
    let ratio = math::exp(ln_ratio);
    let mut report = BoundReport::default();
    report.push(
        "ratio_lower",
        math::exp(ln_ratio - (n - m) as f64 * core::f64::consts::LN_2) * p_m,
        BoundKind::Lower,
        "containment-ratio",
    );
    report.push(
        "ratio_upper",
        (ratio * p_m).min(1.0),
        BoundKind::Upper,
        "containment-ratio",
    );
    let naive = if m <= 63 && n <= 63 {
        math::binomial_u128(n, m) as f64 * p_m
    } else {
        math::exp(math::ln_choose(n as f64, m as f64) + math::ln(p_m.max(f64::MIN_POSITIVE)))
    };
    report.push("subset_upper", naive.min(1.0), BoundKind::Upper, "subset-count");
    let n_upper = if p_m > 0.0 { m as f64 / p_m } else { f64::INFINITY };
    report.push("n_upper_from_p", n_upper, BoundKind::Upper, "subset-count");
    Ok(report)
}

/// The depth-driven recursion bounding `1 - p_n` and its closed forms.
///
/// `g_recursion` iterates `g_n = min{1, n(1-alpha)/(n-d) g_{n-1}}` from
/// `g_n = 1` on `n <= d`. `closed_form` applies for `n >= d/alpha`,
/// `simplified` for `n >= (1+alpha)d/alpha`, and `trivial_lower` is
/// `(1-alpha)^n`.
pub fn g_bounds(d: u64, n: u64, alpha: f64) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1)")));
    }
    if n == 0 || d == 0 {
        return Err(Error::Parameter(String::from("n and d must be positive")));
    }
    let mut report = BoundReport::default();
    report.push("g_recursion", g_recursion(d, n, alpha), BoundKind::Upper, "depth-recursion");

    let df = d as f64;
    let nf = n as f64;
    if nf >= df / alpha {
        let rate = math::ln(1.0 / (1.0 - alpha)) / alpha;
        let ln_val = df * (math::ln(nf * alpha / df) + rate * (1.0 + alpha - nf * alpha / df));
        report.push("closed_form", math::exp(ln_val), BoundKind::Upper, "depth-rate");
    }
    if nf >= (1.0 + alpha) * df / alpha {
        let ln_val = df * (math::ln(nf * alpha / df) + 1.0 + alpha - nf * alpha / df);
        report.push("simplified", math::exp(ln_val), BoundKind::Upper, "depth-rate");
    }
    report.push(
        "trivial_lower",
        math::exp(nf * math::ln(1.0 - alpha)),
        BoundKind::Lower,
        "separating-halfspace",
    );
    Ok(report)
}

/// Ceiling that absorbs a few ulps of roundoff, so arguments that are
/// integers analytically (e.g. 6d B^2 with B = sqrt(2d)) stay put.
fn ceil_tol(x: f64) -> f64 {
    math::ceil(x - 16.0 * f64::EPSILON * math::abs(x))
}

/// Value of the recursion alone.
pub fn g_recursion(d: u64, n: u64, alpha: f64) -> f64 {
    let mut g = 1.0;
    for k in (d + 1)..=n {
        g = (k as f64 * (1.0 - alpha) / (k - d) as f64 * g).min(1.0);
    }
    g
}

/// Integer bounds on the threshold count `N` from the depth alone:
/// `1/(2 alpha) <= N <= ceil(3d/alpha)`, plus the floor `p_n > 1 - 2^{-d}`
/// valid at every `n >= 3d/alpha`. A zero depth yields explicit infinities.
pub fn nx_depth_bounds(alpha: f64, d: u64) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    if d == 0 {
        return Err(Error::Parameter(String::from("d must be positive")));
    }
    let mut report = BoundReport::default();
    if alpha == 0.0 {
        report.push("n_lower", f64::INFINITY, BoundKind::Lower, "depth-threshold");
        report.push("n_upper", f64::INFINITY, BoundKind::Upper, "depth-threshold");
        return Ok(report);
    }
    report.push(
        "n_lower",
        ceil_tol(1.0 / (2.0 * alpha)),
        BoundKind::Lower,
        "depth-threshold",
    );
    report.push(
        "n_upper",
        ceil_tol(3.0 * d as f64 / alpha),
        BoundKind::Upper,
        "depth-threshold",
    );
    report.push(
        "p_floor_at_n_upper",
        1.0 - math::powi(2.0, -(d as i32)),
        BoundKind::Lower,
        "depth-threshold",
    );
    Ok(report)
}

/// Upper bounds on the threshold count `N` from moment data; every entry
/// whose inputs are present is reported, and an entirely absent report is
/// an error.
///
/// - bounded support `B`: depth floor `1/(2B^2)` and `N <= ceil(6 d B^2)`;
/// - directional third moment `rho3`: `17d (1 + 9/4 rho3^2)`;
/// - norm moments `m3 = E||Y||^3`, `m4 = E||Y||^4` of the whitened vector:
///   the same expression with `m3^2` or `m4` in place of `rho3^2`;
/// - multivariate CLT route: `8d (1 + 36 d^2 (42 d^{1/4} + 16)^2 m3^2)`;
/// - Wasserstein coupling route (needs `B`): `6 d n*` with `n*` the
///   smallest integer satisfying `n/(1 + ln n)^2 >= 2^16 * 100 * d^{13/2} B^2`.
pub fn nx_moment_bounds(d: u64, moments: &MomentData) -> Result<BoundReport> {
    if d == 0 {
        return Err(Error::Parameter(String::from("d must be positive")));
    }
    let df = d as f64;
    let mut report = BoundReport::default();

    if let Some(b) = moments.norm_bound {
        report.push("alpha_lower", 1.0 / (2.0 * b * b), BoundKind::Lower, "bounded-support");
        report.push(
            "n_upper_bounded",
            ceil_tol(6.0 * df * b * b),
            BoundKind::Upper,
            "bounded-support",
        );
        let rhs = math::powi(2.0, 16) * 100.0 * math::powf(df, 6.5) * b * b;
        report.push(
            "n_upper_wasserstein",
            6.0 * df * smallest_n_ratio_at_least(rhs),
            BoundKind::Upper,
            "wasserstein-coupling",
        );
    }
    if let Some(rho3) = moments.rho3 {
        report.push(
            "n_upper_directional",
            17.0 * df * (1.0 + 2.25 * rho3 * rho3),
            BoundKind::Upper,
            "univariate-clt",
        );
    }
    if let Some(m3) = moments.norm_moment3 {
        report.push(
            "n_upper_norm3",
            17.0 * df * (1.0 + 2.25 * m3 * m3),
            BoundKind::Upper,
            "univariate-clt",
        );
        let c = 42.0 * math::powf(df, 0.25) + 16.0;
        report.push(
            "n_upper_multivariate",
            8.0 * df * (1.0 + 36.0 * df * df * c * c * m3 * m3),
            BoundKind::Upper,
            "multivariate-clt",
        );
    }
    if let Some(m4) = moments.norm_moment4 {
        report.push(
            "n_upper_norm4",
            17.0 * df * (1.0 + 2.25 * m4),
            BoundKind::Upper,
            "univariate-clt",
        );
    }
    if report.is_empty() {
        return Err(Error::EmptyReport);
    }
    Ok(report)
}

/// Smallest integer `n >= 3` with `n / (1 + ln n)^2 >= rhs`, by doubling
/// plus bisection on the monotone branch (the ratio increases for n >= 3).
fn smallest_n_ratio_at_least(rhs: f64) -> f64 {
    let ratio = |n: f64| n / ((1.0 + math::ln(n)) * (1.0 + math::ln(n)));
    if ratio(3.0) >= rhs {
        return 3.0;
    }
    let mut hi = 3.0f64;
    while ratio(hi) < rhs {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    // Invariant: ratio(lo) < rhs <= ratio(hi).
    let mut lo = hi / 2.0;
    while hi - lo > 1.0 {
        let mid = math::floor((lo + hi) / 2.0);
        if ratio(mid) >= rhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest sample count guaranteeing, with probability `1 - delta`, that
/// the hull of the sample covers `(1 - eps)` times the depth-`alpha` level
/// set: `n >= (2d/alpha) max{ log(1/delta)/d + log(1/eps), 6 }`.
pub fn interior_sample_size(d: u64, alpha: f64, delta: f64, eps: f64) -> Result<u64> {
    for (name, v) in [("alpha", alpha), ("delta", delta), ("eps", eps)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Parameter(format!("{name} = {v} outside (0, 1)")));
        }
    }
    if d == 0 {
        return Err(Error::Parameter(String::from("d must be positive")));
    }
    let df = d as f64;
    let needed =
        (2.0 * df / alpha) * (math::ln(1.0 / delta) / df + math::ln(1.0 / eps)).max(6.0);
    Ok(ceil_tol(needed) as u64)
}

/// Failure probability of the half-body inclusion at depth
/// `alpha = (e n / d)^{-beta}`: `exp(-0.45 e^{-beta} n^{1-beta} d^beta)`,
/// valid once `n >= (12 e^beta)^{1/(1-beta)} d`. Returns `(n_min, failure)`.
pub fn interior_scaling_failure(d: u64, n: u64, beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Parameter(format!("beta = {beta} outside (0, 1)")));
    }
    let df = d as f64;
    let nf = n as f64;
    let n_min = math::powf(12.0 * math::exp(beta), 1.0 / (1.0 - beta)) * df;
    let fail = math::exp(
        -0.45 * math::exp(-beta) * math::powf(nf, 1.0 - beta) * math::powf(df, beta),
    );
    Ok((n_min, fail))
}

/// Inputs for [`be_gaps`]; absent fields skip their entries.
#[derive(Debug, Clone, Copy, Default)]
pub struct BeInputs {
    /// Directional third absolute moment of the whitened vector.
    pub rho3: Option<f64>,
    /// `E ||Y||^3` of the whitened vector.
    pub m3: Option<f64>,
    /// Almost-sure norm bound of the whitened summands.
    pub norm_bound: Option<f64>,
    /// Radius for the coupling correction entries.
    pub eps: Option<f64>,
}

/// Central-limit gap values at sample size `n` in dimension `d`:
///
/// - univariate cdf gap `0.4784 rho3 / sqrt(n)`;
/// - multivariate convex-set gap `(42 d^{1/4} + 16) m3 / sqrt(n)`;
/// - Wasserstein-2 distance `5 sqrt(d) B (1 + ln n) / sqrt(n)`;
/// - coupling correction `W2^2 / eps^2` at a caller-supplied radius.
pub fn be_gaps(n: u64, d: u64, inputs: &BeInputs) -> Result<BoundReport> {
    if n == 0 || d == 0 {
        return Err(Error::Parameter(String::from("n and d must be positive")));
    }
    let sqrt_n = math::sqrt(n as f64);
    let df = d as f64;
    let mut report = BoundReport::default();
    if let Some(rho3) = inputs.rho3 {
        report.push("cdf_gap", 0.4784 * rho3 / sqrt_n, BoundKind::Upper, "univariate-clt");
    }
    if let Some(m3) = inputs.m3 {
        report.push(
            "convex_set_gap",
            (42.0 * math::powf(df, 0.25) + 16.0) * m3 / sqrt_n,
            BoundKind::Upper,
            "multivariate-clt",
        );
    }
    if let Some(b) = inputs.norm_bound {
        let w2 = 5.0 * math::sqrt(df) * b * (1.0 + math::ln(n as f64)) / sqrt_n;
        report.push("wasserstein2", w2, BoundKind::Upper, "wasserstein-coupling");
        if let Some(eps) = inputs.eps {
            if eps <= 0.0 {
                return Err(Error::Parameter(format!("eps = {eps} must be positive")));
            }
            report.push(
                "coupling_correction",
                w2 * w2 / (eps * eps),
                BoundKind::Upper,
                "wasserstein-coupling",
            );
        }
    }
    Ok(report)
}
