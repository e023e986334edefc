//! Reproduction suites: canned experiments with embedded pass/fail
//! verdicts, one table set per suite.

use std::collections::BTreeMap;

use randhull_core::bounds;
use randhull_core::cubature::{self, CubatureStatus, NaiveMode};
use randhull_core::dist::DistributionSpec;
use randhull_core::estimate::{self, FirstHitCounts, ProfileCounts};
use randhull_core::interior;
use randhull_core::math;
use randhull_core::RngStream;

use crate::output::{Cell, Table};
use crate::parallel;

pub const SUITES: &[&str] = &[
    "wendel-table",
    "two-point",
    "gauss-nx",
    "sandwich",
    "g-grid",
    "interior-gauss",
    "cubature-trig",
    "be-table",
];

type Options = BTreeMap<String, serde_json::Value>;

fn opt_u64(options: &Options, key: &str, default: u64) -> u64 {
    options.get(key).and_then(|v| v.as_u64()).unwrap_or(default)
}

fn opt_f64(options: &Options, key: &str, default: f64) -> f64 {
    options.get(key).and_then(|v| v.as_f64()).unwrap_or(default)
}

/// Fill a suite's option map with its defaults so the emitted manifest
/// pins the run completely.
pub fn normalize_options(suite: &str, options: &mut Options) -> Result<(), String> {
    let defaults: &[(&str, serde_json::Value)] = match suite {
        "wendel-table" => &[("dmax", serde_json::json!(3)), ("trials", serde_json::json!(100_000))],
        "two-point" => &[("epsilon", serde_json::json!(0.1)), ("trials", serde_json::json!(100_000))],
        "gauss-nx" => &[
            ("d", serde_json::json!(2)),
            ("trials", serde_json::json!(20_000)),
            ("cap", serde_json::json!(400)),
        ],
        "sandwich" => &[("trials", serde_json::json!(100_000))],
        "g-grid" => &[],
        "interior-gauss" => &[
            ("alpha", serde_json::json!(0.3)),
            ("epsilon", serde_json::json!(0.5)),
            ("delta", serde_json::json!(0.5)),
            ("trials", serde_json::json!(200)),
        ],
        "cubature-trig" => &[
            ("d", serde_json::json!(3)),
            ("ell", serde_json::json!(6)),
            ("runs", serde_json::json!(1000)),
        ],
        "be-table" => &[("dmax", serde_json::json!(3))],
        other => return Err(format!("unknown suite `{other}` (expected one of {SUITES:?})")),
    };
    for (k, v) in defaults {
        options.entry((*k).to_string()).or_insert_with(|| v.clone());
    }
    Ok(())
}

pub fn run_suite(
    suite: &str,
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    match suite {
        "wendel-table" => wendel_table(options, seed, threads),
        "two-point" => two_point(options, seed, threads),
        "gauss-nx" => gauss_nx(options, seed, threads),
        "sandwich" => sandwich(options, seed, threads),
        "g-grid" => Ok(g_grid()),
        "interior-gauss" => interior_gauss(options, seed, threads),
        "cubature-trig" => cubature_trig(options, seed, threads),
        "be-table" => be_table(options, seed),
        other => Err(randhull_core::Error::Parameter(format!("unknown suite `{other}`"))),
    }
}

fn parallel_profile(
    spec: &DistributionSpec,
    theta: &[f64],
    epsilon: f64,
    ns: &[u64],
    trials: u64,
    threads: usize,
    stream: &RngStream,
) -> Result<ProfileCounts, randhull_core::Error> {
    let parts = parallel::map_trials(trials, threads, |range| {
        estimate::profile_counts(spec, theta, epsilon, ns, range, stream)
    });
    let mut acc: Option<ProfileCounts> = None;
    for part in parts {
        let part = part?;
        acc = Some(match acc {
            None => part,
            Some(a) => a.merge(&part)?,
        });
    }
    Ok(acc.expect("at least one trial chunk"))
}

/// Monte Carlo containment vs the symmetric-position formula on the grid
/// d <= dmax, n in d+1 ..= 3d.
fn wendel_table(
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let dmax = opt_u64(options, "dmax", 3);
    let trials = opt_u64(options, "trials", 100_000);
    let mut table = Table::new("wendel", &["d", "n", "exact", "estimate", "stderr", "pass"]);
    for d in 1..=dmax {
        let spec = DistributionSpec::gaussian(d as usize)?;
        let theta = vec![0.0; d as usize];
        let ns: Vec<u64> = (d + 1..=3 * d).collect();
        let stream = RngStream::new(seed, 0x7e0 + d);
        let counts = parallel_profile(&spec, &theta, 0.0, &ns, trials, threads, &stream)?;
        let prof = counts.finalize(seed);
        for (est, &n) in prof.estimates.iter().zip(&ns) {
            let exact = bounds::wendel_exact(n, d);
            let pass = (est.value - exact).abs() <= 4.0 * est.stderr.max(1e-9);
            table.push(vec![
                Cell::UInt(d),
                Cell::UInt(n),
                Cell::Float(exact),
                Cell::Float(est.value),
                Cell::Float(est.stderr),
                Cell::Bool(pass),
            ]);
        }
    }
    Ok(vec![table])
}

/// Exact-vs-Monte-Carlo for the two-point family, plus the threshold
/// bracket against the closed-form threshold.
fn two_point(
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let eps = opt_f64(options, "epsilon", 0.1);
    let trials = opt_u64(options, "trials", 100_000);
    let spec = DistributionSpec::two_point(eps)?;
    let ns: Vec<u64> = (1..=12).collect();
    let stream = RngStream::new(seed, 0x2b0);
    let counts = parallel_profile(&spec, &[0.0], 0.0, &ns, trials, threads, &stream)?;
    let prof = counts.finalize(seed);
    let mut table = Table::new("two_point", &["n", "exact", "estimate", "stderr", "pass"]);
    for (est, &n) in prof.estimates.iter().zip(&ns) {
        let exact = spec.exact_p(n, &[0.0]).unwrap();
        let pass = (est.value - exact).abs() <= 4.0 * est.stderr.max(1e-9);
        table.push(vec![
            Cell::UInt(n),
            Cell::Float(exact),
            Cell::Float(est.value),
            Cell::Float(est.stderr),
            Cell::Bool(pass),
        ]);
    }

    // Closed-form threshold: smallest n with the formula at least 1/2.
    let p = |n: u64| 1.0 - math::powf(eps, n as f64) - math::powf(1.0 - eps, n as f64);
    let mut truth = 1u64;
    while p(truth) < 0.5 {
        truth += 1;
    }
    let bracket = estimate::estimate_n(&spec, &[0.0], 0.95, &RngStream::new(seed, 0x2b1))?;
    let mut nx = Table::new(
        "two_point_threshold",
        &["epsilon", "closed_form_n", "bracket_lower", "bracket_upper", "widened", "pass"],
    );
    nx.push(vec![
        Cell::Float(eps),
        Cell::UInt(truth),
        Cell::UInt(bracket.lower),
        Cell::UInt(bracket.upper),
        Cell::Bool(bracket.widened),
        Cell::Bool(bracket.lower <= truth && truth <= bracket.upper),
    ]);
    Ok(vec![table, nx])
}

/// Threshold bracket for the gaussian; the truth is 2d.
fn gauss_nx(
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let d = opt_u64(options, "d", 2);
    let trials = opt_u64(options, "trials", 20_000);
    let cap = opt_u64(options, "cap", 400);
    let spec = DistributionSpec::gaussian(d as usize)?;
    let theta = vec![0.0; d as usize];
    let bracket = estimate::estimate_n(&spec, &theta, 0.95, &RngStream::new(seed, 0x9a0))?;

    let fh_stream = RngStream::new(seed, 0x9a1);
    let parts = parallel::map_trials(trials, threads, |range| {
        estimate::first_hit_counts(&spec, &theta, cap, range, &fh_stream)
    });
    let mut acc = FirstHitCounts::default();
    for part in parts {
        acc = acc.merge(&part?);
    }
    let fh = acc.finalize(cap, seed);

    let truth = 2 * d;
    let mut table = Table::new(
        "gauss_threshold",
        &[
            "d",
            "truth",
            "bracket_lower",
            "bracket_upper",
            "first_hit_mean",
            "first_hit_stderr",
            "pass",
        ],
    );
    table.push(vec![
        Cell::UInt(d),
        Cell::UInt(truth),
        Cell::UInt(bracket.lower),
        Cell::UInt(bracket.upper),
        Cell::Float(fh.estimate.value),
        Cell::Float(fh.estimate.stderr),
        Cell::Bool(bracket.lower <= truth && truth <= bracket.upper),
    ]);
    Ok(vec![table])
}

/// Coupled ratio sandwich at (m, n) = (3, 6) for the planar gaussian.
fn sandwich(
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let trials = opt_u64(options, "trials", 100_000);
    let spec = DistributionSpec::gaussian(2)?;
    let ns = [3u64, 6];
    let stream = RngStream::new(seed, 0x5a0);
    let counts = parallel_profile(&spec, &[0.0, 0.0], 0.0, &ns, trials, threads, &stream)?;
    let prof = counts.finalize(seed);
    let (p3, se3) = (prof.estimates[0].value, prof.estimates[0].stderr);
    let (p6, se6) = (prof.estimates[1].value, prof.estimates[1].stderr);
    let report = bounds::sandwich_bounds(p3, 3, 6, 2)?;
    let lower = report.get("ratio_lower").unwrap();
    let upper = report.get("ratio_upper").unwrap();
    let coef = 20.0; // C(6,3)/C(3,3)
    let pass = p6 >= lower - 4.0 * (se6 + coef / 8.0 * se3)
        && p6 <= (upper + 4.0 * (se6 + coef * se3)).min(1.0 + 4.0 * se6);
    let mut table = Table::new(
        "ratio_sandwich",
        &["m", "n", "p_m", "p_n", "ratio_lower", "ratio_upper", "pass"],
    );
    table.push(vec![
        Cell::UInt(3),
        Cell::UInt(6),
        Cell::Float(p3),
        Cell::Float(p6),
        Cell::Float(lower),
        Cell::Float(upper),
        Cell::Bool(pass),
    ]);
    Ok(vec![table])
}

/// Pure-arithmetic grid checks of the depth recursion: the closed form
/// dominates it, and at n = ceil(3d/alpha) it beats 2^{-d}.
fn g_grid() -> Vec<Table> {
    let mut table = Table::new(
        "g_grid",
        &["alpha", "d", "max_excess", "g_at_threshold", "two_pow_neg_d", "pass"],
    );
    for ai in 1..=9u32 {
        let alpha = ai as f64 / 10.0;
        for d in 1..=10u64 {
            let mut max_excess = f64::NEG_INFINITY;
            for n in d..=(50 * d) {
                let r = bounds::g_bounds(d, n, alpha).unwrap();
                let g = r.get("g_recursion").unwrap();
                if let Some(cf) = r.get("closed_form") {
                    max_excess = max_excess.max(g - cf.min(1.0));
                }
            }
            let n_threshold = math::ceil(3.0 * d as f64 / alpha) as u64;
            let g_threshold = bounds::g_recursion(d, n_threshold, alpha);
            let floor = math::powi(2.0, -(d as i32));
            let pass = max_excess <= 1e-12 && g_threshold < floor;
            table.push(vec![
                Cell::Float(alpha),
                Cell::UInt(d),
                Cell::Float(max_excess),
                Cell::Float(g_threshold),
                Cell::Float(floor),
                Cell::Bool(pass),
            ]);
        }
    }
    vec![table]
}

/// Interior-body inclusion for the planar gaussian at the theorem's own
/// sample size.
fn interior_gauss(
    options: &Options,
    seed: u64,
    threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let alpha = opt_f64(options, "alpha", 0.3);
    let eps = opt_f64(options, "epsilon", 0.5);
    let delta = opt_f64(options, "delta", 0.5);
    let trials = opt_u64(options, "trials", 200);
    let spec = DistributionSpec::gaussian(2)?;
    let stream = RngStream::new(seed, 0x1e0);
    let (net, theorem_n) = interior::inclusion_setup(&spec, alpha, eps, delta, &stream)?;
    let parts = parallel::map_trials(trials, threads, |range| {
        interior::inclusion_counts(&spec, net.as_ref(), theorem_n, range, &stream)
    });
    let mut successes = 0u64;
    for part in parts {
        successes += part?;
    }
    let freq = successes as f64 / trials as f64;
    let stderr = math::sqrt(freq * (1.0 - freq) / trials as f64);
    let pass = freq >= (1.0 - delta) - 4.0 * stderr;
    let mut table = Table::new(
        "interior_inclusion",
        &[
            "alpha",
            "epsilon",
            "delta",
            "n",
            "net_size",
            "trials",
            "success_frequency",
            "stderr",
            "pass",
        ],
    );
    table.push(vec![
        Cell::Float(alpha),
        Cell::Float(eps),
        Cell::Float(delta),
        Cell::UInt(theorem_n),
        Cell::UInt(net.as_ref().map_or(0, |n| n.len()) as u64),
        Cell::UInt(trials),
        Cell::Float(freq),
        Cell::Float(stderr),
        Cell::Bool(pass),
    ]);
    Ok(vec![table])
}

/// Cubature on the trigonometric spec plus the rejection-scheme tally on
/// the planar gaussian.
fn cubature_trig(
    options: &Options,
    seed: u64,
    _threads: usize,
) -> Result<Vec<Table>, randhull_core::Error> {
    let d = opt_u64(options, "d", 3) as usize;
    let ell = opt_u64(options, "ell", 6);
    let runs = opt_u64(options, "runs", 1000);

    let spec = DistributionSpec::trig(d)?;
    let target = vec![0.0; d];
    let mut stream = RngStream::new(seed, 0xcb0);
    let result = cubature::run_algorithm1(&spec, ell, &target, 40, 1e-9, &mut stream)?;
    let check = cubature::verify_cubature(&result, &target, 1e-8);
    let moments = spec.moment_stats(1000, &mut RngStream::new(seed, 0xcb1))?;
    let bound = bounds::nx_moment_bounds(d as u64, &moments)?
        .get("n_upper_bounded")
        .unwrap();
    let support = result.reduced.as_ref().map_or(0, |m| m.len());
    let pass = result.status == CubatureStatus::Success
        && support <= d + 1
        && result.residual <= 1e-8
        && check.pass;
    let mut table = Table::new(
        "cubature_trig",
        &["d", "ell", "k", "samples", "support", "residual", "n_upper_bounded", "pass"],
    );
    table.push(vec![
        Cell::UInt(d as u64),
        Cell::UInt(ell),
        Cell::UInt(result.k as u64),
        Cell::UInt(result.samples_drawn),
        Cell::UInt(support as u64),
        Cell::Float(result.residual),
        Cell::Float(bound),
        Cell::Bool(pass),
    ]);

    // Rejection scheme (b) on the planar gaussian: the round count is
    // geometric with success probability 1/2.
    let g2 = DistributionSpec::gaussian(2)?;
    let mut s = RngStream::new(seed, 0xcb2);
    let mut total = 0u64;
    for _ in 0..runs {
        let r = cubature::naive_scheme(&g2, NaiveMode::B, &[0.0, 0.0], 100_000, &mut s)?;
        total += r.iterations;
    }
    let mean = total as f64 / runs as f64;
    let se = math::sqrt(2.0 / runs as f64);
    let pass_b = (mean - 2.0).abs() <= 4.0 * se;
    let mut nb = Table::new(
        "scheme_b_gaussian2",
        &["runs", "mean_iterations", "expected", "stderr", "pass"],
    );
    nb.push(vec![
        Cell::UInt(runs),
        Cell::Float(mean),
        Cell::Float(2.0),
        Cell::Float(se),
        Cell::Bool(pass_b),
    ]);
    Ok(vec![table, nb])
}

/// Moment-based threshold bounds vs measured brackets for the gaussian and
/// trigonometric specs.
fn be_table(options: &Options, seed: u64) -> Result<Vec<Table>, randhull_core::Error> {
    let dmax = opt_u64(options, "dmax", 3);
    let mut table = Table::new(
        "moment_bounds",
        &["d", "spec", "bound_name", "bound", "bracket_lower", "bracket_upper", "pass"],
    );
    for d in 1..=dmax {
        let gauss = DistributionSpec::gaussian(d as usize)?;
        let theta = vec![0.0; d as usize];
        let moments = gauss.moment_stats(1000, &mut RngStream::new(seed, 0xbe0 + d))?;
        let bound = bounds::nx_moment_bounds(d, &moments)?
            .get("n_upper_directional")
            .unwrap();
        let bracket = estimate::estimate_n(&gauss, &theta, 0.95, &RngStream::new(seed, 0xbe4 + d))?;
        table.push(vec![
            Cell::UInt(d),
            Cell::Str("gaussian".into()),
            Cell::Str("n_upper_directional".into()),
            Cell::Float(bound),
            Cell::UInt(bracket.lower),
            Cell::UInt(bracket.upper),
            Cell::Bool((bracket.upper as f64) <= bound),
        ]);

        let trig = DistributionSpec::trig(d as usize)?;
        let moments = trig.moment_stats(1000, &mut RngStream::new(seed, 0xbe8 + d))?;
        let bound = bounds::nx_moment_bounds(d, &moments)?
            .get("n_upper_bounded")
            .unwrap();
        let bracket = estimate::estimate_n(&trig, &theta, 0.95, &RngStream::new(seed, 0xbec + d))?;
        table.push(vec![
            Cell::UInt(d),
            Cell::Str("trig".into()),
            Cell::Str("n_upper_bounded".into()),
            Cell::Float(bound),
            Cell::UInt(bracket.lower),
            Cell::UInt(bracket.upper),
            Cell::Bool((bracket.upper as f64) <= bound),
        ]);
    }
    Ok(vec![table])
}
