//! Cross-module invariants, mostly property-based.

use proptest::prelude::*;
use randhull_core::bounds;
use randhull_core::dist::DistributionSpec;
use randhull_core::estimate;
use randhull_core::geom::{self, PointSet, WeightedMeasure};
use randhull_core::RngStream;

fn finite_coord() -> impl Strategy<Value = f64> {
    (-100i32..=100).prop_map(|v| v as f64 / 10.0)
}

fn point_set(dim: usize, max_n: usize) -> impl Strategy<Value = PointSet> {
    proptest::collection::vec(finite_coord(), dim..=dim * max_n).prop_map(move |mut flat| {
        flat.truncate(flat.len() / dim * dim);
        PointSet::from_flat(dim, flat).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// A positive membership verdict at eps = 0 certifies itself: the
    /// witness weights are nonnegative, normalized, and reproduce theta.
    #[test]
    fn witness_soundness(points in point_set(2, 6), tx in finite_coord(), ty in finite_coord()) {
        let theta = [tx, ty];
        let c = geom::hull_contains(&points, &theta, 0.0, 1e-9).unwrap();
        if c.contained {
            let w = c.witness.unwrap();
            let sum: f64 = w.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12 + 1e-12);
            let mut recon = [0.0, 0.0];
            for (i, &wi) in w.iter().enumerate() {
                prop_assert!(wi >= -1e-12);
                recon[0] += wi * points.point(i)[0];
                recon[1] += wi * points.point(i)[1];
            }
            prop_assert!((recon[0] - theta[0]).abs() <= 1e-8);
            prop_assert!((recon[1] - theta[1]).abs() <= 1e-8);
        }
    }

    /// Containment is monotone in the relaxation radius.
    #[test]
    fn monotone_in_epsilon(
        points in point_set(2, 6),
        tx in finite_coord(),
        ty in finite_coord(),
        e1 in 0.0f64..2.0,
        e2 in 0.0f64..2.0,
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let theta = [tx, ty];
        let at_lo = geom::hull_contains(&points, &theta, lo, 1e-9).unwrap().contained;
        let at_hi = geom::hull_contains(&points, &theta, hi, 1e-9).unwrap().contained;
        prop_assert!(!at_lo || at_hi, "contained at eps={lo} but not at eps={hi}");
    }

    /// Adding a point never shrinks the hull.
    #[test]
    fn monotone_in_points(
        points in point_set(2, 5),
        extra_x in finite_coord(),
        extra_y in finite_coord(),
        tx in finite_coord(),
        ty in finite_coord(),
    ) {
        let theta = [tx, ty];
        let before = geom::hull_contains(&points, &theta, 0.0, 1e-9).unwrap().contained;
        let mut flat = points.as_flat().to_vec();
        flat.push(extra_x);
        flat.push(extra_y);
        let bigger = PointSet::from_flat(2, flat).unwrap();
        let after = geom::hull_contains(&bigger, &theta, 0.0, 1e-9).unwrap().contained;
        prop_assert!(!before || after);
    }

    /// Caratheodory reduction preserves the first moment and never grows
    /// the support.
    #[test]
    fn caratheodory_preserves_mean(points in point_set(2, 10), raw in proptest::collection::vec(0.01f64..1.0, 20)) {
        let n = points.len();
        let mut weights: Vec<f64> = raw.iter().cycle().take(n).copied().collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let m = WeightedMeasure::new(points, weights).unwrap();
        let before = m.mean();
        let r = geom::caratheodory_reduce(&m, 1e-9).unwrap();
        prop_assert!(r.len() <= 3);
        prop_assert!(r.len() <= m.len());
        let after = r.mean();
        prop_assert!((before[0] - after[0]).abs() <= 1e-9);
        prop_assert!((before[1] - after[1]).abs() <= 1e-9);
    }

    /// The sweep depth never exceeds the mass fraction of any halfplane
    /// and is zero outside the hull.
    #[test]
    fn sweep_depth_bounds(points in point_set(2, 12), tx in finite_coord(), ty in finite_coord()) {
        let theta = [tx, ty];
        let m = WeightedMeasure::uniform(points.clone());
        let depth = estimate::empirical_tukey_2d(&m, &theta).unwrap();
        prop_assert!((0.0..=1.0).contains(&depth));
        let inside = geom::hull_contains(&points, &theta, 0.0, 1e-9).unwrap().contained;
        if !inside {
            prop_assert!(depth <= 1e-12, "depth {depth} positive outside the hull");
        }
    }
}

/// Wherever an exact containment probability exists, a Monte Carlo
/// estimate lands within its own four-sigma interval.
#[test]
fn exact_p_matches_monte_carlo() {
    let stream = RngStream::new(2024, 0);
    let trials = 100_000u64;

    let cases: Vec<(DistributionSpec, Vec<u64>)> = vec![
        (DistributionSpec::gaussian(1).unwrap(), vec![2, 3, 5]),
        (DistributionSpec::gaussian(2).unwrap(), vec![3, 4, 6]),
        (DistributionSpec::gaussian(3).unwrap(), vec![4, 6, 9]),
        (DistributionSpec::two_point(0.1).unwrap(), vec![2, 3, 7]),
        (DistributionSpec::two_point(0.3).unwrap(), vec![2, 3, 7]),
        (DistributionSpec::spiked_box(2, 0.2).unwrap(), vec![3]),
    ];
    for (spec, ns) in cases {
        let theta = vec![0.0; spec.dim()];
        let prof =
            estimate::estimate_p_profile(&spec, &theta, 0.0, &ns, trials, &stream).unwrap();
        for (est, &n) in prof.estimates.iter().zip(&ns) {
            let exact = spec.exact_p(n, &theta).unwrap();
            let slack = 4.0 * est.stderr.max(1e-6);
            assert!(
                (est.value - exact).abs() <= slack,
                "{spec} at n={n}: estimate {} vs exact {exact}",
                est.value
            );
        }
    }
}

/// The depth estimator is an upper-bound estimator: it never reports a
/// value significantly below an available exact depth.
#[test]
fn tukey_estimates_respect_exact_oracles() {
    let stream = RngStream::new(2025, 0);
    let cases: Vec<DistributionSpec> = vec![
        DistributionSpec::gaussian(2).unwrap(),
        DistributionSpec::gaussian(3).unwrap(),
        DistributionSpec::two_point(0.2).unwrap(),
        DistributionSpec::spiked_box(2, 0.2).unwrap(),
    ];
    for spec in cases {
        let theta = vec![0.0; spec.dim()];
        let exact = spec.exact_tukey(&theta, 0.0).unwrap();
        let r = estimate::estimate_tukey_mc(&spec, &theta, 0.0, 1024, 20_000, &stream).unwrap();
        assert!(
            r.estimate.value >= exact - 4.0 * r.estimate.stderr,
            "{spec}: estimate {} significantly below exact {exact}",
            r.estimate.value
        );
        assert!(
            r.estimate.value <= exact + 4.0 * r.estimate.stderr.max(0.005),
            "{spec}: estimate {} far above exact {exact} (not an infimum?)",
            r.estimate.value
        );
    }
}

/// Monte Carlo containment estimates stay below the symmetric-position
/// ceiling and inside the ratio sandwich built from a coupled estimate.
#[test]
fn gaussian_profile_obeys_closed_form_bounds() {
    let stream = RngStream::new(2026, 0);
    let spec = DistributionSpec::gaussian(2).unwrap();
    let ns: Vec<u64> = (3..=10).collect();
    let prof =
        estimate::estimate_p_profile(&spec, &[0.0, 0.0], 0.0, &ns, 100_000, &stream).unwrap();
    for (est, &n) in prof.estimates.iter().zip(&ns) {
        let ceiling = bounds::wendel_exact(n, 2);
        assert!(est.value <= ceiling + 4.0 * est.stderr, "n={n}");
    }
    // Ratio sandwich from the coupled p_3 estimate.
    let p3 = prof.estimates[0].value;
    let se3 = prof.estimates[0].stderr;
    for (i, &n) in ns.iter().enumerate().skip(1) {
        let report = bounds::sandwich_bounds(p3, 3, n, 2).unwrap();
        let lower = report.get("ratio_lower").unwrap();
        let upper = report.get("ratio_upper").unwrap();
        let est = &prof.estimates[i];
        let slack = 4.0 * (est.stderr + se3 * upper.max(1.0));
        assert!(est.value >= lower - slack, "n={n}: {} below {lower}", est.value);
        assert!(est.value <= upper + slack, "n={n}: {} above {upper}", est.value);
    }
}

/// Smoothing convergence: containment of the smoothed spec approaches the
/// unsmoothed value as the radius shrinks (coupled streams).
#[test]
fn smoothing_converges_to_base() {
    let stream = RngStream::new(2027, 0);
    let spec = DistributionSpec::two_point(0.3).unwrap();
    let exact = spec.exact_p(3, &[0.0]).unwrap();
    let trials = 60_000u64;
    let mut prev_gap = f64::INFINITY;
    for &delta in &[0.2, 0.05, 0.01] {
        let smoothed = spec.smooth(delta).unwrap();
        let prof =
            estimate::estimate_p_profile(&smoothed, &[0.0], 0.0, &[3], trials, &stream).unwrap();
        let est = &prof.estimates[0];
        let gap = (est.value - exact).abs();
        assert!(
            gap <= prev_gap + 4.0 * est.stderr,
            "gap {gap} grew past {prev_gap} at delta={delta}"
        );
        prev_gap = gap;
        if delta == 0.01 {
            assert!(gap <= 4.0 * est.stderr.max(1e-4), "delta=0.01 gap {gap}");
        }
    }
}

/// Threshold brackets from depth alone contain the measured bracket.
#[test]
fn depth_sandwich_contains_measured_threshold() {
    let stream = RngStream::new(2028, 0);
    let cases: Vec<(DistributionSpec, f64)> = vec![
        (DistributionSpec::gaussian(2).unwrap(), 0.5),
        (DistributionSpec::two_point(0.2).unwrap(), 0.2),
        (DistributionSpec::spiked_box(2, 0.2).unwrap(), 0.2),
    ];
    for (spec, alpha) in cases {
        let d = spec.dim() as u64;
        let theta = vec![0.0; spec.dim()];
        let report = bounds::nx_depth_bounds(alpha, d).unwrap();
        let lo = report.get("n_lower").unwrap() as u64;
        let hi = report.get("n_upper").unwrap() as u64;
        let bracket = estimate::estimate_n(&spec, &theta, 0.95, &stream).unwrap();
        assert!(
            lo <= bracket.lower && bracket.upper <= hi,
            "{spec}: measured [{}, {}] outside closed-form [{lo}, {hi}]",
            bracket.lower,
            bracket.upper
        );
    }
}

/// Identical seeds and stream ids reproduce bit-identical samples across
/// logically distinct stream objects.
#[test]
fn reproducibility_bit_exact() {
    for spec in [
        DistributionSpec::gaussian(3).unwrap(),
        DistributionSpec::trig(2).unwrap(),
        DistributionSpec::spiked_box(3, 0.1).unwrap(),
    ] {
        let a = spec.sample(1000, &mut RngStream::new(7, 9)).unwrap();
        let b = spec.sample(1000, &mut RngStream::new(7, 9)).unwrap();
        assert_eq!(a.as_flat(), b.as_flat());
    }
}
