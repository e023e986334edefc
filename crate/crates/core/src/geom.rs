//! Convex geometry kernel: min-norm point over a hull, membership with a
//! certifying witness, Caratheodory reduction, epsilon-nets, whitening.
//!
//! One solver serves every caller: the distance from a point to a convex
//! hull is computed by Wolfe's min-norm-point iteration, and both exact and
//! epsilon-relaxed membership queries reduce to it. All operations are pure
//! functions of their inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math;
use crate::rng::RngStream;

/// Default tolerance for geometric distances.
pub const GEOM_TOL: f64 = 1e-9;
/// Default tolerance for convex weights.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Boundary probes per dimension used by the epsilon-net construction.
pub const NET_PROBES_PER_DIM: usize = 4096;

/// An ordered list of `n` points in `dim`-dimensional space, stored flat.
///
/// All coordinates are finite and every point shares the dimension; the
/// empty set is rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    /// Build from a flat row-major buffer of `n * dim` coordinates.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(String::from("dimension must be positive")));
        }
        if data.is_empty() {
            return Err(Error::InvalidInput(String::from("empty point set")));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "buffer length {} is not a multiple of dim {dim}",
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(String::from("non-finite coordinate")));
        }
        Ok(PointSet { dim, data })
    }

    pub fn from_points(points: &[&[f64]]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput(String::from("empty point set")));
        }
        let dim = points[0].len();
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimMismatch { expected: dim, got: p.len() });
            }
            data.extend_from_slice(p);
        }
        PointSet::from_flat(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Coordinate-wise mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for p in self.iter() {
            for (o, &x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
        let n = self.len() as f64;
        for o in out.iter_mut() {
            *o /= n;
        }
        out
    }
}

/// Outcome of the min-norm-point solver.
///
/// `point` is the nearest point of the hull to the origin, `coefficients`
/// are certifying convex weights over the input points, and `distance`
/// equals the norm of `point`.
#[derive(Debug, Clone)]
pub struct MinNormResult {
    pub point: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub distance: f64,
    pub iterations: usize,
}

/// Membership verdict with an optional certifying witness.
#[derive(Debug, Clone)]
pub struct Containment {
    pub contained: bool,
    /// Distance from the query point to the hull, up to the solver tolerance.
    pub distance: f64,
    /// Convex weights reproducing the nearest point; present when contained.
    pub witness: Option<Vec<f64>>,
}

/// A discrete probability measure: support points plus convex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    support: PointSet,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(support: PointSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != support.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} support points",
                weights.len(),
                support.len()
            )));
        }
        let mut sum = math::KahanSum::new();
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInput(format!("weight {w} is negative or non-finite")));
            }
            sum.add(w);
        }
        if math::abs(sum.value() - 1.0) > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {} (expected 1)",
                sum.value()
            )));
        }
        Ok(WeightedMeasure { support, weights })
    }

    /// Uniform weights over the given support.
    pub fn uniform(support: PointSet) -> Self {
        let n = support.len();
        let w = 1.0 / n as f64;
        WeightedMeasure { support, weights: vec![w; n] }
    }

    pub fn support(&self) -> &PointSet {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    /// Weighted mean of the support.
    pub fn mean(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut acc = vec![math::KahanSum::new(); dim];
        for (p, &w) in self.support.iter().zip(&self.weights) {
            for (a, &x) in acc.iter_mut().zip(p) {
                a.add(w * x);
            }
        }
        acc.into_iter().map(|a| a.value()).collect()
    }
}

/// Second-moment data of a distribution: covariance, its inverse square
/// root, and optional higher-moment handles.
#[derive(Debug, Clone)]
pub struct MomentData {
    /// Covariance matrix `V` (about the mean).
    pub covariance: Matrix,
    /// Symmetric positive-definite `V^{-1/2}`.
    pub whitener: Matrix,
    /// Supremum over unit directions of the third absolute moment of
    /// whitened projections; at least 1 whenever present.
    pub rho3: Option<f64>,
    /// Almost-sure bound on the Euclidean norm of the whitened vector.
    pub norm_bound: Option<f64>,
    /// `E ||V^{-1/2} X||^3`, when a closed form exists.
    pub norm_moment3: Option<f64>,
    /// `E ||V^{-1/2} X||^4`, when a closed form exists.
    pub norm_moment4: Option<f64>,
    pub provenance: MomentProvenance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentProvenance {
    Analytic,
    MonteCarlo { trials: u64, rho3_stderr: Option<f64> },
}

// ---------------------------------------------------------------------------
// Min-norm point (Wolfe's algorithm)
// ---------------------------------------------------------------------------

struct Corral {
    /// Indices into the input point set, in insertion order.
    members: Vec<usize>,
    /// Convex weights over `members`, same order.
    weights: Vec<f64>,
}

/// Affine minimizer of the norm over the affine hull of the corral members:
/// solve the bordered system [G 1; 1' 0] [w; mu] = [0; 1] with G the Gram
/// matrix of the members.
fn affine_minimizer(dim: usize, flat: &[f64], members: &[usize]) -> Result<Vec<f64>> {
    let m = members.len();
    let mut sys = Matrix::zeros(m + 1, m + 1);
    for a in 0..m {
        let pa = &flat[members[a] * dim..(members[a] + 1) * dim];
        for b in a..m {
            let pb = &flat[members[b] * dim..(members[b] + 1) * dim];
            let g = math::dot(pa, pb);
            sys.set(a, b, g);
            sys.set(b, a, g);
        }
        sys.set(a, m, 1.0);
        sys.set(m, a, 1.0);
    }
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    let sol = linalg::solve(sys, rhs)?;
    Ok(sol[..m].to_vec())
}

fn combine(dim: usize, flat: &[f64], members: &[usize], weights: &[f64], out: &mut [f64]) {
    for o in out.iter_mut() {
        *o = 0.0;
    }
    for (&idx, &w) in members.iter().zip(weights) {
        let p = &flat[idx * dim..(idx + 1) * dim];
        for (o, &x) in out.iter_mut().zip(p) {
            *o += w * x;
        }
    }
}

/// Min-norm point over the convex hull of a raw coordinate buffer; shared
/// by the public entry points so estimators can evaluate sample prefixes
/// without copying.
pub(crate) fn min_norm_point_flat(dim: usize, flat: &[f64], tol: f64) -> Result<MinNormResult> {
    if tol <= 0.0 {
        return Err(Error::Parameter(format!("tol must be positive, got {tol}")));
    }
    if flat.is_empty() || dim == 0 {
        return Err(Error::InvalidInput(String::from("empty point set")));
    }
    if !flat.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput(String::from("non-finite coordinate")));
    }
    let n = flat.len() / dim;
    let iter_cap = 100 * n * dim;

    // Start from the point of smallest norm (ties to the lowest index).
    let mut start = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let nn = math::norm(&flat[i * dim..(i + 1) * dim]);
        if nn < best {
            best = nn;
            start = i;
        }
    }
    let mut corral = Corral { members: vec![start], weights: vec![1.0] };
    let mut x = flat[start * dim..(start + 1) * dim].to_vec();
    let mut iterations = 0usize;

    loop {
        let xnorm = math::norm(&x);
        if xnorm <= tol {
            // Origin reached: distance is certified zero.
            break;
        }
        // Entering point: smallest inner product with x, ties to the
        // lowest index.
        let mut enter = usize::MAX;
        let mut enter_ip = f64::INFINITY;
        for i in 0..n {
            let ip = math::dot(&x, &flat[i * dim..(i + 1) * dim]);
            if ip < enter_ip - 0.0 {
                enter_ip = ip;
                enter = i;
            }
        }
        // Duality gap: ||x|| - min_i <x/||x||, p_i> bounds the distance
        // error from both sides.
        let lower = enter_ip / xnorm;
        if xnorm - lower <= tol {
            break;
        }
        iterations += 1;
        if iterations > iter_cap {
            return Err(Error::Convergence { iterations, best: xnorm });
        }
        if !corral.members.contains(&enter) {
            corral.members.push(enter);
            corral.weights.push(0.0);
        }

        // Inner loop: move to the affine minimizer, projecting back onto
        // the simplex face when coordinates go negative.
        loop {
            let aff = match affine_minimizer(dim, flat, &corral.members) {
                Ok(a) => a,
                Err(_) => {
                    // Degenerate corral (affinely dependent, e.g. duplicate
                    // points): drop the member with the smallest weight and
                    // retry.
                    if corral.members.len() <= 1 {
                        break;
                    }
                    let mut drop = 0;
                    let mut wmin = f64::INFINITY;
                    for (j, &w) in corral.weights.iter().enumerate() {
                        if w < wmin {
                            wmin = w;
                            drop = j;
                        }
                    }
                    corral.members.remove(drop);
                    corral.weights.remove(drop);
                    continue;
                }
            };
            if aff.iter().all(|&w| w > WEIGHT_TOL) {
                corral.weights = aff;
                combine(dim, flat, &corral.members, &corral.weights, &mut x);
                break;
            }
            // Line search from the current weights toward the affine
            // minimizer, stopping at the first vanishing coordinate
            // (smallest step, ties to the lowest index).
            let mut theta = 1.0;
            let mut leave = usize::MAX;
            for j in 0..corral.weights.len() {
                let delta = corral.weights[j] - aff[j];
                if aff[j] <= WEIGHT_TOL && delta > 0.0 {
                    let t = corral.weights[j] / delta;
                    if t < theta {
                        theta = t;
                        leave = j;
                    }
                }
            }
            if leave == usize::MAX {
                corral.weights = aff;
                combine(dim, flat, &corral.members, &corral.weights, &mut x);
                break;
            }
            for j in 0..corral.weights.len() {
                corral.weights[j] = (1.0 - theta) * corral.weights[j] + theta * aff[j];
            }
            corral.weights[leave] = 0.0;
            corral.members.remove(leave);
            corral.weights.remove(leave);
            // Renormalize against drift.
            let s: f64 = corral.weights.iter().sum();
            if s > 0.0 {
                for w in corral.weights.iter_mut() {
                    *w /= s;
                }
            }
            iterations += 1;
            if iterations > iter_cap {
                combine(dim, flat, &corral.members, &corral.weights, &mut x);
                return Err(Error::Convergence { iterations, best: math::norm(&x) });
            }
        }
    }

    let mut coefficients = vec![0.0; n];
    for (&idx, &w) in corral.members.iter().zip(&corral.weights) {
        coefficients[idx] += w;
    }
    combine(dim, flat, &corral.members, &corral.weights, &mut x);
    let distance = math::norm(&x);
    Ok(MinNormResult { point: x, coefficients, distance, iterations })
}

/// Nearest point of `conv(points)` to the origin, with certifying weights.
///
/// Wolfe-style active-set iteration; the returned distance is within `tol`
/// of the true hull distance and the coefficients reproduce the point.
pub fn min_norm_point(points: &PointSet, tol: f64) -> Result<MinNormResult> {
    min_norm_point_flat(points.dim(), points.as_flat(), tol)
}

/// Distance from `theta` to `conv(points)` together with the solver output,
/// by translating the points so `theta` sits at the origin.
pub(crate) fn distance_to_hull_flat(
    dim: usize,
    flat: &[f64],
    theta: &[f64],
    tol: f64,
) -> Result<MinNormResult> {
    let mut shifted = flat.to_vec();
    for p in shifted.chunks_exact_mut(dim) {
        for (x, &t) in p.iter_mut().zip(theta) {
            *x -= t;
        }
    }
    min_norm_point_flat(dim, &shifted, tol)
}

/// Fast containment test for a raw buffer; used in Monte Carlo loops.
///
/// Translates so `theta` is the origin and runs the solver with early exit:
/// accept as soon as the iterate norm drops to `epsilon + tol`, reject as
/// soon as the certified lower bound exceeds it.
pub(crate) fn contains_flat(dim: usize, flat: &[f64], theta: &[f64], epsilon: f64, tol: f64) -> bool {
    debug_assert!(epsilon >= 0.0);
    let n = flat.len() / dim;
    let threshold = epsilon + tol;
    let mut shifted = vec![0.0; flat.len()];
    for (dst, src) in shifted.chunks_exact_mut(dim).zip(flat.chunks_exact(dim)) {
        for k in 0..dim {
            dst[k] = src[k] - theta[k];
        }
    }

    // 1-d shortcut: the hull is [min, max].
    if dim == 1 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &shifted {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let distance = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        };
        return distance <= threshold;
    }

    let iter_cap = 100 * n * dim;
    let mut start = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let nn = math::norm(&shifted[i * dim..(i + 1) * dim]);
        if nn < best {
            best = nn;
            start = i;
        }
    }
    if best <= threshold {
        return true;
    }
    let mut corral = Corral { members: vec![start], weights: vec![1.0] };
    let mut x = shifted[start * dim..(start + 1) * dim].to_vec();
    let mut iterations = 0usize;

    loop {
        let xnorm = math::norm(&x);
        if xnorm <= threshold {
            return true;
        }
        let mut enter = usize::MAX;
        let mut enter_ip = f64::INFINITY;
        for i in 0..n {
            let ip = math::dot(&x, &shifted[i * dim..(i + 1) * dim]);
            if ip < enter_ip {
                enter_ip = ip;
                enter = i;
            }
        }
        let lower = enter_ip / xnorm;
        if lower > threshold {
            return false;
        }
        if xnorm - lower <= tol {
            return xnorm <= threshold;
        }
        iterations += 1;
        if iterations > iter_cap {
            return xnorm <= threshold;
        }
        if !corral.members.contains(&enter) {
            corral.members.push(enter);
            corral.weights.push(0.0);
        }
        loop {
            let aff = match affine_minimizer(dim, &shifted, &corral.members) {
                Ok(a) => a,
                Err(_) => {
                    if corral.members.len() <= 1 {
                        break;
                    }
                    let mut drop = 0;
                    let mut wmin = f64::INFINITY;
                    for (j, &w) in corral.weights.iter().enumerate() {
                        if w < wmin {
                            wmin = w;
                            drop = j;
                        }
                    }
                    corral.members.remove(drop);
                    corral.weights.remove(drop);
                    continue;
                }
            };
            if aff.iter().all(|&w| w > WEIGHT_TOL) {
                corral.weights = aff;
                combine(dim, &shifted, &corral.members, &corral.weights, &mut x);
                break;
            }
            let mut theta_step = 1.0;
            let mut leave = usize::MAX;
            for j in 0..corral.weights.len() {
                let delta = corral.weights[j] - aff[j];
                if aff[j] <= WEIGHT_TOL && delta > 0.0 {
                    let t = corral.weights[j] / delta;
                    if t < theta_step {
                        theta_step = t;
                        leave = j;
                    }
                }
            }
            if leave == usize::MAX {
                corral.weights = aff;
                combine(dim, &shifted, &corral.members, &corral.weights, &mut x);
                break;
            }
            for j in 0..corral.weights.len() {
                corral.weights[j] = (1.0 - theta_step) * corral.weights[j] + theta_step * aff[j];
            }
            corral.members.remove(leave);
            corral.weights.remove(leave);
            let s: f64 = corral.weights.iter().sum();
            if s > 0.0 {
                for w in corral.weights.iter_mut() {
                    *w /= s;
                }
            }
            iterations += 1;
            if iterations > iter_cap {
                combine(dim, &shifted, &corral.members, &corral.weights, &mut x);
                return math::norm(&x) <= threshold;
            }
        }
    }
}

/// Does the hull of `points` come within `epsilon` of `theta`?
///
/// True iff the hull distance is at most `epsilon + tol`. At `epsilon = 0`
/// the witness weights certify membership: they are nonnegative, sum to
/// one, and reproduce `theta`.
pub fn hull_contains(
    points: &PointSet,
    theta: &[f64],
    epsilon: f64,
    tol: f64,
) -> Result<Containment> {
    if theta.len() != points.dim() {
        return Err(Error::DimMismatch { expected: points.dim(), got: theta.len() });
    }
    if !theta.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput(String::from("non-finite query point")));
    }
    if epsilon < 0.0 {
        return Err(Error::Parameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let res = distance_to_hull_flat(points.dim(), points.as_flat(), theta, tol)?;
    let contained = res.distance <= epsilon + tol;
    let witness = if contained { Some(res.coefficients) } else { None };
    Ok(Containment { contained, distance: res.distance, witness })
}

// ---------------------------------------------------------------------------
// Caratheodory reduction
// ---------------------------------------------------------------------------

/// One elimination pass: find an affine dependence among the support
/// points and drive the first weight to zero along it. Returns the kept
/// indices (into the input support) with their new weights.
pub(crate) fn caratheodory_step(
    dim: usize,
    support: &PointSet,
    weights: &[f64],
) -> Result<(Vec<usize>, Vec<f64>)> {
    let m = support.len();
    // Affine dependence matrix: support coordinates stacked over a row of
    // ones, so `A nu = 0` preserves both the mean and the total mass.
    let mut a = Matrix::zeros(dim + 1, m);
    for (j, p) in support.iter().enumerate() {
        for (i, &x) in p.iter().enumerate() {
            a.set(i, j, x);
        }
        a.set(dim, j, 1.0);
    }
    let mut nu = linalg::null_vector(&a)?;
    if !nu.iter().any(|&v| v > 0.0) {
        for v in nu.iter_mut() {
            *v = -*v;
        }
    }
    // Leaving weight: first to hit zero along +nu, ties to the lowest index.
    let mut t = f64::INFINITY;
    let mut leave = usize::MAX;
    for j in 0..m {
        if nu[j] > 0.0 {
            let step = weights[j] / nu[j];
            if step < t {
                t = step;
                leave = j;
            }
        }
    }
    if leave == usize::MAX {
        return Err(Error::Reduction(String::from("null direction has no positive entry")));
    }
    let mut keep = Vec::with_capacity(m - 1);
    let mut new_weights = Vec::with_capacity(m - 1);
    for j in 0..m {
        if j == leave {
            continue;
        }
        let w = (weights[j] - t * nu[j]).max(0.0);
        keep.push(j);
        new_weights.push(w);
    }
    // Renormalize the mass lost to clamping.
    let s: f64 = new_weights.iter().sum();
    if s <= 0.0 {
        return Err(Error::Reduction(String::from("all weights vanished in elimination")));
    }
    for w in new_weights.iter_mut() {
        *w /= s;
    }
    Ok((keep, new_weights))
}

/// Reduce a discrete measure to at most `dim + 1` support points with the
/// same mean.
///
/// Repeated null-space elimination: each pass removes at least one point
/// and preserves the weighted mean exactly up to roundoff. Measures already
/// at `dim + 1` points or fewer are returned unchanged.
pub fn caratheodory_reduce(measure: &WeightedMeasure, tol: f64) -> Result<WeightedMeasure> {
    if tol <= 0.0 {
        return Err(Error::Parameter(format!("tol must be positive, got {tol}")));
    }
    let dim = measure.dim();
    if measure.len() <= dim + 1 {
        return Ok(measure.clone());
    }
    let target = measure.mean();

    let mut support = measure.support().clone();
    let mut weights = measure.weights().to_vec();
    while support.len() > dim + 1 {
        let (keep, new_weights) = caratheodory_step(dim, &support, &weights)?;
        let mut flat = Vec::with_capacity(keep.len() * dim);
        for &j in &keep {
            flat.extend_from_slice(support.point(j));
        }
        support = PointSet::from_flat(dim, flat)?;
        weights = new_weights;
    }
    let reduced = WeightedMeasure::new(support, weights)?;
    let mean = reduced.mean();
    for (a, b) in mean.iter().zip(&target) {
        if math::abs(a - b) > tol {
            return Err(Error::Reduction(format!(
                "mean drifted by {} (tol {tol})",
                math::abs(a - b)
            )));
        }
    }
    Ok(reduced)
}

// ---------------------------------------------------------------------------
// Epsilon-nets of symmetric convex bodies
// ---------------------------------------------------------------------------

/// Finite subset `A` of a symmetric convex body `K` whose hull contains
/// `(1 - epsilon) K`, built by greedy farthest-point insertion on boundary
/// probes of the gauge (Minkowski functional) of `K`.
///
/// The greedy points are pairwise more than `epsilon` apart in gauge
/// distance, so the packing bound `|A| <= (1 + 2/epsilon)^dim` holds; it is
/// asserted after construction. The cover certificate (every probe within
/// `epsilon` of the net) holds by the stopping rule.
pub fn epsilon_net<G>(
    gauge: G,
    epsilon: f64,
    dim: usize,
    probes: usize,
    stream: &mut RngStream,
) -> Result<PointSet>
where
    G: Fn(&[f64]) -> f64,
{
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if dim == 0 {
        return Err(Error::Parameter(String::from("dim must be positive")));
    }
    let probes = probes.max(2);

    // Boundary probes: random directions scaled to gauge 1.
    let mut boundary: Vec<f64> = Vec::with_capacity(probes * dim);
    let mut dir = vec![0.0; dim];
    for _ in 0..probes {
        stream.unit_direction(dim, &mut dir);
        let g = gauge(&dir);
        if !g.is_finite() || g <= 0.0 {
            return Err(Error::InvalidOracle(format!("gauge returned {g} on a unit direction")));
        }
        for &x in &dir {
            boundary.push(x / g);
        }
    }
    let probe = |i: usize| &boundary[i * dim..(i + 1) * dim];

    let mut net: Vec<usize> = vec![0];
    // min over current net of gauge-distance, per probe
    let mut min_dist: Vec<f64> = (0..probes)
        .map(|i| {
            let mut diff = vec![0.0; dim];
            for k in 0..dim {
                diff[k] = probe(i)[k] - probe(0)[k];
            }
            gauge(&diff)
        })
        .collect();

    loop {
        let mut far = 0;
        let mut far_dist = -1.0;
        for (i, &d) in min_dist.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::InvalidOracle(String::from("gauge returned non-finite distance")));
            }
            if d > far_dist {
                far_dist = d;
                far = i;
            }
        }
        if far_dist <= epsilon {
            break;
        }
        net.push(far);
        let mut diff = vec![0.0; dim];
        for i in 0..probes {
            for k in 0..dim {
                diff[k] = probe(i)[k] - probe(far)[k];
            }
            let d = gauge(&diff);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
        }
    }

    let cardinality_bound = math::powf(1.0 + 2.0 / epsilon, dim as f64);
    if (net.len() as f64) > cardinality_bound {
        return Err(Error::InvalidOracle(format!(
            "net of {} points exceeds the packing bound {cardinality_bound}; gauge is not a norm",
            net.len()
        )));
    }

    let mut flat = Vec::with_capacity(net.len() * dim);
    for &i in &net {
        flat.extend_from_slice(probe(i));
    }
    PointSet::from_flat(dim, flat)
}

// ---------------------------------------------------------------------------
// Whitening
// ---------------------------------------------------------------------------

const WHITEN_COND_CAP: f64 = 1e12;

/// `V^{-1/2}` for a symmetric positive-definite covariance, as
/// [`MomentData`] with analytic provenance.
pub fn whiten_cov(covariance: &Matrix) -> Result<MomentData> {
    let d = covariance.rows();
    if covariance.cols() != d || d == 0 {
        return Err(Error::InvalidInput(String::from("covariance must be square")));
    }
    if !covariance.is_finite() {
        return Err(Error::InvalidInput(String::from("non-finite covariance entry")));
    }
    let (vals, vecs) = linalg::sym_eigen(covariance);
    let max = vals[d - 1];
    let min = vals[0];
    if min <= 0.0 || max / min > WHITEN_COND_CAP {
        // Null direction: eigenvector of the smallest eigenvalue.
        let direction: Vec<f64> = (0..d).map(|k| vecs.get(k, 0)).collect();
        return Err(Error::RankDeficient { direction });
    }
    let mut whitener = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += vecs.get(i, k) * vecs.get(j, k) / math::sqrt(vals[k]);
            }
            whitener.set(i, j, s);
        }
    }
    Ok(MomentData {
        covariance: covariance.clone(),
        whitener,
        rho3: None,
        norm_bound: None,
        norm_moment3: None,
        norm_moment4: None,
        provenance: MomentProvenance::Analytic,
    })
}

/// Whiten an empirical sample: center, estimate the covariance, and apply
/// `V^{-1/2}` so the transformed points have identity covariance.
pub fn whiten(points: &PointSet) -> Result<(MomentData, PointSet)> {
    let d = points.dim();
    let n = points.len();
    let mean = points.mean();
    let mut cov = Matrix::zeros(d, d);
    for p in points.iter() {
        for i in 0..d {
            let xi = p[i] - mean[i];
            for j in i..d {
                let xj = p[j] - mean[j];
                let v = cov.get(i, j) + xi * xj;
                cov.set(i, j, v);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / n as f64;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    let mut data = whiten_cov(&cov)?;
    data.provenance = MomentProvenance::MonteCarlo { trials: n as u64, rho3_stderr: None };
    let mut flat = Vec::with_capacity(n * d);
    let mut centered = vec![0.0; d];
    for p in points.iter() {
        for k in 0..d {
            centered[k] = p[k] - mean[k];
        }
        flat.extend_from_slice(&data.whitener.matvec(&centered));
    }
    Ok((data, PointSet::from_flat(d, flat)?))
}

// ---------------------------------------------------------------------------
// Degenerate subset scan
// ---------------------------------------------------------------------------

const SUBSET_BUDGET: u128 = 1_000_000;

/// Minimum over all `k`-point subsets of the distance from `theta` to the
/// subset's hull. Exhaustive; intended for desk scale (`C(n, k) <= 1e6`).
pub fn degenerate_subset_scan(points: &PointSet, theta: &[f64], k: usize) -> Result<f64> {
    let n = points.len();
    let dim = points.dim();
    if theta.len() != dim {
        return Err(Error::DimMismatch { expected: dim, got: theta.len() });
    }
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} outside 1..={n}")));
    }
    let count = math::binomial_u128(n as u64, k as u64);
    if count > SUBSET_BUDGET {
        return Err(Error::Budget(format!(
            "C({n}, {k}) = {count} subsets exceeds the scan budget {SUBSET_BUDGET}"
        )));
    }

    let mut indices: Vec<usize> = (0..k).collect();
    let mut flat = vec![0.0; k * dim];
    let mut best = f64::INFINITY;
    loop {
        for (slot, &idx) in indices.iter().enumerate() {
            flat[slot * dim..(slot + 1) * dim].copy_from_slice(points.point(idx));
        }
        let res = distance_to_hull_flat(dim, &flat, theta, GEOM_TOL)?;
        if res.distance < best {
            best = res.distance;
        }
        // Next combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if indices[i] != i + n - k {
                break;
            }
        }
        indices[i] += 1;
        for j in (i + 1)..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn pset(points: &[&[f64]]) -> PointSet {
        PointSet::from_points(points).unwrap()
    }

    /// Brute-force min-norm oracle: for every nonempty subset, project the
    /// origin onto the subset's affine hull; candidates that land inside
    /// the subset's convex hull are feasible, and the smallest feasible
    /// norm is the exact hull distance.
    fn brute_min_norm(points: &PointSet) -> f64 {
        let n = points.len();
        let dim = points.dim();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let aff = match affine_minimizer(dim, points.as_flat(), &members) {
                Ok(a) => a,
                Err(_) => continue,
            };
            if aff.iter().any(|&w| w < -1e-9) {
                continue;
            }
            let mut x = vec![0.0; dim];
            combine(dim, points.as_flat(), &members, &aff, &mut x);
            let nn = math::norm(&x);
            if nn < best {
                best = nn;
            }
        }
        best
    }

    #[test]
    fn min_norm_segment() {
        let p = pset(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = min_norm_point(&p, 1e-9).unwrap();
        assert!(math::abs(r.distance - core::f64::consts::FRAC_1_SQRT_2) < 1e-9);
        assert!(math::abs(r.point[0] - 0.5) < 1e-9);
        assert!(math::abs(r.point[1] - 0.5) < 1e-9);
    }

    #[test]
    fn min_norm_hull_through_origin() {
        let p = pset(&[&[-1.0, 0.0], &[1.0, 0.0]]);
        let r = min_norm_point(&p, 1e-9).unwrap();
        assert!(r.distance < 1e-9);
        assert!(math::norm(&r.point) < 1e-9);
    }

    #[test]
    fn min_norm_single_point() {
        let p = pset(&[&[2.0, 1.0]]);
        let r = min_norm_point(&p, 1e-9).unwrap();
        assert!(math::abs(r.distance - math::sqrt(5.0)) < 1e-12);
        assert_eq!(r.coefficients, vec![1.0]);
    }

    #[test]
    fn min_norm_rejects_bad_input() {
        assert!(PointSet::from_flat(2, vec![1.0, f64::NAN]).is_err());
        let p = pset(&[&[1.0, 0.0]]);
        assert!(min_norm_point(&p, 0.0).is_err());
    }

    #[test]
    fn min_norm_matches_brute_force() {
        let mut stream = RngStream::new(1234, 0);
        for case in 0..200 {
            let dim = 1 + (case % 3);
            let n = 2 + (case % 7);
            let mut flat = alloc::vec::Vec::new();
            for _ in 0..(n * dim) {
                flat.push(stream.uniform_in(-1.5, 1.5));
            }
            let p = PointSet::from_flat(dim, flat).unwrap();
            let fast = min_norm_point(&p, 1e-10).unwrap();
            let slow = brute_min_norm(&p);
            assert!(
                math::abs(fast.distance - slow) < 1e-6,
                "case {case}: wolfe {} vs brute {slow}",
                fast.distance
            );
            // Coefficients certify the point.
            let mut recon = vec![0.0; dim];
            for (i, &c) in fast.coefficients.iter().enumerate() {
                assert!(c >= -1e-12);
                for k in 0..dim {
                    recon[k] += c * p.point(i)[k];
                }
            }
            let sum: f64 = fast.coefficients.iter().sum();
            assert!(math::abs(sum - 1.0) < 1e-9);
            for k in 0..dim {
                assert!(math::abs(recon[k] - fast.point[k]) < 1e-9);
            }
        }
    }

    #[test]
    fn hull_contains_triangle() {
        let p = pset(&[&[1.0, 0.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let c = hull_contains(&p, &[0.0, 0.0], 0.0, 1e-9).unwrap();
        assert!(c.contained);
        let w = c.witness.unwrap();
        let sum: f64 = w.iter().sum();
        assert!(math::abs(sum - 1.0) < 1e-12);
        let mut recon = [0.0, 0.0];
        for (i, &wi) in w.iter().enumerate() {
            assert!(wi >= -1e-12);
            recon[0] += wi * p.point(i)[0];
            recon[1] += wi * p.point(i)[1];
        }
        assert!(math::abs(recon[0]) < 1e-8 && math::abs(recon[1]) < 1e-8);
    }

    #[test]
    fn hull_contains_epsilon_relaxation() {
        // Distance from the origin to the segment is sqrt(2)/2 = 0.7071...
        let p = pset(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(!hull_contains(&p, &[0.0, 0.0], 0.5, 1e-9).unwrap().contained);
        assert!(hull_contains(&p, &[0.0, 0.0], 0.8, 1e-9).unwrap().contained);
    }

    #[test]
    fn hull_contains_single_point_at_itself() {
        let p = pset(&[&[3.0, -2.0, 0.5]]);
        let c = hull_contains(&p, &[3.0, -2.0, 0.5], 0.0, 1e-9).unwrap();
        assert!(c.contained);
    }

    #[test]
    fn hull_contains_dim_mismatch() {
        let p = pset(&[&[1.0, 0.0]]);
        assert!(matches!(
            hull_contains(&p, &[1.0], 0.0, 1e-9),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn hull_contains_duplicates_admitted() {
        let p = pset(&[&[1.0, 1.0], &[1.0, 1.0], &[-1.0, -1.0], &[-1.0, -1.0]]);
        let c = hull_contains(&p, &[0.0, 0.0], 0.0, 1e-9).unwrap();
        assert!(c.contained);
    }

    #[test]
    fn caratheodory_square_corners() {
        let support = pset(&[&[1.0, 1.0], &[1.0, -1.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let m = WeightedMeasure::uniform(support);
        let r = caratheodory_reduce(&m, 1e-9).unwrap();
        assert!(r.len() <= 3);
        let mean = r.mean();
        assert!(math::abs(mean[0]) < 1e-9 && math::abs(mean[1]) < 1e-9);
        let s: f64 = r.weights().iter().sum();
        assert!(math::abs(s - 1.0) < 1e-12);
        assert!(r.weights().iter().all(|&w| w >= 0.0));
        // Support is a subset of the input support.
        for q in r.support().iter() {
            assert!(m.support().iter().any(|p| p == q));
        }
    }

    #[test]
    fn caratheodory_already_reduced() {
        let support = pset(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let m = WeightedMeasure::new(support, vec![0.5, 0.25, 0.25]).unwrap();
        let r = caratheodory_reduce(&m, 1e-9).unwrap();
        assert_eq!(&r, &m);
    }

    #[test]
    fn caratheodory_one_dim_matches_subset_search() {
        let support = pset(&[&[-2.0], &[1.0], &[4.0]]);
        let m = WeightedMeasure::new(support, vec![0.25, 0.5, 0.25]).unwrap();
        let target = m.mean()[0]; // 1.0
        assert!(math::abs(target - 1.0) < 1e-15);
        // Oracle: enumerate 2-subsets and solve for weights hitting the mean.
        let pts = [-2.0, 1.0, 4.0];
        let mut feasible = alloc::vec::Vec::new();
        for a in 0..3 {
            for b in (a + 1)..3 {
                let (x, y) = (pts[a], pts[b]);
                if math::abs(x - y) < 1e-12 {
                    continue;
                }
                let w = (target - y) / (x - y);
                if (-1e-12..=1.0 + 1e-12).contains(&w) {
                    feasible.push((x, y, w));
                }
            }
        }
        assert!(!feasible.is_empty());
        let r = caratheodory_reduce(&m, 1e-9).unwrap();
        assert!(r.len() <= 2);
        let mean = r.mean();
        assert!(math::abs(mean[0] - target) < 1e-9);
    }

    #[test]
    fn epsilon_net_interval() {
        let mut stream = RngStream::new(7, 0);
        let net = epsilon_net(|x| math::abs(x[0]), 0.5, 1, 1024, &mut stream).unwrap();
        assert!(net.len() <= 5);
        for p in net.iter() {
            assert!(math::abs(p[0]) <= 1.0 + 1e-9);
        }
        // Grid check: (1 - eps) K subset of conv(net) means every grid point
        // of [-0.5, 0.5] lies between the extremes of the net.
        let lo = net.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = net.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..=1000 {
            let x = -0.5 + i as f64 * 0.001;
            assert!(x >= lo - 1e-9 && x <= hi + 1e-9, "grid point {x} uncovered");
        }
    }

    #[test]
    fn epsilon_net_interval_near_one() {
        let mut stream = RngStream::new(8, 0);
        let net = epsilon_net(|x| math::abs(x[0]), 0.999, 1, 1024, &mut stream).unwrap();
        // The pair {-1, +1} (up to probe jitter) suffices in one dimension.
        assert!(net.len() <= 2);
        let lo = net.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = net.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..=1000 {
            let x = -0.001 + i as f64 * 0.000002;
            assert!(x >= lo - 1e-9 && x <= hi + 1e-9);
        }
    }

    #[test]
    fn epsilon_net_square_cardinality() {
        let mut stream = RngStream::new(9, 0);
        // Unit square: gauge is the max-norm.
        let net = epsilon_net(
            |x: &[f64]| math::abs(x[0]).max(math::abs(x[1])),
            1.0,
            2,
            8192,
            &mut stream,
        )
        .unwrap();
        assert!(net.len() <= 9);
    }

    #[test]
    fn epsilon_net_rejects_bad_oracle() {
        let mut stream = RngStream::new(10, 0);
        let r = epsilon_net(|_x: &[f64]| f64::NAN, 0.5, 2, 64, &mut stream);
        assert!(matches!(r, Err(Error::InvalidOracle(_))));
    }

    #[test]
    fn whiten_analytic_cases() {
        // V = I/2 -> whitener = sqrt(2) I.
        let v = Matrix::from_rows(2, 2, vec![0.5, 0.0, 0.0, 0.5]);
        let w = whiten_cov(&v).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { math::sqrt(2.0) } else { 0.0 };
                assert!(math::abs(w.whitener.get(i, j) - expect) < 1e-12);
            }
        }
        // V = I -> identity.
        let w = whiten_cov(&Matrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(math::abs(w.whitener.get(i, j) - expect) < 1e-12);
            }
        }
        // Scalar: V = 4 -> whitener = 0.5.
        let w = whiten_cov(&Matrix::from_rows(1, 1, vec![4.0])).unwrap();
        assert!(math::abs(w.whitener.get(0, 0) - 0.5) < 1e-15);
    }

    #[test]
    fn whiten_idempotent() {
        let v = Matrix::from_rows(2, 2, vec![2.0, 0.3, 0.3, 1.0]);
        let w = whiten_cov(&v).unwrap();
        // whitener * V * whitener = I.
        let prod = w.whitener.matmul(&v).matmul(&w.whitener);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(math::abs(prod.get(i, j) - expect) < 1e-8);
            }
        }
        // Whitening the whitened covariance yields the identity transform.
        let w2 = whiten_cov(&prod).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(math::abs(w2.whitener.get(i, j) - expect) < 1e-8);
            }
        }
    }

    #[test]
    fn whiten_names_null_direction() {
        let v = Matrix::from_rows(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        match whiten_cov(&v) {
            Err(Error::RankDeficient { direction }) => {
                // Null direction of [[1,1],[1,1]] is (1,-1)/sqrt(2).
                assert!(math::abs(math::abs(direction[0]) - core::f64::consts::FRAC_1_SQRT_2) < 1e-9);
                assert!(math::abs(direction[0] + direction[1]) < 1e-9);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn whiten_points_gives_identity_covariance() {
        let mut stream = RngStream::new(77, 0);
        let d = 2;
        let n = 20_000;
        let mut flat = alloc::vec::Vec::with_capacity(n * d);
        for _ in 0..n {
            let a = stream.standard_normal() * 3.0;
            let b = 0.5 * a + stream.standard_normal();
            flat.push(a + 1.0);
            flat.push(b - 2.0);
        }
        let p = PointSet::from_flat(d, flat).unwrap();
        let (_, wp) = whiten(&p).unwrap();
        let mut cov = [0.0; 4];
        for q in wp.iter() {
            cov[0] += q[0] * q[0];
            cov[1] += q[0] * q[1];
            cov[3] += q[1] * q[1];
        }
        for c in cov.iter_mut() {
            *c /= n as f64;
        }
        assert!(math::abs(cov[0] - 1.0) < 1e-6);
        assert!(math::abs(cov[1]) < 1e-6);
        assert!(math::abs(cov[3] - 1.0) < 1e-6);
    }

    #[test]
    fn subset_scan_generic_points_positive() {
        let p = pset(&[
            &[1.0, 0.3],
            &[-0.7, 0.9],
            &[0.4, -1.1],
            &[-0.2, -0.6],
            &[0.9, 0.8],
        ]);
        let d = degenerate_subset_scan(&p, &[0.0, 0.0], 2).unwrap();
        assert!(d > 1e-3, "distance {d} should be strictly positive");
    }

    #[test]
    fn subset_scan_hits_zero_at_member() {
        let p = pset(&[&[1.0, 0.3], &[-0.7, 0.9]]);
        let d = degenerate_subset_scan(&p, &[1.0, 0.3], 1).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn subset_scan_collinear_through_origin() {
        let p = pset(&[&[1.0, 1.0], &[-2.0, -2.0], &[3.0, 5.0]]);
        let d = degenerate_subset_scan(&p, &[0.0, 0.0], 2).unwrap();
        assert!(d < 1e-9);
    }

    #[test]
    fn subset_scan_budget() {
        let mut flat = alloc::vec::Vec::new();
        let mut stream = RngStream::new(3, 3);
        for _ in 0..80 {
            flat.push(stream.uniform());
            flat.push(stream.uniform());
        }
        let p = PointSet::from_flat(2, flat).unwrap();
        // C(80, 6) is about 3e8, far over the 1e6 budget.
        assert!(matches!(
            degenerate_subset_scan(&p, &[0.0, 0.0], 6),
            Err(Error::Budget(_))
        ));
    }
}
