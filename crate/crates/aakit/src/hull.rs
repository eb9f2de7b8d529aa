//! Approximate convex hull by random projections.
//!
//! A point's curvature is the spherical measure of directions on which it
//! attains the maximum inner product; sampling M uniform directions and
//! counting argmax hits estimates all curvatures at once. Sorting the
//! counts and keeping the smallest prefix holding more than 1 − η/3 of the
//! mass yields the retained index set T.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::qp::SimplexLsq;
use crate::rng::{CounterRng, TAG_HULL_MC, TAG_SPHERE};
use rayon::prelude::*;

/// Argmax hit counts from one Monte-Carlo run.
#[derive(Clone, Debug, PartialEq)]
pub struct HitCounts {
    counts: Vec<u64>,
    total: u64,
}

impl HitCounts {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Retained candidate extreme points.
#[derive(Clone, Debug, PartialEq)]
pub struct HullSupport {
    /// Sorted (ascending) indices of retained points, the set T.
    pub indices: Vec<usize>,
    /// Estimated cumulative curvature mass of the retained set.
    pub cum_curvature_estimate: f64,
    pub eta: f64,
    /// |T|; at least min(d + 1, N).
    pub l: usize,
}

/// Uniform direction on the unit sphere: a normalized standard Gaussian
/// vector, redrawn on the measure-zero all-zeros event.
pub fn sample_sphere_direction(d: usize, rng: &mut CounterRng) -> Vec<f64> {
    assert!(d >= 1);
    loop {
        let mut v = vec![0.0; d];
        rng.fill_gaussian(&mut v);
        let n = norm2(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Counts, over m random directions, how often each column attains the
/// maximum inner product. Ties go to the lowest index.
///
/// The m directions are split into `workers` contiguous chunks, each drawn
/// from its own substream, so the result is a function of (seed, workers);
/// workers = 1 is the reproducibility reference.
pub fn estimate_hit_counts(
    x: &DenseMatrix,
    m: usize,
    seed: u64,
    workers: usize,
) -> Result<HitCounts> {
    let n = x.cols();
    if m == 0 || n == 0 {
        return Err(Error::contract(
            "estimate_hit_counts requires m >= 1 and N >= 1",
        ));
    }
    let workers = workers.max(1).min(m);
    let d = x.rows();
    let base = CounterRng::new(seed).substream(TAG_HULL_MC);

    let chunk_counts: Vec<Vec<u64>> = (0..workers)
        .into_par_iter()
        .map(|c| {
            let mut draws = m / workers;
            if c < m % workers {
                draws += 1;
            }
            let mut rng = base.substream(c as u64).substream(TAG_SPHERE);
            let mut local = vec![0u64; n];
            let mut v = vec![0.0; d];
            for _ in 0..draws {
                loop {
                    rng.fill_gaussian(&mut v);
                    let norm = norm2(&v);
                    if norm > 0.0 {
                        v.iter_mut().for_each(|e| *e /= norm);
                        break;
                    }
                }
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0usize;
                for j in 0..n {
                    let val = dot(&v, x.col(j));
                    if val > best {
                        best = val;
                        arg = j;
                    }
                }
                local[arg] += 1;
            }
            local
        })
        .collect();

    let mut counts = vec![0u64; n];
    for local in chunk_counts {
        for (c, l) in counts.iter_mut().zip(local) {
            *c += l; // integer sums: order irrelevant
        }
    }
    Ok(HitCounts {
        counts,
        total: m as u64,
    })
}

/// Sorts counts descending (ties by ascending index), takes the minimal
/// prefix whose mass strictly exceeds 1 − η/3, then enforces L ≥ d + 1
/// (clamped to N).
pub fn select_support(counts: &HitCounts, eta: f64, d: usize) -> Result<HullSupport> {
    if !(eta > 0.0 && eta < 3.0) {
        return Err(Error::contract(format!("eta = {eta} outside (0, 3)")));
    }
    if counts.total == 0 {
        return Err(Error::contract("select_support requires at least one draw"));
    }
    let n = counts.counts.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| counts.counts[b].cmp(&counts.counts[a]).then(a.cmp(&b)));

    let total = counts.total as f64;
    let threshold = 1.0 - eta / 3.0;
    let mut prefix = 0u64;
    let mut l = n;
    for (rank, &idx) in order.iter().enumerate() {
        prefix += counts.counts[idx];
        if prefix as f64 / total > threshold {
            l = rank + 1;
            break;
        }
    }
    l = l.max(d + 1).min(n);
    let retained: u64 = order[..l].iter().map(|&i| counts.counts[i]).sum();
    let mut indices = order[..l].to_vec();
    indices.sort_unstable();
    Ok(HullSupport {
        indices,
        cum_curvature_estimate: retained as f64 / total,
        eta,
        l,
    })
}

/// Monte-Carlo approximate convex hull: hit counts followed by support
/// selection at the ambient dimension of `x`.
pub fn approx_convex_hull(
    x: &DenseMatrix,
    m: usize,
    eta: f64,
    seed: u64,
    workers: usize,
) -> Result<HullSupport> {
    let counts = estimate_hit_counts(x, m, seed, workers)?;
    select_support(&counts, eta, x.rows())
}

/// Exact curvatures for 2-D point sets: each convex-hull vertex gets its
/// exterior (normal-cone) angle divided by 2π, every other point 0. The
/// values sum to 1. Test oracle; not part of the approximate pipeline.
pub fn exact_curvature_2d(points: &DenseMatrix) -> Result<Vec<f64>> {
    if points.rows() != 2 {
        return Err(Error::contract("exact_curvature_2d expects 2×N input"));
    }
    let n = points.cols();
    if n < 3 {
        return Err(Error::contract("need at least 3 points"));
    }

    // Monotone chain over (x, y, original index); exact duplicates keep the
    // lowest index.
    let mut pts: Vec<(f64, f64, usize)> = (0..n)
        .map(|j| (points.get(0, j), points.get(1, j), j))
        .collect();
    pts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    pts.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| -> f64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64, usize)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<(f64, f64, usize)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    let hull: Vec<(f64, f64, usize)> = lower.into_iter().chain(upper).collect();
    if hull.len() < 3 {
        return Err(Error::DegenerateGeometry(
            "points are collinear; curvature undefined".into(),
        ));
    }

    let mut kappa = vec![0.0; n];
    let v = hull.len();
    for i in 0..v {
        let prev = &hull[(i + v - 1) % v];
        let cur = &hull[i];
        let next = &hull[(i + 1) % v];
        let e1 = (cur.0 - prev.0, cur.1 - prev.1);
        let e2 = (next.0 - cur.0, next.1 - cur.1);
        let turn = (e1.0 * e2.1 - e1.1 * e2.0).atan2(e1.0 * e2.0 + e1.1 * e2.1);
        kappa[cur.2] = turn / (2.0 * std::f64::consts::PI);
    }
    Ok(kappa)
}

/// Hausdorff distance from conv(X) to conv(X_T). Since conv(X_T) ⊆ conv(X)
/// this is the maximum over data columns of the distance to conv(X_T),
/// each distance the residual of an N-fold simplex least-squares solve.
pub fn hausdorff_to_subhull(x: &DenseMatrix, t: &HullSupport) -> Result<f64> {
    if t.indices.is_empty() {
        return Err(Error::contract("empty support set"));
    }
    if t.indices.iter().any(|&i| i >= x.cols()) {
        return Err(Error::contract("support index out of range"));
    }
    let dict = x.column_subset(&t.indices);
    let solver = SimplexLsq::new(&dict);
    let worst = (0..x.cols())
        .into_par_iter()
        .map(|j| solver.solve(x.col(j), None).residual_norm)
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn square() -> DenseMatrix {
        DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn sphere_direction_has_unit_norm() {
        let mut rng = CounterRng::new(5);
        for d in [1usize, 2, 7] {
            let v = sample_sphere_direction(d, &mut rng);
            assert!((norm2(&v) - 1.0).abs() < 1e-12);
        }
        let v = sample_sphere_direction(1, &mut rng);
        assert!(v[0] == 1.0 || v[0] == -1.0);
    }

    #[test]
    fn sphere_direction_mean_vanishes() {
        let mut rng = CounterRng::new(6);
        let mut mean = [0.0f64; 3];
        let n = 100_000;
        for _ in 0..n {
            let v = sample_sphere_direction(3, &mut rng);
            for (m, x) in mean.iter_mut().zip(&v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        assert!(norm2(&mean) < 0.02, "mean norm {}", norm2(&mean));
    }

    #[test]
    fn single_point_takes_every_hit() {
        let x = DenseMatrix::from_columns(&[vec![0.3, -0.2]]).unwrap();
        let counts = estimate_hit_counts(&x, 500, 1, 1).unwrap();
        assert_eq!(counts.counts(), &[500]);
    }

    #[test]
    fn square_corners_split_hits_evenly() {
        let counts = estimate_hit_counts(&square(), 100_000, 2, 1).unwrap();
        for &c in counts.counts() {
            let freq = c as f64 / 1e5;
            assert!((freq - 0.25).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn interior_point_never_wins() {
        let x = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.25, 0.25],
        ])
        .unwrap();
        let counts = estimate_hit_counts(&x, 20_000, 3, 1).unwrap();
        assert_eq!(counts.counts()[3], 0);
    }

    #[test]
    fn hit_counts_depend_on_worker_partition_but_sum_to_m() {
        let x = square();
        let w1 = estimate_hit_counts(&x, 10_001, 4, 1).unwrap();
        let w4 = estimate_hit_counts(&x, 10_001, 4, 4).unwrap();
        assert_eq!(w1.counts().iter().sum::<u64>(), 10_001);
        assert_eq!(w4.counts().iter().sum::<u64>(), 10_001);
        // Same (seed, workers) is reproducible.
        let w4b = estimate_hit_counts(&x, 10_001, 4, 4).unwrap();
        assert_eq!(w4, w4b);
    }

    #[test]
    fn select_support_hand_example() {
        let counts = HitCounts {
            counts: vec![50, 30, 15, 5],
            total: 100,
        };
        let sup = select_support(&counts, 0.3, 2).unwrap();
        assert_eq!(sup.l, 3);
        assert_eq!(sup.indices, vec![0, 1, 2]);
        assert!((sup.cum_curvature_estimate - 0.95).abs() < 1e-12);
    }

    #[test]
    fn select_support_clamps_to_d_plus_one() {
        let counts = HitCounts {
            counts: vec![100, 0, 0, 0],
            total: 100,
        };
        let sup = select_support(&counts, 0.3, 2).unwrap();
        assert_eq!(sup.l, 3);

        // η → 3⁻ drives the threshold to 0; the clamp alone decides.
        let counts = HitCounts {
            counts: vec![40, 30, 20, 10],
            total: 100,
        };
        let sup = select_support(&counts, 2.999_999, 2).unwrap();
        assert_eq!(sup.l, 3);
        assert!(select_support(&counts, 0.0, 2).is_err());
        assert!(select_support(&counts, 3.0, 2).is_err());
    }

    #[test]
    fn simplex_plus_interior_recovers_vertices() {
        let mut cols = vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        let mut rng = CounterRng::new(9);
        for _ in 0..100 {
            let mut w = [0.0f64; 4];
            let mut s = 0.0;
            for x in w.iter_mut() {
                *x = -(1.0 - rng.next_f64()).ln();
                s += *x;
            }
            // Pull toward the barycenter so no filler point sits near a face.
            let mut p = vec![0.0; 3];
            for (v, x) in cols[..4].to_vec().iter().zip(&w) {
                for (pi, vi) in p.iter_mut().zip(v) {
                    *pi += 0.8 * (x / s) * vi;
                }
            }
            for (pi, &vi) in p.iter_mut().zip(&[0.1, 0.1, 0.1]) {
                *pi += vi;
            }
            cols.push(p);
        }
        let x = DenseMatrix::from_columns(&cols).unwrap();
        let sup = approx_convex_hull(&x, 10_000, 0.03, 10, 1).unwrap();
        assert_eq!(sup.indices, vec![0, 1, 2, 3]);
    }

    fn regular_polygon(v: usize) -> DenseMatrix {
        let cols: Vec<Vec<f64>> = (0..v)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / v as f64 + 0.37;
                vec![a.cos(), a.sin()]
            })
            .collect();
        DenseMatrix::from_columns(&cols).unwrap()
    }

    #[test]
    fn twelve_gon_exact_rule_vs_mc_rule() {
        // Exact curvatures are 1/12 each. At η = 0.5 the threshold 1 − η/3
        // is 5/6, which the exact prefix meets with equality at ℓ = 10, so
        // the strict rule on exact curvatures takes ℓ = 11 (in integers:
        // min ℓ with ℓ·6 > 12·5). Sorted *empirical* counts strictly exceed
        // 5/6 at ℓ = 10 almost surely (sorting biases the prefix up by
        // ~2/√M per cell), so the MC pathway takes 10 — the knife-edge case
        // where the two rules differ.
        let poly = regular_polygon(12);
        let kappa = exact_curvature_2d(&poly).unwrap();
        for k in &kappa {
            assert!((k - 1.0 / 12.0).abs() < 1e-12);
        }
        let l_exact = (1..=12).find(|l| l * 6 > 12 * 5).unwrap();
        assert_eq!(l_exact, 11);

        let sup = approx_convex_hull(&poly, 100_000, 0.5, 11, 1).unwrap();
        assert_eq!(sup.l, 10);

        // Off the knife edge the two rules agree.
        let sup = approx_convex_hull(&poly, 100_000, 0.45, 11, 1).unwrap();
        assert_eq!(sup.l, 11);
    }

    #[test]
    fn tiny_point_set_keeps_everything() {
        let x = DenseMatrix::from_columns(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let sup = approx_convex_hull(&x, 100, 0.3, 12, 1).unwrap();
        assert_eq!(sup.indices, vec![0, 1]);
    }

    #[test]
    fn curvature_square_and_triangles() {
        let k = exact_curvature_2d(&square()).unwrap();
        for v in &k {
            assert!((v - 0.25).abs() < 1e-12);
        }

        let tri = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3f64.sqrt() / 2.0],
        ])
        .unwrap();
        let k = exact_curvature_2d(&tri).unwrap();
        for v in &k {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }

        let right = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let k = exact_curvature_2d(&right).unwrap();
        assert!((k[0] - 0.25).abs() < 1e-12);
        assert!((k[1] - 0.375).abs() < 1e-12);
        assert!((k[2] - 0.375).abs() < 1e-12);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_rejects_collinear() {
        let line = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
        ])
        .unwrap();
        assert!(matches!(
            exact_curvature_2d(&line),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn curvature_ignores_interior_and_edge_points() {
        let x = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.0], // edge midpoint
            vec![0.5, 0.5], // interior
        ])
        .unwrap();
        let k = exact_curvature_2d(&x).unwrap();
        assert_eq!(k[4], 0.0);
        assert_eq!(k[5], 0.0);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_full_extreme_set_is_zero() {
        let sup = HullSupport {
            indices: vec![0, 1, 2, 3],
            cum_curvature_estimate: 1.0,
            eta: 0.1,
            l: 4,
        };
        let d = hausdorff_to_subhull(&square(), &sup).unwrap();
        assert!(d < 1e-6, "distance {d}");
    }

    #[test]
    fn hausdorff_dropped_square_corner() {
        let sup = HullSupport {
            indices: vec![0, 1, 3],
            cum_curvature_estimate: 0.75,
            eta: 0.1,
            l: 3,
        };
        let d = hausdorff_to_subhull(&square(), &sup).unwrap();
        let expect = std::f64::consts::SQRT_2 / 2.0;
        assert!((d - expect).abs() < 1e-6, "distance {d}");
    }

    #[test]
    fn hausdorff_single_point_support() {
        let x = DenseMatrix::from_columns(&[
            vec![0.0, 0.0],
            vec![3.0, 4.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let sup = HullSupport {
            indices: vec![0],
            cum_curvature_estimate: 1.0,
            eta: 0.1,
            l: 1,
        };
        let d = hausdorff_to_subhull(&x, &sup).unwrap();
        assert!((d - 5.0).abs() < 1e-9);
    }

    #[test]
    fn mc_counts_concentrate_around_exact_curvature() {
        // Hoeffding-scale agreement between e_j/M and κ_j on a known polygon.
        let poly = regular_polygon(8);
        let kappa = exact_curvature_2d(&poly).unwrap();
        let mut failures = 0;
        for seed in 0..50 {
            let counts = estimate_hit_counts(&poly, 100_000, 100 + seed, 1).unwrap();
            let worst = counts
                .counts()
                .iter()
                .zip(&kappa)
                .map(|(&c, &k)| (c as f64 / 1e5 - k).abs())
                .fold(0.0f64, f64::max);
            if worst >= 0.01 {
                failures += 1;
            }
        }
        assert!(failures == 0, "{failures}/50 seeds exceeded 0.01");
    }

    #[test]
    fn lemma_envelope_bounds_hausdorff_in_2d() {
        // d_H(conv X, conv X_S) ≤ min{√2·π·(2ω)^{1/(d−1)}, 2}·R with ω the
        // dropped curvature mass, on subsets of a known polygon.
        let poly = regular_polygon(9);
        let kappa = exact_curvature_2d(&poly).unwrap();
        let r = (0..poly.cols())
            .map(|j| norm2(poly.col(j)))
            .fold(0.0f64, f64::max);
        for keep in [3usize, 5, 7, 9] {
            let indices: Vec<usize> = (0..keep).map(|i| i * 9 / keep).collect();
            let omega: f64 = (0..9)
                .filter(|j| !indices.contains(j))
                .map(|j| kappa[j])
                .sum();
            let sup = HullSupport {
                indices,
                cum_curvature_estimate: 1.0 - omega,
                eta: 0.1,
                l: keep,
            };
            let d_h = hausdorff_to_subhull(&poly, &sup).unwrap();
            let bound = (std::f64::consts::SQRT_2 * std::f64::consts::PI * (2.0 * omega))
                .min(2.0)
                * r;
            assert!(
                d_h <= bound + 1e-9,
                "keep {keep}: d_H {d_h} bound {bound} (ω = {omega})"
            );
        }
    }
}
