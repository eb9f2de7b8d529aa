//! Synthetic instance generators: planted polytopes, low-rank plus noise,
//! and 2-D polygons with a prescribed curvature profile. These back both
//! the CLI's `synth` command and the statistical test envelopes.

use crate::error::{Error, Result};
use crate::matrix::{axpy, matmul, norm2, DenseMatrix};
use crate::rng::{
    gaussian_matrix, CounterRng, TAG_SYNTH_NOISE, TAG_SYNTH_ROT, TAG_SYNTH_VERTEX,
    TAG_SYNTH_WEIGHT,
};

/// Planted-polytope instance: the first k data columns are the vertices
/// themselves, the rest are Dirichlet(1) combinations, all perturbed by
/// Gaussian noise of the given scale.
#[derive(Clone, Debug)]
pub struct PolytopeInstance {
    /// d×n data matrix.
    pub data: DenseMatrix,
    /// d×k planted vertices (noise-free).
    pub vertices: DenseMatrix,
}

pub fn polytope(n: usize, d: usize, k: usize, noise: f64, seed: u64) -> Result<PolytopeInstance> {
    if k < 1 || n < k {
        return Err(Error::contract(format!(
            "polytope generator requires 1 <= k <= n (got k = {k}, n = {n})"
        )));
    }
    let base = CounterRng::new(seed);
    let vertices = gaussian_matrix(d, k, &base.substream(TAG_SYNTH_VERTEX));

    let mut data = DenseMatrix::zeros(d, n);
    for j in 0..k {
        data.col_mut(j).copy_from_slice(vertices.col(j));
    }
    let mut wrng = base.substream(TAG_SYNTH_WEIGHT);
    let mut w = vec![0.0; k];
    for j in k..n {
        // Dirichlet(1, …, 1) via normalized exponentials.
        let mut s = 0.0;
        for wi in w.iter_mut() {
            *wi = -(1.0 - wrng.next_f64()).ln();
            s += *wi;
        }
        let col = data.col_mut(j);
        for (i, &wi) in w.iter().enumerate() {
            axpy(wi / s, vertices.col(i), col);
        }
    }
    if noise > 0.0 {
        let mut nrng = base.substream(TAG_SYNTH_NOISE);
        for j in 0..n {
            for v in data.col_mut(j) {
                *v += noise * nrng.next_gaussian();
            }
        }
    }
    Ok(PolytopeInstance { data, vertices })
}

/// Random rank-r matrix plus entrywise Gaussian noise of scale `sigma`.
pub fn lowrank_noise(n: usize, d: usize, rank: usize, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    if rank < 1 || rank > d.min(n) {
        return Err(Error::contract(format!(
            "lowrank generator requires 1 <= rank <= min(d, n) (got rank = {rank})"
        )));
    }
    let base = CounterRng::new(seed);
    let left = gaussian_matrix(d, rank, &base.substream(TAG_SYNTH_VERTEX));
    let right = gaussian_matrix(rank, n, &base.substream(TAG_SYNTH_WEIGHT));
    let mut x = matmul(&left, &right)?;
    let scale = 1.0 / (rank as f64).sqrt();
    for j in 0..n {
        for v in x.col_mut(j) {
            *v *= scale;
        }
    }
    if sigma > 0.0 {
        let mut nrng = base.substream(TAG_SYNTH_NOISE);
        for j in 0..n {
            for v in x.col_mut(j) {
                *v += sigma * nrng.next_gaussian();
            }
        }
    }
    Ok(x)
}

/// Matrix with orthonormal left/right factors and polynomially decaying
/// singular values σ_i = (i + 1)^(−rate).
pub fn decaying_spectrum(d: usize, n: usize, rate: f64, seed: u64) -> Result<DenseMatrix> {
    let r = d.min(n);
    let base = CounterRng::new(seed);
    let u = crate::decomp::orthonormalize(&gaussian_matrix(d, r, &base.substream(TAG_SYNTH_VERTEX)));
    let v = crate::decomp::orthonormalize(&gaussian_matrix(n, r, &base.substream(TAG_SYNTH_WEIGHT)));
    let r = u.cols().min(v.cols());
    let mut x = DenseMatrix::zeros(d, n);
    for j in 0..n {
        let col = x.col_mut(j);
        for i in 0..r {
            let sv = ((i + 1) as f64).powf(-rate);
            axpy(sv * v.get(j, i), u.col(i), col);
        }
    }
    Ok(x)
}

/// 2-D polygon with the prescribed curvature profile.
#[derive(Clone, Debug)]
pub struct PolygonInstance {
    /// 2×n data matrix: the polygon's vertices first (counterclockwise),
    /// then interior fill points.
    pub data: DenseMatrix,
    /// Exact curvature of each data column (vertices carry the profile,
    /// fill points are 0).
    pub curvatures: Vec<f64>,
    pub vertex_count: usize,
}

/// Builds a convex polygon whose vertex normal cones have widths 2π·κ_j.
///
/// Edge support lines are tangent to a circle of the given radius; the
/// vertex owning curvature κ sits where two adjacent support lines meet, at
/// distance radius/cos(π·κ) from the center. A seeded random rotation
/// breaks axis alignment. `n` ≥ profile length; extra points are Dirichlet
/// combinations of the vertices (interior, curvature 0).
pub fn polygon2d(profile: &[f64], n: usize, radius: f64, seed: u64) -> Result<PolygonInstance> {
    let v = profile.len();
    if v < 3 {
        return Err(Error::contract("polygon profile needs at least 3 vertices"));
    }
    if n < v {
        return Err(Error::contract(format!(
            "n = {n} is smaller than the profile length {v}"
        )));
    }
    let sum: f64 = profile.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "curvature profile sums to {sum}, expected 1"
        )));
    }
    if profile.iter().any(|&k| k <= 0.0 || k >= 0.5) {
        return Err(Error::contract(
            "each curvature must lie in (0, 0.5) for a bounded vertex",
        ));
    }
    if radius <= 0.0 {
        return Err(Error::contract("radius must be positive"));
    }

    let base = CounterRng::new(seed);
    let mut rot_rng = base.substream(TAG_SYNTH_ROT);
    let phi0 = rot_rng.next_f64() * 2.0 * std::f64::consts::PI;

    let mut data = DenseMatrix::zeros(2, n);
    let mut prefix = 0.0;
    for (j, &kappa) in profile.iter().enumerate() {
        let lo = phi0 + 2.0 * std::f64::consts::PI * prefix;
        prefix += kappa;
        let hi = phi0 + 2.0 * std::f64::consts::PI * prefix;
        let mid = 0.5 * (lo + hi);
        let dist = radius / (std::f64::consts::PI * kappa).cos();
        data.set(0, j, dist * mid.cos());
        data.set(1, j, dist * mid.sin());
    }

    let mut wrng = base.substream(TAG_SYNTH_WEIGHT);
    let mut w = vec![0.0; v];
    for j in v..n {
        let mut s = 0.0;
        for wi in w.iter_mut() {
            *wi = -(1.0 - wrng.next_f64()).ln();
            s += *wi;
        }
        // Contract toward the centroid so fill points stay strictly interior.
        let (mut px, mut py) = (0.0, 0.0);
        for (i, &wi) in w.iter().enumerate() {
            px += 0.9 * (wi / s) * data.get(0, i);
            py += 0.9 * (wi / s) * data.get(1, i);
        }
        data.set(0, j, px);
        data.set(1, j, py);
    }

    let mut curvatures = vec![0.0; n];
    curvatures[..v].copy_from_slice(profile);
    Ok(PolygonInstance {
        data,
        curvatures,
        vertex_count: v,
    })
}

/// Profile of a regular polygon: every vertex carries curvature 1/k.
pub fn regular_polygon_profile(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

/// Largest column norm; the R of the hull-stage error bounds.
pub fn max_column_norm(x: &DenseMatrix) -> f64 {
    (0..x.cols()).map(|j| norm2(x.col(j))).fold(0.0, f64::max)
}
