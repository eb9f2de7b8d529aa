//! Naive reference implementations used as independent oracles by the test
//! suite. Nothing here shares code with the optimized paths it checks;
//! everything is written for obviousness, not speed.

use crate::matrix::{DenseMatrix, StochasticMatrix};
use crate::rng::CounterRng;

/// Entry-by-entry triple-loop matrix product.
pub fn matmul_naive(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    let mut c = DenseMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = 0.0;
            for k in 0..a.cols() {
                acc += a.get(i, k) * b.get(k, j);
            }
            c.set(i, j, acc);
        }
    }
    c
}

/// Top singular values of `a` by power iteration with deflation on the Gram
/// matrix aᵀa; eigenvalues of the Gram matrix are squared singular values.
pub fn singular_values_via_gram(a: &DenseMatrix, count: usize) -> Vec<f64> {
    let n = a.cols();
    let mut gram = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for r in 0..a.rows() {
                acc += a.get(r, i) * a.get(r, j);
            }
            gram.set(i, j, acc);
        }
    }

    let mut rng = CounterRng::new(0x0eac1e);
    let mut values = Vec::new();
    for _ in 0..count.min(n) {
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = gram.matvec(&v);
            let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nw == 0.0 {
                lambda = 0.0;
                break;
            }
            let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
            let new_lambda = nw;
            let done = (new_lambda - lambda).abs() <= 1e-13 * new_lambda.max(1e-300);
            v = next;
            lambda = new_lambda;
            if done {
                break;
            }
        }
        values.push(lambda.max(0.0).sqrt());
        // Deflate: gram ← gram − λ v vᵀ.
        for i in 0..n {
            for j in 0..n {
                let g = gram.get(i, j) - lambda * v[i] * v[j];
                gram.set(i, j, g);
            }
        }
    }
    values
}

/// Random column-stochastic matrix (uniform entries, normalized columns).
pub fn random_stochastic(rows: usize, cols: usize, seed: u64) -> StochasticMatrix {
    let mut rng = CounterRng::new(seed);
    let mut m = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        let col = m.col_mut(j);
        let mut sum = 0.0;
        for v in col.iter_mut() {
            *v = rng.next_f64() + 1e-3;
            sum += *v;
        }
        for v in col.iter_mut() {
            *v /= sum;
        }
    }
    StochasticMatrix::new(m).expect("normalized columns")
}

/// Solves a dense linear system by Gaussian elimination with partial
/// pivoting; returns None when the pivot collapses.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a.get(i, j);
        }
        m[i][n] = b[i];
    }
    for c in 0..n {
        let (piv, piv_abs) = (c..n)
            .map(|r| (r, m[r][c].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if piv_abs < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for j in c..=n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let mut acc = m[c][n];
        for j in (c + 1)..n {
            acc -= m[c][j] * x[j];
        }
        x[c] = acc / m[c][c];
    }
    Some(x)
}

/// Exact minimizer of ½‖Z b − y‖² over the simplex by enumerating all
/// 2^k − 1 support sets and solving each equality-constrained least-squares
/// problem via its KKT system. Returns (coefficients, objective).
/// Intended for k ≤ ~10.
pub fn active_set_simplex_lsq(z: &DenseMatrix, y: &[f64]) -> (Vec<f64>, f64) {
    let k = z.cols();
    assert!(k >= 1 && k <= 16);
    assert_eq!(z.rows(), y.len());
    let f = |b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for r in 0..z.rows() {
            let mut e = -y[r];
            for c in 0..k {
                e += z.get(r, c) * b[c];
            }
            acc += e * e;
        }
        0.5 * acc
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let s = support.len();
        // KKT system: [ Z_SᵀZ_S  1 ; 1ᵀ 0 ] [b; λ] = [Z_Sᵀ y; 1].
        let mut kkt = DenseMatrix::zeros(s + 1, s + 1);
        let mut rhs = vec![0.0; s + 1];
        for (ii, &ci) in support.iter().enumerate() {
            for (jj, &cj) in support.iter().enumerate() {
                let mut acc = 0.0;
                for r in 0..z.rows() {
                    acc += z.get(r, ci) * z.get(r, cj);
                }
                kkt.set(ii, jj, acc);
            }
            kkt.set(ii, s, 1.0);
            kkt.set(s, ii, 1.0);
            let mut acc = 0.0;
            for r in 0..z.rows() {
                acc += z.get(r, ci) * y[r];
            }
            rhs[ii] = acc;
        }
        rhs[s] = 1.0;
        let Some(sol) = solve_dense(&kkt, &rhs) else {
            continue;
        };
        if sol[..s].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut b = vec![0.0; k];
        for (ii, &ci) in support.iter().enumerate() {
            b[ci] = sol[ii].max(0.0);
        }
        let val = f(&b);
        if best.as_ref().map_or(true, |(_, v)| val < *v) {
            best = Some((b, val));
        }
    }
    best.expect("at least one singleton support is solvable")
}

/// Minimum of ½‖Z b − y‖² over a barycentric grid with the given step on
/// the k-simplex (k ≤ 3 is practical). Returns the best objective found.
pub fn barycentric_grid_min(z: &DenseMatrix, y: &[f64], step: f64) -> f64 {
    let k = z.cols();
    let m = (1.0 / step).round() as usize;
    let f = |b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for r in 0..z.rows() {
            let mut e = -y[r];
            for c in 0..k {
                e += z.get(r, c) * b[c];
            }
            acc += e * e;
        }
        0.5 * acc
    };
    let mut best = f64::INFINITY;
    let mut b = vec![0.0; k];
    enumerate_compositions(m, k, &mut Vec::with_capacity(k), &mut |parts| {
        for (i, &p) in parts.iter().enumerate() {
            b[i] = p as f64 / m as f64;
        }
        let v = f(&b);
        if v < best {
            best = v;
        }
    });
    best
}

/// Minimum distance ‖w − v‖₂ from `v` to a Dirichlet grid on the simplex
/// with `m` subdivisions (the grid has C(m + k − 1, k − 1) points).
pub fn simplex_grid_min_distance(v: &[f64], m: usize) -> f64 {
    let k = v.len();
    let mut best = f64::INFINITY;
    enumerate_compositions(m, k, &mut Vec::with_capacity(k), &mut |parts| {
        let mut acc = 0.0;
        for (i, &p) in parts.iter().enumerate() {
            let d = p as f64 / m as f64 - v[i];
            acc += d * d;
        }
        if acc < best {
            best = acc;
        }
    });
    best.sqrt()
}

fn enumerate_compositions(
    total: usize,
    parts: usize,
    prefix: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if parts == 1 {
        prefix.push(total);
        visit(prefix);
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        enumerate_compositions(total - first, parts - 1, prefix, visit);
        prefix.pop();
    }
}

/// Hausdorff distance between two finite point sets given as matrix columns.
pub fn hausdorff_point_sets(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.rows(), b.rows());
    let one_sided = |p: &DenseMatrix, q: &DenseMatrix| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..p.cols() {
            let mut best = f64::INFINITY;
            for j in 0..q.cols() {
                let d: f64 = p
                    .col(i)
                    .iter()
                    .zip(q.col(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                best = best.min(d);
            }
            worst = worst.max(best.sqrt());
        }
        worst
    };
    one_sided(a, b).max(one_sided(b, a))
}
