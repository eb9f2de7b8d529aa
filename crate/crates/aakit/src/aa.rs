//! Alternating minimization for archetypal analysis over an arbitrary
//! dictionary: B-updates project every data column onto the current
//! archetype hull; A-updates re-optimize archetypes one at a time
//! (Gauss-Seidel), each a simplex least-squares over the dictionary.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, matmul, norm2, DenseMatrix, StochasticMatrix};
use crate::qp::SimplexLsq;
use crate::rng::{CounterRng, TAG_KMEANS};
use rayon::prelude::*;

/// Row norm below which an archetype counts as unused and is reset.
const DEGENERATE_ROW_NORM: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct AAConfig {
    pub k: usize,
    /// Stop when the relative objective decrease over one outer iteration
    /// falls below this.
    pub rel_tol: f64,
    pub max_outer_iters: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
    /// Reset archetypes whose B-row collapses to zero.
    pub degenerate_reset: bool,
}

impl AAConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        AAConfig {
            k,
            rel_tol: 1e-3,
            max_outer_iters: 200,
            kmeans_iters: 25,
            seed,
            degenerate_reset: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::contract("k must be at least 1"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::contract(format!(
                "rel_tol = {} outside (0, 1)",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Fitted model: archetype weights A (dictionary × k), projection
/// coefficients B (k × N), the archetypes dict·A, and the recorded
/// objective after every half-step.
#[derive(Clone, Debug)]
pub struct AAModel {
    pub a: StochasticMatrix,
    pub b: StochasticMatrix,
    pub archetypes: DenseMatrix,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl AAModel {
    pub fn k(&self) -> usize {
        self.a.cols()
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// k-means++ seeding over the columns of x: first index uniform, then each
/// next index drawn with probability proportional to squared distance from
/// the chosen set.
fn kmeanspp_seed_indices(x: &DenseMatrix, k: usize, rng: &mut CounterRng) -> Vec<usize> {
    let n = x.cols();
    let mut chosen = Vec::with_capacity(k);
    let first = rng.next_index(n);
    chosen.push(first);
    let mut d2: Vec<f64> = (0..n)
        .map(|j| squared_distance(x.col(j), x.col(first)))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            // All remaining points coincide with a center; spread by index.
            (0..n).find(|j| !chosen.contains(j)).unwrap_or(0)
        } else {
            let mut u = rng.next_f64() * total;
            let mut pick = n - 1;
            for (j, &w) in d2.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    pick = j;
                    break;
                }
            }
            pick
        };
        chosen.push(idx);
        for (j, d) in d2.iter_mut().enumerate() {
            let nd = squared_distance(x.col(j), x.col(idx));
            if nd < *d {
                *d = nd;
            }
        }
    }
    chosen
}

/// k-means++ seeding, Lloyd refinement, then snapping each center to its
/// nearest data column (distinct columns enforced). Returns the one-hot
/// initial A.
pub fn kmeans_init(
    x: &DenseMatrix,
    k: usize,
    seed: u64,
    iters: usize,
) -> Result<StochasticMatrix> {
    let n = x.cols();
    if k > n {
        return Err(Error::contract(format!(
            "kmeans_init: k = {k} exceeds N = {n}"
        )));
    }
    if k == 0 {
        return Err(Error::contract("kmeans_init: k must be at least 1"));
    }
    let d = x.rows();
    let mut rng = CounterRng::new(seed).substream(TAG_KMEANS);
    let seeds = kmeanspp_seed_indices(x, k, &mut rng);
    let mut centers: Vec<Vec<f64>> = seeds.iter().map(|&j| x.col(j).to_vec()).collect();

    let mut assignment = vec![0usize; n];
    for _ in 0..iters {
        let mut changed = false;
        for j in 0..n {
            let mut best = f64::INFINITY;
            let mut arg = 0usize;
            for (c, center) in centers.iter().enumerate() {
                let dist = squared_distance(x.col(j), center);
                if dist < best {
                    best = dist;
                    arg = c;
                }
            }
            if assignment[j] != arg {
                assignment[j] = arg;
                changed = true;
            }
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut sizes = vec![0usize; k];
        for j in 0..n {
            let c = assignment[j];
            axpy(1.0, x.col(j), &mut sums[c]);
            sizes[c] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                for (s, ctr) in sums[c].iter().zip(centers[c].iter_mut()) {
                    *ctr = s / sizes[c] as f64;
                }
            } // empty cluster keeps its previous center
        }
        if !changed {
            break;
        }
    }

    // Snap each center to the nearest still-unused data column.
    let mut used = vec![false; n];
    let mut indices = Vec::with_capacity(k);
    for center in &centers {
        let mut best = f64::INFINITY;
        let mut arg = usize::MAX;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let dist = squared_distance(center, x.col(j));
            if dist < best {
                best = dist;
                arg = j;
            }
        }
        used[arg] = true;
        indices.push(arg);
    }
    StochasticMatrix::selection(n, &indices)
}

/// Initial A for a reduced problem: k-means++ seeding over the dictionary
/// columns, no Lloyd refinement.
fn dictionary_seed_init(dict: &DenseMatrix, k: usize, seed: u64) -> Result<StochasticMatrix> {
    if k > dict.cols() {
        return Err(Error::contract(format!(
            "init: k = {k} exceeds dictionary size {}",
            dict.cols()
        )));
    }
    let mut rng = CounterRng::new(seed).substream(TAG_KMEANS);
    let indices = kmeanspp_seed_indices(dict, k, &mut rng);
    StochasticMatrix::selection(dict.cols(), &indices)
}

/// Projection coefficients of every column of x onto conv(z), warm-started
/// from the matching column of `warm` when shapes agree. Columns are
/// independent solves and run in parallel.
pub fn update_b(
    x: &DenseMatrix,
    z: &DenseMatrix,
    warm: Option<&StochasticMatrix>,
) -> Result<StochasticMatrix> {
    if z.rows() != x.rows() {
        return Err(Error::contract(format!(
            "update_b: archetypes are {}x{} but data is {}x{}",
            z.rows(),
            z.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let k = z.cols();
    let n = x.cols();
    let solver = SimplexLsq::new(z);
    let warm_ok = warm.map_or(false, |w| w.rows() == k && w.cols() == n);

    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let start = if warm_ok {
                Some(warm.unwrap().inner().col(j))
            } else {
                None
            };
            solver.solve(x.col(j), start).point.into_vec()
        })
        .collect();

    let mut b = DenseMatrix::zeros(k, n);
    for (j, col) in columns.iter().enumerate() {
        b.col_mut(j).copy_from_slice(col);
    }
    StochasticMatrix::new(b)
}

/// State threaded through the Gauss-Seidel sweep: Z = dict·A and the
/// residual R = x − Z·B are maintained incrementally.
struct SweepState {
    z: DenseMatrix,
    residual: DenseMatrix,
}

impl SweepState {
    fn new(
        x: &DenseMatrix,
        dict: &DenseMatrix,
        a: &StochasticMatrix,
        b: &StochasticMatrix,
    ) -> Result<Self> {
        let z = matmul(dict, a.inner())?;
        let zb = matmul(&z, b.inner())?;
        Ok(SweepState {
            residual: x.sub(&zb),
            z,
        })
    }

    fn objective(&self) -> f64 {
        let n = self.residual.cols().max(1);
        self.residual.frobenius_norm() / (n as f64).sqrt()
    }
}

/// One Gauss-Seidel sweep over the archetypes: for each i, solve the
/// simplex least-squares problem toward the target Dᵢ·Bᵢᵀ/‖Bᵢ‖² and refresh
/// Z (and the maintained residual) before moving on. An archetype whose B
/// row has collapsed is reset to the dictionary column nearest the
/// worst-fit data point.
fn gauss_seidel_sweep(
    x: &DenseMatrix,
    dict: &DenseMatrix,
    dict_solver: &SimplexLsq,
    a: &StochasticMatrix,
    b: &StochasticMatrix,
    state: &mut SweepState,
    degenerate_reset: bool,
) -> Result<StochasticMatrix> {
    let k = a.cols();
    let n = b.cols();
    let d = dict.rows();
    let mut a_new = a.inner().clone();

    let mut b_row = vec![0.0; n];
    for i in 0..k {
        for j in 0..n {
            b_row[j] = b.inner().get(i, j);
        }
        let row_norm_sq = dot(&b_row, &b_row);

        let coeffs = if row_norm_sq < DEGENERATE_ROW_NORM * DEGENERATE_ROW_NORM {
            if !degenerate_reset {
                continue;
            }
            // Worst-fit data column, then its nearest dictionary column.
            let mut worst = 0usize;
            let mut worst_norm = -1.0;
            for j in 0..n {
                let rn = norm2(state.residual.col(j));
                if rn > worst_norm {
                    worst_norm = rn;
                    worst = j;
                }
            }
            let target = x.col(worst);
            let mut best = f64::INFINITY;
            let mut arg = 0usize;
            for c in 0..dict.cols() {
                let dist = squared_distance(dict.col(c), target);
                if dist < best {
                    best = dist;
                    arg = c;
                }
            }
            let mut e = vec![0.0; dict.cols()];
            e[arg] = 1.0;
            e
        } else {
            // tᵢ = Dᵢ·Bᵢᵀ/‖Bᵢ‖² = Z[:,i] + R·Bᵢᵀ/‖Bᵢ‖².
            let mut target = state.z.col(i).to_vec();
            for j in 0..n {
                if b_row[j] != 0.0 {
                    axpy(b_row[j] / row_norm_sq, state.residual.col(j), &mut target);
                }
            }
            dict_solver
                .solve(&target, Some(&a_new.col(i).to_vec()))
                .point
                .into_vec()
        };

        // Refresh Z[:, i] and the residual: R += (z_old − z_new)·Bᵢ.
        let z_new = dict.matvec(&coeffs);
        let mut delta = vec![0.0; d];
        for (dv, (zo, zn)) in delta.iter_mut().zip(state.z.col(i).iter().zip(&z_new)) {
            *dv = zo - zn;
        }
        for j in 0..n {
            if b_row[j] != 0.0 {
                axpy(b_row[j], &delta, state.residual.col_mut(j));
            }
        }
        state.z.col_mut(i).copy_from_slice(&z_new);
        a_new.col_mut(i).copy_from_slice(&coeffs);
    }
    StochasticMatrix::new(a_new)
}

/// One Gauss-Seidel pass re-optimizing every archetype once.
pub fn update_a_gauss_seidel(
    x: &DenseMatrix,
    dict: &DenseMatrix,
    a: &StochasticMatrix,
    b: &StochasticMatrix,
) -> Result<StochasticMatrix> {
    let solver = SimplexLsq::new(dict);
    let mut state = SweepState::new(x, dict, a, b)?;
    gauss_seidel_sweep(x, dict, &solver, a, b, &mut state, true)
}

/// Alternating minimization. `dict = None` fits archetypes over the data
/// itself (k-means initialization); `Some(dict)` fits over the given
/// dictionary (k-means++ seeding over its columns). Stops when the
/// relative objective decrease over a full outer iteration drops below
/// `cfg.rel_tol`, then runs one final B-update.
pub fn fit(x: &DenseMatrix, dict: Option<&DenseMatrix>, cfg: &AAConfig) -> Result<AAModel> {
    cfg.validate()?;
    let dict_ref = dict.unwrap_or(x);
    if dict_ref.rows() != x.rows() {
        return Err(Error::contract(format!(
            "fit: dictionary is {}x{} but data is {}x{}",
            dict_ref.rows(),
            dict_ref.cols(),
            x.rows(),
            x.cols()
        )));
    }

    let mut a = match dict {
        None => kmeans_init(x, cfg.k, cfg.seed, cfg.kmeans_iters)?,
        Some(d) => dictionary_seed_init(d, cfg.k, cfg.seed)?,
    };
    let mut b = StochasticMatrix::uniform(cfg.k, x.cols());

    let dict_solver = SimplexLsq::new(dict_ref);
    let mut state = SweepState::new(x, dict_ref, &a, &b)?;
    let mut obj_prev = state.objective();
    if !obj_prev.is_finite() {
        return Err(Error::numeric("non-finite objective at initialization"));
    }

    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_outer_iters {
        let z = state.z.clone();
        b = update_b(x, &z, Some(&b))?;
        state = SweepState::new(x, dict_ref, &a, &b)?;
        trace.push(state.objective());

        a = gauss_seidel_sweep(x, dict_ref, &dict_solver, &a, &b, &mut state, cfg.degenerate_reset)?;
        let obj = state.objective();
        trace.push(obj);
        if !obj.is_finite() {
            return Err(Error::numeric(format!(
                "non-finite objective; trace so far: {trace:?}"
            )));
        }

        if obj_prev == 0.0 {
            converged = true;
            break;
        }
        if (obj_prev - obj) / obj_prev < cfg.rel_tol {
            converged = true;
            break;
        }
        obj_prev = obj;
    }

    // Final B-update.
    let z = state.z.clone();
    b = update_b(x, &z, Some(&b))?;
    state = SweepState::new(x, dict_ref, &a, &b)?;
    trace.push(state.objective());

    Ok(AAModel {
        archetypes: state.z,
        a,
        b,
        objective_trace: trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::aa_objective;
    use crate::qp::simplex_lsq;
    use crate::reference;
    use crate::rng::CounterRng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = CounterRng::new(seed);
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, rng.next_gaussian());
            }
        }
        m
    }

    #[test]
    fn kmeans_k_equals_n_is_a_permutation() {
        let x = random_matrix(3, 5, 300);
        let a = kmeans_init(&x, 5, 1, 10).unwrap();
        let mut hit = vec![false; 5];
        for c in 0..5 {
            let col = a.inner().col(c);
            let ones: Vec<usize> = (0..5).filter(|&i| col[i] == 1.0).collect();
            assert_eq!(ones.len(), 1);
            hit[ones[0]] = true;
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn kmeans_k_one_selects_column_nearest_mean() {
        let x = random_matrix(4, 30, 301);
        let a = kmeans_init(&x, 1, 2, 25).unwrap();
        let chosen = (0..30).find(|&j| a.inner().get(j, 0) == 1.0).unwrap();
        let mut mean = vec![0.0; 4];
        for j in 0..30 {
            axpy(1.0 / 30.0, x.col(j), &mut mean);
        }
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for j in 0..30 {
            let d = squared_distance(&mean, x.col(j));
            if d < best {
                best = d;
                arg = j;
            }
        }
        assert_eq!(chosen, arg);
    }

    #[test]
    fn kmeans_separates_well_spread_blobs() {
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = CounterRng::new(4000 + seed);
            let centers = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]];
            let mut cols = Vec::new();
            let mut labels = Vec::new();
            for (label, c) in centers.iter().enumerate() {
                for _ in 0..12 {
                    cols.push(vec![
                        c[0] + rng.next_gaussian(),
                        c[1] + rng.next_gaussian(),
                    ]);
                    labels.push(label);
                }
            }
            let x = DenseMatrix::from_columns(&cols).unwrap();
            let a = kmeans_init(&x, 3, seed, 25).unwrap();
            let mut found = [false; 3];
            for c in 0..3 {
                let idx = (0..36).find(|&i| a.inner().get(i, c) == 1.0).unwrap();
                found[labels[idx]] = true;
            }
            if found.iter().all(|&f| f) {
                hits += 1;
            }
        }
        assert!(hits >= 95, "distinct blobs chosen in {hits}/100 seeds");
    }

    #[test]
    fn update_b_projects_interior_points_exactly() {
        let z = random_matrix(3, 3, 302);
        // Data strictly inside conv(z).
        let w = reference::random_stochastic(3, 6, 303);
        let x = matmul(&z, w.inner()).unwrap();
        let b = update_b(&x, &z, None).unwrap();
        let zb = matmul(&z, b.inner()).unwrap();
        for j in 0..6 {
            let r = squared_distance(zb.col(j), x.col(j)).sqrt();
            assert!(r < 1e-6, "column {j} residual {r}");
        }
    }

    #[test]
    fn update_b_identity_case() {
        let z = random_matrix(4, 3, 304);
        let b = update_b(&z, &z, None).unwrap();
        let zb = matmul(&z, b.inner()).unwrap();
        let rel = z.sub(&zb).frobenius_norm() / z.frobenius_norm();
        assert!(rel < 1e-8);
    }

    #[test]
    fn update_b_matches_grid_oracle() {
        let z = random_matrix(2, 3, 305);
        let x = random_matrix(2, 5, 306);
        let b = update_b(&x, &z, None).unwrap();
        for j in 0..5 {
            let col: Vec<f64> = b.inner().col(j).to_vec();
            let mut resid = z.matvec(&col);
            for (r, xv) in resid.iter_mut().zip(x.col(j)) {
                *r -= xv;
            }
            let ours = 0.5 * dot(&resid, &resid);
            let grid = reference::barycentric_grid_min(&z, x.col(j), 1e-3);
            assert!(ours <= grid + 1e-5, "column {j}: {ours} vs {grid}");
        }
    }

    #[test]
    fn gauss_seidel_k1_matches_weighted_mean_formula() {
        // With k = 1 and uniform B the target collapses to the data mean.
        let x = random_matrix(3, 8, 307);
        let a0 = StochasticMatrix::selection(8, &[2]).unwrap();
        let b = StochasticMatrix::uniform(1, 8);
        let a1 = update_a_gauss_seidel(&x, &x, &a0, &b).unwrap();

        let mut mean = vec![0.0; 3];
        for j in 0..8 {
            axpy(1.0 / 8.0, x.col(j), &mut mean);
        }
        let direct = simplex_lsq(&x, &mean).unwrap();
        let za = matmul(&x, a1.inner()).unwrap();
        let fitted = za.col(0);
        let refit = x.matvec(direct.point.coeffs());
        assert!(squared_distance(fitted, &refit).sqrt() < 1e-6);
    }

    #[test]
    fn gauss_seidel_fixed_point_at_zero_objective() {
        let tri = random_matrix(2, 3, 308);
        let x = tri.column_subset(&[0, 1, 2, 0, 1, 2]);
        let a = StochasticMatrix::selection(6, &[0, 1, 2]).unwrap();
        let b = StochasticMatrix::selection(3, &[0, 1, 2, 0, 1, 2]).unwrap();
        let a1 = update_a_gauss_seidel(&x, &x, &a, &b).unwrap();
        let obj = aa_objective(&x, &x, &a1, &b).unwrap();
        assert!(obj < 1e-10, "objective {obj}");
    }

    #[test]
    fn gauss_seidel_descends_and_matches_grid_reoptimization() {
        let x = random_matrix(3, 8, 309);
        let a0 = reference::random_stochastic(8, 3, 310);
        let b = reference::random_stochastic(3, 8, 311);
        let before = aa_objective(&x, &x, &a0, &b).unwrap();
        let a1 = update_a_gauss_seidel(&x, &x, &a0, &b).unwrap();
        let after = aa_objective(&x, &x, &a1, &b).unwrap();
        assert!(after <= before + 1e-12, "{after} vs {before}");
    }

    #[test]
    fn fit_distinct_points_reaches_zero() {
        let x = random_matrix(4, 3, 312);
        let mut cfg = AAConfig::new(3, 5);
        cfg.rel_tol = 1e-6;
        let model = fit(&x, None, &cfg).unwrap();
        assert!(model.final_objective() < 1e-8);
        assert!(model.objective_trace.len() <= 2 * 2 + 1);
    }

    #[test]
    fn fit_recovers_planted_vertices() {
        let vertices = random_matrix(5, 3, 313);
        let mut cols: Vec<Vec<f64>> = (0..3).map(|j| vertices.col(j).to_vec()).collect();
        let mut rng = CounterRng::new(314);
        for _ in 0..40 {
            let mut w = [0.0f64; 3];
            let mut s = 0.0;
            for x in w.iter_mut() {
                *x = -(1.0 - rng.next_f64()).ln();
                s += *x;
            }
            let mut p = vec![0.0; 5];
            for (j, &wj) in w.iter().enumerate() {
                axpy(wj / s, vertices.col(j), &mut p);
            }
            cols.push(p);
        }
        let x = DenseMatrix::from_columns(&cols).unwrap();
        let mut cfg = AAConfig::new(3, 6);
        cfg.rel_tol = 1e-7;
        let model = fit(&x, None, &cfg).unwrap();
        assert!(
            model.final_objective() < 1e-6,
            "objective {}",
            model.final_objective()
        );
        let dist = reference::hausdorff_point_sets(&model.archetypes, &vertices);
        assert!(dist < 1e-4, "vertex recovery distance {dist}");
    }

    #[test]
    fn loose_tolerance_stops_after_first_iteration() {
        let x = random_matrix(4, 20, 315);
        let mut cfg = AAConfig::new(3, 7);
        cfg.rel_tol = 0.99;
        let model = fit(&x, None, &cfg).unwrap();
        // One outer iteration (B, A) plus the final B-update.
        assert_eq!(model.objective_trace.len(), 3);
        assert!(model.converged);
    }

    #[test]
    fn trace_is_monotone_and_factors_feasible() {
        for seed in 0..5u64 {
            let x = random_matrix(6, 40, 400 + seed);
            let mut cfg = AAConfig::new(4, seed);
            cfg.rel_tol = 1e-4;
            let model = fit(&x, None, &cfg).unwrap();
            for w in model.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "trace rose: {:?}", w);
            }
            // A and B re-validate.
            assert!(StochasticMatrix::new(model.a.inner().clone()).is_ok());
            assert!(StochasticMatrix::new(model.b.inner().clone()).is_ok());
            // Archetypes live in conv(dict).
            for c in 0..model.k() {
                let sol = simplex_lsq(&x, model.archetypes.col(c)).unwrap();
                assert!(sol.residual_norm < 1e-8);
            }
        }
    }

    #[test]
    fn fit_on_svd_representation_matches_fit_on_data() {
        // Both subproblems touch the data only through inner products, so a
        // fit on Σ Vᵀ must track a fit on X step for step.
        let x = random_matrix(6, 25, 316);
        let f = crate::decomp::svd_dense(&x).unwrap();
        let rep = f.truncated_representation(6);
        let cfg = AAConfig::new(3, 8);
        let m1 = fit(&x, None, &cfg).unwrap();
        let m2 = fit(&rep, None, &cfg).unwrap();
        assert_eq!(m1.objective_trace.len(), m2.objective_trace.len());
        for (a, b) in m1.objective_trace.iter().zip(&m2.objective_trace) {
            assert!((a - b).abs() <= 1e-7 * a.max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_archetype_is_reset() {
        // Two identical archetypes: B routes everything through one of them,
        // the other's row collapses, and the reset gives it a fresh column.
        let x = random_matrix(3, 10, 317);
        let a0 = StochasticMatrix::selection(10, &[0, 0]).unwrap();
        let b = update_b(&x, &matmul(&x, a0.inner()).unwrap(), None).unwrap();
        // Force row 1 to zero by replacing B with a one-hot on row 0.
        let b0 = StochasticMatrix::selection(2, &vec![0; 10]).unwrap();
        let _ = b; // the projection B is not needed past this point
        let a1 = update_a_gauss_seidel(&x, &x, &a0, &b0).unwrap();
        let col1 = a1.inner().col(1);
        assert!((col1.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        // Reset picked a single dictionary column.
        assert_eq!(col1.iter().filter(|&&v| v == 1.0).count(), 1);
    }
}
