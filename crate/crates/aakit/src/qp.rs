//! Simplex-constrained least squares: min ½‖Z b − y‖² over the probability
//! simplex, solved by accelerated projected gradient with function-value
//! restart. This one solver drives both halves of the alternating scheme:
//! the per-point projection step (small dimension, many right-hand sides)
//! and the per-archetype update (one right-hand side, dimension up to the
//! dictionary size).

use crate::decomp::spectral_norm;
use crate::error::{Error, Result};
use crate::matrix::{dot, matmul_tn, norm2, DenseMatrix};

/// Entries smaller than this are snapped to exact zero.
const SNAP_ZERO: f64 = 1e-12;
/// Allowed negativity before construction fails.
const NEG_TOLERANCE: f64 = 1e-10;
/// Allowed deviation of the coefficient sum from 1.
const SUM_TOLERANCE: f64 = 1e-10;

const MAX_ITERS: usize = 50_000;
const KKT_TOL: f64 = 1e-10;

/// Point on the probability simplex: nonnegative entries summing to one,
/// with sub-1e-12 entries stored as exact zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVector {
    coeffs: Vec<f64>,
}

impl SimplexVector {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::contract("empty simplex vector"));
        }
        let mut sum = 0.0;
        for v in coeffs.iter_mut() {
            if !v.is_finite() {
                return Err(Error::contract("non-finite simplex entry"));
            }
            if *v < -NEG_TOLERANCE {
                return Err(Error::contract(format!("negative simplex entry {v}")));
            }
            if *v < SNAP_ZERO {
                *v = 0.0;
            }
            sum += *v;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::contract(format!(
                "simplex entries sum to {sum}, expected 1"
            )));
        }
        Ok(SimplexVector { coeffs })
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0);
        SimplexVector {
            coeffs: vec![1.0 / k as f64; k],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }
}

/// Euclidean projection onto the probability simplex by sort-and-threshold:
/// sort descending, find the largest prefix whose running mean keeps the
/// shifted entries positive, subtract that threshold, clamp at zero.
pub fn project_onto_simplex(v: &[f64]) -> Result<SimplexVector> {
    if v.is_empty() {
        return Err(Error::contract("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("non-finite input to simplex projection"));
    }
    let mut w = v.to_vec();
    project_in_place(&mut w);
    SimplexVector::new(w)
}

/// The projection kernel without construction/validation overhead.
fn project_in_place(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let t = (prefix - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Solution of one simplex-constrained least-squares problem.
#[derive(Clone, Debug)]
pub struct QPSolution {
    pub point: SimplexVector,
    /// ‖Z b − y‖₂ at the returned point.
    pub residual_norm: f64,
    /// ‖b − Π(b − ∇f(b))‖∞ at the returned point.
    pub kkt_residual: f64,
    pub iterations: usize,
    /// False only on max-iteration exit; not an error.
    pub converged: bool,
}

/// Solver for min ½‖Z b − y‖² over the simplex, reusable across many
/// right-hand sides that share Z. The Lipschitz constant (spectral norm of
/// Z, squared) is estimated once at construction. When Z has at least as
/// many rows as columns the ZᵀZ Gram matrix is cached so per-iteration work
/// is O(k²); otherwise gradients use two matvecs against Z directly.
pub struct SimplexLsq<'a> {
    z: &'a DenseMatrix,
    lipschitz: f64,
    gram: Option<DenseMatrix>,
}

impl<'a> SimplexLsq<'a> {
    pub fn new(z: &'a DenseMatrix) -> Self {
        let s = spectral_norm(z);
        let gram = if z.cols() <= z.rows() && z.cols() > 0 {
            Some(matmul_tn(z, z))
        } else {
            None
        };
        SimplexLsq {
            z,
            lipschitz: s * s,
            gram,
        }
    }

    pub fn dimension(&self) -> usize {
        self.z.cols()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn solve(&self, y: &[f64], warm: Option<&[f64]>) -> QPSolution {
        self.solve_impl(y, warm, None)
    }

    /// As `solve`, additionally recording the best objective value seen
    /// after each iteration (used by the monotonicity tests).
    pub fn solve_traced(&self, y: &[f64], warm: Option<&[f64]>) -> (QPSolution, Vec<f64>) {
        let mut trace = Vec::new();
        let sol = self.solve_impl(y, warm, Some(&mut trace));
        (sol, trace)
    }

    fn solve_impl(
        &self,
        y: &[f64],
        warm: Option<&[f64]>,
        mut trace: Option<&mut Vec<f64>>,
    ) -> QPSolution {
        let k = self.z.cols();
        assert!(k >= 1, "solver requires at least one column");
        assert_eq!(y.len(), self.z.rows(), "right-hand side length mismatch");

        // Degenerate dictionary: f is constant, every feasible point is
        // optimal; return the uniform vector.
        if self.lipschitz <= f64::MIN_POSITIVE {
            let point = SimplexVector::uniform(k);
            return QPSolution {
                residual_norm: norm2(y),
                kkt_residual: 0.0,
                iterations: 0,
                converged: true,
                point,
            };
        }

        let zty = self.z.matvec_t(y);
        let yty = dot(y, y);
        let objective = |b: &[f64]| -> f64 {
            match &self.gram {
                Some(g) => {
                    let gb = g.matvec(b);
                    0.5 * (dot(b, &gb) - 2.0 * dot(b, &zty) + yty)
                }
                None => {
                    let r = self.z.matvec(b);
                    let mut acc = 0.0;
                    for (ri, yi) in r.iter().zip(y) {
                        let e = ri - yi;
                        acc += e * e;
                    }
                    0.5 * acc
                }
            }
        };
        let gradient = |b: &[f64]| -> Vec<f64> {
            match &self.gram {
                Some(g) => {
                    let mut gb = g.matvec(b);
                    for (gi, zi) in gb.iter_mut().zip(&zty) {
                        *gi -= zi;
                    }
                    gb
                }
                None => {
                    let mut r = self.z.matvec(b);
                    for (ri, yi) in r.iter_mut().zip(y) {
                        *ri -= yi;
                    }
                    self.z.matvec_t(&r)
                }
            }
        };

        // Exact objective via the explicit residual; immune to the
        // cancellation the cached-Gram formula suffers near zero residual.
        let exact_objective = |b: &[f64]| -> f64 {
            let r = self.z.matvec(b);
            let mut acc = 0.0;
            for (ri, yi) in r.iter().zip(y) {
                let e = ri - yi;
                acc += e * e;
            }
            0.5 * acc
        };

        let step = 1.0 / self.lipschitz;
        let tol = KKT_TOL * norm2(y).max(1.0);

        let mut x: Vec<f64> = match warm {
            Some(w) if w.len() == k => {
                let mut x = w.to_vec();
                project_in_place(&mut x);
                x
            }
            _ => vec![1.0 / k as f64; k],
        };
        let start = x.clone();
        let mut fx = objective(&x);
        let mut best_x = x.clone();
        let mut best_f = fx;
        if let Some(t) = trace.as_deref_mut() {
            t.push(best_f);
        }

        let unit_step_kkt = |b: &[f64], g: &[f64]| -> f64 {
            let mut proj: Vec<f64> = b.iter().zip(g).map(|(xi, gi)| xi - gi).collect();
            project_in_place(&mut proj);
            b.iter()
                .zip(&proj)
                .fold(0.0f64, |m, (a, p)| m.max((a - p).abs()))
        };

        let mut v = x.clone(); // extrapolation point
        let mut t_momentum = 1.0f64;
        let mut iterations = 0usize;
        let mut converged = false;

        while iterations < MAX_ITERS {
            iterations += 1;

            let g = gradient(&v);
            let mut x_new: Vec<f64> = v
                .iter()
                .zip(&g)
                .map(|(vi, gi)| vi - step * gi)
                .collect();
            project_in_place(&mut x_new);
            let mut f_new = objective(&x_new);

            if f_new > fx {
                // Function-value restart: momentum overshot, take a plain
                // projected-gradient step from the last iterate.
                t_momentum = 1.0;
                let g = gradient(&x);
                x_new = x
                    .iter()
                    .zip(&g)
                    .map(|(xi, gi)| xi - step * gi)
                    .collect();
                project_in_place(&mut x_new);
                f_new = objective(&x_new);
            }

            if f_new < best_f {
                best_f = f_new;
                best_x.copy_from_slice(&x_new);
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(best_f);
            }

            let g_new = gradient(&x_new);
            if unit_step_kkt(&x_new, &g_new) < tol {
                converged = true;
                break;
            }

            // Periodic polish: once the active face is identified, the
            // restricted exact solve meets the KKT test long before the
            // plain iteration drags the residual down.
            if iterations % 64 == 0 {
                if let Some(cand) = self.polish_on_support(&x_new, &zty) {
                    if exact_objective(&cand) <= exact_objective(&x_new)
                        && unit_step_kkt(&cand, &gradient(&cand)) < tol
                    {
                        x = cand;
                        converged = true;
                        break;
                    }
                }
            }

            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_momentum * t_momentum).sqrt());
            let coeff = (t_momentum - 1.0) / t_next;
            v = x_new
                .iter()
                .zip(&x)
                .map(|(xn, xo)| xn + coeff * (xn - xo))
                .collect();
            x = x_new;
            fx = f_new;
            t_momentum = t_next;
        }

        // Re-rank the candidates by the exact objective; the Gram-mode
        // best-tracking can be off by cancellation noise near zero.
        let mut best_exact = exact_objective(&best_x);
        for cand in [&x, &start] {
            let f = exact_objective(cand);
            if f < best_exact {
                best_exact = f;
                best_x.copy_from_slice(cand);
            }
        }

        // Polish: exact equality-constrained solve on the identified
        // support; adopt when feasible and no worse. Drives residuals to
        // solver precision when the optimum sits exactly on a face.
        if let Some(cand) = self.polish_on_support(&best_x, &zty) {
            let f_cand = exact_objective(&cand);
            if f_cand <= best_exact {
                best_exact = f_cand;
                best_x = cand;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(best_exact.min(best_f));
                }
            }
        }

        // Report at the best feasible iterate.
        let kkt_residual = unit_step_kkt(&best_x, &gradient(&best_x));
        let residual = (2.0 * best_exact).max(0.0).sqrt();
        let point = SimplexVector::new(best_x).expect("projected iterate is feasible");
        QPSolution {
            point,
            residual_norm: residual,
            kkt_residual,
            iterations,
            converged,
        }
    }
}

impl<'a> SimplexLsq<'a> {
    /// Solves the sum-one equality-constrained least squares restricted to
    /// the support of `b` (entries above 1e-10). Returns None when the
    /// support is too large, the reduced system is singular, or the
    /// solution leaves the simplex.
    fn polish_on_support(&self, b: &[f64], zty: &[f64]) -> Option<Vec<f64>> {
        const MAX_POLISH_SUPPORT: usize = 128;
        let support: Vec<usize> = b
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > 1e-10)
            .map(|(i, _)| i)
            .collect();
        let s = support.len();
        if s == 0 || s > MAX_POLISH_SUPPORT {
            return None;
        }

        // KKT system [G_S 1; 1ᵀ 0] [b_S; λ] = [ztyS; 1].
        let dim = s + 1;
        let mut m = vec![0.0; dim * dim];
        let mut rhs = vec![0.0; dim];
        for (ii, &ci) in support.iter().enumerate() {
            for (jj, &cj) in support.iter().enumerate() {
                let g = match &self.gram {
                    Some(g) => g.get(ci, cj),
                    None => dot(self.z.col(ci), self.z.col(cj)),
                };
                m[ii * dim + jj] = g;
            }
            m[ii * dim + s] = 1.0;
            m[s * dim + ii] = 1.0;
            rhs[ii] = zty[ci];
        }
        rhs[s] = 1.0;

        // Gaussian elimination with partial pivoting.
        for c in 0..dim {
            let (piv, piv_abs) = (c..dim)
                .map(|r| (r, m[r * dim + c].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
            if piv_abs < 1e-12 {
                return None;
            }
            if piv != c {
                for j in 0..dim {
                    m.swap(c * dim + j, piv * dim + j);
                }
                rhs.swap(c, piv);
            }
            for r in (c + 1)..dim {
                let f = m[r * dim + c] / m[c * dim + c];
                if f != 0.0 {
                    for j in c..dim {
                        m[r * dim + j] -= f * m[c * dim + j];
                    }
                    rhs[r] -= f * rhs[c];
                }
            }
        }
        let mut sol = vec![0.0; dim];
        for c in (0..dim).rev() {
            let mut acc = rhs[c];
            for j in (c + 1)..dim {
                acc -= m[c * dim + j] * sol[j];
            }
            sol[c] = acc / m[c * dim + c];
        }

        if sol[..s].iter().any(|&v| v < -1e-12 || !v.is_finite()) {
            return None;
        }
        let mut cand = vec![0.0; b.len()];
        for (ii, &ci) in support.iter().enumerate() {
            cand[ci] = sol[ii].max(0.0);
        }
        Some(cand)
    }
}

/// One-shot solve of min ½‖z b − y‖² over the simplex.
pub fn simplex_lsq(z: &DenseMatrix, y: &[f64]) -> Result<QPSolution> {
    if z.cols() == 0 {
        return Err(Error::contract("simplex_lsq requires k >= 1"));
    }
    if z.rows() != y.len() {
        return Err(Error::contract(format!(
            "simplex_lsq: z is {}x{} but y has length {}",
            z.rows(),
            z.cols(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) || !z.is_finite() {
        return Err(Error::contract("simplex_lsq: non-finite input"));
    }
    Ok(SimplexLsq::new(z).solve(y, None))
}
