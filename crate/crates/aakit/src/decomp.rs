//! Matrix factorizations: Householder QR with dependent-column dropping,
//! Golub–Kahan SVD (bidiagonalization + implicit-shift QR on the bidiagonal),
//! and a power-iteration spectral norm.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, DenseMatrix};
use crate::rng::{CounterRng, TAG_POWER_ITER};

/// Relative pivot threshold below which a column counts as numerically
/// dependent on its predecessors and is dropped from Q.
const QR_DROP_REL: f64 = 1e-12;

/// Thin SVD factors: `u · diag(sigma) · vᵀ` reconstructs the input.
/// `sigma` is nonincreasing and nonnegative; `u` and `v` have orthonormal
/// columns.
#[derive(Clone, Debug)]
pub struct SVDFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SVDFactors {
    /// `Σ_p V_pᵀ`: the representation of the data under the first p left
    /// singular vectors, one row per retained direction.
    pub fn truncated_representation(&self, p: usize) -> DenseMatrix {
        let p = p.min(self.sigma.len());
        let n = self.v.rows();
        let mut rep = DenseMatrix::zeros(p, n);
        for j in 0..n {
            let col = rep.col_mut(j);
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.sigma[i] * self.v.get(j, i);
            }
        }
        rep
    }

    /// Rank-p reconstruction `U_p Σ_p V_pᵀ`.
    pub fn truncated_reconstruction(&self, p: usize) -> DenseMatrix {
        let p = p.min(self.sigma.len());
        let m = self.u.rows();
        let n = self.v.rows();
        let mut out = DenseMatrix::zeros(m, n);
        for j in 0..n {
            let col = out.col_mut(j);
            for k in 0..p {
                axpy(self.sigma[k] * self.v.get(j, k), self.u.col(k), col);
            }
        }
        out
    }
}

struct Reflector {
    /// Row at which the reflector starts (its pivot position).
    pos: usize,
    /// Householder vector with implicit leading 1; length rows − pos − 1.
    tail: Vec<f64>,
    tau: f64,
}

impl Reflector {
    /// Applies `H = I − tau·v·vᵀ` to `x[pos..]`.
    fn apply(&self, x: &mut [f64]) {
        let seg = &mut x[self.pos..];
        let mut d = seg[0];
        for (i, &vi) in self.tail.iter().enumerate() {
            d += vi * seg[i + 1];
        }
        d *= self.tau;
        seg[0] -= d;
        for (i, &vi) in self.tail.iter().enumerate() {
            seg[i + 1] -= d * vi;
        }
    }
}

/// Builds a Householder reflector zeroing `x[1..]`; returns the reflector
/// tail/tau and the resulting pivot value (−sigma).
fn make_reflector(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = norm2(x);
    let alpha = x[0];
    let sigma = if alpha >= 0.0 { norm } else { -norm };
    let v0 = alpha + sigma;
    let tail: Vec<f64> = x[1..].iter().map(|&e| e / v0).collect();
    let tau = v0 / sigma;
    (tail, tau, -sigma)
}

/// Householder QR with dependent-column dropping.
///
/// Q has one orthonormal column per retained pivot, R is the matching
/// staircase-triangular coefficient matrix over *all* input columns, so
/// `Q · R` reconstructs the input even when columns were dropped. A column
/// whose remaining norm falls below 1e-12 × (largest column norm) yields no
/// pivot. Signs are normalized so retained diagonal entries of R are
/// nonnegative.
pub fn qr_householder(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = (a.rows(), a.cols());
    let scale = (0..n).fold(0.0f64, |s, j| s.max(norm2(a.col(j))));
    if scale == 0.0 || n == 0 || m == 0 {
        return Ok((DenseMatrix::zeros(m, 0), DenseMatrix::zeros(0, n)));
    }
    if !a.is_finite() {
        return Err(Error::contract("qr_householder: non-finite input"));
    }

    let mut reflectors: Vec<Reflector> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut col = vec![0.0; m];

    for j in 0..n {
        col.copy_from_slice(a.col(j));
        for refl in &reflectors {
            refl.apply(&mut col);
        }
        let r = reflectors.len();
        let pivot = norm2(&col[r..]);
        if pivot < QR_DROP_REL * scale || r == m {
            // Dependent column: coefficients only, no new basis vector.
            r_cols.push(col[..r].to_vec());
        } else {
            let (tail, tau, diag) = make_reflector(&col[r..]);
            let mut rc = col[..r].to_vec();
            rc.push(diag);
            r_cols.push(rc);
            reflectors.push(Reflector { pos: r, tail, tau });
        }
    }

    let rank = reflectors.len();
    let mut q = DenseMatrix::zeros(m, rank);
    let mut e = vec![0.0; m];
    for c in 0..rank {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        for refl in reflectors.iter().rev() {
            refl.apply(&mut e);
        }
        q.col_mut(c).copy_from_slice(&e);
    }

    let mut r = DenseMatrix::zeros(rank, n);
    for (j, rc) in r_cols.iter().enumerate() {
        r.col_mut(j)[..rc.len()].copy_from_slice(rc);
    }

    // Flip signs so pivots are nonnegative (identity maps to Q = R = I).
    let mut pivot_row = 0usize;
    for j in 0..n {
        if pivot_row < rank && r_cols[j].len() == pivot_row + 1 {
            if r.get(pivot_row, j) < 0.0 {
                for jj in j..n {
                    let v = r.get(pivot_row, jj);
                    r.set(pivot_row, jj, -v);
                }
                for i in 0..m {
                    let v = q.get(i, pivot_row);
                    q.set(i, pivot_row, -v);
                }
            }
            pivot_row += 1;
        }
    }

    Ok((q, r))
}

/// Orthonormal basis of a matrix's column space (the Q of its QR).
pub(crate) fn orthonormalize(a: &DenseMatrix) -> DenseMatrix {
    qr_householder(a).expect("finite input").0
}

// ── Golub–Kahan SVD ──────────────────────────────────────────────────

/// Givens rotation (c, s) with c·a + s·b = r and −s·a + c·b = 0.
#[inline]
fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Reduces `work` (m×n, m ≥ n) to upper bidiagonal form, returning the
/// diagonal, superdiagonal and the accumulated thin U (m×n) and V (n×n).
fn bidiagonalize(work: &mut DenseMatrix) -> (Vec<f64>, Vec<f64>, DenseMatrix, DenseMatrix) {
    let (m, n) = (work.rows(), work.cols());
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut left: Vec<Option<Reflector>> = Vec::with_capacity(n);
    let mut right: Vec<Option<Reflector>> = Vec::with_capacity(n);

    let mut buf = vec![0.0; m.max(n)];
    for k in 0..n {
        // Left reflector zeroes work[k+1.., k].
        let seg: Vec<f64> = (k..m).map(|i| work.get(i, k)).collect();
        let seg_norm = norm2(&seg);
        if seg_norm > 0.0 && (m - k) > 1 {
            let (tail, tau, d) = make_reflector(&seg);
            let refl = Reflector { pos: k, tail, tau };
            for j in (k + 1)..n {
                let colbuf = &mut buf[..m];
                colbuf.copy_from_slice(work.col(j));
                refl.apply(colbuf);
                work.col_mut(j).copy_from_slice(colbuf);
            }
            diag[k] = d;
            left.push(Some(refl));
        } else {
            diag[k] = work.get(k, k);
            left.push(None);
        }

        // Right reflector zeroes work[k, k+2..].
        if k + 2 < n {
            let seg: Vec<f64> = ((k + 1)..n).map(|j| work.get(k, j)).collect();
            let seg_norm = norm2(&seg);
            if seg_norm > 0.0 {
                let (tail, tau, d) = make_reflector(&seg);
                let refl = Reflector {
                    pos: k + 1,
                    tail,
                    tau,
                };
                // Apply from the right to every row below k.
                for i in (k + 1)..m {
                    let rowbuf = &mut buf[..n];
                    for (j, rb) in rowbuf.iter_mut().enumerate() {
                        *rb = work.get(i, j);
                    }
                    refl.apply(rowbuf);
                    for j in (k + 1)..n {
                        work.set(i, j, rowbuf[j]);
                    }
                }
                off[k] = d;
                right.push(Some(refl));
            } else {
                off[k] = 0.0;
                right.push(None);
            }
        } else if k + 1 < n {
            off[k] = work.get(k, k + 1);
            right.push(None);
        }
    }

    // Thin U = H_0 ⋯ H_{n−1} applied to the first n identity columns.
    let mut u = DenseMatrix::zeros(m, n);
    let mut e = vec![0.0; m];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        for refl in left.iter().rev().flatten() {
            refl.apply(&mut e);
        }
        u.col_mut(c).copy_from_slice(&e);
    }
    let mut v = DenseMatrix::zeros(n, n);
    let mut ev = vec![0.0; n];
    for c in 0..n {
        ev.iter_mut().for_each(|x| *x = 0.0);
        ev[c] = 1.0;
        for refl in right.iter().rev().flatten() {
            refl.apply(&mut ev);
        }
        v.col_mut(c).copy_from_slice(&ev);
    }
    (diag, off, u, v)
}

#[inline]
fn rotate_cols(m: &mut DenseMatrix, j1: usize, j2: usize, c: f64, s: f64) {
    let rows = m.rows();
    for i in 0..rows {
        let a = m.get(i, j1);
        let b = m.get(i, j2);
        m.set(i, j1, c * a + s * b);
        m.set(i, j2, c * b - s * a);
    }
}

/// Implicit-shift QR on the bidiagonal (Wilkinson shift from the trailing
/// 2×2 of BᵀB), accumulating rotations into U and V. Returns the number of
/// sweeps used, or an error past `max_sweeps`.
fn bidiagonal_qr(
    diag: &mut [f64],
    off: &mut [f64],
    u: &mut DenseMatrix,
    v: &mut DenseMatrix,
    max_sweeps: usize,
) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut sweeps = 0usize;
    let mut hi = n - 1;

    while hi > 0 {
        let thr = eps * (diag[hi - 1].abs() + diag[hi].abs()) + f64::MIN_POSITIVE;
        if off[hi - 1].abs() <= thr {
            off[hi - 1] = 0.0;
            hi -= 1;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 {
            let thr = eps * (diag[lo - 1].abs() + diag[lo].abs()) + f64::MIN_POSITIVE;
            if off[lo - 1].abs() <= thr {
                off[lo - 1] = 0.0;
                break;
            }
            lo -= 1;
        }

        sweeps += 1;
        if sweeps > max_sweeps {
            let smax = diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
            let smin = diag.iter().fold(f64::INFINITY, |a, d| a.min(d.abs()));
            return Err(Error::numeric(format!(
                "bidiagonal QR did not converge in {max_sweeps} sweeps; \
                 condition estimate {:.3e}",
                if smin > 0.0 { smax / smin } else { f64::INFINITY }
            )));
        }

        // A negligible diagonal entry makes the shift meaningless: chase the
        // adjacent superdiagonal off the bottom with left rotations instead.
        let scale = (lo..=hi).fold(0.0f64, |a, i| {
            let mut s = a.max(diag[i].abs());
            if i < hi {
                s = s.max(off[i].abs());
            }
            s
        });
        let mut deflated = false;
        for idx in lo..hi {
            if diag[idx].abs() <= eps * scale {
                diag[idx] = 0.0;
                let mut z = off[idx];
                off[idx] = 0.0;
                for j in (idx + 1)..=hi {
                    let (c, s) = givens(diag[j], z);
                    diag[j] = c * diag[j] + s * z;
                    if j < hi {
                        z = -s * off[j];
                        off[j] = c * off[j];
                    }
                    rotate_cols(u, j, idx, c, s);
                }
                deflated = true;
                break;
            }
        }
        if deflated {
            continue;
        }

        // Wilkinson shift.
        let d_hi = diag[hi];
        let d_h1 = diag[hi - 1];
        let e_h1 = off[hi - 1];
        let e_h2 = if hi >= 2 && hi - 2 >= lo { off[hi - 2] } else { 0.0 };
        let t11 = d_h1 * d_h1 + e_h2 * e_h2;
        let t12 = d_h1 * e_h1;
        let t22 = d_hi * d_hi + e_h1 * e_h1;
        let dd = (t11 - t22) / 2.0;
        let denom = dd + dd.signum() * (dd * dd + t12 * t12).sqrt();
        let mu = if denom != 0.0 { t22 - t12 * t12 / denom } else { t22 };

        let mut x = diag[lo] * diag[lo] - mu;
        let mut z = diag[lo] * off[lo];

        for k in lo..hi {
            let (c, s) = givens(x, z);
            if k > lo {
                off[k - 1] = c * x + s * z;
            }
            let dk = diag[k];
            let ek = off[k];
            let dk1 = diag[k + 1];
            diag[k] = c * dk + s * ek;
            off[k] = c * ek - s * dk;
            let bulge = s * dk1;
            diag[k + 1] = c * dk1;
            rotate_cols(v, k, k + 1, c, s);

            let (c2, s2) = givens(diag[k], bulge);
            diag[k] = c2 * diag[k] + s2 * bulge;
            let old_ek = off[k];
            let old_dk1 = diag[k + 1];
            off[k] = c2 * old_ek + s2 * old_dk1;
            diag[k + 1] = c2 * old_dk1 - s2 * old_ek;
            if k + 1 < hi {
                let old_ek1 = off[k + 1];
                x = off[k];
                z = s2 * old_ek1;
                off[k + 1] = c2 * old_ek1;
            }
            rotate_cols(u, k, k + 1, c2, s2);
        }
    }

    // Nonnegative singular values, sorted descending.
    for i in 0..n {
        if diag[i] < 0.0 {
            diag[i] = -diag[i];
            for r in 0..v.rows() {
                let val = v.get(r, i);
                v.set(r, i, -val);
            }
        }
    }
    for i in 0..n {
        let mut max_i = i;
        for j in (i + 1)..n {
            if diag[j] > diag[max_i] {
                max_i = j;
            }
        }
        if max_i != i {
            diag.swap(i, max_i);
            for r in 0..u.rows() {
                let a = u.get(r, i);
                let b = u.get(r, max_i);
                u.set(r, i, b);
                u.set(r, max_i, a);
            }
            for r in 0..v.rows() {
                let a = v.get(r, i);
                let b = v.get(r, max_i);
                v.set(r, i, b);
                v.set(r, max_i, a);
            }
        }
    }
    Ok(())
}

/// Thin SVD via Golub–Kahan bidiagonalization and implicit-shift QR.
///
/// Returns `min(m, n)` singular values, zeros included. Wide matrices are
/// handled by factoring the transpose and swapping U and V.
pub fn svd_dense(a: &DenseMatrix) -> Result<SVDFactors> {
    if !a.is_finite() {
        return Err(Error::contract("svd_dense: non-finite input"));
    }
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Ok(SVDFactors {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    if m < n {
        let f = svd_dense(&a.transpose())?;
        return Ok(SVDFactors {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        });
    }

    let mut work = a.clone();
    let (mut diag, mut off, mut u, mut v) = bidiagonalize(&mut work);
    bidiagonal_qr(&mut diag, &mut off, &mut u, &mut v, 100 * n)?;
    Ok(SVDFactors { u, sigma: diag, v })
}

/// Largest singular value by power iteration on aᵀa.
///
/// Relative tolerance 1e-10 on successive estimates, at most 10 000
/// iterations; a zero matrix returns 0.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return 0.0;
    }
    let mut rng = CounterRng::new(0x5CEC_7241).substream(TAG_POWER_ITER);
    let mut v = vec![0.0; n];
    rng.fill_gaussian(&mut v);
    let nv = norm2(&v);
    if nv == 0.0 {
        v.iter_mut().for_each(|x| *x = 1.0);
    } else {
        v.iter_mut().for_each(|x| *x /= nv);
    }

    let mut sigma_prev = 0.0;
    for _ in 0..10_000 {
        let w = a.matvec(&v);
        let sigma = norm2(&w);
        if sigma == 0.0 {
            return 0.0;
        }
        let g = a.matvec_t(&w);
        let ng = norm2(&g);
        if ng == 0.0 {
            return sigma;
        }
        for (vi, gi) in v.iter_mut().zip(&g) {
            *vi = gi / ng;
        }
        if (sigma - sigma_prev).abs() <= 1e-10 * sigma {
            return sigma;
        }
        sigma_prev = sigma;
    }
    sigma_prev
}

/// ‖a − b‖_F / max(‖a‖_F, floor): relative Frobenius discrepancy.
pub(crate) fn rel_frobenius(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let denom = a.frobenius_norm().max(f64::MIN_POSITIVE);
    a.sub(b).frobenius_norm() / denom
}

/// Max-abs entry of `qᵀq − I`; orthonormality check used in tests and the
/// sketch validity gate.
pub(crate) fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = matmul_tn_local(q, q);
    let mut worst = 0.0f64;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

fn matmul_tn_local(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut c = DenseMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        for i in 0..a.cols() {
            c.set(i, j, dot(a.col(i), b.col(j)));
        }
    }
    c
}
