//! Randomized block-Krylov low-rank sketching.
//!
//! From a Gaussian block S the iteration builds the subspace
//! span[XS, (XXᵀ)XS, …, (XXᵀ)^{s−1}XS], orthonormalizes it, and reads the
//! reduced representation off the SVD of XᵀQ. The reduced matrix x̃ (p×N)
//! plays the role of the data in every downstream stage; the basis L maps
//! it back: X ≈ L·x̃ = LLᵀX.

use crate::decomp::{orthonormality_defect, rel_frobenius, svd_dense};
use crate::error::{Error, Result};
use crate::matrix::{matmul, matmul_tn, DenseMatrix};
use crate::rng::{gaussian_matrix, CounterRng, TAG_RSVD_GAUSS};

/// Reduced representation x̃ = Σ_emd[1:p]·U_emd[:,1:p]ᵀ plus the orthonormal
/// basis L = Q·V_emd[:,1:p] mapping it back to the ambient space.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchResult {
    /// p×N reduced representation.
    pub x_tilde: DenseMatrix,
    /// d×p orthonormal basis.
    pub basis: DenseMatrix,
    /// Effective rank of the sketch (may be below the request when the
    /// Krylov block collapses).
    pub p: usize,
    /// Effective power parameter after the cap rule.
    pub s: usize,
    pub seed: u64,
}

/// Default power parameter ⌈ln n⌉, floored at 2.
pub fn krylov_default_s(n: usize) -> usize {
    assert!(n >= 2, "krylov_default_s requires n >= 2");
    ((n as f64).ln().ceil() as usize).max(2)
}

/// The raw Krylov block [XS, (XXᵀ)XS, …]; each application of XXᵀ acts on a
/// re-orthonormalized copy of the previous block so late powers do not
/// collapse onto the top singular direction. Spans the same subspace as the
/// unstabilized recurrence in exact arithmetic.
pub(crate) fn build_krylov(
    x: &DenseMatrix,
    p: usize,
    s: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    let n = x.cols();
    let gauss_base = CounterRng::new(seed).substream(TAG_RSVD_GAUSS);
    let sample = gaussian_matrix(n, p, &gauss_base);
    let first = matmul(x, &sample)?;

    let mut k = DenseMatrix::zeros(x.rows(), s * p);
    let mut width = 0usize;
    let mut copy_block = |k: &mut DenseMatrix, block: &DenseMatrix| {
        for j in 0..block.cols() {
            k.col_mut(width + j).copy_from_slice(block.col(j));
        }
        width += block.cols();
    };
    copy_block(&mut k, &first);

    let mut carrier = first;
    for _ in 1..s {
        let ortho = crate::decomp::orthonormalize(&carrier);
        if ortho.cols() == 0 {
            break;
        }
        let xt_o = matmul_tn(x, &ortho);
        let block = matmul(x, &xt_o)?;
        copy_block(&mut k, &block);
        carrier = block;
    }
    if width < k.cols() {
        k = k.column_subset(&(0..width).collect::<Vec<_>>());
    }
    Ok(k)
}

/// Block-Krylov sketch of x at rank p with power parameter s.
///
/// If p·s exceeds min(d, N), s is reduced to ⌊min(d,N)/p⌋ (never below 1)
/// with a warning; p alone exceeding min(d, N) is a contract violation.
pub fn block_krylov_sketch(
    x: &DenseMatrix,
    p: usize,
    s: usize,
    seed: u64,
) -> Result<SketchResult> {
    let (d, n) = (x.rows(), x.cols());
    let limit = d.min(n);
    if p == 0 || s == 0 {
        return Err(Error::contract("block_krylov_sketch requires p >= 1, s >= 1"));
    }
    if p > limit {
        return Err(Error::contract(format!(
            "approximation rank p = {p} exceeds min(d, N) = {limit}"
        )));
    }
    let mut s_eff = s;
    if p * s > limit {
        s_eff = (limit / p).max(1);
        log::warn!(
            "block_krylov_sketch: p*s = {} exceeds min(d, N) = {limit}; reducing s from {s} to {s_eff}",
            p * s
        );
    }

    let k = build_krylov(x, p, s_eff, seed)?;
    let (q, _) = crate::decomp::qr_householder(&k)?;
    if q.cols() == 0 {
        return Err(Error::numeric(
            "Krylov block has empty column space (zero data?)",
        ));
    }

    let x_emd = matmul_tn(x, &q); // N × c
    let factors = svd_dense(&x_emd)?;
    let p_eff = p.min(factors.sigma.len());

    // x̃ rows are σ_i · (U_emd column i)ᵀ.
    let mut x_tilde = DenseMatrix::zeros(p_eff, n);
    for j in 0..n {
        let col = x_tilde.col_mut(j);
        for (i, c) in col.iter_mut().enumerate() {
            *c = factors.sigma[i] * factors.u.get(j, i);
        }
    }
    // L = Q · V_emd[:, 1:p].
    let v_p = factors.v.column_subset(&(0..p_eff).collect::<Vec<_>>());
    let basis = matmul(&q, &v_p)?;

    // Validity gate: L orthonormal and L·x̃ equals LLᵀX.
    let defect = orthonormality_defect(&basis);
    if defect > 1e-8 {
        return Err(Error::numeric(format!(
            "sketch basis lost orthonormality (defect {defect:.3e})"
        )));
    }
    let implied = matmul(&basis, &x_tilde)?;
    let ltx = matmul_tn(&basis, x);
    let llt_x = matmul(&basis, &ltx)?;
    let rel = rel_frobenius(&llt_x, &implied);
    if rel > 1e-7 {
        return Err(Error::numeric(format!(
            "sketch self-check failed: basis·x̃ differs from LLᵀX by {rel:.3e} relative"
        )));
    }

    Ok(SketchResult {
        x_tilde,
        basis,
        p: p_eff,
        s: s_eff,
        seed,
    })
}

impl SketchResult {
    /// Rank-p approximation L·x̃ in the original coordinates.
    pub fn reconstruction(&self) -> DenseMatrix {
        matmul(&self.basis, &self.x_tilde).expect("conforming factors")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{spectral_norm, svd_dense};
    use crate::matrix::matmul_tn;
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
    fn default_s_values() {
        assert_eq!(krylov_default_s(3000), 9);
        assert_eq!(krylov_default_s(2), 2);
        assert_eq!(krylov_default_s(385), 6);
    }

    #[test]
    fn exact_rank_p_is_captured() {
        let left = random_matrix(30, 4, 50);
        let right = random_matrix(4, 40, 51);
        let x = matmul(&left, &right).unwrap();
        let sk = block_krylov_sketch(&x, 4, 3, 7).unwrap();
        let err = x.sub(&sk.reconstruction()).frobenius_norm();
        assert!(err < 1e-6 * x.frobenius_norm(), "err {err}");
    }

    #[test]
    fn spectral_bound_on_decaying_diagonal() {
        // diag(10, 5, 1, 0.1, …) in 50×50; rank-2 sketch must land within
        // 2·σ₃ = 2 in spectral norm for nearly every seed.
        let mut x = DenseMatrix::zeros(50, 50);
        let diag = [10.0, 5.0, 1.0, 0.1];
        for (i, &v) in diag.iter().enumerate() {
            x.set(i, i, v);
        }
        for i in diag.len()..50 {
            x.set(i, i, 0.1 / (i - 2) as f64);
        }
        let sigma3 = 1.0;
        let mut hits = 0;
        for seed in 0..100 {
            let sk = block_krylov_sketch(&x, 2, 8, seed).unwrap();
            let err = spectral_norm(&x.sub(&sk.reconstruction()));
            if err <= 2.0 * sigma3 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "spectral bound held in {hits}/100 seeds");
    }

    #[test]
    fn full_rank_square_capture() {
        let x = random_matrix(12, 12, 52);
        let sk = block_krylov_sketch(&x, 12, 1, 8).unwrap();
        let rel = x.sub(&sk.reconstruction()).frobenius_norm() / x.frobenius_norm();
        assert!(rel < 1e-7, "rel {rel}");
    }

    #[test]
    fn cap_rule_reduces_s() {
        let x = random_matrix(10, 40, 53);
        let sk = block_krylov_sketch(&x, 5, 6, 9).unwrap();
        assert_eq!(sk.s, 2); // ⌊10/5⌋
        assert!(block_krylov_sketch(&x, 11, 1, 9).is_err());
    }

    #[test]
    fn sketch_is_deterministic() {
        let x = random_matrix(20, 30, 54);
        let a = block_krylov_sketch(&x, 4, 3, 11).unwrap();
        let b = block_krylov_sketch(&x, 4, 3, 11).unwrap();
        assert_eq!(a, b);
        let c = block_krylov_sketch(&x, 4, 3, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn basis_is_contained_in_krylov_span() {
        let x = random_matrix(25, 35, 55);
        let (p, s, seed) = (4, 3, 13);
        let sk = block_krylov_sketch(&x, p, s, seed).unwrap();
        let k = build_krylov(&x, p, s, seed).unwrap();
        let (q, _) = crate::decomp::qr_householder(&k).unwrap();
        // ‖(I − QQᵀ)·L‖_F below 1e-8 certifies col(L) ⊆ col(K).
        let qt_l = matmul_tn(&q, &sk.basis);
        let proj = matmul(&q, &qt_l).unwrap();
        let defect = sk.basis.sub(&proj).frobenius_norm();
        assert!(defect < 1e-8, "containment defect {defect}");
    }

    #[test]
    fn deeper_krylov_is_no_worse_than_single_block() {
        // L L ᵀ X is the Frobenius-optimal projection onto col(L); against
        // the s = 1 sketch on the same seed the deeper subspace can only
        // tighten the error.
        let u = random_matrix(40, 6, 56);
        let w = random_matrix(6, 60, 57);
        let mut x = matmul(&u, &w).unwrap();
        let noise = random_matrix(40, 60, 58);
        for j in 0..60 {
            for i in 0..40 {
                let v = x.get(i, j) + 0.05 * noise.get(i, j);
                x.set(i, j, v);
            }
        }
        let seed = 21;
        let deep = block_krylov_sketch(&x, 4, 4, seed).unwrap();
        let shallow = block_krylov_sketch(&x, 4, 1, seed).unwrap();
        let e_deep = x.sub(&deep.reconstruction()).frobenius_norm();
        let e_shallow = x.sub(&shallow.reconstruction()).frobenius_norm();
        assert!(
            e_deep <= e_shallow + 1e-9,
            "deep {e_deep} vs shallow {e_shallow}"
        );
    }

    #[test]
    fn reduced_representation_preserves_gram_geometry() {
        // x̃ᵀx̃ approximates xᵀx restricted to the captured subspace; on an
        // exactly rank-p matrix they agree.
        let left = random_matrix(15, 3, 59);
        let right = random_matrix(3, 20, 60);
        let x = matmul(&left, &right).unwrap();
        let sk = block_krylov_sketch(&x, 3, 2, 14).unwrap();
        let g_full = matmul_tn(&x, &x);
        let g_red = matmul_tn(&sk.x_tilde, &sk.x_tilde);
        let rel = g_full.sub(&g_red).frobenius_norm() / g_full.frobenius_norm();
        assert!(rel < 1e-8, "gram drift {rel}");
    }

    #[test]
    fn svd_of_reduced_matches_top_of_original() {
        let x = random_matrix(30, 45, 61);
        let sk = block_krylov_sketch(&x, 5, 6, 15).unwrap();
        let f_full = svd_dense(&x).unwrap();
        let f_red = svd_dense(&sk.x_tilde).unwrap();
        // Krylov with generous s nails the top singular values.
        for i in 0..3 {
            let rel = (f_full.sigma[i] - f_red.sigma[i]).abs() / f_full.sigma[i];
            assert!(rel < 1e-3, "σ_{i} drift {rel}");
        }
    }
}
