//! The approximate pipeline: sketch the data down to p dimensions, extract
//! an approximate convex hull of the reduced representation, fit archetypes
//! over the retained columns, then expand back to the full index set. Also
//! the exact-SVD baseline the approximate run is judged against.

use crate::aa::{fit, AAConfig, AAModel};
use crate::decomp::svd_dense;
use crate::error::{Error, Result};
use crate::hull::{approx_convex_hull, HullSupport};
use crate::matrix::{aa_objective, matmul, DenseMatrix, StochasticMatrix};
use crate::rng::CounterRng;
use crate::rsvd::{block_krylov_sketch, krylov_default_s, SketchResult};
use std::time::Instant;

const TAG_PIPELINE_HULL: u64 = 0x504C_4855;

#[derive(Clone, Debug)]
pub struct AAAConfig {
    pub k: usize,
    /// Approximation rank of the sketch.
    pub p: usize,
    /// Krylov power parameter; default ⌈ln N⌉.
    pub s: Option<usize>,
    /// Number of random projections in the hull stage.
    pub m: usize,
    /// Curvature mass allowed to escape the retained set (threshold 1 − η/3).
    pub eta: f64,
    pub seed: u64,
    /// Worker count for the hull stage; 1 is the reproducibility reference.
    pub workers: usize,
    pub aa: AAConfig,
}

impl AAAConfig {
    pub fn new(k: usize, p: usize, seed: u64) -> Self {
        AAAConfig {
            k,
            p,
            s: None,
            m: 10_000,
            eta: 0.003,
            seed,
            workers: 1,
            aa: AAConfig::new(k, seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::contract("approximation rank p must be at least 1"));
        }
        if self.m < 1 {
            return Err(Error::contract("projection count m must be at least 1"));
        }
        if !(self.eta > 0.0 && self.eta < 3.0) {
            return Err(Error::contract(format!("eta = {} outside (0, 3)", self.eta)));
        }
        self.aa.validate()
    }
}

/// Stage wall-clock times in milliseconds.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageTimings {
    pub sketch_ms: f64,
    pub hull_ms: f64,
    pub fit_ms: f64,
}

#[derive(Clone, Debug)]
pub struct AAAResult {
    /// Fitted model with A expanded to the full N×k index space and
    /// archetypes reported in the original coordinates (x·A).
    pub model: AAModel,
    pub support: HullSupport,
    pub sketch: SketchResult,
    pub timings: StageTimings,
    /// Final objective of the reduced problem (on x̃).
    pub reduced_objective: f64,
    /// (1/√N)‖x − x·A·B‖_F recomputed on the untouched input; the quantity
    /// every guarantee bounds.
    pub original_objective: f64,
}

/// Approximate archetypal analysis: sketch, hull-reduce, fit, expand.
pub fn fit_aaa(x: &DenseMatrix, cfg: &AAAConfig) -> Result<AAAResult> {
    cfg.validate()?;
    let n = x.cols();
    if n < 2 {
        return Err(Error::contract("fit_aaa requires at least two data points"));
    }
    let s = cfg.s.unwrap_or_else(|| krylov_default_s(n));

    let t0 = Instant::now();
    let sketch = block_krylov_sketch(x, cfg.p, s, cfg.seed)?;
    let sketch_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let hull_seed = CounterRng::derive_seed(cfg.seed, TAG_PIPELINE_HULL);
    let support = approx_convex_hull(&sketch.x_tilde, cfg.m, cfg.eta, hull_seed, cfg.workers)?;
    let hull_ms = t1.elapsed().as_secs_f64() * 1e3;

    if cfg.k > support.indices.len() {
        return Err(Error::Infeasible(format!(
            "k = {} archetypes requested but the hull stage retained only |T| = {} candidates; \
             increase eta or the projection count M",
            cfg.k,
            support.indices.len()
        )));
    }

    let t2 = Instant::now();
    let dict = sketch.x_tilde.column_subset(&support.indices);
    let reduced = fit(&sketch.x_tilde, Some(&dict), &cfg.aa)?;
    let fit_ms = t2.elapsed().as_secs_f64() * 1e3;

    // Expand Ã (|T|×k) to N×k: zero rows outside the support.
    let mut a_full = DenseMatrix::zeros(n, cfg.k);
    for (r, &row) in support.indices.iter().enumerate() {
        for c in 0..cfg.k {
            a_full.set(row, c, reduced.a.inner().get(r, c));
        }
    }
    let a_full = StochasticMatrix::new(a_full)?;
    let archetypes = matmul(x, a_full.inner())?;

    let reduced_objective = reduced.final_objective();
    let original_objective = aa_objective(x, x, &a_full, &reduced.b)?;

    Ok(AAAResult {
        model: AAModel {
            a: a_full,
            b: reduced.b,
            archetypes,
            objective_trace: reduced.objective_trace,
            converged: reduced.converged,
        },
        support,
        sketch,
        timings: StageTimings {
            sketch_ms,
            hull_ms,
            fit_ms,
        },
        reduced_objective,
        original_objective,
    })
}

/// Smallest rank keeping the requested share of the squared singular mass.
fn rank_for_variance(sigma: &[f64], variance_keep: f64) -> usize {
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return 1;
    }
    let mut cum = 0.0;
    for (i, s) in sigma.iter().enumerate() {
        cum += s * s;
        if cum >= variance_keep * total {
            return i + 1;
        }
    }
    sigma.len().max(1)
}

/// Exact-SVD baseline: fit on the truncated representation Σ_p V_pᵀ where p
/// keeps `variance_keep` of the squared singular mass. Also reports the
/// chosen p.
pub fn fit_svd_aa_detailed(
    x: &DenseMatrix,
    k: usize,
    variance_keep: f64,
    cfg: &AAConfig,
) -> Result<(AAModel, usize)> {
    if !(variance_keep > 0.0 && variance_keep <= 1.0) {
        return Err(Error::contract(format!(
            "variance_keep = {variance_keep} outside (0, 1]"
        )));
    }
    let mut cfg = cfg.clone();
    cfg.k = k;
    let factors = svd_dense(x)?;
    let p = rank_for_variance(&factors.sigma, variance_keep);
    let rep = factors.truncated_representation(p);
    let reduced = fit(&rep, None, &cfg)?;

    // Archetypes mapped back to original coordinates.
    let archetypes = matmul(x, reduced.a.inner())?;
    Ok((
        AAModel {
            archetypes,
            a: reduced.a,
            b: reduced.b,
            objective_trace: reduced.objective_trace,
            converged: reduced.converged,
        },
        p,
    ))
}

/// Exact-SVD baseline; see [`fit_svd_aa_detailed`].
pub fn fit_svd_aa(
    x: &DenseMatrix,
    k: usize,
    variance_keep: f64,
    cfg: &AAConfig,
) -> Result<AAModel> {
    fit_svd_aa_detailed(x, k, variance_keep, cfg).map(|(m, _)| m)
}

/// Share of centered data variance explained by the model:
/// 1 − ‖x − x·A·B‖²_F / Σᵢ‖xᵢ − x̄‖². Constant data reports 1 when the
/// residual vanishes and is otherwise an undefined metric.
pub fn explained_variance(x: &DenseMatrix, model: &AAModel) -> Result<f64> {
    let n = x.cols();
    if n == 0 {
        return Err(Error::UndefinedMetric("empty data".into()));
    }
    let obj = aa_objective(x, x, &model.a, &model.b)?;
    let residual_sq = obj * obj * n as f64;

    let d = x.rows();
    let mut mean = vec![0.0; d];
    for j in 0..n {
        for (m, v) in mean.iter_mut().zip(x.col(j)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut total = 0.0;
    for j in 0..n {
        for (m, v) in mean.iter().zip(x.col(j)) {
            let e = v - m;
            total += e * e;
        }
    }
    if total <= f64::MIN_POSITIVE {
        return if residual_sq <= 1e-20 {
            Ok(1.0)
        } else {
            Err(Error::UndefinedMetric(
                "zero total variance with nonzero residual".into(),
            ))
        };
    }
    Ok(1.0 - residual_sq / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::rng::CounterRng;
    use crate::synth;

    #[test]
    fn aaa_recovers_planted_vertices_on_exactly_low_rank_data() {
        let inst = synth::polytope(120, 12, 4, 0.0, 42).unwrap();
        let mut cfg = AAAConfig::new(4, 4, 7);
        cfg.m = 20_000;
        cfg.eta = 0.01;
        cfg.aa.rel_tol = 1e-6;
        let res = fit_aaa(&inst.data, &cfg).unwrap();
        assert!(
            res.original_objective < 1e-4,
            "objective {}",
            res.original_objective
        );
        let dist = reference::hausdorff_point_sets(&res.model.archetypes, &inst.vertices);
        assert!(dist < 1e-3, "vertex distance {dist}");
    }

    #[test]
    fn aaa_eta_near_three_forces_minimal_support() {
        let inst = synth::polytope(60, 10, 3, 0.01, 43).unwrap();
        let mut cfg = AAAConfig::new(3, 4, 8);
        cfg.eta = 2.999_999;
        cfg.m = 2_000;
        let res = fit_aaa(&inst.data, &cfg).unwrap();
        assert_eq!(res.support.l, res.sketch.p + 1);
    }

    #[test]
    fn aaa_is_deterministic_for_fixed_config() {
        let inst = synth::polytope(50, 8, 3, 0.05, 44).unwrap();
        let mut cfg = AAAConfig::new(3, 3, 9);
        cfg.m = 3_000;
        let r1 = fit_aaa(&inst.data, &cfg).unwrap();
        let r2 = fit_aaa(&inst.data, &cfg).unwrap();
        assert_eq!(r1.support, r2.support);
        assert_eq!(r1.sketch, r2.sketch);
        assert_eq!(r1.model.a.inner(), r2.model.a.inner());
        assert_eq!(r1.model.b.inner(), r2.model.b.inner());
        assert_eq!(r1.original_objective.to_bits(), r2.original_objective.to_bits());
    }

    #[test]
    fn aaa_rejects_k_beyond_support() {
        let inst = synth::polytope(40, 6, 3, 0.0, 45).unwrap();
        let mut cfg = AAAConfig::new(6, 3, 10);
        cfg.eta = 2.9; // threshold near zero keeps only p + 1 candidates
        cfg.m = 500;
        match fit_aaa(&inst.data, &cfg) {
            Err(Error::Infeasible(msg)) => {
                assert!(msg.contains("|T|"), "message: {msg}");
            }
            other => panic!("expected infeasible error, got {other:?}"),
        }
    }

    #[test]
    fn aaa_expanded_a_is_zero_off_support() {
        let inst = synth::polytope(70, 9, 3, 0.02, 46).unwrap();
        let mut cfg = AAAConfig::new(3, 4, 11);
        cfg.m = 3_000;
        let res = fit_aaa(&inst.data, &cfg).unwrap();
        for r in 0..res.model.a.rows() {
            if !res.support.indices.contains(&r) {
                for c in 0..res.model.a.cols() {
                    assert_eq!(res.model.a.inner().get(r, c), 0.0);
                }
            }
        }
        // original_objective matches a recomputation on the raw input.
        let again = aa_objective(&inst.data, &inst.data, &res.model.a, &res.model.b).unwrap();
        assert_eq!(again.to_bits(), res.original_objective.to_bits());
    }

    #[test]
    fn svd_baseline_full_variance_equals_direct_fit() {
        let mut rng = CounterRng::new(47);
        let mut x = DenseMatrix::zeros(5, 30);
        for j in 0..30 {
            for i in 0..5 {
                x.set(i, j, rng.next_gaussian());
            }
        }
        let cfg = AAConfig::new(3, 12);
        let (baseline, p) = fit_svd_aa_detailed(&x, 3, 1.0, &cfg).unwrap();
        assert_eq!(p, 5);
        let direct = fit(&x, None, &cfg).unwrap();
        assert_eq!(
            baseline.objective_trace.len(),
            direct.objective_trace.len()
        );
        for (a, b) in baseline
            .objective_trace
            .iter()
            .zip(&direct.objective_trace)
        {
            assert!((a - b).abs() <= 1e-7 * a.max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn svd_baseline_rank_three_data_picks_p_three() {
        let inst = synth::lowrank_noise(40, 15, 3, 0.0, 48).unwrap();
        let cfg = AAConfig::new(2, 13);
        let (_, p) = fit_svd_aa_detailed(&inst, 2, 0.9999, &cfg).unwrap();
        assert_eq!(p, 3);
    }

    #[test]
    fn truncation_envelope_on_lowrank_noise() {
        // Objective of the rank-5 truncated fit evaluated on x stays within
        // (full-fit objective + 4σ₆) across three noise decades.
        for (i, sigma) in [1e-3, 1e-2, 1e-1].iter().enumerate() {
            let seed = 600 + i as u64;
            let x = synth::lowrank_noise(50, 20, 5, *sigma, seed).unwrap();
            let cfg = AAConfig::new(3, seed);
            let factors = svd_dense(&x).unwrap();
            let rep = factors.truncated_representation(5);
            let reduced = fit(&rep, None, &cfg).unwrap();
            let on_x = aa_objective(&x, &x, &reduced.a, &reduced.b).unwrap();
            let full = fit(&x, None, &cfg).unwrap();
            let bound = full.final_objective() + 4.0 * factors.sigma[5] + 1e-6;
            assert!(on_x <= bound, "sigma {sigma}: {on_x} > {bound}");
        }
    }

    #[test]
    fn explained_variance_perfect_fit_is_one() {
        let x = synth::polytope(30, 6, 3, 0.0, 49).unwrap();
        let mut cfg = AAConfig::new(3, 14);
        cfg.rel_tol = 1e-7;
        let model = fit(&x.data, None, &cfg).unwrap();
        let ev = explained_variance(&x.data, &model).unwrap();
        assert!(ev > 0.999_999, "ev {ev}");
    }

    #[test]
    fn explained_variance_constant_data() {
        let x = DenseMatrix::from_column_major(2, 3, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let model_a = StochasticMatrix::selection(3, &[0]).unwrap();
        let model_b = StochasticMatrix::uniform(1, 3);
        let archetypes = matmul(&x, model_a.inner()).unwrap();
        let model = AAModel {
            a: model_a,
            b: model_b,
            archetypes,
            objective_trace: vec![0.0],
            converged: true,
        };
        let ev = explained_variance(&x, &model).unwrap();
        assert_eq!(ev, 1.0);
    }
}
