//! Command-line front end: data ingestion, synthetic generators, fitting,
//! sketch/hull inspection, and the benchmark sweep harness.
//!
//! Every emitted file embeds its run manifest (JSON field, or a leading '#'
//! comment for CSV). With `AAKIT_WORKERS=1` (reproducibility mode) all
//! timing fields in output files are written as zero so byte-identical
//! reruns are possible; measured times still go to stderr.

use crate::aa::{fit, AAConfig};
use crate::error::{Error, Result};
use crate::hull::{approx_convex_hull, hausdorff_to_subhull};
use crate::io;
use crate::matrix::{aa_objective, DenseMatrix};
use crate::pipeline::{explained_variance, fit_aaa, fit_svd_aa_detailed, AAAConfig};
use crate::rng::CounterRng;
use crate::rsvd::{block_krylov_sketch, krylov_default_s};
use crate::synth;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 1;
const EXIT_INPUT: i32 = 2;
const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "aakit",
    version,
    about = "Archetypal analysis toolkit: exact, SVD-reduced, and approximate fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit archetypes to a dataset.
    Fit(FitArgs),
    /// Generate a synthetic dataset with known ground truth.
    Synth(SynthArgs),
    /// Estimate curvatures and extract an approximate convex hull.
    Hull(HullArgs),
    /// Compute a block-Krylov low-rank sketch.
    Rsvd(RsvdArgs),
    /// Run a parameter sweep from a JSON spec and emit long-format CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Alternating minimization on the raw data.
    Exact,
    /// Alternating minimization on the truncated exact-SVD representation.
    Svd,
    /// Sketch + approximate hull + reduced fit.
    Aaa,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Svd => "svd",
            Method::Aaa => "aaa",
        }
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input data (CSV rows-as-observations, or AAKIT1 binary; sniffed).
    #[arg(long)]
    pub input: PathBuf,
    /// Treat the first CSV line as a header.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Number of archetypes.
    #[arg(long)]
    pub k: usize,
    /// Approximation rank p (aaa) [default: 20].
    #[arg(long)]
    pub rank: Option<usize>,
    /// Krylov power parameter s (aaa) [default: ceil(ln N)].
    #[arg(long = "krylov-s")]
    pub krylov_s: Option<usize>,
    /// Use ceil(log2 N) for the default Krylov power parameter.
    #[arg(long = "krylov-log2")]
    pub krylov_log2: bool,
    /// Number of random projections M (aaa) [default: 10000].
    #[arg(long)]
    pub projections: Option<usize>,
    /// Curvature accuracy parameter eta (aaa) [default: 0.003].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Share of squared singular mass kept by the svd method.
    #[arg(long, default_value_t = 0.9999)]
    pub variance_keep: f64,
    /// Relative objective decrease at which the outer loop stops.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes PREFIX.json and PREFIX.metrics.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Polytope,
    LowrankNoise,
    Polygon2d,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Number of points.
    #[arg(long)]
    pub n: usize,
    /// Ambient dimension (polytope, lowrank-noise).
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Vertex count (polytope, polygon2d default profile).
    #[arg(long)]
    pub k: Option<usize>,
    /// Rank (lowrank-noise).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Noise scale.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Explicit curvature profile for polygon2d, e.g. "0.4,0.3,0.2,0.1".
    #[arg(long, value_delimiter = ',')]
    pub profile: Option<Vec<f64>>,
    /// Support-circle radius for polygon2d.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes PREFIX.csv and PREFIX.meta.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct HullArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Number of random projections M.
    #[arg(long, default_value_t = 10_000)]
    pub projections: usize,
    #[arg(long, default_value_t = 0.003)]
    pub eta: f64,
    /// Also report the Hausdorff distance to the retained hull
    /// (costs N simplex solves).
    #[arg(long)]
    pub hausdorff: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; writes PREFIX.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RsvdArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Approximation rank p.
    #[arg(long)]
    pub rank: usize,
    /// Krylov power parameter s [default: ceil(ln N)].
    #[arg(long = "krylov-s")]
    pub krylov_s: Option<usize>,
    /// Use ceil(log2 N) for the default Krylov power parameter.
    #[arg(long = "krylov-log2")]
    pub krylov_log2: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes PREFIX.xtilde.bin, PREFIX.basis.bin,
    /// PREFIX.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Sweep spec (JSON): data source, method/parameter grids, repeats.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output prefix; writes PREFIX.csv.
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance block embedded in every output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub input_digest: u64,
    pub timings: BTreeMap<String, f64>,
    pub git_or_build_id: String,
    pub workers: usize,
}

impl RunManifest {
    fn new(command: &str, seed: u64, input_digest: u64, workers: usize) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed,
            input_digest,
            timings: BTreeMap::new(),
            git_or_build_id: format!("aakit-{}", env!("CARGO_PKG_VERSION")),
            workers,
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    /// Records a timing, zeroed in reproducibility mode.
    fn timing(&mut self, key: &str, ms: f64) {
        let v = if self.workers == 1 { 0.0 } else { ms };
        self.timings.insert(key.into(), v);
    }
}

/// Worker count from AAKIT_WORKERS: 0 or unset = auto, 1 = reproducibility
/// mode.
pub fn resolve_workers() -> usize {
    match std::env::var("AAKIT_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => auto_workers(),
            Ok(w) => w,
        },
        Err(_) => auto_workers(),
    }
}

fn auto_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// AAKIT_SEED overrides the --seed flag.
pub fn resolve_seed(flag: u64) -> u64 {
    std::env::var("AAKIT_SEED")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(flag)
}

fn zero_if_repro(ms: f64, workers: usize) -> f64 {
    if workers == 1 {
        0.0
    } else {
        ms
    }
}

fn load_input(path: &Path, header: bool) -> Result<(DenseMatrix, u64, Option<Vec<usize>>)> {
    let bytes = std::fs::read(path)?;
    let digest = io::fnv1a64(&bytes);
    let x = if bytes.len() >= 6 && &bytes[..6] == io::BINARY_MAGIC {
        io::parse_binary(&bytes)?
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Format("input is neither AAKIT1 binary nor UTF-8 text".into()))?;
        io::parse_csv(&text, header)?
    };
    match io::dedup_columns(&x) {
        Some((deduped, kept)) => {
            log::warn!(
                "dropped {} exactly-duplicated input column(s); keeping first occurrences",
                x.cols() - deduped.cols()
            );
            Ok((deduped, digest, Some(kept)))
        }
        None => Ok((x, digest, None)),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn matrix_json(m: &DenseMatrix) -> serde_json::Value {
    let cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| m.col(j).to_vec()).collect();
    serde_json::json!({ "rows": m.rows(), "cols": m.cols(), "columns": cols })
}

fn sparse_triplets(m: &DenseMatrix) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for j in 0..m.cols() {
        for (i, &v) in m.col(j).iter().enumerate() {
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    t
}

fn model_json(model: &crate::aa::AAModel) -> serde_json::Value {
    serde_json::json!({
        "k": model.k(),
        "objective_trace": model.objective_trace,
        "converged": model.converged,
        "archetypes": matrix_json(&model.archetypes),
        "a_triplets": sparse_triplets(model.a.inner()),
        "b": matrix_json(model.b.inner()),
    })
}

/// One row of the metrics CSV shared by fit and bench.
struct MetricsRow {
    method: String,
    k: usize,
    p: Option<usize>,
    s: Option<usize>,
    m: Option<usize>,
    eta: Option<f64>,
    seed: u64,
    objective: f64,
    explained_variance: f64,
    support_size: Option<usize>,
    wall_ms: f64,
    error: String,
}

impl MetricsRow {
    const HEADER: &'static str =
        "method,k,p,s,M,eta,seed,objective,explained_variance,support_size,wall_ms,error";

    fn to_csv(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or(String::new(), |x| x.to_string())
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.k,
            opt(&self.p),
            opt(&self.s),
            opt(&self.m),
            opt(&self.eta),
            self.seed,
            self.objective,
            self.explained_variance,
            opt(&self.support_size),
            self.wall_ms,
            self.error
        )
    }
}

fn write_metrics_csv(path: &Path, manifest: &RunManifest, rows: &[MetricsRow]) -> Result<()> {
    let manifest_line = serde_json::to_string(manifest)
        .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
    let mut text = format!("# {manifest_line}\n{}\n", MetricsRow::HEADER);
    for r in rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix
        .file_name()
        .map_or_else(|| "out".to_string(), |s| s.to_string_lossy().into_owned());
    name.push_str(suffix);
    prefix.with_file_name(name)
}

// ── fit ──────────────────────────────────────────────────────────────

fn run_fit(args: &FitArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let workers = resolve_workers();
    let (x, digest, kept) = load_input(&args.input, args.header)?;
    let n = x.cols();

    let mut manifest = RunManifest::new("fit", seed, digest, workers);
    manifest.param("input", args.input.display());
    manifest.param("method", args.method.name());
    manifest.param("k", args.k);
    manifest.param("tol", args.tol);
    manifest.param("max_iter", args.max_iter);

    let mut aa_cfg = AAConfig::new(args.k, seed);
    aa_cfg.rel_tol = args.tol;
    aa_cfg.max_outer_iters = args.max_iter;

    let started = Instant::now();
    let (payload, row) = match args.method {
        Method::Exact => {
            let model = fit(&x, None, &aa_cfg)?;
            let wall = started.elapsed().as_secs_f64() * 1e3;
            let objective = aa_objective(&x, &x, &model.a, &model.b)?;
            let ev = explained_variance(&x, &model)?;
            manifest.timing("fit_ms", wall);
            (
                serde_json::json!({ "model": model_json(&model), "objective": objective,
                                     "explained_variance": ev }),
                MetricsRow {
                    method: "exact".into(),
                    k: args.k,
                    p: None,
                    s: None,
                    m: None,
                    eta: None,
                    seed,
                    objective,
                    explained_variance: ev,
                    support_size: None,
                    wall_ms: zero_if_repro(wall, workers),
                    error: String::new(),
                },
            )
        }
        Method::Svd => {
            manifest.param("variance_keep", args.variance_keep);
            let (model, p) = fit_svd_aa_detailed(&x, args.k, args.variance_keep, &aa_cfg)?;
            let wall = started.elapsed().as_secs_f64() * 1e3;
            let objective = aa_objective(&x, &x, &model.a, &model.b)?;
            let ev = explained_variance(&x, &model)?;
            manifest.timing("fit_ms", wall);
            (
                serde_json::json!({ "model": model_json(&model), "objective": objective,
                                     "explained_variance": ev, "rank": p }),
                MetricsRow {
                    method: "svd".into(),
                    k: args.k,
                    p: Some(p),
                    s: None,
                    m: None,
                    eta: None,
                    seed,
                    objective,
                    explained_variance: ev,
                    support_size: None,
                    wall_ms: zero_if_repro(wall, workers),
                    error: String::new(),
                },
            )
        }
        Method::Aaa => {
            let mut cfg = AAAConfig::new(args.k, args.rank.unwrap_or(20), seed);
            cfg.s = args.krylov_s.or_else(|| {
                if args.krylov_log2 {
                    Some(((n as f64).log2().ceil() as usize).max(2))
                } else {
                    None
                }
            });
            if let Some(m) = args.projections {
                cfg.m = m;
            }
            if let Some(eta) = args.eta {
                cfg.eta = eta;
            }
            cfg.workers = workers;
            cfg.aa = aa_cfg;
            manifest.param("rank", cfg.p);
            manifest.param("projections", cfg.m);
            manifest.param("eta", cfg.eta);
            let res = fit_aaa(&x, &cfg)?;
            let wall = started.elapsed().as_secs_f64() * 1e3;
            let ev = explained_variance(&x, &res.model)?;
            manifest.timing("sketch_ms", res.timings.sketch_ms);
            manifest.timing("hull_ms", res.timings.hull_ms);
            manifest.timing("fit_ms", res.timings.fit_ms);
            let s_used = res.sketch.s;
            (
                serde_json::json!({
                    "model": model_json(&res.model),
                    "objective": res.original_objective,
                    "reduced_objective": res.reduced_objective,
                    "explained_variance": ev,
                    "support": {
                        "indices": res.support.indices,
                        "cum_curvature_estimate": res.support.cum_curvature_estimate,
                        "eta": res.support.eta,
                        "size": res.support.l,
                    },
                    "sketch": { "p": res.sketch.p, "s": res.sketch.s, "seed": res.sketch.seed },
                    "timings_ms": {
                        "sketch": zero_if_repro(res.timings.sketch_ms, workers),
                        "hull": zero_if_repro(res.timings.hull_ms, workers),
                        "fit": zero_if_repro(res.timings.fit_ms, workers),
                    },
                }),
                MetricsRow {
                    method: "aaa".into(),
                    k: args.k,
                    p: Some(res.sketch.p),
                    s: Some(s_used),
                    m: Some(cfg.m),
                    eta: Some(cfg.eta),
                    seed,
                    objective: res.original_objective,
                    explained_variance: ev,
                    support_size: Some(res.support.l),
                    wall_ms: zero_if_repro(wall, workers),
                    error: String::new(),
                },
            )
        }
    };
    let wall = started.elapsed().as_secs_f64() * 1e3;
    eprintln!(
        "fit ({}) finished in {:.1} ms; objective {}",
        args.method.name(),
        wall,
        row.objective
    );

    let mut doc = payload;
    doc["manifest"] = serde_json::to_value(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
    if let Some(kept) = kept {
        doc["kept_columns"] = serde_json::json!(kept);
    }
    write_json(&with_suffix(&args.out, ".json"), &doc)?;
    write_metrics_csv(&with_suffix(&args.out, ".metrics.csv"), &manifest, &[row])?;
    Ok(())
}

// ── synth ────────────────────────────────────────────────────────────

fn run_synth(args: &SynthArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let workers = resolve_workers();
    let mut manifest = RunManifest::new("synth", seed, 0, workers);
    manifest.param("n", args.n);
    manifest.param("noise", args.noise);

    let (data, truth) = match args.kind {
        SynthKind::Polytope => {
            let k = args.k.unwrap_or(4);
            manifest.param("kind", "polytope");
            manifest.param("d", args.d);
            manifest.param("k", k);
            let inst = synth::polytope(args.n, args.d, k, args.noise, seed)?;
            let truth = serde_json::json!({
                "kind": "polytope",
                "vertices": matrix_json(&inst.vertices),
                "vertex_columns": (0..k).collect::<Vec<_>>(),
                "noise": args.noise,
            });
            (inst.data, truth)
        }
        SynthKind::LowrankNoise => {
            let rank = args.rank.unwrap_or(5);
            manifest.param("kind", "lowrank-noise");
            manifest.param("d", args.d);
            manifest.param("rank", rank);
            let x = synth::lowrank_noise(args.n, args.d, rank, args.noise, seed)?;
            let truth = serde_json::json!({
                "kind": "lowrank-noise",
                "rank": rank,
                "noise": args.noise,
            });
            (x, truth)
        }
        SynthKind::Polygon2d => {
            let profile = match &args.profile {
                Some(p) => p.clone(),
                None => synth::regular_polygon_profile(args.k.unwrap_or(12)),
            };
            manifest.param("kind", "polygon2d");
            manifest.param("profile", format!("{profile:?}"));
            manifest.param("radius", args.radius);
            let inst = synth::polygon2d(&profile, args.n, args.radius, seed)?;
            let truth = serde_json::json!({
                "kind": "polygon2d",
                "curvatures": inst.curvatures,
                "vertex_count": inst.vertex_count,
                "radius": args.radius,
            });
            (inst.data, truth)
        }
    };

    // Manifest digest covers the generated content.
    let digest_src: Vec<u8> = data.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    manifest.input_digest = io::fnv1a64(&digest_src);

    let manifest_line = serde_json::to_string(&manifest)
        .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
    io::write_csv(&with_suffix(&args.out, ".csv"), &data, Some(&manifest_line))?;
    let meta = serde_json::json!({ "ground_truth": truth, "manifest": manifest });
    write_json(&with_suffix(&args.out, ".meta.json"), &meta)?;
    eprintln!(
        "synth {} wrote {} points of dimension {}",
        manifest.parameters["kind"],
        data.cols(),
        data.rows()
    );
    Ok(())
}

// ── hull ─────────────────────────────────────────────────────────────

fn run_hull(args: &HullArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let workers = resolve_workers();
    let (x, digest, kept) = load_input(&args.input, args.header)?;

    let mut manifest = RunManifest::new("hull", seed, digest, workers);
    manifest.param("projections", args.projections);
    manifest.param("eta", args.eta);
    manifest.param("input", args.input.display());

    let started = Instant::now();
    let support = approx_convex_hull(&x, args.projections, args.eta, seed, workers)?;
    let hull_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.timing("hull_ms", hull_ms);

    let hausdorff = if args.hausdorff {
        let t = Instant::now();
        let d = hausdorff_to_subhull(&x, &support)?;
        manifest.timing("hausdorff_ms", t.elapsed().as_secs_f64() * 1e3);
        Some(d)
    } else {
        None
    };

    let mut doc = serde_json::json!({
        "indices": support.indices,
        "eta": support.eta,
        "M": args.projections,
        "seed": seed,
        "cum_curvature_estimate": support.cum_curvature_estimate,
        "size": support.l,
        "manifest": manifest,
    });
    if let Some(d) = hausdorff {
        doc["hausdorff_estimate"] = serde_json::json!(d);
    }
    if let Some(kept) = kept {
        doc["kept_columns"] = serde_json::json!(kept);
    }
    write_json(&with_suffix(&args.out, ".json"), &doc)?;
    eprintln!(
        "hull retained {} of {} points ({:.1} ms)",
        support.l,
        x.cols(),
        hull_ms
    );
    Ok(())
}

// ── rsvd ─────────────────────────────────────────────────────────────

fn run_rsvd(args: &RsvdArgs) -> Result<()> {
    let seed = resolve_seed(args.seed);
    let workers = resolve_workers();
    let (x, digest, _) = load_input(&args.input, args.header)?;
    let n = x.cols();
    if n < 2 {
        return Err(Error::contract("rsvd requires at least two data points"));
    }
    let s = args.krylov_s.unwrap_or_else(|| {
        if args.krylov_log2 {
            ((n as f64).log2().ceil() as usize).max(2)
        } else {
            krylov_default_s(n)
        }
    });

    let mut manifest = RunManifest::new("rsvd", seed, digest, workers);
    manifest.param("rank", args.rank);
    manifest.param("s", s);
    manifest.param("input", args.input.display());

    let started = Instant::now();
    let sketch = block_krylov_sketch(&x, args.rank, s, seed)?;
    let sketch_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.timing("sketch_ms", sketch_ms);

    // Spectral error of the implied rank-p approximation.
    let residual = x.sub(&sketch.reconstruction());
    let spectral_error = crate::decomp::spectral_norm(&residual);

    io::write_binary(&with_suffix(&args.out, ".xtilde.bin"), &sketch.x_tilde)?;
    io::write_binary(&with_suffix(&args.out, ".basis.bin"), &sketch.basis)?;
    let doc = serde_json::json!({
        "p": sketch.p,
        "s": sketch.s,
        "seed": seed,
        "spectral_error_estimate": spectral_error,
        "manifest": manifest,
    });
    write_json(&with_suffix(&args.out, ".json"), &doc)?;
    eprintln!(
        "rsvd rank {} sketch in {:.1} ms; spectral error {:.3e}",
        sketch.p, sketch_ms, spectral_error
    );
    Ok(())
}

// ── bench ────────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
struct SweepSpec {
    /// Path to a dataset; mutually exclusive with `synth`.
    input: Option<PathBuf>,
    #[serde(default)]
    header: bool,
    synth: Option<SweepSynth>,
    methods: Vec<String>,
    k: Vec<usize>,
    #[serde(default)]
    rank: Vec<usize>,
    #[serde(default)]
    projections: Vec<usize>,
    #[serde(default)]
    eta: Vec<f64>,
    #[serde(default = "default_repeats")]
    repeats: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_variance_keep")]
    variance_keep: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
}

fn default_repeats() -> usize {
    1
}
fn default_variance_keep() -> f64 {
    0.9999
}
fn default_tol() -> f64 {
    1e-3
}
fn default_max_iter() -> usize {
    200
}

#[derive(Debug, Deserialize)]
struct SweepSynth {
    kind: String,
    n: usize,
    #[serde(default = "default_d")]
    d: usize,
    k: Option<usize>,
    rank: Option<usize>,
    #[serde(default)]
    noise: f64,
    profile: Option<Vec<f64>>,
    #[serde(default = "default_radius")]
    radius: f64,
}

fn default_d() -> usize {
    2
}
fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug)]
struct BenchCell {
    method: Method,
    k: usize,
    p: Option<usize>,
    m: Option<usize>,
    eta: Option<f64>,
    repeat: usize,
}

fn bench_grid(spec: &SweepSpec) -> Result<Vec<BenchCell>> {
    let mut cells = Vec::new();
    for method_name in &spec.methods {
        let method = match method_name.as_str() {
            "exact" => Method::Exact,
            "svd" => Method::Svd,
            "aaa" => Method::Aaa,
            other => {
                return Err(Error::Format(format!("unknown method {other:?} in sweep spec")))
            }
        };
        for &k in &spec.k {
            match method {
                Method::Exact | Method::Svd => {
                    for repeat in 0..spec.repeats {
                        cells.push(BenchCell {
                            method,
                            k,
                            p: None,
                            m: None,
                            eta: None,
                            repeat,
                        });
                    }
                }
                Method::Aaa => {
                    let ranks = if spec.rank.is_empty() { vec![20] } else { spec.rank.clone() };
                    let ms = if spec.projections.is_empty() {
                        vec![10_000]
                    } else {
                        spec.projections.clone()
                    };
                    let etas = if spec.eta.is_empty() { vec![0.003] } else { spec.eta.clone() };
                    for &p in &ranks {
                        for &m in &ms {
                            for &eta in &etas {
                                for repeat in 0..spec.repeats {
                                    cells.push(BenchCell {
                                        method,
                                        k,
                                        p: Some(p),
                                        m: Some(m),
                                        eta: Some(eta),
                                        repeat,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn run_bench(args: &BenchArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec)?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("sweep spec parse error: {e}")))?;
    let workers = resolve_workers();
    let seed = resolve_seed(spec.seed);

    let cells = bench_grid(&spec)?;
    if cells.is_empty() {
        return Err(Error::Format("sweep grid is empty".into()));
    }

    // Fixed dataset shared by every cell.
    let (x, digest) = if let Some(input) = &spec.input {
        let (x, digest, _) = load_input(input, spec.header)?;
        (x, digest)
    } else if let Some(sy) = &spec.synth {
        let data = match sy.kind.as_str() {
            "polytope" => synth::polytope(sy.n, sy.d, sy.k.unwrap_or(4), sy.noise, seed)?.data,
            "lowrank-noise" => {
                synth::lowrank_noise(sy.n, sy.d, sy.rank.unwrap_or(5), sy.noise, seed)?
            }
            "polygon2d" => {
                let profile = sy
                    .profile
                    .clone()
                    .unwrap_or_else(|| synth::regular_polygon_profile(sy.k.unwrap_or(12)));
                synth::polygon2d(&profile, sy.n, sy.radius, seed)?.data
            }
            other => return Err(Error::Format(format!("unknown synth kind {other:?}"))),
        };
        let bytes: Vec<u8> = data.data().iter().flat_map(|v| v.to_le_bytes()).collect();
        let digest = io::fnv1a64(&bytes);
        (data, digest)
    } else {
        return Err(Error::Format("sweep spec needs either input or synth".into()));
    };

    let mut manifest = RunManifest::new("bench", seed, digest, workers);
    manifest.param("spec", args.spec.display());
    manifest.param("cells", cells.len());
    manifest.param("repeats", spec.repeats);

    let mut rows = Vec::with_capacity(cells.len());
    let mut successes = 0usize;
    for (index, cell) in cells.iter().enumerate() {
        let cell_seed = CounterRng::derive_seed(seed, index as u64);
        let mut aa_cfg = AAConfig::new(cell.k, cell_seed);
        aa_cfg.rel_tol = spec.tol;
        aa_cfg.max_outer_iters = spec.max_iter;

        let started = Instant::now();
        let outcome: Result<(f64, f64, Option<usize>, Option<usize>)> = match cell.method {
            Method::Exact => fit(&x, None, &aa_cfg).and_then(|model| {
                let obj = aa_objective(&x, &x, &model.a, &model.b)?;
                let ev = explained_variance(&x, &model)?;
                Ok((obj, ev, None, None))
            }),
            Method::Svd => {
                fit_svd_aa_detailed(&x, cell.k, spec.variance_keep, &aa_cfg).and_then(
                    |(model, p)| {
                        let obj = aa_objective(&x, &x, &model.a, &model.b)?;
                        let ev = explained_variance(&x, &model)?;
                        Ok((obj, ev, Some(p), None))
                    },
                )
            }
            Method::Aaa => {
                let mut cfg = AAAConfig::new(cell.k, cell.p.unwrap_or(20), cell_seed);
                cfg.m = cell.m.unwrap_or(10_000);
                cfg.eta = cell.eta.unwrap_or(0.003);
                cfg.workers = workers;
                cfg.aa = aa_cfg.clone();
                fit_aaa(&x, &cfg).and_then(|res| {
                    let ev = explained_variance(&x, &res.model)?;
                    Ok((
                        res.original_objective,
                        ev,
                        Some(res.sketch.p),
                        Some(res.support.l),
                    ))
                })
            }
        };
        let wall = started.elapsed().as_secs_f64() * 1e3;

        let row = match outcome {
            Ok((objective, ev, p, support_size)) => {
                successes += 1;
                MetricsRow {
                    method: cell.method.name().into(),
                    k: cell.k,
                    p: p.or(cell.p),
                    s: None,
                    m: cell.m,
                    eta: cell.eta,
                    seed: cell_seed,
                    objective,
                    explained_variance: ev,
                    support_size,
                    wall_ms: zero_if_repro(wall, workers),
                    error: String::new(),
                }
            }
            Err(e) => MetricsRow {
                method: cell.method.name().into(),
                k: cell.k,
                p: cell.p,
                s: None,
                m: cell.m,
                eta: cell.eta,
                seed: cell_seed,
                objective: f64::NAN,
                explained_variance: f64::NAN,
                support_size: None,
                wall_ms: zero_if_repro(wall, workers),
                error: format!("{e}").replace(',', ";"),
            },
        };
        let _ = cell.repeat;
        rows.push(row);
    }

    write_metrics_csv(&with_suffix(&args.out, ".csv"), &manifest, &rows)?;
    eprintln!(
        "bench: {successes}/{} cells succeeded; wrote {}",
        rows.len(),
        with_suffix(&args.out, ".csv").display()
    );
    Ok(if successes > 0 { EXIT_OK } else { EXIT_ERROR })
}

// ── entry point ──────────────────────────────────────────────────────

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Parse { .. } | Error::Format(_) => EXIT_INPUT,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_ERROR,
    }
}

/// Runs a parsed command, returning the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Fit(args) => run_fit(args).map(|_| EXIT_OK),
        Command::Synth(args) => run_synth(args).map(|_| EXIT_OK),
        Command::Hull(args) => run_hull(args).map(|_| EXIT_OK),
        Command::Rsvd(args) => run_rsvd(args).map(|_| EXIT_OK),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_expands_methods_and_parameters() {
        let spec = SweepSpec {
            input: None,
            header: false,
            synth: None,
            methods: vec!["exact".into(), "aaa".into()],
            k: vec![2, 3],
            rank: vec![5, 10],
            projections: vec![1000],
            eta: vec![0.1],
            repeats: 2,
            seed: 0,
            variance_keep: 0.9999,
            tol: 1e-3,
            max_iter: 200,
        };
        let cells = bench_grid(&spec).unwrap();
        // exact: 2 k × 2 repeats; aaa: 2 k × 2 ranks × 1 M × 1 eta × 2 repeats.
        assert_eq!(cells.len(), 4 + 8);
        assert!(bench_grid(&SweepSpec {
            methods: vec!["nope".into()],
            ..spec
        })
        .is_err());
    }

    #[test]
    fn empty_grid_is_detected() {
        let spec = SweepSpec {
            input: None,
            header: false,
            synth: None,
            methods: vec![],
            k: vec![3],
            rank: vec![],
            projections: vec![],
            eta: vec![],
            repeats: 1,
            seed: 0,
            variance_keep: 0.9999,
            tol: 1e-3,
            max_iter: 200,
        };
        assert!(bench_grid(&spec).unwrap().is_empty());
    }
}
