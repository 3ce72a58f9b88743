//! Command implementations behind the `bellrange` binary.
//!
//! Every command computes its results in memory, then writes its result
//! files and a JSON run manifest from a single thread. The manifest is
//! written even when the command fails.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bellrange::census::{pairs_per_site, qualifying_fraction, rainbow_profile, run_census, ExperimentConfig, PairCensus};
use bellrange::disorder::RainbowSpec;
use bellrange::fit::{linear_regression, power_law_fit_with, FitOptions, Weighting, DEFAULT_BOOTSTRAP_RESAMPLES};
use bellrange::pairstate::{
    analytic_ed, analytic_entropy, entropy_of_interval, mean_distillable, mean_interval_entropy, monogamy_check,
    sample_chain_state, FragmentSampler, Interval, PairConfiguration, PowerLawModel, DEFAULT_K_MAX,
};
use bellrange::rng::{stream, substream};
use bellrange::Error;
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub mod manifest;
use manifest::RunManifest;

pub const OUT_DIR_ENV: &str = "BELLRANGE_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bellrange", version, about = "Long-range entanglement experiments on Bell-pair ensembles and random free-fermion chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coherent-information pair census of random-singlet ground states.
    RspCensus(RspCensusArgs),
    /// Entropy and distillable-entanglement scaling of Bell-pair ensembles.
    PairstateScan(PairstateScanArgs),
    /// Mirror-pair coherent information of rainbow chains.
    RainbowCheck(RainbowCheckArgs),
    /// Monogamy bookkeeping on randomized geometries.
    MonogamyDemo(MonogamyDemoArgs),
    /// Re-fit an existing census CSV.
    Fit(FitArgs),
}

#[derive(Debug, Args, Clone)]
pub struct OutDir {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct RspCensusArgs {
    /// Chain length L (even, at least 4).
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub samples: usize,
    /// Disorder strength.
    #[arg(long, default_value_t = 3.0)]
    pub delta: f64,
    /// Pair threshold in nats [default: ln 2 / 2].
    #[arg(long, conflicts_with = "threshold_bits")]
    pub threshold_nats: Option<f64>,
    /// Pair threshold in bits.
    #[arg(long)]
    pub threshold_bits: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value_t = 3)]
    pub fit_min: usize,
    /// Upper end of the fit window [default: min(101, L/5)].
    #[arg(long)]
    pub fit_max: Option<usize>,
    /// Bootstrap resamples for the exponent error.
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_RESAMPLES)]
    pub resamples: usize,
    /// Weight fit points by their counts.
    #[arg(long)]
    pub weighted: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutDir,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct PairstateScanArgs {
    /// Pair-length exponent (> 1).
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub qudit_dim: u32,
    /// Fragments per chunk.
    #[arg(long, default_value_t = 200_000)]
    pub fragments: usize,
    /// Independent configurations averaged together.
    #[arg(long, default_value_t = 1)]
    pub chunks: usize,
    /// Largest fragment half-length.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = 64)]
    pub interval_min: usize,
    #[arg(long, default_value_t = 4096)]
    pub interval_max: usize,
    /// Log-spaced interval lengths between the bounds.
    #[arg(long, default_value_t = 13)]
    pub points: usize,
    /// Block size for the distillable-entanglement table.
    #[arg(long, default_value_t = 1)]
    pub block: usize,
    #[arg(long, default_value_t = 10)]
    pub r_min: usize,
    #[arg(long, default_value_t = 100)]
    pub r_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutDir,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct RainbowCheckArgs {
    /// Decay parameter in (0, 1).
    #[arg(long)]
    pub lambda: f64,
    /// Half-lengths N, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub sizes: Vec<usize>,
    /// Accepted for uniformity; rainbow chains are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutDir,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct MonogamyDemoArgs {
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub qudit_dim: u32,
    #[arg(long, default_value_t = 400)]
    pub fragments: usize,
    #[arg(long, default_value_t = 1000)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1000)]
    pub geometries: usize,
    /// Longest interval A.
    #[arg(long, default_value_t = 64)]
    pub max_interval: usize,
    /// Most blocks B_i on each side of A.
    #[arg(long, default_value_t = 3)]
    pub max_blocks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print every geometry.
    #[arg(long)]
    pub verbose: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutDir,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct FitArgs {
    /// Census CSV with columns r,count.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub fit_min: usize,
    #[arg(long, default_value_t = 101)]
    pub fit_max: usize,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_RESAMPLES)]
    pub resamples: usize,
    /// Bootstrap seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub weighted: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutDir,
}

/// A failed command: what to print and how to exit.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub sample: Option<u64>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::SiteOutOfRange { .. } | Error::Overlap(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        let sample = match &e {
            Error::Sample { sample, .. } => Some(*sample),
            _ => None,
        };
        Self {
            code,
            message: e.to_string(),
            sample,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
            sample: None,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
        sample: None,
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, out, config, seed) = match &cli.command {
        Command::RspCensus(a) => ("rsp_census", &a.out, to_value(a), Some(a.seed)),
        Command::PairstateScan(a) => ("pairstate_scan", &a.out, to_value(a), Some(a.seed)),
        Command::RainbowCheck(a) => ("rainbow_check", &a.out, to_value(a), a.seed),
        Command::MonogamyDemo(a) => ("monogamy_demo", &a.out, to_value(a), Some(a.seed)),
        Command::Fit(a) => ("fit", &a.out, to_value(a), Some(a.seed)),
    };
    let dir = out.out_dir.clone();
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return EXIT_IO;
    }
    let mut manifest = RunManifest::begin(name, config, seed);
    let result = match &cli.command {
        Command::RspCensus(a) => rsp_census(a, &dir, &mut manifest),
        Command::PairstateScan(a) => pairstate_scan_cmd(a, &dir, &mut manifest),
        Command::RainbowCheck(a) => rainbow_check(a, &dir, &mut manifest),
        Command::MonogamyDemo(a) => monogamy_demo(a, &mut manifest),
        Command::Fit(a) => refit(a, &dir, &mut manifest),
    };
    let code = match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            manifest.error = Some(f.message);
            manifest.failed_sample = f.sample;
            f.code
        }
    };
    manifest.finish();
    let path = dir.join(format!("{name}_manifest.json"));
    if let Err(e) = manifest.write(&path) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return if code == EXIT_OK { EXIT_IO } else { code };
    }
    code
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("arguments serialize")
}

fn write_output(manifest: &mut RunManifest, path: PathBuf, contents: &str) -> Result<(), Failure> {
    std::fs::write(&path, contents)?;
    manifest.outputs.push(path);
    Ok(())
}

fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn rsp_census(a: &RspCensusArgs, dir: &Path, manifest: &mut RunManifest) -> Result<(), Failure> {
    let threshold_nats = match (a.threshold_nats, a.threshold_bits) {
        (Some(n), _) => n,
        (None, Some(b)) => b * LN_2,
        (None, None) => LN_2 / 2.0,
    };
    let mut config = ExperimentConfig::new(a.length, a.samples, a.delta, a.seed);
    config.threshold_nats = threshold_nats;
    config.worker_count = a.threads;
    config.fit_window = (a.fit_min, a.fit_max.unwrap_or(config.fit_window.1));
    config.output_path = Some(dir.display().to_string());
    config.validate()?;
    let (lo, hi) = config.fit_window;
    if !(1 <= lo && lo < hi && hi < a.length) {
        return Err(usage(format!("fit window [{lo}, {hi}] must satisfy 1 <= min < max < L")));
    }
    manifest.config = json!({ "arguments": manifest.config, "experiment": config });

    let census = run_census(&config)?;
    manifest.degenerate_discards = Some(census.degenerate_discards);
    let fraction = qualifying_fraction(&census)?;
    let mut opts = FitOptions::new(config.fit_window);
    opts.resamples = a.resamples;
    opts.bootstrap_seed = a.seed;
    opts.weighting = if a.weighted { Weighting::Counts } else { Weighting::Unweighted };
    let fit = power_law_fit_with(&census, &opts);

    let mut csv = Vec::new();
    census.write_csv(&mut csv)?;
    write_output(manifest, dir.join("rsp_census.csv"), &String::from_utf8(csv).expect("ascii"))?;
    manifest.summary = json!({
        "num_samples": census.num_samples,
        "pairs_examined": census.pairs_examined,
        "qualifying_pairs": census.total(),
        "qualifying_fraction": fraction,
        "pairs_per_site": pairs_per_site(&census)?,
    });
    let fit = fit?;
    write_output(manifest, dir.join("rsp_census_fit.json"), &json_text(&fit))?;
    manifest.summary["exponent"] = json!(fit.exponent);
    manifest.summary["stderr"] = json!(fit.exponent_stderr);
    println!(
        "L={} N={} delta={}: fraction {:.6e}, exponent {:.4} +- {:.4} over [{lo}, {hi}] (R^2 {:.4})",
        a.length, a.samples, a.delta, fraction, fit.exponent, fit.exponent_stderr, fit.r_squared
    );
    Ok(())
}

fn refit(a: &FitArgs, dir: &Path, manifest: &mut RunManifest) -> Result<(), Failure> {
    let file = std::fs::File::open(&a.input)?;
    let census = PairCensus::read_csv(std::io::BufReader::new(file))?;
    let mut opts = FitOptions::new((a.fit_min, a.fit_max));
    opts.resamples = a.resamples;
    opts.bootstrap_seed = a.seed;
    opts.weighting = if a.weighted { Weighting::Counts } else { Weighting::Unweighted };
    let fit = power_law_fit_with(&census, &opts)?;
    write_output(manifest, dir.join("fit.json"), &json_text(&fit))?;
    manifest.summary = json!({ "bootstrap": "poisson", "exponent": fit.exponent, "stderr": fit.exponent_stderr });
    println!("exponent {:.4} +- {:.4} over [{}, {}]", fit.exponent, fit.exponent_stderr, a.fit_min, a.fit_max);
    Ok(())
}

/// Result of [`pairstate_scan`].
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub total_sites: usize,
    /// Amplitude of the pair-length law realized by the construction.
    pub amplitude: f64,
    /// `(N_A, mean S, analytic S)`
    pub entropy: Vec<(usize, f64, f64)>,
    /// `(r, mean E_D, analytic E_D)`
    pub distillable: Vec<(usize, f64, f64)>,
}

/// Log-spaced distinct integers from `lo` to `hi` inclusive.
pub fn log_spaced(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    if points <= 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as usize)
        .collect();
    v.dedup();
    v
}

/// Ensemble scan over `chunks` independent pair states, averaged with
/// placement-count weights.
pub fn pairstate_scan(a: &PairstateScanArgs) -> Result<ScanResult, Failure> {
    if !(a.alpha > 1.0) {
        return Err(usage(format!("alpha = {} must exceed 1", a.alpha)));
    }
    if a.interval_min == 0 || a.interval_min > a.interval_max {
        return Err(usage("interval bounds must satisfy 1 <= min <= max"));
    }
    if a.block == 0 || a.r_min == 0 || a.r_min > a.r_max || a.chunks == 0 || a.fragments == 0 {
        return Err(usage("block, separations, chunks and fragments must be positive and ordered"));
    }
    let model = PowerLawModel::one_dimensional(a.alpha, 1.0)?;
    let sampler = FragmentSampler::new(model, a.k_max)?;
    let amplitude = sampler.construction_amplitude();
    let model = model.with_amplitude(amplitude)?;
    let lengths = log_spaced(a.interval_min, a.interval_max, a.points);
    let seps: Vec<usize> = (a.r_min..=a.r_max).collect();

    struct Chunk {
        sites: usize,
        entropy: Vec<(f64, f64)>,
        ed: Vec<(f64, f64)>,
    }
    let one = |index: usize| -> Result<Chunk, Failure> {
        let mut rng = substream(a.seed, index as u64);
        let config = sample_chain_state(&sampler, a.fragments, a.qudit_dim, &mut rng)?;
        let n = config.num_sites();
        let weighted = |span: usize, f: &dyn Fn() -> bellrange::Result<f64>| {
            if span > n {
                return Ok((0.0, 0.0));
            }
            let w = (n - span + 1) as f64;
            f().map(|m| (m * w, w))
        };
        let entropy = lengths
            .iter()
            .map(|&len| weighted(len, &|| mean_interval_entropy(&config, len)))
            .collect::<bellrange::Result<_>>()?;
        let ed = seps
            .iter()
            .map(|&r| {
                weighted(2 * a.block + r - 1, &|| mean_distillable(&config, a.block, a.block, r))
            })
            .collect::<bellrange::Result<_>>()?;
        Ok(Chunk { sites: n, entropy, ed })
    };
    let pool = pool(a.threads)?;
    let chunks: Vec<Chunk> = pool.install(|| {
        (0..a.chunks).into_par_iter().map(one).collect::<Result<_, Failure>>()
    })?;

    let combine = |pick: &dyn Fn(&Chunk) -> &Vec<(f64, f64)>, i: usize| {
        let (s, w) = chunks
            .iter()
            .map(|c| pick(c)[i])
            .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
        if w > 0.0 { s / w } else { f64::NAN }
    };
    let d = a.qudit_dim as f64;
    Ok(ScanResult {
        total_sites: chunks.iter().map(|c| c.sites).sum(),
        amplitude,
        entropy: lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let analytic = analytic_entropy(&model, d, len as f64).unwrap_or(f64::NAN);
                (len, combine(&|c| &c.entropy, i), analytic)
            })
            .collect(),
        distillable: seps
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let b = a.block as f64;
                let analytic = analytic_ed(&model, d, b, b, r as f64).unwrap_or(f64::NAN);
                (r, combine(&|c| &c.ed, i), analytic)
            })
            .collect(),
    })
}

/// Abscissa on which the ensemble entropy is linear: `N^(2 - alpha)`, or
/// `ln N` at `alpha = 2`.
pub fn entropy_form(alpha: f64, n: f64) -> f64 {
    if alpha == 2.0 {
        n.ln()
    } else {
        n.powf(2.0 - alpha)
    }
}

/// `R^2` of the ensemble entropy against [`entropy_form`].
pub fn entropy_form_r_squared(alpha: f64, rows: &[(usize, f64, f64)]) -> Result<f64, Failure> {
    let xs: Vec<f64> = rows.iter().map(|r| entropy_form(alpha, r.0 as f64)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(linear_regression(&xs, &ys, None)?.r_squared)
}

fn pairstate_scan_cmd(a: &PairstateScanArgs, dir: &Path, manifest: &mut RunManifest) -> Result<(), Failure> {
    let scan = pairstate_scan(a)?;
    let mut ent = String::from("n_a,mean_entropy,analytic_entropy\n");
    for (n, m, an) in &scan.entropy {
        writeln!(ent, "{n},{m},{an}").unwrap();
    }
    let mut ed = String::from("r,mean_ed,analytic_ed\n");
    for (r, m, an) in &scan.distillable {
        writeln!(ed, "{r},{m},{an}").unwrap();
    }
    let r2 = entropy_form_r_squared(a.alpha, &scan.entropy).ok();
    write_output(manifest, dir.join("pairstate_entropy.csv"), &ent)?;
    write_output(manifest, dir.join("pairstate_ed.csv"), &ed)?;
    manifest.summary = json!({
        "total_sites": scan.total_sites,
        "amplitude": scan.amplitude,
        "entropy_form": if a.alpha == 2.0 { "ln N".to_string() } else { format!("N^{}", 2.0 - a.alpha) },
        "entropy_form_r_squared": r2,
    });
    println!(
        "alpha={} sites={} amplitude={:.6}: R^2 of S vs form {:?}",
        a.alpha, scan.total_sites, scan.amplitude, r2
    );
    Ok(())
}

fn rainbow_check(a: &RainbowCheckArgs, dir: &Path, manifest: &mut RunManifest) -> Result<(), Failure> {
    if a.sizes.is_empty() {
        return Err(usage("at least one size is required"));
    }
    let specs = a
        .sizes
        .iter()
        .map(|&n| RainbowSpec::new(n, a.lambda))
        .collect::<bellrange::Result<Vec<_>>>()?;
    let mut profile = String::from("half_length,site,mirror,coherent_info\n");
    let mut summary = String::from("half_length,min_coherent_info,mean_coherent_info\n");
    let mut minima = Vec::new();
    for spec in &specs {
        let n = spec.half_length();
        let ics = rainbow_profile(spec)?;
        for (i, ic) in ics.iter().enumerate() {
            writeln!(profile, "{n},{},{},{ic}", i + 1, 2 * n - i).unwrap();
        }
        let min = ics.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = ics.iter().sum::<f64>() / ics.len() as f64;
        writeln!(summary, "{n},{min},{mean}").unwrap();
        minima.push(min);
    }
    write_output(manifest, dir.join("rainbow_profile.csv"), &profile)?;
    write_output(manifest, dir.join("rainbow_summary.csv"), &summary)?;
    let spread = min_spread(&minima);
    manifest.summary = json!({ "minima": minima, "relative_spread": spread });
    println!("lambda={}: minima {:?}, relative spread {:?}", a.lambda, minima, spread);
    Ok(())
}

/// `(max - min) / max` of positive minima; `None` if any is not positive.
pub fn min_spread(minima: &[f64]) -> Option<f64> {
    let lo = minima.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo > 0.0).then(|| (hi - lo) / hi)
}

/// One randomized monogamy geometry.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub a: Interval,
    pub blocks: Vec<Interval>,
    /// The blocks cover the complement of `a` exactly.
    pub partition: bool,
}

/// Splits `[lo, hi]` into at most `pieces` contiguous intervals.
fn split<R: Rng + ?Sized>(lo: usize, hi: usize, pieces: usize, rng: &mut R) -> Vec<Interval> {
    if lo > hi {
        return Vec::new();
    }
    let len = hi - lo + 1;
    let k = rng.random_range(1..=pieces.min(len));
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, len - 1, k - 1)
        .into_iter()
        .map(|c| lo + c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut start = lo;
    for c in cuts.into_iter().chain(std::iter::once(hi + 1)) {
        out.push(Interval::new(start, c - start).expect("nonempty piece"));
        start = c;
    }
    out
}

/// Random `A` with blocks on both sides. With `partition` the blocks tile
/// the complement; otherwise each tile is shrunk to a random sub-interval
/// and some are dropped.
pub fn random_geometry<R: Rng + ?Sized>(
    num_sites: usize,
    max_interval: usize,
    max_blocks: usize,
    partition: bool,
    rng: &mut R,
) -> Geometry {
    let len = rng.random_range(1..=max_interval.min(num_sites - 1).max(1));
    let start = rng.random_range(1..=num_sites - len + 1);
    let a = Interval::new(start, len).expect("valid interval");
    let mut blocks = split(1, start - 1, max_blocks, rng);
    blocks.extend(split(start + len, num_sites, max_blocks, rng));
    if !partition {
        let tiles = std::mem::take(&mut blocks);
        for t in tiles {
            if rng.random_bool(0.3) {
                continue;
            }
            let l = rng.random_range(1..=t.len());
            let s = rng.random_range(t.start()..=t.end() + 1 - l);
            blocks.push(Interval::new(s, l).expect("valid block"));
        }
    }
    Geometry { a, blocks, partition }
}

/// Tallies of [`monogamy_survey`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MonogamyTally {
    pub geometries: usize,
    pub violations: usize,
    pub partitions: usize,
    /// Partitions where `sum_i E(A, B_i)` equals `S(A)` exactly.
    pub partition_equalities: usize,
}

pub fn monogamy_survey<R: Rng + ?Sized>(
    config: &PairConfiguration,
    geometries: usize,
    max_interval: usize,
    max_blocks: usize,
    rng: &mut R,
    mut report: impl FnMut(&Geometry, f64, f64),
) -> bellrange::Result<MonogamyTally> {
    let mut tally = MonogamyTally::default();
    for g in 0..geometries {
        let geo = random_geometry(config.num_sites(), max_interval, max_blocks, g % 2 == 0, rng);
        let r = monogamy_check(config, &geo.a, &geo.blocks)?;
        tally.geometries += 1;
        if !r.holds {
            tally.violations += 1;
        }
        if geo.partition {
            tally.partitions += 1;
            let s = entropy_of_interval(config, &geo.a)?;
            if r.lhs == r.rhs && r.rhs == s {
                tally.partition_equalities += 1;
            }
        }
        report(&geo, r.lhs, r.rhs);
    }
    Ok(tally)
}

fn monogamy_demo(a: &MonogamyDemoArgs, manifest: &mut RunManifest) -> Result<(), Failure> {
    if a.max_interval == 0 || a.max_blocks == 0 {
        return Err(usage("interval and block limits must be positive"));
    }
    let sampler = FragmentSampler::new(PowerLawModel::one_dimensional(a.alpha, 1.0)?, a.k_max)?;
    let mut rng = stream(a.seed);
    let config = sample_chain_state(&sampler, a.fragments, a.qudit_dim, &mut rng)?;
    if config.num_sites() < 2 {
        return Err(usage("the sampled state needs at least two sites"));
    }
    let verbose = a.verbose;
    let tally = monogamy_survey(&config, a.geometries, a.max_interval, a.max_blocks, &mut rng, |g, lhs, rhs| {
        if verbose {
            let blocks: Vec<String> = g.blocks.iter().map(|b| format!("[{},{}]", b.start(), b.end())).collect();
            println!(
                "A=[{},{}] B={} partition={} lhs={lhs} rhs={rhs} {}",
                g.a.start(),
                g.a.end(),
                blocks.join(""),
                g.partition,
                if lhs == rhs { "equal" } else if lhs <= rhs { "holds" } else { "VIOLATED" }
            );
        }
    })?;
    println!(
        "{} sites, {} geometries: {} violations; {} of {} partitions saturate with equality",
        config.num_sites(),
        tally.geometries,
        tally.violations,
        tally.partition_equalities,
        tally.partitions
    );
    manifest.summary = json!({ "num_sites": config.num_sites(), "tally": tally });
    if tally.violations > 0 {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("{} monogamy violations", tally.violations),
            sample: None,
        });
    }
    Ok(())
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))
}
