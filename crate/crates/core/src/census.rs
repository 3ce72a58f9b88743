//! Coherent-information census of random-singlet ground states.
//!
//! For every disorder sample the half-filled ground state of a random chain
//! is built and every site pair `j < k` whose symmetric coherent information
//! exceeds a threshold is counted at distance `r = k - j`. Samples run in
//! parallel; each one draws from its own substream, and per-sample shards are
//! merged in sample order, so results do not depend on the worker count.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{rainbow_chain, rsp_chain, DisorderSpec, RainbowSpec};
use crate::error::{invalid, Error, Result};
use crate::fermion::{half_filled_ground_state, pair_coherent_info, subsystem_entropy, CorrelationMatrix, CouplingChain};
use crate::rng::{substream, Stream};

/// `ln 2 / 2`: pairs above this are counted as approximate Bell pairs.
pub const DEFAULT_THRESHOLD_NATS: f64 = LN_2 / 2.0;

/// Redraws allowed per sample before a degenerate Fermi level is fatal.
pub const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub chain_length: usize,
    pub num_samples: usize,
    pub delta: f64,
    pub threshold_nats: f64,
    pub fit_window: (usize, usize),
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub worker_count: usize,
    #[serde(default)]
    pub output_path: Option<String>,
}

pub fn default_fit_window(chain_length: usize) -> (usize, usize) {
    (3, 101.min(chain_length / 5))
}

impl ExperimentConfig {
    pub fn new(chain_length: usize, num_samples: usize, delta: f64, master_seed: u64) -> Self {
        Self {
            chain_length,
            num_samples,
            delta,
            threshold_nats: DEFAULT_THRESHOLD_NATS,
            fit_window: default_fit_window(chain_length),
            master_seed,
            worker_count: 1,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_length < 4 || self.chain_length % 2 == 1 {
            return Err(invalid(format!(
                "chain length {} must be even and at least 4",
                self.chain_length
            )));
        }
        if self.num_samples == 0 {
            return Err(invalid("at least one sample is required"));
        }
        DisorderSpec::new(self.delta)?;
        if !(self.threshold_nats > 0.0 && self.threshold_nats < LN_2) {
            return Err(invalid(format!(
                "threshold {} nats must lie in (0, ln 2)",
                self.threshold_nats
            )));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.worker_count)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))
    }
}

/// Per-distance counts of site pairs above threshold.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairCensus {
    counts: BTreeMap<usize, u64>,
    pub num_samples: usize,
    pub chain_length: usize,
    pub threshold_nats: f64,
    pub pairs_examined: u64,
    pub degenerate_discards: u64,
    /// Sparse `(r, count)` histogram of each sample, in sample order.
    #[serde(skip)]
    shards: Vec<Vec<(u32, u32)>>,
}

impl PairCensus {
    /// Census holding only aggregate counts, e.g. read back from CSV.
    pub fn from_counts(counts: BTreeMap<usize, u64>) -> Self {
        Self {
            counts: counts.into_iter().filter(|&(_, n)| n > 0).collect(),
            ..Self::default()
        }
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn shards(&self) -> &[Vec<(u32, u32)>] {
        &self.shards
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    fn push_shard(&mut self, shard: Vec<(u32, u32)>) {
        for &(r, n) in &shard {
            *self.counts.entry(r as usize).or_default() += n as u64;
        }
        self.shards.push(shard);
    }

    /// Appends the samples of `other` after those of `self`.
    pub fn merge(mut self, other: PairCensus) -> Result<Self> {
        if self.num_samples > 0
            && other.num_samples > 0
            && (self.chain_length != other.chain_length || self.threshold_nats != other.threshold_nats)
        {
            return Err(invalid("cannot merge censuses of different experiments"));
        }
        for (r, n) in other.counts {
            *self.counts.entry(r).or_default() += n;
        }
        self.shards.extend(other.shards);
        if self.num_samples == 0 {
            self.chain_length = other.chain_length;
            self.threshold_nats = other.threshold_nats;
        }
        self.num_samples += other.num_samples;
        self.pairs_examined += other.pairs_examined;
        self.degenerate_discards += other.degenerate_discards;
        Ok(self)
    }

    /// `r,count` with a header row, LF line endings, nonzero bins only.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,count")?;
        for (r, n) in &self.counts {
            writeln!(out, "{r},{n}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| invalid(e.to_string()))?
            .unwrap_or_default();
        if header.trim() != "r,count" {
            return Err(invalid(format!("census CSV header must be 'r,count', found '{header}'")));
        }
        let mut counts = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| invalid(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = || -> Option<(usize, u64)> {
                let (r, n) = line.trim().split_once(',')?;
                Some((r.parse().ok()?, n.parse().ok()?))
            };
            let (r, n) = parse().ok_or_else(|| invalid(format!("census CSV line {}: '{line}'", i + 2)))?;
            *counts.entry(r).or_insert(0) += n;
        }
        Ok(Self::from_counts(counts))
    }
}

/// Count of pairs above `threshold_nats`, indexed by distance (`0..L`).
pub fn census_one_sample(c: &CorrelationMatrix, threshold_nats: f64) -> Vec<u64> {
    let n = c.num_sites();
    let mut hist = vec![0u64; n];
    for j in 0..n {
        for k in j + 1..n {
            let ic = pair_coherent_info(c, j, k).expect("distinct in-range sites");
            if ic > threshold_nats {
                hist[k - j] += 1;
            }
        }
    }
    hist
}

/// Draws chains from `rng` until one has a resolvable Fermi level.
fn sample_ground_state(
    length: usize,
    spec: &DisorderSpec,
    rng: &mut Stream,
) -> Result<(CorrelationMatrix, u64)> {
    let mut discards = 0;
    loop {
        let chain = rsp_chain(length, spec, rng)?;
        match half_filled_ground_state(&chain) {
            Ok(c) => return Ok((c, discards)),
            Err(Error::DegenerateFermiLevel { .. }) if (discards as usize) < MAX_REDRAWS => {
                discards += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn census_sample(config: &ExperimentConfig, spec: &DisorderSpec, index: u64) -> Result<PairCensus> {
    let mut rng = substream(config.master_seed, index);
    let (c, discards) = sample_ground_state(config.chain_length, spec, &mut rng).map_err(|e| {
        Error::Sample {
            sample: index,
            seed: config.master_seed,
            source: Box::new(e),
        }
    })?;
    let hist = census_one_sample(&c, config.threshold_nats);
    let l = config.chain_length as u64;
    let mut census = PairCensus {
        num_samples: 1,
        chain_length: config.chain_length,
        threshold_nats: config.threshold_nats,
        pairs_examined: l * (l - 1) / 2,
        degenerate_discards: discards,
        ..PairCensus::default()
    };
    census.push_shard(
        hist.iter()
            .enumerate()
            .filter(|&(_, &n)| n > 0)
            .map(|(r, &n)| (r as u32, n as u32))
            .collect(),
    );
    Ok(census)
}

pub fn run_census(config: &ExperimentConfig) -> Result<PairCensus> {
    config.validate()?;
    let spec = DisorderSpec::new(config.delta)?;
    let shards: Vec<PairCensus> = config.pool()?.install(|| {
        (0..config.num_samples as u64)
            .into_par_iter()
            .map(|s| census_sample(config, &spec, s))
            .collect::<Result<_>>()
    })?;
    let empty = PairCensus {
        chain_length: config.chain_length,
        threshold_nats: config.threshold_nats,
        ..PairCensus::default()
    };
    shards.into_iter().try_fold(empty, PairCensus::merge)
}

/// Fraction of examined pairs that qualified.
pub fn qualifying_fraction(census: &PairCensus) -> Result<f64> {
    if census.pairs_examined == 0 {
        return Err(Error::EmptyCensus);
    }
    Ok(census.total() as f64 / census.pairs_examined as f64)
}

/// Qualifying pairs per site, `sum counts / (num_samples L)`.
///
/// Each site takes part in at most a few strongly entangled pairs, so this
/// density is what stays fixed as `L` grows; [`qualifying_fraction`] falls
/// like `1 / L`.
pub fn pairs_per_site(census: &PairCensus) -> Result<f64> {
    let sites = census.num_samples as u64 * census.chain_length as u64;
    if sites == 0 {
        return Err(Error::EmptyCensus);
    }
    Ok(census.total() as f64 / sites as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub length: usize,
    pub mean_entropy: f64,
    pub stderr: f64,
}

/// Ensemble mean entropy of centered intervals of each length.
pub fn entropy_scaling_scan(config: &ExperimentConfig, lengths: &[usize]) -> Result<Vec<ScalingRow>> {
    let l = config.chain_length;
    if l < 2 || l % 2 == 1 {
        return Err(invalid(format!("chain length {l} must be even")));
    }
    if config.num_samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    if let Some(&bad) = lengths.iter().find(|&&n| n == 0 || n > l) {
        return Err(invalid(format!("interval length {bad} does not fit in {l} sites")));
    }
    let spec = DisorderSpec::new(config.delta)?;
    let per_sample: Vec<Vec<f64>> = config.pool()?.install(|| {
        (0..config.num_samples as u64)
            .into_par_iter()
            .map(|s| -> Result<Vec<f64>> {
                let mut rng = substream(config.master_seed, s);
                let (c, _) = sample_ground_state(l, &spec, &mut rng)?;
                lengths
                    .iter()
                    .map(|&n| {
                        let start = (l - n) / 2;
                        let sites: Vec<usize> = (start..start + n).collect();
                        subsystem_entropy(&c, &sites)
                    })
                    .collect()
            })
            .collect::<Result<_>>()
    })?;
    let m = per_sample.len() as f64;
    Ok(lengths
        .iter()
        .enumerate()
        .map(|(i, &length)| {
            let mean = per_sample.iter().map(|v| v[i]).sum::<f64>() / m;
            let var = if m > 1.0 {
                per_sample.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            ScalingRow {
                length,
                mean_entropy: mean,
                stderr: (var / m).sqrt(),
            }
        })
        .collect())
}

/// Coherent information between mirror sites `i` and `2N + 1 - i`
/// (one-based) for `i = 1..=N`.
pub fn mirror_pair_profile(chain: &CouplingChain, spec: &RainbowSpec) -> Result<Vec<f64>> {
    let n = spec.half_length();
    if chain.num_sites() != 2 * n {
        return Err(invalid(format!(
            "chain has {} sites, rainbow N = {n} needs {}",
            chain.num_sites(),
            2 * n
        )));
    }
    let c = half_filled_ground_state(chain)?;
    (0..n).map(|i| pair_coherent_info(&c, i, 2 * n - 1 - i)).collect()
}

/// [`mirror_pair_profile`] of the rainbow chain described by `spec`.
pub fn rainbow_profile(spec: &RainbowSpec) -> Result<Vec<f64>> {
    mirror_pair_profile(&rainbow_chain(spec), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::CouplingChain;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn singlet_census() {
        let c = half_filled_ground_state(&CouplingChain::new(vec![1.0]).unwrap()).unwrap();
        assert_eq!(census_one_sample(&c, DEFAULT_THRESHOLD_NATS), vec![0, 1]);
    }

    #[test]
    fn product_state_census_is_empty() {
        let c = CorrelationMatrix::from_matrix(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0])),
            2,
        )
        .unwrap();
        assert!(census_one_sample(&c, DEFAULT_THRESHOLD_NATS).iter().all(|&n| n == 0));
    }

    #[test]
    fn rainbow_census_sits_on_mirror_distances() {
        for (decay, expected) in [(0.1, vec![0, 1, 0, 1, 0, 1, 0, 1]), (0.5, vec![0; 8])] {
            let spec = RainbowSpec::new(4, decay).unwrap();
            let c = half_filled_ground_state(&rainbow_chain(&spec)).unwrap();
            let hist = census_one_sample(&c, DEFAULT_THRESHOLD_NATS);
            // Oracle: the mirror pairs (i, 7 - i) sit at r = 7, 5, 3, 1.
            let mut mirror = vec![0u64; 8];
            for i in 0..4 {
                if pair_coherent_info(&c, i, 7 - i).unwrap() > DEFAULT_THRESHOLD_NATS {
                    mirror[7 - 2 * i] += 1;
                }
            }
            assert_eq!(mirror, expected, "decay {decay}");
            assert_eq!(hist, mirror, "decay {decay}");
        }
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::new(20, 2, 3.0, 0);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.fit_window, (3, 4));
        assert_eq!(default_fit_window(500), (3, 100));
        assert_eq!(default_fit_window(1000), (3, 101));
        for bad in [
            ExperimentConfig { chain_length: 21, ..ok.clone() },
            ExperimentConfig { chain_length: 2, ..ok.clone() },
            ExperimentConfig { num_samples: 0, ..ok.clone() },
            ExperimentConfig { delta: 0.0, ..ok.clone() },
            ExperimentConfig { threshold_nats: LN_2, ..ok.clone() },
            ExperimentConfig { threshold_nats: 0.0, ..ok.clone() },
        ] {
            assert!(run_census(&bad).is_err());
        }
    }

    #[test]
    fn tiny_runs_are_deterministic() {
        let mut config = ExperimentConfig::new(4, 3, 3.0, 99);
        let a = run_census(&config).unwrap();
        config.worker_count = 3;
        let b = run_census(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_samples, 3);
        assert_eq!(a.pairs_examined, 18);
        assert_eq!(a.shards().len(), 3);
        assert!(a.counts().keys().all(|&r| (1..4).contains(&r)));
        assert_eq!(a.degenerate_discards, 0);
    }

    #[test]
    fn merge_is_order_independent_in_counts() {
        let config = ExperimentConfig::new(10, 4, 2.0, 5);
        let spec = DisorderSpec::new(2.0).unwrap();
        let parts: Vec<PairCensus> = (0..4).map(|s| census_sample(&config, &spec, s).unwrap()).collect();
        let fwd = parts.iter().cloned().try_fold(PairCensus::default(), PairCensus::merge).unwrap();
        let rev = parts.iter().rev().cloned().try_fold(PairCensus::default(), PairCensus::merge).unwrap();
        assert_eq!(fwd.counts(), rev.counts());
        assert_eq!(fwd.pairs_examined, rev.pairs_examined);
        assert_eq!(fwd.counts(), run_census(&config).unwrap().counts());
    }

    #[test]
    fn threshold_monotonicity() {
        let mut config = ExperimentConfig::new(40, 5, 3.0, 8);
        let mut previous: Option<PairCensus> = None;
        for t in [0.05, 0.2, DEFAULT_THRESHOLD_NATS, 0.5, 0.65] {
            config.threshold_nats = t;
            let census = run_census(&config).unwrap();
            if let Some(prev) = &previous {
                for (r, &n) in census.counts() {
                    assert!(n <= prev.counts().get(r).copied().unwrap_or(0));
                }
            }
            previous = Some(census);
        }
    }

    #[test]
    fn fraction_bounds() {
        assert!(matches!(qualifying_fraction(&PairCensus::default()), Err(Error::EmptyCensus)));
        let mut empty = PairCensus::default();
        empty.pairs_examined = 10;
        assert_eq!(qualifying_fraction(&empty).unwrap(), 0.0);
        let config = ExperimentConfig::new(2 * 2, 1, 1.0, 0);
        let census = run_census(&config).unwrap();
        let f = qualifying_fraction(&census).unwrap();
        assert!((0.0..=1.0).contains(&f));
        let density = pairs_per_site(&census).unwrap();
        assert!((density * 4.0 - f * 6.0).abs() < 1e-15);
        assert!(pairs_per_site(&PairCensus::default()).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let census = PairCensus::from_counts([(1, 5), (3, 2), (9, 1)].into_iter().collect());
        let mut buf = Vec::new();
        census.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "r,count\n1,5\n3,2\n9,1\n");
        assert_eq!(PairCensus::read_csv(buf.as_slice()).unwrap().counts(), census.counts());
        assert!(PairCensus::read_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(PairCensus::read_csv("r,count\n1;2\n".as_bytes()).is_err());
    }

    #[test]
    fn whole_system_is_pure() {
        let config = ExperimentConfig::new(40, 4, 3.0, 2);
        let rows = entropy_scaling_scan(&config, &[40, 4]).unwrap();
        assert!(rows[0].mean_entropy < 1e-8);
        assert!(rows[1].mean_entropy > 0.0);
        assert!(entropy_scaling_scan(&config, &[41]).is_err());
    }

    #[test]
    fn singlet_rainbow_profile() {
        let p = rainbow_profile(&RainbowSpec::new(1, 0.5).unwrap()).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0] - LN_2).abs() < 1e-12);
        let wrong = CouplingChain::new(vec![1.0; 5]).unwrap();
        assert!(mirror_pair_profile(&wrong, &RainbowSpec::new(2, 0.5).unwrap()).is_err());
    }
}
