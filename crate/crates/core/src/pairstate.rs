//! States made of Bell pairs with power-law distributed lengths.
//!
//! A chain is cut into fragments of `2k` sites and inside each fragment site
//! `n` is paired with site `2k + 1 - n` (a nested "rainbow"). With half-lengths
//! drawn from `p(k) ~ k^-(1 + alpha)` the pair lengths `l = 2m - 1` occur with
//! frequency `P(K >= m) / E[2K]` per site, a tail `~ l^-alpha`.
//!
//! On such states every entanglement quantity is a pair count times `ln d`,
//! so entropies, distillable entanglement and the monogamy inequality can be
//! evaluated exactly. Sites are labelled `1..=L`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_K_MAX: usize = 1_000_000;

/// `P(r) = C r^-alpha` in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawModel {
    exponent: f64,
    amplitude: f64,
    dimension: u32,
}

impl PowerLawModel {
    pub fn new(exponent: f64, amplitude: f64, dimension: u32) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 1.0) {
            return Err(invalid(format!(
                "exponent {exponent}: the length distribution is normalizable only for alpha > 1"
            )));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid(format!("amplitude {amplitude} must be positive")));
        }
        if dimension == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self {
            exponent,
            amplitude,
            dimension,
        })
    }

    pub fn one_dimensional(exponent: f64, amplitude: f64) -> Result<Self> {
        Self::new(exponent, amplitude, 1)
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn with_amplitude(self, amplitude: f64) -> Result<Self> {
        Self::new(self.exponent, amplitude, self.dimension)
    }
}

/// `sum_{k=1}^{k_max} k^-(1 + alpha)`, accumulated from the smallest term.
pub fn truncated_normalization(model: &PowerLawModel, k_max: usize) -> f64 {
    power_sum(1.0 + model.exponent, k_max)
}

fn power_sum(s: f64, k_max: usize) -> f64 {
    (1..=k_max).rev().map(|k| (k as f64).powf(-s)).sum()
}

/// Inverse-CDF sampler for fragment half-lengths on `1..=k_max`.
#[derive(Debug, Clone)]
pub struct FragmentSampler {
    model: PowerLawModel,
    normalization: f64,
    /// `cdf[k - 1] = P(K <= k)`
    cdf: Vec<f64>,
}

impl FragmentSampler {
    pub fn new(model: PowerLawModel, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(invalid("k_max must be at least 1"));
        }
        let s = 1.0 + model.exponent;
        let weights: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(-s)).collect();
        let normalization = weights.iter().rev().sum::<f64>();
        // Build the CDF from the upper tail so that small tail masses keep
        // their relative accuracy.
        let mut cdf = vec![0.0; k_max];
        let mut tail = 0.0;
        for k in (1..=k_max).rev() {
            cdf[k - 1] = 1.0 - tail / normalization;
            tail += weights[k - 1];
        }
        cdf[k_max - 1] = 1.0;
        Ok(Self {
            model,
            normalization,
            cdf,
        })
    }

    pub fn model(&self) -> &PowerLawModel {
        &self.model
    }

    pub fn k_max(&self) -> usize {
        self.cdf.len()
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn probability(&self, k: usize) -> f64 {
        if k == 0 || k > self.k_max() {
            0.0
        } else {
            (k as f64).powf(-(1.0 + self.model.exponent)) / self.normalization
        }
    }

    /// `P(K >= m)`.
    pub fn tail(&self, m: usize) -> f64 {
        match m {
            0 | 1 => 1.0,
            m if m > self.k_max() => 0.0,
            m => 1.0 - self.cdf[m - 2],
        }
    }

    pub fn mean_half_length(&self) -> f64 {
        power_sum(self.model.exponent, self.k_max()) / self.normalization
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // Most draws are short fragments: scan the head before bisecting.
        let head = self.cdf.len().min(8);
        if let Some(k) = self.cdf[..head].iter().position(|&c| c > u) {
            return k + 1;
        }
        head + self.cdf[head..].partition_point(|&c| c <= u) + 1
    }

    /// Expected number of pairs of the given length per site.
    pub fn pair_length_frequency(&self, length: usize) -> f64 {
        if length % 2 == 0 {
            return 0.0;
        }
        self.tail(length.div_ceil(2)) / (2.0 * self.mean_half_length())
    }

    /// Large-distance amplitude `C` of the construction, with the law
    /// written as a smooth density `C r^-alpha` over all integer distances
    /// (only odd lengths occur, each at twice that density):
    /// `C = 2^(alpha - 1) / (alpha * sum_k k^-alpha)`.
    pub fn construction_amplitude(&self) -> f64 {
        let a = self.model.exponent;
        2f64.powf(a - 1.0) / (a * power_sum(a, self.k_max()))
    }
}

/// One half-length draw from `k^-(1 + alpha)` truncated at `k_max`.
///
/// Builds the sampling table on every call; use [`FragmentSampler`] for
/// repeated draws.
pub fn sample_fragment_half_length<R: Rng + ?Sized>(
    model: &PowerLawModel,
    rng: &mut R,
    k_max: usize,
) -> Result<usize> {
    Ok(FragmentSampler::new(*model, k_max)?.sample(rng))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentSequence {
    half_lengths: Vec<usize>,
}

impl FragmentSequence {
    pub fn new(half_lengths: Vec<usize>) -> Result<Self> {
        if half_lengths.contains(&0) {
            return Err(invalid("fragment half-lengths must be positive"));
        }
        Ok(Self { half_lengths })
    }

    pub fn sample<R: Rng + ?Sized>(
        sampler: &FragmentSampler,
        num_fragments: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            half_lengths: (0..num_fragments).map(|_| sampler.sample(rng)).collect(),
        }
    }

    pub fn half_lengths(&self) -> &[usize] {
        &self.half_lengths
    }

    pub fn total_sites(&self) -> usize {
        2 * self.half_lengths.iter().sum::<usize>()
    }
}

/// A partial matching of sites `1..=num_sites` into Bell pairs of qudit
/// dimension `qudit_dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairConfiguration {
    qudit_dim: u32,
    pairs: Vec<(usize, usize)>,
    /// `partner[s - 1]`, zero when unmatched.
    partner: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    num_sites: usize,
    qudit_dim: u32,
    pairs: Vec<[usize; 2]>,
}

impl PairConfiguration {
    pub fn new(num_sites: usize, qudit_dim: u32, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if qudit_dim < 2 {
            return Err(invalid("qudit dimension must be at least 2"));
        }
        let mut partner = vec![0usize; num_sites];
        for &(i, j) in &pairs {
            if !(1 <= i && i < j) {
                return Err(invalid(format!("pair ({i}, {j}) must satisfy 1 <= i < j")));
            }
            if j > num_sites {
                return Err(Error::SiteOutOfRange { site: j, num_sites });
            }
            for (a, b) in [(i, j), (j, i)] {
                if partner[a - 1] != 0 {
                    return Err(invalid(format!("site {a} appears in two pairs")));
                }
                partner[a - 1] = b;
            }
        }
        Ok(Self {
            qudit_dim,
            pairs,
            partner,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.partner.len()
    }

    pub fn qudit_dim(&self) -> u32 {
        self.qudit_dim
    }

    pub fn log_dim(&self) -> f64 {
        (self.qudit_dim as f64).ln()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn partner(&self, site: usize) -> Option<usize> {
        match self.partner.get(site.wrapping_sub(1)) {
            Some(&p) if p != 0 => Some(p),
            _ => None,
        }
    }

    pub fn is_perfect_matching(&self) -> bool {
        self.partner.iter().all(|&p| p != 0)
    }

    fn check(&self, interval: &Interval) -> Result<()> {
        if interval.end() > self.num_sites() {
            return Err(Error::SiteOutOfRange {
                site: interval.end(),
                num_sites: self.num_sites(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PairRecord {
            num_sites: self.num_sites(),
            qudit_dim: self.qudit_dim,
            pairs: self.pairs.iter().map(|&(i, j)| [i, j]).collect(),
        })
        .expect("pair record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: PairRecord =
            serde_json::from_str(s).map_err(|e| invalid(format!("pair JSON: {e}")))?;
        Self::new(
            rec.num_sites,
            rec.qudit_dim,
            rec.pairs.into_iter().map(|[i, j]| (i, j)).collect(),
        )
    }

    /// Number of pairs of each length, indexed by length.
    pub fn length_histogram(&self) -> Vec<u64> {
        let mut hist = vec![0u64; self.num_sites()];
        for &(i, j) in &self.pairs {
            hist[j - i] += 1;
        }
        hist
    }
}

/// Fragments laid out left to right; inside a fragment of `2k` sites, local
/// site `n` pairs with local site `2k + 1 - n`.
pub fn build_chain_state(fragments: &FragmentSequence, qudit_dim: u32) -> Result<PairConfiguration> {
    if fragments.half_lengths.is_empty() {
        return Err(invalid("at least one fragment is required"));
    }
    let mut pairs = Vec::with_capacity(fragments.total_sites() / 2);
    let mut offset = 0;
    for &k in &fragments.half_lengths {
        pairs.extend((1..=k).map(|n| (offset + n, offset + 2 * k + 1 - n)));
        offset += 2 * k;
    }
    PairConfiguration::new(offset, qudit_dim, pairs)
}

/// Samples `num_fragments` fragments and builds the pair state.
pub fn sample_chain_state<R: Rng + ?Sized>(
    sampler: &FragmentSampler,
    num_fragments: usize,
    qudit_dim: u32,
    rng: &mut R,
) -> Result<PairConfiguration> {
    build_chain_state(&FragmentSequence::sample(sampler, num_fragments, rng), qudit_dim)
}

/// Closed range of sites `start ..= start + length - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    start: usize,
    length: usize,
}

impl Interval {
    pub fn new(start: usize, length: usize) -> Result<Self> {
        if start == 0 || length == 0 {
            return Err(invalid("intervals start at site 1 or later and are nonempty"));
        }
        Ok(Self { start, length })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> usize {
        self.start + self.length - 1
    }

    pub fn contains(&self, site: usize) -> bool {
        self.start <= site && site <= self.end()
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end() && other.start <= self.end()
    }

    /// Lattice distance from the last site of the left interval to the
    /// first site of the right one.
    pub fn separation(&self, other: &Interval) -> Option<usize> {
        if self.overlaps(other) {
            None
        } else if self.end() < other.start {
            Some(other.start - self.end())
        } else {
            Some(self.start - other.end())
        }
    }
}

/// Entropy of `a` in nats: pairs with exactly one endpoint in `a`, times
/// `ln d`.
pub fn entropy_of_interval(config: &PairConfiguration, a: &Interval) -> Result<f64> {
    config.check(a)?;
    let crossing = (a.start..=a.end())
        .filter(|&s| matches!(config.partner(s), Some(p) if !a.contains(p)))
        .count();
    Ok(crossing as f64 * config.log_dim())
}

/// Distillable entanglement between disjoint `a` and `b` in nats: pairs
/// bridging them, times `ln d`.
pub fn distillable_between(config: &PairConfiguration, a: &Interval, b: &Interval) -> Result<f64> {
    config.check(a)?;
    config.check(b)?;
    if a.overlaps(b) {
        return Err(Error::Overlap(a.start.max(b.start)));
    }
    Ok(bridging_pairs(config, a, |p| b.contains(p)) as f64 * config.log_dim())
}

fn bridging_pairs(config: &PairConfiguration, a: &Interval, in_b: impl Fn(usize) -> bool) -> usize {
    (a.start..=a.end())
        .filter(|&s| matches!(config.partner(s), Some(p) if in_b(p)))
        .count()
}

/// Result of [`monogamy_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonogamyReport {
    /// `sum_i E(A, B_i)`
    pub lhs: f64,
    /// `E(A, union B_i)`
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `sum_i E(A, B_i)` with `E(A, union_i B_i)`.
pub fn monogamy_check(
    config: &PairConfiguration,
    a: &Interval,
    bs: &[Interval],
) -> Result<MonogamyReport> {
    config.check(a)?;
    for (i, b) in bs.iter().enumerate() {
        config.check(b)?;
        if a.overlaps(b) {
            return Err(Error::Overlap(a.start.max(b.start)));
        }
        if let Some(c) = bs[..i].iter().find(|c| c.overlaps(b)) {
            return Err(Error::Overlap(c.start.max(b.start)));
        }
    }
    // Summed as pair counts so that equality is not spoiled by rounding.
    let lhs = bs
        .iter()
        .map(|b| bridging_pairs(config, a, |p| b.contains(p)))
        .sum::<usize>() as f64
        * config.log_dim();
    let rhs = bridging_pairs(config, a, |p| bs.iter().any(|b| b.contains(p))) as f64
        * config.log_dim();
    Ok(MonogamyReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Mean of [`entropy_of_interval`] over every placement of an interval of
/// `length` sites, in `O(number of pairs)`.
pub fn mean_interval_entropy(config: &PairConfiguration, length: usize) -> Result<f64> {
    let n = config.num_sites();
    if length == 0 || length > n {
        return Err(invalid(format!("interval length {length} does not fit in {n} sites")));
    }
    let positions = n - length + 1;
    // Windows start at s in [1, positions]; the one starting at s covers
    // [s, s + length - 1]. A pair crosses a window holding exactly one of
    // its endpoints: count windows holding each endpoint, minus twice those
    // holding both.
    let holding = |lo: usize, hi: usize| -> u64 {
        let first = (hi + 1).saturating_sub(length).max(1);
        let last = lo.min(positions);
        if first <= last { (last - first + 1) as u64 } else { 0 }
    };
    let crossings: u64 = config
        .pairs()
        .iter()
        .map(|&(i, j)| holding(i, i) + holding(j, j) - 2 * holding(i, j))
        .sum();
    Ok(crossings as f64 / positions as f64 * config.log_dim())
}

/// Mean of [`distillable_between`] over every placement of blocks of
/// `n_a` and `n_b` sites at separation `r` (block `A` on the left).
pub fn mean_distillable(
    config: &PairConfiguration,
    n_a: usize,
    n_b: usize,
    r: usize,
) -> Result<f64> {
    let n = config.num_sites();
    if n_a == 0 || n_b == 0 || r == 0 {
        return Err(invalid("block sizes and separation must be positive"));
    }
    let span = n_a + r + n_b - 1;
    if span > n {
        return Err(invalid(format!("geometry spans {span} sites, more than {n}")));
    }
    let positions = n - span + 1;
    // A starts at s and B at s + n_a - 1 + r; the pair (i, j), i < j,
    // bridges them for s in [i - n_a + 1, i] intersected with
    // [j - span + 1, j - n_a + 1 - r] and [1, positions].
    let bridges: u64 = config
        .pairs()
        .iter()
        .map(|&(i, j)| {
            let first = (i + 1).saturating_sub(n_a).max((j + 1).saturating_sub(span)).max(1);
            let last = i.min(positions);
            let last = match (j + 1).checked_sub(n_a + r) {
                Some(b) => last.min(b),
                None => return 0,
            };
            if first <= last { (last - first + 1) as u64 } else { 0 }
        })
        .sum();
    Ok(bridges as f64 / positions as f64 * config.log_dim())
}

fn require_1d(model: &PowerLawModel) -> Result<()> {
    if model.dimension != 1 {
        return Err(invalid("this closed form is for one spatial dimension"));
    }
    Ok(())
}

/// Large-`N_A` ensemble entropy of an interval:
///
/// * `C ln d N^(2 - alpha) / (3 alpha - alpha^2 - 2)` for `1 < alpha < 2`
/// * `C ln d ln N` for `alpha = 2`
/// * `C ln d / (alpha^2 - 3 alpha + 2)` for `alpha > 2`
pub fn analytic_entropy(model: &PowerLawModel, qudit_dim: f64, n_a: f64) -> Result<f64> {
    require_1d(model)?;
    let a = model.exponent;
    let c = model.amplitude * qudit_dim.ln();
    Ok(if a < 2.0 {
        c * n_a.powf(2.0 - a) / (3.0 * a - a * a - 2.0)
    } else if a == 2.0 {
        c * n_a.ln()
    } else {
        c / (a * a - 3.0 * a + 2.0)
    })
}

/// `(C ln d / 2) N_A N_B r^-alpha`, valid for `r >> N_A, N_B`.
pub fn analytic_ed(model: &PowerLawModel, qudit_dim: f64, n_a: f64, n_b: f64, r: f64) -> Result<f64> {
    require_1d(model)?;
    Ok(0.5 * model.amplitude * qudit_dim.ln() * n_a * n_b * r.powf(-model.exponent))
}

/// `C N_A N_B ln d / Area(S^(D-1)) * r^(1 - D - alpha)`.
pub fn analytic_ed_ddim(model: &PowerLawModel, qudit_dim: f64, n_a: f64, n_b: f64, r: f64) -> f64 {
    let d = model.dimension as f64;
    model.amplitude * n_a * n_b * qudit_dim.ln() / unit_sphere_area(model.dimension)
        * r.powf(1.0 - d - model.exponent)
}

/// Surface area `2 pi^(D/2) / Gamma(D/2)` of the unit sphere in `D`
/// dimensions (`2` for `D = 1`).
pub fn unit_sphere_area(dimension: u32) -> f64 {
    // Gamma(D/2) via Gamma(x + 1) = x Gamma(x) from Gamma(1) or Gamma(1/2).
    let (mut x, mut gamma) = if dimension % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = dimension as f64 / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(target) / gamma
}
