//! Power-law fits of distance histograms.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::census::PairCensus;
use crate::error::{invalid, Error, Result};
use crate::rng::stream;

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 200;
pub const MIN_BINS: usize = 3;

/// Weighted least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares with optional per-point weights.
pub fn linear_regression(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    if xs.len() != ys.len() || weights.is_some_and(|w| w.len() != xs.len()) {
        return Err(invalid("regression inputs differ in length"));
    }
    if xs.len() < 2 {
        return Err(invalid("regression needs at least two points"));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..xs.len()).map(w).sum();
    let mx = (0..xs.len()).map(|i| w(i) * xs[i]).sum::<f64>() / sw;
    let my = (0..xs.len()).map(|i| w(i) * ys[i]).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        syy += w(i) * dy * dy;
    }
    if sxx == 0.0 {
        return Err(invalid("regression abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Every bin counts equally.
    #[default]
    Unweighted,
    /// Bins weighted by their count (inverse Poisson variance of `ln n`).
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub window: (usize, usize),
    pub weighting: Weighting,
    pub resamples: usize,
    pub bootstrap_seed: u64,
}

impl FitOptions {
    pub fn new(window: (usize, usize)) -> Self {
        Self {
            window,
            weighting: Weighting::Unweighted,
            resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            bootstrap_seed: 0,
        }
    }
}

/// `counts[r] ~ exp(log_amplitude) r^-exponent` over `window`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    #[serde(rename = "stderr")]
    pub exponent_stderr: f64,
    pub window: [usize; 2],
    pub r_squared: f64,
    pub bins_used: usize,
    pub log_amplitude: f64,
}

fn fit_histogram(
    counts: impl Iterator<Item = (usize, f64)>,
    weighting: Weighting,
) -> Result<(LineFit, usize)> {
    let (mut xs, mut ys, mut ws) = (vec![], vec![], vec![]);
    for (r, n) in counts.filter(|&(_, n)| n > 0.0) {
        xs.push((r as f64).ln());
        ys.push(n.ln());
        ws.push(n);
    }
    if xs.len() < MIN_BINS {
        return Err(Error::TooFewBins {
            found: xs.len(),
            needed: MIN_BINS,
        });
    }
    let weights = matches!(weighting, Weighting::Counts).then_some(ws.as_slice());
    Ok((linear_regression(&xs, &ys, weights)?, xs.len()))
}

fn percentile_stderr(mut values: Vec<f64>) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
    };
    0.5 * (q(0.841_344_746) - q(0.158_655_254))
}

/// Log-log least squares on the census bins inside the window, with a
/// bootstrap error on the exponent.
///
/// When the census carries per-sample shards the bootstrap resamples whole
/// samples; otherwise each bin is redrawn from a Poisson law with its
/// observed count.
pub fn power_law_fit(census: &PairCensus, window: (usize, usize)) -> Result<PowerLawFit> {
    power_law_fit_with(census, &FitOptions::new(window))
}

pub fn power_law_fit_with(census: &PairCensus, opts: &FitOptions) -> Result<PowerLawFit> {
    let (lo, hi) = opts.window;
    if !(1 <= lo && lo < hi) {
        return Err(invalid(format!("fit window [{lo}, {hi}] must satisfy 1 <= min < max")));
    }
    let in_window = |counts: &BTreeMap<usize, u64>| -> Vec<(usize, f64)> {
        counts.range(lo..=hi).map(|(&r, &n)| (r, n as f64)).collect()
    };
    let (line, bins) = fit_histogram(in_window(census.counts()).into_iter(), opts.weighting)?;

    let mut rng = stream(opts.bootstrap_seed);
    let mut exponents = Vec::with_capacity(opts.resamples);
    let width = hi - lo + 1;
    let shards = census.shards();
    if !shards.is_empty() {
        let mut windowed: Vec<Vec<(usize, u64)>> = Vec::with_capacity(shards.len());
        for shard in shards {
            windowed.push(
                shard
                    .iter()
                    .filter(|(r, _)| (lo..=hi).contains(&(*r as usize)))
                    .map(|&(r, n)| (r as usize - lo, n as u64))
                    .collect(),
            );
        }
        for _ in 0..opts.resamples {
            let mut hist = vec![0u64; width];
            for _ in 0..windowed.len() {
                for &(i, n) in &windowed[rng.random_range(0..windowed.len())] {
                    hist[i] += n;
                }
            }
            let points = hist.iter().enumerate().map(|(i, &n)| (i + lo, n as f64));
            if let Ok((l, _)) = fit_histogram(points, opts.weighting) {
                exponents.push(-l.slope);
            }
        }
    } else {
        let observed = in_window(census.counts());
        for _ in 0..opts.resamples {
            let points = observed.iter().map(|&(r, n)| {
                let draw = Poisson::new(n).map(|p| p.sample(&mut rng)).unwrap_or(0.0);
                (r, draw)
            });
            if let Ok((l, _)) = fit_histogram(points, opts.weighting) {
                exponents.push(-l.slope);
            }
        }
    }

    Ok(PowerLawFit {
        exponent: -line.slope,
        exponent_stderr: percentile_stderr(exponents),
        window: [lo, hi],
        r_squared: line.r_squared,
        bins_used: bins,
        log_amplitude: line.intercept,
    })
}
