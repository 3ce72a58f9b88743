//! Coupling ensembles: strong-disorder random chains and rainbow chains.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fermion::CouplingChain;
use crate::pairstate::{FragmentSampler, FragmentSequence};
use crate::rng::open_unit;

/// Smallest coupling a rainbow chain may contain.
pub const RAINBOW_FLOOR: f64 = 1e-280;

/// Largest allowed ratio of an inter-fragment bond to the weakest
/// intra-fragment bond.
pub const MAX_INTER_RATIO: f64 = 1e-6;

/// Couplings with density `(1/delta) J^(1/delta - 1)` on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    delta: f64,
}

impl DisorderSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("disorder strength {delta} must be positive")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Inverse CDF: the CDF is `J^(1/delta)`.
    pub fn coupling_from_uniform(&self, u: f64) -> f64 {
        u.powf(self.delta)
    }
}

pub fn sample_coupling<R: Rng + ?Sized>(spec: &DisorderSpec, rng: &mut R) -> f64 {
    spec.coupling_from_uniform(open_unit(rng))
}

/// Open chain of `num_sites` sites with independent couplings.
pub fn rsp_chain<R: Rng + ?Sized>(
    num_sites: usize,
    spec: &DisorderSpec,
    rng: &mut R,
) -> Result<CouplingChain> {
    if num_sites < 2 || num_sites % 2 == 1 {
        return Err(invalid(format!("chain length {num_sites} must be even and at least 2")));
    }
    CouplingChain::new((1..num_sites).map(|_| sample_coupling(spec, rng)).collect())
}

/// Rainbow chain of `2N` sites with decay parameter `lambda`: the central
/// bond is 1 and the bond `m` steps away from it is `lambda^(2m - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RainbowSpec {
    half_length: usize,
    decay: f64,
}

impl RainbowSpec {
    pub fn new(half_length: usize, decay: f64) -> Result<Self> {
        if half_length == 0 {
            return Err(invalid("rainbow half-length must be positive"));
        }
        if !(decay > 0.0 && decay < 1.0) {
            return Err(invalid(format!("rainbow decay {decay} must lie in (0, 1)")));
        }
        if half_length >= 2 {
            let weakest = decay.powi(2 * half_length as i32 - 3);
            if !(weakest > RAINBOW_FLOOR) {
                return Err(invalid(format!(
                    "rainbow N = {half_length}, lambda = {decay}: weakest bond {weakest:e} is below {RAINBOW_FLOOR:e}"
                )));
            }
        }
        Ok(Self { half_length, decay })
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }
}

pub fn rainbow_chain(spec: &RainbowSpec) -> CouplingChain {
    let n = spec.half_length as i64;
    let couplings = (1..2 * n)
        .map(|j| {
            if j == n {
                1.0
            } else {
                spec.decay.powi((2 * (n - j).abs() - 1) as i32)
            }
        })
        .collect();
    CouplingChain::new(couplings).expect("rainbow couplings are positive")
}

/// Joins chains end to end with `inter_coupling` on every seam.
///
/// With `inter_coupling == 0` the result is block-decomposable and its
/// ground state is the tensor product of the fragment ground states.
pub fn concatenate_fragments(chains: &[CouplingChain], inter_coupling: f64) -> Result<CouplingChain> {
    let first = chains
        .first()
        .ok_or_else(|| invalid("at least one fragment is required"))?;
    if chains.len() == 1 {
        return Ok(first.clone());
    }
    if !(inter_coupling.is_finite() && inter_coupling >= 0.0) {
        return Err(invalid("inter-fragment coupling must be nonnegative"));
    }
    let weakest = chains
        .iter()
        .flat_map(|c| c.couplings().iter().copied())
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    if inter_coupling > MAX_INTER_RATIO * weakest {
        return Err(invalid(format!(
            "inter-fragment coupling {inter_coupling:e} exceeds {MAX_INTER_RATIO:e} x weakest bond {weakest:e}"
        )));
    }
    let mut couplings = Vec::new();
    for (i, c) in chains.iter().enumerate() {
        if i > 0 {
            couplings.push(inter_coupling);
        }
        couplings.extend_from_slice(c.couplings());
    }
    if couplings.iter().any(|&x| x == 0.0) {
        CouplingChain::with_separators(couplings)
    } else {
        CouplingChain::new(couplings)
    }
}

/// Decoupled rainbow fragments with half-lengths drawn from `sampler`.
pub fn rainbow_fragment_sequence<R: Rng + ?Sized>(
    sampler: &FragmentSampler,
    num_fragments: usize,
    decay: f64,
    rng: &mut R,
) -> Result<(CouplingChain, FragmentSequence)> {
    if num_fragments == 0 {
        return Err(invalid("at least one fragment is required"));
    }
    let fragments = FragmentSequence::sample(sampler, num_fragments, rng);
    let chains = fragments
        .half_lengths()
        .iter()
        .map(|&k| RainbowSpec::new(k, decay).map(|s| rainbow_chain(&s)))
        .collect::<Result<Vec<_>>>()?;
    Ok((concatenate_fragments(&chains, 0.0)?, fragments))
}
