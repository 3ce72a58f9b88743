//! Free-fermion ground states of open hopping chains.
//!
//! A chain with bond amplitudes `J_j` has the quadratic Hamiltonian
//! `H = 1/2 sum_j J_j (c+_j c_{j+1} + h.c.) = sum_{jk} h_{jk} c+_j c_k`, so the
//! single-particle matrix `h` is tridiagonal with zero diagonal and
//! off-diagonal `J_j / 2`. Everything about the Gaussian ground state is
//! encoded in the correlation matrix `C_{jk} = <c+_j c_k>`; subsystem entropies
//! follow from eigenvalues of its principal submatrices.
//!
//! Site indices in this module are zero-based matrix indices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::bidiag::bidiagonal_svd;
use crate::error::{invalid, Error, Result};

/// Clip for occupation eigenvalues before taking logarithms.
pub const NU_CLIP: f64 = 1e-12;

/// Relative gap below which the dense solver cannot place the Fermi level.
pub const DENSE_GAP_RTOL: f64 = 1e-12;

/// Bond amplitudes of an open chain.
///
/// Couplings are strictly positive unless the chain came out of
/// [`crate::disorder::concatenate_fragments`], where exact zeros separate
/// decoupled blocks and `block_decomposable` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingChain {
    couplings: Vec<f64>,
    #[serde(default)]
    block_decomposable: bool,
}

#[derive(Serialize)]
struct ChainRecord<'a> {
    num_sites: usize,
    couplings: &'a [f64],
}

#[derive(Deserialize)]
struct ChainRecordOwned {
    num_sites: usize,
    couplings: Vec<f64>,
}

impl CouplingChain {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(invalid("a chain needs at least one bond"));
        }
        if couplings.len() % 2 == 0 {
            return Err(invalid(format!(
                "{} sites: half filling needs an even number of sites",
                couplings.len() + 1
            )));
        }
        if let Some((j, &x)) = couplings
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x > 0.0))
        {
            return Err(invalid(format!("coupling {j} = {x} is not positive and finite")));
        }
        Ok(Self {
            couplings,
            block_decomposable: false,
        })
    }

    /// Chain whose zero bonds separate independent blocks. Every block must
    /// itself have an even number of sites.
    pub(crate) fn with_separators(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() || couplings.len() % 2 == 0 {
            return Err(invalid("chain must have an even number of sites"));
        }
        if couplings.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid("couplings must be nonnegative and finite"));
        }
        let has_zero = couplings.iter().any(|&x| x == 0.0);
        let chain = Self {
            couplings,
            block_decomposable: has_zero,
        };
        if chain.blocks().any(|(start, end)| (end - start) % 2 == 1) {
            return Err(invalid("every decoupled block needs an even number of sites"));
        }
        Ok(chain)
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn num_sites(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn is_block_decomposable(&self) -> bool {
        self.block_decomposable
    }

    /// Half-open site ranges of the blocks separated by zero bonds.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.num_sites();
        let mut start = 0;
        let mut cuts = self
            .couplings
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 0.0)
            .map(|(j, _)| j + 1)
            .chain(std::iter::once(n));
        std::iter::from_fn(move || {
            let end = cuts.next()?;
            let block = (start, end);
            start = end;
            Some(block)
        })
    }

    /// Every bond multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            couplings: self.couplings.iter().map(|x| x * s).collect(),
            block_decomposable: self.block_decomposable,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChainRecord {
            num_sites: self.num_sites(),
            couplings: &self.couplings,
        })
        .expect("chain record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: ChainRecordOwned =
            serde_json::from_str(s).map_err(|e| invalid(format!("chain JSON: {e}")))?;
        if rec.num_sites != rec.couplings.len() + 1 {
            return Err(invalid("num_sites must equal couplings.len() + 1"));
        }
        if rec.couplings.iter().any(|&x| x == 0.0) {
            Self::with_separators(rec.couplings)
        } else {
            Self::new(rec.couplings)
        }
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl Tridiagonal {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &x) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = x;
            m[(i + 1, i)] = x;
        }
        m
    }

    /// `h v` without forming the dense matrix.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.offdiag[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// `h` with `H = sum_{jk} h_{jk} c+_j c_k`.
pub fn single_particle_hamiltonian(chain: &CouplingChain) -> Tridiagonal {
    Tridiagonal {
        diag: vec![0.0; chain.num_sites()],
        offdiag: chain.couplings.iter().map(|j| 0.5 * j).collect(),
    }
}

/// Single-particle energies (ascending) and orthonormal modes.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    /// `modes[a]` is the eigenvector belonging to `energies[a]`.
    pub modes: Vec<Vec<f64>>,
    /// Energy differences at or below this value are not resolved by the
    /// solver that produced the decomposition.
    pub resolution: f64,
}

impl SpectralDecomposition {
    pub fn size(&self) -> usize {
        self.energies.len()
    }
}

/// Full diagonalization of `h`.
///
/// A zero-diagonal matrix of even size is bipartite: its spectrum is
/// `±sigma` with `sigma` the singular values of the bidiagonal
/// sublattice-coupling block, which are computed to high relative accuracy
/// (see [`crate::bidiag`]). Anything else goes to the dense solver.
pub fn diagonalize(h: &Tridiagonal) -> Result<SpectralDecomposition> {
    let n = h.size();
    if n > 0 && n % 2 == 0 && h.diag.iter().all(|&x| x == 0.0) {
        diagonalize_bipartite(h)
    } else {
        diagonalize_dense(h)
    }
}

/// Dense symmetric eigensolver, valid for any tridiagonal input.
pub fn diagonalize_dense(h: &Tridiagonal) -> Result<SpectralDecomposition> {
    let n = h.size();
    let eig = SymmetricEigen::try_new(h.to_dense(), f64::EPSILON, 0).ok_or(
        Error::NoConvergence {
            iterations: 0,
            size: n,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&a| eig.eigenvalues[a]).collect();
    let modes = order
        .iter()
        .map(|&a| eig.eigenvectors.column(a).iter().copied().collect())
        .collect();
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(SpectralDecomposition {
        energies,
        modes,
        resolution: DENSE_GAP_RTOL * scale,
    })
}

/// Zero-based sites `2a` form sublattice A, `2b + 1` sublattice B. The
/// A-to-B block of `h` is lower bidiagonal; its transpose is the upper
/// bidiagonal `B` with `B[a][a] = h[2a][2a+1]` and `B[a][a+1] = h[2a+1][2a+2]`.
fn sublattice_svd(h: &Tridiagonal) -> Result<crate::bidiag::BidiagonalSvd> {
    let half = h.size() / 2;
    let d: Vec<f64> = (0..half).map(|a| h.offdiag[2 * a]).collect();
    let e: Vec<f64> = (0..half.saturating_sub(1)).map(|a| h.offdiag[2 * a + 1]).collect();
    bidiagonal_svd(&d, &e)
}

fn diagonalize_bipartite(h: &Tridiagonal) -> Result<SpectralDecomposition> {
    let n = h.size();
    let half = n / 2;
    let svd = sublattice_svd(h)?;
    // B = U S V^T with rows of B on sublattice B and columns on A, so
    // (v_k on A, ±u_k on B) / sqrt(2) has energy ±sigma_k.
    let norm = std::f64::consts::FRAC_1_SQRT_2;
    let mode = |k: usize, sign: f64| {
        let mut m = vec![0.0; n];
        for a in 0..half {
            m[2 * a] = norm * svd.v[k][a];
            m[2 * a + 1] = sign * norm * svd.u[k][a];
        }
        m
    };
    let mut energies = Vec::with_capacity(n);
    let mut modes = Vec::with_capacity(n);
    // sigma is descending, so -sigma ascends.
    for k in 0..half {
        energies.push(-svd.sigma[k]);
        modes.push(mode(k, -1.0));
    }
    for k in (0..half).rev() {
        energies.push(svd.sigma[k]);
        modes.push(mode(k, 1.0));
    }
    Ok(SpectralDecomposition {
        energies,
        modes,
        resolution: f64::MIN_POSITIVE,
    })
}

/// Ground-state two-point function `C_{jk} = <c+_j c_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    num_filled: usize,
}

impl CorrelationMatrix {
    /// Wraps a matrix without checking the projector property.
    pub fn from_matrix(entries: DMatrix<f64>, num_filled: usize) -> Result<Self> {
        if !entries.is_square() {
            return Err(invalid("correlation matrix must be square"));
        }
        Ok(Self {
            entries,
            num_filled,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn num_sites(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_filled(&self) -> usize {
        self.num_filled
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.entries[(j, k)]
    }

    /// `max |C^2 - C|`.
    pub fn projector_defect(&self) -> f64 {
        (&self.entries * &self.entries - &self.entries).amax()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        let n = self.num_sites();
        if let Some(&s) = sites.iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange {
                site: s,
                num_sites: n,
            });
        }
        Ok(())
    }

    /// Eigenvalues of the principal submatrix on `sites`.
    pub fn occupations(&self, sites: &[usize]) -> Result<Vec<f64>> {
        self.check_sites(sites)?;
        let k = sites.len();
        let sub = DMatrix::from_fn(k, k, |a, b| self.entries[(sites[a], sites[b])]);
        Ok(sub.symmetric_eigenvalues().iter().copied().collect())
    }
}

/// Fills the `num_filled` lowest modes.
pub fn ground_state_correlations(
    spec: &SpectralDecomposition,
    num_filled: usize,
) -> Result<CorrelationMatrix> {
    let n = spec.size();
    if num_filled > n {
        return Err(invalid(format!("cannot fill {num_filled} of {n} modes")));
    }
    if num_filled > 0 && num_filled < n {
        let gap = spec.energies[num_filled] - spec.energies[num_filled - 1];
        if gap <= spec.resolution {
            return Err(Error::DegenerateFermiLevel {
                gap,
                floor: spec.resolution,
            });
        }
    }
    let mut c = DMatrix::zeros(n, n);
    for mode in &spec.modes[..num_filled] {
        for k in 0..n {
            let mk = mode[k];
            if mk == 0.0 {
                continue;
            }
            for j in 0..n {
                c[(j, k)] += mode[j] * mk;
            }
        }
    }
    Ok(CorrelationMatrix {
        entries: c,
        num_filled,
    })
}

/// Half-filled ground state of a chain, block by block when zero bonds
/// decouple it.
///
/// For a bipartite block the half-filled projector is
/// `C = (1 - sign h) / 2`, i.e. `1/2` on the diagonal and minus one half of
/// the polar factor of the sublattice block between A and B sites. That form
/// is assembled directly from the singular vectors.
pub fn half_filled_ground_state(chain: &CouplingChain) -> Result<CorrelationMatrix> {
    let n = chain.num_sites();
    let h = single_particle_hamiltonian(chain);
    let mut c = DMatrix::zeros(n, n);
    for (start, end) in chain.blocks() {
        let block = Tridiagonal {
            diag: vec![0.0; end - start],
            offdiag: h.offdiag[start..end - 1].to_vec(),
        };
        let svd = sublattice_svd(&block)?;
        let smin = svd.sigma.last().copied().unwrap_or(0.0);
        if !(2.0 * smin > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateFermiLevel {
                gap: 2.0 * smin,
                floor: f64::MIN_POSITIVE,
            });
        }
        let half = (end - start) / 2;
        for a in 0..half {
            for b in 0..half {
                let polar: f64 = svd.u.iter().zip(&svd.v).map(|(u, v)| u[b] * v[a]).sum();
                let (ia, ib) = (start + 2 * a, start + 2 * b + 1);
                c[(ia, ib)] = -0.5 * polar;
                c[(ib, ia)] = -0.5 * polar;
            }
        }
        for s in start..end {
            c[(s, s)] = 0.5;
        }
    }
    Ok(CorrelationMatrix {
        entries: c,
        num_filled: n / 2,
    })
}

/// Binary entropy in nats; occupations within `NU_CLIP` of 0 or 1 count as
/// pure.
pub fn binary_entropy(nu: f64) -> f64 {
    if !(nu > NU_CLIP && nu < 1.0 - NU_CLIP) {
        return 0.0;
    }
    -nu * nu.ln() - (1.0 - nu) * (1.0 - nu).ln()
}

/// Von Neumann entropy (nats) of the sites in `sites`.
pub fn subsystem_entropy(c: &CorrelationMatrix, sites: &[usize]) -> Result<f64> {
    if sites.is_empty() {
        return Err(invalid("subsystem must be nonempty"));
    }
    check_distinct(sites)?;
    Ok(c.occupations(sites)?.into_iter().map(binary_entropy).sum())
}

fn check_distinct(sites: &[usize]) -> Result<()> {
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(invalid(format!("site {} listed twice", w[0]))),
        None => Ok(()),
    }
}

fn check_disjoint(a: &[usize], b: &[usize]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("regions must be nonempty"));
    }
    match a.iter().find(|s| b.contains(s)) {
        Some(&s) => Err(Error::Overlap(s)),
        None => Ok(()),
    }
}

/// `I_c(A > B) = S(B) - S(A u B)`.
pub fn coherent_info(c: &CorrelationMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    check_disjoint(a, b)?;
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(subsystem_entropy(c, b)? - subsystem_entropy(c, &union)?)
}

/// `max(I_c(A > B), I_c(B > A), 0)`.
pub fn coherent_info_sym(c: &CorrelationMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    check_disjoint(a, b)?;
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    let s_ab = subsystem_entropy(c, &union)?;
    let s_a = subsystem_entropy(c, a)?;
    let s_b = subsystem_entropy(c, b)?;
    Ok((s_b - s_ab).max(s_a - s_ab).max(0.0))
}

/// Symmetric coherent information of two single sites from the 2x2 block
/// `[[C_jj, C_jk], [C_jk, C_kk]]` in closed form.
pub fn pair_coherent_info(c: &CorrelationMatrix, j: usize, k: usize) -> Result<f64> {
    if j == k {
        return Err(Error::Overlap(j));
    }
    c.check_sites(&[j, k])?;
    Ok(pair_coherent_info_from(c.get(j, j), c.get(k, k), c.get(j, k)))
}

pub(crate) fn pair_coherent_info_from(cjj: f64, ckk: f64, cjk: f64) -> f64 {
    let mean = 0.5 * (cjj + ckk);
    let radius = (0.5 * (cjj - ckk)).hypot(cjk);
    let s_pair = binary_entropy(mean + radius) + binary_entropy(mean - radius);
    let s_j = binary_entropy(cjj);
    let s_k = binary_entropy(ckk);
    (s_k - s_pair).max(s_j - s_pair).max(0.0)
}

/// Upper bound of [`pair_coherent_info`] for qubit-sized sites.
pub const MAX_PAIR_INFO: f64 = LN_2;
