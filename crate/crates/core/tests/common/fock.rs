//! Brute-force many-body reference for short hopping chains.
//!
//! Basis states are occupation bitmasks in the natural site order (bit `j`
//! is site `j`). The half-filled sector is diagonalized densely and
//! reduced states come from a Schmidt decomposition after the modes of the
//! subsystem have been anticommuted to the front.

// Shared with the acceptance suite, which uses only part of it.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub struct FockGroundState {
    pub num_sites: usize,
    pub basis: Vec<u32>,
    pub amplitudes: Vec<f64>,
    pub gap: f64,
}

/// Ground state of `sum_j J_j / 2 (c+_j c_{j+1} + h.c.)` with `L / 2`
/// particles.
pub fn ground_state(couplings: &[f64]) -> FockGroundState {
    let l = couplings.len() + 1;
    let basis: Vec<u32> = (0u32..1 << l).filter(|s| s.count_ones() as usize == l / 2).collect();
    let index = |s: u32| basis.binary_search(&s).unwrap();
    let mut h = DMatrix::<f64>::zeros(basis.len(), basis.len());
    for (col, &s) in basis.iter().enumerate() {
        for (j, &jj) in couplings.iter().enumerate() {
            // Adjacent hops carry no string sign.
            let pair = (s >> j) & 0b11;
            if pair == 0b01 || pair == 0b10 {
                let t = s ^ (0b11 << j);
                h[(index(t), col)] += jj / 2.0;
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]];
    FockGroundState {
        num_sites: l,
        amplitudes: eig.eigenvectors.column(order[0]).iter().copied().collect(),
        basis,
        gap,
    }
}

/// Sign picked up when the occupied modes of `sites` are moved ahead of all
/// other occupied modes, keeping relative order within each group.
fn reorder_sign(state: u32, mask: u32, num_sites: usize) -> f64 {
    let mut crossings = 0;
    let mut others_seen = 0;
    for j in 0..num_sites {
        if state >> j & 1 == 1 {
            if mask >> j & 1 == 1 {
                crossings += others_seen;
            } else {
                others_seen += 1;
            }
        }
    }
    if crossings % 2 == 0 { 1.0 } else { -1.0 }
}

fn compress(state: u32, mask: u32, num_sites: usize) -> usize {
    let mut out = 0;
    let mut bit = 0;
    for j in 0..num_sites {
        if mask >> j & 1 == 1 {
            out |= ((state >> j & 1) as usize) << bit;
            bit += 1;
        }
    }
    out
}

/// Von Neumann entropy (nats) of the modes in `sites`.
pub fn entropy(gs: &FockGroundState, sites: &[usize]) -> f64 {
    let l = gs.num_sites;
    let mask: u32 = sites.iter().map(|&s| 1u32 << s).sum();
    let na = sites.len();
    let rest = !mask & ((1u32 << l) - 1);
    let mut psi = DMatrix::<f64>::zeros(1 << na, 1 << (l - na));
    for (&s, &a) in gs.basis.iter().zip(&gs.amplitudes) {
        psi[(compress(s, mask, l), compress(s, rest, l))] += reorder_sign(s, mask, l) * a;
    }
    psi.singular_values()
        .iter()
        .map(|&sv| sv * sv)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

/// `<c+_j c_k>` from the many-body state.
pub fn correlation(gs: &FockGroundState, j: usize, k: usize) -> f64 {
    let index = |s: u32| gs.basis.binary_search(&s).ok();
    let mut total = 0.0;
    for (&s, &a) in gs.basis.iter().zip(&gs.amplitudes) {
        // c+_j c_k |s>
        if s >> k & 1 == 0 {
            continue;
        }
        let below_k = (s & ((1u32 << k) - 1)).count_ones();
        let t = s & !(1 << k);
        if t >> j & 1 == 1 {
            continue;
        }
        let below_j = (t & ((1u32 << j) - 1)).count_ones();
        let u = t | (1 << j);
        let sign = if (below_k + below_j) % 2 == 0 { 1.0 } else { -1.0 };
        if let Some(i) = index(u) {
            total += gs.amplitudes[i] * sign * a;
        }
    }
    total
}
