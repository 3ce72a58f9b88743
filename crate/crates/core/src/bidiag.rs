//! Singular value decomposition of a real upper bidiagonal matrix with high
//! relative accuracy.
//!
//! This is the implicit QR scheme of Demmel and Kahan (the algorithm behind
//! LAPACK's `dbdsqr`): a shifted QR sweep while the matrix is well away from
//! singular, and a zero-shift sweep once the smallest singular value of the
//! active block becomes tiny relative to the largest. The zero-shift sweep
//! never forms differences of nearly equal numbers, so every singular value,
//! including ones far below `eps * ||B||`, is computed to a few ulps of
//! relative error. Singular vectors are accurate up to the usual
//! `eps / relative_gap` factor.
//!
//! Free-fermion hopping chains need this: the single-particle spectrum of a
//! strongly disordered chain reaches `1e-20` and below, and the half-filled
//! ground state depends on resolving those modes from their particle-hole
//! partners.

use crate::error::{Error, Result};

const MAX_ITER_FACTOR: usize = 6;

/// Result of [`bidiagonal_svd`]: `B = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct BidiagonalSvd {
    /// Singular values in descending order.
    pub sigma: Vec<f64>,
    /// `u[k]` is the k-th left singular vector.
    pub u: Vec<Vec<f64>>,
    /// `v[k]` is the k-th right singular vector (the k-th row of `V^T`).
    pub v: Vec<Vec<f64>>,
}

/// Plane rotation `(c, s, r)` with `[c s; -s c] [f; g] = [r; 0]`.
fn givens(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        (1.0, 0.0, f)
    } else if f == 0.0 {
        (0.0, 1.0, g)
    } else {
        let d = f.hypot(g);
        let r = d.copysign(f);
        (f.abs() / d, g / r, r)
    }
}

/// Singular values `(smin, smax)` of `[f g; 0 h]`.
fn sv2x2(f: f64, g: f64, h: f64) -> (f64, f64) {
    let fa = f.abs();
    let ga = g.abs();
    let ha = h.abs();
    let fhmn = fa.min(ha);
    let fhmx = fa.max(ha);
    if fhmn == 0.0 {
        let smax = if fhmx == 0.0 {
            ga
        } else {
            let (lo, hi) = (fhmx.min(ga), fhmx.max(ga));
            hi * (1.0 + (lo / hi).powi(2)).sqrt()
        };
        return (0.0, smax);
    }
    if ga < fhmx {
        let as_ = 1.0 + fhmn / fhmx;
        let at = (fhmx - fhmn) / fhmx;
        let au = (ga / fhmx).powi(2);
        let c = 2.0 / ((as_ * as_ + au).sqrt() + (at * at + au).sqrt());
        (fhmn * c, fhmx / c)
    } else {
        let au = fhmx / ga;
        if au == 0.0 {
            ((fhmn * fhmx) / ga, ga)
        } else {
            let as_ = 1.0 + fhmn / fhmx;
            let at = (fhmx - fhmn) / fhmx;
            let c = 1.0 / ((1.0 + (as_ * au).powi(2)).sqrt() + (1.0 + (at * au).powi(2)).sqrt());
            (2.0 * (fhmn * c) * au, ga / (c + c))
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    a.abs().copysign(b)
}

struct Svd2x2 {
    smin: f64,
    smax: f64,
    snr: f64,
    csr: f64,
    snl: f64,
    csl: f64,
}

/// Full SVD of `[f g; 0 h]`:
/// `[csl snl; -snl csl] [f g; 0 h] [csr -snr; snr csr] = diag(smax, smin)`.
fn svd2x2(f: f64, g: f64, h: f64) -> Svd2x2 {
    let eps = f64::EPSILON / 2.0;
    let mut ft = f;
    let mut fa = ft.abs();
    let mut ht = h;
    let mut ha = h.abs();
    let mut pmax = 1;
    let swap = ha > fa;
    if swap {
        pmax = 3;
        std::mem::swap(&mut ft, &mut ht);
        std::mem::swap(&mut fa, &mut ha);
    }
    let gt = g;
    let ga = gt.abs();
    let (mut clt, mut crt, mut slt, mut srt) = (1.0, 1.0, 0.0, 0.0);
    let mut ssmin;
    let mut ssmax;
    if ga == 0.0 {
        ssmin = ha;
        ssmax = fa;
    } else {
        let mut gasmal = true;
        ssmin = 0.0;
        ssmax = 0.0;
        if ga > fa {
            pmax = 2;
            if fa / ga < eps {
                gasmal = false;
                ssmax = ga;
                ssmin = if ha > 1.0 { fa / (ga / ha) } else { (fa / ga) * ha };
                clt = 1.0;
                slt = ht / gt;
                srt = 1.0;
                crt = ft / gt;
            }
        }
        if gasmal {
            let d = fa - ha;
            let mut l = if d == fa { 1.0 } else { d / fa };
            let m = gt / ft;
            let mut t = 2.0 - l;
            let mm = m * m;
            let tt = t * t;
            let s = (tt + mm).sqrt();
            let r = if l == 0.0 { m.abs() } else { (l * l + mm).sqrt() };
            let a = 0.5 * (s + r);
            ssmin = ha / a;
            ssmax = fa * a;
            if mm == 0.0 {
                t = if l == 0.0 {
                    sign(2.0, ft) * sign(1.0, gt)
                } else {
                    gt / sign(d, ft) + m / t
                };
            } else {
                t = (m / (s + t) + m / (r + l)) * (1.0 + a);
            }
            l = (t * t + 4.0).sqrt();
            crt = 2.0 / l;
            srt = t / l;
            clt = (crt + srt * m) / a;
            slt = (ht / ft) * srt / a;
        }
    }
    let (csl, snl, csr, snr) = if swap {
        (srt, crt, slt, clt)
    } else {
        (clt, slt, crt, srt)
    };
    let tsign = match pmax {
        1 => sign(1.0, csr) * sign(1.0, csl) * sign(1.0, f),
        2 => sign(1.0, snr) * sign(1.0, csl) * sign(1.0, g),
        _ => sign(1.0, snr) * sign(1.0, snl) * sign(1.0, h),
    };
    ssmax = sign(ssmax, tsign);
    ssmin = sign(ssmin, tsign * sign(1.0, f) * sign(1.0, h));
    Svd2x2 {
        smin: ssmin,
        smax: ssmax,
        snr,
        csr,
        snl,
        csl,
    }
}

/// `x <- c x + s y`, `y <- c y - s x`.
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let t = *yi;
        *yi = c * t - s * *xi;
        *xi = s * t + c * *xi;
    }
}

/// Applies the plane rotation to vectors `k` and `k + 1` of `vecs`.
fn rotate_pair(vecs: &mut [Vec<f64>], k: usize, c: f64, s: f64) {
    let (lo, hi) = vecs.split_at_mut(k + 1);
    rotate(&mut lo[k], &mut hi[0], c, s);
}

/// SVD of the upper bidiagonal matrix with diagonal `diag` and
/// superdiagonal `offdiag` (`offdiag.len() == diag.len() - 1`).
pub fn bidiagonal_svd(diag: &[f64], offdiag: &[f64]) -> Result<BidiagonalSvd> {
    let n = diag.len();
    if n == 0 {
        return Ok(BidiagonalSvd {
            sigma: vec![],
            u: vec![],
            v: vec![],
        });
    }
    assert_eq!(offdiag.len(), n - 1, "bidiagonal shape mismatch");

    // One-based working copies; slot 0 is unused.
    let mut d = Vec::with_capacity(n + 1);
    d.push(0.0);
    d.extend_from_slice(diag);
    let mut e = Vec::with_capacity(n + 1);
    e.push(0.0);
    e.extend_from_slice(offdiag);
    e.push(0.0);

    let identity = |i: usize| {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        row
    };
    // u[k] holds column k of U, vt[k] holds row k of V^T (one-based).
    let mut u: Vec<Vec<f64>> = std::iter::once(vec![])
        .chain((0..n).map(identity))
        .collect();
    let mut vt = u.clone();

    let eps = f64::EPSILON / 2.0;
    let unfl = f64::MIN_POSITIVE;
    let tolmul = 10f64.max(100f64.min(eps.powf(-0.125)));
    let tol = tolmul * eps;

    if n > 1 {
        let mut smax = 0.0f64;
        for i in 1..=n {
            smax = smax.max(d[i].abs());
        }
        for i in 1..n {
            smax = smax.max(e[i].abs());
        }

        // Lower estimate of the smallest singular value fixes an absolute
        // threshold below which off-diagonals are set to zero.
        let mut sminoa = d[1].abs();
        if sminoa != 0.0 {
            let mut mu = sminoa;
            for i in 2..=n {
                mu = d[i].abs() * (mu / (mu + e[i - 1].abs()));
                sminoa = sminoa.min(mu);
                if sminoa == 0.0 {
                    break;
                }
            }
        }
        sminoa /= (n as f64).sqrt();
        let thresh = (tol * sminoa).max((MAX_ITER_FACTOR * n * n) as f64 * unfl);

        let maxit = MAX_ITER_FACTOR * n * n;
        let mut iter = 0usize;
        let mut oldll: usize = 0;
        let mut oldm: usize = 0;
        let mut idir = 0u8;
        let mut m = n;

        'outer: while m > 1 {
            if iter > maxit {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    size: n,
                });
            }

            // Find the diagonal block to work on.
            let mut smax_blk = d[m].abs();
            let mut ll = 0usize;
            let mut split = false;
            for lll in 1..m {
                ll = m - lll;
                let abss = d[ll].abs();
                let abse = e[ll].abs();
                if abse <= thresh {
                    split = true;
                    break;
                }
                smax_blk = smax_blk.max(abss).max(abse);
            }
            if split {
                e[ll] = 0.0;
                if ll == m - 1 {
                    m -= 1;
                    continue 'outer;
                }
            } else {
                ll = 0;
            }
            ll += 1;

            // d[ll..=m] is unreduced.
            if ll == m - 1 {
                let s = svd2x2(d[m - 1], e[m - 1], d[m]);
                d[m - 1] = s.smax;
                e[m - 1] = 0.0;
                d[m] = s.smin;
                rotate_pair(&mut vt, m - 1, s.csr, s.snr);
                rotate_pair(&mut u, m - 1, s.csl, s.snl);
                m -= 2;
                continue 'outer;
            }

            // Chase the bulge in the direction of decreasing magnitude.
            if ll > oldm || m < oldll {
                idir = if d[ll].abs() >= d[m].abs() { 1 } else { 2 };
            }

            let mut sminl;
            if idir == 1 {
                if e[m - 1].abs() <= tol * d[m].abs() {
                    e[m - 1] = 0.0;
                    continue 'outer;
                }
                let mut mu = d[ll].abs();
                sminl = mu;
                for lll in ll..m {
                    if e[lll].abs() <= tol * mu {
                        e[lll] = 0.0;
                        continue 'outer;
                    }
                    mu = d[lll + 1].abs() * (mu / (mu + e[lll].abs()));
                    sminl = sminl.min(mu);
                }
            } else {
                if e[ll].abs() <= tol * d[ll].abs() {
                    e[ll] = 0.0;
                    continue 'outer;
                }
                let mut mu = d[m].abs();
                sminl = mu;
                for lll in (ll..m).rev() {
                    if e[lll].abs() <= tol * mu {
                        e[lll] = 0.0;
                        continue 'outer;
                    }
                    mu = d[lll].abs() * (mu / (mu + e[lll].abs()));
                    sminl = sminl.min(mu);
                }
            }
            oldll = ll;
            oldm = m;

            let mut shift;
            if (n as f64) * tol * (sminl / smax_blk) <= eps.max(0.01 * tol) {
                shift = 0.0;
            } else {
                let sll;
                if idir == 1 {
                    sll = d[ll].abs();
                    shift = sv2x2(d[m - 1], e[m - 1], d[m]).0;
                } else {
                    sll = d[m].abs();
                    shift = sv2x2(d[ll], e[ll], d[ll + 1]).0;
                }
                if sll > 0.0 && (shift / sll).powi(2) < eps {
                    shift = 0.0;
                }
            }

            iter += m - ll;

            if shift == 0.0 {
                if idir == 1 {
                    let mut cs = 1.0;
                    let mut oldcs = 1.0;
                    let mut oldsn = 0.0;
                    for i in ll..m {
                        let (c1, s1, r) = givens(d[i] * cs, e[i]);
                        cs = c1;
                        if i > ll {
                            e[i - 1] = oldsn * r;
                        }
                        let (c2, s2, r2) = givens(oldcs * r, d[i + 1] * s1);
                        oldcs = c2;
                        oldsn = s2;
                        d[i] = r2;
                        rotate_pair(&mut vt, i, c1, s1);
                        rotate_pair(&mut u, i, c2, s2);
                    }
                    let h = d[m] * cs;
                    d[m] = h * oldcs;
                    e[m - 1] = h * oldsn;
                    if e[m - 1].abs() <= thresh {
                        e[m - 1] = 0.0;
                    }
                } else {
                    let mut cs = 1.0;
                    let mut oldcs = 1.0;
                    let mut oldsn = 0.0;
                    for i in ((ll + 1)..=m).rev() {
                        let (c1, s1, r) = givens(d[i] * cs, e[i - 1]);
                        cs = c1;
                        if i < m {
                            e[i] = oldsn * r;
                        }
                        let (c2, s2, r2) = givens(oldcs * r, d[i - 1] * s1);
                        oldcs = c2;
                        oldsn = s2;
                        d[i] = r2;
                        rotate_pair(&mut u, i - 1, c1, -s1);
                        rotate_pair(&mut vt, i - 1, c2, -s2);
                    }
                    let h = d[ll] * cs;
                    d[ll] = h * oldcs;
                    e[ll] = h * oldsn;
                    if e[ll].abs() <= thresh {
                        e[ll] = 0.0;
                    }
                }
            } else if idir == 1 {
                let mut f = (d[ll].abs() - shift) * (sign(1.0, d[ll]) + shift / d[ll]);
                let mut g = e[ll];
                for i in ll..m {
                    let (cosr, sinr, r) = givens(f, g);
                    if i > ll {
                        e[i - 1] = r;
                    }
                    f = cosr * d[i] + sinr * e[i];
                    e[i] = cosr * e[i] - sinr * d[i];
                    g = sinr * d[i + 1];
                    d[i + 1] *= cosr;
                    let (cosl, sinl, r) = givens(f, g);
                    d[i] = r;
                    f = cosl * e[i] + sinl * d[i + 1];
                    d[i + 1] = cosl * d[i + 1] - sinl * e[i];
                    if i < m - 1 {
                        g = sinl * e[i + 1];
                        e[i + 1] *= cosl;
                    }
                    rotate_pair(&mut vt, i, cosr, sinr);
                    rotate_pair(&mut u, i, cosl, sinl);
                }
                e[m - 1] = f;
                if e[m - 1].abs() <= thresh {
                    e[m - 1] = 0.0;
                }
            } else {
                let mut f = (d[m].abs() - shift) * (sign(1.0, d[m]) + shift / d[m]);
                let mut g = e[m - 1];
                for i in ((ll + 1)..=m).rev() {
                    let (cosr, sinr, r) = givens(f, g);
                    if i < m {
                        e[i] = r;
                    }
                    f = cosr * d[i] + sinr * e[i - 1];
                    e[i - 1] = cosr * e[i - 1] - sinr * d[i];
                    g = sinr * d[i - 1];
                    d[i - 1] *= cosr;
                    let (cosl, sinl, r) = givens(f, g);
                    d[i] = r;
                    f = cosl * e[i - 1] + sinl * d[i - 1];
                    d[i - 1] = cosl * d[i - 1] - sinl * e[i - 1];
                    if i > ll + 1 {
                        g = sinl * e[i - 2];
                        e[i - 2] *= cosl;
                    }
                    rotate_pair(&mut u, i - 1, cosr, -sinr);
                    rotate_pair(&mut vt, i - 1, cosl, -sinl);
                }
                e[ll] = f;
                if e[ll].abs() <= thresh {
                    e[ll] = 0.0;
                }
            }
        }
    }

    // Positive singular values, then descending order.
    for i in 1..=n {
        if d[i] < 0.0 {
            d[i] = -d[i];
            vt[i].iter_mut().for_each(|x| *x = -*x);
        }
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
    Ok(BidiagonalSvd {
        sigma: order.iter().map(|&i| d[i]).collect(),
        u: order.iter().map(|&i| std::mem::take(&mut u[i])).collect(),
        v: order.iter().map(|&i| std::mem::take(&mut vt[i])).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(diag: &[f64], offdiag: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 {
                offdiag[i]
            } else {
                0.0
            }
        })
    }

    fn check_factorization(diag: &[f64], offdiag: &[f64], tol: f64) -> BidiagonalSvd {
        let svd = bidiagonal_svd(diag, offdiag).unwrap();
        let n = diag.len();
        let b = dense(diag, offdiag);
        let u = DMatrix::from_fn(n, n, |i, k| svd.u[k][i]);
        let vt = DMatrix::from_fn(n, n, |k, j| svd.v[k][j]);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&svd.sigma));
        let rebuilt = &u * s * &vt;
        assert!((rebuilt - &b).amax() < tol * b.amax().max(1e-300));
        let id = DMatrix::<f64>::identity(n, n);
        assert!((u.transpose() * &u - &id).amax() < 1e-13);
        assert!((&vt * vt.transpose() - &id).amax() < 1e-13);
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.sigma.iter().all(|&s| s >= 0.0));
        svd
    }

    #[test]
    fn one_by_one() {
        let svd = bidiagonal_svd(&[-3.0], &[]).unwrap();
        assert_eq!(svd.sigma, vec![3.0]);
        assert_eq!(svd.u[0][0] * svd.v[0][0], -1.0);
    }

    #[test]
    fn two_by_two_matches_closed_form() {
        // [[1, 1], [0, 1]] has singular values golden ratio and its inverse.
        let svd = check_factorization(&[1.0, 1.0], &[1.0], 1e-14);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((svd.sigma[0] - phi).abs() < 1e-14);
        assert!((svd.sigma[1] - 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn random_matrices_factorize() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 5, 17, 64] {
            for _ in 0..5 {
                let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let e: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
                let svd = check_factorization(&d, &e, 1e-13);
                let mut dense_sv: Vec<f64> = dense(&d, &e).singular_values().iter().copied().collect();
                dense_sv.sort_by(|a, b| b.total_cmp(a));
                for (a, b) in svd.sigma.iter().zip(&dense_sv) {
                    assert!((a - b).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn split_matrix_handles_zero_offdiagonal() {
        let svd = check_factorization(&[1.0, 2.0, 3.0, 4.0], &[0.5, 0.0, 0.25], 1e-14);
        assert_eq!(svd.sigma.len(), 4);
    }

    #[test]
    fn tiny_singular_values_have_relative_accuracy() {
        // Product of the singular values equals |det B| = prod |d_i| exactly
        // in exact arithmetic; a graded matrix checks this in log space.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 60;
            let d: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(12)).collect();
            let e: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>().powi(12)).collect();
            let svd = bidiagonal_svd(&d, &e).unwrap();
            let log_det: f64 = d.iter().map(|x| x.abs().ln()).sum();
            let log_prod: f64 = svd.sigma.iter().map(|s| s.ln()).sum();
            assert!(
                (log_det - log_prod).abs() < 1e-10 * (n as f64),
                "{log_det} vs {log_prod}"
            );
        }
    }

    #[test]
    fn scale_invariance() {
        let d = [0.3, 1e-7, 0.8, 2e-3];
        let e = [0.5, 0.9, 1e-9];
        let a = bidiagonal_svd(&d, &e).unwrap();
        let s = 1e-200;
        let ds: Vec<f64> = d.iter().map(|x| x * s).collect();
        let es: Vec<f64> = e.iter().map(|x| x * s).collect();
        let b = bidiagonal_svd(&ds, &es).unwrap();
        for (x, y) in a.sigma.iter().zip(&b.sigma) {
            assert!((x * s - y).abs() <= 1e-13 * y);
        }
    }
}
