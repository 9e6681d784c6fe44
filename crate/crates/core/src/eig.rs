//! Eigen- and singular-value decompositions for desk-scale dense matrices.
//!
//! Hermitian eigenproblems use a cyclic Jacobi iteration with complex
//! rotations; singular values use one-sided Jacobi on columns, which keeps
//! small singular values accurate (no Gram squaring). A shifted Hessenberg QR
//! handles general complex spectra (used mostly as a test oracle for the
//! exact polynomial machinery).

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of eigenvalues[k].
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.rows())
            .map(|r| self.eigenvectors[(r, k)])
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    /// Rebuild sum_k lambda_k |v_k><v_k|.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvector(k);
            for r in 0..n {
                for c in 0..n {
                    out[(r, c)] += Complex64::new(lam, 0.0) * v[r] * v[c].conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi diagonalization of a certified Hermitian operator.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<HermitianEig> {
    let n = h.side();
    let mut a = h.matrix().clone();
    let mut q = ComplexMatrix::identity(n);
    if n <= 1 {
        return Ok(HermitianEig {
            eigenvalues: (0..n).map(|i| a[(i, i)].re).collect(),
            eigenvectors: q,
        });
    }
    let scale = a.fro_norm();
    if scale == 0.0 {
        return Ok(HermitianEig {
            eigenvalues: vec![0.0; n],
            eigenvectors: q,
        });
    }
    let stop = 1e-14 * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off += a[(p, r)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                let mag = apr.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // Phase factor reduces the 2x2 block to a real symmetric one.
                let u = apr / mag;
                let app = a[(p, p)].re;
                let arr = a[(r, r)].re;
                let tau = (arr - app) / (2.0 * mag);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to columns (p, r): [[u c, u s], [-s, c]]
                let gpp = u * c;
                let gpr = u * s;
                let grp = Complex64::new(-s, 0.0);
                let grr = Complex64::new(c, 0.0);
                // A <- G^dag A G, applied as column then row updates
                for i in 0..n {
                    let aip = a[(i, p)];
                    let air = a[(i, r)];
                    a[(i, p)] = aip * gpp + air * grp;
                    a[(i, r)] = aip * gpr + air * grr;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let arj = a[(r, j)];
                    a[(p, j)] = gpp.conj() * apj + grp.conj() * arj;
                    a[(r, j)] = gpr.conj() * apj + grr.conj() * arj;
                }
                // keep the block exactly Hermitian against drift
                a[(p, r)] = (a[(p, r)] + a[(r, p)].conj()) * 0.5;
                a[(r, p)] = a[(p, r)].conj();
                for i in 0..n {
                    let qip = q[(i, p)];
                    let qir = q[(i, r)];
                    q[(i, p)] = qip * gpp + qir * grp;
                    q[(i, r)] = qip * gpr + qir * grr;
                }
            }
        }
    }
    if !converged {
        // final check: accept if the off-diagonal is merely near the floor
        let mut off = 0.0f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off += a[(p, r)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() > 1e-10 * scale {
            return Err(CoreError::NoConvergence {
                iterations: MAX_SWEEPS,
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, k| q[(r, order[k])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// True iff the minimum eigenvalue is >= -tol (absolute threshold).
pub fn is_psd(h: &HermitianOperator, tol: f64) -> Result<bool> {
    Ok(eig_hermitian(h)?.min_eigenvalue() >= -tol)
}

/// Thin singular value decomposition, singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided Jacobi SVD. Returns A = U diag(s) V^dag with s descending.
pub fn svd(m: &ComplexMatrix) -> Svd {
    // operate on the tall orientation so columns are the short side
    if m.rows() < m.cols() {
        let t = svd(&m.dagger());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    let rows = m.rows();
    let n = m.cols();
    let mut w = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = w.fro_norm();
    if scale == 0.0 || n == 0 {
        return Svd {
            u: ComplexMatrix::zeros(rows, n),
            singular_values: vec![0.0; n],
            v,
        };
    }
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in (p + 1)..n {
                let mut hpp = 0.0f64;
                let mut hrr = 0.0f64;
                let mut hpr = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wr = w[(i, r)];
                    hpp += wp.norm_sqr();
                    hrr += wr.norm_sqr();
                    hpr += wp.conj() * wr;
                }
                let mag = hpr.norm();
                if mag <= 1e-15 * (hpp * hrr).sqrt().max(1e-300) {
                    continue;
                }
                rotated = true;
                let u = hpr / mag;
                let tau = (hrr - hpp) / (2.0 * mag);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let gpp = u * c;
                let gpr = u * s;
                let grp = Complex64::new(-s, 0.0);
                let grr = Complex64::new(c, 0.0);
                for i in 0..rows {
                    let wp = w[(i, p)];
                    let wr = w[(i, r)];
                    w[(i, p)] = wp * gpp + wr * grp;
                    w[(i, r)] = wp * gpr + wr * grr;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vr = v[(i, r)];
                    v[(i, p)] = vp * gpp + vr * grp;
                    v[(i, r)] = vp * gpr + vr * grr;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigmas: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let s2: f64 = (0..rows).map(|i| w[(i, j)].norm_sqr()).sum();
            (s2.sqrt(), j)
        })
        .collect();
    sigmas.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let singular_values: Vec<f64> = sigmas.iter().map(|x| x.0).collect();
    let mut u = ComplexMatrix::zeros(rows, n);
    for (k, &(sig, j)) in sigmas.iter().enumerate() {
        if sig > 0.0 {
            for i in 0..rows {
                u[(i, k)] = w[(i, j)] / sig;
            }
        }
    }
    let v_sorted = ComplexMatrix::from_fn(n, n, |r, k| v[(r, sigmas[k].1)]);
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Number of singular values above tol * sigma_max.
pub fn numeric_rank(m: &ComplexMatrix, tol: f64) -> usize {
    let s = svd(m).singular_values;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// All eigenvalues of a general complex square matrix via Hessenberg
/// reduction and shifted QR. No eigenvectors.
pub fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(CoreError::DimensionMismatch(
            "eigenvalues need a square matrix".into(),
        ));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut h = hessenberg(m);
    let scale = h.fro_norm().max(1e-300);
    let eps = 1e-15;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is 0..hi
    let mut iters = 0usize;
    let max_iters = 60 * n.max(4);
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // deflate converged subdiagonals at the bottom of the active block
        let mut deflated = false;
        for i in (1..hi).rev() {
            let denom = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
            if h[(i, i - 1)].norm() <= eps * denom.max(eps * scale) {
                h[(i, i - 1)] = Complex64::new(0.0, 0.0);
                if i == hi - 1 {
                    eigs.push(h[(hi - 1, hi - 1)]);
                    hi -= 1;
                    deflated = true;
                    break;
                }
            }
        }
        if deflated {
            continue;
        }
        if hi == 2 && h[(1, 0)].norm() <= eps * scale {
            eigs.push(h[(1, 1)]);
            eigs.push(h[(0, 0)]);
            break;
        }
        iters += 1;
        if iters > max_iters {
            return Err(CoreError::NoConvergence {
                iterations: max_iters,
            });
        }
        let shift = if iters % 16 == 0 && iters > 0 {
            // exceptional shift to break symmetric stagnation
            h[(hi - 1, hi - 1)] + Complex64::new(0.75 * h[(hi - 1, hi - 2)].norm(), 0.34 * scale * 1e-3)
        } else {
            // Wilkinson shift from the trailing 2x2 of the active block
            let a = h[(hi - 2, hi - 2)];
            let b = h[(hi - 2, hi - 1)];
            let c = h[(hi - 1, hi - 2)];
            let d = h[(hi - 1, hi - 1)];
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - det * 4.0).sqrt();
            let l1 = (tr + disc) * 0.5;
            let l2 = (tr - disc) * 0.5;
            if (l1 - d).norm() < (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        qr_step(&mut h, hi, shift);
    }
    Ok(eigs)
}

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder on column k below the subdiagonal
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm <= 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        x[0] += phase * xnorm;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= 1e-300 {
            continue;
        }
        let v: Vec<Complex64> = x.iter().map(|z| z / vnorm).collect();
        // H = I - 2 v v^dag applied from left (rows k+1..n) and right (cols k+1..n)
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * h[(k + 1 + idx, j)];
            }
            let dot2 = dot * 2.0;
            for (idx, vi) in v.iter().enumerate() {
                let cur = h[(k + 1 + idx, j)];
                h[(k + 1 + idx, j)] = cur - vi * dot2;
            }
        }
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += h[(i, k + 1 + idx)] * *vi;
            }
            let dot2 = dot * 2.0;
            for (idx, vi) in v.iter().enumerate() {
                let cur = h[(i, k + 1 + idx)];
                h[(i, k + 1 + idx)] = cur - dot2 * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// One explicit shifted QR step on the leading hi x hi Hessenberg block,
/// using Givens rotations.
fn qr_step(h: &mut ComplexMatrix, hi: usize, shift: Complex64) {
    let n = h.cols();
    for i in 0..hi {
        h[(i, i)] -= shift;
    }
    // QR via Givens on the subdiagonal; remember rotations
    let mut rot: Vec<(usize, Complex64, Complex64)> = Vec::with_capacity(hi - 1);
    for i in 0..hi - 1 {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r <= 1e-300 {
            rot.push((i, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
            continue;
        }
        let c = a / r;
        let s = b / r;
        // G = [[c^*, s^*], [-s, c]] zeroes the subdiagonal entry
        for j in i..n {
            let top = h[(i, j)];
            let bot = h[(i + 1, j)];
            h[(i, j)] = c.conj() * top + s.conj() * bot;
            h[(i + 1, j)] = -s * top + c * bot;
        }
        rot.push((i, c, s));
    }
    // RQ: apply rotations on the right
    for &(i, c, s) in &rot {
        for r in 0..(i + 2).min(hi) {
            let left = h[(r, i)];
            let right = h[(r, i + 1)];
            h[(r, i)] = left * c + right * s;
            h[(r, i + 1)] = -left * s.conj() + right * c.conj();
        }
    }
    for i in 0..hi {
        h[(i, i)] += shift;
    }
}
