//! Entanglement-witness machinery: block extraction, necessary-test
//! batteries over finite vector sets, the basis-quadruple inequality test,
//! witness evaluation against states, and the constructor showing that no
//! finite block battery is ever a sufficient block-positivity criterion.

use num_complex::Complex64;
use rand::Rng;

use crate::bipartite::BipartiteOperator;
use crate::eig::eig_hermitian;
use crate::error::{CoreError, Result};
use crate::matrix::{outer, vec_dot, vec_normalize, ComplexMatrix, HermitianOperator};
use crate::report::{Certificate, TestParams, TestReport, Verdict};
use crate::rng::{random_unit_vector, RandomModel};

/// Default relative eigenvalue threshold for block PSD checks.
pub const BLOCK_TOL: f64 = 1e-9;

/// Which side a block contracts: `Hat` contracts the right factor with u,
/// `Check` contracts the left factor with upsilon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSide {
    Hat,
    Check,
}

/// Block of A for a fixed right-factor vector u:
/// (A^_u)_{alpha gamma} = sum_{beta delta} conj(u^beta) A_{(alpha beta),(gamma delta)} u^delta.
/// Satisfies <upsilon|A^_u|upsilon> = <upsilon (x) u|A|upsilon (x) u>.
pub fn block_hat(a: &BipartiteOperator, u: &[Complex64]) -> Result<HermitianOperator> {
    if u.len() != a.dim_b() {
        return Err(CoreError::DimensionMismatch(format!(
            "u has length {}, right factor is {}",
            u.len(),
            a.dim_b()
        )));
    }
    if crate::matrix::vec_norm(u) == 0.0 {
        return Err(CoreError::InvalidInput("zero contraction vector".into()));
    }
    let da = a.dim_a();
    let db = a.dim_b();
    let mut m = ComplexMatrix::zeros(da, da);
    for alpha in 0..da {
        for gamma in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for beta in 0..db {
                for delta in 0..db {
                    acc += u[beta].conj() * a.entry(alpha, beta, gamma, delta) * u[delta];
                }
            }
            m[(alpha, gamma)] = acc;
        }
    }
    HermitianOperator::symmetrize(&m)
}

/// Block of A for a fixed left-factor vector upsilon:
/// (A~_ups)_{beta delta} = sum_{alpha gamma} conj(ups^alpha) A_{(alpha beta),(gamma delta)} ups^gamma.
pub fn block_check(a: &BipartiteOperator, upsilon: &[Complex64]) -> Result<HermitianOperator> {
    if upsilon.len() != a.dim_a() {
        return Err(CoreError::DimensionMismatch(format!(
            "upsilon has length {}, left factor is {}",
            upsilon.len(),
            a.dim_a()
        )));
    }
    if crate::matrix::vec_norm(upsilon) == 0.0 {
        return Err(CoreError::InvalidInput("zero contraction vector".into()));
    }
    let da = a.dim_a();
    let db = a.dim_b();
    let mut m = ComplexMatrix::zeros(db, db);
    for beta in 0..db {
        for delta in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for alpha in 0..da {
                for gamma in 0..da {
                    acc += upsilon[alpha].conj() * a.entry(alpha, beta, gamma, delta)
                        * upsilon[gamma];
                }
            }
            m[(beta, delta)] = acc;
        }
    }
    HermitianOperator::symmetrize(&m)
}

/// PSD-check every block over the two vector sets. A refutation certificate
/// is a product vector with a negative form value; `Passed` is necessary
/// only and never implies block positivity.
pub fn necessary_battery(
    a: &BipartiteOperator,
    upsilon_set: &[Vec<Complex64>],
    u_set: &[Vec<Complex64>],
    tol: f64,
) -> Result<TestReport> {
    let params = TestParams {
        tol,
        ..Default::default()
    };
    for ups in upsilon_set {
        let block = block_check(a, ups)?;
        let eig = eig_hermitian(&block)?;
        let min = eig.min_eigenvalue();
        if min < -tol * block.matrix().max_norm().max(1.0) {
            let w = eig.eigenvector(eig.eigenvalues.len() - 1);
            let value = a.product_form(ups, &w)?.re / crate::matrix::vec_norm(ups).powi(2);
            return Ok(TestReport::new("necessary_battery", Verdict::Refuted)
                .with_certificate(Certificate::ProductVector {
                    left: vec_normalize(ups)?,
                    right: w,
                    value,
                })
                .with_params(params)
                .with_value(min));
        }
    }
    for u in u_set {
        let block = block_hat(a, u)?;
        let eig = eig_hermitian(&block)?;
        let min = eig.min_eigenvalue();
        if min < -tol * block.matrix().max_norm().max(1.0) {
            let w = eig.eigenvector(eig.eigenvalues.len() - 1);
            let value = a.product_form(&w, u)?.re / crate::matrix::vec_norm(u).powi(2);
            return Ok(TestReport::new("necessary_battery", Verdict::Refuted)
                .with_certificate(Certificate::ProductVector {
                    left: w,
                    right: vec_normalize(u)?,
                    value,
                })
                .with_params(params)
                .with_value(min));
        }
    }
    Ok(TestReport::new("necessary_battery", Verdict::Passed).with_params(params))
}

/// Basis-quadruple necessary test for block positivity. For every quadruple
/// (alpha, beta, mu, nu) of computational basis indices a block positive A
/// satisfies
///
///   2 |<alpha (x) mu | A | beta (x) nu>|
///     <= A_(am),(am) + A_(an),(an) + A_(bm),(bm) + A_(bn),(bn),
///
/// the phase average of <chi|A|chi> >= 0 over chi = (alpha + s beta) (x)
/// (mu + t nu) with |s| = |t| = 1. SWAP and the boundary instances of the
/// tridiagonal family saturate it.
pub fn sommers_test(a: &BipartiteOperator, tol: f64) -> Result<TestReport> {
    if a.herm_deviation() > 1e-8 * a.matrix().max_norm().max(1.0) {
        return Err(CoreError::NotHermitian {
            deviation: a.herm_deviation(),
            tol: 1e-8 * a.matrix().max_norm().max(1.0),
        });
    }
    let da = a.dim_a();
    let db = a.dim_b();
    let scale = a.matrix().max_norm().max(1e-300);
    let params = TestParams {
        tol,
        ..Default::default()
    };
    for alpha in 0..da {
        for beta in 0..da {
            for mu in 0..db {
                for nu in 0..db {
                    let lhs = 2.0 * a.entry(alpha, mu, beta, nu).norm();
                    let rhs = a.entry(alpha, mu, alpha, mu).re
                        + a.entry(alpha, nu, alpha, nu).re
                        + a.entry(beta, mu, beta, mu).re
                        + a.entry(beta, nu, beta, nu).re;
                    if lhs > rhs + tol * scale {
                        return Ok(TestReport::new("sommers_test", Verdict::Refuted)
                            .with_certificate(Certificate::Quadruple {
                                indices: [alpha, beta, mu, nu],
                                lhs,
                                rhs,
                            })
                            .with_params(params)
                            .with_value(rhs - lhs));
                    }
                }
            }
        }
    }
    Ok(TestReport::new("sommers_test", Verdict::Passed).with_params(params))
}

/// Tr(A rho), real for Hermitian inputs. When A is certified block positive
/// a strictly negative value certifies rho entangled.
pub fn witness_value(a: &BipartiteOperator, rho: &BipartiteOperator) -> Result<f64> {
    if a.dim_a() != rho.dim_a() || a.dim_b() != rho.dim_b() {
        return Err(CoreError::DimensionMismatch("witness value dims".into()));
    }
    Ok(a.matrix().mul(rho.matrix())?.trace().re)
}

/// Output of the battery-insufficiency constructor.
#[derive(Clone, Debug)]
pub struct InsufficiencyCounterexample {
    pub a: BipartiteOperator,
    pub upsilon0: Vec<Complex64>,
    pub u0: Vec<Complex64>,
    /// max squared overlap of upsilon0 with the input set
    pub nu: f64,
    /// max squared overlap of u0 with the input set
    pub mu: f64,
}

/// Overlap guard: resampled directions keep max squared overlap <= 1 - 1e-3
/// so the (1+nu)/(1-nu) amplification stays conditioned.
const OVERLAP_GUARD: f64 = 1.0 - 1e-3;
const RESAMPLE_CAP: usize = 10_000;

fn pick_avoiding<R: Rng>(
    rng: &mut R,
    dim: usize,
    set: &[Vec<Complex64>],
) -> Result<(Vec<Complex64>, f64)> {
    for _ in 0..RESAMPLE_CAP {
        let cand = random_unit_vector(rng, dim);
        let overlap = set
            .iter()
            .map(|v| {
                let vn = vec_normalize(v).unwrap();
                vec_dot(&vn, &cand).norm_sqr()
            })
            .fold(0.0f64, f64::max);
        if overlap <= OVERLAP_GUARD {
            return Ok((cand, overlap));
        }
    }
    Err(CoreError::ResamplingExhausted { cap: RESAMPLE_CAP })
}

/// N = (1+nu)/(1-nu) (1 - |x0><x0|) - |x0><x0|: minimum expectation -1 at
/// x0, expectation >= 1 on every input direction with squared overlap <= nu.
fn amplified_reflector(x0: &[Complex64], nu: f64) -> ComplexMatrix {
    let d = x0.len();
    let proj = outer(x0, x0);
    let rest = ComplexMatrix::identity(d).sub(&proj).unwrap();
    let c = (1.0 + nu) / (1.0 - nu);
    rest.scale_re(c).sub(&proj).unwrap()
}

/// Build a Hermitian operator that passes the full block battery on the
/// given vector sets yet has product-vector form value exactly -2 at
/// upsilon0 (x) u0: the finite battery is never sufficient.
pub fn insufficiency_counterexample(
    upsilon_set: &[Vec<Complex64>],
    u_set: &[Vec<Complex64>],
    model: &RandomModel,
) -> Result<InsufficiencyCounterexample> {
    let d = upsilon_set
        .first()
        .map(|v| v.len())
        .ok_or_else(|| CoreError::InvalidInput("empty upsilon set".into()))?;
    let h = u_set
        .first()
        .map(|v| v.len())
        .ok_or_else(|| CoreError::InvalidInput("empty u set".into()))?;
    if d < 2 || h < 2 {
        return Err(CoreError::InvalidInput("need factor dimension >= 2".into()));
    }
    if upsilon_set.iter().any(|v| crate::matrix::vec_norm(v) == 0.0)
        || u_set.iter().any(|v| crate::matrix::vec_norm(v) == 0.0)
    {
        return Err(CoreError::InvalidInput("zero vector in input set".into()));
    }
    let mut rng = model.stream(0xc0de);
    let (upsilon0, nu) = pick_avoiding(&mut rng, d, upsilon_set)?;
    let (u0, mu) = pick_avoiding(&mut rng, h, u_set)?;
    Ok(build_counterexample(upsilon0, u0, nu, mu))
}

/// Deterministic variant with explicit avoidance directions (the overlaps nu
/// and mu are computed from the given sets).
pub fn insufficiency_counterexample_with(
    upsilon_set: &[Vec<Complex64>],
    u_set: &[Vec<Complex64>],
    upsilon0: Vec<Complex64>,
    u0: Vec<Complex64>,
) -> Result<InsufficiencyCounterexample> {
    let upsilon0 = vec_normalize(&upsilon0)?;
    let u0 = vec_normalize(&u0)?;
    let overlap = |set: &[Vec<Complex64>], x0: &[Complex64]| -> Result<f64> {
        let mut m = 0.0f64;
        for v in set {
            let vn = vec_normalize(v)?;
            m = m.max(vec_dot(&vn, x0).norm_sqr());
        }
        Ok(m)
    };
    let nu = overlap(upsilon_set, &upsilon0)?;
    let mu = overlap(u_set, &u0)?;
    if nu > OVERLAP_GUARD || mu > OVERLAP_GUARD {
        return Err(CoreError::InvalidInput(
            "avoidance directions overlap the input sets too strongly".into(),
        ));
    }
    Ok(build_counterexample(upsilon0, u0, nu, mu))
}

fn build_counterexample(
    upsilon0: Vec<Complex64>,
    u0: Vec<Complex64>,
    nu: f64,
    mu: f64,
) -> InsufficiencyCounterexample {
    let n = amplified_reflector(&upsilon0, nu);
    let m = amplified_reflector(&u0, mu);
    let d = upsilon0.len();
    let h = u0.len();
    let a = n
        .tensor(&ComplexMatrix::identity(h))
        .unwrap()
        .add(&ComplexMatrix::identity(d).tensor(&m).unwrap())
        .unwrap();
    InsufficiencyCounterexample {
        a: BipartiteOperator::new(d, h, a).unwrap(),
        upsilon0,
        u0,
        nu,
        mu,
    }
}
