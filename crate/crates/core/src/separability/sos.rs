//! Block positivity over the reals and sums of squares.
//!
//! For a real symmetric A invariant under partial transpose on the second
//! factor, the biquadratic form A_{ab,cd} x^a y^b x^c y^d is a sum of squares
//! exactly when A = B + (1 (x) t)B for some PSD B. The search alternates
//! projections between the PSD cone (eigenvalue clipping) and the affine set
//! {B : B + (1 (x) t)B = A} (replace the PT-symmetric part by A/2); it can
//! certify feasibility but never claims "not SOS".

use num_complex::Complex64;

use crate::bipartite::{BipartiteOperator, Factor};
use crate::eig::eig_hermitian;
use crate::error::{CoreError, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator};
use crate::report::{Certificate, TestParams, TestReport, Verdict};
use crate::rng::RandomModel;

fn imag_norm(m: &ComplexMatrix) -> f64 {
    m.data().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

fn require_real_symmetric(a: &BipartiteOperator) -> Result<()> {
    let scale = a.matrix().max_norm().max(1.0);
    if imag_norm(a.matrix()) > 1e-10 * scale {
        return Err(CoreError::InvalidInput(
            "expected a real matrix (imaginary parts present)".into(),
        ));
    }
    if a.herm_deviation() > 1e-10 * scale {
        return Err(CoreError::NotHermitian {
            deviation: a.herm_deviation(),
            tol: 1e-10 * scale,
        });
    }
    Ok(())
}

fn pt_right(a: &BipartiteOperator) -> BipartiteOperator {
    a.partial_transpose(Factor::Right)
}

fn is_pt_invariant(a: &BipartiteOperator, tol: f64) -> bool {
    let diff = pt_right(a).matrix().sub(a.matrix()).unwrap().fro_norm();
    diff <= tol * a.matrix().fro_norm().max(1.0)
}

/// Partial-transpose symmetrization (A + (1 (x) t)A)/2: PT-invariant and
/// with the same product-vector quadratic form as A.
pub fn pt_symmetrize_real(a: &BipartiteOperator) -> Result<BipartiteOperator> {
    require_real_symmetric(a)?;
    let sym = a.matrix().add(pt_right(a).matrix())?.scale_re(0.5);
    BipartiteOperator::new(a.dim_a(), a.dim_b(), sym)
}

/// PSD factor certifying A = B + (1 (x) t)B.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub b: BipartiteOperator,
}

/// True iff cert.b is PSD within tol and ||A - B - (1 (x) t)B||_F <=
/// tol_rel * ||A||_F. Errors when A is not real symmetric PT-invariant.
pub fn sos_certificate_check(
    a: &BipartiteOperator,
    cert: &SosCertificate,
    tol: f64,
) -> Result<bool> {
    require_real_symmetric(a)?;
    if !is_pt_invariant(a, 1e-10) {
        return Err(CoreError::InvalidInput(
            "certificate check needs a PT-invariant operator".into(),
        ));
    }
    let b = &cert.b;
    if b.dim_a() != a.dim_a() || b.dim_b() != a.dim_b() {
        return Err(CoreError::DimensionMismatch("certificate dims".into()));
    }
    let herm = HermitianOperator::symmetrize(b.matrix())?;
    let min = eig_hermitian(&herm)?.min_eigenvalue();
    if min < -tol * b.matrix().max_norm().max(1.0) {
        return Ok(false);
    }
    let rebuilt = b.matrix().add(pt_right(b).matrix())?;
    let resid = rebuilt.sub(a.matrix())?.fro_norm();
    Ok(resid <= tol.max(1e-12) * a.matrix().fro_norm().max(1e-300))
}

fn project_affine(b: &BipartiteOperator, half_a: &ComplexMatrix) -> Result<BipartiteOperator> {
    // decompose B into PT-symmetric + PT-antisymmetric parts and replace the
    // symmetric part by A/2 (the constraint B + PT(B) = A fixes it exactly)
    let anti = b.matrix().sub(pt_right(b).matrix())?.scale_re(0.5);
    BipartiteOperator::new(b.dim_a(), b.dim_b(), half_a.add(&anti)?)
}

fn project_psd(b: &BipartiteOperator) -> Result<BipartiteOperator> {
    let herm = HermitianOperator::symmetrize(b.matrix())?;
    let eig = eig_hermitian(&herm)?;
    let n = herm.side();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvector(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += Complex64::new(lam, 0.0) * v[r] * v[c].conj();
            }
        }
    }
    // inputs are real; discard numerical imaginary dust
    let real = ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(out[(r, c)].re, 0.0));
    BipartiteOperator::new(b.dim_a(), b.dim_b(), real)
}

/// Alternating-projection search for a PSD B with B + (1 (x) t)B = A.
/// Returns a validated certificate on success and `Inconclusive` after the
/// caps otherwise; an `Inconclusive` verdict does NOT mean the form is not a
/// sum of squares.
pub fn sos_search(
    a: &BipartiteOperator,
    iter_cap: usize,
    restarts: usize,
    model: &RandomModel,
) -> Result<(TestReport, Option<SosCertificate>)> {
    require_real_symmetric(a)?;
    if !is_pt_invariant(a, 1e-10) {
        return Err(CoreError::InvalidInput(
            "search needs a PT-invariant operator (symmetrize first)".into(),
        ));
    }
    let side = a.side();
    let half_a = a.matrix().scale_re(0.5);
    let norm = a.matrix().fro_norm().max(1e-300);
    let feas = 1e-8 * norm;
    let params = TestParams {
        tol: 1e-8,
        seed: model.seed,
        samples: restarts,
    };
    for restart in 0..restarts.max(1) {
        let mut b = if restart == 0 {
            BipartiteOperator::new(a.dim_a(), a.dim_b(), half_a.clone())?
        } else {
            let mut rng = model.stream(0x505 + restart as u64);
            let g = crate::rng::ginibre_matrix(&mut rng, side, side);
            let gr = ComplexMatrix::from_fn(side, side, |r, c| Complex64::new(g[(r, c)].re, 0.0));
            let psd = gr.mul(&gr.transpose())?;
            BipartiteOperator::new(a.dim_a(), a.dim_b(), psd.scale_re(norm / side as f64))?
        };
        for _ in 0..iter_cap {
            b = project_affine(&b, &half_a)?;
            b = project_psd(&b)?;
            let resid = b
                .matrix()
                .add(pt_right(&b).matrix())?
                .sub(a.matrix())?
                .fro_norm();
            if resid <= feas {
                let cert = SosCertificate { b: b.clone() };
                if sos_certificate_check(a, &cert, 1e-8)? {
                    return Ok((
                        TestReport::new("sos_search", Verdict::Feasible)
                            .with_certificate(Certificate::SosFactor {
                                b: matrix_rows(cert.b.matrix()),
                                residual: resid,
                            })
                            .with_params(params)
                            .with_value(resid),
                        Some(cert),
                    ));
                }
            }
        }
    }
    Ok((
        TestReport::new("sos_search", Verdict::Inconclusive).with_params(params),
        None,
    ))
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)].re).collect())
        .collect()
}
