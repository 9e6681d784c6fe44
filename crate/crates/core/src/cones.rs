//! Generators and membership tests for the cone hierarchy: k-superpositive
//! maps, completely positive maps, k-positive maps, k-entangled operators and
//! k-block positive operators.
//!
//! Exact membership in the outer cones is not decidable in general, so
//! generated objects carry by-construction certificates and the tests on
//! arbitrary inputs are labeled necessary-only: a `Passed` verdict never
//! proves membership.

use num_complex::Complex64;
use rand::Rng;

use crate::bipartite::BipartiteOperator;
use crate::choi::{
    apply_to_left_factor, is_completely_positive, jamiolkowski, min_choi_eigenvalue, SuperOperator,
};
use crate::eig::eig_hermitian;
use crate::error::{CoreError, Result};
use crate::matrix::{outer, vec_norm, vec_tensor, ComplexMatrix, HermitianOperator};
use crate::report::{Certificate, TestParams, TestReport, Verdict};
use crate::rng::{ginibre_vector, RandomModel};

/// Relative refutation threshold for the sampled block-positivity test.
const REFUTE_TOL: f64 = 1e-10;
/// See-saw iteration cap and restart count.
const SEESAW_ITERS: usize = 200;
const SEESAW_RESTARTS: usize = 20;

/// Cone labels used in reports and dispatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    KSuperpositive,
    CompletelyPositive,
    KPositive,
    KEntangled,
    KBlockPositive,
}

/// A cone tag (kind, k) with 1 <= k <= d.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeTag {
    pub kind: ConeKind,
    pub k: usize,
}

/// A map certified k-superpositive by construction: every Kraus operator has
/// rank <= k.
#[derive(Clone, Debug)]
pub struct SpkMap {
    map: SuperOperator,
    k: usize,
}

impl SpkMap {
    pub fn map(&self) -> &SuperOperator {
        &self.map
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Adjoint stays k-superpositive: Kraus operators map to their adjoints
    /// and ranks are preserved.
    pub fn adjoint(&self) -> SpkMap {
        SpkMap {
            map: self.map.adjoint(),
            k: self.k,
        }
    }
}

/// Random k-superpositive map: `terms` Kraus operators, each a sum of k
/// random rank-1 factors.
pub fn random_sp_k(d: usize, k: usize, terms: usize, model: &RandomModel) -> Result<SpkMap> {
    let mut rng = model.stream(0x517b);
    random_sp_k_with_rng(&mut rng, d, k, terms)
}

pub fn random_sp_k_with_rng<R: Rng>(rng: &mut R, d: usize, k: usize, terms: usize) -> Result<SpkMap> {
    if k == 0 || k > d {
        return Err(CoreError::InvalidInput(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    if terms == 0 {
        return Err(CoreError::InvalidInput("need at least one Kraus term".into()));
    }
    let mut kraus = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut op = ComplexMatrix::zeros(d, d);
        for _ in 0..k {
            let u = ginibre_vector(rng, d);
            let v = ginibre_vector(rng, d);
            op = op.add(&outer(&u, &v))?;
        }
        kraus.push(op);
    }
    Ok(SpkMap {
        map: SuperOperator::from_kraus(d, d, kraus)?,
        k,
    })
}

/// A PSD operator certified k-entangled by construction: a convex
/// combination of projectors onto vectors of Schmidt rank <= k.
#[derive(Clone, Debug)]
pub struct KEntangledState {
    op: BipartiteOperator,
    k: usize,
    terms: usize,
}

impl KEntangledState {
    pub fn operator(&self) -> &BipartiteOperator {
        &self.op
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// k = 1 means separable by construction.
    pub fn is_separable_by_construction(&self) -> bool {
        self.k == 1
    }
}

/// Convex combination of projectors onto sum_i u_i (x) v_i with at most k
/// pairs per term. Weights must be nonnegative, input nonempty.
pub fn k_entangled_from_vectors(
    vector_pairs: &[Vec<(Vec<Complex64>, Vec<Complex64>)>],
    weights: &[f64],
) -> Result<KEntangledState> {
    if vector_pairs.is_empty() || vector_pairs.len() != weights.len() {
        return Err(CoreError::InvalidInput(
            "need matching nonempty terms and weights".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(CoreError::InvalidInput("weights must be nonnegative".into()));
    }
    let first = vector_pairs
        .first()
        .and_then(|t| t.first())
        .ok_or_else(|| CoreError::InvalidInput("empty first term".into()))?;
    let da = first.0.len();
    let db = first.1.len();
    let side = da * db;
    let mut acc = ComplexMatrix::zeros(side, side);
    let mut k = 0usize;
    for (term, &w) in vector_pairs.iter().zip(weights) {
        if term.is_empty() {
            return Err(CoreError::InvalidInput("empty term".into()));
        }
        k = k.max(term.len());
        let mut chi = vec![Complex64::new(0.0, 0.0); side];
        for (u, v) in term {
            if u.len() != da || v.len() != db {
                return Err(CoreError::DimensionMismatch("vector pair dims".into()));
            }
            for (c, t) in chi.iter_mut().zip(vec_tensor(u, v)) {
                *c += t;
            }
        }
        acc = acc.add(&outer(&chi, &chi).scale_re(w))?;
    }
    Ok(KEntangledState {
        op: BipartiteOperator::new(da, db, acc)?,
        k,
        terms: vector_pairs.len(),
    })
}

/// One see-saw half-step matrix: fixing the right-side vectors {v_i}, the
/// form <sum u_i (x) v_i |A| sum u_j (x) v_j> is U^dag B U for the stacked
/// left-side vector U; this returns B (Hermitian when A is).
fn effective_left_matrix(a: &BipartiteOperator, vs: &[Vec<Complex64>]) -> ComplexMatrix {
    let k = vs.len();
    let da = a.dim_a();
    let db = a.dim_b();
    let mut b = ComplexMatrix::zeros(k * da, k * da);
    for i in 0..k {
        for j in 0..k {
            for alpha in 0..da {
                for gamma in 0..da {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for beta in 0..db {
                        for delta in 0..db {
                            acc += vs[i][beta].conj() * a.entry(alpha, beta, gamma, delta)
                                * vs[j][delta];
                        }
                    }
                    b[(i * da + alpha, j * da + gamma)] = acc;
                }
            }
        }
    }
    b
}

fn effective_right_matrix(a: &BipartiteOperator, us: &[Vec<Complex64>]) -> ComplexMatrix {
    let k = us.len();
    let da = a.dim_a();
    let db = a.dim_b();
    let mut b = ComplexMatrix::zeros(k * db, k * db);
    for i in 0..k {
        for j in 0..k {
            for beta in 0..db {
                for delta in 0..db {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for alpha in 0..da {
                        for gamma in 0..da {
                            acc += us[i][alpha].conj() * a.entry(alpha, beta, gamma, delta)
                                * us[j][gamma];
                        }
                    }
                    b[(i * db + beta, j * db + delta)] = acc;
                }
            }
        }
    }
    b
}

fn assemble_schmidt_vector(
    us: &[Vec<Complex64>],
    vs: &[Vec<Complex64>],
    da: usize,
    db: usize,
) -> Vec<Complex64> {
    let mut chi = vec![Complex64::new(0.0, 0.0); da * db];
    for (u, v) in us.iter().zip(vs) {
        for (c, t) in chi.iter_mut().zip(vec_tensor(u, v)) {
            *c += t;
        }
    }
    chi
}

fn normalized_form(a: &BipartiteOperator, chi: &[Complex64]) -> Option<f64> {
    let n = vec_norm(chi);
    if n < 1e-12 {
        return None;
    }
    let val = a.form(chi).ok()?.re;
    Some(val / (n * n))
}

fn min_eig_vectors(m: &ComplexMatrix, parts: usize, part_len: usize) -> Result<Vec<Vec<Complex64>>> {
    let h = HermitianOperator::symmetrize(m)?;
    let e = eig_hermitian(&h)?;
    let v = e.eigenvector(e.eigenvalues.len() - 1);
    Ok((0..parts)
        .map(|i| v[i * part_len..(i + 1) * part_len].to_vec())
        .collect())
}

/// Necessary test for k-block positivity: evaluate the quadratic form on
/// random Schmidt-rank <= k vectors, then refine the worst candidates by
/// see-saw (alternate eigenvector descent over the two factors). The verdict
/// `Refuted` carries a certificate vector; `Passed` is NOT a proof.
pub fn is_k_block_positive_sampled(
    a: &BipartiteOperator,
    k: usize,
    samples: usize,
    model: &RandomModel,
) -> Result<TestReport> {
    if a.herm_deviation() > 1e-8 * a.matrix().max_norm().max(1.0) {
        return Err(CoreError::NotHermitian {
            deviation: a.herm_deviation(),
            tol: 1e-8 * a.matrix().max_norm().max(1.0),
        });
    }
    let da = a.dim_a();
    let db = a.dim_b();
    let scale = a.matrix().max_norm().max(1e-300);
    let threshold = -REFUTE_TOL * scale;

    let mut best_val = f64::INFINITY;
    let mut best_chi: Option<Vec<Complex64>> = None;

    let mut rng = model.stream(0xb10c);
    for _ in 0..samples {
        let us: Vec<Vec<Complex64>> = (0..k).map(|_| ginibre_vector(&mut rng, da)).collect();
        let vs: Vec<Vec<Complex64>> = (0..k).map(|_| ginibre_vector(&mut rng, db)).collect();
        let chi = assemble_schmidt_vector(&us, &vs, da, db);
        if let Some(val) = normalized_form(a, &chi) {
            if val < best_val {
                best_val = val;
                best_chi = Some(chi);
            }
        }
    }

    // see-saw refinement from fresh random restarts
    for restart in 0..SEESAW_RESTARTS {
        let mut rs = model.stream(0x5ee5 + restart as u64);
        let mut vs: Vec<Vec<Complex64>> = (0..k).map(|_| ginibre_vector(&mut rs, db)).collect();
        let mut last = f64::INFINITY;
        for _ in 0..SEESAW_ITERS {
            let us = min_eig_vectors(&effective_left_matrix(a, &vs), k, da)?;
            vs = min_eig_vectors(&effective_right_matrix(a, &us), k, db)?;
            let chi = assemble_schmidt_vector(&us, &vs, da, db);
            match normalized_form(a, &chi) {
                Some(val) => {
                    if val < best_val {
                        best_val = val;
                        best_chi = Some(chi);
                    }
                    if last - val <= 1e-14 * scale {
                        break;
                    }
                    last = val;
                }
                None => break,
            }
        }
        if best_val < threshold {
            break;
        }
    }

    let params = TestParams {
        tol: REFUTE_TOL,
        seed: model.seed,
        samples,
    };
    if best_val < threshold {
        let chi = best_chi.expect("certificate present on refutation");
        let normed = crate::matrix::vec_normalize(&chi)?;
        Ok(TestReport::new("is_k_block_positive_sampled", Verdict::Refuted)
            .with_certificate(Certificate::Vector {
                vector: normed,
                value: best_val,
            })
            .with_params(params)
            .with_value(best_val))
    } else {
        Ok(TestReport::new("is_k_block_positive_sampled", Verdict::Passed)
            .with_params(params)
            .with_value(best_val))
    }
}

/// A map whose k-positivity is certified by how it was built. Generic
/// k-positive maps cannot be sampled; the battery is completely positive
/// maps, the transposition, the reduction map, and convex combinations.
#[derive(Clone, Debug)]
pub enum CertifiedPositiveMap {
    /// Kraus-built, hence completely positive (k-positive for every k).
    CompletelyPositive(SuperOperator),
    /// Transposition on C^d: positive, not 2-positive.
    Transposition(usize),
    /// Reduction map on C^d: positive, not completely positive.
    Reduction(usize),
    /// Convex combination with nonnegative weights.
    Mix(Vec<(f64, CertifiedPositiveMap)>),
}

impl CertifiedPositiveMap {
    /// Largest k for which the construction certifies k-positivity.
    pub fn certified_k(&self) -> usize {
        match self {
            CertifiedPositiveMap::CompletelyPositive(m) => m.dim_in().max(m.dim_out()),
            CertifiedPositiveMap::Transposition(_) | CertifiedPositiveMap::Reduction(_) => 1,
            CertifiedPositiveMap::Mix(parts) => parts
                .iter()
                .map(|(_, p)| p.certified_k())
                .min()
                .unwrap_or(0),
        }
    }

    pub fn to_map(&self) -> Result<SuperOperator> {
        match self {
            CertifiedPositiveMap::CompletelyPositive(m) => Ok(m.clone()),
            CertifiedPositiveMap::Transposition(d) => Ok(SuperOperator::transposition(*d)),
            CertifiedPositiveMap::Reduction(d) => Ok(SuperOperator::reduction(*d)),
            CertifiedPositiveMap::Mix(parts) => {
                if parts.is_empty() {
                    return Err(CoreError::InvalidInput("empty mix".into()));
                }
                if parts.iter().any(|(w, _)| *w < 0.0) {
                    return Err(CoreError::InvalidInput("mix weights must be nonnegative".into()));
                }
                let mut acc: Option<ComplexMatrix> = None;
                let mut dims = (0, 0);
                for (w, p) in parts {
                    let m = p.to_map()?;
                    dims = (m.dim_in(), m.dim_out());
                    let scaled = m.rep().scale_re(*w);
                    acc = Some(match acc {
                        None => scaled,
                        Some(a) => a.add(&scaled)?,
                    });
                }
                SuperOperator::from_rep(dims.0, dims.1, acc.unwrap())
            }
        }
    }
}

/// Products of a certified k-superpositive map with a certified k-positive
/// map stay k-superpositive, hence completely positive; both orders are
/// verified through the Choi test. Rejects a battery map whose certificate
/// does not reach the requested k.
pub fn check_product_theorem(
    phi: &SpkMap,
    psi: &CertifiedPositiveMap,
    k: usize,
    tol: f64,
) -> Result<TestReport> {
    if phi.k() > k {
        return Err(CoreError::InvalidInput(format!(
            "map certified SP_{} but the theorem instance needs SP_{k}",
            phi.k()
        )));
    }
    if psi.certified_k() < k {
        return Err(CoreError::InvalidInput(format!(
            "battery map certified {}-positive only, need {k}-positive",
            psi.certified_k()
        )));
    }
    let psi_map = psi.to_map()?;
    let ab = psi_map.compose(phi.map())?;
    let ba = phi.map().compose(&psi_map)?;
    let min_ab = min_choi_eigenvalue(&ab)?;
    let min_ba = min_choi_eigenvalue(&ba)?;
    let min = min_ab.min(min_ba);
    let scale = jamiolkowski(&ab).matrix().max_norm().max(1.0);
    let verdict = if min >= -tol * scale {
        Verdict::Passed
    } else {
        Verdict::Refuted
    };
    Ok(TestReport::new("check_product_theorem", verdict)
        .with_value(min)
        .with_params(TestParams {
            tol,
            ..Default::default()
        }))
}

/// Hilbert-Schmidt pairing Tr(A B) of two bipartite operators; for a
/// certified k-block positive A and a certified k-entangled B this is
/// nonnegative up to roundoff.
pub fn check_pairing_duality(a: &BipartiteOperator, b: &BipartiteOperator) -> Result<f64> {
    if a.dim_a() != b.dim_a() || a.dim_b() != b.dim_b() {
        return Err(CoreError::DimensionMismatch("pairing duality dims".into()));
    }
    Ok(a.matrix().mul(b.matrix())?.trace().re)
}

/// The transposition map has positive trace (Tr t = d) yet is not completely
/// positive: naive trace-duality does not imply membership in the CP cone.
pub fn dual_cone_counterexample_check(d: usize) -> Result<TestReport> {
    if d < 2 {
        return Err(CoreError::InvalidInput("need d >= 2".into()));
    }
    let t = SuperOperator::transposition(d);
    let trace = t.trace().re;
    let cp = is_completely_positive(&t, 1e-10);
    let min_eig = min_choi_eigenvalue(&t)?;
    let verdict = if trace == d as f64 && !cp {
        Verdict::Passed
    } else {
        Verdict::Refuted
    };
    Ok(TestReport::new("dual_cone_counterexample_check", verdict)
        .with_certificate(Certificate::Scalar {
            name: "trace".into(),
            value: trace,
        })
        .with_value(min_eig))
}

/// Necessary test for k-entanglement: if (Psi (x) 1) rho has a negative
/// eigenvalue for any certified k-positive Psi, rho is refuted as
/// k-entangled (k = 1: refuted as separable, i.e. certified entangled).
pub fn k_positive_maps_criterion(
    rho: &BipartiteOperator,
    maps: &[CertifiedPositiveMap],
    k: usize,
    tol: f64,
) -> Result<TestReport> {
    let herm = HermitianOperator::certify(rho.matrix().clone())?;
    let min_in = eig_hermitian(&herm)?.min_eigenvalue();
    let scale = rho.matrix().max_norm().max(1e-300);
    if min_in < -tol * scale {
        return Err(CoreError::NotPsd {
            min_eigenvalue: min_in,
        });
    }
    for (idx, m) in maps.iter().enumerate() {
        if m.certified_k() < k {
            return Err(CoreError::InvalidInput(format!(
                "battery map {idx} certified {}-positive only, need {k}",
                m.certified_k()
            )));
        }
        let out = apply_to_left_factor(&m.to_map()?, rho)?;
        let h = HermitianOperator::symmetrize(out.matrix())?;
        let eig = eig_hermitian(&h)?;
        let min = eig.min_eigenvalue();
        if min < -tol * scale.max(out.matrix().max_norm()) {
            let v = eig.eigenvector(eig.eigenvalues.len() - 1);
            return Ok(TestReport::new("k_positive_maps_criterion", Verdict::Refuted)
                .with_certificate(Certificate::Eigenpair {
                    eigenvalue: min,
                    eigenvector: v,
                    source_index: idx,
                })
                .with_value(min)
                .with_params(TestParams {
                    tol,
                    ..Default::default()
                }));
        }
    }
    Ok(TestReport::new("k_positive_maps_criterion", Verdict::Passed).with_params(TestParams {
        tol,
        ..Default::default()
    }))
}
