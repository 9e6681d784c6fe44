//! The Jamiolkowski transform between maps on operators and bipartite
//! operators, the circled product it induces, Kraus application, the
//! complete-positivity test, and the Hilbert-Schmidt pairing on maps.
//!
//! Convention: the UNNORMALIZED transform J(Phi) = sum_{a,b} Phi(|a><b|) (x)
//! |a><b| is the default. It makes the reshuffling identity
//! (J(Phi))_{(a c),(b d)} = Phi_{ab,cd}, the isometry of the pairing, the
//! multiplicativity J(Phi Psi) = J(Phi) . J(Psi) and Tr t = d hold exactly.
//! A normalized variant (division by dim_in) is exposed for interoperability;
//! positivity statements are scale-invariant either way.

use num_complex::Complex64;

use crate::bipartite::BipartiteOperator;
use crate::eig::{eig_hermitian, is_psd};
use crate::error::{CoreError, Result};
use crate::matrix::{ComplexMatrix, HermitianOperator};

/// Build-time consistency tolerance between the matrix and Kraus forms.
const REP_CONSISTENCY_TOL: f64 = 1e-10;

/// Linear map from L(C^dim_in) to L(C^dim_out), stored as a matrix acting on
/// operators vectorized in the elementary basis {|a><b|} (row-major), plus an
/// optional Kraus list.
///
/// With Kraus operators K_i (dim_out x dim_in) the action is
/// xi -> sum_i K_i xi K_i^dag, i.e. rep = sum_i K_i (x) conj(K_i).
#[derive(Clone, Debug)]
pub struct SuperOperator {
    dim_in: usize,
    dim_out: usize,
    rep: ComplexMatrix,
    kraus: Option<Vec<ComplexMatrix>>,
}

impl SuperOperator {
    /// From the elementary-basis matrix representation (dim_out^2 x dim_in^2).
    pub fn from_rep(dim_in: usize, dim_out: usize, rep: ComplexMatrix) -> Result<Self> {
        if rep.rows() != dim_out * dim_out || rep.cols() != dim_in * dim_in {
            return Err(CoreError::DimensionMismatch(format!(
                "rep must be {}x{}, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                rep.rows(),
                rep.cols()
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            rep,
            kraus: None,
        })
    }

    /// From a Kraus list; the matrix representation is materialized and the
    /// two are consistent by construction.
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(CoreError::InvalidInput("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(CoreError::DimensionMismatch(format!(
                    "Kraus operator must be {}x{}, got {}x{}",
                    dim_out,
                    dim_in,
                    k.rows(),
                    k.cols()
                )));
            }
        }
        let rep = rep_from_kraus(dim_in, dim_out, &kraus)?;
        Ok(Self {
            dim_in,
            dim_out,
            rep,
            kraus: Some(kraus),
        })
    }

    /// From both forms, cross-checked at tolerance 1e-10.
    pub fn from_rep_and_kraus(
        dim_in: usize,
        dim_out: usize,
        rep: ComplexMatrix,
        kraus: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let built = Self::from_kraus(dim_in, dim_out, kraus)?;
        let scale = rep.fro_norm().max(1.0);
        let dev = built.rep.sub(&rep)?.fro_norm();
        if dev > REP_CONSISTENCY_TOL * scale {
            return Err(CoreError::InvalidInput(format!(
                "matrix and Kraus representations disagree: deviation {dev:.3e}"
            )));
        }
        Ok(built)
    }

    /// The identity map on L(C^d).
    pub fn identity(d: usize) -> Self {
        Self::from_kraus(d, d, vec![ComplexMatrix::identity(d)]).unwrap()
    }

    /// The transposition map t: |a><b| -> |b><a|.
    pub fn transposition(d: usize) -> Self {
        let mut rep = ComplexMatrix::zeros(d * d, d * d);
        for g in 0..d {
            for dl in 0..d {
                // t(e_{g dl}) = e_{dl g}
                rep[(dl * d + g, g * d + dl)] = Complex64::new(1.0, 0.0);
            }
        }
        Self::from_rep(d, d, rep).unwrap()
    }

    /// The reduction map: xi -> Tr(xi) 1 - xi. Positive, not completely positive.
    pub fn reduction(d: usize) -> Self {
        let mut rep = ComplexMatrix::zeros(d * d, d * d);
        for g in 0..d {
            for dl in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let mut v = 0.0;
                        if g == dl && a == b {
                            v += 1.0;
                        }
                        if a == g && b == dl {
                            v -= 1.0;
                        }
                        if v != 0.0 {
                            rep[(a * d + b, g * d + dl)] = Complex64::new(v, 0.0);
                        }
                    }
                }
            }
        }
        Self::from_rep(d, d, rep).unwrap()
    }

    /// Conjugation xi -> U xi U^dag.
    pub fn conjugation(u: ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        if !u.is_square() {
            return Err(CoreError::DimensionMismatch("conjugation needs square U".into()));
        }
        Self::from_kraus(d, d, vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn rep(&self) -> &ComplexMatrix {
        &self.rep
    }

    pub fn kraus(&self) -> Option<&[ComplexMatrix]> {
        self.kraus.as_deref()
    }

    /// Apply to an operator. Uses the Kraus path when present, otherwise the
    /// matrix path rep . vec(xi); the two agree within 1e-10 by construction.
    pub fn apply(&self, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
        if xi.rows() != self.dim_in || xi.cols() != self.dim_in {
            return Err(CoreError::DimensionMismatch(format!(
                "map expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                xi.rows(),
                xi.cols()
            )));
        }
        if let Some(kraus) = &self.kraus {
            let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
            for k in kraus {
                out = out.add(&k.mul(xi)?.mul(&k.dagger())?)?;
            }
            return Ok(out);
        }
        self.apply_via_rep(xi)
    }

    /// Matrix path only: rep . vec(xi).
    pub fn apply_via_rep(&self, xi: &ComplexMatrix) -> Result<ComplexMatrix> {
        if xi.rows() != self.dim_in || xi.cols() != self.dim_in {
            return Err(CoreError::DimensionMismatch("input shape".into()));
        }
        let v = self.rep.mul_vec(xi.data())?;
        ComplexMatrix::new(self.dim_out, self.dim_out, v)
    }

    /// Composition self o other.
    pub fn compose(&self, other: &SuperOperator) -> Result<SuperOperator> {
        if self.dim_in != other.dim_out {
            return Err(CoreError::DimensionMismatch(format!(
                "compose: inner dims {} vs {}",
                self.dim_in, other.dim_out
            )));
        }
        let rep = self.rep.mul(&other.rep)?;
        let kraus = match (&self.kraus, &other.kraus) {
            (Some(a), Some(b)) => {
                let mut list = Vec::with_capacity(a.len() * b.len());
                for ka in a {
                    for kb in b {
                        list.push(ka.mul(kb)?);
                    }
                }
                Some(list)
            }
            _ => None,
        };
        Ok(SuperOperator {
            dim_in: other.dim_in,
            dim_out: self.dim_out,
            rep,
            kraus,
        })
    }

    /// Adjoint with respect to the Hilbert-Schmidt pairing:
    /// (Phi(xi)|zeta) = (xi|Phi^*(zeta)). In the elementary basis this is the
    /// conjugate transpose of rep; Kraus operators map to their adjoints.
    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            dim_in: self.dim_out,
            dim_out: self.dim_in,
            rep: self.rep.dagger(),
            kraus: self
                .kraus
                .as_ref()
                .map(|ks| ks.iter().map(|k| k.dagger()).collect()),
        }
    }

    /// Trace of the map as an operator on L(C^d) (sum of diagonal rep entries).
    pub fn trace(&self) -> Complex64 {
        self.rep.trace()
    }
}

fn rep_from_kraus(
    dim_in: usize,
    dim_out: usize,
    kraus: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let mut rep = ComplexMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
    for k in kraus {
        rep = rep.add(&k.tensor_with_cap(&k.conj(), usize::MAX)?)?;
    }
    Ok(rep)
}

/// Unnormalized Jamiolkowski transform J(Phi) = sum_{a,b} Phi(|a><b|) (x) |a><b|.
/// Output lives on C^dim_out (x) C^dim_in and satisfies the entry identity
/// (J(Phi))_{(a g),(b d)} = Phi_{ab,gd} exactly.
pub fn jamiolkowski(phi: &SuperOperator) -> BipartiteOperator {
    let d = phi.dim_in;
    let h = phi.dim_out;
    let mut out = BipartiteOperator::new(h, d, ComplexMatrix::zeros(h * d, h * d)).unwrap();
    for a in 0..h {
        for b in 0..h {
            for g in 0..d {
                for dl in 0..d {
                    out.set_entry(a, g, b, dl, phi.rep[(a * h + b, g * d + dl)]);
                }
            }
        }
    }
    out
}

/// Normalized variant J(Phi)/dim_in matching the unit-trace maximally
/// entangled state convention.
pub fn jamiolkowski_normalized(phi: &SuperOperator) -> BipartiteOperator {
    jamiolkowski(phi).scale_re(1.0 / phi.dim_in as f64)
}

/// Inverse transform: rebuild the map from its Choi operator.
pub fn jamiolkowski_inverse(x: &BipartiteOperator) -> SuperOperator {
    let h = x.dim_a();
    let d = x.dim_b();
    let mut rep = ComplexMatrix::zeros(h * h, d * d);
    for a in 0..h {
        for b in 0..h {
            for g in 0..d {
                for dl in 0..d {
                    rep[(a * h + b, g * d + dl)] = x.entry(a, g, b, dl);
                }
            }
        }
    }
    SuperOperator {
        dim_in: d,
        dim_out: h,
        rep,
        kraus: None,
    }
}

/// Circled product (A . B)_{(alpha beta),(gamma delta)} =
/// sum_{xi zeta} A_{(alpha xi),(gamma zeta)} B_{(xi beta),(zeta delta)},
/// the image of map composition under J. Basis dependent, as is J itself.
pub fn circled_product(a: &BipartiteOperator, b: &BipartiteOperator) -> Result<BipartiteOperator> {
    if a.dim_a() != a.dim_b() || b.dim_a() != b.dim_b() || a.dim_a() != b.dim_a() {
        return Err(CoreError::DimensionMismatch(
            "circled product needs equal square factor dims".into(),
        ));
    }
    let d = a.dim_a();
    let mut out = BipartiteOperator::new(d, d, ComplexMatrix::zeros(d * d, d * d))?;
    for alpha in 0..d {
        for beta in 0..d {
            for gamma in 0..d {
                for delta in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for xi in 0..d {
                        for zeta in 0..d {
                            acc += a.entry(alpha, xi, gamma, zeta) * b.entry(xi, beta, zeta, delta);
                        }
                    }
                    out.set_entry(alpha, beta, gamma, delta, acc);
                }
            }
        }
    }
    Ok(out)
}

/// Choi test: Phi is completely positive iff J(Phi) is PSD (within tol).
pub fn is_completely_positive(phi: &SuperOperator, tol: f64) -> bool {
    let j = jamiolkowski(phi);
    let herm = match HermitianOperator::symmetrize(j.matrix()) {
        Ok(h) => h,
        Err(_) => return false,
    };
    // a non-Hermitian Choi operator is certainly not PSD
    if j.herm_deviation() > tol.max(1e-12) * j.matrix().max_norm().max(1.0) {
        return false;
    }
    is_psd(&herm, tol).unwrap_or(false)
}

/// Minimum eigenvalue of the (symmetrized) Choi operator.
pub fn min_choi_eigenvalue(phi: &SuperOperator) -> Result<f64> {
    let j = jamiolkowski(phi);
    let herm = HermitianOperator::symmetrize(j.matrix())?;
    Ok(eig_hermitian(&herm)?.min_eigenvalue())
}

/// Kraus operators of a PSD Choi operator via its spectral decomposition:
/// eigenvector coordinates (a, g) reshape to the dim_out x dim_in operator
/// sqrt(lambda) K. Errors with the offending eigenvalue if X is not PSD.
pub fn kraus_from_choi(x: &BipartiteOperator, tol: f64) -> Result<Vec<ComplexMatrix>> {
    let h = x.dim_a();
    let d = x.dim_b();
    let herm = HermitianOperator::certify(x.matrix().clone())?;
    let eig = eig_hermitian(&herm)?;
    let min = eig.min_eigenvalue();
    let scale = eig.eigenvalues.first().copied().unwrap_or(0.0).max(1.0);
    if min < -tol * scale {
        return Err(CoreError::NotPsd {
            min_eigenvalue: min,
        });
    }
    let cutoff = tol * scale;
    let mut kraus = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let v = eig.eigenvector(k);
        let s = lam.sqrt();
        kraus.push(ComplexMatrix::from_fn(h, d, |a, g| {
            v[a * d + g] * Complex64::new(s, 0.0)
        }));
    }
    if kraus.is_empty() {
        // the zero map
        kraus.push(ComplexMatrix::zeros(h, d));
    }
    Ok(kraus)
}

/// Hilbert-Schmidt pairing (Phi|Psi) computed as Tr(J(Phi)^dag J(Psi)).
/// Requires both J-images Hermitian (the pairing is then real and symmetric).
pub fn map_pairing(phi: &SuperOperator, psi: &SuperOperator) -> Result<f64> {
    if phi.dim_in != psi.dim_in || phi.dim_out != psi.dim_out {
        return Err(CoreError::DimensionMismatch("pairing dims".into()));
    }
    let ja = jamiolkowski(phi);
    let jb = jamiolkowski(psi);
    for j in [&ja, &jb] {
        let scale = j.matrix().max_norm().max(1.0);
        let dev = j.herm_deviation();
        if dev > 1e-10 * scale {
            return Err(CoreError::NotHermitian {
                deviation: dev,
                tol: 1e-10 * scale,
            });
        }
    }
    Ok(ja.matrix().hs_inner(jb.matrix())?.re)
}

/// The defining pairing route sum_{a,b} Tr(Phi(e_ab)^dag Psi(e_ab)),
/// evaluated through the maps' action. Used to exercise the isometry.
pub fn map_pairing_via_action(phi: &SuperOperator, psi: &SuperOperator) -> Result<Complex64> {
    if phi.dim_in != psi.dim_in || phi.dim_out != psi.dim_out {
        return Err(CoreError::DimensionMismatch("pairing dims".into()));
    }
    let d = phi.dim_in;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..d {
        for b in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(a, b)] = Complex64::new(1.0, 0.0);
            let pa = phi.apply(&unit)?;
            let pb = psi.apply(&unit)?;
            acc += pa.hs_inner(&pb)?;
        }
    }
    Ok(acc)
}

/// (Psi (x) 1) rho: apply a map to the left factor of a bipartite operator.
pub fn apply_to_left_factor(
    psi: &SuperOperator,
    rho: &BipartiteOperator,
) -> Result<BipartiteOperator> {
    if psi.dim_in != rho.dim_a() {
        return Err(CoreError::DimensionMismatch(format!(
            "map input dim {} vs left factor {}",
            psi.dim_in,
            rho.dim_a()
        )));
    }
    let h = psi.dim_out;
    let da = rho.dim_a();
    let db = rho.dim_b();
    let mut out = BipartiteOperator::new(h, db, ComplexMatrix::zeros(h * db, h * db))?;
    for a in 0..h {
        for b in 0..h {
            for beta in 0..db {
                for delta in 0..db {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for alpha in 0..da {
                        for gamma in 0..da {
                            acc += psi.rep[(a * h + b, alpha * da + gamma)]
                                * rho.entry(alpha, beta, gamma, delta);
                        }
                    }
                    out.set_entry(a, beta, b, delta, acc);
                }
            }
        }
    }
    Ok(out)
}

/// (1 (x) Psi) rho: apply a map to the right factor.
pub fn apply_to_right_factor(
    psi: &SuperOperator,
    rho: &BipartiteOperator,
) -> Result<BipartiteOperator> {
    if psi.dim_in != rho.dim_b() {
        return Err(CoreError::DimensionMismatch(format!(
            "map input dim {} vs right factor {}",
            psi.dim_in,
            rho.dim_b()
        )));
    }
    let h = psi.dim_out;
    let da = rho.dim_a();
    let db = rho.dim_b();
    let mut out = BipartiteOperator::new(da, h, ComplexMatrix::zeros(da * h, da * h))?;
    for alpha in 0..da {
        for gamma in 0..da {
            for a in 0..h {
                for b in 0..h {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for beta in 0..db {
                        for delta in 0..db {
                            acc += psi.rep[(a * h + b, beta * db + delta)]
                                * rho.entry(alpha, beta, gamma, delta);
                        }
                    }
                    out.set_entry(alpha, a, gamma, b, acc);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{max_entangled_projector, swap_operator};
    use crate::rng::{ginibre_matrix, RandomModel};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_map(rng: &mut impl rand::Rng, d: usize, terms: usize) -> SuperOperator {
        let kraus = (0..terms).map(|_| ginibre_matrix(rng, d, d)).collect();
        SuperOperator::from_kraus(d, d, kraus).unwrap()
    }

    #[test]
    fn choi_of_identity_is_unnormalized_max_entangled() {
        let id = SuperOperator::identity(2);
        let j = jamiolkowski(&id);
        let want = max_entangled_projector(2);
        assert!(j.matrix().approx_eq(want.matrix(), 1e-14));
        assert!((j.matrix().trace().re - 2.0).abs() < 1e-14);
        assert_eq!(crate::eig::numeric_rank(j.matrix(), 1e-10), 1);
    }

    #[test]
    fn choi_of_transposition_is_swap() {
        for d in 2..=3 {
            let t = SuperOperator::transposition(d);
            let j = jamiolkowski(&t);
            assert!(j.matrix().approx_eq(swap_operator(d).matrix(), 1e-14));
        }
    }

    #[test]
    fn jamiolkowski_round_trip() {
        let model = RandomModel::new(5);
        let mut rng = model.stream(0);
        for _ in 0..5 {
            let phi = random_map(&mut rng, 3, 2);
            let j = jamiolkowski(&phi);
            let back = jamiolkowski_inverse(&j);
            assert!(back.rep().approx_eq(phi.rep(), 1e-12));
            let j2 = jamiolkowski(&back);
            assert!(j2.matrix().approx_eq(j.matrix(), 0.0));
        }
    }

    #[test]
    fn kraus_and_rep_paths_agree() {
        let model = RandomModel::new(6);
        let mut rng = model.stream(0);
        let phi = random_map(&mut rng, 3, 3);
        let xi = ginibre_matrix(&mut rng, 3, 3);
        let a = phi.apply(&xi).unwrap();
        let b = phi.apply_via_rep(&xi).unwrap();
        let scale = a.fro_norm().max(1.0);
        assert!(a.sub(&b).unwrap().fro_norm() <= 1e-10 * scale);
    }

    #[test]
    fn transposition_action_on_unit() {
        let t = SuperOperator::transposition(2);
        let mut e01 = ComplexMatrix::zeros(2, 2);
        e01[(0, 1)] = c(1.0, 0.0);
        let out = t.apply(&e01).unwrap();
        let mut want = ComplexMatrix::zeros(2, 2);
        want[(1, 0)] = c(1.0, 0.0);
        assert!(out.approx_eq(&want, 1e-15));
    }

    #[test]
    fn trace_preserving_kraus_preserves_trace() {
        // normalize a random Kraus set so sum K^dag K = 1
        let model = RandomModel::new(8);
        let mut rng = model.stream(0);
        let raw: Vec<ComplexMatrix> = (0..3).map(|_| ginibre_matrix(&mut rng, 2, 2)).collect();
        let mut s = ComplexMatrix::zeros(2, 2);
        for k in &raw {
            s = s.add(&k.dagger().mul(k).unwrap()).unwrap();
        }
        // S^{-1/2} via eigendecomposition
        let h = HermitianOperator::symmetrize(&s).unwrap();
        let e = eig_hermitian(&h).unwrap();
        let mut sinv = ComplexMatrix::zeros(2, 2);
        for k in 0..2 {
            let v = e.eigenvector(k);
            let lam = e.eigenvalues[k];
            let f = 1.0 / lam.sqrt();
            for r in 0..2 {
                for q in 0..2 {
                    sinv[(r, q)] += c(f, 0.0) * v[r] * v[q].conj();
                }
            }
        }
        let kraus: Vec<ComplexMatrix> = raw.iter().map(|k| k.mul(&sinv).unwrap()).collect();
        let phi = SuperOperator::from_kraus(2, 2, kraus).unwrap();
        let xi = ginibre_matrix(&mut rng, 2, 2);
        let out = phi.apply(&xi).unwrap();
        assert!((out.trace() - xi.trace()).norm() < 1e-9);
    }

    #[test]
    fn choi_test_directions() {
        let model = RandomModel::new(9);
        let mut rng = model.stream(0);
        for _ in 0..10 {
            let phi = random_map(&mut rng, 2, 2);
            assert!(is_completely_positive(&phi, 1e-10));
        }
        for d in 2..=4 {
            let t = SuperOperator::transposition(d);
            assert!(!is_completely_positive(&t, 1e-10));
            assert!((min_choi_eigenvalue(&t).unwrap() + 1.0).abs() < 1e-10);
        }
        // reduction map: J = 1(x)1 - d|psi+><psi+| has min eigenvalue 1 - d
        let lam = SuperOperator::reduction(2);
        assert!(!is_completely_positive(&lam, 1e-10));
        assert!((min_choi_eigenvalue(&lam).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn kraus_from_choi_round_trip() {
        let model = RandomModel::new(10);
        let mut rng = model.stream(0);
        let phi = random_map(&mut rng, 3, 2);
        let j = jamiolkowski(&phi);
        let kraus = kraus_from_choi(&j, 1e-12).unwrap();
        let rebuilt = SuperOperator::from_kraus(3, 3, kraus).unwrap();
        let dev = rebuilt.rep().sub(phi.rep()).unwrap().fro_norm();
        assert!(dev <= 1e-9 * phi.rep().fro_norm().max(1.0), "dev {dev}");
    }

    #[test]
    fn kraus_from_choi_rejects_non_psd() {
        let s = swap_operator(2);
        let err = kraus_from_choi(&s, 1e-10).unwrap_err();
        match err {
            CoreError::NotPsd { min_eigenvalue } => assert!((min_eigenvalue + 1.0).abs() < 1e-10),
            e => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn kraus_from_choi_product_projector() {
        // |u (x) v><u (x) v| yields a single rank-1 Kraus operator
        let u = crate::matrix::vec_normalize(&[c(0.6, 0.1), c(0.2, -0.5)]).unwrap();
        let v = crate::matrix::vec_normalize(&[c(0.3, 0.4), c(0.8, 0.0)]).unwrap();
        let uv = crate::matrix::vec_tensor(&u, &v);
        let proj = crate::matrix::outer(&uv, &uv);
        let x = BipartiteOperator::new(2, 2, proj).unwrap();
        let kraus = kraus_from_choi(&x, 1e-10).unwrap();
        assert_eq!(kraus.len(), 1);
        assert_eq!(crate::eig::numeric_rank(&kraus[0], 1e-8), 1);
    }

    #[test]
    fn pairing_identities() {
        for d in 2..=4 {
            let id = SuperOperator::identity(d);
            let t = SuperOperator::transposition(d);
            assert!((map_pairing(&id, &id).unwrap() - (d * d) as f64).abs() < 1e-12);
            assert!((map_pairing(&id, &t).unwrap() - d as f64).abs() < 1e-12);
            // Tr t = d via the rep trace as well
            assert!((t.trace().re - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn pairing_isometry_two_paths() {
        let model = RandomModel::new(12);
        let mut rng = model.stream(0);
        for _ in 0..10 {
            // maps with Hermitian Choi images: build from Hermitian bipartite operators
            let h1 = crate::rng::random_hermitian(&mut rng, 9);
            let h2 = crate::rng::random_hermitian(&mut rng, 9);
            let x1 = BipartiteOperator::new(3, 3, h1.matrix().clone()).unwrap();
            let x2 = BipartiteOperator::new(3, 3, h2.matrix().clone()).unwrap();
            let phi = jamiolkowski_inverse(&x1);
            let psi = jamiolkowski_inverse(&x2);
            let a = map_pairing(&phi, &psi).unwrap();
            let b = map_pairing_via_action(&phi, &psi).unwrap();
            let scale = a.abs().max(1.0);
            assert!((a - b.re).abs() <= 1e-10 * scale);
            assert!(b.im.abs() <= 1e-10 * scale);
            // symmetry on J^{-1}(H(V(x)V))
            let ba = map_pairing(&psi, &phi).unwrap();
            assert!((a - ba).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn pairing_rejects_non_hermitian_choi() {
        let model = RandomModel::new(13);
        let mut rng = model.stream(0);
        // a generic map has a non-Hermitian Choi image
        let g = ginibre_matrix(&mut rng, 4, 4);
        let phi = SuperOperator::from_rep(2, 2, g).unwrap();
        assert!(map_pairing(&phi, &phi).is_err());
    }

    #[test]
    fn circled_product_unit_and_homomorphism() {
        let model = RandomModel::new(14);
        let mut rng = model.stream(0);
        let d = 3;
        let jid = jamiolkowski(&SuperOperator::identity(d));
        let x = BipartiteOperator::new(d, d, ginibre_matrix(&mut rng, d * d, d * d)).unwrap();
        let prod = circled_product(&jid, &x).unwrap();
        assert!(prod.matrix().approx_eq(x.matrix(), 1e-12));
        let prod2 = circled_product(&x, &jid).unwrap();
        assert!(prod2.matrix().approx_eq(x.matrix(), 1e-12));

        for _ in 0..5 {
            let phi = random_map(&mut rng, d, 2);
            let psi = random_map(&mut rng, d, 2);
            let lhs = jamiolkowski(&phi.compose(&psi).unwrap());
            let rhs = circled_product(&jamiolkowski(&phi), &jamiolkowski(&psi)).unwrap();
            let scale = lhs.matrix().fro_norm().max(1.0);
            assert!(lhs.matrix().sub(rhs.matrix()).unwrap().fro_norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn circled_product_associative() {
        let model = RandomModel::new(15);
        let mut rng = model.stream(0);
        let d = 2;
        let mk = |rng: &mut rand_chacha::ChaCha12Rng| {
            BipartiteOperator::new(d, d, ginibre_matrix(rng, d * d, d * d)).unwrap()
        };
        let a = mk(&mut rng);
        let b = mk(&mut rng);
        let cc = mk(&mut rng);
        let left = circled_product(&circled_product(&a, &b).unwrap(), &cc).unwrap();
        let right = circled_product(&a, &circled_product(&b, &cc).unwrap()).unwrap();
        let scale = left.matrix().fro_norm().max(1.0);
        assert!(left.matrix().sub(right.matrix()).unwrap().fro_norm() <= 1e-10 * scale);
    }

    #[test]
    fn circled_product_of_tensor_factors() {
        // (A1 (x) A2) . (B1 (x) B2) = Tr(A2^T B1) (A1 (x) B2)
        let model = RandomModel::new(16);
        let mut rng = model.stream(0);
        for _ in 0..10 {
            let a1 = ginibre_matrix(&mut rng, 2, 2);
            let a2 = ginibre_matrix(&mut rng, 2, 2);
            let b1 = ginibre_matrix(&mut rng, 2, 2);
            let b2 = ginibre_matrix(&mut rng, 2, 2);
            let a = BipartiteOperator::from_product(&a1, &a2).unwrap();
            let b = BipartiteOperator::from_product(&b1, &b2).unwrap();
            let got = circled_product(&a, &b).unwrap();
            let coeff = a2.transpose().mul(&b1).unwrap().trace();
            let want = BipartiteOperator::from_product(&a1, &b2)
                .unwrap()
                .matrix()
                .scale(coeff);
            assert!(got.matrix().approx_eq(&want, 1e-12));
        }
    }

    #[test]
    fn adjoint_properties() {
        let model = RandomModel::new(17);
        let mut rng = model.stream(0);
        // adjoint of conjugation by U is conjugation by U^dag
        let u = ginibre_matrix(&mut rng, 2, 2);
        let phi = SuperOperator::conjugation(u.clone()).unwrap();
        let adj = phi.adjoint();
        let want = SuperOperator::conjugation(u.dagger()).unwrap();
        assert!(adj.rep().approx_eq(want.rep(), 1e-12));
        // involution
        let psi = random_map(&mut rng, 3, 2);
        assert!(psi.adjoint().adjoint().rep().approx_eq(psi.rep(), 1e-13));
        // adjoint pairing identity (Phi(xi)|zeta) = (xi|Phi*(zeta))
        let xi = ginibre_matrix(&mut rng, 3, 3);
        let zeta = ginibre_matrix(&mut rng, 3, 3);
        let lhs = psi.apply(&xi).unwrap().hs_inner(&zeta).unwrap();
        let rhs = xi.hs_inner(&psi.adjoint().apply(&zeta).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn adjoint_of_trace_preserving_is_unital() {
        // unitary conjugation is trace preserving; its adjoint fixes identity
        let theta = 0.7f64;
        let u = ComplexMatrix::from_fn(2, 2, |r, q| match (r, q) {
            (0, 0) => c(theta.cos(), 0.0),
            (0, 1) => c(-theta.sin(), 0.0),
            (1, 0) => c(theta.sin(), 0.0),
            _ => c(theta.cos(), 0.0),
        });
        let phi = SuperOperator::conjugation(u).unwrap();
        let adj = phi.adjoint();
        let one = ComplexMatrix::identity(2);
        assert!(adj.apply(&one).unwrap().approx_eq(&one, 1e-12));
    }

    #[test]
    fn factor_application_matches_tensor() {
        // (Psi (x) 1) on a product operator acts on the left factor only
        let model = RandomModel::new(18);
        let mut rng = model.stream(0);
        let psi = random_map(&mut rng, 2, 2);
        let x = ginibre_matrix(&mut rng, 2, 2);
        let y = ginibre_matrix(&mut rng, 3, 3);
        let rho = BipartiteOperator::from_product(&x, &y).unwrap();
        let got = apply_to_left_factor(&psi, &rho).unwrap();
        let want = BipartiteOperator::from_product(&psi.apply(&x).unwrap(), &y).unwrap();
        assert!(got.matrix().approx_eq(want.matrix(), 1e-10));
        let got_r = apply_to_right_factor(&psi, &BipartiteOperator::from_product(&y, &x).unwrap())
            .unwrap();
        let want_r = BipartiteOperator::from_product(&y, &psi.apply(&x).unwrap()).unwrap();
        assert!(got_r.matrix().approx_eq(want_r.matrix(), 1e-10));
    }
}
