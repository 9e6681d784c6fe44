//! Exact block-positivity decision for the tridiagonal three-parameter
//! family on C^2 (x) C^2 with diagonal 1/2 and superdiagonal (a, b, c).
//!
//! Block positivity of A(a,b,c) is equivalent to
//!
//!   f(phi) = 1 - |alpha + gamma cos(phi)| - |b| sin(phi) >= 0  for all phi,
//!
//! with alpha = a + c, gamma = a - c (sin(phi) >= 0 suffices). Closed forms
//! cover the cases |a| = |c| and a = r c (r real); the general decision
//! substitutes t = cos(phi) and reduces to three polynomial nonnegativity
//! conditions on [-1, 1], each decided exactly by Sturm sequences over
//! rationals lifted from the double coefficients:
//!
//!   s(t) = |alpha|^2 + 2 Re(conj(alpha) gamma) t + |gamma|^2 t^2,
//!   h(t) = 1 + s(t) - |b|^2 (1 - t^2),
//!   f >= 0 on [0, pi]  <=>  s <= 1  and  h >= 0  and  h^2 >= 4 s  on [-1, 1].
//!
//! The double-squaring is exact under the recorded side conditions: given
//! s <= 1, f >= 0 <=> 1 - sqrt(s) >= |b| sqrt(1-t^2) <=> h >= 2 sqrt(s).

use num_complex::Complex64;

use crate::bipartite::BipartiteOperator;
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::polypos::{is_nonnegative_on, RealPolynomial};

/// Tolerance for the closed-form case preconditions.
pub const CASE_TOL: f64 = 1e-12;

/// Parameters (a, b, c) of the family; alpha and gamma are always derived.
#[derive(Clone, Copy, Debug)]
pub struct AbcParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl AbcParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    pub fn from_re(a: f64, b: f64, c: f64) -> Self {
        Self::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
        )
    }

    pub fn alpha(&self) -> Complex64 {
        self.a + self.c
    }

    pub fn gamma(&self) -> Complex64 {
        self.a - self.c
    }

    /// Case a) precondition: |a| = |c| (within CASE_TOL), i.e.
    /// Re(alpha conj(gamma)) = 0.
    pub fn is_case_a(&self) -> bool {
        (self.a.norm() - self.c.norm()).abs() <= CASE_TOL
    }

    /// Case b) precondition: a = r c for real r (including c = 0), i.e.
    /// a conj(c) real, making alpha and gamma phase-aligned.
    pub fn is_case_b(&self) -> bool {
        (self.a * self.c.conj()).im.abs() <= CASE_TOL * (1.0 + self.a.norm() * self.c.norm())
    }
}

/// The 4x4 tridiagonal Hermitian matrix with diagonal 1/2 and superdiagonal
/// (a, b, c), as an operator on C^2 (x) C^2.
///
/// Note on blocks: with the left-factor-major index convention used
/// throughout, the 2x2 family block displayed in the derivation arises from
/// contracting the LEFT factor, i.e. from `block_check`.
pub fn build_abc(p: &AbcParams) -> BipartiteOperator {
    let mut m = ComplexMatrix::zeros(4, 4);
    for i in 0..4 {
        m[(i, i)] = Complex64::new(0.5, 0.0);
    }
    let sup = [p.a, p.b, p.c];
    for (i, &z) in sup.iter().enumerate() {
        m[(i, i + 1)] = z;
        m[(i + 1, i)] = z.conj();
    }
    BipartiteOperator::new(2, 2, m).unwrap()
}

/// Closed form for case a) (|a| = |c|): with A = |alpha|, G = |gamma|,
/// B = |b| the condition is A^2 + G^2 <= 1 together with
/// Q(lambda) = (G^2+B^2) lambda^2 - 2 G^2 lambda + (G^2 - B^2 (A^2+G^2)) >= 0
/// on [A, sqrt(A^2+G^2)], solved by clamping the vertex:
///   - G = 0: A + B <= 1,
///   - vertex left of the interval: A + B <= 1,
///   - vertex right of the interval: always satisfied,
///   - vertex interior: G^2 >= (A^2+G^2)(G^2+B^2).
pub fn decide_case_a(p: &AbcParams) -> Result<bool> {
    if !p.is_case_a() {
        return Err(crate::error::CoreError::InvalidInput(
            "case a requires |a| = |c|".into(),
        ));
    }
    let a = p.alpha().norm();
    let g = p.gamma().norm();
    let b = p.b.norm();
    let s2 = a * a + g * g;
    if s2 > 1.0 + CASE_TOL {
        return Ok(false);
    }
    if g == 0.0 || b == 0.0 {
        // f reduces to 1 - A - B sin(phi) resp. 1 - sqrt(A^2+G^2 cos^2)
        return Ok(if g == 0.0 { a + b <= 1.0 + CASE_TOL } else { true });
    }
    let vertex = g * g / (g * g + b * b);
    let s = s2.sqrt();
    if vertex <= a {
        Ok(a + b <= 1.0 + CASE_TOL)
    } else if vertex >= s {
        Ok(true)
    } else {
        Ok(g * g + CASE_TOL >= s2 * (g * g + b * b))
    }
}

/// Closed form for case b) (a = r c, r real): 1 - |alpha| - sqrt(|gamma|^2 + |b|^2) >= 0.
pub fn decide_case_b(p: &AbcParams) -> Result<bool> {
    if !p.is_case_b() {
        return Err(crate::error::CoreError::InvalidInput(
            "case b requires a = r c with real r".into(),
        ));
    }
    let a = p.alpha().norm();
    let g = p.gamma().norm();
    let b = p.b.norm();
    Ok(1.0 - a - (g * g + b * b).sqrt() >= -CASE_TOL)
}

/// Exact general decision via Sturm nonnegativity of the three reduced
/// polynomials on [-1, 1].
pub fn decide_general(p: &AbcParams) -> Result<bool> {
    let alpha = p.alpha();
    let gamma = p.gamma();
    let s0 = alpha.norm_sqr();
    let s1 = 2.0 * (alpha.conj() * gamma).re;
    let s2 = gamma.norm_sqr();
    let b2 = p.b.norm_sqr();

    let s = RealPolynomial::from_f64_coeffs(&[s0, s1, s2])?;
    let one_minus_s = RealPolynomial::from_f64_coeffs(&[1.0 - s0, -s1, -s2])?;
    let h = RealPolynomial::from_f64_coeffs(&[1.0 + s0 - b2, s1, s2 + b2])?;

    let lo = num_rational::BigRational::from_integer((-1).into());
    let hi = num_rational::BigRational::from_integer(1.into());

    if !is_nonnegative_on(&one_minus_s, &lo, &hi)? {
        return Ok(false);
    }
    if !is_nonnegative_on(&h, &lo, &hi)? {
        return Ok(false);
    }
    let quartic = h.mul(&h).sub(&s.mul(&RealPolynomial::from_i64_coeffs(&[4])));
    is_nonnegative_on(&quartic, &lo, &hi)
}

/// Case-dispatched decision: closed forms when their preconditions hold
/// within CASE_TOL, the Sturm path otherwise.
pub fn decide(p: &AbcParams) -> Result<bool> {
    if p.is_case_a() {
        decide_case_a(p)
    } else if p.is_case_b() {
        decide_case_b(p)
    } else {
        decide_general(p)
    }
}

/// For a rejected instance, build a product vector with strictly negative
/// form value: scan phi for the most negative f(phi), convert to the
/// contraction vector (cos(phi/2), sin(phi/2) e^{i chi}) with the phase chi
/// aligning the two off-diagonal contributions, and take the minimal
/// eigenvector of the resulting block.
pub fn refuting_product_vector(
    p: &AbcParams,
    grid: usize,
) -> Result<Option<(Vec<Complex64>, Vec<Complex64>, f64)>> {
    let alpha = p.alpha();
    let gamma = p.gamma();
    let babs = p.b.norm();
    let mut best = (0.0f64, f64::INFINITY);
    for i in 0..=grid {
        let phi = std::f64::consts::PI * i as f64 / grid as f64;
        let val = 1.0 - (alpha + gamma * phi.cos()).norm() - babs * phi.sin();
        if val < best.1 {
            best = (phi, val);
        }
    }
    if best.1 >= 0.0 {
        return Ok(None);
    }
    let phi = best.0;
    // left-factor contraction vector reproducing the family block
    let half = phi / 2.0;
    let off_main = (alpha + gamma * phi.cos()) * 0.5;
    // phase of the b-term contribution: conj(b) * u0 * conj(u1) e^{-i chi}
    let chi = if p.b.norm() > 0.0 {
        (off_main / off_main.norm().max(1e-300)).arg() - p.b.conj().arg()
    } else {
        0.0
    };
    let upsilon = vec![
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), -chi),
    ];
    let a_op = build_abc(p);
    let block = crate::witness::block_check(&a_op, &upsilon)?;
    let eig = crate::eig::eig_hermitian(&block)?;
    let u = eig.eigenvector(eig.eigenvalues.len() - 1);
    let value = a_op.product_form(&upsilon, &u)?.re;
    Ok(Some((upsilon, u, value)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomModel;
    use rand::Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: dense phi grid on [0, pi].
    fn grid_min(p: &AbcParams, n: usize) -> f64 {
        let alpha = p.alpha();
        let gamma = p.gamma();
        let b = p.b.norm();
        let mut min = f64::INFINITY;
        for i in 0..=n {
            let phi = std::f64::consts::PI * i as f64 / n as f64;
            let v = 1.0 - (alpha + gamma * phi.cos()).norm() - b * phi.sin();
            if v < min {
                min = v;
            }
        }
        min
    }

    fn random_complex(rng: &mut impl Rng) -> Complex64 {
        // uniform in the unit disc via rejection
        loop {
            let re = 2.0 * rng.gen::<f64>() - 1.0;
            let im = 2.0 * rng.gen::<f64>() - 1.0;
            if re * re + im * im <= 1.0 {
                return c64(re, im);
            }
        }
    }

    #[test]
    fn build_matches_layout() {
        let p = AbcParams::from_re(0.5, 0.0, 0.0);
        let a = build_abc(&p);
        assert!((a.matrix()[(0, 1)] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((a.matrix()[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(a.herm_deviation(), 0.0);
        let zero = AbcParams::from_re(0.0, 0.0, 0.0);
        let half_id = build_abc(&zero);
        assert!(half_id
            .matrix()
            .approx_eq(&ComplexMatrix::identity(4).scale_re(0.5), 0.0));
    }

    #[test]
    fn family_block_reproduces_derivation() {
        // contracting the left factor with (u0, u1) gives
        // [[ (|u0|^2+|u1|^2)/2, a|u0|^2 + c|u1|^2 + conj(b) u0 conj(u1) ], [conj, .]]
        let p = AbcParams::new(c64(0.21, 0.11), c64(-0.3, 0.42), c64(0.05, -0.3));
        let a = build_abc(&p);
        let u = vec![c64(0.6, -0.2), c64(0.4, 0.7)];
        let block = crate::witness::block_check(&a, &u).unwrap();
        let n2 = u[0].norm_sqr() + u[1].norm_sqr();
        let want01 =
            p.a * u[0].norm_sqr() + p.c * u[1].norm_sqr() + p.b.conj() * u[0] * u[1].conj();
        assert!((block.matrix()[(0, 0)] - c64(0.5 * n2, 0.0)).norm() < 1e-12);
        assert!((block.matrix()[(0, 1)] - want01).norm() < 1e-12);
        // with u = (1, 0) this is [[1/2, a], [conj a, 1/2]]
        let b10 = crate::witness::block_check(&a, &[c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!((b10.matrix()[(0, 1)] - p.a).norm() < 1e-15);
    }

    #[test]
    fn case_a_examples() {
        // a = c = 1/4, b = 0: block positive
        assert!(decide_case_a(&AbcParams::from_re(0.25, 0.0, 0.25)).unwrap());
        // a = c = 0.6: |alpha|^2 = 1.44 > 1
        assert!(!decide_case_a(&AbcParams::from_re(0.6, 0.0, 0.6)).unwrap());
        // a = c = 0: true iff |b| <= 1
        assert!(decide_case_a(&AbcParams::from_re(0.0, 1.0, 0.0)).unwrap());
        assert!(!decide_case_a(&AbcParams::from_re(0.0, 1.0 + 1e-6, 0.0)).unwrap());
        // precondition violation rejected
        assert!(decide_case_a(&AbcParams::from_re(0.5, 0.0, 0.1)).is_err());
    }

    #[test]
    fn case_a_matches_grid_oracle() {
        let model = RandomModel::new(51);
        let mut rng = model.stream(0);
        let mut checked = 0usize;
        for _ in 0..400 {
            let a = random_complex(&mut rng) * 0.9;
            let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let c = a * Complex64::from_polar(1.0, phase);
            let b = random_complex(&mut rng);
            let p = AbcParams::new(a, b, c);
            let min = grid_min(&p, 100_000);
            if min.abs() <= 1e-6 {
                continue; // margin filter near the boundary
            }
            checked += 1;
            assert_eq!(
                decide_case_a(&p).unwrap(),
                min > 0.0,
                "mismatch at {p:?}, grid min {min}"
            );
        }
        assert!(checked > 300);
    }

    #[test]
    fn case_b_examples() {
        // boundary: 1 - 0.5 - 0.5 = 0
        assert!(decide_case_b(&AbcParams::from_re(0.25, 0.5, 0.25)).unwrap());
        assert!(decide_case_b(&AbcParams::from_re(0.5, 0.0, 0.0)).unwrap());
        assert!(!decide_case_b(&AbcParams::from_re(0.6, 0.0, 0.0)).unwrap());
        assert!(decide_case_b(&AbcParams::new(
            c64(0.0, 0.2),
            c64(0.3, 0.1),
            c64(0.0, 0.1)
        ))
        .unwrap());
    }

    #[test]
    fn case_b_matches_grid_oracle() {
        let model = RandomModel::new(52);
        let mut rng = model.stream(0);
        let mut checked = 0usize;
        for _ in 0..400 {
            let c = random_complex(&mut rng);
            let r = 2.0 * rng.gen::<f64>() - 1.0;
            let a = c * r;
            let b = random_complex(&mut rng);
            let p = AbcParams::new(a, b, c);
            let min = grid_min(&p, 100_000);
            if min.abs() <= 1e-6 {
                continue;
            }
            checked += 1;
            assert_eq!(
                decide_case_b(&p).unwrap(),
                min > 0.0,
                "mismatch at {p:?}, grid min {min}"
            );
        }
        assert!(checked > 300);
    }

    #[test]
    fn general_agrees_with_cases_and_oracle() {
        let model = RandomModel::new(53);
        let mut rng = model.stream(0);
        for _ in 0..150 {
            let a = random_complex(&mut rng);
            let b = random_complex(&mut rng);
            let c = random_complex(&mut rng);
            let p = AbcParams::new(a, b, c);
            let min = grid_min(&p, 100_000);
            if min.abs() <= 1e-6 {
                continue;
            }
            assert_eq!(decide_general(&p).unwrap(), min > 0.0, "at {p:?} min {min}");
        }
        // agreement with the closed forms on their domains
        for _ in 0..150 {
            let a = random_complex(&mut rng) * 0.8;
            let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let ca = a * Complex64::from_polar(1.0, phase);
            let b = random_complex(&mut rng);
            let pa = AbcParams::new(a, b, ca);
            assert_eq!(decide_general(&pa).unwrap(), decide_case_a(&pa).unwrap(), "{pa:?}");
            let cb = random_complex(&mut rng);
            let r = 2.0 * rng.gen::<f64>() - 1.0;
            let pb = AbcParams::new(cb * r, b, cb);
            assert_eq!(decide_general(&pb).unwrap(), decide_case_b(&pb).unwrap(), "{pb:?}");
        }
    }

    #[test]
    fn overlap_of_cases_agrees() {
        // a = +-c lies in both case domains; the closed forms must agree
        let model = RandomModel::new(54);
        let mut rng = model.stream(0);
        for _ in 0..200 {
            let a = random_complex(&mut rng) * 0.9;
            let b = random_complex(&mut rng);
            for c in [a, -a] {
                let p = AbcParams::new(a, b, c);
                assert!(p.is_case_a() && p.is_case_b());
                let min = grid_min(&p, 20_000);
                if min.abs() <= 1e-5 {
                    continue;
                }
                assert_eq!(
                    decide_case_a(&p).unwrap(),
                    decide_case_b(&p).unwrap(),
                    "overlap mismatch at {p:?}"
                );
            }
        }
    }

    #[test]
    fn boundary_instances() {
        assert!(decide(&AbcParams::from_re(0.0, 1.0, 0.0)).unwrap());
        assert!(!decide(&AbcParams::from_re(0.0, 1.0 + 1e-6, 0.0)).unwrap());
        // PSD instances are block positive: A(0,0,0) = I/2 scaled family
        assert!(decide(&AbcParams::from_re(0.0, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn psd_instances_are_accepted() {
        // positivity (k=2 block positivity) implies the k=1 decision
        let model = RandomModel::new(55);
        let mut rng = model.stream(0);
        let mut found = 0usize;
        for _ in 0..400 {
            let p = AbcParams::new(
                random_complex(&mut rng) * 0.4,
                random_complex(&mut rng) * 0.4,
                random_complex(&mut rng) * 0.4,
            );
            let a = build_abc(&p);
            let h = crate::matrix::HermitianOperator::certify(a.matrix().clone()).unwrap();
            if crate::eig::is_psd(&h, 1e-12).unwrap() {
                found += 1;
                assert!(decide_general(&p).unwrap(), "PSD instance rejected: {p:?}");
            }
        }
        assert!(found > 50, "only {found} PSD instances sampled");
    }

    #[test]
    fn scaling_monotonicity() {
        let model = RandomModel::new(56);
        let mut rng = model.stream(0);
        for _ in 0..60 {
            let p = AbcParams::new(
                random_complex(&mut rng),
                random_complex(&mut rng),
                random_complex(&mut rng),
            );
            if decide_general(&p).unwrap() {
                for s in [0.75, 0.5, 0.25] {
                    let q = AbcParams::new(p.a * s, p.b * s, p.c * s);
                    assert!(decide_general(&q).unwrap(), "scaling broke at {q:?}");
                }
            }
        }
    }

    #[test]
    fn accepted_instances_survive_sampled_test() {
        let model = RandomModel::new(57);
        let mut rng = model.stream(0);
        let mut accepted = 0usize;
        while accepted < 10 {
            let p = AbcParams::new(
                random_complex(&mut rng) * 0.7,
                random_complex(&mut rng) * 0.7,
                random_complex(&mut rng) * 0.7,
            );
            if !decide_general(&p).unwrap() {
                continue;
            }
            accepted += 1;
            let a = build_abc(&p);
            let rep =
                crate::cones::is_k_block_positive_sampled(&a, 1, 500, &RandomModel::new(accepted as u64))
                    .unwrap();
            assert_eq!(rep.verdict, crate::report::Verdict::Passed, "{p:?}");
        }
    }

    #[test]
    fn accepted_instances_are_nonnegative_on_separable_states() {
        let model = RandomModel::new(59);
        let mut rng = model.stream(0);
        let mut accepted = 0usize;
        while accepted < 8 {
            let p = AbcParams::new(
                random_complex(&mut rng) * 0.6,
                random_complex(&mut rng) * 0.6,
                random_complex(&mut rng) * 0.6,
            );
            if !decide_general(&p).unwrap() {
                continue;
            }
            accepted += 1;
            let a = build_abc(&p);
            for _ in 0..30 {
                let u = crate::rng::ginibre_vector(&mut rng, 2);
                let v = crate::rng::ginibre_vector(&mut rng, 2);
                let st = crate::cones::k_entangled_from_vectors(&[vec![(u, v)]], &[1.0]).unwrap();
                let val = crate::witness::witness_value(&a, st.operator()).unwrap();
                let scale = st.operator().matrix().max_norm().max(1.0);
                assert!(val >= -1e-10 * scale, "witness value {val} at {p:?}");
            }
        }
    }

    #[test]
    fn rejected_instances_yield_negative_product_vectors() {
        let model = RandomModel::new(58);
        let mut rng = model.stream(0);
        let mut rejected = 0usize;
        while rejected < 10 {
            let p = AbcParams::new(
                random_complex(&mut rng),
                random_complex(&mut rng),
                random_complex(&mut rng),
            );
            if decide_general(&p).unwrap() {
                continue;
            }
            rejected += 1;
            let cert = refuting_product_vector(&p, 20_000).unwrap();
            let (ups, u, value) = cert.expect("rejected instance must yield a certificate");
            assert!(value < 0.0, "certificate value {value} at {p:?}");
            let a = build_abc(&p);
            let recomputed = a.product_form(&ups, &u).unwrap().re;
            assert!((recomputed - value).abs() <= 1e-10 * value.abs().max(1.0));
        }
    }
}
