//! Exact univariate polynomial positivity over the rationals.
//!
//! Sturm sign-variation counts are brittle in floating point, so every
//! polynomial here carries `BigRational` coefficients; doubles are lifted
//! exactly (binary floats are dyadic rationals). Root counting uses the
//! half-open convention (lo, hi]. Also houses the principal-minor-sum
//! coefficients used as an elementary positivity cross-check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::matrix::HermitianOperator;

/// Univariate real polynomial, exact rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    coeffs: Vec<BigRational>,
}

impl RealPolynomial {
    /// Build from ascending coefficients; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// Exact lift of double coefficients (ascending). Rejects non-finite input.
    pub fn from_f64_coeffs(coeffs: &[f64]) -> Result<Self> {
        let mut v = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            let r = BigRational::from_float(c)
                .ok_or_else(|| CoreError::InvalidInput("non-finite polynomial coefficient".into()))?;
            v.push(r);
        }
        Ok(Self::new(v))
    }

    pub fn from_i64_coeffs(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect();
        Self::new(coeffs)
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division: self = q * div + r with deg r < deg div.
    pub fn div_rem(&self, div: &Self) -> Result<(Self, Self)> {
        if div.is_zero() {
            return Err(CoreError::InvalidInput("division by zero polynomial".into()));
        }
        let mut rem = self.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(div.coeffs.len()) + 1];
        let dlead = div.leading().unwrap().clone();
        let ddeg = div.coeffs.len() - 1;
        while !rem.is_zero() && rem.coeffs.len() >= div.coeffs.len() {
            let shift = rem.coeffs.len() - div.coeffs.len();
            let factor = rem.leading().unwrap() / &dlead;
            quot[shift] = factor.clone();
            // rem -= factor * x^shift * div
            for (i, c) in div.coeffs.iter().enumerate() {
                let idx = i + shift;
                let delta = &factor * c;
                rem.coeffs[idx] -= delta;
            }
            // force exact cancellation of the leading term
            rem.coeffs.truncate(ddeg + shift);
            while rem.coeffs.last().map_or(false, |c| c.is_zero()) {
                rem.coeffs.pop();
            }
        }
        Ok((Self::new(quot), rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.make_monic();
        a
    }

    fn make_monic(&mut self) {
        if let Some(l) = self.leading().cloned() {
            if !l.is_one() && !l.is_zero() {
                for c in &mut self.coeffs {
                    *c /= &l;
                }
            }
        }
    }

    /// self / gcd(self, self'): same distinct roots, all simple.
    pub fn square_free_part(&self) -> Self {
        if self.is_zero() || self.coeffs.len() <= 1 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.clone();
        }
        let (q, r) = self.div_rem(&g).expect("gcd divides");
        debug_assert!(r.is_zero());
        q
    }

    fn sign_at(&self, x: &BigRational) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Sturm chain: p, p', then negated Euclidean remainders.
#[derive(Clone, Debug)]
pub struct SturmChain {
    polys: Vec<RealPolynomial>,
}

impl SturmChain {
    pub fn new(p: &RealPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(CoreError::InvalidInput(
                "Sturm chain of the zero polynomial".into(),
            ));
        }
        let mut polys = vec![p.clone()];
        let d = p.derivative();
        if !d.is_zero() {
            polys.push(d);
            loop {
                let len = polys.len();
                let (_, r) = polys[len - 2].div_rem(&polys[len - 1])?;
                if r.is_zero() {
                    break;
                }
                polys.push(r.neg());
            }
        }
        Ok(Self { polys })
    }

    pub fn polys(&self) -> &[RealPolynomial] {
        &self.polys
    }

    /// Sign variations of the chain at x, zeros skipped.
    pub fn variations_at(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut prev: i8 = 0;
        for p in &self.polys {
            let s = p.sign_at(x);
            if s == 0 {
                continue;
            }
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
        count
    }

    /// Number of distinct roots in (lo, hi]. Exact for square-free chains.
    pub fn count_half_open(&self, lo: &BigRational, hi: &BigRational) -> usize {
        let vl = self.variations_at(lo);
        let vh = self.variations_at(hi);
        vl.saturating_sub(vh)
    }
}

/// Standard Sturm chain of `p` (errors on the zero polynomial).
pub fn sturm_chain(p: &RealPolynomial) -> Result<SturmChain> {
    SturmChain::new(p)
}

/// Exact count of distinct real roots of `p` in (lo, hi].
/// The square-free reduction is applied internally.
pub fn count_real_roots(p: &RealPolynomial, lo: &BigRational, hi: &BigRational) -> Result<usize> {
    if lo >= hi {
        return Err(CoreError::InvalidInput("need lo < hi".into()));
    }
    if p.is_zero() {
        return Err(CoreError::InvalidInput(
            "root count of the zero polynomial".into(),
        ));
    }
    if p.degree() == Some(0) {
        return Ok(0);
    }
    let q = p.square_free_part();
    let chain = SturmChain::new(&q)?;
    Ok(chain.count_half_open(lo, hi))
}

/// Find a split point in (a, b) that is not a root of q.
fn non_root_point(q: &RealPolynomial, a: &BigRational, b: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut denom = two.clone();
    loop {
        // walk through a/b-interior points (a + (b-a)*k/denom)
        let step = (b - a) / &denom;
        let mut k = BigRational::one();
        while &(&k * &step) < &(b - a) {
            let m = a + &k * &step;
            if q.sign_at(&m) != 0 {
                return m;
            }
            k += BigRational::one();
        }
        denom *= &two;
    }
}

/// Isolate `count` distinct simple roots of q in (a, b] into disjoint
/// half-open intervals with non-root endpoints (a may be the one exception
/// the caller already handled).
fn isolate(
    chain: &SturmChain,
    q: &RealPolynomial,
    a: &BigRational,
    b: &BigRational,
    count: usize,
    out: &mut Vec<(BigRational, BigRational)>,
) {
    if count == 0 {
        return;
    }
    if count == 1 {
        out.push((a.clone(), b.clone()));
        return;
    }
    let m = non_root_point(q, a, b);
    let left = chain.count_half_open(a, &m);
    isolate(chain, q, a, &m, left, out);
    isolate(chain, q, &m, b, count - left, out);
}

/// True iff p(t) >= 0 for all t in [lo, hi]. Exact: endpoint/midpoint signs,
/// Sturm root counting of the square-free part, and one sign sample inside
/// every maximal root-free segment. Touching (even-multiplicity) roots pass.
pub fn is_nonnegative_on(p: &RealPolynomial, lo: &BigRational, hi: &BigRational) -> Result<bool> {
    if p.is_zero() {
        return Ok(true);
    }
    if lo > hi {
        return Err(CoreError::InvalidInput("need lo <= hi".into()));
    }
    if lo == hi {
        return Ok(!p.eval(lo).is_negative());
    }
    if p.eval(lo).is_negative() || p.eval(hi).is_negative() {
        return Ok(false);
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mid = (lo + hi) / &two;
    if p.eval(&mid).is_negative() {
        return Ok(false);
    }
    if p.degree() == Some(0) {
        return Ok(true);
    }

    let q = p.square_free_part();
    let chain = SturmChain::new(&q)?;
    let root_at_hi = q.sign_at(hi) == 0;
    let root_at_lo = q.sign_at(lo) == 0;
    let mut interior = chain.count_half_open(lo, hi);
    if root_at_hi {
        interior -= 1;
    }

    // Trim the working interval to non-root endpoints while keeping every
    // interior root inside; the trimmed endpoints double as sign samples for
    // the first and last segments.
    let mut samples: Vec<BigRational> = Vec::new();
    let mut left = lo.clone();
    if root_at_lo {
        // find w > lo below the first interior root (or any non-root if none)
        let mut w = (lo + hi) / &two;
        loop {
            w = (lo + &w) / &two;
            if q.sign_at(&w) != 0 && chain.count_half_open(lo, &w) == 0 {
                break;
            }
        }
        samples.push(w.clone());
        left = w;
    }
    let mut right = hi.clone();
    if root_at_hi {
        // find w < hi above every interior root
        let mut w = (lo + hi) / &two;
        loop {
            w = (&w + hi) / &two;
            if q.sign_at(&w) != 0 && chain.count_half_open(&w, hi) == 1 {
                break;
            }
        }
        samples.push(w.clone());
        right = w;
    }
    debug_assert_eq!(chain.count_half_open(&left, &right), interior);

    if interior > 0 {
        let mut intervals = Vec::new();
        isolate(&chain, &q, &left, &right, interior, &mut intervals);
        intervals.sort_by(|x, y| x.0.cmp(&y.0));
        // the right endpoint of each isolating interval but the last lies
        // strictly between consecutive roots
        for (_, b) in intervals.iter().take(interior - 1) {
            samples.push(b.clone());
        }
    }

    for s in &samples {
        if p.eval(s).is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The n principal-minor sums W_1..W_n of a Hermitian operator: W_l is the
/// sum of all l x l principal minors, i.e. the l-th elementary symmetric
/// function of the eigenvalues. H is PSD iff all W_l >= 0.
pub fn minor_sums(h: &HermitianOperator) -> Vec<f64> {
    let n = h.side();
    // power traces p_k = Tr(H^k), then Newton's identities
    let mut power = h.matrix().clone();
    let mut ptraces = vec![0.0f64; n + 1];
    for k in 1..=n {
        ptraces[k] = power.trace().re;
        if k < n {
            power = power.mul(h.matrix()).unwrap();
        }
    }
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for k in 1..=n {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for i in 1..=k {
            acc += sign * e[k - i] * ptraces[i];
            sign = -sign;
        }
        e[k] = acc / k as f64;
    }
    e[1..].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn textbook_chain() {
        // x^2 - 1 -> (x^2-1, 2x, 1)
        let p = RealPolynomial::from_i64_coeffs(&[-1, 0, 1]);
        let chain = sturm_chain(&p).unwrap();
        assert_eq!(chain.polys().len(), 3);
        assert_eq!(chain.polys()[1], RealPolynomial::from_i64_coeffs(&[0, 2]));
        assert_eq!(chain.polys()[2].degree(), Some(0));
        assert!(chain.polys()[2].leading().unwrap().is_positive());
    }

    #[test]
    fn chain_of_x_squared_truncates() {
        let p = RealPolynomial::from_i64_coeffs(&[0, 0, 1]);
        let chain = sturm_chain(&p).unwrap();
        // (x^2, 2x); the zero remainder is dropped
        assert_eq!(chain.polys().len(), 2);
    }

    #[test]
    fn root_counts() {
        let p = RealPolynomial::from_i64_coeffs(&[-1, 0, 1]); // x^2-1
        assert_eq!(count_real_roots(&p, &rat(-2), &rat(2)).unwrap(), 2);
        let q = RealPolynomial::from_i64_coeffs(&[0, -1, 0, 1]); // x^3-x
        assert_eq!(count_real_roots(&q, &rat(0), &rat(2)).unwrap(), 1);
        let r = RealPolynomial::from_i64_coeffs(&[1, 0, 1]); // x^2+1
        assert_eq!(count_real_roots(&r, &rat(-10), &rat(10)).unwrap(), 0);
    }

    #[test]
    fn half_open_convention() {
        let p = RealPolynomial::from_i64_coeffs(&[0, 1]); // x, root at 0
        assert_eq!(count_real_roots(&p, &rat(-1), &rat(0)).unwrap(), 1);
        assert_eq!(count_real_roots(&p, &rat(0), &rat(1)).unwrap(), 0);
    }

    #[test]
    fn repeated_roots_counted_once() {
        // (x-1)^2 (x+2)
        let p = RealPolynomial::from_i64_coeffs(&[2, -3, 0, 1]);
        assert_eq!(count_real_roots(&p, &rat(-10), &rat(10)).unwrap(), 2);
    }

    #[test]
    fn nonnegativity_basics() {
        let x2 = RealPolynomial::from_i64_coeffs(&[0, 0, 1]);
        assert!(is_nonnegative_on(&x2, &rat(-1), &rat(1)).unwrap());
        let x = RealPolynomial::from_i64_coeffs(&[0, 1]);
        assert!(!is_nonnegative_on(&x, &rat(-1), &rat(1)).unwrap());
    }

    #[test]
    fn touching_quartic_vs_dipping_quadratic() {
        // (t^2 - 1/4)^2 >= 0 on [-1,1]; t^2 - 1/4 is not
        let quad = RealPolynomial::new(vec![ratio(-1, 4), rat(0), rat(1)]);
        let quart = quad.mul(&quad);
        assert!(is_nonnegative_on(&quart, &rat(-1), &rat(1)).unwrap());
        assert!(!is_nonnegative_on(&quad, &rat(-1), &rat(1)).unwrap());
    }

    #[test]
    fn negative_interior_with_zero_endpoints() {
        // -(1 - t^2) is 0 at both endpoints, negative inside
        let p = RealPolynomial::from_i64_coeffs(&[-1, 0, 1]);
        assert!(!is_nonnegative_on(&p, &rat(-1), &rat(1)).unwrap());
        let q = p.neg(); // 1 - t^2
        assert!(is_nonnegative_on(&q, &rat(-1), &rat(1)).unwrap());
    }

    #[test]
    fn boundary_roots_allowed() {
        // (t-1)^2 (t+1)^2 touches zero at both ends
        let f = RealPolynomial::from_i64_coeffs(&[1, 0, -2, 0, 1]);
        assert!(is_nonnegative_on(&f, &rat(-1), &rat(1)).unwrap());
    }

    #[test]
    fn dyadic_lift_is_exact() {
        let p = RealPolynomial::from_f64_coeffs(&[0.1, -0.25]).unwrap();
        // 0.25 lifts to exactly 1/4; 0.1 lifts to its binary representation
        assert_eq!(p.coeffs()[1], ratio(-1, 4));
        assert!(p.coeffs()[0] != ratio(1, 10));
    }

    #[test]
    fn minor_sums_basics() {
        let h = HermitianOperator::certify(ComplexMatrix::diag(&[1.0, 2.0])).unwrap();
        let w = minor_sums(&h);
        assert!((w[0] - 3.0).abs() < 1e-12);
        assert!((w[1] - 2.0).abs() < 1e-12);
        let ind = HermitianOperator::certify(ComplexMatrix::diag(&[1.0, -1.0])).unwrap();
        let w2 = minor_sums(&ind);
        assert!(w2[0].abs() < 1e-12);
        assert!((w2[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn minor_sums_match_eigenvalue_symmetric_functions() {
        use crate::rng::{random_hermitian, RandomModel};
        let model = RandomModel::new(11);
        let mut rng = model.stream(0);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4);
            let w = minor_sums(&h);
            let eigs = crate::eig::eig_hermitian(&h).unwrap().eigenvalues;
            // elementary symmetric polynomials of the eigenvalues
            let mut e = [0.0f64; 5];
            e[0] = 1.0;
            for &lam in &eigs {
                for k in (1..=4).rev() {
                    e[k] += lam * e[k - 1];
                }
            }
            for l in 1..=4 {
                assert!(
                    (w[l - 1] - e[l]).abs() <= 1e-8 * (1.0 + e[l].abs()),
                    "l={l}: {} vs {}",
                    w[l - 1],
                    e[l]
                );
            }
        }
    }

    #[test]
    fn random_sturm_counts_match_eigen_oracle() {
        // degree-6 polynomials with known integer roots
        use crate::matrix::ComplexMatrix;
        let roots: [i64; 6] = [-7, -3, -1, 2, 5, 9];
        let mut p = RealPolynomial::from_i64_coeffs(&[1]);
        for &r in &roots {
            p = p.mul(&RealPolynomial::from_i64_coeffs(&[-r, 1]));
        }
        let inside = roots.iter().filter(|&&r| -6 < r && r <= 6).count();
        assert_eq!(count_real_roots(&p, &rat(-6), &rat(6)).unwrap(), inside);
        // companion-matrix oracle
        let n = p.degree().unwrap();
        let lead = p.coeffs()[n].clone();
        let mut comp = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            let c = &p.coeffs()[i] / &lead;
            let val = c.numer().to_string().parse::<f64>().unwrap()
                / c.denom().to_string().parse::<f64>().unwrap();
            comp[(i, n - 1)] = num_complex::Complex64::new(-val, 0.0);
            if i + 1 < n {
                comp[(i + 1, i)] = num_complex::Complex64::new(1.0, 0.0);
            }
        }
        let eigs = crate::eig::eigenvalues_general(&comp).unwrap();
        let oracle = eigs
            .iter()
            .filter(|z| z.im.abs() < 1e-6 && z.re > -6.0 && z.re <= 6.0)
            .count();
        assert_eq!(oracle, inside);
    }
}
