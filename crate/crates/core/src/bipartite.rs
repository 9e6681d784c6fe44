//! Operators on a tensor product of two factors.
//!
//! Index convention: the left factor is major. An operator on C^dA (x) C^dB
//! is stored with row = alpha*dB + beta and column = gamma*dB + delta, so the
//! matrix element A_{(alpha beta),(gamma delta)} sits at that position.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::{vec_tensor, ComplexMatrix};

/// Which tensor factor an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Left,
    Right,
}

/// Complex square matrix on a bipartite space with recorded factor dimensions.
#[derive(Clone, Debug)]
pub struct BipartiteOperator {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl BipartiteOperator {
    pub fn new(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Result<Self> {
        let side = dim_a * dim_b;
        if mat.rows() != side || mat.cols() != side {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {side}x{side} for dims ({dim_a},{dim_b}), got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    /// Product operator X (x) Y.
    pub fn from_product(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<Self> {
        if !x.is_square() || !y.is_square() {
            return Err(CoreError::DimensionMismatch(
                "product factors must be square".into(),
            ));
        }
        Self::new(x.rows(), y.rows(), x.tensor(y)?)
    }

    pub fn identity(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            mat: ComplexMatrix::identity(dim_a * dim_b),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn side(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.mat
    }

    #[inline]
    pub fn entry(&self, alpha: usize, beta: usize, gamma: usize, delta: usize) -> Complex64 {
        self.mat[(alpha * self.dim_b + beta, gamma * self.dim_b + delta)]
    }

    #[inline]
    pub fn set_entry(
        &mut self,
        alpha: usize,
        beta: usize,
        gamma: usize,
        delta: usize,
        z: Complex64,
    ) {
        let db = self.dim_b;
        self.mat[(alpha * db + beta, gamma * db + delta)] = z;
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(CoreError::DimensionMismatch(format!(
                "({},{}) vs ({},{})",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            mat: self.mat.add(&other.mat)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            mat: self.mat.sub(&other.mat)?,
        })
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            mat: self.mat.scale_re(s),
        }
    }

    /// Trace over the designated factor. Tracing out `Right` leaves a
    /// dim_a x dim_a matrix and vice versa.
    pub fn partial_trace(&self, which: Factor) -> ComplexMatrix {
        match which {
            Factor::Right => ComplexMatrix::from_fn(self.dim_a, self.dim_a, |alpha, gamma| {
                (0..self.dim_b).map(|beta| self.entry(alpha, beta, gamma, beta)).sum()
            }),
            Factor::Left => ComplexMatrix::from_fn(self.dim_b, self.dim_b, |beta, delta| {
                (0..self.dim_a).map(|alpha| self.entry(alpha, beta, alpha, delta)).sum()
            }),
        }
    }

    /// Partial transpose on the designated factor.
    /// For `Right`: ((alpha beta),(gamma delta)) -> ((alpha delta),(gamma beta)).
    pub fn partial_transpose(&self, which: Factor) -> Self {
        let (da, db) = (self.dim_a, self.dim_b);
        let mat = match which {
            Factor::Right => ComplexMatrix::from_fn(da * db, da * db, |row, col| {
                let (alpha, beta) = (row / db, row % db);
                let (gamma, delta) = (col / db, col % db);
                self.entry(alpha, delta, gamma, beta)
            }),
            Factor::Left => ComplexMatrix::from_fn(da * db, da * db, |row, col| {
                let (alpha, beta) = (row / db, row % db);
                let (gamma, delta) = (col / db, col % db);
                self.entry(gamma, beta, alpha, delta)
            }),
        };
        Self {
            dim_a: da,
            dim_b: db,
            mat,
        }
    }

    /// Realignment: output entry ((alpha gamma),(beta delta)) = A_{(alpha beta),(gamma delta)}.
    /// Shape dA^2 x dB^2.
    pub fn realign(&self) -> ComplexMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        ComplexMatrix::from_fn(da * da, db * db, |row, col| {
            let (alpha, gamma) = (row / da, row % da);
            let (beta, delta) = (col / db, col % db);
            self.entry(alpha, beta, gamma, delta)
        })
    }

    /// Inverse of [`Self::realign`]: rebuild the bipartite operator from a
    /// dA^2 x dB^2 realigned matrix.
    pub fn realign_inverse(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if m.rows() != dim_a * dim_a || m.cols() != dim_b * dim_b {
            return Err(CoreError::DimensionMismatch(format!(
                "realigned matrix must be {}x{}, got {}x{}",
                dim_a * dim_a,
                dim_b * dim_b,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = Self::new(dim_a, dim_b, ComplexMatrix::zeros(dim_a * dim_b, dim_a * dim_b))?;
        for alpha in 0..dim_a {
            for gamma in 0..dim_a {
                for beta in 0..dim_b {
                    for delta in 0..dim_b {
                        out.set_entry(
                            alpha,
                            beta,
                            gamma,
                            delta,
                            m[(alpha * dim_a + gamma, beta * dim_b + delta)],
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// Quadratic form <x|A|x>.
    pub fn form(&self, x: &[Complex64]) -> Result<Complex64> {
        let ax = self.mat.mul_vec(x)?;
        Ok(crate::matrix::vec_dot(x, &ax))
    }

    /// Product-vector form <left (x) right | A | left (x) right>.
    pub fn product_form(&self, left: &[Complex64], right: &[Complex64]) -> Result<Complex64> {
        if left.len() != self.dim_a || right.len() != self.dim_b {
            return Err(CoreError::DimensionMismatch(format!(
                "product vector dims ({},{}) vs operator ({},{})",
                left.len(),
                right.len(),
                self.dim_a,
                self.dim_b
            )));
        }
        self.form(&vec_tensor(left, right))
    }

    pub fn herm_deviation(&self) -> f64 {
        self.mat.herm_deviation()
    }
}

/// The unnormalized maximally entangled projector sum_{a,b} |a a><b b| on
/// C^d (x) C^d. Equals d * |psi_+><psi_+|.
pub fn max_entangled_projector(d: usize) -> BipartiteOperator {
    let mut op = BipartiteOperator::new(d, d, ComplexMatrix::zeros(d * d, d * d)).unwrap();
    for a in 0..d {
        for b in 0..d {
            op.set_entry(a, a, b, b, Complex64::new(1.0, 0.0));
        }
    }
    op
}

/// The swap operator on C^d (x) C^d: SWAP |x (x) y> = |y (x) x>.
pub fn swap_operator(d: usize) -> BipartiteOperator {
    let mut op = BipartiteOperator::new(d, d, ComplexMatrix::zeros(d * d, d * d)).unwrap();
    for a in 0..d {
        for b in 0..d {
            op.set_entry(a, b, b, a, Complex64::new(1.0, 0.0));
        }
    }
    op
}
