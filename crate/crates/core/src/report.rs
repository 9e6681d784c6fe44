//! Verdict/certificate structures shared by the necessary tests and the
//! exact deciders. A `Passed` verdict from a necessary test is explicitly
//! non-conclusive; refutations and factorizations always carry a certificate
//! that the producing operation can re-verify.

use num_complex::Complex64;

/// Outcome vocabulary used across all tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Necessary test found no violation (NOT a proof of membership).
    Passed,
    /// A violation was found; see the certificate.
    Refuted,
    /// A sought decomposition exists; see the certificate.
    Feasible,
    /// No decomposition exists (exhaustive case analysis).
    Infeasible,
    /// Caps reached without a decision.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Passed => "pass",
            Verdict::Refuted => "refuted",
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Evidence attached to a verdict.
#[derive(Clone, Debug)]
pub enum Certificate {
    /// A single vector witnessing a negative quadratic form value.
    Vector { vector: Vec<Complex64>, value: f64 },
    /// A product vector pair (left, right) achieving `value`.
    ProductVector {
        left: Vec<Complex64>,
        right: Vec<Complex64>,
        value: f64,
    },
    /// An eigenvector with a negative eigenvalue, with the index of the map
    /// or block that produced it.
    Eigenpair {
        eigenvalue: f64,
        eigenvector: Vec<Complex64>,
        source_index: usize,
    },
    /// Basis quadruple (alpha, beta, mu, nu) violating an inequality.
    Quadruple {
        indices: [usize; 4],
        lhs: f64,
        rhs: f64,
    },
    /// Entrywise-nonnegative factorization M = sum_i alpha_i beta_i^T.
    NonnegFactorization {
        left: Vec<Vec<f64>>,
        right: Vec<Vec<f64>>,
        residual: f64,
    },
    /// Exhaustive support-pattern analysis: every admissible pattern failed.
    PatternExhaustion {
        patterns_tried: usize,
        rectangles: usize,
        reason: String,
    },
    /// PSD factor B certifying a sum-of-squares decomposition.
    SosFactor { b: Vec<Vec<f64>>, residual: f64 },
    /// Scalar evidence (trace values, minimal eigenvalues, ...).
    Scalar { name: String, value: f64 },
}

/// Parameters a test ran with, for reproducibility.
#[derive(Clone, Copy, Debug, Default)]
pub struct TestParams {
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
}

/// Verdict + certificate + parameters for one test run.
#[derive(Clone, Debug)]
pub struct TestReport {
    pub test: &'static str,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    pub params: TestParams,
    /// Headline numeric result (min eigenvalue, min form value, length, ...).
    pub value: Option<f64>,
}

impl TestReport {
    pub fn new(test: &'static str, verdict: Verdict) -> Self {
        Self {
            test,
            verdict,
            certificate: None,
            params: TestParams::default(),
            value: None,
        }
    }

    pub fn with_certificate(mut self, c: Certificate) -> Self {
        self.certificate = Some(c);
        self
    }

    pub fn with_params(mut self, params: TestParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn is_refutation(&self) -> bool {
        matches!(self.verdict, Verdict::Refuted)
    }
}
