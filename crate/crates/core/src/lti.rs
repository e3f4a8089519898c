//! System representations and conversions: continuous, discrete, and
//! per-sample time-varying state space, rational transfer functions, and
//! sampling-rate validation.
//!
//! Discretization is exact under zero-order hold. Recovery of a continuous
//! system from a discrete one (`d2c`) is the inverse map and is only unique
//! when the sampling rate respects the aliasing bound ts ≤ π/ω_max, where
//! ω_max is the largest imaginary part among the eigenvalues of A.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matfun::{self, Matrix};

/// Continuous-time LTI system ẋ = Ax + Bu, y = Cx + Du.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStateSpace {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

/// Discrete-time system x_{k+1} = A_d x_k + B_d u_k, y_k = C x_k + D u_k,
/// at a fixed timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace {
    a_d: Matrix,
    b_d: Matrix,
    c: Matrix,
    d: Matrix,
    dt: f64,
}

/// System whose (A_k, B_k) change sample to sample while C and D stay fixed.
/// Each pair is constant within its own sample interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingStateSpace {
    pairs: Vec<(Matrix, Matrix)>,
    c: Matrix,
    d: Matrix,
}

/// Nominal sampling time together with the fastest oscillatory mode of the
/// system it is meant to sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub ts: f64,
    pub omega_max: f64,
}

/// SISO rational transfer function, coefficients in descending powers of s.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransferFunction {
    num: Vec<f64>,
    den: Vec<f64>,
}

fn check_matrix(m: &Matrix, name: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::DimensionMismatch {
            context: format!("matrix {name} is empty"),
        });
    }
    matfun::check_finite(m, name)
}

impl ContinuousStateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        check_matrix(&a, "A")?;
        check_matrix(&b, "B")?;
        check_matrix(&c, "C")?;
        check_matrix(&d, "D")?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: format!("A must be square, got {}x{}", a.nrows(), a.ncols()),
            });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: format!("B has {} rows, expected {}", b.nrows(), n),
            });
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: format!("C has {} columns, expected {}", c.ncols(), n),
            });
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "D must be {}x{} to match C and B, got {}x{}",
                    c.nrows(),
                    b.ncols(),
                    d.nrows(),
                    d.ncols()
                ),
            });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }
    pub fn is_siso(&self) -> bool {
        self.n_inputs() == 1 && self.n_outputs() == 1
    }

    /// Largest |Im λ| over the eigenvalues of A, the fastest oscillatory
    /// mode and hence the quantity the sampling bound is stated against.
    pub fn omega_max(&self) -> f64 {
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|l| l.im.abs())
            .fold(0.0, f64::max)
    }
}

impl DiscreteStateSpace {
    pub fn new(a_d: Matrix, b_d: Matrix, c: Matrix, d: Matrix, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::NonPositiveTimestep { dt });
        }
        // reuse the continuous validator for the shared dimension rules
        let proto = ContinuousStateSpace::new(a_d, b_d, c, d)?;
        Ok(Self {
            a_d: proto.a,
            b_d: proto.b,
            c: proto.c,
            d: proto.d,
            dt,
        })
    }

    pub fn a_d(&self) -> &Matrix {
        &self.a_d
    }
    pub fn b_d(&self) -> &Matrix {
        &self.b_d
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn n_states(&self) -> usize {
        self.a_d.nrows()
    }
}

impl TimeVaryingStateSpace {
    pub fn new(pairs: Vec<(Matrix, Matrix)>, c: Matrix, d: Matrix) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "time-varying system needs at least one (A, B) pair".to_string(),
            });
        }
        for (k, (a_k, b_k)) in pairs.iter().enumerate() {
            let proto = ContinuousStateSpace::new(
                a_k.clone(),
                b_k.clone(),
                c.clone(),
                d.clone(),
            );
            if let Err(e) = proto {
                return Err(Error::DimensionMismatch {
                    context: format!("sample {k}: {e}"),
                });
            }
        }
        Ok(Self { pairs, c, d })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
    pub fn pair(&self, k: usize) -> (&Matrix, &Matrix) {
        (&self.pairs[k].0, &self.pairs[k].1)
    }
    pub fn pairs(&self) -> &[(Matrix, Matrix)] {
        &self.pairs
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }
}

impl SamplingSpec {
    /// ts ≤ π/ω_max, with ω_max = 0 compliant by convention (no
    /// oscillatory modes means nothing can alias).
    pub fn is_compliant(&self) -> bool {
        self.omega_max == 0.0 || self.ts <= PI / self.omega_max
    }

    /// Within 1% of the aliasing bound. Recovery still works here in exact
    /// arithmetic but round-off can flip an eigenvalue across the branch
    /// cut, so callers should surface this.
    pub fn is_boundary_fragile(&self) -> bool {
        self.omega_max > 0.0 && self.ts >= 0.99 * PI / self.omega_max
    }
}

impl RationalTransferFunction {
    /// Leading exact-zero numerator coefficients are trimmed; the trimmed
    /// numerator degree must not exceed the denominator degree (proper).
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "transfer function coefficients".to_string(),
            });
        }
        let mut num = num;
        while num.len() > 1 && num[0] == 0.0 {
            num.remove(0);
        }
        if den.is_empty() || num.is_empty() {
            return Err(Error::InvalidTransferFunction {
                context: "empty coefficient list".to_string(),
            });
        }
        if den[0] == 0.0 {
            return Err(Error::InvalidTransferFunction {
                context: "leading denominator coefficient is zero".to_string(),
            });
        }
        if num.len() > den.len() {
            return Err(Error::InvalidTransferFunction {
                context: format!(
                    "improper: numerator degree {} exceeds denominator degree {}",
                    num.len() - 1,
                    den.len() - 1
                ),
            });
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }
    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Same function with the denominator scaled to leading coefficient 1.
    pub fn monic(&self) -> Self {
        let lead = self.den[0];
        Self {
            num: self.num.iter().map(|c| c / lead).collect(),
            den: self.den.iter().map(|c| c / lead).collect(),
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    /// H(0). Infinite when the denominator has a root at the origin.
    pub fn dc_gain(&self) -> f64 {
        self.num.last().unwrap() / self.den.last().unwrap()
    }
}

fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn format_poly(coeffs: &[f64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let deg = coeffs.len() - 1;
    let mut first = true;
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 && coeffs.len() > 1 {
            continue;
        }
        let p = deg - i;
        if first {
            if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
        } else if c < 0.0 {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mag = c.abs();
        if (mag - 1.0).abs() > 1e-15 || p == 0 {
            write!(f, "{mag}")?;
            if p > 0 {
                write!(f, " ")?;
            }
        }
        if p == 1 {
            write!(f, "s")?;
        } else if p > 1 {
            write!(f, "s^{p}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for RationalTransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        format_poly(&self.num, f)?;
        write!(f, ") / (")?;
        format_poly(&self.den, f)?;
        write!(f, ")")
    }
}

/// Exact zero-order-hold discretization at timestep `dt`. C and D carry
/// over unchanged; only the state dynamics and input coupling discretize.
pub fn c2d(sys: &ContinuousStateSpace, dt: f64) -> Result<DiscreteStateSpace> {
    let (a_d, b_d) = matfun::discretize_pair(sys.a(), sys.b(), dt)?;
    DiscreteStateSpace::new(a_d, b_d, sys.c().clone(), sys.d().clone(), dt)
}

/// Inverse of `c2d`: A = log(A_d)/dt on the principal branch, then B from
/// a linear solve against Φ = ∫_0^dt e^{Aτ}dτ.
///
/// The result is the unique continuous system only when the original
/// satisfied the sampling bound. An eigenvalue whose recovered |Im λ|·dt
/// lands on the branch boundary π (within a 1e-9 relative band) is
/// rejected as `AliasingRisk`; anything strictly inside comes back as the
/// principal-branch representative, which for an undersampled system is
/// the aliased pole, not the original one.
pub fn d2c(dsys: &DiscreteStateSpace) -> Result<ContinuousStateSpace> {
    let (a, b) = recover_continuous_pair(dsys.a_d(), dsys.b_d(), dsys.dt())?;
    ContinuousStateSpace::new(a, b, dsys.c().clone(), dsys.d().clone())
}

/// The (A, B) part of `d2c`, shared with the data-driven recovery path.
pub(crate) fn recover_continuous_pair(
    a_d: &Matrix,
    b_d: &Matrix,
    dt: f64,
) -> Result<(Matrix, Matrix)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositiveTimestep { dt });
    }
    if b_d.nrows() != a_d.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "recovery: B_d has {} rows, expected {}",
                b_d.nrows(),
                a_d.nrows()
            ),
        });
    }
    let log_ad = matfun::logm_principal(a_d)?;
    let a = &log_ad / dt;

    for lambda in log_ad.complex_eigenvalues().iter() {
        // eigenvalues of log(A_d) are dt·λ_continuous, so Im here is
        // already the |Im λ|·dt product the boundary is stated against
        let product = lambda.im.abs();
        if product >= PI * (1.0 - 1e-9) {
            return Err(Error::AliasingRisk {
                eigenvalue: lambda / dt,
                product,
            });
        }
    }

    let phi = matfun::integral_expm(&a, dt)?;
    let cond = one_norm_condition(&phi);
    if !cond.is_finite() || cond >= 1e12 {
        return Err(Error::IllConditionedIntegral { cond });
    }
    let b = phi.lu().solve(b_d).ok_or_else(|| Error::SolveFailed {
        context: "input-matrix recovery solve".to_string(),
    })?;
    Ok((a, b))
}

fn one_norm_condition(m: &Matrix) -> f64 {
    match m.clone().try_inverse() {
        Some(inv) => one_norm_public(m) * one_norm_public(&inv),
        None => f64::INFINITY,
    }
}

fn one_norm_public(m: &Matrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// C adj(sI−A) B + D det(sI−A) over det(sI−A), via the Faddeev-LeVerrier
/// recursion. Denominator comes out monic. Numerically sensible up to
/// n ≈ 20; beyond that the recursion loses digits.
pub fn ss2tf(sys: &ContinuousStateSpace) -> Result<RationalTransferFunction> {
    if !sys.is_siso() {
        return Err(Error::NotSiso {
            inputs: sys.n_inputs(),
            outputs: sys.n_outputs(),
        });
    }
    let n = sys.n_states();
    let a = sys.a();
    let d = sys.d()[(0, 0)];

    // den_desc[0] = 1 (monic); adjugate terms pair with s^{n-1-k}
    let mut den = vec![0.0; n + 1];
    den[0] = 1.0;
    let mut adj_terms = Vec::with_capacity(n);
    let mut bk = Matrix::identity(n, n);
    // k is arithmetic in the recursion (the 1/k factor), not just an index
    #[allow(clippy::needless_range_loop)]
    for k in 1..=n {
        adj_terms.push((sys.c() * &bk * sys.b())[(0, 0)]);
        let abk = a * &bk;
        let coeff = -abk.trace() / k as f64;
        den[k] = coeff;
        bk = abk + Matrix::identity(n, n) * coeff;
    }

    let mut num = vec![0.0; n + 1];
    num[0] = d;
    for k in 0..n {
        num[k + 1] = adj_terms[k] + d * den[k + 1];
    }

    // pure-gain path: C contributes nothing, so num = D·den cancels exactly
    if adj_terms.iter().all(|&t| t == 0.0) {
        return RationalTransferFunction::new(vec![d], vec![1.0]);
    }

    RationalTransferFunction::new(num, den)
}

/// H(jω) over a frequency grid.
pub fn freq_response(
    tf: &RationalTransferFunction,
    omegas: &[f64],
) -> Result<Vec<Complex64>> {
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite {
            context: "frequency grid".to_string(),
        });
    }
    omegas
        .iter()
        .map(|&w| {
            let s = Complex64::new(0.0, w);
            let den = horner(tf.den(), s);
            if den.norm() < 1e-300 {
                return Err(Error::PoleOnAxis { omega: w });
            }
            Ok(horner(tf.num(), s) / den)
        })
        .collect()
}

/// Measure the system's fastest oscillatory mode against a proposed
/// sampling time. Never fails; the caller reads the compliance and
/// fragility flags off the returned spec. A fragile boundary also logs
/// a warning.
pub fn validate_sampling(sys: &ContinuousStateSpace, ts: f64) -> SamplingSpec {
    let spec = SamplingSpec {
        ts,
        omega_max: sys.omega_max(),
    };
    if spec.is_compliant() && spec.is_boundary_fragile() {
        log::warn!(
            "ts = {} sits within 1% of the aliasing bound π/ω_max = {}; recovery from \
             discrete data will be numerically fragile",
            ts,
            PI / spec.omega_max
        );
    }
    spec
}
