//! Matrix-function kernels: matrix exponential, principal matrix logarithm,
//! and the zero-order-hold discretization pair (A_d, B_d).
//!
//! `expm` uses scaling-and-squaring with diagonal Padé approximants of orders
//! {3, 5, 7, 9, 13}, selected by the 1-norm of the input. `logm_principal`
//! reduces the input to triangular form via a real Schur decomposition and
//! applies inverse scaling-and-squaring with a Padé approximant on the
//! triangular factor; complex arithmetic is used internally but inputs and
//! outputs are real. `discretize_pair` exponentiates the augmented block
//! matrix [[A, B], [0, 0]]·dt so that singular A needs no inversion.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
type CMatrix = DMatrix<Complex64>;

/// Norm thresholds for selecting the Padé order in `expm`. Kept at the
/// published precision rather than the shortest f64 spelling.
#[allow(clippy::excessive_precision)]
const THETA_3: f64 = 1.495585217958292e-2;
#[allow(clippy::excessive_precision)]
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// 7-point Gauss-Legendre nodes and weights on [-1, 1], used for the
/// partial-fraction Padé approximant of log(I + X). Tabulated digits kept
/// as published.
#[allow(clippy::excessive_precision)]
const GL7_NODES: [f64; 7] = [
    -0.949107912342758524526189684048,
    -0.741531185599394439863864773281,
    -0.405845151377397166906606412077,
    0.0,
    0.405845151377397166906606412077,
    0.741531185599394439863864773281,
    0.949107912342758524526189684048,
];
#[allow(clippy::excessive_precision)]
const GL7_WEIGHTS: [f64; 7] = [
    0.129484966168869693270611432679,
    0.279705391489276667901467771424,
    0.381830050505118944950369775489,
    0.417959183673469387755102040816,
    0.381830050505118944950369775489,
    0.279705391489276667901467771424,
    0.129484966168869693270611432679,
];

/// Norm at which inverse scaling-and-squaring stops taking square roots.
/// Below this the 7-node Padé approximant is accurate to full precision.
const LOGM_PADE_THRESHOLD: f64 = 0.25;

pub(crate) fn one_norm(m: &Matrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn one_norm_c(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn check_finite(m: &Matrix, context: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            context: context.to_string(),
        })
    }
}

fn check_square(m: &Matrix, context: &str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() >= 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: format!("{context}: expected a square matrix, got {}x{}", m.nrows(), m.ncols()),
        })
    }
}

/// Numerator/denominator of the diagonal Padé approximant for orders 3..9.
/// Returns (U, V) with r(A) = (V - U)^-1 (V + U).
fn pade_small(a: &Matrix, coeffs: &[f64]) -> (Matrix, Matrix) {
    let n = a.nrows();
    let order = coeffs.len() - 1;
    let a2 = a * a;
    let mut even = Matrix::identity(n, n) * coeffs[0];
    let mut odd = Matrix::identity(n, n) * coeffs[1];
    let mut pow = Matrix::identity(n, n);
    for k in (2..=order).step_by(2) {
        pow = &pow * &a2;
        even += &pow * coeffs[k];
        if k < order {
            odd += &pow * coeffs[k + 1];
        }
    }
    (a * odd, even)
}

/// Order-13 Padé evaluation, factored to reuse A^6 per Higham's scheme.
fn pade_13(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.nrows();
    let b = &PADE_13;
    let id = Matrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + id * b[0];
    (u, v)
}

/// Matrix exponential e^M via scaling-and-squaring with diagonal Padé
/// approximants. Relative accuracy is ~1e-13 or better for inputs with
/// 1-norm up to a few hundred.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    check_square(m, "expm")?;
    check_finite(m, "expm input")?;

    let norm = one_norm(m);
    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_small(m, &PADE_3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_small(m, &PADE_5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_small(m, &PADE_7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_small(m, &PADE_9);
        (u, v, 0)
    } else {
        let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
        let scaled = m / 2f64.powi(s);
        let (u, v) = pade_13(&scaled);
        (u, v, s)
    };

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::SolveFailed {
            context: "matrix exponential Padé denominator".to_string(),
        })?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().all(|x| x.is_finite()) {
        Ok(r)
    } else {
        Err(Error::ExpOverflow)
    }
}

/// Principal matrix logarithm: the X with e^X = M whose eigenvalues have
/// imaginary parts in (-π, π].
///
/// Fails with `SingularInput` if M has a numerically zero eigenvalue and
/// `BranchViolation` if an eigenvalue sits on (or within a 1e-12 relative
/// band around) the closed negative real axis, where the principal branch
/// is not defined for real matrices.
pub fn logm_principal(m: &Matrix) -> Result<Matrix> {
    check_square(m, "logm")?;
    check_finite(m, "logm input")?;
    let n = m.nrows();

    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or_else(|| Error::SolveFailed {
        context: "Schur decomposition did not converge".to_string(),
    })?;
    let (q, t) = schur.unpack();
    let (qc, mut tc) = complexify_schur(&q, &t);

    // Branch/singularity checks on the now-triangular spectrum.
    for i in 0..n {
        let lambda = tc[(i, i)];
        if lambda.norm() < 1e-290 {
            return Err(Error::SingularInput { eigenvalue: lambda });
        }
        if lambda.re < 0.0 && lambda.im.abs() <= 1e-12 * lambda.norm() {
            return Err(Error::BranchViolation { eigenvalue: lambda });
        }
    }

    // Inverse scaling-and-squaring: take square roots of the triangular
    // factor until it is close enough to the identity for the Padé step.
    let id = CMatrix::identity(n, n);
    let mut sqrt_count = 0u32;
    while one_norm_c(&(&tc - &id)) > LOGM_PADE_THRESHOLD {
        tc = sqrtm_triangular(&tc);
        sqrt_count += 1;
        if sqrt_count > 100 {
            return Err(Error::SolveFailed {
                context: "matrix logarithm square-root iteration did not converge".to_string(),
            });
        }
    }

    let x = &tc - &id;
    let mut log_t = CMatrix::zeros(n, n);
    for (node, weight) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
        let alpha = Complex64::new(0.5 * (node + 1.0), 0.0);
        let w = Complex64::new(0.5 * weight, 0.0);
        let lhs = &id + &x * alpha;
        let solved = lhs.lu().solve(&x).ok_or_else(|| Error::SolveFailed {
            context: "matrix logarithm Padé solve".to_string(),
        })?;
        log_t += solved * w;
    }
    log_t *= Complex64::new(2f64.powi(sqrt_count as i32), 0.0);

    let log_m = &qc * log_t * qc.adjoint();
    Ok(log_m.map(|z| z.re))
}

/// Convert a real Schur pair (Q, T) with T quasi-triangular into a complex
/// Schur pair with strictly upper-triangular factor, by rotating each 2x2
/// diagonal bump with a local unitary similarity.
fn complexify_schur(q: &Matrix, t: &Matrix) -> (CMatrix, CMatrix) {
    let n = t.nrows();
    let mut tc = t.map(|x| Complex64::new(x, 0.0));
    let mut qc = q.map(|x| Complex64::new(x, 0.0));

    let mut k = 0;
    while k + 1 < n {
        if t[(k + 1, k)] == 0.0 {
            k += 1;
            continue;
        }
        let a = tc[(k, k)];
        let b = tc[(k, k + 1)];
        let c = tc[(k + 1, k)];
        let d = tc[(k + 1, k + 1)];
        let half_tr = (a + d) * 0.5;
        let det = a * d - b * c;
        let lambda = half_tr + (half_tr * half_tr - det).sqrt();

        // Eigenvector of the 2x2 block for lambda; pick the numerically
        // larger off-diagonal entry to form it.
        let (v0, v1) = if b.norm() >= c.norm() {
            (b, lambda - a)
        } else {
            (lambda - d, c)
        };
        let scale = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (v0, v1) = (v0 / scale, v1 / scale);
        // Unitary G = [v, w] with w orthogonal to v.
        let (w0, w1) = (-v1.conj(), v0.conj());

        // T <- G^H T G on rows/columns k, k+1; Q <- Q G.
        for j in 0..n {
            let r0 = tc[(k, j)];
            let r1 = tc[(k + 1, j)];
            tc[(k, j)] = v0.conj() * r0 + v1.conj() * r1;
            tc[(k + 1, j)] = w0.conj() * r0 + w1.conj() * r1;
        }
        for i in 0..n {
            let c0 = tc[(i, k)];
            let c1 = tc[(i, k + 1)];
            tc[(i, k)] = c0 * v0 + c1 * v1;
            tc[(i, k + 1)] = c0 * w0 + c1 * w1;
            let q0 = qc[(i, k)];
            let q1 = qc[(i, k + 1)];
            qc[(i, k)] = q0 * v0 + q1 * v1;
            qc[(i, k + 1)] = q0 * w0 + q1 * w1;
        }
        tc[(k + 1, k)] = Complex64::new(0.0, 0.0);
        k += 2;
    }
    (qc, tc)
}

/// Principal square root of a complex upper-triangular matrix via the
/// standard superdiagonal recurrence. Diagonal entries must avoid the
/// closed negative real axis (checked by the caller), which keeps the
/// denominators R_ii + R_jj away from zero.
fn sqrtm_triangular(t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut r = CMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for sd in 1..n {
        for i in 0..n - sd {
            let j = i + sd;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Exact zero-order-hold discretization: A_d = e^{A·dt} and
/// B_d = ∫_0^dt e^{Aτ} dτ · B, computed jointly by exponentiating the
/// augmented block matrix [[A, B], [0, 0]]·dt. Works for singular A.
pub fn discretize_pair(a: &Matrix, b: &Matrix, dt: f64) -> Result<(Matrix, Matrix)> {
    check_square(a, "discretize_pair")?;
    check_finite(a, "discretize_pair A")?;
    check_finite(b, "discretize_pair B")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositiveTimestep { dt });
    }
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "discretize_pair: B has {} rows, expected {} to match A",
                b.nrows(),
                n
            ),
        });
    }

    let mut aug = Matrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * dt));
    let e = expm(&aug)?;
    let a_d = e.view((0, 0), (n, n)).into_owned();
    let b_d = e.view((0, n), (n, m)).into_owned();
    Ok((a_d, b_d))
}

/// Φ = ∫_0^dt e^{Aτ} dτ, via the same augmented mechanism with B = I.
pub fn integral_expm(a: &Matrix, dt: f64) -> Result<Matrix> {
    let n = a.nrows();
    let (_, phi) = discretize_pair(a, &Matrix::identity(n, n), dt)?;
    Ok(phi)
}
