//! Shared generators for the integration suites.

use jitterlab::lti::ContinuousStateSpace;
use jitterlab::matfun::Matrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Random strictly stable system: entries uniform in [-1, 1], then the
/// A-matrix is shifted left so its spectral abscissa sits at -margin.
pub fn random_stable_system(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    p: usize,
    margin: f64,
) -> ContinuousStateSpace {
    let raw = Matrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let abscissa = raw
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let a = raw - Matrix::identity(n, n) * (abscissa + margin);
    let b = Matrix::from_fn(n, m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let c = Matrix::from_fn(p, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let d = Matrix::zeros(p, m);
    ContinuousStateSpace::new(a, b, c, d).expect("generated dimensions are consistent")
}

pub fn rel_frob(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Timestep comfortably inside the sampling bound for this system. Capped:
/// a nearly-real spectrum would otherwise allow periods so long that the
/// fast modes of e^(A ts) sink into round-off, and no recovery can undo
/// that.
pub fn compliant_ts(sys: &ContinuousStateSpace) -> f64 {
    let wmax = sys.omega_max();
    if wmax > 0.0 {
        (0.5 * std::f64::consts::PI / wmax).min(1.5)
    } else {
        0.3
    }
}
