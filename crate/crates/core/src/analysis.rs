//! The jitter transforms themselves.
//!
//! Two directions matter in practice. Case A (plant measurement): data is
//! sampled from a real plant with a jittery clock, and the identified
//! model is not the true plant but a per-sample (1+ε_k)-scaled version of
//! it, the "perceived" system. Case B (controller implementation): a
//! controller designed for the nominal period runs on a jittery clock, and
//! the dynamics it effectively realizes are the (1+ε_k)-divided version.
//! The two maps are inverses of each other sample by sample.
//!
//! For constant jitter the same scaling appears in the frequency domain as
//! a dilation of the Laplace variable, which `scale_tf` applies directly
//! to transfer-function coefficients, and reduces to simple gain rules for
//! PID parameters.

use crate::error::{Error, Result};
use crate::jitter::JitterSequence;
use crate::lti::{
    self, ContinuousStateSpace, RationalTransferFunction, TimeVaryingStateSpace,
};
use crate::matfun::Matrix;

/// Which side of the loop the jittery clock sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JitterCase {
    /// Case A: the measurement clock jitters; matrices scale up by (1+ε).
    PlantMeasurement,
    /// Case B: the implementation clock jitters; matrices scale down.
    ControllerImplementation,
}

/// Filtered-derivative PID parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub tau_d: f64,
}

impl PidParams {
    pub fn new(kp: f64, ki: f64, kd: f64, tau_d: f64) -> Result<Self> {
        if ![kp, ki, kd, tau_d].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "PID parameters".to_string(),
            });
        }
        if tau_d <= 0.0 {
            return Err(Error::Parse(format!(
                "derivative filter time constant must be positive, got {tau_d}"
            )));
        }
        Ok(Self { kp, ki, kd, tau_d })
    }
}

/// State-space family ((1+ε)A, (1+ε)B, C, D) over a declared open ε-range.
/// ε is the scheduling parameter; the base system is the ε = 0 member.
#[derive(Debug, Clone, PartialEq)]
pub struct LpvRealization {
    base: ContinuousStateSpace,
    range: (f64, f64),
}

/// Default scheduling range, the recommended jitter envelope.
pub const DEFAULT_LPV_RANGE: (f64, f64) = (-1.0, 1.0);

impl LpvRealization {
    pub fn base(&self) -> &ContinuousStateSpace {
        &self.base
    }
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// Freeze the family at one scheduling value. Strictly interior to the
    /// declared range; the endpoints are not members (ε = -1 in particular
    /// would collapse the dynamics to zero).
    pub fn evaluate(&self, eps: f64) -> Result<ContinuousStateSpace> {
        let (lo, hi) = self.range;
        if !(eps > lo && eps < hi) || !eps.is_finite() {
            return Err(Error::RangeViolation { eps, lo, hi });
        }
        let (a, b) = scale_pair(self.base.a(), self.base.b(), 1.0 + eps);
        ContinuousStateSpace::new(a, b, self.base.c().clone(), self.base.d().clone())
    }
}

/// The one scaling kernel every matrix-domain transform routes through, so
/// that per-sample maps and the LPV family agree bit for bit.
fn scale_pair(a: &Matrix, b: &Matrix, factor: f64) -> (Matrix, Matrix) {
    (a * factor, b * factor)
}

/// Case A: the time-varying system a jitter-free observer would infer from
/// samples of `true_sys` taken with the jittery clock. Per sample k the
/// matrices are (1+ε_k)·A and (1+ε_k)·B; C and D are clock-independent.
pub fn perceive_case_a(
    true_sys: &ContinuousStateSpace,
    seq: &JitterSequence,
) -> Result<TimeVaryingStateSpace> {
    let pairs = seq
        .epsilons()
        .iter()
        .map(|&e| scale_pair(true_sys.a(), true_sys.b(), 1.0 + e))
        .collect();
    TimeVaryingStateSpace::new(pairs, true_sys.c().clone(), true_sys.d().clone())
}

/// Case B: the dynamics actually realized when `designed_sys`, discretized
/// for the nominal period, executes on the jittery clock. Divides where
/// Case A multiplies.
pub fn effective_case_b(
    designed_sys: &ContinuousStateSpace,
    seq: &JitterSequence,
) -> Result<TimeVaryingStateSpace> {
    let pairs = seq
        .epsilons()
        .iter()
        .map(|&e| scale_pair(designed_sys.a(), designed_sys.b(), 1.0 / (1.0 + e)))
        .collect();
    TimeVaryingStateSpace::new(pairs, designed_sys.c().clone(), designed_sys.d().clone())
}

/// Constant-jitter frequency scaling. Case A substitutes s ↦ s/(1+ε) (the
/// perceived response of a true plant); Case B substitutes s ↦ (1+ε)s (the
/// effective response of a designed system). Result is monic-normalized.
/// DC gain is untouched either way since s = 0 is a fixed point.
///
/// Only constant jitter has this frequency-domain form; per-sample
/// sequences have no transfer function to scale.
pub fn scale_tf(
    tf: &RationalTransferFunction,
    eps: f64,
    case: JitterCase,
) -> Result<RationalTransferFunction> {
    if eps <= -1.0 || !eps.is_finite() {
        return Err(Error::RangeViolation {
            eps,
            lo: -1.0,
            hi: f64::INFINITY,
        });
    }
    if eps == 0.0 {
        return Ok(tf.clone());
    }
    let base = match case {
        JitterCase::PlantMeasurement => 1.0 / (1.0 + eps),
        JitterCase::ControllerImplementation => 1.0 + eps,
    };
    let substitute = |coeffs: &[f64]| -> Vec<f64> {
        let deg = coeffs.len() - 1;
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * base.powi((deg - i) as i32))
            .collect()
    };
    let scaled =
        RationalTransferFunction::new(substitute(tf.num()), substitute(tf.den()))?;
    Ok(scaled.monic())
}

/// Wrap a system as the LPV family it induces under measurable jitter.
/// `range` must sit inside [-1, ∞) with lo < hi; pass `DEFAULT_LPV_RANGE`
/// for the recommended envelope.
pub fn lpv_realize(
    sys: &ContinuousStateSpace,
    range: (f64, f64),
) -> Result<LpvRealization> {
    let (lo, hi) = range;
    if !(lo >= -1.0 && hi > lo) || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidRange { lo, hi });
    }
    Ok(LpvRealization {
        base: sys.clone(),
        range,
    })
}

/// Constant jitter seen from inside a PID loop: the proportional path has
/// no clock, the integral accumulates over stretched intervals (gain
/// shrinks), and the derivative differences over them (gain and filter
/// constant grow).
pub fn pid_under_jitter(pid: &PidParams, eps: f64) -> Result<PidParams> {
    if eps <= -1.0 || !eps.is_finite() {
        return Err(Error::RangeViolation {
            eps,
            lo: -1.0,
            hi: f64::INFINITY,
        });
    }
    let f = 1.0 + eps;
    PidParams::new(pid.kp, pid.ki / f, pid.kd * f, pid.tau_d * f)
}

/// Data-driven Case A: given discrete matrices identified from samples
/// taken at a believed-constant period `ts` (but actually jittered), pull
/// back to continuous time. What comes out is the perceived product
/// (1+ε)·(A, B); the factor cannot be separated from the true matrices
/// using a single record, and no attempt is made to.
pub fn recover_perceived_from_data(
    a_d_measured: &Matrix,
    b_d_measured: &Matrix,
    ts: f64,
) -> Result<(Matrix, Matrix)> {
    lti::recover_continuous_pair(a_d_measured, b_d_measured, ts)
}
