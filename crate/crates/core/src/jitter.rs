//! Jitter-sequence modeling: generation from a handful of distribution
//! models, validation of the hard ε_k > -1 assumption, and conversion of
//! fractions into effective timesteps.
//!
//! The fraction ε_k scales the nominal interval: the k-th sample actually
//! lands (1 + ε_k)·ts after its predecessor. Everything downstream holds
//! for -1 < ε_k < ∞, but fractions at or above 1 mean a whole nominal
//! period can be skipped, which practice treats as a missed sample rather
//! than jitter; the recommended validation policy flags those.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rejection-sampling budget per truncated-gaussian draw.
const REJECTION_CAP: usize = 1000;

/// Distribution the fractions are drawn from. `Explicit` marks sequences
/// supplied as literal samples (from a file or caller-provided vector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JitterModel {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    TruncatedGaussian { sigma: f64, lo: f64, hi: f64 },
    Explicit,
}

/// How strictly `validate` treats large positive fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Flag ε_k ≥ 1 (a full sample period of delay) as warnings.
    #[default]
    Recommended,
    /// Accept anything above -1.
    Permissive,
}

/// Outcome of `validate`: hard violations come back as errors, soft ones
/// accumulate here as (index, value) pairs.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub flagged: Vec<(usize, f64)>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Per-sample jitter fractions together with the model, seed, and bounds
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterSequence {
    epsilons: Vec<f64>,
    model: JitterModel,
    seed: Option<u64>,
    bounds: (f64, f64),
}

impl JitterModel {
    /// Declared (lo, hi) envelope of the model's support. `Explicit` has
    /// no a-priori bounds; callers derive them from the data.
    fn declared_bounds(&self) -> Option<(f64, f64)> {
        match *self {
            JitterModel::Constant(c) => Some((c, c)),
            JitterModel::Uniform { lo, hi } => Some((lo, hi)),
            JitterModel::TruncatedGaussian { lo, hi, .. } => Some((lo, hi)),
            JitterModel::Explicit => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            JitterModel::Constant(_) => "constant",
            JitterModel::Uniform { .. } => "uniform",
            JitterModel::TruncatedGaussian { .. } => "gauss",
            JitterModel::Explicit => "explicit",
        }
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if lo > -1.0 && lo <= hi && lo.is_finite() && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBounds { lo, hi })
    }
}

impl FromStr for JitterModel {
    type Err = Error;

    /// Descriptor grammar: `constant:<c>`, `uniform:<half-width>` or
    /// `uniform:<lo>,<hi>`, `gauss:<sigma>,bounds=<lo>,<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("jitter descriptor '{s}' has no ':' separator")))?;
        let num = |tok: &str| -> Result<f64> {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("jitter descriptor '{s}': '{tok}' is not a number")))
        };
        match kind {
            "constant" => {
                let c = num(rest)?;
                check_bounds(c, c)?;
                Ok(JitterModel::Constant(c))
            }
            "uniform" => {
                let (lo, hi) = match rest.split_once(',') {
                    Some((a, b)) => (num(a)?, num(b)?),
                    None => {
                        let w = num(rest)?;
                        (-w, w)
                    }
                };
                check_bounds(lo, hi)?;
                Ok(JitterModel::Uniform { lo, hi })
            }
            "gauss" => {
                let (sigma_tok, bounds_tok) = rest.split_once(',').ok_or_else(|| {
                    Error::Parse(format!(
                        "jitter descriptor '{s}': gauss needs ',bounds=<lo>,<hi>'"
                    ))
                })?;
                let sigma = num(sigma_tok)?;
                let spec = bounds_tok.strip_prefix("bounds=").ok_or_else(|| {
                    Error::Parse(format!(
                        "jitter descriptor '{s}': expected 'bounds=<lo>,<hi>' after sigma"
                    ))
                })?;
                let (lo_tok, hi_tok) = spec.split_once(',').ok_or_else(|| {
                    Error::Parse(format!("jitter descriptor '{s}': bounds need two values"))
                })?;
                let (lo, hi) = (num(lo_tok)?, num(hi_tok)?);
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidSigma { sigma });
                }
                check_bounds(lo, hi)?;
                Ok(JitterModel::TruncatedGaussian { sigma, lo, hi })
            }
            other => Err(Error::Parse(format!(
                "unknown jitter model '{other}' (expected constant, uniform, or gauss)"
            ))),
        }
    }
}

impl fmt::Display for JitterModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            JitterModel::Constant(c) => write!(f, "constant:{c}"),
            JitterModel::Uniform { lo, hi } if lo == -hi => write!(f, "uniform:{hi}"),
            JitterModel::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            JitterModel::TruncatedGaussian { sigma, lo, hi } => {
                write!(f, "gauss:{sigma},bounds={lo},{hi}")
            }
            JitterModel::Explicit => write!(f, "explicit"),
        }
    }
}

/// Draw `n` fractions from `model`, deterministically for a given seed.
/// The stream comes from ChaCha8 so sequences reproduce exactly across
/// platforms and releases.
pub fn generate(model: JitterModel, n: usize, seed: u64) -> Result<JitterSequence> {
    if n == 0 {
        return Err(Error::EmptyHorizon { n });
    }
    let (lo, hi) = model
        .declared_bounds()
        .ok_or_else(|| Error::Parse("explicit jitter has no generator; supply samples".into()))?;
    check_bounds(lo, hi)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let epsilons = match model {
        JitterModel::Constant(c) => vec![c; n],
        JitterModel::Uniform { lo, hi } => (0..n)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect(),
        JitterModel::TruncatedGaussian { sigma, lo, hi } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidSigma { sigma });
            }
            let mut out = Vec::with_capacity(n);
            for index in 0..n {
                let mut accepted = None;
                for _ in 0..REJECTION_CAP {
                    let draw = sigma * standard_normal(&mut rng);
                    if (lo..=hi).contains(&draw) {
                        accepted = Some(draw);
                        break;
                    }
                }
                match accepted {
                    Some(e) => out.push(e),
                    None => {
                        return Err(Error::RejectionLimit {
                            attempts: REJECTION_CAP,
                            index,
                        })
                    }
                }
            }
            out
        }
        JitterModel::Explicit => unreachable!("rejected above"),
    };

    Ok(JitterSequence {
        epsilons,
        model,
        seed: Some(seed),
        bounds: (lo, hi),
    })
}

/// One N(0, 1) draw via the Box-Muller transform (cosine branch). Two
/// uniforms are consumed per draw so the stream position stays predictable.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE); // log(0) guard
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl JitterSequence {
    /// Wrap literal samples. Bounds become the sample min/max; the hard
    /// ε_k > -1 invariant is enforced here.
    pub fn from_samples(epsilons: Vec<f64>) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::EmptyHorizon { n: 0 });
        }
        validate_raw(&epsilons, Policy::Permissive)?;
        let lo = epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = epsilons.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            epsilons,
            model: JitterModel::Explicit,
            seed: None,
            bounds: (lo, hi),
        })
    }

    /// Reassemble a sequence from serialized parts, checking that the data
    /// honors its own declared metadata.
    pub fn from_parts(
        epsilons: Vec<f64>,
        model: JitterModel,
        seed: Option<u64>,
        bounds: (f64, f64),
    ) -> Result<Self> {
        if epsilons.is_empty() {
            return Err(Error::EmptyHorizon { n: 0 });
        }
        check_bounds(bounds.0, bounds.1)?;
        validate_raw(&epsilons, Policy::Permissive)?;
        for (i, &e) in epsilons.iter().enumerate() {
            if e < bounds.0 || e > bounds.1 {
                return Err(Error::Parse(format!(
                    "epsilon[{i}] = {e} lies outside the declared bounds [{}, {}]",
                    bounds.0, bounds.1
                )));
            }
        }
        Ok(Self {
            epsilons,
            model,
            seed,
            bounds,
        })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }
    pub fn len(&self) -> usize {
        self.epsilons.len()
    }
    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }
    pub fn model(&self) -> JitterModel {
        self.model
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }
}

/// Check fractions against the assumption and the policy. ε_k ≤ -1 is a
/// hard error (the sample order would reverse or freeze); ε_k ≥ 1 is a
/// warning under the recommended policy and silent under the permissive
/// one.
pub fn validate(seq: &JitterSequence, policy: Policy) -> Result<ValidationReport> {
    validate_raw(seq.epsilons(), policy)
}

pub fn validate_raw(epsilons: &[f64], policy: Policy) -> Result<ValidationReport> {
    let violations: Vec<usize> = epsilons
        .iter()
        .enumerate()
        .filter(|(_, &e)| e <= -1.0 || !e.is_finite())
        .map(|(i, _)| i)
        .collect();
    if !violations.is_empty() {
        return Err(Error::AssumptionViolation {
            indices: violations,
        });
    }
    let mut report = ValidationReport::default();
    if policy == Policy::Recommended {
        report.flagged = epsilons
            .iter()
            .enumerate()
            .filter(|(_, &e)| e >= 1.0)
            .map(|(i, &e)| (i, e))
            .collect();
    }
    Ok(report)
}

/// Actual inter-sample intervals: Δt_k = (1 + ε_k)·ts, all strictly
/// positive for a valid sequence.
pub fn effective_timesteps(seq: &JitterSequence, ts: f64) -> Result<Vec<f64>> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::NonPositiveTimestep { dt: ts });
    }
    Ok(seq.epsilons().iter().map(|e| ts * (1.0 + e)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model_repeats_value() {
        let seq = generate(JitterModel::Constant(0.1), 5, 0).unwrap();
        assert_eq!(seq.epsilons(), &[0.1; 5]);
        assert_eq!(seq.bounds(), (0.1, 0.1));
    }

    #[test]
    fn uniform_stream_statistics() {
        let model = JitterModel::Uniform { lo: -0.1, hi: 0.1 };
        let seq = generate(model, 10_000, 42).unwrap();
        assert!(seq.epsilons().iter().all(|e| (-0.1..=0.1).contains(e)));
        let mean: f64 = seq.epsilons().iter().sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.01, "sample mean {mean} too far from 0");
    }

    #[test]
    fn uniform_at_minus_one_rejected() {
        let model = JitterModel::Uniform { lo: -1.0, hi: 0.1 };
        assert!(matches!(
            generate(model, 10, 0),
            Err(Error::InvalidBounds { .. })
        ));
    }

    #[test]
    fn generation_is_reproducible() {
        let model = JitterModel::Uniform { lo: -0.2, hi: 0.2 };
        let a = generate(model, 1000, 7).unwrap();
        let b = generate(model, 1000, 7).unwrap();
        assert_eq!(a, b);
        let c = generate(model, 1000, 8).unwrap();
        assert_ne!(a.epsilons(), c.epsilons());
    }

    #[test]
    fn gaussian_respects_bounds_and_scale() {
        let model = JitterModel::TruncatedGaussian {
            sigma: 0.05,
            lo: -0.2,
            hi: 0.2,
        };
        let seq = generate(model, 10_000, 3).unwrap();
        assert!(seq.epsilons().iter().all(|e| (-0.2..=0.2).contains(e)));
        let mean: f64 = seq.epsilons().iter().sum::<f64>() / 10_000.0;
        let var: f64 =
            seq.epsilons().iter().map(|e| (e - mean).powi(2)).sum::<f64>() / 10_000.0;
        let std = var.sqrt();
        assert!((std - 0.05).abs() < 0.005, "sample std {std} off from 0.05");
    }

    #[test]
    fn gaussian_rejection_cap_fires() {
        // support nowhere near the bounds window: every draw rejected
        let model = JitterModel::TruncatedGaussian {
            sigma: 1e-3,
            lo: 0.9,
            hi: 0.901,
        };
        match generate(model, 3, 0) {
            Err(Error::RejectionLimit { attempts, index }) => {
                assert_eq!(attempts, REJECTION_CAP);
                assert_eq!(index, 0);
            }
            other => panic!("expected RejectionLimit, got {other:?}"),
        }
    }

    #[test]
    fn zero_horizon_rejected() {
        assert!(matches!(
            generate(JitterModel::Constant(0.0), 0, 0),
            Err(Error::EmptyHorizon { n: 0 })
        ));
    }

    #[test]
    fn validate_clean_sequence() {
        let seq = JitterSequence::from_samples(vec![0.05, -0.02, 0.3]).unwrap();
        let report = validate(&seq, Policy::Recommended).unwrap();
        assert!(report.is_clean());
    }

    #[test]
    fn validate_flags_full_period_miss_under_recommended() {
        let seq = JitterSequence::from_samples(vec![1.5]).unwrap();
        let report = validate(&seq, Policy::Recommended).unwrap();
        assert_eq!(report.flagged, vec![(0, 1.5)]);
        let permissive = validate(&seq, Policy::Permissive).unwrap();
        assert!(permissive.is_clean());
    }

    #[test]
    fn validate_rejects_minus_one() {
        match validate_raw(&[-1.0], Policy::Permissive) {
            Err(Error::AssumptionViolation { indices }) => assert_eq!(indices, vec![0]),
            other => panic!("expected AssumptionViolation, got {other:?}"),
        }
        assert!(JitterSequence::from_samples(vec![0.0, -1.2]).is_err());
    }

    #[test]
    fn effective_timestep_values() {
        let seq = JitterSequence::from_samples(vec![0.1]).unwrap();
        let dts = effective_timesteps(&seq, 0.01).unwrap();
        assert!((dts[0] - 0.011).abs() < 1e-17);

        let zeros = JitterSequence::from_samples(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(effective_timesteps(&zeros, 0.02).unwrap(), vec![0.02; 3]);

        let shrink = JitterSequence::from_samples(vec![-0.5]).unwrap();
        assert_eq!(effective_timesteps(&shrink, 1.0).unwrap(), vec![0.5]);
    }

    #[test]
    fn effective_timesteps_always_positive() {
        let model = JitterModel::Uniform { lo: -0.99, hi: 3.0 };
        let seq = generate(model, 500, 11).unwrap();
        let dts = effective_timesteps(&seq, 0.25).unwrap();
        assert!(dts.iter().all(|&dt| dt > 0.0));
    }

    #[test]
    fn descriptor_round_trips() {
        for s in ["constant:0.1", "uniform:0.1", "gauss:0.03,bounds=-0.2,0.2"] {
            let model: JitterModel = s.parse().unwrap();
            assert_eq!(model.to_string(), s);
        }
        let asym: JitterModel = "uniform:-0.05,0.2".parse().unwrap();
        assert_eq!(
            asym,
            JitterModel::Uniform {
                lo: -0.05,
                hi: 0.2
            }
        );
    }

    #[test]
    fn descriptor_errors() {
        assert!("uniform:abc".parse::<JitterModel>().is_err());
        assert!("what:1".parse::<JitterModel>().is_err());
        assert!("gauss:0.03".parse::<JitterModel>().is_err());
        assert!("constant:-1.5".parse::<JitterModel>().is_err());
        assert!("0.1".parse::<JitterModel>().is_err());
    }

    #[test]
    fn from_parts_checks_declared_bounds() {
        let err = JitterSequence::from_parts(
            vec![0.5],
            JitterModel::Uniform { lo: -0.1, hi: 0.1 },
            Some(0),
            (-0.1, 0.1),
        );
        assert!(matches!(err, Err(Error::Parse(_))));
    }
}
