//! Per-satellite authentication test.
//!
//! Each receiver estimates the nominal power spectral density sample (NPSDS)
//! as the mean of its `T` spectral samples and compares it with the reference
//! value `Θ_a` it computes for the legitimate transmitter. With exponential
//! spectral samples the estimate is Gamma distributed with shape `T` and
//! scale `Θ/T`, which gives closed forms for the detection and false-alarm
//! probabilities in terms of the regularized incomplete gamma function.
//!
//! Thresholds are normalized: `λ = α·Θ_a` with `0 < α < 1`, and an attacker
//! is summarized by `β = Θ_s / Θ_a`.

mod gamma;
mod threshold;

pub use gamma::{gamma_p, gamma_q, ln_gamma, regularized_gamma, regularized_gamma_pair, GammaKind};
pub use threshold::{
    golden_section_minimize, optimize_threshold, optimize_threshold_default, threshold_objective,
    GoldenSection, ThresholdOptimum, ALPHA_EPS, DEFAULT_TOL, PRESCAN_POINTS,
};

use serde::{Deserialize, Serialize};

use crate::error::{PlaError, Result};
use crate::signal::SpectralObservation;

/// Reference NPSDS, normalized threshold and slot length for one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    theta_ref: f64,
    alpha: f64,
    slot_length: usize,
}

impl DetectorConfig {
    pub fn new(theta_ref: f64, alpha: f64, slot_length: usize) -> Result<Self> {
        if !(theta_ref > 0.0) || !theta_ref.is_finite() {
            return Err(PlaError::arg(format!("reference NPSDS must be positive, got {theta_ref}")));
        }
        check_alpha(alpha)?;
        check_slot(slot_length)?;
        Ok(DetectorConfig {
            theta_ref,
            alpha,
            slot_length,
        })
    }

    pub fn theta_ref(&self) -> f64 {
        self.theta_ref
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn slot_length(&self) -> usize {
        self.slot_length
    }

    /// Absolute threshold `λ = α·Θ_a`.
    pub fn threshold(&self) -> f64 {
        self.alpha * self.theta_ref
    }

    /// Acceptance interval `[Θ_a(1−α), Θ_a(1+α)]`.
    pub fn acceptance_interval(&self) -> (f64, f64) {
        (
            self.theta_ref * (1.0 - self.alpha),
            self.theta_ref * (1.0 + self.alpha),
        )
    }
}

/// Attacker-to-reference NPSDS ratio `β = Θ_s/Θ_a`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BetaRatio(f64);

impl BetaRatio {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(PlaError::arg(format!("beta must be positive and finite, got {value}")));
        }
        Ok(BetaRatio(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BetaRatio {
    type Error = PlaError;
    fn try_from(v: f64) -> Result<Self> {
        BetaRatio::new(v)
    }
}

impl From<BetaRatio> for f64 {
    fn from(b: BetaRatio) -> f64 {
        b.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionProbabilities {
    pub p_detect: f64,
    pub p_false_alarm: f64,
}

impl DetectionProbabilities {
    pub fn evaluate(alpha: f64, beta: f64, slot_length: usize) -> Result<Self> {
        Ok(DetectionProbabilities {
            p_detect: p_detect(alpha, beta, slot_length)?,
            p_false_alarm: p_false_alarm(alpha, slot_length)?,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PlaError::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_slot(slot_length: usize) -> Result<()> {
    if slot_length == 0 {
        return Err(PlaError::arg("slot length must be at least 1"));
    }
    Ok(())
}

/// Maximum-likelihood NPSDS estimate: the sample mean of the spectrum.
pub fn estimate_npsds(obs: &SpectralObservation) -> Result<f64> {
    mean_of(obs.samples())
}

pub(crate) fn mean_of(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(PlaError::arg("cannot estimate NPSDS from an empty observation"));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Density of the NPSDS estimate: Gamma with shape `T` and scale `Θ/T`.
pub fn estimate_pdf(theta_hat: f64, theta: f64, slot_length: usize) -> Result<f64> {
    check_slot(slot_length)?;
    if !(theta > 0.0) {
        return Err(PlaError::arg(format!("NPSDS must be positive, got {theta}")));
    }
    if !(theta_hat >= 0.0) {
        return Err(PlaError::arg(format!("estimate must be non-negative, got {theta_hat}")));
    }
    let t = slot_length as f64;
    if theta_hat == 0.0 {
        return Ok(if slot_length == 1 { 1.0 / theta } else { 0.0 });
    }
    let ln_pdf = (t - 1.0) * theta_hat.ln() - theta_hat * t / theta - ln_gamma(t) - t * (theta / t).ln();
    Ok(ln_pdf.exp())
}

/// CDF of the NPSDS estimate, `P(T, Θ̂·T/Θ)`.
pub fn estimate_cdf(theta_hat: f64, theta: f64, slot_length: usize) -> Result<f64> {
    check_slot(slot_length)?;
    if !(theta > 0.0) {
        return Err(PlaError::arg(format!("NPSDS must be positive, got {theta}")));
    }
    if theta_hat <= 0.0 {
        return Ok(0.0);
    }
    let t = slot_length as f64;
    gamma_p(t, theta_hat * t / theta)
}

/// Local decision: `true` ("spoofer") iff the estimate falls outside
/// `[Θ_a(1−α), Θ_a(1+α)]`. The interval is closed, so ties accept.
pub fn decide(theta_hat: f64, cfg: &DetectorConfig) -> bool {
    let (lo, hi) = cfg.acceptance_interval();
    theta_hat < lo || theta_hat > hi
}

// Probability that a Gamma(T, β/T) variable (in units of Θ_a) leaves the
// acceptance interval.
fn outside_probability(alpha: f64, beta: f64, slot_length: usize) -> Result<f64> {
    let t = slot_length as f64;
    let below = gamma_p(t, t * (1.0 - alpha) / beta)?;
    let above = gamma_q(t, t * (1.0 + alpha) / beta)?;
    Ok((below + above).min(1.0))
}

/// Spoofing detection probability `P_d(α, β, T)`.
pub fn p_detect(alpha: f64, beta: f64, slot_length: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_slot(slot_length)?;
    let beta = BetaRatio::new(beta)?.value();
    outside_probability(alpha, beta, slot_length)
}

/// False-alarm probability `P_f(α, T)`; the `β = 1` case of [`p_detect`].
pub fn p_false_alarm(alpha: f64, slot_length: usize) -> Result<f64> {
    check_alpha(alpha)?;
    check_slot(slot_length)?;
    outside_probability(alpha, 1.0, slot_length)
}
