//! Parameter sweeps: single-receiver ROC curves and β sweeps of the joint
//! probabilities per fusion rule.

use serde::{Deserialize, Serialize};

use super::experiment::{optimize_thresholds, Hypothesis, ReceiverSetup, SlotEngine};
use crate::detection::{p_detect, p_false_alarm, BetaRatio, ALPHA_EPS};
use crate::error::{PlaError, Result};
use crate::fusion::{joint_probabilities, FusionRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub alpha: f64,
    pub p_false_alarm: f64,
    pub p_detect: f64,
}

/// Closed-form `(α, P_f, P_d)` on a uniform α grid over `[ε, 1 − ε]`.
pub fn roc_sweep(beta: f64, slot_length: usize, grid: usize) -> Result<Vec<RocPoint>> {
    if grid < 2 {
        return Err(PlaError::arg(format!("ROC grid needs at least 2 points, got {grid}")));
    }
    let beta = BetaRatio::new(beta)?.value();
    let lo = ALPHA_EPS;
    let hi = 1.0 - ALPHA_EPS;
    let step = (hi - lo) / (grid - 1) as f64;
    (0..grid)
        .map(|k| {
            let alpha = if k == grid - 1 { hi } else { lo + k as f64 * step };
            Ok(RocPoint {
                alpha,
                p_false_alarm: p_false_alarm(alpha, slot_length)?,
                p_detect: p_detect(alpha, beta, slot_length)?,
            })
        })
        .collect()
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { hi } else { lo + k as f64 * step })
                .collect()
        }
    }
}

/// Homogeneous-constellation β sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionSweep {
    pub receivers: usize,
    pub slot_length: usize,
    pub betas: Vec<f64>,
    pub rules: Vec<FusionRule>,
    /// Monte Carlo slots per hypothesis and β; 0 skips the empirical columns.
    pub trials: u64,
    pub seed: u64,
}

impl FusionSweep {
    /// β over `[0.1, 4]` with 40 points, all three rules, analytic only.
    pub fn new(receivers: usize, slot_length: usize) -> Self {
        FusionSweep {
            receivers,
            slot_length,
            betas: linspace(0.1, 4.0, 40),
            rules: FusionRule::ALL_DEFAULT.to_vec(),
            trials: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionRow {
    pub beta: f64,
    pub rule: String,
    pub quorum: usize,
    pub alpha: f64,
    pub p_detect_joint: f64,
    pub p_false_alarm_joint: f64,
    pub p_detect_empirical: Option<f64>,
    pub p_false_alarm_empirical: Option<f64>,
}

/// Runs the sweep. Every receiver uses its optimized threshold; β row `j`
/// seeds its slots from `seed ^ (j << 40)`.
pub fn fusion_sweep(cfg: &FusionSweep) -> Result<Vec<FusionRow>> {
    if cfg.receivers == 0 {
        return Err(PlaError::arg("sweep needs at least one receiver"));
    }
    if cfg.rules.is_empty() {
        return Err(PlaError::arg("sweep needs at least one fusion rule"));
    }
    let mut rows = Vec::with_capacity(cfg.betas.len() * cfg.rules.len());
    for (j, &beta) in cfg.betas.iter().enumerate() {
        let setups = vec![ReceiverSetup { theta_ref: 1.0, beta }; cfg.receivers];
        let opt = optimize_thresholds(&setups[..1], cfg.slot_length)?[0];
        let pd = vec![opt.p_detect; cfg.receivers];
        let pf = vec![opt.p_false_alarm; cfg.receivers];
        let hists = if cfg.trials > 0 {
            let engine = SlotEngine::new(setups, &vec![opt.alpha; cfg.receivers], cfg.slot_length)?;
            let seed = cfg.seed ^ ((j as u64) << 40);
            Some((
                engine.positives_histogram(Hypothesis::Legitimate, seed, 0, cfg.trials),
                engine.positives_histogram(Hypothesis::Spoofed, seed, cfg.trials, cfg.trials),
            ))
        } else {
            None
        };
        for rule in &cfg.rules {
            let q = rule.quorum_for(cfg.receivers)?;
            let joint = joint_probabilities(&pd, &pf, rule)?;
            let (ped, pfe) = match &hists {
                Some((h0, h1)) => (
                    Some(h1[q..].iter().sum::<u64>() as f64 / cfg.trials as f64),
                    Some(h0[q..].iter().sum::<u64>() as f64 / cfg.trials as f64),
                ),
                None => (None, None),
            };
            rows.push(FusionRow {
                beta,
                rule: rule.name().to_string(),
                quorum: q,
                alpha: opt.alpha,
                p_detect_joint: joint.p_detect_joint,
                p_false_alarm_joint: joint.p_false_alarm_joint,
                p_detect_empirical: ped,
                p_false_alarm_empirical: pfe,
            });
        }
    }
    Ok(rows)
}
