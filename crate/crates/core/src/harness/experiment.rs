//! End-to-end authentication runs: per-receiver thresholds, local decisions,
//! fusion, analytic and empirical joint probabilities.
//!
//! Slot `k` draws its randomness from `ChaCha8Rng::seed_from_u64(seed ^ k)`.
//! Slots `0..trials` are legitimate (H0) and `trials..2·trials` are spoofed
//! (H1). Results are reduced as integer histograms, so the outcome does not
//! depend on how slots are scheduled across threads.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{BetaSpec, Scenario};
use crate::detection::{decide, optimize_threshold, DetectorConfig, ThresholdOptimum, DEFAULT_TOL};
use crate::error::{PlaError, Result};
use crate::fusion::{fuse, joint_probabilities, DecisionVector, FusionRule, JointProbabilities};
use crate::geometry::DopplerObservation;
use crate::signal::{check_theta, exponential_sample, npsds_theoretical};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Which satellite transmits in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// H0: Alice transmits.
    Legitimate,
    /// H1: Eve transmits.
    Spoofed,
}

/// Reference NPSDS and attacker ratio at one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSetup {
    pub theta_ref: f64,
    pub beta: f64,
}

impl ReceiverSetup {
    pub fn theta_under(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::Legitimate => self.theta_ref,
            Hypothesis::Spoofed => self.beta * self.theta_ref,
        }
    }
}

/// Derives each receiver's `Θ_a` from Alice's Doppler shift and `β` from the
/// scenario's attacker model.
pub fn receiver_setups(scn: &Scenario) -> Result<Vec<ReceiverSetup>> {
    let psd = scn.nominal_psd()?;
    scn.receivers
        .iter()
        .enumerate()
        .map(|(i, rx)| {
            let wa = DopplerObservation::observe(&scn.alice, rx, scn.carrier_hz)?.doppler_shift;
            let theta_ref = npsds_theoretical(&psd, wa);
            if !(theta_ref > 0.0) {
                return Err(PlaError::domain(format!(
                    "reference NPSDS at receiver {i} is {theta_ref}; a positive noise floor or PSD value is required"
                )));
            }
            let beta = match &scn.attacker_beta {
                BetaSpec::Explicit(b) => b[i],
                BetaSpec::FromGeometry => {
                    let ws = DopplerObservation::observe(&scn.eve, rx, scn.carrier_hz)?.doppler_shift;
                    let theta_s = npsds_theoretical(&psd, ws);
                    if !(theta_s > 0.0) {
                        return Err(PlaError::domain(format!(
                            "spoofer NPSDS at receiver {i} is {theta_s}; beta would be zero"
                        )));
                    }
                    theta_s / theta_ref
                }
            };
            Ok(ReceiverSetup { theta_ref, beta })
        })
        .collect()
}

/// Optimal threshold per receiver; receivers sharing a β share one search.
pub fn optimize_thresholds(setups: &[ReceiverSetup], slot_length: usize) -> Result<Vec<ThresholdOptimum>> {
    let mut cache: BTreeMap<u64, ThresholdOptimum> = BTreeMap::new();
    setups
        .iter()
        .map(|s| {
            if let Some(hit) = cache.get(&s.beta.to_bits()) {
                return Ok(*hit);
            }
            let opt = optimize_threshold(s.beta, slot_length, DEFAULT_TOL)?;
            cache.insert(s.beta.to_bits(), opt);
            Ok(opt)
        })
        .collect()
}

/// Detector bank ready to simulate slots.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEngine {
    setups: Vec<ReceiverSetup>,
    detectors: Vec<DetectorConfig>,
    slot_length: usize,
}

impl SlotEngine {
    /// Uses the given per-receiver threshold coefficients.
    pub fn new(setups: Vec<ReceiverSetup>, alphas: &[f64], slot_length: usize) -> Result<Self> {
        if setups.is_empty() {
            return Err(PlaError::arg("at least one receiver is required"));
        }
        if alphas.len() != setups.len() {
            return Err(PlaError::arg(format!(
                "expected {} thresholds, got {}",
                setups.len(),
                alphas.len()
            )));
        }
        for s in &setups {
            check_theta(s.theta_ref)?;
            check_theta(s.beta * s.theta_ref)?;
        }
        let detectors = setups
            .iter()
            .zip(alphas)
            .map(|(s, &a)| DetectorConfig::new(s.theta_ref, a, slot_length))
            .collect::<Result<Vec<_>>>()?;
        Ok(SlotEngine {
            setups,
            detectors,
            slot_length,
        })
    }

    pub fn receivers(&self) -> usize {
        self.setups.len()
    }

    pub fn setups(&self) -> &[ReceiverSetup] {
        &self.setups
    }

    pub fn detectors(&self) -> &[DetectorConfig] {
        &self.detectors
    }

    /// Simulates every receiver's observation for one slot and returns the
    /// local decisions. Estimates are sample means of `T` exponential
    /// spectral samples drawn with mean `Θ_a` (H0) or `β·Θ_a` (H1).
    pub fn decisions(&self, hypothesis: Hypothesis, slot_seed: u64) -> DecisionVector {
        let mut rng = ChaCha8Rng::seed_from_u64(slot_seed);
        let t = self.slot_length as f64;
        let bits = self
            .setups
            .iter()
            .zip(&self.detectors)
            .map(|(s, cfg)| {
                let theta = s.theta_under(hypothesis);
                let mut sum = 0.0;
                for _ in 0..self.slot_length {
                    sum += exponential_sample(theta, &mut rng);
                }
                decide(sum / t, cfg)
            })
            .collect();
        DecisionVector::new(bits).expect("non-empty receiver set")
    }

    /// One slot of the full flow: local decisions then fusion.
    pub fn run_slot(&self, hypothesis: Hypothesis, slot_seed: u64, rule: &FusionRule) -> Result<(DecisionVector, bool)> {
        let d = self.decisions(hypothesis, slot_seed);
        let verdict = fuse(&d, rule)?;
        Ok((d, verdict))
    }

    /// Histogram of positive-decision counts over `trials` slots whose seeds
    /// are `seed ^ (first_index + k)`.
    pub fn positives_histogram(&self, hypothesis: Hypothesis, seed: u64, first_index: u64, trials: u64) -> Vec<u64> {
        let n = self.receivers();
        (0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; n + 1],
                |mut hist, k| {
                    let d = self.decisions(hypothesis, seed ^ (first_index + k));
                    hist[d.positives()] += 1;
                    hist
                },
            )
            .reduce(
                || vec![0u64; n + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

/// Slot seed for slot `index` under `hypothesis` in a run of `trials` slots.
pub fn slot_seed(seed: u64, hypothesis: Hypothesis, index: u64, trials: u64) -> u64 {
    match hypothesis {
        Hypothesis::Legitimate => seed ^ index,
        Hypothesis::Spoofed => seed ^ (trials + index),
    }
}

/// Scenario with its thresholds resolved.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub scenario: Scenario,
    pub thresholds: Vec<ThresholdOptimum>,
    pub engine: SlotEngine,
}

impl PreparedExperiment {
    /// Optimizes every receiver's threshold.
    pub fn new(scn: &Scenario) -> Result<Self> {
        scn.validate()?;
        let setups = receiver_setups(scn)?;
        let thresholds = optimize_thresholds(&setups, scn.slot_length)?;
        let alphas: Vec<f64> = thresholds.iter().map(|t| t.alpha).collect();
        let engine = SlotEngine::new(setups, &alphas, scn.slot_length)?;
        Ok(PreparedExperiment {
            scenario: scn.clone(),
            thresholds,
            engine,
        })
    }

    /// Uses caller-provided threshold coefficients instead of optimizing.
    pub fn with_alphas(scn: &Scenario, alphas: &[f64]) -> Result<Self> {
        scn.validate()?;
        let setups = receiver_setups(scn)?;
        let engine = SlotEngine::new(setups.clone(), alphas, scn.slot_length)?;
        let thresholds = setups
            .iter()
            .zip(alphas)
            .map(|(s, &a)| {
                let pd = crate::detection::p_detect(a, s.beta, scn.slot_length)?;
                let pf = crate::detection::p_false_alarm(a, scn.slot_length)?;
                Ok(ThresholdOptimum {
                    alpha: a,
                    objective: pf + 1.0 - pd,
                    p_detect: pd,
                    p_false_alarm: pf,
                    prescan_disagreement: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedExperiment {
            scenario: scn.clone(),
            thresholds,
            engine,
        })
    }

    /// One slot under the scenario's fusion rule.
    pub fn run_slot(&self, hypothesis: Hypothesis, slot_seed: u64) -> Result<(DecisionVector, bool)> {
        self.engine.run_slot(hypothesis, slot_seed, &self.scenario.fusion)
    }

    /// The three rules reported for this scenario; the majority quorum follows
    /// the scenario when it specifies one.
    pub fn reported_rules(&self) -> [FusionRule; 3] {
        let majority = match self.scenario.fusion {
            m @ FusionRule::Majority { .. } => m,
            _ => FusionRule::majority(),
        };
        [FusionRule::Or, FusionRule::And, majority]
    }

    pub fn analytic(&self, rule: &FusionRule) -> Result<JointProbabilities> {
        let pd: Vec<f64> = self.thresholds.iter().map(|t| t.p_detect).collect();
        let pf: Vec<f64> = self.thresholds.iter().map(|t| t.p_false_alarm).collect();
        joint_probabilities(&pd, &pf, rule)
    }

    /// Runs the Monte Carlo slots and assembles the result.
    pub fn run(&self, opts: &RunOptions) -> Result<ExperimentResult> {
        let scn = &self.scenario;
        let trials = scn.trials;
        let simulate = || {
            (
                self.engine
                    .positives_histogram(Hypothesis::Legitimate, scn.seed, 0, trials),
                self.engine
                    .positives_histogram(Hypothesis::Spoofed, scn.seed, trials, trials),
            )
        };
        let (h0, h1) = match opts.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| PlaError::arg(format!("thread pool: {e}")))?
                .install(simulate),
            None => simulate(),
        };

        let n = self.engine.receivers();
        let mut rules = Vec::new();
        for rule in self.reported_rules() {
            let q = rule.quorum_for(n)?;
            let detections: u64 = h1[q..].iter().sum();
            let false_alarms: u64 = h0[q..].iter().sum();
            rules.push(RuleResult {
                rule: rule.name().to_string(),
                quorum: q,
                analytic: self.analytic(&rule)?,
                empirical: EmpiricalRates {
                    p_detect: detections as f64 / trials as f64,
                    p_false_alarm: false_alarms as f64 / trials as f64,
                    detections,
                    false_alarms,
                    trials,
                },
            });
        }

        let per_satellite = self
            .engine
            .setups()
            .iter()
            .zip(&self.thresholds)
            .enumerate()
            .map(|(index, (s, t))| SatelliteResult {
                index,
                theta_ref: s.theta_ref,
                beta: s.beta,
                alpha: t.alpha,
                p_detect: t.p_detect,
                p_false_alarm: t.p_false_alarm,
                objective: t.objective,
            })
            .collect();

        Ok(ExperimentResult {
            schema_version: RESULT_SCHEMA_VERSION,
            metadata: Metadata {
                seed: scn.seed,
                config_hash: scn.config_hash(),
                trials,
                slot_length: scn.slot_length,
                receivers: n,
                primary_rule: scn.fusion.to_string(),
                timestamp: opts.timestamp.clone(),
                generator: concat!("leo-pla ", env!("CARGO_PKG_VERSION")).to_string(),
            },
            per_satellite,
            rules,
            positives_histogram_h0: h0,
            positives_histogram_h1: h1,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Optional provenance timestamp. Left out by default so repeated runs
    /// produce identical files.
    pub timestamp: Option<String>,
}

/// Optimizes thresholds and runs the scenario's Monte Carlo experiment.
pub fn run_experiment(scn: &Scenario, opts: &RunOptions) -> Result<ExperimentResult> {
    PreparedExperiment::new(scn)?.run(opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub config_hash: String,
    pub trials: u64,
    pub slot_length: usize,
    pub receivers: usize,
    pub primary_rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteResult {
    pub index: usize,
    pub theta_ref: f64,
    pub beta: f64,
    pub alpha: f64,
    pub p_detect: f64,
    pub p_false_alarm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRates {
    pub p_detect: f64,
    pub p_false_alarm: f64,
    pub detections: u64,
    pub false_alarms: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleResult {
    pub rule: String,
    pub quorum: usize,
    pub analytic: JointProbabilities,
    pub empirical: EmpiricalRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub per_satellite: Vec<SatelliteResult>,
    pub rules: Vec<RuleResult>,
    /// Slot counts by number of positive local decisions, legitimate slots.
    pub positives_histogram_h0: Vec<u64>,
    /// Same for spoofed slots.
    pub positives_histogram_h1: Vec<u64>,
}

/// `|p̂ − p| ≤ k·√(p(1−p)/n)`.
pub fn within_binomial_band(empirical: f64, analytic: f64, trials: u64, k_sigma: f64) -> bool {
    let sd = (analytic * (1.0 - analytic) / trials as f64).sqrt();
    (empirical - analytic).abs() <= k_sigma * sd
}

impl ExperimentResult {
    /// Joint quantities whose empirical rate falls outside a `k_sigma`
    /// binomial band around the analytic value, as `(rule, quantity)`.
    pub fn closure_violations(&self, k_sigma: f64) -> Vec<(String, &'static str)> {
        let mut out = Vec::new();
        for r in &self.rules {
            let n = r.empirical.trials;
            if !within_binomial_band(r.empirical.p_detect, r.analytic.p_detect_joint, n, k_sigma) {
                out.push((r.rule.clone(), "p_detect"));
            }
            if !within_binomial_band(r.empirical.p_false_alarm, r.analytic.p_false_alarm_joint, n, k_sigma) {
                out.push((r.rule.clone(), "p_false_alarm"));
            }
        }
        out
    }

    pub fn rule(&self, name: &str) -> Option<&RuleResult> {
        self.rules.iter().find(|r| r.rule == name)
    }
}
