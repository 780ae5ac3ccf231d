use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::error::{PlaError, Result};
use crate::geometry::{is_identifiable, DopplerObservation, Identifiability, IdentifiabilityOptions, MIN_OBSERVERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverDoppler {
    pub index: usize,
    pub alice: DopplerObservation,
    pub eve: DopplerObservation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    pub carrier_hz: f64,
    pub cond_threshold: f64,
    pub receivers: Vec<ReceiverDoppler>,
    pub alice: Identifiability,
    pub eve: Identifiability,
    /// `max_i |f_a,i − f_s,i|`, m/s.
    pub max_nominal_difference: f64,
    /// Alice and Eve produce the same Doppler at every receiver.
    pub fingerprint_collision: bool,
}

/// Doppler fingerprints of Alice and Eve at every receiver plus the
/// identifiability test for both transmitters.
pub fn identifiability_report(scn: &Scenario, cond_threshold: f64) -> Result<IdentifiabilityReport> {
    if scn.receivers.len() < MIN_OBSERVERS {
        return Err(PlaError::InsufficientObservers {
            required: MIN_OBSERVERS,
            got: scn.receivers.len(),
        });
    }
    let opts = IdentifiabilityOptions {
        cond_threshold,
        seed: scn.seed,
        ..IdentifiabilityOptions::default()
    };
    let receivers = scn
        .receivers
        .iter()
        .enumerate()
        .map(|(index, rx)| {
            Ok(ReceiverDoppler {
                index,
                alice: DopplerObservation::observe(&scn.alice, rx, scn.carrier_hz)?,
                eve: DopplerObservation::observe(&scn.eve, rx, scn.carrier_hz)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_nominal_difference = receivers
        .iter()
        .map(|r| (r.alice.nominal_doppler - r.eve.nominal_doppler).abs())
        .fold(0.0, f64::max);
    Ok(IdentifiabilityReport {
        carrier_hz: scn.carrier_hz,
        cond_threshold,
        alice: is_identifiable(&scn.alice, &scn.receivers, &opts)?,
        eve: is_identifiable(&scn.eve, &scn.receivers, &opts)?,
        fingerprint_collision: max_nominal_difference == 0.0,
        max_nominal_difference,
        receivers,
    })
}
