//! Doppler observations from transmitter/receiver kinematics.
//!
//! Positions are in meters, velocities in m/s. The *nominal Doppler* of a
//! link is its range rate in m/s (the projection of the relative velocity on
//! the line of sight); the *Doppler shift* is that range rate converted to Hz
//! at a given carrier frequency.
//!
//! A transmitter observed by six receivers yields a 6×6 Jacobian of the
//! nominal-Doppler vector with respect to the transmitter's position and
//! velocity. When that Jacobian is well conditioned the kinematic state is
//! locally recoverable from the observations, so a spoofer with different
//! kinematics cannot reproduce every receiver's Doppler at once.

use nalgebra::{Matrix6, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlaError, Result};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Number of receivers whose observations pin down the six kinematic unknowns.
pub const MIN_OBSERVERS: usize = 6;

/// Default singular-value condition bound used by the identifiability test.
pub const DEFAULT_COND_THRESHOLD: f64 = 1e8;

/// Position (m) and velocity (m/s) of one satellite in Cartesian 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

impl SatelliteState {
    pub fn new(position: [f64; 3], velocity: [f64; 3]) -> Self {
        SatelliteState {
            position: Vector3::from(position),
            velocity: Vector3::from(velocity),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|c| c.is_finite())
    }

    /// Checks every component is finite, reporting the first bad one under `path`.
    pub fn validate(&self, path: &str) -> Result<()> {
        for (name, v) in [("position", &self.position), ("velocity", &self.velocity)] {
            for (k, c) in v.iter().enumerate() {
                if !c.is_finite() {
                    return Err(PlaError::config(
                        format!("{path}.{name}[{k}]"),
                        format!("component must be finite, got {c}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Range rate and corresponding Doppler shift seen by one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerObservation {
    /// Range rate, m/s.
    pub nominal_doppler: f64,
    /// Doppler shift at the carrier, Hz.
    pub doppler_shift: f64,
}

impl DopplerObservation {
    pub fn observe(tx: &SatelliteState, rx: &SatelliteState, carrier_hz: f64) -> Result<Self> {
        let nominal_doppler = nominal_doppler(tx, rx)?;
        Ok(DopplerObservation {
            nominal_doppler,
            doppler_shift: to_doppler_shift(nominal_doppler, carrier_hz)?,
        })
    }
}

fn line_of_sight(tx: &SatelliteState, rx: &SatelliteState) -> Result<(Vector3<f64>, f64)> {
    let d = tx.position - rx.position;
    let r = d.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(PlaError::domain(
            "transmitter and receiver positions coincide (zero line-of-sight distance)",
        ));
    }
    Ok((d, r))
}

/// Range rate `(v_t − v_r)ᵀ(p_t − p_r) / ‖p_t − p_r‖`, in m/s.
pub fn nominal_doppler(tx: &SatelliteState, rx: &SatelliteState) -> Result<f64> {
    let (d, r) = line_of_sight(tx, rx)?;
    Ok((tx.velocity - rx.velocity).dot(&d) / r)
}

/// Converts a range rate (m/s) to a Doppler shift (Hz) at `carrier_hz`.
pub fn to_doppler_shift(nominal_doppler: f64, carrier_hz: f64) -> Result<f64> {
    if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
        return Err(PlaError::domain(format!(
            "carrier frequency must be positive and finite, got {carrier_hz}"
        )));
    }
    Ok(nominal_doppler * carrier_hz / SPEED_OF_LIGHT)
}

/// Jacobian of the six-receiver nominal-Doppler vector.
///
/// Row `i` belongs to receiver `i`; columns are the partials with respect to
/// the transmitter's `(p1, p2, p3, v1, v2, v3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerJacobian {
    pub entries: Matrix6<f64>,
}

impl DopplerJacobian {
    /// Ratio of largest to smallest singular value; `+∞` when singular.
    pub fn condition_number(&self) -> f64 {
        let sv = self.entries.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 0.0 || !min.is_finite() {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// One Jacobian row: partials of a single receiver's range rate.
///
/// The position partials use the *relative* velocity `u = v_t − v_r`, which
/// keeps them consistent with [`nominal_doppler`] for moving receivers:
///
/// `∂f/∂p_c = [u_c · Σ_{C≠c} d_C² − d_c · Σ_{C≠c} u_C d_C] / ‖d‖³`,
/// `∂f/∂v_c = d_c / ‖d‖`, with `d = p_t − p_r`.
pub fn doppler_gradient(tx: &SatelliteState, rx: &SatelliteState) -> Result<[f64; 6]> {
    let (d, r) = line_of_sight(tx, rx)?;
    let u = tx.velocity - rx.velocity;
    let r3 = r * r * r;
    let mut row = [0.0; 6];
    for c in 0..3 {
        let mut cross = 0.0;
        let mut others_sq = 0.0;
        for k in (0..3).filter(|&k| k != c) {
            cross += u[k] * d[k];
            others_sq += d[k] * d[k];
        }
        row[c] = (cross * -d[c] + u[c] * others_sq) / r3;
        row[c + 3] = d[c] / r;
    }
    Ok(row)
}

/// Assembles the analytic 6×6 Jacobian for exactly six receivers.
pub fn doppler_jacobian(tx: &SatelliteState, rxs: &[SatelliteState]) -> Result<DopplerJacobian> {
    if rxs.len() != MIN_OBSERVERS {
        return Err(PlaError::arg(format!(
            "Jacobian needs exactly {MIN_OBSERVERS} receivers, got {}",
            rxs.len()
        )));
    }
    let mut entries = Matrix6::zeros();
    for (i, rx) in rxs.iter().enumerate() {
        let row = doppler_gradient(tx, rx)?;
        for (j, v) in row.iter().enumerate() {
            entries[(i, j)] = *v;
        }
    }
    Ok(DopplerJacobian { entries })
}

/// Knobs for [`is_identifiable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifiabilityOptions {
    /// A subset counts as identifying when its condition number is below this.
    pub cond_threshold: f64,
    /// Exhaustive subset search up to this many receivers.
    pub exhaustive_limit: usize,
    /// Number of random 6-subsets drawn above `exhaustive_limit`.
    pub random_subsets: usize,
    pub seed: u64,
}

impl Default for IdentifiabilityOptions {
    fn default() -> Self {
        IdentifiabilityOptions {
            cond_threshold: DEFAULT_COND_THRESHOLD,
            exhaustive_limit: 10,
            random_subsets: 200,
            seed: 0,
        }
    }
}

/// Precondition failures detected before any matrix work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionViolation {
    /// Transmitter velocity is zero; the Jacobian is singular for any geometry.
    StationaryTransmitter,
}

/// Outcome of the identifiability test with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identifiability {
    pub identifiable: bool,
    /// Best (smallest) condition number found; absent when a precondition failed.
    pub condition: Option<f64>,
    /// Receiver indices of the best 6-subset.
    pub subset: Option<[usize; 6]>,
    pub subsets_tested: usize,
    pub violation: Option<PreconditionViolation>,
}

fn combinations6(n: usize) -> Vec<[usize; 6]> {
    let mut out = Vec::new();
    let mut idx = [0, 1, 2, 3, 4, 5];
    if n < 6 {
        return out;
    }
    loop {
        out.push(idx);
        // advance to next lexicographic combination
        let mut i = 6;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - 6 + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..6 {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Tests whether `tx` is locally identifiable from the receivers' Doppler.
///
/// Some 6-receiver subset must give a Jacobian with condition number below
/// `opts.cond_threshold`. A zero transmitter velocity is reported as a
/// precondition violation and is never identifiable.
pub fn is_identifiable(
    tx: &SatelliteState,
    rxs: &[SatelliteState],
    opts: &IdentifiabilityOptions,
) -> Result<Identifiability> {
    if rxs.len() < MIN_OBSERVERS {
        return Err(PlaError::InsufficientObservers {
            required: MIN_OBSERVERS,
            got: rxs.len(),
        });
    }
    if !(opts.cond_threshold > 1.0) {
        return Err(PlaError::arg(format!(
            "condition threshold must exceed 1, got {}",
            opts.cond_threshold
        )));
    }
    if tx.velocity.norm() == 0.0 {
        return Ok(Identifiability {
            identifiable: false,
            condition: None,
            subset: None,
            subsets_tested: 0,
            violation: Some(PreconditionViolation::StationaryTransmitter),
        });
    }

    let subsets = if rxs.len() <= opts.exhaustive_limit {
        combinations6(rxs.len())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.random_subsets.max(1))
            .map(|_| {
                let mut s = [0usize; 6];
                for (slot, i) in s.iter_mut().zip(sample(&mut rng, rxs.len(), 6)) {
                    *slot = i;
                }
                s.sort_unstable();
                s
            })
            .collect()
    };

    let mut best: Option<(f64, [usize; 6])> = None;
    for subset in &subsets {
        let chosen: Vec<SatelliteState> = subset.iter().map(|&i| rxs[i]).collect();
        let cond = doppler_jacobian(tx, &chosen)?.condition_number();
        if best.is_none_or(|(c, _)| cond < c) {
            best = Some((cond, *subset));
        }
    }
    let (cond, subset) = best.expect("at least one subset");
    Ok(Identifiability {
        identifiable: cond < opts.cond_threshold,
        condition: Some(cond),
        subset: Some(subset),
        subsets_tested: subsets.len(),
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(p: [f64; 3], v: [f64; 3]) -> SatelliteState {
        SatelliteState::new(p, v)
    }

    #[test]
    fn radial_approach_gives_negative_speed() {
        let tx = st([5.0e5, 0.0, 0.0], [-3000.0, 0.0, 0.0]);
        let rx = st([0.0; 3], [0.0; 3]);
        assert_eq!(nominal_doppler(&tx, &rx).unwrap(), -3000.0);
    }

    #[test]
    fn equal_velocities_give_zero() {
        let tx = st([1.0, 2.0, 3.0], [10.0, -4.0, 7.0]);
        let rx = st([-8.0, 5.0, 0.5], [10.0, -4.0, 7.0]);
        assert_eq!(nominal_doppler(&tx, &rx).unwrap(), 0.0);
    }

    #[test]
    fn opposing_tangential_pair() {
        // d = (0, 2e6, 0), u = (0, 15000, 0): range rate is the full 15 km/s.
        let tx = st([7.0e6, 1.0e6, 0.0], [0.0, 7500.0, 0.0]);
        let rx = st([7.0e6, -1.0e6, 0.0], [0.0, -7500.0, 0.0]);
        assert_eq!(nominal_doppler(&tx, &rx).unwrap(), 15000.0);
    }

    #[test]
    fn coincident_positions_rejected() {
        let tx = st([1.0, 1.0, 1.0], [1.0, 0.0, 0.0]);
        let rx = st([1.0, 1.0, 1.0], [0.0; 3]);
        assert!(matches!(nominal_doppler(&tx, &rx), Err(PlaError::Domain(_))));
    }

    #[test]
    fn doppler_shift_conversion() {
        assert_eq!(to_doppler_shift(0.0, 2.4e9).unwrap(), 0.0);
        assert_eq!(to_doppler_shift(SPEED_OF_LIGHT, 1.0).unwrap(), 1.0);
        // high-precision decimal evaluation: -650449.98563639649667...
        let w = to_doppler_shift(-7500.0, 26e9).unwrap();
        assert!((w - -650_449.985_636_396_5).abs() < 1e-8);
        assert!(to_doppler_shift(1.0, 0.0).is_err());
        assert!(to_doppler_shift(1.0, -5.0).is_err());
    }

    #[test]
    fn axis_aligned_velocity_partials() {
        let tx = st([2.0, 0.0, 0.0], [0.3, -1.0, 4.0]);
        let rx = st([0.0; 3], [9.0, 1.0, -2.0]);
        let g = doppler_gradient(&tx, &rx).unwrap();
        assert_eq!(&g[3..], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn jacobian_requires_six_receivers() {
        let tx = st([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let rxs = vec![st([0.0; 3], [0.0; 3]); 5];
        assert!(matches!(doppler_jacobian(&tx, &rxs), Err(PlaError::Argument(_))));
    }

    #[test]
    fn combination_count() {
        assert_eq!(combinations6(6).len(), 1);
        assert_eq!(combinations6(7).len(), 7);
        assert_eq!(combinations6(10).len(), 210);
        let all = combinations6(8);
        assert_eq!(all.last().unwrap(), &[2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn stationary_transmitter_flagged() {
        let tx = st([7.0e6, 0.0, 0.0], [0.0; 3]);
        let rxs: Vec<_> = (0..6)
            .map(|i| st([0.0, 1.0e6 * i as f64 + 1.0, 2.0e5], [100.0, 0.0, 0.0]))
            .collect();
        let r = is_identifiable(&tx, &rxs, &IdentifiabilityOptions::default()).unwrap();
        assert!(!r.identifiable);
        assert_eq!(r.violation, Some(PreconditionViolation::StationaryTransmitter));
        assert_eq!(r.subsets_tested, 0);
    }

    #[test]
    fn duplicated_receivers_not_identifiable() {
        let tx = st([7.0e6, 0.0, 0.0], [0.0, 7500.0, 10.0]);
        let rxs = vec![st([6.0e6, 1.0e6, 3.0e5], [0.0, -7000.0, 50.0]); 6];
        let r = is_identifiable(&tx, &rxs, &IdentifiabilityOptions::default()).unwrap();
        assert!(!r.identifiable);
    }

    #[test]
    fn too_few_observers() {
        let tx = st([7.0e6, 0.0, 0.0], [0.0, 7500.0, 0.0]);
        let rxs = vec![st([0.0; 3], [0.0; 3]); 5];
        let err = is_identifiable(&tx, &rxs, &IdentifiabilityOptions::default()).unwrap_err();
        assert!(matches!(err, PlaError::InsufficientObservers { required: 6, got: 5 }));
    }

    #[test]
    fn state_serializes_as_arrays() {
        let s = st([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"position":[1.0,2.0,3.0],"velocity":[4.0,5.0,6.0]}"#);
    }
}
