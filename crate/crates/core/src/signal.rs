//! Spectral observations under either hypothesis.
//!
//! Two generators are provided. The statistical path draws the `T` power
//! spectrum samples directly as i.i.d. exponentials with mean `Θ`; every
//! closed-form result in [`crate::detection`] assumes exactly this model. The
//! waveform path builds a Doppler-rotated, faded complex Gaussian message plus
//! AWGN and takes its DFT, and is used to cross-check the statistical model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{PlaError, Result};

/// Relative tolerance on the table-mean normalization check.
const NORMALIZATION_TOL: f64 = 1e-9;

/// Nominal (a-priori known) PSD of the message, periodic in `period`, plus
/// the channel gain and noise floor needed to turn a Doppler shift into an
/// NPSDS value.
///
/// The shape is tabulated at offsets in `[0, period)` and linearly
/// interpolated with wrap-around. Its mean over one period equals
/// `signal_variance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NominalPsd {
    offsets: Vec<f64>,
    values: Vec<f64>,
    period: f64,
    noise_floor: f64,
    signal_variance: f64,
    channel_power: f64,
}

impl NominalPsd {
    /// Builds a PSD from a tabulated shape and checks its normalization.
    pub fn new(
        table: Vec<(f64, f64)>,
        period: f64,
        signal_variance: f64,
        channel_power: f64,
        noise_floor: f64,
    ) -> Result<Self> {
        if !(signal_variance >= 0.0) || !signal_variance.is_finite() {
            return Err(PlaError::config(
                "psd.signal_variance",
                format!("must be non-negative, got {signal_variance}"),
            ));
        }
        let psd = NominalPsd::from_shape(table, period, channel_power, noise_floor)?;
        let mean = psd.signal_variance;
        if (mean - signal_variance).abs() > NORMALIZATION_TOL * signal_variance.max(1.0) {
            return Err(PlaError::config(
                "psd.signal_variance",
                format!("table mean {mean} does not match signal variance {signal_variance}"),
            ));
        }
        Ok(psd)
    }

    /// Like [`NominalPsd::new`] but rescales the table so its mean equals
    /// `signal_variance`.
    pub fn normalized(
        table: Vec<(f64, f64)>,
        period: f64,
        signal_variance: f64,
        channel_power: f64,
        noise_floor: f64,
    ) -> Result<Self> {
        let mut psd = NominalPsd::from_shape(table, period, channel_power, noise_floor)?;
        if !(psd.signal_variance > 0.0) {
            return Err(PlaError::config("psd.table", "shape has zero mean and cannot be normalized"));
        }
        if !(signal_variance >= 0.0) || !signal_variance.is_finite() {
            return Err(PlaError::config(
                "psd.signal_variance",
                format!("must be non-negative, got {signal_variance}"),
            ));
        }
        let scale = signal_variance / psd.signal_variance;
        psd.values.iter_mut().for_each(|v| *v *= scale);
        psd.signal_variance = signal_variance;
        Ok(psd)
    }

    /// Validates the table; the signal variance is taken from its mean.
    pub fn from_shape(
        table: Vec<(f64, f64)>,
        period: f64,
        channel_power: f64,
        noise_floor: f64,
    ) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(PlaError::config("psd.period", format!("must be positive, got {period}")));
        }
        if !(noise_floor >= 0.0) || !noise_floor.is_finite() {
            return Err(PlaError::config(
                "psd.noise_floor",
                format!("must be non-negative, got {noise_floor}"),
            ));
        }
        if !(channel_power > 0.0) || !channel_power.is_finite() {
            return Err(PlaError::config(
                "psd.channel_power",
                format!("must be positive, got {channel_power}"),
            ));
        }
        if table.is_empty() {
            return Err(PlaError::config("psd.table", "needs at least one point"));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, &(f, v)) in table.iter().enumerate() {
            if !(f >= 0.0 && f < period) {
                return Err(PlaError::config(
                    format!("psd.table[{i}].offset"),
                    format!("must lie in [0, {period}), got {f}"),
                ));
            }
            if f <= prev {
                return Err(PlaError::config(
                    format!("psd.table[{i}].offset"),
                    "offsets must be strictly increasing",
                ));
            }
            if !(v >= 0.0) || !v.is_finite() {
                return Err(PlaError::config(
                    format!("psd.table[{i}].power"),
                    format!("must be non-negative and finite, got {v}"),
                ));
            }
            prev = f;
        }
        let (offsets, values): (Vec<f64>, Vec<f64>) = table.into_iter().unzip();
        let mut psd = NominalPsd {
            offsets,
            values,
            period,
            noise_floor,
            signal_variance: 0.0,
            channel_power,
        };
        psd.signal_variance = psd.shape_mean();
        if !psd.signal_variance.is_finite() {
            return Err(PlaError::config("psd.table", "shape mean is not finite"));
        }
        Ok(psd)
    }

    /// Flat shape `A^x ≡ σ_m²`; Doppler-insensitive.
    pub fn flat(signal_variance: f64, channel_power: f64, noise_floor: f64, period: f64) -> Result<Self> {
        NominalPsd::new(vec![(0.0, signal_variance)], period, signal_variance, channel_power, noise_floor)
    }

    /// Triangle peaking at offset 0 and vanishing at half a period, sampled at
    /// `points` uniform offsets (`points` even, ≥ 2) and scaled to mean `σ_m²`.
    pub fn triangular(
        signal_variance: f64,
        channel_power: f64,
        noise_floor: f64,
        period: f64,
        points: usize,
    ) -> Result<Self> {
        if points < 2 || !points.is_multiple_of(2) {
            return Err(PlaError::config("psd.points", format!("must be even and >= 2, got {points}")));
        }
        let peak = 2.0 * signal_variance;
        let table = (0..points)
            .map(|k| {
                let u = k as f64 / points as f64;
                let dist = u.min(1.0 - u);
                (u * period, peak * (1.0 - 2.0 * dist))
            })
            .collect();
        NominalPsd::new(table, period, signal_variance, channel_power, noise_floor)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn channel_power(&self) -> f64 {
        self.channel_power
    }

    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.offsets.iter().copied().zip(self.values.iter().copied())
    }

    /// Same shape with a different noise floor.
    pub fn with_noise_floor(mut self, noise_floor: f64) -> Result<Self> {
        if !(noise_floor >= 0.0) || !noise_floor.is_finite() {
            return Err(PlaError::config(
                "psd.noise_floor",
                format!("must be non-negative, got {noise_floor}"),
            ));
        }
        self.noise_floor = noise_floor;
        Ok(self)
    }

    /// Exact mean of the periodic piecewise-linear interpolant over one period.
    fn shape_mean(&self) -> f64 {
        let n = self.offsets.len();
        if n == 1 {
            return self.values[0];
        }
        let mut area = 0.0;
        for i in 0..n {
            let (f0, v0) = (self.offsets[i], self.values[i]);
            let (f1, v1) = if i + 1 < n {
                (self.offsets[i + 1], self.values[i + 1])
            } else {
                (self.offsets[0] + self.period, self.values[0])
            };
            area += 0.5 * (v0 + v1) * (f1 - f0);
        }
        area / self.period
    }

    /// Shape value `A^x(f)`, wrapping `f` into `[0, period)`.
    pub fn shape_at(&self, f: f64) -> f64 {
        let mut x = f.rem_euclid(self.period);
        if x >= self.period {
            x = 0.0;
        }
        let n = self.offsets.len();
        if n == 1 {
            return self.values[0];
        }
        // first offset strictly greater than x
        let hi = self.offsets.partition_point(|&o| o <= x);
        let (f0, v0, f1, v1) = match hi {
            0 => (
                self.offsets[n - 1] - self.period,
                self.values[n - 1],
                self.offsets[0],
                self.values[0],
            ),
            k if k == n => (
                self.offsets[n - 1],
                self.values[n - 1],
                self.offsets[0] + self.period,
                self.values[0],
            ),
            k => (self.offsets[k - 1], self.values[k - 1], self.offsets[k], self.values[k]),
        };
        if x == f0 {
            return v0;
        }
        v0 + (v1 - v0) * (x - f0) / (f1 - f0)
    }
}

/// Expected power-spectrum sample (NPSDS) for a link with Doppler shift
/// `omega_hz`: `l·A^x((−ω) mod Δf) + A^n`. Independent of the bin index
/// because the shape is periodic in the bin spacing.
pub fn npsds_theoretical(psd: &NominalPsd, omega_hz: f64) -> f64 {
    psd.channel_power * psd.shape_at(-omega_hz) + psd.noise_floor
}

/// Parses a two-column CSV table `frequency_offset,power`. A single
/// non-numeric header row is skipped.
pub fn parse_psd_table(data: &[u8]) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(data);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| PlaError::Parse(format!("psd table: {e}")))?;
        if record.len() != 2 {
            return Err(PlaError::Parse(format!(
                "psd table row {}: expected 2 columns, got {}",
                line + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(f), Ok(p)) => {
                if !f.is_finite() || !p.is_finite() {
                    return Err(PlaError::Parse(format!("psd table row {}: non-finite value", line + 1)));
                }
                rows.push((f, p));
            }
            _ if line == 0 => continue,
            _ => {
                return Err(PlaError::Parse(format!(
                    "psd table row {}: cannot parse `{}`,`{}` as numbers",
                    line + 1,
                    &record[0],
                    &record[1]
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(PlaError::Parse("psd table has no data rows".into()));
    }
    Ok(rows)
}

/// LoS channel of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Mean channel power `l` (dimensionless gain).
    pub channel_power: f64,
    /// Doppler shift ω, Hz.
    pub doppler_shift: f64,
    /// cos of the angle of arrival.
    pub aoa_cos: f64,
    /// LoS phase Φ, radians.
    pub phase: f64,
}

impl ChannelParams {
    pub fn new(channel_power: f64, doppler_shift: f64, aoa_cos: f64, phase: f64) -> Result<Self> {
        if !(channel_power > 0.0) || !channel_power.is_finite() {
            return Err(PlaError::arg(format!("channel power must be positive, got {channel_power}")));
        }
        if !doppler_shift.is_finite() {
            return Err(PlaError::arg("Doppler shift must be finite"));
        }
        if !(-1.0..=1.0).contains(&aoa_cos) {
            return Err(PlaError::arg(format!("aoa_cos must lie in [-1, 1], got {aoa_cos}")));
        }
        if !(0.0..2.0 * PI).contains(&phase) {
            return Err(PlaError::arg(format!("phase must lie in [0, 2π), got {phase}")));
        }
        Ok(ChannelParams {
            channel_power,
            doppler_shift,
            aoa_cos,
            phase,
        })
    }

    /// Boresight, zero-phase channel.
    pub fn boresight(channel_power: f64, doppler_shift: f64) -> Result<Self> {
        ChannelParams::new(channel_power, doppler_shift, 1.0, 0.0)
    }
}

/// The `T` power-spectrum samples of one receiver in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralObservation {
    samples: Vec<f64>,
}

impl SpectralObservation {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(PlaError::arg("observation needs at least one sample"));
        }
        if let Some(bad) = samples.iter().find(|s| !(**s >= 0.0)) {
            return Err(PlaError::arg(format!("spectral samples must be non-negative, got {bad}")));
        }
        Ok(SpectralObservation { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn slot_length(&self) -> usize {
        self.samples.len()
    }
}

/// Exponential(θ) draw by inversion; `u ∈ (0, 1]` keeps the log finite.
#[inline]
pub(crate) fn exponential_sample<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    theta * -u.ln()
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(PlaError::domain(format!("NPSDS must be positive and finite, got {theta}")));
    }
    Ok(())
}

/// Statistical path with a caller-owned RNG.
pub fn draw_observation<R: Rng + ?Sized>(theta: f64, slot_length: usize, rng: &mut R) -> Result<SpectralObservation> {
    check_theta(theta)?;
    if slot_length == 0 {
        return Err(PlaError::arg("slot length must be at least 1"));
    }
    let samples = (0..slot_length).map(|_| exponential_sample(theta, rng)).collect();
    Ok(SpectralObservation { samples })
}

/// `T` i.i.d. exponential spectrum samples with mean `theta`, seeded.
pub fn simulate_observation_statistical(theta: f64, slot_length: usize, seed: u64) -> Result<SpectralObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_observation(theta, slot_length, &mut rng)
}

fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex<f64> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

/// Waveform path: shaped complex Gaussian message through the LoS channel
/// plus complex AWGN, then a unitary length-`T` DFT and squared magnitudes.
///
/// The sample rate equals the PSD period, so DFT bin `k` sits at
/// `k·period/T`; the message is shaped by multiplying its spectrum by
/// `√(A^x/mean A^x)` per bin. The noise draw is referenced to the LoS phase,
/// which leaves its (circularly symmetric) law unchanged and makes the
/// output depend on `Φ` only through rounding.
pub fn simulate_observation_waveform(
    msg_variance: f64,
    shaping: &NominalPsd,
    ch: &ChannelParams,
    noise_variance: f64,
    slot_length: usize,
    seed: u64,
) -> Result<SpectralObservation> {
    if slot_length < 2 {
        return Err(PlaError::arg(format!("waveform path needs T >= 2, got {slot_length}")));
    }
    if !(msg_variance >= 0.0) || !(noise_variance >= 0.0) || msg_variance + noise_variance <= 0.0 {
        return Err(PlaError::arg(format!(
            "variances must be non-negative and not both zero (message {msg_variance}, noise {noise_variance})"
        )));
    }
    let t = slot_length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(t);
    let ifft = planner.plan_fft_inverse(t);

    let mut msg: Vec<Complex<f64>> = (0..t).map(|_| complex_gaussian(msg_variance, &mut rng)).collect();
    let mean_shape = shaping.signal_variance();
    if mean_shape > 0.0 {
        fft.process(&mut msg);
        for (k, m) in msg.iter_mut().enumerate() {
            let f = k as f64 * shaping.period() / t as f64;
            *m *= (shaping.shape_at(f) / mean_shape).sqrt();
        }
        ifft.process(&mut msg);
        let norm = 1.0 / t as f64;
        msg.iter_mut().for_each(|m| *m *= norm);
    }

    let gain = ch.channel_power.sqrt();
    let fs = shaping.period();
    let rot = 2.0 * PI * ch.doppler_shift * ch.aoa_cos / fs;
    let los = Complex::from_polar(1.0, ch.phase);
    let mut y: Vec<Complex<f64>> = msg
        .iter()
        .enumerate()
        .map(|(n, m)| {
            let w = complex_gaussian(noise_variance, &mut rng);
            let h = Complex::from_polar(gain, rot * n as f64);
            (h * m + w) * los
        })
        .collect();
    fft.process(&mut y);
    let scale = 1.0 / t as f64;
    let samples = y.iter().map(|c| c.norm_sqr() * scale).collect();
    Ok(SpectralObservation { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_zero_shift() {
        let psd = NominalPsd::flat(3.0, 1.0, 1.0, 100.0).unwrap();
        assert_eq!(npsds_theoretical(&psd, 0.0), 4.0);
        assert_eq!(npsds_theoretical(&psd, 1234.5), 4.0);
    }

    #[test]
    fn periodic_in_full_period() {
        let psd = NominalPsd::triangular(1.0, 0.8, 0.5, 10.0, 64).unwrap();
        for w in [0.0, 1.3, -4.2, 7.77] {
            let a = npsds_theoretical(&psd, w);
            let b = npsds_theoretical(&psd, w + 10.0);
            assert!((a - b).abs() < 1e-12, "omega={w}");
        }
        assert_eq!(npsds_theoretical(&psd, 10.0), npsds_theoretical(&psd, 0.0));
    }

    #[test]
    fn triangular_half_period_lookup() {
        let psd = NominalPsd::triangular(1.5, 1.0, 0.25, 8.0, 16).unwrap();
        let table: Vec<(f64, f64)> = psd.table().collect();
        // -Δf/2 wraps to Δf/2, which is table row 8
        let oracle = table[8].1 + 0.25;
        assert_eq!(npsds_theoretical(&psd, 4.0), oracle);
        assert_eq!(npsds_theoretical(&psd, 4.0), 0.25);
        // peak
        assert_eq!(npsds_theoretical(&psd, 0.0), 3.0 + 0.25);
        // midway on the ramp: interpolation between rows 1 and 2
        let mid = npsds_theoretical(&psd, -0.75);
        assert!((mid - (0.5 * (table[1].1 + table[2].1) + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn normalization_checked() {
        let err = NominalPsd::new(vec![(0.0, 1.0), (0.5, 3.0)], 1.0, 1.0, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, PlaError::Config { .. }));
        let ok = NominalPsd::new(vec![(0.0, 1.0), (0.5, 3.0)], 1.0, 2.0, 1.0, 0.0);
        assert!(ok.is_ok());
        let scaled = NominalPsd::normalized(vec![(0.0, 1.0), (0.5, 3.0)], 1.0, 5.0, 1.0, 0.0).unwrap();
        assert!((scaled.signal_variance() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn table_validation() {
        assert!(NominalPsd::new(vec![(0.0, 1.0), (0.0, 1.0)], 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(NominalPsd::new(vec![(1.0, 1.0)], 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(NominalPsd::new(vec![(0.0, -1.0)], 1.0, -1.0, 1.0, 0.0).is_err());
        assert!(NominalPsd::new(vec![], 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(NominalPsd::flat(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(NominalPsd::flat(1.0, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn csv_table() {
        let rows = parse_psd_table(b"offset,power\n0.0, 2.0\n0.5,0\n").unwrap();
        assert_eq!(rows, vec![(0.0, 2.0), (0.5, 0.0)]);
        assert_eq!(parse_psd_table(b"0,1\n0.25,1\n").unwrap().len(), 2);
        assert!(parse_psd_table(b"offset,power\n").is_err());
        assert!(parse_psd_table(b"0,1\nx,1\n").is_err());
        assert!(parse_psd_table(b"0,1,2\n").is_err());
        assert!(parse_psd_table(b"0,inf\n").is_err());
        assert!(parse_psd_table(b"").is_err());
    }

    #[test]
    fn statistical_determinism_and_scaling() {
        let a = simulate_observation_statistical(1.0, 32, 99).unwrap();
        let b = simulate_observation_statistical(1.0, 32, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate_observation_statistical(2.0, 32, 99).unwrap();
        for (x, y) in a.samples().iter().zip(c.samples()) {
            assert_eq!(2.0 * x, *y);
        }
        assert!(simulate_observation_statistical(0.0, 4, 1).is_err());
        assert!(simulate_observation_statistical(1.0, 0, 1).is_err());
    }

    #[test]
    fn statistical_mean() {
        let obs = simulate_observation_statistical(1.0, 1_000_000, 7).unwrap();
        let mean = obs.samples().iter().sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn waveform_phase_invariance() {
        let psd = NominalPsd::flat(1.0, 1.0, 1.0, 1000.0).unwrap();
        let a = ChannelParams::new(1.0, 37.0, 0.9, 0.0).unwrap();
        let b = ChannelParams::new(1.0, 37.0, 0.9, 2.2).unwrap();
        let sa = simulate_observation_waveform(1.0, &psd, &a, 1.0, 64, 5).unwrap();
        let sb = simulate_observation_waveform(1.0, &psd, &b, 1.0, 64, 5).unwrap();
        for (x, y) in sa.samples().iter().zip(sb.samples()) {
            assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn waveform_argument_checks() {
        let psd = NominalPsd::flat(1.0, 1.0, 1.0, 1000.0).unwrap();
        let ch = ChannelParams::boresight(1.0, 0.0).unwrap();
        assert!(simulate_observation_waveform(1.0, &psd, &ch, 1.0, 1, 0).is_err());
        assert!(simulate_observation_waveform(0.0, &psd, &ch, 0.0, 8, 0).is_err());
        assert!(ChannelParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, 1.5, 0.0).is_err());
        assert!(ChannelParams::new(1.0, 0.0, 1.0, 7.0).is_err());
    }

    #[test]
    fn waveform_noise_only_mean() {
        // unitary DFT: each bin of unit-variance complex noise has E|W|^2 = σ_w²
        let psd = NominalPsd::flat(1.0, 1.0, 0.0, 1000.0).unwrap();
        let ch = ChannelParams::boresight(1.0, 12.0).unwrap();
        let t = 16;
        let reps = 2000;
        let means: Vec<f64> = (0..reps)
            .map(|s| {
                let o = simulate_observation_waveform(0.0, &psd, &ch, 2.0, t, s).unwrap();
                o.samples().iter().sum::<f64>() / t as f64
            })
            .collect();
        let m = means.iter().sum::<f64>() / reps as f64;
        // each slot mean has sd σ_w²/√T
        let se = 2.0 / (t as f64).sqrt() / (reps as f64).sqrt();
        assert!((m - 2.0).abs() < 3.0 * se, "{m}");
    }
}
