//! Helpers shared by the integration tests: independent oracles and fixtures.
#![allow(dead_code)]

use leo_pla::fusion::FusionRule;
use leo_pla::geometry::SatelliteState;
use leo_pla::harness::{BetaSpec, PsdSpec, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EARTH_RADIUS: f64 = 6.371e6;

/// Double-double number `hi + lo` (about 32 significant digits).
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::norm(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::new(q2)));
        let q3 = r.hi / o.hi;
        Dd::norm(q1, q2).add(Dd::new(q3))
    }

    pub fn sqrt(self) -> Dd {
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = self.sub(Dd { hi: p, lo: e });
        Dd::norm(x, r.hi / (2.0 * x))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Range rate `(v_t − v_r)·(p_t − p_r)/‖p_t − p_r‖` in double-double.
pub fn range_rate_dd(pt: [Dd; 3], vt: [Dd; 3], pr: [f64; 3], vr: [f64; 3]) -> Dd {
    let mut dot = Dd::new(0.0);
    let mut r2 = Dd::new(0.0);
    for c in 0..3 {
        let d = pt[c].sub(Dd::new(pr[c]));
        let u = vt[c].sub(Dd::new(vr[c]));
        dot = dot.add(u.mul(d));
        r2 = r2.add(d.mul(d));
    }
    dot.div(r2.sqrt())
}

fn unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// A satellite on a circular LEO orbit (altitude 400-1200 km, circular
/// speed) with a random orbital plane.
pub fn leo_satellite(rng: &mut ChaCha8Rng) -> SatelliteState {
    let r = EARTH_RADIUS + rng.random_range(4.0e5..1.2e6);
    let n = unit(rng);
    let mut t = cross(n, unit(rng));
    let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    t = [t[0] / tn, t[1] / tn, t[2] / tn];
    let speed = (3.986_004_418e14 / r).sqrt();
    SatelliteState::new([n[0] * r, n[1] * r, n[2] * r], [t[0] * speed, t[1] * speed, t[2] * speed])
}

/// One transmitter and `n` receivers, all on independent LEO orbits.
pub fn leo_constellation(seed: u64, n: usize) -> (SatelliteState, Vec<SatelliteState>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tx = leo_satellite(&mut rng);
    let rxs = (0..n).map(|_| leo_satellite(&mut rng)).collect();
    (tx, rxs)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Exponential-with-mean-`theta` CDF.
pub fn exp_cdf(theta: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-x / theta).exp_m1() }
}

/// Homogeneous scenario with `n` receivers and direct β.
pub fn homogeneous_scenario(n: usize, slot_length: usize, beta: f64, rule: FusionRule, trials: u64, seed: u64) -> Scenario {
    let (alice, receivers) = leo_constellation(seed.wrapping_add(1), n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let eve = leo_satellite(&mut rng);
    Scenario {
        schema_version: 1,
        alice,
        eve,
        receivers,
        carrier_hz: 26.0e9,
        psd: PsdSpec::default(),
        noise_variance: 1.0,
        slot_length,
        attacker_beta: BetaSpec::Explicit(vec![beta; n]),
        fusion: rule,
        trials,
        seed,
    }
}

/// Three-sigma binomial band half-width, floored for degenerate rates.
pub fn binomial_band(p: f64, trials: u64) -> f64 {
    (3.0 * (p * (1.0 - p) / trials as f64).sqrt()).max(3.0 / trials as f64)
}

pub const FD_STEP_POSITION: f64 = 1e-2;
pub const FD_STEP_VELOCITY: f64 = 1e-4;

/// Central finite differences of the range rate with respect to the
/// transmitter state, evaluated in double-double so that rounding in the
/// O(10⁴) m/s range rate does not swamp the difference quotient.
pub fn fd_gradient(tx: &SatelliteState, rx: &SatelliteState) -> [f64; 6] {
    let pr = [rx.position[0], rx.position[1], rx.position[2]];
    let vr = [rx.velocity[0], rx.velocity[1], rx.velocity[2]];
    let base_p = [Dd::new(tx.position[0]), Dd::new(tx.position[1]), Dd::new(tx.position[2])];
    let base_v = [Dd::new(tx.velocity[0]), Dd::new(tx.velocity[1]), Dd::new(tx.velocity[2])];
    let mut out = [0.0; 6];
    for (j, slot) in out.iter_mut().enumerate() {
        let (c, h) = if j < 3 { (j, FD_STEP_POSITION) } else { (j - 3, FD_STEP_VELOCITY) };
        let eval = |sign: f64| {
            let (mut p, mut v) = (base_p, base_v);
            if j < 3 {
                p[c] = p[c].add(Dd::new(sign * h));
            } else {
                v[c] = v[c].add(Dd::new(sign * h));
            }
            range_rate_dd(p, v, pr, vr)
        };
        *slot = eval(1.0).sub(eval(-1.0)).div(Dd::new(2.0 * h)).to_f64();
    }
    out
}

/// `|a − b| ≤ rel·|b|`, with an absolute floor for entries near zero.
pub fn close_rel(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    (a - b).abs() <= (rel * b.abs()).max(abs_floor)
}
