//! Time-variable retarders built from rotating waveplates.
//!
//! A rotating waveplate of retardation `δ` turning at physical rate `ω_p`
//! contributes an angular velocity of magnitude `2·ω_p·2·sin(δ/2)` on the
//! Poincaré sphere: `4·ω_p` for a half-wave plate, `2√2·ω_p` for a quarter-wave
//! plate. A rotating HWP acts as a fixed HWP followed by a circular retarder of
//! angle `4θ`, which is also how lightning-induced Faraday rotation appears in
//! fibre; bursts are therefore modelled as an extra retarder directly behind
//! the plate that carries them.
//!
//! Scrambling speed is the worst case over input states of the great-circle
//! rate of the output state.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::polarization::{
    retarder_to_jones, waveplate_jones, JonesMatrix, Retarder, RotationMatrix, StokesVector,
    Waveplate, WaveplateKind,
};

/// Nominal burst-rate ceiling on the sphere, 20 Mrad/s.
pub const NOMINAL_BURST_RATE: f64 = 20e6;

/// Largest arc (rad) a single finite-difference step may subtend.
pub const MAX_STEP_ARC: f64 = 0.1;

/// Smallest probe count accepted by [`max_sop_speed`].
pub const MIN_PROBES: usize = 64;

/// Smallest sample count accepted by [`speed_histogram`].
pub const MIN_HISTOGRAM_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BurstEnvelope {
    /// Linear ramp up and down in each half.
    Triangular,
    /// `(1 − cos)/2` lobe in each half.
    RaisedCosine,
}

impl BurstEnvelope {
    pub fn label(self) -> &'static str {
        match self {
            BurstEnvelope::Triangular => "triangular",
            BurstEnvelope::RaisedCosine => "raised-cosine",
        }
    }

    /// Lobe shape on `x ∈ [0, 1]`, peak 1 at `x = ½`.
    fn lobe(self, x: f64) -> f64 {
        match self {
            BurstEnvelope::Triangular => 1.0 - (2.0 * x - 1.0).abs(),
            BurstEnvelope::RaisedCosine => (1.0 - (TAU * x).cos()) / 2.0,
        }
    }

    /// `∫₀ˣ lobe`, reaching ½ at `x = 1`.
    fn lobe_integral(self, x: f64) -> f64 {
        match self {
            BurstEnvelope::Triangular if x <= 0.5 => x * x,
            BurstEnvelope::Triangular => 0.5 - (1.0 - x) * (1.0 - x),
            BurstEnvelope::RaisedCosine => x / 2.0 - (TAU * x).sin() / (4.0 * PI),
        }
    }
}

/// Forth/back rotation burst. The signed Stokes-space rate is a positive lobe
/// over the first half of `duration` and the mirrored negative lobe over the
/// second half, so the accumulated angle returns to zero at the end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstProgram {
    start_s: f64,
    duration_s: f64,
    peak_rate: f64,
    envelope: BurstEnvelope,
    axis: StokesVector,
}

impl BurstProgram {
    /// Burst limited to ±20 Mrad/s.
    pub fn new(
        start_s: f64,
        duration_s: f64,
        peak_rate: f64,
        envelope: BurstEnvelope,
        axis: StokesVector,
    ) -> Result<Self> {
        Self::with_headroom(start_s, duration_s, peak_rate, envelope, axis, 0.0)
    }

    /// Burst limited to `±20 Mrad/s · (1 + headroom)`.
    pub fn with_headroom(
        start_s: f64,
        duration_s: f64,
        peak_rate: f64,
        envelope: BurstEnvelope,
        axis: StokesVector,
        headroom: f64,
    ) -> Result<Self> {
        if !(duration_s.is_finite() && duration_s > 0.0) || !start_s.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "burst needs a finite start and positive duration (got {start_s} s, {duration_s} s)"
            )));
        }
        let limit = NOMINAL_BURST_RATE * (1.0 + headroom.max(0.0));
        if !(peak_rate.abs() <= limit) {
            return Err(Error::InvalidConfig(format!(
                "burst peak {peak_rate:e} rad/s exceeds {limit:e} rad/s"
            )));
        }
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::InvalidConfig("burst axis has no direction".into()))?;
        Ok(Self {
            start_s,
            duration_s,
            peak_rate,
            envelope,
            axis,
        })
    }

    pub fn start_s(&self) -> f64 {
        self.start_s
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn peak_rate(&self) -> f64 {
        self.peak_rate
    }

    pub fn envelope(&self) -> BurstEnvelope {
        self.envelope
    }

    pub fn axis(&self) -> StokesVector {
        self.axis
    }

    /// Signed Stokes-space rate (rad/s) at time `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        let u = (t - self.start_s) / self.duration_s;
        if !(0.0..=1.0).contains(&u) {
            0.0
        } else if u < 0.5 {
            self.peak_rate * self.envelope.lobe(2.0 * u)
        } else {
            -self.peak_rate * self.envelope.lobe(2.0 * u - 1.0)
        }
    }

    /// Accumulated retardation (rad) at time `t`, in closed form.
    pub fn angle_at(&self, t: f64) -> f64 {
        let u = (t - self.start_s) / self.duration_s;
        let half = self.peak_rate * self.duration_s / 2.0;
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else if u < 0.5 {
            half * self.envelope.lobe_integral(2.0 * u)
        } else {
            half * (0.5 - self.envelope.lobe_integral(2.0 * u - 1.0))
        }
    }

    fn jones_at(&self, t: f64) -> JonesMatrix {
        let r = Retarder::new(self.axis, self.angle_at(t)).expect("validated burst");
        retarder_to_jones(&r, 0.0)
    }
}

/// Lightning-strike transient: a triangular forth/back burst of circular
/// (Faraday) retardation.
pub fn make_lightning_burst(peak: f64, duration: f64, t0: f64) -> Result<BurstProgram> {
    BurstProgram::new(t0, duration, peak, BurstEnvelope::Triangular, StokesVector::circular())
}

/// One plate of a stack. Orientation at time `t` is
/// `initial_orientation + rate·t`, never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackPlate {
    pub kind: WaveplateKind,
    pub initial_orientation: f64,
    /// Physical rotation rate in rad/s.
    pub rate: f64,
    pub burst: Option<BurstProgram>,
}

impl StackPlate {
    pub fn new(kind: WaveplateKind, initial_orientation: f64, rate: f64) -> Self {
        Self {
            kind,
            initial_orientation,
            rate,
            burst: None,
        }
    }

    pub fn with_burst(mut self, burst: BurstProgram) -> Self {
        self.burst = Some(burst);
        self
    }

    pub fn orientation_at(&self, t: f64) -> f64 {
        self.initial_orientation + self.rate * t
    }

    /// Upper bound of this plate's contribution to the sphere rate.
    pub fn speed_bound(&self) -> f64 {
        let plate = 4.0 * (self.kind.retardation() / 2.0).sin() * self.rate.abs();
        plate + self.burst.map_or(0.0, |b| b.peak_rate.abs())
    }
}

/// Ordered waveplates in propagation order.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveplateStack {
    plates: Vec<StackPlate>,
}

/// Irrational multipliers for default rates: square roots of primes.
const PRIME_ROOTS: [f64; 14] = [
    1.4142135623730951, // √2
    1.7320508075688772, // √3
    2.23606797749979,   // √5
    2.6457513110645907, // √7
    3.3166247903554,    // √11
    3.605551275463989,  // √13
    4.123105625617661,  // √17
    4.358898943540674,  // √19
    4.795831523312719,  // √23
    5.385164807134504,  // √29
    5.5677643628300215, // √31
    6.082762530298219,  // √37
    6.4031242374328485, // √41
    6.557438524302,     // √43
];

const GOLDEN_FRACTION: f64 = 0.6180339887498949;

impl WaveplateStack {
    pub fn new(plates: Vec<StackPlate>) -> Result<Self> {
        if plates.is_empty() {
            return Err(Error::InvalidConfig("waveplate stack needs at least one plate".into()));
        }
        if plates
            .iter()
            .any(|p| !(p.rate.is_finite() && p.initial_orientation.is_finite()))
        {
            return Err(Error::InvalidConfig("plate rates and orientations must be finite".into()));
        }
        Ok(Self { plates })
    }

    /// Motionless stack of one plate kind at zero orientation.
    pub fn single(kind: WaveplateKind, rate: f64) -> Self {
        Self {
            plates: vec![StackPlate::new(kind, 0.0, rate)],
        }
    }

    /// Seven-plate arrangement `QWP QWP QWP HWP QWP QWP QWP` whose summed
    /// angular-velocity bound equals `ceiling` rad/s. QWP rates are about
    /// `ceiling·10⁻³·√p` for distinct primes `p` (sign alternating), the HWP
    /// takes the remaining budget. `variant` shifts the prime set, scales the
    /// rates and changes the initial orientations so that several stacks of
    /// one device do not share rates.
    pub fn fig3(ceiling: f64, variant: usize) -> Result<Self> {
        if !(ceiling.is_finite() && ceiling > 0.0) {
            return Err(Error::InvalidConfig(format!("speed ceiling {ceiling} must be positive")));
        }
        let qwp_factor = 4.0 * FRAC_PI_4.sin();
        let mut plates = Vec::with_capacity(7);
        let mut qwp_budget = 0.0;
        let spread = 1.0 + (variant as f64 * GOLDEN_FRACTION).fract() / 10.0;
        for j in 0..7 {
            let root = spread * PRIME_ROOTS[(7 * variant + j) % PRIME_ROOTS.len()];
            let orientation = PI * ((variant * 7 + j + 1) as f64 * GOLDEN_FRACTION).fract();
            if j == 3 {
                plates.push(StackPlate::new(WaveplateKind::Half, orientation, 0.0));
            } else {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let rate = sign * ceiling * 1e-3 * root;
                qwp_budget += qwp_factor * rate.abs();
                plates.push(StackPlate::new(WaveplateKind::Quarter, orientation, rate));
            }
        }
        plates[3].rate = (ceiling - qwp_budget) / 4.0;
        Self::new(plates)
    }

    /// Seven plates of comparable incommensurate rates `base·√p`, giving a
    /// broad, Rayleigh-like speed distribution.
    pub fn comparable(base_rate: f64) -> Result<Self> {
        let plates = (0..7)
            .map(|j| {
                let kind = if j == 3 { WaveplateKind::Half } else { WaveplateKind::Quarter };
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let orientation = PI * ((j + 1) as f64 * GOLDEN_FRACTION).fract();
                StackPlate::new(kind, orientation, sign * base_rate * PRIME_ROOTS[j])
            })
            .collect();
        Self::new(plates)
    }

    pub fn plates(&self) -> &[StackPlate] {
        &self.plates
    }

    pub fn plates_mut(&mut self) -> &mut [StackPlate] {
        &mut self.plates
    }

    /// Upper bound of the scrambling speed (rad/s): sum of plate and burst
    /// contributions.
    pub fn speed_bound(&self) -> f64 {
        self.plates.iter().map(StackPlate::speed_bound).sum()
    }

    /// Index of the first half-wave plate.
    pub fn hwp_index(&self) -> Option<usize> {
        self.plates.iter().position(|p| p.kind == WaveplateKind::Half)
    }
}

/// A stack together with its time origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ScramblerTrajectory {
    pub stack: WaveplateStack,
    pub time_origin_s: f64,
}

impl ScramblerTrajectory {
    pub fn new(stack: WaveplateStack) -> Self {
        Self {
            stack,
            time_origin_s: 0.0,
        }
    }

    pub fn with_origin(stack: WaveplateStack, time_origin_s: f64) -> Self {
        Self {
            stack,
            time_origin_s,
        }
    }

    pub fn jones_at(&self, t: f64) -> JonesMatrix {
        scrambler_at(self, t)
    }

    pub fn rotation_at(&self, t: f64) -> RotationMatrix {
        crate::polarization::jones_to_rotation(&scrambler_at(self, t))
            .expect("waveplate products are unitary")
    }
}

/// Product of the plates (and active bursts) at time `t` in propagation order.
pub fn scrambler_at(traj: &ScramblerTrajectory, t: f64) -> JonesMatrix {
    let local = t - traj.time_origin_s;
    traj.stack.plates.iter().fold(JonesMatrix::identity(), |acc, p| {
        let plate = waveplate_jones(&Waveplate::new(p.kind, p.orientation_at(local)));
        let m = plate * acc;
        match &p.burst {
            Some(b) => b.jones_at(local) * m,
            None => m,
        }
    })
}

fn arc_rate(a: &StokesVector, b: &StokesVector, dt: f64) -> Result<f64> {
    let arc = a.angle_to(b);
    if arc >= MAX_STEP_ARC {
        return Err(Error::StepTooLarge {
            angle: arc,
            limit: MAX_STEP_ARC,
        });
    }
    Ok(arc / dt)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time step {dt} s must be positive")))
    }
}

/// Great-circle rate (rad/s) of the output state between `t` and `t + dt`.
pub fn sop_speed(traj: &ScramblerTrajectory, input: &StokesVector, t: f64, dt: f64) -> Result<f64> {
    check_dt(dt)?;
    let s = input
        .normalized()
        .ok_or_else(|| Error::InvalidConfig("input SOP has no direction".into()))?;
    let a = traj.rotation_at(t).apply(&s);
    let b = traj.rotation_at(t + dt).apply(&s);
    arc_rate(&a, &b, dt)
}

/// `n` quasi-uniform unit vectors (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<StokesVector> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            StokesVector::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Scrambling speed at `t`: the largest [`sop_speed`] over `n_probe`
/// quasi-uniform input states.
pub fn max_sop_speed(traj: &ScramblerTrajectory, t: f64, dt: f64, n_probe: usize) -> Result<f64> {
    check_dt(dt)?;
    if n_probe < MIN_PROBES {
        return Err(Error::InvalidConfig(format!(
            "max_sop_speed needs at least {MIN_PROBES} probes, got {n_probe}"
        )));
    }
    let r0 = traj.rotation_at(t);
    let r1 = traj.rotation_at(t + dt);
    fibonacci_sphere(n_probe).iter().try_fold(0.0f64, |best, s| {
        let v = arc_rate(&r0.apply(s), &r1.apply(s), dt)?;
        Ok(best.max(v))
    })
}

/// Shape classes for a sampled speed distribution. Thresholds are modelling
/// choices: `Static` if every sample is zero, `RayleighLike` if the KS distance
/// to the rms-fitted Rayleigh law is below 0.1, `Peaked` if the modal bin lies
/// in the top fifth of the observed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedShape {
    Static,
    RayleighLike,
    Peaked,
    Other,
}

/// KS threshold for [`SpeedShape::RayleighLike`].
pub const RAYLEIGH_KS_THRESHOLD: f64 = 0.1;

/// Empirical distribution of the output-state speed for one launch.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub samples: Vec<f64>,
}

impl SpeedHistogram {
    fn from_samples(samples: Vec<f64>, bins: usize) -> Self {
        let bins = bins.max(1);
        let top = samples.iter().copied().fold(0.0, f64::max);
        let width = if top > 0.0 { top / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        for &v in &samples {
            let i = ((v / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Self {
            edges,
            counts,
            samples,
        }
    }

    /// Center of the most populated bin (first one on ties).
    pub fn mode(&self) -> f64 {
        let (i, _) = self
            .counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best });
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Rayleigh scale fitted by matching the second moment.
    pub fn rayleigh_sigma(&self) -> f64 {
        let ms = self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64;
        (ms / 2.0).sqrt()
    }

    pub fn rayleigh_ks(&self) -> f64 {
        let sigma = self.rayleigh_sigma();
        if sigma == 0.0 {
            return 1.0;
        }
        crate::statistics::ks_statistic(&self.samples, |v| {
            1.0 - (-(v * v) / (2.0 * sigma * sigma)).exp()
        })
    }

    pub fn classify(&self) -> SpeedShape {
        if self.samples.iter().all(|&v| v == 0.0) {
            SpeedShape::Static
        } else if self.rayleigh_ks() < RAYLEIGH_KS_THRESHOLD {
            SpeedShape::RayleighLike
        } else if self.mode() >= 0.8 * self.edges[self.edges.len() - 1] {
            SpeedShape::Peaked
        } else {
            SpeedShape::Other
        }
    }
}

/// Speeds of the output state for launch `input` at `n` evenly spaced times
/// in `[t_start, t_start + t_span)`, binned into `bins` bins.
pub fn speed_histogram(
    traj: &ScramblerTrajectory,
    input: &StokesVector,
    t_start: f64,
    t_span: f64,
    n: usize,
    dt: f64,
    bins: usize,
) -> Result<SpeedHistogram> {
    if n < MIN_HISTOGRAM_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "speed histogram needs at least {MIN_HISTOGRAM_SAMPLES} samples, got {n}"
        )));
    }
    if !(t_span.is_finite() && t_span > 0.0) {
        return Err(Error::InvalidConfig(format!("time span {t_span} s must be positive")));
    }
    let samples = (0..n)
        .map(|k| {
            let t = t_start + (k as f64 + 0.5) * t_span / n as f64;
            sop_speed(traj, input, t, dt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeedHistogram::from_samples(samples, bins))
}

/// Instantaneous angular velocity (rad/s) of the output rotation, from a
/// central difference over `dt`.
pub fn angular_velocity(traj: &ScramblerTrajectory, t: f64, dt: f64) -> Vector3<f64> {
    let a = traj.rotation_at(t - dt / 2.0);
    let b = traj.rotation_at(t + dt / 2.0);
    (b * a.transpose()).rotation_vector() / dt
}
