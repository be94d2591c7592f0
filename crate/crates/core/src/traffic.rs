//! Synthetic offered-load series.
//!
//! Three daily shapes drive the experiments; each is a `[0, 1]` profile that
//! is scaled to `baseline + amplitude × profile`, perturbed with Gaussian
//! noise and clamped at zero:
//!
//! * `T1`: one smooth busy period per day, `sin²(π φ)`.
//! * `T2`: morning and evening peaks, `½(1 − cos 4πφ)(0.8 + 0.2 sin 2πφ)`.
//! * `T3`: ramp up, plateau, step down to half load, ramp back to zero.
//!
//! `φ ∈ [0, 1)` is the position inside the period. Noise is drawn from a
//! ChaCha8 stream (`rand_chacha` 0.3) through `rand_distr` 0.4's `Normal`, so
//! a seed reproduces the same series bit for bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::format::{g17, parse_f64};
use crate::queueing::PagingSchemeConfig;

/// Peak load may exceed the highest saturation rate of the schemes under
/// study by at most this factor.
pub const SATURATION_HEADROOM: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrafficLabel {
    T1,
    T2,
    T3,
    Custom,
}

impl TrafficLabel {
    pub const GENERATED: [TrafficLabel; 3] = [TrafficLabel::T1, TrafficLabel::T2, TrafficLabel::T3];
}

impl fmt::Display for TrafficLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficLabel::T1 => "T1",
            TrafficLabel::T2 => "T2",
            TrafficLabel::T3 => "T3",
            TrafficLabel::Custom => "custom",
        })
    }
}

impl FromStr for TrafficLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(TrafficLabel::T1),
            "T2" => Ok(TrafficLabel::T2),
            "T3" => Ok(TrafficLabel::T3),
            "CUSTOM" => Ok(TrafficLabel::Custom),
            _ => Err(Error::InvalidSpec(format!("unknown traffic type `{s}`"))),
        }
    }
}

/// Offered load (Erlang, used as arrival rate) sampled every `period` time
/// units.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSeries {
    samples: Vec<f64>,
    period: f64,
    label: TrafficLabel,
}

impl TrafficSeries {
    pub fn new(samples: Vec<f64>, period: f64, label: TrafficLabel) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: samples.len() });
        }
        if let Some(bad) = samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidSpec(format!("load samples must be finite and nonnegative, got {bad}")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidSpec("sampling period must be positive".into()));
        }
        Ok(Self { samples, period, label })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn label(&self) -> TrafficLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.period * self.samples.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    /// `t,load` with `t` in time units.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,load\n");
        for (i, x) in self.samples.iter().enumerate() {
            out.push_str(&format!("{},{}\n", g17(i as f64 * self.period), g17(*x)));
        }
        out
    }

    /// Reads the `t,load` format. Timestamps must be evenly spaced.
    pub fn from_csv(text: &str, label: TrafficLabel) -> Result<Self> {
        let mut times = Vec::new();
        let mut loads = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('t')) {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (t, x) = line.split_once(',').ok_or_else(|| err("expected `t,load`".into()))?;
            times.push(parse_f64(t).ok_or_else(|| err(format!("bad time `{t}`")))?);
            loads.push(parse_f64(x).ok_or_else(|| err(format!("bad load `{x}`")))?);
        }
        if times.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: times.len() });
        }
        let period = times[1] - times[0];
        for (i, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - period).abs() > 1e-9 * period.abs().max(1.0) {
                return Err(Error::Parse { line: i + 3, msg: "timestamps are not evenly spaced".into() });
            }
        }
        Self::new(loads, period, label)
    }

    /// Chronological split; both parts keep at least `window + 1` samples.
    pub fn split(&self, train_fraction: f64, window: usize) -> Result<(TrafficSeries, TrafficSeries)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument("train fraction must lie in (0, 1)".into()));
        }
        let n = self.len();
        let cut = ((n as f64) * train_fraction + 1e-9).floor() as usize;
        let needed = window + 1;
        if cut < needed {
            return Err(Error::TooShort { needed, got: cut });
        }
        if n - cut < needed {
            return Err(Error::TooShort { needed, got: n - cut });
        }
        let part = |s: &[f64]| TrafficSeries { samples: s.to_vec(), period: self.period, label: self.label };
        Ok((part(&self.samples[..cut]), part(&self.samples[cut..])))
    }
}

/// Parameters of a generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSpec {
    pub kind: TrafficLabel,
    /// Peak-to-trough swing, Erlang.
    pub amplitude: f64,
    /// Trough load, Erlang.
    pub baseline: f64,
    /// Samples per daily period.
    pub period_samples: usize,
    pub noise_std: f64,
    pub seed: u64,
    pub length: usize,
    /// Time units per sample.
    pub sample_period: f64,
}

impl TrafficSpec {
    /// Four days of 288 samples (5-minute bins) swinging between 4 and 9 Erlang.
    pub fn default_for(kind: TrafficLabel) -> Self {
        Self {
            kind,
            amplitude: 5.0,
            baseline: 4.0,
            period_samples: 288,
            noise_std: 0.1,
            seed: 42,
            length: 4 * 288,
            sample_period: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if self.kind == TrafficLabel::Custom {
            return bad("custom traffic is loaded from a file, not generated");
        }
        if !(self.baseline.is_finite() && self.baseline >= 0.0) {
            return bad("baseline must be nonnegative");
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("amplitude must be nonnegative");
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return bad("noise_std must be nonnegative");
        }
        if self.period_samples == 0 {
            return bad("period_samples must be positive");
        }
        if self.length < 2 {
            return bad("length must be at least 2");
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return bad("sample_period must be positive");
        }
        Ok(())
    }

    /// Checks the peak load against the schemes' saturation rates.
    pub fn validate_for(&self, schemes: &[PagingSchemeConfig<f64>]) -> Result<()> {
        self.validate()?;
        let ceiling = schemes.iter().map(|s| s.saturation_rate()).fold(0.0, f64::max) * SATURATION_HEADROOM;
        let peak = self.baseline + self.amplitude;
        if peak > ceiling {
            return Err(Error::InvalidSpec(format!(
                "peak load {peak} exceeds {ceiling} ({SATURATION_HEADROOM} x the highest saturation rate)"
            )));
        }
        Ok(())
    }

    /// Noise-free load at sample `t`.
    pub fn clean_sample(&self, t: usize) -> f64 {
        let phase = (t % self.period_samples) as f64 / self.period_samples as f64;
        self.baseline + self.amplitude * profile(self.kind, phase)
    }
}

/// Normalized daily shape in `[0, 1]` at phase `φ ∈ [0, 1)`.
pub fn profile(kind: TrafficLabel, phase: f64) -> f64 {
    match kind {
        TrafficLabel::T1 => (PI * phase).sin().powi(2),
        TrafficLabel::T2 => 0.5 * (1.0 - (4.0 * PI * phase).cos()) * (0.8 + 0.2 * (2.0 * PI * phase).sin()),
        TrafficLabel::T3 => ramp_and_plateau(phase),
        TrafficLabel::Custom => 0.0,
    }
}

const RAMP_KNOTS: [(f64, f64); 7] =
    [(0.0, 0.0), (0.2, 0.0), (0.35, 1.0), (0.65, 1.0), (0.75, 0.5), (0.9, 0.5), (1.0, 0.0)];

fn ramp_and_plateau(phase: f64) -> f64 {
    for w in RAMP_KNOTS.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if phase < x1 {
            return y0 + (y1 - y0) * (phase - x0) / (x1 - x0);
        }
    }
    0.0
}

pub fn generate(spec: &TrafficSpec) -> Result<TrafficSeries> {
    spec.validate()?;
    let mut samples: Vec<f64> = (0..spec.length).map(|t| spec.clean_sample(t)).collect();
    if spec.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        for x in &mut samples {
            *x = (*x + noise.sample(&mut rng)).max(0.0);
        }
    }
    TrafficSeries::new(samples, spec.sample_period, spec.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kind: TrafficLabel) -> TrafficSpec {
        TrafficSpec::default_for(kind)
    }

    #[test]
    fn flat_sinusoid_is_constant() {
        let s = TrafficSpec { amplitude: 0.0, baseline: 3.0, noise_std: 0.0, length: 100, ..spec(TrafficLabel::T1) };
        let series = generate(&s).unwrap();
        assert_eq!(series.len(), 100);
        assert!(series.samples().iter().all(|&x| x == 3.0));
    }

    #[test]
    fn same_seed_same_series() {
        let s = spec(TrafficLabel::T1);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = TrafficSpec { seed: 7, ..s.clone() };
        assert_ne!(generate(&s).unwrap(), generate(&other).unwrap());
    }

    fn crossings(xs: &[f64], level: f64) -> usize {
        xs.windows(2).filter(|w| (w[0] > level) != (w[1] > level)).count()
    }

    #[test]
    fn default_shapes_cross_six_erlang_each_period() {
        for kind in TrafficLabel::GENERATED {
            let clean = TrafficSpec { noise_std: 0.0, ..spec(kind) };
            let clean = generate(&clean).unwrap();
            let p = clean.samples().chunks(288).map(|c| crossings(c, 6.0)).collect::<Vec<_>>();
            assert!(p.iter().all(|&c| c >= 2), "{kind}: {p:?}");
        }
        let noisy = TrafficSpec { amplitude: 5.0, baseline: 4.0, noise_std: 0.2, seed: 42, ..spec(TrafficLabel::T1) };
        let noisy = generate(&noisy).unwrap();
        for day in noisy.samples().chunks(288) {
            assert!(crossings(day, 6.0) >= 2);
        }
    }

    #[test]
    fn spec_bounds() {
        let schemes = [PagingSchemeConfig::sequential(), PagingSchemeConfig::concurrent()];
        for kind in TrafficLabel::GENERATED {
            spec(kind).validate_for(&schemes).unwrap();
        }
        let hot = TrafficSpec { amplitude: 8.0, ..spec(TrafficLabel::T1) };
        assert!(matches!(hot.validate_for(&schemes), Err(Error::InvalidSpec(_))));
        assert!(generate(&TrafficSpec { baseline: -1.0, ..spec(TrafficLabel::T2) }).is_err());
        assert!(generate(&TrafficSpec { period_samples: 0, ..spec(TrafficLabel::T2) }).is_err());
        assert!(generate(&TrafficSpec { length: 1, ..spec(TrafficLabel::T2) }).is_err());
        assert!(generate(&TrafficSpec { kind: TrafficLabel::Custom, ..spec(TrafficLabel::T2) }).is_err());
    }

    #[test]
    fn split_examples() {
        let series = generate(&TrafficSpec { length: 100, ..spec(TrafficLabel::T1) }).unwrap();
        let (a, b) = series.split(0.8, 8).unwrap();
        assert_eq!((a.len(), b.len()), (80, 20));
        let short = generate(&TrafficSpec { length: 10, ..spec(TrafficLabel::T1) }).unwrap();
        assert!(matches!(short.split(0.99, 8), Err(Error::TooShort { .. })));
        let series = generate(&TrafficSpec { length: 200, ..spec(TrafficLabel::T3) }).unwrap();
        let (a, b) = series.split(0.5, 8).unwrap();
        assert_eq!((a.len(), b.len()), (100, 100));
        assert_eq!([a.samples(), b.samples()].concat(), series.samples());
    }

    #[test]
    fn long_t1_mean() {
        let s = TrafficSpec { noise_std: 0.0, length: 288 * 50, ..spec(TrafficLabel::T1) };
        let series = generate(&s).unwrap();
        let mean = series.samples().iter().sum::<f64>() / series.len() as f64;
        assert!((mean - (s.baseline + s.amplitude * 0.5)).abs() < 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let series = generate(&TrafficSpec { length: 50, sample_period: 0.25, ..spec(TrafficLabel::T2) }).unwrap();
        let text = series.to_csv();
        assert!(text.starts_with("t,load\n0,"));
        let back = TrafficSeries::from_csv(&text, TrafficLabel::T2).unwrap();
        assert_eq!(back, series);
        assert!(TrafficSeries::from_csv("t,load\n0,1\n1,2\n3,2\n", TrafficLabel::Custom).is_err());
        assert!(TrafficSeries::from_csv("t,load\n0,1\n1,-2\n", TrafficLabel::Custom).is_err());
    }

    proptest! {
        #[test]
        fn noiseless_t1_t2_are_periodic(period in 2usize..400, base in 0.0f64..5.0, amp in 0.0f64..5.0) {
            for kind in [TrafficLabel::T1, TrafficLabel::T2] {
                let s = TrafficSpec { kind, baseline: base, amplitude: amp, period_samples: period, noise_std: 0.0, length: 3 * period, ..spec(kind) };
                let xs = generate(&s).unwrap();
                let xs = xs.samples();
                for t in 0..2 * period {
                    prop_assert!((xs[t] - xs[t + period]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn samples_never_negative(seed in any::<u64>(), noise in 0.0f64..3.0, kind_idx in 0usize..3) {
            let kind = TrafficLabel::GENERATED[kind_idx];
            let s = TrafficSpec { baseline: 0.0, amplitude: 1.0, noise_std: noise, seed, length: 300, ..spec(kind) };
            prop_assert!(generate(&s).unwrap().samples().iter().all(|&x| x >= 0.0));
        }
    }
}
