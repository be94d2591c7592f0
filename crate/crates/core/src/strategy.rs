//! Threshold controller that swaps between sequential and concurrent paging.
//!
//! At step `t` the forecaster sees the loads before `t`, the controller picks
//! a scheme from the forecast, and the step is scored analytically at the
//! load that actually arrived.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::queueing::{find_crossover, mean_system_time, PagingSchemeConfig, QueueMetrics, SystemTime};
use crate::rbf::RbfModel;
use crate::traffic::TrafficSeries;

/// Bracket searched for the default threshold.
pub const THRESHOLD_BRACKET: (f64, f64) = (0.5, 6.9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Sequential,
    Concurrent,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sequential => "sequential",
            Scheme::Concurrent => "concurrent",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Scheme::Sequential),
            "concurrent" => Ok(Scheme::Concurrent),
            other => Err(Error::InvalidScheme(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One-step-ahead load forecast.
pub trait Forecaster {
    /// Samples of history required before the first forecast.
    fn lookback(&self) -> usize;

    /// Forecast for `series[t]`. Only `series[..t]` may be read by a genuine
    /// predictor; `t >= lookback()`.
    fn forecast(&self, series: &[f64], t: usize) -> Result<f64>;
}

impl Forecaster for RbfModel<f64> {
    fn lookback(&self) -> usize {
        self.window()
    }

    fn forecast(&self, series: &[f64], t: usize) -> Result<f64> {
        self.predict(&series[t - self.window()..t])
    }
}

/// Oracle that reads the actual load. Upper bound for any forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfectForesight {
    pub lookback: usize,
}

impl Forecaster for PerfectForesight {
    fn lookback(&self) -> usize {
        self.lookback
    }

    fn forecast(&self, series: &[f64], t: usize) -> Result<f64> {
        Ok(series[t])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    seq: PagingSchemeConfig<f64>,
    conc: PagingSchemeConfig<f64>,
    threshold: f64,
    hysteresis: f64,
    swap_penalty: f64,
}

impl StrategyConfig {
    /// Threshold defaults to the crossover of the two schemes.
    pub fn new(seq: PagingSchemeConfig<f64>, conc: PagingSchemeConfig<f64>, threshold: Option<f64>) -> Result<Self> {
        let threshold = match threshold {
            Some(t) => t,
            None => {
                let hi = THRESHOLD_BRACKET.1.min(seq.saturation_rate().min(conc.saturation_rate()) * (1.0 - 1e-9));
                find_crossover(&seq, &conc, (THRESHOLD_BRACKET.0, hi))?
            }
        };
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!("threshold {threshold} must be finite and nonnegative")));
        }
        for s in [&seq, &conc] {
            if !s.is_stable(threshold) {
                return Err(Error::Unstable { scheme: s.name().to_string(), lambda: threshold });
            }
        }
        Ok(Self { seq, conc, threshold, hysteresis: 0.0, swap_penalty: 0.0 })
    }

    pub fn with_hysteresis(mut self, h: f64) -> Result<Self> {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::InvalidArgument("hysteresis must be nonnegative".into()));
        }
        self.hysteresis = h;
        Ok(self)
    }

    /// Time added to the step on which the scheme changes.
    pub fn with_swap_penalty(mut self, penalty: f64) -> Result<Self> {
        if !(penalty.is_finite() && penalty >= 0.0) {
            return Err(Error::InvalidArgument("swap penalty must be nonnegative".into()));
        }
        self.swap_penalty = penalty;
        Ok(self)
    }

    pub fn seq(&self) -> &PagingSchemeConfig<f64> {
        &self.seq
    }

    pub fn conc(&self) -> &PagingSchemeConfig<f64> {
        &self.conc
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn hysteresis(&self) -> f64 {
        self.hysteresis
    }

    pub fn swap_penalty(&self) -> f64 {
        self.swap_penalty
    }

    pub fn scheme(&self, which: Scheme) -> &PagingSchemeConfig<f64> {
        match which {
            Scheme::Sequential => &self.seq,
            Scheme::Concurrent => &self.conc,
        }
    }
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self::new(PagingSchemeConfig::sequential(), PagingSchemeConfig::concurrent(), None)
            .expect("default schemes cross")
    }
}

/// Sequential iff the load is at or below the threshold. With hysteresis the
/// current scheme is kept while the load stays inside `[t − h, t + h]`.
pub fn decide(predicted_load: f64, config: &StrategyConfig, previous: Option<Scheme>) -> Scheme {
    let (t, h) = (config.threshold, config.hysteresis);
    let limit = match previous {
        None => t,
        Some(Scheme::Sequential) => t + h,
        Some(Scheme::Concurrent) => t - h,
    };
    if predicted_load <= limit {
        Scheme::Sequential
    } else {
        Scheme::Concurrent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub actual: f64,
    pub predicted: f64,
    pub scheme: Scheme,
    pub wait_probability: f64,
    pub mean_system_time: SystemTime<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTrace {
    pub steps: Vec<TraceStep>,
}

impl StrategyTrace {
    pub fn switches(&self) -> usize {
        self.steps.windows(2).filter(|w| w[0].scheme != w[1].scheme).count()
    }

    pub fn summary(&self) -> StrategySummary {
        StrategySummary::from_steps(self.steps.iter().map(|s| (s.wait_probability, s.mean_system_time)))
    }

    /// `t,actual,predicted,scheme,pwait,T`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,actual,predicted,scheme,pwait,T\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.t,
                g17(s.actual),
                g17(s.predicted),
                s.scheme,
                g17(s.wait_probability),
                s.mean_system_time
            ));
        }
        out
    }
}

/// Time averages over one trace.
///
/// Divergent steps are left out of `finite_mean_system_time` and counted in
/// `divergent_steps`. `mean_system_time` is the plain average, divergent as
/// soon as one step is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySummary {
    pub steps: usize,
    pub mean_wait_probability: f64,
    pub mean_system_time: SystemTime<f64>,
    pub finite_mean_system_time: Option<f64>,
    pub divergent_steps: usize,
}

impl StrategySummary {
    fn from_steps(steps: impl Iterator<Item = (f64, SystemTime<f64>)>) -> Self {
        let (mut n, mut pw, mut tsum, mut finite, mut divergent) = (0usize, 0.0, 0.0, 0usize, 0usize);
        for (p, t) in steps {
            n += 1;
            pw += p;
            match t {
                SystemTime::Finite(v) => {
                    tsum += v;
                    finite += 1;
                }
                SystemTime::Divergent => divergent += 1,
            }
        }
        let finite_mean = (finite > 0).then(|| tsum / finite as f64);
        Self {
            steps: n,
            mean_wait_probability: if n > 0 { pw / n as f64 } else { f64::NAN },
            mean_system_time: match finite_mean {
                Some(m) if divergent == 0 => SystemTime::Finite(m),
                _ => SystemTime::Divergent,
            },
            finite_mean_system_time: finite_mean,
            divergent_steps: divergent,
        }
    }
}

fn score(config: &StrategyConfig, scheme: Scheme, load: f64) -> Result<QueueMetrics<f64>> {
    mean_system_time(config.scheme(scheme), load)
}

pub fn run_strategy(
    series: &TrafficSeries,
    forecaster: &impl Forecaster,
    config: &StrategyConfig,
) -> Result<StrategyTrace> {
    let samples = series.samples();
    let w = forecaster.lookback();
    if samples.len() <= w {
        return Err(Error::InsufficientHistory { needed: w + 1, got: samples.len() });
    }
    let mut steps = Vec::with_capacity(samples.len() - w);
    let mut previous = None;
    for (t, &actual) in samples.iter().enumerate().skip(w) {
        let predicted = forecaster.forecast(samples, t)?.max(0.0);
        let scheme = decide(predicted, config, previous);
        let m = score(config, scheme, actual)?;
        let swapped = previous.is_some_and(|p| p != scheme);
        let time = match m.mean_system_time {
            SystemTime::Finite(v) if swapped => SystemTime::Finite(v + config.swap_penalty),
            other => other,
        };
        steps.push(TraceStep {
            t,
            actual,
            predicted,
            scheme,
            wait_probability: m.wait_probability,
            mean_system_time: time,
        });
        previous = Some(scheme);
    }
    Ok(StrategyTrace { steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub step: TraceStep,
    pub sequential: QueueMetrics<f64>,
    pub concurrent: QueueMetrics<f64>,
}

/// Pure sequential, pure concurrent and intelligent traces over the same steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub sequential: StrategySummary,
    pub concurrent: StrategySummary,
    pub intelligent: StrategySummary,
    pub switches: usize,
}

pub const COMPARISON_HEADER: &str =
    "t,actual,predicted,scheme,sequential_pwait,sequential_T,concurrent_pwait,concurrent_T,intelligent_pwait,intelligent_T";

impl Comparison {
    /// True when the intelligent average is finite and no worse than either
    /// pure average (a divergent pure strategy loses automatically).
    pub fn intelligent_wins(&self) -> bool {
        let intel = self.intelligent.mean_system_time.to_real();
        intel.is_finite()
            && intel <= self.sequential.mean_system_time.to_real()
            && intel <= self.concurrent.mean_system_time.to_real()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARISON_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = &r.step;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                s.t,
                g17(s.actual),
                g17(s.predicted),
                s.scheme,
                g17(r.sequential.wait_probability),
                r.sequential.mean_system_time,
                g17(r.concurrent.wait_probability),
                r.concurrent.mean_system_time,
                g17(s.wait_probability),
                s.mean_system_time
            ));
        }
        out
    }
}

pub fn compare_strategies(
    series: &TrafficSeries,
    forecaster: &impl Forecaster,
    config: &StrategyConfig,
) -> Result<Comparison> {
    let trace = run_strategy(series, forecaster, config)?;
    let switches = trace.switches();
    let mut rows = Vec::with_capacity(trace.steps.len());
    for step in trace.steps {
        rows.push(ComparisonRow {
            sequential: score(config, Scheme::Sequential, step.actual)?,
            concurrent: score(config, Scheme::Concurrent, step.actual)?,
            step,
        });
    }
    let summary =
        |f: &dyn Fn(&ComparisonRow) -> (f64, SystemTime<f64>)| StrategySummary::from_steps(rows.iter().map(f));
    Ok(Comparison {
        sequential: summary(&|r| (r.sequential.wait_probability, r.sequential.mean_system_time)),
        concurrent: summary(&|r| (r.concurrent.wait_probability, r.concurrent.mean_system_time)),
        intelligent: summary(&|r| (r.step.wait_probability, r.step.mean_system_time)),
        switches,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::erlang_c;
    use crate::traffic::TrafficLabel;
    use proptest::prelude::*;

    fn series(samples: Vec<f64>) -> TrafficSeries {
        TrafficSeries::new(samples, 1.0, TrafficLabel::Custom).unwrap()
    }

    #[test]
    fn default_threshold_is_crossover() {
        let cfg = StrategyConfig::default();
        assert!((cfg.threshold() - 5.894058876102954).abs() < 1e-6);
        assert_eq!(cfg.hysteresis(), 0.0);
    }

    #[test]
    fn threshold_must_be_stable() {
        let err = StrategyConfig::new(PagingSchemeConfig::sequential(), PagingSchemeConfig::concurrent(), Some(7.5));
        assert!(matches!(err, Err(Error::Unstable { .. })));
        assert!(StrategyConfig::default().with_hysteresis(-1.0).is_err());
        assert!(StrategyConfig::default().with_swap_penalty(f64::NAN).is_err());
    }

    #[test]
    fn decide_examples() {
        let cfg = StrategyConfig::default();
        assert_eq!(decide(2.0, &cfg, None), Scheme::Sequential);
        assert_eq!(decide(6.8, &cfg, None), Scheme::Concurrent);
        assert_eq!(decide(cfg.threshold(), &cfg, None), Scheme::Sequential);
        assert_eq!(decide(cfg.threshold(), &cfg, Some(Scheme::Concurrent)), Scheme::Sequential);
    }

    #[test]
    fn hysteresis_band() {
        let cfg = StrategyConfig::default().with_hysteresis(0.5).unwrap();
        let t = cfg.threshold();
        assert_eq!(decide(t + 0.4, &cfg, Some(Scheme::Sequential)), Scheme::Sequential);
        assert_eq!(decide(t + 0.6, &cfg, Some(Scheme::Sequential)), Scheme::Concurrent);
        assert_eq!(decide(t - 0.4, &cfg, Some(Scheme::Concurrent)), Scheme::Concurrent);
        assert_eq!(decide(t - 0.6, &cfg, Some(Scheme::Concurrent)), Scheme::Sequential);
    }

    #[test]
    fn constant_low_load_is_all_sequential() {
        let cfg = StrategyConfig::default();
        let s = series(vec![2.0; 50]);
        let cmp = compare_strategies(&s, &PerfectForesight { lookback: 8 }, &cfg).unwrap();
        assert_eq!(cmp.rows.len(), 42);
        assert!(cmp.rows.iter().all(|r| r.step.scheme == Scheme::Sequential));
        assert_eq!(cmp.intelligent, cmp.sequential);
        assert_eq!(cmp.switches, 0);
    }

    #[test]
    fn high_load_matches_concurrent() {
        let cfg = StrategyConfig::default();
        let s = series((0..40).map(|i| 6.5 + 0.05 * (i % 5) as f64).collect());
        let cmp = compare_strategies(&s, &PerfectForesight { lookback: 3 }, &cfg).unwrap();
        for r in &cmp.rows {
            assert_eq!(r.step.scheme, Scheme::Concurrent);
            assert_eq!(r.step.mean_system_time, r.concurrent.mean_system_time);
        }
        assert_eq!(cmp.intelligent, cmp.concurrent);
    }

    #[test]
    fn divergence_counted_separately() {
        let cfg = StrategyConfig::default();
        let s = series(vec![1.0, 1.0, 8.0, 2.0, 8.5]);
        let cmp = compare_strategies(&s, &PerfectForesight { lookback: 1 }, &cfg).unwrap();
        assert_eq!(cmp.sequential.divergent_steps, 2);
        assert!(cmp.sequential.mean_system_time.is_divergent());
        let t = |load| mean_system_time(cfg.seq(), load).unwrap().mean_system_time.finite().unwrap();
        assert_eq!(cmp.sequential.finite_mean_system_time, Some((t(1.0) + t(2.0)) / 2.0));
        assert_eq!(cmp.intelligent.divergent_steps, 0);
        assert!(cmp.intelligent_wins());
        assert!(cmp.to_csv().contains(",inf,"));
    }

    #[test]
    fn insufficient_history() {
        let cfg = StrategyConfig::default();
        let err = run_strategy(&series(vec![1.0; 8]), &PerfectForesight { lookback: 8 }, &cfg);
        assert!(matches!(err, Err(Error::InsufficientHistory { needed: 9, got: 8 })));
    }

    #[test]
    fn negative_forecasts_are_clamped() {
        struct Pessimist;
        impl Forecaster for Pessimist {
            fn lookback(&self) -> usize {
                1
            }
            fn forecast(&self, _: &[f64], _: usize) -> Result<f64> {
                Ok(-3.0)
            }
        }
        let trace = run_strategy(&series(vec![1.0; 4]), &Pessimist, &StrategyConfig::default()).unwrap();
        assert!(trace.steps.iter().all(|s| s.predicted == 0.0 && s.scheme == Scheme::Sequential));
    }

    #[test]
    fn swap_penalty_charged_on_switch_steps() {
        let cfg = StrategyConfig::default().with_swap_penalty(0.25).unwrap();
        let s = series(vec![2.0, 2.0, 6.5, 6.5, 2.0]);
        let trace = run_strategy(&s, &PerfectForesight { lookback: 1 }, &cfg).unwrap();
        assert_eq!(trace.switches(), 2);
        let base = |scheme, load| score(&cfg, scheme, load).unwrap().mean_system_time.finite().unwrap();
        let times: Vec<f64> = trace.steps.iter().map(|s| s.mean_system_time.finite().unwrap()).collect();
        assert_eq!(
            times,
            vec![
                base(Scheme::Sequential, 2.0),
                base(Scheme::Concurrent, 6.5) + 0.25,
                base(Scheme::Concurrent, 6.5),
                base(Scheme::Sequential, 2.0) + 0.25,
            ]
        );
    }

    #[test]
    fn trace_csv_layout() {
        let trace =
            run_strategy(&series(vec![1.0, 2.0, 3.0]), &PerfectForesight { lookback: 1 }, &StrategyConfig::default())
                .unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,actual,predicted,scheme,pwait,T"));
        assert!(lines.next().unwrap().starts_with("1,2,2,sequential,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn scheme_round_trip() {
        for s in [Scheme::Sequential, Scheme::Concurrent] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("both".parse::<Scheme>().is_err());
    }

    proptest! {
        #[test]
        fn decide_is_monotone(a in 0.0f64..9.0, b in 0.0f64..9.0) {
            let cfg = StrategyConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rank = |s| if s == Scheme::Sequential { 0 } else { 1 };
            prop_assert!(rank(decide(lo, &cfg, None)) <= rank(decide(hi, &cfg, None)));
        }

        #[test]
        fn decisions_ignore_curve_scaling(load in 0.0f64..6.9, k in 0.9f64..1.1) {
            let base = StrategyConfig::default();
            let seq = PagingSchemeConfig::new("seq", 7, k).unwrap();
            let conc = PagingSchemeConfig::new("conc", 14, 1.5 * k).unwrap();
            // service times scaled by k: T curves scale by k and the rate axis by 1/k
            let scaled = StrategyConfig::new(seq.clone(), conc.clone(), None).unwrap();
            prop_assert!((scaled.threshold() * k - base.threshold()).abs() < 1e-5);
            let pinned = StrategyConfig::new(seq, conc, Some(base.threshold())).unwrap();
            prop_assert_eq!(decide(load, &base, None), decide(load, &pinned, None));
        }

        #[test]
        fn oracle_attains_pointwise_min(loads in prop::collection::vec(0.0f64..9.0, 2..60)) {
            let cfg = StrategyConfig::default();
            let cmp = compare_strategies(&series(loads), &PerfectForesight { lookback: 1 }, &cfg).unwrap();
            for r in &cmp.rows {
                let seq = r.sequential.mean_system_time.to_real();
                let conc = r.concurrent.mean_system_time.to_real();
                let chosen = r.step.mean_system_time.to_real();
                prop_assert!(chosen <= seq.min(conc) + 1e-9, "{} vs {} {}", chosen, seq, conc);
                let c = cfg.scheme(r.step.scheme);
                let pw = erlang_c(c.channels(), r.step.actual * c.mean_service_time());
                prop_assert_eq!(r.step.wait_probability, pw);
            }
        }

        #[test]
        fn hysteresis_prevents_chatter(loads in prop::collection::vec(0.0f64..9.0, 2..80), h in 0.0f64..1.5) {
            let cfg = StrategyConfig::default().with_hysteresis(h).unwrap();
            let trace = run_strategy(&series(loads), &PerfectForesight { lookback: 1 }, &cfg).unwrap();
            let mut last_switch: Option<f64> = None;
            for w in trace.steps.windows(2) {
                if w[0].scheme != w[1].scheme {
                    let load = w[1].predicted;
                    if let Some(prev) = last_switch {
                        prop_assert!((load - prev).abs() >= 2.0 * h - 1e-12);
                    }
                    last_switch = Some(load);
                }
            }
        }
    }
}
