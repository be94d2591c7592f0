//! Discrete-event simulation of an M/M/c FIFO queue.
//!
//! The simulator is the independent check on the closed-form wait
//! probability and mean system time. Events sit in a binary heap ordered by
//! `(time, sequence number)`, so equal timestamps resolve in scheduling order.
//!
//! Randomness comes from ChaCha8 (`rand_chacha` 0.3): stream 0 of the seed
//! drives interarrival times, stream 1 service times, and both use inversion
//! `−ln(1 − U) / rate` on `U = gen::<f64>()`.
//!
//! Only customers arriving inside `[warmup, horizon)` are measured. Arrivals
//! stop at the horizon, and the run continues until every measured customer
//! has left. Confidence intervals come from batch means: consecutive measured
//! customers for the per-customer statistics, equal time slices for the
//! time-average number in system. The wait-probability interval is never
//! narrower than the Wilson score interval of `waited / served`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::format::g17;
use crate::traffic::TrafficSeries;

/// Fewer measured arrivals than this is a degenerate run.
pub const MIN_ARRIVALS: u64 = 1000;
pub const MIN_BATCHES: usize = 20;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalProcess {
    /// Homogeneous Poisson arrivals.
    Constant(f64),
    /// Piecewise-constant rate: sample `k` holds on `[k·period, (k+1)·period)`,
    /// the last sample holds afterwards.
    Series(TrafficSeries),
}

impl ArrivalProcess {
    fn rate_at_segment(&self, k: usize) -> f64 {
        match self {
            ArrivalProcess::Constant(r) => *r,
            ArrivalProcess::Series(s) => s.samples()[k.min(s.len() - 1)],
        }
    }

    fn segment_length(&self) -> f64 {
        match self {
            ArrivalProcess::Constant(_) => f64::INFINITY,
            ArrivalProcess::Series(s) => s.period(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub channels: u32,
    pub mean_service_time: f64,
    pub arrivals: ArrivalProcess,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub batches: usize,
    /// Keep the per-customer record of every measured customer.
    pub record_trace: bool,
}

impl SimConfig {
    /// Homogeneous run with a 10% warmup and 20 batches.
    pub fn homogeneous(channels: u32, mean_service_time: f64, arrival_rate: f64, horizon: f64, seed: u64) -> Self {
        Self {
            channels,
            mean_service_time,
            arrivals: ArrivalProcess::Constant(arrival_rate),
            horizon,
            warmup: DEFAULT_WARMUP_FRACTION * horizon,
            seed,
            batches: MIN_BATCHES,
            record_trace: false,
        }
    }

    /// Horizon giving about `arrivals` measured customers at a constant rate.
    pub fn horizon_for_arrivals(arrivals: u64, arrival_rate: f64) -> f64 {
        arrivals as f64 / arrival_rate / (1.0 - DEFAULT_WARMUP_FRACTION)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.channels == 0 {
            return bad("channels must be at least 1".into());
        }
        if !(self.mean_service_time.is_finite() && self.mean_service_time > 0.0) {
            return bad("mean service time must be positive".into());
        }
        if let ArrivalProcess::Constant(r) = self.arrivals {
            if !(r.is_finite() && r >= 0.0) {
                return bad("arrival rate must be nonnegative".into());
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive".into());
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return bad(format!("warmup {} must lie in [0, horizon)", self.warmup));
        }
        if self.batches < MIN_BATCHES {
            return bad(format!("at least {MIN_BATCHES} batches are required"));
        }
        Ok(())
    }
}

/// Point estimate with the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci95_halfwidth: f64,
}

impl Estimate {
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.ci95_halfwidth
    }

    /// Inside the CI or within `rel` relative error of `value`, whichever is looser.
    pub fn agrees_with(&self, value: f64, rel: f64) -> bool {
        (value - self.mean).abs() <= self.ci95_halfwidth.max(rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomerRecord {
    pub arrival: f64,
    pub service_start: f64,
    pub departure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Measured customers (all of them are served before the run ends).
    pub served: u64,
    /// Measured customers that found every server busy.
    pub waited: u64,
    pub wait_probability: Estimate,
    pub mean_system_time: Estimate,
    /// Time-average number in system over `[warmup, horizon)`.
    pub mean_in_system: Estimate,
    /// Largest number of simultaneously busy servers seen.
    pub max_busy: u32,
    pub trace: Option<Vec<CustomerRecord>>,
}

impl SimResult {
    /// `arrival,service_start,departure` for every measured customer.
    pub fn trace_csv(&self) -> Option<String> {
        self.trace.as_ref().map(|trace| {
            let mut out = String::from("arrival,service_start,departure\n");
            for r in trace {
                out.push_str(&format!("{},{},{}\n", g17(r.arrival), g17(r.service_start), g17(r.departure)));
            }
            out
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Arrival,
    Departure(usize),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Calendar {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Calendar {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.heap.push(Event { time, seq: self.seq, kind });
        self.seq += 1;
    }
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Next arrival strictly after `now`, or `None` past the horizon.
fn next_arrival(process: &ArrivalProcess, rng: &mut ChaCha8Rng, now: f64, horizon: f64) -> Option<f64> {
    let seg_len = process.segment_length();
    let mut t = now;
    loop {
        if t >= horizon {
            return None;
        }
        let k = if seg_len.is_finite() { (t / seg_len).floor() as usize } else { 0 };
        let seg_end = if seg_len.is_finite() { (k + 1) as f64 * seg_len } else { f64::INFINITY };
        let rate = process.rate_at_segment(k);
        if rate > 0.0 {
            let candidate = t + exponential(rng, rate);
            if candidate < seg_end {
                return (candidate < horizon).then_some(candidate);
            }
        }
        if !seg_end.is_finite() {
            return None;
        }
        // memoryless: restart the clock at the segment boundary
        t = seg_end.max(t);
    }
}

/// Integrates the number in system over equal time slices of the window.
struct AreaAccumulator {
    start: f64,
    width: f64,
    slices: Vec<f64>,
}

impl AreaAccumulator {
    fn new(start: f64, end: f64, batches: usize) -> Self {
        Self { start, width: (end - start) / batches as f64, slices: vec![0.0; batches] }
    }

    fn add(&mut self, from: f64, to: f64, level: f64) {
        if level == 0.0 {
            return;
        }
        let end = self.start + self.width * self.slices.len() as f64;
        let (mut a, b) = (from.max(self.start), to.min(end));
        while a < b {
            let k = (((a - self.start) / self.width).floor() as usize).min(self.slices.len() - 1);
            let slice_end = (self.start + (k + 1) as f64 * self.width).min(b);
            let stop = if slice_end > a { slice_end } else { b };
            self.slices[k] += level * (stop - a);
            a = stop;
        }
    }
}

fn batch_estimate(batch_means: &[f64]) -> Estimate {
    let b = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / b;
    let var = batch_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    let t = StudentsT::new(0.0, 1.0, b - 1.0).expect("positive degrees of freedom").inverse_cdf(0.975);
    Estimate { mean, ci95_halfwidth: t * (var / b).sqrt() }
}

/// Largest distance from `p̂ = k/n` to an end of the 95% Wilson score interval.
fn wilson_reach(k: u64, n: u64) -> f64 {
    let z = Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(0.975);
    let (n, p) = (n as f64, k as f64 / n as f64);
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center + half) - p).max(p - (center - half))
}

fn customer_batches(values: &[f64], batches: usize) -> Vec<f64> {
    let per = values.len() / batches;
    (0..batches)
        .map(|k| {
            let end = if k + 1 == batches { values.len() } else { (k + 1) * per };
            let chunk = &values[k * per..end];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect()
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(config.seed);
    arrival_rng.set_stream(0);
    let mut service_rng = ChaCha8Rng::seed_from_u64(config.seed);
    service_rng.set_stream(1);
    let service_rate = 1.0 / config.mean_service_time;
    let c = config.channels;

    let mut calendar = Calendar { heap: BinaryHeap::new(), seq: 0 };
    let mut customers: Vec<CustomerRecord> = Vec::new();
    let mut first_measured: Option<usize> = None;
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut busy: u32 = 0;
    let mut max_busy = 0;
    let mut clock = 0.0;
    let mut area = AreaAccumulator::new(config.warmup, config.horizon, config.batches);

    if let Some(t) = next_arrival(&config.arrivals, &mut arrival_rng, 0.0, config.horizon) {
        calendar.schedule(t, EventKind::Arrival);
    }
    while let Some(event) = calendar.heap.pop() {
        debug_assert!(event.time >= clock, "event clock went backwards");
        area.add(clock, event.time, (busy as usize + queue.len()) as f64);
        clock = event.time;
        match event.kind {
            EventKind::Arrival => {
                let id = customers.len();
                if first_measured.is_none() && clock >= config.warmup {
                    first_measured = Some(id);
                }
                customers.push(CustomerRecord { arrival: clock, service_start: f64::NAN, departure: f64::NAN });
                if busy < c {
                    busy += 1;
                    customers[id].service_start = clock;
                    calendar.schedule(clock + exponential(&mut service_rng, service_rate), EventKind::Departure(id));
                } else {
                    queue.push_back(id);
                }
                if let Some(t) = next_arrival(&config.arrivals, &mut arrival_rng, clock, config.horizon) {
                    calendar.schedule(t, EventKind::Arrival);
                }
            }
            EventKind::Departure(id) => {
                customers[id].departure = clock;
                if let Some(next) = queue.pop_front() {
                    customers[next].service_start = clock;
                    calendar.schedule(clock + exponential(&mut service_rng, service_rate), EventKind::Departure(next));
                } else {
                    busy -= 1;
                }
            }
        }
        max_busy = max_busy.max(busy);
        debug_assert!(busy <= c);
    }

    let measured = first_measured.map_or(&customers[..0], |i| &customers[i..]);
    let n = measured.len() as u64;
    if n < MIN_ARRIVALS {
        return Err(Error::DegenerateHorizon { arrivals: n, required: MIN_ARRIVALS });
    }
    let waits: Vec<f64> = measured.iter().map(|r| f64::from(u8::from(r.service_start > r.arrival))).collect();
    let times: Vec<f64> = measured.iter().map(|r| r.departure - r.arrival).collect();
    let waited = waits.iter().filter(|&&w| w > 0.0).count() as u64;
    let l_batches: Vec<f64> = area.slices.iter().map(|a| a / area.width).collect();
    // Wilson floor for rare waits
    let mut wait_probability = batch_estimate(&customer_batches(&waits, config.batches));
    wait_probability.ci95_halfwidth = wait_probability.ci95_halfwidth.max(wilson_reach(waited, n));
    Ok(SimResult {
        served: n,
        waited,
        wait_probability,
        mean_system_time: batch_estimate(&customer_batches(&times, config.batches)),
        mean_in_system: batch_estimate(&l_batches),
        max_busy,
        trace: config.record_trace.then(|| measured.to_vec()),
    })
}

/// Runs one replication per seed on scoped worker threads; results come back
/// in seed order.
pub fn replicate(config: &SimConfig, seeds: &[u64]) -> Result<Vec<SimResult>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let cfg = SimConfig { seed, ..config.clone() };
                scope.spawn(move || simulate(&cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    })
}

/// Little's law: time-average number in system against `λ · W`, within three
/// combined CI half-widths.
pub fn little_check(result: &SimResult, arrival_rate: f64) -> bool {
    let l = result.mean_in_system;
    let w = result.mean_system_time;
    let tolerance = 3.0 * (l.ci95_halfwidth.powi(2) + (arrival_rate * w.ci95_halfwidth).powi(2)).sqrt();
    (l.mean - arrival_rate * w.mean).abs() <= tolerance
}
