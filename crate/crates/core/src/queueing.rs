//! Erlang B/C evaluation and the mean-system-time curves of the two paging
//! schemes.
//!
//! Each paging scheme is an M/M/C queue with an infinite FIFO buffer. The
//! probability that an arriving page has to wait is the Erlang C formula;
//! following the usual teletraffic literature on paging it is reported here
//! as the scheme's "blocking probability", although strictly speaking nothing
//! is blocked (cleared) in a delay system.
//!
//! Curves are always parameterized by the arrival rate λ, which is the one
//! quantity shared by both schemes; each scheme then sees its own offered
//! traffic `A = λ / μ`.

use std::fmt;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::scalar::{Field, Real};

/// Absolute tolerance on `|T_a − T_b|` at the reported crossover.
pub const CROSSOVER_TOLERANCE: f64 = 1e-6;

/// A paging scheme viewed as a queue: `C` identical servers of mean service
/// time `1/μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PagingSchemeConfig<T> {
    name: String,
    channels: u32,
    mean_service_time: T,
}

impl<T: Field> PagingSchemeConfig<T> {
    pub fn new(name: impl Into<String>, channels: u32, mean_service_time: T) -> Result<Self> {
        let name = name.into();
        if channels == 0 {
            return Err(Error::InvalidScheme(format!("{name}: channel count must be at least 1")));
        }
        if !(mean_service_time > T::zero()) {
            return Err(Error::InvalidScheme(format!("{name}: mean service time must be positive")));
        }
        Ok(Self { name, channels, mean_service_time })
    }

    /// Sequential search: 7 paging channels, unit mean paging time.
    pub fn sequential() -> Self {
        Self::new("seq", 7, T::one()).expect("valid constants")
    }

    /// Concurrent search: 14 paging channels (two carriers), 1.5-unit mean
    /// paging time.
    pub fn concurrent() -> Self {
        let service = T::from_count(3) / T::from_count(2);
        Self::new("conc", 14, service).expect("valid constants")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn channels(&self) -> u32 {
        self.channels
    }

    pub fn mean_service_time(&self) -> &T {
        &self.mean_service_time
    }

    /// Service rate μ.
    pub fn service_rate(&self) -> T {
        T::one() / self.mean_service_time.clone()
    }

    /// Arrival rate at which the offered traffic reaches the channel count.
    pub fn saturation_rate(&self) -> T {
        T::from_count(self.channels) / self.mean_service_time.clone()
    }

    pub fn offered_load(&self, arrival_rate: T) -> OfferedLoad<T> {
        let offered_traffic = arrival_rate.clone() * self.mean_service_time.clone();
        OfferedLoad { arrival_rate, offered_traffic }
    }

    pub fn is_stable(&self, arrival_rate: T) -> bool {
        self.offered_load(arrival_rate).offered_traffic < T::from_count(self.channels)
    }
}

/// Arrival rate λ together with the offered traffic `A = λ/μ` it induces on
/// one particular scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferedLoad<T> {
    pub arrival_rate: T,
    pub offered_traffic: T,
}

/// Mean time in system, or the marker for an unstable queue (`A ≥ C`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemTime<T> {
    Finite(T),
    Divergent,
}

impl<T> SystemTime<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            SystemTime::Finite(t) => Some(t),
            SystemTime::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, SystemTime::Divergent)
    }
}

impl<T: Real> SystemTime<T> {
    /// Divergence mapped to `+∞`.
    pub fn to_real(self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }
}

impl fmt::Display for SystemTime<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemTime::Finite(t) => f.write_str(&g17(*t)),
            SystemTime::Divergent => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueMetrics<T> {
    /// Erlang C probability that an arrival waits.
    pub wait_probability: T,
    pub mean_system_time: SystemTime<T>,
}

/// Erlang B loss probability via `B(k) = A·B(k−1) / (k + A·B(k−1))`.
pub fn erlang_b<T: Field>(channels: u32, traffic: T) -> T {
    let mut b = T::one();
    for k in 1..=channels {
        let ab = traffic.clone() * b;
        b = ab.clone() / (T::from_count(k) + ab);
    }
    b
}

/// Erlang C wait probability, `C·B / (C − A·(1 − B))`; exactly 1 once `A ≥ C`.
pub fn erlang_c<T: Field>(channels: u32, traffic: T) -> T {
    let c = T::from_count(channels);
    if traffic >= c {
        return T::one();
    }
    let b = erlang_b(channels, traffic.clone());
    c.clone() * b.clone() / (c - traffic * (T::one() - b))
}

/// Mean time in system `T = P_wait / (μ (C − A)) + 1/μ` at arrival rate λ.
pub fn mean_system_time<T: Field>(scheme: &PagingSchemeConfig<T>, arrival_rate: T) -> Result<QueueMetrics<T>> {
    if arrival_rate < T::zero() {
        return Err(Error::InvalidArgument("arrival rate must be nonnegative".into()));
    }
    let load = scheme.offered_load(arrival_rate);
    let c = T::from_count(scheme.channels);
    let a = load.offered_traffic;
    if a >= c {
        return Ok(QueueMetrics { wait_probability: T::one(), mean_system_time: SystemTime::Divergent });
    }
    let pw = erlang_c(scheme.channels, a.clone());
    let s = scheme.mean_service_time.clone();
    let t = pw.clone() * s.clone() / (c - a) + s;
    Ok(QueueMetrics { wait_probability: pw, mean_system_time: SystemTime::Finite(t) })
}

fn time_at<T: Real>(scheme: &PagingSchemeConfig<T>, lambda: T) -> T {
    mean_system_time(scheme, lambda).expect("nonnegative rate").mean_system_time.to_real()
}

fn first_saturating<'s, T: Real>(
    a: &'s PagingSchemeConfig<T>,
    b: &'s PagingSchemeConfig<T>,
) -> &'s PagingSchemeConfig<T> {
    if a.saturation_rate() <= b.saturation_rate() {
        a
    } else {
        b
    }
}

/// Locates λ* with `T_a(λ*) = T_b(λ*)` inside `bracket` by bisection.
///
/// Saturation counts as `T = +∞`, so a scheme that diverges at the upper end
/// of the bracket still provides a sign as long as the other one is stable.
pub fn find_crossover<T: Real>(a: &PagingSchemeConfig<T>, b: &PagingSchemeConfig<T>, bracket: (T, T)) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= T::zero() && hi > lo) {
        return Err(Error::InvalidArgument("bracket must satisfy 0 <= lo < hi".into()));
    }
    let as_f64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
    for s in [a, b] {
        if !s.is_stable(lo) {
            return Err(Error::Unstable { scheme: s.name.clone(), lambda: as_f64(lo) });
        }
    }
    let diff = |l: T| time_at(a, l) - time_at(b, l);
    let mut f_lo = diff(lo);
    let f_hi = diff(hi);
    let saturated = !a.is_stable(hi) || !b.is_stable(hi);
    let straddles =
        f_lo != T::zero() && !f_hi.is_nan() && f_hi != T::zero() && (f_lo < T::zero()) != (f_hi < T::zero());
    if !straddles {
        if f_hi == T::zero() && f_lo != T::zero() {
            return Ok(hi);
        }
        if saturated {
            let s = first_saturating(a, b);
            return Err(Error::Unstable { scheme: s.name.clone(), lambda: as_f64(s.saturation_rate()) });
        }
        return Err(Error::NoSignChange { lo: as_f64(lo), hi: as_f64(hi) });
    }
    let two = T::lit(2.0);
    loop {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = diff(mid);
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if (f_mid < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let f_hi = diff(hi);
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Metrics of several schemes over a common arrival-rate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable<T> {
    pub schemes: Vec<String>,
    pub rows: Vec<CurveRow<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow<T> {
    pub arrival_rate: T,
    pub metrics: Vec<QueueMetrics<T>>,
}

/// Tabulates every scheme over a strictly increasing grid of arrival rates.
pub fn sweep_curves<T: Field>(schemes: &[PagingSchemeConfig<T>], grid: &[T]) -> Result<CurveTable<T>> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("arrival-rate grid must be strictly increasing".into()));
    }
    let rows = grid
        .iter()
        .map(|lambda| {
            let metrics = schemes.iter().map(|s| mean_system_time(s, lambda.clone())).collect::<Result<Vec<_>>>()?;
            Ok(CurveRow { arrival_rate: lambda.clone(), metrics })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable { schemes: schemes.iter().map(|s| s.name.clone()).collect(), rows })
}

impl CurveTable<f64> {
    /// `lambda,<scheme>_pwait,<scheme>_T,...`; divergent times are written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda");
        for s in &self.schemes {
            out.push_str(&format!(",{s}_pwait,{s}_T"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&g17(row.arrival_rate));
            for m in &row.metrics {
                out.push_str(&format!(",{},{}", g17(m.wait_probability), m.mean_system_time));
            }
            out.push('\n');
        }
        out
    }
}
