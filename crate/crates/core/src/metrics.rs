//! Predictor fidelity metrics: MSE, normalized MSE, RMSE, normalized RMSE,
//! percent root-mean difference, Pearson correlation and the raw
//! cross-correlation sequence.
//!
//! The normalized variants divide by the energy `Σ x(n)²` of the actual
//! series, so `nmse = nrmse²` and `prd = 100 · nrmse` hold by construction.

use crate::error::{Error, Result};
use crate::format::g17;
use crate::scalar::Real;

pub const CSV_HEADER: &str = "mse,nmse,rmse,nrmse,prd,correlation_coefficient";

/// Marker written in place of an undefined correlation coefficient.
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    pub mse: T,
    pub nmse: T,
    pub rmse: T,
    pub nrmse: T,
    pub prd: T,
    /// `None` when either series has zero variance.
    pub pearson: Option<T>,
    pub n: usize,
}

impl MetricsReport<f64> {
    /// One row in [`CSV_HEADER`] order.
    pub fn to_csv_row(&self) -> String {
        let pearson = self.pearson.map_or_else(|| UNDEFINED.to_string(), g17);
        format!(
            "{},{},{},{},{},{}",
            g17(self.mse),
            g17(self.nmse),
            g17(self.rmse),
            g17(self.nrmse),
            g17(self.prd),
            pearson
        )
    }
}

fn check_pair<T>(actual: &[T], predicted: &[T]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: actual.len(), right: predicted.len() });
    }
    if actual.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: actual.len() });
    }
    Ok(())
}

pub fn error_metrics<T: Real>(actual: &[T], predicted: &[T]) -> Result<MetricsReport<T>> {
    check_pair(actual, predicted)?;
    let n = actual.len();
    let sse = actual.iter().zip(predicted).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    let energy = actual.iter().fold(T::zero(), |acc, &x| acc + x * x);
    if energy == T::zero() {
        return Err(Error::ZeroEnergy);
    }
    let mse = sse / T::count(n);
    let nmse = sse / energy;
    let nrmse = nmse.sqrt();
    Ok(MetricsReport {
        mse,
        nmse,
        rmse: mse.sqrt(),
        nrmse,
        prd: nrmse * T::lit(100.0),
        pearson: pearson(actual, predicted)?,
        n,
    })
}

/// Sample correlation coefficient; `None` for a constant series.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<Option<T>> {
    check_pair(x, y)?;
    let n = T::count(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one())))
}

/// `r_xy(l)` for `l ∈ [−max_lag, max_lag]`, samples outside the series are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation<T> {
    max_lag: usize,
    values: Vec<T>,
}

impl<T: Real> CrossCorrelation<T> {
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn at(&self, lag: isize) -> Option<T> {
        let idx = lag + self.max_lag as isize;
        usize::try_from(idx).ok().and_then(|i| self.values.get(i)).copied()
    }

    /// `(lag, value)` pairs in increasing lag order.
    pub fn iter(&self) -> impl Iterator<Item = (isize, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (i as isize - self.max_lag as isize, v))
    }

    /// Lag of the largest value; the smallest lag wins ties.
    pub fn argmax(&self) -> isize {
        let mut best = (-(self.max_lag as isize), self.values[0]);
        for (lag, v) in self.iter() {
            if v > best.1 {
                best = (lag, v);
            }
        }
        best.0
    }
}

fn sample<T: Real>(s: &[T], i: isize) -> T {
    usize::try_from(i).ok().and_then(|i| s.get(i)).copied().unwrap_or_else(T::zero)
}

fn overlap(len_x: usize, len_y: usize, lag: isize) -> std::ops::Range<isize> {
    // indices n of x with 0 <= n - lag < len_y
    let lo = lag.max(0);
    let hi = (len_x as isize).min(len_y as isize + lag);
    lo..hi.max(lo)
}

/// Lagged form, `r_xy(l) = Σ_n x(n) · y(n − l)`.
pub fn cross_correlation<T: Real>(x: &[T], y: &[T], max_lag: usize) -> CrossCorrelation<T> {
    let m = max_lag as isize;
    let values = (-m..=m)
        .map(|l| overlap(x.len(), y.len(), l).fold(T::zero(), |acc, n| acc + sample(x, n) * sample(y, n - l)))
        .collect();
    CrossCorrelation { max_lag, values }
}

/// Leading form, `r_xy(l) = Σ_n x(n + l) · y(n)`; identical sequence.
pub fn cross_correlation_leading<T: Real>(x: &[T], y: &[T], max_lag: usize) -> CrossCorrelation<T> {
    let m = max_lag as isize;
    let values = (-m..=m)
        .map(|l| {
            // indices n of y with 0 <= n + l < len_x
            let lo = (-l).max(0);
            let hi = (y.len() as isize).min(x.len() as isize - l);
            (lo..hi.max(lo)).fold(T::zero(), |acc, n| acc + sample(x, n + l) * sample(y, n))
        })
        .collect();
    CrossCorrelation { max_lag, values }
}
