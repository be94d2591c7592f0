//! Radial-basis-function network for one-step-ahead load forecasting.
//!
//! The hidden layer holds Gaussian units. A unit's net input is its Euclidean
//! distance to the input window multiplied by a bias `b`, and its output is
//! `exp(−n²)`. With `b = 0.8326 ≈ √ln 2` a unit answers 0.5 at distance 1,
//! which is the Gaussian `exp(−d² / 2σ²)` with `σ = 1 / (b√2)`. The output
//! layer is linear: `O = offset + Σ g_j h_j`.
//!
//! Inputs are sliding windows of the last `W` loads and the target is the
//! next load, all divided by the largest training load. The scale is kept in
//! the model so callers work in Erlang throughout.
//!
//! Training is greedy: start from the constant model, then repeatedly promote
//! the training window with the largest absolute residual to a new center and
//! refit every output weight by least squares (optionally ridge-regularized)
//! until the training MSE meets the goal or the neuron budget is spent. The
//! goal is expressed in squared Erlang unless [`MseUnits::Normalized`] is
//! requested.

use std::fmt;

use crate::error::{Error, Result};
use crate::format::{g17, parse_f64};
use crate::linalg::{least_squares, Matrix};
use num_traits::Float;

use crate::scalar::Real;

/// Gives activation 0.5 at unit distance.
pub const DEFAULT_BIAS: f64 = 0.8326;
pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_MSE_GOAL: f64 = 0.02;
pub const DEFAULT_MAX_NEURONS: usize = 60;
pub const DEFAULT_RIDGE: f64 = 0.0;

const FORMAT_TAG: &str = "rbf-model";
const FORMAT_VERSION: u32 = 1;

/// Gaussian unit response `exp(−(distance · bias)²)`.
pub fn activation<T: Real>(distance: T, bias: T) -> T {
    let net = distance * bias;
    (-(net * net)).exp()
}

fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel<T> {
    centers: Vec<Vec<T>>,
    weights: Vec<T>,
    offset: T,
    bias: T,
    window: usize,
    scale: T,
}

impl<T: Real> RbfModel<T> {
    pub fn new(centers: Vec<Vec<T>>, weights: Vec<T>, offset: T, bias: T, window: usize, scale: T) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != window) {
            return Err(Error::DimensionMismatch { expected: window, got: c.len() });
        }
        if weights.len() != centers.len() {
            return Err(Error::DimensionMismatch { expected: centers.len(), got: weights.len() });
        }
        if !(bias > T::zero()) {
            return Err(Error::InvalidArgument("bias must be positive".into()));
        }
        if !(scale > T::zero()) {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        Ok(Self { centers, weights, offset, bias, window, scale })
    }

    pub fn centers(&self) -> &[Vec<T>] {
        &self.centers
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    /// Width of the equivalent Gaussian, `1 / (b√2)`.
    pub fn sigma(&self) -> T {
        T::one() / (self.bias * T::lit(2.0).sqrt())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn neurons(&self) -> usize {
        self.centers.len()
    }

    /// Output for a window already divided by [`scale`](Self::scale).
    pub fn predict_normalized(&self, window: &[T]) -> Result<T> {
        if window.len() != self.window {
            return Err(Error::DimensionMismatch { expected: self.window, got: window.len() });
        }
        Ok(self
            .centers
            .iter()
            .zip(&self.weights)
            .fold(self.offset, |acc, (c, &g)| acc + g * activation(distance(window, c), self.bias)))
    }

    /// Next-sample load (Erlang) from the last `W` loads.
    pub fn predict(&self, window: &[T]) -> Result<T> {
        let normalized: Vec<T> = window.iter().map(|&x| x / self.scale).collect();
        Ok(self.predict_normalized(&normalized)? * self.scale)
    }
}

impl RbfModel<f64> {
    /// Plain-text form: a versioned header, one line per center (its `W`
    /// coordinates then its output weight), and the output offset. Numbers
    /// carry 17 significant digits, so the round trip is exact.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{FORMAT_TAG} {FORMAT_VERSION}\nwindow {}\nbias {}\nscale {}\nneurons {}\n",
            self.window,
            g17(self.bias),
            g17(self.scale),
            self.centers.len()
        );
        for (c, &g) in self.centers.iter().zip(&self.weights) {
            let mut fields: Vec<String> = c.iter().map(|&x| g17(x)).collect();
            fields.push(g17(g));
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out.push_str(&format!("offset {}\n", g17(self.offset)));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
        let mut cursor = lines.into_iter();
        let mut next = |what: &str| cursor.next().ok_or(Error::Parse { line: 0, msg: format!("missing {what}") });
        let field = |(ln, l): (usize, &str), key: &str| match l.split_once(' ') {
            Some((k, v)) if k == key => Ok((ln, v.trim().to_string())),
            _ => Err(Error::Parse { line: ln, msg: format!("expected `{key} <value>`") }),
        };
        let int = |(ln, v): (usize, String)| {
            v.parse::<usize>().map_err(|_| Error::Parse { line: ln, msg: format!("bad integer `{v}`") })
        };
        let real =
            |(ln, v): (usize, String)| parse_f64(&v).ok_or(Error::Parse { line: ln, msg: format!("bad number `{v}`") });

        let (ln, tag) = next("header")?;
        if tag != format!("{FORMAT_TAG} {FORMAT_VERSION}") {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected `{FORMAT_TAG} {FORMAT_VERSION}`, got `{tag}`"),
            });
        }
        let window = int(field(next("window")?, "window")?)?;
        let bias = real(field(next("bias")?, "bias")?)?;
        let scale = real(field(next("scale")?, "scale")?)?;
        let neurons = int(field(next("neurons")?, "neurons")?)?;
        let mut centers = Vec::with_capacity(neurons);
        let mut weights = Vec::with_capacity(neurons);
        for _ in 0..neurons {
            let (ln, l) = next("center")?;
            let values = l
                .split_whitespace()
                .map(|tok| parse_f64(tok).ok_or(Error::Parse { line: ln, msg: format!("bad number `{tok}`") }))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != window + 1 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {} values, got {}", window + 1, values.len()),
                });
            }
            weights.push(values[window]);
            centers.push(values[..window].to_vec());
        }
        let offset = real(field(next("offset")?, "offset")?)?;
        Self::new(centers, weights, offset, bias, window, scale)
    }
}

/// Units the MSE goal (and the reported MSE) are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseUnits {
    /// Squared Erlang, i.e. normalized MSE times `scale²`.
    #[default]
    Erlang,
    /// Squared normalized load.
    Normalized,
}

impl fmt::Display for MseUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MseUnits::Erlang => "erlang",
            MseUnits::Normalized => "normalized",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions<T> {
    pub window: usize,
    pub bias: T,
    pub mse_goal: T,
    pub goal_units: MseUnits,
    pub max_neurons: usize,
    pub ridge: T,
}

impl<T: Real> Default for TrainOptions<T> {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            bias: T::lit(DEFAULT_BIAS),
            mse_goal: T::lit(DEFAULT_MSE_GOAL),
            goal_units: MseUnits::default(),
            max_neurons: DEFAULT_MAX_NEURONS,
            ridge: T::lit(DEFAULT_RIDGE),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport<T> {
    pub neurons: usize,
    /// Training MSE in `goal_units`.
    pub final_mse: T,
    /// Training MSE after each added neuron, in `goal_units`.
    pub mse_history: Vec<T>,
    pub goal_met: bool,
    pub goal_units: MseUnits,
    pub scale: T,
}

impl<T: Real> TrainReport<T> {
    pub fn normalized_mse(&self) -> T {
        match self.goal_units {
            MseUnits::Normalized => self.final_mse,
            MseUnits::Erlang => self.final_mse / (self.scale * self.scale),
        }
    }
}

/// Sliding `(window → next)` pairs over `samples`.
pub fn window_pairs<T: Real>(samples: &[T], window: usize) -> (Vec<&[T]>, Vec<T>) {
    (0..samples.len().saturating_sub(window)).map(|i| (&samples[i..i + window], samples[i + window])).unzip()
}

pub fn train<T: Real>(samples: &[T], opts: &TrainOptions<T>) -> Result<(RbfModel<T>, TrainReport<T>)> {
    let w = opts.window;
    if w == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if samples.len() < w + 2 {
        return Err(Error::InsufficientData { needed: w + 2, got: samples.len() });
    }
    if !(opts.mse_goal > T::zero()) {
        return Err(Error::InvalidArgument("mse goal must be positive".into()));
    }
    if opts.max_neurons == 0 {
        return Err(Error::InvalidArgument("max_neurons must be at least 1".into()));
    }
    if !(opts.bias > T::zero()) {
        return Err(Error::InvalidArgument("bias must be positive".into()));
    }
    if samples.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidArgument("training loads must be finite and nonnegative".into()));
    }
    let peak = samples.iter().copied().fold(T::zero(), T::max);
    let scale = if peak > T::zero() { peak } else { T::one() };
    let normalized: Vec<T> = samples.iter().map(|&x| x / scale).collect();
    let (inputs, targets) = window_pairs(&normalized, w);
    let n = inputs.len();
    let units_factor = match opts.goal_units {
        MseUnits::Erlang => scale * scale,
        MseUnits::Normalized => T::one(),
    };

    let mean = targets.iter().fold(T::zero(), |a, &y| a + y) / T::count(n);
    let mut residuals: Vec<T> = targets.iter().map(|&y| y - mean).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut is_center = vec![false; n];
    let mut columns: Vec<Vec<T>> = Vec::new();
    let mut coef = vec![mean];
    let mut history = Vec::new();

    while chosen.len() < opts.max_neurons && chosen.len() < n {
        // Largest |residual|, earliest index on ties.
        let mut pick: Option<usize> = None;
        for i in (0..n).filter(|&i| !is_center[i]) {
            match pick {
                Some(p) if Float::abs(residuals[i]) <= Float::abs(residuals[p]) => {}
                _ => pick = Some(i),
            }
        }
        let Some(pick) = pick else { break };
        is_center[pick] = true;
        chosen.push(pick);
        columns.push(inputs.iter().map(|x| activation(distance(x, inputs[pick]), opts.bias)).collect());

        let k = columns.len() + 1;
        let mut design = Matrix::zeros(n, k);
        for i in 0..n {
            design[(i, 0)] = T::one();
            for (j, col) in columns.iter().enumerate() {
                design[(i, j + 1)] = col[i];
            }
        }
        coef = least_squares(&design, &targets, opts.ridge)?;
        let fitted = design.mul_vec(&coef);
        residuals = targets.iter().zip(&fitted).map(|(&y, &f)| y - f).collect();
        let mse = residuals.iter().fold(T::zero(), |a, &r| a + r * r) / T::count(n) * units_factor;
        history.push(mse);
        if mse <= opts.mse_goal {
            break;
        }
    }

    let final_mse = *history.last().expect("at least one neuron is trained");
    let centers = chosen.iter().map(|&i| inputs[i].to_vec()).collect();
    let model = RbfModel::new(centers, coef[1..].to_vec(), coef[0], opts.bias, w, scale)?;
    let report = TrainReport {
        neurons: model.neurons(),
        final_mse,
        mse_history: history,
        goal_met: final_mse <= opts.mse_goal,
        goal_units: opts.goal_units,
        scale,
    };
    Ok((model, report))
}

/// One-step-ahead predictions for every sample from index `W` on.
pub fn predict_series<T: Real>(model: &RbfModel<T>, samples: &[T]) -> Result<Vec<T>> {
    let w = model.window();
    if samples.len() <= w {
        return Err(Error::InsufficientHistory { needed: w + 1, got: samples.len() });
    }
    samples.windows(w).take(samples.len() - w).map(|win| model.predict(win)).collect()
}
