//! Paging-scheme constants derived from first principles.
//!
//! Two quantities characterize the sequential and concurrent schemes:
//!
//! * the expected number of paging messages needed to locate the users of a
//!   small multi-carrier scenario, and
//! * the expected paging (service) time, obtained as the expected absorption
//!   time of a Markov chain whose absorbing state is "user located".
//!
//! # Message counting convention
//!
//! A mobile listens to one carrier at a time, so under sequential search the
//! paging message for a user is duplicated on the paging channel of every
//! carrier ([`PageCounting::Broadcast`]). Two users on two carriers then cost
//! four pages whatever their location. The alternative convention, where a
//! carrier is paged only if the user was not found on the previous ones, is
//! available as [`PageCounting::StopOnFind`].
//!
//! Concurrent search pages different users on different carriers in the same
//! slot and only re-pages the users that were not found, so two users on two
//! equiprobable carriers cost `2 + 0.5 + 0.5 = 3` pages on average.
//!
//! # Reconstructed concurrent chain
//!
//! [`concurrent_search_chain`] models one user under concurrent search:
//!
//! ```text
//!              first carrier  second carrier  located
//! first          0              1 - p1          p1
//! second         0              0               1
//! located        0              0               1
//! ```
//!
//! With `p1 = 0.5` and a unit step the expected absorption time is 1.5 units,
//! against 1 unit for sequential search, which pages all carriers in a single
//! step ([`sequential_search_chain`]).

use crate::error::{Error, Result};
use crate::format::{g17, parse_f64};
use crate::linalg::{lu_solve, Matrix};
use crate::scalar::Real;

/// Row sums and probability vectors must hit 1 within this slack.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Markov chain with states ordered transient-first.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorbingChain<T> {
    transient_count: usize,
    transitions: Matrix<T>,
    step_time: T,
}

impl<T: Real> AbsorbingChain<T> {
    pub fn new(transient_count: usize, rows: &[Vec<T>], step_time: T) -> Result<Self> {
        let transitions = Matrix::from_rows(rows).map_err(|e| Error::InvalidChain(e.to_string()))?;
        let n = transitions.rows();
        if transitions.cols() != n {
            return Err(Error::InvalidChain(format!("matrix is {}x{}, not square", n, transitions.cols())));
        }
        if transient_count > n {
            return Err(Error::InvalidChain(format!("{transient_count} transient states but only {n} states")));
        }
        if !(step_time > T::zero()) {
            return Err(Error::InvalidChain("step time must be positive".into()));
        }
        let slack = T::lit(PROBABILITY_SLACK);
        for i in 0..n {
            let row = transitions.row(i);
            if row.iter().any(|&p| !(p >= T::zero() && p <= T::one())) {
                return Err(Error::InvalidChain(format!("row {i} has an entry outside [0, 1]")));
            }
            let sum = row.iter().fold(T::zero(), |acc, &p| acc + p);
            if (sum - T::one()).abs() > slack {
                return Err(Error::InvalidChain(format!("row {i} sums to {sum}")));
            }
            if i >= transient_count && transitions[(i, i)] != T::one() {
                return Err(Error::InvalidChain(format!("absorbing state {i} must have a 1 on the diagonal")));
            }
        }
        let chain = Self { transient_count, transitions, step_time };
        if let Some(stuck) = chain.first_trapped_state() {
            return Err(Error::InvalidChain(format!("no absorbing state reachable from transient state {stuck}")));
        }
        Ok(chain)
    }

    fn first_trapped_state(&self) -> Option<usize> {
        let n = self.transitions.rows();
        let t = self.transient_count;
        // Backward search from the absorbing states.
        let mut reaches = vec![false; n];
        for r in reaches.iter_mut().skip(t) {
            *r = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..t {
                if !reaches[i] && (0..n).any(|j| reaches[j] && self.transitions[(i, j)] > T::zero()) {
                    reaches[i] = true;
                    changed = true;
                }
            }
        }
        reaches.iter().position(|&r| !r)
    }

    pub fn transient_count(&self) -> usize {
        self.transient_count
    }

    pub fn state_count(&self) -> usize {
        self.transitions.rows()
    }

    pub fn step_time(&self) -> T {
        self.step_time
    }

    pub fn transitions(&self) -> &Matrix<T> {
        &self.transitions
    }

    /// Expected time to absorption from every transient state: the row sums
    /// of `(I − Q)⁻¹`, scaled by the step time. Solved, never inverted.
    pub fn expected_absorption_times(&self) -> Result<Vec<T>> {
        let t = self.transient_count;
        if t == 0 {
            return Ok(Vec::new());
        }
        let mut system = Matrix::identity(t);
        for i in 0..t {
            for j in 0..t {
                system[(i, j)] = system[(i, j)] - self.transitions[(i, j)];
            }
        }
        let steps = lu_solve(system, vec![T::one(); t])?;
        Ok(steps.into_iter().map(|s| s * self.step_time).collect())
    }

    /// Expected time to absorption starting from the first transient state.
    pub fn expected_absorption_time(&self) -> Result<T> {
        Ok(self.expected_absorption_times()?.first().copied().unwrap_or_else(T::zero))
    }
}

impl AbsorbingChain<f64> {
    /// Parses the plain-text chain format: a header line
    /// `<transient_count> <step_time>` followed by one whitespace-separated
    /// row per state. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty chain file".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [count, step] = fields[..] else {
            return Err(Error::Parse { line: hline, msg: "header must be `<transient_count> <step_time>`".into() });
        };
        let transient_count =
            count.parse().map_err(|_| Error::Parse { line: hline, msg: format!("bad transient count `{count}`") })?;
        let step_time = parse_f64(step).ok_or(Error::Parse { line: hline, msg: format!("bad step time `{step}`") })?;
        let rows = lines
            .map(|(ln, l)| {
                l.split_whitespace()
                    .map(|tok| parse_f64(tok).ok_or(Error::Parse { line: ln, msg: format!("bad probability `{tok}`") }))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(transient_count, &rows, step_time)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.transient_count, g17(self.step_time));
        for i in 0..self.state_count() {
            let row: Vec<String> = self.transitions.row(i).iter().map(|&p| g17(p)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Chain for one user under concurrent search: carriers are tried one per
/// step in the given order until the user is found. `location_prob[k]` is the
/// probability that the user sits on the `k`-th carrier tried.
pub fn carrier_search_chain<T: Real>(location_prob: &[T], step_time: T) -> Result<AbsorbingChain<T>> {
    let m = location_prob.len();
    if m == 0 {
        return Err(Error::InvalidChain("at least one carrier is required".into()));
    }
    check_distribution(location_prob).map_err(Error::InvalidChain)?;
    let n = m + 1;
    let mut rows = vec![vec![T::zero(); n]; n];
    let mut remaining = T::one();
    for (k, &p) in location_prob.iter().enumerate() {
        let found = if k + 1 == m || remaining <= T::zero() { T::one() } else { (p / remaining).min(T::one()) };
        rows[k][m] = found;
        if k + 1 < m {
            rows[k][k + 1] = T::one() - found;
        }
        remaining = remaining - p;
    }
    rows[m][m] = T::one();
    AbsorbingChain::new(m, &rows, step_time)
}

/// Two equiprobable carriers paged one after the other: 1.5 steps.
pub fn concurrent_search_chain<T: Real>() -> AbsorbingChain<T> {
    let half = T::lit(0.5);
    carrier_search_chain(&[half, half], T::one()).expect("valid two-carrier chain")
}

/// All carriers paged in one step: absorbed after exactly 1 step.
pub fn sequential_search_chain<T: Real>() -> AbsorbingChain<T> {
    AbsorbingChain::new(1, &[vec![T::zero(), T::one()], vec![T::zero(), T::one()]], T::one()).expect("valid chain")
}

fn check_distribution<T: Real>(p: &[T]) -> std::result::Result<(), String> {
    if p.iter().any(|&x| !(x >= T::zero())) {
        return Err("location probabilities must be nonnegative".into());
    }
    let sum = p.iter().fold(T::zero(), |acc, &x| acc + x);
    if (sum - T::one()).abs() > T::lit(PROBABILITY_SLACK) {
        return Err(format!("location probabilities sum to {sum}, not 1"));
    }
    Ok(())
}

/// Users spread over carriers with a common location distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierScenario<T> {
    users: usize,
    location_prob: Vec<T>,
}

impl<T: Real> CarrierScenario<T> {
    pub fn new(users: usize, location_prob: Vec<T>) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidArgument("scenario needs at least one user".into()));
        }
        if location_prob.is_empty() {
            return Err(Error::InvalidArgument("scenario needs at least one carrier".into()));
        }
        check_distribution(&location_prob).map_err(Error::InvalidArgument)?;
        Ok(Self { users, location_prob })
    }

    /// Every user equally likely to be on any carrier.
    pub fn uniform(carriers: usize, users: usize) -> Result<Self> {
        let p = T::one() / T::count(carriers.max(1));
        Self::new(users, vec![p; carriers])
    }

    pub fn carriers(&self) -> usize {
        self.location_prob.len()
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn location_prob(&self) -> &[T] {
        &self.location_prob
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PageCounting {
    /// The page for each user goes out on every carrier.
    #[default]
    Broadcast,
    /// Carriers are paged in decreasing probability order until the user answers.
    StopOnFind,
}

/// Expected paging messages to locate every user with sequential search.
pub fn sequential_page_messages<T: Real>(scenario: &CarrierScenario<T>, counting: PageCounting) -> T {
    let users = T::count(scenario.users);
    match counting {
        PageCounting::Broadcast => users * T::count(scenario.carriers()),
        PageCounting::StopOnFind => {
            let mut sorted = scenario.location_prob.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite probabilities"));
            let per_user = sorted.iter().enumerate().fold(T::zero(), |acc, (i, &p)| acc + T::count(i + 1) * p);
            users * per_user
        }
    }
}

/// Expected paging messages with concurrent search. Only the two-carrier,
/// two-user case is defined: user `k` is first paged on carrier `k`, and
/// re-paged on the other carrier if absent.
pub fn concurrent_page_messages<T: Real>(scenario: &CarrierScenario<T>) -> Result<T> {
    if scenario.carriers() != 2 || scenario.users != 2 {
        return Err(Error::UnsupportedScenario(format!(
            "concurrent search is defined for 2 carriers and 2 users, got {} carriers and {} users",
            scenario.carriers(),
            scenario.users
        )));
    }
    let p = &scenario.location_prob;
    let first_round = T::lit(2.0);
    Ok(first_round + (T::one() - p[0]) + (T::one() - p[1]))
}

/// Fraction of sequential (broadcast) pages saved by concurrent search.
pub fn message_saving<T: Real>(scenario: &CarrierScenario<T>) -> Result<T> {
    let seq = sequential_page_messages(scenario, PageCounting::Broadcast);
    let conc = concurrent_page_messages(scenario)?;
    Ok((seq - conc) / seq)
}
