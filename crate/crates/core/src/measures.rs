//! Exact-entropy sample sources: Bernoulli product measures on any window and
//! stationary first-order Markov measures on the one-sided line.
//!
//! Sampling is reproducible by construction and documented precisely: a
//! `ChaCha8` generator is keyed with `seed_from_u64(seed)`, one `f64` in
//! `[0,1)` is drawn per site in scan order, and the symbol is chosen by
//! walking the cumulative distribution (the final symbol absorbs any
//! floating-point residue). For the Markov sampler the first site uses the
//! stationary distribution and each subsequent site uses the transition row
//! of its predecessor.

use crate::entropy::phi;
use crate::lattice::{LatticeKind, Window};
use crate::pattern::{Pattern, PatternError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Probability-vector and transition-matrix validation tolerance.
const SUM_TOLERANCE: f64 = 1e-9;
/// Stationary-vector iteration stopping threshold.
const ITERATION_TOLERANCE: f64 = 1e-14;
/// Residual norm the returned stationary vector must satisfy.
const FIXED_POINT_TOLERANCE: f64 = 1e-10;

/// Errors from measure validation, sampling, and file parsing.
#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("probability vector must have between 2 and 256 entries, got {len}")]
    BadLength { len: usize },
    #[error("probability entry {value} at position {index} is not in [0,1]")]
    BadEntry { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    BadSum { sum: f64 },
    #[error("transition matrix must be square, row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("transition matrix row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },
    #[error("transition matrix is not irreducible (state {state} unreachable)")]
    Reducible { state: usize },
    #[error("stationary iteration did not converge")]
    NonConvergence,
    #[error("the Markov sampler needs a one-sided one-dimensional window")]
    UnsupportedWindow,
    #[error("pattern alphabet {pattern} does not match the measure alphabet {measure}")]
    AlphabetMismatch { pattern: u16, measure: u16 },
    #[error("the measure gives the pattern's cylinder zero mass")]
    ZeroMassCylinder,
    #[error("measure file: {0}")]
    Parse(String),
}

fn validate_probs(probs: &[f64]) -> Result<(), MeasureError> {
    if !(2..=256).contains(&probs.len()) {
        return Err(MeasureError::BadLength { len: probs.len() });
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&value) {
            return Err(MeasureError::BadEntry { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(MeasureError::BadSum { sum });
    }
    Ok(())
}

fn validate_transition(transition: &[Vec<f64>]) -> Result<(), MeasureError> {
    let k = transition.len();
    if !(2..=256).contains(&k) {
        return Err(MeasureError::BadLength { len: k });
    }
    for (row, r) in transition.iter().enumerate() {
        if r.len() != k {
            return Err(MeasureError::NotSquare {
                row,
                got: r.len(),
                expected: k,
            });
        }
        for (index, &value) in r.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0 + SUM_TOLERANCE).contains(&value) {
                return Err(MeasureError::BadEntry { index, value });
            }
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(MeasureError::RowSum { row, sum });
        }
    }
    Ok(())
}

/// Checks strong connectivity of the positive-probability transition graph:
/// every state reachable from state 0 and state 0 reachable from every state.
fn check_irreducible(transition: &[Vec<f64>]) -> Result<(), MeasureError> {
    let k = transition.len();
    let reach = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..k {
                let edge = if forward {
                    transition[a][b] > 0.0
                } else {
                    transition[b][a] > 0.0
                };
                if edge && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    for state in 0..k {
        if !fwd[state] || !bwd[state] {
            return Err(MeasureError::Reducible { state });
        }
    }
    Ok(())
}

/// Stationary distribution of an irreducible stochastic matrix, by iterating
/// the lazy chain `pi <- pi (P + I) / 2` (which converges for periodic chains
/// too) until the update moves by less than `1e-14`, then checking the fixed
/// point residual against `1e-10`.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>, MeasureError> {
    validate_transition(transition)?;
    check_irreducible(transition)?;
    let k = transition.len();
    let mut pi = vec![1.0 / k as f64; k];
    let mut next = vec![0.0f64; k];
    let mut converged = false;
    for _ in 0..1_000_000 {
        for b in 0..k {
            let mut acc = 0.0;
            for a in 0..k {
                acc += pi[a] * transition[a][b];
            }
            next[b] = 0.5 * (acc + pi[b]);
        }
        let norm: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= norm;
        }
        let delta = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if delta < ITERATION_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MeasureError::NonConvergence);
    }
    // Residual under the chain itself (not the lazy version).
    let residual = (0..k)
        .map(|b| {
            let mut acc = 0.0;
            for a in 0..k {
                acc += pi[a] * transition[a][b];
            }
            (acc - pi[b]).abs()
        })
        .fold(0.0f64, f64::max);
    if residual > FIXED_POINT_TOLERANCE {
        return Err(MeasureError::NonConvergence);
    }
    Ok(pi)
}

/// Entropy rate of a stationary Markov chain in bits per site:
/// `sum_a pi_a sum_b phi(P_ab)`.
pub fn markov_entropy_rate(transition: &[Vec<f64>]) -> Result<f64, MeasureError> {
    let pi = stationary_distribution(transition)?;
    Ok(pi
        .iter()
        .zip(transition)
        .map(|(&pa, row)| pa * row.iter().map(|&p| phi(p)).sum::<f64>())
        .sum())
}

/// Entropy of a Bernoulli product measure in bits per site: the partition
/// entropy of the exact symbol probabilities.
pub fn bernoulli_entropy(probs: &[f64]) -> Result<f64, MeasureError> {
    validate_probs(probs)?;
    Ok(probs.iter().map(|&p| phi(p)).sum())
}

/// Draws one symbol by inverse CDF; the last symbol absorbs the residue.
fn draw_symbol(rng: &mut ChaCha8Rng, probs: &[f64]) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (s, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return s as u8;
        }
    }
    (probs.len() - 1) as u8
}

/// Samples a Bernoulli product measure on any window: independent draws per
/// site, in scan order.
pub fn sample_bernoulli(probs: &[f64], window: Window, seed: u64) -> Result<Pattern, MeasureError> {
    validate_probs(probs)?;
    let size = window
        .size()
        .map_err(PatternError::from)? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols: Vec<u8> = (0..size).map(|_| draw_symbol(&mut rng, probs)).collect();
    Ok(Pattern::from_scan_symbols(
        window,
        probs.len() as u32,
        symbols,
    )?)
}

/// Samples a stationary Markov chain on the one-sided line `{0,..,n-1}`:
/// the first site from the stationary distribution, later sites from the
/// transition row of their predecessor.
pub fn sample_markov1d(
    transition: &[Vec<f64>],
    n: u32,
    seed: u64,
) -> Result<Pattern, MeasureError> {
    let pi = stationary_distribution(transition)?;
    let spec = crate::lattice::LatticeSpec::new(1, LatticeKind::OneSided)
        .expect("dimension 1 is valid");
    let window = Window::new(spec, n).map_err(PatternError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = Vec::with_capacity(n as usize);
    let mut state = draw_symbol(&mut rng, &pi);
    symbols.push(state);
    for _ in 1..n {
        state = draw_symbol(&mut rng, &transition[state as usize]);
        symbols.push(state);
    }
    Ok(Pattern::from_scan_symbols(
        window,
        transition.len() as u32,
        symbols,
    )?)
}

/// A measure with analytically known entropy rate.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticMeasure {
    /// Independent identically distributed symbols.
    Bernoulli { probs: Vec<f64> },
    /// Stationary first-order Markov chain on the one-sided line.
    Markov1d {
        transition: Vec<Vec<f64>>,
        stationary: Vec<f64>,
    },
}

impl AnalyticMeasure {
    /// Validated Bernoulli measure.
    pub fn bernoulli(probs: Vec<f64>) -> Result<Self, MeasureError> {
        validate_probs(&probs)?;
        Ok(AnalyticMeasure::Bernoulli { probs })
    }

    /// Validated Markov measure (computes the stationary distribution).
    pub fn markov1d(transition: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let stationary = stationary_distribution(&transition)?;
        Ok(AnalyticMeasure::Markov1d {
            transition,
            stationary,
        })
    }

    /// Number of symbols.
    pub fn alphabet_size(&self) -> u16 {
        match self {
            AnalyticMeasure::Bernoulli { probs } => probs.len() as u16,
            AnalyticMeasure::Markov1d { transition, .. } => transition.len() as u16,
        }
    }

    /// Exact entropy rate in bits per site.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            AnalyticMeasure::Bernoulli { probs } => probs.iter().map(|&p| phi(p)).sum(),
            AnalyticMeasure::Markov1d {
                transition,
                stationary,
            } => stationary
                .iter()
                .zip(transition)
                .map(|(&pa, row)| pa * row.iter().map(|&p| phi(p)).sum::<f64>())
                .sum(),
        }
    }

    /// Samples a pattern on `window` with the documented generator identity.
    pub fn sample(&self, window: Window, seed: u64) -> Result<Pattern, MeasureError> {
        match self {
            AnalyticMeasure::Bernoulli { probs } => sample_bernoulli(probs, window, seed),
            AnalyticMeasure::Markov1d { transition, .. } => {
                if window.spec.d != 1 || window.spec.kind != LatticeKind::OneSided {
                    return Err(MeasureError::UnsupportedWindow);
                }
                sample_markov1d(transition, window.n, seed)
            }
        }
    }

    /// `-log2` of the measure of the pattern's cylinder set; errors if the
    /// cylinder has zero mass.
    pub fn neg_log2_cylinder_mass(&self, p: &Pattern) -> Result<f64, MeasureError> {
        if p.alphabet_size() != self.alphabet_size() {
            return Err(MeasureError::AlphabetMismatch {
                pattern: p.alphabet_size(),
                measure: self.alphabet_size(),
            });
        }
        match self {
            AnalyticMeasure::Bernoulli { probs } => {
                let mut total = 0.0;
                for &s in p.linearize() {
                    let q = probs[s as usize];
                    if q <= 0.0 {
                        return Err(MeasureError::ZeroMassCylinder);
                    }
                    total -= q.log2();
                }
                Ok(total)
            }
            AnalyticMeasure::Markov1d {
                transition,
                stationary,
            } => {
                if p.spec().d != 1 || p.spec().kind != LatticeKind::OneSided {
                    return Err(MeasureError::UnsupportedWindow);
                }
                // Scan order on the one-sided line is 0,1,2,..., so the
                // linearized symbols are the chain path.
                let path = p.linearize();
                let q0 = stationary[path[0] as usize];
                if q0 <= 0.0 {
                    return Err(MeasureError::ZeroMassCylinder);
                }
                let mut total = -q0.log2();
                for w in path.windows(2) {
                    let q = transition[w[0] as usize][w[1] as usize];
                    if q <= 0.0 {
                        return Err(MeasureError::ZeroMassCylinder);
                    }
                    total -= q.log2();
                }
                Ok(total)
            }
        }
    }
}

/// Parses a measure description in a small key-value text format:
///
/// ```text
/// # Bernoulli example            # Markov example
/// measure = bernoulli            measure = markov1d
/// probs = 0.9 0.1                row = 0.9 0.1
///                                row = 0.2 0.8
/// ```
///
/// Values may be separated by whitespace or commas; `#` starts a comment.
pub fn parse_measure_file(text: &str) -> Result<AnalyticMeasure, MeasureError> {
    let mut kind: Option<String> = None;
    let mut probs: Option<Vec<f64>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            MeasureError::Parse(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "measure" => kind = Some(value.to_string()),
            "probs" => probs = Some(parse_numbers(value, lineno + 1)?),
            "row" => rows.push(parse_numbers(value, lineno + 1)?),
            other => {
                return Err(MeasureError::Parse(format!(
                    "line {}: unknown key `{other}`",
                    lineno + 1
                )))
            }
        }
    }
    match kind.as_deref() {
        Some("bernoulli") => {
            let probs = probs
                .ok_or_else(|| MeasureError::Parse("bernoulli needs a `probs` line".into()))?;
            if !rows.is_empty() {
                return Err(MeasureError::Parse(
                    "bernoulli does not take `row` lines".into(),
                ));
            }
            AnalyticMeasure::bernoulli(probs)
        }
        Some("markov1d") => {
            if probs.is_some() {
                return Err(MeasureError::Parse(
                    "markov1d does not take a `probs` line".into(),
                ));
            }
            if rows.is_empty() {
                return Err(MeasureError::Parse("markov1d needs `row` lines".into()));
            }
            AnalyticMeasure::markov1d(rows)
        }
        Some(other) => Err(MeasureError::Parse(format!("unknown measure `{other}`"))),
        None => Err(MeasureError::Parse("missing `measure =` line".into())),
    }
}

fn parse_numbers(value: &str, lineno: usize) -> Result<Vec<f64>, MeasureError> {
    let mut out = Vec::new();
    for tok in value.split(|c: char| c.is_whitespace() || c == ',') {
        if tok.is_empty() {
            continue;
        }
        let v: f64 = tok.parse().map_err(|_| {
            MeasureError::Parse(format!("line {lineno}: `{tok}` is not a number"))
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(MeasureError::Parse(format!("line {lineno}: no numbers")));
    }
    Ok(out)
}
