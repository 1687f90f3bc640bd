//! Topological pressure for local potentials and an empirical check of the
//! variational principle.
//!
//! A [`LocalPotential`] assigns a real weight to every filling of a small
//! box anchored at a site. [`transfer_matrix_pressure`] computes the exact
//! pressure of a pair potential on the line as the logarithm of the Perron
//! eigenvalue of its transfer matrix, together with the equilibrium Markov
//! measure. [`estimate_pressure`] probes the variational inequality
//! `entropy rate + mean potential <= pressure` from sampled patterns, using
//! the compressor's code rate as the entropy estimate.

use crate::entropy::{complexity_density, EntropyError};
use crate::lattice::{LatticeError, LatticeSpec, Site};
use crate::measures::{AnalyticMeasure, MeasureError};
use crate::pattern::{Pattern, PatternError};
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from potential handling and pressure computation.
#[derive(Debug, Error, PartialEq)]
pub enum PressureError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("entropy estimation failed: {0}")]
    Entropy(String),
    #[error("alphabet size {0} is not in 2..=256")]
    BadAlphabet(u32),
    #[error("box width must be at least 1")]
    ZeroWidth,
    #[error("potential table needs {expected} entries for this shape, got {got}")]
    BadTableLength { expected: u64, got: usize },
    #[error("potential table would need {0} entries, over the cap of 2^24")]
    TableTooLarge(u128),
    #[error("potential entry {index} is not finite")]
    NonFiniteEntry { index: usize },
    #[error("window radius {n} is too small for box width {w}")]
    WindowTooSmall { n: u32, w: u32 },
    #[error("pattern alphabet {pattern} does not match potential alphabet {potential}")]
    AlphabetMismatch { pattern: u16, potential: u16 },
    #[error("pattern lattice does not match the potential lattice")]
    SpecMismatch,
    #[error("transfer matrix pressure needs a pair potential on the line")]
    UnsupportedShape,
    #[error("power iteration did not converge")]
    NonConvergence,
    #[error("no sample patterns were provided")]
    EmptySamples,
    #[error("potential file: {0}")]
    Parse(String),
}

impl From<EntropyError> for PressureError {
    fn from(e: EntropyError) -> Self {
        PressureError::Entropy(e.to_string())
    }
}

/// Largest admissible potential table, in entries.
const MAX_TABLE_ENTRIES: u128 = 1 << 24;

/// A potential that reads the symbols in the box `{0..width-1}^d` anchored
/// at a site and returns the table entry at their positional index.
///
/// Box sites are ordered lexicographically by coordinates; the symbols read
/// in that order form the big-endian base-`alphabet_size` digits of the
/// table index. For a pair potential on the line (`d = 1`, `width = 2`) the
/// index of the pair `(a, b)` is `a * alphabet_size + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPotential {
    spec: LatticeSpec,
    width: u32,
    alphabet_size: u16,
    table: Vec<f64>,
}

impl LocalPotential {
    /// Builds a potential from its value table; the table must have exactly
    /// `alphabet_size^(width^d)` finite entries.
    pub fn new(
        spec: LatticeSpec,
        width: u32,
        alphabet_size: u32,
        table: Vec<f64>,
    ) -> Result<Self, PressureError> {
        if !(2..=256).contains(&alphabet_size) {
            return Err(PressureError::BadAlphabet(alphabet_size));
        }
        if width == 0 {
            return Err(PressureError::ZeroWidth);
        }
        let mut expected: u128 = 1;
        for _ in 0..spec.d {
            expected = expected.saturating_mul(u128::from(width));
        }
        let volume = expected;
        expected = 1;
        for _ in 0..volume.min(64) {
            expected = expected.saturating_mul(u128::from(alphabet_size));
            if expected > MAX_TABLE_ENTRIES {
                return Err(PressureError::TableTooLarge(expected));
            }
        }
        if volume > 64 {
            return Err(PressureError::TableTooLarge(u128::MAX));
        }
        let expected = expected as u64;
        if table.len() as u64 != expected {
            return Err(PressureError::BadTableLength {
                expected,
                got: table.len(),
            });
        }
        if let Some(index) = table.iter().position(|v| !v.is_finite()) {
            return Err(PressureError::NonFiniteEntry { index });
        }
        Ok(LocalPotential {
            spec,
            width,
            alphabet_size: alphabet_size as u16,
            table,
        })
    }

    /// Pair potential on the line: `table[a * alphabet_size + b]` weights
    /// the adjacent pair `(a, b)`.
    pub fn pair(
        spec: LatticeSpec,
        alphabet_size: u32,
        table: Vec<f64>,
    ) -> Result<Self, PressureError> {
        if spec.d != 1 {
            return Err(PressureError::UnsupportedShape);
        }
        LocalPotential::new(spec, 2, alphabet_size, table)
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// The box sites in table-index order.
    fn box_sites(&self) -> Vec<Site> {
        let d = usize::from(self.spec.d);
        let w = i64::from(self.width);
        let mut sites = Vec::new();
        let mut coords = vec![0i64; d];
        loop {
            sites.push(Site::new(coords.clone()));
            let mut axis = d;
            loop {
                if axis == 0 {
                    return sites;
                }
                axis -= 1;
                coords[axis] += 1;
                if coords[axis] < w {
                    break;
                }
                coords[axis] = 0;
                if axis == 0 {
                    return sites;
                }
            }
        }
    }

    /// Value on the box anchored at `anchor` inside `p`.
    fn value_at(&self, p: &Pattern, anchor: &Site, sites: &[Site]) -> Result<f64, PressureError> {
        let sigma = u64::from(self.alphabet_size);
        let mut index: u64 = 0;
        for b in sites {
            let s = p.get(&anchor.plus(b))?;
            index = index * sigma + u64::from(s);
        }
        Ok(self.table[index as usize])
    }
}

/// Mean of the potential over every translate of its box that fits inside
/// the pattern's window.
pub fn potential_average(p: &Pattern, psi: &LocalPotential) -> Result<f64, PressureError> {
    if p.spec() != psi.spec() {
        return Err(PressureError::SpecMismatch);
    }
    if u32::from(p.alphabet_size()) != u32::from(psi.alphabet_size()) {
        return Err(PressureError::AlphabetMismatch {
            pattern: p.alphabet_size(),
            potential: psi.alphabet_size(),
        });
    }
    let n = p.window().n;
    let w = psi.width();
    let reach = match p.spec().kind {
        crate::lattice::LatticeKind::OneSided => n,
        crate::lattice::LatticeKind::TwoSided => 2 * n - 1,
    };
    if reach < w {
        return Err(PressureError::WindowTooSmall { n, w });
    }
    let lo: i64 = match p.spec().kind {
        crate::lattice::LatticeKind::OneSided => 0,
        crate::lattice::LatticeKind::TwoSided => -i64::from(n - 1),
    };
    let hi: i64 = lo + i64::from(reach - w); // inclusive anchor bound per axis
    let d = usize::from(p.spec().d);
    let sites = psi.box_sites();
    let mut coords = vec![lo; d];
    let mut sum = 0.0;
    let mut count: u64 = 0;
    loop {
        let anchor = Site::new(coords.clone());
        sum += psi.value_at(p, &anchor, &sites)?;
        count += 1;
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(sum / count as f64);
            }
            axis -= 1;
            coords[axis] += 1;
            if coords[axis] <= hi {
                break;
            }
            coords[axis] = lo;
            if axis == 0 {
                return Ok(sum / count as f64);
            }
        }
    }
}

/// Exact pressure of a pair potential on the line, with its equilibrium
/// Markov measure.
#[derive(Clone, Debug)]
pub struct TransferMatrixResult {
    /// `log2` of the Perron eigenvalue.
    pub pressure: f64,
    /// The Perron eigenvalue itself.
    pub eigenvalue: f64,
    /// Transition matrix of the equilibrium Markov chain.
    pub transition: Vec<Vec<f64>>,
    /// The equilibrium measure, ready for sampling and cylinder masses.
    pub equilibrium: AnalyticMeasure,
}

/// Computes the pressure of a pair potential on the line as `log2` of the
/// Perron eigenvalue of the matrix `A[a][b] = 2^psi(a, b)`, by power
/// iteration. The equilibrium chain is `P[a][b] = A[a][b] v[b] / (lambda
/// v[a])` for the Perron right eigenvector `v`.
pub fn transfer_matrix_pressure(
    psi: &LocalPotential,
) -> Result<TransferMatrixResult, PressureError> {
    if psi.spec().d != 1 || psi.width() != 2 {
        return Err(PressureError::UnsupportedShape);
    }
    let sigma = usize::from(psi.alphabet_size());
    let a = |i: usize, j: usize| psi.table()[i * sigma + j].exp2();

    let mut v = vec![1.0 / sigma as f64; sigma];
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; sigma];
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = (0..sigma).map(|j| a(i, j) * v[j]).sum();
        }
        let norm: f64 = next.iter().sum();
        lambda = norm; // ratio of L1 norms; v is L1-normalized
        for slot in &mut next {
            *slot /= norm;
        }
        let delta = v
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta <= 1e-15 {
            converged = true;
            break;
        }
    }
    // Residual check makes the convergence claim honest.
    let residual = (0..sigma)
        .map(|i| {
            let av: f64 = (0..sigma).map(|j| a(i, j) * v[j]).sum();
            (av - lambda * v[i]).abs()
        })
        .fold(0.0, f64::max);
    // `residual_ok` is false for NaN residuals, so a poisoned iteration is rejected.
    let residual_ok = residual <= 1e-10 * lambda;
    if !converged || !residual_ok || !lambda.is_finite() || lambda <= 0.0 {
        return Err(PressureError::NonConvergence);
    }

    let transition: Vec<Vec<f64>> = (0..sigma)
        .map(|i| (0..sigma).map(|j| a(i, j) * v[j] / (lambda * v[i])).collect())
        .collect();
    let equilibrium = AnalyticMeasure::markov1d(transition.clone())?;
    Ok(TransferMatrixResult {
        pressure: lambda.log2(),
        eigenvalue: lambda,
        transition,
        equilibrium,
    })
}

/// Expected value of a pair potential under a stationary Markov chain:
/// `sum_a pi[a] sum_b P[a][b] psi(a, b)`.
pub fn markov_pair_expectation(
    psi: &LocalPotential,
    transition: &[Vec<f64>],
    stationary: &[f64],
) -> Result<f64, PressureError> {
    if psi.spec().d != 1 || psi.width() != 2 {
        return Err(PressureError::UnsupportedShape);
    }
    let sigma = usize::from(psi.alphabet_size());
    if transition.len() != sigma || stationary.len() != sigma {
        return Err(PressureError::AlphabetMismatch {
            pattern: transition.len() as u16,
            potential: psi.alphabet_size(),
        });
    }
    let mut sum = 0.0;
    for (i, row) in transition.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            sum += stationary[i] * p * psi.table()[i * sigma + j];
        }
    }
    Ok(sum)
}

/// One sample's contribution to the variational estimate.
#[derive(Clone, Debug)]
pub struct PressureRecord {
    pub label: String,
    /// Code rate of the sample (entropy estimate, bits per site).
    pub rate: f64,
    /// Mean potential over the sample.
    pub psi_mean: f64,
    /// `rate + psi_mean`; never much above the pressure.
    pub sum: f64,
}

/// Result of probing the variational principle on sampled patterns.
#[derive(Clone, Debug)]
pub struct PressureReport {
    pub records: Vec<PressureRecord>,
    /// Largest `rate + psi_mean` seen; a lower estimate of the pressure.
    pub sup_estimate: f64,
    /// Exact pressure, when one is known.
    pub oracle_pressure: Option<f64>,
}

impl PressureReport {
    /// TSV rendering: one line per record, then the supremum and oracle.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\trate\tpsi_mean\tsum\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}",
                r.label, r.rate, r.psi_mean, r.sum
            );
        }
        let _ = writeln!(out, "sup_estimate\t-\t-\t{:.6}", self.sup_estimate);
        match self.oracle_pressure {
            Some(p) => {
                let _ = writeln!(out, "oracle_pressure\t-\t-\t{p:.6}");
            }
            None => {
                let _ = writeln!(out, "oracle_pressure\t-\t-\t-");
            }
        }
        out
    }
}

/// Evaluates `code rate + mean potential` for each labelled sample and
/// reports the supremum, the empirical side of the variational principle.
pub fn estimate_pressure(
    samples: &[(String, Pattern)],
    psi: &LocalPotential,
    m: u32,
    oracle_pressure: Option<f64>,
) -> Result<PressureReport, PressureError> {
    if samples.is_empty() {
        return Err(PressureError::EmptySamples);
    }
    let mut records = Vec::with_capacity(samples.len());
    let mut sup = f64::NEG_INFINITY;
    for (label, p) in samples {
        let rate = complexity_density(p, m)?.value;
        let psi_mean = potential_average(p, psi)?;
        let sum = rate + psi_mean;
        sup = sup.max(sum);
        records.push(PressureRecord {
            label: label.clone(),
            rate,
            psi_mean,
            sum,
        });
    }
    Ok(PressureReport {
        records,
        sup_estimate: sup,
        oracle_pressure,
    })
}

/// Parses a pair potential from text: one `a b value` triple per line,
/// `#` comments, every pair over the implied alphabet exactly once.
pub fn parse_potential_file(
    text: &str,
    spec: LatticeSpec,
) -> Result<LocalPotential, PressureError> {
    let mut triples: Vec<(u32, u32, f64)> = Vec::new();
    let mut max_symbol: u32 = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(PressureError::Parse(format!(
                "line {}: expected `a b value`, got {:?}",
                lineno + 1,
                raw.trim()
            )));
        }
        let a: u32 = fields[0]
            .parse()
            .map_err(|_| PressureError::Parse(format!("line {}: bad symbol {}", lineno + 1, fields[0])))?;
        let b: u32 = fields[1]
            .parse()
            .map_err(|_| PressureError::Parse(format!("line {}: bad symbol {}", lineno + 1, fields[1])))?;
        let value: f64 = fields[2]
            .parse()
            .map_err(|_| PressureError::Parse(format!("line {}: bad value {}", lineno + 1, fields[2])))?;
        if a > 255 || b > 255 {
            return Err(PressureError::Parse(format!(
                "line {}: symbols must be below 256",
                lineno + 1
            )));
        }
        max_symbol = max_symbol.max(a).max(b);
        triples.push((a, b, value));
    }
    if triples.is_empty() {
        return Err(PressureError::Parse("no entries".to_string()));
    }
    let sigma = (max_symbol + 1).max(2);
    let mut table = vec![f64::NAN; (sigma * sigma) as usize];
    for (a, b, value) in triples {
        let idx = (a * sigma + b) as usize;
        if !table[idx].is_nan() {
            return Err(PressureError::Parse(format!("pair ({a}, {b}) given twice")));
        }
        table[idx] = value;
    }
    if let Some(idx) = table.iter().position(|v| v.is_nan()) {
        let (a, b) = (idx as u32 / sigma, idx as u32 % sigma);
        return Err(PressureError::Parse(format!("pair ({a}, {b}) missing")));
    }
    LocalPotential::pair(spec, sigma, table)
}
