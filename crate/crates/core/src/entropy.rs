//! Entropy estimators on finite patterns and the exhaustive code-length
//! census.
//!
//! Three estimators with a shared record type:
//!
//! * [`plugin_block_entropy`] — empirical block-distribution entropy per
//!   site: `(1/|block|) * sum phi(count/total)` over the tile census.
//! * [`complexity_density`] — compressed payload bits per site under the
//!   enumerative codec (the container header is fixed machine identity and
//!   is excluded; [`crate::codec::LengthReport::total`] still accounts it).
//! * [`information_density`] — `-log2` of the pattern's cylinder mass under
//!   an analytic measure, per site.
//!
//! [`rate_overhead_bound`] gives an explicit, provable envelope for the gap
//! between the first two: writing the rank in `ceil(log2(class size))` bits
//! pins the code rate to the plug-in entropy up to census/boundary field
//! budgets on one side and a polynomial type-class correction on the other.

use crate::codec::{
    encode, frequency_vector, log2_biguint, CodecError, EncodeOptions, DENSE_THRESHOLD_DEFAULT,
};
use crate::lattice::{window_size, LatticeError, LatticeSpec, Window};
use crate::measures::{AnalyticMeasure, MeasureError};
use crate::pattern::{Pattern, PatternError};
use num_bigint::BigUint;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Errors from entropy estimation.
#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("probabilities sum to {sum}, not 1")]
    BadPartition { sum: f64 },
    #[error("probability entry {value} is not in [0,1]")]
    BadPartitionEntry { value: f64 },
    #[error("census space {alphabet}^{volume} exceeds the enumeration cap 2^{cap}")]
    CensusTooLarge { alphabet: u16, volume: u64, cap: u32 },
}

/// `phi(t) = -t log2 t` with `phi(0) = 0`; the entropy summand.
///
/// Panics on arguments outside `[0,1]` (beyond float slop).
pub fn phi(t: f64) -> f64 {
    assert!(
        (-1e-12..=1.0 + 1e-12).contains(&t),
        "phi argument {t} outside [0,1]"
    );
    if t <= 0.0 {
        0.0
    } else {
        -t * t.log2()
    }
}

/// Entropy of a finite probability vector in bits: `sum phi(p_i)`.
pub fn partition_entropy(probs: &[f64]) -> Result<f64, EntropyError> {
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return Err(EntropyError::BadPartitionEntry { value: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(EntropyError::BadPartition { sum });
    }
    Ok(probs.iter().map(|&p| phi(p.max(0.0))).sum())
}

/// Which estimator produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorMethod {
    Plugin,
    CodeRate,
    InformationDensity,
}

impl fmt::Display for EstimatorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorMethod::Plugin => "plugin",
            EstimatorMethod::CodeRate => "code_rate",
            EstimatorMethod::InformationDensity => "information_density",
        })
    }
}

/// One estimator reading on one pattern.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub method: EstimatorMethod,
    /// Bits per site.
    pub value: f64,
    /// Window radius of the pattern.
    pub n: u32,
    /// Block radius, when the estimator uses one.
    pub m: Option<u32>,
}

/// Empirical entropy of the tile census, per block site:
/// `(1/|block|) sum phi(count/total)`.
pub fn plugin_block_entropy(p: &Pattern, m: u32) -> Result<EntropyEstimate, EntropyError> {
    let fv = frequency_vector(p, m)?;
    let volume = window_size(p.spec(), m)? as f64;
    let total = fv.total as f64;
    let value = fv
        .counts
        .values()
        .map(|&c| phi(c as f64 / total))
        .sum::<f64>()
        / volume;
    Ok(EntropyEstimate {
        method: EstimatorMethod::Plugin,
        value,
        n: p.window().n,
        m: Some(m),
    })
}

/// Code rate of the enumerative compressor in payload bits per window site
/// (automatic census mode, default threshold).
pub fn complexity_density(p: &Pattern, m: u32) -> Result<EntropyEstimate, EntropyError> {
    complexity_density_with(p, m, &EncodeOptions::default())
}

/// [`complexity_density`] under explicit encoder options.
pub fn complexity_density_with(
    p: &Pattern,
    m: u32,
    options: &EncodeOptions,
) -> Result<EntropyEstimate, EntropyError> {
    let enc = encode(p, m, options)?;
    let report = enc.report.expect("encode fills the report");
    let size = p.window().size()? as f64;
    Ok(EntropyEstimate {
        method: EstimatorMethod::CodeRate,
        value: report.payload() as f64 / size,
        n: p.window().n,
        m: Some(m),
    })
}

/// `-log2` of the pattern's cylinder mass under `mu`, per site.
pub fn information_density(
    p: &Pattern,
    mu: &AnalyticMeasure,
) -> Result<EntropyEstimate, EntropyError> {
    let neg_log = mu.neg_log2_cylinder_mass(p)?;
    let size = p.window().size()? as f64;
    Ok(EntropyEstimate {
        method: EstimatorMethod::InformationDensity,
        value: neg_log / size,
        n: p.window().n,
        m: None,
    })
}

/// Exponent cap for [`counting_census`]: at most `2^20` patterns are
/// enumerated.
pub const CENSUS_CAP_BITS: u32 = 20;

/// Exhaustively encodes every pattern on the window and histograms the
/// payload lengths: returns payload bit length -> number of patterns.
pub fn counting_census(
    spec: LatticeSpec,
    n: u32,
    alphabet_size: u16,
    m: u32,
) -> Result<BTreeMap<u64, u64>, EntropyError> {
    let volume = window_size(spec, n)?;
    let space = BigUint::from(alphabet_size).pow(u32::try_from(volume).map_err(|_| {
        EntropyError::CensusTooLarge {
            alphabet: alphabet_size,
            volume,
            cap: CENSUS_CAP_BITS,
        }
    })?);
    if space > (BigUint::from(1u8) << CENSUS_CAP_BITS) {
        return Err(EntropyError::CensusTooLarge {
            alphabet: alphabet_size,
            volume,
            cap: CENSUS_CAP_BITS,
        });
    }
    let window = Window::new(spec, n)?;
    let options = EncodeOptions::default();
    let mut symbols = vec![0u8; volume as usize];
    let mut census: BTreeMap<u64, u64> = BTreeMap::new();
    loop {
        let p = Pattern::from_scan_symbols(window, u32::from(alphabet_size), symbols.clone())?;
        let report = encode(&p, m, &options)?.report.expect("report");
        *census.entry(report.payload()).or_insert(0) += 1;
        // Odometer over the symbol vector.
        let mut i = symbols.len();
        loop {
            if i == 0 {
                return Ok(census);
            }
            i -= 1;
            if u16::from(symbols[i]) + 1 < alphabet_size {
                symbols[i] += 1;
                for s in symbols.iter_mut().skip(i + 1) {
                    *s = 0;
                }
                break;
            }
            symbols[i] = 0;
            if i == 0 {
                return Ok(census);
            }
        }
    }
}

/// Explicit envelope for `|plugin_block_entropy - complexity_density|` at
/// geometry `(spec, n, m, alphabet_size)` under default encoder options.
///
/// Upper side (code above entropy): the class size is at most
/// `2^(tiles * block_volume * plugin)`, so the rank field exceeds the
/// plug-in term by at most 1 bit, and the census and boundary budgets are
/// counted in full. Lower side (code below entropy): the class size is at
/// least `2^(tiles * block_volume * plugin) / (tiles+1)^distinct`, and the
/// boundary sites contribute at most `log2(sigma)` each to the plug-in side.
pub fn rate_overhead_bound(
    spec: LatticeSpec,
    n: u32,
    m: u32,
    alphabet_size: u16,
) -> Result<f64, EntropyError> {
    let tiling = crate::lattice::make_tiling(spec, n, m)?;
    let size = window_size(spec, n)? as f64;
    let tiles = tiling.block_count() as f64;
    let sigma = f64::from(alphabet_size);
    let boundary = tiling.boundary_sites.len() as f64;
    let m_count = BigUint::from(alphabet_size).pow(window_size(spec, m)? as u32);
    let log2_m_count = log2_biguint(&m_count);
    let per_count = 2.0 * (tiles + 1.0).log2() + 1.0;
    // Largest possible number of distinct blocks in the pattern.
    let distinct_cap = if log2_m_count < 63.0 {
        f64::min(tiles, log2_m_count.exp2())
    } else {
        tiles
    };

    let dense = m_count <= BigUint::from(DENSE_THRESHOLD_DEFAULT);
    let census_budget = if dense {
        // Dense: one natural-number code per possible block.
        log2_m_count.exp2() * per_count
    } else {
        // Sparse: count of distinct blocks plus index/count pairs.
        (2.0 * (distinct_cap + 1.0).log2() + 1.0)
            + distinct_cap * ((2.0 * (log2_m_count + 1.0) + 1.0) + per_count)
    };
    let boundary_budget = 2.0 * (boundary * sigma.log2() + 1.0) + 1.0;
    // Code above entropy: the rank field overshoots log2(class size) by at
    // most one bit; census and boundary fields are counted in full.
    let up = (census_budget + boundary_budget + 1.0) / size;
    // Code below entropy: the class size undershoots the entropy exponent by
    // at most the polynomial type correction, and the plug-in side counts
    // boundary sites the code ranks for free.
    let low = (boundary * sigma.log2() + distinct_cap * (tiles + 1.0).log2()) / size;
    Ok(up.max(low))
}

/// Header line for estimator TSV output.
pub fn tsv_header() -> &'static str {
    "method\td\tkind\tn\tm\tseed\tvalue"
}

/// One estimator reading as a TSV row; absent fields print `-`.
pub fn tsv_row(est: &EntropyEstimate, spec: LatticeSpec, seed: Option<u64>) -> String {
    let m = est
        .m
        .map(|m| m.to_string())
        .unwrap_or_else(|| "-".to_string());
    let seed = seed
        .map(|s| s.to_string())
        .unwrap_or_else(|| "-".to_string());
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{:.6}",
        est.method, spec.d, spec.kind, est.n, m, seed, est.value
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeKind, LatticeSpec, Window};
    use crate::measures::{sample_bernoulli, AnalyticMeasure};

    fn os1() -> LatticeSpec {
        LatticeSpec::new(1, LatticeKind::OneSided).unwrap()
    }

    fn line(symbols: &[u8]) -> Pattern {
        let w = Window::new(os1(), symbols.len() as u32).unwrap();
        Pattern::from_scan_symbols(w, 2, symbols.to_vec()).unwrap()
    }

    fn alternating(n: usize) -> Pattern {
        let symbols: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        line(&symbols)
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(1.0), 0.0);
        assert!((phi(0.5) - 0.5).abs() < 1e-15);
        assert!((phi(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "outside [0,1]")]
    fn phi_rejects_out_of_range() {
        let _ = phi(1.5);
    }

    #[test]
    fn partition_entropy_oracles() {
        assert!((partition_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert!((partition_entropy(&[0.125; 8]).unwrap() - 3.0).abs() < 1e-12);
        assert!(partition_entropy(&[1.0]).unwrap().abs() < 1e-12);
        assert!(matches!(
            partition_entropy(&[0.5, 0.6]),
            Err(EntropyError::BadPartition { .. })
        ));
        assert!(matches!(
            partition_entropy(&[1.5, -0.5]),
            Err(EntropyError::BadPartitionEntry { .. })
        ));
    }

    #[test]
    fn plugin_alternating_line() {
        // Length 64, m=1: the strict tiling covers 63 sites, counts (32,31).
        let p = alternating(64);
        let est = plugin_block_entropy(&p, 1).unwrap();
        let expected = phi(32.0 / 63.0) + phi(31.0 / 63.0);
        assert!((est.value - expected).abs() < 1e-12);
        assert!((est.value - 0.999818246960343).abs() < 1e-12);
        // m=2: every tile is the block (0,1), so the census is degenerate.
        let est2 = plugin_block_entropy(&p, 2).unwrap();
        assert!(est2.value.abs() < 1e-12);
    }

    #[test]
    fn plugin_uniform_blocks() {
        // 0,1,2,3 repeated at m=1 over alphabet 4: near log2(4)/1.
        let symbols: Vec<u8> = (0..64).map(|i| (i % 4) as u8).collect();
        let w = Window::new(os1(), 64).unwrap();
        let p = Pattern::from_scan_symbols(w, 4, symbols).unwrap();
        let est = plugin_block_entropy(&p, 1).unwrap();
        // Tiling covers 63 sites: counts (16,16,16,15).
        let expected =
            phi(16.0 / 63.0) * 3.0 + phi(15.0 / 63.0);
        assert!((est.value - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_pattern_density_is_logarithmic() {
        // All-zero line patterns: the code spends O(log n) bits total.
        let p64 = line(&[0u8; 64]);
        let cd64 = complexity_density(&p64, 2).unwrap();
        // Dense census (31,0,0,0) costs 11+1+1+1 bits, empty class, boundary
        // "00" costs 5 bits: 19 payload bits.
        assert_eq!((cd64.value * 64.0).round() as u64, 19);
        assert!(cd64.value < 0.35);

        let p1024 = line(&vec![0u8; 1024]);
        let cd1024 = complexity_density(&p1024, 2).unwrap();
        assert_eq!((cd1024.value * 1024.0).round() as u64, 27);
        assert!(cd1024.value < 0.03);

        // Monotone trend along powers of two.
        let mut last = f64::INFINITY;
        for n in [64usize, 128, 256, 512, 1024] {
            let cd = complexity_density(&line(&vec![0u8; n]), 2).unwrap().value;
            assert!(cd < last, "density should fall with n");
            last = cd;
        }
    }

    #[test]
    fn information_density_matches_hand_computation() {
        let mu = AnalyticMeasure::bernoulli(vec![0.9, 0.1]).unwrap();
        let p = line(&[0, 1, 0, 0, 0, 1, 0, 0]);
        let est = information_density(&p, &mu).unwrap();
        let expected = -(6.0 * 0.9f64.log2() + 2.0 * 0.1f64.log2()) / 8.0;
        assert!((est.value - expected).abs() < 1e-12);
        assert_eq!(est.method, EstimatorMethod::InformationDensity);
        assert_eq!(est.m, None);
    }

    #[test]
    fn counting_census_small_window() {
        // All 16 binary patterns on the length-4 line at m=2.
        let census = counting_census(os1(), 4, 2, 2).unwrap();
        let total: u64 = census.values().sum();
        assert_eq!(total, 16);
        // Injectivity: cumulative count below length k never exceeds 2^k - 1.
        let mut cumulative = 0u64;
        let max_len = *census.keys().last().unwrap();
        for k in 0..=max_len + 1 {
            if k > 0 {
                if let Some(&c) = census.get(&(k - 1)) {
                    cumulative += c;
                }
            }
            assert!(
                cumulative < (1u64 << k.min(40)) || k >= 40,
                "cumulative {cumulative} at length {k}"
            );
        }
    }

    #[test]
    fn counting_census_respects_cap() {
        assert!(matches!(
            counting_census(os1(), 32, 2, 2),
            Err(EntropyError::CensusTooLarge { .. })
        ));
    }

    #[test]
    fn code_rate_tracks_plugin_within_bound() {
        for seed in 0..5u64 {
            let w = Window::new(os1(), 256).unwrap();
            let p = sample_bernoulli(&[0.8, 0.2], w, seed).unwrap();
            for m in [1u32, 2, 4] {
                let plugin = plugin_block_entropy(&p, m).unwrap().value;
                let rate = complexity_density(&p, m).unwrap().value;
                let eps = rate_overhead_bound(os1(), 256, m, 2).unwrap();
                assert!(
                    (plugin - rate).abs() <= eps,
                    "seed {seed} m {m}: plugin {plugin} rate {rate} eps {eps}"
                );
            }
        }
    }

    #[test]
    fn estimator_errors_shrink_with_window() {
        // Median absolute error of code rate and plug-in entropy against the
        // true Bernoulli rate, over 10 seeds, should shrink as n grows.
        let h = 0.7219280948873623; // entropy of (0.8, 0.2)
        let mut med_rate = Vec::new();
        let mut med_plugin = Vec::new();
        for n in [32u32, 256] {
            let mut rate_errs = Vec::new();
            let mut plugin_errs = Vec::new();
            for seed in 0..10u64 {
                let w = Window::new(os1(), n).unwrap();
                let p = sample_bernoulli(&[0.8, 0.2], w, seed).unwrap();
                rate_errs.push((complexity_density(&p, 2).unwrap().value - h).abs());
                plugin_errs.push((plugin_block_entropy(&p, 2).unwrap().value - h).abs());
            }
            rate_errs.sort_by(f64::total_cmp);
            plugin_errs.sort_by(f64::total_cmp);
            med_rate.push(0.5 * (rate_errs[4] + rate_errs[5]));
            med_plugin.push(0.5 * (plugin_errs[4] + plugin_errs[5]));
        }
        assert!(med_rate[1] < med_rate[0], "code-rate medians {med_rate:?}");
        assert!(
            med_plugin[1] < med_plugin[0],
            "plug-in medians {med_plugin:?}"
        );
    }

    #[test]
    fn tsv_formatting() {
        assert_eq!(tsv_header(), "method\td\tkind\tn\tm\tseed\tvalue");
        let est = EntropyEstimate {
            method: EstimatorMethod::Plugin,
            value: 0.5,
            n: 64,
            m: Some(2),
        };
        assert_eq!(
            tsv_row(&est, os1(), Some(7)),
            "plugin\t1\tonesided\t64\t2\t7\t0.500000"
        );
        let est2 = EntropyEstimate {
            method: EstimatorMethod::InformationDensity,
            value: 1.0 / 3.0,
            n: 8,
            m: None,
        };
        assert_eq!(
            tsv_row(
                &est2,
                LatticeSpec::new(2, LatticeKind::TwoSided).unwrap(),
                None
            ),
            "information_density\t2\ttwosided\t8\t-\t-\t0.333333"
        );
    }
}
