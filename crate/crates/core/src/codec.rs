//! The enumerative block compressor.
//!
//! A pattern on the radius-`n` window is coded in three fields against a
//! tiling by radius-`m` blocks:
//!
//! * `x` — the block census: how often each of the `sigma^|block|` possible
//!   blocks occurs among the tiles, written either *dense* (one
//!   natural-number code per possible block, zeros included) or *sparse*
//!   (the number of distinct blocks, then index/count pairs in increasing
//!   index order).
//! * `y` — the rank of the actual tile sequence inside the class of all
//!   sequences with that census, written in exactly
//!   `ceil(log2(class size))` bits. The width is recomputable from the
//!   decoded census, so the stream stays uniquely parsable.
//! * `z` — the uncovered boundary symbols, read in scan order as a string
//!   and mapped through the string/natural bijection, written as one
//!   natural-number code.
//!
//! All arithmetic is exact (`BigUint`); encode followed by decode is the
//! identity on patterns, and the per-field lengths obey an explicit bound
//! recorded in [`LengthReport`].
//!
//! Container layout (header 24 bytes, then the payload bits packed
//! MSB-first):
//!
//! ```text
//! "BRDC"  magic                  4 bytes
//! 0x01    version                1 byte
//! kind    0 one-sided, 1 two-sided
//! d       dimension              1 byte
//! n       window radius          4 bytes little-endian
//! sigma   alphabet size          2 bytes little-endian
//! m       block radius           2 bytes little-endian
//! mode    0 dense, 1 sparse      1 byte
//! bits    payload bit length     8 bytes little-endian
//! ```

use crate::codes::{
    read_nat, read_nat_u64, write_nat, write_nat_u64, BitReader, Bits, CodeError,
};
use crate::lattice::{
    make_tiling, scan_index, scan_order, LatticeError, LatticeKind, LatticeSpec, Site, Tiling,
    Window,
};
use crate::pattern::{Pattern, PatternError};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Magic bytes opening a code container.
pub const CODEC_MAGIC: [u8; 4] = *b"BRDC";
/// Current code container version.
pub const CODEC_VERSION: u8 = 0x01;
/// Container header size in bytes.
pub const CODEC_HEADER_BYTES: usize = 24;
/// Container header size in bits, as accounted in [`LengthReport`].
pub const CODEC_HEADER_BITS: u64 = 8 * CODEC_HEADER_BYTES as u64;
/// Default census-size threshold below which automatic mode picks dense.
pub const DENSE_THRESHOLD_DEFAULT: u64 = 1 << 16;
/// Hard cap on the census size a decoder will read in dense mode.
pub const DENSE_DECODE_LIMIT: u64 = 1 << 20;
/// Hard cap on block volume for indexing (keeps `sigma^|block|` manageable).
pub const MAX_BLOCK_VOLUME: u64 = 1 << 16;
/// Hard cap on window volume for decoding; bounds the allocations an
/// untrusted container header can trigger.
pub const MAX_DECODE_VOLUME: u64 = 1 << 22;

/// Errors from encoding, decoding, and container parsing.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("dense mode needs census size at most {threshold}, but there are {m_count} possible blocks")]
    DenseUnavailable { m_count: BigUint, threshold: u64 },
    #[error("dense decoding caps census size at {limit}, header implies {m_count} possible blocks")]
    DenseDecodeTooWide { m_count: BigUint, limit: u64 },
    #[error("block volume {volume} exceeds the indexing cap {limit}")]
    BlockVolumeTooLarge { volume: u64, limit: u64 },
    #[error("window volume {volume} exceeds the decoding cap {limit}")]
    DecodeVolumeTooLarge { volume: u64, limit: u64 },
    #[error("block radius {m} does not fit the container's 16-bit field")]
    BlockRadiusUnrepresentable { m: u32 },
    #[error("code container does not start with the BRDC magic")]
    BadMagic,
    #[error("unsupported code container version {version}")]
    UnsupportedVersion { version: u8 },
    #[error("invalid lattice kind byte {byte}")]
    BadKindByte { byte: u8 },
    #[error("invalid mode byte {byte}")]
    BadModeByte { byte: u8 },
    #[error("code container truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: u64, got: u64 },
    #[error("code container has {extra} trailing bytes")]
    TrailingBytes { extra: u64 },
    #[error("census count {count} exceeds the number of tiles {limit}")]
    CountTooLarge { count: u64, limit: u64 },
    #[error("census counts sum to {got}, expected {expected}")]
    CountSumMismatch { expected: u64, got: u64 },
    #[error("sparse census lists {got} distinct blocks, more than the {limit} possible")]
    TooManyDistinctBlocks { got: u64, limit: u64 },
    #[error("sparse census indices must be strictly increasing")]
    IndicesNotIncreasing,
    #[error("sparse census contains a zero count")]
    ZeroCount,
    #[error("block index is not below the census size")]
    BlockIndexTooLarge,
    #[error("rank field is not below the class size")]
    RankOutOfRange,
    #[error("boundary field exceeds the boundary string capacity")]
    BoundaryValueOutOfRange,
    #[error("pattern alphabet {pattern} does not match the expected alphabet {expected}")]
    AlphabetMismatch { pattern: u16, expected: u16 },
    #[error("sequence element does not appear in the census")]
    UnknownBlockIndex,
}

/// How the census field is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeMode {
    Dense,
    Sparse,
}

impl fmt::Display for CodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeMode::Dense => "dense",
            CodeMode::Sparse => "sparse",
        })
    }
}

/// Requested census mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeChoice {
    /// Dense when the census fits under the threshold, sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Encoder options.
#[derive(Clone, Copy, Debug)]
pub struct EncodeOptions {
    pub mode: ModeChoice,
    /// Census-size bound for dense mode (both the automatic choice and the
    /// validity of an explicit dense request).
    pub dense_threshold: u64,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            mode: ModeChoice::Auto,
            dense_threshold: DENSE_THRESHOLD_DEFAULT,
        }
    }
}

/// The enumeration of radius-`m` blocks over a fixed alphabet: block index =
/// the base-`sigma` positional value of the scan-order symbol string.
pub struct BlockIndexOrder {
    spec: LatticeSpec,
    m: u32,
    alphabet_size: u16,
    volume: u64,
    count: BigUint,
    block_sites: Vec<Site>,
}

impl BlockIndexOrder {
    pub fn new(spec: LatticeSpec, m: u32, alphabet_size: u16) -> Result<Self, CodecError> {
        let volume = crate::lattice::window_size(spec, m)?;
        if volume > MAX_BLOCK_VOLUME {
            return Err(CodecError::BlockVolumeTooLarge {
                volume,
                limit: MAX_BLOCK_VOLUME,
            });
        }
        let count = BigUint::from(alphabet_size).pow(volume as u32);
        Ok(BlockIndexOrder {
            spec,
            m,
            alphabet_size,
            volume,
            count,
            block_sites: scan_order(spec, m)?,
        })
    }

    /// Number of possible blocks, `sigma^volume`.
    pub fn count(&self) -> &BigUint {
        &self.count
    }

    /// Sites of one block in scan order.
    pub fn sites(&self) -> &[Site] {
        &self.block_sites
    }

    /// Number of sites in one block.
    pub fn volume(&self) -> u64 {
        self.volume
    }

    /// Index of a block given its scan-order symbols.
    pub fn index_of_symbols(&self, symbols: &[u8]) -> BigUint {
        debug_assert_eq!(symbols.len() as u64, self.volume);
        let sigma = u32::from(self.alphabet_size);
        let mut v = BigUint::zero();
        for &s in symbols {
            v = v * sigma + s;
        }
        v
    }

    /// Index of a block pattern (validates shape and alphabet).
    pub fn index_of(&self, block: &Pattern) -> Result<BigUint, CodecError> {
        if block.alphabet_size() != self.alphabet_size {
            return Err(CodecError::AlphabetMismatch {
                pattern: block.alphabet_size(),
                expected: self.alphabet_size,
            });
        }
        if block.spec() != self.spec || block.window().n != self.m {
            return Err(CodecError::Pattern(PatternError::SymbolCountMismatch {
                expected: self.volume,
                got: block.window().size()?,
            }));
        }
        Ok(self.index_of_symbols(block.linearize()))
    }

    /// Scan-order symbols of the block with a given index.
    pub fn symbols_of(&self, index: &BigUint) -> Result<Vec<u8>, CodecError> {
        if index >= &self.count {
            return Err(CodecError::BlockIndexTooLarge);
        }
        let mut digits = if index.is_zero() {
            Vec::new()
        } else {
            index.to_radix_be(u32::from(self.alphabet_size))
        };
        while (digits.len() as u64) < self.volume {
            digits.insert(0, 0);
        }
        Ok(digits)
    }

    /// The block pattern with a given index.
    pub fn block(&self, index: &BigUint) -> Result<Pattern, CodecError> {
        let symbols = self.symbols_of(index)?;
        let window = Window::new(self.spec, self.m)?;
        Ok(Pattern::from_scan_symbols(
            window,
            u32::from(self.alphabet_size),
            symbols,
        )?)
    }
}

/// Tile census of a pattern: occurrence count per block index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyVector {
    /// Block radius the census was taken at.
    pub m: u32,
    /// Occurrence count per block index; only present blocks appear.
    pub counts: BTreeMap<BigUint, u64>,
    /// Total number of tiles.
    pub total: u64,
}

impl FrequencyVector {
    /// Builds a census from a tile sequence.
    pub fn from_sequence(m: u32, seq: &[BigUint]) -> Self {
        let mut counts: BTreeMap<BigUint, u64> = BTreeMap::new();
        for b in seq {
            *counts.entry(b.clone()).or_insert(0) += 1;
        }
        FrequencyVector {
            m,
            counts,
            total: seq.len() as u64,
        }
    }

    /// Number of distinct blocks present.
    pub fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Size of the class of tile sequences with this census (multinomial
    /// coefficient `total! / prod(count!)`), computed exactly.
    pub fn class_size(&self) -> BigUint {
        multinomial(self.counts.values().copied())
    }
}

/// Exact multinomial coefficient of the given counts.
fn multinomial(counts: impl IntoIterator<Item = u64>) -> BigUint {
    // Incrementally extend C(a, i): after each full inner loop the value is
    // the multinomial of the counts seen so far, so every division is exact.
    let mut result = BigUint::one();
    let mut acc = 0u64;
    for c in counts {
        for i in 1..=c {
            acc += 1;
            result *= acc;
            result /= i;
        }
    }
    result
}

/// The tile sequence of `p` at block radius `m`, in tiling order.
pub fn block_sequence(p: &Pattern, m: u32) -> Result<Vec<BigUint>, CodecError> {
    let tiling = make_tiling(p.spec(), p.window().n, m)?;
    let order = BlockIndexOrder::new(p.spec(), m, p.alphabet_size())?;
    block_sequence_with(p, &tiling, &order)
}

fn block_sequence_with(
    p: &Pattern,
    tiling: &Tiling,
    order: &BlockIndexOrder,
) -> Result<Vec<BigUint>, CodecError> {
    let spec = p.spec();
    let symbols = p.linearize();
    let sigma = u32::from(p.alphabet_size());
    let mut seq = Vec::with_capacity(tiling.block_origins.len());
    for origin in &tiling.block_origins {
        let mut v = BigUint::zero();
        for h in order.sites() {
            let idx = scan_index(spec, &origin.plus(h))?;
            v = v * sigma + symbols[idx as usize];
        }
        seq.push(v);
    }
    Ok(seq)
}

/// The block census of `p` at radius `m`.
pub fn frequency_vector(p: &Pattern, m: u32) -> Result<FrequencyVector, CodecError> {
    Ok(FrequencyVector::from_sequence(m, &block_sequence(p, m)?))
}

/// Fenwick tree over per-id counts, for prefix sums and quantile descent.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn from_counts(counts: &[u64]) -> Self {
        let mut tree = vec![0u64; counts.len() + 1];
        for (i, &c) in counts.iter().enumerate() {
            let mut j = i + 1;
            while j < tree.len() {
                tree[j] += c;
                j += j & j.wrapping_neg();
            }
        }
        Fenwick { tree }
    }

    /// Sum of counts of ids strictly below `id`.
    fn prefix(&self, id: usize) -> u64 {
        let mut s = 0;
        let mut j = id;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    fn sub_one(&mut self, id: usize) {
        let mut j = id + 1;
        while j < self.tree.len() {
            self.tree[j] -= 1;
            j += j & j.wrapping_neg();
        }
    }

    /// Largest `p` with `a * prefix(p) <= target`, plus that prefix sum. The
    /// caller guarantees the predicate fails at `p = len`, so the returned id
    /// has a positive count.
    fn descend(&self, a: &BigUint, target: &BigUint) -> (usize, u64) {
        let d = self.tree.len() - 1;
        let mut bit = if d == 0 { 0 } else { d.next_power_of_two() };
        if bit > d {
            bit >>= 1;
        }
        let mut pos = 0usize;
        let mut acc = 0u64;
        while bit > 0 {
            let next = pos + bit;
            if next <= d {
                let cand = acc + self.tree[next];
                if &(a * cand) <= target {
                    pos = next;
                    acc = cand;
                }
            }
            bit >>= 1;
        }
        (pos, acc)
    }
}

/// Rank of a tile sequence inside its census class: sequences with the same
/// census are ordered lexicographically (by block index position by
/// position), and `rank_in_class` returns the zero-based position of `seq`
/// in that order. Exact arithmetic throughout.
pub fn rank_in_class(seq: &[BigUint]) -> BigUint {
    if seq.is_empty() {
        return BigUint::zero();
    }
    let mut distinct: Vec<BigUint> = seq.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut counts: Vec<u64> = vec![0; distinct.len()];
    for b in seq {
        let id = distinct.binary_search(b).expect("member of seq");
        counts[id] += 1;
    }
    let mut fen = Fenwick::from_counts(&counts);
    let mut class = multinomial(counts.iter().copied());
    let mut rank = BigUint::zero();
    let mut remaining = seq.len() as u64;
    for b in seq {
        let id = distinct.binary_search(b).expect("member of seq");
        let smaller = fen.prefix(id);
        if smaller > 0 {
            let num = &class * smaller;
            debug_assert!((&num % remaining).is_zero());
            rank += num / remaining;
        }
        let c = counts[id];
        debug_assert!(c > 0);
        let num = class * c;
        debug_assert!((&num % remaining).is_zero());
        class = num / remaining;
        counts[id] -= 1;
        fen.sub_one(id);
        remaining -= 1;
    }
    debug_assert!(class.is_one());
    rank
}

/// Inverse of [`rank_in_class`]: reconstructs the tile sequence with the
/// given census and rank.
pub fn unrank_in_class(fv: &FrequencyVector, rank: &BigUint) -> Result<Vec<BigUint>, CodecError> {
    let distinct: Vec<BigUint> = fv.counts.keys().cloned().collect();
    let mut counts: Vec<u64> = fv.counts.values().copied().collect();
    debug_assert_eq!(counts.iter().sum::<u64>(), fv.total);
    let mut class = multinomial(counts.iter().copied());
    if rank >= &class {
        return Err(CodecError::RankOutOfRange);
    }
    let mut fen = Fenwick::from_counts(&counts);
    let mut rem = rank.clone();
    let mut out = Vec::with_capacity(fv.total as usize);
    let mut remaining = fv.total;
    while remaining > 0 {
        let target = &rem * remaining;
        let (id, smaller) = fen.descend(&class, &target);
        debug_assert!(id < distinct.len());
        if smaller > 0 {
            let num = &class * smaller;
            debug_assert!((&num % remaining).is_zero());
            rem -= num / remaining;
        }
        let c = counts[id];
        debug_assert!(c > 0, "descent picked an exhausted block index");
        let num = class * c;
        debug_assert!((&num % remaining).is_zero());
        class = num / remaining;
        counts[id] -= 1;
        fen.sub_one(id);
        remaining -= 1;
        out.push(distinct[id].clone());
    }
    debug_assert!(rem.is_zero());
    Ok(out)
}

/// Per-field length accounting for one encoded pattern. All lengths in bits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthReport {
    /// Census field.
    pub bits_x: u64,
    /// Rank field (exactly `ceil(log2(class size))`).
    pub bits_y: u64,
    /// Boundary field.
    pub bits_z: u64,
    /// Fixed container header.
    pub bits_header: u64,
    /// Header plus payload.
    pub total: u64,
    /// Explicit upper bound on `total`: `log2(class size) + 1` for the rank,
    /// a per-mode worst case for the census, `2*(boundary * log2(sigma) + 1)
    /// + 1` for the boundary, plus the header. Tests assert
    /// `total <= bound_rhs`.
    pub bound_rhs: f64,
}

impl LengthReport {
    /// Payload bits (header excluded): the program proper.
    pub fn payload(&self) -> u64 {
        self.total - self.bits_header
    }
}

/// An encoded pattern: geometry, mode, and the payload bit string.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedPattern {
    pub window: Window,
    pub alphabet_size: u16,
    pub m: u32,
    pub mode: CodeMode,
    pub payload: Bits,
    /// Present when produced by [`encode`]; not reconstructed by
    /// [`EncodedPattern::from_bytes`].
    pub report: Option<LengthReport>,
}

/// Base-2 logarithm of a positive big integer, via the top 64 bits.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).log2() + shift as f64
}

fn mode_budget_bits(
    mode: CodeMode,
    m_count: &BigUint,
    block_count: u64,
    distinct: u64,
) -> f64 {
    // Each natural-number code of a value v <= V costs at most
    // 2*log2(V+1) + 1 bits.
    let per_count = 2.0 * ((block_count + 1) as f64).log2() + 1.0;
    match mode {
        CodeMode::Dense => {
            let m_f = m_count.to_f64().unwrap_or(f64::INFINITY);
            m_f * per_count
        }
        CodeMode::Sparse => {
            let log2_m = log2_biguint(m_count);
            let per_index = 2.0 * (log2_m + 1.0) + 1.0;
            let d = distinct as f64;
            (2.0 * ((distinct + 1) as f64).log2() + 1.0) + d * (per_index + per_count)
        }
    }
}

/// Encodes a pattern at block radius `m`.
pub fn encode(p: &Pattern, m: u32, options: &EncodeOptions) -> Result<EncodedPattern, CodecError> {
    let window = p.window();
    let spec = p.spec();
    let sigma = p.alphabet_size();
    if m > u32::from(u16::MAX) {
        return Err(CodecError::BlockRadiusUnrepresentable { m });
    }
    let tiling = make_tiling(spec, window.n, m)?;
    let order = BlockIndexOrder::new(spec, m, sigma)?;
    let seq = block_sequence_with(p, &tiling, &order)?;
    let fv = FrequencyVector::from_sequence(m, &seq);
    let block_count = tiling.block_count();
    debug_assert_eq!(fv.total, block_count);

    let dense_ok = order.count() <= &BigUint::from(options.dense_threshold);
    let mode = match options.mode {
        ModeChoice::Auto => {
            if dense_ok {
                CodeMode::Dense
            } else {
                CodeMode::Sparse
            }
        }
        ModeChoice::Dense => {
            if !dense_ok {
                return Err(CodecError::DenseUnavailable {
                    m_count: order.count().clone(),
                    threshold: options.dense_threshold,
                });
            }
            CodeMode::Dense
        }
        ModeChoice::Sparse => CodeMode::Sparse,
    };

    let mut payload = Bits::new();

    // x: the census.
    match mode {
        CodeMode::Dense => {
            let m_count = order
                .count()
                .to_u64()
                .expect("dense mode is gated by the threshold");
            let mut present = fv.counts.iter().peekable();
            for j in 0..m_count {
                match present.peek() {
                    Some((idx, &c)) if idx.to_u64() == Some(j) => {
                        write_nat_u64(&mut payload, c);
                        present.next();
                    }
                    _ => write_nat_u64(&mut payload, 0),
                }
            }
            debug_assert!(present.peek().is_none());
        }
        CodeMode::Sparse => {
            write_nat_u64(&mut payload, fv.distinct());
            for (idx, &c) in &fv.counts {
                write_nat(&mut payload, idx);
                write_nat_u64(&mut payload, c);
            }
        }
    }
    let bits_x = payload.len() as u64;

    // y: the rank inside the census class, fixed width ceil(log2(class)).
    let class = fv.class_size();
    let width = rank_field_width(&class);
    if width > 0 {
        let rank = rank_in_class(&seq);
        debug_assert!(rank < class);
        payload.push_uint(&rank, width);
    }
    let bits_y = payload.len() as u64 - bits_x;
    debug_assert_eq!(bits_y, width);

    // z: boundary symbols as one bijection value.
    let mut boundary = Vec::with_capacity(tiling.boundary_sites.len());
    for site in &tiling.boundary_sites {
        let idx = scan_index(spec, site)?;
        boundary.push(p.linearize()[idx as usize]);
    }
    let z = crate::codes::str_to_nat(&boundary, (sigma - 1) as u8)?;
    write_nat(&mut payload, &z);
    let bits_z = payload.len() as u64 - bits_x - bits_y;

    let log2_class = if class.is_one() {
        0.0
    } else {
        log2_biguint(&class)
    };
    let bc = tiling.boundary_sites.len() as f64;
    let bound_rhs = (log2_class + 1.0)
        + mode_budget_bits(mode, order.count(), block_count, fv.distinct())
        + (2.0 * (bc * f64::from(sigma).log2() + 1.0) + 1.0)
        + CODEC_HEADER_BITS as f64;

    let report = LengthReport {
        bits_x,
        bits_y,
        bits_z,
        bits_header: CODEC_HEADER_BITS,
        total: CODEC_HEADER_BITS + payload.len() as u64,
        bound_rhs,
    };

    Ok(EncodedPattern {
        window,
        alphabet_size: sigma,
        m,
        mode,
        payload,
        report: Some(report),
    })
}

/// Width of the rank field for a census class of the given size.
pub fn rank_field_width(class: &BigUint) -> u64 {
    if class.is_one() {
        0
    } else {
        (class - 1u8).bits()
    }
}

/// The per-field length accounting of `encode(p, m, options)`.
pub fn code_length_report(
    p: &Pattern,
    m: u32,
    options: &EncodeOptions,
) -> Result<LengthReport, CodecError> {
    Ok(encode(p, m, options)?.report.expect("encode fills the report"))
}

/// Decodes an encoded pattern back to the original.
pub fn decode(enc: &EncodedPattern) -> Result<Pattern, CodecError> {
    let window = enc.window;
    let spec = window.spec;
    let sigma = enc.alphabet_size;
    if !(2..=256).contains(&u32::from(sigma)) {
        return Err(CodecError::Pattern(PatternError::BadAlphabet {
            alphabet_size: u32::from(sigma),
        }));
    }
    let volume = window.size()?;
    if volume > MAX_DECODE_VOLUME {
        return Err(CodecError::DecodeVolumeTooLarge {
            volume,
            limit: MAX_DECODE_VOLUME,
        });
    }
    let tiling = make_tiling(spec, window.n, enc.m)?;
    let order = BlockIndexOrder::new(spec, enc.m, sigma)?;
    let block_count = tiling.block_count();
    let mut reader = BitReader::over(&enc.payload);

    // x: the census.
    let fv = match enc.mode {
        CodeMode::Dense => {
            let m_count = order.count().to_u64().filter(|&c| c <= DENSE_DECODE_LIMIT).ok_or(
                CodecError::DenseDecodeTooWide {
                    m_count: order.count().clone(),
                    limit: DENSE_DECODE_LIMIT,
                },
            )?;
            let mut counts = BTreeMap::new();
            let mut sum: u64 = 0;
            for j in 0..m_count {
                let c = read_nat_u64(&mut reader)?;
                if c > block_count {
                    return Err(CodecError::CountTooLarge {
                        count: c,
                        limit: block_count,
                    });
                }
                sum = sum.checked_add(c).ok_or(CodecError::CountSumMismatch {
                    expected: block_count,
                    got: u64::MAX,
                })?;
                if sum > block_count {
                    return Err(CodecError::CountSumMismatch {
                        expected: block_count,
                        got: sum,
                    });
                }
                if c > 0 {
                    counts.insert(BigUint::from(j), c);
                }
            }
            if sum != block_count {
                return Err(CodecError::CountSumMismatch {
                    expected: block_count,
                    got: sum,
                });
            }
            FrequencyVector {
                m: enc.m,
                counts,
                total: block_count,
            }
        }
        CodeMode::Sparse => {
            let distinct = read_nat_u64(&mut reader)?;
            if distinct > block_count || BigUint::from(distinct) > *order.count() {
                return Err(CodecError::TooManyDistinctBlocks {
                    got: distinct,
                    limit: block_count,
                });
            }
            let mut counts = BTreeMap::new();
            let mut sum: u64 = 0;
            let mut prev: Option<BigUint> = None;
            for _ in 0..distinct {
                let idx = read_nat(&mut reader)?;
                if let Some(p) = &prev {
                    if &idx <= p {
                        return Err(CodecError::IndicesNotIncreasing);
                    }
                }
                if &idx >= order.count() {
                    return Err(CodecError::BlockIndexTooLarge);
                }
                let c = read_nat_u64(&mut reader)?;
                if c == 0 {
                    return Err(CodecError::ZeroCount);
                }
                if c > block_count {
                    return Err(CodecError::CountTooLarge {
                        count: c,
                        limit: block_count,
                    });
                }
                sum += c;
                if sum > block_count {
                    return Err(CodecError::CountSumMismatch {
                        expected: block_count,
                        got: sum,
                    });
                }
                prev = Some(idx.clone());
                counts.insert(idx, c);
            }
            if sum != block_count {
                return Err(CodecError::CountSumMismatch {
                    expected: block_count,
                    got: sum,
                });
            }
            FrequencyVector {
                m: enc.m,
                counts,
                total: block_count,
            }
        }
    };

    // y: the rank, in the width implied by the census.
    let class = fv.class_size();
    let width = rank_field_width(&class);
    let rank = reader.read_uint(width, "rank field")?;
    if rank >= class {
        return Err(CodecError::RankOutOfRange);
    }
    let seq = unrank_in_class(&fv, &rank)?;

    // Assemble interior symbols.
    let size = window.size()? as usize;
    let mut symbols = vec![0u8; size];
    for (origin, idx) in tiling.block_origins.iter().zip(&seq) {
        let digits = order.symbols_of(idx)?;
        for (h, &sym) in order.sites().iter().zip(&digits) {
            let si = scan_index(spec, &origin.plus(h))?;
            symbols[si as usize] = sym;
        }
    }

    // z: the boundary string.
    let bc = tiling.boundary_sites.len();
    let z = read_nat(&mut reader)?;
    let zs = crate::codes::nat_to_str(&z, (sigma - 1) as u8)?;
    if zs.len() > bc {
        return Err(CodecError::BoundaryValueOutOfRange);
    }
    // Shorter strings stand for boundary strings with leading zero symbols.
    let pad = bc - zs.len();
    for (i, site) in tiling.boundary_sites.iter().enumerate() {
        let sym = if i < pad { 0 } else { zs[i - pad] };
        let si = scan_index(spec, site)?;
        symbols[si as usize] = sym;
    }

    Ok(Pattern::from_scan_symbols(
        window,
        u32::from(sigma),
        symbols,
    )?)
}

impl EncodedPattern {
    /// Serializes to the BRDC container.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CODEC_HEADER_BYTES + self.payload.as_bytes().len());
        out.extend_from_slice(&CODEC_MAGIC);
        out.push(CODEC_VERSION);
        out.push(match self.window.spec.kind {
            LatticeKind::OneSided => 0,
            LatticeKind::TwoSided => 1,
        });
        out.push(self.window.spec.d);
        out.extend_from_slice(&self.window.n.to_le_bytes());
        out.extend_from_slice(&self.alphabet_size.to_le_bytes());
        out.extend_from_slice(&(self.m as u16).to_le_bytes());
        out.push(match self.mode {
            CodeMode::Dense => 0,
            CodeMode::Sparse => 1,
        });
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(self.payload.as_bytes());
        out
    }

    /// Parses a BRDC container. The payload is kept as-is; call [`decode`]
    /// to reconstruct the pattern.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < 4 || bytes[..4] != CODEC_MAGIC {
            return Err(CodecError::BadMagic);
        }
        if bytes.len() < CODEC_HEADER_BYTES {
            return Err(CodecError::Truncated {
                expected: CODEC_HEADER_BYTES as u64,
                got: bytes.len() as u64,
            });
        }
        if bytes[4] != CODEC_VERSION {
            return Err(CodecError::UnsupportedVersion { version: bytes[4] });
        }
        let kind = match bytes[5] {
            0 => LatticeKind::OneSided,
            1 => LatticeKind::TwoSided,
            byte => return Err(CodecError::BadKindByte { byte }),
        };
        let d = bytes[6];
        let n = u32::from_le_bytes(bytes[7..11].try_into().unwrap());
        let alphabet_size = u16::from_le_bytes(bytes[11..13].try_into().unwrap());
        let m = u32::from(u16::from_le_bytes(bytes[13..15].try_into().unwrap()));
        let mode = match bytes[15] {
            0 => CodeMode::Dense,
            1 => CodeMode::Sparse,
            byte => return Err(CodecError::BadModeByte { byte }),
        };
        let payload_bits = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let payload_bytes = payload_bits.div_ceil(8);
        let expected = CODEC_HEADER_BYTES as u64 + payload_bytes;
        if (bytes.len() as u64) < expected {
            return Err(CodecError::Truncated {
                expected,
                got: bytes.len() as u64,
            });
        }
        if bytes.len() as u64 > expected {
            return Err(CodecError::TrailingBytes {
                extra: bytes.len() as u64 - expected,
            });
        }
        let spec = LatticeSpec::new(d, kind)?;
        let window = Window::new(spec, n)?;
        let payload = Bits::from_bytes(
            &bytes[CODEC_HEADER_BYTES..],
            usize::try_from(payload_bits).map_err(|_| CodecError::Truncated {
                expected,
                got: bytes.len() as u64,
            })?,
        )
        .ok_or(CodecError::Truncated {
            expected,
            got: bytes.len() as u64,
        })?;
        Ok(EncodedPattern {
            window,
            alphabet_size,
            m,
            mode,
            payload,
            report: None,
        })
    }
}
