//! Bit streams and self-delimiting integer codes.
//!
//! Everything here is exact: values are arbitrary-precision naturals, and the
//! codes are bijections with known lengths.
//!
//! * [`str_to_nat`] / [`nat_to_str`] — the length-then-lexicographic bijection
//!   between finite strings over `{0,..,N}` and the naturals: the empty string
//!   maps to 0, then all length-1 strings in order, then length-2, and so on.
//! * [`str_to_int`] / [`int_to_str`] — the same bijection composed with the
//!   zig-zag enumeration `0, -1, 1, -2, 2, ...` of the integers.
//! * [`bar`] / [`read_bar`] — the prefix-free framing `1^l 0 x` of an `l`-bit
//!   string `x`.
//! * [`write_nat`] / [`read_nat`] — the natural-number code obtained by
//!   bar-framing the binary-alphabet bijection string of the value; its length
//!   is exactly `2*floor(log2(v+1)) + 1` bits.
//! * [`kraft_sum`] — exact rational Kraft mass of the natural-number code over
//!   all strings up to a given length.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

/// Errors from bit-stream reads and code validation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    /// A read ran past the end of the available bits.
    #[error("bit stream ended after {available} bits while reading {context}")]
    UnexpectedEnd {
        /// Total bits that were available.
        available: usize,
        /// What was being read when the stream ran out.
        context: &'static str,
    },
    /// A string symbol exceeded the declared alphabet maximum.
    #[error("symbol {symbol} exceeds alphabet maximum {max_symbol}")]
    SymbolOutOfRange { symbol: u8, max_symbol: u8 },
    /// The alphabet must contain at least the two symbols 0 and 1.
    #[error("alphabet maximum must be at least 1, got {max_symbol}")]
    AlphabetTooSmall { max_symbol: u8 },
    /// A decoded length prefix would require more bits than the stream holds.
    #[error("length prefix {length} exceeds remaining {remaining} bits")]
    LengthPrefixTooLong { length: usize, remaining: usize },
    /// A value did not fit in the fixed-size integer requested by the caller.
    #[error("decoded value needs {bits} bits, more than the requested integer holds")]
    ValueTooLarge { bits: u64 },
}

/// Growable bit string, most-significant bit first within each byte.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    /// Empty bit string.
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits held.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when no bits are held.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends one bit.
    pub fn push(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Bit at position `i` (0 = first pushed). Panics if out of range.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    /// Appends all bits of `other`.
    pub fn extend_bits(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    /// Appends `width` bits holding `value` big-endian (most significant
    /// first). Panics if `value` needs more than `width` bits.
    pub fn push_uint(&mut self, value: &BigUint, width: u64) {
        assert!(
            value.bits() <= width,
            "value needs {} bits but field width is {width}",
            value.bits()
        );
        for i in (0..width).rev() {
            self.push(value.bit(i));
        }
    }

    /// Backing bytes, final partial byte zero-padded on the right.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Builds from a byte slice holding `len` bits MSB-first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Self> {
        if len > bytes.len().checked_mul(8)? {
            return None;
        }
        let n_bytes = len.div_ceil(8);
        let mut out = Bits {
            bytes: bytes[..n_bytes].to_vec(),
            len,
        };
        // Zero the padding so equality is structural.
        if len % 8 != 0 {
            let mask = !(0xffu8 >> (len % 8));
            if let Some(last) = out.bytes.last_mut() {
                *last &= mask;
            }
        }
        Some(out)
    }

    /// Parses a string of `0`/`1` characters; other characters are rejected.
    pub fn from_binary_text(s: &str) -> Option<Self> {
        let mut out = Bits::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return None,
            }
        }
        Some(out)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

/// Cursor over a bit string (or raw bytes) for sequential reads.
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    /// Reads from `bytes`, exposing exactly `len` bits.
    pub fn new(bytes: &'a [u8], len: usize) -> Self {
        debug_assert!(len <= bytes.len() * 8);
        Self { bytes, len, pos: 0 }
    }

    /// Reads the whole of `bits`.
    pub fn over(bits: &'a Bits) -> Self {
        Self::new(bits.as_bytes(), bits.len())
    }

    /// Bits not yet consumed.
    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }

    /// Current position in bits from the start.
    pub fn position(&self) -> usize {
        self.pos
    }

    /// Reads one bit.
    pub fn read_bit(&mut self, context: &'static str) -> Result<bool, CodeError> {
        if self.pos >= self.len {
            return Err(CodeError::UnexpectedEnd {
                available: self.len,
                context,
            });
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    /// Reads `width` bits as a big-endian natural.
    pub fn read_uint(&mut self, width: u64, context: &'static str) -> Result<BigUint, CodeError> {
        let width_usize = usize::try_from(width).map_err(|_| CodeError::LengthPrefixTooLong {
            length: usize::MAX,
            remaining: self.remaining(),
        })?;
        if width_usize > self.remaining() {
            return Err(CodeError::UnexpectedEnd {
                available: self.len,
                context,
            });
        }
        let mut value = BigUint::zero();
        for _ in 0..width_usize {
            let bit = self.read_bit(context)?;
            value <<= 1u8;
            if bit {
                value |= BigUint::one();
            }
        }
        Ok(value)
    }
}

/// Number of strings over a `base`-letter alphabet of length strictly less
/// than `l`: `(base^l - 1) / (base - 1)` for `base >= 2`.
fn length_offset(base: u32, l: u64) -> BigUint {
    debug_assert!(base >= 2);
    (BigUint::from(base).pow(u32::try_from(l).expect("string length fits u32")) - 1u8)
        / BigUint::from(base - 1)
}

/// Maps a string over `{0,..,max_symbol}` to its rank in the
/// length-then-lexicographic enumeration of all such strings (empty string
/// first). This is a bijection onto the naturals.
pub fn str_to_nat(symbols: &[u8], max_symbol: u8) -> Result<BigUint, CodeError> {
    if max_symbol == 0 {
        return Err(CodeError::AlphabetTooSmall { max_symbol });
    }
    let base = u32::from(max_symbol) + 1;
    let mut positional = BigUint::zero();
    for &s in symbols {
        if s > max_symbol {
            return Err(CodeError::SymbolOutOfRange {
                symbol: s,
                max_symbol,
            });
        }
        positional = positional * base + s;
    }
    Ok(length_offset(base, symbols.len() as u64) + positional)
}

/// Inverse of [`str_to_nat`]: the `value`-th string over `{0,..,max_symbol}`
/// in length-then-lexicographic order.
pub fn nat_to_str(value: &BigUint, max_symbol: u8) -> Result<Vec<u8>, CodeError> {
    if max_symbol == 0 {
        return Err(CodeError::AlphabetTooSmall { max_symbol });
    }
    let base = u32::from(max_symbol) + 1;
    // Find the unique length l with offset(l) <= value < offset(l+1).
    let mut l: u64 = 0;
    while &length_offset(base, l + 1) <= value {
        l += 1;
    }
    let positional = value - length_offset(base, l);
    let mut digits = if positional.is_zero() {
        Vec::new()
    } else {
        positional.to_radix_be(base)
    };
    debug_assert!(digits.len() as u64 <= l);
    while (digits.len() as u64) < l {
        digits.insert(0, 0);
    }
    Ok(digits)
}

/// Zig-zag enumeration of the integers: index 0, 1, 2, 3, 4, ... maps to
/// 0, -1, 1, -2, 2, ... Returns `(magnitude, negative)`.
fn zigzag(n: &BigUint) -> (BigUint, bool) {
    // magnitude = floor((n+1)/2), sign negative exactly when n is odd.
    let magnitude = (n + 1u8) >> 1;
    (magnitude, n.bit(0))
}

/// Inverse zig-zag: integer written as `(magnitude, negative)` to its index.
fn zigzag_inv(magnitude: &BigUint, negative: bool) -> BigUint {
    if magnitude.is_zero() {
        BigUint::zero()
    } else if negative {
        (magnitude << 1u8) - 1u8
    } else {
        magnitude << 1u8
    }
}

/// Signed value produced by [`str_to_int`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedNat {
    /// Absolute value.
    pub magnitude: BigUint,
    /// True for strictly negative values.
    pub negative: bool,
}

impl SignedNat {
    /// Convenience constructor from an `i64`.
    pub fn from_i64(v: i64) -> Self {
        SignedNat {
            magnitude: BigUint::from(v.unsigned_abs()),
            negative: v < 0,
        }
    }

    /// Value as an `i64`, if it fits.
    pub fn to_i64(&self) -> Option<i64> {
        let mag = self.magnitude.to_i64()?;
        Some(if self.negative { -mag } else { mag })
    }
}

/// Bijection from strings over `{0,..,max_symbol}` onto the integers:
/// [`str_to_nat`] followed by the zig-zag enumeration `0, -1, 1, -2, 2, ...`.
pub fn str_to_int(symbols: &[u8], max_symbol: u8) -> Result<SignedNat, CodeError> {
    let n = str_to_nat(symbols, max_symbol)?;
    let (magnitude, negative) = zigzag(&n);
    Ok(SignedNat {
        magnitude,
        negative,
    })
}

/// Inverse of [`str_to_int`].
pub fn int_to_str(value: &SignedNat, max_symbol: u8) -> Result<Vec<u8>, CodeError> {
    nat_to_str(&zigzag_inv(&value.magnitude, value.negative), max_symbol)
}

/// Prefix-free framing of a bit string: `l` ones, a zero, then the `l` bits.
pub fn bar(x: &Bits) -> Bits {
    let mut out = Bits::new();
    for _ in 0..x.len() {
        out.push(true);
    }
    out.push(false);
    out.extend_bits(x);
    out
}

/// Reads one bar-framed string from the stream, leaving the cursor just past
/// it.
pub fn read_bar(reader: &mut BitReader<'_>) -> Result<Bits, CodeError> {
    let mut l = 0usize;
    while reader.read_bit("bar length prefix")? {
        l += 1;
    }
    if l > reader.remaining() {
        return Err(CodeError::LengthPrefixTooLong {
            length: l,
            remaining: reader.remaining(),
        });
    }
    let mut payload = Bits::new();
    for _ in 0..l {
        payload.push(reader.read_bit("bar payload")?);
    }
    Ok(payload)
}

/// Splits a bit string that begins with a bar-framed string into the framed
/// payload and the remainder.
pub fn unbar(stream: &Bits) -> Result<(Bits, Bits), CodeError> {
    let mut reader = BitReader::over(stream);
    let payload = read_bar(&mut reader)?;
    let mut rest = Bits::new();
    while reader.remaining() > 0 {
        rest.push(reader.read_bit("unbar remainder")?);
    }
    Ok((payload, rest))
}

/// Appends the natural-number code of `value`: the bar framing of the
/// binary-alphabet bijection string of `value`. Exactly
/// `2*floor(log2(value+1)) + 1` bits.
pub fn write_nat(out: &mut Bits, value: &BigUint) {
    // The length-l binary bijection string of v satisfies
    // offset(l) = 2^l - 1 <= v < 2^{l+1} - 1, so l = bits(v+1) - 1 and the
    // positional part is v - (2^l - 1) written in l bits.
    let vp1 = value + 1u8;
    let l = vp1.bits() - 1;
    let positional = vp1 - (BigUint::one() << l);
    for _ in 0..l {
        out.push(true);
    }
    out.push(false);
    out.push_uint(&positional, l);
}

/// [`write_nat`] specialised to `u64` values.
pub fn write_nat_u64(out: &mut Bits, value: u64) {
    let vp1 = value.wrapping_add(1);
    if vp1 == 0 {
        // value == u64::MAX; fall back to the arbitrary-precision path.
        write_nat(out, &BigUint::from(value));
        return;
    }
    let l = 63 - vp1.leading_zeros();
    let positional = vp1 - (1u64 << l);
    for _ in 0..l {
        out.push(true);
    }
    out.push(false);
    for i in (0..l).rev() {
        out.push(positional & (1 << i) != 0);
    }
}

/// Encoded length in bits of the natural-number code of `value`.
pub fn nat_code_len(value: &BigUint) -> u64 {
    2 * ((value + 1u8).bits() - 1) + 1
}

/// Standalone natural-number code of `value` as a fresh bit string.
pub fn encode_nat(value: &BigUint) -> Bits {
    let mut out = Bits::new();
    write_nat(&mut out, value);
    out
}

/// Reads one natural-number code from the stream.
pub fn read_nat(reader: &mut BitReader<'_>) -> Result<BigUint, CodeError> {
    let mut l: u64 = 0;
    while reader.read_bit("nat length prefix")? {
        l += 1;
    }
    if l > reader.remaining() as u64 {
        return Err(CodeError::LengthPrefixTooLong {
            length: l as usize,
            remaining: reader.remaining(),
        });
    }
    let positional = reader.read_uint(l, "nat payload")?;
    Ok(positional + (BigUint::one() << l) - 1u8)
}

/// Reads one natural-number code, requiring the value to fit in a `u64`.
pub fn read_nat_u64(reader: &mut BitReader<'_>) -> Result<u64, CodeError> {
    let value = read_nat(reader)?;
    value
        .to_u64()
        .ok_or(CodeError::ValueTooLarge { bits: value.bits() })
}

/// Decodes a standalone natural-number code, returning the value and the
/// number of bits consumed.
pub fn decode_nat(stream: &Bits) -> Result<(BigUint, usize), CodeError> {
    let mut reader = BitReader::over(stream);
    let value = read_nat(&mut reader)?;
    Ok((value, reader.position()))
}

/// Exact Kraft mass of the natural-number code over all values whose
/// bijection string has length at most `max_len`:
/// `sum_{t=0}^{max_len} 2^t * 2^{-(2t+1)} = 1 - 2^{-(max_len+1)}`.
///
/// The sum is computed term by term in exact rational arithmetic; the closed
/// form above is what tests compare against.
pub fn kraft_sum(max_len: u32) -> BigRational {
    let mut total = BigRational::zero();
    for t in 0..=max_len {
        // 2^t strings of length t, each coded in 2t+1 bits.
        let count = BigUint::one() << t;
        let denom = BigUint::one() << (2 * t + 1);
        total += BigRational::new(count.into(), denom.into());
    }
    total
}
