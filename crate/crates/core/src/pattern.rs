//! Finite symbol patterns on windows, stored in scan order, plus a binary
//! container format.
//!
//! A [`Pattern`] assigns one symbol from `{0,..,alphabet_size-1}` to each site
//! of a window. Symbols are stored linearized in scan order, so
//! [`Pattern::linearize`] is a no-op view and site access goes through the
//! scan bijection.
//!
//! The container layout is:
//!
//! ```text
//! "ZDSH"  magic                 4 bytes
//! 0x01    format version        1 byte
//! kind    0 one-sided, 1 two-sided
//! d       dimension             1 byte
//! n       window radius         4 bytes little-endian
//! sigma   alphabet size         2 bytes little-endian
//! symbols one byte per site, scan order
//! ```

use crate::lattice::{scan_index, scan_order, LatticeError, LatticeKind, LatticeSpec, Site, Window};
use thiserror::Error;

/// Magic bytes opening a pattern container.
pub const PATTERN_MAGIC: [u8; 4] = *b"ZDSH";
/// Current pattern container version.
pub const PATTERN_VERSION: u8 = 0x01;

/// Errors from pattern construction and (de)serialization.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("alphabet size {alphabet_size} is outside the supported range 2..=256")]
    BadAlphabet { alphabet_size: u32 },
    #[error("symbol {symbol} at scan position {position} exceeds alphabet size {alphabet_size}")]
    SymbolOutOfRange {
        position: u64,
        symbol: u8,
        alphabet_size: u16,
    },
    #[error("expected {expected} symbols for the window, got {got}")]
    SymbolCountMismatch { expected: u64, got: u64 },
    #[error("pattern container does not start with the ZDSH magic")]
    BadMagic,
    #[error("unsupported pattern container version {version}")]
    UnsupportedVersion { version: u8 },
    #[error("invalid lattice kind byte {byte}")]
    BadKindByte { byte: u8 },
    #[error("pattern container truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: u64, got: u64 },
    #[error("pattern container has {extra} trailing bytes")]
    TrailingBytes { extra: u64 },
    #[error("site {site} lies outside the pattern window")]
    SiteOutsideWindow { site: String },
    #[error("block at origin {origin} with radius {m} does not fit in the window")]
    BlockOutsideWindow { origin: String, m: u32 },
    #[error("restriction radius {requested} exceeds the pattern radius {actual}")]
    RestrictionTooLarge { requested: u32, actual: u32 },
}

/// A symbol pattern on a window, stored in scan order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    window: Window,
    alphabet_size: u16,
    symbols: Vec<u8>,
}

fn validate_alphabet(alphabet_size: u32) -> Result<u16, PatternError> {
    if !(2..=256).contains(&alphabet_size) {
        return Err(PatternError::BadAlphabet { alphabet_size });
    }
    Ok(alphabet_size as u16)
}

/// True when `symbol` is legal for an alphabet of `alphabet_size` symbols
/// (`alphabet_size` = 256 admits every byte).
fn symbol_ok(symbol: u8, alphabet_size: u16) -> bool {
    u16::from(symbol) < alphabet_size
}

impl Pattern {
    /// Builds a pattern from symbols already in scan order.
    pub fn from_scan_symbols(
        window: Window,
        alphabet_size: u32,
        symbols: Vec<u8>,
    ) -> Result<Self, PatternError> {
        let alphabet_size = validate_alphabet(alphabet_size)?;
        let expected = window.size()?;
        if symbols.len() as u64 != expected {
            return Err(PatternError::SymbolCountMismatch {
                expected,
                got: symbols.len() as u64,
            });
        }
        for (i, &s) in symbols.iter().enumerate() {
            if !symbol_ok(s, alphabet_size) {
                return Err(PatternError::SymbolOutOfRange {
                    position: i as u64,
                    symbol: s,
                    alphabet_size,
                });
            }
        }
        Ok(Pattern {
            window,
            alphabet_size,
            symbols,
        })
    }

    /// Builds a pattern by evaluating `f` on every window site in scan order.
    pub fn from_fn(
        window: Window,
        alphabet_size: u32,
        mut f: impl FnMut(&Site) -> u8,
    ) -> Result<Self, PatternError> {
        let sites = scan_order(window.spec, window.n)?;
        let symbols: Vec<u8> = sites.iter().map(&mut f).collect();
        Self::from_scan_symbols(window, alphabet_size, symbols)
    }

    /// The pattern's window.
    pub fn window(&self) -> Window {
        self.window
    }

    /// Ambient lattice of the window.
    pub fn spec(&self) -> LatticeSpec {
        self.window.spec
    }

    /// Alphabet size (2..=256).
    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    /// Symbols in scan order.
    pub fn linearize(&self) -> &[u8] {
        &self.symbols
    }

    /// Symbol at a window site.
    pub fn get(&self, site: &Site) -> Result<u8, PatternError> {
        if !self.window.contains(site) {
            return Err(PatternError::SiteOutsideWindow {
                site: site.to_string(),
            });
        }
        let idx = scan_index(self.window.spec, site)?;
        Ok(self.symbols[idx as usize])
    }

    /// Restriction to the radius-`n2` window (`n2 <= n`). Thanks to the scan
    /// prefix property this is a truncation of the symbol vector.
    pub fn restrict(&self, n2: u32) -> Result<Pattern, PatternError> {
        if n2 > self.window.n {
            return Err(PatternError::RestrictionTooLarge {
                requested: n2,
                actual: self.window.n,
            });
        }
        let window = Window::new(self.window.spec, n2)?;
        let size = window.size()? as usize;
        Ok(Pattern {
            window,
            alphabet_size: self.alphabet_size,
            symbols: self.symbols[..size].to_vec(),
        })
    }

    /// The radius-`m` block read off at `origin`: a pattern on the radius-`m`
    /// window whose site `h` carries the symbol at `origin + h`.
    pub fn extract_block(&self, origin: &Site, m: u32) -> Result<Pattern, PatternError> {
        let block_window = Window::new(self.window.spec, m)?;
        let sites = scan_order(self.window.spec, m)?;
        let mut symbols = Vec::with_capacity(sites.len());
        for h in &sites {
            let s = origin.plus(h);
            if !self.window.contains(&s) {
                return Err(PatternError::BlockOutsideWindow {
                    origin: origin.to_string(),
                    m,
                });
            }
            let idx = scan_index(self.window.spec, &s)?;
            symbols.push(self.symbols[idx as usize]);
        }
        Ok(Pattern {
            window: block_window,
            alphabet_size: self.alphabet_size,
            symbols,
        })
    }

    /// Serializes to the ZDSH container.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.symbols.len());
        out.extend_from_slice(&PATTERN_MAGIC);
        out.push(PATTERN_VERSION);
        out.push(match self.window.spec.kind {
            LatticeKind::OneSided => 0,
            LatticeKind::TwoSided => 1,
        });
        out.push(self.window.spec.d);
        out.extend_from_slice(&self.window.n.to_le_bytes());
        out.extend_from_slice(&self.alphabet_size.to_le_bytes());
        out.extend_from_slice(&self.symbols);
        out
    }

    /// Parses a ZDSH container, validating every field.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PatternError> {
        const HEADER: usize = 13; // magic 4, version 1, kind 1, d 1, n 4, sigma 2
        if bytes.len() < 4 || bytes[..4] != PATTERN_MAGIC {
            return Err(PatternError::BadMagic);
        }
        if bytes.len() < HEADER {
            return Err(PatternError::Truncated {
                expected: HEADER as u64,
                got: bytes.len() as u64,
            });
        }
        if bytes[4] != PATTERN_VERSION {
            return Err(PatternError::UnsupportedVersion { version: bytes[4] });
        }
        let kind = match bytes[5] {
            0 => LatticeKind::OneSided,
            1 => LatticeKind::TwoSided,
            byte => return Err(PatternError::BadKindByte { byte }),
        };
        let d = bytes[6];
        let n = u32::from_le_bytes(bytes[7..11].try_into().unwrap());
        let alphabet_size = u16::from_le_bytes(bytes[11..13].try_into().unwrap());
        let spec = LatticeSpec::new(d, kind)?;
        let window = Window::new(spec, n)?;
        let size = window.size()?;
        let expected_total = (HEADER as u64)
            .checked_add(size)
            .ok_or(LatticeError::WindowTooLarge { n, d })?;
        if (bytes.len() as u64) < expected_total {
            return Err(PatternError::Truncated {
                expected: expected_total,
                got: bytes.len() as u64,
            });
        }
        if bytes.len() as u64 > expected_total {
            return Err(PatternError::TrailingBytes {
                extra: bytes.len() as u64 - expected_total,
            });
        }
        let symbols = bytes[HEADER..].to_vec();
        Pattern::from_scan_symbols(window, u32::from(alphabet_size), symbols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_tiling, LatticeKind, LatticeSpec, Window};
    use proptest::prelude::*;

    fn window(d: u8, kind: LatticeKind, n: u32) -> Window {
        Window::new(LatticeSpec::new(d, kind).unwrap(), n).unwrap()
    }

    fn site(coords: &[i64]) -> Site {
        Site::new(coords.to_vec())
    }

    #[test]
    fn scan_storage_and_site_access() {
        // One-sided plane radius 2; scan order (0,0),(0,1),(1,0),(1,1).
        let w = window(2, LatticeKind::OneSided, 2);
        let p = Pattern::from_scan_symbols(w, 2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(p.linearize(), &[0, 1, 1, 0]);
        assert_eq!(p.get(&site(&[0, 0])).unwrap(), 0);
        assert_eq!(p.get(&site(&[0, 1])).unwrap(), 1);
        assert_eq!(p.get(&site(&[1, 0])).unwrap(), 1);
        assert_eq!(p.get(&site(&[1, 1])).unwrap(), 0);
        assert!(matches!(
            p.get(&site(&[2, 0])),
            Err(PatternError::SiteOutsideWindow { .. })
        ));
    }

    #[test]
    fn from_fn_matches_scan_order() {
        let w = window(1, LatticeKind::TwoSided, 3);
        // Sites in scan order: 0, -1, 1, -2, 2.
        let p = Pattern::from_fn(w, 3, |s| (s.coords[0].rem_euclid(3)) as u8).unwrap();
        assert_eq!(p.linearize(), &[0, 2, 1, 1, 2]);
    }

    #[test]
    fn extract_block_on_the_line() {
        // Pattern 0,1,1,1,0 on the one-sided line.
        let w = window(1, LatticeKind::OneSided, 5);
        let p = Pattern::from_scan_symbols(w, 2, vec![0, 1, 1, 1, 0]).unwrap();
        let b = p.extract_block(&site(&[2]), 2).unwrap();
        assert_eq!(b.linearize(), &[1, 1]);
        let b0 = p.extract_block(&site(&[0]), 2).unwrap();
        assert_eq!(b0.linearize(), &[0, 1]);
        assert!(matches!(
            p.extract_block(&site(&[4]), 2),
            Err(PatternError::BlockOutsideWindow { .. })
        ));
    }

    #[test]
    fn extract_blocks_cover_tiling() {
        let w = window(2, LatticeKind::TwoSided, 4);
        let p = Pattern::from_fn(w, 5, |s| {
            ((s.coords[0] * 3 + s.coords[1]).rem_euclid(5)) as u8
        })
        .unwrap();
        let t = make_tiling(w.spec, w.n, 2).unwrap();
        for origin in &t.block_origins {
            let b = p.extract_block(origin, 2).unwrap();
            for (i, h) in scan_order(w.spec, 2).unwrap().iter().enumerate() {
                assert_eq!(b.linearize()[i], p.get(&origin.plus(h)).unwrap());
            }
        }
    }

    #[test]
    fn restriction_is_scan_prefix() {
        let w = window(2, LatticeKind::OneSided, 4);
        let p = Pattern::from_fn(w, 2, |s| ((s.coords[0] + s.coords[1]) % 2) as u8).unwrap();
        for n2 in 1..=4u32 {
            let r = p.restrict(n2).unwrap();
            assert_eq!(
                r.linearize(),
                &p.linearize()[..r.window().size().unwrap() as usize]
            );
        }
        assert!(matches!(
            p.restrict(5),
            Err(PatternError::RestrictionTooLarge { .. })
        ));
    }

    #[test]
    fn container_roundtrip_examples() {
        let w = window(1, LatticeKind::OneSided, 5);
        let p = Pattern::from_scan_symbols(w, 2, vec![0, 1, 1, 1, 0]).unwrap();
        let bytes = p.to_bytes();
        assert_eq!(&bytes[..4], b"ZDSH");
        assert_eq!(bytes[4], 0x01);
        assert_eq!(bytes[5], 0); // one-sided
        assert_eq!(bytes[6], 1); // d
        assert_eq!(&bytes[7..11], &5u32.to_le_bytes());
        assert_eq!(&bytes[11..13], &2u16.to_le_bytes());
        assert_eq!(&bytes[13..], &[0, 1, 1, 1, 0]);
        assert_eq!(Pattern::from_bytes(&bytes).unwrap(), p);
    }

    #[test]
    fn container_rejects_malformed_input() {
        let w = window(1, LatticeKind::TwoSided, 2);
        let p = Pattern::from_scan_symbols(w, 3, vec![0, 1, 2]).unwrap();
        let good = p.to_bytes();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(Pattern::from_bytes(&bad), Err(PatternError::BadMagic));

        let mut bad = good.clone();
        bad[4] = 0x02;
        assert_eq!(
            Pattern::from_bytes(&bad),
            Err(PatternError::UnsupportedVersion { version: 2 })
        );

        let mut bad = good.clone();
        bad[5] = 7;
        assert_eq!(
            Pattern::from_bytes(&bad),
            Err(PatternError::BadKindByte { byte: 7 })
        );

        let mut bad = good.clone();
        bad[6] = 0;
        assert!(matches!(
            Pattern::from_bytes(&bad),
            Err(PatternError::Lattice(LatticeError::ZeroDimension))
        ));

        let truncated = &good[..good.len() - 1];
        assert!(matches!(
            Pattern::from_bytes(truncated),
            Err(PatternError::Truncated { .. })
        ));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(
            Pattern::from_bytes(&trailing),
            Err(PatternError::TrailingBytes { extra: 1 })
        ));

        let mut bad = good;
        let last = bad.len() - 1;
        bad[last] = 3; // symbol out of range for alphabet size 3
        assert!(matches!(
            Pattern::from_bytes(&bad),
            Err(PatternError::SymbolOutOfRange { .. })
        ));
    }

    #[test]
    fn alphabet_bounds_are_enforced() {
        let w = window(1, LatticeKind::OneSided, 2);
        assert!(matches!(
            Pattern::from_scan_symbols(w, 1, vec![0, 0]),
            Err(PatternError::BadAlphabet { .. })
        ));
        assert!(matches!(
            Pattern::from_scan_symbols(w, 257, vec![0, 0]),
            Err(PatternError::BadAlphabet { .. })
        ));
        // 256 symbols means every byte value is legal.
        assert!(Pattern::from_scan_symbols(w, 256, vec![255, 0]).is_ok());
    }

    proptest! {
        #[test]
        fn prop_container_roundtrip(
            d in 1u8..=3,
            two_sided in any::<bool>(),
            n in 1u32..5,
            sigma in 2u32..7,
            seed in any::<u64>(),
        ) {
            let kind = if two_sided { LatticeKind::TwoSided } else { LatticeKind::OneSided };
            let w = window(d, kind, n);
            let size = w.size().unwrap() as usize;
            // Cheap deterministic symbol stream.
            let mut state = seed | 1;
            let symbols: Vec<u8> = (0..size)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 33) % sigma as u64) as u8
                })
                .collect();
            let p = Pattern::from_scan_symbols(w, sigma, symbols).unwrap();
            let bytes = p.to_bytes();
            prop_assert_eq!(Pattern::from_bytes(&bytes).unwrap(), p);
        }
    }
}
