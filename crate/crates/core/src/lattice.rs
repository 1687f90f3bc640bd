//! Hypercubic windows in `Z^d` / `Z_+^d`, the shell scan bijection, and block
//! tilings.
//!
//! A *window* of radius `n` is the set of sites whose Chebyshev distance from
//! the origin is below `n`: `{0,..,n-1}^d` on the one-sided lattice and
//! `{-(n-1),..,n-1}^d` on the two-sided one. The *scan order* enumerates a
//! window shell by shell (radius 0, then 1, ...) and lexicographically inside
//! each shell, which makes the radius-`n` enumeration a prefix of the
//! radius-`n+1` enumeration. [`scan_index`] inverts a site to its position in
//! that order analytically (no enumeration), and [`scan_site`] goes the other
//! way.
//!
//! [`make_tiling`] covers the bulk of a radius-`n` window by disjoint
//! translates of a radius-`m` window, arranged so the translate origins form a
//! scaled copy of a radius-`k` window; the uncovered boundary sites are kept in
//! scan order.

use std::fmt;
use thiserror::Error;

/// Which lattice the window lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// `Z_+^d`: coordinates are non-negative; the radius-`n` window is
    /// `{0,..,n-1}^d`.
    OneSided,
    /// `Z^d`: the radius-`n` window is `{-(n-1),..,n-1}^d`.
    TwoSided,
}

impl LatticeKind {
    /// Window side length for radius `n`.
    fn side(self, n: u32) -> u64 {
        match self {
            LatticeKind::OneSided => u64::from(n),
            LatticeKind::TwoSided => 2 * u64::from(n) - 1,
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeKind::OneSided => "onesided",
            LatticeKind::TwoSided => "twosided",
        })
    }
}

/// Lattice dimension plus sidedness; the ambient space of all windows here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    pub d: u8,
    pub kind: LatticeKind,
}

impl LatticeSpec {
    /// New spec; `d` must be at least 1.
    pub fn new(d: u8, kind: LatticeKind) -> Result<Self, LatticeError> {
        if d == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        Ok(LatticeSpec { d, kind })
    }

    /// Coordinate range of the radius-`n` window along every axis.
    fn axis_range(&self, n: u32) -> (i64, i64) {
        match self.kind {
            LatticeKind::OneSided => (0, i64::from(n) - 1),
            LatticeKind::TwoSided => (-(i64::from(n) - 1), i64::from(n) - 1),
        }
    }

    /// True when `site` lies in the ambient lattice (any window).
    pub fn contains(&self, site: &Site) -> bool {
        site.coords.len() == usize::from(self.d)
            && (self.kind == LatticeKind::TwoSided || site.coords.iter().all(|&c| c >= 0))
    }

    /// Chebyshev shell of a lattice site: the smallest `t` with the site in
    /// the radius-`t+1` window.
    fn shell(&self, site: &Site) -> u64 {
        site.coords.iter().map(|&c| c.unsigned_abs()).max().unwrap()
    }
}

/// A lattice site as a `d`-tuple of coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub coords: Vec<i64>,
}

impl Site {
    pub fn new(coords: Vec<i64>) -> Self {
        Site { coords }
    }

    /// Component-wise sum.
    pub fn plus(&self, other: &Site) -> Site {
        Site::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Component-wise scaling.
    pub fn scaled(&self, factor: i64) -> Site {
        Site::new(self.coords.iter().map(|c| c * factor).collect())
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// A window: an ambient lattice plus a radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub spec: LatticeSpec,
    pub n: u32,
}

impl Window {
    pub fn new(spec: LatticeSpec, n: u32) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::ZeroRadius);
        }
        Ok(Window { spec, n })
    }

    /// Number of sites, erroring on `u64` overflow.
    pub fn size(&self) -> Result<u64, LatticeError> {
        window_size(self.spec, self.n)
    }

    /// True when `site` lies inside this window.
    pub fn contains(&self, site: &Site) -> bool {
        if site.coords.len() != usize::from(self.spec.d) {
            return false;
        }
        let (lo, hi) = self.spec.axis_range(self.n);
        site.coords.iter().all(|&c| lo <= c && c <= hi)
    }
}

/// Errors from window geometry and tiling construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice dimension must be at least 1")]
    ZeroDimension,
    #[error("window radius must be at least 1")]
    ZeroRadius,
    #[error("window with radius {n} in dimension {d} has more than 2^64 sites")]
    WindowTooLarge { n: u32, d: u8 },
    #[error("site {site} lies outside the {kind} lattice in dimension {d}")]
    SiteOutsideLattice { site: String, kind: LatticeKind, d: u8 },
    #[error("scan index {index} is outside the radius-{n} window")]
    IndexOutOfRange { index: u64, n: u32 },
    #[error("block radius {m} must be smaller than window radius {n}")]
    BlockTooLarge { m: u32, n: u32 },
    #[error("window radius {n} exceeds the supported bound {bound}")]
    RadiusTooLarge { n: u32, bound: u32 },
}

/// Largest window radius the tiling search supports.
pub const MAX_TILING_RADIUS: u32 = 1 << 20;

/// Number of sites of the radius-`n` window: `n^d` one-sided, `(2n-1)^d`
/// two-sided.
pub fn window_size(spec: LatticeSpec, n: u32) -> Result<u64, LatticeError> {
    if n == 0 {
        return Err(LatticeError::ZeroRadius);
    }
    spec.kind
        .side(n)
        .checked_pow(u32::from(spec.d))
        .ok_or(LatticeError::WindowTooLarge { n, d: spec.d })
}

/// Internal: window size treating radius 0 as the empty window.
fn window_size_or_zero(spec: LatticeSpec, n: u64) -> Option<u64> {
    if n == 0 {
        return Some(0);
    }
    let side = match spec.kind {
        LatticeKind::OneSided => n,
        LatticeKind::TwoSided => 2 * n - 1,
    };
    side.checked_pow(u32::from(spec.d))
}

/// Appends all sites of Chebyshev shell `t` in lexicographic order.
fn push_shell(spec: LatticeSpec, t: i64, out: &mut Vec<Site>) {
    let d = usize::from(spec.d);
    let lo = match spec.kind {
        LatticeKind::OneSided => 0,
        LatticeKind::TwoSided => -t,
    };
    let hi = t;
    let mut cur = vec![0i64; d];

    // Depth-first product of axis ranges; `must_hit` tracks whether the shell
    // constraint max |c_i| = t is still unmet. Once only one axis is left and
    // the constraint is unmet, solely the extreme coordinates can complete a
    // shell site, so the interior of the range is skipped; this keeps the
    // enumeration cost proportional to the number of emitted sites.
    fn rec(
        depth: usize,
        must_hit: bool,
        lo: i64,
        hi: i64,
        t: i64,
        cur: &mut Vec<i64>,
        out: &mut Vec<Site>,
    ) {
        if depth == cur.len() {
            debug_assert!(!must_hit);
            out.push(Site::new(cur.clone()));
            return;
        }
        if must_hit && depth + 1 == cur.len() {
            if lo == -t && t > 0 {
                cur[depth] = -t;
                rec(depth + 1, false, lo, hi, t, cur, out);
            }
            cur[depth] = hi;
            rec(depth + 1, false, lo, hi, t, cur, out);
            return;
        }
        for c in lo..=hi {
            cur[depth] = c;
            rec(depth + 1, must_hit && c.abs() < t, lo, hi, t, cur, out);
        }
    }
    rec(0, true, lo, hi, t, &mut cur, out);
}

/// All sites of the radius-`n` window in scan order (shells from the origin
/// outward, lexicographic inside each shell).
pub fn scan_order(spec: LatticeSpec, n: u32) -> Result<Vec<Site>, LatticeError> {
    let size = window_size(spec, n)?;
    let size = usize::try_from(size).map_err(|_| LatticeError::WindowTooLarge { n, d: spec.d })?;
    let mut out = Vec::with_capacity(size);
    for t in 0..i64::from(n) {
        push_shell(spec, t, &mut out);
    }
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

/// Counts sites of the radius-`r` window that precede `site` lexicographically
/// (`r = 0` means the empty window). Mixed-radix positional count with an
/// early exit once the fixed prefix leaves the window's axis range.
fn count_lex_smaller_in_window(spec: LatticeSpec, r: u64, site: &Site) -> u64 {
    if r == 0 {
        return 0;
    }
    let (lo, hi) = match spec.kind {
        LatticeKind::OneSided => (0i64, r as i64 - 1),
        LatticeKind::TwoSided => (-(r as i64 - 1), r as i64 - 1),
    };
    let side = (hi - lo + 1) as u64;
    let d = site.coords.len();
    let mut total = 0u64;
    for (i, &c) in site.coords.iter().enumerate() {
        let below = if c <= lo {
            0
        } else if c > hi {
            side
        } else {
            (c - lo) as u64
        };
        total += below * side.pow((d - 1 - i) as u32);
        if c < lo || c > hi {
            // No window site shares this prefix; counting stops here.
            break;
        }
    }
    total
}

/// Position of `site` in the scan order of any window containing it. The
/// value depends only on the site (prefix property of the scan).
pub fn scan_index(spec: LatticeSpec, site: &Site) -> Result<u64, LatticeError> {
    if !spec.contains(site) {
        return Err(LatticeError::SiteOutsideLattice {
            site: site.to_string(),
            kind: spec.kind,
            d: spec.d,
        });
    }
    let t = spec.shell(site);
    // Sites of shells < t fill positions 0..|window_t|; within shell t the
    // site's rank is its lexicographic rank among window_{t+1} sites minus the
    // window_t sites, all of which precede or interleave lexicographically.
    let inner = window_size_or_zero(spec, t).ok_or(LatticeError::WindowTooLarge {
        n: u32::MAX,
        d: spec.d,
    })?;
    let before_outer = count_lex_smaller_in_window(spec, t + 1, site);
    let before_inner = count_lex_smaller_in_window(spec, t, site);
    Ok(inner + (before_outer - before_inner))
}

/// Inverse of [`scan_index`]: the site at `index` in the scan order of the
/// radius-`n` window.
pub fn scan_site(spec: LatticeSpec, n: u32, index: u64) -> Result<Site, LatticeError> {
    let total = window_size(spec, n)?;
    if index >= total {
        return Err(LatticeError::IndexOutOfRange { index, n });
    }
    // Locate the shell: smallest t with |window_{t+1}| > index.
    let mut t = 0u64;
    loop {
        let outer = window_size_or_zero(spec, t + 1).expect("inside checked window");
        if outer > index {
            break;
        }
        t += 1;
    }
    let inner = window_size_or_zero(spec, t).expect("inside checked window");
    let mut rank = index - inner;
    // Walk the shell in lexicographic order until `rank` sites have passed.
    let mut shell = Vec::new();
    push_shell(spec, t as i64, &mut shell);
    debug_assert!((rank as usize) < shell.len());
    let site = shell.swap_remove(rank as usize);
    rank = 0;
    let _ = rank;
    Ok(site)
}

/// A tiling of the radius-`n` window by disjoint translates of the radius-`m`
/// window, with translate origins on the scaled grid of a radius-`k` window.
#[derive(Clone, Debug)]
pub struct Tiling {
    pub spec: LatticeSpec,
    /// Outer window radius.
    pub n: u32,
    /// Block window radius.
    pub m: u32,
    /// Grid radius: origins are `L_m * g` for `g` in the radius-`k` window.
    pub k: u32,
    /// Side length of one block (`m` one-sided, `2m-1` two-sided).
    pub block_side: u64,
    /// Block origins in scan order of their grid sites.
    pub block_origins: Vec<Site>,
    /// Window sites not covered by any block, in scan order.
    pub boundary_sites: Vec<Site>,
}

impl Tiling {
    /// Sites covered by the blocks.
    pub fn interior_size(&self) -> u64 {
        self.block_origins.len() as u64 * self.block_size()
    }

    /// Sites in one block.
    pub fn block_size(&self) -> u64 {
        window_size(self.spec, self.m).expect("validated at construction")
    }

    /// Number of blocks.
    pub fn block_count(&self) -> u64 {
        self.block_origins.len() as u64
    }
}

/// Extent covered by `k` aligned blocks from the origin outward: the largest
/// window radius fully covered by the radius-`k` grid of blocks. Requires
/// `m >= 1` and `k >= 1`.
pub fn covered_radius(kind: LatticeKind, m: u64, k: u64) -> u64 {
    match kind {
        LatticeKind::OneSided => m * k,
        LatticeKind::TwoSided => (2 * m - 1) * (k - 1) + m,
    }
}

/// Builds the maximal strict tiling of the radius-`n` window by radius-`m`
/// blocks: the unique grid radius `k` is chosen so the covered region is a
/// proper subset of the window but grows no further.
pub fn make_tiling(spec: LatticeSpec, n: u32, m: u32) -> Result<Tiling, LatticeError> {
    if m == 0 {
        return Err(LatticeError::ZeroRadius);
    }
    if m >= n {
        return Err(LatticeError::BlockTooLarge { m, n });
    }
    if n > MAX_TILING_RADIUS {
        return Err(LatticeError::RadiusTooLarge {
            n,
            bound: MAX_TILING_RADIUS,
        });
    }
    window_size(spec, n)?; // reject windows over 2^64 sites early
    let m64 = u64::from(m);
    let n64 = u64::from(n);
    // Smallest k with covered_radius(k+1) >= n; then covered_radius(k) < n.
    let mut k = 1u64;
    while covered_radius(spec.kind, m64, k + 1) < n64 {
        k += 1;
    }
    debug_assert!(covered_radius(spec.kind, m64, k) < n64);
    debug_assert!(covered_radius(spec.kind, m64, k + 1) >= n64);
    let k = u32::try_from(k).expect("k < n <= 2^20");

    let block_side = spec.kind.side(m) as i64;
    let grid = scan_order(spec, k)?;
    let block_origins: Vec<Site> = grid.iter().map(|g| g.scaled(block_side)).collect();

    // A site s is covered iff for every axis the block-grid coordinate
    // g_i = floor((s_i + m - 1) / side) (two-sided) or floor(s_i / m)
    // (one-sided) lies in the radius-k window.
    let covered = |site: &Site| -> bool {
        site.coords.iter().all(|&c| {
            let g = match spec.kind {
                LatticeKind::OneSided => c.div_euclid(block_side),
                LatticeKind::TwoSided => (c + i64::from(m) - 1).div_euclid(block_side),
            };
            match spec.kind {
                LatticeKind::OneSided => g < i64::from(k),
                LatticeKind::TwoSided => g.abs() < i64::from(k),
            }
        })
    };

    let boundary_sites: Vec<Site> = scan_order(spec, n)?
        .into_iter()
        .filter(|s| !covered(s))
        .collect();

    let tiling = Tiling {
        spec,
        n,
        m,
        k,
        block_side: block_side as u64,
        block_origins,
        boundary_sites,
    };
    debug_assert_eq!(
        tiling.interior_size() + tiling.boundary_sites.len() as u64,
        window_size(spec, n)?
    );
    Ok(tiling)
}
