//! Enumerative coding and entropy estimation on `Z^d` / `Z_+^d` shift spaces.
//!
//! The crate is organized bottom-up:
//!
//! * [`codes`] — MSB-first bit streams, the string/integer bijections, the
//!   `1^l 0 x` self-delimiting bar code, and the natural-number code built from
//!   both (plus its exact Kraft sum).
//! * [`lattice`] — hypercubic windows, the shell-then-lexicographic scan
//!   bijection between window sites and `0..|window|`, and block tilings of a
//!   window by translates of a smaller window.
//! * [`pattern`] — finite symbol patterns on windows plus a binary container
//!   format for storing them.
//! * [`codec`] — the enumerative compressor: block census (`x`), multiset rank
//!   (`y`), boundary bijection value (`z`), with exact-arithmetic encode/decode
//!   and per-field length accounting.
//! * [`entropy`] — plug-in block entropy, code-rate density, analytic
//!   information density, and an exhaustive code-length census.
//! * [`measures`] — seeded exact samplers for Bernoulli product measures and
//!   one-dimensional Markov measures, with analytic entropy rates.
//! * [`pressure`] — local potentials, empirical pressure estimates from coded
//!   samples, and the exact nearest-neighbour transfer-matrix solution.

pub mod codec;
pub mod codes;
pub mod entropy;
pub mod lattice;
pub mod measures;
pub mod pattern;
pub mod pressure;
