//! Interference graphs, independent-set schedules, and the exact desk-scale
//! oracles built on them.
//!
//! Links are vertices; an edge means the two links cannot transmit in the
//! same slot, so every feasible schedule is an independent set. Everything
//! here is exact brute force over bitmasks, capped at
//! [`DEFAULT_ENUMERATION_CAP`] links.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lp::{self, StandardLp};

/// Hard representation limit: link sets are stored as `u64` bitmasks.
pub const MAX_LINKS: usize = 64;

/// Default cap for operations that enumerate all independent sets.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Conflict graph over `n` links with symmetric pairwise interference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceGraph {
    n: usize,
    adj: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Star,
    Ring,
    Path,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Star => write!(f, "star"),
            GraphKind::Ring => write!(f, "ring"),
            GraphKind::Path => write!(f, "path"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(GraphKind::Star),
            "ring" => Ok(GraphKind::Ring),
            "path" => Ok(GraphKind::Path),
            _ => Err(Error::InvalidConfig(format!("unknown graph kind `{s}`"))),
        }
    }
}

impl InterferenceGraph {
    /// Builds a graph from undirected edge pairs. Edges are normalized,
    /// deduplicated, and validated against self-loops and out-of-range ids.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_LINKS {
            return Err(Error::GraphSize {
                kind: "graph",
                size: n,
                reason: "link count must be in 1..=64",
            });
        }
        let mut adj = vec![0u64; n];
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidEdge(a, b, "self-loop"));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidEdge(a, b, "link id out of range"));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if adj[i] & (1 << j) == 0 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
                normalized.push((i, j));
            }
        }
        normalized.sort_unstable();
        Ok(InterferenceGraph {
            n,
            adj,
            edges: normalized,
        })
    }

    /// Builds one of the named topologies used throughout the experiments.
    pub fn build_named(kind: GraphKind, size: usize) -> Result<Self> {
        match kind {
            GraphKind::Star => Self::star(size),
            GraphKind::Ring => Self::ring(size),
            GraphKind::Path => Self::path(size),
        }
    }

    /// Star: link 0 conflicts with every other link.
    pub fn star(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::GraphSize {
                kind: "star",
                size,
                reason: "needs at least 1 link",
            });
        }
        Self::new(size, (1..size).map(|i| (0, i)))
    }

    /// Cycle 0-1-...-(k-1)-0.
    pub fn ring(size: usize) -> Result<Self> {
        if size < 3 {
            return Err(Error::GraphSize {
                kind: "ring",
                size,
                reason: "needs at least 3 links",
            });
        }
        Self::new(size, (0..size).map(|i| (i, (i + 1) % size)))
    }

    /// Chain 0-1-...-(k-1).
    pub fn path(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::GraphSize {
                kind: "path",
                size,
                reason: "needs at least 1 link",
            });
        }
        Self::new(size, (1..size).map(|i| (i - 1, i)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Normalized `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors_mask(&self, link: usize) -> u64 {
        self.adj[link]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a] & (1 << b) != 0
    }

    pub fn is_independent_mask(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[i] & mask != 0 {
                return false;
            }
        }
        true
    }

    /// True iff no edge has both endpoints set. Entries are treated as
    /// booleans (nonzero means the link is in the set).
    pub fn is_independent(&self, bits: &[u8]) -> Result<bool> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: bits.len(),
            });
        }
        Ok(self.is_independent_mask(bits_to_mask(bits)))
    }

    /// First conflicting edge inside `mask`, if any.
    fn first_conflict(&self, mask: u64) -> Option<(usize, usize)> {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let hits = self.adj[i] & mask;
            if hits != 0 {
                return Some((i, hits.trailing_zeros() as usize));
            }
        }
        None
    }

    /// Parses the plain-text graph format: first significant line is the
    /// link count, each following line one `i j` edge pair, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            if n.is_none() {
                n = Some(line.parse().map_err(|_| Error::ParseGraph {
                    line: lineno,
                    reason: format!("expected link count, got `{line}`"),
                })?);
                continue;
            }
            let mut toks = line.split_whitespace();
            let (a, b) = match (toks.next(), toks.next(), toks.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::ParseGraph {
                        line: lineno,
                        reason: format!("expected `i j` edge pair, got `{line}`"),
                    })
                }
            };
            let parse = |tok: &str| {
                tok.parse::<usize>().map_err(|_| Error::ParseGraph {
                    line: lineno,
                    reason: format!("bad link id `{tok}`"),
                })
            };
            edges.push((parse(a)?, parse(b)?));
        }
        let n = n.ok_or(Error::ParseGraph {
            line: 0,
            reason: "empty graph file".into(),
        })?;
        Self::new(n, edges)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    fn check_enum_cap(&self, cap: usize) -> Result<()> {
        if self.n > cap {
            return Err(Error::EnumerationCap { n: self.n, cap });
        }
        Ok(())
    }
}

/// A feasible transmission pattern: an independent set of links, stored as
/// a bitmask. Construction enforces independence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Schedule {
    mask: u64,
    n: usize,
}

impl Schedule {
    pub fn empty(n: usize) -> Schedule {
        assert!(n >= 1 && n <= MAX_LINKS);
        Schedule { mask: 0, n }
    }

    pub fn from_mask(g: &InterferenceGraph, mask: u64) -> Result<Schedule> {
        if g.n < MAX_LINKS && mask >> g.n != 0 {
            return Err(Error::LengthMismatch {
                expected: g.n,
                got: 64 - mask.leading_zeros() as usize,
            });
        }
        if let Some((i, j)) = g.first_conflict(mask) {
            return Err(Error::NotIndependent(i, j));
        }
        Ok(Schedule { mask, n: g.n })
    }

    pub fn from_bits(g: &InterferenceGraph, bits: &[u8]) -> Result<Schedule> {
        if bits.len() != g.n {
            return Err(Error::LengthMismatch {
                expected: g.n,
                got: bits.len(),
            });
        }
        Self::from_mask(g, bits_to_mask(bits))
    }

    /// Single-link schedule; always independent since there are no self-loops.
    pub fn singleton(g: &InterferenceGraph, link: usize) -> Schedule {
        assert!(link < g.n);
        Schedule {
            mask: 1 << link,
            n: g.n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn contains(&self, link: usize) -> bool {
        self.mask & (1 << link) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Number of transmitting links.
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn links(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }

    /// `w^T sigma`.
    pub fn weight(&self, weights: &[f64]) -> f64 {
        assert_eq!(weights.len(), self.n);
        self.links().map(|i| weights[i]).sum()
    }

    /// 0/1 column vector of length `n`.
    pub fn dense_column(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if self.contains(i) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Key under which bit vectors compare lexicographically when read from
    /// index 0, i.e. index 0 is the most significant position.
    pub fn lex_key(&self) -> u64 {
        self.mask.reverse_bits() >> (MAX_LINKS - self.n)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.n)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

pub fn bits_to_mask(bits: &[u8]) -> u64 {
    let mut mask = 0u64;
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            mask |= 1 << i;
        }
    }
    mask
}

/// Parses a `0`/`1` string written with link 0 first.
pub fn bitstring_to_mask(s: &str) -> Result<(u64, usize)> {
    let mut mask = 0u64;
    let mut n = 0usize;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => mask |= 1 << i,
            _ => {
                return Err(Error::ParseTrace(format!(
                    "bad bitstring character `{ch}` in `{s}`"
                )))
            }
        }
        n += 1;
    }
    if n == 0 || n > MAX_LINKS {
        return Err(Error::ParseTrace(format!("bitstring `{s}` has bad length")));
    }
    Ok((mask, n))
}

/// Complete family of independent sets, in ascending bitmask order (the
/// empty schedule first). Uses the default enumeration cap.
pub fn enumerate_independent_sets(g: &InterferenceGraph) -> Result<Vec<Schedule>> {
    enumerate_independent_sets_capped(g, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_independent_sets_capped(
    g: &InterferenceGraph,
    cap: usize,
) -> Result<Vec<Schedule>> {
    g.check_enum_cap(cap.min(MAX_LINKS - 1))?;
    let mut sets = Vec::new();
    for mask in 0..(1u64 << g.n) {
        if g.is_independent_mask(mask) {
            sets.push(Schedule { mask, n: g.n });
        }
    }
    Ok(sets)
}

/// Exact max-weight independent set by exhaustive scan. Ties are broken
/// toward the lexicographically largest bit vector read from index 0, so
/// results are reproducible. Weights may be negative; the empty set (weight
/// zero) is always a candidate.
pub fn max_weight_independent_set(g: &InterferenceGraph, weights: &[f64]) -> Result<Schedule> {
    if weights.len() != g.n {
        return Err(Error::LengthMismatch {
            expected: g.n,
            got: weights.len(),
        });
    }
    g.check_enum_cap(DEFAULT_ENUMERATION_CAP)?;
    let mut best = Schedule::empty(g.n);
    let mut best_weight = 0.0f64;
    let mut best_key = best.lex_key();
    for mask in 1..(1u64 << g.n) {
        if !g.is_independent_mask(mask) {
            continue;
        }
        let cand = Schedule { mask, n: g.n };
        let w = cand.weight(weights);
        let key = cand.lex_key();
        if w > best_weight || (w == best_weight && key > best_key) {
            best = cand;
            best_weight = w;
            best_key = key;
        }
    }
    Ok(best)
}

/// Largest `u` such that the uniform rate vector `u * 1` lies in the convex
/// hull of the independent sets, from a direct LP over the enumerated family.
pub fn max_uniform_rate(g: &InterferenceGraph) -> Result<f64> {
    let sets = enumerate_independent_sets(g)?;
    let n = g.n;
    let m = sets.len();
    // Columns: one per independent set (the empty set acts as idle slack),
    // then u. Rows: per-link rate balance, then total time budget.
    let cols = m + 1;
    let rows = n + 1;
    let mut a = vec![0.0; rows * cols];
    for (j, s) in sets.iter().enumerate() {
        for i in s.links() {
            a[i * cols + j] = 1.0;
        }
        a[n * cols + j] = 1.0;
    }
    for i in 0..n {
        a[i * cols + m] = -1.0;
    }
    let mut b = vec![0.0; rows];
    b[n] = 1.0;
    let mut c = vec![0.0; cols];
    c[m] = 1.0;
    let sol = lp::solve_max(&StandardLp {
        rows,
        cols,
        a,
        b,
        c,
    })?;
    Ok(sol.objective)
}
