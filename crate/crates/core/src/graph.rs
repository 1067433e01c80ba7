//! Bipartite extractor graphs viewed as total functions
//! `EXT : {0,1}^n x {0,1}^d -> {0,1}^m`, together with their prefix views
//! `G_{n,k}` (right labels cut to `k - a` bits, `a = n - m`).
//!
//! Edges are never materialised: the multiplicity of an edge `(x, z)` is the
//! number of labels `y` with `EXT(x, y) = z`. Multisets of neighbours are
//! returned in increasing order of the edge label.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::bits::{mask, Bits, MAX_BITS};
use crate::error::{capacity, param, shape, Result};
use crate::linear::{LinearFamily, SeedExpansion};
use crate::rational::{format_rational, Rational, Surd};

mod format;

pub use format::{BGEX_MAGIC, BGEX_VERSION};

/// Largest `n + d` for explicit tables.
pub const MAX_TABLE_BITS: u32 = 26;
/// Largest `m` stored in an explicit table.
pub const MAX_TABLE_OUTPUT_BITS: u32 = 32;
/// Largest `k - a` for which the right side is enumerated exhaustively.
pub const MAX_RIGHT_BITS: u32 = 28;
/// Largest `n + d` for full edge scans.
pub const MAX_SCAN_BITS: u32 = 32;

#[derive(Clone, Debug)]
pub(crate) enum Backend {
    Table(Vec<u32>),
    Linear(LinearFamily),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Table,
    Linear,
}

#[derive(Clone, Debug)]
pub struct ExtractorGraph {
    n: u32,
    d: u32,
    m: u32,
    a: i64,
    backend: Backend,
}

fn check_dims(n: u32, d: u32, m: u32) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(param(format!("n must be in 1..={MAX_BITS}, got {n}")));
    }
    if d >= 64 {
        return Err(param(format!("d must be below 64, got {d}")));
    }
    if m == 0 || m > MAX_BITS {
        return Err(param(format!("m must be in 1..={MAX_BITS}, got {m}")));
    }
    Ok(())
}

impl ExtractorGraph {
    /// Explicit table indexed `x * 2^d + y`.
    pub fn from_table(n: u32, d: u32, m: u32, table: Vec<u32>) -> Result<Self> {
        check_dims(n, d, m)?;
        if n + d > MAX_TABLE_BITS {
            return Err(capacity(format!("table with n + d = {} exceeds {MAX_TABLE_BITS}", n + d)));
        }
        if m > MAX_TABLE_OUTPUT_BITS {
            return Err(capacity(format!("table outputs limited to {MAX_TABLE_OUTPUT_BITS} bits")));
        }
        if table.len() as u64 != 1u64 << (n + d) {
            return Err(shape(format!("table needs 2^{} entries, got {}", n + d, table.len())));
        }
        if let Some(v) = table.iter().find(|v| u64::from(**v) & !mask(m) != 0) {
            return Err(shape(format!("table entry {v:#x} wider than {m} bits")));
        }
        Ok(ExtractorGraph { n, d, m, a: i64::from(n) - i64::from(m), backend: Backend::Table(table) })
    }

    pub fn from_fn(n: u32, d: u32, m: u32, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        check_dims(n, d, m)?;
        if n + d > MAX_TABLE_BITS {
            return Err(capacity(format!("table with n + d = {} exceeds {MAX_TABLE_BITS}", n + d)));
        }
        let deg = 1u64 << d;
        let table = (0..1u64 << (n + d)).map(|i| (f(i >> d, i & (deg - 1)) & mask(m)) as u32).collect();
        Self::from_table(n, d, m, table)
    }

    /// `EXT(x, y) = 0^m`.
    pub fn constant(n: u32, d: u32, m: u32) -> Result<Self> {
        Self::from_fn(n, d, m, |_, _| 0)
    }

    /// `EXT(x, y) = x`, so `m = n`.
    pub fn identity(n: u32, d: u32) -> Result<Self> {
        Self::from_fn(n, d, n, |x, _| x)
    }

    /// `EXT(x, y) = x XOR y` with `d = m = n`: every left node has exactly
    /// one edge to each right node.
    pub fn xor(n: u32) -> Result<Self> {
        Self::from_fn(n, n, n, |x, y| x ^ y)
    }

    pub fn linear(n: u32, d: u32, expansion: SeedExpansion) -> Result<Self> {
        let m = expansion.m();
        check_dims(n, d, m)?;
        let family = LinearFamily::new(n, d, expansion)?;
        Ok(ExtractorGraph { n, d, m, a: i64::from(n) - i64::from(m), backend: Backend::Linear(family) })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `n - m`; may be negative.
    pub fn a(&self) -> i64 {
        self.a
    }

    /// Left degree `D = 2^d`.
    pub fn degree(&self) -> u64 {
        1u64 << self.d
    }

    pub fn left_size(&self) -> u128 {
        1u128 << self.n
    }

    pub fn kind(&self) -> BackendKind {
        match self.backend {
            Backend::Table(_) => BackendKind::Table,
            Backend::Linear(_) => BackendKind::Linear,
        }
    }

    pub fn table(&self) -> Option<&[u32]> {
        match &self.backend {
            Backend::Table(t) => Some(t),
            Backend::Linear(_) => None,
        }
    }

    pub fn linear_family(&self) -> Option<&LinearFamily> {
        match &self.backend {
            Backend::Linear(f) => Some(f),
            Backend::Table(_) => None,
        }
    }

    /// `EXT(x, y)` on raw words; `x < 2^n`, `y < 2^d`.
    #[inline]
    pub fn ext_raw(&self, x: u64, y: u64) -> u64 {
        match &self.backend {
            Backend::Table(t) => u64::from(t[((x << self.d) | y) as usize]),
            Backend::Linear(f) => f.matrix(y).mul_raw(x),
        }
    }

    pub fn ext_eval(&self, x: Bits, y: Bits) -> Result<Bits> {
        x.expect_len(self.n)?;
        y.expect_len(self.d)?;
        Ok(Bits::truncating(self.ext_raw(x.value(), y.value()), self.m))
    }

    /// `k - a`, the right label length of `G_{n,k}`.
    pub fn right_bits_at(&self, k: u32) -> i64 {
        i64::from(k) - self.a
    }

    pub fn prefix_view(&self, k: u32) -> Result<PrefixView<'_>> {
        if k == 0 || k > self.n {
            return Err(param(format!("k must be in 1..={}, got {k}", self.n)));
        }
        let bits = self.right_bits_at(k);
        if bits < 1 {
            return Err(param(format!("k - a = {bits} must be at least 1 (k = {k}, a = {})", self.a)));
        }
        Ok(PrefixView { graph: self, k, bits: bits as u32 })
    }

    /// Smallest `k` admitting a prefix view.
    pub fn min_view_k(&self) -> u32 {
        (self.a + 1).max(1) as u32
    }

    /// Dump to an explicit table (any backend).
    pub fn to_table(&self) -> Result<Self> {
        if self.m > MAX_TABLE_OUTPUT_BITS {
            return Err(capacity("outputs too wide for a table"));
        }
        Self::from_fn(self.n, self.d, self.m, |x, y| self.ext_raw(x, y))
    }

    pub(crate) fn check_scan(&self) -> Result<()> {
        if self.n + self.d > MAX_SCAN_BITS {
            return Err(capacity(format!("edge scan over 2^{} edges exceeds 2^{MAX_SCAN_BITS}", self.n + self.d)));
        }
        Ok(())
    }
}

/// `G_{n,k}`: the parent graph with right labels cut to their first `k - a`
/// bits.
#[derive(Clone, Copy, Debug)]
pub struct PrefixView<'g> {
    graph: &'g ExtractorGraph,
    k: u32,
    bits: u32,
}

impl<'g> PrefixView<'g> {
    pub fn graph(&self) -> &'g ExtractorGraph {
        self.graph
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `m_k = k - a`.
    pub fn right_bits(&self) -> u32 {
        self.bits
    }

    /// `|R_k| = 2^{k-a}`.
    pub fn right_size(&self) -> u128 {
        1u128 << self.bits
    }

    #[inline]
    pub fn ext_raw(&self, x: u64, y: u64) -> u64 {
        self.graph.ext_raw(x, y) & mask(self.bits)
    }

    pub fn ext_eval(&self, x: Bits, y: Bits) -> Result<Bits> {
        self.graph.ext_eval(x, y)?.prefix(self.bits)
    }

    /// The `D` right neighbours of `x`, in increasing order of edge label.
    pub fn neighbors(&self, x: Bits) -> Result<Vec<Bits>> {
        x.expect_len(self.graph.n)?;
        Ok((0..self.graph.degree()).map(|y| Bits::truncating(self.ext_raw(x.value(), y), self.bits)).collect())
    }

    /// Neighbours of `x` with their multiplicities.
    pub fn neighbor_multiset(&self, x: Bits) -> Result<BTreeMap<Bits, u64>> {
        let mut out = BTreeMap::new();
        for z in self.neighbors(x)? {
            *out.entry(z).or_insert(0) += 1;
        }
        Ok(out)
    }

    /// Number of edges `(x, y)` landing on `z`.
    pub fn right_degree(&self, z: Bits) -> Result<u64> {
        z.expect_len(self.bits)?;
        self.graph.check_scan()?;
        let deg = self.graph.degree();
        let mut count = 0;
        for x in 0..1u64 << self.graph.n {
            for y in 0..deg {
                if self.ext_raw(x, y) == z.value() {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    pub(crate) fn check_right_capacity(&self, max_right_bits: u32) -> Result<()> {
        if self.bits > max_right_bits.min(MAX_RIGHT_BITS) {
            return Err(capacity(format!(
                "right side of 2^{} nodes exceeds the enumeration bound 2^{}",
                self.bits,
                max_right_bits.min(MAX_RIGHT_BITS)
            )));
        }
        Ok(())
    }

    /// Degree of every right node, indexed by label.
    pub fn right_degrees(&self) -> Result<Vec<u64>> {
        self.check_right_capacity(MAX_RIGHT_BITS)?;
        self.graph.check_scan()?;
        let mut degrees = vec![0u64; 1usize << self.bits];
        let deg = self.graph.degree();
        for x in 0..1u64 << self.graph.n {
            for y in 0..deg {
                degrees[self.ext_raw(x, y) as usize] += 1;
            }
        }
        Ok(degrees)
    }

    /// Right degree -> number of right nodes with that degree (zero included).
    pub fn degree_histogram(&self) -> Result<BTreeMap<u64, u64>> {
        let mut hist = BTreeMap::new();
        for d in self.right_degrees()? {
            *hist.entry(d).or_insert(0) += 1;
        }
        Ok(hist)
    }

    /// Minimum degree over right nodes that receive at least one edge.
    pub fn min_nonzero_right_degree(&self) -> Result<u64> {
        Ok(self.right_degrees()?.into_iter().filter(|d| *d > 0).min().unwrap_or(0))
    }

    /// Adds the `B`-restricted degree of every right node into `counts` and
    /// returns the labels touched for the first time.
    pub(crate) fn accumulate(&self, b: &[u64], counts: &mut [u64], touched: &mut Vec<u64>) {
        let deg = self.graph.degree();
        for &x in b {
            for y in 0..deg {
                let z = self.ext_raw(x, y);
                let c = &mut counts[z as usize];
                if *c == 0 {
                    touched.push(z);
                }
                *c += 1;
            }
        }
    }

    /// `deg_B(z)` for every right node hit by `B`.
    pub fn restricted_degrees(&self, b: &[Bits]) -> Result<BTreeMap<Bits, u64>> {
        let raw = left_set(self.graph, b)?;
        let deg = self.graph.degree();
        let mut out = BTreeMap::new();
        for x in raw {
            for y in 0..deg {
                *out.entry(Bits::truncating(self.ext_raw(x, y), self.bits)).or_insert(0) += 1;
            }
        }
        Ok(out)
    }
}

/// Validates a left set (length `n`, no repeats) and returns raw labels in
/// the given order.
pub(crate) fn left_set(graph: &ExtractorGraph, b: &[Bits]) -> Result<Vec<u64>> {
    let mut raw = Vec::with_capacity(b.len());
    for x in b {
        x.expect_len(graph.n)?;
        raw.push(x.value());
    }
    let mut sorted = raw.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(shape("left set contains repeated strings"));
    }
    Ok(raw)
}

/// `(ε, Δ, t)` with `δ = ε^{1/2}` kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceParams {
    epsilon: Rational,
    delta: Surd,
    big_delta: u64,
    t: u32,
}

impl BalanceParams {
    pub fn new(epsilon: Rational, big_delta: u64, t: u32) -> Result<Self> {
        if epsilon <= Rational::zero() || epsilon > Rational::one() {
            return Err(param(format!("epsilon must lie in (0, 1], got {}", format_rational(&epsilon))));
        }
        if big_delta == 0 {
            return Err(param("Delta must be positive"));
        }
        if t == 0 {
            return Err(param("t must be at least 1"));
        }
        Ok(BalanceParams { epsilon, delta: Surd::sqrt_of(epsilon)?, big_delta, t })
    }

    /// Checks `t <= n` and `t - a >= 1` against a concrete graph.
    pub fn check_graph(&self, graph: &ExtractorGraph) -> Result<()> {
        if self.t > graph.n() {
            return Err(param(format!("t = {} exceeds n = {}", self.t, graph.n())));
        }
        if graph.right_bits_at(self.t) < 1 {
            return Err(param(format!("t - a must be at least 1 (t = {}, a = {})", self.t, graph.a())));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Rational {
        self.epsilon
    }

    pub fn delta(&self) -> Surd {
        self.delta
    }

    #[allow(non_snake_case)]
    pub fn Delta(&self) -> u64 {
        self.big_delta
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// `s = δ Δ`.
    pub fn s(&self) -> Surd {
        self.delta.scale(Rational::from_integer(i128::from(self.big_delta))).expect("non-negative")
    }

    /// `|f(x)| = D Δ`.
    pub fn list_size(&self, degree: u64) -> u128 {
        u128::from(degree) * u128::from(self.big_delta)
    }

    /// `2 δ^{-3} D 2^a`, the `Δ` that makes every light node hold at most
    /// `δ Δ` strings of `B`.
    pub fn transformation_delta(epsilon: Rational, degree: u64, a: i64) -> Result<Surd> {
        let pow2 = if a >= 0 {
            Rational::from_integer(1i128 << a)
        } else {
            Rational::new(1, 1i128 << (-a))
        };
        let factor = Rational::from_integer(2 * i128::from(degree)) * pow2;
        // δ^{-3} = sqrt(ε^{-3})
        Surd::sqrt_of(Rational::one() / (epsilon * epsilon * epsilon))?.scale(factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        Bits::parse_binary(s).unwrap()
    }

    #[test]
    fn table_lookup() {
        let mut table = vec![0u32; 128];
        table[0] = b("1011").value() as u32;
        let g = ExtractorGraph::from_table(4, 3, 4, table).unwrap();
        assert_eq!(g.ext_eval(b("0000"), b("000")).unwrap(), b("1011"));
        assert!(g.ext_eval(b("000"), b("000")).is_err());
        let view = g.prefix_view(2).unwrap();
        assert_eq!(view.ext_eval(b("0000"), b("000")).unwrap(), b("10"));
        let full = g.prefix_view(4).unwrap();
        assert_eq!(full.ext_eval(b("0000"), b("000")).unwrap(), b("1011"));
    }

    #[test]
    fn view_range_checks() {
        let g = ExtractorGraph::identity(4, 2).unwrap();
        assert!(g.prefix_view(0).is_err());
        assert!(g.prefix_view(5).is_err());
        // m = 2, a = 2: k - a >= 1 needs k >= 3.
        let g = ExtractorGraph::constant(4, 2, 2).unwrap();
        assert!(g.prefix_view(2).is_err());
        assert_eq!(g.min_view_k(), 3);
        assert_eq!(g.prefix_view(3).unwrap().right_bits(), 1);
    }

    #[test]
    fn negative_a_views() {
        // m = 6 > n = 4, a = -2.
        let g = ExtractorGraph::constant(4, 2, 6).unwrap();
        assert_eq!(g.a(), -2);
        assert_eq!(g.min_view_k(), 1);
        assert_eq!(g.prefix_view(1).unwrap().right_bits(), 3);
        assert_eq!(g.prefix_view(4).unwrap().right_bits(), 6);
    }

    #[test]
    fn constant_graph_degrees() {
        let g = ExtractorGraph::constant(4, 3, 4).unwrap();
        let v = g.prefix_view(3).unwrap();
        assert_eq!(v.neighbors(b("0110")).unwrap(), vec![b("000"); 8]);
        assert_eq!(v.right_degree(b("000")).unwrap(), 128);
        assert_eq!(v.right_degree(b("100")).unwrap(), 0);
        assert_eq!(v.min_nonzero_right_degree().unwrap(), 128);
    }

    #[test]
    fn identity_graph_degrees() {
        let g = ExtractorGraph::identity(4, 3).unwrap();
        let v = g.prefix_view(4).unwrap();
        assert!(v.right_degrees().unwrap().iter().all(|d| *d == 8));
        assert_eq!(v.min_nonzero_right_degree().unwrap(), 8);
    }

    #[test]
    fn injective_row_has_distinct_neighbors() {
        let g = ExtractorGraph::from_fn(3, 3, 3, |x, y| x ^ y).unwrap();
        let v = g.prefix_view(3).unwrap();
        let ms = v.neighbor_multiset(b("101")).unwrap();
        assert_eq!(ms.len(), 8);
        assert!(ms.values().all(|c| *c == 1));
    }

    #[test]
    fn balance_params() {
        let p = BalanceParams::new(Rational::new(1, 16), 4, 3).unwrap();
        assert_eq!(p.delta().exact(), Some(Rational::new(1, 4)));
        assert_eq!(p.s().exact(), Some(Rational::from_integer(1)));
        assert_eq!(p.list_size(8), 32);
        assert!(BalanceParams::new(Rational::from_integer(0), 1, 1).is_err());
        assert!(BalanceParams::new(Rational::new(3, 2), 1, 1).is_err());
        assert!(BalanceParams::new(Rational::new(1, 2), 0, 1).is_err());
        let g = ExtractorGraph::constant(4, 2, 2).unwrap();
        assert!(BalanceParams::new(Rational::new(1, 4), 1, 2).unwrap().check_graph(&g).is_err());
        assert!(BalanceParams::new(Rational::new(1, 4), 1, 3).unwrap().check_graph(&g).is_ok());
    }

    #[test]
    fn transformation_delta_formula() {
        // ε = 1/16, δ = 1/4, D = 8, a = 1: 2 * 64 * 8 * 2 = 2048.
        let d = BalanceParams::transformation_delta(Rational::new(1, 16), 8, 1).unwrap();
        assert_eq!(d.exact(), Some(Rational::from_integer(2048)));
        let d = BalanceParams::transformation_delta(Rational::new(1, 16), 8, -1).unwrap();
        assert_eq!(d.exact(), Some(Rational::from_integer(512)));
    }
}
