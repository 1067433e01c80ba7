//! Linear extractor backend: `EXT(x, y) = A_y x`, where row `i` of `A_y`
//! is `h_i(y) A_{g_i(y)}` and `A_v` is the matrix of Reed-Solomon
//! evaluation at `v` over `GF(2^s)`. Bit `i` of the output is therefore the
//! inner product `<h_i(y), p_x(g_i(y))>`.
//!
//! The pairs `(g_i(y), h_i(y))` come from a [`SeedExpansion`]:
//!
//! - `counter`: for stream `u = substream(seed, y)`, `g_i = word(u, 2i)` and
//!   `h_i = word(u, 2i + 1)`, both masked to `s` bits (`i` counts from 0; see
//!   [`crate::prng`]). No extractor guarantee is claimed for this scheme.
//! - `external`: explicit pairs loaded from a JSON table file
//!   `{"s", "m", "d", "pairs": [[[g, h]; m]; 2^d]}`.
//!
//! Preimages under a fixed edge label are affine spaces, which gives the
//! indexed left-neighbour lists in [`left_neighbors_indexed`].

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, Bits, MAX_BITS};
use crate::error::{param, shape, Error, Result};
use crate::gf2::{row_assemble, solve_affine, AffineSpace, Field2s, Gf2Matrix};
use crate::graph::ExtractorGraph;
use crate::prng;
use crate::rational::{to_f64, Rational};

/// Serialized form of a seed expansion, embedded in `BGEX` linear payloads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum Descriptor {
    Counter { s: u32, m: u32, seed: u64 },
    External { s: u32, m: u32, table: String },
}

impl Descriptor {
    pub fn s(&self) -> u32 {
        match self {
            Descriptor::Counter { s, .. } | Descriptor::External { s, .. } => *s,
        }
    }

    pub fn m(&self) -> u32 {
        match self {
            Descriptor::Counter { m, .. } | Descriptor::External { m, .. } => *m,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ExternalTable {
    s: u32,
    m: u32,
    d: u32,
    pairs: Vec<Vec<(u64, u64)>>,
}

#[derive(Clone, Debug)]
pub struct SeedExpansion {
    descriptor: Descriptor,
    // External pairs, row-major by (y, i).
    table: Option<Arc<Vec<(u64, u64)>>>,
}

impl SeedExpansion {
    pub fn counter(seed: u64, s: u32, m: u32) -> Result<Self> {
        Field2s::new(s)?;
        Ok(SeedExpansion { descriptor: Descriptor::Counter { s, m, seed }, table: None })
    }

    /// Explicit pairs indexed `pairs[y][i]`; `label` is the path recorded in
    /// the descriptor.
    pub fn external(label: impl Into<String>, s: u32, m: u32, pairs: Vec<Vec<(u64, u64)>>) -> Result<Self> {
        let field = Field2s::new(s)?;
        if !pairs.len().is_power_of_two() {
            return Err(shape("external table needs 2^d rows"));
        }
        let mut flat = Vec::with_capacity(pairs.len() * m as usize);
        for row in &pairs {
            if row.len() != m as usize {
                return Err(shape(format!("external row has {} pairs, expected m = {m}", row.len())));
            }
            for &(g, h) in row {
                if g > field.mask() || h > field.mask() {
                    return Err(shape(format!("pair ({g:#x}, {h:#x}) outside GF(2^{s})")));
                }
                flat.push((g, h));
            }
        }
        Ok(SeedExpansion {
            descriptor: Descriptor::External { s, m, table: label.into() },
            table: Some(Arc::new(flat)),
        })
    }

    pub fn load_external(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let table: ExternalTable = serde_json::from_slice(&std::fs::read(path)?)?;
        if table.pairs.len() as u64 != 1u64 << table.d.min(63) {
            return Err(shape(format!("external table declares d = {} but has {} rows", table.d, table.pairs.len())));
        }
        Self::external(path.to_string_lossy(), table.s, table.m, table.pairs)
    }

    pub fn write_external_table(path: impl AsRef<Path>, s: u32, m: u32, pairs: &[Vec<(u64, u64)>]) -> Result<()> {
        let d = pairs.len().trailing_zeros();
        let table = ExternalTable { s, m, d, pairs: pairs.to_vec() };
        std::fs::write(path, serde_json::to_vec(&table)?)?;
        Ok(())
    }

    pub fn from_descriptor(descriptor: Descriptor, d: u32) -> Result<Self> {
        match descriptor {
            Descriptor::Counter { s, m, seed } => Self::counter(seed, s, m),
            Descriptor::External { s, m, table } => {
                let loaded = Self::load_external(&table)?;
                if loaded.s() != s || loaded.m() != m || loaded.table_rows() != Some(1u64 << d) {
                    return Err(Error::Format(format!("external table {table} does not match descriptor")));
                }
                Ok(loaded)
            }
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn s(&self) -> u32 {
        self.descriptor.s()
    }

    pub fn m(&self) -> u32 {
        self.descriptor.m()
    }

    fn table_rows(&self) -> Option<u64> {
        self.table.as_ref().map(|t| (t.len() / self.m() as usize) as u64)
    }

    /// `(g_i(y), h_i(y))` for `i` in `0..m`.
    pub fn pair(&self, y: u64, i: u32) -> (u64, u64) {
        match (&self.descriptor, &self.table) {
            (Descriptor::Counter { s, seed, .. }, _) => {
                let stream = prng::substream(*seed, y);
                let i = u64::from(i);
                (prng::word(stream, 2 * i) & mask(*s), prng::word(stream, 2 * i + 1) & mask(*s))
            }
            (Descriptor::External { m, .. }, Some(t)) => t[(y * u64::from(*m) + u64::from(i)) as usize],
            (Descriptor::External { .. }, None) => unreachable!("external expansion without table"),
        }
    }

    pub fn pairs(&self, y: u64) -> Vec<(u64, u64)> {
        (0..self.m()).map(|i| self.pair(y, i)).collect()
    }
}

/// Seed expansion plus a read-through cache of the matrices `A_y`.
#[derive(Debug)]
pub struct LinearFamily {
    n: u32,
    field: Field2s,
    expansion: SeedExpansion,
    cache: RwLock<HashMap<u64, Arc<Gf2Matrix>>>,
}

impl Clone for LinearFamily {
    fn clone(&self) -> Self {
        LinearFamily {
            n: self.n,
            field: self.field,
            expansion: self.expansion.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl LinearFamily {
    pub(crate) fn new(n: u32, d: u32, expansion: SeedExpansion) -> Result<Self> {
        if n > MAX_BITS {
            return Err(param(format!("linear graphs are limited to n <= {MAX_BITS}")));
        }
        if let Some(rows) = expansion.table_rows() {
            if d >= 64 || rows != 1u64 << d {
                return Err(shape(format!("external table has {rows} rows, graph needs 2^{d}")));
            }
        }
        Ok(LinearFamily { n, field: Field2s::new(expansion.s())?, expansion, cache: RwLock::new(HashMap::new()) })
    }

    pub fn expansion(&self) -> &SeedExpansion {
        &self.expansion
    }

    pub fn field(&self) -> &Field2s {
        &self.field
    }

    /// `A_y`, built on first use. Concurrent first uses may both build the
    /// matrix; the results are identical.
    pub fn matrix(&self, y: u64) -> Arc<Gf2Matrix> {
        if let Some(m) = self.cache.read().expect("cache lock").get(&y) {
            return Arc::clone(m);
        }
        let built = Arc::new(self.build_matrix(y));
        let mut cache = self.cache.write().expect("cache lock");
        Arc::clone(cache.entry(y).or_insert(built))
    }

    /// Builds `A_y` without touching the cache.
    pub fn build_matrix(&self, y: u64) -> Gf2Matrix {
        let pairs = self.expansion.pairs(y);
        row_assemble(&self.field, self.n, &pairs, pairs.len()).expect("pairs validated at construction")
    }
}

/// Edge-label length and output length derived from `(n, ε, c, κ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearDims {
    pub n: u32,
    pub d: u64,
    /// `n - c d`; may be below 1, in which case no graph exists.
    pub m: i64,
    pub c: u32,
    pub kappa: f64,
    /// `log2 Δ` for `Δ = 2 (1/ε)^{3/2} D^{c+1}`.
    pub log2_delta: f64,
    /// `t = n - (log2 Δ - c d)`.
    pub t: f64,
}

/// `d = ceil(κ log2^3(n) log2^2(1/ε))`, `m = n - c d`.
pub fn linear_dims(n: u32, epsilon: Rational, c: u32, kappa: f64) -> Result<LinearDims> {
    if n == 0 {
        return Err(param("n must be positive"));
    }
    let eps = to_f64(&epsilon);
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(param("epsilon must lie in (0, 1]"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(param("kappa must be positive"));
    }
    let log_n = f64::from(n).log2();
    let log_inv_eps = (1.0 / eps).log2();
    let d = (kappa * log_n.powi(3) * log_inv_eps.powi(2) - 1e-9).ceil().max(0.0);
    if d > 1e15 {
        return Err(param(format!("derived d = {d} is out of range")));
    }
    let d = d as u64;
    let m = i64::from(n) - i64::from(c) * d as i64;
    let log2_delta = 1.0 + 1.5 * log_inv_eps + f64::from(c + 1) * d as f64;
    let t = f64::from(n) - (log2_delta - f64::from(c) * d as f64);
    Ok(LinearDims { n, d, m, c, kappa, log2_delta, t })
}

#[derive(Clone, Debug)]
pub enum ExpansionSource {
    Counter { seed: u64 },
    External { table: PathBuf },
}

pub fn build_linear_graph(
    n: u32,
    epsilon: Rational,
    source: &ExpansionSource,
    s: u32,
    c: u32,
    kappa: f64,
) -> Result<ExtractorGraph> {
    let dims = linear_dims(n, epsilon, c, kappa)?;
    if dims.m < 1 {
        return Err(param(format!("m = n - c d = {} - {} * {} = {} is below 1", n, c, dims.d, dims.m)));
    }
    if dims.d >= 64 {
        return Err(param(format!("d = {} exceeds the 63-bit edge-label limit", dims.d)));
    }
    let m = dims.m as u32;
    let expansion = match source {
        ExpansionSource::Counter { seed } => SeedExpansion::counter(*seed, s, m)?,
        ExpansionSource::External { table } => {
            let e = SeedExpansion::load_external(table)?;
            if e.m() != m || e.s() != s {
                return Err(param(format!("external table has (s, m) = ({}, {}), need ({s}, {m})", e.s(), e.m())));
            }
            e
        }
    };
    ExtractorGraph::linear(n, dims.d as u32, expansion)
}

/// Checks `f(0) = 0` and `f(x1 ^ x2) = f(x1) ^ f(x2)`. For `n <= 16` every
/// `x` is also compared with the XOR of `f` over its unit vectors, which
/// decides linearity exactly.
pub fn check_linear_map(n: u32, f: impl Fn(u64) -> u64, trials: u64, seed: u64) -> bool {
    if f(0) != 0 {
        return false;
    }
    if n <= 16 {
        let units: Vec<u64> = (0..n).map(|j| f(1u64 << j)).collect();
        for x in 0..1u64 << n {
            let mut expected = 0;
            let mut bits = x;
            while bits != 0 {
                expected ^= units[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            if f(x) != expected {
                return false;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let x1 = rng.gen::<u64>() & mask(n);
        let x2 = rng.gen::<u64>() & mask(n);
        f(x1 ^ x2) == f(x1) ^ f(x2)
    })
}

pub fn linearity_check(graph: &ExtractorGraph, y: Bits, trials: u64, seed: u64) -> Result<bool> {
    y.expect_len(graph.d())?;
    if graph.linear_family().is_none() {
        return Err(Error::UnsupportedBackend("linearity_check needs a linear backend".into()));
    }
    Ok(check_linear_map(graph.n(), |x| graph.ext_raw(x, y.value()), trials, seed))
}

fn linear_mt(graph: &ExtractorGraph, t: u32) -> Result<(&LinearFamily, u32)> {
    let family = graph
        .linear_family()
        .ok_or_else(|| Error::UnsupportedBackend("preimage lists need a linear backend".into()))?;
    if t == 0 || t > graph.n() {
        return Err(param(format!("t must be in 1..={}", graph.n())));
    }
    let mt = graph.right_bits_at(t);
    if mt < 1 {
        return Err(param(format!("t - a = {mt} must be at least 1")));
    }
    Ok((family, mt as u32))
}

/// `{x : (first m_t rows of A_y) x = z}`.
pub fn preimage_space(graph: &ExtractorGraph, z: Bits, y: Bits, t: u32) -> Result<Option<AffineSpace>> {
    let (family, mt) = linear_mt(graph, t)?;
    z.expect_len(mt)?;
    y.expect_len(graph.d())?;
    let a = family.matrix(y.value()).truncate_rows(mt as usize)?;
    solve_affine(&a, z)
}

/// `Δ` left neighbours of `z` along edge label `y`, indexed lazily.
#[derive(Clone, Debug)]
pub struct PreimageList {
    z: Bits,
    y: Bits,
    space: AffineSpace,
    delta: u64,
}

impl PreimageList {
    pub fn z(&self) -> Bits {
        self.z
    }

    pub fn y(&self) -> Bits {
        self.y
    }

    pub fn space(&self) -> &AffineSpace {
        &self.space
    }

    pub fn len(&self) -> u64 {
        self.delta
    }

    pub fn is_empty(&self) -> bool {
        self.delta == 0
    }

    pub fn get(&self, i: u64) -> Result<Bits> {
        if i >= self.delta {
            return Err(Error::Index { index: u128::from(i), len: u128::from(self.delta) });
        }
        self.space.element(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = Bits> + '_ {
        (0..self.delta).map(|i| self.space.element(i).expect("i < Δ <= 2^dim"))
    }
}

/// The first `Δ` preimages of `z` under edge label `y` in `G_{n,t}`, or
/// `None` (NIL) when fewer than `Δ` exist.
pub fn left_neighbors_indexed(graph: &ExtractorGraph, z: Bits, y: Bits, delta: u64, t: u32) -> Result<Option<PreimageList>> {
    let Some(space) = preimage_space(graph, z, y, t)? else { return Ok(None) };
    if space.size() < u128::from(delta) {
        return Ok(None);
    }
    Ok(Some(PreimageList { z, y, space, delta }))
}

/// Whether every reachable right node of `G_{n,t}` has at least `Δ`
/// preimages under each edge label it is reached by: true iff
/// `Δ <= 2^{n - m_t}`.
///
/// Also spot-checks the rank bound on the first few edge labels; a failed
/// spot check is an internal error.
pub fn delta_guarantee(graph: &ExtractorGraph, t: u32, delta: u64) -> Result<bool> {
    let (family, mt) = linear_mt(graph, t)?;
    let n = graph.n();
    let spare = i64::from(n) - i64::from(mt);
    let holds = spare >= 0 && (spare >= 64 || delta <= 1u64 << spare);

    let probe = mask(n);
    for y in 0..graph.degree().min(8) {
        let a = family.matrix(y).truncate_rows(mt as usize)?;
        let z = Bits::truncating(a.mul_raw(probe), mt);
        let space = solve_affine(&a, z)?
            .ok_or_else(|| Error::Invariant(format!("reachable node without preimage at y = {y}")))?;
        if i64::from(space.dim()) < spare || !space.contains(Bits::truncating(probe, n)) {
            return Err(Error::Invariant(format!("preimage dimension {} below n - m_t = {spare}", space.dim())));
        }
    }
    Ok(holds)
}
