//! Light/heavy classification of right nodes, `δ`-bad left nodes, and the
//! two-step list `f(x)`: take the `D` neighbours `p` of `x` in `G_{n,t}`,
//! then the first `Δ` left neighbours `A_p` of each.
//!
//! `A_p` is taken once per edge, so a neighbour reached along several
//! labels contributes its block several times. Element `i` of the list is
//! element `i mod Δ` of the block of edge label `i / Δ`.
//!
//! Left neighbours of `p` are canonical per backend:
//!
//! - linear: the preimages of `p` under the same edge label `y`, in the
//!   index order of the affine solution space;
//! - table: every edge `(x', y')` landing on `p`, ordered by `x'` then `y'`,
//!   with multiplicity.
//!
//! Blocks with fewer than `Δ` neighbours are padded by repeating the
//! neighbour list cyclically; the list is then flagged.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bits::Bits;
use crate::error::{param, Error, Result};
use crate::graph::{left_set, BackendKind, BalanceParams, ExtractorGraph, PrefixView};
use crate::linear::preimage_space;
use crate::par::Exec;
use crate::rational::{serde_str, Rational, Surd};

fn as_rational(v: u128) -> Result<Rational> {
    i128::try_from(v).map(Rational::from_integer).map_err(|_| param(format!("{v} does not fit in the rational type")))
}

/// `(1/ε) |B| D / |R|`.
pub fn light_threshold(epsilon: Rational, b_size: u128, degree: u64, r_size: u128) -> Result<Rational> {
    if epsilon <= Rational::zero() || b_size == 0 || degree == 0 || r_size == 0 {
        return Err(param("light threshold needs positive arguments"));
    }
    Ok(as_rational(b_size)? * as_rational(u128::from(degree))? / as_rational(r_size)? / epsilon)
}

/// For `|B|` with `S = floor(log2 |B|)` and `|R| = 2^{S-a}`, whether the light
/// threshold is at most `δ Δ`.
pub fn threshold_within_light_bound(params: &BalanceParams, b_size: u128, degree: u64, a: i64) -> Result<bool> {
    if b_size == 0 {
        return Err(param("|B| must be positive"));
    }
    let s = i64::from(127 - b_size.leading_zeros());
    let exp = s - a;
    let numerator = as_rational(b_size)? * as_rational(u128::from(degree))? / params.epsilon();
    let threshold = if exp >= 0 {
        numerator / as_rational(1u128 << exp)?
    } else {
        numerator * as_rational(1u128 << (-exp))?
    };
    Ok(params.s().ge(&threshold))
}

/// Heavy nodes of `view` with respect to `b`: `B`-restricted degree above
/// the light threshold.
pub fn classify_heavy(view: &PrefixView<'_>, b: &[Bits], epsilon: Rational) -> Result<BTreeSet<Bits>> {
    let degrees = view.restricted_degrees(b)?;
    if b.is_empty() {
        return Ok(BTreeSet::new());
    }
    let threshold = light_threshold(epsilon, b.len() as u128, view.graph().degree(), view.right_size())?;
    let heavy: BTreeSet<Bits> = degrees
        .into_iter()
        .filter(|(_, deg)| Rational::from_integer(i128::from(*deg)) > threshold)
        .map(|(z, _)| z)
        .collect();
    if as_rational(heavy.len() as u128)? > epsilon * as_rational(view.right_size())? {
        return Err(Error::Invariant(format!("{} heavy nodes exceed epsilon |R|", heavy.len())));
    }
    Ok(heavy)
}

fn heavy_edges(view: &PrefixView<'_>, x: u64, heavy: &HashSet<u64>) -> u64 {
    (0..view.graph().degree()).filter(|&y| heavy.contains(&view.ext_raw(x, y))).count() as u64
}

/// At least `δ D` of the edges of `x` land on heavy nodes, i.e.
/// `count^2 >= ε D^2`.
fn is_bad(count: u64, degree: u64, epsilon: Rational) -> bool {
    let c = Rational::from_integer(i128::from(count));
    let d = Rational::from_integer(i128::from(degree));
    c * c >= epsilon * d * d
}

/// `δ`-bad members of `b`, `δ = ε^{1/2}`.
pub fn bad_set(view: &PrefixView<'_>, b: &[Bits], epsilon: Rational) -> Result<BTreeSet<Bits>> {
    let heavy = classify_heavy(view, b, epsilon)?;
    let raw: HashSet<u64> = heavy.iter().map(|z| z.value()).collect();
    let degree = view.graph().degree();
    Ok(b.iter().copied().filter(|x| is_bad(heavy_edges(view, x.value(), &raw), degree, epsilon)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongestionReport {
    pub b_size: u64,
    /// `floor(log2 |B|)`, also the prefix view the classification runs in.
    pub s: u32,
    #[serde(with = "serde_str")]
    pub threshold: Rational,
    pub heavy_count: u64,
    pub heavy_set: Vec<Bits>,
    pub bad_set: Vec<Bits>,
    #[serde(with = "serde_str")]
    pub bad_fraction: Rational,
    /// `2 δ`.
    pub bound: Surd,
    /// `bad_fraction <= 2 δ`.
    pub pass: bool,
}

/// Classification of `b` in `G_{n,S}` with `S = floor(log2 |B|)`, which
/// must satisfy `S <= t`.
pub fn congestion(graph: &ExtractorGraph, params: &BalanceParams, b: &[Bits]) -> Result<CongestionReport> {
    params.check_graph(graph)?;
    if b.is_empty() {
        return Err(param("B must be non-empty"));
    }
    left_set(graph, b)?;
    let s = 63 - (b.len() as u64).leading_zeros();
    if s > params.t() {
        return Err(param(format!("S = {s} exceeds t = {}", params.t())));
    }
    if s == 0 {
        return Err(param("|B| >= 2 is needed for a prefix view at S"));
    }
    let view = graph.prefix_view(s)?;
    let eps = params.epsilon();
    let heavy = classify_heavy(&view, b, eps)?;
    let bad = bad_set(&view, b, eps)?;
    let bad_fraction = Rational::new(bad.len() as i128, b.len() as i128);
    let bound = params.delta().scale(Rational::from_integer(2))?;
    Ok(CongestionReport {
        b_size: b.len() as u64,
        s,
        threshold: light_threshold(eps, b.len() as u128, graph.degree(), view.right_size())?,
        heavy_count: heavy.len() as u64,
        heavy_set: heavy.into_iter().collect(),
        bad_set: bad.into_iter().collect(),
        bad_fraction,
        bound,
        pass: bound.ge(&bad_fraction),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub y: Bits,
    pub p: Bits,
    /// Left neighbours available before padding.
    pub available: u64,
    pub padded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmplifiedList {
    pub x: Bits,
    pub t: u32,
    pub big_delta: u64,
    /// `D Δ` strings; block `y` occupies `y Δ .. (y + 1) Δ`.
    pub elements: Vec<Bits>,
    pub segments: Vec<Segment>,
    pub padded: bool,
}

impl AmplifiedList {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Block contributed by edge label `y`.
    pub fn block(&self, y: u64) -> &[Bits] {
        let d = self.big_delta as usize;
        &self.elements[y as usize * d..(y as usize + 1) * d]
    }
}

/// Table-backend scan: for each target in `targets`, the first `limit`
/// edges landing on it in row-major order, plus the total count.
fn scan_left(view: &PrefixView<'_>, targets: &HashSet<u64>, limit: u64) -> HashMap<u64, (Vec<u64>, u64)> {
    let graph = view.graph();
    let mut found: HashMap<u64, (Vec<u64>, u64)> = targets.iter().map(|&p| (p, (Vec::new(), 0))).collect();
    for x in 0..1u64 << graph.n() {
        for y in 0..graph.degree() {
            if let Some((list, count)) = found.get_mut(&view.ext_raw(x, y)) {
                if (list.len() as u64) < limit {
                    list.push(x);
                }
                *count += 1;
            }
        }
    }
    found
}

fn cyclic(list: &[u64], j: u64) -> u64 {
    list[(j % list.len() as u64) as usize]
}

fn check_list_params<'g>(graph: &'g ExtractorGraph, params: &BalanceParams, x: Bits) -> Result<PrefixView<'g>> {
    params.check_graph(graph)?;
    x.expect_len(graph.n())?;
    if params.list_size(graph.degree()) > usize::MAX as u128 {
        return Err(param("list size does not fit in memory"));
    }
    graph.prefix_view(params.t())
}

/// Preimage block of `p` along `y` for the linear backend; never empty,
/// since `x` itself is a preimage.
fn linear_block(graph: &ExtractorGraph, p: Bits, y: Bits, t: u32, big_delta: u64) -> Result<(Vec<Bits>, u64)> {
    let space = preimage_space(graph, p, y, t)?
        .ok_or_else(|| Error::Invariant(format!("neighbour {p} has no preimage along {y}")))?;
    let available = u64::try_from(space.size()).unwrap_or(u64::MAX);
    let block = (0..big_delta).map(|j| space.element(j % available.max(1)).expect("index below size")).collect();
    Ok((block, available))
}

/// `f(x)` with the default execution policy.
pub fn amplify(graph: &ExtractorGraph, params: &BalanceParams, x: Bits) -> Result<AmplifiedList> {
    amplify_with(graph, params, x, Exec::default())
}

/// `f(x)`; linear graphs are processed in parallel over edge labels.
pub fn amplify_with(graph: &ExtractorGraph, params: &BalanceParams, x: Bits, exec: Exec) -> Result<AmplifiedList> {
    let view = check_list_params(graph, params, x)?;
    let big_delta = params.Delta();
    let t = params.t();
    let degree = graph.degree();
    let d = graph.d();
    let mt = view.right_bits();
    let neighbours: Vec<u64> = (0..degree).map(|y| view.ext_raw(x.value(), y)).collect();

    let mut elements = Vec::with_capacity(params.list_size(degree) as usize);
    let mut segments = Vec::with_capacity(degree as usize);
    match graph.kind() {
        BackendKind::Linear => {
            let blocks = exec.map(degree as usize, |y| {
                let p = Bits::truncating(neighbours[y], mt);
                linear_block(graph, p, Bits::truncating(y as u64, d), t, big_delta)
            });
            for (y, block) in blocks.into_iter().enumerate() {
                let (block, available) = block?;
                segments.push(Segment {
                    y: Bits::truncating(y as u64, d),
                    p: Bits::truncating(neighbours[y], mt),
                    available,
                    padded: available < big_delta,
                });
                elements.extend(block);
            }
        }
        BackendKind::Table => {
            graph.check_scan()?;
            let targets: HashSet<u64> = neighbours.iter().copied().collect();
            let found = scan_left(&view, &targets, big_delta);
            for (y, &p) in neighbours.iter().enumerate() {
                let (list, count) = &found[&p];
                segments.push(Segment {
                    y: Bits::truncating(y as u64, d),
                    p: Bits::truncating(p, mt),
                    available: *count,
                    padded: *count < big_delta,
                });
                elements.extend((0..big_delta).map(|j| Bits::truncating(cyclic(list, j), graph.n())));
            }
        }
    }
    let padded = segments.iter().any(|s| s.padded);
    Ok(AmplifiedList { x, t, big_delta, elements, segments, padded })
}

/// Element `i` of `f(x)` without building the list.
pub fn list_element(graph: &ExtractorGraph, params: &BalanceParams, x: Bits, i: u64) -> Result<Bits> {
    let view = check_list_params(graph, params, x)?;
    let len = params.list_size(graph.degree());
    if u128::from(i) >= len {
        return Err(Error::Index { index: u128::from(i), len });
    }
    let big_delta = params.Delta();
    let (y, j) = (i / big_delta, i % big_delta);
    let p = view.ext_raw(x.value(), y);
    match graph.kind() {
        BackendKind::Linear => {
            let space = preimage_space(graph, Bits::truncating(p, view.right_bits()), Bits::truncating(y, graph.d()), params.t())?
                .ok_or_else(|| Error::Invariant("neighbour without preimage".into()))?;
            let available = u64::try_from(space.size()).unwrap_or(u64::MAX);
            space.element(j % available)
        }
        BackendKind::Table => {
            graph.check_scan()?;
            let found = scan_left(&view, &HashSet::from([p]), big_delta);
            Ok(Bits::truncating(cyclic(&found[&p].0, j), graph.n()))
        }
    }
}

/// Fraction of the list, with multiplicity, outside `b`.
pub fn survival_fraction(list: &AmplifiedList, b: &[Bits]) -> Rational {
    if list.is_empty() {
        return Rational::one();
    }
    let members: HashSet<Bits> = b.iter().copied().collect();
    let outside = list.elements.iter().filter(|e| !members.contains(e)).count();
    Rational::new(outside as i128, list.len() as i128)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ListHeader {
    pub n: u32,
    #[serde(rename = "D")]
    pub degree: u64,
    #[serde(rename = "Delta")]
    pub big_delta: u64,
    pub t: u32,
    pub x: String,
    pub graph_digest: String,
    pub padded: bool,
}

/// One JSON header line, then one hex string per element.
pub fn write_list<W: Write>(out: &mut W, graph: &ExtractorGraph, list: &AmplifiedList, graph_digest: &str) -> Result<()> {
    let header = ListHeader {
        n: graph.n(),
        degree: graph.degree(),
        big_delta: list.big_delta,
        t: list.t,
        x: list.x.to_hex(),
        graph_digest: graph_digest.to_string(),
        padded: list.padded,
    };
    serde_json::to_writer(&mut *out, &header)?;
    writeln!(out)?;
    for e in &list.elements {
        writeln!(out, "{}", e.to_hex())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::sample_table;

    fn r(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    fn bits(n: u32, xs: &[u64]) -> Vec<Bits> {
        xs.iter().map(|&x| Bits::truncating(x, n)).collect()
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(light_threshold(r(1, 16), 8, 4, 256).unwrap(), Rational::from_integer(2));
        assert_eq!(light_threshold(r(1, 1), 64, 5, 64).unwrap(), Rational::from_integer(5));
        assert!(light_threshold(r(1, 2), 0, 4, 4).is_err());
    }

    #[test]
    fn transformation_delta_meets_bound_chain() {
        let eps = r(1, 16);
        let delta = BalanceParams::transformation_delta(eps, 8, 2).unwrap().exact().unwrap();
        let params = BalanceParams::new(eps, delta.to_integer() as u64, 4).unwrap();
        for b in 1..200u128 {
            assert!(threshold_within_light_bound(&params, b, 8, 2).unwrap(), "|B| = {b}");
        }
        let short = BalanceParams::new(eps, delta.to_integer() as u64 / 2, 4).unwrap();
        assert!(!threshold_within_light_bound(&short, 255, 8, 2).unwrap());
    }

    #[test]
    fn empty_b_has_no_heavy_or_bad_nodes() {
        let g = sample_table(4, 3, 4, 1).unwrap();
        let view = g.prefix_view(2).unwrap();
        assert!(classify_heavy(&view, &[], r(1, 2)).unwrap().is_empty());
        assert!(bad_set(&view, &[], r(1, 2)).unwrap().is_empty());
    }

    #[test]
    fn constant_graph_everything_bad() {
        let g = ExtractorGraph::constant(4, 3, 4).unwrap();
        let view = g.prefix_view(2).unwrap();
        let b = bits(4, &[1, 2, 3, 4]);
        let heavy = classify_heavy(&view, &b, r(1, 2)).unwrap();
        assert_eq!(heavy.into_iter().collect::<Vec<_>>(), vec![Bits::zeros(2)]);
        assert_eq!(bad_set(&view, &b, r(1, 2)).unwrap().len(), 4);
    }

    #[test]
    fn congestion_guards() {
        let g = sample_table(4, 3, 4, 3).unwrap();
        let params = BalanceParams::new(r(1, 2), 2, 2).unwrap();
        assert!(congestion(&g, &params, &bits(4, &[0, 1, 2, 3, 4, 5, 6, 7])).is_err());
        assert!(congestion(&g, &params, &[]).is_err());
        let report = congestion(&g, &params, &bits(4, &[0, 1, 2, 3])).unwrap();
        assert_eq!(report.s, 2);
        assert_eq!(report.bad_fraction, r(report.bad_set.len() as i128, 4));
    }

    #[test]
    fn table_list_shape_and_agreement() {
        let g = sample_table(4, 3, 4, 11).unwrap();
        let params = BalanceParams::new(r(1, 2), 4, 3).unwrap();
        let x = Bits::truncating(5, 4);
        let list = amplify(&g, &params, x).unwrap();
        assert_eq!(list.len(), 32);
        for i in 0..32 {
            assert_eq!(list_element(&g, &params, x, i).unwrap(), list.elements[i as usize]);
        }
        assert!(list_element(&g, &params, x, 32).is_err());
        let view = g.prefix_view(3).unwrap();
        for (y, seg) in list.segments.iter().enumerate() {
            for e in list.block(y as u64) {
                let hits = (0..8).any(|y2| view.ext_raw(e.value(), y2) == seg.p.value());
                assert!(hits);
            }
        }
    }

    #[test]
    fn padding_is_cyclic_and_flagged() {
        let g = ExtractorGraph::identity(4, 1).unwrap();
        let params = BalanceParams::new(r(1, 2), 5, 4).unwrap();
        let list = amplify(&g, &params, Bits::truncating(9, 4)).unwrap();
        assert!(list.padded);
        assert_eq!(list.block(0), &[Bits::truncating(9, 4); 5]);
    }

    #[test]
    fn survival_extremes() {
        let g = sample_table(4, 3, 4, 2).unwrap();
        let params = BalanceParams::new(r(1, 2), 2, 3).unwrap();
        let list = amplify(&g, &params, Bits::zeros(4)).unwrap();
        assert_eq!(survival_fraction(&list, &[]), Rational::one());
        assert_eq!(survival_fraction(&list, &list.elements.clone()), Rational::zero());
    }

    #[test]
    fn list_export_format() {
        let g = sample_table(4, 3, 4, 2).unwrap();
        let params = BalanceParams::new(r(1, 2), 2, 3).unwrap();
        let list = amplify(&g, &params, Bits::zeros(4)).unwrap();
        let mut out = Vec::new();
        write_list(&mut out, &g, &list, "abc").unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(header["D"], 8);
        assert_eq!(header["Delta"], 2);
        assert_eq!(lines.count(), 16);
    }
}
