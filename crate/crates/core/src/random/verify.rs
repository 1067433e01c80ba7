use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::combinations::{binomial, Combinations};
use super::Budget;
use crate::bits::Bits;
use crate::error::{capacity, param, Result};
use crate::graph::{left_set, ExtractorGraph, PrefixView};
use crate::prng;
use crate::rational::{serde_opt_str, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    ExtractorExact,
    ExtractorSampled,
    Degree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: ReportKind,
    pub k: u32,
    #[serde(default, with = "serde_opt_str", skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    #[serde(default, with = "serde_opt_str", skip_serializing_if = "Option::is_none")]
    pub worst_deviation: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_b: Option<Vec<Bits>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_a: Option<Vec<Bits>>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets_checked: Option<u64>,
    /// Sampled checks are evidence, not proof.
    #[serde(default)]
    pub evidence_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<BTreeMap<u64, u64>>,
}

impl VerifyReport {
    fn blank(kind: ReportKind, k: u32) -> Self {
        VerifyReport {
            kind,
            k,
            epsilon: None,
            worst_deviation: None,
            witness_b: None,
            witness_a: None,
            pass: false,
            trials: None,
            subsets_checked: None,
            evidence_only: false,
            required_degree: None,
            min_degree: None,
            histogram: None,
        }
    }
}

/// Scratch space for repeated deviation computations on one view.
struct Scratch {
    counts: Vec<u64>,
    touched: Vec<u64>,
}

impl Scratch {
    fn new(view: &PrefixView<'_>) -> Self {
        Scratch { counts: vec![0; 1usize << view.right_bits()], touched: Vec::new() }
    }

    /// Numerator of the statistical distance over the common denominator
    /// `|B| D |R|`: `sum_z max(0, c_z |R| - |B| D)`.
    fn numerator(&mut self, view: &PrefixView<'_>, b: &[u64]) -> u128 {
        view.accumulate(b, &mut self.counts, &mut self.touched);
        let total = (b.len() as u128) * u128::from(view.graph().degree());
        let r = view.right_size();
        let mut num = 0u128;
        for &z in &self.touched {
            let mass = u128::from(self.counts[z as usize]) * r;
            if mass > total {
                num += mass - total;
            }
        }
        num
    }

    /// Over-weighted right nodes of the last call to `numerator`.
    fn heavy_side(&self, view: &PrefixView<'_>, b_len: usize) -> Vec<Bits> {
        let total = (b_len as u128) * u128::from(view.graph().degree());
        let r = view.right_size();
        let mut a: Vec<u64> =
            self.touched.iter().copied().filter(|&z| u128::from(self.counts[z as usize]) * r > total).collect();
        a.sort_unstable();
        a.into_iter().map(|z| Bits::truncating(z, view.right_bits())).collect()
    }

    fn reset(&mut self) {
        for &z in &self.touched {
            self.counts[z as usize] = 0;
        }
        self.touched.clear();
    }
}

fn denominator(view: &PrefixView<'_>, b_len: usize) -> i128 {
    (b_len as u128 * u128::from(view.graph().degree()) * view.right_size()) as i128
}

/// `max_A | |E_k(B, A)| / (|B| D) - |A| / |R_k| |`, computed as half the L1
/// distance between the endpoint distribution of edges leaving `B` and the
/// uniform distribution on `R_k`. The maximising `A` is the set of
/// over-weighted right nodes (or its complement).
pub fn stat_distance(view: &PrefixView<'_>, b: &[Bits]) -> Result<Rational> {
    if b.is_empty() {
        return Err(param("statistical distance needs a non-empty left set"));
    }
    view.check_right_capacity(crate::graph::MAX_RIGHT_BITS)?;
    let raw = left_set(view.graph(), b)?;
    let mut scratch = Scratch::new(view);
    let num = scratch.numerator(view, &raw);
    Ok(Rational::new(num as i128, denominator(view, raw.len())))
}

const SUBSET_CHUNK: u128 = 2048;

/// Every `B` of size exactly `2^k`; larger sets are convex combinations of
/// these, so their deviation cannot be larger.
pub fn verify_extractor_exact(graph: &ExtractorGraph, k: u32, epsilon: Rational, budget: &Budget) -> Result<VerifyReport> {
    let view = graph.prefix_view(k)?;
    view.check_right_capacity(budget.max_right_bits)?;
    graph.check_scan()?;
    let left = 1u64 << graph.n();
    let size = 1usize << k;
    let total = binomial(u128::from(left), size as u128).filter(|c| *c <= budget.max_subsets).ok_or_else(|| {
        capacity(format!("C(2^{}, 2^{k}) subsets exceed the budget of {}", graph.n(), budget.max_subsets))
    })?;

    let chunks = total.div_ceil(SUBSET_CHUNK) as usize;
    let per_chunk = budget.exec.map(chunks, |c| {
        let start = c as u128 * SUBSET_CHUNK;
        let len = SUBSET_CHUNK.min(total - start);
        let mut scratch = Scratch::new(&view);
        let mut best: Option<(u128, Vec<u64>)> = None;
        for subset in Combinations::from_rank(left, size, start).take(len as usize) {
            let num = scratch.numerator(&view, &subset);
            scratch.reset();
            if best.as_ref().is_none_or(|(b, _)| num > *b) {
                best = Some((num, subset));
            }
        }
        best
    });
    // Strict improvement keeps the lowest-rank witness.
    let (num, witness) = per_chunk
        .into_iter()
        .flatten()
        .fold(None::<(u128, Vec<u64>)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .expect("at least one subset");

    let worst = Rational::new(num as i128, denominator(&view, size));
    let pass = worst <= epsilon;
    let mut report = VerifyReport::blank(ReportKind::ExtractorExact, k);
    report.epsilon = Some(epsilon);
    report.worst_deviation = Some(worst);
    report.pass = pass;
    report.subsets_checked = Some(total as u64);
    if !pass {
        let mut scratch = Scratch::new(&view);
        scratch.numerator(&view, &witness);
        report.witness_a = Some(scratch.heavy_side(&view, size));
        report.witness_b = Some(witness.iter().map(|x| Bits::truncating(*x, graph.n())).collect());
    }
    Ok(report)
}

/// `trials` uniformly random `B` of size `2^k`; trial `i` draws from a
/// ChaCha8 stream seeded with `substream(seed, i)`.
pub fn verify_extractor_sampled(
    graph: &ExtractorGraph,
    k: u32,
    epsilon: Rational,
    trials: u64,
    seed: u64,
    budget: &Budget,
) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(param("sampled verification needs at least one trial"));
    }
    let view = graph.prefix_view(k)?;
    view.check_right_capacity(budget.max_right_bits)?;
    graph.check_scan()?;
    let left = 1usize << graph.n();
    let size = 1usize << k;

    let results = budget.exec.map(trials as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(prng::substream(seed, i as u64));
        let mut b: Vec<u64> = rand::seq::index::sample(&mut rng, left, size).into_iter().map(|x| x as u64).collect();
        b.sort_unstable();
        let mut scratch = Scratch::new(&view);
        (scratch.numerator(&view, &b), b)
    });
    let (num, witness) = results
        .into_iter()
        .fold(None::<(u128, Vec<u64>)>, |acc, cur| match acc {
            Some(a) if a.0 >= cur.0 => Some(a),
            _ => Some(cur),
        })
        .expect("trials > 0");

    let worst = Rational::new(num as i128, denominator(&view, size));
    let mut report = VerifyReport::blank(ReportKind::ExtractorSampled, k);
    report.epsilon = Some(epsilon);
    report.worst_deviation = Some(worst);
    report.pass = worst <= epsilon;
    report.trials = Some(trials);
    report.evidence_only = true;
    if !report.pass {
        let mut scratch = Scratch::new(&view);
        scratch.numerator(&view, &witness);
        report.witness_a = Some(scratch.heavy_side(&view, size));
        report.witness_b = Some(witness.iter().map(|x| Bits::truncating(*x, graph.n())).collect());
    }
    Ok(report)
}

/// Every right node of `G_{n,t}` with non-zero degree has degree `>= Δ`.
pub fn verify_min_degree(graph: &ExtractorGraph, t: u32, delta: u64, budget: &Budget) -> Result<VerifyReport> {
    let view = graph.prefix_view(t)?;
    view.check_right_capacity(budget.max_right_bits)?;
    let histogram = view.degree_histogram()?;
    let min = histogram.keys().copied().find(|d| *d > 0).unwrap_or(0);
    let mut report = VerifyReport::blank(ReportKind::Degree, t);
    report.pass = min >= delta;
    report.required_degree = Some(delta);
    report.min_degree = Some(min);
    report.histogram = Some(histogram);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::sample_table;

    fn all_left(n: u32) -> Vec<Bits> {
        (0..1u64 << n).map(|x| Bits::truncating(x, n)).collect()
    }

    #[test]
    fn point_mass_against_two_nodes() {
        // Constant graph, m = 2, a = 2, k = 3 gives one output bit.
        let g = ExtractorGraph::constant(4, 3, 2).unwrap();
        let v = g.prefix_view(3).unwrap();
        assert_eq!(v.right_bits(), 1);
        assert_eq!(stat_distance(&v, &all_left(4)).unwrap(), Rational::new(1, 2));
    }

    #[test]
    fn identity_is_uniform() {
        let g = ExtractorGraph::identity(4, 3).unwrap();
        let v = g.prefix_view(4).unwrap();
        assert_eq!(stat_distance(&v, &all_left(4)).unwrap(), Rational::from_integer(0));
        let r = verify_extractor_exact(&g, 4, Rational::from_integer(0), &Budget::default()).unwrap();
        assert!(r.pass);
        // Below k = n only a graph spreading every left node evenly is exact.
        let g = ExtractorGraph::xor(4).unwrap();
        for k in 1..=4 {
            let r = verify_extractor_exact(&g, k, Rational::from_integer(0), &Budget::default()).unwrap();
            assert!(r.pass, "k = {k}");
            assert!(r.witness_b.is_none());
        }
    }

    #[test]
    fn full_set_is_single_check() {
        let g = sample_table(4, 3, 4, 11).unwrap();
        let r = verify_extractor_exact(&g, 4, Rational::new(1, 2), &Budget::default()).unwrap();
        assert_eq!(r.subsets_checked, Some(1));
        let v = g.prefix_view(4).unwrap();
        assert_eq!(r.worst_deviation.unwrap(), stat_distance(&v, &all_left(4)).unwrap());
        let s = verify_extractor_sampled(&g, 4, Rational::new(1, 2), 1, 5, &Budget::default()).unwrap();
        assert_eq!(s.worst_deviation, r.worst_deviation);
        assert!(s.evidence_only);
    }

    #[test]
    fn failing_report_carries_consistent_witness() {
        let g = ExtractorGraph::constant(4, 3, 4).unwrap();
        let r = verify_extractor_exact(&g, 2, Rational::new(1, 4), &Budget::default()).unwrap();
        assert!(!r.pass);
        let b = r.witness_b.clone().unwrap();
        let v = g.prefix_view(2).unwrap();
        assert_eq!(stat_distance(&v, &b).unwrap(), r.worst_deviation.unwrap());
        assert_eq!(r.witness_a.unwrap(), vec![Bits::zeros(2)]);
    }

    #[test]
    fn budget_is_enforced() {
        let g = sample_table(5, 2, 5, 1).unwrap();
        let tight = Budget { max_subsets: 100, ..Budget::default() };
        assert!(matches!(
            verify_extractor_exact(&g, 3, Rational::new(1, 2), &tight),
            Err(crate::Error::Capacity(_))
        ));
    }

    #[test]
    fn min_degree_checks() {
        let c = ExtractorGraph::constant(4, 3, 4).unwrap();
        let r = verify_min_degree(&c, 3, 128, &Budget::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.min_degree, Some(128));
        let id = ExtractorGraph::identity(4, 3).unwrap();
        assert!(verify_min_degree(&id, 4, 8, &Budget::default()).unwrap().pass);
        assert!(!verify_min_degree(&id, 4, 9, &Budget::default()).unwrap().pass);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = sample_table(4, 3, 4, 99).unwrap();
        let seq = Budget::default().with_exec(crate::Exec::Sequential);
        let par = Budget::default().with_exec(crate::Exec::Parallel);
        for k in 1..=4 {
            let eps = Rational::new(1, 8);
            assert_eq!(verify_extractor_exact(&g, k, eps, &seq).unwrap(), verify_extractor_exact(&g, k, eps, &par).unwrap());
            assert_eq!(
                verify_extractor_sampled(&g, k, eps, 50, 3, &seq).unwrap(),
                verify_extractor_sampled(&g, k, eps, 50, 3, &par).unwrap()
            );
        }
    }
}
