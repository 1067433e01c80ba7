use serde::Serialize;

use super::verify::{verify_extractor_exact, verify_min_degree, VerifyReport};
use super::{sample_table, Budget};
use crate::error::Result;
use crate::graph::{BalanceParams, ExtractorGraph};
use crate::par::Exec;
use crate::prng;
use crate::rational::{serde_str, Rational};

/// Attempts are verified in fixed-size batches; the lowest successful index
/// in the first batch containing a success wins, so the result does not
/// depend on the worker count.
const ATTEMPT_BATCH: u64 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub epsilon: Rational,
    pub big_delta: u64,
    pub t: u32,
    pub max_attempts: u64,
    pub seed: u64,
}

impl SearchConfig {
    /// Seed of the table sampled at `attempt`.
    pub fn attempt_seed(&self, attempt: u64) -> u64 {
        prng::substream(self.seed, attempt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttemptDiagnostic {
    pub attempt: u64,
    /// Largest worst-case deviation over all prefix views.
    #[serde(with = "serde_str")]
    pub worst_deviation: Rational,
    pub worst_k: u32,
    pub min_degree: u64,
    pub extractor_pass: bool,
    pub degree_pass: bool,
}

#[derive(Clone, Debug)]
pub struct BalancedGraph {
    pub graph: ExtractorGraph,
    pub attempt: u64,
    pub reports: Vec<VerifyReport>,
    pub diagnostics: Vec<AttemptDiagnostic>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchFailure {
    pub attempts: Vec<AttemptDiagnostic>,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<BalancedGraph>),
    Failed(SearchFailure),
}

impl SearchOutcome {
    pub fn found(self) -> Option<BalancedGraph> {
        match self {
            SearchOutcome::Found(b) => Some(*b),
            SearchOutcome::Failed(_) => None,
        }
    }
}

/// Exact extractor check on every admissible prefix view plus the
/// minimum-degree check on `G_{n,t}`. Views with `k - a < 1` have a single
/// right node and are skipped.
pub fn verify_balanced(graph: &ExtractorGraph, params: &BalanceParams, budget: &Budget) -> Result<(bool, Vec<VerifyReport>)> {
    params.check_graph(graph)?;
    let mut reports = Vec::new();
    for k in graph.min_view_k()..=graph.n() {
        reports.push(verify_extractor_exact(graph, k, params.epsilon(), budget)?);
    }
    reports.push(verify_min_degree(graph, params.t(), params.Delta(), budget)?);
    Ok((reports.iter().all(|r| r.pass), reports))
}

fn diagnose(attempt: u64, reports: &[VerifyReport]) -> AttemptDiagnostic {
    let (worst_k, worst_deviation) = reports
        .iter()
        .filter_map(|r| r.worst_deviation.map(|w| (r.k, w)))
        .fold((0, Rational::from_integer(0)), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let degree = reports.last().expect("degree report");
    AttemptDiagnostic {
        attempt,
        worst_deviation,
        worst_k,
        min_degree: degree.min_degree.unwrap_or(0),
        extractor_pass: reports[..reports.len() - 1].iter().all(|r| r.pass),
        degree_pass: degree.pass,
    }
}

/// Rejection sampling over `sample_table(n, d, m, attempt_seed(i))`.
pub fn search_balanced(n: u32, d: u32, m: u32, config: &SearchConfig, budget: &Budget) -> Result<SearchOutcome> {
    search_balanced_with(config, budget, |attempt| sample_table(n, d, m, config.attempt_seed(attempt)))
}

/// Rejection sampling over an arbitrary candidate stream.
pub fn search_balanced_with<F>(config: &SearchConfig, budget: &Budget, candidate: F) -> Result<SearchOutcome>
where
    F: Fn(u64) -> Result<ExtractorGraph> + Sync,
{
    let params = BalanceParams::new(config.epsilon, config.big_delta, config.t)?;
    // Attempts run concurrently; each one verifies sequentially.
    let inner = budget.with_exec(Exec::Sequential);
    let mut diagnostics = Vec::new();
    let mut start = 0u64;
    while start < config.max_attempts {
        let len = ATTEMPT_BATCH.min(config.max_attempts - start);
        let results = budget.exec.map(len as usize, |i| {
            let attempt = start + i as u64;
            let graph = candidate(attempt)?;
            let (ok, reports) = verify_balanced(&graph, &params, &inner)?;
            Ok::<_, crate::Error>((attempt, ok, graph, reports))
        });
        for r in results {
            let (attempt, ok, graph, reports) = r?;
            if ok {
                return Ok(SearchOutcome::Found(Box::new(BalancedGraph { graph, attempt, reports, diagnostics })));
            }
            diagnostics.push(diagnose(attempt, &reports));
        }
        start += len;
    }
    Ok(SearchOutcome::Failed(SearchFailure { attempts: diagnostics }))
}
