use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use balgraph::bits::mask;
use balgraph::graph::BackendKind;
use balgraph::linear::{build_linear_graph, delta_guarantee, linear_dims, linearity_check, ExpansionSource};
use balgraph::listapprox::{self, amplify as amplify_list, list_element, survival_fraction, write_list};
use balgraph::oracle::{bset, BSet, ComplexityOracle, CompressorOracle, ExplicitOracle, ToyOracle};
use balgraph::random::{
    search_balanced, verify_balanced, verify_extractor_exact, verify_extractor_sampled, verify_min_degree,
    SearchConfig, SearchOutcome, VerifyReport,
};
use balgraph::rational::format_rational;
use balgraph::{prng, BalanceParams, Bits, Error, Exec, ExtractorGraph, Rational};
use serde_json::{json, Value};

use crate::config::{
    LinearConfig, OracleConfig, RunConfig, DEFAULT_C, DEFAULT_KAPPA, DEFAULT_LINEARITY_TRIALS, DEFAULT_MAX_ATTEMPTS,
};
use crate::report::{file_digest, Outcome};
use crate::CliError;

/// Failed searches keep at most this many per-attempt diagnostics.
const MAX_DIAGNOSTICS: usize = 100;
/// Edge labels probed by the linearity check.
const LINEARITY_LABELS: u64 = 8;

fn req<T: Clone>(v: &Option<T>, name: &str) -> Result<T, CliError> {
    RunConfig::require(v, name)
}

/// Input files must exist before any work starts.
pub fn check_inputs(c: &RunConfig) -> Result<(), CliError> {
    let table = c.linear.as_ref().and_then(|l| l.external_table.clone());
    for path in [c.graph.clone(), c.bset.clone(), table].into_iter().flatten() {
        if !path.is_file() {
            return Err(CliError::usage(format!("input file {} not found", path.display())));
        }
    }
    Ok(())
}

fn load_graph(c: &RunConfig) -> Result<(ExtractorGraph, String), CliError> {
    let path = req(&c.graph, "graph")?;
    let graph = ExtractorGraph::read_from(&path)?;
    Ok((graph, file_digest(&path)?))
}

fn parse_x(c: &RunConfig, n: u32) -> Result<Bits, CliError> {
    let hex = req(&c.x, "x")?;
    Bits::parse_hex(&hex, n).map_err(|e| CliError::usage(format!("x: {e}")))
}

fn make_oracle(o: &OracleConfig, exec: Exec) -> Result<Box<dyn ComplexityOracle>, CliError> {
    Ok(match o {
        OracleConfig::Toy { program_cap, step_budget } => Box::new(ToyOracle::with_exec(*program_cap, *step_budget, exec)?),
        OracleConfig::Compressor { max_dict, offset } => {
            Box::new(CompressorOracle::new(*max_dict, *offset)?.with_exec(exec))
        }
        OracleConfig::Explicit { sets, monotone } => {
            let mut map: BTreeMap<(u32, u32), BTreeSet<Bits>> = BTreeMap::new();
            for s in sets {
                let entry = map.entry((s.n, s.k)).or_default();
                for h in &s.members {
                    entry.insert(Bits::parse_hex(h, s.n).map_err(|e| CliError::usage(format!("explicit set: {e}")))?);
                }
            }
            Box::new(ExplicitOracle::new(map, *monotone)?)
        }
    })
}

/// `B` from `--bset`, else from the configured oracle at `(n, k)`.
fn load_b(c: &RunConfig, n: u32) -> Result<BSet, CliError> {
    let set = if let Some(path) = &c.bset {
        BSet::load(path)?
    } else if let Some(o) = &c.oracle {
        let k = req(&c.k, "k")?;
        bset(n, k, make_oracle(o, c.exec())?.as_ref())?
    } else {
        return Err(CliError::usage("no B source: give --bset or an oracle with k"));
    };
    if set.n != n {
        return Err(CliError::usage(format!("B holds {}-bit strings, graph has n = {n}", set.n)));
    }
    Ok(set)
}

pub fn build_random(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let (n, d, m) = (req(&c.n, "n")?, req(&c.d, "d")?, req(&c.m, "m")?);
    let params = c.params()?;
    let out = req(&c.out, "out")?;
    let search = SearchConfig {
        epsilon: params.epsilon(),
        big_delta: params.Delta(),
        t: params.t(),
        max_attempts: *c.max_attempts.get_or_insert(DEFAULT_MAX_ATTEMPTS),
        seed: *c.seed.get_or_insert(0),
    };
    let budget = c.budget();
    match search_balanced(n, d, m, &search, &budget)? {
        SearchOutcome::Found(found) => {
            found.graph.write_to(&out)?;
            let reloaded = ExtractorGraph::read_from(&out)?;
            let (reverified, _) = verify_balanced(&reloaded, &params, &budget)?;
            Ok(Outcome {
                pass: reverified,
                graph_digest: Some(file_digest(&out)?),
                result: json!({
                    "attempt": found.attempt,
                    "attempt_seed": search.attempt_seed(found.attempt),
                    "rejected": found.diagnostics.len(),
                    "reverified": reverified,
                    "reports": found.reports,
                }),
            })
        }
        SearchOutcome::Failed(failure) => {
            let best = failure.attempts.iter().min_by(|a, b| a.worst_deviation.cmp(&b.worst_deviation));
            Ok(Outcome {
                pass: false,
                graph_digest: None,
                result: json!({
                    "found": false,
                    "attempts": failure.attempts.len(),
                    "best": best,
                    "diagnostics": &failure.attempts[..failure.attempts.len().min(MAX_DIAGNOSTICS)],
                }),
            })
        }
    }
}

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Labels `0` and a few pseudorandom ones.
fn probe_labels(d: u32, seed: u64) -> Vec<Bits> {
    let mut ys: Vec<u64> = (0..LINEARITY_LABELS).map(|i| if i == 0 { 0 } else { prng::word(seed, i) & mask(d) }).collect();
    ys.sort_unstable();
    ys.dedup();
    ys.into_iter().map(|y| Bits::truncating(y, d)).collect()
}

fn linearity_results(graph: &ExtractorGraph, trials: u64, seed: u64) -> Result<(bool, Value), CliError> {
    let mut all = true;
    let mut rows = Vec::new();
    for (i, y) in probe_labels(graph.d(), seed).into_iter().enumerate() {
        let ok = linearity_check(graph, y, trials, prng::substream(seed, i as u64))?;
        all &= ok;
        rows.push(json!({"y": y.to_hex(), "pass": ok}));
    }
    Ok((all, Value::Array(rows)))
}

pub fn build_linear(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let n = req(&c.n, "n")?;
    let eps = c.epsilon()?;
    let out = req(&c.out, "out")?;
    let seed = *c.seed.get_or_insert(0);
    let lin = c.linear.get_or_insert_with(LinearConfig::default);
    let s = *lin.s.get_or_insert(ceil_log2(u64::from(n)) + 2);
    let cc = *lin.c.get_or_insert(DEFAULT_C);
    let kappa = *lin.kappa.get_or_insert(DEFAULT_KAPPA);
    let source = match &lin.external_table {
        // The graph file records the table path, so make it independent of the working directory.
        Some(table) => ExpansionSource::External { table: std::fs::canonicalize(table)? },
        None => ExpansionSource::Counter { seed },
    };

    let dims = linear_dims(n, eps, cc, kappa)?;
    if dims.m < 1 {
        return Err(CliError::failure(format!("m = n - c d = {n} - {cc} * {} = {} is below 1", dims.d, dims.m)));
    }
    if dims.d >= 64 {
        return Err(CliError::failure(format!("d = {} exceeds 63", dims.d)));
    }
    let (d, m) = (dims.d as u32, dims.m as u32);
    let a = i64::from(n) - i64::from(m);
    let big_delta = match c.big_delta {
        Some(v) => v,
        None => {
            if dims.log2_delta >= 63.0 {
                return Err(CliError::failure(format!("Delta = 2^{} does not fit in 64 bits", dims.log2_delta)));
            }
            dims.log2_delta.exp2().ceil() as u64
        }
    };
    let t = match c.t {
        Some(v) => v,
        None => {
            let t = i64::from(n) + a - i64::from(ceil_log2(big_delta));
            if t <= a || t > i64::from(n) {
                return Err(CliError::failure(format!("derived t = {t} leaves no right bits (a = {a})")));
            }
            t as u32
        }
    };
    c.d = Some(d);
    c.m = Some(m);
    c.big_delta = Some(big_delta);
    c.t = Some(t);

    let graph = build_linear_graph(n, eps, &source, s, cc, kappa)?;
    let params = BalanceParams::new(eps, big_delta, t)?;
    params.check_graph(&graph)?;
    graph.write_to(&out)?;
    let reloaded = ExtractorGraph::read_from(&out)?;

    let trials = *c.linearity_trials.get_or_insert(DEFAULT_LINEARITY_TRIALS);
    let (linear_ok, linearity) = linearity_results(&reloaded, trials, seed)?;
    let guarantee = delta_guarantee(&reloaded, t, big_delta)?;
    Ok(Outcome {
        pass: linear_ok && guarantee,
        graph_digest: Some(file_digest(&out)?),
        result: json!({
            "derived": {
                "d": d, "m": m, "a": a, "Delta": big_delta, "t": t, "m_t": i64::from(t) - a,
                "s": s, "c": cc, "kappa": kappa, "log2_delta": dims.log2_delta,
            },
            "linearity": linearity,
            "delta_guarantee": guarantee,
        }),
    })
}

pub fn verify(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let (graph, digest) = load_graph(c)?;
    let params = c.params()?;
    params.check_graph(&graph)?;
    let budget = c.budget();
    let k_min = *c.k_min.get_or_insert(graph.min_view_k());
    let k_max = *c.k_max.get_or_insert(graph.n());
    let seed = c.seed.unwrap_or(0);

    let mut reports: Vec<VerifyReport> = Vec::new();
    for k in k_min..=k_max {
        let report = match verify_extractor_exact(&graph, k, params.epsilon(), &budget) {
            Err(Error::Capacity(why)) => match c.sampled_trials {
                Some(trials) => {
                    verify_extractor_sampled(&graph, k, params.epsilon(), trials, prng::substream(seed, u64::from(k)), &budget)?
                }
                None => return Err(CliError { code: 3, message: format!("k = {k}: {why}; no sampled fallback") }),
            },
            other => other?,
        };
        reports.push(report);
    }
    let extractor_ok = reports.iter().all(|r| r.pass);
    let (degree_ok, degree) = match graph.kind() {
        BackendKind::Table => {
            let r = verify_min_degree(&graph, params.t(), params.Delta(), &budget)?;
            (r.pass, json!(r))
        }
        BackendKind::Linear => {
            let trials = *c.linearity_trials.get_or_insert(DEFAULT_LINEARITY_TRIALS);
            let (linear_ok, linearity) = linearity_results(&graph, trials, seed)?;
            let guarantee = delta_guarantee(&graph, params.t(), params.Delta())?;
            (linear_ok && guarantee, json!({"delta_guarantee": guarantee, "linearity": linearity}))
        }
    };
    Ok(Outcome {
        pass: extractor_ok && degree_ok,
        graph_digest: Some(digest),
        result: json!({"extractor": reports, "degree": degree}),
    })
}

pub fn congestion(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let (graph, digest) = load_graph(c)?;
    let params = c.params()?;
    let b = load_b(c, graph.n())?;
    let report = listapprox::congestion(&graph, &params, b.members())?;
    Ok(Outcome {
        pass: report.pass,
        graph_digest: Some(digest),
        result: json!({"b": b.header(), "congestion": report}),
    })
}

pub fn amplify(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let (graph, digest) = load_graph(c)?;
    let params = c.params()?;
    let x = parse_x(c, graph.n())?;
    let mut result = serde_json::Map::new();
    result.insert("x".into(), json!(x.to_hex()));
    result.insert("list_size".into(), json!(params.list_size(graph.degree()) as u64));
    let mut pass = true;

    if let Some(i) = c.index {
        result.insert("index".into(), json!(i));
        result.insert("element".into(), json!(list_element(&graph, &params, x, i)?.to_hex()));
    }
    if c.index.is_none() || c.bset.is_some() {
        let list = amplify_list(&graph, &params, x)?;
        result.insert("padded".into(), json!(list.padded));
        result.insert("padded_segments".into(), json!(list.segments.iter().filter(|s| s.padded).count()));
        if c.index.is_none() {
            let out = req(&c.out, "out")?;
            write_list_file(&out, &graph, &list, &digest)?;
            result.insert("list_file".into(), json!(out));
            result.insert("list_digest".into(), json!(file_digest(&out)?));
        }
        if let Some(path) = &c.bset {
            let b = BSet::load(path)?;
            if b.n != graph.n() {
                return Err(CliError::usage(format!("B holds {}-bit strings, graph has n = {}", b.n, graph.n())));
            }
            let survival = survival_fraction(&list, b.members());
            let two_delta = params.delta().scale(Rational::from_integer(2))?;
            // survival >= 1 - 2δ
            let survives = two_delta.ge(&(Rational::from_integer(1) - survival));
            // The guarantee covers members of B outside the bad set.
            let covered = b.contains(x)
                && listapprox::congestion(&graph, &params, b.members()).is_ok_and(|r| !r.bad_set.contains(&x));
            pass = survives || !covered;
            result.insert("survival_fraction".into(), json!(format_rational(&survival)));
            result.insert("survival_bound".into(), json!(format!("1 - {two_delta}")));
            result.insert("survival_pass".into(), json!(survives));
            result.insert("guarantee_applies".into(), json!(covered));
        }
    }
    Ok(Outcome { pass, graph_digest: Some(digest), result: Value::Object(result) })
}

fn write_list_file(
    out: &PathBuf,
    graph: &ExtractorGraph,
    list: &balgraph::listapprox::AmplifiedList,
    digest: &str,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(out)?);
    write_list(&mut w, graph, list, digest)?;
    w.flush()?;
    Ok(())
}

pub fn make_bset(c: &mut RunConfig) -> Result<Outcome, CliError> {
    let n = req(&c.n, "n")?;
    let k = req(&c.k, "k")?;
    let oracle = req(&c.oracle, "oracle")?;
    let out = req(&c.out, "out")?;
    let set = bset(n, k, make_oracle(&oracle, c.exec())?.as_ref())?;
    set.save(&out)?;
    Ok(Outcome {
        pass: true,
        graph_digest: None,
        result: json!({"header": set.header(), "bset_file": out, "bset_digest": file_digest(&out)?}),
    })
}
