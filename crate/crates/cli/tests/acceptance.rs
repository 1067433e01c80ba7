//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use balgraph::linear::{delta_guarantee, left_neighbors_indexed, SeedExpansion};
use balgraph::listapprox::{amplify, congestion, list_element, survival_fraction, AmplifiedList};
use balgraph::oracle::{enumerate_programs, ToyOracle};
use balgraph::random::{
    newman_shepp_bound, sample_table, simulate_coupon_collector, stat_distance, verify_extractor_exact,
    verify_min_degree, Budget, Combinations,
};
use balgraph::{prng, BalanceParams, Bits, Exec, ExtractorGraph, Rational};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn cli(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_balgraph")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn r(p: i128, q: i128) -> Rational {
    Rational::new(p, q)
}

const SMALL: &str = r#"{"n":4,"d":3,"m":4,"epsilon":"1/2","Delta":2,"t":3,"seed":7}"#;

fn small_params() -> BalanceParams {
    BalanceParams::new(r(1, 2), 2, 3).unwrap()
}

fn left(n: u32) -> Vec<Bits> {
    (0..1u64 << n).map(|x| Bits::truncating(x, n)).collect()
}

fn criterion_1(dir: &Path) -> Check {
    let start = Instant::now();
    std::fs::write(dir.join("r.json"), SMALL).unwrap();
    let (code, stdout) = cli(dir, &["build-random", "--config", "r.json", "--out", "g.bgex"]);
    ensure(code == 0, || format!("build-random exited {code}"))?;
    let report: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
    let attempt = report["result"]["attempt"].as_u64().unwrap();
    ensure(attempt < 100_000, || format!("attempt {attempt}"))?;

    let g = ExtractorGraph::read_from(dir.join("g.bgex")).map_err(|e| e.to_string())?;
    let budget = Budget::default();
    for k in 1..=4 {
        let rep = verify_extractor_exact(&g, k, r(1, 2), &budget).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("reloaded graph fails at k = {k}"))?;
    }
    let deg = verify_min_degree(&g, 3, 2, &budget).map_err(|e| e.to_string())?;
    ensure(deg.pass, || "reloaded graph fails the degree check".into())?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("attempt {attempt}, {:?}", start.elapsed()))
}

fn all_b(size: usize) -> impl Iterator<Item = Vec<Bits>> {
    Combinations::new(16, size).map(|c| c.into_iter().map(|x| Bits::truncating(x, 4)).collect())
}

fn criterion_2(dir: &Path) -> Check {
    let start = Instant::now();
    let g = ExtractorGraph::read_from(dir.join("g.bgex")).map_err(|e| e.to_string())?;
    let params = small_params();
    let mut sets = 0;
    for b in all_b(4) {
        let rep = congestion(&g, &params, &b).map_err(|e| e.to_string())?;
        // |bad| <= 2 δ |B|  <=>  |bad|^2 <= 4 ε |B|^2
        let bad = rep.bad_set.len() as i128;
        let ok = r(bad * bad, 1) <= r(4, 1) * params.epsilon() * r(16, 1);
        ensure(ok && rep.pass, || format!("B = {b:?}: {bad} bad"))?;
        sets += 1;
    }
    ensure(sets == 1820, || format!("{sets} sets"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{sets} sets, {:?}", start.elapsed()))
}

fn criterion_3(dir: &Path) -> Check {
    let g = ExtractorGraph::read_from(dir.join("g.bgex")).map_err(|e| e.to_string())?;
    let params = small_params();
    let lists: BTreeMap<Bits, AmplifiedList> =
        left(4).into_iter().map(|x| (x, amplify(&g, &params, x).unwrap())).collect();
    for list in lists.values() {
        ensure(list.len() == 16 && !list.padded, || format!("list of {} has {} elements", list.x, list.len()))?;
    }
    let mut checked = 0;
    for b in all_b(4) {
        let bad: BTreeSet<Bits> = congestion(&g, &params, &b).unwrap().bad_set.into_iter().collect();
        for x in b.iter().filter(|x| !bad.contains(x)) {
            let list = &lists[x];
            let outside = list.elements.iter().filter(|e| !b.contains(e)).count() as i128;
            let fraction = r(outside, 16);
            ensure(survival_fraction(list, &b) == fraction, || "survival fraction disagrees".into())?;
            // fraction >= 1 - 2δ  <=>  (1 - fraction)^2 <= 4 ε
            let miss = Rational::from_integer(1) - fraction;
            ensure(miss * miss <= r(4, 1) * params.epsilon(), || format!("x = {x}, B = {b:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (B, x) pairs"))
}

/// `max_A |P(A) - |A|/|R||` over every subset `A` of the right side.
fn max_over_subsets(g: &ExtractorGraph, k: u32, b: &[u64]) -> Rational {
    let view = g.prefix_view(k).unwrap();
    let rs = view.right_size() as usize;
    let mut counts = vec![0i128; rs];
    for &x in b {
        for y in 0..g.degree() {
            counts[view.ext_raw(x, y) as usize] += 1;
        }
    }
    let total = b.len() as i128 * g.degree() as i128;
    (0u32..1 << rs)
        .map(|a| {
            let hit: i128 = (0..rs).filter(|z| a >> z & 1 == 1).map(|z| counts[z]).sum();
            let p = r(hit, total) - r(a.count_ones() as i128, rs as i128);
            if p < Rational::from_integer(0) {
                -p
            } else {
                p
            }
        })
        .max()
        .unwrap()
}

fn criterion_4() -> Check {
    for i in 0..100u64 {
        let w = |j| prng::word(0xacce, 8 * i + j);
        let n = 3 + (w(0) % 3) as u32;
        let d = 1 + (w(1) % 3) as u32;
        let m = 1 + (w(2) % n as u64) as u32;
        let g = sample_table(n, d, m, w(3)).unwrap();
        // Views with at most 3 right bits, so |R_k| <= 8.
        let ks: Vec<u32> = (g.min_view_k()..=n).filter(|&k| g.right_bits_at(k) <= 3).collect();
        let k = ks[(w(4) % ks.len() as u64) as usize];
        let size = 1 + (w(5) % (1 << n)) as usize;
        let mut b: Vec<u64> = (0..1u64 << n).collect();
        // Fisher-Yates on the counter stream
        for j in (1..b.len()).rev() {
            b.swap(j, (prng::word(w(6), j as u64) % (j as u64 + 1)) as usize);
        }
        b.truncate(size);
        b.sort_unstable();
        let bb: Vec<Bits> = b.iter().map(|&x| Bits::truncating(x, n)).collect();
        let lib = stat_distance(&g.prefix_view(k).unwrap(), &bb).map_err(|e| e.to_string())?;
        let brute = max_over_subsets(&g, k, &b);
        ensure(lib == brute, || format!("instance {i}: {lib} vs {brute}"))?;
    }
    Ok("100 instances".into())
}

fn criterion_5() -> Check {
    let (n, d, t) = (12, 4, 10);
    let g = ExtractorGraph::linear(n, d, SeedExpansion::counter(5, 4, 8).unwrap()).unwrap();
    let mt = g.right_bits_at(t) as u32;
    let view = g.prefix_view(t).unwrap();
    let (mut nil, mut listed) = (0, 0);
    for i in 0..100u64 {
        let y = prng::word(0x5eed, 3 * i) % 16;
        let z = if i % 2 == 0 { view.ext_raw(prng::word(0x5eed, 3 * i + 1) % 4096, y) } else { prng::word(0x5eed, 3 * i + 2) % 64 };
        let delta = [16u64, 64, 128][(i % 3) as usize];
        let brute: BTreeSet<u64> = (0..1u64 << n).filter(|&x| view.ext_raw(x, y) == z).collect();
        let got = left_neighbors_indexed(&g, Bits::truncating(z, mt), Bits::truncating(y, d), delta, t)
            .map_err(|e| e.to_string())?;
        match got {
            None => {
                ensure((brute.len() as u64) < delta, || format!("NIL but {} preimages", brute.len()))?;
                nil += 1;
            }
            Some(list) => {
                ensure(brute.len() as u64 >= delta, || "list where NIL expected".into())?;
                let first: BTreeSet<u64> = list.iter().map(|x| x.value()).collect();
                ensure(first.len() as u64 == delta && first.is_subset(&brute), || "list leaves the preimage set".into())?;
                let space = list.space();
                let all: BTreeSet<u64> = (0..space.size() as u64).map(|j| space.element(j).unwrap().value()).collect();
                ensure(all == brute, || format!("(z, y) = ({z}, {y}): preimage sets differ"))?;
                listed += 1;
            }
        }
    }
    // D Δ = 16 * 1024 = 2^14
    let params = BalanceParams::new(r(1, 4), 1024, t).unwrap();
    for x in [0u64, 1, 0xabc, 0xfff] {
        let x = Bits::truncating(x, n);
        let list = amplify(&g, &params, x).map_err(|e| e.to_string())?;
        ensure(list.len() == 1 << 14, || "list size".into())?;
        for (i, e) in list.elements.iter().enumerate() {
            ensure(list_element(&g, &params, x, i as u64).unwrap() == *e, || format!("element {i} of {x}"))?;
        }
    }
    ensure(nil > 0 && listed > 0, || "both outcomes should occur".into())?;
    Ok(format!("{listed} lists, {nil} NIL, 4 x 2^14 indices"))
}

/// Rank over GF(2) of rows packed into `u64`.
fn rank(mut rows: Vec<u64>) -> u32 {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank as usize..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(rank as usize, p);
        let pivot = rows[rank as usize];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank as usize && *row >> bit & 1 == 1 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

fn criterion_6() -> Check {
    let (n, d, t) = (16, 6, 12);
    let g = ExtractorGraph::linear(n, d, SeedExpansion::counter(21, 4, 12).unwrap()).unwrap();
    let mt = g.right_bits_at(t) as u32;
    ensure(mt == 8, || format!("m_t = {mt}"))?;
    let view = g.prefix_view(t).unwrap();
    let mut min_kernel = n;
    for y in 0..g.degree() {
        // Row i collects output bit i of every unit vector.
        let cols: Vec<u64> = (0..n).map(|j| view.ext_raw(1 << j, y)).collect();
        let rows: Vec<u64> = (0..mt).map(|i| (0..n).fold(0, |acc, j| acc | (cols[j as usize] >> i & 1) << j)).collect();
        let kernel = n - rank(rows);
        ensure(kernel >= 8, || format!("y = {y}: kernel dimension {kernel}"))?;
        min_kernel = min_kernel.min(kernel);
        if y < 4 {
            let z = view.ext_raw(0x1234, y);
            let count = (0..1u64 << n).filter(|&x| view.ext_raw(x, y) == z).count();
            ensure(count == 1 << kernel, || format!("y = {y}: {count} preimages, kernel {kernel}"))?;
        }
    }
    ensure(delta_guarantee(&g, t, 256).map_err(|e| e.to_string())?, || "delta_guarantee(256) false".into())?;
    Ok(format!("64 labels, min kernel dimension {min_kernel}"))
}

/// Second interpreter for the toy machine, over bit vectors.
fn interpret(program: &[u8], budget: u64) -> Option<Vec<u8>> {
    if !program.len().is_multiple_of(3) {
        return None;
    }
    let ops: Vec<u8> = program.chunks(3).map(|c| c[0] * 4 + c[1] * 2 + c[2]).collect();
    let mut jump = vec![0usize; ops.len()];
    let mut open = Vec::new();
    for (i, &op) in ops.iter().enumerate() {
        if op == 5 {
            open.push(i);
        } else if op == 6 {
            let j = open.pop()?;
            jump[i] = j;
            jump[j] = i;
        }
    }
    if !open.is_empty() {
        return None;
    }
    let (mut stack, mut out, mut pc, mut steps) = (Vec::new(), Vec::new(), 0, 0);
    while pc < ops.len() {
        steps += 1;
        if steps > budget {
            return None;
        }
        match ops[pc] {
            0 | 1 => stack.push(ops[pc]),
            2 => stack.push(*stack.last()?),
            3 => {
                stack.pop()?;
            }
            4 => {
                out.push(stack.pop()?);
                if out.len() > 64 {
                    return None;
                }
            }
            5 => {
                if stack.last().copied().unwrap_or(0) == 0 {
                    pc = jump[pc];
                }
            }
            6 => {
                pc = jump[pc];
                continue;
            }
            _ => break,
        }
        pc += 1;
    }
    Some(out)
}

fn criterion_7() -> Check {
    let (cap, budget) = (12, 10_000);
    let mut second: BTreeMap<Vec<u8>, u32> = BTreeMap::new();
    for len in 1..=cap {
        for p in 0u32..1 << len {
            let program: Vec<u8> = (0..len).map(|i| (p >> i & 1) as u8).collect();
            if let Some(out) = interpret(&program, budget) {
                second.entry(out).or_insert(len);
            }
        }
    }
    let first: BTreeMap<Vec<u8>, u32> = enumerate_programs(cap, budget, Exec::default())
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|(x, c)| ((0..x.len()).map(|i| u8::from(x.bit(i))).collect(), c))
        .collect();
    ensure(first == second, || format!("enumerators disagree: {} vs {} strings", first.len(), second.len()))?;
    let oracle = ToyOracle::new(cap, budget).map_err(|e| e.to_string())?;
    for k in 0..=cap {
        let total = second.values().filter(|&&c| c <= k).count() as u64;
        let by_length: u64 = (0..=64).map(|n| oracle.count(n, k)).sum();
        ensure(total == by_length, || format!("k = {k}: {total} vs {by_length}"))?;
        ensure(u128::from(total) < 1u128 << (k + 1), || format!("k = {k}: {total} strings"))?;
    }
    Ok(format!("{} strings with finite complexity", second.len()))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let stats = simulate_coupon_collector(64, 4, 1000, 0xc0, Exec::default()).map_err(|e| e.to_string())?;
    let bound = newman_shepp_bound(64, 4).map_err(|e| e.to_string())?;
    let gap = (stats.mean - bound).abs() / bound;
    within(start, Duration::from_secs(30))?;
    let detail = format!("mean {:.2}, bound {bound:.2}, gap {:.1}%", stats.mean, 100.0 * gap);
    ensure(gap <= 0.15, || detail.clone())?;
    Ok(detail)
}

fn criterion_9(dir: &Path) -> Check {
    let dir = dir.join("det");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("r.json"), SMALL).unwrap();
    std::fs::write(dir.join("l.json"), r#"{"n":24,"epsilon":"1/4","seed":3}"#).unwrap();
    std::fs::write(dir.join("m.json"), r#"{"n":4,"k":2,"oracle":{"kind":"compressor","offset":8}}"#).unwrap();
    let runs: &[(&[&str], &[&str])] = &[
        (&["build-random", "--config", "r.json", "--out", "g.bgex"], &["g.bgex", "g.bgex.report.json"]),
        (&["build-linear", "--config", "l.json", "--out", "lin.bgex"], &["lin.bgex", "lin.bgex.report.json"]),
        (&["verify", "--config", "r.json", "--graph", "g.bgex", "--report", "v.json"], &["v.json"]),
        (&["make-bset", "--config", "m.json", "--out", "b.txt"], &["b.txt", "b.txt.report.json"]),
        (&["congestion", "--config", "r.json", "--graph", "g.bgex", "--bset", "b.txt", "--report", "c.json"], &["c.json"]),
        (
            &["amplify", "--config", "r.json", "--graph", "g.bgex", "--x", "9", "--bset", "b.txt", "--out", "list.txt"],
            &["list.txt", "list.txt.report.json"],
        ),
        (&["amplify", "--config", "r.json", "--graph", "g.bgex", "--x", "9", "--index", "5", "--report", "i.json"], &["i.json"]),
    ];
    let mut artifacts = 0;
    for (args, files) in runs {
        let (c1, o1) = cli(&dir, args);
        let f1: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap_or_default()).collect();
        let (c2, o2) = cli(&dir, args);
        let f2: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap_or_default()).collect();
        ensure(c1 == 0 && c2 == 0, || format!("{} exited {c1}/{c2}", args[0]))?;
        ensure(o1 == o2 && f1 == f2, || format!("{} differs between runs", args[0]))?;
        ensure(f1.iter().all(|f| !f.is_empty()), || format!("{} wrote an empty artifact", args[0]))?;
        artifacts += files.len();
    }
    Ok(format!("{} commands, {artifacts} artifacts", runs.len()))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let criteria: Vec<(u32, Box<dyn Fn() -> Check>)> = vec![
        (1, Box::new(|| criterion_1(p))),
        (2, Box::new(|| criterion_2(p))),
        (3, Box::new(|| criterion_3(p))),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(|| criterion_9(p))),
    ];
    let mut failed = 0;
    for (id, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {id}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
