use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{param, Result};
use crate::par::Exec;
use crate::prng;

/// `p ln p + (h - 1) p ln ln p`, natural logarithms throughout.
pub fn newman_shepp_bound(p: u64, h: u64) -> Result<f64> {
    if p < 3 {
        return Err(param(format!("p = {p}: the bound needs p >= 3")));
    }
    if h == 0 {
        return Err(param("h must be positive"));
    }
    let p = p as f64;
    Ok(p * p.ln() + (h - 1) as f64 * p * p.ln().ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouponStats {
    pub p: u64,
    pub h: u64,
    pub runs: u64,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
    pub bound: f64,
    /// `|mean - bound| / bound`.
    pub relative_gap: f64,
    pub log_base: &'static str,
}

fn draws_until_covered(rng: &mut ChaCha8Rng, p: u64, h: u64) -> u64 {
    let mut counts = vec![0u64; p as usize];
    let mut short = p;
    let mut draws = 0;
    while short > 0 {
        let i = rng.gen_range(0..p) as usize;
        counts[i] += 1;
        if counts[i] == h {
            short -= 1;
        }
        draws += 1;
    }
    draws
}

/// Draws uniformly from `p` coupons until each has been seen `h` times.
/// Run `i` uses a ChaCha8 stream seeded with `substream(seed, i)`.
pub fn simulate_coupon_collector(p: u64, h: u64, runs: u64, seed: u64, exec: Exec) -> Result<CouponStats> {
    let bound = newman_shepp_bound(p, h)?;
    if runs == 0 {
        return Err(param("at least one run is required"));
    }
    let draws = exec.map(runs as usize, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(prng::substream(seed, i as u64));
        draws_until_covered(&mut rng, p, h)
    });
    let mean = draws.iter().sum::<u64>() as f64 / runs as f64;
    Ok(CouponStats {
        p,
        h,
        runs,
        mean,
        min: *draws.iter().min().expect("runs > 0"),
        max: *draws.iter().max().expect("runs > 0"),
        bound,
        relative_gap: (mean - bound).abs() / bound,
        log_base: "e",
    })
}
