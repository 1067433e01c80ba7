/// `C(n, k)`, or `None` if it does not fit in a `u128`.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is integral at every step.
        let g = gcd(acc, i + 1);
        let den = (i + 1) / g;
        acc = (acc / g).checked_mul((n - i) / den)?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(n: u64, k: usize, mut rank: u128) -> Option<Vec<u64>> {
    let mut out = Vec::with_capacity(k);
    let mut x = 0u64;
    for i in 0..k {
        loop {
            if x >= n {
                return None;
            }
            let rest = binomial(u128::from(n - x - 1), (k - i - 1) as u128)?;
            if rank < rest {
                out.push(x);
                x += 1;
                break;
            }
            rank -= rest;
            x += 1;
        }
    }
    (rank == 0).then_some(out)
}

/// Lexicographic iterator over `k`-subsets of `0..n`, starting at any rank.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: u64,
    current: Option<Vec<u64>>,
}

impl Combinations {
    pub fn new(n: u64, k: usize) -> Self {
        Self::from_rank(n, k, 0)
    }

    pub fn from_rank(n: u64, k: usize, rank: u128) -> Self {
        Combinations { n, current: unrank_combination(n, k, rank) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let k = next.len();
        let mut i = k;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if next[i] < self.n - (k - i) as u64 {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 4), Some(1820));
        assert_eq!(binomial(16, 8), Some(12870));
        assert_eq!(binomial(16, 16), Some(1));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial(1 << 20, 1 << 19), None);
    }

    #[test]
    fn iteration_matches_unranking() {
        let all: Vec<_> = Combinations::new(7, 3).collect();
        assert_eq!(all.len(), 35);
        for (r, c) in all.iter().enumerate() {
            assert_eq!(unrank_combination(7, 3, r as u128).as_ref(), Some(c));
        }
        assert_eq!(unrank_combination(7, 3, 35), None);
        let tail: Vec<_> = Combinations::from_rank(7, 3, 30).collect();
        assert_eq!(tail, all[30..]);
    }

    #[test]
    fn empty_and_full_subsets() {
        assert_eq!(Combinations::new(4, 0).collect::<Vec<_>>(), vec![Vec::<u64>::new()]);
        assert_eq!(Combinations::new(4, 4).collect::<Vec<_>>(), vec![vec![0, 1, 2, 3]]);
    }
}
