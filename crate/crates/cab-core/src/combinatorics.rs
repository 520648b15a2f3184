//! Binomial coefficients and the combinatorial number system.
//!
//! `rank`/`unrank` give a stateless bijection between `{0, .., C(n,k)-1}`
//! and sorted size-`k` subsets of `{0, .., n-1}` in colexicographic order:
//! `rank(c) = sum_i C(c_i, i+1)` for `c_0 < c_1 < ... < c_{k-1}`. The channel
//! demo uses it to map payload chunks to signal supports; the projection
//! ratio estimator uses it to enumerate supports.

use crate::error::{Error, Result};

/// `C(n, k)` in u128, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        // multiply first, divide by i afterwards; the running product of a
        // prefix of the symmetric form is always divisible by i!
        result = result.checked_mul((n - k + i) as u128)? / i as u128;
    }
    Some(result)
}

/// Colexicographic rank of a sorted subset.
pub fn rank(subset: &[usize]) -> Option<u128> {
    let mut r: u128 = 0;
    for (i, &c) in subset.iter().enumerate() {
        r = r.checked_add(binomial(c, i + 1)?)?;
    }
    Some(r)
}

/// Sorted size-`k` subset of `{0, .., n-1}` with colexicographic rank `r`.
pub fn unrank(n: usize, k: usize, r: u128) -> Result<Vec<usize>> {
    let total = binomial(n, k)
        .ok_or_else(|| Error::InvalidParameter(format!("C({n},{k}) overflows u128")))?;
    if r >= total {
        return Err(Error::InvalidParameter(format!(
            "rank {r} out of range for C({n},{k}) = {total}"
        )));
    }
    let mut remaining = r;
    let mut subset = vec![0usize; k];
    let mut upper = n;
    for i in (0..k).rev() {
        // largest c with C(c, i+1) <= remaining
        let mut c = upper - 1;
        loop {
            let b = binomial(c, i + 1).expect("binomial fits: bounded by total");
            if b <= remaining {
                remaining -= b;
                subset[i] = c;
                upper = c;
                break;
            }
            c -= 1;
        }
    }
    Ok(subset)
}

/// Iterator over all sorted size-`k` subsets of `{0, .., n-1}` in
/// lexicographic order. Yields `None` when exhausted.
pub struct Combinations {
    n: usize,
    k: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n {
            Some((0..k).collect())
        } else {
            None
        };
        Combinations { n, k, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let out = current.clone();
        // advance to the lexicographic successor
        let mut next = current;
        let mut i = self.k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - self.k + i {
                next[i] += 1;
                for j in i + 1..self.k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(0, 0), Some(1));
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(5, 6), Some(0));
        assert_eq!(binomial(100, 5), Some(75_287_520));
        assert_eq!(binomial(4, 2), Some(6));
    }

    #[test]
    fn rank_unrank_roundtrip() {
        let (n, k) = (9, 4);
        let total = binomial(n, k).unwrap();
        for r in 0..total {
            let subset = unrank(n, k, r).unwrap();
            assert_eq!(subset.len(), k);
            assert!(subset.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(rank(&subset).unwrap(), r);
        }
    }

    #[test]
    fn unrank_rejects_out_of_range() {
        assert!(unrank(4, 2, 6).is_err());
    }

    #[test]
    fn combinations_count_and_order() {
        let all: Vec<_> = Combinations::new(6, 3).collect();
        assert_eq!(all.len() as u128, binomial(6, 3).unwrap());
        for w in all.windows(2) {
            assert!(w[0] < w[1], "not lexicographically increasing");
        }
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all.last().unwrap(), &vec![3, 4, 5]);
    }

    #[test]
    fn combinations_k_zero() {
        let all: Vec<_> = Combinations::new(4, 0).collect();
        assert_eq!(all, vec![Vec::<usize>::new()]);
    }
}
