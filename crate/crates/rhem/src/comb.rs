//! Small combinatorial helpers: binomial coefficients with saturation and
//! allocation-free enumeration of fixed-size subsets.

/// Binomial coefficient C(n, k), saturating at `u64::MAX`.
///
/// Saturation matters: feasibility checks against risk-set sizes like
/// C(155, 57) must not overflow, only compare.
pub fn binomial_saturating(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `f` with every size-`k` subset of `items`, in lexicographic index
/// order. The slice passed to `f` is a reused scratch buffer.
pub fn for_each_combination<T: Copy, F: FnMut(&[T])>(items: &[T], k: usize, mut f: F) {
    let n = items.len();
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf: Vec<T> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&buf);
        // advance to the next combination
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] != pos + n - k {
                break;
            }
            if pos == 0 {
                return;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        for j in pos..k {
            buf[j] = items[idx[j]];
        }
    }
}

/// Collects all size-`k` subsets of `items`.
pub fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for_each_combination(items, k, |c| out.push(c.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_basics() {
        assert_eq!(binomial_saturating(0, 0), 1);
        assert_eq!(binomial_saturating(5, 2), 10);
        assert_eq!(binomial_saturating(57, 4), 395_010);
        assert_eq!(binomial_saturating(4, 7), 0);
        assert_eq!(binomial_saturating(200, 100), u64::MAX);
    }

    #[test]
    fn enumerates_all_subsets_in_order() {
        let got = combinations(&[1u32, 2, 3, 4], 2);
        assert_eq!(
            got,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
    }

    #[test]
    fn counts_match_binomial() {
        let items: Vec<u32> = (0..8).collect();
        for k in 0..=8 {
            let mut n = 0u64;
            for_each_combination(&items, k, |_| n += 1);
            let expect = if k == 0 { 0 } else { binomial_saturating(8, k as u64) };
            assert_eq!(n, expect, "k={k}");
        }
    }

    #[test]
    fn degenerate_sizes() {
        assert!(combinations(&[1u32, 2], 3).is_empty());
        assert!(combinations::<u32>(&[], 1).is_empty());
    }
}
