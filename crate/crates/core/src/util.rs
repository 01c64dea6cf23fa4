//! Small combinatorial helpers.

/// All `k`-subsets of `items`, each in increasing position order, in
/// lexicographic order of positions.
pub fn subsets<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // rightmost position that can still move right
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `n (n-1) ... (n-k+1)`
pub fn falling_factorial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| n - i).product()
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        let v: Vec<usize> = (0..6).collect();
        for k in 0..=7 {
            assert_eq!(subsets(&v, k).len() as u64, binomial(6, k as u64));
        }
        assert_eq!(subsets(&[3, 5, 9], 2), vec![vec![3, 5], vec![3, 9], vec![5, 9]]);
        assert_eq!(subsets::<usize>(&[], 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn permutation_counts() {
        for n in 0..=6 {
            let mut ps = permutations(n);
            assert_eq!(ps.len() as u64, factorial(n as u64));
            ps.sort();
            ps.dedup();
            assert_eq!(ps.len() as u64, factorial(n as u64));
        }
    }

    #[test]
    fn falling() {
        assert_eq!(falling_factorial(5, 1), 5);
        assert_eq!(falling_factorial(5, 3), 60);
        assert_eq!(falling_factorial(5, 0), 1);
        assert_eq!(falling_factorial(2, 3), 0);
    }
}
