//! Small numerical helpers shared across modules.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0_f64;
    let mut comp = 0.0_f64;
    for k in 1..=n {
        let v = (k as f64).ln();
        let t = acc + v;
        if acc.abs() >= v.abs() {
            comp += (acc - t) + v;
        } else {
            comp += (v - t) + acc;
        }
        acc = t;
        out.push(acc + comp);
    }
    out
}

/// Binomial coefficient `C(n, k)`, or `None` on overflow of `u128`.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of ways to write `n` as an ordered sum of `k` nonnegative parts.
pub fn composition_count(n: usize, k: usize) -> Option<u128> {
    if k == 0 {
        return Some(u128::from(n == 0));
    }
    binomial((n + k - 1) as u128, (k - 1) as u128)
}

/// Calls `f` on every composition of `n` into `k` nonnegative parts, in
/// lexicographic order of the count vector.
pub fn for_each_composition<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k == 0 {
        if n == 0 {
            f(&[]);
        }
        return;
    }
    let mut counts = vec![0usize; k];
    fill(&mut counts, 0, n, &mut f);

    fn fill<F: FnMut(&[usize])>(counts: &mut [usize], pos: usize, left: usize, f: &mut F) {
        let k = counts.len();
        if pos == k - 1 {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            fill(counts, pos + 1, left - c, f);
        }
    }
}
