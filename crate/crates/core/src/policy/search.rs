use std::collections::HashMap;

/// Relative difference below which two objective values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// `a` beats `b` by more than the tie tolerance.
pub fn exceeds(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a > b;
    }
    a - b > TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Fibonacci search for the maximum of `f` over the integer range `[lo, hi]`.
///
/// Returns the argmax for unimodal `f` (strictly increasing then strictly
/// decreasing), and a local maximum otherwise. Probes equal within
/// [`TIE_TOLERANCE`] move the bracket towards smaller indices. Each index is
/// evaluated at most once.
pub fn fibonacci_search<F: FnMut(usize) -> f64>(mut f: F, lo: usize, hi: usize) -> usize {
    assert!(lo <= hi, "fibonacci_search needs lo ≤ hi");
    if lo == hi {
        return lo;
    }
    let mut memo: HashMap<usize, f64> = HashMap::new();
    let mut eval = |i: usize| -> f64 {
        if i > hi {
            return f64::NEG_INFINITY;
        }
        *memo.entry(i).or_insert_with(|| f(i))
    };

    // Bracket [a, a + F_m] with F_m ≥ hi − lo; indices past hi act as −∞.
    let mut fib = vec![0usize, 1];
    while fib[fib.len() - 1] < hi - lo {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    let mut m = fib.len() - 1;
    let mut a = lo;
    if m >= 4 {
        let mut x1 = a + fib[m - 2];
        let mut x2 = a + fib[m - 1];
        let mut f1 = eval(x1);
        let mut f2 = eval(x2);
        while m >= 4 {
            m -= 1;
            if !exceeds(f2, f1) {
                x2 = x1;
                f2 = f1;
                x1 = a + fib[m - 2];
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + fib[m - 1];
                f2 = eval(x2);
            }
        }
    }
    let end = (a + fib[m]).min(hi);
    let mut best = a;
    let mut best_v = eval(a);
    for i in a + 1..=end {
        let v = eval(i);
        if exceeds(v, best_v) {
            best = i;
            best_v = v;
        }
    }
    best
}
