//! Small exact combinatorics and angle helpers shared by the other modules.

use std::f64::consts::TAU;

/// Largest supported order. `16!` and every binomial `C(16, k)^2` are exact
/// in both `u64` and `f64`.
pub const MAX_ORDER: usize = 16;

/// `n!` as an exact integer. Panics on overflow (`n > 20`).
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).expect("factorial overflow")
}

/// Binomial coefficient by the multiplicative formula; every intermediate
/// value `C(n, i)` is an integer so the division is exact.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `n (n-1) ... (n-k+1)` in floating point; zero when `k > n`.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64).product()
}

/// Reduces `x` into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on a circle of the given period.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap(a - b, period);
    d.min(period - d)
}

/// Distance modulo a full turn.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    circular_distance(a, b, TAU)
}
