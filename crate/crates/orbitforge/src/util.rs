//! Small shared helpers: bigint combinatorics and the parallel/sequential
//! execution shims used by the batch APIs.

use num::bigint::BigUint;
use num::traits::{One, Zero};

/// Binomial coefficient C(n, k) as a big integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Falling factorial k·(k−1)⋯(k−b+1); zero when b > k.
pub fn falling(k: usize, b: usize) -> BigUint {
    if b > k {
        return BigUint::zero();
    }
    let mut out = BigUint::one();
    for i in 0..b {
        out *= BigUint::from(k - i);
    }
    out
}

/// Factorial n! as a big integer.
pub fn factorial(n: usize) -> BigUint {
    let mut out = BigUint::one();
    for i in 2..=n {
        out *= BigUint::from(i);
    }
    out
}

/// base^exp with a u64 exponent (the inherent BigUint::pow takes u32).
pub fn pow_u64(base: &BigUint, exp: u64) -> BigUint {
    num::traits::Pow::pow(base, exp)
}

/// Execution shims. With the `parallel` feature (default) the batch helpers
/// fan out over rayon; without it they run sequentially. Output order is
/// identical either way, so results are byte-deterministic across both
/// builds.
pub mod exec {
    /// Map over items, preserving input order.
    #[cfg(feature = "parallel")]
    pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
    where
        T: Send,
        U: Send,
        F: Fn(T) -> U + Sync + Send,
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
    where
        F: Fn(T) -> U,
    {
        items.into_iter().map(f).collect()
    }

    /// Sequential map with the same shape as `par_map`, kept as the
    /// baseline side of the benchmark comparison.
    pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
    where
        F: Fn(T) -> U,
    {
        items.into_iter().map(f).collect()
    }

    /// Run two closures, in parallel when the feature is enabled.
    #[cfg(feature = "parallel")]
    pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        rayon::join(a, b)
    }

    #[cfg(not(feature = "parallel"))]
    pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA,
        B: FnOnce() -> RB,
    {
        (a(), b())
    }
}
