//! Exact counting of set partitions with bounded block size, and exact
//! verification of the growth inequalities that govern these counts.
//!
//! `p_k(n)` is the number of partitions of an n-set with all blocks of size
//! at most k (A229223). It satisfies
//! `p_k(n) = Σ_{i=0}^{k-1} C(n-1, i) · p_k(n-1-i)`: pick the block containing
//! the last element, then partition the rest. `s_k(n)` counts partitions of a
//! kn-set into blocks of size exactly k, with
//! `s_k(n) = C(kn-1, k-1) · s_k(n-1)` and closed form `(kn)!/(n!·(k!)^n)`.
//!
//! All inequality checks are decided purely in integer arithmetic: exponents
//! are restricted to rationals a/b and both sides are raised to the b-th
//! power, so no floating point appears on any verification path.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num::bigint::{BigInt, BigUint};
use num::rational::Ratio;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::util::binomial;

/// Exact rational with reduced form and positive denominator, used for the
/// exponent parameters of the growth bounds.
pub type Rational = Ratio<BigInt>;

/// Build a rational from a numerator/denominator pair of machine integers.
pub fn rational(num: i64, den: i64) -> Rational {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// Memoized table of p_k values for one fixed k, grown on demand.
///
/// Invariants: `values[0] = 1`; for k ≥ 2 the values are nondecreasing in n;
/// and `values[n] ≤ Bell(n)` always.
#[derive(Debug, Clone)]
pub struct CountTable {
    k: usize,
    values: Vec<BigUint>,
}

impl CountTable {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "block size bound must be positive");
        CountTable {
            k,
            values: vec![BigUint::one()],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// p_k(n), extending the table as needed.
    pub fn get(&mut self, n: usize) -> BigUint {
        while self.values.len() <= n {
            let m = self.values.len();
            let mut total = BigUint::zero();
            for i in 0..self.k.min(m) {
                total += binomial(m - 1, i) * &self.values[m - 1 - i];
            }
            self.values.push(total);
        }
        self.values[n].clone()
    }
}

/// Shared per-k tables. Fills are idempotent, so concurrent callers observe
/// the same values regardless of interleaving.
static TABLES: Mutex<BTreeMap<usize, CountTable>> = Mutex::new(BTreeMap::new());

/// Number of set partitions of {1,…,n} with all blocks of size ≤ k.
pub fn p_k(k: usize, n: usize) -> BigUint {
    assert!(k >= 1, "block size bound must be positive");
    let mut tables = TABLES.lock().unwrap();
    tables.entry(k).or_insert_with(|| CountTable::new(k)).get(n)
}

/// Number of set partitions of an n-element set (Bell number), as the upper
/// envelope of p_k for k ≥ n.
pub fn bell(n: usize) -> BigUint {
    p_k(n.max(1), n)
}

/// Stirling number of the second kind: partitions of an n-set into exactly
/// j nonempty blocks. Computed by the additive recurrence.
pub fn stirling2(n: usize, j: usize) -> BigUint {
    if j > n {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one(); // j == 0 here
    }
    if j == 0 {
        return BigUint::zero();
    }
    // row-by-row: S(m, i) = S(m-1, i-1) + i * S(m-1, i)
    let mut row = vec![BigUint::zero(); n + 1];
    row[0] = BigUint::one();
    for m in 1..=n {
        for i in (1..=m.min(j)).rev() {
            let carry = row[i - 1].clone();
            row[i] = carry + BigUint::from(i) * &row[i];
        }
        row[0] = BigUint::zero();
    }
    row[j].clone()
}

/// Exhaustive oracle for p_k: generate every set partition of {1,…,n} as a
/// restricted-growth string and keep those whose blocks all have size ≤ k.
/// Independent of the recursion path so the two can check each other.
pub fn p_k_bruteforce(k: usize, n: usize, cap: usize) -> Result<BigUint> {
    if n > cap {
        return Err(Error::OracleRangeExceeded { n, cap });
    }
    let mut count: u64 = 0;
    for_each_rgs(n, |rgs, nblocks| {
        let mut sizes = vec![0usize; nblocks];
        for &b in rgs {
            sizes[b] += 1;
        }
        if sizes.iter().all(|&s| s <= k) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Visit every set partition of {0,…,n-1} encoded as a restricted-growth
/// string: `rgs[i]` is the block index of element i, with
/// `rgs[i] ≤ 1 + max(rgs[..i])`.
pub fn for_each_rgs<F: FnMut(&[usize], usize)>(n: usize, mut visit: F) {
    if n == 0 {
        visit(&[], 0);
        return;
    }
    let mut rgs = vec![0usize; n];
    let mut maxes = vec![0usize; n]; // maxes[i] = 1 + max(rgs[..=i])
    loop {
        let mut m = 0;
        for i in 0..n {
            maxes[i] = m.max(rgs[i] + 1);
            m = maxes[i];
        }
        visit(&rgs, m);
        // next string in lexicographic order
        let mut i = n - 1;
        loop {
            let limit = if i == 0 { 0 } else { maxes[i - 1] };
            if rgs[i] < limit {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            if i == 0 {
                return;
            }
            i -= 1;
        }
    }
}

/// Number of partitions of {1,…,kn} into blocks of size exactly k, via the
/// recursion s_k(n) = C(kn-1, k-1)·s_k(n-1), s_k(0) = 1.
pub fn s_k(k: usize, n: usize) -> BigUint {
    assert!(k >= 1);
    let mut value = BigUint::one();
    for m in 1..=n {
        value *= binomial(k * m - 1, k - 1);
    }
    value
}

/// Closed form (kn)!/(n!·(k!)^n) for s_k, kept as an independent route.
pub fn s_k_closed_form(k: usize, n: usize) -> BigUint {
    let num = crate::util::factorial(k * n);
    let den = crate::util::factorial(n) * crate::util::factorial(k).pow(n as u32);
    num / den
}

fn rational_parts(q: &Rational) -> (BigUint, BigUint) {
    let num = q.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = q.denom().abs().to_biguint().expect("denominator positive");
    (num, den)
}

fn pow_big(base: &BigUint, exp: &BigUint) -> BigUint {
    let e = exp.to_u64().expect("exponent fits in u64");
    num::traits::Pow::pow(base, e)
}

/// Decide `p_k(n) ≥ n^{q·n}` exactly, where q = (k−1)/k − ε. With q = a/b in
/// lowest terms this is `p_k(n)^b ≥ n^{a·n}` in integer arithmetic; q ≤ 0 is
/// trivially true since the right side is at most 1.
pub fn check_lower_bound(k: usize, epsilon: &Rational, n: usize) -> bool {
    let q = rational(k as i64 - 1, k as i64) - epsilon.clone();
    if q <= Rational::zero() {
        return true;
    }
    let (a, b) = rational_parts(&q);
    let lhs = pow_big(&p_k(k, n), &b);
    let rhs = pow_big(&BigUint::from(n), &(a * BigUint::from(n)));
    lhs >= rhs
}

/// Decide, for every i in 0..k−1, the sufficient inequality
/// `C(n−1, i) < (1/k)·(n·(n−1)⋯(n−i))^d` exactly: with d = a/b the check is
/// `(k·C(n−1,i))^b < (n·(n−1)⋯(n−i))^a`. A true answer certifies the
/// induction step for `p_k(n) < c·n^{dn}` at this n.
pub fn check_upper_bound_termwise(k: usize, d: &Rational, n: usize) -> bool {
    let (a, b) = rational_parts(d);
    for i in 0..k {
        if i >= n {
            break;
        }
        let lhs = pow_big(&(BigUint::from(k) * binomial(n - 1, i)), &b);
        let mut prod = BigUint::one();
        for j in 0..=i {
            prod *= BigUint::from(n - j);
        }
        let rhs = pow_big(&prod, &a);
        if lhs >= rhs {
            return false;
        }
    }
    true
}

/// Result of the constant search for the upper bound `p_k(n) < c·n^{dn}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperBoundReport {
    /// Smallest rational c with denominator ≤ the configured bound such that
    /// `p_k(n) < c·n^{dn}` holds exactly for all 1 ≤ n ≤ n_max.
    pub c: Rational,
    /// Least N such that the termwise sufficient inequality holds for every
    /// n in (N, n_max].
    pub termwise_onset: usize,
}

/// Search the smallest admissible constant c (denominator ≤ `denominator_cap`)
/// and report the onset of the termwise inequality.
pub fn find_upper_c(
    k: usize,
    d: &Rational,
    n_max: usize,
    denominator_cap: u64,
) -> UpperBoundReport {
    let (a, b) = rational_parts(d);
    // Precompute p_k(n)^b and n^{an} for the range.
    let mut pk_pows = Vec::with_capacity(n_max + 1);
    let mut n_pows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        pk_pows.push(pow_big(&p_k(k, n), &b));
        n_pows.push(pow_big(
            &BigUint::from(n.max(1)),
            &(a.clone() * BigUint::from(n)),
        ));
    }
    // c = p/q works iff p^b · n^{an} > q^b · p_k(n)^b for all 1 ≤ n ≤ n_max.
    let works = |p: &BigUint, q: &BigUint| -> bool {
        let pb = pow_big(p, &b);
        let qb = pow_big(q, &b);
        for n in 1..=n_max {
            if &pb * &n_pows[n] <= &qb * &pk_pows[n] {
                return false;
            }
        }
        true
    };
    let mut best: Option<Rational> = None;
    for q in 1..=denominator_cap {
        let qb = BigUint::from(q);
        // binary search the least numerator that works for this denominator
        let mut hi = BigUint::one();
        while !works(&hi, &qb) {
            hi *= BigUint::from(2u32);
        }
        let mut lo = BigUint::one();
        while lo < hi {
            let mid = (&lo + &hi) / BigUint::from(2u32);
            if works(&mid, &qb) {
                hi = mid;
            } else {
                lo = mid + BigUint::one();
            }
        }
        let cand = Ratio::new(BigInt::from(lo), BigInt::from(q));
        if best.as_ref().is_none_or(|b| &cand < b) {
            best = Some(cand);
        }
    }
    let mut onset = 0;
    for n in 1..=n_max {
        if !check_upper_bound_termwise(k, d, n) {
            onset = n;
        }
    }
    UpperBoundReport {
        c: best.expect("denominator range nonempty"),
        termwise_onset: onset,
    }
}
