//! Classification of orbit-count sequences against the exponential and
//! n^{dn} growth regimes, with exact rational-exponent comparisons.
//!
//! The two verifiers are exact: `verify_exp_bound` decides count ≤ c^n and
//! `verify_ndn_bound` decides count ≤ c·n^{dn} by raising both sides to the
//! denominator of d, all in integer arithmetic. The classifier on top of
//! them is a labeled heuristic: a finite prefix cannot decide asymptotics,
//! so the label combines the exact grid verdicts with trend tests (ratio
//! log-concavity for the exponential regime, movement of the d_n estimates
//! for the n^{dn} regime), each again decided exactly.

use num::bigint::{BigInt, BigUint};
use num::rational::Ratio;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::orbits::OrbitCountSequence;
use crate::partitions::Rational;

/// Grid of multiplicative constants tried by the classifier.
pub const GRID_C: [u64; 5] = [1, 2, 4, 8, 16];

/// Grid of exponents d (as numerator/denominator pairs) tried by the
/// classifier, ascending.
pub const GRID_D: [(i64, i64); 6] = [(1, 4), (1, 2), (2, 3), (3, 4), (4, 5), (9, 10)];

/// Exact decision of count ≤ c^n for every entry.
pub fn verify_exp_bound(seq: &OrbitCountSequence, c: u64) -> bool {
    let c = BigUint::from(c);
    seq.entries
        .iter()
        .all(|(n, count)| *count <= crate::util::pow_u64(&c, *n as u64))
}

/// Exact decision of count ≤ c·n^{dn} for every entry with n ≥ 2 (the n = 1
/// entry is compared against c), where d = a/b with 0 < d < 1.
pub fn verify_ndn_bound(seq: &OrbitCountSequence, c: u64, d: &Rational) -> Result<bool> {
    if *d <= Rational::zero() || *d >= Rational::one() {
        return Err(Error::InvalidInput(format!(
            "d must satisfy 0 < d < 1, got {d}"
        )));
    }
    let a = d.numer().abs().to_biguint().expect("positive");
    let b = d.denom().to_biguint().expect("positive denominator");
    let b_u64 = b.to_u64().expect("denominator fits u64");
    let c_big = BigUint::from(c);
    for (n, count) in &seq.entries {
        if *n == 1 {
            if *count > c_big {
                return Ok(false);
            }
            continue;
        }
        let lhs = crate::util::pow_u64(count, b_u64);
        let exponent = (a.clone() * BigUint::from(*n)).to_u64().expect("fits");
        let rhs = crate::util::pow_u64(&c_big, b_u64)
            * crate::util::pow_u64(&BigUint::from(*n), exponent);
        if lhs > rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A rational bracket around ln(count)/(n·ln n), obtained by exact power
/// comparisons at the stated precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentEstimate {
    pub n: usize,
    /// a/prec with count ≥ n^{(a/prec)·n}; the true exponent lies in
    /// [low, low + 1/prec).
    pub low: Rational,
    pub precision: u64,
}

impl ExponentEstimate {
    pub fn high(&self) -> Rational {
        self.low.clone() + Ratio::new(BigInt::one(), BigInt::from(self.precision))
    }
}

/// Largest a/prec with count^prec ≥ n^{a·n}, by binary search over a with
/// exact comparisons. Requires n ≥ 2 and count ≥ 1.
pub fn exponent_bracket(n: usize, count: &BigUint, prec: u64) -> ExponentEstimate {
    assert!(n >= 2 && !count.is_zero());
    let lhs = crate::util::pow_u64(count, prec);
    let holds = |a: u64| -> bool {
        let rhs = crate::util::pow_u64(&BigUint::from(n), a * n as u64);
        lhs >= rhs
    };
    // counts here are at most Bell(n) < n^n, but user sequences may exceed;
    // expand the search window until it brackets
    let mut hi = prec;
    while holds(hi) {
        hi *= 2;
    }
    let mut lo = 0u64;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    ExponentEstimate {
        n,
        low: Ratio::new(BigInt::from(lo), BigInt::from(prec)),
        precision: prec,
    }
}

/// The classification label. Only "constant" is a statement about the data
/// alone; the other labels summarize exact grid verdicts plus trend
/// heuristics and are not asymptotic certificates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrowthLabel {
    Constant,
    AtMostExponential { c: u64 },
    SubFactorial { c: u64, d: Rational },
    Fast,
}

impl std::fmt::Display for GrowthLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GrowthLabel::Constant => write!(f, "constant"),
            GrowthLabel::AtMostExponential { c } => write!(f, "at-most-exponential (c={c})"),
            GrowthLabel::SubFactorial { c, d } => write!(f, "sub-factorial (d<1) (c={c}, d={d})"),
            GrowthLabel::Fast => write!(f, "fast"),
        }
    }
}

/// Result of classifying a sequence: per-n exponent estimates, the exact
/// verdict for every grid pair, and the (heuristic) label.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub estimates: Vec<ExponentEstimate>,
    /// (c, d, verdict) for every grid pair, each verdict exact.
    pub ndn_verdicts: Vec<(u64, Rational, bool)>,
    /// (c, verdict) for every exponential grid constant, exact.
    pub exp_verdicts: Vec<(u64, bool)>,
    pub label: GrowthLabel,
    /// The label is a heuristic; finite data cannot decide asymptotics.
    pub heuristic: bool,
}

/// Classify a sequence with at least 3 entries.
pub fn classify(seq: &OrbitCountSequence) -> Result<GrowthReport> {
    if seq.entries.len() < 3 {
        return Err(Error::InvalidInput(
            "classification needs at least 3 entries".into(),
        ));
    }
    let prec = 2048u64;
    let estimates: Vec<ExponentEstimate> = seq
        .entries
        .iter()
        .filter(|(n, _)| *n >= 2)
        .map(|(n, count)| exponent_bracket(*n, count, prec))
        .collect();
    let exp_verdicts: Vec<(u64, bool)> = GRID_C
        .iter()
        .map(|&c| (c, verify_exp_bound(seq, c)))
        .collect();
    let mut ndn_verdicts = Vec::new();
    for &(a, b) in &GRID_D {
        let d = crate::partitions::rational(a, b);
        for &c in &GRID_C {
            let ok = verify_ndn_bound(seq, c, &d)?;
            ndn_verdicts.push((c, d.clone(), ok));
        }
    }

    let label = if seq.entries.windows(2).all(|w| w[0].1 == w[1].1) {
        GrowthLabel::Constant
    } else if let Some(c) = exp_witness(seq, &exp_verdicts) {
        GrowthLabel::AtMostExponential { c }
    } else if let Some((c, d)) = ndn_witness(&ndn_verdicts, &estimates) {
        GrowthLabel::SubFactorial { c, d }
    } else {
        GrowthLabel::Fast
    };
    Ok(GrowthReport {
        estimates,
        ndn_verdicts,
        exp_verdicts,
        label,
        heuristic: true,
    })
}

/// Exponential label: some grid constant bounds the sequence and the
/// consecutive ratios do not grow along the tail (log-concavity there,
/// checked as count_{n+2}·count_n ≤ count_{n+1}², exactly).
fn exp_witness(seq: &OrbitCountSequence, verdicts: &[(u64, bool)]) -> Option<u64> {
    let c = verdicts.iter().find(|(_, ok)| *ok).map(|(c, _)| *c)?;
    let counts: Vec<&BigUint> = seq.entries.iter().map(|(_, v)| v).collect();
    let tail = counts.len().saturating_sub(5);
    for w in counts[tail..].windows(3) {
        if w[2] * w[0] > w[1] * w[1] {
            return None;
        }
    }
    Some(c)
}

/// Sub-factorial label: some grid pair bounds the sequence and the d_n
/// estimates do not strictly increase along the tail (brackets separated).
fn ndn_witness(
    verdicts: &[(u64, Rational, bool)],
    estimates: &[ExponentEstimate],
) -> Option<(u64, Rational)> {
    let (c, d, _) = verdicts.iter().find(|(_, _, ok)| *ok)?;
    let tail = estimates.len().saturating_sub(4);
    let tail_estimates = &estimates[tail..];
    if tail_estimates.len() >= 3 {
        let strictly_increasing = tail_estimates.windows(2).all(|w| w[1].low > w[0].high());
        if strictly_increasing {
            return None;
        }
    }
    Some((*c, d.clone()))
}
