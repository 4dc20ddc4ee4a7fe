//! Exact symbolic orbit counting for represented structures, with
//! cross-validation against brute-force truncations.
//!
//! The injective count is computed per structure kind:
//!
//! * unary: an orbit of injective n-tuples is a map from positions to
//!   orbits, with at most `size` positions per finite orbit;
//! * reduct of unary: the same maps into classes (singleton classes take at
//!   most one position), counted up to the class action by Burnside
//!   averaging;
//! * trivial cover: per orbit, positions split into co-fiber blocks whose
//!   labels are distinct within a block; singleton base orbits force a
//!   single block;
//! * covering reduct: blocks carry injections into F_i counted up to N_i,
//!   and the per-orbit coset choices are tied together by Burnside over the
//!   image of H in ∏(H_i/N_i): an element of the kernel acts on every
//!   touched block of orbit i by some member of one coset of N_i, chosen
//!   freely per block, while untouched fibers in the infinite orbits absorb
//!   the remaining coset constraint.
//!
//! Every sum over a group is checked to divide exactly before the quotient
//! is taken.

use std::collections::{BTreeSet, HashMap};

use num::bigint::BigUint;
use num::traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::partitions::stirling2;
use crate::permgroup::Perm;
use crate::structures::{
    truncate_uniform, validate, Cardinal, CoveringReduct, StructureDescription,
};
use crate::util::exec;
use crate::util::{binomial, falling};

/// Which counting sequence to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Injective,
    All,
}

/// A list of (n, count) entries with strictly increasing n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitCountSequence {
    pub kind: SequenceKind,
    pub entries: Vec<(usize, BigUint)>,
}

impl OrbitCountSequence {
    pub fn new(kind: SequenceKind, entries: Vec<(usize, BigUint)>) -> Result<OrbitCountSequence> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidInput(
                    "sequence entries must have strictly increasing n".into(),
                ));
            }
        }
        Ok(OrbitCountSequence { kind, entries })
    }
}

fn ensure_valid(s: &StructureDescription) -> Result<()> {
    let violations = validate(s);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidStructure(violations.join("; ")))
    }
}

/// Exact number of injective n-orbits of the represented infinite group.
pub fn count_injective_orbits(s: &StructureDescription, n: usize, caps: &Caps) -> Result<BigUint> {
    ensure_valid(s)?;
    if n == 0 {
        return Ok(BigUint::one());
    }
    if n > caps.symbolic_n_cap {
        return Err(Error::EnumerationCapExceeded {
            what: "symbolic orbit counting",
            value: n as u64,
            cap: caps.symbolic_n_cap as u64,
        });
    }
    match s {
        StructureDescription::Unary(u) => {
            let parts: Vec<Vec<BigUint>> = u
                .orbits
                .iter()
                .map(|(_, size)| indicator_table(*size, n))
                .collect();
            Ok(combine_parts(&parts, n))
        }
        StructureDescription::Reduct(r) => {
            let action_elems = r.action.elements()?;
            let class_sizes = r.class_sizes();
            let mut total = BigUint::zero();
            for a in &action_elems {
                let parts: Vec<Vec<BigUint>> = class_sizes
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| a.apply(*j) == *j)
                    .map(|(_, size)| indicator_table(*size, n))
                    .collect();
                total += combine_parts(&parts, n);
            }
            exact_quotient(total, action_elems.len())
        }
        StructureDescription::Fibered(c) => {
            let parts: Vec<Vec<BigUint>> = c
                .base
                .orbits
                .iter()
                .enumerate()
                .map(|(i, (_, size))| {
                    let k = c.fibers[i].len();
                    match size {
                        // one base point: a single block with distinct labels
                        Cardinal::Finite(_) => (0..=n).map(|s| falling(k, s)).collect(),
                        Cardinal::Infinite => free_block_table(k, n),
                    }
                })
                .collect();
            Ok(combine_parts(&parts, n))
        }
        StructureDescription::Covering(c) => count_covering_injective(c, n),
    }
}

/// o_n from the injective counts through the equality-pattern decomposition
/// o_n = Σ_j S(n, j) · o^i_j.
pub fn count_orbits(s: &StructureDescription, n: usize, caps: &Caps) -> Result<BigUint> {
    ensure_valid(s)?;
    if n == 0 {
        return Ok(BigUint::one());
    }
    let mut total = BigUint::zero();
    for j in 1..=n {
        total += stirling2(n, j) * count_injective_orbits(s, j, caps)?;
    }
    Ok(total)
}

/// The counting sequence for n = 1..n_max.
pub fn orbit_sequence(
    s: &StructureDescription,
    n_max: usize,
    kind: SequenceKind,
    caps: &Caps,
) -> Result<OrbitCountSequence> {
    ensure_valid(s)?;
    let injective: Vec<Result<BigUint>> = exec::par_map((1..=n_max).collect(), |n| {
        count_injective_orbits(s, n, caps)
    });
    let mut inj = Vec::with_capacity(n_max);
    for r in injective {
        inj.push(r?);
    }
    let entries = match kind {
        SequenceKind::Injective => (1..=n_max).zip(inj).collect(),
        SequenceKind::All => (1..=n_max)
            .map(|n| {
                let mut total = BigUint::zero();
                for j in 1..=n {
                    total += stirling2(n, j) * &inj[j - 1];
                }
                (n, total)
            })
            .collect(),
    };
    OrbitCountSequence::new(kind, entries)
}

/// Outcome of comparing the symbolic count with two truncation counts.
#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub n: usize,
    /// Symbolic count, when the symbolic path supports the structure.
    pub symbolic: Option<BigUint>,
    /// Why the symbolic path was refused, if it was.
    pub refusal: Option<String>,
    pub base_size_small: usize,
    pub base_size_large: usize,
    pub count_small: BigUint,
    pub count_large: BigUint,
}

impl CrosscheckReport {
    /// The two truncation counts agree.
    pub fn stabilized(&self) -> bool {
        self.count_small == self.count_large
    }

    /// Symbolic equals the stabilized truncation count.
    pub fn matches(&self) -> Option<bool> {
        self.symbolic
            .as_ref()
            .map(|s| self.stabilized() && *s == self.count_small)
    }
}

/// Count injective n-orbits symbolically (when supported) and by truncation
/// brute force at base sizes 2n and 2n+margin per infinite orbit.
pub fn crosscheck(
    s: &StructureDescription,
    n: usize,
    margin: usize,
    caps: &Caps,
) -> Result<CrosscheckReport> {
    ensure_valid(s)?;
    let small = (2 * n).max(2);
    let large = small + margin.max(1);
    let (symbolic, refusal) = match count_injective_orbits(s, n, caps) {
        Ok(v) => (Some(v), None),
        Err(Error::UnsupportedSymbolic(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    let (count_small, count_large) = exec::join(
        || -> Result<BigUint> {
            let t = truncate_uniform(s, small)?;
            t.group.orbit_count_injective(n, caps)
        },
        || -> Result<BigUint> {
            let t = truncate_uniform(s, large)?;
            t.group.orbit_count_injective(n, caps)
        },
    );
    Ok(CrosscheckReport {
        n,
        symbolic,
        refusal,
        base_size_small: small,
        base_size_large: large,
        count_small: count_small?,
        count_large: count_large?,
    })
}

/// Table s ↦ [s ≤ capacity], the per-part weight for plain orbit labelings.
fn indicator_table(size: Cardinal, n: usize) -> Vec<BigUint> {
    let cap = match size {
        Cardinal::Finite(c) => c,
        Cardinal::Infinite => n,
    };
    (0..=n)
        .map(|s| {
            if s <= cap {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        })
        .collect()
}

/// Number of (co-fiber partition, labeling) configurations of s positions
/// over an infinite base orbit with fiber size k: blocks carry injections
/// into the label set. w(s) = Σ_b C(s−1, b−1)·k·(k−1)⋯(k−b+1)·w(s−b).
fn free_block_table(k: usize, n: usize) -> Vec<BigUint> {
    let mut w = vec![BigUint::zero(); n + 1];
    w[0] = BigUint::one();
    for s in 1..=n {
        let mut total = BigUint::zero();
        for b in 1..=k.min(s) {
            total += binomial(s - 1, b - 1) * falling(k, b) * &w[s - b];
        }
        w[s] = total;
    }
    w
}

/// Distribute n labeled positions over the parts and multiply the per-part
/// weights: Σ over (s_1,…,s_m) with Σ s_i = n of ∏ C(remaining, s_i)·W_i(s_i).
fn combine_parts(parts: &[Vec<BigUint>], n: usize) -> BigUint {
    let mut dp = vec![BigUint::zero(); n + 1];
    dp[0] = BigUint::one();
    for table in parts {
        let mut next = vec![BigUint::zero(); n + 1];
        for have in 0..=n {
            if dp[have].is_zero() {
                continue;
            }
            for s in 0..=(n - have) {
                if table[s].is_zero() {
                    continue;
                }
                let ways = binomial(n - have, s) * &table[s] * &dp[have];
                next[have + s] += ways;
            }
        }
        dp = next;
    }
    dp[n].clone()
}

fn exact_quotient(total: BigUint, divisor: usize) -> Result<BigUint> {
    let d = BigUint::from(divisor);
    let (q, r) = num::Integer::div_rem(&total, &d);
    if !r.is_zero() {
        return Err(Error::InvalidStructure(format!(
            "Burnside sum {total} is not divisible by the group order {divisor}"
        )));
    }
    Ok(q)
}

/// The covering-reduct path: Burnside over the image of H in ∏(H_i/N_i).
fn count_covering_injective(c: &CoveringReduct, n: usize) -> Result<BigUint> {
    let base = &c.cover.base;
    if base.orbits.iter().any(|(_, s)| !s.is_infinite()) {
        return Err(Error::UnsupportedSymbolic(
            "symbolic counting for covering reducts over bases with singleton orbits is refused; \
             use the truncation path"
                .into(),
        ));
    }
    let k = base.orbits.len();
    let offsets = c.cover.fiber_offsets();
    let sizes = c.cover.fiber_sizes();
    let h_elems = c.h_elements()?;
    let n_sets: Vec<Vec<Perm>> = (0..k)
        .map(|i| c.n_elements(i))
        .collect::<Result<Vec<_>>>()?;
    // representatives of H modulo ∏N_i, keyed by per-orbit coset
    let coset_key = |h: &Perm| -> Vec<BTreeSet<Perm>> {
        (0..k)
            .map(|i| {
                let hi = h.restrict_block(offsets[i], sizes[i]).unwrap();
                n_sets[i].iter().map(|nu| nu.compose(&hi)).collect()
            })
            .collect()
    };
    let mut reps: Vec<Perm> = Vec::new();
    let mut seen: Vec<Vec<BTreeSet<Perm>>> = Vec::new();
    for h in &h_elems {
        let key = coset_key(h);
        if !seen.contains(&key) {
            seen.push(key);
            reps.push(h.clone());
        }
    }
    let hbar_order = reps.len();
    let totals: Vec<BigUint> = exec::par_map(reps, |rep| {
        let parts: Vec<Vec<BigUint>> = (0..k)
            .map(|i| {
                let r_i = rep.restrict_block(offsets[i], sizes[i]).unwrap();
                twisted_block_table(sizes[i], &n_sets[i], &r_i, n)
            })
            .collect();
        combine_parts(&parts, n)
    });
    let mut total = BigUint::zero();
    for t in totals {
        total += t;
    }
    exact_quotient(total, hbar_order)
}

/// Per-orbit weight table for the covering path: configurations of s
/// positions into blocks, each block carrying an N-class of injections into
/// the fiber, restricted to classes fixed by the twist λ ↦ r∘λ.
fn twisted_block_table(fiber: usize, n_elems: &[Perm], r: &Perm, n: usize) -> Vec<BigUint> {
    // f[b] = number of fixed N-classes of injective b-arrangements
    let mut f = vec![BigUint::zero(); n + 1];
    f[0] = BigUint::one();
    #[allow(clippy::needless_range_loop)] // b is the block size, not just an index
    for b in 1..=fiber.min(n) {
        let mut class_of: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut class_reps: Vec<Vec<u8>> = Vec::new();
        let mut arrangement: Vec<u8> = Vec::new();
        enumerate_arrangements(fiber, b, &mut arrangement, &mut |arr| {
            if class_of.contains_key(arr) {
                return;
            }
            let id = class_reps.len();
            // flood the N-orbit of this arrangement
            let mut queue = vec![arr.to_vec()];
            class_of.insert(arr.to_vec(), id);
            while let Some(x) = queue.pop() {
                for nu in n_elems {
                    let y: Vec<u8> = x.iter().map(|&l| nu.apply(l as usize) as u8).collect();
                    if !class_of.contains_key(&y) {
                        class_of.insert(y.clone(), id);
                        queue.push(y);
                    }
                }
            }
            class_reps.push(arr.to_vec());
        });
        let mut fixed = 0u64;
        for rep in &class_reps {
            let twisted: Vec<u8> = rep.iter().map(|&l| r.apply(l as usize) as u8).collect();
            if class_of.get(&twisted) == class_of.get(rep) {
                fixed += 1;
            }
        }
        f[b] = BigUint::from(fixed);
    }
    // z[s] = Σ_b C(s−1, b−1)·f[b]·z[s−b]
    let mut z = vec![BigUint::zero(); n + 1];
    z[0] = BigUint::one();
    for s in 1..=n {
        let mut total = BigUint::zero();
        for b in 1..=fiber.min(s) {
            if f[b].is_zero() {
                continue;
            }
            total += binomial(s - 1, b - 1) * &f[b] * &z[s - b];
        }
        z[s] = total;
    }
    z
}

fn enumerate_arrangements(
    fiber: usize,
    b: usize,
    current: &mut Vec<u8>,
    visit: &mut impl FnMut(&[u8]),
) {
    if current.len() == b {
        visit(current);
        return;
    }
    for l in 0..fiber as u8 {
        if !current.contains(&l) {
            current.push(l);
            enumerate_arrangements(fiber, b, current, visit);
            current.pop();
        }
    }
}
