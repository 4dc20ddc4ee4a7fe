//! Explicit finite permutation groups: the brute-force oracle.
//!
//! Everything here is exhaustive: element sets are materialized,
//! orbits are flood-filled over the acted-on set, and subgroup lattices are
//! found by closure saturation. Degrees stay small (≤ ~24), so transparency
//! wins over stabilizer-chain cleverness; explicit caps make the budget
//! visible instead of silently degrading.

use std::collections::{BTreeMap, BTreeSet};

use num::bigint::BigUint;

use crate::caps::Caps;
use crate::error::{Error, Result};

/// A permutation of {0,…,d−1}, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<u16>,
}

impl Perm {
    pub fn identity(degree: usize) -> Perm {
        Perm {
            images: (0..degree as u16).collect(),
        }
    }

    /// Build from an image array, verifying bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || seen[x] {
                return Err(Error::InvalidInput(format!(
                    "image array {images:?} is not a permutation of 0..{d}"
                )));
            }
            seen[x] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|x| x as u16).collect(),
        })
    }

    /// Build from disjoint cycles over a given degree.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut images: Vec<usize> = (0..degree).collect();
        for cycle in cycles {
            for i in 0..cycle.len() {
                let from = cycle[i];
                let to = cycle[(i + 1) % cycle.len()];
                if from >= degree || to >= degree {
                    return Err(Error::InvalidInput(format!(
                        "cycle point out of range for degree {degree}"
                    )));
                }
                images[from] = to;
            }
        }
        Perm::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    /// self ∘ other: apply `other` first, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: other
                .images
                .iter()
                .map(|&x| self.images[x as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u16;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    /// Conjugate self by g: g ∘ self ∘ g⁻¹.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.compose(self).compose(&g.inverse())
    }

    /// Restriction to a block of consecutive points, renumbered from 0.
    /// The block must be preserved setwise.
    pub fn restrict_block(&self, start: usize, len: usize) -> Result<Perm> {
        let mut images = Vec::with_capacity(len);
        for p in start..start + len {
            let q = self.apply(p);
            if q < start || q >= start + len {
                return Err(Error::InvalidInput(format!(
                    "permutation does not preserve block {start}..{}",
                    start + len
                )));
            }
            images.push(q - start);
        }
        Perm::from_images(images)
    }
}

/// A finite permutation group given by generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    order_cap: u64,
}

pub const DEFAULT_ORDER_CAP: u64 = 1_000_000;

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<PermGroup> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: g.degree(),
                });
            }
        }
        Ok(PermGroup {
            degree,
            generators,
            order_cap: DEFAULT_ORDER_CAP,
        })
    }

    pub fn with_order_cap(mut self, cap: u64) -> PermGroup {
        self.order_cap = cap;
        self
    }

    pub fn trivial(degree: usize) -> PermGroup {
        PermGroup::new(degree, vec![]).expect("no generators to mismatch")
    }

    /// Full symmetric group on 0..degree.
    pub fn symmetric(degree: usize) -> PermGroup {
        let mut gens = Vec::new();
        if degree >= 2 {
            gens.push(Perm::from_cycles(degree, &[vec![0, 1]]).unwrap());
            gens.push(Perm::from_cycles(degree, &[(0..degree).collect()]).unwrap());
        }
        PermGroup::new(degree, gens).unwrap()
    }

    pub fn cyclic(degree: usize) -> PermGroup {
        let mut gens = Vec::new();
        if degree >= 2 {
            gens.push(Perm::from_cycles(degree, &[(0..degree).collect()]).unwrap());
        }
        PermGroup::new(degree, gens).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order_cap(&self) -> u64 {
        self.order_cap
    }

    /// The full element set in canonical sorted order (lexicographic on
    /// image arrays), closed under composition and inverse.
    pub fn elements(&self) -> Result<Vec<Perm>> {
        let set = closure_of(&self.generators, self.degree, self.order_cap)?;
        Ok(set.into_iter().collect())
    }

    pub fn order(&self) -> Result<u64> {
        Ok(self.elements()?.len() as u64)
    }

    pub fn contains(&self, p: &Perm) -> Result<bool> {
        let set = closure_of(&self.generators, self.degree, self.order_cap)?;
        Ok(set.contains(p))
    }

    /// Number of orbits of the componentwise action on injective n-tuples.
    pub fn orbit_count_injective(&self, n: usize, caps: &Caps) -> Result<BigUint> {
        if n > self.degree {
            return Err(Error::InvalidInput(format!(
                "injective {n}-tuples need degree >= {n}, have {}",
                self.degree
            )));
        }
        self.count_tuple_orbits(n, true, caps)
    }

    /// Number of orbits of the action on all n-tuples.
    pub fn orbit_count_tuples(&self, n: usize, caps: &Caps) -> Result<BigUint> {
        self.count_tuple_orbits(n, false, caps)
    }

    fn count_tuple_orbits(&self, n: usize, injective: bool, caps: &Caps) -> Result<BigUint> {
        let d = self.degree;
        if n == 0 {
            return Ok(BigUint::from(1u32));
        }
        // total encoding space d^n must fit the work budget
        let mut space: u64 = 1;
        for _ in 0..n {
            space = space.checked_mul(d as u64).ok_or(Error::WorkCapExceeded {
                what: "tuple orbit enumeration",
                cap: caps.work_cap,
            })?;
            if space > caps.work_cap {
                return Err(Error::WorkCapExceeded {
                    what: "tuple orbit enumeration",
                    cap: caps.work_cap,
                });
            }
        }
        let mut state = TupleOrbitScan {
            d,
            n,
            gens: &self.generators,
            visited: BitSet::new(space as usize),
            steps: 0,
            work_cap: caps.work_cap,
            count: 0,
            queue: Vec::new(),
            tuple: vec![0usize; n],
        };
        if injective {
            let mut used = vec![false; d];
            state.injective_seeds(0, 0, 1, &mut used)?;
        } else {
            for code in 0..space {
                state.flood(code)?;
            }
        }
        Ok(BigUint::from(state.count))
    }

    /// Number of orbits of the action on n-element subsets.
    pub fn orbit_count_subsets(&self, n: usize, caps: &Caps) -> Result<BigUint> {
        if n > self.degree {
            return Err(Error::InvalidInput(format!(
                "{n}-subsets need degree >= {n}, have {}",
                self.degree
            )));
        }
        let total = crate::util::binomial(self.degree, n);
        if total > BigUint::from(caps.work_cap) {
            return Err(Error::WorkCapExceeded {
                what: "subset orbit enumeration",
                cap: caps.work_cap,
            });
        }
        let mut visited: BTreeSet<Vec<u16>> = BTreeSet::new();
        let mut count = 0u64;
        let mut steps = 0u64;
        let mut seed: Vec<u16> = (0..n as u16).collect();
        loop {
            if !visited.contains(&seed) {
                count += 1;
                let mut queue = vec![seed.clone()];
                visited.insert(seed.clone());
                while let Some(s) = queue.pop() {
                    for g in &self.generators {
                        steps += 1;
                        if steps > caps.work_cap {
                            return Err(Error::WorkCapExceeded {
                                what: "subset orbit enumeration",
                                cap: caps.work_cap,
                            });
                        }
                        let mut image: Vec<u16> =
                            s.iter().map(|&p| g.apply(p as usize) as u16).collect();
                        image.sort_unstable();
                        if !visited.contains(&image) {
                            visited.insert(image.clone());
                            queue.push(image);
                        }
                    }
                }
            }
            if !next_combination(&mut seed, self.degree) {
                break;
            }
        }
        Ok(BigUint::from(count))
    }

    /// Group of all elements fixing each listed point, by filtering the
    /// element set; the filtered set is returned as the generator list.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermGroup> {
        for &p in points {
            if p >= self.degree {
                return Err(Error::InvalidInput(format!(
                    "stabilizer point {p} out of range for degree {}",
                    self.degree
                )));
            }
        }
        let elems = self.elements()?;
        let fixed: Vec<Perm> = elems
            .into_iter()
            .filter(|e| points.iter().all(|&p| e.apply(p) == p))
            .collect();
        Ok(PermGroup::new(self.degree, fixed)?.with_order_cap(self.order_cap))
    }

    /// All partitions of the domain preserved by every generator, including
    /// the equality partition and the one-block partition. A partition is
    /// preserved iff each generator permutes its blocks.
    pub fn invariant_partitions(&self, caps: &Caps) -> Result<Vec<DomainPartition>> {
        if self.degree > caps.partition_degree_cap {
            return Err(Error::EnumerationCapExceeded {
                what: "invariant-partition degree",
                value: self.degree as u64,
                cap: caps.partition_degree_cap as u64,
            });
        }
        let mut out = Vec::new();
        crate::partitions::for_each_rgs(self.degree, |rgs, nblocks| {
            if self.partition_is_invariant(rgs, nblocks) {
                out.push(DomainPartition {
                    block_of: rgs.to_vec(),
                    num_blocks: nblocks,
                });
            }
        });
        Ok(out)
    }

    fn partition_is_invariant(&self, block_of: &[usize], nblocks: usize) -> bool {
        // g permutes the blocks iff p ↦ block(g(p)) factors through block(p)
        for g in &self.generators {
            let mut image = vec![usize::MAX; nblocks];
            for (p, &b) in block_of.iter().enumerate() {
                let ib = block_of[g.apply(p)];
                if image[b] == usize::MAX {
                    image[b] = ib;
                } else if image[b] != ib {
                    return false;
                }
            }
        }
        true
    }

    /// Intransitive direct product on the disjoint union of the domains.
    pub fn direct_product(factors: &[PermGroup]) -> PermGroup {
        let degree: usize = factors.iter().map(|f| f.degree).sum();
        let mut gens = Vec::new();
        let mut offset = 0;
        for f in factors {
            for g in &f.generators {
                let mut images: Vec<usize> = (0..degree).collect();
                for p in 0..f.degree {
                    images[offset + p] = offset + g.apply(p);
                }
                gens.push(Perm::from_images(images).unwrap());
            }
            offset += f.degree;
        }
        PermGroup::new(degree, gens).unwrap()
    }

    /// Wreath-type imprimitive group on F × {0,…,m−1}: fiberwise copies of
    /// `bottom`'s generators on each block, plus `top`'s generators acting on
    /// the block coordinate. Point (l, b) is numbered b·|F| + l.
    pub fn imprimitive_wreath(bottom: &PermGroup, m: usize, top: &PermGroup) -> Result<PermGroup> {
        if top.degree != m {
            return Err(Error::DegreeMismatch {
                expected: m,
                got: top.degree,
            });
        }
        let f = bottom.degree;
        let degree = f * m;
        let mut gens = Vec::new();
        for b in 0..m {
            for g in &bottom.generators {
                let mut images: Vec<usize> = (0..degree).collect();
                for l in 0..f {
                    images[b * f + l] = b * f + g.apply(l);
                }
                gens.push(Perm::from_images(images).unwrap());
            }
        }
        for t in &top.generators {
            let mut images: Vec<usize> = (0..degree).collect();
            for b in 0..m {
                for l in 0..f {
                    images[b * f + l] = t.apply(b) * f + l;
                }
            }
            gens.push(Perm::from_images(images).unwrap());
        }
        PermGroup::new(degree, gens)
    }
}

/// A partition of the domain into blocks with contiguous ids from 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DomainPartition {
    block_of: Vec<usize>,
    num_blocks: usize,
}

impl DomainPartition {
    pub fn from_block_assignment(block_of: Vec<usize>) -> Result<DomainPartition> {
        let mut next = 0;
        for &b in &block_of {
            if b > next {
                return Err(Error::InvalidInput(
                    "block ids must appear in restricted-growth order".into(),
                ));
            }
            if b == next {
                next += 1;
            }
        }
        Ok(DomainPartition {
            block_of,
            num_blocks: next,
        })
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.block_of[point]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn num_points(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_equality(&self) -> bool {
        self.num_blocks == self.block_of.len()
    }

    pub fn is_one_block(&self) -> bool {
        self.num_blocks == 1 && !self.block_of.is_empty()
    }

    /// Common refinement with another partition of the same domain,
    /// renumbered to restricted-growth form.
    pub fn refine_with(&self, other: &DomainPartition) -> DomainPartition {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(self.block_of.len());
        for p in 0..self.block_of.len() {
            let key = (self.block_of[p], other.block_of[p]);
            let next = ids.len();
            let id = *ids.entry(key).or_insert(next);
            block_of.push(id);
        }
        let num_blocks = ids.len();
        DomainPartition {
            block_of,
            num_blocks,
        }
    }
}

/// Closure of a generator set under composition, as a sorted set. The
/// identity always belongs to the result.
pub fn closure_of(gens: &[Perm], degree: usize, order_cap: u64) -> Result<BTreeSet<Perm>> {
    match closure_bounded(gens, degree, order_cap)? {
        Some(set) => Ok(set.into_iter().collect()),
        None => unreachable!("closure_bounded without size bound always returns a set"),
    }
}

/// Closure with an optional early exit: `stop_above`, when hit, makes the
/// function return Ok(None). The subgroup search uses this: any group
/// larger than half the ambient must be the ambient itself.
fn closure_with_cutoff(
    gens: &[Perm],
    degree: usize,
    order_cap: u64,
    stop_above: Option<u64>,
) -> Result<Option<std::collections::HashSet<Perm>>> {
    let mut set = std::collections::HashSet::new();
    set.insert(Perm::identity(degree));
    let mut frontier: Vec<Perm> = vec![Perm::identity(degree)];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = g.compose(&x);
            if !set.contains(&y) {
                if set.len() as u64 >= order_cap {
                    return Err(Error::OrderCapExceeded { cap: order_cap });
                }
                if let Some(limit) = stop_above {
                    if set.len() as u64 >= limit {
                        return Ok(None);
                    }
                }
                set.insert(y.clone());
                frontier.push(y);
            }
        }
    }
    Ok(Some(set))
}

fn closure_bounded(
    gens: &[Perm],
    degree: usize,
    order_cap: u64,
) -> Result<Option<std::collections::HashSet<Perm>>> {
    closure_with_cutoff(gens, degree, order_cap, None)
}

/// Every subgroup H with base ≤ H ≤ ambient, found by repeatedly adjoining
/// coset representatives and closing, deduplicated by element set. Output is
/// sorted by (order, element list). Exponential in the index; the index cap
/// keeps that explicit.
pub fn subgroups_above(
    base: &PermGroup,
    ambient: &PermGroup,
    caps: &Caps,
) -> Result<Vec<PermGroup>> {
    if base.degree() != ambient.degree() {
        return Err(Error::DegreeMismatch {
            expected: ambient.degree(),
            got: base.degree(),
        });
    }
    let ambient_set: BTreeSet<Perm> =
        closure_of(ambient.generators(), ambient.degree(), ambient.order_cap())?;
    let base_set: BTreeSet<Perm> = closure_of(base.generators(), base.degree(), base.order_cap())?;
    if !base_set.is_subset(&ambient_set) {
        return Err(Error::NotASubgroup(
            "base is not contained in ambient".into(),
        ));
    }
    let index = (ambient_set.len() / base_set.len()) as u64;
    if index > caps.subgroup_index_cap {
        return Err(Error::IndexCapExceeded {
            index,
            cap: caps.subgroup_index_cap,
        });
    }
    let ambient_vec: Vec<Perm> = ambient_set.iter().cloned().collect();
    let ambient_size = ambient_vec.len() as u64;

    // BFS over intermediate subgroups; every subgroup between base and
    // ambient is reachable by adjoining one element at a time. A closure
    // that grows past half the ambient order must equal the ambient.
    let mut seen: BTreeSet<Vec<Perm>> = BTreeSet::new();
    let base_elems: Vec<Perm> = base_set.iter().cloned().collect();
    seen.insert(base_elems.clone());
    let mut queue: Vec<(Vec<Perm>, Vec<Perm>)> = vec![(base_elems, base.generators().to_vec())];
    let mut found: Vec<Vec<Perm>> = vec![queue[0].0.clone()];
    while let Some((helems, hgens)) = queue.pop() {
        if helems.len() as u64 == ambient_size {
            continue;
        }
        let hset: std::collections::HashSet<Perm> = helems.iter().cloned().collect();
        // one representative per coset of H in ambient
        let mut covered: std::collections::HashSet<Perm> = std::collections::HashSet::new();
        for g in &ambient_vec {
            if covered.contains(g) {
                continue;
            }
            for h in &helems {
                covered.insert(h.compose(g));
            }
            if hset.contains(g) {
                continue;
            }
            let mut gens = hgens.clone();
            gens.push(g.clone());
            let kelems: Vec<Perm> = match closure_with_cutoff(
                &gens,
                ambient.degree(),
                ambient.order_cap(),
                Some(ambient_size / 2),
            )? {
                Some(set) => {
                    let mut v: Vec<Perm> = set.into_iter().collect();
                    v.sort_unstable();
                    v
                }
                None => ambient_vec.clone(),
            };
            if seen.insert(kelems.clone()) {
                found.push(kelems.clone());
                queue.push((kelems, gens));
            }
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    found
        .into_iter()
        .map(|elems| {
            Ok(PermGroup::new(ambient.degree(), elems)?.with_order_cap(ambient.order_cap()))
        })
        .collect()
}

/// All normal subgroups of g: subgroup candidates closed under conjugation
/// by the generators.
pub fn normal_subgroups(g: &PermGroup, caps: &Caps) -> Result<Vec<PermGroup>> {
    let subs = subgroups_above(&PermGroup::trivial(g.degree()), g, caps)?;
    let mut out = Vec::new();
    for s in subs {
        let sset: BTreeSet<Perm> = s.generators().iter().cloned().collect();
        let normal = g
            .generators()
            .iter()
            .all(|gamma| sset.iter().all(|x| sset.contains(&x.conjugate_by(gamma))));
        if normal {
            out.push(s);
        }
    }
    Ok(out)
}

/// Shared state of the tuple-orbit flood fill. Tuples over 0..d of length n
/// are encoded as base-d numbers with position 0 least significant.
struct TupleOrbitScan<'a> {
    d: usize,
    n: usize,
    gens: &'a [Perm],
    visited: BitSet,
    steps: u64,
    work_cap: u64,
    count: u64,
    queue: Vec<u64>,
    tuple: Vec<usize>,
}

impl TupleOrbitScan<'_> {
    /// Visit injective seed tuples in lexicographic order.
    fn injective_seeds(
        &mut self,
        depth: usize,
        code: u64,
        mul: u64,
        used: &mut [bool],
    ) -> Result<()> {
        if depth == self.n {
            return self.flood(code);
        }
        for v in 0..self.d {
            if !used[v] {
                used[v] = true;
                self.injective_seeds(depth + 1, code + v as u64 * mul, mul * self.d as u64, used)?;
                used[v] = false;
            }
        }
        Ok(())
    }

    /// Count and mark the orbit of `code` if not seen yet.
    fn flood(&mut self, code: u64) -> Result<()> {
        if self.visited.get(code as usize) {
            return Ok(());
        }
        self.count += 1;
        self.visited.set(code as usize);
        self.queue.push(code);
        let d = self.d as u64;
        let n = self.n;
        let gens = self.gens;
        while let Some(x) = self.queue.pop() {
            let mut rest = x;
            for slot in self.tuple.iter_mut() {
                *slot = (rest % d) as usize;
                rest /= d;
            }
            for g in gens {
                self.steps += 1;
                if self.steps > self.work_cap {
                    return Err(Error::WorkCapExceeded {
                        what: "tuple orbit enumeration",
                        cap: self.work_cap,
                    });
                }
                let mut y: u64 = 0;
                for i in (0..n).rev() {
                    y = y * d + g.apply(self.tuple[i]) as u64;
                }
                if !self.visited.get(y as usize) {
                    self.visited.set(y as usize);
                    self.queue.push(y);
                }
            }
        }
        Ok(())
    }
}

fn next_combination(comb: &mut [u16], d: usize) -> bool {
    let n = comb.len();
    if n == 0 {
        return false;
    }
    let mut i = n;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        if (comb[i] as usize) < d - (n - i) {
            comb[i] += 1;
            for j in i + 1..n {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
}

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> BitSet {
        BitSet {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i >> 6] & (1u64 << (i & 63)) != 0
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1u64 << (i & 63);
    }
}
