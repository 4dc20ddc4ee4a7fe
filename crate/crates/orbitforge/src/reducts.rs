//! Constructive enumeration of first-order reducts of unary structures and
//! of covering reducts of strongly trivial covers.
//!
//! A reduct of a unary structure is determined by a partition of the orbits
//! into classes, each of derived cardinality one or infinite, together with
//! a subgroup of the cardinality-type-preserving permutations of the
//! classes. A covering reduct of a trivial cover is determined by a
//! subgroup H ≤ ∏Sym(F_i) together with a normal system N_i ⊲ H_i with
//! ∏N_i ≤ H. Both enumerations count up to interdefinability, i.e. equality
//! of the symbolic group data: conjugate but distinct subgroups H yield
//! distinct reducts.

use std::collections::BTreeSet;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::permgroup::{normal_subgroups, subgroups_above, Perm, PermGroup};
use crate::structures::{
    validate, Cardinal, ClassPartition, CoveringReduct, FiberedStructure, ReductOfUnary,
    StructureDescription, UnaryStructure,
};

fn ensure_valid(s: &StructureDescription) -> Result<()> {
    let violations = validate(s);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidStructure(violations.join("; ")))
    }
}

/// All first-order reducts of a unary structure, canonically ordered (by
/// class partition in restricted-growth order, then by action element set).
///
/// Partitions with a class of finite derived size other than one are
/// skipped: such a class cannot be a ∇-class, so finite orbits of size > 1
/// only occur merged into an infinite class.
pub fn enumerate_unary_reducts(u: &UnaryStructure, caps: &Caps) -> Result<Vec<ReductOfUnary>> {
    ensure_valid(&StructureDescription::Unary(u.clone()))?;
    let norbits = u.orbits.len();
    if norbits > caps.reduct_orbit_cap {
        return Err(Error::EnumerationCapExceeded {
            what: "unary reduct enumeration orbits",
            value: norbits as u64,
            cap: caps.reduct_orbit_cap as u64,
        });
    }
    let mut partitions: Vec<Vec<Vec<usize>>> = Vec::new();
    crate::partitions::for_each_rgs(norbits, |rgs, nblocks| {
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); nblocks];
        for (orbit, &block) in rgs.iter().enumerate() {
            classes[block].push(orbit);
        }
        partitions.push(classes);
    });
    let mut out = Vec::new();
    for classes in partitions {
        let mut types: Vec<Cardinal> = Vec::with_capacity(classes.len());
        let mut admissible = true;
        for class in &classes {
            let mut total = 0usize;
            let mut infinite = false;
            for &orbit in class {
                match u.orbits[orbit].1 {
                    Cardinal::Infinite => infinite = true,
                    Cardinal::Finite(n) => total += n,
                }
            }
            if infinite {
                types.push(Cardinal::Infinite);
            } else if total == 1 {
                types.push(Cardinal::Finite(1));
            } else {
                admissible = false;
                break;
            }
        }
        if !admissible {
            continue;
        }
        // the type stabilizer: arbitrary permutations within each type group
        let m = classes.len();
        let infinite_ixs: Vec<usize> = (0..m).filter(|&j| types[j].is_infinite()).collect();
        let singleton_ixs: Vec<usize> = (0..m).filter(|&j| !types[j].is_infinite()).collect();
        let mut stab_gens = Vec::new();
        for group in [&infinite_ixs, &singleton_ixs] {
            if group.len() >= 2 {
                let mut images: Vec<usize> = (0..m).collect();
                images[group[0]] = group[1];
                images[group[1]] = group[0];
                stab_gens.push(Perm::from_images(images)?);
                let mut images: Vec<usize> = (0..m).collect();
                for w in 0..group.len() {
                    images[group[w]] = group[(w + 1) % group.len()];
                }
                stab_gens.push(Perm::from_images(images)?);
            }
        }
        let stabilizer = PermGroup::new(m, stab_gens)?;
        let actions = subgroups_above(&PermGroup::trivial(m), &stabilizer, caps)?;
        let nabla = ClassPartition::new(
            classes
                .iter()
                .map(|class| {
                    class
                        .iter()
                        .map(|&orbit| u.orbits[orbit].0.clone())
                        .collect()
                })
                .collect(),
        );
        for action in actions {
            out.push(ReductOfUnary {
                base: u.clone(),
                nabla: nabla.clone(),
                action,
            });
        }
    }
    Ok(out)
}

/// Number of first-order reducts of a unary structure.
pub fn count_unary_reducts(u: &UnaryStructure, caps: &Caps) -> Result<usize> {
    Ok(enumerate_unary_reducts(u, caps)?.len())
}

/// All covering reducts of a strongly trivial cover: every pair of a
/// subgroup H ≤ ∏Sym(F_i) and a normal system (N_i) with N_i ⊲ H_i and
/// ∏N_i ≤ H, canonically ordered (by H element set, then by the N systems).
pub fn enumerate_covering_reducts(
    c: &FiberedStructure,
    caps: &Caps,
) -> Result<Vec<CoveringReduct>> {
    ensure_valid(&StructureDescription::Fibered(c.clone()))?;
    let sizes = c.fiber_sizes();
    let offsets = c.fiber_offsets();
    let total: usize = sizes.iter().sum();
    if total > caps.fiber_sum_cap {
        return Err(Error::EnumerationCapExceeded {
            what: "total fiber size",
            value: total as u64,
            cap: caps.fiber_sum_cap as u64,
        });
    }
    let mut ambient_order: u64 = 1;
    for &s in &sizes {
        for f in 2..=s as u64 {
            ambient_order = ambient_order.saturating_mul(f);
        }
    }
    if ambient_order > caps.fiber_order_cap {
        return Err(Error::EnumerationCapExceeded {
            what: "∏|F_i|!",
            value: ambient_order,
            cap: caps.fiber_order_cap,
        });
    }
    let ambient = PermGroup::direct_product(
        &sizes
            .iter()
            .map(|&s| PermGroup::symmetric(s))
            .collect::<Vec<_>>(),
    )
    .with_order_cap(caps.order_cap);
    let subgroups = subgroups_above(&PermGroup::trivial(total), &ambient, caps)?;
    let mut out = Vec::new();
    for h in subgroups {
        let h_elems = h.elements()?;
        let h_set: BTreeSet<Perm> = h_elems.iter().cloned().collect();
        // per-orbit projections and their normal subgroups
        let mut candidates: Vec<Vec<PermGroup>> = Vec::with_capacity(sizes.len());
        for i in 0..sizes.len() {
            let mut proj: BTreeSet<Perm> = BTreeSet::new();
            for e in &h_elems {
                proj.insert(e.restrict_block(offsets[i], sizes[i])?);
            }
            let h_i = PermGroup::new(sizes[i], proj.into_iter().collect())?;
            candidates.push(normal_subgroups(&h_i, caps)?);
        }
        // cartesian product over the per-orbit candidate lists
        let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
        for cand in &candidates {
            let mut next = Vec::new();
            for prefix in &stack {
                for ni in 0..cand.len() {
                    let mut ext = prefix.clone();
                    ext.push(ni);
                    next.push(ext);
                }
            }
            stack = next;
        }
        for choice in stack {
            let n_groups: Vec<PermGroup> = choice
                .iter()
                .enumerate()
                .map(|(i, &ni)| candidates[i][ni].clone())
                .collect();
            if product_contained_in(&n_groups, &sizes, &offsets, total, &h_set)? {
                out.push(CoveringReduct {
                    cover: c.clone(),
                    h_group: h.clone(),
                    n_groups,
                });
            }
        }
    }
    Ok(out)
}

/// Number of covering reducts of a strongly trivial cover.
pub fn count_covering_reducts(c: &FiberedStructure, caps: &Caps) -> Result<usize> {
    Ok(enumerate_covering_reducts(c, caps)?.len())
}

fn product_contained_in(
    n_groups: &[PermGroup],
    sizes: &[usize],
    offsets: &[usize],
    total: usize,
    h_set: &BTreeSet<Perm>,
) -> Result<bool> {
    let mut combos: Vec<Perm> = vec![Perm::identity(total)];
    for (i, n) in n_groups.iter().enumerate() {
        let elems = n.elements()?;
        let mut next = Vec::with_capacity(combos.len() * elems.len());
        for combo in &combos {
            for nu in &elems {
                let mut images = combo.images();
                for l in 0..sizes[i] {
                    images[offsets[i] + l] = offsets[i] + nu.apply(l);
                }
                next.push(Perm::from_images(images)?);
            }
        }
        combos = next;
    }
    Ok(combos.iter().all(|p| h_set.contains(p)))
}

/// One fiber's assigned label permutation in a kernel-membership query.
#[derive(Debug, Clone)]
pub struct FiberAssignment {
    pub orbit: String,
    pub base_index: usize,
    pub label_perm: Perm,
}

/// Decide whether a fiberwise assignment extends to an element of the
/// kernel N(H, N_1, …, N_k): within each orbit all assigned permutations
/// must lie in one coset of N_i in H_i, and one representative tuple must
/// lie in H (given ∏N_i ≤ H this settles every representative choice).
pub fn kernel_membership(r: &CoveringReduct, assignment: &[FiberAssignment]) -> Result<bool> {
    ensure_valid(&StructureDescription::Covering(r.clone()))?;
    let base = &r.cover.base;
    let sizes = r.cover.fiber_sizes();
    let offsets = r.cover.fiber_offsets();
    let total = r.cover.total_fiber_size();
    let mut per_orbit: Vec<Vec<&FiberAssignment>> = vec![Vec::new(); base.orbits.len()];
    let mut seen_fibers: BTreeSet<(usize, usize)> = BTreeSet::new();
    for a in assignment {
        let i = base
            .orbit_index(&a.orbit)
            .ok_or_else(|| Error::UnknownFiber(format!("orbit {:?} does not exist", a.orbit)))?;
        if a.label_perm.degree() != sizes[i] {
            return Err(Error::DegreeMismatch {
                expected: sizes[i],
                got: a.label_perm.degree(),
            });
        }
        if !seen_fibers.insert((i, a.base_index)) {
            return Err(Error::InvalidInput(format!(
                "fiber ({}, {}) assigned twice",
                a.orbit, a.base_index
            )));
        }
        per_orbit[i].push(a);
    }
    for (i, list) in per_orbit.iter().enumerate() {
        if list.is_empty() {
            return Err(Error::InvalidInput(format!(
                "assignment must cover at least one fiber of orbit {:?}",
                base.orbits[i].0
            )));
        }
    }
    // (a) each orbit's permutations lie in one coset of N_i inside H_i
    for (i, list) in per_orbit.iter().enumerate() {
        let h_i: BTreeSet<Perm> = r.h_projection(i)?.into_iter().collect();
        let n_i: BTreeSet<Perm> = r.n_elements(i)?.into_iter().collect();
        for a in list {
            if !h_i.contains(&a.label_perm) {
                return Ok(false);
            }
        }
        let first = &list[0].label_perm;
        for a in &list[1..] {
            if !n_i.contains(&a.label_perm.compose(&first.inverse())) {
                return Ok(false);
            }
        }
    }
    // (b) one representative per orbit combines to an element of H
    let mut images: Vec<usize> = (0..total).collect();
    for (i, list) in per_orbit.iter().enumerate() {
        let rep = &list[0].label_perm;
        for l in 0..sizes[i] {
            images[offsets[i] + l] = offsets[i] + rep.apply(l);
        }
    }
    let combined = Perm::from_images(images)?;
    let h_set: BTreeSet<Perm> = r.h_elements()?.into_iter().collect();
    Ok(h_set.contains(&combined))
}
