//! The symbolic data model: unary structures, their reducts, strongly
//! trivial finite covers (fibered structures), and covering reducts, plus
//! their canonical congruences and finite truncations.
//!
//! A `UnaryStructure` is a finite list of named orbits with cardinalities;
//! its automorphism group is the product of the symmetric groups on the
//! orbits. A `ReductOfUnary` adds a partition of the orbits into classes
//! (each of derived cardinality one or infinite) and a finite action group
//! on the classes: the represented group is ∏Sym(C_i) ⋊ A. A
//! `FiberedStructure` attaches a finite fiber label set to every orbit of a
//! base whose orbits are all singletons or infinite; the represented group
//! fixes labels and permutes base points. A `CoveringReduct` closes the
//! fibered structure under a kernel described by a subgroup H ≤ ∏Sym(F_i)
//! together with a normal system N_i ⊲ H_i.
//!
//! `truncate` realizes each of these as an explicit finite permutation
//! group on finitely many base points per orbit, which is what the
//! brute-force oracle runs on.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::permgroup::{Perm, PermGroup};

/// An orbit size: finite (≥ 1) or countably infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinal {
    Finite(usize),
    Infinite,
}

impl Cardinal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Cardinal::Infinite)
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self, Cardinal::Finite(1))
    }
}

impl std::fmt::Display for Cardinal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cardinal::Finite(n) => write!(f, "{n}"),
            Cardinal::Infinite => write!(f, "inf"),
        }
    }
}

/// A finite list of named orbits with cardinalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryStructure {
    pub orbits: Vec<(String, Cardinal)>,
}

impl UnaryStructure {
    pub fn new(orbits: Vec<(String, Cardinal)>) -> UnaryStructure {
        UnaryStructure { orbits }
    }

    /// Shorthand: orbits named o1, o2, … with the given sizes.
    pub fn with_sizes(sizes: &[Cardinal]) -> UnaryStructure {
        UnaryStructure {
            orbits: sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| (format!("o{}", i + 1), s))
                .collect(),
        }
    }

    pub fn orbit_index(&self, name: &str) -> Option<usize> {
        self.orbits.iter().position(|(n, _)| n == name)
    }

    pub fn size_of(&self, name: &str) -> Option<Cardinal> {
        self.orbit_index(name).map(|i| self.orbits[i].1)
    }

    /// All orbit sizes are 1 or infinite.
    pub fn is_starred(&self) -> bool {
        self.orbits
            .iter()
            .all(|(_, s)| s.is_infinite() || s.is_singleton())
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.orbits.is_empty() {
            out.push("unary structure must have at least one orbit".into());
        }
        let mut seen = BTreeSet::new();
        for (name, size) in &self.orbits {
            if name.is_empty() {
                out.push("orbit names must be nonempty".into());
            }
            if !seen.insert(name.clone()) {
                out.push(format!("duplicate orbit name {name:?}"));
            }
            if let Cardinal::Finite(0) = size {
                out.push(format!(
                    "orbit {name:?} has size 0; finite sizes must be >= 1"
                ));
            }
        }
        out
    }
}

/// A partition of the orbit names into classes, ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    pub classes: Vec<Vec<String>>,
}

impl ClassPartition {
    pub fn new(classes: Vec<Vec<String>>) -> ClassPartition {
        ClassPartition { classes }
    }

    /// Derived cardinality of one class: infinite if any member is, else the
    /// sum of the finite sizes.
    pub fn derived_size(&self, class: &[String], base: &UnaryStructure) -> Option<Cardinal> {
        let mut total = 0usize;
        for name in class {
            match base.size_of(name)? {
                Cardinal::Infinite => return Some(Cardinal::Infinite),
                Cardinal::Finite(n) => total += n,
            }
        }
        Some(Cardinal::Finite(total))
    }

    fn violations(&self, base: &UnaryStructure) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for class in &self.classes {
            if class.is_empty() {
                out.push("classes must be nonempty".into());
                continue;
            }
            for name in class {
                if base.orbit_index(name).is_none() {
                    out.push(format!("class member {name:?} is not an orbit of the base"));
                } else if !seen.insert(name) {
                    out.push(format!("orbit {name:?} appears in more than one class"));
                }
            }
            match self.derived_size(class, base) {
                Some(Cardinal::Finite(n)) if n != 1 => out.push(format!(
                    "class {class:?} has finite derived size {n}; every class must be a singleton or infinite"
                )),
                _ => {}
            }
        }
        for (name, _) in &base.orbits {
            if !seen.contains(name.as_str()) {
                out.push(format!("orbit {name:?} is not covered by any class"));
            }
        }
        out
    }
}

/// A first-order reduct of a unary structure: the class partition of its
/// finest finite-class-count congruence plus the finite action on classes.
/// Represents ∏Sym(C_i) ⋊ A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductOfUnary {
    pub base: UnaryStructure,
    pub nabla: ClassPartition,
    pub action: PermGroup,
}

impl ReductOfUnary {
    /// Derived cardinalities of the classes, in order.
    pub fn class_sizes(&self) -> Vec<Cardinal> {
        self.nabla
            .classes
            .iter()
            .map(|c| {
                self.nabla
                    .derived_size(c, &self.base)
                    .unwrap_or(Cardinal::Finite(0))
            })
            .collect()
    }
}

/// A strongly trivial finite cover: a base in which every orbit is a
/// singleton or infinite, with a finite ordered fiber label set per orbit.
/// The domain is the disjoint union of F_i × O_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberedStructure {
    pub base: UnaryStructure,
    /// One label list per base orbit, in base orbit order.
    pub fibers: Vec<Vec<String>>,
}

impl FiberedStructure {
    pub fn fiber_sizes(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.len()).collect()
    }

    pub fn total_fiber_size(&self) -> usize {
        self.fibers.iter().map(|f| f.len()).sum()
    }

    /// Offsets of each orbit's fiber block inside the disjoint union ⊔F_i.
    pub fn fiber_offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.fibers.len());
        let mut off = 0;
        for f in &self.fibers {
            out.push(off);
            off += f.len();
        }
        out
    }
}

/// A covering reduct of a strongly trivial cover: H ≤ ∏Sym(F_i) stored by
/// block-diagonal generators on ⊔F_i, plus one group N_i per orbit with
/// N_i normal in the i-th projection of H and ∏N_i contained in H.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringReduct {
    pub cover: FiberedStructure,
    pub h_group: PermGroup,
    pub n_groups: Vec<PermGroup>,
}

impl CoveringReduct {
    /// The trivial covering reduct (H and every N_i trivial) over a cover.
    pub fn trivial_over(cover: FiberedStructure) -> CoveringReduct {
        let total = cover.total_fiber_size();
        let n_groups = cover
            .fiber_sizes()
            .iter()
            .map(|&s| PermGroup::trivial(s))
            .collect();
        CoveringReduct {
            cover,
            h_group: PermGroup::trivial(total),
            n_groups,
        }
    }

    /// Elements of H as permutations of ⊔F_i.
    pub fn h_elements(&self) -> Result<Vec<Perm>> {
        self.h_group.elements()
    }

    /// Elements of the i-th projection H_i as permutations of F_i.
    pub fn h_projection(&self, i: usize) -> Result<Vec<Perm>> {
        let offsets = self.cover.fiber_offsets();
        let sizes = self.cover.fiber_sizes();
        let mut out = BTreeSet::new();
        for h in self.h_elements()? {
            out.insert(h.restrict_block(offsets[i], sizes[i])?);
        }
        Ok(out.into_iter().collect())
    }

    /// Elements of N_i as permutations of F_i.
    pub fn n_elements(&self, i: usize) -> Result<Vec<Perm>> {
        self.n_groups[i].elements()
    }

    /// Orbits of N_i on the label indices of F_i, each sorted, in order of
    /// their least element.
    pub fn n_label_orbits(&self, i: usize) -> Result<Vec<Vec<usize>>> {
        let size = self.cover.fibers[i].len();
        let gens = self.n_groups[i].generators();
        let mut seen = vec![false; size];
        let mut out = Vec::new();
        for start in 0..size {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut queue = vec![start];
            while let Some(x) = queue.pop() {
                for g in gens {
                    let y = g.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                        queue.push(y);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        Ok(out)
    }
}

/// Any of the representable structure kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureDescription {
    Unary(UnaryStructure),
    Reduct(ReductOfUnary),
    Fibered(FiberedStructure),
    Covering(CoveringReduct),
}

impl StructureDescription {
    /// The unary structure whose orbits index the symbolic domain parts.
    pub fn base_unary(&self) -> &UnaryStructure {
        match self {
            StructureDescription::Unary(u) => u,
            StructureDescription::Reduct(r) => &r.base,
            StructureDescription::Fibered(c) => &c.base,
            StructureDescription::Covering(c) => &c.cover.base,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            StructureDescription::Unary(_) => "unary",
            StructureDescription::Reduct(_) => "reduct_of_unary",
            StructureDescription::Fibered(_) => "trivial_cover",
            StructureDescription::Covering(_) => "covering_reduct",
        }
    }
}

/// One block of a symbolic partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicBlock {
    /// The union of the named orbits, as a single class.
    Orbits(Vec<String>),
    /// Every point of the named (finite) orbit is its own class.
    PointsOf(String),
    /// All points of one orbit carrying one of the listed fiber labels.
    Labels { orbit: String, labels: Vec<String> },
}

/// An equivalence relation on the symbolic domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicPartition {
    /// Every point is its own class.
    Equality,
    /// Blocks are the fibers π⁻¹(base point).
    Fibers,
    /// Explicitly listed classes.
    Classes(Vec<SymbolicBlock>),
}

impl SymbolicPartition {
    /// Number of classes, when finite.
    pub fn class_count(&self, s: &StructureDescription) -> Option<usize> {
        match self {
            SymbolicPartition::Equality | SymbolicPartition::Fibers => None,
            SymbolicPartition::Classes(blocks) => {
                let base = s.base_unary();
                let mut count = 0usize;
                for b in blocks {
                    match b {
                        SymbolicBlock::Orbits(_) | SymbolicBlock::Labels { .. } => count += 1,
                        SymbolicBlock::PointsOf(name) => match base.size_of(name)? {
                            Cardinal::Finite(n) => count += n,
                            Cardinal::Infinite => return None,
                        },
                    }
                }
                Some(count)
            }
        }
    }

    /// Restrict to the points of a truncation, as a domain partition.
    pub fn restrict_to(&self, t: &Truncation) -> crate::permgroup::DomainPartition {
        let n = t.point_labels.len();
        let mut key_of: Vec<(usize, usize)> = Vec::with_capacity(n);
        match self {
            SymbolicPartition::Equality => {
                for p in 0..n {
                    key_of.push((p, 0));
                }
            }
            SymbolicPartition::Fibers => {
                let mut ids: BTreeMap<(String, usize), usize> = BTreeMap::new();
                for pl in &t.point_labels {
                    let next = ids.len();
                    let id = *ids.entry((pl.orbit.clone(), pl.base_index)).or_insert(next);
                    key_of.push((id, 0));
                }
            }
            SymbolicPartition::Classes(blocks) => {
                for pl in &t.point_labels {
                    let mut key = None;
                    for (bi, b) in blocks.iter().enumerate() {
                        match b {
                            SymbolicBlock::Orbits(names) => {
                                if names.iter().any(|nm| nm == &pl.orbit) {
                                    key = Some((bi, 0));
                                }
                            }
                            SymbolicBlock::PointsOf(name) => {
                                if name == &pl.orbit {
                                    key = Some((bi, pl.base_index + 1));
                                }
                            }
                            SymbolicBlock::Labels { orbit, labels } => {
                                if orbit == &pl.orbit && labels.iter().any(|l| l == &pl.fiber) {
                                    key = Some((bi, 0));
                                }
                            }
                        }
                        if key.is_some() {
                            break;
                        }
                    }
                    key_of.push(key.expect("every point lies in some block"));
                }
            }
        }
        // renumber by first occurrence
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(n);
        for key in key_of {
            let next = ids.len();
            assignment.push(*ids.entry(key).or_insert(next));
        }
        crate::permgroup::DomainPartition::from_block_assignment(assignment)
            .expect("first-occurrence numbering is restricted-growth")
    }
}

/// Label of one point of a truncation: which orbit, which fiber label
/// (empty for structures without fibers), which base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointLabel {
    pub orbit: String,
    pub fiber: String,
    pub base_index: usize,
}

/// A finite permutation group realizing a structure on finitely many base
/// points per orbit.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub group: PermGroup,
    pub point_labels: Vec<PointLabel>,
    pub base_sizes: Vec<(String, usize)>,
}

impl Truncation {
    /// Project a permutation of the truncation points to its action on
    /// (orbit, base point) pairs, if it preserves the fiber partition.
    pub fn project_to_base(&self, g: &Perm) -> Result<Perm> {
        let mut fiber_ids: BTreeMap<(String, usize), usize> = BTreeMap::new();
        let mut id_of_point = Vec::with_capacity(self.point_labels.len());
        for pl in &self.point_labels {
            let next = fiber_ids.len();
            let id = *fiber_ids
                .entry((pl.orbit.clone(), pl.base_index))
                .or_insert(next);
            id_of_point.push(id);
        }
        let nfibers = fiber_ids.len();
        let mut images = vec![usize::MAX; nfibers];
        for p in 0..self.point_labels.len() {
            let from = id_of_point[p];
            let to = id_of_point[g.apply(p)];
            if images[from] == usize::MAX {
                images[from] = to;
            } else if images[from] != to {
                return Err(Error::InvalidInput(
                    "permutation does not preserve the fiber partition".into(),
                ));
            }
        }
        Perm::from_images(images)
    }
}

/// Check all representation invariants. An empty list means the structure
/// is valid; messages identify the violated invariant.
pub fn validate(s: &StructureDescription) -> Vec<String> {
    match s {
        StructureDescription::Unary(u) => u.violations(),
        StructureDescription::Reduct(r) => {
            let mut out = r.base.violations();
            out.extend(r.nabla.violations(&r.base));
            if r.action.degree() != r.nabla.classes.len() {
                out.push(format!(
                    "action degree {} does not match the number of classes {}",
                    r.action.degree(),
                    r.nabla.classes.len()
                ));
            } else {
                let sizes: Vec<Cardinal> = r.class_sizes();
                for g in r.action.generators() {
                    for (j, &size) in sizes.iter().enumerate() {
                        let image = sizes[g.apply(j)];
                        if size.is_infinite() != image.is_infinite() {
                            out.push(format!(
                                "action generator maps class {} (size {}) to class {} (size {}); \
                                 singletons must map to singletons and infinite classes to infinite classes",
                                j,
                                size,
                                g.apply(j),
                                image
                            ));
                        }
                    }
                }
                if let Err(e) = r.action.elements() {
                    out.push(format!("action group not materializable: {e}"));
                }
            }
            out
        }
        StructureDescription::Fibered(c) => fibered_violations(c),
        StructureDescription::Covering(c) => covering_violations(c),
    }
}

fn fibered_violations(c: &FiberedStructure) -> Vec<String> {
    let mut out = c.base.violations();
    if !c.base.is_starred() {
        out.push(
            "the base of a fibered structure must have only singleton or infinite orbits".into(),
        );
    }
    if c.fibers.len() != c.base.orbits.len() {
        out.push(format!(
            "expected one fiber label set per orbit ({}), found {}",
            c.base.orbits.len(),
            c.fibers.len()
        ));
        return out;
    }
    for (i, labels) in c.fibers.iter().enumerate() {
        if labels.is_empty() {
            out.push(format!("fiber label set of orbit {} is empty", i + 1));
        }
        let mut seen = BTreeSet::new();
        for l in labels {
            if !seen.insert(l) {
                out.push(format!("duplicate fiber label {l:?} in orbit {}", i + 1));
            }
        }
    }
    out
}

fn covering_violations(c: &CoveringReduct) -> Vec<String> {
    let mut out = fibered_violations(&c.cover);
    if !out.is_empty() {
        return out;
    }
    let sizes = c.cover.fiber_sizes();
    let offsets = c.cover.fiber_offsets();
    let total = c.cover.total_fiber_size();
    if c.h_group.degree() != total {
        out.push(format!(
            "H acts on {} points but the fibers have total size {total}",
            c.h_group.degree()
        ));
        return out;
    }
    if c.n_groups.len() != sizes.len() {
        out.push(format!(
            "expected one N per orbit ({}), found {}",
            sizes.len(),
            c.n_groups.len()
        ));
        return out;
    }
    for (i, n) in c.n_groups.iter().enumerate() {
        if n.degree() != sizes[i] {
            out.push(format!(
                "N_{} acts on {} points but fiber {} has size {}",
                i + 1,
                n.degree(),
                i + 1,
                sizes[i]
            ));
        }
    }
    if !out.is_empty() {
        return out;
    }
    for g in c.h_group.generators() {
        for (i, &off) in offsets.iter().enumerate() {
            if g.restrict_block(off, sizes[i]).is_err() {
                out.push(format!(
                    "an H generator does not preserve the fiber block of orbit {}",
                    i + 1
                ));
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let h_elems = match c.h_elements() {
        Ok(e) => e,
        Err(e) => {
            out.push(format!("H not materializable: {e}"));
            return out;
        }
    };
    let h_set: BTreeSet<Perm> = h_elems.iter().cloned().collect();
    // N_i normal in H_i, the i-th projection of H
    let mut n_sets: Vec<BTreeSet<Perm>> = Vec::new();
    for i in 0..sizes.len() {
        let n_set: BTreeSet<Perm> = match c.n_elements(i) {
            Ok(e) => e.into_iter().collect(),
            Err(e) => {
                out.push(format!("N_{} not materializable: {e}", i + 1));
                return out;
            }
        };
        let mut h_i = BTreeSet::new();
        for h in &h_elems {
            h_i.insert(h.restrict_block(offsets[i], sizes[i]).unwrap());
        }
        if !n_set.is_subset(&h_i) {
            out.push(format!(
                "N_{} ⊲ H_{} fails: N_{} not contained in H_{}",
                i + 1,
                i + 1,
                i + 1,
                i + 1
            ));
        } else {
            let normal = h_i
                .iter()
                .all(|h| n_set.iter().all(|nu| n_set.contains(&nu.conjugate_by(h))));
            if !normal {
                out.push(format!(
                    "N_{} ⊲ H_{} fails: N_{} not closed under conjugation by H_{}",
                    i + 1,
                    i + 1,
                    i + 1,
                    i + 1
                ));
            }
        }
        n_sets.push(n_set);
    }
    if !out.is_empty() {
        return out;
    }
    // ∏N_i contained in H, element-wise
    let mut combos: Vec<Perm> = vec![Perm::identity(total)];
    for (i, n_set) in n_sets.iter().enumerate() {
        let mut next = Vec::new();
        for combo in &combos {
            for nu in n_set {
                let mut images = combo.images();
                for l in 0..sizes[i] {
                    images[offsets[i] + l] = offsets[i] + nu.apply(l);
                }
                next.push(Perm::from_images(images).unwrap());
            }
        }
        combos = next;
    }
    if !combos.iter().all(|p| h_set.contains(p)) {
        out.push("∏N_i not contained in H".into());
    }
    out
}

fn ensure_valid(s: &StructureDescription) -> Result<()> {
    let violations = validate(s);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidStructure(violations.join("; ")))
    }
}

/// The finest congruence with finitely many classes, symbolically.
///
/// For a unary structure the classes are the infinite orbits and the
/// singletons inside finite orbits; for a reduct the stored partition; for
/// a fibered structure the label classes {l}×O_i; for a covering reduct the
/// label classes coarsened by the orbits of N_i (within one N_i-coset all
/// per-fiber actions move the N_i-orbits of labels the same way).
pub fn nabla(s: &StructureDescription) -> Result<SymbolicPartition> {
    ensure_valid(s)?;
    match s {
        StructureDescription::Unary(u) => {
            let mut blocks = Vec::new();
            for (name, size) in &u.orbits {
                match size {
                    Cardinal::Infinite | Cardinal::Finite(1) => {
                        blocks.push(SymbolicBlock::Orbits(vec![name.clone()]))
                    }
                    Cardinal::Finite(_) => blocks.push(SymbolicBlock::PointsOf(name.clone())),
                }
            }
            Ok(SymbolicPartition::Classes(blocks))
        }
        StructureDescription::Reduct(r) => Ok(SymbolicPartition::Classes(
            r.nabla
                .classes
                .iter()
                .map(|c| SymbolicBlock::Orbits(c.clone()))
                .collect(),
        )),
        StructureDescription::Fibered(c) => {
            let mut blocks = Vec::new();
            for (i, (name, _)) in c.base.orbits.iter().enumerate() {
                for label in &c.fibers[i] {
                    blocks.push(SymbolicBlock::Labels {
                        orbit: name.clone(),
                        labels: vec![label.clone()],
                    });
                }
            }
            Ok(SymbolicPartition::Classes(blocks))
        }
        StructureDescription::Covering(c) => {
            let mut blocks = Vec::new();
            for (i, (name, _)) in c.cover.base.orbits.iter().enumerate() {
                for orbit in c.n_label_orbits(i)? {
                    blocks.push(SymbolicBlock::Labels {
                        orbit: name.clone(),
                        labels: orbit
                            .into_iter()
                            .map(|l| c.cover.fibers[i][l].clone())
                            .collect(),
                    });
                }
            }
            Ok(SymbolicPartition::Classes(blocks))
        }
    }
}

/// The coarsest congruence with finite classes: equality for unary
/// structures and their reducts (the infinite symmetric factors separate
/// points), the fiber partition for covers.
pub fn delta(s: &StructureDescription) -> Result<SymbolicPartition> {
    ensure_valid(s)?;
    match s {
        StructureDescription::Unary(_) | StructureDescription::Reduct(_) => {
            Ok(SymbolicPartition::Equality)
        }
        StructureDescription::Fibered(_) | StructureDescription::Covering(_) => {
            Ok(SymbolicPartition::Fibers)
        }
    }
}

/// The (k, m) parameters: k is the maximum size of a Δ-class (the largest
/// fiber, or 1), m the number of ∇-classes of the quotient by Δ.
pub fn skm_parameters(s: &StructureDescription) -> Result<(usize, usize)> {
    ensure_valid(s)?;
    match s {
        StructureDescription::Unary(_) => {
            let m = nabla(s)?
                .class_count(s)
                .expect("unary nabla has finitely many classes");
            Ok((1, m))
        }
        StructureDescription::Reduct(r) => Ok((1, r.nabla.classes.len())),
        StructureDescription::Fibered(c) => {
            let k = c.fiber_sizes().into_iter().max().unwrap_or(1);
            Ok((k, c.base.orbits.len()))
        }
        StructureDescription::Covering(c) => {
            let k = c.cover.fiber_sizes().into_iter().max().unwrap_or(1);
            Ok((k, c.cover.base.orbits.len()))
        }
    }
}

/// Replace every finite orbit by an infinite one. For a reduct, singleton
/// classes thereby become infinite classes and the action carries over.
pub fn split_finite_orbits(s: &StructureDescription) -> Result<StructureDescription> {
    ensure_valid(s)?;
    let inflate = |u: &UnaryStructure| UnaryStructure {
        orbits: u
            .orbits
            .iter()
            .map(|(n, _)| (n.clone(), Cardinal::Infinite))
            .collect(),
    };
    match s {
        StructureDescription::Unary(u) => Ok(StructureDescription::Unary(inflate(u))),
        StructureDescription::Reduct(r) => Ok(StructureDescription::Reduct(ReductOfUnary {
            base: inflate(&r.base),
            nabla: r.nabla.clone(),
            action: r.action.clone(),
        })),
        _ => Err(Error::InvalidInput(
            "splitting finite orbits applies to unary structures and their reducts".into(),
        )),
    }
}

/// Realize the structure as a finite permutation group. Infinite orbits get
/// the requested number of base points; finite orbits must be requested at
/// exactly their size.
pub fn truncate(
    s: &StructureDescription,
    base_sizes: &BTreeMap<String, usize>,
) -> Result<Truncation> {
    ensure_valid(s)?;
    let base = s.base_unary();
    let mut sizes: Vec<usize> = Vec::with_capacity(base.orbits.len());
    for (name, card) in &base.orbits {
        let requested = *base_sizes
            .get(name)
            .ok_or_else(|| Error::SizeMismatch(format!("no base size given for orbit {name:?}")))?;
        match card {
            Cardinal::Finite(n) => {
                if requested != *n {
                    return Err(Error::SizeMismatch(format!(
                        "orbit {name:?} is finite of size {n}; requested {requested}"
                    )));
                }
            }
            Cardinal::Infinite => {
                if requested == 0 {
                    return Err(Error::SizeMismatch(format!(
                        "orbit {name:?} needs at least one base point"
                    )));
                }
            }
        }
        sizes.push(requested);
    }
    match s {
        StructureDescription::Unary(u) => truncate_unary(u, &sizes),
        StructureDescription::Reduct(r) => truncate_reduct(r, &sizes),
        StructureDescription::Fibered(c) => {
            truncate_cover(&CoveringReduct::trivial_over(c.clone()), &sizes)
        }
        StructureDescription::Covering(c) => truncate_cover(c, &sizes),
    }
}

/// Convenience: the same number of base points for every infinite orbit.
pub fn truncate_uniform(s: &StructureDescription, size: usize) -> Result<Truncation> {
    let base = s.base_unary();
    let mut sizes = BTreeMap::new();
    for (name, card) in &base.orbits {
        let n = match card {
            Cardinal::Finite(n) => *n,
            Cardinal::Infinite => size,
        };
        sizes.insert(name.clone(), n);
    }
    truncate(s, &sizes)
}

fn symmetric_gens_on(points: &[usize], degree: usize) -> Vec<Perm> {
    let mut gens = Vec::new();
    if points.len() >= 2 {
        let mut images: Vec<usize> = (0..degree).collect();
        images[points[0]] = points[1];
        images[points[1]] = points[0];
        gens.push(Perm::from_images(images).unwrap());
        let mut images: Vec<usize> = (0..degree).collect();
        for w in 0..points.len() {
            images[points[w]] = points[(w + 1) % points.len()];
        }
        gens.push(Perm::from_images(images).unwrap());
    }
    gens
}

fn unary_point_labels(u: &UnaryStructure, sizes: &[usize]) -> (Vec<PointLabel>, Vec<Vec<usize>>) {
    let mut point_labels = Vec::new();
    let mut orbit_points: Vec<Vec<usize>> = Vec::new();
    for (i, (name, _)) in u.orbits.iter().enumerate() {
        let start = point_labels.len();
        for b in 0..sizes[i] {
            point_labels.push(PointLabel {
                orbit: name.clone(),
                fiber: String::new(),
                base_index: b,
            });
        }
        orbit_points.push((start..start + sizes[i]).collect());
    }
    (point_labels, orbit_points)
}

fn truncate_unary(u: &UnaryStructure, sizes: &[usize]) -> Result<Truncation> {
    let (point_labels, orbit_points) = unary_point_labels(u, sizes);
    let degree = point_labels.len();
    let mut gens = Vec::new();
    for points in &orbit_points {
        gens.extend(symmetric_gens_on(points, degree));
    }
    Ok(Truncation {
        group: PermGroup::new(degree, gens)?,
        point_labels,
        base_sizes: u
            .orbits
            .iter()
            .zip(sizes)
            .map(|((n, _), &s)| (n.clone(), s))
            .collect(),
    })
}

fn truncate_reduct(r: &ReductOfUnary, sizes: &[usize]) -> Result<Truncation> {
    let u = &r.base;
    let (point_labels, orbit_points) = unary_point_labels(u, sizes);
    let degree = point_labels.len();
    // points of each class, member orbits in base order
    let mut class_points: Vec<Vec<usize>> = Vec::new();
    for class in &r.nabla.classes {
        let mut pts = Vec::new();
        for (i, (name, _)) in u.orbits.iter().enumerate() {
            if class.iter().any(|c| c == name) {
                pts.extend(orbit_points[i].iter().copied());
            }
        }
        class_points.push(pts);
    }
    for g in r.action.generators() {
        for (j, pts) in class_points.iter().enumerate() {
            if class_points[g.apply(j)].len() != pts.len() {
                return Err(Error::SizeMismatch(format!(
                    "classes {} and {} are related by the action but have truncation sizes {} and {}",
                    j,
                    g.apply(j),
                    pts.len(),
                    class_points[g.apply(j)].len()
                )));
            }
        }
    }
    let mut gens = Vec::new();
    for pts in &class_points {
        gens.extend(symmetric_gens_on(pts, degree));
    }
    for g in r.action.generators() {
        let mut images: Vec<usize> = (0..degree).collect();
        for (j, pts) in class_points.iter().enumerate() {
            let target = &class_points[g.apply(j)];
            for (w, &p) in pts.iter().enumerate() {
                images[p] = target[w];
            }
        }
        gens.push(Perm::from_images(images)?);
    }
    Ok(Truncation {
        group: PermGroup::new(degree, gens)?,
        point_labels,
        base_sizes: u
            .orbits
            .iter()
            .zip(sizes)
            .map(|((n, _), &s)| (n.clone(), s))
            .collect(),
    })
}

fn truncate_cover(c: &CoveringReduct, sizes: &[usize]) -> Result<Truncation> {
    let base = &c.cover.base;
    let fibers = &c.cover.fibers;
    let fsizes = c.cover.fiber_sizes();
    let offsets = c.cover.fiber_offsets();
    // layout: orbit-major, then base point, then label; fibers contiguous
    let mut point_labels = Vec::new();
    let mut orbit_start = Vec::new();
    for (i, (name, _)) in base.orbits.iter().enumerate() {
        orbit_start.push(point_labels.len());
        for b in 0..sizes[i] {
            for label in &fibers[i] {
                point_labels.push(PointLabel {
                    orbit: name.clone(),
                    fiber: label.clone(),
                    base_index: b,
                });
            }
        }
    }
    let degree = point_labels.len();
    let idx = |i: usize, l: usize, b: usize| orbit_start[i] + b * fsizes[i] + l;
    let mut gens = Vec::new();
    // base rearrangement: whole fibers move, labels fixed
    for i in 0..base.orbits.len() {
        if sizes[i] >= 2 {
            let mut images: Vec<usize> = (0..degree).collect();
            for l in 0..fsizes[i] {
                images[idx(i, l, 0)] = idx(i, l, 1);
                images[idx(i, l, 1)] = idx(i, l, 0);
            }
            gens.push(Perm::from_images(images)?);
            let mut images: Vec<usize> = (0..degree).collect();
            for b in 0..sizes[i] {
                for l in 0..fsizes[i] {
                    images[idx(i, l, b)] = idx(i, l, (b + 1) % sizes[i]);
                }
            }
            gens.push(Perm::from_images(images)?);
        }
    }
    // global kernel generators: one per H generator, applied to every fiber
    for h in c.h_group.generators() {
        let mut images: Vec<usize> = (0..degree).collect();
        for i in 0..base.orbits.len() {
            let hi = h.restrict_block(offsets[i], fsizes[i])?;
            for b in 0..sizes[i] {
                for l in 0..fsizes[i] {
                    images[idx(i, l, b)] = idx(i, hi.apply(l), b);
                }
            }
        }
        gens.push(Perm::from_images(images)?);
    }
    // local kernel generators: one per orbit per N_i generator, first fiber only
    for i in 0..base.orbits.len() {
        for nu in c.n_groups[i].generators() {
            let mut images: Vec<usize> = (0..degree).collect();
            for l in 0..fsizes[i] {
                images[idx(i, l, 0)] = idx(i, nu.apply(l), 0);
            }
            gens.push(Perm::from_images(images)?);
        }
    }
    Ok(Truncation {
        group: PermGroup::new(degree, gens)?,
        point_labels,
        base_sizes: base
            .orbits
            .iter()
            .zip(sizes)
            .map(|((n, _), &s)| (n.clone(), s))
            .collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::caps::Caps;

    fn inf() -> Cardinal {
        Cardinal::Infinite
    }

    fn fin(n: usize) -> Cardinal {
        Cardinal::Finite(n)
    }

    #[test]
    fn validate_accepts_simple_structures() {
        assert!(validate(&unary(&[inf()])).is_empty());
        assert!(validate(&unary(&[inf(), fin(1)])).is_empty());
        assert!(validate(&swap_reduct()).is_empty());
        assert!(validate(&StructureDescription::Fibered(fibered2())).is_empty());
        let w = covering2(vec![vec![1, 0]], vec![vec![1, 0]]);
        assert!(validate(&StructureDescription::Covering(w)).is_empty());
    }

    #[test]
    fn validate_rejects_finite_nonsingleton_class() {
        let base = UnaryStructure::with_sizes(&[fin(2), fin(2)]);
        let r = StructureDescription::Reduct(ReductOfUnary {
            base,
            nabla: ClassPartition::new(vec![vec!["o1".into(), "o2".into()]]),
            action: PermGroup::trivial(1),
        });
        let violations = validate(&r);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("singleton or infinite"));
    }

    #[test]
    fn validate_rejects_n_not_in_h() {
        // H trivial, N = Sym(F): N_i ⊲ H_i fails
        let c = covering2(vec![], vec![vec![1, 0]]);
        let violations = validate(&StructureDescription::Covering(c));
        assert_eq!(violations.len(), 1);
        assert!(violations[0].contains("N_1 ⊲ H_1"));
    }

    #[test]
    fn validate_rejects_product_n_outside_h() {
        // two orbits, H = diagonal S2, N_1 = S2: ∏N_i ⊄ H
        let cover = FiberedStructure {
            base: UnaryStructure::with_sizes(&[inf(), inf()]),
            fibers: vec![vec!["a".into(), "b".into()], vec!["a".into(), "b".into()]],
        };
        let diag = Perm::from_images(vec![1, 0, 3, 2]).unwrap();
        let c = CoveringReduct {
            cover,
            h_group: PermGroup::new(4, vec![diag]).unwrap(),
            n_groups: vec![
                PermGroup::new(2, vec![Perm::from_images(vec![1, 0]).unwrap()]).unwrap(),
                PermGroup::trivial(2),
            ],
        };
        let violations = validate(&StructureDescription::Covering(c));
        assert_eq!(violations, vec!["∏N_i not contained in H".to_string()]);
    }

    #[test]
    fn nabla_cases() {
        let s = unary(&[inf()]);
        assert_eq!(nabla(&s).unwrap().class_count(&s), Some(1));
        let s = unary(&[inf(), inf(), fin(1)]);
        assert_eq!(nabla(&s).unwrap().class_count(&s), Some(3));
        // a finite orbit of size 3 splits into singletons
        let s = unary(&[inf(), fin(3)]);
        assert_eq!(nabla(&s).unwrap().class_count(&s), Some(4));
        // trivial cover: one class per fiber label
        let two_fibers = StructureDescription::Fibered(FiberedStructure {
            base: UnaryStructure::with_sizes(&[inf(), inf()]),
            fibers: vec![
                vec!["a".into(), "b".into()],
                vec!["x".into(), "y".into(), "z".into()],
            ],
        });
        assert_eq!(
            nabla(&two_fibers).unwrap().class_count(&two_fibers),
            Some(5)
        );
        // wreath cover: N = Sym(F) merges the labels into one class
        let w = StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![vec![1, 0]]));
        assert_eq!(nabla(&w).unwrap().class_count(&w), Some(1));
        // H = S2, N = 1 keeps the two label classes
        let h = StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![]));
        assert_eq!(nabla(&h).unwrap().class_count(&h), Some(2));
    }

    #[test]
    fn delta_cases() {
        assert_eq!(
            delta(&unary(&[inf(), inf()])).unwrap(),
            SymbolicPartition::Equality
        );
        assert_eq!(delta(&swap_reduct()).unwrap(), SymbolicPartition::Equality);
        assert_eq!(
            delta(&StructureDescription::Fibered(fibered2())).unwrap(),
            SymbolicPartition::Fibers
        );
        let w = covering2(vec![vec![1, 0]], vec![vec![1, 0]]);
        assert_eq!(
            delta(&StructureDescription::Covering(w)).unwrap(),
            SymbolicPartition::Fibers
        );
    }

    #[test]
    fn skm_cases() {
        assert_eq!(skm_parameters(&unary(&[inf()])).unwrap(), (1, 1));
        let two_fibers = StructureDescription::Fibered(FiberedStructure {
            base: UnaryStructure::with_sizes(&[inf(), inf()]),
            fibers: vec![
                vec!["a".into(), "b".into()],
                vec!["x".into(), "y".into(), "z".into()],
            ],
        });
        assert_eq!(skm_parameters(&two_fibers).unwrap(), (3, 2));
        let merged = StructureDescription::Reduct(ReductOfUnary {
            base: UnaryStructure::with_sizes(&[inf(), inf()]),
            nabla: ClassPartition::new(vec![vec!["o1".into(), "o2".into()]]),
            action: PermGroup::trivial(1),
        });
        assert_eq!(skm_parameters(&merged).unwrap(), (1, 1));
    }

    #[test]
    fn split_finite_orbit_cases() {
        let s = unary(&[inf()]);
        assert_eq!(split_finite_orbits(&s).unwrap(), s);
        let s = unary(&[fin(1), fin(1), inf()]);
        assert_eq!(
            split_finite_orbits(&s).unwrap(),
            unary(&[inf(), inf(), inf()])
        );
        let r = StructureDescription::Reduct(ReductOfUnary {
            base: UnaryStructure::with_sizes(&[fin(1), inf()]),
            nabla: ClassPartition::new(vec![vec!["o1".into()], vec!["o2".into()]]),
            action: PermGroup::trivial(2),
        });
        let split = split_finite_orbits(&r).unwrap();
        assert!(validate(&split).is_empty());
        match &split {
            StructureDescription::Reduct(sr) => {
                assert!(sr.base.orbits.iter().all(|(_, c)| c.is_infinite()));
                assert_eq!(sr.nabla.classes.len(), 2);
            }
            _ => panic!("expected a reduct"),
        }
        // ∇-count unchanged when all finite orbits are singletons
        assert_eq!(
            nabla(&r).unwrap().class_count(&r),
            nabla(&split).unwrap().class_count(&split)
        );
    }

    #[test]
    fn truncate_unary_structures() {
        let t = truncate_uniform(&unary(&[inf()]), 4).unwrap();
        assert_eq!(t.group.degree(), 4);
        assert_eq!(t.group.order().unwrap(), 24);
        let t = truncate_uniform(&unary(&[inf(), fin(3)]), 4).unwrap();
        assert_eq!(t.group.degree(), 7);
        assert_eq!(t.group.order().unwrap(), 24 * 6);
    }

    #[test]
    fn truncate_fibered_and_covering() {
        let t = truncate_uniform(&StructureDescription::Fibered(fibered2()), 3).unwrap();
        assert_eq!(t.group.degree(), 6);
        assert_eq!(t.group.order().unwrap(), 6);
        // full wreath at base size 3: order 2^3 · 3!
        let w = covering2(vec![vec![1, 0]], vec![vec![1, 0]]);
        let t = truncate_uniform(&StructureDescription::Covering(w), 3).unwrap();
        assert_eq!(t.group.degree(), 6);
        assert_eq!(t.group.order().unwrap(), 48);
        // H = S2, N = 1: diagonal flip only, order 2 · 3!
        let h = covering2(vec![vec![1, 0]], vec![]);
        let t = truncate_uniform(&StructureDescription::Covering(h), 3).unwrap();
        assert_eq!(t.group.order().unwrap(), 12);
    }

    #[test]
    fn truncate_reduct_with_swap() {
        let t = truncate_uniform(&swap_reduct(), 3).unwrap();
        assert_eq!(t.group.degree(), 6);
        assert_eq!(t.group.order().unwrap(), 36 * 2);
    }

    #[test]
    fn truncate_rejects_size_mismatch() {
        let s = unary(&[fin(2)]);
        let mut sizes = BTreeMap::new();
        sizes.insert("o1".to_string(), 3);
        assert!(matches!(truncate(&s, &sizes), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn delta_restriction_is_invariant_partition() {
        let caps = Caps::default();
        let structures: Vec<StructureDescription> = vec![
            unary(&[inf(), fin(1)]),
            swap_reduct(),
            StructureDescription::Fibered(fibered2()),
            StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![])),
            StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![vec![1, 0]])),
        ];
        for s in &structures {
            let t = truncate_uniform(s, 3).unwrap();
            let part = delta(s).unwrap().restrict_to(&t);
            let invariant = t.group.invariant_partitions(&caps).unwrap().contains(&part);
            assert!(invariant, "delta must restrict to an invariant partition");
        }
    }

    #[test]
    fn covering_generators_project_to_base_group() {
        let w = StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![vec![1, 0]]));
        let t = truncate_uniform(&w, 3).unwrap();
        let base_t = truncate_uniform(&unary(&[inf()]), 3).unwrap();
        let base_elems: BTreeSet<Perm> = base_t.group.elements().unwrap().into_iter().collect();
        for g in t.group.generators() {
            let projected = t.project_to_base(g).unwrap();
            assert!(base_elems.contains(&projected));
        }
    }

    #[test]
    fn truncation_is_monotone() {
        // every element of the smaller truncation extends to an element of
        // the larger one agreeing on the shared points
        let structures: Vec<StructureDescription> = vec![
            unary(&[inf()]),
            swap_reduct(),
            StructureDescription::Fibered(fibered2()),
            StructureDescription::Covering(covering2(vec![vec![1, 0]], vec![vec![1, 0]])),
        ];
        for s in &structures {
            let small = truncate_uniform(s, 2).unwrap();
            let large = truncate_uniform(s, 3).unwrap();
            let mut shared = Vec::new();
            for pl in &small.point_labels {
                let pos = large
                    .point_labels
                    .iter()
                    .position(|q| q == pl)
                    .expect("small truncation points persist");
                shared.push(pos);
            }
            let small_elems = small.group.elements().unwrap();
            let large_elems = large.group.elements().unwrap();
            let mut restrictions: BTreeSet<Vec<usize>> = BTreeSet::new();
            for e in &large_elems {
                let maps_shared_into_shared = shared.iter().all(|&p| shared.contains(&e.apply(p)));
                if maps_shared_into_shared {
                    let restricted: Vec<usize> = shared
                        .iter()
                        .map(|&p| shared.iter().position(|&q| q == e.apply(p)).unwrap())
                        .collect();
                    restrictions.insert(restricted);
                }
            }
            for e in &small_elems {
                let images: Vec<usize> = (0..small.group.degree()).map(|p| e.apply(p)).collect();
                assert!(
                    restrictions.contains(&images),
                    "small-truncation element must extend"
                );
            }
        }
    }
}
