//! The on-disk JSON description of structures, and the emitted group
//! format for truncations.
//!
//! Permutations always serialize as 0-based image arrays; the string "inf"
//! denotes the infinite cardinal. Unknown fields are rejected. Maps are
//! ordered (BTreeMap) so output is byte-deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbits::{OrbitCountSequence, SequenceKind};
use crate::permgroup::{Perm, PermGroup};
use crate::structures::{
    Cardinal, ClassPartition, CoveringReduct, FiberedStructure, ReductOfUnary,
    StructureDescription, Truncation, UnaryStructure,
};

/// Orbit size in a structure file: a positive integer or "inf".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeField {
    Finite(usize),
    Infinite(InfMarker),
}

/// The literal string "inf".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfMarker {
    #[serde(rename = "inf")]
    Inf,
}

impl From<Cardinal> for SizeField {
    fn from(c: Cardinal) -> SizeField {
        match c {
            Cardinal::Finite(n) => SizeField::Finite(n),
            Cardinal::Infinite => SizeField::Infinite(InfMarker::Inf),
        }
    }
}

impl From<SizeField> for Cardinal {
    fn from(s: SizeField) -> Cardinal {
        match s {
            SizeField::Finite(n) => Cardinal::Finite(n),
            SizeField::Infinite(_) => Cardinal::Infinite,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitField {
    pub name: String,
    pub size: SizeField,
}

/// The versioned structure description file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub version: u32,
    pub kind: String,
    pub orbits: Vec<OrbitField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action_generators: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibers: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_generators: Option<Vec<BTreeMap<String, Vec<usize>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_generators: Option<BTreeMap<String, Vec<Vec<usize>>>>,
}

impl StructureFile {
    pub fn parse(text: &str) -> Result<StructureFile> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad structure file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("structure files always serialize")
    }

    /// Decode into a structure description, checking kind/field consistency.
    /// The result still needs `validate` for the semantic invariants.
    pub fn decode(&self) -> Result<StructureDescription> {
        if self.version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported version {} (expected 1)",
                self.version
            )));
        }
        let unary = UnaryStructure::new(
            self.orbits
                .iter()
                .map(|o| (o.name.clone(), o.size.into()))
                .collect(),
        );
        let forbid = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::InvalidInput(format!(
                    "field {field:?} is not allowed for kind {:?}",
                    self.kind
                )))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "unary" => {
                forbid("classes", self.classes.is_some())?;
                forbid("action_generators", self.action_generators.is_some())?;
                forbid("fibers", self.fibers.is_some())?;
                forbid("h_generators", self.h_generators.is_some())?;
                forbid("n_generators", self.n_generators.is_some())?;
                Ok(StructureDescription::Unary(unary))
            }
            "reduct_of_unary" => {
                forbid("fibers", self.fibers.is_some())?;
                forbid("h_generators", self.h_generators.is_some())?;
                forbid("n_generators", self.n_generators.is_some())?;
                let classes = self.classes.clone().ok_or_else(|| {
                    Error::InvalidInput("kind \"reduct_of_unary\" needs \"classes\"".into())
                })?;
                let m = classes.len();
                let mut gens = Vec::new();
                for g in self.action_generators.clone().unwrap_or_default() {
                    gens.push(Perm::from_images(g)?);
                }
                Ok(StructureDescription::Reduct(ReductOfUnary {
                    base: unary,
                    nabla: ClassPartition::new(classes),
                    action: PermGroup::new(m, gens)?,
                }))
            }
            "trivial_cover" => {
                forbid("classes", self.classes.is_some())?;
                forbid("action_generators", self.action_generators.is_some())?;
                forbid("h_generators", self.h_generators.is_some())?;
                forbid("n_generators", self.n_generators.is_some())?;
                let fibered = self.decode_fibered(unary)?;
                Ok(StructureDescription::Fibered(fibered))
            }
            "covering_reduct" => {
                forbid("classes", self.classes.is_some())?;
                forbid("action_generators", self.action_generators.is_some())?;
                let cover = self.decode_fibered(unary)?;
                let sizes = cover.fiber_sizes();
                let offsets = cover.fiber_offsets();
                let total = cover.total_fiber_size();
                let mut h_gens = Vec::new();
                for gen_map in self.h_generators.clone().unwrap_or_default() {
                    let mut images: Vec<usize> = (0..total).collect();
                    for (orbit, perm) in gen_map {
                        let i = cover.base.orbit_index(&orbit).ok_or_else(|| {
                            Error::UnknownFiber(format!("h generator names unknown orbit {orbit:?}"))
                        })?;
                        if perm.len() != sizes[i] {
                            return Err(Error::DegreeMismatch {
                                expected: sizes[i],
                                got: perm.len(),
                            });
                        }
                        for (l, &img) in perm.iter().enumerate() {
                            if img >= sizes[i] {
                                return Err(Error::InvalidInput(format!(
                                    "label image {img} out of range for orbit {orbit:?}"
                                )));
                            }
                            images[offsets[i] + l] = offsets[i] + img;
                        }
                    }
                    h_gens.push(Perm::from_images(images)?);
                }
                let n_maps = self.n_generators.clone().unwrap_or_default();
                for orbit in n_maps.keys() {
                    if cover.base.orbit_index(orbit).is_none() {
                        return Err(Error::UnknownFiber(format!(
                            "n generator names unknown orbit {orbit:?}"
                        )));
                    }
                }
                let mut n_groups = Vec::new();
                for (i, (name, _)) in cover.base.orbits.iter().enumerate() {
                    let mut gens = Vec::new();
                    if let Some(perms) = n_maps.get(name) {
                        for p in perms {
                            if p.len() != sizes[i] {
                                return Err(Error::DegreeMismatch {
                                    expected: sizes[i],
                                    got: p.len(),
                                });
                            }
                            gens.push(Perm::from_images(p.clone())?);
                        }
                    }
                    n_groups.push(PermGroup::new(sizes[i], gens)?);
                }
                Ok(StructureDescription::Covering(CoveringReduct {
                    cover,
                    h_group: PermGroup::new(total, h_gens)?,
                    n_groups,
                }))
            }
            other => Err(Error::InvalidInput(format!(
                "unknown kind {other:?}; expected unary, reduct_of_unary, trivial_cover or covering_reduct"
            ))),
        }
    }

    fn decode_fibered(&self, base: UnaryStructure) -> Result<FiberedStructure> {
        let map = self
            .fibers
            .clone()
            .ok_or_else(|| Error::InvalidInput(format!("kind {:?} needs \"fibers\"", self.kind)))?;
        for orbit in map.keys() {
            if base.orbit_index(orbit).is_none() {
                return Err(Error::UnknownFiber(format!(
                    "fibers name unknown orbit {orbit:?}"
                )));
            }
        }
        let mut fibers = Vec::new();
        for (name, _) in &base.orbits {
            let labels = map.get(name).ok_or_else(|| {
                Error::InvalidInput(format!("orbit {name:?} has no fiber label set"))
            })?;
            fibers.push(labels.clone());
        }
        Ok(FiberedStructure { base, fibers })
    }

    /// Encode a structure description.
    pub fn encode(s: &StructureDescription) -> StructureFile {
        let orbits = |u: &UnaryStructure| {
            u.orbits
                .iter()
                .map(|(name, size)| OrbitField {
                    name: name.clone(),
                    size: (*size).into(),
                })
                .collect()
        };
        let mut file = StructureFile {
            version: 1,
            kind: s.kind_name().to_string(),
            orbits: orbits(s.base_unary()),
            classes: None,
            action_generators: None,
            fibers: None,
            h_generators: None,
            n_generators: None,
        };
        match s {
            StructureDescription::Unary(_) => {}
            StructureDescription::Reduct(r) => {
                file.classes = Some(r.nabla.classes.clone());
                if !r.action.generators().is_empty() {
                    file.action_generators =
                        Some(r.action.generators().iter().map(|g| g.images()).collect());
                }
            }
            StructureDescription::Fibered(c) => {
                file.fibers = Some(fiber_map(c));
            }
            StructureDescription::Covering(c) => {
                file.fibers = Some(fiber_map(&c.cover));
                let offsets = c.cover.fiber_offsets();
                let sizes = c.cover.fiber_sizes();
                let mut h_gens = Vec::new();
                for g in c.h_group.generators() {
                    let mut gen_map = BTreeMap::new();
                    for (i, (name, _)) in c.cover.base.orbits.iter().enumerate() {
                        let block = g
                            .restrict_block(offsets[i], sizes[i])
                            .expect("H generators preserve fiber blocks");
                        if !block.is_identity() {
                            gen_map.insert(name.clone(), block.images());
                        }
                    }
                    h_gens.push(gen_map);
                }
                if !h_gens.is_empty() {
                    file.h_generators = Some(h_gens);
                }
                let mut n_map = BTreeMap::new();
                for (i, (name, _)) in c.cover.base.orbits.iter().enumerate() {
                    let gens: Vec<Vec<usize>> = c.n_groups[i]
                        .generators()
                        .iter()
                        .map(|g| g.images())
                        .collect();
                    if !gens.is_empty() {
                        n_map.insert(name.clone(), gens);
                    }
                }
                if !n_map.is_empty() {
                    file.n_generators = Some(n_map);
                }
            }
        }
        file
    }
}

fn fiber_map(c: &FiberedStructure) -> BTreeMap<String, Vec<String>> {
    c.base
        .orbits
        .iter()
        .enumerate()
        .map(|(i, (name, _))| (name.clone(), c.fibers[i].clone()))
        .collect()
}

/// Emitted JSON form of a truncation: the group as {degree, generators}
/// plus the point labeling.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
    pub point_labels: Vec<PointLabelField>,
    pub base_sizes: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointLabelField {
    pub orbit: String,
    pub fiber: String,
    pub base_index: usize,
}

impl GroupFile {
    pub fn from_truncation(t: &Truncation) -> GroupFile {
        GroupFile {
            degree: t.group.degree(),
            generators: t.group.generators().iter().map(|g| g.images()).collect(),
            point_labels: t
                .point_labels
                .iter()
                .map(|pl| PointLabelField {
                    orbit: pl.orbit.clone(),
                    fiber: pl.fiber.clone(),
                    base_index: pl.base_index,
                })
                .collect(),
            base_sizes: t.base_sizes.iter().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group files always serialize")
    }
}

/// Parse a `n,count` CSV (optional header) into a sequence.
pub fn parse_sequence_csv(text: &str) -> Result<OrbitCountSequence> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.eq_ignore_ascii_case("n,count") {
            continue;
        }
        let (n_str, count_str) = line
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("line {}: expected n,count", lineno + 1)))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|e| Error::InvalidInput(format!("line {}: bad n: {e}", lineno + 1)))?;
        let count = count_str
            .trim()
            .parse::<num::bigint::BigUint>()
            .map_err(|e| Error::InvalidInput(format!("line {}: bad count: {e}", lineno + 1)))?;
        entries.push((n, count));
    }
    OrbitCountSequence::new(SequenceKind::Injective, entries)
}

/// Render a sequence as `n,count` CSV with header.
pub fn sequence_to_csv(seq: &OrbitCountSequence) -> String {
    let mut out = String::from("n,count\n");
    for (n, count) in &seq.entries {
        out.push_str(&format!("{n},{count}\n"));
    }
    out
}
