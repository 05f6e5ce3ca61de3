//! Towers, castles and their constructions.

mod certificate;
mod field;
mod kr;
mod lift;
mod tiles;

pub use certificate::{af_in_measure_certificate, ess_free_bound, quotient_castle, CertificateParams, CertificateReport, EssFreeReport};
pub use field::{Field, Table};
pub use kr::{kakutani_rokhlin, line_coordinate, return_time, skeleton_base, KrCastle};
pub use lift::{lift_castle, lift_shapes, LiftReport};
pub use tiles::{dihedral_tile_castle, tile_shape, TileParams, TileReport};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_positive_rational, ratio, Rational};
use crate::groups::{verify_folner, GroupDescriptor, GroupElement};
use crate::subshift::{CylinderSet, Sample};

/// A shape together with a base; the levels are `s·B` for `s` in the shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    pub shape: Vec<GroupElement>,
    pub base: CylinderSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerData {
    pub k: Vec<GroupElement>,
    pub eps: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Castle {
    pub towers: Vec<Tower>,
    pub folner: Option<FolnerData>,
}

impl Castle {
    pub fn new(towers: Vec<Tower>) -> Self {
        Castle { towers, folner: None }
    }

    pub fn with_folner(mut self, k: Vec<GroupElement>, eps: Rational) -> Self {
        self.folner = Some(FolnerData { k, eps });
        self
    }

    pub fn level_count(&self) -> usize {
        self.towers.iter().map(|t| t.shape.len()).sum()
    }

    pub fn to_json(&self, sample: &Sample) -> Value {
        let mut v = json!({
            "towers": self.towers.iter().map(|t| json!({
                "shape": t.shape.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
                "base": t.base.to_json(sample),
            })).collect::<Vec<_>>(),
        });
        if let Some(f) = &self.folner {
            v["folner"] = json!({
                "K": f.k.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
                "eps": format_rational(&f.eps),
            });
        }
        v
    }

    pub fn from_json(v: &Value, sample: &Sample, pointer: &str) -> Result<Self> {
        let group = &sample.word.group;
        let towers = v
            .get("towers")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::config(format!("{pointer}/towers"), "expected array"))?;
        let mut out = Vec::new();
        for (i, t) in towers.iter().enumerate() {
            let p = format!("{pointer}/towers/{i}");
            let shape = t
                .get("shape")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::config(format!("{p}/shape"), "expected array"))?
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    group
                        .parse_element(e)
                        .map_err(|err| Error::config(format!("{p}/shape/{j}"), err.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let base = CylinderSet::from_json(
                t.get("base").ok_or_else(|| Error::config(format!("{p}/base"), "missing"))?,
                sample,
                &format!("{p}/base"),
            )?;
            out.push(Tower { shape, base });
        }
        let mut castle = Castle::new(out);
        if let Some(f) = v.get("folner") {
            let k = f
                .get("K")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::config(format!("{pointer}/folner/K"), "expected array"))?
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    group
                        .parse_element(e)
                        .map_err(|err| Error::config(format!("{pointer}/folner/K/{j}"), err.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let eps = f
                .get("eps")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::config(format!("{pointer}/folner/eps"), "expected \"p/q\""))
                .and_then(|s| {
                    parse_positive_rational(s).map_err(|e| Error::config(format!("{pointer}/folner/eps"), e.to_string()))
                })?;
            castle = castle.with_folner(k, eps);
        }
        Ok(castle)
    }
}

/// Word lengths of `elems`, computed in a single grown ball.
pub fn word_lengths(group: &GroupDescriptor, elems: &[GroupElement]) -> Result<Vec<usize>> {
    for g in elems {
        group.kind.check(g)?;
    }
    let mut r = 4;
    loop {
        let b = group.ball(r)?;
        let ls: Option<Vec<usize>> = elems.iter().map(|g| b.length(g)).collect();
        if let Some(ls) = ls {
            return Ok(ls);
        }
        if b.size_at(r) == b.size_at(r - 1) {
            return Err(Error::precondition("shape element not generated"));
        }
        r *= 2;
    }
}

/// Maximal word length over all shapes.
pub fn shape_reach(group: &GroupDescriptor, castle: &Castle) -> Result<usize> {
    let all: Vec<GroupElement> = castle.towers.iter().flat_map(|t| t.shape.iter().cloned()).collect();
    Ok(word_lengths(group, &all)?.into_iter().max().unwrap_or(0))
}

/// Level of each window position, as `(tower, index in shape)`.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub level_of: Vec<Option<(u32, u32)>>,
    pub overlaps: Vec<Overlap>,
    pub overlap_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub position: GroupElement,
    pub first: (usize, GroupElement),
    pub second: (usize, GroupElement),
}

impl Assignment {
    pub fn uncovered(&self) -> usize {
        self.level_of.iter().filter(|l| l.is_none()).count()
    }

    pub fn remainder(&self) -> Rational {
        ratio(self.uncovered(), self.level_of.len())
    }

    /// Empirical measure of each level.
    pub fn level_counts(&self, castle: &Castle) -> Vec<Vec<usize>> {
        let mut c: Vec<Vec<usize>> = castle.towers.iter().map(|t| vec![0; t.shape.len()]).collect();
        for (i, l) in self.level_of.iter().flatten() {
            c[*i as usize][*l as usize] += 1;
        }
        c
    }
}

const MAX_LISTED_OVERLAPS: usize = 8;

/// Places every window position into the levels containing it:
/// `x_p ∈ s·B` iff `x_{p·s} ∈ B`.
pub fn assign_levels(field: &Field, castle: &Castle) -> Result<Assignment> {
    let n = field.window_len();
    let mut level_of: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut overlaps = Vec::new();
    let mut overlap_count = 0;
    for (i, tower) in castle.towers.iter().enumerate() {
        let flags = field.flags(&tower.base)?;
        for (l, s) in tower.shape.iter().enumerate() {
            for (p, slot) in level_of.iter_mut().enumerate() {
                if !flags[field.step(p, s)?] {
                    continue;
                }
                match slot {
                    None => *slot = Some((i as u32, l as u32)),
                    Some((i0, l0)) => {
                        overlap_count += 1;
                        if overlaps.len() < MAX_LISTED_OVERLAPS {
                            overlaps.push(Overlap {
                                position: field.element(p).clone(),
                                first: (*i0 as usize, castle.towers[*i0 as usize].shape[*l0 as usize].clone()),
                                second: (i, s.clone()),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(Assignment {
        level_of,
        overlaps,
        overlap_count,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CastleReport {
    /// Resolution at which level membership is decided.
    pub resolution: usize,
    pub atoms: usize,
    pub levels: usize,
    pub overlap_count: usize,
    pub overlaps: Vec<Overlap>,
    /// Atoms at `resolution` whose positions disagree on level membership.
    pub inconsistent_atoms: usize,
    pub remainder: Rational,
    pub defects: Option<Vec<Rational>>,
    pub eps: Option<Rational>,
    /// Minimum of `r_B − |s|` over all levels; level diameters are at most `2^-this`.
    pub diameter_exponent: usize,
}

impl CastleReport {
    pub fn disjoint(&self) -> bool {
        self.overlap_count == 0 && self.inconsistent_atoms == 0
    }

    pub fn max_defect(&self) -> Option<Rational> {
        self.defects.as_ref().and_then(|d| d.iter().max().copied())
    }

    pub fn folner_ok(&self) -> bool {
        match (&self.defects, &self.eps) {
            (Some(d), Some(e)) => d.iter().all(|x| x < e),
            _ => true,
        }
    }

    pub fn passed(&self) -> bool {
        self.disjoint() && self.folner_ok()
    }

    pub fn to_json(&self, sample: &Sample) -> Value {
        let overlap = |o: &Overlap| {
            let dom = sample.ball(self.resolution.min(4)).map(|b| sample.pattern(&o.position, b.elements()));
            json!({
                "position": o.position.to_json(),
                "first": {"tower": o.first.0, "level": o.first.1.to_json()},
                "second": {"tower": o.second.0, "level": o.second.1.to_json()},
                "atomPrefix": dom.map(|a| a.iter().map(|&s| sample.word.alphabet.name(s).to_string()).collect::<Vec<_>>().join(" ")).unwrap_or_default(),
            })
        };
        json!({
            "pass": self.passed(),
            "resolution": self.resolution,
            "atoms": self.atoms,
            "levels": self.levels,
            "overlapCount": self.overlap_count,
            "overlaps": self.overlaps.iter().map(overlap).collect::<Vec<_>>(),
            "inconsistentAtoms": self.inconsistent_atoms,
            "remainder": format_rational(&self.remainder),
            "defects": self.defects.as_ref().map(|d| d.iter().map(format_rational).collect::<Vec<_>>()),
            "eps": self.eps.as_ref().map(format_rational),
            "diameterExponent": self.diameter_exponent,
        })
    }
}

/// Exhaustive level-disjointness check, membership consistency at the
/// deciding resolution, remainder and (when present) Følner defects.
pub fn verify_castle(field: &Field, castle: &Castle) -> Result<CastleReport> {
    let group = &field.sample.word.group;
    let mut resolution = 0;
    let mut diameter_exponent = usize::MAX;
    for t in &castle.towers {
        let ls = word_lengths(group, &t.shape)?;
        let m = ls.iter().copied().max().unwrap_or(0);
        resolution = resolution.max(t.base.resolution + m);
        diameter_exponent = diameter_exponent.min(t.base.resolution.saturating_sub(m));
    }
    if castle.towers.is_empty() {
        diameter_exponent = 0;
    }
    let asg = assign_levels(field, castle)?;
    let table = field.table(resolution)?;
    let mut seen: Vec<Option<Option<(u32, u32)>>> = vec![None; table.atom_count()];
    let mut inconsistent = vec![false; table.atom_count()];
    for (p, l) in asg.level_of.iter().enumerate() {
        let id = table.id(p) as usize;
        match seen[id] {
            None => seen[id] = Some(*l),
            Some(prev) if prev != *l => inconsistent[id] = true,
            _ => {}
        }
    }
    let atoms = seen.iter().filter(|s| s.is_some()).count();
    let defects = match &castle.folner {
        Some(f) => Some(shape_defects(group, castle, &f.k)?),
        None => None,
    };
    Ok(CastleReport {
        resolution,
        atoms,
        levels: castle.level_count(),
        overlap_count: asg.overlap_count,
        overlaps: asg.overlaps.clone(),
        inconsistent_atoms: inconsistent.iter().filter(|&&b| b).count(),
        remainder: asg.remainder(),
        defects,
        eps: castle.folner.as_ref().map(|f| f.eps),
        diameter_exponent,
    })
}

/// `|K·S ∖ S|/|S|` per tower, computing each distinct shape once.
pub fn shape_defects(group: &GroupDescriptor, castle: &Castle, k: &[GroupElement]) -> Result<Vec<Rational>> {
    let mut cache: Vec<(&[GroupElement], Rational)> = Vec::new();
    let mut out = Vec::new();
    for t in &castle.towers {
        let d = match cache.iter().find(|(s, _)| *s == t.shape.as_slice()) {
            Some((_, d)) => *d,
            None => {
                let d = verify_folner(group, &t.shape, k)?;
                cache.push((&t.shape, d));
                d
            }
        };
        out.push(d);
    }
    Ok(out)
}

/// Empirical measure of the complement of all levels over the window.
pub fn remainder_measure(field: &Field, castle: &Castle) -> Result<Rational> {
    Ok(assign_levels(field, castle)?.remainder())
}

/// A field whose reach covers every shape of `castle`.
pub fn field_for<'a>(sample: &'a Sample, castle: &Castle) -> Result<Field<'a>> {
    Field::new(sample, shape_reach(&sample.word.group, castle)?)
}

/// Whether `2^-d < eps`.
pub fn diameter_below(d: usize, eps: &Rational) -> bool {
    if d >= 62 {
        return *eps > Rational::from_integer(0);
    }
    Rational::new(1, 1i64 << d) < *eps
}
