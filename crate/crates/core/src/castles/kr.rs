use std::collections::BTreeMap;

use super::{word_lengths, Castle, Field, Tower};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::subshift::{CylinderSet, Sample};

/// A first-return castle together with its heights.
#[derive(Clone, Debug)]
pub struct KrCastle {
    pub castle: Castle,
    /// Height of each tower, ascending; equal to the return time of its base.
    pub heights: Vec<usize>,
    /// Largest height searched before giving up.
    pub height_cap: usize,
}

/// The line coordinate of a position: `n` for `n ∈ ℤ` and for `(n, 0) ∈ D∞`,
/// taken from the left factor of a product, `None` otherwise.
pub fn line_coordinate(g: &GroupElement) -> Option<i64> {
    match g {
        GroupElement::Int(n) => Some(*n),
        GroupElement::Dihedral { n, r: false } => Some(*n),
        GroupElement::Pair(l, _) => line_coordinate(l),
        _ => None,
    }
}

/// Atoms at `resolution` of the window positions whose line coordinate is
/// divisible by `modulus`.
pub fn skeleton_base(field: &Field, modulus: usize, resolution: usize) -> Result<CylinderSet> {
    if modulus == 0 {
        return Err(Error::precondition("skeleton modulus must be positive"));
    }
    let picks: Vec<usize> = (0..field.window_len())
        .filter(|&p| line_coordinate(field.element(p)).is_some_and(|n| n.rem_euclid(modulus as i64) == 0))
        .collect();
    field.atoms_of(picks, resolution)
}

/// First return time of `x_p` to `base` under the ℤ-shift, by direct
/// evaluation: the least `k ≥ 1` with `x_{p−k} ∈ base`.
pub fn return_time(sample: &Sample, base: &CylinderSet, p: i64, cap: usize) -> Result<Option<usize>> {
    let dom = sample.ball(base.resolution)?;
    for k in 1..=cap {
        let a = sample.pattern(&GroupElement::Int(p - k as i64), dom.elements());
        if base.contains(&a) {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Kakutani–Rokhlin partition of the ℤ-action generated by `step`
/// (the shift by 1 for ℤ-words).
///
/// Every window position `x_p` sits at height `j` above the base point
/// `x_{p·σ^j}`, with `j` minimal; the towers collect base points by return
/// time `k` and have shapes `{σ^0, …, σ^{k−1}}`.
pub fn kakutani_rokhlin(sample: &Sample, base: &CylinderSet, step: Option<GroupElement>, max_height: usize) -> Result<KrCastle> {
    if base.is_empty() {
        return Err(Error::precondition("base must be nonempty"));
    }
    let group = &sample.word.group;
    let step = step.unwrap_or(GroupElement::Int(1));
    let step_len = word_lengths(group, std::slice::from_ref(&step))?[0].max(1);
    let back = group.inv(&step)?;
    let mut cap = 16.min(max_height.max(1));
    loop {
        match attempt(sample, base, &step, &back, step_len, cap)? {
            Some(out) => return Ok(out),
            None if cap >= max_height => {
                return Err(Error::ResourceCap {
                    what: "base return time within the window (base too small for the window)".into(),
                    limit: max_height,
                })
            }
            None => cap = (cap * 2).min(max_height),
        }
    }
}

fn attempt(
    sample: &Sample,
    base: &CylinderSet,
    step: &GroupElement,
    back: &GroupElement,
    step_len: usize,
    cap: usize,
) -> Result<Option<KrCastle>> {
    let field = Field::new(sample, 2 * cap * step_len)?;
    let flags = field.flags(base)?;
    let forward: Vec<Option<usize>> = (0..field.len()).map(|i| field.step(i, step).ok()).collect();
    let backward: Vec<Option<usize>> = (0..field.len()).map(|i| field.step(i, back).ok()).collect();
    let mut return_of: BTreeMap<usize, usize> = BTreeMap::new();
    for p in 0..field.window_len() {
        let mut q = p;
        let mut j = 0;
        while !flags[q] {
            j += 1;
            match forward[q] {
                Some(n) if j < cap => q = n,
                _ => return Ok(None),
            }
        }
        if return_of.contains_key(&q) {
            continue;
        }
        let mut y = q;
        let mut k = 0;
        loop {
            k += 1;
            match backward[y] {
                Some(n) if k <= cap => y = n,
                _ => return Ok(None),
            }
            if flags[y] {
                break;
            }
        }
        return_of.insert(q, k);
    }
    let hmax = return_of.values().copied().max().unwrap_or(1);
    let r_b = base.resolution + hmax * step_len;
    let mut by_height: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&q, &k) in &return_of {
        by_height.entry(k).or_default().push(q);
    }
    let group = &sample.word.group;
    let mut towers = Vec::new();
    let mut heights = Vec::new();
    for (k, qs) in by_height {
        let mut shape = vec![group.identity()];
        for _ in 1..k {
            let last = shape.last().expect("nonempty");
            shape.push(group.mul_u(last, step));
        }
        towers.push(Tower {
            shape,
            base: field.atoms_of(qs, r_b)?,
        });
        heights.push(k);
    }
    Ok(Some(KrCastle {
        castle: Castle::new(towers),
        heights,
        height_cap: cap,
    }))
}
