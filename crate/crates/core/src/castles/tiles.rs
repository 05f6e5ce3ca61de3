use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{word_lengths, Castle, Field, Tower};
use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement, GroupKind};
use crate::subshift::{Atom, Sample};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileParams {
    /// Spacing of the skeleton marks along each line.
    pub modulus: usize,
    /// Resolution of the marker atoms.
    pub marker_resolution: usize,
    /// Radius of the patterns compared to orient a tile.
    pub key_radius: usize,
    /// Tiles shorter than this are left in the remainder.
    pub min_len: usize,
}

impl TileParams {
    pub fn for_modulus(modulus: usize, min_len: usize) -> Self {
        TileParams {
            modulus,
            marker_resolution: modulus,
            key_radius: 2 * modulus,
            min_len,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileReport {
    pub params: TileParams,
    pub base_resolution: usize,
    /// Window positions that are marks.
    pub marks: usize,
    /// Window positions in tiles whose two orientations have equal keys.
    pub ties: usize,
    /// Window positions in tiles shorter than `min_len`.
    pub short: usize,
    /// Tile length ↦ number of window positions in such tiles.
    pub lengths: BTreeMap<usize, usize>,
}

impl TileReport {
    pub fn to_json(&self) -> Value {
        json!({
            "modulus": self.params.modulus,
            "markerResolution": self.params.marker_resolution,
            "keyRadius": self.params.key_radius,
            "minLength": self.params.min_len,
            "baseResolution": self.base_resolution,
            "marks": self.marks,
            "ties": self.ties,
            "short": self.short,
            "lengths": self.lengths.iter().map(|(l, c)| json!([l, c])).collect::<Vec<_>>(),
        })
    }
}

/// The D∞ generators `s`, `t` acting on the sample (lifted when the group
/// is an extension of D∞) and the finite kernel `H` (trivial for D∞).
fn dihedral_frame(group: &GroupDescriptor) -> Result<(GroupElement, GroupElement, Vec<GroupElement>)> {
    let s = GroupElement::dihedral(1, false);
    let t = GroupElement::dihedral(0, true);
    if matches!(group.kind, GroupKind::Dihedral) {
        return Ok((s, t, vec![group.identity()]));
    }
    let ext = group.extension().map_err(|_| Error::precondition("tile castles need D∞ or a finite extension of D∞"))?;
    if !matches!(ext.quotient.kind, GroupKind::Dihedral) {
        return Err(Error::precondition("extension quotient must be D∞"));
    }
    let hs = group
        .kernel_elements()?
        .ok_or_else(|| Error::precondition("extension kernel must be finite"))?;
    Ok((group.lift(&s)?, group.lift(&t)?, hs))
}

/// The shape `{s^i, t·s^i : 0 ≤ i < len}` in D∞, listed by position
/// along the tile: `s^i` and `t·s^{len−1−i}` occupy the same place in the
/// two orientations.
pub fn tile_shape(len: usize) -> Vec<GroupElement> {
    let len = len as i64;
    (0..len)
        .flat_map(|i| [GroupElement::dihedral(i, false), GroupElement::dihedral(-(len - 1 - i), true)])
        .collect()
}

/// A castle for the D∞-action whose towers are t-symmetric tiles.
///
/// Marks are the points whose marker atom (up to `H`, and up to `t`) comes
/// from a window position with line coordinate divisible by the modulus.
/// Each maximal run of non-marks along an `s`-line is a tile; a tile and
/// its `t`-image form one copy of the shape `{s^i, t s^i}`, based at the
/// end point with the smaller key. Shapes are D∞ elements; bases are
/// `H`-invariant sets of atoms of the sampled space.
pub fn dihedral_tile_castle(sample: &Sample, params: &TileParams) -> Result<(Castle, TileReport)> {
    let group = &sample.word.group;
    let (sl, tl, hs) = dihedral_frame(group)?;
    if params.modulus < 2 {
        return Err(Error::precondition("tile modulus must be at least 2"));
    }
    let h_inv: Vec<GroupElement> = hs.iter().map(|h| group.inv_u(h)).collect();
    let dh = word_lengths(group, &hs)?.into_iter().max().unwrap_or(0);
    let cap = 4 * params.modulus;
    let r0 = params.marker_resolution;
    let rho = params.key_radius;
    let field = Field::new(sample, 2 * cap + dh + 2)?;

    // Marker atoms from skeleton positions.
    let markers = super::skeleton_base(&field, params.modulus, r0)?;
    let p0 = field.flags(&markers)?;
    let n = field.len();
    let look = |i: usize, g: &GroupElement| field.index_of(&group.mul_u(field.element(i), g));
    let m0: Vec<Option<bool>> = (0..n)
        .map(|i| {
            let mut any = false;
            for h in &h_inv {
                any |= p0[look(i, h)?];
            }
            Some(any)
        })
        .collect();
    let mark: Vec<Option<bool>> = (0..n)
        .map(|i| Some(m0[i]? || m0[look(i, &tl)?]?))
        .collect();
    let up: Vec<Option<usize>> = (0..n).map(|i| look(i, &sl)).collect();
    let sl_inv = group.inv_u(&sl);
    let down: Vec<Option<usize>> = (0..n).map(|i| look(i, &sl_inv)).collect();
    let short_reach = || Error::ResourceCap {
        what: "tile length within the extended window".into(),
        limit: cap,
    };

    let keys = field.table(rho)?;
    let key = |i: usize| -> Result<&Atom> {
        let mut best: Option<&Atom> = None;
        for h in &h_inv {
            let a = keys.atom_at(look(i, h).ok_or_else(short_reach)?);
            if best.is_none_or(|b| a < b) {
                best = Some(a);
            }
        }
        Ok(best.expect("H nonempty"))
    };
    let walk = |p: usize, dir: &[Option<usize>]| -> Result<(usize, usize)> {
        // (steps to the first mark, index of the last non-mark)
        let mut q = p;
        for i in 1..=cap {
            let next = dir[q].ok_or_else(short_reach)?;
            if mark[next].ok_or_else(short_reach)? {
                return Ok((i, q));
            }
            q = next;
        }
        Err(short_reach())
    };

    let mut report = TileReport {
        params: params.clone(),
        base_resolution: 0,
        marks: 0,
        ties: 0,
        short: 0,
        lengths: BTreeMap::new(),
    };
    let mut bases: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut hmax = 0;
    for p in 0..field.window_len() {
        if mark[p].ok_or_else(short_reach)? {
            report.marks += 1;
            continue;
        }
        let (u, c) = walk(p, &up)?;
        let (d, _) = walk(p, &down)?;
        let len = u + d - 1;
        hmax = hmax.max(len);
        *report.lengths.entry(len).or_default() += 1;
        if len < params.min_len {
            report.short += 1;
            continue;
        }
        // c' = c·s^{-(L-1)}·t
        let mut c2 = c;
        for _ in 0..len - 1 {
            c2 = down[c2].ok_or_else(short_reach)?;
        }
        let c2 = look(c2, &tl).ok_or_else(short_reach)?;
        match key(c)?.cmp(key(c2)?) {
            std::cmp::Ordering::Equal => report.ties += 1,
            std::cmp::Ordering::Less => bases.entry(len).or_default().push(c),
            std::cmp::Ordering::Greater => bases.entry(len).or_default().push(c2),
        }
    }
    let r_b = hmax + dh + (r0 + 1).max(rho);
    report.base_resolution = r_b;
    let mut towers = Vec::new();
    for (len, mut qs) in bases {
        qs.sort_unstable();
        qs.dedup();
        towers.push(Tower {
            shape: tile_shape(len),
            base: field.atoms_of(qs, r_b)?,
        });
    }
    Ok((Castle::new(towers), report))
}
