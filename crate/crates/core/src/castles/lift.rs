use serde_json::{json, Value};

use super::{assign_levels, word_lengths, Castle, Field, Tower};
use crate::error::{Error, Result};
use crate::exact::{format_rational, ratio, Rational};
use crate::groups::{GroupDescriptor, GroupElement};
use crate::subshift::Sample;

const MAX_TIE_RESOLUTION: usize = 1 << 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftReport {
    pub kernel_order: usize,
    /// Resolution at which `F`-translates are compared.
    pub tie_resolution: usize,
    pub base_resolution: usize,
    /// Empirical measure of the tie set `N`.
    pub tie_measure: Rational,
    /// `eps / Σ|S̃_i|`.
    pub tie_bound: Rational,
    pub quotient_remainder: Rational,
    pub remainder: Rational,
    /// Every uncovered point is uncovered in the quotient castle or lies in `s·N`.
    pub remainder_contained: bool,
    /// Within each `W_i`, every point off `N` lies in exactly one `f·C_i`
    /// and no point of `N` lies in any.
    pub orbit_partition: bool,
}

impl LiftReport {
    pub fn to_json(&self) -> Value {
        json!({
            "kernelOrder": self.kernel_order,
            "tieResolution": self.tie_resolution,
            "baseResolution": self.base_resolution,
            "tieMeasure": format_rational(&self.tie_measure),
            "tieBound": format_rational(&self.tie_bound),
            "quotientRemainder": format_rational(&self.quotient_remainder),
            "remainder": format_rational(&self.remainder),
            "remainderContained": self.remainder_contained,
            "orbitPartition": self.orbit_partition,
        })
    }
}

/// The finite kernel with the identity first, or `{e}` without an extension.
pub(crate) fn kernel(group: &GroupDescriptor) -> Result<Vec<GroupElement>> {
    if group.extension.is_none() {
        return Ok(vec![group.identity()]);
    }
    let mut hs = group
        .kernel_elements()?
        .ok_or_else(|| Error::precondition("kernel of the extension must be finite"))?;
    let e = group.identity();
    hs.retain(|h| *h != e);
    hs.insert(0, e);
    Ok(hs)
}

/// Replaces quotient shapes by their lifts (identity without an extension).
pub fn lift_shapes(group: &GroupDescriptor, castle: &Castle) -> Result<Castle> {
    if group.extension.is_none() {
        return Ok(castle.clone());
    }
    let towers = castle
        .towers
        .iter()
        .map(|t| {
            Ok(Tower {
                shape: t.shape.iter().map(|s| group.lift(s)).collect::<Result<_>>()?,
                base: t.base.clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Castle { towers, folner: None })
}

/// Lifts a castle of the quotient action through the finite kernel `F`.
///
/// The quotient castle has shapes in `G = Γ/F` and `F`-invariant bases
/// `W_i` in the sampled space. The lifted towers have shapes
/// `S̃_i = lift(S_i)·F` and bases `C_i`: the points of `W_i` whose pattern
/// at the tie resolution is strictly smaller than that of every other
/// `F`-translate. Points with a tie form `N`; the tie resolution grows until
/// `μ̂(N) ≤ eps / Σ|S̃_i|`.
pub fn lift_castle(sample: &Sample, quotient: &Castle, eps: Rational) -> Result<(Castle, LiftReport)> {
    let group = &sample.word.group;
    let hs = kernel(group)?;
    let h_inv: Vec<GroupElement> = hs.iter().map(|h| group.inv_u(h)).collect();
    let dh = word_lengths(group, &hs)?.into_iter().max().unwrap_or(0);
    let lifted_q = lift_shapes(group, quotient)?;
    let shapes: Vec<Vec<GroupElement>> = lifted_q
        .towers
        .iter()
        .map(|t| {
            t.shape
                .iter()
                .flat_map(|s| hs.iter().map(move |h| group.mul_u(s, h)))
                .collect()
        })
        .collect();
    let all: Vec<GroupElement> = shapes.iter().flatten().cloned().collect();
    let reach = word_lengths(group, &all)?.into_iter().max().unwrap_or(0);
    let field = Field::new(sample, reach + 2 * dh + 1)?;
    let n = field.len();
    let look = |i: usize, g: &GroupElement| field.index_of(&group.mul_u(field.element(i), g));

    let q_asg = assign_levels(&field, &lifted_q)?;
    let w_flags: Vec<Vec<bool>> = quotient.towers.iter().map(|t| field.flags(&t.base)).collect::<Result<_>>()?;
    for (i, f) in w_flags.iter().enumerate() {
        for p in 0..field.window_len() {
            for h in &h_inv[1..] {
                let q = look(p, h).expect("reach covers the kernel");
                if f[p] != f[q] {
                    return Err(Error::precondition_with(
                        format!("base of quotient tower {i} is not invariant under the kernel"),
                        field.element(p).to_string(),
                    ));
                }
            }
        }
    }

    let total: usize = shapes.iter().map(Vec::len).sum();
    let tie_bound = if total == 0 { eps } else { eps / Rational::from_integer(total as i64) };
    let wl = field.window_len();
    let mut rc = 1;
    let (tie, tie_measure) = loop {
        let t = field.table(rc)?;
        let fixed: Vec<Option<bool>> = (0..n)
            .map(|i| {
                let mut any = false;
                for h in &h_inv[1..] {
                    any |= t.id(look(i, h)?) == t.id(i);
                }
                Some(any)
            })
            .collect();
        // Saturate under F so that N is a union of F-orbits.
        let tie: Vec<Option<bool>> = (0..n)
            .map(|i| {
                let mut any = false;
                for h in &hs {
                    any |= fixed[look(i, h)?]?;
                }
                Some(any)
            })
            .collect();
        let count = tie[..wl].iter().filter(|x| **x == Some(true)).count();
        let mu = ratio(count, wl);
        if mu <= tie_bound {
            break (tie, mu);
        }
        field.clear_cache();
        if rc >= MAX_TIE_RESOLUTION {
            return Err(Error::ResourceCap {
                what: format!("fixed-point neighbourhood measure {} above {}", format_rational(&mu), format_rational(&tie_bound)),
                limit: rc,
            });
        }
        rc *= 2;
    };
    let t = field.table(rc)?;
    let min_rep: Vec<Option<bool>> = (0..n)
        .map(|i| {
            let mine = t.atom_at(i);
            let mut ok = tie[i] == Some(false);
            for h in &h_inv[1..] {
                ok &= mine < t.atom_at(look(i, h)?);
            }
            Some(ok)
        })
        .collect();

    let r_base = quotient
        .towers
        .iter()
        .map(|t| t.base.resolution)
        .max()
        .unwrap_or(0)
        .max(rc + dh);
    let mut towers = Vec::new();
    let mut orbit_partition = true;
    for (i, shape) in shapes.into_iter().enumerate() {
        let w = &w_flags[i];
        let picks: Vec<usize> = (0..n).filter(|&q| w[q] && min_rep[q] == Some(true)).collect();
        for p in 0..wl {
            if !w[p] {
                continue;
            }
            let hits = hs.iter().filter(|h| min_rep[look(p, h).expect("reach")] == Some(true)).count();
            let expected = usize::from(tie[p] != Some(true));
            orbit_partition &= hits == expected;
        }
        towers.push(Tower {
            shape,
            base: field.atoms_of(picks, r_base)?,
        });
    }
    let castle = Castle::new(towers);
    let asg = assign_levels(&field, &castle)?;
    let in_n = |p: usize| -> bool {
        castle
            .towers
            .iter()
            .flat_map(|t| t.shape.iter())
            .any(|s| look(p, s).is_some_and(|q| tie[q] == Some(true)))
    };
    let remainder_contained = (0..wl).all(|p| asg.level_of[p].is_some() || q_asg.level_of[p].is_none() || in_n(p));
    let report = LiftReport {
        kernel_order: hs.len(),
        tie_resolution: rc,
        base_resolution: r_base,
        tie_measure,
        tie_bound,
        quotient_remainder: q_asg.remainder(),
        remainder: asg.remainder(),
        remainder_contained,
        orbit_partition,
    };
    Ok((castle, report))
}
