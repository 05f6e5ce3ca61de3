//! Dynamical comparison: subequivalence witnesses between clopen sets,
//! witnesses extracted from castles and the upgrade of an
//! almost-finiteness-in-measure castle to an almost-finiteness witness.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::castles::{assign_levels, shape_reach, word_lengths, Assignment, Castle, Field};
use crate::error::{Error, Result};
use crate::exact::{format_rational, ratio, Rational};
use crate::groups::GroupElement;
use crate::subshift::{CylinderSet, Sample};

/// One piece `(V, s)`: the set `V` is moved to `s·V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub set: CylinderSet,
    pub translate: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SubequivalenceWitness {
    pub pieces: Vec<Piece>,
}

impl SubequivalenceWitness {
    pub fn to_json(&self, sample: &Sample) -> Value {
        Value::Array(
            self.pieces
                .iter()
                .map(|p| json!({"set": p.set.to_json(sample), "translate": p.translate.to_json()}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value, sample: &Sample, pointer: &str) -> Result<Self> {
        let items = v.as_array().ok_or_else(|| Error::config(pointer, "expected array of pieces"))?;
        let mut pieces = Vec::new();
        for (i, it) in items.iter().enumerate() {
            let p = format!("{pointer}/{i}");
            let set = CylinderSet::from_json(
                it.get("set").ok_or_else(|| Error::config(format!("{p}/set"), "missing"))?,
                sample,
                &format!("{p}/set"),
            )?;
            let translate = sample
                .word
                .group
                .parse_element(it.get("translate").ok_or_else(|| Error::config(format!("{p}/translate"), "missing"))?)
                .map_err(|e| Error::config(format!("{p}/translate"), e.to_string()))?;
            pieces.push(Piece { set, translate });
        }
        Ok(SubequivalenceWitness { pieces })
    }
}

/// Result of re-checking a witness over the sampled window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubequivalenceCheck {
    /// A source point outside every piece.
    pub uncovered: Option<GroupElement>,
    /// A point in two images.
    pub overlap: Option<GroupElement>,
    /// An image point outside the target.
    pub escape: Option<GroupElement>,
}

impl SubequivalenceCheck {
    pub fn valid(&self) -> bool {
        self.uncovered.is_none() && self.overlap.is_none() && self.escape.is_none()
    }

    pub fn to_json(&self) -> Value {
        let w = |g: &Option<GroupElement>| g.as_ref().map(GroupElement::to_json);
        json!({
            "valid": self.valid(),
            "uncovered": w(&self.uncovered),
            "overlap": w(&self.overlap),
            "escape": w(&self.escape),
        })
    }
}

/// Covering, disjointness of images and containment in the target, checked
/// directly on every window position.
pub fn verify_subequivalence(
    sample: &Sample,
    wit: &SubequivalenceWitness,
    src: &CylinderSet,
    tgt: &CylinderSet,
) -> Result<SubequivalenceCheck> {
    let group = &sample.word.group;
    let translates: Vec<GroupElement> = wit.pieces.iter().map(|p| p.translate.clone()).collect();
    let reach = word_lengths(group, &translates)?.into_iter().max().unwrap_or(0);
    let field = Field::new(sample, reach)?;
    let src_f = field.flags(src)?;
    let tgt_f = field.flags(tgt)?;
    let piece_f: Vec<Vec<bool>> = wit.pieces.iter().map(|p| field.flags(&p.set)).collect::<Result<_>>()?;
    let mut check = SubequivalenceCheck {
        uncovered: None,
        overlap: None,
        escape: None,
    };
    for p in 0..field.window_len() {
        let here = || Some(field.element(p).clone());
        if src_f[p] && check.uncovered.is_none() && !piece_f.iter().any(|f| f[p]) {
            check.uncovered = here();
        }
        // x_p ∈ s·V iff x_{p·s} ∈ V.
        let mut images = 0;
        for (k, piece) in wit.pieces.iter().enumerate() {
            if piece_f[k][field.step(p, &piece.translate)?] {
                images += 1;
            }
        }
        if images > 1 && check.overlap.is_none() {
            check.overlap = here();
        }
        if images > 0 && !tgt_f[p] && check.escape.is_none() {
            check.escape = here();
        }
    }
    Ok(check)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub translate_radius: usize,
    /// Maximum number of tentative placements.
    pub budget: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            translate_radius: 2,
            budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(SubequivalenceWitness),
    /// The whole search space was exhausted (or the counting bound rules it out).
    Infeasible { reason: String },
    /// The node budget ran out before the space was exhausted.
    BudgetExhausted { nodes: u64 },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&SubequivalenceWitness> {
        match self {
            SearchOutcome::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn to_json(&self, sample: &Sample) -> Value {
        match self {
            SearchOutcome::Found(w) => json!({"status": "found", "witness": w.to_json(sample)}),
            SearchOutcome::Infeasible { reason } => json!({"status": "infeasible", "reason": reason}),
            SearchOutcome::BudgetExhausted { nodes } => json!({"status": "budget-exhausted", "nodes": nodes}),
        }
    }
}

/// Backtracking search for a witness `src ≺ tgt` whose pieces are single
/// atoms moved by translates from `ball(translate_radius)`, tried in ball
/// order. Images are compared as sets of atoms at the resolution deciding
/// them.
pub fn subequivalence_search(
    sample: &Sample,
    src: &CylinderSet,
    tgt: &CylinderSet,
    params: &SearchParams,
) -> Result<SearchOutcome> {
    let rad = params.translate_radius;
    let rv = src.resolution.max(tgt.resolution);
    let fine = rv + rad;
    let field = Field::new(sample, rad)?;
    let translates = sample.ball(rad)?.elements().to_vec();
    let tv = field.table(rv)?;
    let tf = field.table(fine)?;
    let src_f = field.flags(src)?;
    let tgt_f = field.flags(tgt)?;
    let wl = field.window_len();

    let src_count = (0..wl).filter(|&p| src_f[p]).count();
    let tgt_count = (0..wl).filter(|&p| tgt_f[p]).count();
    if src_count == 0 {
        return Ok(SearchOutcome::Found(SubequivalenceWitness::default()));
    }
    // Source points of ball(W − rad) have every translate inside the window,
    // so a witness injects them into the target.
    let interior = sample.window().size_at(sample.window_radius().saturating_sub(rad));
    let inner_src = (0..interior.min(wl)).filter(|&p| src_f[p]).count();
    if rad < sample.window_radius() && inner_src > tgt_count {
        return Ok(SearchOutcome::Infeasible {
            reason: format!(
                "source measure {} exceeds target measure {}",
                format_rational(&ratio(src_count, wl)),
                format_rational(&ratio(tgt_count, wl))
            ),
        });
    }

    // Source atoms at rv, in pattern order.
    let mut atoms: Vec<u32> = (0..wl).filter(|&p| src_f[p]).map(|p| tv.id(p)).collect();
    atoms.sort_unstable_by(|a, b| tv.atom(*a).cmp(tv.atom(*b)));
    atoms.dedup();
    let slot: HashMap<u32, usize> = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    // Fine cells: atom ids at `fine` of window positions.
    let mut cell_of: HashMap<u32, usize> = HashMap::new();
    let mut cell_in_tgt: Vec<bool> = Vec::new();
    for p in 0..wl {
        let id = tf.id(p);
        let c = *cell_of.entry(id).or_insert_with(|| {
            cell_in_tgt.push(tgt_f[p]);
            cell_in_tgt.len() - 1
        });
        debug_assert_eq!(cell_in_tgt[c], tgt_f[p]);
    }
    // image[atom][translate] = cells c with x ∈ c ⇒ x ∈ s·atom.
    let mut image: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); atoms.len()];
    for (k, s) in translates.iter().enumerate() {
        for p in 0..wl {
            let a = tv.id(field.step(p, s)?);
            if let Some(&i) = slot.get(&a) {
                image[i].entry(k).or_default().push(cell_of[&tf.id(p)]);
            }
        }
    }
    let candidates: Vec<Vec<(usize, Vec<usize>)>> = image
        .into_iter()
        .map(|m| {
            m.into_iter()
                .filter_map(|(k, mut cells)| {
                    cells.sort_unstable();
                    cells.dedup();
                    cells.iter().all(|&c| cell_in_tgt[c]).then_some((k, cells))
                })
                .collect()
        })
        .collect();
    // Most constrained atoms first.
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));

    let mut used = vec![false; cell_in_tgt.len()];
    let mut choice = vec![usize::MAX; atoms.len()];
    let mut nodes = 0u64;
    let found = dfs(&order, 0, &candidates, &mut used, &mut choice, &mut nodes, params.budget);
    match found {
        Some(true) => {
            let mut by_translate: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
            for (i, &c) in choice.iter().enumerate() {
                by_translate.entry(candidates[i][c].0).or_default().push(atoms[i]);
            }
            let pieces = by_translate
                .into_iter()
                .map(|(k, ids)| Piece {
                    set: CylinderSet::new(rv, ids.into_iter().map(|a| tv.atom(a).clone())),
                    translate: translates[k].clone(),
                })
                .collect();
            Ok(SearchOutcome::Found(SubequivalenceWitness { pieces }))
        }
        Some(false) => Ok(SearchOutcome::Infeasible {
            reason: format!("no assignment with translates in ball({rad})"),
        }),
        None => Ok(SearchOutcome::BudgetExhausted { nodes }),
    }
}

/// `Some(true)` on success, `Some(false)` when exhausted, `None` over budget.
fn dfs(
    order: &[usize],
    depth: usize,
    cand: &[Vec<(usize, Vec<usize>)>],
    used: &mut [bool],
    choice: &mut [usize],
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    let Some(&i) = order.get(depth) else {
        return Some(true);
    };
    for (c, (_, cells)) in cand[i].iter().enumerate() {
        if cells.iter().any(|&x| used[x]) {
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return None;
        }
        for &x in cells {
            used[x] = true;
        }
        choice[i] = c;
        match dfs(order, depth + 1, cand, used, choice, nodes, budget) {
            Some(false) => {}
            other => return other,
        }
        for &x in cells {
            used[x] = false;
        }
    }
    Some(false)
}

/// Level membership of window positions, collected as sets of atoms.
fn level_set(field: &Field, asg: &Assignment, pick: impl Fn(usize, usize) -> bool, res: usize) -> Result<CylinderSet> {
    let ps: Vec<usize> = (0..field.window_len())
        .filter(|&p| asg.level_of[p].is_some_and(|(i, l)| pick(i as usize, l as usize)))
        .collect();
    field.atoms_of(ps, res)
}

/// Resolution deciding every level of `castle`.
fn level_resolution(sample: &Sample, castle: &Castle) -> Result<usize> {
    let mut r = 0;
    for t in &castle.towers {
        let m = word_lengths(&sample.word.group, &t.shape)?.into_iter().max().unwrap_or(0);
        r = r.max(t.base.resolution + m);
    }
    Ok(r)
}

/// A comparison witness built from a castle, with the injections used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CastleComparison {
    pub witness: SubequivalenceWitness,
    /// Per tower: `S_{i,1}`, `S_{i,2}` as shape indices.
    pub s1: Vec<Vec<usize>>,
    pub s2: Vec<Vec<usize>>,
    /// Per tower: `(s, φ(s))` and `(s', ψ(s'))` as shape indices.
    pub phi: Vec<Vec<(usize, usize)>>,
    pub psi: Vec<Vec<(usize, usize)>>,
}

impl CastleComparison {
    pub fn used_targets(&self) -> usize {
        self.phi.iter().chain(&self.psi).map(Vec::len).sum()
    }
}

/// `A ≺ B` from a castle: with `S_{i,1}` the levels meeting `A`, `S_{i,2}`
/// the levels inside `B` and `|S_{i,1}| + |S'_i| < |S_{i,2}|`, level `s`
/// is moved onto `φ_i(s)` and the part of `A` in the remainder follows the
/// remainder witness into `S'_i` levels and then `ψ_i`.
pub fn comparison_from_castle(
    sample: &Sample,
    a: &CylinderSet,
    b: &CylinderSet,
    castle: &Castle,
    s_prime: &[Vec<usize>],
    remainder: Option<&SubequivalenceWitness>,
) -> Result<CastleComparison> {
    let group = &sample.word.group;
    if s_prime.len() != castle.towers.len() {
        return Err(Error::precondition("one S' subset per tower is required"));
    }
    let rem_reach = match remainder {
        Some(w) => {
            let ts: Vec<GroupElement> = w.pieces.iter().map(|p| p.translate.clone()).collect();
            word_lengths(group, &ts)?.into_iter().max().unwrap_or(0)
        }
        None => 0,
    };
    let field = Field::new(sample, 2 * shape_reach(group, castle)? + rem_reach)?;
    let asg = assign_levels(&field, castle)?;
    let a_f = field.flags(a)?;
    let b_f = field.flags(b)?;
    let wl = field.window_len();
    let res = level_resolution(sample, castle)?.max(a.resolution) + rem_reach;

    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for (i, t) in castle.towers.iter().enumerate() {
        let n = t.shape.len();
        let mut meets_a = vec![false; n];
        let mut inside_b = vec![true; n];
        let mut occupied = vec![false; n];
        for p in 0..wl {
            if let Some((ti, l)) = asg.level_of[p] {
                if ti as usize == i {
                    let l = l as usize;
                    occupied[l] = true;
                    meets_a[l] |= a_f[p];
                    inside_b[l] &= b_f[p];
                }
            }
        }
        let t1: Vec<usize> = (0..n).filter(|&l| meets_a[l]).collect();
        let t2: Vec<usize> = (0..n).filter(|&l| occupied[l] && inside_b[l]).collect();
        if t1.len() + s_prime[i].len() >= t2.len() && !(t1.is_empty() && s_prime[i].is_empty()) {
            return Err(Error::precondition_with(
                format!(
                    "counting condition |S_1| + |S'| < |S_2| fails: {} + {} ≥ {}",
                    t1.len(),
                    s_prime[i].len(),
                    t2.len()
                ),
                format!("tower {i}"),
            ));
        }
        phi.push(t1.iter().copied().zip(t2.iter().copied()).collect::<Vec<_>>());
        psi.push(s_prime[i].iter().copied().zip(t2[t1.len()..].iter().copied()).collect::<Vec<_>>());
        s1.push(t1);
        s2.push(t2);
    }

    let mut pieces = Vec::new();
    for (i, t) in castle.towers.iter().enumerate() {
        for &(s, target) in &phi[i] {
            let set = field.atoms_of((0..wl).filter(|&p| a_f[p] && asg.level_of[p] == Some((i as u32, s as u32))), res)?;
            let g = group.mul_u(&t.shape[target], &group.inv_u(&t.shape[s]));
            pieces.push(Piece { set, translate: g });
        }
    }
    let in_rem: Vec<usize> = (0..wl).filter(|&p| a_f[p] && asg.level_of[p].is_none()).collect();
    if !in_rem.is_empty() {
        let Some(rw) = remainder else {
            return Err(Error::precondition_with(
                "A meets the remainder but no remainder witness was given",
                field.element(in_rem[0]).to_string(),
            ));
        };
        let piece_f: Vec<Vec<bool>> = rw.pieces.iter().map(|p| field.flags(&p.set)).collect::<Result<_>>()?;
        // Group remainder points of A by (piece, landing level).
        let mut groups: BTreeMap<(usize, u32, u32), Vec<usize>> = BTreeMap::new();
        for &p in &in_rem {
            let k = (0..rw.pieces.len()).find(|&k| piece_f[k][p]).ok_or_else(|| {
                Error::precondition_with("remainder witness does not cover A", field.element(p).to_string())
            })?;
            let g = &rw.pieces[k].translate;
            // g·x_p = x_{p·g⁻¹}
            let y = field.step(p, &group.inv_u(g))?;
            let level = level_at(&field, castle, y)?.ok_or_else(|| {
                Error::precondition_with("remainder witness leaves the castle", field.element(p).to_string())
            })?;
            groups.entry((k, level.0, level.1)).or_default().push(p);
        }
        for ((k, i, l), ps) in groups {
            let i = i as usize;
            let target = psi[i]
                .iter()
                .find(|(s, _)| *s == l as usize)
                .map(|(_, t)| *t)
                .ok_or_else(|| Error::precondition_with("remainder witness lands outside S'", format!("tower {i}")))?;
            let shape = &castle.towers[i].shape;
            let move_level = group.mul_u(&shape[target], &group.inv_u(&shape[l as usize]));
            pieces.push(Piece {
                set: field.atoms_of(ps, res)?,
                translate: group.mul_u(&move_level, &rw.pieces[k].translate),
            });
        }
    }
    let witness = SubequivalenceWitness { pieces };
    if !verify_subequivalence(sample, &witness, a, b)?.valid() {
        return Err(Error::Construction("castle comparison witness failed verification".into()));
    }
    Ok(CastleComparison { witness, s1, s2, phi, psi })
}

/// Level of an extended position, by direct lookup.
fn level_at(field: &Field, castle: &Castle, y: usize) -> Result<Option<(u32, u32)>> {
    let sample = field.sample;
    let group = &sample.word.group;
    for (i, t) in castle.towers.iter().enumerate() {
        let dom = sample.ball(t.base.resolution)?;
        for (l, s) in t.shape.iter().enumerate() {
            let pat = sample.pattern(&group.mul_u(field.element(y), s), dom.elements());
            if t.base.contains(&pat) {
                return Ok(Some((i as u32, l as u32)));
            }
        }
    }
    Ok(None)
}

/// An almost-finiteness witness: castle, subsets `S'_i` and a witness
/// `X ∖ ⊔S_iB_i ≺ ⊔S'_iB_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AFWitness {
    pub castle: Castle,
    pub n: usize,
    /// Shape indices of `S'_i` (a prefix of each shape).
    pub subsets: Vec<Vec<usize>>,
    pub remainder_set: CylinderSet,
    pub target_set: CylinderSet,
    pub remainder_witness: SubequivalenceWitness,
    pub delta: Rational,
    pub target_measure: Rational,
    pub remainder_measure: Rational,
}

impl AFWitness {
    pub fn to_json(&self, sample: &Sample) -> Value {
        json!({
            "castle": self.castle.to_json(sample),
            "n": self.n,
            "subsetSizes": self.subsets.iter().map(Vec::len).collect::<Vec<_>>(),
            "shapeSizes": self.castle.towers.iter().map(|t| t.shape.len()).collect::<Vec<_>>(),
            "delta": format_rational(&self.delta),
            "targetMeasure": format_rational(&self.target_measure),
            "remainderMeasure": format_rational(&self.remainder_measure),
            "remainderWitness": self.remainder_witness.to_json(sample),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UpgradeOutcome {
    Found(Box<AFWitness>),
    /// The remainder could not be placed; carries the search outcome.
    NotFound(SearchOutcome),
}

/// `|S'|` with `|S|/(n+1) < |S'| < |S|/n`, if such an integer exists.
pub fn subset_size(shape: usize, n: usize) -> Option<usize> {
    let k = shape / (n + 1) + 1;
    (k * n < shape).then_some(k)
}

/// Upgrades an almost-finiteness-in-measure castle to an almost-finiteness
/// witness for the given `n` by searching for `X ∖ ⊔S_iB_i ≺ ⊔S'_iB_i`.
pub fn upgrade_to_af(sample: &Sample, castle: &Castle, n: usize, params: &SearchParams) -> Result<UpgradeOutcome> {
    if n == 0 {
        return Err(Error::precondition("n must be positive"));
    }
    let eps = castle
        .folner
        .as_ref()
        .map(|f| f.eps)
        .ok_or_else(|| Error::precondition("castle carries no (K, eps) data"))?;
    let delta = eps.min(Rational::new(1, n as i64 + 2));
    let mut subsets = Vec::new();
    for (i, t) in castle.towers.iter().enumerate() {
        if t.shape.len() <= n * (n + 1) {
            return Err(Error::precondition_with(
                format!("shape size {} must exceed n(n+1) = {}", t.shape.len(), n * (n + 1)),
                format!("tower {i}"),
            ));
        }
        let k = subset_size(t.shape.len(), n).ok_or_else(|| {
            Error::precondition_with("no integer strictly between |S|/(n+1) and |S|/n", format!("tower {i}"))
        })?;
        subsets.push((0..k).collect::<Vec<_>>());
    }
    let group = &sample.word.group;
    let field = Field::new(sample, shape_reach(group, castle)?)?;
    let asg = assign_levels(&field, castle)?;
    if asg.overlap_count > 0 {
        return Err(Error::precondition("castle levels overlap"));
    }
    let rem = asg.remainder();
    if rem >= delta {
        return Err(Error::precondition(format!(
            "remainder {} is not below delta {}",
            format_rational(&rem),
            format_rational(&delta)
        )));
    }
    let res = level_resolution(sample, castle)?;
    let target_set = level_set(&field, &asg, |i, l| l < subsets[i].len(), res)?;
    let wl = field.window_len();
    let target_count = asg
        .level_of
        .iter()
        .flatten()
        .filter(|(i, l)| (*l as usize) < subsets[*i as usize].len())
        .count();
    let target_measure = ratio(target_count, wl);
    let bound = (Rational::from_integer(1) - delta) / Rational::from_integer(n as i64 + 1);
    if target_measure <= bound {
        return Err(Error::Construction(format!(
            "target measure {} not above (1-delta)/(n+1) = {}",
            format_rational(&target_measure),
            format_rational(&bound)
        )));
    }
    let remainder_set = field.atoms_of((0..wl).filter(|&p| asg.level_of[p].is_none()), res)?;
    let outcome = subequivalence_search(sample, &remainder_set, &target_set, params)?;
    Ok(match outcome {
        SearchOutcome::Found(w) => UpgradeOutcome::Found(Box::new(AFWitness {
            castle: castle.clone(),
            n,
            subsets,
            remainder_set,
            target_set,
            remainder_witness: w,
            delta,
            target_measure,
            remainder_measure: rem,
        })),
        other => UpgradeOutcome::NotFound(other),
    })
}

/// Independent re-check of the three almost-finiteness clauses over the
/// window: Følner shapes, disjoint levels, and the remainder witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AFCheck {
    pub folner: bool,
    pub disjoint: bool,
    pub subsets_sized: bool,
    pub remainder_witness: bool,
}

impl AFCheck {
    pub fn passed(&self) -> bool {
        self.folner && self.disjoint && self.subsets_sized && self.remainder_witness
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pass": self.passed(),
            "folner": self.folner,
            "disjoint": self.disjoint,
            "subsetsSized": self.subsets_sized,
            "remainderWitness": self.remainder_witness,
        })
    }
}

pub fn verify_af_witness(sample: &Sample, wit: &AFWitness) -> Result<AFCheck> {
    let group = &sample.word.group;
    let field = Field::new(sample, shape_reach(group, &wit.castle)?)?;
    let asg = assign_levels(&field, &wit.castle)?;
    let folner = match &wit.castle.folner {
        Some(f) => crate::castles::shape_defects(group, &wit.castle, &f.k)?
            .iter()
            .all(|d| *d < f.eps),
        None => false,
    };
    let n = wit.n;
    let subsets_sized = wit
        .castle
        .towers
        .iter()
        .zip(&wit.subsets)
        .all(|(t, s)| s.len() * (n + 1) > t.shape.len() && s.len() * n < t.shape.len());
    // The sets are rebuilt here from the castle rather than trusted.
    let res = level_resolution(sample, &wit.castle)?;
    let wl = field.window_len();
    let rem = field.atoms_of((0..wl).filter(|&p| asg.level_of[p].is_none()), res)?;
    let tgt = level_set(&field, &asg, |i, l| wit.subsets[i].contains(&l), res)?;
    let check = verify_subequivalence(sample, &wit.remainder_witness, &rem, &tgt)?;
    Ok(AFCheck {
        folner,
        disjoint: asg.overlap_count == 0,
        subsets_sized,
        remainder_witness: check.valid(),
    })
}
