//! Sampled orbit points, factor languages and the clopen algebra.
//!
//! Points of the orbit closure are approximated by `x_p = p⁻¹·w` for `p` in
//! a window ball, so that `x_p(d) = w(p·d)` and `g·x_p = x_{p·g⁻¹}`. A
//! cylinder set at resolution `r` is a set of patterns on `ball(r)`; every
//! algebra operation is exact relative to the language sampled from the
//! window.

use std::collections::{BTreeSet, HashMap};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{ratio, Rational};
use crate::groups::{Ball, GroupElement};
use crate::words::{Symbol, Word};

/// A pattern on `ball(r)` listed in ball order.
pub type Atom = Vec<Symbol>;

/// A word together with a window ball of sample positions.
#[derive(Clone, Debug)]
pub struct Sample {
    pub word: Word,
    window: Ball,
}

impl Sample {
    pub fn new(word: Word, window_radius: usize) -> Result<Self> {
        let window = word.group.ball(window_radius)?;
        Ok(Sample { word, window })
    }

    pub fn window_radius(&self) -> usize {
        self.window.radius()
    }

    pub fn positions(&self) -> &[GroupElement] {
        self.window.elements()
    }

    pub fn window(&self) -> &Ball {
        &self.window
    }

    pub fn ball(&self, r: usize) -> Result<Ball> {
        self.word.group.ball(r)
    }

    /// `x_p` on `domain`: `d ↦ w(p·d)`.
    pub fn pattern(&self, p: &GroupElement, domain: &[GroupElement]) -> Atom {
        let g = &self.word.group;
        domain.iter().map(|d| self.word.eval_u(&g.mul_u(p, d))).collect()
    }

    /// The factor language at resolution `r` with occurrence counts over
    /// the window.
    pub fn language(&self, r: usize) -> Result<Language> {
        let dom = self.ball(r)?;
        let mut lang = Language {
            resolution: r,
            atoms: Vec::new(),
            counts: Vec::new(),
            total: 0,
            index: HashMap::new(),
            position_atoms: Vec::with_capacity(self.window.len()),
        };
        for p in self.window.elements() {
            let a = self.pattern(p, dom.elements());
            let id = lang.intern(a);
            lang.counts[id as usize] += 1;
            lang.total += 1;
            lang.position_atoms.push(id);
        }
        Ok(lang)
    }
}

/// Atoms at one resolution with their window frequencies.
#[derive(Clone, Debug)]
pub struct Language {
    pub resolution: usize,
    atoms: Vec<Atom>,
    counts: Vec<u64>,
    total: u64,
    index: HashMap<Atom, u32>,
    position_atoms: Vec<u32>,
}

impl Language {
    fn intern(&mut self, a: Atom) -> u32 {
        if let Some(&id) = self.index.get(&a) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.index.insert(a.clone(), id);
        self.atoms.push(a);
        self.counts.push(0);
        id
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: u32) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn id_of(&self, a: &Atom) -> Option<u32> {
        self.index.get(a).copied()
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Number of sampled positions.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Atom id of each window position, in window order.
    pub fn position_atoms(&self) -> &[u32] {
        &self.position_atoms
    }

    /// Empirical frequency of a set of atom ids.
    pub fn frequency_of(&self, ids: impl IntoIterator<Item = u32>) -> Rational {
        let c: u64 = ids.into_iter().map(|i| self.counts[i as usize]).sum();
        ratio(c as usize, self.total as usize)
    }

    /// The full set at this resolution.
    pub fn full(&self) -> CylinderSet {
        CylinderSet {
            resolution: self.resolution,
            atoms: self.atoms.iter().cloned().collect(),
        }
    }

    /// Empirical measure of a cylinder set at this resolution or coarser.
    pub fn measure(&self, set: &CylinderSet, coarse: &SubMap) -> Rational {
        let ids = (0..self.atoms.len() as u32).filter(|&i| set.contains(&coarse.apply(self.atom(i))));
        self.frequency_of(ids)
    }
}

/// Index map reading a coarser (translated) pattern out of a finer one:
/// `sub[j] = b(g·d_j)` for `d_j ∈ ball(r)` inside `ball(R)`.
#[derive(Clone, Debug)]
pub struct SubMap {
    indices: Vec<usize>,
}

impl SubMap {
    /// Map for `d ↦ b(g·d)` from resolution `fine` down to `coarse`.
    pub fn new(sample: &Sample, g: &GroupElement, coarse: usize, fine: usize) -> Result<Self> {
        let fine_ball = sample.ball(fine)?;
        let coarse_ball = sample.ball(coarse)?;
        let group = &sample.word.group;
        let mut indices = Vec::with_capacity(coarse_ball.len());
        for d in coarse_ball.elements() {
            let gd = group.mul_u(g, d);
            let i = fine_ball.index_of(&gd).ok_or_else(|| {
                Error::precondition_with(
                    format!("translate leaves the resolution-{fine} domain"),
                    format!("{g}·{d}"),
                )
            })?;
            indices.push(i);
        }
        Ok(SubMap { indices })
    }

    /// Restriction from `fine` to `coarse` (no translation).
    pub fn restrict(sample: &Sample, coarse: usize, fine: usize) -> Result<Self> {
        let n = sample.ball(fine.min(coarse))?.len();
        if coarse > fine {
            return Err(Error::precondition("restriction to a finer resolution"));
        }
        Ok(SubMap {
            indices: (0..n).collect(),
        })
    }

    pub fn apply(&self, b: &[Symbol]) -> Atom {
        self.indices.iter().map(|&i| b[i]).collect()
    }
}

/// A clopen set: a set of atoms at a fixed resolution.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderSet {
    pub resolution: usize,
    pub atoms: BTreeSet<Atom>,
}

impl CylinderSet {
    pub fn empty(resolution: usize) -> Self {
        CylinderSet {
            resolution,
            atoms: BTreeSet::new(),
        }
    }

    pub fn new(resolution: usize, atoms: impl IntoIterator<Item = Atom>) -> Self {
        CylinderSet {
            resolution,
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn contains(&self, a: &[Symbol]) -> bool {
        self.atoms.contains(a)
    }

    pub fn to_json(&self, sample: &Sample) -> Value {
        let a = &sample.word.alphabet;
        let join = |atom: &Atom| -> Value {
            if a.symbols().iter().all(|s| s.chars().count() == 1) {
                Value::String(atom.iter().map(|&s| a.name(s)).collect())
            } else {
                Value::Array(atom.iter().map(|&s| Value::String(a.name(s).to_string())).collect())
            }
        };
        json!({
            "resolution": self.resolution,
            "atoms": self.atoms.iter().map(join).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, sample: &Sample, pointer: &str) -> Result<Self> {
        let resolution = v
            .get("resolution")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::config(format!("{pointer}/resolution"), "expected nonnegative integer"))?
            as usize;
        let width = sample.ball(resolution)?.len();
        let raw = v
            .get("atoms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::config(format!("{pointer}/atoms"), "expected array"))?;
        let alphabet = &sample.word.alphabet;
        let mut atoms = BTreeSet::new();
        for (i, item) in raw.iter().enumerate() {
            let p = format!("{pointer}/atoms/{i}");
            let tokens: Vec<String> = match item {
                Value::String(s) => s.chars().map(String::from).collect(),
                Value::Array(xs) => xs
                    .iter()
                    .map(|x| x.as_str().map(String::from))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::config(p.clone(), "expected symbol strings"))?,
                _ => return Err(Error::config(p, "expected string or array")),
            };
            if tokens.len() != width {
                return Err(Error::config(p, format!("atom has {} symbols, ball({resolution}) has {width}", tokens.len())));
            }
            let atom: Option<Atom> = tokens.iter().map(|t| alphabet.index_of(t)).collect();
            atoms.insert(atom.ok_or_else(|| Error::config(p, "symbol not in alphabet"))?);
        }
        Ok(CylinderSet { resolution, atoms })
    }
}

/// Boolean algebra and translation of cylinder sets relative to a sample.
pub struct Algebra<'a> {
    pub sample: &'a Sample,
    languages: std::cell::RefCell<HashMap<usize, std::rc::Rc<Language>>>,
}

impl<'a> Algebra<'a> {
    pub fn new(sample: &'a Sample) -> Self {
        Algebra {
            sample,
            languages: Default::default(),
        }
    }

    pub fn language(&self, r: usize) -> Result<std::rc::Rc<Language>> {
        if let Some(l) = self.languages.borrow().get(&r) {
            return Ok(l.clone());
        }
        let l = std::rc::Rc::new(self.sample.language(r)?);
        self.languages.borrow_mut().insert(r, l.clone());
        Ok(l)
    }

    /// `{b ∈ L_fine : b|ball(r) ∈ A}`.
    pub fn refine(&self, a: &CylinderSet, fine: usize) -> Result<CylinderSet> {
        if fine < a.resolution {
            return Err(Error::precondition_with(
                "refinement to a coarser resolution",
                format!("{} → {fine}", a.resolution),
            ));
        }
        let lang = self.language(fine)?;
        let map = SubMap::restrict(self.sample, a.resolution, fine)?;
        Ok(CylinderSet::new(
            fine,
            lang.atoms().iter().filter(|b| a.contains(&map.apply(b))).cloned(),
        ))
    }

    fn common(&self, a: &CylinderSet, b: &CylinderSet) -> Result<(CylinderSet, CylinderSet)> {
        let r = a.resolution.max(b.resolution);
        Ok((self.refine(a, r)?, self.refine(b, r)?))
    }

    pub fn union(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.common(a, b)?;
        Ok(CylinderSet::new(a.resolution, a.atoms.union(&b.atoms).cloned()))
    }

    pub fn intersect(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.common(a, b)?;
        Ok(CylinderSet::new(a.resolution, a.atoms.intersection(&b.atoms).cloned()))
    }

    pub fn difference(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.common(a, b)?;
        Ok(CylinderSet::new(a.resolution, a.atoms.difference(&b.atoms).cloned()))
    }

    pub fn complement(&self, a: &CylinderSet) -> Result<CylinderSet> {
        let lang = self.language(a.resolution)?;
        Ok(CylinderSet::new(
            a.resolution,
            lang.atoms().iter().filter(|b| !a.contains(b)).cloned(),
        ))
    }

    /// `g·A = {x : g⁻¹x ∈ A}` at resolution `r + |g|`.
    pub fn translate(&self, g: &GroupElement, a: &CylinderSet) -> Result<CylinderSet> {
        let len = self.word_length(g)?;
        let fine = a.resolution + len;
        let lang = self.language(fine)?;
        let map = SubMap::new(self.sample, g, a.resolution, fine)?;
        Ok(CylinderSet::new(
            fine,
            lang.atoms().iter().filter(|b| a.contains(&map.apply(b))).cloned(),
        ))
    }

    /// Whether two sets agree after refinement to a common resolution.
    pub fn same_set(&self, a: &CylinderSet, b: &CylinderSet) -> Result<bool> {
        let (a, b) = self.common(a, b)?;
        Ok(a.atoms == b.atoms)
    }

    /// Whether `a ⊆ b` after refinement.
    pub fn subset(&self, a: &CylinderSet, b: &CylinderSet) -> Result<bool> {
        let (a, b) = self.common(a, b)?;
        Ok(a.atoms.is_subset(&b.atoms))
    }

    pub fn measure(&self, a: &CylinderSet) -> Result<Rational> {
        let lang = self.language(a.resolution)?;
        Ok(lang.frequency_of((0..lang.len() as u32).filter(|&i| a.contains(lang.atom(i)))))
    }

    pub fn word_length(&self, g: &GroupElement) -> Result<usize> {
        word_length(&self.sample.word.group, g)
    }
}

/// Word length under the descriptor's generators, by growing balls.
pub fn word_length(group: &crate::groups::GroupDescriptor, g: &GroupElement) -> Result<usize> {
    group.kind.check(g)?;
    let mut r = 4;
    loop {
        let b = group.ball(r)?;
        if let Some(l) = b.length(g) {
            return Ok(l);
        }
        if b.size_at(r) == b.size_at(r.saturating_sub(1)) && r > 0 {
            return Err(Error::precondition_with("element not generated", g.to_string()));
        }
        r *= 2;
    }
}
