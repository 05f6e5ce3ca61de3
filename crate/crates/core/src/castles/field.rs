use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::groups::{Ball, GroupElement};
use crate::subshift::{Atom, CylinderSet, Sample};

/// Atom ids of every position of a [`Field`] at one resolution.
#[derive(Debug)]
pub struct Table {
    pub resolution: usize,
    ids: Vec<u32>,
    atoms: Vec<Atom>,
    index: HashMap<Atom, u32>,
}

impl Table {
    pub fn id(&self, position: usize) -> u32 {
        self.ids[position]
    }

    pub fn atom(&self, id: u32) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn atom_at(&self, position: usize) -> &Atom {
        self.atom(self.ids[position])
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn id_of(&self, a: &[u8]) -> Option<u32> {
        self.index.get(a).copied()
    }

    /// Membership flag per atom id.
    pub fn mask(&self, set: &CylinderSet) -> Vec<bool> {
        assert_eq!(set.resolution, self.resolution, "mask at mismatched resolution");
        self.atoms.iter().map(|a| set.contains(a)).collect()
    }
}

/// Sample positions (the window ball) inside an extended ball, so that
/// translates `p·g` of window positions can be looked up by index.
///
/// The window is a prefix of the extended ball.
pub struct Field<'a> {
    pub sample: &'a Sample,
    ext: Ball,
    tables: RefCell<HashMap<usize, Rc<Table>>>,
}

impl<'a> Field<'a> {
    pub fn new(sample: &'a Sample, reach: usize) -> Result<Self> {
        let ext = sample.ball(sample.window_radius() + reach)?;
        Ok(Field {
            sample,
            ext,
            tables: RefCell::new(HashMap::new()),
        })
    }

    pub fn reach(&self) -> usize {
        self.ext.radius() - self.sample.window_radius()
    }

    pub fn window_len(&self) -> usize {
        self.sample.positions().len()
    }

    pub fn len(&self) -> usize {
        self.ext.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ext.is_empty()
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.ext.elements()[i]
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.ext.index_of(g)
    }

    /// Index of `element(i)·g`.
    pub fn step(&self, i: usize, g: &GroupElement) -> Result<usize> {
        let h = self.sample.word.group.mul_u(self.element(i), g);
        self.ext.index_of(&h).ok_or_else(|| Error::ResourceCap {
            what: format!("translate {h} leaves the extended window; increase the reach"),
            limit: self.ext.radius(),
        })
    }

    /// Positions `i` translated by `g` for every window position.
    pub fn step_all(&self, g: &GroupElement) -> Result<Vec<usize>> {
        (0..self.window_len()).map(|i| self.step(i, g)).collect()
    }

    pub fn table(&self, r: usize) -> Result<Rc<Table>> {
        if let Some(t) = self.tables.borrow().get(&r) {
            return Ok(t.clone());
        }
        let dom = self.sample.ball(r)?;
        let mut t = Table {
            resolution: r,
            ids: Vec::with_capacity(self.ext.len()),
            atoms: Vec::new(),
            index: HashMap::new(),
        };
        for p in self.ext.elements() {
            let a = self.sample.pattern(p, dom.elements());
            let id = match t.index.get(&a) {
                Some(&id) => id,
                None => {
                    let id = t.atoms.len() as u32;
                    t.index.insert(a.clone(), id);
                    t.atoms.push(a);
                    id
                }
            };
            t.ids.push(id);
        }
        let t = Rc::new(t);
        self.tables.borrow_mut().insert(r, t.clone());
        Ok(t)
    }

    /// Membership of every extended position in `set`.
    pub fn flags(&self, set: &CylinderSet) -> Result<Vec<bool>> {
        let t = self.table(set.resolution)?;
        let mask = t.mask(set);
        Ok(t.ids.iter().map(|&id| mask[id as usize]).collect())
    }

    /// Atoms at resolution `r` of the given positions.
    pub fn atoms_of(&self, positions: impl IntoIterator<Item = usize>, r: usize) -> Result<CylinderSet> {
        let t = self.table(r)?;
        Ok(CylinderSet::new(r, positions.into_iter().map(|i| t.atom_at(i).clone())))
    }

    /// Drops cached tables (they can be large at high resolution).
    pub fn clear_cache(&self) {
        self.tables.borrow_mut().clear();
    }
}
