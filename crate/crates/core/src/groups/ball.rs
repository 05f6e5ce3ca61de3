use std::collections::HashMap;

use super::{GroupDescriptor, GroupElement};
use crate::error::{Error, Result};

/// Default enumeration cap for balls.
pub const DEFAULT_BALL_CAP: usize = 10_000_000;

/// The ball of a given radius under the symmetric closure of the
/// descriptor's generators.
///
/// Elements are listed layer by layer (word length 0, 1, ...), each layer
/// sorted, so `ball(r)` is a prefix of `ball(R)` for `r ≤ R`.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: usize,
    elements: Vec<GroupElement>,
    layer_ends: Vec<usize>,
    index: HashMap<GroupElement, usize>,
}

impl Ball {
    pub fn new(desc: &GroupDescriptor, radius: usize, cap: usize) -> Result<Self> {
        let gens = desc.symmetric_generators();
        let e = desc.identity();
        let mut elements = vec![e.clone()];
        let mut index = HashMap::from([(e, 0usize)]);
        let mut layer_ends = vec![1];
        let mut start = 0;
        for _ in 0..radius {
            let end = elements.len();
            let mut layer = Vec::new();
            for i in start..end {
                for s in &gens {
                    let g = desc.mul_u(&elements[i], s);
                    if !index.contains_key(&g) {
                        index.insert(g.clone(), usize::MAX);
                        layer.push(g);
                    }
                }
                if index.len() > cap {
                    return Err(Error::ResourceCap {
                        what: format!("ball of radius {radius} in {}", desc.kind.name()),
                        limit: cap,
                    });
                }
            }
            layer.sort();
            for g in layer {
                *index.get_mut(&g).expect("inserted") = elements.len();
                elements.push(g);
            }
            layer_ends.push(elements.len());
            start = end;
        }
        Ok(Ball {
            radius,
            elements,
            layer_ends,
            index,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Elements of word length at most `r` (a prefix of [`Self::elements`]).
    pub fn within(&self, r: usize) -> &[GroupElement] {
        &self.elements[..self.size_at(r)]
    }

    /// Number of elements of word length at most `r`.
    pub fn size_at(&self, r: usize) -> usize {
        self.layer_ends[r.min(self.radius)]
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// Word length of `g`, if it lies in the ball.
    pub fn length(&self, g: &GroupElement) -> Option<usize> {
        let i = self.index_of(g)?;
        Some(self.layer_ends.partition_point(|&end| end <= i))
    }
}
