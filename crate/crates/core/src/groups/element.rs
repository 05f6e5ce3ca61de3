use std::fmt;

use serde_json::{json, Value};

/// An exact group element. Each variant belongs to exactly one
/// [`GroupKind`](super::GroupKind).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Int(i64),
    /// Row/column index into a finite multiplication table.
    Finite(u32),
    /// `s^n t^r` in D∞ = ⟨s, t | t², tsts⟩.
    Dihedral { n: i64, r: bool },
    /// Direct-product element `(left, right)`.
    Pair(Box<GroupElement>, Box<GroupElement>),
    /// Lamplighter element: finitely supported lamp map (sorted by position,
    /// identity values omitted) and the lighter position.
    Lamp { lamps: Vec<(i64, u32)>, shift: i64 },
}

impl GroupElement {
    pub fn dihedral(n: i64, r: bool) -> Self {
        GroupElement::Dihedral { n, r }
    }

    pub fn pair(left: GroupElement, right: GroupElement) -> Self {
        GroupElement::Pair(Box::new(left), Box::new(right))
    }

    /// Lamplighter element over ℤ₂ from a set of lit positions.
    pub fn lamps_z2(lit: impl IntoIterator<Item = i64>, shift: i64) -> Self {
        let mut v: Vec<(i64, u32)> = lit.into_iter().map(|p| (p, 1)).collect();
        v.sort_unstable();
        v.dedup();
        GroupElement::Lamp { lamps: v, shift }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroupElement::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_dihedral(&self) -> Option<(i64, bool)> {
        match self {
            GroupElement::Dihedral { n, r } => Some((*n, *r)),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&GroupElement, &GroupElement)> {
        match self {
            GroupElement::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// JSON form: integers and finite indices as numbers, D∞ as
    /// `{"n","r"}`, products as two-element arrays, lamplighters as
    /// `{"lamps","shift"}` (plain positions when every lamp value is 1).
    pub fn to_json(&self) -> Value {
        match self {
            GroupElement::Int(n) => json!(n),
            GroupElement::Finite(i) => json!(i),
            GroupElement::Dihedral { n, r } => json!({"n": n, "r": u8::from(*r)}),
            GroupElement::Pair(a, b) => json!([a.to_json(), b.to_json()]),
            GroupElement::Lamp { lamps, shift } => {
                if lamps.iter().all(|&(_, v)| v == 1) {
                    json!({"lamps": lamps.iter().map(|&(p, _)| p).collect::<Vec<_>>(), "shift": shift})
                } else {
                    json!({"lamps": lamps.iter().map(|&(p, v)| json!([p, v])).collect::<Vec<_>>(), "shift": shift})
                }
            }
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(n) => write!(f, "{n}"),
            GroupElement::Finite(i) => write!(f, "#{i}"),
            GroupElement::Dihedral { n, r } => {
                if *r {
                    write!(f, "s^{n}t")
                } else {
                    write!(f, "s^{n}")
                }
            }
            GroupElement::Pair(a, b) => write!(f, "({a}, {b})"),
            GroupElement::Lamp { lamps, shift } => {
                write!(f, "({{")?;
                for (i, (p, v)) in lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if *v == 1 {
                        write!(f, "{p}")?;
                    } else {
                        write!(f, "{p}:{v}")?;
                    }
                }
                write!(f, "}}, {shift})")
            }
        }
    }
}
