use serde_json::{json, Value};

use super::element::GroupElement;
use super::finite::FiniteGroup;
use crate::error::{Error, Result};

/// The group structure underlying a descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Integers,
    Finite(FiniteGroup),
    Dihedral,
    Product(Box<GroupKind>, Box<GroupKind>),
    /// Restricted wreath product `base ≀ ℤ`.
    Lamplighter(FiniteGroup),
}

impl GroupKind {
    pub fn name(&self) -> String {
        match self {
            GroupKind::Integers => "integers".into(),
            GroupKind::Finite(g) => format!("finite-table({})", g.order()),
            GroupKind::Dihedral => "dihedral-infinite".into(),
            GroupKind::Product(a, b) => format!("direct-product({}, {})", a.name(), b.name()),
            GroupKind::Lamplighter(g) => format!("lamplighter({})", g.order()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupKind::Integers => GroupElement::Int(0),
            GroupKind::Finite(g) => GroupElement::Finite(g.identity()),
            GroupKind::Dihedral => GroupElement::dihedral(0, false),
            GroupKind::Product(a, b) => GroupElement::pair(a.identity(), b.identity()),
            GroupKind::Lamplighter(_) => GroupElement::Lamp {
                lamps: Vec::new(),
                shift: 0,
            },
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupKind::Integers, GroupElement::Int(_)) => true,
            (GroupKind::Finite(t), GroupElement::Finite(i)) => t.contains(*i),
            (GroupKind::Dihedral, GroupElement::Dihedral { .. }) => true,
            (GroupKind::Product(a, b), GroupElement::Pair(x, y)) => a.contains(x) && b.contains(y),
            (GroupKind::Lamplighter(base), GroupElement::Lamp { lamps, .. }) => {
                lamps.windows(2).all(|w| w[0].0 < w[1].0)
                    && lamps
                        .iter()
                        .all(|&(_, v)| base.contains(v) && v != base.identity())
            }
            _ => false,
        }
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                kind: self.name(),
                element: g.to_string(),
            })
        }
    }

    /// Exact product. Panics only through `check` failures surfaced as errors.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(self.inv_unchecked(g))
    }

    /// Product without membership validation; callers guarantee both
    /// operands belong to this kind.
    pub fn mul_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (GroupKind::Integers, GroupElement::Int(a), GroupElement::Int(b)) => {
                GroupElement::Int(a + b)
            }
            (GroupKind::Finite(t), GroupElement::Finite(a), GroupElement::Finite(b)) => {
                GroupElement::Finite(t.mul(*a, *b))
            }
            (
                GroupKind::Dihedral,
                GroupElement::Dihedral { n: m, r: a },
                GroupElement::Dihedral { n, r: b },
            ) => {
                let n = if *a { m - n } else { m + n };
                GroupElement::Dihedral { n, r: a ^ b }
            }
            (GroupKind::Product(ka, kb), GroupElement::Pair(x1, y1), GroupElement::Pair(x2, y2)) => {
                GroupElement::pair(ka.mul_unchecked(x1, x2), kb.mul_unchecked(y1, y2))
            }
            (
                GroupKind::Lamplighter(base),
                GroupElement::Lamp { lamps: f, shift: m },
                GroupElement::Lamp { lamps: g, shift: n },
            ) => {
                // (f, m)(g, n) = (f · shift_m g, m + n)
                let shifted = g.iter().map(|&(p, v)| (p + m, v));
                GroupElement::Lamp {
                    lamps: merge_lamps(base, f.iter().copied(), shifted),
                    shift: m + n,
                }
            }
            _ => panic!("mul_unchecked: element kind mismatch ({g}, {h}) in {}", self.name()),
        }
    }

    pub fn inv_unchecked(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (GroupKind::Integers, GroupElement::Int(a)) => GroupElement::Int(-a),
            (GroupKind::Finite(t), GroupElement::Finite(a)) => GroupElement::Finite(t.inv(*a)),
            (GroupKind::Dihedral, GroupElement::Dihedral { n, r }) => {
                if *r {
                    g.clone()
                } else {
                    GroupElement::Dihedral { n: -n, r: false }
                }
            }
            (GroupKind::Product(ka, kb), GroupElement::Pair(x, y)) => {
                GroupElement::pair(ka.inv_unchecked(x), kb.inv_unchecked(y))
            }
            (GroupKind::Lamplighter(base), GroupElement::Lamp { lamps, shift }) => {
                // (f, m)^{-1} = (shift_{-m} f^{-1}, -m)
                GroupElement::Lamp {
                    lamps: lamps.iter().map(|&(p, v)| (p - shift, base.inv(v))).collect(),
                    shift: -shift,
                }
            }
            _ => panic!("inv_unchecked: element kind mismatch ({g}) in {}", self.name()),
        }
    }

    /// The standard generating set: `1` for ℤ, every non-identity element of
    /// a finite table, `{s, t}` for D∞, the union of factor generators for
    /// products, and `{lamp-at-0 for each non-identity base value, shift 1}`
    /// for lamplighters.
    pub fn default_generators(&self) -> Vec<GroupElement> {
        match self {
            GroupKind::Integers => vec![GroupElement::Int(1)],
            GroupKind::Finite(t) => t
                .elements()
                .filter(|&a| a != t.identity())
                .map(GroupElement::Finite)
                .collect(),
            GroupKind::Dihedral => vec![
                GroupElement::dihedral(1, false),
                GroupElement::dihedral(0, true),
            ],
            GroupKind::Product(a, b) => {
                let mut gens: Vec<_> = a
                    .default_generators()
                    .into_iter()
                    .map(|x| GroupElement::pair(x, b.identity()))
                    .collect();
                gens.extend(
                    b.default_generators()
                        .into_iter()
                        .map(|y| GroupElement::pair(a.identity(), y)),
                );
                gens
            }
            GroupKind::Lamplighter(base) => {
                let mut gens: Vec<_> = base
                    .elements()
                    .filter(|&v| v != base.identity())
                    .map(|v| GroupElement::Lamp {
                        lamps: vec![(0, v)],
                        shift: 0,
                    })
                    .collect();
                gens.push(GroupElement::Lamp {
                    lamps: Vec::new(),
                    shift: 1,
                });
                gens
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            GroupKind::Finite(_) => true,
            GroupKind::Product(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }

    /// All elements of a finite kind, in a fixed order.
    pub fn finite_elements(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupKind::Finite(t) => Some(t.elements().map(GroupElement::Finite).collect()),
            GroupKind::Product(a, b) => {
                let xs = a.finite_elements()?;
                let ys = b.finite_elements()?;
                Some(
                    xs.iter()
                        .flat_map(|x| ys.iter().map(move |y| GroupElement::pair(x.clone(), y.clone())))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Parses an element in the JSON form of [`GroupElement::to_json`].
    pub fn parse_element(&self, v: &Value) -> Result<GroupElement> {
        let bad = |msg: &str| Error::config("", format!("{msg}: {v} for {}", self.name()));
        let g = match self {
            GroupKind::Integers => GroupElement::Int(v.as_i64().ok_or_else(|| bad("expected integer"))?),
            GroupKind::Finite(_) => GroupElement::Finite(
                v.as_u64().ok_or_else(|| bad("expected table index"))? as u32,
            ),
            GroupKind::Dihedral => {
                let n = v.get("n").and_then(Value::as_i64).ok_or_else(|| bad("expected {n, r}"))?;
                let r = match v.get("r") {
                    None => false,
                    Some(Value::Bool(b)) => *b,
                    Some(x) => match x.as_u64() {
                        Some(0) => false,
                        Some(1) => true,
                        _ => return Err(bad("r must be 0 or 1")),
                    },
                };
                GroupElement::dihedral(n, r)
            }
            GroupKind::Product(a, b) => {
                let arr = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("expected [left, right]"))?;
                GroupElement::pair(a.parse_element(&arr[0])?, b.parse_element(&arr[1])?)
            }
            GroupKind::Lamplighter(base) => {
                let shift = v.get("shift").and_then(Value::as_i64).unwrap_or(0);
                let raw = v.get("lamps").and_then(Value::as_array).ok_or_else(|| bad("expected {lamps, shift}"))?;
                let mut lamps = Vec::new();
                for item in raw {
                    if let Some(p) = item.as_i64() {
                        if base.order() < 2 {
                            return Err(bad("trivial lamp group"));
                        }
                        lamps.push((p, 1u32));
                    } else if let Some(pv) = item.as_array().filter(|a| a.len() == 2) {
                        let p = pv[0].as_i64().ok_or_else(|| bad("lamp position"))?;
                        let val = pv[1].as_u64().ok_or_else(|| bad("lamp value"))? as u32;
                        if val != base.identity() {
                            lamps.push((p, val));
                        }
                    } else {
                        return Err(bad("lamp entry"));
                    }
                }
                lamps.sort_unstable();
                if lamps.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(bad("duplicate lamp position"));
                }
                GroupElement::Lamp { lamps, shift }
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    pub fn to_json(&self) -> Value {
        match self {
            GroupKind::Integers => json!({"kind": "integers"}),
            GroupKind::Finite(t) => json!({"kind": "finite", "table": t.table()}),
            GroupKind::Dihedral => json!({"kind": "dihedral"}),
            GroupKind::Product(a, b) => json!({"kind": "product", "left": a.to_json(), "right": b.to_json()}),
            GroupKind::Lamplighter(t) => json!({"kind": "lamplighter", "base": {"kind": "finite", "table": t.table()}}),
        }
    }

    pub fn from_json(v: &Value, pointer: &str) -> Result<GroupKind> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config(format!("{pointer}/kind"), "missing group kind"))?;
        let table_at = |v: &Value, p: &str| -> Result<FiniteGroup> {
            let t: Vec<Vec<u32>> = serde_json::from_value(
                v.get("table")
                    .cloned()
                    .ok_or_else(|| Error::config(format!("{p}/table"), "missing table"))?,
            )
            .map_err(|e| Error::config(format!("{p}/table"), e.to_string()))?;
            FiniteGroup::from_table(t).map_err(|e| Error::config(format!("{p}/table"), e.to_string()))
        };
        Ok(match kind {
            "integers" => GroupKind::Integers,
            "dihedral" | "dihedral-infinite" => GroupKind::Dihedral,
            "finite" | "finite-table" => GroupKind::Finite(table_at(v, pointer)?),
            "cyclic" => {
                let n = v
                    .get("order")
                    .and_then(Value::as_u64)
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::config(format!("{pointer}/order"), "expected positive order"))?;
                GroupKind::Finite(FiniteGroup::cyclic(n as u32))
            }
            "product" | "direct-product" => {
                let l = v.get("left").ok_or_else(|| Error::config(format!("{pointer}/left"), "missing"))?;
                let r = v.get("right").ok_or_else(|| Error::config(format!("{pointer}/right"), "missing"))?;
                GroupKind::Product(
                    Box::new(GroupKind::from_json(l, &format!("{pointer}/left"))?),
                    Box::new(GroupKind::from_json(r, &format!("{pointer}/right"))?),
                )
            }
            "lamplighter" => {
                let base = match v.get("base") {
                    Some(b) => match GroupKind::from_json(b, &format!("{pointer}/base"))? {
                        GroupKind::Finite(t) => t,
                        _ => return Err(Error::config(format!("{pointer}/base"), "base must be finite")),
                    },
                    None => FiniteGroup::cyclic(2),
                };
                GroupKind::Lamplighter(base)
            }
            other => return Err(Error::config(format!("{pointer}/kind"), format!("unknown kind {other:?}"))),
        })
    }
}

/// Pointwise product of two sorted lamp maps, dropping identity values.
fn merge_lamps(
    base: &FiniteGroup,
    f: impl Iterator<Item = (i64, u32)>,
    g: impl Iterator<Item = (i64, u32)>,
) -> Vec<(i64, u32)> {
    let mut out = Vec::new();
    let mut f = f.peekable();
    let mut g = g.peekable();
    loop {
        match (f.peek().copied(), g.peek().copied()) {
            (None, None) => break,
            (Some(a), None) => {
                out.push(a);
                f.next();
            }
            (None, Some(b)) => {
                out.push(b);
                g.next();
            }
            (Some(a), Some(b)) => {
                if a.0 < b.0 {
                    out.push(a);
                    f.next();
                } else if b.0 < a.0 {
                    out.push(b);
                    g.next();
                } else {
                    let v = base.mul(a.1, b.1);
                    if v != base.identity() {
                        out.push((a.0, v));
                    }
                    f.next();
                    g.next();
                }
            }
        }
    }
    out
}
