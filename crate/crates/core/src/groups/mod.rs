//! Exact group arithmetic, balls, extensions and Følner certificates.

mod ball;
mod element;
mod finite;
mod folner;
mod kind;

use serde_json::{json, Value};

pub use ball::{Ball, DEFAULT_BALL_CAP};
pub use element::GroupElement;
pub use finite::FiniteGroup;
pub use folner::{folner_in_extension, verify_folner, FolnerCertificate, FolnerTrace};
pub use kind::GroupKind;

use crate::error::{Error, Result};

/// How an extension `H → Γ → G` is read off the group kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionRule {
    /// Γ = G × H, project to the left factor, lift `q ↦ (q, e)`.
    ProductLeft,
    /// Γ = H × G, project to the right factor, lift `q ↦ (e, q)`.
    ProductRight,
    /// Lamplighter over ℤ, project to the lighter position, zero-lamp lift.
    LampShift,
    /// D∞ onto ℤ₂ via the reflection bit; kernel is the rotation subgroup ℤ.
    DihedralParity,
}

impl ExtensionRule {
    pub fn name(self) -> &'static str {
        match self {
            ExtensionRule::ProductLeft => "product-left",
            ExtensionRule::ProductRight => "product-right",
            ExtensionRule::LampShift => "lamp-shift",
            ExtensionRule::DihedralParity => "dihedral-parity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "product-left" => ExtensionRule::ProductLeft,
            "product-right" => ExtensionRule::ProductRight,
            "lamp-shift" => ExtensionRule::LampShift,
            "dihedral-parity" => ExtensionRule::DihedralParity,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub rule: ExtensionRule,
    pub quotient: GroupDescriptor,
    /// The normal subgroup as a standalone group, when it is one of the
    /// supported kinds (`None` for the lamp group).
    pub kernel: Option<GroupDescriptor>,
}

/// A group together with a generating set and an optional extension
/// structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDescriptor {
    pub kind: GroupKind,
    pub generators: Vec<GroupElement>,
    pub extension: Option<Box<Extension>>,
}

impl GroupDescriptor {
    /// Descriptor with the kind's standard generators.
    pub fn new(kind: GroupKind) -> Self {
        let generators = kind.default_generators();
        GroupDescriptor {
            kind,
            generators,
            extension: None,
        }
    }

    pub fn integers() -> Self {
        Self::new(GroupKind::Integers)
    }

    pub fn dihedral() -> Self {
        Self::new(GroupKind::Dihedral)
    }

    pub fn cyclic(n: u32) -> Self {
        Self::new(GroupKind::Finite(FiniteGroup::cyclic(n)))
    }

    /// `left × right` with the union of factor generators.
    pub fn product(left: GroupKind, right: GroupKind) -> Self {
        Self::new(GroupKind::Product(Box::new(left), Box::new(right)))
    }

    /// D∞ × F with the extension `F → D∞×F → D∞`.
    pub fn dihedral_times(f: FiniteGroup) -> Self {
        Self::product(GroupKind::Dihedral, GroupKind::Finite(f))
            .with_extension(ExtensionRule::ProductLeft)
            .expect("product-left applies to products")
    }

    /// Lamplighter over `base` with the lamp-shift extension.
    pub fn lamplighter(base: FiniteGroup) -> Self {
        Self::new(GroupKind::Lamplighter(base))
            .with_extension(ExtensionRule::LampShift)
            .expect("lamp-shift applies to lamplighters")
    }

    pub fn with_generators(mut self, generators: Vec<GroupElement>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::precondition("generating set must be nonempty"));
        }
        for g in &generators {
            self.kind.check(g)?;
        }
        self.generators = generators;
        Ok(self)
    }

    /// Attaches an extension structure and checks it on small balls.
    pub fn with_extension(mut self, rule: ExtensionRule) -> Result<Self> {
        let (quotient_kind, kernel) = match (&self.kind, rule) {
            (GroupKind::Product(l, r), ExtensionRule::ProductLeft) => {
                ((**l).clone(), Some(GroupDescriptor::new((**r).clone())))
            }
            (GroupKind::Product(l, r), ExtensionRule::ProductRight) => {
                ((**r).clone(), Some(GroupDescriptor::new((**l).clone())))
            }
            (GroupKind::Lamplighter(_), ExtensionRule::LampShift) => (GroupKind::Integers, None),
            (GroupKind::Dihedral, ExtensionRule::DihedralParity) => (
                GroupKind::Finite(FiniteGroup::cyclic(2)),
                Some(GroupDescriptor::integers()),
            ),
            _ => {
                return Err(Error::precondition_with(
                    "extension rule does not apply to group kind",
                    format!("{} on {}", rule.name(), self.kind.name()),
                ))
            }
        };
        let mut quotient = GroupDescriptor::new(quotient_kind);
        // Quotient generators are the projected generators of Γ, so word
        // lengths are compatible with the projection.
        let mut qgens = Vec::new();
        for g in &self.generators {
            let q = project_by(rule, g);
            if q != quotient.kind.identity() && !qgens.contains(&q) {
                qgens.push(q);
            }
        }
        if !qgens.is_empty() {
            quotient.generators = qgens;
        }
        self.extension = Some(Box::new(Extension {
            rule,
            quotient,
            kernel,
        }));
        self.check_extension(2)?;
        Ok(self)
    }

    pub fn identity(&self) -> GroupElement {
        self.kind.identity()
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.kind.mul(g, h)
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.kind.inv(g)
    }

    /// Product without validation, for hot loops over elements that were
    /// produced by this descriptor.
    pub fn mul_u(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.kind.mul_unchecked(g, h)
    }

    pub fn inv_u(&self, g: &GroupElement) -> GroupElement {
        self.kind.inv_unchecked(g)
    }

    /// Generators closed under inverses, deduplicated, identity removed,
    /// in first-seen order.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let e = self.identity();
        let mut out: Vec<GroupElement> = Vec::new();
        for g in &self.generators {
            for x in [g.clone(), self.inv_u(g)] {
                if x != e && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn ball(&self, radius: usize) -> Result<Ball> {
        Ball::new(self, radius, DEFAULT_BALL_CAP)
    }

    pub fn extension(&self) -> Result<&Extension> {
        self.extension.as_deref().ok_or(Error::NoExtension)
    }

    pub fn quotient(&self) -> Result<&GroupDescriptor> {
        Ok(&self.extension()?.quotient)
    }

    /// The quotient homomorphism ρ: Γ → G.
    pub fn project(&self, g: &GroupElement) -> Result<GroupElement> {
        let ext = self.extension()?;
        self.kind.check(g)?;
        Ok(project_by(ext.rule, g))
    }

    /// The fixed section G → Γ.
    pub fn lift(&self, q: &GroupElement) -> Result<GroupElement> {
        let ext = self.extension()?;
        ext.quotient.kind.check(q)?;
        Ok(match (ext.rule, &self.kind) {
            (ExtensionRule::ProductLeft, GroupKind::Product(_, r)) => {
                GroupElement::pair(q.clone(), r.identity())
            }
            (ExtensionRule::ProductRight, GroupKind::Product(l, _)) => {
                GroupElement::pair(l.identity(), q.clone())
            }
            (ExtensionRule::LampShift, _) => GroupElement::Lamp {
                lamps: Vec::new(),
                shift: q.as_int().expect("checked"),
            },
            (ExtensionRule::DihedralParity, _) => {
                GroupElement::dihedral(0, matches!(q, GroupElement::Finite(1)))
            }
            _ => unreachable!("extension validated at construction"),
        })
    }

    /// Whether `g` lies in the normal subgroup H.
    pub fn in_kernel(&self, g: &GroupElement) -> Result<bool> {
        let q = self.project(g)?;
        Ok(q == self.quotient()?.identity())
    }

    /// All elements of H as elements of Γ, when H is finite.
    pub fn kernel_elements(&self) -> Result<Option<Vec<GroupElement>>> {
        let ext = self.extension()?;
        let Some(k) = &ext.kernel else {
            return Ok(None);
        };
        let Some(hs) = k.kind.finite_elements() else {
            return Ok(None);
        };
        Ok(Some(
            hs.into_iter()
                .map(|h| match (ext.rule, &self.kind) {
                    (ExtensionRule::ProductLeft, GroupKind::Product(l, _)) => {
                        GroupElement::pair(l.identity(), h)
                    }
                    (ExtensionRule::ProductRight, GroupKind::Product(_, r)) => {
                        GroupElement::pair(h, r.identity())
                    }
                    _ => unreachable!("finite kernels only arise from products"),
                })
                .collect(),
        ))
    }

    /// Checks the homomorphism law of `project` on pairs from ball(radius)
    /// and `project ∘ lift = id` on the quotient ball of the same radius.
    pub fn check_extension(&self, radius: usize) -> Result<()> {
        let ext = self.extension()?;
        let ball = self.ball(radius)?;
        let proj: Vec<GroupElement> = ball
            .elements()
            .iter()
            .map(|g| project_by(ext.rule, g))
            .collect();
        for (i, g) in ball.elements().iter().enumerate() {
            for (j, h) in ball.elements().iter().enumerate() {
                let lhs = project_by(ext.rule, &self.mul_u(g, h));
                let rhs = ext.quotient.mul_u(&proj[i], &proj[j]);
                if lhs != rhs {
                    return Err(Error::precondition_with(
                        "projection is not a homomorphism",
                        format!("({g}, {h})"),
                    ));
                }
            }
        }
        for q in ext.quotient.ball(radius)?.elements() {
            if self.project(&self.lift(q)?)? != *q {
                return Err(Error::precondition_with("project ∘ lift ≠ id", q.to_string()));
            }
        }
        Ok(())
    }

    pub fn parse_element(&self, v: &Value) -> Result<GroupElement> {
        self.kind.parse_element(v)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.kind.to_json();
        v["generators"] = Value::Array(self.generators.iter().map(GroupElement::to_json).collect());
        if let Some(ext) = &self.extension {
            v["extension"] = json!({"rule": ext.rule.name()});
        }
        v
    }

    /// Loads `{"kind", ..., "generators"?, "extension"?: {"rule"}}`.
    pub fn from_json(v: &Value, pointer: &str) -> Result<Self> {
        let kind = GroupKind::from_json(v, pointer)?;
        let mut desc = GroupDescriptor::new(kind);
        if let Some(gens) = v.get("generators") {
            let arr = gens
                .as_array()
                .ok_or_else(|| Error::config(format!("{pointer}/generators"), "expected array"))?;
            let mut parsed = Vec::new();
            for (i, g) in arr.iter().enumerate() {
                parsed.push(desc.parse_element(g).map_err(|e| {
                    Error::config(format!("{pointer}/generators/{i}"), e.to_string())
                })?);
            }
            desc = desc
                .with_generators(parsed)
                .map_err(|e| Error::config(format!("{pointer}/generators"), e.to_string()))?;
        }
        if let Some(ext) = v.get("extension") {
            let rule = ext
                .get("rule")
                .and_then(Value::as_str)
                .and_then(ExtensionRule::parse)
                .ok_or_else(|| Error::config(format!("{pointer}/extension/rule"), "unknown extension rule"))?;
            desc = desc
                .with_extension(rule)
                .map_err(|e| Error::config(format!("{pointer}/extension"), e.to_string()))?;
        }
        Ok(desc)
    }
}

fn project_by(rule: ExtensionRule, g: &GroupElement) -> GroupElement {
    match (rule, g) {
        (ExtensionRule::ProductLeft, GroupElement::Pair(a, _)) => (**a).clone(),
        (ExtensionRule::ProductRight, GroupElement::Pair(_, b)) => (**b).clone(),
        (ExtensionRule::LampShift, GroupElement::Lamp { shift, .. }) => GroupElement::Int(*shift),
        (ExtensionRule::DihedralParity, GroupElement::Dihedral { r, .. }) => {
            GroupElement::Finite(u32::from(*r))
        }
        _ => panic!("project: {g} does not match rule {}", rule.name()),
    }
}
