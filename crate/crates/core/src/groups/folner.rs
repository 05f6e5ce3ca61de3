use rustc_hash::FxHashSet;

use serde_json::{json, Value};

use super::{GroupDescriptor, GroupElement};
use crate::error::{Error, Result};
use crate::exact::{format_rational, ratio, Rational};

/// Data of the extension construction `A = S̃ · F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerTrace {
    pub quotient_set: Vec<GroupElement>,
    pub lift: Vec<GroupElement>,
    pub subgroup: Vec<GroupElement>,
    pub quotient_defect: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerCertificate {
    pub set: Vec<GroupElement>,
    pub test_set: Vec<GroupElement>,
    pub defect: Rational,
    pub trace: Option<FolnerTrace>,
}

impl FolnerCertificate {
    /// Summary JSON; the set itself is omitted above `max_listed` elements.
    pub fn to_json(&self, max_listed: usize) -> Value {
        let list = |v: &[GroupElement]| -> Value {
            if v.len() <= max_listed {
                Value::Array(v.iter().map(GroupElement::to_json).collect())
            } else {
                Value::Null
            }
        };
        let mut out = json!({
            "size": self.set.len(),
            "set": list(&self.set),
            "K": list(&self.test_set),
            "defect": format_rational(&self.defect),
        });
        if let Some(t) = &self.trace {
            out["trace"] = json!({
                "quotientSet": list(&t.quotient_set),
                "lift": list(&t.lift),
                "subgroupSize": t.subgroup.len(),
                "subgroup": list(&t.subgroup),
                "quotientDefect": format_rational(&t.quotient_defect),
            });
        }
        out
    }
}

/// Exact `|K·A ∖ A| / |A|`.
pub fn verify_folner(desc: &GroupDescriptor, a: &[GroupElement], k: &[GroupElement]) -> Result<Rational> {
    let (size, outside) = boundary(desc, a, k)?;
    Ok(ratio(outside, size))
}

/// `(|A|, |K·A ∖ A|)` with `A` deduplicated.
fn boundary(desc: &GroupDescriptor, a: &[GroupElement], k: &[GroupElement]) -> Result<(usize, usize)> {
    for g in a.iter().chain(k) {
        desc.kind.check(g)?;
    }
    let mut set: FxHashSet<&GroupElement> = FxHashSet::default();
    set.reserve(a.len());
    set.extend(a.iter());
    if set.is_empty() {
        return Err(Error::precondition("Følner set must be nonempty"));
    }
    let mut outside: FxHashSet<GroupElement> = FxHashSet::default();
    for x in k {
        for g in a {
            let y = desc.mul_u(x, g);
            if !set.contains(&y) {
                outside.insert(y);
            }
        }
    }
    Ok((set.len(), outside.len()))
}

/// From a `(ρ(K), ε/|K|)`-Følner set `S` of the quotient and a
/// finite subgroup `F_n ≤ H` absorbing `S̃⁻¹KS̃ ∩ H`, builds `A = S̃·F_n`
/// with `|K·A ∖ A| < ε|A|`.
pub fn folner_in_extension(
    desc: &GroupDescriptor,
    k: &[GroupElement],
    eps: Rational,
    s: &[GroupElement],
    f_n: &[GroupElement],
) -> Result<FolnerCertificate> {
    let quotient = desc.quotient()?;
    let mut k_set: Vec<GroupElement> = Vec::new();
    for x in k {
        desc.kind.check(x)?;
        if !k_set.contains(x) {
            k_set.push(x.clone());
        }
    }
    if k_set.is_empty() {
        return Err(Error::precondition("K must be nonempty"));
    }
    let mut s_set: Vec<GroupElement> = Vec::new();
    for q in s {
        if !s_set.contains(q) {
            s_set.push(q.clone());
        }
    }
    let mut proj_k: Vec<GroupElement> = Vec::new();
    for x in &k_set {
        let q = desc.project(x)?;
        if !proj_k.contains(&q) {
            proj_k.push(q);
        }
    }
    let quotient_defect = verify_folner(quotient, &s_set, &proj_k)?;
    let bound = eps / Rational::from_integer(k_set.len() as i64);
    if quotient_defect >= bound {
        return Err(Error::precondition_with(
            format!("S is not (ρ(K), ε/|K|)-Følner: defect {} ≥ {}", format_rational(&quotient_defect), format_rational(&bound)),
            format!("|S| = {}", s_set.len()),
        ));
    }

    let f_set = check_finite_subgroup(desc, f_n)?;

    let lift: Vec<GroupElement> = s_set.iter().map(|q| desc.lift(q)).collect::<Result<_>>()?;
    let lift_inv: Vec<GroupElement> = lift.iter().map(|g| desc.inv_u(g)).collect();
    for a_inv in &lift_inv {
        for x in &k_set {
            let ax = desc.mul_u(a_inv, x);
            for b in &lift {
                let h = desc.mul_u(&ax, b);
                if desc.in_kernel(&h)? && !f_set.contains(&h) {
                    return Err(Error::precondition_with(
                        "F_n does not contain S̃⁻¹KS̃ ∩ H",
                        h.to_string(),
                    ));
                }
            }
        }
    }

    let mut set = Vec::with_capacity(lift.len() * f_n.len());
    for g in &lift {
        for h in f_n {
            set.push(desc.mul_u(g, h));
        }
    }
    let (distinct, outside) = boundary(desc, &set, &k_set)?;
    if distinct != set.len() {
        return Err(Error::Construction(format!(
            "cosets g·F_n overlap: |A| = {distinct} < |S|·|F_n| = {}",
            set.len()
        )));
    }
    let defect = ratio(outside, distinct);
    if defect >= eps {
        return Err(Error::Construction(format!(
            "extension bound violated: defect {} ≥ {}",
            format_rational(&defect),
            format_rational(&eps)
        )));
    }
    Ok(FolnerCertificate {
        set,
        test_set: k_set,
        defect,
        trace: Some(FolnerTrace {
            quotient_set: s_set,
            lift,
            subgroup: f_n.to_vec(),
            quotient_defect,
        }),
    })
}

/// Checks that `f` is a finite subgroup of the kernel by growing the
/// subgroup generated by its elements and comparing.
fn check_finite_subgroup(desc: &GroupDescriptor, f: &[GroupElement]) -> Result<FxHashSet<GroupElement>> {
    let f_set: FxHashSet<GroupElement> = f.iter().cloned().collect();
    if f_set.len() != f.len() {
        return Err(Error::precondition("F_n lists an element twice"));
    }
    for h in f {
        desc.kind.check(h)?;
        if !desc.in_kernel(h)? {
            return Err(Error::precondition_with("F_n is not inside H", h.to_string()));
        }
    }
    let e = desc.identity();
    if !f_set.contains(&e) {
        return Err(Error::precondition("F_n does not contain the identity"));
    }
    let mut gens: Vec<GroupElement> = Vec::new();
    let mut generated: FxHashSet<GroupElement> = std::iter::once(e.clone()).collect();
    for h in f {
        if generated.contains(h) {
            continue;
        }
        gens.push(h.clone());
        let mut closure: FxHashSet<GroupElement> = std::iter::once(e.clone()).collect();
        let mut frontier = vec![e.clone()];
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = desc.mul_u(&x, g);
                if !f_set.contains(&y) {
                    return Err(Error::precondition_with("F_n is not closed under multiplication", y.to_string()));
                }
                if closure.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        generated = closure;
    }
    Ok(f_set)
}
