use castleworks::groups::{FiniteGroup, GroupDescriptor, GroupElement};
use castleworks::words::{CylinderPattern, Word};
use castleworks::Error;
use proptest::prelude::*;

fn d(n: i64, r: bool) -> GroupElement {
    GroupElement::dihedral(n, r)
}

fn name(w: &Word, g: &GroupElement) -> String {
    w.symbol_name(w.eval(g).unwrap()).to_string()
}

/// Fills a window stage by stage, stepping through residue classes, never
/// overwriting an earlier assignment.
fn stage_fill(stages: &[(i64, i64, &str)], lo: i64, hi: i64) -> Vec<Option<String>> {
    let mut out = vec![None; (hi - lo + 1) as usize];
    for &(p, r, s) in stages {
        let mut n = lo + (r - lo).rem_euclid(p);
        while n <= hi {
            let slot = &mut out[(n - lo) as usize];
            if slot.is_none() {
                *slot = Some(s.to_string());
            }
            n += p;
        }
    }
    out
}

fn pd_stages(levels: u32) -> Vec<(i64, i64, &'static str)> {
    let sym = |k: u32| if k % 2 == 1 { "0" } else { "1" };
    let mut v: Vec<_> = (1..=levels).map(|k| (1i64 << k, (1i64 << (k - 1)) - 1, sym(k))).collect();
    v.push((1 << levels, (1 << levels) - 1, sym(levels + 1)));
    v
}

#[test]
fn periodic_eval() {
    let w = Word::periodic("01").unwrap();
    assert_eq!(name(&w, &GroupElement::Int(5)), "1");
    assert_eq!(name(&w, &GroupElement::Int(-4)), "0");
    assert!(matches!(w.eval(&d(0, false)), Err(Error::KindMismatch { .. })));
}

#[test]
fn period_doubling_matches_stage_filling() {
    let w = Word::period_doubling(13).unwrap();
    let lo = -(1 << 12);
    let hi = 1 << 12;
    let oracle = stage_fill(&pd_stages(13), lo, hi);
    for (i, want) in oracle.iter().enumerate() {
        let n = lo + i as i64;
        assert_eq!(Some(w.symbol_name(w.at(n)).to_string()), *want, "n = {n}");
    }
    let first: String = (0..8).map(|n| w.symbol_name(w.at(n)).to_string()).collect();
    let want: String = oracle[(-lo) as usize..(-lo + 8) as usize].iter().map(|s| s.clone().unwrap()).collect();
    assert_eq!(first, want);
    assert_eq!(first, "01000101");
}

#[test]
fn toeplitz_two_stage_is_periodic() {
    let w = Word::toeplitz(&[(2, 0, "a"), (2, 1, "b")]).unwrap();
    for n in -20..20 {
        assert_eq!(w.symbol_name(w.at(n)), if n.rem_euclid(2) == 0 { "a" } else { "b" });
    }
}

#[test]
fn toeplitz_incomplete_reports_smallest_gap() {
    let err = Word::toeplitz(&[(2, 0, "a"), (4, 1, "b")]).unwrap_err();
    assert_eq!(err, Error::IncompleteStages(-1));
    let err = Word::toeplitz(&[(4, 0, "a"), (4, 3, "b"), (8, 1, "a")]).unwrap_err();
    assert!(matches!(err, Error::IncompleteStages(n) if n.abs() == 2), "{err:?}");
    assert!(Word::toeplitz(&[(2, 0, "a"), (3, 1, "b")]).is_err());
}

#[test]
fn toeplitz_regularity() {
    let stages = pd_stages(8);
    let w = Word::period_doubling(8).unwrap();
    for n in -300i64..300 {
        let ok = stages.iter().any(|&(p, _, _)| {
            let s = w.at(n);
            (-300i64..300).filter(|m| (m - n).rem_euclid(p) == 0).all(|m| w.at(m) == s)
        });
        assert!(ok, "n = {n}");
    }
}

#[test]
fn mirror_laws() {
    let w = Word::period_doubling(12).unwrap();
    let m = w.mirror().unwrap();
    let mm = m.mirror().unwrap();
    for n in -1000..=1000 {
        assert_eq!(mm.at(n), w.at(n));
        assert_eq!(m.at(n), w.at(-n));
    }
    let p = Word::periodic("01").unwrap().mirror().unwrap();
    assert_eq!(p.symbol_name(p.at(0)), "0");
    assert_eq!(p.symbol_name(p.at(-1)), "1");
    assert!(w.amplify().unwrap().mirror().is_err());
}

#[test]
fn amplified_laws() {
    let w = Word::period_doubling(12).unwrap();
    let a = w.amplify().unwrap();
    assert_eq!(a.eval(&d(3, true)).unwrap(), w.at(-3));
    assert_eq!(a.eval(&d(0, true)).unwrap(), w.at(0));
    for n in -100..=100 {
        assert_eq!(a.eval(&d(n, false)).unwrap(), w.at(n));
        assert_eq!(a.eval(&d(n, true)).unwrap(), w.at(-n));
    }
    // t fixes ŵ: (t·ŵ)(h) = ŵ(t⁻¹h)
    let t = d(0, true);
    let ta = a.shift(&t).unwrap();
    for h in GroupDescriptor::dihedral().ball(1000).unwrap().elements() {
        assert_eq!(ta.eval(h).unwrap(), a.eval(h).unwrap());
    }
}

/// Two-coordinate view x = (x₁, x₂) with x₁(n) = x(s^n), x₂(n) = x(s^n t):
/// t·x = (x̄₂, x̄₁).
#[test]
fn amplified_mirror_action_law() {
    let w = Word::period_doubling(10).unwrap();
    let a = w.amplify().unwrap().shift(&d(5, false)).unwrap();
    let ta = a.shift(&d(0, true)).unwrap();
    for n in -50..=50 {
        let x1 = |m: i64| a.eval(&d(m, false)).unwrap();
        let x2 = |m: i64| a.eval(&d(m, true)).unwrap();
        assert_eq!(ta.eval(&d(n, false)).unwrap(), x2(-n));
        assert_eq!(ta.eval(&d(n, true)).unwrap(), x1(-n));
    }
}

#[test]
fn product_word_laws() {
    let f = FiniteGroup::cyclic(2);
    let inner = Word::period_doubling(10).unwrap().amplify().unwrap();
    let x0 = inner.product(&f).unwrap();
    assert_eq!(x0.alphabet.len(), 3);
    assert_eq!(x0.alphabet.symbols(), ["0", "a_0", "a_1"]);
    let one = inner.alphabet.index_of("1").unwrap();
    let g = d(1, false);
    assert_eq!(inner.eval(&g).unwrap(), one);
    for s in 0..2u32 {
        let p = GroupElement::pair(g.clone(), GroupElement::Finite(s));
        assert_eq!(x0.symbol_name(x0.eval(&p).unwrap()), format!("a_{s}"));
    }
    // ((e, t)·x₀)(g, s) = x₀(g, t⁻¹s) = w_{t⁻¹s}(g)
    let t = GroupElement::pair(d(0, false), GroupElement::Finite(1));
    let shifted = x0.shift(&t).unwrap();
    for gg in GroupDescriptor::dihedral().ball(20).unwrap().elements() {
        for s in 0..2u32 {
            let p = GroupElement::pair(gg.clone(), GroupElement::Finite(s));
            let ts = (s + 1) % 2;
            let want = if inner.eval(gg).unwrap() == one { format!("a_{ts}") } else { "0".into() };
            assert_eq!(shifted.symbol_name(shifted.eval(&p).unwrap()), want);
        }
    }
    assert!(Word::periodic("012").unwrap().product(&f).is_err());
}

#[test]
fn product_word_alphabet_separation() {
    let f = FiniteGroup::cyclic(3);
    let x0 = Word::period_doubling(8).unwrap().amplify().unwrap().product(&f).unwrap();
    for g in GroupDescriptor::dihedral().ball(40).unwrap().elements() {
        for s in 0..3u32 {
            let v = x0.eval(&GroupElement::pair(g.clone(), GroupElement::Finite(s))).unwrap();
            assert!(v == 0 || v == 1 + s as u8);
        }
    }
}

#[test]
fn shift_examples() {
    let w = Word::periodic("0012").unwrap();
    assert_eq!(w.shift(&GroupElement::Int(0)).unwrap(), w);
    for n in -12..12 {
        let s = w.shift(&GroupElement::Int(n)).unwrap();
        let same = (-40..40).all(|m| s.at(m) == w.at(m));
        assert_eq!(same, n % 4 == 0, "n = {n}");
    }
}

#[test]
fn factor_language_counts() {
    for cycle in ["01", "001", "01101", "000000000001"] {
        let p = cycle.len();
        let w = Word::periodic(cycle).unwrap();
        let window: Vec<_> = (0..2 * p as i64).map(GroupElement::Int).collect();
        for r in p..p + 3 {
            assert_eq!(w.factor_language(r, &window).unwrap().len(), p, "{cycle} r={r}");
        }
        let syms: std::collections::BTreeSet<char> = cycle.chars().collect();
        assert_eq!(w.factor_language(0, &window).unwrap().len(), syms.len());
    }
}

#[test]
fn amplified_language_is_reflection_paired() {
    // The pattern at g·t is the pattern at g read through d ↦ t·d.
    let a = Word::period_doubling(10).unwrap().amplify().unwrap();
    let g = GroupDescriptor::dihedral();
    let dom = g.ball(3).unwrap();
    let t = d(0, true);
    for p in g.ball(30).unwrap().elements() {
        let pt = g.mul(p, &t).unwrap();
        let at_pt = CylinderPattern::read(&a, &pt, dom.elements());
        let td: Vec<_> = dom.elements().iter().map(|x| g.mul(&t, x).unwrap()).collect();
        let mirrored = CylinderPattern::read(&a, p, &td);
        assert_eq!(at_pt.symbols, mirrored.symbols);
    }
}

#[test]
fn word_json_round_trip() {
    let w = Word::period_doubling(6).unwrap().amplify().unwrap().product(&FiniteGroup::cyclic(2)).unwrap();
    let back = Word::from_json(&w.to_json(), "").unwrap();
    assert_eq!(back, w);
    let spec = serde_json::json!({"kind": "toeplitz", "stages": [[2, 0, "0"], [4, 1, "1"], [4, 3, "0"]]});
    let w = Word::from_json(&spec, "").unwrap();
    assert_eq!(w.symbol_name(w.at(3)), "0");
    let bad = serde_json::json!({"kind": "toeplitz", "stages": [[2, 0]]});
    assert!(matches!(Word::from_json(&bad, "/word"), Err(Error::Config { pointer, .. }) if pointer == "/word/stages/0"));
}

proptest! {
    #[test]
    fn shift_is_an_action(a in -4i64..=4, ar in any::<bool>(), b in -4i64..=4, br in any::<bool>()) {
        let w = Word::period_doubling(10).unwrap().amplify().unwrap();
        let grp = GroupDescriptor::dihedral();
        let g = d(a, ar);
        let h = d(b, br);
        let lhs = w.shift(&h).unwrap().shift(&g).unwrap();
        let rhs = w.shift(&grp.mul(&g, &h).unwrap()).unwrap();
        for x in grp.ball(64).unwrap().elements() {
            prop_assert_eq!(lhs.eval(x).unwrap(), rhs.eval(x).unwrap());
        }
    }
}
