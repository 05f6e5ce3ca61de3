use castleworks::castles::*;
use castleworks::comparison::*;
use castleworks::groups::GroupElement;
use castleworks::subshift::{Algebra, CylinderSet, Sample};
use castleworks::{Rational, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn z(n: i64) -> GroupElement {
    GroupElement::Int(n)
}

fn q(n: i64, m: i64) -> Rational {
    Rational::new(n, m)
}

/// Atom of `x_n` at resolution r.
fn atom_at(sample: &Sample, n: i64, r: usize) -> Vec<u8> {
    sample.pattern(&z(n), sample.ball(r).unwrap().elements())
}

fn set_of(sample: &Sample, ns: &[i64], r: usize) -> CylinderSet {
    CylinderSet::new(r, ns.iter().map(|&n| atom_at(sample, n, r)))
}

/// Number of window positions in a set.
fn count(sample: &Sample, s: &CylinderSet) -> usize {
    let dom = sample.ball(s.resolution).unwrap();
    sample.positions().iter().filter(|p| s.contains(&sample.pattern(p, dom.elements()))).count()
}

fn params(radius: usize) -> SearchParams {
    SearchParams {
        translate_radius: radius,
        budget: 1_000_000,
    }
}

fn periodic_castle(sample: &Sample, p: usize, height: usize) -> Castle {
    Castle::new(vec![Tower {
        shape: (0..height as i64).map(z).collect(),
        base: set_of(sample, &[0], p),
    }])
}

#[test]
fn empty_source_gives_empty_witness() {
    let sample = Sample::new(Word::periodic("01101").unwrap(), 50).unwrap();
    let tgt = set_of(&sample, &[1], 5);
    let out = subequivalence_search(&sample, &CylinderSet::empty(5), &tgt, &params(2)).unwrap();
    assert_eq!(out, SearchOutcome::Found(SubequivalenceWitness::default()));
}

#[test]
fn atom_into_its_translate() {
    let sample = Sample::new(Word::periodic("01101").unwrap(), 60).unwrap();
    let a = set_of(&sample, &[0], 5);
    let alg = Algebra::new(&sample);
    let tgt = alg.translate(&z(2), &a).unwrap();
    let out = subequivalence_search(&sample, &a, &tgt, &params(3)).unwrap();
    let w = out.witness().unwrap_or_else(|| panic!("{out:?}"));
    assert_eq!(w.pieces.len(), 1);
    assert_eq!(w.pieces[0].translate, z(2));
    assert!(verify_subequivalence(&sample, w, &a, &tgt).unwrap().valid());
}

#[test]
fn pigeonhole_on_periodic_words() {
    let sample = Sample::new(Word::periodic("0110100").unwrap(), 70).unwrap();
    let one = set_of(&sample, &[0], 7);
    let two = set_of(&sample, &[3, 5], 7);
    let out = subequivalence_search(&sample, &one, &two, &params(7)).unwrap();
    assert!(verify_subequivalence(&sample, out.witness().unwrap(), &one, &two).unwrap().valid());
    let out = subequivalence_search(&sample, &two, &one, &params(7)).unwrap();
    assert!(matches!(out, SearchOutcome::Infeasible { .. }), "{out:?}");
}

#[test]
fn overlapping_images_fail_verification() {
    let sample = Sample::new(Word::periodic("01101").unwrap(), 40).unwrap();
    let src = set_of(&sample, &[0, 1], 5);
    let tgt = set_of(&sample, &[0], 5);
    // Position 0 moved by 0 and position 1 moved by −1 ... onto position 0 twice.
    let w = SubequivalenceWitness {
        pieces: vec![
            Piece {
                set: set_of(&sample, &[0], 5),
                translate: z(0),
            },
            Piece {
                set: set_of(&sample, &[1], 5),
                translate: z(1),
            },
        ],
    };
    let check = verify_subequivalence(&sample, &w, &src, &tgt).unwrap();
    assert!(check.overlap.is_some());
    assert!(!check.valid());
    // Dropping a piece leaves part of the source uncovered.
    let w1 = SubequivalenceWitness {
        pieces: w.pieces[..1].to_vec(),
    };
    assert!(verify_subequivalence(&sample, &w1, &src, &tgt).unwrap().uncovered.is_some());
}

#[test]
fn witness_json_round_trip() {
    let sample = Sample::new(Word::periodic("011").unwrap(), 30).unwrap();
    let a = set_of(&sample, &[0], 3);
    let b = set_of(&sample, &[1, 2], 3);
    let out = subequivalence_search(&sample, &a, &b, &params(2)).unwrap();
    let w = out.witness().unwrap();
    let back = SubequivalenceWitness::from_json(&w.to_json(&sample), &sample, "").unwrap();
    assert_eq!(&back, w);
}

#[test]
fn castle_comparison_single_tower() {
    let p = 5;
    let sample = Sample::new(Word::periodic("01101").unwrap(), 100).unwrap();
    let castle = periodic_castle(&sample, p, p);
    let a = set_of(&sample, &[0], p);
    // Level s = j holds x_n with n ≡ −j; pick three levels for B.
    let b = set_of(&sample, &[-2, -3, -4], p);
    let cmp = comparison_from_castle(&sample, &a, &b, &castle, &[vec![1]], None).unwrap();
    assert_eq!(cmp.s1, vec![vec![0]]);
    assert_eq!(cmp.s2, vec![vec![2, 3, 4]]);
    assert_eq!(cmp.used_targets(), 2);
    let targets: Vec<usize> = cmp.phi[0].iter().chain(&cmp.psi[0]).map(|x| x.1).collect();
    assert_eq!(targets, vec![2, 3]);
    assert!(verify_subequivalence(&sample, &cmp.witness, &a, &b).unwrap().valid());
    // A = ∅
    let empty = comparison_from_castle(&sample, &CylinderSet::empty(p), &b, &castle, &[vec![]], None).unwrap();
    assert!(empty.witness.pieces.is_empty());
    // Counting condition: |S_1| + |S'| = 3 is not below |S_2| = 3.
    let err = comparison_from_castle(&sample, &a, &b, &castle, &[vec![1, 2]], None).unwrap_err();
    assert!(err.to_string().contains("tower 0"));
}

#[test]
fn castle_comparison_through_remainder() {
    let p = 7;
    let sample = Sample::new(Word::periodic("0110100").unwrap(), 140).unwrap();
    // Height 6: residue 1 (level 6 would be n ≡ −6) stays uncovered.
    let castle = periodic_castle(&sample, p, 6);
    let rem = set_of(&sample, &[1], p);
    let first = set_of(&sample, &[0], p);
    let rw = subequivalence_search(&sample, &rem, &first, &params(2)).unwrap();
    let rw = rw.witness().unwrap().clone();
    let a = set_of(&sample, &[1, 0], p);
    let b = set_of(&sample, &[-3, -4, -5], p);
    let cmp = comparison_from_castle(&sample, &a, &b, &castle, &[vec![0]], Some(&rw)).unwrap();
    assert!(verify_subequivalence(&sample, &cmp.witness, &a, &b).unwrap().valid());
    assert_eq!(cmp.used_targets(), 2);
}

#[test]
fn randomized_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut infeasible = 0;
    let mut found = 0;
    for _ in 0..50 {
        let p = rng.gen_range(2..8);
        let cycle: String = (0..p).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        let w = Word::periodic(&cycle).unwrap();
        let sample = Sample::new(w, 60).unwrap();
        let lang = sample.language(p).unwrap();
        let mut atoms = lang.atoms().to_vec();
        atoms.shuffle(&mut rng);
        let ns = rng.gen_range(0..=atoms.len());
        let nt = rng.gen_range(0..=atoms.len());
        let src = CylinderSet::new(p, atoms[..ns].iter().cloned());
        let tgt = CylinderSet::new(p, atoms[atoms.len() - nt..].iter().cloned());
        let out = subequivalence_search(&sample, &src, &tgt, &params(p)).unwrap();
        match &out {
            SearchOutcome::Found(wit) => {
                found += 1;
                assert!(verify_subequivalence(&sample, wit, &src, &tgt).unwrap().valid());
            }
            SearchOutcome::Infeasible { .. } => infeasible += 1,
            SearchOutcome::BudgetExhausted { .. } => panic!("budget too small for a tiny instance"),
        }
        // Every atom of a periodic word has frequency 1/(minimal period):
        // comparison holds iff the atom counts allow it.
        if src.len() > tgt.len() {
            assert!(matches!(out, SearchOutcome::Infeasible { .. }));
        } else {
            assert!(out.witness().is_some(), "{cycle} {src:?} {tgt:?}");
        }

        // Castle-derived witness on the same word.
        let distinct = lang.len();
        let castle = periodic_castle(&sample, p, distinct);
        let levels: Vec<i64> = (0..distinct as i64).collect();
        let mut pick = levels.clone();
        pick.shuffle(&mut rng);
        let k1 = rng.gen_range(0..distinct);
        let a = set_of(&sample, &pick[..k1].iter().map(|j| -j).collect::<Vec<_>>(), p);
        let b = set_of(&sample, &pick[k1..].iter().map(|j| -j).collect::<Vec<_>>(), p);
        match comparison_from_castle(&sample, &a, &b, &castle, &[vec![]], None) {
            Ok(c) => assert!(verify_subequivalence(&sample, &c.witness, &a, &b).unwrap().valid()),
            Err(e) => assert!(e.to_string().contains("counting condition"), "{e}"),
        }
    }
    assert!(found > 0 && infeasible > 0);
}

#[test]
fn upgrade_with_empty_remainder() {
    let sample = Sample::new(Word::periodic("011010011101").unwrap(), 120).unwrap();
    let castle = periodic_castle(&sample, 12, 12).with_folner(vec![z(1), z(-1)], q(1, 2));
    let UpgradeOutcome::Found(w) = upgrade_to_af(&sample, &castle, 2, &params(2)).unwrap() else {
        panic!("no witness");
    };
    assert!(w.remainder_witness.pieces.is_empty());
    assert_eq!(w.subsets, vec![(0..5).collect::<Vec<_>>()]);
    assert!(verify_af_witness(&sample, &w).unwrap().passed());
}

#[test]
fn upgrade_with_one_atom_removed() {
    let p = 13;
    let sample = Sample::new(Word::periodic("0110100111010").unwrap(), 260).unwrap();
    let castle = periodic_castle(&sample, p, p - 1).with_folner(vec![z(1), z(-1)], q(1, 2));
    let UpgradeOutcome::Found(w) = upgrade_to_af(&sample, &castle, 2, &params(2)).unwrap() else {
        panic!("no witness");
    };
    // |S| = 12: 12/3 < |S'| < 12/2.
    assert_eq!(w.subsets[0].len(), 5);
    assert!(!w.remainder_witness.pieces.is_empty());
    assert_eq!(w.remainder_measure, castleworks::exact::ratio(count(&sample, &w.remainder_set), 521));
    assert!(verify_af_witness(&sample, &w).unwrap().passed());
}

#[test]
fn upgrade_rejects_small_shapes() {
    let sample = Sample::new(Word::periodic("01101").unwrap(), 50).unwrap();
    let castle = periodic_castle(&sample, 5, 5).with_folner(vec![z(1), z(-1)], q(1, 2));
    assert!(upgrade_to_af(&sample, &castle, 2, &params(2)).is_err());
}

#[test]
fn subset_sizes() {
    for s in 7..200 {
        for n in 1..5 {
            if let Some(k) = subset_size(s, n) {
                assert!(k * (n + 1) > s && k * n < s);
            } else {
                assert!(!(1..s).any(|k| k * (n + 1) > s && k * n < s));
            }
        }
    }
}

#[test]
fn upgrade_dihedral_certificate() {
    let w = Word::period_doubling(24).unwrap().amplify().unwrap();
    let k = [
        GroupElement::dihedral(1, false),
        GroupElement::dihedral(-1, false),
        GroupElement::dihedral(0, true),
    ];
    let cp = CertificateParams {
        window_radius: 256,
        ..Default::default()
    };
    let (castle, rep) = af_in_measure_certificate(&w, &k, q(1, 8), &cp).unwrap();
    assert!(rep.passed());
    let sample = Sample::new(w, 256).unwrap();
    let out = upgrade_to_af(&sample, &castle, 2, &params(2)).unwrap();
    let UpgradeOutcome::Found(af) = out else {
        panic!("no witness: {out:?}");
    };
    assert!(verify_af_witness(&sample, &af).unwrap().passed());
    for (t, s) in castle.towers.iter().zip(&af.subsets) {
        assert!(3 * s.len() > t.shape.len() && 2 * s.len() < t.shape.len());
    }
}
