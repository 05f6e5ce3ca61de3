//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::process::Command;
use std::time::{Duration, Instant};

use castleworks::castles::*;
use castleworks::comparison::*;
use castleworks::exact::{format_rational, ratio};
use castleworks::groups::{folner_in_extension, FiniteGroup, GroupDescriptor, GroupElement, GroupKind};
use castleworks::recurrence::{balanced_witness, dihedral_fixedset_report, recurrence_set};
use castleworks::subshift::{CylinderSet, Sample};
use castleworks::{CylinderPattern, Rational, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn z(n: i64) -> GroupElement {
    GroupElement::Int(n)
}

fn d(n: i64, r: bool) -> GroupElement {
    GroupElement::dihedral(n, r)
}

fn q(n: i64, m: i64) -> Rational {
    Rational::new(n, m)
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

/// `|K·A ∖ A| / |A|` by plain hashing.
fn defect(g: &GroupDescriptor, a: &[GroupElement], k: &[GroupElement]) -> Rational {
    let set: HashSet<&GroupElement> = a.iter().collect();
    let k: HashSet<&GroupElement> = k.iter().collect();
    let mut out: HashSet<GroupElement> = HashSet::new();
    for x in &k {
        for y in a {
            let p = g.mul_u(x, y);
            if !set.contains(&p) {
                out.insert(p);
            }
        }
    }
    ratio(out.len(), set.len())
}

/// Patterns of `x_p` at one resolution, memoized by position.
struct Patterns<'a> {
    sample: &'a Sample,
    dom: Vec<GroupElement>,
    memo: HashMap<GroupElement, Vec<u8>>,
}

impl<'a> Patterns<'a> {
    fn new(sample: &'a Sample, r: usize) -> Self {
        Patterns {
            sample,
            dom: sample.ball(r).unwrap().elements().to_vec(),
            memo: HashMap::new(),
        }
    }

    fn at(&mut self, p: &GroupElement) -> &Vec<u8> {
        let (s, dom) = (self.sample, &self.dom);
        self.memo.entry(p.clone()).or_insert_with(|| s.pattern(p, dom))
    }
}

/// Levels containing each window position: `x_p ∈ sB ⇔ pattern(p·s) ∈ B`.
fn direct_levels(sample: &Sample, castle: &Castle) -> Vec<Vec<(usize, usize)>> {
    let g = &sample.word.group;
    let mut pats: HashMap<usize, Patterns> = HashMap::new();
    let mut out = vec![Vec::new(); sample.positions().len()];
    for (i, t) in castle.towers.iter().enumerate() {
        let pt = pats.entry(t.base.resolution).or_insert_with(|| Patterns::new(sample, t.base.resolution));
        for (j, p) in sample.positions().iter().enumerate() {
            for (l, s) in t.shape.iter().enumerate() {
                if t.base.contains(pt.at(&g.mul_u(p, s))) {
                    out[j].push((i, l));
                }
            }
        }
    }
    out
}

fn uncovered(levels: &[Vec<(usize, usize)>]) -> Rational {
    ratio(levels.iter().filter(|l| l.is_empty()).count(), levels.len())
}

/// Own check of `src ≺ tgt`: every source position lies in exactly one
/// piece, lands in the target, and no two positions share an image.
fn check_witness(sample: &Sample, wit: &SubequivalenceWitness, src: &CylinderSet, tgt: &CylinderSet) -> Result<(), String> {
    let g = &sample.word.group;
    let mut src_p = Patterns::new(sample, src.resolution);
    let mut tgt_p = Patterns::new(sample, tgt.resolution);
    let mut piece_p: Vec<Patterns> = wit.pieces.iter().map(|pc| Patterns::new(sample, pc.set.resolution)).collect();
    let mut images = HashSet::new();
    for p in sample.positions() {
        if !src.contains(src_p.at(p)) {
            continue;
        }
        let hits: Vec<usize> = (0..wit.pieces.len())
            .filter(|&i| wit.pieces[i].set.contains(piece_p[i].at(p)))
            .collect();
        ensure!(hits.len() == 1, "position {p} lies in {} pieces", hits.len());
        // γ·x_p = x_{p·γ⁻¹}
        let img = g.mul_u(p, &g.inv_u(&wit.pieces[hits[0]].translate));
        ensure!(tgt.contains(tgt_p.at(&img)), "image of {p} escapes the target");
        ensure!(images.insert(img.clone()), "two positions share the image {img}");
    }
    Ok(())
}

fn product_word() -> Word {
    Word::period_doubling(24).unwrap().amplify().unwrap().product(&FiniteGroup::cyclic(2)).unwrap()
}

// --- criteria -------------------------------------------------------------

fn c1() -> Outcome {
    let mut s3 = Vec::new();
    let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
    for a in &perms {
        let row: Vec<u32> = perms
            .iter()
            .map(|b| {
                let c = [a[b[0]], a[b[1]], a[b[2]]];
                perms.iter().position(|x| *x == c).unwrap() as u32
            })
            .collect();
        s3.push(row);
    }
    let s3 = FiniteGroup::from_table(s3).map_err(e)?;
    let groups = vec![
        GroupDescriptor::integers(),
        GroupDescriptor::cyclic(6),
        GroupDescriptor::new(GroupKind::Finite(s3.clone())),
        GroupDescriptor::dihedral(),
        GroupDescriptor::dihedral_times(FiniteGroup::cyclic(2)),
        GroupDescriptor::product(GroupKind::Integers, GroupKind::Finite(s3)),
        GroupDescriptor::lamplighter(FiniteGroup::cyclic(2)),
    ];
    let mut triples = 0usize;
    for g in &groups {
        let ball = g.ball(4).map_err(e)?;
        let id = g.identity();
        for a in ball.elements() {
            ensure!(g.mul_u(a, &id) == *a && g.mul_u(&id, a) == *a, "identity fails at {a}");
            ensure!(g.mul_u(a, &g.inv_u(a)) == id && g.mul_u(&g.inv_u(a), a) == id, "inverse fails at {a}");
            for b in ball.elements() {
                let ab = g.mul_u(a, b);
                for c in ball.elements() {
                    triples += 1;
                    ensure!(g.mul_u(&ab, c) == g.mul_u(a, &g.mul_u(b, c)), "associativity fails at {a}, {b}, {c}");
                }
            }
        }
    }
    // D∞ against the semidirect-product law (m,a)(n,b) = (m + (−1)^a n, a ⊕ b).
    let dih = GroupDescriptor::dihedral();
    let ball6 = dih.ball(6).map_err(e)?;
    let (s, t) = (d(1, false), d(0, true));
    for x in ball6.elements() {
        ensure!(dih.mul_u(&dih.mul_u(x, &t), &t) == *x, "t² ≠ e at {x}");
        let tsts = [&t, &s, &t, &s].iter().fold(x.clone(), |acc, y| dih.mul_u(&acc, y));
        ensure!(tsts == *x, "tsts ≠ e at {x}");
        let (m, a) = x.as_dihedral().unwrap();
        for y in ball6.elements() {
            let (n, b) = y.as_dihedral().unwrap();
            let expect = d(m + if a { -n } else { n }, a ^ b);
            ensure!(dih.mul_u(x, y) == expect, "law fails at {x}·{y}");
        }
    }
    Ok(format!("{} groups, {triples} triples on ball(4); D∞ relations on {} elements of ball(6)", groups.len(), ball6.len()))
}

fn c2() -> Outcome {
    let l = GroupDescriptor::lamplighter(FiniteGroup::cyclic(2));
    let k = vec![
        GroupElement::lamps_z2([0], 0),
        GroupElement::lamps_z2([0], 0),
        GroupElement::lamps_z2([], 1),
        GroupElement::lamps_z2([], -1),
    ];
    let s: Vec<_> = (0..17).map(z).collect();
    let f: Vec<_> = (0u64..1 << 17)
        .map(|mask| GroupElement::lamps_z2((0..17).filter(|i| mask >> i & 1 == 1).map(|i| i - 16), 0))
        .collect();
    let eps = q(1, 2);
    let cert = folner_in_extension(&l, &k, eps, &s, &f).map_err(e)?;
    let own = defect(&l, &cert.set, &k);
    ensure!(own == cert.defect && own < eps, "lamplighter defect {} (reported {})", own, cert.defect);
    let mut detail = format!("lamplighter |A| = {}, defect {}", cert.set.len(), format_rational(&own));

    let dt = GroupDescriptor::dihedral_times(FiniteGroup::cyclic(2));
    let kd = dt.symmetric_generators();
    let kernel = vec![dt.identity(), GroupElement::pair(d(0, false), GroupElement::Finite(1))];
    for (radius, eps) in [(8usize, q(3, 4)), (16, q(1, 2))] {
        let s = GroupDescriptor::dihedral().ball(radius).map_err(e)?.elements().to_vec();
        let cert = folner_in_extension(&dt, &kd, eps, &s, &kernel).map_err(e)?;
        let own = defect(&dt, &cert.set, &kd);
        ensure!(own == cert.defect && own < eps, "D∞×ℤ₂ defect {own} at eps {eps}");
        detail += &format!("; D∞×ℤ₂ ball({radius}) eps {}: defect {}", format_rational(&eps), format_rational(&own));
    }
    Ok(detail)
}

fn c3() -> Outcome {
    let specs: Vec<Word> = vec![
        Word::period_doubling(12),
        Word::toeplitz(&[(2, 0, "a"), (4, 1, "b"), (4, 3, "c")]),
        Word::toeplitz(&[(3, 0, "0"), (9, 1, "1"), (9, 4, "0"), (9, 7, "1"), (9, 2, "0"), (9, 5, "1"), (9, 8, "0")]),
        Word::toeplitz(&[(2, 1, "x"), (6, 0, "y"), (6, 2, "x"), (6, 4, "z")]),
        Word::toeplitz(&[(4, 0, "1"), (4, 2, "0"), (8, 1, "1"), (8, 3, "0"), (16, 5, "0"), (16, 7, "1"), (16, 13, "1"), (16, 15, "0")]),
        Word::period_doubling(20),
    ]
    .into_iter()
    .collect::<Result<_, _>>()
    .map_err(e)?;
    let window = GroupDescriptor::integers().ball(1000).map_err(e)?;
    let mut checked = 0;
    for w in &specs {
        let wbar = w.mirror().map_err(e)?;
        for (center, dom) in [(0i64, vec![0i64]), (3, vec![-1, 0, 2]), (-7, vec![0, 1, 2, 3]), (11, vec![-3, 5])] {
            let dom: Vec<GroupElement> = dom.into_iter().map(z).collect();
            let u = CylinderPattern::read(&wbar, &z(center), &dom);
            let v = CylinderPattern::new(
                u.domain.iter().map(|i| z(-i.as_int().unwrap())).collect(),
                u.symbols.clone(),
            )
            .map_err(e)?;
            let hu: BTreeSet<i64> = recurrence_set(&wbar, &u, &window).map_err(e)?.hits.iter().map(|g| g.as_int().unwrap()).collect();
            let hv: BTreeSet<i64> = recurrence_set(w, &v, &window).map_err(e)?.hits.iter().map(|g| -g.as_int().unwrap()).collect();
            ensure!(hu == hv, "mirror identity fails at center {center}");
            // Direct scan: g ∈ hits(w̄, U) ⇔ w̄(i − g) = U(i).
            let scan: BTreeSet<i64> = (-1000..=1000)
                .filter(|g| u.domain.iter().zip(&u.symbols).all(|(i, &s)| wbar.at(i.as_int().unwrap() - g) == s))
                .collect();
            ensure!(hu == scan, "recurrence set differs from direct scan");
            checked += 1;
        }
    }
    Ok(format!("{} Toeplitz specs, {checked} pattern pairs on [−1000, 1000]", specs.len()))
}

fn c4() -> Outcome {
    let w = Word::period_doubling(16).map_err(e)?;
    let a = w.amplify().map_err(e)?;
    for n in -1000..=1000 {
        ensure!(a.eval_u(&d(n, false)) == w.at(n), "ŵ(s^{n}) ≠ w({n})");
        ensure!(a.eval_u(&d(n, true)) == w.at(-n), "ŵ(s^{n}t) ≠ w̄({n})");
    }
    let dih = GroupDescriptor::dihedral();
    let ball = dih.ball(1000).map_err(e)?;
    let ta = a.shift(&d(0, true)).map_err(e)?;
    for h in ball.elements() {
        ensure!(ta.eval_u(h) == a.eval_u(h), "t·ŵ ≠ ŵ at {h}");
    }
    // (P ⊔ tP) ∩ window ⊆ hits(ŵ, U') for the balanced P of w.
    let mut total = 0;
    for dom in [vec![-2i64, -1, 0, 1, 2], vec![-5, 0, 5], vec![0, 1, 2, 3]] {
        let dz: Vec<GroupElement> = dom.iter().map(|&i| z(i)).collect();
        let u = CylinderPattern::read(&w, &z(0), &dz);
        let rep = recurrence_set(&w, &u, &w.group.ball(400).map_err(e)?).map_err(e)?;
        let Some(bal) = balanced_witness(&w, &rep, 32).map_err(e)? else {
            return Err(format!("no balanced witness for domain {dom:?}"));
        };
        let u2 = CylinderPattern::new(dom.iter().map(|&i| d(i, false)).collect(), u.symbols.clone()).map_err(e)?;
        let hits = recurrence_set(&a, &u2, &dih.ball(400).map_err(e)?).map_err(e)?;
        let hs = hits.hit_set();
        let t = d(0, true);
        for &p in bal.p.iter().filter(|p| p.abs() <= 399) {
            let tp = dih.mul_u(&t, &d(p, false));
            ensure!(hs.contains(&d(p, false)) && hs.contains(&tp), "P ⊔ tP ⊄ hits at {p}");
            total += 2;
        }
    }
    Ok(format!("eval and t-invariance on ball(1000); {total} elements of P ⊔ tP inside hits"))
}

fn substring(w: &Word, n: i64, r: i64) -> Vec<u8> {
    (n - r..=n + r).map(|i| w.at(i)).collect()
}

/// Return times by substring search: base points are positions whose
/// radius-r substring occurs at a multiple of m.
fn scan_return_times(w: &Word, radius: i64, m: i64, r: i64) -> Vec<(i64, i64)> {
    let marks: HashSet<Vec<u8>> = (-radius..=radius).filter(|n| n.rem_euclid(m) == 0).map(|n| substring(w, n, r)).collect();
    let in_base = |n: i64| marks.contains(&substring(w, n, r));
    (-radius..=radius)
        .filter(|&n| in_base(n))
        .map(|n| (n, (1..).find(|&k| in_base(n - k)).unwrap()))
        .collect()
}

fn kr_check(w: &Word, radius: usize, base: CylinderSet, m: i64, r: i64) -> Result<(KrCastle, Sample), String> {
    let sample = Sample::new(w.clone(), radius).map_err(e)?;
    let kr = kakutani_rokhlin(&sample, &base, None, 1024).map_err(e)?;
    let levels = direct_levels(&sample, &kr.castle);
    ensure!(levels.iter().all(|l| l.len() == 1), "levels do not partition the window");
    let rep = verify_castle(&field_for(&sample, &kr.castle).map_err(e)?, &kr.castle).map_err(e)?;
    ensure!(rep.passed() && rep.remainder == q(0, 1), "verify_castle: {rep:?}");
    for (n, k) in scan_return_times(w, radius as i64, m, r) {
        let idx = sample.positions().iter().position(|p| *p == z(n)).unwrap();
        let (i, l) = levels[idx][0];
        ensure!(l == 0 && kr.heights[i] == k as usize, "return time at {n}: tower height {} vs scan {k}", kr.heights[i]);
    }
    Ok((kr, sample))
}

fn periodic_cycle(p: usize) -> String {
    // Aperiodic within one period: a 1, then a 0/1 pattern with no smaller period.
    let mut s = String::from("1");
    s.push_str(&"0".repeat(p - 1));
    if p > 3 {
        s.replace_range(2..3, "1");
    }
    s
}

fn c5() -> Outcome {
    let mut detail = Vec::new();
    for p in [2usize, 3, 5, 12] {
        let w = Word::periodic(&periodic_cycle(p)).map_err(e)?;
        let sample = Sample::new(w.clone(), 240).map_err(e)?;
        let field = Field::new(&sample, 0).map_err(e)?;
        let base = CylinderSet::new(p, [field.table(p).map_err(e)?.atom_at(0).clone()]);
        // One mark per period: the scan's multiples of p all share the base atom.
        let (kr, _) = kr_check(&w, 240, base, p as i64, p as i64)?;
        ensure!(kr.heights == vec![p], "periodic p = {p}: heights {:?}", kr.heights);
        detail.push(format!("p={p}"));
    }
    let w = Word::period_doubling(20).map_err(e)?;
    let sample = Sample::new(w.clone(), 512).map_err(e)?;
    let field = Field::new(&sample, 0).map_err(e)?;
    for m in [2usize, 4, 8, 16] {
        let base = skeleton_base(&field, m, 2 * m).map_err(e)?;
        let (kr, _) = kr_check(&w, 512, base, m as i64, 2 * m as i64)?;
        detail.push(format!("PD m={m} heights {:?}", kr.heights));
    }
    Ok(detail.join(", "))
}

struct ProductCert {
    eps: Rational,
    castle: Castle,
    report: CertificateReport,
}

fn product_certificates() -> Result<(Sample, Vec<ProductCert>), String> {
    let word = product_word();
    let params = CertificateParams::default();
    let k = word.group.symmetric_generators();
    let mut out = Vec::new();
    for eps in [q(1, 2), q(1, 4), q(1, 8)] {
        let (castle, report) = af_in_measure_certificate(&word, &k, eps, &params).map_err(e)?;
        out.push(ProductCert { eps, castle, report });
    }
    Ok((Sample::new(word, params.window_radius).map_err(e)?, out))
}

fn c6(sample: &Sample, certs: &[ProductCert]) -> Outcome {
    let c = certs.iter().find(|c| c.eps == q(1, 4)).unwrap();
    let group = &sample.word.group;
    ensure!(c.report.method == "dihedral-tiles" && c.report.lift.is_some(), "certificate did not go through the lift");
    ensure!(c.report.castle.passed(), "verify_castle failed: {:?}", c.report.failure());
    let k = group.symmetric_generators();
    for (i, t) in c.castle.towers.iter().enumerate() {
        let dft = defect(group, &t.shape, &k);
        ensure!(dft < q(1, 4), "tower {i} defect {dft}");
    }
    let levels = direct_levels(sample, &c.castle);
    ensure!(levels.iter().all(|l| l.len() <= 1), "levels overlap");
    let rem = uncovered(&levels);
    ensure!(rem == c.report.castle.remainder, "oracle remainder {rem} vs reported {}", c.report.castle.remainder);
    ensure!(rem <= q(1, 4), "remainder {rem} > 1/4");
    Ok(format!(
        "W = {}, {} tower(s), |S| = {}, remainder {} (oracle agrees)",
        sample.window_radius(),
        c.castle.towers.len(),
        c.castle.towers[0].shape.len(),
        format_rational(&rem)
    ))
}

fn c7(sample: &Sample, certs: &[ProductCert]) -> Outcome {
    let g = &sample.word.group;
    let t = GroupElement::pair(d(0, true), GroupElement::Finite(0));
    let mut bounds = Vec::new();
    for c in certs {
        let r = ess_free_bound(sample, &c.castle, &t).map_err(e)?;
        ensure!(r.identity_holds, "identity fails at eps {}", c.eps);
        // Oracle: fraction of positions outside every T-level.
        let ts: Vec<HashSet<usize>> = c
            .castle
            .towers
            .iter()
            .map(|tw| {
                let shape: HashSet<&GroupElement> = tw.shape.iter().collect();
                (0..tw.shape.len()).filter(|&l| shape.contains(&g.mul_u(&t, &tw.shape[l]))).collect()
            })
            .collect();
        let levels = direct_levels(sample, &c.castle);
        let outside = levels.iter().filter(|l| !l.iter().any(|(i, lv)| ts[*i].contains(lv))).count();
        let own = ratio(outside, levels.len());
        ensure!(own == r.bound, "bound {} vs oracle {}", r.bound, own);
        bounds.push(r.bound);
    }
    ensure!(bounds.windows(2).all(|b| b[1] <= b[0]), "bounds increase: {bounds:?}");
    Ok(format!(
        "bounds {} over eps 1/2, 1/4, 1/8",
        bounds.iter().map(format_rational).collect::<Vec<_>>().join(", ")
    ))
}

fn c8() -> Outcome {
    let a = Word::period_doubling(24).map_err(e)?.amplify().map_err(e)?;
    let g = &a.group;
    let w = 512;
    let mut detail = Vec::new();
    for n in 0..=2 {
        let r = dihedral_fixedset_report(&a, n, 8, 32, w).map_err(e)?;
        ensure!(r.containment && r.disjoint, "n = {n}: containment {} disjoint {}", r.containment, r.disjoint);
        ensure!(r.translate_frequency_sum <= q(1, 1), "n = {n}: sum {}", r.translate_frequency_sum);
        // Oracle for the X_n frequency at resolution 32.
        let dom = g.ball(32).map_err(e)?;
        let win = g.ball(w).map_err(e)?;
        let fixed = win
            .elements()
            .iter()
            .filter(|p| {
                let qp = g.mul_u(p, &d(n, true));
                dom.elements().iter().all(|x| a.eval_u(&g.mul_u(p, x)) == a.eval_u(&g.mul_u(&qp, x)))
            })
            .count();
        ensure!(r.frequencies[0] == (n, ratio(fixed, win.len())), "n = {n}: frequency disagrees with oracle");
        detail.push(format!("n={n} sum {}", format_rational(&r.translate_frequency_sum)));
    }
    Ok(detail.join(", "))
}

fn periodic_castle(sample: &Sample, p: usize, keep: usize) -> Castle {
    let dom = sample.ball(p).unwrap();
    let atoms: Vec<Vec<u8>> = (0..keep as i64).map(|j| sample.pattern(&z(-j), dom.elements())).collect();
    Castle::new(vec![Tower {
        shape: vec![z(0)],
        base: CylinderSet::new(p, atoms),
    }])
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut found, mut infeasible, mut castle_wits) = (0, 0, 0);
    for _ in 0..50 {
        let p = rng.gen_range(2..8);
        let cycle: String = (0..p).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        let sample = Sample::new(Word::periodic(&cycle).map_err(e)?, 60).map_err(e)?;
        let lang = sample.language(p).map_err(e)?;
        let mut atoms = lang.atoms().to_vec();
        atoms.shuffle(&mut rng);
        let ns = rng.gen_range(0..=atoms.len());
        let nt = rng.gen_range(0..=atoms.len());
        let src = CylinderSet::new(p, atoms[..ns].iter().cloned());
        let tgt = CylinderSet::new(p, atoms[atoms.len() - nt..].iter().cloned());
        let params = SearchParams {
            translate_radius: p,
            budget: 1_000_000,
        };
        match subequivalence_search(&sample, &src, &tgt, &params).map_err(e)? {
            SearchOutcome::Found(w) => {
                ensure!(src.len() <= tgt.len(), "witness found for a pigeonhole-infeasible instance");
                check_witness(&sample, &w, &src, &tgt)?;
                ensure!(verify_subequivalence(&sample, &w, &src, &tgt).map_err(e)?.valid(), "library verifier rejects");
                found += 1;
            }
            SearchOutcome::Infeasible { .. } => {
                ensure!(src.len() > tgt.len(), "feasible instance reported infeasible ({cycle})");
                infeasible += 1;
            }
            SearchOutcome::BudgetExhausted { nodes } => return Err(format!("budget exhausted after {nodes} nodes")),
        }
        let distinct = lang.len();
        let castle = periodic_castle(&sample, p, distinct);
        let mut pick: Vec<i64> = (0..distinct as i64).collect();
        pick.shuffle(&mut rng);
        let k1 = rng.gen_range(0..distinct);
        let set = |js: &[i64]| {
            let dom = sample.ball(p).unwrap();
            CylinderSet::new(p, js.iter().map(|j| sample.pattern(&z(-j), dom.elements())))
        };
        let (a, b) = (set(&pick[..k1]), set(&pick[k1..]));
        if let Ok(c) = comparison_from_castle(&sample, &a, &b, &castle, &[vec![]], None) {
            check_witness(&sample, &c.witness, &a, &b)?;
            castle_wits += 1;
        }
    }
    ensure!(found > 0 && infeasible > 0, "degenerate sample: {found} found, {infeasible} infeasible");
    Ok(format!("{found} found, {infeasible} infeasible, {castle_wits} castle witnesses rechecked"))
}

/// Independent re-verification of the three almost-finiteness clauses.
fn check_af(sample: &Sample, w: &AFWitness) -> Result<(), String> {
    let g = &sample.word.group;
    let f = w.castle.folner.as_ref().ok_or("castle without (K, eps)")?;
    // (i) Følner shapes, levels of diameter < eps.
    for (i, t) in w.castle.towers.iter().enumerate() {
        let dft = defect(g, &t.shape, &f.k);
        ensure!(dft < f.eps, "tower {i}: defect {dft}");
        let reach = t.shape.iter().map(|s| word_length(g, s)).max().unwrap_or(0);
        let exp = t.base.resolution.saturating_sub(reach) as u32;
        ensure!(q(1, 1) / Rational::from_integer(1i64 << exp.min(62)) < f.eps, "tower {i}: levels too coarse");
        // |S|/(n+1) < |S'| < |S|/n
        let (s, sp, n) = (t.shape.len(), w.subsets[i].len(), w.n);
        ensure!(s < sp * (n + 1) && sp * n < s, "tower {i}: |S| = {s}, |S'| = {sp}");
    }
    // (ii) disjoint levels.
    let levels = direct_levels(sample, &w.castle);
    ensure!(levels.iter().all(|l| l.len() <= 1), "levels overlap");
    // (iii) remainder ≺ ⊔ S'_i B_i, with both sets matching the castle.
    let mut rp = Patterns::new(sample, w.remainder_set.resolution);
    let mut tp = Patterns::new(sample, w.target_set.resolution);
    for (p, l) in sample.positions().iter().zip(&levels) {
        ensure!(w.remainder_set.contains(rp.at(p)) == l.is_empty(), "remainder set mismatch at {p}");
        let in_sub = l.iter().any(|(i, lv)| w.subsets[*i].contains(lv));
        ensure!(w.target_set.contains(tp.at(p)) == in_sub, "target set mismatch at {p}");
    }
    check_witness(sample, &w.remainder_witness, &w.remainder_set, &w.target_set)
}

fn word_length(g: &GroupDescriptor, x: &GroupElement) -> usize {
    castleworks::subshift::word_length(g, x).unwrap()
}

fn c10(sample6: &Sample, certs: &[ProductCert]) -> Outcome {
    let sp = SearchParams::default();
    let mut detail = Vec::new();
    let upgrade = |sample: &Sample, castle: &Castle, name: &str| -> Result<String, String> {
        match upgrade_to_af(sample, castle, 2, &sp).map_err(e)? {
            UpgradeOutcome::Found(w) => {
                check_af(sample, &w)?;
                ensure!(verify_af_witness(sample, &w).map_err(e)?.passed(), "{name}: library check fails");
                Ok(format!("{name} |S'| = {:?}", w.subsets.iter().map(Vec::len).collect::<Vec<_>>()))
            }
            UpgradeOutcome::NotFound(o) => Err(format!("{name}: {o:?}")),
        }
    };
    // Criterion 5 castles, with K = {±1}: a single orbit of p points only
    // admits |S| = p, so p ∈ {2, 3, 5} fall under the |S| > n(n+1) precondition.
    for p in [2usize, 3, 5, 12] {
        let w = Word::periodic(&periodic_cycle(p)).map_err(e)?;
        let sample = Sample::new(w, 240).map_err(e)?;
        let field = Field::new(&sample, 0).map_err(e)?;
        let base = CylinderSet::new(p, [field.table(p).map_err(e)?.atom_at(0).clone()]);
        let kr = kakutani_rokhlin(&sample, &base, None, 64).map_err(e)?;
        let castle = kr.castle.with_folner(vec![z(1), z(-1)], q(1, 2));
        if p <= 6 {
            ensure!(upgrade_to_af(&sample, &castle, 2, &sp).is_err(), "p = {p}: small shape accepted");
            detail.push(format!("p={p} rejected (|S| ≤ 6)"));
        } else {
            detail.push(upgrade(&sample, &castle, &format!("p={p}"))?);
        }
    }
    let pd = Word::period_doubling(20).map_err(e)?;
    let (castle, rep) = af_in_measure_certificate(
        &pd,
        &[z(1), z(-1)],
        q(1, 4),
        &CertificateParams {
            window_radius: 512,
            ..CertificateParams::default()
        },
    )
    .map_err(e)?;
    ensure!(rep.passed(), "PD certificate fails: {:?}", rep.failure());
    detail.push(upgrade(&Sample::new(pd, 512).map_err(e)?, &castle, "PD")?);
    let c = certs.iter().find(|c| c.eps == q(1, 4)).unwrap();
    detail.push(upgrade(sample6, &c.castle, "D∞×ℤ₂")?);
    Ok(detail.join(", "))
}

fn strip_timing(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("timing");
    }
    v
}

fn c11() -> Outcome {
    let dir = std::env::temp_dir().join(format!("castleworks-acceptance-{}", std::process::id()));
    let mut reports = Vec::new();
    let mut times = Vec::new();
    for i in 0..2 {
        let out = dir.join(format!("run{i}"));
        let start = Instant::now();
        let res = Command::new(env!("CARGO_BIN_EXE_castleworks"))
            .args(["gallery", "--out", out.to_str().unwrap()])
            .output()
            .map_err(e)?;
        times.push(start.elapsed());
        ensure!(res.status.code() == Some(0), "gallery exit {:?}: {}", res.status.code(), String::from_utf8_lossy(&res.stderr));
        let text = std::fs::read_to_string(out.join("report.json")).map_err(e)?;
        ensure!(text.as_bytes() == res.stdout.as_slice(), "stdout and report.json differ");
        reports.push(strip_timing(serde_json::from_str(&text).map_err(e)?));
        let csvs: Vec<_> = std::fs::read_dir(&out).map_err(e)?.filter_map(|x| x.ok()).collect();
        ensure!(csvs.len() > 1, "no CSV outputs");
    }
    for f in std::fs::read_dir(dir.join("run0")).map_err(e)? {
        let name = f.map_err(e)?.file_name();
        if name != "report.json" {
            let a = std::fs::read(dir.join("run0").join(&name)).map_err(e)?;
            let b = std::fs::read(dir.join("run1").join(&name)).map_err(e)?;
            ensure!(a == b, "{name:?} differs between runs");
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    let a = serde_json::to_string(&reports[0]).unwrap();
    let b = serde_json::to_string(&reports[1]).unwrap();
    ensure!(a == b, "reports differ beyond timing");
    ensure!(reports[0]["pass"] == true, "gallery reports a failing check");
    let worst = times.iter().max().copied().unwrap_or_default();
    ensure!(worst < Duration::from_secs(120), "gallery took {worst:?}");
    Ok(format!("identical reports, runs took {:.1?} and {:.1?}", times[0], times[1]))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n}: PASS ({secs:.1} s) {msg}"),
            Err(msg) => {
                failures += 1;
                println!("criterion {n}: FAIL ({secs:.1} s) {msg}");
            }
        }
    };
    report(1, &mut c1);
    report(2, &mut c2);
    report(3, &mut c3);
    report(4, &mut c4);
    report(5, &mut c5);
    let certs = product_certificates();
    match &certs {
        Ok((s, c)) => {
            report(6, &mut || c6(s, c));
            report(7, &mut || c7(s, c));
        }
        Err(err) => {
            report(6, &mut || Err(err.clone()));
            report(7, &mut || Err(err.clone()));
        }
    }
    report(8, &mut c8);
    report(9, &mut c9);
    match &certs {
        Ok((s, c)) => report(10, &mut || c10(s, c)),
        Err(err) => report(10, &mut || Err(err.clone())),
    }
    report(11, &mut c11);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
