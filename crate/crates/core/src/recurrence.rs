//! Recurrence sets, syndeticity and balancedness witnesses, fixed-point
//! frequencies, stabilizer probes and empirical measures.

use rustc_hash::FxHashSet;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, ratio, Rational};
use crate::groups::{Ball, GroupElement, GroupKind};
use crate::subshift::{Atom, Sample};
use crate::words::{CylinderPattern, Word};

/// `R_{w,U} ∩ window = {g : w(g⁻¹i) = U(i) for all i ∈ dom U}`.
#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub pattern: CylinderPattern,
    pub window_radius: usize,
    pub window: Vec<GroupElement>,
    pub hits: Vec<GroupElement>,
}

impl RecurrenceReport {
    pub fn hit_set(&self) -> FxHashSet<&GroupElement> {
        self.hits.iter().collect()
    }

    pub fn to_json(&self, word: &Word) -> Value {
        json!({
            "pattern": self.pattern.to_json(&word.alphabet),
            "windowRadius": self.window_radius,
            "windowSize": self.window.len(),
            "hitCount": self.hits.len(),
            "hits": self.hits.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn recurrence_set(word: &Word, pattern: &CylinderPattern, window: &Ball) -> Result<RecurrenceReport> {
    for (i, s) in pattern.domain.iter().zip(&pattern.symbols) {
        word.group.kind.check(i)?;
        if *s as usize >= word.alphabet.len() {
            return Err(Error::Word(format!("pattern symbol {s} outside the alphabet")));
        }
    }
    let hits = window
        .elements()
        .iter()
        .filter(|g| pattern.matches_translate(word, &word.group.inv_u(g)))
        .cloned()
        .collect();
    Ok(RecurrenceReport {
        pattern: pattern.clone(),
        window_radius: window.radius(),
        window: window.elements().to_vec(),
        hits,
    })
}

/// `K = ball(m)` with `ball(coreRadius) ⊆ K·hits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndeticityWitness {
    pub radius: usize,
    pub k: Vec<GroupElement>,
    pub core_radius: usize,
}

impl SyndeticityWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "radius": self.radius,
            "K": self.k.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
            "coreRadius": self.core_radius,
        })
    }
}

/// Smallest `m ≤ max_k` such that every element of the window core
/// `ball(W − m)` lies in `ball(m)·hits`.
pub fn syndetic_check(word: &Word, report: &RecurrenceReport, max_k: usize) -> Result<Option<SyndeticityWitness>> {
    let hits = report.hit_set();
    let big = word.group.ball(report.window_radius)?;
    for m in 0..=max_k.min(report.window_radius) {
        let k = big.within(m);
        let core = big.within(report.window_radius - m);
        if covers(word, k, core, &hits) {
            return Ok(Some(SyndeticityWitness {
                radius: m,
                k: k.to_vec(),
                core_radius: report.window_radius - m,
            }));
        }
    }
    Ok(None)
}

/// Whether `core ⊆ K·hits`, i.e. every `c` has some `k` with `k⁻¹c ∈ hits`.
pub fn covers(word: &Word, k: &[GroupElement], core: &[GroupElement], hits: &FxHashSet<&GroupElement>) -> bool {
    let k_inv: Vec<GroupElement> = k.iter().map(|x| word.group.inv_u(x)).collect();
    core.iter()
        .all(|c| k_inv.iter().any(|ki| hits.contains(&word.group.mul_u(ki, c))))
}

/// Symmetric syndetic subset `P = −P ⊆ hits` of a ℤ recurrence set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedWitness {
    pub p: Vec<i64>,
    /// `Some(q)` when `P = qℤ ∩ window`.
    pub period: Option<i64>,
    pub syndeticity: SyndeticityWitness,
}

impl BalancedWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "period": self.period,
            "size": self.p.len(),
            "P": self.p,
            "syndeticity": self.syndeticity.to_json(),
        })
    }
}

/// Searches progressions `qℤ` for ascending `q`, then the maximal symmetric
/// subset `hits ∩ (−hits)`.
pub fn balanced_witness(word: &Word, report: &RecurrenceReport, max_k: usize) -> Result<Option<BalancedWitness>> {
    if word.group.kind != GroupKind::Integers {
        return Err(Error::Word("balanced witnesses are defined for ℤ-words".into()));
    }
    let w = report.window_radius as i64;
    let hits: FxHashSet<i64> = report.hits.iter().map(|g| g.as_int().expect("ℤ")).collect();
    let syndetic = |p: &[i64]| -> Result<Option<SyndeticityWitness>> {
        let sub = RecurrenceReport {
            pattern: report.pattern.clone(),
            window_radius: report.window_radius,
            window: report.window.clone(),
            hits: p.iter().map(|&n| GroupElement::Int(n)).collect(),
        };
        syndetic_check(word, &sub, max_k)
    };
    for q in 1..=(2 * max_k as i64 + 1).min(w.max(1)) {
        if (-w / q..=w / q).all(|j| hits.contains(&(j * q))) {
            let p: Vec<i64> = (-w / q..=w / q).map(|j| j * q).collect();
            if let Some(s) = syndetic(&p)? {
                return Ok(Some(BalancedWitness {
                    p,
                    period: Some(q),
                    syndeticity: s,
                }));
            }
        }
    }
    let mut p: Vec<i64> = hits.iter().copied().filter(|n| hits.contains(&-n)).collect();
    p.sort_unstable();
    if p.is_empty() {
        return Ok(None);
    }
    Ok(syndetic(&p)?.map(|s| BalancedWitness {
        p,
        period: None,
        syndeticity: s,
    }))
}

/// Fraction of window positions `h` whose radius-`resolution` pattern is
/// unchanged by `g` (`x_h` and `g·x_h` agree on the ball). Upper-bound
/// evidence for the mass of `Fix(g)`.
pub fn fixed_point_frequency(word: &Word, g: &GroupElement, resolution: usize, window_radius: usize) -> Result<Rational> {
    if resolution > window_radius {
        return Err(Error::precondition_with(
            "resolution exceeds the window radius",
            format!("{resolution} > {window_radius}"),
        ));
    }
    word.group.kind.check(g)?;
    let window = word.group.ball(window_radius)?;
    let dom = word.group.ball(resolution)?;
    let g_inv = word.group.inv_u(g);
    let fixed = window
        .elements()
        .iter()
        .filter(|h| {
            let hg = word.group.mul_u(h, &g_inv);
            dom.elements().iter().all(|d| {
                word.eval_u(&word.group.mul_u(&hg, d)) == word.eval_u(&word.group.mul_u(h, d))
            })
        })
        .count();
    Ok(ratio(fixed, window.len()))
}

/// All `g ∈ ball(candidate_radius)` with `g·w = w` on `ball(depth)`.
pub fn stabilizer_probe(word: &Word, depth: usize, candidate_radius: usize) -> Result<Vec<GroupElement>> {
    let cands = word.group.ball(candidate_radius)?;
    let dom = word.group.ball(depth)?;
    let base: Vec<_> = dom.elements().iter().map(|d| word.eval_u(d)).collect();
    Ok(cands
        .elements()
        .iter()
        .filter(|g| {
            let gi = word.group.inv_u(g);
            dom.elements()
                .iter()
                .zip(&base)
                .all(|(d, &s)| word.eval_u(&word.group.mul_u(&gi, d)) == s)
        })
        .cloned()
        .collect())
}

/// Frequencies of radius-`resolution` patterns over `ball(window_radius)`.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub resolution: usize,
    pub window_radius: usize,
    pub total: u64,
    /// `(atom, count)` sorted by atom.
    pub counts: Vec<(Atom, u64)>,
}

impl EmpiricalMeasure {
    pub fn frequency(&self, i: usize) -> Rational {
        ratio(self.counts[i].1 as usize, self.total as usize)
    }

    pub fn frequency_sum(&self) -> Rational {
        (0..self.counts.len()).map(|i| self.frequency(i)).sum()
    }

    /// CSV with header `pattern,count,frequency_numerator,frequency_denominator`.
    pub fn to_csv(&self, word: &Word) -> String {
        let mut out = String::from("pattern,count,frequency_numerator,frequency_denominator\n");
        for (i, (atom, count)) in self.counts.iter().enumerate() {
            let f = self.frequency(i);
            let pat: Vec<&str> = atom.iter().map(|&s| word.symbol_name(s)).collect();
            out.push_str(&format!("{},{},{},{}\n", pat.join(" "), count, f.numer(), f.denom()));
        }
        out
    }

    pub fn to_json(&self, word: &Word) -> Value {
        json!({
            "resolution": self.resolution,
            "windowRadius": self.window_radius,
            "positions": self.total,
            "frequencies": self.counts.iter().enumerate().map(|(i, (a, c))| json!({
                "pattern": a.iter().map(|&s| word.symbol_name(s)).collect::<Vec<_>>(),
                "count": c,
                "frequency": format_rational(&self.frequency(i)),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn empirical_measure(word: &Word, resolution: usize, window_radius: usize) -> Result<EmpiricalMeasure> {
    if resolution > window_radius {
        return Err(Error::precondition_with(
            "resolution exceeds the window radius",
            format!("{resolution} > {window_radius}"),
        ));
    }
    let sample = Sample::new(word.clone(), window_radius)?;
    let lang = sample.language(resolution)?;
    let mut counts: Vec<(Atom, u64)> = (0..lang.len() as u32)
        .map(|i| (lang.atom(i).clone(), lang.count(i)))
        .collect();
    counts.sort();
    Ok(EmpiricalMeasure {
        resolution,
        window_radius,
        total: lang.total(),
        counts,
    })
}

/// Cylinder approximations of `X_m = Fix(s^m t)` for the D∞ fixed-set
/// argument: `s^k X_n ⊆ X_{2k+n}`, disjointness for `k ≠ 0`, and the
/// translate-frequency sum.
#[derive(Clone, Debug)]
pub struct FixedSetReport {
    pub n: i64,
    pub k_range: i64,
    pub resolution: usize,
    pub window_radius: usize,
    /// `(m, frequency of X_m at the base resolution)`.
    pub frequencies: Vec<(i64, Rational)>,
    /// Frequency of `X_n` at the refined resolution `r + kRange`.
    pub refined_frequency: Rational,
    pub containment: bool,
    pub containment_witness: Option<(i64, GroupElement)>,
    pub disjoint: bool,
    pub disjoint_witness: Option<(i64, GroupElement)>,
    pub translate_frequency_sum: Rational,
}

impl FixedSetReport {
    pub fn passed(&self) -> bool {
        self.containment && self.disjoint && self.translate_frequency_sum <= Rational::from_integer(1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "kRange": self.k_range,
            "resolution": self.resolution,
            "windowRadius": self.window_radius,
            "fixedSetFrequencies": self.frequencies.iter().map(|(m, f)| json!({"m": m, "frequency": format_rational(f)})).collect::<Vec<_>>(),
            "refinedFrequency": format_rational(&self.refined_frequency),
            "containment": self.containment,
            "containmentWitness": self.containment_witness.as_ref().map(|(k, p)| json!({"k": k, "position": p.to_json()})),
            "disjoint": self.disjoint,
            "disjointWitness": self.disjoint_witness.as_ref().map(|(k, p)| json!({"k": k, "position": p.to_json()})),
            "translateFrequencySum": format_rational(&self.translate_frequency_sum),
            "pass": self.passed(),
            "evidence": "upper-bound",
        })
    }
}

pub fn dihedral_fixedset_report(
    word: &Word,
    n: i64,
    k_range: i64,
    resolution: usize,
    window_radius: usize,
) -> Result<FixedSetReport> {
    if word.group.kind != GroupKind::Dihedral {
        return Err(Error::Word("dihedral_fixedset_report needs a D∞-word".into()));
    }
    if k_range < 0 {
        return Err(Error::precondition("kRange must be nonnegative"));
    }
    let w = window_radius as i64;
    let s_pow = |k: i64| GroupElement::dihedral(k, false);
    // The rotation line must not repeat with any period the argument uses.
    for q in 1..=(2 * k_range).max(1) {
        if (-w..=w - q).all(|j| word.eval_u(&s_pow(j)) == word.eval_u(&s_pow(j + q))) {
            return Err(Error::precondition_with(
                "the ℤ-action is periodic on the window",
                format!("period {q}"),
            ));
        }
    }
    let g = &word.group;
    let window = g.ball(window_radius)?;
    let fine = resolution + k_range as usize;
    let dom_r = g.ball(resolution)?;
    let dom_f = g.ball(fine)?;
    // x_p ∈ X_m^{(r)} iff x_p and s^m t·x_p = x_{p·(s^m t)} agree on ball(r).
    let fixed = |p: &GroupElement, m: i64, dom: &Ball| -> bool {
        let q = g.mul_u(p, &GroupElement::dihedral(m, true));
        dom.elements()
            .iter()
            .all(|d| word.eval_u(&g.mul_u(p, d)) == word.eval_u(&g.mul_u(&q, d)))
    };
    let ms: Vec<i64> = std::iter::once(n)
        .chain((-k_range..=k_range).filter(|&k| k != 0).map(|k| 2 * k + n))
        .collect();
    let total = window.len();
    let mut frequencies = Vec::new();
    let mut members: Vec<Vec<bool>> = Vec::new();
    for &m in &ms {
        let mem: Vec<bool> = window.elements().iter().map(|p| fixed(p, m, &dom_r)).collect();
        frequencies.push((m, ratio(mem.iter().filter(|&&b| b).count(), total)));
        members.push(mem);
    }
    let refined: Vec<bool> = window.elements().iter().map(|p| fixed(p, n, &dom_f)).collect();
    let refined_frequency = ratio(refined.iter().filter(|&&b| b).count(), total);

    // (a) s^k x_p = x_{p·s^{-k}} lies in X_{2k+n}^{(r)} whenever x_p ∈ X_n^{(r+K)}.
    let mut containment_witness = None;
    'a: for (p, _) in window.elements().iter().zip(&refined).filter(|(_, &b)| b) {
        for k in -k_range..=k_range {
            let q = g.mul_u(p, &s_pow(-k));
            if !fixed(&q, 2 * k + n, &dom_r) {
                containment_witness = Some((k, p.clone()));
                break 'a;
            }
        }
    }
    // (b) X_n ∩ X_{2k+n} = ∅ at resolution r.
    let mut disjoint_witness = None;
    'b: for (i, &m) in ms.iter().enumerate().skip(1) {
        for (j, p) in window.elements().iter().enumerate() {
            if members[0][j] && members[i][j] {
                disjoint_witness = Some(((m - n) / 2, p.clone()));
                break 'b;
            }
        }
    }
    // (c) Σ_k μ̂(s^k X_n^{(r+K)}): x_p ∈ s^k A iff x_{p·s^k} ∈ A.
    let mut translate_frequency_sum = Rational::from_integer(0);
    for k in -k_range..=k_range {
        let c = window
            .elements()
            .iter()
            .filter(|p| fixed(&g.mul_u(p, &s_pow(k)), n, &dom_f))
            .count();
        translate_frequency_sum += ratio(c, total);
    }
    Ok(FixedSetReport {
        n,
        k_range,
        resolution,
        window_radius,
        frequencies,
        refined_frequency,
        containment: containment_witness.is_none(),
        containment_witness,
        disjoint: disjoint_witness.is_none(),
        disjoint_witness,
        translate_frequency_sum,
    })
}
