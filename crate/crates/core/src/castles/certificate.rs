use serde_json::{json, Value};

use super::lift::{kernel, lift_castle, LiftReport};
use super::tiles::{dihedral_tile_castle, tile_shape, TileParams, TileReport};
use super::{
    assign_levels, diameter_below, kakutani_rokhlin, shape_reach, skeleton_base, verify_castle, word_lengths, Castle,
    CastleReport, Field, Tower,
};
use crate::error::{Error, Result};
use crate::exact::{format_rational, ratio, Rational};
use crate::groups::{verify_folner, GroupDescriptor, GroupElement, GroupKind};
use crate::subshift::{CylinderSet, Sample};
use crate::words::{Word, WordGenerator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateParams {
    pub window_radius: usize,
    /// Largest skeleton modulus tried.
    pub max_modulus: usize,
    /// Largest tower height searched by Kakutani–Rokhlin.
    pub max_height: usize,
}

impl Default for CertificateParams {
    fn default() -> Self {
        CertificateParams {
            window_radius: 1 << 10,
            max_modulus: 256,
            max_height: 1024,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub method: &'static str,
    pub eps: Rational,
    pub k: Vec<GroupElement>,
    pub window_radius: usize,
    pub modulus: Option<usize>,
    pub castle: CastleReport,
    pub tiles: Option<TileReport>,
    pub lift: Option<LiftReport>,
    pub attempts: Vec<String>,
}

impl CertificateReport {
    pub fn folner_ok(&self) -> bool {
        self.castle.folner_ok()
    }

    pub fn diameter_ok(&self) -> bool {
        diameter_below(self.castle.diameter_exponent, &self.eps)
    }

    pub fn remainder_ok(&self) -> bool {
        self.castle.remainder < self.eps
    }

    pub fn passed(&self) -> bool {
        self.castle.disjoint() && self.folner_ok() && self.diameter_ok() && self.remainder_ok()
    }

    /// First failing condition, if any.
    pub fn failure(&self) -> Option<String> {
        if !self.castle.disjoint() {
            Some(format!("levels overlap ({} overlaps)", self.castle.overlap_count))
        } else if !self.folner_ok() {
            Some(format!(
                "Følner defect {} not below eps",
                self.castle.max_defect().map(|d| format_rational(&d)).unwrap_or_default()
            ))
        } else if !self.diameter_ok() {
            Some(format!("level diameter 2^-{} not below eps", self.castle.diameter_exponent))
        } else if !self.remainder_ok() {
            Some(format!("remainder {} not below eps", format_rational(&self.castle.remainder)))
        } else {
            None
        }
    }

    pub fn to_json(&self, sample: &Sample) -> Value {
        json!({
            "pass": self.passed(),
            "failure": self.failure(),
            "method": self.method,
            "eps": format_rational(&self.eps),
            "K": self.k.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
            "windowRadius": self.window_radius,
            "modulus": self.modulus,
            "maxDefect": self.castle.max_defect().map(|d| format_rational(&d)),
            "diameterExponent": self.castle.diameter_exponent,
            "remainder": format_rational(&self.castle.remainder),
            "measureScope": "empirical measure of the sampled orbit window",
            "castleCheck": self.castle.to_json(sample),
            "tiles": self.tiles.as_ref().map(TileReport::to_json),
            "lift": self.lift.as_ref().map(LiftReport::to_json),
            "attempts": self.attempts,
        })
    }
}

enum Line {
    /// ℤ or `ℤ × F`: Kakutani–Rokhlin along the lifted generator.
    Integers(GroupElement),
    /// D∞ or `D∞ × F`: dihedral tiles.
    Dihedral,
}

fn classify(group: &GroupDescriptor) -> Result<Line> {
    let quotient = match &group.extension {
        None => &group.kind,
        Some(ext) => {
            if kernel(group).is_err() {
                return Err(Error::precondition("extension kernel must be finite"));
            }
            &ext.quotient.kind
        }
    };
    match quotient {
        GroupKind::Integers => Ok(Line::Integers(if group.extension.is_some() {
            group.lift(&GroupElement::Int(1))?
        } else {
            GroupElement::Int(1)
        })),
        GroupKind::Dihedral => Ok(Line::Dihedral),
        _ => Err(Error::precondition("group must be ℤ, D∞ or a finite extension of either")),
    }
}

/// Smallest `k` whose lifted shape has defect below `eps`.
fn min_length(group: &GroupDescriptor, k: &[GroupElement], eps: &Rational, shape: impl Fn(usize) -> Vec<GroupElement>) -> Result<usize> {
    let hs = kernel(group)?;
    for len in 1..=4096 {
        let s: Vec<GroupElement> = shape(len)
            .iter()
            .map(|q| if group.extension.is_some() { group.lift(q) } else { Ok(q.clone()) })
            .collect::<Result<Vec<_>>>()?
            .iter()
            .flat_map(|g| hs.iter().map(move |h| group.mul_u(g, h)))
            .collect();
        if verify_folner(group, &s, k)? < *eps {
            return Ok(len);
        }
    }
    Err(Error::precondition("no shape of length ≤ 4096 is Følner for this K and eps"))
}

fn candidates(m0: usize, cap: usize) -> Vec<usize> {
    let hi = (8 * m0).min(cap.max(m0));
    let mut out: Vec<usize> = (0..usize::BITS).map(|b| 1usize << b).filter(|&p| p >= m0 && p <= hi).collect();
    out.extend((m0..=hi).filter(|m| !m.is_power_of_two()));
    out
}

/// Bits needed so that `2^-r < eps`.
fn diameter_resolution(eps: &Rational) -> usize {
    (0..62).find(|&r| diameter_below(r, eps)).unwrap_or(62)
}

/// Castle certifying almost finiteness in measure for the empirical
/// measure of the sampled orbit: Følner shapes (defect < eps), levels of
/// diameter < eps and remainder < eps.
pub fn af_in_measure_certificate(
    word: &Word,
    k: &[GroupElement],
    eps: Rational,
    params: &CertificateParams,
) -> Result<(Castle, CertificateReport)> {
    if eps <= Rational::from_integer(0) {
        return Err(Error::precondition("eps must be positive"));
    }
    let group = &word.group;
    for g in k {
        group.kind.check(g)?;
    }
    let line = classify(group)?;
    let sample = Sample::new(word.clone(), params.window_radius)?;
    let extended = group.extension.is_some();
    let mut attempts = Vec::new();
    let mut last: Option<(Castle, CertificateReport)> = None;

    let (method, m0) = match &line {
        Line::Integers(_) => ("kakutani-rokhlin", min_length(group, k, &eps, |n| (0..n as i64).map(GroupElement::Int).collect())?),
        Line::Dihedral => ("dihedral-tiles", min_length(group, k, &eps, tile_shape)? + 1),
    };
    let periodic = matches!(word.generator, WordGenerator::Periodic { .. });
    let mods = if periodic { vec![0] } else { candidates(m0.max(2), params.max_modulus) };

    for m in mods {
        let built = build(&sample, &line, m, m0, &eps, params);
        let (quotient, tiles) = match built {
            Ok(x) => x,
            Err(e @ Error::KindMismatch { .. }) => return Err(e),
            Err(e) => {
                attempts.push(format!("modulus {m}: {e}"));
                continue;
            }
        };
        let (castle, lift) = if extended {
            let lift_eps = eps / Rational::from_integer(4);
            match lift_castle(&sample, &quotient, lift_eps) {
                Ok((c, r)) => (c, Some(r)),
                Err(e) => {
                    attempts.push(format!("modulus {m}: lift failed: {e}"));
                    continue;
                }
            }
        } else {
            (quotient, None)
        };
        let castle = castle.with_folner(k.to_vec(), eps);
        let field = Field::new(&sample, shape_reach(group, &castle)?)?;
        let report = CertificateReport {
            method,
            eps,
            k: k.to_vec(),
            window_radius: params.window_radius,
            modulus: (m > 0).then_some(m),
            castle: verify_castle(&field, &castle)?,
            tiles,
            lift,
            attempts: Vec::new(),
        };
        let failure = report.failure();
        last = Some((castle, report));
        match failure {
            None => break,
            Some(f) => attempts.push(format!("modulus {m}: {f}")),
        }
    }
    match last {
        Some((c, mut r)) => {
            r.attempts = attempts;
            Ok((c, r))
        }
        None => Err(Error::Construction(attempts.join("; "))),
    }
}

/// Quotient castle of a finite extension of ℤ or D∞ (or of the group
/// itself): skeleton Kakutani–Rokhlin for the ℤ line, tiles for D∞.
pub fn quotient_castle(
    sample: &Sample,
    modulus: usize,
    min_len: usize,
    eps: &Rational,
    params: &CertificateParams,
) -> Result<(Castle, Option<TileReport>)> {
    let line = classify(&sample.word.group)?;
    build(sample, &line, modulus, min_len + 1, eps, params)
}

/// The quotient castle for one modulus; modulus 0 means the periodic
/// single-atom base.
fn build(
    sample: &Sample,
    line: &Line,
    m: usize,
    m0: usize,
    eps: &Rational,
    params: &CertificateParams,
) -> Result<(Castle, Option<TileReport>)> {
    let group = &sample.word.group;
    match line {
        Line::Integers(step) => {
            let field = Field::new(sample, 0)?;
            let base = if m == 0 {
                let r = diameter_resolution(eps);
                CylinderSet::new(r, [field.table(r)?.atom_at(0).clone()])
            } else {
                skeleton_base(&field, m, m.max(diameter_resolution(eps)))?
            };
            let kr = kakutani_rokhlin(sample, &base, Some(step.clone()), params.max_height)?;
            let castle = if group.extension.is_some() {
                Castle::new(
                    kr.castle
                        .towers
                        .into_iter()
                        .map(|t| {
                            Ok(Tower {
                                shape: t.shape.iter().map(|s| group.project(s)).collect::<Result<_>>()?,
                                base: t.base,
                            })
                        })
                        .collect::<Result<_>>()?,
                )
            } else {
                kr.castle
            };
            Ok((castle, None))
        }
        Line::Dihedral => {
            let mut tp = TileParams::for_modulus(m, m0 - 1);
            tp.key_radius = tp.key_radius.max(diameter_resolution(eps));
            let (c, r) = dihedral_tile_castle(sample, &tp)?;
            Ok((c, Some(r)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssFreeReport {
    pub bound: Rational,
    /// `|T_i|` per tower.
    pub t_sizes: Vec<usize>,
    /// Resolution of the fixed-pattern approximation of `F_g`.
    pub fixed_resolution: usize,
    /// Window positions whose pattern is `g`-fixed at that resolution.
    pub fixed_count: usize,
    /// The coverage identity holds for every atom at the deciding resolution.
    pub identity_holds: bool,
    pub remainder: Rational,
}

impl EssFreeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "bound": format_rational(&self.bound),
            "tSizes": self.t_sizes,
            "fixedResolution": self.fixed_resolution,
            "fixedCount": self.fixed_count,
            "identityHolds": self.identity_holds,
            "remainder": format_rational(&self.remainder),
        })
    }
}

/// Upper estimate of `μ̂(F_g)` from a castle: with `T_i = g⁻¹S_i ∩ S_i`,
/// `F_g` misses `⊔ T_i·B_i`, so `μ̂(F_g) ≤ Σ μ̂((S_i∖T_i)·B_i) + remainder`.
pub fn ess_free_bound(sample: &Sample, castle: &Castle, g: &GroupElement) -> Result<EssFreeReport> {
    let group = &sample.word.group;
    if *g == group.identity() {
        return Err(Error::precondition("g must not be the identity"));
    }
    let glen = word_lengths(group, std::slice::from_ref(g))?[0];
    let reach = shape_reach(group, castle)?;
    let field = Field::new(sample, reach + glen)?;
    let in_t: Vec<Vec<bool>> = castle
        .towers
        .iter()
        .map(|t| t.shape.iter().map(|s| t.shape.contains(&group.mul_u(g, s))).collect())
        .collect();
    let asg = assign_levels(&field, castle)?;
    // 0: in ⊔T_iB_i, 1: in ⊔(S_i∖T_i)B_i, 2: uncovered.
    let class: Vec<u8> = asg
        .level_of
        .iter()
        .map(|l| match l {
            Some((i, s)) if in_t[*i as usize][*s as usize] => 0,
            Some(_) => 1,
            None => 2,
        })
        .collect();
    let mut resolution = 0;
    for t in &castle.towers {
        let m = word_lengths(group, &t.shape)?.into_iter().max().unwrap_or(0);
        resolution = resolution.max(t.base.resolution + m);
    }
    let table = field.table(resolution)?;
    let mut seen: Vec<Option<u8>> = vec![None; table.atom_count()];
    let mut identity_holds = asg.overlap_count == 0;
    for (p, &c) in class.iter().enumerate() {
        let slot = &mut seen[table.id(p) as usize];
        match slot {
            None => *slot = Some(c),
            Some(prev) => identity_holds &= *prev == c,
        }
    }
    let fixed_resolution = resolution + glen;
    let ft = field.table(fixed_resolution)?;
    let g_inv = group.inv_u(g);
    let mut fixed_count = 0;
    for (p, &c) in class.iter().enumerate() {
        if ft.id(p) == ft.id(field.step(p, &g_inv)?) {
            fixed_count += 1;
            if c == 0 {
                return Err(Error::precondition_with(
                    "fixed-pattern approximation of F_g meets ⊔T_i·B_i",
                    field.element(p).to_string(),
                ));
            }
        }
    }
    let outside = class.iter().filter(|&&c| c != 0).count();
    Ok(EssFreeReport {
        bound: ratio(outside, class.len()),
        t_sizes: in_t.iter().map(|v| v.iter().filter(|&&b| b).count()).collect(),
        fixed_resolution,
        fixed_count,
        identity_holds,
        remainder: asg.remainder(),
    })
}
