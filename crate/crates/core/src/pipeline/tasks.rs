use serde_json::{json, Value};

use super::{Params, Report, RunConfig, Task};
use crate::castles::{
    af_in_measure_certificate, ess_free_bound, field_for, kakutani_rokhlin, lift_castle, quotient_castle, skeleton_base,
    verify_castle, Castle, CastleReport, CertificateParams, Field,
};
use crate::comparison::{
    subequivalence_search, upgrade_to_af, verify_af_witness, SearchOutcome, SearchParams, UpgradeOutcome,
};
use crate::error::{Error, Result};
use crate::exact::format_rational;
use crate::groups::{GroupElement, GroupKind};
use crate::recurrence::{
    balanced_witness, dihedral_fixedset_report, fixed_point_frequency, recurrence_set, stabilizer_probe,
    syndetic_check,
};
use crate::subshift::Sample;
use crate::words::Word;

pub(super) fn dispatch(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    if cfg.task == Task::Gallery {
        let p = cfg.params();
        let out = p.str_or("out", "")?;
        let opts = super::GalleryOptions {
            out: (!out.is_empty()).then(|| out.into()),
        };
        let g = super::gallery(&opts)?;
        report.result = g.result;
        report.checks = g.checks;
        report.csv = g.csv;
        return Ok(());
    }
    let word = cfg.word()?;
    let p = cfg.params();
    match cfg.task {
        Task::WordEval => word_eval(word, p, report),
        Task::WordDump => word_dump(word, p, report),
        Task::Recurrence | Task::Syndetic | Task::Balanced => recurrence(cfg.task, word, p, report),
        Task::Freeness => freeness(word, p, report),
        Task::Kr => kr(word, p, report),
        Task::Lift => lift(word, p, report),
        Task::Verify => verify(word, p, report),
        Task::Certify => certify(word, p, report).map(|_| ()),
        Task::Compare => compare(word, p, report),
        Task::Upgrade => upgrade(word, p, report),
        Task::Gallery => unreachable!(),
    }
}

fn word_eval(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let at = p.element(&word.group, "at")?;
    let s = word.eval(&at)?;
    report.result = json!({"at": at.to_json(), "symbol": word.symbol_name(s)});
    Ok(())
}

/// `position,symbol` rows over `ball(window)`; ℤ positions ascending.
pub(crate) fn dump_csv(word: &Word, window: usize) -> Result<String> {
    let ball = word.group.ball(window)?;
    let mut elems: Vec<GroupElement> = ball.elements().to_vec();
    if word.group.kind == GroupKind::Integers {
        elems.sort_by_key(|g| g.as_int());
    }
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["position", "symbol"]).map_err(csv_err)?;
    for g in &elems {
        out.write_record([g.to_string().as_str(), word.symbol_name(word.eval_u(g))])
            .map_err(csv_err)?;
    }
    let bytes = out.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 input"))
}

fn word_dump(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let window = p.usize("window")?;
    let csv = dump_csv(word, window)?;
    report.result = json!({"window": window, "rows": csv.lines().count() - 1});
    report.csv.push(("word.csv".into(), csv));
    Ok(())
}

fn recurrence(task: Task, word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let pattern = p.pattern(word, "pattern")?;
    let w = p.usize_or("windowRadius", 64)?;
    let max_k = p.usize_or("maxK", 16)?;
    let rec = recurrence_set(word, &pattern, &word.group.ball(w)?)?;
    let mut result = json!({"recurrence": rec.to_json(word)});
    report.check("patternOccurs", !rec.hits.is_empty());
    match task {
        Task::Syndetic => {
            let s = syndetic_check(word, &rec, max_k)?;
            report.check("syndetic", s.is_some());
            result["syndeticity"] = s.map_or(Value::Null, |s| s.to_json());
        }
        Task::Balanced => {
            let b = balanced_witness(word, &rec, max_k)?;
            report.check("balanced", b.is_some());
            result["balanced"] = b.map_or(Value::Null, |b| b.to_json());
        }
        _ => {}
    }
    report.result = result;
    Ok(())
}

fn freeness(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let g = &word.group;
    match p.str_or("mode", "probe")? {
        "probe" => {
            let depth = p.usize_or("depth", 32)?;
            let radius = p.usize_or("candidateRadius", 4)?;
            let stab = stabilizer_probe(word, depth, radius)?;
            let trivial = stab.iter().all(|x| *x == g.identity());
            report.result = json!({
                "mode": "probe",
                "depth": depth,
                "candidateRadius": radius,
                "stabilizer": stab.iter().map(GroupElement::to_json).collect::<Vec<_>>(),
                "trivial": trivial,
            });
        }
        "fixfreq" => {
            let elems = p.elements_or_gens(g, "g")?;
            let res = p.usize_or("resolution", 16)?;
            let w = p.usize_or("windowRadius", 256)?;
            let max = match p.get("max") {
                Some(_) => Some(p.rational("max")?),
                None => None,
            };
            let mut rows = Vec::new();
            for x in &elems {
                let f = fixed_point_frequency(word, x, res, w)?;
                if let Some(m) = max {
                    if *x != g.identity() {
                        report.check(&format!("fixfreq({x}) <= {}", format_rational(&m)), f <= m);
                    }
                }
                rows.push(json!({"g": x.to_json(), "frequency": format_rational(&f)}));
            }
            report.result = json!({"mode": "fixfreq", "resolution": res, "windowRadius": w, "frequencies": rows});
        }
        "fixedset" => {
            let ns: Vec<i64> = match p.get("n") {
                Some(Value::Array(xs)) => xs
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x.as_i64().ok_or_else(|| Error::config(format!("{}/{i}", p.pointer("n")), "expected integer")))
                    .collect::<Result<_>>()?,
                _ => vec![p.i64_or("n", 0)?],
            };
            let k_range = p.i64_or("kRange", 8)?;
            let res = p.usize_or("resolution", 32)?;
            let w = p.usize_or("windowRadius", 512)?;
            let mut out = Vec::new();
            for n in ns {
                let r = dihedral_fixedset_report(word, n, k_range, res, w)?;
                report.check(&format!("fixedset n={n}"), r.passed());
                out.push(r.to_json());
            }
            report.result = json!({"mode": "fixedset", "reports": out});
        }
        other => {
            return Err(Error::config(
                p.pointer("mode"),
                format!("unknown mode {other:?}; expected probe, fixfreq or fixedset"),
            ))
        }
    }
    Ok(())
}

fn castle_checks(report: &mut Report, v: &CastleReport) {
    report.check("disjoint", v.disjoint());
    report.check("atomConsistent", v.inconsistent_atoms == 0);
    if v.defects.is_some() {
        report.check("folner", v.folner_ok());
    }
}

fn kr(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let w = p.usize_or("windowRadius", 256)?;
    let max_height = p.usize_or("maxHeight", 1024)?;
    let sample = Sample::new(word.clone(), w)?;
    let base = match p.get("skeleton") {
        Some(_) => {
            let sk = Params::new(p.value("skeleton")?, "/params/skeleton");
            let m = sk.usize("modulus")?;
            let r = sk.usize_or("resolution", m)?;
            skeleton_base(&Field::new(&sample, 0)?, m, r)?
        }
        None => p.cylinder(&sample, "base")?,
    };
    let step = match p.get("step") {
        Some(_) => Some(p.element(&word.group, "step")?),
        None => None,
    };
    let k = kakutani_rokhlin(&sample, &base, step, max_height)?;
    let v = verify_castle(&field_for(&sample, &k.castle)?, &k.castle)?;
    castle_checks(report, &v);
    report.result = json!({
        "heights": k.heights,
        "heightCap": k.height_cap,
        "verification": v.to_json(&sample),
        "castle": k.castle.to_json(&sample),
    });
    Ok(())
}

fn lift(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let w = p.usize_or("windowRadius", 512)?;
    let modulus = p.usize("modulus")?;
    let min_len = p.usize_or("minLength", 1)?;
    let eps = p.rational("eps")?;
    let sample = Sample::new(word.clone(), w)?;
    let cp = CertificateParams {
        window_radius: w,
        max_height: p.usize_or("maxHeight", 1024)?,
        ..CertificateParams::default()
    };
    let (quotient, tiles) = quotient_castle(&sample, modulus, min_len, &eps, &cp)?;
    let (castle, lr) = lift_castle(&sample, &quotient, eps)?;
    let v = verify_castle(&field_for(&sample, &castle)?, &castle)?;
    castle_checks(report, &v);
    report.check("orbitPartition", lr.orbit_partition);
    report.check("remainderContained", lr.remainder_contained);
    report.check("tieBound", lr.tie_measure <= lr.tie_bound);
    report.result = json!({
        "tiles": tiles.map(|t| t.to_json()),
        "lift": lr.to_json(),
        "verification": v.to_json(&sample),
        "castle": castle.to_json(&sample),
    });
    Ok(())
}

/// A castle given inline, or a report whose result carries one.
fn castle_value<'a>(p: &Params<'a>, key: &str) -> Result<(&'a Value, String)> {
    let v = p.value(key)?;
    if v.get("towers").is_some() {
        return Ok((v, p.pointer(key)));
    }
    ["/result/castle", "/result/witness/castle"]
        .iter()
        .find_map(|ptr| v.pointer(ptr).map(|c| (c, format!("{}{ptr}", p.pointer(key)))))
        .ok_or_else(|| Error::config(p.pointer(key), "expected a castle object"))
}

fn verify(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let w = p.usize_or("windowRadius", 256)?;
    let sample = Sample::new(word.clone(), w)?;
    let (cv, ptr) = castle_value(&p, "castle")?;
    let mut castle = Castle::from_json(cv, &sample, &ptr)?;
    if p.get("eps").is_some() {
        castle = castle.with_folner(p.elements_or_gens(&word.group, "K")?, p.rational("eps")?);
    }
    let v = verify_castle(&field_for(&sample, &castle)?, &castle)?;
    castle_checks(report, &v);
    if let Some(f) = &castle.folner {
        report.check("remainder", v.remainder < f.eps);
    }
    report.result = json!({"verification": v.to_json(&sample)});
    Ok(())
}

fn certificate_params(p: &Params) -> Result<CertificateParams> {
    let d = CertificateParams::default();
    Ok(CertificateParams {
        window_radius: p.usize_or("windowRadius", d.window_radius)?,
        max_modulus: p.usize_or("maxModulus", d.max_modulus)?,
        max_height: p.usize_or("maxHeight", d.max_height)?,
    })
}

/// Runs the certificate and records its checks; returns the castle and
/// the sample it was verified on.
pub(super) fn certify(word: &Word, p: Params, report: &mut Report) -> Result<(Castle, Sample)> {
    let k = p.elements_or_gens(&word.group, "K")?;
    let eps = p.rational("eps")?;
    let cp = certificate_params(&p)?;
    let (castle, cr) = af_in_measure_certificate(word, &k, eps, &cp)?;
    let sample = Sample::new(word.clone(), cp.window_radius)?;
    report.check("disjoint", cr.castle.disjoint());
    report.check("atomConsistent", cr.castle.inconsistent_atoms == 0);
    report.check("folner", cr.folner_ok());
    report.check("diameter", cr.diameter_ok());
    report.check("remainder", cr.remainder_ok());
    let mut result = json!({"certificate": cr.to_json(&sample), "castle": castle.to_json(&sample)});
    if let Some(fails) = cr.failure() {
        result["failure"] = json!(fails);
    }
    if p.get("essFree").is_some() {
        let g = p.element(&word.group, "essFree")?;
        let ef = ess_free_bound(&sample, &castle, &g)?;
        report.check("essFreeIdentity", ef.identity_holds);
        result["essFree"] = json!({"g": g.to_json(), "report": ef.to_json()});
    }
    report.result = result;
    Ok((castle, sample))
}

fn search_params(p: &Params) -> Result<SearchParams> {
    let d = SearchParams::default();
    Ok(SearchParams {
        translate_radius: p.usize_or("translateRadius", d.translate_radius)?,
        budget: p.usize_or("budget", d.budget as usize)? as u64,
    })
}

fn search_error(o: &SearchOutcome, budget: u64) -> Option<Error> {
    match o {
        SearchOutcome::BudgetExhausted { .. } => Some(Error::ResourceCap {
            what: "search nodes".into(),
            limit: budget as usize,
        }),
        _ => None,
    }
}

fn compare(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let w = p.usize_or("windowRadius", 64)?;
    let sample = Sample::new(word.clone(), w)?;
    let src = p.cylinder(&sample, "src")?;
    let tgt = p.cylinder(&sample, "tgt")?;
    let sp = search_params(&p)?;
    let outcome = subequivalence_search(&sample, &src, &tgt, &sp)?;
    report.check("subequivalent", outcome.witness().is_some());
    report.result = json!({"search": outcome.to_json(&sample)});
    report.error = search_error(&outcome, sp.budget);
    Ok(())
}

fn upgrade(word: &Word, p: Params, report: &mut Report) -> Result<()> {
    let n = p.usize_or("n", 2)?;
    let sp = search_params(&p)?;
    let (castle, sample, cert) = if p.get("castle").is_some() {
        let sample = Sample::new(word.clone(), p.usize_or("windowRadius", 256)?)?;
        let (cv, ptr) = castle_value(&p, "castle")?;
        let mut castle = Castle::from_json(cv, &sample, &ptr)?;
        if p.get("eps").is_some() {
            castle = castle.with_folner(p.elements_or_gens(&word.group, "K")?, p.rational("eps")?);
        }
        (castle, sample, Value::Null)
    } else {
        let mut inner = Report::new("certify", Value::Null);
        let (c, s) = certify(word, p, &mut inner)?;
        report.checks.extend(inner.checks);
        (c, s, inner.result)
    };
    let outcome = upgrade_to_af(&sample, &castle, n, &sp)?;
    let mut result = json!({"n": n});
    if !cert.is_null() {
        result["certificate"] = cert["certificate"].clone();
    }
    match outcome {
        UpgradeOutcome::Found(wit) => {
            let check = verify_af_witness(&sample, &wit)?;
            report.check("afWitness", check.passed());
            result["witness"] = wit.to_json(&sample);
            result["check"] = check.to_json();
        }
        UpgradeOutcome::NotFound(o) => {
            report.check("afWitness", false);
            result["search"] = o.to_json(&sample);
            report.error = search_error(&o, sp.budget);
        }
    }
    report.result = result;
    Ok(())
}
