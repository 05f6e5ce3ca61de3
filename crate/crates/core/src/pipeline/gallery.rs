use std::path::PathBuf;

use serde_json::{json, Map, Value};

use super::{tasks, Check, Report, RunConfig};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupElement};
use crate::recurrence::empirical_measure;
use crate::words::{CylinderPattern, Word};

#[derive(Clone, Debug, Default)]
pub struct GalleryOptions {
    /// Directory receiving `report.json` and the CSV files.
    pub out: Option<PathBuf>,
}

/// Gallery output: everything except timing is deterministic.
#[derive(Clone, Debug)]
pub struct Gallery {
    pub result: Value,
    pub checks: Vec<Check>,
    pub csv: Vec<(String, String)>,
}

struct Section {
    name: &'static str,
    steps: Map<String, Value>,
    checks: Vec<Check>,
    csv: Vec<(String, String)>,
    /// First stage that failed with an error; later stages are skipped.
    halted: Option<String>,
}

impl Section {
    fn new(name: &'static str) -> Self {
        Section {
            name,
            steps: Map::new(),
            checks: Vec::new(),
            csv: Vec::new(),
            halted: None,
        }
    }

    /// Runs one task configuration and files its result under `step`.
    fn step(&mut self, step: &str, task: &str, word: &Word, params: Value) -> Report {
        let raw = json!({"task": task, "word": word.to_json(), "params": params});
        let mut report = Report::new(task, raw.clone());
        if self.halted.is_some() {
            return report;
        }
        match RunConfig::from_json(&raw) {
            Ok(cfg) => {
                if let Err(e) = tasks::dispatch(&cfg, &mut report) {
                    report.error = Some(e);
                }
            }
            Err(e) => report.error = Some(e),
        }
        self.record(step, &report);
        report
    }

    fn record(&mut self, step: &str, report: &Report) {
        for c in &report.checks {
            self.check(&format!("{step}/{}", c.name), c.pass);
        }
        if let Some(e) = &report.error {
            self.check(&format!("{step}/completed"), false);
            self.halted = Some(step.to_string());
            self.steps.insert(step.to_string(), json!({"config": report.config, "error": e.to_string()}));
        } else {
            self.steps.insert(step.to_string(), json!({"config": report.config, "result": report.result}));
        }
    }

    fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check {
            name: format!("{}/{name}", self.name),
            pass,
        });
    }

    fn note(&mut self, step: &str, v: Value) {
        self.steps.insert(step.to_string(), v);
    }
}

const PROBE_DEPTHS: [usize; 3] = [8, 32, 64];
const Y0_SHIFT: i64 = 1001;

fn probe_params(depth: usize) -> Value {
    json!({"mode": "probe", "depth": depth, "candidateRadius": 4})
}

fn gens(word: &Word) -> Value {
    Value::Array(word.group.symmetric_generators().iter().map(GroupElement::to_json).collect())
}

fn common(s: &mut Section, word: &Word, slug: &str) -> Result<()> {
    let pattern = CylinderPattern::from_ball(word, &word.group.ball(2)?);
    s.step(
        "recurrence",
        "syndetic",
        word,
        json!({"pattern": pattern.to_json(&word.alphabet), "windowRadius": 48, "maxK": 16}),
    );
    let m = empirical_measure(word, 2, 256)?;
    s.check("measure/sumsToOne", m.frequency_sum() == crate::exact::Rational::from_integer(1));
    s.note("measure", m.to_json(word));
    s.csv.push((format!("measure_{slug}.csv"), m.to_csv(word)));
    s.csv.push((format!("word_{slug}.csv"), tasks::dump_csv(word, 8)?));
    Ok(())
}

/// The amplified period-doubling word over D∞.
fn dihedral_section() -> Result<Section> {
    let mut s = Section::new("dihedral");
    let word = Word::period_doubling(24)?.amplify()?;
    common(&mut s, &word, "dihedral")?;

    let t = GroupElement::dihedral(0, true).to_json();
    for depth in PROBE_DEPTHS {
        let probe = s.step(&format!("stabilizer{depth}"), "freeness", &word, probe_params(depth));
        let has_t = probe.result["stabilizer"].as_array().is_some_and(|xs| xs.contains(&t));
        s.check(&format!("stabilizer{depth}/containsT"), has_t);
    }

    s.step(
        "fixedSets",
        "freeness",
        &word,
        json!({"mode": "fixedset", "n": [0, 1, 2], "kRange": 8, "resolution": 32, "windowRadius": 256}),
    );
    let eps = "1/4";
    s.step(
        "certificate",
        "certify",
        &word,
        json!({"K": gens(&word), "eps": eps, "windowRadius": 1024, "essFree": t}),
    );
    s.step(
        "upgrade",
        "upgrade",
        &word,
        json!({"K": gens(&word), "eps": eps, "windowRadius": 1024, "n": 2}),
    );
    Ok(s)
}

/// The same word crossed with ℤ₂.
fn product_section() -> Result<Section> {
    let mut s = Section::new("product");
    let word = Word::period_doubling(24)?.amplify()?.product(&FiniteGroup::cyclic(2))?;
    s.check("alphabetSize3", word.alphabet.len() == 3);
    common(&mut s, &word, "product")?;

    // x₀ is fixed by (t, e) but by no nontrivial element of the kernel F.
    let t = GroupElement::pair(GroupElement::dihedral(0, true), GroupElement::Finite(0)).to_json();
    let f1 = GroupElement::pair(GroupElement::dihedral(0, false), GroupElement::Finite(1)).to_json();
    for depth in PROBE_DEPTHS {
        let probe = s.step(&format!("stabilizer{depth}"), "freeness", &word, probe_params(depth));
        let stab = probe.result["stabilizer"].as_array().cloned().unwrap_or_default();
        s.check(&format!("stabilizer{depth}/containsT"), stab.contains(&t));
        s.check(&format!("stabilizer{depth}/kernelFree"), !stab.contains(&f1));
    }
    // A translate of x₀ far along the line: its stabilizer in the probe ball is trivial.
    let y0 = word.shift(&GroupElement::pair(GroupElement::dihedral(Y0_SHIFT, false), GroupElement::Finite(0)))?;
    let probe = s.step("freePoint", "freeness", &y0, probe_params(*PROBE_DEPTHS.last().expect("nonempty")));
    s.check("freePoint/trivial", probe.result["trivial"] == json!(true));

    s.step(
        "fixedPoints",
        "freeness",
        &word,
        json!({"mode": "fixfreq", "g": gens(&word), "resolution": 16, "windowRadius": 256, "max": "1/2"}),
    );
    let eps = "1/4";
    s.step("certificate", "certify", &word, json!({"K": gens(&word), "eps": eps, "windowRadius": 1024}));
    s.step(
        "upgrade",
        "upgrade",
        &word,
        json!({"K": gens(&word), "eps": eps, "windowRadius": 1024, "n": 2}),
    );
    Ok(s)
}

/// Builds both sections concurrently; results are keyed by section name.
pub fn gallery(opts: &GalleryOptions) -> Result<Gallery> {
    let (a, b) = std::thread::scope(|sc| {
        let a = sc.spawn(dihedral_section);
        let b = sc.spawn(product_section);
        (a.join(), b.join())
    });
    let join = |name: &'static str, r: std::thread::Result<Result<Section>>| -> Section {
        let err = match r {
            Ok(Ok(s)) => return s,
            Ok(Err(e)) => e.to_string(),
            Err(_) => "section panicked".to_string(),
        };
        let mut s = Section::new(name);
        s.check("completed", false);
        s.note("error", json!(err));
        s
    };
    let mut sections = vec![join("dihedral", a), join("product", b)];
    sections.sort_by_key(|s| s.name);

    let mut result = Map::new();
    let mut checks = Vec::new();
    let mut csv = Vec::new();
    for s in sections {
        let mut steps = s.steps;
        if let Some(h) = s.halted {
            steps.insert("haltedAt".into(), json!(h));
        }
        result.insert(s.name.to_string(), Value::Object(steps));
        checks.extend(s.checks);
        csv.extend(s.csv);
    }
    let g = Gallery {
        result: Value::Object(result),
        checks,
        csv,
    };
    if let Some(dir) = &opts.out {
        write_gallery(dir, &g)?;
    }
    Ok(g)
}

fn write_gallery(dir: &std::path::Path, g: &Gallery) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in &g.csv {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}
