//! Run configurations, reports and the example gallery.

mod gallery;
mod params;
mod tasks;

pub use gallery::{gallery, Gallery, GalleryOptions};
pub use params::Params;

use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::groups::GroupDescriptor;
use crate::words::Word;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    WordEval,
    WordDump,
    Recurrence,
    Syndetic,
    Balanced,
    Freeness,
    Kr,
    Lift,
    Verify,
    Certify,
    Compare,
    Upgrade,
    Gallery,
}

impl Task {
    pub const ALL: [Task; 13] = [
        Task::WordEval,
        Task::WordDump,
        Task::Recurrence,
        Task::Syndetic,
        Task::Balanced,
        Task::Freeness,
        Task::Kr,
        Task::Lift,
        Task::Verify,
        Task::Certify,
        Task::Compare,
        Task::Upgrade,
        Task::Gallery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::WordEval => "word-eval",
            Task::WordDump => "word-dump",
            Task::Recurrence => "recurrence",
            Task::Syndetic => "syndetic",
            Task::Balanced => "balanced",
            Task::Freeness => "freeness",
            Task::Kr => "kr",
            Task::Lift => "lift",
            Task::Verify => "verify",
            Task::Certify => "certify",
            Task::Compare => "compare",
            Task::Upgrade => "upgrade",
            Task::Gallery => "gallery",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub task: Task,
    pub word: Option<Word>,
    pub params: Value,
    pub output: Output,
    /// The configuration as given, echoed into the report.
    pub raw: Value,
}

impl RunConfig {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::config("", "configuration must be an object"))?;
        let task_name = obj
            .get("task")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("/task", "missing task name"))?;
        let task = Task::parse(task_name).ok_or_else(|| {
            let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
            Error::config("/task", format!("unknown task {task_name:?}; expected one of {}", names.join(", ")))
        })?;
        let mut word = match obj.get("word") {
            Some(w) => Some(Word::from_json(w, "/word")?),
            None if task == Task::Gallery => None,
            None => return Err(Error::config("/word", "missing word specification")),
        };
        if let (Some(g), Some(w)) = (obj.get("group"), word.as_mut()) {
            let desc = GroupDescriptor::from_json(g, "/group")?;
            if desc.kind != w.group.kind {
                return Err(Error::config(
                    "/group",
                    format!("group {} does not match the word's group {}", desc.kind.name(), w.group.kind.name()),
                ));
            }
            if g.get("generators").is_some() {
                w.group = w
                    .group
                    .clone()
                    .with_generators(desc.generators.clone())
                    .map_err(|e| Error::config("/group/generators", e.to_string()))?;
            }
        }
        let params = obj.get("params").cloned().unwrap_or_else(|| Value::Object(Map::new()));
        if !params.is_object() {
            return Err(Error::config("/params", "expected object"));
        }
        let mut output = Output::default();
        if let Some(o) = obj.get("output") {
            let path = |k: &str| -> Result<Option<PathBuf>> {
                match o.get(k) {
                    None | Some(Value::Null) => Ok(None),
                    Some(Value::String(s)) => Ok(Some(PathBuf::from(s))),
                    Some(_) => Err(Error::config(format!("/output/{k}"), "expected path string")),
                }
            };
            output.report = path("report")?;
            output.csv = path("csv")?;
        }
        Ok(RunConfig {
            task,
            word,
            params,
            output,
            raw: v.clone(),
        })
    }

    pub fn parse_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::config("", format!("invalid JSON: {e}")))?;
        Self::from_json(&v)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_str(&s)
    }

    pub(crate) fn word(&self) -> Result<&Word> {
        self.word.as_ref().ok_or_else(|| Error::config("/word", "missing word specification"))
    }

    pub(crate) fn params(&self) -> Params<'_> {
        Params::new(&self.params, "/params")
    }
}

/// One checked condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub task: String,
    pub config: Value,
    pub result: Value,
    pub checks: Vec<Check>,
    pub error: Option<Error>,
    pub seconds: f64,
    /// CSV documents produced by the task.
    pub csv: Vec<(String, String)>,
}

impl Report {
    pub fn new(task: &str, config: Value) -> Self {
        Report {
            task: task.to_string(),
            config,
            result: Value::Null,
            checks: Vec::new(),
            error: None,
            seconds: 0.0,
            csv: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            pass,
        });
    }

    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    /// 0 pass, 1 condition failure, 2 usage or configuration error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some(e) => exit_code(e),
            None if self.pass() => 0,
            None => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "task": self.task,
            "config": self.config,
            "pass": self.pass(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass})).collect::<Vec<_>>(),
            "error": self.error.as_ref().map(|e| json!({"kind": error_kind(e), "message": e.to_string()})),
            "result": self.result,
            "timing": {"seconds": self.seconds},
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceCap { .. } => 3,
        Error::Precondition { .. } | Error::Construction(_) => 1,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::KindMismatch { .. } => "kind-mismatch",
        Error::ResourceCap { .. } => "resource-cap",
        Error::Precondition { .. } => "precondition",
        Error::InvalidTable(_) => "invalid-table",
        Error::NoExtension => "no-extension",
        Error::IncompleteStages(_) => "incomplete-stages",
        Error::Word(_) => "word",
        Error::BadRational(_) => "bad-rational",
        Error::Config { .. } => "config",
        Error::Construction(_) => "construction",
        Error::Io(_) => "io",
    }
}

/// Runs a configuration; failures become report content.
pub fn run(cfg: &RunConfig) -> Report {
    let start = Instant::now();
    let mut report = Report::new(cfg.task.name(), cfg.raw.clone());
    if let Err(e) = tasks::dispatch(cfg, &mut report) {
        report.error = Some(e);
    }
    report.seconds = start.elapsed().as_secs_f64();
    report
}

/// Writes the report and CSV documents to the configured paths.
pub fn write_outputs(cfg: &RunConfig, report: &Report) -> Result<()> {
    let io = |p: &std::path::Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    if let Some(p) = &cfg.output.report {
        std::fs::write(p, report.render()).map_err(|e| io(p, e))?;
    }
    if let Some(p) = &cfg.output.csv {
        if let Some((_, body)) = report.csv.first() {
            std::fs::write(p, body).map_err(|e| io(p, e))?;
        }
    }
    Ok(())
}
