use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use castleworks::pipeline::{run, write_outputs, Report, RunConfig};
use castleworks::{CylinderPattern, Error, Word};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "castleworks", version, about = "Castles, Følner sets and comparison witnesses for subshifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build both example subshifts end to end.
    Gallery {
        /// Directory for report.json and CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate or dump a word
    #[command(subcommand)]
    Word(WordCmd),
    /// Return times of a pattern
    #[command(subcommand)]
    Recurrence(RecurrenceCmd),
    /// Stabilizer and fixed-point probes
    #[command(subcommand)]
    Freeness(FreenessCmd),
    /// Build and check castles
    #[command(subcommand)]
    Castle(CastleCmd),
    /// Comparison witnesses
    #[command(subcommand)]
    Compare(CompareCmd),
}

/// Options shared by every task subcommand.
#[derive(Args)]
struct Common {
    /// Word specification: a JSON file or inline JSON.
    #[arg(long)]
    word: String,
    /// Extra parameters as a JSON object, merged under the flags.
    #[arg(long)]
    params: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the first CSV output here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum WordCmd {
    /// Symbol at one group element.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Group element as JSON, e.g. `5` or `{"n":2,"r":1}`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// CSV `position,symbol` over a ball.
    Dump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        window: usize,
    },
}

#[derive(Args)]
struct PatternArgs {
    /// Cylinder pattern as JSON, or `ball:R` for the word's own pattern on ball(R).
    #[arg(long, default_value = "ball:2")]
    pattern: String,
    #[arg(long)]
    window_radius: Option<usize>,
}

#[derive(Subcommand)]
enum RecurrenceCmd {
    /// Recurrence set of a pattern in a window.
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pattern: PatternArgs,
    },
    /// Syndeticity witness for the recurrence set.
    Syndetic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long)]
        max_k: Option<usize>,
    },
}

#[derive(Subcommand)]
enum FreenessCmd {
    /// Stabilizer of the word inside a ball of candidates.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        candidate_radius: Option<usize>,
    },
    /// Fixed-point frequencies of group elements.
    Fixfreq {
        #[command(flatten)]
        common: Common,
        /// `gens` or a JSON element or array of elements.
        #[arg(long, default_value = "gens", allow_hyphen_values = true)]
        g: String,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        window_radius: Option<usize>,
        /// Fail unless every frequency is at most this rational.
        #[arg(long)]
        max: Option<String>,
    },
}

#[derive(Subcommand)]
enum CastleCmd {
    /// Kakutani–Rokhlin castle over a skeleton or explicit base.
    Kr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        modulus: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Explicit base cylinder set as JSON.
        #[arg(long, conflicts_with = "modulus")]
        base: Option<String>,
        #[arg(long)]
        window_radius: Option<usize>,
        #[arg(long)]
        max_height: Option<usize>,
    },
    /// Quotient castle lifted through the extension kernel.
    Lift {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        modulus: usize,
        #[arg(long)]
        min_length: Option<usize>,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        window_radius: Option<usize>,
    },
    /// Re-verify a castle file.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        castle: String,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long = "K", default_value = "gens")]
        k: String,
        #[arg(long)]
        window_radius: Option<usize>,
    },
    /// Almost-finiteness-in-measure certificate.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: String,
        #[arg(long = "K", default_value = "gens")]
        k: String,
        #[arg(long)]
        window_radius: Option<usize>,
        #[arg(long)]
        max_modulus: Option<usize>,
        /// Also bound the fixed-point mass of this element.
        #[arg(long, allow_hyphen_values = true)]
        ess_free: Option<String>,
    },
}

#[derive(Subcommand)]
enum CompareCmd {
    /// Search a subequivalence witness `src ≺ tgt`.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        src: String,
        #[arg(long)]
        tgt: String,
        /// Translate radius.
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        window_radius: Option<usize>,
    },
    /// Upgrade a certificate castle to an almost-finiteness witness.
    Upgrade {
        #[command(flatten)]
        common: Common,
        /// Castle JSON, or a certify report containing one.
        #[arg(long)]
        cert: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        window_radius: Option<usize>,
    },
}

/// A file path if one exists, otherwise inline JSON.
fn json_arg(s: &str, what: &str) -> Result<Value, Error> {
    let p = Path::new(s);
    let text = if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?
    } else {
        s.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::config(format!("/{what}"), format!("invalid JSON: {e}")))
}

/// Like [`json_arg`], but a bare word such as `gens` stays a string.
fn loose_arg(s: &str, what: &str) -> Result<Value, Error> {
    json_arg(s, what).or_else(|e| {
        if s.chars().all(|c| c.is_ascii_alphanumeric() || c == '/') {
            Ok(Value::String(s.to_string()))
        } else {
            Err(e)
        }
    })
}

struct Builder {
    task: &'static str,
    word: Value,
    params: Map<String, Value>,
    output: Map<String, Value>,
}

impl Builder {
    fn new(task: &'static str, c: &Common) -> Result<Self, Error> {
        let word = json_arg(&c.word, "word")?;
        let mut params = Map::new();
        if let Some(p) = &c.params {
            match json_arg(p, "params")? {
                Value::Object(m) => params = m,
                _ => return Err(Error::config("/params", "expected object")),
            }
        }
        let mut output = Map::new();
        if let Some(r) = &c.report {
            output.insert("report".into(), json!(r));
        }
        if let Some(r) = &c.csv {
            output.insert("csv".into(), json!(r));
        }
        Ok(Builder {
            task,
            word,
            params,
            output,
        })
    }

    fn set(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    fn opt<T: Into<Value>>(self, key: &str, v: Option<T>) -> Self {
        match v {
            Some(x) => self.set(key, x),
            None => self,
        }
    }

    fn pattern(self, p: &PatternArgs) -> Result<Self, Error> {
        let v = match p.pattern.strip_prefix("ball:") {
            Some(r) => {
                let r: usize = r
                    .parse()
                    .map_err(|_| Error::config("/params/pattern", "expected ball:R with an integer R"))?;
                let word = Word::from_json(&self.word, "/word")?;
                CylinderPattern::from_ball(&word, &word.group.ball(r)?).to_json(&word.alphabet)
            }
            None => json_arg(&p.pattern, "params/pattern")?,
        };
        Ok(self.set("pattern", v).opt("windowRadius", p.window_radius))
    }

    fn config(self) -> Result<RunConfig, Error> {
        RunConfig::from_json(&json!({
            "task": self.task,
            "word": self.word,
            "params": self.params,
            "output": self.output,
        }))
    }
}

/// What the command wants printed on stdout.
enum Emit {
    Report,
    Csv,
}

fn build(cmd: Command) -> Result<(RunConfig, Emit, Option<PathBuf>), Error> {
    let b = match cmd {
        Command::Run { config } => return Ok((RunConfig::load(&config)?, Emit::Report, None)),
        Command::Gallery { out } => {
            let cfg = RunConfig::from_json(&json!({"task": "gallery"}))?;
            return Ok((cfg, Emit::Report, out));
        }
        Command::Word(WordCmd::Eval { common, at }) => Builder::new("word-eval", &common)?.set("at", json_arg(&at, "params/at")?),
        Command::Word(WordCmd::Dump { common, window }) => {
            let emit = if common.csv.is_none() { Emit::Csv } else { Emit::Report };
            let cfg = Builder::new("word-dump", &common)?.set("window", window).config()?;
            return Ok((cfg, emit, None));
        }
        Command::Recurrence(RecurrenceCmd::Scan { common, pattern }) => Builder::new("recurrence", &common)?.pattern(&pattern)?,
        Command::Recurrence(RecurrenceCmd::Syndetic { common, pattern, max_k }) => {
            Builder::new("syndetic", &common)?.pattern(&pattern)?.opt("maxK", max_k)
        }
        Command::Freeness(FreenessCmd::Probe {
            common,
            depth,
            candidate_radius,
        }) => Builder::new("freeness", &common)?
            .set("mode", "probe")
            .opt("depth", depth)
            .opt("candidateRadius", candidate_radius),
        Command::Freeness(FreenessCmd::Fixfreq {
            common,
            g,
            resolution,
            window_radius,
            max,
        }) => {
            let g = match loose_arg(&g, "params/g")? {
                v @ (Value::Array(_) | Value::String(_)) => v,
                single => Value::Array(vec![single]),
            };
            Builder::new("freeness", &common)?
                .set("mode", "fixfreq")
                .set("g", g)
                .opt("resolution", resolution)
                .opt("windowRadius", window_radius)
                .opt("max", max)
        }
        Command::Castle(CastleCmd::Kr {
            common,
            modulus,
            resolution,
            base,
            window_radius,
            max_height,
        }) => {
            let b = Builder::new("kr", &common)?;
            let b = match (base, modulus) {
                (Some(base), _) => b.set("base", json_arg(&base, "params/base")?),
                (None, Some(m)) => b.set("skeleton", json!({"modulus": m, "resolution": resolution.unwrap_or(m)})),
                (None, None) => return Err(Error::config("/params/skeleton", "give --modulus or --base")),
            };
            b.opt("windowRadius", window_radius).opt("maxHeight", max_height)
        }
        Command::Castle(CastleCmd::Lift {
            common,
            modulus,
            min_length,
            eps,
            window_radius,
        }) => Builder::new("lift", &common)?
            .set("modulus", modulus)
            .set("eps", eps)
            .opt("minLength", min_length)
            .opt("windowRadius", window_radius),
        Command::Castle(CastleCmd::Verify {
            common,
            castle,
            eps,
            k,
            window_radius,
        }) => Builder::new("verify", &common)?
            .set("castle", json_arg(&castle, "params/castle")?)
            .set("K", loose_arg(&k, "params/K")?)
            .opt("eps", eps)
            .opt("windowRadius", window_radius),
        Command::Castle(CastleCmd::Certify {
            common,
            eps,
            k,
            window_radius,
            max_modulus,
            ess_free,
        }) => Builder::new("certify", &common)?
            .set("eps", eps)
            .set("K", loose_arg(&k, "params/K")?)
            .opt("windowRadius", window_radius)
            .opt("maxModulus", max_modulus)
            .opt("essFree", ess_free.map(|g| json_arg(&g, "params/essFree")).transpose()?),
        Command::Compare(CompareCmd::Search {
            common,
            src,
            tgt,
            radius,
            budget,
            window_radius,
        }) => Builder::new("compare", &common)?
            .set("src", json_arg(&src, "params/src")?)
            .set("tgt", json_arg(&tgt, "params/tgt")?)
            .opt("translateRadius", radius)
            .opt("budget", budget)
            .opt("windowRadius", window_radius),
        Command::Compare(CompareCmd::Upgrade {
            common,
            cert,
            n,
            radius,
            budget,
            window_radius,
        }) => {
            let cert = json_arg(&cert, "params/castle")?;
            // A certify report remembers its window radius.
            let w = window_radius.or_else(|| {
                cert.pointer("/config/params/windowRadius")
                    .or_else(|| cert.pointer("/result/certificate/windowRadius"))
                    .and_then(Value::as_u64)
                    .map(|w| w as usize)
            });
            Builder::new("upgrade", &common)?
                .set("castle", cert)
                .set("n", n)
                .opt("translateRadius", radius)
                .opt("budget", budget)
                .opt("windowRadius", w)
        }
    };
    Ok((b.config()?, Emit::Report, None))
}

/// `report.json` plus every CSV document.
fn write_dir(dir: &Path, report: &Report) -> Result<(), Error> {
    let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let files = std::iter::once(("report.json".to_string(), report.render())).chain(report.csv.iter().cloned());
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| io(&p, e))?;
    }
    Ok(())
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("castleworks: {e}");
    ExitCode::from(castleworks::pipeline::exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, emit, out_dir) = match build(cli.command) {
        Ok(x) => x,
        Err(e) => return fail(&e),
    };
    let report: Report = run(&cfg);
    if let Err(e) = write_outputs(&cfg, &report) {
        return fail(&e);
    }
    if let Some(dir) = out_dir {
        if let Err(e) = write_dir(&dir, &report) {
            return fail(&e);
        }
    }
    let mut stdout = std::io::stdout().lock();
    let text = match emit {
        Emit::Csv if report.error.is_none() => report.csv.first().map(|(_, b)| b.clone()).unwrap_or_default(),
        _ if cfg.output.report.is_some() => String::new(),
        _ => report.render(),
    };
    let _ = stdout.write_all(text.as_bytes());
    if let Some(e) = &report.error {
        eprintln!("castleworks: {e}");
    }
    ExitCode::from(report.exit_code() as u8)
}
