//! Command-line front end for `cy4tilt`.

use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use cy4tilt::exceptional::{self, ExcCollection, Helix};
use cy4tilt::hearts::{self, Heart, HeartReport, TiltDir};
use cy4tilt::secondary;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] cy4tilt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cy4tilt", version, about = "Tilting objects and hearts on Tot(Ω_P²)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply standard mutations σ_i (i = 1, 2) left to right.
    Mutate {
        #[command(flatten)]
        cfg: RunConfig,
        /// Mutation indices such as `1 2` or `σ1`.
        indices: Vec<String>,
    },
    /// Slope gap, tilting test and the nearest tilting thread of the helix.
    TiltCheck {
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Secondary quiver of the pullback collection.
    Secondary {
        #[command(flatten)]
        cfg: RunConfig,
    },
    /// Ext-quiver of a heart reached by simple tilts.
    ExtQuiver {
        #[command(flatten)]
        cfg: RunConfig,
        /// Tilt word such as `L1 R2`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        word: String,
    },
    /// Collection, tilting check, heart, Ext-quiver and available tilts.
    Report {
        #[command(flatten)]
        cfg: RunConfig,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "line_bundles")]
    LineBundles,
    #[value(name = "omega_example")]
    OmegaExample,
    #[value(name = "heart_A")]
    HeartA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Args)]
pub struct RunConfig {
    /// Built-in collection.
    #[arg(long, value_enum, conflicts_with = "input")]
    pub preset: Option<Preset>,
    /// JSON collection file; `-` reads stdin.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Number of `SⁿT` summands summed for Hom lower bounds.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(3..))]
    pub n_max: u32,
    /// Include the solver trace.
    #[arg(long)]
    pub explain: bool,
}

fn preset(p: Preset) -> ExcCollection {
    match p {
        Preset::LineBundles => exceptional::line_bundles(),
        Preset::OmegaExample => exceptional::omega_example(),
        Preset::HeartA => exceptional::heart_a_collection(),
    }
}

fn load(cfg: &RunConfig, stdin: &mut dyn Read) -> CliResult<ExcCollection> {
    let text = match (&cfg.preset, cfg.input.as_deref()) {
        (Some(p), _) => return Ok(preset(*p)),
        (None, None) => return Ok(preset(Preset::HeartA)),
        (None, Some("-")) => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
            s
        }
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))?,
    };
    let c: ExcCollection = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("parsing collection JSON: {e}")))?;
    if c.len() != 3 {
        return Err(CliError::Usage(format!("expected 3 objects, got {}", c.len())));
    }
    for e in &c.0 {
        if !exceptional::is_exceptional(e) {
            return Err(CliError::Usage(format!("{} is not an exceptional class", e.display())));
        }
    }
    Ok(c)
}

fn parse_index(s: &str) -> CliResult<usize> {
    let t = s.trim_start_matches('σ').trim_start_matches('s');
    match t.parse::<usize>() {
        Ok(i @ 1..=2) => Ok(i),
        _ => Err(CliError::Usage(format!("mutation index {s:?} must be 1 or 2"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn collection_json(c: &ExcCollection) -> Value {
    let objs: Vec<Value> = c
        .0
        .iter()
        .map(|e| json!({ "label": e.display(), "class": e.cls, "shift": e.shift, "slope": e.slope().to_string() }))
        .collect();
    Value::Array(objs)
}

fn collection_text(c: &ExcCollection) -> String {
    format!("({})\n", c.labels().join(", "))
}

fn cmd_mutate(cfg: &RunConfig, c: &ExcCollection, idx: &[String]) -> CliResult<String> {
    let word: Vec<usize> = idx.iter().map(|s| parse_index(s)).collect::<CliResult<_>>()?;
    let out = exceptional::mutate_word(c, &word)?;
    Ok(match cfg.format {
        Format::Text => collection_text(&out),
        _ => to_json(&json!({ "word": word, "collection": collection_json(&out) })),
    })
}

fn tilt_check(c: &ExcCollection) -> Value {
    let shift = exceptional::find_tilting_thread(c);
    let thread = shift.map(|i| collection_json(&exceptional::helix_thread(&Helix::new(c.clone()), i)));
    json!({
        "gap": exceptional::thread_gap(c).to_string(),
        "tilting": exceptional::is_tilting(c),
        "thread_shift": shift,
        "thread": thread,
    })
}

fn cmd_tilt_check(cfg: &RunConfig, c: &ExcCollection) -> CliResult<String> {
    let v = tilt_check(c);
    Ok(match cfg.format {
        Format::Text => format!(
            "gap {}\ntilting {}\nthread_shift {}\n",
            v["gap"].as_str().unwrap_or_default(),
            v["tilting"],
            v["thread_shift"]
        ),
        _ => to_json(&v),
    })
}

fn cmd_secondary(cfg: &RunConfig, c: &ExcCollection) -> CliResult<String> {
    let q = secondary::build_secondary(c)?;
    let case = secondary::classify(&q)?;
    Ok(match cfg.format {
        Format::Dot => q.to_dot(),
        Format::Text => format!("{}case {case:?}\n", q.to_text()),
        Format::Json => {
            let table = secondary::pullback_table(c, cfg.n_max)?;
            let mut v = json!({ "quiver": q, "case": case, "pullback_ext": table, "n_max": cfg.n_max });
            if case != secondary::SecondaryCase::NoArrows {
                let r = secondary::verify_universal_tilting(c, &q, cfg.explain)?;
                v["universal_extension"] = json!({ "summands": r.summands, "certified": r.certified, "notes": r.notes });
                if cfg.explain {
                    v["trace"] = json!(r.trace);
                }
            }
            to_json(&v)
        }
    })
}

fn heart_of(c: &ExcCollection, word: &str) -> CliResult<Heart> {
    let word = hearts::parse_word(word).map_err(CliError::Usage)?;
    let h = hearts::heart_from_collection(c)?;
    Ok(hearts::tilt_word(&h, &word)?)
}

fn cmd_ext_quiver(cfg: &RunConfig, c: &ExcCollection, word: &str) -> CliResult<String> {
    let h = heart_of(c, word)?;
    let sol = h.solve(cfg.explain)?;
    let q = sol.quiver();
    Ok(match cfg.format {
        Format::Dot => q.to_dot(),
        Format::Text => q.to_text(),
        Format::Json => {
            let mut v = json!({ "heart": HeartReport::new(&h, &sol), "quiver": q });
            if cfg.explain {
                v["trace"] = json!(sol.solution.trace);
            }
            to_json(&v)
        }
    })
}

fn cmd_report(cfg: &RunConfig, c: &ExcCollection) -> CliResult<String> {
    let check = tilt_check(c);
    let base = match exceptional::find_tilting_thread(c) {
        Some(i) => exceptional::helix_thread(&Helix::new(c.clone()), i),
        None => return Err(cy4tilt::Error::NotTilting("no tilting thread within two steps".into()).into()),
    };
    let h = hearts::heart_from_collection(&base)?;
    let sol = h.solve(cfg.explain)?;
    let q = sol.quiver();
    let mut tilts = vec![];
    for i in 0..3 {
        for dir in [TiltDir::Left, TiltDir::Right] {
            let name = hearts::Tilt { dir, index: i }.to_string();
            tilts.push(match hearts::simple_tilt(&h, i, dir) {
                Ok(t) => json!({ "tilt": name, "admissible": true, "simples": t.simples }),
                Err(e) => json!({ "tilt": name, "admissible": false, "reason": e.to_string() }),
            });
        }
    }
    let mut v = json!({
        "collection": collection_json(c),
        "tilt_check": check,
        "heart": HeartReport::new(&h, &sol),
        "quiver": q,
        "available_tilts": tilts,
    });
    if cfg.explain {
        v["trace"] = json!(sol.solution.trace);
    }
    Ok(match cfg.format {
        Format::Dot => q.to_dot(),
        Format::Text => format!("{}{}", collection_text(c), q.to_text()),
        Format::Json => to_json(&v),
    })
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> CliResult<String> {
    match &cli.command {
        Command::Mutate { cfg, indices } => cmd_mutate(cfg, &load(cfg, stdin)?, indices),
        Command::TiltCheck { cfg } => cmd_tilt_check(cfg, &load(cfg, stdin)?),
        Command::Secondary { cfg } => cmd_secondary(cfg, &load(cfg, stdin)?),
        Command::ExtQuiver { cfg, word } => cmd_ext_quiver(cfg, &load(cfg, stdin)?, word),
        Command::Report { cfg } => cmd_report(cfg, &load(cfg, stdin)?),
    }
}

/// Runs one command and returns the exit code: 0 success, 1 computation
/// failure, 2 usage or parse error.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    match dispatch(&cli, stdin) {
        Ok(out) => {
            let _ = stdout.write_all(out.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
