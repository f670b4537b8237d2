use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hierlab::analyzer::{
    self, random_hierarchy, report_json, report_text, spanning_search, RandomParams, ReportSummary,
    DEFAULT_MAX_PATH_LEN,
};
use hierlab::elaborator::{dump_json, dump_text, elaborate, ElabFailure, Elaboration, Encoding, EncodingStrategy};
use hierlab::kernel::{defeq, DefEqConfig, Telescope, Term};
use hierlab::resolution::{resolve, Goal, SearchConfig, DEFAULT_MAX_DEPTH};
use hierlab::surface::{parse, parse_term_checked, SurfaceError, SurfaceModule};

#[derive(Parser)]
#[command(name = "hier", version, about = "Structure inheritance encodings, definitional equality and typeclass diamonds")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Opts {
    #[arg(long, global = true, value_enum, default_value_t = EncodingArg::Nested)]
    encoding: EncodingArg,
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    eta_kernel: Switch,
    #[arg(long, global = true, value_enum, default_value_t = Switch::Off)]
    eta_unifier: Switch,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    /// Print defeq and search traces.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// `class:parent` or `class:p1,p2`: parents moved to the front of the
    /// class's extends list.
    #[arg(long, global = true)]
    parent_order: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Elaborate a file and dump the environment and instances.
    Elaborate { file: PathBuf },
    /// Decide definitional equality of two terms, or of a `defeq` item by label.
    Defeq { file: PathBuf, lhs: String, rhs: Option<String> },
    /// Synthesize an instance for a `goal` label or a class application.
    Resolve { file: PathBuf, goal: String },
    /// Enumerate diamonds and check each with the kernel.
    Diamonds {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_PATH_LEN)]
        max_path_len: usize,
    },
    /// Try every choice of preferred parent and report coherence of each.
    SpanningSearch { file: PathBuf },
    /// Print a random hierarchy for `--seed`.
    Random,
    /// Check coherence properties on random hierarchies starting at `--seed`.
    Properties {
        #[arg(long, default_value_t = 200)]
        cases: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Flat,
    Nested,
    FlatHack,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Flat => Encoding::Flat,
            EncodingArg::Nested => Encoding::Nested,
            EncodingArg::FlatHack => Encoding::FlatHack,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
}

/// A diagnostic already formatted as `file:line:col: message`.
struct Fatal(String);

type CResult<T> = Result<T, Fatal>;

fn located(file: &str, pos: impl std::fmt::Display, msg: impl std::fmt::Display) -> Fatal {
    Fatal(format!("{file}:{pos}: {msg}"))
}

fn surface_fatal(file: &str, e: &SurfaceError) -> Fatal {
    located(file, e.pos(), e.message())
}

fn elab_fatal(file: &str, e: &ElabFailure) -> Fatal {
    match e.pos {
        Some(p) => located(file, p, e.message()),
        None => Fatal(format!("{file}: {}", e.message())),
    }
}

impl Opts {
    fn config(&self) -> DefEqConfig {
        DefEqConfig::new(self.eta_kernel == Switch::On, self.eta_unifier == Switch::On)
    }

    fn strategy(&self) -> CResult<EncodingStrategy> {
        let mut s = EncodingStrategy::new(self.encoding.into());
        for arg in &self.parent_order {
            let (class, parents) = EncodingStrategy::parse_override(arg).map_err(Fatal)?;
            s = s.with_order(class, parents);
        }
        Ok(s)
    }
}

struct Loaded {
    name: String,
    ast: SurfaceModule,
}

fn load(path: &Path) -> CResult<Loaded> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Fatal(format!("{name}: {e}")))?;
    let ast = parse(&text).map_err(|e| surface_fatal(&name, &e))?;
    Ok(Loaded { name, ast })
}

fn elaborated(path: &Path, opts: &Opts) -> CResult<(Loaded, Elaboration)> {
    let l = load(path)?;
    let el = elaborate(&l.ast, &opts.strategy()?).map_err(|e| elab_fatal(&l.name, &e))?;
    Ok((l, el))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn onoff(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn config_json(encoding: Encoding, cfg: DefEqConfig) -> Value {
    json!({"encoding": encoding, "eta_kernel": cfg.eta_kernel, "eta_unifier": cfg.eta_unifier})
}

fn cmd_elaborate(file: &Path, opts: &Opts) -> CResult<ExitCode> {
    let (_, el) = elaborated(file, opts)?;
    match opts.emit {
        Emit::Text => print!("{}", dump_text(&el)),
        Emit::Json => print_json(&dump_json(&el)),
    }
    Ok(ExitCode::SUCCESS)
}

fn term_arg(which: &str, text: &str, ctx: &Telescope, el: &Elaboration) -> CResult<Term> {
    parse_term_checked(text, ctx, &el.env).map_err(|e| surface_fatal(&format!("<{which}>"), &e))
}

fn cmd_defeq(file: &Path, lhs: &str, rhs: Option<&str>, opts: &Opts) -> CResult<ExitCode> {
    let (l, el) = elaborated(file, opts)?;
    let (label, ctx, a, b) = match rhs {
        Some(rhs) => {
            let a = term_arg("lhs", lhs, &el.variables, &el)?;
            let b = term_arg("rhs", rhs, &el.variables, &el)?;
            (None, el.variables.clone(), a, b)
        }
        None => {
            let d = el
                .defeq(lhs)
                .ok_or_else(|| Fatal(format!("{}: no defeq item labelled `{lhs}`", l.name)))?;
            (Some(lhs), d.ctx.clone(), d.lhs.clone(), d.rhs.clone())
        }
    };
    let cfg = opts.config();
    let out = defeq(&el.env, &cfg, &ctx, &a, &b).map_err(|e| Fatal(format!("{}: {e}", l.name)))?;
    match opts.emit {
        Emit::Text => {
            if opts.trace {
                for line in &out.trace {
                    println!("{line}");
                }
            }
            println!("{}", out.verdict);
        }
        Emit::Json => {
            let mut v = json!({
                "config": config_json(el.strategy.encoding, cfg),
                "label": label,
                "lhs": a.to_string(),
                "rhs": b.to_string(),
                "verdict": out.verdict,
            });
            if opts.trace {
                v["trace"] = json!(out.trace);
            }
            print_json(&v);
        }
    }
    Ok(if out.verdict.is_equal() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_resolve(file: &Path, goal: &str, opts: &Opts) -> CResult<ExitCode> {
    let (_, el) = elaborated(file, opts)?;
    let g = match el.goal(goal) {
        Some(g) => Goal { ctx: g.ctx.clone(), target: g.target.clone() },
        None => Goal { ctx: el.variables.clone(), target: term_arg("goal", goal, &el.variables, &el)? },
    };
    let cfg = SearchConfig::new(opts.config()).with_max_depth(opts.max_depth).map_err(Fatal)?.traced(opts.trace);
    let result = resolve(&el.env, &el.instances, &g, &cfg);
    let ok = result.is_ok();
    match opts.emit {
        Emit::Text => match &result {
            Ok(r) => {
                if opts.trace {
                    for line in &r.trace {
                        println!("{line}");
                    }
                }
                println!("{}", r.term);
            }
            Err(e) => {
                for line in e.trace() {
                    println!("{line}");
                }
                println!("error: {e}");
            }
        },
        Emit::Json => {
            let mut v = json!({
                "config": config_json(el.strategy.encoding, opts.config()),
                "goal": g.target.to_string(),
            });
            match &result {
                Ok(r) => {
                    v["instance"] = json!(r.term.to_string());
                    if opts.trace {
                        v["trace"] = json!(r.trace);
                    }
                }
                Err(e) => {
                    v["error"] = json!(e.to_string());
                    v["trace"] = json!(e.trace());
                }
            }
            print_json(&v);
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_diamonds(file: &Path, max_path_len: usize, opts: &Opts) -> CResult<ExitCode> {
    let (l, el) = elaborated(file, opts)?;
    let cfg = opts.config();
    let reports = analyzer::analyze(&el, cfg, max_path_len).map_err(|e| Fatal(format!("{}: {e}", l.name)))?;
    match opts.emit {
        Emit::Text => {
            print!("{}", report_text(el.strategy.encoding, cfg, &reports));
            if opts.trace {
                for r in &reports {
                    println!("{} -> {}:\n  A = {}\n  B = {}", r.diamond.source, r.diamond.target, r.term_a, r.term_b);
                }
            }
        }
        Emit::Json => print_json(&report_json(el.strategy.encoding, cfg, &reports)),
    }
    Ok(if ReportSummary::of(&reports).all_commute() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_spanning_search(file: &Path, opts: &Opts) -> CResult<ExitCode> {
    let l = load(file)?;
    let cfg = opts.config();
    let report = spanning_search(&l.ast, cfg).map_err(|e| Fatal(format!("{}: {e}", l.name)))?;
    let n = report.placements.len();
    match opts.emit {
        Emit::Text => {
            println!("encoding nested, eta-kernel {}, eta-unifier {}", onoff(cfg.eta_kernel), onoff(cfg.eta_unifier));
            for p in &report.placements {
                let placement: Vec<String> = p.assignment.iter().map(|(c, f)| format!("{c}:{f}")).collect();
                let placement = if placement.is_empty() { "(no choices)".to_string() } else { placement.join(" ") };
                println!(
                    "{placement}: {} / {} commuting{}",
                    p.commuting,
                    p.total,
                    if p.all_commute { ", coherent" } else { "" }
                );
                for f in &p.failing {
                    println!("  not commuting: {f}");
                }
                for v in &p.order_violations {
                    println!("  order of remaining parents changes: {v}");
                }
            }
            println!("{} / {n} coherent", report.coherent);
            println!("{} / {n} coherent by the last-segment rule", report.predicted_coherent);
        }
        Emit::Json => print_json(&json!({
            "config": config_json(Encoding::Nested, cfg),
            "placements": report.placements,
            "summary": {"total": n, "coherent": report.coherent, "predicted_coherent": report.predicted_coherent},
        })),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_properties(cases: u64, opts: &Opts) -> CResult<ExitCode> {
    let params = RandomParams::default();
    let mut failures = Vec::new();
    let (mut flat_diamonds, mut eta_diamonds) = (0, 0);
    for seed in opts.seed..opts.seed.saturating_add(cases) {
        let src = random_hierarchy(seed, &params);
        let ast = parse(&src).map_err(|e| surface_fatal(&format!("<seed {seed}>"), &e))?;
        for (enc, cfg, count) in [
            (Encoding::Flat, DefEqConfig::new(false, false), &mut flat_diamonds),
            (Encoding::Nested, DefEqConfig::new(true, false), &mut eta_diamonds),
        ] {
            let el = elaborate(&ast, &EncodingStrategy::new(enc)).map_err(|e| elab_fatal(&format!("<seed {seed}>"), &e))?;
            let reports = analyzer::analyze(&el, cfg, DEFAULT_MAX_PATH_LEN)
                .map_err(|e| Fatal(format!("<seed {seed}>: {e}")))?;
            *count += reports.len();
            if !ReportSummary::of(&reports).all_commute() {
                failures.push(format!("seed {seed}: {enc} eta-kernel {}", onoff(cfg.eta_kernel)));
            }
        }
    }
    match opts.emit {
        Emit::Text => {
            println!("flat, eta off: {flat_diamonds} diamonds over {cases} hierarchies");
            println!("nested, eta-kernel on: {eta_diamonds} diamonds over {cases} hierarchies");
            for f in &failures {
                println!("not coherent: {f}");
            }
            println!("{} / {cases} hierarchies coherent under both", cases - failures.len() as u64);
        }
        Emit::Json => print_json(&json!({
            "seed": opts.seed,
            "cases": cases,
            "flat_diamonds": flat_diamonds,
            "nested_eta_diamonds": eta_diamonds,
            "failures": failures,
        })),
    }
    Ok(if failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> CResult<ExitCode> {
    let opts = &cli.opts;
    match &cli.cmd {
        Cmd::Elaborate { file } => cmd_elaborate(file, opts),
        Cmd::Defeq { file, lhs, rhs } => cmd_defeq(file, lhs, rhs.as_deref(), opts),
        Cmd::Resolve { file, goal } => cmd_resolve(file, goal, opts),
        Cmd::Diamonds { file, max_path_len } => cmd_diamonds(file, *max_path_len, opts),
        Cmd::SpanningSearch { file } => cmd_spanning_search(file, opts),
        Cmd::Random => {
            print!("{}", random_hierarchy(opts.seed, &RandomParams::default()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Properties { cases } => cmd_properties(*cases, opts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
