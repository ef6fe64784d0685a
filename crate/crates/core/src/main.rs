use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use rdbound::compose::{
    compositional_bound, BaseCase, BaseCaseKind, BoundReport, ComposeConfig, RdMethod, DEFAULT_RD_STATE_CAP_B2,
    DEFAULT_TD_TRIGGER,
};
use rdbound::gen::{GeneratorSpec, RandomSpec};
use rdbound::io::{
    read_system_file, serialize_document, write_bound_csv, write_topo_csv, BoundRow, Format, SystemDocument, TopoRow,
};
use rdbound::oracle::{
    check_conjecture, exp_bound, longest_simple_path, topo_report, ConjectureVerdict, OracleCaps,
    DEFAULT_RD_STATE_CAP,
};
use rdbound::smt::{encode_phi1_graph, encode_phi2, rd_via_smt, Encoding, RdSearchConfig, Schedule, SolverConfig};
use rdbound::system::{build_transition_graph, FullState, DEFAULT_EXPLICIT_CAP};
use rdbound::{Error, Result, System};

#[derive(Parser)]
#[command(name = "rdbound", version, about = "Topological properties and compositional bounds for factored systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact Exp, diameter, recurrence and traversal diameters.
    Topo(TopoArgs),
    /// Recurrence diameter through an SMT solver.
    Rd(RdArgs),
    /// Compositional upper bound on plan length.
    Bound(BoundArgs),
    /// Check whether td in {0,1,2} forces td = rd over a family.
    Conjecture(ConjectureArgs),
    /// Write a generated system to a file or stdout.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Clique,
    Star,
    Lotus,
    LotusProduct,
    Random,
}

#[derive(Args, Clone)]
struct Source {
    /// System file (.json, otherwise the text format).
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generator family.
    #[arg(long, value_enum)]
    gen: Option<Family>,
    /// Clique variable count.
    #[arg(long)]
    m: Option<usize>,
    /// Star leaves or lotus petals.
    #[arg(long)]
    n: Option<u64>,
    /// Number of lotus copies.
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    vars: Option<usize>,
    #[arg(long)]
    actions: Option<usize>,
    #[arg(long, default_value_t = 2)]
    max_pre: usize,
    #[arg(long, default_value_t = 2)]
    max_eff: usize,
    #[arg(long)]
    allow_empty_effects: bool,
    /// Largest variable count for explicit state spaces.
    #[arg(long, default_value_t = DEFAULT_EXPLICIT_CAP)]
    explicit_cap: usize,
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--gen {family} needs --{flag}")))
}

impl Source {
    fn spec(&self) -> Result<Option<GeneratorSpec>> {
        let Some(family) = self.gen else { return Ok(None) };
        Ok(Some(match family {
            Family::Clique => GeneratorSpec::Clique { m: need(self.m, "m", "clique")? },
            Family::Star => GeneratorSpec::Star { n: need(self.n, "n", "star")? },
            Family::Lotus => GeneratorSpec::Lotus { n: need(self.n, "n", "lotus")? },
            Family::LotusProduct => GeneratorSpec::LotusProduct {
                n: need(self.n, "n", "lotus-product")?,
                copies: need(self.copies, "copies", "lotus-product")?,
            },
            Family::Random => GeneratorSpec::Random(RandomSpec {
                vars: need(self.vars, "vars", "random")?,
                actions: need(self.actions, "actions", "random")?,
                max_pre: self.max_pre,
                max_eff: self.max_eff,
                allow_empty_effects: self.allow_empty_effects,
                seed: self.seed,
            }),
        }))
    }

    /// The system and a label for reports.
    fn load(&self) -> Result<(String, SystemDocument)> {
        if let Some(path) = &self.input {
            let doc = read_system_file(path)?;
            return Ok((problem_label(path), doc));
        }
        match self.spec()? {
            Some(spec) => Ok((spec.label(), generated_document(&spec, self.explicit_cap)?)),
            None => Err(Error::Config("give --input FILE or --gen FAMILY".into())),
        }
    }
}

fn problem_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned())
}

fn generated_document(spec: &GeneratorSpec, cap: usize) -> Result<SystemDocument> {
    let mut doc = SystemDocument::new(spec.generate(cap)?);
    doc.name = Some(spec.label());
    doc.metadata.insert("generator".into(), serde_json::to_value(spec)?);
    doc.metadata.insert("rng".into(), Value::String("splitmix64".into()));
    Ok(doc)
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Solver command; `{file}` is replaced by a script path, otherwise the
    /// script goes to stdin. Defaults to $RDBOUND_SOLVER or `z3 -in`.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Per-query time limit.
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long, value_enum, default_value_t = Schedule::Linear)]
    schedule: Schedule,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let timeout = self.timeout_ms.map(Duration::from_millis);
        match &self.solver_cmd {
            Some(t) => SolverConfig::from_template(t, timeout),
            None => SolverConfig::from_env(timeout),
        }
    }
}

#[derive(Args)]
struct TopoArgs {
    #[command(flatten)]
    source: Source,
    /// Also print a longest simple path and a maximal walk.
    #[arg(long)]
    witness: bool,
    /// State limit for the exact recurrence diameter search.
    #[arg(long, default_value_t = DEFAULT_RD_STATE_CAP)]
    rd_cap: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RdArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Encoding::Factored)]
    encoding: Encoding,
    #[command(flatten)]
    solver: SolverArgs,
    /// Exact explicit search instead of the solver.
    #[arg(long)]
    bruteforce: bool,
    /// Answer queries with k > Exp as unsat without the solver.
    #[arg(long)]
    skip_beyond_exp: bool,
    /// Decode and print the path of the last satisfiable factored query.
    #[arg(long)]
    models: bool,
    /// Write the scripts for k = 1..=min(Exp+1, k-max) here and stop.
    #[arg(long)]
    emit_smt: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    k_max: u64,
    #[arg(long, default_value_t = DEFAULT_RD_STATE_CAP)]
    rd_cap: usize,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    source: Source,
    /// Bound every system file in this directory.
    #[arg(long, conflicts_with_all = ["input", "gen"])]
    batch: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BaseCaseKind::B1)]
    base: BaseCaseKind,
    /// b2 computes rd only when Exp is at most this.
    #[arg(long, default_value_t = DEFAULT_RD_STATE_CAP_B2)]
    rd_state_cap: u64,
    /// b1 computes rd only when td exceeds this.
    #[arg(long, default_value_t = DEFAULT_TD_TRIGGER)]
    td_trigger: u64,
    #[arg(long, value_enum, default_value_t = RdMethod::Smt)]
    rd_method: RdMethod,
    #[command(flatten)]
    solver: SolverArgs,
    /// Time limit for one explicit rd search.
    #[arg(long)]
    bruteforce_timeout_ms: Option<u64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Omit the per-cluster lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConjectureFamily {
    Random,
    Star,
    Lotus,
}

#[derive(Args)]
struct ConjectureArgs {
    #[arg(long, value_enum, default_value_t = ConjectureFamily::Random)]
    gen: ConjectureFamily,
    /// Seed range for random systems, `A..B` or `A..=B`.
    #[arg(long, default_value = "0..1000")]
    seeds: String,
    /// Size range for star and lotus systems.
    #[arg(long, default_value = "1..=7")]
    sizes: String,
    #[arg(long, default_value_t = 5)]
    vars: usize,
    #[arg(long, default_value_t = 10)]
    actions: usize,
    #[arg(long, default_value_t = 2)]
    max_pre: usize,
    #[arg(long, default_value_t = 2)]
    max_eff: usize,
    /// Directory for counterexample systems.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Json(_)
        | Error::UnknownVariable(_)
        | Error::ContradictoryLiteral(_)
        | Error::DuplicateVariable(_)
        | Error::InvalidName(_)
        | Error::DomainMismatch(_) => 3,
        Error::ExplicitStateTooLarge { .. } | Error::RdBruteforceTooLarge { .. } | Error::Solver { .. } => 4,
        Error::InvalidStepCount(_) | Error::Generator(_) | Error::Config(_) | Error::Csv(_) | Error::Io(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Topo(a) => cmd_topo(a),
        Cmd::Rd(a) => cmd_rd(a),
        Cmd::Bound(a) => cmd_bound(a),
        Cmd::Conjecture(a) => cmd_conjecture(a),
        Cmd::Gen(a) => cmd_gen(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if let Error::Solver { log, .. } = &e {
                for q in log {
                    eprintln!("  k={} {} {}ms", q.k, q.verdict.status.as_str(), q.verdict.elapsed.as_millis());
                }
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Bits of a packed state in domain order, first domain variable first.
fn bits(sys: &System, x: FullState) -> String {
    (0..sys.domain().len()).map(|p| if x.bit(p) { '1' } else { '0' }).collect()
}

fn create_file(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

fn cmd_topo(a: TopoArgs) -> Result<()> {
    let (label, doc) = a.source.load()?;
    let sys = &doc.system;
    let caps = OracleCaps {
        explicit_vars: a.source.explicit_cap,
        rd_states: a.rd_cap,
    };
    let r = topo_report(sys, caps)?;
    println!("problem={label}");
    println!("exp={} d={} rd={} td={}", r.exp, r.d, r.rd, r.td);
    if a.witness {
        let fmt = |w: &[usize]| w.iter().map(|&v| bits(sys, FullState(v as u64))).collect::<Vec<_>>().join(" ");
        println!("rd_witness: {}", fmt(&r.rd_witness));
        println!("td_witness: {}", fmt(&r.td_witness));
    }
    if let Some(path) = &a.csv {
        write_topo_csv(create_file(path)?, &[TopoRow::from_report(&label, &r)])?;
    }
    Ok(())
}

fn cmd_rd(a: RdArgs) -> Result<()> {
    let (label, doc) = a.source.load()?;
    let sys = &doc.system;
    if let Some(dir) = &a.emit_smt {
        fs::create_dir_all(dir)?;
        let top = exp_bound(sys).saturating_add(1).min(a.k_max);
        let graph = match a.encoding {
            Encoding::Explicit => Some(build_transition_graph(sys, a.source.explicit_cap)?),
            Encoding::Factored => None,
        };
        for k in 1..=top {
            let (tag, doc) = match &graph {
                Some(g) => ("phi1", encode_phi1_graph(g, k)?),
                None => ("phi2", encode_phi2(sys, k)?),
            };
            fs::write(dir.join(format!("{tag}_k{k}.smt2")), doc.text())?;
        }
        println!("problem={label}");
        println!("wrote {top} scripts to {}", dir.display());
        return Ok(());
    }
    println!("problem={label}");
    if a.bruteforce {
        let g = build_transition_graph(sys, a.source.explicit_cap)?;
        let t = Instant::now();
        let p = longest_simple_path(&g, a.rd_cap)?;
        println!("rd={} exact=true method=bruteforce time_ms={}", p.length, t.elapsed().as_millis());
        return Ok(());
    }
    let mut cfg = RdSearchConfig::new(a.encoding, a.solver.config()?);
    cfg.schedule = a.solver.schedule;
    cfg.explicit_cap = a.source.explicit_cap;
    cfg.skip_beyond_exp = a.skip_beyond_exp;
    cfg.extract_models = a.models;
    let r = rd_via_smt(sys, &cfg)?;
    for q in &r.queries {
        let note = if q.skipped { " (k > Exp)" } else { "" };
        println!("k={} {} {}ms{note}", q.k, q.verdict.status.as_str(), q.verdict.elapsed.as_millis());
    }
    println!(
        "rd={} exact={} encoding={} queries={}",
        r.rd,
        r.exact,
        r.encoding.as_str(),
        r.solver_calls()
    );
    if let Some(m) = r.queries.iter().rev().find_map(|q| q.model.as_ref()) {
        let path: Vec<String> = m.states.iter().map(|&x| bits(sys, x)).collect();
        println!("path: {}", path.join(" "));
    }
    Ok(())
}

struct Problem {
    label: String,
    doc: Result<SystemDocument>,
}

fn batch_problems(dir: &Path) -> Result<Vec<Problem>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| {
        p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "sys" | "txt"))
    });
    paths.sort();
    Ok(paths
        .iter()
        .map(|p| Problem {
            label: problem_label(p),
            doc: read_system_file(p),
        })
        .collect())
}

fn print_bound(label: &str, r: &BoundReport, quiet: bool) {
    println!(
        "problem={label} base={} total={} clusters={} degraded={}",
        r.base.kind.as_str(),
        r.total,
        r.clusters.len(),
        r.degraded()
    );
    if quiet {
        return;
    }
    for c in &r.clusters {
        print!("  [{}] value={} property={}", c.vars.join(" "), c.base.value, c.base.property.as_str());
        if c.base.rd_queries > 0 {
            print!(" rd_queries={}", c.base.rd_queries);
        }
        match &c.base.degraded {
            Some(why) => println!(" degraded: {why}"),
            None => println!(),
        }
    }
}

fn cmd_bound(a: BoundArgs) -> Result<()> {
    if a.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let base = BaseCase::with_limits(a.base, a.rd_state_cap, a.td_trigger)?;
    let mut cfg = ComposeConfig::new(a.solver.config()?);
    cfg.rd_method = a.rd_method;
    cfg.schedule = a.solver.schedule;
    cfg.explicit_cap = a.source.explicit_cap;
    cfg.rd_bruteforce_timeout = a.bruteforce_timeout_ms.map(Duration::from_millis);
    cfg.parallel = a.jobs > 1;

    let problems = match &a.batch {
        Some(dir) => batch_problems(dir)?,
        None => {
            let (label, doc) = a.source.load()?;
            vec![Problem { label, doc: Ok(doc) }]
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<(Result<BoundReport>, Duration)> = pool.install(|| {
        problems
            .par_iter()
            .map(|p| {
                let t = Instant::now();
                let r = match &p.doc {
                    Ok(doc) => compositional_bound(&doc.system, &base, &cfg),
                    Err(e) => Err(Error::Config(e.to_string())),
                };
                (r, t.elapsed())
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(problems.len());
    for (p, (r, elapsed)) in problems.iter().zip(results) {
        match (&p.doc, r) {
            (_, Ok(report)) => {
                print_bound(&p.label, &report, a.quiet);
                rows.push(BoundRow::from_report(&p.label, &report, elapsed));
            }
            (Err(e), _) => {
                eprintln!("problem={} error[{}]: {e}", p.label, e.kind());
                rows.push(BoundRow::failed(&p.label, a.base.as_str()));
            }
            (Ok(_), Err(e)) => {
                if a.batch.is_none() {
                    return Err(e);
                }
                eprintln!("problem={} error[{}]: {e}", p.label, e.kind());
                rows.push(BoundRow::failed(&p.label, a.base.as_str()));
            }
        }
    }
    if let Some(path) = &a.csv {
        write_bound_csv(create_file(path)?, &rows)?;
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<std::ops::Range<u64>> {
    let bad = || Error::Config(format!("expected a range like 0..100 or 1..=7, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let lo: u64 = a.trim().parse().map_err(|_| bad())?;
    let hi = match b.strip_prefix('=') {
        Some(b) => b.trim().parse::<u64>().map_err(|_| bad())?.checked_add(1).ok_or_else(bad)?,
        None => b.trim().parse().map_err(|_| bad())?,
    };
    Ok(lo..hi.max(lo))
}

fn cmd_conjecture(a: ConjectureArgs) -> Result<()> {
    if a.vars > 8 {
        return Err(Error::Config("--vars must be at most 8".into()));
    }
    let specs: Vec<GeneratorSpec> = match a.gen {
        ConjectureFamily::Random => parse_range(&a.seeds)?
            .map(|seed| {
                GeneratorSpec::Random(RandomSpec {
                    vars: a.vars,
                    actions: a.actions,
                    max_pre: a.max_pre,
                    max_eff: a.max_eff,
                    allow_empty_effects: false,
                    seed,
                })
            })
            .collect(),
        ConjectureFamily::Star => parse_range(&a.sizes)?.map(|n| GeneratorSpec::Star { n }).collect(),
        ConjectureFamily::Lotus => parse_range(&a.sizes)?.map(|n| GeneratorSpec::Lotus { n }).collect(),
    };
    let verdicts: Vec<(GeneratorSpec, Result<(SystemDocument, ConjectureVerdict)>)> = specs
        .into_par_iter()
        .map(|spec| {
            let r = generated_document(&spec, DEFAULT_EXPLICIT_CAP)
                .and_then(|doc| check_conjecture(&doc.system, OracleCaps::default()).map(|v| (doc, v)));
            (spec, r)
        })
        .collect();

    let (mut holds, mut vacuous, mut counter, mut skipped) = (0, 0, 0, 0);
    for (spec, r) in verdicts {
        match r {
            Ok((_, ConjectureVerdict::Holds { .. })) => holds += 1,
            Ok((_, ConjectureVerdict::Vacuous { .. })) => vacuous += 1,
            Ok((mut doc, ConjectureVerdict::Counterexample { td, rd, path })) => {
                counter += 1;
                let sys = &doc.system;
                let trace: Vec<String> = path.iter().map(|&x| bits(sys, x)).collect();
                println!("counterexample {}: td={td} rd={rd} path {}", spec.label(), trace.join(" "));
                let mut cx = Map::new();
                cx.insert("td".into(), json!(td));
                cx.insert("rd".into(), json!(rd));
                cx.insert("path".into(), json!(trace));
                doc.metadata.insert("counterexample".into(), Value::Object(cx));
                let text = serialize_document(&doc, Format::Json);
                match &a.out {
                    Some(dir) => {
                        fs::create_dir_all(dir)?;
                        fs::write(dir.join(format!("{}.json", spec.label())), text)?;
                    }
                    None => print!("{text}"),
                }
            }
            Err(e) => {
                skipped += 1;
                eprintln!("skipped {}: {e}", spec.label());
            }
        }
    }
    println!("holds={holds} vacuous={vacuous} counterexamples={counter} skipped={skipped}");
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let (_, doc) = a.source.load()?;
    let text = serialize_document(&doc, a.format);
    match &a.out {
        Some(path) => create_file(path)?.write_all(text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
