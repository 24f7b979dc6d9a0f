//! The `fullerene-magic` command line.
//!
//! Every run that gets past argument parsing writes `run-manifest.json` into
//! the directory of `--out` (the working directory without `--out`).
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage or parse error |
//! | 2 | validation failure |
//! | 3 | infeasible request |
//! | 4 | node budget exhausted, output is partial |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::constants::{check_pair, feasible_pairs, MagicPair};
use crate::error::Error;
use crate::graph::{builtin, parse_fullerene, FullereneGraph};
use crate::pca::{export_projection, pca, spectrum_json, SolutionMatrix};
use crate::search::{
    enumerate, enumerate_streaming, read_solutions, Configuration, CountRow, SearchOptions, SolutionSet,
    DEFAULT_NODE_BUDGET,
};
use crate::symmetry::{automorphisms, check_free_action, orbit_partition};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Name of the manifest written next to the outputs.
pub const MANIFEST_NAME: &str = "run-manifest.json";

#[derive(Parser)]
#[command(name = "fullerene-magic", version, about = "Magical configurations on fullerene graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Parse and validate a graph.
    Validate(Plain),
    /// List the magic pairs surviving the necessary conditions.
    Feasible(Plain),
    /// Count configurations for one pair or for every feasible pair.
    Count(CountArgs),
    /// Write every configuration of one pair, one per line.
    Enumerate(EnumerateArgs),
    /// Orbit decomposition of one class under the automorphism group.
    Orbits(ClassArgs),
    /// Automorphism group order and generators.
    Aut(Plain),
    /// Principal component analysis of one class.
    Pca(PcaArgs),
    /// Feasible pairs, counts and divisibility checks in one document.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Builtin {
    C20,
    C24,
    C26,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Serialize)]
#[group(required = true, multiple = false)]
struct GraphArgs {
    /// Embedded graph.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// JSON graph file.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Defaults to csv (one solution per line) for `enumerate`, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}

#[derive(Args, Serialize)]
struct SearchArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Search nodes allowed per pair before giving up with a partial count.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
}

#[derive(Args, Serialize)]
struct PairArgs {
    #[arg(long, allow_negative_numbers = true)]
    sp: i64,
    #[arg(long, allow_negative_numbers = true)]
    sh: i64,
}

#[derive(Args, Serialize)]
struct Plain {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Serialize)]
struct CountArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Restrict to one pair (needs --sh too).
    #[arg(long, requires = "sh", allow_negative_numbers = true)]
    sp: Option<i64>,
    #[arg(long, requires = "sp", allow_negative_numbers = true)]
    sh: Option<i64>,
}

#[derive(Args, Serialize)]
struct EnumerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    pair: PairArgs,
    /// Emit solutions in lexicographic order (collects them first).
    #[arg(long)]
    sorted: bool,
    /// Collect solutions in memory before writing.
    #[arg(long)]
    store_solutions: bool,
}

#[derive(Args, Serialize)]
struct ClassArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    pair: PairArgs,
    /// Enumerate the class inline and keep it in memory.
    #[arg(long)]
    store_solutions: bool,
    /// Read the class from a solution stream instead of enumerating.
    #[arg(long, value_name = "FILE", conflicts_with = "store_solutions")]
    solutions: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PcaArgs {
    #[command(flatten)]
    class: ClassArgs,
    /// Number of principal components to project onto.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    search: SearchArgs,
}

/// What `run-manifest.json` records about a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub graph_source: String,
    pub parameters: Value,
    pub wall_time_seconds: f64,
    /// Worker threads used by the search; absent when nothing was searched.
    pub workers: Option<usize>,
    pub outputs: Vec<PathBuf>,
    /// `true` iff some enumeration ran out of node budget.
    pub partial: bool,
    pub exit_code: i32,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InfeasiblePair { .. } | Error::NoHexagons => EXIT_INFEASIBLE,
            Error::Io(_) | Error::SolutionsNotStored | Error::DimensionOutOfRange { .. } => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type Outcome = std::result::Result<(), Failure>;

#[derive(Default)]
struct Run {
    outputs: Vec<PathBuf>,
    partial: bool,
    workers: Option<usize>,
}

impl Run {
    /// Writes `text` to `out`, or to stdout.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> io::Result<()> {
        match out {
            Some(path) => {
                create_parent(path)?;
                fs::write(path, text)?;
                self.outputs.push(path.to_path_buf());
            }
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn options(&mut self, s: &SearchArgs) -> SearchOptions {
        let workers = s.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
        self.workers = Some(workers);
        SearchOptions::default().workers(workers).node_budget(s.node_budget)
    }

    fn note(&mut self, s: &SolutionSet) {
        self.partial |= s.partial;
    }
}

fn create_parent(path: &Path) -> io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let mut state = Run::default();
    let result = dispatch(&cli.command, &mut state);
    let code = match &result {
        Ok(()) if state.partial => {
            eprintln!("warning: node budget exhausted, results are partial");
            EXIT_BUDGET
        }
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };

    let (graph, output) = locate(&cli.command);
    let manifest = RunManifest {
        command: command_name(&cli.command).to_string(),
        graph_source: match (graph.builtin, &graph.graph) {
            (Some(b), _) => format!("builtin:{}", builtin_name(b)),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => String::new(),
        },
        parameters: serde_json::to_value(&cli.command).unwrap_or(Value::Null),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        workers: state.workers,
        outputs: state.outputs,
        partial: state.partial,
        exit_code: code,
    };
    let dir =
        output.out.as_deref().and_then(Path::parent).filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join(MANIFEST_NAME), text)) {
        eprintln!("error: cannot write {}: {e}", MANIFEST_NAME);
        if code == EXIT_OK {
            return EXIT_USAGE;
        }
    }
    code
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate(_) => "validate",
        Command::Feasible(_) => "feasible",
        Command::Count(_) => "count",
        Command::Enumerate(_) => "enumerate",
        Command::Orbits(_) => "orbits",
        Command::Aut(_) => "aut",
        Command::Pca(_) => "pca",
        Command::Report(_) => "report",
    }
}

fn locate(c: &Command) -> (&GraphArgs, &OutputArgs) {
    match c {
        Command::Validate(a) | Command::Feasible(a) | Command::Aut(a) => (&a.graph, &a.output),
        Command::Count(a) => (&a.graph, &a.output),
        Command::Enumerate(a) => (&a.graph, &a.output),
        Command::Orbits(a) => (&a.graph, &a.output),
        Command::Pca(a) => (&a.class.graph, &a.class.output),
        Command::Report(a) => (&a.graph, &a.output),
    }
}

fn builtin_name(b: Builtin) -> &'static str {
    match b {
        Builtin::C20 => "C20",
        Builtin::C24 => "C24",
        Builtin::C26 => "C26",
    }
}

fn load(args: &GraphArgs) -> std::result::Result<FullereneGraph, Failure> {
    match (args.builtin, &args.graph) {
        (Some(b), _) => Ok(builtin(builtin_name(b))?),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(parse_fullerene(&text)?)
        }
        (None, None) => Err(Failure::usage("one of --builtin or --graph is required")),
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

fn dispatch(c: &Command, run: &mut Run) -> Outcome {
    match c {
        Command::Validate(a) => validate(a, run),
        Command::Feasible(a) => feasible(a, run),
        Command::Count(a) => count(a, run),
        Command::Enumerate(a) => enumerate_cmd(a, run),
        Command::Orbits(a) => orbits(a, run),
        Command::Aut(a) => aut(a, run),
        Command::Pca(a) => pca_cmd(a, run),
        Command::Report(a) => report(a, run),
    }
}

fn validate(a: &Plain, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let edges = g.edges().len();
    let text = match a.output.format() {
        Format::Json => json_text(&json!({
            "valid": true,
            "n": g.n(),
            "pentagons": g.pentagon_count(),
            "hexagons": g.hexagon_count(),
            "edges": edges,
        })),
        Format::Csv => format!(
            "valid,n,pentagons,hexagons,edges\ntrue,{},{},{},{edges}\n",
            g.n(),
            g.pentagon_count(),
            g.hexagon_count()
        ),
    };
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}

fn feasible(a: &Plain, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let report = feasible_pairs(&g);
    let text = match a.output.format() {
        Format::Json => json_text(&report),
        Format::Csv => {
            let mut s = String::from("sp,sh\n");
            for p in &report.pairs {
                let _ = writeln!(s, "{},{}", p.sp, p.sh);
            }
            s
        }
    };
    if let Some(reason) = &report.reason {
        eprintln!("no feasible pairs: {reason}");
    }
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}

#[derive(Serialize)]
struct CountTable<'a> {
    n: usize,
    relation: String,
    reason: Option<String>,
    rows: &'a [CountRow],
}

fn count_csv(rows: &[CountRow]) -> String {
    let mut s = String::from("sp,sh,count,partial,nodes\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.sp, r.sh, r.count, r.partial, r.nodes);
    }
    s
}

fn count_row(s: &SolutionSet) -> CountRow {
    CountRow { sp: s.pair.sp, sh: s.pair.sh, count: s.count, partial: s.partial, nodes: s.nodes }
}

fn count(a: &CountArgs, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let opts = run.options(&a.search);
    let report = feasible_pairs(&g);
    let (pairs, reason) = match (a.sp, a.sh) {
        (Some(sp), Some(sh)) => {
            let pair = MagicPair::new(sp, sh);
            check_pair(g.n(), pair)?;
            (vec![pair], None)
        }
        _ => (report.pairs.clone(), report.reason.clone()),
    };
    let mut rows = Vec::new();
    for pair in pairs {
        let s = enumerate(&g, pair, &opts)?;
        run.note(&s);
        rows.push(count_row(&s));
    }
    if let Some(reason) = &reason {
        eprintln!("empty table: {reason}");
    }
    let text = match a.output.format() {
        Format::Json => json_text(&CountTable { n: g.n(), relation: report.relation.display(), reason, rows: &rows }),
        Format::Csv => count_csv(&rows),
    };
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}

fn solutions_json(s: &SolutionSet, solutions: &[Configuration]) -> String {
    let labels: Vec<&[u8]> = solutions.iter().map(|c| c.labels()).collect();
    json_text(&json!({
        "n": s.n,
        "sp": s.pair.sp,
        "sh": s.pair.sh,
        "count": s.count,
        "partial": s.partial,
        "solutions": labels,
    }))
}

fn summary(s: &SolutionSet) -> String {
    json_text(&count_row(s))
}

fn enumerate_cmd(a: &EnumerateArgs, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let pair = MagicPair::new(a.pair.sp, a.pair.sh);
    check_pair(g.n(), pair)?;
    let opts = run.options(&a.search).sorted(a.sorted);
    let out = a.output.out.as_deref();
    let format = a.output.format.unwrap_or(Format::Csv);
    let collect = a.sorted || a.store_solutions || format == Format::Json;

    let s = if collect {
        let s = enumerate(&g, pair, &SearchOptions { mode: crate::search::Mode::Store, ..opts })?;
        let solutions = s.solutions()?;
        let text = match format {
            Format::Json => solutions_json(&s, solutions),
            Format::Csv => solutions.iter().map(|c| format!("{c}\n")).collect(),
        };
        run.emit(out, &text)?;
        s
    } else {
        let sink: Box<dyn Write + Send> = match out {
            Some(path) => {
                create_parent(path)?;
                Box::new(BufWriter::new(fs::File::create(path)?))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let sink = Mutex::new((sink, None::<io::Error>));
        let s = enumerate_streaming(&g, pair, &opts, &|c: &Configuration| {
            let mut guard = sink.lock().expect("sink lock");
            let (w, err) = &mut *guard;
            if err.is_none() {
                if let Err(e) = writeln!(w, "{c}") {
                    *err = Some(e);
                }
            }
        })?;
        let (mut w, err) = sink.into_inner().expect("sink lock");
        if let Some(e) = err {
            return Err(e.into());
        }
        w.flush()?;
        if let Some(path) = out {
            run.outputs.push(path.to_path_buf());
        }
        s
    };
    run.note(&s);
    // The summary goes wherever the solutions do not.
    if out.is_some() {
        print!("{}", summary(&s));
    } else {
        eprint!("{}", summary(&s));
    }
    Ok(())
}

/// The class named by `a`, read from a file or enumerated inline.
fn load_class(
    a: &ClassArgs,
    command: &str,
    g: &FullereneGraph,
    run: &mut Run,
) -> std::result::Result<SolutionSet, Failure> {
    let pair = MagicPair::new(a.pair.sp, a.pair.sh);
    check_pair(g.n(), pair)?;
    let opts = run.options(&a.search);
    let s = match (&a.solutions, a.store_solutions) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            read_solutions(g, pair, &text)?
        }
        (None, true) => enumerate(g, pair, &SearchOptions { mode: crate::search::Mode::Store, ..opts.sorted(true) })?,
        (None, false) => {
            return Err(Failure::usage(format!("{command} needs --store-solutions or --solutions FILE")));
        }
    };
    run.note(&s);
    Ok(s)
}

fn orbits(a: &ClassArgs, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let s = load_class(a, "orbits", &g, run)?;
    let group = automorphisms(&g);
    let report = orbit_partition(&s, &group)?;
    let free = check_free_action(&s, &group)?;
    let text = match a.output.format() {
        Format::Json => {
            let mut v = serde_json::to_value(&report).expect("plain data serializes");
            v["free_action"] = json!(free);
            v["partial"] = json!(s.partial);
            json_text(&v)
        }
        Format::Csv => format!(
            "sp,sh,solutions,orbit_count,orbit_size,group_order,free_action\n{},{},{},{},{},{},{}\n",
            report.pair.sp,
            report.pair.sh,
            report.solutions,
            report.orbit_count,
            report.orbit_size.map_or(String::new(), |k| k.to_string()),
            report.group_order,
            free
        ),
    };
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}

fn aut(a: &Plain, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let group = automorphisms(&g);
    let generators = group.generators();
    let text = match a.output.format() {
        Format::Json => json_text(&json!({ "n": g.n(), "order": group.order(), "generators": generators })),
        Format::Csv => {
            generators.iter().map(|p| p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n").collect()
        }
    };
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}

fn pca_cmd(a: &PcaArgs, run: &mut Run) -> Outcome {
    let c = &a.class;
    let g = load(&c.graph)?;
    let s = load_class(c, "pca", &g, run)?;
    let m = SolutionMatrix::from_solutions(&s)?;
    let p = pca(&m, a.k)?;
    let stem = c.output.out.clone().unwrap_or_else(|| PathBuf::from(format!("pca-{}-{}", p.pair.sp, p.pair.sh)));
    let (csv, json) = export_projection(&p, &stem)?;
    run.outputs.extend([csv, json]);
    println!("{}", spectrum_json(&p));
    Ok(())
}

#[derive(Serialize)]
struct ReportRow {
    sp: i64,
    sh: i64,
    count: u64,
    partial: bool,
    complement_sp: i64,
    complement_sh: i64,
    complement_count: Option<u64>,
    complement_equal: Option<bool>,
    divisible_by_12: bool,
    divisible_by_group: bool,
    orbits: u64,
}

fn report(a: &ReportArgs, run: &mut Run) -> Outcome {
    let g = load(&a.graph)?;
    let opts = run.options(&a.search);
    let feasibility = feasible_pairs(&g);
    let group = automorphisms(&g);
    let order = group.order() as u64;
    let mut counts = Vec::new();
    for &pair in &feasibility.pairs {
        let s = enumerate(&g, pair, &opts)?;
        run.note(&s);
        counts.push(s);
    }
    let rows: Vec<ReportRow> = counts
        .iter()
        .map(|s| {
            let comp = s.pair.complement(g.n());
            let other = counts.iter().find(|t| t.pair == comp).map(|t| t.count);
            ReportRow {
                sp: s.pair.sp,
                sh: s.pair.sh,
                count: s.count,
                partial: s.partial,
                complement_sp: comp.sp,
                complement_sh: comp.sh,
                complement_count: other,
                complement_equal: other.map(|c| c == s.count),
                divisible_by_12: s.count % 12 == 0,
                divisible_by_group: s.count % order == 0,
                orbits: s.count / order,
            }
        })
        .collect();
    let total: u64 = rows.iter().map(|r| r.count).sum();
    let text = match a.output.format() {
        Format::Json => json_text(&json!({
            "n": g.n(),
            "feasibility": feasibility,
            "group_order": order,
            "rows": rows,
            "total": total,
            "all_divisible_by_12": rows.iter().all(|r| r.divisible_by_12),
            "all_divisible_by_group": rows.iter().all(|r| r.divisible_by_group),
            "complements_equal": rows.iter().all(|r| r.complement_equal != Some(false)),
        })),
        Format::Csv => {
            let mut s = String::from(
                "sp,sh,count,partial,complement_sp,complement_sh,complement_count,divisible_by_12,divisible_by_group,orbits\n",
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.sp,
                    r.sh,
                    r.count,
                    r.partial,
                    r.complement_sp,
                    r.complement_sh,
                    r.complement_count.map_or(String::new(), |c| c.to_string()),
                    r.divisible_by_12,
                    r.divisible_by_group,
                    r.orbits
                );
            }
            s
        }
    };
    Ok(run.emit(a.output.out.as_deref(), &text)?)
}
