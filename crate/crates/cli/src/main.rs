//! `interdict` command-line tool.
//!
//! Exit codes: 0 success, 1 solver or verification failure, 2 bad input.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use interdict_core::bsi::{bsi_solve, APolicy, BsiConfig, BsiReport};
use interdict_core::cnf::CnfFormula;
use interdict_core::dimacs::{cnf_to_string, graph_to_string, parse_cnf, parse_graph};
use interdict_core::gen::{
    add_noise_clauses, add_noise_edges, gen_grid, gen_planar_cnf, gen_random_planar, NoiseMode, NoiseSpec, Sidecar,
};
use interdict_core::interdict::{bag_cap, round_or_separate, InterdictConfig, InterdictionResult, Preset, SCHEMA_VERSION};
use interdict_core::oracles::{exact_interdiction, exact_maxsat, exact_mis, exact_treewidth, linkedness, OracleBudget};
use interdict_core::pipelines::{check_independent, noisy_maxsat, noisy_mis, MaxSatConfig, MaxSatReport, MisConfig, MisReport};
use interdict_core::treedec::TreeDecomposition;
use interdict_core::{EdgeId, Error, Graph};

#[derive(Parser, Debug)]
#[command(name = "interdict", version, about = "Treewidth and bounded-size interdiction solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance (DIMACS) plus a ground-truth sidecar `<out>.json`.
    Gen(GenArgs),
    /// Edge interdiction to bounded treewidth by round-or-separate.
    Interdict(InterdictArgs),
    /// Bounded-size vertex interdiction.
    Bsi(BsiArgs),
    /// Independent set on a noisy planar graph.
    Mis(MisArgs),
    /// MAX-k-SAT on a noisy planar formula.
    Maxsat(MaxsatArgs),
    /// Exact solvers for small instances.
    Oracle(OracleArgs),
    /// Recheck a report or a decomposition against an instance.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add a `timing` field (wall-clock seconds) to the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    /// Noise rate: adds ⌊δ·base⌋ edges or clauses.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseKind::Uniform)]
    noise: NoiseKind,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseKind {
    Uniform,
    Expander,
    Clustered,
}

impl NoiseArgs {
    fn spec(&self) -> NoiseSpec {
        let mode = match self.noise {
            NoiseKind::Uniform => NoiseMode::RandomUniform,
            NoiseKind::Expander => NoiseMode::EmbeddedExpander,
            NoiseKind::Clustered => NoiseMode::Clustered,
        };
        NoiseSpec::new(self.delta, self.seed, mode)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    what: GenKind,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// k × k grid.
    Grid {
        #[arg(long)]
        k: usize,
    },
    /// Random connected planar graph on Delaunay points.
    Planar {
        #[arg(long)]
        n: usize,
    },
    /// Planar CNF with clauses of arity at most k.
    Cnf {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Paper,
    Fast,
}

#[derive(Args, Debug)]
struct InterdictKnobs {
    #[arg(long)]
    w: usize,
    #[arg(long, value_enum, default_value_t = PresetArg::Paper)]
    preset: PresetArg,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Region-growing constant; also rescales the bag cap unless `--bag-cap` is given.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    bag_cap: Option<usize>,
    #[arg(long)]
    leaf_size: Option<usize>,
}

impl InterdictKnobs {
    fn config(&self) -> anyhow::Result<InterdictConfig> {
        let preset = match self.preset {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Fast => Preset::Fast,
        };
        let mut cfg = InterdictConfig::preset(preset, self.w);
        if let Some(k) = self.kappa {
            cfg.region.kappa = k;
            cfg.bag_cap = bag_cap(self.w, k);
            if matches!(preset, Preset::Paper) {
                cfg.leaf_size = cfg.bag_cap;
            }
        }
        if let Some(c) = self.bag_cap {
            cfg.bag_cap = c;
        }
        if let Some(l) = self.leaf_size {
            cfg.leaf_size = l;
        }
        if let Some(r) = self.max_rounds {
            cfg.max_cut_rounds = r;
        }
        cfg.validate().map_err(input_error)?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct InterdictArgs {
    /// DIMACS graph.
    input: PathBuf,
    #[command(flatten)]
    knobs: InterdictKnobs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct BsiKnobs {
    #[arg(long, default_value_t = 5)]
    s: usize,
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Vertex budget: a number, or `grid` for {0, 1, 2, 4, …, n}.
    #[arg(long, default_value = "grid")]
    a: String,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    max_pieces: usize,
}

impl BsiKnobs {
    fn config(&self) -> anyhow::Result<BsiConfig> {
        let a_policy = if self.a == "grid" {
            APolicy::Grid
        } else {
            APolicy::Fixed(self.a.parse().map_err(|_| input_error(anyhow!("--a must be `grid` or a number")))?)
        };
        if !(self.beta > 0.0 && self.beta <= 1.0) || self.s == 0 || self.repeats == 0 {
            return Err(input_error(anyhow!("need s >= 1, repeats >= 1 and beta in (0, 1]")));
        }
        Ok(BsiConfig {
            a_policy,
            repeats: self.repeats,
            max_pieces: self.max_pieces,
            ..BsiConfig::new(self.s, self.beta, self.seed)
        })
    }
}

#[derive(Args, Debug)]
struct BsiArgs {
    input: PathBuf,
    #[command(flatten)]
    knobs: BsiKnobs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct MisArgs {
    input: PathBuf,
    #[command(flatten)]
    knobs: BsiKnobs,
    /// Noise rate of the instance, recorded in the report when known.
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct MaxsatArgs {
    /// DIMACS CNF.
    input: PathBuf,
    #[command(flatten)]
    knobs: InterdictKnobs,
    #[arg(long, default_value_t = interdict_core::pipelines::DP_WIDTH_CAP)]
    width_cap: usize,
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Treewidth,
    Linkedness,
    Mis,
    Maxsat,
    Interdiction,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(value_enum)]
    kind: OracleKind,
    input: PathBuf,
    /// Width target for `interdiction`.
    #[arg(long, default_value_t = 1)]
    w: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Instance the report refers to (DIMACS graph or CNF).
    instance: PathBuf,
    /// A report written by this tool, or a bare tree decomposition.
    report: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    kind: String,
    input: String,
    report: T,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    timing: Option<Timing>,
}

#[derive(Serialize, Deserialize)]
struct Timing {
    seconds: f64,
}

#[derive(Serialize, Deserialize)]
struct TreewidthAnswer {
    width: usize,
    decomposition: TreeDecomposition,
}

#[derive(Serialize, Deserialize)]
struct MisAnswer {
    size: usize,
    set: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct MaxsatAnswer {
    satisfied: usize,
    assignment: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct InterdictionAnswer {
    w: usize,
    deleted_edges: Vec<(usize, usize)>,
    decomposition: TreeDecomposition,
}

/// Marks an error as caused by bad input (exit code 2).
#[derive(Debug)]
struct BadInput(anyhow::Error);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for BadInput {}

fn input_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(BadInput(e.into()))
}

/// Core errors about malformed instances or parameters count as bad input.
fn core_error(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidGraph(_)
        | Error::InvalidFormula(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::InvalidParameter(_) => input_error(e),
        other => anyhow::Error::new(other),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input_error)
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    parse_graph(&read_text(path)?)
        .with_context(|| format!("parsing graph {}", path.display()))
        .map_err(input_error)
}

fn read_cnf(path: &Path) -> anyhow::Result<CnfFormula> {
    parse_cnf(&read_text(path)?)
        .with_context(|| format!("parsing formula {}", path.display()))
        .map_err(input_error)
}

fn emit<T: Serialize>(kind: &str, input: &Path, report: T, output: &Output, start: Instant) -> anyhow::Result<()> {
    let seconds = start.elapsed().as_secs_f64();
    log::info!("{kind} finished in {seconds:.3}s");
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        input: input.display().to_string(),
        report,
        timing: output.timing.then_some(Timing { seconds }),
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Gen(args) => generate(args),
        Command::Interdict(args) => {
            let g = read_graph(&args.input)?;
            let cfg = args.knobs.config()?;
            let res = round_or_separate(&g, &cfg).map_err(core_error)?;
            emit("interdict", &args.input, res, &args.output, start)
        }
        Command::Bsi(args) => {
            let g = read_graph(&args.input)?;
            let res = bsi_solve(&g, &args.knobs.config()?).map_err(core_error)?;
            emit("bsi", &args.input, res, &args.output, start)
        }
        Command::Mis(args) => {
            let g = read_graph(&args.input)?;
            let cfg = MisConfig {
                bsi: args.knobs.config()?,
                delta: args.delta,
            };
            let res = noisy_mis(&g, &cfg).map_err(core_error)?;
            emit("mis", &args.input, res, &args.output, start)
        }
        Command::Maxsat(args) => {
            let phi = read_cnf(&args.input)?;
            let cfg = MaxSatConfig {
                interdict: args.knobs.config()?,
                width_cap: args.width_cap,
                delta: args.delta,
            };
            let res = noisy_maxsat(&phi, &cfg).map_err(core_error)?;
            emit("maxsat", &args.input, res, &args.output, start)
        }
        Command::Oracle(args) => oracle(args, start),
        Command::Verify(args) => verify(&args),
    }
}

fn generate(args: GenArgs) -> anyhow::Result<()> {
    let spec = args.noise.spec();
    let mut params = BTreeMap::new();
    let (text, generator, noisy_edges, noisy_clauses) = match args.what {
        GenKind::Grid { k } => {
            params.insert("k".to_string(), k.to_string());
            let (g, noisy) = add_noise_edges(&gen_grid(k), &spec).map_err(core_error)?;
            (graph_to_string(&g), "grid", noisy, Vec::new())
        }
        GenKind::Planar { n } => {
            params.insert("n".to_string(), n.to_string());
            let base = gen_random_planar(n, spec.seed).map_err(core_error)?;
            let (g, noisy) = add_noise_edges(&base, &spec).map_err(core_error)?;
            (graph_to_string(&g), "planar", noisy, Vec::new())
        }
        GenKind::Cnf { n, m, k } => {
            params.insert("n".to_string(), n.to_string());
            params.insert("m".to_string(), m.to_string());
            params.insert("k".to_string(), k.to_string());
            let base = gen_planar_cnf(n, m, k, spec.seed).map_err(core_error)?;
            let (phi, noisy) = add_noise_clauses(&base, k, &spec).map_err(core_error)?;
            (cnf_to_string(&phi), "planar-cnf", Vec::new(), noisy)
        }
    };
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        generator: generator.to_string(),
        seed: spec.seed,
        params,
        noise: Some(spec),
        noisy_edges,
        noisy_clauses,
    };
    fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    let mut side = args.out.clone().into_os_string();
    side.push(".json");
    fs::write(&side, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

fn oracle(args: OracleArgs, start: Instant) -> anyhow::Result<()> {
    let budget = OracleBudget::default();
    let out = &args.output;
    match args.kind {
        OracleKind::Treewidth => {
            let g = read_graph(&args.input)?;
            let tw = exact_treewidth(&g, &budget).map_err(core_error)?;
            let answer = TreewidthAnswer {
                width: tw.width,
                decomposition: tw.decomposition,
            };
            emit("oracle-treewidth", &args.input, answer, out, start)
        }
        OracleKind::Linkedness => {
            let g = read_graph(&args.input)?;
            let link = linkedness(&g, &budget).map_err(core_error)?;
            emit("oracle-linkedness", &args.input, link, out, start)
        }
        OracleKind::Mis => {
            let g = read_graph(&args.input)?;
            let set = exact_mis(&g, &budget).map_err(core_error)?;
            emit("oracle-mis", &args.input, MisAnswer { size: set.len(), set }, out, start)
        }
        OracleKind::Maxsat => {
            let phi = read_cnf(&args.input)?;
            let (satisfied, assignment) = exact_maxsat(&phi).map_err(core_error)?;
            emit("oracle-maxsat", &args.input, MaxsatAnswer { satisfied, assignment }, out, start)
        }
        OracleKind::Interdiction => {
            let g = read_graph(&args.input)?;
            let opt = exact_interdiction(&g, args.w, &budget).map_err(core_error)?;
            let answer = InterdictionAnswer {
                w: args.w,
                deleted_edges: opt
                    .deleted
                    .iter()
                    .map(|&e| {
                        let edge = g.edge(e);
                        (edge.u, edge.v)
                    })
                    .collect(),
                decomposition: opt.decomposition,
            };
            emit("oracle-interdiction", &args.input, answer, out, start)
        }
    }
}

fn deleted_ids(g: &Graph, pairs: &[(usize, usize)]) -> anyhow::Result<BTreeSet<EdgeId>> {
    pairs
        .iter()
        .map(|&(u, v)| {
            if u.max(v) >= g.vertex_count() {
                return Err(anyhow!("deleted edge ({u},{v}) is not in the instance"));
            }
            g.edge_id(u, v).ok_or_else(|| anyhow!("deleted edge ({u},{v}) is not in the instance"))
        })
        .collect()
}

fn check_decomposition(g: &Graph, t: &TreeDecomposition) -> anyhow::Result<()> {
    t.validate(g).map_err(|v| anyhow!("invalid decomposition: {v}"))
}

fn verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let text = read_text(&args.report)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.report.display()))
        .map_err(input_error)?;
    let Some(kind) = value.get("kind").and_then(|k| k.as_str()).map(str::to_string) else {
        let t: TreeDecomposition = serde_json::from_value(value).map_err(input_error)?;
        let g = read_graph(&args.instance)?;
        check_decomposition(&g, &t)?;
        println!("ok: decomposition of width {} is valid", t.width());
        return Ok(());
    };
    let report = value.get("report").cloned().unwrap_or_default();
    fn parse<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> anyhow::Result<T> {
        serde_json::from_value(v).map_err(input_error)
    }
    let summary = match kind.as_str() {
        "interdict" => {
            let g = read_graph(&args.instance)?;
            let r: InterdictionResult = parse(report)?;
            let removed = deleted_ids(&g, &r.deleted_edges)?;
            check_decomposition(&g.without_edges(&removed), &r.decomposition)?;
            let width = r.decomposition.width();
            if width != r.width || width + 1 > r.bag_cap {
                return Err(anyhow!("width {width} disagrees with report ({}) or bag cap {}", r.width, r.bag_cap));
            }
            format!("{} deleted edges, decomposition of width {width} valid for G - F", removed.len())
        }
        "bsi" => {
            let g = read_graph(&args.instance)?;
            let r: BsiReport = parse(report)?;
            let removed: BTreeSet<usize> = r.separator.iter().copied().collect();
            if let Some(&v) = removed.iter().find(|&&v| v >= g.vertex_count()) {
                return Err(anyhow!("separator vertex {v} is not in the instance"));
            }
            let keep: Vec<usize> = (0..g.vertex_count()).filter(|v| !removed.contains(v)).collect();
            let comps = interdict_core::graph::components_of(
                &keep,
                g.edges()
                    .iter()
                    .filter(|e| !removed.contains(&e.u) && !removed.contains(&e.v))
                    .map(|e| (e.u, e.v)),
            );
            if let Some(c) = comps.iter().find(|c| c.len() > r.config.s) {
                return Err(anyhow!("component {c:?} has more than s = {} vertices", r.config.s));
            }
            format!("separator of {} vertices leaves components of size <= {}", removed.len(), r.config.s)
        }
        "mis" | "oracle-mis" => {
            let g = read_graph(&args.instance)?;
            let (set, objective) = if kind == "mis" {
                let r: MisReport = parse(report)?;
                (r.independent_set, r.objective)
            } else {
                let r: MisAnswer = parse(report)?;
                (r.set, r.size)
            };
            check_independent(&g, &set)?;
            if set.iter().collect::<BTreeSet<_>>().len() != objective {
                return Err(anyhow!("objective {objective} but the set has {} distinct vertices", set.len()));
            }
            format!("independent set of size {objective}")
        }
        "maxsat" | "oracle-maxsat" => {
            let phi = read_cnf(&args.instance)?;
            let (assignment, objective) = if kind == "maxsat" {
                let r: MaxSatReport = parse(report)?;
                let kept = phi.retain_clauses(|i| r.deleted_clauses.binary_search(&i).is_err());
                if r.assignment.len() == phi.num_vars() && kept.satisfied_count(&r.assignment) != r.kept_optimum {
                    return Err(anyhow!("kept clauses satisfied differ from kept_optimum {}", r.kept_optimum));
                }
                (r.assignment, r.objective)
            } else {
                let r: MaxsatAnswer = parse(report)?;
                (r.assignment, r.satisfied)
            };
            if assignment.len() != phi.num_vars() {
                return Err(anyhow!("assignment has {} values for {} variables", assignment.len(), phi.num_vars()));
            }
            let recount = phi.satisfied_count(&assignment);
            if recount != objective {
                return Err(anyhow!("assignment satisfies {recount} clauses, report claims {objective}"));
            }
            format!("assignment satisfies {recount} of {} clauses", phi.num_clauses())
        }
        "oracle-treewidth" => {
            let g = read_graph(&args.instance)?;
            let r: TreewidthAnswer = parse(report)?;
            check_decomposition(&g, &r.decomposition)?;
            if r.decomposition.width() != r.width {
                return Err(anyhow!("decomposition width {} but report says {}", r.decomposition.width(), r.width));
            }
            format!("decomposition of width {} is valid", r.width)
        }
        "oracle-interdiction" => {
            let g = read_graph(&args.instance)?;
            let r: InterdictionAnswer = parse(report)?;
            let removed = deleted_ids(&g, &r.deleted_edges)?;
            check_decomposition(&g.without_edges(&removed), &r.decomposition)?;
            if r.decomposition.width() + 1 > r.w {
                return Err(anyhow!("width {} is not below w = {}", r.decomposition.width(), r.w));
            }
            format!("{} deleted edges leave width {}", removed.len(), r.decomposition.width())
        }
        other => return Err(input_error(anyhow!("cannot verify reports of kind `{other}`"))),
    };
    println!("ok: {summary}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INTERDICT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<BadInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
