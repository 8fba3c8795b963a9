//! Command-line front end. [`dispatch`] parses arguments, runs one
//! subcommand and returns the process exit code:
//! 0 success, 2 usage or input-format error, 3 domain error, 4 cap exceeded.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{make_report, upper_bound_degree, MonteCarloOptions, ReportOptions};
use crate::error::{Error, Result};
use crate::experiments::{rows_to_csv, run, summarize, ExperimentSpec};
use crate::generators::{
    gen_complete, gen_cycle, gen_generalized_cycle, gen_gw_tree, gen_hypercube, gen_path,
    gen_random_regular, gen_rary_tree, GwConfig, RegularSampling,
};
use crate::graph::{Graph, SeedSet};
use crate::io::{parse_seed_list, read_edge_list, read_seeds, write_edge_list};
use crate::oracle::{
    exact_distribution_bruteforce, exact_mean_bruteforce, exact_process_distribution,
};
use crate::rng::stream_rng;
use crate::sim::{check_beta, estimate_mean, EpidemicParams, Method};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "epibound",
    version,
    about = "Bounds and estimates for SIR outbreak sizes on graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
    /// Lower and upper bounds (plus optional exact / Monte Carlo values).
    Bounds(BoundsArgs),
    /// Exact expected outbreak size or its distribution for a small graph.
    Exact(ExactArgs),
    /// Monte Carlo estimate of the expected outbreak size.
    Simulate(SimulateArgs),
    /// Run an experiment described by a JSON or key-value config file.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyName {
    Cycle,
    Path,
    Complete,
    Hypercube,
    RaryTree,
    GeneralizedCycle,
    RandomRegular,
    GwTree,
}

#[derive(Args, Debug)]
struct GenArgs {
    family: FamilyName,
    #[arg(long)]
    n: Option<usize>,
    /// Degree (random-regular) or tree parameter r (rary-tree).
    #[arg(long)]
    r: Option<usize>,
    /// Hypercube dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Tree height (rary-tree).
    #[arg(long)]
    height: Option<usize>,
    /// Chord count (generalized-cycle).
    #[arg(long)]
    chords: Option<usize>,
    /// Comma-separated offspring probabilities for counts 0, 1, ... (gw-tree).
    #[arg(long)]
    pmf: Option<String>,
    #[arg(long, default_value_t = GwConfig::DEFAULT_DEPTH_CAP)]
    depth_cap: usize,
    #[arg(long, default_value_t = GwConfig::DEFAULT_SIZE_CAP)]
    size_cap: usize,
    /// Use the approximate collision-erasing pairing for random-regular.
    #[arg(long)]
    erase_collisions: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GraphInput {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated seed vertex ids.
    #[arg(long, conflicts_with = "seeds_file")]
    seeds: Option<String>,
    /// File with one seed vertex id per line.
    #[arg(long)]
    seeds_file: Option<PathBuf>,
}

impl GraphInput {
    fn load(&self) -> Result<(Graph, SeedSet)> {
        let g = read_edge_list(BufReader::new(fs::File::open(&self.graph)?))?;
        let seeds = match (&self.seeds, &self.seeds_file) {
            (Some(list), _) => parse_seed_list(list, g.n())?,
            (None, Some(path)) => read_seeds(BufReader::new(fs::File::open(path)?), g.n())?,
            (None, None) => SeedSet::single(0, g.n())?,
        };
        Ok((g, seeds))
    }
}

// Only the syntax is checked here; range violations are domain errors and
// are reported by the command itself.
fn parse_beta(text: &str) -> std::result::Result<f64, String> {
    text.parse().map_err(|_| format!("not a number: {text:?}"))
}

fn parse_method(text: &str) -> std::result::Result<Method, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, value_parser = parse_beta, required_unless_present = "beta_grid")]
    beta: Option<f64>,
    /// Comma-separated beta values; emits one CSV row per value.
    #[arg(long, conflicts_with = "beta")]
    beta_grid: Option<String>,
    /// Include the brute-force exact mean (graphs with at most 24 edges).
    #[arg(long)]
    exact: bool,
    /// Include a Monte Carlo estimate with this many trials.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_method, default_value = "percolation")]
    method: Method,
    #[arg(long, default_value_t = 32)]
    radius_cap: usize,
    /// Only report the degree upper bound; fails when it is undefined.
    #[arg(long)]
    ub_only: bool,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExactArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, value_parser = parse_beta)]
    beta: f64,
    /// Emit the distribution of the outbreak size instead of its mean.
    #[arg(long)]
    pmf: bool,
    /// With --pmf, enumerate the time-stepped process instead of percolation.
    #[arg(long, requires = "pmf")]
    process: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, value_parser = parse_beta)]
    beta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, value_parser = parse_method, default_value = "percolation")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary destination; stdout when omitted and --out is given.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Overrides the config's `jobs`.
    #[arg(long)]
    jobs: Option<usize>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Io(_) => EXIT_USAGE,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::SelfLoop(_)
        | Error::VertexOutOfRange { .. }
        | Error::EmptySeedSet
        | Error::InvalidParameter(_)
        | Error::Domain(_) => EXIT_DOMAIN,
    }
}

fn provenance(master_seed: Option<u64>, params: Value) -> Value {
    json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "master_seed": master_seed,
        "params": params,
    })
}

fn with_provenance<T: Serialize>(body: &T, prov: Value) -> Value {
    let mut value = serde_json::to_value(body).expect("serializable output");
    match value.as_object_mut() {
        Some(map) => {
            map.insert("provenance".into(), prov);
            value
        }
        None => json!({ "result": value, "provenance": prov }),
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json");
    text.push('\n');
    text
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<()> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for this family")))
    };
    let mut rng = stream_rng(args.seed, 0);
    let mut header = format!(
        "# epibound {} gen {:?} seed={}\n",
        env!("CARGO_PKG_VERSION"),
        args.family,
        args.seed
    );
    let g = match args.family {
        FamilyName::Cycle => gen_cycle(need(args.n, "n")?)?,
        FamilyName::Path => gen_path(need(args.n, "n")?),
        FamilyName::Complete => gen_complete(need(args.n, "n")?),
        FamilyName::Hypercube => gen_hypercube(need(args.d, "d")?)?,
        FamilyName::RaryTree => gen_rary_tree(need(args.r, "r")?, need(args.height, "height")?)?,
        FamilyName::GeneralizedCycle => {
            gen_generalized_cycle(need(args.n, "n")?, need(args.chords, "chords")?, &mut rng)?
        }
        FamilyName::RandomRegular => {
            let sampling = if args.erase_collisions {
                RegularSampling::EraseCollisions
            } else {
                RegularSampling::Exact
            };
            gen_random_regular(need(args.n, "n")?, need(args.r, "r")?, &mut rng, sampling)?
        }
        FamilyName::GwTree => {
            let text = args
                .pmf
                .as_deref()
                .ok_or_else(|| Error::InvalidParameter("--pmf is required for gw-tree".into()))?;
            let pmf = text
                .split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("bad probability {p:?} in --pmf"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let cfg = GwConfig::new(pmf, args.depth_cap, args.size_cap)?;
            let tree = gen_gw_tree(&cfg, &mut rng);
            header.push_str(&format!("# root=0 truncated={}\n", tree.truncated));
            tree.graph
        }
    };
    emit(&args.out, stdout, &(header + &write_edge_list(&g)))
}

fn cmd_bounds(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<()> {
    let (g, seeds) = args.input.load()?;
    if let Some(beta) = args.beta {
        check_beta(beta)?;
    }
    let params = json!({
        "graph": path_str(&args.input.graph),
        "seeds": seeds,
        "beta": args.beta,
        "beta_grid": args.beta_grid,
        "exact": args.exact,
        "trials": args.trials,
        "method": args.method,
        "radius_cap": args.radius_cap,
    });
    let seed = args.trials.map(|_| args.seed);
    if args.ub_only {
        let beta = args
            .beta
            .ok_or_else(|| Error::InvalidParameter("--ub-only needs --beta".into()))?;
        let ub = upper_bound_degree(&g, seeds.len(), beta)?.ok_or_else(|| {
            Error::Domain(format!(
                "degree upper bound undefined: beta*max_degree = {} >= 1",
                beta * g.max_degree() as f64
            ))
        })?;
        let body = json!({ "ub_degree": ub, "beta": beta, "k": seeds.len(), "max_degree": g.max_degree() });
        return emit(
            &args.out,
            stdout,
            &json_text(&with_provenance(&body, provenance(None, params))),
        );
    }
    let options = ReportOptions {
        exact: args.exact,
        monte_carlo: args.trials.map(|trials| MonteCarloOptions {
            trials,
            master_seed: args.seed,
            method: args.method,
            jobs: args.jobs,
        }),
        radius_cap: args.radius_cap,
    };
    if let Some(grid) = &args.beta_grid {
        let betas = grid
            .split(',')
            .map(|b| {
                let beta = parse_beta(b.trim()).map_err(Error::InvalidParameter)?;
                check_beta(beta)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut text = String::from("beta,lb,ub_degree,exact,mc_mean,mc_se\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for beta in betas {
            let r = make_report(&g, &seeds, beta, &options)?;
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                beta,
                r.lb,
                opt(r.ub_degree),
                opt(r.exact),
                opt(r.estimate.as_ref().map(|e| e.mean)),
                opt(r.estimate.as_ref().map(|e| e.std_error)),
            ));
        }
        return emit(&args.out, stdout, &text);
    }
    let beta = args.beta.expect("clap requires beta or beta_grid");
    let report = make_report(&g, &seeds, beta, &options)?;
    emit(
        &args.out,
        stdout,
        &json_text(&with_provenance(&report, provenance(seed, params))),
    )
}

fn cmd_exact(args: &ExactArgs, stdout: &mut dyn Write) -> Result<()> {
    let (g, seeds) = args.input.load()?;
    check_beta(args.beta)?;
    let params = json!({
        "graph": path_str(&args.input.graph),
        "seeds": seeds,
        "beta": args.beta,
        "pmf": args.pmf,
        "process": args.process,
    });
    let body = if args.pmf {
        let pmf = if args.process {
            exact_process_distribution(&g, &seeds, args.beta)?
        } else {
            exact_distribution_bruteforce(&g, &seeds, args.beta)?
        };
        json!({ "pmf": pmf })
    } else {
        json!({ "mean": exact_mean_bruteforce(&g, &seeds, args.beta)? })
    };
    emit(
        &args.out,
        stdout,
        &json_text(&with_provenance(&body, provenance(None, params))),
    )
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let (g, seeds) = args.input.load()?;
    let params = EpidemicParams::new(args.beta, args.seed, args.trials)?;
    let estimate = estimate_mean(&g, &seeds, &params, args.method, args.jobs);
    let prov = provenance(
        Some(args.seed),
        json!({
            "graph": path_str(&args.input.graph),
            "seeds": seeds,
            "beta": args.beta,
            "trials": args.trials,
            "method": args.method,
        }),
    );
    emit(
        &args.out,
        stdout,
        &json_text(&with_provenance(&estimate, prov)),
    )
}

fn cmd_experiment(args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(jobs) = args.jobs {
        spec.jobs = jobs;
    }
    let rows = run(&spec)?;
    emit(&args.out, stdout, &rows_to_csv(&rows)?)?;
    let summary = with_provenance(
        &summarize(&spec, &rows),
        provenance(
            Some(spec.seed),
            serde_json::to_value(&spec).expect("spec serializes"),
        ),
    );
    match (&args.summary, &args.out) {
        (Some(path), _) => fs::write(path, json_text(&summary))?,
        (None, Some(_)) => stdout.write_all(json_text(&summary).as_bytes())?,
        (None, None) => {}
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name), writing normal
/// output to `stdout` and diagnostics to `stderr`.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Bounds(a) => cmd_bounds(a, stdout),
        Command::Exact(a) => cmd_exact(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Experiment(a) => cmd_experiment(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
