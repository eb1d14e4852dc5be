//! The `ionfab` command-line front end.
//!
//! Data goes to stdout or `--out`; diagnostics and the run manifest go to
//! stderr. Exit status is 0 on success, 1 on a domain error and 2 on a usage
//! error.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::arch::{load_architecture, parse_architecture, ArchitectureSpec, ValidationReport};
use crate::error::Error;
use crate::graph::{build_interaction_graph, graph_distance_profile, Tier};
use crate::ising::{load_ising, power_law_couplings, random_instance};
use crate::netsim::{events_csv, load_demand, load_schedule, run_ensemble, run_sim, PairRequest, SimOptions};
use crate::qec::{
    embed_on_grid, embed_on_modular, hypergraph_product_graph, steane_concat_graph, surface_code_graph, BinaryMatrix,
    EmbeddingReport, Partition, Placement, QecGraph,
};
use crate::rates::{rate_report, rate_reports};
use crate::sched::{assign_qubits, load_circuit, schedule, MapStrategy, PairSupply, QubitMap, ScheduleOptions};
use crate::solver::{adiabatic_evolve, anneal_classical, brute_force_ground_state_capped, AnnealSchedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ionfab", version, about = "Modular trapped-ion architecture toolkit")]
pub struct Cli {
    /// Seed for stochastic commands (required by simulate, ising anneal,
    /// schedule --pairs buffered and random QEC placements)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format; not every command supports every format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the data output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Print a short human-readable summary instead of machine output on stdout
    #[arg(long, global = true)]
    summary: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an architecture file against every invariant
    Validate {
        /// Architecture file (ionfab-arch/1)
        file: PathBuf,
    },
    /// Gate and link rates per ELU
    Rates {
        /// Architecture file (ionfab-arch/1)
        arch: PathBuf,
        /// Report a single ELU
        #[arg(long)]
        elu: Option<String>,
    },
    /// Export the interaction graph of one tier (json or dot)
    Graph {
        /// Architecture file (ionfab-arch/1)
        arch: PathBuf,
        /// Edge tier to export
        #[arg(long, value_enum, default_value = "collective")]
        tier: TierArg,
    },
    /// Generate Ising instances, or solve them with a subcommand
    Ising(IsingArgs),
    /// QEC code graphs and their embedding cost
    #[command(subcommand)]
    Qec(QecCommand),
    /// Run the photonic network simulator
    Simulate {
        /// Architecture file (ionfab-arch/1)
        arch: PathBuf,
        /// Switch schedule (ionfab-switch/1)
        #[arg(long)]
        schedule: PathBuf,
        /// Pair requests (ionfab-demand/1)
        #[arg(long)]
        demand: Option<PathBuf>,
        /// Simulated seconds
        #[arg(long)]
        horizon: f64,
        /// Write the event log as CSV
        #[arg(long)]
        log: Option<PathBuf>,
        /// Include every attempt in the event log
        #[arg(long)]
        log_attempts: bool,
        /// Run N seeds starting at --seed and report the aggregate
        #[arg(long)]
        ensemble: Option<u64>,
        /// Disable background-gas collisions
        #[arg(long)]
        no_collisions: bool,
    },
    /// Map and schedule a circuit
    Schedule {
        /// Architecture file (ionfab-arch/1)
        arch: PathBuf,
        /// Circuit in .iqc format
        circuit: PathBuf,
        /// Qubit placement strategy
        #[arg(long, value_enum, default_value = "greedy")]
        map: MapArg,
        /// Qubit map JSON for --map file
        #[arg(long)]
        map_file: Option<PathBuf>,
        /// Entangled-pair supply for remote gates
        #[arg(long, value_enum, default_value = "ideal")]
        pairs: PairsArg,
        /// Write the timeline as CSV
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Route distant two-qubit gates with swaps instead of slow gates
        #[arg(long)]
        strict: bool,
        /// Do not charge shuttling before measurements
        #[arg(long)]
        no_isolation: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TierArg {
    Fast,
    Collective,
    FastPhotonic,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Fast => Tier::Fast,
            TierArg::Collective => Tier::Collective,
            TierArg::FastPhotonic => Tier::FastPhotonic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapArg {
    Greedy,
    Roundrobin,
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PairsArg {
    Ideal,
    Buffered,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
struct IsingArgs {
    #[command(subcommand)]
    command: Option<IsingCommand>,
    /// Number of spins
    #[arg(long)]
    n: Option<usize>,
    /// Power-law exponent of J_ij = j0 / |i−j|^alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Coupling scale; negative is ferromagnetic
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    j0: f64,
    /// Uniform random couplings and fields in [−1, 1] instead (needs --seed)
    #[arg(long, conflicts_with = "alpha")]
    random: bool,
}

#[derive(Subcommand, Debug)]
enum IsingCommand {
    /// Exact ground states by enumeration
    Solve {
        /// Ising instance (ionfab-ising/1)
        instance: PathBuf,
        /// Maximum number of ground configurations listed
        #[arg(long, default_value_t = 1024)]
        cap: usize,
    },
    /// Transverse-field adiabatic sweep on a dense statevector
    Adiabatic {
        /// Ising instance (ionfab-ising/1)
        instance: PathBuf,
        /// Total sweep time in units of 1/|j0|
        #[arg(long)]
        time: f64,
        /// Trotter steps (at least 10)
        #[arg(long)]
        steps: usize,
        /// Write the energy trace as CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Classical Metropolis annealing
    Anneal {
        /// Ising instance (ionfab-ising/1)
        instance: PathBuf,
        /// Sweeps of n single-spin proposals
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        /// Starting temperature of the geometric ladder
        #[arg(long, default_value_t = 5.0)]
        t_initial: f64,
        /// Final temperature
        #[arg(long, default_value_t = 0.01)]
        t_final: f64,
    },
}

#[derive(Subcommand, Debug)]
enum QecCommand {
    /// Rotated surface code of odd distance d
    Surface {
        /// Code distance (odd, at least 3)
        #[arg(long)]
        d: usize,
    },
    /// Concatenated Steane code
    Steane {
        /// Concatenation levels
        #[arg(long)]
        levels: u32,
    },
    /// Hypergraph product of two check matrices given as 0/1 CSV
    Hgp {
        /// First check matrix
        #[arg(long)]
        h1: PathBuf,
        /// Second check matrix
        #[arg(long)]
        h2: PathBuf,
    },
    /// Embed a code on a 2D grid or on the ELUs of an architecture
    Embed {
        /// Code graph (ionfab-qec/1)
        #[arg(long)]
        code: PathBuf,
        /// `grid` or an architecture file
        #[arg(long)]
        host: String,
        /// Grid placement
        #[arg(long, value_enum, default_value = "row-major")]
        placement: PlacementArg,
        /// ELU partitioning on a modular host
        #[arg(long, value_enum, default_value = "greedy")]
        partition: PartitionArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PlacementArg {
    RowMajor,
    Native,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartitionArg {
    Greedy,
    RoundRobin,
}

/// Provenance record written to stderr after every run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(Error),
    /// Already reported on stdout; exit 1 without repeating it.
    Reported,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Recursively sorts object keys so output does not depend on map ordering.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("output serializes");
    serde_json::to_string_pretty(&canonical(v)).expect("JSON value serializes") + "\n"
}

struct Ctx {
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    summary: bool,
    manifest: RunManifest,
}

impl Ctx {
    fn input(&mut self, path: &Path) -> CliResult {
        let sha256 = sha256_file(path)?;
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    fn require_seed(&self, what: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("{what} is stochastic: pass --seed N")))
    }

    fn format(&self, allowed: &[Format], command: &str) -> CliResult<Format> {
        let f = self.format.unwrap_or(allowed[0]);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!(
                "{command} does not support --format {}",
                f.to_possible_value().expect("no skipped variants").get_name()
            )))
        }
    }

    fn write_file(&mut self, path: &Path, text: &str) -> CliResult {
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Sends data to `--out` or stdout; with `--summary`, stdout gets the
    /// summary instead.
    fn emit(&mut self, data: &str, summary: impl FnOnce() -> String) -> CliResult {
        if let Some(path) = self.out.clone() {
            self.write_file(&path, data)?;
            if self.summary {
                print!("{}", summary());
            }
            return Ok(());
        }
        let mut stdout = std::io::stdout().lock();
        let text = if self.summary { summary() } else { data.to_string() };
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?;
        Ok(())
    }
}

fn csv_of<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn subcommand_name(c: &Command) -> String {
    match c {
        Command::Validate { .. } => "validate".into(),
        Command::Rates { .. } => "rates".into(),
        Command::Graph { .. } => "graph".into(),
        Command::Ising(a) => match &a.command {
            None => "ising".into(),
            Some(IsingCommand::Solve { .. }) => "ising solve".into(),
            Some(IsingCommand::Adiabatic { .. }) => "ising adiabatic".into(),
            Some(IsingCommand::Anneal { .. }) => "ising anneal".into(),
        },
        Command::Qec(q) => match q {
            QecCommand::Surface { .. } => "qec surface".into(),
            QecCommand::Steane { .. } => "qec steane".into(),
            QecCommand::Hgp { .. } => "qec hgp".into(),
            QecCommand::Embed { .. } => "qec embed".into(),
        },
        Command::Simulate { .. } => "simulate".into(),
        Command::Schedule { .. } => "schedule".into(),
    }
}

fn configure_threads() -> CliResult {
    let Ok(v) = std::env::var("IONFAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("IONFAB_THREADS must be a positive integer, got `{v}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let started = Instant::now();
    let mut ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        out: cli.out,
        summary: cli.summary,
        manifest: RunManifest {
            tool: "ionfab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand_name(&cli.command),
            inputs: Vec::new(),
            seed: cli.seed,
            wall_time_s: 0.0,
            outputs: Vec::new(),
        },
    };
    let outcome = configure_threads().and_then(|()| dispatch(cli.command, &mut ctx));
    ctx.manifest.wall_time_s = started.elapsed().as_secs_f64();
    let code = match outcome {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
        Err(CliError::Reported) => EXIT_DOMAIN,
    };
    eprintln!(
        "{}",
        serde_json::to_string(&canonical(
            serde_json::to_value(&ctx.manifest).expect("manifest serializes")
        ))
        .expect("manifest serializes")
    );
    code
}

fn dispatch(command: Command, ctx: &mut Ctx) -> CliResult {
    match command {
        Command::Validate { file } => validate(ctx, &file),
        Command::Rates { arch, elu } => rates(ctx, &arch, elu.as_deref()),
        Command::Graph { arch, tier } => graph(ctx, &arch, tier.into()),
        Command::Ising(args) => ising(ctx, args),
        Command::Qec(q) => qec(ctx, q),
        Command::Simulate {
            arch,
            schedule,
            demand,
            horizon,
            log,
            log_attempts,
            ensemble,
            no_collisions,
        } => {
            let opts = SimOptions {
                log_events: log.is_some(),
                log_attempts,
                collisions: !no_collisions,
                ..SimOptions::default()
            };
            simulate(
                ctx,
                &arch,
                &schedule,
                demand.as_deref(),
                horizon,
                log.as_deref(),
                ensemble,
                opts,
            )
        }
        Command::Schedule {
            arch,
            circuit,
            map,
            map_file,
            pairs,
            timeline,
            strict,
            no_isolation,
        } => {
            let opts = ScheduleOptions {
                pairs: match pairs {
                    PairsArg::Ideal => PairSupply::Ideal,
                    PairsArg::Buffered => PairSupply::Buffered {
                        seed: ctx.require_seed("schedule --pairs buffered")?,
                    },
                },
                strict_proximity: strict,
                measurement_isolation: !no_isolation,
            };
            run_schedule(
                ctx,
                &arch,
                &circuit,
                map,
                map_file.as_deref(),
                timeline.as_deref(),
                opts,
            )
        }
    }
}

fn load_arch(ctx: &mut Ctx, path: &Path) -> CliResult<ArchitectureSpec> {
    let spec = load_architecture(path)?;
    ctx.input(path)?;
    Ok(spec)
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    violations: Vec<crate::arch::Violation>,
}

fn validate(ctx: &mut Ctx, file: &Path) -> CliResult {
    ctx.format(&[Format::Json], "validate")?;
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    ctx.input(file)?;
    let report = match parse_architecture(&text) {
        Ok(_) => ValidationReport::default(),
        Err(Error::Validation(r)) => r,
        Err(e) => return Err(e.into()),
    };
    let out = ValidateOutput {
        valid: report.is_ok(),
        violations: report.violations.clone(),
    };
    ctx.emit(&to_canonical_json(&out), || {
        if report.is_ok() {
            format!("{}: ok\n", file.display())
        } else {
            format!("{}: {} violation(s)\n{report}", file.display(), report.violations.len())
        }
    })?;
    if report.is_ok() {
        Ok(())
    } else {
        Err(CliError::Reported)
    }
}

fn rates(ctx: &mut Ctx, arch: &Path, elu: Option<&str>) -> CliResult {
    let format = ctx.format(&[Format::Json, Format::Csv], "rates")?;
    let spec = load_arch(ctx, arch)?;
    let reports = match elu {
        Some(id) => vec![rate_report(&spec, id)?],
        None => rate_reports(&spec)?,
    };
    let data = match format {
        Format::Csv => csv_of(&reports),
        _ => to_canonical_json(&reports),
    };
    ctx.emit(&data, || {
        reports
            .iter()
            .map(|r| {
                format!(
                    "{}: N={} R_gate/2π={:.4} kHz, connection rate {:.4} Hz\n",
                    r.elu,
                    r.n_ions,
                    r.gate_rate / 1e3,
                    r.mean_connection_rate
                )
            })
            .collect()
    })
}

fn graph(ctx: &mut Ctx, arch: &Path, tier: Tier) -> CliResult {
    let format = ctx.format(&[Format::Json, Format::Dot], "graph")?;
    let spec = load_arch(ctx, arch)?;
    let g = build_interaction_graph(&spec)?;
    let profile = graph_distance_profile(&g, tier);
    let data = match format {
        Format::Dot => g.to_dot(tier),
        _ => to_canonical_json(&serde_json::json!({
            "tier": tier,
            "graph": g.restricted(tier),
            "distance_profile": profile,
        })),
    };
    let restricted = g.restricted(tier);
    ctx.emit(&data, || {
        format!(
            "{} nodes, {} edges in tier {tier:?}, diameter {}, {} unreachable pairs\n",
            restricted.nodes.len(),
            restricted.edges.len(),
            profile.max_distance,
            profile.unreachable_pairs
        )
    })
}

fn ising(ctx: &mut Ctx, args: IsingArgs) -> CliResult {
    let Some(command) = args.command else {
        ctx.format(&[Format::Json], "ising")?;
        let n = args
            .n
            .ok_or_else(|| CliError::Usage("ising needs --n (or a subcommand: solve, adiabatic, anneal)".into()))?;
        let inst = if args.random {
            random_instance(n, ctx.require_seed("ising --random")?)
        } else {
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::Usage("ising needs --alpha or --random".into()))?;
            power_law_couplings(n, alpha, args.j0)?
        };
        let data = to_canonical_json(&inst);
        return ctx.emit(&data, || format!("{n} spins, {} couplings\n", inst.support_edges()));
    };
    match command {
        IsingCommand::Solve { instance, cap } => {
            ctx.format(&[Format::Json], "ising solve")?;
            let inst = load_ising(&instance)?;
            ctx.input(&instance)?;
            let g = brute_force_ground_state_capped(&inst, cap)?;
            ctx.emit(&to_canonical_json(&g), || {
                format!("ground energy {} with degeneracy {}\n", g.energy, g.degeneracy)
            })
        }
        IsingCommand::Adiabatic {
            instance,
            time,
            steps,
            trace,
        } => {
            let format = ctx.format(&[Format::Json, Format::Csv], "ising adiabatic")?;
            let inst = load_ising(&instance)?;
            ctx.input(&instance)?;
            let run = adiabatic_evolve(&inst, time, steps)?;
            if let Some(path) = &trace {
                ctx.write_file(path, &csv_of(&run.energy_trace))?;
            }
            let data = match format {
                Format::Csv => csv_of(&run.energy_trace),
                _ => to_canonical_json(&run),
            };
            ctx.emit(&data, || {
                format!(
                    "overlap {:.6} after T={} in {} steps (final ⟨H⟩ {:.6}, ground {:.6})\n",
                    run.overlap, run.total_time, run.steps, run.final_energy, run.ground_energy
                )
            })
        }
        IsingCommand::Anneal {
            instance,
            sweeps,
            t_initial,
            t_final,
        } => {
            ctx.format(&[Format::Json], "ising anneal")?;
            let seed = ctx.require_seed("ising anneal")?;
            let inst = load_ising(&instance)?;
            ctx.input(&instance)?;
            let schedule = AnnealSchedule {
                t_initial,
                t_final,
                sweeps,
            };
            let r = anneal_classical(&inst, &schedule, seed)?;
            ctx.emit(&to_canonical_json(&r), || format!("best energy {}\n", r.energy))
        }
    }
}

fn qec_summary(g: &QecGraph) -> String {
    format!(
        "{} data, {} checks, max weight {}, {} logical\n",
        g.n_data,
        g.n_checks(),
        g.max_weight(),
        g.logical_qubits.map_or_else(|| "?".to_string(), |k| k.to_string())
    )
}

fn qec(ctx: &mut Ctx, command: QecCommand) -> CliResult {
    let code = match command {
        QecCommand::Surface { d } => surface_code_graph(d)?,
        QecCommand::Steane { levels } => steane_concat_graph(levels)?,
        QecCommand::Hgp { h1, h2 } => {
            let a = BinaryMatrix::load_csv(&h1)?;
            ctx.input(&h1)?;
            let b = BinaryMatrix::load_csv(&h2)?;
            ctx.input(&h2)?;
            hypergraph_product_graph(&a, &b)?
        }
        QecCommand::Embed {
            code,
            host,
            placement,
            partition,
        } => return qec_embed(ctx, &code, &host, placement, partition),
    };
    ctx.format(&[Format::Json], "qec")?;
    let v: Value = serde_json::from_str(&code.to_json()).expect("QEC JSON round-trips");
    ctx.emit(&to_canonical_json(&v), || qec_summary(&code))
}

#[derive(Serialize)]
struct RouteRow {
    check: usize,
    route_length: usize,
    swaps: usize,
    span: usize,
    remote_elus: usize,
}

fn qec_embed(
    ctx: &mut Ctx,
    code_path: &Path,
    host: &str,
    placement: PlacementArg,
    partition: PartitionArg,
) -> CliResult {
    let format = ctx.format(&[Format::Json, Format::Csv], "qec embed")?;
    let code = QecGraph::load(code_path)?;
    ctx.input(code_path)?;
    let report: EmbeddingReport = if host == "grid" {
        let placement = match placement {
            PlacementArg::RowMajor => Placement::RowMajor,
            PlacementArg::Native => Placement::Native,
            PlacementArg::Random => Placement::Random {
                seed: ctx.require_seed("qec embed --placement random")?,
            },
        };
        embed_on_grid(&code, &placement)?
    } else {
        let spec = load_arch(ctx, Path::new(host))?;
        let partition = match partition {
            PartitionArg::Greedy => Partition::GreedyCut,
            PartitionArg::RoundRobin => Partition::RoundRobin,
        };
        embed_on_modular(&code, &spec, &partition)?
    };
    let data = match format {
        Format::Csv => csv_of(
            &report
                .routes
                .iter()
                .map(|r| RouteRow {
                    check: r.check,
                    route_length: r.route_length,
                    swaps: r.swaps,
                    span: r.span,
                    remote_elus: r.remote_elus,
                })
                .collect::<Vec<_>>(),
        ),
        _ => to_canonical_json(&report),
    };
    ctx.emit(&data, || {
        format!(
            "max check span {}, swaps {}, pairs per round {}, longest intra-ELU hop {}\n",
            report.max_check_span, report.swap_count, report.pairs_per_round, report.max_intra_hop
        )
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ctx: &mut Ctx,
    arch: &Path,
    schedule_path: &Path,
    demand_path: Option<&Path>,
    horizon: f64,
    log: Option<&Path>,
    ensemble: Option<u64>,
    opts: SimOptions,
) -> CliResult {
    let seed = ctx.require_seed("simulate")?;
    let format = ctx.format(&[Format::Json, Format::Csv], "simulate")?;
    let spec = load_arch(ctx, arch)?;
    let schedule = load_schedule(schedule_path)?;
    ctx.input(schedule_path)?;
    let demand: Vec<PairRequest> = match demand_path {
        Some(p) => {
            let d = load_demand(p)?;
            ctx.input(p)?;
            d
        }
        None => Vec::new(),
    };
    if let Some(runs) = ensemble {
        if log.is_some() {
            return Err(CliError::Usage("--log is not available with --ensemble".into()));
        }
        if format == Format::Csv {
            return Err(CliError::Usage("simulate --ensemble supports JSON only".into()));
        }
        let summary = run_ensemble(&spec, &schedule, &demand, horizon, seed, runs, &opts)?;
        return ctx.emit(&to_canonical_json(&summary), || {
            format!(
                "{} runs: connection rate {:.4} ± {:.4} Hz\n",
                summary.runs,
                summary.connection_rate.mean,
                summary.connection_rate.std_dev()
            )
        });
    }
    let mut result = run_sim(&spec, &schedule, &demand, horizon, seed, opts)?;
    if let Some(path) = log {
        let events = result.events.take().unwrap_or_default();
        ctx.write_file(path, &events_csv(&events))?;
    }
    let data = match format {
        Format::Csv => csv_of(&result.links),
        _ => to_canonical_json(&result),
    };
    ctx.emit(&data, || {
        let l = &result.ledger;
        format!(
            "{} attempts, {} successes, connection rate {:.4} Hz; delivered {}, expired {}, invalidated {}, dropped {}, residual {}\n",
            result.attempts,
            result.successes,
            result.mean_connection_rate,
            l.delivered,
            l.expired,
            l.invalidated,
            l.dropped,
            l.residual
        )
    })
}

fn run_schedule(
    ctx: &mut Ctx,
    arch: &Path,
    circuit_path: &Path,
    map: MapArg,
    map_file: Option<&Path>,
    timeline: Option<&Path>,
    opts: ScheduleOptions,
) -> CliResult {
    let format = ctx.format(&[Format::Json, Format::Csv], "schedule")?;
    let strategy = match (map, map_file) {
        (MapArg::File, Some(p)) => {
            let m = QubitMap::load(p)?;
            ctx.input(p)?;
            MapStrategy::User { map: m }
        }
        (MapArg::File, None) => return Err(CliError::Usage("--map file needs --map-file PATH".into())),
        (_, Some(_)) => return Err(CliError::Usage("--map-file is only used with --map file".into())),
        (MapArg::Greedy, None) => MapStrategy::GreedyInteractionCut,
        (MapArg::Roundrobin, None) => MapStrategy::RoundRobin,
    };
    let spec = load_arch(ctx, arch)?;
    let circuit = load_circuit(circuit_path)?;
    ctx.input(circuit_path)?;
    let qmap = assign_qubits(&circuit, &spec, &strategy)?;
    let result = schedule(&circuit, &qmap, &spec, &opts)?;
    if let Some(path) = timeline {
        ctx.write_file(path, &result.timeline_csv())?;
    }
    let data = match format {
        Format::Csv => result.timeline_csv(),
        _ => to_canonical_json(&serde_json::json!({ "map": qmap, "result": result })),
    };
    ctx.emit(&data, || {
        format!(
            "makespan {:.6e} s, {} pairs, {} swaps, fidelity {:.6} (gates {:.6}, idle {:.6})\n",
            result.makespan,
            result.pairs_consumed,
            result.swaps_inserted,
            result.fidelity.total,
            result.fidelity.gates,
            result.fidelity.idle
        )
    })
}
