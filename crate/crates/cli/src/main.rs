//! `psoframe` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use psoframe::power::read_cap_table;
use psoframe::report::{render_tables, FsimReport};
use psoframe::swarm::{init_population, Termination};
use psoframe::{
    parse_bench, run_frame, CapModel, Circuit, Observe, RunConfig, RunReport, SimMode, SimOptions,
    TestVector,
};

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Simulation(String),
    #[error("{0}")]
    Unreachable(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Simulation(_) => 3,
            Failure::Unreachable(_) => 4,
        }
    }
}

impl From<psoframe::Error> for Failure {
    fn from(e: psoframe::Error) -> Self {
        use psoframe::Error as E;
        match e {
            E::Syntax { .. }
            | E::UndefinedNet { .. }
            | E::DuplicateDriver { .. }
            | E::CombinationalCycle { .. }
            | E::EmptyNetlist
            | E::CapTable(_)
            | E::MissingCapacitance(_) => Failure::Input(e.to_string()),
            E::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Simulation(e.to_string()),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "psoframe",
    version,
    about = "Low-power test framing for ISCAS-89 netlists"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fault-simulate a vector list and print cumulative coverage.
    Fsim(FsimArgs),
    /// Run the full pipeline and write report.json, coverage.csv and frame.txt.
    Frame(FrameArgs),
    /// Render a saved report as text tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimFlags {
    /// How flip-flop state reaches each vector.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Which lines count as observation points.
    #[arg(long, value_enum)]
    observe: Option<ObserveArg>,
    /// Use the collapsed fault universe.
    #[arg(long)]
    collapse: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Scan,
    Functional,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObserveArg {
    Scan,
    PoOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum CapArg {
    Unit,
    Fanout,
    Table,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["vectors", "random"]))]
struct FsimArgs {
    netlist: PathBuf,
    /// One vector per line; `#` starts a comment.
    vectors: Option<PathBuf>,
    /// Simulate N seeded random vectors instead of a file.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sim: SimFlags,
    /// Also write coverage.csv and detections.csv here.
    #[arg(short, long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FrameArgs {
    netlist: PathBuf,
    /// TOML run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pop_size: Option<usize>,
    #[arg(long, value_name = "X")]
    mutation_limit: Option<usize>,
    #[arg(long, value_name = "P")]
    mutation_rate: Option<f64>,
    #[arg(long, value_name = "N")]
    stagnation: Option<usize>,
    /// Starting gbest toggle counter at each frame position.
    #[arg(long, value_name = "P")]
    toggle_init: Option<f64>,
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long)]
    vdd: Option<f64>,
    /// Clock period in seconds.
    #[arg(long)]
    period: Option<f64>,
    #[arg(long, value_enum)]
    cap_model: Option<CapArg>,
    /// CSV of `gate_label,farads`; implies `--cap-model table`.
    #[arg(long, value_name = "FILE")]
    cap_table: Option<PathBuf>,
    /// Random orderings averaged for the baseline.
    #[arg(long, value_name = "K")]
    baseline_seeds: Option<usize>,
    /// Compare the frame with the exact minimum-Hamming order (at most 8 vectors).
    #[arg(long)]
    exact_check: bool,
    #[arg(short, long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Record the wall-clock time in the report.
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args)]
struct ReportArgs {
    report: PathBuf,
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Simulation(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Simulation(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Outcome<Circuit> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let c = parse_bench(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(c.with_name(name))
}

fn parse_vectors(text: &str, width: usize, path: &Path) -> Outcome<Vec<TestVector>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(tok) = line
            .split('#')
            .next()
            .and_then(|l| l.split_whitespace().next())
        else {
            continue;
        };
        let bad = |m: String| Failure::Input(format!("{}:{}: {m}", path.display(), i + 1));
        let v: TestVector = tok
            .parse()
            .map_err(|e: psoframe::Error| bad(e.to_string()))?;
        if v.width() != width {
            return Err(bad(format!(
                "vector has {} bits, circuit needs {width}",
                v.width()
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Failure::Input(format!("{}: no vectors", path.display())));
    }
    Ok(out)
}

fn apply_sim(sim: &mut SimOptions, flags: &SimFlags) {
    if let Some(m) = flags.mode {
        sim.mode = match m {
            ModeArg::Scan => SimMode::Scan,
            ModeArg::Functional => SimMode::Functional,
        };
    }
    if let Some(o) = flags.observe {
        sim.observe = match o {
            ObserveArg::Scan => Observe::Scan,
            ObserveArg::PoOnly => Observe::PoOnly,
        };
    }
}

fn fsim(args: FsimArgs) -> Outcome {
    let c = load_circuit(&args.netlist)?;
    let vectors = match (&args.vectors, args.random) {
        (Some(p), _) => parse_vectors(&read(p)?, c.width(), p)?,
        (None, Some(0)) => return Err(Failure::Usage("--random needs at least one vector".into())),
        (None, Some(n)) => init_population(c.width(), n, args.seed),
        (None, None) => unreachable!("clap requires a vector source"),
    };
    let mut sim = SimOptions::default();
    apply_sim(&mut sim, &args.sim);
    let report = FsimReport::run(&c, vectors, args.sim.collapse, sim)?;
    print!("{}", report.table());
    if let Some(dir) = &args.out_dir {
        write(dir, "coverage.csv", &report.coverage_csv())?;
        write(dir, "detections.csv", &report.detections_csv())?;
    }
    Ok(())
}

fn frame_config(args: &FrameArgs) -> Outcome<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => toml::from_str(&read(p)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    let s = &mut cfg.swarm;
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(v) = args.pop_size {
        s.population_size = v;
    }
    if let Some(v) = args.mutation_limit {
        s.mutation_limit = v;
    }
    if let Some(v) = args.mutation_rate {
        s.mutation_rate = Some(v);
    }
    if let Some(v) = args.stagnation {
        s.stagnation_limit = v;
    }
    if let Some(v) = args.toggle_init {
        s.toggle_counter_init = Some(v);
    }
    apply_sim(&mut cfg.sim, &args.sim);
    cfg.collapse |= args.sim.collapse;
    if let Some(v) = args.vdd {
        cfg.power.vdd = v;
    }
    if let Some(v) = args.period {
        cfg.power.clock_period = v;
    }
    match (args.cap_model, &args.cap_table) {
        (Some(CapArg::Unit), None) => cfg.power.cap_model = CapModel::Unit,
        (Some(CapArg::Fanout), None) => cfg.power.cap_model = CapModel::Fanout,
        (Some(CapArg::Table) | None, Some(p)) => {
            let table = read_cap_table(read(p)?.as_bytes())
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            cfg.power.cap_model = CapModel::Table(table);
        }
        (Some(CapArg::Table), None) if !matches!(cfg.power.cap_model, CapModel::Table(_)) => {
            return Err(Failure::Usage("--cap-model table needs --cap-table".into()));
        }
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "--cap-table only applies to --cap-model table".into(),
            ));
        }
        _ => {}
    }
    if let Some(v) = args.baseline_seeds {
        cfg.baseline_seeds = v;
    }
    cfg.exact_check |= args.exact_check;
    cfg.swarm.validate()?;
    cfg.power.validate()?;
    Ok(cfg)
}

fn frame(args: FrameArgs) -> Outcome {
    let cfg = frame_config(&args)?;
    let c = load_circuit(&args.netlist)?;
    let mut report = run_frame(&c, &cfg)?;
    if args.timestamp {
        report.generated_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    write(&args.out_dir, "report.json", &report.to_json())?;
    write(&args.out_dir, "coverage.csv", &report.coverage_csv())?;
    write(&args.out_dir, "frame.txt", &report.frame_text())?;

    let p = &report.pbest;
    println!(
        "{} vectors, coverage {:.3}% ({:.3}% of detectable), frame/random toggles {:.3}, adjacent Hamming {}",
        report.frame.vectors.len(),
        report.frame.coverage,
        p.detectable_coverage,
        report.baseline.ratio_vs_random,
        report.frame.adjacent_hamming
    );
    if let Some(e) = &report.exact {
        println!("exact minimum Hamming {}, gap {}", e.exact_hamming, e.gap);
    }
    if p.termination != Termination::AllDetected {
        return Err(Failure::Unreachable(format!(
            "detectable coverage stopped at {:.3}% ({:?})",
            p.detectable_coverage, p.termination
        )));
    }
    Ok(())
}

fn report(args: ReportArgs) -> Outcome {
    let text = read(&args.report)?;
    let r = RunReport::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.report.display())))?;
    print!("{}", render_tables(&r));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Fsim(a) => fsim(a),
        Command::Frame(a) => frame(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psoframe: {e}");
            ExitCode::from(e.code())
        }
    }
}
