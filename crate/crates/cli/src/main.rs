use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use webnav_core::graph::generate_scale_free;
use webnav_core::ingest::ParseOptions;
use webnav_core::run::{compare_runs, run_ingest, run_simulation, IngestConfig, RunManifest, SimConfig};
use webnav_core::Error;

#[derive(Parser)]
#[command(name = "webnav", version, about = "Web navigation models and traffic statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a navigation model and write descriptor files.
    Simulate(Box<SimulateArgs>),
    /// Rebuild logical sessions from a TSV request log.
    Ingest(IngestArgs),
    /// Compare the descriptor distributions of two runs.
    Compare(CompareArgs),
    /// Generate a scale-free graph and write it as an edge list.
    Graph(GraphArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pagerank, bookrank or abc
    #[arg(long)]
    model: Option<String>,
    /// Nodes of the generated graph.
    #[arg(long)]
    n: Option<String>,
    /// Links added per new node.
    #[arg(long)]
    m: Option<String>,
    /// Target degree exponent.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    graph_seed: Option<String>,
    /// Load this edge list instead of generating a graph.
    #[arg(long)]
    edge_list: Option<String>,
    /// Insert both directions of every loaded edge (true/false).
    #[arg(long)]
    symmetrize: Option<String>,
    /// Teleport probability.
    #[arg(long)]
    pt: Option<String>,
    /// Bookmark rank exponent.
    #[arg(long)]
    beta: Option<String>,
    /// Back-button probability.
    #[arg(long)]
    pb: Option<String>,
    #[arg(long)]
    e0: Option<String>,
    #[arg(long)]
    cf: Option<String>,
    #[arg(long)]
    cb: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    delta0: Option<String>,
    #[arg(long)]
    agents: Option<String>,
    /// Sessions per agent.
    #[arg(long)]
    sessions: Option<String>,
    /// One session count per line, line i for agent i.
    #[arg(long)]
    sessions_file: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Also write the run as a TSV request log.
    #[arg(long)]
    export_log: Option<String>,
}

impl SimulateArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("model", &self.model),
            ("n", &self.n),
            ("m", &self.m),
            ("gamma", &self.gamma),
            ("graph_seed", &self.graph_seed),
            ("edge_list", &self.edge_list),
            ("symmetrize", &self.symmetrize),
            ("pt", &self.pt),
            ("beta", &self.beta),
            ("pb", &self.pb),
            ("e0", &self.e0),
            ("cf", &self.cf),
            ("cb", &self.cb),
            ("eta", &self.eta),
            ("delta0", &self.delta0),
            ("agents", &self.agents),
            ("sessions", &self.sessions),
            ("sessions_file", &self.sessions_file),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("out", &self.out),
            ("export_log", &self.export_log),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Args)]
struct IngestArgs {
    /// TSV log: timestamp, user, referrer (`-` if empty), target.
    log: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Inactivity timeout in seconds.
    #[arg(long, default_value_t = 1800)]
    timeout: u64,
    /// Drop query strings and fragments from URLs.
    #[arg(long)]
    strip_query: bool,
    /// Comma-separated allowlist of page extensions.
    #[arg(long, value_delimiter = ',')]
    extensions: Option<Vec<String>>,
    /// Compute user entropy over hosts instead of pages.
    #[arg(long)]
    entropy_by_host: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Manifest file or run directory.
    a: PathBuf,
    b: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 2.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::Io { .. } => 3,
        Error::Data(_) | Error::Stats(_) => 4,
        Error::Bounds { .. } | Error::Protocol(_) | Error::Lookup(_) => 1,
    }
}

fn simulate(args: SimulateArgs) -> webnav_core::Result<()> {
    let mut config = SimConfig {
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..SimConfig::default()
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        config.apply_kv(&text)?;
    }
    for (k, v) in args.overrides() {
        config.set(k, v)?;
    }
    let m = run_simulation(&config)?;
    eprintln!(
        "{} sessions, mean size {}, written to {}",
        m.get("total_sessions").unwrap_or("?"),
        m.get("mean_session_size").unwrap_or("?"),
        m.dir.display()
    );
    Ok(())
}

fn ingest(args: IngestArgs) -> webnav_core::Result<()> {
    let cfg = IngestConfig {
        timeout: args.timeout,
        parse: ParseOptions {
            strip_query: args.strip_query,
            extensions: args.extensions,
        },
        entropy_by_host: args.entropy_by_host,
        ..IngestConfig::new(args.log, args.out)
    };
    let m = run_ingest(&cfg)?;
    let malformed = m.get("log.malformed").unwrap_or("0");
    if malformed != "0" {
        eprintln!("warning: skipped {malformed} malformed log lines");
    }
    eprintln!(
        "{} sessions from {} users, written to {}",
        m.get("total_sessions").unwrap_or("?"),
        m.get("users").unwrap_or("?"),
        m.dir.display()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> webnav_core::Result<()> {
    let a = RunManifest::load(&args.a)?;
    let b = RunManifest::load(&args.b)?;
    let report = compare_runs(&a, &b)?;
    match &args.out {
        Some(path) => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf).expect("write to memory");
            std::fs::write(path, buf).map_err(|e| Error::io(path.display().to_string(), e))
        }
        None => report
            .write_csv(std::io::stdout().lock())
            .map_err(|e| Error::io("stdout", e)),
    }
}

fn graph(args: GraphArgs) -> webnav_core::Result<()> {
    let g = generate_scale_free(args.n, args.m, args.gamma, args.seed)?;
    let f = std::fs::File::create(&args.out)
        .map_err(|e| Error::io(args.out.display().to_string(), e))?;
    g.write_edge_list(std::io::BufWriter::new(f))
        .map_err(|e| Error::io(args.out.display().to_string(), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(*a),
        Command::Ingest(a) => ingest(a),
        Command::Compare(a) => compare(a),
        Command::Graph(a) => graph(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("webnav: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
