//! End-to-end runs: simulation and log ingestion into descriptor files.

mod config;
mod output;
mod runner;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{parse_session_counts, FitCutoffs, GraphSource, SessionQuota, SimConfig, CONFIG_KEYS};
pub use output::{
    compare_runs, mean_u64, read_ccdf, write_descriptor_files, Comparison, DescriptorAccumulator,
    DescriptorSet, Metric, MetricComparison, RunManifest, ENTROPY_BIN_WIDTH, MANIFEST_FILE,
};
pub use runner::{node_url, partition_queues, run_agent, simulate, AgentRun, EXPORT_EPOCH};

use crate::error::{Error, Result};
use crate::graph::{generate_scale_free, load_edge_list, WebGraph};
use crate::ingest::{parse_log, user_order_key, ParseOptions, Sessionizer, DEFAULT_TIMEOUT_SECS};
use crate::session::SessionDescriptor;
use config::display;
use output::{create, io_at};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SESSIONS_FILE: &str = "sessions.csv";

pub fn build_graph(source: &GraphSource) -> Result<WebGraph> {
    match source {
        GraphSource::Generate(p) => generate_scale_free(p.n, p.m, p.gamma, p.seed),
        GraphSource::EdgeList { path, symmetrize } => {
            let f = File::open(path).map_err(io_at(path))?;
            load_edge_list(BufReader::new(f), *symmetrize)
        }
    }
}

fn write_session_row<W: Write>(w: &mut W, user: &str, d: &SessionDescriptor, root: &dyn std::fmt::Display) -> std::io::Result<()> {
    writeln!(w, "{},{},{},{},{}", user, d.index, root, d.size, d.depth)
}

const SESSIONS_HEADER: &str = "user_id,session_index,root,size,depth";

/// Result of a simulation held in memory.
#[derive(Debug)]
pub struct SimResult {
    pub descriptors: DescriptorSet,
    pub clicks: u64,
    pub steps: u64,
    /// Click count of every session, in output order.
    pub session_clicks: Vec<u64>,
}

/// Runs a simulation in memory, streaming closed sessions to `on_session`
/// in `(agent, session index)` order.
pub fn simulate_descriptors<F>(
    config: &SimConfig,
    g: &WebGraph,
    mut on_agent: F,
) -> Result<SimResult>
where
    F: FnMut(&AgentRun) -> Result<()>,
{
    let quotas = config.quotas();
    let mut acc = DescriptorAccumulator::default();
    let mut session_clicks = Vec::with_capacity(quotas.iter().sum::<u64>() as usize);
    let mut steps = 0;
    simulate(
        config.model,
        g,
        &config.params,
        &quotas,
        config.seed,
        config.workers,
        config.export_log.is_some(),
        |run| {
            on_agent(&run)?;
            for d in &run.sessions {
                acc.add_session(d.size, d.depth, d.clicks);
                session_clicks.push(d.clicks);
            }
            steps += run.steps;
            acc.add_entropy(run.agent.to_string(), run.entropy);
            acc.add_tally(run.tally);
            Ok(())
        },
    )?;
    let clicks = acc.clicks();
    Ok(SimResult {
        descriptors: acc.finish(),
        clicks,
        steps,
        session_clicks,
    })
}

/// Runs the configured simulation and writes every output file plus the
/// manifest into the output directory.
pub fn run_simulation(config: &SimConfig) -> Result<RunManifest> {
    let started = Instant::now();
    let mut config = config.clone();
    config.load_session_file()?;
    config.validate()?;

    let g = build_graph(&config.graph)?;
    let dir = config.out_dir.clone();
    std::fs::create_dir_all(&dir).map_err(io_at(&dir))?;

    let sessions_path = dir.join(SESSIONS_FILE);
    let mut sessions_out = create(&sessions_path)?;
    writeln!(sessions_out, "{SESSIONS_HEADER}").map_err(io_at(&sessions_path))?;
    let mut log_out = match &config.export_log {
        Some(p) => Some((create(p)?, p.clone())),
        None => None,
    };

    let result = simulate_descriptors(&config, &g, |run| {
        let user = run.agent.to_string();
        for d in &run.sessions {
            write_session_row(&mut sessions_out, &user, d, &g.label(d.root))
                .map_err(io_at(&sessions_path))?;
        }
        if let Some((w, p)) = &mut log_out {
            for r in &run.log {
                writeln!(w, "{}", r.to_line()).map_err(io_at(p))?;
            }
        }
        Ok(())
    })?;
    sessions_out.flush().map_err(io_at(&sessions_path))?;
    if let Some((mut w, p)) = log_out {
        w.flush().map_err(io_at(&p))?;
    }

    let files = write_descriptor_files(&dir, &result.descriptors, config.bin_ratio, &config.xmin)?;

    let mut m = RunManifest { entries: Vec::new(), dir: dir.clone() };
    m.push("kind", "simulation");
    m.push("version", VERSION);
    for line in config.to_kv().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.push(format!("config.{k}"), v);
        }
    }
    m.push("graph.nodes", g.n());
    m.push("graph.entries", g.num_entries());
    m.push("sessions", SESSIONS_FILE);
    if let Some(p) = &config.export_log {
        m.push("export_log", display(p));
    }
    m.push("total_sessions", result.descriptors.sessions());
    m.push("total_clicks", result.clicks);
    m.push("total_steps", result.steps);
    m.push("mean_session_size", result.descriptors.mean_session_size());
    m.entries.extend(files);
    m.push("wall_time_secs", started.elapsed().as_secs_f64());
    m.save()?;
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IngestConfig {
    pub log: PathBuf,
    pub out_dir: PathBuf,
    pub timeout: u64,
    pub parse: ParseOptions,
    pub entropy_by_host: bool,
    pub bin_ratio: f64,
    pub xmin: FitCutoffs,
}

impl IngestConfig {
    pub fn new(log: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        IngestConfig {
            log: log.into(),
            out_dir: out_dir.into(),
            timeout: DEFAULT_TIMEOUT_SECS,
            parse: ParseOptions::default(),
            entropy_by_host: false,
            bin_ratio: crate::metrics::default_bin_ratio(),
            xmin: FitCutoffs::default(),
        }
    }
}

/// Descriptors of a reconstructed log, held in memory.
#[derive(Debug)]
pub struct IngestResult {
    pub descriptors: DescriptorSet,
    pub output: crate::ingest::SessionizeOutput,
    pub stats: crate::ingest::ParseStats,
}

pub fn ingest_descriptors(path: &Path, cfg: &IngestConfig) -> Result<IngestResult> {
    let f = File::open(path).map_err(io_at(path))?;
    let (records, stats) = parse_log(BufReader::new(f), &cfg.parse)?;
    if records.is_empty() {
        return Err(Error::Data(format!("no usable records in {}", display(path))));
    }
    let mut s = Sessionizer::new(cfg.timeout).entropy_by_host(cfg.entropy_by_host);
    for r in &records {
        s.push(r);
    }
    drop(records);
    let output = s.finish();

    let mut acc = DescriptorAccumulator::default();
    for d in &output.sessions {
        acc.add_session(d.size, d.depth, d.clicks);
    }
    let mut entropies: Vec<(String, f64)> = output
        .tally
        .user_entropies()
        .into_iter()
        .map(|(u, s)| (output.users.name(u.0).to_string(), s))
        .collect();
    entropies.sort_by(|a, b| user_order_key(&a.0).cmp(&user_order_key(&b.0)));
    for (u, s) in entropies {
        acc.add_entropy(u, s);
    }
    let mut tally = output.tally.clone();
    tally.take_user_visits();
    acc.add_tally(tally);
    Ok(IngestResult {
        descriptors: acc.finish(),
        output,
        stats,
    })
}

/// Reconstructs sessions from a request log and writes the same files as a
/// simulation run.
pub fn run_ingest(cfg: &IngestConfig) -> Result<RunManifest> {
    let started = Instant::now();
    if cfg.bin_ratio.is_nan() || cfg.bin_ratio <= 1.0 {
        return Err(Error::config("bin_ratio must be > 1"));
    }
    let result = ingest_descriptors(&cfg.log, cfg)?;
    let dir = cfg.out_dir.clone();
    std::fs::create_dir_all(&dir).map_err(io_at(&dir))?;

    let sessions_path = dir.join(SESSIONS_FILE);
    let mut w = create(&sessions_path)?;
    let out = &result.output;
    (|| -> std::io::Result<()> {
        writeln!(w, "{SESSIONS_HEADER}")?;
        for d in &out.sessions {
            write_session_row(&mut w, out.users.name(d.user.0), d, &out.urls.name(d.root.0))?;
        }
        w.flush()
    })()
    .map_err(io_at(&sessions_path))?;

    let files = write_descriptor_files(&dir, &result.descriptors, cfg.bin_ratio, &cfg.xmin)?;

    let mut m = RunManifest { entries: Vec::new(), dir };
    m.push("kind", "ingest");
    m.push("version", VERSION);
    m.push("config.log", display(&cfg.log));
    m.push("config.timeout", cfg.timeout);
    m.push("config.strip_query", cfg.parse.strip_query);
    m.push(
        "config.extensions",
        cfg.parse.extensions.as_ref().map(|e| e.join(",")).unwrap_or_default(),
    );
    m.push("config.entropy_by_host", cfg.entropy_by_host);
    m.push("config.bin_ratio", cfg.bin_ratio);
    m.push("log.lines", result.stats.lines);
    m.push("log.records", result.stats.records);
    m.push("log.malformed", result.stats.malformed);
    m.push("log.filtered", result.stats.filtered);
    m.push("users", out.users.len());
    m.push("sessions", SESSIONS_FILE);
    m.push("total_sessions", result.descriptors.sessions());
    m.push(
        "mean_sessions_per_user",
        result.descriptors.sessions() as f64 / out.users.len() as f64,
    );
    m.push("mean_session_size", result.descriptors.mean_session_size());
    m.entries.extend(files);
    m.push("wall_time_secs", started.elapsed().as_secs_f64());
    m.save()?;
    Ok(m)
}
