use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::agents::{Model, ModelParams};
use crate::error::{Error, Result};
use crate::graph::GrowthParams;

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    Generate(GrowthParams),
    EdgeList { path: PathBuf, symmetrize: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionQuota {
    /// Same number of sessions for every agent.
    Constant(u64),
    /// Sessions of agent `i` at index `i`, read from `path`.
    PerAgent { path: PathBuf, counts: Vec<u64> },
}

/// Lower cutoffs used when fitting exponents to each integer descriptor.
/// A cutoff of 0 selects it from the data by minimizing the KS distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitCutoffs {
    pub page_traffic: u64,
    pub link_traffic: u64,
    pub empty_referrer_traffic: u64,
    pub session_size: u64,
    pub session_depth: u64,
}

impl Default for FitCutoffs {
    fn default() -> Self {
        FitCutoffs {
            page_traffic: 0,
            link_traffic: 0,
            empty_referrer_traffic: 1,
            session_size: 1,
            session_depth: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: Model,
    pub graph: GraphSource,
    pub params: ModelParams,
    pub n_agents: u32,
    pub sessions: SessionQuota,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    /// Also write the run as a request log.
    pub export_log: Option<PathBuf>,
    pub bin_ratio: f64,
    pub xmin: FitCutoffs,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: Model::Abc,
            graph: GraphSource::Generate(GrowthParams {
                n: 100_000,
                m: 3,
                gamma: 2.1,
                seed: 0,
            }),
            params: ModelParams::default(),
            n_agents: 1000,
            sessions: SessionQuota::Constant(1000),
            seed: 0,
            workers: 1,
            out_dir: PathBuf::from("out"),
            export_log: None,
            bin_ratio: crate::metrics::default_bin_ratio(),
            xmin: FitCutoffs::default(),
        }
    }
}

/// Keys accepted in config files and as `--key value` overrides.
pub const CONFIG_KEYS: &[&str] = &[
    "model", "n", "m", "gamma", "graph_seed", "edge_list", "symmetrize", "pt", "beta", "pb",
    "e0", "cf", "cb", "eta", "delta0", "agents", "sessions", "sessions_file", "seed", "workers",
    "out", "export_log", "bin_ratio", "xmin_page_traffic", "xmin_link_traffic",
    "xmin_empty_referrer_traffic", "xmin_session_size", "xmin_session_depth",
];

fn growth(g: &mut GraphSource) -> &mut GrowthParams {
    if let GraphSource::EdgeList { .. } = g {
        *g = GraphSource::Generate(GrowthParams { n: 100_000, m: 3, gamma: 2.1, seed: 0 });
    }
    match g {
        GraphSource::Generate(p) => p,
        GraphSource::EdgeList { .. } => unreachable!(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::config(format!("invalid boolean {value:?} for {key}"))),
    }
}

impl SimConfig {
    /// Applies one `key = value` setting. Session files are only recorded
    /// here; [`SimConfig::load_session_file`] reads them.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "model" => self.model = value.parse()?,
            "n" => growth(&mut self.graph).n = num(key, value)?,
            "m" => growth(&mut self.graph).m = num(key, value)?,
            "gamma" => growth(&mut self.graph).gamma = num(key, value)?,
            "graph_seed" => growth(&mut self.graph).seed = num(key, value)?,
            "edge_list" => {
                let symmetrize = match &self.graph {
                    GraphSource::EdgeList { symmetrize, .. } => *symmetrize,
                    GraphSource::Generate(_) => true,
                };
                self.graph = GraphSource::EdgeList { path: value.into(), symmetrize };
            }
            "symmetrize" => {
                let on = parse_bool(key, value)?;
                match &mut self.graph {
                    GraphSource::EdgeList { symmetrize, .. } => *symmetrize = on,
                    GraphSource::Generate(_) => {
                        return Err(Error::config("symmetrize requires edge_list to be set first"))
                    }
                }
            }
            "pt" => self.params.p_t = num(key, value)?,
            "beta" => self.params.beta = num(key, value)?,
            "pb" => self.params.p_b = num(key, value)?,
            "e0" => self.params.e0 = num(key, value)?,
            "cf" => self.params.c_f = num(key, value)?,
            "cb" => self.params.c_b = num(key, value)?,
            "eta" => self.params.eta = num(key, value)?,
            "delta0" => self.params.delta0 = num(key, value)?,
            "agents" => self.n_agents = num(key, value)?,
            "sessions" => self.sessions = SessionQuota::Constant(num(key, value)?),
            "sessions_file" => {
                self.sessions = SessionQuota::PerAgent { path: value.into(), counts: Vec::new() }
            }
            "seed" => self.seed = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "out" => self.out_dir = value.into(),
            "export_log" => {
                self.export_log = if value.is_empty() { None } else { Some(value.into()) }
            }
            "bin_ratio" => self.bin_ratio = num(key, value)?,
            "xmin_page_traffic" => self.xmin.page_traffic = num(key, value)?,
            "xmin_link_traffic" => self.xmin.link_traffic = num(key, value)?,
            "xmin_empty_referrer_traffic" => self.xmin.empty_referrer_traffic = num(key, value)?,
            "xmin_session_size" => self.xmin.session_size = num(key, value)?,
            "xmin_session_depth" => self.xmin.session_depth = num(key, value)?,
            _ => return Err(Error::config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text. `#` starts a comment line.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("config line {}: expected key = value", i + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut c = SimConfig::default();
        c.apply_kv(text)?;
        Ok(c)
    }

    /// Reads the per-agent session counts file, if one is configured, and
    /// sets the agent count to its length.
    pub fn load_session_file(&mut self) -> Result<()> {
        if let SessionQuota::PerAgent { path, counts } = &mut self.sessions {
            let text = std::fs::read_to_string(&*path)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
            *counts = parse_session_counts(&text)?;
            self.n_agents = counts.len() as u32;
        }
        Ok(())
    }

    pub fn quotas(&self) -> Vec<u64> {
        match &self.sessions {
            SessionQuota::Constant(k) => vec![*k; self.n_agents as usize],
            SessionQuota::PerAgent { counts, .. } => counts.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let GraphSource::Generate(g) = &self.graph {
            g.validate()?;
        }
        if self.n_agents < 1 {
            return Err(Error::config("at least one agent is required"));
        }
        match &self.sessions {
            SessionQuota::Constant(0) => {
                return Err(Error::config("sessions per agent must be at least 1"))
            }
            SessionQuota::PerAgent { counts, .. } if counts.len() != self.n_agents as usize => {
                return Err(Error::config("session counts file has not been loaded"))
            }
            _ => {}
        }
        if self.workers < 1 {
            return Err(Error::config("workers must be at least 1"));
        }
        if self.bin_ratio.is_nan() || self.bin_ratio <= 1.0 {
            return Err(Error::config("bin_ratio must be > 1"));
        }
        Ok(())
    }

    /// Every setting as `key = value` lines, readable by [`SimConfig::from_kv`].
    /// The worker count is included for the record; it has no effect on
    /// results.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "model = {}", self.model);
        match &self.graph {
            GraphSource::Generate(g) => {
                let _ = writeln!(s, "n = {}\nm = {}\ngamma = {}\ngraph_seed = {}", g.n, g.m, g.gamma, g.seed);
            }
            GraphSource::EdgeList { path, symmetrize } => {
                let _ = writeln!(s, "edge_list = {}\nsymmetrize = {}", path.display(), symmetrize);
            }
        }
        let _ = writeln!(
            s,
            "pt = {}\nbeta = {}\npb = {}\ne0 = {}\ncf = {}\ncb = {}\neta = {}\ndelta0 = {}",
            p.p_t, p.beta, p.p_b, p.e0, p.c_f, p.c_b, p.eta, p.delta0
        );
        match &self.sessions {
            SessionQuota::Constant(k) => {
                let _ = writeln!(s, "agents = {}\nsessions = {}", self.n_agents, k);
            }
            SessionQuota::PerAgent { path, .. } => {
                let _ = writeln!(s, "sessions_file = {}", path.display());
            }
        }
        let _ = writeln!(s, "seed = {}\nworkers = {}\nout = {}", self.seed, self.workers, self.out_dir.display());
        if let Some(p) = &self.export_log {
            let _ = writeln!(s, "export_log = {}", p.display());
        }
        let x = &self.xmin;
        let _ = writeln!(
            s,
            "bin_ratio = {}\nxmin_page_traffic = {}\nxmin_link_traffic = {}\nxmin_empty_referrer_traffic = {}\nxmin_session_size = {}\nxmin_session_depth = {}",
            self.bin_ratio, x.page_traffic, x.link_traffic, x.empty_referrer_traffic, x.session_size, x.session_depth
        );
        s
    }
}

/// One positive integer per line; line `i` is agent `i`'s session count.
pub fn parse_session_counts(text: &str) -> Result<Vec<u64>> {
    let counts = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match l.trim().parse::<u64>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(Error::config(format!(
                "sessions file line {}: expected a positive integer, got {l:?}",
                i + 1
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    if counts.is_empty() {
        return Err(Error::config("sessions file lists no agents"));
    }
    Ok(counts)
}

pub(crate) fn display(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_settings() {
        let c = SimConfig::default();
        let p = c.params;
        assert_eq!(
            (p.p_t, p.beta, p.p_b, p.e0, p.c_f, p.c_b, p.eta, p.delta0),
            (0.15, 1.33, 0.5, 0.5, 1.0, 0.5, 0.15, 1.0)
        );
        let GraphSource::Generate(g) = c.graph else { panic!() };
        assert_eq!((g.m, g.gamma), (3, 2.1));
        c.validate().unwrap();
    }

    #[test]
    fn kv_round_trip() {
        let mut c = SimConfig::from_kv("# run\nmodel = pagerank\nn = 500\npt=0.3\nseed = 9\nworkers = 4\n").unwrap();
        c.export_log = Some("log.tsv".into());
        let back = SimConfig::from_kv(&c.to_kv()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.model, Model::PageRank);
        assert_eq!(back.params.p_t, 0.3);
    }

    #[test]
    fn edge_list_source() {
        let c = SimConfig::from_kv("edge_list = g.txt\nsymmetrize = false\n").unwrap();
        assert_eq!(c.graph, GraphSource::EdgeList { path: "g.txt".into(), symmetrize: false });
        assert_eq!(SimConfig::from_kv(&c.to_kv()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(SimConfig::from_kv("colour = red").is_err());
        assert!(SimConfig::from_kv("pt = lots").is_err());
        assert!(SimConfig::from_kv("just a line").is_err());
        assert!(SimConfig::from_kv("symmetrize = true").is_err());
        for bad in ["agents = 0", "sessions = 0", "pt = 1.5", "gamma = 1.9", "workers = 0", "n = 3"] {
            let c = SimConfig::from_kv(bad).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn session_counts() {
        assert_eq!(parse_session_counts("3\n1\n\n7\n").unwrap(), vec![3, 1, 7]);
        assert!(parse_session_counts("3\n0\n").is_err());
        assert!(parse_session_counts("x\n").is_err());
        assert!(parse_session_counts("\n").is_err());
    }
}
