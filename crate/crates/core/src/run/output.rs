//! The six descriptor distributions, their files, run manifests and run
//! comparison.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{self, ccdf, ccdf_mean, fit_power_law, fit_power_law_auto, ks_statistic, PowerLawFit};
use crate::run::config::{display, FitCutoffs};
use crate::session::TrafficTally;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    PageTraffic,
    LinkTraffic,
    EmptyReferrerTraffic,
    Entropy,
    SessionSize,
    SessionDepth,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::PageTraffic,
        Metric::LinkTraffic,
        Metric::EmptyReferrerTraffic,
        Metric::Entropy,
        Metric::SessionSize,
        Metric::SessionDepth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PageTraffic => "page_traffic",
            Metric::LinkTraffic => "link_traffic",
            Metric::EmptyReferrerTraffic => "empty_referrer_traffic",
            Metric::Entropy => "entropy",
            Metric::SessionSize => "session_size",
            Metric::SessionDepth => "session_depth",
        }
    }

    pub fn from_name(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == s)
    }

    fn cutoff(self, x: &FitCutoffs) -> Option<u64> {
        match self {
            Metric::PageTraffic => Some(x.page_traffic),
            Metric::LinkTraffic => Some(x.link_traffic),
            Metric::EmptyReferrerTraffic => Some(x.empty_referrer_traffic),
            Metric::SessionSize => Some(x.session_size),
            Metric::SessionDepth => Some(x.session_depth),
            Metric::Entropy => None,
        }
    }
}

/// Sample sets of the six descriptors. Integer samples are sorted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DescriptorSet {
    pub page_traffic: Vec<u64>,
    pub link_traffic: Vec<u64>,
    pub empty_referrer_traffic: Vec<u64>,
    /// `(user, entropy)` in user order.
    pub entropy: Vec<(String, f64)>,
    pub session_size: Vec<u64>,
    pub session_depth: Vec<u64>,
}

impl DescriptorSet {
    pub fn integer(&self, m: Metric) -> Option<&[u64]> {
        match m {
            Metric::PageTraffic => Some(&self.page_traffic),
            Metric::LinkTraffic => Some(&self.link_traffic),
            Metric::EmptyReferrerTraffic => Some(&self.empty_referrer_traffic),
            Metric::SessionSize => Some(&self.session_size),
            Metric::SessionDepth => Some(&self.session_depth),
            Metric::Entropy => None,
        }
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.entropy.iter().map(|e| e.1).collect()
    }

    pub fn sessions(&self) -> usize {
        self.session_size.len()
    }

    pub fn mean_session_size(&self) -> f64 {
        mean_u64(&self.session_size)
    }

    /// CCDF table of a metric over real values.
    pub fn ccdf(&self, m: Metric) -> Vec<(f64, f64)> {
        match self.integer(m) {
            Some(s) => ccdf(s).into_iter().map(|(v, p)| (v as f64, p)).collect(),
            None => ccdf(&self.entropies()),
        }
    }

    pub fn fit(&self, m: Metric, cutoffs: &FitCutoffs) -> Option<Result<PowerLawFit>> {
        let xmin = m.cutoff(cutoffs)?;
        let samples = self.integer(m)?;
        Some(match xmin {
            0 => fit_power_law_auto(samples),
            x => fit_power_law(samples, x),
        })
    }
}

pub fn mean_u64(xs: &[u64]) -> f64 {
    xs.iter().map(|&x| x as f64).sum::<f64>() / xs.len() as f64
}

/// Folds tallies and session shapes into a [`DescriptorSet`].
#[derive(Debug, Default)]
pub struct DescriptorAccumulator {
    tally: TrafficTally,
    entropy: Vec<(String, f64)>,
    session_size: Vec<u64>,
    session_depth: Vec<u64>,
    clicks: u64,
}

impl DescriptorAccumulator {
    pub fn add_tally(&mut self, tally: TrafficTally) {
        self.tally.merge(tally);
    }

    pub fn add_session(&mut self, size: u64, depth: u32, clicks: u64) {
        self.session_size.push(size);
        self.session_depth.push(depth as u64);
        self.clicks += clicks;
    }

    pub fn add_entropy(&mut self, user: String, s: f64) {
        self.entropy.push((user, s));
    }

    pub fn clicks(&self) -> u64 {
        self.clicks
    }

    pub fn tally(&self) -> &TrafficTally {
        &self.tally
    }

    pub fn finish(self) -> DescriptorSet {
        let sorted = |mut v: Vec<u64>| {
            v.sort_unstable();
            v
        };
        DescriptorSet {
            page_traffic: sorted(self.tally.page_visits.into_values().collect()),
            link_traffic: sorted(self.tally.link_visits.into_values().collect()),
            empty_referrer_traffic: sorted(self.tally.session_starts.into_values().collect()),
            entropy: self.entropy,
            session_size: sorted(self.session_size),
            session_depth: sorted(self.session_depth),
        }
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(display(path), e))
}

pub(crate) fn io_at(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(display(path), e)
}

/// Entropy histogram bin width, in bits.
pub const ENTROPY_BIN_WIDTH: f64 = 0.25;

/// Writes distribution, CCDF and fit files for all six descriptors into
/// `dir`. Returns manifest entries describing them.
pub fn write_descriptor_files(
    dir: &Path,
    set: &DescriptorSet,
    bin_ratio: f64,
    cutoffs: &FitCutoffs,
) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    let mut fits = String::from("metric,alpha,xmin,n_tail,stderr\n");

    for m in Metric::ALL {
        let dist_name = format!("{}.csv", m.name());
        let ccdf_name = format!("{}_ccdf.csv", m.name());
        let dist_path = dir.join(&dist_name);
        let ccdf_path = dir.join(&ccdf_name);

        let bins = match set.integer(m) {
            Some(s) if !s.is_empty() => metrics::histogram(s, bin_ratio)?.bins,
            Some(_) => Vec::new(),
            None if set.entropy.is_empty() => Vec::new(),
            None => metrics::linear_histogram(&set.entropies(), ENTROPY_BIN_WIDTH)?,
        };
        let mut w = create(&dist_path)?;
        metrics::write_bins_csv(&bins, &mut w).map_err(io_at(&dist_path))?;
        w.flush().map_err(io_at(&dist_path))?;

        let table = set.ccdf(m);
        let mut w = create(&ccdf_path)?;
        (|| -> std::io::Result<()> {
            writeln!(w, "value,ccdf")?;
            for (v, p) in &table {
                writeln!(w, "{v},{p}")?;
            }
            w.flush()
        })()
        .map_err(io_at(&ccdf_path))?;

        entries.push((format!("distribution.{}", m.name()), dist_name));
        entries.push((format!("ccdf.{}", m.name()), ccdf_name));
        entries.push((format!("mean.{}", m.name()), ccdf_mean(&table).to_string()));

        if let Some(fit) = set.fit(m, cutoffs) {
            let xmin = m.cutoff(cutoffs).unwrap();
            match fit {
                Ok(f) => {
                    fits.push_str(&format!("{},{},{},{},{}\n", m.name(), f.alpha, f.xmin, f.n_tail, f.stderr));
                    entries.push((format!("alpha.{}", m.name()), f.alpha.to_string()));
                }
                Err(_) => {
                    let n_tail = set.integer(m).unwrap().iter().filter(|&&x| x >= xmin.max(1)).count();
                    fits.push_str(&format!("{},NaN,{},{},NaN\n", m.name(), xmin, n_tail));
                    entries.push((format!("alpha.{}", m.name()), "NaN".into()));
                }
            }
        }
    }

    let fits_path = dir.join("fits.csv");
    std::fs::write(&fits_path, fits).map_err(io_at(&fits_path))?;
    entries.push(("fits".into(), "fits.csv".into()));

    let users_path = dir.join("entropy_by_user.csv");
    let mut w = create(&users_path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "user_id,entropy")?;
        for (u, s) in &set.entropy {
            writeln!(w, "{u},{s}")?;
        }
        w.flush()
    })()
    .map_err(io_at(&users_path))?;
    entries.push(("entropy_by_user".into(), "entropy_by_user.csv".into()));

    entries.push((
        "metrics".into(),
        Metric::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
    ));
    Ok(entries)
}

/// Flat `key = value` record of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub entries: Vec<(String, String)>,
    /// Directory the manifest lives in; relative file entries resolve here.
    pub dir: PathBuf,
}

pub const MANIFEST_FILE: &str = "manifest.txt";

impl RunManifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn path_of(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|f| self.dir.join(f))
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn parse(text: &str, dir: PathBuf) -> Result<Self> {
        let mut m = RunManifest { entries: Vec::new(), dir };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("manifest line {}: expected key = value", i + 1)))?;
            m.push(k.trim(), v.trim());
        }
        Ok(m)
    }

    /// Reads a manifest file, or `manifest.txt` inside a run directory.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file).map_err(io_at(&file))?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        RunManifest::parse(&text, dir)
    }

    pub fn save(&self) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_text()).map_err(io_at(&path))?;
        Ok(path)
    }

    pub fn metrics(&self) -> Vec<String> {
        self.get("metrics")
            .map(|s| s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricComparison {
    pub metric: String,
    pub alpha_a: Option<f64>,
    pub alpha_b: Option<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    pub ks: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<MetricComparison>,
}

impl Comparison {
    pub fn get(&self, metric: &str) -> Option<&MetricComparison> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt = |a: Option<f64>| a.map_or_else(|| "NA".to_string(), |x| x.to_string());
        writeln!(out, "metric,alpha_a,alpha_b,mean_a,mean_b,ks")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.metric,
                opt(r.alpha_a),
                opt(r.alpha_b),
                r.mean_a,
                r.mean_b,
                r.ks
            )?;
        }
        Ok(())
    }
}

pub fn read_ccdf(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let bad = || Error::Parse { line: i + 1, msg: format!("bad ccdf row {l:?} in {}", display(path)) };
            let (v, p) = l.split_once(',').ok_or_else(bad)?;
            Ok((v.parse().map_err(|_| bad())?, p.parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Per-metric comparison of two runs. Both must report the same metrics.
pub fn compare_runs(a: &RunManifest, b: &RunManifest) -> Result<Comparison> {
    let (ma, mb) = (a.metrics(), b.metrics());
    if ma.is_empty() || ma != mb {
        return Err(Error::config(format!(
            "runs report different metrics: [{}] vs [{}]",
            ma.join(","),
            mb.join(",")
        )));
    }
    let mut rows = Vec::new();
    for metric in ma {
        let key = format!("ccdf.{metric}");
        let missing = || Error::config(format!("manifest lacks {key}"));
        let ta = read_ccdf(&a.path_of(&key).ok_or_else(missing)?)?;
        let tb = read_ccdf(&b.path_of(&key).ok_or_else(missing)?)?;
        let alpha = |m: &RunManifest| {
            m.get(&format!("alpha.{metric}"))
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
        };
        rows.push(MetricComparison {
            alpha_a: alpha(a),
            alpha_b: alpha(b),
            mean_a: ccdf_mean(&ta),
            mean_b: ccdf_mean(&tb),
            ks: ks_statistic(&ta, &tb),
            metric,
        });
    }
    Ok(Comparison { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_text_round_trip() {
        let mut m = RunManifest { entries: Vec::new(), dir: PathBuf::from("x") };
        m.push("model", "abc");
        m.push("mean.session_size", 2.25);
        let back = RunManifest::parse(&m.to_text(), "x".into()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("mean.session_size"), Some("2.25"));
        assert!(RunManifest::parse("no equals here", "x".into()).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(Metric::from_name(m.name()), Some(m));
        }
    }

    #[test]
    fn mismatched_metric_sets_are_rejected() {
        let mut a = RunManifest::default();
        a.push("metrics", "page_traffic,entropy");
        let mut b = RunManifest::default();
        b.push("metrics", "page_traffic");
        assert!(matches!(compare_runs(&a, &b), Err(Error::Config(_))));
    }
}
