//! Experiment runners and their file outputs.
//!
//! Runners are pure: they return the bytes of every output file, and
//! [`write_outputs`] persists them together with a `manifest.json` listing a
//! SHA-256 checksum per file. Independent runs inside one experiment draw
//! from distinct streams of the master seed (stream = position in the
//! ratio/model list), while population initialization always uses the shared
//! init stream, so every run of a sweep starts from the same price beliefs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, Binning, ExponentialFit, FitWindow, ParetoFit};
use crate::error::{Error, Result};
use crate::market::{self, Agent, Population, PriceRange, SnapshotSeries};
use crate::reference::{self, ReferenceModel, SavingConfig};
use crate::rng::{run_stream_id, RngStream, INIT_STREAM};

pub const CODE_VERSION: &str = concat!("kinex ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Buyer,
    Dy,
    Cc,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Buyer => "buyer",
            ModelKind::Dy => "dy",
            ModelKind::Cc => "cc",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buyer" => Ok(ModelKind::Buyer),
            "dy" => Ok(ModelKind::Dy),
            "cc" => Ok(ModelKind::Cc),
            other => Err(Error::config(
                "model",
                format!("expected buyer, dy or cc, got {other:?}"),
            )),
        }
    }
}

/// The two goods supplies of the price-evolution figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// One unit of goods per unit of money.
    OneToOne,
    /// A hundred units of money per unit of goods.
    HundredToOne,
}

impl Preset {
    /// Goods:money ratio of the preset.
    pub fn ratio(&self) -> f64 {
        match self {
            Preset::OneToOne => 1.0,
            Preset::HundredToOne => 0.01,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1:1" => Ok(Preset::OneToOne),
            "100:1" => Ok(Preset::HundredToOne),
            other => Err(Error::config(
                "preset",
                format!("expected \"1:1\" or \"100:1\", got {other:?}"),
            )),
        }
    }
}

/// Fully resolved experiment parameters. Time is counted in sweeps of
/// `n_agents` encounters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Saving propensity of the `cc` model.
    pub lambda: f64,
    pub n_agents: usize,
    /// Explicit goods total; when absent, goods = round(ratio × money).
    pub total_goods: Option<u64>,
    /// Goods:money ratio; used when `total_goods` is absent (default 1).
    pub ratio: Option<f64>,
    pub total_money: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub n_sweeps: u64,
    pub burn_in_sweeps: u64,
    pub snapshot_sweeps: Vec<u64>,
    pub seed: u64,
    pub output_dir: String,
    /// Goods:money ratios of a demand sweep.
    pub ratios: Vec<f64>,
    /// Thermal fit window `[lo, hi]`; quantile-based when absent.
    pub thermal_window: Option<[f64; 2]>,
    /// Tail-thinning probe; `hi + 3T` when absent.
    pub probe: Option<f64>,
    pub hist_bins: usize,
    /// Bins of the in-window histogram behind the log-linear r².
    pub fit_bins: usize,
    /// Number of late snapshots pooled into the stationary sample
    /// (1 = final state only).
    pub average_snapshots: usize,
    pub average_interval_sweeps: u64,
    /// Run independent simulations on the rayon pool.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::Buyer,
            lambda: 0.5,
            n_agents: 1000,
            total_goods: None,
            ratio: None,
            total_money: 1000.0,
            h_min: 0.5,
            h_max: 1.5,
            n_sweeps: 10_000,
            burn_in_sweeps: 1_000,
            snapshot_sweeps: vec![0, 10, 100, 1_000, 10_000],
            seed: 42,
            output_dir: "out".into(),
            ratios: vec![0.1, 0.5, 1.0, 2.0, 10.0],
            thermal_window: None,
            probe: None,
            hist_bins: 50,
            fit_bins: analysis::DEFAULT_R2_BINS,
            average_snapshots: 1,
            average_interval_sweeps: 10,
            parallel: true,
        }
    }
}

/// Goods total for a ratio at fixed money.
pub fn goods_for_ratio(ratio: f64, money: f64) -> u64 {
    (ratio * money).round() as u64
}

impl ExperimentConfig {
    pub fn goods(&self) -> u64 {
        self.total_goods
            .unwrap_or_else(|| goods_for_ratio(self.ratio.unwrap_or(1.0), self.total_money))
    }

    /// Goods:money ratio actually simulated.
    pub fn effective_ratio(&self) -> f64 {
        match (self.total_goods, self.ratio) {
            (None, Some(r)) => r,
            (None, None) => 1.0,
            (Some(g), _) => g as f64 / self.total_money,
        }
    }

    pub fn price_range(&self) -> PriceRange {
        PriceRange {
            min: self.h_min,
            max: self.h_max,
        }
    }

    pub fn mean_money(&self) -> f64 {
        self.total_money / self.n_agents as f64
    }

    pub fn reference_model(&self, kind: ModelKind) -> Result<Option<ReferenceModel>> {
        Ok(match kind {
            ModelKind::Buyer => None,
            ModelKind::Dy => Some(ReferenceModel::Dy),
            ModelKind::Cc => Some(ReferenceModel::Cc(SavingConfig::new(self.lambda)?)),
        })
    }

    /// Checks every invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::config(
                "n_agents",
                format!("must be >= 2, got {}", self.n_agents),
            ));
        }
        if !(self.total_money > 0.0) || !self.total_money.is_finite() {
            return Err(Error::config(
                "total_money",
                format!("must be finite and > 0, got {}", self.total_money),
            ));
        }
        if let Some(r) = self.ratio {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::config("ratio", format!("must be > 0, got {r}")));
            }
        }
        if self.ratio.is_some() && self.total_goods.is_some() {
            return Err(Error::config(
                "ratio",
                "set either ratio or total_goods, not both",
            ));
        }
        PriceRange::new(self.h_min, self.h_max)?;
        SavingConfig::new(self.lambda)?;
        if self.burn_in_sweeps > self.n_sweeps {
            return Err(Error::config(
                "burn_in_sweeps",
                format!("{} exceeds n_sweeps {}", self.burn_in_sweeps, self.n_sweeps),
            ));
        }
        market::validate_snapshot_indices(&self.snapshot_sweeps, self.n_sweeps, "snapshot_sweeps")?;
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(Error::config(
                "ratios",
                format!("ratios must be > 0, got {r}"),
            ));
        }
        if let Some([lo, hi]) = self.thermal_window {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::config(
                    "thermal_window",
                    format!("needs finite lo < hi, got [{lo}, {hi}]"),
                ));
            }
            if let Some(p) = self.probe {
                if !(p > hi) {
                    return Err(Error::config(
                        "probe",
                        format!("must lie above the thermal window edge {hi}, got {p}"),
                    ));
                }
            }
        }
        if self.hist_bins == 0 {
            return Err(Error::config("hist_bins", "must be >= 1"));
        }
        if self.fit_bins < 3 {
            return Err(Error::config(
                "fit_bins",
                format!("must be >= 3, got {}", self.fit_bins),
            ));
        }
        if self.average_snapshots == 0 {
            return Err(Error::config("average_snapshots", "must be >= 1"));
        }
        let span = (self.average_snapshots as u64 - 1).saturating_mul(self.average_interval_sweeps);
        if self.average_snapshots > 1
            && (self.average_interval_sweeps == 0 || span > self.n_sweeps - self.burn_in_sweeps)
        {
            return Err(Error::config(
                "average_snapshots",
                format!(
                    "{} snapshots every {} sweeps do not fit after the burn-in ({} of {} sweeps)",
                    self.average_snapshots,
                    self.average_interval_sweeps,
                    self.burn_in_sweeps,
                    self.n_sweeps
                ),
            ));
        }
        Ok(())
    }

    /// Sweeps at which the stationary sample is captured, ascending.
    pub fn averaging_sweeps(&self) -> Vec<u64> {
        (0..self.average_snapshots as u64)
            .rev()
            .map(|k| self.n_sweeps - k * self.average_interval_sweeps)
            .collect()
    }
}

/// One file produced by a runner.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        OutputFile {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    pub fn text(&self) -> &str {
        std::str::from_utf8(&self.bytes).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub files: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes every file into `dir`, then `manifest.json`. The manifest is only
/// written once all data files are on disk.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    files: &[OutputFile],
    started: Instant,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut checksums = BTreeMap::new();
    for f in files {
        if f.name == "manifest.json" || f.name.contains(['/', '\\']) {
            return Err(Error::usage(format!(
                "invalid output file name {:?}",
                f.name
            )));
        }
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.bytes).map_err(|e| Error::io(&path, e))?;
        checksums.insert(f.name.clone(), sha256_hex(&f.bytes));
    }
    let manifest = Manifest {
        config: config.clone(),
        code_version: CODE_VERSION.to_string(),
        files: checksums,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn map_runs<T, F>(n: usize, parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Simulation drivers

/// Buyer-model population for the configured money and the given goods.
pub fn init_buyer(config: &ExperimentConfig, goods: u64) -> Result<Population> {
    let mut init = RngStream::new(config.seed, INIT_STREAM);
    market::init_population(
        config.n_agents,
        goods,
        config.total_money,
        config.price_range(),
        &mut init,
    )
}

/// Runs the buyer model for `n_sweeps`, capturing the given sweeps.
pub fn run_buyer(
    config: &ExperimentConfig,
    goods: u64,
    stream_index: usize,
    snapshot_sweeps: &[u64],
) -> Result<(Population, SnapshotSeries)> {
    let mut pop = init_buyer(config, goods)?;
    let mut rng = RngStream::new(config.seed, run_stream_id(stream_index));
    let n = config.n_agents as u64;
    let steps: Vec<u64> = snapshot_sweeps.iter().map(|s| s * n).collect();
    let series = market::run(&mut pop, config.n_sweeps * n, &steps, &mut rng)?;
    Ok((pop, series))
}

/// Final agent states plus the pooled stationary sample of one model run.
#[derive(Debug, Clone)]
pub struct StationarySample {
    pub model: ModelKind,
    /// Final state; reference models report money with zero goods and price.
    pub agents: Vec<Agent>,
    /// Wealth (money for reference models) pooled over the averaging snapshots.
    pub wealth: Vec<f64>,
    /// Buyer-model prices pooled the same way (empty for reference models).
    pub prices: Vec<f64>,
}

pub fn stationary_sample(
    config: &ExperimentConfig,
    model: ModelKind,
    goods: u64,
    stream_index: usize,
) -> Result<StationarySample> {
    let sweeps = config.averaging_sweeps();
    match config.reference_model(model)? {
        None => {
            let (pop, series) = run_buyer(config, goods, stream_index, &sweeps)?;
            Ok(StationarySample {
                model,
                agents: pop.agents().to_vec(),
                wealth: series
                    .iter()
                    .flat_map(|s| s.wealth.iter().copied())
                    .collect(),
                prices: series.iter().flat_map(|s| s.prices()).collect(),
            })
        }
        Some(reference_model) => {
            let mut rng = RngStream::new(config.seed, run_stream_id(stream_index));
            let run = reference::run_reference(
                reference_model,
                config.n_agents,
                config.mean_money(),
                config.n_sweeps,
                &sweeps,
                &mut rng,
            )?;
            Ok(StationarySample {
                model,
                agents: run.money.iter().map(|&m| Agent::new(0, m, 0.0)).collect(),
                wealth: run.pooled(),
                prices: Vec::new(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Wealth distribution

/// Every fit of one wealth sample; failures are kept as messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthFits {
    pub model: String,
    pub n_samples: usize,
    pub temperature: Option<f64>,
    pub window_lo: f64,
    pub window_hi: f64,
    pub n_in_window: Option<usize>,
    pub r_squared_loglinear: Option<f64>,
    pub ks: Option<f64>,
    pub alpha: Option<f64>,
    pub xmin: f64,
    pub n_tail: Option<usize>,
    pub probe: Option<f64>,
    pub tail_thinning_index: Option<f64>,
    pub exponential_error: Option<String>,
    pub pareto_error: Option<String>,
    pub thinning_error: Option<String>,
}

/// Default thermal window: median to 95th percentile for the buyer model,
/// zero to 95th percentile for the money-exchange models.
pub fn default_window(model: ModelKind, values: &[f64]) -> Result<[f64; 2]> {
    let hi = analysis::quantile(values, 0.95)?;
    let lo = match model {
        ModelKind::Buyer => analysis::quantile(values, 0.5)?,
        _ => 0.0,
    };
    Ok([lo, hi])
}

/// Thermal fit, KS distance to it, Hill tail above the window and tail
/// thinning, for one wealth sample.
pub fn fit_wealth(
    config: &ExperimentConfig,
    model: ModelKind,
    values: &[f64],
) -> Result<WealthFits> {
    let [lo, hi] = match config.thermal_window {
        Some(w) => w,
        None => default_window(model, values)?,
    };
    let window = FitWindow::new(lo, hi);
    let mut out = WealthFits {
        model: model.name().into(),
        n_samples: values.len(),
        temperature: None,
        window_lo: lo,
        window_hi: hi,
        n_in_window: None,
        r_squared_loglinear: None,
        ks: None,
        alpha: None,
        xmin: hi,
        n_tail: None,
        probe: None,
        tail_thinning_index: None,
        exponential_error: None,
        pareto_error: None,
        thinning_error: None,
    };

    let exp_fit: Option<ExponentialFit> =
        match analysis::fit_exponential_binned(values, window, config.fit_bins) {
            Ok(f) => Some(f),
            Err(e) => {
                out.exponential_error = Some(e.to_string());
                None
            }
        };
    if let Some(fit) = &exp_fit {
        out.temperature = Some(fit.temperature);
        out.n_in_window = Some(fit.n_in_window);
        out.r_squared_loglinear = Some(fit.r_squared_loglinear);
        let above: Vec<f64> = values
            .iter()
            .filter(|&&v| v >= lo)
            .map(|v| v - lo)
            .collect();
        out.ks =
            analysis::ks_distance(&above, analysis::exponential_cdf(fit.temperature, 0.0)).ok();
        let probe = config.probe.unwrap_or(hi + 3.0 * fit.temperature);
        out.probe = Some(probe);
        match analysis::tail_thinning_index(values, fit, probe) {
            Ok(i) => out.tail_thinning_index = Some(i),
            Err(e) => out.thinning_error = Some(e.to_string()),
        }
    } else {
        out.thinning_error = Some("no thermal fit".into());
    }

    let pareto: Result<ParetoFit> = if hi > 0.0 {
        let positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
        analysis::fit_pareto_hill(&positive, hi)
    } else {
        Err(Error::usage("tail threshold must be > 0"))
    };
    match pareto {
        Ok(p) => {
            out.alpha = Some(p.alpha);
            out.n_tail = Some(p.n_tail);
        }
        Err(e) => out.pareto_error = Some(e.to_string()),
    }
    Ok(out)
}

fn histogram_csv(hist: &analysis::Histogram) -> String {
    let mut s = String::from("bin_left,bin_right,count,density\n");
    for ((e, c), d) in hist
        .edges
        .windows(2)
        .zip(&hist.counts)
        .zip(hist.densities())
    {
        let _ = writeln!(s, "{},{},{},{}", e[0], e[1], c, d);
    }
    s
}

fn empty_histogram_csv() -> String {
    String::from("bin_left,bin_right,count,density\n")
}

/// Linear histogram over `[0, max]` and log histogram over the positive
/// range of `values`.
fn wealth_histograms(values: &[f64], bins: usize) -> Result<(String, String)> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let lin_lo = min.min(0.0);
    let lin_hi = if max > lin_lo {
        max.next_up()
    } else {
        lin_lo + 1.0
    };
    let linear = histogram_csv(&analysis::make_histogram(
        values,
        Binning::Linear,
        bins,
        lin_lo,
        lin_hi,
    )?);
    let min_pos = values
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let log = if min_pos.is_finite() {
        histogram_csv(&analysis::make_histogram(
            values,
            Binning::Log,
            bins,
            min_pos,
            max.next_up(),
        )?)
    } else {
        empty_histogram_csv()
    };
    Ok((linear, log))
}

fn ccdf_csv(values: &[f64]) -> Result<String> {
    let mut s = String::from("x,ccdf\n");
    for (x, c) in analysis::make_ccdf(values)?.points() {
        let _ = writeln!(s, "{x},{c}");
    }
    Ok(s)
}

fn samples_csv(agents: &[Agent]) -> String {
    let mut s = String::from("agent_id,b,d,h,wealth\n");
    for (i, a) in agents.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i,
            a.goods,
            a.money,
            a.price,
            a.wealth()
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct WealthReport {
    pub fits: WealthFits,
    pub files: Vec<OutputFile>,
}

/// CCDF, histograms and fits of a wealth sample. `agents` fills
/// `wealth_samples.csv`; `values` is the (possibly pooled) sample analysed.
pub fn wealth_report(
    config: &ExperimentConfig,
    model: ModelKind,
    agents: &[Agent],
    values: &[f64],
) -> Result<WealthReport> {
    if values.is_empty() {
        return Err(Error::usage("no wealth samples to analyse"));
    }
    let fits = fit_wealth(config, model, values)?;
    let (linear, log) = wealth_histograms(values, config.hist_bins)?;
    let mut fits_json = serde_json::to_vec_pretty(&fits)?;
    fits_json.push(b'\n');
    let files = vec![
        OutputFile::new("wealth_samples.csv", samples_csv(agents)),
        OutputFile::new("wealth_ccdf.csv", ccdf_csv(values)?),
        OutputFile::new("wealth_hist_linear.csv", linear),
        OutputFile::new("wealth_hist_log.csv", log),
        OutputFile::new("fits.json", fits_json),
    ];
    Ok(WealthReport { fits, files })
}

/// Simulates the configured model and reports its stationary wealth
/// distribution (wealth = money + price × goods).
pub fn run_wealth_experiment(config: &ExperimentConfig) -> Result<WealthReport> {
    config.validate()?;
    let sample = stationary_sample(config, config.model, config.goods(), 0)?;
    wealth_report(config, config.model, &sample.agents, &sample.wealth)
}

/// Parses a `wealth_samples.csv` back into agents.
pub fn read_wealth_samples(path: &Path) -> Result<Vec<Agent>> {
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let expected = ["agent_id", "b", "d", "h", "wealth"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(bad(format!("expected header {}", expected.join(","))));
    }
    let mut agents = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let goods = field(1)
            .parse::<u64>()
            .map_err(|e| bad(format!("row {}: b: {e}", row + 1)))?;
        let num = |i: usize, name: &str| {
            field(i)
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {name}: {e}", row + 1)))
        };
        agents.push(Agent::new(goods, num(2, "d")?, num(3, "h")?));
    }
    Ok(agents)
}

// ---------------------------------------------------------------------------
// Price evolution

#[derive(Debug, Clone)]
pub struct PriceEvolution {
    /// `(sweep, mean price)` per snapshot.
    pub mean_price: Vec<(u64, f64)>,
    pub files: Vec<OutputFile>,
}

/// Histogram of agent prices at each configured snapshot sweep, binned over
/// the initial price range.
pub fn run_price_evolution(config: &ExperimentConfig) -> Result<PriceEvolution> {
    config.validate()?;
    if config.snapshot_sweeps.is_empty() {
        return Err(Error::config(
            "snapshot_sweeps",
            "price evolution needs at least one snapshot",
        ));
    }
    let (_, series) = run_buyer(config, config.goods(), 0, &config.snapshot_sweeps)?;
    let pad = ((config.h_max - config.h_min) * 1e-9).max(config.h_max * 1e-12);
    let (lo, hi) = (config.h_min, config.h_max + pad);
    let n = config.n_agents as u64;
    let mut files = Vec::with_capacity(series.len());
    let mut mean_price = Vec::with_capacity(series.len());
    for snap in &series {
        let sweep = snap.step / n;
        let prices = snap.prices();
        let hist = analysis::make_histogram(&prices, Binning::Linear, config.hist_bins, lo, hi)?;
        files.push(OutputFile::new(
            format!("price_hist_t{sweep}.csv"),
            histogram_csv(&hist),
        ));
        mean_price.push((sweep, snap.mean_price()));
    }
    Ok(PriceEvolution { mean_price, files })
}

// ---------------------------------------------------------------------------
// Demand sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandRow {
    pub ratio: f64,
    pub mean_price: f64,
    pub std_price: f64,
    pub n_agents: usize,
    pub n_sweeps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DemandSweep {
    pub rows: Vec<DemandRow>,
    pub files: Vec<OutputFile>,
}

/// One buyer-model run per ratio (goods scaled at fixed money), summarized by
/// the mean and spread of agent prices in the stationary sample.
pub fn run_demand_sweep(config: &ExperimentConfig) -> Result<DemandSweep> {
    config.validate()?;
    if config.ratios.len() < 2 {
        return Err(Error::config(
            "ratios",
            format!(
                "a demand sweep needs >= 2 ratios, got {}",
                config.ratios.len()
            ),
        ));
    }
    let runs = map_runs(config.ratios.len(), config.parallel, |i| {
        let ratio = config.ratios[i];
        let goods = goods_for_ratio(ratio, config.total_money);
        let sample = stationary_sample(config, ModelKind::Buyer, goods, i)?;
        Ok((ratio, sample.prices))
    })?;
    let points = analysis::summarize_demand(&runs)?;
    let rows: Vec<DemandRow> = points
        .into_iter()
        .map(|p| DemandRow {
            ratio: p.ratio,
            mean_price: p.mean_price,
            std_price: p.std_price,
            n_agents: config.n_agents,
            n_sweeps: config.n_sweeps,
            seed: config.seed,
        })
        .collect();
    let mut csv = String::from("ratio,mean_price,std_price,n_agents,n_sweeps,seed\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.ratio, r.mean_price, r.std_price, r.n_agents, r.n_sweeps, r.seed
        );
    }
    Ok(DemandSweep {
        rows,
        files: vec![OutputFile::new("demand_curve.csv", csv)],
    })
}

// ---------------------------------------------------------------------------
// Model comparison

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: String,
    /// Goods:money ratio for the buyer model, saving propensity for `cc`, 0 for `dy`.
    pub param: f64,
    pub temperature: Option<f64>,
    pub ks: Option<f64>,
    pub alpha: Option<f64>,
    pub thinning_index: Option<f64>,
    pub fits: WealthFits,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub files: Vec<OutputFile>,
}

/// Buyer, pooled-split and saving models at matched size, money and run
/// length. The configured thermal window applies to the buyer row only; the
/// money-exchange rows use their default window.
pub fn run_comparison(config: &ExperimentConfig) -> Result<Comparison> {
    config.validate()?;
    let models = [ModelKind::Buyer, ModelKind::Dy, ModelKind::Cc];
    let rows = map_runs(models.len(), config.parallel, |i| {
        let model = models[i];
        let sample = stationary_sample(config, model, config.goods(), i)?;
        let mut cfg = config.clone();
        if model != ModelKind::Buyer {
            cfg.thermal_window = None;
            cfg.probe = None;
        }
        let fits = fit_wealth(&cfg, model, &sample.wealth)?;
        let param = match model {
            ModelKind::Buyer => config.effective_ratio(),
            ModelKind::Dy => 0.0,
            ModelKind::Cc => config.lambda,
        };
        Ok(ComparisonRow {
            model: model.name().into(),
            param,
            temperature: fits.temperature,
            ks: fits.ks,
            alpha: fits.alpha,
            thinning_index: fits.tail_thinning_index,
            fits,
        })
    })?;
    let mut csv = String::from("model,param,T,ks,alpha,thinning_index\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.model,
            r.param,
            opt(r.temperature),
            opt(r.ks),
            opt(r.alpha),
            opt(r.thinning_index)
        );
    }
    Ok(Comparison {
        rows,
        files: vec![OutputFile::new("comparison.csv", csv)],
    })
}

/// Where a runner's files go.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    PathBuf::from(&config.output_dir)
}
