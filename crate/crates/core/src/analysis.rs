//! Empirical distributions and estimators: histograms, CCDFs, thermal and
//! power-law tail fits, Kolmogorov-Smirnov distance, tail thinning and
//! demand summaries. Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest in-window samples accepted by [`fit_exponential`].
pub const MIN_WINDOW_SAMPLES: usize = 10;
/// Fewest tail samples accepted by [`fit_pareto_hill`].
pub const MIN_TAIL_SAMPLES: usize = 10;
/// Bins of the in-window histogram used for the log-linear r².
pub const DEFAULT_R2_BINS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub binning: Binning,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Count divided by (all samples × bin width); integrates to the in-range
    /// fraction.
    pub fn densities(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| {
                if n > 0.0 {
                    c as f64 / (n * (e[1] - e[0]))
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|e| match self.binning {
                Binning::Linear => 0.5 * (e[0] + e[1]),
                Binning::Log => (e[0] * e[1]).sqrt(),
            })
            .collect()
    }

    /// Center of the most populated bin (first one on ties).
    pub fn mode(&self) -> Option<f64> {
        let (idx, &count) = self
            .counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        (count > 0).then(|| self.centers()[idx])
    }
}

/// Bins `values` into `n_bins` half-open bins `[e_k, e_{k+1})` over `[lo, hi)`.
pub fn make_histogram(
    values: &[f64],
    binning: Binning,
    n_bins: usize,
    lo: f64,
    hi: f64,
) -> Result<Histogram> {
    if n_bins == 0 {
        return Err(Error::usage("histogram needs at least one bin"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::usage(format!(
            "invalid histogram range [{lo}, {hi})"
        )));
    }
    let edges: Vec<f64> = match binning {
        Binning::Linear => {
            let width = (hi - lo) / n_bins as f64;
            (0..=n_bins)
                .map(|k| {
                    if k == n_bins {
                        hi
                    } else {
                        lo + k as f64 * width
                    }
                })
                .collect()
        }
        Binning::Log => {
            if !(lo > 0.0) {
                return Err(Error::usage(format!("log binning needs lo > 0, got {lo}")));
            }
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / n_bins as f64;
            (0..=n_bins)
                .map(|k| match k {
                    0 => lo,
                    k if k == n_bins => hi,
                    k => 10f64.powf(a + k as f64 * step),
                })
                .collect()
        }
    };
    let mut counts = vec![0u64; n_bins];
    let (mut underflow, mut overflow) = (0, 0);
    for &v in values {
        if v < lo {
            underflow += 1;
        } else if v >= hi {
            overflow += 1;
        } else {
            let k = edges.partition_point(|&e| e <= v) - 1;
            counts[k.min(n_bins - 1)] += 1;
        }
    }
    Ok(Histogram {
        edges,
        counts,
        binning,
        underflow,
        overflow,
    })
}

/// Empirical complementary CDF with the inclusive convention `P(X >= x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccdf {
    sorted: Vec<f64>,
}

impl Ccdf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `>= x`.
    pub fn at(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// `(x, C(x))` at each distinct sample value, ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            if out.last().is_none_or(|&(x, _)| x != v) {
                out.push((v, (self.sorted.len() - i) as f64 / n));
            }
        }
        out
    }
}

pub fn make_ccdf(values: &[f64]) -> Result<Ccdf> {
    if values.is_empty() {
        return Err(Error::usage("CCDF of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::usage("CCDF input contains NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ccdf { sorted })
}

/// Fit window `[lo, hi]`; `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl FitWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        FitWindow { lo, hi: Some(hi) }
    }

    pub fn from(lo: f64) -> Self {
        FitWindow { lo, hi: None }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && self.hi.is_none_or(|hi| v <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub temperature: f64,
    pub window: FitWindow,
    pub n_in_window: usize,
    pub r_squared_loglinear: f64,
}

/// Mean of `v - lo` over the samples inside the window.
pub fn mean_excess(values: &[f64], window: FitWindow) -> Option<(f64, usize)> {
    let (sum, n) = values
        .iter()
        .filter(|&&v| window.contains(v))
        .fold((0.0, 0usize), |(s, n), &v| (s + (v - window.lo), n + 1));
    (n > 0).then(|| (sum / n as f64, n))
}

/// Mean of an exponential law of temperature `t` truncated to `[0, width]`.
fn truncated_mean(t: f64, width: f64) -> f64 {
    t - width / (width / t).exp_m1()
}

/// Temperature whose window-truncated exponential has the given mean excess.
/// For an unbounded window this is the mean excess itself.
pub fn temperature_from_mean_excess(excess: f64, width: Option<f64>) -> Result<f64> {
    if !(excess > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "mean excess {excess} gives a non-positive temperature"
        )));
    }
    let Some(width) = width else {
        return Ok(excess);
    };
    // The truncated mean rises monotonically from 0 (t -> 0) to width/2 (t -> inf).
    if excess >= 0.5 * width {
        return Err(Error::DegenerateFit(format!(
            "mean excess {excess} is not below half the window width {width}; \
             the in-window density does not decay"
        )));
    }
    let (mut lo, mut hi) = (excess * 1e-3, excess);
    while truncated_mean(hi, width) < excess {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::DegenerateFit("temperature diverges".into()));
        }
    }
    while truncated_mean(lo, width) > excess {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_mean(mid, width) < excess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares r² of (x, y) pairs.
fn r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
}

/// Exponential fit over a window using the default r² binning.
pub fn fit_exponential(values: &[f64], window: FitWindow) -> Result<ExponentialFit> {
    fit_exponential_binned(values, window, DEFAULT_R2_BINS)
}

/// Fits `P(w) ∝ exp(-(w - lo)/T)` to the samples inside `window`.
///
/// `T` is the maximum-likelihood temperature of the exponential truncated to
/// the window; for an unbounded window that is the mean excess over `lo`.
/// `r_squared_loglinear` is the r² of a straight line through
/// `(bin center, ln density)` of an `r2_bins`-bin linear histogram of the
/// window, empty bins skipped; it is 0 when fewer than three bins are
/// populated.
pub fn fit_exponential_binned(
    values: &[f64],
    window: FitWindow,
    r2_bins: usize,
) -> Result<ExponentialFit> {
    if let Some(hi) = window.hi {
        if !(hi > window.lo) {
            return Err(Error::usage(format!(
                "empty fit window [{}, {hi}]",
                window.lo
            )));
        }
    }
    let (excess, n_in_window) = mean_excess(values, window).unwrap_or((0.0, 0));
    if n_in_window < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_WINDOW_SAMPLES,
            got: n_in_window,
        });
    }
    let width = window.hi.map(|hi| hi - window.lo);
    let temperature = temperature_from_mean_excess(excess, width)?;

    let top = window.hi.unwrap_or_else(|| {
        values
            .iter()
            .copied()
            .filter(|&v| window.contains(v))
            .fold(window.lo, f64::max)
    });
    let r_squared_loglinear = if top > window.lo {
        let hist = make_histogram(
            values,
            Binning::Linear,
            r2_bins.max(1),
            window.lo,
            top.next_up(),
        )?;
        let points: Vec<(f64, f64)> = hist
            .centers()
            .into_iter()
            .zip(hist.densities())
            .filter(|&(_, d)| d > 0.0)
            .map(|(c, d)| (c, d.ln()))
            .collect();
        if points.len() >= 3 {
            r_squared(&points)
        } else {
            0.0
        }
    } else {
        0.0
    };

    Ok(ExponentialFit {
        temperature,
        window,
        n_in_window,
        r_squared_loglinear,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParetoFit {
    pub alpha: f64,
    pub xmin: f64,
    pub n_tail: usize,
}

/// Hill estimate `alpha = 1 + k / Σ ln(v / xmin)` over the `k` samples strictly
/// above `xmin`. Needs at least one such sample.
pub fn hill_estimate(values: &[f64], xmin: f64) -> Result<ParetoFit> {
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(Error::usage(format!(
            "xmin must be finite and > 0, got {xmin}"
        )));
    }
    if let Some(bad) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::usage(format!(
            "tail fit needs positive samples, got {bad}"
        )));
    }
    let (log_sum, n_tail) = values
        .iter()
        .filter(|&&v| v > xmin)
        .fold((0.0, 0usize), |(s, k), &v| (s + (v / xmin).ln(), k + 1));
    if n_tail == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(ParetoFit {
        alpha: 1.0 + n_tail as f64 / log_sum,
        xmin,
        n_tail,
    })
}

/// [`hill_estimate`] with the minimum tail size enforced.
pub fn fit_pareto_hill(values: &[f64], xmin: f64) -> Result<ParetoFit> {
    let fit = hill_estimate(values, xmin)?;
    if fit.n_tail < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_TAIL_SAMPLES,
            got: fit.n_tail,
        });
    }
    Ok(fit)
}

/// Sup-distance between the empirical CDF of `values` and `model_cdf`,
/// checked on both sides of every empirical step. The left side uses the
/// model at the next float below the sample, so step-shaped models are
/// handled exactly.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], model_cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::usage("KS distance of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::usage("KS input contains NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut start = 0;
    while start < sorted.len() {
        let x = sorted[start];
        let end = start + sorted[start..].partition_point(|&v| v == x);
        let after = end as f64 / n;
        let before = start as f64 / n;
        d = d
            .max((after - model_cdf(x)).abs())
            .max((model_cdf(x.next_down()) - before).abs());
        start = end;
    }
    Ok(d)
}

/// CDF of an exponential law of temperature `t` starting at `lo`.
pub fn exponential_cdf(t: f64, lo: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x <= lo {
            0.0
        } else {
            -(-(x - lo) / t).exp_m1()
        }
    }
}

/// Ratio of the empirical CCDF at `probe` to the thermal extrapolation
/// `C(hi) · exp(-(probe - hi)/T)` anchored at the window's upper edge.
/// Values below 1 mean the tail beyond the window is thinner than thermal.
pub fn tail_thinning_index(values: &[f64], fit: &ExponentialFit, probe: f64) -> Result<f64> {
    let Some(hi) = fit.window.hi else {
        return Err(Error::usage(
            "tail thinning needs a fit window with a finite upper edge",
        ));
    };
    if !(probe > hi) {
        return Err(Error::usage(format!(
            "probe {probe} lies inside the fit window [{}, {hi}]",
            fit.window.lo
        )));
    }
    let ccdf = make_ccdf(values)?;
    let beyond = ccdf.at(probe);
    if beyond == 0.0 {
        return Ok(0.0);
    }
    let thermal = ccdf.at(hi) * (-(probe - hi) / fit.temperature).exp();
    Ok(beyond / thermal)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandPoint {
    pub ratio: f64,
    pub mean_price: f64,
    pub std_price: f64,
    pub n: usize,
}

/// Mean and population standard deviation of the price samples of each run,
/// ordered by goods:money ratio (input order kept for equal ratios).
pub fn summarize_demand(runs: &[(f64, Vec<f64>)]) -> Result<Vec<DemandPoint>> {
    if runs.is_empty() {
        return Err(Error::usage("demand summary of an empty run set"));
    }
    let mut out = runs
        .iter()
        .map(|(ratio, prices)| {
            if prices.is_empty() {
                return Err(Error::usage(format!("ratio {ratio} has no price samples")));
            }
            let (mean, std) = mean_std(prices);
            Ok(DemandPoint {
                ratio: *ratio,
                mean_price: mean,
                std_price: std,
                n: prices.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(out)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and standard error of the mean (sample standard deviation / √n).
pub fn mean_standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Linear-interpolated sample quantile, `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::usage("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::usage(format!(
            "quantile level must lie in [0, 1], got {q}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    Ok(match sorted.get(i + 1) {
        Some(&next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    })
}
