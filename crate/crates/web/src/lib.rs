//! Browser bindings for the simulator. Each export runs a small simulation
//! and returns a flat `Float64Array` that the demo page draws on a canvas.

use kinex::analysis::{self, Binning};
use kinex::experiments::goods_for_ratio;
use kinex::market::{self, init_population, PriceRange};
use kinex::reference::{run_reference, ReferenceModel, SavingConfig};
use kinex::rng::{run_stream_id, INIT_STREAM};
use kinex::RngStream;
use wasm_bindgen::prelude::*;

/// Upper limit on encounters per call, so a slider cannot lock up the tab.
const MAX_ENCOUNTERS: u64 = 50_000_000;

fn check_budget(n_agents: usize, sweeps: u32) -> kinex::Result<()> {
    if n_agents as u64 * sweeps as u64 > MAX_ENCOUNTERS {
        return Err(kinex::Error::Usage(format!(
            "{n_agents} agents x {sweeps} sweeps exceeds the demo limit of {MAX_ENCOUNTERS} encounters"
        )));
    }
    Ok(())
}

/// Wealth CCDF of the buyer model after `sweeps` sweeps, as interleaved
/// `(wealth, P(W >= wealth))` pairs. Money totals `n_agents`.
pub fn wealth_ccdf(n_agents: usize, ratio: f64, sweeps: u32, seed: u64) -> kinex::Result<Vec<f64>> {
    check_budget(n_agents, sweeps)?;
    let money = n_agents as f64;
    let mut init = RngStream::new(seed, INIT_STREAM);
    let mut pop = init_population(
        n_agents,
        goods_for_ratio(ratio, money),
        money,
        PriceRange::default(),
        &mut init,
    )?;
    let mut rng = RngStream::new(seed, run_stream_id(0));
    market::run(&mut pop, sweeps as u64 * n_agents as u64, &[], &mut rng)?;
    let ccdf = analysis::make_ccdf(&pop.wealth())?;
    Ok(ccdf
        .points()
        .into_iter()
        .flat_map(|(x, c)| [x, c])
        .collect())
}

/// Price histograms of the buyer model at sweeps `0, s/100, s/10, s`:
/// `bins` counts per snapshot, concatenated, over the initial price range.
pub fn price_evolution(
    n_agents: usize,
    ratio: f64,
    sweeps: u32,
    seed: u64,
    bins: usize,
) -> kinex::Result<Vec<f64>> {
    check_budget(n_agents, sweeps)?;
    let money = n_agents as f64;
    let range = PriceRange::default();
    let mut init = RngStream::new(seed, INIT_STREAM);
    let mut pop = init_population(
        n_agents,
        goods_for_ratio(ratio, money),
        money,
        range,
        &mut init,
    )?;
    let n = n_agents as u64;
    let s = sweeps as u64;
    let mut at: Vec<u64> = [0, s / 100, s / 10, s].iter().map(|k| k * n).collect();
    at.dedup();
    let mut rng = RngStream::new(seed, run_stream_id(0));
    let series = market::run(&mut pop, s * n, &at, &mut rng)?;
    let hi = range.max + (range.max - range.min) * 1e-9 + range.max * 1e-12;
    let mut out = Vec::with_capacity(series.len() * bins);
    for snap in &series {
        let hist = analysis::make_histogram(&snap.prices(), Binning::Linear, bins, range.min, hi)?;
        out.extend(hist.counts.iter().map(|&c| c as f64));
    }
    Ok(out)
}

/// Money density of the pooled-split (`lambda = 0`) or saving model after
/// `sweeps` sweeps, on `bins` linear bins over `[0, 5)` in units of the mean.
pub fn money_density(
    lambda: f64,
    n_agents: usize,
    sweeps: u32,
    seed: u64,
    bins: usize,
) -> kinex::Result<Vec<f64>> {
    check_budget(n_agents, sweeps)?;
    let model = if lambda == 0.0 {
        ReferenceModel::Dy
    } else {
        ReferenceModel::Cc(SavingConfig::new(lambda)?)
    };
    let mut rng = RngStream::new(seed, run_stream_id(0));
    let run = run_reference(model, n_agents, 1.0, sweeps as u64, &[], &mut rng)?;
    let hist = analysis::make_histogram(&run.money, Binning::Linear, bins, 0.0, 5.0)?;
    Ok(hist.densities())
}

fn js(r: kinex::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = wealthCcdf)]
pub fn wealth_ccdf_js(
    n_agents: usize,
    ratio: f64,
    sweeps: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    js(wealth_ccdf(n_agents, ratio, sweeps, seed as u64))
}

#[wasm_bindgen(js_name = priceEvolution)]
pub fn price_evolution_js(
    n_agents: usize,
    ratio: f64,
    sweeps: u32,
    seed: u32,
    bins: usize,
) -> Result<Vec<f64>, JsError> {
    js(price_evolution(n_agents, ratio, sweeps, seed as u64, bins))
}

#[wasm_bindgen(js_name = moneyDensity)]
pub fn money_density_js(
    lambda: f64,
    n_agents: usize,
    sweeps: u32,
    seed: u32,
    bins: usize,
) -> Result<Vec<f64>, JsError> {
    js(money_density(lambda, n_agents, sweeps, seed as u64, bins))
}
