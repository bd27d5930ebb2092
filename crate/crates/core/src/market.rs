//! The buyer-model kinetic economy.
//!
//! Agents hold whole units of goods, money and a private price. Encounters are
//! random ordered (buyer, seller) pairs. The seller offers one unit at its own
//! price; the buyer takes it when the price is no higher than its own, or at
//! any price when it holds no goods, provided it can pay. A buyer adopts the
//! price it paid. Money and goods are conserved; prices and wealth are not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub goods: u64,
    pub money: f64,
    /// Price perception, currency per unit good. Always positive.
    pub price: f64,
}

impl Agent {
    pub fn new(goods: u64, money: f64, price: f64) -> Self {
        Agent {
            goods,
            money,
            price,
        }
    }

    /// Money plus goods valued at the agent's own price.
    pub fn wealth(&self) -> f64 {
        agent_wealth(self)
    }
}

pub fn agent_wealth(agent: &Agent) -> f64 {
    agent.money + agent.price * agent.goods as f64
}

/// Closed interval the initial prices are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRange {
    pub min: f64,
    pub max: f64,
}

impl PriceRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0) || !min.is_finite() {
            return Err(Error::config("h_min", format!("must be > 0, got {min}")));
        }
        if !(max >= min) || !max.is_finite() {
            return Err(Error::config(
                "h_max",
                format!("must be finite and >= h_min ({min}), got {max}"),
            ));
        }
        Ok(PriceRange { min, max })
    }
}

impl Default for PriceRange {
    fn default() -> Self {
        PriceRange { min: 0.5, max: 1.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    agents: Vec<Agent>,
    total_goods: u64,
    total_money: f64,
    step_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Totals {
    pub goods: u64,
    pub money: f64,
    pub wealth: f64,
}

impl Population {
    /// Builds a population from explicit agents, caching their totals.
    pub fn from_agents(agents: Vec<Agent>) -> Result<Self> {
        for (i, a) in agents.iter().enumerate() {
            if !(a.money >= 0.0) || !a.money.is_finite() {
                return Err(Error::config(
                    format!("agents[{i}].money"),
                    "must be finite and >= 0",
                ));
            }
            if !(a.price > 0.0) || !a.price.is_finite() {
                return Err(Error::config(
                    format!("agents[{i}].price"),
                    "must be finite and > 0",
                ));
            }
        }
        let total_goods = agents.iter().map(|a| a.goods).sum();
        let total_money = agents.iter().map(|a| a.money).sum();
        Ok(Population {
            agents,
            total_goods,
            total_money,
            step_count: 0,
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Goods total fixed at construction.
    pub fn total_goods(&self) -> u64 {
        self.total_goods
    }

    /// Money total fixed at construction.
    pub fn total_money(&self) -> f64 {
        self.total_money
    }

    /// Encounters performed so far, traded or not.
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn wealth(&self) -> Vec<f64> {
        self.agents.iter().map(agent_wealth).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.price).collect()
    }

    pub fn mean_price(&self) -> f64 {
        self.agents.iter().map(|a| a.price).sum::<f64>() / self.agents.len() as f64
    }
}

/// Sums recomputed from the agents (not the cached totals).
pub fn population_totals(population: &Population) -> Totals {
    let mut goods = 0u64;
    let mut money = 0.0;
    let mut wealth = 0.0;
    for a in &population.agents {
        goods += a.goods;
        money += a.money;
        wealth += agent_wealth(a);
    }
    Totals {
        goods,
        money,
        wealth,
    }
}

/// Creates `n` agents with goods split as evenly as possible (remainder to the
/// lowest indices), money split equally, and prices drawn uniformly from
/// `prices`, one draw per agent in index order.
pub fn init_population(
    n: usize,
    total_goods: u64,
    total_money: f64,
    prices: PriceRange,
    rng: &mut RngStream,
) -> Result<Population> {
    if n < 2 {
        return Err(Error::config("n_agents", format!("must be >= 2, got {n}")));
    }
    if !(total_money >= 0.0) || !total_money.is_finite() {
        return Err(Error::config(
            "total_money",
            format!("must be finite and >= 0, got {total_money}"),
        ));
    }
    let prices = PriceRange::new(prices.min, prices.max)?;

    let base = total_goods / n as u64;
    let remainder = (total_goods % n as u64) as usize;
    let money = total_money / n as f64;
    let span = prices.max - prices.min;
    let agents = (0..n)
        .map(|i| {
            let goods = base + u64::from(i < remainder);
            let price = (prices.min + rng.next_f64() * span).min(prices.max);
            Agent::new(goods, money, price)
        })
        .collect();

    Ok(Population {
        agents,
        total_goods,
        total_money,
        step_count: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncounterOutcome {
    pub buyer: usize,
    pub seller: usize,
    pub traded: bool,
    /// The buyer paid more than its own price because it held no goods.
    pub forced: bool,
    pub price: Option<f64>,
    pub quantity: u64,
}

#[inline]
fn trade(agents: &mut [Agent], buyer: usize, seller: usize) -> EncounterOutcome {
    let offer = agents[seller].price;
    let b = agents[buyer];
    let s = agents[seller];
    let wants = offer <= b.price || b.goods == 0;
    if s.goods >= 1 && b.money >= offer && wants {
        let forced = offer > b.price;
        agents[buyer] = Agent::new(b.goods + 1, b.money - offer, offer);
        agents[seller] = Agent::new(s.goods - 1, s.money + offer, s.price);
        EncounterOutcome {
            buyer,
            seller,
            traded: true,
            forced,
            price: Some(offer),
            quantity: 1,
        }
    } else {
        EncounterOutcome {
            buyer,
            seller,
            traded: false,
            forced: false,
            price: None,
            quantity: 0,
        }
    }
}

/// Applies the trade rule to a chosen pair. Does not advance the step count.
pub fn attempt_trade(
    population: &mut Population,
    buyer: usize,
    seller: usize,
) -> Result<EncounterOutcome> {
    let n = population.agents.len();
    if buyer >= n || seller >= n {
        return Err(Error::usage(format!(
            "agent index out of range: buyer {buyer}, seller {seller}, population {n}"
        )));
    }
    if buyer == seller {
        return Err(Error::usage(format!(
            "buyer and seller must differ (both {buyer})"
        )));
    }
    Ok(trade(&mut population.agents, buyer, seller))
}

#[inline]
fn step_unchecked(population: &mut Population, rng: &mut RngStream) -> EncounterOutcome {
    let (buyer, seller) = rng.next_pair(population.agents.len());
    let outcome = trade(&mut population.agents, buyer, seller);
    population.step_count += 1;
    outcome
}

/// One encounter: draw an ordered pair (buyer first, then seller), try the
/// trade, count the step.
pub fn step(population: &mut Population, rng: &mut RngStream) -> Result<EncounterOutcome> {
    if population.agents.len() < 2 {
        return Err(Error::config(
            "n_agents",
            format!(
                "stepping needs >= 2 agents, got {}",
                population.agents.len()
            ),
        ));
    }
    Ok(step_unchecked(population, rng))
}

/// Per-agent state captured after a given number of encounters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: u64,
    pub agents: Vec<Agent>,
    pub wealth: Vec<f64>,
}

impl Snapshot {
    pub fn capture(population: &Population) -> Self {
        Snapshot {
            step: population.step_count,
            agents: population.agents.clone(),
            wealth: population.wealth(),
        }
    }

    pub fn prices(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.price).collect()
    }

    pub fn mean_price(&self) -> f64 {
        self.agents.iter().map(|a| a.price).sum::<f64>() / self.agents.len() as f64
    }
}

pub type SnapshotSeries = Vec<Snapshot>;

/// Checks that snapshot indices are strictly increasing and within `0..=limit`.
pub(crate) fn validate_snapshot_indices(indices: &[u64], limit: u64, field: &str) -> Result<()> {
    for w in indices.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::config(
                field,
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
    }
    if let Some(&last) = indices.last() {
        if last > limit {
            return Err(Error::config(
                field,
                format!("index {last} exceeds run length {limit}"),
            ));
        }
    }
    Ok(())
}

/// Performs `n_steps` encounters, capturing the state after each step count
/// listed in `snapshot_at` (0 means before the first encounter).
pub fn run(
    population: &mut Population,
    n_steps: u64,
    snapshot_at: &[u64],
    rng: &mut RngStream,
) -> Result<SnapshotSeries> {
    validate_snapshot_indices(snapshot_at, n_steps, "snapshot_at")?;
    if n_steps > 0 && population.agents.len() < 2 {
        return Err(Error::config(
            "n_agents",
            format!(
                "stepping needs >= 2 agents, got {}",
                population.agents.len()
            ),
        ));
    }

    let mut series = Vec::with_capacity(snapshot_at.len());
    let mut done = 0u64;
    for &at in snapshot_at {
        for _ in done..at {
            step_unchecked(population, rng);
        }
        done = at;
        series.push(Snapshot::capture(population));
    }
    for _ in done..n_steps {
        step_unchecked(population, rng);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(buyer: Agent, seller: Agent) -> Population {
        Population::from_agents(vec![buyer, seller]).unwrap()
    }

    #[test]
    fn init_degenerate_price_range() {
        let mut rng = RngStream::new(1, 0);
        let pop = init_population(4, 4, 8.0, PriceRange::new(1.0, 1.0).unwrap(), &mut rng).unwrap();
        for a in pop.agents() {
            assert_eq!(*a, Agent::new(1, 2.0, 1.0));
        }
    }

    #[test]
    fn init_goods_remainder_goes_to_lowest_indices() {
        let mut rng = RngStream::new(1, 0);
        let pop = init_population(3, 4, 3.0, PriceRange::new(1.0, 1.0).unwrap(), &mut rng).unwrap();
        let goods: Vec<u64> = pop.agents().iter().map(|a| a.goods).collect();
        assert_eq!(goods, vec![2, 1, 1]);
        assert!(pop.agents().iter().all(|a| a.money == 1.0));
    }

    #[test]
    fn init_large_population_moments() {
        let mut rng = RngStream::new(42, 0);
        let pop = init_population(1000, 1000, 1000.0, PriceRange::default(), &mut rng).unwrap();
        let t = population_totals(&pop);
        assert_eq!(t.goods, 1000);
        assert!((t.money - 1000.0).abs() < 1e-12);
        let mean_h = pop.mean_price();
        assert!((0.97..=1.03).contains(&mean_h), "{mean_h}");
        assert!(pop.agents().iter().all(|a| (0.5..=1.5).contains(&a.price)));
    }

    #[test]
    fn init_rejects_bad_configuration() {
        let mut rng = RngStream::new(1, 0);
        assert!(init_population(1, 1, 1.0, PriceRange::default(), &mut rng).is_err());
        assert!(init_population(2, 1, -1.0, PriceRange::default(), &mut rng).is_err());
        assert!(PriceRange::new(0.0, 1.0).is_err());
        assert!(PriceRange::new(2.0, 1.0).is_err());
    }

    #[test]
    fn trade_at_lower_offer() {
        let mut pop = pair(Agent::new(3, 10.0, 2.0), Agent::new(2, 0.0, 1.5));
        let out = attempt_trade(&mut pop, 0, 1).unwrap();
        assert!(out.traded && !out.forced);
        assert_eq!(out.price, Some(1.5));
        assert_eq!(out.quantity, 1);
        assert_eq!(pop.agents()[0], Agent::new(4, 8.5, 1.5));
        assert_eq!(pop.agents()[1], Agent::new(1, 1.5, 1.5));
    }

    #[test]
    fn forced_purchase_pumps_price_up() {
        let mut pop = pair(Agent::new(0, 5.0, 1.0), Agent::new(1, 0.0, 3.0));
        let out = attempt_trade(&mut pop, 0, 1).unwrap();
        assert!(out.traded && out.forced);
        assert_eq!(out.price, Some(3.0));
        assert_eq!(pop.agents()[0], Agent::new(1, 2.0, 3.0));
        assert_eq!(pop.agents()[1], Agent::new(0, 3.0, 3.0));
    }

    #[test]
    fn no_trade_when_unaffordable() {
        let before = pair(Agent::new(2, 1.0, 2.0), Agent::new(5, 0.0, 1.5));
        let mut pop = before.clone();
        let out = attempt_trade(&mut pop, 0, 1).unwrap();
        assert!(!out.traded && !out.forced);
        assert_eq!(out.price, None);
        assert_eq!(out.quantity, 0);
        assert_eq!(pop, before);
    }

    #[test]
    fn no_trade_when_offer_is_higher_and_buyer_has_goods() {
        let before = pair(Agent::new(2, 10.0, 1.0), Agent::new(3, 0.0, 2.0));
        let mut pop = before.clone();
        assert!(!attempt_trade(&mut pop, 0, 1).unwrap().traded);
        assert_eq!(pop, before);
    }

    #[test]
    fn no_trade_when_seller_has_no_goods() {
        let before = pair(Agent::new(0, 10.0, 1.0), Agent::new(0, 0.0, 0.5));
        let mut pop = before.clone();
        assert!(!attempt_trade(&mut pop, 0, 1).unwrap().traded);
        assert_eq!(pop, before);
    }

    #[test]
    fn invalid_indices_are_usage_errors() {
        let mut pop = pair(Agent::new(1, 1.0, 1.0), Agent::new(1, 1.0, 1.0));
        assert!(matches!(
            attempt_trade(&mut pop, 0, 0),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            attempt_trade(&mut pop, 0, 2),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn two_agent_step_matches_direct_trade() {
        let start = pair(Agent::new(0, 5.0, 1.0), Agent::new(1, 0.0, 3.0));
        // find a seed whose first pair is (0, 1)
        let seed = (0..)
            .find(|&s| RngStream::new(s, 0).next_pair(2) == (0, 1))
            .unwrap();
        let mut stepped = start.clone();
        let out = step(&mut stepped, &mut RngStream::new(seed, 0)).unwrap();
        let mut direct = start.clone();
        let expected = attempt_trade(&mut direct, 0, 1).unwrap();
        assert_eq!(out, expected);
        assert_eq!(stepped.agents(), direct.agents());
        assert_eq!(stepped.step_count(), 1);
    }

    #[test]
    fn step_counts_failed_encounters() {
        let mut pop = pair(Agent::new(0, 0.0, 1.0), Agent::new(0, 0.0, 1.0));
        let mut rng = RngStream::new(3, 0);
        for _ in 0..5 {
            assert!(!step(&mut pop, &mut rng).unwrap().traded);
        }
        assert_eq!(pop.step_count(), 5);
    }

    #[test]
    fn step_needs_two_agents() {
        let mut pop = Population::from_agents(vec![Agent::new(1, 1.0, 1.0)]).unwrap();
        assert!(step(&mut pop, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn wealth_formula() {
        assert_eq!(agent_wealth(&Agent::new(4, 8.5, 1.5)), 14.5);
        assert_eq!(agent_wealth(&Agent::new(0, 7.0, 99.0)), 7.0);
        assert_eq!(agent_wealth(&Agent::new(3, 0.0, 2.0)), 6.0);
    }

    #[test]
    fn totals_of_two_agents() {
        let pop = pair(Agent::new(1, 2.0, 1.0), Agent::new(0, 3.0, 2.0));
        assert_eq!(
            population_totals(&pop),
            Totals {
                goods: 1,
                money: 5.0,
                wealth: 6.0
            }
        );
    }

    fn small_pop(seed: u64) -> Population {
        init_population(
            50,
            60,
            50.0,
            PriceRange::default(),
            &mut RngStream::new(seed, 0),
        )
        .unwrap()
    }

    #[test]
    fn run_without_steps_is_identity() {
        let mut pop = small_pop(1);
        let before = pop.clone();
        let series = run(&mut pop, 0, &[], &mut RngStream::new(1, 1)).unwrap();
        assert!(series.is_empty());
        assert_eq!(pop, before);
    }

    #[test]
    fn run_final_snapshot_equals_final_state() {
        let mut pop = small_pop(1);
        let series = run(&mut pop, 10, &[10], &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].step, 10);
        assert_eq!(series[0].agents, pop.agents());
        assert_eq!(series[0].wealth, pop.wealth());
    }

    #[test]
    fn run_is_deterministic() {
        let go = || {
            let mut pop = small_pop(9);
            run(&mut pop, 5000, &[0, 100, 5000], &mut RngStream::new(9, 1)).unwrap()
        };
        let a = serde_json::to_vec(&go()).unwrap();
        let b = serde_json::to_vec(&go()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_rejects_bad_snapshot_lists() {
        let mut pop = small_pop(1);
        let mut rng = RngStream::new(1, 1);
        assert!(run(&mut pop, 10, &[5, 5], &mut rng).is_err());
        assert!(run(&mut pop, 10, &[6, 5], &mut rng).is_err());
        assert!(run(&mut pop, 10, &[11], &mut rng).is_err());
    }
}
