//! Conservative money-exchange models used as baselines: the pooled random
//! split and its variant with a saving propensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::validate_snapshot_indices;
use crate::rng::RngStream;

/// Pooled random split: the pair's money is re-divided as `(eps, 1 - eps)`.
pub fn dy_exchange(d_i: f64, d_j: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    Ok(split(d_i, d_j, 0.0, epsilon))
}

/// Each agent keeps a fraction `lambda` of its money; the rest is pooled and
/// split as in [`dy_exchange`].
pub fn cc_exchange(d_i: f64, d_j: f64, lambda: f64, epsilon: f64) -> Result<(f64, f64)> {
    SavingConfig::new(lambda)?;
    check_epsilon(epsilon)?;
    Ok(split(d_i, d_j, lambda, epsilon))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::usage(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    Ok(())
}

/// The second share is computed as the remainder so the pair total is kept
/// to within one rounding of the input sum.
#[inline]
fn split(d_i: f64, d_j: f64, lambda: f64, epsilon: f64) -> (f64, f64) {
    let total = d_i + d_j;
    let first = if lambda == 0.0 {
        epsilon * total
    } else {
        lambda * d_i + epsilon * (1.0 - lambda) * total
    };
    let first = first.clamp(0.0, total);
    (first, total - first)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingConfig {
    lambda: f64,
}

impl SavingConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::config(
                "lambda",
                format!("must lie in [0, 1), got {lambda}"),
            ));
        }
        Ok(SavingConfig { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceModel {
    /// Pooled random split.
    Dy,
    /// Random split with saving propensity.
    Cc(SavingConfig),
}

impl ReferenceModel {
    pub fn lambda(&self) -> f64 {
        match self {
            ReferenceModel::Dy => 0.0,
            ReferenceModel::Cc(s) => s.lambda(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoneyPopulation {
    pub money: Vec<f64>,
    pub step_count: u64,
}

impl MoneyPopulation {
    pub fn uniform(n: usize, mean_money: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("n_agents", format!("must be >= 2, got {n}")));
        }
        if !(mean_money > 0.0) || !mean_money.is_finite() {
            return Err(Error::config(
                "total_money",
                format!("mean money must be finite and > 0, got {mean_money}"),
            ));
        }
        Ok(MoneyPopulation {
            money: vec![mean_money; n],
            step_count: 0,
        })
    }

    pub fn total(&self) -> f64 {
        self.money.iter().sum()
    }

    /// One encounter: pair `(i, j)` as in the buyer model, then a fresh `eps`.
    #[inline]
    pub fn step(&mut self, lambda: f64, rng: &mut RngStream) {
        let (i, j) = rng.next_pair(self.money.len());
        let eps = rng.next_f64();
        let (a, b) = split(self.money[i], self.money[j], lambda, eps);
        self.money[i] = a;
        self.money[j] = b;
        self.step_count += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoneySnapshot {
    pub sweep: u64,
    pub money: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub money: Vec<f64>,
    pub snapshots: Vec<MoneySnapshot>,
}

impl ReferenceRun {
    /// All snapshot samples concatenated, for time-averaged distributions.
    pub fn pooled(&self) -> Vec<f64> {
        self.snapshots
            .iter()
            .flat_map(|s| s.money.iter().copied())
            .collect()
    }
}

/// Runs a reference model from equal endowments for `n_sweeps` sweeps of `n`
/// encounters, capturing the money vector at each listed sweep.
pub fn run_reference(
    model: ReferenceModel,
    n: usize,
    mean_money: f64,
    n_sweeps: u64,
    snapshot_sweeps: &[u64],
    rng: &mut RngStream,
) -> Result<ReferenceRun> {
    let mut pop = MoneyPopulation::uniform(n, mean_money)?;
    validate_snapshot_indices(snapshot_sweeps, n_sweeps, "snapshot_sweeps")?;
    let lambda = model.lambda();

    let mut snapshots = Vec::with_capacity(snapshot_sweeps.len());
    let mut done = 0u64;
    let mut advance = |pop: &mut MoneyPopulation, sweeps: u64| {
        for _ in 0..sweeps * n as u64 {
            pop.step(lambda, rng);
        }
    };
    for &at in snapshot_sweeps {
        advance(&mut pop, at - done);
        done = at;
        snapshots.push(MoneySnapshot {
            sweep: at,
            money: pop.money.clone(),
        });
    }
    advance(&mut pop, n_sweeps - done);
    Ok(ReferenceRun {
        money: pop.money,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
    }

    #[test]
    fn dy_examples() {
        assert!(close(dy_exchange(4.0, 6.0, 0.3).unwrap(), (3.0, 7.0)));
        assert_eq!(dy_exchange(4.0, 6.0, 0.5).unwrap(), (5.0, 5.0));
        assert_eq!(dy_exchange(4.0, 6.0, 1.0).unwrap(), (10.0, 0.0));
        assert!(dy_exchange(4.0, 6.0, 1.5).is_err());
        assert!(dy_exchange(4.0, 6.0, -0.1).is_err());
    }

    #[test]
    fn cc_examples() {
        assert!(close(cc_exchange(4.0, 6.0, 0.5, 0.5).unwrap(), (4.5, 5.5)));
        assert!(close(cc_exchange(4.0, 6.0, 0.0, 0.3).unwrap(), (3.0, 7.0)));
        assert!(close(cc_exchange(4.0, 6.0, 0.9, 0.5).unwrap(), (4.1, 5.9)));
        assert!(cc_exchange(4.0, 6.0, 1.0, 0.5).is_err());
        assert!(cc_exchange(4.0, 6.0, 1.5, 0.5).is_err());
        assert!(cc_exchange(4.0, 6.0, -0.1, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn exchanges_conserve_and_stay_nonnegative(
            a in 0.0f64..1e6, b in 0.0f64..1e6, lambda in 0.0f64..0.999_999, eps in 0.0f64..=1.0
        ) {
            for (x, y) in [dy_exchange(a, b, eps).unwrap(), cc_exchange(a, b, lambda, eps).unwrap()] {
                prop_assert!(x >= 0.0 && y >= 0.0);
                prop_assert!(((x + y) - (a + b)).abs() <= f64::EPSILON * (a + b));
            }
        }

        #[test]
        fn zero_saving_reduces_to_pooled_split(a in 0.0f64..1e6, b in 0.0f64..1e6, eps in 0.0f64..=1.0) {
            prop_assert_eq!(cc_exchange(a, b, 0.0, eps).unwrap(), dy_exchange(a, b, eps).unwrap());
        }
    }

    #[test]
    fn zero_sweeps_keeps_equal_endowments() {
        let run = run_reference(
            ReferenceModel::Dy,
            10,
            2.5,
            0,
            &[0],
            &mut RngStream::new(1, 1),
        )
        .unwrap();
        assert!(run.money.iter().all(|&m| m == 2.5));
        assert_eq!(run.snapshots.len(), 1);
    }

    #[test]
    fn reference_run_conserves_and_repeats() {
        let go = || {
            run_reference(
                ReferenceModel::Cc(SavingConfig::new(0.3).unwrap()),
                100,
                1.0,
                200,
                &[100, 200],
                &mut RngStream::new(5, 1),
            )
            .unwrap()
        };
        let a = go();
        let total: f64 = a.money.iter().sum();
        assert!((total - 100.0).abs() / 100.0 < 1e-9);
        assert_eq!(a.money, go().money);
        assert_eq!(a.snapshots[1].money, a.money);
        assert_eq!(a.pooled().len(), 200);
    }

    #[test]
    fn reference_run_validates() {
        let mut rng = RngStream::new(1, 1);
        assert!(run_reference(ReferenceModel::Dy, 1, 1.0, 1, &[], &mut rng).is_err());
        assert!(run_reference(ReferenceModel::Dy, 10, 0.0, 1, &[], &mut rng).is_err());
        assert!(run_reference(ReferenceModel::Dy, 10, 1.0, 1, &[2], &mut rng).is_err());
    }
}
