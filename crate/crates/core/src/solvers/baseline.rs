//! Expected objective of the random and probabilistic caching baselines.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{probabilistic_placement, random_placement};
use crate::montecarlo::Estimate;
use crate::objective::{check_eta, Evaluator, Tradeoff};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// `M_n` files uniformly at random per RRH.
    Random,
    /// `M_n` distinct files per RRH sampled with weights `P_l`.
    Probabilistic,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::Probabilistic => "probabilistic",
        }
    }
}

/// Objectives of `draws` independent placements.
pub fn baseline_tradeoffs<R: Rng + ?Sized>(
    ev: &Evaluator,
    strategy: Baseline,
    draws: usize,
    rng: &mut R,
) -> Result<Vec<Tradeoff>> {
    if draws == 0 {
        return Err(Error::invalid("sweep.baseline_draws", "must be >= 1"));
    }
    let s = ev.scenario();
    (0..draws)
        .map(|_| {
            let a = match strategy {
                Baseline::Random => random_placement(s.layout(), s.files(), rng)?,
                Baseline::Probabilistic => probabilistic_placement(s.library(), s.layout(), rng)?,
            };
            ev.tradeoff(&a)
        })
        .collect()
}

/// Mean objective components over a set of realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineEstimate {
    pub eta: f64,
    pub value: Estimate,
    pub cell_outage: Estimate,
    pub fronthaul: Estimate,
}

impl BaselineEstimate {
    pub fn from_tradeoffs(tradeoffs: &[Tradeoff], eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let values: Vec<f64> = tradeoffs.iter().map(|t| t.at(eta).value).collect();
        let outages: Vec<f64> = tradeoffs.iter().map(|t| t.cell_outage).collect();
        let fronthaul: Vec<f64> = tradeoffs.iter().map(|t| t.fronthaul).collect();
        Ok(Self {
            eta,
            value: Estimate::from_samples(&values),
            cell_outage: Estimate::from_samples(&outages),
            fronthaul: Estimate::from_samples(&fronthaul),
        })
    }
}

pub fn baseline_expected_objective<R: Rng + ?Sized>(
    ev: &Evaluator,
    strategy: Baseline,
    eta: f64,
    draws: usize,
    rng: &mut R,
) -> Result<BaselineEstimate> {
    check_eta(eta)?;
    BaselineEstimate::from_tradeoffs(&baseline_tradeoffs(ev, strategy, draws, rng)?, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioFile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_popularity_makes_baselines_agree() {
        let s = ScenarioFile::preset("fig5_pareto").unwrap().build().unwrap().with_beta(0.0).unwrap();
        let ev = Evaluator::new(s);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = baseline_expected_objective(&ev, Baseline::Random, 0.5, 400, &mut rng).unwrap();
        let p = baseline_expected_objective(&ev, Baseline::Probabilistic, 0.5, 400, &mut rng).unwrap();
        let se = (r.value.std_err.powi(2) + p.value.std_err.powi(2)).sqrt();
        assert!((r.value.mean - p.value.mean).abs() <= 2.0 * se + 1e-12, "{r:?} {p:?}");
    }

    #[test]
    fn zero_draws_rejected() {
        let ev = Evaluator::new(ScenarioFile::preset("fig5_pareto").unwrap().build().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(baseline_expected_objective(&ev, Baseline::Random, 0.5, 0, &mut rng).is_err());
    }
}
