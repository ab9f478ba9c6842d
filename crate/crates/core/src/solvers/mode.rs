//! Two-scheme mode selection: LB-LCD at or below the crossover weight,
//! MPC above it.

use crate::error::{Error, Result};
use crate::model::PlacementMatrix;
use crate::objective::{check_eta, eta_crossover, Evaluator};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeChoice {
    pub placement: PlacementMatrix,
    /// `None` when the two schemes have no crossover (e.g. a single RRH).
    pub eta0: Option<f64>,
}

pub fn mode_select(ev: &Evaluator, eta: f64) -> Result<ModeChoice> {
    check_eta(eta)?;
    match eta_crossover(ev) {
        Ok(c) => {
            let placement = if eta <= c.eta0 { ev.lb_lcd() } else { ev.mpc() };
            Ok(ModeChoice { placement, eta0: Some(c.eta0) })
        }
        Err(Error::NoCrossover(_)) => Ok(ModeChoice { placement: ev.mpc(), eta0: None }),
        Err(e) => Err(e),
    }
}
