//! Weighted-sum objective over (cell-average outage, fronthaul usage), the
//! MPC/LB-LCD crossover weight, and Pareto filtering.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::model::{lb_lcd_placement, mpc_placement, service_set, FileLibrary, PlacementMatrix, RrhSet};
use crate::quadrature::{service_set_average, UniformDisk};
use crate::scenario::Scenario;

/// The two objectives of one placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tradeoff {
    /// `sum_l P_l E_x[P_out^(l)(x)]`.
    pub cell_outage: f64,
    /// `sum_l P_l T_l`.
    pub fronthaul: f64,
}

impl Tradeoff {
    pub fn at(&self, eta: f64) -> ObjectivePoint {
        ObjectivePoint {
            cell_outage: self.cell_outage,
            fronthaul: self.fronthaul,
            eta,
            value: eta * self.cell_outage + (1.0 - eta) * self.fronthaul,
        }
    }
}

/// A placement's objectives scalarized with weight `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePoint {
    pub cell_outage: f64,
    pub fronthaul: f64,
    pub eta: f64,
    pub value: f64,
}

pub fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::invalid("eta", format!("must lie in [0, 1], got {eta}")))
    }
}

/// `sum_l P_l T_l`, summed from the least popular file up.
pub fn fronthaul_expectation(placement: &PlacementMatrix, library: &FileLibrary) -> f64 {
    let p = library.popularity();
    (0..placement.files()).rev().filter(|&l| placement.holders(l).is_empty()).map(|l| p[l]).sum()
}

/// Objective evaluation for one scenario.
///
/// Cell averages are memoized per service set, and tradeoffs per placement,
/// so sweeps over `eta` and GA generations re-use earlier quadrature passes.
/// Values are deterministic; concurrent duplicate computation is harmless.
#[derive(Debug)]
pub struct Evaluator {
    scenario: Scenario,
    set_cache: RwLock<HashMap<RrhSet, f64>>,
    placement_cache: RwLock<HashMap<PlacementMatrix, Tradeoff>>,
}

impl Evaluator {
    pub fn new(scenario: Scenario) -> Self {
        Self { scenario, set_cache: RwLock::default(), placement_cache: RwLock::default() }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Cell-average outage when `members` serve the user.
    pub fn set_average(&self, members: RrhSet) -> Result<f64> {
        if let Some(&v) = self.set_cache.read().unwrap().get(&members) {
            return Ok(v);
        }
        let s = &self.scenario;
        let v = service_set_average(members, s.grid(), s.model(), &UniformDisk { radius: s.layout().radius() })?;
        self.set_cache.write().unwrap().insert(members, v);
        Ok(v)
    }

    /// `E_x[P_out^(l)]` for every file.
    pub fn file_outages(&self, placement: &PlacementMatrix) -> Result<Vec<f64>> {
        (0..placement.files()).map(|l| self.set_average(service_set(placement, l)?.members)).collect()
    }

    pub fn validate(&self, placement: &PlacementMatrix) -> Result<()> {
        placement.validate(self.scenario.files(), self.scenario.layout().cache_sizes())
    }

    pub fn tradeoff(&self, placement: &PlacementMatrix) -> Result<Tradeoff> {
        if let Some(&t) = self.placement_cache.read().unwrap().get(placement) {
            return Ok(t);
        }
        self.validate(placement)?;
        let p = self.scenario.library().popularity();
        let outages = self.file_outages(placement)?;
        let cell_outage = p.iter().zip(&outages).map(|(p, o)| p * o).sum::<f64>().clamp(0.0, 1.0);
        let fronthaul = fronthaul_expectation(placement, self.scenario.library());
        let t = Tradeoff { cell_outage, fronthaul };
        self.placement_cache.write().unwrap().insert(placement.clone(), t);
        Ok(t)
    }

    pub fn evaluate(&self, placement: &PlacementMatrix, eta: f64) -> Result<ObjectivePoint> {
        check_eta(eta)?;
        Ok(self.tradeoff(placement)?.at(eta))
    }

    pub fn mpc(&self) -> PlacementMatrix {
        mpc_placement(self.scenario.layout(), self.scenario.files()).expect("scenario validated cache sizes")
    }

    pub fn lb_lcd(&self) -> PlacementMatrix {
        lb_lcd_placement(self.scenario.layout(), self.scenario.files()).expect("scenario validated cache sizes")
    }
}

/// Weight where the MPC and LB-LCD objective lines intersect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub eta0: f64,
    pub mpc: Tradeoff,
    pub lb_lcd: Tradeoff,
}

/// `eta_0 = 1 / (1 + sum_l P_l E[P_out,MPC - P_out,LCD] / sum_l P_l (T_LCD - T_MPC))`,
/// valid for any cache sizes.
pub fn eta_crossover(ev: &Evaluator) -> Result<Crossover> {
    let (mpc, lcd) = (ev.mpc(), ev.lb_lcd());
    if ev.scenario().layout().rrh_count() < 2 || mpc == lcd {
        return Err(Error::NoCrossover("MPC and LB-LCD placements coincide".into()));
    }
    let p = ev.scenario().library().popularity();
    let (om, ol) = (ev.file_outages(&mpc)?, ev.file_outages(&lcd)?);
    let outage_gap: f64 = (0..p.len()).map(|l| p[l] * (om[l] - ol[l])).sum();
    let fronthaul_gap: f64 = (0..p.len())
        .map(|l| {
            let t = |a: &PlacementMatrix| a.holders(l).is_empty() as u8 as f64;
            p[l] * (t(&lcd) - t(&mpc))
        })
        .sum();
    if fronthaul_gap == 0.0 || outage_gap == 0.0 {
        return Err(Error::NoCrossover("the two schemes tie on one objective".into()));
    }
    let eta0 = 1.0 / (1.0 + outage_gap / fronthaul_gap);
    if !(0.0..=1.0).contains(&eta0) {
        return Err(Error::NoCrossover(format!("lines intersect outside [0, 1] at {eta0}")));
    }
    Ok(Crossover { eta0, mpc: ev.tradeoff(&mpc)?, lb_lcd: ev.tradeoff(&lcd)? })
}

/// Equal-cache form: `eta_0 = 1 / (1 + sum_{l<=NM} P_l E[P_out,LCD - P_out,MPC] / sum_{M<l<=NM} P_l)`.
pub fn eta_crossover_equal_cache(ev: &Evaluator) -> Result<f64> {
    let layout = ev.scenario().layout();
    let m = layout
        .equal_cache_size()
        .ok_or_else(|| Error::invalid("layout.cache_sizes", "equal-cache formula needs equal cache sizes"))?;
    let nm = layout.total_cache();
    if layout.rrh_count() < 2 || m == 0 {
        return Err(Error::NoCrossover("MPC and LB-LCD placements coincide".into()));
    }
    let p = ev.scenario().library().popularity();
    let (om, ol) = (ev.file_outages(&ev.mpc())?, ev.file_outages(&ev.lb_lcd())?);
    let numerator: f64 = (0..nm).map(|l| p[l] * (ol[l] - om[l])).sum();
    let denominator: f64 = p[m..nm].iter().sum();
    Ok(1.0 / (1.0 + numerator / denominator))
}

/// Points not weakly dominated by any other point; exact duplicates kept once.
/// Returned sorted by ascending first coordinate.
pub fn pareto_filter(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if front.last().is_none_or(|last| p.1 < last.1) {
            front.push(p);
        }
    }
    front
}

/// Nondominated points that minimize `eta x + (1 - eta) y` for some
/// `eta in [0, 1]`: the vertices of the lower-left convex hull of the front.
/// Points strictly inside a hull edge are dropped.
pub fn supported_front(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let front = pareto_filter(points);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in front {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
