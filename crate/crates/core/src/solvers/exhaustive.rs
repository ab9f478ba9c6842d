//! Exact optimum by enumerating every per-column combination.
//!
//! By default only rows `[0, L')` are enumerated: swapping a cached file
//! ranked below `L'` for an uncached higher-ranked one never increases the
//! fronthaul term and never changes which RRH sets serve cached files.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PlacementMatrix;
use crate::objective::{check_eta, Evaluator, ObjectivePoint, Tradeoff};

use super::support_rows;

pub const DEFAULT_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveConfig {
    /// Largest candidate count enumerated before refusing.
    pub budget: f64,
    /// Enumerate over all `L` rows instead of `[0, L')`.
    pub full_library: bool,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, full_library: false }
    }
}

/// Candidate counts `prod_n C(rows, M_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    /// Over the whole library.
    pub full: f64,
    /// Over the first `L'` rows.
    pub reduced: f64,
    /// Rows the enumeration uses.
    pub rows: usize,
    /// The count the enumeration will visit.
    pub count: f64,
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn search_space(ev: &Evaluator, config: &ExhaustiveConfig) -> SearchSpace {
    let s = ev.scenario();
    let sizes = s.layout().cache_sizes();
    let count = |rows: usize| sizes.iter().map(|&m| binomial(rows, m)).product::<f64>();
    let reduced_rows = support_rows(s);
    let rows = if config.full_library { s.files() } else { reduced_rows };
    SearchSpace { full: count(s.files()), reduced: count(reduced_rows), rows, count: count(rows) }
}

fn combinations(rows: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > rows {
        return out;
    }
    loop {
        out.push(current.clone());
        let Some(i) = (0..k).rev().find(|&i| current[i] < rows - k + i) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

struct Enumeration {
    files: usize,
    per_column: Vec<Vec<Vec<usize>>>,
    count: usize,
}

impl Enumeration {
    fn new(ev: &Evaluator, config: &ExhaustiveConfig) -> Result<Self> {
        let space = search_space(ev, config);
        if space.count > config.budget {
            return Err(Error::BudgetExceeded { count: space.full, reduced: space.reduced, budget: config.budget });
        }
        let s = ev.scenario();
        let per_column: Vec<_> = s.layout().cache_sizes().iter().map(|&m| combinations(space.rows, m)).collect();
        let count = per_column.iter().map(Vec::len).product();
        Ok(Self { files: s.files(), per_column, count })
    }

    /// Candidate `k` in mixed radix, first RRH varying slowest.
    fn candidate(&self, mut k: usize) -> PlacementMatrix {
        let mut a = PlacementMatrix::zeros(self.files, self.per_column.len());
        for (n, combos) in self.per_column.iter().enumerate().rev() {
            for &l in &combos[k % combos.len()] {
                a.set(l, n, true);
            }
            k /= combos.len();
        }
        a
    }
}

/// Tradeoff without touching the per-placement memo.
fn tradeoff(ev: &Evaluator, a: &PlacementMatrix) -> Result<Tradeoff> {
    let p = ev.scenario().library().popularity();
    let outages = ev.file_outages(a)?;
    let cell_outage = p.iter().zip(&outages).map(|(p, o)| p * o).sum::<f64>().clamp(0.0, 1.0);
    Ok(Tradeoff { cell_outage, fronthaul: crate::objective::fronthaul_expectation(a, ev.scenario().library()) })
}

/// Every enumerated candidate with its objectives, in enumeration order.
pub fn enumerate_tradeoffs(ev: &Evaluator, config: &ExhaustiveConfig) -> Result<Vec<(PlacementMatrix, Tradeoff)>> {
    let e = Enumeration::new(ev, config)?;
    (0..e.count)
        .into_par_iter()
        .map(|k| {
            let a = e.candidate(k);
            tradeoff(ev, &a).map(|t| (a, t))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOutcome {
    pub best: PlacementMatrix,
    pub point: ObjectivePoint,
    pub candidates: usize,
}

/// Exact minimizer; ties go to the placement first under
/// [`PlacementMatrix::cmp_by_columns`].
pub fn exhaustive_search(ev: &Evaluator, eta: f64, config: &ExhaustiveConfig) -> Result<ExhaustiveOutcome> {
    check_eta(eta)?;
    let e = Enumeration::new(ev, config)?;
    let best = (0..e.count)
        .into_par_iter()
        .map(|k| {
            let a = e.candidate(k);
            tradeoff(ev, &a).map(|t| (t.at(eta).value, a))
        })
        .try_reduce_with(|x, y| {
            let y_first = y.0.total_cmp(&x.0).then_with(|| y.1.cmp_by_columns(&x.1)).is_lt();
            Ok(if y_first { y } else { x })
        })
        .expect("at least one candidate")?;
    let point = ev.evaluate(&best.1, eta)?;
    Ok(ExhaustiveOutcome { best: best.1, point, candidates: e.count })
}
