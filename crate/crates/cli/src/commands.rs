//! One function per subcommand. Each writes its CSV tables and manifest and
//! prints a short human-readable summary on stdout.

use cranopt::analytics::PoleSpectrum;
use cranopt::model::linear_to_db;
use cranopt::montecarlo::{cdf_gamma_grid, empirical_cdf, mean_link_snrs, substream};
use cranopt::objective::{eta_crossover, pareto_filter, supported_front, Evaluator, Tradeoff};
use cranopt::solvers::{
    baseline_tradeoffs, enumerate_tradeoffs, exhaustive_search, ga_optimize, mode_select, Baseline, BaselineEstimate,
    ExhaustiveConfig,
};
use serde::Serialize;
use serde_json::json;

use crate::output::RunOutput;
use crate::{CliError, Resolved};

/// Number of SNR points per distance set in `validate-analytics`.
pub const CDF_POINTS: usize = 20;

/// Stream offset separating baseline placement draws from simulation streams.
const BASELINE_STREAM: u64 = 1 << 32;

#[derive(Serialize)]
struct CdfRow<'a> {
    gamma_db: f64,
    analytic_cdf: f64,
    empirical_cdf: f64,
    std_err: f64,
    scenario_tag: &'a str,
}

pub fn validate_analytics(r: Resolved) -> Result<(), CliError> {
    let scenario = r.file.build()?;
    if r.file.distance_sets.is_empty() {
        return Err(crate::invalid("distance_sets", "scenario lists no distance sets"));
    }
    let model = scenario.model();
    let channel = model.channel();
    let radius = scenario.layout().radius();
    let mut rows = Vec::new();
    let mut sup = serde_json::Map::new();
    for (i, set) in r.file.distance_sets.iter().enumerate() {
        let d: Vec<f64> = set.distances.iter().map(|x| x * radius).collect();
        let gammas = cdf_gamma_grid(&mean_link_snrs(&d, channel)?, CDF_POINTS);
        let spectrum = PoleSpectrum::from_distances(&d, channel, model.merge_tol())?;
        let empirical = empirical_cdf(&d, channel, &gammas, r.file.sim.fading_draws, r.file.sim.seed + i as u64)?;
        let mut worst: f64 = 0.0;
        for (&g, e) in gammas.iter().zip(&empirical) {
            let analytic = spectrum.cdf(g)?;
            worst = worst.max((analytic - e.mean).abs());
            rows.push(CdfRow {
                gamma_db: linear_to_db(g),
                analytic_cdf: analytic,
                empirical_cdf: e.mean,
                std_err: e.std_err,
                scenario_tag: &set.tag,
            });
        }
        println!("{}: sup |analytic - empirical| = {worst:.5} over {CDF_POINTS} points", set.tag);
        sup.insert(set.tag.clone(), json!(worst));
    }
    let mut out = RunOutput::create(&r.out, "validate-analytics", &r.file, r.threads)?;
    out.csv("analytics_cdf.csv", &rows)?;
    out.manifest(&r.file, json!({ "sup_norm": sup, "fading_draws": r.file.sim.fading_draws }))?;
    Ok(())
}

#[derive(Serialize)]
struct CellRow {
    sweep: &'static str,
    gamma_th_db: f64,
    beta: f64,
    scheme: &'static str,
    cell_outage: f64,
    fronthaul: f64,
}

pub fn cell_metrics(r: Resolved) -> Result<(), CliError> {
    let base = r.file.build()?;
    let mut rows = Vec::new();
    let mut push = |sweep, ev: &Evaluator| -> Result<(), CliError> {
        for (scheme, a) in [("mpc", ev.mpc()), ("lb_lcd", ev.lb_lcd())] {
            let t = ev.tradeoff(&a)?;
            rows.push(CellRow {
                sweep,
                gamma_th_db: ev.scenario().radio().gamma_th_db,
                beta: ev.scenario().library().beta(),
                scheme,
                cell_outage: t.cell_outage,
                fronthaul: t.fronthaul,
            });
        }
        Ok(())
    };
    for &g in &r.file.sweep.gamma_th_db {
        push("gamma_th", &Evaluator::new(base.with_gamma_th_db(g)?))?;
    }
    for &b in &r.file.sweep.beta {
        push("beta", &Evaluator::new(base.with_beta(b)?))?;
    }
    for row in &rows {
        println!(
            "{:<8} gamma_th={:>6.2} dB beta={:.2} {:<6} outage={:.5} fronthaul={:.5}",
            row.sweep, row.gamma_th_db, row.beta, row.scheme, row.cell_outage, row.fronthaul
        );
    }
    let mut out = RunOutput::create(&r.out, "cell-metrics", &r.file, r.threads)?;
    out.csv("cell_metrics.csv", &rows)?;
    out.manifest(&r.file, json!({ "rows": rows.len() }))?;
    Ok(())
}

#[derive(Serialize)]
struct ParetoRow {
    placement: String,
    cell_outage: f64,
    fronthaul: f64,
    nondominated: bool,
    supported: bool,
}

pub fn pareto(r: Resolved) -> Result<(), CliError> {
    let ev = Evaluator::new(r.file.build()?);
    let config = ExhaustiveConfig { budget: r.budget, ..Default::default() };
    let candidates = enumerate_tradeoffs(&ev, &config)?;
    let points: Vec<(f64, f64)> = candidates.iter().map(|(_, t)| (t.cell_outage, t.fronthaul)).collect();
    let front = pareto_filter(&points);
    let supported = supported_front(&points);
    let rows: Vec<ParetoRow> = candidates
        .iter()
        .map(|(a, t)| {
            let p = (t.cell_outage, t.fronthaul);
            ParetoRow {
                placement: a.to_string(),
                cell_outage: t.cell_outage,
                fronthaul: t.fronthaul,
                nondominated: front.contains(&p),
                supported: supported.contains(&p),
            }
        })
        .collect();
    println!(
        "{} candidates, {} nondominated points, {} supported by a weighted sum",
        rows.len(),
        front.len(),
        supported.len()
    );
    for (x, y) in &supported {
        println!("  supported: outage={x:.4} fronthaul={y:.4}");
    }
    let mut out = RunOutput::create(&r.out, "pareto", &r.file, r.threads)?;
    out.csv("pareto.csv", &rows)?;
    out.manifest(
        &r.file,
        json!({
            "candidates": rows.len(),
            "nondominated_points": front.len(),
            "supported_points": supported.len(),
            "supported": supported,
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct OptimumRow {
    eta: f64,
    placement: String,
    value: f64,
    cell_outage: f64,
    fronthaul: f64,
    /// Candidates enumerated (exhaustive) or populations evaluated (GA).
    work: usize,
}

pub fn exhaustive(r: Resolved) -> Result<(), CliError> {
    let ev = Evaluator::new(r.file.build()?);
    let config = ExhaustiveConfig { budget: r.budget, ..Default::default() };
    let mut rows = Vec::new();
    for &eta in &r.file.eta_grid {
        let o = exhaustive_search(&ev, eta, &config)?;
        println!("eta={eta:.2} {} value={:.4}", o.best, o.point.value);
        rows.push(OptimumRow {
            eta,
            placement: o.best.to_string(),
            value: o.point.value,
            cell_outage: o.point.cell_outage,
            fronthaul: o.point.fronthaul,
            work: o.candidates,
        });
    }
    let mut out = RunOutput::create(&r.out, "exhaustive", &r.file, r.threads)?;
    out.csv("exhaustive.csv", &rows)?;
    out.manifest(&r.file, json!({ "rows": rows.len() }))?;
    Ok(())
}

pub fn table5(r: Resolved) -> Result<(), CliError> {
    let ev = Evaluator::new(r.file.build()?);
    let mut rows = Vec::new();
    for &eta in &r.file.eta_grid {
        let o = ga_optimize(&ev, eta, &r.file.ga)?;
        println!("eta={eta:.2} {} value={:.4} generations={}", o.best, o.point.value, o.generations);
        rows.push(OptimumRow {
            eta,
            placement: o.best.to_string(),
            value: o.point.value,
            cell_outage: o.point.cell_outage,
            fronthaul: o.point.fronthaul,
            work: o.generations,
        });
    }
    let mut out = RunOutput::create(&r.out, "table5", &r.file, r.threads)?;
    out.csv("table5.csv", &rows)?;
    out.manifest(&r.file, json!({ "rows": rows.len() }))?;
    Ok(())
}

#[derive(Serialize)]
struct HistoryRow {
    generation: usize,
    best: f64,
    mean: f64,
}

pub fn ga_run(r: Resolved) -> Result<(), CliError> {
    let ev = Evaluator::new(r.file.build()?);
    let eta = r.file.eta_grid[0];
    let o = ga_optimize(&ev, eta, &r.file.ga)?;
    let history: Vec<HistoryRow> = o
        .history
        .iter()
        .enumerate()
        .map(|(g, h)| HistoryRow { generation: g + 1, best: h.best, mean: h.mean })
        .collect();
    let result = [OptimumRow {
        eta,
        placement: o.best.to_string(),
        value: o.point.value,
        cell_outage: o.point.cell_outage,
        fronthaul: o.point.fronthaul,
        work: o.generations,
    }];
    println!(
        "eta={eta:.2} {} value={:.5} generations={} last_improvement={} evaluations={}",
        o.best, o.point.value, o.generations, o.last_improvement, o.evaluations
    );
    let mut out = RunOutput::create(&r.out, "ga-run", &r.file, r.threads)?;
    out.csv("ga_result.csv", &result)?;
    out.csv("ga_history.csv", &history)?;
    out.manifest(
        &r.file,
        json!({
            "eta": eta,
            "placement": o.best.to_string(),
            "value": o.point.value,
            "generations": o.generations,
            "last_improvement": o.last_improvement,
            "evaluations": o.evaluations,
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    eta: f64,
    strategy: &'static str,
    value: f64,
    std_err: f64,
    cell_outage: f64,
    fronthaul: f64,
    placement: String,
}

fn fixed_row(eta: f64, strategy: &'static str, t: Tradeoff, placement: String) -> SweepRow {
    SweepRow {
        eta,
        strategy,
        value: t.at(eta).value,
        std_err: 0.0,
        cell_outage: t.cell_outage,
        fronthaul: t.fronthaul,
        placement,
    }
}

pub fn sweep_eta(r: Resolved) -> Result<(), CliError> {
    let ev = Evaluator::new(r.file.build()?);
    let eta0 = match eta_crossover(&ev) {
        Ok(c) => Some(c.eta0),
        Err(cranopt::Error::NoCrossover(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let draws = r.file.sweep.baseline_draws;
    let seed = r.file.sim.seed;
    let random = baseline_tradeoffs(&ev, Baseline::Random, draws, &mut substream(seed, BASELINE_STREAM))?;
    let prob = baseline_tradeoffs(&ev, Baseline::Probabilistic, draws, &mut substream(seed, BASELINE_STREAM + 1))?;
    let (mpc, lcd) = (ev.mpc(), ev.lb_lcd());
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for &eta in &r.file.eta_grid {
        let ga = ga_optimize(&ev, eta, &r.file.ga)?;
        let mode = mode_select(&ev, eta)?;
        rows.push(fixed_row(eta, "ga", ev.tradeoff(&ga.best)?, ga.best.to_string()));
        rows.push(fixed_row(eta, "mode_select", ev.tradeoff(&mode.placement)?, mode.placement.to_string()));
        rows.push(fixed_row(eta, "mpc", ev.tradeoff(&mpc)?, mpc.to_string()));
        rows.push(fixed_row(eta, "lb_lcd", ev.tradeoff(&lcd)?, lcd.to_string()));
        for (strategy, samples) in [(Baseline::Random, &random), (Baseline::Probabilistic, &prob)] {
            let e = BaselineEstimate::from_tradeoffs(samples, eta)?;
            rows.push(SweepRow {
                eta,
                strategy: strategy.name(),
                value: e.value.mean,
                std_err: e.value.std_err,
                cell_outage: e.cell_outage.mean,
                fronthaul: e.fronthaul.mean,
                placement: String::new(),
            });
            if strategy == Baseline::Probabilistic && e.value.mean > 0.0 {
                gaps.push(1.0 - ga.point.value / e.value.mean);
            }
        }
        println!(
            "eta={eta:.2} ga={:.5} mode={:.5} mpc={:.5} lb_lcd={:.5}",
            ga.point.value,
            ev.evaluate(&mode.placement, eta)?.value,
            ev.evaluate(&mpc, eta)?.value,
            ev.evaluate(&lcd, eta)?.value
        );
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    match eta0 {
        Some(e) => println!("eta0 = {e:.4}"),
        None => println!("eta0 undefined: MPC and LB-LCD coincide"),
    }
    println!("mean GA improvement over probabilistic caching: {:.1}%", 100.0 * mean_gap);
    let mut out = RunOutput::create(&r.out, "sweep-eta", &r.file, r.threads)?;
    out.csv("sweep_eta.csv", &rows)?;
    out.manifest(
        &r.file,
        json!({
            "eta0": eta0,
            "baseline_draws": draws,
            "mean_ga_improvement_over_probabilistic": mean_gap,
        }),
    )?;
    Ok(())
}
