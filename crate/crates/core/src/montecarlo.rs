//! Monte-Carlo oracle: Rayleigh fading, uniform user locations and Zipf
//! requests, simulated independently of the analytic paths.
//!
//! Work is split into a fixed number of ChaCha8 substreams `(seed, stream)`
//! and merged by count, so estimates depend on the seed only, not on the
//! number of worker threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::Channel;
use crate::error::{Error, Result};
use crate::model::{service_set, PlacementMatrix, Polar};
use crate::objective::check_eta;
use crate::scenario::Scenario;

/// Number of RNG substreams work is partitioned into.
pub const STREAMS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub fading_draws: usize,
    pub location_draws: usize,
    pub request_draws: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { fading_draws: 1_000_000, location_draws: 10_000, request_draws: 10_000, seed: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, n) in [
            ("sim.fading_draws", self.fading_draws),
            ("sim.location_draws", self.location_draws),
            ("sim.request_draws", self.request_draws),
        ] {
            if n == 0 {
                return Err(Error::invalid(field, "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Fading draws per user location in cell-outage estimates.
    pub fn fading_per_location(&self) -> usize {
        (self.fading_draws / self.location_draws).max(1)
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { mean, std_err: (var / n as f64).sqrt(), samples: n }
    }

    /// Bernoulli proportion with the binomial standard error.
    pub fn proportion(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Self { mean: p, std_err: (p * (1.0 - p) / n as f64).sqrt(), samples: n }
    }

    /// Whether `value` lies within `k` standard errors (plus `slack`).
    pub fn covers(&self, value: f64, k: f64, slack: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err + slack
    }
}

/// Running sums for merging substream results.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    fn estimate(self) -> Estimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { mean, std_err: (var / n).sqrt(), samples: self.n }
    }
}

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `total` draws into [`STREAMS`] contiguous chunks.
fn chunks(total: usize) -> Vec<(u64, usize)> {
    let k = STREAMS as usize;
    (0..k).map(|i| (i as u64, total / k + usize::from(i < total % k))).filter(|&(_, n)| n > 0).collect()
}

/// Mean link SNRs `gamma_0 S_n` for the given distances.
pub fn mean_link_snrs(distances: &[f64], channel: &Channel) -> Result<Vec<f64>> {
    distances.iter().map(|&d| Ok(channel.gamma0 * channel.large_scale_fading(d)?)).collect()
}

/// `points` log-spaced SNR values from `mean / 30` to `4 mean`, where `mean`
/// is the total mean SNR; covers the CDF from near 0 to near 1.
pub fn cdf_gamma_grid(gains: &[f64], points: usize) -> Vec<f64> {
    let mean: f64 = gains.iter().sum();
    let (lo, hi) = ((mean / 30.0).ln(), (4.0 * mean).ln());
    (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64).exp()).collect()
}

/// One draw of `sum_n gamma_0 S_n |h_n|^2` with `|h_n|^2 ~ Exp(1)`.
pub fn sample_snr_from_gains<R: Rng + ?Sized>(gains: &[f64], rng: &mut R) -> f64 {
    gains.iter().map(|g| g * rng.sample::<f64, _>(Exp1)).sum()
}

pub fn sample_received_snr<R: Rng + ?Sized>(distances: &[f64], channel: &Channel, rng: &mut R) -> Result<f64> {
    Ok(sample_snr_from_gains(&mean_link_snrs(distances, channel)?, rng))
}

/// Area-uniform point in the disk: `rho = R sqrt(u)`.
pub fn sample_uniform_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Polar {
    let u: f64 = rng.random();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    Polar::new(radius * u.sqrt(), theta)
}

/// Empirical `P(SNR <= gamma)` at each threshold from `draws` fading draws.
pub fn empirical_cdf(
    distances: &[f64],
    channel: &Channel,
    gammas: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if draws == 0 {
        return Err(Error::invalid("sim.fading_draws", "must be >= 1"));
    }
    let gains = mean_link_snrs(distances, channel)?;
    let hits = chunks(draws)
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = substream(seed, stream);
            let mut hits = vec![0usize; gammas.len()];
            for _ in 0..n {
                let snr = sample_snr_from_gains(&gains, &mut rng);
                for (h, &g) in hits.iter_mut().zip(gammas) {
                    *h += usize::from(snr <= g);
                }
            }
            hits
        })
        .reduce(|| vec![0; gammas.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    Ok(hits.into_iter().map(|h| Estimate::proportion(h, draws)).collect())
}

/// SNR of one fading draw at `user`; a user on top of a serving RRH never
/// falls into outage.
fn draw_snr<R: Rng + ?Sized>(members: &[Polar], user: Polar, channel: &Channel, rng: &mut R) -> f64 {
    members
        .iter()
        .map(|&p| {
            let d = user.distance(p);
            if d > 0.0 {
                channel.gamma0 * channel.k * d.powf(-channel.alpha) * rng.sample::<f64, _>(Exp1)
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

/// Outage of file `file` averaged over `sim.location_draws` uniform user
/// locations with [`SimConfig::fading_per_location`] fading draws each.
///
/// The standard error is computed from the per-location means, so location
/// and fading variability are both reflected.
pub fn empirical_cell_outage(
    placement: &PlacementMatrix,
    file: usize,
    scenario: &Scenario,
    sim: &SimConfig,
) -> Result<Estimate> {
    sim.validate()?;
    let set = service_set(placement, file)?;
    let positions = scenario.model().positions();
    let members: Vec<Polar> = set.members.iter().map(|n| positions[n]).collect();
    let channel = *scenario.model().channel();
    let radius = scenario.layout().radius();
    let per = sim.fading_per_location();
    let m = chunks(sim.location_draws)
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = substream(sim.seed, stream);
            let mut m = Moments::default();
            for _ in 0..n {
                let user = sample_uniform_disk(radius, &mut rng);
                let out = (0..per).filter(|_| draw_snr(&members, user, &channel, &mut rng) < channel.gamma_th).count();
                m.push(out as f64 / per as f64);
            }
            m
        })
        .reduce(Moments::default, Moments::merge);
    Ok(m.estimate())
}

/// Sampled objective components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveEstimate {
    pub eta: f64,
    pub value: Estimate,
    pub cell_outage: Estimate,
    pub fronthaul: Estimate,
}

/// Samples `sim.request_draws` (file, location, fading) triples and averages
/// `eta 1{outage} + (1 - eta) T_l`.
pub fn empirical_objective(
    placement: &PlacementMatrix,
    eta: f64,
    scenario: &Scenario,
    sim: &SimConfig,
) -> Result<ObjectiveEstimate> {
    check_eta(eta)?;
    sim.validate()?;
    placement.validate(scenario.files(), scenario.layout().cache_sizes())?;
    let requests =
        WeightedIndex::new(scenario.library().popularity()).map_err(|e| Error::invalid("library", e.to_string()))?;
    let positions = scenario.model().positions();
    let sets: Vec<(Vec<Polar>, bool)> = (0..scenario.files())
        .map(|l| {
            let s = service_set(placement, l)?;
            Ok((s.members.iter().map(|n| positions[n]).collect(), s.uses_fronthaul))
        })
        .collect::<Result<_>>()?;
    let channel = *scenario.model().channel();
    let radius = scenario.layout().radius();
    let (v, o, f) = chunks(sim.request_draws)
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = substream(sim.seed, stream);
            let (mut v, mut o, mut f) = (Moments::default(), Moments::default(), Moments::default());
            for _ in 0..n {
                let (members, fronthaul) = &sets[requests.sample(&mut rng)];
                let user = sample_uniform_disk(radius, &mut rng);
                let out = f64::from(u8::from(draw_snr(members, user, &channel, &mut rng) < channel.gamma_th));
                let t = f64::from(u8::from(*fronthaul));
                v.push(eta * out + (1.0 - eta) * t);
                o.push(out);
                f.push(t);
            }
            (v, o, f)
        })
        .reduce(
            || (Moments::default(), Moments::default(), Moments::default()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)),
        );
    Ok(ObjectiveEstimate { eta, value: v.estimate(), cell_outage: o.estimate(), fronthaul: f.estimate() })
}
