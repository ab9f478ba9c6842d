//! Exact distribution of the received SNR when a set of RRHs jointly
//! transmits over independent Rayleigh links.
//!
//! Each link contributes `gamma_0 S_n |h_n|^2` with `|h_n|^2 ~ Exp(1)`, so the
//! total SNR is a sum of independent exponentials whose MGF is
//! `prod_i (1 - s / lambda_i)^-J_i`. RRHs at the same distance share a rate
//! `lambda_i` with multiplicity `J_i`. The partial-fraction residues `A_ij`
//! turn the MGF into a mixture of Erlang terms:
//!
//! ```text
//! f(g) = sum_ij A_ij lambda_i^j g^(j-1) e^(-lambda_i g) / (j-1)!
//! F(g) = sum_ij A_ij P(j, lambda_i g)
//! ```
//!
//! where `P` is the regularized lower incomplete gamma function.
//!
//! All SNRs are linear here; dB conversion happens in [`crate::model::RadioConfig`].

use crate::dd::{diff, Dd};
use crate::error::{Error, Result};
use crate::model::{service_set, PlacementMatrix, Polar, RadioConfig, RrhLayout, RrhSet};

/// Distances closer than this fraction of the cell radius are one pole.
pub const DISTANCE_MERGE_TOL: f64 = 1e-9;

/// Two rates closer than this (relative) are treated as unmerged duplicates.
pub const RATE_MERGE_TOL: f64 = 1e-9;

/// Linear link budget resolved from [`RadioConfig`] for one layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Per-RRH transmit SNR.
    pub gamma0: f64,
    /// Path-loss constant `K`.
    pub k: f64,
    pub alpha: f64,
    /// Outage threshold (linear).
    pub gamma_th: f64,
}

impl Channel {
    pub fn new(radio: &RadioConfig, layout: &RrhLayout) -> Self {
        Self {
            gamma0: radio.per_rrh_snr(layout.rrh_count()),
            k: radio.path_loss_constant(layout.radius()),
            alpha: radio.alpha,
            gamma_th: radio.gamma_th(),
        }
    }

    /// Large-scale gain `S = K d^-alpha`.
    pub fn large_scale_fading(&self, d: f64) -> Result<f64> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::invalid("distance", format!("must be finite and > 0, got {d}")));
        }
        Ok(self.k * d.powf(-self.alpha))
    }

    /// Exponential rate `lambda = 1 / (gamma_0 S)` of one link's SNR.
    pub fn rate(&self, d: f64) -> Result<f64> {
        Ok(1.0 / (self.gamma0 * self.large_scale_fading(d)?))
    }
}

/// One distinct rate and the number of links sharing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleGroup {
    pub rate: f64,
    pub multiplicity: usize,
}

/// Groups link distances that agree within `tol` (absolute) into poles.
///
/// Groups come back sorted by ascending rate (ascending distance).
pub fn group_poles(distances: &[f64], channel: &Channel, tol: f64) -> Result<Vec<PoleGroup>> {
    if distances.is_empty() {
        return Err(Error::invalid("distances", "at least one link is required"));
    }
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let anchor = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] - anchor <= tol {
            j += 1;
        }
        let mean = sorted[i..j].iter().sum::<f64>() / (j - i) as f64;
        groups.push(PoleGroup { rate: channel.rate(mean)?, multiplicity: j - i });
        i = j;
    }
    Ok(groups)
}

/// Grouped poles with their partial-fraction residues.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSpectrum {
    groups: Vec<PoleGroup>,
    /// `residues[i][j-1] = A_ij`, double-double.
    residues: Vec<Vec<Dd>>,
}

impl PoleSpectrum {
    /// Partial-fraction expansion of `prod_i (1 - s/lambda_i)^-J_i`.
    ///
    /// For group `i` with deflated MGF `g(s) = prod_{k != i} (1 - s/lambda_k)^-J_k`,
    /// `A_{i, J_i - r} = (-lambda_i)^r g^(r)(lambda_i) / r!`. The scaled Taylor
    /// coefficients `e_r` of `g` follow from `log g`, whose derivatives are the
    /// power sums `sum_k J_k (m-1)! / (lambda_k - s)^m`:
    ///
    /// ```text
    /// e_0 = prod_k (lambda_k / (lambda_k - lambda_i))^J_k
    /// r e_r = sum_{m=1..r} t_m e_{r-m},  t_m = sum_k J_k (lambda_i / (lambda_i - lambda_k))^m
    /// ```
    pub fn from_groups(groups: &[PoleGroup]) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("groups", "at least one pole is required"));
        }
        let mut groups = groups.to_vec();
        for g in &groups {
            if !(g.rate > 0.0 && g.rate.is_finite()) || g.multiplicity == 0 {
                return Err(Error::invalid("groups", format!("bad pole {g:?}")));
            }
        }
        groups.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        for w in groups.windows(2) {
            if w[1].rate - w[0].rate <= RATE_MERGE_TOL * w[1].rate {
                return Err(Error::IllConditioned { a: w[0].rate, b: w[1].rate });
            }
        }

        let residues = groups
            .iter()
            .enumerate()
            .map(|(i, gi)| {
                let li = gi.rate;
                let others = || groups.iter().enumerate().filter(move |&(k, _)| k != i).map(|(_, g)| g);
                let order = gi.multiplicity;
                let mut e = Vec::with_capacity(order);
                e.push(
                    others().map(|g| (Dd::from(g.rate) / diff(g.rate, li)).powi(g.multiplicity as u32)).product::<Dd>(),
                );
                let t: Vec<Dd> = (1..order)
                    .map(|m| {
                        others()
                            .map(|g| (Dd::from(li) / diff(li, g.rate)).powi(m as u32) * g.multiplicity as f64)
                            .sum::<Dd>()
                    })
                    .collect();
                for r in 1..order {
                    let acc: Dd = (1..=r).map(|m| t[m - 1] * e[r - m]).sum();
                    e.push(acc / r as f64);
                }
                // A_{i,j} = e_{J_i - j}
                e.into_iter().rev().collect()
            })
            .collect();
        Ok(Self { groups, residues })
    }

    /// Spectrum of the links at `distances` (grouping tolerance `tol`, absolute).
    pub fn from_distances(distances: &[f64], channel: &Channel, tol: f64) -> Result<Self> {
        Self::from_groups(&group_poles(distances, channel, tol)?)
    }

    pub fn groups(&self) -> &[PoleGroup] {
        &self.groups
    }

    /// `A_ij` for group `i` (0-based) and power `j` (1-based).
    pub fn residue(&self, i: usize, j: usize) -> f64 {
        self.residues[i][j - 1].to_f64()
    }

    pub fn residues(&self) -> Vec<Vec<f64>> {
        self.residues.iter().map(|a| a.iter().map(|x| x.to_f64()).collect()).collect()
    }

    /// Number of links, `sum_i J_i`.
    pub fn total_order(&self) -> usize {
        self.groups.iter().map(|g| g.multiplicity).sum()
    }

    pub fn residue_sum(&self) -> f64 {
        self.residues.iter().flatten().copied().sum::<Dd>().to_f64()
    }

    /// MGF reconstructed from the partial-fraction expansion, `s < min lambda`.
    pub fn mgf_expansion(&self, s: f64) -> f64 {
        self.terms().map(|(lambda, j, a)| a * (Dd::from(lambda) / diff(lambda, s)).powi(j as u32)).sum::<Dd>().to_f64()
    }

    /// MGF from the product form.
    pub fn mgf_product(&self, s: f64) -> f64 {
        self.groups.iter().map(|g| (1.0 - s / g.rate).powi(-(g.multiplicity as i32))).product()
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        if gamma == 0.0 {
            return Ok(self.terms().filter(|t| t.1 == 1).map(|(lambda, _, a)| a * lambda).sum::<Dd>().to_f64());
        }
        Ok(self
            .terms()
            .map(|(lambda, j, a)| {
                // lambda^j g^(j-1) e^(-lambda g) / (j-1)!
                let x = Dd::from(lambda) * gamma;
                let mut w = (-x).exp() * lambda;
                for k in 1..j {
                    w = w * x / k as f64;
                }
                a * w
            })
            .sum::<Dd>()
            .to_f64())
    }

    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        Ok(self.terms().map(|(lambda, j, a)| a * erlang_cdf_dd(j, Dd::from(lambda) * gamma)).sum::<Dd>().to_f64())
    }

    fn terms(&self) -> impl Iterator<Item = (f64, usize, Dd)> + '_ {
        self.groups
            .iter()
            .zip(&self.residues)
            .flat_map(|(g, a)| a.iter().enumerate().map(move |(j, &a)| (g.rate, j + 1, a)))
    }
}

/// [`erlang_cdf`] in double-double.
fn erlang_cdf_dd(j: usize, x: Dd) -> Dd {
    if x.hi <= 0.0 {
        return Dd::ZERO;
    }
    let ex = (-x).exp();
    if x.hi < j as f64 {
        // e^-x sum_{k>=j} x^k / k!
        let mut term = ex;
        for k in 1..=j {
            term = term * x / k as f64;
        }
        let mut sum = term;
        let mut k = j;
        loop {
            k += 1;
            term = term * x / k as f64;
            sum = sum + term;
            if term.hi <= sum.hi * 1e-33 {
                return sum;
            }
        }
    } else {
        let mut term = ex;
        let mut upper = term;
        for k in 1..j {
            term = term * x / k as f64;
            upper = upper + term;
        }
        Dd::ONE - upper
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("SNR must be >= 0, got {gamma}")))
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Regularized lower incomplete gamma `P(j, x)` for integer shape `j >= 1`:
/// the CDF of an Erlang(j) variable with unit rate at `x`.
pub fn erlang_cdf(j: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if j == 1 {
        return -(-x).exp_m1();
    }
    if x < j as f64 {
        // e^-x sum_{k>=j} x^k / k!
        let mut term = (j as f64 * x.ln() - x - ln_factorial(j)).exp();
        let mut sum = term;
        let mut k = j;
        loop {
            k += 1;
            term *= x / k as f64;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        sum
    } else {
        let mut term = (-x).exp();
        let mut upper = term;
        for k in 1..j {
            term *= x / k as f64;
            upper += term;
        }
        1.0 - upper
    }
}

/// CDF for pairwise distinct gains `S_n`:
/// `sum_n prod_{m != n} S_n / (S_n - S_m) (1 - exp(-g / (gamma_0 S_n)))`.
pub fn distinct_cdf(gains: &[f64], gamma0: f64, gamma: f64) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(n, &sn)| distinct_weight(gains, n) * (Dd::ONE - (-(Dd::from(gamma) / (Dd::from(gamma0) * sn))).exp()))
        .sum::<Dd>()
        .to_f64()
}

/// Density for pairwise distinct gains.
pub fn distinct_pdf(gains: &[f64], gamma0: f64, gamma: f64) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(n, &sn)| {
            let mean = Dd::from(gamma0) * sn;
            distinct_weight(gains, n) * (-(Dd::from(gamma) / mean)).exp() / mean
        })
        .sum::<Dd>()
        .to_f64()
}

fn distinct_weight(gains: &[f64], n: usize) -> Dd {
    let sn = gains[n];
    gains.iter().enumerate().filter(|&(m, _)| m != n).map(|(_, &sm)| Dd::from(sn) / diff(sn, sm)).product()
}

/// Outage model for one layout: positions, link budget and grouping tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageModel {
    channel: Channel,
    positions: Vec<Polar>,
    merge_tol: f64,
}

impl OutageModel {
    pub fn new(layout: &RrhLayout, radio: &RadioConfig) -> Self {
        Self {
            channel: Channel::new(radio, layout),
            positions: layout.positions().to_vec(),
            merge_tol: DISTANCE_MERGE_TOL * layout.radius(),
        }
    }

    pub fn with_channel(layout: &RrhLayout, channel: Channel) -> Self {
        Self { channel, positions: layout.positions().to_vec(), merge_tol: DISTANCE_MERGE_TOL * layout.radius() }
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn positions(&self) -> &[Polar] {
        &self.positions
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    /// Distances from `user` to each member RRH.
    pub fn distances(&self, members: RrhSet, user: Polar) -> Result<Vec<f64>> {
        members
            .iter()
            .map(|n| {
                let d = user.distance(self.positions[n]);
                if d > 0.0 {
                    Ok(d)
                } else {
                    Err(Error::Colocated { rrh: n + 1 })
                }
            })
            .collect()
    }

    pub fn spectrum(&self, members: RrhSet, user: Polar) -> Result<PoleSpectrum> {
        PoleSpectrum::from_distances(&self.distances(members, user)?, &self.channel, self.merge_tol)
    }

    /// `P(SNR < gamma_th)` for the user at `user` served by `members`.
    pub fn outage(&self, members: RrhSet, user: Polar) -> Result<f64> {
        let p = self.spectrum(members, user)?.cdf(self.channel.gamma_th)?;
        Ok(p.clamp(0.0, 1.0))
    }
}

/// Outage probability of file `file` under `placement` at `location`.
pub fn outage_probability(
    placement: &PlacementMatrix,
    file: usize,
    location: Polar,
    model: &OutageModel,
) -> Result<f64> {
    model.outage(service_set(placement, file)?.members, location)
}
