//! Cell averages by composite Simpson integration in polar coordinates.
//!
//! ```text
//! E[f] ~ (dh dk / 9) sum_u sum_v w_uv rho_u f(rho_u, theta_v) p(rho_u, theta_v)
//! ```
//!
//! with `dh = R/U`, `dk = 2 pi/V` and `w_uv` the tensor product of the 1-D
//! patterns `1, 4, 2, 4, ..., 4, 1`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analytics::OutageModel;
use crate::error::{Error, Result};
use crate::model::{service_set, PlacementMatrix, Polar, RrhLayout, RrhSet};

/// A grid node closer than this fraction of `R` to an RRH is moved outwards.
pub const COLLISION_TOL: f64 = 1e-9;
/// Radial displacement (fraction of `R`) applied to colliding nodes.
pub const COLLISION_SHIFT: f64 = 1e-6;

/// Default subdivision counts.
pub const DEFAULT_U: usize = 6;
pub const DEFAULT_V: usize = 6;

/// Density of the user location over the disk.
pub trait LocationDensity: Sync {
    fn density(&self, at: Polar) -> f64;
}

/// Uniform location over the disk of radius `R`: `1 / (pi R^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDisk {
    pub radius: f64,
}

impl LocationDensity for UniformDisk {
    fn density(&self, _at: Polar) -> f64 {
        1.0 / (PI * self.radius * self.radius)
    }
}

impl<F: Fn(Polar) -> f64 + Sync> LocationDensity for F {
    fn density(&self, at: Polar) -> f64 {
        self(at)
    }
}

/// Composite Simpson lattice over the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpsonGrid {
    radius: f64,
    u: usize,
    v: usize,
    theta_offset: f64,
}

/// The 1-D composite Simpson weights `1, 4, 2, ..., 4, 1` for `n` intervals.
pub fn simpson_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .collect()
}

impl SimpsonGrid {
    pub fn new(radius: f64, u: usize, v: usize) -> Result<Self> {
        Self::with_offset(radius, u, v, 0.0)
    }

    /// Grid whose angular nodes start at `theta_offset` instead of 0.
    pub fn with_offset(radius: f64, u: usize, v: usize, theta_offset: f64) -> Result<Self> {
        for (field, n) in [("quadrature.u", u), ("quadrature.v", v)] {
            if n == 0 || n % 2 != 0 {
                return Err(Error::invalid(field, format!("must be even and >= 2, got {n}")));
            }
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("layout.radius", "must be finite and > 0"));
        }
        Ok(Self { radius, u, v, theta_offset })
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn delta_h(&self) -> f64 {
        self.radius / self.u as f64
    }

    pub fn delta_k(&self) -> f64 {
        2.0 * PI / self.v as f64
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        simpson_weights(self.u)[u] * simpson_weights(self.v)[v]
    }

    pub fn node(&self, u: usize, v: usize) -> Polar {
        Polar::new(u as f64 * self.delta_h(), self.theta_offset + v as f64 * self.delta_k())
    }

    /// `(node, w_uv * rho_u)` for every node with `rho_u > 0`; the `u = 0` ring
    /// carries zero Jacobian and is skipped.
    pub fn weighted_nodes(&self) -> Vec<(Polar, f64)> {
        let wu = simpson_weights(self.u);
        let wv = simpson_weights(self.v);
        let mut nodes = Vec::with_capacity(self.u * (self.v + 1));
        for (u, &a) in wu.iter().enumerate().skip(1) {
            for (v, &b) in wv.iter().enumerate() {
                let p = self.node(u, v);
                nodes.push((p, a * b * p.rho));
            }
        }
        nodes
    }

    /// Integrates `f * density` over the disk.
    pub fn integrate<F, D>(&self, f: F, density: &D) -> Result<f64>
    where
        F: Fn(Polar) -> Result<f64> + Sync,
        D: LocationDensity + ?Sized,
    {
        let terms: Vec<f64> = self
            .weighted_nodes()
            .into_par_iter()
            .map(|(p, w)| Ok(w * f(p)? * density.density(p)))
            .collect::<Result<_>>()?;
        Ok(self.delta_h() * self.delta_k() / 9.0 * pairwise_sum(&terms))
    }

    /// Moves a node that sits on an RRH radially outwards.
    pub fn displace(&self, p: Polar, rrhs: &[Polar]) -> Polar {
        if rrhs.iter().any(|&r| p.distance(r) <= COLLISION_TOL * self.radius) {
            Polar::new(p.rho + COLLISION_SHIFT * self.radius, p.theta)
        } else {
            p
        }
    }
}

/// Order-fixed pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Cell-average outage of service set `members`, clamped to `[0, 1]`.
pub fn service_set_average<D: LocationDensity + ?Sized>(
    members: RrhSet,
    grid: &SimpsonGrid,
    model: &OutageModel,
    density: &D,
) -> Result<f64> {
    let rrhs = model.positions();
    let avg = grid.integrate(|p| model.outage(members, grid.displace(p, rrhs)), density)?;
    Ok(avg.clamp(0.0, 1.0))
}

/// `E_x[P_out^(l)(x)]` for file `file` under `placement`.
pub fn cell_average_outage<D: LocationDensity + ?Sized>(
    placement: &PlacementMatrix,
    file: usize,
    grid: &SimpsonGrid,
    model: &OutageModel,
    density: &D,
) -> Result<f64> {
    service_set_average(service_set(placement, file)?.members, grid, model, density)
}

/// Uniform-density convenience wrapper around [`cell_average_outage`].
pub fn cell_average_outage_uniform(
    placement: &PlacementMatrix,
    file: usize,
    grid: &SimpsonGrid,
    layout: &RrhLayout,
    model: &OutageModel,
) -> Result<f64> {
    cell_average_outage(placement, file, grid, model, &UniformDisk { radius: layout.radius() })
}
