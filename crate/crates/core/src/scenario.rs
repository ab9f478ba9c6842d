//! Scenario description: the TOML file schema, validation, and presets.

use serde::{Deserialize, Serialize};

use crate::analytics::OutageModel;
use crate::error::{Error, Result};
use crate::model::{FileLibrary, Polar, RadioConfig, RrhLayout};
use crate::montecarlo::SimConfig;
use crate::quadrature::{SimpsonGrid, DEFAULT_U, DEFAULT_V};
use crate::solvers::GaConfig;

/// A validated experiment: library, geometry, radio and quadrature.
#[derive(Debug, Clone)]
pub struct Scenario {
    library: FileLibrary,
    layout: RrhLayout,
    radio: RadioConfig,
    grid: SimpsonGrid,
    model: OutageModel,
}

impl Scenario {
    pub fn new(library: FileLibrary, layout: RrhLayout, radio: RadioConfig, u: usize, v: usize) -> Result<Self> {
        radio.validate()?;
        let files = library.len();
        if let Some(n) = layout.cache_sizes().iter().position(|&m| m > files) {
            return Err(Error::invalid(
                format!("layout.cache_sizes[{n}]"),
                format!("cache of {} exceeds library size {files}", layout.cache_sizes()[n]),
            ));
        }
        if layout.total_cache() > files {
            return Err(Error::invalid(
                "layout.cache_sizes",
                format!("total cache {} exceeds library size {files}", layout.total_cache()),
            ));
        }
        let grid = SimpsonGrid::new(layout.radius(), u, v)?;
        let model = OutageModel::new(&layout, &radio);
        Ok(Self { library, layout, radio, grid, model })
    }

    pub fn library(&self) -> &FileLibrary {
        &self.library
    }

    pub fn layout(&self) -> &RrhLayout {
        &self.layout
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn grid(&self) -> &SimpsonGrid {
        &self.grid
    }

    pub fn model(&self) -> &OutageModel {
        &self.model
    }

    pub fn files(&self) -> usize {
        self.library.len()
    }

    /// `L'`: total cache over all RRHs.
    pub fn total_cache(&self) -> usize {
        self.layout.total_cache()
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let library = FileLibrary::zipf(self.files(), beta)?;
        Self::new(library, self.layout.clone(), self.radio, self.grid.u(), self.grid.v())
    }

    pub fn with_quadrature(&self, u: usize, v: usize) -> Result<Self> {
        Self::new(self.library.clone(), self.layout.clone(), self.radio, u, v)
    }

    pub fn with_gamma_th_db(&self, gamma_th_db: f64) -> Result<Self> {
        let radio = RadioConfig { gamma_th_db, ..self.radio };
        Self::new(self.library.clone(), self.layout.clone(), radio, self.grid.u(), self.grid.v())
    }

    pub fn with_layout(&self, layout: RrhLayout) -> Result<Self> {
        Self::new(self.library.clone(), layout, self.radio, self.grid.u(), self.grid.v())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibrarySection {
    pub files: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    #[serde(default = "one")]
    pub radius: f64,
    /// RRH positions, radians.
    pub rrh: Vec<Polar>,
    pub cache_sizes: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub u: usize,
    pub v: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { u: DEFAULT_U, v: DEFAULT_V }
    }
}

/// A named list of link distances (fractions of `R`) for CDF validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceSet {
    pub tag: String,
    pub distances: Vec<f64>,
}

/// Parameter sweeps used by the figure commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_gamma_th_sweep")]
    pub gamma_th_db: Vec<f64>,
    #[serde(default = "default_beta_sweep")]
    pub beta: Vec<f64>,
    /// Number of random / probabilistic placements averaged per point.
    #[serde(default = "default_baseline_draws")]
    pub baseline_draws: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            gamma_th_db: default_gamma_th_sweep(),
            beta: default_beta_sweep(),
            baseline_draws: default_baseline_draws(),
        }
    }
}

fn default_gamma_th_sweep() -> Vec<f64> {
    (0..=10).map(|k| -5.0 + 2.0 * k as f64).collect()
}

fn default_beta_sweep() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
}

fn default_baseline_draws() -> usize {
    200
}

pub fn default_eta_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// On-disk scenario schema (TOML). Angles are radians, `rho` is absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub library: LibrarySection,
    pub layout: LayoutSection,
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default = "default_eta_grid")]
    pub eta_grid: Vec<f64>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub distance_sets: Vec<DistanceSet>,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks everything that does not need the built [`Scenario`].
    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        self.sim.validate()?;
        for (i, &eta) in self.eta_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid(format!("eta_grid[{i}]"), format!("must lie in [0, 1], got {eta}")));
            }
        }
        for (i, set) in self.distance_sets.iter().enumerate() {
            if set.distances.is_empty() || set.distances.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
                return Err(Error::invalid(format!("distance_sets[{i}].distances"), "must be non-empty and > 0"));
            }
        }
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Scenario> {
        let library = FileLibrary::zipf(self.library.files, self.library.beta)?;
        let layout = RrhLayout::new(self.layout.radius, self.layout.rrh.clone(), self.layout.cache_sizes.clone())?;
        Scenario::new(library, layout, self.radio, self.quadrature.u, self.quadrature.v)
    }

    /// Loads a preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        let text = match name {
            "fig2" => include_str!("../presets/fig2.toml"),
            "fig4_5" => include_str!("../presets/fig4_5.toml"),
            "fig5_pareto" => include_str!("../presets/fig5_pareto.toml"),
            "fig6_9" => include_str!("../presets/fig6_9.toml"),
            _ => return None,
        };
        Some(Self::from_toml(text).expect("shipped preset is valid"))
    }
}

pub const PRESETS: [&str; 4] = ["fig2", "fig4_5", "fig5_pareto", "fig6_9"];
