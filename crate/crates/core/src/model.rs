//! Domain types: file library, cell geometry, radio constants and cache
//! placements, plus the canonical placement constructors.
//!
//! Files are ranked by popularity and indexed from 0 (rank 0 is the most
//! popular file). RRHs are indexed from 0 in layout order.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest RRH count representable by [`RrhSet`].
pub const MAX_RRHS: usize = 64;

/// Zipf request probabilities `P_l = l^-beta / sum_n n^-beta`, `l = 1..=files`.
pub fn zipf_popularity(files: usize, beta: f64) -> Result<Vec<f64>> {
    if files == 0 {
        return Err(Error::invalid("library.files", "must be at least 1"));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::invalid("library.beta", format!("must be finite and >= 0, got {beta}")));
    }
    let raw: Vec<f64> = (1..=files).map(|l| (l as f64).powf(-beta)).collect();
    // sum smallest-first
    let total: f64 = raw.iter().rev().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// The ranked content library and its request distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FileLibrary {
    beta: f64,
    popularity: Vec<f64>,
}

impl FileLibrary {
    pub fn zipf(files: usize, beta: f64) -> Result<Self> {
        Ok(Self { beta, popularity: zipf_popularity(files, beta)? })
    }

    pub fn len(&self) -> usize {
        self.popularity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.popularity.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// Request probability mass of ranks `from..` (0-based).
    pub fn tail_mass(&self, from: usize) -> f64 {
        self.popularity.iter().skip(from).rev().sum()
    }

    /// Request probability mass of the `count` most popular files.
    pub fn head_mass(&self, count: usize) -> f64 {
        self.popularity.iter().take(count).rev().sum()
    }
}

/// A point in the cell in polar coordinates (angle in radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub rho: f64,
    pub theta: f64,
}

impl Polar {
    pub const ORIGIN: Polar = Polar { rho: 0.0, theta: 0.0 };

    pub fn new(rho: f64, theta: f64) -> Self {
        Self { rho, theta }
    }

    pub fn to_cartesian(self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (self.rho * c, self.rho * s)
    }

    pub fn distance(self, other: Polar) -> f64 {
        let (x1, y1) = self.to_cartesian();
        let (x2, y2) = other.to_cartesian();
        (x1 - x2).hypot(y1 - y2)
    }

    pub fn rotated(self, angle: f64) -> Polar {
        Polar { rho: self.rho, theta: self.theta + angle }
    }
}

/// RRH positions and cache capacities inside a disk of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RrhLayout {
    radius: f64,
    positions: Vec<Polar>,
    cache_sizes: Vec<usize>,
}

impl RrhLayout {
    pub fn new(radius: f64, positions: Vec<Polar>, cache_sizes: Vec<usize>) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("layout.radius", "must be finite and > 0"));
        }
        if positions.is_empty() {
            return Err(Error::invalid("layout.rrh", "at least one RRH is required"));
        }
        if positions.len() > MAX_RRHS {
            return Err(Error::invalid("layout.rrh", format!("at most {MAX_RRHS} RRHs are supported")));
        }
        if cache_sizes.len() != positions.len() {
            return Err(Error::invalid(
                "layout.cache_sizes",
                format!("expected {} entries, got {}", positions.len(), cache_sizes.len()),
            ));
        }
        for (n, p) in positions.iter().enumerate() {
            if !(p.rho.is_finite() && p.theta.is_finite()) || p.rho < 0.0 || p.rho > radius {
                return Err(Error::invalid(
                    format!("layout.rrh[{n}]"),
                    format!("rho must lie in [0, {radius}], got {}", p.rho),
                ));
            }
        }
        Ok(Self { radius, positions, cache_sizes })
    }

    /// Same cache size `m` at every RRH.
    pub fn uniform_cache(radius: f64, positions: Vec<Polar>, m: usize) -> Result<Self> {
        let n = positions.len();
        Self::new(radius, positions, vec![m; n])
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &[Polar] {
        &self.positions
    }

    pub fn cache_sizes(&self) -> &[usize] {
        &self.cache_sizes
    }

    pub fn rrh_count(&self) -> usize {
        self.positions.len()
    }

    /// `L' = sum_n M_n`: the number of distinct files the RRHs can hold together.
    pub fn total_cache(&self) -> usize {
        self.cache_sizes.iter().sum()
    }

    pub fn equal_cache_size(&self) -> Option<usize> {
        let first = self.cache_sizes[0];
        self.cache_sizes.iter().all(|&m| m == first).then_some(first)
    }

    /// RRH indices ordered by distance to the cell centre, ties by index.
    pub fn order_by_center_distance(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rrh_count()).collect();
        order.sort_by(|&a, &b| self.positions[a].rho.total_cmp(&self.positions[b].rho).then(a.cmp(&b)));
        order
    }

    /// The layout with every RRH rotated by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            radius: self.radius,
            positions: self.positions.iter().map(|p| p.rotated(angle)).collect(),
            cache_sizes: self.cache_sizes.clone(),
        }
    }
}

/// Radio constants as configured (dB where customary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Total transmit SNR `P / sigma^2` over all RRHs, dB.
    pub total_snr_db: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Outage threshold, dB.
    pub gamma_th_db: f64,
    /// Path loss at distance `R`, dB; fixes the constant `K`.
    #[serde(default = "default_attenuation")]
    pub attenuation_at_r_db: f64,
}

fn default_attenuation() -> f64 {
    20.0
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { total_snr_db: 23.0, alpha: 3.0, gamma_th_db: 3.0, attenuation_at_r_db: 20.0 }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("radio.total_snr_db", self.total_snr_db),
            ("radio.gamma_th_db", self.gamma_th_db),
            ("radio.attenuation_at_r_db", self.attenuation_at_r_db),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid("radio.alpha", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Per-RRH transmit SNR `gamma_0` (linear): the total power is split evenly.
    pub fn per_rrh_snr(&self, rrhs: usize) -> f64 {
        db_to_linear(self.total_snr_db) / rrhs as f64
    }

    /// `K` such that `K * R^-alpha` equals the configured attenuation at `R`.
    pub fn path_loss_constant(&self, radius: f64) -> f64 {
        db_to_linear(-self.attenuation_at_r_db) * radius.powf(self.alpha)
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// A subset of RRHs as a bit mask over RRH indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RrhSet(u64);

impl RrhSet {
    pub const EMPTY: RrhSet = RrhSet(0);

    pub fn full(rrhs: usize) -> Self {
        debug_assert!(rrhs <= MAX_RRHS);
        if rrhs == MAX_RRHS {
            RrhSet(u64::MAX)
        } else {
            RrhSet((1u64 << rrhs) - 1)
        }
    }

    pub fn single(n: usize) -> Self {
        RrhSet(1u64 << n)
    }

    pub fn from_bits(bits: u64) -> Self {
        RrhSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, n: usize) {
        self.0 |= 1u64 << n;
    }

    pub fn contains(self, n: usize) -> bool {
        self.0 >> n & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let n = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(n)
        })
    }
}

impl FromIterator<usize> for RrhSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut set = RrhSet::EMPTY;
        for n in iter {
            set.insert(n);
        }
        set
    }
}

/// The RRHs transmitting one file to the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServiceSet {
    pub file: usize,
    pub members: RrhSet,
    /// True when no RRH caches the file and it is pushed over the fronthaul.
    pub uses_fronthaul: bool,
}

/// Binary `files x rrhs` placement matrix; entry `(l, n)` is set when RRH
/// `n` caches file `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlacementMatrix {
    files: usize,
    rrhs: usize,
    // row-major, so derived Ord is lexicographic over rows
    cells: Vec<u8>,
}

impl PlacementMatrix {
    pub fn zeros(files: usize, rrhs: usize) -> Self {
        Self { files, rrhs, cells: vec![0; files * rrhs] }
    }

    /// Builds a matrix from the (0-based) file lists cached by each RRH.
    pub fn from_columns(files: usize, columns: &[Vec<usize>]) -> Result<Self> {
        let mut a = Self::zeros(files, columns.len());
        for (n, col) in columns.iter().enumerate() {
            for &l in col {
                if l >= files {
                    return Err(Error::OutOfRange { what: "file", index: l + 1, len: files });
                }
                a.set(l, n, true);
            }
        }
        Ok(a)
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn rrhs(&self) -> usize {
        self.rrhs
    }

    pub fn get(&self, file: usize, rrh: usize) -> bool {
        self.cells[file * self.rrhs + rrh] != 0
    }

    pub fn set(&mut self, file: usize, rrh: usize, cached: bool) {
        self.cells[file * self.rrhs + rrh] = cached as u8;
    }

    pub fn column_sum(&self, rrh: usize) -> usize {
        (0..self.files).filter(|&l| self.get(l, rrh)).count()
    }

    /// Files cached by RRH `rrh`, ascending.
    pub fn cached_files(&self, rrh: usize) -> Vec<usize> {
        (0..self.files).filter(|&l| self.get(l, rrh)).collect()
    }

    /// Per-RRH cached file lists.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        (0..self.rrhs).map(|n| self.cached_files(n)).collect()
    }

    /// RRHs caching file `file`.
    pub fn holders(&self, file: usize) -> RrhSet {
        let row = &self.cells[file * self.rrhs..(file + 1) * self.rrhs];
        row.iter().enumerate().filter(|(_, &c)| c != 0).map(|(n, _)| n).collect()
    }

    /// Highest cached file index plus one (0 if nothing is cached).
    pub fn support_end(&self) -> usize {
        (0..self.files).rev().find(|&l| !self.holders(l).is_empty()).map_or(0, |l| l + 1)
    }

    /// Checks shape and the exact per-RRH cache-size constraint.
    pub fn validate(&self, files: usize, cache_sizes: &[usize]) -> Result<()> {
        if self.files != files || self.rrhs != cache_sizes.len() {
            return Err(Error::Placement {
                constraint: "shape",
                detail: format!("expected {}x{}, got {}x{}", files, cache_sizes.len(), self.files, self.rrhs),
            });
        }
        for (n, &m) in cache_sizes.iter().enumerate() {
            let sum = self.column_sum(n);
            if sum != m {
                return Err(Error::Placement {
                    constraint: "cache size",
                    detail: format!("RRH {} caches {sum} files, capacity is {m}", n + 1),
                });
            }
        }
        Ok(())
    }

    /// Orders placements by their per-RRH cached file lists, RRH by RRH, so
    /// caching more popular files sorts first.
    pub fn cmp_by_columns(&self, other: &Self) -> std::cmp::Ordering {
        for n in 0..self.rrhs.min(other.rrhs) {
            let a = (0..self.files).filter(|&l| self.get(l, n));
            let b = (0..other.files).filter(|&l| other.get(l, n));
            match a.cmp(b) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
        }
        self.rrhs.cmp(&other.rrhs).then(self.files.cmp(&other.files))
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.cells.iter().zip(&other.cells).filter(|(a, b)| a != b).count()
    }
}

/// Shows the placement as one column of 1-based file ranks per RRH.
impl fmt::Display for PlacementMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self.columns();
        write!(f, "[")?;
        for (n, col) in cols.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            let ranks: Vec<String> = col.iter().map(|l| (l + 1).to_string()).collect();
            write!(f, "{{{}}}", ranks.join(","))?;
        }
        write!(f, "]")
    }
}

pub fn service_set(placement: &PlacementMatrix, file: usize) -> Result<ServiceSet> {
    if file >= placement.files() {
        return Err(Error::OutOfRange { what: "file", index: file + 1, len: placement.files() });
    }
    let holders = placement.holders(file);
    Ok(if holders.is_empty() {
        ServiceSet { file, members: RrhSet::full(placement.rrhs()), uses_fronthaul: true }
    } else {
        ServiceSet { file, members: holders, uses_fronthaul: false }
    })
}

/// `T_l`: 1 when no RRH caches `file`.
pub fn fronthaul_usage(placement: &PlacementMatrix, file: usize) -> Result<u8> {
    Ok(service_set(placement, file)?.uses_fronthaul as u8)
}

/// Most popular content: RRH `n` caches ranks `0..M_n`.
pub fn mpc_placement(layout: &RrhLayout, files: usize) -> Result<PlacementMatrix> {
    let columns: Vec<Vec<usize>> = layout.cache_sizes().iter().map(|&m| (0..m).collect()).collect();
    PlacementMatrix::from_columns(files, &columns)
}

/// Location-based largest content diversity: RRHs nearer the cell centre
/// are filled first with the next most popular files, no file cached twice.
pub fn lb_lcd_placement(layout: &RrhLayout, files: usize) -> Result<PlacementMatrix> {
    let mut columns = vec![Vec::new(); layout.rrh_count()];
    let mut next = 0;
    for n in layout.order_by_center_distance() {
        let m = layout.cache_sizes()[n];
        columns[n] = (next..next + m).collect();
        next += m;
    }
    PlacementMatrix::from_columns(files, &columns)
}

/// Each RRH caches `M_n` files drawn uniformly without replacement from the
/// whole library, independently of the other RRHs.
pub fn random_placement<R: Rng + ?Sized>(layout: &RrhLayout, files: usize, rng: &mut R) -> Result<PlacementMatrix> {
    let mut a = PlacementMatrix::zeros(files, layout.rrh_count());
    for (n, &m) in layout.cache_sizes().iter().enumerate() {
        if m > files {
            return Err(Error::invalid("layout.cache_sizes", "cache larger than library"));
        }
        for l in index::sample(rng, files, m) {
            a.set(l, n, true);
        }
    }
    Ok(a)
}

/// Each RRH independently caches `M_n` distinct files sampled without
/// replacement with weights `P_l` (Efraimidis-Spirakis exponential keys).
pub fn probabilistic_placement<R: Rng + ?Sized>(
    library: &FileLibrary,
    layout: &RrhLayout,
    rng: &mut R,
) -> Result<PlacementMatrix> {
    let files = library.len();
    let mut a = PlacementMatrix::zeros(files, layout.rrh_count());
    let mut keys: Vec<(f64, usize)> = Vec::with_capacity(files);
    for (n, &m) in layout.cache_sizes().iter().enumerate() {
        if m > files {
            return Err(Error::invalid("layout.cache_sizes", "cache larger than library"));
        }
        keys.clear();
        for (l, &p) in library.popularity().iter().enumerate() {
            // log(u^(1/p)), u in (0, 1]
            let u: f64 = 1.0 - rng.random::<f64>();
            keys.push((u.ln() / p, l));
        }
        keys.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, l) in &keys[..m] {
            a.set(l, n, true);
        }
    }
    Ok(a)
}
