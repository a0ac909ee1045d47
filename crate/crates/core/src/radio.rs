//! Monte Carlo capacity lookup tables.
//!
//! A lookup maps site density (sites/km²) to spectral-efficiency density
//! (bps/Hz/km²) at a chosen reliability: the per-cell spectral efficiency
//! achieved by `reliability` percent of simulated users, times cells per
//! site, times site density. Multiplying by a band's width in MHz gives
//! Mbps/km².
//!
//! Geometry is a hexagonal site lattice. Each draw places a user uniformly in
//! a hexagonal cell of area `1 / (density × cells_per_site)` around the
//! serving site; the nearest `interferer_ring` lattice sites transmit
//! co-channel at full load. Every link gets free-space path loss plus an
//! independent normal shadowing draw in dB.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const LOOKUP_HEADER: [&str; 2] = ["site_density_per_km2", "se_density_bps_hz_km2"];

/// Draws per independently seeded chunk.
const CHUNK: u32 = 1000;
/// Lattice points needed for up to four full hexagonal rings.
const MAX_INTERFERERS: u32 = 60;

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("distance must be > 0 km (got {0})")]
    NonPositiveDistance(f64),
    #[error("frequency must be > 0 MHz (got {0})")]
    NonPositiveFrequency(f64),
    #[error("site density must be > 0 (got {0})")]
    NonPositiveDensity(f64),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("density grid must be strictly increasing, non-negative, with at least 2 points")]
    BadGrid,
    #[error("reliability must be in (0, 100) (got {0})")]
    Reliability(f64),
    #[error("no lookup table for {frequency_mhz} MHz at {reliability_pct}% reliability")]
    MissingLookup { frequency_mhz: f64, reliability_pct: f64 },
    #[error("lookup file {}: {message}", path.display())]
    LookupFile { path: PathBuf, message: String },
    #[error("lookup cache I/O at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A spectrum holding: carrier frequency and channel width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub frequency_mhz: f64,
    pub bandwidth_mhz: f64,
}

/// Free-space path loss in dB for a distance in km and frequency in MHz.
pub fn path_loss_db(distance_km: f64, frequency_mhz: f64) -> Result<f64, RadioError> {
    if !(distance_km > 0.0) {
        return Err(RadioError::NonPositiveDistance(distance_km));
    }
    if !(frequency_mhz > 0.0) {
        return Err(RadioError::NonPositiveFrequency(frequency_mhz));
    }
    Ok(fspl(distance_km, frequency_mhz))
}

#[inline]
fn fspl(distance_km: f64, frequency_mhz: f64) -> f64 {
    20.0 * distance_km.log10() + 20.0 * frequency_mhz.log10() + 32.44
}

fn default_iterations() -> u32 {
    10_000
}
fn default_seed() -> u64 {
    42
}
fn default_mu() -> f64 {
    2.0
}
fn default_sigma() -> f64 {
    10.0
}
fn default_cells() -> u32 {
    3
}
fn default_attenuation() -> f64 {
    0.75
}
fn default_se_max() -> f64 {
    8.0
}
fn default_ring() -> u32 {
    6
}
fn default_nf() -> f64 {
    7.0
}
fn default_tx() -> f64 {
    40.0
}
fn default_gain() -> f64 {
    16.0
}
fn default_thermal() -> f64 {
    -174.0
}
fn default_noise_bw() -> f64 {
    10.0
}
fn default_min_distance() -> f64 {
    0.001
}

/// Physics and sampling parameters for the SINR simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_iterations")]
    pub iterations: u32,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    #[serde(default = "default_mu")]
    pub shadow_mu_db: f64,
    #[serde(default = "default_sigma")]
    pub shadow_sigma_db: f64,
    #[serde(default = "default_cells")]
    pub cells_per_site: u32,
    /// Fraction of the Shannon bound achieved (β).
    #[serde(default = "default_attenuation")]
    pub se_attenuation: f64,
    #[serde(default = "default_se_max")]
    pub se_max_bps_hz: f64,
    #[serde(default = "default_ring")]
    pub interferer_ring: u32,
    #[serde(default = "default_nf")]
    pub ue_noise_figure_db: f64,
    #[serde(default = "default_tx")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_gain")]
    pub antenna_gain_dbi: f64,
    #[serde(default = "default_thermal")]
    pub thermal_noise_dbm_hz: f64,
    #[serde(default = "default_noise_bw")]
    pub noise_bandwidth_mhz: f64,
    /// Serving distances are clamped to at least this.
    #[serde(default = "default_min_distance")]
    pub min_distance_km: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            iterations: default_iterations(),
            rng_seed: default_seed(),
            shadow_mu_db: default_mu(),
            shadow_sigma_db: default_sigma(),
            cells_per_site: default_cells(),
            se_attenuation: default_attenuation(),
            se_max_bps_hz: default_se_max(),
            interferer_ring: default_ring(),
            ue_noise_figure_db: default_nf(),
            tx_power_dbm: default_tx(),
            antenna_gain_dbi: default_gain(),
            thermal_noise_dbm_hz: default_thermal(),
            noise_bandwidth_mhz: default_noise_bw(),
            min_distance_km: default_min_distance(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), RadioError> {
        let fail = |m: String| Err(RadioError::Config(m));
        if self.iterations < 1 {
            return fail("iterations must be >= 1".into());
        }
        if !(self.shadow_sigma_db >= 0.0) || !self.shadow_mu_db.is_finite() {
            return fail(format!(
                "shadowing needs finite mu and sigma >= 0 (got mu={}, sigma={})",
                self.shadow_mu_db, self.shadow_sigma_db
            ));
        }
        if self.cells_per_site < 1 {
            return fail("cells_per_site must be >= 1".into());
        }
        if !(self.se_attenuation > 0.0 && self.se_attenuation <= 1.0) {
            return fail(format!("se_attenuation must be in (0, 1] (got {})", self.se_attenuation));
        }
        if !(self.se_max_bps_hz > 0.0) {
            return fail(format!("se_max_bps_hz must be > 0 (got {})", self.se_max_bps_hz));
        }
        if self.interferer_ring > MAX_INTERFERERS {
            return fail(format!("interferer_ring must be <= {MAX_INTERFERERS}"));
        }
        if !(self.noise_bandwidth_mhz > 0.0) || !(self.min_distance_km > 0.0) {
            return fail("noise_bandwidth_mhz and min_distance_km must be > 0".into());
        }
        Ok(())
    }

    /// Thermal noise plus receiver noise figure over the noise bandwidth.
    pub fn noise_dbm(&self) -> f64 {
        self.thermal_noise_dbm_hz + 10.0 * (self.noise_bandwidth_mhz * 1e6).log10() + self.ue_noise_figure_db
    }

    /// Hex digest of every field; identical physics gives an identical hash.
    pub fn fingerprint(&self) -> String {
        let canonical = toml::to_string(self).expect("SimConfig serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Attenuated, capped Shannon bound: `min(se_max, β·log2(1 + sinr))`.
pub fn sinr_to_se(sinr_linear: f64, attenuation: f64, se_max: f64) -> f64 {
    let sinr = sinr_linear.max(0.0);
    (attenuation * (1.0 + sinr).log2()).min(se_max)
}

/// One simulated user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub serving_distance_km: f64,
    pub snr_db: f64,
    pub sinr_db: f64,
}

/// Geometry derived from a site density.
#[derive(Debug, Clone)]
struct Layout {
    /// Circumradius of the serving hexagonal cell.
    cell_radius_km: f64,
    interferers: Vec<(f64, f64)>,
}

impl Layout {
    fn new(site_density: f64, cfg: &SimConfig) -> Self {
        let cell_area = 1.0 / (site_density * cfg.cells_per_site as f64);
        // Hexagon area = (3√3/2) R².
        let cell_radius_km = (2.0 * cell_area / (3.0 * 3f64.sqrt())).sqrt();
        // Site lattice spacing from one site per 1/density km²: area = (√3/2) D².
        let spacing = (2.0 / (3f64.sqrt() * site_density)).sqrt();
        Layout {
            cell_radius_km,
            interferers: lattice_neighbours(spacing, cfg.interferer_ring as usize),
        }
    }
}

/// The `n` hexagonal-lattice points nearest the origin (excluding it).
fn lattice_neighbours(spacing: f64, n: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in -5i32..=5 {
        for j in -5i32..=5 {
            if i == 0 && j == 0 {
                continue;
            }
            let x = spacing * (i as f64 + 0.5 * j as f64);
            let y = spacing * (3f64.sqrt() / 2.0 * j as f64);
            pts.push((x, y));
        }
    }
    pts.sort_by(|a, b| {
        let da = a.0.hypot(a.1);
        let db = b.0.hypot(b.1);
        // Round away float noise so equal-ring points order by angle.
        let ka = (da / spacing * 1e9).round();
        let kb = (db / spacing * 1e9).round();
        ka.total_cmp(&kb).then(a.1.atan2(a.0).total_cmp(&b.1.atan2(b.0)))
    });
    pts.truncate(n);
    pts
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one chunk of draws. Depends only on the base seed and the
/// (frequency, density, chunk) coordinates, never on scheduling.
fn chunk_seed(base: u64, frequency_mhz: f64, site_density: f64, chunk: u32) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ frequency_mhz.to_bits());
    h = splitmix64(h ^ site_density.to_bits());
    splitmix64(h ^ chunk as u64)
}

fn sample_in_hexagon<R: Rng>(rng: &mut R, radius: f64) -> (f64, f64) {
    let k = rng.random_range(0..6u32) as f64;
    let (a0, a1) = (k * PI / 3.0, (k + 1.0) * PI / 3.0);
    let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    (
        radius * (u * a0.cos() + v * a1.cos()),
        radius * (u * a0.sin() + v * a1.sin()),
    )
}

#[inline]
fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Simulates `config.iterations` users at the given site density.
///
/// Draws are split into fixed-size chunks, each with its own seed, so results
/// are bit-identical regardless of how many threads run them.
pub fn simulate_links(
    site_density: f64,
    frequency_mhz: f64,
    config: &SimConfig,
) -> Result<Vec<LinkSample>, RadioError> {
    if !(site_density > 0.0) {
        return Err(RadioError::NonPositiveDensity(site_density));
    }
    if !(frequency_mhz > 0.0) {
        return Err(RadioError::NonPositiveFrequency(frequency_mhz));
    }
    config.validate()?;
    let layout = Layout::new(site_density, config);
    let shadow = Normal::new(config.shadow_mu_db, config.shadow_sigma_db)
        .map_err(|e| RadioError::Config(e.to_string()))?;
    let eirp = config.tx_power_dbm + config.antenna_gain_dbi;
    let noise_mw = dbm_to_mw(config.noise_dbm());
    let chunks = config.iterations.div_ceil(CHUNK);

    let per_chunk: Vec<Vec<LinkSample>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(config.iterations - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(config.rng_seed, frequency_mhz, site_density, c));
            (0..n)
                .map(|_| {
                    let (x, y) = sample_in_hexagon(&mut rng, layout.cell_radius_km);
                    let d = x.hypot(y).max(config.min_distance_km);
                    let signal_dbm = eirp - fspl(d, frequency_mhz) - shadow.sample(&mut rng);
                    let interference_mw: f64 = layout
                        .interferers
                        .iter()
                        .map(|&(ix, iy)| {
                            let di = (ix - x).hypot(iy - y).max(config.min_distance_km);
                            dbm_to_mw(eirp - fspl(di, frequency_mhz) - shadow.sample(&mut rng))
                        })
                        .sum();
                    let signal_mw = dbm_to_mw(signal_dbm);
                    LinkSample {
                        serving_distance_km: d,
                        snr_db: 10.0 * (signal_mw / noise_mw).log10(),
                        sinr_db: 10.0 * (signal_mw / (interference_mw + noise_mw)).log10(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

/// SINR samples (dB), one per iteration.
pub fn simulate_sinr(site_density: f64, frequency_mhz: f64, config: &SimConfig) -> Result<Vec<f64>, RadioError> {
    Ok(simulate_links(site_density, frequency_mhz, config)?
        .into_iter()
        .map(|s| s.sinr_db)
        .collect())
}

/// Per-user spectral efficiency samples (bps/Hz).
pub fn simulate_se(site_density: f64, frequency_mhz: f64, config: &SimConfig) -> Result<Vec<f64>, RadioError> {
    Ok(simulate_sinr(site_density, frequency_mhz, config)?
        .into_iter()
        .map(|db| sinr_to_se(10f64.powf(db / 10.0), config.se_attenuation, config.se_max_bps_hz))
        .collect())
}

/// Linearly interpolated percentile (0..=100) of an ascending slice.
pub fn percentile_sorted(sorted: &[f64], pct: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let rank = (pct / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// The value reached by `reliability_pct` percent of the sample, i.e. its
/// `(100 - reliability)`-th percentile.
pub fn reliability_value(samples: &[f64], reliability_pct: f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    percentile_sorted(&s, 100.0 - reliability_pct)
}

/// Batch-means standard error of [`reliability_value`]: the sample is cut
/// into `batches` contiguous batches, the statistic is computed per batch, and
/// the spread of those estimates is scaled by `1/sqrt(batches)`.
pub fn batch_standard_error(samples: &[f64], reliability_pct: f64, batches: usize) -> f64 {
    assert!(batches >= 2 && samples.len() >= batches);
    let size = samples.len() / batches;
    let est: Vec<f64> = (0..batches)
        .map(|b| reliability_value(&samples[b * size..(b + 1) * size], reliability_pct))
        .collect();
    let mean = est.iter().sum::<f64>() / batches as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LookupRow {
    pub site_density_per_km2: f64,
    pub se_density_bps_hz_km2: f64,
}

/// Site density → spectral-efficiency density for one band and reliability.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityLookup {
    pub frequency_mhz: f64,
    pub reliability_pct: f64,
    /// Ascending in density, starting with the zero row.
    pub rows: Vec<LookupRow>,
    /// Grid points raised by the monotone clamp.
    pub clamped_points: usize,
}

/// Result of evaluating a lookup or a whole portfolio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: f64,
    /// True when the query fell outside the grid and was clamped.
    pub clamped: bool,
}

impl CapacityLookup {
    /// Builds a lookup from raw values, enforcing the zero row and a
    /// non-decreasing profile.
    pub fn from_raw(frequency_mhz: f64, reliability_pct: f64, raw: Vec<LookupRow>) -> Result<Self, RadioError> {
        let mut rows = raw;
        if rows.first().map(|r| r.site_density_per_km2 > 0.0).unwrap_or(true) {
            rows.insert(
                0,
                LookupRow {
                    site_density_per_km2: 0.0,
                    se_density_bps_hz_km2: 0.0,
                },
            );
        }
        rows[0].se_density_bps_hz_km2 = 0.0;
        if rows.len() < 2
            || rows.windows(2).any(|w| !(w[1].site_density_per_km2 > w[0].site_density_per_km2))
            || rows[0].site_density_per_km2 != 0.0
        {
            return Err(RadioError::BadGrid);
        }
        let mut clamped_points = 0;
        let mut running = 0.0f64;
        for r in rows.iter_mut() {
            if r.se_density_bps_hz_km2 < running {
                r.se_density_bps_hz_km2 = running;
                clamped_points += 1;
            }
            running = r.se_density_bps_hz_km2;
        }
        if clamped_points > 0 {
            log::debug!(
                "lookup {frequency_mhz} MHz @ {reliability_pct}%: monotone clamp raised {clamped_points} point(s)"
            );
        }
        Ok(CapacityLookup {
            frequency_mhz,
            reliability_pct,
            rows,
            clamped_points,
        })
    }

    pub fn max_density(&self) -> f64 {
        self.rows.last().expect("lookup has rows").site_density_per_km2
    }

    /// Linear interpolation; queries past the grid clamp to its end points.
    pub fn interpolate(&self, site_density: f64) -> Interpolated {
        let first = self.rows[0];
        let last = *self.rows.last().expect("lookup has rows");
        if site_density <= first.site_density_per_km2 {
            return Interpolated {
                value: first.se_density_bps_hz_km2,
                clamped: site_density < first.site_density_per_km2,
            };
        }
        if site_density >= last.site_density_per_km2 {
            return Interpolated {
                value: last.se_density_bps_hz_km2,
                clamped: site_density > last.site_density_per_km2,
            };
        }
        let idx = self.rows.partition_point(|r| r.site_density_per_km2 <= site_density);
        let (a, b) = (self.rows[idx - 1], self.rows[idx]);
        let t = (site_density - a.site_density_per_km2) / (b.site_density_per_km2 - a.site_density_per_km2);
        Interpolated {
            value: a.se_density_bps_hz_km2 + t * (b.se_density_bps_hz_km2 - a.se_density_bps_hz_km2),
            clamped: false,
        }
    }

    pub fn file_name(&self) -> String {
        lookup_file_name(self.frequency_mhz, self.reliability_pct)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", LOOKUP_HEADER.join(","));
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.site_density_per_km2, r.se_density_bps_hz_km2));
        }
        out
    }

    pub fn from_csv(frequency_mhz: f64, reliability_pct: f64, text: &str) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
        if headers.iter().collect::<Vec<_>>() != LOOKUP_HEADER {
            return Err(format!("expected header `{}`", LOOKUP_HEADER.join(",")));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let parse = |i: usize| -> Result<f64, String> {
                rec.get(i)
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|e| format!("line {}: {e}", rec.position().map(|p| p.line()).unwrap_or(0)))
            };
            rows.push(LookupRow {
                site_density_per_km2: parse(0)?,
                se_density_bps_hz_km2: parse(1)?,
            });
        }
        CapacityLookup::from_raw(frequency_mhz, reliability_pct, rows).map_err(|e| e.to_string())
    }
}

pub fn lookup_file_name(frequency_mhz: f64, reliability_pct: f64) -> String {
    format!("lookup_{frequency_mhz}_{reliability_pct}.csv")
}

/// Default grid: zero plus 12 log-spaced points from 0.001 to 10 sites/km².
pub fn default_density_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    let (lo, hi) = (0.001f64.log10(), 10f64.log10());
    for i in 0..12 {
        let e = lo + (hi - lo) * i as f64 / 11.0;
        grid.push(10f64.powf(e));
    }
    grid
}

fn check_grid(density_grid: &[f64]) -> Result<(), RadioError> {
    if density_grid.len() < 2
        || density_grid[0] < 0.0
        || density_grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(RadioError::BadGrid);
    }
    Ok(())
}

fn check_reliability(r: f64) -> Result<(), RadioError> {
    if r > 0.0 && r < 100.0 {
        Ok(())
    } else {
        Err(RadioError::Reliability(r))
    }
}

/// Builds one lookup per (frequency, reliability), sharing the simulated
/// samples across reliabilities.
pub fn build_lookups(
    frequencies: &[f64],
    density_grid: &[f64],
    reliabilities: &[f64],
    config: &SimConfig,
) -> Result<Vec<CapacityLookup>, RadioError> {
    check_grid(density_grid)?;
    for &r in reliabilities {
        check_reliability(r)?;
    }
    config.validate()?;
    let positive: Vec<f64> = density_grid.iter().copied().filter(|&d| d > 0.0).collect();

    let mut out = Vec::new();
    for &freq in frequencies {
        let sorted_samples: Vec<(f64, Vec<f64>)> = positive
            .par_iter()
            .map(|&d| {
                let mut s = simulate_se(d, freq, config)?;
                s.sort_by(f64::total_cmp);
                Ok((d, s))
            })
            .collect::<Result<_, RadioError>>()?;
        for &rel in reliabilities {
            let raw = sorted_samples
                .iter()
                .map(|(d, s)| LookupRow {
                    site_density_per_km2: *d,
                    se_density_bps_hz_km2: percentile_sorted(s, 100.0 - rel) * config.cells_per_site as f64 * d,
                })
                .collect();
            out.push(CapacityLookup::from_raw(freq, rel, raw)?);
        }
    }
    Ok(out)
}

/// Builds one lookup per frequency at a single reliability.
pub fn build_lookup(
    frequencies: &[f64],
    density_grid: &[f64],
    reliability_pct: f64,
    config: &SimConfig,
) -> Result<Vec<CapacityLookup>, RadioError> {
    build_lookups(frequencies, density_grid, &[reliability_pct], config)
}

fn key(frequency_mhz: f64, reliability_pct: f64) -> (u64, u64) {
    // +0.0 normalizes -0.0.
    ((frequency_mhz + 0.0).to_bits(), (reliability_pct + 0.0).to_bits())
}

/// Lookups keyed by (frequency, reliability).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LookupSet {
    tables: BTreeMap<(u64, u64), CapacityLookup>,
}

impl LookupSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lookup: CapacityLookup) {
        self.tables.insert(key(lookup.frequency_mhz, lookup.reliability_pct), lookup);
    }

    pub fn get(&self, frequency_mhz: f64, reliability_pct: f64) -> Option<&CapacityLookup> {
        self.tables.get(&key(frequency_mhz, reliability_pct))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CapacityLookup> {
        self.tables.values()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Writes every table as `lookup_<freq>_<rel>.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, RadioError> {
        fs::create_dir_all(dir).map_err(|source| RadioError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        for t in self.iter() {
            let path = dir.join(t.file_name());
            fs::write(&path, t.to_csv()).map_err(|source| RadioError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }

    /// Loads the named (frequency, reliability) tables from `dir`.
    pub fn read_dir(dir: &Path, wanted: &[(f64, f64)]) -> Result<Self, RadioError> {
        let mut set = LookupSet::new();
        for &(f, r) in wanted {
            let path = dir.join(lookup_file_name(f, r));
            let text = fs::read_to_string(&path).map_err(|source| RadioError::Io {
                path: path.clone(),
                source,
            })?;
            let table = CapacityLookup::from_csv(f, r, &text)
                .map_err(|message| RadioError::LookupFile { path, message })?;
            set.insert(table);
        }
        Ok(set)
    }
}

impl FromIterator<CapacityLookup> for LookupSet {
    fn from_iter<I: IntoIterator<Item = CapacityLookup>>(iter: I) -> Self {
        let mut set = LookupSet::new();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

/// Cache directory name for one (frequency, reliability, config, grid).
pub fn cache_key(frequency_mhz: f64, reliability_pct: f64, config: &SimConfig, grid: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(config.fingerprint().as_bytes());
    for d in grid {
        h.update(d.to_bits().to_le_bytes());
    }
    h.update(frequency_mhz.to_bits().to_le_bytes());
    h.update(reliability_pct.to_bits().to_le_bytes());
    hex::encode(h.finalize())
}

/// Generates the requested tables, reusing any found under `cache_dir`
/// (keyed by [`cache_key`]) and storing newly generated ones there.
pub fn generate_cached(
    wanted: &[(f64, f64)],
    density_grid: &[f64],
    config: &SimConfig,
    cache_dir: Option<&Path>,
) -> Result<LookupSet, RadioError> {
    let mut set = LookupSet::new();
    let mut missing: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for &(f, r) in wanted {
        if set.get(f, r).is_some() {
            continue;
        }
        if let Some(dir) = cache_dir {
            let path = dir.join(cache_key(f, r, config, density_grid)).join(lookup_file_name(f, r));
            if let Ok(text) = fs::read_to_string(&path) {
                let table = CapacityLookup::from_csv(f, r, &text)
                    .map_err(|message| RadioError::LookupFile { path, message })?;
                set.insert(table);
                continue;
            }
        }
        let entry = missing.entry((f + 0.0).to_bits()).or_insert((f, Vec::new()));
        if !entry.1.contains(&r) {
            entry.1.push(r);
        }
    }
    for (f, rels) in missing.into_values() {
        for table in build_lookups(&[f], density_grid, &rels, config)? {
            if let Some(dir) = cache_dir {
                let sub = dir.join(cache_key(f, table.reliability_pct, config, density_grid));
                fs::create_dir_all(&sub).map_err(|source| RadioError::Io {
                    path: sub.clone(),
                    source,
                })?;
                let path = sub.join(table.file_name());
                fs::write(&path, table.to_csv()).map_err(|source| RadioError::Io { path, source })?;
            }
            set.insert(table);
        }
    }
    Ok(set)
}

/// A country's spectrum portfolio bound to its lookup tables.
#[derive(Debug, Clone)]
pub struct PortfolioCurve<'a> {
    bands: Vec<(&'a CapacityLookup, f64)>,
}

impl<'a> PortfolioCurve<'a> {
    pub fn new(portfolio: &[Band], lookups: &'a LookupSet, reliability_pct: f64) -> Result<Self, RadioError> {
        let bands = portfolio
            .iter()
            .map(|b| {
                lookups
                    .get(b.frequency_mhz, reliability_pct)
                    .map(|t| (t, b.bandwidth_mhz))
                    .ok_or(RadioError::MissingLookup {
                        frequency_mhz: b.frequency_mhz,
                        reliability_pct,
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(PortfolioCurve { bands })
    }

    /// Area capacity in Mbps/km²: Σ interpolated SE density × bandwidth (MHz).
    pub fn capacity(&self, site_density: f64) -> Interpolated {
        let mut clamped = false;
        let value = self
            .bands
            .iter()
            .map(|(t, bw)| {
                let i = t.interpolate(site_density);
                clamped |= i.clamped;
                i.value * bw
            })
            .sum();
        Interpolated { value, clamped }
    }

    /// Largest density covered by every band's grid.
    pub fn max_density(&self) -> f64 {
        self.bands
            .iter()
            .map(|(t, _)| t.max_density())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

/// Area capacity C (Mbps/km²) of a portfolio at a site density.
pub fn area_capacity(
    site_density: f64,
    portfolio: &[Band],
    lookups: &LookupSet,
    reliability_pct: f64,
) -> Result<Interpolated, RadioError> {
    Ok(PortfolioCurve::new(portfolio, lookups, reliability_pct)?.capacity(site_density))
}
