//! Per-country runs, aggregation by income group and region, and sweeps.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::costs::{
    self, CostBook, DecileCostResult, FiberDistanceMode, CATEGORY_NAMES,
};
use crate::deciles::{self, Decile, DecileAssets, DECILE_COUNT};
use crate::demand::{self, DemandResult, GrowthMode, TrafficProfile, UserInputs};
use crate::dimensioning::{self, DecilePlan, Strategy};
use crate::groups::{IncomeGroup, Region};
use crate::ingest::{impute_wages, AreaRecord, CountryParams, Dataset, ImputationReport, Sector, WageTable};
use crate::money::{apportion, Cents};
use crate::radio::{self, LookupSet, PortfolioCurve, RadioError, SimConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario: {0}")]
    Config(String),
    #[error("{iso3} ({module}): {message}")]
    Country {
        iso3: String,
        module: &'static str,
        message: String,
    },
    #[error("wages: {0}")]
    Wages(String),
    #[error("lookups: {0}")]
    Lookups(#[from] RadioError),
    #[error("sweep: {0}")]
    Sweep(String),
}

/// Monthly data targets per income group, in GB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthlyTargets {
    #[serde(rename = "AE")]
    pub ae: f64,
    #[serde(rename = "EME")]
    pub eme: f64,
    #[serde(rename = "LIDC")]
    pub lidc: f64,
}

impl MonthlyTargets {
    pub fn get(&self, group: IncomeGroup) -> f64 {
        match group {
            IncomeGroup::AE => self.ae,
            IncomeGroup::EME => self.eme,
            IncomeGroup::LIDC => self.lidc,
        }
    }
}

/// Where capacity lookups come from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupConfig {
    /// Directory of pre-generated `lookup_<freq>_<rel>.csv` tables. When set,
    /// nothing is simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Cache for simulated tables, keyed by config and grid hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Site densities (sites/km²) to simulate; defaults to 0 plus 12
    /// log-spaced points from 0.001 to 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub simulation: SimConfig,
}

fn d_busy() -> f64 {
    TrafficProfile::DEFAULT_BUSY_HOUR_SHARE_PCT
}
fn d_days() -> u32 {
    TrafficProfile::DEFAULT_DAYS_PER_MONTH
}

/// One set of assumptions to run the whole dataset under. Optional fields
/// fall back to each country's own inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adoption_rate_pct: Option<f64>,
    #[serde(default = "d_busy")]
    pub busy_hour_share_pct: f64,
    #[serde(default = "d_days")]
    pub days_per_month: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_year: Option<i32>,
    #[serde(default)]
    pub growth_mode: GrowthMode,
    #[serde(default)]
    pub fiber_distance_mode: FiberDistanceMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monthly_gb: Option<MonthlyTargets>,
    #[serde(default)]
    pub lookups: LookupConfig,
}

impl Scenario {
    pub fn named(name: &str) -> Scenario {
        Scenario {
            name: name.to_string(),
            reliability_pct: None,
            adoption_rate_pct: None,
            busy_hour_share_pct: d_busy(),
            days_per_month: d_days(),
            end_year: None,
            growth_mode: GrowthMode::default(),
            fiber_distance_mode: FiberDistanceMode::default(),
            monthly_gb: None,
            lookups: LookupConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Config(m));
        if self.name.trim().is_empty() {
            return bad("`name` must not be empty".into());
        }
        if let Some(r) = self.reliability_pct {
            if !(r > 0.0 && r < 100.0) {
                return bad(format!("`reliability_pct` must be in (0, 100) (got {r})"));
            }
        }
        if let Some(a) = self.adoption_rate_pct {
            if !(0.0..=100.0).contains(&a) {
                return bad(format!("`adoption_rate_pct` must be in [0, 100] (got {a})"));
            }
        }
        if let Some(m) = self.monthly_gb {
            for g in IncomeGroup::ALL {
                let v = m.get(g);
                if !(v >= 0.0) || !v.is_finite() {
                    return bad(format!("`monthly_gb.{g}` must be >= 0 (got {v})"));
                }
            }
        }
        let mut profile = TrafficProfile::new(0.0);
        profile.busy_hour_share_pct = self.busy_hour_share_pct;
        profile.days_per_month = self.days_per_month;
        profile.validate().map_err(|e| ScenarioError::Config(e.to_string()))?;
        self.lookups
            .simulation
            .validate()
            .map_err(|e| ScenarioError::Config(format!("lookups.simulation: {e}")))?;
        Ok(())
    }

    pub fn reliability_for(&self, c: &CountryParams) -> f64 {
        self.reliability_pct.unwrap_or(c.reliability_pct)
    }

    pub fn monthly_gb_for(&self, c: &CountryParams) -> f64 {
        self.monthly_gb
            .map(|m| m.get(c.income_group))
            .unwrap_or(c.monthly_data_target_gb)
    }

    /// Years from the country's start year to the scenario (or country) end.
    pub fn years_for(&self, c: &CountryParams) -> u32 {
        let end = self.end_year.unwrap_or(c.end_year);
        (end - c.start_year).max(0) as u32
    }

    pub fn density_grid(&self) -> Vec<f64> {
        self.lookups
            .density_grid
            .clone()
            .unwrap_or_else(radio::default_density_grid)
    }

    /// Loads or generates every table the dataset needs under this scenario.
    /// Relative paths resolve against `base_dir`.
    pub fn load_lookups(&self, dataset: &Dataset, base_dir: &Path) -> Result<LookupSet, ScenarioError> {
        let wanted = wanted_lookups(dataset, self);
        let set = match &self.lookups.dir {
            Some(dir) => LookupSet::read_dir(&base_dir.join(dir), &wanted)?,
            None => {
                let cache = self.lookups.cache_dir.as_ref().map(|d| base_dir.join(d));
                radio::generate_cached(&wanted, &self.density_grid(), &self.lookups.simulation, cache.as_deref())?
            }
        };
        Ok(set)
    }
}

/// Distinct (frequency, reliability) pairs the dataset needs, sorted.
pub fn wanted_lookups(dataset: &Dataset, scenario: &Scenario) -> Vec<(f64, f64)> {
    let mut keys = BTreeSet::new();
    for c in &dataset.countries {
        let r = scenario.reliability_for(c);
        for b in &c.spectrum_portfolio {
            keys.insert(((b.frequency_mhz + 0.0).to_bits(), (r + 0.0).to_bits()));
        }
    }
    keys.into_iter()
        .map(|(f, r)| (f64::from_bits(f), f64::from_bits(r)))
        .collect()
}

/// Everything computed for one decile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileOutcome {
    pub decile: Decile,
    pub assets: DecileAssets,
    pub demand: DemandResult,
    pub plan: DecilePlan,
    pub costs: DecileCostResult,
    /// Terrestrial infrastructure cost per served user, when a build was needed.
    pub terrestrial_per_user_usd: Option<f64>,
    pub satellite_per_user_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryResult {
    pub country_iso3: String,
    pub income_group: IncomeGroup,
    pub region: Region,
    pub reliability_pct: f64,
    pub monthly_gb: f64,
    pub horizon_years: u32,
    pub served_users: f64,
    pub unconnected_users: f64,
    /// Sum of all decile costs (the per-user cost numerator).
    pub decile_costs: Cents,
    pub tpu_usd: f64,
    /// `tpu_usd × unconnected_users`.
    pub total_cost_usd: f64,
    /// `total_cost_usd` in cents; the unit all aggregates add up in.
    pub total_cost: Cents,
    pub gdp_usd: f64,
    pub gdp_share_pct: f64,
    pub deciles: Vec<DecileOutcome>,
    /// `total_cost` split over deciles in proportion to decile costs.
    pub decile_shares: Vec<Cents>,
    /// `total_cost` split over cost categories (see [`CATEGORY_NAMES`]).
    pub category_shares: [Cents; 6],
}

impl CountryResult {
    pub fn count(&self, s: Strategy) -> usize {
        self.deciles.iter().filter(|d| d.plan.strategy == s).count()
    }
}

/// Hourly wages for a country: its own (possibly imputed) rows, else the
/// cost book's fallback.
pub fn country_cost_book(book: &CostBook, wages: &WageTable, iso3: &str) -> CostBook {
    let w = |s: Sector, fallback: f64| wages.wage(iso3, s).unwrap_or(fallback);
    book.with_wages(
        w(Sector::ICT, book.wage_ict_usd_hr),
        w(Sector::Logistics, book.wage_logistics_usd_hr),
        w(Sector::Construction, book.wage_construction_usd_hr),
    )
}

fn fail<'a>(iso3: &'a str, module: &'static str) -> impl Fn(String) -> ScenarioError + 'a {
    move |message| ScenarioError::Country {
        iso3: iso3.to_string(),
        module,
        message,
    }
}

/// Runs deciles → demand → dimensioning → costs for one country.
///
/// `book` must already carry the country's wages.
pub fn run_country(
    country: &CountryParams,
    areas: &[&AreaRecord],
    book: &CostBook,
    scenario: &Scenario,
    lookups: &LookupSet,
) -> Result<CountryResult, ScenarioError> {
    let iso3 = country.country_iso3.as_str();
    let deciles = deciles::build_deciles(iso3, areas).map_err(|e| fail(iso3, "deciles")(e.to_string()))?;
    let assets = deciles::allocate_fiber(
        &deciles::allocate_sites(&deciles, country.total_sites, country.coverage_4g_pct, country.coverage_2g_pct),
        country.fiber_share_pct(),
    );

    let reliability = scenario.reliability_for(country);
    let monthly_gb = scenario.monthly_gb_for(country);
    let years = scenario.years_for(country);
    let horizon = book.horizon_years.unwrap_or(years);
    let profile = TrafficProfile {
        monthly_gb,
        days_per_month: scenario.days_per_month,
        busy_hour_share_pct: scenario.busy_hour_share_pct,
    };
    let curve = PortfolioCurve::new(&country.spectrum_portfolio, lookups, reliability)
        .map_err(|e| fail(iso3, "radio")(e.to_string()))?;
    let sat_per_user = costs::satellite_per_user(book, country.income_group, horizon);

    let mut outcomes = Vec::with_capacity(deciles.len());
    for (decile, assets) in deciles.into_iter().zip(assets) {
        let inputs = UserInputs {
            population: decile.population,
            growth_pct: country.pop_growth_rate_pct_per_year,
            years,
            adoption_pct: scenario.adoption_rate_pct.unwrap_or(country.adoption_rate_pct),
            market_share_pct: country.market_share_pct,
            active_share_pct: country.active_share_pct,
        };
        let demand = demand::decile_demand(&inputs, scenario.growth_mode, &profile, decile.area_km2)
            .map_err(|e| fail(iso3, "demand")(format!("decile {}: {e}", decile.decile_index)))?;
        outcomes.push(price_decile(
            decile,
            assets,
            demand,
            &curve,
            book,
            country.income_group,
            horizon,
            scenario.fiber_distance_mode,
            sat_per_user,
        )
        .map_err(fail(iso3, "costs"))?);
    }

    let decile_costs: Cents = outcomes.iter().map(|o| o.costs.total()).sum();
    let served: f64 = outcomes.iter().map(|o| o.demand.served_users).sum();
    let tpu = costs::tpu(decile_costs, served).map_err(|e| fail(iso3, "costs")(e.to_string()))?;
    let total_cost_usd = costs::total_cost(tpu, country.unconnected_users);
    let total_cost = Cents::from_usd(total_cost_usd);

    let weights: Vec<Cents> = outcomes.iter().map(|o| o.costs.total()).collect();
    let decile_shares = apportion(total_cost, &weights);
    let mut category_shares = [Cents::ZERO; 6];
    for (o, share) in outcomes.iter().zip(&decile_shares) {
        for (acc, c) in category_shares.iter_mut().zip(apportion(*share, &o.costs.categories())) {
            *acc += c;
        }
    }

    Ok(CountryResult {
        country_iso3: iso3.to_string(),
        income_group: country.income_group,
        region: country.region,
        reliability_pct: reliability,
        monthly_gb,
        horizon_years: horizon,
        served_users: served,
        unconnected_users: country.unconnected_users,
        decile_costs,
        tpu_usd: tpu,
        total_cost_usd,
        total_cost,
        gdp_usd: country.gdp_usd,
        gdp_share_pct: if country.gdp_usd > 0.0 {
            total_cost_usd / country.gdp_usd * 100.0
        } else {
            0.0
        },
        deciles: outcomes,
        decile_shares,
        category_shares,
    })
}

#[allow(clippy::too_many_arguments)]
fn price_decile(
    decile: Decile,
    assets: DecileAssets,
    demand: DemandResult,
    curve: &PortfolioCurve<'_>,
    book: &CostBook,
    group: IncomeGroup,
    horizon: u32,
    mode: FiberDistanceMode,
    sat_per_user: f64,
) -> Result<DecileOutcome, String> {
    let served = demand.served_users;
    let (policy, skills) = costs::user_overheads(served, book);
    let overheads = DecileCostResult {
        policy,
        skills,
        ..Default::default()
    };
    let satellite = || DecileCostResult {
        satellite: costs::satellite_cost(served, group, book, horizon),
        ..overheads
    };

    let plan = dimensioning::plan_decile(&decile, &assets, demand.demand_density_mbps_km2, curve);
    let (plan, costs, terrestrial_per_user_usd) = match plan.strategy {
        Strategy::Satellite => (plan.into_satellite(served), satellite(), None),
        Strategy::NoneNeeded => (plan, overheads, None),
        Strategy::Terrestrial => {
            let infra = costs::price_terrestrial(&plan, &decile, &assets, book, horizon, mode)
                .map_err(|e| format!("decile {}: {e}", decile.decile_index))?;
            let per_user = if served > 0.0 {
                infra.infrastructure().usd() / served
            } else {
                f64::INFINITY
            };
            match dimensioning::choose_satellite(per_user, sat_per_user) {
                Strategy::Satellite => (plan.into_satellite(served), satellite(), Some(per_user)),
                _ => (
                    plan,
                    DecileCostResult {
                        policy,
                        skills,
                        ..infra
                    },
                    Some(per_user),
                ),
            }
        }
    };
    plan.check(&assets)?;
    Ok(DecileOutcome {
        decile,
        assets,
        demand,
        plan,
        costs,
        terrestrial_per_user_usd,
        satellite_per_user_usd: sat_per_user,
    })
}

/// Exact totals for one reporting row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupTotals {
    pub total: Cents,
    pub by_decile: [Cents; DECILE_COUNT],
    pub by_category: [Cents; 6],
    pub gdp_usd: f64,
    pub countries: usize,
}

impl Default for GroupTotals {
    fn default() -> Self {
        GroupTotals {
            total: Cents::ZERO,
            by_decile: [Cents::ZERO; DECILE_COUNT],
            by_category: [Cents::ZERO; 6],
            gdp_usd: 0.0,
            countries: 0,
        }
    }
}

impl GroupTotals {
    fn add(&mut self, c: &CountryResult) {
        self.total += c.total_cost;
        for (acc, s) in self.by_decile.iter_mut().zip(&c.decile_shares) {
            *acc += *s;
        }
        for (acc, s) in self.by_category.iter_mut().zip(&c.category_shares) {
            *acc += *s;
        }
        self.gdp_usd += c.gdp_usd;
        self.countries += 1;
    }

    pub fn gdp_share_pct(&self) -> f64 {
        if self.gdp_usd > 0.0 {
            self.total.usd() / self.gdp_usd * 100.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub scenario: String,
    pub global: GroupTotals,
    /// One row per income group, in [`IncomeGroup::ALL`] order.
    pub by_group: Vec<(IncomeGroup, GroupTotals)>,
    /// One row per region, in [`Region::ALL`] order.
    pub by_region: Vec<(Region, GroupTotals)>,
    /// Sorted by ISO3 code.
    pub countries: Vec<CountryResult>,
    pub wage_fits: Option<ImputationReport>,
}

impl AggregateReport {
    pub fn from_countries(scenario: &str, mut countries: Vec<CountryResult>, wage_fits: Option<ImputationReport>) -> Self {
        countries.sort_by(|a, b| a.country_iso3.cmp(&b.country_iso3));
        let mut global = GroupTotals::default();
        let mut by_group: Vec<_> = IncomeGroup::ALL.iter().map(|&g| (g, GroupTotals::default())).collect();
        let mut by_region: Vec<_> = Region::ALL.iter().map(|&r| (r, GroupTotals::default())).collect();
        for c in &countries {
            global.add(c);
            by_group.iter_mut().find(|(g, _)| *g == c.income_group).unwrap().1.add(c);
            by_region.iter_mut().find(|(r, _)| *r == c.region).unwrap().1.add(c);
        }
        AggregateReport {
            scenario: scenario.to_string(),
            global,
            by_group,
            by_region,
            countries,
            wage_fits,
        }
    }

    pub fn group(&self, g: IncomeGroup) -> &GroupTotals {
        &self.by_group.iter().find(|(k, _)| *k == g).unwrap().1
    }

    pub fn region(&self, r: Region) -> &GroupTotals {
        &self.by_region.iter().find(|(k, _)| *k == r).unwrap().1
    }

    /// (scope, key, totals) for every reporting row.
    pub fn rows(&self) -> Vec<(&'static str, String, &GroupTotals)> {
        let mut out = vec![("global", "all".to_string(), &self.global)];
        out.extend(self.by_group.iter().map(|(g, t)| ("income_group", g.to_string(), t)));
        out.extend(self.by_region.iter().map(|(r, t)| ("region", r.to_string(), t)));
        out
    }
}

/// Fills missing wages when any are missing; otherwise leaves the table alone.
pub fn complete_wages(wages: &WageTable) -> Result<(WageTable, Option<ImputationReport>), ScenarioError> {
    if wages.rows.iter().all(|r| r.hourly_wage_usd.is_some()) {
        return Ok((wages.clone(), None));
    }
    let (table, report) = impute_wages(wages).map_err(|e| ScenarioError::Wages(e.to_string()))?;
    Ok((table, Some(report)))
}

/// Runs every country (in parallel on the current rayon pool) and folds the
/// results in ISO3 order.
pub fn run_global(dataset: &Dataset, scenario: &Scenario, lookups: &LookupSet) -> Result<AggregateReport, ScenarioError> {
    scenario.validate()?;
    let (wages, fits) = complete_wages(&dataset.wages)?;
    let by_country = dataset.areas_by_country();
    let empty = Vec::new();
    let results: Vec<CountryResult> = dataset
        .countries
        .par_iter()
        .map(|c| {
            let areas = by_country.get(c.country_iso3.as_str()).unwrap_or(&empty);
            let book = country_cost_book(&dataset.cost_book, &wages, &c.country_iso3);
            run_country(c, areas, &book, scenario, lookups)
        })
        .collect::<Result<_, _>>()?;
    Ok(AggregateReport::from_countries(&scenario.name, results, fits))
}

/// Several scenarios to compare, and which one the deltas are taken against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Name of the baseline scenario; defaults to the first one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub scenario: Vec<Scenario>,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<SweepConfig, ScenarioError> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }

    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.scenario.len() < 2 {
            return Err(ScenarioError::Sweep(format!(
                "need at least 2 scenarios, found {}",
                self.scenario.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for s in &self.scenario {
            s.validate()?;
            if !seen.insert(s.name.as_str()) {
                return Err(ScenarioError::Sweep(format!("duplicate scenario name `{}`", s.name)));
            }
        }
        if let Some(b) = &self.baseline {
            if !seen.contains(b.as_str()) {
                return Err(ScenarioError::Sweep(format!("baseline `{b}` is not one of the scenarios")));
            }
        }
        Ok(())
    }

    pub fn baseline_name(&self) -> &str {
        self.baseline.as_deref().unwrap_or(&self.scenario[0].name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub scope: &'static str,
    pub key: String,
    pub total: Cents,
    pub baseline_total: Cents,
}

impl SweepRow {
    pub fn delta(&self) -> Cents {
        self.total - self.baseline_total
    }

    pub fn delta_pct(&self) -> f64 {
        if self.baseline_total.is_zero() {
            0.0
        } else {
            self.delta().usd() / self.baseline_total.usd() * 100.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub baseline: String,
    pub reports: Vec<AggregateReport>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn report(&self, name: &str) -> Option<&AggregateReport> {
        self.reports.iter().find(|r| r.scenario == name)
    }
}

/// Runs each scenario with the tables `lookups` supplies for it and tabulates
/// totals against the baseline.
pub fn sweep<F>(dataset: &Dataset, config: &SweepConfig, mut lookups: F) -> Result<SweepReport, ScenarioError>
where
    F: FnMut(&Scenario) -> Result<LookupSet, ScenarioError>,
{
    config.validate()?;
    let mut reports = Vec::with_capacity(config.scenario.len());
    for s in &config.scenario {
        let set = lookups(s)?;
        reports.push(run_global(dataset, s, &set)?);
    }
    let baseline = config.baseline_name().to_string();
    let base = reports.iter().find(|r| r.scenario == baseline).expect("validated baseline");
    let base_rows = base.rows();
    let mut rows = Vec::new();
    for r in &reports {
        for ((scope, key, t), (_, _, b)) in r.rows().into_iter().zip(&base_rows) {
            rows.push(SweepRow {
                scenario: r.scenario.clone(),
                scope,
                key,
                total: t.total,
                baseline_total: b.total,
            });
        }
    }
    Ok(SweepReport { baseline, reports, rows })
}

pub const COUNTRY_FILE: &str = "results_country.csv";
pub const DECILE_FILE: &str = "results_decile.csv";
pub const AGGREGATE_FILE: &str = "results_aggregate.csv";
pub const DECILES_DIAG_FILE: &str = "deciles.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub const COUNTRY_HEADER: [&str; 17] = [
    "scenario",
    "country_iso3",
    "income_group",
    "region",
    "reliability_pct",
    "monthly_gb",
    "horizon_years",
    "served_users",
    "unconnected_users",
    "decile_costs_usd",
    "tpu_usd",
    "total_cost_usd",
    "gdp_usd",
    "gdp_share_pct",
    "terrestrial_deciles",
    "satellite_deciles",
    "new_sites",
];

pub fn country_csv(report: &AggregateReport) -> String {
    write_csv(
        &COUNTRY_HEADER,
        report.countries.iter().map(|c| {
            let new_sites: u64 = c.deciles.iter().map(|d| d.plan.new_sites()).sum();
            vec![
                report.scenario.clone(),
                c.country_iso3.clone(),
                c.income_group.to_string(),
                c.region.to_string(),
                c.reliability_pct.to_string(),
                c.monthly_gb.to_string(),
                c.horizon_years.to_string(),
                c.served_users.to_string(),
                c.unconnected_users.to_string(),
                c.decile_costs.to_string(),
                c.tpu_usd.to_string(),
                c.total_cost.to_string(),
                c.gdp_usd.to_string(),
                c.gdp_share_pct.to_string(),
                c.count(Strategy::Terrestrial).to_string(),
                c.count(Strategy::Satellite).to_string(),
                new_sites.to_string(),
            ]
        }),
    )
}

pub const DECILE_HEADER: [&str; 34] = [
    "scenario",
    "country_iso3",
    "income_group",
    "region",
    "decile",
    "population",
    "area_km2",
    "active_users",
    "served_users",
    "per_user_rate_mbps",
    "demand_density_mbps_km2",
    "existing_4g_sites",
    "existing_non4g_sites",
    "required_total_sites",
    "upgrades",
    "new_builds",
    "strategy",
    "unmeetable",
    "satellite_users",
    "capex_ran_usd",
    "capex_backhaul_usd",
    "capex_civils_usd",
    "capex_power_usd",
    "capex_labor_usd",
    "capex_usd",
    "metro_core_fiber_usd",
    "opex_usd",
    "satellite_usd",
    "policy_usd",
    "skills_usd",
    "total_usd",
    "terrestrial_per_user_usd",
    "satellite_per_user_usd",
    "total_cost_share_usd",
];

pub fn decile_csv(report: &AggregateReport) -> String {
    let rows = report.countries.iter().flat_map(|c| {
        c.deciles.iter().zip(&c.decile_shares).map(move |(d, share)| {
            let k = &d.costs;
            vec![
                report.scenario.clone(),
                c.country_iso3.clone(),
                c.income_group.to_string(),
                c.region.to_string(),
                d.decile.decile_index.to_string(),
                d.decile.population.to_string(),
                d.decile.area_km2.to_string(),
                d.demand.active_users.to_string(),
                d.demand.served_users.to_string(),
                d.demand.per_user_rate_mbps.to_string(),
                d.demand.demand_density_mbps_km2.to_string(),
                d.assets.existing_4g_sites.to_string(),
                d.assets.existing_non4g_sites.to_string(),
                d.plan.required_total_sites.to_string(),
                d.plan.upgrades.to_string(),
                d.plan.new_builds.to_string(),
                d.plan.strategy.as_str().to_string(),
                d.plan.unmeetable.to_string(),
                d.plan.satellite_users.to_string(),
                k.capex.ran.to_string(),
                k.capex.backhaul.to_string(),
                k.capex.civils.to_string(),
                k.capex.power.to_string(),
                k.capex.labor().to_string(),
                k.capex.total().to_string(),
                k.metro_core_fiber.to_string(),
                k.opex.to_string(),
                k.satellite.to_string(),
                k.policy.to_string(),
                k.skills.to_string(),
                k.total().to_string(),
                d.terrestrial_per_user_usd.map(|v| v.to_string()).unwrap_or_default(),
                d.satellite_per_user_usd.to_string(),
                share.to_string(),
            ]
        })
    });
    write_csv(&DECILE_HEADER, rows)
}

pub fn aggregate_header() -> Vec<String> {
    let mut h: Vec<String> = ["scenario", "scope", "key", "decile", "total_cost_usd"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(CATEGORY_NAMES.iter().map(|c| format!("{c}_usd")));
    h.extend(["gdp_usd", "gdp_share_pct", "countries"].iter().map(|s| s.to_string()));
    h
}

/// One row per scope/key with `decile = all`, followed by its ten decile rows.
pub fn aggregate_csv(report: &AggregateReport) -> String {
    let header = aggregate_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (scope, key, t) in report.rows() {
        let mut row = vec![
            report.scenario.clone(),
            scope.to_string(),
            key.clone(),
            "all".to_string(),
            t.total.to_string(),
        ];
        row.extend(t.by_category.iter().map(Cents::to_string));
        row.extend([t.gdp_usd.to_string(), t.gdp_share_pct().to_string(), t.countries.to_string()]);
        rows.push(row);
        for (i, d) in t.by_decile.iter().enumerate() {
            let mut row = vec![
                report.scenario.clone(),
                scope.to_string(),
                key.clone(),
                (i + 1).to_string(),
                d.to_string(),
            ];
            row.extend(std::iter::repeat_n(String::new(), 6));
            row.extend([String::new(), String::new(), String::new()]);
            rows.push(row);
        }
    }
    write_csv(&header, rows)
}

pub const DECILES_DIAG_HEADER: [&str; 10] = [
    "country_iso3",
    "decile",
    "areas",
    "population",
    "area_km2",
    "density_per_km2",
    "existing_4g_sites",
    "existing_non4g_sites",
    "total_sites",
    "fiber_backhaul_sites",
];

pub fn deciles_csv(report: &AggregateReport) -> String {
    let rows = report.countries.iter().flat_map(|c| {
        c.deciles.iter().map(move |d| {
            vec![
                c.country_iso3.clone(),
                d.decile.decile_index.to_string(),
                d.decile.member_area_ids.len().to_string(),
                d.decile.population.to_string(),
                d.decile.area_km2.to_string(),
                d.decile.density().to_string(),
                d.assets.existing_4g_sites.to_string(),
                d.assets.existing_non4g_sites.to_string(),
                d.assets.total_sites().to_string(),
                d.assets.fiber_backhaul_sites.to_string(),
            ]
        })
    });
    write_csv(&DECILES_DIAG_HEADER, rows)
}

pub const SWEEP_HEADER: [&str; 8] = [
    "scenario",
    "baseline",
    "scope",
    "key",
    "total_cost_usd",
    "baseline_total_cost_usd",
    "delta_usd",
    "delta_pct",
];

pub fn sweep_csv(report: &SweepReport) -> String {
    write_csv(
        &SWEEP_HEADER,
        report.rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                report.baseline.clone(),
                r.scope.to_string(),
                r.key.clone(),
                r.total.to_string(),
                r.baseline_total.to_string(),
                r.delta().to_string(),
                r.delta_pct().to_string(),
            ]
        }),
    )
}

/// The four run outputs as (file name, contents).
pub fn run_outputs(report: &AggregateReport) -> Vec<(&'static str, String)> {
    vec![
        (COUNTRY_FILE, country_csv(report)),
        (DECILE_FILE, decile_csv(report)),
        (AGGREGATE_FILE, aggregate_csv(report)),
        (DECILES_DIAG_FILE, deciles_csv(report)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::tests::flat_book;
    use crate::radio::{Band, CapacityLookup, LookupRow};

    fn area(id: &str, iso3: &str, pop: f64, km2: f64) -> AreaRecord {
        AreaRecord {
            area_id: id.into(),
            country_iso3: iso3.into(),
            population: pop,
            area_km2: km2,
        }
    }

    fn country(iso3: &str, unconnected: f64) -> CountryParams {
        CountryParams {
            country_iso3: iso3.into(),
            income_group: IncomeGroup::EME,
            region: Region::LAC,
            pop_growth_rate_pct_per_year: 0.0,
            start_year: 2020,
            end_year: 2030,
            adoption_rate_pct: 100.0,
            market_share_pct: 100.0,
            active_share_pct: 100.0,
            total_sites: 0,
            coverage_2g_pct: 0.0,
            coverage_4g_pct: 0.0,
            fiber_backhaul_share_pct: Some(0.0),
            spectrum_portfolio: vec![Band { frequency_mhz: 800.0, bandwidth_mhz: 10.0 }],
            unconnected_users: unconnected,
            gdp_usd: 1e9,
            monthly_data_target_gb: 10.0,
            reliability_pct: 95.0,
        }
    }

    fn lookups() -> LookupSet {
        let rows = [(0.0, 0.0), (1.0, 1.0), (10.0, 10.0)]
            .iter()
            .map(|&(d, v)| LookupRow { site_density_per_km2: d, se_density_bps_hz_km2: v })
            .collect();
        std::iter::once(CapacityLookup::from_raw(800.0, 95.0, rows).unwrap()).collect()
    }

    fn areas(iso3: &str) -> Vec<AreaRecord> {
        (0..10).map(|i| area(&format!("{iso3}{i}"), iso3, 1000.0, 10.0)).collect()
    }

    #[test]
    fn zero_unconnected_zero_cost() {
        let a = areas("AAA");
        let refs: Vec<&AreaRecord> = a.iter().collect();
        let r = run_country(&country("AAA", 0.0), &refs, &flat_book(10.0), &Scenario::named("s"), &lookups()).unwrap();
        assert_eq!(r.total_cost, Cents::ZERO);
        assert!(r.decile_costs > Cents::ZERO);
        assert_eq!(r.decile_shares.iter().copied().sum::<Cents>(), Cents::ZERO);
    }

    #[test]
    fn ample_existing_sites_build_nothing() {
        let a = areas("AAA");
        let refs: Vec<&AreaRecord> = a.iter().collect();
        let mut c = country("AAA", 500.0);
        c.total_sites = 10_000;
        c.coverage_4g_pct = 100.0;
        c.coverage_2g_pct = 100.0;
        let r = run_country(&c, &refs, &flat_book(10.0), &Scenario::named("s"), &lookups()).unwrap();
        assert!(r.deciles.iter().all(|d| d.plan.strategy == Strategy::NoneNeeded));
        let infra: Cents = r.deciles.iter().map(|d| d.costs.infrastructure() + d.costs.satellite).sum();
        assert_eq!(infra, Cents::ZERO);
        // Only the $2 + $12 per served user remain.
        assert_eq!(r.decile_costs, Cents::from_usd(14.0 * 10_000.0));
    }

    #[test]
    fn global_is_order_independent_and_additive() {
        let mut areas_all = areas("AAA");
        areas_all.extend(areas("BBB"));
        let book = flat_book(10.0);
        let a = Dataset::new(areas_all.clone(), vec![country("AAA", 100.0), country("BBB", 300.0)], WageTable::default(), book.clone()).unwrap();
        areas_all.reverse();
        let b = Dataset::new(areas_all, vec![country("BBB", 300.0), country("AAA", 100.0)], WageTable::default(), book).unwrap();
        let s = Scenario::named("s");
        let ra = run_global(&a, &s, &lookups()).unwrap();
        let rb = run_global(&b, &s, &lookups()).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(run_outputs(&ra), run_outputs(&rb));
        let sum: Cents = ra.countries.iter().map(|c| c.total_cost).sum();
        assert_eq!(ra.global.total, sum);
        assert_eq!(ra.group(IncomeGroup::EME).total, sum);
        assert_eq!(ra.global.by_decile.iter().copied().sum::<Cents>(), sum);
    }

    #[test]
    fn sweep_rejects_duplicates_and_singletons() {
        let one = SweepConfig { baseline: None, scenario: vec![Scenario::named("a")] };
        assert!(matches!(one.validate(), Err(ScenarioError::Sweep(_))));
        let dup = SweepConfig { baseline: None, scenario: vec![Scenario::named("a"), Scenario::named("a")] };
        assert!(matches!(dup.validate(), Err(ScenarioError::Sweep(m)) if m.contains("duplicate")));
    }

    #[test]
    fn identical_scenarios_zero_deltas() {
        let d = Dataset::new(areas("AAA"), vec![country("AAA", 100.0)], WageTable::default(), flat_book(10.0)).unwrap();
        let cfg = SweepConfig { baseline: None, scenario: vec![Scenario::named("a"), Scenario::named("b")] };
        let r = sweep(&d, &cfg, |_| Ok(lookups())).unwrap();
        assert!(r.rows.iter().all(|row| row.delta().is_zero()));
    }

    #[test]
    fn scenario_rejects_unknown_key() {
        let err = Scenario::from_toml_str("name = \"x\"\nreliabilty_pct = 50\n").unwrap_err();
        assert!(err.to_string().contains("reliabilty_pct"), "{err}");
    }

    #[test]
    fn scenario_requires_all_groups() {
        let err = Scenario::from_toml_str("name = \"x\"\n[monthly_gb]\nAE = 1\nEME = 2\n").unwrap_err();
        assert!(err.to_string().contains("LIDC"), "{err}");
    }
}
