//! Pricing: site capex, metro/core fiber, opex to the horizon, satellite
//! service, per-user overheads and the per-user / national roll-ups.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deciles::{Decile, DecileAssets};
use crate::dimensioning::DecilePlan;
use crate::groups::IncomeGroup;
use crate::money::Cents;

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("{new_sites} new sites priced against zero total sites")]
    NoSites { new_sites: u64 },
    #[error("costs of {numerator} over a zero subscriber base")]
    NoSubscribers { numerator: Cents },
}

fn d_hours() -> f64 {
    16.0
}
fn d_opex() -> f64 {
    15.0
}
fn d_alpha() -> f64 {
    10.0
}
fn d_policy() -> f64 {
    2.0
}
fn d_skills() -> f64 {
    12.0
}
fn d_sat() -> f64 {
    200.0
}

/// Users sharing one satellite subscription, by income group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteSplit {
    #[serde(rename = "LIDC")]
    pub lidc: u32,
    #[serde(rename = "EME")]
    pub eme: u32,
    #[serde(rename = "AE")]
    pub ae: u32,
}

impl Default for SatelliteSplit {
    fn default() -> Self {
        SatelliteSplit { lidc: 12, eme: 8, ae: 4 }
    }
}

impl SatelliteSplit {
    pub fn users(&self, group: IncomeGroup) -> u32 {
        match group {
            IncomeGroup::LIDC => self.lidc,
            IncomeGroup::EME => self.eme,
            IncomeGroup::AE => self.ae,
        }
    }
}

/// Unit costs and pricing rules. Keys map one-to-one onto the TOML cost book;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBook {
    pub ran_usd: f64,
    pub backhaul_wireless_usd: f64,
    /// Per-site fiber backhaul, per meter of mean inter-site distance.
    pub backhaul_fiber_per_m_usd: f64,
    pub civils_usd: f64,
    pub power_system_usd: f64,
    #[serde(default = "d_hours")]
    pub labor_hours_per_component: f64,
    /// Fallback wages, used when a country has no wage row for a sector.
    pub wage_ict_usd_hr: f64,
    pub wage_logistics_usd_hr: f64,
    pub wage_construction_usd_hr: f64,
    #[serde(default = "d_opex")]
    pub opex_rate_pct_per_year: f64,
    #[serde(default = "d_alpha")]
    pub fiber_core_split_alpha_pct: f64,
    pub fiber_cost_per_m_usd: f64,
    #[serde(default = "d_policy")]
    pub policy_per_user_usd: f64,
    #[serde(default = "d_skills")]
    pub skills_per_user_usd: f64,
    #[serde(default = "d_sat")]
    pub satellite_monthly_usd: f64,
    #[serde(default)]
    pub satellite_users_per_subscription: SatelliteSplit,
    /// Years of opex and satellite service. When absent, each country's
    /// assessment span (end year − start year) is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_years: Option<u32>,
}

impl CostBook {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let book: CostBook = toml::from_str(text).map_err(|e| e.to_string())?;
        book.validate()?;
        Ok(book)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("cost book serializes")
    }

    pub fn validate(&self) -> Result<(), String> {
        let money = [
            ("ran_usd", self.ran_usd),
            ("backhaul_wireless_usd", self.backhaul_wireless_usd),
            ("backhaul_fiber_per_m_usd", self.backhaul_fiber_per_m_usd),
            ("civils_usd", self.civils_usd),
            ("power_system_usd", self.power_system_usd),
            ("labor_hours_per_component", self.labor_hours_per_component),
            ("wage_ict_usd_hr", self.wage_ict_usd_hr),
            ("wage_logistics_usd_hr", self.wage_logistics_usd_hr),
            ("wage_construction_usd_hr", self.wage_construction_usd_hr),
            ("fiber_cost_per_m_usd", self.fiber_cost_per_m_usd),
            ("policy_per_user_usd", self.policy_per_user_usd),
            ("skills_per_user_usd", self.skills_per_user_usd),
            ("satellite_monthly_usd", self.satellite_monthly_usd),
        ];
        for (k, v) in money {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(format!("`{k}` must be a finite value >= 0 (got {v})"));
            }
        }
        for (k, v) in [
            ("opex_rate_pct_per_year", self.opex_rate_pct_per_year),
            ("fiber_core_split_alpha_pct", self.fiber_core_split_alpha_pct),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(format!("`{k}` must be in [0, 100] (got {v})"));
            }
        }
        let s = &self.satellite_users_per_subscription;
        if s.lidc == 0 || s.eme == 0 || s.ae == 0 {
            return Err("`satellite_users_per_subscription` entries must be >= 1".into());
        }
        Ok(())
    }

    /// Copy with country-specific hourly wages.
    pub fn with_wages(&self, ict: f64, logistics: f64, construction: f64) -> CostBook {
        CostBook {
            wage_ict_usd_hr: ict,
            wage_logistics_usd_hr: logistics,
            wage_construction_usd_hr: construction,
            ..self.clone()
        }
    }
}

/// How a site's traffic reaches the fiber network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backhaul {
    Wireless,
    /// Fiber laid over the mean distance to the neighbouring site.
    Fiber { distance_m: f64 },
}

/// Capex split into the eight site components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapexBreakdown {
    pub ran: Cents,
    pub backhaul: Cents,
    pub civils: Cents,
    pub power: Cents,
    pub labor_planning: Cents,
    pub labor_logistics: Cents,
    pub labor_construction: Cents,
    pub labor_installation: Cents,
}

impl CapexBreakdown {
    pub fn total(&self) -> Cents {
        self.hardware() + self.labor()
    }

    /// Asset value subject to the annual opex rate.
    pub fn hardware(&self) -> Cents {
        self.ran + self.backhaul + self.civils + self.power
    }

    pub fn labor(&self) -> Cents {
        self.labor_planning + self.labor_logistics + self.labor_construction + self.labor_installation
    }

    /// Labor that recurs every year (construction is one-off).
    pub fn recurring_labor(&self) -> Cents {
        self.labor_planning + self.labor_logistics + self.labor_installation
    }

    pub fn times(&self, n: u64) -> CapexBreakdown {
        CapexBreakdown {
            ran: self.ran * n,
            backhaul: self.backhaul * n,
            civils: self.civils * n,
            power: self.power * n,
            labor_planning: self.labor_planning * n,
            labor_logistics: self.labor_logistics * n,
            labor_construction: self.labor_construction * n,
            labor_installation: self.labor_installation * n,
        }
    }

    pub fn plus(&self, o: &CapexBreakdown) -> CapexBreakdown {
        CapexBreakdown {
            ran: self.ran + o.ran,
            backhaul: self.backhaul + o.backhaul,
            civils: self.civils + o.civils,
            power: self.power + o.power,
            labor_planning: self.labor_planning + o.labor_planning,
            labor_logistics: self.labor_logistics + o.labor_logistics,
            labor_construction: self.labor_construction + o.labor_construction,
            labor_installation: self.labor_installation + o.labor_installation,
        }
    }
}

/// Capex of one site. Upgrades (`greenfield == false`) skip civils and
/// construction labor.
pub fn site_capex(book: &CostBook, backhaul: Backhaul, greenfield: bool) -> CapexBreakdown {
    let hours = book.labor_hours_per_component;
    let backhaul_usd = match backhaul {
        Backhaul::Wireless => book.backhaul_wireless_usd,
        Backhaul::Fiber { distance_m } => book.backhaul_fiber_per_m_usd * distance_m,
    };
    CapexBreakdown {
        ran: Cents::from_usd(book.ran_usd),
        backhaul: Cents::from_usd(backhaul_usd),
        civils: if greenfield { Cents::from_usd(book.civils_usd) } else { Cents::ZERO },
        power: Cents::from_usd(book.power_system_usd),
        labor_planning: Cents::from_usd(hours * book.wage_ict_usd_hr),
        labor_logistics: Cents::from_usd(hours * book.wage_logistics_usd_hr),
        labor_construction: if greenfield {
            Cents::from_usd(hours * book.wage_construction_usd_hr)
        } else {
            Cents::ZERO
        },
        labor_installation: Cents::from_usd(hours * book.wage_ict_usd_hr),
    }
}

/// Opex of one site's capex over `horizon_years`, undiscounted: the opex
/// rate applied to hardware value, plus recurring labor, every year.
pub fn opex_to_horizon(capex: &CapexBreakdown, book: &CostBook, horizon_years: u32) -> Cents {
    let annual =
        book.opex_rate_pct_per_year / 100.0 * capex.hardware().usd() + capex.recurring_labor().usd();
    Cents::from_usd(annual * horizon_years as f64)
}

/// Reading of the mean inter-site distance used for fiber lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberDistanceMode {
    /// `0.5 × sqrt(area / sites)` km, i.e. half the spacing at that density.
    #[default]
    Density,
    /// `0.5 × sqrt(1 / sites)` km with the raw site count, as typeset.
    Literal,
}

/// Mean distance (km) between the `total_sites` sites of a decile.
pub fn mean_site_distance_km(area_km2: f64, total_sites: u64, mode: FiberDistanceMode) -> f64 {
    if total_sites == 0 {
        return 0.0;
    }
    match mode {
        FiberDistanceMode::Density => 0.5 * (area_km2 / total_sites as f64).sqrt(),
        FiberDistanceMode::Literal => 0.5 * (1.0 / total_sites as f64).sqrt(),
    }
}

/// Metro/core fiber for `new_sites` new or upgraded sites.
pub fn metro_core_fiber(
    area_km2: f64,
    total_sites: u64,
    new_sites: u64,
    alpha_pct: f64,
    fiber_per_m_usd: f64,
    mode: FiberDistanceMode,
) -> Result<Cents, CostError> {
    if new_sites == 0 {
        return Ok(Cents::ZERO);
    }
    if total_sites == 0 {
        return Err(CostError::NoSites { new_sites });
    }
    let d_km = mean_site_distance_km(area_km2, total_sites, mode);
    Ok(Cents::from_usd(
        d_km * 1000.0 * new_sites as f64 * (alpha_pct / 100.0) * fiber_per_m_usd,
    ))
}

/// Satellite subscription price per user per month for an income group.
pub fn satellite_per_user_month(book: &CostBook, group: IncomeGroup) -> f64 {
    book.satellite_monthly_usd / book.satellite_users_per_subscription.users(group) as f64
}

/// Satellite service cost per user over the horizon.
pub fn satellite_per_user(book: &CostBook, group: IncomeGroup, horizon_years: u32) -> f64 {
    satellite_per_user_month(book, group) * 12.0 * horizon_years as f64
}

pub fn satellite_cost(users: f64, group: IncomeGroup, book: &CostBook, horizon_years: u32) -> Cents {
    Cents::from_usd(satellite_per_user(book, group, horizon_years) * users.max(0.0))
}

/// Cost lines for one decile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecileCostResult {
    pub capex: CapexBreakdown,
    pub metro_core_fiber: Cents,
    pub opex: Cents,
    pub satellite: Cents,
    pub policy: Cents,
    pub skills: Cents,
}

impl DecileCostResult {
    pub fn total(&self) -> Cents {
        self.capex.total() + self.metro_core_fiber + self.opex + self.satellite + self.policy + self.skills
    }

    /// Capex, metro/core fiber and opex: the part satellite can replace.
    pub fn infrastructure(&self) -> Cents {
        self.capex.total() + self.metro_core_fiber + self.opex
    }

    /// Category totals in reporting order: capex, fiber, opex, satellite,
    /// policy, skills.
    pub fn categories(&self) -> [Cents; 6] {
        [
            self.capex.total(),
            self.metro_core_fiber,
            self.opex,
            self.satellite,
            self.policy,
            self.skills,
        ]
    }
}

pub const CATEGORY_NAMES: [&str; 6] = ["capex", "metro_core_fiber", "opex", "satellite", "policy", "skills"];

/// A decile's new sites are fiber-fed when most of its existing sites are.
pub fn decile_backhaul(assets: &DecileAssets, decile: &Decile, total_sites: u64, mode: FiberDistanceMode) -> Backhaul {
    if assets.total_sites() > 0 && 2 * assets.fiber_backhaul_sites > assets.total_sites() {
        Backhaul::Fiber {
            distance_m: mean_site_distance_km(decile.area_km2, total_sites, mode) * 1000.0,
        }
    } else {
        Backhaul::Wireless
    }
}

/// Infrastructure cost of a terrestrial plan: capex for upgrades and
/// greenfield builds, metro/core fiber and opex.
pub fn price_terrestrial(
    plan: &DecilePlan,
    decile: &Decile,
    assets: &DecileAssets,
    book: &CostBook,
    horizon_years: u32,
    mode: FiberDistanceMode,
) -> Result<DecileCostResult, CostError> {
    let backhaul = decile_backhaul(assets, decile, plan.required_total_sites, mode);
    let greenfield = site_capex(book, backhaul, true);
    let upgrade = site_capex(book, backhaul, false);
    let capex = greenfield.times(plan.new_builds).plus(&upgrade.times(plan.upgrades));
    let opex = opex_to_horizon(&greenfield, book, horizon_years) * plan.new_builds
        + opex_to_horizon(&upgrade, book, horizon_years) * plan.upgrades;
    let fiber = metro_core_fiber(
        decile.area_km2,
        plan.required_total_sites,
        plan.new_sites(),
        book.fiber_core_split_alpha_pct,
        book.fiber_cost_per_m_usd,
        mode,
    )?;
    Ok(DecileCostResult {
        capex,
        metro_core_fiber: fiber,
        opex,
        ..Default::default()
    })
}

/// One-off policy/regulation and skills/content costs for newly served users.
pub fn user_overheads(served_users: f64, book: &CostBook) -> (Cents, Cents) {
    (
        Cents::from_usd(book.policy_per_user_usd * served_users),
        Cents::from_usd(book.skills_per_user_usd * served_users),
    )
}

/// Mean total cost of ownership per subscriber.
pub fn tpu(total: Cents, served_users: f64) -> Result<f64, CostError> {
    if served_users > 0.0 {
        Ok(total.usd() / served_users)
    } else if total.is_zero() {
        Ok(0.0)
    } else {
        Err(CostError::NoSubscribers { numerator: total })
    }
}

/// National cost: per-user cost times unconnected users.
pub fn total_cost(tpu_usd: f64, unconnected_users: f64) -> f64 {
    tpu_usd * unconnected_users
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dimensioning::split_shortfall;

    pub fn flat_book(wage: f64) -> CostBook {
        CostBook {
            ran_usd: 20_000.0,
            backhaul_wireless_usd: 10_000.0,
            backhaul_fiber_per_m_usd: 20.0,
            civils_usd: 15_000.0,
            power_system_usd: 5_000.0,
            labor_hours_per_component: 16.0,
            wage_ict_usd_hr: wage,
            wage_logistics_usd_hr: wage,
            wage_construction_usd_hr: wage,
            opex_rate_pct_per_year: 15.0,
            fiber_core_split_alpha_pct: 10.0,
            fiber_cost_per_m_usd: 10.0,
            policy_per_user_usd: 2.0,
            skills_per_user_usd: 12.0,
            satellite_monthly_usd: 200.0,
            satellite_users_per_subscription: SatelliteSplit::default(),
            horizon_years: Some(8),
        }
    }

    fn zero_book() -> CostBook {
        CostBook {
            ran_usd: 0.0,
            backhaul_wireless_usd: 0.0,
            backhaul_fiber_per_m_usd: 0.0,
            civils_usd: 0.0,
            power_system_usd: 0.0,
            ..flat_book(0.0)
        }
    }

    #[test]
    fn zero_costs_zero_capex() {
        assert_eq!(site_capex(&zero_book(), Backhaul::Wireless, true).total(), Cents::ZERO);
    }

    #[test]
    fn wireless_site_hand_sum() {
        // 20,000 + 10,000 + 15,000 + 5,000 + 4 × 16 × 25 = 51,600.
        let c = site_capex(&flat_book(25.0), Backhaul::Wireless, true);
        assert_eq!(c.total(), Cents::from_usd(51_600.0));
    }

    #[test]
    fn upgrade_saves_civils_and_construction() {
        let mut book = flat_book(25.0);
        book.civils_usd = 10_000.0;
        let g = site_capex(&book, Backhaul::Wireless, true);
        let u = site_capex(&book, Backhaul::Wireless, false);
        assert_eq!(g.total() - u.total(), Cents::from_usd(10_000.0 + 16.0 * 25.0));
    }

    #[test]
    fn fiber_backhaul_uses_distance() {
        let c = site_capex(&flat_book(25.0), Backhaul::Fiber { distance_m: 500.0 }, true);
        assert_eq!(c.backhaul, Cents::from_usd(10_000.0));
    }

    #[test]
    fn opex_cases() {
        let book = CostBook { horizon_years: None, ..flat_book(0.0) };
        let asset = CapexBreakdown { ran: Cents::from_usd(80_000.0), ..Default::default() };
        assert_eq!(opex_to_horizon(&asset, &book, 8), Cents::from_usd(96_000.0));
        assert_eq!(opex_to_horizon(&asset, &book, 0), Cents::ZERO);
        let free = CostBook { opex_rate_pct_per_year: 0.0, ..book };
        assert_eq!(opex_to_horizon(&asset, &free, 8), Cents::ZERO);
    }

    #[test]
    fn opex_recurs_labor_but_not_construction() {
        let book = flat_book(10.0);
        let c = site_capex(&book, Backhaul::Wireless, true);
        // Hardware 50,000 × 15% + 3 × 160 labor, per year.
        assert_eq!(opex_to_horizon(&c, &book, 1), Cents::from_usd(7_500.0 + 480.0));
    }

    #[test]
    fn metro_fiber_cases() {
        let m = FiberDistanceMode::Density;
        assert_eq!(metro_core_fiber(100.0, 25, 5, 10.0, 10.0, m), Ok(Cents::from_usd(5_000.0)));
        assert_eq!(metro_core_fiber(100.0, 25, 0, 10.0, 10.0, m), Ok(Cents::ZERO));
        let quad = metro_core_fiber(400.0, 25, 5, 10.0, 10.0, m).unwrap();
        assert_eq!(quad, Cents::from_usd(10_000.0));
        assert_eq!(metro_core_fiber(100.0, 0, 5, 10.0, 10.0, m), Err(CostError::NoSites { new_sites: 5 }));
        let lit = metro_core_fiber(100.0, 25, 5, 10.0, 10.0, FiberDistanceMode::Literal).unwrap();
        assert_eq!(lit, Cents::from_usd(0.5 * 0.2 * 1000.0 * 5.0 * 0.1 * 10.0));
    }

    #[test]
    fn satellite_split() {
        let book = flat_book(0.0);
        assert_eq!(Cents::from_usd(satellite_per_user_month(&book, IncomeGroup::LIDC)), Cents(1667));
        assert_eq!(satellite_per_user_month(&book, IncomeGroup::EME), 25.0);
        assert_eq!(satellite_per_user_month(&book, IncomeGroup::AE), 50.0);
        assert_eq!(satellite_cost(0.0, IncomeGroup::AE, &book, 8), Cents::ZERO);
        assert_eq!(satellite_cost(3.0, IncomeGroup::LIDC, &book, 8), Cents::from_usd(3.0 * 1600.0));
    }

    #[test]
    fn tpu_and_tc() {
        let t = tpu(Cents::from_usd(1_000_000.0), 10_000.0).unwrap();
        assert_eq!(t, 100.0);
        assert_eq!(tpu(Cents::ZERO, 0.0), Ok(0.0));
        assert!(tpu(Cents(1), 0.0).is_err());
        assert_eq!(tpu(Cents::from_usd(2_000_000.0), 10_000.0).unwrap(), 2.0 * t);
        assert_eq!(total_cost(100.0, 50_000.0), 5_000_000.0);
        assert_eq!(total_cost(100.0, 0.0), 0.0);
        let tc = total_cost(123.456, 7_891.0);
        assert!((tc / 7_891.0 - 123.456).abs() <= 123.456 * f64::EPSILON);
    }

    #[test]
    fn terrestrial_plan_pricing() {
        let book = flat_book(25.0);
        let decile = Decile {
            country_iso3: "AAA".into(),
            decile_index: 1,
            population: 1.0,
            area_km2: 100.0,
            member_area_ids: vec![],
        };
        let assets = DecileAssets { decile_index: 1, existing_4g_sites: 20, existing_non4g_sites: 2, fiber_backhaul_sites: 0 };
        let plan = split_shortfall(1, 25, &assets);
        assert_eq!((plan.upgrades, plan.new_builds), (2, 3));
        let r = price_terrestrial(&plan, &decile, &assets, &book, 8, FiberDistanceMode::Density).unwrap();
        let g = site_capex(&book, Backhaul::Wireless, true);
        let u = site_capex(&book, Backhaul::Wireless, false);
        assert_eq!(r.capex.total(), g.total() * 3 + u.total() * 2);
        assert_eq!(r.metro_core_fiber, Cents::from_usd(5_000.0));
        assert_eq!(r.total(), r.categories().iter().sum());
    }

    #[test]
    fn unknown_costbook_key_rejected() {
        let mut text = flat_book(1.0).to_toml_string();
        text.push_str("\nran_usdd = 1\n");
        let err = CostBook::from_toml_str(&text).unwrap_err();
        assert!(err.contains("ran_usdd"), "{err}");
    }
}
