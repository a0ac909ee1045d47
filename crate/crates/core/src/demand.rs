//! Busy-hour traffic demand per decile.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DemandError {
    #[error("{field} must be >= 0 (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must be in [0, 100] (got {value})")]
    PercentOutOfRange { field: &'static str, value: f64 },
    #[error("days_per_month must be 28..=31 (got {0})")]
    DaysPerMonth(u32),
    #[error("busy_hour_share_pct must be in (0, 100] (got {0})")]
    BusyHourShare(f64),
    #[error("area must be > 0 km² (got {0})")]
    NonPositiveArea(f64),
}

/// How the population growth factor over `y` years is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMode {
    /// `(1 + G/100)^y`.
    #[default]
    Compound,
    /// `1 + (G/100)^y`, the formula exactly as typeset in the source
    /// method. Kept only for audit comparisons.
    Literal,
}

impl GrowthMode {
    pub fn factor(self, growth_pct: f64, years: u32) -> f64 {
        let g = growth_pct / 100.0;
        match self {
            GrowthMode::Compound => (1.0 + g).powi(years as i32),
            GrowthMode::Literal => 1.0 + g.powi(years as i32),
        }
    }
}

/// Inputs to the user-count step for one decile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserInputs {
    pub population: f64,
    pub growth_pct: f64,
    pub years: u32,
    pub adoption_pct: f64,
    pub market_share_pct: f64,
    pub active_share_pct: f64,
}

/// Users of the modeled operator in one decile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Users {
    /// Users transferring data in the busy hour.
    pub active: f64,
    /// The operator's subscriber base (before the active-share factor).
    pub served: f64,
}

pub fn active_users(inputs: &UserInputs, growth: GrowthMode) -> Result<Users, DemandError> {
    if !(inputs.population >= 0.0) {
        return Err(DemandError::Negative {
            field: "population",
            value: inputs.population,
        });
    }
    if !(inputs.growth_pct >= 0.0) {
        return Err(DemandError::Negative {
            field: "growth_pct",
            value: inputs.growth_pct,
        });
    }
    for (field, value) in [
        ("adoption_pct", inputs.adoption_pct),
        ("market_share_pct", inputs.market_share_pct),
        ("active_share_pct", inputs.active_share_pct),
    ] {
        if !(0.0..=100.0).contains(&value) {
            return Err(DemandError::PercentOutOfRange { field, value });
        }
    }
    let served = inputs.population
        * growth.factor(inputs.growth_pct, inputs.years)
        * (inputs.adoption_pct / 100.0)
        * (inputs.market_share_pct / 100.0);
    Ok(Users {
        active: served * (inputs.active_share_pct / 100.0),
        served,
    })
}

/// Monthly data target and how it concentrates into the busy hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub monthly_gb: f64,
    pub days_per_month: u32,
    pub busy_hour_share_pct: f64,
}

impl TrafficProfile {
    pub const DEFAULT_DAYS_PER_MONTH: u32 = 30;
    pub const DEFAULT_BUSY_HOUR_SHARE_PCT: f64 = 15.0;

    pub fn new(monthly_gb: f64) -> Self {
        TrafficProfile {
            monthly_gb,
            days_per_month: Self::DEFAULT_DAYS_PER_MONTH,
            busy_hour_share_pct: Self::DEFAULT_BUSY_HOUR_SHARE_PCT,
        }
    }

    pub fn validate(&self) -> Result<(), DemandError> {
        if !(self.monthly_gb >= 0.0) {
            return Err(DemandError::Negative {
                field: "monthly_gb",
                value: self.monthly_gb,
            });
        }
        if !(28..=31).contains(&self.days_per_month) {
            return Err(DemandError::DaysPerMonth(self.days_per_month));
        }
        if !(self.busy_hour_share_pct > 0.0 && self.busy_hour_share_pct <= 100.0) {
            return Err(DemandError::BusyHourShare(self.busy_hour_share_pct));
        }
        Ok(())
    }
}

/// Mean per-user rate in the busy hour, in Mbps.
///
/// GB/month → megabits/month (×1000×8) → per day → busy-hour share → per
/// second.
pub fn busy_hour_rate(profile: &TrafficProfile) -> Result<f64, DemandError> {
    profile.validate()?;
    Ok(profile.monthly_gb * 1000.0 * 8.0 / profile.days_per_month as f64
        * (profile.busy_hour_share_pct / 100.0)
        / 3600.0)
}

/// Traffic demand density in Mbps/km².
pub fn demand_density(active_users: f64, rate_mbps: f64, area_km2: f64) -> Result<f64, DemandError> {
    if !(area_km2 > 0.0) {
        return Err(DemandError::NonPositiveArea(area_km2));
    }
    Ok(active_users * rate_mbps / area_km2)
}

/// Everything the dimensioning step needs to know about one decile's demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandResult {
    pub active_users: f64,
    pub per_user_rate_mbps: f64,
    pub demand_density_mbps_km2: f64,
    pub served_users: f64,
}

pub fn decile_demand(
    inputs: &UserInputs,
    growth: GrowthMode,
    profile: &TrafficProfile,
    area_km2: f64,
) -> Result<DemandResult, DemandError> {
    let users = active_users(inputs, growth)?;
    let rate = busy_hour_rate(profile)?;
    Ok(DemandResult {
        active_users: users.active,
        per_user_rate_mbps: rate,
        demand_density_mbps_km2: demand_density(users.active, rate, area_km2)?,
        served_users: users.served,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(p: f64, g: f64, y: u32, a: f64, ms: f64, au: f64) -> UserInputs {
        UserInputs {
            population: p,
            growth_pct: g,
            years: y,
            adoption_pct: a,
            market_share_pct: ms,
            active_share_pct: au,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn unity_factors() {
        let u = active_users(&inputs(1000.0, 0.0, 5, 100.0, 100.0, 100.0), GrowthMode::Compound).unwrap();
        assert_eq!(u.active, 1000.0);
        assert_eq!(u.served, 1000.0);
    }

    #[test]
    fn hand_arithmetic_case() {
        // 1e6 × 1.02^10 × 0.9 × 0.25 × 0.1, with 1.02^10 = 1.218994 (6 d.p.).
        let u = active_users(&inputs(1e6, 2.0, 10, 90.0, 25.0, 10.0), GrowthMode::Compound).unwrap();
        assert!((u.active - 27_427.4).abs() < 0.05, "{}", u.active);
        assert!((u.served - 274_273.8).abs() < 0.5, "{}", u.served);
    }

    #[test]
    fn literal_growth_reading() {
        let f = GrowthMode::Literal.factor(2.0, 10);
        assert!((f - (1.0 + 0.02f64.powi(10))).abs() < 1e-15);
        assert_eq!(GrowthMode::Literal.factor(2.0, 0), 2.0);
        assert_eq!(GrowthMode::Compound.factor(2.0, 0), 1.0);
    }

    #[test]
    fn zero_active_share() {
        let u = active_users(&inputs(5e5, 3.0, 8, 90.0, 25.0, 0.0), GrowthMode::Compound).unwrap();
        assert_eq!(u.active, 0.0);
    }

    #[test]
    fn negative_population_rejected() {
        assert!(active_users(&inputs(-1.0, 0.0, 0, 1.0, 1.0, 1.0), GrowthMode::Compound).is_err());
    }

    #[test]
    fn busy_hour_oracles() {
        let p = TrafficProfile { monthly_gb: 50.0, days_per_month: 30, busy_hour_share_pct: 5.0 };
        assert!(rel(busy_hour_rate(&p).unwrap(), 50.0 * 8000.0 / 30.0 * 0.05 / 3600.0) < 1e-12);
        assert!((busy_hour_rate(&p).unwrap() - 0.185185).abs() < 1e-6);
        let p = TrafficProfile { monthly_gb: 10.0, days_per_month: 30, busy_hour_share_pct: 15.0 };
        assert!((busy_hour_rate(&p).unwrap() - 0.111111).abs() < 1e-6);
        let p = TrafficProfile { monthly_gb: 0.0, ..p };
        assert_eq!(busy_hour_rate(&p).unwrap(), 0.0);
    }

    #[test]
    fn bad_profiles() {
        let p = TrafficProfile { monthly_gb: 1.0, days_per_month: 27, busy_hour_share_pct: 5.0 };
        assert_eq!(busy_hour_rate(&p), Err(DemandError::DaysPerMonth(27)));
        let p = TrafficProfile { monthly_gb: 1.0, days_per_month: 30, busy_hour_share_pct: 0.0 };
        assert!(busy_hour_rate(&p).is_err());
    }

    #[test]
    fn density_cases() {
        assert!(rel(demand_density(500.0, 0.2, 250.0).unwrap(), 0.4) < 1e-12);
        assert_eq!(demand_density(0.0, 0.2, 250.0).unwrap(), 0.0);
        assert_eq!(
            demand_density(1000.0, 0.2, 250.0).unwrap(),
            2.0 * demand_density(500.0, 0.2, 250.0).unwrap()
        );
        assert!(demand_density(1.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn users_monotone(
            p in 0.0f64..1e7, g in 0.0f64..10.0, y in 0u32..20,
            a in 0.0f64..=100.0, ms in 0.0f64..=100.0, au in 0.0f64..=100.0,
            bump in 0.0f64..1.0,
        ) {
            let base = inputs(p, g, y, a, ms, au);
            let u0 = active_users(&base, GrowthMode::Compound).unwrap();
            prop_assert!(u0.served >= u0.active);
            let bumped = [
                UserInputs { population: p * (1.0 + bump), ..base },
                UserInputs { growth_pct: g + bump, ..base },
                UserInputs { adoption_pct: (a + bump).min(100.0), ..base },
                UserInputs { market_share_pct: (ms + bump).min(100.0), ..base },
                UserInputs { active_share_pct: (au + bump).min(100.0), ..base },
            ];
            for b in bumped {
                let u1 = active_users(&b, GrowthMode::Compound).unwrap();
                prop_assert!(u1.active >= u0.active * (1.0 - 1e-12));
            }
        }

        #[test]
        fn rate_linearity(md in 0.0f64..500.0, f in 0.1f64..50.0, nd in 28u32..=30) {
            let p = TrafficProfile { monthly_gb: md, days_per_month: nd, busy_hour_share_pct: f };
            let r = busy_hour_rate(&p).unwrap();
            let r2 = busy_hour_rate(&TrafficProfile { monthly_gb: 2.0 * md, ..p }).unwrap();
            let rf = busy_hour_rate(&TrafficProfile { busy_hour_share_pct: 2.0 * f, ..p }).unwrap();
            prop_assert!((r2 - 2.0 * r).abs() <= 1e-12 * r2.abs().max(1e-300));
            prop_assert!((rf - 2.0 * r).abs() <= 1e-12 * rf.abs().max(1e-300));
            let r_days = busy_hour_rate(&TrafficProfile { days_per_month: 28, ..p }).unwrap();
            prop_assert!((r_days * 28.0 - r * nd as f64).abs() <= 1e-9 * (r * nd as f64).max(1e-300));
        }

        #[test]
        fn density_scaling(u in 0.0f64..1e6, rd in 0.0f64..10.0, area in 0.1f64..1e4) {
            let d = demand_density(u, rd, area).unwrap();
            let d_area = demand_density(u, rd, 2.0 * area).unwrap();
            prop_assert!((d - 2.0 * d_area).abs() <= 1e-12 * d.max(1e-300));
            let d_rate = demand_density(u, 3.0 * rd, area).unwrap();
            prop_assert!((d_rate - 3.0 * d).abs() <= 1e-12 * d_rate.max(1e-300));
        }
    }
}
