//! Sites needed per decile, and the terrestrial-vs-satellite decision.

use serde::{Deserialize, Serialize};

use crate::deciles::{Decile, DecileAssets};
use crate::radio::PortfolioCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Terrestrial,
    Satellite,
    NoneNeeded,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Terrestrial => "terrestrial",
            Strategy::Satellite => "satellite",
            Strategy::NoneNeeded => "none_needed",
        }
    }
}

/// Outcome of inverting the capacity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityOutcome {
    /// Minimal sites/km² meeting the demand.
    Met(f64),
    /// Demand exceeds the capacity at the top of the density grid.
    Unmeetable { max_capacity_mbps_km2: f64 },
}

const BISECTION_STEPS: usize = 200;

/// Smallest site density whose interpolated area capacity reaches
/// `demand_mbps_km2`, found by bisection over the monotone curve.
pub fn required_density(demand_mbps_km2: f64, curve: &PortfolioCurve<'_>) -> DensityOutcome {
    if demand_mbps_km2 <= 0.0 {
        return DensityOutcome::Met(0.0);
    }
    let mut hi = curve.max_density();
    let top = curve.capacity(hi).value;
    if !(top >= demand_mbps_km2) {
        return DensityOutcome::Unmeetable {
            max_capacity_mbps_km2: top,
        };
    }
    let mut lo = 0.0;
    let tol = hi * 1e-13;
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if curve.capacity(mid).value >= demand_mbps_km2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    DensityOutcome::Met(hi)
}

/// Rounds a continuous site count up, ignoring bisection-level noise just
/// above an integer.
pub fn sites_for(density: f64, area_km2: f64) -> u64 {
    let x = density * area_km2;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecilePlan {
    pub decile_index: u8,
    /// Sites a terrestrial design would need (0 when unmeetable).
    pub required_total_sites: u64,
    pub existing_sites: u64,
    pub new_builds: u64,
    pub upgrades: u64,
    pub strategy: Strategy,
    pub satellite_users: f64,
    /// Terrestrial capacity cannot reach the demand at any grid density.
    pub unmeetable: bool,
}

impl DecilePlan {
    pub fn new_sites(&self) -> u64 {
        self.new_builds + self.upgrades
    }

    /// Replaces the terrestrial build with satellite service for `users`.
    pub fn into_satellite(self, users: f64) -> DecilePlan {
        DecilePlan {
            new_builds: 0,
            upgrades: 0,
            strategy: Strategy::Satellite,
            satellite_users: users,
            ..self
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// broken one.
    pub fn check(&self, assets: &DecileAssets) -> Result<(), String> {
        if self.upgrades > assets.existing_non4g_sites {
            return Err(format!(
                "decile {}: {} upgrades exceed {} non-4G sites",
                self.decile_index, self.upgrades, assets.existing_non4g_sites
            ));
        }
        match self.strategy {
            Strategy::Terrestrial => {
                let shortfall = self.required_total_sites.saturating_sub(assets.existing_4g_sites);
                if self.new_sites() != shortfall || shortfall == 0 {
                    return Err(format!("decile {}: builds do not match shortfall", self.decile_index));
                }
            }
            Strategy::NoneNeeded | Strategy::Satellite => {
                if self.new_sites() != 0 {
                    return Err(format!(
                        "decile {}: {} strategy with terrestrial builds",
                        self.decile_index,
                        self.strategy.as_str()
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Terrestrial plan for one decile: how many sites are needed and how many
/// of those are upgrades of non-4G towers versus greenfield builds.
///
/// Unmeetable demand yields a satellite plan with no users assigned yet.
pub fn plan_decile(
    decile: &Decile,
    assets: &DecileAssets,
    demand_mbps_km2: f64,
    curve: &PortfolioCurve<'_>,
) -> DecilePlan {
    let existing_sites = assets.total_sites();
    match required_density(demand_mbps_km2, curve) {
        DensityOutcome::Unmeetable { .. } => DecilePlan {
            decile_index: decile.decile_index,
            required_total_sites: 0,
            existing_sites,
            new_builds: 0,
            upgrades: 0,
            strategy: Strategy::Satellite,
            satellite_users: 0.0,
            unmeetable: true,
        },
        DensityOutcome::Met(density) => {
            let required = sites_for(density, decile.area_km2);
            split_shortfall(decile.decile_index, required, assets)
        }
    }
}

/// Upgrade-first split of `required − existing 4G` into upgrades and builds.
pub fn split_shortfall(decile_index: u8, required_total_sites: u64, assets: &DecileAssets) -> DecilePlan {
    let shortfall = required_total_sites.saturating_sub(assets.existing_4g_sites);
    let upgrades = shortfall.min(assets.existing_non4g_sites);
    DecilePlan {
        decile_index,
        required_total_sites,
        existing_sites: assets.total_sites(),
        new_builds: shortfall - upgrades,
        upgrades,
        strategy: if shortfall == 0 {
            Strategy::NoneNeeded
        } else {
            Strategy::Terrestrial
        },
        satellite_users: 0.0,
        unmeetable: false,
    }
}

/// Satellite wins only when strictly cheaper per user; ties stay terrestrial.
pub fn choose_satellite(terrestrial_per_user_usd: f64, satellite_per_user_usd: f64) -> Strategy {
    if terrestrial_per_user_usd > satellite_per_user_usd {
        Strategy::Satellite
    } else {
        Strategy::Terrestrial
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{Band, CapacityLookup, LookupRow, LookupSet};
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn set() -> LookupSet {
        let rows = [(0.0, 0.0), (0.5, 1.0), (1.0, 3.0), (10.0, 12.0)]
            .iter()
            .map(|&(d, v)| LookupRow { site_density_per_km2: d, se_density_bps_hz_km2: v })
            .collect();
        std::iter::once(CapacityLookup::from_raw(800.0, 95.0, rows).unwrap()).collect()
    }

    const BAND: [Band; 1] = [Band { frequency_mhz: 800.0, bandwidth_mhz: 10.0 }];

    fn assets(e4: u64, en: u64) -> DecileAssets {
        DecileAssets { decile_index: 1, existing_4g_sites: e4, existing_non4g_sites: en, fiber_backhaul_sites: 0 }
    }

    fn decile(area: f64) -> Decile {
        Decile {
            country_iso3: "AAA".into(),
            decile_index: 1,
            population: 1000.0,
            area_km2: area,
            member_area_ids: vec![],
        }
    }

    #[test]
    fn zero_demand_zero_density() {
        let s = set();
        let c = PortfolioCurve::new(&BAND, &s, 95.0).unwrap();
        assert_eq!(required_density(0.0, &c), DensityOutcome::Met(0.0));
    }

    #[test]
    fn grid_point_is_recovered() {
        let s = set();
        let c = PortfolioCurve::new(&BAND, &s, 95.0).unwrap();
        // Capacity at density 1.0 is 3 × 10 = 30 Mbps/km².
        let DensityOutcome::Met(d) = required_density(30.0, &c) else { panic!() };
        assert!((d - 1.0).abs() < 1e-9, "{d}");
        // Between grid points: 0.5 + (20 - 10)/(30 - 10) × 0.5 = 0.75.
        let DensityOutcome::Met(d) = required_density(20.0, &c) else { panic!() };
        assert!((d - 0.75).abs() < 1e-9, "{d}");
    }

    #[test]
    fn above_curve_is_unmeetable() {
        let s = set();
        let c = PortfolioCurve::new(&BAND, &s, 95.0).unwrap();
        assert!(matches!(required_density(121.0, &c), DensityOutcome::Unmeetable { .. }));
        let p = plan_decile(&decile(10.0), &assets(0, 0), 121.0, &c);
        assert_eq!(p.strategy, Strategy::Satellite);
        assert!(p.unmeetable);
        assert_eq!(p.new_sites(), 0);
    }

    #[test]
    fn shortfall_cases() {
        let p = split_shortfall(1, 10, &assets(4, 0));
        assert_eq!((p.new_builds, p.upgrades, p.strategy), (6, 0, Strategy::Terrestrial));
        let p = split_shortfall(1, 5, &assets(9, 0));
        assert_eq!((p.new_builds, p.upgrades, p.strategy), (0, 0, Strategy::NoneNeeded));
        let p = split_shortfall(1, 10, &assets(4, 2));
        assert_eq!((p.new_builds, p.upgrades), (4, 2));
    }

    #[test]
    fn plan_rounds_up() {
        let s = set();
        let c = PortfolioCurve::new(&BAND, &s, 95.0).unwrap();
        // 20 Mbps/km² needs 0.75 sites/km²; over 10 km² that is 7.5 → 8 sites.
        let p = plan_decile(&decile(10.0), &assets(2, 1), 20.0, &c);
        assert_eq!(p.required_total_sites, 8);
        assert_eq!((p.upgrades, p.new_builds), (1, 5));
        // Exactly-integral counts are not bumped by bisection noise.
        let p = plan_decile(&decile(7.0), &assets(0, 0), 30.0, &c);
        assert_eq!(p.required_total_sites, 7);
    }

    #[test]
    fn satellite_choice() {
        assert_eq!(choose_satellite(900.0, 1000.0), Strategy::Terrestrial);
        assert_eq!(choose_satellite(1400.0, 1000.0), Strategy::Satellite);
        assert_eq!(choose_satellite(1000.0, 1000.0), Strategy::Terrestrial);
    }

    proptest! {
        #[test]
        fn density_monotone_in_demand(a in 0.0f64..120.0, b in 0.0f64..120.0) {
            let s = set();
            let c = PortfolioCurve::new(&BAND, &s, 95.0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (DensityOutcome::Met(dl), DensityOutcome::Met(dh)) =
                (required_density(lo, &c), required_density(hi, &c)) else { unreachable!() };
            prop_assert!(dl <= dh + 1e-12);
            prop_assert!(c.capacity(dh).value >= hi * (1.0 - 1e-12));
        }

        #[test]
        fn plan_invariants(required in 0u64..500, e4 in 0u64..300, en in 0u64..300, extra in 0u64..50) {
            let a = assets(e4, en);
            let p = split_shortfall(1, required, &a);
            prop_assert!(p.check(&a).is_ok());
            prop_assert_eq!(p.new_sites(), required.saturating_sub(e4));
            let more = split_shortfall(1, required, &assets(e4 + extra, en));
            prop_assert!(more.new_sites() <= p.new_sites());
            let sat = p.clone().into_satellite(10.0);
            prop_assert!(sat.check(&a).is_ok());
        }
    }
}
