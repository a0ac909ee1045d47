//! Population-density deciles and the allocation of existing sites to them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::AreaRecord;

pub const DECILE_COUNT: usize = 10;

/// One tenth of a country's statistical areas, ranked by density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decile {
    pub country_iso3: String,
    /// 1 = densest, 10 = sparsest.
    pub decile_index: u8,
    pub population: f64,
    pub area_km2: f64,
    pub member_area_ids: Vec<String>,
}

impl Decile {
    pub fn density(&self) -> f64 {
        self.population / self.area_km2
    }
}

/// Existing infrastructure attributed to one decile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecileAssets {
    pub decile_index: u8,
    pub existing_4g_sites: u64,
    pub existing_non4g_sites: u64,
    pub fiber_backhaul_sites: u64,
}

impl DecileAssets {
    pub fn total_sites(&self) -> u64 {
        self.existing_4g_sites + self.existing_non4g_sites
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecileError {
    #[error("{country_iso3}: need at least {DECILE_COUNT} areas to form deciles, found {found}")]
    TooFewAreas { country_iso3: String, found: usize },
}

/// Sizes of the ten groups for `n` areas: the first `n % 10` groups get one
/// extra member.
pub fn decile_sizes(n: usize) -> [usize; DECILE_COUNT] {
    let base = n / DECILE_COUNT;
    let extra = n % DECILE_COUNT;
    std::array::from_fn(|i| base + usize::from(i < extra))
}

/// Groups one country's areas into ten contiguous density deciles.
///
/// Areas are ordered by density (descending), ties broken by `area_id`
/// ascending, so the partition is fully deterministic.
pub fn build_deciles(country_iso3: &str, areas: &[&AreaRecord]) -> Result<Vec<Decile>, DecileError> {
    if areas.len() < DECILE_COUNT {
        return Err(DecileError::TooFewAreas {
            country_iso3: country_iso3.to_string(),
            found: areas.len(),
        });
    }
    let mut sorted: Vec<&AreaRecord> = areas.to_vec();
    sorted.sort_by(|a, b| {
        b.density()
            .total_cmp(&a.density())
            .then_with(|| a.area_id.cmp(&b.area_id))
    });

    let mut out = Vec::with_capacity(DECILE_COUNT);
    let mut rest = sorted.as_slice();
    for (i, size) in decile_sizes(areas.len()).into_iter().enumerate() {
        let (members, tail) = rest.split_at(size);
        rest = tail;
        out.push(Decile {
            country_iso3: country_iso3.to_string(),
            decile_index: i as u8 + 1,
            population: members.iter().map(|a| a.population).sum(),
            area_km2: members.iter().map(|a| a.area_km2).sum(),
            member_area_ids: members.iter().map(|a| a.area_id.clone()).collect(),
        });
    }
    Ok(out)
}

/// Covered population per decile when `coverage_pct` of the national
/// population is covered, filling the densest deciles first.
fn covered_population(populations: &[f64], coverage_pct: f64) -> Vec<f64> {
    let national: f64 = populations.iter().sum();
    let mut remaining = national * coverage_pct / 100.0;
    populations
        .iter()
        .map(|&p| {
            let c = p.min(remaining).max(0.0);
            remaining -= c;
            c
        })
        .collect()
}

/// Distributes a country's existing sites over its deciles (densest first).
///
/// Sites go to the covered population (the wider of 2G and 4G coverage) in
/// proportion to each decile's covered population. Within a decile, the part
/// of its covered population that falls inside the 4G footprint gets 4G sites
/// and the rest gets non-4G sites. Deciles beyond the coverage footprint get
/// nothing. Rounding remainders go to the densest decile receiving sites.
pub fn allocate_sites(
    deciles: &[Decile],
    total_sites: u64,
    coverage_4g_pct: f64,
    coverage_2g_pct: f64,
) -> Vec<DecileAssets> {
    let pops: Vec<f64> = deciles.iter().map(|d| d.population).collect();
    allocate_sites_by_population(&pops, total_sites, coverage_4g_pct, coverage_2g_pct)
}

/// [`allocate_sites`] over bare decile populations, ordered densest first.
pub fn allocate_sites_by_population(
    populations: &[f64],
    total_sites: u64,
    coverage_4g_pct: f64,
    coverage_2g_pct: f64,
) -> Vec<DecileAssets> {
    let mut assets: Vec<DecileAssets> = (0..populations.len())
        .map(|i| DecileAssets {
            decile_index: i as u8 + 1,
            ..Default::default()
        })
        .collect();

    let covered = covered_population(populations, coverage_4g_pct.max(coverage_2g_pct));
    let covered_4g = covered_population(populations, coverage_4g_pct);
    let covered_sum: f64 = covered.iter().sum();
    if covered_sum <= 0.0 || total_sites == 0 {
        return assets;
    }

    let mut sites: Vec<u64> = covered
        .iter()
        .map(|&c| (total_sites as f64 * c / covered_sum).floor() as u64)
        .collect();
    let mut assigned: u64 = sites.iter().sum();
    // Floating-point shares can overshoot by a site; take it back from the sparsest.
    while assigned > total_sites {
        if let Some(s) = sites.iter_mut().rev().find(|s| **s > 0) {
            *s -= 1;
            assigned -= 1;
        }
    }
    let remainder = total_sites - assigned;
    if let Some(first) = covered.iter().position(|&c| c > 0.0) {
        sites[first] += remainder;
    }

    for (i, a) in assets.iter_mut().enumerate() {
        if sites[i] == 0 {
            continue;
        }
        let share_4g = if covered[i] > 0.0 {
            (covered_4g[i] / covered[i]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n4 = ((sites[i] as f64) * share_4g).round() as u64;
        a.existing_4g_sites = n4.min(sites[i]);
        a.existing_non4g_sites = sites[i] - a.existing_4g_sites;
    }
    assets
}

/// Marks `round(share × national sites)` sites as fiber-fed, densest decile
/// first.
pub fn allocate_fiber(assets: &[DecileAssets], fiber_backhaul_share_pct: f64) -> Vec<DecileAssets> {
    let national: u64 = assets.iter().map(DecileAssets::total_sites).sum();
    let mut remaining = (national as f64 * fiber_backhaul_share_pct / 100.0).round() as u64;
    assets
        .iter()
        .map(|a| {
            let fiber = remaining.min(a.total_sites());
            remaining -= fiber;
            DecileAssets {
                fiber_backhaul_sites: fiber,
                ..*a
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn area(id: &str, pop: f64, km2: f64) -> AreaRecord {
        AreaRecord {
            area_id: id.into(),
            country_iso3: "AAA".into(),
            population: pop,
            area_km2: km2,
        }
    }

    #[test]
    fn twenty_areas_pair_up() {
        let areas: Vec<AreaRecord> = (1..=20).map(|d| area(&format!("a{d:02}"), d as f64, 1.0)).collect();
        let refs: Vec<&AreaRecord> = areas.iter().collect();
        let deciles = build_deciles("AAA", &refs).unwrap();
        assert_eq!(deciles[0].member_area_ids, vec!["a20", "a19"]);
        assert_eq!(deciles[9].member_area_ids, vec!["a02", "a01"]);
    }

    #[test]
    fn equal_density_breaks_ties_by_id() {
        let areas: Vec<AreaRecord> = ["j", "c", "a", "h", "b", "e", "d", "g", "f", "i"]
            .iter()
            .map(|id| area(id, 5.0, 1.0))
            .collect();
        let refs: Vec<&AreaRecord> = areas.iter().collect();
        let deciles = build_deciles("AAA", &refs).unwrap();
        let order: Vec<&str> = deciles.iter().map(|d| d.member_area_ids[0].as_str()).collect();
        assert_eq!(order, ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
    }

    #[test]
    fn twenty_three_areas_sizes() {
        assert_eq!(decile_sizes(23), [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        let areas: Vec<AreaRecord> = (0..23).map(|i| area(&format!("a{i:02}"), i as f64, 1.0)).collect();
        let refs: Vec<&AreaRecord> = areas.iter().collect();
        let sizes: Vec<usize> = build_deciles("AAA", &refs)
            .unwrap()
            .iter()
            .map(|d| d.member_area_ids.len())
            .collect();
        assert_eq!(sizes, [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn too_few_areas() {
        let areas: Vec<AreaRecord> = (0..9).map(|i| area(&format!("a{i}"), 1.0, 1.0)).collect();
        let refs: Vec<&AreaRecord> = areas.iter().collect();
        let err = build_deciles("ZZZ", &refs).unwrap_err();
        assert!(err.to_string().contains("ZZZ"));
    }

    #[test]
    fn uniform_full_coverage() {
        let a = allocate_sites_by_population(&[100.0; 10], 100, 100.0, 100.0);
        assert!(a.iter().all(|d| d.existing_4g_sites == 10 && d.existing_non4g_sites == 0));
    }

    #[test]
    fn zero_coverage_gives_no_sites() {
        let a = allocate_sites_by_population(&[100.0; 10], 100, 0.0, 0.0);
        assert!(a.iter().all(|d| d.total_sites() == 0));
    }

    #[test]
    fn densest_first_hand_walk() {
        // 4G covers 600 of 1000 people: exactly decile 1.
        let a = allocate_sites_by_population(&[600.0, 400.0], 10, 60.0, 0.0);
        assert_eq!(a[0].existing_4g_sites, 10);
        assert_eq!(a[1].total_sites(), 0);
    }

    #[test]
    fn second_generation_fills_beyond_4g() {
        // 4G covers decile 1, 2G covers both.
        let a = allocate_sites_by_population(&[600.0, 400.0], 10, 60.0, 100.0);
        assert_eq!(a[0].existing_4g_sites, 6);
        assert_eq!(a[0].existing_non4g_sites, 0);
        assert_eq!(a[1].existing_4g_sites, 0);
        assert_eq!(a[1].existing_non4g_sites, 4);
    }

    #[test]
    fn fiber_densest_first() {
        let assets = vec![
            DecileAssets { decile_index: 1, existing_4g_sites: 60, ..Default::default() },
            DecileAssets { decile_index: 2, existing_4g_sites: 40, ..Default::default() },
        ];
        let f = allocate_fiber(&assets, 15.0);
        assert_eq!((f[0].fiber_backhaul_sites, f[1].fiber_backhaul_sites), (15, 0));
        let none = allocate_fiber(&assets, 0.0);
        assert!(none.iter().all(|a| a.fiber_backhaul_sites == 0));
        let all = allocate_fiber(&assets, 100.0);
        assert!(all.iter().all(|a| a.fiber_backhaul_sites == a.total_sites()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn decile_partition_invariants(
            cells in proptest::collection::vec((0.0f64..1e5, 0.01f64..1e3), 10..200),
        ) {
            let areas: Vec<AreaRecord> = cells
                .iter()
                .enumerate()
                .map(|(i, &(p, a))| area(&format!("x{i:04}"), p, a))
                .collect();
            let refs: Vec<&AreaRecord> = areas.iter().collect();
            let deciles = build_deciles("AAA", &refs).unwrap();
            prop_assert_eq!(deciles.len(), 10);

            let mut ids: Vec<&String> = deciles.iter().flat_map(|d| &d.member_area_ids).collect();
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), areas.len());

            let sizes: Vec<usize> = deciles.iter().map(|d| d.member_area_ids.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);

            let by_id: std::collections::HashMap<&str, &AreaRecord> =
                areas.iter().map(|a| (a.area_id.as_str(), a)).collect();
            let mean_density: Vec<f64> = deciles
                .iter()
                .map(|d| {
                    d.member_area_ids.iter().map(|id| by_id[id.as_str()].density()).sum::<f64>()
                        / d.member_area_ids.len() as f64
                })
                .collect();
            for w in mean_density.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn site_allocation_conserves_and_is_deterministic(
            pops in proptest::collection::vec(0.0f64..1e6, 10),
            total in 0u64..100_000,
            cov4 in 0.0f64..=100.0,
            cov2 in 0.0f64..=100.0,
            fiber in 0.0f64..=100.0,
        ) {
            let a = allocate_sites_by_population(&pops, total, cov4, cov2);
            let b = allocate_sites_by_population(&pops, total, cov4, cov2);
            prop_assert_eq!(&a, &b);
            let placed: u64 = a.iter().map(DecileAssets::total_sites).sum();
            let covered = cov4.max(cov2) > 0.0 && pops.iter().sum::<f64>() > 0.0;
            prop_assert_eq!(placed, if covered { total } else { 0 });

            let f = allocate_fiber(&a, fiber);
            let fiber_sum: u64 = f.iter().map(|d| d.fiber_backhaul_sites).sum();
            prop_assert_eq!(fiber_sum, (placed as f64 * fiber / 100.0).round() as u64);
            prop_assert!(f.iter().all(|d| d.fiber_backhaul_sites <= d.total_sites()));
        }
    }
}
