pub const CONFIG_KEYS: &str = "\
INPUT DIRECTORY (--data)
  areas.csv       area_id,country_iso3,population,area_km2
  countries.csv   country_iso3,income_group,region,pop_growth_rate_pct_per_year,
                  start_year,end_year,adoption_rate_pct,market_share_pct,
                  active_share_pct,total_sites,coverage_2g_pct,coverage_4g_pct,
                  fiber_backhaul_share_pct (empty = regional default),
                  spectrum_portfolio (freq:bw|freq:bw, MHz),unconnected_users,
                  gdp_usd,monthly_data_target_gb,reliability_pct
  wages.csv       country_iso3,sector (ICT|logistics|construction),
                  hourly_wage_usd (empty = impute),gdp_per_capita_usd
  costbook.toml   see COST BOOK

COST BOOK (costbook.toml, or --costbook)
  ran_usd                      RAN equipment per site
  backhaul_wireless_usd        wireless backhaul per site
  backhaul_fiber_per_m_usd     fiber backhaul per meter of inter-site distance
  civils_usd                   civil works per greenfield site
  power_system_usd             power system per site
  labor_hours_per_component    hours per labor component [16]
  wage_ict_usd_hr              fallback ICT wage
  wage_logistics_usd_hr        fallback logistics wage
  wage_construction_usd_hr     fallback construction wage
  opex_rate_pct_per_year       share of hardware value per year [15]
  fiber_core_split_alpha_pct   share of new-site distance laid as metro/core fiber [10]
  fiber_cost_per_m_usd         metro/core fiber per meter
  policy_per_user_usd          one-off per served user [2]
  skills_per_user_usd          one-off per served user [12]
  satellite_monthly_usd        one subscription per month [200]
  horizon_years                years of opex and satellite service [country end - start]
  [satellite_users_per_subscription]
  LIDC, EME, AE                users sharing a subscription [12, 8, 4]

SCENARIO (run --scenario)
  name                         required
  reliability_pct              overrides every country's reliability
  adoption_rate_pct            overrides every country's adoption rate
  busy_hour_share_pct          share of daily traffic in the busy hour [15]
  days_per_month               [30]
  end_year                     overrides every country's end year
  growth_mode                  compound | literal [compound]
  fiber_distance_mode          density | literal [density]
  [monthly_gb]
  AE, EME, LIDC                GB/month per income group [country value]
  [lookups]
  dir                          read lookup_<freq>_<rel>.csv from here instead of simulating
  cache_dir                    cache for simulated tables
  density_grid                 sites/km2 to simulate [0 + 12 log points, 0.001..10]
  [lookups.simulation]         see SIMULATION

SWEEP (sweep --scenario)
  baseline                     scenario name the deltas are taken against [first]
  [[scenario]]                 two or more SCENARIO tables with distinct names

SIMULATION ([lookups.simulation], or [simulation] in lookup --config)
  iterations                   user draws per grid point [10000]
  rng_seed                     [42]; --seed overrides
  shadow_mu_db, shadow_sigma_db  log-normal shadowing [2, 10]
  cells_per_site               [3]
  se_attenuation               fraction of the Shannon bound [0.75]
  se_max_bps_hz                spectral efficiency cap [8]
  interferer_ring              nearest lattice sites counted as interferers [6]
  ue_noise_figure_db           [7]
  tx_power_dbm                 [40]
  antenna_gain_dbi             [16]
  thermal_noise_dbm_hz         [-174]
  noise_bandwidth_mhz          [10]
  min_distance_km              [0.001]

LOOKUP CONFIG (lookup --config)
  density_grid                 as in [lookups]
  reliability_pct              list of reliabilities [every country's reliability]
  [simulation]                 see SIMULATION

EXIT STATUS
  0 success, 1 invalid input or model failure, 2 I/O failure
";
