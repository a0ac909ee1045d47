//! Cost engine for universal 4G broadband: demand per population-density
//! decile, Monte Carlo capacity lookups, site dimensioning, and pricing
//! rolled up by country, income group and region.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod costs;
pub mod deciles;
pub mod demand;
pub mod dimensioning;
pub mod groups;
pub mod ingest;
pub mod money;
pub mod radio;
pub mod scenario;

pub use costs::{CapexBreakdown, CostBook, DecileCostResult, FiberDistanceMode};
pub use deciles::{Decile, DecileAssets};
pub use demand::{GrowthMode, TrafficProfile};
pub use dimensioning::{DecilePlan, Strategy};
pub use groups::{IncomeGroup, Region};
pub use ingest::{load_inputs, Dataset, InputPaths};
pub use money::Cents;
pub use radio::{Band, CapacityLookup, LookupSet, SimConfig};
pub use scenario::{AggregateReport, CountryResult, Scenario, SweepConfig};

/// Engine version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
