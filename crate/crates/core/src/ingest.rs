//! Loading and validation of the tabular inputs, plus wage imputation.
//!
//! Inputs are four files: `areas.csv`, `countries.csv`, `wages.csv` and a
//! TOML cost book. Validation collects every violation it can find rather
//! than stopping at the first one, so `ubi validate` can list them all.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costs::CostBook;
use crate::groups::{IncomeGroup, Region};
use crate::radio::Band;

pub const AREAS_FILE: &str = "areas.csv";
pub const COUNTRIES_FILE: &str = "countries.csv";
pub const WAGES_FILE: &str = "wages.csv";
pub const COSTBOOK_FILE: &str = "costbook.toml";

const AREA_COLUMNS: [&str; 4] = ["area_id", "country_iso3", "population", "area_km2"];
const WAGE_COLUMNS: [&str; 4] = ["country_iso3", "sector", "hourly_wage_usd", "gdp_per_capita_usd"];
pub const COUNTRY_COLUMNS: [&str; 18] = [
    "country_iso3",
    "income_group",
    "region",
    "pop_growth_rate_pct_per_year",
    "start_year",
    "end_year",
    "adoption_rate_pct",
    "market_share_pct",
    "active_share_pct",
    "total_sites",
    "coverage_2g_pct",
    "coverage_4g_pct",
    "fiber_backhaul_share_pct",
    "spectrum_portfolio",
    "unconnected_users",
    "gdp_usd",
    "monthly_data_target_gb",
    "reliability_pct",
];

/// A local statistical area: the unit that is grouped into density deciles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaRecord {
    pub area_id: String,
    pub country_iso3: String,
    pub population: f64,
    pub area_km2: f64,
}

impl AreaRecord {
    pub fn density(&self) -> f64 {
        self.population / self.area_km2
    }
}

/// Per-country model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryParams {
    pub country_iso3: String,
    pub income_group: IncomeGroup,
    pub region: Region,
    pub pop_growth_rate_pct_per_year: f64,
    pub start_year: i32,
    pub end_year: i32,
    pub adoption_rate_pct: f64,
    pub market_share_pct: f64,
    pub active_share_pct: f64,
    pub total_sites: u64,
    pub coverage_2g_pct: f64,
    pub coverage_4g_pct: f64,
    /// `None` when the input left the cell blank; see [`CountryParams::fiber_share_pct`].
    pub fiber_backhaul_share_pct: Option<f64>,
    pub spectrum_portfolio: Vec<Band>,
    pub unconnected_users: f64,
    pub gdp_usd: f64,
    pub monthly_data_target_gb: f64,
    pub reliability_pct: f64,
}

impl CountryParams {
    pub fn years(&self) -> u32 {
        (self.end_year - self.start_year).max(0) as u32
    }

    /// Fiber backhaul share, falling back to the regional default.
    pub fn fiber_share_pct(&self) -> f64 {
        match self.fiber_backhaul_share_pct {
            Some(v) => v,
            None => {
                let v = self.region.default_fiber_share_pct();
                log::info!(
                    "{}: no fiber backhaul share given, using {} default of {v}%",
                    self.country_iso3,
                    self.region
                );
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sector {
    ICT,
    Logistics,
    Construction,
}

impl Sector {
    pub const ALL: [Sector; 3] = [Sector::ICT, Sector::Logistics, Sector::Construction];

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::ICT => "ICT",
            Sector::Logistics => "logistics",
            Sector::Construction => "construction",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ICT" => Ok(Sector::ICT),
            "logistics" => Ok(Sector::Logistics),
            "construction" => Ok(Sector::Construction),
            other => Err(format!(
                "unknown sector `{other}` (expected ICT, logistics or construction)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WageRow {
    pub country_iso3: String,
    pub sector: Sector,
    pub hourly_wage_usd: Option<f64>,
    pub gdp_per_capita_usd: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WageTable {
    pub rows: Vec<WageRow>,
}

impl WageTable {
    pub fn wage(&self, iso3: &str, sector: Sector) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.country_iso3 == iso3 && r.sector == sector)
            .and_then(|r| r.hourly_wage_usd)
    }
}

/// A single input problem, located as precisely as possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub file: String,
    /// 1-based line number in the file (the header is line 1).
    pub row: Option<u64>,
    pub field: Option<String>,
    pub message: String,
}

impl Violation {
    fn new(file: &str, row: Option<u64>, field: Option<&str>, message: impl Into<String>) -> Self {
        Violation {
            file: file.to_string(),
            row,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(row) = self.row {
            write!(f, " row {row}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{} input violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Error, PartialEq)]
pub enum WageError {
    #[error("sector {sector}: need at least 2 observed wages to fit, found {observed}")]
    InsufficientObservations { sector: Sector, observed: usize },
    #[error("sector {sector}: observed GDP per capita values have zero variance")]
    DegenerateFit { sector: Sector },
    #[error("{country_iso3} {sector}: GDP per capita must be > 0 (got {value})")]
    NonPositiveGdp {
        country_iso3: String,
        sector: Sector,
        value: f64,
    },
}

/// Locations of the four input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPaths {
    pub areas: PathBuf,
    pub countries: PathBuf,
    pub wages: PathBuf,
    pub costbook: PathBuf,
}

impl InputPaths {
    /// The conventional file names inside one dataset directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        InputPaths {
            areas: dir.join(AREAS_FILE),
            countries: dir.join(COUNTRIES_FILE),
            wages: dir.join(WAGES_FILE),
            costbook: dir.join(COSTBOOK_FILE),
        }
    }

    pub fn all(&self) -> [&Path; 4] {
        [&self.areas, &self.countries, &self.wages, &self.costbook]
    }
}

/// A fully validated input set. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub areas: Vec<AreaRecord>,
    /// Sorted by ISO3 code.
    pub countries: Vec<CountryParams>,
    pub wages: WageTable,
    pub cost_book: CostBook,
}

impl Dataset {
    /// Validates already-parsed records against every type invariant and
    /// cross-reference rule.
    pub fn new(
        areas: Vec<AreaRecord>,
        mut countries: Vec<CountryParams>,
        wages: WageTable,
        cost_book: CostBook,
    ) -> Result<Self, IngestError> {
        countries.sort_by(|a, b| a.country_iso3.cmp(&b.country_iso3));
        let mut violations = Vec::new();
        for (i, a) in areas.iter().enumerate() {
            check_area(a, Some(i as u64 + 2), &mut violations);
        }
        for (i, c) in countries.iter().enumerate() {
            check_country(c, Some(i as u64 + 2), &mut violations);
        }
        for (i, w) in wages.rows.iter().enumerate() {
            check_wage(w, Some(i as u64 + 2), &mut violations);
        }
        if let Err(msg) = cost_book.validate() {
            violations.push(Violation::new(COSTBOOK_FILE, None, None, msg));
        }
        cross_check(&areas, &countries, &wages, &mut violations);
        if violations.is_empty() {
            Ok(Dataset {
                areas,
                countries,
                wages,
                cost_book,
            })
        } else {
            Err(IngestError::Invalid(violations))
        }
    }

    pub fn country(&self, iso3: &str) -> Option<&CountryParams> {
        self.countries.iter().find(|c| c.country_iso3 == iso3)
    }

    /// Areas grouped by country, keyed in ISO3 order.
    pub fn areas_by_country(&self) -> BTreeMap<&str, Vec<&AreaRecord>> {
        let mut map: BTreeMap<&str, Vec<&AreaRecord>> = BTreeMap::new();
        for a in &self.areas {
            map.entry(a.country_iso3.as_str()).or_default().push(a);
        }
        map
    }

    /// Writes the dataset back out under the conventional file names.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<(), IngestError> {
        let paths = InputPaths::in_dir(dir);
        write_file(&paths.areas, areas_to_csv(&self.areas))?;
        write_file(&paths.countries, countries_to_csv(&self.countries))?;
        write_file(&paths.wages, wages_to_csv(&self.wages))?;
        write_file(&paths.costbook, self.cost_book.to_toml_string())?;
        Ok(())
    }
}

fn write_file(path: &Path, contents: String) -> Result<(), IngestError> {
    fs::write(path, contents).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads, parses and validates every input file.
pub fn load_inputs(paths: &InputPaths) -> Result<Dataset, IngestError> {
    let areas_text = read_file(&paths.areas)?;
    let countries_text = read_file(&paths.countries)?;
    let wages_text = read_file(&paths.wages)?;
    let costbook_text = read_file(&paths.costbook)?;

    let mut violations = Vec::new();
    let areas = parse_areas(&areas_text, &mut violations);
    let countries = parse_countries(&countries_text, &mut violations);
    let wages = parse_wages(&wages_text, &mut violations);
    let cost_book = match CostBook::from_toml_str(&costbook_text) {
        Ok(cb) => Some(cb),
        Err(e) => {
            violations.push(Violation::new(COSTBOOK_FILE, None, None, e.to_string()));
            None
        }
    };
    if !violations.is_empty() {
        return Err(IngestError::Invalid(violations));
    }
    let cost_book = cost_book.expect("cost book parsed when no violations");

    // Parsing already applied the per-row checks with real line numbers;
    // only cross-references remain.
    let mut countries = countries;
    countries.sort_by(|a, b| a.country_iso3.cmp(&b.country_iso3));
    if let Err(msg) = cost_book.validate() {
        violations.push(Violation::new(COSTBOOK_FILE, None, None, msg));
    }
    cross_check(&areas, &countries, &wages, &mut violations);
    if !violations.is_empty() {
        return Err(IngestError::Invalid(violations));
    }
    Ok(Dataset {
        areas,
        countries,
        wages,
        cost_book,
    })
}

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

struct Table<'a> {
    file: &'a str,
    columns: HashMap<String, usize>,
}

impl<'a> Table<'a> {
    fn open(
        file: &'a str,
        text: &str,
        required: &[&str],
        violations: &mut Vec<Violation>,
    ) -> Option<(Self, Vec<(u64, csv::StringRecord)>)> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = match rdr.headers() {
            Ok(h) => h.clone(),
            Err(e) => {
                violations.push(Violation::new(file, Some(1), None, format!("unreadable header: {e}")));
                return None;
            }
        };
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let mut ok = true;
        for col in required {
            if !columns.contains_key(*col) {
                violations.push(Violation::new(file, Some(1), Some(col), "missing column"));
                ok = false;
            }
        }
        for h in headers.iter() {
            if !required.contains(&h) {
                violations.push(Violation::new(file, Some(1), Some(h), "unknown column"));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            match rec {
                Ok(r) => {
                    let line = r.position().map(|p| p.line()).unwrap_or(0);
                    records.push((line, r));
                }
                Err(e) => {
                    let line = e.position().map(|p| p.line());
                    violations.push(Violation::new(file, line, None, format!("malformed row: {e}")));
                }
            }
        }
        Some((Table { file, columns }, records))
    }

    fn raw<'r>(&self, rec: &'r csv::StringRecord, col: &str) -> &'r str {
        rec.get(self.columns[col]).unwrap_or("")
    }

    fn parse<T: FromStr>(
        &self,
        rec: &csv::StringRecord,
        line: u64,
        col: &str,
        violations: &mut Vec<Violation>,
    ) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(rec, col);
        if raw.is_empty() {
            violations.push(Violation::new(self.file, Some(line), Some(col), "empty value"));
            return None;
        }
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                violations.push(Violation::new(
                    self.file,
                    Some(line),
                    Some(col),
                    format!("cannot parse `{raw}`: {e}"),
                ));
                None
            }
        }
    }

    fn parse_opt<T: FromStr>(
        &self,
        rec: &csv::StringRecord,
        line: u64,
        col: &str,
        violations: &mut Vec<Violation>,
    ) -> Option<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if self.raw(rec, col).is_empty() {
            Some(None)
        } else {
            self.parse(rec, line, col, violations).map(Some)
        }
    }
}

fn parse_areas(text: &str, violations: &mut Vec<Violation>) -> Vec<AreaRecord> {
    let Some((t, records)) = Table::open(AREAS_FILE, text, &AREA_COLUMNS, violations) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let line = *line;
        let area_id = t.raw(rec, "area_id").to_string();
        let iso3 = t.raw(rec, "country_iso3").to_string();
        let population = t.parse::<f64>(rec, line, "population", violations);
        let area_km2 = t.parse::<f64>(rec, line, "area_km2", violations);
        if area_id.is_empty() {
            violations.push(Violation::new(AREAS_FILE, Some(line), Some("area_id"), "empty value"));
        }
        if let (Some(population), Some(area_km2)) = (population, area_km2) {
            let a = AreaRecord {
                area_id,
                country_iso3: iso3,
                population,
                area_km2,
            };
            check_area(&a, Some(line), violations);
            out.push(a);
        }
    }
    out
}

fn parse_band_list(raw: &str) -> Result<Vec<Band>, String> {
    raw.split('|')
        .map(|item| {
            let (f, bw) = item
                .split_once(':')
                .ok_or_else(|| format!("band `{item}` is not `freq:bw`"))?;
            let frequency_mhz = f
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("band frequency `{f}`: {e}"))?;
            let bandwidth_mhz = bw
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("band width `{bw}`: {e}"))?;
            Ok(Band {
                frequency_mhz,
                bandwidth_mhz,
            })
        })
        .collect()
}

pub fn format_band_list(bands: &[Band]) -> String {
    bands
        .iter()
        .map(|b| format!("{}:{}", b.frequency_mhz, b.bandwidth_mhz))
        .collect::<Vec<_>>()
        .join("|")
}

fn parse_countries(text: &str, violations: &mut Vec<Violation>) -> Vec<CountryParams> {
    let Some((t, records)) = Table::open(COUNTRIES_FILE, text, &COUNTRY_COLUMNS, violations) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let line = *line;
        let before = violations.len();
        let v = &mut *violations;
        let income_group = t.parse::<IncomeGroup>(rec, line, "income_group", v);
        let region = t.parse::<Region>(rec, line, "region", v);
        let growth = t.parse::<f64>(rec, line, "pop_growth_rate_pct_per_year", v);
        let start_year = t.parse::<i32>(rec, line, "start_year", v);
        let end_year = t.parse::<i32>(rec, line, "end_year", v);
        let adoption = t.parse::<f64>(rec, line, "adoption_rate_pct", v);
        let market_share = t.parse::<f64>(rec, line, "market_share_pct", v);
        let active = t.parse::<f64>(rec, line, "active_share_pct", v);
        let total_sites = t.parse::<u64>(rec, line, "total_sites", v);
        let cov2 = t.parse::<f64>(rec, line, "coverage_2g_pct", v);
        let cov4 = t.parse::<f64>(rec, line, "coverage_4g_pct", v);
        let fiber = t.parse_opt::<f64>(rec, line, "fiber_backhaul_share_pct", v);
        let portfolio = match parse_band_list(t.raw(rec, "spectrum_portfolio")) {
            Ok(p) => Some(p),
            Err(msg) => {
                v.push(Violation::new(COUNTRIES_FILE, Some(line), Some("spectrum_portfolio"), msg));
                None
            }
        };
        let unconnected = t.parse::<f64>(rec, line, "unconnected_users", v);
        let gdp = t.parse::<f64>(rec, line, "gdp_usd", v);
        let monthly = t.parse::<f64>(rec, line, "monthly_data_target_gb", v);
        let reliability = t.parse::<f64>(rec, line, "reliability_pct", v);
        if violations.len() > before {
            continue;
        }
        let c = CountryParams {
            country_iso3: t.raw(rec, "country_iso3").to_string(),
            income_group: income_group.unwrap(),
            region: region.unwrap(),
            pop_growth_rate_pct_per_year: growth.unwrap(),
            start_year: start_year.unwrap(),
            end_year: end_year.unwrap(),
            adoption_rate_pct: adoption.unwrap(),
            market_share_pct: market_share.unwrap(),
            active_share_pct: active.unwrap(),
            total_sites: total_sites.unwrap(),
            coverage_2g_pct: cov2.unwrap(),
            coverage_4g_pct: cov4.unwrap(),
            fiber_backhaul_share_pct: fiber.unwrap(),
            spectrum_portfolio: portfolio.unwrap(),
            unconnected_users: unconnected.unwrap(),
            gdp_usd: gdp.unwrap(),
            monthly_data_target_gb: monthly.unwrap(),
            reliability_pct: reliability.unwrap(),
        };
        check_country(&c, Some(line), violations);
        out.push(c);
    }
    out
}

fn parse_wages(text: &str, violations: &mut Vec<Violation>) -> WageTable {
    let Some((t, records)) = Table::open(WAGES_FILE, text, &WAGE_COLUMNS, violations) else {
        return WageTable::default();
    };
    let mut rows = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let line = *line;
        let sector = t.parse::<Sector>(rec, line, "sector", violations);
        let wage = t.parse_opt::<f64>(rec, line, "hourly_wage_usd", violations);
        let gdp = t.parse::<f64>(rec, line, "gdp_per_capita_usd", violations);
        if let (Some(sector), Some(wage), Some(gdp)) = (sector, wage, gdp) {
            let w = WageRow {
                country_iso3: t.raw(rec, "country_iso3").to_string(),
                sector,
                hourly_wage_usd: wage,
                gdp_per_capita_usd: gdp,
            };
            check_wage(&w, Some(line), violations);
            rows.push(w);
        }
    }
    WageTable { rows }
}

// ---------------------------------------------------------------------------
// Invariant checks
// ---------------------------------------------------------------------------

fn valid_iso3(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

fn check_area(a: &AreaRecord, row: Option<u64>, v: &mut Vec<Violation>) {
    if !valid_iso3(&a.country_iso3) {
        v.push(Violation::new(
            AREAS_FILE,
            row,
            Some("country_iso3"),
            format!("`{}` is not a 3-letter uppercase code", a.country_iso3),
        ));
    }
    if !(a.population >= 0.0) || !a.population.is_finite() {
        v.push(Violation::new(
            AREAS_FILE,
            row,
            Some("population"),
            format!("must be >= 0 (got {})", a.population),
        ));
    }
    if !(a.area_km2 > 0.0) || !a.area_km2.is_finite() {
        v.push(Violation::new(
            AREAS_FILE,
            row,
            Some("area_km2"),
            format!("must be > 0 (got {})", a.area_km2),
        ));
    }
}

fn check_pct(value: f64, field: &str, row: Option<u64>, v: &mut Vec<Violation>) {
    if !(0.0..=100.0).contains(&value) {
        v.push(Violation::new(
            COUNTRIES_FILE,
            row,
            Some(field),
            format!("percentage must be in [0, 100] (got {value})"),
        ));
    }
}

fn check_country(c: &CountryParams, row: Option<u64>, v: &mut Vec<Violation>) {
    if !valid_iso3(&c.country_iso3) {
        v.push(Violation::new(
            COUNTRIES_FILE,
            row,
            Some("country_iso3"),
            format!("`{}` is not a 3-letter uppercase code", c.country_iso3),
        ));
    }
    check_pct(c.pop_growth_rate_pct_per_year, "pop_growth_rate_pct_per_year", row, v);
    check_pct(c.adoption_rate_pct, "adoption_rate_pct", row, v);
    check_pct(c.market_share_pct, "market_share_pct", row, v);
    check_pct(c.active_share_pct, "active_share_pct", row, v);
    check_pct(c.coverage_2g_pct, "coverage_2g_pct", row, v);
    check_pct(c.coverage_4g_pct, "coverage_4g_pct", row, v);
    if let Some(f) = c.fiber_backhaul_share_pct {
        check_pct(f, "fiber_backhaul_share_pct", row, v);
    }
    if !(c.reliability_pct > 0.0 && c.reliability_pct < 100.0) {
        v.push(Violation::new(
            COUNTRIES_FILE,
            row,
            Some("reliability_pct"),
            format!("must be in (0, 100) (got {})", c.reliability_pct),
        ));
    }
    if c.end_year < c.start_year {
        v.push(Violation::new(
            COUNTRIES_FILE,
            row,
            Some("end_year"),
            format!("end_year {} precedes start_year {}", c.end_year, c.start_year),
        ));
    }
    if c.spectrum_portfolio.is_empty() {
        v.push(Violation::new(COUNTRIES_FILE, row, Some("spectrum_portfolio"), "must not be empty"));
    }
    for b in &c.spectrum_portfolio {
        if !(b.frequency_mhz > 0.0) {
            v.push(Violation::new(
                COUNTRIES_FILE,
                row,
                Some("spectrum_portfolio"),
                format!("frequency must be > 0 (got {})", b.frequency_mhz),
            ));
        }
        if !(b.bandwidth_mhz > 0.0) {
            v.push(Violation::new(
                COUNTRIES_FILE,
                row,
                Some("spectrum_portfolio"),
                format!("bandwidth must be > 0 (got {})", b.bandwidth_mhz),
            ));
        }
    }
    for (field, value) in [
        ("unconnected_users", c.unconnected_users),
        ("gdp_usd", c.gdp_usd),
        ("monthly_data_target_gb", c.monthly_data_target_gb),
    ] {
        if !(value >= 0.0) || !value.is_finite() {
            v.push(Violation::new(
                COUNTRIES_FILE,
                row,
                Some(field),
                format!("must be >= 0 (got {value})"),
            ));
        }
    }
}

fn check_wage(w: &WageRow, row: Option<u64>, v: &mut Vec<Violation>) {
    if !valid_iso3(&w.country_iso3) {
        v.push(Violation::new(
            WAGES_FILE,
            row,
            Some("country_iso3"),
            format!("`{}` is not a 3-letter uppercase code", w.country_iso3),
        ));
    }
    if let Some(wage) = w.hourly_wage_usd {
        if !(wage > 0.0) {
            v.push(Violation::new(
                WAGES_FILE,
                row,
                Some("hourly_wage_usd"),
                format!("must be > 0 when present (got {wage})"),
            ));
        }
    }
    if !(w.gdp_per_capita_usd > 0.0) {
        v.push(Violation::new(
            WAGES_FILE,
            row,
            Some("gdp_per_capita_usd"),
            format!("must be > 0 (got {})", w.gdp_per_capita_usd),
        ));
    }
}

fn cross_check(
    areas: &[AreaRecord],
    countries: &[CountryParams],
    wages: &WageTable,
    v: &mut Vec<Violation>,
) {
    let mut seen_countries = BTreeSet::new();
    for c in countries {
        if !seen_countries.insert(c.country_iso3.as_str()) {
            v.push(Violation::new(
                COUNTRIES_FILE,
                None,
                Some("country_iso3"),
                format!("duplicate country {}", c.country_iso3),
            ));
        }
    }

    let mut seen_areas = BTreeSet::new();
    let mut population: BTreeMap<&str, f64> = BTreeMap::new();
    for (i, a) in areas.iter().enumerate() {
        if !seen_areas.insert((a.country_iso3.as_str(), a.area_id.as_str())) {
            v.push(Violation::new(
                AREAS_FILE,
                Some(i as u64 + 2),
                Some("area_id"),
                format!("duplicate area {} in {}", a.area_id, a.country_iso3),
            ));
        }
        if !seen_countries.contains(a.country_iso3.as_str()) {
            v.push(Violation::new(
                AREAS_FILE,
                Some(i as u64 + 2),
                Some("country_iso3"),
                format!("area {} references unknown country {}", a.area_id, a.country_iso3),
            ));
        }
        *population.entry(a.country_iso3.as_str()).or_default() += a.population;
    }

    for c in countries {
        match population.get(c.country_iso3.as_str()) {
            None => v.push(Violation::new(
                COUNTRIES_FILE,
                None,
                Some("country_iso3"),
                format!("country {} has no area rows", c.country_iso3),
            )),
            Some(&pop) if c.unconnected_users > pop => v.push(Violation::new(
                COUNTRIES_FILE,
                None,
                Some("unconnected_users"),
                format!(
                    "{}: unconnected users {} exceed national population {pop}",
                    c.country_iso3, c.unconnected_users
                ),
            )),
            _ => {}
        }
    }

    let mut seen_wages = BTreeSet::new();
    for (i, w) in wages.rows.iter().enumerate() {
        if !seen_wages.insert((w.country_iso3.as_str(), w.sector)) {
            v.push(Violation::new(
                WAGES_FILE,
                Some(i as u64 + 2),
                Some("sector"),
                format!("duplicate wage row for {} {}", w.country_iso3, w.sector),
            ));
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).expect("in-memory write");
    for r in rows {
        wtr.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn areas_to_csv(areas: &[AreaRecord]) -> String {
    csv_string(
        &AREA_COLUMNS,
        areas.iter().map(|a| {
            vec![
                a.area_id.clone(),
                a.country_iso3.clone(),
                a.population.to_string(),
                a.area_km2.to_string(),
            ]
        }),
    )
}

pub fn countries_to_csv(countries: &[CountryParams]) -> String {
    csv_string(
        &COUNTRY_COLUMNS,
        countries.iter().map(|c| {
            vec![
                c.country_iso3.clone(),
                c.income_group.to_string(),
                c.region.to_string(),
                c.pop_growth_rate_pct_per_year.to_string(),
                c.start_year.to_string(),
                c.end_year.to_string(),
                c.adoption_rate_pct.to_string(),
                c.market_share_pct.to_string(),
                c.active_share_pct.to_string(),
                c.total_sites.to_string(),
                c.coverage_2g_pct.to_string(),
                c.coverage_4g_pct.to_string(),
                c.fiber_backhaul_share_pct.map(|v| v.to_string()).unwrap_or_default(),
                format_band_list(&c.spectrum_portfolio),
                c.unconnected_users.to_string(),
                c.gdp_usd.to_string(),
                c.monthly_data_target_gb.to_string(),
                c.reliability_pct.to_string(),
            ]
        }),
    )
}

pub fn wages_to_csv(wages: &WageTable) -> String {
    csv_string(
        &WAGE_COLUMNS,
        wages.rows.iter().map(|w| {
            vec![
                w.country_iso3.clone(),
                w.sector.to_string(),
                w.hourly_wage_usd.map(|v| v.to_string()).unwrap_or_default(),
                w.gdp_per_capita_usd.to_string(),
            ]
        }),
    )
}

// ---------------------------------------------------------------------------
// Wage imputation
// ---------------------------------------------------------------------------

/// Fitted `ln(wage) = intercept + slope * ln(gdp_per_capita)` for one sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WageFit {
    pub sector: Sector,
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub observations: usize,
    pub imputed: usize,
}

impl WageFit {
    pub fn predict(&self, gdp_per_capita: f64) -> f64 {
        (self.intercept + self.slope * gdp_per_capita.ln()).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationReport {
    pub fits: Vec<WageFit>,
}

impl ImputationReport {
    /// True when every sector's log-log fit reaches `min_r_squared`.
    pub fn meets_fit_threshold(&self, min_r_squared: f64) -> bool {
        self.fits.iter().all(|f| f.r_squared >= min_r_squared)
    }

    pub fn fit(&self, sector: Sector) -> Option<&WageFit> {
        self.fits.iter().find(|f| f.sector == sector)
    }
}

/// Fills missing hourly wages from a per-sector OLS fit in log-log space.
///
/// Observed rows are returned untouched. Sectors absent from the table are
/// skipped; every sector that is present needs at least two observed wages at
/// distinct GDP per capita values.
pub fn impute_wages(wages: &WageTable) -> Result<(WageTable, ImputationReport), WageError> {
    for r in &wages.rows {
        if !(r.gdp_per_capita_usd > 0.0) {
            return Err(WageError::NonPositiveGdp {
                country_iso3: r.country_iso3.clone(),
                sector: r.sector,
                value: r.gdp_per_capita_usd,
            });
        }
    }

    let mut out = wages.clone();
    let mut fits = Vec::new();
    for sector in Sector::ALL {
        let rows: Vec<&WageRow> = wages.rows.iter().filter(|r| r.sector == sector).collect();
        if rows.is_empty() {
            continue;
        }
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.hourly_wage_usd.map(|w| (r.gdp_per_capita_usd.ln(), w.ln())))
            .collect();
        if points.len() < 2 {
            return Err(WageError::InsufficientObservations {
                sector,
                observed: points.len(),
            });
        }
        let (intercept, slope, r_squared) =
            ols(&points).ok_or(WageError::DegenerateFit { sector })?;
        let mut fit = WageFit {
            sector,
            intercept,
            slope,
            r_squared,
            observations: points.len(),
            imputed: 0,
        };
        for row in out.rows.iter_mut().filter(|r| r.sector == sector) {
            if row.hourly_wage_usd.is_none() {
                row.hourly_wage_usd = Some(fit.predict(row.gdp_per_capita_usd));
                fit.imputed += 1;
            }
        }
        if r_squared < 0.9 {
            log::warn!("wage fit for sector {sector} has R² = {r_squared:.3} (< 0.9)");
        }
        fits.push(fit);
    }
    Ok((out, ImputationReport { fits }))
}

/// Simple linear regression; returns (intercept, slope, R²), or `None` when x
/// has zero variance.
fn ols(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // All-equal observed wages are fit perfectly by a flat line.
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Some((intercept, slope, r_squared))
}
