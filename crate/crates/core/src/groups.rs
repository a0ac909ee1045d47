//! Country classification used for targets, satellite pricing and reporting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// IMF World Economic Outlook income group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IncomeGroup {
    /// Advanced economies.
    AE,
    /// Emerging market economies.
    EME,
    /// Low-income developing countries.
    LIDC,
}

impl IncomeGroup {
    pub const ALL: [IncomeGroup; 3] = [IncomeGroup::AE, IncomeGroup::EME, IncomeGroup::LIDC];

    pub fn as_str(self) -> &'static str {
        match self {
            IncomeGroup::AE => "AE",
            IncomeGroup::EME => "EME",
            IncomeGroup::LIDC => "LIDC",
        }
    }
}

impl fmt::Display for IncomeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IncomeGroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "AE" => Ok(IncomeGroup::AE),
            "EME" => Ok(IncomeGroup::EME),
            "LIDC" => Ok(IncomeGroup::LIDC),
            other => Err(format!("unknown income group `{other}` (expected AE, EME or LIDC)")),
        }
    }
}

/// Reporting region. Advanced economies form their own pseudo-region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    AdvancedEconomies,
    /// Caucasus and Central Asia.
    CCA,
    /// Emerging and Developing Asia.
    EDA,
    /// Emerging and Developing Europe.
    EDE,
    /// Latin America and the Caribbean.
    LAC,
    /// Middle East, North Africa, Afghanistan and Pakistan.
    MENAP,
    /// Sub-Saharan Africa.
    SSA,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::AdvancedEconomies,
        Region::CCA,
        Region::EDA,
        Region::EDE,
        Region::LAC,
        Region::MENAP,
        Region::SSA,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::AdvancedEconomies => "AE-region",
            Region::CCA => "CCA",
            Region::EDA => "EDA",
            Region::EDE => "EDE",
            Region::LAC => "LAC",
            Region::MENAP => "MENAP",
            Region::SSA => "SSA",
        }
    }

    /// Share of sites with fiber backhaul used when a country row leaves it
    /// blank. Taken from GSMA 2025 regional estimates, mapped onto the
    /// reporting regions.
    pub fn default_fiber_share_pct(self) -> f64 {
        match self {
            Region::AdvancedEconomies => 33.0,
            Region::CCA => 20.0,
            Region::EDA => 17.0,
            Region::EDE => 33.0,
            Region::LAC => 21.0,
            Region::MENAP => 20.0,
            Region::SSA => 15.0,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "AE-region" | "AE" => Ok(Region::AdvancedEconomies),
            "CCA" => Ok(Region::CCA),
            "EDA" => Ok(Region::EDA),
            "EDE" => Ok(Region::EDE),
            "LAC" => Ok(Region::LAC),
            "MENAP" => Ok(Region::MENAP),
            "SSA" => Ok(Region::SSA),
            other => Err(format!(
                "unknown region `{other}` (expected one of AE-region, CCA, EDA, EDE, LAC, MENAP, SSA)"
            )),
        }
    }
}
