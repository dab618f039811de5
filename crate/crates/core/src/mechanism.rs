//! Named mechanisms and their modifiers.
//!
//! Codes are the eight engine codes (`PFS` ... `TLQ`) plus `SD`, `NB`, `PS`,
//! `GS`, `BOS-SEQ` and `BOS-SIM`. A `+G` suffix feeds the output to top
//! trading cycles as an endowment; an `R-` prefix averages over uniformly
//! random initial orders. `RSD` is shorthand for `R-SD`.

use std::fmt;
use std::str::FromStr;

use crate::classic::{
    naive_boston_one_sided, probabilistic_serial, serial_dictatorship, top_trading_cycles,
};
use crate::engine::{run_engine_matching, EngineConfig};
use crate::error::{Error, Result};
use crate::model::{AgentOrder, FractionalAssignment, Matching, Profile};
use crate::two_sided::{run_boston_two_sided, run_gale_shapley, BostonMode};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Engine(EngineConfig),
    SerialDictatorship,
    NaiveBoston,
    ProbabilisticSerial,
    GaleShapley,
    Boston(BostonMode),
}

impl Base {
    pub fn code(&self) -> &'static str {
        match self {
            Base::Engine(c) => c.code(),
            Base::SerialDictatorship => "SD",
            Base::NaiveBoston => "NB",
            Base::ProbabilisticSerial => "PS",
            Base::GaleShapley => "GS",
            Base::Boston(BostonMode::Sequential) => "BOS-SEQ",
            Base::Boston(BostonMode::Simultaneous) => "BOS-SIM",
        }
    }

    fn from_code(code: &str) -> Option<Self> {
        if let Some(c) = EngineConfig::from_code(code) {
            return Some(Base::Engine(c));
        }
        Some(match code {
            "SD" => Base::SerialDictatorship,
            "NB" => Base::NaiveBoston,
            "PS" => Base::ProbabilisticSerial,
            "GS" => Base::GaleShapley,
            "BOS-SEQ" => Base::Boston(BostonMode::Sequential),
            "BOS-SIM" => Base::Boston(BostonMode::Simultaneous),
            _ => return None,
        })
    }

    pub fn needs_item_prefs(&self) -> bool {
        matches!(self, Base::GaleShapley | Base::Boston(_))
    }

    /// Whether the output can change with the initial agent order.
    pub fn uses_order(&self) -> bool {
        !matches!(self, Base::ProbabilisticSerial | Base::GaleShapley)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mechanism {
    pub base: Base,
    pub randomized: bool,
    pub ttc: bool,
}

/// What a single deterministic run produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Matching(Matching),
    Fractional(FractionalAssignment),
}

impl Output {
    pub fn to_assignment(&self) -> FractionalAssignment {
        match self {
            Output::Matching(m) => m.to_assignment(),
            Output::Fractional(p) => p.clone(),
        }
    }
}

impl Mechanism {
    pub const fn plain(base: Base) -> Self {
        Self {
            base,
            randomized: false,
            ttc: false,
        }
    }

    pub const fn engine(config: EngineConfig) -> Self {
        Self::plain(Base::Engine(config))
    }

    pub fn with_ttc(self) -> Result<Self> {
        if self.base == Base::ProbabilisticSerial {
            return Err(Error::Config(
                "`+G` needs a discrete output; PS is fractional".into(),
            ));
        }
        Ok(Self { ttc: true, ..self })
    }

    pub fn randomize(self) -> Self {
        Self {
            randomized: true,
            ..self
        }
    }

    /// The same mechanism without the `R-` prefix.
    pub fn deterministic(self) -> Self {
        Self {
            randomized: false,
            ..self
        }
    }

    pub fn parse(code: &str) -> Result<Self> {
        let unknown = || Error::UnknownMechanism(code.to_string());
        let mut rest = code.trim().to_ascii_uppercase();
        let mut randomized = false;
        if rest == "RSD" {
            return Ok(Self::plain(Base::SerialDictatorship).randomize());
        }
        if let Some(r) = rest.strip_prefix("R-") {
            randomized = true;
            rest = r.to_string();
        }
        let mut ttc = false;
        if let Some(r) = rest.strip_suffix("+G") {
            ttc = true;
            rest = r.to_string();
        } else if rest.len() == 4 && rest.ends_with('G') {
            // The compact form without a plus sign, e.g. `TLQG`.
            if EngineConfig::from_code(&rest[..3]).is_some() {
                ttc = true;
                rest.truncate(3);
            }
        }
        let base = Base::from_code(&rest).ok_or_else(unknown)?;
        let mut m = Self {
            base,
            randomized,
            ttc: false,
        };
        if ttc {
            m = m.with_ttc()?;
        }
        Ok(m)
    }

    pub fn code(&self) -> String {
        format!(
            "{}{}{}",
            if self.randomized { "R-" } else { "" },
            self.base.code(),
            if self.ttc { "+G" } else { "" }
        )
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if self.base.needs_item_prefs() && !profile.is_two_sided() {
            return Err(Error::MissingItemPrefs(self.base.code().to_string()));
        }
        Ok(())
    }

    /// One run from a fixed initial order, ignoring the `R-` flag.
    pub fn run(&self, profile: &Profile, order: &AgentOrder) -> Result<Output> {
        if self.base == Base::ProbabilisticSerial {
            return Ok(Output::Fractional(probabilistic_serial(profile)));
        }
        self.run_matching(profile, order).map(Output::Matching)
    }

    /// One discrete run; fails for PS.
    pub fn run_matching(&self, profile: &Profile, order: &AgentOrder) -> Result<Matching> {
        if order.len() != profile.n() {
            return Err(Error::LengthMismatch {
                left: order.len(),
                right: profile.n(),
            });
        }
        let m = match self.base {
            Base::Engine(c) => run_engine_matching(profile, order, c),
            Base::SerialDictatorship => serial_dictatorship(profile, order),
            Base::NaiveBoston => naive_boston_one_sided(profile, order),
            Base::GaleShapley => run_gale_shapley(profile, order)?.matching,
            Base::Boston(mode) => run_boston_two_sided(profile, order, mode)?,
            Base::ProbabilisticSerial => {
                return Err(Error::Config("PS produces a fractional assignment".into()))
            }
        };
        Ok(if self.ttc {
            top_trading_cycles(profile, &m)
        } else {
            m
        })
    }

    pub fn is_discrete(&self) -> bool {
        self.base != Base::ProbabilisticSerial
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}
