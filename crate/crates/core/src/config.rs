//! TOML experiment configuration with one section per module.
//!
//! ```toml
//! seed = 7
//!
//! [walk]
//! tau = 2
//! a = "0"          # exponents are exact rationals, "p/q"
//! b = "1"
//!
//! [walk.coin_x]
//! delta = "-pi/2"  # angles are numbers or multiples of pi
//! theta0 = "pi"
//! theta1 = 0.3
//!
//! [walk.coin_y]
//! theta1 = -0.8
//!
//! [lattice]
//! nx = 32
//! ny = 32
//!
//! [run]
//! t = 1.0
//!
//! [output]
//! format = "json"
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coinwalk::{CoinJet, WalkConfig};
use crate::error::{Error, Result};
use crate::verify::default_eps_list;
use crate::RationalExp;

/// An angle given as a number or as an expression such as `"3pi/2"` or `"-pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Value(f64),
    Expr(String),
}

impl Default for Angle {
    fn default() -> Self {
        Angle::Value(0.0)
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Value(v)
    }
}

impl Angle {
    pub fn value(&self) -> Result<f64> {
        match self {
            Angle::Value(v) => Ok(*v),
            Angle::Expr(s) => parse_angle(s),
        }
    }
}

/// `"<x>"`, `"pi"`, `"-pi/2"`, `"3pi/2"`, `"3*pi/4"`, `"0.5pi"`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse angle `{s}`"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some((coef, rest)) = t.split_once("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let coef = coef.trim_end_matches('*');
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let d = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    Ok(c * PI / d)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoinSection {
    pub delta: Angle,
    pub zeta0: Angle,
    pub zeta1: Angle,
    pub theta0: Angle,
    pub theta1: Angle,
    pub phi0: Angle,
    pub phi1: Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    #[serde(default = "default_tau")]
    pub tau: u32,
    /// Space exponent; `"0"` selects the continuous-time limit.
    #[serde(default = "default_a")]
    pub a: RationalExp,
    /// Angle exponent.
    #[serde(default = "default_b")]
    pub b: RationalExp,
    #[serde(default = "default_spacing")]
    pub delta_spatial: f64,
    #[serde(default)]
    pub coin_x: CoinSection,
    #[serde(default)]
    pub coin_y: CoinSection,
}

fn default_tau() -> u32 {
    2
}

fn default_a() -> RationalExp {
    RationalExp::ZERO
}

fn default_b() -> RationalExp {
    RationalExp::ONE
}

fn default_spacing() -> f64 {
    1.0
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            a: default_a(),
            b: default_b(),
            delta_spatial: default_spacing(),
            coin_x: CoinSection::default(),
            coin_y: CoinSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub nx: usize,
    pub ny: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self { nx: 32, ny: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Final time `T` for convergence runs.
    pub t: f64,
    /// Step parameter for `simulate` and `dispersion`.
    pub eps: f64,
    /// Number of walk steps for `simulate`.
    pub steps: u64,
    /// Strictly decreasing step parameters for `converge`.
    pub eps_list: Vec<f64>,
    /// Momentum grid resolution per axis.
    pub grid: usize,
    /// Physical momenta for the spacetime convergence run.
    pub momenta: Vec<[f64; 2]>,
    /// Root-of-unity index of the time-limit check.
    pub l: i64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t: 1.0,
            eps: 0.01,
            steps: 100,
            eps_list: default_eps_list(),
            grid: 16,
            momenta: vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-0.7, 0.4]],
            l: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidConfig(format!("unknown output format `{s}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub format: OutputFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub walk: WalkSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Continuous-time walk when `a = 0`, plastic walk otherwise.
    pub fn walk_config(&self) -> Result<WalkConfig> {
        let w = &self.walk;
        let jet = |c: &CoinSection| -> Result<CoinJet> {
            let delta = c.delta.value()?;
            let zeta = [c.zeta0.value()?, c.zeta1.value()?];
            let theta = [c.theta0.value()?, c.theta1.value()?];
            let phi = [c.phi0.value()?, c.phi1.value()?];
            if w.a.is_zero() {
                if w.b != RationalExp::ONE {
                    return Err(Error::InvalidConfig(
                        "the continuous-time limit (a = 0) needs b = 1".into(),
                    ));
                }
                CoinJet::time(delta, zeta, theta, phi)
            } else {
                CoinJet::plastic(delta, zeta[0], theta, phi[0], w.b).and_then(|j| {
                    if zeta[1] != 0.0 || phi[1] != 0.0 {
                        Err(Error::InvalidJet(
                            "plastic jets expand only theta (zeta1 = phi1 = 0)".into(),
                        ))
                    } else {
                        Ok(j)
                    }
                })
            }
        };
        let (cx, cy) = (jet(&w.coin_x)?, jet(&w.coin_y)?);
        if w.a.is_zero() {
            WalkConfig {
                delta_spatial: w.delta_spatial,
                ..WalkConfig::time(cx, cy, w.tau)?
            }
            .validated()
        } else {
            if w.tau != 2 {
                return Err(Error::InvalidConfig("the plastic walk uses tau = 2".into()));
            }
            WalkConfig::plastic(cx, cy, w.a)
        }
    }

    /// Momentum list of the `run` section as tuples.
    pub fn momenta(&self) -> Vec<(f64, f64)> {
        self.run.momenta.iter().map(|m| (m[0], m[1])).collect()
    }
}
