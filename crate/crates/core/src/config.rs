//! JSON run configuration shared by the `fom` and `rom` subcommands.
//!
//! ```json
//! {
//!   "domain": { "x0": 0.0, "x1": 1.0 },
//!   "n_elems": 1000,
//!   "degree": 2,
//!   "nu": 1e-4,
//!   "dt": 1e-4,
//!   "t_end": 1.0,
//!   "ic": { "kind": "step" },
//!   "snapshot_count": 501,
//!   "seed": 0
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretization::Mesh1D;
use crate::error::{Error, Result};
use crate::fom::{steps_for, FomConfig, InitialCondition};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x0: f64,
    pub x1: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self { x0: 0.0, x1: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum IcSpec {
    Step {
        #[serde(default = "half")]
        location: f64,
        #[serde(default = "one")]
        left: f64,
        #[serde(default)]
        right: f64,
    },
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "center")]
        center: f64,
        #[serde(default = "sharpness")]
        sharpness: f64,
    },
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn center() -> f64 {
    0.3
}
fn sharpness() -> f64 {
    200.0
}

impl IcSpec {
    pub fn to_initial_condition(&self) -> InitialCondition {
        match *self {
            IcSpec::Step { location, left, right } => InitialCondition::Step { location, left, right },
            IcSpec::Gaussian {
                amplitude,
                center,
                sharpness,
            } => InitialCondition::Gaussian {
                amplitude,
                center,
                sharpness,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub domain: Domain,
    pub n_elems: usize,
    pub degree: usize,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub ic: IcSpec,
    pub snapshot_count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            // serde reports the offending key inside the message
            Error::config(json_field(&e.to_string()), e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        Mesh1D::new(self.domain.x0, self.domain.x1, self.n_elems)
            .map_err(|e| Error::config("n_elems", e.to_string()))
    }

    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_end, self.dt)
    }

    /// Steps between stored snapshots.
    pub fn stride(&self) -> Result<usize> {
        let steps = self.steps()?;
        if self.snapshot_count < 2 {
            return Err(Error::config("snapshot_count", "need at least 2 snapshots"));
        }
        let gaps = self.snapshot_count - 1;
        if steps % gaps != 0 {
            return Err(Error::config(
                "snapshot_count",
                format!("snapshot_count - 1 = {gaps} does not divide the {steps} time steps"),
            ));
        }
        Ok(steps / gaps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.domain.x1 > self.domain.x0) {
            return Err(Error::config("domain", "x1 must exceed x0"));
        }
        if self.n_elems < 2 {
            return Err(Error::config("n_elems", format!("need at least 2, got {}", self.n_elems)));
        }
        if self.degree < 1 {
            return Err(Error::config("degree", "need k >= 1"));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::config("nu", format!("must be finite and >= 0, got {}", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if let IcSpec::Gaussian { sharpness, .. } = self.ic {
            if !(sharpness > 0.0) {
                return Err(Error::config("ic.sharpness", "must be positive"));
            }
        }
        self.stride().map(|_| ())
    }

    pub fn fom_config(&self) -> Result<FomConfig> {
        self.validate()?;
        Ok(FomConfig {
            mesh: self.mesh()?,
            degree: self.degree,
            nu: self.nu,
            dt: self.dt,
            t_end: self.t_end,
            ic: self.ic.to_initial_condition(),
            snapshot_stride: self.stride()?,
            convection: true,
        })
    }

    /// Step-data benchmark on `n_elems` elements: `k = 2`, `ν = 1e-4`,
    /// `Δt = 0.1 h`, 501 snapshots over `[0, 1]`.
    pub fn step_case(n_elems: usize) -> Self {
        Self {
            domain: Domain::default(),
            n_elems,
            degree: 2,
            nu: 1e-4,
            dt: 0.1 / n_elems as f64,
            t_end: 1.0,
            ic: IcSpec::Step {
                location: 0.5,
                left: 1.0,
                right: 0.0,
            },
            snapshot_count: 501,
            seed: 0,
        }
    }
}

/// Best-effort extraction of the key named in a serde error message.
fn json_field(msg: &str) -> String {
    if msg.contains("unknown variant") {
        return "ic.kind".to_string();
    }
    for pat in ["missing field `", "unknown field `"] {
        if let Some(i) = msg.find(pat) {
            let rest = &msg[i + pat.len()..];
            if let Some(j) = rest.find('`') {
                return rest[..j].to_string();
            }
        }
    }
    "config".to_string()
}
