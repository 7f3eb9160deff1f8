//! Kernel configuration files.
//!
//! A kernel is described by a small TOML table:
//!
//! ```toml
//! family = "multi_jump_exp"   # see Family::name for the list
//! sigma2 = 1.0                # optional, defaults to 1
//! r = 0.05
//! jumps = [[1, 0.8], [30, 0.7], [73, 0.6], [88, 0.5]]
//! ```
//!
//! | family                  | required      | optional |
//! |-------------------------|---------------|----------|
//! | `ou`                    | `r`           |          |
//! | `nugget_ou`             | `r`, `c`      |          |
//! | `multi_jump_exp`        | `r`, `jumps`  |          |
//! | `power_exp`             | `r`, `p`      | `c` (1)  |
//! | `step`                  | `c`, `range`  |          |
//! | `nather`                | `range`       |          |
//! | `truncated_ou`          | `r`, `cutoff` |          |
//! | `white_noise`           |               |          |
//! | `variogram_linear`      | `r`           | `tau2` (0) |
//! | `variogram_spherical`   | `r`           | `tau2` (0) |
//! | `variogram_exponential` | `r`           | `tau2` (0) |
//!
//! Fields a family does not use are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use semicov_core::{Error, Family, Jump, Kernel, Shape, VariogramModel};

use crate::error::{CliError, CliResult};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// `[lag, height]` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<[f64; 2]>,
}

impl KernelConfig {
    fn blank(family: Family, sigma2: f64) -> Self {
        KernelConfig {
            family: family.name().to_string(),
            sigma2,
            r: None,
            c: None,
            p: None,
            tau2: None,
            range: None,
            cutoff: None,
            jumps: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_kernel(&self) -> semicov_core::Result<Kernel> {
        let family = Family::from_name(&self.family)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown kernel family '{}'", self.family)))?;
        let used: &[&str] = match family {
            Family::Ou => &["r"],
            Family::NuggetOu => &["r", "c"],
            Family::MultiJumpExp => &["r", "jumps"],
            Family::PowerExp => &["r", "c", "p"],
            Family::Step => &["c", "range"],
            Family::Nather => &["range"],
            Family::TruncatedOu => &["r", "cutoff"],
            Family::WhiteNoise => &[],
            Family::VariogramLinear | Family::VariogramSpherical | Family::VariogramExponential => &["r", "tau2"],
        };
        let present = [
            ("r", self.r.is_some()),
            ("c", self.c.is_some()),
            ("p", self.p.is_some()),
            ("tau2", self.tau2.is_some()),
            ("range", self.range.is_some()),
            ("cutoff", self.cutoff.is_some()),
            ("jumps", !self.jumps.is_empty()),
        ];
        if let Some((name, _)) = present.iter().find(|(name, set)| *set && !used.contains(name)) {
            return Err(Error::InvalidParameter(format!(
                "field '{name}' does not apply to family {family}"
            )));
        }
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidParameter(format!("family {family} needs field '{name}'")))
        };
        let s2 = self.sigma2;
        match family {
            Family::Ou => Kernel::ou(s2, need("r", self.r)?),
            Family::NuggetOu => Kernel::nugget_ou(s2, need("r", self.r)?, need("c", self.c)?),
            Family::MultiJumpExp => {
                if self.jumps.is_empty() {
                    return Err(Error::InvalidParameter(format!("family {family} needs field 'jumps'")));
                }
                let jumps = self.jumps.iter().map(|[lag, h]| Jump::new(*lag, *h)).collect();
                Kernel::multi_jump(s2, need("r", self.r)?, jumps)
            }
            Family::PowerExp => Kernel::power_exp(s2, need("r", self.r)?, self.c.unwrap_or(1.0), need("p", self.p)?),
            Family::Step => Kernel::step(s2, need("c", self.c)?, need("range", self.range)?),
            Family::Nather => Kernel::nather(s2, need("range", self.range)?),
            Family::TruncatedOu => Kernel::truncated_ou(s2, need("r", self.r)?, need("cutoff", self.cutoff)?),
            Family::WhiteNoise => Kernel::white_noise(s2),
            Family::VariogramLinear => {
                Kernel::variogram(VariogramModel::Linear, s2, self.tau2.unwrap_or(0.0), need("r", self.r)?)
            }
            Family::VariogramSpherical => {
                Kernel::variogram(VariogramModel::Spherical, s2, self.tau2.unwrap_or(0.0), need("r", self.r)?)
            }
            Family::VariogramExponential => {
                Kernel::variogram(VariogramModel::Exponential, s2, self.tau2.unwrap_or(0.0), need("r", self.r)?)
            }
        }
    }

    /// The config that rebuilds `kernel`.
    pub fn from_kernel(kernel: &Kernel) -> Self {
        let mut cfg = KernelConfig::blank(kernel.family(), kernel.sigma2());
        match kernel.shape() {
            Shape::Ou { r } => cfg.r = Some(*r),
            Shape::NuggetOu { r, c } => {
                cfg.r = Some(*r);
                cfg.c = Some(*c);
            }
            Shape::MultiJumpExp { r, jumps } => {
                cfg.r = Some(*r);
                cfg.jumps = jumps.iter().map(|j| [j.lag, j.height]).collect();
            }
            Shape::PowerExp { r, c, p } => {
                cfg.r = Some(*r);
                cfg.c = Some(*c);
                cfg.p = Some(*p);
            }
            Shape::Step { c, range } => {
                cfg.c = Some(*c);
                cfg.range = Some(*range);
            }
            Shape::Nather { range } => cfg.range = Some(*range),
            Shape::TruncatedOu { r, cutoff } => {
                cfg.r = Some(*r);
                cfg.cutoff = Some(*cutoff);
            }
            Shape::WhiteNoise => {}
            Shape::Variogram { tau2, r, .. } => {
                cfg.r = Some(*r);
                cfg.tau2 = Some(*tau2);
            }
        }
        cfg
    }
}

/// Reads and validates a kernel file. Syntax problems are config errors;
/// parameter problems surface as the kernel's own domain error.
pub fn load_kernel(path: &Path) -> CliResult<(KernelConfig, Kernel)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let cfg = KernelConfig::parse(&text).map_err(|message| CliError::Config {
        path: path.to_path_buf(),
        message,
    })?;
    let kernel = cfg.to_kernel()?;
    Ok((cfg, kernel))
}
