//! Run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::epsnum::Sign;
use crate::error::{Error, Result};
use crate::geomkit::Signs;
use crate::special_kahler::Prepotential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Base,
    Qk,
    Curvature,
    Fs,
    Derivatives,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Base, Suite::Qk, Suite::Curvature, Suite::Fs, Suite::Derivatives];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Base => "base",
            Suite::Qk => "qk",
            Suite::Curvature => "curvature",
            Suite::Fs => "fs",
            Suite::Derivatives => "derivatives",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureKind {
    Quadratic,
    Cubic,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    pub name: FixtureKind,
    /// Number of vector multiplets for the quadratic prepotential.
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    1
}

impl FixtureConfig {
    pub fn prepotential(&self, eps1: Sign) -> Option<Prepotential> {
        match self.name {
            FixtureKind::Quadratic => Some(Prepotential::quadratic_standard(self.n, eps1)),
            FixtureKind::Cubic => Some(Prepotential::cubic(eps1)),
            FixtureKind::Flat => None,
        }
    }

    pub fn label(&self) -> String {
        match self.name {
            FixtureKind::Quadratic => format!("quadratic n={}", self.n),
            FixtureKind::Cubic => "cubic n=3".into(),
            FixtureKind::Flat => "flat 4d".into(),
        }
    }
}

/// Rejection box. For c-map fixtures points of `M′` are drawn in
/// `(x⁰, x^μ, u^μ, q̂, s)`; for the flat model in `(x, y, u, v, s)` with
/// `x` for `(x, y)` and `w` for `(u, v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBox {
    #[serde(default = "default_x0")]
    pub x0: [f64; 2],
    #[serde(default = "default_x")]
    pub x: [f64; 2],
    #[serde(default = "default_x")]
    pub u: [f64; 2],
    #[serde(default = "default_fibre")]
    pub qhat: [f64; 2],
    #[serde(default = "default_w")]
    pub w: [f64; 2],
    #[serde(default = "default_fibre")]
    pub s: [f64; 2],
    /// Points closer than this to `f = 0`, `f₁ = 0` or `r² = 0` are rejected.
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Smallest accepted `|Z₁ᴾ` normal to `M′| / |Z₁ᴾ|`, in the level chart.
    #[serde(default = "default_transversality")]
    pub min_transversality: f64,
    /// Smallest accepted `|f₁ / f|`.
    #[serde(default = "default_f1_ratio")]
    pub min_f1_ratio: f64,
    #[serde(default = "default_budget")]
    pub retry_budget: usize,
}

fn default_x0() -> [f64; 2] {
    [0.9, 1.3]
}
fn default_x() -> [f64; 2] {
    [-0.4, 0.4]
}
fn default_w() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_fibre() -> [f64; 2] {
    [-0.5, 0.5]
}
fn default_margin() -> f64 {
    0.1
}
fn default_transversality() -> f64 {
    0.02
}
fn default_f1_ratio() -> f64 {
    0.15
}
fn default_budget() -> usize {
    10_000
}

impl Default for SamplingBox {
    fn default() -> Self {
        SamplingBox {
            x0: default_x0(),
            x: default_x(),
            u: default_x(),
            qhat: default_fibre(),
            w: default_w(),
            s: default_fibre(),
            margin: default_margin(),
            min_transversality: default_transversality(),
            min_f1_ratio: default_f1_ratio(),
            retry_budget: default_budget(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fixture: FixtureConfig,
    /// `(ε₁, ε₂)` pairs.
    #[serde(default = "all_signs")]
    pub signs: Vec<[i8; 2]>,
    /// Deformation parameters; the additive shift of `f` for the flat model.
    #[serde(default = "default_c")]
    pub c: Vec<f64>,
    /// Shear of the level set defining `M′`; 0 is the coordinate level set.
    #[serde(default = "default_tilts")]
    pub tilts: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    /// Points per `(signs, c)` used by the derivative suite.
    #[serde(default = "default_fd_points")]
    pub fd_points: usize,
    /// Highest derivative order compared for `g′` and the closed form.
    #[serde(default = "default_fd_order")]
    pub fd_order: usize,
    /// Overrides by check id or by suite name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub sampling: SamplingBox,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn all_signs() -> Vec<[i8; 2]> {
    vec![[-1, -1], [-1, 1], [1, -1], [1, 1]]
}
fn default_c() -> Vec<f64> {
    vec![0.0, 0.5]
}
fn default_tilts() -> Vec<f64> {
    vec![0.0, 0.3]
}
fn default_samples() -> usize {
    8
}
fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}
fn default_fd_points() -> usize {
    1
}
fn default_fd_order() -> usize {
    2
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fixture: FixtureConfig {
                name: FixtureKind::Quadratic,
                n: 1,
            },
            signs: all_signs(),
            c: default_c(),
            tilts: default_tilts(),
            samples: default_samples(),
            seed: 0,
            suites: all_suites(),
            fd_points: default_fd_points(),
            fd_order: default_fd_order(),
            tolerances: BTreeMap::new(),
            sampling: SamplingBox::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn sign_cases(&self) -> Result<Vec<Signs>> {
        self.signs
            .iter()
            .map(|[a, b]| Ok(Signs::new(Sign::new(*a)?, Sign::new(*b)?)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.signs.is_empty() || self.c.is_empty() || self.tilts.is_empty() {
            return cfg("signs, c and tilts must be nonempty".into());
        }
        self.sign_cases()?;
        if self.samples == 0 || self.samples > 100 {
            return cfg(format!("samples must be in 1..=100, got {}", self.samples));
        }
        if self.suites.is_empty() {
            return cfg("no suite selected".into());
        }
        if !(1..=2).contains(&self.fd_order) {
            return cfg("fd_order must be 1 or 2".into());
        }
        match self.fixture.name {
            FixtureKind::Quadratic if self.fixture.n > 3 => {
                return cfg("quadratic fixtures support n <= 3".into())
            }
            _ => {}
        }
        let b = &self.sampling;
        for (name, r) in [("x0", b.x0), ("x", b.x), ("u", b.u), ("qhat", b.qhat), ("w", b.w), ("s", b.s)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return cfg(format!("sampling.{name} must be an ordered finite range"));
            }
        }
        if self.fixture.name != FixtureKind::Flat && b.x0[0] <= 0.0 {
            return cfg("sampling.x0 must lie in Re X0 > 0".into());
        }
        if !(0.0..1.0).contains(&b.min_transversality)
            || !(0.0..1.0).contains(&b.min_f1_ratio)
            || !(b.margin >= 0.0)
        {
            return cfg("sampling.margin, min_transversality or min_f1_ratio out of range".into());
        }
        if b.retry_budget == 0 {
            return cfg("sampling.retry_budget must be positive".into());
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return cfg(format!("tolerance '{k}' must be positive"));
            }
        }
        if self.c.iter().chain(&self.tilts).any(|v| !v.is_finite()) {
            return cfg("c and tilts must be finite".into());
        }
        Ok(())
    }

    /// Tolerance for a check: exact id, then suite prefix, then default.
    pub fn tolerance(&self, id: &str, default: f64) -> f64 {
        if let Some(v) = self.tolerances.get(id) {
            return *v;
        }
        let prefix = id.split('.').next().unwrap_or(id);
        self.tolerances.get(prefix).copied().unwrap_or(default)
    }

    pub fn runs(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::from_toml("[fixture]\nname = \"quadratic\"\n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn tolerance_lookup_prefers_ids() {
        let c = RunConfig::from_toml(
            "[fixture]\nname = \"flat\"\n[tolerances]\ncurvature = 1e-20\n\"curvature.nu\" = 1e-3\n",
        )
        .unwrap();
        assert_eq!(c.tolerance("curvature.nu", 1.0), 1e-3);
        assert_eq!(c.tolerance("curvature.weyl_trace", 1.0), 1e-20);
        assert_eq!(c.tolerance("qk.algebra", 1.0), 1.0);
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        for text in [
            "[fixture]\nname = \"quartic\"\n",
            "[fixture]\nname = \"flat\"\nsigns = [[2, 1]]\n",
            "[fixture]\nname = \"flat\"\nsamples = 0\n",
            "[fixture]\nname = \"flat\"\nsuites = [\"nope\"]\n",
            "[fixture]\nname = \"cubic\"\n[sampling]\nx0 = [-1.0, 1.0]\n",
            "[fixture]\nname = \"flat\"\n[tolerances]\nqk = -1.0\n",
        ] {
            let e = RunConfig::from_toml(text).unwrap_err();
            assert!(matches!(e, Error::Config(_)), "{text}: {e}");
        }
    }
}
