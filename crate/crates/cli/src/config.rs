//! Scenario files: TOML with a fixed schema. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;

use qflow::potential::SlitBarrier;
use qflow::trajectory::TwoSlitSpec;
use qflow::{DerivativeScheme, Grid, Potential, UnitSystem};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Output directory; `--out` takes precedence.
    pub output: Option<String>,
    #[serde(default)]
    pub units: UnitsSpec,
    pub grid: Option<GridSpec>,
    pub potential: Option<PotentialSpec>,
    pub initial: InitialSpec,
    pub evolution: Option<EvolutionConfig>,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSpec {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "unit_mass")]
    pub masses: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn unit_mass() -> Vec<f64> {
    vec![1.0]
}

impl Default for UnitsSpec {
    fn default() -> Self {
        UnitsSpec {
            hbar: 1.0,
            masses: unit_mass(),
        }
    }
}

impl UnitsSpec {
    pub fn build(&self) -> qflow::Result<UnitSystem> {
        UnitSystem::new(self.hbar, self.masses.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    Spectral,
    Fd4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub boundary: BoundaryKind,
    pub n: usize,
    /// Ignored for radial grids, which start at `dr`.
    #[serde(default)]
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default)]
    pub scheme: SchemeKind,
}

impl GridSpec {
    pub fn build(&self) -> qflow::Result<Grid> {
        let g = match self.boundary {
            BoundaryKind::Periodic => Grid::periodic(self.n, self.x_min, self.x_max)?,
            BoundaryKind::Dirichlet => Grid::dirichlet(self.n, self.x_min, self.x_max)?,
            BoundaryKind::Radial => Grid::radial(self.n, self.x_max)?,
        };
        match self.scheme {
            SchemeKind::Spectral => Ok(g),
            SchemeKind::Fd4 => g.with_scheme(DerivativeScheme::FiniteDifference4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    Box,
    Harmonic {
        omega: f64,
    },
    Quartic {
        lambda: f64,
    },
    Coulomb {
        e2: f64,
    },
    DeltaWell {
        alpha: f64,
        width: Option<f64>,
    },
    DoubleSlit {
        position: f64,
        thickness: f64,
        height: f64,
        separation: f64,
        slit_width: f64,
    },
}

impl PotentialSpec {
    pub fn build(&self) -> Potential {
        match *self {
            PotentialSpec::Free => Potential::Free,
            PotentialSpec::Box => Potential::Box,
            PotentialSpec::Harmonic { omega } => Potential::Harmonic { omega },
            PotentialSpec::Quartic { lambda } => Potential::Quartic { lambda },
            PotentialSpec::Coulomb { e2 } => Potential::CoulombRadial { e2 },
            PotentialSpec::DeltaWell { alpha, width } => Potential::DeltaWell { alpha, width },
            PotentialSpec::DoubleSlit {
                position,
                thickness,
                height,
                separation,
                slit_width,
            } => Potential::DoubleSlit(SlitBarrier {
                position,
                thickness,
                height,
                separation,
                slit_width,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Gaussian {
        x0: f64,
        #[serde(default)]
        p0: f64,
        sigma: f64,
    },
    /// `n`-th stationary state of the scenario potential.
    Eigenstate { n: usize },
    /// A named oracle case; supplies its own grid and potential.
    Case { name: String },
    /// Transverse two-slit packet; supplies its own grid, potential and evolution.
    TwoSlit {
        separation: Option<f64>,
        slit_width: Option<f64>,
        momentum: Option<f64>,
        screen_distance: Option<f64>,
        half_width: Option<f64>,
        n_points: Option<usize>,
        dt: Option<f64>,
    },
}

impl InitialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialSpec::Gaussian { .. } => "gaussian",
            InitialSpec::Eigenstate { .. } => "eigenstate",
            InitialSpec::Case { .. } => "case",
            InitialSpec::TwoSlit { .. } => "two-slit",
        }
    }

    /// Two-slit parameters over the library defaults.
    pub fn two_slit(&self, n_lines: Option<usize>) -> Option<TwoSlitSpec> {
        let InitialSpec::TwoSlit {
            separation,
            slit_width,
            momentum,
            screen_distance,
            half_width,
            n_points,
            dt,
        } = *self
        else {
            return None;
        };
        let d = TwoSlitSpec::default();
        Some(TwoSlitSpec {
            separation: separation.unwrap_or(d.separation),
            slit_width: slit_width.unwrap_or(d.slit_width),
            momentum: momentum.unwrap_or(d.momentum),
            screen_distance: screen_distance.unwrap_or(d.screen_distance),
            half_width: half_width.unwrap_or(d.half_width),
            n_points: n_points.unwrap_or(d.n_points),
            n_lines: n_lines.unwrap_or(d.n_lines),
            dt: dt.unwrap_or(d.dt),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "one_usize")]
    pub sample_every: usize,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    #[serde(default)]
    pub madelung: bool,
    #[serde(default)]
    pub emtensor: bool,
    #[serde(default)]
    pub weakvalues: bool,
    pub trajectories: Option<TrajectorySpec>,
    #[serde(default)]
    pub phasespace: bool,
    #[serde(default)]
    pub projections: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub seeds: usize,
    #[serde(default = "four")]
    pub substeps: usize,
}

fn four() -> usize {
    4
}

/// Parse or validation failure, anchored to a line of the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_at(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// First line of `src` that opens `[section]` or assigns `key` inside it.
fn find_line(src: &str, section: &str, key: Option<&str>) -> Option<usize> {
    let mut inside = section.is_empty();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            inside = line.trim_matches(|c| c == '[' || c == ']').trim() == section;
            if inside && key.is_none() {
                return Some(i + 1);
            }
            continue;
        }
        if let (true, Some(k)) = (inside, key) {
            let lhs = line.split('=').next().unwrap_or("").trim();
            if lhs == k {
                return Some(i + 1);
            }
        }
    }
    None
}

/// Tagged tables report unknown keys at their header; find the key itself.
fn unknown_key_line(src: &str, from: usize, message: &str) -> Option<usize> {
    let key = message.strip_prefix("unknown field `")?.split('`').next()?;
    for (i, raw) in src.lines().enumerate().skip(from) {
        let line = raw.trim();
        if line.starts_with('[') {
            break;
        }
        if line.split('=').next().unwrap_or("").trim() == key {
            return Some(i + 1);
        }
    }
    None
}

fn err(src: &str, section: &str, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: find_line(src, section, key).or_else(|| find_line(src, section, None)),
        message: message.into(),
    }
}

/// Known tolerance keys and their library defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 13] = [
    ("norm_drift", 1e-8),
    ("energy_drift", 1e-6),
    ("qhj_residual", 1e-5),
    ("liouville_residual", 1e-5),
    ("weak_routes", 1e-8),
    ("weak_identity", 1e-7),
    ("wigner_marginal", 1e-8),
    ("wigner_norm", 1e-8),
    ("projection_liouville", 1e-6),
    ("projection_qhj", 1e-5),
    ("projection_momentum", 1e-7),
    ("endpoint_l1", 0.05),
    ("two_slit_symmetry", 1e-6),
];

impl Scenario {
    /// Parse and validate.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|r| line_at(src, r.start));
            ConfigError {
                line: line.map(|l| unknown_key_line(src, l, e.message()).unwrap_or(l)),
                message: e.message().to_string(),
            }
        })?;
        s.validate(src)?;
        Ok(s)
    }

    fn validate(&self, src: &str) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(err(src, "", Some("name"), "`name` must not be empty"));
        }
        self.units
            .build()
            .map_err(|e| err(src, "units", None, e.to_string()))?;
        for key in self.tolerances.keys() {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == key) {
                let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(k, _)| *k).collect();
                return Err(err(
                    src,
                    "tolerances",
                    Some(key),
                    format!("unknown tolerance `{key}`; known: {}", known.join(", ")),
                ));
            }
        }
        for (key, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(err(
                    src,
                    "tolerances",
                    Some(key),
                    format!("tolerance `{key}` must be positive, got {v}"),
                ));
            }
        }
        let a = &self.analyses;
        if a.trajectories.is_some() && !a.madelung {
            return Err(err(
                src,
                "analyses",
                Some("trajectories"),
                "trajectories require `madelung = true`",
            ));
        }
        if a.emtensor && !a.madelung {
            return Err(err(
                src,
                "analyses",
                Some("emtensor"),
                "emtensor requires `madelung = true`",
            ));
        }
        if a.projections && !(a.phasespace && a.madelung) {
            return Err(err(
                src,
                "analyses",
                Some("projections"),
                "projections require `phasespace = true` and `madelung = true`",
            ));
        }
        if let Some(t) = &a.trajectories {
            if t.seeds == 0 || t.substeps == 0 {
                return Err(err(
                    src,
                    "analyses.trajectories",
                    None,
                    "seeds and substeps must be >= 1",
                ));
            }
        }
        match &self.initial {
            InitialSpec::Case { name } => {
                if !crate::cases::CASES.iter().any(|c| c.name == name) {
                    return Err(err(
                        src,
                        "initial",
                        Some("name"),
                        format!("unknown case `{name}`"),
                    ));
                }
                for (section, present) in [
                    ("grid", self.grid.is_some()),
                    ("potential", self.potential.is_some()),
                ] {
                    if present {
                        return Err(err(
                            src,
                            section,
                            None,
                            format!("[{section}] is supplied by the case; remove it"),
                        ));
                    }
                }
            }
            InitialSpec::TwoSlit { .. } => {
                for (section, present) in [
                    ("grid", self.grid.is_some()),
                    ("potential", self.potential.is_some()),
                    ("evolution", self.evolution.is_some()),
                ] {
                    if present {
                        return Err(err(
                            src,
                            section,
                            None,
                            format!("[{section}] is supplied by the two-slit setup; remove it"),
                        ));
                    }
                }
                if a.trajectories.is_none() {
                    return Err(err(
                        src,
                        "analyses",
                        None,
                        "a two-slit scenario needs [analyses.trajectories]",
                    ));
                }
                if a.emtensor || a.weakvalues || a.phasespace || a.projections {
                    return Err(err(
                        src,
                        "analyses",
                        None,
                        "a two-slit scenario supports only madelung and trajectories",
                    ));
                }
                let spec = self.initial.two_slit(None).expect("two-slit initial state");
                spec.validate()
                    .map_err(|e| err(src, "initial", None, e.to_string()))?;
            }
            InitialSpec::Gaussian { sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(err(src, "initial", Some("sigma"), "sigma must be > 0"));
                }
                self.require_grid_and_potential(src)?;
            }
            InitialSpec::Eigenstate { .. } => self.require_grid_and_potential(src)?,
        }
        if let Some(ev) = &self.evolution {
            if !(ev.dt != 0.0 && ev.dt.is_finite()) || ev.steps == 0 || ev.sample_every == 0 {
                return Err(err(
                    src,
                    "evolution",
                    None,
                    "need dt != 0, steps >= 1 and sample_every >= 1",
                ));
            }
        } else if (a.emtensor || a.projections || a.trajectories.is_some())
            && !matches!(
                self.initial,
                InitialSpec::Case { .. } | InitialSpec::TwoSlit { .. }
            )
        {
            return Err(err(
                src,
                "analyses",
                None,
                "emtensor, trajectories and projections need an [evolution] section",
            ));
        }
        Ok(())
    }

    fn require_grid_and_potential(&self, src: &str) -> Result<(), ConfigError> {
        let Some(g) = &self.grid else {
            return Err(err(
                src,
                "initial",
                None,
                format!(
                    "initial kind `{}` needs a [grid] section",
                    self.initial.kind()
                ),
            ));
        };
        let grid = g
            .build()
            .map_err(|e| err(src, "grid", None, e.to_string()))?;
        let Some(p) = &self.potential else {
            return Err(err(
                src,
                "initial",
                None,
                format!(
                    "initial kind `{}` needs a [potential] section",
                    self.initial.kind()
                ),
            ));
        };
        p.build()
            .validate(&grid)
            .map_err(|e| err(src, "potential", None, e.to_string()))?;
        if self.analyses.phasespace && (grid.boundary() == qflow::Boundary::Radial) {
            return Err(err(
                src,
                "analyses",
                Some("phasespace"),
                "phase space needs a periodic or dirichlet grid",
            ));
        }
        Ok(())
    }

    /// Effective tolerance for `key`.
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .unwrap_or_else(|| default_tolerance(key))
    }
}

pub fn default_tolerance(key: &str) -> f64 {
    DEFAULT_TOLERANCES
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .unwrap_or(f64::NAN)
}
