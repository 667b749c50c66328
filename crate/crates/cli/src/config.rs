//! Run configuration: one JSON document per invocation.

use serde::{Deserialize, Serialize};

use fermisurf::ks_lda::{make_functional, XcKind};
use fermisurf::{GridPolicy, KsGridPolicy, NuclearConfiguration, ScfOptions, SearchOptions, TfOptions, XcFunctional};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Nuclear charges.
    #[serde(default)]
    pub charges: Vec<f64>,
    /// Nuclear positions; a diatomic along z at `distance` when absent.
    pub positions: Option<Vec<[f64; 3]>>,
    pub distance: Option<f64>,
    /// Smallest internuclear distances for `bo-scan`.
    pub r_values: Option<Vec<f64>>,
    /// Electron number; neutral when absent.
    pub electrons: Option<f64>,
    #[serde(default)]
    pub theory: TheoryTag,
    #[serde(default)]
    pub xc: XcSpec,
    /// Spin degeneracy.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub radial: RadialSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Scale factors for `gamma`.
    pub l_values: Option<Vec<f64>>,
    /// Ball radii for `screened` and `qij`.
    pub radii: Option<Vec<f64>>,
    /// Sphere samples per nucleus.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub search: SearchSpec,
    /// Nuclei of one fragment for the subadditivity check of `minsearch`.
    pub split: Option<Vec<usize>>,
}

fn default_q() -> f64 {
    2.0
}

fn default_samples() -> usize {
    256
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryTag {
    #[default]
    Tf,
    Ks,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum XcSpec {
    #[default]
    LdaExchange,
    LiebOxford,
    Zero,
    Power { c: f64, beta: f64 },
}

impl XcSpec {
    pub fn kind(&self) -> XcKind {
        match *self {
            XcSpec::LdaExchange => XcKind::LdaExchange,
            XcSpec::LiebOxford => XcKind::LiebOxford,
            XcSpec::Zero => XcKind::Zero,
            XcSpec::Power { c, beta } => XcKind::Power { c, beta },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spacing: Option<f64>,
    /// Box margin; in units of `z_min^{-1/3}` for TF, in bohr for KS.
    pub margin: Option<f64>,
    pub max_points: Option<usize>,
    /// KS spacing where a command runs both theories.
    pub ks_spacing: Option<f64>,
    /// Extra passes at spacing `h/2, h/4, …`.
    #[serde(default)]
    pub refinements: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    /// Radial TF grid in units of the TF length `b z^{-1/3}`.
    pub x_min: f64,
    pub x_max: f64,
    pub dt: f64,
}

impl Default for RadialSpec {
    fn default() -> Self {
        Self {
            x_min: 1e-6,
            x_max: 1e6,
            dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub universal: Option<f64>,
    pub tf: Option<f64>,
    pub density: Option<f64>,
    pub eigen: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub r_init: Option<f64>,
    pub r_max: Option<f64>,
    pub step: Option<f64>,
    pub restarts: Option<usize>,
    pub max_evals: Option<usize>,
    pub seed: Option<u64>,
}

pub const UNIVERSAL_X_MAX: f64 = 1e6;

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn universal_tol(&self) -> f64 {
        self.tolerances.universal.unwrap_or(1e-12)
    }

    pub fn tf_options(&self) -> TfOptions {
        let mut o = TfOptions::default();
        if let Some(t) = self.tolerances.tf {
            o.tol = t;
        }
        o
    }

    pub fn scf_options(&self) -> ScfOptions {
        let mut o = ScfOptions::default();
        if let Some(t) = self.tolerances.density {
            o.density_tol = t;
        }
        if let Some(t) = self.tolerances.eigen {
            o.eigen_tol = t;
        }
        if let Some(m) = self.tolerances.max_iter {
            o.max_iter = m;
        }
        o
    }

    pub fn search_options(&self) -> SearchOptions {
        let d = SearchOptions::default();
        let s = &self.search;
        SearchOptions {
            r_init: s.r_init.unwrap_or(d.r_init),
            r_max: s.r_max.unwrap_or(d.r_max),
            step: s.step.unwrap_or(d.step),
            restarts: s.restarts.unwrap_or(d.restarts),
            max_evals: s.max_evals.unwrap_or(d.max_evals),
            seed: s.seed.unwrap_or(d.seed),
        }
    }

    /// TF grid policies, coarsest first.
    pub fn tf_policies(&self) -> Vec<GridPolicy> {
        let d = GridPolicy::default();
        let base = GridPolicy {
            h: self.grid.spacing.unwrap_or(d.h),
            margin_factor: self.grid.margin.unwrap_or(d.margin_factor),
            max_points: self.grid.max_points.unwrap_or(d.max_points),
        };
        (0..=self.grid.refinements)
            .map(|k| GridPolicy {
                h: base.h / f64::powi(2.0, k as i32),
                ..base
            })
            .collect()
    }

    /// KS grid policies, coarsest first.
    pub fn ks_policies(&self) -> Vec<KsGridPolicy> {
        let d = KsGridPolicy::default();
        let base = KsGridPolicy {
            h: self.grid.spacing.unwrap_or(d.h),
            margin: self.grid.margin.unwrap_or(d.margin),
            max_points: self.grid.max_points.unwrap_or(d.max_points),
        };
        (0..=self.grid.refinements)
            .map(|k| KsGridPolicy {
                h: base.h / f64::powi(2.0, k as i32),
                ..base
            })
            .collect()
    }

    pub fn functional(&self, strict: bool) -> Result<XcFunctional, CliError> {
        make_functional(self.xc.kind(), strict).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn require_charges(&self, min: usize) -> Result<(), CliError> {
        if self.charges.len() < min {
            return Err(CliError::Config(format!("at least {min} charge(s) required")));
        }
        if let Some(bad) = self.charges.iter().find(|&&z| !(z > 0.0 && z.is_finite())) {
            return Err(CliError::Config(format!("nuclear charges must be positive, got {bad}")));
        }
        Ok(())
    }

    /// The configured geometry.
    pub fn configuration(&self) -> Result<NuclearConfiguration, CliError> {
        self.require_charges(1)?;
        let positions = match (&self.positions, self.distance) {
            (Some(p), None) => p.clone(),
            (None, Some(r)) if self.charges.len() == 2 => {
                positive("distance", r)?;
                return NuclearConfiguration::diatomic(self.charges[0], self.charges[1], r)
                    .map_err(|e| CliError::Config(e.to_string()));
            }
            (None, None) if self.charges.len() == 1 => vec![[0.0; 3]],
            (Some(_), Some(_)) => return Err(CliError::Config("give either positions or distance, not both".into())),
            _ => {
                return Err(CliError::Config(
                    "positions are required unless two charges and a distance are given".into(),
                ))
            }
        };
        NuclearConfiguration::new(positions, self.charges.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The electron number, checked against `[0, Z]`.
    pub fn electrons_for(&self, z_total: f64) -> Result<f64, CliError> {
        let n = self.electrons.unwrap_or(z_total);
        if !(0.0..=z_total).contains(&n) {
            return Err(CliError::Config(format!("electron number {n} outside [0, {z_total}]")));
        }
        Ok(n)
    }

    pub fn check_q(&self) -> Result<(), CliError> {
        positive("q", self.q)
    }

    pub fn check_grid(&self) -> Result<(), CliError> {
        if let Some(h) = self.grid.spacing {
            positive("grid.spacing", h)?;
        }
        if let Some(h) = self.grid.ks_spacing {
            positive("grid.ks_spacing", h)?;
        }
        if let Some(m) = self.grid.margin {
            positive("grid.margin", m)?;
        }
        if self.grid.refinements > 4 {
            return Err(CliError::Config("at most 4 refinements are supported".into()));
        }
        Ok(())
    }

    pub fn check_radial(&self) -> Result<(), CliError> {
        let r = &self.radial;
        positive("radial.x_min", r.x_min)?;
        positive("radial.dt", r.dt)?;
        if !(r.x_max > r.x_min) || r.x_max > UNIVERSAL_X_MAX {
            return Err(CliError::Config(format!(
                "radial.x_max must lie in (x_min, {UNIVERSAL_X_MAX:e}]"
            )));
        }
        Ok(())
    }
}

pub fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn increasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    for &x in v {
        positive(name, x)?;
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Config(format!("{name} must be strictly increasing")));
    }
    Ok(())
}
