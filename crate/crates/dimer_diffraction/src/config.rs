//! Run configuration: a single TOML file with species, beam, grating,
//! numerics and output blocks.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bound_states::{DimerSpecies, SolverOptions};
use crate::engine::{IntensityMethod, QuadratureSpec};
use crate::error::ConfigError;
use crate::grating::{GratingGeometry, VdwCoupling};
use crate::kinematics::BeamSpec;
use crate::potential::RadialPotential;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesBlock {
    pub name: String,
    pub mass1_amu: f64,
    pub mass2_amu: f64,
    pub identical: bool,
    pub potential: PotentialBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "form", rename_all = "kebab-case")]
pub enum PotentialBlock {
    LennardJones { epsilon_mev: f64, sigma_nm: f64 },
    Table { path: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamBlock {
    pub speed_m_per_s: f64,
    pub velocity_spread: f64,
    pub incidence_deg: f64,
    pub temperature_k: f64,
    #[serde(default = "default_w0")]
    pub w0_deg: f64,
    #[serde(default = "default_dw")]
    pub dw_deg: f64,
    /// Rotational excitation thresholds of the two constituents [meV],
    /// used only for regime diagnostics.
    pub rotational_threshold1_mev: Option<f64>,
    pub rotational_threshold2_mev: Option<f64>,
}

fn default_w0() -> f64 {
    3.0e-3
}

fn default_dw() -> f64 {
    7.0e-4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GratingBlock {
    pub period_nm: f64,
    pub slit_nm: f64,
    pub thickness_nm: f64,
    pub wedge_deg: f64,
    pub c3_constituent1: f64,
    pub c3_constituent2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsBlock {
    pub n_y: usize,
    pub n_r: usize,
    pub n_alpha: usize,
    pub j_max: usize,
    pub n_u: usize,
    /// Intensity evaluation path: "spectral" (default) or
    /// "direct-quadrature".
    pub method: String,
    pub r_max_nm: Option<f64>,
    pub edge_band_nm: f64,
    pub grid_step_nm: f64,
    pub convergence_check: bool,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self {
            n_y: q.n_y,
            n_r: q.n_r,
            n_alpha: q.n_alpha,
            j_max: q.j_max,
            n_u: q.n_u,
            method: "spectral".into(),
            r_max_nm: None,
            edge_band_nm: q.edge_band,
            grid_step_nm: 5e-4,
            convergence_check: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub order_min: i32,
    pub order_max: i32,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub n_points: usize,
    pub population_floor: f64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            order_min: -5,
            order_max: 8,
            theta_min_deg: 10.0,
            theta_max_deg: 20.0,
            n_points: 4000,
            population_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: SpeciesBlock,
    pub beam: BeamBlock,
    pub grating: GratingBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let inv = |msg: String| Err(ConfigError::Invalid(msg));
        let s = &self.species;
        if !(s.mass1_amu > 0.0 && s.mass2_amu > 0.0) {
            return inv("constituent masses must be positive".into());
        }
        if s.identical && (s.mass1_amu - s.mass2_amu).abs() > 1e-9 * s.mass1_amu {
            return inv("identical constituents require equal masses".into());
        }
        if let PotentialBlock::LennardJones {
            epsilon_mev,
            sigma_nm,
        } = s.potential
        {
            if !(epsilon_mev > 0.0 && sigma_nm > 0.0) {
                return inv("Lennard-Jones parameters must be positive".into());
            }
        }
        let b = &self.beam;
        if !(b.speed_m_per_s > 0.0) {
            return inv("beam speed must be positive".into());
        }
        if !(0.0..1.0).contains(&b.velocity_spread) {
            return inv("velocity spread must be in [0, 1)".into());
        }
        if b.incidence_deg.abs() >= 90.0 {
            return inv("incidence angle must satisfy |theta'| < 90 deg".into());
        }
        if !(b.temperature_k > 0.0) {
            return inv("beam temperature must be positive".into());
        }
        if !(b.w0_deg > 0.0) || b.dw_deg < 0.0 {
            return inv("peak width parameters must be positive".into());
        }
        let g = &self.grating;
        if !(g.slit_nm > 0.0 && g.slit_nm < g.period_nm) {
            return inv("require 0 < slit_nm < period_nm".into());
        }
        if !(g.thickness_nm > 0.0) {
            return inv("thickness_nm must be positive".into());
        }
        if !(0.0..90.0).contains(&g.wedge_deg) {
            return inv("wedge_deg must be in [0, 90)".into());
        }
        if g.c3_constituent1 < 0.0 || g.c3_constituent2 < 0.0 {
            return inv("C3 coefficients must be non-negative".into());
        }
        let n = &self.numerics;
        if n.n_y == 0 || n.n_r == 0 || n.n_alpha == 0 || n.j_max == 0 || n.n_u == 0 {
            return inv("quadrature orders must be positive".into());
        }
        if n.method != "spectral" && n.method != "direct-quadrature" {
            return inv(format!(
                "unknown numerics method '{}' (expected 'spectral' or 'direct-quadrature')",
                n.method
            ));
        }
        if !(n.grid_step_nm > 0.0) || n.edge_band_nm < 0.0 {
            return inv("radial grid step must be positive, edge band non-negative".into());
        }
        let o = &self.output;
        if o.order_min > o.order_max {
            return inv("order_min must not exceed order_max".into());
        }
        if !(o.theta_max_deg > o.theta_min_deg) || o.n_points < 2 {
            return inv("need theta_max_deg > theta_min_deg and at least two points".into());
        }
        if o.population_floor < 0.0 {
            return inv("population_floor must be non-negative".into());
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<RadialPotential, ConfigError> {
        match &self.species.potential {
            PotentialBlock::LennardJones {
                epsilon_mev,
                sigma_nm,
            } => Ok(RadialPotential::lennard_jones(*epsilon_mev, *sigma_nm)?),
            PotentialBlock::Table { path } => {
                let full = self.base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|source| ConfigError::Io {
                    path: full.display().to_string(),
                    source,
                })?;
                Ok(RadialPotential::parse_table(&text)?)
            }
        }
    }

    /// Solves the bound-state spectrum for the configured species.
    pub fn solve_species(&self) -> Result<DimerSpecies, crate::error::SolverError> {
        let potential = self
            .potential()
            .map_err(|e| crate::error::SolverError::Potential(match e {
                ConfigError::Potential(p) => p,
                other => crate::error::PotentialError::Parse {
                    line: 0,
                    reason: other.to_string(),
                },
            }))?;
        let options = SolverOptions {
            grid_step: self.numerics.grid_step_nm,
            ..SolverOptions::default()
        };
        let mut species = DimerSpecies::new(
            self.species.mass1_amu,
            self.species.mass2_amu,
            self.species.identical,
        )?;
        // the solver stops by itself once the centrifugal barrier unbinds
        // the level; 12 is far above any weakly bound dimer of interest
        species.solve(&potential, 12, &options)?;
        Ok(species)
    }

    pub fn beam_spec(&self) -> BeamSpec {
        BeamSpec::new(
            self.beam.speed_m_per_s,
            self.beam.velocity_spread,
            self.beam.incidence_deg,
            self.beam.temperature_k,
            self.beam.w0_deg,
            self.beam.dw_deg,
        )
    }

    pub fn grating_geometry(&self) -> Result<GratingGeometry, ConfigError> {
        GratingGeometry::new(
            self.grating.period_nm,
            self.grating.slit_nm,
            self.grating.thickness_nm,
            self.grating.wedge_deg,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn couplings(&self) -> Result<(VdwCoupling, VdwCoupling), ConfigError> {
        let c1 = VdwCoupling::new(self.grating.c3_constituent1)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let c2 = VdwCoupling::new(self.grating.c3_constituent2)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok((c1, c2))
    }

    /// Quadrature spec, optionally scaled by a global refinement factor.
    pub fn quadrature(&self, scale: f64) -> QuadratureSpec {
        let base = QuadratureSpec {
            n_y: self.numerics.n_y,
            n_r: self.numerics.n_r,
            n_alpha: self.numerics.n_alpha,
            j_max: self.numerics.j_max,
            n_u: self.numerics.n_u,
            method: if self.numerics.method == "direct-quadrature" {
                IntensityMethod::DirectQuadrature
            } else {
                IntensityMethod::Spectral
            },
            r_max: self.numerics.r_max_nm,
            edge_band: self.numerics.edge_band_nm,
            convergence_check: self.numerics.convergence_check,
            ..QuadratureSpec::default()
        };
        if (scale - 1.0).abs() < 1e-12 {
            base
        } else {
            base.scaled(scale)
        }
    }

    pub fn orders(&self) -> Vec<i32> {
        (self.output.order_min..=self.output.order_max).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[species]
name = "(o-D2)2"
mass1_amu = 4.028203556
mass2_amu = 4.028203556
identical = true

[species.potential]
form = "lennard-jones"
epsilon_mev = 3.3778
sigma_nm = 0.30348

[beam]
speed_m_per_s = 500.0
velocity_spread = 0.08
incidence_deg = 14.0
temperature_k = 0.4

[grating]
period_nm = 100.0
slit_nm = 60.0
thickness_nm = 120.0
wedge_deg = 5.0
c3_constituent1 = 0.32
c3_constituent2 = 0.32
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.numerics.n_y, 4096);
        assert_eq!(cfg.output.order_min, -5);
        assert!(cfg.grating_geometry().is_ok());
        assert!(cfg.couplings().is_ok());
        let q = cfg.quadrature(1.0);
        assert_eq!(q.n_alpha, 64);
        let q2 = cfg.quadrature(2.0);
        assert_eq!(q2.n_y, 8192);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("temperature_k = 0.4", "temperature_k = 0.4\nbogus = 1");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn missing_block_is_rejected() {
        let text = MINIMAL.replace("[beam]", "[beam_x]");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn semantic_validation_rejects_bad_slit() {
        let text = MINIMAL.replace("slit_nm = 60.0", "slit_nm = 160.0");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn mismatched_identical_masses_rejected() {
        let text = MINIMAL.replace("mass2_amu = 4.028203556", "mass2_amu = 2.0");
        assert!(matches!(
            RunConfig::parse(&text),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn table_potential_resolves_relative_path() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("v.dat"), "0.2 -3.0\n0.5 -0.5\n5.0 0.0\n").unwrap();
        let text = MINIMAL.replace(
            "form = \"lennard-jones\"\nepsilon_mev = 3.3778\nsigma_nm = 0.30348",
            "form = \"table\"\npath = \"v.dat\"",
        );
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, &text).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert!(cfg.potential().is_ok());
    }
}
