//! Spherically symmetric dimer binding potentials V(r).
//!
//! Two forms are supported: an analytic Lennard-Jones (12,6) potential and
//! a tabulated potential read from a two-column text file (r in nm, V in
//! meV) with linear interpolation between grid points.

use crate::error::PotentialError;

#[derive(Debug, Clone, PartialEq)]
pub enum RadialPotential {
    /// 4 eps [(sigma/r)^12 - (sigma/r)^6]; well depth eps [meV], length sigma [nm].
    LennardJones { epsilon: f64, sigma: f64 },
    /// Tabulated (r [nm], V [meV]) pairs, strictly increasing radii.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialPotential {
    pub fn lennard_jones(epsilon: f64, sigma: f64) -> Result<Self, PotentialError> {
        if !(epsilon >= 0.0) || !(sigma > 0.0) {
            return Err(PotentialError::BadLennardJones { epsilon, sigma });
        }
        Ok(Self::LennardJones { epsilon, sigma })
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(PotentialError::TooFewPoints(radii.len().min(values.len())));
        }
        for (i, pair) in radii.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(PotentialError::NonMonotonicRadii { row: i + 1 });
            }
        }
        for (i, &v) in radii.iter().chain(values.iter()).enumerate() {
            if !v.is_finite() {
                return Err(PotentialError::NonFinite { row: i % radii.len() });
            }
        }
        let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tail = values.last().copied().unwrap_or(0.0);
        if max_abs > 0.0 && tail.abs() >= 1e-6 * max_abs {
            return Err(PotentialError::NonVanishingTail {
                r: *radii.last().unwrap(),
                v: tail,
            });
        }
        Ok(Self::Tabulated { radii, values })
    }

    /// Parses the plain-text tabulated form: two whitespace-separated
    /// columns, `#` comments, radii strictly increasing.
    pub fn parse_table(text: &str) -> Result<Self, PotentialError> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let r = cols
                .next()
                .ok_or_else(|| PotentialError::Parse {
                    line: idx + 1,
                    reason: "missing radius column".into(),
                })?
                .parse::<f64>()
                .map_err(|e| PotentialError::Parse {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            let v = cols
                .next()
                .ok_or_else(|| PotentialError::Parse {
                    line: idx + 1,
                    reason: "missing potential column".into(),
                })?
                .parse::<f64>()
                .map_err(|e| PotentialError::Parse {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            if cols.next().is_some() {
                return Err(PotentialError::Parse {
                    line: idx + 1,
                    reason: "expected exactly two columns".into(),
                });
            }
            radii.push(r);
            values.push(v);
        }
        Self::tabulated(radii, values)
    }

    /// V(r) [meV]. Tabulated potentials extrapolate the first segment
    /// below the grid and vanish beyond it.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::LennardJones { epsilon, sigma } => {
                let x6 = (sigma / r).powi(6);
                4.0 * epsilon * (x6 * x6 - x6)
            }
            Self::Tabulated { radii, values } => {
                let n = radii.len();
                if r >= radii[n - 1] {
                    return 0.0;
                }
                let (i0, i1) = if r <= radii[0] {
                    (0, 1)
                } else {
                    let i = radii.partition_point(|&g| g <= r);
                    (i - 1, i)
                };
                let t = (r - radii[i0]) / (radii[i1] - radii[i0]);
                values[i0] + t * (values[i1] - values[i0])
            }
        }
    }

    /// Radius of the potential minimum, when analytically known.
    pub fn minimum_radius(&self) -> Option<f64> {
        match self {
            Self::LennardJones { sigma, .. } => Some(2.0_f64.powf(1.0 / 6.0) * sigma),
            Self::Tabulated { .. } => None,
        }
    }

    /// Well depth estimate: -min V over a scan of the relevant range.
    pub fn well_depth(&self) -> f64 {
        match self {
            Self::LennardJones { epsilon, .. } => *epsilon,
            Self::Tabulated { values, .. } => -values.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0),
        }
    }
}
