//! Conservation laws, diffraction peak angles and beam-regime
//! diagnostics.

use crate::bound_states::DimerSpecies;
use crate::error::KinematicsError;
use crate::grating::GratingGeometry;
use crate::units::{mass_internal, HBAR, KB, NM_PER_PS_PER_M_PER_S};

/// Dimer beam parameters: mean speed v' [nm/ps], relative velocity
/// spread, incidence angle [rad], translational temperature [K] and the
/// empirical Gaussian width parameters [deg].
#[derive(Debug, Clone, Copy)]
pub struct BeamSpec {
    pub v_mean: f64,
    pub velocity_spread: f64,
    pub incidence: f64,
    pub temperature: f64,
    pub w0_deg: f64,
    pub dw_deg: f64,
}

impl BeamSpec {
    pub fn new(
        v_mean_m_per_s: f64,
        velocity_spread: f64,
        incidence_deg: f64,
        temperature: f64,
        w0_deg: f64,
        dw_deg: f64,
    ) -> Self {
        assert!(v_mean_m_per_s > 0.0);
        assert!((0.0..1.0).contains(&velocity_spread));
        assert!(incidence_deg.abs() < 90.0);
        Self {
            v_mean: v_mean_m_per_s * NM_PER_PS_PER_M_PER_S,
            velocity_spread,
            incidence: incidence_deg.to_radians(),
            temperature,
            w0_deg,
            dw_deg,
        }
    }

    /// Center of mass momentum P' [meV ps/nm] for a given total mass [amu].
    pub fn momentum(&self, total_mass_amu: f64) -> f64 {
        mass_internal(total_mass_amu) * self.v_mean
    }
}

/// Center of mass momentum transfer along the grating periodicity,
/// Delta P_y = n 2 pi hbar / d [meV ps/nm].
pub fn momentum_transfer(n: i32, period: f64) -> f64 {
    n as f64 * 2.0 * std::f64::consts::PI * HBAR / period
}

/// Angle [rad] of the n-th order principal diffraction maximum for a
/// transition with energy gain `delta_e` [meV]:
/// sin theta_n = (1 - dE/E_kin)^(-1/2) [sin theta' + n 2 pi hbar/(P' d)].
pub fn diffraction_angle(
    n: i32,
    incidence: f64,
    momentum: f64,
    total_mass_amu: f64,
    delta_e: f64,
    period: f64,
) -> Result<f64, KinematicsError> {
    let kinetic = momentum * momentum / (2.0 * mass_internal(total_mass_amu));
    if delta_e >= kinetic {
        return Err(KinematicsError::ClosedChannel {
            delta_e,
            kinetic,
        });
    }
    let factor = (1.0 - delta_e / kinetic).powf(-0.5);
    let s = factor * (incidence.sin() + n as f64 * 2.0 * std::f64::consts::PI * HBAR / (momentum * period));
    if s.abs() > 1.0 {
        return Err(KinematicsError::EvanescentOrder { n, sin_theta: s });
    }
    Ok(s.asin())
}

/// One diagnostic line of the regime report.
#[derive(Debug, Clone)]
pub struct RegimeCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub warn: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn has_warnings(&self) -> bool {
        self.checks.iter().any(|c| c.warn)
    }
}

/// Validates the high-energy / diffraction-condition assumptions:
/// |E_0| << kinetic energy, slit and bar widths >> de Broglie wavelength,
/// and constituent kinetic energies below their internal rotational
/// thresholds (when provided, [meV]).
pub fn validate_regime(
    beam: &BeamSpec,
    species: &DimerSpecies,
    grating: &GratingGeometry,
    rotational_thresholds: (Option<f64>, Option<f64>),
) -> RegimeReport {
    let mut report = RegimeReport::default();
    let total_mass = species.total_mass();
    let momentum = beam.momentum(total_mass);
    let kinetic = momentum * momentum / (2.0 * mass_internal(total_mass));

    if let Some(ground) = species.bound_states.first() {
        let ratio = ground.energy.abs() / kinetic;
        report.checks.push(RegimeCheck {
            name: "|E_0| / kinetic energy".into(),
            value: ratio,
            threshold: 0.1,
            warn: ratio >= 0.1,
        });
    }

    let lambda = 2.0 * std::f64::consts::PI * HBAR / momentum;
    let slit_ratio = grating.slit / lambda;
    let bar_ratio = (grating.period - grating.slit) / lambda;
    report.checks.push(RegimeCheck {
        name: "s / lambda'".into(),
        value: slit_ratio,
        threshold: 100.0,
        warn: slit_ratio < 100.0,
    });
    report.checks.push(RegimeCheck {
        name: "(d - s) / lambda'".into(),
        value: bar_ratio,
        threshold: 100.0,
        warn: bar_ratio < 100.0,
    });

    for (idx, (mass, threshold)) in [
        (species.m1, rotational_thresholds.0),
        (species.m2, rotational_thresholds.1),
    ]
    .into_iter()
    .enumerate()
    {
        if let Some(threshold) = threshold {
            let e = 0.5 * mass_internal(mass) * beam.v_mean * beam.v_mean;
            report.checks.push(RegimeCheck {
                name: format!("constituent {} kinetic energy [meV]", idx + 1),
                value: e,
                threshold,
                warn: e >= threshold,
            });
        }
    }
    report
}

/// Thermal equilibrium weight p_l = (2l+1) exp(-E_l / k_B T_b).
pub fn thermal_weight(l: u32, energy: f64, temperature: f64) -> f64 {
    (2.0 * l as f64 + 1.0) * (-energy / (KB * temperature)).exp()
}

/// Normalized bound-state populations p_l / sum_l p_l.
pub fn thermal_populations(species: &DimerSpecies, temperature: f64) -> Vec<(u32, f64)> {
    // shift by the ground-state energy; cancels in the normalization
    let e0 = species
        .bound_states
        .first()
        .map(|s| s.energy)
        .unwrap_or(0.0);
    let raw: Vec<(u32, f64)> = species
        .bound_states
        .iter()
        .map(|s| (s.l, thermal_weight(s.l, s.energy - e0, temperature)))
        .collect();
    let total: f64 = raw.iter().map(|(_, p)| p).sum();
    raw.into_iter().map(|(l, p)| (l, p / total)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{MASS_D2_AMU, UEV_PER_MEV};
    use approx::assert_relative_eq;

    #[test]
    fn zeroth_order_elastic_is_specular() {
        let theta = 14.0_f64.to_radians();
        let p = 40.0;
        let got = diffraction_angle(0, theta, p, 8.0, 0.0, 100.0).unwrap();
        assert_relative_eq!(got, theta, epsilon = 1e-15);
    }

    #[test]
    fn elastic_orders_satisfy_grating_equation() {
        let theta = 14.0_f64.to_radians();
        let m = 2.0 * MASS_D2_AMU;
        let p = mass_internal(m) * 0.5;
        let d = 100.0;
        for n in -5..=5 {
            let got = diffraction_angle(n, theta, p, m, 0.0, d).unwrap();
            let lambda = 2.0 * std::f64::consts::PI * HBAR / p;
            let expect = (theta.sin() + n as f64 * lambda / d).asin();
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn excitation_shifts_zeroth_order_to_larger_angle() {
        // (o-D2)2 at 500 m/s, theta' = 14 deg, dE = 377 ueV
        let m = 2.0 * MASS_D2_AMU;
        let p = mass_internal(m) * 0.5;
        let theta = 14.0_f64.to_radians();
        let de = 377.0 / UEV_PER_MEV;
        let got = diffraction_angle(0, theta, p, m, de, 100.0).unwrap();
        let shift_deg = (got - theta).to_degrees();
        assert!(
            (0.25..0.27).contains(&shift_deg),
            "shift = {shift_deg} deg"
        );
    }

    #[test]
    fn excitation_increases_order_spacing() {
        let m = 2.0 * MASS_D2_AMU;
        let p = mass_internal(m) * 0.5;
        let theta = 14.0_f64.to_radians();
        let de = 0.377;
        let elastic: Vec<f64> = (0..3)
            .map(|n| diffraction_angle(n, theta, p, m, 0.0, 100.0).unwrap())
            .collect();
        let inelastic: Vec<f64> = (0..3)
            .map(|n| diffraction_angle(n, theta, p, m, de, 100.0).unwrap())
            .collect();
        let deexc: Vec<f64> = (0..3)
            .map(|n| diffraction_angle(n, theta, p, m, -de, 100.0).unwrap())
            .collect();
        assert!(inelastic[1] - inelastic[0] > elastic[1] - elastic[0]);
        assert!(deexc[1] - deexc[0] < elastic[1] - elastic[0]);
    }

    #[test]
    fn energy_conservation_reconstructs() {
        let m = 2.0 * MASS_D2_AMU;
        let mi = mass_internal(m);
        let p_in = mi * 0.5;
        let theta_in = 14.0_f64.to_radians();
        let d = 100.0;
        for n in -3..=3 {
            for &de in &[0.0, 0.377, -0.377] {
                let theta = diffraction_angle(n, theta_in, p_in, m, de, d).unwrap();
                let p_out = (p_in * p_in - 2.0 * mi * de).sqrt();
                // P_y conservation up to reciprocal lattice vectors
                let py = p_out * theta.sin();
                let py_expect = p_in * theta_in.sin() + momentum_transfer(n, d);
                assert!((py - py_expect).abs() < 1e-9);
                // total energy conservation
                let e_in = p_in * p_in / (2.0 * mi);
                let e_out = p_out * p_out / (2.0 * mi) + de;
                assert!((e_in - e_out).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_and_evanescent_channels_error() {
        let m = 2.0 * MASS_D2_AMU;
        let p = mass_internal(m) * 0.5;
        assert!(matches!(
            diffraction_angle(0, 0.2, p, m, 100.0, 100.0),
            Err(KinematicsError::ClosedChannel { .. })
        ));
        assert!(matches!(
            diffraction_angle(5000, 0.2, p, m, 0.0, 100.0),
            Err(KinematicsError::EvanescentOrder { .. })
        ));
    }

    #[test]
    fn momentum_transfer_values() {
        assert_eq!(momentum_transfer(0, 100.0), 0.0);
        assert_relative_eq!(
            momentum_transfer(1, 100.0),
            2.0 * std::f64::consts::PI * HBAR / 100.0
        );
        assert_eq!(momentum_transfer(-2, 100.0), -momentum_transfer(2, 100.0));
    }
}
