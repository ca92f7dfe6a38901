//! Internal unit system: energies in meV, lengths in nm, times in ps,
//! masses in amu (converted to meV ps^2/nm^2 on use). All quantities of
//! interest are then O(1).

/// Reduced Planck constant [meV ps].
pub const HBAR: f64 = 0.658_211_956_9;

/// One atomic mass unit [meV ps^2 / nm^2].
pub const AMU: f64 = 10.364_27;

/// Boltzmann constant [meV / K].
pub const KB: f64 = 8.617_333_262e-2;

/// Conversion m/s -> nm/ps.
pub const NM_PER_PS_PER_M_PER_S: f64 = 1.0e-3;

/// Conversion meV -> ueV.
pub const UEV_PER_MEV: f64 = 1.0e3;

/// Mass of the D2 molecule [amu].
pub const MASS_D2_AMU: f64 = 4.028_203_556;

/// Mass of the H2 molecule [amu].
pub const MASS_H2_AMU: f64 = 2.015_650_064;

/// Converts a mass in amu to the internal mass unit meV ps^2/nm^2.
pub fn mass_internal(mass_amu: f64) -> f64 {
    mass_amu * AMU
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad * 180.0 / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d2_kinetic_energy_at_500_m_per_s() {
        // 5.2 meV for D2 at 500 m/s
        let v = 500.0 * NM_PER_PS_PER_M_PER_S;
        let e = 0.5 * mass_internal(MASS_D2_AMU) * v * v;
        assert!((e - 5.2).abs() < 0.05, "got {e}");
    }

    #[test]
    fn h2_kinetic_energy_at_500_m_per_s() {
        let v = 500.0 * NM_PER_PS_PER_M_PER_S;
        let e = 0.5 * mass_internal(MASS_H2_AMU) * v * v;
        assert!((e - 2.6).abs() < 0.03, "got {e}");
    }
}
