//! Shared oracles for the integration tests.

use dimer_diffraction::potential::RadialPotential;
use dimer_diffraction::units::{mass_internal, HBAR};

/// Negative eigenvalues of the radial Schroedinger problem with Dirichlet
/// boundaries, from a dense symmetric finite-difference discretization
/// diagonalized by Sturm-sequence bisection. Richardson extrapolation of
/// the h and h/2 grids removes the leading O(h^2) error.
pub fn fd_bound_energies(
    potential: &RadialPotential,
    reduced_mass_amu: f64,
    l: u32,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Vec<f64> {
    let coarse = fd_energies_at(potential, reduced_mass_amu, l, r_min, r_max, n);
    let fine = fd_energies_at(potential, reduced_mass_amu, l, r_min, r_max, 2 * n + 1);
    coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

fn fd_energies_at(
    potential: &RadialPotential,
    reduced_mass_amu: f64,
    l: u32,
    r_min: f64,
    r_max: f64,
    n: usize,
) -> Vec<f64> {
    let h = (r_max - r_min) / (n as f64 + 1.0);
    let pref = HBAR * HBAR / (2.0 * mass_internal(reduced_mass_amu));
    let centrifugal = pref * (l * (l + 1)) as f64;
    let diag: Vec<f64> = (1..=n)
        .map(|i| {
            let r = r_min + i as f64 * h;
            2.0 * pref / (h * h) + potential.value(r) + centrifugal / (r * r)
        })
        .collect();
    let off2 = (pref / (h * h)).powi(2);

    // Sturm sequence: number of eigenvalues strictly below x
    let count_below = |x: f64| -> usize {
        let mut cnt = 0;
        let mut q = 1.0_f64;
        for (i, &d) in diag.iter().enumerate() {
            q = d - x - if i > 0 { off2 / q } else { 0.0 };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };

    let floor = -(potential.well_depth() + 1.0);
    let bound = count_below(0.0);
    (0..bound)
        .map(|j| {
            let (mut lo, mut hi) = (floor, 0.0);
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
