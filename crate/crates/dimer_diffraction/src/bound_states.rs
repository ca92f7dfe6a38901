//! Rotational bound states of the dimer from the radial two-body
//! Schroedinger equation.
//!
//! For each end-over-end quantum number l the lowest vibrational state is
//! found by Numerov integration with node-count bisection on the energy,
//! followed by an outward/inward matched construction of the wave function.

use num_complex::Complex64;

use crate::error::{SolverError, StateError};
use crate::potential::RadialPotential;
use crate::special::{gauss_legendre, spherical_bessel_j, ylm_theta, KahanSum};
use crate::units::{mass_internal, HBAR, UEV_PER_MEV};

/// A rotational bound state: quantum number l, energy E_l [meV] (< 0) and
/// the radial wave function R_l tabulated on a uniform grid [nm].
#[derive(Debug, Clone)]
pub struct BoundState {
    pub l: u32,
    /// Binding energy [meV], negative.
    pub energy: f64,
    /// Strictly increasing radii [nm].
    pub grid: Vec<f64>,
    /// R_l(r) at the grid points [nm^-3/2]; normalized so that
    /// the integral of R_l^2 r^2 dr equals one.
    pub values: Vec<f64>,
}

impl BoundState {
    /// Binding energy in ueV.
    pub fn energy_uev(&self) -> f64 {
        self.energy * UEV_PER_MEV
    }

    /// Number of interior radial nodes (sign changes of r R_l).
    pub fn node_count(&self) -> usize {
        let umax = self
            .values
            .iter()
            .zip(&self.grid)
            .fold(0.0_f64, |m, (v, r)| m.max((v * r).abs()));
        let floor = 1e-8 * umax;
        let mut nodes = 0;
        let mut prev = 0.0_f64;
        for (v, r) in self.values.iter().zip(&self.grid) {
            let u = v * r;
            if u.abs() < floor {
                continue;
            }
            if prev != 0.0 && u.signum() != prev.signum() {
                nodes += 1;
            }
            prev = u;
        }
        nodes
    }
}

/// Two-body cluster: constituent masses [amu] plus solved bound states.
#[derive(Debug, Clone)]
pub struct DimerSpecies {
    pub m1: f64,
    pub m2: f64,
    pub identical: bool,
    pub bound_states: Vec<BoundState>,
}

impl DimerSpecies {
    pub fn new(m1: f64, m2: f64, identical: bool) -> Result<Self, SolverError> {
        if m1 <= 0.0 || m2 <= 0.0 {
            return Err(SolverError::NonPositiveMass(m1.min(m2)));
        }
        if identical {
            assert!(
                m1 == m2,
                "identical constituents require equal masses (got {m1} and {m2})"
            );
        }
        Ok(Self {
            m1,
            m2,
            identical,
            bound_states: Vec::new(),
        })
    }

    /// Reduced mass m1 m2 / (m1 + m2) [amu].
    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / (self.m1 + self.m2)
    }

    /// Total mass M = m1 + m2 [amu].
    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn state(&self, l: u32) -> Option<&BoundState> {
        self.bound_states.iter().find(|s| s.l == l)
    }

    pub fn solve(
        &mut self,
        potential: &RadialPotential,
        l_max: u32,
        options: &SolverOptions,
    ) -> Result<(), SolverError> {
        self.bound_states = solve_bound_states_with(potential, self.reduced_mass(), l_max, options)?;
        Ok(())
    }
}

/// Numerical controls of the radial eigenvalue solver.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Uniform radial step [nm].
    pub grid_step: f64,
    /// Hard cap on the outer grid radius [nm].
    pub r_max_cap: f64,
    /// Energy bisection terminates below this bracket width [meV].
    pub bisection_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_step: 5e-4,
            r_max_cap: 60.0,
            bisection_tol: 1e-6,
            max_iterations: 200,
        }
    }
}

/// Solves for every rotational bound state with 0 <= l <= l_max.
pub fn solve_bound_states(
    potential: &RadialPotential,
    reduced_mass_amu: f64,
    l_max: u32,
) -> Result<Vec<BoundState>, SolverError> {
    solve_bound_states_with(potential, reduced_mass_amu, l_max, &SolverOptions::default())
}

pub fn solve_bound_states_with(
    potential: &RadialPotential,
    reduced_mass_amu: f64,
    l_max: u32,
    options: &SolverOptions,
) -> Result<Vec<BoundState>, SolverError> {
    if reduced_mass_amu <= 0.0 {
        return Err(SolverError::NonPositiveMass(reduced_mass_amu));
    }
    let mu = mass_internal(reduced_mass_amu);
    let pref = HBAR * HBAR / (2.0 * mu);
    let h = options.grid_step;

    // locate the well
    let scan_max = match potential {
        RadialPotential::Tabulated { radii, .. } => *radii.last().unwrap(),
        RadialPotential::LennardJones { sigma, .. } => 10.0 * sigma,
    };
    let mut v_min = f64::INFINITY;
    let mut r_at_min = h;
    let mut r = h;
    while r <= scan_max {
        let v = potential.value(r);
        if v < v_min {
            v_min = v;
            r_at_min = r;
        }
        r += h;
    }
    if !(v_min < -1e-12) {
        return Ok(Vec::new()); // no attractive well, no bound state
    }

    // inner boundary: hard-core region where V exceeds 1e3 |V_min|
    let wall = 1e3 * v_min.abs();
    let mut r_min = r_at_min;
    while r_min - h > 0.0 && potential.value(r_min - h) < wall {
        r_min -= h;
    }
    r_min = (r_min - h).max(h);

    let n = ((options.r_max_cap - r_min) / h).floor() as usize + 1;
    let radii: Vec<f64> = (0..n).map(|i| r_min + i as f64 * h).collect();
    let v_grid: Vec<f64> = radii.iter().map(|&r| potential.value(r)).collect();

    let mut states = Vec::new();
    for l in 0..=l_max {
        let centrifugal = pref * (l * (l + 1)) as f64;
        let q_of = |e: f64, scratch: &mut Vec<f64>| {
            scratch.clear();
            scratch.extend(
                radii
                    .iter()
                    .zip(&v_grid)
                    .map(|(&r, &v)| (v + centrifugal / (r * r) - e) / pref),
            );
        };
        let mut q = Vec::with_capacity(n);

        let e_floor = radii
            .iter()
            .zip(&v_grid)
            .map(|(&r, &v)| v + centrifugal / (r * r))
            .fold(f64::INFINITY, f64::min);
        if e_floor >= 0.0 {
            break; // centrifugal barrier has lifted the well above threshold
        }

        // a state shallower than the bisection tolerance is not resolvable
        let e_top = -options.bisection_tol;
        q_of(e_top, &mut q);
        let n_levels = count_nodes(&q, h);
        if n_levels == 0 {
            break; // no bound state for this l; higher l are shallower still
        }

        // the node count below a trial energy equals the number of levels
        // below it; bisect each level index in turn
        for k in 1..=n_levels {
            let mut lo = e_floor + 1e-12;
            let mut hi = e_top;
            let mut converged = false;
            for _ in 0..options.max_iterations {
                let mid = 0.5 * (lo + hi);
                q_of(mid, &mut q);
                if count_nodes(&q, h) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < options.bisection_tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(SolverError::NonConvergence {
                    l,
                    iterations: options.max_iterations,
                    e_low: lo,
                    e_high: hi,
                });
            }
            let energy = 0.5 * (lo + hi);
            q_of(energy, &mut q);
            let u = matched_wavefunction(&q, h, energy, mu)?;
            let (grid, values) = trim_and_store(&radii, &u);
            states.push(BoundState {
                l,
                energy,
                grid,
                values,
            });
        }
    }
    Ok(states)
}

/// Numerov sweep counting nodes of the outward solution. The number of
/// nodes equals the number of eigenvalues below the trial energy.
fn count_nodes(q: &[f64], h: f64) -> usize {
    let n = q.len();
    let h2 = h * h;
    let f = |qi: f64| 1.0 - h2 * qi / 12.0;
    let mut um1 = 0.0_f64;
    let mut u = 1e-12_f64;
    let mut nodes = 0;
    for i in 1..n - 1 {
        let next = (2.0 * (1.0 + 5.0 * h2 * q[i] / 12.0) * u - f(q[i - 1]) * um1) / f(q[i + 1]);
        if next != 0.0 && u != 0.0 && next.signum() != u.signum() {
            nodes += 1;
        }
        um1 = u;
        u = next;
        if u.abs() > 1e250 {
            um1 *= 1e-250;
            u *= 1e-250;
        }
    }
    nodes
}

/// Outward/inward Numerov integration matched at the outer classical
/// turning point; returns the normalized u = r R.
fn matched_wavefunction(q: &[f64], h: f64, energy: f64, mu: f64) -> Result<Vec<f64>, SolverError> {
    let n = q.len();
    let h2 = h * h;
    let f = |qi: f64| 1.0 - h2 * qi / 12.0;

    // outer turning point: last index still classically allowed (q <= 0)
    let m = match q.iter().rposition(|&qi| qi <= 0.0) {
        Some(m) if m > 1 && m < n - 2 => m,
        _ => {
            return Err(SolverError::NonConvergence {
                l: 0,
                iterations: 0,
                e_low: energy,
                e_high: energy,
            })
        }
    };

    let mut u = vec![0.0_f64; n];
    // outward branch
    u[0] = 0.0;
    u[1] = 1e-12;
    for i in 1..=m {
        u[i + 1] = (2.0 * (1.0 + 5.0 * h2 * q[i] / 12.0) * u[i] - f(q[i - 1]) * u[i - 1]) / f(q[i + 1]);
        if u[i + 1].abs() > 1e200 {
            for v in u[..=i + 1].iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let u_match_out = u[m + 1];

    // inward branch starts where the WKB tail has decayed to ~1e-14
    let kappa = (2.0 * mu * energy.abs()).sqrt() / HBAR;
    let tail_steps = (32.0 / (kappa * h)).ceil() as usize;
    let start = (m + tail_steps).min(n - 1);
    let mut win = vec![0.0_f64; n];
    win[start] = 1e-20;
    if start >= 1 {
        win[start - 1] = 1e-20 * (kappa * h).exp();
    }
    let mut i = start - 1;
    while i > m {
        win[i - 1] =
            (2.0 * (1.0 + 5.0 * h2 * q[i] / 12.0) * win[i] - f(q[i + 1]) * win[i + 1]) / f(q[i - 1]);
        if win[i - 1].abs() > 1e200 {
            for v in win[i - 1..].iter_mut() {
                *v *= 1e-200;
            }
        }
        i -= 1;
    }
    let scale = u_match_out / win[m + 1];
    for i in m + 1..n {
        u[i] = win[i] * scale;
    }

    // normalize: integral of u^2 dr = 1 (composite Simpson)
    let mut norm = KahanSum::default();
    for i in 0..n {
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        norm.add(w * u[i] * u[i]);
    }
    let norm = (norm.value() * h / 3.0).sqrt();
    let sign = if u[..=m].iter().fold(0.0_f64, |a, &b| if b.abs() > a.abs() { b } else { a }) < 0.0 {
        -1.0
    } else {
        1.0
    };
    for v in u.iter_mut() {
        *v *= sign / norm;
    }
    Ok(u)
}

fn trim_and_store(radii: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-12 * umax;
    let last = u.iter().rposition(|v| v.abs() >= cutoff).unwrap_or(u.len() - 1);
    let last = (last + 2).min(u.len() - 1);
    let grid = radii[..=last].to_vec();
    let values = grid.iter().zip(u).map(|(&r, &ui)| ui / r).collect();
    (grid, values)
}

/// E_{l_to} - E_{l_from} [ueV]; antisymmetric under argument swap.
pub fn transition_energy(species: &DimerSpecies, l_from: u32, l_to: u32) -> Result<f64, StateError> {
    let from = species
        .state(l_from)
        .ok_or(StateError::UnknownState { l: l_from })?;
    let to = species
        .state(l_to)
        .ok_or(StateError::UnknownState { l: l_to })?;
    Ok((to.energy - from.energy) * UEV_PER_MEV)
}

/// Dimer form factor F_{gamma gamma'}(p) for bound states gamma = (l, m),
/// gamma' = (l', m') and momentum transfer p [meV ps/nm], via the
/// partial-wave expansion of the plane wave.
pub fn form_factor(
    species: &DimerSpecies,
    gamma: (u32, i32),
    gamma_prime: (u32, i32),
    p: [f64; 3],
) -> Result<Complex64, StateError> {
    let (l, m) = gamma;
    let (lp, mp) = gamma_prime;
    if m.unsigned_abs() > l {
        return Err(StateError::BadOrientation { l, m });
    }
    if mp.unsigned_abs() > lp {
        return Err(StateError::BadOrientation { l: lp, m: mp });
    }
    let sa = species.state(l).ok_or(StateError::UnknownState { l })?;
    let sb = species.state(lp).ok_or(StateError::UnknownState { l: lp })?;

    let k = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() / HBAR;
    let (cos_theta_p, phi_p) = if k > 0.0 {
        (
            (p[2] / (k * HBAR)).clamp(-1.0, 1.0),
            p[1].atan2(p[0]),
        )
    } else {
        (1.0, 0.0)
    };

    let cap_m = m - mp;
    let (alpha_nodes, alpha_weights) = gauss_legendre(2 * (l + lp + 8) as usize);
    let mut total = Complex64::new(0.0, 0.0);
    for cap_l in 0..=(l + lp) {
        if cap_m.unsigned_abs() > cap_l {
            continue;
        }
        // angular overlap 2 pi * integral of the three polar parts
        let mut ang = KahanSum::default();
        for (&a, &w) in alpha_nodes.iter().zip(&alpha_weights) {
            ang.add(w * ylm_theta(l, m, a) * ylm_theta(lp, mp, a) * ylm_theta(cap_l, cap_m, a));
        }
        let ang = 2.0 * std::f64::consts::PI * ang.value();
        if ang.abs() < 1e-16 {
            continue;
        }

        // radial overlap with spherical Bessel weight on the shared grid
        let n = sa.grid.len().min(sb.grid.len());
        let h = sa.grid[1] - sa.grid[0];
        let mut rad = KahanSum::default();
        for i in 0..n {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let r = sa.grid[i];
            rad.add(w * r * r * sa.values[i] * sb.values[i] * spherical_bessel_j(cap_l, k * r));
        }
        let rad = rad.value() * h / 3.0;

        let il = Complex64::new(0.0, -1.0).powu(cap_l);
        let ylm_p = crate::special::spherical_harmonic(cap_l, cap_m, cos_theta_p, phi_p).conj();
        total += 4.0 * std::f64::consts::PI * il * ylm_p * rad * ang;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lj(eps: f64, sigma: f64) -> RadialPotential {
        RadialPotential::lennard_jones(eps, sigma).unwrap()
    }

    #[test]
    fn zero_potential_has_no_bound_states() {
        let p = lj(0.0, 0.3);
        let states = solve_bound_states(&p, 2.0, 3).unwrap();
        assert!(states.is_empty());
    }

    #[test]
    fn purely_repulsive_table_has_no_bound_states() {
        let p = RadialPotential::parse_table("0.1 50.0\n0.3 1.0\n0.6 0.01\n3.0 0.0\n").unwrap();
        assert!(solve_bound_states(&p, 2.0, 2).unwrap().is_empty());
    }

    #[test]
    fn lj_test_case_states_are_normalized_and_nodeless() {
        let p = lj(3.0, 0.3);
        let states = solve_bound_states(&p, 1.0, 2).unwrap();
        assert!(!states.is_empty());
        for s in &states {
            assert!(s.energy < 0.0);
            assert_eq!(s.node_count(), 0, "l = {}", s.l);
            let h = s.grid[1] - s.grid[0];
            let mut norm = 0.0;
            for i in 0..s.grid.len() {
                let w = if i == 0 || i == s.grid.len() - 1 { 0.5 } else { 1.0 };
                let u = s.values[i] * s.grid[i];
                norm += w * u * u * h;
            }
            assert_relative_eq!(norm, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn eigenvalues_increase_with_l() {
        let p = lj(3.0, 0.3);
        let states = solve_bound_states(&p, 2.0, 5).unwrap();
        for pair in states.windows(2) {
            assert!(pair[1].energy > pair[0].energy);
        }
    }

    #[test]
    fn asymptotic_decay_matches_binding_energy() {
        let p = lj(3.0, 0.3);
        let states = solve_bound_states(&p, 1.5, 0).unwrap();
        let s = &states[0];
        let kappa = (2.0 * mass_internal(1.5) * s.energy.abs()).sqrt() / HBAR;
        // slope of log u near the stored grid end
        let n = s.grid.len();
        let j = n - 50;
        let u_a = s.values[j] * s.grid[j];
        let u_b = s.values[n - 10] * s.grid[n - 10];
        let slope = (u_b.abs().ln() - u_a.abs().ln()) / (s.grid[n - 10] - s.grid[j]);
        assert_relative_eq!(-slope, kappa, max_relative = 0.01);
    }

    #[test]
    fn isotope_shift_raises_levels_and_never_adds_states() {
        let p = lj(3.3778, 0.30348);
        let heavy = solve_bound_states(&p, 2.014_101_778, 5).unwrap();
        let light = solve_bound_states(&p, 1.343_418, 5).unwrap();
        assert!(light.len() <= heavy.len());
        for s in &light {
            let other = heavy.iter().find(|h| h.l == s.l).unwrap();
            assert!(s.energy > other.energy);
        }
    }

    #[test]
    fn transition_energy_is_antisymmetric() {
        let p = lj(3.3778, 0.30348);
        let mut sp = DimerSpecies::new(4.028203556, 4.028203556, true).unwrap();
        sp.solve(&p, 3, &SolverOptions::default()).unwrap();
        let a = transition_energy(&sp, 0, 2).unwrap();
        let b = transition_energy(&sp, 2, 0).unwrap();
        assert_relative_eq!(a, -b);
        assert_eq!(transition_energy(&sp, 1, 1).unwrap(), 0.0);
        assert!(matches!(
            transition_energy(&sp, 0, 9),
            Err(StateError::UnknownState { l: 9 })
        ));
    }

    #[test]
    fn form_factor_at_zero_momentum_is_kronecker_delta() {
        let p = lj(3.3778, 0.30348);
        let mut sp = DimerSpecies::new(4.028203556, 4.028203556, true).unwrap();
        sp.solve(&p, 2, &SolverOptions::default()).unwrap();
        let f = form_factor(&sp, (0, 0), (0, 0), [0.0; 3]).unwrap();
        assert_relative_eq!(f.re, 1.0, epsilon = 1e-8);
        assert!(f.im.abs() < 1e-12);
        let f11 = form_factor(&sp, (1, 1), (1, 1), [0.0; 3]).unwrap();
        assert_relative_eq!(f11.re, 1.0, epsilon = 1e-8);
        let off = form_factor(&sp, (0, 0), (2, 0), [0.0; 3]).unwrap();
        assert!(off.norm() < 1e-8, "got {off}");
        let off_m = form_factor(&sp, (1, 0), (1, 1), [0.0; 3]).unwrap();
        assert!(off_m.norm() < 1e-12);
    }
}
