//! Dimer transmission functions and relative diffraction intensities
//! I_n^{ll'} for all open transition channels, either via the spectral
//! convolution of point-particle Fourier coefficients with the smooth
//! radial-angular kernel (default) or via the direct triple
//! (Y, r, alpha) quadrature over one grating period.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bound_states::{BoundState, DimerSpecies};
use crate::error::{EngineError, StateError};
use crate::grating::{
    open_interval, phase_shift, pp_diffraction_amplitudes, ConstituentBeam, GratingGeometry,
    VdwCoupling,
};
use crate::kinematics::{diffraction_angle, thermal_weight, BeamSpec};
use crate::special::{assoc_legendre, gauss_legendre, KahanComplex};
use crate::units::mass_internal;

/// A bound-bound transition channel l' -> l with energy gain
/// delta_e = E_l - E_{l'} [meV].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionChannel {
    pub l_from: u32,
    pub l_to: u32,
    pub delta_e: f64,
}

/// Evaluation strategy for the Y-transform of the dimer transmission
/// function.
///
/// `DirectQuadrature` integrates the triple (Y, r, alpha) integral on a
/// uniform Y grid. It is exact away from the slit walls but cannot
/// resolve the diverging eikonal phase oscillation next to them, which
/// leaves quadrature noise on the very weak inelastic channels.
/// `Spectral` expands both point-particle transmission functions in
/// Fourier series (computed on wall-graded panels) and folds them with
/// the analytic Fourier transform of the smooth radial-angular kernel;
/// this path converges for all channels and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityMethod {
    Spectral,
    DirectQuadrature,
}

/// Quadrature orders for the channel intensity integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Uniform points per grating period for the direct Y integral.
    pub n_y: usize,
    /// Radial Gauss-Legendre order.
    pub n_r: usize,
    /// Angular Gauss-Legendre order; must be >= 2 l_max + 8.
    pub n_alpha: usize,
    /// Point-particle Fourier orders retained by the spectral path.
    pub j_max: usize,
    /// Gauss-Legendre order of the kernel transform (spectral path).
    pub n_u: usize,
    /// Radial cutoff [nm]; per-state automatic when absent.
    pub r_max: Option<f64>,
    /// Excluded strip next to each slit wall [nm] (only with C3 > 0).
    pub edge_band: f64,
    /// Size of the precomputed point-particle phase table per period.
    pub pp_table_size: usize,
    /// Origin shift of the Y grid [nm]; intensities are invariant.
    pub y_offset: f64,
    pub method: IntensityMethod,
    /// Re-evaluate each intensity at doubled orders and attach an
    /// accuracy warning when the relative change exceeds 0.5%.
    pub convergence_check: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_y: 4096,
            n_r: 200,
            n_alpha: 64,
            j_max: 512,
            n_u: 512,
            r_max: None,
            edge_band: 0.1,
            pp_table_size: 65536,
            y_offset: 0.0,
            method: IntensityMethod::Spectral,
            convergence_check: false,
        }
    }
}

impl QuadratureSpec {
    /// Multiplies all point counts by `factor` (for convergence studies).
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64 * factor).round() as usize).max(2);
        Self {
            n_y: scale(self.n_y),
            n_r: scale(self.n_r),
            n_alpha: scale(self.n_alpha),
            j_max: scale(self.j_max),
            n_u: scale(self.n_u),
            ..*self
        }
    }

    fn doubled(&self) -> Self {
        Self {
            convergence_check: false,
            ..self.scaled(2.0)
        }
    }
}

/// Pi_{ll'}^{m'}(alpha) of the angular integrand: normalized product of
/// associated Legendre polynomials, symmetric in (l, l'), with parity
/// (-1)^{l+l'}.
pub fn pi_function(l: u32, l_prime: u32, m_prime: i32, alpha: f64) -> Result<f64, StateError> {
    let ma = m_prime.unsigned_abs();
    if ma > l.min(l_prime) {
        return Err(StateError::BadOrientation {
            l: l.min(l_prime),
            m: m_prime,
        });
    }
    let fact = |n: u32| -> f64 { (1..=n).map(|k| k as f64).product() };
    let norm = (fact(l - ma) * fact(l_prime - ma) / (fact(l + ma) * fact(l_prime + ma))).sqrt();
    Ok(0.5 * norm * assoc_legendre(l, ma, alpha) * assoc_legendre(l_prime, ma, alpha))
}

/// Precomputed point-particle transmission of one constituent on a dense
/// uniform grid over one period: the eikonal phase is interpolated
/// (cubic), openness is decided geometrically per query.
struct PpTable {
    period: f64,
    lo: f64,
    hi: f64,
    band: f64,
    step: f64,
    phase: Vec<f64>,
    trivial_phase: bool,
}

impl PpTable {
    fn build(
        geometry: &GratingGeometry,
        coupling: &VdwCoupling,
        beam: &ConstituentBeam,
        size: usize,
        edge_band: f64,
    ) -> Self {
        let d = geometry.period;
        let step = d / size as f64;
        let (lo, hi) = open_interval(geometry, beam.incidence).unwrap_or((0.0, 0.0));
        let band = if coupling.c3 > 0.0 { edge_band } else { 0.0 };
        let trivial_phase = coupling.c3 == 0.0 || lo >= hi;
        let phase = if trivial_phase {
            Vec::new()
        } else {
            // margin so that every interpolation stencil stays defined
            let margin = 3.0 * step;
            let clamp_eps = (band * 0.25).max(1e-6);
            (0..size)
                .map(|i| {
                    let y = -d / 2.0 + i as f64 * step;
                    if y > lo + band - margin && y < hi - band + margin {
                        let yc = y.clamp(lo + clamp_eps, hi - clamp_eps);
                        phase_shift(geometry, coupling, beam.speed, beam.incidence, yc)
                            .unwrap_or(0.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        Self {
            period: d,
            lo,
            hi,
            band,
            step,
            phase,
            trivial_phase,
        }
    }

    #[inline]
    fn sample(&self, y: f64) -> Complex64 {
        let d = self.period;
        let y = y - d * (y / d).round();
        if y <= self.lo + self.band || y >= self.hi - self.band {
            return Complex64::new(0.0, 0.0);
        }
        if self.trivial_phase {
            return Complex64::new(1.0, 0.0);
        }
        // Catmull-Rom interpolation of the phase on the uniform grid
        let x = (y + d / 2.0) / self.step;
        let i = x.floor() as usize;
        let t = x - i as f64;
        let n = self.phase.len();
        let p0 = self.phase[(i + n - 1) % n];
        let p1 = self.phase[i % n];
        let p2 = self.phase[(i + 1) % n];
        let p3 = self.phase[(i + 2) % n];
        let phi = p1
            + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
        Complex64::from_polar(1.0, phi)
    }
}

/// Per-order result with an optional quadrature accuracy warning.
#[derive(Debug, Clone, Copy)]
pub struct IntensityValue {
    pub value: f64,
    pub accuracy_warning: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EntryFlags {
    pub selection_rule_zero: bool,
    pub evanescent: bool,
    pub closed: bool,
    pub low_population: bool,
    pub accuracy_warning: bool,
}

/// One line of a channel sweep: relative intensity and peak angle for a
/// (channel, order) combination.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub channel: TransitionChannel,
    pub n: i32,
    /// Relative intensity, normalized to the total elastic zeroth order.
    pub intensity: f64,
    /// Peak angle [rad]; absent for evanescent or closed combinations.
    pub theta: Option<f64>,
    /// Population fraction of the initial state.
    pub population: f64,
    pub flags: EntryFlags,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// Summed elastic zeroth-order intensity used as normalization.
    pub elastic_zeroth: f64,
}

/// Diffraction intensity calculator for one species/beam/grating setup.
pub struct DiffractionEngine<'a> {
    species: &'a DimerSpecies,
    beam: BeamSpec,
    grating: GratingGeometry,
    quad: QuadratureSpec,
    couplings: (VdwCoupling, VdwCoupling),
    beam1: ConstituentBeam,
    beam2: ConstituentBeam,
    pp1: PpTable,
    pp2: PpTable,
    frac1: f64,
    frac2: f64,
    /// Point-particle Fourier coefficients per constituent, keyed by the
    /// maximum retained order; reused across all channels of a sweep.
    pp_fourier_cache: Mutex<HashMap<i32, (Arc<Vec<Complex64>>, Arc<Vec<Complex64>>)>>,
}

impl<'a> DiffractionEngine<'a> {
    pub fn new(
        species: &'a DimerSpecies,
        beam: &BeamSpec,
        grating: &GratingGeometry,
        couplings: (VdwCoupling, VdwCoupling),
        quad: QuadratureSpec,
    ) -> Result<Self, EngineError> {
        let l_max = species.bound_states.iter().map(|s| s.l).max().unwrap_or(0);
        if quad.n_alpha < (2 * l_max + 8) as usize {
            return Err(EngineError::BadQuadrature(format!(
                "n_alpha = {} below 2 l_max + 8 = {}",
                quad.n_alpha,
                2 * l_max + 8
            )));
        }
        if quad.n_y == 0 || quad.n_r == 0 {
            return Err(EngineError::BadQuadrature("zero quadrature order".into()));
        }
        let m_total = species.total_mass();
        let beam1 = ConstituentBeam::new(species.m1, beam.v_mean, beam.incidence);
        let beam2 = ConstituentBeam::new(species.m2, beam.v_mean, beam.incidence);
        let pp1 = PpTable::build(grating, &couplings.0, &beam1, quad.pp_table_size, quad.edge_band);
        let pp2 = PpTable::build(grating, &couplings.1, &beam2, quad.pp_table_size, quad.edge_band);
        Ok(Self {
            species,
            beam: *beam,
            grating: *grating,
            quad,
            couplings,
            beam1,
            beam2,
            pp1,
            pp2,
            frac1: species.m1 / m_total,
            frac2: species.m2 / m_total,
            pp_fourier_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Fourier coefficients of both point-particle transmission functions
    /// for orders -k_max..=k_max, cached per engine.
    fn pp_fourier(&self, k_max: i32) -> (Arc<Vec<Complex64>>, Arc<Vec<Complex64>>) {
        let mut cache = self.pp_fourier_cache.lock().unwrap();
        cache
            .entry(k_max)
            .or_insert_with(|| {
                let all_k: Vec<i32> = (-k_max..=k_max).collect();
                let a: Vec<Complex64> = pp_diffraction_amplitudes(
                    &self.grating,
                    &self.couplings.0,
                    &self.beam1,
                    &all_k,
                    self.quad.edge_band,
                )
                .into_iter()
                .map(|(_, c)| c)
                .collect();
                let b = if self.couplings.0.c3 == self.couplings.1.c3
                    && (self.beam1.speed - self.beam2.speed).abs() < 1e-12
                {
                    a.clone()
                } else {
                    pp_diffraction_amplitudes(
                        &self.grating,
                        &self.couplings.1,
                        &self.beam2,
                        &all_k,
                        self.quad.edge_band,
                    )
                    .into_iter()
                    .map(|(_, c)| c)
                    .collect()
                };
                (Arc::new(a), Arc::new(b))
            })
            .clone()
    }

    fn state(&self, l: u32) -> Result<&BoundState, StateError> {
        self.species.state(l).ok_or(StateError::UnknownState { l })
    }

    fn pair_r_max(&self, a: &BoundState, b: &BoundState) -> f64 {
        if let Some(r_max) = self.quad.r_max {
            return r_max;
        }
        let cut = |s: &BoundState| {
            let umax = s
                .values
                .iter()
                .zip(&s.grid)
                .fold(0.0_f64, |m, (v, r)| m.max((v * r).abs()));
            let idx = s
                .values
                .iter()
                .zip(&s.grid)
                .rposition(|(v, r)| (v * r).abs() >= 1e-10 * umax)
                .unwrap_or(s.grid.len() - 1);
            s.grid[idx]
        };
        cut(a).max(cut(b))
    }

    /// Inner (r, alpha) integrals of the dimer transmission function at
    /// every Y grid point, one series per |m'| in 0..=min(l, l').
    fn inner_profiles(
        &self,
        l_from: u32,
        l_to: u32,
        quad: &QuadratureSpec,
    ) -> Result<Vec<Vec<Complex64>>, EngineError> {
        let from = self.state(l_from)?;
        let to = self.state(l_to)?;
        let m_max = l_from.min(l_to);

        let r_max = self.pair_r_max(from, to);
        let (r_nodes, r_weights) = gauss_legendre(quad.n_r);
        let radial: Vec<(f64, f64)> = r_nodes
            .iter()
            .zip(&r_weights)
            .map(|(&x, &w)| {
                let r = 0.5 * r_max * (x + 1.0);
                let wr = 0.5 * r_max * w;
                let prod = interpolate_state(to, r) * interpolate_state(from, r);
                (r, wr * r * r * prod)
            })
            .collect();

        let (a_nodes, a_weights) = gauss_legendre(quad.n_alpha);
        let pi_rows: Vec<Vec<f64>> = (0..=m_max)
            .map(|m| {
                a_nodes
                    .iter()
                    .map(|&a| pi_function(l_to, l_from, m as i32, a).unwrap())
                    .collect()
            })
            .collect();

        let d = self.grating.period;
        let n_y = quad.n_y;
        let profiles: Vec<Vec<Complex64>> = (0..n_y)
            .into_par_iter()
            .map(|j| {
                let y = -d / 2.0 + (j as f64 + 0.5) * d / n_y as f64 + quad.y_offset;
                let mut acc = vec![Complex64::new(0.0, 0.0); m_max as usize + 1];
                for &(r, wr) in &radial {
                    if wr == 0.0 {
                        continue;
                    }
                    for (k, (&alpha, &wa)) in a_nodes.iter().zip(&a_weights).enumerate() {
                        let tau1 = self.pp1.sample(y + self.frac2 * alpha * r);
                        if tau1 == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let tau2 = self.pp2.sample(y - self.frac1 * alpha * r);
                        let weighted = tau1 * tau2 * (wr * wa);
                        for (m, row) in pi_rows.iter().enumerate() {
                            acc[m] += weighted * row[k];
                        }
                    }
                }
                acc
            })
            .collect();

        // transpose to [m'][Y]
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n_y]; m_max as usize + 1];
        for (j, row) in profiles.iter().enumerate() {
            for (m, &v) in row.iter().enumerate() {
                out[m][j] = v;
            }
        }
        Ok(out)
    }

    /// Dimer transmission function tau^dim_{l m l' m'}(Y) per the
    /// spherical-coordinate double integral, including the delta_{mm'}
    /// factor and the sqrt(2l+1) sqrt(2l'+1) prefactor.
    pub fn dimer_transmission(
        &self,
        l_from: u32,
        m_from: i32,
        l_to: u32,
        m_to: i32,
        y: f64,
    ) -> Result<Complex64, EngineError> {
        if m_from.unsigned_abs() > l_from {
            return Err(StateError::BadOrientation {
                l: l_from,
                m: m_from,
            }
            .into());
        }
        if m_to.unsigned_abs() > l_to {
            return Err(StateError::BadOrientation { l: l_to, m: m_to }.into());
        }
        if m_from != m_to {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let from = self.state(l_from)?;
        let to = self.state(l_to)?;
        let m_abs = m_from.unsigned_abs();

        let r_max = self.pair_r_max(from, to);
        let (r_nodes, r_weights) = gauss_legendre(self.quad.n_r);
        let (a_nodes, a_weights) = gauss_legendre(self.quad.n_alpha);
        let mut acc = KahanComplex::default();
        for (&x, &w) in r_nodes.iter().zip(&r_weights) {
            let r = 0.5 * r_max * (x + 1.0);
            let wr = 0.5 * r_max * w * r * r * interpolate_state(to, r) * interpolate_state(from, r);
            for (&alpha, &wa) in a_nodes.iter().zip(&a_weights) {
                let pi = pi_function(l_to, l_from, m_abs as i32, alpha).unwrap();
                let tau1 = self.pp1.sample(y + self.frac2 * alpha * r);
                let tau2 = self.pp2.sample(y - self.frac1 * alpha * r);
                acc.add(tau1 * tau2 * (wr * wa * pi));
            }
        }
        let pref = ((2 * l_to + 1) as f64).sqrt() * ((2 * l_from + 1) as f64).sqrt();
        Ok(acc.value() * pref)
    }

    /// Fourier coefficients (1/d) integral e^{-i 2 pi n Y/d} (inner) dY
    /// for every requested order, one row per |m'|.
    fn channel_fourier(
        &self,
        l_from: u32,
        l_to: u32,
        orders: &[i32],
        quad: &QuadratureSpec,
    ) -> Result<Vec<Vec<Complex64>>, EngineError> {
        match quad.method {
            IntensityMethod::Spectral => self.channel_fourier_spectral(l_from, l_to, orders, quad),
            IntensityMethod::DirectQuadrature => {
                self.channel_fourier_direct(l_from, l_to, orders, quad)
            }
        }
    }

    /// Spectral evaluation of the channel Fourier coefficients: with both
    /// point-particle transmissions expanded as tau_i(y) = sum_k c_k^{(i)}
    /// e^{i 2 pi k y / d}, the Y transform of the inner integral
    /// factorizes into the discrete convolution
    ///
    ///   c_n = sum_j a_{n-j} b_j Khat(2 pi (j - n m2/M) / d),
    ///
    /// where Khat is the Fourier transform of the smooth kernel
    /// K(u) = integral_{|u|}^inf r R_l R_l' Pi(u/r) dr. K has parity
    /// (-1)^{l+l'}, so Khat is real (even) or imaginary (odd); the split
    /// form keeps the identical-constituent selection rule exact.
    fn channel_fourier_spectral(
        &self,
        l_from: u32,
        l_to: u32,
        orders: &[i32],
        quad: &QuadratureSpec,
    ) -> Result<Vec<Vec<Complex64>>, EngineError> {
        let from = self.state(l_from)?;
        let to = self.state(l_to)?;
        let m_max = l_from.min(l_to);
        let d = self.grating.period;
        let j_max = quad.j_max as i32;
        let max_order = orders.iter().copied().map(i32::abs).max().unwrap_or(0);
        let k_max = j_max + max_order;

        let (a_coeffs, b_coeffs) = self.pp_fourier(k_max);
        let a = |k: i32| a_coeffs[(k + k_max) as usize];
        let b = |k: i32| b_coeffs[(k + k_max) as usize];

        let u_max = self.pair_r_max(from, to);
        let (u_nodes, u_weights) = gauss_legendre(quad.n_u);
        let (r_nodes, r_weights) = gauss_legendre(quad.n_r);
        let parity_odd = (l_from + l_to) % 2 == 1;

        let mut out = Vec::with_capacity(m_max as usize + 1);
        for m in 0..=m_max {
            // K(u) on a Gauss-Legendre grid over [0, u_max]
            let kernel: Vec<(f64, f64)> = u_nodes
                .iter()
                .zip(&u_weights)
                .map(|(&x, &w)| {
                    let u = 0.5 * u_max * (x + 1.0);
                    let wu = 0.5 * u_max * w;
                    let mut k_val = 0.0;
                    for (&xr, &wr) in r_nodes.iter().zip(&r_weights) {
                        let r = u + 0.5 * (u_max - u) * (xr + 1.0);
                        let pi = pi_function(l_to, l_from, m as i32, (u / r).min(1.0)).unwrap();
                        let w_scaled = 0.5 * (u_max - u) * wr;
                        k_val += w_scaled * r * interpolate_state(to, r) * interpolate_state(from, r) * pi;
                    }
                    (u, wu * k_val)
                })
                .collect();
            let row: Vec<Complex64> = orders
                .par_iter()
                .map(|&n| {
                    // Khat on the uniform q grid q_j = 2 pi (j - n m2/M)/d,
                    // accumulated per u node with a phase-rotation
                    // recurrence instead of per-(j, u) trig calls. The sum
                    // runs over j in [n - J, J], which is invariant under
                    // the pairing j <-> n - j so that the parity
                    // cancellation of identical constituents stays exact.
                    let j_lo = n - j_max;
                    let j_hi = j_max;
                    let j_count = (j_hi - j_lo + 1) as usize;
                    let mut s = vec![0.0f64; j_count];
                    let dq = 2.0 * std::f64::consts::PI / d;
                    let q0 = dq * (j_lo as f64 - n as f64 * self.frac2);
                    for &(u, wk) in &kernel {
                        let (mut sin_qu, mut cos_qu) = (q0 * u).sin_cos();
                        let (sin_du, cos_du) = (dq * u).sin_cos();
                        for sj in s.iter_mut() {
                            *sj += wk * if parity_odd { sin_qu } else { cos_qu };
                            let next_cos = cos_qu * cos_du - sin_qu * sin_du;
                            sin_qu = sin_qu * cos_du + cos_qu * sin_du;
                            cos_qu = next_cos;
                        }
                    }
                    let mut acc = KahanComplex::default();
                    for j in j_lo..=j_hi {
                        let sv = s[(j - j_lo) as usize];
                        let khat = if parity_odd {
                            Complex64::new(0.0, -2.0 * sv)
                        } else {
                            Complex64::new(2.0 * sv, 0.0)
                        };
                        acc.add(a(n - j) * b(j) * khat);
                    }
                    acc.value()
                })
                .collect();
            out.push(row);
        }
        Ok(out)
    }

    /// Direct triple-quadrature evaluation of the channel Fourier
    /// coefficients on the uniform Y grid.
    fn channel_fourier_direct(
        &self,
        l_from: u32,
        l_to: u32,
        orders: &[i32],
        quad: &QuadratureSpec,
    ) -> Result<Vec<Vec<Complex64>>, EngineError> {
        let profiles = self.inner_profiles(l_from, l_to, quad)?;
        let n_y = quad.n_y;
        let d = self.grating.period;
        Ok(profiles
            .iter()
            .map(|profile| {
                orders
                    .iter()
                    .map(|&n| {
                        let mut acc = KahanComplex::default();
                        let k = 2.0 * std::f64::consts::PI * n as f64 / d;
                        for (j, &g) in profile.iter().enumerate() {
                            let y = -d / 2.0 + (j as f64 + 0.5) * d / n_y as f64 + quad.y_offset;
                            acc.add(Complex64::from_polar(1.0, -k * y) * g);
                        }
                        acc.value() / n_y as f64
                    })
                    .collect()
            })
            .collect())
    }

    /// Thermal weight of the initial level, p_{l'} = (2l'+1)
    /// exp(-(E_{l'} - E_0)/k_B T_b); the ground-state shift cancels in all
    /// relative intensities.
    pub fn initial_weight(&self, l_from: u32) -> Result<f64, StateError> {
        let e0 = self
            .species
            .bound_states
            .first()
            .map(|s| s.energy)
            .unwrap_or(0.0);
        let s = self.state(l_from)?;
        Ok(thermal_weight(l_from, s.energy - e0, self.beam.temperature))
    }

    fn intensity_with(
        &self,
        n: i32,
        l_to: u32,
        l_from: u32,
        quad: &QuadratureSpec,
    ) -> Result<f64, EngineError> {
        let rows = self.channel_fourier(l_from, l_to, &[n], quad)?;
        let p = self.initial_weight(l_from)?;
        let mut sum = 0.0;
        for (m, row) in rows.iter().enumerate() {
            let mult = if m == 0 { 1.0 } else { 2.0 }; // +-m' contribute equally
            sum += mult * row[0].norm_sqr();
        }
        Ok((2 * l_to + 1) as f64 * p * sum)
    }

    /// Relative diffraction intensity I_n^{l l'} (unnormalized; divide by
    /// the summed elastic zeroth order for figure-style output). Errors on
    /// closed channels; evanescent orders carry no angle but the Fourier
    /// weight is still defined.
    pub fn intensity(&self, n: i32, l_to: u32, l_from: u32) -> Result<IntensityValue, EngineError> {
        let from = self.state(l_from)?;
        let to = self.state(l_to)?;
        let delta_e = to.energy - from.energy;
        let momentum = self.beam.momentum(self.species.total_mass());
        let kinetic = momentum * momentum / (2.0 * mass_internal(self.species.total_mass()));
        if delta_e >= kinetic {
            return Err(EngineError::Kinematics(
                crate::error::KinematicsError::ClosedChannel { delta_e, kinetic },
            ));
        }
        let value = self.intensity_with(n, l_to, l_from, &self.quad)?;
        let accuracy_warning = if self.quad.convergence_check {
            let refined = self.intensity_with(n, l_to, l_from, &self.quad.doubled())?;
            relative_change(value, refined) > 5e-3
        } else {
            false
        };
        Ok(IntensityValue {
            value,
            accuracy_warning,
        })
    }

    /// All open channels between all bound-state pairs (both directions)
    /// for every order in `orders`, normalized to the total elastic
    /// zeroth order.
    pub fn channel_sweep(&self, orders: &[i32], population_floor: f64) -> Result<SweepResult, EngineError> {
        let populations: Vec<(u32, f64)> =
            crate::kinematics::thermal_populations(self.species, self.beam.temperature);
        let momentum = self.beam.momentum(self.species.total_mass());
        let total_mass = self.species.total_mass();

        let mut orders_with_zero: Vec<i32> = orders.to_vec();
        if !orders_with_zero.contains(&0) {
            orders_with_zero.push(0);
        }

        let mut entries = Vec::new();
        let mut elastic_zeroth = 0.0;
        for from in &self.species.bound_states {
            for to in &self.species.bound_states {
                let delta_e = to.energy - from.energy;
                let channel = TransitionChannel {
                    l_from: from.l,
                    l_to: to.l,
                    delta_e,
                };
                let selection_rule_zero =
                    self.species.identical && (from.l + to.l) % 2 == 1;
                let population = populations
                    .iter()
                    .find(|(l, _)| *l == from.l)
                    .map(|(_, p)| *p)
                    .unwrap_or(0.0);

                let kinetic = momentum * momentum / (2.0 * mass_internal(total_mass));
                if delta_e >= kinetic {
                    for &n in orders {
                        entries.push(SweepEntry {
                            channel,
                            n,
                            intensity: 0.0,
                            theta: None,
                            population,
                            flags: EntryFlags {
                                selection_rule_zero,
                                closed: true,
                                ..Default::default()
                            },
                        });
                    }
                    continue;
                }

                let rows = self.channel_fourier(from.l, to.l, &orders_with_zero, &self.quad)?;
                let refined_rows = if self.quad.convergence_check {
                    Some(self.channel_fourier(from.l, to.l, &orders_with_zero, &self.quad.doubled())?)
                } else {
                    None
                };
                let p = self.initial_weight(from.l)?;
                let value_at = |rows: &Vec<Vec<Complex64>>, idx: usize| -> f64 {
                    let mut sum = 0.0;
                    for (m, row) in rows.iter().enumerate() {
                        let mult = if m == 0 { 1.0 } else { 2.0 };
                        sum += mult * row[idx].norm_sqr();
                    }
                    (2 * to.l + 1) as f64 * p * sum
                };

                if from.l == to.l {
                    let zero_idx = orders_with_zero.iter().position(|&n| n == 0).unwrap();
                    elastic_zeroth += value_at(&rows, zero_idx);
                }

                for (idx, &n) in orders_with_zero.iter().enumerate() {
                    if !orders.contains(&n) {
                        continue;
                    }
                    let intensity = value_at(&rows, idx);
                    let accuracy_warning = refined_rows
                        .as_ref()
                        .map(|r| relative_change(intensity, value_at(r, idx)) > 5e-3)
                        .unwrap_or(false);
                    let (theta, evanescent) = match diffraction_angle(
                        n,
                        self.beam.incidence,
                        momentum,
                        total_mass,
                        delta_e,
                        self.grating.period,
                    ) {
                        Ok(t) => (Some(t), false),
                        Err(_) => (None, true),
                    };
                    entries.push(SweepEntry {
                        channel,
                        n,
                        intensity,
                        theta,
                        population,
                        flags: EntryFlags {
                            selection_rule_zero,
                            evanescent,
                            closed: false,
                            low_population: population < population_floor,
                            accuracy_warning,
                        },
                    });
                }
            }
        }

        if elastic_zeroth > 0.0 {
            for e in entries.iter_mut() {
                e.intensity /= elastic_zeroth;
            }
        }
        Ok(SweepResult {
            entries,
            elastic_zeroth,
        })
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Linear interpolation of a tabulated radial wave function; zero beyond
/// the stored grid.
fn interpolate_state(state: &BoundState, r: f64) -> f64 {
    let grid = &state.grid;
    let n = grid.len();
    if r <= grid[0] || r >= grid[n - 1] {
        return 0.0;
    }
    let h = grid[1] - grid[0];
    let x = (r - grid[0]) / h;
    let i = (x.floor() as usize).min(n - 2);
    let t = x - i as f64;
    state.values[i] * (1.0 - t) + state.values[i + 1] * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::BeamSpec;
    use crate::potential::RadialPotential;
    use crate::units::MASS_D2_AMU;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn solved_dd() -> &'static DimerSpecies {
        static CELL: OnceLock<DimerSpecies> = OnceLock::new();
        CELL.get_or_init(|| {
            let p = RadialPotential::lennard_jones(3.3778, 0.30348).unwrap();
            let mut sp = DimerSpecies::new(MASS_D2_AMU, MASS_D2_AMU, true).unwrap();
            sp.solve(&p, 3, &Default::default()).unwrap();
            sp
        })
    }

    /// Species with a single artificial point-like l = 0 state: R constant
    /// on a tiny interval, normalized to integral R^2 r^2 dr = 1.
    fn point_species(r0: f64, r1: f64) -> DimerSpecies {
        let n = 201;
        let grid: Vec<f64> = (0..n)
            .map(|i| r0 + (r1 - r0) * i as f64 / (n - 1) as f64)
            .collect();
        let amp = (3.0 / (r1.powi(3) - r0.powi(3))).sqrt();
        DimerSpecies {
            m1: MASS_D2_AMU,
            m2: MASS_D2_AMU,
            identical: true,
            bound_states: vec![BoundState {
                l: 0,
                energy: -1e-3,
                grid,
                values: vec![amp; n],
            }],
        }
    }

    fn geometry() -> GratingGeometry {
        GratingGeometry::new(100.0, 60.0, 120.0, 5.0).unwrap()
    }

    fn reduced_quad(method: IntensityMethod) -> QuadratureSpec {
        QuadratureSpec {
            n_y: 2048,
            n_r: 80,
            n_alpha: 24,
            j_max: 256,
            n_u: 256,
            method,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn point_dimer_reduces_to_kirchhoff_on_both_paths() {
        let sp = point_species(1e-3, 2e-2);
        let beam = BeamSpec::new(500.0, 0.08, 0.0, 0.4, 3e-3, 7e-4);
        let zero = VdwCoupling::new(0.0).unwrap();
        for method in [IntensityMethod::Spectral, IntensityMethod::DirectQuadrature] {
            let eng = DiffractionEngine::new(&sp, &beam, &geometry(), (zero, zero), reduced_quad(method)).unwrap();
            let i0 = eng.intensity(0, 0, 0).unwrap().value;
            let i1 = eng.intensity(1, 0, 0).unwrap().value;
            // open fraction 0.6 at normal incidence: I_0 = 0.36 and
            // I_1 / I_0 = sinc^2(0.6), up to the finite dimer extent
            assert_relative_eq!(i0, 0.36, max_relative = 5e-3);
            let x = 0.6 * std::f64::consts::PI;
            assert_relative_eq!(i1 / i0, (x.sin() / x).powi(2), max_relative = 5e-3);
        }
    }

    #[test]
    fn spectral_matches_direct_quadrature_for_elastic_orders() {
        let sp = solved_dd();
        let beam = BeamSpec::new(500.0, 0.08, 14.0, 0.4, 3e-3, 7e-4);
        let c3 = VdwCoupling::new(0.32).unwrap();
        let spec = DiffractionEngine::new(sp, &beam, &geometry(), (c3, c3), reduced_quad(IntensityMethod::Spectral)).unwrap();
        let direct = DiffractionEngine::new(sp, &beam, &geometry(), (c3, c3), reduced_quad(IntensityMethod::DirectQuadrature)).unwrap();
        for n in 0..=2 {
            let a = spec.intensity(n, 0, 0).unwrap().value;
            let b = direct.intensity(n, 0, 0).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 5e-3);
        }
    }

    #[test]
    fn selection_rule_vanishes_on_both_paths() {
        let sp = solved_dd();
        let beam = BeamSpec::new(500.0, 0.08, 14.0, 0.4, 3e-3, 7e-4);
        let c3 = VdwCoupling::new(0.32).unwrap();
        for method in [IntensityMethod::Spectral, IntensityMethod::DirectQuadrature] {
            let eng = DiffractionEngine::new(sp, &beam, &geometry(), (c3, c3), reduced_quad(method)).unwrap();
            let elastic = eng.intensity(0, 0, 0).unwrap().value;
            for n in 0..=2 {
                let odd = eng.intensity(n, 1, 0).unwrap().value;
                assert!(odd / elastic < 1e-12, "odd channel leak: {odd:e}");
            }
        }
    }

    #[test]
    fn direct_path_is_invariant_under_y_origin_shift() {
        let sp = point_species(1e-3, 2e-2);
        let beam = BeamSpec::new(500.0, 0.08, 14.0, 0.4, 3e-3, 7e-4);
        let c3 = VdwCoupling::new(0.32).unwrap();
        let base = reduced_quad(IntensityMethod::DirectQuadrature);
        // a grid-commensurate shift leaves the sampled set unchanged up to
        // a period wrap; intensities must be identical to rounding
        let shifted = QuadratureSpec {
            y_offset: 354.0 * 100.0 / base.n_y as f64,
            ..base
        };
        let e1 = DiffractionEngine::new(&sp, &beam, &geometry(), (c3, c3), base).unwrap();
        let e2 = DiffractionEngine::new(&sp, &beam, &geometry(), (c3, c3), shifted).unwrap();
        for n in 0..=2 {
            assert_relative_eq!(
                e1.intensity(n, 0, 0).unwrap().value,
                e2.intensity(n, 0, 0).unwrap().value,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn pi_00_is_one_half() {
        for &a in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_relative_eq!(pi_function(0, 0, 0, a).unwrap(), 0.5);
        }
    }

    #[test]
    fn pi_is_symmetric_and_has_parity() {
        for l in 0..=3u32 {
            for lp in 0..=3u32 {
                for m in 0..=(l.min(lp) as i32) {
                    for &a in &[0.2, 0.55, 0.91] {
                        let v = pi_function(l, lp, m, a).unwrap();
                        assert_relative_eq!(
                            v,
                            pi_function(lp, l, m, a).unwrap(),
                            max_relative = 1e-14,
                            epsilon = 1e-300
                        );
                        let sign = if (l + lp) % 2 == 0 { 1.0 } else { -1.0 };
                        assert_relative_eq!(
                            pi_function(l, lp, m, -a).unwrap(),
                            sign * v,
                            max_relative = 1e-14,
                            epsilon = 1e-300
                        );
                        assert_eq!(pi_function(l, lp, -m, a).unwrap(), v);
                    }
                }
            }
        }
    }

    #[test]
    fn pi_rejects_large_m() {
        assert!(pi_function(1, 2, 2, 0.0).is_err());
    }

    #[test]
    fn pi_diagonal_integrates_like_legendre_norm() {
        // dense-grid oracle for the integral of Pi_{ll}^0 over [-1, 1],
        // which equals 1/(2l+1) by Legendre normalization
        for l in 0..=3u32 {
            let n = 20_000;
            let mut oracle = 0.0;
            for i in 0..n {
                let a = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
                oracle += 0.5 * assoc_legendre(l, 0, a).powi(2) * 2.0 / n as f64;
            }
            let (nodes, weights) = gauss_legendre(32);
            let quad: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&a, &w)| w * pi_function(l, l, 0, a).unwrap())
                .sum();
            assert_relative_eq!(quad, 1.0 / (2.0 * l as f64 + 1.0), max_relative = 1e-6);
            assert_relative_eq!(quad, oracle, max_relative = 1e-6);
        }
    }
}
