//! Point-particle transmission through a trapezoidal-bar grating in the
//! eikonal approximation: geometric shadowing, van der Waals phase shift
//! and Fourier coefficients over one period.

use num_complex::Complex64;

use crate::error::GratingError;
use crate::special::{gauss_legendre, KahanComplex};
use crate::units::HBAR;

/// Trapezoidal-bar transmission grating: period d, slit width s, bar
/// thickness t [nm] and wedge angle beta [deg].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingGeometry {
    pub period: f64,
    pub slit: f64,
    pub thickness: f64,
    pub wedge_deg: f64,
}

impl GratingGeometry {
    pub fn new(period: f64, slit: f64, thickness: f64, wedge_deg: f64) -> Result<Self, GratingError> {
        if !(slit > 0.0 && slit < period) {
            return Err(GratingError::BadGeometry(format!(
                "require 0 < slit < period, got slit = {slit}, period = {period}"
            )));
        }
        if !(thickness > 0.0) {
            return Err(GratingError::BadGeometry(format!(
                "bar thickness must be positive, got {thickness}"
            )));
        }
        if !(0.0..90.0).contains(&wedge_deg) {
            return Err(GratingError::BadGeometry(format!(
                "wedge angle must be in [0, 90) degrees, got {wedge_deg}"
            )));
        }
        Ok(Self {
            period,
            slit,
            thickness,
            wedge_deg,
        })
    }

    pub fn wedge_rad(&self) -> f64 {
        self.wedge_deg.to_radians()
    }
}

/// Van der Waals C3 coefficient of one constituent [meV nm^3];
/// zero means hard-wall bars only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdwCoupling {
    pub c3: f64,
}

impl VdwCoupling {
    pub fn new(c3: f64) -> Result<Self, GratingError> {
        if c3 < 0.0 {
            return Err(GratingError::BadGeometry(format!(
                "C3 must be non-negative, got {c3}"
            )));
        }
        Ok(Self { c3 })
    }
}

/// A single constituent in the beam: mass [amu], speed v' [nm/ps] and
/// incidence angle theta' [rad] in the plane perpendicular to the bars.
#[derive(Debug, Clone, Copy)]
pub struct ConstituentBeam {
    pub mass_amu: f64,
    pub speed: f64,
    pub incidence: f64,
}

impl ConstituentBeam {
    pub fn new(mass_amu: f64, speed: f64, incidence: f64) -> Self {
        assert!(speed > 0.0, "speed must be positive");
        assert!(incidence.abs() < std::f64::consts::FRAC_PI_2);
        Self {
            mass_amu,
            speed,
            incidence,
        }
    }

    /// Momentum components (p_x, p_y) [meV ps / nm].
    pub fn momentum(&self) -> (f64, f64) {
        let p = crate::units::mass_internal(self.mass_amu) * self.speed;
        (p * self.incidence.cos(), p * self.incidence.sin())
    }
}

/// The y interval within one period (centered on a slit) that remains
/// open at incidence theta [rad]: the geometric slit minus the shadow of
/// the adjacent bar. Empty (None) if fully shadowed.
pub fn open_interval(geometry: &GratingGeometry, theta: f64) -> Option<(f64, f64)> {
    let beta = geometry.wedge_rad();
    let t = theta.abs();
    let shadow = if t > beta {
        geometry.thickness * (t.tan() - beta.tan())
    } else {
        0.0
    };
    let half = geometry.slit / 2.0;
    let (lo, hi) = if theta >= 0.0 {
        (-half + shadow, half)
    } else {
        (-half, half - shadow)
    };
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// Horizontal wall distances at entry/exit of the grating slab for both
/// slit walls, given y inside the slit and incidence theta >= 0.
fn wall_distances(geometry: &GratingGeometry, theta: f64, y: f64) -> [f64; 4] {
    let beta = geometry.wedge_rad();
    let s = geometry.slit;
    let t = geometry.thickness;
    let xi11 = s / 2.0 - y;
    let xi12 = s / 2.0 + t * (beta.tan() + theta.tan()) - y;
    let xi21 = s / 2.0 + t * (beta.tan() - theta.tan()) + y;
    let xi22 = s / 2.0 + y;
    [xi11, xi12, xi21, xi22]
}

/// Analytic eikonal phase shift for theta > beta (closed form of the
/// slab line integral). y is the slit coordinate, mirrored internally for
/// negative incidence.
pub fn phase_shift_analytic(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    speed: f64,
    theta: f64,
    y: f64,
) -> f64 {
    let (theta, y) = if theta >= 0.0 { (theta, y) } else { (-theta, -y) };
    let beta = geometry.wedge_rad();
    debug_assert!(theta > beta, "analytic branch requires theta > beta");
    let [xi11, xi12, xi21, xi22] = wall_distances(geometry, theta, y);
    let pre = coupling.c3 / (2.0 * HBAR * speed * theta.cos().powi(4));
    pre * ((xi11.powi(-2) - xi12.powi(-2)) / (theta.tan() + beta.tan())
        + (xi21.powi(-2) - xi22.powi(-2)) / (theta.tan() - beta.tan()))
}

/// Numerical evaluation of the eikonal line integral over the attractive
/// potential of the two bars confining the slit, valid for any incidence
/// with |theta| < 90 deg. Each bar is modeled as a half-space slab bounded
/// by its slit-facing wall, with the -C3/L^3 surface potential.
pub fn phase_shift_line_integral(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    speed: f64,
    theta: f64,
    y: f64,
) -> f64 {
    let (theta, y) = if theta >= 0.0 { (theta, y) } else { (-theta, -y) };
    let beta = geometry.wedge_rad();
    let [xi11, _, _, xi22] = wall_distances(geometry, theta, y);
    let t = geometry.thickness;
    let c1 = beta.tan() + theta.tan(); // wall at +s/2 recedes along the slab
    let c2 = beta.tan() - theta.tan(); // wall at -s/2
    let pre = coupling.c3 / (HBAR * speed * theta.cos().powi(4));

    // integral over the slab depth x in [0, t] of 1/(xi0 + c x)^3,
    // composite Gauss-Legendre with panels graded toward small distances
    let integrate = |xi0: f64, c: f64| -> f64 {
        let (nodes, weights) = gauss_legendre(16);
        let mut total = 0.0;
        let n_panels = 64;
        // grade panel boundaries quadratically toward the end where the
        // distance xi0 + c x is smallest
        let toward_zero = c < 0.0;
        let mut bounds = Vec::with_capacity(n_panels + 1);
        for i in 0..=n_panels {
            let f = i as f64 / n_panels as f64;
            let g = f * f;
            bounds.push(if toward_zero { t * (1.0 - g) } else { t * g });
        }
        if toward_zero {
            bounds.reverse();
        }
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&xn, &wn) in nodes.iter().zip(&weights) {
                let x = mid + half * xn;
                let xi = xi0 + c * x;
                total += wn * half / (xi * xi * xi);
            }
        }
        total
    };

    pre * (integrate(xi11, c1) + integrate(xi22, c2))
}

/// Eikonal phase shift Phi(y): closed form for |theta| > beta, numerical
/// line integral otherwise. y must lie strictly inside the open interval.
pub fn phase_shift(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    speed: f64,
    theta: f64,
    y: f64,
) -> Result<f64, GratingError> {
    let (lo, hi) = open_interval(geometry, theta).ok_or(GratingError::FullyShadowed)?;
    if !(y > lo && y < hi) {
        return Err(GratingError::OutsideOpenInterval { y, lo, hi });
    }
    if coupling.c3 == 0.0 {
        return Ok(0.0);
    }
    if theta.abs() > geometry.wedge_rad() {
        Ok(phase_shift_analytic(geometry, coupling, speed, theta, y))
    } else {
        Ok(phase_shift_line_integral(geometry, coupling, speed, theta, y))
    }
}

/// Complex point-particle transmission tau^pp(y) for y within one grating
/// period: zero on bars and in shadow, exp(i Phi) in the open region.
/// `edge_band` excludes a strip next to each wall where Phi diverges;
/// it is ignored when C3 = 0.
pub fn transmission_pp(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    beam: &ConstituentBeam,
    y: f64,
    edge_band: f64,
) -> Complex64 {
    let d = geometry.period;
    let y = y - d * (y / d).round(); // wrap to [-d/2, d/2]
    let theta = beam.incidence;
    let Some((lo, hi)) = open_interval(geometry, theta) else {
        return Complex64::new(0.0, 0.0);
    };
    let band = if coupling.c3 > 0.0 { edge_band } else { 0.0 };
    if y <= lo + band || y >= hi - band {
        return Complex64::new(0.0, 0.0);
    }
    let phi = phase_shift(geometry, coupling, beam.speed, theta, y).unwrap_or(0.0);
    Complex64::from_polar(1.0, phi)
}

/// Quadrature abscissas and weights covering the effective open interval,
/// graded toward the slit walls where the phase oscillates rapidly.
fn open_interval_panels(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    speed: f64,
    theta: f64,
    edge_band: f64,
    max_order: i32,
) -> Vec<(f64, f64)> {
    let Some((lo, hi)) = open_interval(geometry, theta) else {
        return Vec::new();
    };
    let band = if coupling.c3 > 0.0 { edge_band } else { 0.0 };
    let (a, b) = (lo + band, hi - band);
    if a >= b {
        return Vec::new();
    }

    // interior panel cap from the Fourier oscillation scale
    let cap = (geometry.period / (4.0 * (max_order.abs() as f64 + 1.0))).min((b - a) / 16.0);

    // local phase-gradient scale |dPhi/dxi| ~ 2 A / xi^3
    let beta = geometry.wedge_rad();
    let theta_abs = theta.abs();
    let a_coeff = if coupling.c3 > 0.0 {
        let pre = coupling.c3 / (2.0 * HBAR * speed * theta_abs.cos().powi(4));
        let denom = (theta_abs.tan() + beta.tan()).max(theta_abs.tan() - beta.tan()).max(0.05);
        pre / denom
    } else {
        0.0
    };
    let width_at = |dist_to_wall: f64| -> f64 {
        if a_coeff == 0.0 {
            cap
        } else {
            // keep the phase span per panel modest for 16-point rules
            (8.0 * dist_to_wall.powi(3) / a_coeff).max(1e-3).min(cap.max(2e-3))
        }
    };

    let mut bounds = vec![a];
    let mut x = a;
    loop {
        let dist = (x - lo).min(hi - x).max(band.max(1e-6));
        let w = width_at(dist);
        x += w;
        if x >= b - 1e-12 {
            break;
        }
        bounds.push(x);
    }
    bounds.push(b);

    let (nodes, weights) = gauss_legendre(16);
    let mut out = Vec::with_capacity((bounds.len() - 1) * 16);
    for w in bounds.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        for (&xn, &wn) in nodes.iter().zip(&weights) {
            out.push((mid + half * xn, wn * half));
        }
    }
    out
}

/// Fourier coefficients c_n = (1/d) integral over one period of
/// exp(-i 2 pi n Y / d) tau^pp(Y) dY, for every order in `orders`.
pub fn pp_diffraction_amplitudes(
    geometry: &GratingGeometry,
    coupling: &VdwCoupling,
    beam: &ConstituentBeam,
    orders: &[i32],
    edge_band: f64,
) -> Vec<(i32, Complex64)> {
    let max_order = orders.iter().copied().map(i32::abs).max().unwrap_or(0);
    let panels = open_interval_panels(
        geometry,
        coupling,
        beam.speed,
        beam.incidence,
        edge_band,
        max_order,
    );
    let taus: Vec<(f64, f64, Complex64)> = panels
        .iter()
        .map(|&(y, w)| {
            let tau = if coupling.c3 == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                let phi = phase_shift(geometry, coupling, beam.speed, beam.incidence, y)
                    .unwrap_or(0.0);
                Complex64::from_polar(1.0, phi)
            };
            (y, w, tau)
        })
        .collect();

    let d = geometry.period;
    let n_min = orders.iter().copied().min().unwrap_or(0);
    let n_max = orders.iter().copied().max().unwrap_or(0);
    // accumulate the contiguous order range per node with a phase-rotation
    // recurrence, then pick the requested orders
    let span = (n_max - n_min) as usize + 1;
    let mut acc = vec![KahanComplex::default(); span];
    for &(y, w, tau) in &taus {
        let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * y / d);
        let mut factor = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * n_min as f64 * y / d);
        let base = tau * w;
        for a in acc.iter_mut() {
            a.add(base * factor);
            factor *= step;
        }
    }
    orders
        .iter()
        .map(|&n| (n, acc[(n - n_min) as usize].value() / d))
        .collect()
}

/// Hoinkes' rule: C3 scales with the static electric dipole
/// polarizability of the probe particle.
pub fn estimate_c3_hoinkes(
    reference_c3: f64,
    reference_polarizability: f64,
    target_polarizability: f64,
) -> f64 {
    assert!(reference_c3 > 0.0 && reference_polarizability > 0.0 && target_polarizability > 0.0);
    reference_c3 * target_polarizability / reference_polarizability
}
