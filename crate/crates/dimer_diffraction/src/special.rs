//! Special functions and quadrature primitives: Gauss-Legendre rules,
//! associated Legendre polynomials, spherical harmonics and spherical
//! Bessel functions.

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are computed by Newton iteration on the Legendre polynomial and
/// mirrored so that the rule is exactly symmetric about the origin.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Associated Legendre polynomial P_l^m(x) for m >= 0, without the
/// Condon-Shortley phase.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    assert!(m <= l, "require m <= l");
    assert!((-1.0..=1.0).contains(&x), "argument outside [-1, 1]");
    // P_m^m = (2m-1)!! (1-x^2)^{m/2}
    let mut pmm = 1.0;
    if m > 0 {
        let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * somx2;
            fact += 2.0;
        }
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        let llf = ll as f64;
        let mf = m as f64;
        pll = ((2.0 * llf - 1.0) * x * pmmp1 - (llf + mf - 1.0) * pmm) / (llf - mf);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Polar part of the complex spherical harmonic, including the
/// Condon-Shortley phase, so that Y_l^m(theta, phi) = theta_lm(cos theta) e^{i m phi}.
pub fn ylm_theta(l: u32, m: i32, cos_theta: f64) -> f64 {
    let ma = m.unsigned_abs();
    assert!(ma <= l);
    let norm = ((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI) * factorial(l - ma)
        / factorial(l + ma))
    .sqrt();
    let p = assoc_legendre(l, ma, cos_theta);
    // Condon-Shortley for positive m; Y_{l,-m} = (-1)^m conj(Y_{l,m})
    let sign = if m > 0 && m % 2 != 0 { -1.0 } else { 1.0 };
    sign * norm * p
}

/// Complex spherical harmonic Y_l^m evaluated from (cos theta, phi).
pub fn spherical_harmonic(l: u32, m: i32, cos_theta: f64, phi: f64) -> Complex64 {
    let theta_part = ylm_theta(l, m, cos_theta);
    Complex64::from_polar(1.0, m as f64 * phi) * theta_part
}

/// Spherical Bessel function j_l(x) for small l.
///
/// Uses the power series near the origin and downward (Miller) recurrence
/// elsewhere; upward recurrence is unstable for x < l.
pub fn spherical_bessel_j(l: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    if x < 1e-4 * (1.0 + l as f64) {
        // j_l(x) ~ x^l / (2l+1)!! (1 - x^2/(2(2l+3)))
        let mut dfact = 1.0;
        let mut k = 1.0;
        for _ in 0..l {
            k += 2.0;
            dfact *= k;
        }
        return x.powi(l as i32) / dfact * (1.0 - x * x / (2.0 * (2.0 * l as f64 + 3.0)));
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    if x > l as f64 * 2.0 + 10.0 {
        // stable upward recurrence
        let mut jm = j0;
        let mut j = x.sin() / (x * x) - x.cos() / x;
        for k in 1..l {
            let next = (2.0 * k as f64 + 1.0) / x * j - jm;
            jm = j;
            j = next;
        }
        return j;
    }
    // downward recurrence from a safely high order, normalized by j0
    let start = l + 16 + x as u32;
    let mut jp = 0.0_f64;
    let mut j = 1e-30_f64;
    let mut result = 0.0;
    for k in (0..=start).rev() {
        let jm = (2.0 * k as f64 + 3.0) / x * j - jp;
        jp = j;
        j = jm;
        if k == l {
            result = j;
        }
        // rescale to avoid overflow
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
        }
    }
    result * j0 / j
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
