//! Angular diffraction pattern synthesis: Gaussian peaks of empirically
//! parametrized width placed at the kinematic peak angles.

use crate::engine::{SweepEntry, SweepResult, TransitionChannel};

/// One rendered peak of the synthesized pattern.
#[derive(Debug, Clone)]
pub struct Peak {
    pub channel: TransitionChannel,
    pub n: i32,
    /// Peak center [deg].
    pub theta_deg: f64,
    /// Integrated relative intensity.
    pub intensity: f64,
    /// Gaussian width parameter w_n [deg].
    pub width_deg: f64,
    /// Set when this peak overlaps its nearest rendered neighbor closer
    /// than the sum of their widths.
    pub unresolved: bool,
}

/// Synthesized angular pattern on a uniform theta grid [deg].
#[derive(Debug, Clone)]
pub struct Pattern {
    pub theta_deg: Vec<f64>,
    pub signal: Vec<f64>,
    pub peaks: Vec<Peak>,
}

/// Order-dependent Gaussian width [deg]:
/// w_n = w_0 sqrt(1 + (dw n / w_0)^2), from the velocity spread of the
/// incident beam acting on the dispersive orders.
pub fn peak_width(n: i32, w0_deg: f64, dw_deg: f64) -> f64 {
    let x = dw_deg * n as f64 / w0_deg;
    w0_deg * (1.0 + x * x).sqrt()
}

/// Renders the sweep entries as a sum of normalized Gaussians,
/// I_n / (sqrt(pi) w_n) exp(-(theta - theta_n)^2 / w_n^2).
///
/// Closed and evanescent combinations carry no angle and are skipped;
/// de-excitation channels are rendered only when the initial-state
/// population fraction exceeds `population_floor`.
pub fn synthesize(
    sweep: &SweepResult,
    w0_deg: f64,
    dw_deg: f64,
    theta_min_deg: f64,
    theta_max_deg: f64,
    n_points: usize,
    population_floor: f64,
) -> Pattern {
    assert!(theta_max_deg > theta_min_deg);
    assert!(n_points >= 2);
    assert!(w0_deg > 0.0);

    let rendered: Vec<&SweepEntry> = sweep
        .entries
        .iter()
        .filter(|e| e.theta.is_some())
        .filter(|e| e.channel.delta_e >= 0.0 || e.population > population_floor)
        .collect();

    let mut peaks: Vec<Peak> = rendered
        .iter()
        .map(|e| Peak {
            channel: e.channel,
            n: e.n,
            theta_deg: e.theta.unwrap().to_degrees(),
            intensity: e.intensity,
            width_deg: peak_width(e.n, w0_deg, dw_deg),
            unresolved: false,
        })
        .collect();
    flag_unresolved(&mut peaks);

    let theta_deg: Vec<f64> = (0..n_points)
        .map(|i| {
            theta_min_deg + (theta_max_deg - theta_min_deg) * i as f64 / (n_points - 1) as f64
        })
        .collect();
    let signal = theta_deg
        .iter()
        .map(|&th| {
            let mut s = 0.0;
            for p in &peaks {
                let u = (th - p.theta_deg) / p.width_deg;
                if u.abs() < 40.0 {
                    s += p.intensity / (std::f64::consts::PI.sqrt() * p.width_deg)
                        * (-u * u).exp();
                }
            }
            s
        })
        .collect();

    Pattern {
        theta_deg,
        signal,
        peaks,
    }
}

/// Index pairs of distinct spectral lines whose separation is below the
/// sum of their width parameters. Peaks with the same order and the same
/// energy transfer (e.g. the degenerate elastic channels of all initial
/// states) form a single physical line and are not compared.
pub fn resolvability_report(peaks: &[Peak]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..peaks.len() {
        for j in (i + 1)..peaks.len() {
            if peaks[i].n == peaks[j].n
                && peaks[i].channel.delta_e == peaks[j].channel.delta_e
            {
                continue;
            }
            if (peaks[i].theta_deg - peaks[j].theta_deg).abs()
                < peaks[i].width_deg + peaks[j].width_deg
            {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Marks every peak that appears in an overlapping pair as unresolved.
fn flag_unresolved(peaks: &mut [Peak]) {
    for (i, j) in resolvability_report(peaks) {
        peaks[i].unresolved = true;
        peaks[j].unresolved = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EntryFlags;
    use approx::assert_relative_eq;

    fn entry(l_from: u32, l_to: u32, de: f64, n: i32, theta_deg: f64, i: f64, pop: f64) -> SweepEntry {
        SweepEntry {
            channel: TransitionChannel {
                l_from,
                l_to,
                delta_e: de,
            },
            n,
            intensity: i,
            theta: Some(theta_deg.to_radians()),
            population: pop,
            flags: EntryFlags::default(),
        }
    }

    #[test]
    fn width_grows_with_order() {
        let w0 = 3e-3;
        let dw = 7e-4;
        assert_relative_eq!(peak_width(0, w0, dw), w0);
        assert!(peak_width(5, w0, dw) > peak_width(1, w0, dw));
        assert_relative_eq!(peak_width(-3, w0, dw), peak_width(3, w0, dw));
        // asymptotically linear in |n|
        assert_relative_eq!(peak_width(10_000, w0, dw), 1e4 * dw, max_relative = 1e-3);
    }

    #[test]
    fn gaussian_area_matches_intensity() {
        let sweep = SweepResult {
            entries: vec![entry(0, 0, 0.0, 0, 14.0, 0.8, 1.0)],
            elastic_zeroth: 1.0,
        };
        let pat = synthesize(&sweep, 3e-3, 7e-4, 13.9, 14.1, 20_001, 1e-4);
        let h = pat.theta_deg[1] - pat.theta_deg[0];
        let area: f64 = pat.signal.iter().sum::<f64>() * h;
        assert_relative_eq!(area, 0.8, max_relative = 1e-6);
    }

    #[test]
    fn low_population_deexcitation_is_dropped() {
        let sweep = SweepResult {
            entries: vec![
                entry(0, 1, 0.4, 0, 14.3, 0.5, 0.9),
                entry(1, 0, -0.4, 0, 13.7, 0.5, 1e-6),
            ],
            elastic_zeroth: 1.0,
        };
        let pat = synthesize(&sweep, 3e-3, 7e-4, 13.0, 15.0, 101, 1e-4);
        assert_eq!(pat.peaks.len(), 1);
        assert!(pat.peaks[0].channel.delta_e > 0.0);
    }

    #[test]
    fn overlapping_peaks_are_flagged() {
        let sweep = SweepResult {
            entries: vec![
                entry(0, 0, 0.0, 0, 14.0, 0.5, 1.0),
                entry(0, 2, 0.4, 0, 14.001, 0.1, 1.0),
                entry(0, 0, 0.0, 1, 14.5, 0.3, 1.0),
            ],
            elastic_zeroth: 1.0,
        };
        let pat = synthesize(&sweep, 3e-3, 7e-4, 13.0, 15.0, 101, 1e-4);
        assert!(pat.peaks[0].unresolved);
        assert!(pat.peaks[1].unresolved);
        assert!(!pat.peaks[2].unresolved);
    }
}
