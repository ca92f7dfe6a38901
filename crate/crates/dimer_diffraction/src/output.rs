//! CSV writers for the run artifacts. All floating-point columns use
//! scientific notation with nine significant digits.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::bound_states::DimerSpecies;
use crate::engine::SweepResult;
use crate::pattern::Pattern;

fn fmt(x: f64) -> String {
    format!("{:.8e}", x)
}

/// levels.csv: one row per bound state.
pub fn write_levels<W: Write>(mut w: W, species: &DimerSpecies, populations: &[(u32, f64)]) -> io::Result<()> {
    writeln!(w, "l,energy_mev,energy_uev,population")?;
    for s in &species.bound_states {
        let p = populations
            .iter()
            .find(|(l, _)| *l == s.l)
            .map(|(_, p)| *p)
            .unwrap_or(0.0);
        writeln!(
            w,
            "{},{},{},{}",
            s.l,
            fmt(s.energy),
            fmt(s.energy_uev()),
            fmt(p)
        )?;
    }
    Ok(())
}

/// transitions.csv: energy differences between all ordered level pairs.
pub fn write_transitions<W: Write>(mut w: W, species: &DimerSpecies) -> io::Result<()> {
    writeln!(w, "l_from,l_to,delta_e_uev")?;
    for from in &species.bound_states {
        for to in &species.bound_states {
            if from.l == to.l {
                continue;
            }
            writeln!(
                w,
                "{},{},{}",
                from.l,
                to.l,
                fmt((to.energy - from.energy) * crate::units::UEV_PER_MEV)
            )?;
        }
    }
    Ok(())
}

/// channels.csv: relative intensity, peak angle and status flags for
/// every (channel, order) combination of a sweep.
pub fn write_channels<W: Write>(mut w: W, sweep: &SweepResult) -> io::Result<()> {
    writeln!(
        w,
        "l_from,l_to,delta_e_uev,n,theta_deg,intensity,population,flags"
    )?;
    for e in &sweep.entries {
        let theta = e
            .theta
            .map(|t| fmt(t.to_degrees()))
            .unwrap_or_default();
        let mut flags = Vec::new();
        if e.flags.selection_rule_zero {
            flags.push("selection-rule-zero");
        }
        if e.flags.closed {
            flags.push("closed");
        }
        if e.flags.evanescent {
            flags.push("evanescent");
        }
        if e.flags.low_population {
            flags.push("low-population");
        }
        if e.flags.accuracy_warning {
            flags.push("accuracy-warning");
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            e.channel.l_from,
            e.channel.l_to,
            fmt(e.channel.delta_e * crate::units::UEV_PER_MEV),
            e.n,
            theta,
            fmt(e.intensity),
            fmt(e.population),
            flags.join("|")
        )?;
    }
    Ok(())
}

/// pattern.csv: the synthesized angular signal.
pub fn write_pattern<W: Write>(mut w: W, pattern: &Pattern) -> io::Result<()> {
    writeln!(w, "theta_deg,signal")?;
    for (t, s) in pattern.theta_deg.iter().zip(&pattern.signal) {
        writeln!(w, "{},{}", fmt(*t), fmt(*s))?;
    }
    Ok(())
}

/// peaks.csv: the individual Gaussian components of a pattern.
pub fn write_peaks<W: Write>(mut w: W, pattern: &Pattern) -> io::Result<()> {
    writeln!(w, "l_from,l_to,n,theta_deg,intensity,width_deg,unresolved")?;
    for p in &pattern.peaks {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.channel.l_from,
            p.channel.l_to,
            p.n,
            fmt(p.theta_deg),
            fmt(p.intensity),
            fmt(p.width_deg),
            p.unresolved
        )?;
    }
    Ok(())
}

/// pp_amplitudes.csv: point-particle Fourier coefficients per order.
pub fn write_pp_amplitudes<W: Write>(mut w: W, amplitudes: &[(i32, Complex64)]) -> io::Result<()> {
    writeln!(w, "n,re,im,probability")?;
    for &(n, c) in amplitudes {
        writeln!(w, "{},{},{},{}", n, fmt(c.re), fmt(c.im), fmt(c.norm_sqr()))?;
    }
    Ok(())
}

pub fn write_file<F>(dir: &Path, name: &str, f: F) -> io::Result<()>
where
    F: FnOnce(&mut io::BufWriter<std::fs::File>) -> io::Result<()>,
{
    std::fs::create_dir_all(dir)?;
    let file = std::fs::File::create(dir.join(name))?;
    let mut w = io::BufWriter::new(file);
    f(&mut w)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt(0.0), "0.00000000e0");
        assert_eq!(fmt(-1234.5), "-1.23450000e3");
    }

    #[test]
    fn pp_amplitudes_csv_shape() {
        let mut buf = Vec::new();
        write_pp_amplitudes(&mut buf, &[(0, Complex64::new(0.6, 0.0))]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,re,im,probability");
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,6.00000000e-1,"));
    }
}
