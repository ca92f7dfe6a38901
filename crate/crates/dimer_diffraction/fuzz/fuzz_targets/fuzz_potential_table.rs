//! Fuzzes the tabulated-potential reader: arbitrary input must yield
//! either a usable table or a structured error, never a panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

use dimer_diffraction::potential::RadialPotential;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = RadialPotential::parse_table(text) {
            // a parsed table must evaluate to finite values in range
            let _ = p.value(0.3);
            let _ = p.well_depth();
        }
    }
});
