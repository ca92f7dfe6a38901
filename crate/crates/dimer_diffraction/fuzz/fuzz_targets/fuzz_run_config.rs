//! Fuzzes the TOML run-configuration parser: arbitrary input must yield
//! either a validated config or a structured error, never a panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

use dimer_diffraction::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = RunConfig::parse(text);
    }
});
