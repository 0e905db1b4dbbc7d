#![no_main]
use libfuzzer_sys::fuzz_target;

// Parsing and validating a run configuration must never panic, whatever
// bytes arrive.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = carsurv::config::RunConfig::from_toml_str(text) {
        let _ = config.to_sim_config();
    }
});
