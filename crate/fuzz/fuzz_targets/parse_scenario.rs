#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = zeno::harness::parse_scenario(text) {
            // Anything accepted must survive a round trip.
            let again = zeno::harness::ScenarioConfig::from_json(&cfg.to_json()).expect("re-validate");
            assert_eq!(again.name, cfg.name);
        }
    }
});
