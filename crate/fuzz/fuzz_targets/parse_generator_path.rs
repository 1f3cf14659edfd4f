#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(path) = zeno::lindblad::GeneratorPath::parse(text) {
            let _ = zeno::lindblad::path_eval(&path, path.horizon() / 2.0);
        }
    }
});
