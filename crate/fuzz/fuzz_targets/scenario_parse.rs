#![no_main]

use libfuzzer_sys::fuzz_target;
use rairs::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sc) = Scenario::parse(text) {
        // anything accepted must survive a round trip and a layout build
        let again = Scenario::parse(&sc.to_text()).expect("serialized scenario reparses");
        assert_eq!(again, sc);
        if sc.geometry.rows * sc.geometry.cols <= 10_000 {
            let _ = sc.layout();
        }
    }
});
