#![no_main]

use libfuzzer_sys::fuzz_target;
use rairs::io::read_plan_rows;
use rairs::oracle::validate_plan_rows;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_plan_rows(data) {
        let _ = validate_plan_rows(&rows, None);
        let _ = validate_plan_rows(&rows, Some(10));
    }
});
