#![no_main]

use leo_pla::signal::{npsds_theoretical, parse_psd_table, NominalPsd};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = parse_psd_table(data) else { return };
    let period = rows.iter().map(|r| r.0).fold(0.0, f64::max) + 1.0;
    if let Ok(psd) = NominalPsd::from_shape(rows, period, 1.0, 1.0) {
        let v = npsds_theoretical(&psd, 0.37 * period);
        assert!(v.is_nan() || v >= 1.0);
    }
});
