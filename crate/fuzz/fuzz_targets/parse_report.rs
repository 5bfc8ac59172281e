#![no_main]

use libfuzzer_sys::fuzz_target;
use qce_core::report::ReportDocument;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = ReportDocument::from_json(data) {
        let bytes = doc.to_json().unwrap();
        let again = ReportDocument::from_json(&bytes).unwrap();
        assert_eq!(again.to_json().unwrap(), bytes);
    }
});
