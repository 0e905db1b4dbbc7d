#![no_main]
use libfuzzer_sys::fuzz_target;

use carsurv::trial_data::ObservedTrial;

// Dataset ingestion must never panic; anything that parses must survive
// a dump/ingest round trip.
fuzz_target!(|data: &[u8]| {
    if let Ok(trial) = ObservedTrial::read_csv(data) {
        let mut buffer = Vec::new();
        if trial.write_csv(&mut buffer).is_ok() {
            let again = ObservedTrial::read_csv(buffer.as_slice()).expect("round trip parses");
            assert_eq!(trial, again);
        }
    }
});
