#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = geomatch::io::read_trace_csv(data) {
        for player in 0..table.shape().len() {
            table.player_path(player).expect("accepted traces expose every player");
        }
    }
});
