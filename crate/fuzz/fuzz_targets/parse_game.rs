#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(game) = geomatch::io::parse_game(text) {
        let again = geomatch::io::parse_game(&geomatch::io::game_to_json(&game)).expect("written games parse");
        assert_eq!(again, game);
    }
});
