#![no_main]

use libfuzzer_sys::fuzz_target;
use netobs::structure::parse_edge_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(edges) = parse_edge_list(text) {
        let again = parse_edge_list(&edges.to_text()).expect("printed edge list parses");
        assert_eq!(again, edges);
        let _ = edges.to_structure();
    }
});
