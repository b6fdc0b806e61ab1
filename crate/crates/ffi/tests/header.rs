//! The generated C header must exist and describe the exported surface.

#[test]
fn generated_header_covers_the_abi() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("qmarkov.h");
    let text = std::fs::read_to_string(&header)
        .unwrap_or_else(|e| panic!("missing generated header {}: {e}", header.display()));
    for symbol in [
        "QmStatus",
        "QmState",
        "qm_state_parse",
        "qm_state_dim",
        "qm_state_free",
        "qm_markovize",
        "qm_semigroup",
        "qm_verify",
        "qm_onplus_csv",
        "qm_last_error",
        "qm_string_free",
    ] {
        assert!(text.contains(symbol), "header misses {symbol}");
    }
    assert!(text.contains("QMARKOV_H"));
}
