mod common;

use common::oracle::{check_field, small_fields, OracleReport};

#[test]
fn engine_matches_reference_on_tiny_boards_depth_5() {
    // Boards up to 2x2 are cheap enough to go one step deeper.
    let mut report = OracleReport::default();
    for field in small_fields(2, 2, 2) {
        check_field(&field, 5, &mut report);
    }
    assert!(report.disagreements.is_empty(), "{:#?}", report.disagreements);
    assert!(report.steps > 100_000);
}

#[test]
fn engine_matches_reference_on_one_row_boards() {
    let mut report = OracleReport::default();
    for field in small_fields(1, 3, 2) {
        check_field(&field, 6, &mut report);
    }
    assert!(report.disagreements.is_empty(), "{:#?}", report.disagreements);
}
