use std::collections::BTreeMap;
use std::fs;

use proptest::prelude::*;
use serde_json::json;
use subdiag::files::{load_matrix, parse_circle_csv, FileError, MatrixFile, ReportFile};
use subdiag_core::matrix::C64;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn loads_the_documented_example() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "a.json", r#"{"n":2,"blocks":[1,1],"data":[[[1,0],[2,0]],[[3,0],[4,0]]]}"#);
    let (ctx, a) = load_matrix(&p).unwrap();
    assert_eq!(ctx.blocks().sizes(), &[1, 1]);
    assert_eq!(a[(0, 1)], C64::new(2.0, 0.0));
    assert_eq!(a[(1, 0)], C64::new(3.0, 0.0));
}

#[test]
fn blocks_must_cover_n() {
    let text = r#"{"n":3,"blocks":[1,1],"data":[[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]}"#;
    assert!(matches!(
        MatrixFile::parse(text).unwrap().validate(),
        Err(FileError::DimensionMismatch(_))
    ));
    let ragged = r#"{"n":2,"blocks":[2],"data":[[[1,0],[0,0]],[[0,0]]]}"#;
    assert!(matches!(
        MatrixFile::parse(ragged).unwrap().validate(),
        Err(FileError::DimensionMismatch(_))
    ));
}

#[test]
fn non_finite_entries_are_parse_errors() {
    let nan = r#"{"n":1,"blocks":[1],"data":[[[NaN,0]]]}"#;
    assert!(matches!(MatrixFile::parse(nan), Err(FileError::Parse(_))));
    let huge = r#"{"n":1,"blocks":[1],"data":[[[1e400,0]]]}"#;
    let r = MatrixFile::parse(huge).and_then(|m| m.validate().map(|_| ()));
    assert!(matches!(r, Err(FileError::Parse(_))));
    let f = MatrixFile {
        n: 1,
        blocks: vec![1],
        data: vec![vec![[f64::INFINITY, 0.0]]],
    };
    assert!(matches!(f.validate(), Err(FileError::Parse(_))));
}

#[test]
fn missing_file_is_a_read_error() {
    assert!(matches!(
        load_matrix(std::path::Path::new("/nonexistent/x.json")),
        Err(FileError::Read { .. })
    ));
}

#[test]
fn circle_csv_parsing() {
    let f = parse_circle_csv("1,0\n2, 0.5\n3,0\n4,-1\n").unwrap();
    assert_eq!(f.samples()[1], C64::new(2.0, 0.5));
    assert!(parse_circle_csv("1,0\n2,0\n3,0\n").is_err());
    assert!(parse_circle_csv("1,0\nx,0\n3,0\n4,0\n").is_err());
    assert!(parse_circle_csv("1,0\nNaN,0\n3,0\n4,0\n").is_err());
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let mut r = ReportFile::new("det", json!({}), 0);
    r.results = json!({ "x": 0.1 });
    let text = r.to_json();
    assert!(text.contains("1.0000000000000001e-1"), "{text}");
}

#[test]
fn infinite_margins_survive_as_null() {
    let mut r = ReportFile::new("campaign", json!({}), 1);
    r.margins.insert("a".into(), f64::NEG_INFINITY);
    let text = r.to_json();
    assert!(text.contains("\"a\": null"));
    assert_eq!(ReportFile::parse(&text).unwrap(), r);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

proptest! {
    #[test]
    fn reports_round_trip(
        values in prop::collection::vec(finite(), 0..20),
        margins in prop::collection::btree_map("[a-z_.]{1,12}", finite(), 0..8),
        seed in any::<u64>(),
        name in "[a-z-]{1,12}",
    ) {
        let mut r = ReportFile::new(&name, json!({ "n": 3, "list": values.clone() }), seed);
        r.results = json!({ "values": values, "flag": true, "nested": { "v": values.first() } });
        r.margins = margins.into_iter().collect::<BTreeMap<_, _>>();
        let text = r.to_json();
        let back = ReportFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn matrix_files_round_trip(data in prop::collection::vec((finite(), finite()), 9)) {
        let rows: Vec<Vec<[f64; 2]>> = data.chunks(3).map(|c| c.iter().map(|&(a, b)| [a, b]).collect()).collect();
        let f = MatrixFile { n: 3, blocks: vec![1, 2], data: rows };
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(MatrixFile::parse(&text).unwrap(), f.clone());
        let (_, a) = f.validate().unwrap();
        prop_assert_eq!(MatrixFile::from_matrix(&a, &[1, 2]), f);
    }
}
