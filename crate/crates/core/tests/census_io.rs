use abelian_height::census::{self, CensusConfig, Format, CSV_HEADER};

#[test]
fn re_emission_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let report = census::run_census(&CensusConfig { verify: true, ..CensusConfig::genus2(3, &[6]) }).unwrap();
    for format in [Format::Csv, Format::Json] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        census::emit_report(&report, format, &a).unwrap();
        census::emit_report(&report, format, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = CensusConfig { samples: Some(50), seed: 5, verify: true, ..CensusConfig::genus2(7, &[5, 6]) };
    let a = census::run_census(&cfg).unwrap();
    let b = census::run_census(&cfg).unwrap();
    assert!(a.same_content(&b));
    let other = census::run_census(&CensusConfig { seed: 6, ..cfg }).unwrap();
    assert!(!a.same_content(&other));
}

#[test]
fn rows_revalidate_after_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    let report = census::run_census(&CensusConfig { verify: true, ..CensusConfig::genus1(5) }).unwrap();
    census::emit_report(&report, Format::Csv, &path).unwrap();
    let rows = census::read_csv(&path, 1).unwrap();
    assert_eq!(rows, report.rows);
    rows.iter().for_each(|r| r.check_invariants().unwrap());
}

#[test]
fn header_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "p,f,rank\n3,x^5+1,0\n").unwrap();
    assert!(census::read_csv(&path, 1).is_err());
    std::fs::write(&path, format!("{CSV_HEADER}\n")).unwrap();
    assert!(census::read_csv(&path, 1).unwrap().is_empty());
}

#[test]
fn missing_directory_reports_path() {
    let report = census::run_census(&CensusConfig::genus1(3)).unwrap();
    let err = census::emit_report(&report, Format::Csv, std::path::Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
}
