use std::fs;
use std::path::PathBuf;

use fracsmo::config::{load_config, ConfigErrorKind, ScenarioConfig};

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/paper_example.cfg")
}

/// Set FRACSMO_UPDATE_GOLDEN=1 to rewrite the expected expansion.
#[test]
fn preset_expansion_matches_golden() {
    let text = load_config("preset = \"paper-example\"\n").unwrap().to_text();
    if std::env::var_os("FRACSMO_UPDATE_GOLDEN").is_some() {
        fs::write(golden_path(), &text).unwrap();
    }
    let golden = fs::read_to_string(golden_path()).unwrap();
    assert_eq!(text, golden);
}

#[test]
fn golden_file_loads_back() {
    let golden = fs::read_to_string(golden_path()).unwrap();
    let c = load_config(&golden).unwrap();
    assert_eq!(
        c.scenario().unwrap(),
        ScenarioConfig::paper_example().scenario().unwrap()
    );
}

#[test]
fn written_out_example_equals_preset() {
    let text = fs::read_to_string(repo_path("configs/paper_example.cfg")).unwrap();
    let c = load_config(&text).unwrap();
    assert_eq!(
        c.scenario().unwrap(),
        ScenarioConfig::paper_example().scenario().unwrap()
    );
    assert_eq!(c.band(), 0.1);
}

#[test]
fn shipped_configs_load() {
    for name in ["paper_example", "zero_gains", "two_state", "user_bounds", "unstable"] {
        let path = repo_path(&format!("configs/{name}.cfg"));
        let text = fs::read_to_string(&path).unwrap();
        let c = load_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        c.scenario().unwrap();
    }
}

#[test]
fn errors_point_at_the_offending_line() {
    let text = "preset = \"paper-example\"\n\n[plant]\n# comment\nx0 = 0.1, 0.1\n";
    let e = load_config(text).unwrap_err();
    assert_eq!(e.line, 5);
    assert_eq!(
        e.kind,
        ConfigErrorKind::Dimension {
            key: "plant.x0".into(),
            expected: 3,
            got: 2
        }
    );
    let e = load_config("preset = \"paper-example\"\n[sim]\nh = 1e-3x\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert!(matches!(e.kind, ConfigErrorKind::BadNumber { .. }));
    assert_eq!(e.to_string(), "line 3: 'sim.h': malformed number '1e-3x'");
}

#[test]
fn comments_and_quoted_hashes() {
    let text = "preset = \"paper-example\"   # base\n[plant]\nfault = \"0.1\" # constant fault\n";
    let c = load_config(text).unwrap();
    assert_eq!(c.plant.fault, "0.1");
}
