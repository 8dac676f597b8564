mod common;

use std::path::Path;

use ea4rca::cli::run;
use ea4rca::workloads::App;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["ea4rca"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn fixture(app: App) -> String {
    common::fixture_path(app).display().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_texts_match_golden() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help");
    let top = cli(&["--help"]);
    assert_eq!(top.code, 0);
    assert_eq!(top.stdout, std::fs::read_to_string(golden.join("ea4rca.txt")).unwrap());
    for sub in ["validate", "generate", "simulate", "calibrate", "report", "plot", "template", "serve"] {
        let o = cli(&[sub, "--help"]);
        assert_eq!(o.code, 0, "{sub}");
        let want = std::fs::read_to_string(golden.join(format!("{sub}.txt"))).unwrap();
        assert_eq!(o.stdout, want, "{sub} --help changed");
    }
}

#[test]
fn validate_exit_codes() {
    let ok = cli(&["validate", &fixture(App::Mm)]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.contains("384/400"), "{}", ok.stdout);

    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture(App::Mm)).unwrap()).unwrap();
    v["design"]["dus"][0].as_object_mut().unwrap().remove("amc");
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, v.to_string()).unwrap();
    let o = cli(&["validate", p(&broken)]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    assert!(o.stdout.starts_with("not deployable"), "{}", o.stdout);
    assert!(o.stdout.contains("AMC_REQUIRED at dus[0].amc"), "{}", o.stdout);

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture(App::MmT)).unwrap()).unwrap();
    v["design"]["platform_override"] = serde_json::json!({"aie_core_count": 300});
    let over = dir.path().join("over.json");
    std::fs::write(&over, v.to_string()).unwrap();
    assert_eq!(cli(&["validate", p(&over)]).code, 3);

    let json = cli(&["validate", &fixture(App::Fft), "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&json.stdout).unwrap();
    assert_eq!(report["is_deployable"], true);
    assert_eq!(report["schema_version"], 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ nope").unwrap();
    assert_eq!(cli(&["validate", p(&bad)]).code, 2);
    assert_eq!(cli(&["validate", "/no/such/file.json"]).code, 1);
    assert_eq!(cli(&["frobnicate"]).code, 1);
}

#[test]
fn infeasible_simulation_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let t = cli(&["template", "FFT", "--pus", "2"]);
    assert_eq!(t.code, 0);
    let f = dir.path().join("fft2.json");
    std::fs::write(&f, &t.stdout).unwrap();
    let o = cli(&["simulate", p(&f), "--size", "8192"]);
    assert_eq!(o.code, 4, "{}", o.stderr);
    assert!(o.stderr.contains("33792"), "{}", o.stderr);
}

#[test]
fn template_output_matches_fixtures() {
    for (name, app) in [("MM", App::Mm), ("Filter2D", App::Filter2d), ("FFT", App::Fft), ("MM-T", App::MmT)] {
        let o = cli(&["template", name]);
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout, std::fs::read_to_string(fixture(app)).unwrap(), "{name}");
    }
    assert_eq!(cli(&["template", "GEMV"]).code, 1);
}

#[test]
fn generate_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| std::fs::read(dir.path().join("graph").join(name)).unwrap();
    assert_eq!(cli(&["generate", &fixture(App::Filter2d), "--out", p(dir.path())]).code, 0);
    let first = (read("filter2d.graph.txt"), read("filter2d.manifest.json"));
    assert_eq!(cli(&["generate", &fixture(App::Filter2d), "--out", p(dir.path())]).code, 0);
    assert_eq!(first, (read("filter2d.graph.txt"), read("filter2d.manifest.json")));
}

#[test]
fn simulate_report_plot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("mm.json");
    let trace = dir.path().join("mm.csv");
    let o = cli(&["simulate", &fixture(App::Mm), "--size", "1024", "--pus", "2", "--out", p(&res), "--trace", p(&trace)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&res).unwrap()).unwrap();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["pu_count"], 2);
    assert!(r["total_time_sec"].as_f64().unwrap() > 0.0);

    let again = cli(&["simulate", &fixture(App::Mm), "--size", "1024", "--pus", "2"]);
    let r2: serde_json::Value = serde_json::from_str(&again.stdout).unwrap();
    assert_eq!(r2["total_time_sec"], r["total_time_sec"]);

    let rep = cli(&["report", p(&res), p(&res)]);
    assert_eq!(rep.code, 0, "{}", rep.stderr);
    assert!(rep.stdout.lines().count() >= 3);

    let svg = cli(&["plot", p(&trace), "--title", "mm"]);
    assert_eq!(svg.code, 0, "{}", svg.stderr);
    assert!(svg.stdout.starts_with("<svg") || svg.stdout.starts_with("<?xml"));
    assert!(svg.stdout.trim_end().ends_with("</svg>"));
}

#[test]
fn calibrate_writes_a_cost_model() {
    let targets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/comm_methods.targets.json");
    let o = cli(&["calibrate", p(&targets)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let m: ea4rca::sim::CostModel = serde_json::from_str(&o.stdout).unwrap();
    assert!((m.efficiency - 0.981).abs() < 0.005, "{}", m.efficiency);
    assert!(!o.stderr.is_empty());
    let bad = cli(&["calibrate", p(&targets), "--params", "bogus"]);
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("unknown fit parameter 'bogus'"), "{}", bad.stderr);
}
