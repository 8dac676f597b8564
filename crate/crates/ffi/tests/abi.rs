use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use ea4rca_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ea4rca_last_error_message()) }.to_str().unwrap().to_string()
}

/// Takes ownership of a library string.
fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ea4rca_string_free(s) };
    text
}

fn template(app: &str, pus: u32) -> *mut Ea4rcaDesign {
    let app = CString::new(app).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_template(app.as_ptr(), pus, &mut d) }, Ea4rcaStatus::Ok, "{}", last_error());
    d
}

fn fixture(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn version_matches_the_package() {
    let v = unsafe { CStr::from_ptr(ea4rca_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_round_trips_the_fixture() {
    let text = fixture("mm.ea4rca.json");
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_parse(text.as_ptr(), &mut d) }, Ea4rcaStatus::Ok);
    assert_eq!(unsafe { ea4rca_design_pu_count(d) }, 6);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_to_json(d, &mut out) }, Ea4rcaStatus::Ok);
    assert_eq!(take(out), text.to_str().unwrap());
    unsafe { ea4rca_design_free(d) };
}

#[test]
fn validate_reports_status_and_json() {
    let d = template("mm", 0);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_validate(d, &mut out) }, Ea4rcaStatus::Ok);
    let rep: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(rep["resource"]["aie_cores_used"], 384);
    assert_eq!(last_error(), "");
    unsafe { ea4rca_design_free(d) };

    let mut v: serde_json::Value = serde_json::from_str(fixture("mmt.ea4rca.json").to_str().unwrap()).unwrap();
    v["design"]["platform_override"] = serde_json::json!({"aie_core_count": 300});
    let text = CString::new(v.to_string()).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_parse(text.as_ptr(), &mut d) }, Ea4rcaStatus::Ok);
    assert_eq!(unsafe { ea4rca_design_validate(d, &mut out) }, Ea4rcaStatus::OverBudget);
    let rep: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(rep["is_deployable"], false);
    assert!(last_error().contains("400/300"), "{}", last_error());
    unsafe { ea4rca_design_free(d) };
}

#[test]
fn structural_errors_reject_the_document() {
    let mut v: serde_json::Value = serde_json::from_str(fixture("mm.ea4rca.json").to_str().unwrap()).unwrap();
    v["design"]["dus"][0].as_object_mut().unwrap().remove("amc");
    let text = CString::new(v.to_string()).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_parse(text.as_ptr(), &mut d) }, Ea4rcaStatus::InvalidDocument);
    assert!(d.is_null());
    assert!(last_error().contains("AMC_REQUIRED"), "{}", last_error());

    let junk = CString::new("{ nope").unwrap();
    assert_eq!(unsafe { ea4rca_design_parse(junk.as_ptr(), &mut d) }, Ea4rcaStatus::InvalidDocument);
    let bad_utf8 = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { ea4rca_design_parse(bad_utf8.as_ptr().cast(), &mut d) }, Ea4rcaStatus::InvalidUtf8);
}

#[test]
fn null_arguments_are_reported() {
    let mut d = ptr::null_mut();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_parse(ptr::null(), &mut d) }, Ea4rcaStatus::NullArgument);
    assert_eq!(unsafe { ea4rca_design_template(c"mm".as_ptr(), 0, ptr::null_mut()) }, Ea4rcaStatus::NullArgument);
    assert_eq!(unsafe { ea4rca_design_validate(ptr::null(), &mut out) }, Ea4rcaStatus::NullArgument);
    assert_eq!(unsafe { ea4rca_design_generate(ptr::null(), &mut out) }, Ea4rcaStatus::NullArgument);
    assert_eq!(unsafe { ea4rca_design_pu_count(ptr::null()) }, 0);
    assert!(out.is_null());
    unsafe {
        ea4rca_design_free(ptr::null_mut());
        ea4rca_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { ea4rca_design_template(c"gemv".as_ptr(), 0, &mut d) }, Ea4rcaStatus::NotFound);
}

#[test]
fn generate_and_simulate() {
    let d = template("filter2d", 4);
    assert_eq!(unsafe { ea4rca_design_pu_count(d) }, 4);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ea4rca_design_generate(d, &mut out) }, Ea4rcaStatus::Ok);
    let g: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert!(g["files"]["graph/filter2d.graph.txt"].as_str().unwrap().starts_with("# ea4rca graph v1"));

    assert_eq!(unsafe { ea4rca_design_simulate(d, c"256x256:5".as_ptr(), 0, &mut out) }, Ea4rcaStatus::Ok);
    let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(r["pu_count"], 4);
    assert!(r["total_time_sec"].as_f64().unwrap() > 0.0);
    unsafe { ea4rca_design_free(d) };

    let fft = template("fft", 2);
    assert_eq!(unsafe { ea4rca_design_simulate(fft, c"8192".as_ptr(), 0, &mut out) }, Ea4rcaStatus::Infeasible);
    assert!(out.is_null());
    assert!(last_error().contains("33792"), "{}", last_error());
    unsafe { ea4rca_design_free(fft) };
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("ea4rca-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"ea4rca.h\"\n\
         int main(void) {\n\
           Ea4rcaDesign *d = 0; char *out = 0;\n\
           if (ea4rca_design_template(\"mm\", 0, &d) != EA4RCA_STATUS_OK) return 1;\n\
           Ea4rcaStatus s = ea4rca_design_validate(d, &out);\n\
           ea4rca_string_free(out); ea4rca_design_free(d);\n\
           return s == EA4RCA_STATUS_OK ? 0 : (int)s;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(status.success());
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
