//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use ea4rca::model::PlatformSpec;
use ea4rca::validate::validate_resources;
use ea4rca::workloads::{template_design, template_document, App, TemplateParams};
use ea4rca::{ConfigDocument, DesignSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

pub const APPS: [App; 4] = [App::Mm, App::Filter2d, App::Fft, App::MmT];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn template(app: App) -> DesignSpec {
    template_design(app, &TemplateParams::for_app(app)).expect("shipped template builds")
}

pub fn fixture_path(app: App) -> std::path::PathBuf {
    let name = match app {
        App::Mm => "mm",
        App::Filter2d => "filter2d",
        App::Fft => "fft",
        App::MmT => "mmt",
    };
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.ea4rca.json"))
}

/// Template parameters drawn from ranges where every template builds.
pub fn random_params(r: &mut StdRng) -> (App, TemplateParams) {
    let app = APPS[r.random_range(0..APPS.len())];
    let base = TemplateParams::for_app(app);
    let mut p = base.clone();
    match app {
        App::Mm => {
            p.pu_count = r.random_range(1..=6);
            p.du_count = r.random_range(1..=p.pu_count);
            let (k, t) = [(32, 128), (16, 64), (32, 64), (16, 128)][r.random_range(0..4)];
            p.kernel_tile = k;
            p.pu_tile = t;
        }
        App::Filter2d => {
            p.pu_count = r.random_range(1..=44);
            p.du_count = r.random_range(1..=p.pu_count.min(12));
            p.block_side = [16, 32, 64][r.random_range(0..3)];
            p.filter_kernel = [3, 5, 7][r.random_range(0..3)];
        }
        App::Fft => {
            p.pu_count = r.random_range(1..=8);
            p.du_count = r.random_range(1..=p.pu_count);
            p.butterfly_cores = [4, 8][r.random_range(0..2)];
            p.fft_samples = [1024, 2048, 4096][r.random_range(0..3)];
        }
        App::MmT => {
            p.pu_count = r.random_range(1..=50);
            p.du_count = p.pu_count;
        }
    }
    (app, p)
}

/// A design that validates deployable on the default platform.
pub fn random_deployable(r: &mut StdRng) -> DesignSpec {
    let platform = PlatformSpec::default();
    loop {
        let (app, p) = random_params(r);
        let Ok(d) = template_design(app, &p) else { continue };
        if validate_resources(&d, &platform).is_deployable {
            return d;
        }
    }
}

/// Adds unknown members to record objects. `kernels` and `pairings` are
/// keyed by name, so only their values are visited.
fn sprinkle(v: &mut Value, r: &mut StdRng, depth: usize, keyed: bool) {
    match v {
        Value::Object(m) => {
            if !keyed && r.random_bool(0.15) {
                let n = r.random_range(0..1000u32);
                let extra = match r.random_range(0..4) {
                    0 => json!(n),
                    1 => json!(format!("note {n}")),
                    2 => json!([n, true, null]),
                    _ => json!({"nested": n}),
                };
                m.insert(format!("x_extra_{n}"), extra);
            }
            if depth < 6 {
                for (key, child) in m.iter_mut() {
                    let keyed = !keyed && (key == "kernels" || key == "pairings");
                    sprinkle(child, r, depth + 1, keyed);
                }
            }
        }
        Value::Array(a) => {
            for child in a.iter_mut() {
                sprinkle(child, r, depth + 1, false);
            }
        }
        _ => {}
    }
}

/// A randomized document as JSON: a random template with random metadata,
/// numeric fields and unknown members sprinkled through its objects.
pub fn random_document_value(r: &mut StdRng) -> Value {
    let (app, p) = random_params(r);
    let doc = template_document(app, &p).expect("template builds");
    let mut v = doc.to_value();
    v["format_version"] = json!(format!("1.{}.{}", r.random_range(0..5), r.random_range(0..20)));
    v["metadata"]["seed_note"] = json!(r.random_range(0..u32::MAX));
    if r.random_bool(0.5) {
        v["design"]["name"] = json!(format!("design_{}", r.random_range(0..10_000)));
    }
    if let Some(kernels) = v["design"]["kernels"].as_object_mut() {
        for k in kernels.values_mut() {
            if r.random_bool(0.3) {
                k["cycles_per_invocation"] = json!(r.random_range(0..100_000u64));
            }
        }
    }
    if let Some(pus) = v["design"]["pus"].as_array_mut() {
        for pu in pus {
            if r.random_bool(0.3) {
                pu["per_iteration_ops"] = json!(r.random_range(0..u32::MAX as u64));
            }
        }
    }
    if r.random_bool(0.3) {
        v["design"]["platform_override"] = json!({"aie_freq_hz": 1.0e9 + r.random_range(0..1000) as f64 * 1.0e6});
    }
    sprinkle(&mut v, r, 0, false);
    v
}

pub fn random_document(r: &mut StdRng) -> ConfigDocument {
    let v = random_document_value(r);
    ConfigDocument::from_value(&v).expect("generated document decodes")
}
