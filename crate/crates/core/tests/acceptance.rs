//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and runtime budgets are pinned below.

mod common;

use std::time::{Duration, Instant};

use ea4rca::config::{parse_design, serialize_design};
use ea4rca::graph::{build_ir, check_ir, emit_graph_source, fuse, GraphIr, KernelCatalog, Provenance, StoredGraph};
use ea4rca::model::{AmcMode, PlatformSpec};
use ea4rca::sim::{
    amc_trace, auto_params, calibrate, compare_comm_methods, simulate, AmcRequest, CostModel, Scenario, SimError, Target,
};
use ea4rca::validate::validate_resources;
use ea4rca::workloads::{iter_engine, iter_kernel, op_count, App, WorkloadSpec};
use rand::rngs::StdRng;
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// Formula suite: exact, < 1 s.

fn tiles_by_stepping(extent: u64, tile: u64) -> u64 {
    (0..extent).step_by(tile as usize).count() as u64
}

/// Rounds of dealing `tiles` over `n_pu` PUs, checked by its defining
/// property: the smallest `r` with `r * n_pu >= tiles`.
fn is_round_count(r: u64, tiles: u64, n_pu: u64) -> bool {
    r * n_pu >= tiles && (r == 0 || (r - 1) * n_pu < tiles)
}

fn formula_suite() -> Outcome {
    let mut r = common::rng(0xF0);
    for i in 0..1000 {
        let (m, k, n) = (r.random_range(1..=8192u64), r.random_range(1..=8192u64), r.random_range(1..=8192u64));
        let tile = [16u64, 32, 64, 128][r.random_range(0..4)];
        let n_pu = r.random_range(1..=8u64);
        let kern = tiles_by_stepping(m, tile) * tiles_by_stepping(k, tile) * tiles_by_stepping(n, tile);
        ensure(iter_kernel(m, k, n, tile) == kern, || format!("case {i}: iter_kernel({m},{k},{n},{tile})"))?;
        let eng = iter_engine(m, k, n, tile, n_pu);
        ensure(is_round_count(eng, kern, n_pu), || format!("case {i}: iter_engine({m},{k},{n},{tile},{n_pu}) = {eng}"))?;
    }
    let a = iter_kernel(768, 768, 768, 32);
    let b = iter_engine(6144, 6144, 6144, 128, 6);
    ensure(a == 13824, || format!("768^3 kernel iterations {a}"))?;
    ensure(b == 18432, || format!("6144^3 engine iterations {b}"))?;
    Ok(format!("1000 random + fixtures; 768^3 -> {a}, 6144^3/6 PU -> {b}"))
}

// Resource reproduction: exact, < 1 s.

fn resource_reproduction() -> Outcome {
    let platform = PlatformSpec::default();
    let expect = [(App::Mm, 384, 1, 6), (App::Filter2d, 352, 11, 44), (App::Fft, 80, 8, 8), (App::MmT, 400, 50, 50)];
    let mut parts = Vec::new();
    for (app, cores, dus, pus) in expect {
        let d = common::template(app);
        let rep = validate_resources(&d, &platform);
        let got = (rep.resource.aie_cores_used, d.dus.len(), d.pus.len());
        ensure(got == (cores, dus, pus), || format!("{app:?}: got {got:?}, want {:?}", (cores, dus, pus)))?;
        ensure(rep.is_deployable, || format!("{app:?} template is not deployable"))?;
        if app == App::Mm {
            let plio = rep.resource.plio_used();
            ensure(plio == 72, || format!("MM PLIO {plio}, want 72"))?;
        }
        parts.push(format!("{app:?} {cores}/{dus}/{pus}"));
    }
    Ok(format!("{}; MM PLIO 72", parts.join(", ")))
}

// AMC oracle: exact sequence equality on 10,000 requests, < 5 s.

/// Literal reading of the three read branches; `None` when an access falls
/// outside the block or the address sequence runs out.
fn amc_literal(mode: AmcMode, memory_size: u64, addr_seq: &[u64], burst: u64, n: u64) -> Option<Vec<u64>> {
    let mut stream = Vec::new();
    match mode {
        AmcMode::Csb => {
            let mut addr = 0;
            while addr < memory_size {
                stream.push(addr);
                addr += 1;
            }
        }
        AmcMode::Jub => {
            for e in 0..n as usize {
                let start = *addr_seq.get(e)?;
                for i in 0..burst {
                    if start + i >= memory_size {
                        return None;
                    }
                    stream.push(start + i);
                }
            }
        }
        AmcMode::Unod => {
            for e in 0..n as usize {
                let a = *addr_seq.get(e)?;
                if a >= memory_size {
                    return None;
                }
                stream.push(a);
            }
        }
    }
    Some(stream)
}

fn random_amc(r: &mut StdRng) -> AmcRequest {
    let mode = [AmcMode::Csb, AmcMode::Jub, AmcMode::Unod][r.random_range(0..3)];
    let memory_size = r.random_range(0..=512u64);
    let burst_size = r.random_range(1..=32u64);
    let len = r.random_range(0..=24usize);
    // Mostly in-bounds starts, with some overruns to exercise the error path.
    let limit = memory_size + 8;
    let addr_seq: Vec<u64> = (0..len).map(|_| r.random_range(0..=limit)).collect();
    let exec_count = if r.random_bool(0.9) { len as u64 } else { len as u64 + r.random_range(1..=3) };
    AmcRequest { mode, memory_size, addr_seq, burst_size, exec_count, element_bytes: [2, 4, 8][r.random_range(0..3)] }
}

fn amc_oracle() -> Outcome {
    let mut r = common::rng(0xA1);
    let (cost, platform) = (CostModel::default(), PlatformSpec::default());
    let mut errors = 0;
    for i in 0..10_000 {
        let req = random_amc(&mut r);
        let want = amc_literal(req.mode, req.memory_size, &req.addr_seq, req.burst_size, req.exec_count);
        let got = amc_trace(&req, &cost, &platform).ok().map(|t| t.indices);
        errors += usize::from(want.is_none());
        ensure(got == want, || format!("request {i} ({:?}) diverges: {req:?}", req.mode))?;
    }
    Ok(format!("10000 requests equal, {errors} rejected by both"))
}

// Comm-method calibration: each within +-25%, ordering on 1,000 models, < 10 s.

fn comm_calibration() -> Outcome {
    let platform = PlatformSpec::default();
    let observed = [31.06e-6, 8.61e-6, 3.49e-6];
    let targets: Vec<Target> = observed
        .iter()
        .enumerate()
        .map(|(i, &t)| Target { scenario: Scenario::CommMethod { method: i as u8 + 1 }, observed_sec: t })
        .collect();
    let start = CostModel::default();
    let params = auto_params(&targets, &start, &platform).map_err(|e| e.to_string())?;
    let fit = calibrate(&targets, &params, &start, &platform).map_err(|e| e.to_string())?;
    let times = compare_comm_methods(&fit.model, &platform);
    let mut dev = Vec::new();
    for (t, want) in times.iter().zip(observed) {
        let rel = (t.total_sec - want) / want;
        ensure(rel.abs() <= 0.25, || format!("{:?}: {:.3} us vs {:.2} us", t.method, t.total_sec * 1e6, want * 1e6))?;
        dev.push(format!("{:+.2}%", rel * 100.0));
    }
    let mut r = common::rng(0xC0);
    for i in 0..1000 {
        let mut m = CostModel::default();
        m.efficiency = r.random_range(0.01..=1.0);
        m.stream_efficiency = r.random_range(0.01..=1.0);
        m.jub_efficiency = r.random_range(0.01..=1.0);
        m.stream_interrupt_overhead_cycles = r.random_range(1..=4096);
        m.dma_setup_cycles = r.random_range(1..=4096);
        m.cascade_fill_cycles = r.random_range(1..=4096);
        let [a, b, c] = compare_comm_methods(&m, &platform).map(|t| t.total_sec);
        ensure(a > b && b > c, || format!("model {i}: ordering broken ({a:e}, {b:e}, {c:e})"))?;
    }
    let names: Vec<&str> = params.iter().map(|p| p.as_str()).collect();
    Ok(format!("fit [{}]: {}; ordering 1>2>3 on 1000 models", names.join(", "), dev.join(" ")))
}

// Scaling band: 6:1 in [5.5, 6.0], 3:1 in [2.7, 3.0], < 5 s.

fn scaling_band() -> Outcome {
    let (platform, cost) = (PlatformSpec::default(), CostModel::default());
    let d = common::template(App::Mm);
    let w = WorkloadSpec::mm(6144, 6144, 6144);
    let tps = |n: usize| -> Result<f64, String> {
        let d = d.restrict_pus(n).map_err(|e| e.to_string())?;
        Ok(simulate(&d, &w, &platform, &cost).map_err(|e| e.to_string())?.tasks_per_sec)
    };
    let (t6, t3, t1) = (tps(6)?, tps(3)?, tps(1)?);
    let (r6, r3) = (t6 / t1, t3 / t1);
    ensure((5.5..=6.0).contains(&r6), || format!("6:1 ratio {r6:.3}"))?;
    ensure((2.7..=3.0).contains(&r3), || format!("3:1 ratio {r3:.3}"))?;
    Ok(format!("6:1 = {r6:.3}, 3:1 = {r3:.3}"))
}

// Saturation: 44 vs 16 PUs within 5%, < 1 s.

fn saturation() -> Outcome {
    let (platform, cost) = (PlatformSpec::default(), CostModel::default());
    let d = common::template(App::Filter2d);
    let w = WorkloadSpec::filter2d(128, 128);
    let all = simulate(&d, &w, &platform, &cost).map_err(|e| e.to_string())?;
    let some = simulate(&d.restrict_pus(16).map_err(|e| e.to_string())?, &w, &platform, &cost).map_err(|e| e.to_string())?;
    let rel = (all.tasks_per_sec - some.tasks_per_sec).abs() / some.tasks_per_sec;
    ensure(rel <= 0.05, || format!("44 PU {:.1} vs 16 PU {:.1} tasks/s", all.tasks_per_sec, some.tasks_per_sec))?;
    Ok(format!("44 PU / 16 PU differ by {:.2}% ({} busy)", rel * 100.0, all.busy_pus))
}

// Infeasibility: exact pattern, < 1 s.

fn infeasibility() -> Outcome {
    let (platform, cost) = (PlatformSpec::default(), CostModel::default());
    let d = common::template(App::Fft);
    let w = WorkloadSpec::fft(8192);
    for n in [2usize, 4, 8] {
        let r = simulate(&d.restrict_pus(n).map_err(|e| e.to_string())?, &w, &platform, &cost);
        match (n, r) {
            (2, Err(SimError::InfeasibleMapping { .. })) => {}
            (2, other) => return Err(format!("2 PUs: expected InfeasibleMapping, got {:?}", other.map(|r| r.tasks_per_sec))),
            (_, Ok(_)) => {}
            (_, Err(e)) => return Err(format!("{n} PUs: {e}")),
        }
    }
    Ok("8192 points: 2 PU infeasible, 4 and 8 PU feasible".into())
}

// Op-count consistency: within 1.5%, using the rounding interval of the
// published times (two decimals in ms).

const MM_ROWS: [(u64, [(f64, f64); 3]); 4] = [
    (768, [(0.44, 2050.53), (0.82, 1101.67), (1.84, 491.60)]),
    (1536, [(2.41, 3008.63), (4.45, 1629.45), (12.99, 558.02)]),
    (3072, [(17.17, 3377.66), (34.12, 1699.19), (101.82, 569.44)]),
    (6144, [(135.59, 3421.02), (270.85, 1712.61), (812.13, 571.16)]),
];

const FILTER_ROWS: [((u64, u64), [(f64, f64); 3]); 4] = [
    ((128, 128), [(0.15, 5.30), (0.16, 5.21), (0.16, 5.06)]),
    ((3480, 2160), [(0.43, 870.42), (0.91, 413.76), (3.91, 96.14)]),
    ((7680, 4320), [(1.67, 988.56), (3.51, 472.10), (17.04, 97.37)]),
    ((15360, 8640), [(6.32, 1050.43), (13.71, 484.02), (67.73, 97.97)]),
];

fn gops_consistent(ops: u64, time_ms: f64, gops: f64) -> (bool, f64) {
    const TOL: f64 = 0.015;
    const HALF_ULP_MS: f64 = 0.005;
    let at = |t: f64| ops as f64 / (t * 1e-3) / 1e9;
    let rel = (at(time_ms) - gops) / gops;
    let lo = at(time_ms + HALF_ULP_MS) * (1.0 - TOL);
    let hi = at(time_ms - HALF_ULP_MS) * (1.0 + TOL);
    (rel.abs() <= TOL || (lo..=hi).contains(&gops), rel)
}

fn op_count_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut widened = 0;
    let mut rows = 0;
    let mut check = |w: WorkloadSpec, t: f64, g: f64| -> Result<(), String> {
        let ops = op_count(&w).map_err(|e| e.to_string())?;
        let (ok, rel) = gops_consistent(ops, t, g);
        ensure(ok, || format!("{w:?} at {t} ms: {:.2} GOPS vs {g}", ops as f64 / t / 1e6))?;
        if rel.abs() > 0.015 {
            widened += 1;
        } else {
            worst = worst.max(rel.abs());
        }
        rows += 1;
        Ok(())
    };
    for (s, r) in MM_ROWS {
        for (t, g) in r {
            check(WorkloadSpec::mm(s, s, s), t, g)?;
        }
    }
    for ((w, h), r) in FILTER_ROWS {
        for (t, g) in r {
            check(WorkloadSpec::filter2d(w, h), t, g)?;
        }
    }
    Ok(format!("{rows} rows; worst direct deviation {:.2}%, {widened} rows within the time rounding interval", worst * 100.0))
}

// Codegen determinism and well-formedness, < 30 s.

fn emit(d: &ea4rca::DesignSpec, platform: &PlatformSpec) -> Result<Vec<(String, String)>, String> {
    let ir = build_ir(d, platform).map_err(|e| e.to_string())?;
    let files = emit_graph_source(&ir, &KernelCatalog::from_design(d)).map_err(|e| e.to_string())?;
    Ok(files.into_iter().collect())
}

fn stored(ir: GraphIr) -> StoredGraph {
    StoredGraph { name: ir.name.clone(), ir, provenance: Provenance::default(), revision: String::new() }
}

fn codegen() -> Outcome {
    let platform = PlatformSpec::default();
    for app in common::APPS {
        let d = common::template(app);
        let first = emit(&d, &platform)?;
        for _ in 0..2 {
            ensure(emit(&d, &platform)? == first, || format!("{app:?} emission differs between runs"))?;
        }
    }
    let mut r = common::rng(0xD0);
    for i in 0..500 {
        let d = common::random_deployable(&mut r);
        let ir = build_ir(&d, &platform).map_err(|e| format!("design {i}: {e}"))?;
        let diags = check_ir(&ir, &platform);
        ensure(diags.is_empty(), || format!("design {i} ({}): {}", d.name, diags[0]))?;
    }
    let mut fused = 0;
    while fused < 50 {
        let a = build_ir(&common::random_deployable(&mut r), &platform).map_err(|e| e.to_string())?;
        let b = build_ir(&common::random_deployable(&mut r), &platform).map_err(|e| e.to_string())?;
        let (ca, cb) = (a.census(), b.census());
        if ca.kernel_nodes + cb.kernel_nodes > platform.aie_core_count as u64
            || ca.plio_in + cb.plio_in > platform.plio_count as u64
            || ca.plio_out + cb.plio_out > platform.plio_count as u64
        {
            continue;
        }
        let f = fuse(&a, &stored(b.clone()), "add", &platform).map_err(|e| format!("fusion {fused}: {e}"))?;
        let c = f.census();
        let sums = (f.nodes.len(), f.edges.len(), c.cascade, c.stream, c.broadcast, c.packet);
        let want = (
            a.nodes.len() + b.nodes.len(),
            a.edges.len() + b.edges.len(),
            ca.cascade + cb.cascade,
            ca.stream + cb.stream,
            ca.broadcast + cb.broadcast,
            ca.packet + cb.packet,
        );
        ensure(sums == want, || format!("fusion {fused}: counts {sums:?}, want {want:?}"))?;
        fused += 1;
    }
    Ok("4 templates x 3 runs identical; 500 random designs check clean; 50 fusions sum exactly".into())
}

// Round-trip identity on fixtures and 500 randomized documents.

fn round_trip() -> Outcome {
    for app in common::APPS {
        let path = common::fixture_path(app);
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let doc = parse_design(&text).map_err(|d| format!("{}: {}", path.display(), d[0]))?;
        ensure(serialize_design(&doc) == text, || format!("{} does not re-serialize byte-identically", path.display()))?;
        ensure(parse_design(&serialize_design(&doc)).ok() == Some(doc), || format!("{}: parse(serialize) differs", path.display()))?;
    }
    let mut r = common::rng(0xE0);
    for i in 0..500 {
        let doc = common::random_document(&mut r);
        let text = serialize_design(&doc);
        let back = parse_design(&text).map_err(|d| format!("document {i}: {}", d[0]))?;
        ensure(back == doc, || format!("document {i}: parse(serialize(doc)) != doc"))?;
        ensure(serialize_design(&back) == text, || format!("document {i}: text drifts"))?;
    }
    Ok("4 fixtures byte-identical; 500 random documents identical".into())
}

fn main() {
    let criteria = [
        Criterion { name: "formula suite", budget: Duration::from_secs(1), run: formula_suite },
        Criterion { name: "resource reproduction", budget: Duration::from_secs(1), run: resource_reproduction },
        Criterion { name: "AMC oracle", budget: Duration::from_secs(5), run: amc_oracle },
        Criterion { name: "comm-method calibration", budget: Duration::from_secs(10), run: comm_calibration },
        Criterion { name: "scaling band", budget: Duration::from_secs(5), run: scaling_band },
        Criterion { name: "saturation", budget: Duration::from_secs(1), run: saturation },
        Criterion { name: "infeasibility", budget: Duration::from_secs(1), run: infeasibility },
        Criterion { name: "op-count consistency", budget: Duration::from_secs(1), run: op_count_consistency },
        Criterion { name: "codegen determinism", budget: Duration::from_secs(30), run: codegen },
        Criterion { name: "round-trip", budget: Duration::from_secs(30), run: round_trip },
    ];
    let mut failed = 0;
    println!("\nrunning {} acceptance criteria", criteria.len());
    for c in &criteria {
        let t0 = Instant::now();
        let result = (c.run)();
        let took = t0.elapsed();
        let over = took > c.budget;
        match result {
            Ok(detail) if !over => println!("PASS {}: {detail} [{:.3} s of {} s]", c.name, took.as_secs_f64(), c.budget.as_secs()),
            Ok(detail) => {
                failed += 1;
                println!("FAIL {}: {detail} [{:.3} s exceeds {} s]", c.name, took.as_secs_f64(), c.budget.as_secs());
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {e} [{:.3} s]", c.name, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed\n", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
