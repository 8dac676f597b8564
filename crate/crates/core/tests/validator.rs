mod common;

use ea4rca::model::*;
use ea4rca::validate::*;
use ea4rca::workloads::{template_design, App, TemplateParams};
use ea4rca::{Code, Severity};
use proptest::prelude::*;

fn topo(expr: &str, kernel: &str) -> CcTopology {
    CcTopology::from_shape(&Shape::parse(expr).unwrap(), Some(kernel), &[])
}

fn report(d: &DesignSpec) -> ValidationReport {
    validate_resources(d, &PlatformSpec::default())
}

fn error_codes(r: &ValidationReport) -> Vec<Code> {
    r.errors().map(|d| d.code).collect()
}

type Mutation = fn(&mut DesignSpec);

/// One broken design per structural rule.
const MUTATIONS: &[(Code, App, Mutation)] = &[
    (Code::DuplicateName, App::Mm, |d| d.pus[1].name = "pu0".into()),
    (Code::UnknownKernel, App::Mm, |d| d.pus[0].psts[0].cc = topo("Parallel<16>*Cascade<4>", "nope")),
    (Code::KernelCascadePorts, App::Mm, |d| d.kernels.get_mut("mm_float").unwrap().in_ports.cascade = 2),
    (Code::TopologyArity, App::MmT, |d| d.pus[0].psts[0].cc = topo("Cascade<1>", "mmt_float")),
    (Code::ParallelDepth, App::Mm, |d| d.pus[0].psts[0].cc = topo("Parallel<2>*Parallel<2>*Parallel<4>*Cascade<4>", "mm_float")),
    (Code::CascadeNotLinear, App::Filter2d, |d| d.pus[0].psts[0].cc = topo("Parallel<2>*Cascade<4>", "filter2d_i32")),
    (Code::EmptyPu, App::Mm, |d| d.pus[0].psts.clear()),
    (Code::SelectorOutOfRange, App::Mm, |d| d.pus[0].psts[0].dccs[0].served = CoreSelector::range(3, 68, 4)),
    (Code::SelectorEmpty, App::Mm, |d| d.pus[0].psts[0].dccs[0].served = CoreSelector::range(5, 5, 1)),
    (Code::SelectorDuplicate, App::Fft, |d| d.pus[0].psts[0].dccs[0].served = CoreSelector::list(&[2, 2])),
    (Code::SelectorNoPort, App::Fft, |d| d.pus[0].psts[1].dacs[0].served = CoreSelector::single(1)),
    (Code::PortUncovered, App::Mm, |d| {
        d.pus[0].psts[0].dacs.pop();
    }),
    (Code::PortMultiCovered, App::Mm, |d| {
        let dac = d.pus[0].psts[0].dacs[0].clone();
        d.pus[0].psts[0].dacs.push(dac);
    }),
    (Code::DirMultiCore, App::MmT, |d| d.pus[0].psts[0].dacs[0].plio_ports = 2),
    (Code::DcaKernelMissing, App::MmT, |d| d.pus[0].psts[0].dccs[0].mode = DccMode::Dca),
    (Code::DcaKernelUnexpected, App::MmT, |d| d.pus[0].psts[0].dccs[0].dca_kernel = Some("mmt_float".into())),
    (Code::ReuseFactorMismatch, App::Fft, |d| d.pus[0].psts[0].dacs[0].reuse_factor = 1),
    (Code::PlioSplitUneven, App::Filter2d, |d| d.pus[0].psts[0].dacs[0].plio_ports = 9),
    (Code::PstChainArity, App::Fft, |d| {
        d.pus[0].psts[1].dacs.pop();
    }),
    (Code::ThrFanout, App::MmT, |d| d.pairings.get_mut("du0").unwrap().push("pu1".into())),
    (Code::TpcThrBuffer, App::Mm, |d| d.dus[0].tpc.mode = TpcMode::Thr),
    (Code::AmcRequired, App::Mm, |d| d.dus[0].amc = None),
    (Code::PhdBuffer, App::Mm, |d| d.dus[0].ssc.buffer_bytes = 1000),
    (Code::DuBuffer, App::Mm, |d| d.dus[0].onchip_buffer_bytes = 1000),
    (Code::PairingUnresolved, App::Mm, |d| d.pairings.get_mut("du0").unwrap().push("ghost".into())),
    (Code::PuUnpaired, App::Mm, |d| {
        d.pairings.get_mut("du0").unwrap().pop();
    }),
    (Code::PuMultiPaired, App::Filter2d, |d| d.pairings.get_mut("du1").unwrap().push("pu0".into())),
    (Code::DuUnpaired, App::Filter2d, |d| {
        d.pairings.remove("du1");
    }),
    (Code::InvalidValue, App::Mm, |d| d.pus[0].psts[0].dacs[0].plio_ports = 0),
];

#[test]
fn every_template_is_deployable() {
    for app in common::APPS {
        let r = report(&common::template(app));
        assert!(r.is_deployable, "{app:?}: {:?}", r.diagnostics);
        assert!(r.diagnostics.is_empty(), "{app:?}: {:?}", r.diagnostics);
        assert_eq!(r.exit_code(), EXIT_OK);
    }
}

#[test]
fn each_rule_fires_on_its_mutation() {
    for (code, app, mutate) in MUTATIONS {
        let mut d = common::template(*app);
        mutate(&mut d);
        let r = report(&d);
        assert!(error_codes(&r).contains(code), "{code:?} on {app:?}: got {:?}", error_codes(&r));
        assert!(!r.is_deployable);
        assert_eq!(r.exit_code(), EXIT_STRUCTURAL, "{code:?}");
    }
}

#[test]
fn unused_kernel_is_only_a_warning() {
    let mut d = common::template(App::Mm);
    let spare = KernelSpec::new("spare", "kernels/spare.cc");
    d.kernels.insert("spare".into(), spare);
    let r = report(&d);
    let w: Vec<_> = r.diagnostics.iter().filter(|x| x.code == Code::UnusedKernel).collect();
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].severity, Severity::Warning);
    assert_eq!(w[0].location, "kernels.spare");
    assert!(r.is_deployable);
}

#[test]
fn packet_fanout_uses_platform_limit() {
    let d = common::template(App::Filter2d);
    let mut p = PlatformSpec::default();
    assert!(validate_resources(&d, &p).is_deployable);
    p.packet_switch_fanout_max = 4;
    let r = validate_resources(&d, &p);
    assert!(error_codes(&r).contains(&Code::PacketFanout));
    assert_eq!(r.exit_code(), EXIT_STRUCTURAL);
}

#[test]
fn budget_overruns_exit_three() {
    let d = common::template(App::MmT);
    let mut p = PlatformSpec::default();
    p.aie_core_count = 399;
    let r = validate_resources(&d, &p);
    assert!(error_codes(&r).is_empty());
    assert_eq!(r.resource.violations[0].code, Code::AieCores);
    assert_eq!(r.exit_code(), EXIT_OVER_BUDGET);

    let mut d = common::template(App::Mm);
    d.dus[0].onchip_buffer_bytes = 4_000_000;
    let r = report(&d);
    assert_eq!(r.resource.violations.iter().map(|v| v.code).collect::<Vec<_>>(), vec![Code::UramBytes]);
    assert_eq!(r.exit_code(), EXIT_OVER_BUDGET);
}

#[test]
fn fft_8192_on_two_pus_exceeds_core_memory() {
    let mut p = TemplateParams::for_app(App::Fft);
    p.pu_count = 2;
    p.du_count = 2;
    p.fft_samples = 8192;
    let d = template_design(App::Fft, &p).unwrap();
    let r = report(&d);
    let v = &r.resource.violations;
    assert_eq!(v.len(), 3, "{v:?}");
    for x in v {
        assert_eq!(x.code, Code::KernelMemExceeded);
        assert_eq!((x.used, x.limit), (33_792, 32_768));
    }
    for pus in [4, 8] {
        p.pu_count = pus;
        p.du_count = pus;
        assert!(report(&template_design(App::Fft, &p).unwrap()).is_deployable, "{pus} PUs");
    }
}

#[test]
fn platform_override_is_applied() {
    let mut d = common::template(App::Mm);
    d.platform_override = Some(PlatformOverride { aie_core_count: Some(256), ..Default::default() });
    let r = report(&d);
    assert_eq!(r.resource.aie_cores_total, 256);
    assert_eq!(r.exit_code(), EXIT_OVER_BUDGET);
}

#[test]
fn diagnostics_order_is_stable() {
    let mut d = common::template(App::Filter2d);
    d.pairings.remove("du1");
    d.pus[3].psts[0].dacs[0].plio_ports = 9;
    let a = serde_json::to_string(&report(&d)).unwrap();
    let b = serde_json::to_string(&report(&d.clone())).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restricting_a_deployable_design_keeps_it_deployable(seed in any::<u64>(), frac in 0.0f64..1.0) {
        let mut r = common::rng(seed);
        let d = common::random_deployable(&mut r);
        let n = 1 + ((d.pus.len() - 1) as f64 * frac) as usize;
        let sub = d.restrict_pus(n).unwrap();
        let rep = report(&sub);
        prop_assert!(rep.is_deployable, "{:?}", rep.diagnostics);
        prop_assert!(rep.resource.aie_cores_used <= report(&d).resource.aie_cores_used);
    }

    #[test]
    fn report_serializes_and_reads_back(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let d = common::random_deployable(&mut r);
        let rep = report(&d);
        let back: ValidationReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        prop_assert_eq!(back, rep);
    }
}
