mod common;

use ea4rca::model::*;
use ea4rca::workloads::App;
use proptest::prelude::*;

#[test]
fn template_resource_usage() {
    let p = PlatformSpec::default();
    // (app, cores, PUs, DUs, PLIO in, PLIO out)
    let rows = [
        (App::Mm, 384, 6, 1, 48, 24),
        (App::Filter2d, 352, 44, 11, 44, 44),
        (App::Fft, 80, 8, 8, 8, 16),
        (App::MmT, 400, 50, 50, 50, 50),
    ];
    for (app, cores, pus, dus, pin, pout) in rows {
        let d = common::template(app);
        let r = resource_report(&d, &p);
        assert_eq!(r.aie_cores_used, cores, "{app:?}");
        assert_eq!((d.pus.len(), d.dus.len()), (pus, dus), "{app:?}");
        assert_eq!((r.plio_in_used, r.plio_out_used), (pin, pout), "{app:?}");
        assert!(r.within_budget(), "{app:?}: {:?}", r.violations);
    }
}

#[test]
fn mm_resource_fractions() {
    let r = resource_report(&common::template(App::Mm), &PlatformSpec::default());
    assert_eq!(r.aie_cores_fraction, 0.96);
    assert_eq!(r.plio_used(), 72);
    assert!((r.uram_fraction - 0.682).abs() < 5e-4, "{}", r.uram_fraction);
}

#[test]
fn mm_pu_is_sixteen_cascades_of_four() {
    let d = common::template(App::Mm);
    let cc = &d.pus[0].psts[0].cc;
    assert_eq!(cc.expression(), "Parallel<16>*Cascade<4>");
    assert_eq!(cc.core_count(), 64);
    assert_eq!(pu_cores(&d.pus[0]), 64);
}

#[test]
fn fft_pu_has_two_stages() {
    let d = common::template(App::Fft);
    assert_eq!(d.pus[0].psts.len(), 2);
    assert_eq!(pu_cores(&d.pus[0]), 10);
}

#[test]
fn restrict_keeps_service_order_prefix() {
    let d = common::template(App::Filter2d);
    let r = d.restrict_pus(16).unwrap();
    assert_eq!(r.pus.len(), 16);
    assert_eq!(r.dus.len(), 4);
    let order: Vec<&str> = r.service_order().iter().map(|&i| r.pus[i].name.as_str()).collect();
    let full: Vec<&str> = d.service_order().iter().take(16).map(|&i| d.pus[i].name.as_str()).collect();
    assert_eq!(order, full);
    assert!(d.restrict_pus(0).is_err());
    assert!(d.restrict_pus(45).is_err());
}

#[test]
fn budget_violations_name_the_resource() {
    let mut p = PlatformSpec::default();
    p.aie_core_count = 300;
    p.plio_count = 40;
    let r = resource_report(&common::template(App::Mm), &p);
    let codes: Vec<_> = r.violations.iter().map(|v| v.code).collect();
    assert!(codes.contains(&ea4rca::Code::AieCores));
    assert!(codes.contains(&ea4rca::Code::PlioIn));
    assert!(!codes.contains(&ea4rca::Code::PlioOut));
}

#[test]
fn union_of_disjoint_designs_adds_usage() {
    let p = PlatformSpec::default();
    let a = common::template(App::Mm).restrict_pus(1).unwrap();
    let mut b = common::template(App::Fft).restrict_pus(2).unwrap();
    for pu in &mut b.pus {
        pu.name = format!("fft_{}", pu.name);
    }
    let dus: Vec<String> = b.dus.iter().map(|d| d.name.clone()).collect();
    for du in &mut b.dus {
        du.name = format!("fft_{}", du.name);
    }
    b.pairings = dus
        .iter()
        .map(|n| (format!("fft_{n}"), b.pairings[n].iter().map(|p| format!("fft_{p}")).collect()))
        .collect();
    let u = a.union(&b).unwrap();
    let sum = &resource_report(&a, &p) + &resource_report(&b, &p);
    let ru = resource_report(&u, &p);
    assert_eq!(ru.aie_cores_used, sum.aie_cores_used);
    assert_eq!(ru.plio_in_used, sum.plio_in_used);
    assert_eq!(ru.plio_out_used, sum.plio_out_used);
    assert_eq!(ru.uram_bytes_used, sum.uram_bytes_used);
    assert!(a.union(&a).is_err());
}

fn shape() -> impl Strategy<Value = Shape> {
    let atom = prop_oneof![Just(Shape::Single), (1u32..16).prop_map(Shape::Cascade), (1u32..5).prop_map(|k| Shape::Butterfly(1 << k))];
    atom.prop_recursive(2, 4, 1, |inner| (1u32..20, inner).prop_map(|(k, s)| Shape::Parallel(k, Box::new(s))))
}

fn cores_of(s: &Shape) -> u64 {
    match s {
        Shape::Single => 1,
        Shape::Cascade(n) | Shape::Butterfly(n) => *n as u64,
        Shape::Parallel(k, inner) => *k as u64 * cores_of(inner),
    }
}

proptest! {
    #[test]
    fn topology_expressions_round_trip(s in shape()) {
        let text = s.to_string();
        prop_assert_eq!(Shape::parse(&text).unwrap(), s.clone());
        let stage: Vec<String> = vec!["k".into()];
        let cc = CcTopology::from_shape(&s, Some("k"), &stage);
        prop_assert_eq!(cc.core_count(), cores_of(&s));
    }

    #[test]
    fn selectors_round_trip(items in prop::collection::vec((0u32..64, prop_oneof![Just(0u32), 2u32..8], 1u32..4), 1..5)) {
        let text = items
            .iter()
            .map(|&(a, len, step)| match len {
                0 => a.to_string(),
                _ if step == 1 => format!("{a}..{}", a + len),
                _ => format!("{a}..{}:{step}", a + len),
            })
            .collect::<Vec<_>>()
            .join(",");
        let sel: CoreSelector = text.parse().unwrap();
        prop_assert_eq!(sel.to_string(), text);
        if let Ok(cores) = sel.resolve(128) {
            prop_assert!(cores.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn restricting_scales_cores_linearly(n in 1usize..=6) {
        let d = common::template(App::Mm).restrict_pus(n).unwrap();
        let r = resource_report(&d, &PlatformSpec::default());
        prop_assert_eq!(r.aie_cores_used, 64 * n as u64);
        prop_assert_eq!(r.plio_used(), 12 * n as u64);
    }
}
