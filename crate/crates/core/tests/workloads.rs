mod common;

use ea4rca::workloads::*;
use proptest::prelude::*;

fn tiles_by_stepping(d: u64, t: u64) -> u64 {
    let mut n = 0;
    let mut at = 0;
    while at < d {
        n += 1;
        at += t;
    }
    n
}

#[test]
fn mm_iteration_counts() {
    assert_eq!(iter_kernel(768, 768, 768, 32), 13_824);
    assert_eq!(iter_kernel(6144, 6144, 6144, 128), 110_592);
    assert_eq!(iter_engine(6144, 6144, 6144, 128, 6), 18_432);
    assert_eq!(iter_engine(6144, 6144, 6144, 128, 1), 110_592);
    assert_eq!(iter_kernel(1, 1, 1, 32), 1);
}

#[test]
fn op_counts() {
    assert_eq!(op_count(&WorkloadSpec::mm(6144, 6144, 6144)).unwrap(), 2 * 6144u64.pow(3));
    let f = WorkloadSpec::from_size(App::Filter2d, "3840x2160:5").unwrap();
    assert_eq!(op_count(&f).unwrap(), 2 * 3840 * 2160 * 25);
    assert_eq!(op_count(&WorkloadSpec::mmt(10)).unwrap(), 2 * 32768 * 10);
    assert_eq!(op_count(&WorkloadSpec::fft(8192)), Err(UnsupportedMetric("FFT")));
}

#[test]
fn size_shorthand() {
    assert_eq!(WorkloadSpec::from_size(App::Mm, "512").unwrap(), WorkloadSpec::mm(512, 512, 512));
    assert_eq!(WorkloadSpec::from_size(App::Mm, "1x2X3").unwrap(), WorkloadSpec::mm(1, 2, 3));
    assert_eq!(WorkloadSpec::from_size(App::Filter2d, "256").unwrap(), WorkloadSpec::filter2d(256, 256));
    match WorkloadSpec::from_size(App::Filter2d, "640x480:3").unwrap() {
        WorkloadSpec::Filter2d { width: 640, height: 480, kernel_size: 3, .. } => {}
        w => panic!("{w:?}"),
    }
    assert_eq!(WorkloadSpec::from_size(App::MmT, "400000").unwrap().tasks(), 400_000);
    assert!(WorkloadSpec::from_size(App::Mm, "1x2").is_err());
    assert!(WorkloadSpec::from_size(App::Fft, "8192:2").is_err());
    assert!(WorkloadSpec::from_size(App::Filter2d, "64x64:k").is_err());
}

#[test]
fn zero_sizes_are_rejected() {
    assert!(WorkloadSpec::mm(0, 4, 4).check().is_err());
    assert!(WorkloadSpec::filter2d(4, 0).check().is_err());
    assert!(WorkloadSpec::mmt(0).check().is_err());
    let d = common::template(App::Mm);
    assert!(matches!(bind_workload(&d, &WorkloadSpec::mm(0, 1, 1)), Err(MappingError::Workload(_))));
}

#[test]
fn binding_checks_the_workload_fits_the_pus() {
    let mm = common::template(App::Mm);
    let b = bind_workload(&mm, &WorkloadSpec::mm(768, 768, 768)).unwrap();
    assert_eq!(b.subtasks, 216);
    assert_eq!(b.tasks, 1);
    let f = common::template(App::Filter2d);
    let b = bind_workload(&f, &WorkloadSpec::filter2d(128, 128)).unwrap();
    assert_eq!(b.subtasks, 16);
    let w3 = WorkloadSpec::from_size(App::Filter2d, "128x128:3").unwrap();
    assert!(matches!(bind_workload(&f, &w3), Err(MappingError::ShapeMismatch { .. })));
    assert_eq!(bind_workload(&ea4rca::DesignSpec::empty("none"), &WorkloadSpec::mmt(1)), Err(MappingError::NoPus));
}

#[test]
fn fft_core_memory() {
    assert_eq!(fft_core_bytes(8192, 4, 2, 2), 33_792);
    assert_eq!(fft_core_bytes(8192, 4, 2, 4), 17_408);
    assert_eq!(fft_core_bytes(8192, 4, 2, 8), 9_216);
}

#[test]
fn template_params_are_checked() {
    let mut p = TemplateParams::for_app(App::Fft);
    p.butterfly_cores = 6;
    assert!(template_design(App::Fft, &p).is_err());
    let mut p = TemplateParams::for_app(App::MmT);
    p.du_count = 10;
    assert!(template_design(App::MmT, &p).is_err());
    let mut p = TemplateParams::for_app(App::Filter2d);
    p.block_side = 20;
    assert!(template_design(App::Filter2d, &p).is_err());
    let mut p = TemplateParams::for_app(App::Mm);
    p.pu_tile = 48;
    assert!(template_design(App::Mm, &p).is_err());
    let mut p = TemplateParams::for_app(App::Mm);
    p.du_count = 7;
    assert!(template_design(App::Mm, &p).is_err());
}

#[test]
fn subtasks_for_streaming_workloads_are_unbounded() {
    let p = TemplateParams::for_app(App::Fft);
    assert_eq!(subtask_count(&WorkloadSpec::fft(1024), &p), Subtasks::Unbounded);
    assert_eq!(subtask_count(&WorkloadSpec::mmt(5), &p), Subtasks::Unbounded);
    let p = TemplateParams::for_app(App::Filter2d);
    assert_eq!(subtask_count(&WorkloadSpec::filter2d(100, 64), &p), Subtasks::Finite(4 * 2));
}

proptest! {
    #[test]
    fn iteration_formulas_match_stepping(m in 1u64..5000, k in 1u64..5000, n in 1u64..5000, t in 1u64..300, pus in 1u64..64) {
        let tiles = tiles_by_stepping(m, t) * tiles_by_stepping(k, t) * tiles_by_stepping(n, t);
        prop_assert_eq!(iter_kernel(m, k, n, t), tiles);
        let rounds = iter_engine(m, k, n, t, pus);
        prop_assert!(rounds * pus >= tiles);
        prop_assert!(rounds == 0 || (rounds - 1) * pus < tiles);
    }

    #[test]
    fn workload_json_round_trip(m in 1u64..10_000, w in 1u64..10_000, tasks in 1u64..1_000_000) {
        for spec in [WorkloadSpec::mm(m, w, m), WorkloadSpec::filter2d(w, m), WorkloadSpec::fft(1 << (m % 14)), WorkloadSpec::mmt(tasks)] {
            let text = serde_json::to_string(&spec).unwrap();
            prop_assert_eq!(serde_json::from_str::<WorkloadSpec>(&text).unwrap(), spec);
        }
    }
}
