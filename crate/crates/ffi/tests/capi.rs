mod common;

use std::ffi::{CStr, CString};
use std::ptr;

use kgmix::degree::DegreeIndex;
use kgmix::graph::KnowledgeGraph;
use kgmix_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = kgmix_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn open(dir: &std::path::Path) -> *mut KgmixDataset {
    let mut ds = ptr::null_mut();
    let path = cstr(dir.to_str().unwrap());
    assert_eq!(
        unsafe { kgmix_dataset_open(path.as_ptr(), &mut ds) },
        KgmixStatus::Ok
    );
    ds
}

fn trained(ds: *const KgmixDataset, extra: &str) -> *mut KgmixModel {
    let mut m = ptr::null_mut();
    let cfg = cstr(&format!("epochs = 2\n{extra}"));
    assert_eq!(
        unsafe { kgmix_model_train(ds, cfg.as_ptr(), &mut m) },
        KgmixStatus::Ok,
        "{}",
        last_error()
    );
    m
}

#[test]
fn dataset_queries_match_library() {
    let tmp = tempfile::tempdir().unwrap();
    common::prepared(tmp.path(), 0);
    let g = KnowledgeGraph::load_prepared(tmp.path()).unwrap();
    let idx = DegreeIndex::from_graph(&g);
    let ds = open(tmp.path());

    let (mut ne, mut nr) = (0usize, 0usize);
    assert_eq!(
        unsafe { kgmix_dataset_sizes(ds, &mut ne, &mut nr) },
        KgmixStatus::Ok
    );
    assert_eq!((ne, nr), (g.num_entities(), g.num_relations()));

    let name = g.entities.name(7).unwrap();
    let mut id = usize::MAX;
    assert_eq!(
        unsafe { kgmix_entity_id(ds, cstr(name).as_ptr(), &mut id) },
        KgmixStatus::Ok
    );
    assert_eq!(id, 7);
    let inv = format!("{}__inv", g.relations.name(1).unwrap());
    assert_eq!(
        unsafe { kgmix_relation_id(ds, cstr(&inv).as_ptr(), &mut id) },
        KgmixStatus::Ok
    );
    assert_eq!(id, 1 + g.original_relations());

    for t in g.train.iter().take(50) {
        let mut d = 0usize;
        assert_eq!(
            unsafe { kgmix_tail_relation_degree(ds, t.tail, t.relation, &mut d) },
            KgmixStatus::Ok
        );
        assert_eq!(d, idx.tail_relation_degree(t.tail, t.relation));
        assert!(d >= 1);
    }
    unsafe { kgmix_dataset_free(ds) };
}

#[test]
fn train_score_evaluate_save_load() {
    let tmp = tempfile::tempdir().unwrap();
    common::prepared(tmp.path(), 1);
    let ds = open(tmp.path());
    let m = trained(ds, "method = kg_mixup");
    let (mut ne, mut nr) = (0usize, 0usize);
    unsafe { kgmix_dataset_sizes(ds, &mut ne, &mut nr) };

    let mut all = vec![0.0; ne];
    assert_eq!(
        unsafe { kgmix_model_score_all(m, 3, 2, all.as_mut_ptr(), ne) },
        KgmixStatus::Ok
    );
    for t in [0, 5, ne - 1] {
        let mut s = f64::NAN;
        assert_eq!(
            unsafe { kgmix_model_score(m, 3, 2, t, &mut s) },
            KgmixStatus::Ok
        );
        assert!((s - all[t]).abs() <= 1e-12 * s.abs().max(1.0));
    }

    let mut metrics = KgmixMetrics::default();
    assert_eq!(
        unsafe { kgmix_evaluate(m, ds, KgmixSplit::Test as u32, &mut metrics) },
        KgmixStatus::Ok
    );
    let g = KnowledgeGraph::load_prepared(tmp.path()).unwrap();
    assert_eq!(metrics.count, g.test.len());
    assert!(metrics.mrr > 0.0 && metrics.mrr <= 1.0);
    assert!(metrics.hits1 <= metrics.hits3 && metrics.hits3 <= metrics.hits10);

    let path = tmp.path().join("m.ckpt");
    let cpath = cstr(path.to_str().unwrap());
    assert_eq!(
        unsafe { kgmix_model_save(m, cpath.as_ptr()) },
        KgmixStatus::Ok
    );
    let mut loaded = ptr::null_mut();
    assert_eq!(
        unsafe { kgmix_model_load(cpath.as_ptr(), &mut loaded) },
        KgmixStatus::Ok
    );
    let mut again = vec![0.0; ne];
    unsafe { kgmix_model_score_all(loaded, 3, 2, again.as_mut_ptr(), ne) };
    // checkpoints store f32
    for (a, b) in all.iter().zip(&again) {
        assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
    }
    unsafe {
        kgmix_model_free(m);
        kgmix_model_free(loaded);
        kgmix_dataset_free(ds);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let tmp = tempfile::tempdir().unwrap();
    common::prepared(tmp.path(), 2);
    let ds = open(tmp.path());

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { kgmix_dataset_open(ptr::null(), &mut out) },
        KgmixStatus::NullPointer
    );
    assert!(out.is_null());
    assert!(last_error().contains("dir"));

    let missing = cstr(tmp.path().join("nope").to_str().unwrap());
    assert_eq!(
        unsafe { kgmix_dataset_open(missing.as_ptr(), &mut out) },
        KgmixStatus::DataError
    );
    assert!(last_error().contains("nope"));

    let mut m = ptr::null_mut();
    let bad = cstr("lr = fast");
    assert_eq!(
        unsafe { kgmix_model_train(ds, bad.as_ptr(), &mut m) },
        KgmixStatus::ConfigError
    );
    assert!(m.is_null());
    assert!(last_error().contains("lr"));

    let m = trained(ds, "");
    let mut s = 0.0;
    assert_eq!(
        unsafe { kgmix_model_score(m, 0, 0, 10_000, &mut s) },
        KgmixStatus::OutOfRange
    );
    let mut buf = [0.0; 3];
    assert_eq!(
        unsafe { kgmix_model_score_all(m, 0, 0, buf.as_mut_ptr(), buf.len()) },
        KgmixStatus::InvalidArgument
    );
    let mut metrics = KgmixMetrics::default();
    assert_eq!(
        unsafe { kgmix_evaluate(m, ds, 9, &mut metrics) },
        KgmixStatus::InvalidArgument
    );
    let mut id = 0;
    assert_eq!(
        unsafe { kgmix_entity_id(ds, cstr("no-such-entity").as_ptr(), &mut id) },
        KgmixStatus::OutOfRange
    );

    let other_dir = tempfile::tempdir().unwrap();
    let spec = kgmix::benchgen::BenchSpec {
        n_entities: 40,
        n_relations: 6,
        n_triples: 400,
        ..Default::default()
    };
    kgmix::benchgen::generate(&spec)
        .unwrap()
        .graph
        .add_inverses()
        .unwrap()
        .save_prepared(other_dir.path())
        .unwrap();
    let other = open(other_dir.path());
    assert_eq!(
        unsafe { kgmix_evaluate(m, other, KgmixSplit::Test as u32, &mut metrics) },
        KgmixStatus::Incompatible
    );

    unsafe {
        kgmix_model_free(m);
        kgmix_model_free(ptr::null_mut());
        kgmix_dataset_free(ds);
        kgmix_dataset_free(other);
        kgmix_dataset_free(ptr::null_mut());
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(kgmix_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
