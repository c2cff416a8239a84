//! C ABI over `kgmix`: open a prepared dataset, load or train a model, score
//! triples and compute filtered ranking metrics.
//!
//! Every fallible function returns a [`KgmixStatus`]. On failure the message is
//! available from [`kgmix_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kgmix::degree::DegreeIndex;
use kgmix::evaluation::{rank_queries, KnownTriples, Summary, TieMode};
use kgmix::graph::{KnowledgeGraph, Split};
use kgmix::training::{load_checkpoint, save_checkpoint, train, Checkpoint, TrainConfig};
use kgmix::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgmixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    DataError = 4,
    RuntimeError = 5,
    Incompatible = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgmixSplit {
    Train = 0,
    Valid = 1,
    Test = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KgmixMetrics {
    pub count: usize,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

/// Opaque prepared dataset with its degree index and filter set.
pub struct KgmixDataset {
    graph: KnowledgeGraph,
    index: DegreeIndex,
    known: KnownTriples,
}

/// Opaque model: parameters plus the config that produced them.
pub struct KgmixModel {
    checkpoint: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> KgmixStatus {
    use kgmix::error::ExitClass;
    match err {
        Error::Incompatible(_) => KgmixStatus::Incompatible,
        e => match e.exit_class() {
            ExitClass::Config => KgmixStatus::ConfigError,
            ExitClass::Data => KgmixStatus::DataError,
            ExitClass::Runtime => KgmixStatus::RuntimeError,
        },
    }
}

/// Runs `f`, converting errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), (KgmixStatus, String)>) -> KgmixStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KgmixStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KgmixStatus::Panic
        }
    }
}

fn lift<T>(r: kgmix::Result<T>) -> Result<T, (KgmixStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (KgmixStatus, String) {
    (KgmixStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (KgmixStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (KgmixStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (KgmixStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn check_ids(n: usize, ids: &[(usize, &str)]) -> Result<(), (KgmixStatus, String)> {
    for &(id, what) in ids {
        if id >= n {
            return Err((
                KgmixStatus::OutOfRange,
                format!("{what} id {id} out of range (< {n})"),
            ));
        }
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kgmix_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kgmix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opens a directory written by `kgmix prepare`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kgmix_dataset_open(
    dir: *const c_char,
    out: *mut *mut KgmixDataset,
) -> KgmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let dir = str_arg(dir, "dir")?;
        let graph = lift(KnowledgeGraph::load_prepared(Path::new(dir)))?;
        if !graph.is_inverse_augmented() {
            return Err((
                KgmixStatus::DataError,
                format!("{dir} was not prepared with inverse relations"),
            ));
        }
        let index = DegreeIndex::from_graph(&graph);
        let known = KnownTriples::from_graph(&graph);
        *out = Box::into_raw(Box::new(KgmixDataset {
            graph,
            index,
            known,
        }));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from [`kgmix_dataset_open`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kgmix_dataset_free(ds: *mut KgmixDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Entity and relation counts (relations include inverses).
///
/// # Safety
/// `ds` must be a live dataset handle; outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn kgmix_dataset_sizes(
    ds: *const KgmixDataset,
    num_entities: *mut usize,
    num_relations: *mut usize,
) -> KgmixStatus {
    guard(|| {
        let ds = handle(ds, "dataset")?;
        if num_entities.is_null() || num_relations.is_null() {
            return Err(null("output"));
        }
        *num_entities = ds.graph.num_entities();
        *num_relations = ds.graph.num_relations();
        Ok(())
    })
}

/// Looks up an entity id by name.
///
/// # Safety
/// `ds` must be a live dataset handle, `name` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_entity_id(
    ds: *const KgmixDataset,
    name: *const c_char,
    out: *mut usize,
) -> KgmixStatus {
    guard(|| {
        let ds = handle(ds, "dataset")?;
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ds
            .graph
            .entities
            .get(name)
            .ok_or_else(|| (KgmixStatus::OutOfRange, format!("unknown entity {name:?}")))?;
        Ok(())
    })
}

/// Looks up a relation id by name (`<name>__inv` for inverses).
///
/// # Safety
/// `ds` must be a live dataset handle, `name` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_relation_id(
    ds: *const KgmixDataset,
    name: *const c_char,
    out: *mut usize,
) -> KgmixStatus {
    guard(|| {
        let ds = handle(ds, "dataset")?;
        let name = str_arg(name, "name")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ds.graph.relations.get(name).ok_or_else(|| {
            (
                KgmixStatus::OutOfRange,
                format!("unknown relation {name:?}"),
            )
        })?;
        Ok(())
    })
}

/// Number of training triples `(·, relation, tail)`.
///
/// # Safety
/// `ds` must be a live dataset handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_tail_relation_degree(
    ds: *const KgmixDataset,
    tail: usize,
    relation: usize,
    out: *mut usize,
) -> KgmixStatus {
    guard(|| {
        let ds = handle(ds, "dataset")?;
        if out.is_null() {
            return Err(null("out"));
        }
        check_ids(ds.graph.num_entities(), &[(tail, "entity")])?;
        check_ids(ds.graph.num_relations(), &[(relation, "relation")])?;
        *out = ds.index.tail_relation_degree(tail, relation);
        Ok(())
    })
}

/// Loads a checkpoint written by `kgmix train`.
///
/// # Safety
/// `path` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_load(
    path: *const c_char,
    out: *mut *mut KgmixModel,
) -> KgmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let checkpoint = lift(load_checkpoint(Path::new(path)))?;
        *out = Box::into_raw(Box::new(KgmixModel { checkpoint }));
        Ok(())
    })
}

/// Trains a model on `ds`. `config_text` holds `key = value` lines applied on top
/// of the desk-scale settings; null means those settings unchanged. The model
/// holds the averaged parameters when averaging ran, the final ones otherwise.
///
/// # Safety
/// `ds` must be a live dataset handle, `config_text` null or NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_train(
    ds: *const KgmixDataset,
    config_text: *const c_char,
    out: *mut *mut KgmixModel,
) -> KgmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let ds = handle(ds, "dataset")?;
        let mut cfg = TrainConfig::desk();
        if !config_text.is_null() {
            let text = str_arg(config_text, "config_text")?;
            lift(cfg.apply_text(text, Path::new("<config_text>")))?;
        }
        let outcome = lift(train(&ds.graph, &ds.index, &cfg))?;
        let params = outcome.swa.unwrap_or(outcome.params);
        let epoch = u32::try_from(cfg.epochs).unwrap_or(u32::MAX);
        *out = Box::into_raw(Box::new(KgmixModel {
            checkpoint: Checkpoint {
                params,
                config_text: cfg.to_text(),
                epoch,
            },
        }));
        Ok(())
    })
}

/// Writes the model in checkpoint format.
///
/// # Safety
/// `model` must be a live model handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_save(
    model: *const KgmixModel,
    path: *const c_char,
) -> KgmixStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let path = str_arg(path, "path")?;
        let ck = &m.checkpoint;
        lift(save_checkpoint(
            Path::new(path),
            &ck.params,
            &ck.config_text,
            ck.epoch,
        ))
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_free(model: *mut KgmixModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Score `f(head, relation, tail)` (a logit).
///
/// # Safety
/// `model` must be a live model handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_score(
    model: *const KgmixModel,
    head: usize,
    relation: usize,
    tail: usize,
    out: *mut f64,
) -> KgmixStatus {
    guard(|| {
        let p = &handle(model, "model")?.checkpoint.params;
        if out.is_null() {
            return Err(null("out"));
        }
        check_ids(p.num_entities(), &[(head, "head"), (tail, "tail")])?;
        check_ids(p.num_relations(), &[(relation, "relation")])?;
        *out = lift(p.score(head, relation, tail))?;
        Ok(())
    })
}

/// Scores every entity as tail of `(head, relation)` into `out[0..len]`;
/// `len` must equal the entity count.
///
/// # Safety
/// `model` must be a live model handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kgmix_model_score_all(
    model: *const KgmixModel,
    head: usize,
    relation: usize,
    out: *mut f64,
    len: usize,
) -> KgmixStatus {
    guard(|| {
        let p = &handle(model, "model")?.checkpoint.params;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != p.num_entities() {
            return Err((
                KgmixStatus::InvalidArgument,
                format!(
                    "buffer holds {len} scores, model has {} entities",
                    p.num_entities()
                ),
            ));
        }
        check_ids(p.num_entities(), &[(head, "head")])?;
        check_ids(p.num_relations(), &[(relation, "relation")])?;
        let scores = lift(p.score_all_tails(head, relation))?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&scores);
        Ok(())
    })
}

/// Filtered tail-prediction metrics over one split (a [`KgmixSplit`] value;
/// inverse queries included), ties at their mean rank.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kgmix_evaluate(
    model: *const KgmixModel,
    ds: *const KgmixDataset,
    split: u32,
    out: *mut KgmixMetrics,
) -> KgmixStatus {
    guard(|| {
        let p = &handle(model, "model")?.checkpoint.params;
        let ds = handle(ds, "dataset")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if p.num_entities() != ds.graph.num_entities()
            || p.num_relations() != ds.graph.num_relations()
        {
            return Err((
                KgmixStatus::Incompatible,
                "model and dataset sizes differ".into(),
            ));
        }
        let split = match split {
            s if s == KgmixSplit::Train as u32 => Split::Train,
            s if s == KgmixSplit::Valid as u32 => Split::Valid,
            s if s == KgmixSplit::Test as u32 => Split::Test,
            other => {
                return Err((
                    KgmixStatus::InvalidArgument,
                    format!("unknown split {other}"),
                ))
            }
        };
        let queries = ds.graph.split(split);
        let results = lift(rank_queries(
            p,
            queries,
            &ds.known,
            &ds.index,
            TieMode::Mean,
        ))?;
        let s = lift(Summary::of_results(&results))?;
        *out = KgmixMetrics {
            count: s.count,
            mrr: s.mrr,
            hits1: s.hits1,
            hits3: s.hits3,
            hits10: s.hits10,
        };
        Ok(())
    })
}
