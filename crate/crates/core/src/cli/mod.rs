//! Command-line front end: `prepare`, `train`, `eval`, `analyze` and `bench`.

mod output;
mod overrides;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::{
    calibration_csv, calibration_inputs, distance_csv, ece, ece_by_confidence, embedding_distances,
    regularizer_terms, taylor_check, taylor_csv, taylor_summary,
};
use crate::benchgen::{self, BenchSpec};
use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::evaluation::{
    binned_csv, binned_report, overall_csv, paired_t_test, rank_queries, stratified_csv,
    stratified_report, ttest_csv, DegreeBins, DegreeFeature, KnownTriples, RankResult, Summary,
    TieMode,
};
use crate::graph::{find_split_file, KnowledgeGraph, Split};
use crate::models::ModelParams;
use crate::numerics::{Purpose, RngStream};
use crate::training::{load_checkpoint, save_checkpoint, train, Checkpoint, TrainConfig};

pub use output::{entry, file_digest, OutDir, MANIFEST};
pub use overrides::{BenchKeys, KeySet, Overrides, TrainKeys};

const PREPARED_FILES: [&str; 6] = [
    "entities.tsv",
    "relations.tsv",
    "train.tsv",
    "valid.tsv",
    "test.tsv",
    "dataset.meta",
];

#[derive(Debug, Parser)]
#[command(
    name = "kgmix",
    version,
    about = "Degree-aware knowledge graph completion with same-tail mixup"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Index raw train/valid/test TSVs: vocabularies, inverse-augmented splits, degree summaries.
    Prepare {
        /// Directory holding train, valid and test (`.txt`, `.tsv` or no extension).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite existing outputs.
        #[arg(long)]
        force: bool,
    },
    /// Train a model on a prepared dataset.
    #[command(
        after_help = "Precedence: built-in defaults (or --desk) < --config file < flags.\n\
        Defaults follow the tuned values reported for the method (degree_threshold 5, \
        synth_per_triple 5, synth_loss_weight 1, swa_lr 5e-4). mix_alpha and \
        pretrain_epochs have no published tuned value; their defaults are this tool's."
    )]
    Train {
        /// Prepared dataset directory.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from the small desk-scale settings instead of the full-scale defaults.
        #[arg(long)]
        desk: bool,
        #[arg(long)]
        force: bool,
        /// Print one line per epoch to stderr.
        #[arg(long)]
        progress: bool,
        #[command(flatten)]
        overrides: Overrides<TrainKeys>,
    },
    /// Filtered ranking metrics, overall and by tail-relation degree.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Split to rank.
        #[arg(long, default_value = "test")]
        split: String,
        /// `standard` for [0,1) [1,10) [10,50) [50,inf), or comma-separated lower edges.
        #[arg(long, default_value = "standard")]
        bins: String,
        /// Tie handling: mean, optimistic or pessimistic.
        #[arg(long, default_value = "mean")]
        tie: String,
        /// Second checkpoint for a paired t-test on per-query reciprocal ranks.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Calibration, embedding distances, degree stratification and the expansion check.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long, default_value = "standard")]
        bins: String,
        /// Low-degree threshold; defaults to the checkpoint's degree_threshold.
        #[arg(long = "degree_threshold")]
        degree_threshold: Option<usize>,
        /// Partners per triple for the regularizer estimate; defaults to synth_per_triple.
        #[arg(long = "synth_per_triple")]
        synth_per_triple: Option<usize>,
        /// Defaults to the checkpoint's mix_alpha.
        #[arg(long = "mix_alpha")]
        mix_alpha: Option<f64>,
        /// Number of (triple, partner) instances for the expansion check.
        #[arg(long = "taylor_samples", default_value_t = 100)]
        taylor_samples: usize,
        /// Comma-separated tau values for the residual check.
        #[arg(long, default_value = "0.01")]
        taus: String,
        /// Equal-width confidence bins for the secondary calibration table.
        #[arg(long = "confidence_bins", default_value_t = 10)]
        confidence_bins: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        force: bool,
    },
    /// Generate a degree-skewed synthetic benchmark.
    Bench {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the benchmark even if the generated distribution misses its targets.
        #[arg(long = "skip_self_check")]
        skip_self_check: bool,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        overrides: Overrides<BenchKeys>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Prepare { data, out, force } => prepare(&data, &out, force),
        Cmd::Train {
            data,
            out,
            config,
            desk,
            force,
            progress,
            overrides,
        } => {
            let cfg = train_config(desk, config.as_deref(), &overrides)?;
            train_cmd(&data, &out, &cfg, config.as_deref(), force, progress)
        }
        Cmd::Eval {
            data,
            checkpoint,
            out,
            split,
            bins,
            tie,
            compare,
            force,
        } => eval_cmd(EvalArgs {
            data,
            checkpoint,
            out,
            split: split.parse()?,
            bins: DegreeBins::parse(&bins)?,
            tie: tie.parse()?,
            compare,
            force,
        }),
        Cmd::Analyze {
            data,
            checkpoint,
            out,
            split,
            bins,
            degree_threshold,
            synth_per_triple,
            mix_alpha,
            taylor_samples,
            taus,
            confidence_bins,
            seed,
            force,
        } => analyze_cmd(AnalyzeArgs {
            data,
            checkpoint,
            out,
            split: split.parse()?,
            bins: DegreeBins::parse(&bins)?,
            degree_threshold,
            synth_per_triple,
            mix_alpha,
            taylor_samples,
            taus: parse_list(&taus)?,
            confidence_bins,
            seed,
            force,
        }),
        Cmd::Bench {
            out,
            config,
            skip_self_check,
            force,
            overrides,
        } => bench_cmd(&out, config.as_deref(), &overrides, skip_self_check, force),
    }
}

fn argv() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad number {s:?}")))
        })
        .collect()
}

/// Defaults, then the config file, then command-line flags.
pub fn train_config(
    desk: bool,
    config: Option<&Path>,
    overrides: &Overrides<TrainKeys>,
) -> Result<TrainConfig> {
    let mut cfg = if desk {
        TrainConfig::desk()
    } else {
        TrainConfig::default()
    };
    if let Some(path) = config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text, path)?;
    }
    for (k, v) in &overrides.pairs {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepared_inputs(dir: &Path) -> Vec<PathBuf> {
    PREPARED_FILES.iter().map(|f| dir.join(f)).collect()
}

fn load_dataset(dir: &Path) -> Result<KnowledgeGraph> {
    let g = KnowledgeGraph::load_prepared(dir)?;
    if !g.is_inverse_augmented() {
        return Err(Error::Incompatible(format!(
            "{} was not prepared with inverse relations",
            dir.display()
        )));
    }
    Ok(g)
}

fn load_model(path: &Path, g: &KnowledgeGraph) -> Result<Checkpoint> {
    let ck = load_checkpoint(path)?;
    let p = &ck.params;
    if p.num_entities() != g.num_entities() || p.num_relations() != g.num_relations() {
        return Err(Error::Incompatible(format!(
            "{} has {} entities and {} relations, dataset has {} and {}",
            path.display(),
            p.num_entities(),
            p.num_relations(),
            g.num_entities(),
            g.num_relations()
        )));
    }
    Ok(ck)
}

pub fn prepare(data: &Path, out: &Path, force: bool) -> Result<()> {
    let inputs: Vec<PathBuf> = Split::ALL
        .iter()
        .map(|&s| find_split_file(data, s))
        .collect::<Result<_>>()?;
    let raw = KnowledgeGraph::load_dir(data)?;
    for split in [Split::Valid, Split::Test] {
        if raw.split(split).is_empty() {
            eprintln!("warning: {} split is empty", split.name());
        }
    }
    if raw.train.is_empty() {
        return Err(Error::Empty("training split".into()));
    }
    let names = [
        &PREPARED_FILES[..],
        &[
            "degree_entities.csv",
            "degree_pairs.csv",
            "degree_histogram.csv",
        ],
    ]
    .concat();
    let mut dir = OutDir::open(out, &names, force)?;
    let g = raw.add_inverses()?;
    g.save_prepared(out)?;
    for f in PREPARED_FILES {
        dir.record(f);
    }
    let idx = DegreeIndex::from_graph(&g);
    dir.write("degree_entities.csv", idx.entity_csv(&g.entities))?;
    dir.write("degree_pairs.csv", idx.pair_csv(&g.entities, &g.relations))?;
    dir.write("degree_histogram.csv", idx.histogram_csv())?;
    println!(
        "{} entities, {} relations, {} train / {} valid / {} test triples",
        g.num_entities(),
        g.original_relations(),
        g.train.len() / 2,
        g.valid.len() / 2,
        g.test.len() / 2
    );
    dir.finish(
        vec![entry("command", "prepare"), entry("argv", argv())],
        &inputs,
    )
}

struct Progress;

impl crate::training::TrainObserver for Progress {
    fn on_epoch_end(&mut self, epoch: usize, _params: &ModelParams, averaged: bool) {
        eprintln!(
            "epoch {} done{}",
            epoch + 1,
            if averaged { " (swa)" } else { "" }
        );
    }
}

pub fn train_cmd(
    data: &Path,
    out: &Path,
    cfg: &TrainConfig,
    config_file: Option<&Path>,
    force: bool,
    progress: bool,
) -> Result<()> {
    let g = load_dataset(data)?;
    let idx = DegreeIndex::from_graph(&g);
    let mut dir = OutDir::open(out, &["final.ckpt", "swa.ckpt", "report.csv"], force)?;
    let outcome = if progress {
        crate::training::train_with_observer(&g, &idx, cfg, &mut Progress)?
    } else {
        train(&g, &idx, cfg)?
    };
    let text = cfg.to_text();
    let epochs = u32::try_from(cfg.epochs).unwrap_or(u32::MAX);
    save_checkpoint(&dir.path("final.ckpt"), &outcome.params, &text, epochs)?;
    dir.record("final.ckpt");
    if let Some(avg) = &outcome.swa {
        save_checkpoint(&dir.path("swa.ckpt"), avg, &text, epochs)?;
        dir.record("swa.ckpt");
    } else if dir.path("swa.ckpt").exists() {
        // a forced rerun without averaging must not leave a stale average behind
        let p = dir.path("swa.ckpt");
        fs::remove_file(&p).map_err(|e| Error::io(p, e))?;
    }
    dir.write("report.csv", outcome.report.to_csv())?;
    let r = &outcome.report;
    println!(
        "loss {:.6} -> {:.6} over {} epochs; |E_thresh| = {}",
        r.initial_loss,
        r.final_loss(),
        r.epochs.len(),
        r.e_thresh
    );
    let mut inputs = prepared_inputs(data);
    inputs.extend(config_file.map(Path::to_path_buf));
    let mut entries = vec![
        entry("command", "train"),
        entry("argv", argv()),
        entry("seed", cfg.seed),
    ];
    entries.extend(
        crate::training::CONFIG_KEYS
            .iter()
            .map(|&k| entry(format!("config.{k}"), cfg.get(k).unwrap_or_default())),
    );
    dir.finish(entries, &inputs)
}

struct EvalArgs {
    data: PathBuf,
    checkpoint: PathBuf,
    out: PathBuf,
    split: Split,
    bins: DegreeBins,
    tie: TieMode,
    compare: Option<PathBuf>,
    force: bool,
}

fn rank_split(
    params: &ModelParams,
    g: &KnowledgeGraph,
    idx: &DegreeIndex,
    split: Split,
    tie: TieMode,
) -> Result<Vec<RankResult>> {
    let queries = g.split(split);
    if queries.is_empty() {
        return Err(Error::Empty(format!("{} split", split.name())));
    }
    rank_queries(params, queries, &KnownTriples::from_graph(g), idx, tie)
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let g = load_dataset(&a.data)?;
    let idx = DegreeIndex::from_graph(&g);
    let ck = load_model(&a.checkpoint, &g)?;
    let other = a
        .compare
        .as_deref()
        .map(|p| load_model(p, &g))
        .transpose()?;
    let mut names = vec!["metrics_overall.csv", "metrics_binned.csv"];
    if other.is_some() {
        names.push("ttest.csv");
    }
    let mut dir = OutDir::open(&a.out, &names, a.force)?;

    let results = rank_split(&ck.params, &g, &idx, a.split, a.tie)?;
    let summary = Summary::of_results(&results)?;
    dir.write("metrics_overall.csv", overall_csv(&summary))?;
    dir.write(
        "metrics_binned.csv",
        binned_csv(&binned_report(&results, &a.bins)),
    )?;
    println!(
        "{} queries: MRR {:.4}  Hits@1 {:.4}  Hits@3 {:.4}  Hits@10 {:.4}",
        summary.count, summary.mrr, summary.hits1, summary.hits3, summary.hits10
    );
    let mut inputs = prepared_inputs(&a.data);
    inputs.push(a.checkpoint.clone());
    if let (Some(other), Some(path)) = (other, &a.compare) {
        let second = rank_split(&other.params, &g, &idx, a.split, a.tie)?;
        let rr = |rs: &[RankResult]| rs.iter().map(|r| 1.0 / r.rank).collect::<Vec<f64>>();
        let t = paired_t_test(&rr(&results), &rr(&second))?;
        dir.write("ttest.csv", ttest_csv(&t))?;
        println!(
            "paired t-test vs {}: mean diff {:.5}, p = {:.4}{}",
            path.display(),
            t.mean_diff,
            t.p_value,
            if t.significant { " (significant)" } else { "" }
        );
        inputs.push(path.clone());
    }
    dir.finish(
        vec![
            entry("command", "eval"),
            entry("argv", argv()),
            entry("split", a.split.name()),
            entry("tie", format!("{:?}", a.tie).to_lowercase()),
            entry("bins", format!("{:?}", a.bins.edges())),
        ],
        &inputs,
    )
}

struct AnalyzeArgs {
    data: PathBuf,
    checkpoint: PathBuf,
    out: PathBuf,
    split: Split,
    bins: DegreeBins,
    degree_threshold: Option<usize>,
    synth_per_triple: Option<usize>,
    mix_alpha: Option<f64>,
    taylor_samples: usize,
    taus: Vec<f64>,
    confidence_bins: usize,
    seed: Option<u64>,
    force: bool,
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<()> {
    let g = load_dataset(&a.data)?;
    let idx = DegreeIndex::from_graph(&g);
    let ck = load_model(&a.checkpoint, &g)?;
    let cfg = ck.config()?;
    let threshold = a.degree_threshold.unwrap_or(cfg.degree_threshold);
    let k = a.synth_per_triple.unwrap_or(cfg.synth_per_triple);
    let alpha = a.mix_alpha.unwrap_or(cfg.mix_alpha);
    let seed = a.seed.unwrap_or(cfg.seed);
    let params = &ck.params;

    let strat_names: Vec<String> = DegreeFeature::ALL
        .iter()
        .map(|f| format!("stratified_{}.csv", f.as_str()))
        .collect();
    let mut names = vec![
        "calibration.csv",
        "calibration_confidence.csv",
        "distances.csv",
        "stratified_joint.csv",
        "taylor.csv",
        "taylor.txt",
    ];
    names.extend(strat_names.iter().map(String::as_str));
    let mut dir = OutDir::open(&a.out, &names, a.force)?;

    let results = rank_split(params, &g, &idx, a.split, TieMode::Mean)?;
    let items = calibration_inputs(&results);
    let cal = ece(&items, &a.bins)?;
    dir.write("calibration.csv", calibration_csv(&cal))?;
    dir.write(
        "calibration_confidence.csv",
        calibration_csv(&ece_by_confidence(&items, a.confidence_bins)?),
    )?;
    println!("ECE {:.4} over {} queries", cal.ece, cal.count);

    let dist = embedding_distances(params, &idx, threshold)?;
    if dist.is_none() {
        eprintln!("warning: no training triple below degree threshold {threshold}");
    }
    dir.write("distances.csv", distance_csv(dist.as_ref()))?;

    for (f, name) in DegreeFeature::ALL.iter().zip(&strat_names) {
        let rows = stratified_report(&results, &idx, *f, a.bins.edges(), None)?;
        dir.write(name, stratified_csv(f.as_str(), None, &rows))?;
    }
    let joint = stratified_report(
        &results,
        &idx,
        DegreeFeature::TailRelation,
        a.bins.edges(),
        Some((DegreeFeature::OtherTailRelation, a.bins.edges())),
    )?;
    dir.write(
        "stratified_joint.csv",
        stratified_csv(
            DegreeFeature::TailRelation.as_str(),
            Some(DegreeFeature::OtherTailRelation.as_str()),
            &joint,
        ),
    )?;

    let low = idx.below_threshold(threshold);
    let mut rng = RngStream::new(seed, Purpose::Analysis);
    let mut reports = Vec::new();
    if !low.is_empty() {
        let policy = cfg.candidate_policy;
        for _ in 0..a.taylor_samples {
            let ei = low[rng.below(low.len())];
            let cands = idx.candidates(&ei, policy);
            if cands.is_empty() {
                continue;
            }
            let ej = cands[rng.below(cands.len())];
            reports.push(taylor_check(params, &ei, &ej, &a.taus)?);
        }
    }
    let reg = regularizer_terms(params, &low, &idx, k.max(1), alpha, &mut rng)?;
    dir.write("taylor.csv", taylor_csv(&reports))?;
    let summary = taylor_summary(&reports, &reg);
    print!("{summary}");
    dir.write("taylor.txt", summary)?;

    let mut inputs = prepared_inputs(&a.data);
    inputs.push(a.checkpoint.clone());
    dir.finish(
        vec![
            entry("command", "analyze"),
            entry("argv", argv()),
            entry("seed", seed),
            entry("degree_threshold", threshold),
            entry("synth_per_triple", k),
            entry("mix_alpha", alpha),
            entry("split", a.split.name()),
        ],
        &inputs,
    )
}

pub fn bench_spec(config: Option<&Path>, overrides: &Overrides<BenchKeys>) -> Result<BenchSpec> {
    let mut spec = BenchSpec::default();
    if let Some(path) = config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        spec.apply_text(&text, path)?;
    }
    for (k, v) in &overrides.pairs {
        spec.set(k, v)?;
    }
    spec.validate()?;
    Ok(spec)
}

fn bench_cmd(
    out: &Path,
    config: Option<&Path>,
    overrides: &Overrides<BenchKeys>,
    skip_self_check: bool,
    force: bool,
) -> Result<()> {
    let spec = bench_spec(config, overrides)?;
    let names = ["train.txt", "valid.txt", "test.txt", "bench.meta"];
    let mut dir = OutDir::open(out, &names, force)?;
    let bench = benchgen::generate(&spec)?;
    if !skip_self_check {
        benchgen::self_check(&bench, &spec)?;
    }
    benchgen::write_benchmark(&bench, &spec, out)?;
    for n in names {
        dir.record(n);
    }
    let s = &bench.stats;
    println!(
        "{} triples over {} pairs; slope {:.3}; [1,10) share {:.3}",
        bench.graph.train.len() + bench.graph.valid.len() + bench.graph.test.len(),
        s.pairs,
        s.slope,
        s.low_bin_fraction
    );
    let inputs: Vec<PathBuf> = config.map(Path::to_path_buf).into_iter().collect();
    let mut entries = vec![
        entry("command", "bench"),
        entry("argv", argv()),
        entry("seed", spec.seed),
        entry("self_check", !skip_self_check),
    ];
    entries.extend(
        benchgen::BENCH_KEYS
            .iter()
            .map(|&k| entry(format!("spec.{k}"), spec.get(k).unwrap_or_default())),
    );
    dir.finish(entries, &inputs)
}
