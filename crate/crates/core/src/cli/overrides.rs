//! `--key value` flags generated from a list of config keys.

use std::marker::PhantomData;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches};

use crate::benchgen::BENCH_KEYS;
use crate::training::CONFIG_KEYS;

pub trait KeySet {
    const KEYS: &'static [&'static str];
    const HEADING: &'static str;
    fn help(key: &str) -> &'static str;
}

#[derive(Debug, Clone, Copy)]
pub struct TrainKeys;

#[derive(Debug, Clone, Copy)]
pub struct BenchKeys;

impl KeySet for TrainKeys {
    const KEYS: &'static [&'static str] = CONFIG_KEYS;
    const HEADING: &'static str = "Training config (flags override --config)";

    fn help(key: &str) -> &'static str {
        match key {
            "model_kind" => "distmult | tucker",
            "entity_dim" => "Entity embedding size",
            "relation_dim" => "Relation embedding size (equal to entity_dim for DistMult)",
            "epochs" => "Total epochs, pre-training included",
            "pretrain_epochs" => {
                "kg_mixup epochs without synthetic triples before mixing starts. \
                 `auto` = epochs/4 (no published tuned value; this default is ours)"
            }
            "batch_size" => "Positive triples per batch",
            "negatives" => "Corrupted tails per positive",
            "lr" => "Adam learning rate",
            "lr_decay" => "Per-epoch multiplicative decay outside the SWA phase",
            "label_smoothing" => "Targets become (1-eps)*y + eps/2",
            "dropout_1" => "Dropout on the head input",
            "dropout_2" => "Dropout inside the TuckER contraction",
            "dropout_3" => "Dropout on the hidden vector before the tail dot product",
            "method" => "standard | oversample | reweight | focal | kg_mixup",
            "degree_threshold" => "Tail-relation degree below which a triple counts as low degree",
            "synth_per_triple" => "Synthetic triples per low-degree triple",
            "synth_loss_weight" => "Weight of the synthetic loss term",
            "mix_alpha" => {
                "Beta(alpha, alpha) parameter for the mixing weight \
                 (no published tuned value; default 1 is ours)"
            }
            "candidate_policy" => "strict | lenient | strict_then_lenient",
            "focal_gamma" => "Focal exponent (method focal only)",
            "reweight_cap" => "Upper bound on the reweighting factor",
            "swa_enabled" => "true | false | auto (auto = on for kg_mixup only)",
            "swa_start_fraction" => "Fraction of epochs after which averaging starts",
            "swa_lr" => "Constant learning rate during averaging",
            "seed" => "Seed for every random stream",
            _ => "",
        }
    }
}

impl KeySet for BenchKeys {
    const KEYS: &'static [&'static str] = BENCH_KEYS;
    const HEADING: &'static str = "Benchmark spec (flags override --config)";

    fn help(key: &str) -> &'static str {
        match key {
            "n_entities" => "Number of entities",
            "n_relations" => "Number of relations; the last third are compositions",
            "n_triples" => "Total triples across all splits",
            "skew" => "Power-law exponent of tail-relation pair popularity",
            "seed" => "Generator seed",
            "train_fraction" => "Share of triples kept for training",
            "valid_fraction" => "Share held out for validation",
            "test_fraction" => "Share held out for testing",
            "noise" => "Share of uniformly random heads",
            "cluster_bits" => "log2 of the number of latent entity clusters",
            _ => "",
        }
    }
}

/// Key/value pairs given on the command line, in key order.
#[derive(Debug, Clone)]
pub struct Overrides<K> {
    pub pairs: Vec<(String, String)>,
    keys: PhantomData<K>,
}

impl<K> Default for Overrides<K> {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            keys: PhantomData,
        }
    }
}

impl<K: KeySet> FromArgMatches for Overrides<K> {
    fn from_arg_matches(matches: &ArgMatches) -> Result<Self, clap::Error> {
        let mut out = Self::default();
        out.update_from_arg_matches(matches)?;
        Ok(out)
    }

    fn update_from_arg_matches(&mut self, matches: &ArgMatches) -> Result<(), clap::Error> {
        for &key in K::KEYS {
            if let Some(v) = matches.get_one::<String>(key) {
                self.pairs.retain(|(k, _)| k != key);
                self.pairs.push((key.to_owned(), v.clone()));
            }
        }
        Ok(())
    }
}

impl<K: KeySet> Args for Overrides<K> {
    fn augment_args(cmd: Command) -> Command {
        cmd.next_help_heading(K::HEADING)
            .args(K::KEYS.iter().map(|&key| {
                Arg::new(key)
                    .long(key)
                    .value_name("VALUE")
                    .help(K::help(key))
            }))
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}
