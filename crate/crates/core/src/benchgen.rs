//! Deterministic synthetic knowledge graphs with a skewed tail-relation degree
//! distribution and planted, learnable structure.
//!
//! Entities are split into `2^cluster_bits` latent clusters. Each base relation maps
//! a tail cluster `c` to the head cluster `c ⊕ g_r`; the last third of the relations
//! compose two base relations (`g = g_1 ⊕ g_2`) and take their heads from entity
//! chains `a -r1-> b -r2-> t` where those exist. A `noise` fraction of heads is
//! uniform. The number of heads per `(tail, relation)` pair follows
//! `rank^(−skew)`, capped by the size of the head cluster.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{triples_to_tsv, KnowledgeGraph, Split, Triple, Vocab};
use crate::kv;
use crate::numerics::{Purpose, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub n_entities: usize,
    pub n_relations: usize,
    pub n_triples: usize,
    pub skew: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub noise: f64,
    pub cluster_bits: u32,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            n_entities: 300,
            n_relations: 12,
            n_triples: 3000,
            skew: 1.2,
            seed: 0,
            train_fraction: 0.8,
            valid_fraction: 0.1,
            test_fraction: 0.1,
            noise: 0.1,
            cluster_bits: 2,
        }
    }
}

pub const BENCH_KEYS: &[&str] = &[
    "n_entities",
    "n_relations",
    "n_triples",
    "skew",
    "seed",
    "train_fraction",
    "valid_fraction",
    "test_fraction",
    "noise",
    "cluster_bits",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl BenchSpec {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_entities" => self.n_entities = parse(key, value)?,
            "n_relations" => self.n_relations = parse(key, value)?,
            "n_triples" => self.n_triples = parse(key, value)?,
            "skew" => self.skew = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "valid_fraction" => self.valid_fraction = parse(key, value)?,
            "test_fraction" => self.test_fraction = parse(key, value)?,
            "noise" => self.noise = parse(key, value)?,
            "cluster_bits" => self.cluster_bits = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown bench key {other:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "n_entities" => self.n_entities.to_string(),
            "n_relations" => self.n_relations.to_string(),
            "n_triples" => self.n_triples.to_string(),
            "skew" => self.skew.to_string(),
            "seed" => self.seed.to_string(),
            "train_fraction" => self.train_fraction.to_string(),
            "valid_fraction" => self.valid_fraction.to_string(),
            "test_fraction" => self.test_fraction.to_string(),
            "noise" => self.noise.to_string(),
            "cluster_bits" => self.cluster_bits.to_string(),
            _ => return None,
        })
    }

    pub fn apply_text(&mut self, text: &str, source: &Path) -> Result<()> {
        for (k, v) in kv::parse_kv(text, source)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        kv::render_kv(
            BENCH_KEYS
                .iter()
                .map(|&k| (k, self.get(k).unwrap_or_default())),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.n_entities < 2 || self.n_relations == 0 {
            return fail("need at least two entities and one relation");
        }
        if self.n_triples < self.n_entities {
            return fail("n_triples must be at least n_entities");
        }
        let fr = [self.train_fraction, self.valid_fraction, self.test_fraction];
        if fr.iter().any(|f| !(0.0..=1.0).contains(f))
            || (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return fail("split fractions must lie in [0, 1] and sum to 1");
        }
        if !(self.skew > 0.0 && self.skew.is_finite()) {
            return fail("skew must be positive");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return fail("noise must lie in [0, 1)");
        }
        if self.cluster_bits > 8 || (1usize << self.cluster_bits) * 2 > self.n_entities {
            return fail("too many clusters for the number of entities");
        }
        Ok(())
    }

    /// `(train, valid, test)` triple counts.
    pub fn split_counts(&self) -> (usize, usize, usize) {
        let valid = (self.n_triples as f64 * self.valid_fraction).round() as usize;
        let test = (self.n_triples as f64 * self.test_fraction).round() as usize;
        (self.n_triples - valid - test, valid, test)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchStats {
    /// Distinct `(tail, relation)` pairs.
    pub pairs: usize,
    /// Pairs whose allocation hit the head-cluster cap.
    pub capped_pairs: usize,
    pub chain_heads: usize,
    pub noise_heads: usize,
    /// Log-log rank-frequency slope of training pair counts (uncapped ranks, count ≥ 2).
    pub slope: f64,
    /// Share of test queries (triples and their inverses) whose training
    /// tail-relation degree lies in `[1, 10)`.
    pub low_bin_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub graph: KnowledgeGraph,
    pub stats: BenchStats,
}

fn pair_counts(a: f64, skew: f64, cap: usize, max_pairs: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..=max_pairs {
        let c = (a * (i as f64).powf(-skew)).floor();
        if c < 1.0 {
            break;
        }
        out.push((c as usize).min(cap));
    }
    out
}

/// Heads per pair, by popularity rank, summing to exactly `n`.
fn allocate(n: usize, skew: f64, cap: usize, max_pairs: usize) -> Result<Vec<usize>> {
    if cap == 0 || n > cap * max_pairs {
        return Err(Error::Infeasible(format!(
            "{n} triples exceed capacity {}",
            cap * max_pairs
        )));
    }
    let total = |a: f64| pair_counts(a, skew, cap, max_pairs).iter().sum::<usize>();
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while total(hi) <= n {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if total(mid) <= n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut counts = pair_counts(lo, skew, cap, max_pairs);
    let mut deficit = n - counts.iter().sum::<usize>();
    while deficit > 0 && counts.len() < max_pairs {
        counts.push(1);
        deficit -= 1;
    }
    for c in counts.iter_mut().rev() {
        if deficit == 0 {
            break;
        }
        let add = (cap - *c).min(deficit);
        *c += add;
        deficit -= add;
    }
    if deficit > 0 {
        return Err(Error::Infeasible("could not allocate all triples".into()));
    }
    Ok(counts)
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in points {
        num += (x.ln() - mx) * (y.ln() - my);
        den += (x.ln() - mx).powi(2);
    }
    num / den
}

struct Clusters {
    of: Vec<usize>,
    members: Vec<Vec<usize>>,
    cursor: Vec<usize>,
}

pub fn generate(spec: &BenchSpec) -> Result<Benchmark> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed, Purpose::Bench);
    let (ne, nr) = (spec.n_entities, spec.n_relations);
    let n_clusters = 1usize << spec.cluster_bits;

    let mut perm: Vec<usize> = (0..ne).collect();
    rng.shuffle(&mut perm);
    let mut clusters = Clusters {
        of: vec![0; ne],
        members: vec![Vec::new(); n_clusters],
        cursor: vec![0; n_clusters],
    };
    for (j, &v) in perm.iter().enumerate() {
        clusters.of[v] = j % n_clusters;
        clusters.members[j % n_clusters].push(v);
    }
    let cap = clusters.members.iter().map(Vec::len).min().unwrap_or(0) - 1;

    let n_comp = nr / 3;
    let n_base = nr - n_comp;
    let mut shift = vec![0usize; nr];
    let mut parts: Vec<Option<(usize, usize)>> = vec![None; nr];
    for (r, s) in shift.iter_mut().enumerate().take(n_base) {
        *s = if n_clusters > 1 {
            1 + r % (n_clusters - 1)
        } else {
            0
        };
    }
    for j in 0..n_comp {
        let (r1, r2) = ((2 * j) % n_base, (2 * j + 1) % n_base);
        shift[n_base + j] = shift[r1] ^ shift[r2];
        parts[n_base + j] = Some((r1, r2));
    }

    let counts = allocate(spec.n_triples, spec.skew, cap, ne * nr)?;
    let capped_pairs = counts.iter().take_while(|&&c| c == cap).count();

    // tails by popularity rank; composition pairs reuse tails of their second relation
    let mut tail_order: Vec<usize> = (0..ne).collect();
    rng.shuffle(&mut tail_order);
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut tails_of: Vec<Vec<usize>> = vec![Vec::new(); nr];
    let mut pairs = Vec::with_capacity(counts.len());
    for (i, &count) in counts.iter().enumerate() {
        let r = i % nr;
        let preferred = parts[r].and_then(|(_, r2)| {
            tails_of[r2]
                .iter()
                .copied()
                .find(|&t| !used.contains(&(t, r)))
        });
        let t = preferred.unwrap_or_else(|| {
            let mut j = i % ne;
            while used.contains(&(tail_order[j], r)) {
                j = (j + 1) % ne;
            }
            tail_order[j]
        });
        used.insert((t, r));
        tails_of[r].push(t);
        pairs.push((t, r, count));
    }
    // base relations first so chains exist for compositions
    pairs.sort_by_key(|&(_, r, _)| r >= n_base);

    let mut heads_of: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut triples = Vec::with_capacity(spec.n_triples);
    let (mut chain_heads, mut noise_heads) = (0usize, 0usize);
    for &(t, r, count) in &pairs {
        let mut taken: HashSet<usize> = HashSet::from([t]);
        let mut chain: Vec<usize> = Vec::new();
        if let Some((r1, r2)) = parts[r] {
            for &b in heads_of.get(&(t, r2)).map_or(&[][..], Vec::as_slice) {
                chain.extend(heads_of.get(&(b, r1)).map_or(&[][..], Vec::as_slice));
            }
            chain.sort_unstable();
            chain.dedup();
            rng.shuffle(&mut chain);
        }
        let mut chain = chain.into_iter();
        let hc = clusters.of[t] ^ shift[r];
        let mut heads = Vec::with_capacity(count);
        for _ in 0..count {
            let mut pick = None;
            if rng.uniform() < spec.noise {
                for _ in 0..20 {
                    let h = rng.below(ne);
                    if !taken.contains(&h) {
                        pick = Some(h);
                        noise_heads += 1;
                        break;
                    }
                }
            }
            if pick.is_none() {
                pick = chain.by_ref().find(|h| !taken.contains(h));
                if pick.is_some() {
                    chain_heads += 1;
                }
            }
            if pick.is_none() {
                let members = &clusters.members[hc];
                for _ in 0..members.len() {
                    let h = members[clusters.cursor[hc] % members.len()];
                    clusters.cursor[hc] += 1;
                    if !taken.contains(&h) {
                        pick = Some(h);
                        break;
                    }
                }
            }
            let h = pick.ok_or_else(|| Error::Infeasible("head cluster exhausted".into()))?;
            taken.insert(h);
            heads.push(h);
            triples.push(Triple {
                head: h,
                relation: r,
                tail: t,
            });
        }
        heads_of.insert((t, r), heads);
    }

    let (n_train, n_valid, n_test) = spec.split_counts();
    let mut occurrences = vec![0usize; ne];
    let mut rel_count = vec![0usize; nr];
    for e in &triples {
        occurrences[e.head] += 1;
        occurrences[e.tail] += 1;
        rel_count[e.relation] += 1;
    }
    if let Some(v) = occurrences.iter().position(|&c| c < 2) {
        return Err(Error::Infeasible(format!(
            "entity {v} occurs fewer than twice; add triples or reduce entities"
        )));
    }
    let mut order: Vec<usize> = (0..triples.len()).collect();
    rng.shuffle(&mut order);
    let mut held_out = vec![false; triples.len()];
    let (mut test, mut valid) = (Vec::with_capacity(n_test), Vec::with_capacity(n_valid));
    for i in order {
        if test.len() == n_test && valid.len() == n_valid {
            break;
        }
        let e = triples[i];
        if occurrences[e.head] <= 2 || occurrences[e.tail] <= 2 || rel_count[e.relation] <= 1 {
            continue;
        }
        occurrences[e.head] -= 1;
        occurrences[e.tail] -= 1;
        rel_count[e.relation] -= 1;
        held_out[i] = true;
        if test.len() < n_test {
            test.push(e);
        } else {
            valid.push(e);
        }
    }
    if test.len() < n_test || valid.len() < n_valid {
        return Err(Error::Infeasible(format!(
            "could only hold out {} test and {} valid triples without orphaning entities",
            test.len(),
            valid.len()
        )));
    }
    let train: Vec<Triple> = triples
        .iter()
        .zip(&held_out)
        .filter(|(_, &h)| !h)
        .map(|(e, _)| *e)
        .collect();
    debug_assert_eq!(train.len(), n_train);

    let mut pair_train: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &train {
        *pair_train.entry((e.tail, e.relation)).or_default() += 1;
    }
    let mut sorted: Vec<usize> = pair_train.values().copied().collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let points: Vec<(f64, f64)> = sorted
        .iter()
        .enumerate()
        .skip(capped_pairs)
        .filter(|(_, &c)| c >= 2)
        .map(|(i, &c)| ((i + 1) as f64, c as f64))
        .collect();
    let slope = if points.len() >= 2 {
        log_log_slope(&points)
    } else {
        f64::NAN
    };
    // evaluation queries are the test triples and their inverses; the inverse of
    // (h, r, t) has tail-relation degree |{(h, r, ·)}| in the augmented training split
    let mut head_pair: HashMap<(usize, usize), usize> = HashMap::new();
    for e in &train {
        *head_pair.entry((e.head, e.relation)).or_default() += 1;
    }
    let in_low = |d: Option<&usize>| (1..10).contains(d.unwrap_or(&0));
    let low = test
        .iter()
        .map(|e| {
            usize::from(in_low(pair_train.get(&(e.tail, e.relation))))
                + usize::from(in_low(head_pair.get(&(e.head, e.relation))))
        })
        .sum::<usize>();
    let low_bin_fraction = if test.is_empty() {
        0.0
    } else {
        low as f64 / (2 * test.len()) as f64
    };

    let width = |n: usize| n.saturating_sub(1).to_string().len();
    let (we, wr) = (width(ne), width(nr));
    let entities = Vocab::from_names((0..ne).map(|v| format!("e{v:0we$}")))?;
    let relations = Vocab::from_names((0..nr).map(|r| format!("r{r:0wr$}")))?;
    let graph = KnowledgeGraph::new(entities, relations, train, valid, test)?;
    Ok(Benchmark {
        graph,
        stats: BenchStats {
            pairs: pairs.len(),
            capped_pairs,
            chain_heads,
            noise_heads,
            slope,
            low_bin_fraction,
        },
    })
}

/// Checks the generated distribution against the spec: slope within 0.2 of
/// `−skew` and at least a quarter of test triples in the `[1, 10)` bin.
pub fn self_check(bench: &Benchmark, spec: &BenchSpec) -> Result<()> {
    let s = &bench.stats;
    if !((s.slope + spec.skew).abs() <= 0.2) {
        return Err(Error::Infeasible(format!(
            "rank-frequency slope {} is not within 0.2 of {}",
            s.slope, -spec.skew
        )));
    }
    if s.low_bin_fraction < 0.25 {
        return Err(Error::Infeasible(format!(
            "only {:.3} of test triples fall in the [1,10) bin",
            s.low_bin_fraction
        )));
    }
    Ok(())
}

/// Writes `train.txt`, `valid.txt`, `test.txt` and `bench.meta` into `dir`.
pub fn write_benchmark(bench: &Benchmark, spec: &BenchSpec, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = &bench.graph;
    for split in Split::ALL {
        let path = dir.join(format!("{}.txt", split.name()));
        fs::write(
            &path,
            triples_to_tsv(g.split(split), &g.entities, &g.relations),
        )
        .map_err(|e| Error::io(&path, e))?;
    }
    let s = &bench.stats;
    let mut meta = spec.to_text();
    meta.push_str(&kv::render_kv([
        ("pairs", s.pairs.to_string()),
        ("capped_pairs", s.capped_pairs.to_string()),
        ("chain_heads", s.chain_heads.to_string()),
        ("noise_heads", s.noise_heads.to_string()),
        ("slope", s.slope.to_string()),
        ("low_bin_fraction", s.low_bin_fraction.to_string()),
    ]));
    let path = dir.join("bench.meta");
    fs::write(&path, meta).map_err(|e| Error::io(&path, e))
}
