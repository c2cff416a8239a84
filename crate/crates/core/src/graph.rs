//! Triple storage, vocabularies, TSV ingestion and inverse-relation augmentation.
//!
//! Triple files are UTF-8, tab-separated, one `head<TAB>relation<TAB>tail` per line.
//! Lines starting with `#` and blank lines are skipped. Vocabulary files are two
//! columns, `id<TAB>name`, with ids dense from zero.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A directed labeled edge with dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub const fn new(head: usize, relation: usize, tail: usize) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// Bijective name <-> dense id table. Ids are assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocab::new();
        for name in names {
            let name = name.into();
            if vocab.ids.contains_key(&name) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate vocabulary name {name:?}"
                )));
            }
            vocab.intern(&name);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Returns the id for `name`, appending it if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    /// Two-column `id<TAB>name` text.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, name) in self.names.iter().enumerate() {
            let _ = writeln!(out, "{id}\t{name}");
        }
        out
    }

    pub fn parse_tsv(text: &str, source: &Path) -> Result<Self> {
        let mut vocab = Vocab::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: source.to_path_buf(),
                line: lineno + 1,
                message,
            };
            let (id, name) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `id<TAB>name`".into()))?;
            let id: usize = id
                .parse()
                .map_err(|_| parse_err(format!("bad id {id:?}")))?;
            if id != vocab.len() {
                return Err(parse_err(format!(
                    "ids must be dense and ordered, expected {} got {id}",
                    vocab.len()
                )));
            }
            if vocab.get(name).is_some() {
                return Err(parse_err(format!("duplicate name {name:?}")));
            }
            vocab.intern(name);
        }
        Ok(vocab)
    }
}

/// How unseen names are handled during ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VocabMode {
    Grow,
    Frozen,
}

fn parse_triples_impl<R: Read>(
    reader: R,
    source: &Path,
    entities: &mut Vocab,
    relations: &mut Vocab,
    mode: VocabMode,
) -> Result<Vec<Triple>> {
    let mut triples = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parse_err = |message: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno + 1,
            message,
        };
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let triple = match mode {
            VocabMode::Grow => Triple::new(
                entities.intern(fields[0]),
                relations.intern(fields[1]),
                entities.intern(fields[2]),
            ),
            VocabMode::Frozen => {
                let lookup = |vocab: &Vocab, name: &str, kind: &str| {
                    vocab
                        .get(name)
                        .ok_or_else(|| parse_err(format!("unknown {kind} {name:?}")))
                };
                Triple::new(
                    lookup(entities, fields[0], "entity")?,
                    lookup(relations, fields[1], "relation")?,
                    lookup(entities, fields[2], "entity")?,
                )
            }
        };
        triples.push(triple);
    }
    Ok(triples)
}

/// Parses triples from any reader, growing the vocabularies with unseen names.
pub fn parse_triples<R: Read>(
    reader: R,
    source: &Path,
    entities: &mut Vocab,
    relations: &mut Vocab,
) -> Result<Vec<Triple>> {
    parse_triples_impl(reader, source, entities, relations, VocabMode::Grow)
}

/// Reads one split file, appending new names to the vocabularies in first-seen order.
pub fn ingest_split(
    path: &Path,
    entities: &mut Vocab,
    relations: &mut Vocab,
) -> Result<Vec<Triple>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_triples(file, path, entities, relations)
}

fn ingest_split_frozen(path: &Path, entities: &Vocab, relations: &Vocab) -> Result<Vec<Triple>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ents = entities.clone();
    let mut rels = relations.clone();
    parse_triples_impl(file, path, &mut ents, &mut rels, VocabMode::Frozen)
}

/// Renders triples as name-based TSV.
pub fn triples_to_tsv(triples: &[Triple], entities: &Vocab, relations: &Vocab) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            entities.name(t.head).unwrap_or("?"),
            relations.name(t.relation).unwrap_or("?"),
            entities.name(t.tail).unwrap_or("?"),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

/// Immutable triple store with vocabularies and split membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeGraph {
    pub entities: Vocab,
    pub relations: Vocab,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    inverse_augmented: bool,
    original_relations: usize,
}

const INVERSE_SUFFIX: &str = "__inv";
const META_FILE: &str = "dataset.meta";

impl KnowledgeGraph {
    pub fn new(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let original_relations = relations.len();
        let graph = Self {
            entities,
            relations,
            train,
            valid,
            test,
            inverse_augmented: false,
            original_relations,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        let (ne, nr) = (self.entities.len(), self.relations.len());
        for split in Split::ALL {
            for t in self.split(split) {
                if t.head >= ne || t.tail >= ne || t.relation >= nr {
                    return Err(Error::InvalidParameter(format!(
                        "{} triple {t:?} out of range ({ne} entities, {nr} relations)",
                        split.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ingests `train`, `valid` and `test` from a directory. Each split may be named
    /// `<split>.txt`, `<split>.tsv` or just `<split>`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut entities = Vocab::new();
        let mut relations = Vocab::new();
        let mut splits = Vec::with_capacity(3);
        for split in Split::ALL {
            let path = find_split_file(dir, split)?;
            splits.push(ingest_split(&path, &mut entities, &mut relations)?);
        }
        let test = splits.pop().unwrap_or_default();
        let valid = splits.pop().unwrap_or_default();
        let train = splits.pop().unwrap_or_default();
        Self::new(entities, relations, train, valid, test)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    /// Relation count before inverse augmentation.
    pub fn original_relations(&self) -> usize {
        self.original_relations
    }

    pub fn is_inverse_augmented(&self) -> bool {
        self.inverse_augmented
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// Id of the inverse of `relation` (`r + R_original`, and back).
    pub fn inverse_relation(&self, relation: usize) -> Option<usize> {
        if !self.inverse_augmented {
            return None;
        }
        let r0 = self.original_relations;
        if relation < r0 {
            Some(relation + r0)
        } else if relation < 2 * r0 {
            Some(relation - r0)
        } else {
            None
        }
    }

    /// Adds `(t, r + R, h)` for every triple of every split so that head prediction
    /// becomes tail prediction.
    pub fn add_inverses(mut self) -> Result<Self> {
        if self.inverse_augmented {
            return Err(Error::AlreadyAugmented);
        }
        let r0 = self.relations.len();
        for r in 0..r0 {
            let mut name = format!(
                "{}{INVERSE_SUFFIX}",
                self.relations.name(r).unwrap_or_default()
            );
            while self.relations.get(&name).is_some() {
                name.push('_');
            }
            self.relations.intern(&name);
        }
        for split in [&mut self.train, &mut self.valid, &mut self.test] {
            let n = split.len();
            split.reserve(n);
            for i in 0..n {
                let t = split[i];
                split.push(Triple::new(t.tail, t.relation + r0, t.head));
            }
        }
        self.inverse_augmented = true;
        self.original_relations = r0;
        Ok(self)
    }

    /// All triples from every split.
    pub fn all_triples(&self) -> impl Iterator<Item = &Triple> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    /// Writes vocabularies, split TSVs and a metadata file to `dir`.
    pub fn save_prepared(&self, dir: &Path) -> Result<()> {
        let write = |name: &str, contents: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| Error::io(path, e))
        };
        write("entities.tsv", self.entities.to_tsv())?;
        write("relations.tsv", self.relations.to_tsv())?;
        for split in Split::ALL {
            write(
                &format!("{}.tsv", split.name()),
                triples_to_tsv(self.split(split), &self.entities, &self.relations),
            )?;
        }
        write(
            META_FILE,
            format!(
                "format = kgmix-prepared\nversion = 1\ninverse_augmented = {}\noriginal_relations = {}\nentities = {}\nrelations = {}\ntrain = {}\nvalid = {}\ntest = {}\n",
                self.inverse_augmented,
                self.original_relations,
                self.num_entities(),
                self.num_relations(),
                self.train.len(),
                self.valid.len(),
                self.test.len(),
            ),
        )
    }

    /// Loads a directory previously written by [`KnowledgeGraph::save_prepared`].
    pub fn load_prepared(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<(PathBuf, String)> {
            let path = dir.join(name);
            if !path.exists() {
                return Err(Error::MissingFile(path));
            }
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            Ok((path, text))
        };
        let (meta_path, meta) = read(META_FILE)?;
        let meta = crate::kv::parse_kv(&meta, &meta_path)?;
        let get = |key: &str| {
            meta.get(key).ok_or_else(|| Error::Parse {
                path: meta_path.clone(),
                line: 0,
                message: format!("missing key {key}"),
            })
        };
        let inverse_augmented = get("inverse_augmented")?.as_str() == "true";
        let original_relations: usize =
            get("original_relations")?
                .parse()
                .map_err(|_| Error::Parse {
                    path: meta_path.clone(),
                    line: 0,
                    message: "bad original_relations".into(),
                })?;
        let (p, text) = read("entities.tsv")?;
        let entities = Vocab::parse_tsv(&text, &p)?;
        let (p, text) = read("relations.tsv")?;
        let relations = Vocab::parse_tsv(&text, &p)?;
        let mut splits = Vec::with_capacity(3);
        for split in Split::ALL {
            let path = dir.join(format!("{}.tsv", split.name()));
            if !path.exists() {
                return Err(Error::MissingFile(path));
            }
            splits.push(ingest_split_frozen(&path, &entities, &relations)?);
        }
        let test = splits.pop().unwrap_or_default();
        let valid = splits.pop().unwrap_or_default();
        let train = splits.pop().unwrap_or_default();
        let mut graph = Self::new(entities, relations, train, valid, test)?;
        graph.inverse_augmented = inverse_augmented;
        graph.original_relations = original_relations;
        if inverse_augmented && graph.num_relations() != 2 * original_relations {
            return Err(Error::Parse {
                path: meta_path,
                line: 0,
                message: "relation count inconsistent with inverse augmentation".into(),
            });
        }
        Ok(graph)
    }
}

/// Locates `<split>.txt`, `<split>.tsv` or `<split>` inside `dir`.
pub fn find_split_file(dir: &Path, split: Split) -> Result<PathBuf> {
    for ext in [".txt", ".tsv", ""] {
        let path = dir.join(format!("{}{ext}", split.name()));
        if path.is_file() {
            return Ok(path);
        }
    }
    Err(Error::MissingFile(
        dir.join(format!("{}.txt", split.name())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (Vec<Triple>, Vocab, Vocab) {
        let mut e = Vocab::new();
        let mut r = Vocab::new();
        let t = parse_triples(text.as_bytes(), Path::new("mem"), &mut e, &mut r).unwrap();
        (t, e, r)
    }

    #[test]
    fn single_line() {
        let (t, e, r) = parse("a\tr\tb\n");
        assert_eq!(t, vec![Triple::new(0, 0, 1)]);
        assert_eq!(e.names(), ["a", "b"]);
        assert_eq!(r.names(), ["r"]);
    }

    #[test]
    fn comment_lines_skipped() {
        let (t, e, _) = parse("#comment\na\tr\tb");
        assert_eq!(t, vec![Triple::new(0, 0, 1)]);
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn empty_input_is_valid() {
        let (t, e, r) = parse("");
        assert!(t.is_empty() && e.is_empty() && r.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut e = Vocab::new();
        let mut r = Vocab::new();
        let err = parse_triples(
            "a\tr\tb\nx\ty\n".as_bytes(),
            Path::new("f.tsv"),
            &mut e,
            &mut r,
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inverse_of_single_triple() {
        let (t, e, r) = parse("a\tr\tb\n");
        let g = KnowledgeGraph::new(e, r, t, vec![], vec![]).unwrap();
        let g = g.add_inverses().unwrap();
        assert_eq!(g.train, vec![Triple::new(0, 0, 1), Triple::new(1, 1, 0)]);
        assert_eq!(g.num_relations(), 2);
        assert_eq!(g.inverse_relation(0), Some(1));
        assert_eq!(g.inverse_relation(1), Some(0));
        assert!(matches!(g.add_inverses(), Err(Error::AlreadyAugmented)));
    }

    #[test]
    fn valid_and_test_are_doubled() {
        let (t, e, r) = parse("a\tr\tb\nb\tr\tc\n");
        let g = KnowledgeGraph::new(e, r, t[..1].to_vec(), t[1..].to_vec(), t[1..].to_vec())
            .unwrap()
            .add_inverses()
            .unwrap();
        assert_eq!(g.valid, vec![Triple::new(1, 0, 2), Triple::new(2, 1, 1)]);
        assert_eq!(g.test.len(), 2);
    }

    #[test]
    fn vocab_tsv_round_trip() {
        let v = Vocab::from_names(["x", "y z", "w"]).unwrap();
        let back = Vocab::parse_tsv(&v.to_tsv(), Path::new("v")).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn out_of_range_triple_rejected() {
        let e = Vocab::from_names(["a"]).unwrap();
        let r = Vocab::from_names(["r"]).unwrap();
        assert!(KnowledgeGraph::new(e, r, vec![Triple::new(0, 0, 1)], vec![], vec![]).is_err());
    }
}
