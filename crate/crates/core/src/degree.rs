//! Degree statistics over the training split and same-tail candidate lookup.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use crate::graph::{KnowledgeGraph, Triple, Vocab};

/// Which same-tail triples may be mixed with a given triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidatePolicy {
    /// Different head and different relation.
    Strict,
    /// Any other triple sharing the tail.
    Lenient,
    /// Strict, falling back to lenient when strict is empty.
    #[default]
    StrictThenLenient,
}

impl std::str::FromStr for CandidatePolicy {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "strict" => Ok(Self::Strict),
            "lenient" => Ok(Self::Lenient),
            "strict_then_lenient" | "fallback" => Ok(Self::StrictThenLenient),
            other => Err(crate::Error::Config(format!(
                "unknown candidate policy {other:?}"
            ))),
        }
    }
}

impl CandidatePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Strict => "strict",
            Self::Lenient => "lenient",
            Self::StrictThenLenient => "strict_then_lenient",
        }
    }
}

/// Precomputed degree statistics. Immutable after construction.
///
/// Duplicate triples are counted with multiplicity.
#[derive(Debug, Clone)]
pub struct DegreeIndex {
    train: Vec<Triple>,
    in_degree: Vec<usize>,
    out_degree: Vec<usize>,
    tail_relation: HashMap<(usize, usize), usize>,
    relation_specific: HashMap<(usize, usize), usize>,
    by_tail: Vec<Vec<usize>>,
}

impl DegreeIndex {
    pub fn build(train: &[Triple], num_entities: usize) -> Self {
        let mut in_degree = vec![0; num_entities];
        let mut out_degree = vec![0; num_entities];
        let mut tail_relation = HashMap::new();
        let mut relation_specific = HashMap::new();
        let mut by_tail = vec![Vec::new(); num_entities];
        for (i, t) in train.iter().enumerate() {
            out_degree[t.head] += 1;
            in_degree[t.tail] += 1;
            *tail_relation.entry((t.tail, t.relation)).or_insert(0) += 1;
            *relation_specific.entry((t.head, t.relation)).or_insert(0) += 1;
            if t.tail != t.head {
                *relation_specific.entry((t.tail, t.relation)).or_insert(0) += 1;
            }
            by_tail[t.tail].push(i);
        }
        Self {
            train: train.to_vec(),
            in_degree,
            out_degree,
            tail_relation,
            relation_specific,
            by_tail,
        }
    }

    pub fn from_graph(graph: &KnowledgeGraph) -> Self {
        Self::build(&graph.train, graph.num_entities())
    }

    pub fn num_entities(&self) -> usize {
        self.in_degree.len()
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_degree.get(v).copied().unwrap_or(0)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_degree.get(v).copied().unwrap_or(0)
    }

    pub fn total_degree(&self, v: usize) -> usize {
        self.in_degree(v) + self.out_degree(v)
    }

    /// Number of training triples `(·, r, v)`.
    pub fn tail_relation_degree(&self, v: usize, r: usize) -> usize {
        self.tail_relation.get(&(v, r)).copied().unwrap_or(0)
    }

    /// Number of training triples with relation `r` that have `v` as head or tail.
    pub fn relation_specific_degree(&self, v: usize, r: usize) -> usize {
        self.relation_specific.get(&(v, r)).copied().unwrap_or(0)
    }

    /// In-degree of `v` through relations other than `r`.
    pub fn other_tail_relation_degree(&self, v: usize, r: usize) -> usize {
        self.in_degree(v) - self.tail_relation_degree(v, r)
    }

    /// Training triples whose tail is `v`.
    pub fn triples_with_tail(&self, v: usize) -> impl Iterator<Item = &Triple> + '_ {
        self.by_tail
            .get(v)
            .into_iter()
            .flatten()
            .map(move |&i| &self.train[i])
    }

    /// Every `((tail, relation), degree)` with a nonzero degree, sorted by key.
    pub fn tail_relation_pairs(&self) -> Vec<((usize, usize), usize)> {
        let mut pairs: Vec<_> = self.tail_relation.iter().map(|(&k, &c)| (k, c)).collect();
        pairs.sort_unstable();
        pairs
    }

    /// Same-tail mixing partners for `e`. Strict mode keeps triples whose head and
    /// relation both differ from `e`; lenient keeps every other triple with the same tail.
    pub fn same_tail_candidates(&self, e: &Triple, strict: bool) -> Vec<Triple> {
        self.triples_with_tail(e.tail)
            .filter(|c| *c != e)
            .filter(|c| !strict || (c.head != e.head && c.relation != e.relation))
            .copied()
            .collect()
    }

    pub fn candidates(&self, e: &Triple, policy: CandidatePolicy) -> Vec<Triple> {
        match policy {
            CandidatePolicy::Strict => self.same_tail_candidates(e, true),
            CandidatePolicy::Lenient => self.same_tail_candidates(e, false),
            CandidatePolicy::StrictThenLenient => {
                let strict = self.same_tail_candidates(e, true);
                if strict.is_empty() {
                    self.same_tail_candidates(e, false)
                } else {
                    strict
                }
            }
        }
    }

    /// Training triples with tail-relation degree below `threshold`.
    pub fn below_threshold(&self, threshold: usize) -> Vec<Triple> {
        self.train
            .iter()
            .filter(|t| self.tail_relation_degree(t.tail, t.relation) < threshold)
            .copied()
            .collect()
    }

    /// `entity,in_degree,out_degree,total_degree`, one row per entity.
    pub fn entity_csv(&self, entities: &Vocab) -> String {
        let mut out = String::from("entity,in_degree,out_degree,total_degree\n");
        for v in 0..self.num_entities() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                entities.name(v).unwrap_or("?"),
                self.in_degree(v),
                self.out_degree(v),
                self.total_degree(v)
            );
        }
        out
    }

    /// `tail,relation,tail_relation_degree` for every pair seen in training.
    pub fn pair_csv(&self, entities: &Vocab, relations: &Vocab) -> String {
        let mut out = String::from("tail,relation,tail_relation_degree\n");
        for ((v, r), d) in self.tail_relation_pairs() {
            let _ = writeln!(
                out,
                "{},{},{d}",
                entities.name(v).unwrap_or("?"),
                relations.name(r).unwrap_or("?")
            );
        }
        out
    }

    /// Histogram of tail-relation degrees: `tail_relation_degree,pairs,triples`.
    pub fn histogram_csv(&self) -> String {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in self.tail_relation.values() {
            *hist.entry(d).or_default() += 1;
        }
        let mut out = String::from("tail_relation_degree,pairs,triples\n");
        for (d, n) in hist {
            let _ = writeln!(out, "{d},{n},{}", d * n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Europe=0 Germany=1 Sweden=2 Belgium=3; HasCountry=0 Borders=1
    fn figure_one() -> DegreeIndex {
        let train = [
            Triple::new(0, 0, 1),
            Triple::new(0, 0, 2),
            Triple::new(3, 1, 1),
        ];
        DegreeIndex::build(&train, 4)
    }

    #[test]
    fn tail_relation_degree_on_example_graph() {
        let idx = figure_one();
        assert_eq!(idx.tail_relation_degree(2, 0), 1);
        assert_eq!(idx.tail_relation_degree(1, 1), 1);
        assert_eq!(idx.tail_relation_degree(1, 0), 1);
        assert_eq!(idx.in_degree(1), 2);
        assert_eq!(idx.tail_relation_degree(3, 0), 0);
        assert_eq!(idx.other_tail_relation_degree(1, 0), 1);
    }

    #[test]
    fn summary_csvs_on_example_graph() {
        let idx = figure_one();
        let ents = Vocab::from_names(["Europe", "Germany", "Sweden", "Belgium"]).unwrap();
        let rels = Vocab::from_names(["HasCountry", "Borders"]).unwrap();
        assert_eq!(
            idx.pair_csv(&ents, &rels),
            "tail,relation,tail_relation_degree\nGermany,HasCountry,1\nGermany,Borders,1\nSweden,HasCountry,1\n"
        );
        assert_eq!(
            idx.histogram_csv(),
            "tail_relation_degree,pairs,triples\n1,3,3\n"
        );
        assert!(idx.entity_csv(&ents).contains("\nGermany,2,0,2\n"));
    }

    #[test]
    fn relation_specific_degree_on_example_graph() {
        let idx = figure_one();
        assert_eq!(idx.relation_specific_degree(1, 1), 1);
        assert_eq!(idx.relation_specific_degree(0, 0), 2);
        assert_eq!(idx.relation_specific_degree(3, 0), 0);
    }

    #[test]
    fn strict_candidates_on_example_graph() {
        let idx = figure_one();
        let e = Triple::new(0, 0, 1);
        assert_eq!(
            idx.same_tail_candidates(&e, true),
            vec![Triple::new(3, 1, 1)]
        );
        let lone = Triple::new(0, 0, 2);
        assert!(idx.same_tail_candidates(&lone, true).is_empty());
        assert!(idx.same_tail_candidates(&lone, false).is_empty());
    }

    #[test]
    fn fallback_to_lenient() {
        // two triples into tail 2 sharing the head: strict empty, lenient not
        let train = [Triple::new(0, 0, 2), Triple::new(0, 1, 2)];
        let idx = DegreeIndex::build(&train, 3);
        let e = train[0];
        assert!(idx.candidates(&e, CandidatePolicy::Strict).is_empty());
        assert_eq!(
            idx.candidates(&e, CandidatePolicy::StrictThenLenient),
            vec![train[1]]
        );
    }

    #[test]
    fn inverse_augmentation_moves_out_degree_into_in_degree() {
        let e = Vocab::from_names(["a", "b", "c"]).unwrap();
        let r = Vocab::from_names(["p", "q"]).unwrap();
        let train = vec![
            Triple::new(0, 0, 1),
            Triple::new(1, 1, 2),
            Triple::new(0, 1, 2),
            Triple::new(2, 0, 0),
        ];
        let g = KnowledgeGraph::new(e, r, train, vec![], vec![]).unwrap();
        let before = DegreeIndex::from_graph(&g);
        let g = g.add_inverses().unwrap();
        let after = DegreeIndex::from_graph(&g);
        for v in 0..3 {
            assert_eq!(
                after.in_degree(v),
                before.in_degree(v) + before.out_degree(v)
            );
        }
    }
}
