//! Temporal graphs: undirected graphs carrying one integer time label per
//! edge, and reachability along label-monotone paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type Label = i64;

/// Whether consecutive labels on a path may repeat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachMode {
    /// Labels are non-decreasing along the path.
    NonStrict,
    /// Labels are strictly increasing along the path.
    Strict,
}

impl ReachMode {
    /// True if a path that arrived at a vertex via a `last`-labelled edge may
    /// continue over an edge labelled `next`. `None` means nothing has been
    /// traversed yet.
    #[inline]
    pub fn can_continue(self, last: Option<Label>, next: Label) -> bool {
        match (self, last) {
            (_, None) => true,
            (ReachMode::NonStrict, Some(l)) => l <= next,
            (ReachMode::Strict, Some(l)) => l < next,
        }
    }
}

/// An undirected temporal graph on vertices `0..n`.
///
/// Edges are keyed by the normalized pair `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TemporalGraph {
    n: usize,
    edges: BTreeMap<(VertexId, VertexId), Label>,
}

fn normalize(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl TemporalGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "a temporal graph needs at least one vertex".into(),
            ));
        }
        Ok(Self {
            n,
            edges: BTreeMap::new(),
        })
    }

    /// Builds a graph from `(u, v, label)` triples. A pair may appear once.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Label)>,
    {
        let mut g = Self::new(n)?;
        for (u, v, label) in edges {
            g.insert_edge(u, v, label)?;
        }
        Ok(g)
    }

    /// Inserts a new edge. Fails on self-loops, out-of-range endpoints or an
    /// already present pair.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId, label: Label) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let key = normalize(u, v);
        if self.edges.contains_key(&key) {
            return Err(Error::InvalidArgument(format!(
                "edge {{{}, {}}} already has a label",
                key.0, key.1
            )));
        }
        self.edges.insert(key, label);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, u: VertexId, v: VertexId) -> Option<Label> {
        self.edges.get(&normalize(u, v)).copied()
    }

    /// Edges as `(u, v, label)` with `u < v`, ordered by endpoints.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Label)> + '_ {
        self.edges.iter().map(|(&(u, v), &l)| (u, v, l))
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                n: self.n,
            })
        }
    }

    fn sorted_edges(&self) -> Vec<(VertexId, VertexId, Label)> {
        let mut edges: Vec<_> = self.edges().collect();
        edges.sort_by_key(|&(u, v, l)| (l, u, v));
        edges
    }

    /// All vertices reachable from `v` by temporal paths under `mode`.
    /// Always contains `v` itself.
    pub fn reachable_set(&self, v: VertexId, mode: ReachMode) -> Result<BTreeSet<VertexId>> {
        self.check_vertex(v)?;
        let sweep = Sweep::run(self.n, &self.sorted_edges(), v, None, mode, None);
        Ok(sweep.reached_set())
    }

    /// Vertices reachable from `v` by temporal paths whose first edge has
    /// label at least `t`.
    pub fn reachable_from_time(
        &self,
        v: VertexId,
        t: Label,
        mode: ReachMode,
    ) -> Result<BTreeSet<VertexId>> {
        self.check_vertex(v)?;
        // Pretend we arrived at `v` just before `t`.
        let start = match mode {
            ReachMode::NonStrict => Some(t),
            ReachMode::Strict => t.checked_sub(1),
        };
        let sweep = Sweep::run(self.n, &self.sorted_edges(), v, start, mode, None);
        Ok(sweep.reached_set())
    }

    pub fn is_temporally_connected(&self, mode: ReachMode) -> bool {
        let edges = self.sorted_edges();
        (0..self.n).all(|v| Sweep::run(self.n, &edges, v, None, mode, None).count() == self.n)
    }

    /// A tree subgraph of `self` whose reachable set from `v` equals that of
    /// `self`. Every reached vertex hangs off the edge that first delivered
    /// it; ties go to the lower-indexed parent.
    pub fn reachability_tree(&self, v: VertexId, mode: ReachMode) -> Result<TemporalGraph> {
        self.check_vertex(v)?;
        let sweep = Sweep::run(self.n, &self.sorted_edges(), v, None, mode, None);
        let mut tree = TemporalGraph::new(self.n)?;
        for (child, parent) in sweep.parent.iter().enumerate() {
            if let Some(p) = *parent {
                let label = self.label(p, child).expect("parent edge exists");
                tree.insert_edge(p, child, label)?;
            }
        }
        Ok(tree)
    }

    /// The maximum label.
    pub fn lifetime(&self) -> Result<Label> {
        self.edges.values().copied().max().ok_or(Error::EmptyGraph)
    }

    pub fn min_label(&self) -> Option<Label> {
        self.edges.values().copied().min()
    }

    /// True iff no two edges sharing an endpoint carry the same label.
    pub fn is_proper(&self) -> bool {
        let mut seen: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); self.n];
        for (u, v, l) in self.edges() {
            if !seen[u].insert(l) || !seen[v].insert(l) {
                return false;
            }
        }
        true
    }

    /// Number of distinct vertices `v` reaches by simple strict paths that
    /// start with `edge`, the far endpoint of `edge` included.
    pub fn reach_count_via_first_edge(
        &self,
        v: VertexId,
        edge: (VertexId, VertexId),
    ) -> Result<usize> {
        self.check_vertex(v)?;
        let (a, b) = edge;
        let label = self.label(a, b).ok_or(Error::MissingEdge(a, b))?;
        let far = if a == v {
            b
        } else if b == v {
            a
        } else {
            return Err(Error::NotIncident {
                vertex: v,
                edge_u: a,
                edge_v: b,
            });
        };
        // Any strict walk from `far` that avoids `v` shortens to a simple path
        // avoiding `v`, so prefixing `edge` keeps it simple.
        let sweep = Sweep::run(
            self.n,
            &self.sorted_edges(),
            far,
            Some(label),
            ReachMode::Strict,
            Some(v),
        );
        Ok(sweep.count())
    }

    /// True if `path` is a sequence of existing, consecutively adjacent edges
    /// whose labels respect `mode`.
    pub fn is_temporal_path(&self, path: &[(VertexId, VertexId)], mode: ReachMode) -> bool {
        let mut last = None;
        for (i, &(u, v)) in path.iter().enumerate() {
            let Some(label) = self.label(u, v) else {
                return false;
            };
            if !mode.can_continue(last, label) {
                return false;
            }
            if i > 0 {
                let (pu, pv) = path[i - 1];
                if u != pu && u != pv && v != pu && v != pv {
                    return false;
                }
            }
            last = Some(label);
        }
        true
    }

    /// Graphviz rendering with each edge labelled by its time label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v, l) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v} [label=\"{l}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// Foremost-arrival sweep over edges in ascending label order.
///
/// `arrival[x]` is the smallest label with which `x` was reached; the source
/// holds `start` (`None` for "before everything"). A reached vertex is never
/// updated again, since arriving earlier leaves every later departure open.
#[derive(Debug)]
pub(crate) struct Sweep {
    pub reached: Vec<bool>,
    pub parent: Vec<Option<VertexId>>,
}

impl Sweep {
    /// `edges` must be sorted by label. Edges touching `excluded` are ignored.
    pub fn run(
        n: usize,
        edges: &[(VertexId, VertexId, Label)],
        source: VertexId,
        start: Option<Label>,
        mode: ReachMode,
        excluded: Option<VertexId>,
    ) -> Self {
        let mut reached = vec![false; n];
        let mut arrival: Vec<Option<Label>> = vec![None; n];
        let mut parent = vec![None; n];
        reached[source] = true;
        arrival[source] = start;

        let mut updates: Vec<(VertexId, VertexId)> = Vec::new();
        let mut i = 0;
        while i < edges.len() {
            let label = edges[i].2;
            let mut j = i;
            while j < edges.len() && edges[j].2 == label {
                j += 1;
            }
            let group = &edges[i..j];
            loop {
                updates.clear();
                for &(a, b, _) in group {
                    if excluded == Some(a) || excluded == Some(b) {
                        continue;
                    }
                    for (from, to) in [(a, b), (b, a)] {
                        if reached[from] && !reached[to] && mode.can_continue(arrival[from], label)
                        {
                            updates.push((to, from));
                        }
                    }
                }
                if updates.is_empty() {
                    break;
                }
                updates.sort_unstable();
                let mut last_child = None;
                for &(child, from) in &updates {
                    if last_child == Some(child) {
                        continue;
                    }
                    last_child = Some(child);
                    reached[child] = true;
                    arrival[child] = Some(label);
                    parent[child] = Some(from);
                }
                // Vertices reached in this group cannot be left again within
                // it under strict reachability.
                if mode == ReachMode::Strict {
                    break;
                }
            }
            i = j;
        }
        Self { reached, parent }
    }

    pub fn count(&self) -> usize {
        self.reached.iter().filter(|&&r| r).count()
    }

    pub fn reached_set(&self) -> BTreeSet<VertexId> {
        self.reached
            .iter()
            .enumerate()
            .filter_map(|(v, &r)| r.then_some(v))
            .collect()
    }
}
