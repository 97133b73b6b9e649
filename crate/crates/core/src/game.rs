//! Strategies, their realization into a temporal graph, and the cost model.
//!
//! An agent's cost is
//!
//! ```text
//! |S_u| + sum of label costs of its purchases + penalties + K * (vertices it cannot reach)
//! ```
//!
//! with every term kept as an exact rational. Label costs stay below `1/n`
//! per purchase, and `K` dominates any edge saving, so agents care first
//! about reachability and penalties, then edge count, then label cost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Label, ReachMode, Sweep, TemporalGraph, VertexId};
use crate::Rational;

/// One edge bought by an agent: the other endpoint and the chosen label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Purchase {
    #[serde(rename = "to")]
    pub target: VertexId,
    pub label: Label,
}

impl Purchase {
    pub fn new(target: VertexId, label: Label) -> Self {
        Self { target, label }
    }
}

/// The set of purchases of one agent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy(BTreeSet<Purchase>);

impl Strategy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, purchase: Purchase) -> bool {
        self.0.insert(purchase)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Purchases in ascending `(target, label)` order.
    pub fn iter(&self) -> impl Iterator<Item = &Purchase> + '_ {
        self.0.iter()
    }

    pub fn contains(&self, purchase: &Purchase) -> bool {
        self.0.contains(purchase)
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.0.iter().any(|p| p.label == label)
    }
}

impl FromIterator<Purchase> for Strategy {
    fn from_iter<I: IntoIterator<Item = Purchase>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Strategy {
    type Item = &'a Purchase;
    type IntoIter = std::collections::btree_set::Iter<'a, Purchase>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// One strategy per agent `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    n: usize,
    strategies: Vec<Strategy>,
}

impl StrategyProfile {
    /// The profile where nobody buys anything.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            strategies: vec![Strategy::new(); n],
        }
    }

    pub fn new(strategies: Vec<Strategy>) -> Result<Self> {
        let n = strategies.len();
        for (agent, s) in strategies.iter().enumerate() {
            validate_strategy(n, agent, s)?;
        }
        Ok(Self { n, strategies })
    }

    /// Convenience constructor from `(buyer, target, label)` triples.
    pub fn from_purchases<I>(n: usize, purchases: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Label)>,
    {
        let mut profile = Self::empty(n);
        for (buyer, target, label) in purchases {
            if buyer >= n {
                return Err(Error::InvalidVertex { vertex: buyer, n });
            }
            profile.strategies[buyer].insert(Purchase::new(target, label));
        }
        for (agent, s) in profile.strategies.iter().enumerate() {
            validate_strategy(n, agent, s)?;
        }
        Ok(profile)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strategy(&self, agent: VertexId) -> &Strategy {
        &self.strategies[agent]
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    /// Replaces one agent's strategy.
    pub fn set_strategy(&mut self, agent: VertexId, strategy: Strategy) -> Result<()> {
        if agent >= self.n {
            return Err(Error::InvalidVertex {
                vertex: agent,
                n: self.n,
            });
        }
        validate_strategy(self.n, agent, &strategy)?;
        self.strategies[agent] = strategy;
        Ok(())
    }

    pub fn with_strategy(&self, agent: VertexId, strategy: Strategy) -> Result<Self> {
        let mut next = self.clone();
        next.set_strategy(agent, strategy)?;
        Ok(next)
    }

    pub fn total_purchases(&self) -> usize {
        self.strategies.iter().map(Strategy::len).sum()
    }

    pub fn max_purchases(&self) -> usize {
        self.strategies.iter().map(Strategy::len).max().unwrap_or(0)
    }

    /// All `(buyer, purchase)` pairs.
    pub fn purchases(&self) -> impl Iterator<Item = (VertexId, Purchase)> + '_ {
        self.strategies
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&p| (u, p)))
    }
}

fn validate_strategy(n: usize, agent: VertexId, s: &Strategy) -> Result<()> {
    for p in s {
        if p.target >= n {
            return Err(Error::InvalidVertex {
                vertex: p.target,
                n,
            });
        }
        if p.target == agent {
            return Err(Error::SelfLoop(agent));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelCost {
    /// Every label is free.
    Zero,
    /// Charges an edge for each edge with a strictly larger label.
    Up,
    /// Charges an edge for each edge with a strictly smaller label.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    /// `K` per purchase whose label is below 1.
    #[serde(rename = "positive")]
    PositiveLabels,
    /// `K` each for reusing a label across one's own purchases, and for
    /// buying a label that the target also buys.
    #[serde(rename = "proper")]
    ProperPurchases,
}

/// A model variant: reachability mode, label-cost function, penalty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant {
    pub reach: ReachMode,
    #[serde(rename = "labelcost")]
    pub label_cost: LabelCost,
    pub penalties: BTreeSet<Penalty>,
}

impl Variant {
    pub fn new<I: IntoIterator<Item = Penalty>>(
        reach: ReachMode,
        label_cost: LabelCost,
        penalties: I,
    ) -> Self {
        Self {
            reach,
            label_cost,
            penalties: penalties.into_iter().collect(),
        }
    }

    pub fn has(&self, penalty: Penalty) -> bool {
        self.penalties.contains(&penalty)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reach = match self.reach {
            ReachMode::NonStrict => "nonstrict",
            ReachMode::Strict => "strict",
        };
        let cost = match self.label_cost {
            LabelCost::Zero => "zero",
            LabelCost::Up => "up",
            LabelCost::Down => "down",
        };
        write!(f, "{reach},{cost}")?;
        for p in &self.penalties {
            match p {
                Penalty::PositiveLabels => write!(f, ",positive")?,
                Penalty::ProperPurchases => write!(f, ",proper")?,
            }
        }
        Ok(())
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Parses `reach,labelcost[,penalty...]`, e.g. `strict,zero,positive,proper`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(',').map(str::trim).filter(|p| !p.is_empty());
        let bad = |what: &str| Error::InvalidArgument(format!("bad variant {s:?}: {what}"));
        let reach = match parts.next() {
            Some("strict") => ReachMode::Strict,
            Some("nonstrict") | Some("non-strict") => ReachMode::NonStrict,
            _ => return Err(bad("expected strict or nonstrict")),
        };
        let label_cost = match parts.next() {
            Some("zero") => LabelCost::Zero,
            Some("up") => LabelCost::Up,
            Some("down") => LabelCost::Down,
            _ => return Err(bad("expected zero, up or down")),
        };
        let mut penalties = BTreeSet::new();
        for p in parts {
            match p {
                "positive" => penalties.insert(Penalty::PositiveLabels),
                "proper" => penalties.insert(Penalty::ProperPurchases),
                "none" => false,
                other => return Err(bad(&format!("unknown penalty {other:?}"))),
            };
        }
        Ok(Self {
            reach,
            label_cost,
            penalties,
        })
    }
}

/// The large constant multiplying unreachability and penalties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KPolicy {
    pub k: Rational,
}

impl KPolicy {
    /// `K(n) = (n + 1)^2`.
    pub fn for_n(n: usize) -> Self {
        let m = n as i64 + 1;
        Self {
            k: Rational::from_integer(m * m),
        }
    }

    /// A fixed `K`; it must still satisfy `K >= n + 2` for the `n` it is
    /// used with.
    pub fn fixed(k: Rational) -> Self {
        Self { k }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < Rational::from_integer(n as i64 + 2) {
            return Err(Error::InvalidArgument(format!(
                "K = {} is too small for n = {n}; need K >= n + 2",
                self.k
            )));
        }
        Ok(())
    }
}

/// An agent's cost split by term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostBreakdown {
    pub edge_count: usize,
    pub label_cost: Rational,
    pub penalty: Rational,
    pub unreached: usize,
    pub total: Rational,
}

impl CostBreakdown {
    fn assemble(
        edge_count: usize,
        label_cost: Rational,
        penalty: Rational,
        unreached: usize,
        k: Rational,
    ) -> Self {
        let total = Rational::from_integer(edge_count as i64)
            + label_cost
            + penalty
            + k * Rational::from_integer(unreached as i64);
        Self {
            edge_count,
            label_cost,
            penalty,
            unreached,
            total,
        }
    }
}

/// The temporal graph induced by a profile: an edge exists iff one of its
/// endpoints bought it, labelled with the smallest label bought for it.
pub fn realize(profile: &StrategyProfile) -> TemporalGraph {
    let mut labels: BTreeMap<(VertexId, VertexId), Label> = BTreeMap::new();
    for (u, p) in profile.purchases() {
        let key = if u < p.target {
            (u, p.target)
        } else {
            (p.target, u)
        };
        labels
            .entry(key)
            .and_modify(|l| *l = (*l).min(p.label))
            .or_insert(p.label);
    }
    let n = profile.n().max(1);
    TemporalGraph::from_edges(n, labels.into_iter().map(|((u, v), l)| (u, v, l)))
        .expect("validated profile realizes to a valid graph")
}

/// The label cost charged for edge `{u, v}` of `g` under `label_cost`.
///
/// With `m` edges and `n` vertices, `Up` charges `|{e' : λ(e') > λ(e)}| / (m n)`
/// and `Down` charges `|{e' : λ(e') < λ(e)}| / (m n)`.
pub fn edge_label_cost(
    label_cost: LabelCost,
    g: &TemporalGraph,
    edge: (VertexId, VertexId),
) -> Result<Rational> {
    let label = g
        .label(edge.0, edge.1)
        .ok_or(Error::MissingEdge(edge.0, edge.1))?;
    let count = match label_cost {
        LabelCost::Zero => return Ok(Rational::zero()),
        LabelCost::Up => g.edges().filter(|&(_, _, l)| l > label).count(),
        LabelCost::Down => g.edges().filter(|&(_, _, l)| l < label).count(),
    };
    let denom = (g.edge_count() * g.n()) as i64;
    Ok(Rational::new(count as i64, denom))
}

/// `K` times the number of purchases labelled below 1.
pub fn penalty_positive(strategy: &Strategy, k: Rational) -> Rational {
    let count = strategy.iter().filter(|p| p.label < 1).count();
    k * Rational::from_integer(count as i64)
}

/// `K` for each of the two proper-purchase indicators that fires for `u`:
/// `u` buys the same label towards two different targets, or `u` buys a
/// label towards some `v` that `v` itself also buys.
pub fn penalty_proper(profile: &StrategyProfile, u: VertexId, k: Rational) -> Rational {
    let own = profile.strategy(u);
    let mut fired = 0;
    let repeats_label = own.iter().any(|p| {
        own.iter()
            .any(|q| q.label == p.label && q.target != p.target)
    });
    if repeats_label {
        fired += 1;
    }
    if own
        .iter()
        .any(|p| profile.strategy(p.target).has_label(p.label))
    {
        fired += 1;
    }
    k * Rational::from_integer(fired)
}

/// Cost of agent `u` in `profile` under `variant`.
pub fn agent_cost(
    variant: &Variant,
    profile: &StrategyProfile,
    u: VertexId,
    kp: &KPolicy,
) -> Result<CostBreakdown> {
    if u >= profile.n() {
        return Err(Error::InvalidVertex {
            vertex: u,
            n: profile.n(),
        });
    }
    let g = realize(profile);
    let reached = g.reachable_set(u, variant.reach)?;
    let strategy = profile.strategy(u);
    let mut label_cost = Rational::zero();
    for p in strategy {
        label_cost += edge_label_cost(variant.label_cost, &g, (u, p.target))?;
    }
    let mut penalty = Rational::zero();
    if variant.has(Penalty::PositiveLabels) {
        penalty += penalty_positive(strategy, kp.k);
    }
    if variant.has(Penalty::ProperPurchases) {
        penalty += penalty_proper(profile, u, kp.k);
    }
    Ok(CostBreakdown::assemble(
        strategy.len(),
        label_cost,
        penalty,
        profile.n() - reached.len(),
        kp.k,
    ))
}

pub fn social_cost(variant: &Variant, profile: &StrategyProfile, kp: &KPolicy) -> Rational {
    (0..profile.n())
        .map(|u| {
            agent_cost(variant, profile, u, kp)
                .expect("agent in range")
                .total
        })
        .sum()
}

/// Evaluates one agent's cost for many candidate strategies while everybody
/// else stays fixed.
#[derive(Debug, Clone)]
pub(crate) struct DeviationEvaluator {
    n: usize,
    agent: VertexId,
    reach: ReachMode,
    label_cost: LabelCost,
    positive: bool,
    proper: bool,
    k: Rational,
    /// Smallest label other agents bought per pair, indexed `a * n + b`, `a < b`.
    base: Vec<Option<Label>>,
    /// Edges of the rest-of-graph, excluding pairs that touch `agent`.
    far_edges: Vec<(VertexId, VertexId, Label)>,
    /// Labels each agent buys, sorted.
    bought_labels: Vec<Vec<Label>>,
}

impl DeviationEvaluator {
    pub fn new(
        variant: &Variant,
        profile: &StrategyProfile,
        agent: VertexId,
        kp: &KPolicy,
    ) -> Self {
        let n = profile.n();
        let mut base = vec![None; n * n];
        for (u, p) in profile.purchases() {
            if u == agent {
                continue;
            }
            let (a, b) = if u < p.target {
                (u, p.target)
            } else {
                (p.target, u)
            };
            let slot = &mut base[a * n + b];
            *slot = Some(slot.map_or(p.label, |l: Label| l.min(p.label)));
        }
        let mut far_edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if a == agent || b == agent {
                    continue;
                }
                if let Some(l) = base[a * n + b] {
                    far_edges.push((a, b, l));
                }
            }
        }
        let bought_labels = profile
            .strategies()
            .iter()
            .map(|s| {
                let mut labels: Vec<Label> = s.iter().map(|p| p.label).collect();
                labels.sort_unstable();
                labels.dedup();
                labels
            })
            .collect();
        Self {
            n,
            agent,
            reach: variant.reach,
            label_cost: variant.label_cost,
            positive: variant.has(Penalty::PositiveLabels),
            proper: variant.has(Penalty::ProperPurchases),
            k: kp.k,
            base,
            far_edges,
            bought_labels,
        }
    }

    /// Labels of edges bought by agents other than the deviator.
    pub fn rest_labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.base.iter().filter_map(|l| *l)
    }

    fn pair(&self, other: VertexId) -> usize {
        let (a, b) = if self.agent < other {
            (self.agent, other)
        } else {
            (other, self.agent)
        };
        a * self.n + b
    }

    /// Cost of the deviator playing `purchases` (targets must be valid).
    pub fn evaluate(&self, purchases: &[Purchase]) -> CostBreakdown {
        let n = self.n;
        let u = self.agent;
        // Realized labels of the pairs touching u.
        let mut near: Vec<Option<Label>> = (0..n)
            .map(|v| {
                if v == u {
                    None
                } else {
                    self.base[self.pair(v)]
                }
            })
            .collect();
        for p in purchases {
            let slot = &mut near[p.target];
            *slot = Some(slot.map_or(p.label, |l| l.min(p.label)));
        }
        let mut edges = self.far_edges.clone();
        for (v, l) in near.iter().enumerate() {
            if let Some(l) = *l {
                edges.push((u.min(v), u.max(v), l));
            }
        }
        edges.sort_unstable_by_key(|&(a, b, l)| (l, a, b));

        let reached = Sweep::run(n, &edges, u, None, self.reach, None).count();

        let label_cost = match self.label_cost {
            LabelCost::Zero => Rational::zero(),
            _ if purchases.is_empty() => Rational::zero(),
            kind => {
                let m = edges.len();
                let mut count = 0usize;
                for p in purchases {
                    let l = near[p.target].expect("purchased pair exists");
                    count += match kind {
                        LabelCost::Up => m - edges.partition_point(|e| e.2 <= l),
                        _ => edges.partition_point(|e| e.2 < l),
                    };
                }
                Rational::new(count as i64, (m * n) as i64)
            }
        };

        let mut penalty = Rational::zero();
        if self.positive {
            let low = purchases.iter().filter(|p| p.label < 1).count();
            penalty += self.k * Rational::from_integer(low as i64);
        }
        if self.proper {
            let mut fired = 0;
            if purchases.iter().any(|p| {
                purchases
                    .iter()
                    .any(|q| q.label == p.label && q.target != p.target)
            }) {
                fired += 1;
            }
            if purchases
                .iter()
                .any(|p| self.bought_labels[p.target].binary_search(&p.label).is_ok())
            {
                fired += 1;
            }
            penalty += self.k * Rational::from_integer(fired);
        }

        CostBreakdown::assemble(purchases.len(), label_cost, penalty, n - reached, self.k)
    }
}
