//! Bounded exhaustive best responses, Nash-equilibrium verification,
//! best-response dynamics, social optima and equilibrium scans.
//!
//! Deviations are searched over strategies with at most one purchase per
//! target, at most `max_edges` purchases, and labels drawn from a window
//! around the labels the other agents use. Reachability, penalties and the
//! rank-based label costs only see the relative order of labels, so any
//! deviation can be remapped into that window as long as the window leaves
//! `max_edges` free slots on either side.

use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    social_cost, CostBreakdown, DeviationEvaluator, KPolicy, LabelCost, Penalty, Purchase,
    Strategy, StrategyProfile, Variant,
};
use crate::graph::{Label, ReachMode, TemporalGraph, VertexId};
use crate::Rational;

/// Environment variable overriding [`DEFAULT_HARD_LIMIT`].
pub const HARD_LIMIT_ENV: &str = "TEMPO_NCG_HARD_LIMIT";
pub const DEFAULT_HARD_LIMIT: u128 = 50_000_000;

/// Largest `n` accepted by [`social_optimum`] with [`OptimumMethod::BruteForce`].
pub const BRUTE_FORCE_MAX_N: usize = 5;
/// Largest `n` accepted by [`exhaustive_ne_scan`].
pub const SCAN_MAX_N: usize = 4;

/// The hard limit in effect: [`HARD_LIMIT_ENV`] if set and parseable,
/// otherwise [`DEFAULT_HARD_LIMIT`].
pub fn hard_limit_from_env() -> u128 {
    std::env::var(HARD_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_HARD_LIMIT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// Maximum number of purchases in a deviation.
    pub max_edges: usize,
    /// How far the label window extends beyond the other agents' labels.
    pub label_window_pad: usize,
    /// Abort threshold on the number of candidate strategies.
    pub hard_node_limit: u128,
}

impl SearchBounds {
    pub fn new(max_edges: usize, label_window_pad: usize, hard_node_limit: u128) -> Result<Self> {
        let b = Self {
            max_edges,
            label_window_pad,
            hard_node_limit,
        };
        b.validate()?;
        Ok(b)
    }

    /// `max_edges = max(largest strategy, 1)`, pad equal to it.
    pub fn for_profile(profile: &StrategyProfile) -> Self {
        let max_edges = profile.max_purchases().max(1);
        Self {
            max_edges,
            label_window_pad: max_edges,
            hard_node_limit: hard_limit_from_env(),
        }
    }

    /// Like [`SearchBounds::for_profile`], except that an agent that misses
    /// a vertex or pays a penalty gets room for `n - 1` purchases: repairing
    /// its cost may take more edges than it currently buys.
    pub fn default_for(variant: &Variant, profile: &StrategyProfile, kp: &KPolicy) -> Self {
        let n = profile.n();
        let max_edges = (0..n)
            .map(|u| {
                let own: Vec<Purchase> = profile.strategy(u).iter().copied().collect();
                let cost = DeviationEvaluator::new(variant, profile, u, kp).evaluate(&own);
                if cost.unreached > 0 || !cost.penalty.is_zero() {
                    own.len().max(n - 1)
                } else {
                    own.len()
                }
            })
            .max()
            .unwrap_or(0)
            .max(1);
        Self {
            max_edges,
            label_window_pad: max_edges,
            hard_node_limit: hard_limit_from_env(),
        }
    }

    pub fn with_max_edges(self, max_edges: usize) -> Self {
        Self {
            max_edges,
            label_window_pad: self.label_window_pad.max(max_edges),
            ..self
        }
    }

    pub fn with_pad(self, label_window_pad: usize) -> Self {
        Self {
            label_window_pad,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_edges < 1 {
            return Err(Error::InvalidArgument(
                "max_edges must be at least 1".into(),
            ));
        }
        if self.label_window_pad < self.max_edges {
            return Err(Error::InvalidArgument(format!(
                "label window pad {} is smaller than max_edges {}",
                self.label_window_pad, self.max_edges
            )));
        }
        Ok(())
    }
}

/// Labels a deviating agent may use: `[L_min - pad, L_max + pad]` where the
/// extremes range over labels bought by the other agents (`[1, 1]` if they
/// buy nothing), clipped to `[1, ∞)` under the positivity penalty.
pub fn candidate_labels(
    profile: &StrategyProfile,
    u: VertexId,
    bounds: &SearchBounds,
    variant: &Variant,
) -> Vec<Label> {
    let rest = profile
        .purchases()
        .filter(|&(buyer, _)| buyer != u)
        .map(|(_, p)| p.label);
    label_window(
        rest,
        bounds.label_window_pad,
        variant.has(Penalty::PositiveLabels),
    )
}

fn label_window(rest: impl Iterator<Item = Label>, pad: usize, positive: bool) -> Vec<Label> {
    let (mut lo, mut hi) = (None::<Label>, None::<Label>);
    for l in rest {
        lo = Some(lo.map_or(l, |x| x.min(l)));
        hi = Some(hi.map_or(l, |x| x.max(l)));
    }
    let pad = pad as Label;
    let mut lo = lo.unwrap_or(1) - pad;
    let hi = hi.unwrap_or(1) + pad;
    if positive {
        lo = lo.max(1);
    }
    (lo..=hi).collect()
}

/// A best response together with its cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub strategy: Strategy,
    pub cost: CostBreakdown,
    /// True if the incumbent strategy was kept.
    pub is_incumbent: bool,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of strategies with at most `max_edges` purchases, one per target.
fn candidate_count(targets: usize, labels: usize, max_edges: usize) -> u128 {
    (0..=max_edges.min(targets)).fold(0u128, |acc, m| {
        let per = (labels as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        acc.saturating_add(binomial(targets, m).saturating_mul(per))
    })
}

/// All `m`-subsets of `items`, in lexicographic order.
fn combinations(items: &[VertexId], m: usize) -> Vec<Vec<VertexId>> {
    fn rec(
        items: &[VertexId],
        m: usize,
        start: usize,
        cur: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < m - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, m, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, m, 0, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Minimum cost over one fixed target set, labels varying in odometer order
/// (which is lexicographic in the purchase list). Ties keep the earlier one.
fn best_for_targets(
    eval: &DeviationEvaluator,
    targets: &[VertexId],
    labels: &[Label],
) -> Option<(CostBreakdown, Vec<Purchase>)> {
    let m = targets.len();
    let mut idx = vec![0usize; m];
    let mut purchases: Vec<Purchase> = targets
        .iter()
        .map(|&t| Purchase::new(t, labels[0]))
        .collect();
    let mut best: Option<(CostBreakdown, Vec<Purchase>)> = None;
    loop {
        for (p, &i) in purchases.iter_mut().zip(&idx) {
            p.label = labels[i];
        }
        let cost = eval.evaluate(&purchases);
        if best.as_ref().is_none_or(|(b, _)| cost.total < b.total) {
            best = Some((cost, purchases.clone()));
        }
        // Advance the odometer, last position fastest.
        let mut pos = m;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < labels.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Cost-minimizing strategy for `u` within `bounds`.
///
/// Ties go to the incumbent strategy, then to fewer purchases, then to the
/// lexicographically smallest purchase list.
pub fn best_response(
    variant: &Variant,
    profile: &StrategyProfile,
    u: VertexId,
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> Result<BestResponse> {
    let n = profile.n();
    if u >= n {
        return Err(Error::InvalidVertex { vertex: u, n });
    }
    bounds.validate()?;
    let eval = DeviationEvaluator::new(variant, profile, u, kp);
    let labels = label_window(
        eval.rest_labels(),
        bounds.label_window_pad,
        variant.has(Penalty::PositiveLabels),
    );
    let targets: Vec<VertexId> = (0..n).filter(|&v| v != u).collect();
    let required = candidate_count(targets.len(), labels.len(), bounds.max_edges);
    if required > bounds.hard_node_limit {
        return Err(Error::BudgetExceeded {
            required,
            limit: bounds.hard_node_limit,
        });
    }

    let incumbent = profile.strategy(u).clone();
    let incumbent_list: Vec<Purchase> = incumbent.iter().copied().collect();
    let mut best_cost = eval.evaluate(&incumbent_list);
    let mut best: Option<Vec<Purchase>> = None;

    for m in 0..=bounds.max_edges.min(targets.len()) {
        // Any m-purchase strategy costs at least m.
        if Rational::from_integer(m as i64) > best_cost.total {
            break;
        }
        let combos = combinations(&targets, m);
        let winner = combos
            .par_iter()
            .enumerate()
            .filter_map(|(i, ts)| best_for_targets(&eval, ts, &labels).map(|b| (i, b)))
            .reduce_with(|a, b| {
                // Lower cost wins; equal cost keeps the earlier combination.
                if b.1 .0.total < a.1 .0.total || (b.1 .0.total == a.1 .0.total && b.0 < a.0) {
                    b
                } else {
                    a
                }
            });
        if let Some((_, (cost, purchases))) = winner {
            if cost.total < best_cost.total {
                best_cost = cost;
                best = Some(purchases);
            }
        }
    }

    Ok(match best {
        Some(list) => BestResponse {
            strategy: list.into_iter().collect(),
            cost: best_cost,
            is_incumbent: false,
        },
        None => BestResponse {
            strategy: incumbent,
            cost: best_cost,
            is_incumbent: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NashCertified,
    DeviationFound,
    BudgetExceeded,
}

/// A strictly improving deviation of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub agent: VertexId,
    pub strategy: Strategy,
    #[serde(with = "crate::io::rational_str")]
    pub old_cost: Rational,
    #[serde(with = "crate::io::rational_str")]
    pub new_cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(rename = "bounds")]
    pub bounds_used: SearchBounds,
}

impl EquilibriumReport {
    pub fn is_nash(&self) -> bool {
        self.verdict == Verdict::NashCertified
    }
}

/// Checks every agent, in index order, for a strictly improving deviation
/// within `bounds`. The witness is the best response of the first agent
/// that has one.
pub fn is_nash(
    variant: &Variant,
    profile: &StrategyProfile,
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> Result<EquilibriumReport> {
    bounds.validate()?;
    if bounds.max_edges < profile.max_purchases() {
        return Err(Error::InvalidArgument(format!(
            "max_edges {} is below the largest strategy size {}",
            bounds.max_edges,
            profile.max_purchases()
        )));
    }
    for u in 0..profile.n() {
        let br = match best_response(variant, profile, u, bounds, kp) {
            Ok(br) => br,
            Err(Error::BudgetExceeded { .. }) => {
                return Ok(EquilibriumReport {
                    verdict: Verdict::BudgetExceeded,
                    witness: None,
                    bounds_used: *bounds,
                })
            }
            Err(e) => return Err(e),
        };
        if !br.is_incumbent {
            let old = DeviationEvaluator::new(variant, profile, u, kp)
                .evaluate(&profile.strategy(u).iter().copied().collect::<Vec<_>>());
            debug_assert!(br.cost.total < old.total);
            return Ok(EquilibriumReport {
                verdict: Verdict::DeviationFound,
                witness: Some(Witness {
                    agent: u,
                    strategy: br.strategy,
                    old_cost: old.total,
                    new_cost: br.cost.total,
                }),
                bounds_used: *bounds,
            });
        }
    }
    Ok(EquilibriumReport {
        verdict: Verdict::NashCertified,
        witness: None,
        bounds_used: *bounds,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsOutcome {
    /// A full round changed nothing; `rounds` includes that last round.
    Converged {
        profile: StrategyProfile,
        rounds: usize,
    },
    /// The profile at a round boundary repeated after `period` rounds.
    Cycle { period: usize },
    /// `max_rounds` ran out or a best-response search hit the hard limit.
    Budget { rounds: usize },
}

/// Round-robin best-response dynamics: agents `0..n` in turn switch to
/// their best response whenever it strictly improves on the incumbent.
pub fn best_response_dynamics(
    variant: &Variant,
    initial: &StrategyProfile,
    max_rounds: usize,
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> Result<DynamicsOutcome> {
    let mut profile = initial.clone();
    let mut seen: HashMap<StrategyProfile, usize> = HashMap::new();
    for round in 0..max_rounds {
        if let Some(&earlier) = seen.get(&profile) {
            return Ok(DynamicsOutcome::Cycle {
                period: round - earlier,
            });
        }
        seen.insert(profile.clone(), round);
        let mut changed = false;
        for u in 0..profile.n() {
            let br = match best_response(variant, &profile, u, bounds, kp) {
                Ok(br) => br,
                Err(Error::BudgetExceeded { .. }) => {
                    return Ok(DynamicsOutcome::Budget { rounds: round })
                }
                Err(e) => return Err(e),
            };
            if !br.is_incumbent {
                profile.set_strategy(u, br.strategy)?;
                changed = true;
            }
        }
        if !changed {
            return Ok(DynamicsOutcome::Converged {
                profile,
                rounds: round + 1,
            });
        }
    }
    Ok(DynamicsOutcome::Budget { rounds: max_rounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimumMethod {
    BruteForce,
    FormulaOracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimumResult {
    pub value: Rational,
    pub witness: Option<StrategyProfile>,
    pub method: OptimumMethod,
}

/// Minimum social cost over all profiles on `n` agents.
///
/// `FormulaOracle` knows the minimum temporal spanner sizes: `n - 1` for
/// non-strict paths and `2n - 4` for strict paths with `n >= 4` (3 at
/// `n = 3`). It only applies where an optimal spanner can carry zero label
/// cost and zero penalty, i.e. non-strict variants and strict variants
/// without label cost.
///
/// `BruteForce` (`n <= 5`) enumerates edge sets by size, every labelling up
/// to order (labels `1..=k` with all of them used) and, under the proper
/// penalty, every choice of buyer. Profiles that buy an edge twice are
/// dominated by dropping the higher copy, and disconnected profiles cost at
/// least `K`, so this covers the optimum.
pub fn social_optimum(
    variant: &Variant,
    n: usize,
    method: OptimumMethod,
    kp: &KPolicy,
) -> Result<OptimumResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    match method {
        OptimumMethod::FormulaOracle => formula_optimum(variant, n),
        OptimumMethod::BruteForce => brute_force_optimum(variant, n, kp),
    }
}

fn formula_optimum(variant: &Variant, n: usize) -> Result<OptimumResult> {
    let value = match variant.reach {
        ReachMode::NonStrict => n as i64 - 1,
        ReachMode::Strict => {
            if variant.label_cost != LabelCost::Zero {
                return Err(Error::InvalidArgument(
                    "the spanner formula does not cover strict variants with label cost".into(),
                ));
            }
            match n {
                1 => 0,
                2 => 1,
                3 => 3,
                _ => 2 * n as i64 - 4,
            }
        }
    };
    Ok(OptimumResult {
        value: Rational::from_integer(value),
        witness: None,
        method: OptimumMethod::FormulaOracle,
    })
}

/// Every labelling of `m` edges by `1..=k` that uses each of `1..=k`.
fn weak_orderings(m: usize) -> Vec<Vec<Label>> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur = vec![1 as Label; m];
    loop {
        let max = *cur.iter().max().unwrap();
        if (1..=max).all(|l| cur.contains(&l)) {
            out.push(cur.clone());
        }
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] <= m as Label {
                break;
            }
            cur[pos] = 1;
        }
    }
}

fn statically_connected(n: usize, edges: &[(VertexId, VertexId)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components == 1
}

fn brute_force_optimum(variant: &Variant, n: usize, kp: &KPolicy) -> Result<OptimumResult> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Guard(format!(
            "brute-force optimum is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let pairs: Vec<(VertexId, VertexId)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let pair_ids: Vec<usize> = (0..pairs.len()).collect();
    let try_owners = variant.has(Penalty::ProperPurchases);

    let mut best: Option<(Rational, StrategyProfile)> = None;
    for m in 0..=pairs.len() {
        if let Some((value, _)) = &best {
            if Rational::from_integer(m as i64) > *value {
                break;
            }
        }
        let labellings = weak_orderings(m);
        for subset in combinations(&pair_ids, m) {
            let edges: Vec<(VertexId, VertexId)> = subset.iter().map(|&i| pairs[i]).collect();
            if !statically_connected(n, &edges) {
                continue;
            }
            for labels in &labellings {
                let g = TemporalGraph::from_edges(
                    n,
                    edges.iter().zip(labels).map(|(&(a, b), &l)| (a, b, l)),
                )?;
                if !g.is_temporally_connected(variant.reach) {
                    continue;
                }
                let owner_masks = if try_owners { 1u32 << m } else { 1 };
                for mask in 0..owner_masks {
                    let profile = StrategyProfile::from_purchases(
                        n,
                        edges
                            .iter()
                            .zip(labels)
                            .enumerate()
                            .map(|(i, (&(a, b), &l))| {
                                if mask >> i & 1 == 1 {
                                    (b, a, l)
                                } else {
                                    (a, b, l)
                                }
                            }),
                    )?;
                    let cost = social_cost(variant, &profile, kp);
                    if best.as_ref().is_none_or(|(v, _)| cost < *v) {
                        best = Some((cost, profile));
                    }
                }
            }
        }
        // Nothing with m or more edges can beat a cost of exactly m.
        if let Some((value, _)) = &best {
            if *value == Rational::from_integer(m as i64) {
                break;
            }
        }
    }
    let (value, witness) =
        best.ok_or_else(|| Error::InvalidArgument("no connected profile".into()))?;
    Ok(OptimumResult {
        value,
        witness: Some(witness),
        method: OptimumMethod::BruteForce,
    })
}

/// `social_cost(profile) / opt.value`.
pub fn price_ratio(
    variant: &Variant,
    profile: &StrategyProfile,
    opt: &OptimumResult,
    kp: &KPolicy,
) -> Result<Rational> {
    if opt.value.is_zero() {
        return Err(Error::InvalidArgument(
            "optimum is zero; ratio undefined".into(),
        ));
    }
    Ok(social_cost(variant, profile, kp) / opt.value)
}

/// Observed price of anarchy and stability over a set of equilibria.
///
/// `None` means no equilibrium was found within the search bounds, which
/// says nothing about whether one exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriceSummary {
    pub equilibria: usize,
    pub worst: Option<Rational>,
    pub best: Option<Rational>,
}

pub fn price_summary(
    variant: &Variant,
    equilibria: &[StrategyProfile],
    opt: &OptimumResult,
    kp: &KPolicy,
) -> Result<PriceSummary> {
    let ratios = equilibria
        .iter()
        .map(|p| price_ratio(variant, p, opt, kp))
        .collect::<Result<Vec<_>>>()?;
    Ok(PriceSummary {
        equilibria: ratios.len(),
        worst: ratios.iter().max().copied(),
        best: ratios.iter().min().copied(),
    })
}

/// Labels used for the profiles enumerated by [`exhaustive_ne_scan`].
pub fn scan_labels(n: usize) -> Vec<Label> {
    if n <= 3 {
        vec![1, 2, 3]
    } else {
        vec![1, 2]
    }
}

/// Every profile on `n <= 4` agents, one purchase per target with labels
/// from [`scan_labels`], that [`is_nash`] certifies.
pub fn exhaustive_ne_scan(
    variant: &Variant,
    n: usize,
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> Result<Vec<StrategyProfile>> {
    exhaustive_ne_scan_with_labels(variant, n, &scan_labels(n), bounds, kp)
}

pub fn exhaustive_ne_scan_with_labels(
    variant: &Variant,
    n: usize,
    labels: &[Label],
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> Result<Vec<StrategyProfile>> {
    if n == 0 || n > SCAN_MAX_N {
        return Err(Error::Guard(format!(
            "equilibrium scans are limited to 1 <= n <= {SCAN_MAX_N}, got {n}"
        )));
    }
    bounds.validate()?;
    if bounds.max_edges < n - 1 {
        return Err(Error::InvalidArgument(format!(
            "scans need max_edges >= n - 1 = {}",
            n - 1
        )));
    }
    let labels: Vec<Label> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.is_empty() {
        return Err(Error::InvalidArgument("empty scan label set".into()));
    }

    // Per-agent strategy menus.
    let menus: Vec<Vec<Strategy>> = (0..n)
        .map(|u| {
            let others: Vec<VertexId> = (0..n).filter(|&v| v != u).collect();
            let mut menu = vec![Strategy::new()];
            for &t in &others {
                let mut next = Vec::with_capacity(menu.len() * (labels.len() + 1));
                for s in &menu {
                    next.push(s.clone());
                    for &l in &labels {
                        let mut s2 = s.clone();
                        s2.insert(Purchase::new(t, l));
                        next.push(s2);
                    }
                }
                menu = next;
            }
            menu
        })
        .collect();
    let total = menus
        .iter()
        .fold(1u128, |acc, m| acc.saturating_mul(m.len() as u128));
    if total > bounds.hard_node_limit {
        return Err(Error::Guard(format!(
            "scan would enumerate {total} profiles, above the hard limit {}",
            bounds.hard_node_limit
        )));
    }

    let results: Vec<Result<Option<StrategyProfile>>> = (0..total as u64)
        .into_par_iter()
        .map(|index| {
            let mut rest = index as usize;
            let mut strategies = Vec::with_capacity(n);
            for menu in &menus {
                strategies.push(menu[rest % menu.len()].clone());
                rest /= menu.len();
            }
            let profile = StrategyProfile::new(strategies)?;
            if has_cheap_deviation(variant, &profile, bounds, kp) {
                return Ok(None);
            }
            let report = is_nash(variant, &profile, bounds, kp)?;
            match report.verdict {
                Verdict::NashCertified => Ok(Some(profile)),
                Verdict::DeviationFound => Ok(None),
                Verdict::BudgetExceeded => Err(Error::BudgetExceeded {
                    required: 0,
                    limit: bounds.hard_node_limit,
                }),
            }
        })
        .collect();
    let mut found = Vec::new();
    for r in results {
        if let Some(p) = r? {
            found.push(p);
        }
    }
    Ok(found)
}

/// True if some agent strictly improves by dropping a single purchase,
/// restricted to deviations inside the search space of `bounds`.
fn has_cheap_deviation(
    variant: &Variant,
    profile: &StrategyProfile,
    bounds: &SearchBounds,
    kp: &KPolicy,
) -> bool {
    (0..profile.n()).any(|u| {
        let own: Vec<Purchase> = profile.strategy(u).iter().copied().collect();
        if own.is_empty() {
            return false;
        }
        let eval = DeviationEvaluator::new(variant, profile, u, kp);
        let window = label_window(
            eval.rest_labels(),
            bounds.label_window_pad,
            variant.has(Penalty::PositiveLabels),
        );
        let current = eval.evaluate(&own).total;
        (0..own.len()).any(|skip| {
            let rest: Vec<Purchase> = own
                .iter()
                .enumerate()
                .filter_map(|(i, p)| (i != skip).then_some(*p))
                .collect();
            let in_bounds = rest.iter().all(|p| window.binary_search(&p.label).is_ok())
                && rest.windows(2).all(|w| w[0].target != w[1].target);
            in_bounds && eval.evaluate(&rest).total < current
        })
    })
}
