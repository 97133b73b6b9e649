//! Generators for the known equilibrium constructions.
//!
//! Each generator returns the profile together with the variants under
//! which it is claimed to be a Nash equilibrium and its social cost under
//! the first of those variants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{LabelCost, Penalty, StrategyProfile, Variant};
use crate::graph::{Label, ReachMode, VertexId};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionClaim {
    pub name: String,
    pub profile: StrategyProfile,
    pub claimed_variants: Vec<Variant>,
    /// Social cost under `claimed_variants[0]`.
    pub expected_social_cost: Rational,
    /// Which equilibrium result the construction witnesses.
    pub anchor: String,
}

/// The claim without the profile, as written next to a generated profile.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimManifest {
    pub construction: String,
    pub n: usize,
    pub variants: Vec<String>,
    #[serde(with = "crate::io::rational_str")]
    pub expected_social_cost: Rational,
    pub anchor: String,
}

impl ConstructionClaim {
    pub fn manifest(&self) -> ClaimManifest {
        ClaimManifest {
            construction: self.name.clone(),
            n: self.profile.n(),
            variants: self
                .claimed_variants
                .iter()
                .map(Variant::to_string)
                .collect(),
            expected_social_cost: self.expected_social_cost,
            anchor: self.anchor.clone(),
        }
    }
}

fn variant(reach: ReachMode, cost: LabelCost, penalties: &[Penalty]) -> Variant {
    Variant::new(reach, cost, penalties.iter().copied())
}

fn int(x: usize) -> Rational {
    Rational::from_integer(x as i64)
}

/// Agents `1..n` each buy `(0, label)`.
///
/// With a label below 1 the claims drop the positivity penalty.
pub fn star_tree(n: usize, label: Label) -> Result<ConstructionClaim> {
    if n == 0 {
        return Err(Error::InvalidArgument("star needs n >= 1".into()));
    }
    let profile = StrategyProfile::from_purchases(n, (1..n).map(|v| (v, 0, label)))?;
    let penalties: &[Penalty] = if label >= 1 {
        &[Penalty::PositiveLabels]
    } else {
        &[]
    };
    let claimed_variants = [LabelCost::Zero, LabelCost::Down, LabelCost::Up]
        .into_iter()
        .map(|c| variant(ReachMode::NonStrict, c, penalties))
        .collect();
    Ok(ConstructionClaim {
        name: "star".into(),
        profile,
        claimed_variants,
        expected_social_cost: int(n - 1),
        anchor: "equal-label spanning star: optimal and stable for non-strict paths".into(),
    })
}

/// `k` groups of `k` vertices. Inside group `i`, vertex 1 and every vertex
/// `j >= 3` buy a 1-edge towards vertex `j - 1` (vertex 1 towards vertex
/// 2). Vertex 2 of group `i` buys a 2-edge towards vertex `j(r)` of group
/// `i + r` for `r = 1..k`, where `j(r)` runs through `1, 3, 4, ..., k`.
/// Every vertex other than a group's vertex 2 receives exactly one 2-edge.
pub fn grid_ne(k: usize) -> Result<ConstructionClaim> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid needs k >= 3, got {k}"
        )));
    }
    let n = k * k;
    // Group i, position j (1-based) -> vertex id.
    let id = |i: usize, j: usize| -> VertexId { i * k + (j - 1) };
    let non_hub: Vec<usize> = (1..=k).filter(|&j| j != 2).collect();
    let mut purchases = Vec::new();
    for i in 0..k {
        purchases.push((id(i, 1), id(i, 2), 1));
        for j in 3..=k {
            purchases.push((id(i, j), id(i, j - 1), 1));
        }
        for r in 1..k {
            purchases.push((id(i, 2), id((i + r) % k, non_hub[r - 1]), 2));
        }
    }
    let profile = StrategyProfile::from_purchases(n, purchases)?;
    Ok(ConstructionClaim {
        name: "grid".into(),
        profile,
        claimed_variants: vec![
            variant(
                ReachMode::NonStrict,
                LabelCost::Zero,
                &[Penalty::PositiveLabels],
            ),
            variant(
                ReachMode::NonStrict,
                LabelCost::Up,
                &[Penalty::PositiveLabels],
            ),
        ],
        expected_social_cost: int(2 * k * (k - 1)),
        anchor: "two-label grid equilibrium with cost 2k(k-1) on k^2 vertices, non-strict paths"
            .into(),
    })
}

/// Four ring vertices `a, b, c, d = 0, 1, 2, 3` buy the ring counterclockwise
/// with labels `n, n+1, n, n+1`. Every further vertex `e_k` (`k = 1..n-4`,
/// vertex `k + 3`) buys a low edge into the ring and receives a high edge
/// from the opposite ring vertex:
///
/// - `k` odd: `e_k` buys `(a, ceil(k/2))`, `c` buys `(e_k, n + 1 + ceil(k/2))`
/// - `k` even: `e_k` buys `(c, k/2)`, `a` buys `(e_k, n + 1 + k/2)`
pub fn outer_ring_ne(n: usize) -> Result<ConstructionClaim> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "outer ring needs n >= 4, got {n}"
        )));
    }
    let (a, b, c, d) = (0, 1, 2, 3);
    let ring = n as Label;
    let mut purchases = vec![
        (a, b, ring),
        (b, c, ring + 1),
        (c, d, ring),
        (d, a, ring + 1),
    ];
    for k in 1..=n - 4 {
        let e = k + 3;
        let step = k.div_ceil(2) as Label;
        if k % 2 == 1 {
            purchases.push((e, a, step));
            purchases.push((c, e, ring + 1 + step));
        } else {
            purchases.push((e, c, step));
            purchases.push((a, e, ring + 1 + step));
        }
    }
    let profile = StrategyProfile::from_purchases(n, purchases)?;
    Ok(ConstructionClaim {
        name: "outer-ring".into(),
        profile,
        claimed_variants: vec![
            variant(ReachMode::Strict, LabelCost::Zero, &[Penalty::PositiveLabels]),
            variant(
                ReachMode::Strict,
                LabelCost::Zero,
                &[Penalty::PositiveLabels, Penalty::ProperPurchases],
            ),
        ],
        expected_social_cost: int(2 * n - 4),
        anchor: "outer ring with spokes: optimal-cost equilibrium for strict paths, also under proper purchases".into(),
    })
}

/// Complete graph with every edge labelled `label`, bought by its lower
/// endpoint.
///
/// Only `label == 1` is stable under the positivity penalty: with a larger
/// label an agent can swap its edges for one 1-edge and relay through it.
pub fn clique_ne(n: usize, label: Label) -> Result<ConstructionClaim> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "clique needs n >= 2, got {n}"
        )));
    }
    if label < 1 {
        return Err(Error::InvalidArgument(format!(
            "clique label must be >= 1, got {label}"
        )));
    }
    let profile = StrategyProfile::from_purchases(
        n,
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, label))),
    )?;
    Ok(ConstructionClaim {
        name: "clique".into(),
        profile,
        claimed_variants: [LabelCost::Zero, LabelCost::Up, LabelCost::Down]
            .into_iter()
            .map(|c| variant(ReachMode::Strict, c, &[Penalty::PositiveLabels]))
            .collect(),
        expected_social_cost: int(n * (n - 1) / 2),
        anchor: "equal-label clique: worst-case equilibrium for strict paths".into(),
    })
}

/// The `d`-dimensional hypercube on `2^d` vertices. The edge flipping bit
/// `b` carries label `b + 1`, so `Q_d` is two equally labelled copies of
/// `Q_{d-1}` joined by `d`-edges. Each edge is bought by the endpoint whose
/// flipped bit is 0.
pub fn hypercube_ne(d: usize) -> Result<ConstructionClaim> {
    if d == 0 || d > 16 {
        return Err(Error::InvalidArgument(format!(
            "hypercube dimension must be in 1..=16, got {d}"
        )));
    }
    let n = 1usize << d;
    let profile = StrategyProfile::from_purchases(
        n,
        (0..n).flat_map(|x| {
            (0..d)
                .filter(move |&b| x >> b & 1 == 0)
                .map(move |b| (x, x | 1 << b, b as Label + 1))
        }),
    )?;
    Ok(ConstructionClaim {
        name: "hypercube".into(),
        profile,
        claimed_variants: vec![variant(
            ReachMode::Strict,
            LabelCost::Zero,
            &[Penalty::PositiveLabels, Penalty::ProperPurchases],
        )],
        expected_social_cost: int(d * n / 2),
        anchor: "dimension-labelled hypercube: logarithmic anarchy under proper purchases".into(),
    })
}

/// Equilibria for `n <= 6` when labels may be arbitrarily low. With
/// vertices `A..F = 0..5`:
///
/// - `n = 2`: `A -> B` (1); `n = 3`: triangle `A -> B -> C -> A`, all 1
/// - `n = 4`: `A -> B` (1), `B -> C` (2), `C -> D` (1), `D -> A` (2)
/// - `n = 5`: adds `E -> C` (0) and `D -> E` (3)
/// - `n = 6`: adds `B -> F` (3) and `F -> A` (0)
pub fn arbitrary_low_ne(n: usize) -> Result<ConstructionClaim> {
    const A: VertexId = 0;
    const B: VertexId = 1;
    const C: VertexId = 2;
    const D: VertexId = 3;
    const E: VertexId = 4;
    const F: VertexId = 5;
    let purchases: Vec<(VertexId, VertexId, Label)> = match n {
        1 => vec![],
        2 => vec![(A, B, 1)],
        3 => vec![(A, B, 1), (B, C, 1), (C, A, 1)],
        4..=6 => {
            let mut p = vec![(A, B, 1), (B, C, 2), (C, D, 1), (D, A, 2)];
            if n >= 5 {
                p.extend([(E, C, 0), (D, E, 3)]);
            }
            if n == 6 {
                p.extend([(B, F, 3), (F, A, 0)]);
            }
            p
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "arbitrary-low equilibria are only known for 1 <= n <= 6, got {n}"
            )))
        }
    };
    let expected = match n {
        1 => 0,
        2 => 1,
        3 => 3,
        _ => 2 * n - 4,
    };
    let profile = StrategyProfile::from_purchases(n, purchases)?;
    Ok(ConstructionClaim {
        name: "arbitrary-low".into(),
        profile,
        claimed_variants: vec![variant(ReachMode::Strict, LabelCost::Zero, &[])],
        expected_social_cost: int(expected),
        anchor: "optimal-cost equilibria with unrestricted labels, strict paths, n <= 6".into(),
    })
}
