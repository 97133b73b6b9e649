//! JSON and text formats.
//!
//! Profiles:
//!
//! ```json
//! {"n": 3, "variant": {"reach": "strict", "labelcost": "zero", "penalties": ["positive"]},
//!  "strategies": [{"agent": 0, "buys": [{"to": 1, "label": 2}]}]}
//! ```
//!
//! Graphs: `{"n": 3, "edges": [{"u": 0, "v": 1, "label": 2}]}` with `u < v`.
//! Rationals are strings `"p/q"` (or `"p"` for integers).

use serde::{Deserialize, Serialize};

use crate::equilibrium::{OptimumMethod, OptimumResult};
use crate::error::{Error, Result};
use crate::game::{CostBreakdown, Purchase, Strategy, StrategyProfile, Variant};
use crate::graph::{Label, TemporalGraph, VertexId};
use crate::Rational;

pub mod rational_str {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(de::Error::custom)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num: i64 = num.parse().map_err(|_| bad())?;
    let den: i64 = den.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Exact form followed by a 6-significant-digit decimal, e.g. `3/2 (1.5)`.
pub fn render_ratio(r: &Rational) -> String {
    format!("{} ({})", r, approx(r))
}

/// 6 significant digits, trailing zeros trimmed.
pub fn approx(r: &Rational) -> String {
    let x = *r.numer() as f64 / *r.denom() as f64;
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct AgentEntry {
    agent: VertexId,
    buys: Vec<Purchase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ProfileDocument {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variant: Option<Variant>,
    strategies: Vec<AgentEntry>,
}

/// A profile as read from or written to JSON, optionally tagged with the
/// variant it is meant to be evaluated under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileFile {
    pub profile: StrategyProfile,
    pub variant: Option<Variant>,
}

impl ProfileFile {
    pub fn to_json(&self) -> String {
        let doc = ProfileDocument {
            n: self.profile.n(),
            variant: self.variant.clone(),
            strategies: self
                .profile
                .strategies()
                .iter()
                .enumerate()
                .map(|(agent, s)| AgentEntry {
                    agent,
                    buys: s.iter().copied().collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("profile serializes")
    }

    /// Agents missing from `strategies` buy nothing; an agent listed twice
    /// is an error.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed profile JSON: {e}")))?;
        let mut strategies: Vec<Option<Strategy>> = vec![None; doc.n];
        for entry in doc.strategies {
            let slot = strategies
                .get_mut(entry.agent)
                .ok_or(Error::InvalidVertex {
                    vertex: entry.agent,
                    n: doc.n,
                })?;
            if slot.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "agent {} listed twice",
                    entry.agent
                )));
            }
            *slot = Some(entry.buys.into_iter().collect());
        }
        let profile = StrategyProfile::new(
            strategies
                .into_iter()
                .map(Option::unwrap_or_default)
                .collect(),
        )?;
        Ok(Self {
            profile,
            variant: doc.variant,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct EdgeEntry {
    u: VertexId,
    v: VertexId,
    label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct GraphDocument {
    n: usize,
    edges: Vec<EdgeEntry>,
}

pub fn graph_to_json(g: &TemporalGraph) -> String {
    let doc = GraphDocument {
        n: g.n(),
        edges: g
            .edges()
            .map(|(u, v, label)| EdgeEntry { u, v, label })
            .collect(),
    };
    serde_json::to_string(&doc).expect("graph serializes")
}

pub fn graph_from_json(text: &str) -> Result<TemporalGraph> {
    let doc: GraphDocument = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("malformed graph JSON: {e}")))?;
    TemporalGraph::from_edges(doc.n, doc.edges.into_iter().map(|e| (e.u, e.v, e.label)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdownJson {
    pub agent: VertexId,
    pub edge_count: usize,
    #[serde(with = "rational_str")]
    pub label_cost: Rational,
    #[serde(with = "rational_str")]
    pub penalty: Rational,
    pub unreached: usize,
    #[serde(with = "rational_str")]
    pub total: Rational,
}

impl CostBreakdownJson {
    pub fn new(agent: VertexId, c: &CostBreakdown) -> Self {
        Self {
            agent,
            edge_count: c.edge_count,
            label_cost: c.label_cost,
            penalty: c.penalty,
            unreached: c.unreached,
            total: c.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct OptimumDocument {
    #[serde(with = "rational_str")]
    value: Rational,
    method: OptimumMethod,
    witness: Option<serde_json::Value>,
}

pub fn optimum_to_json(opt: &OptimumResult) -> String {
    let witness = opt.witness.as_ref().map(|p| {
        let text = ProfileFile {
            profile: p.clone(),
            variant: None,
        }
        .to_json();
        serde_json::from_str(&text).expect("profile JSON reparses")
    });
    serde_json::to_string(&OptimumDocument {
        value: opt.value,
        method: opt.method,
        witness,
    })
    .expect("optimum serializes")
}

pub fn optimum_from_json(text: &str) -> Result<OptimumResult> {
    let doc: OptimumDocument = serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("malformed optimum JSON: {e}")))?;
    let witness = doc
        .witness
        .map(|w| ProfileFile::from_json(&w.to_string()).map(|f| f.profile))
        .transpose()?;
    Ok(OptimumResult {
        value: doc.value,
        witness,
        method: doc.method,
    })
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Vec::<Purchase>::deserialize(d)?.into_iter().collect())
    }
}
