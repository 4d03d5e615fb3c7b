//! JSON instance files.
//!
//! ```json
//! {"type": "graph_cut", "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]]}
//! {"type": "hypergraph_cut", "n": 4, "hyperedges": [[[0, 1, 2], 2.0]]}
//! {"type": "coverage", "n": 2, "weights": [1.0, 2.0], "membership": [[0], [0, 1]]}
//! {"type": "hardness", "p": 1, "q": 2}
//! ```
//!
//! Unknown fields are rejected.

use serde::{Deserialize, Serialize};

use super::{Coverage, GraphCut, HardnessInstance, HypergraphCut, Oracle};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetFnSpec {
    GraphCut {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    HypergraphCut {
        n: usize,
        hyperedges: Vec<(Vec<usize>, f64)>,
    },
    Coverage {
        n: usize,
        weights: Vec<f64>,
        membership: Vec<Vec<usize>>,
    },
    Hardness {
        p: usize,
        q: usize,
    },
}

impl SetFnSpec {
    pub fn ground_size(&self) -> usize {
        match self {
            SetFnSpec::GraphCut { n, .. } | SetFnSpec::HypergraphCut { n, .. } | SetFnSpec::Coverage { n, .. } => *n,
            SetFnSpec::Hardness { q, .. } => 2 * q,
        }
    }

    /// Validates and builds the oracle.
    pub fn build(&self) -> Result<Oracle> {
        Ok(match self.clone() {
            SetFnSpec::GraphCut { n, edges } => Oracle::new(GraphCut::new(n, edges)?),
            SetFnSpec::HypergraphCut { n, hyperedges } => Oracle::new(HypergraphCut::new(n, hyperedges)?),
            SetFnSpec::Coverage { n, weights, membership } => Oracle::new(Coverage::new(n, weights, membership)?),
            SetFnSpec::Hardness { p, q } => Oracle::new(HardnessInstance::new(p, q)?),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
