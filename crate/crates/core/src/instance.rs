//! Instance documents accepted by the command-line runner.
//!
//! ```json
//! {"type": "graph_cut", "n": 3, "edges": [[0, 1, 1.0]]}
//! {"type": "constrained", "objective": {"type": "graph_cut", ...}, "polytope": {"type": "cardinality", "k": 1}}
//! {"type": "welfare", "k": 3, "utility": {"type": "coverage", ...}}
//! {"type": "welfare_tight", "k": 3}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::PolytopeSpec;
use crate::setfn::SetFnSpec;
use crate::welfare::WelfareSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstrainedSpec {
    pub objective: SetFnSpec,
    pub polytope: PolytopeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InstanceDoc {
    Objective(SetFnSpec),
    Constrained(ConstrainedSpec),
    Welfare(WelfareSpec),
}

impl InstanceDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let kind = value
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::InvalidInstance("missing \"type\" field".into()))?
            .to_owned();
        Ok(match kind.as_str() {
            "constrained" => {
                value.as_object_mut().expect("has a type field").remove("type");
                InstanceDoc::Constrained(serde_json::from_value(value)?)
            }
            "welfare" | "welfare_tight" => InstanceDoc::Welfare(serde_json::from_value(value)?),
            _ => InstanceDoc::Objective(serde_json::from_value(value)?),
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            InstanceDoc::Objective(_) => "objective",
            InstanceDoc::Constrained(_) => "constrained",
            InstanceDoc::Welfare(_) => "welfare",
        }
    }

    /// The set function, for documents that carry one directly.
    pub fn objective(&self) -> Option<&SetFnSpec> {
        match self {
            InstanceDoc::Objective(f) => Some(f),
            InstanceDoc::Constrained(c) => Some(&c.objective),
            InstanceDoc::Welfare(_) => None,
        }
    }
}
