//! The JSON instance document exchanged by every CLI subcommand.
//!
//! ```json
//! { "n": 3,
//!   "support": {"kind": "box", "lower": [0,0,0], "upper": [2,2,2]},
//!   "feasible_set": {"tag": "knapsack", "weights": [1,2,1], "capacity": 2},
//!   "samples": [[1,0.5,2], [0.2,1,1]],
//!   "alpha": 0.5, "epsilon": 0.1, "q": "inf" }
//! ```

use std::fs;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::milp::Row;
use crate::model::{AmbiguitySpec, EmpiricalDistribution, FeasibleSet, HalfSpace, Norm, ProblemTag, SupportSet};
use crate::problems::{DagShortestPathInstance, KnapsackInstance, RepSelectionInstance};

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Norm::L1 => s.serialize_u8(1),
            Norm::L2 => s.serialize_u8(2),
            Norm::LInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(v) => Norm::parse(&v.to_string()).map_err(de::Error::custom),
            serde_json::Value::String(v) => Norm::parse(&v).map_err(de::Error::custom),
            other => Err(de::Error::custom(format!("expected 1, 2 or \"inf\", got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportDoc {
    Unrestricted,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope { rows: Vec<HalfSpace> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum FeasibleSetDoc {
    Knapsack {
        weights: Vec<f64>,
        capacity: f64,
    },
    RepSelection {
        groups: Vec<Vec<usize>>,
    },
    DagShortestPath {
        vertices: usize,
        arcs: Vec<(usize, usize)>,
        source: usize,
        sink: usize,
    },
    Generic {
        constraints: Vec<Row>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub n: usize,
    pub support: SupportDoc,
    pub feasible_set: FeasibleSetDoc,
    pub samples: Vec<Vec<f64>>,
    pub alpha: f64,
    pub epsilon: f64,
    pub q: Norm,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub set: FeasibleSet,
    pub support: SupportSet,
    pub dist: EmpiricalDistribution,
    pub spec: AmbiguitySpec,
    pub alpha: f64,
}

impl InstanceDocument {
    pub fn into_instance(self) -> Result<Instance> {
        let n = self.n;
        let set = match self.feasible_set {
            FeasibleSetDoc::Knapsack { weights, capacity } => KnapsackInstance::new(weights, capacity)?.encode()?,
            FeasibleSetDoc::RepSelection { groups } => RepSelectionInstance::new(groups)?.encode()?,
            FeasibleSetDoc::DagShortestPath {
                vertices,
                arcs,
                source,
                sink,
            } => DagShortestPathInstance::new(vertices, arcs, source, sink)?.encode()?,
            FeasibleSetDoc::Generic { constraints } => FeasibleSet::new(n, constraints, ProblemTag::Generic)?,
        };
        check_dim(n, set.n())?;
        let support = match self.support {
            SupportDoc::Unrestricted => SupportSet::Unrestricted,
            SupportDoc::Box { lower, upper } => SupportSet::boxed(lower, upper)?,
            SupportDoc::Polytope { rows } => SupportSet::polytope(n, rows)?,
        };
        support.check_dim(n)?;
        let dist = EmpiricalDistribution::new(self.samples)?;
        check_dim(n, dist.dim())?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha = {} is outside (0, 1]", self.alpha)));
        }
        Ok(Instance {
            set,
            support,
            dist,
            spec: AmbiguitySpec::new(self.epsilon, self.q)?,
            alpha: self.alpha,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Instance {
    pub fn to_document(&self) -> InstanceDocument {
        let feasible_set = match self.set.tag() {
            ProblemTag::Knapsack(k) => FeasibleSetDoc::Knapsack {
                weights: k.weights.clone(),
                capacity: k.capacity,
            },
            ProblemTag::RepSelection(rs) => FeasibleSetDoc::RepSelection {
                groups: rs.groups().to_vec(),
            },
            ProblemTag::DagShortestPath(sp) => FeasibleSetDoc::DagShortestPath {
                vertices: sp.vertices,
                arcs: sp.arcs.clone(),
                source: sp.source,
                sink: sp.sink,
            },
            ProblemTag::Generic => FeasibleSetDoc::Generic {
                constraints: self.set.constraints().to_vec(),
            },
        };
        let support = match &self.support {
            SupportSet::Unrestricted => SupportDoc::Unrestricted,
            SupportSet::Box { lower, upper } => SupportDoc::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            SupportSet::Polytope(p) => SupportDoc::Polytope { rows: p.rows().to_vec() },
        };
        InstanceDocument {
            n: self.set.n(),
            support,
            feasible_set,
            samples: self.dist.realizations().to_vec(),
            alpha: self.alpha,
            epsilon: self.spec.epsilon,
            q: self.spec.norm,
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    InstanceDocument::from_json(&fs::read_to_string(path)?)?.into_instance()
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, instance.to_document().to_json()? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{ "n": 3,
      "support": {"kind": "box", "lower": [0,0,0], "upper": [2,2,2]},
      "feasible_set": {"tag": "knapsack", "weights": [1,2,1], "capacity": 2},
      "samples": [[1,0.5,2], [0.2,1,1]],
      "alpha": 0.5, "epsilon": 0.1, "q": "inf" }"#;

    #[test]
    fn round_trip() {
        let doc = InstanceDocument::from_json(DOC).unwrap();
        let inst = doc.clone().into_instance().unwrap();
        assert_eq!(inst.spec.norm, Norm::LInf);
        assert_eq!(inst.to_document(), doc);
        let again = InstanceDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn norm_forms() {
        for (text, norm) in [("1", Norm::L1), ("2", Norm::L2), ("\"inf\"", Norm::LInf)] {
            assert_eq!(serde_json::from_str::<Norm>(text).unwrap(), norm);
        }
        assert!(serde_json::from_str::<Norm>("3").is_err());
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let bad = DOC.replace("[0.2,1,1]", "[0.2,1]");
        let err = InstanceDocument::from_json(&bad).unwrap().into_instance().unwrap_err();
        assert!(err.is_input_error());
    }

    #[test]
    fn generic_and_graph_sets() {
        let doc = r#"{ "n": 2, "support": {"kind": "unrestricted"},
          "feasible_set": {"tag": "generic", "constraints": [{"coefficients": [1,1], "relation": ">=", "rhs": 1}]},
          "samples": [[1,2]], "alpha": 1, "epsilon": 0, "q": 1 }"#;
        let inst = InstanceDocument::from_json(doc).unwrap().into_instance().unwrap();
        assert_eq!(inst.set.enumerate().len(), 3);
        let sp = r#"{ "n": 2, "support": {"kind": "unrestricted"},
          "feasible_set": {"tag": "dag_shortest_path", "vertices": 2, "arcs": [[0,1],[0,1]], "source": 0, "sink": 1},
          "samples": [[1,2]], "alpha": 1, "epsilon": 0, "q": 2 }"#;
        let inst = InstanceDocument::from_json(sp).unwrap().into_instance().unwrap();
        assert_eq!(inst.to_document().q, Norm::L2);
    }
}
