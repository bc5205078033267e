//! Divisor-labelled quivers: collection quivers, their divisor sub-quivers, and monodromy quivers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::MonodromyPermutation;
use crate::toric::{self, LineBundleClass, PicardLattice, ToricDivisor, ToricError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuiverError {
    #[error("no effective divisors in the class from vertex {from} to vertex {to}")]
    EmptyHom { from: usize, to: usize },
    #[error("arrow label {label} from vertex {from} to {to} is not in the effective basis")]
    LabelNotInBasis {
        from: usize,
        to: usize,
        label: String,
    },
    #[error("vertex index {0} out of range")]
    BadIndex(usize),
    #[error(transparent)]
    Toric(#[from] ToricError),
}

pub type Result<T> = std::result::Result<T, QuiverError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverEdge {
    pub source: usize,
    pub target: usize,
    pub label: ToricDivisor,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuiver {
    pub vertices: Vec<String>,
    pub edges: Vec<QuiverEdge>,
}

/// Ordered pair of collection members that carries arrows, optionally restricted
/// to a subset of the effective basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub source: usize,
    pub target: usize,
    pub labels: Option<Vec<ToricDivisor>>,
}

impl ArrowSpec {
    pub fn pair(source: usize, target: usize) -> Self {
        Self {
            source,
            target,
            labels: None,
        }
    }
}

pub fn build_quiver(
    pic: &PicardLattice,
    collection: &[LineBundleClass],
    arrows: &[ArrowSpec],
) -> Result<LabeledQuiver> {
    let mut edges = Vec::new();
    for a in arrows {
        let (Some(src), Some(tgt)) = (collection.get(a.source), collection.get(a.target)) else {
            return Err(QuiverError::BadIndex(a.source.max(a.target)));
        };
        let class = toric::divisor_class(pic, &tgt.rep.sub(&src.rep))?;
        let basis = toric::effective_basis(pic, &class)?;
        if basis.is_empty() {
            return Err(QuiverError::EmptyHom {
                from: a.source,
                to: a.target,
            });
        }
        let chosen = match &a.labels {
            None => basis,
            Some(labels) => {
                if let Some(bad) = labels.iter().find(|l| !basis.contains(l)) {
                    return Err(QuiverError::LabelNotInBasis {
                        from: a.source,
                        to: a.target,
                        label: bad.to_string(),
                    });
                }
                basis.into_iter().filter(|d| labels.contains(d)).collect()
            }
        };
        for label in chosen {
            let name = format!("a{}", edges.len() + 1);
            edges.push(QuiverEdge {
                source: a.source,
                target: a.target,
                label,
                name,
            });
        }
    }
    Ok(LabeledQuiver {
        vertices: collection.iter().map(LineBundleClass::label).collect(),
        edges,
    })
}

impl LabeledQuiver {
    pub fn edgeless(vertices: Vec<String>) -> Self {
        Self {
            vertices,
            edges: Vec::new(),
        }
    }

    /// Distinct edge labels in order of first appearance.
    pub fn labels(&self) -> Vec<ToricDivisor> {
        let mut out: Vec<ToricDivisor> = Vec::new();
        for e in &self.edges {
            if !out.contains(&e.label) {
                out.push(e.label.clone());
            }
        }
        out
    }

    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges
            .iter()
            .any(|e| e.source == source && e.target == target)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.source == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.target == v).count()
    }

    pub fn to_dot(&self, ray_names: &[String]) -> String {
        let mut s = String::from("digraph Q {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{v}\"];");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  v{} -> v{} [label=\"{}\", id=\"{}\"];",
                e.source,
                e.target,
                e.label.format_with(ray_names),
                e.name
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self, ray_names: &[String]) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices,
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "source": e.source,
                "target": e.target,
                "label": e.label.format_with(ray_names),
                "name": e.name,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Edges whose label equals `d` componentwise.
pub fn divisor_subquiver(q: &LabeledQuiver, d: &ToricDivisor) -> LabeledQuiver {
    LabeledQuiver {
        vertices: q.vertices.clone(),
        edges: q.edges.iter().filter(|e| &e.label == d).cloned().collect(),
    }
}

/// Functional graph of the permutation: one edge `z -> perm(z)` per vertex.
pub fn monodromy_quiver(perm: &MonodromyPermutation, vertex_labels: &[String]) -> LabeledQuiver {
    let label = perm.divisor.clone().unwrap_or(ToricDivisor(Vec::new()));
    LabeledQuiver {
        vertices: vertex_labels.to_vec(),
        edges: perm
            .mapping()
            .iter()
            .enumerate()
            .map(|(i, &t)| QuiverEdge {
                source: i,
                target: t,
                label: label.clone(),
                name: format!("m{i}"),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub edge: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    pub violations: Vec<Violation>,
}

/// Whether every edge `u -> v` of `sub` has an edge `map[u] -> map[v]` in `sup`.
pub fn is_contained(sub: &LabeledQuiver, sup: &LabeledQuiver, vertex_map: &[usize]) -> Containment {
    let violations: Vec<Violation> = sub
        .edges
        .iter()
        .filter(|e| !sup.has_edge(vertex_map[e.source], vertex_map[e.target]))
        .map(|e| Violation {
            edge: e.name.clone(),
            source: sub.vertices[e.source].clone(),
            target: sub.vertices[e.target].clone(),
        })
        .collect();
    Containment {
        contained: violations.is_empty(),
        violations,
    }
}
