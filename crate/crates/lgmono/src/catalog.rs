//! Built-in manifolds and the versioned JSON schema they are stored in.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::Permutation;
use crate::laurent::{self, LaurentPoly, Partition, C64};
use crate::quiver::{self, ArrowSpec, LabeledQuiver, QuiverError};
use crate::toric::{self, FanoPolytope, LineBundleClass, PicardLattice, ToricDivisor, ToricError};

pub const SCHEMA: &str = "v1";

const BUILTIN: &str = include_str!("../data/catalog.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("malformed catalog: {0}")]
    Json(String),
    #[error("entry {id}: {reason}")]
    Invalid { id: String, reason: String },
}

pub type Result<T> = std::result::Result<T, CatalogError>;

/// On-disk form of the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCatalog {
    pub schema: String,
    pub entries: Vec<RawEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEntry {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub vertices: Vec<Vec<i64>>,
    pub ray_names: Vec<String>,
    #[serde(default)]
    pub symbols: BTreeMap<String, String>,
    #[serde(default)]
    pub class_names: BTreeMap<String, String>,
    pub collection: Vec<RawMember>,
    #[serde(default)]
    pub arrows: Vec<RawArrow>,
    #[serde(default)]
    pub partition: Option<RawPartition>,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default)]
    pub degenerations: Vec<RawRecipe>,
    #[serde(default)]
    pub orbits: Vec<OrbitRecipe>,
    #[serde(default)]
    pub fixtures: Vec<RawFixture>,
    #[serde(default)]
    pub monodromy: Vec<RawMonodromy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate_names: Option<BTreeMap<String, String>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMember {
    pub label: String,
    pub divisor: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawArrow {
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPartition {
    pub base: Vec<String>,
    pub fiber: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RawRecipe {
    Blowdown {
        scale: Vec<String>,
        limit: String,
        escape: String,
    },
    Fiber {
        scale: Vec<String>,
        coords: Vec<usize>,
        digit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecipe {
    pub divisor: String,
    pub digit: usize,
    pub modulus: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFixture {
    pub label: String,
    pub coords: Vec<[f64; 2]>,
    pub printed: String,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMonodromy {
    pub divisor: String,
    pub cycles: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub divisor: ToricDivisor,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub label: String,
    pub coords: Vec<C64>,
    pub printed: String,
    pub tol: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyFixture {
    pub divisor: ToricDivisor,
    pub permutation: Permutation,
    pub cycles: String,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// Scaling `scale` to zero gives the potential of `limit`; the point labelled `escape` leaves the torus.
    Blowdown {
        scale: Vec<usize>,
        limit: String,
        escape: String,
    },
    /// Scaling the base rays to zero; coordinates `coords` tend to critical points of the
    /// fiber potential, indexed by label digit `digit`.
    Fiber {
        scale: Vec<usize>,
        coords: Vec<usize>,
        digit: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub divisor: ToricDivisor,
    pub digit: usize,
    pub modulus: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub polytope: FanoPolytope,
    pub ray_names: Vec<String>,
    pub class_names: BTreeMap<String, String>,
    pub collection: Vec<Member>,
    pub arrows: Vec<ArrowSpec>,
    pub partition: Option<Partition>,
    pub epsilon: f64,
    pub degenerations: Vec<Recipe>,
    pub orbits: Vec<Orbit>,
    pub fixtures: Vec<Fixture>,
    pub monodromy: Vec<MonodromyFixture>,
    pub alternate_names: Option<BTreeMap<String, String>>,
    raw: RawEntry,
}

/// Digits after the leading letter of a label such as `E021`.
pub fn label_digits(label: &str) -> Option<Vec<u32>> {
    let mut chars = label.chars();
    chars.next()?;
    let digits: Option<Vec<u32>> = chars.map(|c| c.to_digit(10)).collect();
    digits.filter(|d| !d.is_empty())
}

impl CatalogEntry {
    pub fn raw(&self) -> &RawEntry {
        &self.raw
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        self.polytope.vertices()
    }

    pub fn labels(&self) -> Vec<String> {
        self.collection.iter().map(|m| m.label.clone()).collect()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.collection.iter().position(|m| m.label == label)
    }

    pub fn picard(&self) -> PicardLattice {
        toric::picard(&self.polytope).expect("validated at load")
    }

    /// Collection classes with their labels as display names.
    pub fn classes(&self) -> Vec<LineBundleClass> {
        let pic = self.picard();
        self.collection
            .iter()
            .map(|m| {
                toric::divisor_class(&pic, &m.divisor)
                    .expect("validated at load")
                    .named(m.label.clone())
            })
            .collect()
    }

    pub fn potential(&self) -> LaurentPoly {
        laurent::lg_potential(&self.polytope)
    }

    pub fn quiver(&self) -> LabeledQuiver {
        quiver::build_quiver(&self.picard(), &self.classes(), &self.arrows)
            .expect("validated at load")
    }

    pub fn parse_divisor(&self, expr: &str) -> std::result::Result<ToricDivisor, ToricError> {
        ToricDivisor::parse(expr, &self.ray_names)
    }

    pub fn format_divisor(&self, d: &ToricDivisor) -> String {
        d.format_with(&self.ray_names)
    }

    pub fn ray_index(&self, name: &str) -> Option<usize> {
        self.ray_names.iter().position(|n| n == name)
    }
}

fn invalid(id: &str, reason: impl Into<String>) -> CatalogError {
    CatalogError::Invalid {
        id: id.to_string(),
        reason: reason.into(),
    }
}

fn symbol_divisor(raw: &RawEntry, expr: &str) -> std::result::Result<ToricDivisor, String> {
    let names: Vec<String> = raw.symbols.keys().cloned().collect();
    let coeffs = toric::parse_combination(expr, &names).map_err(|e| e.to_string())?;
    let mut d = ToricDivisor::zero(raw.ray_names.len());
    for (name, k) in names.iter().zip(coeffs) {
        let sym =
            ToricDivisor::parse(&raw.symbols[name], &raw.ray_names).map_err(|e| e.to_string())?;
        d = d.add(&sym.scale(k));
    }
    Ok(d)
}

fn convert(raw: &RawEntry) -> Result<CatalogEntry> {
    let id = raw.id.as_str();
    let bad = |r: String| invalid(id, r);
    let polytope = FanoPolytope::new(raw.vertices.clone()).map_err(|e| bad(e.to_string()))?;
    if raw.ray_names.len() != polytope.num_rays() {
        return Err(bad("ray_names length differs from vertex count".into()));
    }
    let fano = toric::is_reflexive_fano(&polytope);
    if !fano.is_fano {
        return Err(bad(format!(
            "polytope is not smooth Fano: {:?}",
            fano.violation
        )));
    }
    let pic = toric::picard(&polytope).map_err(|e| bad(e.to_string()))?;
    if pic.rank() != polytope.num_rays() - polytope.dim() {
        return Err(bad("Picard rank differs from rays - dim".into()));
    }
    let ray = |name: &String| -> Result<usize> {
        raw.ray_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| bad(format!("unknown ray {name:?}")))
    };
    let div =
        |expr: &str| ToricDivisor::parse(expr, &raw.ray_names).map_err(|e| bad(e.to_string()));
    let class = |d: &ToricDivisor| toric::divisor_class(&pic, d).map_err(|e| bad(e.to_string()));

    for (name, expr) in &raw.symbols {
        div(expr).map_err(|_| bad(format!("symbol {name:?} has bad divisor {expr:?}")))?;
    }
    for (r, expr) in &raw.class_names {
        let d = ToricDivisor::ray(raw.ray_names.len(), ray(r)?);
        let named = symbol_divisor(raw, expr).map_err(bad)?;
        if class(&d)? != class(&named)? {
            return Err(bad(format!("class of {r} is not {expr}")));
        }
    }

    let collection: Vec<Member> = raw
        .collection
        .iter()
        .map(|m| {
            Ok(Member {
                label: m.label.clone(),
                divisor: div(&m.divisor)?,
                name: m.name.clone(),
            })
        })
        .collect::<Result<_>>()?;
    for m in &collection {
        let named = symbol_divisor(raw, &m.name).map_err(bad)?;
        if class(&m.divisor)? != class(&named)? {
            return Err(bad(format!(
                "member {} is not of class {}",
                m.label, m.name
            )));
        }
    }
    let chi = toric::euler_characteristic(&polytope).map_err(|e| bad(e.to_string()))?;
    if collection.len() != chi {
        return Err(bad(format!(
            "collection has {} members, expected {chi}",
            collection.len()
        )));
    }
    let labels: Vec<String> = collection.iter().map(|m| m.label.clone()).collect();
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(bad(format!("duplicate label {l}")));
        }
    }
    let classes: Vec<LineBundleClass> = collection
        .iter()
        .map(|m| class(&m.divisor))
        .collect::<Result<_>>()?;
    let special = toric::is_special_collection(&pic, &classes).map_err(|e| bad(e.to_string()))?;
    if !special.special {
        return Err(bad("collection is not special".into()));
    }

    let member = |l: &String| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| bad(format!("unknown label {l:?}")))
    };
    let arrows: Vec<ArrowSpec> = raw
        .arrows
        .iter()
        .map(|a| {
            let labels = match &a.labels {
                None => None,
                Some(ls) => Some(ls.iter().map(|l| div(l)).collect::<Result<Vec<_>>>()?),
            };
            Ok(ArrowSpec {
                source: member(&a.source)?,
                target: member(&a.target)?,
                labels,
            })
        })
        .collect::<Result<_>>()?;
    let q = quiver::build_quiver(&pic, &classes, &arrows)
        .map_err(|e: QuiverError| bad(e.to_string()))?;
    for e in &q.edges {
        if class(&e.label)? != class(&classes[e.target].rep.sub(&classes[e.source].rep))? {
            return Err(bad(format!("edge {} has the wrong class", e.name)));
        }
    }

    let partition = match &raw.partition {
        None => None,
        Some(p) => {
            let p = Partition {
                base: p.base.iter().map(ray).collect::<Result<_>>()?,
                fiber: p.fiber.iter().map(ray).collect::<Result<_>>()?,
            };
            p.validate(raw.ray_names.len())
                .map_err(|e| bad(e.to_string()))?;
            Some(p)
        }
    };
    if !(raw.epsilon > 0.0 && raw.epsilon <= 1.0) {
        return Err(bad(format!("epsilon {} outside (0, 1]", raw.epsilon)));
    }

    let digits_of =
        |l: &str| label_digits(l).ok_or_else(|| bad(format!("label {l:?} has no index digits")));
    let degenerations: Vec<Recipe> = raw
        .degenerations
        .iter()
        .map(|r| match r {
            RawRecipe::Blowdown {
                scale,
                limit,
                escape,
            } => {
                member(escape)?;
                Ok(Recipe::Blowdown {
                    scale: scale.iter().map(ray).collect::<Result<_>>()?,
                    limit: limit.clone(),
                    escape: escape.clone(),
                })
            }
            RawRecipe::Fiber {
                scale,
                coords,
                digit,
            } => {
                if coords.iter().any(|&c| c >= polytope.dim()) {
                    return Err(bad("fiber coordinate out of range".into()));
                }
                for l in &labels {
                    if digits_of(l)?.len() <= *digit {
                        return Err(bad(format!("label {l} has no digit {digit}")));
                    }
                }
                Ok(Recipe::Fiber {
                    scale: scale.iter().map(ray).collect::<Result<_>>()?,
                    coords: coords.clone(),
                    digit: *digit,
                })
            }
        })
        .collect::<Result<_>>()?;
    let orbits: Vec<Orbit> = raw
        .orbits
        .iter()
        .map(|o| {
            for l in &labels {
                if digits_of(l)?.len() <= o.digit {
                    return Err(bad(format!("label {l} has no digit {}", o.digit)));
                }
            }
            if o.modulus < 2 {
                return Err(bad("orbit modulus below 2".into()));
            }
            Ok(Orbit {
                divisor: div(&o.divisor)?,
                digit: o.digit,
                modulus: o.modulus,
            })
        })
        .collect::<Result<_>>()?;

    let fixtures: Vec<Fixture> = raw
        .fixtures
        .iter()
        .map(|f| {
            member(&f.label)?;
            if f.coords.len() != polytope.dim() {
                return Err(bad(format!("fixture {} has the wrong dimension", f.label)));
            }
            if !(f.tol > 0.0) {
                return Err(bad(format!(
                    "fixture {} has a nonpositive tolerance",
                    f.label
                )));
            }
            Ok(Fixture {
                label: f.label.clone(),
                coords: f.coords.iter().map(|&[re, im]| C64::new(re, im)).collect(),
                printed: f.printed.clone(),
                tol: f.tol,
                note: f.note.clone(),
            })
        })
        .collect::<Result<_>>()?;
    if !fixtures.is_empty() {
        let mut seen: Vec<&str> = fixtures.iter().map(|f| f.label.as_str()).collect();
        seen.sort_unstable();
        seen.dedup();
        if fixtures.len() != labels.len() || seen.len() != labels.len() {
            return Err(bad(
                "fixture labels do not biject with the collection".into()
            ));
        }
    }

    let monodromy: Vec<MonodromyFixture> = raw
        .monodromy
        .iter()
        .map(|m| {
            Ok(MonodromyFixture {
                divisor: div(&m.divisor)?,
                permutation: Permutation::from_cycles(&m.cycles, &labels).map_err(bad)?,
                cycles: m.cycles.clone(),
                note: m.note.clone(),
            })
        })
        .collect::<Result<_>>()?;

    if let Some(alt) = &raw.alternate_names {
        if let Some(l) = alt.keys().find(|l| !labels.contains(l)) {
            return Err(bad(format!("alternate name for unknown label {l}")));
        }
    }

    Ok(CatalogEntry {
        id: raw.id.clone(),
        title: raw.title.clone(),
        polytope,
        ray_names: raw.ray_names.clone(),
        class_names: raw.class_names.clone(),
        collection,
        arrows,
        partition,
        epsilon: raw.epsilon,
        degenerations,
        orbits,
        fixtures,
        monodromy,
        alternate_names: raw.alternate_names.clone(),
        raw: raw.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("built-in catalog is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCatalog =
            serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_raw(raw: RawCatalog) -> Result<Self> {
        if raw.schema != SCHEMA {
            return Err(CatalogError::Schema(raw.schema));
        }
        let entries: Vec<CatalogEntry> = raw.entries.iter().map(convert).collect::<Result<_>>()?;
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|x| x.id == e.id) {
                return Err(invalid(&e.id, "duplicate id"));
            }
            for r in &e.degenerations {
                if let Recipe::Blowdown { limit, scale, .. } = r {
                    let Some(target) = entries.iter().find(|x| &x.id == limit) else {
                        return Err(invalid(&e.id, format!("unknown limit entry {limit:?}")));
                    };
                    let remaining: Vec<&Vec<i64>> = e
                        .rays()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !scale.contains(k))
                        .map(|(_, v)| v)
                        .collect();
                    let mut a: Vec<&Vec<i64>> = remaining;
                    let mut b: Vec<&Vec<i64>> = target.rays().iter().collect();
                    a.sort();
                    b.sort();
                    if a != b {
                        return Err(invalid(
                            &e.id,
                            format!("remaining rays do not match {limit}"),
                        ));
                    }
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn to_raw(&self) -> RawCatalog {
        RawCatalog {
            schema: SCHEMA.into(),
            entries: self.entries.iter().map(|e| e.raw.clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("catalog serializes")
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| CatalogError::UnknownEntry(id.to_string()))
    }
}

/// Entry of the built-in catalog.
pub fn get(id: &str) -> Result<CatalogEntry> {
    Catalog::builtin().get(id).cloned()
}

pub fn list() -> Vec<String> {
    Catalog::builtin()
        .ids()
        .into_iter()
        .map(String::from)
        .collect()
}
