//! Exceptional maps from critical points to line bundles, and the aligned-containment check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{label_digits, Catalog, CatalogEntry, Recipe};
use crate::continuation::{
    self, DegenerateOptions, DegenerationStatus, MonodromyPermutation, Permutation, TrackError,
    TrackOptions,
};
use crate::laurent::{self, C64};
use crate::quiver::{self, Violation};
use crate::solver::{self, CritSet, SolveError, SolveOptions};
use crate::toric::{FanoPolytope, ToricDivisor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("{entry}: {reason}")]
    FixtureMismatch { entry: String, reason: String },
    #[error("{entry}: recipe clause '{clause}' failed: {detail}")]
    RecipeViolation {
        entry: String,
        clause: String,
        detail: String,
    },
    #[error("{entry}: no fixtures to label from")]
    NoFixtures { entry: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Catalog(#[from] crate::catalog::CatalogError),
}

pub type Result<T> = std::result::Result<T, AlignError>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    pub solve: SolveOptions,
    pub track: TrackOptions,
    pub degenerate: DegenerateOptions,
}

/// Bijection from critical-point indices to collection members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalMap {
    pub entry_id: String,
    /// `assignment[point] = member index`.
    pub assignment: Vec<usize>,
    /// Member labels, indexed by member.
    pub labels: Vec<String>,
}

impl ExceptionalMap {
    pub fn new(
        entry_id: impl Into<String>,
        assignment: Vec<usize>,
        labels: Vec<String>,
    ) -> Option<Self> {
        Permutation::new(assignment.clone())?;
        (assignment.len() == labels.len()).then(|| Self {
            entry_id: entry_id.into(),
            assignment,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn label_of(&self, point: usize) -> &str {
        &self.labels[self.assignment[point]]
    }

    /// `member -> point`.
    pub fn points(&self) -> Vec<usize> {
        Permutation::new(self.assignment.clone())
            .expect("assignment is a bijection")
            .inverse()
            .mapping()
            .to_vec()
    }

    pub fn point_of(&self, label: &str) -> Option<usize> {
        let m = self.labels.iter().position(|l| l == label)?;
        self.assignment.iter().position(|&a| a == m)
    }

    /// Labels in point order.
    pub fn point_labels(&self) -> Vec<String> {
        (0..self.len())
            .map(|i| self.label_of(i).to_string())
            .collect()
    }

    /// The same map with the labels of two members exchanged.
    pub fn swapped(&self, a: &str, b: &str) -> Self {
        let ia = self
            .labels
            .iter()
            .position(|l| l == a)
            .expect("known label");
        let ib = self
            .labels
            .iter()
            .position(|l| l == b)
            .expect("known label");
        let assignment = self
            .assignment
            .iter()
            .map(|&m| {
                if m == ia {
                    ib
                } else if m == ib {
                    ia
                } else {
                    m
                }
            })
            .collect();
        Self {
            assignment,
            ..self.clone()
        }
    }

    /// Converts a permutation of points into one of members.
    pub fn on_members(&self, p: &Permutation) -> Permutation {
        let points = self.points();
        Permutation::new(
            (0..self.len())
                .map(|m| self.assignment[p.apply(points[m])])
                .collect(),
        )
        .expect("conjugate of a bijection")
    }
}

/// Largest per-coordinate deviation in real or imaginary part.
pub fn fixture_distance(z: &[C64], fixture: &[C64]) -> f64 {
    z.iter()
        .zip(fixture)
        .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
        .fold(0.0, f64::max)
}

/// Matches each computed point to the unique fixture within tolerance.
pub fn label_solutions(entry: &CatalogEntry, cs: &CritSet) -> Result<ExceptionalMap> {
    let mismatch = |reason: String| AlignError::FixtureMismatch {
        entry: entry.id.clone(),
        reason,
    };
    if entry.fixtures.is_empty() {
        return Err(AlignError::NoFixtures {
            entry: entry.id.clone(),
        });
    }
    if cs.len() != entry.collection.len() {
        return Err(mismatch(format!(
            "{} points for {} members",
            cs.len(),
            entry.collection.len()
        )));
    }
    let mut assignment = Vec::with_capacity(cs.len());
    for (i, p) in cs.points.iter().enumerate() {
        let hits: Vec<&crate::catalog::Fixture> = entry
            .fixtures
            .iter()
            .filter(|f| fixture_distance(&p.coords, &f.coords) <= f.tol)
            .collect();
        match hits.as_slice() {
            [f] => assignment.push(
                entry
                    .label_index(&f.label)
                    .expect("fixture labels are members"),
            ),
            [] => {
                return Err(mismatch(format!(
                    "point {i} {:?} matches no fixture",
                    p.coords
                )))
            }
            many => {
                let names: Vec<&str> = many.iter().map(|f| f.label.as_str()).collect();
                return Err(mismatch(format!("point {i} matches fixtures {names:?}")));
            }
        }
    }
    for (i, a) in assignment.iter().enumerate() {
        if assignment[..i].contains(a) {
            return Err(mismatch(format!(
                "two points claim fixture {}",
                entry.collection[*a].label
            )));
        }
    }
    Ok(
        ExceptionalMap::new(entry.id.clone(), assignment, entry.labels())
            .expect("checked bijective"),
    )
}

/// Monodromy of `d` on the entry's potential: composite loop when the entry has a
/// partition, plain phase loop otherwise.
pub fn entry_monodromy(
    entry: &CatalogEntry,
    cs: &CritSet,
    d: &ToricDivisor,
    opts: &TrackOptions,
) -> Result<MonodromyPermutation> {
    Ok(continuation::divisor_monodromy(
        &cs.potential,
        entry.rays(),
        d,
        entry.partition.as_ref(),
        entry.epsilon,
        cs,
        opts,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub clause: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeReport {
    pub entry_id: String,
    pub clauses: Vec<Clause>,
}

fn projective_potential(r: usize) -> laurent::LaurentPoly {
    let mut v: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
        .collect();
    v.push(vec![-1; r]);
    laurent::lg_potential(&FanoPolytope::new(v).expect("simplex is a polytope"))
}

fn scaled_exponents(entry: &CatalogEntry, scale: &[usize]) -> Vec<Vec<i64>> {
    scale.iter().map(|&k| entry.rays()[k].clone()).collect()
}

/// Runs the entry's degeneration and orbit recipes against `map`.
pub fn verify_labeling_recipe(
    entry: &CatalogEntry,
    catalog: &Catalog,
    cs: &CritSet,
    map: &ExceptionalMap,
    opts: &AlignOptions,
) -> Result<RecipeReport> {
    let violation = |clause: &str, detail: String| AlignError::RecipeViolation {
        entry: entry.id.clone(),
        clause: clause.to_string(),
        detail,
    };
    let mut clauses = Vec::new();
    for recipe in &entry.degenerations {
        match recipe {
            Recipe::Blowdown {
                scale,
                limit,
                escape,
            } => {
                let limit_entry = catalog.get(limit)?;
                let limit_cs = solver::solve_all(&limit_entry.potential(), &opts.solve)?;
                let limit_map = label_solutions(limit_entry, &limit_cs)?;
                let result = continuation::degenerate(
                    &cs.potential,
                    &scaled_exponents(entry, scale),
                    cs,
                    Some(&limit_cs),
                    &opts.degenerate,
                )?;
                let clause = format!("degeneration to {limit}");
                let escaped: Vec<String> = result
                    .escaped()
                    .iter()
                    .map(|&i| map.label_of(i).to_string())
                    .collect();
                if escaped != [escape.clone()] {
                    return Err(violation(
                        &clause,
                        format!("escaping labels {escaped:?}, expected [{escape}]"),
                    ));
                }
                for (i, s) in result.statuses.iter().enumerate() {
                    if let DegenerationStatus::Converged {
                        limit_index: Some(k),
                        ..
                    } = s
                    {
                        if limit_map.label_of(*k) != map.label_of(i) {
                            return Err(violation(
                                &clause,
                                format!(
                                    "{} tends to the limit point labelled {}",
                                    map.label_of(i),
                                    limit_map.label_of(*k)
                                ),
                            ));
                        }
                    }
                }
                clauses.push(Clause {
                    clause,
                    detail: format!("{escape} escapes, the other labels agree with {limit}"),
                });
            }
            Recipe::Fiber {
                scale,
                coords,
                digit,
            } => {
                let clause = "fiber degeneration".to_string();
                let result = continuation::degenerate(
                    &cs.potential,
                    &scaled_exponents(entry, scale),
                    cs,
                    None,
                    &opts.degenerate,
                )?;
                if let Some(i) = result.escaped().first() {
                    return Err(violation(&clause, format!("{} escapes", map.label_of(*i))));
                }
                let fiber = solver::solve_all(&projective_potential(coords.len()), &opts.solve)?;
                let mut by_digit: Vec<(u32, usize)> = Vec::new();
                for (i, s) in result.statuses.iter().enumerate() {
                    let z: Vec<C64> = coords.iter().map(|&c| s.endpoint()[c]).collect();
                    let (k, d) = fiber.nearest(&z).expect("fiber set is nonempty");
                    if d > 1e-3 {
                        return Err(violation(
                            &clause,
                            format!("{} ends {d:e} away from the fiber points", map.label_of(i)),
                        ));
                    }
                    let dg = label_digits(map.label_of(i)).expect("validated labels")[*digit];
                    match by_digit.iter().find(|(x, _)| *x == dg) {
                        Some(&(_, k0)) if k0 != k => {
                            return Err(violation(
                                &clause,
                                format!("digit {dg} reaches two fiber points"),
                            ));
                        }
                        Some(_) => {}
                        None => {
                            if by_digit.iter().any(|&(_, k0)| k0 == k) {
                                return Err(violation(
                                    &clause,
                                    format!("two digits reach fiber point {k}"),
                                ));
                            }
                            by_digit.push((dg, k));
                        }
                    }
                }
                clauses.push(Clause {
                    clause,
                    detail: format!(
                        "no escapes; digit {digit} determines the fiber point ({} classes)",
                        by_digit.len()
                    ),
                });
            }
        }
    }
    for orbit in &entry.orbits {
        let clause = format!("orbit loop {}", entry.format_divisor(&orbit.divisor));
        let perm = entry_monodromy(entry, cs, &orbit.divisor, &opts.track)?;
        let m = i64::from(orbit.modulus);
        let mut shift = None;
        for i in 0..cs.len() {
            let a = label_digits(map.label_of(i)).expect("validated labels");
            let b =
                label_digits(map.label_of(perm.permutation.apply(i))).expect("validated labels");
            let others_fixed = a
                .iter()
                .zip(&b)
                .enumerate()
                .all(|(k, (x, y))| k == orbit.digit || x == y);
            let s = (i64::from(b[orbit.digit]) - i64::from(a[orbit.digit])).rem_euclid(m);
            if !others_fixed || shift.is_some_and(|t| t != s) {
                return Err(violation(
                    &clause,
                    format!(
                        "{} -> {}",
                        map.label_of(i),
                        map.label_of(perm.permutation.apply(i))
                    ),
                ));
            }
            shift = Some(s);
        }
        let s = shift.unwrap_or(0);
        if crate::toric::gcd(s, m) != 1 {
            return Err(violation(
                &clause,
                format!("shift {s} does not generate Z/{m}"),
            ));
        }
        clauses.push(Clause {
            clause,
            detail: format!("digit {} shifts by {s} mod {m}", orbit.digit),
        });
    }
    Ok(RecipeReport {
        entry_id: entry.id.clone(),
        clauses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorVerdict {
    pub divisor: String,
    pub mapping: Vec<usize>,
    /// Cycles of the induced permutation of members.
    pub cycles: String,
    pub subquiver_edges: Vec<String>,
    pub contained: bool,
    pub violations: Vec<Violation>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub entry_id: String,
    pub map: ExceptionalMap,
    pub verdicts: Vec<DivisorVerdict>,
    pub passed: bool,
}

/// Containment of every divisor sub-quiver in its monodromy quiver under `map`.
pub fn containment_report(
    entry: &CatalogEntry,
    cs: &CritSet,
    map: &ExceptionalMap,
    opts: &TrackOptions,
) -> AlignmentReport {
    let q = entry.quiver();
    let point_labels = map.point_labels();
    let vertex_map = map.points();
    let verdict = |d: &ToricDivisor| {
        let sub = quiver::divisor_subquiver(&q, d);
        let subquiver_edges = sub
            .edges
            .iter()
            .map(|e| format!("{}->{}", q.vertices[e.source], q.vertices[e.target]))
            .collect();
        match entry_monodromy(entry, cs, d, opts) {
            Ok(perm) => {
                let sup = quiver::monodromy_quiver(&perm, &point_labels);
                let c = quiver::is_contained(&sub, &sup, &vertex_map);
                DivisorVerdict {
                    divisor: entry.format_divisor(d),
                    mapping: perm.mapping().to_vec(),
                    cycles: map
                        .on_members(&perm.permutation)
                        .cycle_string_with(&map.labels),
                    subquiver_edges,
                    contained: c.contained,
                    violations: c.violations,
                    error: None,
                }
            }
            Err(e) => DivisorVerdict {
                divisor: entry.format_divisor(d),
                mapping: Vec::new(),
                cycles: String::new(),
                subquiver_edges,
                contained: false,
                violations: Vec::new(),
                error: Some(format!("monodromy: {e}")),
            },
        }
    };
    let divisors = q.labels();
    let verdicts: Vec<DivisorVerdict> = divisors.par_iter().map(verdict).collect();
    let passed = verdicts.iter().all(|v| v.contained);
    AlignmentReport {
        entry_id: entry.id.clone(),
        map: map.clone(),
        verdicts,
        passed,
    }
}

/// Solve, label, and check containment for every divisor of the entry's quiver.
pub fn check_aligned(entry: &CatalogEntry, opts: &AlignOptions) -> Result<AlignmentReport> {
    let cs = solver::solve_all(&entry.potential(), &opts.solve)?;
    let map = label_solutions(entry, &cs)?;
    Ok(containment_report(entry, &cs, &map, &opts.track))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureVerdict {
    pub divisor: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
    pub error: Option<String>,
}

/// Compares computed permutations of members with the stored cycle notation.
pub fn check_monodromy_fixtures(
    entry: &CatalogEntry,
    cs: &CritSet,
    map: &ExceptionalMap,
    opts: &TrackOptions,
) -> Vec<FixtureVerdict> {
    entry
        .monodromy
        .par_iter()
        .map(|fx| {
            let expected = fx.permutation.cycle_string_with(&map.labels);
            match entry_monodromy(entry, cs, &fx.divisor, opts) {
                Ok(perm) => {
                    let on_members = map.on_members(&perm.permutation);
                    FixtureVerdict {
                        divisor: entry.format_divisor(&fx.divisor),
                        computed: on_members.cycle_string_with(&map.labels),
                        passed: on_members == fx.permutation,
                        expected,
                        error: None,
                    }
                }
                Err(e) => FixtureVerdict {
                    divisor: entry.format_divisor(&fx.divisor),
                    expected,
                    computed: String::new(),
                    passed: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
