//! Predictor-corrector tracking of critical points along coefficient paths.

use std::fmt;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{
    self, CoefficientPath, Factor, LaurentError, LaurentPoly, Partition, Scale, Segment, Support,
    C64,
};
use crate::solver::{self, CritSet, SolveError, SolveOptions};
use crate::toric::ToricDivisor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("step size fell below {min_step:e} on segment {segment} at s = {s}")]
    StepUnderflow {
        segment: usize,
        s: f64,
        min_step: f64,
    },
    #[error("path left the torus on segment {segment} at s = {s}")]
    DivergedPath { segment: usize, s: f64 },
    #[error("start point has residual {residual:e}")]
    BadStart { residual: f64 },
    #[error("path is not closed")]
    OpenLoop,
    #[error("start point {index}: no unambiguous match after refinement (best {best:e}, second {second:e})")]
    AmbiguousMatching {
        index: usize,
        best: f64,
        second: f64,
    },
    #[error("endpoints do not form a bijection (target {target} hit twice)")]
    NotBijective { target: usize },
    #[error("point {index} converged to nothing in the limit set (distance {distance:e})")]
    UnmatchedLimit { index: usize, distance: f64 },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub type Result<T> = std::result::Result<T, TrackError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    pub step_grow: f64,
    pub grow_after: usize,
    pub step_shrink: f64,
    pub match_tol: f64,
    pub ambiguity_ratio: f64,
    pub refinements: usize,
    pub parallel: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.01,
            min_step: 1e-9,
            max_step: 0.05,
            corrector_tol: 1e-10,
            max_corrector_iters: 8,
            step_grow: 1.5,
            grow_after: 3,
            step_shrink: 0.5,
            match_tol: 1e-6,
            ambiguity_ratio: 10.0,
            refinements: 4,
            parallel: true,
        }
    }
}

impl TrackOptions {
    pub fn is_valid(&self) -> bool {
        self.min_step > 0.0
            && self.min_step < self.initial_step
            && self.initial_step <= self.max_step
            && self.corrector_tol > 0.0
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0
            && self.step_grow >= 1.0
    }

    fn with_max_step(&self, max_step: f64) -> Self {
        Self {
            max_step,
            initial_step: self.initial_step.min(max_step),
            ..self.clone()
        }
    }
}

fn norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn term_scale(coeffs: &[C64], mons: &[C64]) -> f64 {
    coeffs
        .iter()
        .zip(mons)
        .map(|(c, m)| (c * m).norm())
        .fold(1.0, f64::max)
}

fn residual(support: &Support, coeffs: &[C64], z: &[C64]) -> f64 {
    let mons = support.monomials(z);
    norm(&support.residual_with(coeffs, &mons)) / term_scale(coeffs, &mons)
}

/// Newton corrector with a contraction requirement; `None` rejects the step.
fn correct(
    support: &Support,
    coeffs: &[C64],
    z0: Vec<C64>,
    opts: &TrackOptions,
) -> Option<Vec<C64>> {
    let mut z = z0;
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_corrector_iters {
        let mons = support.monomials(&z);
        let f = support.residual_with(coeffs, &mons);
        if norm(&f) < opts.corrector_tol * term_scale(coeffs, &mons) {
            return Some(z);
        }
        let j = support.jacobian_with(coeffs, &mons);
        let d = j.lu().solve(&(-f))?;
        let size = norm(&d);
        // The first correction must be small and later ones must contract.
        if size > 0.1 || size > 0.5 * last {
            return None;
        }
        last = size;
        for (x, dx) in z.iter_mut().zip(d.iter()) {
            *x *= dx.exp();
        }
    }
    let mons = support.monomials(&z);
    (norm(&support.residual_with(coeffs, &mons)) < opts.corrector_tol * term_scale(coeffs, &mons))
        .then_some(z)
}

enum Bounds {
    Torus,
    Escape { lo: f64, hi: f64 },
}

enum Outcome {
    Reached(Vec<C64>),
    Escaped { z: Vec<C64>, s: f64 },
}

fn run(path: &CoefficientPath, z0: &[C64], opts: &TrackOptions, bounds: Bounds) -> Result<Outcome> {
    let support = path.support();
    let start = path.start_coeffs();
    let r = residual(&support, &start, z0);
    if !(r < 1e-8) {
        return Err(TrackError::BadStart { residual: r });
    }
    let mut z = correct(&support, &start, z0.to_vec(), opts).unwrap_or_else(|| z0.to_vec());
    for seg in 0..path.segments.len() {
        let mut s = 0.0;
        let mut h = opts.initial_step;
        let mut streak = 0;
        while s < 1.0 {
            h = h.min(opts.max_step).min(1.0 - s);
            let coeffs = path.coeffs(seg, s);
            let mons = support.monomials(&z);
            let j = support.jacobian_with(&coeffs, &mons);
            let ds = support.residual_with(&path.dcoeffs(seg, s), &mons);
            let tangent = j.lu().solve(&(-ds));
            let s_next = if 1.0 - (s + h) < 1e-14 { 1.0 } else { s + h };
            let accepted = tangent.and_then(|t| {
                let pred: Vec<C64> = z
                    .iter()
                    .zip(t.iter())
                    .map(|(x, dx)| x * (dx * (s_next - s)).exp())
                    .collect();
                correct(&support, &path.coeffs(seg, s_next), pred, opts)
            });
            match accepted {
                Some(next) => {
                    z = next;
                    s = s_next;
                    streak += 1;
                    if streak >= opts.grow_after {
                        h *= opts.step_grow;
                        streak = 0;
                    }
                    match bounds {
                        Bounds::Torus if !solver::in_torus(&z) => {
                            return Err(TrackError::DivergedPath { segment: seg, s });
                        }
                        Bounds::Escape { lo, hi }
                            if z.iter().any(|x| !(lo..=hi).contains(&x.norm())) =>
                        {
                            return Ok(Outcome::Escaped { z, s });
                        }
                        _ => {}
                    }
                }
                None => {
                    h *= opts.step_shrink;
                    streak = 0;
                    if h < opts.min_step {
                        return Err(TrackError::StepUnderflow {
                            segment: seg,
                            s,
                            min_step: opts.min_step,
                        });
                    }
                }
            }
        }
    }
    Ok(Outcome::Reached(z))
}

/// Continues a critical point of the path's start system to its end system.
pub fn track(path: &CoefficientPath, z0: &[C64], opts: &TrackOptions) -> Result<Vec<C64>> {
    match run(path, z0, opts, Bounds::Torus)? {
        Outcome::Reached(z) => Ok(z),
        Outcome::Escaped { .. } => unreachable!("torus bounds never report escape"),
    }
}

/// Bookkeeping for how a loop was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub epsilon: f64,
    pub partition: Option<Partition>,
}

/// Bijection `i -> mapping[i]` on the point indices of a critical set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; mapping.len()];
        for &t in &mapping {
            if t >= mapping.len() || std::mem::replace(&mut seen[t], true) {
                return None;
            }
        }
        Some(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &t)| i == t)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &t) in self.mapping.iter().enumerate() {
            inv[t] = i;
        }
        Self { mapping: inv }
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self {
            mapping: self.mapping.iter().map(|&t| other.mapping[t]).collect(),
        }
    }

    /// Cycles starting at their smallest element, ordered by that element. Fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for i in 0..self.len() {
            if seen[i] {
                continue;
            }
            let mut cycle = vec![i];
            seen[i] = true;
            let mut j = self.mapping[i];
            while j != i {
                seen[j] = true;
                cycle.push(j);
                j = self.mapping[j];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn cycle_string_with(&self, labels: &[String]) -> String {
        self.cycles()
            .iter()
            .map(|c| {
                format!(
                    "({})",
                    c.iter()
                        .map(|&i| labels[i].as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                )
            })
            .collect()
    }

    /// Parses cycle notation over `labels`; unmentioned labels are fixed.
    pub fn from_cycles(text: &str, labels: &[String]) -> std::result::Result<Self, String> {
        let mut mapping: Vec<Option<usize>> = vec![None; labels.len()];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| format!("expected '(' in {text:?}"))?;
            let close = open
                .find(')')
                .ok_or_else(|| format!("unclosed cycle in {text:?}"))?;
            let idx: Vec<usize> = open[..close]
                .split_whitespace()
                .map(|l| {
                    labels
                        .iter()
                        .position(|x| x == l)
                        .ok_or_else(|| format!("unknown label {l:?}"))
                })
                .collect::<std::result::Result<_, _>>()?;
            for (k, &i) in idx.iter().enumerate() {
                if mapping[i].replace(idx[(k + 1) % idx.len()]).is_some() {
                    return Err(format!("label {:?} appears twice", labels[i]));
                }
            }
            rest = open[close + 1..].trim_start();
        }
        let mapping = mapping
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.unwrap_or(i))
            .collect();
        Self::new(mapping).ok_or_else(|| format!("{text:?} is not a permutation"))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..self.len()).map(|i| i.to_string()).collect();
        f.write_str(&self.cycle_string_with(&labels))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyPermutation {
    pub divisor: Option<ToricDivisor>,
    pub permutation: Permutation,
    pub meta: PathMeta,
}

impl MonodromyPermutation {
    pub fn mapping(&self) -> &[usize] {
        self.permutation.mapping()
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        self.permutation.cycles()
    }

    pub fn inverse(&self) -> Self {
        Self {
            permutation: self.permutation.inverse(),
            ..self.clone()
        }
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            permutation: self.permutation.then(&other.permutation),
            divisor: None,
            meta: self.meta.clone(),
        }
    }
}

fn tracked_ends(
    path: &CoefficientPath,
    cs: &CritSet,
    opts: &TrackOptions,
) -> Result<Vec<Vec<C64>>> {
    let one = |p: &solver::CritPoint| track(path, &p.coords, opts);
    if opts.parallel {
        cs.points.par_iter().map(one).collect()
    } else {
        cs.points.iter().map(one).collect()
    }
}

enum Matching {
    Done(Vec<usize>),
    Retry(TrackError),
}

fn match_ends(
    ends: &[Vec<C64>],
    cs: &CritSet,
    support: &Support,
    coeffs: &[C64],
    opts: &TrackOptions,
) -> Matching {
    let mut mapping = Vec::with_capacity(ends.len());
    for (index, end) in ends.iter().enumerate() {
        let end = solver::polish_on(support, coeffs, end, 1e-12).unwrap_or_else(|| end.clone());
        let mut d: Vec<(usize, f64)> = cs
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, solver::distance(&p.coords, &end)))
            .collect();
        d.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = d[0].1;
        let second = d.get(1).map_or(f64::INFINITY, |x| x.1);
        if !(best < opts.match_tol) || second <= opts.ambiguity_ratio * best {
            return Matching::Retry(TrackError::AmbiguousMatching {
                index,
                best,
                second,
            });
        }
        mapping.push(d[0].0);
    }
    Matching::Done(mapping)
}

/// Permutation of `cs` obtained by continuing each point once around `path`.
pub fn loop_permutation(
    f: &LaurentPoly,
    path: &CoefficientPath,
    cs: &CritSet,
    opts: &TrackOptions,
) -> Result<Permutation> {
    if !path.is_closed() || path.start_coeffs() != f.coefficients() {
        return Err(TrackError::OpenLoop);
    }
    let support = path.support();
    let coeffs = f.coefficients();
    let mut last = None;
    for r in 0..=opts.refinements {
        let o = opts.with_max_step(opts.max_step / f64::powi(2.0, r as i32));
        let ends = tracked_ends(path, cs, &o)?;
        match match_ends(&ends, cs, &support, &coeffs, &o) {
            Matching::Done(mapping) => {
                let mut seen = vec![false; mapping.len()];
                for &t in &mapping {
                    if std::mem::replace(&mut seen[t], true) {
                        last = Some(TrackError::NotBijective { target: t });
                    }
                }
                if let Some(p) = Permutation::new(mapping) {
                    return Ok(p);
                }
            }
            Matching::Retry(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Monodromy of the loop attached to `d`: the plain phase loop, or the composite
/// loop through the partially scaled family when a partition is given.
pub fn divisor_monodromy(
    f: &LaurentPoly,
    rays: &[Vec<i64>],
    d: &ToricDivisor,
    partition: Option<&Partition>,
    epsilon: f64,
    cs: &CritSet,
    opts: &TrackOptions,
) -> Result<MonodromyPermutation> {
    let path = match partition {
        Some(p) => laurent::composite_loop(f, rays, d, p, epsilon)?,
        None => laurent::gamma_loop(f, rays, d)?,
    };
    let permutation = loop_permutation(f, &path, cs, opts)?;
    Ok(MonodromyPermutation {
        divisor: Some(d.clone()),
        permutation,
        meta: PathMeta {
            epsilon: if partition.is_some() { epsilon } else { 1.0 },
            partition: partition.cloned(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateOptions {
    pub delta: f64,
    pub escape_lo: f64,
    pub escape_hi: f64,
    pub track: TrackOptions,
}

impl Default for DegenerateOptions {
    fn default() -> Self {
        Self {
            delta: 1e-6,
            escape_lo: 1e-4,
            escape_hi: 1e4,
            track: TrackOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DegenerationStatus {
    /// Stayed in the box; `limit_index` is set when a limit set was matched.
    Converged {
        endpoint: Vec<C64>,
        limit_index: Option<usize>,
    },
    /// Left the box; `direction[i]` is +1 towards infinity, -1 towards zero, 0 otherwise.
    Escaped {
        endpoint: Vec<C64>,
        direction: Vec<i8>,
        t: f64,
    },
}

impl DegenerationStatus {
    pub fn is_escaped(&self) -> bool {
        matches!(self, Self::Escaped { .. })
    }

    pub fn endpoint(&self) -> &[C64] {
        match self {
            Self::Converged { endpoint, .. } | Self::Escaped { endpoint, .. } => endpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerationResult {
    pub statuses: Vec<DegenerationStatus>,
    pub t_end: f64,
}

impl DegenerationResult {
    pub fn escaped(&self) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_escaped())
            .map(|(i, _)| i)
            .collect()
    }
}

/// The family with the coefficients of `scaled` ramped from 1 down to `delta`.
pub fn degeneration_path(
    f: &LaurentPoly,
    scaled: &[Vec<i64>],
    delta: f64,
) -> Result<CoefficientPath> {
    let mut factors = vec![Factor::ONE; f.len()];
    for e in scaled {
        let t = f
            .terms()
            .position(|(x, _)| x == e)
            .ok_or(LaurentError::MissingMonomial { ray: e.clone() })?;
        factors[t].scale = Scale::Ramp {
            from: 1.0,
            to: delta,
        };
    }
    Ok(CoefficientPath {
        base: f.clone(),
        segments: vec![Segment { factors }],
    })
}

/// `f` with the `scaled` terms removed.
pub fn limit_potential(f: &LaurentPoly, scaled: &[Vec<i64>]) -> LaurentPoly {
    LaurentPoly::from_terms(
        f.dim(),
        f.terms()
            .filter(|(e, _)| !scaled.contains(e))
            .map(|(e, c)| (e.clone(), *c)),
    )
    .expect("terms of f share its dimension")
}

/// Tracks every point of `cs` while the `scaled` coefficients tend to zero.
/// Converging points are matched against `limit` after Newton polishing on the limit system.
pub fn degenerate(
    f: &LaurentPoly,
    scaled: &[Vec<i64>],
    cs: &CritSet,
    limit: Option<&CritSet>,
    opts: &DegenerateOptions,
) -> Result<DegenerationResult> {
    let path = degeneration_path(f, scaled, opts.delta)?;
    let one = |p: &solver::CritPoint| {
        run(
            &path,
            &p.coords,
            &opts.track,
            Bounds::Escape {
                lo: opts.escape_lo,
                hi: opts.escape_hi,
            },
        )
    };
    let outcomes: Vec<Outcome> = if opts.track.parallel {
        cs.points.par_iter().map(one).collect::<Result<_>>()?
    } else {
        cs.points.iter().map(one).collect::<Result<_>>()?
    };
    let reduced = limit_potential(f, scaled);
    let (lsupport, lcoeffs) = (Support::of(&reduced), reduced.coefficients());
    let mut statuses = Vec::with_capacity(outcomes.len());
    for (index, o) in outcomes.into_iter().enumerate() {
        statuses.push(match o {
            Outcome::Escaped { z, s, .. } => DegenerationStatus::Escaped {
                direction: z
                    .iter()
                    .map(|x| {
                        if x.norm() > opts.escape_hi {
                            1
                        } else if x.norm() < opts.escape_lo {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect(),
                endpoint: z,
                t: s,
            },
            Outcome::Reached(z) => {
                let limit_index = match limit {
                    None => None,
                    Some(l) => {
                        let polished = solver::polish_on(&lsupport, &lcoeffs, &z, 1e-12);
                        let hit = polished.as_ref().and_then(|p| l.nearest(p));
                        match hit {
                            Some((k, d)) if d < 1e-6 => Some(k),
                            _ => {
                                let distance = l.nearest(&z).map_or(f64::INFINITY, |x| x.1);
                                return Err(TrackError::UnmatchedLimit { index, distance });
                            }
                        }
                    }
                };
                DegenerationStatus::Converged {
                    endpoint: z,
                    limit_index,
                }
            }
        });
    }
    Ok(DegenerationResult {
        statuses,
        t_end: 1.0 - opts.delta,
    })
}

/// Solves the limit system obtained by dropping the `scaled` terms.
pub fn limit_set(f: &LaurentPoly, scaled: &[Vec<i64>], opts: &SolveOptions) -> Result<CritSet> {
    Ok(solver::solve_all(&limit_potential(f, scaled), opts)?)
}
