//! Critical points of Landau-Ginzburg potentials by seeded multistart Newton iteration.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{self, TrackOptions};
use crate::laurent::{self, LGSystem, LaurentError, LaurentPoly, Support, C64};
use crate::toric::{self, ToricError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("Newton iteration diverged after {iterations} steps")]
    Diverged { iterations: usize },
    #[error("singular Jacobian in Newton step")]
    SingularJacobian,
    #[error("found {found} of {expected} critical points")]
    IncompleteSolve { found: usize, expected: usize },
    #[error("found {found} distinct critical points, expected {expected}")]
    ExcessSolutions { found: usize, expected: usize },
    #[error("critical point {index} is degenerate (smallest singular value {min_singular:e})")]
    NonReduced { index: usize, min_singular: f64 },
    #[error("no critical point with all coordinates real and positive")]
    NoPositivePoint,
    #[error("{count} critical points have all coordinates real and positive")]
    MultiplePositivePoints { count: usize },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Toric(#[from] ToricError),
}

pub type Result<T> = std::result::Result<T, SolveError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol_residual: f64,
    pub tol_dedupe: f64,
    pub tol_reduced: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub max_batches: usize,
    pub patience: usize,
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_residual: 1e-10,
            tol_dedupe: 1e-6,
            tol_reduced: 1e-8,
            max_iter: 50,
            seed: 7,
            batch_size: 200,
            max_batches: 100,
            patience: 3,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritPoint {
    pub coords: Vec<C64>,
    pub residual: f64,
    pub min_singular: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CritSet {
    pub points: Vec<CritPoint>,
    pub potential: LaurentPoly,
}

impl CritSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coords(&self) -> Vec<Vec<C64>> {
        self.points.iter().map(|p| p.coords.clone()).collect()
    }

    /// Index of the point nearest to `z` in max-norm, with its distance.
    pub fn nearest(&self, z: &[C64]) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, distance(&p.coords, z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Residual vector and logarithmic Jacobian of a square system.
pub(crate) trait System {
    fn eval(&self, z: &[C64]) -> (DVector<C64>, DMatrix<C64>);
}

impl System for LGSystem {
    fn eval(&self, z: &[C64]) -> (DVector<C64>, DMatrix<C64>) {
        let f = laurent::eval_system(self, z).expect("Newton keeps coordinates nonzero");
        let j = laurent::jacobian(self, z).expect("Newton keeps coordinates nonzero");
        (f, j)
    }
}

pub(crate) struct Instance<'a> {
    pub support: &'a Support,
    pub coeffs: &'a [C64],
}

impl System for Instance<'_> {
    fn eval(&self, z: &[C64]) -> (DVector<C64>, DMatrix<C64>) {
        let mons = self.support.monomials(z);
        (
            self.support.residual_with(self.coeffs, &mons),
            self.support.jacobian_with(self.coeffs, &mons),
        )
    }
}

pub(crate) fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub(crate) const COORD_LO: f64 = 1e-8;
pub(crate) const COORD_HI: f64 = 1e8;

pub(crate) fn in_torus(z: &[C64]) -> bool {
    z.iter().all(|x| {
        let r = x.norm();
        r.is_finite() && (COORD_LO..=COORD_HI).contains(&r)
    })
}

/// Newton in logarithmic coordinates: `z <- z * exp(d)` with `J d = -F`.
pub(crate) fn newton<S: System>(
    sys: &S,
    z0: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<C64>, f64)> {
    let mut z = z0.to_vec();
    let mut prev = f64::INFINITY;
    let mut stalled = 0;
    for it in 0..=max_iter {
        let (f, j) = sys.eval(&z);
        let r = max_abs(&f);
        if !r.is_finite() {
            return Err(SolveError::Diverged { iterations: it });
        }
        if r < tol {
            return Ok((z, r));
        }
        if it == max_iter {
            break;
        }
        stalled = if r >= prev { stalled + 1 } else { 0 };
        if stalled >= 5 {
            return Err(SolveError::Diverged { iterations: it });
        }
        prev = r;
        let d = j.lu().solve(&(-f)).ok_or(SolveError::SingularJacobian)?;
        for (x, dx) in z.iter_mut().zip(d.iter()) {
            *x *= dx.exp();
        }
        if !in_torus(&z) {
            return Err(SolveError::Diverged { iterations: it + 1 });
        }
    }
    Err(SolveError::Diverged {
        iterations: max_iter,
    })
}

pub(crate) fn min_singular(j: &DMatrix<C64>) -> f64 {
    j.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn finish(sys: &LGSystem, z: Vec<C64>) -> CritPoint {
    // A few extra steps past the acceptance tolerance; keep the input if they stall.
    let z = newton(sys, &z, 1e-14, 3).map_or(z, |(p, _)| p);
    let (f, j) = sys.eval(&z);
    CritPoint {
        residual: max_abs(&f),
        min_singular: min_singular(&j),
        coords: z,
    }
}

pub fn newton_refine(sys: &LGSystem, z0: &[C64], opts: &SolveOptions) -> Result<CritPoint> {
    if let Some(index) = z0.iter().position(|x| x.norm() == 0.0) {
        return Err(LaurentError::ZeroCoordinate { index }.into());
    }
    let (z, _) = newton(sys, z0, opts.tol_residual, opts.max_iter)?;
    Ok(finish(sys, z))
}

/// Number of facets of the Newton polytope, the expected number of critical points.
pub fn expected_count(f: &LaurentPoly) -> Result<usize> {
    Ok(toric::hull_facets(&f.exponents(), f.dim())?.len())
}

fn batch_starts(opts: &SolveOptions, batch: usize, dim: usize) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(batch as u64);
    (0..opts.batch_size)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let r = rng.gen_range(-2.0f64..2.0).exp();
                    C64::from_polar(r, rng.gen_range(0.0..TAU))
                })
                .collect()
        })
        .collect()
}

fn sort_key(p: &CritPoint) -> Vec<(i64, i64)> {
    p.coords
        .iter()
        .map(|c| ((c.re * 1e6).round() as i64, (c.im * 1e6).round() as i64))
        .collect()
}

fn absorb(held: &mut Vec<Vec<C64>>, z: Vec<C64>, tol: f64) -> bool {
    if held.iter().any(|h| distance(h, &z) < tol) {
        return false;
    }
    held.push(z);
    true
}

/// Tracks the known points around phase loops of single coefficients and
/// keeps any endpoint that is new.
fn monodromy_population(
    f: &LaurentPoly,
    held: &mut Vec<Vec<C64>>,
    expected: usize,
    opts: &SolveOptions,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(u64::MAX);
    let topts = TrackOptions::default();
    let exps = f.exponents();
    for _ in 0..20 * exps.len() {
        if held.len() >= expected {
            return;
        }
        let winding = if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut d = vec![0; exps.len()];
        d[rng.gen_range(0..exps.len())] = winding;
        let Ok(path) = laurent::gamma_loop(f, &exps, &toric::ToricDivisor(d)) else {
            return;
        };
        let starts = held.clone();
        for z in starts {
            if let Ok(end) = continuation::track(&path, &z, &topts) {
                absorb(held, end, opts.tol_dedupe);
            }
        }
    }
}

pub fn solve_all(f: &LaurentPoly, opts: &SolveOptions) -> Result<CritSet> {
    let expected = expected_count(f)?;
    let sys = laurent::lg_system(f);
    let support = Support::of(f);
    let coeffs = f.coefficients();
    let inst = Instance {
        support: &support,
        coeffs: &coeffs,
    };
    let refine = |z: &Vec<C64>| {
        newton(&inst, z, opts.tol_residual, opts.max_iter)
            .ok()
            .map(|(z, _)| z)
    };

    let mut held: Vec<Vec<C64>> = Vec::new();
    let mut quiet = 0;
    for batch in 0..opts.max_batches {
        let starts = batch_starts(opts, batch, f.dim());
        let ends: Vec<Option<Vec<C64>>> = if opts.parallel {
            starts.par_iter().map(refine).collect()
        } else {
            starts.iter().map(refine).collect()
        };
        let before = held.len();
        for z in ends.into_iter().flatten() {
            absorb(&mut held, z, opts.tol_dedupe);
        }
        if held.len() >= expected {
            quiet = if held.len() == before { quiet + 1 } else { 0 };
            if quiet >= opts.patience {
                break;
            }
        }
    }
    if held.len() < expected {
        monodromy_population(f, &mut held, expected, opts);
    }
    if held.len() < expected {
        return Err(SolveError::IncompleteSolve {
            found: held.len(),
            expected,
        });
    }
    if held.len() > expected {
        return Err(SolveError::ExcessSolutions {
            found: held.len(),
            expected,
        });
    }
    let mut points: Vec<CritPoint> = held.into_iter().map(|z| finish(&sys, z)).collect();
    points.sort_by_key(sort_key);
    if let Some((index, p)) = points
        .iter()
        .enumerate()
        .find(|(_, p)| p.min_singular <= opts.tol_reduced)
    {
        return Err(SolveError::NonReduced {
            index,
            min_singular: p.min_singular,
        });
    }
    Ok(CritSet {
        points,
        potential: f.clone(),
    })
}

pub fn is_reduced_with(cs: &CritSet, opts: &SolveOptions) -> bool {
    let Ok(expected) = expected_count(&cs.potential) else {
        return false;
    };
    let distinct = cs.points.iter().enumerate().all(|(i, p)| {
        cs.points[..i]
            .iter()
            .all(|q| distance(&p.coords, &q.coords) > opts.tol_dedupe)
    });
    distinct && cs.len() == expected && cs.points.iter().all(|p| p.min_singular > opts.tol_reduced)
}

pub fn is_reduced(cs: &CritSet) -> bool {
    is_reduced_with(cs, &SolveOptions::default())
}

pub fn positive_point(cs: &CritSet) -> Result<&CritPoint> {
    let hits: Vec<&CritPoint> = cs
        .points
        .iter()
        .filter(|p| p.coords.iter().all(|c| c.im.abs() < 1e-8 && c.re > 0.0))
        .collect();
    match hits.len() {
        0 => Err(SolveError::NoPositivePoint),
        1 => Ok(hits[0]),
        count => Err(SolveError::MultiplePositivePoints { count }),
    }
}

/// Newton polish against an explicit coefficient vector.
pub(crate) fn polish_on(
    support: &Support,
    coeffs: &[C64],
    z: &[C64],
    tol: f64,
) -> Option<Vec<C64>> {
    newton(&Instance { support, coeffs }, z, tol, 50)
        .ok()
        .map(|(z, _)| z)
}
