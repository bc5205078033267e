//! Sparse Laurent polynomials, Landau-Ginzburg systems and coefficient paths.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::toric::{FanoPolytope, ToricDivisor};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaurentError {
    #[error("coordinate {index} is zero")]
    ZeroCoordinate { index: usize },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no monomial for ray {ray:?}")]
    MissingMonomial { ray: Vec<i64> },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
}

pub type Result<T> = std::result::Result<T, LaurentError>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaurentPoly {
    dim: usize,
    terms: BTreeMap<Vec<i64>, C64>,
}

fn monomial(exp: &[i64], z: &[C64]) -> C64 {
    exp.iter()
        .zip(z)
        .fold(C64::new(1.0, 0.0), |acc, (&e, &x)| acc * x.powi(e as i32))
}

fn check_point(dim: usize, z: &[C64]) -> Result<()> {
    if z.len() != dim {
        return Err(LaurentError::DimensionMismatch {
            expected: dim,
            got: z.len(),
        });
    }
    match z.iter().position(|x| x.norm() == 0.0) {
        Some(index) => Err(LaurentError::ZeroCoordinate { index }),
        None => Ok(()),
    }
}

impl LaurentPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Sums repeated exponents and drops zero coefficients.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Vec<i64>, C64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            p.add_term(e, c)?;
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: C64) -> Result<()> {
        if exp.len() != self.dim {
            return Err(LaurentError::DimensionMismatch {
                expected: self.dim,
                got: exp.len(),
            });
        }
        let entry = self.terms.entry(exp).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != C64::new(0.0, 0.0));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &[i64]) -> C64 {
        self.terms.get(exp).copied().unwrap_or_default()
    }

    pub fn exponents(&self) -> Vec<Vec<i64>> {
        self.terms.keys().cloned().collect()
    }

    pub fn coefficients(&self) -> Vec<C64> {
        self.terms.values().copied().collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::from_terms(
            self.dim,
            self.terms()
                .chain(other.terms())
                .map(|(e, c)| (e.clone(), *c)),
        )
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        check_point(self.dim, z)?;
        Ok(self.terms.iter().map(|(e, c)| c * monomial(e, z)).sum())
    }

    /// `z_i d/dz_i` applied to the polynomial.
    pub fn log_derivative(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e[i] != 0)
            .map(|(e, c)| (e.clone(), c * e[i] as f64))
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("term list serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    exponents: Vec<i64>,
    re: f64,
    im: f64,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let recs: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(e, c)| TermRecord {
                exponents: e.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        recs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let recs = Vec::<TermRecord>::deserialize(d)?;
        let dim = recs.first().map_or(0, |r| r.exponents.len());
        Self::from_terms(
            dim,
            recs.into_iter()
                .map(|r| (r.exponents, C64::new(r.re, r.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Sum of `z^n` over the vertices `n` of the polytope.
pub fn lg_potential(p: &FanoPolytope) -> LaurentPoly {
    LaurentPoly::from_terms(
        p.dim(),
        p.vertices().iter().map(|v| (v.clone(), C64::new(1.0, 0.0))),
    )
    .expect("vertices share the lattice dimension")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LGSystem {
    pub dim: usize,
    pub equations: Vec<LaurentPoly>,
    pub source: LaurentPoly,
}

pub fn lg_system(f: &LaurentPoly) -> LGSystem {
    LGSystem {
        dim: f.dim(),
        equations: (0..f.dim()).map(|i| f.log_derivative(i)).collect(),
        source: f.clone(),
    }
}

pub fn eval_system(sys: &LGSystem, z: &[C64]) -> Result<DVector<C64>> {
    check_point(sys.dim, z)?;
    let vals: Result<Vec<C64>> = sys.equations.iter().map(|eq| eq.eval(z)).collect();
    Ok(DVector::from_vec(vals?))
}

/// `J_ij = (z_j d/dz_j)(equation_i)` at `z`.
pub fn jacobian(sys: &LGSystem, z: &[C64]) -> Result<DMatrix<C64>> {
    check_point(sys.dim, z)?;
    let n = sys.dim;
    let mut j = DMatrix::zeros(n, n);
    for (i, eq) in sys.equations.iter().enumerate() {
        for (e, c) in eq.terms() {
            let v = c * monomial(e, z);
            for k in 0..n {
                j[(i, k)] += v * e[k] as f64;
            }
        }
    }
    Ok(j)
}

/// Exponents of a potential; its LG system is evaluated for any coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    dim: usize,
    exponents: Vec<Vec<i64>>,
}

impl Support {
    pub fn new(dim: usize, exponents: Vec<Vec<i64>>) -> Self {
        Self { dim, exponents }
    }

    pub fn of(f: &LaurentPoly) -> Self {
        Self::new(f.dim(), f.exponents())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponents(&self) -> &[Vec<i64>] {
        &self.exponents
    }

    pub fn monomials(&self, z: &[C64]) -> Vec<C64> {
        self.exponents.iter().map(|e| monomial(e, z)).collect()
    }

    /// `F_i = sum_r e_ri c_r z^{e_r}`, contracted against arbitrary weights `c`.
    pub fn residual_with(&self, weights: &[C64], mons: &[C64]) -> DVector<C64> {
        let mut f = DVector::zeros(self.dim);
        for ((e, w), m) in self.exponents.iter().zip(weights).zip(mons) {
            let v = w * m;
            for i in 0..self.dim {
                f[i] += v * e[i] as f64;
            }
        }
        f
    }

    pub fn jacobian_with(&self, coeffs: &[C64], mons: &[C64]) -> DMatrix<C64> {
        let mut j = DMatrix::zeros(self.dim, self.dim);
        for ((e, c), m) in self.exponents.iter().zip(coeffs).zip(mons) {
            let v = c * m;
            for a in 0..self.dim {
                if e[a] == 0 {
                    continue;
                }
                for b in 0..self.dim {
                    j[(a, b)] += v * (e[a] * e[b]) as f64;
                }
            }
        }
        j
    }

    pub fn potential(&self, coeffs: &[C64]) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.dim,
            self.exponents.iter().cloned().zip(coeffs.iter().copied()),
        )
        .expect("support exponents share the dimension")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Scale {
    Const(f64),
    /// Linear interpolation from `from` at s=0 to `to` at s=1.
    Ramp {
        from: f64,
        to: f64,
    },
}

impl Scale {
    fn value(&self, s: f64) -> f64 {
        match *self {
            Scale::Const(c) => c,
            Scale::Ramp { from, to } => from + (to - from) * s,
        }
    }

    fn derivative(&self) -> f64 {
        match *self {
            Scale::Const(_) => 0.0,
            Scale::Ramp { from, to } => to - from,
        }
    }

    fn reversed(&self) -> Self {
        match *self {
            Scale::Const(c) => Scale::Const(c),
            Scale::Ramp { from, to } => Scale::Ramp { from: to, to: from },
        }
    }
}

/// Multiplier `scale(s) * exp(2 pi i winding s)` applied to one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factor {
    pub scale: Scale,
    pub winding: i64,
}

impl Factor {
    pub const ONE: Factor = Factor {
        scale: Scale::Const(1.0),
        winding: 0,
    };

    fn phase(&self, s: f64) -> C64 {
        // Reduce before exponentiating so that integer windings close exactly at s = 1.
        let frac = (self.winding as f64 * s).rem_euclid(1.0);
        C64::from_polar(1.0, TAU * frac)
    }

    pub fn value(&self, s: f64) -> C64 {
        self.phase(s) * self.scale.value(s)
    }

    pub fn derivative(&self, s: f64) -> C64 {
        let p = self.phase(s);
        p * self.scale.derivative()
            + p * C64::new(0.0, TAU * self.winding as f64) * self.scale.value(s)
    }

    fn reversed(&self) -> Self {
        Factor {
            scale: self.scale.reversed(),
            winding: -self.winding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub factors: Vec<Factor>,
}

/// Piecewise family of coefficient vectors; each segment runs over s in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath {
    pub base: LaurentPoly,
    pub segments: Vec<Segment>,
}

impl CoefficientPath {
    pub fn constant(f: &LaurentPoly) -> Self {
        Self {
            base: f.clone(),
            segments: vec![Segment {
                factors: vec![Factor::ONE; f.len()],
            }],
        }
    }

    pub fn support(&self) -> Support {
        Support::of(&self.base)
    }

    pub fn coeffs(&self, segment: usize, s: f64) -> Vec<C64> {
        self.base
            .coefficients()
            .iter()
            .zip(&self.segments[segment].factors)
            .map(|(c, f)| c * f.value(s))
            .collect()
    }

    pub fn dcoeffs(&self, segment: usize, s: f64) -> Vec<C64> {
        self.base
            .coefficients()
            .iter()
            .zip(&self.segments[segment].factors)
            .map(|(c, f)| c * f.derivative(s))
            .collect()
    }

    pub fn start_coeffs(&self) -> Vec<C64> {
        self.coeffs(0, 0.0)
    }

    pub fn end_coeffs(&self) -> Vec<C64> {
        self.coeffs(self.segments.len() - 1, 1.0)
    }

    pub fn is_closed(&self) -> bool {
        self.start_coeffs() == self.end_coeffs()
    }

    pub fn reversed(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|seg| Segment {
                factors: seg.factors.iter().map(Factor::reversed).collect(),
            })
            .collect();
        Self {
            base: self.base.clone(),
            segments,
        }
    }

    /// Traverses `self` and then `other`; both must share the base polynomial.
    pub fn then(&self, other: &Self) -> Self {
        assert_eq!(self.base, other.base, "paths must share a base polynomial");
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Self {
            base: self.base.clone(),
            segments,
        }
    }

    pub fn repeated(&self, times: usize) -> Self {
        let mut segments = Vec::new();
        for _ in 0..times {
            segments.extend(self.segments.iter().cloned());
        }
        Self {
            base: self.base.clone(),
            segments,
        }
    }
}

fn term_index(f: &LaurentPoly, ray: &[i64]) -> Result<usize> {
    f.terms()
        .position(|(e, _)| e.as_slice() == ray)
        .ok_or_else(|| LaurentError::MissingMonomial { ray: ray.to_vec() })
}

/// Rotates the coefficient of `z^{n_F}` by `exp(2 pi i a_F s)`.
pub fn gamma_loop(f: &LaurentPoly, rays: &[Vec<i64>], d: &ToricDivisor) -> Result<CoefficientPath> {
    let mut factors = vec![Factor::ONE; f.len()];
    for (ray, &a) in rays.iter().zip(d.coeffs()) {
        if a != 0 {
            factors[term_index(f, ray)?].winding = a;
        }
    }
    Ok(CoefficientPath {
        base: f.clone(),
        segments: vec![Segment { factors }],
    })
}

/// Split of the rays into base and fiber directions of a projective bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub base: Vec<usize>,
    pub fiber: Vec<usize>,
}

impl Partition {
    pub fn validate(&self, num_rays: usize) -> Result<()> {
        let mut seen = vec![false; num_rays];
        for &i in self.base.iter().chain(&self.fiber) {
            if i >= num_rays {
                return Err(LaurentError::BadPartition(format!(
                    "ray index {i} out of range"
                )));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(LaurentError::BadPartition(format!(
                    "ray index {i} used twice"
                )));
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(LaurentError::BadPartition(format!("ray index {i} missing")));
        }
        Ok(())
    }
}

/// Ramp the base coefficients to `eps`, run the phase loop, ramp back.
pub fn composite_loop(
    f: &LaurentPoly,
    rays: &[Vec<i64>],
    d: &ToricDivisor,
    partition: &Partition,
    eps: f64,
) -> Result<CoefficientPath> {
    partition.validate(rays.len())?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(LaurentError::BadEpsilon(eps));
    }
    let gamma = gamma_loop(f, rays, d)?;
    if eps == 1.0 {
        return Ok(gamma);
    }
    let base_terms: Vec<usize> = partition
        .base
        .iter()
        .map(|&i| term_index(f, &rays[i]))
        .collect::<Result<_>>()?;
    let with_scale = |scale: Scale, winding: bool| Segment {
        factors: (0..f.len())
            .map(|t| Factor {
                scale: if base_terms.contains(&t) {
                    scale
                } else {
                    Scale::Const(1.0)
                },
                winding: if winding {
                    gamma.segments[0].factors[t].winding
                } else {
                    0
                },
            })
            .collect(),
    };
    Ok(CoefficientPath {
        base: f.clone(),
        segments: vec![
            with_scale(Scale::Ramp { from: 1.0, to: eps }, false),
            with_scale(Scale::Const(eps), true),
            with_scale(Scale::Ramp { from: eps, to: 1.0 }, false),
        ],
    })
}

/// Linear ramp of the selected rays' coefficients from 1 to `to`.
pub fn scaling_path(
    f: &LaurentPoly,
    rays: &[Vec<i64>],
    scaled: &[usize],
    to: f64,
) -> Result<CoefficientPath> {
    let mut factors = vec![Factor::ONE; f.len()];
    for &i in scaled {
        factors[term_index(f, &rays[i])?].scale = Scale::Ramp { from: 1.0, to };
    }
    Ok(CoefficientPath {
        base: f.clone(),
        segments: vec![Segment { factors }],
    })
}
