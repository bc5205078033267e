//! Lattice polytopes, toric divisors and the Picard lattice of a toric Fano manifold.

use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("origin is not an interior point of the polytope")]
    OriginNotInterior,
    #[error("facet with primitive normal {normal:?} lies at level {level}, not -1")]
    NotReflexive { normal: Vec<i64>, level: i64 },
    #[error("Picard group has torsion (gcd of maximal minors is {gcd})")]
    TorsionInPicard { gcd: i64 },
    #[error("divisor polytope is unbounded")]
    UnboundedPolytope,
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot parse '{expr}': {reason}")]
    Parse { expr: String, reason: String },
}

pub type Result<T> = std::result::Result<T, ToricError>;

/// Integer vertex set of the polar polytope in the lattice N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanoPolytope {
    dim: usize,
    vertices: Vec<Vec<i64>>,
}

impl FanoPolytope {
    /// Checks shape, distinctness and primitivity. Convexity and the Fano
    /// condition are checked separately by [`is_reflexive_fano`].
    pub fn new(vertices: Vec<Vec<i64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(|v| v.len())
            .ok_or_else(|| ToricError::InvalidPolytope("no vertices".into()))?;
        if dim == 0 {
            return Err(ToricError::InvalidPolytope(
                "zero-dimensional lattice".into(),
            ));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(ToricError::LengthMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if gcd_all(v) != 1 {
                return Err(ToricError::InvalidPolytope(format!(
                    "vertex {v:?} is not primitive"
                )));
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(ToricError::InvalidPolytope(format!(
                    "vertex {v:?} repeated"
                )));
            }
        }
        Ok(Self { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn num_rays(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub vertex_indices: Vec<usize>,
    pub inner_normal: Vec<i64>,
}

/// A facet hyperplane `<w, x> >= level` with primitive `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Halfspace {
    normal: Vec<i64>,
    level: i64,
    on: Vec<usize>,
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fraction-free Gaussian elimination (Bareiss).
pub(crate) fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// Vector orthogonal to `dim - 1` given vectors (generalized cross product).
fn cross(rows: &[Vec<i64>], dim: usize) -> Vec<i64> {
    (0..dim)
        .map(|j| {
            let minor: Vec<Vec<i64>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * det(&minor)
        })
        .collect()
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c].abs() > 1e-9) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c] / a[r][c];
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    r
}

/// Every supporting hyperplane through `dim` affinely independent points,
/// found by testing all `dim`-subsets.
fn halfspaces(points: &[Vec<i64>], dim: usize) -> Result<Vec<Halfspace>> {
    if points.is_empty() {
        return Err(ToricError::NotFullDimensional);
    }
    let diffs: Vec<Vec<i64>> = points
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    if rank(&diffs) < dim {
        return Err(ToricError::NotFullDimensional);
    }
    let mut found: Vec<Halfspace> = Vec::new();
    for subset in combinations(points.len(), dim) {
        let base = &points[subset[0]];
        let rows: Vec<Vec<i64>> = subset[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let mut w = cross(&rows, dim);
        let g = gcd_all(&w);
        if g == 0 {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= g);
        let mut level = dot(&w, base);
        let sides: Vec<i64> = points.iter().map(|p| dot(&w, p) - level).collect();
        let pos = sides.iter().any(|&s| s > 0);
        let neg = sides.iter().any(|&s| s < 0);
        if pos && neg {
            continue;
        }
        if neg {
            w.iter_mut().for_each(|x| *x = -*x);
            level = -level;
        }
        if found.iter().any(|h| h.normal == w) {
            continue;
        }
        let on = (0..points.len())
            .filter(|&i| dot(&w, &points[i]) == level)
            .collect();
        found.push(Halfspace {
            normal: w,
            level,
            on,
        });
    }
    found.sort_by(|a, b| a.on.cmp(&b.on));
    Ok(found)
}

/// Facets of the convex hull of arbitrary lattice points, normalized to level -1.
pub fn hull_facets(points: &[Vec<i64>], dim: usize) -> Result<Vec<Facet>> {
    halfspaces(points, dim)?
        .into_iter()
        .map(|h| {
            if h.level >= 0 {
                Err(ToricError::OriginNotInterior)
            } else if h.level != -1 {
                Err(ToricError::NotReflexive {
                    normal: h.normal,
                    level: h.level,
                })
            } else {
                Ok(Facet {
                    vertex_indices: h.on,
                    inner_normal: h.normal,
                })
            }
        })
        .collect()
}

pub fn facets(p: &FanoPolytope) -> Result<Vec<Facet>> {
    hull_facets(&p.vertices, p.dim)
}

/// Vertices of the dual polytope, one per facet.
pub fn polar_vertices(p: &FanoPolytope) -> Result<Vec<Vec<i64>>> {
    Ok(facets(p)?.into_iter().map(|f| f.inner_normal).collect())
}

fn origin_interior(points: &[Vec<i64>], dim: usize) -> bool {
    halfspaces(points, dim)
        .map(|hs| hs.iter().all(|h| h.level < 0))
        .unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FanoViolation {
    NotFullDimensional,
    OriginNotInterior,
    NotReflexive { normal: Vec<i64>, level: i64 },
    NonSimplicialFacet { normal: Vec<i64>, vertices: usize },
    NonUnimodularFacet { normal: Vec<i64>, det: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FanoCheck {
    pub is_fano: bool,
    pub violation: Option<FanoViolation>,
}

pub fn is_reflexive_fano(p: &FanoPolytope) -> FanoCheck {
    let fail = |v| FanoCheck {
        is_fano: false,
        violation: Some(v),
    };
    let fs = match facets(p) {
        Ok(fs) => fs,
        Err(ToricError::NotFullDimensional) => return fail(FanoViolation::NotFullDimensional),
        Err(ToricError::NotReflexive { normal, level }) => {
            return fail(FanoViolation::NotReflexive { normal, level })
        }
        Err(_) => return fail(FanoViolation::OriginNotInterior),
    };
    for f in fs {
        if f.vertex_indices.len() != p.dim {
            return fail(FanoViolation::NonSimplicialFacet {
                normal: f.inner_normal,
                vertices: f.vertex_indices.len(),
            });
        }
        let m: Vec<Vec<i64>> = f
            .vertex_indices
            .iter()
            .map(|&i| p.vertices[i].clone())
            .collect();
        let d = det(&m);
        if d.abs() != 1 {
            return fail(FanoViolation::NonUnimodularFacet {
                normal: f.inner_normal,
                det: d,
            });
        }
    }
    FanoCheck {
        is_fano: true,
        violation: None,
    }
}

/// Number of maximal cones of the fan, i.e. the expected number of critical points.
pub fn euler_characteristic(p: &FanoPolytope) -> Result<usize> {
    Ok(facets(p)?.len())
}

/// Integer vector indexed by the rays of the fan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToricDivisor(pub Vec<i64>);

impl ToricDivisor {
    pub fn zero(num_rays: usize) -> Self {
        Self(vec![0; num_rays])
    }

    pub fn ray(num_rays: usize, i: usize) -> Self {
        let mut d = Self::zero(num_rays);
        d.0[i] = 1;
        d
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|a| a * k).collect())
    }

    /// Parses expressions such as `n2+n3` or `2n1-n4` over the given ray names.
    pub fn parse(expr: &str, ray_names: &[String]) -> Result<Self> {
        parse_combination(expr, ray_names).map(Self)
    }

    pub fn format_with(&self, names: &[String]) -> String {
        format_combination(&self.0, names)
    }
}

impl fmt::Display for ToricDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.0.len()).map(|i| format!("n{i}")).collect();
        f.write_str(&self.format_with(&names))
    }
}

pub fn default_ray_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("n{i}")).collect()
}

pub fn format_combination(coeffs: &[i64], names: &[String]) -> String {
    let mut out = String::new();
    for (c, name) in coeffs.iter().zip(names) {
        match *c {
            0 => continue,
            1 if out.is_empty() => {}
            1 => out.push('+'),
            -1 => out.push('-'),
            c if c > 0 && !out.is_empty() => out.push_str(&format!("+{c}")),
            c => out.push_str(&c.to_string()),
        }
        out.push_str(name);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Integer linear combination of named symbols, e.g. `2H-E1-E2` or `xi+pi*H`.
pub fn parse_combination(expr: &str, symbols: &[String]) -> Result<Vec<i64>> {
    let err = |reason: &str| ToricError::Parse {
        expr: expr.to_string(),
        reason: reason.into(),
    };
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty expression"));
    }
    let mut out = vec![0i64; symbols.len()];
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut first = true;
    while i < bytes.len() {
        let mut sign = 1;
        match bytes[i] {
            b'+' => i += 1,
            b'-' => {
                sign = -1;
                i += 1
            }
            _ if first => {}
            _ => return Err(err("expected '+' or '-'")),
        }
        first = false;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let coeff: Option<i64> = if i > start {
            Some(
                s[start..i]
                    .parse()
                    .map_err(|_| err("coefficient out of range"))?,
            )
        } else {
            None
        };
        if coeff.is_some() && i < bytes.len() && bytes[i] == b'*' {
            i += 1;
        }
        let rest = &s[i..];
        let hit = symbols
            .iter()
            .enumerate()
            .filter(|(_, sym)| !sym.is_empty() && rest.starts_with(sym.as_str()))
            .max_by_key(|(_, sym)| sym.len());
        match (hit, coeff) {
            (Some((k, sym)), c) => {
                out[k] += sign * c.unwrap_or(1);
                i += sym.len();
            }
            (None, Some(0)) => {}
            (None, _) => return Err(err(&format!("unknown symbol at '{rest}'"))),
        }
    }
    Ok(out)
}

/// Cokernel of `M -> Div_T`, `m -> (<m, n_F>)_F`, with a canonical coset representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicardLattice {
    num_rays: usize,
    dim: usize,
    relation_matrix: Vec<Vec<i64>>,
    echelon: Vec<Vec<i64>>,
    pivots: Vec<(usize, usize)>,
}

impl PicardLattice {
    pub fn from_rays(rays: &[Vec<i64>], dim: usize) -> Result<Self> {
        if rays.iter().any(|r| r.len() != dim) {
            return Err(ToricError::InvalidPolytope(
                "ray length differs from dimension".into(),
            ));
        }
        let r = rays.len();
        let minors = combinations(r, dim)
            .into_iter()
            .map(|rows| det(&rows.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>()))
            .fold(0, gcd);
        if minors == 0 {
            return Err(ToricError::NotFullDimensional);
        }
        if minors != 1 {
            return Err(ToricError::TorsionInPicard { gcd: minors });
        }

        // Column-style echelon form: column operations keep the image of M.
        let mut h: Vec<Vec<i64>> = rays.to_vec();
        let mut pivots = Vec::new();
        let mut col = 0;
        for row in 0..r {
            if col == dim {
                break;
            }
            loop {
                let Some(k) = (col..dim)
                    .filter(|&k| h[row][k] != 0)
                    .min_by_key(|&k| h[row][k].abs())
                else {
                    break;
                };
                for line in h.iter_mut() {
                    line.swap(k, col);
                }
                let mut clean = true;
                for j in col + 1..dim {
                    let q = h[row][j] / h[row][col];
                    if q != 0 {
                        for line in h.iter_mut() {
                            line[j] -= q * line[col];
                        }
                    }
                    clean &= h[row][j] == 0;
                }
                if clean {
                    if h[row][col] < 0 {
                        for line in h.iter_mut() {
                            line[col] = -line[col];
                        }
                    }
                    pivots.push((row, col));
                    col += 1;
                    break;
                }
            }
        }
        Ok(Self {
            num_rays: r,
            dim,
            relation_matrix: rays.to_vec(),
            echelon: h,
            pivots,
        })
    }

    pub fn num_rays(&self) -> usize {
        self.num_rays
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.num_rays - self.dim
    }

    pub fn relation_matrix(&self) -> &[Vec<i64>] {
        &self.relation_matrix
    }

    /// The principal divisor `A m`.
    pub fn principal(&self, m: &[i64]) -> ToricDivisor {
        ToricDivisor(self.relation_matrix.iter().map(|row| dot(row, m)).collect())
    }

    fn reduce(&self, d: &ToricDivisor) -> ToricDivisor {
        let mut v = d.0.clone();
        for &(row, col) in &self.pivots {
            let q = v[row].div_euclid(self.echelon[row][col]);
            if q != 0 {
                for (x, line) in v.iter_mut().zip(&self.echelon) {
                    *x -= q * line[col];
                }
            }
        }
        ToricDivisor(v)
    }

    /// Lattice points of `{m : <m, n_F> >= -a_F}` in lexicographic order.
    pub fn section_points(&self, d: &ToricDivisor) -> Result<Vec<Vec<i64>>> {
        lattice_points(&self.relation_matrix, self.dim, &d.0)
    }
}

pub fn picard(p: &FanoPolytope) -> Result<PicardLattice> {
    if !origin_interior(&p.vertices, p.dim) {
        return Err(ToricError::OriginNotInterior);
    }
    PicardLattice::from_rays(&p.vertices, p.dim)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineBundleClass {
    pub rep: ToricDivisor,
    pub display_name: Option<String>,
}

impl PartialEq for LineBundleClass {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl Eq for LineBundleClass {}

impl LineBundleClass {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.display_name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.display_name
            .clone()
            .unwrap_or_else(|| self.rep.to_string())
    }
}

pub fn divisor_class(pic: &PicardLattice, d: &ToricDivisor) -> Result<LineBundleClass> {
    if d.len() != pic.num_rays {
        return Err(ToricError::LengthMismatch {
            expected: pic.num_rays,
            got: d.len(),
        });
    }
    Ok(LineBundleClass {
        rep: pic.reduce(d),
        display_name: None,
    })
}

fn lattice_points(rays: &[Vec<i64>], dim: usize, a: &[i64]) -> Result<Vec<Vec<i64>>> {
    if a.len() != rays.len() {
        return Err(ToricError::LengthMismatch {
            expected: rays.len(),
            got: a.len(),
        });
    }
    let feasible = |m: &[i64]| rays.iter().zip(a).all(|(n, &af)| dot(m, n) >= -af);
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    let mut any = false;
    for subset in combinations(rays.len(), dim) {
        let mat: Vec<Vec<i64>> = subset.iter().map(|&i| rays[i].clone()).collect();
        let den = det(&mat);
        if den == 0 {
            continue;
        }
        let rhs: Vec<i64> = subset.iter().map(|&i| -a[i]).collect();
        // Cramer's rule: m_j = det(mat with column j replaced by rhs) / den.
        let num: Vec<i64> = (0..dim)
            .map(|j| {
                let mj: Vec<Vec<i64>> = mat
                    .iter()
                    .zip(&rhs)
                    .map(|(row, &b)| {
                        let mut row = row.clone();
                        row[j] = b;
                        row
                    })
                    .collect();
                det(&mj)
            })
            .collect();
        let (num, den) = if den < 0 {
            (num.iter().map(|x| -x).collect(), -den)
        } else {
            (num, den)
        };
        let ok = rays
            .iter()
            .zip(a)
            .all(|(n, &af)| (dot(&num, n) as i128) >= -(af as i128) * den as i128);
        if !ok {
            continue;
        }
        any = true;
        for j in 0..dim {
            lo[j] = lo[j].min(num[j].div_euclid(den));
            hi[j] = hi[j].max(-(-num[j]).div_euclid(den));
        }
    }
    if !any {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut m = lo.clone();
    loop {
        if feasible(&m) {
            out.push(m.clone());
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if m[k] < hi[k] {
                m[k] += 1;
                for (x, &l) in m[k + 1..].iter_mut().zip(&lo[k + 1..]) {
                    *x = l;
                }
                break;
            }
        }
    }
}

/// All `m` in the lattice with `<m, n_F> >= -a_F`; their count is `h^0(O(D))`.
pub fn divisor_polytope_points(p: &FanoPolytope, d: &ToricDivisor) -> Result<Vec<Vec<i64>>> {
    if !origin_interior(&p.vertices, p.dim) {
        return Err(ToricError::UnboundedPolytope);
    }
    lattice_points(&p.vertices, p.dim, &d.0)
}

/// Nonnegative toric divisors of class `L`, in descending lexicographic order.
pub fn effective_basis(pic: &PicardLattice, l: &LineBundleClass) -> Result<Vec<ToricDivisor>> {
    let pts = pic.section_points(&l.rep)?;
    let mut out: Vec<ToricDivisor> = pts.iter().map(|m| l.rep.add(&pic.principal(m))).collect();
    out.sort_by_key(|d| Reverse(d.clone()));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialFailure {
    pub source: usize,
    pub target: usize,
    pub basis_size: usize,
    pub h0: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecialReport {
    pub special: bool,
    pub failures: Vec<SpecialFailure>,
}

/// Checks `|B(L_j - L_i)| = h^0(L_j - L_i)` for every ordered pair.
pub fn is_special_collection(
    pic: &PicardLattice,
    collection: &[LineBundleClass],
) -> Result<SpecialReport> {
    let mut failures = Vec::new();
    for (i, li) in collection.iter().enumerate() {
        for (j, lj) in collection.iter().enumerate() {
            let diff = lj.rep.sub(&li.rep);
            let class = divisor_class(pic, &diff)?;
            let basis_size = effective_basis(pic, &class)?.len();
            let h0 = pic.section_points(&diff)?.len();
            if basis_size != h0 {
                failures.push(SpecialFailure {
                    source: i,
                    target: j,
                    basis_size,
                    h0,
                });
            }
        }
    }
    Ok(SpecialReport {
        special: failures.is_empty(),
        failures,
    })
}
