//! Explicit norms on ℝⁿ, quotients by codimension-2 subspaces, restrictions
//! to planes, and the lift of a plane certificate to the ambient pair.

use std::f64::consts::PI;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::Certificate;
use crate::error::{Error, Result};
use crate::norm2d::{Exponent, Mat2, Norm2, PSpec, Vec2};
use crate::operators::operator_norm;
use crate::search::golden_max;

pub const MAX_DIM: usize = 8;
/// Directions sampled on a half turn before refinement.
pub const BASE_DIRECTIONS: usize = 720;
/// Ambient sphere scans are only run up to this dimension.
pub const MAX_SCAN_DIM: usize = 4;
pub const LIFT_SAMPLES: usize = 1_000_000;
pub const LIFT_SEED: u64 = 0x5eed_2d1f;

/// A norm on ℝⁿ with an explicit representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormNSpec", into = "NormNSpec")]
pub enum NormN {
    Lp { dim: usize, p: Exponent },
    /// `‖x‖ = max_i |f_i(x)|`.
    Facets { dim: usize, facets: Vec<Vec<f64>> },
    /// `‖x‖ = sqrt(xᵀ M x)`.
    Ellipsoid { m: DMatrix<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::input(format!("dimension {dim} outside 2..={MAX_DIM}")));
    }
    Ok(())
}

impl NormN {
    pub fn lp(dim: usize, p: f64) -> Result<NormN> {
        check_dim(dim)?;
        if p.is_infinite() && p > 0.0 {
            return Ok(NormN::Lp { dim, p: Exponent::Infinity });
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::norm(format!("exponent {p} outside [1, inf]")));
        }
        Ok(NormN::Lp { dim, p: Exponent::Finite(p) })
    }

    pub fn linf(dim: usize) -> Result<NormN> {
        NormN::lp(dim, f64::INFINITY)
    }

    pub fn facets(dim: usize, facets: Vec<Vec<f64>>) -> Result<NormN> {
        check_dim(dim)?;
        if facets.iter().any(|f| f.len() != dim || f.iter().any(|v| !v.is_finite())) {
            return Err(Error::norm(format!("facets must be finite vectors of length {dim}")));
        }
        let m = DMatrix::from_fn(facets.len(), dim, |i, j| facets[i][j]);
        let sv = m.singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if facets.len() < dim || !(lo > 1e-12 * hi) {
            return Err(Error::norm("facets do not span the dual space; not a norm"));
        }
        Ok(NormN::Facets { dim, facets })
    }

    pub fn ellipsoid(m: DMatrix<f64>) -> Result<NormN> {
        check_dim(m.nrows())?;
        if !m.is_square() || (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(Error::norm("ellipsoid matrix must be square and symmetric"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::norm("ellipsoid matrix is not positive definite"));
        }
        Ok(NormN::Ellipsoid { m: sym })
    }

    pub fn dim(&self) -> usize {
        match self {
            NormN::Lp { dim, .. } | NormN::Facets { dim, .. } => *dim,
            NormN::Ellipsoid { m } => m.nrows(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            NormN::Lp { p: Exponent::Infinity, .. } => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormN::Lp { p: Exponent::Finite(p), .. } => lp_eval(x, *p),
            NormN::Facets { facets, .. } => facets.iter().fold(0.0, |m, f| m.max(dot(f, x).abs())),
            NormN::Ellipsoid { m } => {
                let v = DVector::from_column_slice(x);
                v.dot(&(m * &v)).max(0.0).sqrt()
            }
        }
    }

    /// Norm of a functional in the dual space.
    pub fn dual_eval(&self, phi: &[f64]) -> f64 {
        match self {
            NormN::Lp { dim, p } => NormN::Lp { dim: *dim, p: p.conjugate() }.eval(phi),
            NormN::Ellipsoid { m } => {
                let v = DVector::from_column_slice(phi);
                let s = m.clone().cholesky().expect("validated SPD").solve(&v);
                v.dot(&s).max(0.0).sqrt()
            }
            NormN::Facets { dim, facets } => {
                // min Σ|μ_i| subject to Σ μ_i f_i = φ.
                let mut lp = Problem::new(OptimizationDirection::Minimize);
                let vars: Vec<_> = facets
                    .iter()
                    .map(|_| (lp.add_var(1.0, (0.0, f64::INFINITY)), lp.add_var(1.0, (0.0, f64::INFINITY))))
                    .collect();
                for j in 0..*dim {
                    let row: Vec<_> = facets
                        .iter()
                        .zip(&vars)
                        .flat_map(|(f, &(a, b))| [(a, f[j]), (b, -f[j])])
                        .collect();
                    lp.add_constraint(&row[..], ComparisonOp::Eq, phi[j]);
                }
                lp.solve()
                    .ok()
                    .and_then(|o| o.into_solution().ok())
                    .map(|s| s.objective())
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Facet functionals when the unit ball is a polytope.
    pub fn facet_list(&self) -> Option<Vec<Vec<f64>>> {
        match self {
            NormN::Facets { facets, .. } => Some(facets.clone()),
            NormN::Lp { dim, p: Exponent::Infinity } => Some(
                (0..*dim)
                    .map(|i| (0..*dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
            ),
            NormN::Lp { dim, p: Exponent::Finite(p) } if *p == 1.0 => Some(
                (0..1usize << (dim - 1))
                    .map(|mask| {
                        (0..*dim)
                            .map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 })
                            .collect()
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// A vertex of the unit ball maximizing `w·x`, for polyhedral balls.
    pub fn maximizer(&self, w: &[f64]) -> Option<Vec<f64>> {
        match self {
            NormN::Lp { p: Exponent::Infinity, .. } => {
                Some(w.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect())
            }
            NormN::Lp { dim, p: Exponent::Finite(p) } if *p == 1.0 => {
                let i = (0..*dim).fold(0, |b, i| if w[i].abs() > w[b].abs() { i } else { b });
                let mut x = vec![0.0; *dim];
                x[i] = if w[i] >= 0.0 { 1.0 } else { -1.0 };
                Some(x)
            }
            NormN::Facets { dim, facets } => {
                let mut lp = Problem::new(OptimizationDirection::Maximize);
                let xv: Vec<_> = w.iter().map(|&c| lp.add_var(c, (f64::NEG_INFINITY, f64::INFINITY))).collect();
                for f in facets {
                    let row: Vec<_> = xv.iter().zip(f).map(|(&v, &a)| (v, a)).collect();
                    lp.add_constraint(&row[..], ComparisonOp::Le, 1.0);
                    lp.add_constraint(&row[..], ComparisonOp::Ge, -1.0);
                }
                let sol = lp.solve().ok()?.into_solution().ok()?;
                let x: Vec<f64> = xv.iter().map(|&v| sol.var_value(v)).collect();
                Some(snap_vertex(facets, *dim, x))
            }
            _ => None,
        }
    }

    fn is_euclidean_type(&self) -> Option<DMatrix<f64>> {
        match self {
            NormN::Ellipsoid { m } => Some(m.clone()),
            NormN::Lp { dim, p: Exponent::Finite(p) } if *p == 2.0 => Some(DMatrix::identity(*dim, *dim)),
            _ => None,
        }
    }

    /// `min_c ‖u + Σ c_j z_j‖` for orthonormal `z`; returns the value and `c`.
    pub fn minimize_over(&self, u: &[f64], z: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let k = z.len();
        if k == 0 {
            return (self.eval(u), Vec::new());
        }
        let point = |c: &[f64]| {
            let mut x = u.to_vec();
            z.iter().zip(c).for_each(|(zj, cj)| axpy(*cj, zj, &mut x));
            x
        };
        if let Some(m) = self.is_euclidean_type() {
            let zm = DMatrix::from_fn(u.len(), k, |i, j| z[j][i]);
            let uv = DVector::from_column_slice(u);
            let g = zm.transpose() * &m * &zm;
            let rhs = -(zm.transpose() * &m * &uv);
            let c = g.cholesky().expect("restriction of an SPD form").solve(&rhs);
            let c: Vec<f64> = c.iter().copied().collect();
            return (self.eval(&point(&c)), c);
        }
        if let Some(facets) = self.facet_list() {
            let mut lp = Problem::new(OptimizationDirection::Minimize);
            let t = lp.add_var(1.0, (0.0, f64::INFINITY));
            let cv: Vec<_> = (0..k).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
            for f in &facets {
                let fz: Vec<f64> = z.iter().map(|zj| dot(f, zj)).collect();
                let fu = dot(f, u);
                let mut row: Vec<_> = cv.iter().zip(&fz).map(|(&v, &a)| (v, a)).collect();
                row.push((t, -1.0));
                lp.add_constraint(&row[..], ComparisonOp::Le, -fu);
                let mut row: Vec<_> = cv.iter().zip(&fz).map(|(&v, &a)| (v, -a)).collect();
                row.push((t, -1.0));
                lp.add_constraint(&row[..], ComparisonOp::Le, fu);
            }
            let c = lp
                .solve()
                .ok()
                .and_then(|o| o.into_solution().ok())
                .map(|s| cv.iter().map(|&v| s.var_value(v)).collect::<Vec<f64>>())
                .unwrap_or_else(|| vec![0.0; k]);
            return (self.eval(&point(&c)), c);
        }
        // Smooth ℓp: cyclic coordinate descent with exact line searches.
        let mut c = vec![0.0; k];
        let mut best = self.eval(u);
        for _ in 0..500 {
            let before = best;
            for j in 0..k {
                let bound = 2.0 * best / self.eval(&z[j]) + 1e-300;
                let line = |s: f64| {
                    let mut cc = c.clone();
                    cc[j] += s;
                    -self.eval(&point(&cc))
                };
                let e = golden_max(&line, -bound, bound, 1e-15 * (1.0 + bound));
                if -e.value < best {
                    best = -e.value;
                    c[j] += e.arg;
                }
            }
            if before - best <= 1e-15 * before {
                break;
            }
        }
        (best, c)
    }
}

/// Re-solves the active constraints at an LP vertex exactly.
fn snap_vertex(facets: &[Vec<f64>], n: usize, x: Vec<f64>) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for f in facets {
        let v = dot(f, &x);
        if (v.abs() - 1.0).abs() > 1e-7 || rows.len() == n {
            continue;
        }
        let mut r = f.clone();
        for q in &ortho {
            axpy(-dot(q, &r), q, &mut r);
        }
        let len = dot(&r, &r).sqrt();
        if len > 1e-9 * dot(f, f).sqrt() {
            ortho.push(r.iter().map(|c| c / len).collect());
            rows.push(f.clone());
            rhs.push(v.signum());
        }
    }
    if rows.len() < n {
        return x;
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    match a.lu().solve(&DVector::from_vec(rhs)) {
        Some(s) => s.iter().copied().collect(),
        None => x,
    }
}

fn lp_eval(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// JSON form of an ambient norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormNSpec {
    Lp { dim: usize, p: PSpec },
    Facets { dim: usize, facets: Vec<Vec<f64>> },
    Ellipsoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        matrix: Vec<Vec<f64>>,
    },
}

impl TryFrom<NormNSpec> for NormN {
    type Error = Error;

    fn try_from(spec: NormNSpec) -> Result<NormN> {
        match spec {
            NormNSpec::Lp { dim, p: PSpec::Number(p) } => NormN::lp(dim, p),
            NormNSpec::Lp { dim, p: PSpec::Text(s) } => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => NormN::linf(dim),
                _ => Err(Error::norm(format!("unrecognized exponent {s:?}"))),
            },
            NormNSpec::Facets { dim, facets } => NormN::facets(dim, facets),
            NormNSpec::Ellipsoid { dim, matrix } => {
                let n = matrix.len();
                if dim.is_some_and(|d| d != n) || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::norm("ellipsoid matrix does not match its dimension"));
                }
                NormN::ellipsoid(DMatrix::from_fn(n, n, |i, j| matrix[i][j]))
            }
        }
    }
}

impl From<NormN> for NormNSpec {
    fn from(n: NormN) -> NormNSpec {
        match n {
            NormN::Lp { dim, p: Exponent::Infinity } => NormNSpec::Lp { dim, p: PSpec::Text("inf".into()) },
            NormN::Lp { dim, p: Exponent::Finite(p) } => NormNSpec::Lp { dim, p: PSpec::Number(p) },
            NormN::Facets { dim, facets } => NormNSpec::Facets { dim, facets },
            NormN::Ellipsoid { m } => NormNSpec::Ellipsoid {
                dim: Some(m.nrows()),
                matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
            },
        }
    }
}

/// Orthonormalizes `v`, rejecting (near) dependent lists.
fn orthonormalize(v: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for w in v {
        if w.len() != n || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::input(format!("basis vectors must be finite of length {n}")));
        }
        let mut r = w.clone();
        for _ in 0..2 {
            for q in &out {
                axpy(-dot(q, &r), q, &mut r);
            }
        }
        let len = dot(&r, &r).sqrt();
        if len <= 1e-10 * dot(w, w).sqrt() || len == 0.0 {
            return Err(Error::input("basis vectors are linearly dependent"));
        }
        out.push(r.iter().map(|x| x / len).collect());
    }
    Ok(out)
}

/// Orthonormal vectors spanning the orthogonal complement of `q`, built from
/// the standard basis vectors with the largest residuals.
fn complement(q: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut basis = q.to_vec();
    let mut out = Vec::new();
    while basis.len() < n {
        let residual = |i: usize| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    axpy(-dot(b, &r), b, &mut r);
                }
            }
            r
        };
        let (_, r) = (0..n)
            .map(|i| (i, residual(i)))
            .max_by(|a, b| dot(&a.1, &a.1).total_cmp(&dot(&b.1, &b.1)).then(b.0.cmp(&a.0)))
            .unwrap();
        let len = dot(&r, &r).sqrt();
        let r: Vec<f64> = r.iter().map(|x| x / len).collect();
        basis.push(r.clone());
        out.push(r);
    }
    out
}

/// Polygon through the unit-sphere points of `q` in 720 directions. With
/// `refine`, every chord that is not flat is bisected until it is, which
/// recovers the corners of a polygonal `q` to rounding error. Returns the
/// polygon and the sup of the relative error over a ten times finer grid.
fn polygonize<F: Fn(Vec2) -> f64 + Sync>(q: F, refine: bool) -> Result<(Norm2, f64)> {
    let pt = |th: f64| {
        let u = Vec2::unit(th);
        u / q(u)
    };
    fn split<P: Fn(f64) -> Vec2>(pt: &P, a: f64, pa: Vec2, b: f64, pb: Vec2, depth: u32, out: &mut Vec<Vec2>) {
        let m = 0.5 * (a + b);
        let pm = pt(m);
        let chord = pb - pa;
        let dev = chord.cross(pm - pa).abs() / (chord.euclid() * pm.euclid());
        if dev > 1e-13 && depth < 48 {
            split(pt, a, pa, m, pm, depth + 1, out);
            out.push(pm);
            split(pt, m, pm, b, pb, depth + 1, out);
        }
    }
    let h = PI / BASE_DIRECTIONS as f64;
    let nodes: Vec<Vec2> = (0..=BASE_DIRECTIONS)
        .into_par_iter()
        .map(|k| pt(k as f64 * h))
        .collect();
    let chunks: Vec<Vec<Vec2>> = (0..BASE_DIRECTIONS)
        .into_par_iter()
        .map(|k| {
            let mut out = vec![nodes[k]];
            if refine {
                split(&pt, k as f64 * h, nodes[k], (k + 1) as f64 * h, nodes[k + 1], 0, &mut out);
            }
            out
        })
        .collect();
    let verts: Vec<Vec2> = chunks.into_iter().flatten().collect();
    let poly = Norm2::polygon(&verts)?;
    let err = max_relative_error(&poly, q);
    Ok((poly, err))
}

fn max_relative_error<F: Fn(Vec2) -> f64 + Sync>(poly: &Norm2, q: F) -> f64 {
    let fine = 10 * BASE_DIRECTIONS;
    (0..fine)
        .into_par_iter()
        .map(|k| {
            let u = Vec2::unit(PI * k as f64 / fine as f64);
            let e = q(u);
            (poly.eval(u) - e).abs() / e
        })
        .reduce(|| 0.0, f64::max)
}

/// Polygon spanned by `support(φ)`, a point of a convex body maximizing
/// `φ·v`. Every edge between two found points is probed along its normal until
/// no new point shows up, so all vertices are recovered. Returns the half list
/// of vertices with outward normals in `[0, π)`.
fn support_polygon<F: Fn(Vec2) -> Vec2 + Sync>(support: F) -> Vec<Vec2> {
    fn edge<F: Fn(Vec2) -> Vec2>(support: &F, a: Vec2, b: Vec2, depth: u32, out: &mut Vec<Vec2>) {
        let d = b - a;
        if d.euclid() <= 1e-12 * (1.0 + a.euclid()) || depth > 60 {
            return;
        }
        let normal = Vec2::new(d.y, -d.x) / d.euclid();
        let c = support(normal);
        if normal.dot(c) - normal.dot(a) > 1e-12 * (1.0 + a.euclid()) {
            edge(support, a, c, depth + 1, out);
            out.push(c);
            edge(support, c, b, depth + 1, out);
        }
    }
    let h = PI / BASE_DIRECTIONS as f64;
    let pts: Vec<Vec2> = (0..=BASE_DIRECTIONS)
        .into_par_iter()
        .map(|k| support(Vec2::unit(k as f64 * h)))
        .collect();
    let mut out: Vec<Vec2> = Vec::new();
    for k in 0..BASE_DIRECTIONS {
        out.push(pts[k]);
        edge(&support, pts[k], pts[k + 1], 0, &mut out);
    }
    let first = out[0];
    let scale = 1e-10 * (1.0 + first.euclid());
    let mut verts: Vec<Vec2> = Vec::new();
    for p in out {
        if verts.last().is_none_or(|q: &Vec2| (p - *q).euclid() > scale) && (p + first).euclid() > scale {
            verts.push(p);
        }
    }
    verts
}

/// `X/X₀` presented on the orthonormal complement `W` of `X₀`:
/// `Q(x) = (w₁·x, w₂·x)` and `‖v‖ = min_{z∈X₀} ‖v₁w₁ + v₂w₂ + z‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientPresentation {
    pub ambient: NormN,
    pub x0_basis: Vec<Vec<f64>>,
    /// Orthonormal basis of `X₀`.
    pub kernel: Vec<Vec<f64>>,
    pub complement: [Vec<f64>; 2],
    pub induced: Norm2,
    /// Relative gap between `induced` and the exact quotient norm, sampled on a
    /// grid containing every chord midpoint.
    pub error_bound: f64,
}

impl QuotientPresentation {
    pub fn q_map(&self, x: &[f64]) -> Vec2 {
        Vec2::new(dot(&self.complement[0], x), dot(&self.complement[1], x))
    }

    pub fn section(&self, v: Vec2) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient.dim()];
        axpy(v.x, &self.complement[0], &mut x);
        axpy(v.y, &self.complement[1], &mut x);
        x
    }

    /// The quotient norm by direct minimization.
    pub fn exact_eval(&self, v: Vec2) -> f64 {
        self.ambient.minimize_over(&self.section(v), &self.kernel).0
    }

    /// A representative of `v` of least ambient norm.
    pub fn representative(&self, v: Vec2) -> Vec<f64> {
        let mut x = self.section(v);
        let (_, c) = self.ambient.minimize_over(&x, &self.kernel);
        self.kernel.iter().zip(&c).for_each(|(z, c)| axpy(*c, z, &mut x));
        x
    }
}

pub fn quotient_norm(ambient: &NormN, x0_basis: &[Vec<f64>]) -> Result<QuotientPresentation> {
    let n = ambient.dim();
    if x0_basis.len() + 2 != n {
        return Err(Error::input(format!(
            "X0 must have codimension 2: got {} vectors in dimension {n}",
            x0_basis.len()
        )));
    }
    let kernel = orthonormalize(x0_basis, n)?;
    let w = complement(&kernel, n);
    let mut p = QuotientPresentation {
        ambient: ambient.clone(),
        x0_basis: x0_basis.to_vec(),
        kernel,
        complement: [w[0].clone(), w[1].clone()],
        induced: Norm2::l2(),
        error_bound: 0.0,
    };
    if let Some(m) = ambient.is_euclidean_type() {
        // Schur complement of the form on W ⊕ X₀.
        let cols = |v: &[Vec<f64>]| DMatrix::from_fn(n, v.len(), |i, j| v[j][i]);
        let (wm, zm) = (cols(&w), cols(&p.kernel));
        let (a, b) = (wm.transpose() * &m * &wm, wm.transpose() * &m * &zm);
        let c = zm.transpose() * &m * &zm;
        let g = if p.kernel.is_empty() {
            a
        } else {
            a - &b * c.try_inverse().expect("SPD block") * b.transpose()
        };
        p.induced = Norm2::ellipse(Mat2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]))?;
        return Ok(p);
    }
    let q = p.clone();
    if ambient.facet_list().is_some() {
        // The quotient ball is the image of the ambient ball under Q.
        let verts = support_polygon(|phi| {
            let w = q.section(phi);
            q.q_map(&q.ambient.maximizer(&w).expect("polyhedral ambient"))
        });
        p.induced = Norm2::polygon(&verts)?;
        p.error_bound = max_relative_error(&p.induced, |v| q.exact_eval(v));
        return Ok(p);
    }
    let (induced, err) = polygonize(|v| q.exact_eval(v), false)?;
    p.induced = induced;
    p.error_bound = err;
    Ok(p)
}

/// The ambient norm on `span(b₁, b₂)` in the coordinates of that basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Restriction {
    pub ambient: NormN,
    pub basis: [Vec<f64>; 2],
    pub norm: Norm2,
    pub error_bound: f64,
}

impl Restriction {
    pub fn embed(&self, v: Vec2) -> Vec<f64> {
        let mut y = vec![0.0; self.ambient.dim()];
        axpy(v.x, &self.basis[0], &mut y);
        axpy(v.y, &self.basis[1], &mut y);
        y
    }
}

pub fn restrict_codomain(ambient: &NormN, y0_basis: &[Vec<f64>]) -> Result<Restriction> {
    let n = ambient.dim();
    if y0_basis.len() != 2 {
        return Err(Error::input("Y0 needs exactly two basis vectors"));
    }
    orthonormalize(y0_basis, n)?;
    let basis = [y0_basis[0].clone(), y0_basis[1].clone()];
    let mut r = Restriction {
        ambient: ambient.clone(),
        basis,
        norm: Norm2::l2(),
        error_bound: 0.0,
    };
    if let Some(m) = ambient.is_euclidean_type() {
        let b = DMatrix::from_fn(n, 2, |i, j| r.basis[j][i]);
        let g = b.transpose() * m * b;
        r.norm = Norm2::ellipse(Mat2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]))?;
        return Ok(r);
    }
    let refine = ambient.facet_list().is_some();
    let rr = r.clone();
    let (norm, err) = polygonize(|v| rr.ambient.eval(&rr.embed(v)), refine)?;
    r.norm = norm;
    r.error_bound = err;
    Ok(r)
}

/// Result of lifting a plane certificate to the ambient pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub dim_x: usize,
    pub dim_y: usize,
    /// `E ∘ T̃_λ ∘ Q` as row-major matrices.
    pub operators: Vec<Vec<Vec<f64>>>,
    pub x0_hat: Vec<f64>,
    /// Ambient norm of the least-norm representative before normalization.
    pub representative_norm: f64,
    pub slack: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub norms_2d: Vec<f64>,
    pub norms: Vec<f64>,
    pub values: Vec<f64>,
    pub distances: Vec<f64>,
    /// Number of ambient points found in each attaining band.
    pub band_points: Vec<usize>,
    pub samples: usize,
    pub brute_force: bool,
    pub norm_ok: bool,
    pub monotone_ok: bool,
    pub limit_ok: bool,
    pub distance_ok: bool,
    pub pass: bool,
}

fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (a * DVector::from_column_slice(x)).iter().copied().collect()
}

/// `‖A‖` between ambient norms: exact through the dual facets when the
/// codomain is polyhedral, otherwise `None`.
pub fn ambient_operator_norm(a: &DMatrix<f64>, x: &NormN, y: &NormN) -> Option<f64> {
    let facets = y.facet_list()?;
    Some(
        facets
            .iter()
            .map(|f| {
                let phi = a.transpose() * DVector::from_column_slice(f);
                x.dual_eval(phi.as_slice())
            })
            .fold(0.0, f64::max),
    )
}

/// Compass search for a local max of `‖Ax‖_Y / ‖x‖_X`, returned on the sphere.
fn polish(a: &DMatrix<f64>, x: &NormN, y: &NormN, start: &[f64]) -> (Vec<f64>, f64) {
    let n = start.len();
    let f = |p: &[f64]| y.eval(&mat_vec(a, p)) / x.eval(p);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e);
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = std::f64::consts::FRAC_1_SQRT_2;
                e[j] = s * std::f64::consts::FRAC_1_SQRT_2;
                dirs.push(e);
            }
        }
    }
    let mut p = start.to_vec();
    let mut best = f(&p);
    let mut step = 1e-2;
    while step > 1e-14 {
        let mut moved = false;
        for d in &dirs {
            for s in [step, -step] {
                let mut q = p.clone();
                axpy(s, d, &mut q);
                let v = f(&q);
                if v > best {
                    best = v;
                    let len = x.eval(&q);
                    p = q.iter().map(|c| c / len).collect();
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (p, best)
}

/// Lifts `cert` (built on `px.induced` → `ry.norm`) to `E ∘ T̃_λ ∘ Q` and
/// re-verifies it upstairs. For `dim_x ≤ 4` the attaining bands are scanned on
/// `samples` random sphere points, whose best candidates are polished by a
/// compass search; only points reaching `1 − tol` count as attaining.
pub fn lift_certificate(
    px: &QuotientPresentation,
    ry: &Restriction,
    cert: &Certificate,
    samples: usize,
) -> Result<LiftReport> {
    let t = &cert.seed.t;
    if t.domain != px.induced || t.codomain != ry.norm {
        return Err(Error::input(
            "certificate norms do not match the quotient and restriction presentations",
        ));
    }
    let (nx, ny) = (px.ambient.dim(), ry.ambient.dim());
    let xa = &px.ambient;
    let ya = &ry.ambient;
    let raw = px.representative(cert.seed.x0);
    let rep_norm = xa.eval(&raw);
    let x0_hat: Vec<f64> = raw.iter().map(|v| v / rep_norm).collect();
    // Sampled error bounds are doubled to cover the gaps between samples.
    let slack = 2.0 * px.error_bound.max(ry.error_bound) + (rep_norm - 1.0).abs();
    let delta = cert.delta;
    let delta_prime = (delta - slack) / (1.0 + slack) - slack;
    if delta_prime <= 0.0 {
        return Err(Error::stage(
            "lift",
            format!("slack {slack:e} consumes delta {delta:e}"),
        ));
    }
    let wt = DMatrix::from_fn(2, nx, |i, j| px.complement[i][j]);
    let e = DMatrix::from_fn(ny, 2, |i, j| ry.basis[j][i]);
    let mats: Vec<DMatrix<f64>> = cert
        .operators
        .iter()
        .map(|m| &e * DMatrix::from_row_slice(2, 2, &[m.a, m.b, m.c, m.d]) * &wt)
        .collect();
    let norms_2d: Vec<f64> = (0..cert.operators.len())
        .map(|k| operator_norm(&cert.operator(k)).0)
        .collect();
    let values: Vec<f64> = mats.iter().map(|a| ya.eval(&mat_vec(a, &x0_hat))).collect();

    let brute_force = nx <= MAX_SCAN_DIM;
    let sphere: Vec<Vec<f64>> = if brute_force {
        let mut rng = ChaCha8Rng::seed_from_u64(LIFT_SEED);
        (0..samples)
            .map(|_| {
                let g: Vec<f64> = (0..nx).map(|_| StandardNormal.sample(&mut rng)).collect();
                let len = xa.eval(&g);
                g.iter().map(|v| v / len).collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut norms = Vec::new();
    let mut distances = Vec::new();
    let mut band_points = Vec::new();
    for (k, a) in mats.iter().enumerate() {
        let dist = |p: &[f64]| {
            let d: Vec<f64> = p.iter().zip(&x0_hat).map(|(u, v)| u - v).collect();
            let s: Vec<f64> = p.iter().zip(&x0_hat).map(|(u, v)| u + v).collect();
            xa.eval(&d).min(xa.eval(&s))
        };
        if !brute_force {
            norms.push(ambient_operator_norm(a, xa, ya).unwrap_or(norms_2d[k]));
            distances.push(cert.attaining[k].min_dist / (1.0 + slack) - slack);
            band_points.push(0);
            continue;
        }
        let vals: Vec<f64> = sphere.par_iter().map(|p| ya.eval(&mat_vec(a, p))).collect();
        let mut order: Vec<usize> = (0..samples).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
        let polished: Vec<(Vec<f64>, f64)> = order
            .iter()
            .take(32)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&&i| polish(a, xa, ya, &sphere[i]))
            .collect();
        let sampled_max = polished
            .iter()
            .map(|p| p.1)
            .chain(order.first().map(|&i| vals[i]))
            .fold(0.0, f64::max);
        norms.push(ambient_operator_norm(a, xa, ya).unwrap_or(sampled_max));
        let thr = 1.0 - cert.tol;
        let mut count = 0;
        let mut d = f64::INFINITY;
        for &i in order.iter().take_while(|&&i| vals[i] >= thr) {
            count += 1;
            d = d.min(dist(&sphere[i]));
        }
        for (p, v) in &polished {
            if *v >= thr {
                count += 1;
                d = d.min(dist(p));
            }
        }
        band_points.push(count);
        distances.push(d);
    }
    let norm_ok = norms
        .iter()
        .zip(&norms_2d)
        .all(|(n, m)| (n - 1.0).abs() <= 1e-6 + 2.0 * slack && (n - m).abs() <= 1e-6 + 2.0 * slack);
    let monotone_ok = values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let limit_ok = values.last().is_some_and(|v| *v >= 1.0 - 1e-4 - slack);
    let distance_ok = band_points.iter().all(|&c| c > 0 || !brute_force)
        && distances.iter().all(|d| *d > delta_prime);
    Ok(LiftReport {
        dim_x: nx,
        dim_y: ny,
        operators: mats
            .iter()
            .map(|a| a.row_iter().map(|r| r.iter().copied().collect()).collect())
            .collect(),
        x0_hat,
        representative_norm: rep_norm,
        slack,
        delta,
        delta_prime,
        norms_2d,
        norms,
        values,
        distances,
        band_points,
        samples: if brute_force { samples } else { 0 },
        brute_force,
        norm_ok,
        monotone_ok,
        limit_ok,
        distance_ok,
        pass: norm_ok && monotone_ok && limit_ok && distance_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn e(n: usize, i: usize) -> Vec<f64> {
        (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    /// Independent oracle for one-dimensional kernels: golden search on the
    /// convex function `t ↦ ‖u + t z‖`.
    fn line_min(norm: &NormN, u: &[f64], z: &[f64]) -> f64 {
        let f = |t: f64| {
            let x: Vec<f64> = u.iter().zip(z).map(|(a, b)| a + t * b).collect();
            -norm.eval(&x)
        };
        let r = 4.0 * norm.eval(u) / norm.eval(z);
        -golden_max(&f, -r, r, 1e-13).value
    }

    #[test]
    fn spec_round_trip() {
        for s in [
            r#"{"type":"lp","dim":3,"p":"inf"}"#,
            r#"{"type":"lp","dim":4,"p":1.5}"#,
            r#"{"type":"facets","dim":2,"facets":[[1,0],[0,1],[1,1]]}"#,
            r#"{"type":"ellipsoid","dim":2,"matrix":[[2,0.5],[0.5,1]]}"#,
        ] {
            let n: NormN = serde_json::from_str(s).unwrap();
            let back: NormN = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
            assert_eq!(n, back);
        }
        assert!(serde_json::from_str::<NormN>(r#"{"type":"facets","dim":3,"facets":[[1,0,0],[0,1,0]]}"#).is_err());
        assert!(serde_json::from_str::<NormN>(r#"{"type":"lp","dim":9,"p":2}"#).is_err());
    }

    #[test]
    fn coordinate_quotients() {
        let q = quotient_norm(&NormN::lp(3, 1.0).unwrap(), &[e(3, 2)]).unwrap();
        assert!(q.error_bound < 1e-12);
        for k in 0..50 {
            let u = Vec2::unit(0.3 + k as f64 * 0.1);
            assert!((q.induced.eval(u) - Norm2::l1().eval(u)).abs() < 1e-12);
        }
        let q = quotient_norm(&NormN::linf(3).unwrap(), &[e(3, 2)]).unwrap();
        for k in 0..50 {
            let u = Vec2::unit(0.3 + k as f64 * 0.1);
            assert!((q.induced.eval(u) - Norm2::linf().eval(u)).abs() < 1e-12);
        }
        let q = quotient_norm(&NormN::lp(4, 2.0).unwrap(), &[e(4, 2), e(4, 3)]).unwrap();
        assert!(matches!(q.induced, Norm2::Ellipse(_)));
        assert!(q.induced.eval(Vec2::new(0.6, 0.8)) - 1.0 < 1e-15);
    }

    #[test]
    fn quotient_matches_independent_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let facets = NormN::facets(
            3,
            vec![vec![1.0, 0.2, 0.5], vec![-0.3, 1.0, 0.4], vec![0.2, 0.1, 1.0], vec![0.7, 0.7, -0.6]],
        )
        .unwrap();
        let kernel = vec![0.3, -0.5, 1.0];
        for ambient in [facets, NormN::lp(3, 3.0).unwrap(), NormN::lp(3, 1.0).unwrap()] {
            let q = quotient_norm(&ambient, &[kernel.clone()]).unwrap();
            assert!(q.error_bound < 1e-3, "{}", q.error_bound);
            for _ in 0..1000 {
                let v = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                let exact = q.exact_eval(v);
                let oracle = line_min(&ambient, &q.section(v), &q.kernel[0]);
                assert!((exact - oracle).abs() <= 1e-8 * oracle.max(1.0), "{exact} {oracle}");
                // A quotient never exceeds the norm of a representative.
                assert!(exact <= ambient.eval(&q.section(v)) + 1e-10);
                let g = q.induced.eval(v);
                assert!((g - exact).abs() <= 1.05 * q.error_bound * exact + 1e-12);
            }
        }
    }

    #[test]
    fn quotient_map_has_norm_one() {
        let ambient = NormN::lp(3, 1.5).unwrap();
        let q = quotient_norm(&ambient, &[vec![1.0, 1.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut best: f64 = 0.0;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = q.induced.eval(q.q_map(&x)) / ambient.eval(&x);
            assert!(r <= 1.0 + q.error_bound + 1e-12);
            best = best.max(r);
        }
        // Least-norm representatives attain the quotient norm.
        for k in 0..360 {
            let v = q.induced.sphere_point(k as f64 * PI / 180.0);
            let x = q.representative(v);
            assert!((ambient.eval(&x) - q.exact_eval(v)).abs() < 1e-9);
            assert!((q.q_map(&x) - v).euclid() < 1e-12);
            best = best.max(1.0 / ambient.eval(&x));
        }
        assert!((best - 1.0).abs() < 1e-3 + q.error_bound);
    }

    #[test]
    fn restrictions() {
        let r = restrict_codomain(&NormN::linf(3).unwrap(), &[e(3, 0), e(3, 1)]).unwrap();
        for k in 0..100 {
            let u = Vec2::unit(k as f64 * 0.07);
            assert!((r.norm.eval(u) - Norm2::linf().eval(u)).abs() < 1e-12);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = restrict_codomain(&NormN::lp(4, 2.0).unwrap(), &[vec![s, s, 0.0, 0.0], vec![0.0, 0.0, s, -s]])
            .unwrap();
        assert!((r.norm.eval(Vec2::new(0.6, 0.8)) - 1.0).abs() < 1e-14);
        let r = restrict_codomain(&NormN::lp(3, 1.0).unwrap(), &[vec![1.0, 1.0, 0.0], e(3, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let v = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let direct = 2.0 * v.x.abs() + v.y.abs();
            assert!((r.norm.eval(v) - direct).abs() < 1e-10 * direct.max(1.0));
            assert!((r.ambient.eval(&r.embed(v)) - r.norm.eval(v)).abs() < 1e-10);
        }
        let Norm2::Polygon(p) = &r.norm else { panic!() };
        assert_eq!(p.len(), 4);
        assert!(restrict_codomain(&NormN::linf(3).unwrap(), &[e(3, 0), e(3, 0)]).is_err());
    }

    #[test]
    fn dependent_or_wrong_size_bases_rejected() {
        let l = NormN::linf(3).unwrap();
        assert!(quotient_norm(&l, &[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]).is_err());
        assert!(quotient_norm(&l, &[]).is_err());
        assert!(quotient_norm(&NormN::linf(4).unwrap(), &[e(4, 0), e(4, 0)]).is_err());
    }

    #[test]
    fn image_of_the_ball_covers_the_quotient_ball() {
        let ambient = NormN::lp(3, 1.5).unwrap();
        let q = quotient_norm(&ambient, &[vec![1.0, -0.5, 2.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec2> = (0..200_000)
            .map(|_| {
                let g: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
                let len = ambient.eval(&g);
                q.q_map(&g.iter().map(|v| v / len).collect::<Vec<_>>())
            })
            .collect();
        // Compare support functions of the two convex sets.
        for k in 0..360 {
            let phi = Vec2::unit(k as f64 * PI / 180.0);
            let hull = pts.iter().map(|p| phi.dot(*p)).fold(f64::MIN, f64::max);
            let exact = (0..3600)
                .map(|j| phi.dot(q.induced.sphere_point(j as f64 * PI / 1800.0)))
                .fold(f64::MIN, f64::max);
            assert!(hull <= exact * (1.0 + 2.0 * q.error_bound) + 1e-12);
            assert!(hull >= exact - 1e-3, "{k}: {hull} {exact}");
        }
    }

    #[test]
    fn lifted_norm_matches_plane_norm_by_scans() {
        let ambient = NormN::lp(3, 3.0).unwrap();
        let q = quotient_norm(&ambient, &[vec![0.2, 1.0, -1.0]]).unwrap();
        let r = restrict_codomain(&NormN::lp(3, 1.0).unwrap(), &[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let m = Mat2::new(1.1, 0.4, -0.7, 0.9);
        let wt = DMatrix::from_fn(2, 3, |i, j| q.complement[i][j]);
        let emb = DMatrix::from_fn(3, 2, |i, j| r.basis[j][i]);
        let a = &emb * DMatrix::from_row_slice(2, 2, &[m.a, m.b, m.c, m.d]) * &wt;
        let plane = (0..200_000)
            .map(|k| {
                let u = q.induced.sphere_point(k as f64 * PI / 200_000.0);
                r.norm.eval(m.apply(u))
            })
            .fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut best: f64 = 0.0;
        for _ in 0..200_000 {
            let g: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            best = best.max(r.ambient.eval(&mat_vec(&a, &g)) / ambient.eval(&g));
        }
        assert!(best <= plane * (1.0 + 2.0 * q.error_bound) + 1e-9);
        assert!(best >= plane * (1.0 - 1e-3), "{best} {plane}");
        let exact = ambient_operator_norm(&a, &ambient, &r.ambient).unwrap();
        assert!((exact - plane).abs() <= 2.0 * q.error_bound * plane + 1e-6);
    }

    #[test]
    fn square_certificate_lifts_to_cubes() {
        let l = NormN::linf(3).unwrap();
        let q = quotient_norm(&l, &[e(3, 2)]).unwrap();
        let r = restrict_codomain(&l, &[e(3, 0), e(3, 1)]).unwrap();
        let seed = crate::construct::build_counterexample(&q.induced, &r.norm).unwrap();
        let cert = crate::construct::p2_failure_family(
            &seed,
            &crate::construct::default_lambdas(),
            crate::construct::DEFAULT_TOL,
        )
        .unwrap();
        let rep = lift_certificate(&q, &r, &cert, 100_000).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.delta_prime >= 0.9 * rep.delta);
        assert!(rep.representative_norm <= 1.0 + 1e-4);
        let mut moved = cert.clone();
        moved.delta = 10.0;
        assert!(lift_certificate(&q, &r, &moved, 1000).unwrap().distance_ok == false);
        let other = restrict_codomain(&NormN::lp(3, 1.0).unwrap(), &[e(3, 0), e(3, 1)]).unwrap();
        assert!(lift_certificate(&q, &other, &cert, 1000).is_err());
    }

    #[test]
    fn dual_norms() {
        let f = NormN::facets(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((f.dual_eval(&[0.5, -0.25]) - 0.75).abs() < 1e-12);
        let el = NormN::ellipsoid(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((el.dual_eval(&[2.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((NormN::linf(3).unwrap().dual_eval(&[1.0, -2.0, 0.5]) - 3.5).abs() < 1e-15);
    }

    #[test]
    fn lift_composes_with_quotient() {
        let q = quotient_norm(&NormN::linf(3).unwrap(), &[vec![0.0, 0.0, 1.0]]).unwrap();
        let r = restrict_codomain(&NormN::linf(3).unwrap(), &[e(3, 0), e(3, 1)]).unwrap();
        let m = Mat2::new(0.3, -1.2, 0.8, 0.5);
        let wt = DMatrix::from_fn(2, 3, |i, j| q.complement[i][j]);
        let emb = DMatrix::from_fn(3, 2, |i, j| r.basis[j][i]);
        let a = &emb * DMatrix::from_row_slice(2, 2, &[m.a, m.b, m.c, m.d]) * &wt;
        for k in 0..20 {
            let v = Vec2::unit(k as f64 * 0.3);
            let x = q.representative(v);
            let y = mat_vec(&a, &x);
            let back = Vec2::new(y[0], y[1]);
            assert!((back - m.apply(v)).euclid() < 1e-12);
        }
        let t = crate::operators::Operator2::new(m, q.induced.clone(), r.norm.clone()).unwrap();
        let lifted = ambient_operator_norm(&a, &q.ambient, &r.ambient).unwrap();
        assert!((lifted - operator_norm(&t).0).abs() < 1e-8);
    }
}
