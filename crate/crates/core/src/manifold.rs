//! Connection presentation of a manifold and the built-in catalog.
//!
//! A manifold here is a single chart plus a coefficient field Gamma^i_jk(x).
//! No metric machinery: catalog entries hard-code their known coefficient
//! fields, and the metrics only appear inside `ClosedForms` for tests.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Chart point: `coords` has the dimension of the owning connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// Tangent vector: base point plus chart components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Self {
        TangentVector { base, components }
    }
}

/// Rank-3 coefficient array Gamma^i_jk, row-major in (i, j, k).
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs3 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Coeffs3 {
    pub fn zeros(dim: usize) -> Self {
        Coeffs3 { dim, data: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.dim + j) * self.dim + k] = v;
    }

    /// Contraction Gamma^i_jk u^j w^k.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                let base = (i * n + j) * n;
                let uj = u[j];
                if uj == 0.0 {
                    continue;
                }
                for k in 0..n {
                    s += self.data[base + k] * uj * w[k];
                }
            }
            out[i] = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Rank-4 curvature array R^i_jkl, row-major in (i, j, k, l).
#[derive(Debug, Clone, PartialEq)]
pub struct Coeffs4 {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Coeffs4 {
    pub fn zeros(dim: usize) -> Self {
        Coeffs4 { dim, data: vec![0.0; dim * dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.dim + j) * self.dim + k) * self.dim + l] = v;
    }

    /// (R(X,Y)Z)^i = R^i_jkl Z^j X^k Y^l.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(i, j, k, l) * z[j] * x[k] * y[l];
                    }
                }
            }
            out[i] = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

type GammaFn = Arc<dyn Fn(&[f64], &mut Coeffs3) + Send + Sync>;
type DomainFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Affine connection on a single chart: a coefficient field with a trust
/// radius inside which the local constructions (Exp inverse, loops) are
/// well posed.
#[derive(Clone)]
pub struct Connection {
    pub name: String,
    pub dim: usize,
    pub trust_radius: f64,
    gamma: GammaFn,
    domain: DomainFn,
}

impl fmt::Debug for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Connection")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("trust_radius", &self.trust_radius)
            .finish()
    }
}

impl Connection {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        trust_radius: f64,
        gamma: impl Fn(&[f64], &mut Coeffs3) + Send + Sync + 'static,
    ) -> Self {
        assert!(dim >= 1, "dim must be >= 1");
        assert!(trust_radius > 0.0);
        Connection {
            name: name.into(),
            dim,
            trust_radius,
            gamma: Arc::new(gamma),
            domain: Arc::new(|x: &[f64]| x.iter().all(|v| v.is_finite())),
        }
    }

    pub fn with_domain(mut self, domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Arc::new(domain);
        self
    }

    pub fn in_domain(&self, coords: &[f64]) -> bool {
        coords.iter().all(|v| v.is_finite()) && (self.domain)(coords)
    }

    /// Evaluate Gamma^i_jk at `p`. No (j,k) symmetry is assumed.
    pub fn eval_gamma(&self, p: &Point) -> Result<Coeffs3> {
        let mut g = Coeffs3::zeros(self.dim);
        self.eval_gamma_into(&p.coords, &mut g)?;
        Ok(g)
    }

    pub(crate) fn eval_gamma_into(&self, coords: &[f64], out: &mut Coeffs3) -> Result<()> {
        (self.gamma)(coords, out);
        if out.data.iter().any(|v| !v.is_finite()) {
            return Err(GeoError::Numerics(format!(
                "non-finite connection coefficient at {:?}",
                coords
            )));
        }
        Ok(())
    }

    /// Curvature R^i_jkl at `p`:
    ///   R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj
    ///           + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj,
    /// with (R(X,Y)Z)^i = R^i_jkl Z^j X^k Y^l. Gamma derivatives by central
    /// differences, step 1e-4.
    pub fn riemann(&self, p: &Point) -> Result<Coeffs4> {
        let n = self.dim;
        let step = 1e-4;
        let g0 = self.eval_gamma(p)?;
        // dgamma[d] = d Gamma / d x^d
        let mut dgamma = Vec::with_capacity(n);
        for d in 0..n {
            let mut cp = p.coords.clone();
            cp[d] += step;
            let gp = self.eval_gamma(&Point::new(cp))?;
            let mut cm = p.coords.clone();
            cm[d] -= step;
            let gm = self.eval_gamma(&Point::new(cm))?;
            let data: Vec<f64> = gp
                .data
                .iter()
                .zip(&gm.data)
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect();
            if data.iter().any(|v| !v.is_finite()) {
                return Err(GeoError::Numerics("non-finite Gamma derivative".into()));
            }
            dgamma.push(Coeffs3 { dim: n, data });
        }
        let mut r = Coeffs4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = dgamma[k].get(i, l, j) - dgamma[l].get(i, k, j);
                        for m in 0..n {
                            v += g0.get(i, k, m) * g0.get(m, l, j)
                                - g0.get(i, l, m) * g0.get(m, k, j);
                        }
                        r.set(i, j, k, l, v);
                    }
                }
            }
        }
        Ok(r)
    }
}

type ExpFn = Arc<dyn Fn(&TangentVector) -> Option<Point> + Send + Sync>;
type MetricFn = Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>;

/// Closed-form oracles attached to catalog entries that admit them.
/// These are for verification only; library operations never consult them.
#[derive(Clone, Default)]
pub struct ClosedForms {
    /// Exact exponential map, where known. Returns `None` for base points or
    /// directions outside the closed-form family.
    pub exp: Option<ExpFn>,
    /// Chart metric g_ij(p), row-major, for test-side norms and angles.
    pub metric: Option<MetricFn>,
    /// Constant sectional curvature, when the entry has one.
    pub constant_curvature: Option<f64>,
}

/// A catalog manifold: connection plus optional closed-form oracles.
#[derive(Clone)]
pub struct CatalogEntry {
    pub connection: Connection,
    pub closed_forms: ClosedForms,
    /// Default base point for verification suites.
    pub default_base: Point,
    /// Default working radius for loop operations.
    pub default_radius: f64,
}

pub const CATALOG_NAMES: [&str; 5] = [
    "flat2",
    "flat3",
    "sphere2-stereographic",
    "hyperbolic-halfplane",
    "poly-perturbed2",
];

fn flat(name: &str, dim: usize) -> CatalogEntry {
    let conn = Connection::new(name, dim, 1e9, |_x, g| {
        g.data.iter_mut().for_each(|v| *v = 0.0);
    });
    let exp: ExpFn = Arc::new(|x: &TangentVector| {
        Some(Point::new(
            x.base
                .coords
                .iter()
                .zip(&x.components)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    });
    let metric: MetricFn = Arc::new(move |_p: &Point| crate::linalg::identity(dim));
    CatalogEntry {
        connection: conn,
        closed_forms: ClosedForms {
            exp: Some(exp),
            metric: Some(metric),
            constant_curvature: Some(0.0),
        },
        default_base: Point::new(vec![0.0; dim]),
        default_radius: 1.0,
    }
}

/// Unit sphere in stereographic chart, metric 4/(1+|u|^2)^2 * delta.
/// Gamma^i_jk = -2/(1+|u|^2) (delta^i_j u_k + delta^i_k u_j - delta_jk u_i).
fn sphere_stereographic() -> CatalogEntry {
    let conn = Connection::new("sphere2-stereographic", 2, 1.0, |u, g| {
        let r2 = u[0] * u[0] + u[1] * u[1];
        let f = -2.0 / (1.0 + r2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut v = 0.0;
                    if i == j {
                        v += u[k];
                    }
                    if i == k {
                        v += u[j];
                    }
                    if j == k {
                        v -= u[i];
                    }
                    g.set(i, j, k, f * v);
                }
            }
        }
    });
    // Great circles through the chart origin: Exp_0(v) = tan(|v|) v/|v|.
    let exp: ExpFn = Arc::new(|x: &TangentVector| {
        if crate::linalg::norm(&x.base.coords) > 1e-14 {
            return None;
        }
        let n = crate::linalg::norm(&x.components);
        if n < 1e-300 {
            return Some(x.base.clone());
        }
        if n >= std::f64::consts::FRAC_PI_2 {
            return None;
        }
        let s = n.tan() / n;
        Some(Point::new(x.components.iter().map(|c| c * s).collect()))
    });
    let metric: MetricFn = Arc::new(|p: &Point| {
        let r2: f64 = p.coords.iter().map(|c| c * c).sum();
        let f = 4.0 / ((1.0 + r2) * (1.0 + r2));
        vec![f, 0.0, 0.0, f]
    });
    CatalogEntry {
        connection: conn,
        closed_forms: ClosedForms {
            exp: Some(exp),
            metric: Some(metric),
            constant_curvature: Some(1.0),
        },
        default_base: Point::new(vec![0.0, 0.0]),
        default_radius: 0.3,
    }
}

/// Upper half-plane with metric y^-2 (dx^2 + dy^2); chart domain y > 0.
fn hyperbolic_halfplane() -> CatalogEntry {
    let conn = Connection::new("hyperbolic-halfplane", 2, 0.5, |u, g| {
        let inv_y = 1.0 / u[1];
        g.data.iter_mut().for_each(|v| *v = 0.0);
        g.set(0, 0, 1, -inv_y);
        g.set(0, 1, 0, -inv_y);
        g.set(1, 0, 0, inv_y);
        g.set(1, 1, 1, -inv_y);
    })
    .with_domain(|u| u[1] > 1e-9);
    // Vertical geodesics: from (x0, y0) with velocity (0, w), y(t) = y0 e^{w t / y0}.
    let exp: ExpFn = Arc::new(|x: &TangentVector| {
        if x.components[0].abs() > 1e-14 {
            return None;
        }
        let (x0, y0) = (x.base.coords[0], x.base.coords[1]);
        let w = x.components[1];
        Some(Point::new(vec![x0, y0 * (w / y0).exp()]))
    });
    let metric: MetricFn = Arc::new(|p: &Point| {
        let f = 1.0 / (p.coords[1] * p.coords[1]);
        vec![f, 0.0, 0.0, f]
    });
    CatalogEntry {
        connection: conn,
        closed_forms: ClosedForms {
            exp: Some(exp),
            metric: Some(metric),
            constant_curvature: Some(-1.0),
        },
        default_base: Point::new(vec![0.0, 1.0]),
        default_radius: 0.25,
    }
}

/// Flat plane plus small polynomial coefficients eps * p(x). Symmetric in
/// (j,k), no closed forms.
pub fn poly_perturbed2(eps: f64) -> CatalogEntry {
    let conn = Connection::new("poly-perturbed2", 2, 1.0, move |u, g| {
        let (x, y) = (u[0], u[1]);
        g.set(0, 0, 0, eps * y);
        g.set(0, 0, 1, eps * x);
        g.set(0, 1, 0, eps * x);
        g.set(0, 1, 1, eps * x * y);
        g.set(1, 0, 0, eps * (x + y));
        g.set(1, 0, 1, eps * y * y);
        g.set(1, 1, 0, eps * y * y);
        g.set(1, 1, 1, eps * x);
    });
    CatalogEntry {
        connection: conn,
        closed_forms: ClosedForms::default(),
        default_base: Point::new(vec![0.0, 0.0]),
        default_radius: 0.3,
    }
}

/// Look up a built-in manifold. `poly-perturbed2` uses the default
/// perturbation strength 0.1; use [`poly_perturbed2`] to pick another.
pub fn catalog(name: &str) -> Result<CatalogEntry> {
    match name {
        "flat2" => Ok(flat("flat2", 2)),
        "flat3" => Ok(flat("flat3", 3)),
        "sphere2-stereographic" => Ok(sphere_stereographic()),
        "hyperbolic-halfplane" => Ok(hyperbolic_halfplane()),
        "poly-perturbed2" => Ok(poly_perturbed2(0.1)),
        other => Err(GeoError::UnknownManifold(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_gamma_is_zero() {
        let e = catalog("flat2").unwrap();
        let g = e.connection.eval_gamma(&Point::new(vec![0.3, -0.7])).unwrap();
        assert!(g.max_abs() == 0.0);
    }

    #[test]
    fn halfplane_gamma_at_unit_height() {
        let e = catalog("hyperbolic-halfplane").unwrap();
        let g = e.connection.eval_gamma(&Point::new(vec![0.0, 1.0])).unwrap();
        assert!((g.get(0, 0, 1) + 1.0).abs() < 1e-15);
        assert!((g.get(0, 1, 0) + 1.0).abs() < 1e-15);
        assert!((g.get(1, 0, 0) - 1.0).abs() < 1e-15);
        assert!((g.get(1, 1, 1) + 1.0).abs() < 1e-15);
        assert_eq!(g.get(0, 0, 0), 0.0);
        assert_eq!(g.get(1, 0, 1), 0.0);
    }

    #[test]
    fn sphere_gamma_vanishes_at_origin() {
        let e = catalog("sphere2-stereographic").unwrap();
        let g = e.connection.eval_gamma(&Point::new(vec![0.0, 0.0])).unwrap();
        assert!(g.max_abs() == 0.0);
    }

    #[test]
    fn unknown_name_is_lookup_error() {
        assert!(matches!(catalog("nosuch"), Err(GeoError::UnknownManifold(_))));
    }

    #[test]
    fn eval_gamma_is_pure() {
        let e = catalog("poly-perturbed2").unwrap();
        let p = Point::new(vec![0.21, -0.13]);
        let a = e.connection.eval_gamma(&p).unwrap();
        let b = e.connection.eval_gamma(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn riemann_flat_is_zero() {
        for name in ["flat2", "flat3"] {
            let e = catalog(name).unwrap();
            let p = Point::new(vec![0.1; e.connection.dim]);
            let r = e.connection.riemann(&p).unwrap();
            assert!(r.max_abs() < 1e-12);
        }
    }

    #[test]
    fn riemann_antisymmetry_in_last_pair() {
        let e = catalog("sphere2-stereographic").unwrap();
        let r = e.connection.riemann(&Point::new(vec![0.2, -0.1])).unwrap();
        let n = 2;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        assert!((r.get(i, j, k, l) + r.get(i, j, l, k)).abs() < 1e-6);
                    }
                }
            }
        }
    }

    // Pins the sign convention: on the unit sphere R(X,Y)Y = +X for a
    // metric-orthonormal pair.
    #[test]
    fn sphere_sectional_curvature_is_plus_one() {
        let e = catalog("sphere2-stereographic").unwrap();
        let p = Point::new(vec![0.0, 0.0]);
        let r = e.connection.riemann(&p).unwrap();
        // metric at origin is 4*delta, so (0.5, 0) and (0, 0.5) are orthonormal
        let x = [0.5, 0.0];
        let y = [0.0, 0.5];
        let rxyy = r.apply(&x, &y, &y);
        assert!((rxyy[0] - x[0]).abs() < 1e-6, "got {rxyy:?}");
        assert!((rxyy[1] - x[1]).abs() < 1e-6);
    }

    #[test]
    fn halfplane_sectional_curvature_is_minus_one() {
        let e = catalog("hyperbolic-halfplane").unwrap();
        let p = Point::new(vec![0.0, 1.0]);
        let r = e.connection.riemann(&p).unwrap();
        // metric at (0,1) is delta
        let x = [1.0, 0.0];
        let y = [0.0, 1.0];
        let rxyy = r.apply(&x, &y, &y);
        assert!((rxyy[0] + x[0]).abs() < 1e-6, "got {rxyy:?}");
        assert!((rxyy[1] + x[1]).abs() < 1e-6);
    }

    // Curvature machinery must not assume (j,k) symmetry of Gamma.
    #[test]
    fn riemann_antisymmetry_with_torsion() {
        let conn = Connection::new("torsion-test", 2, 1.0, |u, g| {
            g.data.iter_mut().for_each(|v| *v = 0.0);
            g.set(0, 0, 1, 0.3 * u[0]);
            g.set(0, 1, 0, -0.2 * u[1]);
            g.set(1, 0, 0, 0.1 * u[0] * u[1]);
        });
        let r = conn.riemann(&Point::new(vec![0.4, 0.3])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert!((r.get(i, j, k, l) + r.get(i, j, l, k)).abs() < 1e-6);
                    }
                }
            }
        }
    }
}
