//! The odular algebra of an affinely connected manifold: the geodesic loop
//! `L(x,a,y) = Exp_x tau^a_x Exp^-1_a y`, the scalar operation
//! `omega_t(a,z) = Exp_a t Exp^-1_a z`, the vector-space operation
//! `Lambda(x,a,y) = Exp_a(Exp^-1_a x + Exp^-1_a y)`, divisions, fundamental
//! fields, the loop exponential, and reconstruction of the connection from
//! the loop.

use std::collections::HashMap;
use std::sync::Mutex;

use serde_json::json;

use crate::error::{GeoError, Result};
use crate::geo::{
    exp_map, integrate_geodesic_with_frame, log_map, newton_solve, GeoParams, TransportedFrame,
};
use crate::linalg;
use crate::manifold::{Coeffs3, Connection, Point, TangentVector};
use crate::report::ResidualReport;
use crate::rk4::{self, DenseOutput};

/// All loop operations with a fixed neutral element, restricted to a chart
/// ball around it.
pub struct LoopContext {
    pub connection: Connection,
    pub neutral: Point,
    pub radius: f64,
    pub params: GeoParams,
    /// Central-difference step for fundamental fields.
    pub fund_step: f64,
    /// RK4 steps over [0,1] for the loop-exponential ODE.
    pub loop_exp_steps: usize,
    /// Parameters for the Exp/Log/transport calls made inside the
    /// loop-exponential right-hand side (a coarser step is enough there).
    pub inner: GeoParams,
    neutral_logs: Mutex<Option<Vec<Vec<f64>>>>,
}

/// Left translation y -> L(x, a, y) with the a->x transport precomputed.
pub struct LeftTranslation {
    pub x: Point,
    transport: Vec<f64>,
    connection: Connection,
    params: GeoParams,
}

impl LeftTranslation {
    /// Apply to loop-exponential coordinates: v = Exp^-1_a y.
    pub fn apply_to_log(&self, v: &[f64]) -> Result<Point> {
        let moved = linalg::mat_vec(&self.transport, v);
        exp_map(
            &self.connection,
            &TangentVector::new(self.x.clone(), moved),
            &self.params,
        )
    }
}

impl LoopContext {
    pub fn new(
        connection: Connection,
        neutral: Point,
        radius: f64,
        params: GeoParams,
    ) -> Result<Self> {
        if neutral.dim() != connection.dim {
            return Err(GeoError::InvalidInput("neutral point dimension mismatch".into()));
        }
        if !(radius > 0.0) || radius > connection.trust_radius {
            return Err(GeoError::InvalidInput(format!(
                "radius {radius} must lie in (0, trust_radius = {}]",
                connection.trust_radius
            )));
        }
        if !connection.in_domain(&neutral.coords) {
            return Err(GeoError::InvalidInput("neutral outside chart domain".into()));
        }
        Ok(LoopContext {
            connection,
            neutral,
            radius,
            params,
            fund_step: 1e-4,
            loop_exp_steps: 60,
            inner: GeoParams::default().with_h(1e-2),
            neutral_logs: Mutex::new(None),
        })
    }

    fn check_radius(&self, p: &Point, what: &str) -> Result<()> {
        let d = linalg::dist(&p.coords, &self.neutral.coords);
        if d > self.radius + 1e-9 {
            return Err(GeoError::InvalidInput(format!(
                "{what} at chart distance {d:.3e} exceeds loop radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Precompute the a->x parallel transport for repeated left translations.
    pub fn prepared_left(&self, x: &Point) -> Result<LeftTranslation> {
        self.prepared_left_with(x, &self.params)
    }

    fn prepared_left_with(&self, x: &Point, params: &GeoParams) -> Result<LeftTranslation> {
        let lx = log_map(&self.connection, &self.neutral, x, params)?;
        let frame: TransportedFrame =
            integrate_geodesic_with_frame(&self.connection, &lx, 0.0, 1.0, params.h)?;
        Ok(LeftTranslation {
            x: x.clone(),
            transport: frame.matrix(1.0)?,
            connection: self.connection.clone(),
            params: params.clone(),
        })
    }

    /// The geodesic loop L(x, a, y) = Exp_x tau^a_x Exp^-1_a y.
    pub fn loop_l(&self, x: &Point, y: &Point) -> Result<Point> {
        self.check_radius(x, "loop argument x")?;
        self.check_radius(y, "loop argument y")?;
        let v = log_map(&self.connection, &self.neutral, y, &self.params)?;
        self.prepared_left(x)?.apply_to_log(&v.components)
    }

    /// omega_t(a, z) = Exp_a(t Exp^-1_a z).
    pub fn omega(&self, t: f64, z: &Point) -> Result<Point> {
        self.check_radius(z, "omega argument")?;
        let v = log_map(&self.connection, &self.neutral, z, &self.params)?;
        exp_map(
            &self.connection,
            &TangentVector::new(self.neutral.clone(), linalg::scale(&v.components, t)),
            &self.params,
        )
    }

    /// Lambda(x, a, y) = Exp_a(Exp^-1_a x + Exp^-1_a y).
    pub fn lambda(&self, x: &Point, y: &Point) -> Result<Point> {
        self.check_radius(x, "lambda argument x")?;
        self.check_radius(y, "lambda argument y")?;
        let vx = log_map(&self.connection, &self.neutral, x, &self.params)?;
        let vy = log_map(&self.connection, &self.neutral, y, &self.params)?;
        exp_map(
            &self.connection,
            &TangentVector::new(
                self.neutral.clone(),
                linalg::add(&vx.components, &vy.components),
            ),
            &self.params,
        )
    }

    /// Solve L(x, y) = z for y. Newton runs on w = Exp^-1_a y, which keeps
    /// the precomputed transport out of the iteration.
    pub fn left_divide(&self, x: &Point, z: &Point) -> Result<Point> {
        self.check_radius(x, "division argument x")?;
        let lt = self.prepared_left(x)?;
        let residual = |w: &[f64]| -> Result<Vec<f64>> {
            Ok(linalg::sub(&lt.apply_to_log(w)?.coords, &z.coords))
        };
        let guess = linalg::sub(&z.coords, &x.coords);
        let w = newton_solve(&residual, &guess, &self.params)?;
        exp_map(
            &self.connection,
            &TangentVector::new(self.neutral.clone(), w),
            &self.params,
        )
    }

    /// Solve L(x, y) = z for x.
    pub fn right_divide(&self, z: &Point, y: &Point) -> Result<Point> {
        self.check_radius(y, "division argument y")?;
        let v = log_map(&self.connection, &self.neutral, y, &self.params)?;
        let residual = |xc: &[f64]| -> Result<Vec<f64>> {
            let lt = self.prepared_left(&Point::new(xc.to_vec()))?;
            Ok(linalg::sub(&lt.apply_to_log(&v.components)?.coords, &z.coords))
        };
        let guess: Vec<f64> = (0..self.connection.dim)
            .map(|i| self.neutral.coords[i] + z.coords[i] - y.coords[i])
            .collect();
        let x = newton_solve(&residual, &guess, &self.params)?;
        Ok(Point::new(x))
    }

    fn neutral_pert_logs(&self) -> Result<Vec<Vec<f64>>> {
        let mut guard = self.neutral_logs.lock().unwrap();
        if let Some(v) = guard.as_ref() {
            return Ok(v.clone());
        }
        let n = self.connection.dim;
        let mut logs = Vec::with_capacity(2 * n);
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = self.neutral.coords.clone();
                c[j] += sign * self.fund_step;
                let l = log_map(&self.connection, &self.neutral, &Point::new(c), &self.inner)?;
                logs.push(l.components);
            }
        }
        *guard = Some(logs.clone());
        Ok(logs)
    }

    /// Left fundamental field matrix A(x): the differential at the neutral of
    /// y -> L(x, y), by central differences.
    pub fn fundamental_left(&self, x: &Point) -> Result<Vec<f64>> {
        let n = self.connection.dim;
        let lt = self.prepared_left_with(x, &self.inner)?;
        let logs = self.neutral_pert_logs()?;
        let mut a = vec![0.0; n * n];
        for j in 0..n {
            let p = lt.apply_to_log(&logs[2 * j])?;
            let m = lt.apply_to_log(&logs[2 * j + 1])?;
            for i in 0..n {
                a[i * n + j] = (p.coords[i] - m.coords[i]) / (2.0 * self.fund_step);
            }
        }
        Ok(a)
    }

    /// Right fundamental field matrix B(y): the differential at the neutral
    /// of x -> L(x, y).
    pub fn fundamental_right(&self, y: &Point) -> Result<Vec<f64>> {
        let n = self.connection.dim;
        let v = log_map(&self.connection, &self.neutral, y, &self.inner)?;
        let mut b = vec![0.0; n * n];
        for j in 0..n {
            let eval = |sign: f64| -> Result<Point> {
                let mut c = self.neutral.coords.clone();
                c[j] += sign * self.fund_step;
                self.prepared_left_with(&Point::new(c), &self.inner)?
                    .apply_to_log(&v.components)
            };
            let p = eval(1.0)?;
            let m = eval(-1.0)?;
            for i in 0..n {
                b[i * n + j] = (p.coords[i] - m.coords[i]) / (2.0 * self.fund_step);
            }
        }
        Ok(b)
    }

    /// Solve df/dt = A(f) X, f(0) = a, the defining ODE of the loop
    /// exponential, over t in [0, 1].
    pub fn loop_exponential(&self, x: &[f64]) -> Result<LoopExpPath> {
        let n = self.connection.dim;
        if x.len() != n {
            return Err(GeoError::InvalidInput("vector dimension mismatch".into()));
        }
        if linalg::norm(x) == 0.0 {
            let f0 = self.neutral.coords.clone();
            let dense = DenseOutput::from_samples(
                vec![0.0, 1.0],
                vec![f0.clone(), f0.clone()],
                vec![vec![0.0; n], vec![0.0; n]],
            );
            return Ok(LoopExpPath { dense });
        }
        let rhs = |_t: f64, f: &[f64], out: &mut [f64]| -> Result<()> {
            let a = self.fundamental_left(&Point::new(f.to_vec()))?;
            out.copy_from_slice(&linalg::mat_vec(&a, x));
            Ok(())
        };
        let h = 1.0 / self.loop_exp_steps as f64;
        let dense = rk4::integrate(&rhs, &self.neutral.coords, 0.0, 1.0, h)?;
        Ok(LoopExpPath { dense })
    }

    /// Inverse of the loop exponential by chart-difference fixed-point
    /// iteration (the loop exponential is a near-identity perturbation of
    /// the chart at loop scales).
    pub fn loop_log(&self, x: &Point) -> Result<Vec<f64>> {
        let mut v = log_map(&self.connection, &self.neutral, x, &self.inner)?.components;
        let mut last = f64::INFINITY;
        for it in 0..30 {
            let f = self.loop_exponential(&v)?.endpoint();
            let e = linalg::sub(&x.coords, &f.coords);
            last = linalg::norm(&e);
            if last < 1e-10 {
                return Ok(v);
            }
            if it == 29 {
                break;
            }
            v = linalg::add(&v, &e);
        }
        Err(GeoError::NoConvergence { residual: last, iterations: 30 })
    }

    /// Canonical unary operation t x = Exp(t Exp^-1 x), built on the loop
    /// exponential.
    pub fn canonical_scalar(&self, t: f64, x: &Point) -> Result<Point> {
        self.check_radius(x, "canonical argument")?;
        let v = self.loop_log(x)?;
        Ok(self.loop_exponential(&linalg::scale(&v, t))?.endpoint())
    }

    /// Canonical sum x + y = Exp(Exp^-1 x + Exp^-1 y), built on the loop
    /// exponential.
    pub fn canonical_sum(&self, x: &Point, y: &Point) -> Result<Point> {
        self.check_radius(x, "canonical argument x")?;
        self.check_radius(y, "canonical argument y")?;
        let vx = self.loop_log(x)?;
        let vy = self.loop_log(y)?;
        Ok(self.loop_exponential(&linalg::add(&vx, &vy))?.endpoint())
    }

    /// Chart distance between (t x) . (u x) and (t + u) x.
    pub fn monoassociativity_residual(&self, t: f64, u: f64, x: &Point) -> Result<f64> {
        let tx = self.omega(t, x)?;
        let ux = self.omega(u, x)?;
        let lhs = self.loop_l(&tx, &ux)?;
        let rhs = self.omega(t + u, x)?;
        Ok(linalg::dist(&lhs.coords, &rhs.coords))
    }
}

/// Dense solution of the loop-exponential ODE.
#[derive(Debug, Clone)]
pub struct LoopExpPath {
    dense: DenseOutput,
}

impl LoopExpPath {
    pub fn endpoint(&self) -> Point {
        Point::new(self.dense.eval(1.0).unwrap())
    }

    pub fn at(&self, t: f64) -> Result<Point> {
        Ok(Point::new(self.dense.eval(t)?))
    }
}

/// The natural linear geodiodular structure: the ternary operations with the
/// neutral point as an argument.
#[derive(Debug, Clone)]
pub struct OdularStructure {
    pub connection: Connection,
    pub params: GeoParams,
    /// Working radius used when a context is opened at a neutral point.
    pub radius: f64,
}

impl OdularStructure {
    pub fn new(connection: Connection, params: GeoParams, radius: f64) -> Self {
        OdularStructure { connection, params, radius }
    }

    pub fn context(&self, neutral: Point) -> Result<LoopContext> {
        let r = self.radius.min(self.connection.trust_radius);
        LoopContext::new(self.connection.clone(), neutral, r, self.params.clone())
    }

    pub fn loop_l(&self, x: &Point, a: &Point, y: &Point) -> Result<Point> {
        self.context(a.clone())?.loop_l(x, y)
    }

    pub fn omega(&self, t: f64, a: &Point, z: &Point) -> Result<Point> {
        self.context(a.clone())?.omega(t, z)
    }

    pub fn lambda(&self, x: &Point, a: &Point, y: &Point) -> Result<Point> {
        self.context(a.clone())?.lambda(x, y)
    }
}

/// Tangent connection of the loopuscular structure:
/// `Gamma^i_jk(a) = -d^2 L(x,a,y)^i / dx^j dy^k` at `x = y = a`.
///
/// The stencil shares the four transports across the y-perturbations, which
/// is arithmetically identical to calling `fd_second_mixed` per index pair.
pub fn reconstruct_connection(structure: &OdularStructure, a: &Point) -> Result<Coeffs3> {
    let n = structure.connection.dim;
    let delta = structure.params.fd_step;
    let ctx = structure.context(a.clone())?;

    // logs of the y-perturbations, shared across all x-perturbations
    let mut ylogs = vec![vec![Vec::new(), Vec::new()]; n];
    for k in 0..n {
        for (si, sign) in [1.0_f64, -1.0].iter().enumerate() {
            let mut c = a.coords.clone();
            c[k] += sign * delta;
            ylogs[k][si] =
                log_map(&structure.connection, a, &Point::new(c), &structure.params)?.components;
        }
    }

    // L values at the four stencil corners per (j, k)
    let mut vals = vec![vec![vec![vec![Vec::new(); 2]; n]; 2]; n]; // [j][sx][k][sy]
    for j in 0..n {
        for (sxi, sx) in [1.0_f64, -1.0].iter().enumerate() {
            let mut c = a.coords.clone();
            c[j] += sx * delta;
            let lt = ctx.prepared_left(&Point::new(c))?;
            for k in 0..n {
                for syi in 0..2 {
                    vals[j][sxi][k][syi] = lt.apply_to_log(&ylogs[k][syi])?.coords;
                }
            }
        }
    }

    let denom = 4.0 * delta * delta;
    let mut g = Coeffs3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mixed = (vals[j][0][k][0][i] - vals[j][0][k][1][i] - vals[j][1][k][0][i]
                    + vals[j][1][k][1][i])
                    / denom;
                if !mixed.is_finite() {
                    return Err(GeoError::Numerics("non-finite reconstruction stencil".into()));
                }
                g.set(i, j, k, -mixed);
            }
        }
    }
    Ok(g)
}

/// Connection whose coefficients are multilinear interpolation of the
/// reconstructed `Gamma` over a regular grid of the given spacing, centered
/// at `center` with half-width `half_width`. Grid nodes are reconstructed
/// lazily and memoized.
pub fn interpolated_reconstruction(
    structure: &OdularStructure,
    center: &Point,
    half_width: f64,
    spacing: f64,
) -> Connection {
    let n = structure.connection.dim;
    let structure = structure.clone();
    let center_coords = center.coords.clone();
    let cache: Mutex<HashMap<Vec<i64>, Vec<f64>>> = Mutex::new(HashMap::new());
    let source_domain = structure.connection.clone();
    let name = format!("reconstructed({})", structure.connection.name);

    let node_value = move |structure: &OdularStructure, center: &[f64], idx: &[i64]| -> Vec<f64> {
        let p = Point::new(
            center
                .iter()
                .zip(idx)
                .map(|(c, i)| c + *i as f64 * spacing)
                .collect(),
        );
        match reconstruct_connection(structure, &p) {
            Ok(g) => g.data,
            Err(_) => vec![f64::NAN; n * n * n],
        }
    };

    let gamma = move |x: &[f64], out: &mut Coeffs3| {
        // multilinear interpolation over the 2^n surrounding nodes
        let mut base = vec![0i64; n];
        let mut frac = vec![0.0; n];
        for d in 0..n {
            let u = (x[d] - center_coords[d]) / spacing;
            let f = u.floor();
            base[d] = f as i64;
            frac[d] = u - f;
        }
        out.data.iter_mut().for_each(|v| *v = 0.0);
        let mut cache = cache.lock().unwrap();
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = base.clone();
            for d in 0..n {
                if corner & (1 << d) != 0 {
                    idx[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            let data = cache
                .entry(idx.clone())
                .or_insert_with(|| node_value(&structure, &center_coords, &idx))
                .clone();
            for (o, v) in out.data.iter_mut().zip(&data) {
                *o += w * v;
            }
        }
    };

    let center_for_domain = center.coords.clone();
    Connection::new(name, n, half_width, gamma).with_domain(
        move |x: &[f64]| {
            source_domain.in_domain(x)
                && x.iter()
                    .zip(&center_for_domain)
                    .all(|(a, b)| (a - b).abs() <= half_width)
        },
    )
}

/// Instance check that the structure rebuilt from its own tangent connection
/// reproduces L, omega and Lambda on the given samples.
pub fn verify_prop_2_2(
    conn: &Connection,
    a: &Point,
    samples: &[(Point, Point, f64)],
    radius: f64,
    params: &GeoParams,
    tol: f64,
) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let orig = OdularStructure::new(conn.clone(), params.clone(), radius);

    // grid reconstruction gets a coarser integration step; the bilinear
    // interpolation error dominates the budget anyway
    let grid_structure = OdularStructure::new(conn.clone(), params.clone().with_h(1e-2), radius);
    let half_width = 2.0 * radius + 0.1;
    let rebuilt_conn = interpolated_reconstruction(&grid_structure, a, half_width, 0.05);
    let rebuilt = OdularStructure::new(rebuilt_conn, params.clone(), radius);

    let mut sup_l: f64 = 0.0;
    let mut sup_omega: f64 = 0.0;
    let mut sup_lambda: f64 = 0.0;
    for (x, y, t) in samples {
        let l0 = orig.loop_l(x, a, y)?;
        let l1 = rebuilt.loop_l(x, a, y)?;
        sup_l = sup_l.max(linalg::dist(&l0.coords, &l1.coords));
        let o0 = orig.omega(*t, a, y)?;
        let o1 = rebuilt.omega(*t, a, y)?;
        sup_omega = sup_omega.max(linalg::dist(&o0.coords, &o1.coords));
        let m0 = orig.lambda(x, a, y)?;
        let m1 = rebuilt.lambda(x, a, y)?;
        sup_lambda = sup_lambda.max(linalg::dist(&m0.coords, &m1.coords));
    }

    let mut report = ResidualReport::new(format!("structure-rebuild[{}]", conn.name));
    let meta = json!({ "samples": samples.len(), "radius": radius });
    report.push("rebuild/L", "L rebuilt from tangent connection equals L", sup_l, tol, meta.clone());
    report.push(
        "rebuild/omega",
        "omega rebuilt from tangent connection equals omega",
        sup_omega,
        tol,
        meta.clone(),
    );
    report.push(
        "rebuild/lambda",
        "Lambda rebuilt from tangent connection equals Lambda",
        sup_lambda,
        tol,
        meta,
    );
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}
