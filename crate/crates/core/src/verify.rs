//! Verification suites over the manifold catalog. Each suite measures a
//! family of identities and returns a `ResidualReport`; the CLI and the
//! integration tests share these entry points.

use serde_json::json;

use crate::error::{GeoError, Result};
use crate::geo::{exp_map, integrate_geodesic, GeoParams};
use crate::jacobi::{
    self, eq10_residual, jacobi_solve, natural_fields, GridSpec, Theorem33Tols,
};
use crate::linalg;
use crate::loops::{self, reconstruct_connection, LoopContext, OdularStructure};
use crate::manifold::{catalog, poly_perturbed2, CatalogEntry, Point, TangentVector};
use crate::report::ResidualReport;
use crate::sample::Sampler;

pub const SUITE_NAMES: [&str; 11] = [
    "rk4-order",
    "loop-axioms",
    "monoassociativity",
    "reconstruction",
    "rebuild",
    "variation",
    "boundary-conditions",
    "structure",
    "natural-fields",
    "loop-exp",
    "jacobi-span",
];

/// Shared configuration of a verification run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub manifold: String,
    /// Neutral / base point; catalog default when absent.
    pub base: Option<Vec<f64>>,
    /// Working radius; catalog default when absent.
    pub radius: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub params: GeoParams,
    /// s-step of variation grids.
    pub ds: f64,
    /// t-step of variation grids.
    pub dt: f64,
    /// Perturbation strength for the polynomial catalog entry.
    pub epsilon: Option<f64>,
}

impl SuiteConfig {
    pub fn new(manifold: impl Into<String>) -> Self {
        SuiteConfig {
            manifold: manifold.into(),
            base: None,
            radius: None,
            seed: 7,
            samples: 20,
            params: GeoParams::default(),
            ds: 1e-3,
            dt: 1e-2,
            epsilon: None,
        }
    }

    pub fn entry(&self) -> Result<CatalogEntry> {
        match (self.manifold.as_str(), self.epsilon) {
            ("poly-perturbed2", Some(eps)) => Ok(poly_perturbed2(eps)),
            (name, _) => catalog(name),
        }
    }

    fn resolved(&self) -> Result<(CatalogEntry, Point, f64)> {
        let entry = self.entry()?;
        let base = match &self.base {
            Some(c) => {
                if c.len() != entry.connection.dim {
                    return Err(GeoError::InvalidInput(format!(
                        "base point has dimension {}, manifold has {}",
                        c.len(),
                        entry.connection.dim
                    )));
                }
                Point::new(c.clone())
            }
            None => entry.default_base.clone(),
        };
        let radius = self
            .radius
            .unwrap_or(entry.default_radius)
            .min(entry.connection.trust_radius);
        Ok((entry, base, radius))
    }

    fn context(&self) -> Result<(CatalogEntry, LoopContext)> {
        let (entry, base, radius) = self.resolved()?;
        let ctx = LoopContext::new(entry.connection.clone(), base, radius, self.params.clone())?;
        Ok((entry, ctx))
    }

    fn config_json(&self) -> serde_json::Value {
        json!({
            "manifold": self.manifold,
            "base": self.base,
            "radius": self.radius,
            "seed": self.seed,
            "samples": self.samples,
            "h": self.params.h,
            "fd_step": self.params.fd_step,
            "ds": self.ds,
            "dt": self.dt,
            "epsilon": self.epsilon,
        })
    }
}

pub fn is_curved(name: &str) -> bool {
    !name.starts_with("flat")
}

fn direction(sampler: &mut Sampler, dim: usize, len: f64) -> Vec<f64> {
    loop {
        let v = sampler.vector_in_ball(dim, 1.0);
        let n = linalg::norm(&v);
        if n > 0.1 {
            return linalg::scale(&v, len / n);
        }
    }
}

/// Integrator order check: endpoint errors at h, h/2, h/4 against the
/// closed-form exponential where available (a fine reference run otherwise)
/// must contract by at least 12x per halving.
pub fn verify_rk4_order(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let mut sampler = Sampler::new(cfg.seed);
    let steps = [1e-2, 5e-3, 2.5e-3];

    let mut worst_ratio = f64::INFINITY;
    let mut details = Vec::new();
    for _ in 0..3.min(cfg.samples) {
        let v = direction(&mut sampler, conn.dim, 0.9 * radius.min(1.0));
        let init = TangentVector::new(base.clone(), v.clone());
        let truth = match entry.closed_forms.exp.as_ref().and_then(|f| f(&init)) {
            Some(p) => p,
            None => integrate_geodesic(conn, &init, 1.0, 2.5e-4)?.position(1.0)?,
        };
        let errs: Vec<f64> = steps
            .iter()
            .map(|&h| {
                Ok(linalg::dist(
                    &integrate_geodesic(conn, &init, 1.0, h)?.position(1.0)?.coords,
                    &truth.coords,
                ))
            })
            .collect::<Result<_>>()?;
        for w in errs.windows(2) {
            worst_ratio = worst_ratio.min(w[0] / w[1]);
        }
        details.push(json!({ "v": v, "errors": errs }));
    }

    let mut report = ResidualReport::new(format!("rk4-order[{}]", conn.name));
    report.config = cfg.config_json();
    report.push(
        "rk4/order-4",
        "endpoint error contracts >= 12x per halving of h",
        (12.0 - worst_ratio).max(0.0),
        0.0,
        json!({ "worst_ratio": worst_ratio, "runs": details }),
    );
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Neutral-element axioms and division round trips of the geodesic loop.
pub fn verify_loop_axioms(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (_, ctx) = cfg.context()?;
    let a = ctx.neutral.clone();
    let mut sampler = Sampler::new(cfg.seed);

    let mut sup_left: f64 = 0.0;
    let mut sup_right: f64 = 0.0;
    let mut sup_omega1: f64 = 0.0;
    let mut sup_ldiv: f64 = 0.0;
    let mut sup_rdiv: f64 = 0.0;
    for i in 0..cfg.samples {
        let x = sampler.point_in_ball(&a, 0.8 * ctx.radius);
        let y = sampler.point_in_ball(&a, 0.8 * ctx.radius);
        let ln = ctx.loop_l(&a, &y)?;
        sup_left = sup_left.max(linalg::dist(&ln.coords, &y.coords));
        let rn = ctx.loop_l(&x, &a)?;
        sup_right = sup_right.max(linalg::dist(&rn.coords, &x.coords));
        let o1 = ctx.omega(1.0, &y)?;
        sup_omega1 = sup_omega1.max(linalg::dist(&o1.coords, &y.coords));
        // divisions are the expensive part; a handful of samples is enough
        if i < 5 {
            let z = ctx.loop_l(&x, &y)?;
            let y2 = ctx.left_divide(&x, &z)?;
            sup_ldiv = sup_ldiv.max(linalg::dist(&y2.coords, &y.coords));
            let x2 = ctx.right_divide(&z, &y)?;
            sup_rdiv = sup_rdiv.max(linalg::dist(&x2.coords, &x.coords));
        }
    }

    let mut report = ResidualReport::new(format!("loop-axioms[{}]", ctx.connection.name));
    report.config = cfg.config_json();
    let meta = json!({ "samples": cfg.samples });
    report.push("axiom/left-neutral", "L(a,a,y) = y", sup_left, 1e-9, meta.clone());
    report.push("axiom/right-neutral", "L(x,a,a) = x", sup_right, 1e-9, meta.clone());
    report.push("axiom/omega-unit", "omega_1(a,z) = z", sup_omega1, 1e-9, meta.clone());
    report.push("axiom/left-division", "x \\ L(x,y) = y", sup_ldiv, 1e-8, meta.clone());
    report.push("axiom/right-division", "L(x,y) / y = x", sup_rdiv, 1e-8, meta);
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Monoassociativity of powers: (t x)(u x) = (t + u) x.
pub fn verify_monoassociativity(
    cfg: &SuiteConfig,
    pairs: &[(f64, f64)],
) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (_, ctx) = cfg.context()?;
    let mut sampler = Sampler::new(cfg.seed);
    let points: Vec<Point> = (0..cfg.samples.min(5))
        .map(|_| sampler.point_in_ball(&ctx.neutral, 0.6 * ctx.radius))
        .collect();

    let mut report = ResidualReport::new(format!("monoassociativity[{}]", ctx.connection.name));
    report.config = cfg.config_json();
    for &(t, u) in pairs {
        let mut sup: f64 = 0.0;
        for x in &points {
            sup = sup.max(ctx.monoassociativity_residual(t, u, x)?);
        }
        report.push(
            format!("mono/t={t}-u={u}"),
            "(t x)(u x) = (t+u) x",
            sup,
            1e-7,
            json!({ "t": t, "u": u, "points": points.len() }),
        );
    }
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The mixed second derivative of the loop recovers the connection
/// coefficients at seeded points.
pub fn verify_reconstruction(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (entry, base, radius) = cfg.resolved()?;
    let structure = OdularStructure::new(entry.connection.clone(), cfg.params.clone(), radius);
    let mut sampler = Sampler::new(cfg.seed);

    let mut sup: f64 = 0.0;
    let count = cfg.samples.min(10);
    for _ in 0..count {
        let p = sampler.point_in_ball(&base, 0.5 * radius);
        let got = reconstruct_connection(&structure, &p)?;
        let want = entry.connection.eval_gamma(&p)?;
        for (g, w) in got.data.iter().zip(&want.data) {
            sup = sup.max((g - w).abs());
        }
    }

    let mut report = ResidualReport::new(format!("reconstruction[{}]", entry.connection.name));
    report.config = cfg.config_json();
    report.push(
        "reconstruction/gamma-match",
        "Gamma^i_jk = -d^2 L / dx^j dy^k at x = y = a",
        sup,
        5e-4,
        json!({ "points": count, "fd_step": cfg.params.fd_step }),
    );
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The structure rebuilt from its own tangent connection reproduces
/// L, omega and Lambda.
pub fn verify_rebuild(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let (entry, base, radius) = cfg.resolved()?;
    let mut sampler = Sampler::new(cfg.seed);
    let samples: Vec<(Point, Point, f64)> = (0..cfg.samples.min(10))
        .map(|_| {
            (
                sampler.point_in_ball(&base, 0.6 * radius),
                sampler.point_in_ball(&base, 0.6 * radius),
                sampler.uniform(-0.5, 1.0),
            )
        })
        .collect();
    let mut report = loops::verify_prop_2_2(
        &entry.connection,
        &base,
        &samples,
        radius,
        &cfg.params,
        1e-3,
    )?;
    report.config = cfg.config_json();
    Ok(report)
}

/// Jacobi fields reproduce infinitesimal geodesic variations, and the
/// discrepancy contracts at the expected second-order rate in ds.
pub fn verify_variation(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let mut sampler = Sampler::new(cfg.seed);
    let zeta = direction(&mut sampler, conn.dim, 0.6 * radius.min(1.0));
    let xi = direction(&mut sampler, conn.dim, 0.6 * radius.min(1.0));

    let curved = is_curved(&conn.name);
    let tol = if curved { 1e-4 } else { 1e-9 };
    let fine = GridSpec { ds: cfg.ds, dt: cfg.dt, s_max: 5.0 * cfg.ds };
    let mut report =
        jacobi::verify_theorem_3_1(conn, &base, &zeta, &xi, &fine, &cfg.params, tol)?;

    if curved {
        let coarse = GridSpec { ds: 4.0 * cfg.ds, dt: cfg.dt, s_max: 8.0 * cfg.ds };
        let coarse_report =
            jacobi::verify_theorem_3_1(conn, &base, &zeta, &xi, &coarse, &cfg.params, tol)?;
        let fine_res = report.entries[0].residual;
        let coarse_res = coarse_report.entries[0].residual;
        let ratio = coarse_res / fine_res.max(1e-300);
        report.push(
            "thm3.1/contraction",
            "discrepancy is O(ds^2): quartering ds contracts >= 12x",
            (12.0 - ratio).max(0.0),
            0.0,
            json!({ "coarse_ds": coarse.ds, "fine_ds": fine.ds,
                    "coarse_residual": coarse_res, "fine_residual": fine_res,
                    "ratio": ratio }),
        );
    }
    report.config = cfg.config_json();
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Boundary structure of the alpha variation (nonvanishing parallel boundary
/// field, geodesic rows, transported initial velocities).
pub fn verify_boundary_conditions(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let mut sampler = Sampler::new(cfg.seed);
    let zeta = direction(&mut sampler, conn.dim, 0.6 * radius.min(1.0));
    let xi = direction(&mut sampler, conn.dim, 0.6 * radius.min(1.0));
    let spec = GridSpec { ds: cfg.ds, dt: cfg.dt, s_max: 5.0 * cfg.ds };
    let mut report =
        jacobi::verify_lemma_3_2(conn, &base, &zeta, &xi, &spec, &cfg.params, 1e-7, 1e-5)?;
    report.config = cfg.config_json();
    Ok(report)
}

/// The loop structure emerges from variations: L, Lambda and omega computed
/// from geodesic grids match the loop-module operations.
pub fn verify_structure(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let mut sampler = Sampler::new(cfg.seed);
    let zeta = direction(&mut sampler, conn.dim, 0.5 * radius.min(1.0));
    let xi = direction(&mut sampler, conn.dim, 0.5 * radius.min(1.0));
    let eta = direction(&mut sampler, conn.dim, 0.4 * radius.min(1.0));
    let mut report = jacobi::verify_theorem_3_3(
        conn,
        &base,
        &zeta,
        &xi,
        &eta,
        radius,
        11,
        &cfg.params,
        &Theorem33Tols::default(),
    )?;
    report.config = cfg.config_json();
    Ok(report)
}

/// The natural fields Y and tY solve the deviation equation.
pub fn verify_natural_fields(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let mut sampler = Sampler::new(cfg.seed);

    let mut sup1: f64 = 0.0;
    let mut sup2: f64 = 0.0;
    let mut sup_init: f64 = 0.0;
    for _ in 0..cfg.samples.min(3) {
        let v = direction(&mut sampler, conn.dim, 0.8 * radius.min(1.0));
        let init = TangentVector::new(base.clone(), v.clone());
        let path = integrate_geodesic(conn, &init, 1.0, cfg.params.h)?;
        let (x1, x2) = natural_fields(&path);
        sup1 = sup1.max(eq10_residual(&x1)?);
        sup2 = sup2.max(eq10_residual(&x2)?);
        sup_init = sup_init
            .max(linalg::norm(&x2.value(0.0)?))
            .max(linalg::dist(&x2.derivative(0.0)?, &v));
    }

    let mut report = ResidualReport::new(format!("natural-fields[{}]", conn.name));
    report.config = cfg.config_json();
    report.push("natural/Y-deviation", "X = Y solves the deviation equation", sup1, 1e-6, json!({}));
    report.push("natural/tY-deviation", "X = tY solves the deviation equation", sup2, 1e-6, json!({}));
    report.push(
        "natural/tY-initial-data",
        "tY has X(0) = 0, DX/dt(0) = Y(0)",
        sup_init,
        1e-9,
        json!({}),
    );
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The loop exponential coincides with the geodesic exponential, and the
/// canonical operations coincide with omega and Lambda.
pub fn verify_loop_exp(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (_, ctx) = cfg.context()?;
    let mut sampler = Sampler::new(cfg.seed);

    let mut sup_exp: f64 = 0.0;
    for _ in 0..cfg.samples.min(10) {
        let v = sampler.vector_in_ball(ctx.connection.dim, 0.8 * ctx.radius);
        let le = ctx.loop_exponential(&v)?.endpoint();
        let ge = exp_map(
            &ctx.connection,
            &TangentVector::new(ctx.neutral.clone(), v.clone()),
            &ctx.params,
        )?;
        sup_exp = sup_exp.max(linalg::dist(&le.coords, &ge.coords));
    }

    let x = sampler.point_in_ball(&ctx.neutral, 0.5 * ctx.radius);
    let y = sampler.point_in_ball(&ctx.neutral, 0.5 * ctx.radius);
    let mut sup_scalar: f64 = 0.0;
    for t in [0.5, -0.5] {
        let c = ctx.canonical_scalar(t, &x)?;
        let o = ctx.omega(t, &x)?;
        sup_scalar = sup_scalar.max(linalg::dist(&c.coords, &o.coords));
    }
    let cs = ctx.canonical_sum(&x, &y)?;
    let lm = ctx.lambda(&x, &y)?;
    let sup_sum = linalg::dist(&cs.coords, &lm.coords);

    let mut report = ResidualReport::new(format!("loop-exp[{}]", ctx.connection.name));
    report.config = cfg.config_json();
    report.push(
        "loop-exp/coincides-with-exp",
        "loop exponential equals geodesic Exp",
        sup_exp,
        1e-6,
        json!({ "vectors": cfg.samples.min(10) }),
    );
    report.push("canonical/scalar-vs-omega", "t x = omega_t(a, x)", sup_scalar, 1e-6, json!({}));
    report.push("canonical/sum-vs-lambda", "x + y = Lambda(x, a, y)", sup_sum, 1e-6, json!({}));
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// The deviation equation has a full 2n-dimensional solution space: the
/// basis-solutions matrix at t = 0.5 stays uniformly nondegenerate.
pub fn verify_jacobi_span(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let (entry, base, radius) = cfg.resolved()?;
    let conn = &entry.connection;
    let n = conn.dim;
    let mut sampler = Sampler::new(cfg.seed);
    let v = direction(&mut sampler, n, 0.8 * radius.min(1.0));
    let path = integrate_geodesic(conn, &TangentVector::new(base.clone(), v), 1.0, cfg.params.h)?;

    // columns: solutions from the 2n basis initial data, stacked (X, W)
    let m = 2 * n;
    let mut mat = vec![0.0; m * m];
    for col in 0..m {
        let mut x0 = vec![0.0; n];
        let mut w0 = vec![0.0; n];
        if col < n {
            x0[col] = 1.0;
        } else {
            w0[col - n] = 1.0;
        }
        let f = jacobi_solve(conn, &path, &x0, &w0)?;
        let xv = f.value(0.5)?;
        let wv = f.derivative(0.5)?;
        for r in 0..n {
            mat[r * m + col] = xv[r];
            mat[(n + r) * m + col] = wv[r];
        }
    }
    let (smin, smax) = linalg::singular_extremes(&mat, m, m);
    let rel = smin / smax.max(1e-300);

    let mut report = ResidualReport::new(format!("jacobi-span[{}]", conn.name));
    report.config = cfg.config_json();
    report.push(
        "jacobi/solution-space-rank",
        "2n independent Jacobi solutions: sigma_min/sigma_max > 1e-6 at t = 0.5",
        (1e-6 - rel).max(0.0),
        0.0,
        json!({ "sigma_min": smin, "sigma_max": smax, "relative": rel }),
    );
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

pub const DEFAULT_MONO_PAIRS: [(f64, f64); 3] = [(0.3, 0.4), (-0.5, 0.7), (0.25, 0.25)];

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<ResidualReport> {
    match name {
        "rk4-order" => verify_rk4_order(cfg),
        "loop-axioms" => verify_loop_axioms(cfg),
        "monoassociativity" => verify_monoassociativity(cfg, &DEFAULT_MONO_PAIRS),
        "reconstruction" => verify_reconstruction(cfg),
        "rebuild" => verify_rebuild(cfg),
        "variation" => verify_variation(cfg),
        "boundary-conditions" => verify_boundary_conditions(cfg),
        "structure" => verify_structure(cfg),
        "natural-fields" => verify_natural_fields(cfg),
        "loop-exp" => verify_loop_exp(cfg),
        "jacobi-span" => verify_jacobi_span(cfg),
        other => Err(GeoError::InvalidInput(format!("unknown suite `{other}`"))),
    }
}

/// All suites for one manifold, merged into a single report with entries
/// prefixed by the suite name.
pub fn run_all(cfg: &SuiteConfig) -> Result<ResidualReport> {
    let start = std::time::Instant::now();
    let mut report = ResidualReport::new(format!("verify[{}]", cfg.manifold));
    report.config = cfg.config_json();
    for name in SUITE_NAMES {
        let mut sub = run_suite(name, cfg)?;
        for e in &mut sub.entries {
            e.id = format!("{name}/{}", e.id);
        }
        report.merge(sub);
    }
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}
