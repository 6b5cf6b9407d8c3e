//! Independent closed-form oracle for the stereographic sphere chart.
//!
//! Every operation here is exact 3D vector algebra on the embedded unit
//! sphere — no ODEs, no Newton solves — so agreement with the library is a
//! genuine cross-check, not a self-comparison. The chart is the projection
//! u = (p1, p2) / (1 + p3), whose pullback metric is 4/(1+|u|^2)^2 delta.

pub type V3 = [f64; 3];

pub fn to_sphere(u: &[f64]) -> V3 {
    let r2 = u[0] * u[0] + u[1] * u[1];
    let s = 1.0 + r2;
    [2.0 * u[0] / s, 2.0 * u[1] / s, (1.0 - r2) / s]
}

pub fn to_chart(p: &V3) -> Vec<f64> {
    vec![p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2])]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy(a: f64, x: &V3, y: &V3) -> V3 {
    [a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2]]
}

fn scale3(a: f64, x: &V3) -> V3 {
    [a * x[0], a * x[1], a * x[2]]
}

fn norm3(x: &V3) -> f64 {
    dot(x, x).sqrt()
}

/// Jacobian dP/du of the chart embedding, 3 rows x 2 columns.
pub fn embedding_jacobian(u: &[f64]) -> [[f64; 2]; 3] {
    let r2 = u[0] * u[0] + u[1] * u[1];
    let s = 1.0 + r2;
    let s2 = s * s;
    [
        [(2.0 * s - 4.0 * u[0] * u[0]) / s2, -4.0 * u[0] * u[1] / s2],
        [-4.0 * u[0] * u[1] / s2, (2.0 * s - 4.0 * u[1] * u[1]) / s2],
        [-4.0 * u[0] / s2, -4.0 * u[1] / s2],
    ]
}

/// Push chart components to an embedded tangent vector.
pub fn push(u: &[f64], v: &[f64]) -> V3 {
    let j = embedding_jacobian(u);
    [
        j[0][0] * v[0] + j[0][1] * v[1],
        j[1][0] * v[0] + j[1][1] * v[1],
        j[2][0] * v[0] + j[2][1] * v[1],
    ]
}

/// Pull an embedded tangent vector back to chart components
/// (normal equations of the 3x2 Jacobian).
pub fn pull(u: &[f64], v: &V3) -> Vec<f64> {
    let j = embedding_jacobian(u);
    let mut jtj = [[0.0; 2]; 2];
    let mut jtv = [0.0; 2];
    for r in 0..3 {
        for a in 0..2 {
            for b in 0..2 {
                jtj[a][b] += j[r][a] * j[r][b];
            }
            jtv[a] += j[r][a] * v[r];
        }
    }
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    vec![
        (jtv[0] * jtj[1][1] - jtv[1] * jtj[0][1]) / det,
        (jtv[1] * jtj[0][0] - jtv[0] * jtj[1][0]) / det,
    ]
}

/// Great-circle exponential: Exp_p(v) = cos|v| p + sin|v| v/|v|.
pub fn sphere_exp(p: &V3, v: &V3) -> V3 {
    let t = norm3(v);
    if t == 0.0 {
        return *p;
    }
    axpy(t.sin() / t, v, &scale3(t.cos(), p))
}

/// Inverse of the great-circle exponential.
pub fn sphere_log(p: &V3, q: &V3) -> V3 {
    let c = dot(p, q).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta < 1e-14 {
        return [0.0; 3];
    }
    let rej = axpy(-c, p, q); // q - (p . q) p
    scale3(theta / norm3(&rej), &rej)
}

/// Parallel transport of tangent w from p to q along the connecting
/// great-circle arc.
pub fn sphere_transport(p: &V3, q: &V3, w: &V3) -> V3 {
    let c = dot(p, q).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta < 1e-14 {
        return *w;
    }
    let rej = axpy(-c, p, q);
    let e = scale3(1.0 / norm3(&rej), &rej); // unit tangent at p toward q
    let along = dot(w, &e);
    // direction of the geodesic continued at q
    let e_at_q = axpy(-theta.sin(), p, &scale3(theta.cos(), &e));
    let mut out = axpy(-along, &e, w); // orthogonal part is untouched
    out = axpy(along, &e_at_q, &out);
    out
}

/// L(x, a, y) = Exp_x tau^a_x Exp^-1_a y, entirely in closed form,
/// chart coordinates in and out.
pub fn oracle_loop_l(x: &[f64], a: &[f64], y: &[f64]) -> Vec<f64> {
    let (pa, px, py) = (to_sphere(a), to_sphere(x), to_sphere(y));
    let v = sphere_log(&pa, &py);
    let w = sphere_transport(&pa, &px, &v);
    to_chart(&sphere_exp(&px, &w))
}

pub fn oracle_omega(t: f64, a: &[f64], z: &[f64]) -> Vec<f64> {
    let (pa, pz) = (to_sphere(a), to_sphere(z));
    let v = sphere_log(&pa, &pz);
    to_chart(&sphere_exp(&pa, &scale3(t, &v)))
}

pub fn oracle_lambda(x: &[f64], a: &[f64], y: &[f64]) -> Vec<f64> {
    let pa = to_sphere(a);
    let vx = sphere_log(&pa, &to_sphere(x));
    let vy = sphere_log(&pa, &to_sphere(y));
    let sum = axpy(1.0, &vx, &vy);
    to_chart(&sphere_exp(&pa, &sum))
}

/// Exp in chart coordinates: chart components in, chart point out.
pub fn oracle_exp(a: &[f64], v_chart: &[f64]) -> Vec<f64> {
    let pa = to_sphere(a);
    to_chart(&sphere_exp(&pa, &push(a, v_chart)))
}

/// Log in chart coordinates.
pub fn oracle_log(a: &[f64], y: &[f64]) -> Vec<f64> {
    let pa = to_sphere(a);
    pull(a, &sphere_log(&pa, &to_sphere(y)))
}

/// Chart components at x of the transport of chart vector v from a to x.
pub fn oracle_transport_chart(a: &[f64], x: &[f64], v_chart: &[f64]) -> Vec<f64> {
    let (pa, px) = (to_sphere(a), to_sphere(x));
    pull(x, &sphere_transport(&pa, &px, &push(a, v_chart)))
}
