//! Fixed-step classical RK4 with dense output.
//!
//! Samples store both the state and its derivative, so any query point is
//! recovered by cubic Hermite interpolation, which keeps the O(h^4)
//! accuracy of the integrator.

use crate::error::{GeoError, Result};

/// Right-hand side of an ODE: writes dy/dt into `out`.
pub trait Rhs {
    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()>;
}

impl<F: Fn(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for F {
    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        self(t, y, out)
    }
}

/// Dense RK4 solution over a span that contains t = 0.
#[derive(Debug, Clone)]
pub struct DenseOutput {
    ts: Vec<f64>,
    ys: Vec<Vec<f64>>,
    dys: Vec<Vec<f64>>,
}

impl DenseOutput {
    pub(crate) fn from_samples(ts: Vec<f64>, ys: Vec<Vec<f64>>, dys: Vec<Vec<f64>>) -> Self {
        DenseOutput { ts, ys, dys }
    }

    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.ts
    }

    pub fn sample_states(&self) -> &[Vec<f64>] {
        &self.ys
    }

    pub fn sample_derivs(&self) -> &[Vec<f64>] {
        &self.dys
    }

    /// Cubic Hermite evaluation of the state at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = (self.t_start(), self.t_end());
        let tol = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        if t < lo - tol || t > hi + tol {
            return Err(GeoError::OutOfRange { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        // locate interval
        let k = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.ys[i].clone()),
            Err(i) => i.saturating_sub(1).min(self.ts.len() - 2),
        };
        let (t0, t1) = (self.ts[k], self.ts[k + 1]);
        let dt = t1 - t0;
        let u = (t - t0) / dt;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let (y0, y1) = (&self.ys[k], &self.ys[k + 1]);
        let (d0, d1) = (&self.dys[k], &self.dys[k + 1]);
        Ok((0..y0.len())
            .map(|i| h00 * y0[i] + h10 * dt * d0[i] + h01 * y1[i] + h11 * dt * d1[i])
            .collect())
    }
}

fn rk4_run<R: Rhs>(rhs: &R, y0: &[f64], t_final: f64, h: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = y0.len();
    let span = t_final.abs();
    let steps = (span / h).ceil().max(1.0) as usize;
    let dir = t_final.signum();

    let mut ts = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    let mut dys = Vec::with_capacity(steps + 1);

    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    rhs.eval(t, &y, &mut k1)?;
    ts.push(t);
    ys.push(y.clone());
    dys.push(k1.clone());

    for s in 0..steps {
        let remaining = span - s as f64 * h;
        let hs = dir * h.min(remaining);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * hs * k1[i];
        }
        rhs.eval(t + 0.5 * hs, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * hs * k2[i];
        }
        rhs.eval(t + 0.5 * hs, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + hs * k3[i];
        }
        rhs.eval(t + hs, &tmp, &mut k4)?;
        for i in 0..n {
            y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += hs;
        rhs.eval(t, &y, &mut k1)?;
        ts.push(t);
        ys.push(y.clone());
        dys.push(k1.clone());
    }
    Ok((ts, ys, dys))
}

/// Integrate from the initial condition at t = 0 over `[t_from, t_to]`
/// (with `t_from <= 0 <= t_to`) at fixed step `h > 0`.
pub fn integrate<R: Rhs>(rhs: &R, y0: &[f64], t_from: f64, t_to: f64, h: f64) -> Result<DenseOutput> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeoError::InvalidInput(format!("step h = {h} must be positive")));
    }
    if t_from > 0.0 || t_to < 0.0 || t_from >= t_to {
        return Err(GeoError::InvalidInput(format!(
            "span [{t_from}, {t_to}] must contain 0"
        )));
    }
    let (mut ts, mut ys, mut dys) = if t_from < 0.0 {
        let (bt, by, bd) = rk4_run(rhs, y0, t_from, h)?;
        let mut ts: Vec<f64> = bt.into_iter().rev().collect();
        let mut ys: Vec<Vec<f64>> = by.into_iter().rev().collect();
        let mut dys: Vec<Vec<f64>> = bd.into_iter().rev().collect();
        // drop duplicated t = 0 node; forward run re-adds it
        ts.pop();
        ys.pop();
        dys.pop();
        (ts, ys, dys)
    } else {
        (vec![], vec![], vec![])
    };
    if t_to > 0.0 {
        let (ft, fy, fd) = rk4_run(rhs, y0, t_to, h)?;
        ts.extend(ft);
        ys.extend(fy);
        dys.extend(fd);
    } else {
        let mut k = vec![0.0; y0.len()];
        rhs.eval(0.0, y0, &mut k)?;
        ts.push(0.0);
        ys.push(y0.to_vec());
        dys.push(k);
    }
    Ok(DenseOutput { ts, ys, dys })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_rhs(_t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = y[0];
        Ok(())
    }

    #[test]
    fn scalar_exponential() {
        let sol = integrate(&exp_rhs, &[1.0], 0.0, 1.0, 1e-3).unwrap();
        let y = sol.eval(1.0).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn dense_output_between_nodes() {
        let sol = integrate(&exp_rhs, &[1.0], 0.0, 1.0, 1e-2).unwrap();
        let y = sol.eval(0.5551).unwrap();
        assert!((y[0] - 0.5551_f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn backward_span() {
        let sol = integrate(&exp_rhs, &[1.0], -1.0, 1.0, 1e-3).unwrap();
        let y = sol.eval(-1.0).unwrap();
        assert!((y[0] - (-1.0_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn out_of_range_query() {
        let sol = integrate(&exp_rhs, &[1.0], 0.0, 1.0, 1e-2).unwrap();
        assert!(matches!(sol.eval(1.5), Err(GeoError::OutOfRange { .. })));
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |h: f64| {
            let sol = integrate(&exp_rhs, &[1.0], 0.0, 1.0, h).unwrap();
            (sol.eval(1.0).unwrap()[0] - std::f64::consts::E).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!(ratio > 12.0, "expected ~16x contraction, got {ratio}");
    }
}
