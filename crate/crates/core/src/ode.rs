//! Dormand–Prince 5(4) with adaptive steps for small non-stiff systems.

use crate::error::{BesqError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_steps: 200_000 }
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn dopri5<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, cfg: &OdeConfig) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut h = dir * (span.abs() * 1e-3).max(1e-8);
    for _ in 0..cfg.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let mut acc = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                if s < 6 {
                    acc += A[6][s] * k[s][i];
                }
                e += E[s] * k[s][i];
            }
            y_new[i] += h * acc;
            let scale = cfg.atol + cfg.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e / scale).abs());
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(BesqError::Ode(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k0 = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(BesqError::Ode(format!("step size underflow near t = {t}")));
        }
    }
    Err(BesqError::Ode(format!("step budget of {} exhausted at t = {t}", cfg.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let y = dopri5(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0, &OdeConfig::default()).unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
        let y = dopri5(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &OdeConfig::default()).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        let back = dopri5(|_, y: &[f64; 1]| [y[0]], 2.0, [1.0], 0.0, &OdeConfig::default()).unwrap();
        assert!((back[0] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_errors() {
        let cfg = OdeConfig { max_steps: 3, ..OdeConfig::default() };
        assert!(dopri5(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 50.0, &cfg).is_err());
    }
}
