//! Small-ball limits of `Σ` and the empirical liminf experiment for
//! `Σ_{p,0,y}` as `y → ∞`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BesqError, Result};
use crate::inversion::log_cdf_sigma;
use crate::laws::{log_laplace_sigma, BesqParams, SigmaQuery};
use crate::simulate::{passage_sigmas, PathConfig};

/// Limits that do not depend on the index `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallBallTarget {
    /// `lim λ^{-1/2} ln E[exp(-λ Σ)]`.
    pub lt_rate: f64,
    /// `β` in `t ln P(Σ < t) → -β`; only defined for `p > 0`.
    pub sb_constant: Option<f64>,
    /// `liminf Σ_{p,0,y} / φ(y)`.
    pub lil_constant: f64,
}

fn level_gap(p: f64, x: f64, y: f64) -> f64 {
    let e = (p + 1.0) / 2.0;
    x.powf(e) - y.powf(e)
}

pub fn small_ball_targets(params: &BesqParams<f64>, x: f64, y: f64) -> Result<SmallBallTarget> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(BesqError::RegimeViolation(format!("levels must be finite and >= 0 (x = {x}, y = {y})")));
    }
    let p = params.p();
    let a = p + 1.0;
    let d = level_gap(p, x, y);
    Ok(SmallBallTarget {
        lt_rate: -std::f64::consts::SQRT_2 / a * d.abs(),
        sb_constant: (p > 0.0).then(|| d * d / (2.0 * a * a)),
        lil_constant: 1.0 / (2.0 * a * a),
    })
}

/// `10², 10³, …, 10⁸`.
pub fn default_lambda_grid() -> Vec<f64> {
    (2..=8).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub lambda: f64,
    pub rate: f64,
}

/// `λ^{-1/2} ln E[exp(-λ Σ)]` along `lambda_grid`, straight from the kernels.
pub fn lt_rate_empirical(params: &BesqParams<f64>, x: f64, y: f64, lambda_grid: &[f64]) -> Result<Vec<RatePoint>> {
    lambda_grid
        .par_iter()
        .map(|&lambda| {
            // our transforms discount by λ/2
            let l = log_laplace_sigma(&SigmaQuery::new(*params, x, y, 2.0 * lambda)?)?;
            Ok(RatePoint { lambda, rate: l / lambda.sqrt() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauberPoint {
    pub t: f64,
    pub log_cdf: f64,
    /// `t ln P(Σ ≤ t)`, tending to `-β`.
    pub scaled: f64,
}

/// `t ln P(Σ ≤ t)` along `t_grid` by saddle-point contour inversion.
pub fn tauberian_series(params: &BesqParams<f64>, x: f64, y: f64, t_grid: &[f64]) -> Result<Vec<TauberPoint>> {
    t_grid
        .par_iter()
        .map(|&t| {
            let log_cdf = log_cdf_sigma(params, x, y, t)?;
            Ok(TauberPoint { t, log_cdf, scaled: t * log_cdf })
        })
        .collect()
}

/// `φ(y) = y^{p+1} / ln ln y`, defined for `y > e`.
pub fn phi(y: f64, p: f64) -> f64 {
    y.powf(p + 1.0) / y.ln().ln()
}

/// `n` levels spaced geometrically from `e^e` (where `ln ln y = 1`) to `y_max`.
pub fn default_y_grid(y_max: f64, n: usize) -> Vec<f64> {
    let lo = std::f64::consts::E.exp().ln();
    let hi = y_max.ln();
    (0..n).map(|k| (lo + (hi - lo) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LilPath {
    /// `Σ_{p,0,y} / φ(y)` per level; `None` past the horizon.
    pub ratios: Vec<Option<f64>>,
    /// Minimum over the last half of the levels; `None` if censored there.
    pub proxy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LilReport {
    pub y_grid: Vec<f64>,
    pub paths: Vec<LilPath>,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub target: f64,
    pub censored: usize,
    /// Runs with `ν < 0` interact with the boundary at 0 and are indicative only.
    pub qualitative: bool,
}

/// Per-path tail minima of `Σ_{p,0,y}/φ(y)` from 0.
pub fn lil_experiment(params: &BesqParams<f64>, cfg: &PathConfig, y_grid: &[f64]) -> Result<LilReport> {
    cfg.validate()?;
    let p = params.p();
    if !(p > 0.0) {
        return Err(BesqError::RegimeViolation(format!("the liminf experiment needs p > 0, got {p}")));
    }
    if params.delta() < 0.0 {
        return Err(BesqError::RegimeViolation(format!("the path engine needs δ >= 0, got {}", params.delta())));
    }
    let e_e = std::f64::consts::E.exp();
    if y_grid.is_empty() || y_grid[0] < e_e * (1.0 - 1e-12) || y_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BesqError::InvalidConfig("levels must increase and start at e^e or above".into()));
    }
    let tail = y_grid.len() / 2;
    let paths: Vec<LilPath> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let ratios: Vec<Option<f64>> = passage_sigmas(params, 0.0, y_grid, cfg, i)
                .into_iter()
                .zip(y_grid)
                .map(|(s, &y)| s.map(|s| s / phi(y, p)))
                .collect();
            let proxy = ratios[tail..].iter().try_fold(f64::INFINITY, |m, r| r.map(|r| m.min(r)));
            LilPath { ratios, proxy }
        })
        .collect();
    let censored = paths.iter().filter(|l| l.proxy.is_none()).count();
    if 2 * censored > paths.len() {
        return Err(BesqError::CensoredMajority { censored, total: paths.len() });
    }
    let mut v: Vec<f64> = paths.iter().filter_map(|l| l.proxy).collect();
    v.sort_by(f64::total_cmp);
    let q = |f: f64| {
        let pos = f * (v.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        if i + 1 < v.len() { v[i] * (1.0 - frac) + v[i + 1] * frac } else { v[i] }
    };
    Ok(LilReport {
        y_grid: y_grid.to_vec(),
        median: q(0.5),
        lower_quartile: q(0.25),
        upper_quartile: q(0.75),
        target: 1.0 / (2.0 * (p + 1.0) * (p + 1.0)),
        censored,
        qualitative: params.nu() < 0.0,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets() {
        let pr = BesqParams::new(1.0, 1.0).unwrap();
        let t = small_ball_targets(&pr, 0.0, 1.0).unwrap();
        assert!((t.lt_rate + std::f64::consts::SQRT_2 / 2.0).abs() < 1e-15);
        assert_eq!(t.sb_constant, Some(0.125));
        assert_eq!(t.lil_constant, 0.125);
        let z = small_ball_targets(&pr, 2.0, 2.0).unwrap();
        assert_eq!((z.lt_rate, z.sb_constant), (0.0, Some(0.0)));
        for nu in [-0.5, 0.0, 3.0] {
            assert_eq!(small_ball_targets(&BesqParams::new(nu, 1.0).unwrap(), 0.0, 1.0).unwrap(), t);
        }
        assert_eq!(small_ball_targets(&BesqParams::new(0.0, 0.0).unwrap(), 0.0, 1.0).unwrap().sb_constant, None);
    }

    #[test]
    fn phi_at_e_to_the_e() {
        let y = std::f64::consts::E.exp();
        assert!((phi(y, 1.0) - y * y).abs() < 1e-9 * y * y);
        let g = default_y_grid(1e3, 5);
        assert!((g[0] - y).abs() < 1e-12 && (g[4] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn rate_is_zero_on_the_diagonal() {
        let pr = BesqParams::new(1.0, 1.0).unwrap();
        let r = lt_rate_empirical(&pr, 1.0, 1.0, &[1e2, 1e6]).unwrap();
        assert!(r.iter().all(|p| p.rate == 0.0));
    }

    #[test]
    fn rate_approaches_target() {
        let pr = BesqParams::new(0.0, 1.0).unwrap();
        let r = lt_rate_empirical(&pr, 0.0, 1.0, &default_lambda_grid()).unwrap();
        let target = small_ball_targets(&pr, 0.0, 1.0).unwrap().lt_rate;
        let err: Vec<f64> = r.iter().map(|p| (p.rate - target).abs()).collect();
        assert!(err.windows(2).all(|w| w[1] < w[0]));
        assert!(err[err.len() - 1] < 1e-3);
    }

    #[test]
    fn rejects_nonpositive_p() {
        let pr = BesqParams::new(1.0, 0.0).unwrap();
        assert!(lil_experiment(&pr, &PathConfig::new(1e-3, 4, 1), &default_y_grid(100.0, 4)).is_err());
    }
}
