//! Monte Carlo paths of the squared Bessel process with exact transitions.
//!
//! Steps sample the transition law directly. Level crossings between grid
//! points are caught with the Brownian-bridge approximation in `√X`, whose
//! local variance is `dt`. Everything here is f64.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BesqError, Result};
use crate::laws::BesqParams;

/// How the step size follows the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    Fixed,
    /// Step `h·max(1, X)`, for long runs to high levels.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathConfig {
    pub h: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub max_time: f64,
    pub hit_tol: f64,
    pub step_mode: StepMode,
}

impl PathConfig {
    pub fn new(h: f64, n_paths: usize, seed: u64) -> Self {
        Self { h, n_paths, seed, max_time: 1e3, hit_tol: 0.0, step_mode: StepMode::Fixed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(BesqError::InvalidConfig(format!("step must be positive, got {}", self.h)));
        }
        if self.n_paths == 0 {
            return Err(BesqError::InvalidConfig("need at least one path".into()));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return Err(BesqError::InvalidConfig(format!("horizon must be finite and positive, got {}", self.max_time)));
        }
        if !(self.hit_tol >= 0.0) {
            return Err(BesqError::InvalidConfig(format!("hit tolerance must be >= 0, got {}", self.hit_tol)));
        }
        Ok(())
    }

    fn step_at(&self, x: f64) -> f64 {
        match self.step_mode {
            StepMode::Fixed => self.h,
            StepMode::Relative => self.h * x.max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathResult {
    /// `None` when the horizon was reached first.
    pub hit_time: Option<f64>,
    /// `∫ X^p` up to the hit, or up to the horizon when censored.
    pub sigma: f64,
    pub max_level: f64,
    pub min_level: f64,
}

impl PathResult {
    pub fn censored(&self) -> bool {
        self.hit_time.is_none()
    }

    pub const CSV_HEADER: &'static str = "path_id,hit_time,sigma,max,min,censored";

    pub fn csv_row(&self, id: usize) -> String {
        let hit = self.hit_time.map_or(String::new(), |t| format!("{t:.17e}"));
        format!(
            "{id},{hit},{:.17e},{:.17e},{:.17e},{}",
            self.sigma,
            self.max_level,
            self.min_level,
            self.censored()
        )
    }
}

/// One exact transition of BESQ with dimension `delta` over time `h`.
///
/// `δ ≥ 1` uses `(√x + √h Z)² + h χ²_{δ-1}`. Smaller `δ` uses the Poisson
/// mixture `2h Γ(δ/2 + N)` with `N ~ Poisson(x/2h)`; for `δ = 0` and `N = 0`
/// the result is the trap at zero.
pub fn besq_step<R: Rng + ?Sized>(x: f64, h: f64, delta: f64, rng: &mut R) -> f64 {
    debug_assert!(x >= 0.0 && h > 0.0 && delta >= 0.0);
    if delta >= 1.0 {
        let z: f64 = StandardNormal.sample(rng);
        let g = x.sqrt() + h.sqrt() * z;
        let rest = if delta > 1.0 {
            ChiSquared::new(delta - 1.0).expect("positive degrees of freedom").sample(rng)
        } else {
            0.0
        };
        return g * g + h * rest;
    }
    let n = if x > 0.0 {
        Poisson::new(x / (2.0 * h)).expect("positive rate").sample(rng)
    } else {
        0.0
    };
    let shape = delta / 2.0 + n;
    if shape == 0.0 {
        return 0.0;
    }
    2.0 * h * Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

fn rng_for(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// `∫ X^p` across one step, trapezoid unless an endpoint sits at zero with
/// `p < 0`, where the exact integral of the linear interpolant is used.
fn sigma_piece(a: f64, b: f64, p: f64, dt: f64) -> f64 {
    if p < 0.0 && (a == 0.0 || b == 0.0) {
        if a == b {
            return f64::INFINITY;
        }
        let q = p + 1.0;
        return dt * (a.powf(q) - b.powf(q)) / (q * (a - b));
    }
    dt * (pow(a, p) + pow(b, p)) / 2.0
}

fn pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else {
        x.powf(p)
    }
}

/// Bridge extremes of `√X` between `a` and `b` over variance `dt`.
fn bridge_max(a: f64, b: f64, dt: f64, u: f64) -> f64 {
    let d = b - a;
    (a + b + (d * d - 2.0 * dt * u.ln()).sqrt()) / 2.0
}

fn bridge_min(a: f64, b: f64, dt: f64, u: f64) -> f64 {
    let d = b - a;
    ((a + b - (d * d - 2.0 * dt * u.ln()).sqrt()) / 2.0).max(0.0)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn check_engine(params: &BesqParams<f64>, x: f64, y: f64) -> Result<()> {
    if params.delta() < 0.0 {
        return Err(BesqError::RegimeViolation(format!(
            "the path engine needs δ >= 0, got δ = {}",
            params.delta()
        )));
    }
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(BesqError::RegimeViolation(format!("levels must be finite and >= 0 (x = {x}, y = {y})")));
    }
    Ok(())
}

/// Runs one path from `x` until it reaches `y` or the horizon.
pub fn simulate_path(params: &BesqParams<f64>, x: f64, y: f64, cfg: &PathConfig, path: usize) -> PathResult {
    let mut rng = rng_for(cfg.seed, path);
    let (p, delta) = (params.p(), params.delta());
    let up = y > x;
    let mut res = PathResult { hit_time: None, sigma: 0.0, max_level: x, min_level: x };
    if (x - y).abs() <= cfg.hit_tol {
        res.hit_time = Some(0.0);
        return res;
    }
    let target = y.sqrt();
    let (mut t, mut cur) = (0.0, x);
    while t < cfg.max_time {
        let dt = cfg.step_at(cur).min(cfg.max_time - t);
        let next = besq_step(cur, dt, delta, &mut rng);
        let (a, b) = (cur.sqrt(), next.sqrt());
        let (u_hi, u_lo) = (open_unit(&mut rng), open_unit(&mut rng));
        let hi = bridge_max(a, b, dt, u_hi);
        let lo = bridge_min(a, b, dt, u_lo);
        let crossed_end = if up { next >= y - cfg.hit_tol } else { next <= y + cfg.hit_tol };
        let crossed_bridge = if up { hi >= target } else { lo <= target };
        if crossed_end || crossed_bridge {
            // fraction of the step before the crossing
            let theta = if crossed_end && next != cur { ((y - cur) / (next - cur)).clamp(0.0, 1.0) } else { 0.5 };
            res.sigma += sigma_piece(cur, y, p, theta * dt);
            res.hit_time = Some(t + theta * dt);
            if up {
                res.max_level = res.max_level.max(y);
            } else {
                res.min_level = res.min_level.min(y);
            }
            return res;
        }
        res.sigma += sigma_piece(cur, next, p, dt);
        res.max_level = res.max_level.max(hi * hi);
        res.min_level = res.min_level.min(lo * lo);
        t += dt;
        cur = next;
    }
    res
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub paths: Vec<PathResult>,
}

impl PathBatch {
    pub fn censored(&self) -> usize {
        self.paths.iter().filter(|r| r.censored()).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored() as f64 / self.paths.len() as f64
    }

    /// Errors when more than half of the paths were censored.
    pub fn check_censoring(&self) -> Result<()> {
        let c = self.censored();
        if 2 * c > self.paths.len() {
            return Err(BesqError::CensoredMajority { censored: c, total: self.paths.len() });
        }
        Ok(())
    }

    /// Sample mean and standard error of `f` over all paths.
    pub fn mean<F: Fn(&PathResult) -> f64 + Sync>(&self, f: F) -> Estimate {
        let values: Vec<f64> = self.paths.par_iter().map(&f).collect();
        Estimate::from_values(&values, self.censored_fraction())
    }
}

/// Paths in parallel; the output is ordered by path index, so it does not
/// depend on the worker count.
pub fn run_paths(params: &BesqParams<f64>, x: f64, y: f64, cfg: &PathConfig) -> Result<PathBatch> {
    cfg.validate()?;
    check_engine(params, x, y)?;
    let paths = (0..cfg.n_paths).into_par_iter().map(|i| simulate_path(params, x, y, cfg, i)).collect();
    Ok(PathBatch { paths })
}

/// Neumaier-compensated sum in a fixed order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
    pub censored_fraction: f64,
}

impl Estimate {
    pub fn from_values(values: &[f64], censored_fraction: f64) -> Self {
        let n = values.len();
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let var = if n > 1 {
            compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64
        } else {
            0.0
        };
        Self { mean, std_error: (var / n as f64).sqrt(), n, censored_fraction }
    }

    /// `|mean - value|` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.std_error == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / self.std_error
        }
    }
}

/// Transform estimate with the spread that censoring leaves open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceEstimate {
    /// Censored paths contribute zero.
    pub estimate: Estimate,
    /// Censored paths contribute their discount so far.
    pub upper_bound: f64,
}

/// `E_x[exp(-(λ/2) Σ); R_y < ∞]` by Monte Carlo.
pub fn estimate_laplace(params: &BesqParams<f64>, x: f64, y: f64, lambda: f64, cfg: &PathConfig) -> Result<LaplaceEstimate> {
    let batch = run_paths(params, x, y, cfg)?;
    Ok(laplace_from_batch(&batch, lambda))
}

pub fn laplace_from_batch(batch: &PathBatch, lambda: f64) -> LaplaceEstimate {
    let discount = |r: &PathResult| (-lambda / 2.0 * r.sigma).exp();
    let estimate = batch.mean(|r| if r.censored() { 0.0 } else { discount(r) });
    let slack = compensated_sum(batch.paths.iter().filter(|r| r.censored()).map(discount)) / batch.paths.len() as f64;
    LaplaceEstimate { estimate, upper_bound: estimate.mean + slack }
}

/// `E_x[exp(-(λ/2) Σ); R_a > R_y]`: the path must reach `y` before `a`.
pub fn estimate_joint_barrier(
    params: &BesqParams<f64>,
    x: f64,
    y: f64,
    a: f64,
    lambda: f64,
    cfg: &PathConfig,
) -> Result<Estimate> {
    let upper = a > x;
    if (a - x) * (a - y) <= 0.0 || (upper && y > x) || (!upper && y < x) {
        return Err(BesqError::Orientation(format!("barrier a = {a} must lie beyond x = {x} away from y = {y}")));
    }
    let batch = run_paths(params, x, y, cfg)?;
    Ok(batch.mean(|r| {
        let inside = if upper { r.max_level < a } else { r.min_level > a };
        if r.censored() || !inside { 0.0 } else { (-lambda / 2.0 * r.sigma).exp() }
    }))
}

/// `E_x[exp(-r R_y - (λ/2) Σ)]` by Monte Carlo.
pub fn estimate_joint_time(
    params: &BesqParams<f64>,
    x: f64,
    y: f64,
    r: f64,
    lambda: f64,
    cfg: &PathConfig,
) -> Result<Estimate> {
    let batch = run_paths(params, x, y, cfg)?;
    Ok(batch.mean(|res| match res.hit_time {
        Some(t) => (-r * t - lambda / 2.0 * res.sigma).exp(),
        None => 0.0,
    }))
}

/// `Σ_{p,x,y}` recorded at the first passage of every level in `levels`
/// (increasing, all above `x`) along one upward path.
pub fn passage_sigmas(params: &BesqParams<f64>, x: f64, levels: &[f64], cfg: &PathConfig, path: usize) -> Vec<Option<f64>> {
    let mut rng = rng_for(cfg.seed, path);
    let (p, delta) = (params.p(), params.delta());
    let mut out = vec![None; levels.len()];
    let (mut t, mut cur, mut sigma) = (0.0, x, 0.0);
    let mut k = 0;
    while k < levels.len() && levels[k] <= x {
        out[k] = Some(0.0);
        k += 1;
    }
    while k < levels.len() && t < cfg.max_time {
        let dt = cfg.step_at(cur).min(cfg.max_time - t);
        let next = besq_step(cur, dt, delta, &mut rng);
        let hi = bridge_max(cur.sqrt(), next.sqrt(), dt, open_unit(&mut rng));
        while k < levels.len() && (next >= levels[k] || hi >= levels[k].sqrt()) {
            let y = levels[k];
            let theta = if next >= y && next != cur { ((y - cur) / (next - cur)).clamp(0.0, 1.0) } else { 0.5 };
            out[k] = Some(sigma + sigma_piece(cur, y, p, theta * dt));
            k += 1;
        }
        sigma += sigma_piece(cur, next, p, dt);
        t += dt;
        cur = next;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasRow {
    pub h: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub reference: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasStudy {
    pub rows: Vec<BiasRow>,
    /// Least-squares intercept of the estimates against `h`.
    pub intercept: f64,
    /// `log2` of successive error ratios along a halving ladder.
    pub observed_order: Option<f64>,
}

/// Laplace estimates across step sizes with common random numbers, against
/// `reference` (normally the closed form).
pub fn bias_study(
    params: &BesqParams<f64>,
    x: f64,
    y: f64,
    lambda: f64,
    h_list: &[f64],
    reference: f64,
    base: &PathConfig,
) -> Result<BiasStudy> {
    if h_list.is_empty() {
        return Err(BesqError::InvalidConfig("empty step list".into()));
    }
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let est = estimate_laplace(params, x, y, lambda, &PathConfig { h, ..*base })?.estimate;
        rows.push(BiasRow { h, estimate: est.mean, std_error: est.std_error, reference, error: est.mean - reference });
    }
    let n = rows.len() as f64;
    let (mh, me) = (rows.iter().map(|r| r.h).sum::<f64>() / n, rows.iter().map(|r| r.estimate).sum::<f64>() / n);
    let sxx: f64 = rows.iter().map(|r| (r.h - mh).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| (r.h - mh) * (r.estimate - me)).sum();
    let intercept = if sxx > 0.0 { me - sxy / sxx * mh } else { me };
    let observed_order = if rows.len() >= 3 {
        let k = rows.len();
        let (d1, d2) = (rows[k - 3].estimate - rows[k - 2].estimate, rows[k - 2].estimate - rows[k - 1].estimate);
        let ratio = (h_list[k - 3] / h_list[k - 2]).ln();
        let order = (d1 / d2).abs().ln() / ratio;
        order.is_finite().then_some(order)
    } else {
        None
    };
    Ok(BiasStudy { rows, intercept, observed_order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(x: f64, h: f64, delta: f64, n: usize) -> (f64, f64, f64, f64) {
        let mut rng = rng_for(7, 0);
        let v: Vec<f64> = (0..n).map(|_| besq_step(x, h, delta, &mut rng)).collect();
        let e = Estimate::from_values(&v, 0.0);
        let sq: Vec<f64> = v.iter().map(|s| (s - e.mean).powi(2)).collect();
        let ev = Estimate::from_values(&sq, 0.0);
        (e.mean, e.std_error, ev.mean, ev.std_error)
    }

    #[test]
    fn transition_moments() {
        for delta in [4.0, 0.6, 1.0] {
            let (m, se, v, vse) = moments(1.0, 0.01, delta, 400_000);
            assert!((m - (1.0 + delta * 0.01)).abs() < 4.0 * se, "δ={delta} mean {m}");
            let var = 4.0 * 0.01 + 2.0 * delta * 1e-4;
            assert!((v - var).abs() < 4.0 * vse, "δ={delta} var {v} vs {var}");
        }
    }

    #[test]
    fn zero_is_a_trap_without_drift() {
        let mut rng = rng_for(1, 0);
        for _ in 0..100 {
            assert_eq!(besq_step(0.0, 0.1, 0.0, &mut rng), 0.0);
        }
    }

    #[test]
    fn start_at_target() {
        let pr = BesqParams::new(1.0, 1.0).unwrap();
        let b = run_paths(&pr, 0.5, 0.5, &PathConfig::new(1e-3, 10, 3)).unwrap();
        assert!(b.paths.iter().all(|r| r.hit_time == Some(0.0) && r.sigma == 0.0));
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let pr = BesqParams::new(0.5, 1.0).unwrap();
        let cfg = PathConfig::new(1e-3, 64, 11);
        let a = run_paths(&pr, 0.0, 1.0, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_paths(&pr, 0.0, 1.0, &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(simulate_path(&pr, 0.0, 1.0, &cfg, 17), a.paths[17]);
    }

    #[test]
    fn extremes_bracket_the_path() {
        let pr = BesqParams::new(1.0, 1.0).unwrap();
        let b = run_paths(&pr, 1.0, 0.5, &PathConfig::new(1e-3, 50, 5)).unwrap();
        for r in &b.paths {
            assert!(r.sigma >= 0.0 && r.max_level >= 1.0);
            assert!(r.censored() || r.min_level <= 0.5);
        }
    }

    #[test]
    fn censoring_is_reported() {
        // ν > 0 rarely returns to a low level
        let pr = BesqParams::new(2.0, 1.0).unwrap();
        let cfg = PathConfig { max_time: 1.0, ..PathConfig::new(1e-2, 40, 2) };
        let b = run_paths(&pr, 5.0, 0.01, &cfg).unwrap();
        assert!(matches!(b.check_censoring(), Err(BesqError::CensoredMajority { .. })));
        let l = laplace_from_batch(&b, 2.0);
        assert!(l.upper_bound > l.estimate.mean);
    }

    #[test]
    fn bad_inputs_rejected() {
        let pr = BesqParams::new(-1.0, 1.0).unwrap();
        assert!(run_paths(&pr, 1.0, -0.5, &PathConfig::new(1e-3, 4, 1)).is_err());
        assert!(PathConfig::new(0.0, 4, 1).validate().is_err());
    }

    #[test]
    fn passage_levels_are_monotone() {
        let pr = BesqParams::new(1.0, 1.0).unwrap();
        let cfg = PathConfig { step_mode: StepMode::Relative, ..PathConfig::new(1e-3, 1, 9) };
        let s = passage_sigmas(&pr, 0.0, &[0.5, 1.0, 4.0, 16.0], &cfg, 0);
        let v: Vec<f64> = s.into_iter().map(Option::unwrap).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}
