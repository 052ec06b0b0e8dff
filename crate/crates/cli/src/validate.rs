//! Identity suite behind `besq validate`. The transforms of `Σ` are computed
//! with a caller-chosen Bessel source so that a perturbed kernel shows up as a
//! failed check.

use besq::bessel::BesselSource;
use besq::inversion::{invert, max_gaver_stehfest_order, AnalyticPair, InversionConfig};
use besq::laws::{
    conditional_max_laplace, laplace_hitting_time, laplace_sigma_with, reversed_laplace, BarrierQuery, BesqParams,
    HalfOrder, SigmaQuery,
};
use besq::Result;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub identity: &'static str,
    pub points: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(identity: &'static str, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().fold(0.0f64, |m, &r| if r.is_nan() { f64::NAN } else { m.max(r) });
        Check { identity, points: residuals.len(), max_residual, tolerance, pass: max_residual <= tolerance }
    }
}

/// Deterministic points in `[0, 1)` from the additive golden-ratio sequence.
struct Weyl(f64);

impl Weyl {
    fn next(&mut self) -> f64 {
        self.0 = (self.0 + 0.618_033_988_749_894_9).fract();
        self.0
    }
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 { got.abs() } else { (got - want).abs() / want.abs() }
}

fn half_order(bessel: &dyn BesselSource<f64>, n: usize) -> Result<Check> {
    let mut u = Weyl(0.1);
    let nus = [-0.5, 0.5, -1.0, 1.0, -0.75, 0.75, 1.5, 2.0];
    let mut res = Vec::with_capacity(n);
    for k in 0..n {
        let h = HalfOrder::with_nu(nus[k % nus.len()])?;
        let x = if k % 10 == 0 { 0.0 } else { u.range(0.05, 4.0) };
        let y = if k % 10 == 5 { 0.0 } else { u.range(0.05, 4.0) };
        let lambda = 10f64.powf(u.range(-2.0, 2.0));
        let got = laplace_sigma_with(bessel, &SigmaQuery::new(h.params(), x, y, lambda)?)?;
        res.push(rel(got, h.laplace(x, y, lambda)));
    }
    Ok(Check::new("half-order oracle", &res, 1e-10))
}

fn time_change(bessel: &dyn BesselSource<f64>) -> Result<Check> {
    let mut u = Weyl(0.2);
    let mut res = Vec::new();
    for (k, (nu, p)) in [-0.75, 0.0, 1.0, 2.0].iter().flat_map(|&nu| [0.0, 0.5, 1.0, 2.0].map(|p| (nu, p))).enumerate() {
        for _ in 0..(if k < 4 { 7 } else { 6 }) {
            let (x, y) = (u.range(0.05, 4.0), u.range(0.05, 4.0));
            let lambda = 10f64.powf(u.range(-2.0, 1.5));
            let a = p + 1.0;
            let got = laplace_sigma_with(bessel, &SigmaQuery::new(BesqParams::new(nu, p)?, x, y, lambda)?)?;
            let want = laplace_hitting_time(nu / a, x.powf(a) / (a * a), y.powf(a) / (a * a), lambda)?;
            res.push(rel(got, want));
        }
    }
    Ok(Check::new("time change", &res, 1e-10))
}

fn scaling(bessel: &dyn BesselSource<f64>) -> Result<Check> {
    let mut u = Weyl(0.3);
    let mut res = Vec::new();
    for _ in 0..50 {
        let pr = BesqParams::new(u.range(0.0, 3.0), u.range(0.0, 2.0))?;
        let (y, lambda) = (u.range(0.1, 5.0), 10f64.powf(u.range(-2.0, 1.0)));
        let lhs = laplace_sigma_with(bessel, &SigmaQuery::new(pr, 0.0, y, lambda)?)?;
        let scaled = lambda * y.powf(pr.p() + 1.0);
        let rhs = laplace_sigma_with(bessel, &SigmaQuery::new(pr, 0.0, 1.0, scaled)?)?;
        res.push(rel(lhs, rhs));
    }
    Ok(Check::new("Brownian scaling", &res, 1e-10))
}

fn round_trip(digits: u32) -> Result<Check> {
    let pairs = [
        AnalyticPair::Constant,
        AnalyticPair::Exponential(1.0),
        AnalyticPair::Ramp,
        AnalyticPair::Gamma2,
        AnalyticPair::InverseSqrt,
    ];
    let order = max_gaver_stehfest_order(digits).min(28);
    let configs = [InversionConfig::gaver_stehfest(order).with_digits(digits), InversionConfig::talbot(24)];
    let mut res = Vec::new();
    for f in &pairs {
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for cfg in &configs {
                res.push((invert(f, t, cfg)? - f.original(t)).abs());
            }
        }
    }
    Ok(Check::new("inversion round trip", &res, 1e-8))
}

fn subordinator() -> Result<Check> {
    let pr = BesqParams::new(1.0, 1.0)?;
    let mut res = Vec::new();
    for x in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        for s in [0.01, 0.5, 2.0, 10.0, 300.0] {
            res.push((reversed_laplace(&pr, x, s)? - (-(s / 2.0f64).sqrt() * x).exp()).abs());
        }
    }
    Ok(Check::new("Z4 subordinator", &res, 1e-10))
}

fn conditional() -> Result<Check> {
    let mut u = Weyl(0.4);
    let mut res = Vec::new();
    for k in 0..50 {
        let h = HalfOrder::with_nu([-0.5, 0.5, -1.0, 1.0, 0.75][k % 5])?;
        let (mut x, mut y) = (u.range(0.2, 3.0), u.range(0.05, 3.0));
        let max_side = k % 2 == 0;
        if max_side == (x < y) {
            std::mem::swap(&mut x, &mut y);
        }
        let a = if max_side { x * u.range(1.1, 3.0) } else { x * u.range(0.0, 0.9) };
        let lambda = 10f64.powf(u.range(-1.0, 1.5));
        let got = conditional_max_laplace(&BarrierQuery::new(SigmaQuery::new(h.params(), x, y, lambda)?, a)?)?;
        let (zx, zy) = h.conditional_levels(x, y, a);
        res.push((got - laplace_hitting_time(0.5, zx, zy, lambda)?).abs());
    }
    Ok(Check::new("conditional law", &res, 1e-8))
}

pub fn run(bessel: &dyn BesselSource<f64>, digits: u32) -> Result<Vec<Check>> {
    Ok(vec![
        half_order(bessel, 200)?,
        time_change(bessel)?,
        scaling(bessel)?,
        round_trip(digits)?,
        subordinator()?,
        conditional()?,
    ])
}
