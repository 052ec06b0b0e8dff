//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite and infinite
//! intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{BesqError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

impl QuadConfig {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        finite &= s.is_finite();
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), finite)
}

/// `∫_a^b f`. Either bound may be infinite; the integrand is never evaluated at
/// an infinite point.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_dyn(&f, a, b, cfg)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() {
        return Err(BesqError::NonFinite("integration bound"));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        let r = integrate_dyn(f, b, a, cfg)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, cfg),
        // x = a + t/(1-t)
        (true, false) => adaptive(
            &|t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            },
            0.0,
            1.0,
            cfg,
        ),
        // x = b - (1-t)/t
        (false, true) => adaptive(
            &|t: f64| {
                let s = (1.0 - t) / t;
                f(b - s) / (t * t)
            },
            0.0,
            1.0,
            cfg,
        ),
        (false, false) => {
            let half = QuadConfig { abs_tol: cfg.abs_tol / 2.0, ..*cfg };
            let l = integrate_dyn(f, f64::NEG_INFINITY, 0.0, &half)?;
            let r = integrate_dyn(f, 0.0, f64::INFINITY, &half)?;
            Ok(QuadResult {
                value: l.value + r.value,
                error: l.error + r.error,
                evaluations: l.evaluations + r.evaluations,
            })
        }
    }
}

fn adaptive<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let (v, e, ok) = gk15(f, a, b);
    let mut evaluations = 15;
    if !ok {
        return Err(BesqError::Quadrature { reason: "non-finite integrand", estimate: v, error: e, evaluations });
    }
    heap.push(Piece { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    loop {
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(QuadResult { value: total, error: err, evaluations });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(BesqError::Quadrature {
                reason: "subdivision limit reached",
                estimate: total,
                error: err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(BesqError::Quadrature {
                reason: "interval collapsed to machine resolution",
                estimate: total,
                error: err,
                evaluations,
            });
        }
        let (v1, e1, ok1) = gk15(f, worst.a, m);
        let (v2, e2, ok2) = gk15(f, m, worst.b);
        evaluations += 30;
        if !(ok1 && ok2) {
            return Err(BesqError::Quadrature { reason: "non-finite integrand", estimate: total, error: err, evaluations });
        }
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        // refresh the running sums now and then to shed accumulated rounding
        if evaluations % 3000 < 30 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
}
