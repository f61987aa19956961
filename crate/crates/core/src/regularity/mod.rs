//! Moduli of continuity, the Dini test, the integral `h`, model domains and
//! graph charts.

mod chart;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::adaptive_simpson;

pub use chart::{
    bundled_chart, estimate_modulus, ex21_chart, ex22_chart, flat_chart, sample_gradient_pairs, select_embedding_params,
    tilted_chart, verify_embedding, verify_lipschitz_sandwich, ChartRegularity, EmbeddingReport, GraphChart,
    GraphFn, GraphGradFn, SandwichFit, BUNDLED_CHARTS,
};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of dyadic levels used by the Dini test.
pub const DINI_LEVELS: usize = 60;
const DINI_WINDOW: usize = 20;
/// Decay exponents at or below this are treated as divergent.
const DIVERGENCE_EXPONENT: f64 = 1.001;

#[derive(Clone)]
enum Form {
    Closed { f: RealFn, label: String },
    Table(Vec<(f64, f64)>),
}

/// A nondecreasing rate `ω` with `ω(0) = 0`, given in closed form or as a
/// monotone table with linear interpolation.
#[derive(Clone)]
pub struct ModulusOfContinuity {
    form: Form,
    domain_end: f64,
}

impl std::fmt::Debug for ModulusOfContinuity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.form {
            Form::Closed { label, .. } => write!(f, "Modulus({label}, end={})", self.domain_end),
            Form::Table(t) => write!(f, "Modulus(table[{}], end={})", t.len(), self.domain_end),
        }
    }
}

impl ModulusOfContinuity {
    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static, domain_end: f64) -> Self {
        ModulusOfContinuity {
            form: Form::Closed {
                f: Arc::new(f),
                label: label.into(),
            },
            domain_end,
        }
    }

    /// Parses an expression in the variable `r`.
    pub fn from_expr(src: &str, domain_end: f64) -> Result<Self> {
        let e = Expr::parse(src, &["r"])?;
        let label = e.source().to_string();
        Ok(Self::from_fn(label, move |r| e.eval_real(&[r]), domain_end))
    }

    pub fn zero(domain_end: f64) -> Self {
        Self::from_fn("0", |_| 0.0, domain_end)
    }

    /// Monotone envelope (running maximum) of raw `(r, value)` samples, anchored at `(0, 0)`.
    pub fn from_samples(mut pts: Vec<(f64, f64)>) -> Result<Self> {
        pts.retain(|p| p.0 > 0.0 && p.0.is_finite() && p.1.is_finite());
        if pts.is_empty() {
            return Err(Error::InvalidArgument("modulus table needs a positive abscissa".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut table = vec![(0.0, 0.0)];
        let mut run: f64 = 0.0;
        for (r, w) in pts {
            run = run.max(w);
            if table.last().is_some_and(|l| l.0 == r) {
                table.last_mut().unwrap().1 = run;
            } else {
                table.push((r, run));
            }
        }
        let end = table.last().unwrap().0;
        Ok(ModulusOfContinuity {
            form: Form::Table(table),
            domain_end: end,
        })
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn label(&self) -> String {
        match &self.form {
            Form::Closed { label, .. } => label.clone(),
            Form::Table(t) => format!("table[{}]", t.len()),
        }
    }

    pub fn table(&self) -> Option<&[(f64, f64)]> {
        match &self.form {
            Form::Table(t) => Some(t),
            Form::Closed { .. } => None,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match &self.form {
            Form::Closed { f, .. } => f(r),
            Form::Table(t) => {
                let i = t.partition_point(|p| p.0 < r);
                if i == t.len() {
                    return t[t.len() - 1].1;
                }
                let (r1, w1) = t[i];
                if i == 0 || r1 == r {
                    return w1;
                }
                let (r0, w0) = t[i - 1];
                w0 + (w1 - w0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// `r ↦ ω(κ·r^m)`.
    pub fn composed(&self, kappa: f64, m: f64) -> Self {
        let inner = self.clone();
        let end = (self.domain_end / kappa).powf(1.0 / m);
        Self::from_fn(
            format!("{}∘({kappa}·r^{m})", self.label()),
            move |r| inner.eval(kappa * r.powf(m)),
            end,
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        let inner = self.clone();
        Self::from_fn(format!("{a}·{}", self.label()), move |r| a * inner.eval(r), self.domain_end)
    }

    /// Values on `grid`, for tabulation and CSV export.
    pub fn tabulate(&self, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&r| (r, self.eval(r))).collect()
    }

    /// Least concave majorant on a tabulation grid; concave with `ω(0)=0`
    /// implies subadditive.
    pub fn subadditive_envelope(&self) -> Self {
        let pts = match &self.form {
            Form::Table(t) => t.clone(),
            Form::Closed { .. } => {
                let grid = envelope_grid(self.domain_end);
                let mut run: f64 = 0.0;
                grid.iter()
                    .map(|&r| {
                        run = run.max(self.eval(r));
                        (r, if r == 0.0 { 0.0 } else { run })
                    })
                    .collect()
            }
        };
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // drop b if it lies on or below the chord a→p
                if (b.1 - a.1) * (p.0 - a.0) <= (p.1 - a.1) * (b.0 - a.0) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        ModulusOfContinuity {
            form: Form::Table(hull),
            domain_end: self.domain_end,
        }
    }

    /// Largest `ω(σ+τ) − ω(σ) − ω(τ)` over pairs from `grid`.
    pub fn subadditivity_defect(&self, grid: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &s in grid {
            for &t in grid {
                if s + t <= self.domain_end {
                    worst = worst.max(self.eval(s + t) - self.eval(s) - self.eval(t));
                }
            }
        }
        worst
    }

    /// Largest `self − other` on `grid`; nonpositive means dominated.
    pub fn excess_over(&self, other: &ModulusOfContinuity, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&r| self.eval(r) - other.eval(r))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest drop `ω(r_i) − ω(r_{i+1})` on `grid`; nonpositive means nondecreasing.
    pub fn monotonicity_defect(&self, grid: &[f64]) -> f64 {
        grid.windows(2)
            .map(|w| self.eval(w[0]) - self.eval(w[1]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn envelope_grid(end: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=512).map(|i| end * i as f64 / 512.0).collect();
    g.extend((1..=60).map(|k| end * 2f64.powi(-k)));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Outcome of the Dini test `∫₀^ε ω(r)/r dr`.
#[derive(Clone, Debug, PartialEq)]
pub enum DiniIntegral {
    Finite {
        value: f64,
        /// quadrature error plus the size of the extrapolated tail
        error: f64,
        tail: f64,
        levels: usize,
    },
    Divergent {
        partial_sum: f64,
        levels: usize,
        decay_exponent: f64,
    },
}

impl DiniIntegral {
    pub fn value(&self) -> Option<f64> {
        match self {
            DiniIntegral::Finite { value, .. } => Some(*value),
            DiniIntegral::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, DiniIntegral::Divergent { .. })
    }
}

/// Per-level contributions `∫ ω(r)/r dr` over `[ε2^{-k-1}, ε2^{-k}]`, in the variable `s = ln r`.
pub fn dyadic_contributions(omega: &ModulusOfContinuity, eps: f64, levels: usize) -> Vec<(f64, f64)> {
    let scale = omega.eval(eps).abs().max(f64::MIN_POSITIVE);
    (0..levels)
        .map(|k| {
            let hi = eps * 2f64.powi(-(k as i32));
            let lo = 0.5 * hi;
            let q = adaptive_simpson(|s: f64| omega.eval(s.exp()), lo.ln(), hi.ln(), 1e-14 * scale);
            (q.value, q.error)
        })
        .collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Residual sum of squares of the least-squares line through `(xs, ys)`.
fn line_residual(xs: &[f64], ys: &[f64]) -> f64 {
    let b = slope(xs, ys);
    let n = xs.len() as f64;
    let a = (ys.iter().sum::<f64>() - b * xs.iter().sum::<f64>()) / n;
    xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum()
}

/// `∫₀^ε ω(r)/r dr` on dyadic panels.  The tail below the last level is
/// extrapolated from the decay of the last 20 contributions, or the integral
/// is declared divergent when that decay is no faster than `1/log(1/r)`.
pub fn dini_integral(omega: &ModulusOfContinuity, eps: f64) -> Result<DiniIntegral> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("Dini integral needs ε ≥ 0, got {eps}")));
    }
    if eps > omega.domain_end() * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} exceeds the modulus domain end {}",
            omega.domain_end()
        )));
    }
    if eps == 0.0 {
        return Ok(DiniIntegral::Finite {
            value: 0.0,
            error: 0.0,
            tail: 0.0,
            levels: 0,
        });
    }
    let parts = dyadic_contributions(omega, eps, DINI_LEVELS);
    let sum: f64 = parts.iter().map(|p| p.0).sum();
    let qerr: f64 = parts.iter().map(|p| p.1).sum();
    let window: Vec<(f64, f64)> = parts[DINI_LEVELS - DINI_WINDOW..]
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let k = (DINI_LEVELS - DINI_WINDOW + i) as f64;
            // ℓ = log(1/r) at the geometric panel midpoint
            (-(eps.ln()) + (k + 0.5) * std::f64::consts::LN_2, p.0)
        })
        .collect();
    let last = window[DINI_WINDOW - 1];
    if window.iter().all(|p| p.1 <= 0.0) {
        return Ok(DiniIntegral::Finite {
            value: sum,
            error: qerr,
            tail: 0.0,
            levels: DINI_LEVELS,
        });
    }
    if window.iter().any(|p| p.1 <= 0.0) || window[0].0 <= 0.0 {
        // mixed signs or a window straddling r = 1: not a monotone rate near 0
        return Err(Error::InvalidArgument("modulus is not positive and monotone near 0".into()));
    }
    let ratio = (last.1 / window[0].1).powf(1.0 / (DINI_WINDOW - 1) as f64);
    let lx: Vec<f64> = window.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = window.iter().map(|p| p.1.ln()).collect();
    let p = -slope(&lx, &ly);
    // geometric decay in the level index versus power decay in log(1/r)
    let ks: Vec<f64> = window.iter().map(|p| p.0).collect();
    let geometric = ratio < 1.0 && line_residual(&ks, &ly) <= line_residual(&lx, &ly);
    let tail = if ratio < 0.5 || geometric {
        last.1 * ratio / (1.0 - ratio)
    } else if p > DIVERGENCE_EXPONENT {
        let l = last.0;
        last.1 * l.powf(p) * (l + 0.5 * std::f64::consts::LN_2).powf(1.0 - p) / ((p - 1.0) * std::f64::consts::LN_2)
    } else {
        return Ok(DiniIntegral::Divergent {
            partial_sum: sum,
            levels: DINI_LEVELS,
            decay_exponent: p,
        });
    };
    Ok(DiniIntegral::Finite {
        value: sum + tail,
        error: qerr + tail,
        tail,
        levels: DINI_LEVELS,
    })
}

/// `∫_a^b ω(r)/r dr` for `0 < a ≤ b`.
pub fn dini_between(omega: &ModulusOfContinuity, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let scale = omega.eval(b).abs().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    let mut hi = b;
    while hi > a {
        let lo = (0.5 * hi).max(a);
        total += adaptive_simpson(|s: f64| omega.eval(s.exp()), lo.ln(), hi.ln(), 1e-14 * scale).value;
        hi = lo;
    }
    total
}

/// `h(t) = ∫₀^{|t|} ω(r) dr`.
pub fn h_integral(omega: &ModulusOfContinuity, t: f64) -> Result<f64> {
    let a = t.abs();
    if a >= omega.domain_end() {
        return Err(Error::InvalidArgument(format!(
            "|t| = {a} is outside the modulus range [0, {})",
            omega.domain_end()
        )));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let scale = omega.eval(a).max(f64::MIN_POSITIVE) * a;
    Ok(adaptive_simpson(|r| omega.eval(r), 0.0, a, 1e-15 * scale).value)
}

const H_NODES: usize = 2048;
/// Bisection steps for `h^{-1}`.
pub const H_INVERSE_ITERS: usize = 80;

/// Cached `h` with cumulative node values, and its inverse by bisection.
#[derive(Clone, Debug)]
pub struct HFunction {
    omega: ModulusOfContinuity,
    step: f64,
    cumulative: Vec<f64>,
}

impl HFunction {
    pub fn new(omega: ModulusOfContinuity) -> Self {
        let end = omega.domain_end();
        let step = end / H_NODES as f64;
        let mut cumulative = Vec::with_capacity(H_NODES + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..H_NODES {
            let (a, b) = (i as f64 * step, (i + 1) as f64 * step);
            let scale = omega.eval(b).max(f64::MIN_POSITIVE) * step;
            acc += adaptive_simpson(|r| omega.eval(r), a, b, 1e-15 * scale).value;
            cumulative.push(acc);
        }
        HFunction {
            omega,
            step,
            cumulative,
        }
    }

    pub fn modulus(&self) -> &ModulusOfContinuity {
        &self.omega
    }

    pub fn domain_end(&self) -> f64 {
        self.omega.domain_end()
    }

    /// `h(t)`; even in `t`, and saturating at the domain end.
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs().min(self.domain_end());
        let i = ((a / self.step) as usize).min(H_NODES - 1);
        let lo = i as f64 * self.step;
        if a <= lo {
            return self.cumulative[i];
        }
        let scale = self.omega.eval(a).max(f64::MIN_POSITIVE) * (a - lo);
        self.cumulative[i] + adaptive_simpson(|r| self.omega.eval(r), lo, a, 1e-15 * scale).value
    }

    /// Smallest `t ≥ 0` with `h(t) = x`; `+∞` when `x` exceeds every value of `h`.
    pub fn inverse(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.cumulative[H_NODES] < x {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, self.domain_end());
        for _ in 0..H_INVERSE_ITERS {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Which constraint fixed `ε` in [`select_embedding_params`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonBinding {
    /// `√2·ε < r_V`
    Radius,
    /// `x / h^{-1}(x) < 1/β` on `(0, ε]`
    Slope,
}

/// Parameters of the planar model domain `{s+it : |t|<ε, β·h(t) < s < ε}`.
#[derive(Clone, Debug)]
pub struct ModelDomainParams {
    pub beta: f64,
    pub epsilon: f64,
    pub h: HFunction,
    pub binding: EpsilonBinding,
    pub radius_cap: f64,
}

impl ModelDomainParams {
    pub fn new(beta: f64, epsilon: f64, omega: ModulusOfContinuity) -> Result<Self> {
        if !(beta > 1.0) || !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("need β > 1 and ε > 0, got β={beta}, ε={epsilon}")));
        }
        Ok(ModelDomainParams {
            beta,
            epsilon,
            h: HFunction::new(omega),
            binding: EpsilonBinding::Radius,
            radius_cap: f64::INFINITY,
        })
    }

    pub fn contains(&self, zeta: num_complex::Complex64) -> bool {
        let (s, t) = (zeta.re, zeta.im);
        t.abs() < self.epsilon && s < self.epsilon && self.beta * self.h.eval(t) < s
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        ModelDomainParams {
            epsilon,
            ..self.clone()
        }
    }

    /// Rejection samples from the model domain.
    pub fn sample(&self, count: usize, rng: &mut impl rand::Rng) -> Vec<num_complex::Complex64> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let s = rng.gen_range(0.0..self.epsilon);
            let t = rng.gen_range(-self.epsilon..self.epsilon);
            let z = num_complex::Complex64::new(s, t);
            if self.contains(z) {
                out.push(z);
            }
        }
        out
    }
}

/// `β = max(1+1e−9, 4√2/m)`.
pub fn embedding_beta(m: f64) -> f64 {
    (1.0 + 1e-9f64).max(4.0 * std::f64::consts::SQRT_2 / m)
}

const EPS_GRID_PER_OCTAVE: f64 = 256.0;
const EPS_GRID_MIN: f64 = 1e-12;
const SLOPE_GRID: usize = 1000;

fn slope_constraint_holds(h: &HFunction, beta: f64, eps: f64) -> bool {
    (1..=SLOPE_GRID).all(|i| {
        let x = eps * i as f64 / SLOPE_GRID as f64;
        x / h.inverse(x) < 1.0 / beta
    })
}

/// Largest `ε` on a geometric grid below `r_V/√2` with `x/h^{-1}(x) < 1/β` on a
/// 10³-point grid in `(0, ε]`.
pub fn select_epsilon(h: &HFunction, beta: f64, r_v: f64) -> Result<(f64, EpsilonBinding)> {
    let cap = r_v / std::f64::consts::SQRT_2 * (1.0 - 1e-12);
    let cap = cap.min(h.domain_end());
    let grid = |j: usize| cap * 2f64.powf(-(j as f64) / EPS_GRID_PER_OCTAVE);
    if slope_constraint_holds(h, beta, cap) {
        return Ok((cap, EpsilonBinding::Radius));
    }
    let last = (EPS_GRID_PER_OCTAVE * (cap / EPS_GRID_MIN).log2()).floor() as usize;
    if !slope_constraint_holds(h, beta, grid(last)) {
        return Err(Error::NoAdmissibleEpsilon(EPS_GRID_MIN));
    }
    // first passing index; the constraint only tightens as ε grows
    let (mut bad, mut good) = (0usize, last);
    while good - bad > 1 {
        let mid = (bad + good) / 2;
        if slope_constraint_holds(h, beta, grid(mid)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok((grid(good), EpsilonBinding::Slope))
}
