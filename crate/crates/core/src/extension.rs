//! Boundary values of a holomorphic map in a graph chart, obtained by
//! integrating its vertical derivative down inward normal segments, together
//! with the continuity bounds and the two-sequence consistency table.

use std::sync::Arc;

use serde::Serialize;

use crate::domains::{boundary_distance, DomainSpec};
use crate::error::{Error, Result};
use crate::metrics::{
    convex_distance_lower_bound, ex21_rate_constants, fr_distance_upper_bound, kob_distance_ball_exact,
    pair_lower_bound, SIBONY_ALPHA,
};
use crate::point::{c, CPoint, C64};
use crate::psh::{psi_bound, PsiBound};
use crate::quad::{adaptive_simpson, geometric_panels};
use crate::regularity::{GraphChart, ModulusOfContinuity};

pub type ComponentFn = Arc<dyn Fn(&CPoint) -> C64 + Send + Sync>;

/// Holomorphic map written in chart coordinates, `F̃ = F ∘ (chart)⁻¹`.
#[derive(Clone)]
pub struct HolomorphicMap {
    pub label: String,
    components: Vec<ComponentFn>,
    normal_derivative: Option<Vec<ComponentFn>>,
}

impl std::fmt::Debug for HolomorphicMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HolomorphicMap({}, {} components)", self.label, self.components.len())
    }
}

pub const CAUCHY_RADIUS: f64 = 1e-3;
pub const CAUCHY_NODES: usize = 32;
const CR_STEP: f64 = 1e-4;

impl HolomorphicMap {
    pub fn new(label: impl Into<String>, components: Vec<ComponentFn>) -> Self {
        HolomorphicMap {
            label: label.into(),
            components,
            normal_derivative: None,
        }
    }

    /// Analytic `∂F̃ⱼ/∂Zₙ`, one closure per component.
    pub fn with_normal_derivative(mut self, d: Vec<ComponentFn>) -> Self {
        self.normal_derivative = Some(d);
        self
    }

    /// Pulls an ambient map back through the chart.
    pub fn in_chart(label: impl Into<String>, chart: &GraphChart, f: impl Fn(&CPoint) -> CPoint + Send + Sync + 'static) -> Self {
        let chart = chart.clone();
        let f = Arc::new(f);
        let n = chart.dim();
        let components: Vec<ComponentFn> = (0..n)
            .map(|j| {
                let chart = chart.clone();
                let f = f.clone();
                Arc::new(move |z: &CPoint| f(&chart.from_chart(z))[j]) as ComponentFn
            })
            .collect();
        HolomorphicMap::new(label, components)
    }

    pub fn constant(value: CPoint) -> Self {
        let components = value
            .0
            .iter()
            .map(|&v| Arc::new(move |_: &CPoint| v) as ComponentFn)
            .collect();
        let zero = value.0.iter().map(|_| Arc::new(|_: &CPoint| c(0.0, 0.0)) as ComponentFn).collect();
        HolomorphicMap::new("constant", components).with_normal_derivative(zero)
    }

    pub fn identity(n: usize) -> Self {
        let components = (0..n).map(|j| Arc::new(move |z: &CPoint| z[j]) as ComponentFn).collect();
        let d = (0..n)
            .map(|j| Arc::new(move |_: &CPoint| if j == n - 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }) as ComponentFn)
            .collect();
        HolomorphicMap::new("identity", components).with_normal_derivative(d)
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.normal_derivative.is_some()
    }

    /// Same map with the analytic derivative dropped, forcing Cauchy differentiation.
    pub fn without_derivative(&self) -> Self {
        HolomorphicMap {
            normal_derivative: None,
            ..self.clone()
        }
    }

    pub fn eval(&self, z: &CPoint) -> CPoint {
        CPoint(self.components.iter().map(|f| f(z)).collect())
    }

    /// `(1/2πr)∫F̃(Z + re^{iθ}eₙ)e^{−iθ}dθ` by the trapezoid rule.
    pub fn cauchy_normal_derivative(&self, z: &CPoint, radius: f64) -> CPoint {
        let n = z.dim();
        let mut acc = vec![c(0.0, 0.0); self.components.len()];
        for k in 0..CAUCHY_NODES {
            let th = 2.0 * std::f64::consts::PI * k as f64 / CAUCHY_NODES as f64;
            let e = C64::from_polar(1.0, th);
            let mut p = z.clone();
            p[n - 1] += e * radius;
            for (a, f) in acc.iter_mut().zip(&self.components) {
                *a += f(&p) * e.conj();
            }
        }
        CPoint(acc.into_iter().map(|a| a / (radius * CAUCHY_NODES as f64)).collect())
    }

    /// `∂F̃/∂Zₙ`: analytic when available, else on a circle of radius
    /// `min(1e−3, Y(Z)/2)` so the circle stays above the graph.
    pub fn normal_derivative(&self, chart: &GraphChart, z: &CPoint) -> Result<CPoint> {
        let y = chart.vertical_height(z)?;
        self.normal_derivative_at_height(z, y)
    }

    /// As `normal_derivative`, with the height `Y(Z)` supplied by the caller.
    fn normal_derivative_at_height(&self, z: &CPoint, y: f64) -> Result<CPoint> {
        if let Some(d) = &self.normal_derivative {
            return Ok(CPoint(d.iter().map(|f| f(z)).collect()));
        }
        if !(y > 0.0) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.cauchy_normal_derivative(z, CAUCHY_RADIUS.min(0.5 * y)))
    }

    /// Largest relative gap between the derivative oracle and central
    /// complex differences `(F̃(Z+heₙ) − F̃(Z−heₙ))/2h`.
    pub fn cauchy_riemann_defect(&self, chart: &GraphChart, points: &[CPoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for z in points {
            let y = chart.vertical_height(z)?;
            let h = CR_STEP.min(0.5 * y);
            let n = z.dim();
            let mut zp = z.clone();
            zp[n - 1] += h;
            let mut zm = z.clone();
            zm[n - 1] -= h;
            let fd = &(&self.eval(&zp) - &self.eval(&zm)) * (0.5 / h);
            let d = self.normal_derivative(chart, z)?;
            worst = worst.max(fd.dist(&d) / d.norm().max(1.0));
        }
        Ok(worst)
    }
}

/// `F(z, w) = (z², w)` in the `ex21` chart: `F̃(Z) = ((1 + iZ₂)², Z₁)`.
pub fn ex21_chart_map() -> HolomorphicMap {
    let f1: ComponentFn = Arc::new(|z: &CPoint| {
        let s = c(1.0, 0.0) + c(0.0, 1.0) * z[1];
        s * s
    });
    let f2: ComponentFn = Arc::new(|z: &CPoint| z[0]);
    let d1: ComponentFn = Arc::new(|z: &CPoint| c(0.0, 2.0) * (c(1.0, 0.0) + c(0.0, 1.0) * z[1]));
    let d2: ComponentFn = Arc::new(|_: &CPoint| c(0.0, 0.0));
    HolomorphicMap::new("(z^2, w)", vec![f1, f2]).with_normal_derivative(vec![d1, d2])
}

/// `ψ(y) = (C/y)·c̃√(C·y)` with `c̃` from the Sibony rate on `{|z|+|w|<1}`,
/// `s = α* = 1`, and `C = √2·scale`.
pub fn ex21_psi(scale: f64) -> Result<PsiBound> {
    let (_, ct) = ex21_rate_constants(0.25, SIBONY_ALPHA);
    let m = ModulusOfContinuity::from_fn(format!("{ct}·√t"), move |t| ct * t.sqrt(), 1e6);
    psi_bound(&m, 1.0, 1.0, std::f64::consts::SQRT_2 * scale)
}

#[derive(Clone, Debug)]
pub struct LineIntegral {
    pub value: CPoint,
    pub quadrature_error: f64,
    /// Largest `|∂F̃ⱼ/∂Zₙ|/ψ` met on the quadrature nodes.
    pub psi_ratio: f64,
}

/// Relative tolerance of each dyadic panel against `length × ψ`.
pub const PANEL_REL_TOL: f64 = 1e-10;

/// `∫_t^{t′} i·∂F̃/∂Zₙ(ξ + x·ε) dx` with `ε = (0, …, 0, i)`.
pub fn normal_line_integral(
    map: &HolomorphicMap,
    chart: &GraphChart,
    psi: &PsiBound,
    xi: &CPoint,
    t: f64,
    t_prime: f64,
) -> Result<LineIntegral> {
    if !(0.0 < t && t < t_prime) {
        return Err(Error::InvalidArgument(format!("need 0 < t < t′, got t = {t}, t′ = {t_prime}")));
    }
    let n = xi.dim();
    let lift = |x: f64| {
        let mut p = xi.clone();
        p[n - 1] += c(0.0, x);
        p
    };
    // Y(ξ + xε) = Y(ξ) + x exactly; recomputing it would lose x below the
    // rounding level of Im Zₙ
    let y0 = chart.vertical_height(xi)?;
    if !(y0 + t > 0.0) || !chart.in_box(&lift(t_prime)) {
        return Err(Error::OutsideDomain);
    }
    let m = map.components();
    let mut value = vec![c(0.0, 0.0); m];
    let mut qerr = 0.0;
    let mut ratio: f64 = 0.0;
    for (lo, hi) in geometric_panels(t, t_prime) {
        let scale = psi.eval(lo)?;
        let tol = PANEL_REL_TOL * (hi - lo) * scale;
        for (j, v) in value.iter_mut().enumerate() {
            let mut failure = None;
            let q = adaptive_simpson(
                |x: f64| match map.normal_derivative_at_height(&lift(x), y0 + x) {
                    Ok(d) => {
                        if let Ok(p) = psi.eval(x) {
                            ratio = ratio.max(d[j].norm() / p);
                        }
                        c(0.0, 1.0) * d[j]
                    }
                    Err(e) => {
                        failure = Some(e);
                        c(0.0, 0.0)
                    }
                },
                lo,
                hi,
                tol,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            *v += q.value;
            qerr += q.error;
        }
    }
    Ok(LineIntegral {
        value: CPoint(value),
        quadrature_error: qerr,
        psi_ratio: ratio,
    })
}

pub const LADDER_LEVELS: usize = 60;

/// Smallest `K ≤ 60` with `∫₀^{t′2^{−K}} ψ < tol`.
pub fn ladder_depth(psi: &PsiBound, t_prime: f64, tol: f64) -> Result<usize> {
    let tail_at = |k: usize| psi.tail(t_prime * 0.5f64.powi(k as i32));
    let last = tail_at(LADDER_LEVELS)?;
    if !(last < tol) {
        return Err(Error::TailNotReached {
            tail: last,
            tol,
            levels: LADDER_LEVELS,
        });
    }
    let (mut lo, mut hi) = (0usize, LADDER_LEVELS);
    if tail_at(0)? < tol {
        return Ok(0);
    }
    // tail is increasing in t, so the predicate is monotone in k
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail_at(mid)? < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtensionResult {
    pub xi: CPoint,
    pub value: CPoint,
    pub on_boundary: bool,
    pub t_prime: f64,
    pub t_final: f64,
    pub levels: usize,
    /// `∫₀^{t′}ψ`, bounding `|value − F̃(ξ + t′ε)|`.
    pub tail_bound: f64,
    /// `∫₀^{t_K}ψ`, bounding the truncation of the limit.
    pub ladder_tail: f64,
    pub quadrature_error: f64,
    pub psi_ratio: f64,
}

impl ExtensionResult {
    pub fn error_budget(&self) -> f64 {
        self.ladder_tail + self.quadrature_error
    }

    pub fn csv_header(dim: usize) -> Vec<String> {
        let mut h = Vec::new();
        for k in 0..dim {
            h.push(format!("xi{}_re", k + 1));
            h.push(format!("xi{}_im", k + 1));
        }
        for k in 0..dim {
            h.push(format!("value{}_re", k + 1));
            h.push(format!("value{}_im", k + 1));
        }
        for s in ["on_boundary", "t_prime", "t_final", "levels", "tail_bound", "ladder_tail", "quadrature_error"] {
            h.push(s.to_string());
        }
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut r = Vec::new();
        for z in self.xi.0.iter().chain(&self.value.0) {
            r.push(format!("{:e}", z.re));
            r.push(format!("{:e}", z.im));
        }
        r.push(self.on_boundary.to_string());
        r.push(format!("{:e}", self.t_prime));
        r.push(format!("{:e}", self.t_final));
        r.push(self.levels.to_string());
        r.push(format!("{:e}", self.tail_bound));
        r.push(format!("{:e}", self.ladder_tail));
        r.push(format!("{:e}", self.quadrature_error));
        r
    }
}

/// Tolerance for treating a chart point as lying on the graph.
pub const ON_GRAPH_TOL: f64 = 1e-12;

fn boundary_value_at_depth(
    map: &HolomorphicMap,
    chart: &GraphChart,
    psi: &PsiBound,
    xi: &CPoint,
    t_prime: f64,
    levels: usize,
) -> Result<ExtensionResult> {
    let y = chart.vertical_height(xi)?;
    if y.abs() > ON_GRAPH_TOL {
        return Err(Error::InvalidArgument(format!("ξ is off the graph by {y:e}")));
    }
    let n = xi.dim();
    let mut top = xi.clone();
    top[n - 1] += c(0.0, t_prime);
    if !chart.in_box(&top) {
        return Err(Error::OutOfChart);
    }
    let t_final = t_prime * 0.5f64.powi(levels as i32);
    let f_top = map.eval(&top);
    let (value, qerr, ratio) = if levels == 0 {
        (f_top, 0.0, 0.0)
    } else {
        let li = normal_line_integral(map, chart, psi, xi, t_final, t_prime)?;
        (&f_top - &li.value, li.quadrature_error, li.psi_ratio)
    };
    Ok(ExtensionResult {
        xi: xi.clone(),
        value,
        on_boundary: true,
        t_prime,
        t_final,
        levels,
        tail_bound: psi.tail(t_prime)?,
        ladder_tail: psi.tail(t_final)?,
        quadrature_error: qerr,
        psi_ratio: ratio,
    })
}

/// `F̃•(ξ) = F̃(ξ + t′ε) − ∫_{t_K}^{t′} i·∂F̃/∂Zₙ`, descending the ladder
/// `t_k = t′2^{−k}` until the ψ-tail drops below `tol`.
pub fn boundary_value(
    map: &HolomorphicMap,
    chart: &GraphChart,
    psi: &PsiBound,
    xi: &CPoint,
    t_prime: f64,
    tol: f64,
) -> Result<ExtensionResult> {
    let levels = ladder_depth(psi, t_prime, tol)?;
    boundary_value_at_depth(map, chart, psi, xi, t_prime, levels)
}

/// Boundary grid over the first and last graph arguments, the others held at 0.
pub fn boundary_grid(chart: &GraphChart, per_side: usize, half_width: f64) -> Vec<CPoint> {
    let m = 2 * chart.dim() - 1;
    let step = |i: usize| {
        if per_side == 1 {
            0.0
        } else {
            -half_width + 2.0 * half_width * i as f64 / (per_side - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(per_side * per_side);
    for i in 0..per_side {
        for k in 0..per_side {
            let mut a = vec![0.0; m];
            a[0] = step(i);
            a[m - 1] = step(k);
            out.push(chart.boundary_point(&a));
        }
    }
    out
}

/// `F̂` on a chart grid: `F̃•` on graph points, `F̃` above the graph.  One `t′`,
/// half the gap between the grid and the edge of the chart box, serves every
/// point.
pub fn extend_map(
    map: &HolomorphicMap,
    chart: &GraphChart,
    psi: &PsiBound,
    grid: &[CPoint],
    tol: f64,
) -> Result<Vec<ExtensionResult>> {
    let reach = grid.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let t_prime = 0.5 * (chart.radius - reach);
    if !(t_prime > 0.0) {
        return Err(Error::OutOfChart);
    }
    let mut levels = None;
    grid.iter()
        .map(|xi| {
            let y = chart.vertical_height(xi)?;
            if y > ON_GRAPH_TOL {
                return Ok(ExtensionResult {
                    xi: xi.clone(),
                    value: map.eval(xi),
                    on_boundary: false,
                    t_prime: 0.0,
                    t_final: 0.0,
                    levels: 0,
                    tail_bound: 0.0,
                    ladder_tail: 0.0,
                    quadrature_error: 0.0,
                    psi_ratio: 0.0,
                });
            }
            let k = match levels {
                Some(k) => k,
                None => *levels.insert(ladder_depth(psi, t_prime, tol)?),
            };
            boundary_value_at_depth(map, chart, psi, xi, t_prime, k)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest `bound − |F̂(ξ₁) − F̂(ξ₂)|` over all pairs.
    pub worst_slack: f64,
    pub lift: f64,
    pub tail_term: f64,
    /// `(r, max |F̂(ξ₁) − F̂(ξ₂)| over pairs with |ξ₁ − ξ₂| ≤ r)`.
    pub empirical: Vec<(f64, f64)>,
    pub tends_to_zero: bool,
}

/// Checks `|F̂(ξ₁) − F̂(ξ₂)| ≤ 2∫₀^t ψ + |F̃(ξ₁+tε) − F̃(ξ₂+tε)|` on every pair,
/// with `t = lift` and each value's own error budget added, and tabulates the
/// empirical modulus on dyadic radii.
pub fn continuity_modulus(map: &HolomorphicMap, results: &[ExtensionResult], psi: &PsiBound, lift: f64) -> Result<ContinuityReport> {
    if results.len() < 2 {
        return Err(Error::InvalidArgument("continuity check needs at least two points".into()));
    }
    let tail = psi.tail(lift)?;
    let lifted: Vec<CPoint> = results
        .iter()
        .map(|r| {
            let mut p = r.xi.clone();
            let n = p.dim();
            if r.on_boundary {
                p[n - 1] += c(0.0, lift);
            }
            map.eval(&p)
        })
        .collect();
    let mut pairs = Vec::with_capacity(results.len() * (results.len() - 1) / 2);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (a, b) = (&results[i], &results[j]);
            let dev = a.value.dist(&b.value);
            let tails = if a.on_boundary { tail } else { 0.0 } + if b.on_boundary { tail } else { 0.0 };
            let bound = tails + lifted[i].dist(&lifted[j]) + a.error_budget() + b.error_budget();
            if dev > bound {
                violations += 1;
            }
            worst = worst.min(bound - dev);
            pairs.push((a.xi.dist(&b.xi), dev));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let r_min = pairs[0].0.max(f64::MIN_POSITIVE);
    let r_max = pairs[pairs.len() - 1].0;
    let mut empirical = Vec::new();
    let mut r = r_max;
    while r >= r_min {
        let cut = pairs.partition_point(|p| p.0 <= r);
        let m = pairs[..cut].iter().map(|p| p.1).fold(0.0, f64::max);
        empirical.push((r, m));
        r *= 0.5;
    }
    empirical.reverse();
    let first = empirical.first().map_or(0.0, |e| e.1);
    let last = empirical.last().map_or(0.0, |e| e.1);
    let monotone = empirical.windows(2).all(|w| w[0].1 <= w[1].1);
    Ok(ContinuityReport {
        pairs: pairs.len(),
        violations,
        worst_slack: worst,
        lift,
        tail_term: tail,
        tends_to_zero: monotone && (last == 0.0 || first < 0.25 * last),
        empirical,
    })
}

/// Single-linkage radius for merging sequence limits.
pub const CLUSTER_RADIUS: f64 = 1e-3;
const DIVERGENCE_RADIUS: f64 = 1e6;

/// Accumulation points of `F` along sequences tending to `p`: each image
/// sequence contributes its last term, provided its last step is within the
/// clustering radius, and the limits are merged by single linkage.
pub fn cluster_set_sample(f: &dyn Fn(&CPoint) -> CPoint, p: &CPoint, sequences: &[Vec<CPoint>]) -> Result<Vec<CPoint>> {
    let mut limits: Vec<CPoint> = Vec::with_capacity(sequences.len());
    for seq in sequences {
        if seq.len() < 2 {
            return Err(Error::InvalidArgument("approach sequences need at least two terms".into()));
        }
        if seq[seq.len() - 1].dist(p) > seq[0].dist(p) {
            return Err(Error::InvalidArgument("sequence does not approach p".into()));
        }
        let images: Vec<CPoint> = seq.iter().map(f).collect();
        if images.iter().any(|w| !w.is_finite() || w.norm() > DIVERGENCE_RADIUS) {
            return Err(Error::DivergentImage);
        }
        let k = images.len();
        if images[k - 1].dist(&images[k - 2]) > CLUSTER_RADIUS {
            return Err(Error::NonConvergence {
                what: "image sequence",
                estimate: images[k - 1].dist(&images[k - 2]),
            });
        }
        limits.push(images[k - 1].clone());
    }
    let mut label: Vec<usize> = (0..limits.len()).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            if limits[i].dist(&limits[j]) <= CLUSTER_RADIUS {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    Ok((0..limits.len())
        .filter(|&i| root(&mut label, i) == i)
        .map(|i| limits[i].clone())
        .collect())
}

/// Two sequences in `D` tending to one boundary point, their images in `Ω`,
/// and the constants of the distance comparison.
#[derive(Clone, Debug)]
pub struct DichotomySequences {
    pub z1: Vec<CPoint>,
    pub z2: Vec<CPoint>,
    pub w1: Vec<CPoint>,
    pub w2: Vec<CPoint>,
    /// Additive constant of the upper distance bound in `D`.
    pub c: f64,
    /// Additive constant of the pair lower bound in `Ω`.
    pub k: f64,
    /// Boundary-distance comparison `δ_Ω(F(z)) ≤ δ_D(z)/C₀`.
    pub c0: f64,
}

impl DichotomySequences {
    pub fn new(z1: Vec<CPoint>, z2: Vec<CPoint>, w1: Vec<CPoint>, w2: Vec<CPoint>, c: f64, k: f64, c0: f64) -> Result<Self> {
        let len = z1.len();
        if len < 2 || z2.len() != len || w1.len() != len || w2.len() != len {
            return Err(Error::InvalidArgument("sequences must share a length of at least two".into()));
        }
        if !(c0 > 0.0) {
            return Err(Error::InvalidArgument("C₀ must be positive".into()));
        }
        let tail_gap = z1[len - 1].dist(&z2[len - 1]);
        let step = z1[len - 1].dist(&z1[len - 2]).max(z2[len - 1].dist(&z2[len - 2]));
        if tail_gap > CLUSTER_RADIUS || step > CLUSTER_RADIUS {
            return Err(Error::InvalidArgument("domain sequences do not share a limit".into()));
        }
        Ok(DichotomySequences { z1, z2, w1, w2, c, k, c0 })
    }

    /// Images taken through `f`.
    pub fn from_map(z1: Vec<CPoint>, z2: Vec<CPoint>, f: &dyn Fn(&CPoint) -> CPoint, c: f64, k: f64, c0: f64) -> Result<Self> {
        let w1 = z1.iter().map(f).collect();
        let w2 = z2.iter().map(f).collect();
        Self::new(z1, z2, w1, w2, c, k, c0)
    }

    pub fn images_share_limit(&self) -> bool {
        let n = self.w1.len();
        self.w1[n - 1].dist(&self.w2[n - 1]) <= CLUSTER_RADIUS
    }
}

/// Per-term distances feeding one row of the table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DichotomyInput {
    pub delta_d: [f64; 2],
    pub delta_omega: [f64; 2],
    pub sep: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DichotomyRow {
    pub nu: usize,
    pub input: DichotomyInput,
    /// Upper bound on `K_D(z₁, z₂)`.
    pub upper: f64,
    /// Lower bound on `K_Ω(w₁, w₂)`.
    pub lower: f64,
    /// `Σ ½log(1/(δ_D(zⱼ) + sep))`.
    pub l: f64,
    /// `K + C − log C₀`.
    pub bridge: f64,
    /// `upper − lower`, nonnegative since `K_Ω(F z₁, F z₂) ≤ K_D(z₁, z₂)`.
    pub gap: f64,
    /// `bridge − l`, nonnegative when the images tend to distinct points.
    pub margin: f64,
    pub combined: f64,
}

impl DichotomyRow {
    pub fn csv_header() -> Vec<String> {
        [
            "nu", "delta_d1", "delta_d2", "delta_omega1", "delta_omega2", "sep", "upper", "lower", "l", "bridge", "gap", "margin",
            "combined",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }

    pub fn csv_row(&self) -> Vec<String> {
        let i = &self.input;
        let mut r = vec![self.nu.to_string()];
        for x in [
            i.delta_d[0],
            i.delta_d[1],
            i.delta_omega[0],
            i.delta_omega[1],
            i.sep,
            self.upper,
            self.lower,
            self.l,
            self.bridge,
            self.gap,
            self.margin,
            self.combined,
        ] {
            r.push(format!("{x:e}"));
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub rows: Vec<DichotomyRow>,
    pub distinct_limits: bool,
    pub l_nondecreasing: bool,
    /// First `ν` from which `combined < 0` for every later term.
    pub failure_from: Option<usize>,
}

/// Table from precomputed distances.  When the images tend to distinct
/// points the pair lower bound applies and both the gap and the margin must
/// stay nonnegative; for a shared limit only the convex lower bound is used.
pub fn dichotomy_table(inputs: &[DichotomyInput], c: f64, k: f64, c0: f64, distinct_limits: bool) -> Result<DichotomyReport> {
    let bridge = k + c - c0.ln();
    let mut rows = Vec::with_capacity(inputs.len());
    for (i, inp) in inputs.iter().enumerate() {
        let [d1, d2] = inp.delta_d;
        let [o1, o2] = inp.delta_omega;
        let upper = fr_distance_upper_bound(d1, d2, inp.sep, c)?.value;
        let lower = if distinct_limits {
            pair_lower_bound(o1.min(1.0), o2.min(1.0), k)?.value
        } else {
            convex_distance_lower_bound(o1, o2)?.value
        };
        let l = 0.5 * (1.0 / (d1 + inp.sep)).ln() + 0.5 * (1.0 / (d2 + inp.sep)).ln();
        let gap = upper - lower;
        let margin = bridge - l;
        rows.push(DichotomyRow {
            nu: i + 1,
            input: *inp,
            upper,
            lower,
            l,
            bridge,
            gap,
            margin,
            combined: if distinct_limits { gap.min(margin) } else { gap },
        });
    }
    let l_nondecreasing = rows.windows(2).all(|w| w[1].l >= w[0].l - 1e-12);
    let failure_from = rows
        .iter()
        .rposition(|r| r.combined >= 0.0)
        .map_or(Some(1), |last_ok| (last_ok + 1 < rows.len()).then_some(last_ok + 2));
    Ok(DichotomyReport {
        rows,
        distinct_limits,
        l_nondecreasing,
        failure_from,
    })
}

pub fn dichotomy_inputs(seqs: &DichotomySequences, d: &DomainSpec, omega: &DomainSpec) -> Result<Vec<DichotomyInput>> {
    (0..seqs.z1.len())
        .map(|i| {
            Ok(DichotomyInput {
                delta_d: [boundary_distance(d, &seqs.z1[i])?, boundary_distance(d, &seqs.z2[i])?],
                delta_omega: [boundary_distance(omega, &seqs.w1[i])?, boundary_distance(omega, &seqs.w2[i])?],
                sep: seqs.z1[i].dist(&seqs.z2[i]),
            })
        })
        .collect()
}

pub fn dichotomy_report(seqs: &DichotomySequences, d: &DomainSpec, omega: &DomainSpec) -> Result<DichotomyReport> {
    let inputs = dichotomy_inputs(seqs, d, omega)?;
    dichotomy_table(&inputs, seqs.c, seqs.k, seqs.c0, !seqs.images_share_limit())
}

/// Hand-built ball sequences: `z₁ = (1−δ, 0)`, `z₂ = (1−2δ, 0)` with images
/// `(1−δ, 0)` and `(0, 1−δ)`, `δ_ν = 2^{−ν−1}`.  `C` and `K` are the smallest
/// constants making both bounds hold for the exact ball distance on these terms.
pub fn ball_dichotomy_demo(terms: usize) -> Result<DichotomySequences> {
    let deltas: Vec<f64> = (1..=terms).map(|nu| 0.5 * 0.5f64.powi(nu as i32)).collect();
    let z1: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[1.0 - d, 0.0])).collect();
    let z2: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[1.0 - 2.0 * d, 0.0])).collect();
    let w1: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[1.0 - d, 0.0])).collect();
    let w2: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[0.0, 1.0 - d])).collect();
    let mut cmax: f64 = 0.0;
    let mut kmax: f64 = 0.0;
    for i in 0..terms {
        let (d1, d2) = (1.0 - z1[i].norm(), 1.0 - z2[i].norm());
        let sep = z1[i].dist(&z2[i]);
        let u0 = fr_distance_upper_bound(d1, d2, sep, 0.0)?.value;
        cmax = cmax.max(kob_distance_ball_exact(&z1[i], &z2[i])? - u0);
        let (o1, o2) = (1.0 - w1[i].norm(), 1.0 - w2[i].norm());
        let l0 = pair_lower_bound(o1, o2, 0.0)?.value;
        kmax = kmax.max(l0 - kob_distance_ball_exact(&w1[i], &w2[i])?);
    }
    DichotomySequences::new(z1, z2, w1, w2, cmax, kmax, 1.0)
}

/// `z₁ = (δ, 0)`, `z₂ = (2δ, 0)` in `ex22_d` under `F(z, w) = (z, w²)`; both
/// images tend to the origin.
pub fn ex22_dichotomy_demo(terms: usize) -> Result<DichotomySequences> {
    let deltas: Vec<f64> = (1..=terms).map(|nu| 0.25 * 0.5f64.powi(nu as i32)).collect();
    let z1: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[d, 0.0])).collect();
    let z2: Vec<CPoint> = deltas.iter().map(|&d| CPoint::real(&[2.0 * d, 0.0])).collect();
    let f = crate::psh::ex22_map();
    DichotomySequences::from_map(z1, z2, &|z: &CPoint| f.apply(z), 1.0, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{ball, ex21_d, ex22_d, ex22_omega};
    use crate::regularity::{ex21_chart, flat_chart};

    fn flat_boundary(n: usize) -> (GraphChart, CPoint) {
        let ch = flat_chart(n);
        let xi = ch.boundary_point(&vec![0.0; 2 * n - 1]);
        (ch, xi)
    }

    #[test]
    fn line_integral_of_last_coordinate() {
        let (ch, xi) = flat_boundary(2);
        let id = HolomorphicMap::identity(2);
        let psi = PsiBound::constant(2.0);
        let li = normal_line_integral(&id, &ch, &psi, &xi, 0.05, 0.2).unwrap();
        // F̃(ξ + t′ε) − F̃(ξ + tε) = i(t′ − t) in the last slot
        assert!((li.value[1] - c(0.0, 0.15)).norm() < 1e-13);
        assert_eq!(li.value[0], c(0.0, 0.0));
        let k = HolomorphicMap::constant(CPoint(vec![c(1.0, 2.0), c(3.0, 0.0)]));
        assert_eq!(normal_line_integral(&k, &ch, &psi, &xi, 0.05, 0.2).unwrap().value.norm(), 0.0);
        assert!(normal_line_integral(&id, &ch, &psi, &xi, 0.2, 0.05).is_err());
    }

    #[test]
    fn line_integral_ex21_matches_antiderivative() {
        let ch = ex21_chart();
        let map = ex21_chart_map();
        let psi = ex21_psi(1.0).unwrap();
        let xi = ch.boundary_point(&[0.03, -0.02, 0.05]);
        let (t, tp) = (1e-4, 0.1);
        let li = normal_line_integral(&map, &ch, &psi, &xi, t, tp).unwrap();
        let at = |x: f64| {
            let mut p = xi.clone();
            p[1] += c(0.0, x);
            map.eval(&p)
        };
        let exact = &at(tp) - &at(t);
        assert!(li.value.dist(&exact) < 1e-8, "{:?} vs {exact:?}", li.value);
        assert!(li.psi_ratio < 1.0);
        let cauchy = normal_line_integral(&map.without_derivative(), &ch, &psi, &xi, t, tp).unwrap();
        assert!(cauchy.value.dist(&exact) < 1e-8);
    }

    #[test]
    fn cauchy_riemann_check() {
        let ch = ex21_chart();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let pts: Vec<CPoint> = ch.sample_above_graph(20, 0.2, &mut rng).iter().map(|z| ch.to_chart(z)).collect();
        let map = ex21_chart_map();
        assert!(map.cauchy_riemann_defect(&ch, &pts).unwrap() < 1e-6);
        assert!(map.without_derivative().cauchy_riemann_defect(&ch, &pts).unwrap() < 1e-6);
        let pulled = HolomorphicMap::in_chart("pulled", &ch, |z: &CPoint| CPoint(vec![z[0] * z[0], z[1]]));
        for p in &pts {
            assert!(pulled.eval(p).dist(&map.eval(p)) < 1e-14);
        }
    }

    #[test]
    fn ex21_boundary_value_matches_direct_evaluation() {
        let ch = ex21_chart();
        let map = ex21_chart_map();
        let psi = ex21_psi(1.0).unwrap();
        let xi = ch.boundary_point(&[0.02, 0.01, -0.04]);
        let tol = 1e-8;
        let r = boundary_value(&map, &ch, &psi, &xi, 0.1, tol).unwrap();
        let amb = ch.from_chart(&xi);
        assert!(ex21_d().max_constraint(&amb).abs() < 1e-12);
        let direct = CPoint(vec![amb[0] * amb[0], amb[1]]);
        assert!(r.value.dist(&direct) < 1e-6);
        assert!(r.value.dist(&direct) <= r.error_budget() + 1e-12);
        let r2 = boundary_value(&map, &ch, &psi, &xi, 0.05, tol).unwrap();
        assert!(r.value.dist(&r2.value) <= 2.0 * tol);
        let mut top = xi.clone();
        top[1] += c(0.0, 0.1);
        assert!(r.value.dist(&map.eval(&top)) <= r.tail_bound);
    }

    #[test]
    fn constant_boundary_value() {
        let ch = ex21_chart();
        let k = CPoint(vec![c(0.5, -1.0), c(2.0, 0.0)]);
        let map = HolomorphicMap::constant(k.clone());
        let psi = ex21_psi(1.0).unwrap();
        let xi = ch.boundary_point(&[0.0, 0.0, 0.0]);
        assert_eq!(boundary_value(&map, &ch, &psi, &xi, 0.1, 1e-6).unwrap().value, k);
    }

    #[test]
    fn ladder_needs_integrable_psi() {
        assert!(matches!(
            ladder_depth(&PsiBound::power(1.0, 1.0), 0.1, 1e-6),
            Err(Error::TailNotReached { .. })
        ));
        let k = ladder_depth(&PsiBound::constant(1.0), 0.1, 1e-6).unwrap();
        assert!(0.1 * 0.5f64.powi(k as i32) < 1e-6 && 0.1 * 0.5f64.powi(k as i32 - 1) >= 1e-6);
    }

    #[test]
    fn extend_flat_identity() {
        let ch = flat_chart(2);
        let grid = boundary_grid(&ch, 5, 0.1);
        let res = extend_map(&HolomorphicMap::identity(2), &ch, &PsiBound::constant(1.0), &grid, 1e-9).unwrap();
        for r in &res {
            assert!(r.value.dist(&r.xi) < 1e-9);
        }
    }

    #[test]
    fn extend_interior_points_pass_through() {
        let ch = ex21_chart();
        let map = ex21_chart_map();
        let psi = ex21_psi(1.0).unwrap();
        let mut grid = boundary_grid(&ch, 3, 0.05);
        for p in grid.iter_mut() {
            p[1] += c(0.0, 0.01);
        }
        let res = extend_map(&map, &ch, &psi, &grid, 1e-6).unwrap();
        for (r, p) in res.iter().zip(&grid) {
            assert!(!r.on_boundary);
            assert_eq!(r.value, map.eval(p));
        }
    }

    #[test]
    fn continuity_of_entire_map() {
        let ch = ex21_chart();
        let map = ex21_chart_map();
        let psi = ex21_psi(1.0).unwrap();
        let grid = boundary_grid(&ch, 6, 0.08);
        let res = extend_map(&map, &ch, &psi, &grid, 1e-7).unwrap();
        let rep = continuity_modulus(&map, &res, &psi, 1e-3).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.tends_to_zero);
        // empirical modulus against direct evaluation of the entire map
        let direct: Vec<CPoint> = grid.iter().map(|g| map.eval(g)).collect();
        for &(r, m) in &rep.empirical {
            let mut want: f64 = 0.0;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    if grid[i].dist(&grid[j]) <= r {
                        want = want.max(direct[i].dist(&direct[j]));
                    }
                }
            }
            assert!((m - want).abs() < 1e-6);
        }
        let wide = continuity_modulus(&map, &res, &ex21_psi(2.0).unwrap(), 1e-3).unwrap();
        assert!(wide.worst_slack >= rep.worst_slack);
        let k = HolomorphicMap::constant(CPoint(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        let kres = extend_map(&k, &ch, &psi, &grid, 1e-7).unwrap();
        let krep = continuity_modulus(&k, &kres, &psi, 1e-3).unwrap();
        assert!(krep.empirical.iter().all(|e| e.1 == 0.0));
        assert!(continuity_modulus(&k, &kres[..1], &psi, 1e-3).is_err());
    }

    #[test]
    fn projection_examples() {
        let ch = flat_chart(2);
        let z = CPoint(vec![c(0.0, 0.0), c(0.2, 0.3)]);
        assert_eq!(ch.project_to_boundary(&z).unwrap(), CPoint(vec![c(0.0, 0.0), c(0.2, 0.0)]));
        let ch = ex21_chart();
        let z = CPoint(vec![c(0.05, 0.02), c(-0.03, 0.1)]);
        let p = ch.project_to_boundary(&z).unwrap();
        assert_eq!(ch.project_to_boundary(&p).unwrap(), p);
        assert!(ch.project_to_boundary(&CPoint(vec![c(1.0, 0.0), c(0.0, 0.0)])).is_err());
    }

    fn radial(p: &CPoint, dir: &CPoint, terms: usize) -> Vec<CPoint> {
        (1..=terms).map(|k| p.axpy_re(0.5f64.powi(k as i32), dir)).collect()
    }

    #[test]
    fn cluster_sets() {
        let p = CPoint::real(&[1.0, 0.0]);
        let f = |z: &CPoint| CPoint(vec![z[0] * z[0], z[1]]);
        let seqs = vec![
            radial(&p, &CPoint::real(&[-1.0, 0.0]), 30),
            radial(&p, &CPoint(vec![c(-0.5, 0.3), c(0.0, 0.2)]), 30),
        ];
        let cl = cluster_set_sample(&f, &p, &seqs).unwrap();
        assert_eq!(cl.len(), 1);
        assert!(cl[0].dist(&p) < 1e-6);

        let o = CPoint::zeros(2);
        let g = crate::psh::ex22_map();
        let seqs = vec![radial(&o, &CPoint::real(&[0.5, 0.0]), 30), radial(&o, &CPoint::real(&[0.3, 0.1]), 30)];
        let cl = cluster_set_sample(&|z: &CPoint| g.apply(z), &o, &seqs).unwrap();
        assert_eq!(cl.len(), 1);
        assert!(cl[0].norm() < 1e-6);

        let k = CPoint::real(&[0.3, 0.4]);
        let cl = cluster_set_sample(&|_: &CPoint| k.clone(), &o, &seqs).unwrap();
        assert_eq!(cl, vec![k.clone()]);

        let blow = |z: &CPoint| CPoint(vec![c(1.0, 0.0) / z[0], c(0.0, 0.0)]);
        assert!(matches!(cluster_set_sample(&blow, &o, &seqs), Err(Error::DivergentImage)));
    }

    #[test]
    fn ball_dichotomy_fails_eventually() {
        let seqs = ball_dichotomy_demo(20).unwrap();
        let rep = dichotomy_report(&seqs, &ball(2), &ball(2)).unwrap();
        assert!(rep.distinct_limits && rep.l_nondecreasing);
        assert!(rep.rows[19].l > rep.rows[0].l + 5.0);
        assert!(rep.failure_from.is_some_and(|nu| nu <= 20));
        // the fitted constants make both bounds valid for the exact distances
        for (i, r) in rep.rows.iter().enumerate() {
            assert!(r.upper >= kob_distance_ball_exact(&seqs.z1[i], &seqs.z2[i]).unwrap() - 1e-12);
            assert!(r.lower <= kob_distance_ball_exact(&seqs.w1[i], &seqs.w2[i]).unwrap() + 1e-12);
        }
    }

    #[test]
    fn ex22_dichotomy_stays_consistent() {
        let seqs = ex22_dichotomy_demo(20).unwrap();
        assert!(seqs.images_share_limit());
        let rep = dichotomy_report(&seqs, &ex22_d(), &ex22_omega()).unwrap();
        assert!(rep.l_nondecreasing && rep.rows[19].l > rep.rows[0].l);
        assert!(rep.failure_from.is_none(), "{:?}", rep.rows.last());
    }

    #[test]
    fn flat_dichotomy_table() {
        let inp = DichotomyInput {
            delta_d: [0.1, 0.1],
            delta_omega: [0.1, 0.1],
            sep: 0.0,
        };
        let rep = dichotomy_table(&[inp; 5], 1.0, 0.5, 1.0, false).unwrap();
        assert!(rep.rows.windows(2).all(|w| w[0].l == w[1].l));
        assert!(rep.rows.iter().all(|r| r.combined == 1.0));
    }

    #[test]
    fn dichotomy_rejects_separate_limits() {
        let a: Vec<CPoint> = (1..5).map(|k| CPoint::real(&[1.0 - 0.1f64.powi(k), 0.0])).collect();
        let b: Vec<CPoint> = (1..5).map(|k| CPoint::real(&[-1.0 + 0.1f64.powi(k), 0.0])).collect();
        assert!(DichotomySequences::new(a.clone(), b, a.clone(), a, 0.0, 0.0, 1.0).is_err());
    }
}
