//! One-sided Kobayashi metric and distance estimates, with closed-form ball
//! oracles for sandwich tests.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domains::{boundary_distance, directional_distance, DomainSpec};
use crate::error::{Error, Result};
use crate::point::CPoint;
use crate::psh::PshWitness;
use crate::regularity::ModulusOfContinuity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GrahamLower,
    GrahamUpper,
    Sibony,
    InscribedBall,
    LtcLower,
    CvxDistLower,
    FrDistUpper,
    PairLower,
    ExactOracle,
}

/// A one-sided bound on `k_D(z; v)` or `K_D(z₁, z₂)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricBound {
    pub value: f64,
    pub side: Side,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<CPoint>,
    /// Tangent vector for metric bounds, second point for distance bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<CPoint>,
    pub inputs: BTreeMap<String, f64>,
}

impl MetricBound {
    fn new(value: f64, side: Side, method: Method) -> Self {
        MetricBound {
            value,
            side,
            method,
            point: None,
            direction: None,
            inputs: BTreeMap::new(),
        }
    }

    fn at(mut self, z: &CPoint, v: &CPoint) -> Self {
        self.point = Some(z.clone());
        self.direction = Some(v.clone());
        self
    }

    fn input(mut self, key: &str, x: f64) -> Self {
        self.inputs.insert(key.to_string(), x);
        self
    }
}

fn require_ball_interior(z: &CPoint) -> Result<f64> {
    let s = 1.0 - z.norm_sqr();
    if !(s > 0.0) {
        return Err(Error::OutsideDomain);
    }
    Ok(s)
}

/// Kobayashi metric of the unit ball, normalized so `k(0; v) = ‖v‖`.
pub fn kob_metric_ball_exact(z: &CPoint, v: &CPoint) -> Result<f64> {
    z.check_dim(v.dim())?;
    let s = require_ball_interior(z)?;
    Ok((s * v.norm_sqr() + v.inner(z).norm_sqr()).sqrt() / s)
}

/// Kobayashi distance of the unit ball, `tanh⁻¹` of the Möbius pseudo-distance.
pub fn kob_distance_ball_exact(z: &CPoint, w: &CPoint) -> Result<f64> {
    z.check_dim(w.dim())?;
    let sz = require_ball_interior(z)?;
    let sw = require_ball_interior(w)?;
    let denom = (crate::point::c(1.0, 0.0) - z.inner(w)).norm_sqr();
    let m = (1.0 - sz * sw / denom).max(0.0).sqrt();
    Ok(m.min(1.0 - f64::EPSILON).atanh())
}

/// `‖v‖/(2δ)` and `‖v‖/δ` for a precomputed directional distance `δ = δ_D(z; v)`.
pub fn graham_from_directional(z: &CPoint, v: &CPoint, delta_v: f64) -> (MetricBound, MetricBound) {
    let nv = v.norm();
    let lo = MetricBound::new(nv / (2.0 * delta_v), Side::Lower, Method::GrahamLower)
        .at(z, v)
        .input("delta_v", delta_v);
    let hi = MetricBound::new(nv / delta_v, Side::Upper, Method::GrahamUpper)
        .at(z, v)
        .input("delta_v", delta_v);
    (lo, hi)
}

/// Graham's bounds `‖v‖/(2δ_D(z;v)) ≤ k_D(z;v) ≤ ‖v‖/δ_D(z;v)` on a convex domain.
pub fn graham_bounds(d: &DomainSpec, z: &CPoint, v: &CPoint) -> Result<(MetricBound, MetricBound)> {
    if !d.is_convex {
        return Err(Error::NotConvex);
    }
    let delta_v = directional_distance(d, z, v)?;
    Ok(graham_from_directional(z, v, delta_v))
}

/// `√(c/α)·‖v‖/|u(z)|^{1/2}` for a negative psh `u` with Levi form `⪰ c·I` at `z`.
pub fn sibony_lower_bound(u: &PshWitness, z: &CPoint, v: &CPoint, c: f64, alpha: f64) -> Result<MetricBound> {
    let uz = u.eval(z);
    if !(uz < 0.0) {
        return Err(Error::InvalidArgument(format!("u(z) = {uz} must be negative")));
    }
    if !(c > 0.0 && alpha > 0.0) {
        return Err(Error::InvalidArgument("c and α must be positive".into()));
    }
    Ok(
        MetricBound::new((c / alpha).sqrt() * v.norm() / (-uz).sqrt(), Side::Lower, Method::Sibony)
            .at(z, v)
            .input("c", c)
            .input("alpha", alpha)
            .input("u", uz),
    )
}

/// Default value of Sibony's uniform constant.
pub const SIBONY_ALPHA: f64 = 4.0;

/// `(β, c̃)` for the rate `M(t) = c̃√t` on `{|z|+|w|<1}`: `β = √(c/α)·2^{−1/4}`
/// from `δ = |u|/√2`, and `c̃ = max(1/β, 2√2)`.
pub fn ex21_rate_constants(c: f64, alpha: f64) -> (f64, f64) {
    let beta = (c / alpha).sqrt() * 2f64.powf(-0.25);
    (beta, (1.0 / beta).max(2.0 * std::f64::consts::SQRT_2))
}

/// `‖v‖/δ_D(z)`.
pub fn inscribed_ball_upper_bound(d: &DomainSpec, z: &CPoint, v: &CPoint) -> Result<MetricBound> {
    let delta = boundary_distance(d, z)?;
    Ok(MetricBound::new(v.norm() / delta, Side::Upper, Method::InscribedBall)
        .at(z, v)
        .input("delta", delta))
}

/// Fitted constants in `δ_D(z;v) ≤ C/|log δ_D(z)|^{1+ν}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LtcFit {
    pub c: f64,
    pub nu: f64,
    pub sample_count: usize,
    pub max_violation: f64,
}

impl LtcFit {
    /// Largest `δ(z;v) − C/|log δ(z)|^{1+ν}` over `(δ(z), δ(z;v))` pairs.
    pub fn violation_on(&self, values: &[(f64, f64)]) -> f64 {
        values
            .iter()
            .map(|&(d, dv)| dv - self.c / (-d.ln()).powf(1.0 + self.nu))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Scale `c = 1/(2C)` of the metric lower bound.
    pub fn metric_scale(&self) -> f64 {
        0.5 / self.c
    }

    pub fn metric_lower_bound(&self, w: &CPoint, v: &CPoint, delta: f64) -> Result<MetricBound> {
        Ok(ltc_metric_lower_bound(self.metric_scale(), self.nu, v, delta)?
            .at(w, v)
            .input("C", self.c))
    }
}

pub const LTC_NU_STEP: f64 = 0.05;
pub const LTC_NU_MAX: f64 = 5.0;
const LTC_MIN_BANDS: usize = 3;

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-type convexity fit from `(δ(z), δ(z;v))` pairs.  A grid value `ν` is
/// admissible when the per-band envelopes of `δ(z;v)·|log δ(z)|^{1+ν}` do not
/// grow as `δ(z) → 0`; the largest admissible `ν` is kept and `C` is the
/// envelope maximum.
pub fn ltc_fit_values(values: &[(f64, f64)]) -> Result<LtcFit> {
    if values.iter().any(|&(d, dv)| !(d > 0.0 && d < 1.0) || !(dv > 0.0)) {
        return Err(Error::InvalidArgument("log-type fit needs 0 < δ(z) < 1 and δ(z;v) > 0".into()));
    }
    let mut bands: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
    for &(d, dv) in values {
        bands.entry((-d.log2()).floor() as i64).or_default().push((-d.ln(), dv));
    }
    if bands.len() < LTC_MIN_BANDS {
        return Err(Error::TooFewBands {
            found: bands.len(),
            needed: LTC_MIN_BANDS,
        });
    }
    let steps = (LTC_NU_MAX / LTC_NU_STEP).round() as usize;
    for k in (1..=steps).rev() {
        let nu = k as f64 * LTC_NU_STEP;
        let (xs, ys): (Vec<f64>, Vec<f64>) = bands
            .values()
            .map(|b| {
                let ell = b.iter().map(|p| p.0).sum::<f64>() / b.len() as f64;
                let env = b.iter().map(|&(l, dv)| dv * l.powf(1.0 + nu)).fold(0.0, f64::max);
                (ell.ln(), env.ln())
            })
            .unzip();
        if regression_slope(&xs, &ys) <= 0.0 {
            let c = values
                .iter()
                .map(|&(d, dv)| dv * (-d.ln()).powf(1.0 + nu))
                .fold(0.0, f64::max)
                * (1.0 + 1e-12);
            let mut fit = LtcFit {
                c,
                nu,
                sample_count: values.len(),
                max_violation: 0.0,
            };
            fit.max_violation = fit.violation_on(values);
            return Ok(fit);
        }
    }
    Err(Error::NotLogTypeConvex)
}

/// `(δ(z), δ(z;v))` for each sample.
pub fn ltc_values(d: &DomainSpec, samples: &[(CPoint, CPoint)]) -> Result<Vec<(f64, f64)>> {
    samples
        .iter()
        .map(|(z, v)| Ok((boundary_distance(d, z)?, directional_distance(d, z, v)?)))
        .collect()
}

pub fn ltc_fit(d: &DomainSpec, samples: &[(CPoint, CPoint)]) -> Result<LtcFit> {
    if !d.is_convex {
        return Err(Error::NotConvex);
    }
    ltc_fit_values(&ltc_values(d, samples)?)
}

/// `c·‖v‖·(log 1/δ)^{1+ν}`.
pub fn ltc_metric_lower_bound(c: f64, nu: f64, v: &CPoint, delta: f64) -> Result<MetricBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < δ < 1, got {delta}")));
    }
    Ok(
        MetricBound::new(c * v.norm() * (-delta.ln()).powf(1.0 + nu), Side::Lower, Method::LtcLower)
            .input("c", c)
            .input("nu", nu)
            .input("delta", delta),
    )
}

/// `½|log(δ/δ′)|`, a lower bound for the distance on a convex domain.
pub fn convex_distance_lower_bound(delta: f64, delta_prime: f64) -> Result<MetricBound> {
    if !(delta > 0.0 && delta_prime > 0.0) {
        return Err(Error::InvalidArgument("distances to the boundary must be positive".into()));
    }
    Ok(
        MetricBound::new(0.5 * (delta / delta_prime).ln().abs(), Side::Lower, Method::CvxDistLower)
            .input("delta", delta)
            .input("delta_prime", delta_prime),
    )
}

/// `Σ ½log(1/δⱼ) − Σ ½log(1/(δⱼ+sep)) + C`.
pub fn fr_distance_upper_bound(d1: f64, d2: f64, sep: f64, c: f64) -> Result<MetricBound> {
    if !(d1 > 0.0 && d2 > 0.0) || !(sep >= 0.0) {
        return Err(Error::InvalidArgument("need δ₁, δ₂ > 0 and sep ≥ 0".into()));
    }
    let v = 0.5 * ((d1 + sep) / d1).ln() + 0.5 * ((d2 + sep) / d2).ln() + c;
    Ok(MetricBound::new(v, Side::Upper, Method::FrDistUpper)
        .input("delta_1", d1)
        .input("delta_2", d2)
        .input("sep", sep)
        .input("C", c))
}

/// `½log(1/δ₁) + ½log(1/δ₂) − K`.
pub fn pair_lower_bound(d1: f64, d2: f64, k: f64) -> Result<MetricBound> {
    if !(d1 > 0.0 && d1 <= 1.0 && d2 > 0.0 && d2 <= 1.0) {
        return Err(Error::InvalidArgument("need δ₁, δ₂ in (0, 1]".into()));
    }
    Ok(
        MetricBound::new(-0.5 * d1.ln() - 0.5 * d2.ln() - k, Side::Lower, Method::PairLower)
            .input("delta_1", d1)
            .input("delta_2", d2)
            .input("K", k),
    )
}

/// Polygonal-path upper estimate of `K_D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSettings {
    pub segments: usize,
    pub control_points: usize,
    /// Coordinate-descent sweeps; 0 keeps the straight segment.
    pub sweeps: usize,
    /// Initial descent step, as a fraction of `‖b − a‖`.
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for PathSettings {
    fn default() -> Self {
        PathSettings {
            segments: 128,
            control_points: 7,
            sweeps: 40,
            initial_step: 0.25,
            min_step: 1e-3,
        }
    }
}

fn path_length(d: &DomainSpec, nodes: &[CPoint], per_leg: usize) -> f64 {
    let mut total = 0.0;
    for leg in nodes.windows(2) {
        let step = &(&leg[1] - &leg[0]) * (1.0 / per_leg as f64);
        let len = step.norm();
        for k in 0..per_leg {
            let mid = leg[0].axpy_re(k as f64 + 0.5, &step);
            match boundary_distance(d, &mid) {
                Ok(delta) if delta > 0.0 => total += len / delta,
                _ => return f64::INFINITY,
            }
        }
    }
    total
}

/// Integrates `‖γ′‖/δ_D(γ)` along a polyline from `a` to `b` (midpoint rule),
/// shortening the polyline by coordinate descent on its interior nodes.
pub fn path_distance_upper(d: &DomainSpec, a: &CPoint, b: &CPoint, s: &PathSettings) -> Result<f64> {
    for z in [a, b] {
        if !d.contains(z)? {
            return Err(Error::OutsideDomain);
        }
    }
    let legs = s.control_points + 1;
    let per_leg = (s.segments / legs).max(1);
    let mut nodes: Vec<CPoint> = (0..=legs)
        .map(|k| a.axpy_re(k as f64 / legs as f64, &(b - a)))
        .collect();
    let mut best = path_length(d, &nodes, per_leg);
    let span = a.dist(b);
    if span == 0.0 {
        return Ok(0.0);
    }
    let mut step = s.initial_step * span;
    let n = a.dim();
    for _ in 0..s.sweeps {
        let mut improved = false;
        for i in 1..legs {
            for coord in 0..2 * n {
                for sign in [1.0, -1.0] {
                    let mut trial = nodes.clone();
                    let delta = sign * step;
                    if coord % 2 == 0 {
                        trial[i].0[coord / 2].re += delta;
                    } else {
                        trial[i].0[coord / 2].im += delta;
                    }
                    let len = path_length(d, &trial, per_leg);
                    if len < best {
                        best = len;
                        nodes = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < s.min_step * span {
                break;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::NonConvergence {
            what: "path distance",
            estimate: best,
        });
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairConstant {
    /// Largest Gromov product `est(w₁,o) + est(o,w₂) − est(w₁,w₂)`.
    pub k_prime: f64,
    /// `max(0, K′ − log δ(o))`.
    pub k: f64,
    pub pairs: usize,
}

/// Fits the Gromov-product constant over all pairs from two sample clouds with
/// disjoint closures.
pub fn fit_pair_constant(
    d: &DomainSpec,
    base: &CPoint,
    near_q: &[CPoint],
    near_xi: &[CPoint],
    estimator: &dyn Fn(&CPoint, &CPoint) -> Result<f64>,
) -> Result<PairConstant> {
    let gap = near_q
        .iter()
        .flat_map(|a| near_xi.iter().map(move |b| a.dist(b)))
        .fold(f64::INFINITY, f64::min);
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument("sample clouds must be disjoint".into()));
    }
    let to_base_q: Vec<f64> = near_q.iter().map(|w| estimator(w, base)).collect::<Result<_>>()?;
    let to_base_xi: Vec<f64> = near_xi.iter().map(|w| estimator(base, w)).collect::<Result<_>>()?;
    let mut k_prime = f64::NEG_INFINITY;
    for (i, w1) in near_q.iter().enumerate() {
        for (j, w2) in near_xi.iter().enumerate() {
            let g = to_base_q[i] + to_base_xi[j] - estimator(w1, w2)?;
            k_prime = k_prime.max(g);
        }
    }
    let delta_o = boundary_distance(d, base)?;
    Ok(PairConstant {
        k_prime,
        k: (k_prime - delta_o.ln()).max(0.0),
        pairs: near_q.len() * near_xi.len(),
    })
}

pub type LowerSource<'a> = &'a dyn Fn(&CPoint, &CPoint) -> Result<MetricBound>;

/// Upper estimate of `M(r) = sup 1/k(w;v)` over unit `v`, from lower bounds on `k`.
pub fn goldilocks_m(d: &DomainSpec, r: f64, source: LowerSource<'_>, samples: &[(CPoint, CPoint)]) -> Result<f64> {
    let mut m: f64 = 0.0;
    for (w, v) in samples {
        let delta = boundary_distance(d, w)?;
        if delta > r {
            return Err(Error::InvalidArgument(format!("sample with δ = {delta} exceeds r = {r}")));
        }
        let lb = source(w, v)?;
        if !(lb.value > 0.0) {
            return Err(Error::InvalidArgument(format!("zero metric lower bound at {w:?}")));
        }
        m = m.max(v.norm() / lb.value);
    }
    Ok(m)
}

/// `M(r)` on each radius in `radii`, over the samples with `δ ≤ r`, as a monotone table.
pub fn goldilocks_profile(
    d: &DomainSpec,
    radii: &[f64],
    source: LowerSource<'_>,
    samples: &[(CPoint, CPoint)],
) -> Result<ModulusOfContinuity> {
    let deltas: Vec<f64> = samples.iter().map(|(w, _)| boundary_distance(d, w)).collect::<Result<_>>()?;
    let mut table = Vec::with_capacity(radii.len());
    for &r in radii {
        let subset: Vec<(CPoint, CPoint)> = samples
            .iter()
            .zip(&deltas)
            .filter(|(_, &dl)| dl <= r)
            .map(|(s, _)| s.clone())
            .collect();
        table.push((r, goldilocks_m(d, r, source, &subset)?));
    }
    ModulusOfContinuity::from_samples(table)
}

/// `K_local − K_global`; admissible estimates land in `[0, K]`.
pub fn localization_gap(k_local: f64, k_global: f64) -> f64 {
    k_local - k_global
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{ball, directional_distance_bruteforce, ex21_omega, polydisc};
    use crate::point::c;

    #[test]
    fn ball_metric_examples() {
        let e1 = CPoint::basis(2, 0);
        let e2 = CPoint::basis(2, 1);
        let v = CPoint(vec![c(0.3, 0.4), c(-1.0, 0.2)]);
        assert!((kob_metric_ball_exact(&CPoint::zeros(2), &v).unwrap() - v.norm()).abs() < 1e-15);
        let z = CPoint::real(&[0.5, 0.0]);
        assert!((kob_metric_ball_exact(&z, &e1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((kob_metric_ball_exact(&z, &e2).unwrap() - 1.0 / 0.75f64.sqrt()).abs() < 1e-15);
        assert!(kob_metric_ball_exact(&CPoint::real(&[1.0, 0.0]), &e1).is_err());
    }

    #[test]
    fn ball_distance_matches_metric_along_radius() {
        // K(0, t e1) = atanh(t) = ∫₀ᵗ ds/(1−s²)
        let z = CPoint::real(&[0.6, 0.0]);
        assert!((kob_distance_ball_exact(&CPoint::zeros(2), &z).unwrap() - 0.6f64.atanh()).abs() < 1e-15);
        let w = CPoint(vec![c(0.1, 0.2), c(-0.3, 0.4)]);
        let a = kob_distance_ball_exact(&z, &w).unwrap();
        assert!((a - kob_distance_ball_exact(&w, &z).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn graham_examples() {
        let b = ball(2);
        let e1 = CPoint::basis(2, 0);
        let (lo, hi) = graham_bounds(&b, &CPoint::zeros(2), &e1).unwrap();
        assert!((lo.value - 0.5).abs() < 1e-9 && (hi.value - 1.0).abs() < 1e-9);
        let (lo, hi) = graham_bounds(&b, &CPoint::real(&[0.5, 0.0]), &e1).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-9 && (hi.value - 2.0).abs() < 1e-9);
        let exact = 4.0 / 3.0;
        assert!(lo.value <= exact && exact <= hi.value);
        assert!(matches!(
            graham_bounds(&crate::domains::ex22_d(), &CPoint::real(&[0.5, 0.0]), &e1),
            Err(Error::NotConvex)
        ));
    }

    #[test]
    fn graham_on_tube_at_axis() {
        let d = ex21_omega();
        let z = CPoint::real(&[0.5, 0.0]);
        let v = CPoint::real(&[0.6, 0.8]);
        let (lo, _) = graham_bounds(&d, &z, &v).unwrap();
        let dv = directional_distance_bruteforce(&d, &z, &v).unwrap();
        assert!((lo.value - 1.0 / (2.0 * dv)).abs() < 1e-6);
        // δ((|z|,0); (|v₁|,|v₂|)) ≤ √2·δ(z,0)
        assert!(dv <= 2f64.sqrt() * 0.5 / 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn sibony_examples() {
        let u = crate::psh::ball_rho(2);
        let e1 = CPoint::basis(2, 0);
        let b = sibony_lower_bound(&u, &CPoint::zeros(2), &e1, 1.0, 1.0).unwrap();
        assert!((b.value - 1.0).abs() < 1e-15);
        let b2 = sibony_lower_bound(&u, &CPoint::zeros(2), &e1.scale_re(2.0), 1.0, 1.0).unwrap();
        assert!((b2.value - 2.0 * b.value).abs() < 1e-15);
        assert!(sibony_lower_bound(&u, &CPoint::real(&[1.5, 0.0]), &e1, 1.0, 1.0).is_err());
        let (beta, ct) = ex21_rate_constants(0.25, SIBONY_ALPHA);
        assert!((beta - 0.25 * 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((ct - 1.0 / beta).abs() < 1e-12 && ct > 2.0 * 2f64.sqrt());
        // on {|z|+|w|<1} the Sibony bound is β‖v‖/√δ, since |u| = √2·δ
        let u = crate::psh::ex21_u();
        let z = CPoint(vec![c(0.5, 0.1), c(0.2, -0.1)]);
        let v = CPoint(vec![c(0.3, 0.0), c(0.0, 1.0)]);
        let s = sibony_lower_bound(&u, &z, &v, 0.25, SIBONY_ALPHA).unwrap();
        let delta = crate::domains::boundary_distance(&ex21_omega(), &z).unwrap();
        assert!((s.value - beta * v.norm() / delta.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn inscribed_ball_examples() {
        let b = ball(2);
        let e1 = CPoint::basis(2, 0);
        assert!((inscribed_ball_upper_bound(&b, &CPoint::zeros(2), &e1).unwrap().value - 1.0).abs() < 1e-15);
        let ub = inscribed_ball_upper_bound(&b, &CPoint::real(&[0.5, 0.0]), &e1).unwrap();
        assert!((ub.value - 2.0).abs() < 1e-15 && ub.value >= 4.0 / 3.0);
        assert_eq!(inscribed_ball_upper_bound(&b, &CPoint::zeros(2), &CPoint::zeros(2)).unwrap().value, 0.0);
    }

    #[test]
    fn scalar_bound_examples() {
        let l = convex_distance_lower_bound(0.01, 0.1).unwrap();
        assert!((l.value - 0.5 * 10f64.ln()).abs() < 1e-15);
        assert_eq!(convex_distance_lower_bound(0.3, 0.3).unwrap().value, 0.0);
        assert_eq!(
            convex_distance_lower_bound(0.1, 0.01).unwrap().value,
            convex_distance_lower_bound(0.01, 0.1).unwrap().value
        );
        let u = fr_distance_upper_bound(0.01, 0.01, 0.1, 1.0).unwrap();
        assert!((u.value - (100f64.ln() - (1.0 / 0.11f64).ln() + 1.0)).abs() < 1e-12);
        assert!((u.value - 3.39790).abs() < 1e-5);
        assert_eq!(fr_distance_upper_bound(0.2, 0.3, 0.0, 1.7).unwrap().value, 1.7);
        let e = (-2.0f64).exp();
        assert!((pair_lower_bound(e, e, 1.0).unwrap().value - 1.0).abs() < 1e-15);
        assert_eq!(pair_lower_bound(1.0, 1.0, 0.0).unwrap().value, 0.0);
        let lhs = pair_lower_bound(0.3, 0.02, 0.7).unwrap().value;
        let rhs = pair_lower_bound(0.3, 1.0, 0.0).unwrap().value + pair_lower_bound(1.0, 0.02, 0.0).unwrap().value - 0.7;
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn ltc_lower_bound_examples() {
        let e1 = CPoint::basis(2, 0);
        assert!((ltc_metric_lower_bound(1.0, 1.0, &e1, (-1.0f64).exp()).unwrap().value - 1.0).abs() < 1e-14);
        assert!((ltc_metric_lower_bound(1.0, 1.0, &e1, (-2.0f64).exp()).unwrap().value - 4.0).abs() < 1e-14);
        let a = ltc_metric_lower_bound(0.3, 0.5, &e1, 0.1).unwrap().value;
        let b = ltc_metric_lower_bound(0.3, 0.5, &e1, 0.01).unwrap().value;
        assert!(b > a);
        assert!(ltc_metric_lower_bound(1.0, 1.0, &e1, 1.0).is_err());
    }

    fn radial_samples(n: usize) -> Vec<(CPoint, CPoint)> {
        (1..=n)
            .map(|k| {
                let d = 2f64.powf(-(k as f64) / 2.0 - 1.0);
                (CPoint::real(&[1.0 - d, 0.0]), CPoint::basis(2, 1))
            })
            .collect()
    }

    #[test]
    fn ltc_fit_ball_succeeds() {
        let fit = ltc_fit(&ball(2), &radial_samples(30)).unwrap();
        assert!(fit.max_violation <= 0.0 && fit.nu > 0.0, "{fit:?}");
    }

    #[test]
    fn ltc_fit_flat_face_fails() {
        let samples: Vec<(CPoint, CPoint)> = (1..=30)
            .map(|k| {
                let d = 2f64.powf(-(k as f64) / 2.0 - 1.0);
                (CPoint::real(&[1.0 - d, 0.0]), CPoint::basis(2, 1))
            })
            .collect();
        assert!(matches!(ltc_fit(&polydisc(2), &samples), Err(Error::NotLogTypeConvex)));
    }

    #[test]
    fn pair_constant_examples() {
        let b = ball(2);
        let o = CPoint::zeros(2);
        let exact = |a: &CPoint, w: &CPoint| kob_distance_ball_exact(a, w);
        let cap = |s: f64| -> Vec<CPoint> {
            (0..10)
                .map(|k| {
                    let t = k as f64 * 0.02;
                    CPoint(vec![c(s * (0.9 - t), 0.0), c(0.0, 0.05 * (k as f64 - 4.5) * 0.1)])
                })
                .collect()
        };
        let k = fit_pair_constant(&b, &o, &cap(1.0), &cap(-1.0), &exact).unwrap();
        assert_eq!(k.pairs, 100);
        // off-axis caps: small positive Gromov products; δ(o) = 1 so K = K′
        assert!(k.k_prime >= 0.0 && k.k_prime < 1e-2 && k.k == k.k_prime, "{k:?}");
        let small = fit_pair_constant(&b, &o, &cap(1.0)[..3], &cap(-1.0)[..3], &exact).unwrap();
        assert!(small.k <= k.k);
        assert!(fit_pair_constant(&b, &o, &cap(1.0), &cap(1.0), &exact).is_err());
    }

    #[test]
    fn path_estimate_is_an_upper_bound_on_the_ball() {
        let b = ball(2);
        let z = CPoint::real(&[-0.5, 0.1]);
        let w = CPoint(vec![c(0.4, 0.2), c(0.0, -0.3)]);
        let exact = kob_distance_ball_exact(&z, &w).unwrap();
        let straight = path_distance_upper(&b, &z, &w, &PathSettings { sweeps: 0, ..Default::default() }).unwrap();
        let shortened = path_distance_upper(&b, &z, &w, &PathSettings::default()).unwrap();
        assert!(shortened <= straight);
        assert!(shortened >= exact - 1e-6, "{shortened} < {exact}");
    }

    #[test]
    fn goldilocks_examples() {
        let b = ball(2);
        let graham = |w: &CPoint, v: &CPoint| graham_bounds(&b, w, v).map(|p| p.0);
        let samples: Vec<(CPoint, CPoint)> = (0..8)
            .map(|k| {
                let th = k as f64 * 0.7;
                (CPoint(vec![c(0.95 * th.cos(), 0.0), c(0.0, 0.95 * th.sin())]), CPoint(vec![c(0.0, 1.0), c(1.0, 0.0)]))
            })
            .collect();
        let m = goldilocks_m(&b, 0.1, &graham, &samples).unwrap();
        let sup_dv = samples
            .iter()
            .map(|(w, v)| 2.0 * directional_distance(&b, w, v).unwrap())
            .fold(0.0, f64::max);
        assert!((m - sup_dv).abs() < 1e-9);
        assert!(goldilocks_m(&b, 0.01, &graham, &samples).is_err());
        let m_small = goldilocks_m(&b, 0.1, &graham, &samples[..3]).unwrap();
        assert!(m_small <= m);
    }

    #[test]
    fn localization_gap_sign() {
        assert_eq!(localization_gap(1.5, 1.5), 0.0);
        assert!(localization_gap(1.0, 1.2) < 0.0);
    }
}
