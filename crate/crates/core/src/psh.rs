//! Levi forms, plurisubharmonicity checks, Hopf-constant fitting, pushforward
//! barriers and the derivative bound `ψ`.

use std::sync::Arc;

use crate::domains::{boundary_distance, DomainSpec, PointFn, ScalarFn};
use crate::error::{Error, Result};
use crate::point::{c, CMatrix, CPoint};
use crate::regularity::{dini_integral, DiniIntegral, ModulusOfContinuity};

pub type HessianFn = Arc<dyn Fn(&CPoint) -> Result<CMatrix> + Send + Sync>;
pub type SmoothFn = Arc<dyn Fn(&CPoint) -> bool + Send + Sync>;
pub type FiberFn = Arc<dyn Fn(&CPoint) -> Vec<CPoint> + Send + Sync>;

/// A real function on C^n with an optional complex Hessian `∂²u/∂z_j∂z̄_k`
/// and an optional smooth-locus predicate.
#[derive(Clone)]
pub struct PshWitness {
    pub label: String,
    value: ScalarFn,
    hessian: Option<HessianFn>,
    smooth: Option<SmoothFn>,
}

impl std::fmt::Debug for PshWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PshWitness({})", self.label)
    }
}

impl PshWitness {
    pub fn new(label: impl Into<String>, value: impl Fn(&CPoint) -> f64 + Send + Sync + 'static) -> Self {
        PshWitness {
            label: label.into(),
            value: Arc::new(value),
            hessian: None,
            smooth: None,
        }
    }

    pub fn with_hessian(mut self, h: impl Fn(&CPoint) -> Result<CMatrix> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn with_smooth_locus(mut self, s: impl Fn(&CPoint) -> bool + Send + Sync + 'static) -> Self {
        self.smooth = Some(Arc::new(s));
        self
    }

    /// The same witness multiplied by `a > 0`.
    pub fn scaled(&self, a: f64) -> Self {
        let v = self.value.clone();
        let h = self.hessian.clone();
        PshWitness {
            label: format!("{a}·{}", self.label),
            value: Arc::new(move |z| a * v(z)),
            hessian: h.map(|h| -> HessianFn {
                Arc::new(move |z| {
                    let m = h(z)?;
                    let n = m.dim();
                    CMatrix::from_rows((0..n).map(|i| (0..n).map(|j| m.get(i, j) * a).collect()).collect())
                })
            }),
            smooth: self.smooth.clone(),
        }
    }

    pub fn eval(&self, z: &CPoint) -> f64 {
        (self.value)(z)
    }

    pub fn is_smooth_at(&self, z: &CPoint) -> bool {
        self.smooth.as_ref().map_or(true, |s| s(z))
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn hessian(&self, z: &CPoint) -> Option<Result<CMatrix>> {
        self.hessian.as_ref().map(|h| h(z))
    }
}

/// `u(z) = |z₁| + |z₂| − 1`, smooth where both coordinates are nonzero.
pub fn ex21_u() -> PshWitness {
    PshWitness::new("|z1| + |z2| - 1", |z: &CPoint| z[0].norm() + z[1].norm() - 1.0)
        .with_hessian(|z: &CPoint| {
            let (a, b) = (z[0].norm(), z[1].norm());
            if a == 0.0 || b == 0.0 {
                return Err(Error::NonSmooth("|z1| + |z2| is not smooth on the coordinate axes".into()));
            }
            let zero = c(0.0, 0.0);
            CMatrix::from_rows(vec![vec![c(0.25 / a, 0.0), zero], vec![zero, c(0.25 / b, 0.0)]])
        })
        .with_smooth_locus(|z: &CPoint| z[0].norm() > 0.0 && z[1].norm() > 0.0)
}

/// `ρ(z) = C̃ (|z₁|² + |z₂| − 1)`.
pub fn ex21_rho(c_tilde: f64) -> PshWitness {
    PshWitness::new(format!("{c_tilde}·(|z1|^2 + |z2| - 1)"), move |z: &CPoint| {
        c_tilde * (z[0].norm_sqr() + z[1].norm() - 1.0)
    })
    .with_smooth_locus(|z: &CPoint| z[1].norm() > 0.0)
}

/// `∂²ρ/∂w∂w̄` for `ρ = exp(−1/|w|⁴) − Re z`, in closed form.
pub fn ex22_rho_ww(w_abs: f64) -> f64 {
    if w_abs == 0.0 {
        return 0.0;
    }
    let r4 = w_abs.powi(4);
    4.0 * w_abs.powi(-6) * (-1.0 / r4).exp() * (1.0 / r4 - 1.0)
}

/// `ρ(z, w) = exp(−1/|w|⁴) − Re z` with its closed-form complex Hessian.
pub fn ex22_rho() -> PshWitness {
    PshWitness::new("exp(-1/|z2|^4) - re(z1)", crate::domains::ex22_rho).with_hessian(|z: &CPoint| {
        let zero = c(0.0, 0.0);
        CMatrix::from_rows(vec![vec![zero, zero], vec![zero, c(ex22_rho_ww(z[1].norm()), 0.0)]])
    })
}

/// `‖z‖² − 1`.
pub fn ball_rho(n: usize) -> PshWitness {
    PshWitness::new("|z|^2 - 1", |z: &CPoint| z.norm_sqr() - 1.0).with_hessian(move |_| Ok(CMatrix::identity(n)))
}

/// `−δ_D`, with distances from the domain's closed form or numerics.
pub fn negative_distance(d: &DomainSpec) -> PshWitness {
    let d = d.clone();
    PshWitness::new(format!("-delta_{}", d.name), move |z: &CPoint| {
        -boundary_distance(&d, z).unwrap_or(f64::NAN)
    })
}

/// Base finite-difference step, scaled by `1 + ‖z‖` and rounded to a power of two.
pub const LEVI_STEP: f64 = 1.0 / 1024.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeviEstimate {
    pub value: f64,
    /// `|D(h/2) − D(h)|`, the Richardson consistency gap.
    pub richardson_gap: f64,
    pub step: f64,
}

fn second_difference(u: &PshWitness, z: &CPoint, dir: &CPoint, h: f64, u0: f64) -> f64 {
    (u.eval(&z.axpy_re(h, dir)) - 2.0 * u0 + u.eval(&z.axpy_re(-h, dir))) / (h * h)
}

/// Levi form by central second differences along `v` and `iv`, with one
/// Richardson step at half spacing.
pub fn levi_form_fd(u: &PshWitness, z: &CPoint, v: &CPoint) -> Result<LeviEstimate> {
    z.check_dim(v.dim())?;
    let nv = v.norm();
    if nv == 0.0 {
        return Ok(LeviEstimate {
            value: 0.0,
            richardson_gap: 0.0,
            step: 0.0,
        });
    }
    let vhat = v.scale_re(1.0 / nv);
    let ivhat = vhat.scale(c(0.0, 1.0));
    let h = 2f64.powi((LEVI_STEP * (1.0 + z.norm())).log2().round() as i32);
    let u0 = u.eval(z);
    let at = |s: f64| 0.25 * (second_difference(u, z, &vhat, s, u0) + second_difference(u, z, &ivhat, s, u0));
    let coarse = at(h);
    let fine = at(0.5 * h);
    let value = (4.0 * fine - coarse) / 3.0 * nv * nv;
    if !value.is_finite() {
        return Err(Error::NonSmooth("non-finite Levi form difference".into()));
    }
    Ok(LeviEstimate {
        value,
        richardson_gap: (fine - coarse).abs() * nv * nv,
        step: h,
    })
}

/// `⟨v, (∂²u/∂z∂z̄)(z) v⟩`, from the analytic Hessian when present.
pub fn levi_form(u: &PshWitness, z: &CPoint, v: &CPoint) -> Result<f64> {
    if !u.is_smooth_at(z) {
        return Err(Error::NonSmooth(format!("{} is not smooth at {z:?}", u.label)));
    }
    match u.hessian(z) {
        Some(h) => {
            let h = h?;
            z.check_dim(h.dim())?;
            v.check_dim(h.dim())?;
            let mut acc = c(0.0, 0.0);
            for j in 0..h.dim() {
                for k in 0..h.dim() {
                    acc += h.get(j, k) * v[j] * v[k].conj();
                }
            }
            Ok(acc.re)
        }
        None => Ok(levi_form_fd(u, z, v)?.value),
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct PshReport {
    pub checked: usize,
    pub violations: usize,
    pub min_levi: f64,
    /// `(sample, direction)` indices of the minimum.
    pub argmin: (usize, usize),
}

/// Tolerance on negative Levi-form values.
pub const PSH_TOL: f64 = 1e-8;

/// Levi form at every sample in every direction; values below `−1e−8` are violations.
pub fn check_psh(u: &PshWitness, d: &DomainSpec, samples: &[CPoint], directions: &[CPoint]) -> Result<PshReport> {
    let mut rep = PshReport {
        checked: 0,
        violations: 0,
        min_levi: f64::INFINITY,
        argmin: (0, 0),
    };
    for (i, z) in samples.iter().enumerate() {
        if !d.contains(z)? {
            return Err(Error::OutsideDomain);
        }
        for (j, v) in directions.iter().enumerate() {
            let l = levi_form(u, z, v)?;
            rep.checked += 1;
            if l < -PSH_TOL {
                rep.violations += 1;
            }
            if l < rep.min_levi {
                rep.min_levi = l;
                rep.argmin = (i, j);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "alpha")]
pub enum AlphaMode {
    Fixed(f64),
    Fit,
}

/// Constants in `φ ≤ −C·δ^α`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct HopfFit {
    pub c: f64,
    pub alpha: f64,
    pub mode: AlphaMode,
    /// Largest `φ + C·δ^α` on the fitting set.
    pub residual: f64,
    /// Largest `−δ − φ`; nonpositive means `φ ≥ −δ` on the fitting set.
    pub lower_margin: f64,
    pub bands: usize,
    pub samples: usize,
}

impl HopfFit {
    /// Largest `φ + C·δ^α` over `(φ, δ)` pairs.
    pub fn residual_on(&self, values: &[(f64, f64)]) -> f64 {
        values
            .iter()
            .map(|&(phi, delta)| phi + self.c * delta.powf(self.alpha))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Minimum number of dyadic `δ` bands for a Hopf fit.
pub const HOPF_MIN_BANDS: usize = 4;

fn dyadic_band(delta: f64) -> i64 {
    (-delta.log2()).floor() as i64
}

/// Fits `C` (and `α` in fit mode) from `(φ, δ)` pairs.
pub fn hopf_fit_values(values: &[(f64, f64)], mode: AlphaMode) -> Result<HopfFit> {
    if values.iter().any(|&(phi, delta)| !(phi < 0.0) || !(delta > 0.0)) {
        return Err(Error::InvalidArgument("Hopf fit needs φ < 0 and δ > 0 on every sample".into()));
    }
    let mut bands: Vec<i64> = values.iter().map(|v| dyadic_band(v.1)).collect();
    bands.sort_unstable();
    bands.dedup();
    if bands.len() < HOPF_MIN_BANDS {
        return Err(Error::TooFewBands {
            found: bands.len(),
            needed: HOPF_MIN_BANDS,
        });
    }
    let alpha = match mode {
        AlphaMode::Fixed(a) => {
            if !(a >= 1.0) {
                return Err(Error::InvalidArgument(format!("Hopf exponent must be ≥ 1, got {a}")));
            }
            a
        }
        AlphaMode::Fit => {
            let n = values.len() as f64;
            let xs: Vec<f64> = values.iter().map(|v| v.1.ln()).collect();
            let ys: Vec<f64> = values.iter().map(|v| (-v.0).ln()).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            (sxy / sxx).max(1.0)
        }
    };
    let c = values
        .iter()
        .map(|&(phi, delta)| -phi / delta.powf(alpha))
        .fold(f64::INFINITY, f64::min)
        * (1.0 - 1e-12);
    let mut fit = HopfFit {
        c,
        alpha,
        mode,
        residual: 0.0,
        lower_margin: values.iter().map(|&(phi, delta)| -delta - phi).fold(f64::NEG_INFINITY, f64::max),
        bands: bands.len(),
        samples: values.len(),
    };
    fit.residual = fit.residual_on(values);
    Ok(fit)
}

/// `(φ(w), δ_D(w))` for every sample.
pub fn hopf_values(phi: &PshWitness, d: &DomainSpec, samples: &[CPoint]) -> Result<Vec<(f64, f64)>> {
    samples.iter().map(|w| Ok((phi.eval(w), boundary_distance(d, w)?))).collect()
}

/// Fits `φ ≤ −C·δ_D^α` on samples stratified over at least four dyadic `δ` bands.
pub fn hopf_fit(phi: &PshWitness, d: &DomainSpec, samples: &[CPoint], mode: AlphaMode) -> Result<HopfFit> {
    hopf_fit_values(&hopf_values(phi, d, samples)?, mode)
}

/// Range of the quotient `H = δ_D / |ρ|` of the signed distance by a defining
/// function; `inf H` is the constant making `inf H · ρ ≥ −δ_D`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DefiningQuotient {
    pub inf: f64,
    pub sup: f64,
}

pub fn defining_quotient(rho: &PshWitness, d: &DomainSpec, samples: &[CPoint]) -> Result<DefiningQuotient> {
    let mut q = DefiningQuotient {
        inf: f64::INFINITY,
        sup: 0.0,
    };
    for z in samples {
        let r = rho.eval(z);
        if !(r < 0.0) {
            return Err(Error::InvalidArgument(format!("defining function is not negative at {z:?}")));
        }
        let h = boundary_distance(d, z)? / -r;
        q.inf = q.inf.min(h);
        q.sup = q.sup.max(h);
    }
    Ok(q)
}

/// `C = sup{6x² + 2y − 1 : x ∈ [9/10, 1], y ∈ [0, 1/10]}` and `C̃ = 9/(5C)`.
pub fn step1_constant_ex21() -> (f64, f64) {
    // increasing in both variables, so the corner (1, 1/10) attains the sup
    let (x, y) = (1.0, 0.1);
    let c = 6.0 * x * x + (2.0 * y - 1.0);
    (c, 9.0 / (5.0 * c))
}

/// `(2X³ + (2y₀−1)X − x₀, (X − x₀) − 2X(Y − y₀))`.
pub fn lagrange_residuals(x0: f64, y0: f64, x: f64, y: f64) -> (f64, f64) {
    (2.0 * x.powi(3) + (2.0 * y0 - 1.0) * x - x0, (x - x0) - 2.0 * x * (y - y0))
}

/// Root in `[9/10, 1]` of `2X³ + (2y₀−1)X − x₀`, by bisection.
pub fn lagrange_root(x0: f64, y0: f64) -> f64 {
    let f = |x: f64| 2.0 * x.powi(3) + (2.0 * y0 - 1.0) * x - x0;
    let (lo, hi) = crate::optim::bisect(f, 0.9, 1.0, 200);
    0.5 * (lo + hi)
}

/// `min S(x₀, y₀)`: distance from `(x₀, y₀)` to the curve `x² + y = 1` at the Lagrange root.
pub fn ex21_min_s(x0: f64, y0: f64) -> f64 {
    let x = lagrange_root(x0, y0);
    (x - x0).hypot(1.0 - x * x - y0)
}

/// A holomorphic map with an enumerable fiber over each image point.
#[derive(Clone)]
pub struct FiberMap {
    pub label: String,
    forward: PointFn,
    fibers: FiberFn,
}

impl std::fmt::Debug for FiberMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiberMap({})", self.label)
    }
}

impl FiberMap {
    pub fn new(
        label: impl Into<String>,
        forward: impl Fn(&CPoint) -> CPoint + Send + Sync + 'static,
        fibers: impl Fn(&CPoint) -> Vec<CPoint> + Send + Sync + 'static,
    ) -> Self {
        FiberMap {
            label: label.into(),
            forward: Arc::new(forward),
            fibers: Arc::new(fibers),
        }
    }

    pub fn apply(&self, z: &CPoint) -> CPoint {
        (self.forward)(z)
    }

    pub fn fiber(&self, w: &CPoint) -> Vec<CPoint> {
        (self.fibers)(w)
    }

    /// Largest `‖F(z) − w‖` over the enumerated fiber.
    pub fn fiber_defect(&self, w: &CPoint) -> f64 {
        self.fiber(w).iter().map(|z| self.apply(z).dist(w)).fold(0.0, f64::max)
    }

    /// The same map with its fiber list reversed.
    pub fn with_reversed_fibers(&self) -> Self {
        let f = self.fibers.clone();
        FiberMap {
            label: self.label.clone(),
            forward: self.forward.clone(),
            fibers: Arc::new(move |w| {
                let mut v = f(w);
                v.reverse();
                v
            }),
        }
    }
}

/// `F(z, w) = (z², w)`.
pub fn ex21_map() -> FiberMap {
    FiberMap::new(
        "(z1^2, z2)",
        |z: &CPoint| CPoint(vec![z[0] * z[0], z[1]]),
        |w: &CPoint| {
            let r = w[0].sqrt();
            if r == c(0.0, 0.0) {
                vec![CPoint(vec![r, w[1]])]
            } else {
                vec![CPoint(vec![r, w[1]]), CPoint(vec![-r, w[1]])]
            }
        },
    )
}

/// `F(z, w) = (z, w²)`.
pub fn ex22_map() -> FiberMap {
    FiberMap::new(
        "(z1, z2^2)",
        |z: &CPoint| CPoint(vec![z[0], z[1] * z[1]]),
        |w: &CPoint| {
            let r = w[1].sqrt();
            if r == c(0.0, 0.0) {
                vec![CPoint(vec![w[0], r])]
            } else {
                vec![CPoint(vec![w[0], r]), CPoint(vec![w[0], -r])]
            }
        },
    )
}

pub fn identity_map() -> FiberMap {
    FiberMap::new("identity", |z: &CPoint| z.clone(), |w: &CPoint| vec![w.clone()])
}

/// `τ(w) = max ρ` over the fiber of `w`.
pub fn pushforward_tau(f: &FiberMap, rho: &PshWitness, w: &CPoint) -> Result<f64> {
    let fiber = f.fiber(w);
    if fiber.is_empty() {
        return Err(Error::EmptyFiber);
    }
    Ok(fiber.iter().map(|z| rho.eval(z)).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug)]
enum PsiKind {
    Constant(f64),
    Power { coef: f64, exponent: f64 },
    Modulus { m: ModulusOfContinuity, c: f64, exponent: f64 },
}

/// Integrable majorant `ψ` of `|∂F̃/∂Zₙ|` along inward vertical segments.
#[derive(Clone, Debug)]
pub struct PsiBound {
    kind: PsiKind,
}

/// `ψ(y) = (C/y)·M(C·y^{s/α*})`.
pub fn psi_bound(m: &ModulusOfContinuity, s: f64, alpha_star: f64, c: f64) -> Result<PsiBound> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("need s in (0, 1], got {s}")));
    }
    if !(alpha_star >= 1.0) {
        return Err(Error::InvalidArgument(format!("need α* ≥ 1, got {alpha_star}")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("need C > 0, got {c}")));
    }
    Ok(PsiBound {
        kind: PsiKind::Modulus {
            m: m.clone(),
            c,
            exponent: s / alpha_star,
        },
    })
}

impl PsiBound {
    pub fn constant(a: f64) -> Self {
        PsiBound {
            kind: PsiKind::Constant(a),
        }
    }

    /// `ψ(y) = a·y^{−e}`.
    pub fn power(coef: f64, exponent: f64) -> Self {
        PsiBound {
            kind: PsiKind::Power { coef, exponent },
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!("ψ needs y > 0, got {y}")));
        }
        Ok(match &self.kind {
            PsiKind::Constant(a) => *a,
            PsiKind::Power { coef, exponent } => coef * y.powf(-exponent),
            PsiKind::Modulus { m, c, exponent } => c / y * m.eval(c * y.powf(*exponent)),
        })
    }

    /// `r ↦ M(C·r^{s/α*})`, whose Dini integral times `C` is `∫₀^t ψ`.
    pub fn composite_modulus(&self) -> Option<ModulusOfContinuity> {
        match &self.kind {
            PsiKind::Modulus { m, c, exponent } => Some(m.composed(*c, *exponent)),
            _ => None,
        }
    }

    /// `∫₀^t ψ`; infinite when `ψ` is not integrable at 0.
    pub fn tail(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            PsiKind::Constant(a) => a * t,
            PsiKind::Power { coef, exponent } => {
                if *exponent >= 1.0 {
                    f64::INFINITY
                } else {
                    coef * t.powf(1.0 - exponent) / (1.0 - exponent)
                }
            }
            PsiKind::Modulus { c, .. } => {
                let comp = self.composite_modulus().expect("modulus kind");
                match dini_integral(&comp, t)? {
                    DiniIntegral::Finite { value, .. } => c * value,
                    DiniIntegral::Divergent { .. } => f64::INFINITY,
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{ball, ex21_d, truncated_half_space};

    #[test]
    fn levi_examples() {
        let u = ex21_u();
        let z = CPoint::real(&[0.25, 0.25]);
        let v = CPoint::real(&[1.0, 0.0]);
        assert!((levi_form(&u, &z, &v).unwrap() - 1.0).abs() < 1e-15);
        assert!((levi_form_fd(&u, &z, &v).unwrap().value - 1.0).abs() < 1e-6);

        let sq = PshWitness::new("|z|^2", |z: &CPoint| z.norm_sqr());
        let v = CPoint(vec![c(0.3, -0.4), c(1.0, 2.0)]);
        let got = levi_form(&sq, &CPoint::real(&[0.1, 0.7]), &v).unwrap();
        assert!((got - v.norm_sqr()).abs() < 1e-9 * v.norm_sqr());

        let rho = ex22_rho();
        let z = CPoint::real(&[0.5, 1.0]);
        assert_eq!(levi_form(&rho, &z, &CPoint::real(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn levi_rejects_kinks() {
        let u = ex21_u();
        assert!(matches!(
            levi_form(&u, &CPoint::real(&[0.3, 0.0]), &CPoint::real(&[0.0, 1.0])),
            Err(Error::NonSmooth(_))
        ));
    }

    #[test]
    fn ex22_closed_form_matches_differences() {
        let rho = ex22_rho();
        let plain = PshWitness::new("fd", crate::domains::ex22_rho);
        for &(x, r, th) in &[(0.3, 0.5, 0.2), (0.4, 0.7, 1.3), (0.05, 0.9, -2.0), (0.2, 0.6, 3.0)] {
            let z = CPoint(vec![c(x, 0.01), C64_polar(r, th)]);
            let v = CPoint(vec![c(0.0, 0.0), c(1.0, 0.0)]);
            let exact = levi_form(&rho, &z, &v).unwrap();
            let fd = levi_form_fd(&plain, &z, &v).unwrap().value;
            assert!((fd - exact).abs() <= 1e-4 * exact.abs(), "r={r}: {fd} vs {exact}");
        }
    }

    #[allow(non_snake_case)]
    fn C64_polar(r: f64, th: f64) -> crate::point::C64 {
        crate::point::C64::from_polar(r, th)
    }

    #[test]
    fn psh_checks() {
        let d = truncated_half_space(2, 10.0);
        let u = PshWitness::new("re z1", |z: &CPoint| z[0].re);
        let samples = vec![CPoint::real(&[-0.5, 0.2]), CPoint(vec![c(-0.1, 0.3), c(0.0, -1.0)])];
        let dirs = vec![CPoint::real(&[1.0, 0.0]), CPoint(vec![c(0.3, 0.1), c(-0.2, 0.9)])];
        let rep = check_psh(&u, &d, &samples, &dirs).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.min_levi.abs() < 1e-9);

        let neg = PshWitness::new("-|z|^2", |z: &CPoint| -z.norm_sqr());
        let rep = check_psh(&neg, &d, &samples, &dirs).unwrap();
        assert_eq!(rep.violations, rep.checked);
    }

    #[test]
    fn hopf_on_ball() {
        let d = ball(2);
        let samples: Vec<CPoint> = (1..=12).map(|k| CPoint::real(&[1.0 - 2f64.powi(-k), 0.0])).collect();
        let fit = hopf_fit(&ball_rho(2), &d, &samples, AlphaMode::Fixed(1.0)).unwrap();
        assert!(fit.c >= 1.0 && fit.c <= 2.0, "{fit:?}");
        assert!(fit.residual <= 0.0);

        let exact = hopf_fit(&negative_distance(&d), &d, &samples, AlphaMode::Fit).unwrap();
        assert!((exact.alpha - 1.0).abs() < 1e-9 && (exact.c - 1.0).abs() < 1e-9, "{exact:?}");
    }

    #[test]
    fn hopf_needs_bands() {
        let d = ball(2);
        let samples: Vec<CPoint> = (0..5).map(|k| CPoint::real(&[0.5 + 0.01 * k as f64, 0.0])).collect();
        assert!(matches!(
            hopf_fit(&ball_rho(2), &d, &samples, AlphaMode::Fit),
            Err(Error::TooFewBands { .. })
        ));
    }

    #[test]
    fn step1_constants() {
        let (c, ct) = step1_constant_ex21();
        assert!((c - 5.2).abs() < 1e-15);
        assert!((ct - 9.0 / 26.0).abs() < 1e-15);
        assert!((c * ct - 1.8).abs() < 1e-15);
        let mut grid_max: f64 = 0.0;
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (0.9 + 0.001 * i as f64, 0.001 * j as f64);
                grid_max = grid_max.max(6.0 * x * x + 2.0 * y - 1.0);
            }
        }
        assert!((grid_max - c).abs() < 1e-12);
        assert!(6.0 * 0.81 - 1.0 < c);
    }

    #[test]
    fn lagrange_residuals_vanish_at_root() {
        let x = lagrange_root(0.95, 0.0);
        let (r1, r2) = lagrange_residuals(0.95, 0.0, x, 1.0 - x * x);
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "{r1} {r2}");
        let (x0, y0) = (0.95, 1.0 - 0.95f64 * 0.95);
        assert!(lagrange_residuals(x0, y0, x0, y0).0.abs() < 1e-15);
        let d = ex21_d();
        let z = CPoint::real(&[0.95, 0.0]);
        assert!((ex21_min_s(0.95, 0.0) - boundary_distance(&d, &z).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn tau_examples() {
        let ct = step1_constant_ex21().1;
        let rho = ex21_rho(ct);
        let f = ex21_map();
        let w = CPoint(vec![c(0.2, 0.1), c(-0.1, 0.3)]);
        let tau = pushforward_tau(&f, &rho, &w).unwrap();
        let want = ct * (w[0].norm() + w[1].norm() - 1.0);
        assert!((tau - want).abs() < 1e-15);
        assert!(f.fiber_defect(&w) < 1e-15);
        assert_eq!(pushforward_tau(&f.with_reversed_fibers(), &rho, &w).unwrap(), tau);
        let id = identity_map();
        let r22 = ex22_rho();
        assert_eq!(pushforward_tau(&id, &r22, &w).unwrap(), r22.eval(&w));
        let empty = FiberMap::new("none", |z: &CPoint| z.clone(), |_: &CPoint| Vec::new());
        assert!(matches!(pushforward_tau(&empty, &rho, &w), Err(Error::EmptyFiber)));
    }

    #[test]
    fn psi_examples() {
        let sqrt = ModulusOfContinuity::from_expr("sqrt(r)", 10.0).unwrap();
        let psi = psi_bound(&sqrt, 1.0, 2.0, 1.0).unwrap();
        for &y in &[0.01, 0.3, 0.9] {
            assert!((psi.eval(y).unwrap() - y.powf(-0.75)).abs() < 1e-12);
        }
        // ∫₀^t y^{-3/4} dy = 4 t^{1/4}
        assert!((psi.tail(0.5).unwrap() - 4.0 * 0.5f64.powf(0.25)).abs() < 1e-6);
        let lin = ModulusOfContinuity::from_expr("r", 100.0).unwrap();
        let flat = psi_bound(&lin, 1.0, 1.0, 3.0).unwrap();
        assert!((flat.eval(0.123).unwrap() - 9.0).abs() < 1e-12);
        let twice = psi_bound(&sqrt, 1.0, 2.0, 2.0).unwrap();
        assert!(twice.eval(0.2).unwrap() > psi.eval(0.2).unwrap());
        assert!(psi.eval(0.0).is_err());
        assert!(psi_bound(&sqrt, 1.5, 2.0, 1.0).is_err());
    }
}
