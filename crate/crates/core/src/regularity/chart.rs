use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{embedding_beta, select_epsilon, HFunction, ModelDomainParams, ModulusOfContinuity};
use crate::domains::{boundary_distance, flat, flat_prime, inward_normal, DomainSpec};
use crate::error::{Error, Result};
use crate::point::{c, CMatrix, CPoint, C64};

/// Graph function on `ℝ^{2n−2} × ℝ`, laid out as `(Re Z₁, Im Z₁, …, Re Z_{n−1}, Im Z_{n−1}, Re Zₙ)`.
pub type GraphFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GraphGradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartRegularity {
    Lipschitz,
    C1Dini,
}

/// Boundary chart `Z = U(z − ξ)` in which the domain is `{Im Zₙ > φ(Z′, Re Zₙ)}`
/// inside the ball of radius `radius`.
#[derive(Clone)]
pub struct GraphChart {
    pub name: String,
    pub base: CPoint,
    pub unitary: CMatrix,
    pub radius: f64,
    pub regularity: ChartRegularity,
    graph: GraphFn,
    gradient: Option<GraphGradFn>,
    lipschitz: Option<f64>,
    modulus: Option<ModulusOfContinuity>,
}

impl std::fmt::Debug for GraphChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphChart")
            .field("name", &self.name)
            .field("base", &self.base)
            .field("radius", &self.radius)
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

impl GraphChart {
    pub fn new(
        name: impl Into<String>,
        base: CPoint,
        unitary: CMatrix,
        radius: f64,
        regularity: ChartRegularity,
        graph: GraphFn,
    ) -> Result<Self> {
        if unitary.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: unitary.dim(),
            });
        }
        let defect = unitary.unitarity_defect();
        if defect > 1e-12 {
            return Err(Error::ChartInconsistency(format!("chart matrix is not unitary (defect {defect:e})")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("chart radius must be positive".into()));
        }
        Ok(GraphChart {
            name: name.into(),
            base,
            unitary,
            radius,
            regularity,
            graph,
            gradient: None,
            lipschitz: None,
            modulus: None,
        })
    }

    pub fn with_gradient(mut self, g: GraphGradFn) -> Self {
        self.gradient = Some(g);
        self
    }

    pub fn with_lipschitz(mut self, lip: f64) -> Self {
        self.lipschitz = Some(lip);
        self
    }

    pub fn with_modulus(mut self, m: ModulusOfContinuity) -> Self {
        self.modulus = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn to_chart(&self, z: &CPoint) -> CPoint {
        self.unitary.apply(&(z - &self.base))
    }

    pub fn from_chart(&self, big_z: &CPoint) -> CPoint {
        &self.unitary.adjoint().apply(big_z) + &self.base
    }

    pub fn in_box(&self, big_z: &CPoint) -> bool {
        big_z.norm() < self.radius
    }

    pub fn graph_args(&self, big_z: &CPoint) -> Vec<f64> {
        let n = big_z.dim();
        let mut a = Vec::with_capacity(2 * n - 1);
        for k in 0..n - 1 {
            a.push(big_z[k].re);
            a.push(big_z[k].im);
        }
        a.push(big_z[n - 1].re);
        a
    }

    pub fn graph(&self, args: &[f64]) -> f64 {
        (self.graph)(args)
    }

    pub fn graph_gradient(&self, args: &[f64]) -> Result<Vec<f64>> {
        self.gradient
            .as_ref()
            .map(|g| g(args))
            .ok_or_else(|| Error::InvalidArgument(format!("chart '{}' has no gradient oracle", self.name)))
    }

    /// Chart point on the graph over `args`.
    pub fn boundary_point(&self, args: &[f64]) -> CPoint {
        let n = self.dim();
        let mut z = Vec::with_capacity(n);
        for k in 0..n - 1 {
            z.push(c(args[2 * k], args[2 * k + 1]));
        }
        z.push(c(args[2 * n - 2], self.graph(args)));
        CPoint(z)
    }

    /// `Y(Z′, Zₙ) = Im Zₙ − φ(Z′, Re Zₙ)`.
    pub fn vertical_height(&self, big_z: &CPoint) -> Result<f64> {
        big_z.check_dim(self.dim())?;
        if !self.in_box(big_z) {
            return Err(Error::OutOfChart);
        }
        Ok(big_z[self.dim() - 1].im - self.graph(&self.graph_args(big_z)))
    }

    /// Projection along the vertical direction onto the graph.
    pub fn project_to_boundary(&self, big_z: &CPoint) -> Result<CPoint> {
        big_z.check_dim(self.dim())?;
        if !self.in_box(big_z) {
            return Err(Error::OutOfChart);
        }
        Ok(self.boundary_point(&self.graph_args(big_z)))
    }

    /// Ambient points at chart radius below `radius` lying strictly above the graph.
    pub fn sample_above_graph(&self, count: usize, radius: f64, rng: &mut impl Rng) -> Vec<CPoint> {
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        let mut tries = 0usize;
        while out.len() < count && tries < 10_000 * count.max(1) {
            tries += 1;
            let big_z = CPoint((0..n).map(|_| c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))).collect());
            if big_z.norm() >= radius {
                continue;
            }
            if matches!(self.vertical_height(&big_z), Ok(y) if y > 0.0) {
                out.push(self.from_chart(&big_z));
            }
        }
        out
    }

    /// Graph arguments in the cube of half-width `half_width`.
    pub fn sample_graph_args(&self, count: usize, half_width: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        let m = 2 * self.dim() - 1;
        (0..count)
            .map(|_| (0..m).map(|_| rng.gen_range(-half_width..=half_width)).collect())
            .collect()
    }

    /// Modulus for the graph gradient: the declared one, else estimated from
    /// seeded pairs.
    pub fn modulus(&self) -> Result<ModulusOfContinuity> {
        if let Some(m) = &self.modulus {
            return Ok(m.clone());
        }
        let pairs = sample_gradient_pairs(self, 4000, 0.5 * self.radius, 0)?;
        estimate_modulus(self, &pairs)
    }

    /// Isometry defect, interior/exterior disagreements and boundary residual on
    /// seeded samples.
    pub fn check_against(&self, d: &DomainSpec, count: usize, seed: u64) -> Result<ChartCheck> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let mut isometry: f64 = 0.0;
        let mut mismatches = 0usize;
        let mut residual: f64 = 0.0;
        let r = 0.5 * self.radius;
        for _ in 0..count {
            let big_z = CPoint((0..n).map(|_| c(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect());
            let z = self.from_chart(&big_z);
            isometry = isometry.max(((&z - &self.base).norm() - big_z.norm()).abs());
            if big_z.norm() >= self.radius {
                continue;
            }
            let y = self.vertical_height(&big_z)?;
            if y.abs() > 1e-9 && (y > 0.0) != d.inside(&z) {
                mismatches += 1;
            }
            let xi = self.from_chart(&self.project_to_boundary(&big_z)?);
            residual = residual.max(d.max_constraint(&xi).abs());
        }
        Ok(ChartCheck {
            isometry_defect: isometry,
            mismatches,
            boundary_residual: residual,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChartCheck {
    pub isometry_defect: f64,
    pub mismatches: usize,
    pub boundary_residual: f64,
}

impl ChartCheck {
    pub fn passes(&self) -> bool {
        self.isometry_defect <= 1e-12 && self.mismatches == 0 && self.boundary_residual <= 1e-8
    }
}

/// Flat chart for `truncated_half_space(n, R)` at the origin: `Z = (z₂, …, zₙ, −i z₁)`.
pub fn flat_chart(n: usize) -> GraphChart {
    let mut rows = vec![vec![C64::new(0.0, 0.0); n]; n];
    for k in 0..n - 1 {
        rows[k][k + 1] = c(1.0, 0.0);
    }
    rows[n - 1][0] = c(0.0, -1.0);
    let u = CMatrix::from_rows(rows).expect("square");
    GraphChart::new("flat", CPoint::zeros(n), u, 0.5, ChartRegularity::C1Dini, Arc::new(|_: &[f64]| 0.0))
        .expect("unitary")
        .with_gradient(Arc::new(move |a: &[f64]| vec![0.0; a.len()]))
        .with_lipschitz(0.0)
        .with_modulus(ModulusOfContinuity::zero(1.0))
}

/// Identity chart for `tilted_half_space(R)` at the origin; the graph is `Re Z₁`.
pub fn tilted_chart() -> GraphChart {
    GraphChart::new(
        "tilted",
        CPoint::zeros(2),
        CMatrix::identity(2),
        0.5,
        ChartRegularity::C1Dini,
        Arc::new(|a: &[f64]| a[0]),
    )
    .expect("unitary")
    .with_gradient(Arc::new(|_: &[f64]| vec![1.0, 0.0, 0.0]))
    .with_lipschitz(1.0)
    .with_modulus(ModulusOfContinuity::zero(1.0))
}

const EX21_RADIUS: f64 = 0.25;

/// Chart for `ex21_d` at `(1, 0)`: `Z = (w, −i(z − 1))`, graph `1 − √(1 − X² − |Z₁|)`.
pub fn ex21_chart() -> GraphChart {
    let u = CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).expect("square");
    // |∇φ|² = (1/4 + X²)/(1 − X² − |Z₁|) is largest at the edge of the box
    let r = EX21_RADIUS;
    let lip = ((0.25 + r * r) / (1.0 - r * r - r)).sqrt();
    GraphChart::new(
        "ex21",
        CPoint::real(&[1.0, 0.0]),
        u,
        r,
        ChartRegularity::Lipschitz,
        Arc::new(|a: &[f64]| 1.0 - (1.0 - a[2] * a[2] - a[0].hypot(a[1])).sqrt()),
    )
    .expect("unitary")
    .with_lipschitz(lip)
}

/// Chart for `ex22_d` at the origin: `Z = (w, i z)`, graph `exp(−1/|Z₁|⁴)`.
pub fn ex22_chart() -> GraphChart {
    let u = CMatrix::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).expect("square");
    let r = 0.25;
    // d/ds flat(s) is increasing on s ≤ r², so |∇φ| ≤ 2r·flat'(r²)
    let lip = 2.0 * r * flat_prime(r * r);
    GraphChart::new(
        "ex22",
        CPoint::zeros(2),
        u,
        r,
        ChartRegularity::C1Dini,
        Arc::new(|a: &[f64]| flat(a[0] * a[0] + a[1] * a[1])),
    )
    .expect("unitary")
    .with_gradient(Arc::new(|a: &[f64]| {
        let d = 2.0 * flat_prime(a[0] * a[0] + a[1] * a[1]);
        vec![d * a[0], d * a[1], 0.0]
    }))
    .with_lipschitz(lip)
}

pub const BUNDLED_CHARTS: [&str; 4] = ["flat", "tilted", "ex21", "ex22"];

/// Bundled chart together with the domain it parametrizes.
pub fn bundled_chart(name: &str) -> Result<(GraphChart, DomainSpec)> {
    use crate::domains::{ex21_d, ex22_d, tilted_half_space, truncated_half_space};
    Ok(match name {
        "flat" => (flat_chart(2), truncated_half_space(2, 10.0)),
        "tilted" => (tilted_chart(), tilted_half_space(10.0)),
        "ex21" => (ex21_chart(), ex21_d()),
        "ex22" => (ex22_chart(), ex22_d()),
        other => return Err(Error::Config(format!("unknown bundled chart '{other}'"))),
    })
}

/// Seeded pairs `(x, y)` of graph arguments with `|x − y|` on the grid
/// `half_width·2^{-k/4}`.
pub fn sample_gradient_pairs(chart: &GraphChart, count: usize, half_width: f64, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidArgument("pair sampling needs a positive half-width".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 2 * chart.dim() - 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-half_width..=half_width)).collect();
        let k = rng.gen_range(0..120);
        let r = half_width * 2f64.powf(-(k as f64) / 4.0);
        let mut u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let un = u.iter().map(|t| t * t).sum::<f64>().sqrt();
        if un < 1e-3 {
            continue;
        }
        u.iter_mut().for_each(|t| *t *= r / un);
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
        if y.iter().all(|t| t.abs() <= half_width) {
            out.push((x, y));
        }
    }
    Ok(out)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Tabulates `r ↦ max ‖∇φ(x) − ∇φ(y)‖` over sampled pairs with `‖x − y‖ ≤ r`
/// on the grid `r_max·2^{-k/4}`.
pub fn estimate_modulus(chart: &GraphChart, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<ModulusOfContinuity> {
    if chart.regularity != ChartRegularity::C1Dini || !chart.has_gradient() {
        return Err(Error::InvalidArgument(format!(
            "chart '{}' needs C^1-Dini regularity and a gradient oracle",
            chart.name
        )));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no gradient pairs".into()));
    }
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let gx = chart.graph_gradient(x)?;
        let gy = chart.graph_gradient(y)?;
        raw.push((euclid(x, y), euclid(&gx, &gy)));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r_max = raw.last().unwrap().0;
    let grid: Vec<f64> = (0..=160).rev().map(|k| r_max * 2f64.powf(-(k as f64) / 4.0)).collect();
    let mut table = Vec::with_capacity(grid.len());
    let mut j = 0;
    let mut run: f64 = 0.0;
    for &r in &grid {
        while j < raw.len() && raw[j].0 <= r * (1.0 + 1e-12) {
            run = run.max(raw[j].1);
            j += 1;
        }
        table.push((r, run));
    }
    ModulusOfContinuity::from_samples(table)
}

/// Empirical constant in `δ_D(z) ≤ Y(U z) ≤ C·δ_D(z)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SandwichFit {
    pub c: f64,
    /// `√(1 + Lip²)` when the chart declares a Lipschitz constant.
    pub bound: Option<f64>,
    pub samples: usize,
    /// Smallest `Y − δ` seen; nonnegative up to rounding.
    pub min_gap: f64,
}

impl SandwichFit {
    pub fn within_bound(&self, slack: f64) -> bool {
        self.c >= 1.0 - 1e-9 && self.bound.map_or(true, |b| self.c <= b + slack)
    }
}

pub fn verify_lipschitz_sandwich(d: &DomainSpec, chart: &GraphChart, samples: &[CPoint]) -> Result<SandwichFit> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut c: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for z in samples {
        let delta = boundary_distance(d, z)?;
        let y = chart.vertical_height(&chart.to_chart(z))?;
        if delta > y + 1e-9 {
            return Err(Error::ChartInconsistency(format!(
                "δ_D = {delta} exceeds the vertical height {y} at {z:?}"
            )));
        }
        min_gap = min_gap.min(y - delta);
        c = c.max(y / delta);
    }
    Ok(SandwichFit {
        c,
        bound: chart.lipschitz().map(|l| (1.0 + l * l).sqrt()),
        samples: samples.len(),
        min_gap,
    })
}

/// `β = max(1+1e−9, 4√2/m)` and the largest admissible `ε`, using the chart's
/// gradient modulus.
pub fn select_embedding_params(chart: &GraphChart, m: f64, r_v: f64) -> Result<ModelDomainParams> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("need m > 0, got {m}")));
    }
    if !(r_v > 0.0 && r_v < chart.radius) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r_V < chart radius {}, got {r_v}",
            chart.radius
        )));
    }
    let beta = embedding_beta(m);
    let h = HFunction::new(chart.modulus()?);
    let (epsilon, binding) = select_epsilon(&h, beta, r_v)?;
    Ok(ModelDomainParams {
        beta,
        epsilon,
        h,
        binding,
        radius_cap: r_v / std::f64::consts::SQRT_2,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EmbeddingReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest of `max gᵢ`, `−Y` and `|Z| − r` over all pairs; negative means
    /// every image is inside with room to spare.
    pub worst_margin: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks `ξ + ζ·η_ξ ∈ U ∩ D` for every boundary point `ξ` and model-domain point `ζ`.
pub fn verify_embedding(
    d: &DomainSpec,
    chart: &GraphChart,
    xis: &[CPoint],
    params: &ModelDomainParams,
    zetas: &[C64],
) -> Result<EmbeddingReport> {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_pair = None;
    for (i, xi) in xis.iter().enumerate() {
        let eta = inward_normal(d, xi)?;
        for (j, &zeta) in zetas.iter().enumerate() {
            debug_assert!(params.contains(zeta));
            let z = xi.axpy(zeta, &eta);
            let big_z = chart.to_chart(&z);
            let mut margin = d.max_constraint(&z).max(big_z.norm() - chart.radius);
            if chart.in_box(&big_z) {
                margin = margin.max(-chart.vertical_height(&big_z)?);
            }
            if margin >= 0.0 {
                violations += 1;
            }
            if margin > worst {
                worst = margin;
                worst_pair = Some((i, j));
            }
        }
    }
    Ok(EmbeddingReport {
        pairs: xis.len() * zetas.len(),
        violations,
        worst_margin: worst,
        worst_pair,
    })
}
