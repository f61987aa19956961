//! Domains in C^n given by defining-function oracles, and their Euclidean
//! boundary geometry.

mod bundled;
mod cone;
mod distance;

use std::fmt;
use std::sync::Arc;

pub use bundled::*;
pub use cone::{certify_cone_condition, cone_contains, ConeCertificate, ConeSettings, ConeSpec, ConeWitness};
pub use distance::{
    boundary_distance, boundary_distance_numeric, directional_distance, directional_distance_bruteforce,
    directional_distance_with, inward_normal, nearest_boundary_point, nearest_boundary_point_numeric,
    BoundaryDistance,
};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::point::{CPoint, C64};

pub type ScalarFn = Arc<dyn Fn(&CPoint) -> f64 + Send + Sync>;
/// Gradient in complex form: entry j is dg/dx_j + i dg/dy_j.
pub type GradFn = Arc<dyn Fn(&CPoint) -> Result<CPoint> + Send + Sync>;
pub type PointFn = Arc<dyn Fn(&CPoint) -> CPoint + Send + Sync>;

#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    value: ScalarFn,
    gradient: Option<GradFn>,
}

impl Constraint {
    pub fn new(label: impl Into<String>, value: ScalarFn) -> Self {
        Constraint {
            label: label.into(),
            value,
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, g: GradFn) -> Self {
        self.gradient = Some(g);
        self
    }

    /// Constraint from an expression in `z1..zn`; its real part is the value.
    /// The gradient is a central difference that refuses kinks of `abs`/`sqrt`.
    pub fn from_expr(expr: Expr) -> Self {
        let label = expr.source().to_string();
        let e = Arc::new(expr);
        let ev = e.clone();
        let value: ScalarFn = Arc::new(move |z: &CPoint| ev.eval(&z.0).re);
        let eg = e.clone();
        let gradient: GradFn = Arc::new(move |z: &CPoint| {
            let (_, smooth) = eg.eval_tracked(&z.0);
            if !smooth {
                return Err(Error::NonSmooth(format!("'{}' has a kink at this point", eg.source())));
            }
            let f = |p: &CPoint| eg.eval(&p.0).re;
            Ok(fd_gradient(&f, z))
        });
        Constraint {
            label,
            value,
            gradient: Some(gradient),
        }
    }

    pub fn eval(&self, z: &CPoint) -> f64 {
        (self.value)(z)
    }

    pub fn gradient(&self, z: &CPoint) -> Result<CPoint> {
        match &self.gradient {
            Some(g) => g(z),
            None => {
                let f = |p: &CPoint| (self.value)(p);
                Ok(fd_gradient(&f, z))
            }
        }
    }

    pub fn has_gradient_oracle(&self) -> bool {
        self.gradient.is_some()
    }
}

pub(crate) fn fd_gradient(f: &dyn Fn(&CPoint) -> f64, z: &CPoint) -> CPoint {
    let h = 1e-6 * (1.0 + z.norm());
    let mut out = CPoint::zeros(z.dim());
    for j in 0..z.dim() {
        let mut p = z.clone();
        let mut m = z.clone();
        p.0[j].re += h;
        m.0[j].re -= h;
        let dx = (f(&p) - f(&m)) / (2.0 * h);
        let mut p = z.clone();
        let mut m = z.clone();
        p.0[j].im += h;
        m.0[j].im -= h;
        let dy = (f(&p) - f(&m)) / (2.0 * h);
        out.0[j] = C64::new(dx, dy);
    }
    out
}

/// Closed-form boundary distance and nearest point, when a domain has them.
#[derive(Clone)]
pub struct ClosedForm {
    pub distance: ScalarFn,
    pub nearest: PointFn,
}

/// Numerical settings for boundary-distance computations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceSettings {
    /// Directions scanned before local refinement.
    pub scan_directions: usize,
    /// Local refinements started from the best scanned directions.
    pub starts: usize,
    /// Phases sampled for the directional distance.
    pub phases: usize,
    /// Tolerance on positions and distances, scaled by `1 + |z|`.
    pub position_tol: f64,
    /// Tolerance on defining-function values at boundary points.
    pub value_tol: f64,
}

impl Default for DistanceSettings {
    fn default() -> Self {
        DistanceSettings {
            scan_directions: 256,
            starts: 16,
            phases: 256,
            position_tol: 1e-8,
            value_tol: 1e-10,
        }
    }
}

#[derive(Clone)]
pub struct DomainSpec {
    pub name: String,
    pub dim: usize,
    constraints: Vec<Constraint>,
    pub is_convex: bool,
    pub is_reinhardt: bool,
    /// The domain lies in the ball of this radius about the origin; may be infinite.
    pub bounding_radius: f64,
    closed_form: Option<ClosedForm>,
    pub settings: DistanceSettings,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("constraints", &self.constraints.iter().map(|c| &c.label).collect::<Vec<_>>())
            .field("is_convex", &self.is_convex)
            .field("is_reinhardt", &self.is_reinhardt)
            .field("bounding_radius", &self.bounding_radius)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl DomainSpec {
    pub fn new(name: impl Into<String>, dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidArgument("a domain needs at least one constraint".into()));
        }
        Ok(DomainSpec {
            name: name.into(),
            dim,
            constraints,
            is_convex: false,
            is_reinhardt: false,
            bounding_radius: f64::INFINITY,
            closed_form: None,
            settings: DistanceSettings::default(),
        })
    }

    pub fn convex(mut self, yes: bool) -> Self {
        self.is_convex = yes;
        self
    }

    pub fn reinhardt(mut self, yes: bool) -> Self {
        self.is_reinhardt = yes;
        self
    }

    pub fn bounded_by(mut self, r: f64) -> Self {
        self.bounding_radius = r;
        self
    }

    pub fn with_closed_form(mut self, cf: ClosedForm) -> Self {
        self.closed_form = Some(cf);
        self
    }

    pub fn with_settings(mut self, s: DistanceSettings) -> Self {
        self.settings = s;
        self
    }

    /// The same domain with the closed forms removed, forcing numerical paths.
    pub fn without_closed_form(&self) -> Self {
        let mut d = self.clone();
        d.closed_form = None;
        d
    }

    /// Intersection with another domain of the same dimension.
    pub fn intersect(&self, other: &DomainSpec, name: impl Into<String>) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut cs = self.constraints.clone();
        cs.extend(other.constraints.iter().cloned());
        Ok(DomainSpec {
            name: name.into(),
            dim: self.dim,
            constraints: cs,
            is_convex: self.is_convex && other.is_convex,
            is_reinhardt: self.is_reinhardt && other.is_reinhardt,
            bounding_radius: self.bounding_radius.min(other.bounding_radius),
            closed_form: None,
            settings: self.settings,
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    /// max_i g_i(z); negative exactly on the interior.
    pub fn max_constraint(&self, z: &CPoint) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.eval(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, z: &CPoint) -> Result<bool> {
        z.check_dim(self.dim)?;
        Ok(self.inside(z))
    }

    /// Membership without the dimension check.
    #[inline]
    pub fn inside(&self, z: &CPoint) -> bool {
        self.constraints.iter().all(|c| c.eval(z) < 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::c;

    #[test]
    fn contains_examples() {
        assert!(ball(2).contains(&CPoint::real(&[0.5, 0.0])).unwrap());
        assert!(!ex21_omega().contains(&CPoint::real(&[0.6, 0.6])).unwrap());
        let z = CPoint::real(&[0.5, 0.0]);
        let d = ex22_d();
        // Re z > exp(-1/|w|^4) = 0 and |z|^2 + |w|^4 = 0.25 < 1
        assert!(d.contains(&z).unwrap());
    }

    #[test]
    fn contains_rejects_wrong_dimension() {
        assert_eq!(
            ball(2).contains(&CPoint::real(&[0.1])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn expression_constraint_matches_closure() {
        let e = Expr::parse("|z1|^2 + |z2| - 1", &["z1", "z2"]).unwrap();
        let con = Constraint::from_expr(e);
        let d = ex21_d();
        let z = CPoint(vec![c(0.3, 0.2), c(-0.1, 0.4)]);
        assert!((con.eval(&z) - d.constraints()[0].eval(&z)).abs() < 1e-15);
        let g1 = con.gradient(&z).unwrap();
        let g2 = d.constraints()[0].gradient(&z).unwrap();
        assert!(g1.dist(&g2) < 1e-8);
        let corner = CPoint::real(&[1.0, 0.0]);
        assert!(matches!(con.gradient(&corner), Err(Error::NonSmooth(_))));
    }

    #[test]
    fn convex_flags_hold_on_segments() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in [ball(2), polydisc(2), ex21_d(), ex21_omega(), ex22_omega_local(0.5)] {
            assert!(d.is_convex, "{}", d.name);
            let mut pts = Vec::new();
            while pts.len() < 60 {
                let z = CPoint((0..2).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
                if d.inside(&z) {
                    pts.push(z);
                }
            }
            for a in &pts {
                for b in &pts {
                    let t: f64 = rng.gen();
                    let m = a.axpy_re(t, &(b - a));
                    assert!(d.inside(&m), "{} segment leaves domain", d.name);
                }
            }
        }
    }
}
