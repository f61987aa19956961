use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nearest_boundary_point, DomainSpec};
use crate::error::{Error, Result};
use crate::point::CPoint;

/// Truncated right circular cone `vertex + Γ(axis, aperture)` within `radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeSpec {
    pub vertex: CPoint,
    pub axis: CPoint,
    pub aperture: f64,
    pub radius: f64,
}

impl ConeSpec {
    pub fn new(vertex: CPoint, axis: CPoint, aperture: f64, radius: f64) -> Result<Self> {
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("cone axis must be a unit vector".into()));
        }
        if !(aperture > 0.0 && aperture < std::f64::consts::PI) {
            return Err(Error::InvalidArgument("aperture must lie in (0, pi)".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("cone radius must be positive".into()));
        }
        Ok(ConeSpec {
            vertex,
            axis,
            aperture,
            radius,
        })
    }
}

pub fn cone_contains(c: &ConeSpec, z: &CPoint) -> bool {
    let d = z - &c.vertex;
    let r = d.norm();
    d.inner(&c.axis).re > (c.aperture / 2.0).cos() * r && r < c.radius
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeWitness {
    pub sample: CPoint,
    pub boundary_point: CPoint,
    pub direction: CPoint,
    /// Largest aperture certified for this sample at the common radius.
    pub aperture: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeCertificate {
    pub r: f64,
    pub theta: f64,
    pub witnesses: Vec<ConeWitness>,
    pub violation_count: usize,
    /// Indices of samples with no admissible cone at the minimal aperture.
    pub violations: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSettings {
    pub mc_points: usize,
    pub theta_min: f64,
    /// Cone radius; defaults to twice the largest sample distance.
    pub radius: Option<f64>,
    pub seed: u64,
    pub bisection_steps: usize,
}

impl Default for ConeSettings {
    fn default() -> Self {
        ConeSettings {
            mc_points: 100_000,
            theta_min: 1e-3,
            radius: None,
            seed: 0,
            bisection_steps: 30,
        }
    }
}

fn unit_orthogonal(rng: &mut ChaCha8Rng, axis: &[f64]) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..axis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot: f64 = w.iter().zip(axis).map(|(a, b)| a * b).sum();
        for (x, a) in w.iter_mut().zip(axis) {
            *x -= dot * a;
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return w.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Every Monte-Carlo point of `(vertex + Γ(axis, theta)) ∩ B(vertex, r)` lies in both sets.
/// Half of the points sit just inside the lateral surface, where failures show first.
#[allow(clippy::too_many_arguments)]
fn cone_fits(
    d: &DomainSpec,
    w_set: &DomainSpec,
    vertex: &CPoint,
    axis: &[f64],
    theta: f64,
    r: f64,
    points: usize,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = axis.len();
    let half = 0.5 * theta * (1.0 - 1e-9);
    let v = vertex.to_real_vec();
    for k in 0..points {
        let phi = if k % 2 == 0 {
            half
        } else {
            half * rng.gen::<f64>().powf(1.0 / (m as f64 - 1.0))
        };
        let rho = r * (1.0 - 1e-9) * rng.gen::<f64>().powf(1.0 / m as f64);
        let o = unit_orthogonal(&mut rng, axis);
        let p: Vec<f64> = (0..m)
            .map(|i| v[i] + rho * (phi.cos() * axis[i] + phi.sin() * o[i]))
            .collect();
        let p = CPoint::from_real_vec(&p);
        if !(d.inside(&p) && w_set.inside(&p)) {
            return false;
        }
    }
    true
}

/// Monte-Carlo certificate of a uniform interior cone condition on `samples`.
pub fn certify_cone_condition(
    d: &DomainSpec,
    w_set: &DomainSpec,
    samples: &[CPoint],
    settings: &ConeSettings,
) -> Result<ConeCertificate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let mut bases = Vec::with_capacity(samples.len());
    let mut max_depth = 0.0f64;
    for w in samples {
        if !d.contains(w)? || !w_set.contains(w)? {
            return Err(Error::OutsideDomain);
        }
        let xi = nearest_boundary_point(d, w)?;
        let dir = (w - &xi).normalized()?;
        max_depth = max_depth.max(w.dist(&xi));
        bases.push((xi, dir));
    }
    let floor = max_depth * (1.0 + 1e-6);
    let fits = |i: usize, theta: f64, r: f64| {
        let (xi, dir) = &bases[i];
        cone_fits(d, w_set, xi, &dir.to_real_vec(), theta, r, settings.mc_points, settings.seed ^ (i as u64 * 0x9e37))
    };

    // largest common radius at the minimal aperture
    let mut r = settings.radius.unwrap_or(2.0 * max_depth).max(floor);
    let all_fit = |r: f64| (0..samples.len()).all(|i| fits(i, settings.theta_min, r));
    if !all_fit(r) {
        let (mut lo, mut hi) = (floor, r);
        for _ in 0..settings.bisection_steps {
            let mid = 0.5 * (lo + hi);
            if all_fit(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        r = lo;
    }

    let top = std::f64::consts::PI * (1.0 - 1e-9);
    let mut witnesses = Vec::with_capacity(samples.len());
    let mut violations = Vec::new();
    let mut theta = top;
    for (i, w) in samples.iter().enumerate() {
        let (xi, dir) = &bases[i];
        let aperture = if !fits(i, settings.theta_min, r) {
            violations.push(i);
            0.0
        } else if fits(i, top, r) {
            top
        } else {
            let (mut lo, mut hi) = (settings.theta_min, top);
            for _ in 0..settings.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if fits(i, mid, r) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if aperture > 0.0 {
            theta = theta.min(aperture);
        }
        witnesses.push(ConeWitness {
            sample: w.clone(),
            boundary_point: xi.clone(),
            direction: dir.clone(),
            aperture,
        });
    }
    Ok(ConeCertificate {
        r,
        theta,
        witnesses,
        violation_count: violations.len(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::*;
    use crate::point::{c, CMatrix};
    use std::f64::consts::PI;

    #[test]
    fn membership_examples() {
        let cone = ConeSpec::new(CPoint::zeros(2), CPoint::basis(2, 0), PI / 2.0, f64::INFINITY).unwrap();
        assert!(cone_contains(&cone, &CPoint::real(&[1.0, 0.0])));
        assert!(!cone_contains(&cone, &CPoint::real(&[0.0, 1.0])));
        let z = CPoint(vec![c(1.0, 0.2), c(0.3, -0.1)]);
        assert!(cone_contains(&cone, &z));
        assert!(cone_contains(&cone, &z.scale_re(2.0)));
    }

    #[test]
    fn rejects_bad_cones() {
        assert!(ConeSpec::new(CPoint::zeros(2), CPoint::real(&[2.0, 0.0]), 1.0, 1.0).is_err());
        assert!(ConeSpec::new(CPoint::zeros(2), CPoint::basis(2, 0), PI, 1.0).is_err());
    }

    #[test]
    fn unitary_invariance() {
        let u = CMatrix::from_rows(vec![vec![c(0.6, 0.0), c(0.0, 0.8)], vec![c(0.0, 0.8), c(0.6, 0.0)]]).unwrap();
        let cone = ConeSpec::new(CPoint::real(&[0.1, 0.0]), CPoint::basis(2, 0), 1.2, 2.0).unwrap();
        let rot = ConeSpec::new(u.apply(&cone.vertex), u.apply(&cone.axis), 1.2, 2.0).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.37;
            let z = CPoint(vec![c(t.cos(), 0.3 * t.sin()), c(0.2 * (2.0 * t).sin(), 0.1)]);
            assert_eq!(cone_contains(&cone, &z), cone_contains(&rot, &u.apply(&z)));
        }
    }

    #[test]
    fn ball_near_boundary_gets_wide_cones() {
        let b = ball(2);
        let w = ball_at(CPoint::real(&[1.0, 0.0]), 0.5);
        let s = ConeSettings {
            mc_points: 4000,
            ..Default::default()
        };
        let far = certify_cone_condition(&b, &w, &[CPoint::real(&[0.9, 0.0])], &s).unwrap();
        let near = certify_cone_condition(&b, &w, &[CPoint::real(&[0.99, 0.0])], &s).unwrap();
        assert_eq!(near.violation_count, 0);
        assert!(near.theta > far.theta);
        assert!(near.theta > 0.9 * PI, "{}", near.theta);
    }

    #[test]
    fn tube_corner_caps_the_aperture() {
        let om = ex21_omega();
        let w = ball_at(CPoint::real(&[1.0, 0.0]), 0.5);
        let s = ConeSettings {
            mc_points: 4000,
            ..Default::default()
        };
        let cert = certify_cone_condition(&om, &w, &[CPoint::real(&[0.98, 0.0])], &s).unwrap();
        assert_eq!(cert.violation_count, 0);
        assert!(cert.theta < 0.8 * PI, "{}", cert.theta);
    }
}
