use std::f64::consts::PI;

use super::DomainSpec;
use crate::error::{Error, Result};
use crate::optim::{golden_section, nelder_mead, sphere_points};
use crate::point::{CPoint, C64};

/// Exit radii beyond this are treated as "no exit" on unbounded domains.
const FAR: f64 = 1e6;
/// Uniform march resolution on non-convex domains.
const MARCH_STEPS: usize = 96;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDistance {
    pub value: f64,
    pub error_estimate: f64,
    pub nearest: CPoint,
}

fn check_interior(d: &DomainSpec, z: &CPoint) -> Result<()> {
    z.check_dim(d.dim)?;
    if !z.is_finite() || !d.inside(z) {
        return Err(Error::OutsideDomain);
    }
    Ok(())
}

fn full_cap(d: &DomainSpec, z: &CPoint) -> f64 {
    if d.bounding_radius.is_finite() {
        (d.bounding_radius + z.norm()) * 1.001 + 1e-12
    } else {
        FAR
    }
}

/// Bracket `[lo, hi]` around the first exit of the ray `z + t u` with `t <= cap`.
fn exit_bracket(d: &DomainSpec, z: &CPoint, u: &CPoint, cap: f64) -> Option<(f64, f64)> {
    let at = |t: f64| d.inside(&z.axpy_re(t, u));
    let (mut lo, mut hi);
    if d.is_convex {
        // the set of admissible t is an interval, so doubling cannot skip an exit
        lo = 0.0;
        let mut t = (cap * 1e-4).max(1e-300);
        loop {
            if t >= cap {
                if at(cap) {
                    return None;
                }
                hi = cap;
                break;
            }
            if !at(t) {
                hi = t;
                break;
            }
            lo = t;
            t *= 2.0;
        }
    } else {
        let h = cap / MARCH_STEPS as f64;
        lo = 0.0;
        hi = f64::NAN;
        for k in 1..=MARCH_STEPS {
            let t = h * k as f64;
            if !at(t) {
                hi = t;
                break;
            }
            lo = t;
        }
        if hi.is_nan() {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

fn exit_radius(d: &DomainSpec, z: &CPoint, u: &CPoint, cap: f64) -> f64 {
    exit_bracket(d, z, u, cap).map(|b| b.1).unwrap_or(f64::INFINITY)
}

/// Orthonormal basis of the real orthogonal complement of `u` in R^m.
fn tangent_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let m = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        for b in &basis {
            let dot: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(e.into_iter().map(|x| x / n).collect());
        }
        if basis.len() == m {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn direction_from(u0: &[f64], tb: &[Vec<f64>], th: &[f64]) -> CPoint {
    let mut v = u0.to_vec();
    for (b, t) in tb.iter().zip(th) {
        for (x, y) in v.iter_mut().zip(b) {
            *x += t * y;
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    CPoint::from_real_vec(&v.into_iter().map(|x| x / n).collect::<Vec<_>>())
}

/// Distance to the boundary by minimizing the first exit radius over directions.
///
/// For an open set the first exit along the direction of a nearest boundary
/// point is exactly the distance, and every other direction exits no earlier.
pub fn boundary_distance_numeric(d: &DomainSpec, z: &CPoint) -> Result<BoundaryDistance> {
    check_interior(d, z)?;
    let s = d.settings;
    let m = 2 * d.dim;
    let cap0 = full_cap(d, z);
    let dirs = sphere_points(s.scan_directions, m);

    let mut scanned: Vec<(f64, usize)> = Vec::with_capacity(dirs.len());
    let mut best = f64::INFINITY;
    for (k, u) in dirs.iter().enumerate() {
        let cap = cap0.min(1.5 * best);
        let t = exit_radius(d, z, &CPoint::from_real_vec(u), cap);
        if t < best {
            best = t;
        }
        scanned.push((t, k));
    }
    if !best.is_finite() {
        return Err(Error::Unbounded);
    }
    scanned.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let tol = s.position_tol * (1.0 + z.norm());
    let mut best_val = f64::INFINITY;
    let mut best_dir = CPoint::zeros(d.dim);
    let mut best_spread = f64::INFINITY;
    let mut best_converged = false;
    for &(t0, k) in scanned.iter().take(s.starts) {
        if !t0.is_finite() {
            break;
        }
        let u0 = &dirs[k];
        let tb = tangent_basis(u0);
        let cap = cap0.min(1.5 * best);
        let f = |th: &[f64]| exit_radius(d, z, &direction_from(u0, &tb, th), cap);
        let r = nelder_mead(f, &vec![0.0; m - 1], 0.05, 1e-3 * tol, 1e-9, 2000);
        if r.value < best_val {
            best_val = r.value;
            best_dir = direction_from(u0, &tb, &r.x);
            best_spread = r.spread;
            best_converged = r.converged;
        }
        best = best.min(r.value);
    }
    let (lo, hi) = exit_bracket(d, z, &best_dir, cap0).ok_or(Error::Unbounded)?;
    let estimate = (hi - lo) + if best_converged { best_spread } else { best_spread.max(tol * 10.0) };
    if !best_converged && best_spread > tol {
        return Err(Error::NonConvergence {
            what: "boundary projection",
            estimate,
        });
    }
    Ok(BoundaryDistance {
        value: hi,
        error_estimate: estimate,
        nearest: z.axpy_re(hi, &best_dir),
    })
}

/// delta_D(z): closed form when the domain has one, else the numerical projection.
pub fn boundary_distance(d: &DomainSpec, z: &CPoint) -> Result<f64> {
    check_interior(d, z)?;
    if let Some(cf) = d.closed_form() {
        return Ok((cf.distance)(z));
    }
    Ok(boundary_distance_numeric(d, z)?.value)
}

pub fn nearest_boundary_point_numeric(d: &DomainSpec, z: &CPoint) -> Result<CPoint> {
    Ok(boundary_distance_numeric(d, z)?.nearest)
}

pub fn nearest_boundary_point(d: &DomainSpec, z: &CPoint) -> Result<CPoint> {
    check_interior(d, z)?;
    if let Some(cf) = d.closed_form() {
        return Ok((cf.nearest)(z));
    }
    nearest_boundary_point_numeric(d, z)
}

fn phase_dir(v: &CPoint, th: f64) -> CPoint {
    v.scale(C64::from_polar(1.0, th))
}

/// delta_D(z; v) with `phases` sampled phases and golden-section refinement.
pub fn directional_distance_with(d: &DomainSpec, z: &CPoint, v: &CPoint, phases: usize, refine: bool) -> Result<f64> {
    check_interior(d, z)?;
    v.check_dim(d.dim)?;
    let v = v.normalized()?;
    let cap0 = full_cap(d, z);
    let step = 2.0 * PI / phases as f64;
    let mut best = f64::INFINITY;
    let mut best_k = 0;
    for k in 0..phases {
        let cap = if d.is_convex { cap0 } else { cap0.min(1.5 * best) };
        let t = exit_radius(d, z, &phase_dir(&v, step * k as f64), cap);
        if t < best {
            best = t;
            best_k = k;
        }
    }
    if !best.is_finite() {
        return Err(Error::Unbounded);
    }
    if refine {
        let c = step * best_k as f64;
        let cap = cap0.min(1.5 * best);
        let (_, tr) = golden_section(|th| exit_radius(d, z, &phase_dir(&v, th), cap), c - step, c + step, 1e-12, 200);
        best = best.min(tr);
    }
    Ok(best)
}

/// delta_D(z; v) at the production setting.
pub fn directional_distance(d: &DomainSpec, z: &CPoint, v: &CPoint) -> Result<f64> {
    directional_distance_with(d, z, v, d.settings.phases, true)
}

/// Brute-force delta_D(z; v): 4096 phases, no refinement.
pub fn directional_distance_bruteforce(d: &DomainSpec, z: &CPoint, v: &CPoint) -> Result<f64> {
    directional_distance_with(d, z, v, 4096, false)
}

/// Unit inward normal at a boundary point with exactly one active constraint.
pub fn inward_normal(d: &DomainSpec, xi: &CPoint) -> Result<CPoint> {
    xi.check_dim(d.dim)?;
    let tol = 1e-8 * (1.0 + xi.norm());
    let active: Vec<_> = d.constraints().iter().filter(|c| c.eval(xi).abs() <= tol).collect();
    match active.len() {
        0 => Err(Error::InvalidArgument("point is not on the boundary".into())),
        1 => {
            let g = active[0].gradient(xi)?;
            let n = g.norm();
            if n == 0.0 || !n.is_finite() {
                return Err(Error::NonSmooth("defining gradient vanishes".into()));
            }
            Ok(g.scale_re(-1.0 / n))
        }
        k => Err(Error::NonSmooth(format!("{k} constraints are active"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::*;
    use crate::point::c;

    #[test]
    fn ball_distance_and_nearest() {
        let b = ball(2);
        let z = CPoint::real(&[0.5, 0.0]);
        assert_eq!(boundary_distance(&b, &z).unwrap(), 0.5);
        assert_eq!(nearest_boundary_point(&b, &z).unwrap(), CPoint::real(&[1.0, 0.0]));
        let num = boundary_distance_numeric(&b, &z).unwrap();
        assert!((num.value - 0.5).abs() < 1e-9);
        assert!(num.nearest.dist(&CPoint::real(&[1.0, 0.0])) < 1e-4);
    }

    #[test]
    fn tube_distance_example() {
        let d = ex21_omega();
        let z = CPoint::real(&[0.3, 0.2]);
        let want = 0.5 / 2f64.sqrt();
        assert!((boundary_distance(&d, &z).unwrap() - want).abs() < 1e-15);
        let num = boundary_distance_numeric(&d, &z).unwrap();
        assert!((num.value - want).abs() < 1e-9, "{}", num.value);
    }

    #[test]
    fn ex21_d_nearest_point_on_real_slice() {
        let d = ex21_d();
        let z = CPoint::real(&[0.95, 0.0]);
        let p = nearest_boundary_point(&d, &z).unwrap();
        // bisection on 2X^3 - X - 0.95 over [0.9, 1]
        let (mut lo, mut hi) = (0.9f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 2.0 * mid.powi(3) - mid - 0.95 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((p[0].re - lo).abs() < 1e-10);
        assert!((p[0].re - 0.98988).abs() < 1e-5);
        assert!((p[1].re - (1.0 - lo * lo)).abs() < 1e-10);
        let num = boundary_distance_numeric(&d, &z).unwrap();
        assert!((num.value - p.dist(&z)).abs() < 1e-9);
        assert!(d.max_constraint(&num.nearest).abs() < 1e-10, "{}", d.max_constraint(&num.nearest));
    }

    #[test]
    fn directional_examples() {
        let b = ball(2);
        let z = CPoint::real(&[0.5, 0.0]);
        let e1 = CPoint::basis(2, 0);
        let e2 = CPoint::basis(2, 1);
        assert!((directional_distance(&b, &z, &e1).unwrap() - 0.5).abs() < 1e-12);
        assert!((directional_distance(&b, &z, &e2).unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(directional_distance(&b, &z, &CPoint::zeros(2)), Err(Error::ZeroDirection));
    }

    #[test]
    fn directional_matches_bruteforce_on_tube() {
        let d = ex21_omega();
        let z = CPoint::real(&[0.5, 0.0]);
        let v = CPoint::real(&[0.0, 1.0]);
        let fast = directional_distance(&d, &z, &v).unwrap();
        let slow = directional_distance_bruteforce(&d, &z, &v).unwrap();
        assert!((fast - slow).abs() < 1e-6, "{fast} {slow}");
        assert!((fast - 0.5).abs() < 1e-9);
    }

    #[test]
    fn normals() {
        let n = inward_normal(&ball(2), &CPoint::real(&[1.0, 0.0])).unwrap();
        assert!(n.dist(&CPoint::real(&[-1.0, 0.0])) < 1e-15);
        let n = inward_normal(&ex22_d(), &CPoint::zeros(2)).unwrap();
        assert!(n.dist(&CPoint::real(&[1.0, 0.0])) < 1e-15);
        assert!(matches!(
            inward_normal(&ex21_omega(), &CPoint::real(&[1.0, 0.0])),
            Err(Error::NonSmooth(_))
        ));
        assert!(matches!(
            inward_normal(&polydisc(2), &CPoint(vec![c(1.0, 0.0), c(0.0, 1.0)])),
            Err(Error::NonSmooth(_))
        ));
    }

    #[test]
    fn outside_points_are_rejected() {
        let b = ball(2);
        assert_eq!(
            boundary_distance(&b, &CPoint::real(&[1.0, 0.0])),
            Err(Error::OutsideDomain)
        );
    }

    #[test]
    fn nonconvex_domain_distance() {
        let d = ex22_d();
        let z = CPoint::real(&[0.5, 0.0]);
        let r = boundary_distance_numeric(&d, &z).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8, "{}", r.value);
    }
}
