//! Bundled domains with analytic gradients and, where available, closed forms.

use std::sync::Arc;

use super::{ClosedForm, Constraint, DomainSpec};
use crate::error::{Error, Result};
use crate::point::{CPoint, C64};

/// Below this modulus a coordinate is treated as sitting on a kink of `|.|`.
const KINK: f64 = 1e-12;

/// exp(-1/x^2), extended by 0 at x = 0.
pub fn flat(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (-1.0 / (x * x)).exp()
    }
}

/// Derivative of [`flat`].
pub fn flat_prime(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        2.0 / (x * x * x) * flat(x)
    }
}

fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Unit ball of C^n.
pub fn ball(n: usize) -> DomainSpec {
    ball_at(CPoint::zeros(n), 1.0).renamed("ball")
}

/// Open ball with the given center and radius.
pub fn ball_at(center: CPoint, radius: f64) -> DomainSpec {
    let n = center.dim();
    let c1 = center.clone();
    let c2 = center.clone();
    let con = Constraint::new(
        "|z - c|^2 - R^2",
        Arc::new(move |z: &CPoint| z.dist(&c1).powi(2) - radius * radius),
    )
    .with_gradient(Arc::new(move |z: &CPoint| Ok((z - &c2).scale_re(2.0))));
    let c3 = center.clone();
    let c4 = center.clone();
    let cf = ClosedForm {
        distance: Arc::new(move |z: &CPoint| radius - z.dist(&c3)),
        nearest: Arc::new(move |z: &CPoint| {
            let d = z - &c4;
            let r = d.norm();
            if r == 0.0 {
                c4.axpy_re(radius, &CPoint::basis(d.dim(), 0))
            } else {
                c4.axpy_re(radius / r, &d)
            }
        }),
    };
    let bound = center.norm() + radius;
    DomainSpec::new("ball_at", n, vec![con])
        .expect("nonempty")
        .convex(true)
        .reinhardt(center.norm() == 0.0)
        .bounded_by(bound)
        .with_closed_form(cf)
}

/// Polydisc of radius 1 in C^n.
pub fn polydisc(n: usize) -> DomainSpec {
    let cons = (0..n)
        .map(|j| {
            Constraint::new(format!("|z{}|^2 - 1", j + 1), Arc::new(move |z: &CPoint| z[j].norm_sqr() - 1.0))
                .with_gradient(Arc::new(move |z: &CPoint| {
                    let mut g = CPoint::zeros(z.dim());
                    g[j] = z[j] * 2.0;
                    Ok(g)
                }))
        })
        .collect();
    let cf = ClosedForm {
        distance: Arc::new(|z: &CPoint| z.0.iter().map(|w| 1.0 - w.norm()).fold(f64::INFINITY, f64::min)),
        nearest: Arc::new(|z: &CPoint| {
            let mut j = 0;
            for k in 1..z.dim() {
                if 1.0 - z[k].norm() < 1.0 - z[j].norm() {
                    j = k;
                }
            }
            let mut p = z.clone();
            p[j] = unit_phase(z[j]);
            p
        }),
    };
    DomainSpec::new("polydisc", n, cons)
        .expect("nonempty")
        .convex(true)
        .reinhardt(true)
        .bounded_by((n as f64).sqrt())
        .with_closed_form(cf)
}

/// Real roots of 2x^3 + (2b - 1)x - a in [0, 1].
fn slice_cubic_roots(a: f64, b: f64) -> Vec<f64> {
    // depressed form x^3 + p x + q
    let p = (2.0 * b - 1.0) / 2.0;
    let q = -a / 2.0;
    let mut roots = Vec::with_capacity(3);
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        roots.push((-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt());
    } else if p == 0.0 {
        roots.push(0.0);
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (th - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        }
    }
    roots
        .into_iter()
        .map(|mut x| {
            for _ in 0..3 {
                let f = 2.0 * x * x * x + (2.0 * b - 1.0) * x - a;
                let df = 6.0 * x * x + 2.0 * b - 1.0;
                if df.abs() > 1e-12 {
                    x -= f / df;
                }
            }
            x
        })
        .filter(|x| (0.0..=1.0).contains(x))
        .collect()
}

/// Nearest point on { (x, 1 - x^2) : 0 <= x <= 1 } to (a, b) in the real quadrant.
pub fn ex21_slice_nearest(a: f64, b: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut cands = slice_cubic_roots(a, b);
    cands.push(0.0);
    cands.push(1.0);
    for x in cands {
        let d = (x - a).powi(2) + (1.0 - x * x - b).powi(2);
        if d < best.0 {
            best = (d, x);
        }
    }
    (best.1, 1.0 - best.1 * best.1)
}

/// { |z|^2 + |w| < 1 }.
pub fn ex21_d() -> DomainSpec {
    let con = Constraint::new(
        "|z1|^2 + |z2| - 1",
        Arc::new(|z: &CPoint| z[0].norm_sqr() + z[1].norm() - 1.0),
    )
    .with_gradient(Arc::new(|z: &CPoint| {
        let r = z[1].norm();
        if r <= KINK {
            return Err(Error::NonSmooth("|z2| is not differentiable at z2 = 0".into()));
        }
        Ok(CPoint(vec![z[0] * 2.0, z[1] / r]))
    }));
    let cf = ClosedForm {
        distance: Arc::new(|z: &CPoint| {
            let (a, b) = (z[0].norm(), z[1].norm());
            let (x, y) = ex21_slice_nearest(a, b);
            ((x - a).powi(2) + (y - b).powi(2)).sqrt()
        }),
        nearest: Arc::new(|z: &CPoint| {
            let (x, y) = ex21_slice_nearest(z[0].norm(), z[1].norm());
            CPoint(vec![unit_phase(z[0]) * x, unit_phase(z[1]) * y])
        }),
    };
    DomainSpec::new("Ex21_D", 2, vec![con])
        .expect("nonempty")
        .convex(true)
        .reinhardt(true)
        .bounded_by(1.0)
        .with_closed_form(cf)
}

/// { |z| + |w| < 1 }.
pub fn ex21_omega() -> DomainSpec {
    let con = Constraint::new(
        "|z1| + |z2| - 1",
        Arc::new(|z: &CPoint| z[0].norm() + z[1].norm() - 1.0),
    )
    .with_gradient(Arc::new(|z: &CPoint| {
        let (r0, r1) = (z[0].norm(), z[1].norm());
        if r0 <= KINK || r1 <= KINK {
            return Err(Error::NonSmooth("|z1| + |z2| has a kink where a coordinate vanishes".into()));
        }
        Ok(CPoint(vec![z[0] / r0, z[1] / r1]))
    }));
    let cf = ClosedForm {
        distance: Arc::new(|z: &CPoint| (1.0 - z[0].norm() - z[1].norm()) / std::f64::consts::SQRT_2),
        nearest: Arc::new(|z: &CPoint| {
            let (a, b) = (z[0].norm(), z[1].norm());
            let x = (1.0 + a - b) / 2.0;
            let y = (1.0 - a + b) / 2.0;
            CPoint(vec![unit_phase(z[0]) * x, unit_phase(z[1]) * y])
        }),
    };
    DomainSpec::new("Ex21_Omega", 2, vec![con])
        .expect("nonempty")
        .convex(true)
        .reinhardt(true)
        .bounded_by(1.0)
        .with_closed_form(cf)
}

/// Defining function exp(-1/|w|^4) - Re z of the flat piece of `ex22_d`.
pub fn ex22_rho(z: &CPoint) -> f64 {
    flat(z[1].norm_sqr()) - z[0].re
}

/// { Re z > exp(-1/|w|^4) } ∩ { |z|^2 + |w|^4 < 1 }.
pub fn ex22_d() -> DomainSpec {
    let flat_piece = Constraint::new("exp(-1/|z2|^4) - re(z1)", Arc::new(ex22_rho)).with_gradient(Arc::new(
        |z: &CPoint| {
            let s = z[1].norm_sqr();
            Ok(CPoint(vec![C64::new(-1.0, 0.0), z[1] * (2.0 * flat_prime(s))]))
        },
    ));
    let cap = Constraint::new(
        "|z1|^2 + |z2|^4 - 1",
        Arc::new(|z: &CPoint| z[0].norm_sqr() + z[1].norm_sqr().powi(2) - 1.0),
    )
    .with_gradient(Arc::new(|z: &CPoint| {
        Ok(CPoint(vec![z[0] * 2.0, z[1] * (4.0 * z[1].norm_sqr())]))
    }));
    DomainSpec::new("Ex22_D", 2, vec![flat_piece, cap])
        .expect("nonempty")
        .convex(false)
        .bounded_by(2f64.sqrt())
}

/// Defining function exp(-1/|w|^2) - Re z of the flat piece of `ex22_omega`.
pub fn ex22_omega_rho(z: &CPoint) -> f64 {
    flat(z[1].norm()) - z[0].re
}

/// { Re z > exp(-1/|w|^2) } ∩ B(0, 1).
pub fn ex22_omega() -> DomainSpec {
    let flat_piece = Constraint::new("exp(-1/|z2|^2) - re(z1)", Arc::new(ex22_omega_rho)).with_gradient(Arc::new(
        |z: &CPoint| {
            let r = z[1].norm();
            // flat'(r) w / r = 2 r^-4 flat(r) w, which tends to 0 with w
            let g = if r == 0.0 { C64::new(0.0, 0.0) } else { z[1] * (flat_prime(r) / r) };
            Ok(CPoint(vec![C64::new(-1.0, 0.0), g]))
        },
    ));
    let unit = ball(2);
    DomainSpec::new("Ex22_Omega", 2, vec![flat_piece, unit.constraints()[0].clone()])
        .expect("nonempty")
        .convex(false)
        .bounded_by(1.0)
}

/// `ex22_omega` cut down to the ball of the given radius about the origin.
/// Convex for radius at most sqrt(2/3).
pub fn ex22_omega_local(radius: f64) -> DomainSpec {
    let d = ex22_omega()
        .intersect(&ball_at(CPoint::zeros(2), radius), "Ex22_Omega_local")
        .expect("same dimension");
    d.convex(radius * radius <= 2.0 / 3.0)
}

/// { Re z1 < 0 } cut down to the ball of radius R about the origin.
pub fn truncated_half_space(n: usize, radius: f64) -> DomainSpec {
    let half = Constraint::new("re(z1)", Arc::new(|z: &CPoint| z[0].re)).with_gradient(Arc::new(|z: &CPoint| {
        Ok(CPoint::basis(z.dim(), 0))
    }));
    DomainSpec::new("half_space", n, vec![half])
        .expect("nonempty")
        .intersect(&ball_at(CPoint::zeros(n), radius), "truncated_half_space")
        .expect("same dimension")
        .convex(true)
}

/// { Im z2 > Re z1 } cut down to the ball of radius R: a boundary plane at 45 degrees
/// to the vertical axis of the identity chart.
pub fn tilted_half_space(radius: f64) -> DomainSpec {
    let plane = Constraint::new("re(z1) - im(z2)", Arc::new(|z: &CPoint| z[0].re - z[1].im)).with_gradient(
        Arc::new(|_: &CPoint| Ok(CPoint(vec![C64::new(1.0, 0.0), C64::new(0.0, -1.0)]))),
    );
    DomainSpec::new("tilted_plane", 2, vec![plane])
        .expect("nonempty")
        .intersect(&ball_at(CPoint::zeros(2), radius), "tilted_half_space")
        .expect("same dimension")
        .convex(true)
}

/// Looks up a bundled domain by name.
pub fn bundled(name: &str) -> Result<DomainSpec> {
    Ok(match name {
        "ball" => ball(2),
        "polydisc" => polydisc(2),
        "Ex21_D" | "ex21_d" => ex21_d(),
        "Ex21_Omega" | "ex21_omega" => ex21_omega(),
        "Ex22_D" | "ex22_d" => ex22_d(),
        "Ex22_Omega" | "ex22_omega" => ex22_omega(),
        other => return Err(Error::Config(format!("unknown bundled domain '{other}'"))),
    })
}

pub const BUNDLED_NAMES: [&str; 6] = ["ball", "polydisc", "Ex21_D", "Ex21_Omega", "Ex22_D", "Ex22_Omega"];

impl DomainSpec {
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_satisfy_equation() {
        for &(a, b) in &[(0.95, 0.0), (0.5, 0.3), (0.0, 0.1), (0.99, 0.01)] {
            for x in slice_cubic_roots(a, b) {
                let r = 2.0 * x * x * x + (2.0 * b - 1.0) * x - a;
                assert!(r.abs() < 1e-14, "{a} {b} {x} {r}");
            }
        }
    }

    #[test]
    fn slice_nearest_matches_dense_sampling() {
        for &(a, b) in &[(0.95, 0.0), (0.3, 0.2), (0.0, 0.0), (0.0, 0.6), (0.7, 0.4)] {
            let (x, y) = ex21_slice_nearest(a, b);
            let d = ((x - a).powi(2) + (y - b).powi(2)).sqrt();
            let brute = (0..=200_000)
                .map(|k| {
                    let t = k as f64 / 200_000.0;
                    ((t - a).powi(2) + (1.0 - t * t - b).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(d <= brute + 1e-12 && brute - d < 1e-9, "{a} {b}: {d} vs {brute}");
        }
    }

    #[test]
    fn flat_derivative_matches_difference_quotient() {
        for &x in &[0.3, 0.5, 0.9] {
            let h = 1e-6;
            let fd = (flat(x + h) - flat(x - h)) / (2.0 * h);
            assert!((fd - flat_prime(x)).abs() <= 1e-6 * flat_prime(x).abs().max(1e-300));
        }
        assert_eq!(flat(0.0), 0.0);
        assert_eq!(flat_prime(0.0), 0.0);
    }

    #[test]
    fn lookup_by_name() {
        for n in BUNDLED_NAMES {
            assert_eq!(bundled(n).unwrap().name, n);
        }
        assert!(bundled("torus").is_err());
    }
}
