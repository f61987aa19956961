//! Flatness check for scalar boundary profiles and seeded samplers shared by
//! the scenarios.

use rand::Rng;
use serde::Serialize;

use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::point::{c, CPoint};

/// Abscissae at which `φ(x)/x^k` is inspected.
pub const TYPE_PROBES: [f64; 3] = [1e-1, 1e-2, 1e-3];
/// Ratio the last probe must fall below.
pub const TYPE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCheck {
    pub order: u32,
    pub ratios: [f64; 3],
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfiniteTypeReport {
    pub checks: Vec<OrderCheck>,
    /// Smallest tested order that is not certified, if any.
    pub finite_type_at_most: Option<u32>,
}

impl InfiniteTypeReport {
    pub fn all_pass(&self) -> bool {
        self.finite_type_at_most.is_none()
    }
}

/// `φ(x)/x^k → 0` for each order: the ratios at `x = 10⁻¹, 10⁻², 10⁻³` must be
/// nonincreasing and the last one below `1e−8`.
pub fn infinite_type_check(phi: &dyn Fn(f64) -> f64, orders: &[u32]) -> Result<InfiniteTypeReport> {
    let at0 = phi(0.0);
    if at0 != 0.0 {
        return Err(Error::InvalidArgument(format!("profile must vanish at 0, got {at0}")));
    }
    let checks: Vec<OrderCheck> = orders
        .iter()
        .map(|&k| {
            let ratios = TYPE_PROBES.map(|x| phi(x).abs() / x.powi(k as i32));
            let pass = ratios.windows(2).all(|w| w[1] <= w[0]) && ratios[2] < TYPE_FLOOR;
            OrderCheck { order: k, ratios, pass }
        })
        .collect();
    let finite_type_at_most = checks.iter().filter(|c| !c.pass).map(|c| c.order).min();
    Ok(InfiniteTypeReport {
        checks,
        finite_type_at_most,
    })
}

/// Uniform rejection samples from `d` inside the ball of radius `radius`.
pub fn sample_in_domain(d: &DomainSpec, count: usize, radius: f64, rng: &mut impl Rng) -> Result<Vec<CPoint>> {
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 100_000 * count.max(1) {
            return Err(Error::Config(format!("could not sample {count} points in '{}'", d.name)));
        }
        let z = CPoint((0..d.dim).map(|_| c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))).collect());
        if z.norm() < radius && d.inside(&z) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Uniform unit vector in `ℂⁿ`.
pub fn unit_direction(n: usize, rng: &mut impl Rng) -> CPoint {
    loop {
        let v = CPoint((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v.scale_re(1.0 / r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::flat;

    #[test]
    fn flat_profiles_have_infinite_type() {
        let orders: Vec<u32> = (1..=20).collect();
        assert!(infinite_type_check(&flat, &orders).unwrap().all_pass());
        let e1 = |x: f64| if x == 0.0 { 0.0 } else { (-1.0 / x).exp() };
        assert!(infinite_type_check(&e1, &orders).unwrap().all_pass());
    }

    #[test]
    fn cubic_has_finite_type() {
        let rep = infinite_type_check(&|x: f64| x * x * x, &[4]).unwrap();
        assert_eq!(rep.finite_type_at_most, Some(4));
        assert!(rep.checks[0].ratios[2] > rep.checks[0].ratios[0]);
        // x^3/x^2 = 10^-3 at the last probe: decreasing, but far above the floor.
        let rep = infinite_type_check(&|x: f64| x * x * x, &[1, 2, 3, 4]).unwrap();
        assert_eq!(rep.finite_type_at_most, Some(1));
        assert!(rep.checks[..2].iter().all(|c| c.ratios.windows(2).all(|w| w[1] <= w[0])));
        let rep = infinite_type_check(&|x: f64| x.powi(12), &[1, 2]).unwrap();
        assert!(rep.all_pass());
        assert!(infinite_type_check(&|x: f64| 1.0 + x, &[1]).is_err());
    }
}
