//! Two-variable FitzHugh-Nagumo kinetics and diffusivities.
//!
//! Units: time in ms, space in mm, diffusivity in mm^2/ms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FhnParams {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    /// Sign of the `u^3/3` term in the activator kinetics. `-1` gives the
    /// classic excitable form `u - u^3/3 - v`.
    pub cubic_sign: i8,
    pub d_u: f64,
    pub d_v: f64,
}

impl Default for FhnParams {
    fn default() -> Self {
        FhnParams {
            epsilon: 0.3,
            a: 0.5,
            b: 0.68,
            cubic_sign: -1,
            d_u: 1.0,
            d_v: 0.0,
        }
    }
}

impl FhnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::Config("a and b must be finite".into()));
        }
        if self.cubic_sign != 1 && self.cubic_sign != -1 {
            return Err(Error::Config(format!(
                "cubic_sign must be +1 or -1, got {}",
                self.cubic_sign
            )));
        }
        for (name, d) in [("d_u", self.d_u), ("d_v", self.d_v)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {d}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatePair {
    pub u: f64,
    pub v: f64,
}

impl StatePair {
    pub fn new(u: f64, v: f64) -> Self {
        StatePair { u, v }
    }
}

/// Local kinetics `(f, g)` in ms^-1.
#[inline]
pub fn reaction(params: &FhnParams, s: StatePair) -> StatePair {
    let sign = params.cubic_sign as f64;
    let f = (s.u + sign * s.u * s.u * s.u / 3.0 - s.v) / params.epsilon;
    let g = params.epsilon * (s.u - params.a * s.v + params.b);
    StatePair { u: f, v: g }
}

const MAX_ITER: usize = 200;

/// Homogeneous fixed point of the kinetics.
///
/// On the `f = 0` nullcline `v = u + c u^3/3`, so `g = 0` reduces to the cubic
/// `p(u) = (1 - a) u - a c u^3 / 3 + b`. Solved by damped Newton, falling
/// back to bisection on a sign-change bracket.
pub fn resting_state(params: &FhnParams) -> Result<StatePair> {
    params.validate()?;
    let c = params.cubic_sign as f64;
    let a = params.a;
    let b = params.b;
    let p = |u: f64| (1.0 - a) * u - a * c * u * u * u / 3.0 + b;
    let dp = |u: f64| (1.0 - a) - a * c * u * u;

    // Three real roots occur when p has two critical values of opposite sign.
    let k = a * c;
    if k != 0.0 && (1.0 - a) / k > 0.0 {
        let uc = ((1.0 - a) / k).sqrt();
        if p(uc) * p(-uc) < 0.0 {
            return Err(Error::Contract(format!(
                "kinetics have several homogeneous fixed points (a={a}, b={b}, cubic_sign={})",
                params.cubic_sign
            )));
        }
    }

    // Bracket: expand until p changes sign.
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while p(lo) * p(hi) > 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        expansions += 1;
        if expansions > 64 {
            return Err(Error::Numerical(format!(
                "no sign change of the resting-state cubic in [{lo}, {hi}]"
            )));
        }
    }

    let mut u = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let pu = p(u);
        if pu == 0.0 {
            converged = true;
            break;
        }
        if pu * p(lo) < 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let d = dp(u);
        let mut next = if d != 0.0 { u - pu / d } else { f64::NAN };
        // Damping: halve the Newton step until it stays inside the bracket.
        let mut damp = 0;
        while !(next > lo && next < hi) && damp < 30 {
            next = u + 0.5 * (next - u);
            damp += 1;
        }
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - u).abs() <= 1e-15 * (1.0 + u.abs());
        u = next;
        if done || hi - lo <= 1e-15 * (1.0 + u.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "resting state did not converge in {MAX_ITER} iterations (bracket [{lo}, {hi}], p(u)={})",
            p(u)
        )));
    }
    let rest = StatePair::new(u, u + c * u * u * u / 3.0);
    let r = reaction(params, rest);
    if r.u.abs().max(r.v.abs()) > 1e-12 {
        return Err(Error::Numerical(format!(
            "resting state residual too large: f={}, g={}",
            r.u, r.v
        )));
    }
    Ok(rest)
}

/// Largest forward-Euler time step for which the diffusion part stays stable,
/// `h^2 / (2 N D_max)`. Infinite when nothing diffuses.
pub fn stability_limit(params: &FhnParams, grid: &GridSpec) -> f64 {
    let d = params.d_u.max(params.d_v);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    let h = grid.spacing();
    h * h / (2.0 * grid.ndim() as f64 * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Independent oracle: plain bisection on u^3 + 3u + 4.08 = 0.
    fn bisect_default_cubic() -> f64 {
        let f = |u: f64| u * u * u + 3.0 * u + 4.08;
        let (mut lo, mut hi) = (-3.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn reaction_examples() {
        let p = FhnParams::default();
        let r = reaction(&p, StatePair::new(0.0, 0.0));
        assert_eq!(r.u, 0.0);
        assert_abs_diff_eq!(r.v, 0.204, epsilon = 1e-15);
        let r = reaction(&p, StatePair::new(1.0, 0.0));
        assert_abs_diff_eq!(r.u, (1.0 - 1.0 / 3.0) / 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(r.u, 2.222_222_222_222_222, epsilon = 1e-12);
        assert_abs_diff_eq!(r.v, 0.504, epsilon = 1e-15);
    }

    #[test]
    fn resting_state_matches_bisection_oracle() {
        let u_oracle = bisect_default_cubic();
        assert_abs_diff_eq!(u_oracle, -1.013_245_228, epsilon = 1e-8);
        let rest = resting_state(&FhnParams::default()).unwrap();
        assert_abs_diff_eq!(rest.u, u_oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(rest.v, 2.0 * (u_oracle + 0.68), epsilon = 1e-12);
        assert_abs_diff_eq!(rest.v, -0.666_490_456, epsilon = 1e-8);
    }

    #[test]
    fn resting_state_symmetric_case_is_origin() {
        let p = FhnParams {
            b: 0.0,
            ..FhnParams::default()
        };
        let rest = resting_state(&p).unwrap();
        assert_abs_diff_eq!(rest.u, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rest.v, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn resting_state_independent_of_epsilon() {
        let base = resting_state(&FhnParams::default()).unwrap();
        for eps in [0.01, 0.1, 1.0, 7.5] {
            let p = FhnParams {
                epsilon: eps,
                ..FhnParams::default()
            };
            let r = resting_state(&p).unwrap();
            assert_abs_diff_eq!(r.u, base.u, epsilon = 1e-13);
            assert_abs_diff_eq!(r.v, base.v, epsilon = 1e-13);
        }
    }

    #[test]
    fn literal_cubic_sign_still_has_a_fixed_point() {
        let p = FhnParams {
            cubic_sign: 1,
            ..FhnParams::default()
        };
        let rest = resting_state(&p).unwrap();
        let r = reaction(&p, rest);
        assert!(r.u.abs() < 1e-12 && r.v.abs() < 1e-12);
    }

    #[test]
    fn multiple_fixed_points_rejected() {
        // 0.9 u - 0.1 u^3/3 + 0.1 = 0 has three real roots.
        let p = FhnParams {
            a: 0.1,
            b: 0.1,
            cubic_sign: 1,
            ..FhnParams::default()
        };
        assert!(matches!(resting_state(&p), Err(Error::Contract(_))));
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            FhnParams {
                epsilon: 0.0,
                ..FhnParams::default()
            },
            FhnParams {
                cubic_sign: 0,
                ..FhnParams::default()
            },
            FhnParams {
                d_u: -1.0,
                ..FhnParams::default()
            },
        ] {
            assert!(p.validate().is_err());
        }
    }

    #[test]
    fn stability_limit_examples() {
        let p = FhnParams::default();
        let g = GridSpec::cube(4, 5, 1.0).unwrap();
        assert_abs_diff_eq!(stability_limit(&p, &g), 0.125, epsilon = 1e-15);
        assert!(0.05 <= stability_limit(&p, &g));
        let g = GridSpec::cube(4, 5, 0.5).unwrap();
        assert_abs_diff_eq!(stability_limit(&p, &g), 0.03125, epsilon = 1e-15);
        assert!(0.025 <= stability_limit(&p, &g));
        let g = GridSpec::cube(1, 5, 1.0).unwrap();
        assert_abs_diff_eq!(stability_limit(&p, &g), 0.5, epsilon = 1e-15);
        let frozen = FhnParams { d_u: 0.0, ..p };
        assert!(stability_limit(&frozen, &g).is_infinite());
    }

    #[test]
    fn nullcline_is_excitable_only_with_negative_sign() {
        // df/du = (1 + c u^2)/eps
        let dfdu = |p: &FhnParams, u: f64| {
            let h = 1e-6;
            (reaction(p, StatePair::new(u + h, 0.0)).u - reaction(p, StatePair::new(u - h, 0.0)).u)
                / (2.0 * h)
        };
        let p = FhnParams::default();
        assert!(dfdu(&p, 0.0) > 0.0);
        assert!(dfdu(&p, 2.0) < 0.0);
        assert!(dfdu(&p, -2.0) < 0.0);
        let literal = FhnParams { cubic_sign: 1, ..p };
        for u in [-2.0, 0.0, 2.0] {
            assert!(dfdu(&literal, u) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn odd_symmetry_without_b(u in -3.0f64..3.0, v in -3.0f64..3.0, a in 0.0f64..2.0, eps in 0.05f64..2.0, sign in prop_oneof![Just(-1i8), Just(1i8)]) {
            let p = FhnParams { epsilon: eps, a, b: 0.0, cubic_sign: sign, ..FhnParams::default() };
            let plus = reaction(&p, StatePair::new(u, v));
            let minus = reaction(&p, StatePair::new(-u, -v));
            prop_assert!((plus.u + minus.u).abs() <= 1e-12 * (1.0 + plus.u.abs()));
            prop_assert!((plus.v + minus.v).abs() <= 1e-12 * (1.0 + plus.v.abs()));
        }

        #[test]
        fn resting_state_is_a_fixed_point(a in 0.05f64..0.95, b in -1.5f64..1.5, eps in 0.05f64..2.0) {
            let p = FhnParams { epsilon: eps, a, b, ..FhnParams::default() };
            let rest = resting_state(&p).unwrap();
            let r = reaction(&p, rest);
            prop_assert!(r.u.abs() <= 1e-12 && r.v.abs() <= 1e-12);
        }
    }
}
