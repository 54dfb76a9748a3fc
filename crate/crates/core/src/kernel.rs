//! Fourier transfer function `H̃(μ, t)` of the telegraph equation
//! `(1/c²) q_tt + (1/D) q_t = Δq` with `q(·,0)` given and `q_t(·,0) = 0`.
//!
//! With `x = c²t/2D` and cut-off `μ_c = c/2D`:
//!
//! * `μ ≤ μ_c`: `H̃₁ = e^{−x}[cosh s + x·sinh(s)/s]`, `s = x√(1 − μ²/μ_c²)`
//! * `μ > μ_c`: `H̃₂ = e^{−x}[cos s + x·sin(s)/s]`, `s = x√(μ²/μ_c² − 1)`
//!
//! which is the same as `ctΛ` with `Λ = √|μ_c² − μ²|`.

use crate::error::{Error, Result};
use crate::measure::DiffusionParams;

const TAYLOR_ARG: f64 = 1.0e-4;

/// A point `(μ, t)` at which to evaluate the transfer function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    mu: f64,
    t: f64,
    params: DiffusionParams,
}

impl KernelQuery {
    pub fn new(mu: f64, t: f64, params: DiffusionParams) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::Domain(format!("wave number must be finite and nonnegative, got {mu}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
        }
        Ok(Self { mu, t, params })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> &DiffusionParams {
        &self.params
    }
}

/// Non-travelling branch; zero above the cut-off.
pub fn h1(q: &KernelQuery) -> f64 {
    if q.mu > q.params.cutoff() {
        0.0
    } else {
        transfer(q.mu, q.t, &q.params)
    }
}

/// Damped travelling-wave branch; zero at and below the cut-off.
pub fn h2(q: &KernelQuery) -> f64 {
    if q.mu > q.params.cutoff() {
        transfer(q.mu, q.t, &q.params)
    } else {
        0.0
    }
}

/// `H̃ = H̃₁ + H̃₂`.
pub fn h(q: &KernelQuery) -> f64 {
    transfer(q.mu, q.t, &q.params)
}

/// Unchecked `H̃(μ, t)` for `μ, t ≥ 0`; the hot path used by the spectral sums.
pub fn transfer(mu: f64, t: f64, p: &DiffusionParams) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let cut = p.cutoff();
    let x = p.c * p.c * t / (2.0 * p.d);
    if mu <= cut {
        let root = ((cut - mu) * (cut + mu)).sqrt() / cut;
        let s = x * root;
        if s < TAYLOR_ARG {
            let s2 = s * s;
            let cosh = 1.0 + s2 / 2.0 * (1.0 + s2 / 12.0);
            let sinhc = 1.0 + s2 / 6.0 * (1.0 + s2 / 20.0);
            return (-x).exp() * (cosh + x * sinhc);
        }
        // s − x computed without cancellation
        let rho = (mu / cut) * (mu / cut);
        let grow = (-x * rho / (1.0 + root)).exp();
        let shrink = (-s - x).exp();
        0.5 * (grow + shrink) + x * grow * (-(-2.0 * s).exp_m1()) / (2.0 * s)
    } else {
        let s = x * ((mu - cut) * (mu + cut)).sqrt() / cut;
        let (sin_c, cos) = if s < TAYLOR_ARG {
            let s2 = s * s;
            (1.0 - s2 / 6.0 * (1.0 - s2 / 20.0), 1.0 - s2 / 2.0 * (1.0 - s2 / 12.0))
        } else {
            let (sn, cs) = s.sin_cos();
            (sn / s, cs)
        };
        (-x).exp() * (cos + x * sin_c)
    }
}

/// `e^{−x}(1 + x)` with `x = c²t/2D`: the value at the cut-off and the
/// envelope bounding `|H̃₂|`.
pub fn wave_envelope(t: f64, p: &DiffusionParams) -> f64 {
    let x = p.c * p.c * t / (2.0 * p.d);
    (-x).exp() * (1.0 + x)
}

/// Upper bound for `H̃(μ, t)` on `μ ≥ δ` when `0 < δ < c/2D`:
/// `(1 + (1 − 4D²δ²/c²)^{−1/2}) e^{−Dδ²t}`.
pub fn support_gap_bound(delta: f64, t: f64, p: &DiffusionParams) -> Result<f64> {
    let ratio = 2.0 * p.d * delta / p.c;
    if !(delta > 0.0 && ratio < 1.0) {
        return Err(Error::Precondition(format!(
            "support gap {delta} must lie strictly between 0 and the cut-off {}",
            p.cutoff()
        )));
    }
    Ok((1.0 + 1.0 / (1.0 - ratio * ratio).sqrt()) * (-p.d * delta * delta * t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(c: f64, d: f64) -> DiffusionParams {
        DiffusionParams::new(c, d).unwrap()
    }

    fn q(mu: f64, t: f64, p: DiffusionParams) -> KernelQuery {
        KernelQuery::new(mu, t, p).unwrap()
    }

    #[test]
    fn documented_values() {
        let p = params(1.0, 1.0);
        assert!((h1(&q(0.0, 5.0, p)) - 1.0).abs() < 1e-14);
        assert_eq!(h1(&q(0.3, 0.0, p)), 1.0);
        assert_eq!(h(&q(0.3, 0.0, params(3.0, 0.2))), 1.0);
        assert_eq!(h2(&q(2.0, 0.0, p)), 1.0);
        let at_cut = 2.0 * (-1.0f64).exp();
        assert!((h1(&q(0.5, 2.0, p)) - at_cut).abs() < 1e-15);
        assert!((h2(&q(0.5 + 1e-12, 2.0, p)) - at_cut).abs() < 1e-10);
        assert_eq!(h2(&q(0.5, 2.0, p)), 0.0);
        assert_eq!(h1(&q(0.6, 2.0, p)), 0.0);
        // closed form at μ = t = 1: e^{−1/2}[cos √0.75 + (0.5/√0.75) sin √0.75]
        let w = 0.75f64.sqrt();
        let want = (-0.5f64).exp() * (w.cos() + 0.5 / w * w.sin());
        let got = h(&q(1.0, 1.0, p));
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.6597).abs() < 1e-4);
    }

    #[test]
    fn literal_formula_agreement() {
        // direct cosh/sinh evaluation where it is well-conditioned
        let p = params(1.3, 0.7);
        let cut = p.cutoff();
        for &mu in &[0.0, 0.2, 0.5, 0.9] {
            for &t in &[0.1, 0.7, 2.0] {
                let lam = (cut * cut - mu * mu).sqrt();
                let ct = p.c * t;
                let want = (-p.c * p.c * t / (2.0 * p.d)).exp()
                    * ((ct * lam).cosh() + cut / lam * (ct * lam).sinh());
                let got = h(&q(mu, t, p));
                assert!((got - want).abs() < 1e-13 * want.max(1e-300), "mu={mu} t={t}");
            }
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let p = params(50.0, 0.01);
        for &mu in &[0.0, 1.0, 2499.0, 2500.0, 2501.0, 1e4] {
            let v = h(&q(mu, 1e3, p));
            assert!(v.is_finite() && v.abs() <= 1.0 + 1e-12, "mu={mu}: {v}");
        }
        assert!((h(&q(0.0, 1e3, p)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn continuity_across_cutoff() {
        for &(c, d) in &[(1.0, 1.0), (1.0, 2.0), (3.0, 0.5), (0.2, 5.0)] {
            let p = params(c, d);
            let cut = p.cutoff();
            for &t in &[0.01, 0.5, 3.0, 40.0] {
                let below = h(&q(cut - 1e-8, t, p));
                let above = h(&q(cut + 1e-8, t, p));
                assert!((below - above).abs() <= 1e-6);
                assert!((h(&q(cut, t, p)) - wave_envelope(t, &p)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn support_gap_bound_rejects_outside_gap() {
        let p = params(1.0, 1.0);
        assert!(support_gap_bound(0.0, 1.0, &p).is_err());
        assert!(support_gap_bound(0.5, 1.0, &p).is_err());
        assert!(support_gap_bound(0.3, 1.0, &p).is_ok());
    }

    proptest! {
        #[test]
        fn branch_bounds(mu in 0.0f64..6.0, t in 0.0f64..20.0, c in 0.1f64..4.0, d in 0.1f64..4.0) {
            let p = params(c, d);
            let k = q(mu, t, p);
            let a = h1(&k);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
            prop_assert!(h2(&k).abs() <= wave_envelope(t, &p) + 1e-12);
            prop_assert_eq!(a + h2(&k), h(&k));
        }

        #[test]
        fn ode_residual(mu in 0.0f64..3.0, t in 0.01f64..5.0, c in 0.5f64..2.0, d in 0.5f64..2.0) {
            let p = params(c, d);
            let step = 1e-4;
            let f = |s: f64| transfer(mu, s, &p);
            let (m, z, pl) = (f(t - step), f(t), f(t + step));
            let second = (pl - 2.0 * z + m) / (step * step);
            let first = (pl - m) / (2.0 * step);
            let residual = second / (c * c) + first / d + mu * mu * z;
            prop_assert!(residual.abs() <= 1e-5, "residual {residual}");
        }

        #[test]
        fn gap_decay(delta in 0.01f64..0.49, frac in 0.0f64..1.0, t in 0.0f64..30.0) {
            let p = params(1.0, 1.0);
            let mu = delta + frac * (p.cutoff() - delta);
            let bound = support_gap_bound(delta, t, &p).unwrap();
            prop_assert!(h1(&q(mu, t, p)) <= bound * (1.0 + 1e-12));
        }
    }
}
