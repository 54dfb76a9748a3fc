//! Covariance `R(cos γ, t, t′)` of the spherical field, angular mean-square
//! increments and the short/long memory criterion.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::transfer;
use crate::measure::{DiffusionParams, SpectralMeasure};
use crate::quadrature::QuadOptions;
use crate::special_fn::legendre_p_seq;
use crate::spectrum::{check_support, holder_sum, integrate_measure, spectrum_range, tail_sum_lommel_at, TailOptions};

const SINC_SERIES: f64 = 1.0e-4;

fn covariance_quad() -> QuadOptions {
    QuadOptions { rel_tol: 1e-11, abs_tol: 1e-200, ..QuadOptions::default() }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `1 − sinc(x)` without cancellation for small `x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0 * (1.0 - x2 / 110.0))))
    } else {
        1.0 - x.sin() / x
    }
}

/// `1 − cos γ` computed as `2 sin²(γ/2)`.
pub fn one_minus_cos(gamma: f64) -> f64 {
    let s = (0.5 * gamma).sin();
    2.0 * s * s
}

/// Angular distance and two times at which to evaluate the covariance.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceQuery<'a> {
    pub gamma: f64,
    pub t: f64,
    pub t_prime: f64,
    pub measure: &'a SpectralMeasure,
    pub params: DiffusionParams,
}

impl<'a> CovarianceQuery<'a> {
    pub fn new(gamma: f64, t: f64, t_prime: f64, measure: &'a SpectralMeasure, params: DiffusionParams) -> Result<Self> {
        check_gamma(gamma)?;
        for v in [t, t_prime] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("time must be finite and nonnegative, got {v}")));
            }
        }
        Ok(Self { gamma, t, t_prime, measure, params })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=PI).contains(&gamma) {
        return Err(Error::Domain(format!("angular distance {gamma} outside [0, π]")));
    }
    Ok(())
}

/// `R = ∫ sinc(2μ sin(γ/2)) H̃(μ,t) H̃(μ,t′) G(dμ)`.
pub fn covariance_spectral(q: &CovarianceQuery) -> Result<f64> {
    Ok(covariance_spectral_many(&[q.gamma], q.t, q.t_prime, q.measure, &q.params)?[0])
}

/// Spectral-route covariance at several angular distances sharing one pair of times.
pub fn covariance_spectral_many(
    gammas: &[f64],
    t: f64,
    t_prime: f64,
    m: &SpectralMeasure,
    p: &DiffusionParams,
) -> Result<Vec<f64>> {
    for &g in gammas {
        check_gamma(g)?;
    }
    let chords: Vec<f64> = gammas.iter().map(|g| 2.0 * (0.5 * g).sin()).collect();
    integrate_measure(m, p, gammas.len(), covariance_quad(), |mu, out| {
        let time = transfer(mu, t, p) * transfer(mu, t_prime, p);
        for (o, chord) in out.iter_mut().zip(&chords) {
            *o = sinc(mu * chord) * time;
        }
    })
}

/// Truncated Legendre series with a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreCovariance {
    pub value: f64,
    /// Upper bound on the omitted terms `l ≥ L_max`.
    pub remainder: f64,
}

/// `R ≈ (1/4π) Σ_{l<L_max} (2l+1) C_l(t,t′) P_l(cos γ)`.
///
/// The remainder uses `|P_l| ≤ 1` and `|C_l(t,t′)| ≤ ½(C_l(t,t) + C_l(t′,t′))`,
/// with both tails taken in closed form.
pub fn covariance_legendre(q: &CovarianceQuery, lmax: usize) -> Result<LegendreCovariance> {
    if lmax == 0 {
        return Err(Error::Domain("Legendre series needs L_max ≥ 1".into()));
    }
    let c = spectrum_range(0, lmax, q.t, q.t_prime, q.measure, &q.params)?;
    let p = legendre_p_seq(lmax - 1, q.gamma.cos())?;
    let value = c.iter().zip(&p).enumerate().map(|(l, (cl, pl))| (2 * l + 1) as f64 * cl * pl).sum::<f64>()
        / (4.0 * PI);
    let tail = if q.t == q.t_prime {
        tail_sum_lommel_at(lmax, q.t, q.measure, &q.params)?
    } else {
        0.5 * (tail_sum_lommel_at(lmax, q.t, q.measure, &q.params)?
            + tail_sum_lommel_at(lmax, q.t_prime, q.measure, &q.params)?)
    };
    Ok(LegendreCovariance { value, remainder: tail / (4.0 * PI) })
}

/// Mean-square difference of field values at angular distance `γ`, equal time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMse {
    /// `(1/2π) Σ_{l<L_max} (2l+1) C_l(t,t) (1 − P_l(cos γ))`.
    pub series: f64,
    /// Bound on the omitted degrees, from `0 ≤ 1 − P_l ≤ 2`.
    pub remainder: f64,
    /// `2 ∫ (1 − sinc(2μ sin(γ/2))) H̃²(μ,t) G(dμ)`, which is the full sum.
    pub spectral: f64,
}

pub fn angular_mse(gamma: f64, t: f64, m: &SpectralMeasure, p: &DiffusionParams, lmax: usize) -> Result<AngularMse> {
    check_gamma(gamma)?;
    if lmax == 0 {
        return Err(Error::Domain("Legendre series needs L_max ≥ 1".into()));
    }
    let c = spectrum_range(0, lmax, t, t, m, p)?;
    let pl = legendre_p_seq(lmax - 1, gamma.cos())?;
    let series = c
        .iter()
        .zip(&pl)
        .enumerate()
        .map(|(l, (cl, pl))| (2 * l + 1) as f64 * cl * (1.0 - pl))
        .sum::<f64>()
        / (2.0 * PI);
    let remainder = tail_sum_lommel_at(lmax, t, m, p)? / PI;
    let spectral = angular_mse_spectral(gamma, t, m, p)?;
    Ok(AngularMse { series, remainder, spectral })
}

/// `2 (R(1,t,t) − R(cos γ,t,t))` evaluated as a single integral.
pub fn angular_mse_spectral(gamma: f64, t: f64, m: &SpectralMeasure, p: &DiffusionParams) -> Result<f64> {
    check_gamma(gamma)?;
    check_support(m)?;
    let chord = 2.0 * (0.5 * gamma).sin();
    let v = integrate_measure(m, p, 1, covariance_quad(), |mu, out| {
        let h = transfer(mu, t, p);
        out[0] = 2.0 * one_minus_sinc(mu * chord) * h * h;
    })?;
    Ok(v[0])
}

/// Right-hand side of the angular Hölder bound,
/// `(1/π) Σ (2l+1)^{1+2α} C_l · (1 − cos γ)^α`, with `C_l = C_l(0,0)`.
///
/// When the measure puts no mass on `[0, c/2D]` the bound is multiplied by
/// `e^{−c²t/D}(1 + c²t/2D)²`.
pub fn holder_bound(
    gamma: f64,
    t: f64,
    alpha: f64,
    m: &SpectralMeasure,
    p: &DiffusionParams,
    opts: TailOptions,
) -> Result<f64> {
    check_gamma(gamma)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("α must lie in [0, 1], got {alpha}")));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let sum = holder_sum(0.0, alpha, m, p, opts)?;
    if !sum.converged {
        return Err(Error::Accuracy {
            message: "Hölder constant did not converge before the degree cap".into(),
            estimate: sum.value,
            error: f64::NAN,
        });
    }
    let mut bound = sum.value / PI * one_minus_cos(gamma).powf(alpha);
    if m.mass_up_to(p.cutoff()) == 0.0 {
        let env = crate::kernel::wave_envelope(t, p);
        bound *= env * env;
    }
    Ok(bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MemoryClass {
    ShortRange,
    LongRange,
    Inconclusive,
}

/// Local power-law decay of `|R(cos γ, t+h, t)|` between `H/10` and `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayDiagnostic {
    /// `p` in `|R| ~ h^{−p}`; `+∞` once `|R|` has underflowed.
    pub exponent: f64,
    /// Set when `p ≤ 1`, i.e. the integral still grows like a divergent one.
    pub divergence_suspected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryReport {
    pub classification: MemoryClass,
    /// Exponent `a` of the segment touching the origin, if any.
    pub origin_exponent: Option<f64>,
    /// `(H, ∫₀^H |R(cos γ, t+h, t)| dh)`.
    pub integrated_abs_cov: Vec<(f64, f64)>,
    pub decay: Option<DecayDiagnostic>,
}

/// Short-range dependence holds iff `μ⁻² G(dμ)` is integrable near 0; for
/// atoms and power-law segments that means no segment `A μ^a` with `a ≤ 1`
/// starts at the origin.
pub fn memory_classify(m: &SpectralMeasure) -> Result<MemoryReport> {
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let origin = m.segments().iter().find(|s| s.lo == 0.0).map(|s| s.exponent);
    let classification = match origin {
        Some(a) if a <= 1.0 => MemoryClass::LongRange,
        _ => MemoryClass::ShortRange,
    };
    Ok(MemoryReport { classification, origin_exponent: origin, integrated_abs_cov: Vec::new(), decay: None })
}

/// Default step for the memory integral: `H_max/10⁴`, refined to resolve the
/// fastest oscillation `2π/(10 c μ_max)`.
pub fn default_h_step(h_max: f64, m: &SpectralMeasure, p: &DiffusionParams) -> f64 {
    let base = h_max / 1.0e4;
    match m.support_upper_bound() {
        Ok(top) if top > 0.0 => base.min(2.0 * PI / (10.0 * p.c * top)),
        _ => base,
    }
}

/// Cumulative trapezoid of `|R(cos γ, t+h, t)|` over `h ∈ [0, H_max]`.
pub fn integrated_abs_covariance(
    t: f64,
    h_max: f64,
    m: &SpectralMeasure,
    p: &DiffusionParams,
    gamma: f64,
    h_step: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    check_gamma(gamma)?;
    if !(h_max.is_finite() && h_max > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {h_max}")));
    }
    let step = h_step.unwrap_or_else(|| default_h_step(h_max, m, p));
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    let n = (h_max / step).ceil() as usize;
    let hs: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(h_max)).collect();
    let values: Vec<f64> = hs
        .par_iter()
        .map(|&h| covariance_spectral_many(&[gamma], t + h, t, m, p).map(|v| v[0].abs()))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(hs.len());
    let mut acc = 0.0;
    out.push((0.0, 0.0));
    for i in 1..hs.len() {
        acc += 0.5 * (hs[i] - hs[i - 1]) * (values[i] + values[i - 1]);
        out.push((hs[i], acc));
    }
    Ok(out)
}

/// Decay exponent of `|R(cos γ, t+h, t)|` between `h = H/10` and `h = H`.
pub fn decay_diagnostic(t: f64, h_max: f64, m: &SpectralMeasure, p: &DiffusionParams, gamma: f64) -> Result<DecayDiagnostic> {
    let far = covariance_spectral_many(&[gamma], t + h_max, t, m, p)?[0].abs();
    let near = covariance_spectral_many(&[gamma], t + 0.1 * h_max, t, m, p)?[0].abs();
    let exponent = if far == 0.0 || near == 0.0 { f64::INFINITY } else { -(far / near).log10() };
    Ok(DecayDiagnostic { exponent, divergence_suspected: exponent <= 1.0 })
}

/// Classification plus the corroborating finite-horizon evidence.
pub fn memory_report(
    m: &SpectralMeasure,
    p: &DiffusionParams,
    t: f64,
    h_max: f64,
    gamma: f64,
    h_step: Option<f64>,
) -> Result<MemoryReport> {
    let mut report = memory_classify(m)?;
    report.integrated_abs_cov = integrated_abs_covariance(t, h_max, m, p, gamma, h_step)?;
    report.decay = Some(decay_diagnostic(t, h_max, m, p, gamma)?);
    Ok(report)
}
