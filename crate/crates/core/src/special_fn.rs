//! Half-integer Bessel functions, Legendre polynomials, spherical harmonics
//! and `ln Γ`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest degree accepted by the Bessel routines.
pub const BESSEL_MAX_DEGREE: usize = 10_000;
/// Largest argument accepted by the Bessel routines.
pub const BESSEL_MAX_ARG: f64 = 1.0e5;

const SERIES_ARG: f64 = 1.0e-3;
const RESCALE_AT: f64 = 1.0e250;
const RESCALE_BY: f64 = 1.0e-250;

/// Degree/order pair `(l, m)` with `|m| ≤ l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    l: usize,
    m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Domain(format!("order {m} exceeds degree {l}")));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> i64 {
        self.m
    }
}

fn check_bessel_args(lmax: usize, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("Bessel argument must be finite and nonnegative, got {x}")));
    }
    if x > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!("Bessel argument {x} exceeds supported range {BESSEL_MAX_ARG}")));
    }
    if lmax > BESSEL_MAX_DEGREE {
        return Err(Error::Domain(format!("Bessel degree {lmax} exceeds supported range {BESSEL_MAX_DEGREE}")));
    }
    Ok(())
}

/// `J_{l+1/2}(x)` for `l = 0..=lmax`.
///
/// Uses the power series for tiny arguments, upward recurrence from the
/// closed forms when every requested degree lies well inside the oscillatory
/// region `l < x`, and Miller's downward recurrence otherwise, normalized by
/// whichever of `j_0`, `j_1` is larger in magnitude.
pub fn bessel_half_seq(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check_bessel_args(lmax, x)?;
    if x == 0.0 {
        return Ok(vec![0.0; lmax + 1]);
    }
    let mut j = if x <= SERIES_ARG {
        spherical_series(lmax, x)
    } else if (lmax as f64) + 10.0 * x.cbrt() + 20.0 < x {
        spherical_upward(lmax, x)
    } else {
        spherical_miller(lmax, x)
    };
    let factor = (FRAC_2_PI * x).sqrt();
    for v in &mut j {
        *v *= factor;
    }
    Ok(j)
}

/// `J_{l+1/2}(x)`.
pub fn bessel_half(l: usize, x: f64) -> Result<f64> {
    Ok(bessel_half_seq(l, x)?[l])
}

/// `J_{-1/2}(x) = √(2/(πx)) cos x`; requires `x > 0`.
pub fn bessel_minus_half(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("J_{{-1/2}} needs a positive argument, got {x}")));
    }
    Ok((FRAC_2_PI / x).sqrt() * x.cos())
}

/// `J'_{l+1/2}(x) = (J_{l-1/2}(x) − J_{l+3/2}(x)) / 2`; requires `x > 0`.
pub fn bessel_half_derivative(l: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Bessel derivative needs a positive argument, got {x}")));
    }
    let seq = bessel_half_seq(l + 1, x)?;
    let below = if l == 0 { bessel_minus_half(x)? } else { seq[l - 1] };
    Ok(0.5 * (below - seq[l + 1]))
}

fn spherical_series(lmax: usize, x: f64) -> Vec<f64> {
    let x2 = x * x;
    let mut lead = 1.0; // x^l / (2l+1)!!
    let mut out = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        if l > 0 {
            lead *= x / (2 * l + 1) as f64;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..6 {
            term *= -x2 / (2.0 * k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
        }
        out.push(lead * sum);
    }
    out
}

fn j0_j1(x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = if x < 0.1 {
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0)))
    } else {
        (s / x - c) / x
    };
    (j0, j1)
}

fn spherical_upward(lmax: usize, x: f64) -> Vec<f64> {
    let (j0, j1) = j0_j1(x);
    let mut out = vec![j0];
    if lmax >= 1 {
        out.push(j1);
    }
    for l in 1..lmax {
        let next = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        out.push(next);
    }
    out
}

fn spherical_miller(lmax: usize, x: f64) -> Vec<f64> {
    let top = (lmax as f64).max(x);
    let start = top.ceil() as usize + 40 + 10 * top.cbrt().ceil() as usize;
    // values[l] with the rescale count in force when it was produced
    let mut values = vec![0.0; lmax + 1];
    let mut scale_at = vec![0u32; lmax + 1];
    let mut scale = 0u32;
    let mut above = 0.0;
    let mut current = 1.0e-280;
    for l in (0..start).rev() {
        // j_l = (2l+3)/x j_{l+1} − j_{l+2}
        let next = (2 * l + 3) as f64 / x * current - above;
        above = current;
        current = next;
        if current.abs() > RESCALE_AT {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            scale += 1;
        }
        if l <= lmax {
            values[l] = current;
            scale_at[l] = scale;
        }
    }
    // values[1] may predate a rescale that values[0] saw
    let (j0, j1) = j0_j1(x);
    let f1 = values.get(1).map(|v| rescaled(*v, scale - scale_at[1]));
    let norm = match f1 {
        Some(f1) if j1.abs() > j0.abs() => j1 / f1,
        _ => j0 / values[0],
    };
    values
        .iter()
        .zip(&scale_at)
        .map(|(&v, &s)| rescaled(v * norm, scale - s))
        .collect()
}

fn rescaled(mut v: f64, steps: u32) -> f64 {
    for _ in 0..steps {
        v *= RESCALE_BY;
        if v == 0.0 {
            break;
        }
    }
    v
}

/// `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    Ok(legendre_p_seq(l, x)?[l])
}

/// `P_0(x), …, P_lmax(x)`.
pub fn legendre_p_seq(lmax: usize, x: f64) -> Result<Vec<f64>> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    Ok(p)
}

/// Orthonormal associated Legendre values `P̄_l^m(cos θ)` for `0 ≤ m ≤ l < lmax`,
/// with the Condon–Shortley phase, so that `Y_lm(θ, φ) = P̄_l^m(cos θ) e^{imφ}`.
#[derive(Debug, Clone)]
pub struct NormalizedLegendre {
    lmax: usize,
    values: Vec<f64>,
}

impl NormalizedLegendre {
    pub fn new(lmax: usize, theta: f64) -> Self {
        let (s, x) = theta.sin_cos();
        let mut values = vec![0.0; lmax * (lmax + 1) / 2];
        let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
        if lmax == 0 {
            return Self { lmax, values };
        }
        let mut diag = (1.0 / (4.0 * PI)).sqrt();
        for m in 0..lmax {
            if m > 0 {
                diag *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
            }
            values[idx(m, m)] = diag;
            if m + 1 < lmax {
                values[idx(m + 1, m)] = x * ((2 * m + 3) as f64).sqrt() * diag;
            }
            for l in m + 2..lmax {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let lp = lf - 1.0;
                let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
                values[idx(l, m)] = a * (x * values[idx(l - 1, m)] - values[idx(l - 2, m)] / a_prev);
            }
        }
        Self { lmax, values }
    }

    /// Number of degrees held (`l < lmax`).
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn get(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l < self.lmax);
        self.values[l * (l + 1) / 2 + m]
    }
}

/// Complex spherical harmonic `Y_lm(θ, φ)` with `Y*_lm = (−1)^m Y_{l,−m}`.
pub fn sph_harm(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("polar angle {theta} outside [0, π]")));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::Domain(format!("azimuth {phi} outside [0, 2π)")));
    }
    let m_abs = idx.m.unsigned_abs() as usize;
    let table = NormalizedLegendre::new(idx.l + 1, theta);
    let p = table.get(idx.l, m_abs);
    let y = Complex64::from_polar(p, m_abs as f64 * phi);
    if idx.m < 0 {
        let sign = if m_abs % 2 == 0 { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    } else {
        Ok(y)
    }
}

/// `ln Γ(x)` for `x > 0`, by upward shifting into the Stirling series.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("ln Γ needs a positive finite argument, got {x}")));
    }
    let mut shift = 0.0;
    let mut z = x;
    let mut prod = 1.0;
    while z < 15.0 {
        prod *= z;
        z += 1.0;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
    }
    shift += prod.ln();
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k(2k-1) z^{2k-1})
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    let stirling = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    Ok(stirling - shift)
}
