//! Gaussian realizations of the truncated Laplace series
//! `T_{H,L}(θ,φ,t) = Σ_{l<L} Σ_m Y_lm(θ,φ) a_lm(t)` for atomic measures.
//!
//! `a_lm(t) = π√2 Σ_i J_{l+1/2}(μ_i)/√μ_i · H̃(μ_i,t) σ_i ξ_lmi` with `ξ` real
//! standard normal for `m = 0` and `(z₁ + i z₂)/√2` for `m > 0`; negative
//! orders follow from `a_{l,−m} = (−1)^m conj(a_lm)`, which makes the field real.

use std::f64::consts::PI;
use std::io::{self, Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::transfer;
use crate::measure::{DiffusionParams, SpectralMeasure};
use crate::special_fn::{bessel_half, bessel_half_seq, NormalizedLegendre};
use crate::spectrum::spectrum_range;

/// Gauss–Legendre nodes per segment when a continuous measure is atomized.
pub const DEFAULT_QUAD_NODES: usize = 64;

/// Magic bytes opening a binary raster file.
pub const FIELD_MAGIC: &[u8; 8] = b"HYPDFLD1";

/// Independent standard normal streams keyed by `(seed, l, m, i)`.
mod rng {
    use super::*;

    const L_BITS: u32 = 14;
    const M_BITS: u32 = 14;
    const I_BITS: u32 = 64 - L_BITS - M_BITS;

    pub(super) fn stream(seed: u64, l: usize, m: usize, i: usize) -> ChaCha20Rng {
        debug_assert!(l < 1 << L_BITS && m < 1 << M_BITS && (i as u64) < 1u64 << I_BITS);
        let key = ((l as u64) << (M_BITS + I_BITS)) | ((m as u64) << I_BITS) | i as u64;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(key);
        rng
    }

    pub(super) fn max_atoms() -> usize {
        if I_BITS >= usize::BITS {
            usize::MAX
        } else {
            1usize << I_BITS
        }
    }
}

/// Simulated `a_lm(t)` for `l < L`, `0 ≤ m ≤ l`, at each requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    lmax: usize,
    times: Vec<f64>,
    seed: u64,
    /// `coeffs[k][l(l+1)/2 + m]` is `a_lm(times[k])`.
    coeffs: Vec<Vec<Complex64>>,
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl CoefficientSet {
    /// Truncation degree `L` (degrees `0..L` are held).
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `a_lm(times[k])` for any `|m| ≤ l`.
    pub fn get(&self, k: usize, l: usize, m: i64) -> Complex64 {
        let ma = m.unsigned_abs() as usize;
        let a = self.coeffs[k][tri(l, ma)];
        if m >= 0 {
            a
        } else if ma % 2 == 0 {
            a.conj()
        } else {
            -a.conj()
        }
    }

    /// `Σ_m |a_lm(times[k])|²` over `m = −l..=l`.
    pub fn degree_power(&self, k: usize, l: usize) -> f64 {
        let row = &self.coeffs[k][tri(l, 0)..tri(l, 0) + l + 1];
        row[0].norm_sqr() + 2.0 * row[1..].iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// Builds a set from explicit nonnegative-order coefficients, one vector
    /// per time, each of length `L(L+1)/2`.
    pub fn from_parts(lmax: usize, times: Vec<f64>, seed: u64, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if coeffs.len() != times.len() || coeffs.iter().any(|c| c.len() != tri(lmax, 0)) {
            return Err(Error::Validation("coefficient array does not match L and times".into()));
        }
        for c in &coeffs {
            for l in 0..lmax {
                if c[tri(l, 0)].im != 0.0 {
                    return Err(Error::Validation(format!("a_{l}0 must be real for a real field")));
                }
            }
        }
        Ok(Self { lmax, times, seed, coeffs })
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Validation("at least one time is required".into()));
    }
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
        }
    }
    Ok(())
}

/// Replaces segments by Gauss–Legendre atoms; atomic measures pass through.
pub fn simulation_measure(m: &SpectralMeasure, n_quad: usize) -> Result<SpectralMeasure> {
    m.atomized(n_quad)
}

/// Draws `a_lm(t)` for `l < L` at every time in `times`, reusing the same
/// normals for all times so that temporal correlation is exact.
pub fn simulate_coefficients(
    lmax: usize,
    times: &[f64],
    m: &SpectralMeasure,
    p: &DiffusionParams,
    seed: u64,
) -> Result<CoefficientSet> {
    simulate_coefficients_with(lmax, times, m, p, seed, DEFAULT_QUAD_NODES)
}

pub fn simulate_coefficients_with(
    lmax: usize,
    times: &[f64],
    m: &SpectralMeasure,
    p: &DiffusionParams,
    seed: u64,
    n_quad: usize,
) -> Result<CoefficientSet> {
    if lmax == 0 {
        return Err(Error::Validation("truncation degree L must be at least 1".into()));
    }
    if lmax > 1 << 14 {
        return Err(Error::Domain(format!("truncation degree {lmax} is too large")));
    }
    check_times(times)?;
    if m.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let atoms = simulation_measure(m, n_quad)?;
    let atoms = atoms.atoms();
    if atoms.len() > rng::max_atoms() {
        return Err(Error::Domain("too many atoms for the random stream layout".into()));
    }
    // weights[i][l] = π√2 J_{l+1/2}(μ_i)/√μ_i · σ_i
    let weights: Vec<Vec<f64>> = atoms
        .iter()
        .map(|a| {
            let j = bessel_half_seq(lmax - 1, a.mu)?;
            let scale = PI * 2f64.sqrt() * a.mass.sqrt() / a.mu.sqrt();
            Ok(j.into_iter().map(|v| v * scale).collect())
        })
        .collect::<Result<_>>()?;
    let kernels: Vec<Vec<f64>> = times.iter().map(|&t| atoms.iter().map(|a| transfer(a.mu, t, p)).collect()).collect();

    let per_degree: Vec<Vec<Vec<Complex64>>> = (0..lmax)
        .into_par_iter()
        .map(|l| {
            let mut out = vec![Vec::with_capacity(l + 1); times.len()];
            for mm in 0..=l {
                let mut acc = vec![Complex64::new(0.0, 0.0); times.len()];
                for (i, w) in weights.iter().enumerate() {
                    let mut rng = rng::stream(seed, l, mm, i);
                    let z = if mm == 0 {
                        Complex64::new(rng.sample(StandardNormal), 0.0)
                    } else {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                    };
                    let term = z * w[l];
                    for (k, a) in acc.iter_mut().enumerate() {
                        *a += term * kernels[k][i];
                    }
                }
                for (k, a) in acc.into_iter().enumerate() {
                    out[k].push(a);
                }
            }
            out
        })
        .collect();

    let mut coeffs = vec![Vec::with_capacity(tri(lmax, 0)); times.len()];
    for degree in per_degree {
        for (k, row) in degree.into_iter().enumerate() {
            coeffs[k].extend(row);
        }
    }
    Ok(CoefficientSet { lmax, times: times.to_vec(), seed, coeffs })
}

/// Independent realizations with seeds `base_seed, base_seed + 1, …`.
pub fn simulate_ensemble(
    runs: usize,
    lmax: usize,
    times: &[f64],
    m: &SpectralMeasure,
    p: &DiffusionParams,
    base_seed: u64,
) -> Result<Vec<CoefficientSet>> {
    (0..runs)
        .into_par_iter()
        .map(|r| simulate_coefficients(lmax, times, m, p, base_seed.wrapping_add(r as u64)))
        .collect()
}

/// Field values on the grid `θ_j = (j+½)π/n_θ`, `φ_k = 2πk/n_φ`, row-major in `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub values: Vec<f64>,
    pub time: f64,
    pub seed: u64,
    pub lmax: usize,
    /// Largest imaginary part met during synthesis, before it was discarded.
    pub max_imag_residue: f64,
}

impl FieldGrid {
    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * PI / self.n_theta as f64
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_phi + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Evaluates the truncated series for `times[time_index]` on an equiangular grid.
pub fn synthesize(cs: &CoefficientSet, time_index: usize, n_theta: usize, n_phi: usize) -> Result<FieldGrid> {
    if n_theta < 2 || n_phi < 4 {
        return Err(Error::Domain(format!("grid {n_theta}x{n_phi} is smaller than 2x4")));
    }
    if time_index >= cs.times.len() {
        return Err(Error::Domain(format!("time index {time_index} out of range")));
    }
    let lmax = cs.lmax;
    let phases: Vec<Vec<Complex64>> = (0..n_phi)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            (0..lmax).map(|m| Complex64::from_polar(1.0, m as f64 * phi)).collect()
        })
        .collect();
    let rows: Vec<(Vec<f64>, f64)> = (0..n_theta)
        .into_par_iter()
        .map(|j| {
            let theta = (j as f64 + 0.5) * PI / n_theta as f64;
            let plm = NormalizedLegendre::new(lmax, theta);
            // F_m(θ) = Σ_l P̄_l^m(cos θ) a_lm for m ≥ 0 and its negative-order partner
            let mut pos = vec![Complex64::new(0.0, 0.0); lmax];
            let mut neg = vec![Complex64::new(0.0, 0.0); lmax];
            for l in 0..lmax {
                for m in 0..=l {
                    let pv = plm.get(l, m);
                    pos[m] += cs.get(time_index, l, m as i64) * pv;
                    if m > 0 {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        neg[m] += cs.get(time_index, l, -(m as i64)) * (sign * pv);
                    }
                }
            }
            let mut row = Vec::with_capacity(n_phi);
            let mut residue: f64 = 0.0;
            for ph in &phases {
                let mut v = pos[0];
                for m in 1..lmax {
                    v += pos[m] * ph[m] + neg[m] * ph[m].conj();
                }
                residue = residue.max(v.im.abs());
                row.push(v.re);
            }
            (row, residue)
        })
        .collect();
    let mut values = Vec::with_capacity(n_theta * n_phi);
    let mut residue: f64 = 0.0;
    for (row, r) in rows {
        values.extend(row);
        residue = residue.max(r);
    }
    let grid = FieldGrid {
        n_theta,
        n_phi,
        values,
        time: cs.times[time_index],
        seed: cs.seed,
        lmax,
        max_imag_residue: residue,
    };
    let scale = grid.max_abs();
    if residue > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Accuracy {
            message: "synthesized field is not real".into(),
            estimate: scale,
            error: residue,
        });
    }
    Ok(grid)
}

/// `J_{l+1/2}(rμ)/√(rμ)`, the radial factor of degree `l` on a sphere of radius `r`.
pub fn radial_coefficient(l: usize, mu: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("wave number must be positive, got {mu}")));
    }
    let x = r * mu;
    Ok(bessel_half(l, x)? / x.sqrt())
}

/// Ensemble estimate of `C_l(t,t)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalSpectrum {
    pub value: f64,
    pub std_error: f64,
}

/// `Ĉ_l = (1/(N(2l+1))) Σ_runs Σ_m |a_lm|²`.
pub fn empirical_spectrum(ensemble: &[CoefficientSet], l: usize, time_index: usize) -> Result<EmpiricalSpectrum> {
    if ensemble.len() < 2 {
        return Err(Error::Validation("empirical spectrum needs at least two realizations".into()));
    }
    let per_run: Vec<f64> = ensemble
        .iter()
        .map(|cs| {
            if l >= cs.lmax || time_index >= cs.times.len() {
                return Err(Error::Domain(format!("degree {l} or time index {time_index} not simulated")));
            }
            Ok(cs.degree_power(time_index, l) / (2 * l + 1) as f64)
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(&per_run))
}

fn mean_and_se(xs: &[f64]) -> EmpiricalSpectrum {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    EmpiricalSpectrum { value: mean, std_error: (var / n).sqrt() }
}

/// Monte Carlo estimate of `‖T_{H,L_outer} − T_{H,L_inner}‖` in `L₂(Ω × S²)`
/// with the sphere normalized to unit area weight `1/4π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationError {
    pub estimate: f64,
    pub std_error: f64,
}

/// Uses Parseval on the sphere: the squared norm of the difference field is
/// `Σ_{L_inner ≤ l < L_outer} Σ_m |a_lm|²`.
pub fn truncation_error_mc(
    l_inner: usize,
    l_outer: usize,
    ensemble: &[CoefficientSet],
    time_index: usize,
) -> Result<TruncationError> {
    if l_inner > l_outer {
        return Err(Error::Domain(format!("inner degree {l_inner} exceeds outer degree {l_outer}")));
    }
    if ensemble.len() < 2 {
        return Err(Error::Validation("truncation error needs at least two realizations".into()));
    }
    let per_run: Vec<f64> = ensemble
        .iter()
        .map(|cs| {
            if l_outer > cs.lmax || time_index >= cs.times.len() {
                return Err(Error::Domain("realization truncated below the outer degree".into()));
            }
            Ok((l_inner..l_outer).map(|l| cs.degree_power(time_index, l)).sum::<f64>() / (4.0 * PI))
        })
        .collect::<Result<_>>()?;
    let sq = mean_and_se(&per_run);
    if sq.value == 0.0 {
        return Ok(TruncationError { estimate: 0.0, std_error: 0.0 });
    }
    let estimate = sq.value.sqrt();
    Ok(TruncationError { estimate, std_error: sq.std_error / (2.0 * estimate) })
}

/// `(1/2√π)(Σ_{L_inner ≤ l < L_outer} (2l+1) C_l(t,t))^{1/2}`.
pub fn truncation_error_exact(
    l_inner: usize,
    l_outer: usize,
    t: f64,
    m: &SpectralMeasure,
    p: &DiffusionParams,
) -> Result<f64> {
    let c = spectrum_range(l_inner, l_outer, t, t, m, p)?;
    let s: f64 = c.iter().enumerate().map(|(k, v)| (2 * (l_inner + k) + 1) as f64 * v).sum();
    Ok(s.sqrt() / (2.0 * PI.sqrt()))
}

/// Natural-log Shannon entropy of an equal-width histogram over `[min, max]`.
pub fn histogram_entropy(values: &[f64], n_bins: usize) -> Result<f64> {
    if n_bins < 2 {
        return Err(Error::Domain("histogram needs at least two bins".into()));
    }
    if values.is_empty() {
        return Err(Error::Domain("histogram needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("histogram values must be finite".into()));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; n_bins];
    let width = (hi - lo) / n_bins as f64;
    for v in values {
        let b = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum())
}

/// CSV with header `theta,phi,value`.
pub fn write_field_csv<W: Write>(grid: &FieldGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "theta,phi,value")?;
    for j in 0..grid.n_theta {
        let theta = grid.theta(j);
        for k in 0..grid.n_phi {
            writeln!(w, "{},{},{}", theta, grid.phi(k), grid.get(j, k))?;
        }
    }
    Ok(())
}

/// 32-byte header (magic, `n_θ` and `n_φ` as little-endian u64, time as
/// little-endian f64) followed by row-major little-endian f64 values.
pub fn write_field_binary<W: Write>(grid: &FieldGrid, mut w: W) -> io::Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(grid.n_theta as u64).to_le_bytes())?;
    w.write_all(&(grid.n_phi as u64).to_le_bytes())?;
    w.write_all(&grid.time.to_le_bytes())?;
    for v in &grid.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a raster written by [`write_field_binary`]: `(n_theta, n_phi, time, values)`.
pub fn read_field_binary<R: Read>(mut r: R) -> io::Result<(usize, usize, f64, Vec<f64>)> {
    let mut header = [0u8; 32];
    r.read_exact(&mut header)?;
    if &header[..8] != FIELD_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a field raster"));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&header[i..i + 8]).expect("slice of length 8");
    let n_theta = u64::from_le_bytes(word(8)) as usize;
    let n_phi = u64::from_le_bytes(word(16)) as usize;
    let time = f64::from_le_bytes(word(24));
    let mut values = Vec::with_capacity(n_theta * n_phi);
    let mut buf = [0u8; 8];
    for _ in 0..n_theta * n_phi {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok((n_theta, n_phi, time, values))
}

/// CSV with header `l,m,re,im` for `times[time_index]`, all `|m| ≤ l`.
pub fn write_coefficients_csv<W: Write>(cs: &CoefficientSet, time_index: usize, mut w: W) -> io::Result<()> {
    writeln!(w, "l,m,re,im")?;
    for l in 0..cs.lmax {
        for m in -(l as i64)..=(l as i64) {
            let a = cs.get(time_index, l, m);
            writeln!(w, "{l},{m},{},{}", a.re, a.im)?;
        }
    }
    Ok(())
}
