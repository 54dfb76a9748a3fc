//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands and
//! Gauss–Legendre rules.
//!
//! Integrating all components of a vector at once lets spectrum computations
//! share one Bessel recurrence per node across every degree `l`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-300, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Integral of `|f_k|`, used to scale relative tolerances under cancellation.
    pub abs_values: Vec<f64>,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    abs: Vec<f64>,
}

fn kronrod_panel<F>(f: &F, n: usize, a: f64, b: f64, buf: &mut [f64]) -> Panel
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; n];
    let mut gauss = vec![0.0; n];
    let mut abs = vec![0.0; n];
    for (j, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
        let gauss_weight = if j % 2 == 1 { Some(WG[j / 2]) } else { None };
        let points: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in points {
            f(center + sign * half * x, buf);
            for k in 0..n {
                let v = buf[k];
                kron[k] += wk * v;
                abs[k] += wk * v.abs();
                if let Some(wg) = gauss_weight {
                    gauss[k] += wg * v;
                }
            }
        }
    }
    let mut error = vec![0.0; n];
    for k in 0..n {
        kron[k] *= half;
        gauss[k] *= half;
        abs[k] *= half.abs();
        error[k] = (kron[k] - gauss[k]).abs();
    }
    Panel { a, b, value: kron, error, abs }
}

/// Integrates the `n`-component integrand `f` over `[a, b]`, splitting first
/// at each of `breaks` lying strictly inside the interval.
///
/// Component `k` is accepted once its error estimate is below
/// `max(rel_tol · ∫|f_k|, abs_tol)`.
pub fn integrate_vec<F>(f: F, n: usize, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64, &mut [f64]),
{
    let mut buf = vec![0.0; n];
    if n == 0 || a == b {
        return Ok(QuadResult { values: vec![0.0; n], errors: vec![0.0; n], abs_values: vec![0.0; n] });
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);
    let mut panels: Vec<Panel> = cuts.windows(2).map(|w| kronrod_panel(&f, n, w[0], w[1], &mut buf)).collect();

    let (mut values, mut errors, mut abs_values) = totals(&panels, n);
    loop {
        // component furthest from its tolerance
        let mut worst = None;
        let mut worst_ratio = 1.0;
        for k in 0..n {
            let tol = (opts.rel_tol * abs_values[k]).max(opts.abs_tol);
            let ratio = errors[k] / tol;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = Some(k);
            }
        }
        let Some(k) = worst else {
            let (values, errors, abs_values) = totals(&panels, n);
            return Ok(QuadResult { values, errors, abs_values });
        };
        // refresh the running sums of this component before refining
        errors[k] = panels.iter().map(|p| p.error[k]).sum();
        abs_values[k] = panels.iter().map(|p| p.abs[k]).sum();
        if errors[k] <= (opts.rel_tol * abs_values[k]).max(opts.abs_tol) {
            continue;
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Accuracy {
                message: format!("adaptive quadrature did not converge on [{a}, {b}] (component {k})"),
                estimate: values[k],
                error: errors[k],
            });
        }
        let idx = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error[k].total_cmp(&y.1.error[k]))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Accuracy {
                message: format!("quadrature panel collapsed near {mid}"),
                estimate: values[k],
                error: errors[k],
            });
        }
        let left = kronrod_panel(&f, n, p.a, mid, &mut buf);
        let right = kronrod_panel(&f, n, mid, p.b, &mut buf);
        for j in 0..n {
            values[j] += left.value[j] + right.value[j] - p.value[j];
            errors[j] = (errors[j] + left.error[j] + right.error[j] - p.error[j]).max(0.0);
            abs_values[j] += left.abs[j] + right.abs[j] - p.abs[j];
        }
        panels.push(left);
        panels.push(right);
    }
}

fn totals(panels: &[Panel], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut sorted: Vec<&Panel> = panels.iter().collect();
    // fixed summation order keeps results independent of refinement history
    sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in sorted {
        for k in 0..n {
            v[k] += p.value[k];
            e[k] += p.error[k];
            s[k] += p.abs[k];
        }
    }
    (v, e, s)
}

/// Scalar convenience wrapper around [`integrate_vec`]; returns `(value, error)`.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, breaks, opts)?;
    Ok((r.values[0], r.errors[0]))
}

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, refined by Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
