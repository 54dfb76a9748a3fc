//! One-dimensional hyperbolic diffusion `q_t + q_tt = q_xx` on `[−L, L]` with
//! Neumann ends, solved as an even cosine series, and the Shannon entropy
//! `S(t) = ∫ q log(1/q) dx` of its profiles.
//!
//! Mode `n` has `k_n = nπ/L` and time factor `T'' + T' + k²T = 0`:
//!
//! * `k < ½`: `a e^{−α⁺t} + b e^{−α⁻t}`, `α^± = ½(1 ± √(1 − 4k²))`
//! * `k = ½`: `(a + b t) e^{−t/2}`
//! * `k > ½`: `e^{−t/2}(a cos ωt + b sin ωt)`, `ω = √(k² − ¼)`

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default trapezoid resolution for entropy and mass integrals.
pub const DEFAULT_INTERVALS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModeKind {
    /// Non-oscillating, `k_n < ½`.
    Dissipative,
    /// Critically damped, `k_n = ½`.
    Critical,
    /// Damped standing wave, `k_n > ½`.
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub n: usize,
    pub k: f64,
    pub kind: ModeKind,
    /// Coefficients of the two independent time factors, in the order listed
    /// in the module documentation.
    pub a: f64,
    pub b: f64,
}

impl Mode {
    /// Mode `n` with amplitude `c` and zero initial velocity.
    pub fn at_rest(n: usize, half_length: f64, c: f64) -> Self {
        let k = n as f64 * PI / half_length;
        let disc = 1.0 - 4.0 * k * k;
        if disc > 0.0 {
            let root = disc.sqrt();
            let (plus, minus) = (0.5 * (1.0 + root), 0.5 * (1.0 - root));
            // a + b = c, α⁺a + α⁻b = 0
            let a = -minus * c / root;
            let b = plus * c / root;
            Mode { n, k, kind: ModeKind::Dissipative, a, b }
        } else if disc == 0.0 {
            Mode { n, k, kind: ModeKind::Critical, a: c, b: 0.5 * c }
        } else {
            let omega = (-disc).sqrt() / 2.0;
            Mode { n, k, kind: ModeKind::Wave, a: c, b: c / (2.0 * omega) }
        }
    }

    /// Decay exponents `(α⁺, α⁻)` of a dissipative mode.
    pub fn exponents(&self) -> Option<(f64, f64)> {
        match self.kind {
            ModeKind::Dissipative => {
                let root = (1.0 - 4.0 * self.k * self.k).sqrt();
                Some((0.5 * (1.0 + root), 0.5 * (1.0 - root)))
            }
            _ => None,
        }
    }

    /// Angular frequency `ω = √(k² − ¼)` of a wave mode.
    pub fn omega(&self) -> Option<f64> {
        match self.kind {
            ModeKind::Wave => Some((self.k * self.k - 0.25).sqrt()),
            _ => None,
        }
    }

    pub fn time_factor(&self, t: f64) -> f64 {
        match self.kind {
            ModeKind::Dissipative => {
                let (plus, minus) = self.exponents().expect("dissipative mode");
                self.a * (-plus * t).exp() + self.b * (-minus * t).exp()
            }
            ModeKind::Critical => (self.a + self.b * t) * (-0.5 * t).exp(),
            ModeKind::Wave => {
                let (s, c) = (self.omega().expect("wave mode") * t).sin_cos();
                (-0.5 * t).exp() * (self.a * c + self.b * s)
            }
        }
    }
}

/// `q(x,t) = a₀ + Σ_n T_n(t) cos(k_n x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeDecomposition {
    pub half_length: f64,
    pub a0: f64,
    pub modes: Vec<Mode>,
}

impl ModeDecomposition {
    pub fn new(half_length: f64, a0: f64, modes: Vec<Mode>) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Validation(format!("half-length must be positive, got {half_length}")));
        }
        Ok(Self { half_length, a0, modes })
    }

    /// Profile at rest with cosine coefficients `coeffs[n−1]` for `n ≥ 1`.
    pub fn from_cosine_coefficients(half_length: f64, a0: f64, coeffs: &[f64]) -> Result<Self> {
        let modes = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| Mode::at_rest(i + 1, half_length, c))
            .collect();
        Self::new(half_length, a0, modes)
    }

    /// Unit-mass point source at the origin: `a₀ = 1/2L`, every `c_n = 1/L`.
    pub fn point_source(half_length: f64, n_modes: usize) -> Result<Self> {
        Self::from_cosine_coefficients(half_length, 0.5 / half_length, &vec![1.0 / half_length; n_modes])
    }

    /// Unit-mass rectangle of width `w` centred at 0:
    /// `c_n = 2 sin(k_n w/2)/(L k_n w)`.
    pub fn rectangle(half_length: f64, width: f64, n_modes: usize) -> Result<Self> {
        if !(width > 0.0 && width <= 2.0 * half_length) {
            return Err(Error::Validation(format!("rectangle width {width} must lie in (0, 2L]")));
        }
        let coeffs: Vec<f64> = (1..=n_modes)
            .map(|n| {
                let k = n as f64 * PI / half_length;
                2.0 * (0.5 * k * width).sin() / (half_length * k * width)
            })
            .collect();
        Self::from_cosine_coefficients(half_length, 0.5 / half_length, &coeffs)
    }

    /// Number of modes with `k_n < ½`, which is `⌈L/2π⌉ − 1` (equal to
    /// `⌊L/2π⌋` unless `L/2π` is an integer, when that mode is critical).
    pub fn dissipative_count(&self) -> usize {
        self.modes.iter().filter(|m| m.kind == ModeKind::Dissipative).count()
    }

    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.a0 + self.modes.iter().map(|m| m.time_factor(t) * (m.k * x).cos()).sum::<f64>()
    }

    /// `q_x`, which vanishes at `x = ±L` term by term.
    pub fn derivative_x(&self, x: f64, t: f64) -> f64 {
        -self.modes.iter().map(|m| m.time_factor(t) * m.k * (m.k * x).sin()).sum::<f64>()
    }

    /// Trapezoid nodes `x_j = −L + 2Lj/n`, `j = 0..=n`.
    pub fn nodes(&self, n_intervals: usize) -> Vec<f64> {
        let h = 2.0 * self.half_length / n_intervals as f64;
        (0..=n_intervals).map(|j| -self.half_length + j as f64 * h).collect()
    }

    pub fn profile(&self, t: f64, n_intervals: usize) -> Vec<(f64, f64)> {
        self.nodes(n_intervals).into_iter().map(|x| (x, self.evaluate(x, t))).collect()
    }

    /// `∫ q dx` by the composite trapezoid.
    pub fn mass(&self, t: f64, n_intervals: usize) -> f64 {
        let h = 2.0 * self.half_length / n_intervals as f64;
        trapezoid(&self.profile(t, n_intervals).iter().map(|p| p.1).collect::<Vec<_>>(), h)
    }
}

fn trapezoid(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 0.0;
    }
    h * (0.5 * (ys[0] + ys[n - 1]) + ys[1..n - 1].iter().sum::<f64>())
}

/// Recovers an even profile at rest from samples on `x_j = −L + 2Lj/n`, `j = 0..=n`.
pub fn decompose_initial(u0: &[f64], half_length: f64, n_modes: usize, assume_zero_velocity: bool) -> Result<ModeDecomposition> {
    if !assume_zero_velocity {
        return Err(Error::Validation("only profiles starting at rest are supported".into()));
    }
    if n_modes == 0 {
        return Err(Error::Validation("at least one mode is required".into()));
    }
    if u0.len() < 3 {
        return Err(Error::Validation("need at least three samples".into()));
    }
    let scale = u0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let odd = (0..u0.len()).map(|j| (u0[j] - u0[u0.len() - 1 - j]).abs()).fold(0.0, f64::max);
    if odd > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Validation(format!("profile has an odd component of size {odd:e}")));
    }
    let n = u0.len() - 1;
    let h = 2.0 * half_length / n as f64;
    let xs: Vec<f64> = (0..=n).map(|j| -half_length + j as f64 * h).collect();
    let a0 = trapezoid(u0, h) / (2.0 * half_length);
    let coeffs: Vec<f64> = (1..=n_modes)
        .map(|k| {
            let kk = k as f64 * PI / half_length;
            let ys: Vec<f64> = u0.iter().zip(&xs).map(|(u, x)| u * (kk * x).cos()).collect();
            trapezoid(&ys, h) / half_length
        })
        .collect();
    ModeDecomposition::from_cosine_coefficients(half_length, a0, &coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    /// `None` where the profile is not strictly positive at some node.
    pub entropy: Vec<Option<f64>>,
    pub n_intervals: usize,
}

/// `S(t) = ∫ q log(1/q) dx` by the composite trapezoid.
pub fn entropy_at(md: &ModeDecomposition, t: f64, n_intervals: usize) -> Option<f64> {
    let h = 2.0 * md.half_length / n_intervals as f64;
    let mut ys = Vec::with_capacity(n_intervals + 1);
    for x in md.nodes(n_intervals) {
        let q = md.evaluate(x, t);
        if !(q > 0.0) {
            return None;
        }
        ys.push(-q * q.ln());
    }
    Some(trapezoid(&ys, h))
}

pub fn entropy_trace(md: &ModeDecomposition, times: &[f64], n_intervals: usize) -> Result<EntropyTrace> {
    if n_intervals < 2 {
        return Err(Error::Validation("trapezoid needs at least two intervals".into()));
    }
    let entropy = times.iter().map(|&t| entropy_at(md, t, n_intervals)).collect();
    Ok(EntropyTrace { times: times.to_vec(), entropy, n_intervals })
}

/// Position of the right-moving spike: the largest `q` on nodes with `x ≥ t/2`,
/// which excludes the central hump.
pub fn front_position(md: &ModeDecomposition, t: f64, n_intervals: usize) -> f64 {
    md.profile(t, n_intervals)
        .into_iter()
        .filter(|(x, _)| *x >= 0.5 * t)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, _)| x)
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    StandingWave,
    PointSource,
    Rectangle,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standing_wave" => Ok(Self::StandingWave),
            "point_source" => Ok(Self::PointSource),
            "rectangle" => Ok(Self::Rectangle),
            other => Err(Error::Validation(format!(
                "unknown experiment '{other}' (expected standing_wave, point_source or rectangle)"
            ))),
        }
    }
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::StandingWave => "standing_wave",
            Self::PointSource => "point_source",
            Self::Rectangle => "rectangle",
        }
    }

    /// Series length used unless overridden.
    pub fn default_modes(&self) -> usize {
        match self {
            Self::StandingWave => 2,
            Self::PointSource => 100,
            Self::Rectangle => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOptions {
    pub half_length: f64,
    /// Series length; `None` picks the experiment's default.
    pub n_modes: Option<usize>,
    /// Rectangle width.
    pub width: f64,
    /// Mode index of the standing wave.
    pub wave_mode: usize,
    pub times: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub n_intervals: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            half_length: 3.0 * PI,
            n_modes: None,
            width: 2.0,
            wave_mode: 2,
            times: (0..=200).map(|i| i as f64 * 0.1).collect(),
            snapshot_times: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            n_intervals: DEFAULT_INTERVALS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: Experiment,
    pub decomposition: ModeDecomposition,
    pub trace: EntropyTrace,
    /// `(t, [(x, q)])` at each snapshot time.
    pub snapshots: Vec<(f64, Vec<(f64, f64)>)>,
    /// `(t, x_front)` for the point source; empty otherwise.
    pub fronts: Vec<(f64, f64)>,
}

/// Builds the initial series for a named experiment.
///
/// The standing wave is `q = (1/2L)[1 + e^{−t/2} cos(ωt) cos(kx)]`, a single
/// wave mode without the sine companion.
pub fn experiment_decomposition(experiment: Experiment, opts: &ExperimentOptions) -> Result<ModeDecomposition> {
    let l = opts.half_length;
    let n_modes = opts.n_modes.unwrap_or(experiment.default_modes());
    match experiment {
        Experiment::StandingWave => {
            let n = opts.wave_mode;
            let k = n as f64 * PI / l;
            if n == 0 || k <= 0.5 {
                return Err(Error::Validation(format!("mode {n} is not a travelling wave for L = {l}")));
            }
            let mode = Mode { n, k, kind: ModeKind::Wave, a: 0.5 / l, b: 0.0 };
            ModeDecomposition::new(l, 0.5 / l, vec![mode])
        }
        Experiment::PointSource => ModeDecomposition::point_source(l, n_modes),
        Experiment::Rectangle => ModeDecomposition::rectangle(l, opts.width, n_modes),
    }
}

pub fn run_experiment(experiment: Experiment, opts: &ExperimentOptions) -> Result<ExperimentResult> {
    let md = experiment_decomposition(experiment, opts)?;
    let trace = entropy_trace(&md, &opts.times, opts.n_intervals)?;
    let snapshots = opts.snapshot_times.iter().map(|&t| (t, md.profile(t, opts.n_intervals))).collect();
    let fronts = if experiment == Experiment::PointSource {
        opts.times
            .iter()
            .filter(|&&t| t > 0.0 && t < md.half_length)
            .map(|&t| (t, front_position(&md, t, opts.n_intervals)))
            .collect()
    } else {
        Vec::new()
    };
    Ok(ExperimentResult { experiment, decomposition: md, trace, snapshots, fronts })
}
