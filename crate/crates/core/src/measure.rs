//! Isotropic spectral measure of the initial field and the equation constants.
//!
//! The measure is a finite set of atoms plus power-law density segments
//! `A·μ^a` on `[lo, hi]`. Segment integrals are evaluated in the variable
//! `u = μ^(a+1)` (or `u = ln μ` when `a = -1`), in which the density becomes
//! constant and an integrable singularity at the origin disappears.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed `c` and diffusivity `D` of the telegraph equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl DiffusionParams {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        let p = Self { c, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Validation(format!("c must be positive and finite, got {}", self.c)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::Validation(format!("D must be positive and finite, got {}", self.d)));
        }
        if !(self.cutoff().is_finite() && self.cutoff() > 0.0) {
            return Err(Error::Validation("cut-off wave number c/2D is not finite".into()));
        }
        Ok(())
    }

    /// Cut-off wave number `c/(2D)` separating diffusive and wave-like modes.
    pub fn cutoff(&self) -> f64 {
        self.c / (2.0 * self.d)
    }

    /// Damping rate `c²/(2D)` of the transfer function envelope.
    pub fn damping(&self) -> f64 {
        self.c * self.c / (2.0 * self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mu: f64,
    pub mass: f64,
}

/// Density `amplitude · μ^exponent` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub amplitude: f64,
    pub exponent: f64,
}

impl Segment {
    fn is_log(&self) -> bool {
        self.exponent == -1.0
    }

    /// Interval of the integration variable `u` covering `[lo, hi]`.
    pub fn u_range(&self) -> (f64, f64) {
        (self.u_at(self.lo), self.u_at(self.hi))
    }

    pub fn u_at(&self, mu: f64) -> f64 {
        if self.is_log() {
            mu.ln()
        } else {
            mu.powf(self.exponent + 1.0)
        }
    }

    pub fn mu_at(&self, u: f64) -> f64 {
        if self.is_log() {
            u.exp()
        } else {
            u.max(0.0).powf(1.0 / (self.exponent + 1.0))
        }
    }

    /// Constant `w` with `A μ^a dμ = w du`.
    pub fn u_weight(&self) -> f64 {
        if self.is_log() {
            self.amplitude
        } else {
            self.amplitude / (self.exponent + 1.0)
        }
    }

    pub fn mass(&self) -> f64 {
        let (u0, u1) = self.u_range();
        self.u_weight() * (u1 - u0)
    }

    pub fn density(&self, mu: f64) -> f64 {
        self.amplitude * mu.powf(self.exponent)
    }

    fn validate(&self) -> Result<()> {
        let finite = self.lo.is_finite()
            && self.hi.is_finite()
            && self.amplitude.is_finite()
            && self.exponent.is_finite();
        if !finite {
            return Err(Error::Validation(format!("segment {self:?} has non-finite fields")));
        }
        if self.lo < 0.0 {
            return Err(Error::Validation(format!("segment lower end {} is negative", self.lo)));
        }
        if self.hi <= self.lo {
            return Err(Error::Validation(format!(
                "segment upper end {} must exceed lower end {}",
                self.hi, self.lo
            )));
        }
        if self.amplitude <= 0.0 {
            return Err(Error::Validation(format!(
                "segment amplitude {} must be positive",
                self.amplitude
            )));
        }
        if self.lo == 0.0 && self.exponent <= -1.0 {
            return Err(Error::Validation(format!(
                "segment starting at 0 with exponent {} has divergent mass",
                self.exponent
            )));
        }
        if !self.mass().is_finite() {
            return Err(Error::Validation(format!("segment {self:?} has non-finite mass")));
        }
        Ok(())
    }
}

/// Isotropic spectral measure `G` of the initial random field.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    segments: Vec<Segment>,
}

#[derive(Deserialize)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    segments: Vec<Segment>,
}

impl<'de> Deserialize<'de> for SpectralMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(de)?;
        SpectralMeasure::new(raw.atoms, raw.segments).map_err(serde::de::Error::custom)
    }
}

impl SpectralMeasure {
    /// Builds a validated measure. Segments are stored sorted by their lower end.
    pub fn new(atoms: Vec<Atom>, mut segments: Vec<Segment>) -> Result<Self> {
        for a in &atoms {
            if !(a.mu.is_finite() && a.mu > 0.0) {
                return Err(Error::Validation(format!("atom location {} must be positive", a.mu)));
            }
            if !a.mass.is_finite() || a.mass < 0.0 {
                return Err(Error::Validation(format!("atom mass {} must be nonnegative", a.mass)));
            }
            if a.mass == 0.0 {
                return Err(Error::Validation(format!("atom at {} has zero mass", a.mu)));
            }
        }
        for w in atoms.windows(2) {
            if w[1].mu <= w[0].mu {
                return Err(Error::Validation(format!(
                    "atom locations must be strictly increasing ({} then {})",
                    w[0].mu, w[1].mu
                )));
            }
        }
        for s in &segments {
            s.validate()?;
        }
        segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in segments.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::Validation(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        for a in &atoms {
            if let Some(s) = segments.iter().find(|s| a.mu >= s.lo && a.mu <= s.hi) {
                return Err(Error::Validation(format!(
                    "atom at {} lies inside segment [{}, {}]",
                    a.mu, s.lo, s.hi
                )));
            }
        }
        Ok(Self { atoms, segments })
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, Vec::new())
    }

    /// Convenience constructor from `(mu, mass)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::atomic(pairs.iter().map(|&(mu, mass)| Atom { mu, mass }).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.segments.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.segments.is_empty()
    }

    /// `G([0, ∞))`, which equals the variance `B(0)` of the initial field.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let segs: f64 = self.segments.iter().map(Segment::mass).sum();
        atoms + segs
    }

    /// Largest `δ` with `G([0, δ)) = 0`.
    pub fn support_lower_bound(&self) -> Result<f64> {
        self.atoms
            .iter()
            .map(|a| a.mu)
            .chain(self.segments.iter().map(|s| s.lo))
            .min_by(f64::total_cmp)
            .ok_or(Error::EmptyMeasure)
    }

    /// Right end of the support.
    pub fn support_upper_bound(&self) -> Result<f64> {
        self.atoms
            .iter()
            .map(|a| a.mu)
            .chain(self.segments.iter().map(|s| s.hi))
            .max_by(f64::total_cmp)
            .ok_or(Error::EmptyMeasure)
    }

    /// Total mass on the closed interval `[0, x]`.
    pub fn mass_up_to(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.mu <= x).map(|a| a.mass).sum();
        let segs: f64 = self
            .segments
            .iter()
            .filter(|s| s.lo < x)
            .map(|s| {
                let clipped = Segment { hi: s.hi.min(x), ..*s };
                clipped.mass()
            })
            .sum();
        atoms + segs
    }

    /// Replaces every segment by `n_quad` Gauss–Legendre atoms in the variable
    /// `u`; the atom masses sum to the segment mass exactly.
    pub fn atomized(&self, n_quad: usize) -> Result<Self> {
        if self.segments.is_empty() {
            return Ok(self.clone());
        }
        if n_quad == 0 {
            return Err(Error::Validation("atomization needs at least one node".into()));
        }
        let rule = crate::quadrature::gauss_legendre(n_quad);
        let mut atoms = self.atoms.clone();
        for s in &self.segments {
            let (u0, u1) = s.u_range();
            let half = 0.5 * (u1 - u0);
            let mid = 0.5 * (u1 + u0);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                atoms.push(Atom {
                    mu: s.mu_at(mid + half * x),
                    mass: s.u_weight() * half * w,
                });
            }
        }
        atoms.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        atoms.dedup_by(|b, a| {
            if a.mu == b.mu {
                a.mass += b.mass;
                true
            } else {
                false
            }
        });
        Self::atomic(atoms)
    }
}

/// Contents of a configuration file: equation constants plus measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub params: DiffusionParams,
    pub measure: SpectralMeasure,
}

#[derive(Deserialize)]
struct RawConfig {
    params: DiffusionParams,
    measure: RawMeasure,
}

impl ModelConfig {
    /// Parses and validates configuration text. Syntax and schema problems are
    /// reported as [`Error::Parse`], invariant violations as [`Error::Validation`].
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        raw.params.validate()?;
        let measure = SpectralMeasure::new(raw.measure.atoms, raw.measure.segments)?;
        Ok(Self { params: raw.params, measure })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Parses the measure part of a configuration file.
pub fn load_measure(config_text: &str) -> Result<SpectralMeasure> {
    ModelConfig::parse(config_text).map(|c| c.measure)
}
