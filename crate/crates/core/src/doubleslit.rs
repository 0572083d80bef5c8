//! Analytic double-slit model.
//!
//! Each slit is a point source of the free stationary equation at energy
//! `E = κ²`, an outgoing cylindrical wave `e^{iκr}/√r`. Slit 1 sits at
//! `(0, +d/2)`, slit 2 at `(0, -d/2)`, and the screen is the line `(L, x)`
//! with `x ∈ [-W, W]` split into equal bins evaluated at their midpoints.
//!
//! The individual basis `{ψ₁, ψ₂}` gives the incoherent (particle) pattern
//! `|α₁|²|ψ₁|² + |α₂|²|ψ₂|²`; the superposition basis `α₁ψ₁ + α₂ψ₂` of the
//! same degenerate eigenspace gives the coherent (wave) pattern. Partial
//! visibility is the convex mixture of the two normalized patterns.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::eigensolver::unit_uniform;
use crate::grid::{Grid, ScalarField};
use crate::{Error, Result};

/// Tolerance on `|α₁|² + |α₂|² = 1`.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-10;

pub const MIN_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slit {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VisibilityMode {
    /// One slit visible per event: particle pattern.
    Individual,
    /// Both slits visible: wave pattern.
    Full,
    /// Mixture with weight `eta` on the wave pattern.
    Partial { eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitConfig {
    pub separation: f64,
    pub screen_distance: f64,
    pub wavenumber: f64,
    pub screen_halfwidth: f64,
    pub bins: usize,
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub mode: VisibilityMode,
}

impl SlitConfig {
    /// Equal real amplitudes `1/√2` in full-visibility mode.
    pub fn symmetric(
        separation: f64,
        screen_distance: f64,
        wavenumber: f64,
        screen_halfwidth: f64,
        bins: usize,
    ) -> Self {
        let a = Complex64::new(0.5f64.sqrt(), 0.0);
        SlitConfig {
            separation,
            screen_distance,
            wavenumber,
            screen_halfwidth,
            bins,
            alpha1: a,
            alpha2: a,
            mode: VisibilityMode::Full,
        }
    }

    pub fn with_mode(mut self, mode: VisibilityMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_amplitudes(mut self, alpha1: Complex64, alpha2: Complex64) -> Self {
        self.alpha1 = alpha1;
        self.alpha2 = alpha2;
        self
    }

    pub fn amplitude_norm_sq(&self) -> f64 {
        self.alpha1.norm_sqr() + self.alpha2.norm_sqr()
    }

    /// Rescales `α₁, α₂` to unit total weight.
    pub fn normalize_amplitudes(&mut self) -> Result<()> {
        let norm = self.amplitude_norm_sq().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("alpha", "amplitudes must not both vanish"));
        }
        self.alpha1 /= norm;
        self.alpha2 /= norm;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.separation) {
            return Err(invalid("separation", "must be positive"));
        }
        if !positive(self.screen_distance) {
            return Err(invalid("screen_distance", "must be positive"));
        }
        if !positive(self.wavenumber) {
            return Err(invalid("wavenumber", "must be positive"));
        }
        if !positive(self.screen_halfwidth) {
            return Err(invalid("screen_halfwidth", "must be positive"));
        }
        if self.bins < MIN_BINS {
            return Err(invalid("bins", "at least 16 bins are required"));
        }
        if (self.amplitude_norm_sq() - 1.0).abs() > AMPLITUDE_NORM_TOL {
            return Err(invalid("alpha", "|alpha1|^2 + |alpha2|^2 must equal 1"));
        }
        if let VisibilityMode::Partial { eta } = self.mode {
            if !(0.0..=1.0).contains(&eta) {
                return Err(invalid("eta", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.wavenumber * self.wavenumber
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumber
    }

    /// Far-field fringe spacing `λL/d`.
    pub fn fraunhofer_spacing(&self) -> f64 {
        self.wavelength() * self.screen_distance / self.separation
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.screen_halfwidth / self.bins as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.bins)
            .map(|b| -self.screen_halfwidth + (b as f64 + 0.5) * w)
            .collect()
    }

    /// Distance from a slit to the screen point `(L, x)`.
    pub fn path_length(&self, slit: Slit, x: f64) -> f64 {
        let y = match slit {
            Slit::One => 0.5 * self.separation,
            Slit::Two => -0.5 * self.separation,
        };
        self.screen_distance.hypot(x - y)
    }
}

fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { name, reason }
}

/// Detector probabilities per screen bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorPattern {
    bin_centers: Vec<f64>,
    probabilities: Vec<f64>,
    intensity: Vec<f64>,
}

impl DetectorPattern {
    /// Normalizes a nonnegative intensity profile over its bins.
    pub fn from_intensity(bin_centers: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if bin_centers.len() != intensity.len() {
            return Err(Error::LengthMismatch {
                expected: bin_centers.len(),
                found: intensity.len(),
            });
        }
        if let Some(i) = intensity.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(i));
        }
        let total: f64 = intensity.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(invalid("intensity", "total intensity must be positive"));
        }
        let probabilities = intensity.iter().map(|v| v / total).collect();
        Ok(DetectorPattern {
            bin_centers,
            probabilities,
            intensity,
        })
    }

    pub fn bin_centers(&self) -> &[f64] {
        &self.bin_centers
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Unnormalized intensity at the bin midpoints.
    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// `ψᵢ(x) = e^{iκrᵢ(x)} / √rᵢ(x)` at every bin center.
pub fn slit_field(slit: Slit, config: &SlitConfig) -> Result<Vec<Complex64>> {
    config.validate()?;
    Ok(slit_values(slit, config))
}

fn slit_values(slit: Slit, config: &SlitConfig) -> Vec<Complex64> {
    config
        .bin_centers()
        .into_iter()
        .map(|x| {
            let r = config.path_length(slit, x);
            Complex64::from_polar(1.0 / r.sqrt(), config.wavenumber * r)
        })
        .collect()
}

/// Incoherent sum `|α₁|²|ψ₁|² + |α₂|²|ψ₂|²`.
pub fn pattern_particle(config: &SlitConfig) -> Result<DetectorPattern> {
    config.validate()?;
    let (w1, w2) = (config.alpha1.norm_sqr(), config.alpha2.norm_sqr());
    let intensity = slit_values(Slit::One, config)
        .iter()
        .zip(slit_values(Slit::Two, config))
        .map(|(p1, p2)| w1 * p1.norm_sqr() + w2 * p2.norm_sqr())
        .collect();
    DetectorPattern::from_intensity(config.bin_centers(), intensity)
}

/// Coherent sum `|α₁ψ₁ + α₂ψ₂|²`.
pub fn pattern_wave(config: &SlitConfig) -> Result<DetectorPattern> {
    config.validate()?;
    let intensity = slit_values(Slit::One, config)
        .iter()
        .zip(slit_values(Slit::Two, config))
        .map(|(p1, p2)| (config.alpha1 * p1 + config.alpha2 * p2).norm_sqr())
        .collect();
    DetectorPattern::from_intensity(config.bin_centers(), intensity)
}

/// `η·wave + (1 - η)·particle` over normalized patterns.
pub fn pattern_partial(config: &SlitConfig) -> Result<DetectorPattern> {
    let eta = match config.mode {
        VisibilityMode::Partial { eta } => eta,
        _ => {
            return Err(Error::WrongMode {
                expected: "partial",
            })
        }
    };
    let wave = pattern_wave(config)?;
    let particle = pattern_particle(config)?;
    let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(w, p)| eta * w + (1.0 - eta) * p)
            .collect()
    };
    Ok(DetectorPattern {
        bin_centers: wave.bin_centers.clone(),
        probabilities: mix(&wave.probabilities, &particle.probabilities),
        intensity: mix(&wave.intensity, &particle.intensity),
    })
}

/// Pattern for the configured visibility mode.
pub fn pattern(config: &SlitConfig) -> Result<DetectorPattern> {
    match config.mode {
        VisibilityMode::Individual => pattern_particle(config),
        VisibilityMode::Full => pattern_wave(config),
        VisibilityMode::Partial { .. } => pattern_partial(config),
    }
}

/// `2 Re(α₁ conj(α₂) ψ₁ conj(ψ₂))` per bin, the difference between the
/// wave and particle intensities.
pub fn interference_term(config: &SlitConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let a = config.alpha1 * config.alpha2.conj();
    Ok(slit_values(Slit::One, config)
        .iter()
        .zip(slit_values(Slit::Two, config))
        .map(|(p1, p2)| 2.0 * (a * p1 * p2.conj()).re)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeMetrics {
    /// Mean distance between consecutive maxima; `None` with fewer than
    /// three interior maxima.
    pub spacing: Option<f64>,
    /// `(I_max - I_min)/(I_max + I_min)` around the central maximum.
    pub visibility: f64,
    /// Sub-bin positions of the interior local maxima.
    pub maxima: Vec<f64>,
}

pub fn fringe_metrics(pattern: &DetectorPattern) -> FringeMetrics {
    let p = &pattern.probabilities;
    let x = &pattern.bin_centers;
    let n = p.len();
    let width = if n > 1 { x[1] - x[0] } else { 0.0 };

    let max_idx: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1])
        .collect();
    let min_idx: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| p[i] < p[i - 1] && p[i] <= p[i + 1])
        .collect();

    let maxima: Vec<f64> = max_idx
        .iter()
        .map(|&i| {
            let curvature = p[i - 1] - 2.0 * p[i] + p[i + 1];
            let shift = if curvature != 0.0 {
                0.5 * (p[i - 1] - p[i + 1]) / curvature
            } else {
                0.0
            };
            x[i] + shift * width
        })
        .collect();

    let spacing = (maxima.len() >= 3)
        .then(|| (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64);

    let center = 0.5 * (x[0] + x[n - 1]);
    let visibility = max_idx
        .iter()
        .min_by(|&&a, &&b| (x[a] - center).abs().total_cmp(&(x[b] - center).abs()))
        .map_or(0.0, |&peak| {
            let left = min_idx.iter().rev().find(|&&i| i < peak);
            let right = min_idx.iter().find(|&&i| i > peak);
            let lows: Vec<f64> = left.into_iter().chain(right).map(|&i| p[i]).collect();
            if lows.is_empty() {
                return 0.0;
            }
            let low = lows.iter().sum::<f64>() / lows.len() as f64;
            let high = p[peak];
            if high + low > 0.0 {
                (high - low) / (high + low)
            } else {
                0.0
            }
        });

    FringeMetrics {
        spacing,
        visibility,
        maxima,
    }
}

/// `|Σ I(x) e^{-2πi f x}| / Σ I(x)`: relative strength of the spatial
/// frequency `f` in the intensity profile.
pub fn fourier_ratio(pattern: &DetectorPattern, frequency: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut total = 0.0;
    for (&x, &i) in pattern.bin_centers.iter().zip(&pattern.intensity) {
        acc += Complex64::from_polar(i, -2.0 * PI * frequency * x);
        total += i;
    }
    acc.norm() / total
}

/// Inverse-CDF sampling of `n` detector hits.
pub fn sample_hits(pattern: &DetectorPattern, n: u64, seed: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(invalid("n", "at least one hit must be drawn"));
    }
    let mut cdf = Vec::with_capacity(pattern.len());
    let mut acc = 0.0;
    for &p in &pattern.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let last_live = pattern
        .probabilities
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(pattern.len() - 1);
    let mut counts = alloc::vec![0u64; pattern.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let u = unit_uniform(&mut rng) * acc;
        let bin = cdf.partition_point(|&c| c <= u).min(last_live);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// Two degenerate plane waves `e^{±iκq}` on a ring one wavelength long,
/// standing in for the slit fields as abstract states of equal energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSurrogate {
    pub plus: ScalarField,
    pub minus: ScalarField,
    /// Discrete eigenvalue `4 sin²(κh/2)/h²` shared by both waves.
    pub energy: f64,
}

pub fn ring_surrogate(config: &SlitConfig, samples: usize) -> Result<RingSurrogate> {
    config.validate()?;
    let kappa = config.wavenumber;
    let grid = Grid::periodic(0.0, config.wavelength(), samples)?;
    let h = grid.spacing();
    let norm = 1.0 / config.wavelength().sqrt();
    let wave =
        |sign: f64| ScalarField::from_fn(grid, |q| Complex64::from_polar(norm, sign * kappa * q));
    let s = (0.5 * kappa * h).sin();
    Ok(RingSurrogate {
        plus: wave(1.0)?,
        minus: wave(-1.0)?,
        energy: 4.0 * s * s / (h * h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_config() -> SlitConfig {
        SlitConfig::symmetric(1.0, 50.0, 20.0 * PI, 10.0, 2048)
    }

    #[test]
    fn validation() {
        assert!(oracle_config().validate().is_ok());
        let mut c = oracle_config();
        c.bins = 8;
        assert!(c.validate().is_err());
        let c = oracle_config().with_mode(VisibilityMode::Partial { eta: 1.5 });
        assert!(c.validate().is_err());
        let c = oracle_config().with_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0));
        assert!(c.validate().is_err());
        let mut c = c;
        c.normalize_amplitudes().unwrap();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn symmetric_point_has_equal_fields() {
        let mut c = oracle_config();
        c.bins = 17;
        let p1 = slit_field(Slit::One, &c).unwrap();
        let p2 = slit_field(Slit::Two, &c).unwrap();
        assert_eq!(p1[8], p2[8]);
        for (x, v) in c.bin_centers().iter().zip(&p1) {
            let r = c.path_length(Slit::One, *x);
            assert!((v.norm_sqr() - 1.0 / r).abs() < 1e-15);
        }
    }

    #[test]
    fn path_difference_at_first_fringe() {
        let c = oracle_config();
        let xf = c.fraunhofer_spacing();
        let dphi = c.wavenumber * (c.path_length(Slit::Two, xf) - c.path_length(Slit::One, xf));
        // Next term of r₂ - r₁ = xd/L - (x³d + xd³/4)/(2L³) + ...
        let d = c.separation;
        let l = c.screen_distance;
        let bound = c.wavenumber * (xf.powi(3) * d + xf * d.powi(3) / 4.0) / (2.0 * l.powi(3));
        assert!((dphi - 2.0 * PI).abs() <= bound * 1.01, "{dphi}");
    }

    #[test]
    fn single_slit_limit() {
        let c = oracle_config().with_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let particle = pattern_particle(&c).unwrap();
        let wave = pattern_wave(&c).unwrap();
        let p1 = slit_field(Slit::One, &c).unwrap();
        let total: f64 = p1.iter().map(|v| v.norm_sqr()).sum();
        for ((a, b), v) in particle
            .probabilities()
            .iter()
            .zip(wave.probabilities())
            .zip(&p1)
        {
            assert!((a - v.norm_sqr() / total).abs() < 1e-15);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn particle_pattern_is_even_and_fringeless() {
        let c = oracle_config();
        let p = pattern_particle(&c).unwrap();
        let probs = p.probabilities();
        for i in 0..probs.len() {
            assert!((probs[i] - probs[probs.len() - 1 - i]).abs() <= 1e-10);
        }
        assert!(fourier_ratio(&p, 1.0 / c.fraunhofer_spacing()) <= 0.01);
        assert_eq!(fringe_metrics(&p).spacing, None);
    }

    #[test]
    fn wave_pattern_fringes() {
        let c = oracle_config();
        let w = pattern_wave(&c).unwrap();
        let p1 = slit_field(Slit::One, &c).unwrap();
        let mid = c.bins / 2;
        // Bin centers straddle x = 0; compare against the field at the center bin.
        let near = w.intensity()[mid];
        assert!((near - 2.0 * p1[mid].norm_sqr()).abs() < 1e-3 * near);
        let m = fringe_metrics(&w);
        let spacing = m.spacing.unwrap();
        assert!((spacing - 5.0).abs() <= 0.02 * 5.0, "{spacing}");
        assert!(m.visibility > 0.95);
        assert!(fourier_ratio(&w, 1.0 / c.fraunhofer_spacing()) > 0.1);
    }

    #[test]
    fn coherent_center_on_odd_bins() {
        let mut c = oracle_config();
        c.bins = 2047;
        let w = pattern_wave(&c).unwrap();
        let p1 = slit_field(Slit::One, &c).unwrap();
        let mid = 1023;
        assert_eq!(c.bin_centers()[mid], 0.0);
        assert!((w.intensity()[mid] - 2.0 * p1[mid].norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn partial_endpoints_and_mode() {
        let c = oracle_config();
        assert_eq!(
            pattern_partial(&c),
            Err(Error::WrongMode {
                expected: "partial"
            })
        );
        let one = pattern_partial(&c.with_mode(VisibilityMode::Partial { eta: 1.0 })).unwrap();
        let zero = pattern_partial(&c.with_mode(VisibilityMode::Partial { eta: 0.0 })).unwrap();
        assert_eq!(
            one.probabilities(),
            pattern_wave(&c).unwrap().probabilities()
        );
        assert_eq!(
            zero.probabilities(),
            pattern_particle(&c).unwrap().probabilities()
        );
    }

    #[test]
    fn flat_pattern_has_no_visibility() {
        let p =
            DetectorPattern::from_intensity((0..32).map(f64::from).collect(), alloc::vec![1.0; 32])
                .unwrap();
        let m = fringe_metrics(&p);
        assert_eq!(m.visibility, 0.0);
        assert_eq!(m.spacing, None);
    }

    #[test]
    fn decomposition_identity() {
        let c = oracle_config()
            .with_amplitudes(Complex64::new(0.6, 0.0), Complex64::from_polar(0.8, 0.7));
        let w = pattern_wave(&c).unwrap();
        let p = pattern_particle(&c).unwrap();
        let term = interference_term(&c).unwrap();
        for ((a, b), t) in w.intensity().iter().zip(p.intensity()).zip(&term) {
            assert!((a - b - t).abs() <= 1e-10);
        }
    }

    #[test]
    fn sampling_basics() {
        let c = oracle_config();
        let w = pattern_wave(&c).unwrap();
        for seed in 0..5 {
            let one = sample_hits(&w, 1, seed).unwrap();
            assert_eq!(one.iter().filter(|&&k| k == 1).count(), 1);
            assert_eq!(one.iter().sum::<u64>(), 1);
        }
        assert_eq!(
            sample_hits(&w, 1000, 9).unwrap(),
            sample_hits(&w, 1000, 9).unwrap()
        );
        assert!(sample_hits(&w, 0, 9).is_err());
    }

    #[test]
    fn uniform_sampling_concentrates() {
        let p =
            DetectorPattern::from_intensity(alloc::vec![0.0, 1.0, 2.0, 3.0], alloc::vec![1.0; 4])
                .unwrap();
        let n = 1_000_000u64;
        let counts = sample_hits(&p, n, 42).unwrap();
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for k in counts {
            assert!((k as f64 - 250_000.0).abs() <= 4.0 * sigma);
        }
    }

    #[test]
    fn ring_surrogate_is_degenerate() {
        let s = ring_surrogate(&oracle_config(), 64).unwrap();
        assert!((s.plus.norm() - 1.0).abs() < 1e-12);
        assert!(
            crate::grid::inner_product(&s.plus, &s.minus)
                .unwrap()
                .norm()
                < 1e-12
        );
    }
}
