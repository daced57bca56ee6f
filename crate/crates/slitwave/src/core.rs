//! Domain types, unit conventions, experiment presets and screen geometry.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Paraxial validity bound on (a + d) / L.
pub const PARAXIAL_LIMIT: f64 = 1e-3;

/// Relative slack allowed on c1^2 + c2^2 = 1 for the shipped presets,
/// which store the published fit values verbatim.
pub const PRESET_WEIGHT_SLACK: f64 = 1e-4;

const WEIGHT_TOL: f64 = 1e-12;

/// The matter wave. Everything downstream depends on mass and energy only
/// through the wavenumber, so the de Broglie wavelength alone fixes the
/// physics; the mass is carried for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub wavelength_m: f64,
    pub mass_kg: Option<f64>,
}

impl Particle {
    pub fn new(wavelength_m: f64) -> Result<Self> {
        if !(wavelength_m > 0.0) || !wavelength_m.is_finite() {
            return Err(Error::InvalidParticle(format!(
                "wavelength must be positive and finite, got {wavelength_m}"
            )));
        }
        Ok(Self {
            wavelength_m,
            mass_kg: None,
        })
    }

    pub fn with_mass(mut self, mass_kg: f64) -> Self {
        self.mass_kg = Some(mass_kg);
        self
    }

    /// k = 2*pi/lambda.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength_m
    }
}

/// Double-slit geometry. The left slit occupies y in [-d/2 - a, -d/2],
/// the right slit y in [d/2, d/2 + a]; x runs along the slit length b and
/// z through the slit thickness c toward the screen at distance L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitGeometry {
    pub width_a_m: f64,
    pub length_b_m: f64,
    pub thickness_c_m: f64,
    pub gap_d_m: f64,
    pub screen_l_m: f64,
}

impl SlitGeometry {
    pub fn new(
        width_a_m: f64,
        length_b_m: f64,
        thickness_c_m: f64,
        gap_d_m: f64,
        screen_l_m: f64,
    ) -> Result<Self> {
        let geom = Self {
            width_a_m,
            length_b_m,
            thickness_c_m,
            gap_d_m,
            screen_l_m,
        };
        geom.validate()?;
        Ok(geom)
    }

    fn validate(&self) -> Result<()> {
        let all_finite = [
            self.width_a_m,
            self.length_b_m,
            self.thickness_c_m,
            self.gap_d_m,
            self.screen_l_m,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidGeometry("non-finite field".into()));
        }
        if !(self.width_a_m > 0.0 && self.length_b_m > 0.0 && self.screen_l_m > 0.0) {
            return Err(Error::InvalidGeometry(
                "a, b and L must be strictly positive".into(),
            ));
        }
        if self.thickness_c_m < 0.0 || self.gap_d_m < 0.0 {
            return Err(Error::InvalidGeometry("c and d must be >= 0".into()));
        }
        let ratio = (self.width_a_m + self.gap_d_m) / self.screen_l_m;
        if ratio >= PARAXIAL_LIMIT {
            return Err(Error::InvalidGeometry(format!(
                "(a + d)/L = {ratio:.3e} violates the paraxial condition (must be < {PARAXIAL_LIMIT:.0e})"
            )));
        }
        Ok(())
    }

    /// Center-to-center slit separation a + d.
    pub fn slit_separation_m(&self) -> f64 {
        self.width_a_m + self.gap_d_m
    }

    /// y-interval of the left aperture.
    pub fn left_aperture_y(&self) -> (f64, f64) {
        (-self.gap_d_m / 2.0 - self.width_a_m, -self.gap_d_m / 2.0)
    }

    /// y-interval of the right aperture.
    pub fn right_aperture_y(&self) -> (f64, f64) {
        (self.gap_d_m / 2.0, self.gap_d_m / 2.0 + self.width_a_m)
    }

    /// Nominal interference fringe period on the screen,
    /// lambda * L / (a + d).
    pub fn nominal_fringe_m(&self, particle: &Particle) -> f64 {
        particle.wavelength_m * self.screen_l_m / self.slit_separation_m()
    }
}

/// Superposition weights of the two slit amplitudes and the environment
/// overlap magnitude that sets the coherence degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceConfig {
    pub c1: f64,
    pub c2: f64,
    pub alpha_abs: f64,
}

impl CoherenceConfig {
    /// Strict constructor: c1^2 + c2^2 = 1 within 1e-12.
    pub fn new(c1: f64, c2: f64, alpha_abs: f64) -> Result<Self> {
        Self::with_weight_tolerance(c1, c2, alpha_abs, WEIGHT_TOL)
    }

    /// Constructor with the relaxed weight tolerance used by the shipped
    /// presets, whose published values miss unity in the fourth decimal.
    pub fn new_relaxed(c1: f64, c2: f64, alpha_abs: f64) -> Result<Self> {
        Self::with_weight_tolerance(c1, c2, alpha_abs, PRESET_WEIGHT_SLACK)
    }

    fn with_weight_tolerance(c1: f64, c2: f64, alpha_abs: f64, tol: f64) -> Result<Self> {
        let norm = c1 * c1 + c2 * c2;
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidCoherence(format!(
                "c1^2 + c2^2 = {norm} deviates from 1 by more than {tol:.0e}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha_abs) {
            return Err(Error::InvalidCoherence(format!(
                "|alpha_t| = {alpha_abs} out of [0, 1]"
            )));
        }
        Ok(Self { c1, c2, alpha_abs })
    }

    /// Quantum coherence degree 2|alpha|^2 / (1 + |alpha|^2).
    pub fn lambda_t(&self) -> f64 {
        let a2 = self.alpha_abs * self.alpha_abs;
        2.0 * a2 / (1.0 + a2)
    }
}

/// A point on the screen, with the angles the propagation kernel needs.
/// `s_m` is the transverse coordinate in the y-direction of the scan plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenPoint {
    pub s_m: f64,
    pub r_m: f64,
    pub sin_beta: f64,
    pub sin_alpha: f64,
    pub cos_theta: f64,
}

impl ScreenPoint {
    /// Standard scan plane: x = 0 on the screen, so sin(alpha) = 0.
    pub fn new(s_m: f64, screen_l_m: f64) -> Self {
        let r_m = (screen_l_m * screen_l_m + s_m * s_m).sqrt();
        let sin_beta = s_m / r_m;
        Self {
            s_m,
            r_m,
            sin_beta,
            sin_alpha: 0.0,
            cos_theta: (1.0 - sin_beta * sin_beta).sqrt(),
        }
    }

    /// General construction with an off-plane angle alpha.
    pub fn with_alpha(s_m: f64, screen_l_m: f64, sin_alpha: f64) -> Result<Self> {
        let r_m = (screen_l_m * screen_l_m + s_m * s_m).sqrt();
        let sin_beta = s_m / r_m;
        let cos2 = 1.0 - sin_alpha * sin_alpha - sin_beta * sin_beta;
        if cos2 <= 0.0 {
            return Err(Error::Domain(format!(
                "cos^2(theta) = {cos2} <= 0 for s = {s_m}, sin(alpha) = {sin_alpha}"
            )));
        }
        Ok(Self {
            s_m,
            r_m,
            sin_beta,
            sin_alpha,
            cos_theta: cos2.sqrt(),
        })
    }
}

/// sin(beta) = s / sqrt(L^2 + s^2), the screen-position-to-angle relation.
pub fn sin_beta_from_position(s_m: f64, screen_l_m: f64) -> f64 {
    debug_assert!(screen_l_m > 0.0);
    s_m / (screen_l_m * screen_l_m + s_m * s_m).sqrt()
}

/// A published experiment configuration: geometry, particle, the fitted
/// per-slit amplitudes, superposition weights and fringe visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub geometry: SlitGeometry,
    pub particle: Particle,
    pub amplitude_1: f64,
    pub amplitude_2: f64,
    pub coherence: CoherenceConfig,
    pub visibility_nu: f64,
}

/// Names of the shipped presets.
pub const PRESET_NAMES: &[&str] = &["ref18", "ref19"];

/// Slit length is not part of the published fits; 10 um makes the
/// x-direction effectively unconfined relative to the nm-scale slit width.
pub const DEFAULT_SLIT_LENGTH_M: f64 = 10e-6;

/// Slit thickness is not part of the published fits; zero drops the
/// longitudinal phase factors.
pub const DEFAULT_SLIT_THICKNESS_M: f64 = 0.0;

/// Build one of the two shipped experiment presets.
pub fn make_preset(name: &str) -> Result<ExperimentPreset> {
    // Published C60 double-slit fit parameters. Weights are stored
    // verbatim; they miss c1^2 + c2^2 = 1 by a few 1e-5 and are not
    // renormalized here.
    let (a, lambda, d, l, a1, a2, c1, c2, nu) = match name {
        "ref18" => (47.5e-9, 2.4e-12, 52.5e-9, 1.25, 1.6e12, 1.7e12, 0.915, 0.40345, 0.53),
        "ref19" => (42e-9, 4.8e-12, 86e-9, 1.25, 5.35e13, 2.1e13, 0.9075, 0.42, 0.88),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                known: PRESET_NAMES.join(", "),
            })
        }
    };
    let geometry = SlitGeometry::new(a, DEFAULT_SLIT_LENGTH_M, DEFAULT_SLIT_THICKNESS_M, d, l)?;
    let particle = Particle::new(lambda)?;
    let alpha_abs = crate::intensity::alpha_from_visibility(nu)?;
    let coherence = CoherenceConfig::new_relaxed(c1, c2, alpha_abs)?;
    Ok(ExperimentPreset {
        name: name.to_string(),
        geometry,
        particle,
        amplitude_1: a1,
        amplitude_2: a2,
        coherence,
        visibility_nu: nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sin_beta_examples() {
        assert_eq!(sin_beta_from_position(0.0, 1.25), 0.0);
        let v = sin_beta_from_position(1.0, 1.0);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let s = 30e-6;
        let exact = s / (1.25f64 * 1.25 + s * s).sqrt();
        let got = sin_beta_from_position(s, 1.25);
        assert!((got - exact).abs() <= 1e-12 * exact.abs());
        assert!((got - 2.4e-5).abs() < 1e-9);
    }

    #[test]
    fn wavenumber_round_trip() {
        let p = Particle::new(2.4e-12).unwrap();
        assert!((p.wavenumber() * p.wavelength_m - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn preset_values() {
        let p18 = make_preset("ref18").unwrap();
        assert_eq!(p18.geometry.width_a_m, 47.5e-9);
        assert_eq!(p18.geometry.gap_d_m, 52.5e-9);
        assert_eq!(p18.particle.wavelength_m, 2.4e-12);
        assert_eq!(p18.amplitude_1, 1.6e12);
        assert_eq!(p18.coherence.c1, 0.915);
        assert_eq!(p18.coherence.c2, 0.40345);
        let norm = p18.coherence.c1.powi(2) + p18.coherence.c2.powi(2);
        assert!((norm - 1.0).abs() < 1e-4);

        let p19 = make_preset("ref19").unwrap();
        assert_eq!(p19.particle.wavelength_m, 4.8e-12);
        assert_eq!(p19.geometry.gap_d_m, 86e-9);
        assert_eq!(p19.visibility_nu, 0.88);
    }

    #[test]
    fn unknown_preset_names_known_ones() {
        let err = make_preset("ref20").unwrap_err().to_string();
        assert!(err.contains("ref18") && err.contains("ref19"));
    }

    #[test]
    fn geometry_rejects_non_paraxial() {
        assert!(SlitGeometry::new(1e-3, 1e-3, 0.0, 1e-3, 1.0).is_err());
        assert!(SlitGeometry::new(-1.0, 1e-6, 0.0, 1e-7, 1.0).is_err());
    }

    #[test]
    fn coherence_bounds() {
        assert!(CoherenceConfig::new(0.6, 0.8, 0.5).is_ok());
        assert!(CoherenceConfig::new(0.6, 0.9, 0.5).is_err());
        assert!(CoherenceConfig::new(0.6, 0.8, 1.5).is_err());
        let c = CoherenceConfig::new(0.6, 0.8, 0.5).unwrap();
        assert!((c.lambda_t() - 0.4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn screen_point_angle_identity(s in -0.01f64..0.01, l in 0.1f64..10.0) {
            let p = ScreenPoint::new(s, l);
            let sum = p.cos_theta * p.cos_theta
                + p.sin_alpha * p.sin_alpha
                + p.sin_beta * p.sin_beta;
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(p.sin_beta.abs() < 1.0);
            prop_assert!(p.cos_theta > 0.0);
        }

        #[test]
        fn sin_beta_odd_and_increasing(s in 1e-9f64..0.1, l in 0.1f64..10.0) {
            let f = sin_beta_from_position(s, l);
            prop_assert_eq!(sin_beta_from_position(-s, l), -f);
            prop_assert!(sin_beta_from_position(s * 1.5, l) > f);
        }
    }
}
