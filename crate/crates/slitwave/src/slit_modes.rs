//! In-slit boundary-value problem: Fourier coefficients of the incoming
//! plane wave over each aperture and the modal wavefunctions inside the
//! slits.
//!
//! Each slit is an infinite well over its aperture, so only odd harmonics
//! (2m+1, 2n+1) carry weight; the transverse profile of every mode reduces
//! to sin((2m+1)*pi*(y - y_lo)/a) in aperture-local coordinates, which
//! vanishes at both walls by construction.

use crate::core::{Particle, SlitGeometry};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Hard cap on the adaptive doubling of the transverse mode count.
pub const HARD_CAP_M: usize = 16384;

/// Harmonic index pair. The physical harmonic numbers are 2m+1 and 2n+1;
/// even harmonics have vanishing coefficients and are never represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeIndex {
    pub m: usize,
    pub n: usize,
}

impl ModeIndex {
    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    /// Physical transverse harmonic number 2m+1.
    pub fn phys_m(&self) -> usize {
        2 * self.m + 1
    }

    /// Physical axial harmonic number 2n+1.
    pub fn phys_n(&self) -> usize {
        2 * self.n + 1
    }
}

/// Series truncation: the sums retain m in 0..m_max and n in 0..n_max.
/// `tail_tol` drives the adaptive doubling of m_max in screen scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub m_max: usize,
    pub n_max: usize,
    pub tail_tol: f64,
}

impl Truncation {
    pub fn new(m_max: usize, n_max: usize, tail_tol: f64) -> Result<Self> {
        if m_max == 0 || n_max == 0 {
            return Err(Error::Domain("m_max and n_max must be >= 1".into()));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::Domain("tail_tol must be > 0".into()));
        }
        Ok(Self {
            m_max,
            n_max,
            tail_tol,
        })
    }
}

impl Default for Truncation {
    fn default() -> Self {
        // The transverse tail is a same-sign boundary term decaying like
        // 1/m_max (the aperture top-hat is discontinuous at the walls), so
        // the doubling test cannot reach much below ~2e-5 within the hard
        // cap; 1e-4 converges around m_max = 8192.
        Self {
            m_max: 512,
            n_max: 64,
            tail_tol: 1e-4,
        }
    }
}

/// Which slit. Left occupies y in [-d/2 - a, -d/2], right y in [d/2, d/2 + a].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlitSide {
    Left,
    Right,
}

impl SlitSide {
    /// y-interval of this slit's aperture.
    pub fn aperture_y(&self, geom: &SlitGeometry) -> (f64, f64) {
        match self {
            SlitSide::Left => geom.left_aperture_y(),
            SlitSide::Right => geom.right_aperture_y(),
        }
    }

    /// Sign between the cos and sin bracket terms of the mode expansion:
    /// + for the left slit, - for the right slit.
    pub fn bracket_sign(&self) -> f64 {
        match self {
            SlitSide::Left => 1.0,
            SlitSide::Right => -1.0,
        }
    }
}

/// sin(pi * t) with exact zeros at integer t. Arguments here never exceed
/// a few times 2^15, so the range reduction below is exact.
pub(crate) fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t / 2.0).round();
    if r == 0.0 || r == 1.0 || r == -1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

/// Fourier coefficients (D, D') of the incoming amplitude over the left
/// aperture for the cos and sin mode pair:
/// -16 A / ((2m+1)(2n+1) pi^2) * {sin, cos}((2m+1) pi d / (2a)).
pub fn mode_coefficients(
    mn: ModeIndex,
    geom: &SlitGeometry,
    amplitude: f64,
) -> (f64, f64) {
    let pm = mn.phys_m() as f64;
    let pn = mn.phys_n() as f64;
    let base = -16.0 * amplitude / (pm * pn * PI * PI);
    let arg = pm * PI * geom.gap_d_m / (2.0 * geom.width_a_m);
    (base * arg.sin(), base * arg.cos())
}

/// Longitudinal wavevector kz(m, n) = sqrt(k^2 - ((2n+1)pi/b)^2 - ((2m+1)pi/a)^2),
/// with the branch Im(kz) >= 0 so evanescent modes decay through the slit.
pub fn longitudinal_wavenumber(
    mn: ModeIndex,
    geom: &SlitGeometry,
    particle: &Particle,
) -> Complex64 {
    let k = particle.wavenumber();
    let qx = mn.phys_n() as f64 * PI / geom.length_b_m;
    let qy = mn.phys_m() as f64 * PI / geom.width_a_m;
    let radicand = k * k - qx * qx - qy * qy;
    if radicand >= 0.0 {
        Complex64::new(radicand.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-radicand).sqrt())
    }
}

/// exp(i kz c), the phase (or evanescent decay) a mode picks up crossing
/// the slit thickness.
pub fn longitudinal_factor(
    mn: ModeIndex,
    geom: &SlitGeometry,
    particle: &Particle,
) -> Complex64 {
    phase_at_depth(mn, geom, particle, geom.thickness_c_m)
}

/// exp(i kz z) for 0 <= z <= c.
pub fn phase_at_depth(
    mn: ModeIndex,
    geom: &SlitGeometry,
    particle: &Particle,
    z: f64,
) -> Complex64 {
    if z == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let kz = longitudinal_wavenumber(mn, geom, particle);
    (Complex64::i() * kz * z).exp()
}

/// Truncated modal wavefunction at a point inside the chosen slit.
///
/// In aperture-local coordinates u = (y - y_lo)/a, v = x/b every term is
/// (16 A / ((2m+1)(2n+1) pi^2)) * sin((2n+1) pi v) * sin((2m+1) pi u)
/// * exp(i kz z); the series reconstructs the constant incoming amplitude
/// in the interior and vanishes term-by-term on all four walls.
pub fn in_slit_wavefunction(
    x: f64,
    y: f64,
    z: f64,
    side: SlitSide,
    geom: &SlitGeometry,
    particle: &Particle,
    trunc: &Truncation,
    amplitude: f64,
) -> Result<Complex64> {
    let (y_lo, y_hi) = side.aperture_y(geom);
    let inside = (0.0..=geom.length_b_m).contains(&x)
        && (y_lo..=y_hi).contains(&y)
        && (0.0..=geom.thickness_c_m).contains(&z);
    if !inside {
        return Err(Error::OutsideAperture { x, y, z, side });
    }
    let u = (y - y_lo) / (y_hi - y_lo);
    let v = x / geom.length_b_m;

    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..trunc.m_max {
        let pm = (2 * m + 1) as f64;
        let ym = sin_pi(pm * u);
        if ym == 0.0 {
            continue;
        }
        for n in 0..trunc.n_max {
            let pn = (2 * n + 1) as f64;
            let xn = sin_pi(pn * v);
            if xn == 0.0 {
                continue;
            }
            let coeff = 16.0 * amplitude / (pm * pn * PI * PI);
            acc += coeff * xn * ym * phase_at_depth(ModeIndex::new(m, n), geom, particle, z);
        }
    }
    Ok(acc)
}
