//! Independent brute-force numerical integration used to validate the
//! closed-form integrals and the full aperture-to-screen propagation at
//! selected points.
//!
//! Nothing here calls into the propagation module; the integrands are
//! written out directly so that agreement between the two routes is a
//! meaningful check.

use crate::core::{Particle, ScreenPoint, SlitGeometry};
use crate::slit_modes::{SlitSide, Truncation};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss-Kronrod 7-15 abscissae (positive half) and weights.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Adaptive quadrature control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-30,
            rel_tol: 1e-12,
            max_subdivisions: 4096,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be > 0".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn gk15<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);

    let mut kronrod = WGK[7] * f_center;
    let mut gauss = WG[3] * f_center;
    let mut res_abs = WGK[7] * f_center.norm();
    let mut samples = [Complex64::default(); 15];
    samples[7] = f_center;

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        samples[j] = f1;
        samples[14 - j] = f2;
        let sum = f1 + f2;
        kronrod += WGK[j] * sum;
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }

    let value = kronrod * half;
    let mean = kronrod * 0.5;
    let mut res_asc = 0.0;
    for (j, s) in samples.iter().enumerate() {
        let w = WGK[7 - (j as i64 - 7).unsigned_abs() as usize];
        res_asc += w * (s - mean).norm();
    }
    res_asc *= half.abs();
    let res_abs = res_abs * half.abs();

    let mut err = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    Panel {
        lo,
        hi,
        value,
        err,
    }
}

fn adapt<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    mut heap: BinaryHeap<Panel>,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    let mut subdivisions = heap.len();
    loop {
        let total: Complex64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total.norm()) {
            return Ok((total, err));
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::QuadratureBudget {
                best_re: total.re,
                best_im: total.im,
                err_est: err,
            });
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(gk15(f, worst.lo, mid));
        heap.push(gk15(f, mid, worst.hi));
        subdivisions += 1;
    }
}

/// Adaptive complex-valued quadrature of `f` over [lo, hi].
pub fn integrate_1d<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    spec.validate()?;
    if !(lo < hi) {
        return Err(Error::Domain("integration requires lo < hi".into()));
    }
    let mut heap = BinaryHeap::new();
    heap.push(gk15(f, lo, hi));
    adapt(f, heap, spec)
}

/// Adaptive quadrature for an oscillatory integrand: the interval is first
/// split so every panel spans at most a quarter period of the fastest
/// kernel frequency (rad/m), keeping the per-panel error estimates honest.
pub fn integrate_1d_oscillatory<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    max_freq: f64,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    spec.validate()?;
    if !(lo < hi) {
        return Err(Error::Domain("integration requires lo < hi".into()));
    }
    let quarter_period = if max_freq > 0.0 {
        0.5 * PI / max_freq
    } else {
        f64::INFINITY
    };
    let n_panels = ((hi - lo) / quarter_period).ceil().max(1.0) as usize;
    let n_panels = n_panels.min(spec.max_subdivisions);
    let step = (hi - lo) / n_panels as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..n_panels {
        let a = lo + i as f64 * step;
        let b = if i + 1 == n_panels { hi } else { a + step };
        heap.push(gk15(f, a, b));
    }
    adapt(f, heap, spec)
}

/// Axis-aligned integration rectangle with the oscillation frequencies of
/// the integrand along each axis (0 when smooth).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aperture {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub x_freq: f64,
    pub y_freq: f64,
}

/// Tensor-product adaptive quadrature over a rectangle; the inner x
/// integral runs at a tenth of the requested tolerances.
pub fn integrate_aperture_2d<F: Fn(f64, f64) -> Complex64 + Sync + ?Sized>(
    f: &F,
    aperture: &Aperture,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    spec.validate()?;
    if !(aperture.x_lo < aperture.x_hi && aperture.y_lo < aperture.y_hi) {
        return Err(Error::Domain("degenerate integration rectangle".into()));
    }
    // The inner integral must converge far below the outer tolerance:
    // leftover jitter in the inner results looks like integrand noise to the
    // outer adaptive loop, which then subdivides forever chasing it.
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-4,
        rel_tol: (spec.rel_tol * 1e-4).max(1e-14),
        ..*spec
    };
    let inner_err = std::cell::Cell::new(0.0f64);
    let outer = |y: f64| -> Complex64 {
        let (v, e) = integrate_1d_oscillatory(
            &|x| f(x, y),
            aperture.x_lo,
            aperture.x_hi,
            aperture.x_freq,
            &inner_spec,
        )
        .unwrap_or_else(|err| match err {
            Error::QuadratureBudget {
                best_re,
                best_im,
                err_est,
            } => {
                inner_err.set(inner_err.get().max(err_est));
                (Complex64::new(best_re, best_im), err_est)
            }
            _ => (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
        });
        inner_err.set(inner_err.get().max(e));
        v
    };
    let (value, outer_err) = integrate_1d_oscillatory(
        &outer,
        aperture.y_lo,
        aperture.y_hi,
        aperture.y_freq,
        spec,
    )?;
    let err = outer_err + inner_err.get() * (aperture.y_hi - aperture.y_lo);
    Ok((value, err))
}

/// Slit-exit wavefunction written out directly from the mode expansion,
/// with plain trigonometric recurrences. Kept local to the oracle so the
/// propagation cross-check does not reuse the code under test.
fn exit_wavefunction_direct(
    x0: f64,
    y0: f64,
    side: SlitSide,
    geom: &SlitGeometry,
    particle: &Particle,
    trunc: &Truncation,
    amplitude: f64,
) -> Complex64 {
    let a = geom.width_a_m;
    let b = geom.length_b_m;
    let c = geom.thickness_c_m;
    let d = geom.gap_d_m;
    let k = particle.wavenumber();
    let sign = match side {
        SlitSide::Left => 1.0,
        SlitSide::Right => -1.0,
    };

    // sin/cos of (2j+1) pi x0 / b and (2j+1) pi y0 / a via angle addition.
    let (sx1, cx1) = (PI * x0 / b).sin_cos();
    let (sx2, cx2) = (2.0 * PI * x0 / b).sin_cos();
    let (sy1, cy1) = (PI * y0 / a).sin_cos();
    let (sy2, cy2) = (2.0 * PI * y0 / a).sin_cos();
    let (sd1, cd1) = (PI * d / (2.0 * a)).sin_cos();
    let (sd2, cd2) = (PI * d / a).sin_cos();

    if c == 0.0 {
        // Zero thickness: every longitudinal factor is 1, so the double sum
        // factors into (sum over n)(sum over m). Same series, fewer terms.
        let mut sum_x = 0.0;
        let (mut sx, mut cx) = (sx1, cx1);
        for n in 0..trunc.n_max {
            sum_x += sx / (2 * n + 1) as f64;
            let (s_next, c_next) = (sx * cx2 + cx * sx2, cx * cx2 - sx * sx2);
            sx = s_next;
            cx = c_next;
        }
        let mut sum_y = 0.0;
        let (mut sy, mut cy) = (sy1, cy1);
        let (mut sd, mut cd) = (sd1, cd1);
        for m in 0..trunc.m_max {
            sum_y += (sd * cy + sign * cd * sy) / (2 * m + 1) as f64;
            let (s_next, c_next) = (sy * cy2 + cy * sy2, cy * cy2 - sy * sy2);
            sy = s_next;
            cy = c_next;
            let (sd_next, cd_next) = (sd * cd2 + cd * sd2, cd * cd2 - sd * sd2);
            sd = sd_next;
            cd = cd_next;
        }
        return Complex64::new(-16.0 * amplitude / (PI * PI) * sum_x * sum_y, 0.0);
    }

    let mut acc = Complex64::new(0.0, 0.0);
    let (mut sy, mut cy) = (sy1, cy1);
    let (mut sd, mut cd) = (sd1, cd1);
    for m in 0..trunc.m_max {
        let pm = (2 * m + 1) as f64;
        let bracket_m = sd * cy + sign * cd * sy;
        let (mut sx, mut cx) = (sx1, cx1);
        for n in 0..trunc.n_max {
            let pn = (2 * n + 1) as f64;
            let coeff = -16.0 * amplitude / (pm * pn * PI * PI);
            let long = if c == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                let rad = k * k - (pn * PI / b).powi(2) - (pm * PI / a).powi(2);
                let kz = if rad >= 0.0 {
                    Complex64::new(rad.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, (-rad).sqrt())
                };
                (Complex64::i() * kz * c).exp()
            };
            acc += coeff * sx * bracket_m * long;
            let (s_next, c_next) = (sx * cx2 + cx * sx2, cx * cx2 - sx * sx2);
            sx = s_next;
            cx = c_next;
        }
        let (s_next, c_next) = (sy * cy2 + cy * sy2, cy * cy2 - sy * sy2);
        sy = s_next;
        cy = c_next;
        let (sd_next, cd_next) = (sd * cd2 + cd * sd2, cd * cd2 - sd * sd2);
        sd = sd_next;
        cd = cd_next;
    }
    acc
}

/// Direct numerical propagation: 2-D quadrature of kernel times slit-exit
/// wavefunction over the aperture, with the wavenumber substitution applied
/// to the kernel and the paraxial expansion of the path length.
pub fn propagated_amplitude_quadrature(
    side: SlitSide,
    point: &ScreenPoint,
    geom: &SlitGeometry,
    particle: &Particle,
    trunc: &Truncation,
    amplitude: f64,
    spec: &QuadratureSpec,
) -> Result<(Complex64, f64)> {
    let k = particle.wavenumber();
    let r = point.r_m;
    let root = Complex64::new(
        -std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    );
    let pref = root * (k / (2.0 * PI * r)).powf(1.5);
    let (y_lo, y_hi) = match side {
        SlitSide::Left => geom.left_aperture_y(),
        SlitSide::Right => geom.right_aperture_y(),
    };
    let u = k * point.sin_alpha;
    let w = k * point.sin_beta;
    // The constant part of the kernel phase (k r / 2, plus the thickness
    // term) is huge — ~1e12 rad for lab geometries. Adding it inside the
    // integrand would quantize the total phase at that magnitude's ULP
    // (~1e-4 rad), turning a smooth integrand into one with step noise that
    // defeats the adaptive error estimates. Apply it once, outside.
    let mut const_phase = Complex64::new(0.0, 0.5 * k * r).exp();
    if geom.thickness_c_m != 0.0 {
        const_phase *= Complex64::new(0.0, -k * point.cos_theta * geom.thickness_c_m).exp();
    }

    let integrand = |x0: f64, y0: f64| -> Complex64 {
        // exp(i k R^2 / (2 r)) with R^2 paraxially expanded; constant part
        // of the phase applied after integration.
        let kernel = Complex64::new(0.0, -u * x0 - w * y0).exp();
        kernel * exit_wavefunction_direct(x0, y0, side, geom, particle, trunc, amplitude)
    };

    let aperture = Aperture {
        x_lo: 0.0,
        x_hi: geom.length_b_m,
        y_lo,
        y_hi,
        x_freq: u.abs() + (2 * trunc.n_max - 1) as f64 * PI / geom.length_b_m,
        y_freq: w.abs() + (2 * trunc.m_max - 1) as f64 * PI / geom.width_a_m,
    };
    let (integral, err) = integrate_aperture_2d(&integrand, &aperture, spec)?;
    Ok((pref * const_phase * integral, pref.norm() * err))
}
