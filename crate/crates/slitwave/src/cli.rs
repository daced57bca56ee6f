//! Command-line front end: config ingestion, scan execution, CSV and SVG
//! emission, oracle verification and comparison against digitized
//! experimental data.

use crate::core::{make_preset, CoherenceConfig, Particle, SlitGeometry, PRESET_NAMES};
use crate::intensity::{
    alpha_from_visibility, fringe_spacing, screen_scan, visibility, DiffractionPattern,
    IntensityMode, Normalization, PatternMeta, ScanGrid, ScanInput,
};
use crate::oracle::{propagated_amplitude_quadrature, QuadratureSpec};
use crate::propagation::diffraction_amplitude;
use crate::slit_modes::{SlitSide, Truncation};
use crate::{Error, Result};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::Path;

/// Flat key/value config file schema; flags override file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub wavelength_m: Option<f64>,
    pub mass_kg: Option<f64>,
    pub width_a_m: Option<f64>,
    pub length_b_m: Option<f64>,
    pub thickness_c_m: Option<f64>,
    pub gap_d_m: Option<f64>,
    pub screen_l_m: Option<f64>,
    pub amplitude_1: Option<f64>,
    pub amplitude_2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub alpha_abs: Option<f64>,
    pub visibility_nu: Option<f64>,
    pub s_min_m: Option<f64>,
    pub s_max_m: Option<f64>,
    pub points: Option<usize>,
    pub mode: Option<String>,
    pub normalize: Option<String>,
    pub m_max: Option<usize>,
    pub n_max: Option<usize>,
    pub tail_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: ScanInput,
    pub grid: ScanGrid,
    pub mode: IntensityMode,
    pub normalization: Normalization,
    pub truncation: Truncation,
}

/// Either a preset name or a full parameter block, never both.
pub fn resolve_input(cfg: &FileConfig) -> Result<ScanInput> {
    let custom_fields = cfg.wavelength_m.is_some()
        || cfg.width_a_m.is_some()
        || cfg.gap_d_m.is_some()
        || cfg.screen_l_m.is_some()
        || cfg.amplitude_1.is_some()
        || cfg.c1.is_some();
    if let Some(name) = &cfg.preset {
        if custom_fields {
            return Err(Error::Config(
                "specify either 'preset' or a full parameter block, not both".into(),
            ));
        }
        return Ok(ScanInput::from_preset(&make_preset(name)?));
    }
    let need = |v: Option<f64>, field: &str| {
        v.ok_or_else(|| Error::Config(format!("missing required field '{field}'")))
    };
    let geometry = SlitGeometry::new(
        need(cfg.width_a_m, "width_a_m")?,
        cfg.length_b_m.unwrap_or(crate::core::DEFAULT_SLIT_LENGTH_M),
        cfg.thickness_c_m
            .unwrap_or(crate::core::DEFAULT_SLIT_THICKNESS_M),
        need(cfg.gap_d_m, "gap_d_m")?,
        need(cfg.screen_l_m, "screen_l_m")?,
    )?;
    let mut particle = Particle::new(need(cfg.wavelength_m, "wavelength_m")?)?;
    if let Some(m) = cfg.mass_kg {
        particle = particle.with_mass(m);
    }
    let alpha = match (cfg.alpha_abs, cfg.visibility_nu) {
        (Some(a), None) => a,
        (None, Some(nu)) => alpha_from_visibility(nu)?,
        (None, None) => 1.0,
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either 'alpha_abs' or 'visibility_nu', not both".into(),
            ))
        }
    };
    let coherence = CoherenceConfig::new_relaxed(
        need(cfg.c1, "c1")?,
        need(cfg.c2, "c2")?,
        alpha,
    )?;
    Ok(ScanInput {
        geometry,
        particle,
        amplitude_1: need(cfg.amplitude_1, "amplitude_1")?,
        amplitude_2: need(cfg.amplitude_2, "amplitude_2")?,
        coherence,
        preset: None,
    })
}

pub fn parse_mode(s: &str) -> Result<IntensityMode> {
    match s {
        "coherent" => Ok(IntensityMode::Coherent),
        "decohered" => Ok(IntensityMode::Decohered),
        _ => Err(Error::Config(format!(
            "mode must be 'coherent' or 'decohered', got '{s}'"
        ))),
    }
}

pub fn parse_normalization(s: &str) -> Result<Normalization> {
    match s {
        "none" => Ok(Normalization::None),
        "peak" => Ok(Normalization::Peak),
        _ => Err(Error::Config(format!(
            "normalize must be 'none' or 'peak', got '{s}'"
        ))),
    }
}

/// Serialize a pattern to CSV: `#`-prefixed metadata comments, a
/// `s_um,intensity` header, positions in micrometers and values with 17
/// significant digits.
pub fn pattern_to_csv(pattern: &DiffractionPattern) -> String {
    let meta = &pattern.meta;
    let mut out = String::new();
    out.push_str("# slitwave diffraction pattern\n");
    if let Some(p) = &meta.preset {
        let _ = writeln!(out, "# preset: {p}");
    }
    let _ = writeln!(out, "# mode: {}", meta.mode);
    let _ = writeln!(out, "# normalization: {}", meta.normalization);
    let _ = writeln!(
        out,
        "# truncation: m_max={} n_max={} tail_tol={:e}",
        meta.truncation.m_max, meta.truncation.n_max, meta.truncation.tail_tol
    );
    let _ = writeln!(
        out,
        "# coherence: c1={} c2={} alpha_abs={:.16e} lambda_t={:.16e}",
        meta.coherence.c1,
        meta.coherence.c2,
        meta.coherence.alpha_abs,
        meta.coherence.lambda_t()
    );
    if let Some(fr) = meta.nominal_fringe_m {
        let _ = writeln!(out, "# nominal_fringe_um: {:.16e}", fr * 1e6);
    }
    out.push_str("# positions are in micrometers\n");
    out.push_str("s_um,intensity\n");
    for &(s, i) in &pattern.points {
        let _ = writeln!(out, "{:.16e},{:.16e}", s * 1e6, i);
    }
    out
}

/// Parse a pattern CSV back into (position meters, intensity) pairs.
pub fn csv_to_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',');
        let first = cols
            .next()
            .ok_or_else(|| Error::Data(format!("line {}: empty row", lineno + 1)))?
            .trim();
        if first.parse::<f64>().is_err() {
            // header row
            continue;
        }
        let second = cols
            .next()
            .ok_or_else(|| Error::Data(format!("line {}: missing second column", lineno + 1)))?
            .trim();
        let s_um: f64 = first
            .parse()
            .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 1)))?;
        let i: f64 = second
            .parse()
            .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 1)))?;
        points.push((s_um * 1e-6, i));
    }
    Ok(points)
}

/// Minimal static SVG line plot of a pattern, with optional data overlay
/// markers.
pub fn pattern_to_svg(pattern: &DiffractionPattern, data: Option<&[(f64, f64)]>) -> String {
    const W: f64 = 840.0;
    const H: f64 = 520.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 20.0;
    const MB: f64 = 50.0;

    let pts = &pattern.points;
    let (mut s_lo, mut s_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut i_lo, mut i_hi) = (0.0f64, f64::NEG_INFINITY);
    for &(s, i) in pts.iter().chain(data.unwrap_or(&[]).iter()) {
        s_lo = s_lo.min(s);
        s_hi = s_hi.max(s);
        i_lo = i_lo.min(i);
        i_hi = i_hi.max(i);
    }
    if i_hi <= i_lo {
        i_hi = i_lo + 1.0;
    }
    let px = |s: f64| ML + (s - s_lo) / (s_hi - s_lo) * (W - ML - MR);
    let py = |i: f64| H - MB - (i - i_lo) / (i_hi - i_lo) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{W}" height="{H}" fill="white"/>"#
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{ML}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        H - MB,
        W - MR
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{0}" stroke="black"/>"#,
        H - MB
    );
    // ticks
    for t in 0..=5 {
        let s = s_lo + (s_hi - s_lo) * t as f64 / 5.0;
        let x = px(s);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{0}" x2="{x:.1}" y2="{1}" stroke="black"/>"#,
            H - MB,
            H - MB + 6.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{0}" font-size="12" text-anchor="middle">{1:.1}</text>"#,
            H - MB + 22.0,
            s * 1e6
        );
        let i = i_lo + (i_hi - i_lo) * t as f64 / 5.0;
        let y = py(i);
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{y:.1}" x2="{ML}" y2="{y:.1}" stroke="black"/>"#,
            ML - 6.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{0}" y="{1:.1}" font-size="12" text-anchor="end">{i:.3}</text>"#,
            ML - 10.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{0:.1}" y="{1}" font-size="13" text-anchor="middle">screen position s (um)</text>"#,
        (ML + W - MR) / 2.0,
        H - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {0:.1})">relative intensity</text>"#,
        (MT + H - MB) / 2.0
    );

    let mut path = String::new();
    for (j, &(s, i)) in pts.iter().enumerate() {
        let cmd = if j == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{cmd}{:.2} {:.2} ", px(s), py(i));
    }
    let _ = writeln!(
        svg,
        r##"<path d="{path}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##
    );
    if let Some(data) = data {
        for &(s, i) in data {
            let _ = writeln!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="#b03030"/>"##,
                px(s),
                py(i)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Comparison of a model pattern against digitized experimental data.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub scale: f64,
    pub rmse: f64,
    pub model_visibility: Option<f64>,
    pub data_visibility: Option<f64>,
    pub n_data: usize,
}

/// Least-squares single-scale fit of the model onto the data abscissae,
/// with linear interpolation of the model.
pub fn compare(pattern: &DiffractionPattern, data: &[(f64, f64)]) -> Result<ComparisonReport> {
    if data.len() < 10 {
        return Err(Error::Data(format!(
            ">= 10 data rows required, got {}",
            data.len()
        )));
    }
    for w in data.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Data(
                "data positions must be strictly increasing".into(),
            ));
        }
    }
    let model = &pattern.points;
    let (m_lo, m_hi) = (model[0].0, model[model.len() - 1].0);
    if data[0].0 < m_lo || data[data.len() - 1].0 > m_hi {
        return Err(Error::Data(format!(
            "data range [{:.3e}, {:.3e}] m extends beyond the model scan [{m_lo:.3e}, {m_hi:.3e}] m",
            data[0].0,
            data[data.len() - 1].0
        )));
    }

    let interp = |s: f64| -> f64 {
        let j = model.partition_point(|p| p.0 < s).min(model.len() - 1).max(1);
        let (s0, i0) = model[j - 1];
        let (s1, i1) = model[j];
        if s1 == s0 {
            i0
        } else {
            i0 + (i1 - i0) * (s - s0) / (s1 - s0)
        }
    };

    let mut num = 0.0;
    let mut den = 0.0;
    let model_at: Vec<f64> = data.iter().map(|&(s, _)| interp(s)).collect();
    for (&(_, d), &m) in data.iter().zip(model_at.iter()) {
        num += m * d;
        den += m * m;
    }
    if den == 0.0 {
        return Err(Error::Data("model is identically zero on the data range".into()));
    }
    let scale = num / den;
    if scale <= 0.0 {
        return Err(Error::Data(format!(
            "fitted scale {scale:.3e} is not positive; data and model are incompatible"
        )));
    }
    let sse: f64 = data
        .iter()
        .zip(model_at.iter())
        .map(|(&(_, d), &m)| (scale * m - d).powi(2))
        .sum();
    let rmse = (sse / data.len() as f64).sqrt();

    let model_visibility = visibility(pattern).ok();
    let data_pattern = DiffractionPattern {
        points: data.to_vec(),
        meta: PatternMeta {
            nominal_fringe_m: pattern.meta.nominal_fringe_m,
            ..pattern.meta.clone()
        },
    };
    let data_visibility = visibility(&data_pattern).ok();

    Ok(ComparisonReport {
        scale,
        rmse,
        model_visibility,
        data_visibility,
        n_data: data.len(),
    })
}

/// Resolve the worker count: flag, then SLITWAVE_THREADS, then rayon default.
pub fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("SLITWAVE_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

/// Run a closure inside a rayon pool of the requested size.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build thread pool")
            .install(f),
        _ => f(),
    }
}

/// Execute a scan and return the pattern plus a human-readable summary.
pub fn run_scan(config: &RunConfig, threads: Option<usize>) -> Result<(DiffractionPattern, String)> {
    let soft_limit = 0.01 * config.input.geometry.screen_l_m;
    let mut summary = String::new();
    if config.grid.s_min_m.abs().max(config.grid.s_max_m.abs()) > soft_limit {
        let _ = writeln!(
            summary,
            "warning: scan extends beyond |s| = 0.01 L; the paraxial expansion degrades there"
        );
    }
    let pattern = with_pool(threads, || {
        screen_scan(
            &config.input,
            &config.grid,
            config.mode,
            config.normalization,
            &config.truncation,
        )
    })?;
    let fringe = config
        .input
        .geometry
        .nominal_fringe_m(&config.input.particle);
    let _ = writeln!(
        summary,
        "scan: {} points in [{:.3} um, {:.3} um], mode {}, m_max used {}",
        config.grid.n_points,
        config.grid.s_min_m * 1e6,
        config.grid.s_max_m * 1e6,
        config.mode,
        pattern.meta.truncation.m_max
    );
    let _ = writeln!(summary, "nominal fringe spacing: {:.4} um", fringe * 1e6);
    match fringe_spacing(&pattern) {
        Ok(sp) => {
            let _ = writeln!(summary, "measured fringe spacing: {:.4} um", sp * 1e6);
        }
        Err(e) => {
            let _ = writeln!(summary, "measured fringe spacing: n/a ({e})");
        }
    }
    let span = config.grid.s_max_m - config.grid.s_min_m;
    if span >= 3.0 * fringe {
        match visibility(&pattern) {
            Ok(v) => {
                let _ = writeln!(summary, "fringe visibility: {v:.4}");
            }
            Err(e) => {
                let _ = writeln!(summary, "fringe visibility: n/a ({e})");
            }
        }
    } else {
        let _ = writeln!(
            summary,
            "fringe visibility: skipped (scan narrower than 3 fringes)"
        );
    }
    Ok((pattern, summary))
}

/// Cross-check the closed-form screen amplitudes against direct quadrature
/// of the propagation integral at `points` screen positions.
pub fn run_verify(
    input: &ScanInput,
    points: usize,
    rel_tol: f64,
    threads: Option<usize>,
) -> Result<(String, bool)> {
    use rayon::prelude::*;
    // Modest truncation keeps the 2-D quadrature affordable; the comparison
    // uses the same truncation on both routes.
    let trunc = Truncation::new(48, 8, 1e-6)?;
    let spec = QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-8,
        max_subdivisions: 200_000,
    };
    let span = 0.8 * 100e-6;
    let positions: Vec<f64> = (0..points)
        .map(|i| 2e-6 + span * i as f64 / points.max(2) as f64)
        .collect();

    let rows: Vec<(f64, f64, bool)> = with_pool(threads, || {
        positions
            .par_iter()
            .map(|&s| {
                let pt = crate::core::ScreenPoint::new(s, input.geometry.screen_l_m);
                let side = if s.to_bits() % 2 == 0 {
                    SlitSide::Left
                } else {
                    SlitSide::Right
                };
                let amp = match side {
                    SlitSide::Left => input.amplitude_1,
                    SlitSide::Right => input.amplitude_2,
                };
                let closed = diffraction_amplitude(
                    side,
                    &pt,
                    &input.geometry,
                    &input.particle,
                    &trunc,
                    amp,
                );
                let (quad, _) = propagated_amplitude_quadrature(
                    side,
                    &pt,
                    &input.geometry,
                    &input.particle,
                    &trunc,
                    amp,
                    &spec,
                )
                .expect("oracle quadrature failed");
                let rel = (closed - quad).norm() / quad.norm();
                (s, rel, rel <= rel_tol)
            })
            .collect()
    });

    let mut report = String::new();
    let mut all_ok = true;
    for (s, rel, ok) in rows {
        all_ok &= ok;
        let _ = writeln!(
            report,
            "verify s = {:8.2} um: rel err {:.3e} {}",
            s * 1e6,
            rel,
            if ok { "PASS" } else { "FAIL" }
        );
    }
    Ok((report, all_ok))
}

pub fn preset_list() -> String {
    PRESET_NAMES.join("\n")
}

pub fn preset_show(name: &str) -> Result<String> {
    let p = make_preset(name)?;
    let mut out = String::new();
    let _ = writeln!(out, "preset: {}", p.name);
    let _ = writeln!(out, "slit width a        = {:.4e} m", p.geometry.width_a_m);
    let _ = writeln!(out, "slit length b       = {:.4e} m", p.geometry.length_b_m);
    let _ = writeln!(out, "slit thickness c    = {:.4e} m", p.geometry.thickness_c_m);
    let _ = writeln!(out, "slit gap d          = {:.4e} m", p.geometry.gap_d_m);
    let _ = writeln!(out, "screen distance L   = {:.4e} m", p.geometry.screen_l_m);
    let _ = writeln!(out, "wavelength lambda   = {:.4e} m", p.particle.wavelength_m);
    let _ = writeln!(out, "amplitude A1        = {:.4e}", p.amplitude_1);
    let _ = writeln!(out, "amplitude A2        = {:.4e}", p.amplitude_2);
    let _ = writeln!(out, "weights c1, c2      = {}, {}", p.coherence.c1, p.coherence.c2);
    let _ = writeln!(out, "visibility nu       = {}", p.visibility_nu);
    let _ = writeln!(out, "|alpha_t|           = {:.6}", p.coherence.alpha_abs);
    let _ = writeln!(out, "coherence Lambda_t  = {:.6}", p.coherence.lambda_t());
    let _ = writeln!(
        out,
        "fringe spacing      = {:.4e} m",
        p.geometry.nominal_fringe_m(&p.particle)
    );
    Ok(out)
}

/// Data-file unit for the position column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataUnit {
    Micrometers,
    Millimeters,
    Meters,
}

impl DataUnit {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "um" => Ok(Self::Micrometers),
            "mm" => Ok(Self::Millimeters),
            "m" => Ok(Self::Meters),
            _ => Err(Error::Config(format!(
                "data unit must be one of um, mm, m; got '{s}'"
            ))),
        }
    }

    pub fn to_meters(&self, v: f64) -> f64 {
        match self {
            Self::Micrometers => v * 1e-6,
            Self::Millimeters => v * 1e-3,
            Self::Meters => v,
        }
    }
}

/// Read a two-column experimental data CSV (position, counts).
pub fn read_data_csv(path: &Path, unit: DataUnit) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let raw = csv_to_points(&text)?;
    // csv_to_points assumes micrometers; undo and apply the requested unit.
    Ok(raw
        .into_iter()
        .map(|(s, i)| (unit.to_meters(s * 1e6), i))
        .collect())
}

/// Format a comparison report.
pub fn format_report(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "data rows:        {}", report.n_data);
    let _ = writeln!(out, "fitted scale:     {:.6e}", report.scale);
    let _ = writeln!(out, "RMSE:             {:.6e}", report.rmse);
    match report.model_visibility {
        Some(v) => {
            let _ = writeln!(out, "model visibility: {v:.4}");
        }
        None => {
            let _ = writeln!(out, "model visibility: n/a");
        }
    }
    match report.data_visibility {
        Some(v) => {
            let _ = writeln!(out, "data visibility:  {v:.4}");
        }
        None => {
            let _ = writeln!(out, "data visibility:  n/a");
        }
    }
    out
}
