//! Generalized pupil, incoherent PSF, and MTF via discrete Fourier optics.
//!
//! The model is the scalar Fresnel chain: a circular aperture of radius R
//! carries a wavefront error W (micrometres); the generalized pupil is
//! `P(x_a) * exp(2 pi i W(x_a) / lambda)`; the amplitude impulse response
//! is the centered Fourier transform of the zero-padded pupil; the PSF is
//! its squared magnitude, normalized to unit sum; the MTF is the magnitude
//! of the PSF's spectrum along a central frequency axis, normalized to one
//! at zero frequency.
//!
//! Sampling bookkeeping: with grid resolution N over the pupil diameter 2R
//! and a pad factor c (transform size M = c N), the observer-plane sample
//! pitch is `lambda d_z / (2 R c)`. The default configuration chooses the
//! sensor pixel pitch equal to that value, which lands the sensor Nyquist
//! frequency (0.5 cycles/pixel) exactly on the optical cutoff
//! `2R / (lambda d_z)`, so MTF curves span the full support with no
//! interpolation. Coarser sensors (p larger than the PSF pitch) are
//! resampled; finer sensors are rejected because the simulation cannot
//! supply information beyond its own Nyquist limit.

use std::cell::RefCell;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zernike::WavefrontMap;

/// Optical system parameters. Units: micrometres for wavelength and pixel
/// pitch, millimetres for pupil radius and propagation distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    pub wavelength_um: f64,
    pub pupil_radius_mm: f64,
    pub distance_mm: f64,
    pub grid_resolution: usize,
    pub pad_factor: usize,
    pub pixel_pitch_um: f64,
}

impl Default for OpticalConfig {
    /// Visible-band desk-scale defaults: lambda 0.55 um, R 4 mm, d_z 25 mm,
    /// N 512, pad factor 2. The pixel pitch equals the PSF sample pitch
    /// (0.859375 um) so that sensor Nyquist = optical cutoff.
    fn default() -> Self {
        let cfg = OpticalConfig {
            wavelength_um: 0.55,
            pupil_radius_mm: 4.0,
            distance_mm: 25.0,
            grid_resolution: 512,
            pad_factor: 2,
            pixel_pitch_um: 0.0,
        };
        OpticalConfig {
            pixel_pitch_um: cfg.psf_pitch_um(),
            ..cfg
        }
    }
}

impl OpticalConfig {
    /// Observer-plane sample pitch `lambda d_z / (2 R pad)` in micrometres
    /// (um * mm / mm = um).
    pub fn psf_pitch_um(&self) -> f64 {
        self.wavelength_um * self.distance_mm
            / (2.0 * self.pupil_radius_mm * self.pad_factor as f64)
    }

    /// Optical cutoff frequency `2R / (lambda d_z)` in cycles per micrometre.
    pub fn cutoff_cy_per_um(&self) -> f64 {
        2.0 * self.pupil_radius_mm / (self.wavelength_um * self.distance_mm)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength_um", self.wavelength_um),
            ("pupil_radius_mm", self.pupil_radius_mm),
            ("distance_mm", self.distance_mm),
            ("pixel_pitch_um", self.pixel_pitch_um),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_resolution < 64 || self.grid_resolution % 2 != 0 {
            return Err(Error::config(format!(
                "grid_resolution must be even and >= 64, got {}",
                self.grid_resolution
            )));
        }
        if self.pad_factor < 1 {
            return Err(Error::config("pad_factor must be >= 1"));
        }
        if self.pixel_pitch_um < self.psf_pitch_um() * (1.0 - 1e-9) {
            return Err(Error::config(format!(
                "pixel_pitch_um {} is finer than the simulated PSF pitch {}; \
                 increase the pitch or the pad factor",
                self.pixel_pitch_um,
                self.psf_pitch_um()
            )));
        }
        Ok(())
    }
}

/// Generalized pupil: binary circular amplitude with the wavefront error as
/// pure phase. Every sample has magnitude exactly 0 or 1.
#[derive(Debug, Clone)]
pub struct PupilFunction {
    data: Array2<Complex64>,
    config: OpticalConfig,
}

impl PupilFunction {
    pub fn samples(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn config(&self) -> &OpticalConfig {
        &self.config
    }
}

/// `P(x_a) * exp(2 pi i W / lambda)` inside the disk, zero outside.
///
/// The map's grid must match the config (resolution and pupil radius).
pub fn build_pupil(map: &WavefrontMap, config: &OpticalConfig) -> Result<PupilFunction> {
    config.validate()?;
    if map.resolution() != config.grid_resolution {
        return Err(Error::data(format!(
            "wavefront resolution {} does not match config grid_resolution {}",
            map.resolution(),
            config.grid_resolution
        )));
    }
    if (map.pupil_radius_mm() - config.pupil_radius_mm).abs() > 1e-12 {
        return Err(Error::data(format!(
            "wavefront pupil radius {} mm does not match config {} mm",
            map.pupil_radius_mm(),
            config.pupil_radius_mm
        )));
    }
    let n = map.resolution();
    let mut data = Array2::<Complex64>::zeros((n, n));
    let k = 2.0 * std::f64::consts::PI / config.wavelength_um;
    for row in 0..n {
        for col in 0..n {
            if map.mask()[[row, col]] {
                let phase = k * map.samples()[[row, col]];
                data[[row, col]] = Complex64::new(phase.cos(), phase.sin());
            }
        }
    }
    Ok(PupilFunction {
        data,
        config: config.clone(),
    })
}

/// Incoherent point spread function: non-negative M x M samples
/// (M = N * pad_factor), unit sum, peak of the unaberrated system exactly
/// at the grid center sample (M/2, M/2).
#[derive(Debug, Clone)]
pub struct Psf {
    data: Array2<f64>,
    pitch_um: f64,
    normalized: bool,
    config: OpticalConfig,
}

impl Psf {
    pub fn samples(&self) -> &Array2<f64> {
        &self.data
    }

    /// Observer-plane sample pitch in micrometres.
    pub fn pitch_um(&self) -> f64 {
        self.pitch_um
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn config(&self) -> &OpticalConfig {
        &self.config
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    /// Center sample index (peak position of the unaberrated system).
    pub fn center(&self) -> usize {
        self.size() / 2
    }

    /// On-axis value, i.e. the sample at the grid center.
    pub fn on_axis(&self) -> f64 {
        self.data[[self.center(), self.center()]]
    }
}

/// `PSF = |F[pupil, zero-padded to M]|^2 / sum`.
///
/// Centering: the N x N pupil sits at offset (M-N)/2 of the M x M frame;
/// half-spectrum swaps before and after the transform keep the result
/// centered, so the unaberrated peak lands exactly on sample (M/2, M/2).
pub fn compute_psf(pupil: &PupilFunction) -> Result<Psf> {
    let cfg = &pupil.config;
    let n = cfg.grid_resolution;
    let m = n * cfg.pad_factor;
    let mut field = Array2::<Complex64>::zeros((m, m));
    let off = (m - n) / 2;
    for row in 0..n {
        for col in 0..n {
            field[[off + row, off + col]] = pupil.data[[row, col]];
        }
    }
    fftshift2(&mut field);
    fft2_in_place(&mut field)?;
    let mut psf = field.mapv(|c| c.norm_sqr());
    fftshift2(&mut psf);
    let sum: f64 = psf.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return Err(Error::numeric(format!("PSF energy is not positive: {sum}")));
    }
    psf.mapv_inplace(|v| v / sum);
    Ok(Psf {
        data: psf,
        pitch_um: cfg.psf_pitch_um(),
        normalized: true,
        config: cfg.clone(),
    })
}

/// Measurement axis of a one-dimensional curve through the 2D spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Frequencies along x (columns); the response a vertical edge probes.
    Horizontal,
    /// Frequencies along y (rows).
    Vertical,
}

impl Axis {
    pub fn label(&self) -> &'static str {
        match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        }
    }
}

/// MTF sampled on a uniform frequency axis from 0 to the sensor Nyquist
/// (0.5 cycles/pixel). The zero-frequency value is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MtfCurve {
    frequencies_cpp: Vec<f64>,
    values: Vec<f64>,
    axis: Axis,
}

impl MtfCurve {
    pub fn new(frequencies_cpp: Vec<f64>, values: Vec<f64>, axis: Axis) -> Result<Self> {
        if frequencies_cpp.len() != values.len() || frequencies_cpp.len() < 2 {
            return Err(Error::data("MTF curve needs >= 2 matched samples"));
        }
        if frequencies_cpp[0] != 0.0 || values[0] != 1.0 {
            return Err(Error::data(
                "MTF curve must start at frequency 0 with value exactly 1",
            ));
        }
        if frequencies_cpp.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::data("MTF frequency axis must be increasing"));
        }
        if values.iter().any(|&v| !(0.0..=1.0 + 1e-6).contains(&v)) {
            return Err(Error::data("MTF values must lie in [0, 1 + 1e-6]"));
        }
        Ok(Self {
            frequencies_cpp,
            values,
            axis,
        })
    }

    pub fn frequencies_cpp(&self) -> &[f64] {
        &self.frequencies_cpp
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Linear interpolation at `freq_cpp`; clamps to the last value beyond
    /// the axis end.
    pub fn interpolate(&self, freq_cpp: f64) -> f64 {
        let f = &self.frequencies_cpp;
        if freq_cpp <= f[0] {
            return self.values[0];
        }
        if freq_cpp >= *f.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let i = f.partition_point(|&x| x <= freq_cpp);
        let (x0, x1) = (f[i - 1], f[i]);
        let t = (freq_cpp - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }
}

/// Project the PSF onto one axis (the line spread function of that axis).
/// `Horizontal` sums out rows, leaving a function of the column coordinate.
pub fn psf_projection(psf: &Psf, axis: Axis) -> Vec<f64> {
    let m = psf.size();
    let mut proj = vec![0.0f64; m];
    match axis {
        Axis::Horizontal => {
            for row in psf.data.rows() {
                for (c, &v) in row.iter().enumerate() {
                    proj[c] += v;
                }
            }
        }
        Axis::Vertical => {
            for (r, row) in psf.data.rows().into_iter().enumerate() {
                proj[r] = row.sum();
            }
        }
    }
    proj
}

/// One-sided magnitude spectrum of the PSF projection at the simulation's
/// native frequency spacing, DC-normalized: the central slice of the 2D
/// MTF along the chosen axis, over the full band up to the grid Nyquist.
///
/// Returns (frequencies in cycles/pixel of the sensor pitch, magnitudes).
/// Intended for diagnostics and identity tests; `compute_mtf` is the
/// sensor-domain production variant.
pub fn mtf_slice_native(psf: &Psf, axis: Axis) -> Result<(Vec<f64>, Vec<f64>)> {
    if !psf.normalized {
        return Err(Error::data("MTF requires a normalized PSF"));
    }
    let m = psf.size();
    let proj = psf_projection(psf, axis);
    // center the projection at index 0 (even-length half rotation)
    let mut line: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(proj[(i + m / 2) % m], 0.0))
        .collect();
    fft_line(&mut line)?;
    let dc = line[0].norm();
    if !(dc > 0.0) {
        return Err(Error::numeric("projection has zero DC component"));
    }
    let mags: Vec<f64> = line[..=m / 2].iter().map(|c| c.norm() / dc).collect();
    let cfg = psf.config();
    let scale = cfg.pixel_pitch_um / (m as f64 * psf.pitch_um);
    let freqs: Vec<f64> = (0..=m / 2).map(|k| k as f64 * scale).collect();
    Ok((freqs, mags))
}

/// MTF along a central axis, on a uniform frequency axis from 0 to the
/// sensor Nyquist (0.5 cycles/pixel), M/2 + 1 points.
///
/// At the default configuration the sensor pitch equals the PSF pitch and
/// the native spectrum bins map one-to-one onto the output axis; coarser
/// sensors interpolate the native magnitude spectrum linearly.
pub fn compute_mtf(psf: &Psf, axis: Axis) -> Result<MtfCurve> {
    let (native_f, native_v) = mtf_slice_native(psf, axis)?;
    let m = psf.size();
    let points = m / 2 + 1;
    let step = 0.5 / (points - 1) as f64;
    let native_step = native_f[1];
    let mut freqs = Vec::with_capacity(points);
    let mut values = Vec::with_capacity(points);
    for j in 0..points {
        let nu = j as f64 * step;
        freqs.push(nu);
        let pos = nu / native_step;
        let k = pos.floor() as usize;
        let t = pos - k as f64;
        let v = if k + 1 < native_v.len() {
            if t < 1e-12 {
                native_v[k]
            } else {
                native_v[k] * (1.0 - t) + native_v[k + 1] * t
            }
        } else {
            *native_v.last().unwrap()
        };
        values.push(v.min(1.0 + 1e-6));
    }
    values[0] = 1.0;
    MtfCurve::new(freqs, values, axis)
}

/// Intensity of the coherent diffraction integral at fractional sample
/// offsets along the +x axis through the PSF center, normalized by the
/// on-axis value.
///
/// Evaluates `|sum_pupil P(x) exp(-2 pi i u x / M)|^2` directly instead of
/// reading FFT samples, so ring positions can be located at sub-sample
/// precision (the first Airy zero falls between grid samples).
pub fn psf_axial_intensity(pupil: &PupilFunction, offsets_samples: &[f64]) -> Vec<f64> {
    let cfg = &pupil.config;
    let n = cfg.grid_resolution;
    let m = (n * cfg.pad_factor) as f64;
    let off = (n * cfg.pad_factor - n) / 2;
    // collapse rows: the transform along x only sees column sums
    let mut col_sums = vec![Complex64::default(); n];
    for row in pupil.data.rows() {
        for (c, v) in row.iter().enumerate() {
            col_sums[c] += v;
        }
    }
    let center = m / 2.0;
    let amplitude = |u: f64| -> f64 {
        let mut acc = Complex64::default();
        for (c, &w) in col_sums.iter().enumerate() {
            let x = (off + c) as f64 - center;
            let ph = -2.0 * std::f64::consts::PI * u * x / m;
            acc += w * Complex64::new(ph.cos(), ph.sin());
        }
        acc.norm_sqr()
    };
    let peak = amplitude(0.0);
    offsets_samples.iter().map(|&u| amplitude(u) / peak).collect()
}

/// Analytic diffraction-limited MTF of a circular aperture at normalized
/// frequency `x = nu / nu_cutoff`:
/// `(2/pi) (acos x - x sqrt(1 - x^2))` for x <= 1, zero beyond cutoff.
pub fn diffraction_mtf(x: f64) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    let x = x.max(0.0);
    (2.0 / std::f64::consts::PI) * (x.acos() - x * (1.0 - x * x).sqrt())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_line(line: &mut [Complex64]) -> Result<()> {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(line.len());
        fft.process(line);
    });
    Ok(())
}

/// In-place 2D forward FFT: rows, transpose, rows, transpose back.
pub(crate) fn fft2_in_place(data: &mut Array2<Complex64>) -> Result<()> {
    fft2_dir(data, true)
}

/// In-place 2D inverse FFT, unnormalized (caller divides by the area).
pub(crate) fn ifft2_in_place(data: &mut Array2<Complex64>) -> Result<()> {
    fft2_dir(data, false)
}

fn fft2_dir(data: &mut Array2<Complex64>, forward: bool) -> Result<()> {
    let (rows, cols) = data.dim();
    PLANNER.with(|p| {
        let plan = |len: usize| {
            if forward {
                p.borrow_mut().plan_fft_forward(len)
            } else {
                p.borrow_mut().plan_fft_inverse(len)
            }
        };
        let fft_cols = plan(cols);
        let mut scratch = vec![Complex64::default(); fft_cols.get_inplace_scratch_len()];
        let slice = data
            .as_slice_mut()
            .expect("row-major layout");
        for row in slice.chunks_exact_mut(cols) {
            fft_cols.process_with_scratch(row, &mut scratch);
        }
        let mut t = transpose(data);
        let fft_rows = plan(rows);
        let mut scratch = vec![Complex64::default(); fft_rows.get_inplace_scratch_len()];
        let t_slice = t.as_slice_mut().expect("row-major layout");
        for row in t_slice.chunks_exact_mut(rows) {
            fft_rows.process_with_scratch(row, &mut scratch);
        }
        *data = transpose(&t);
    });
    Ok(())
}

fn transpose(data: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = data.dim();
    let mut out = Array2::<Complex64>::zeros((cols, rows));
    for r in 0..rows {
        for c in 0..cols {
            out[[c, r]] = data[[r, c]];
        }
    }
    out
}

/// Swap diagonally opposite quadrants; for even sizes this is its own
/// inverse and maps index 0 <-> M/2.
pub(crate) fn fftshift2<T: Clone>(data: &mut Array2<T>) {
    let (rows, cols) = data.dim();
    assert!(rows % 2 == 0 && cols % 2 == 0, "fftshift needs even dims");
    let (hr, hc) = (rows / 2, cols / 2);
    for r in 0..hr {
        for c in 0..cols {
            let (r2, c2) = (r + hr, (c + hc) % cols);
            let tmp = data[[r, c]].clone();
            data[[r, c]] = data[[r2, c2]].clone();
            data[[r2, c2]] = tmp;
        }
    }
}
