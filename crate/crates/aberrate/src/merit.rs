//! Optical merit functions: refractive power, MTF at half-Nyquist, Strehl
//! ratio, and the optical information gain (OIG).
//!
//! All four reduce an aberrated system to scalar figures of merit against
//! the diffraction-limited reference of the same optical configuration.
//! Strehl and OIG are ratios of trapezoidal integrals of the 1D MTF curves
//! (per measurement axis); refractive power is the second spatial
//! derivative of the wavefront, reported in dioptres.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optics::{
    build_pupil, compute_mtf, compute_psf, Axis, MtfCurve, OpticalConfig, Psf,
};
use crate::zernike::{synthesize_wavefront, WavefrontMap, ZernikeSpectrum};

/// Dioptres per (micrometre / millimetre squared).
///
/// W is held in micrometres and pupil coordinates in millimetres, so a
/// second derivative comes out in um/mm^2. Expanding the SI prefixes:
/// 1 um / (1 mm)^2 = 1e-6 m / 1e-6 m^2 = 1 m^-1, i.e. exactly one
/// dioptre. The prefixes cancel; no numeric scaling is needed.
pub const DIOPTRE_PER_UM_PER_MM2: f64 = 1.0;

/// Second derivative of the wavefront along one axis, in dioptres, with
/// the max-abs summary taken over the eroded disk interior.
#[derive(Debug, Clone)]
pub struct RefractivePowerField {
    dioptres: Array2<f64>,
    max_abs_dioptres: f64,
    axis: Axis,
}

impl RefractivePowerField {
    /// Per-sample power in dioptres; NaN outside the eroded interior.
    pub fn dioptres(&self) -> &Array2<f64> {
        &self.dioptres
    }

    pub fn max_abs_dioptres(&self) -> f64 {
        self.max_abs_dioptres
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }
}

/// `D = d^2 W / d x^2` (or y) by central finite differences on the
/// physical grid, in dioptres.
///
/// The summary maximum is taken over the disk interior eroded by 2
/// samples, which keeps one-sided mask edges out of the stencil and
/// suppresses finite-difference edge artifacts.
pub fn refractive_power(map: &WavefrontMap, axis: Axis) -> Result<RefractivePowerField> {
    let n = map.resolution();
    if n < 128 {
        return Err(Error::config(format!(
            "refractive power needs resolution >= 128, got {n}"
        )));
    }
    let h = map.step_mm();
    let inv_h2 = DIOPTRE_PER_UM_PER_MM2 / (h * h);
    let eroded = erode_mask(map.mask(), 2);
    let w = map.samples();
    let mut d = Array2::<f64>::from_elem((n, n), f64::NAN);
    let mut max_abs = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if !eroded[[r, c]] {
                continue;
            }
            let second = match axis {
                Axis::Horizontal => w[[r, c + 1]] - 2.0 * w[[r, c]] + w[[r, c - 1]],
                Axis::Vertical => w[[r + 1, c]] - 2.0 * w[[r, c]] + w[[r - 1, c]],
            };
            let v = second * inv_h2;
            d[[r, c]] = v;
            max_abs = max_abs.max(v.abs());
        }
    }
    if !max_abs.is_finite() {
        return Err(Error::numeric("refractive power overflowed"));
    }
    Ok(RefractivePowerField {
        dioptres: d,
        max_abs_dioptres: max_abs,
        axis,
    })
}

/// Keep samples whose full Chebyshev neighborhood of the given radius lies
/// inside the mask.
fn erode_mask(mask: &Array2<bool>, radius: usize) -> Array2<bool> {
    let n = mask.nrows();
    let r = radius as isize;
    Array2::from_shape_fn((n, n), |(row, col)| {
        for dr in -r..=r {
            for dc in -r..=r {
                let (rr, cc) = (row as isize + dr, col as isize + dc);
                if rr < 0 || cc < 0 || rr >= n as isize || cc >= n as isize {
                    return false;
                }
                if !mask[[rr as usize, cc as usize]] {
                    return false;
                }
            }
        }
        true
    })
}

fn check_same_axes(aberrated: &MtfCurve, reference: &MtfCurve) -> Result<()> {
    if aberrated.axis() != reference.axis() {
        return Err(Error::data(format!(
            "axis mismatch: {} vs {}",
            aberrated.axis().label(),
            reference.axis().label()
        )));
    }
    if aberrated.frequencies_cpp() != reference.frequencies_cpp() {
        return Err(Error::data(
            "MTF curves sampled on different frequency axes",
        ));
    }
    Ok(())
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (xs[1] - xs[0]) * (ys[0] + ys[1]) * 0.5)
        .sum()
}

/// Strehl ratio as the ratio of MTF area to the diffraction-limited MTF
/// area, both by composite trapezoid over [0, Nyquist].
pub fn strehl_ratio(aberrated: &MtfCurve, reference: &MtfCurve) -> Result<f64> {
    check_same_axes(aberrated, reference)?;
    let f = aberrated.frequencies_cpp();
    let num = trapezoid(f, aberrated.values());
    let den = trapezoid(f, reference.values());
    if !(den > 0.0) {
        return Err(Error::numeric("reference MTF area is not positive"));
    }
    Ok(num / den)
}

/// Optical information gain: like the Strehl ratio but with the MTF
/// squared, which penalizes mid-band contrast loss more heavily.
pub fn oig(aberrated: &MtfCurve, reference: &MtfCurve) -> Result<f64> {
    check_same_axes(aberrated, reference)?;
    let f = aberrated.frequencies_cpp();
    let sq = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| x * x).collect() };
    let num = trapezoid(f, &sq(aberrated.values()));
    let den = trapezoid(f, &sq(reference.values()));
    if !(den > 0.0) {
        return Err(Error::numeric("reference MTF energy is not positive"));
    }
    Ok(num / den)
}

/// MTF linearly interpolated at half the sensor Nyquist frequency
/// (0.25 cycles/pixel).
pub fn mtf_at_half_nyquist(curve: &MtfCurve) -> f64 {
    curve.interpolate(0.25)
}

/// Strehl ratio in its on-axis form: ratio of PSF center samples.
///
/// Equals the spectral-integral form exactly when the aberrated OTF is
/// non-negative over the full 2D plane; for strong aberrations with phase
/// inversion the two forms diverge.
pub fn strehl_peak_ratio(aberrated: &Psf, reference: &Psf) -> Result<f64> {
    if aberrated.size() != reference.size() {
        return Err(Error::data("PSF sizes differ"));
    }
    let den = reference.on_axis();
    if !(den > 0.0) {
        return Err(Error::numeric("reference PSF has no on-axis energy"));
    }
    Ok(aberrated.on_axis() / den)
}

/// Strehl ratio in its 2D spectral-integral form: ratio of the full-plane
/// sums of |OTF|. Diagnostic companion to `strehl_peak_ratio`, used to
/// cross-validate the spatial and spectral forms of the same definition.
pub fn strehl_spectral_2d(aberrated: &Psf, reference: &Psf) -> Result<f64> {
    if aberrated.size() != reference.size() {
        return Err(Error::data("PSF sizes differ"));
    }
    let sum_otf = |psf: &Psf| -> Result<f64> {
        let mut field = psf.samples().mapv(|v| Complex64::new(v, 0.0));
        crate::optics::fft2_in_place(&mut field)?;
        Ok(field.iter().map(|c| c.norm()).sum())
    };
    let den = sum_otf(reference)?;
    if !(den > 0.0) {
        return Err(Error::numeric("reference OTF sum is not positive"));
    }
    Ok(sum_otf(aberrated)? / den)
}

/// All scalar merit figures for one spectrum, both measurement axes.
#[derive(Debug, Clone)]
pub struct OpticalReport {
    pub spectrum: ZernikeSpectrum,
    pub d_x_max: f64,
    pub d_y_max: f64,
    pub mtf_hn_x: f64,
    pub mtf_hn_y: f64,
    pub sr_x: f64,
    pub sr_y: f64,
    pub oig_x: f64,
    pub oig_y: f64,
}

impl OpticalReport {
    pub const CSV_HEADER: &'static str =
        "id,w3,w4,w5,D_x_max,D_y_max,mtf_hn_x,mtf_hn_y,sr_x,sr_y,oig_x,oig_y";

    /// One CSV row in the stable column order of `CSV_HEADER`.
    pub fn csv_row(&self, id: u64) -> String {
        let s = &self.spectrum;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            id,
            s.coefficient(3),
            s.coefficient(4),
            s.coefficient(5),
            self.d_x_max,
            self.d_y_max,
            self.mtf_hn_x,
            self.mtf_hn_y,
            self.sr_x,
            self.sr_y,
            self.oig_x,
            self.oig_y
        )
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sr_x", self.sr_x),
            ("sr_y", self.sr_y),
            ("oig_x", self.oig_x),
            ("oig_y", self.oig_y),
        ] {
            if !(v > 0.0 && v <= 1.0 + 1e-6) {
                return Err(Error::numeric(format!(
                    "{name} = {v} outside (0, 1 + 1e-6]"
                )));
            }
        }
        for (name, v) in [("mtf_hn_x", self.mtf_hn_x), ("mtf_hn_y", self.mtf_hn_y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::numeric(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(self.d_x_max.is_finite() && self.d_y_max.is_finite()) {
            return Err(Error::numeric("refractive power summary not finite"));
        }
        Ok(())
    }

    /// Mean of the two per-axis Strehl ratios.
    pub fn sr_mean(&self) -> f64 {
        0.5 * (self.sr_x + self.sr_y)
    }

    pub fn oig_mean(&self) -> f64 {
        0.5 * (self.oig_x + self.oig_y)
    }

    pub fn mtf_hn_mean(&self) -> f64 {
        0.5 * (self.mtf_hn_x + self.mtf_hn_y)
    }
}

/// Evaluates merit functions against a cached diffraction-limited
/// reference for one optical configuration.
pub struct MeritEngine {
    config: OpticalConfig,
    reference_psf: Psf,
    reference_mtf_h: MtfCurve,
    reference_mtf_v: MtfCurve,
}

impl MeritEngine {
    pub fn new(config: OpticalConfig) -> Result<Self> {
        config.validate()?;
        let zero = ZernikeSpectrum::zero(config.wavelength_um)?;
        let map = synthesize_wavefront(&zero, config.grid_resolution, config.pupil_radius_mm)?;
        let psf = compute_psf(&build_pupil(&map, &config)?)?;
        let mtf_h = compute_mtf(&psf, Axis::Horizontal)?;
        let mtf_v = compute_mtf(&psf, Axis::Vertical)?;
        Ok(Self {
            config,
            reference_psf: psf,
            reference_mtf_h: mtf_h,
            reference_mtf_v: mtf_v,
        })
    }

    pub fn config(&self) -> &OpticalConfig {
        &self.config
    }

    pub fn reference_psf(&self) -> &Psf {
        &self.reference_psf
    }

    pub fn reference_mtf(&self, axis: Axis) -> &MtfCurve {
        match axis {
            Axis::Horizontal => &self.reference_mtf_h,
            Axis::Vertical => &self.reference_mtf_v,
        }
    }

    fn check_wavelength(&self, spectrum: &ZernikeSpectrum) -> Result<()> {
        if (spectrum.wavelength_um() - self.config.wavelength_um).abs() > 1e-12 {
            return Err(Error::data(format!(
                "spectrum wavelength {} um does not match the engine's {} um",
                spectrum.wavelength_um(),
                self.config.wavelength_um
            )));
        }
        Ok(())
    }

    /// Synthesize the wavefront for a spectrum on this engine's grid.
    pub fn wavefront(&self, spectrum: &ZernikeSpectrum) -> Result<WavefrontMap> {
        self.check_wavelength(spectrum)?;
        synthesize_wavefront(
            spectrum,
            self.config.grid_resolution,
            self.config.pupil_radius_mm,
        )
    }

    /// PSF of an aberrated system under this engine's configuration.
    pub fn psf(&self, spectrum: &ZernikeSpectrum) -> Result<Psf> {
        let map = self.wavefront(spectrum)?;
        compute_psf(&build_pupil(&map, &self.config)?)
    }

    /// Full merit report for one spectrum.
    pub fn report(&self, spectrum: &ZernikeSpectrum) -> Result<OpticalReport> {
        let map = self.wavefront(spectrum)?;
        let psf = compute_psf(&build_pupil(&map, &self.config)?)?;
        let mtf_h = compute_mtf(&psf, Axis::Horizontal)?;
        let mtf_v = compute_mtf(&psf, Axis::Vertical)?;
        let report = OpticalReport {
            spectrum: spectrum.clone(),
            d_x_max: refractive_power(&map, Axis::Horizontal)?.max_abs_dioptres(),
            d_y_max: refractive_power(&map, Axis::Vertical)?.max_abs_dioptres(),
            mtf_hn_x: mtf_at_half_nyquist(&mtf_h),
            mtf_hn_y: mtf_at_half_nyquist(&mtf_v),
            sr_x: strehl_ratio(&mtf_h, &self.reference_mtf_h)?,
            sr_y: strehl_ratio(&mtf_v, &self.reference_mtf_v)?,
            oig_x: oig(&mtf_h, &self.reference_mtf_h)?,
            oig_y: oig(&mtf_v, &self.reference_mtf_v)?,
        };
        report.validate()?;
        Ok(report)
    }
}
