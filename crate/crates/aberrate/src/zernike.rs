//! Orthonormal Zernike basis on the unit disk: evaluation, wavefront
//! synthesis, and decomposition.
//!
//! Single-index convention (ANSI/OSA ordering, `j = [n(n+2)+m]/2`), with
//! unit-RMS (orthonormal) normalization so that `<Z_j, Z_k> = delta_jk`
//! under the disk-average inner product:
//!
//! | j  | (n, m)  | polynomial                  | name                  |
//! |----|---------|-----------------------------|-----------------------|
//! | 0  | (0, 0)  | 1                           | piston                |
//! | 1  | (1,-1)  | 2 rho sin(phi)              | tilt y                |
//! | 2  | (1, 1)  | 2 rho cos(phi)              | tilt x                |
//! | 3  | (2,-2)  | sqrt6 rho^2 sin(2phi)       | oblique astigmatism   |
//! | 4  | (2, 0)  | sqrt3 (2 rho^2 - 1)         | defocus               |
//! | 5  | (2, 2)  | sqrt6 rho^2 cos(2phi)       | vertical astigmatism  |
//! | 6  | (3,-3)  | sqrt8 rho^3 sin(3phi)       | vertical trefoil      |
//! | 7  | (3,-1)  | sqrt8 (3rho^3-2rho) sin(phi)| vertical coma         |
//! | 8  | (3, 1)  | sqrt8 (3rho^3-2rho) cos(phi)| horizontal coma       |
//! | 9  | (3, 3)  | sqrt8 rho^3 cos(3phi)       | oblique trefoil       |
//! | 10 | (4,-4)  | sqrt10 rho^4 sin(4phi)      | oblique quadrafoil    |
//! | 11 | (4,-2)  | sqrt10 (4rho^4-3rho^2) sin(2phi) | oblique 2nd astig |
//! | 12 | (4, 0)  | sqrt5 (6rho^4-6rho^2+1)     | primary spherical     |
//! | 13 | (4, 2)  | sqrt10 (4rho^4-3rho^2) cos(2phi) | vertical 2nd astig|
//! | 14 | (4, 4)  | sqrt10 rho^4 cos(4phi)      | vertical quadrafoil   |
//!
//! Wavefront maps are sampled at pixel centers of an N x N grid spanning
//! [-R, R]^2; the disk mask keeps pixels whose center satisfies rho <= 1
//! (half-open boundary convention). Samples outside the mask are exactly
//! zero. Coefficients carry micrometres; the pupil radius carries
//! millimetres.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest supported single index (fourth radial order).
pub const MAX_INDEX: usize = 14;

/// Unit-RMS normalization constant N_j, i.e. the factor between the
/// unnormalized polynomial (R_n^m trig, peak value 1 at the rim) and the
/// orthonormal one. Converts coefficients of unnormalized polynomials
/// (the convention of ISO 24157-style instrument reports) into
/// orthonormal coefficients: `omega_orthonormal = c_unnormalized / N_j`.
pub fn renormalization_factor(index: usize) -> Result<f64> {
    let (n, m) = index_to_nm(index)?;
    Ok(if m == 0 {
        ((n + 1) as f64).sqrt()
    } else {
        (2.0 * (n + 1) as f64).sqrt()
    })
}

/// ANSI/OSA single index -> (radial order n, azimuthal frequency m).
pub fn index_to_nm(index: usize) -> Result<(usize, i32)> {
    if index > MAX_INDEX {
        return Err(Error::config(format!(
            "basis index {index} unsupported; implemented range is 0..={MAX_INDEX}"
        )));
    }
    // smallest radial order n whose block [n(n+1)/2 .. n(n+3)/2] holds index
    let mut n = 0usize;
    while n * (n + 3) / 2 < index {
        n += 1;
    }
    let m = 2 * index as i32 - (n * (n + 2)) as i32;
    debug_assert!(m.unsigned_abs() as usize <= n && (n as i32 + m) % 2 == 0);
    Ok((n, m))
}

/// Evaluate the orthonormal Zernike polynomial `Z_index` at polar
/// coordinates on the unit disk.
///
/// `rho` must lie in [0, 1]; `phi` is the polar angle in radians.
pub fn evaluate_basis(index: usize, rho: f64, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) || !rho.is_finite() {
        return Err(Error::numeric(format!(
            "normalized radius {rho} outside [0, 1]"
        )));
    }
    if index > MAX_INDEX {
        return Err(Error::config(format!(
            "basis index {index} unsupported; implemented range is 0..={MAX_INDEX}"
        )));
    }
    Ok(eval_unchecked(index, rho, phi))
}

/// Polynomial table; callers guarantee `index <= MAX_INDEX` and rho in [0,1].
#[inline]
fn eval_unchecked(index: usize, rho: f64, phi: f64) -> f64 {
    let r2 = rho * rho;
    match index {
        0 => 1.0,
        1 => 2.0 * rho * phi.sin(),
        2 => 2.0 * rho * phi.cos(),
        3 => SQRT6 * r2 * (2.0 * phi).sin(),
        4 => SQRT3 * (2.0 * r2 - 1.0),
        5 => SQRT6 * r2 * (2.0 * phi).cos(),
        6 => SQRT8 * r2 * rho * (3.0 * phi).sin(),
        7 => SQRT8 * (3.0 * r2 - 2.0) * rho * phi.sin(),
        8 => SQRT8 * (3.0 * r2 - 2.0) * rho * phi.cos(),
        9 => SQRT8 * r2 * rho * (3.0 * phi).cos(),
        10 => SQRT10 * r2 * r2 * (4.0 * phi).sin(),
        11 => SQRT10 * (4.0 * r2 - 3.0) * r2 * (2.0 * phi).sin(),
        12 => SQRT5 * (6.0 * r2 * r2 - 6.0 * r2 + 1.0),
        13 => SQRT10 * (4.0 * r2 - 3.0) * r2 * (2.0 * phi).cos(),
        14 => SQRT10 * r2 * r2 * (4.0 * phi).cos(),
        _ => unreachable!("index checked against MAX_INDEX"),
    }
}

const SQRT3: f64 = 1.7320508075688772;
const SQRT5: f64 = 2.23606797749979;
const SQRT6: f64 = 2.449489742783178;
const SQRT8: f64 = 2.8284271247461903;
const SQRT10: f64 = 3.1622776601683795;

/// A set of Zernike coefficients (micrometres) with the design wavelength
/// they are meant to be compared against. One spectrum parameterizes one
/// windshield/aberration configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ZernikeSpectrum {
    coefficients: BTreeMap<usize, f64>,
    wavelength_um: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumDoc {
    wavelength_um: f64,
    coefficients: BTreeMap<String, f64>,
}

impl ZernikeSpectrum {
    /// Coefficients in micrometres, indices in `0..=MAX_INDEX`, wavelength
    /// in micrometres (> 0). Zero-valued entries are kept as given.
    pub fn new(coefficients: BTreeMap<usize, f64>, wavelength_um: f64) -> Result<Self> {
        if !(wavelength_um > 0.0) || !wavelength_um.is_finite() {
            return Err(Error::config(format!(
                "wavelength must be positive and finite, got {wavelength_um}"
            )));
        }
        for (&n, &w) in &coefficients {
            if n > MAX_INDEX {
                return Err(Error::config(format!(
                    "coefficient index {n} unsupported; implemented range is 0..={MAX_INDEX}"
                )));
            }
            if !w.is_finite() {
                return Err(Error::config(format!("coefficient {n} is not finite: {w}")));
            }
        }
        Ok(Self {
            coefficients,
            wavelength_um,
        })
    }

    /// Empty (diffraction-limited) spectrum.
    pub fn zero(wavelength_um: f64) -> Result<Self> {
        Self::new(BTreeMap::new(), wavelength_um)
    }

    pub fn wavelength_um(&self) -> f64 {
        self.wavelength_um
    }

    /// Coefficient omega_n in micrometres; absent indices read as zero.
    pub fn coefficient(&self, index: usize) -> f64 {
        self.coefficients.get(&index).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, f64> {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.values().all(|&w| w == 0.0)
    }

    /// Wavefront RMS sigma_W over the disk contributed by shape-changing
    /// terms: sqrt(sum of omega_n^2 for n >= 3). Piston and tilt move or
    /// offset the wavefront without curving it, so they are excluded.
    pub fn aberration_rms_um(&self) -> f64 {
        self.coefficients
            .iter()
            .filter(|(&n, _)| n >= 3)
            .map(|(_, &w)| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Spectrum with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.coefficients
                .iter()
                .map(|(&n, &w)| (n, factor * w))
                .collect(),
            self.wavelength_um,
        )
    }

    /// Coefficient-wise sum; wavelengths must agree.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.wavelength_um != other.wavelength_um {
            return Err(Error::config(format!(
                "wavelength mismatch: {} vs {}",
                self.wavelength_um, other.wavelength_um
            )));
        }
        let mut sum = self.coefficients.clone();
        for (&n, &w) in &other.coefficients {
            *sum.entry(n).or_insert(0.0) += w;
        }
        Self::new(sum, self.wavelength_um)
    }

    /// Spectrum restricted to `keep`: coefficients of all other indices are
    /// dropped (set to the zero baseline).
    pub fn restricted_to(&self, keep: &[usize]) -> Result<Self> {
        Self::new(
            self.coefficients
                .iter()
                .filter(|(n, _)| keep.contains(n))
                .map(|(&n, &w)| (n, w))
                .collect(),
            self.wavelength_um,
        )
    }

    /// Parse the plain-text document form:
    /// `{"wavelength_um": 0.55, "coefficients": {"3": -0.2, "4": 0.5}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectrumDoc = serde_json::from_str(text)
            .map_err(|e| Error::data(format!("spectrum document: {e}")))?;
        let mut coefficients = BTreeMap::new();
        for (key, value) in doc.coefficients {
            let index: usize = key.parse().map_err(|_| {
                Error::data(format!("spectrum coefficient key {key:?} is not an index"))
            })?;
            if coefficients.insert(index, value).is_some() {
                return Err(Error::data(format!("duplicate coefficient index {index}")));
            }
        }
        Self::new(coefficients, doc.wavelength_um)
    }

    pub fn to_json(&self) -> String {
        let doc = SpectrumDoc {
            wavelength_um: self.wavelength_um,
            coefficients: self
                .coefficients
                .iter()
                .map(|(n, w)| (n.to_string(), *w))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("spectrum serialization cannot fail")
    }
}

/// Sampled wavefront aberration map W (micrometres) on the pupil disk.
#[derive(Debug, Clone)]
pub struct WavefrontMap {
    w: Array2<f64>,
    mask: Array2<bool>,
    pupil_radius_mm: f64,
}

impl WavefrontMap {
    /// Validates the grid contract: N x N with N >= 64 and even, samples
    /// outside the mask exactly zero, all values finite.
    pub fn new(w: Array2<f64>, mask: Array2<bool>, pupil_radius_mm: f64) -> Result<Self> {
        let (rows, cols) = w.dim();
        if rows != cols || mask.dim() != (rows, cols) {
            return Err(Error::data(format!(
                "wavefront grid must be square with matching mask, got {rows}x{cols}"
            )));
        }
        if rows < 64 || rows % 2 != 0 {
            return Err(Error::config(format!(
                "grid resolution must be even and >= 64, got {rows}"
            )));
        }
        if !(pupil_radius_mm > 0.0) {
            return Err(Error::config(format!(
                "pupil radius must be positive, got {pupil_radius_mm}"
            )));
        }
        for (v, &inside) in w.iter().zip(mask.iter()) {
            if !v.is_finite() {
                return Err(Error::numeric("wavefront sample is not finite"));
            }
            if !inside && *v != 0.0 {
                return Err(Error::data(
                    "wavefront samples outside the disk mask must be exactly zero",
                ));
            }
        }
        Ok(Self {
            w,
            mask,
            pupil_radius_mm,
        })
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn mask(&self) -> &Array2<bool> {
        &self.mask
    }

    pub fn pupil_radius_mm(&self) -> f64 {
        self.pupil_radius_mm
    }

    pub fn resolution(&self) -> usize {
        self.w.nrows()
    }

    /// Physical grid step in millimetres (pixel pitch of the pupil plane).
    pub fn step_mm(&self) -> f64 {
        2.0 * self.pupil_radius_mm / self.resolution() as f64
    }
}

/// Pixel-center coordinate of sample `i` on an N-sample axis spanning
/// [-R, R], in the same unit as `radius`.
#[inline]
pub(crate) fn pixel_center(i: usize, n: usize, radius: f64) -> f64 {
    (i as f64 + 0.5) * 2.0 * radius / n as f64 - radius
}

/// Sample `W(rho, phi) = sum_n omega_n Z_n(rho, phi)` on an N x N grid
/// spanning [-R, R]^2 (pixel centers), zero outside the disk.
///
/// An empty spectrum yields the all-zero (diffraction-limited) map.
pub fn synthesize_wavefront(
    spectrum: &ZernikeSpectrum,
    resolution: usize,
    pupil_radius_mm: f64,
) -> Result<WavefrontMap> {
    if resolution < 64 || resolution % 2 != 0 {
        return Err(Error::config(format!(
            "grid resolution must be even and >= 64, got {resolution}"
        )));
    }
    if !(pupil_radius_mm > 0.0) || !pupil_radius_mm.is_finite() {
        return Err(Error::config(format!(
            "pupil radius must be positive, got {pupil_radius_mm}"
        )));
    }
    let n = resolution;
    let modes: Vec<(usize, f64)> = spectrum
        .coefficients()
        .iter()
        .map(|(&i, &w)| (i, w))
        .collect();
    let mut w = Array2::<f64>::zeros((n, n));
    let mut mask = Array2::<bool>::from_elem((n, n), false);
    for row in 0..n {
        let y = pixel_center(row, n, pupil_radius_mm);
        for col in 0..n {
            let x = pixel_center(col, n, pupil_radius_mm);
            let rho = (x * x + y * y).sqrt() / pupil_radius_mm;
            if rho <= 1.0 {
                mask[[row, col]] = true;
                if !modes.is_empty() {
                    let phi = y.atan2(x);
                    w[[row, col]] = modes
                        .iter()
                        .map(|&(i, coeff)| coeff * eval_unchecked(i, rho, phi))
                        .sum();
                }
            }
        }
    }
    WavefrontMap::new(w, mask, pupil_radius_mm)
}

/// Recover coefficients by the discrete inner product over the disk,
/// `omega_n = <W, Z_n>` with the disk-average weighting (mean over mask
/// samples). Round-trips `synthesize_wavefront` within discretization
/// tolerance (better than 1e-3 per coefficient at N = 512).
///
/// The map does not carry a wavelength, so the design wavelength of the
/// resulting spectrum is an explicit argument.
pub fn decompose_wavefront(
    map: &WavefrontMap,
    max_index: usize,
    wavelength_um: f64,
) -> Result<ZernikeSpectrum> {
    if max_index > MAX_INDEX {
        return Err(Error::config(format!(
            "max_index {max_index} unsupported; implemented range is 0..={MAX_INDEX}"
        )));
    }
    let n = map.resolution();
    let inside = map.mask().iter().filter(|&&m| m).count();
    if inside < 64 * 64 {
        return Err(Error::config(format!(
            "decomposition needs >= {} samples inside the mask, got {inside}",
            64 * 64
        )));
    }
    let r = map.pupil_radius_mm();
    let mut sums = vec![0.0f64; max_index + 1];
    for row in 0..n {
        let y = pixel_center(row, n, r);
        for col in 0..n {
            if !map.mask()[[row, col]] {
                continue;
            }
            let x = pixel_center(col, n, r);
            let rho = ((x * x + y * y).sqrt() / r).min(1.0);
            let phi = y.atan2(x);
            let w = map.samples()[[row, col]];
            for (index, sum) in sums.iter_mut().enumerate() {
                *sum += w * eval_unchecked(index, rho, phi);
            }
        }
    }
    let coefficients = sums
        .into_iter()
        .enumerate()
        .map(|(index, s)| (index, s / inside as f64))
        .collect();
    ZernikeSpectrum::new(coefficients, wavelength_um)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn piston_is_constant() {
        assert_eq!(evaluate_basis(0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(evaluate_basis(0, 0.0, -2.0).unwrap(), 1.0);
    }

    #[test]
    fn pinned_defocus_and_astigmatism_values() {
        // Z4 = sqrt3 (2 rho^2 - 1) at the rim.
        assert_abs_diff_eq!(
            evaluate_basis(4, 1.0, 0.0).unwrap(),
            3.0f64.sqrt(),
            epsilon = 1e-12
        );
        // Z3 = sqrt6 rho^2 sin(2 phi) at rho = 0.7, phi = pi/4.
        assert_abs_diff_eq!(
            evaluate_basis(3, 0.7, std::f64::consts::FRAC_PI_4).unwrap(),
            6.0f64.sqrt() * 0.49,
            epsilon = 1e-12
        );
    }

    #[test]
    fn index_mapping_matches_table() {
        let expect = [
            (0, 0),
            (1, -1),
            (1, 1),
            (2, -2),
            (2, 0),
            (2, 2),
            (3, -3),
            (3, -1),
            (3, 1),
            (3, 3),
            (4, -4),
            (4, -2),
            (4, 0),
            (4, 2),
            (4, 4),
        ];
        for (j, &(n, m)) in expect.iter().enumerate() {
            assert_eq!(index_to_nm(j).unwrap(), (n, m), "index {j}");
        }
        assert!(index_to_nm(MAX_INDEX + 1).is_err());
    }

    #[test]
    fn radius_domain_is_enforced() {
        assert!(evaluate_basis(4, 1.0 + 1e-9, 0.0).is_err());
        assert!(evaluate_basis(4, -0.1, 0.0).is_err());
        assert!(evaluate_basis(4, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn renormalization_factors() {
        assert_abs_diff_eq!(renormalization_factor(4).unwrap(), 3.0f64.sqrt());
        assert_abs_diff_eq!(renormalization_factor(3).unwrap(), 6.0f64.sqrt());
        assert_abs_diff_eq!(renormalization_factor(0).unwrap(), 1.0);
        assert_abs_diff_eq!(renormalization_factor(12).unwrap(), 5.0f64.sqrt());
    }

    fn spectrum(pairs: &[(usize, f64)]) -> ZernikeSpectrum {
        ZernikeSpectrum::new(pairs.iter().copied().collect(), 0.55).unwrap()
    }

    #[test]
    fn empty_spectrum_synthesizes_zero_map() {
        let map = synthesize_wavefront(&spectrum(&[]), 64, 4.0).unwrap();
        assert!(map.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn defocus_extremum_at_rim() {
        let map = synthesize_wavefront(&spectrum(&[(4, 0.5)]), 256, 4.0).unwrap();
        let max = map.samples().iter().cloned().fold(f64::MIN, f64::max);
        // max of sqrt3 (2 rho^2 - 1) on the disk is sqrt3 at rho = 1; the
        // sampled rim sits just inside, so allow the discretization gap.
        assert_abs_diff_eq!(max, 0.5 * 3.0f64.sqrt(), epsilon = 2e-2);
    }

    #[test]
    fn oblique_astigmatism_is_antisymmetric_in_phi() {
        let map = synthesize_wavefront(&spectrum(&[(3, 1.0)]), 128, 4.0).unwrap();
        let n = map.resolution();
        for row in 0..n {
            for col in 0..n {
                // phi -> -phi is row -> n-1-row on this grid.
                let mirrored = map.samples()[[n - 1 - row, col]];
                assert_abs_diff_eq!(map.samples()[[row, col]], -mirrored, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn synthesis_is_linear_per_sample() {
        let s1 = spectrum(&[(3, 0.2), (4, -0.1)]);
        let s2 = spectrum(&[(4, 0.3), (7, 0.05)]);
        let combined = s1.scaled(2.0).unwrap().plus(&s2.scaled(-0.5).unwrap()).unwrap();
        let m1 = synthesize_wavefront(&s1, 128, 4.0).unwrap();
        let m2 = synthesize_wavefront(&s2, 128, 4.0).unwrap();
        let mc = synthesize_wavefront(&combined, 128, 4.0).unwrap();
        for ((a, b), c) in m1
            .samples()
            .iter()
            .zip(m2.samples().iter())
            .zip(mc.samples().iter())
        {
            assert_abs_diff_eq!(2.0 * a - 0.5 * b, *c, epsilon = 1e-12);
        }
    }

    #[test]
    fn decompose_round_trips_single_mode() {
        let map = synthesize_wavefront(&spectrum(&[(4, 0.3)]), 512, 4.0).unwrap();
        let rec = decompose_wavefront(&map, 10, 0.55).unwrap();
        assert_abs_diff_eq!(rec.coefficient(4), 0.3, epsilon = 1e-3);
        for n in (0..=10).filter(|&n| n != 4) {
            assert!(
                rec.coefficient(n).abs() < 1e-3,
                "cross-talk into {n}: {}",
                rec.coefficient(n)
            );
        }
    }

    #[test]
    fn decompose_round_trips_mixed_modes() {
        let map = synthesize_wavefront(&spectrum(&[(3, 0.2), (5, -0.4)]), 512, 4.0).unwrap();
        let rec = decompose_wavefront(&map, 10, 0.55).unwrap();
        assert_abs_diff_eq!(rec.coefficient(3), 0.2, epsilon = 1e-3);
        assert_abs_diff_eq!(rec.coefficient(5), -0.4, epsilon = 1e-3);
    }

    #[test]
    fn decompose_zero_map_is_zero() {
        let map = synthesize_wavefront(&spectrum(&[]), 128, 4.0).unwrap();
        let rec = decompose_wavefront(&map, 10, 0.55).unwrap();
        for n in 0..=10 {
            assert!(rec.coefficient(n).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_unsupported_range() {
        let map = synthesize_wavefront(&spectrum(&[(4, 0.1)]), 128, 4.0).unwrap();
        let err = decompose_wavefront(&map, MAX_INDEX + 1, 0.55).unwrap_err();
        assert!(err.to_string().contains("0..=14"), "{err}");
    }

    #[test]
    fn json_round_trip_matches_document_format() {
        let text = r#"{"wavelength_um": 0.55, "coefficients": {"3": -0.2, "4": 0.5, "5": 0.1}}"#;
        let spec = ZernikeSpectrum::from_json(text).unwrap();
        assert_eq!(spec.wavelength_um(), 0.55);
        assert_eq!(spec.coefficient(3), -0.2);
        assert_eq!(spec.coefficient(4), 0.5);
        assert_eq!(spec.coefficient(5), 0.1);
        let back = ZernikeSpectrum::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn json_rejects_bad_keys_and_indices() {
        assert!(ZernikeSpectrum::from_json(
            r#"{"wavelength_um": 0.55, "coefficients": {"x": 1.0}}"#
        )
        .is_err());
        assert!(ZernikeSpectrum::from_json(
            r#"{"wavelength_um": 0.55, "coefficients": {"99": 1.0}}"#
        )
        .is_err());
        assert!(
            ZernikeSpectrum::from_json(r#"{"wavelength_um": -1, "coefficients": {}}"#).is_err()
        );
    }

    #[test]
    fn aberration_rms_ignores_piston_and_tilt() {
        let s = spectrum(&[(0, 9.0), (1, 9.0), (2, 9.0), (3, 0.3), (4, 0.4)]);
        assert_abs_diff_eq!(s.aberration_rms_um(), 0.5, epsilon = 1e-12);
    }
}
