//! Sweep configuration: what to sample, how many, where from, where to.

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imaging::KernelOptions;
use crate::optics::OpticalConfig;
use crate::zernike::{ZernikeSpectrum, MAX_INDEX};

/// Closed sampling interval for one Zernike coefficient, in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRange {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

/// How sample spectra are drawn from the coefficient ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Independent uniform draws per coefficient; `samples` spectra total.
    Uniform,
    /// Equidistant grid with `samples` steps per coefficient;
    /// `samples ^ ranges.len()` spectra total, row-major ids with the
    /// last coefficient fastest.
    Grid,
}

/// Full description of a sweep run. Serializes to canonical JSON whose
/// sha-256 prefix names the run; equal configs produce byte-identical
/// outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ranges: Vec<CoefficientRange>,
    pub mode: SamplingMode,
    /// Uniform mode: total spectra. Grid mode: steps per coefficient.
    pub samples: usize,
    pub seed: u64,
    pub optics: OpticalConfig,
    /// Blur-kernel extraction budget applied to every sample.
    pub kernel: KernelOptions,
    /// Directory of dataset images (`*.png`). `None` runs optics-only.
    pub images_dir: Option<PathBuf>,
    /// Directory of label maps named `<stem>.png` matching image stems.
    pub labels_dir: Option<PathBuf>,
    /// Root of externally produced probability maps,
    /// `<root>/<id>/<stem>.npy`; defaults to `<output_dir>/predictions`.
    pub predictions_dir: Option<PathBuf>,
    /// Where the run lands. Not part of the canonical identity: a run
    /// directory can be relocated without becoming a different run.
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub envelope_bins: usize,
}

impl Default for SweepConfig {
    /// 200 uniform samples of omega_3..5 over [-lambda, lambda], seed 0,
    /// default optics, 20 envelope bins.
    fn default() -> Self {
        let optics = OpticalConfig::default();
        let l = optics.wavelength_um;
        SweepConfig {
            ranges: [3usize, 4, 5]
                .iter()
                .map(|&index| CoefficientRange {
                    index,
                    lo: -l,
                    hi: l,
                })
                .collect(),
            mode: SamplingMode::Uniform,
            samples: 200,
            seed: 0,
            optics,
            kernel: KernelOptions::default(),
            images_dir: None,
            labels_dir: None,
            predictions_dir: None,
            output_dir: PathBuf::from("runs"),
            envelope_bins: 20,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("sample count must be at least 1"));
        }
        if self.mode == SamplingMode::Grid && self.samples < 2 {
            return Err(Error::config("grid mode needs at least 2 steps per axis"));
        }
        if self.ranges.is_empty() {
            return Err(Error::config("at least one coefficient range is required"));
        }
        for (i, r) in self.ranges.iter().enumerate() {
            if r.index > MAX_INDEX {
                return Err(Error::config(format!(
                    "coefficient index {} exceeds the supported maximum {MAX_INDEX}",
                    r.index
                )));
            }
            if self.ranges[..i].iter().any(|p| p.index == r.index) {
                return Err(Error::config(format!(
                    "duplicate coefficient range for index {}",
                    r.index
                )));
            }
            if !r.lo.is_finite() || !r.hi.is_finite() || r.lo > r.hi {
                return Err(Error::config(format!(
                    "invalid range [{}, {}] for coefficient {}",
                    r.lo, r.hi, r.index
                )));
            }
        }
        if self.envelope_bins == 0 {
            return Err(Error::config("envelope bin count must be at least 1"));
        }
        self.optics.validate()?;
        self.kernel.validate()?;
        self.sample_count()?;
        Ok(())
    }

    /// Total number of sample ids this config generates.
    pub fn sample_count(&self) -> Result<u64> {
        match self.mode {
            SamplingMode::Uniform => Ok(self.samples as u64),
            SamplingMode::Grid => {
                let mut total: u64 = 1;
                for _ in &self.ranges {
                    total = total.checked_mul(self.samples as u64).ok_or_else(|| {
                        Error::config(format!(
                            "grid of {}^{} points overflows",
                            self.samples,
                            self.ranges.len()
                        ))
                    })?;
                }
                Ok(total)
            }
        }
    }

    /// The spectrum for a sample id. Uniform draws use one RNG stream per
    /// id, so any subset of ids can be generated in any order (or in
    /// parallel, or on resume) with identical results.
    pub fn spectrum_at(&self, id: u64) -> Result<ZernikeSpectrum> {
        let coeffs = match self.mode {
            SamplingMode::Uniform => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(id + 1);
                self.ranges
                    .iter()
                    .map(|r| {
                        let v = if r.lo == r.hi {
                            r.lo
                        } else {
                            rng.gen_range(r.lo..=r.hi)
                        };
                        (r.index, v)
                    })
                    .collect()
            }
            SamplingMode::Grid => {
                let steps = self.samples as u64;
                let mut rem = id;
                let mut coords = vec![0.0f64; self.ranges.len()];
                for i in (0..self.ranges.len()).rev() {
                    let k = (rem % steps) as f64;
                    rem /= steps;
                    let r = &self.ranges[i];
                    coords[i] = r.lo + (r.hi - r.lo) * k / (steps - 1) as f64;
                }
                self.ranges
                    .iter()
                    .zip(coords)
                    .map(|(r, v)| (r.index, v))
                    .collect()
            }
        };
        ZernikeSpectrum::new(coeffs, self.optics.wavelength_um)
    }

    /// Canonical JSON: field order fixed by the struct, no whitespace.
    pub fn canonical_json(&self) -> Result<String> {
        serde_json::to_string(self)
            .map_err(|e| Error::config(format!("config not serializable: {e}")))
    }

    /// First 12 hex digits of the sha-256 of the canonical JSON.
    pub fn hash(&self) -> Result<String> {
        let json = self.canonical_json()?;
        let digest = Sha256::digest(json.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(hex[..12].to_string())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("cannot parse sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn spectrum_draws_are_per_id_streams() {
        let config = SweepConfig::default();
        // the same id yields the same spectrum regardless of access order
        let later = config.spectrum_at(7).unwrap();
        for id in 0..10 {
            let _ = config.spectrum_at(id).unwrap();
        }
        let again = config.spectrum_at(7).unwrap();
        assert_eq!(later.coefficients(), again.coefficients());
        // distinct ids yield distinct spectra
        let other = config.spectrum_at(8).unwrap();
        assert_ne!(later.coefficients(), other.coefficients());
        // draws stay inside the configured ranges
        for id in 0..50 {
            let s = config.spectrum_at(id).unwrap();
            for r in &config.ranges {
                let v = s.coefficient(r.index);
                assert!(v >= r.lo && v <= r.hi, "{v} outside [{}, {}]", r.lo, r.hi);
            }
        }
    }

    #[test]
    fn grid_mode_enumerates_row_major() {
        let config = SweepConfig {
            mode: SamplingMode::Grid,
            samples: 3,
            ..SweepConfig::default()
        };
        assert_eq!(config.sample_count().unwrap(), 27);
        let s0 = config.spectrum_at(0).unwrap();
        assert_eq!(s0.coefficient(3), -0.55);
        assert_eq!(s0.coefficient(5), -0.55);
        // last coefficient fastest
        let s1 = config.spectrum_at(1).unwrap();
        assert_eq!(s1.coefficient(3), -0.55);
        assert_eq!(s1.coefficient(5), 0.0);
        let s26 = config.spectrum_at(26).unwrap();
        assert_eq!(s26.coefficient(3), 0.55);
        assert_eq!(s26.coefficient(5), 0.55);
    }

    #[test]
    fn hash_tracks_every_field() {
        let base = SweepConfig::default();
        let h0 = base.hash().unwrap();
        assert_eq!(h0.len(), 12);
        let reseeded = SweepConfig {
            seed: 1,
            ..base.clone()
        };
        assert_ne!(h0, reseeded.hash().unwrap());
        let rebinned = SweepConfig {
            envelope_bins: 21,
            ..base.clone()
        };
        assert_ne!(h0, rebinned.hash().unwrap());
        // identical configs hash identically
        assert_eq!(h0, base.clone().hash().unwrap());
    }

    #[test]
    fn json_round_trip_preserves_the_config_except_output_dir() {
        let config = SweepConfig {
            images_dir: Some(PathBuf::from("data/images")),
            samples: 17,
            ..SweepConfig::default()
        };
        let text = config.canonical_json().unwrap();
        // the output location is not part of a run's identity
        assert!(!text.contains("output_dir"));
        let back = SweepConfig {
            output_dir: config.output_dir.clone(),
            ..SweepConfig::from_json(&text).unwrap()
        };
        assert_eq!(config, back);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut c = SweepConfig::default();
        c.samples = 0;
        assert!(c.validate().is_err());
        let mut c = SweepConfig::default();
        c.ranges[0].lo = 1.0;
        c.ranges[0].hi = -1.0;
        assert!(c.validate().is_err());
        let mut c = SweepConfig::default();
        c.ranges.push(c.ranges[0]);
        assert!(c.validate().is_err());
        let mut c = SweepConfig::default();
        c.ranges[0].index = MAX_INDEX + 1;
        assert!(c.validate().is_err());
    }
}
