//! Exact Shapley attribution of merit-function changes to individual
//! aberration coefficients.
//!
//! A coalition game over a small ordered feature set of Zernike indices:
//! the value oracle evaluates the merit function with out-of-coalition
//! coefficients set to the zero baseline (diffraction-limited). With
//! |features| = m, exact enumeration costs exactly 2^m oracle calls; the
//! attribution for feature i is
//!
//! `phi_i = (1/m) * sum over S subset of M\{i} of [C(m-1, |S|)]^-1 *
//! [v(S + i) - v(S)]`
//!
//! Sweeping a grid of spectra turns per-point attributions into
//! distributions; those are what the plots summarize.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::zernike::ZernikeSpectrum;

/// Exact-enumeration bound: 2^12 oracle calls at most.
pub const MAX_FEATURES: usize = 12;

/// Threshold below which a normalizing |phi| counts as zero and the
/// normalized value is flagged undefined instead of emitted.
pub const NORMALIZATION_FLOOR: f64 = 1e-12;

/// Feature index whose attribution normalizes the others.
const NORMALIZING_FEATURE: usize = 4;

fn validate_features(features: &[usize]) -> Result<()> {
    if features.is_empty() {
        return Err(Error::config("feature set must not be empty"));
    }
    if features.len() > MAX_FEATURES {
        return Err(Error::config(format!(
            "feature set of {} exceeds the exact-enumeration bound {MAX_FEATURES}",
            features.len()
        )));
    }
    for (i, f) in features.iter().enumerate() {
        if features[..i].contains(f) {
            return Err(Error::config(format!("duplicate feature {f}")));
        }
    }
    Ok(())
}

fn subset_of(features: &[usize], mask: usize) -> Vec<usize> {
    features
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &f)| f)
        .collect()
}

/// Pascal row C(n, 0..=n) as floats.
fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for k in 0..n {
        let next = row[k] * (n - k) as f64 / (k + 1) as f64;
        row.push(next);
    }
    row
}

/// Attributions from a complete subset-value table indexed by bitmask.
fn phi_from_table(m: usize, table: &[f64]) -> Vec<f64> {
    debug_assert_eq!(table.len(), 1 << m);
    let weights = binomial_row(m - 1);
    let mut phi = vec![0.0f64; m];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..table.len() {
            if mask & bit != 0 {
                continue;
            }
            let s = (mask as u32).count_ones() as usize;
            acc += (table[mask | bit] - table[mask]) / weights[s];
        }
        *p = acc / m as f64;
    }
    phi
}

fn check_efficiency(m: usize, table: &[f64], phi: &[f64]) -> Result<()> {
    let total = table[(1 << m) - 1] - table[0];
    let sum: f64 = phi.iter().sum();
    let scale = total.abs().max(1.0);
    if (sum - total).abs() > 1e-12 * scale {
        return Err(Error::numeric(format!(
            "efficiency identity violated: sum(phi) = {sum}, v(full) - v(empty) = {total}"
        )));
    }
    Ok(())
}

/// Raw attribution values for one game.
#[derive(Debug, Clone)]
pub struct ShapleyValues {
    pub features: Vec<usize>,
    pub phi: Vec<f64>,
    /// `v(full) - v(empty)`; equals `sum(phi)` by the efficiency axiom.
    pub total_effect: f64,
    /// Number of oracle calls made (always exactly 2^m).
    pub oracle_calls: usize,
}

/// Exact Shapley values by full subset enumeration. The oracle receives
/// each distinct subset (ascending feature order) exactly once.
pub fn shapley_exact<F>(features: &[usize], mut oracle: F) -> Result<ShapleyValues>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    validate_features(features)?;
    let m = features.len();
    let size = 1usize << m;
    let mut table = Vec::with_capacity(size);
    for mask in 0..size {
        let subset = subset_of(features, mask);
        let v = oracle(&subset)?;
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "oracle returned non-finite value {v} for subset {{{}}}",
                subset
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        table.push(v);
    }
    let phi = phi_from_table(m, &table);
    check_efficiency(m, &table, &phi)?;
    Ok(ShapleyValues {
        features: features.to_vec(),
        phi,
        total_effect: table[size - 1] - table[0],
        oracle_calls: size,
    })
}

/// Attribution of one merit function at one spectrum, with the normalized
/// companion values.
#[derive(Debug, Clone)]
pub struct ShapleyReport {
    pub merit: String,
    pub spectrum: ZernikeSpectrum,
    pub features: Vec<usize>,
    pub phi: Vec<f64>,
    /// `phi_i / |phi_4|`, sign preserved; `None` when the normalizer is
    /// below `NORMALIZATION_FLOOR` or feature 4 is absent.
    pub phi_normalized: Vec<Option<f64>>,
}

fn normalize_phi(features: &[usize], phi: &[f64]) -> Vec<Option<f64>> {
    let norm = features
        .iter()
        .position(|&f| f == NORMALIZING_FEATURE)
        .map(|i| phi[i].abs())
        .filter(|&a| a >= NORMALIZATION_FLOOR);
    phi.iter()
        .map(|&p| norm.map(|a| p / a))
        .collect()
}

/// Evaluate one merit function's attribution at one spectrum: the oracle
/// for subset S is the merit of the spectrum restricted to S (all other
/// coefficients at the zero baseline).
pub fn shapley_at_point<F>(
    merit: &str,
    spectrum: &ZernikeSpectrum,
    features: &[usize],
    mut eval: F,
) -> Result<ShapleyReport>
where
    F: FnMut(&ZernikeSpectrum) -> Result<f64>,
{
    let values = shapley_exact(features, |subset| {
        eval(&spectrum.restricted_to(subset)?)
    })?;
    Ok(ShapleyReport {
        merit: merit.to_string(),
        spectrum: spectrum.clone(),
        features: values.features.clone(),
        phi_normalized: normalize_phi(&values.features, &values.phi),
        phi: values.phi,
    })
}

/// Monte-Carlo check of the exact computation: average marginal
/// contributions over random feature permutations.
///
/// Returns per-feature estimates and their standard errors. Subset values
/// are memoized, so the oracle is still called at most 2^m times.
pub fn shapley_permutation_estimate<F>(
    features: &[usize],
    mut oracle: F,
    permutations: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    validate_features(features)?;
    if permutations == 0 {
        return Err(Error::config("permutation count must be positive"));
    }
    let m = features.len();
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let mut value_of = |mask: usize, features: &[usize]| -> Result<f64> {
        if let Some(&v) = cache.get(&mask) {
            return Ok(v);
        }
        let v = oracle(&subset_of(features, mask))?;
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "oracle returned non-finite value {v} for mask {mask:#b}"
            )));
        }
        cache.insert(mask, v);
        Ok(v)
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    // Welford accumulators per feature
    let mut mean = vec![0.0f64; m];
    let mut m2 = vec![0.0f64; m];
    for n in 1..=permutations {
        order.shuffle(&mut rng);
        let mut mask = 0usize;
        for &i in &order {
            let before = value_of(mask, features)?;
            mask |= 1 << i;
            let after = value_of(mask, features)?;
            let marginal = after - before;
            let delta = marginal - mean[i];
            mean[i] += delta / n as f64;
            m2[i] += delta * (marginal - mean[i]);
        }
    }
    let stderr: Vec<f64> = m2
        .iter()
        .map(|&s| (s / (permutations.max(2) - 1) as f64 / permutations as f64).sqrt())
        .collect();
    Ok((mean, stderr))
}

/// Grid of spectra for distribution sweeps: the cartesian product of the
/// per-feature value lists, row-major with the last feature fastest.
#[derive(Debug, Clone)]
pub struct DistributionConfig {
    pub features: Vec<usize>,
    pub values_per_feature: Vec<Vec<f64>>,
    pub wavelength_um: f64,
}

impl DistributionConfig {
    /// Equidistant grid: every feature spans [lo, hi] with `steps` points.
    pub fn equidistant(
        features: &[usize],
        lo: f64,
        hi: f64,
        steps: usize,
        wavelength_um: f64,
    ) -> Result<Self> {
        if steps < 2 || !(hi > lo) {
            return Err(Error::config(format!(
                "grid needs steps >= 2 and hi > lo, got {steps} over [{lo}, {hi}]"
            )));
        }
        let values: Vec<f64> = (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect();
        let cfg = Self {
            features: features.to_vec(),
            values_per_feature: vec![values; features.len()],
            wavelength_um,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_features(&self.features)?;
        if self.values_per_feature.len() != self.features.len() {
            return Err(Error::config(
                "values_per_feature must match the feature list",
            ));
        }
        for (f, vals) in self.features.iter().zip(&self.values_per_feature) {
            if vals.is_empty() {
                return Err(Error::config(format!("feature {f} has no grid values")));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("feature {f} has non-finite values")));
            }
        }
        if !(self.wavelength_um > 0.0) {
            return Err(Error::config("wavelength must be positive"));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.values_per_feature.iter().map(Vec::len).product()
    }

    /// Feature values at a row-major grid index.
    fn coords(&self, id: usize) -> Vec<f64> {
        let mut rem = id;
        let mut out = vec![0.0; self.features.len()];
        for i in (0..self.features.len()).rev() {
            let n = self.values_per_feature[i].len();
            out[i] = self.values_per_feature[i][rem % n];
            rem /= n;
        }
        out
    }

    fn spectrum_at(&self, id: usize) -> Result<ZernikeSpectrum> {
        let coords = self.coords(id);
        ZernikeSpectrum::new(
            self.features.iter().copied().zip(coords).collect(),
            self.wavelength_um,
        )
    }
}

/// Five-number summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartileSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

/// Linear-interpolated percentile of sorted data, p in [0, 1].
fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[n - 1]
    }
}

impl QuartileSummary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data("cannot summarize an empty sample"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            min: sorted[0],
            q1: percentile_sorted(&sorted, 0.25),
            median: percentile_sorted(&sorted, 0.5),
            q3: percentile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            count: sorted.len(),
        })
    }
}

/// Attribution at one grid point of a distribution sweep.
#[derive(Debug, Clone)]
pub struct GridPointResult {
    pub id: u64,
    pub spectrum: ZernikeSpectrum,
    pub phi: Vec<f64>,
    pub phi_normalized: Vec<Option<f64>>,
}

/// Distributions of attributions over a grid of spectra.
#[derive(Debug, Clone)]
pub struct DistributionReport {
    pub merit: String,
    pub features: Vec<usize>,
    pub points: Vec<GridPointResult>,
    /// Grid points whose oracle evaluation failed, with the error text.
    pub failures: Vec<(u64, String)>,
    /// Five-number summary of raw phi per feature, over successful points.
    pub summaries: Vec<QuartileSummary>,
    /// Distinct merit evaluations performed (masked spectra are shared
    /// across grid points, so this is far below points * 2^m).
    pub merit_evaluations: usize,
}

impl DistributionReport {
    pub const CSV_HEADER: &'static str =
        "merit,feature,grid_point_id,w3,w4,w5,phi,phi_normalized";

    /// Long-format rows: one per (grid point, feature).
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::with_capacity(self.points.len() * self.features.len());
        for point in &self.points {
            for (i, &f) in self.features.iter().enumerate() {
                let normalized = point.phi_normalized[i]
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                rows.push(format!(
                    "{},{},{},{},{},{},{},{}",
                    self.merit,
                    f,
                    point.id,
                    point.spectrum.coefficient(3),
                    point.spectrum.coefficient(4),
                    point.spectrum.coefficient(5),
                    point.phi[i],
                    normalized
                ));
            }
        }
        rows
    }

    /// Raw phi values of one feature across successful grid points.
    pub fn phi_of(&self, feature: usize) -> Result<Vec<f64>> {
        let i = self
            .features
            .iter()
            .position(|&f| f == feature)
            .ok_or_else(|| Error::config(format!("feature {feature} not in the sweep")))?;
        Ok(self.points.iter().map(|p| p.phi[i]).collect())
    }

    /// Rebuild reports from long-format CSV text (one report per merit).
    /// Failure rows are not persisted, so `failures` comes back empty and
    /// `merit_evaluations` zero; everything plot-relevant round-trips.
    pub fn from_csv(text: &str, wavelength_um: f64) -> Result<Vec<Self>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == Self::CSV_HEADER => {}
            _ => return Err(Error::data("attribution CSV has the wrong header")),
        }
        // merit -> (features, id -> (coords, phi, phi_normalized))
        type PointMap = BTreeMap<u64, ([f64; 3], Vec<f64>, Vec<Option<f64>>)>;
        let mut merits: Vec<(String, Vec<usize>, PointMap)> = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::data(format!("bad attribution row {}", n + 2)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::data(format!("bad number {s:?} in row {}: {e}", n + 2)))
            };
            let merit = f[0].to_string();
            let feature: usize = f[1]
                .parse()
                .map_err(|e| Error::data(format!("bad feature in row {}: {e}", n + 2)))?;
            let id: u64 = f[2]
                .parse()
                .map_err(|e| Error::data(format!("bad grid id in row {}: {e}", n + 2)))?;
            let coords = [parse(f[3])?, parse(f[4])?, parse(f[5])?];
            let phi = parse(f[6])?;
            let normalized = if f[7].is_empty() {
                None
            } else {
                Some(parse(f[7])?)
            };
            let entry = match merits.iter_mut().find(|(m, _, _)| *m == merit) {
                Some(e) => e,
                None => {
                    merits.push((merit, Vec::new(), BTreeMap::new()));
                    merits.last_mut().unwrap()
                }
            };
            if !entry.1.contains(&feature) {
                entry.1.push(feature);
            }
            let point = entry.2.entry(id).or_insert((coords, Vec::new(), Vec::new()));
            point.1.push(phi);
            point.2.push(normalized);
        }
        merits
            .into_iter()
            .map(|(merit, features, points)| {
                let m = features.len();
                let points = points
                    .into_iter()
                    .map(|(id, (coords, phi, phi_normalized))| {
                        if phi.len() != m {
                            return Err(Error::data(format!(
                                "grid point {id} of {merit} has {} of {m} features",
                                phi.len()
                            )));
                        }
                        let pairs = [(3usize, coords[0]), (4, coords[1]), (5, coords[2])]
                            .into_iter()
                            .collect();
                        Ok(GridPointResult {
                            id,
                            spectrum: ZernikeSpectrum::new(pairs, wavelength_um)?,
                            phi,
                            phi_normalized,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let summaries = (0..m)
                    .map(|i| {
                        let vals: Vec<f64> = points.iter().map(|p| p.phi[i]).collect();
                        QuartileSummary::of(&vals)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(DistributionReport {
                    merit,
                    features,
                    points,
                    failures: Vec::new(),
                    summaries,
                    merit_evaluations: 0,
                })
            })
            .collect()
    }
}

/// Memoization key: the in-coalition features with their grid values, bit
/// patterns included so -0.0 vs 0.0 cannot alias distinct spectra.
type SubsetKey = Vec<(usize, u64)>;

/// Run exact attribution at every grid point of the config, sharing merit
/// evaluations between points (each distinct masked spectrum is evaluated
/// once). Failed points are recorded and skipped; the sweep continues.
pub fn shapley_distribution<F>(
    merit: &str,
    config: &DistributionConfig,
    eval: F,
) -> Result<DistributionReport>
where
    F: Fn(&ZernikeSpectrum) -> Result<f64> + Sync,
{
    config.validate()?;
    let m = config.features.len();
    let size = 1usize << m;
    let points = config.point_count();
    // phase 1: enumerate distinct masked spectra
    let mut key_index: HashMap<SubsetKey, usize> = HashMap::new();
    let mut distinct: Vec<ZernikeSpectrum> = Vec::new();
    let mut point_tables: Vec<Vec<usize>> = Vec::with_capacity(points);
    for id in 0..points {
        let coords = config.coords(id);
        let mut table = Vec::with_capacity(size);
        for mask in 0..size {
            let key: SubsetKey = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (config.features[i], coords[i].to_bits()))
                .collect();
            let next = key_index.len();
            let slot = *key_index.entry(key).or_insert(next);
            if slot == distinct.len() {
                let pairs = (0..m)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| (config.features[i], coords[i]))
                    .collect();
                distinct.push(ZernikeSpectrum::new(pairs, config.wavelength_um)?);
            }
            table.push(slot);
        }
        point_tables.push(table);
    }
    // phase 2: evaluate each distinct spectrum once, in parallel
    let evaluated: Vec<std::result::Result<f64, String>> = distinct
        .par_iter()
        .map(|s| match eval(s) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(format!("merit returned non-finite value {v}")),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    // phase 3: assemble attributions per grid point
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (id, table_idx) in point_tables.iter().enumerate() {
        let mut table = Vec::with_capacity(size);
        let mut failure: Option<String> = None;
        for &slot in table_idx {
            match &evaluated[slot] {
                Ok(v) => table.push(*v),
                Err(e) => {
                    failure = Some(e.clone());
                    break;
                }
            }
        }
        if let Some(e) = failure {
            failures.push((id as u64, e));
            continue;
        }
        let phi = phi_from_table(m, &table);
        if let Err(e) = check_efficiency(m, &table, &phi) {
            failures.push((id as u64, e.to_string()));
            continue;
        }
        results.push(GridPointResult {
            id: id as u64,
            spectrum: config.spectrum_at(id)?,
            phi_normalized: normalize_phi(&config.features, &phi),
            phi,
        });
    }
    if results.is_empty() {
        return Err(Error::numeric(format!(
            "every grid point failed; first failure: {}",
            failures
                .first()
                .map(|(_, e)| e.as_str())
                .unwrap_or("none recorded")
        )));
    }
    let summaries = (0..m)
        .map(|i| {
            let vals: Vec<f64> = results.iter().map(|r| r.phi[i]).collect();
            QuartileSummary::of(&vals)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistributionReport {
        merit: merit.to_string(),
        features: config.features.clone(),
        points: results,
        failures,
        summaries,
        merit_evaluations: distinct.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn additive_game_recovers_addends() {
        let features = [3usize, 4, 5, 7];
        let v = [0.3, -1.2, 0.05, 2.0];
        let result = shapley_exact(&features, |subset| {
            Ok(subset
                .iter()
                .map(|f| v[features.iter().position(|g| g == f).unwrap()])
                .sum())
        })
        .unwrap();
        for (phi, expect) in result.phi.iter().zip(v) {
            assert_abs_diff_eq!(phi, &expect, epsilon = 1e-12);
        }
        assert_eq!(result.oracle_calls, 16);
    }

    #[test]
    fn symmetric_two_feature_game_splits_evenly() {
        let result = shapley_exact(&[1, 2], |s| {
            Ok(match s.len() {
                0 => 0.0,
                1 => 0.4,
                _ => 1.0,
            })
        })
        .unwrap();
        assert_abs_diff_eq!(result.phi[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(result.phi[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn null_player_gets_zero() {
        // feature 9 never changes the value
        let result = shapley_exact(&[3, 9], |s| {
            Ok(if s.contains(&3) { 0.8 } else { 0.1 })
        })
        .unwrap();
        assert_abs_diff_eq!(result.phi[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(result.phi[0], 0.7, epsilon = 1e-15);
    }

    #[test]
    fn constant_merit_yields_all_zero_and_undefined_normalization() {
        let spectrum =
            ZernikeSpectrum::new([(3, 0.1), (4, 0.2), (5, 0.3)].into_iter().collect(), 0.55)
                .unwrap();
        let report =
            shapley_at_point("const", &spectrum, &[3, 4, 5], |_| Ok(0.7)).unwrap();
        for phi in &report.phi {
            assert_abs_diff_eq!(phi, &0.0, epsilon = 1e-15);
        }
        assert!(report.phi_normalized.iter().all(Option::is_none));
    }

    #[test]
    fn strehl_game_satisfies_efficiency() {
        use crate::merit::{strehl_ratio, MeritEngine};
        use crate::optics::{compute_mtf, Axis, OpticalConfig};
        let cfg = OpticalConfig {
            grid_resolution: 128,
            ..OpticalConfig::default()
        };
        let cfg = OpticalConfig {
            pixel_pitch_um: cfg.psf_pitch_um(),
            ..cfg
        };
        let engine = MeritEngine::new(cfg).unwrap();
        let w = 0.2 * 0.55;
        let spectrum =
            ZernikeSpectrum::new([(3, w), (4, w), (5, w)].into_iter().collect(), 0.55).unwrap();
        let reference = engine.reference_mtf(Axis::Horizontal);
        let report = shapley_at_point("sr_x", &spectrum, &[3, 4, 5], |s| {
            let mtf = compute_mtf(&engine.psf(s)?, Axis::Horizontal)?;
            strehl_ratio(&mtf, reference)
        })
        .unwrap();
        // shapley_exact enforces efficiency at 1e-12; cross-check manually
        let full = {
            let mtf = compute_mtf(&engine.psf(&spectrum).unwrap(), Axis::Horizontal).unwrap();
            strehl_ratio(&mtf, reference).unwrap()
        };
        let sum: f64 = report.phi.iter().sum();
        assert_abs_diff_eq!(sum, full - 1.0, epsilon = 1e-12);
        // normalization: phi_4 maps to sign(phi_4)
        let i4 = report.features.iter().position(|&f| f == 4).unwrap();
        let n4 = report.phi_normalized[i4].unwrap();
        assert_abs_diff_eq!(n4.abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn nonfinite_oracle_identifies_the_subset() {
        let err = shapley_exact(&[3, 5], |s| {
            Ok(if s == [3, 5] { f64::NAN } else { 0.0 })
        })
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("3, 5"), "message was: {text}");
    }

    #[test]
    fn feature_set_validation() {
        assert!(shapley_exact(&[], |_| Ok(0.0)).is_err());
        assert!(shapley_exact(&[1, 1], |_| Ok(0.0)).is_err());
        let too_many: Vec<usize> = (0..13).collect();
        assert!(shapley_exact(&too_many, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn permutation_estimate_brackets_the_exact_values() {
        use rand::Rng;
        use rand::SeedableRng;
        let features = [0usize, 1, 2, 3, 4];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let table: Vec<f64> = (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let oracle = |s: &[usize]| {
            let mask = s
                .iter()
                .map(|f| 1usize << features.iter().position(|g| g == f).unwrap())
                .sum::<usize>();
            Ok(table[mask])
        };
        let exact = shapley_exact(&features, oracle).unwrap();
        let (estimate, stderr) =
            shapley_permutation_estimate(&features, oracle, 100_000, 42).unwrap();
        for i in 0..features.len() {
            let gap = (estimate[i] - exact.phi[i]).abs();
            assert!(
                gap <= 3.0 * stderr[i] + 1e-12,
                "feature {i}: gap {gap:.2e} > 3 sigma {:.2e}",
                3.0 * stderr[i]
            );
        }
    }

    #[test]
    fn distribution_memoizes_across_grid_points() {
        let config = DistributionConfig::equidistant(&[3, 4, 5], -0.5, 0.5, 3, 0.55).unwrap();
        assert_eq!(config.point_count(), 27);
        let calls = AtomicUsize::new(0);
        let report = shapley_distribution("sum", &config, |s: &ZernikeSpectrum| {
            calls.fetch_add(1, Ordering::Relaxed);
            Ok(s.coefficient(3) + 2.0 * s.coefficient(4) - s.coefficient(5))
        })
        .unwrap();
        // distinct masked spectra: 1 + 3 + 3 + 3 + 9 + 9 + 9 + 27 = 64
        assert_eq!(report.merit_evaluations, 64);
        assert_eq!(calls.load(Ordering::Relaxed), 64);
        assert_eq!(report.points.len(), 27);
        assert!(report.failures.is_empty());
        // additive merit: phi equals each feature's own term at every point
        for point in &report.points {
            assert_abs_diff_eq!(point.phi[0], point.spectrum.coefficient(3), epsilon = 1e-12);
            assert_abs_diff_eq!(
                point.phi[1],
                2.0 * point.spectrum.coefficient(4),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                point.phi[2],
                -point.spectrum.coefficient(5),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn refractive_power_attribution_ignores_oblique_astigmatism() {
        use crate::merit::refractive_power;
        use crate::optics::Axis;
        use crate::zernike::synthesize_wavefront;
        let config = DistributionConfig::equidistant(&[3, 4, 5], -0.55, 0.55, 3, 0.55).unwrap();
        let report = shapley_distribution("d_max", &config, |s: &ZernikeSpectrum| {
            let map = synthesize_wavefront(s, 128, 4.0)?;
            let dx = refractive_power(&map, Axis::Horizontal)?.max_abs_dioptres();
            let dy = refractive_power(&map, Axis::Vertical)?.max_abs_dioptres();
            Ok(dx.max(dy))
        })
        .unwrap();
        let phi3 = report.phi_of(3).unwrap();
        for v in phi3 {
            assert!(v.abs() < 1e-9, "oblique astigmatism leaked power: {v}");
        }
        let phi4 = report.phi_of(4).unwrap();
        assert!(phi4.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn failed_points_are_recorded_and_the_sweep_continues() {
        let config = DistributionConfig::equidistant(&[3, 4], -0.5, 0.5, 3, 0.55).unwrap();
        let report = shapley_distribution("flaky", &config, |s: &ZernikeSpectrum| {
            // fail whenever feature 4 sits at the top grid value
            if (s.coefficient(4) - 0.5).abs() < 1e-12 {
                Err(Error::numeric("synthetic failure"))
            } else {
                Ok(s.coefficient(3) + s.coefficient(4))
            }
        })
        .unwrap();
        // 3 of 9 points have w4 = 0.5 and must fail
        assert_eq!(report.failures.len(), 3);
        assert_eq!(report.points.len(), 6);
        assert!(report.failures.iter().all(|(_, e)| e.contains("synthetic")));
    }

    #[test]
    fn csv_rows_have_the_long_format_shape() {
        let config = DistributionConfig::equidistant(&[3, 4, 5], -0.5, 0.5, 2, 0.55).unwrap();
        let report = shapley_distribution("sr", &config, |s: &ZernikeSpectrum| {
            Ok(1.0 - s.aberration_rms_um())
        })
        .unwrap();
        let rows = report.csv_rows();
        assert_eq!(rows.len(), 8 * 3);
        assert_eq!(DistributionReport::CSV_HEADER.split(',').count(), 8);
        for row in &rows {
            assert_eq!(row.split(',').count(), 8);
            assert!(row.starts_with("sr,"));
        }
    }

    #[test]
    fn csv_round_trip_rebuilds_the_report() {
        let config = DistributionConfig::equidistant(&[3, 4, 5], -0.5, 0.5, 3, 0.55).unwrap();
        let report = shapley_distribution("oig", &config, |s: &ZernikeSpectrum| {
            Ok((1.0 - s.aberration_rms_um()).max(0.01))
        })
        .unwrap();
        let text = format!(
            "{}\n{}\n",
            DistributionReport::CSV_HEADER,
            report.csv_rows().join("\n")
        );
        let back = DistributionReport::from_csv(&text, 0.55).unwrap();
        assert_eq!(back.len(), 1);
        let back = &back[0];
        assert_eq!(back.merit, "oig");
        assert_eq!(back.features, report.features);
        assert_eq!(back.points.len(), report.points.len());
        for (a, b) in back.points.iter().zip(&report.points) {
            assert_eq!(a.id, b.id);
            for (x, y) in a.phi.iter().zip(&b.phi) {
                assert_abs_diff_eq!(x, y, epsilon = 0.0);
            }
            assert_eq!(a.phi_normalized.is_empty(), false);
        }
        assert_eq!(back.summaries.len(), 3);
    }

    #[test]
    fn quartiles_follow_linear_interpolation() {
        let s = QuartileSummary::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_abs_diff_eq!(s.q1, 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.median, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.q3, 3.25, epsilon = 1e-15);
        assert_eq!((s.min, s.max, s.count), (1.0, 4.0, 4));
    }

    #[test]
    fn grid_ids_are_row_major_with_last_feature_fastest() {
        let config = DistributionConfig {
            features: vec![3, 4],
            values_per_feature: vec![vec![0.1, 0.2], vec![-1.0, 0.0, 1.0]],
            wavelength_um: 0.55,
        };
        assert_eq!(config.point_count(), 6);
        let c1 = config.coords(1);
        assert_eq!(c1, vec![0.1, 0.0]);
        let c3 = config.coords(3);
        assert_eq!(c3, vec![0.2, -1.0]);
    }
}
