//! Segmentation benchmark and calibration metrics over externally supplied
//! ground truth and per-pixel class probabilities: global-aggregation IoU,
//! expected calibration error with reliability bins, and the
//! bin-cardinality-weighted confidence/accuracy correlation across a
//! perturbation sweep.
//!
//! No model inference happens here; records arrive as label maps plus
//! probability tensors produced elsewhere.

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ground truth and per-pixel class scores for one image.
#[derive(Debug, Clone)]
pub struct PredictionRecord {
    ground_truth: Array2<u16>,
    probabilities: Array3<f64>,
}

impl PredictionRecord {
    /// Validates shape consistency and that scores form a distribution per
    /// pixel (sum 1 within 1e-4).
    pub fn new(ground_truth: Array2<u16>, probabilities: Array3<f64>) -> Result<Self> {
        let (h, w) = ground_truth.dim();
        let (ph, pw, nc) = probabilities.dim();
        if (h, w) != (ph, pw) {
            return Err(Error::data(format!(
                "label map {h}x{w} does not match probability map {ph}x{pw}"
            )));
        }
        if nc == 0 {
            return Err(Error::data("probability map has zero classes"));
        }
        for r in 0..h {
            for c in 0..w {
                let mut sum = 0.0;
                for k in 0..nc {
                    let p = probabilities[[r, c, k]];
                    if !p.is_finite() || !(-1e-6..=1.0 + 1e-6).contains(&p) {
                        return Err(Error::data(format!(
                            "probability {p} at ({r},{c},{k}) outside [0, 1]"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-4 {
                    return Err(Error::data(format!(
                        "probabilities at ({r},{c}) sum to {sum}, not 1"
                    )));
                }
            }
        }
        Ok(Self {
            ground_truth,
            probabilities,
        })
    }

    pub fn ground_truth(&self) -> &Array2<u16> {
        &self.ground_truth
    }

    pub fn probabilities(&self) -> &Array3<f64> {
        &self.probabilities
    }

    pub fn num_classes(&self) -> usize {
        self.probabilities.dim().2
    }

    /// Index of the highest-scoring class per pixel; ties resolve to the
    /// lowest index.
    pub fn argmax(&self, r: usize, c: usize) -> (usize, f64) {
        let nc = self.num_classes();
        let mut best = 0usize;
        let mut best_p = self.probabilities[[r, c, 0]];
        for k in 1..nc {
            let p = self.probabilities[[r, c, k]];
            if p > best_p {
                best_p = p;
                best = k;
            }
        }
        (best, best_p)
    }
}

/// Metric configuration: reliability bin count and the label id marking
/// pixels to exclude everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub bins: usize,
    pub ignore_id: u16,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            bins: 10,
            ignore_id: 255,
        }
    }
}

impl EvalOptions {
    fn validate(&self) -> Result<()> {
        // B = 1 is the documented degenerate case |overall acc - overall conf|
        if self.bins == 0 {
            return Err(Error::config("bin count must be at least 1"));
        }
        Ok(())
    }
}

fn check_labels(records: &[PredictionRecord], options: &EvalOptions) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::data("metric evaluation needs at least one record"));
    }
    let nc = records[0].num_classes();
    for rec in records {
        if rec.num_classes() != nc {
            return Err(Error::data(format!(
                "records disagree on class count: {} vs {nc}",
                rec.num_classes()
            )));
        }
        for &g in rec.ground_truth.iter() {
            if g != options.ignore_id && g as usize >= nc {
                return Err(Error::data(format!(
                    "ground-truth id {g} outside 0..{nc} and not the ignore id"
                )));
            }
        }
    }
    Ok(nc)
}

/// Per-class intersection-over-union with the batch-global aggregation
/// convention.
#[derive(Debug, Clone)]
pub struct IouReport {
    /// `Some(iou)` for classes with any ground-truth or predicted pixels.
    pub per_class: Vec<Option<f64>>,
    /// Mean over classes present in the ground truth.
    pub miou: f64,
}

#[derive(Clone, Default)]
struct Confusion {
    tp: Vec<u64>,
    fp: Vec<u64>,
    fn_: Vec<u64>,
    gt_count: Vec<u64>,
}

impl Confusion {
    fn new(nc: usize) -> Self {
        Self {
            tp: vec![0; nc],
            fp: vec![0; nc],
            fn_: vec![0; nc],
            gt_count: vec![0; nc],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.tp.iter_mut().zip(other.tp) {
            *a += b;
        }
        for (a, b) in self.fp.iter_mut().zip(other.fp) {
            *a += b;
        }
        for (a, b) in self.fn_.iter_mut().zip(other.fn_) {
            *a += b;
        }
        for (a, b) in self.gt_count.iter_mut().zip(other.gt_count) {
            *a += b;
        }
        self
    }
}

/// Intersection-over-union aggregated over the whole batch: confusion
/// counts are summed across records before any division, and the mean runs
/// over classes that appear in the ground truth. Ignore-id pixels are
/// excluded everywhere.
pub fn miou(records: &[PredictionRecord], options: &EvalOptions) -> Result<IouReport> {
    options.validate()?;
    let nc = check_labels(records, options)?;
    let confusion = records
        .par_iter()
        .map(|rec| {
            let (h, w) = rec.ground_truth.dim();
            let mut acc = Confusion::new(nc);
            for r in 0..h {
                for c in 0..w {
                    let g = rec.ground_truth[[r, c]];
                    if g == options.ignore_id {
                        continue;
                    }
                    let (pred, _) = rec.argmax(r, c);
                    let g = g as usize;
                    acc.gt_count[g] += 1;
                    if pred == g {
                        acc.tp[g] += 1;
                    } else {
                        acc.fp[pred] += 1;
                        acc.fn_[g] += 1;
                    }
                }
            }
            acc
        })
        .reduce(|| Confusion::new(nc), Confusion::merge);
    let total: u64 = confusion.gt_count.iter().sum();
    if total == 0 {
        return Err(Error::data("no valid pixels after ignore-id filtering"));
    }
    let mut per_class = Vec::with_capacity(nc);
    let mut mean_acc = 0.0;
    let mut mean_n = 0usize;
    for c in 0..nc {
        let union = confusion.tp[c] + confusion.fp[c] + confusion.fn_[c];
        if union == 0 {
            per_class.push(None);
            continue;
        }
        let iou = confusion.tp[c] as f64 / union as f64;
        per_class.push(Some(iou));
        if confusion.gt_count[c] > 0 {
            mean_acc += iou;
            mean_n += 1;
        }
    }
    if mean_n == 0 {
        return Err(Error::data("no classes present in the ground truth"));
    }
    Ok(IouReport {
        per_class,
        miou: mean_acc / mean_n as f64,
    })
}

/// One reliability bin: mean confidence, mean accuracy, and the number of
/// pixels that landed in it. Empty bins report zero means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityBin {
    pub mean_confidence: f64,
    pub mean_accuracy: f64,
    pub count: u64,
}

/// Calibration summary: overall and per-class expected calibration error
/// plus the reliability bins behind the overall number.
#[derive(Debug, Clone)]
pub struct EceReport {
    pub overall_ece: f64,
    /// One-vs-all ECE per class over pixels argmax-assigned to it; `None`
    /// when no pixel is assigned.
    pub per_class_ece: Vec<Option<f64>>,
    /// Unweighted mean of the per-class values.
    pub mece: f64,
    pub bins: Vec<ReliabilityBin>,
}

impl EceReport {
    /// Bin-cardinality-weighted mean confidence and accuracy; with every
    /// pixel in exactly one bin these equal the plain per-pixel means.
    pub fn weighted_conf_acc(&self) -> (f64, f64) {
        let total: u64 = self.bins.iter().map(|b| b.count).sum();
        if total == 0 {
            return (0.0, 0.0);
        }
        let conf: f64 = self
            .bins
            .iter()
            .map(|b| b.mean_confidence * b.count as f64)
            .sum::<f64>()
            / total as f64;
        let acc: f64 = self
            .bins
            .iter()
            .map(|b| b.mean_accuracy * b.count as f64)
            .sum::<f64>()
            / total as f64;
        (conf, acc)
    }
}

#[derive(Clone)]
struct BinAccumulator {
    sum_conf: Vec<f64>,
    sum_acc: Vec<f64>,
    count: Vec<u64>,
}

impl BinAccumulator {
    fn new(bins: usize) -> Self {
        Self {
            sum_conf: vec![0.0; bins],
            sum_acc: vec![0.0; bins],
            count: vec![0; bins],
        }
    }

    fn add(&mut self, bin: usize, conf: f64, correct: bool) {
        self.sum_conf[bin] += conf;
        self.sum_acc[bin] += if correct { 1.0 } else { 0.0 };
        self.count[bin] += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sum_conf.iter_mut().zip(other.sum_conf) {
            *a += b;
        }
        for (a, b) in self.sum_acc.iter_mut().zip(other.sum_acc) {
            *a += b;
        }
        for (a, b) in self.count.iter_mut().zip(other.count) {
            *a += b;
        }
        self
    }

    fn ece(&self) -> Option<f64> {
        let total: u64 = self.count.iter().sum();
        if total == 0 {
            return None;
        }
        let mut e = 0.0;
        for b in 0..self.count.len() {
            if self.count[b] == 0 {
                continue;
            }
            let n = self.count[b] as f64;
            let conf = self.sum_conf[b] / n;
            let acc = self.sum_acc[b] / n;
            e += n / total as f64 * (acc - conf).abs();
        }
        Some(e)
    }

    fn reliability(&self) -> Vec<ReliabilityBin> {
        self.count
            .iter()
            .enumerate()
            .map(|(b, &n)| ReliabilityBin {
                mean_confidence: if n > 0 { self.sum_conf[b] / n as f64 } else { 0.0 },
                mean_accuracy: if n > 0 { self.sum_acc[b] / n as f64 } else { 0.0 },
                count: n,
            })
            .collect()
    }
}

/// Expected calibration error over max-probability confidences in B
/// equal-width bins on [0, 1], with the per-class one-vs-all variant and
/// its unweighted mean.
pub fn ece(records: &[PredictionRecord], options: &EvalOptions) -> Result<EceReport> {
    options.validate()?;
    let nc = check_labels(records, options)?;
    let b = options.bins;
    let bin_of = |conf: f64| -> usize { ((conf * b as f64).floor() as usize).min(b - 1) };
    let (overall, per_class) = records
        .par_iter()
        .map(|rec| {
            let (h, w) = rec.ground_truth.dim();
            let mut overall = BinAccumulator::new(b);
            let mut per_class = vec![BinAccumulator::new(b); nc];
            for r in 0..h {
                for c in 0..w {
                    let g = rec.ground_truth[[r, c]];
                    if g == options.ignore_id {
                        continue;
                    }
                    let (pred, conf) = rec.argmax(r, c);
                    let correct = pred == g as usize;
                    let bin = bin_of(conf);
                    overall.add(bin, conf, correct);
                    per_class[pred].add(bin, conf, correct);
                }
            }
            (overall, per_class)
        })
        .reduce(
            || (BinAccumulator::new(b), vec![BinAccumulator::new(b); nc]),
            |(oa, pa), (ob, pb)| {
                (
                    oa.merge(ob),
                    pa.into_iter().zip(pb).map(|(x, y)| x.merge(y)).collect(),
                )
            },
        );
    let overall_ece = overall
        .ece()
        .ok_or_else(|| Error::data("no valid pixels after ignore-id filtering"))?;
    let per_class_ece: Vec<Option<f64>> = per_class.iter().map(|a| a.ece()).collect();
    let present: Vec<f64> = per_class_ece.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::data("no class received any argmax assignment"));
    }
    Ok(EceReport {
        overall_ece,
        mece: present.iter().sum::<f64>() / present.len() as f64,
        per_class_ece,
        bins: overall.reliability(),
    })
}

/// Benchmark plus calibration metrics for one batch of records.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub iou: IouReport,
    pub ece: EceReport,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "batch_id,spectrum_id,miou,mece,overall_ece,weighted_conf,weighted_acc";

    pub fn csv_row(&self, batch_id: &str, spectrum_id: u64) -> String {
        let (conf, acc) = self.ece.weighted_conf_acc();
        format!(
            "{},{},{},{},{},{},{}",
            batch_id, spectrum_id, self.iou.miou, self.ece.mece, self.ece.overall_ece, conf, acc
        )
    }
}

/// All metrics in one pass-compatible call.
pub fn evaluate(records: &[PredictionRecord], options: &EvalOptions) -> Result<EvalReport> {
    Ok(EvalReport {
        iou: miou(records, options)?,
        ece: ece(records, options)?,
    })
}

/// Pearson correlation between two equal-length series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::data("correlation series lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::data(format!(
            "correlation needs at least 3 points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::numeric(
            "correlation undefined: a series has zero variance",
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation between bin-cardinality-weighted confidence and
/// accuracy across the points of a perturbation sweep.
pub fn pearson_conf_acc(reports: &[EceReport]) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        reports.iter().map(|r| r.weighted_conf_acc()).unzip();
    pearson(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Record with the given ground truth where the argmax equals `pred`
    /// at the stated confidence and the rest of the mass spreads evenly.
    fn record_from(gt: &Array2<u16>, pred: &Array2<u16>, conf: f64, nc: usize) -> PredictionRecord {
        let (h, w) = gt.dim();
        let rest = (1.0 - conf) / (nc - 1) as f64;
        let probs = Array3::from_shape_fn((h, w, nc), |(r, c, k)| {
            if k == pred[[r, c]] as usize {
                conf
            } else {
                rest
            }
        });
        PredictionRecord::new(gt.clone(), probs).unwrap()
    }

    #[test]
    fn perfect_prediction_scores_unit_iou() {
        let gt = Array2::from_shape_fn((4, 4), |(r, _)| (r % 3) as u16);
        let rec = record_from(&gt, &gt, 0.8, 3);
        let report = miou(&[rec], &EvalOptions::default()).unwrap();
        assert_eq!(report.miou, 1.0);
        for c in report.per_class.iter().flatten() {
            assert_eq!(*c, 1.0);
        }
    }

    #[test]
    fn toy_two_class_iou_matches_hand_enumeration() {
        let gt = ndarray::arr2(&[[0u16, 0], [1, 1]]);
        let pred = ndarray::arr2(&[[0u16, 1], [1, 1]]);
        let rec = record_from(&gt, &pred, 0.9, 2);
        let report = miou(&[rec], &EvalOptions::default()).unwrap();
        assert_abs_diff_eq!(report.per_class[0].unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(report.per_class[1].unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.miou, 7.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn absent_class_is_excluded_from_the_mean() {
        let gt = ndarray::arr2(&[[0u16, 0], [1, 1]]);
        let rec = record_from(&gt, &gt, 0.9, 3);
        let report = miou(&[rec], &EvalOptions::default()).unwrap();
        assert!(report.per_class[2].is_none());
        assert_eq!(report.miou, 1.0);
    }

    #[test]
    fn ignore_pixels_are_excluded_everywhere() {
        let gt = ndarray::arr2(&[[0u16, 255], [1, 255]]);
        let pred = ndarray::arr2(&[[0u16, 1], [1, 0]]);
        let rec = record_from(&gt, &pred, 0.9, 2);
        let report = miou(&[rec.clone()], &EvalOptions::default()).unwrap();
        assert_eq!(report.miou, 1.0);
        let cal = ece(&[rec], &EvalOptions::default()).unwrap();
        let total: u64 = cal.bins.iter().map(|b| b.count).sum();
        assert_eq!(total, 2);
    }

    #[test]
    fn all_ignored_is_an_error() {
        let gt = Array2::from_elem((2, 2), 255u16);
        let pred = Array2::zeros((2, 2));
        let rec = record_from(&gt, &pred, 0.9, 2);
        assert!(miou(&[rec.clone()], &EvalOptions::default()).is_err());
        assert!(ece(&[rec], &EvalOptions::default()).is_err());
    }

    #[test]
    fn single_bin_ece_collapses_to_definition() {
        // 10 pixels at confidence 0.9, 6 correct
        let gt = Array2::from_shape_fn((1, 10), |(_, c)| if c < 6 { 0u16 } else { 1 });
        let pred = Array2::zeros((1, 10));
        let rec = record_from(&gt, &pred, 0.9, 2);
        for bins in [1usize, 10] {
            let opts = EvalOptions {
                bins,
                ..Default::default()
            };
            let report = ece(&[rec.clone()], &opts).unwrap();
            assert_abs_diff_eq!(report.overall_ece, 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn calibrated_record_has_near_zero_ece() {
        // groups engineered so per-bin accuracy equals the confidence:
        // 4 pixels at conf 0.75 with 3 correct; 4 at conf 0.5 with 2 correct
        let mut gt = Array2::<u16>::zeros((1, 8));
        let (h, w) = (1usize, 8usize);
        let probs = Array3::from_shape_fn((h, w, 2), |(_, c, k)| {
            let conf = if c < 4 { 0.75 } else { 0.5 };
            if k == 0 {
                conf
            } else {
                1.0 - conf
            }
        });
        for c in 0..8 {
            let correct = if c < 4 { c < 3 } else { c < 6 };
            gt[[0, c]] = if correct { 0 } else { 1 };
        }
        let rec = PredictionRecord::new(gt, probs).unwrap();
        let report = ece(&[rec], &EvalOptions::default()).unwrap();
        assert!(report.overall_ece < 1e-12, "got {}", report.overall_ece);
    }

    #[test]
    fn ece_matches_brute_force_for_many_bin_counts() {
        // varied confidences on an 8x8 grid
        let (h, w, nc) = (8usize, 8usize, 3usize);
        let gt = Array2::from_shape_fn((h, w), |(r, c)| ((r + c) % nc) as u16);
        let probs = Array3::from_shape_fn((h, w, nc), |(r, c, k)| {
            let lead = 0.4 + 0.55 * ((r * w + c) as f64 / (h * w) as f64);
            let pred = (r * 3 + c) % nc;
            if k == pred {
                lead
            } else {
                (1.0 - lead) / (nc - 1) as f64
            }
        });
        let rec = PredictionRecord::new(gt.clone(), probs.clone()).unwrap();
        for bins in [1usize, 2, 5, 10] {
            let opts = EvalOptions {
                bins,
                ..Default::default()
            };
            let report = ece(&[rec.clone()], &opts).unwrap();
            // independent enumeration
            let mut expected = 0.0;
            let total = (h * w) as f64;
            for b in 0..bins {
                let (lo, hi) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
                let mut n = 0.0;
                let mut conf_sum = 0.0;
                let mut acc_sum = 0.0;
                for r in 0..h {
                    for c in 0..w {
                        let (pred, conf) = rec.argmax(r, c);
                        let inside = if b == bins - 1 {
                            conf >= lo
                        } else {
                            conf >= lo && conf < hi
                        };
                        if inside {
                            n += 1.0;
                            conf_sum += conf;
                            acc_sum += if pred == gt[[r, c]] as usize { 1.0 } else { 0.0 };
                        }
                    }
                }
                if n > 0.0 {
                    expected += n / total * (acc_sum / n - conf_sum / n).abs();
                }
            }
            assert_abs_diff_eq!(report.overall_ece, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let (h, w, nc) = (6usize, 7usize, 3usize);
        let gt = Array2::from_shape_fn((h, w), |(r, c)| ((r * 2 + c) % nc) as u16);
        let probs = Array3::from_shape_fn((h, w, nc), |(r, c, k)| {
            let lead = 0.5 + 0.45 * ((r + 2 * c) as f64 / (h + 2 * w) as f64);
            if k == (r + c) % nc {
                lead
            } else {
                (1.0 - lead) / (nc - 1) as f64
            }
        });
        let rec = PredictionRecord::new(gt.clone(), probs.clone()).unwrap();
        let mut order: Vec<usize> = (0..h * w).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        order.shuffle(&mut rng);
        let gt2 = Array2::from_shape_fn((h, w), |(r, c)| {
            let s = order[r * w + c];
            gt[[s / w, s % w]]
        });
        let probs2 = Array3::from_shape_fn((h, w, nc), |(r, c, k)| {
            let s = order[r * w + c];
            probs[[s / w, s % w, k]]
        });
        let rec2 = PredictionRecord::new(gt2, probs2).unwrap();
        let opts = EvalOptions::default();
        let (a, b) = (evaluate(&[rec], &opts).unwrap(), evaluate(&[rec2], &opts).unwrap());
        assert_abs_diff_eq!(a.iou.miou, b.iou.miou, epsilon = 1e-12);
        assert_abs_diff_eq!(a.ece.overall_ece, b.ece.overall_ece, epsilon = 1e-12);
        assert_abs_diff_eq!(a.ece.mece, b.ece.mece, epsilon = 1e-12);
    }

    #[test]
    fn bin_counts_conserve_pixels_and_bounds_hold() {
        let (h, w, nc) = (5usize, 5usize, 2usize);
        let gt = Array2::from_shape_fn((h, w), |(r, _)| (r % 2) as u16);
        let probs = Array3::from_shape_fn((h, w, nc), |(r, c, k)| {
            let lead = 0.55 + 0.4 * (c as f64 / w as f64);
            if k == r % nc {
                lead
            } else {
                1.0 - lead
            }
        });
        let rec = PredictionRecord::new(gt, probs).unwrap();
        let report = evaluate(&[rec], &EvalOptions::default()).unwrap();
        let total: u64 = report.ece.bins.iter().map(|b| b.count).sum();
        assert_eq!(total, (h * w) as u64);
        assert!((0.0..=1.0).contains(&report.iou.miou));
        assert!((0.0..=1.0).contains(&report.ece.mece));
    }

    #[test]
    fn weighted_means_equal_pixel_means() {
        let gt = ndarray::arr2(&[[0u16, 1], [1, 0]]);
        let probs = ndarray::arr3(&[
            [[0.8, 0.2], [0.3, 0.7]],
            [[0.45, 0.55], [0.9, 0.1]],
        ]);
        let rec = PredictionRecord::new(gt, probs).unwrap();
        let report = ece(&[rec], &EvalOptions::default()).unwrap();
        let (conf, acc) = report.weighted_conf_acc();
        assert_abs_diff_eq!(conf, (0.8 + 0.7 + 0.55 + 0.9) / 4.0, epsilon = 1e-12);
        // correct pixels: (0,0) pred 0 == gt 0; (0,1) pred 1 == 1;
        // (1,0) pred 1 == 1; (1,1) pred 0 == 0
        assert_abs_diff_eq!(acc, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_hits_the_exact_poles() {
        let xs = [0.2, 0.4, 0.6, 0.8];
        let up: Vec<f64> = xs.iter().map(|x| 0.5 * x + 0.1).collect();
        let down: Vec<f64> = xs.iter().map(|x| -2.0 * x + 3.0).collect();
        assert_abs_diff_eq!(pearson(&xs, &up).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pearson(&xs, &down).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_matches_direct_formula_on_hand_series() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [2.0, 1.0, 4.0, 3.0, 5.0];
        // direct: cov = 1.6, sx^2 = 2, sy^2 = 2 (population), r = 0.8
        assert_abs_diff_eq!(pearson(&xs, &ys).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn pearson_error_paths() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn record_validation_rejects_bad_shapes_and_sums() {
        let gt = Array2::<u16>::zeros((2, 2));
        let bad_shape = Array3::<f64>::zeros((2, 3, 2));
        assert!(PredictionRecord::new(gt.clone(), bad_shape).is_err());
        let bad_sum = Array3::from_elem((2, 2, 2), 0.7);
        assert!(PredictionRecord::new(gt.clone(), bad_sum).is_err());
        let good = Array3::from_elem((2, 2, 2), 0.5);
        assert!(PredictionRecord::new(gt, good).is_ok());
    }

    #[test]
    fn out_of_range_labels_are_rejected_at_evaluation() {
        let gt = ndarray::arr2(&[[0u16, 9]]);
        let probs = Array3::from_elem((1, 2, 2), 0.5);
        let rec = PredictionRecord::new(gt, probs).unwrap();
        assert!(miou(&[rec], &EvalOptions::default()).is_err());
    }

    #[test]
    fn csv_row_shape_is_stable() {
        let gt = ndarray::arr2(&[[0u16, 1], [1, 0]]);
        let rec = record_from(&gt, &gt, 0.9, 2);
        let report = evaluate(&[rec], &EvalOptions::default()).unwrap();
        let row = report.csv_row("val", 3);
        assert_eq!(row.split(',').count(), 7);
        assert_eq!(EvalReport::CSV_HEADER.split(',').count(), 7);
        assert!(row.starts_with("val,3,"));
    }
}
