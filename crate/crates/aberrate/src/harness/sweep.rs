//! The sweep loop: sample spectra, compute optical reports, blur the
//! dataset, collect evaluation rows, persist everything incrementally.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::harness::config::SweepConfig;
use crate::imaging::{perturb_batch, ConvolutionKernel, Image, ImageBatch, KernelOptions};
use crate::io;
use crate::merit::{MeritEngine, OpticalReport};
use crate::segeval::{evaluate, EvalOptions, EvalReport, PredictionRecord};
use crate::zernike::ZernikeSpectrum;

/// Flat per-sample evaluation numbers, as persisted in `eval.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub miou: f64,
    pub mece: f64,
    pub overall_ece: f64,
    pub weighted_conf: f64,
    pub weighted_acc: f64,
}

impl EvalSummary {
    fn from_report(report: &EvalReport) -> Self {
        let (weighted_conf, weighted_acc) = report.ece.weighted_conf_acc();
        EvalSummary {
            miou: report.iou.miou,
            mece: report.ece.mece,
            overall_ece: report.ece.overall_ece,
            weighted_conf,
            weighted_acc,
        }
    }
}

/// One completed sample: optical metrics, plus evaluation metrics when
/// probability maps were available.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub id: u64,
    pub spectrum: ZernikeSpectrum,
    pub report: OpticalReport,
    pub eval: Option<EvalSummary>,
}

/// Everything a finished (or resumed) sweep produced.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub config_hash: String,
    pub run_dir: PathBuf,
    pub rows: Vec<SweepRow>,
    /// Samples whose computation failed numerically, with the message.
    pub failures: Vec<(u64, String)>,
}

impl SweepResult {
    /// (x, y) pairs of an optical metric against an eval metric, over rows
    /// that have evaluation data.
    pub fn metric_points(
        &self,
        optical: fn(&OpticalReport) -> f64,
        eval: fn(&EvalSummary) -> f64,
    ) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.eval.as_ref().map(|e| (optical(&r.report), eval(e))))
            .collect()
    }
}

struct Dataset {
    /// (stem, image) sorted by stem.
    images: Vec<(String, Image)>,
    /// Label maps aligned with `images`, when a labels dir was given.
    labels: Option<Vec<Array2<u16>>>,
}

fn list_pngs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("png") {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::data(format!("non-UTF-8 file name in {}", dir.display())))?
                .to_string();
            out.push((stem, path));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn load_dataset(config: &SweepConfig) -> Result<Option<Dataset>> {
    let Some(images_dir) = &config.images_dir else {
        return Ok(None);
    };
    let listing = list_pngs(images_dir)?;
    if listing.is_empty() {
        return Err(Error::data(format!(
            "no PNG images found in {}",
            images_dir.display()
        )));
    }
    let mut images = Vec::with_capacity(listing.len());
    for (stem, path) in &listing {
        images.push((stem.clone(), io::load_image_png(path)?));
    }
    let labels = match &config.labels_dir {
        None => None,
        Some(labels_dir) => {
            let mut maps = Vec::with_capacity(images.len());
            for (stem, image) in &images {
                let path = labels_dir.join(format!("{stem}.png"));
                if !path.exists() {
                    return Err(Error::data(format!(
                        "missing label map {} for image {stem}",
                        path.display()
                    )));
                }
                let map = io::load_label_png(&path)?;
                if map.dim() != (image.height(), image.width()) {
                    return Err(Error::data(format!(
                        "label map {stem} is {:?}, image is {}x{}",
                        map.dim(),
                        image.height(),
                        image.width()
                    )));
                }
                maps.push(map);
            }
            Some(maps)
        }
    };
    Ok(Some(Dataset { images, labels }))
}

/// Parse a completed CSV keyed by the id in `id_column`; verifies the
/// header and that every row has `columns` fields.
fn parse_completed(
    path: &Path,
    header: &str,
    columns: usize,
    id_column: usize,
) -> Result<BTreeMap<u64, Vec<String>>> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    let text = io::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first == header => {}
        _ => {
            return Err(Error::data(format!(
                "{} does not start with the expected header; remove it to restart",
                path.display()
            )))
        }
    }
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        let id = fields
            .get(id_column)
            .and_then(|f| f.parse::<u64>().ok())
            .filter(|_| fields.len() == columns);
        match id {
            Some(id) => {
                done.insert(id, fields);
            }
            None => {
                return Err(Error::data(format!(
                    "corrupt row at {}:{}; remove the file to restart",
                    path.display(),
                    n + 2
                )))
            }
        }
    }
    Ok(done)
}

fn report_from_fields(fields: &[String], spectrum: ZernikeSpectrum) -> Result<OpticalReport> {
    let f = |i: usize| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| Error::data(format!("bad numeric field {:?}: {e}", fields[i])))
    };
    Ok(OpticalReport {
        spectrum,
        d_x_max: f(4)?,
        d_y_max: f(5)?,
        mtf_hn_x: f(6)?,
        mtf_hn_y: f(7)?,
        sr_x: f(8)?,
        sr_y: f(9)?,
        oig_x: f(10)?,
        oig_y: f(11)?,
    })
}

fn eval_from_fields(fields: &[String]) -> Result<EvalSummary> {
    let f = |i: usize| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| Error::data(format!("bad numeric field {:?}: {e}", fields[i])))
    };
    Ok(EvalSummary {
        miou: f(2)?,
        mece: f(3)?,
        overall_ece: f(4)?,
        weighted_conf: f(5)?,
        weighted_acc: f(6)?,
    })
}

/// Append one line and flush, so an interrupt never leaves a torn row
/// behind a later one.
fn append_line(path: &Path, header: &str, line: &str) -> Result<()> {
    let fresh = !path.exists();
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    if fresh {
        file.write_all(header.as_bytes())
            .and_then(|_| file.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    file.write_all(line.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .and_then(|_| file.flush())
        .map_err(|e| Error::io(path, e))
}

/// Probability maps for sample `id`, if the external model has produced a
/// complete set; `None` means "not yet", an incomplete set is an error.
fn load_predictions(
    root: &Path,
    id: u64,
    dataset: &Dataset,
) -> Result<Option<Vec<PredictionRecord>>> {
    let dir = root.join(id.to_string());
    if !dir.exists() {
        return Ok(None);
    }
    let labels = dataset.labels.as_ref().ok_or_else(|| {
        Error::config("predictions supplied but no labels_dir configured")
    })?;
    let mut records = Vec::with_capacity(dataset.images.len());
    for ((stem, _), label) in dataset.images.iter().zip(labels) {
        let path = dir.join(format!("{stem}.npy"));
        if !path.exists() {
            return Err(Error::data(format!(
                "prediction set for sample {id} is incomplete: missing {}",
                path.display()
            )));
        }
        let probs = io::load_probability_npy(&path)?;
        records.push(PredictionRecord::new(label.clone(), probs)?);
    }
    Ok(Some(records))
}

/// Run (or resume) a sweep. Completed sample ids found in the output
/// directory are reloaded, not recomputed; rows append in ascending id
/// order so two runs of the same config produce byte-identical CSVs.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let run_dir = config.output_dir.clone();
    let spectra_dir = run_dir.join("spectra");
    fs::create_dir_all(&spectra_dir).map_err(|e| Error::io(&spectra_dir, e))?;

    // output directory is bound to one exact config
    let canonical = config.canonical_json()?;
    let config_hash = config.hash()?;
    let config_path = run_dir.join("config.json");
    if config_path.exists() {
        let existing = io::read_to_string(&config_path)?;
        if existing.trim_end() != canonical {
            return Err(Error::config(format!(
                "{} holds a different run; choose another output directory",
                run_dir.display()
            )));
        }
    } else {
        io::write_string(&config_path, &format!("{canonical}\n"))?;
    }
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    io::write_string(
        &run_dir.join("run.json"),
        &format!(
            "{{\"hash\":\"{config_hash}\",\"version\":\"{}\",\"started_unix\":{started}}}\n",
            env!("CARGO_PKG_VERSION")
        ),
    )?;

    let dataset = load_dataset(config)?;
    let predictions_root = config
        .predictions_dir
        .clone()
        .unwrap_or_else(|| run_dir.join("predictions"));
    let batch_id = config
        .images_dir
        .as_ref()
        .and_then(|d| d.file_name())
        .and_then(|n| n.to_str())
        .unwrap_or("batch")
        .to_string();

    let sweep_csv = run_dir.join("sweep.csv");
    let eval_csv = run_dir.join("eval.csv");
    let done = parse_completed(&sweep_csv, OpticalReport::CSV_HEADER, 12, 0)?;
    let done_eval = parse_completed(&eval_csv, EvalReport::CSV_HEADER, 7, 1)?;

    let engine = MeritEngine::new(config.optics.clone())?;
    let total = config.sample_count()?;
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut failures: Vec<(u64, String)> = Vec::new();

    for id in 0..total {
        // reload completed ids so the result is whole after a resume
        if let Some(fields) = done.get(&id) {
            let text = io::read_to_string(&spectra_dir.join(format!("{id}.json")))?;
            let spectrum = ZernikeSpectrum::from_json(&text)?;
            let report = report_from_fields(fields, spectrum.clone())?;
            let mut eval = match done_eval.get(&id) {
                Some(f) => Some(eval_from_fields(f)?),
                None => None,
            };
            if eval.is_none() {
                // predictions may have arrived after the optical pass:
                // close the loop now
                if let Some(ds) = &dataset {
                    if let Some(records) = load_predictions(&predictions_root, id, ds)? {
                        let eval_report = evaluate(&records, &EvalOptions::default())?;
                        append_line(
                            &eval_csv,
                            EvalReport::CSV_HEADER,
                            &eval_report.csv_row(&batch_id, id),
                        )?;
                        eval = Some(EvalSummary::from_report(&eval_report));
                    }
                }
            }
            rows.push(SweepRow {
                id,
                spectrum,
                report,
                eval,
            });
            continue;
        }

        let spectrum = config.spectrum_at(id)?;
        let report = match engine.report(&spectrum) {
            Ok(r) => r,
            Err(e @ Error::Numeric(_)) => {
                eprintln!("sample {id} failed: {e}; skipping");
                failures.push((id, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let spectrum_path = spectra_dir.join(format!("{id}.json"));
        if !spectrum_path.exists() {
            io::write_string(&spectrum_path, &format!("{}\n", spectrum.to_json()))?;
        }

        let mut eval = None;
        if let Some(dataset) = &dataset {
            let perturbed = match apply_threat(&engine, &spectrum, dataset, &config.kernel) {
                Ok(batch) => batch,
                Err(e @ Error::Numeric(_)) => {
                    eprintln!("sample {id} failed: {e}; skipping");
                    failures.push((id, e.to_string()));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let out_dir = run_dir.join("perturbed").join(id.to_string());
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            for (stem, image) in perturbed.iter() {
                io::save_image_png(
                    image,
                    &out_dir.join(format!("{stem}.png")),
                    io::PngDepth::Sixteen,
                )?;
            }
            if let Some(records) = load_predictions(&predictions_root, id, dataset)? {
                let eval_report = evaluate(&records, &EvalOptions::default())?;
                append_line(
                    &eval_csv,
                    EvalReport::CSV_HEADER,
                    &eval_report.csv_row(&batch_id, id),
                )?;
                eval = Some(EvalSummary::from_report(&eval_report));
            }
        }

        // the sweep row lands last, marking the sample complete
        append_line(&sweep_csv, OpticalReport::CSV_HEADER, &report.csv_row(id))?;
        rows.push(SweepRow {
            id,
            spectrum,
            report,
            eval,
        });
    }
    Ok(SweepResult {
        config: config.clone(),
        config_hash,
        run_dir,
        rows,
        failures,
    })
}

/// Load a finished (or partial) run back from disk without computing
/// anything: config, completed rows, and evaluation summaries.
pub fn load_sweep(run_dir: &Path) -> Result<SweepResult> {
    let text = io::read_to_string(&run_dir.join("config.json"))?;
    let mut config = SweepConfig::from_json(&text)?;
    config.output_dir = run_dir.to_path_buf();
    let config_hash = config.hash()?;
    let done = parse_completed(&run_dir.join("sweep.csv"), OpticalReport::CSV_HEADER, 12, 0)?;
    let done_eval = parse_completed(&run_dir.join("eval.csv"), EvalReport::CSV_HEADER, 7, 1)?;
    if done.is_empty() {
        return Err(Error::data(format!(
            "{} has no completed samples",
            run_dir.display()
        )));
    }
    let mut rows = Vec::with_capacity(done.len());
    for (id, fields) in &done {
        let spectrum_text = io::read_to_string(&run_dir.join(format!("spectra/{id}.json")))?;
        let spectrum = ZernikeSpectrum::from_json(&spectrum_text)?;
        let report = report_from_fields(fields, spectrum.clone())?;
        let eval = done_eval.get(id).map(|f| eval_from_fields(f)).transpose()?;
        rows.push(SweepRow {
            id: *id,
            spectrum,
            report,
            eval,
        });
    }
    Ok(SweepResult {
        config,
        config_hash,
        run_dir: run_dir.to_path_buf(),
        rows,
        failures: Vec::new(),
    })
}

/// Recompute the full evaluation report for one sample from the on-disk
/// dataset and predictions; `None` when either is absent. Used for
/// figures that need per-bin detail beyond the persisted summary floats.
pub(crate) fn eval_report_for(config: &SweepConfig, id: u64) -> Result<Option<EvalReport>> {
    let Some(dataset) = load_dataset(config)? else {
        return Ok(None);
    };
    let root = config
        .predictions_dir
        .clone()
        .unwrap_or_else(|| config.output_dir.join("predictions"));
    match load_predictions(&root, id, &dataset)? {
        Some(records) => Ok(Some(evaluate(&records, &EvalOptions::default())?)),
        None => Ok(None),
    }
}

/// Blur the dataset through the spectrum's PSF. A spectrum with zero
/// aberration is the no-threat case: images pass through untouched (the
/// camera's own diffraction is already part of the dataset).
fn apply_threat(
    engine: &MeritEngine,
    spectrum: &ZernikeSpectrum,
    dataset: &Dataset,
    options: &KernelOptions,
) -> Result<ImageBatch> {
    let mut batch = ImageBatch::new();
    for (stem, image) in &dataset.images {
        batch.push(stem.clone(), image.clone())?;
    }
    if spectrum.aberration_rms_um() == 0.0 {
        return Ok(batch);
    }
    let psf = engine.psf(spectrum)?;
    let kernel = ConvolutionKernel::from_psf(&psf, options)?;
    perturb_batch(&batch, &kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::OpticalConfig;
    use approx::assert_abs_diff_eq;
    use ndarray::Array3;
    use tempfile::tempdir;

    fn small_optics() -> OpticalConfig {
        let cfg = OpticalConfig {
            grid_resolution: 128,
            ..OpticalConfig::default()
        };
        OpticalConfig {
            pixel_pitch_um: cfg.psf_pitch_um(),
            ..cfg
        }
    }

    fn test_config(dir: &Path, samples: usize, seed: u64) -> SweepConfig {
        SweepConfig {
            samples,
            seed,
            optics: small_optics(),
            // small test images need a small blur window
            kernel: KernelOptions {
                max_support: 31,
                ..KernelOptions::default()
            },
            output_dir: dir.to_path_buf(),
            ..SweepConfig::default()
        }
    }

    fn write_test_images_sized(dir: &Path, count: usize, h: usize, w: usize) -> Vec<String> {
        fs::create_dir_all(dir).unwrap();
        let mut stems = Vec::new();
        for i in 0..count {
            let data = Array3::from_shape_fn((h, w, 1), |(r, c, _)| {
                let ramp = ((r as f64 / (h - 1) as f64)
                    + (c as f64 / (w - 1) as f64)
                    + i as f64 * 0.1)
                    / 2.2;
                let texture = 0.15
                    * (c as f64 * std::f64::consts::TAU / 9.0).sin()
                    * (r as f64 * std::f64::consts::TAU / 7.0).sin();
                (ramp * 0.7 + 0.1 + texture).clamp(0.0, 1.0)
            });
            let image = Image::new(data).unwrap();
            let stem = format!("img{i:02}");
            io::save_image_png(
                &image,
                &dir.join(format!("{stem}.png")),
                io::PngDepth::Sixteen,
            )
            .unwrap();
            stems.push(stem);
        }
        stems
    }

    fn write_test_images(dir: &Path, count: usize) -> Vec<String> {
        write_test_images_sized(dir, count, 48, 64)
    }

    #[test]
    fn zero_spectrum_produces_unit_metrics_and_untouched_images() {
        let tmp = tempdir().unwrap();
        let images_dir = tmp.path().join("images");
        write_test_images(&images_dir, 2);
        let run_dir = tmp.path().join("run");
        let mut config = test_config(&run_dir, 1, 0);
        config.images_dir = Some(images_dir.clone());
        // zero-width ranges force the zero spectrum
        for r in &mut config.ranges {
            r.lo = 0.0;
            r.hi = 0.0;
        }
        let result = run_sweep(&config).unwrap();
        assert_eq!(result.rows.len(), 1);
        let row = &result.rows[0];
        assert_abs_diff_eq!(row.report.sr_x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.report.oig_y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.report.d_x_max, 0.0, epsilon = 1e-12);
        // perturbed output equals the input pixel for pixel
        let original = io::load_image_png(&images_dir.join("img00.png")).unwrap();
        let blurred =
            io::load_image_png(&run_dir.join("perturbed/0/img00.png")).unwrap();
        for (a, b) in original.data().iter().zip(blurred.data().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 0.0);
        }
    }

    #[test]
    fn identical_seeds_give_byte_identical_csv() {
        let tmp = tempdir().unwrap();
        let c1 = test_config(&tmp.path().join("a"), 5, 33);
        let c2 = test_config(&tmp.path().join("b"), 5, 33);
        run_sweep(&c1).unwrap();
        run_sweep(&c2).unwrap();
        let a = fs::read(tmp.path().join("a/sweep.csv")).unwrap();
        let b = fs::read(tmp.path().join("b/sweep.csv")).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn resume_skips_completed_ids_and_appends_the_rest() {
        let tmp = tempdir().unwrap();
        let full = test_config(&tmp.path().join("full"), 4, 7);
        let partial = test_config(&tmp.path().join("part"), 2, 7);
        run_sweep(&full).unwrap();
        // first run: two samples under a truncated config
        run_sweep(&partial).unwrap();
        // continue under the full config in the same directory: the config
        // differs, so this must be rejected
        let grown = SweepConfig {
            samples: 4,
            ..partial.clone()
        };
        assert!(run_sweep(&grown).is_err());
        // proper resume: same config, pre-seeded with the first two rows
        let resumed_dir = tmp.path().join("resumed");
        fs::create_dir_all(&resumed_dir).unwrap();
        let again = SweepConfig {
            output_dir: resumed_dir.clone(),
            ..full.clone()
        };
        // simulate an interrupted run: copy config + first two rows + spectra
        fs::write(
            resumed_dir.join("config.json"),
            fs::read(tmp.path().join("full/config.json")).unwrap(),
        )
        .unwrap();
        let full_csv = fs::read_to_string(tmp.path().join("full/sweep.csv")).unwrap();
        let head: Vec<&str> = full_csv.lines().take(3).collect();
        fs::write(resumed_dir.join("sweep.csv"), format!("{}\n", head.join("\n"))).unwrap();
        fs::create_dir_all(resumed_dir.join("spectra")).unwrap();
        for id in 0..2 {
            fs::write(
                resumed_dir.join(format!("spectra/{id}.json")),
                fs::read(tmp.path().join(format!("full/spectra/{id}.json"))).unwrap(),
            )
            .unwrap();
        }
        let result = run_sweep(&again).unwrap();
        assert_eq!(result.rows.len(), 4);
        let resumed_csv = fs::read_to_string(resumed_dir.join("sweep.csv")).unwrap();
        assert_eq!(resumed_csv, full_csv);
    }

    #[test]
    fn aberrated_sweep_blurs_images_and_degrades_metrics() {
        let tmp = tempdir().unwrap();
        let images_dir = tmp.path().join("images");
        write_test_images_sized(&images_dir, 1, 96, 128);
        let run_dir = tmp.path().join("run");
        let mut config = test_config(&run_dir, 1, 0);
        config.images_dir = Some(images_dir.clone());
        // pin the spectrum to a strong defocus
        for r in &mut config.ranges {
            let v = if r.index == 4 { 0.15 } else { 0.0 };
            r.lo = v;
            r.hi = v;
        }
        let result = run_sweep(&config).unwrap();
        let row = &result.rows[0];
        assert!(row.report.sr_x < 0.9);
        let original = io::load_image_png(&images_dir.join("img00.png")).unwrap();
        let blurred =
            io::load_image_png(&run_dir.join("perturbed/0/img00.png")).unwrap();
        let mut diff = 0.0f64;
        for (a, b) in original.data().iter().zip(blurred.data().iter()) {
            diff += (a - b).abs();
        }
        assert!(diff > 1.0, "blur changed almost nothing: {diff}");
    }

    #[test]
    fn eval_rows_appear_once_predictions_exist() {
        let tmp = tempdir().unwrap();
        let images_dir = tmp.path().join("images");
        let labels_dir = tmp.path().join("labels");
        let stems = write_test_images(&images_dir, 2);
        fs::create_dir_all(&labels_dir).unwrap();
        for stem in &stems {
            let labels = Array2::from_shape_fn((48, 64), |(r, _)| u16::from(r >= 24));
            io::save_label_png(&labels.view(), &labels_dir.join(format!("{stem}.png")))
                .unwrap();
        }
        let run_dir = tmp.path().join("run");
        let mut config = test_config(&run_dir, 2, 5);
        config.images_dir = Some(images_dir);
        config.labels_dir = Some(labels_dir);
        // pass 1: optics + perturbed images only
        let first = run_sweep(&config).unwrap();
        assert!(first.rows.iter().all(|r| r.eval.is_none()));
        assert!(!run_dir.join("eval.csv").exists());
        // external model drops perfect predictions for sample 1
        let pred_dir = run_dir.join("predictions/1");
        fs::create_dir_all(&pred_dir).unwrap();
        for stem in &stems {
            let probs = Array3::from_shape_fn((48, 64, 2), |(r, _, k)| {
                let hot = usize::from(r >= 24);
                if k == hot {
                    0.9
                } else {
                    0.1
                }
            });
            io::save_probability_npy(&probs, &pred_dir.join(format!("{stem}.npy"))).unwrap();
        }
        // pass 2: resume picks up the predictions and closes the loop
        let second = run_sweep(&config).unwrap();
        assert!(second.rows[0].eval.is_none());
        let eval = second.rows[1].eval.expect("sample 1 evaluated");
        assert_abs_diff_eq!(eval.miou, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eval.weighted_conf, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(eval.weighted_acc, 1.0, epsilon = 1e-12);
        let eval_csv = fs::read_to_string(run_dir.join("eval.csv")).unwrap();
        assert_eq!(eval_csv.lines().count(), 2);
        assert!(eval_csv.lines().nth(1).unwrap().starts_with("images,1,"));
        // pass 3: nothing recomputed, eval row not duplicated
        let third = run_sweep(&config).unwrap();
        assert_eq!(
            fs::read_to_string(run_dir.join("eval.csv")).unwrap(),
            eval_csv
        );
        assert!(third.rows[1].eval.is_some());
    }

    #[test]
    fn missing_images_dir_is_a_startup_error() {
        let tmp = tempdir().unwrap();
        let mut config = test_config(&tmp.path().join("run"), 1, 0);
        config.images_dir = Some(tmp.path().join("nonexistent"));
        assert!(run_sweep(&config).is_err());
    }
}
