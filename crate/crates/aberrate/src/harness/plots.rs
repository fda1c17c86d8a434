//! SVG figures over sweep results: metric scatter with worst-case
//! envelope, attribution boxplots, reliability diagrams, and a Strehl
//! histogram. File names embed the config hash, so re-plotting the same
//! run overwrites the same files.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::harness::envelope::envelope;
use crate::harness::sweep::{eval_report_for, EvalSummary, SweepResult};
use crate::merit::OpticalReport;
use crate::segeval::EceReport;
use crate::shapley::DistributionReport;

const PLOT_SIZE: (u32, u32) = (900, 600);

fn plot_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::data(format!("cannot render {}: {e}", path.display()))
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

/// Scatter of (x, y) points with the per-bin minimum envelope and
/// quartile bars overlaid. With too few points for a meaningful envelope
/// (or a degenerate x-range) only the scatter is drawn.
pub fn scatter_envelope_plot(
    points: &[(f64, f64)],
    bins: usize,
    x_label: &str,
    y_label: &str,
    caption: &str,
    path: &Path,
) -> Result<()> {
    if points.is_empty() {
        return Err(Error::data("nothing to plot: no points"));
    }
    let (x_lo, x_hi) = padded_range(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = padded_range(points.iter().map(|p| p.1));
    let root = SVGBackend::new(path, PLOT_SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(56)
        .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
        .map_err(plot_err(path))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(plot_err(path))?;
    chart
        .draw_series(
            points
                .iter()
                .map(|&(x, y)| Circle::new((x, y), 3, BLUE.mix(0.45).filled())),
        )
        .map_err(plot_err(path))?;
    // envelope overlay is best-effort: a single point or identical x
    // values simply leave it off
    if points.len() >= 2 {
        if let Ok(env) = envelope(points, bins) {
            let minima = env.minima();
            let mut steps = Vec::new();
            for (i, &(x_lo, min)) in minima.iter().enumerate() {
                steps.push((x_lo, min));
                let next_x = minima.get(i + 1).map(|p| p.0).unwrap_or(x_hi);
                steps.push((next_x, min));
            }
            chart
                .draw_series(LineSeries::new(steps, RED.stroke_width(2)))
                .map_err(plot_err(path))?
                .label("envelope (bin minimum)")
                .legend(|(x, y)| {
                    PathElement::new(vec![(x, y), (x + 18, y)], RED.stroke_width(2))
                });
            chart
                .draw_series(env.bins().iter().flatten().map(|b| {
                    let x = (b.x_lo + b.x_hi) / 2.0;
                    ErrorBar::new_vertical(
                        x,
                        b.stats.q1,
                        b.stats.median,
                        b.stats.q3,
                        BLACK.filled(),
                        6,
                    )
                }))
                .map_err(plot_err(path))?;
            chart
                .configure_series_labels()
                .border_style(BLACK)
                .background_style(WHITE.mix(0.85))
                .draw()
                .map_err(plot_err(path))?;
        }
    }
    root.present().map_err(plot_err(path))?;
    Ok(())
}

/// One box per feature over the per-grid-point attribution values.
pub fn shapley_boxplot(report: &DistributionReport, path: &Path) -> Result<()> {
    if report.points.is_empty() {
        return Err(Error::data("nothing to plot: no successful grid points"));
    }
    let labels: Vec<String> = report.features.iter().map(|f| format!("w{f}")).collect();
    let all: Vec<f64> = report
        .points
        .iter()
        .flat_map(|p| p.phi.iter().copied())
        .collect();
    let (y_lo, y_hi) = padded_range(all.iter().copied());
    let root = SVGBackend::new(path, PLOT_SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let caption = format!(
        "attribution of {} over {} grid points ({} failed)",
        report.merit,
        report.points.len(),
        report.failures.len()
    );
    // plotters' Quartiles/Boxplot work in f32
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(56)
        .build_cartesian_2d(labels[..].into_segmented(), y_lo as f32..y_hi as f32)
        .map_err(plot_err(path))?;
    chart
        .configure_mesh()
        .x_desc("coefficient")
        .y_desc("attribution")
        .draw()
        .map_err(plot_err(path))?;
    for (i, label) in labels.iter().enumerate() {
        let values: Vec<f64> = report.points.iter().map(|p| p.phi[i]).collect();
        chart
            .draw_series(std::iter::once(
                Boxplot::new_vertical(
                    SegmentValue::CenterOf(label),
                    &Quartiles::new(&values),
                )
                .width(28)
                .style(BLUE),
            ))
            .map_err(plot_err(path))?;
    }
    root.present().map_err(plot_err(path))?;
    Ok(())
}

/// Reliability diagram: per-bin mean accuracy as bars against the
/// identity diagonal, bar width = bin width.
pub fn reliability_plot(ece: &EceReport, caption: &str, path: &Path) -> Result<()> {
    let bins = ece.bins.len();
    if bins == 0 {
        return Err(Error::data("nothing to plot: no reliability bins"));
    }
    let width = 1.0 / bins as f64;
    let root = SVGBackend::new(path, PLOT_SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(
            format!("{caption} (ECE = {:.4})", ece.overall_ece),
            ("sans-serif", 22),
        )
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(56)
        .build_cartesian_2d(0.0..1.0, 0.0..1.0)
        .map_err(plot_err(path))?;
    chart
        .configure_mesh()
        .x_desc("confidence")
        .y_desc("accuracy")
        .draw()
        .map_err(plot_err(path))?;
    chart
        .draw_series(ece.bins.iter().enumerate().filter(|(_, b)| b.count > 0).map(
            |(i, b)| {
                let lo = i as f64 * width;
                Rectangle::new(
                    [(lo + width * 0.08, 0.0), (lo + width * 0.92, b.mean_accuracy)],
                    BLUE.mix(0.5).filled(),
                )
            },
        ))
        .map_err(plot_err(path))?;
    chart
        .draw_series(LineSeries::new(
            [(0.0, 0.0), (1.0, 1.0)],
            BLACK.stroke_width(1),
        ))
        .map_err(plot_err(path))?;
    root.present().map_err(plot_err(path))?;
    Ok(())
}

/// Histogram of a metric over the sweep, equal-width bins on [lo, hi].
fn metric_histogram(
    values: &[f64],
    bins: usize,
    label: &str,
    caption: &str,
    path: &Path,
) -> Result<()> {
    if values.is_empty() {
        return Err(Error::data("nothing to plot: no values"));
    }
    let (lo, hi) = padded_range(values.iter().copied());
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u32; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let max_count = *counts.iter().max().unwrap_or(&1);
    let root = SVGBackend::new(path, PLOT_SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(56)
        .build_cartesian_2d(lo..hi, 0u32..max_count + 1)
        .map_err(plot_err(path))?;
    chart
        .configure_mesh()
        .x_desc(label)
        .y_desc("count")
        .draw()
        .map_err(plot_err(path))?;
    chart
        .draw_series(counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| {
            let x0 = lo + i as f64 * width;
            Rectangle::new([(x0, 0), (x0 + width, c)], BLUE.mix(0.5).filled())
        }))
        .map_err(plot_err(path))?;
    root.present().map_err(plot_err(path))?;
    Ok(())
}

/// Render the standard figure set for a sweep into `<run_dir>/plots`,
/// returning the emitted files. Evaluation-dependent figures are skipped
/// with a notice when no evaluation rows exist; attribution boxplots are
/// drawn for whatever distribution reports are passed in.
pub fn emit_plots(
    result: &SweepResult,
    attributions: &[DistributionReport],
) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::data("nothing to plot: the sweep has no rows"));
    }
    let plots_dir = result.run_dir.join("plots");
    std::fs::create_dir_all(&plots_dir).map_err(|e| Error::io(&plots_dir, e))?;
    let hash = &result.config_hash;
    let mut emitted = Vec::new();

    let sr: Vec<f64> = result.rows.iter().map(|r| r.report.sr_x).collect();
    let hist = plots_dir.join(format!("sr_hist_{hash}.svg"));
    metric_histogram(
        &sr,
        result.config.envelope_bins,
        "Strehl ratio (horizontal)",
        "Strehl ratio over the sweep",
        &hist,
    )?;
    emitted.push(hist);

    type OpticalGetter = (&'static str, fn(&OpticalReport) -> f64);
    type EvalGetter = (&'static str, fn(&EvalSummary) -> f64);
    let optical: [OpticalGetter; 4] = [
        ("sr_x", |r| r.sr_x),
        ("oig_x", |r| r.oig_x),
        ("mtf_hn_x", |r| r.mtf_hn_x),
        ("d_x_max", |r| r.d_x_max),
    ];
    let evals: [EvalGetter; 2] = [("miou", |e| e.miou), ("mece", |e| e.mece)];
    let have_eval = result.rows.iter().any(|r| r.eval.is_some());
    if have_eval {
        for (x_name, x_get) in optical {
            for (y_name, y_get) in evals {
                let points = result.metric_points(x_get, y_get);
                if points.is_empty() {
                    continue;
                }
                let path = plots_dir.join(format!("scatter_{y_name}_vs_{x_name}_{hash}.svg"));
                scatter_envelope_plot(
                    &points,
                    result.config.envelope_bins,
                    x_name,
                    y_name,
                    &format!("{y_name} against {x_name}"),
                    &path,
                )?;
                emitted.push(path);
            }
        }
        // reliability diagram for the first evaluated sample
        if let Some(row) = result.rows.iter().find(|r| r.eval.is_some()) {
            if let Some(report) = eval_report_for(&result.config, row.id)? {
                let path = plots_dir.join(format!("reliability_{}_{hash}.svg", row.id));
                reliability_plot(
                    &report.ece,
                    &format!("reliability, sample {}", row.id),
                    &path,
                )?;
                emitted.push(path);
            }
        }
    } else {
        eprintln!("no evaluation rows; skipping evaluation figures");
    }

    for report in attributions {
        let path = plots_dir.join(format!("shapley_{}_{hash}.svg", report.merit));
        shapley_boxplot(report, &path)?;
        emitted.push(path);
    }
    Ok(emitted)
}
