//! Worst-case envelope of a scatter relation: equal-width bins over the
//! x-range, per-bin minimum and quartile statistics of y.

use crate::error::{Error, Result};
use crate::shapley::QuartileSummary;

/// Statistics of one populated bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBin {
    pub x_lo: f64,
    pub x_hi: f64,
    pub stats: QuartileSummary,
}

/// Per-bin summary over the full x-range; unpopulated bins are `None`
/// (gaps, not zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    bins: Vec<Option<EnvelopeBin>>,
}

impl Envelope {
    pub fn bins(&self) -> &[Option<EnvelopeBin>] {
        &self.bins
    }

    /// The envelope proper: per populated bin, (bin left edge, min y).
    pub fn minima(&self) -> Vec<(f64, f64)> {
        self.bins
            .iter()
            .flatten()
            .map(|b| (b.x_lo, b.stats.min))
            .collect()
    }
}

/// Bin the points into `bins` equal-width intervals over [min x, max x]
/// and summarize y within each. The right edge of the last bin is closed.
pub fn envelope(points: &[(f64, f64)], bins: usize) -> Result<Envelope> {
    if bins == 0 {
        return Err(Error::config("envelope needs at least one bin"));
    }
    if points.is_empty() {
        return Err(Error::data("envelope needs at least one point"));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::data(format!("non-finite envelope point ({x}, {y})")));
        }
    }
    let x_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        return Err(Error::data(format!(
            "degenerate x-range: all {} points at x = {x_min}",
            points.len()
        )));
    }
    let width = (x_max - x_min) / bins as f64;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for &(x, y) in points {
        let i = (((x - x_min) / width) as usize).min(bins - 1);
        buckets[i].push(y);
    }
    let bins_out = buckets
        .into_iter()
        .enumerate()
        .map(|(i, ys)| {
            if ys.is_empty() {
                Ok(None)
            } else {
                Ok(Some(EnvelopeBin {
                    x_lo: x_min + i as f64 * width,
                    x_hi: x_min + (i + 1) as f64 * width,
                    stats: QuartileSummary::of(&ys)?,
                }))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Envelope { bins: bins_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn monotone_dense_sampling_tracks_the_function_at_left_edges() {
        // y = x^2 is increasing on [0, 4]: bin minimum = f(left edge)
        let points: Vec<(f64, f64)> = (0..=4000)
            .map(|i| {
                let x = i as f64 / 1000.0;
                (x, x * x)
            })
            .collect();
        let env = envelope(&points, 8).unwrap();
        let minima = env.minima();
        assert_eq!(minima.len(), 8);
        for (x_lo, min_y) in minima {
            assert_abs_diff_eq!(min_y, x_lo * x_lo, epsilon = 1e-2);
        }
    }

    #[test]
    fn ten_hand_points_two_bins() {
        // x in [0, 9], width 4.5: bin 0 holds x in [0, 4.5), bin 1 the rest
        let points: Vec<(f64, f64)> = vec![
            (0.0, 5.0),
            (1.0, 3.0),
            (2.0, 4.0),
            (3.0, 9.0),
            (4.0, 2.0),
            (5.0, 8.0),
            (6.0, 1.0),
            (7.0, 7.0),
            (8.0, 6.0),
            (9.0, 0.5),
        ];
        let env = envelope(&points, 2).unwrap();
        let b0 = env.bins()[0].unwrap();
        let b1 = env.bins()[1].unwrap();
        assert_eq!(b0.stats.count, 5);
        assert_eq!(b1.stats.count, 5);
        assert_abs_diff_eq!(b0.stats.min, 2.0, epsilon = 0.0);
        assert_abs_diff_eq!(b1.stats.min, 0.5, epsilon = 0.0);
        assert_abs_diff_eq!(b0.stats.median, 4.0, epsilon = 0.0);
        assert_abs_diff_eq!(b1.stats.median, 6.0, epsilon = 0.0);
    }

    #[test]
    fn single_point_bin_collapses_to_that_point() {
        let points = vec![(0.0, 1.0), (1.0, 2.0), (10.0, 7.0)];
        let env = envelope(&points, 5).unwrap();
        let last = env.bins()[4].unwrap();
        assert_eq!(last.stats.count, 1);
        assert_abs_diff_eq!(last.stats.min, 7.0, epsilon = 0.0);
        assert_abs_diff_eq!(last.stats.median, 7.0, epsilon = 0.0);
        assert_abs_diff_eq!(last.stats.q1, 7.0, epsilon = 0.0);
        // bins 1..4 are empty gaps
        assert!(env.bins()[2].is_none());
        assert!(env.bins()[3].is_none());
    }

    #[test]
    fn identical_x_values_are_a_degenerate_range() {
        let points = vec![(2.0, 1.0), (2.0, 5.0), (2.0, 3.0)];
        let err = envelope(&points, 4).unwrap_err();
        assert!(err.to_string().contains("degenerate"));
    }

    #[test]
    fn maximum_x_lands_in_the_last_bin() {
        let points = vec![(0.0, 1.0), (1.0, 2.0)];
        let env = envelope(&points, 4).unwrap();
        assert_eq!(env.bins()[3].unwrap().stats.count, 1);
    }
}
