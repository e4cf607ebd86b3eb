use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::fill::{fill_series, FilledSeries};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::los::{BinEdges, LosClass};
use crate::marts::SeriesMart;
use crate::matrix::Matrix;

/// A fixed-length slice of one stay, labelled with the remaining-LOS class
/// at its last row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub x: Matrix,
    pub label: usize,
    pub stay_id: i64,
    pub start: usize,
}

/// `floor((len - window) / step) + 1` windows fit, or none when the series is shorter than one window.
pub fn window_count(len: usize, window: usize, step: usize) -> usize {
    if window == 0 || step == 0 || len < window {
        0
    } else {
        (len - window) / step + 1
    }
}

fn check(window: usize, step: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    if step == 0 {
        return Err(Error::invalid("step", "must be at least 1"));
    }
    Ok(())
}

/// Windows starting at `0, step, 2 * step, ..` that fit inside the series.
pub fn make_windows(series: &FilledSeries, window: usize, step: usize, edges: &BinEdges) -> Result<Vec<WindowSample>> {
    check(window, step)?;
    let n = window_count(series.x.rows(), window, step);
    Ok((0..n)
        .map(|w| {
            let start = w * step;
            let rows: Vec<usize> = (start..start + window).collect();
            WindowSample {
                x: series.x.select_rows(&rows),
                label: edges.bin_nonnegative(series.remaining_days[start + window - 1]).code(),
                stay_id: series.stay_id,
                start,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub stays: usize,
    /// Stays shorter than one window.
    pub short_stays: usize,
    pub windows: usize,
    pub class_counts: [usize; LosClass::COUNT],
}

/// Fills every stay of the mart and cuts it into windows. Stays are
/// processed on `exec`; the output keeps mart order.
pub fn build_windows<E: Executor>(
    mart: &SeriesMart,
    medians: &[f64],
    window: usize,
    step: usize,
    exec: &E,
) -> Result<(Vec<WindowSample>, WindowReport)> {
    check(window, step)?;
    let edges = mart.meta.bin_edges;
    let per_stay = exec.map(mart.series.len(), |i| -> Result<Vec<WindowSample>> {
        let s = &mart.series[i];
        if s.len() < window {
            return Ok(Vec::new());
        }
        make_windows(&fill_series(s, mart.tests(), medians)?, window, step, &edges)
    });
    let mut report = WindowReport {
        stays: mart.series.len(),
        ..WindowReport::default()
    };
    let mut out = Vec::new();
    for w in per_stay {
        let w = w?;
        if w.is_empty() {
            report.short_stays += 1;
        }
        for s in &w {
            report.class_counts[s.label] += 1;
        }
        out.extend(w);
    }
    report.windows = out.len();
    Ok((out, report))
}

/// Per-channel z-scoring fitted on the rows of a set of windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelScaler {
    pub fn fit(samples: &[WindowSample]) -> Result<ChannelScaler> {
        let first = samples.first().ok_or(Error::Empty("windows"))?;
        let width = first.x.cols();
        let mut sum = alloc::vec![0.0; width];
        let mut sq = alloc::vec![0.0; width];
        let mut n = 0.0;
        for s in samples {
            if s.x.cols() != width {
                return Err(Error::Shape(alloc::format!(
                    "window with {} channels, expected {width}",
                    s.x.cols()
                )));
            }
            for row in s.x.iter_rows() {
                for (j, &v) in row.iter().enumerate() {
                    sum[j] += v;
                    sq[j] += v * v;
                }
                n += 1.0;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                let var = (q / n - m * m).max(0.0);
                let sd = num_traits::Float::sqrt(var);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(ChannelScaler { mean, std })
    }

    pub fn transform(&self, samples: &mut [WindowSample]) {
        for s in samples {
            let cols = s.x.cols();
            for (k, v) in s.x.as_mut_slice().iter_mut().enumerate() {
                let j = k % cols;
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
    }
}
