use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marts::{ChannelKind, SeriesMart, StaySeries, TestChannel};
use crate::matrix::Matrix;

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Channel names of a filled series: value, in-norm flag and observation
/// mask per test, then days since the start of the stay.
pub fn channel_names(tests: &[TestChannel]) -> Vec<String> {
    let mut names = Vec::with_capacity(3 * tests.len() + 1);
    for t in tests {
        names.push(t.abbreviation.clone());
        names.push(format!("{}_in_norm", t.abbreviation));
        names.push(format!("{}_mask", t.abbreviation));
    }
    names.push(String::from("elapsed_days"));
    names
}

/// Dense per-row channels of one stay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledSeries {
    pub stay_id: i64,
    pub x: Matrix,
    pub remaining_days: Vec<f64>,
}

/// Fallback value per test for stays that never observe it: the median of
/// all observed values for numeric tests, the most frequent code for
/// categorical ones. With `stays` set only those stays contribute.
pub fn channel_medians(mart: &SeriesMart, stays: Option<&BTreeSet<i64>>) -> Vec<f64> {
    let tests = mart.tests();
    let mut values: Vec<Vec<f64>> = alloc::vec![Vec::new(); tests.len()];
    for s in mart
        .series
        .iter()
        .filter(|s| stays.is_none_or(|set| set.contains(&s.stay.stay_id)))
    {
        for o in s.observations() {
            values[o.channel as usize].push(o.reading.value);
        }
    }
    tests
        .iter()
        .zip(values)
        .map(|(t, mut v)| {
            if v.is_empty() {
                return match (t.low, t.high) {
                    (Some(lo), Some(hi)) => (lo + hi) / 2.0,
                    (Some(x), None) | (None, Some(x)) => x,
                    (None, None) => 0.0,
                };
            }
            v.sort_by(f64::total_cmp);
            match t.kind {
                ChannelKind::Numeric => {
                    let m = v.len() / 2;
                    if v.len() % 2 == 1 {
                        v[m]
                    } else {
                        (v[m - 1] + v[m]) / 2.0
                    }
                }
                ChannelKind::Categorical => {
                    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
                    for x in &v {
                        *counts.entry(x.to_bits()).or_default() += 1;
                    }
                    // Codes are non-negative, so bit order is numeric order and ties keep the lowest code.
                    let mut best = (0u64, 0usize);
                    for (bits, n) in counts {
                        if n > best.1 {
                            best = (bits, n);
                        }
                    }
                    f64::from_bits(best.0)
                }
            }
        })
        .collect()
}

/// Linear interpolation in time between observations, constant extension
/// outside them. `points` is non-empty and sorted by time.
fn interpolate_at(points: &[(f64, f64)], t: f64) -> f64 {
    let k = points.partition_point(|p| p.0 <= t);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[k - 1].1;
    }
    let (t0, v0) = points[k - 1];
    let (t1, v1) = points[k];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Fills every row of a stay. Numeric values are interpolated linearly in
/// time and held constant before the first and after the last observation;
/// categorical codes and in-norm flags are carried forward (and backward
/// from the first observation). Unobserved tests get `medians[test]`, an
/// in-norm flag of 1 and a zero mask.
pub fn fill_series(series: &StaySeries, tests: &[TestChannel], medians: &[f64]) -> Result<FilledSeries> {
    if series.is_empty() {
        return Err(Error::Empty("stay rows"));
    }
    if medians.len() != tests.len() {
        return Err(Error::Shape(format!(
            "{} medians for {} tests",
            medians.len(),
            tests.len()
        )));
    }
    let rows = series.len();
    let width = 3 * tests.len() + 1;
    let mut x = Matrix::zeros(rows, width);
    let time = |r: usize| series.offset_seconds(r) as f64;
    for (c, test) in tests.iter().enumerate() {
        let points: Vec<(usize, f64, bool)> = series
            .channel_points(c)
            .map(|(r, reading)| (r, reading.value, reading.in_norm))
            .collect();
        let (vc, nc, mc) = (3 * c, 3 * c + 1, 3 * c + 2);
        if points.is_empty() {
            for r in 0..rows {
                x.set(r, vc, medians[c]);
                x.set(r, nc, 1.0);
            }
            continue;
        }
        for &(r, _, _) in &points {
            x.set(r, mc, 1.0);
        }
        // Carried forward from the latest observation at or before each row.
        let mut next = 0;
        let mut carried = (points[0].1, points[0].2);
        let timed: Vec<(f64, f64)> = points.iter().map(|&(r, v, _)| (time(r), v)).collect();
        for r in 0..rows {
            while next < points.len() && points[next].0 <= r {
                carried = (points[next].1, points[next].2);
                next += 1;
            }
            let value = match test.kind {
                ChannelKind::Numeric => interpolate_at(&timed, time(r)),
                ChannelKind::Categorical => carried.0,
            };
            x.set(r, vc, value);
            x.set(r, nc, f64::from(u8::from(carried.1)));
        }
    }
    for r in 0..rows {
        x.set(r, width - 1, time(r) / SECONDS_PER_DAY);
    }
    Ok(FilledSeries {
        stay_id: series.stay.stay_id,
        x,
        remaining_days: (0..rows).map(|r| series.remaining_los_days(r)).collect(),
    })
}
