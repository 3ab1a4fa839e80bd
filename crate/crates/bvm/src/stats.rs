//! Mergeable running moments and a sparse fixed-width histogram.

use std::collections::BTreeMap;

/// Running count, mean and centered sum of squares (Welford), mergeable with
/// Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.count as f64 * w;
        self.count += other.count;
    }

    /// Unbiased variance; NaN below two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// `sd / √count`.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Histogram with bins `[k/10, (k+1)/10)`; only occupied bins are stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Histogram {
    bins: BTreeMap<i64, u64>,
}

const BINS_PER_UNIT: f64 = 10.0;

impl Histogram {
    pub const BIN_WIDTH: f64 = 1.0 / BINS_PER_UNIT;

    pub fn push(&mut self, x: f64) {
        if x.is_finite() {
            *self
                .bins
                .entry((x * BINS_PER_UNIT).floor() as i64)
                .or_default() += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (k, c) in &other.bins {
            *self.bins.entry(*k).or_default() += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.bins.values().sum()
    }

    /// `(bin_left, bin_right, count)` in increasing order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.bins.iter().map(|(k, c)| {
            (
                *k as f64 / BINS_PER_UNIT,
                (*k + 1) as f64 / BINS_PER_UNIT,
                *c,
            )
        })
    }

    /// Mean of the bin midpoints weighted by counts.
    pub fn midpoint_mean(&self) -> f64 {
        let total = self.total() as f64;
        self.rows()
            .map(|(l, r, c)| 0.5 * (l + r) * c as f64)
            .sum::<f64>()
            / total
    }

    /// `hist.csv` contents.
    pub fn to_csv(&self) -> crate::error::Result<String> {
        crate::output::csv_string(
            &["bin_left", "bin_right", "count"],
            self.rows()
                .map(|(l, r, c)| [l.to_string(), r.to_string(), c.to_string()]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.5, -2.0, 3.25, 0.0, 7.0, 2.5];
        let m: Moments = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 6.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((m.mean - mean).abs() < 1e-14);
        assert!((m.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..100)
            .map(|i| ((i * 37) % 23) as f64 * 0.3 - 2.0)
            .collect();
        let all: Moments = xs.iter().copied().collect();
        let mut merged = Moments::default();
        for chunk in xs.chunks(7) {
            merged.merge(&chunk.iter().copied().collect());
        }
        assert_eq!(merged.count, 100);
        assert!((merged.mean - all.mean).abs() < 1e-13);
        assert!((merged.variance() - all.variance()).abs() < 1e-12);
        let mut empty = Moments::default();
        empty.merge(&Moments::default());
        assert_eq!(empty.count, 0);
        assert!(empty.variance().is_nan());
    }

    #[test]
    fn histogram_bins_and_csv() {
        let mut h = Histogram::default();
        for x in [0.05, 0.3, 0.31, -0.05, -0.1, f64::NAN] {
            h.push(x);
        }
        assert_eq!(h.total(), 5);
        let rows: Vec<_> = h.rows().collect();
        assert_eq!(rows[0], (-0.1, 0.0, 2));
        assert_eq!(rows[1], (0.0, 0.1, 1));
        assert_eq!(rows[2], (0.3, 0.4, 2));
        let csv = h.to_csv().unwrap();
        assert!(csv.starts_with("bin_left,bin_right,count\n-0.1,0,2\n"));
    }

    #[test]
    fn midpoints_reconstruct_mean_within_half_bin() {
        let xs: Vec<f64> = (0..1000)
            .map(|i| (i as f64 * 0.7371).sin() * 3.0 + 0.4)
            .collect();
        let mut h = Histogram::default();
        xs.iter().for_each(|x| h.push(*x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((h.midpoint_mean() - mean).abs() <= Histogram::BIN_WIDTH / 2.0);
    }
}
