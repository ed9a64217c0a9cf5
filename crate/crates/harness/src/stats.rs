//! Small statistics helpers for comparing sweep cells.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with Bessel's correction.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Paired t-test on `a - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub mean_diff: f64,
    pub t: f64,
    pub df: f64,
    /// One-sided p-value for the alternative `mean(a - b) < 0`.
    pub p_less: f64,
    /// One-sided p-value for the alternative `mean(a - b) > 0`.
    pub p_greater: f64,
}

/// Returns `None` for fewer than two pairs or mismatched lengths.
pub fn paired_t(a: &[f64], b: &[f64]) -> Option<PairedT> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let se = (variance(&d) / n).sqrt();
    let df = n - 1.0;
    if se == 0.0 {
        let (p_less, p_greater) = match m.partial_cmp(&0.0)? {
            std::cmp::Ordering::Less => (0.0, 1.0),
            std::cmp::Ordering::Greater => (1.0, 0.0),
            std::cmp::Ordering::Equal => (0.5, 0.5),
        };
        let t = m.signum() * f64::INFINITY;
        return Some(PairedT {
            mean_diff: m,
            t,
            df,
            p_less,
            p_greater,
        });
    }
    let t = m / se;
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    let p_less = dist.cdf(t);
    Some(PairedT {
        mean_diff: m,
        t,
        df,
        p_less,
        p_greater: 1.0 - p_less,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Spearman rank correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}
