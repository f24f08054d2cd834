//! Edge stretch and best-fit scale statistics of a metric against its
//! reference, both given on the input connectivity.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conformal::best_fit_scale_factors;
use crate::error::{check_len, Result};
use crate::mesh::HalfedgeMesh;

#[derive(Clone, Debug)]
pub struct StretchStats {
    /// `ℓ/ℓ0` per edge.
    pub stretch: Vec<f64>,
    /// Best-fit scale factor per vertex.
    pub u: Vec<f64>,
    pub summary: StatsSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub vertices: usize,
    pub edges: usize,
    pub mean_stretch: f64,
    pub min_stretch: f64,
    pub max_stretch: f64,
    pub max_abs_u: f64,
    pub rms_u: f64,
}

pub fn stretch_stats(mesh: &HalfedgeMesh, lambda0: &[f64], lambda: &[f64]) -> Result<StretchStats> {
    check_len(mesh.n_edges(), lambda0.len())?;
    check_len(mesh.n_edges(), lambda.len())?;
    let stretch: Vec<f64> = lambda
        .iter()
        .zip(lambda0)
        .map(|(l, l0)| ((l - l0) / 2.0).exp())
        .collect();
    let u = best_fit_scale_factors(mesh, lambda, lambda0)?;
    let n = stretch.len() as f64;
    let summary = StatsSummary {
        vertices: mesh.n_vertices(),
        edges: mesh.n_edges(),
        mean_stretch: stretch.iter().sum::<f64>() / n,
        min_stretch: stretch.iter().copied().fold(f64::INFINITY, f64::min),
        max_stretch: stretch.iter().copied().fold(0.0, f64::max),
        max_abs_u: u.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        rms_u: (u.iter().map(|x| x * x).sum::<f64>() / u.len() as f64).sqrt(),
    };
    Ok(StretchStats {
        stretch,
        u,
        summary,
    })
}

/// Equal-width bins over `[min, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let bins = bins.max(1);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Vec::new();
    }
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c))
        .collect()
}

pub fn histogram_csv(values: &[f64], bins: usize) -> String {
    let mut s = String::from("bin_lo,bin_hi,count\n");
    for (a, b, c) in histogram(values, bins) {
        let _ = writeln!(s, "{a},{b},{c}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::apply_scaling;
    use crate::mesh::shapes;

    #[test]
    fn pure_scaling_is_recovered() {
        let (m, _) = shapes::icosphere::<f64>(1);
        let l0 = vec![0.1; m.n_edges()];
        let u: Vec<f64> = (0..m.n_vertices())
            .map(|v| (v as f64 * 0.7).sin() * 0.2)
            .collect();
        let s = stretch_stats(&m, &l0, &apply_scaling(&m, &l0, &u)).unwrap();
        for (a, b) in s.u.iter().zip(&u) {
            assert!((a - b).abs() < 1e-10);
        }
        let same = stretch_stats(&m, &l0, &l0).unwrap().summary;
        assert_eq!(
            (same.min_stretch, same.max_stretch, same.max_abs_u),
            (1.0, 1.0, 0.0)
        );
    }

    #[test]
    fn histogram_counts_everything() {
        let v = [1.0, 1.5, 2.0, 2.0, 3.0];
        let h = histogram(&v, 4);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 5);
        assert_eq!(h[3].2, 1);
        assert_eq!(histogram(&[2.0, 2.0], 3)[0].2, 2);
    }
}
