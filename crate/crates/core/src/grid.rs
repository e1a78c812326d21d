//! Sampling grids shared by builders and certification sweeps.

use crate::builders::CompactBox;

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * step })
        .collect()
}

/// Product grid over a box with roughly `total` points overall (per-dim count
/// is the rounded-up `dim`-th root). Supports dimensions 1..=3.
pub fn product_grid(bx: &CompactBox, total: usize) -> Vec<Vec<f64>> {
    let n = bx.dim();
    assert!((1..=3).contains(&n), "product grids support dims 1..=3");
    let per_dim = ((total as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| uniform(bx.lower()[i], bx.upper()[i], per_dim))
        .collect();
    let mut points = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        points.push((0..n).map(|i| axes[i][idx[i]]).collect());
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == n {
                return points;
            }
        }
    }
}

/// Merge extra coordinates (e.g. breakpoints) into a sorted deduplicated axis.
pub fn with_breakpoints(axis: &[f64], breakpoints: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut all: Vec<f64> = axis
        .iter()
        .chain(breakpoints.iter().filter(|b| **b >= lo && **b <= hi))
        .copied()
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.dedup();
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_includes_endpoints() {
        let g = uniform(-1.0, 2.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 2.0);
    }

    #[test]
    fn product_grid_covers_box() {
        let bx = CompactBox::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let pts = product_grid(&bx, 100);
        assert!(pts.len() >= 100);
        assert!(pts.iter().all(|p| bx.contains(p)));
    }
}
