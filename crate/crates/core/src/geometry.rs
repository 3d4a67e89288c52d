//! Distances between point clouds and simple sets.

use num_complex::Complex64;

/// Distance from `z` to the segment `[p, q]`.
pub fn distance_to_segment(z: Complex64, p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - p).norm();
    }
    let t = (((z - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (p + d * t)).norm()
}

/// Hausdorff distance between a finite set and the segment `[p, q]`.
///
/// The segment-to-set part is exact: along the segment the squared distance
/// to the nearest point is `s² + min_i (m_i s + c_i)`, which is convex
/// between the breakpoints of the lower envelope of the lines.
pub fn hausdorff_to_segment(points: &[Complex64], p: Complex64, q: Complex64) -> f64 {
    if points.is_empty() {
        return f64::INFINITY;
    }
    let to_seg = points.iter().map(|&z| distance_to_segment(z, p, q)).fold(0.0, f64::max);
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return to_seg;
    }
    let e = d / len;
    // s along the line, r across it
    let mut lines: Vec<(f64, f64)> = points
        .iter()
        .map(|&z| {
            let w = (z - p) * e.conj();
            (-2.0 * w.re, w.re * w.re + w.im * w.im)
        })
        .collect();
    lines.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    lines.dedup_by(|x, y| x.0 == y.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(lines.len());
    for l in lines {
        while hull.len() >= 2 {
            let (l1, l2) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // l2 is useless if l meets l1 before l2 does
            if (l.1 - l1.1) * (l1.0 - l2.0) <= (l2.1 - l1.1) * (l1.0 - l.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    let envelope = |s: f64| hull.iter().map(|&(m, c)| m * s + c).fold(f64::INFINITY, f64::min);
    let mut worst = (envelope(0.0)).max(len * len + envelope(len));
    for w in hull.windows(2) {
        let ((m1, c1), (m2, c2)) = (w[0], w[1]);
        let s = (c2 - c1) / (m1 - m2);
        if s > 0.0 && s < len {
            worst = worst.max(s * s + m1 * s + c1);
        }
    }
    to_seg.max(worst.max(0.0).sqrt())
}

/// Uniform bucket grid over a point set.
pub struct BucketGrid<'a> {
    points: &'a [Complex64],
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> BucketGrid<'a> {
    pub fn new(points: &'a [Complex64]) -> Self {
        let (lo, hi) = bounding_box(points);
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(f64::MIN_POSITIVE);
        let k = ((points.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = span / k as f64 * (1.0 + 1e-12);
        let nx = (((hi.re - lo.re) / cell).floor() as usize + 1).max(1);
        let ny = (((hi.im - lo.im) / cell).floor() as usize + 1).max(1);
        let key = |z: Complex64| {
            let i = (((z.re - lo.re) / cell) as usize).min(nx - 1);
            let j = (((z.im - lo.im) / cell) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for &z in points {
            counts[key(z) + 1] += 1;
        }
        for i in 0..nx * ny {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut order = vec![0; points.len()];
        for (idx, &z) in points.iter().enumerate() {
            let k = key(z);
            order[fill[k]] = idx;
            fill[k] += 1;
        }
        BucketGrid {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            start: counts,
            order,
        }
    }

    /// Distance from `points[idx]` to its nearest other point.
    pub fn nearest_other(&self, idx: usize) -> f64 {
        let z = self.points[idx];
        let ci = ((z.re - self.origin.re) / self.cell) as isize;
        let cj = ((z.im - self.origin.im) / self.cell) as isize;
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as isize;
        for ring in 0..=max_ring {
            // every point outside the searched square is at least this far
            if best <= (ring as f64 - 1.0).max(0.0) * self.cell {
                break;
            }
            for dj in -ring..=ring {
                for di in -ring..=ring {
                    if di.abs() != ring && dj.abs() != ring {
                        continue;
                    }
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                        continue;
                    }
                    let k = j as usize * self.nx + i as usize;
                    for &o in &self.order[self.start[k]..self.start[k + 1]] {
                        if o != idx {
                            best = best.min((self.points[o] - z).norm());
                        }
                    }
                }
            }
        }
        best
    }
}

/// Smallest axis-aligned box containing the points.
pub fn bounding_box(points: &[Complex64]) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in points {
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (lo, hi)
}

/// Median distance from each point to its nearest neighbour.
pub fn median_nn_spacing(points: &[Complex64]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let grid = BucketGrid::new(points);
    let mut d: Vec<f64> = (0..points.len()).map(|i| grid.nearest_other(i)).collect();
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Segment-to-set distance by dense sampling.
    fn sampled(points: &[Complex64], p: Complex64, q: Complex64, k: usize) -> f64 {
        let a = (0..=k)
            .map(|i| {
                let s = p + (q - p) * (i as f64 / k as f64);
                points.iter().map(|z| (z - s).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let b = points.iter().map(|&z| distance_to_segment(z, p, q)).fold(0.0, f64::max);
        a.max(b)
    }

    #[test]
    fn hausdorff_simple_cases() {
        let (p, q) = (c(0.0, -1.0), c(0.0, 1.0));
        assert!((hausdorff_to_segment(&[c(0.0, 0.0)], p, q) - 1.0).abs() < 1e-15);
        let pts: Vec<Complex64> = (0..=10).map(|i| c(0.0, -1.0 + 0.2 * i as f64)).collect();
        assert!((hausdorff_to_segment(&pts, p, q) - 0.1).abs() < 1e-12);
        let pts = [c(0.0, -0.5), c(0.0, 0.5)];
        assert!((hausdorff_to_segment(&pts, p, q) - 0.5).abs() < 1e-12);
        assert!((hausdorff_to_segment(&[c(3.0, 0.0)], c(0.0, 0.0), c(0.0, 0.0)) - 3.0).abs() < 1e-15);
        assert_eq!(distance_to_segment(c(2.0, 5.0), p, q), (4.0f64 + 16.0).sqrt());
    }

    #[test]
    fn nn_spacing_lattice() {
        let pts: Vec<Complex64> = (0..20).flat_map(|i| (0..30).map(move |j| c(i as f64 * 0.5, j as f64 * 0.5))).collect();
        assert!((median_nn_spacing(&pts) - 0.5).abs() < 1e-12);
        let line: Vec<Complex64> = (0..100).map(|i| c(0.0, i as f64 * 0.01)).collect();
        assert!((median_nn_spacing(&line) - 0.01).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hausdorff_matches_sampling(pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..25),
                                     px in -1.0f64..1.0, py in -1.0f64..1.0, qx in -1.0f64..1.0, qy in -1.0f64..1.0) {
            let pts: Vec<Complex64> = pts.into_iter().map(|(x, y)| c(x, y)).collect();
            let (p, q) = (c(px, py), c(qx, qy));
            let exact = hausdorff_to_segment(&pts, p, q);
            let approx = sampled(&pts, p, q, 4000);
            // sampling underestimates by at most half a sample spacing
            prop_assert!(exact >= approx - 1e-9);
            prop_assert!(exact <= approx + (q - p).norm() / 4000.0 + 1e-9);
        }

        #[test]
        fn nn_matches_brute(pts in prop::collection::vec((-5.0f64..5.0, -1.0f64..1.0), 2..60)) {
            let pts: Vec<Complex64> = pts.into_iter().map(|(x, y)| c(x, y)).collect();
            let g = BucketGrid::new(&pts);
            for i in 0..pts.len() {
                let brute = (0..pts.len()).filter(|&j| j != i).map(|j| (pts[j] - pts[i]).norm()).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(g.nearest_other(i), brute);
            }
        }
    }
}
