//! Slit maps for constant real or imaginary driving, their inverses, the
//! discrete composition of a driving path and hull point clouds.
//!
//! With constant driving `U ≡ x` the centered map is `√((z − x)² + 4t)`.
//! The imaginary variant `i√((iz + y)² − 4t)` is the same function of
//! `z − iy`, so both share one kernel `S_t(w) = √(w² + 4t)` whose branch is
//! the one asymptotic to `w`. It is analytic off the segment
//! `i[−2√t, 2√t]`; its inverse `√(w² − 4t)` is analytic off `[−2√t, 2√t]`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CovarianceSpec, DrivingPath, PathTransform};
use crate::streams::SeedRecord;

/// Default relative width of the excluded band around a slit.
pub const DEFAULT_SLIT_TOL: f64 = 1e-9;

/// Principal square root, exact under scaling by powers of four and under
/// conjugation.
#[inline]
pub fn csqrt(s: Complex64) -> Complex64 {
    let (p, q) = (s.re, s.im);
    if p == 0.0 && q == 0.0 {
        return Complex64::new(0.0, q);
    }
    let m = (p * p + q * q).sqrt();
    let u = ((m + p.abs()) * 0.5).sqrt();
    let v = q.abs() / (2.0 * u);
    if p >= 0.0 {
        Complex64::new(u, v.copysign(q))
    } else {
        Complex64::new(v, u.copysign(q))
    }
}

/// The square root of `s` lying in the closed half-plane `Re(r·w̄) ≥ 0`.
#[inline]
pub fn sqrt_near(s: Complex64, w: Complex64) -> Complex64 {
    let r = csqrt(s);
    if r.re * w.re + r.im * w.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Half-width `tol·(1 + |Re w| + |Im w|)` of the excluded band.
#[inline(always)]
fn slit_band(re: f64, im: f64, tol: f64) -> f64 {
    tol * (1.0 + re.abs() + im.abs())
}

/// `true` if `w` lies within the tolerance band of `i[−2√t, 2√t]`.
#[inline]
pub fn on_vertical_slit(w: Complex64, t: f64, tol: f64) -> bool {
    let d = slit_band(w.re, w.im, tol);
    w.re.abs() <= d && w.im.abs() <= 2.0 * t.sqrt() + d
}

/// `true` if `w` lies within the tolerance band of `[−2√t, 2√t]`.
#[inline]
pub fn on_horizontal_slit(w: Complex64, t: f64, tol: f64) -> bool {
    let d = slit_band(w.re, w.im, tol);
    w.im.abs() <= d && w.re.abs() <= 2.0 * t.sqrt() + d
}

fn on_slit_error(z: Complex64, center: Complex64, t: f64) -> Error {
    Error::OnSlit {
        z: format!("{z}"),
        center: format!("{center}"),
        t,
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("capacity time must be ≥ 0, got {t}")))
    }
}

/// Centered slit map `√((z − center)² + 4t)` with branch `~ z − center`.
pub fn slit_map(center: Complex64, t: f64, z: Complex64) -> Result<Complex64> {
    check_time(t)?;
    let w = z - center;
    if t == 0.0 {
        return Ok(w);
    }
    if on_vertical_slit(w, t, DEFAULT_SLIT_TOL) {
        return Err(on_slit_error(z, center, t));
    }
    Ok(sqrt_near(w * w + 4.0 * t, w))
}

/// Inverse of [`slit_map`]: `center + √(w² − 4t)` with branch `~ w`.
pub fn inverse_slit(center: Complex64, t: f64, w: Complex64) -> Result<Complex64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(w + center);
    }
    if on_horizontal_slit(w, t, DEFAULT_SLIT_TOL) {
        return Err(on_slit_error(w, center, t));
    }
    Ok(center + sqrt_near(w * w - 4.0 * t, w))
}

/// `φ_t^x(z) = √((z − x)² + 4t)`.
pub fn slit_map_real(x: f64, t: f64, z: Complex64) -> Result<Complex64> {
    slit_map(Complex64::new(x, 0.0), t, z)
}

/// `φ_t^{iy}(z) = i√((iz + y)² − 4t)`, normalized so that `φ_0^{iy}(z) = z − iy`.
pub fn slit_map_imag(y: f64, t: f64, z: Complex64) -> Result<Complex64> {
    slit_map(Complex64::new(0.0, y), t, z)
}

pub fn inverse_slit_real(x: f64, t: f64, w: Complex64) -> Result<Complex64> {
    inverse_slit(Complex64::new(x, 0.0), t, w)
}

pub fn inverse_slit_imag(y: f64, t: f64, w: Complex64) -> Result<Complex64> {
    inverse_slit(Complex64::new(0.0, y), t, w)
}

/// Values of the discrete chain at one point, one entry per half-step.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrajectory {
    /// `values[0] = z`, `values[j]` is the value after `j` half-step maps.
    pub values: Vec<Complex64>,
    /// Capacity time at each entry.
    pub times: Vec<f64>,
    /// Half-step index whose slit the point reached, if any.
    pub absorbed_at: Option<usize>,
}

impl ForwardTrajectory {
    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("non-empty trajectory")
    }

    /// Value after `k` full steps, if the point survived that long.
    pub fn at_step(&self, k: usize) -> Option<Complex64> {
        self.values.get(2 * k).copied()
    }
}

/// Apply the half-step maps with the given centers, each for time `tau`.
pub fn compose_centers(centers: &[Complex64], tau: f64, z: Complex64, tol: f64) -> ForwardTrajectory {
    let mut values = Vec::with_capacity(centers.len() + 1);
    let mut times = Vec::with_capacity(centers.len() + 1);
    values.push(z);
    times.push(0.0);
    let mut v = z;
    let mut absorbed_at = None;
    for (j, c) in centers.iter().enumerate() {
        let w = v - c;
        if on_vertical_slit(w, tau, tol) {
            absorbed_at = Some(j + 1);
            break;
        }
        v = sqrt_near(w * w + 4.0 * tau, w);
        values.push(v);
        times.push((j + 1) as f64 * tau);
    }
    ForwardTrajectory {
        values,
        times,
        absorbed_at,
    }
}

/// Run the discrete centered chain `f̂` of `path` on `z`.
pub fn compose_forward(path: &DrivingPath, z: Complex64) -> ForwardTrajectory {
    compose_forward_with(path, z, DEFAULT_SLIT_TOL)
}

pub fn compose_forward_with(path: &DrivingPath, z: Complex64, tol: f64) -> ForwardTrajectory {
    let tau = path.step() / 2.0;
    compose_centers(&path.half_step_centers(), tau, z, tol)
}

/// The uncentered map `g = f̂ + Û` after the full path, or `None` if `z` was
/// absorbed.
pub fn uncentered_map(path: &DrivingPath, z: Complex64) -> Option<Complex64> {
    let tr = compose_forward(path, z);
    match tr.absorbed_at {
        Some(_) => None,
        None => Some(tr.last() + path.endpoint()),
    }
}

/// Probe directions `w` in `ε·w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Probe {
    Zero,
    One,
    MinusOne,
    I,
    MinusI,
}

impl Probe {
    pub const ALL: [Probe; 5] = [Probe::Zero, Probe::One, Probe::MinusOne, Probe::I, Probe::MinusI];

    pub fn direction(self) -> Complex64 {
        match self {
            Probe::Zero => Complex64::new(0.0, 0.0),
            Probe::One => Complex64::new(1.0, 0.0),
            Probe::MinusOne => Complex64::new(-1.0, 0.0),
            Probe::I => Complex64::new(0.0, 1.0),
            Probe::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Probe::Zero => "0",
            Probe::One => "1",
            Probe::MinusOne => "-1",
            Probe::I => "i",
            Probe::MinusI => "-i",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HullSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPoint {
    pub z: Complex64,
    /// Step `k` of the chain whose inverse produced the point.
    pub step: usize,
    pub t_added: f64,
    pub probe: Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub n: usize,
    pub horizon: f64,
    pub seed: Option<SeedRecord>,
    pub sigma: Option<CovarianceSpec>,
}

impl PathMeta {
    pub fn of(path: &DrivingPath) -> Self {
        PathMeta {
            n: path.n(),
            horizon: path.horizon,
            seed: path.seed,
            sigma: path.sigma,
        }
    }
}

/// Timestamped samples of a left or right hull.
#[derive(Debug, Clone, PartialEq)]
pub struct HullPointCloud {
    /// Sorted by `(step, probe)`.
    pub points: Vec<HullPoint>,
    pub side: HullSide,
    pub epsilon: f64,
    pub meta: PathMeta,
    /// Probe chains that hit a slit during inversion and were discarded.
    pub dropped: usize,
}

/// Knobs for cloud extraction.
#[derive(Debug, Clone)]
pub struct CloudOptions {
    pub probes: Vec<Probe>,
    pub slit_tol: f64,
    /// Chains processed together in one block.
    pub block: usize,
}

impl Default for CloudOptions {
    fn default() -> Self {
        CloudOptions {
            probes: Probe::ALL.to_vec(),
            slit_tol: DEFAULT_SLIT_TOL,
            block: 128,
        }
    }
}

/// One inverse half-step, `NaN` once a chain touches the slit.
#[inline(always)]
fn inverse_step(v: Complex64, c: Complex64, four_tau: f64, tau: f64, tol: f64) -> Complex64 {
    if on_horizontal_slit(v, tau, tol) {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    c + sqrt_near(v * v - four_tau, v)
}

/// Start of one probe chain. A real probe on the slit of the last map has two
/// boundary preimages, one on each side of the slit; both are followed.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Seat {
    Regular,
    Upper,
    Lower,
}

#[inline]
fn first_inverse_step(v: Complex64, c: Complex64, tau: f64, tol: f64, seat: Seat) -> Complex64 {
    let h = || (4.0 * tau - v.re * v.re).max(0.0).sqrt();
    match seat {
        Seat::Upper => c + Complex64::new(0.0, h()),
        Seat::Lower => c - Complex64::new(0.0, h()),
        Seat::Regular => inverse_step(v, c, 4.0 * tau, tau, tol),
    }
}

/// Points `f̂_{t_k}^{-1}(ε·w)` for `k = 1..n` and each probe `w`, sorted by
/// `(k, probe)`.
pub fn left_hull_cloud(path: &DrivingPath, epsilon: f64) -> Result<HullPointCloud> {
    left_hull_cloud_with(path, epsilon, &CloudOptions::default())
}

pub fn left_hull_cloud_with(
    path: &DrivingPath,
    epsilon: f64,
    opts: &CloudOptions,
) -> Result<HullPointCloud> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    if opts.probes.is_empty() {
        return Err(Error::InvalidArgument("at least one probe is required".into()));
    }
    let centers = path.half_step_centers();
    let tau = path.step() / 2.0;
    let n = path.n();
    let block = opts.block.max(1);
    let mut starts = Vec::new();
    for &p in &opts.probes {
        let v = p.direction() * epsilon;
        if v.im == 0.0 && on_horizontal_slit(v, tau, opts.slit_tol) {
            starts.push((p, v, Seat::Upper));
            starts.push((p, v, Seat::Lower));
        } else {
            starts.push((p, v, Seat::Regular));
        }
    }
    let np = starts.len();

    let blocks: Vec<(usize, usize)> = (1..=n)
        .step_by(block)
        .map(|k0| (k0, (k0 + block).min(n + 1)))
        .collect();

    let results: Vec<Vec<Complex64>> = blocks
        .par_iter()
        .map(|&(k0, k1)| invert_block(&centers, tau, &starts, k0, k1, opts.slit_tol))
        .collect();

    let dt = path.step();
    let mut points = Vec::with_capacity(n * np);
    let mut dropped = 0;
    for (&(k0, _), vals) in blocks.iter().zip(&results) {
        for (i, z) in vals.iter().enumerate() {
            let k = k0 + i / np;
            if z.re.is_finite() && z.im.is_finite() {
                points.push(HullPoint {
                    z: *z,
                    step: k,
                    t_added: k as f64 * dt,
                    probe: starts[i % np].0,
                });
            } else {
                dropped += 1;
            }
        }
    }
    Ok(HullPointCloud {
        points,
        side: HullSide::Left,
        epsilon,
        meta: PathMeta::of(path),
        dropped,
    })
}

/// Invert the chains `k0..k1` together; chain `k` enters at half-step `2k`.
fn invert_block(
    centers: &[Complex64],
    tau: f64,
    starts: &[(Probe, Complex64, Seat)],
    k0: usize,
    k1: usize,
    tol: f64,
) -> Vec<Complex64> {
    let np = starts.len();
    let len = (k1 - k0) * np;
    let mut re = Vec::with_capacity(len);
    let mut im = Vec::with_capacity(len);
    for _ in k0..k1 {
        re.extend(starts.iter().map(|s| s.1.re));
        im.extend(starts.iter().map(|s| s.1.im));
    }
    let four_tau = 4.0 * tau;
    let reach = 2.0 * tau.sqrt();
    for j in (1..=2 * (k1 - 1)).rev() {
        let c = centers[j - 1];
        // chains with 2k ≥ j are active
        let first = j.div_ceil(2);
        let mut lo = (first.max(k0) - k0) * np;
        if j % 2 == 0 && first >= k0 {
            for (i, s) in starts.iter().enumerate() {
                let v = first_inverse_step(Complex64::new(re[lo + i], im[lo + i]), c, tau, tol, s.2);
                re[lo + i] = v.re;
                im[lo + i] = v.im;
            }
            lo += np;
        }
        inverse_sweep(&mut re[lo..], &mut im[lo..], c, four_tau, reach, tol);
    }
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

fn inverse_sweep(re: &mut [f64], im: &mut [f64], c: Complex64, four_tau: f64, reach: f64, tol: f64) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime
            unsafe { inverse_sweep_avx512(re, im, c, four_tau, reach, tol) };
            return;
        }
        if std::is_x86_feature_detected!("avx") {
            // SAFETY: the feature was detected at runtime
            unsafe { inverse_sweep_avx(re, im, c, four_tau, reach, tol) };
            return;
        }
    }
    inverse_sweep_body(re, im, c, four_tau, reach, tol)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn inverse_sweep_avx(re: &mut [f64], im: &mut [f64], c: Complex64, four_tau: f64, reach: f64, tol: f64) {
    inverse_sweep_body(re, im, c, four_tau, reach, tol)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn inverse_sweep_avx512(re: &mut [f64], im: &mut [f64], c: Complex64, four_tau: f64, reach: f64, tol: f64) {
    inverse_sweep_body(re, im, c, four_tau, reach, tol)
}

/// Branch-free inverse half-step over split real/imaginary lanes.
#[inline(always)]
fn inverse_sweep_body(re: &mut [f64], im: &mut [f64], c: Complex64, four_tau: f64, reach: f64, tol: f64) {
    for (a, b) in re.iter_mut().zip(im.iter_mut()) {
        let (x, y) = (*a, *b);
        let d = tol * (1.0 + x.abs() + y.abs());
        let hit = y.abs() <= d && x.abs() <= reach + d;
        let p = x * x - y * y - four_tau;
        let q = 2.0 * x * y;
        let m = (p * p + q * q).sqrt();
        let u = ((m + p.abs()) * 0.5).sqrt();
        let v = q.abs() / (2.0 * u);
        let pos = p >= 0.0;
        let sr = if pos { u } else { v };
        let si = if pos { v } else { u }.copysign(q);
        let flip = sr * x + si * y < 0.0;
        let sr = if flip { -sr } else { sr };
        let si = if flip { -si } else { si };
        *a = if hit { f64::NAN } else { c.re + sr };
        *b = if hit { f64::NAN } else { c.im + si };
    }
}

/// Right hull samples: `−i` times the left cloud of the dual path.
pub fn right_hull_cloud(path: &DrivingPath, epsilon: f64) -> Result<HullPointCloud> {
    right_hull_cloud_with(path, epsilon, &CloudOptions::default())
}

pub fn right_hull_cloud_with(
    path: &DrivingPath,
    epsilon: f64,
    opts: &CloudOptions,
) -> Result<HullPointCloud> {
    let dual = path.transform(PathTransform::Dual)?;
    let mut cloud = left_hull_cloud_with(&dual, epsilon, opts)?;
    let minus_i = Complex64::new(0.0, -1.0);
    for p in &mut cloud.points {
        p.z *= minus_i;
    }
    cloud.side = HullSide::Right;
    cloud.meta = PathMeta::of(path);
    Ok(cloud)
}

impl HullPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.z).collect()
    }

    /// CSV with columns `re,im,t_added,probe`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# side = {}", side_name(self.side))?;
        writeln!(w, "# dropped = {}", self.dropped)?;
        writeln!(w, "re,im,t_added,probe")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.z.re, p.z.im, p.t_added, p.probe.label())?;
        }
        Ok(())
    }

    /// Scatter plot colored by `t_added`.
    pub fn write_svg<W: Write>(&self, mut w: W) -> Result<()> {
        const SIZE: f64 = 800.0;
        const PAD: f64 = 20.0;
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            x0 = x0.min(p.z.re);
            x1 = x1.max(p.z.re);
            y0 = y0.min(p.z.im);
            y1 = y1.max(p.z.im);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let scale = (SIZE - 2.0 * PAD) / span;
        let r = (0.002 * span * scale).max(0.6);
        let horizon = self.meta.horizon;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        )?;
        writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
        for p in &self.points {
            let cx = PAD + (p.z.re - x0) * scale;
            let cy = SIZE - PAD - (p.z.im - y0) * scale;
            let (cr, cg, cb) = colormap(p.t_added / horizon);
            writeln!(
                w,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="rgb({cr},{cg},{cb})"/>"#
            )?;
        }
        writeln!(w, "</svg>")?;
        Ok(())
    }
}

pub(crate) fn side_name(s: HullSide) -> &'static str {
    match s {
        HullSide::Left => "left",
        HullSide::Right => "right",
    }
}

/// Piecewise-linear blue to yellow palette on `[0, 1]`.
fn colormap(s: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let s = s.clamp(0.0, 1.0) * 4.0;
    let i = (s.floor() as usize).min(3);
    let f = s - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}
