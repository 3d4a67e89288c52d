//! Monte-Carlo checks of the drift identities, stationarity of the angle,
//! duality in law and disconnection by hulls.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, median_nn_spacing};
use crate::ks::{critical_value, ks_one_sample, ks_two_sample};
use crate::model::{sample_driving_path, validate_sigma, CovarianceSpec, DrivingPath};
use crate::phases::phase_integrals;
use crate::point_tracker::{draw_increment, PolarState};
use crate::slit_engine::{left_hull_cloud_with, right_hull_cloud_with, CloudOptions, HullPointCloud};
use crate::stationary::{stationary_density, AngleSampler, DEFAULT_GRID};
use crate::streams::{derive_master, stream_rng, SeedRecord};

/// Level of the one-sample KS tests.
pub const KS_ALPHA: f64 = 0.01;

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub quantity: &'static str,
    pub n_paths: usize,
    pub t_end: f64,
    pub h: f64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Quadrature value the mean is compared with.
    pub reference: f64,
    pub z_score: f64,
    pub pass: bool,
}

/// Initial angle of the polar runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialAngle {
    Stationary,
    Uniform,
}

fn check_mc(sigma: &CovarianceSpec, n: usize, h: f64) -> Result<()> {
    if sigma.is_zero() {
        return Err(Error::InvalidArgument("a = b = c = 0: the driver has no randomness".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 paths, got {n}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h must be > 0, got {h}")));
    }
    Ok(())
}

fn draw_theta0<R: Rng>(rng: &mut R, init: InitialAngle, sampler: &AngleSampler) -> f64 {
    let q: f64 = rng.gen();
    match init {
        InitialAngle::Stationary => sampler.quantile(q),
        InitialAngle::Uniform => PI * q,
    }
}

/// Advance `state` from `t0` to `t1` in equal steps no longer than `h`.
fn advance<R: Rng>(state: &mut PolarState, sigma: &CovarianceSpec, t0: f64, t1: f64, h: f64, rng: &mut R) {
    let span = t1 - t0;
    if span <= 0.0 {
        return;
    }
    let m = (span / h - 1e-9).ceil().max(1.0) as usize;
    let dt = span / m as f64;
    for _ in 0..m {
        let (dx, dy) = draw_increment(sigma, rng, dt);
        state.step(sigma, dt, dx, dy);
    }
}

/// Per-path `(logmod, logderiv)` at `t_end`. Path `k` uses stream `k` of
/// `seed`; its first draw is the initial angle.
fn polar_endpoints(sigma: &CovarianceSpec, n: usize, t_end: f64, h: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_mc(sigma, n, h)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be > 0, got {t_end}")));
    }
    let sampler = stationary_density(sigma, DEFAULT_GRID)?.angle_sampler();
    Ok((0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let mut st = PolarState::new(draw_theta0(&mut rng, InitialAngle::Stationary, &sampler));
            advance(&mut st, sigma, 0.0, t_end, h, &mut rng);
            (st.logmod, st.logderiv)
        })
        .collect())
}

fn drift_report(quantity: &'static str, values: &[f64], reference: f64, n: usize, t_end: f64, h: f64, seed: u64) -> DriftReport {
    let (mean, stderr) = mean_stderr(values);
    let z = (mean - reference) / stderr;
    DriftReport {
        quantity,
        n_paths: n,
        t_end,
        h,
        seed,
        mean,
        stderr,
        reference,
        z_score: z,
        pass: (mean - reference).abs() <= 3.0 * stderr,
    }
}

/// Both drift checks from one set of paths: `logmod/t_end` against `(I)` and
/// `(logderiv − logmod)/t_end` against `−(II)`.
pub fn drift_both(sigma: &CovarianceSpec, n: usize, t_end: f64, h: f64, seed: u64) -> Result<(DriftReport, DriftReport)> {
    let ends = polar_endpoints(sigma, n, t_end, h, seed)?;
    let ints = phase_integrals(sigma)?;
    let lm: Vec<f64> = ends.iter().map(|e| e.0 / t_end).collect();
    let ld: Vec<f64> = ends.iter().map(|e| (e.1 - e.0) / t_end).collect();
    Ok((
        drift_report("logmod", &lm, ints.i, n, t_end, h, seed),
        drift_report("logderiv", &ld, -ints.ii, n, t_end, h, seed),
    ))
}

pub fn drift_logmod(sigma: &CovarianceSpec, n: usize, t_end: f64, h: f64, seed: u64) -> Result<DriftReport> {
    Ok(drift_both(sigma, n, t_end, h, seed)?.0)
}

pub fn drift_logderiv(sigma: &CovarianceSpec, n: usize, t_end: f64, h: f64, seed: u64) -> Result<DriftReport> {
    Ok(drift_both(sigma, n, t_end, h, seed)?.1)
}

/// Unnormalized `logderiv − logmod` at `t_end` for each path.
pub fn logderiv_samples(sigma: &CovarianceSpec, n: usize, t_end: f64, h: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(polar_endpoints(sigma, n, t_end, h, seed)?.into_iter().map(|(m, d)| d - m).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsCheckpoint {
    pub t: f64,
    pub ks: f64,
    pub critical: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub n_paths: usize,
    pub h: f64,
    pub seed: u64,
    pub init: InitialAngle,
    pub checkpoints: Vec<KsCheckpoint>,
    pub pass: bool,
}

/// KS distance between `θ̂ mod π` and `p` restricted to `[0, π]` at each
/// checkpoint. The threshold is the level-0.01 critical value plus `√h`.
pub fn stationarity_test(
    sigma: &CovarianceSpec,
    n: usize,
    checkpoints: &[f64],
    h: f64,
    seed: u64,
    init: InitialAngle,
) -> Result<StationarityReport> {
    check_mc(sigma, n, h)?;
    let mut ts = checkpoints.to_vec();
    if ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("checkpoints must be finite and ≥ 0".into()));
    }
    ts.sort_by(f64::total_cmp);
    let sampler = stationary_density(sigma, DEFAULT_GRID)?.angle_sampler();
    let angles: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let mut st = PolarState::new(draw_theta0(&mut rng, init, &sampler));
            let mut t = 0.0;
            ts.iter()
                .map(|&tk| {
                    advance(&mut st, sigma, t, tk, h, &mut rng);
                    t = tk;
                    st.theta.rem_euclid(PI)
                })
                .collect()
        })
        .collect();
    let critical = critical_value(KS_ALPHA, n);
    let slack = h.sqrt();
    let checkpoints: Vec<KsCheckpoint> = ts
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let xs: Vec<f64> = angles.iter().map(|a| a[j]).collect();
            let ks = ks_one_sample(&xs, |u| sampler.cdf_at(u.min(PI * (1.0 - 1e-15))));
            KsCheckpoint {
                t,
                ks,
                critical,
                slack,
                pass: ks <= critical + slack,
            }
        })
        .collect();
    let pass = checkpoints.iter().all(|c| c.pass);
    Ok(StationarityReport {
        n_paths: n,
        h,
        seed,
        init,
        checkpoints,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudStatistic {
    MaxModulus,
    RealExtent,
    ImagExtent,
}

impl CloudStatistic {
    pub fn eval(self, points: &[Complex64]) -> f64 {
        match self {
            CloudStatistic::MaxModulus => points.iter().map(|z| z.norm()).fold(0.0, f64::max),
            CloudStatistic::RealExtent => extent(points.iter().map(|z| z.re)),
            CloudStatistic::ImagExtent => extent(points.iter().map(|z| z.im)),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "max_modulus" => Ok(CloudStatistic::MaxModulus),
            "real_extent" => Ok(CloudStatistic::RealExtent),
            "imag_extent" => Ok(CloudStatistic::ImagExtent),
            _ => Err(Error::Parse(format!("unknown statistic {s:?}"))),
        }
    }
}

fn extent(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub statistic: CloudStatistic,
    pub n_hulls: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub ks: f64,
    pub p_value: f64,
    pub right_mean: f64,
    pub left_mean: f64,
    pub pass: bool,
}

/// Threshold on the two-sample p-value.
pub const DUALITY_P_MIN: f64 = 0.001;

/// Right hulls of `Σ` against left hulls of `Σ̃ = (b, a, −c)` turned by `−i`
/// (the rotation matching [`right_hull_cloud_with`]), compared through one
/// scalar statistic. Right hull `k` uses stream `k` of `seed`; the left hulls
/// use an unrelated master derived from `seed`.
#[allow(clippy::too_many_arguments)]
pub fn duality_test(
    sigma: &CovarianceSpec,
    n_hulls: usize,
    n_steps: usize,
    horizon: f64,
    epsilon: f64,
    statistic: CloudStatistic,
    seed: u64,
    opts: &CloudOptions,
) -> Result<DualityReport> {
    if n_hulls < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 hulls, got {n_hulls}")));
    }
    if sigma.is_zero() {
        return Err(Error::InvalidArgument("a = b = c = 0: the driver has no randomness".into()));
    }
    let dual = validate_sigma(sigma.b, sigma.a, -sigma.c)?;
    let left_master = derive_master(seed, 1);
    let stats = |right: bool| -> Result<Vec<f64>> {
        (0..n_hulls)
            .into_par_iter()
            .map(|k| {
                let pts = if right {
                    let path = sample_driving_path(sigma, n_steps, horizon, SeedRecord::new(seed, k as u64))?;
                    right_hull_cloud_with(&path, epsilon, opts)?.positions()
                } else {
                    let path = sample_driving_path(&dual, n_steps, horizon, SeedRecord::new(left_master, k as u64))?;
                    let minus_i = Complex64::new(0.0, -1.0);
                    left_hull_cloud_with(&path, epsilon, opts)?.positions().into_iter().map(|z| z * minus_i).collect()
                };
                Ok(statistic.eval(&pts))
            })
            .collect()
    };
    let r = stats(true)?;
    let l = stats(false)?;
    let (ks, p) = ks_two_sample(&r, &l);
    Ok(DualityReport {
        a: sigma.a,
        b: sigma.b,
        c: sigma.c,
        statistic,
        n_hulls,
        n_steps,
        horizon,
        epsilon,
        seed,
        ks,
        p_value: p,
        right_mean: mean_stderr(&r).0,
        left_mean: mean_stderr(&l).0,
        pass: p > DUALITY_P_MIN,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectionReport {
    pub cell: f64,
    pub dilation: f64,
    pub nx: usize,
    pub ny: usize,
    pub covered_cells: usize,
    pub enclosed_cells: usize,
    pub enclosed_area: f64,
    /// Connected groups of enclosed cells.
    pub components: usize,
    /// Centers of the enclosed cells.
    #[serde(skip)]
    pub enclosed: Vec<Complex64>,
}

impl DisconnectionReport {
    pub fn detected(&self) -> bool {
        self.enclosed_cells > 0
    }
}

/// Probe parameters for a cloud sampled with probe radius `epsilon`:
/// dilation `max(ε, 2·median nearest-neighbour spacing)`, cells half of it.
pub fn probe_params(points: &[Complex64], epsilon: f64) -> (f64, f64) {
    let dilation = epsilon.max(2.0 * median_nn_spacing(points));
    (0.5 * dilation, dilation)
}

/// Rasterize the cloud dilated by `dilation` on square cells of side `cell`,
/// flood-fill the complement from the border of the padded box, and report
/// the cells reached neither by the fill nor by the cloud.
pub fn disconnection_probe(points: &[Complex64], cell: f64, dilation: f64) -> Result<DisconnectionReport> {
    if !(cell > 0.0 && dilation > 0.0) {
        return Err(Error::InvalidArgument("cell and dilation must be > 0".into()));
    }
    if points.len() >= 2 {
        let nn = median_nn_spacing(points);
        if dilation < 2.0 * nn {
            return Err(Error::InvalidArgument(format!(
                "dilation {dilation} is below twice the nearest-neighbour spacing {nn}"
            )));
        }
    }
    let (lo, hi) = if points.is_empty() {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        bounding_box(points)
    };
    let span = (hi.re - lo.re).max(hi.im - lo.im);
    let pad = 0.1 * span + dilation + 2.0 * cell;
    let origin = lo - Complex64::new(pad, pad);
    let nx = ((hi.re - lo.re + 2.0 * pad) / cell).ceil() as usize + 1;
    let ny = ((hi.im - lo.im + 2.0 * pad) / cell).ceil() as usize + 1;
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(Error::InvalidArgument(format!("raster of {nx}×{ny} cells is too large")));
    }
    let center = |i: usize, j: usize| origin + Complex64::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);

    let mut covered = vec![false; nx * ny];
    let r = (dilation / cell).ceil() as isize + 1;
    let d2 = dilation * dilation;
    for &z in points {
        let ci = ((z.re - origin.re) / cell) as isize;
        let cj = ((z.im - origin.im) / cell) as isize;
        for j in (cj - r).max(0)..=(cj + r).min(ny as isize - 1) {
            for i in (ci - r).max(0)..=(ci + r).min(nx as isize - 1) {
                let (i, j) = (i as usize, j as usize);
                if (center(i, j) - z).norm_sqr() <= d2 {
                    covered[j * nx + i] = true;
                }
            }
        }
    }

    let mut outside = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    let seed_cell = |i: usize, j: usize, q: &mut VecDeque<usize>, out: &mut [bool]| {
        let k = j * nx + i;
        if !covered[k] && !out[k] {
            out[k] = true;
            q.push_back(k);
        }
    };
    for i in 0..nx {
        seed_cell(i, 0, &mut queue, &mut outside);
        seed_cell(i, ny - 1, &mut queue, &mut outside);
    }
    for j in 0..ny {
        seed_cell(0, j, &mut queue, &mut outside);
        seed_cell(nx - 1, j, &mut queue, &mut outside);
    }
    flood(&mut queue, nx, ny, |k| !covered[k], &mut outside);

    let enclosed_mask: Vec<bool> = (0..nx * ny).map(|k| !covered[k] && !outside[k]).collect();
    let enclosed: Vec<Complex64> = (0..nx * ny)
        .filter(|&k| enclosed_mask[k])
        .map(|k| center(k % nx, k / nx))
        .collect();
    let mut seen = vec![false; nx * ny];
    let mut components = 0;
    for k in 0..nx * ny {
        if enclosed_mask[k] && !seen[k] {
            components += 1;
            seen[k] = true;
            let mut q = VecDeque::from([k]);
            flood(&mut q, nx, ny, |o| enclosed_mask[o], &mut seen);
        }
    }
    Ok(DisconnectionReport {
        cell,
        dilation,
        nx,
        ny,
        covered_cells: covered.iter().filter(|&&c| c).count(),
        enclosed_cells: enclosed.len(),
        enclosed_area: enclosed.len() as f64 * cell * cell,
        components,
        enclosed,
    })
}

/// 4-connected breadth-first fill over cells where `open` holds.
fn flood(queue: &mut VecDeque<usize>, nx: usize, ny: usize, open: impl Fn(usize) -> bool, mark: &mut [bool]) {
    while let Some(k) = queue.pop_front() {
        let (i, j) = (k % nx, k / nx);
        let mut visit = |o: usize| {
            if !mark[o] && open(o) {
                mark[o] = true;
                queue.push_back(o);
            }
        };
        if i > 0 {
            visit(k - 1);
        }
        if i + 1 < nx {
            visit(k + 1);
        }
        if j > 0 {
            visit(k - nx);
        }
        if j + 1 < ny {
            visit(k + nx);
        }
    }
}

/// Probe a hull cloud with [`probe_params`] at its own `ε`.
pub fn probe_cloud(cloud: &HullPointCloud) -> Result<DisconnectionReport> {
    let pts = cloud.positions();
    let (cell, dilation) = probe_params(&pts, cloud.epsilon);
    disconnection_probe(&pts, cell, dilation)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectionSuiteReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n_steps: usize,
    pub horizon: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub runs: Vec<DisconnectionReport>,
    pub detected: usize,
    pub fraction: f64,
    /// The same probe on the zero driver, whose hull is a segment.
    pub control: DisconnectionReport,
    pub pass: bool,
}

/// Fraction of `seeds` left hulls of `Σ` (path `k` on stream `k` of `seed`)
/// with enclosed cells, and the zero-driver control. Passes when at least
/// half the hulls enclose cells and the control encloses none.
pub fn disconnection_suite(
    sigma: &CovarianceSpec,
    n_steps: usize,
    horizon: f64,
    epsilon: f64,
    seeds: usize,
    seed: u64,
) -> Result<DisconnectionSuiteReport> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let opts = CloudOptions::default();
    let runs = (0..seeds)
        .map(|k| {
            let path = sample_driving_path(sigma, n_steps, horizon, SeedRecord::new(seed, k as u64))?;
            probe_cloud(&left_hull_cloud_with(&path, epsilon, &opts)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let zero = DrivingPath::zero(n_steps, horizon)?;
    let control = probe_cloud(&left_hull_cloud_with(&zero, epsilon, &opts)?)?;
    let detected = runs.iter().filter(|r| r.detected()).count();
    let fraction = detected as f64 / seeds as f64;
    Ok(DisconnectionSuiteReport {
        a: sigma.a,
        b: sigma.b,
        c: sigma.c,
        n_steps,
        horizon,
        epsilon,
        seed,
        runs,
        detected,
        fraction,
        pass: fraction >= 0.5 && !control.detected(),
        control,
    })
}
