//! Single-point evolution under the centered chain `df = 2/f dt − dU`, the
//! σ-time change `𝔱 = ∫ |f_s|⁻² ds`, and the polar SDE for
//! `(θ̂, log|f̂|, log|f̂′|)` in σ-time.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{CovarianceSpec, DrivingPath};
use crate::streams::SeedRecord;

/// Default absorption radius.
pub const DEFAULT_SWALLOW: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub t: f64,
    pub f: Complex64,
    /// Driver value `U_t` at the sample.
    pub u: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTrajectory {
    pub z0: Complex64,
    pub samples: Vec<TrackSample>,
    /// `[last time with |f| > δ, first time with |f| ≤ δ]`.
    pub t_z: Option<(f64, f64)>,
    pub absorbed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct TrackerOptions {
    pub delta_swallow: f64,
    /// Upper bound on a drift substep; `None` uses a quarter half-step capped
    /// at `1e-3`.
    pub h_max: Option<f64>,
    /// Substeps are at most `rel_step · |f|²`.
    pub rel_step: f64,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            delta_swallow: DEFAULT_SWALLOW,
            h_max: None,
            rel_step: 0.1,
        }
    }
}

/// Integrate the point `z` along the discretized driver of `path`.
pub fn evolve_point(path: &DrivingPath, z: Complex64, delta_swallow: f64) -> Result<PointTrajectory> {
    evolve_point_with(
        path,
        z,
        &TrackerOptions {
            delta_swallow,
            ..Default::default()
        },
    )
}

pub fn evolve_point_with(path: &DrivingPath, z: Complex64, opts: &TrackerOptions) -> Result<PointTrajectory> {
    if z == Complex64::new(0.0, 0.0) || !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("starting point must be finite and non-zero, got {z}")));
    }
    if !(opts.delta_swallow > 0.0) {
        return Err(Error::InvalidArgument("delta_swallow must be > 0".into()));
    }
    let tau = path.step() / 2.0;
    let h_max = opts.h_max.unwrap_or((tau / 4.0).min(1e-3));
    if !(h_max > 0.0) {
        return Err(Error::InvalidArgument("h_max must be > 0".into()));
    }
    let mut f = z;
    let mut u = Complex64::new(0.0, 0.0);
    let mut t = 0.0;
    let mut samples = vec![TrackSample { t, f, u }];
    let drive = |f: Complex64| 2.0 / f;

    for (j, center) in path.half_step_centers().into_iter().enumerate() {
        // jump of the driver, then constant driving for τ
        f -= center;
        u += center;
        samples.push(TrackSample { t, f, u });
        if f.norm() <= opts.delta_swallow {
            return Ok(absorbed(z, samples));
        }
        let t_end = (j + 1) as f64 * tau;
        while t < t_end {
            let r2 = f.norm_sqr();
            let mut dt = h_max.min(opts.rel_step * r2);
            // absorb rounding leftovers into the final substep
            let finishing = t + dt >= t_end - 1e-9 * tau;
            if finishing {
                dt = t_end - t;
            }
            let k1 = drive(f);
            let k2 = drive(f + k1 * (dt / 2.0));
            let k3 = drive(f + k2 * (dt / 2.0));
            let k4 = drive(f + k3 * dt);
            f += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);
            t = if finishing { t_end } else { t + dt };
            samples.push(TrackSample { t, f, u });
            if f.norm() <= opts.delta_swallow || !f.re.is_finite() {
                return Ok(absorbed(z, samples));
            }
        }
    }
    Ok(PointTrajectory {
        z0: z,
        samples,
        t_z: None,
        absorbed: false,
    })
}

fn absorbed(z0: Complex64, samples: Vec<TrackSample>) -> PointTrajectory {
    let last = samples[samples.len() - 1].t;
    let before = samples[..samples.len() - 1]
        .iter()
        .rev()
        .map(|s| s.t)
        .next()
        .unwrap_or(0.0);
    PointTrajectory {
        z0,
        samples,
        t_z: Some((before, last)),
        absorbed: true,
    }
}

impl PointTrajectory {
    pub fn last(&self) -> TrackSample {
        self.samples[self.samples.len() - 1]
    }

    /// Value of `f` at capacity time `t` (the last sample with time ≤ `t`).
    pub fn value_at(&self, t: f64) -> Option<Complex64> {
        let i = self.samples.partition_point(|s| s.t <= t);
        (i > 0).then(|| self.samples[i - 1].f)
    }
}

/// Largest normalized violation of the envelope bounds
/// `−2(t−s) ≤ Δ(Re f + Re U) ≤ 2(t−s)` and the same for the imaginary parts,
/// over all sample pairs inside maximal runs with `|f| ≥ 1`.
pub fn envelope_violation(traj: &PointTrajectory) -> f64 {
    let mut worst: f64 = 0.0;
    let mut run: Vec<&TrackSample> = Vec::new();
    let mut flush = |run: &mut Vec<&TrackSample>| {
        worst = worst.max(run_violation(run, |s| s.f.re + s.u.re));
        worst = worst.max(run_violation(run, |s| s.f.im + s.u.im));
        run.clear();
    };
    for s in &traj.samples {
        if s.f.norm() >= 1.0 {
            run.push(s);
        } else {
            flush(&mut run);
        }
    }
    flush(&mut run);
    worst
}

/// `q − 2t` must be non-increasing and `q + 2t` non-decreasing along the run.
fn run_violation(run: &[&TrackSample], q: impl Fn(&TrackSample) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for s in run {
        let down = q(s) - 2.0 * s.t;
        let up = q(s) + 2.0 * s.t;
        if hi.is_finite() {
            worst = worst.max((down - hi) / (1.0 + down.abs() + hi.abs()));
            worst = worst.max((lo - up) / (1.0 + up.abs() + lo.abs()));
        }
        hi = hi.max(down);
        lo = lo.min(up);
    }
    worst
}

/// Monotone map between capacity time and σ-time.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaTimeMap {
    /// `(𝔱, t)` pairs, strictly increasing in both coordinates.
    pub knots: Vec<(f64, f64)>,
}

/// `𝔱(t) = ∫₀ᵗ |f_s|⁻² ds` by the trapezoid rule on the trajectory grid.
pub fn sigma_time(traj: &PointTrajectory) -> Result<SigmaTimeMap> {
    if traj.samples.len() < 2 {
        return Err(Error::InvalidArgument("σ-time needs at least two samples".into()));
    }
    // the driver jumps at fixed t; keep the post-jump value at each time
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let w = 1.0 / s.f.norm_sqr();
        match pts.last_mut() {
            Some(last) if last.0 == s.t => last.1 = w,
            _ => pts.push((s.t, w)),
        }
    }
    let mut knots = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    knots.push((0.0, pts[0].0));
    let (mut prev_t, mut prev_w) = pts[0];
    for &(t, w) in &pts[1..] {
        acc += 0.5 * (prev_w + w) * (t - prev_t);
        knots.push((acc, t));
        prev_w = w;
        prev_t = t;
    }
    Ok(SigmaTimeMap { knots })
}

impl SigmaTimeMap {
    /// `𝔱` at capacity time `t` by linear interpolation.
    pub fn sigma_at(&self, t: f64) -> f64 {
        interp(&self.knots, t, |k| k.1, |k| k.0)
    }

    /// Capacity time at σ-time `s` by linear interpolation.
    pub fn capacity_at(&self, s: f64) -> f64 {
        interp(&self.knots, s, |k| k.0, |k| k.1)
    }

    pub fn is_monotone(&self) -> bool {
        self.knots.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
    }
}

fn interp(knots: &[(f64, f64)], x: f64, key: impl Fn(&(f64, f64)) -> f64, val: impl Fn(&(f64, f64)) -> f64) -> f64 {
    let i = knots.partition_point(|k| key(k) < x);
    if i == 0 {
        return val(&knots[0]);
    }
    if i == knots.len() {
        return val(&knots[knots.len() - 1]);
    }
    let (a, b) = (&knots[i - 1], &knots[i]);
    let s = (x - key(a)) / (key(b) - key(a));
    val(a) + s * (val(b) - val(a))
}

/// The π-periodic drift, radial drift and diffusion coefficients at `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCoefficients {
    pub u: f64,
    pub mu: f64,
    pub nu: f64,
    pub d: f64,
}

/// `μ(u) = −α sin 2u − c cos 2u`, `ν(u) = α cos 2u − c sin 2u` with
/// `α = 2 − a/2 + b/2`, and `D(u) = (a/2) sin²u + (b/2) cos²u − c sin u cos u`.
pub fn angular_coefficients(sigma: &CovarianceSpec, u: f64) -> AngularCoefficients {
    let alpha = 2.0 - sigma.a / 2.0 + sigma.b / 2.0;
    let (s2, c2) = (2.0 * u).sin_cos();
    let (s, c) = u.sin_cos();
    AngularCoefficients {
        u,
        mu: -alpha * s2 - sigma.c * c2,
        nu: alpha * c2 - sigma.c * s2,
        d: 0.5 * sigma.a * s * s + 0.5 * sigma.b * c * c - sigma.c * s * c,
    }
}

/// `D′(u) = ((a − b)/2) sin 2u − c cos 2u`.
pub fn diffusion_derivative(sigma: &CovarianceSpec, u: f64) -> f64 {
    let (s2, c2) = (2.0 * u).sin_cos();
    0.5 * (sigma.a - sigma.b) * s2 - sigma.c * c2
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarTrajectory {
    pub h: f64,
    /// σ-time grid, `grid[0] = 0`.
    pub grid: Vec<f64>,
    /// Continuous lift of the angle.
    pub theta: Vec<f64>,
    pub logmod: Vec<f64>,
    pub logderiv: Vec<f64>,
    /// `(ΔX, ΔY)` used in each step.
    pub increments: Vec<(f64, f64)>,
    pub seed: Option<SeedRecord>,
}

/// State of the polar system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub theta: f64,
    pub logmod: f64,
    pub logderiv: f64,
}

impl PolarState {
    pub fn new(theta: f64) -> Self {
        PolarState {
            theta,
            logmod: 0.0,
            logderiv: 0.0,
        }
    }

    /// One Euler–Maruyama step of length `h` with the given increments,
    /// which must have covariance `h·Σ`.
    #[inline]
    pub fn step(&mut self, sigma: &CovarianceSpec, h: f64, dx: f64, dy: f64) {
        let k = angular_coefficients(sigma, self.theta);
        let (s, c) = self.theta.sin_cos();
        let cos2 = (2.0 * self.theta).cos();
        self.theta += k.mu * h + s * dx - c * dy;
        self.logmod += k.nu * h - c * dx - s * dy;
        self.logderiv += -2.0 * cos2 * h;
    }
}

/// Number of steps and the length of the last one for `[0, t_end]` at step `h`.
pub fn step_plan(t_end: f64, h: f64) -> Result<(usize, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h must be > 0, got {h}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be ≥ 0, got {t_end}")));
    }
    let m = (t_end / h - 1e-9).ceil().max(0.0) as usize;
    let last = if m == 0 { 0.0 } else { t_end - (m - 1) as f64 * h };
    Ok((m, last))
}

/// Euler–Maruyama for the polar system from `θ̂ = theta0` over `[0, t_end]`.
pub fn polar_evolve(
    sigma: &CovarianceSpec,
    theta0: f64,
    t_end: f64,
    h: f64,
    seed: SeedRecord,
) -> Result<PolarTrajectory> {
    let mut rng = seed.rng();
    let mut tr = polar_evolve_rng(sigma, theta0, t_end, h, &mut rng)?;
    tr.seed = Some(seed);
    Ok(tr)
}

pub fn polar_evolve_rng<R: Rng + ?Sized>(
    sigma: &CovarianceSpec,
    theta0: f64,
    t_end: f64,
    h: f64,
    rng: &mut R,
) -> Result<PolarTrajectory> {
    let (m, last) = step_plan(t_end, h)?;
    let mut st = PolarState::new(theta0);
    let mut tr = PolarTrajectory {
        h,
        grid: Vec::with_capacity(m + 1),
        theta: Vec::with_capacity(m + 1),
        logmod: Vec::with_capacity(m + 1),
        logderiv: Vec::with_capacity(m + 1),
        increments: Vec::with_capacity(m),
        seed: None,
    };
    let push = |tr: &mut PolarTrajectory, t: f64, st: &PolarState| {
        tr.grid.push(t);
        tr.theta.push(st.theta);
        tr.logmod.push(st.logmod);
        tr.logderiv.push(st.logderiv);
    };
    push(&mut tr, 0.0, &st);
    for i in 0..m {
        let dt = if i + 1 == m { last } else { h };
        let (dx, dy) = draw_increment(sigma, rng, dt);
        st.step(sigma, dt, dx, dy);
        tr.increments.push((dx, dy));
        let t = if i + 1 == m { t_end } else { (i + 1) as f64 * h };
        push(&mut tr, t, &st);
    }
    Ok(tr)
}

/// Two standard normals are always drawn so streams stay aligned.
#[inline]
pub fn draw_increment<R: Rng + ?Sized>(sigma: &CovarianceSpec, rng: &mut R, dt: f64) -> (f64, f64) {
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    sigma.correlate(g1, g2, dt.sqrt())
}

impl PolarTrajectory {
    /// CSV with columns `t,theta,logmod,logderiv`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "t,theta,logmod,logderiv")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{},{},{},{}", self.grid[i], self.theta[i], self.logmod[i], self.logderiv[i])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_driving_path, validate_sigma};
    use crate::slit_engine::compose_forward;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_path_closed_form() {
        let p = DrivingPath::zero(100, 1.0).unwrap();
        let tr = evolve_point(&p, c(3.0, 0.0), DEFAULT_SWALLOW).unwrap();
        assert!(!tr.absorbed);
        assert!((tr.last().f - c(13f64.sqrt(), 0.0)).norm() < 1e-6);
        assert_eq!(tr.samples[0].t, 0.0);
        assert_eq!(tr.samples[0].f, c(3.0, 0.0));
    }

    #[test]
    fn zero_path_absorption_time() {
        let p = DrivingPath::zero(100, 2.0).unwrap();
        let tr = evolve_point(&p, c(0.0, 1.0), DEFAULT_SWALLOW).unwrap();
        assert!(tr.absorbed);
        let (lo, hi) = tr.t_z.unwrap();
        assert!(lo <= hi);
        assert!((hi - 0.25).abs() < 1e-2, "{lo} {hi}");
        assert!(tr.last().f.norm() <= DEFAULT_SWALLOW);
    }

    #[test]
    fn tracker_agrees_with_slit_composition() {
        let s = validate_sigma(1.0, 2.0, 0.4).unwrap();
        let p = sample_driving_path(&s, 400, 1.0, SeedRecord::new(21, 0)).unwrap();
        let z = c(1.5, 2.0);
        let tr = evolve_point(&p, z, DEFAULT_SWALLOW).unwrap();
        let fw = compose_forward(&p, z);
        if !tr.absorbed && fw.absorbed_at.is_none() {
            assert!((tr.last().f - fw.last()).norm() < 1e-6, "{} {}", tr.last().f, fw.last());
        }
    }

    #[test]
    fn envelope_holds_on_random_trajectories() {
        let s = validate_sigma(3.0, 1.0, -1.0).unwrap();
        for k in 0..5 {
            let p = sample_driving_path(&s, 200, 2.0, SeedRecord::new(7, k)).unwrap();
            let tr = evolve_point(&p, c(0.5, 1.5), DEFAULT_SWALLOW).unwrap();
            assert!(envelope_violation(&tr) <= 1e-8);
        }
    }

    #[test]
    fn envelope_detects_violation() {
        let mut tr = PointTrajectory {
            z0: c(2.0, 0.0),
            samples: vec![
                TrackSample { t: 0.0, f: c(2.0, 0.0), u: c(0.0, 0.0) },
                TrackSample { t: 0.1, f: c(3.0, 0.0), u: c(0.0, 0.0) },
            ],
            t_z: None,
            absorbed: false,
        };
        assert!(envelope_violation(&tr) > 0.1);
        tr.samples[1].f = c(2.1, 0.0);
        assert_eq!(envelope_violation(&tr), 0.0);
    }

    #[test]
    fn sigma_time_zero_path() {
        let p = DrivingPath::zero(200, 2.0).unwrap();
        let tr = evolve_point(&p, c(1.0, 0.0), DEFAULT_SWALLOW).unwrap();
        let map = sigma_time(&tr).unwrap();
        assert!(map.is_monotone());
        for &t in &[0.1f64, 0.5, 1.0, 2.0] {
            let want = 0.25 * (1.0 + 4.0 * t).ln();
            assert!((map.sigma_at(t) - want).abs() < 1e-4);
            assert!((map.capacity_at(want) - t).abs() < 1e-3);
        }
    }

    #[test]
    fn sigma_time_unit_modulus_is_identity() {
        let samples: Vec<TrackSample> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.02;
                TrackSample { t, f: Complex64::from_polar(1.0, t * 3.0), u: c(0.0, 0.0) }
            })
            .collect();
        let tr = PointTrajectory { z0: c(1.0, 0.0), samples, t_z: None, absorbed: false };
        let map = sigma_time(&tr).unwrap();
        for k in &map.knots {
            assert!((k.0 - k.1).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_time_monotone_on_random_trajectories() {
        for k in 0..1000u64 {
            let s = validate_sigma(1.0 + (k % 3) as f64, 1.0, 0.0).unwrap();
            let p = sample_driving_path(&s, 8, 0.5, SeedRecord::new(31, k)).unwrap();
            let tr = evolve_point(&p, c(1.0, 1.0), DEFAULT_SWALLOW).unwrap();
            if tr.samples.len() >= 2 {
                assert!(sigma_time(&tr).unwrap().is_monotone());
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let s = validate_sigma(2.0, 1.0, 0.0).unwrap();
        let k = angular_coefficients(&s, 0.0);
        assert_eq!(k.mu, 0.0);
        assert_eq!(k.nu, 1.5);
        assert_eq!(k.d, 0.5);
        let s = validate_sigma(4.0, 1.0, 2.0).unwrap();
        let k = angular_coefficients(&s, (0.5f64).atan());
        assert!(k.d.abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn coefficients_pi_periodic(u in -20.0f64..20.0, a in 0.0f64..8.0, b in 0.0f64..8.0, rho in -1.0f64..1.0) {
            let s = validate_sigma(a, b, rho * (a * b).sqrt()).unwrap();
            let x = angular_coefficients(&s, u);
            let y = angular_coefficients(&s, u + PI);
            prop_assert!((x.mu - y.mu).abs() < 1e-13);
            prop_assert!((x.nu - y.nu).abs() < 1e-13);
            prop_assert!((x.d - y.d).abs() < 1e-13);
            prop_assert!(x.d >= -1e-14);
        }

        #[test]
        fn degenerate_diffusion_is_square(u in -10.0f64..10.0, a in 0.01f64..8.0, b in 0.01f64..8.0) {
            let s = validate_sigma(a, b, (a * b).sqrt()).unwrap();
            let two_d = 2.0 * angular_coefficients(&s, u).d;
            let sq = (a.sqrt() * u.sin() - b.sqrt() * u.cos()).powi(2);
            prop_assert!((two_d - sq).abs() < 1e-14 * (1.0 + a + b));
        }

        #[test]
        fn derivative_matches_finite_difference(u in -4.0f64..4.0, a in 0.0f64..8.0, b in 0.0f64..8.0, rho in -1.0f64..1.0) {
            let s = validate_sigma(a, b, rho * (a * b).sqrt()).unwrap();
            let e = 1e-6;
            let fd = (angular_coefficients(&s, u + e).d - angular_coefficients(&s, u - e).d) / (2.0 * e);
            prop_assert!((fd - diffusion_derivative(&s, u)).abs() < 1e-7 * (1.0 + a + b));
        }
    }

    #[test]
    fn sampled_degenerate_quarter_coefficients() {
        // periodicity over many random angles
        use rand::Rng;
        let mut rng = crate::streams::stream_rng(5, 5);
        let s = validate_sigma(2.0, 3.0, -1.0).unwrap();
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(-50.0..50.0);
            let x = angular_coefficients(&s, u);
            let y = angular_coefficients(&s, u + PI);
            assert!((x.mu - y.mu).abs() <= 1e-13 && (x.nu - y.nu).abs() <= 1e-13 && (x.d - y.d).abs() <= 1e-13);
        }
    }

    #[test]
    fn deterministic_polar_system() {
        let s = validate_sigma(0.0, 0.0, 0.0).unwrap();
        let tr = polar_evolve(&s, 0.0, 1.0, 1e-3, SeedRecord::new(1, 0)).unwrap();
        assert!(tr.theta.iter().all(|&t| t == 0.0));
        for (t, l) in tr.grid.iter().zip(&tr.logmod) {
            assert!((l - 2.0 * t).abs() < 1e-12);
        }
        // the zero driver gives log|f_t(1)| = ½ ln(1 + 4t) = 2𝔱
        let t_cap = 0.7f64;
        let sig = 0.25 * (1.0 + 4.0 * t_cap).ln();
        let tr = polar_evolve(&s, 0.0, sig, 1e-4, SeedRecord::new(1, 0)).unwrap();
        let closed = (1.0 + 4.0 * t_cap).sqrt().ln();
        assert!((tr.logmod.last().unwrap() - closed).abs() < 1e-10);
        assert_eq!(*tr.grid.last().unwrap(), sig);
    }

    #[test]
    fn shared_noise_reconstructs() {
        let s = validate_sigma(2.0, 1.0, 0.5).unwrap();
        let tr = polar_evolve(&s, 0.3, 0.5, 1e-3, SeedRecord::new(2, 0)).unwrap();
        for i in 0..tr.increments.len() {
            let th = tr.theta[i];
            let k = angular_coefficients(&s, th);
            let (sn, cs) = th.sin_cos();
            let dth = tr.theta[i + 1] - th - k.mu * tr.h;
            let dlm = tr.logmod[i + 1] - tr.logmod[i] - k.nu * tr.h;
            // rotate back to (ΔX, ΔY)
            let dx = sn * dth - cs * dlm;
            let dy = -cs * dth - sn * dlm;
            let (ex, ey) = tr.increments[i];
            assert!((dx - ex).abs() < 1e-12 && (dy - ey).abs() < 1e-12);
            let dld = tr.logderiv[i + 1] - tr.logderiv[i];
            assert!((dld + 2.0 * (2.0 * th).cos() * tr.h).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_quadratic_variation() {
        let s = validate_sigma(2.0, 1.0, 0.5).unwrap();
        let mut ratio_sum = 0.0;
        let reps = 40;
        for k in 0..reps {
            let tr = polar_evolve(&s, 0.1, 1.0, 1e-4, SeedRecord::new(3, k)).unwrap();
            let qv: f64 = tr.theta.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            let int: f64 = tr.theta[..tr.theta.len() - 1]
                .iter()
                .map(|&th| 2.0 * angular_coefficients(&s, th).d * tr.h)
                .sum();
            ratio_sum += qv / int;
        }
        let mean = ratio_sum / reps as f64;
        // each ratio has relative sd about √(2h) ≈ 0.014
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn logderiv_has_no_quadratic_variation() {
        let s = validate_sigma(2.0, 1.0, 0.5).unwrap();
        let rv = |h: f64| {
            let tr = polar_evolve(&s, 0.1, 1.0, h, SeedRecord::new(4, 0)).unwrap();
            tr.logderiv.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>()
        };
        // Σ (Δ)² ≈ h·∫ 4cos² → halves when h halves
        let (r1, r2) = (rv(1e-3), rv(5e-4));
        assert!(r1 < 1e-2 && (r1 / r2 - 2.0).abs() < 0.3, "{r1} {r2}");
    }

    #[test]
    fn step_plan_examples() {
        assert_eq!(step_plan(3.0, 1e-3).unwrap().0, 3000);
        let (m, last) = step_plan(1.05, 0.1).unwrap();
        assert_eq!(m, 11);
        assert!((last - 0.05).abs() < 1e-12);
        assert!(step_plan(1.0, 0.0).is_err());
    }

    #[test]
    fn preconditions() {
        let p = DrivingPath::zero(10, 1.0).unwrap();
        assert!(evolve_point(&p, c(0.0, 0.0), 1e-4).is_err());
        assert!(evolve_point(&p, c(1.0, 0.0), 0.0).is_err());
    }
}
