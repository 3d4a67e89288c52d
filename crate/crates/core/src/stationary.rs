//! π-periodic stationary density of the angular diffusion
//! `dθ = μ(θ) d𝔱 + √(2D(θ)) dW`, i.e. the periodic solution of
//! `−(μp)′ + (Dp)″ = 0` with `∫₀^{2π} p = 1`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::CovarianceSpec;
use crate::point_tracker::{angular_coefficients, diffusion_derivative};
use crate::quadrature::{adaptive_simpson, cumulative_trapezoid, trapezoid};

/// Default number of grid intervals on `[0, 2π]`.
pub const DEFAULT_GRID: usize = 2048;

/// Absolute tolerance for the nested integrals of the general case.
const NESTED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    C0ClosedForm,
    P0P1,
    Degenerate,
    /// Built for `−c` and reflected through `u ↦ −u`.
    Reflected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDensity {
    pub sigma: CovarianceSpec,
    /// `M + 1` uniform angles on `[0, 2π]`.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub method: DensityMethod,
    pub r_star: Option<f64>,
    /// Trapezoid integral of the unnormalized values over `[0, 2π]`.
    pub normalizer: f64,
    /// Zero of `D` in the degenerate case.
    pub singular_point: Option<f64>,
    /// Accumulated quadrature error estimate of the construction.
    pub quad_error: f64,
}

fn check_grid(m: usize) -> Result<()> {
    if m < 8 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("grid size must be even and ≥ 8, got {m}")));
    }
    Ok(())
}

fn check_axes(sigma: &CovarianceSpec) -> Result<()> {
    if sigma.a <= 0.0 || sigma.b <= 0.0 {
        return Err(Error::Unsupported(format!(
            "a = {}, b = {}: the driver is confined to one axis",
            sigma.a, sigma.b
        )));
    }
    Ok(())
}

/// Dispatch on the covariance: closed form for `c = 0`, the degenerate
/// formula for `c² = ab`, otherwise the `p₀ + r*·p₁` construction.
pub fn stationary_density(sigma: &CovarianceSpec, m: usize) -> Result<StationaryDensity> {
    check_axes(sigma)?;
    if sigma.c == 0.0 {
        density_c0(sigma, m)
    } else if sigma.degenerate {
        density_degenerate(sigma, m)
    } else {
        density_general(sigma, m)
    }
}

impl StationaryDensity {
    /// Extend values on `[0, π]` (`m/2 + 1` nodes) periodically and normalize.
    fn from_half(
        sigma: &CovarianceSpec,
        m: usize,
        half: &[f64],
        method: DensityMethod,
        r_star: Option<f64>,
        singular_point: Option<f64>,
        quad_error: f64,
    ) -> Result<Self> {
        let hm = m / 2;
        debug_assert_eq!(half.len(), hm + 1);
        let h = 2.0 * PI / m as f64;
        let grid: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
        let mut values: Vec<f64> = (0..=m).map(|i| half[i % hm]).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature { a: 0.0, b: PI, err: f64::INFINITY });
        }
        let z = trapezoid(&values, h);
        for v in &mut values {
            *v = (*v / z).max(0.0);
        }
        Ok(StationaryDensity {
            sigma: *sigma,
            grid,
            values,
            method,
            r_star,
            normalizer: z,
            singular_point,
            quad_error,
        })
    }

    pub fn m(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.m() as f64
    }

    /// `p(u)` by periodic linear interpolation.
    pub fn value_at(&self, u: f64) -> f64 {
        let h = self.step();
        let x = u.rem_euclid(2.0 * PI) / h;
        let i = (x.floor() as usize).min(self.m() - 1);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// The density with `u ↦ −u`, attached to `sigma`.
    fn reflect(mut self, sigma: &CovarianceSpec) -> Self {
        self.values.reverse();
        self.sigma = *sigma;
        self.method = DensityMethod::Reflected;
        self.singular_point = self.singular_point.map(|x| PI - x);
        self
    }

    /// Trapezoid `∫₀^{2π} g(u) p(u) du` on the grid.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let w: Vec<f64> = self.grid.iter().zip(&self.values).map(|(&u, &p)| g(u) * p).collect();
        trapezoid(&w, self.step())
    }

    /// CDF of the angle modulo π.
    pub fn angle_sampler(&self) -> AngleSampler {
        let hm = self.m() / 2;
        let cum = cumulative_trapezoid(&self.values[..=hm], self.step());
        let total = cum[hm];
        AngleSampler {
            h: self.step(),
            cdf: cum.into_iter().map(|c| c / total).collect(),
        }
    }

    /// CSV with columns `u,p`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# method = {}", method_name(self.method))?;
        if let Some(r) = self.r_star {
            writeln!(w, "# r_star = {r}")?;
        }
        writeln!(w, "u,p")?;
        for (u, p) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{u},{p}")?;
        }
        Ok(())
    }
}

pub fn method_name(m: DensityMethod) -> &'static str {
    match m {
        DensityMethod::C0ClosedForm => "c0_closed_form",
        DensityMethod::P0P1 => "p0_p1",
        DensityMethod::Degenerate => "degenerate",
        DensityMethod::Reflected => "reflected",
    }
}

/// Piecewise-linear CDF of `θ mod π` under `p`; exact inverse sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSampler {
    h: f64,
    /// Values at the grid nodes of `[0, π]`, from 0 to 1.
    pub cdf: Vec<f64>,
}

impl AngleSampler {
    pub fn cdf_at(&self, u: f64) -> f64 {
        let x = u.rem_euclid(PI) / self.h;
        let n = self.cdf.len() - 1;
        let i = (x.floor() as usize).min(n - 1);
        let f = x - i as f64;
        self.cdf[i] * (1.0 - f) + self.cdf[i + 1] * f
    }

    /// Angle in `[0, π)` with CDF [`Self::cdf_at`] for `q` uniform on `[0, 1)`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.cdf.len() - 1;
        let i = self.cdf.partition_point(|&c| c <= q).clamp(1, n);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let f = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.0 };
        ((i - 1) as f64 + f) * self.h
    }
}

/// `log p` up to a constant for `c = 0`.
fn c0_log(a: f64, b: f64, u: f64) -> f64 {
    if a == b {
        let c = u.cos();
        4.0 / a * c * c
    } else {
        4.0 / (b - a) * ((b - a) * (2.0 * u).cos() / (a + b)).ln_1p()
    }
}

/// Closed form `p ∝ (a + b + (b − a) cos 2u)^{4/(b−a)}`, or `exp((4/a) cos²u)`
/// when `a = b`. Unnormalized values are scaled so the largest is 1.
pub fn density_c0(sigma: &CovarianceSpec, m: usize) -> Result<StationaryDensity> {
    check_grid(m)?;
    if sigma.c != 0.0 {
        return Err(Error::InvalidArgument(format!("closed form needs c = 0, got {}", sigma.c)));
    }
    if sigma.a + sigma.b <= 0.0 {
        return Err(Error::Unsupported("a = b = 0: no Brownian driver".into()));
    }
    check_axes(sigma)?;
    let hm = m / 2;
    let h = 2.0 * PI / m as f64;
    let logs: Vec<f64> = (0..=hm).map(|k| c0_log(sigma.a, sigma.b, k as f64 * h)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    StationaryDensity::from_half(sigma, m, &half, DensityMethod::C0ClosedForm, Some(0.0), None, 0.0)
}

/// `μ/D` at `u`.
fn mu_over_d(sigma: &CovarianceSpec, u: f64) -> f64 {
    let k = angular_coefficients(sigma, u);
    k.mu / k.d
}

/// The `p₀ + r*·p₁` construction for `0 < |c| < √(ab)`.
pub fn density_general(sigma: &CovarianceSpec, m: usize) -> Result<StationaryDensity> {
    check_grid(m)?;
    check_axes(sigma)?;
    if sigma.c == 0.0 || sigma.degenerate || sigma.det() <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "general construction needs 0 < |c| < √(ab), got (a, b, c) = ({}, {}, {})",
            sigma.a, sigma.b, sigma.c
        )));
    }
    if sigma.c < 0.0 {
        let d = density_general(&sigma.reflected(), m)?;
        return Ok(d.reflect(sigma));
    }
    let hm = m / 2;
    let h = PI / hm as f64;
    let node = |k: usize| k as f64 * h;
    let ratio = |u: f64| mu_over_d(sigma, u);

    let mut err = 0.0;
    let mut phi = vec![0.0; hm + 1];
    let mut j = vec![0.0; hm + 1];
    for k in 0..hm {
        let (u0, u1) = (node(k), node(k + 1));
        let (dphi, e) = adaptive_simpson(ratio, u0, u1, NESTED_TOL * h)?;
        err += e;
        phi[k + 1] = phi[k] + dphi;
        // ∫_{u0}^{u1} exp(∫_s^{u1} μ/D) ds
        let mut inner_err = 0.0;
        let mut inner_fail = None;
        let cell = adaptive_simpson(
            |s| match adaptive_simpson(ratio, s, u1, NESTED_TOL * h) {
                Ok((v, e)) => {
                    inner_err += e;
                    v.exp()
                }
                Err(e) => {
                    inner_fail.get_or_insert(e);
                    f64::NAN
                }
            },
            u0,
            u1,
            NESTED_TOL * h,
        );
        if let Some(e) = inner_fail {
            return Err(e);
        }
        let (cell, e) = cell?;
        err += e + inner_err * h;
        j[k + 1] = dphi.exp() * j[k] + cell;
    }
    let d0 = angular_coefficients(sigma, 0.0).d;
    let p0: Vec<f64> = (0..=hm)
        .map(|k| d0 / angular_coefficients(sigma, node(k)).d * phi[k].exp())
        .collect();
    let p1: Vec<f64> = (0..=hm).map(|k| j[k] / angular_coefficients(sigma, node(k)).d).collect();
    let r_star = (p0[0] - p0[hm]) / p1[hm];
    let half: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| a + r_star * b).collect();
    StationaryDensity::from_half(sigma, m, &half, DensityMethod::P0P1, Some(r_star), None, err)
}

/// Shape constants of the degenerate case, written in `w = u − x`.
#[derive(Debug, Clone, Copy)]
struct Degenerate {
    x: f64,
    p: f64,
    beta: f64,
    kappa: f64,
    half_sum: f64,
}

impl Degenerate {
    fn new(sigma: &CovarianceSpec) -> Self {
        let (a, b) = (sigma.a, sigma.b);
        let alpha = 2.0 - a / 2.0 + b / 2.0;
        Degenerate {
            x: (b / a).sqrt().atan(),
            p: 4.0 * (a * b).sqrt() / (a + b),
            beta: (alpha * (a - b) - 2.0 * a * b) / (a + b),
            kappa: 2.0 / (a + b),
            half_sum: (a + b) / 2.0,
        }
    }

    /// Antiderivative of `μ/D` in `w ∈ (0, π)`.
    fn phi(&self, w: f64) -> f64 {
        self.kappa * (self.p / w.tan() + 2.0 * self.p * w - 2.0 * self.beta * w.sin().ln())
    }

    fn d(&self, w: f64) -> f64 {
        let s = w.sin();
        self.half_sum * s * s
    }
}

/// `Dp` flux solution on `(x, x + π)` for `c = √(ab)`, before normalization,
/// at `w = u − x`; endpoints take the limit `(a + b)/(4√(ab))`.
fn degenerate_profile(dg: &Degenerate, ws: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut order: Vec<usize> = (0..ws.len()).collect();
    order.sort_by(|&i, &k| ws[i].total_cmp(&ws[k]));
    let mut out = vec![0.0; ws.len()];
    let mut j = 0.0;
    let mut prev = 0.0;
    let mut prev_phi = f64::INFINITY;
    let mut worst_rel: f64 = 0.0;
    for &i in &order {
        let w = ws[i];
        if w <= 0.0 || w >= PI {
            out[i] = 1.0 / dg.p;
            continue;
        }
        let phi_w = dg.phi(w);
        let kernel = |s: f64| if s <= 0.0 { 0.0 } else { (phi_w - dg.phi(s)).exp() };
        // scale the tolerance to the size of the cell integral
        let mid = 0.5 * (prev + w);
        let rough = (w - prev) / 6.0 * (kernel(prev) + 4.0 * kernel(mid) + kernel(w));
        let tol = 1e-12 * rough.abs().max(1e-300);
        let (cell, e) = adaptive_simpson(kernel, prev, w, tol)?;
        let carry = if prev_phi.is_finite() { (phi_w - prev_phi).exp() * j } else { 0.0 };
        j = carry + cell;
        if cell != 0.0 {
            worst_rel = worst_rel.max(e / cell.abs());
        }
        out[i] = j / dg.d(w);
        prev = w;
        prev_phi = phi_w;
    }
    if worst_rel > 1e-6 {
        return Err(Error::Quadrature { a: dg.x, b: dg.x + PI, err: worst_rel });
    }
    Ok((out, worst_rel))
}

/// Unnormalized degenerate density at `u` (for checks of the construction).
pub fn degenerate_unnormalized(sigma: &CovarianceSpec, u: f64) -> Result<f64> {
    check_axes(sigma)?;
    let (sig, u) = if sigma.c < 0.0 { (sigma.reflected(), -u) } else { (*sigma, u) };
    let dg = Degenerate::new(&sig);
    let w = (u - dg.x).rem_euclid(PI);
    // the profile needs the nodes below w as well
    let n = 4096;
    let mut ws: Vec<f64> = (1..n).map(|i| w * i as f64 / n as f64).collect();
    ws.push(w);
    let (vals, _) = degenerate_profile(&dg, &ws)?;
    Ok(*vals.last().unwrap())
}

/// Density for `c = ±√(ab)` with singular point `x = arctan √(b/a)` (for
/// `c > 0`).
pub fn density_degenerate(sigma: &CovarianceSpec, m: usize) -> Result<StationaryDensity> {
    check_grid(m)?;
    check_axes(sigma)?;
    if !sigma.degenerate {
        return Err(Error::InvalidArgument("degenerate construction needs c² = ab".into()));
    }
    if sigma.c < 0.0 {
        let d = density_degenerate(&sigma.reflected(), m)?;
        return Ok(d.reflect(sigma));
    }
    let dg = Degenerate::new(sigma);
    let hm = m / 2;
    let h = PI / hm as f64;
    let ws: Vec<f64> = (0..hm).map(|k| (k as f64 * h - dg.x).rem_euclid(PI)).collect();
    let (mut half, err) = degenerate_profile(&dg, &ws)?;
    half.push(half[0]);
    StationaryDensity::from_half(sigma, m, &half, DensityMethod::Degenerate, None, Some(dg.x), err)
}

/// Closed form of `∫₀^π μ/D` for `ab − c² > 0`.
pub fn mu_over_d_integral(sigma: &CovarianceSpec) -> Result<f64> {
    let det = sigma.a * sigma.b - sigma.c * sigma.c;
    let spread = (sigma.a - sigma.b).powi(2) + 4.0 * sigma.c * sigma.c;
    if !(det > 0.0) {
        return Err(Error::InvalidArgument("needs ab − c² > 0".into()));
    }
    if sigma.c == 0.0 {
        return Ok(0.0);
    }
    let r = det.sqrt();
    Ok(8.0 * PI * sigma.c * (2.0 * r - (sigma.a + sigma.b)) / (r * spread))
}

/// `∫₀^π μ/D` by adaptive quadrature, split into `pieces` cells.
pub fn mu_over_d_quadrature(sigma: &CovarianceSpec, tol: f64) -> Result<f64> {
    if !(sigma.det() > 0.0) {
        return Err(Error::InvalidArgument("needs ab − c² > 0".into()));
    }
    let pieces = 64;
    let h = PI / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        total += adaptive_simpson(|u| mu_over_d(sigma, u), k as f64 * h, (k + 1) as f64 * h, tol / pieces as f64)?.0;
    }
    Ok(total)
}

/// Time stepping for the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FpScheme {
    /// Implicit Euler with the given time step (inverse iteration).
    Implicit { dt: f64 },
    /// Forward Euler at the given fraction of the stability limit.
    Explicit { cfl: f64 },
}

/// Conservative finite-volume operator for `∂_t ρ = −∂_u(μρ) + ∂_u²(Dρ)` on
/// the periodic cell grid of `[0, π]` with Scharfetter–Gummel face fluxes.
#[derive(Debug, Clone)]
pub struct FokkerPlanck {
    pub m: usize,
    pub h: f64,
    /// Flux at face `i + ½` is `w_minus[i]·ρ_i − w_plus[i]·ρ_{i+1}`.
    w_minus: Vec<f64>,
    w_plus: Vec<f64>,
}

/// Bernoulli function `x / (eˣ − 1)`.
fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

impl FokkerPlanck {
    pub fn new(sigma: &CovarianceSpec, m: usize) -> Result<Self> {
        if m < 64 || !m.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("oracle grid must be a power of two ≥ 64, got {m}")));
        }
        let h = PI / m as f64;
        let mut w_minus = Vec::with_capacity(m);
        let mut w_plus = Vec::with_capacity(m);
        for i in 0..m {
            let uf = (i + 1) as f64 * h;
            let k = angular_coefficients(sigma, uf);
            let v = k.mu - diffusion_derivative(sigma, uf);
            let d = k.d.max(0.0);
            if d <= 1e-14 * (1.0 + v.abs()) {
                // pure upwinding where the diffusion vanishes
                w_minus.push(v.max(0.0));
                w_plus.push((-v).max(0.0));
            } else {
                let pe = v * h / d;
                w_minus.push(d / h * bernoulli(-pe));
                w_plus.push(d / h * bernoulli(pe));
            }
        }
        Ok(FokkerPlanck { m, h, w_minus, w_plus })
    }

    /// Cell centers.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|i| (i as f64 + 0.5) * self.h).collect()
    }

    fn flux(&self, rho: &[f64], i: usize) -> f64 {
        let n = (i + 1) % self.m;
        self.w_minus[i] * rho[i] - self.w_plus[i] * rho[n]
    }

    /// `dρ/dt` of the semi-discrete system.
    pub fn rate(&self, rho: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let left = self.flux(rho, (i + self.m - 1) % self.m);
                let right = self.flux(rho, i);
                -(right - left) / self.h
            })
            .collect()
    }

    /// Largest stable forward-Euler step.
    pub fn explicit_limit(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let prev = (i + self.m - 1) % self.m;
                (self.w_minus[i] + self.w_plus[prev]) / self.h
            })
            .fold(0.0, f64::max)
            .recip()
    }

    pub fn explicit_step(&self, rho: &mut [f64], dt: f64) {
        let r = self.rate(rho);
        for (x, d) in rho.iter_mut().zip(r) {
            *x += dt * d;
        }
    }

    /// Solve `(I − dt·A) ρ_new = ρ`.
    pub fn implicit_step(&self, rho: &mut [f64], dt: f64) {
        let m = self.m;
        let s = dt / self.h;
        // row i: ρ_i − dt·rate_i, rate_i = −(F_i − F_{i−1})/h
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for i in 0..m {
            let prev = (i + m - 1) % m;
            diag[i] = 1.0 + s * (self.w_minus[i] + self.w_plus[prev]);
            upper[i] = -s * self.w_plus[i];
            lower[i] = -s * self.w_minus[prev];
        }
        let out = solve_cyclic(&lower, &diag, &upper, rho);
        rho.copy_from_slice(&out);
    }

    pub fn mass(&self, rho: &[f64]) -> f64 {
        rho.iter().sum::<f64>() * self.h
    }
}

/// Cyclic tridiagonal solve; `lower[0]` couples to the last unknown and
/// `upper[m−1]` to the first.
fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let alpha = upper[m - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[m - 1] -= alpha * beta / gamma;
    let x = thomas(lower, &d, upper, rhs);
    let mut u = vec![0.0; m];
    u[0] = gamma;
    u[m - 1] = alpha;
    let z = thomas(lower, &d, upper, &u);
    let fact = (x[0] + beta * x[m - 1] / gamma) / (1.0 + z[0] + beta * z[m - 1] / gamma);
    x.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let den = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < m { upper[i] / den } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Steady state of the finite-volume scheme on `m` cells of `[0, π]`, as
/// cell-center values of a density with `∫₀^{2π} = 1` (the π-periodic
/// extension), together with the iteration count.
pub fn fokker_planck_oracle(
    sigma: &CovarianceSpec,
    m: usize,
    max_iters: usize,
    scheme: FpScheme,
) -> Result<(Vec<f64>, usize)> {
    check_axes(sigma)?;
    let fp = FokkerPlanck::new(sigma, m)?;
    let mut rho = vec![0.5 / PI; m];
    let dt = match scheme {
        FpScheme::Implicit { dt } => dt,
        FpScheme::Explicit { cfl } => cfl * fp.explicit_limit(),
    };
    let mut change = f64::INFINITY;
    for it in 1..=max_iters {
        let old = rho.clone();
        match scheme {
            FpScheme::Implicit { .. } => {
                fp.implicit_step(&mut rho, dt);
                let mass = fp.mass(&rho);
                for r in &mut rho {
                    *r *= 0.5 / mass;
                }
            }
            FpScheme::Explicit { .. } => fp.explicit_step(&mut rho, dt),
        }
        change = rho.iter().zip(&old).map(|(a, b)| (a - b).abs()).sum::<f64>() * fp.h;
        if change < 1e-12 {
            return Ok((rho, it));
        }
    }
    Err(Error::NoConvergence { iters: max_iters, change })
}

/// `∫₀^{2π} |p − ρ|` over the oracle's cell centers (π-periodic).
pub fn oracle_l1(p: &StationaryDensity, rho: &[f64]) -> f64 {
    let h = PI / rho.len() as f64;
    2.0 * rho
        .iter()
        .enumerate()
        .map(|(i, r)| (p.value_at((i as f64 + 0.5) * h) - r).abs())
        .sum::<f64>()
        * h
}
