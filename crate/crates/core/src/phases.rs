//! Phase integrals `(I) = ∫ν p` and `(II) = ∫(ν + 2cos 2u) p`, the
//! four-way classification and `(a, b)` scans with boundary bisection.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_sigma, CovarianceSpec};
use crate::point_tracker::angular_coefficients;
use crate::quadrature::trapezoid;
use crate::stationary::{stationary_density, StationaryDensity, DEFAULT_GRID};

/// Floor of the zero band.
pub const TOL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Thin,
    Swallowing,
    Hitting,
    Dense,
    BoundaryIndeterminate,
}

impl PhaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            PhaseLabel::Thin => "thin",
            PhaseLabel::Swallowing => "swallowing",
            PhaseLabel::Hitting => "hitting",
            PhaseLabel::Dense => "dense",
            PhaseLabel::BoundaryIndeterminate => "boundary_indeterminate",
        }
    }
}

/// Which of the two integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Integral {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseIntegrals {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "II")]
    pub ii: f64,
    pub err_i: f64,
    pub err_ii: f64,
}

impl PhaseIntegrals {
    pub fn get(&self, which: Integral) -> (f64, f64) {
        match which {
            Integral::I => (self.i, self.err_i),
            Integral::II => (self.ii, self.err_ii),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryFlags {
    pub i_zero: bool,
    pub ii_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "II")]
    pub ii: f64,
    pub err_i: f64,
    pub err_ii: f64,
    pub tol_i: f64,
    pub tol_ii: f64,
    pub label: PhaseLabel,
    pub boundary_flags: BoundaryFlags,
    /// Label from the `a − b` rule, present when `c = 0`.
    pub c0_exact: Option<PhaseLabel>,
}

/// Quadrature of both integrals on a density grid.
pub fn integrals_on(p: &StationaryDensity) -> PhaseIntegrals {
    let m = p.m();
    let (gi, gii): (Vec<f64>, Vec<f64>) = p
        .grid
        .iter()
        .zip(&p.values)
        .map(|(&u, &pv)| {
            let nu = angular_coefficients(&p.sigma, u).nu;
            (nu * pv, (nu + 2.0 * (2.0 * u).cos()) * pv)
        })
        .unzip();
    let h = p.step();
    let coarse = |g: &[f64]| {
        let every: Vec<f64> = g.iter().step_by(2).copied().collect();
        debug_assert_eq!(every.len(), m / 2 + 1);
        trapezoid(&every, 2.0 * h)
    };
    let (i, ii) = (trapezoid(&gi, h), trapezoid(&gii, h));
    let alpha = 2.0 - p.sigma.a / 2.0 + p.sigma.b / 2.0;
    let c = p.sigma.c;
    let sup_i = alpha.hypot(c);
    let sup_ii = (alpha + 2.0).hypot(c);
    PhaseIntegrals {
        i,
        ii,
        err_i: (i - coarse(&gi)).abs() + p.quad_error * sup_i,
        err_ii: (ii - coarse(&gii)).abs() + p.quad_error * sup_ii,
    }
}

/// `(I)` and `(II)` with a-posteriori error bounds at grid size `m`.
///
/// For `c < 0` the integrals are computed for `−c`: both integrands and the
/// density are reflected by `u ↦ −u`, so the values coincide.
pub fn phase_integrals_with(sigma: &CovarianceSpec, m: usize) -> Result<PhaseIntegrals> {
    if !(sigma.a + sigma.b > 0.0) {
        return Err(Error::InvalidArgument("phase integrals need a + b > 0".into()));
    }
    let sig = if sigma.c < 0.0 { sigma.reflected() } else { *sigma };
    let p = stationary_density(&sig, m)?;
    Ok(integrals_on(&p))
}

pub fn phase_integrals(sigma: &CovarianceSpec) -> Result<PhaseIntegrals> {
    phase_integrals_with(sigma, DEFAULT_GRID)
}

/// The `c = 0` rule: thin for `a − b ≤ 4`, swallowing for `4 < a − b < 8`,
/// hitting for `a − b ≥ 8`.
pub fn c0_rule(a: f64, b: f64) -> PhaseLabel {
    let d = a - b;
    if d <= 4.0 {
        PhaseLabel::Thin
    } else if d < 8.0 {
        PhaseLabel::Swallowing
    } else {
        PhaseLabel::Hitting
    }
}

/// Sign table with zero bands. `I = 0` counts as `I ≥ 0`.
pub fn sign_table(i: f64, ii: f64, tol_i: f64, tol_ii: f64, c_is_zero: bool) -> PhaseLabel {
    let i_nonneg = i >= 0.0 || i.abs() < tol_i;
    if ii.abs() < tol_ii {
        return if c_is_zero { PhaseLabel::Hitting } else { PhaseLabel::BoundaryIndeterminate };
    }
    match (i_nonneg, ii > 0.0) {
        (true, true) => PhaseLabel::Thin,
        (false, true) => PhaseLabel::Swallowing,
        (false, false) => PhaseLabel::Hitting,
        (true, false) => PhaseLabel::Dense,
    }
}

/// Zero bands per integral: `tol_zero` if given, else `max(10·err, 1e−9)`.
pub fn report_from(sigma: &CovarianceSpec, ints: &PhaseIntegrals, tol_zero: Option<f64>) -> Result<PhaseReport> {
    let tol_i = tol_zero.unwrap_or((10.0 * ints.err_i).max(TOL_FLOOR));
    let tol_ii = tol_zero.unwrap_or((10.0 * ints.err_ii).max(TOL_FLOOR));
    let c0 = sigma.c == 0.0;
    let label = sign_table(ints.i, ints.ii, tol_i, tol_ii, c0);
    let flags = BoundaryFlags {
        i_zero: ints.i.abs() < tol_i,
        ii_zero: ints.ii.abs() < tol_ii,
    };
    let exact = c0.then(|| c0_rule(sigma.a, sigma.b));
    if let Some(e) = exact {
        if e != label && !flags.i_zero && !flags.ii_zero {
            return Err(Error::Inconsistent(format!(
                "(a, b) = ({}, {}): integrals give {} but the a − b rule gives {}",
                sigma.a,
                sigma.b,
                label.name(),
                e.name()
            )));
        }
    }
    Ok(PhaseReport {
        a: sigma.a,
        b: sigma.b,
        c: sigma.c,
        i: ints.i,
        ii: ints.ii,
        err_i: ints.err_i,
        err_ii: ints.err_ii,
        tol_i,
        tol_ii,
        label,
        boundary_flags: flags,
        c0_exact: exact,
    })
}

pub fn classify(sigma: &CovarianceSpec, tol_zero: Option<f64>) -> Result<PhaseReport> {
    let ints = phase_integrals(sigma)?;
    report_from(sigma, &ints, tol_zero)
}

/// Root of `(I)` or `(II)` in `a ∈ [lo, hi]` at fixed `(b, c)` by bisection,
/// to width `tol`. The endpoint values must not share a strict sign.
pub fn bisect_in_a(which: Integral, b: f64, c: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect(|a| integral_value(which, a, b, c), lo, hi, tol)
}

/// Same as [`bisect_in_a`] along `b` at fixed `(a, c)`.
pub fn bisect_in_b(which: Integral, a: f64, c: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect(|b| integral_value(which, a, b, c), lo, hi, tol)
}

fn integral_value(which: Integral, a: f64, b: f64, c: f64) -> Result<f64> {
    let s = validate_sigma(a, b, c)?;
    Ok(phase_integrals(&s)?.get(which).0)
}

fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !(lo < hi) {
        return Err(Error::InvalidArgument(format!("bisection needs lo < hi and tol > 0, got [{lo}, {hi}], {tol}")));
    }
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellStatus {
    Classified(PhaseReport),
    /// `c² > ab` or a negative variance.
    Invalid,
    /// Valid covariance without a stationary density (a driver on one axis).
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub a: f64,
    pub b: f64,
    pub status: CellStatus,
}

impl ScanCell {
    pub fn report(&self) -> Option<&PhaseReport> {
        match &self.status {
            CellStatus::Classified(r) => Some(r),
            _ => None,
        }
    }
}

/// An ordered run of boundary points `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub integral: Integral,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseScan {
    pub c: f64,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Row-major in `b`, then `a`.
    pub cells: Vec<ScanCell>,
    pub boundaries: Vec<Polyline>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub resolution: f64,
    pub tol_zero: Option<f64>,
    /// Width of the bisection bracket at which a root is accepted.
    pub root_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            resolution: 0.25,
            tol_zero: None,
            root_tol: 1e-6,
        }
    }
}

fn axis(lo: f64, hi: f64, res: f64) -> Result<Vec<f64>> {
    if !(res > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad range {lo}:{hi} at resolution {res}")));
    }
    let n = ((hi - lo) / res + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * res).collect())
}

/// Classify every node of the grid and trace `(I) = 0` and `(II) = 0` by
/// bisection along each row of constant `b`.
///
/// Crossings of a row are numbered from small to large `a`; the `k`-th
/// crossings of consecutive rows with the same crossing count form one
/// polyline.
pub fn phase_scan(a_range: (f64, f64), b_range: (f64, f64), c: f64, opts: &ScanOptions) -> Result<PhaseScan> {
    let a_values = axis(a_range.0, a_range.1, opts.resolution)?;
    let b_values = axis(b_range.0, b_range.1, opts.resolution)?;
    let nodes: Vec<(f64, f64)> = b_values.iter().flat_map(|&b| a_values.iter().map(move |&a| (a, b))).collect();
    let cells = nodes
        .par_iter()
        .map(|&(a, b)| scan_cell(a, b, c, opts.tol_zero))
        .collect::<Result<Vec<_>>>()?;

    let na = a_values.len();
    let mut boundaries = Vec::new();
    for which in [Integral::I, Integral::II] {
        let rows: Vec<Vec<f64>> = b_values
            .par_iter()
            .enumerate()
            .map(|(r, &b)| row_crossings(&cells[r * na..(r + 1) * na], which, b, c, opts))
            .collect::<Result<Vec<_>>>()?;
        let mut open: Vec<Polyline> = Vec::new();
        for (roots, &b) in rows.iter().zip(&b_values) {
            if roots.len() != open.len() {
                boundaries.append(&mut open);
                open = roots.iter().map(|_| Polyline { integral: which, points: Vec::new() }).collect();
            }
            for (line, &a) in open.iter_mut().zip(roots) {
                line.points.push((a, b));
            }
        }
        boundaries.append(&mut open);
    }
    Ok(PhaseScan {
        c,
        a_values,
        b_values,
        cells,
        boundaries,
    })
}

fn scan_cell(a: f64, b: f64, c: f64, tol_zero: Option<f64>) -> Result<ScanCell> {
    let status = match validate_sigma(a, b, c) {
        Err(_) => CellStatus::Invalid,
        Ok(s) => match phase_integrals(&s) {
            Err(Error::Unsupported(_)) | Err(Error::InvalidArgument(_)) => CellStatus::Unsupported,
            Err(e) => return Err(e),
            Ok(ints) => CellStatus::Classified(report_from(&s, &ints, tol_zero)?),
        },
    };
    Ok(ScanCell { a, b, status })
}

/// Roots of one integral along a row, between classified neighbours.
fn row_crossings(row: &[ScanCell], which: Integral, b: f64, c: f64, opts: &ScanOptions) -> Result<Vec<f64>> {
    let value = |cell: &ScanCell| {
        cell.report().map(|r| {
            let (v, tol) = match which {
                Integral::I => (r.i, r.tol_i),
                Integral::II => (r.ii, r.tol_ii),
            };
            if v.abs() < tol {
                0.0
            } else {
                v.signum()
            }
        })
    };
    let mut roots = Vec::new();
    for (k, cell) in row.iter().enumerate() {
        let Some(s) = value(cell) else { continue };
        if s == 0.0 {
            roots.push(cell.a);
            continue;
        }
        let Some(next) = row.get(k + 1) else { continue };
        let Some(t) = value(next) else { continue };
        if s * t < 0.0 {
            roots.push(bisect_in_a(which, b, c, cell.a, next.a, opts.root_tol)?);
        }
    }
    Ok(roots)
}

impl PhaseScan {
    /// CSV with columns `a,b,c,status,label,I,II,err_I,err_II`.
    pub fn write_grid_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "a,b,c,status,label,I,II,err_I,err_II")?;
        for cell in &self.cells {
            match &cell.status {
                CellStatus::Classified(r) => writeln!(
                    w,
                    "{},{},{},classified,{},{},{},{},{}",
                    cell.a,
                    cell.b,
                    self.c,
                    r.label.name(),
                    r.i,
                    r.ii,
                    r.err_i,
                    r.err_ii
                )?,
                CellStatus::Invalid => writeln!(w, "{},{},{},invalid,,,,,", cell.a, cell.b, self.c)?,
                CellStatus::Unsupported => writeln!(w, "{},{},{},unsupported,,,,,", cell.a, cell.b, self.c)?,
            }
        }
        Ok(())
    }

    /// CSV with columns `integral,polyline,index,a,b`.
    pub fn write_boundary_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "integral,polyline,index,a,b")?;
        for (k, line) in self.boundaries.iter().enumerate() {
            let name = match line.integral {
                Integral::I => "I",
                Integral::II => "II",
            };
            for (j, (a, b)) in line.points.iter().enumerate() {
                writeln!(w, "{name},{k},{j},{a},{b}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::density_general;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(a: f64, b: f64, c: f64) -> CovarianceSpec {
        validate_sigma(a, b, c).unwrap()
    }

    #[test]
    fn exact_cancellations() {
        assert!(phase_integrals(&spec(5.0, 1.0, 0.0)).unwrap().i.abs() < 1e-9);
        assert!(phase_integrals(&spec(9.0, 1.0, 0.0)).unwrap().ii.abs() < 1e-9);
        let t = phase_integrals(&spec(2.0, 2.0, 0.0)).unwrap();
        assert!(t.i > 0.0 && t.ii > 0.0);
    }

    #[test]
    fn c0_integrals_match_prefactor_form() {
        // for c = 0 both integrals are multiples of ∫cos 2u p
        for &(a, b) in &[(2.0, 2.0), (6.0, 1.0), (3.0, 7.0), (11.0, 0.5)] {
            let s = spec(a, b, 0.0);
            let p = stationary_density(&s, DEFAULT_GRID).unwrap();
            let m2 = p.integrate(|u| (2.0 * u).cos());
            assert!(m2 > 0.0);
            let alpha = 2.0 - a / 2.0 + b / 2.0;
            let t = phase_integrals(&s).unwrap();
            assert!((t.i - alpha * m2).abs() < 1e-12);
            assert!((t.ii - (alpha + 2.0) * m2).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&spec(2.0, 2.0, 0.0), None).unwrap().label, PhaseLabel::Thin);
        assert_eq!(classify(&spec(7.0, 1.0, 0.0), None).unwrap().label, PhaseLabel::Swallowing);
        let r = classify(&spec(9.0, 1.0, 0.0), None).unwrap();
        assert_eq!(r.label, PhaseLabel::Hitting);
        assert!(r.boundary_flags.ii_zero);
        assert_eq!(r.c0_exact, Some(PhaseLabel::Hitting));
        let r = classify(&spec(5.0, 1.0, 0.0), None).unwrap();
        assert_eq!(r.label, PhaseLabel::Thin);
        assert!(r.boundary_flags.i_zero && !r.boundary_flags.ii_zero);
        assert_eq!(classify(&spec(12.0, 1.0, 0.0), None).unwrap().label, PhaseLabel::Hitting);
        assert!(classify(&spec(2.0, 1.0, 0.5), None).unwrap().c0_exact.is_none());
    }

    #[test]
    fn sign_table_is_total() {
        let vals = [-1.0, -1e-12, 0.0, 1e-12, 1.0];
        for &i in &vals {
            for &ii in &vals {
                for c0 in [true, false] {
                    let l = sign_table(i, ii, 1e-9, 1e-9, c0);
                    let expected = if ii.abs() < 1e-9 {
                        if c0 {
                            PhaseLabel::Hitting
                        } else {
                            PhaseLabel::BoundaryIndeterminate
                        }
                    } else if i > -1e-9 {
                        if ii > 0.0 {
                            PhaseLabel::Thin
                        } else {
                            PhaseLabel::Dense
                        }
                    } else if ii > 0.0 {
                        PhaseLabel::Swallowing
                    } else {
                        PhaseLabel::Hitting
                    };
                    assert_eq!(l, expected, "{i} {ii} {c0}");
                }
            }
        }
    }

    #[test]
    fn c0_random_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let a = rng.gen_range(0.1..20.0);
            let b = rng.gen_range(0.1..12.0);
            let r = classify(&spec(a, b, 0.0), None).unwrap();
            assert_eq!(Some(r.label), r.c0_exact, "({a}, {b})");
        }
    }

    #[test]
    fn conjugation_invariance_by_direct_reflection() {
        for &(a, b, c) in &[(2.0, 1.0, 0.5), (3.0, 2.0, 1.0), (6.0, 2.0, 3.0)] {
            let plus = integrals_on(&density_general(&spec(a, b, c), DEFAULT_GRID).unwrap());
            let minus = integrals_on(&density_general(&spec(a, b, -c), DEFAULT_GRID).unwrap());
            assert!((plus.i - minus.i).abs() < 1e-12, "{} {}", plus.i, minus.i);
            assert!((plus.ii - minus.ii).abs() < 1e-12);
            let rp = classify(&spec(a, b, c), None).unwrap();
            let rm = classify(&spec(a, b, -c), None).unwrap();
            assert_eq!((rp.i, rp.ii, rp.label), (rm.i, rm.ii, rm.label));
        }
    }

    #[test]
    fn degenerate_integrals_are_finite() {
        let t = phase_integrals(&spec(4.0, 1.0, 2.0)).unwrap();
        assert!(t.i.is_finite() && t.ii.is_finite());
        let r = classify(&spec(4.0, 1.0, -2.0), None).unwrap();
        assert_eq!(r.c0_exact, None);
    }

    #[test]
    fn bisection_finds_c0_boundaries() {
        let a = bisect_in_a(Integral::I, 1.0, 0.0, 3.0, 6.0, 1e-6).unwrap();
        assert!((a - 5.0).abs() < 0.02, "{a}");
        let a = bisect_in_a(Integral::II, 1.0, 0.0, 8.0, 10.0, 1e-6).unwrap();
        assert!((a - 9.0).abs() < 0.02, "{a}");
        let b = bisect_in_b(Integral::I, 6.0, 0.0, 0.5, 3.0, 1e-6).unwrap();
        assert!((b - 2.0).abs() < 1e-4, "{b}");
        assert!(bisect_in_a(Integral::I, 1.0, 0.0, 1.0, 2.0, 1e-6).is_err());
    }

    #[test]
    fn scan_marks_invalid_and_traces_lines() {
        let opts = ScanOptions { resolution: 0.5, ..Default::default() };
        let s = phase_scan((0.0, 12.0), (0.0, 3.0), 1.0, &opts).unwrap();
        assert_eq!(s.cells.len(), s.a_values.len() * s.b_values.len());
        for cell in &s.cells {
            if cell.a * cell.b < 1.0 {
                assert_eq!(cell.status, CellStatus::Invalid, "({}, {})", cell.a, cell.b);
            } else {
                assert!(cell.report().is_some() || cell.a == 0.0 || cell.b == 0.0);
            }
        }

        let s = phase_scan((0.0, 12.0), (0.0, 2.0), 0.0, &ScanOptions::default()).unwrap();
        let mut found = 0;
        for line in &s.boundaries {
            for &(a, b) in &line.points {
                let gap = match line.integral {
                    Integral::I => 4.0,
                    Integral::II => 8.0,
                };
                assert!((a - b - gap).abs() < 1e-5, "{:?} ({a}, {b})", line.integral);
                found += 1;
            }
        }
        // every row with b > 0 has one crossing of each line
        assert_eq!(found, 2 * (s.b_values.len() - 1));
        let mut grid = Vec::new();
        s.write_grid_csv(&mut grid, &["c = 0".into()]).unwrap();
        let text = String::from_utf8(grid).unwrap();
        assert!(text.contains("a,b,c,status,label,I,II,err_I,err_II"));
        assert!(text.contains(",unsupported,"));
        let mut bnd = Vec::new();
        s.write_boundary_csv(&mut bnd, &[]).unwrap();
        assert!(String::from_utf8(bnd).unwrap().starts_with("integral,polyline,index,a,b"));
    }

    #[test]
    fn scan_is_deterministic() {
        let opts = ScanOptions { resolution: 1.0, ..Default::default() };
        let x = phase_scan((1.0, 6.0), (1.0, 3.0), 0.5, &opts).unwrap();
        let y = phase_scan((1.0, 6.0), (1.0, 3.0), 0.5, &opts).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn report_serializes_with_label() {
        let r = classify(&spec(7.0, 1.0, 0.0), None).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("\"label\":\"swallowing\""), "{js}");
        assert!(js.contains("\"I\":"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn conjugation_reports_identical(a in 0.2f64..10.0, b in 0.2f64..10.0, rho in -0.95f64..0.95) {
            let c = rho * (a * b).sqrt();
            let rp = classify(&spec(a, b, c), None).unwrap();
            let rm = classify(&spec(a, b, -c), None).unwrap();
            prop_assert_eq!(rp.label, rm.label);
            prop_assert_eq!(rp.i, rm.i);
            prop_assert_eq!(rp.ii, rm.ii);
        }
    }
}
