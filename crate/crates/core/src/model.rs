//! Covariance parameters, discretized complex Brownian drivers and the exact
//! path transforms (conjugation, negation, Brownian scaling, time-reversal
//! duality).

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::streams::SeedRecord;

/// Relative slack used when deciding that `c² = ab` holds.
const DEGENERATE_RTOL: f64 = 8.0 * f64::EPSILON;

/// Covariance `Σ = ((a, c), (c, b))` of the complex driver `√a B + i√b B̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `c² = ab`: the driver is a complex multiple of a real Brownian motion.
    pub degenerate: bool,
}

/// Validate `(a, b, c)` as a positive semidefinite covariance.
pub fn validate_sigma(a: f64, b: f64, c: f64) -> Result<CovarianceSpec> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidCovariance(format!(
            "non-finite entry in (a, b, c) = ({a}, {b}, {c})"
        )));
    }
    if a < 0.0 {
        return Err(Error::InvalidCovariance(format!("a < 0 (a = {a})")));
    }
    if b < 0.0 {
        return Err(Error::InvalidCovariance(format!("b < 0 (b = {b})")));
    }
    let ab = a * b;
    let c2 = c * c;
    let slack = DEGENERATE_RTOL * ab;
    if c2 > ab + slack {
        return Err(Error::InvalidCovariance(format!(
            "c² > ab ({c2} > {ab})"
        )));
    }
    Ok(CovarianceSpec {
        a,
        b,
        c,
        degenerate: (ab - c2).abs() <= slack,
    })
}

impl CovarianceSpec {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        validate_sigma(a, b, c)
    }

    /// `ab − c²`, clamped at zero.
    pub fn det(&self) -> f64 {
        (self.a * self.b - self.c * self.c).max(0.0)
    }

    /// The covariance with `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        CovarianceSpec {
            a: self.b,
            b: self.a,
            ..*self
        }
    }

    /// The covariance with `c` replaced by `−c` (conjugated driver).
    pub fn reflected(&self) -> Self {
        CovarianceSpec { c: -self.c, ..*self }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    /// Map two independent standard normals to a pair with covariance
    /// `scale² · Σ`.
    #[inline]
    pub fn correlate(&self, g1: f64, g2: f64, scale: f64) -> (f64, f64) {
        if self.a > 0.0 {
            let sa = self.a.sqrt();
            let x = sa * g1 * scale;
            if self.degenerate {
                let y = (self.b / self.a).sqrt().copysign(self.c) * x;
                return (x, if self.c == 0.0 { 0.0 } else { y });
            }
            let resid = (self.b - self.c * self.c / self.a).max(0.0).sqrt();
            let y = ((self.c / sa) * g1 + resid * g2) * scale;
            (x, y)
        } else {
            (0.0, self.b.sqrt() * g2 * scale)
        }
    }

    /// Draw one increment pair with covariance `dt · Σ`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> (f64, f64) {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        self.correlate(g1, g2, dt.sqrt())
    }
}

/// A discretized complex driver: `n` increments over capacity time `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    pub horizon: f64,
    pub increments: Vec<Complex64>,
    pub cumulative: Vec<Complex64>,
    pub seed: Option<SeedRecord>,
    pub sigma: Option<CovarianceSpec>,
}

/// Exact transforms of a driving path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathTransform {
    Conjugate,
    Negate,
    Scale(f64),
    Dual,
}

impl DrivingPath {
    pub fn from_increments(horizon: f64, increments: Vec<Complex64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::InvalidArgument("a path needs n ≥ 1 increments".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let cumulative = increments
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect();
        Ok(DrivingPath {
            horizon,
            increments,
            cumulative,
            seed: None,
            sigma: None,
        })
    }

    /// The path with every increment equal to zero.
    pub fn zero(n: usize, horizon: f64) -> Result<Self> {
        Self::from_increments(horizon, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn n(&self) -> usize {
        self.increments.len()
    }

    /// Capacity time elapsed per increment.
    pub fn step(&self) -> f64 {
        self.horizon / self.n() as f64
    }

    /// Driver value after all increments.
    pub fn endpoint(&self) -> Complex64 {
        *self.cumulative.last().expect("non-empty path")
    }

    /// Slit-map centers in application order: `x_1, i y_1, x_2, i y_2, …`.
    pub fn half_step_centers(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.n());
        for d in &self.increments {
            out.push(Complex64::new(d.re, 0.0));
            out.push(Complex64::new(0.0, d.im));
        }
        out
    }

    pub fn transform(&self, op: PathTransform) -> Result<Self> {
        transform_path(self, op)
    }
}

/// Sample a driver whose increments are i.i.d. with covariance
/// `(horizon / n) · Σ`.
pub fn sample_driving_path(
    sigma: &CovarianceSpec,
    n: usize,
    horizon: f64,
    seed: SeedRecord,
) -> Result<DrivingPath> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    let mut rng = seed.rng();
    let dt = horizon / n as f64;
    let increments = (0..n)
        .map(|_| {
            let (x, y) = sigma.sample_increment(&mut rng, dt);
            Complex64::new(x, y)
        })
        .collect();
    let mut path = DrivingPath::from_increments(horizon, increments)?;
    path.seed = Some(seed);
    path.sigma = Some(*sigma);
    Ok(path)
}

pub fn transform_path(path: &DrivingPath, op: PathTransform) -> Result<DrivingPath> {
    let mut horizon = path.horizon;
    let mut sigma = path.sigma;
    let increments: Vec<Complex64> = match op {
        PathTransform::Conjugate => {
            sigma = sigma.map(|s| s.reflected());
            path.increments.iter().map(|d| d.conj()).collect()
        }
        PathTransform::Negate => path.increments.iter().map(|d| -d).collect(),
        PathTransform::Scale(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument(format!("scale factor must be > 0, got {r}")));
            }
            horizon *= r * r;
            sigma = None;
            path.increments.iter().map(|d| d * r).collect()
        }
        PathTransform::Dual => {
            // (x_j, y_j) <- (y_{n-j+1}, -x_{n-j+1})
            sigma = sigma.map(|s| CovarianceSpec {
                a: s.b,
                b: s.a,
                c: -s.c,
                degenerate: s.degenerate,
            });
            path.increments
                .iter()
                .rev()
                .map(|d| Complex64::new(d.im, -d.re))
                .collect()
        }
    };
    let mut out = DrivingPath::from_increments(horizon, increments)?;
    out.seed = path.seed;
    out.sigma = sigma;
    Ok(out)
}

const BINARY_MAGIC: &[u8; 8] = b"SLEPATH1";

impl DrivingPath {
    /// CSV with columns `j,x,y,cum_re,cum_im`; `header` lines are written as
    /// `# ` comments first.
    pub fn write_csv<W: Write>(&self, mut w: W, header: &[String]) -> Result<()> {
        for line in header {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# horizon = {}", self.horizon)?;
        writeln!(w, "j,x,y,cum_re,cum_im")?;
        for (j, (d, s)) in self.increments.iter().zip(&self.cumulative).enumerate() {
            writeln!(w, "{},{},{},{},{}", j + 1, d.re, d.im, s.re, s.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut horizon = None;
        let mut incs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    if k.trim() == "horizon" {
                        horizon = Some(parse_f64(v.trim())?);
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("j,") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 3 {
                return Err(Error::Parse(format!("short CSV row: {line}")));
            }
            incs.push(Complex64::new(parse_f64(cols[1])?, parse_f64(cols[2])?));
        }
        let horizon = horizon.ok_or_else(|| Error::Parse("missing '# horizon = …' line".into()))?;
        DrivingPath::from_increments(horizon, incs)
    }

    /// Binary dump: magic `SLEPATH1`, `n` as u64, `horizon` as f64, then `n`
    /// little-endian `(x, y)` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&self.horizon.to_le_bytes())?;
        for d in &self.increments {
            w.write_all(&d.re.to_le_bytes())?;
            w.write_all(&d.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("not a driving-path dump".into()));
        }
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let n = u64::from_le_bytes(buf) as usize;
        r.read_exact(&mut buf)?;
        let horizon = f64::from_le_bytes(buf);
        let mut incs = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf)?;
            let x = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let y = f64::from_le_bytes(buf);
            incs.push(Complex64::new(x, y));
        }
        DrivingPath::from_increments(horizon, incs)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> DrivingPath {
        DrivingPath::from_increments(
            1.5,
            vec![
                Complex64::new(1.0, 2.0),
                Complex64::new(-3.0, 0.5),
                Complex64::new(0.25, -4.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        let s = validate_sigma(4.0, 1.0, 0.0).unwrap();
        assert!(!s.degenerate);
        let e = validate_sigma(1.0, 1.0, 2.0).unwrap_err();
        assert!(e.to_string().contains("c² > ab"), "{e}");
        let s = validate_sigma(4.0, 1.0, 2.0).unwrap();
        assert!(s.degenerate);
        assert!(validate_sigma(-1.0, 1.0, 0.0).unwrap_err().to_string().contains("a < 0"));
        assert!(validate_sigma(1.0, -1.0, 0.0).unwrap_err().to_string().contains("b < 0"));
        assert!(validate_sigma(f64::NAN, 1.0, 0.0).is_err());
        // c = √(ab) computed in floating point is still accepted as degenerate
        let s = validate_sigma(2.0, 3.0, 6f64.sqrt()).unwrap();
        assert!(s.degenerate);
    }

    #[test]
    fn degenerate_increments_are_proportional() {
        let s = validate_sigma(4.0, 1.0, 2.0).unwrap();
        let p = sample_driving_path(&s, 200, 2.0, SeedRecord::new(3, 0)).unwrap();
        let ratio = (1.0f64 / 4.0).sqrt();
        for d in &p.increments {
            assert_eq!(d.im, ratio * d.re);
        }
        let s = validate_sigma(4.0, 1.0, -2.0).unwrap();
        let p = sample_driving_path(&s, 50, 2.0, SeedRecord::new(3, 0)).unwrap();
        for d in &p.increments {
            assert_eq!(d.im, -ratio * d.re);
        }
    }

    #[test]
    fn axis_drivers() {
        let s = validate_sigma(0.0, 2.0, 0.0).unwrap();
        let p = sample_driving_path(&s, 64, 1.0, SeedRecord::new(1, 1)).unwrap();
        assert!(p.increments.iter().all(|d| d.re == 0.0));
        let s = validate_sigma(2.0, 0.0, 0.0).unwrap();
        let p = sample_driving_path(&s, 64, 1.0, SeedRecord::new(1, 1)).unwrap();
        assert!(p.increments.iter().all(|d| d.im == 0.0));
    }

    #[test]
    fn same_seed_bit_identical() {
        let s = validate_sigma(1.0, 2.0, 0.3).unwrap();
        let p = sample_driving_path(&s, 1000, 2.0, SeedRecord::new(11, 5)).unwrap();
        let q = sample_driving_path(&s, 1000, 2.0, SeedRecord::new(11, 5)).unwrap();
        assert_eq!(p, q);
        let r = sample_driving_path(&s, 1000, 2.0, SeedRecord::new(11, 6)).unwrap();
        assert_ne!(p.increments, r.increments);
    }

    #[test]
    fn cumulative_matches_partial_sums() {
        let p = path3();
        assert_eq!(p.cumulative[0], Complex64::new(1.0, 2.0));
        assert_eq!(p.cumulative[1], Complex64::new(-2.0, 2.5));
        assert_eq!(p.cumulative[2], Complex64::new(-1.75, -1.5));
    }

    #[test]
    fn dual_twice_negates_by_hand() {
        // (1,2),(-3,0.5),(0.25,-4)
        // dual: reversed, (y, -x): (-4,-0.25),(0.5,3),(2,-1)
        // dual again: reversed (2,-1)->(-1,-2), (0.5,3)->(3,-0.5), (-4,-0.25)->(-0.25,4)
        let p = path3();
        let d = transform_path(&p, PathTransform::Dual).unwrap();
        assert_eq!(
            d.increments,
            vec![
                Complex64::new(-4.0, -0.25),
                Complex64::new(0.5, 3.0),
                Complex64::new(2.0, -1.0)
            ]
        );
        let dd = transform_path(&d, PathTransform::Dual).unwrap();
        assert_eq!(
            dd.increments,
            vec![
                Complex64::new(-1.0, -2.0),
                Complex64::new(3.0, -0.5),
                Complex64::new(-0.25, 4.0)
            ]
        );
        let neg = transform_path(&p, PathTransform::Negate).unwrap();
        assert_eq!(dd.increments, neg.increments);
        let dddd = transform_path(&dd, PathTransform::Dual)
            .and_then(|q| transform_path(&q, PathTransform::Dual))
            .unwrap();
        assert_eq!(dddd.increments, p.increments);
    }

    #[test]
    fn transforms_preserve_n_and_horizon() {
        let p = path3();
        for op in [PathTransform::Conjugate, PathTransform::Negate, PathTransform::Dual] {
            let q = transform_path(&p, op).unwrap();
            assert_eq!(q.n(), p.n());
            assert_eq!(q.horizon, p.horizon);
        }
        let z = DrivingPath::zero(10, 2.0).unwrap();
        let s = transform_path(&z, PathTransform::Scale(2.0)).unwrap();
        assert_eq!(s.horizon, 8.0);
        assert!(s.increments.iter().all(|d| d.norm() == 0.0));
        assert!(transform_path(&z, PathTransform::Scale(0.0)).is_err());
        let cc = transform_path(&transform_path(&p, PathTransform::Conjugate).unwrap(), PathTransform::Conjugate).unwrap();
        assert_eq!(cc.increments, p.increments);
    }

    #[test]
    fn csv_and_binary_roundtrip() {
        let s = validate_sigma(1.0, 1.0, 0.0).unwrap();
        let p = sample_driving_path(&s, 17, 2.0, SeedRecord::new(2, 0)).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &["a = 1".to_string()]).unwrap();
        let q = DrivingPath::read_csv(&buf[..]).unwrap();
        assert_eq!(q.increments, p.increments);
        assert_eq!(q.horizon, p.horizon);
        let mut bin = Vec::new();
        p.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 24 + 16 * 17);
        let r = DrivingPath::read_binary(&bin[..]).unwrap();
        assert_eq!(r.increments, p.increments);
        assert!(DrivingPath::read_binary(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn preconditions() {
        let s = validate_sigma(1.0, 1.0, 0.0).unwrap();
        assert!(sample_driving_path(&s, 0, 1.0, SeedRecord::new(0, 0)).is_err());
        assert!(sample_driving_path(&s, 1, 0.0, SeedRecord::new(0, 0)).is_err());
    }
}
