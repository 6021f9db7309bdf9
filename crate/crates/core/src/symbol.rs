//! Hardy-space symbols: truncated Fourier vectors and rational functions `A/B`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{conv, poly, C64};

pub const TAIL_TOL: f64 = 1e-24;
pub const DEFAULT_N: usize = 128;
pub const MAX_N: usize = 2048;
pub const ROOT_MARGIN: f64 = 1e-9;
const TAIL_WINDOW: usize = 8;

/// Coefficients `û(0..N)` of a function in L²₊, truncated at `N = len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSymbol {
    coeffs: Vec<C64>,
}

impl FourierSymbol {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSymbol("empty coefficient vector".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSymbol("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![C64::new(0.0, 0.0); n.max(1)] }
    }

    /// `c·1` padded to length `n`.
    pub fn constant(c: C64, n: usize) -> Self {
        let mut s = Self::zeros(n);
        s.coeffs[0] = c;
        s
    }

    pub fn from_slice(c: &[C64], n: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n.max(1)];
        for (dst, src) in coeffs.iter_mut().zip(c) {
            *dst = *src;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn trunc_dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Zero-pad or truncate to `n` coefficients.
    pub fn resized(&self, n: usize) -> Self {
        Self::from_slice(&self.coeffs, n)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// `u(e^{iα} z)`.
    pub fn rotated(&self, alpha: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, x)| x * C64::from_polar(1.0, alpha * n as f64))
                .collect(),
        }
    }

    /// Relative squared mass carried by the last eight coefficients.
    pub fn tail_ratio(&self) -> f64 {
        tail_ratio(&self.coeffs)
    }

    /// Value `u(z)` of the truncated series.
    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.coeffs, z)
    }
}

pub(crate) fn tail_ratio(c: &[C64]) -> f64 {
    let total: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let start = c.len().saturating_sub(TAIL_WINDOW);
    c[start..].iter().map(|x| x.norm_sqr()).sum::<f64>() / total
}

/// Rational symbol `A/B` with `B(0) = 1`, an element of 𝒱(d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalSymbol {
    num: Vec<C64>,
    den: Vec<C64>,
    class_d: usize,
}

impl RationalSymbol {
    /// Validates coprimality, pole location and the degree constraints, and infers `d`.
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSymbol("non-finite coefficient".into()));
        }
        let den = poly::trim(&den, 1e-14);
        if den.is_empty() || den[0].norm() == 0.0 {
            return Err(Error::InvalidSymbol("B(0) must be nonzero".into()));
        }
        let b0 = den[0];
        let den: Vec<C64> = den.iter().map(|c| c / b0).collect();
        let num: Vec<C64> = poly::trim(&num, 1e-14).iter().map(|c| c / b0).collect();

        let poles = poly::roots(&den);
        for p in &poles {
            if p.norm() <= 1.0 + ROOT_MARGIN {
                return Err(Error::PoleInsideDisc(p.norm()));
            }
        }
        if num.is_empty() {
            return Ok(Self { num: vec![C64::new(0.0, 0.0)], den: vec![C64::new(1.0, 0.0)], class_d: 0 });
        }
        // Multiple poles are only located to ~sqrt(eps), so test A at the poles instead of
        // comparing root positions.
        for p in &poles {
            let size: f64 = num.iter().enumerate().map(|(k, a)| a.norm() * p.norm().powi(k as i32)).sum();
            if poly::eval(&num, *p).norm() < 1e-7 * size {
                return Err(Error::InvalidSymbol(format!("A and B share the root {p}")));
            }
        }
        let deg_a = num.len() - 1;
        let deg_b = den.len() - 1;
        let class_d = (2 * deg_b).max(2 * deg_a + 1);
        Ok(Self { num, den, class_d })
    }

    pub fn num(&self) -> &[C64] {
        &self.num
    }

    pub fn den(&self) -> &[C64] {
        &self.den
    }

    pub fn class_d(&self) -> usize {
        self.class_d
    }

    /// Roots of `B` (the poles, all outside the closed disc).
    pub fn poles(&self) -> Vec<C64> {
        poly::roots(&self.den)
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    /// `z/(1 − p z)²`, the basic 𝒱(4) example.
    pub fn double_pole(p: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new(vec![C64::new(0.0, 0.0), one], poly::from_inverse_roots(&[p, p])).expect("|p| < 1")
    }

    /// `b + c z/(1 − p z)` in 𝒱(3).
    pub fn v3(b: C64, c: C64, p: C64) -> Result<Self> {
        Self::new(vec![b, c - b * p], vec![C64::new(1.0, 0.0), -p])
    }
}

/// Sobolev exponent `s ≥ 0` with weight `(1+n²)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidSymbol(format!("Sobolev index {s} must be >= 0")));
        }
        Ok(Self(s))
    }

    pub fn s(&self) -> f64 {
        self.0
    }
}

/// Taylor coefficients of `A/B` at 0 by the linear recurrence, without tail control.
pub fn taylor_coefficients(r: &RationalSymbol, n: usize) -> Vec<C64> {
    let mut u = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut v = r.num.get(k).copied().unwrap_or_default();
        for m in 1..r.den.len().min(k + 1) {
            v -= r.den[m] * u[k - m];
        }
        u[k] = v;
    }
    u
}

pub fn rational_to_fourier(r: &RationalSymbol, n: usize) -> Result<FourierSymbol> {
    if n < r.num.len() {
        return Err(Error::DimensionMismatch(n, r.num.len()));
    }
    let u = taylor_coefficients(r, n);
    let tail = tail_ratio(&u);
    if tail > TAIL_TOL {
        return Err(Error::TailNotResolved { n, tail });
    }
    Ok(FourierSymbol { coeffs: u })
}

/// Expansion with the default truncation policy: start at 128, double up to 2048.
pub fn rational_to_fourier_auto(r: &RationalSymbol) -> Result<FourierSymbol> {
    rational_to_fourier_from(r, DEFAULT_N)
}

pub fn rational_to_fourier_from(r: &RationalSymbol, n0: usize) -> Result<FourierSymbol> {
    let mut n = n0.max(r.num.len()).max(16);
    loop {
        match rational_to_fourier(r, n) {
            Err(Error::TailNotResolved { .. }) if n < MAX_N => n = (2 * n).min(MAX_N),
            other => return other,
        }
    }
}

fn check_dims(u: &FourierSymbol, v: &FourierSymbol) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    Ok(())
}

/// `Π(u v̄)`.
pub fn szego_project_product(u: &FourierSymbol, v: &FourierSymbol) -> Result<FourierSymbol> {
    check_dims(u, v)?;
    Ok(FourierSymbol { coeffs: conv::correlate(&u.coeffs, &v.coeffs) })
}

/// `(u|v) = Σ û(n) conj(v̂(n))`.
pub fn inner(u: &FourierSymbol, v: &FourierSymbol) -> Result<C64> {
    check_dims(u, v)?;
    Ok(dot(&u.coeffs, &v.coeffs))
}

pub(crate) fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

pub fn sobolev_norm_sq(u: &FourierSymbol, s: SobolevIndex) -> f64 {
    u.coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| (1.0 + (n * n) as f64).powf(s.0) * c.norm_sqr())
        .sum()
}

/// Recovers `(A, B)` from the coefficients of a 𝒱(d) symbol by linear prediction.
pub fn fit_rational(u: &FourierSymbol, d: usize) -> Result<RationalSymbol> {
    let nb = d / 2;
    let deg_a = if d.is_multiple_of(2) { nb.saturating_sub(1) } else { nb };
    let c = &u.coeffs;
    if u.is_zero() || d == 0 {
        if !u.is_zero() {
            return Err(Error::RankMismatch { expected: 0, found: 1 });
        }
        return RationalSymbol::new(vec![], vec![C64::new(1.0, 0.0)]);
    }
    let row0 = if d.is_multiple_of(2) { nb } else { nb + 1 };
    let rows = (nb + 9).min(c.len().saturating_sub(row0));
    if rows < nb + 1 {
        return Err(Error::DimensionMismatch(c.len(), row0 + nb + 1));
    }
    let h = DMatrix::from_fn(rows, nb + 1, |i, m| c[row0 + i - m]);
    let scale = u.norm();
    let sv = h.clone().svd(false, false).singular_values;
    // The full prediction matrix must have a null vector, otherwise u is not in the class.
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin > 1e-8 * scale {
        return Err(Error::RankMismatch { expected: nb, found: nb + 1 });
    }
    let mut den = vec![C64::new(1.0, 0.0)];
    if nb > 0 {
        let a = h.columns(1, nb).into_owned();
        let rhs = -h.column(0).into_owned();
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let sol: DVector<C64> = svd
            .solve(&rhs, 1e-10 * smax.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::InvalidSymbol(e.to_string()))?;
        den.extend(sol.iter());
    }
    let prod = conv::convolve(&den, c, deg_a + 1);
    let num = poly::trim(&prod, 1e-13);
    let den = poly::trim(&den, 1e-13);
    RationalSymbol::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn double_pole_expansion() {
        let r = RationalSymbol::double_pole(c(0.5, 0.0));
        assert_eq!(r.class_d(), 4);
        let u = taylor_coefficients(&r, 6);
        let expect = [0.0, 1.0, 1.0, 0.75, 0.5, 0.3125];
        for (a, b) in u.iter().zip(expect) {
            assert!((a - c(b, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(rational_to_fourier(&r, 6), Err(Error::TailNotResolved { .. })));
    }

    #[test]
    fn trivial_expansions() {
        let one = RationalSymbol::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(one.class_d(), 1);
        let u = rational_to_fourier(&one, 16).unwrap();
        assert_eq!(u.coeffs()[0], c(1.0, 0.0));
        assert!(u.coeffs()[1..].iter().all(|x| x.norm() == 0.0));
        let mono = RationalSymbol::new(vec![c(0.0, 0.0), c(2.0, -1.0)], vec![c(1.0, 0.0)]).unwrap();
        let u = rational_to_fourier(&mono, 16).unwrap();
        assert_eq!(u.coeffs()[1], c(2.0, -1.0));
        assert_eq!(mono.class_d(), 3);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            RationalSymbol::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(-1.0, 0.0)]),
            Err(Error::PoleInsideDisc(_))
        ));
        // (1 - z/2) / (1 - z/2)^2 has a common root.
        let b = poly::from_inverse_roots(&[c(0.5, 0.0), c(0.5, 0.0)]);
        assert!(matches!(
            RationalSymbol::new(vec![c(1.0, 0.0), c(-0.5, 0.0)], b),
            Err(Error::InvalidSymbol(_))
        ));
    }

    #[test]
    fn projector_and_inner() {
        let z = FourierSymbol::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = szego_project_product(&z, &z).unwrap();
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let (b, cc) = (c(0.3, -1.0), c(2.0, 0.5));
        let u = FourierSymbol::new(vec![b, cc]).unwrap();
        let p = szego_project_product(&u, &u).unwrap();
        assert!((p.coeffs()[0] - (b.norm_sqr() + cc.norm_sqr())).norm() < 1e-14);
        // Coefficient of e^{ix} in |b + c e^{ix}|² is c·conj(b).
        assert!((p.coeffs()[1] - cc * b.conj()).norm() < 1e-14);
        let zero = FourierSymbol::zeros(2);
        assert!(szego_project_product(&u, &zero).unwrap().is_zero());
        let a = FourierSymbol::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let bb = FourierSymbol::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(inner(&a, &bb).unwrap(), c(0.0, 0.0));
        assert_eq!(inner(&z, &z).unwrap(), c(1.0, 0.0));
        assert!(matches!(inner(&a, &FourierSymbol::zeros(3)), Err(Error::DimensionMismatch(2, 3))));

        let u = rational_to_fourier(&RationalSymbol::double_pole(c(0.5, 0.0)), 64).unwrap();
        let q = inner(&u, &u).unwrap().re;
        assert!((q - 80.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norms() {
        let z = FourierSymbol::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(sobolev_norm_sq(&z, SobolevIndex::new(1.0).unwrap()), 2.0);
        let r = RationalSymbol::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(-0.9, 0.0)]).unwrap();
        let u = rational_to_fourier_auto(&r).unwrap();
        let s0 = sobolev_norm_sq(&u, SobolevIndex::new(0.0).unwrap());
        assert!((s0 - u.norm_sq()).abs() < 1e-14);
        let exact: f64 = (0..u.len()).map(|j| 0.81f64.powi(j as i32) * (1.0 + (j * j) as f64)).sum();
        let got = sobolev_norm_sq(&u, SobolevIndex::new(1.0).unwrap());
        assert!((got - exact).abs() < 1e-10 * exact);
        assert!(SobolevIndex::new(-1.0).is_err());
    }

    #[test]
    fn fit_roundtrips() {
        let r = RationalSymbol::double_pole(c(0.5, 0.0));
        let u = rational_to_fourier_auto(&r).unwrap();
        let f = fit_rational(&u, 4).unwrap();
        for (a, b) in f.den().iter().zip(r.den()) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!((f.num()[1] - c(1.0, 0.0)).norm() < 1e-8);
        assert!(f.num()[0].norm() < 1e-8);

        let u = FourierSymbol::constant(c(0.4, 0.2), 32);
        let f = fit_rational(&u, 1).unwrap();
        assert_eq!(f.den(), &[c(1.0, 0.0)]);
        assert!((f.num()[0] - c(0.4, 0.2)).norm() < 1e-14);

        let v3 = RationalSymbol::v3(c(0.5, 0.1), c(1.0, -0.3), c(0.4, 0.3)).unwrap();
        let u = rational_to_fourier_auto(&v3).unwrap();
        let f = fit_rational(&u, 3).unwrap();
        for (a, b) in f.num().iter().zip(v3.num()).chain(f.den().iter().zip(v3.den())) {
            assert!((a - b).norm() < 1e-8);
        }
        assert!(matches!(fit_rational(&u, 2), Err(Error::RankMismatch { .. })));
    }
}
