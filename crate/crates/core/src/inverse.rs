//! Inverse spectral reconstruction of `u` from its singular values and (degree-zero)
//! Blaschke angles.

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{self, Dominance, SpectralData, SpectralJson};
use crate::symbol::{tail_ratio, FourierSymbol, MAX_N, TAIL_TOL};
use crate::C64;

pub const DEFAULT_RADIUS: f64 = 1.0;
const COND_LIMIT: f64 = 1e12;

/// `s₁ > s₂ > … > s_{2q} ≥ 0` with angles `ψ_n` of `Ψ_n = e^{iψ_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSpectralInput {
    s: Vec<f64>,
    angles: Vec<f64>,
}

impl InverseSpectralInput {
    pub fn new(mut s: Vec<f64>, mut angles: Vec<f64>) -> Result<Self> {
        if s.len() != angles.len() || s.is_empty() {
            return Err(Error::InvalidSymbol("need one angle per singular value".into()));
        }
        if s.len() % 2 == 1 {
            s.push(0.0);
            angles.push(0.0);
        }
        if s.windows(2).any(|w| w[0] - w[1] < 1e-10) || *s.last().unwrap() < 0.0 {
            return Err(Error::InvalidSymbol("singular values must decrease strictly".into()));
        }
        if s.iter().chain(&angles).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSymbol("non-finite spectral data".into()));
        }
        Ok(Self { s, angles })
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn q(&self) -> usize {
        self.s.len() / 2
    }

    /// Expected class `d` of the reconstructed symbol.
    pub fn class_d(&self) -> usize {
        if self.s[self.s.len() - 1] == 0.0 {
            self.s.len() - 1
        } else {
            self.s.len()
        }
    }

    /// From a simple spectrum: H-dominant values carry the angle `−φ_j`, K-dominant ones `ψ_k`.
    pub fn from_spectral(sd: &SpectralData) -> Result<Self> {
        if !sd.is_simple() {
            return Err(Error::UnsupportedMultiplicity("inverse formula needs simple singular values".into()));
        }
        let mut s = Vec::new();
        let mut a = Vec::new();
        for m in &sd.merged {
            let angle = match m.dominance {
                Dominance::H => sd.h_angles[m.h.expect("H value")].map(|p| -p),
                Dominance::K => sd.k_angles[m.k.expect("K value")],
            };
            let angle = angle.ok_or_else(|| Error::DegenerateSpectrum("vanishing projection of u".into()))?;
            s.push(m.value.sqrt());
            a.push(angle);
        }
        Self::new(s, a)
    }

    /// From the serialised spectral data (the `h` angles being the `φ_j`).
    pub fn from_json(js: &SpectralJson) -> Result<Self> {
        if js.h.iter().chain(&js.k).any(|e| e.mult != 1) {
            return Err(Error::UnsupportedMultiplicity("inverse formula needs simple singular values".into()));
        }
        let mut all: Vec<(f64, f64)> = Vec::new();
        let missing = || Error::InvalidSymbol("missing angle".into());
        for e in &js.h {
            all.push((e.val, -e.angle.ok_or_else(missing)?));
        }
        for e in &js.k {
            all.push((e.val, e.angle.ok_or_else(missing)?));
        }
        all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(all.iter().map(|p| p.0).collect(), all.iter().map(|p| p.1).collect())
    }
}

fn condition(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// `𝒞(z)` and its condition number.
pub fn c_matrix(inp: &InverseSpectralInput, z: C64) -> Result<(DMatrix<C64>, f64)> {
    let q = inp.q();
    let (s, a) = (&inp.s, &inp.angles);
    let m = DMatrix::from_fn(q, q, |j, k| {
        let (sj, sk) = (s[2 * j], s[2 * k + 1]);
        let psi = C64::from_polar(1.0, a[2 * j] + a[2 * k + 1]);
        (sj - z * sk * psi) / (sj * sj - sk * sk)
    });
    let cond = condition(&m);
    if !(cond < COND_LIMIT) {
        return Err(Error::NumericalSingularity(cond));
    }
    Ok((m, cond))
}

/// `u(z) = Σ_{j,k} [𝒞(z)⁻¹]_{jk} Ψ_{2k−1}`.
pub fn eval(inp: &InverseSpectralInput, z: C64) -> Result<C64> {
    let (m, _) = c_matrix(inp, z)?;
    let q = inp.q();
    let v = DVector::from_fn(q, |j, _| C64::from_polar(1.0, inp.angles[2 * j]));
    // Σ_j Σ_k (C⁻¹)_{jk} v_k = 1ᵀ C⁻¹ v
    let y = m.lu().solve(&v).ok_or(Error::NumericalSingularity(f64::INFINITY))?;
    Ok(y.iter().sum())
}

pub fn reconstruct(inp: &InverseSpectralInput, n: usize) -> Result<FourierSymbol> {
    reconstruct_with_radius(inp, n, DEFAULT_RADIUS)
}

/// Discrete Cauchy integral on the circle of the given radius, doubling the number of
/// nodes until the tail of the coefficient vector is resolved.
pub fn reconstruct_with_radius(inp: &InverseSpectralInput, n: usize, radius: f64) -> Result<FourierSymbol> {
    let mut m = n.max(16).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    loop {
        let mut vals = (0..m)
            .map(|k| eval(inp, C64::from_polar(radius, std::f64::consts::TAU * k as f64 / m as f64)))
            .collect::<Result<Vec<C64>>>()?;
        planner.plan_fft_forward(m).process(&mut vals);
        let coeffs: Vec<C64> = vals
            .iter()
            .enumerate()
            .map(|(k, v)| v / (m as f64 * radius.powi(k as i32)))
            .collect();
        let tail = tail_ratio(&coeffs);
        if tail <= TAIL_TOL {
            let out = FourierSymbol::new(coeffs)?;
            let (rh, rk) = hankel::numerical_ranks(&out);
            let expected = inp.class_d();
            if rh + rk != expected {
                return Err(Error::RankMismatch { expected, found: rh + rk });
            }
            return Ok(out);
        }
        if m >= MAX_N {
            return Err(Error::TailNotResolved { n: m, tail });
        }
        m *= 2;
    }
}

/// Relative L² distance between `u` and the reconstruction from its own spectral data.
pub fn roundtrip(u: &FourierSymbol) -> Result<f64> {
    let sd = hankel::spectrum(u)?;
    if !sd.is_simple() {
        return Err(Error::DegenerateSpectrum("roundtrip needs a simple spectrum".into()));
    }
    let inp = InverseSpectralInput::from_spectral(&sd)?;
    let v = reconstruct(&inp, u.len())?;
    let n = u.len().max(v.len());
    let (a, b) = (u.resized(n), v.resized(n));
    let err: f64 = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok(err.sqrt() / u.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{rational_to_fourier_auto, RationalSymbol};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_c_matrices() {
        let inp = InverseSpectralInput::new(vec![2.0, 0.5], vec![0.3, -1.0]).unwrap();
        let (m, _) = c_matrix(&inp, c(0.0, 0.0)).unwrap();
        assert!((m[(0, 0)] - c(2.0 / 3.75, 0.0)).norm() < 1e-15);
        let inp = InverseSpectralInput::new(vec![2.0], vec![0.3]).unwrap();
        let (m, _) = c_matrix(&inp, c(0.0, 0.0)).unwrap();
        assert!((m[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let inp = InverseSpectralInput::new(vec![3.0, 2.0, 1.0, 0.5], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (_, cond) = c_matrix(&inp, c(0.3, 0.0)).unwrap();
        assert!(cond < 1e6);
    }

    #[test]
    fn constant_symbol() {
        let inp = InverseSpectralInput::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let u = reconstruct(&inp, 16).unwrap();
        assert!((u.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(u.coeffs()[1..].iter().all(|z| z.norm() < 1e-14));
        assert!(roundtrip(&FourierSymbol::constant(c(0.3, -0.7), 16)).unwrap() < 1e-12);
    }

    #[test]
    fn example_roundtrip_and_scaling() {
        let u = rational_to_fourier_auto(&RationalSymbol::double_pole(c(0.5, 0.0))).unwrap();
        assert!(roundtrip(&u).unwrap() < 1e-8);
        let sd = hankel::spectrum(&u).unwrap();
        let inp = InverseSpectralInput::from_spectral(&sd).unwrap();
        let v = reconstruct(&inp, u.len()).unwrap();
        let sd2 = hankel::spectrum(&v).unwrap();
        for (a, b) in sd.merged.iter().zip(&sd2.merged) {
            assert!((a.value - b.value).abs() < 1e-8 * a.value);
        }
        let scaled = InverseSpectralInput::new(inp.s().iter().map(|s| 3.0 * s).collect(), inp.angles().to_vec()).unwrap();
        let w = reconstruct(&scaled, u.len()).unwrap();
        for (a, b) in w.coeffs().iter().zip(v.coeffs()) {
            assert!((a - 3.0 * b).norm() < 1e-10);
        }
    }
}
