//! Hankel operators `H_u h = Π(u h̄)` and `K_u = H_{S*u}`, their spectra, dominance
//! classification, eigenprojections and Blaschke angles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, HankelSvd, RANK_FLOOR};
use crate::symbol::{dot, FourierSymbol};
use crate::{conv, C64};

pub const GROUP_TOL: f64 = 1e-8;
/// Projections smaller than this (relative to ‖u‖) are treated as vanishing.
pub const PROJ_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dominance {
    H,
    K,
}

/// One eigenvalue of `H_u²` or `K_u²` with an orthonormal basis of its eigenspace.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub value: f64,
    pub mult: usize,
    pub basis: Vec<Vec<C64>>,
}

/// A distinct singular value `s` (stored squared) with its H and K groups, if present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedValue {
    pub value: f64,
    pub h: Option<usize>,
    pub k: Option<usize>,
    pub dominance: Dominance,
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    pub h_eigs: Vec<EigenGroup>,
    pub k_eigs: Vec<EigenGroup>,
    pub merged: Vec<MergedValue>,
    pub dominance: Vec<Dominance>,
    /// φ_j for simple H-dominant values (indexed like `h_eigs`).
    pub h_angles: Vec<Option<f64>>,
    /// ψ_k for simple K-dominant values (indexed like `k_eigs`).
    pub k_angles: Vec<Option<f64>>,
    pub kernel_dim_hint: usize,
    pub(crate) h_svd: HankelSvd,
    pub(crate) k_svd: HankelSvd,
}

impl SpectralData {
    pub fn rho2(&self) -> Vec<f64> {
        self.h_eigs.iter().map(|g| g.value).collect()
    }

    pub fn sigma2(&self) -> Vec<f64> {
        self.k_eigs.iter().map(|g| g.value).collect()
    }

    pub fn rank_h(&self) -> usize {
        self.h_svd.rank()
    }

    pub fn rank_k(&self) -> usize {
        self.k_svd.rank()
    }

    pub fn is_simple(&self) -> bool {
        self.h_eigs.iter().chain(&self.k_eigs).all(|g| g.mult == 1)
            && self.merged.iter().all(|m| m.h.is_none() || m.k.is_none())
    }

    /// Dominance of the `k`-th K-eigenvalue.
    pub fn k_dominance(&self, k: usize) -> Dominance {
        self.merged.iter().find(|m| m.k == Some(k)).map(|m| m.dominance).unwrap_or(Dominance::K)
    }

    /// Singular values in the serialisation format (`val` is the singular value `s`).
    pub fn to_json(&self) -> SpectralJson {
        let entry = |g: &EigenGroup, a: Option<f64>| SpectralEntry { val: g.value.sqrt(), mult: g.mult, angle: a };
        SpectralJson {
            h: self.h_eigs.iter().zip(&self.h_angles).map(|(g, a)| entry(g, *a)).collect(),
            k: self.k_eigs.iter().zip(&self.k_angles).map(|(g, a)| entry(g, *a)).collect(),
            dominance: self.dominance.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEntry {
    pub val: f64,
    pub mult: usize,
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralJson {
    pub h: Vec<SpectralEntry>,
    pub k: Vec<SpectralEntry>,
    pub dominance: Vec<Dominance>,
}

#[derive(Debug, Clone)]
pub struct Projections {
    /// `u_k^K` per K-eigenvalue.
    pub u_k: Vec<Vec<C64>>,
    /// `w_k^K`, projections of `Π(|u|²)`.
    pub w_k: Vec<Vec<C64>>,
    pub u_inf: Vec<C64>,
    pub w_inf: Vec<C64>,
    /// `u_j^H` per H-eigenvalue.
    pub u_j: Vec<Vec<C64>>,
}

pub(crate) fn shifted_coeffs(u: &[C64]) -> Vec<C64> {
    let mut c = u[1.min(u.len())..].to_vec();
    c.push(C64::new(0.0, 0.0));
    c.truncate(u.len());
    c
}

/// Dense matrix of `H_u²`.
pub fn hankel_square(u: &FourierSymbol) -> DMatrix<C64> {
    let a = linalg::hankel_matrix(u.coeffs());
    &a * a.adjoint()
}

/// Dense matrix of `K_u²`.
pub fn shifted_square(u: &FourierSymbol) -> DMatrix<C64> {
    let b = linalg::hankel_matrix(&shifted_coeffs(u.coeffs()));
    &b * b.adjoint()
}

/// `H_u h = Π(u h̄)`.
pub fn apply_hankel(u: &FourierSymbol, h: &FourierSymbol) -> Result<FourierSymbol> {
    if u.len() != h.len() {
        return Err(Error::DimensionMismatch(u.len(), h.len()));
    }
    Ok(FourierSymbol::from_vec_unchecked(conv::correlate(u.coeffs(), h.coeffs())))
}

/// `K_u h = Π(S*u h̄)`.
pub fn apply_shifted(u: &FourierSymbol, h: &FourierSymbol) -> Result<FourierSymbol> {
    if u.len() != h.len() {
        return Err(Error::DimensionMismatch(u.len(), h.len()));
    }
    Ok(FourierSymbol::from_vec_unchecked(conv::correlate(&shifted_coeffs(u.coeffs()), h.coeffs())))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn group(svd: &HankelSvd, tol: f64) -> Result<Vec<EigenGroup>> {
    let mut groups: Vec<EigenGroup> = Vec::new();
    for (s, e) in svd.values.iter().zip(&svd.vectors) {
        let lam = s * s;
        if let Some(last) = groups.last_mut() {
            let prev = last.value;
            let gap = relative_gap(prev, lam);
            if gap < tol {
                last.value = (prev * last.mult as f64 + lam) / (last.mult + 1) as f64;
                last.mult += 1;
                last.basis.push(e.clone());
                continue;
            }
            if gap < 10.0 * tol {
                return Err(Error::AmbiguousGrouping(gap));
            }
        }
        groups.push(EigenGroup { value: lam, mult: 1, basis: vec![e.clone()] });
    }
    Ok(groups)
}

fn project(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for e in basis {
        let c = dot(v, e);
        for (o, x) in out.iter_mut().zip(e) {
            *o += c * x;
        }
    }
    out
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `arg((T e|e))` for the antilinear Hankel operator with coefficients `c`, along the direction of `p`.
fn angle_along(c: &[C64], p: &[C64], scale: f64) -> Option<f64> {
    let n = norm(p);
    if n <= PROJ_FLOOR * scale {
        return None;
    }
    let e: Vec<C64> = p.iter().map(|z| z / n).collect();
    let te = conv::correlate(c, &e);
    Some(dot(&te, &e).arg())
}

/// Spectral data of `H_u²` and `K_u²` with the default grouping tolerance.
pub fn spectrum(u: &FourierSymbol) -> Result<SpectralData> {
    singular_spectrum(u, GROUP_TOL)
}

pub fn singular_spectrum(u: &FourierSymbol, group_tol: f64) -> Result<SpectralData> {
    if u.is_zero() {
        return Err(Error::ZeroSymbol);
    }
    let c = u.coeffs();
    let kc = shifted_coeffs(c);
    let h_svd = linalg::hankel_svd(c, RANK_FLOOR);
    let mut k_svd = linalg::hankel_svd(&kc, RANK_FLOOR);
    // Both operators share the scale of H_u for the rank floor.
    let rho1 = h_svd.values[0];
    let keep = k_svd.values.iter().take_while(|s| **s > RANK_FLOOR * rho1).count();
    k_svd.values.truncate(keep);
    k_svd.vectors.truncate(keep);

    let h_eigs = group(&h_svd, group_tol)?;
    let k_eigs = group(&k_svd, group_tol)?;

    let mut merged: Vec<MergedValue> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < h_eigs.len() || j < k_eigs.len() {
        let hv = h_eigs.get(i).map(|g| g.value);
        let kv = k_eigs.get(j).map(|g| g.value);
        let (value, h, k) = match (hv, kv) {
            (Some(a), Some(b)) => {
                let gap = relative_gap(a, b);
                if gap < group_tol {
                    i += 1;
                    j += 1;
                    (0.5 * (a + b), Some(i - 1), Some(j - 1))
                } else if gap < 10.0 * group_tol {
                    return Err(Error::AmbiguousGrouping(gap));
                } else if a > b {
                    i += 1;
                    (a, Some(i - 1), None)
                } else {
                    j += 1;
                    (b, None, Some(j - 1))
                }
            }
            (Some(a), None) => {
                i += 1;
                (a, Some(i - 1), None)
            }
            (None, Some(b)) => {
                j += 1;
                (b, None, Some(j - 1))
            }
            (None, None) => unreachable!(),
        };
        let de = h.map(|x| h_eigs[x].mult).unwrap_or(0);
        let df = k.map(|x| k_eigs[x].mult).unwrap_or(0);
        let dominance = if de == df + 1 {
            Dominance::H
        } else if df == de + 1 {
            Dominance::K
        } else if de == df {
            return Err(Error::AmbiguousGrouping(0.0));
        } else {
            return Err(Error::DegenerateSpectrum(format!("dim E = {de}, dim F = {df} at s^2 = {value}")));
        };
        merged.push(MergedValue { value, h, k, dominance });
    }

    let scale = u.norm();
    let h_angles = h_eigs
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let dominant = merged.iter().any(|m| m.h == Some(idx) && m.k.is_none());
            if g.mult == 1 && dominant {
                angle_along(c, &project(c, &g.basis), scale)
            } else {
                None
            }
        })
        .collect();
    let k_angles = k_eigs
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let dominant = merged.iter().any(|m| m.k == Some(idx) && m.h.is_none());
            if g.mult == 1 && dominant {
                angle_along(&kc, &project(c, &g.basis), scale)
            } else {
                None
            }
        })
        .collect();
    let dominance = merged.iter().map(|m| m.dominance).collect();
    Ok(SpectralData {
        kernel_dim_hint: u.len() - k_svd.rank(),
        h_eigs,
        k_eigs,
        merged,
        dominance,
        h_angles,
        k_angles,
        h_svd,
        k_svd,
    })
}

pub fn eigen_projections(u: &FourierSymbol, sd: &SpectralData) -> Projections {
    let c = u.coeffs();
    let w = conv::correlate(c, c);
    let u_k: Vec<Vec<C64>> = sd.k_eigs.iter().map(|g| project(c, &g.basis)).collect();
    let w_k: Vec<Vec<C64>> = sd.k_eigs.iter().map(|g| project(&w, &g.basis)).collect();
    let residual = |v: &[C64], parts: &[Vec<C64>]| {
        let mut r = v.to_vec();
        for p in parts {
            for (a, b) in r.iter_mut().zip(p) {
                *a -= b;
            }
        }
        r
    };
    Projections {
        u_inf: residual(c, &u_k),
        w_inf: residual(&w, &w_k),
        u_j: sd.h_eigs.iter().map(|g| project(c, &g.basis)).collect(),
        u_k,
        w_k,
    }
}

/// Numerical ranks of `H_u` and `K_u`.
pub fn numerical_ranks(u: &FourierSymbol) -> (usize, usize) {
    if u.is_zero() {
        return (0, 0);
    }
    let h = linalg::hankel_svd(u.coeffs(), RANK_FLOOR);
    let k = linalg::hankel_svd(&shifted_coeffs(u.coeffs()), RANK_FLOOR);
    let rho1 = h.values[0];
    (h.rank(), k.values.iter().filter(|s| **s > RANK_FLOOR * rho1).count())
}

/// Largest relative deviation between projected norms and the closed-form products.
pub fn norm_formula_check(u: &FourierSymbol, sd: &SpectralData) -> Result<f64> {
    if !sd.is_simple() {
        return Err(Error::DegenerateSpectrum("norm formulas need simple singular values".into()));
    }
    let proj = eigen_projections(u, sd);
    // H-dominant values s with σ(s) the next K-dominant value below, or 0.
    let hs: Vec<(usize, f64)> = sd
        .merged
        .iter()
        .filter(|m| m.dominance == Dominance::H)
        .map(|m| (m.h.expect("H-dominant"), m.value))
        .collect();
    let sigma_of = |s2: f64| -> (Option<usize>, f64) {
        sd.merged
            .iter()
            .filter(|m| m.dominance == Dominance::K && m.value < s2)
            .map(|m| (m.k, m.value))
            .next()
            .unwrap_or((None, 0.0))
    };
    let mut worst: f64 = 0.0;
    let q = u.norm_sq();
    for &(hj, s2) in &hs {
        let (kk, sg2) = sigma_of(s2);
        let mut ph = s2 - sg2;
        let mut pk = s2 - sg2;
        for &(_, t2) in hs.iter().filter(|(h, _)| *h != hj) {
            let (_, tg2) = sigma_of(t2);
            ph *= (s2 - tg2) / (s2 - t2);
            pk *= (sg2 - t2) / (sg2 - tg2);
        }
        let nh = norm(&proj.u_j[hj]).powi(2);
        worst = worst.max((nh - ph).abs() / q);
        if let Some(k) = kk {
            let nk = norm(&proj.u_k[k]).powi(2);
            worst = worst.max((nk - pk).abs() / q);
        }
    }
    Ok(worst)
}

/// Checks `ρ₁² ≥ σ₁² ≥ ρ₂² ≥ …` with no two consecutive equalities; returns the smallest
/// signed relative gap along the chain.
pub fn interlacement_check(sd: &SpectralData) -> (bool, f64) {
    let rho = sd.rho2();
    let sig = sd.sigma2();
    if sig.len() > rho.len() {
        return (false, f64::NEG_INFINITY);
    }
    let mut chain = Vec::new();
    for j in 0..rho.len() {
        chain.push(rho[j]);
        if j < sig.len() {
            chain.push(sig[j]);
        }
    }
    let mut worst = f64::INFINITY;
    let mut ok = true;
    let mut prev_equal = false;
    for w in chain.windows(2) {
        let gap = (w[0] - w[1]) / w[0].abs().max(w[1].abs());
        worst = worst.min(gap);
        let equal = gap.abs() < GROUP_TOL;
        if gap < -GROUP_TOL || (equal && prev_equal) {
            ok = false;
        }
        prev_equal = equal;
    }
    (ok, if worst.is_finite() { worst } else { 0.0 })
}

/// The merged list alternates H, K, H, K, … starting with H.
pub fn alternation_check(sd: &SpectralData) -> bool {
    sd.dominance
        .iter()
        .enumerate()
        .all(|(i, d)| *d == if i % 2 == 0 { Dominance::H } else { Dominance::K })
}

/// `max |H_u² − K_u² − (·|u)u| / Q` over matrix entries.
pub fn rank_one_residual(u: &FourierSymbol) -> f64 {
    let q = u.norm_sq();
    if q == 0.0 {
        return 0.0;
    }
    let c = DMatrix::from_column_slice(u.len(), 1, u.coeffs());
    let d = hankel_square(u) - shifted_square(u) - &c * c.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max) / q
}

/// `|tr H_u² − (Q + M)| / (Q + M)`.
pub fn trace_residual(u: &FourierSymbol) -> f64 {
    let qm: f64 = u.coeffs().iter().enumerate().map(|(n, z)| (n + 1) as f64 * z.norm_sqr()).sum();
    if qm == 0.0 {
        return 0.0;
    }
    let svd = linalg::hankel_svd(u.coeffs(), RANK_FLOOR);
    let tr: f64 = svd.values.iter().map(|s| s * s).sum();
    (tr - qm).abs() / qm
}
