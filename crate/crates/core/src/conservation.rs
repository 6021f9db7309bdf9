//! Conserved quantities `Q, M, J, 𝓗, ℓ_k, ℓ_∞`, the generating-series functionals and
//! the identity suites that tie them together.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{self, Dominance, Projections, SpectralData, PROJ_FLOOR};
use crate::linalg::{self, HankelSvd};
use crate::symbol::{dot, FourierSymbol};
use crate::{conv, C64};

pub const RESONANCE_MARGIN: f64 = 1e-6;

pub fn mass(u: &FourierSymbol) -> f64 {
    u.norm_sq()
}

pub fn momentum(u: &FourierSymbol) -> f64 {
    u.coeffs().iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
}

/// `J = ∫|u|²u = (u²|u)`.
pub fn j_factor(u: &FourierSymbol) -> C64 {
    let c = u.coeffs();
    dot(&conv::convolve(c, c, c.len()), c)
}

pub fn hamiltonian(u: &FourierSymbol) -> f64 {
    0.5 * j_factor(u).norm_sqr()
}

/// `Π(|u|²) = H_u(u)`.
pub(crate) fn w_of(c: &[C64]) -> Vec<C64> {
    conv::correlate(c, c)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `Σℓ_k + ℓ_∞ − Q²`.
    pub sum_ell: f64,
    /// `Σ(Q+σ_k²)ℓ_k + Qℓ_∞ − |J|²`.
    pub weighted_ell: f64,
    /// `M − Σσ_k² dim F`.
    pub momentum: f64,
    /// Both expressions of `ℓ_∞`.
    pub ell_inf: f64,
    /// `J̄ − Σ (w_k|u_k)`.
    pub jbar: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.sum_ell, self.weighted_ell, self.momentum, self.ell_inf, self.jbar]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub q: f64,
    pub m: f64,
    pub j: C64,
    pub hamiltonian: f64,
    /// `(σ_k², ℓ_k)` in decreasing σ order.
    pub ells: Vec<(f64, f64)>,
    pub ell_inf: f64,
    /// `ℓ_∞` through `‖u_∞‖²(2Q − |(u|1)|²)`.
    pub ell_inf_kernel: f64,
    /// `ξ_k` with `w_k^K = ξ_k u_k^K`, for simple K-dominant values with a non-vanishing projection.
    pub xis: Vec<Option<C64>>,
    pub u_norms2: Vec<f64>,
    /// `(w_k^K | u_k^K)`.
    pub wu: Vec<C64>,
    pub psis: Vec<Option<f64>>,
    pub dominance: Vec<Dominance>,
    pub residuals: IdentityResiduals,
}

impl ConservationReport {
    pub fn sigma2(&self) -> Vec<f64> {
        self.ells.iter().map(|e| e.0).collect()
    }

    pub fn ell(&self) -> Vec<f64> {
        self.ells.iter().map(|e| e.1).collect()
    }

    /// Report of the zero symbol.
    pub fn zero() -> Self {
        Self {
            q: 0.0,
            m: 0.0,
            j: C64::new(0.0, 0.0),
            hamiltonian: 0.0,
            ells: vec![],
            ell_inf: 0.0,
            ell_inf_kernel: 0.0,
            xis: vec![],
            u_norms2: vec![],
            wu: vec![],
            psis: vec![],
            dominance: vec![],
            residuals: IdentityResiduals::default(),
        }
    }
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn ell(u: &FourierSymbol, sd: &SpectralData, proj: &Projections) -> Result<ConservationReport> {
    let n = u.len();
    if proj.u_k.len() != sd.k_eigs.len()
        || proj.w_k.len() != sd.k_eigs.len()
        || proj.u_inf.len() != n
        || proj.u_k.iter().chain(&proj.w_k).any(|v| v.len() != n)
    {
        return Err(Error::InconsistentInputs("projections do not match the spectral data".into()));
    }
    let q = mass(u);
    let m = momentum(u);
    let j = j_factor(u);
    let scale = q.sqrt();
    let mut ells = Vec::new();
    let mut xis = Vec::new();
    let mut u_norms2 = Vec::new();
    let mut wu = Vec::new();
    let mut psis = Vec::new();
    let mut dominance = Vec::new();
    for (k, g) in sd.k_eigs.iter().enumerate() {
        let un = norm2(&proj.u_k[k]);
        let wn = norm2(&proj.w_k[k]);
        ells.push((g.value, (2.0 * q + g.value) * un - wn));
        let inner = dot(&proj.w_k[k], &proj.u_k[k]);
        let dom = sd.k_dominance(k);
        let visible = un.sqrt() > PROJ_FLOOR * scale && g.mult == 1 && dom == Dominance::K;
        xis.push(visible.then(|| inner / un));
        u_norms2.push(un);
        wu.push(inner);
        psis.push(if visible { sd.k_angles[k] } else { None });
        dominance.push(dom);
    }
    let ui = norm2(&proj.u_inf);
    let ell_inf = 2.0 * q * ui - norm2(&proj.w_inf);
    let ell_inf_kernel = ui * (2.0 * q - u.coeffs()[0].norm_sqr());

    let sum: f64 = ells.iter().map(|e| e.1).sum::<f64>() + ell_inf;
    let weighted: f64 = ells.iter().map(|e| (q + e.0) * e.1).sum::<f64>() + q * ell_inf;
    let msum: f64 = sd.k_eigs.iter().map(|g| g.value * g.mult as f64).sum();
    let jbar_sum: C64 = wu.iter().sum::<C64>() + dot(&proj.w_inf, &proj.u_inf);
    let residuals = IdentityResiduals {
        sum_ell: (sum - q * q).abs() / (q * q).max(1.0),
        weighted_ell: (weighted - j.norm_sqr()).abs() / j.norm_sqr().max(q.powi(3)).max(1.0),
        momentum: (m - msum).abs() / m.max(1.0),
        ell_inf: (ell_inf - ell_inf_kernel).abs() / (q * q).max(1.0),
        jbar: (j.conj() - jbar_sum).norm() / j.norm().max(1.0),
    };
    Ok(ConservationReport {
        q,
        m,
        j,
        hamiltonian: 0.5 * j.norm_sqr(),
        ells,
        ell_inf,
        ell_inf_kernel,
        xis,
        u_norms2,
        wu,
        psis,
        dominance,
        residuals,
    })
}

/// Spectrum, projections and conservation report in one call; the zero symbol is legal.
pub fn analyze(u: &FourierSymbol) -> Result<(Option<SpectralData>, ConservationReport)> {
    if u.is_zero() {
        return Ok((None, ConservationReport::zero()));
    }
    let sd = hankel::spectrum(u)?;
    let proj = hankel::eigen_projections(u, &sd);
    let rep = ell(u, &sd, &proj)?;
    Ok((Some(sd), rep))
}

pub fn report(u: &FourierSymbol) -> Result<ConservationReport> {
    analyze(u).map(|r| r.1)
}

/// Closed forms of `ℓ₁, ℓ₂` on 𝒱(4) from `Q`, `|J|²` and the two `σ²`.
pub fn v4_closed_form_ells(q: f64, j2abs: f64, s1: f64, s2: f64) -> Result<(f64, f64)> {
    let d = s1 - s2;
    if d < 1e-12 {
        return Err(Error::DegenerateSigmas(d));
    }
    let l1 = (j2abs - q * q * (q + s2)) / d;
    let l2 = (q * q * (q + s1) - j2abs) / d;
    Ok((l1, l2))
}

/// `J_p = (H_u^p(1)|1)` for `p = 1..=n_max`.
pub fn moments(u: &FourierSymbol, n_max: usize) -> Vec<C64> {
    let c = u.coeffs();
    let mut h = vec![C64::new(0.0, 0.0); c.len()];
    h[0] = C64::new(1.0, 0.0);
    (0..n_max)
        .map(|_| {
            h = conv::correlate(c, &h);
            h[0]
        })
        .collect()
}

/// Leading `count` eigenvalues `σ_k²` of `K_u²` with the corresponding `ℓ_k`, no grouping.
/// Used where the spectrum is perturbed (finite differences) and grouping would be fragile.
pub fn leading_ells(u: &[C64], count: usize) -> (Vec<f64>, Vec<f64>) {
    let q = norm2(u);
    let w = w_of(u);
    let k = linalg::hankel_svd(&hankel::shifted_coeffs(u), 1e-14);
    let mut s2 = Vec::new();
    let mut ells = Vec::new();
    for (s, e) in k.values.iter().zip(&k.vectors).take(count) {
        let a = dot(u, e);
        let b = dot(&w, e);
        s2.push(s * s);
        ells.push((2.0 * q + s * s) * a.norm_sqr() - b.norm_sqr());
    }
    (s2, ells)
}

/// `(I − xT²)⁻¹` from the singular decomposition of `T`.
pub struct Resolvent<'a> {
    svd: &'a HankelSvd,
    x: f64,
}

impl<'a> Resolvent<'a> {
    pub fn new(svd: &'a HankelSvd, x: f64, margin: f64) -> Result<Self> {
        for s in &svd.values {
            let d = 1.0 - x * s * s;
            if d.abs() < margin {
                return Err(Error::ResonantX { x, margin });
            }
        }
        Ok(Self { svd, x })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = self.x;
        let corr = self.svd.apply_fn(v, |l| x * l / (1.0 - x * l));
        v.iter().zip(&corr).map(|(a, b)| a + b).collect()
    }

    /// Solves `(I − xT²) y = v` for the Hankel operator `T` with coefficients `c`, using
    /// `apply` as a preconditioner: exact even when `c` carries spectrum below the floor.
    pub fn solve(&self, c: &[C64], v: &[C64]) -> Vec<C64> {
        let vn = norm2(v).sqrt();
        let mut y = self.apply(v);
        for _ in 0..8 {
            let t2 = conv::correlate(c, &conv::correlate(c, &y));
            let r: Vec<C64> = (0..v.len()).map(|i| v[i] - y[i] + self.x * t2[i]).collect();
            if norm2(&r).sqrt() <= 1e-16 * vn {
                break;
            }
            let dy = self.apply(&r);
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
        }
        y
    }
}

/// Values of the generating functionals at one `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub x: f64,
    pub j0: f64,
    pub j1: C64,
    pub j2: f64,
    pub j3: C64,
    pub j4: f64,
    /// `Z(x) = 𝒥⁽¹⁾(x)`.
    pub z: C64,
    pub kk: f64,
    pub ki: C64,
    pub kp: f64,
    pub r_val: f64,
    pub f_val: f64,
}

pub fn series_sample(u: &FourierSymbol, x: f64) -> Result<SeriesSample> {
    let sd = hankel::spectrum(u)?;
    series_sample_with(u, &sd, x)
}

fn unit(n: usize) -> Vec<C64> {
    let mut one = vec![C64::new(0.0, 0.0); n];
    one[0] = C64::new(1.0, 0.0);
    one
}

pub fn series_sample_with(u: &FourierSymbol, sd: &SpectralData, x: f64) -> Result<SeriesSample> {
    let c = u.coeffs();
    let rh = Resolvent::new(&sd.h_svd, x, RESONANCE_MARGIN)?;
    let rk = Resolvent::new(&sd.k_svd, x, RESONANCE_MARGIN)?;
    let one = unit(c.len());
    let w = w_of(c);
    let h3 = conv::correlate(c, &w);
    let h4 = conv::correlate(c, &h3);
    let j0 = rh.apply(&one)[0].re;
    let ru = rh.apply(c);
    let j1 = ru[0];
    let j2 = dot(&ru, c).re;
    let j3 = rh.apply(&h3)[0];
    let j4 = rh.apply(&h4)[0].re;
    let q = norm2(c);
    let r_val = (q * q + x * j3.norm_sqr() - x * x * j4 * j4) / j0;
    let f_val = (2.0 * q + x * j2 * j2 - x * x * j3.norm_sqr()) / j0;
    let rku = rk.apply(c);
    Ok(SeriesSample {
        x,
        j0,
        j1,
        j2,
        j3,
        j4,
        z: j1,
        kk: rk.apply(&one)[0].re,
        ki: rku[0],
        kp: dot(&rku, c).re,
        r_val,
        f_val,
    })
}

/// `ℱ(x)` alone (used as a scalar functional).
pub fn generating_f(u: &FourierSymbol, x: f64) -> Result<f64> {
    Ok(series_sample(u, x)?.f_val)
}

/// Twelve well-conditioned sample points in `[−2/σ₁², 0) ∪ (0, 0.9/σ₁²]`.
pub fn default_x_grid(sd: &SpectralData) -> Vec<f64> {
    let s1 = sd.k_eigs.first().or(sd.h_eigs.first()).map(|g| g.value).unwrap_or(1.0);
    let mut xs: Vec<f64> = (1..=6).map(|i| -2.0 / s1 * i as f64 / 6.0).collect();
    let all: Vec<f64> = sd.rho2().into_iter().chain(sd.sigma2()).collect();
    let safe = |x: f64| all.iter().all(|l| (1.0 - x * l).abs() >= 0.1);
    let candidates: Vec<f64> = (1..=90).map(|i| 0.9 / s1 * i as f64 / 90.0).filter(|x| safe(*x)).collect();
    if candidates.len() >= 6 {
        for i in 0..6 {
            xs.push(candidates[(i * (candidates.len() - 1)) / 5]);
        }
    } else {
        xs.extend(candidates);
    }
    xs
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub entries: Vec<(String, f64)>,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.1)
    }

    fn push_max(&mut self, name: &str, v: f64) {
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => e.1 = e.1.max(v),
            None => self.entries.push((name.to_string(), v)),
        }
    }
}

fn rel(a: f64, scale: f64) -> f64 {
    a.abs() / scale.abs().max(1.0)
}

/// Residual of `ℛ(x) = Σ ℓ_k/(1 − xσ_k²) + ℓ_∞`, relative to `|ℛ(x)|`.
pub fn generating_residual(s: &SeriesSample, rep: &ConservationReport) -> f64 {
    let series: f64 = rep.ells.iter().map(|(s2, l)| l / (1.0 - s.x * s2)).sum::<f64>() + rep.ell_inf;
    (s.r_val - series).abs() / s.r_val.abs().max(f64::MIN_POSITIVE)
}

/// Every identity of the conservation module, on the given grid (default grid if empty).
pub fn identity_suite(u: &FourierSymbol, xs: &[f64]) -> Result<IdentityReport> {
    let mut out = IdentityReport::default();
    if u.is_zero() {
        return Ok(out);
    }
    let sd = hankel::spectrum(u)?;
    let proj = hankel::eigen_projections(u, &sd);
    let rep = ell(u, &sd, &proj)?;
    out.push_max("sum_ell", rep.residuals.sum_ell);
    out.push_max("weighted_ell", rep.residuals.weighted_ell);
    out.push_max("momentum", rep.residuals.momentum);
    out.push_max("ell_inf", rep.residuals.ell_inf);
    out.push_max("jbar", rep.residuals.jbar);
    let grid = if xs.is_empty() { default_x_grid(&sd) } else { xs.to_vec() };
    let c = u.coeffs();
    let q = rep.q;
    let j1 = c[0];
    for &x in &grid {
        let s = series_sample_with(u, &sd, x)?;
        out.push_max("generating", generating_residual(&s, &rep));
        // (I − xH²)⁻¹u = 𝒥⁽⁰⁾(x)·(I − xK²)⁻¹u
        let rh = Resolvent::new(&sd.h_svd, x, RESONANCE_MARGIN)?;
        let rk = Resolvent::new(&sd.k_svd, x, RESONANCE_MARGIN)?;
        let a = rh.apply(c);
        let b = rk.apply(c);
        let diff: f64 = a.iter().zip(&b).map(|(p, r)| (p - r * s.j0).norm_sqr()).sum::<f64>().sqrt();
        out.push_max("lien_res", diff / norm2(&a).sqrt().max(1.0));
        out.push_max("kj", rel(s.kk - s.j0 * (1.0 - x * s.ki.norm_sqr()), s.kk));
        out.push_max("kj2", rel(1.0 / s.j0 - (1.0 - x * s.kp), 1.0 / s.j0));
        let lhs = 2.0 + 2.0 * x * q - x * x * s.r_val;
        let rhs = s.kk + 2.0 * x * (j1.conj() * s.ki).re + (1.0 - x * s.kp) * (1.0 + x * (2.0 * q - j1.norm_sqr()));
        out.push_max("resolvante_k", rel(lhs - rhs, lhs));
        out.push_max("f_definition", rel(s.f_val - (2.0 * q - x * s.r_val), s.f_val));
        let prod: f64 = sd.k_svd.values.iter().map(|v| 1.0 - x * v * v).product::<f64>()
            / sd.h_svd.values.iter().map(|v| 1.0 - x * v * v).product::<f64>();
        out.push_max("j0_product", rel(s.j0 - prod, s.j0));
    }
    Ok(out)
}

/// Numerical ranks at the rank floor, with the K floor taken relative to `ρ₁`.
pub fn rank_sum(u: &FourierSymbol) -> usize {
    let (h, k) = hankel::numerical_ranks(u);
    h + k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{rational_to_fourier_auto, RationalSymbol};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example(r: f64) -> FourierSymbol {
        rational_to_fourier_auto(&RationalSymbol::double_pole(c(r.sqrt(), 0.0))).unwrap()
    }

    #[test]
    fn basic_quantities() {
        let k = c(0.3, -0.4);
        let u = FourierSymbol::constant(k, 8);
        assert!((mass(&u) - 0.25).abs() < 1e-15);
        assert_eq!(momentum(&u), 0.0);
        assert!((j_factor(&u) - k * 0.25).norm() < 1e-15);
        let z = FourierSymbol::from_slice(&[c(0.0, 0.0), k], 8);
        assert!((mass(&z) - 0.25).abs() < 1e-15);
        assert!((momentum(&z) - 0.25).abs() < 1e-15);
        assert!(j_factor(&z).norm() < 1e-15);
        let u = example(0.25);
        let q = mass(&u);
        assert!((q - 80.0 / 27.0).abs() < 1e-12);
        assert!((j_factor(&u).norm_sqr() / (q * q) - 256.0 / 81.0).abs() < 1e-12);
        // J equals conj((H_u(u)|1))-consistency: (u²|u) = conj((Π|u|²|u)).
        let w = FourierSymbol::from_vec_unchecked(w_of(u.coeffs()));
        let alt = crate::symbol::inner(&w, &u).unwrap().conj();
        assert!((alt - j_factor(&u)).norm() < 1e-12);
    }

    #[test]
    fn reports_on_trivial_symbols() {
        let k = c(0.6, 0.8);
        let rep = report(&FourierSymbol::constant(k, 8)).unwrap();
        assert!(rep.ells.is_empty());
        assert!((rep.ell_inf - 1.0).abs() < 1e-14);
        assert!((rep.ell_inf_kernel - 1.0).abs() < 1e-14);

        let k = c(0.0, 1.3);
        let rep = report(&FourierSymbol::from_slice(&[c(0.0, 0.0), k], 8)).unwrap();
        let q2 = k.norm_sqr().powi(2);
        assert_eq!(rep.ells.len(), 1);
        assert!((rep.ells[0].1 + q2).abs() < 1e-13);
        assert!((rep.ell_inf - 2.0 * q2).abs() < 1e-13);
        assert!(rep.residuals.max() < 1e-13);
        assert_eq!(rep.dominance, vec![Dominance::H]);
    }

    #[test]
    fn example_ells_match_closed_forms() {
        let u = example(0.25);
        let rep = report(&u).unwrap();
        let (l1, l2) = v4_closed_form_ells(rep.q, rep.j.norm_sqr(), rep.ells[0].0, rep.ells[1].0).unwrap();
        assert!((rep.ells[0].1 - l1).abs() < 1e-8 * rep.q * rep.q);
        assert!((rep.ells[1].1 - l2).abs() < 1e-8 * rep.q * rep.q);
        assert!((l1 - 0.139249).abs() < 1e-5);
        assert!(rep.residuals.max() < 1e-10);
        let r = 3.0 * 2f64.sqrt() - 4.0;
        let rep = report(&example(r)).unwrap();
        assert!(rep.ells[0].1.abs() < 1e-8 * rep.q * rep.q);
        assert!(matches!(v4_closed_form_ells(1.0, 1.0, 0.5, 0.5), Err(Error::DegenerateSigmas(_))));
    }

    #[test]
    fn closed_form_leaves() {
        let (q, s1, s2) = (1.3, 2.0, 0.4);
        let (l1, _) = v4_closed_form_ells(q, q * q * (q + s2), s1, s2).unwrap();
        assert!(l1.abs() < 1e-15);
        let (_, l2) = v4_closed_form_ells(q, q * q * (q + s1), s1, s2).unwrap();
        assert!(l2.abs() < 1e-14);
    }

    #[test]
    fn moment_examples() {
        let k = c(0.5, 0.5);
        let m = moments(&FourierSymbol::constant(k, 4), 3);
        assert!((m[0] - k).norm() < 1e-15);
        assert!((m[1] - k.norm_sqr()).norm() < 1e-15);
        assert!((m[2] - k * k.norm_sqr()).norm() < 1e-15);
        let m = moments(&FourierSymbol::from_slice(&[c(0.0, 0.0), c(1.0, 0.0)], 4), 3);
        assert_eq!(m, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(moments(&FourierSymbol::zeros(4), 3).iter().all(|z| z.norm() == 0.0));
        let u = example(0.1);
        let m = moments(&u, 3);
        assert!((m[1].re - mass(&u)).abs() < 1e-12);
        assert!((m[2] - j_factor(&u)).norm() < 1e-12);
    }

    #[test]
    fn series_at_zero_and_identities() {
        let u = example(0.25);
        let s = series_sample(&u, 0.0).unwrap();
        let q = mass(&u);
        assert!((s.j0 - 1.0).abs() < 1e-12);
        assert!((s.j2 - q).abs() < 1e-12 * q);
        assert!((s.r_val - q * q).abs() < 1e-12 * q * q);
        let rep = identity_suite(&u, &[]).unwrap();
        assert!(rep.max() < 1e-8, "{rep:?}");
        let sd = hankel::spectrum(&u).unwrap();
        let x = 1.0 / sd.h_eigs[0].value;
        assert!(matches!(series_sample(&u, x), Err(Error::ResonantX { .. })));
    }

    #[test]
    fn leading_modes_agree_with_report() {
        let u = example(0.2);
        let rep = report(&u).unwrap();
        let (s2, l) = leading_ells(u.coeffs(), 2);
        for k in 0..2 {
            assert!((s2[k] - rep.ells[k].0).abs() < 1e-12 * s2[0]);
            assert!((l[k] - rep.ells[k].1).abs() < 1e-10);
        }
    }
}
