//! Poisson brackets on truncated Hardy-space coordinates.
//!
//! A gradient `g` of a real functional `F` is defined by `dF(u)·h = Re(h|g)`, so that
//! `X_F = −i g` and `{F, G} = ω(X_F, X_G) = Im(g_F|g_G)`. Gradients are computed by central
//! differences in the `2N` real coordinates (optionally with one Richardson step), or
//! analytically where a closed form is cheap.
//!
//! Spectral functionals are evaluated at perturbed points through a [`Probe`], which
//! refines the singular subspaces of the base point instead of recomputing a full SVD:
//! a coordinate perturbation of size `h` adds `O(h)` singular values that a rank floor
//! would either drop (biasing the difference quotient) or force a dense decomposition.

use std::cell::OnceCell;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conservation::{Resolvent, RESONANCE_MARGIN};
use crate::error::{Error, Result};
use crate::hankel::{self, shifted_coeffs};
use crate::linalg::{self, HankelSvd, RANK_FLOOR};
use crate::symbol::{dot, FourierSymbol};
use crate::{conv, flow, C64};

const REFINE_ITERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    FiniteDiff,
    Analytic,
}

/// Spectral decompositions at the unperturbed point.
#[derive(Debug, Clone)]
pub struct Base {
    h: HankelSvd,
    k: HankelSvd,
}

impl Base {
    pub fn new(u: &[C64]) -> Self {
        Self { h: linalg::hankel_svd(u, RANK_FLOOR), k: linalg::hankel_svd(&shifted_coeffs(u), RANK_FLOOR) }
    }
}

/// A (possibly perturbed) point together with lazily refined decompositions.
pub struct Probe<'a> {
    c: &'a [C64],
    base: &'a Base,
    h: OnceCell<HankelSvd>,
    k: OnceCell<(Vec<C64>, HankelSvd)>,
}

impl<'a> Probe<'a> {
    pub fn new(c: &'a [C64], base: &'a Base) -> Self {
        Self { c, base, h: OnceCell::new(), k: OnceCell::new() }
    }

    pub fn coeffs(&self) -> &[C64] {
        self.c
    }

    pub fn h_svd(&self) -> &HankelSvd {
        self.h.get_or_init(|| linalg::refine_svd(self.c, &self.base.h.vectors, REFINE_ITERS))
    }

    pub fn k_svd(&self) -> &HankelSvd {
        &self
            .k
            .get_or_init(|| {
                let kc = shifted_coeffs(self.c);
                let svd = linalg::refine_svd(&kc, &self.base.k.vectors, REFINE_ITERS);
                (kc, svd)
            })
            .1
    }

    /// `(I − xH_u²)⁻¹ v`.
    pub fn resolve_h(&self, x: f64, v: &[C64]) -> Result<Vec<C64>> {
        let r = Resolvent::new(self.h_svd(), x, RESONANCE_MARGIN)?;
        Ok(r.solve(self.c, v))
    }

    pub fn q(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }
}

type EvalFn = dyn Fn(&Probe) -> Result<Vec<f64>> + Send + Sync;
type GradFn = dyn Fn(&FourierSymbol) -> Result<Vec<Vec<C64>>> + Send + Sync;

/// A bundle of real functionals evaluated together (a complex functional contributes its
/// real and imaginary parts as two components).
#[derive(Clone)]
pub struct Functional {
    labels: Vec<String>,
    eval: Arc<EvalFn>,
    analytic: Option<Arc<GradFn>>,
    pub mode: GradientMode,
}

impl std::fmt::Debug for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Functional").field("labels", &self.labels).field("mode", &self.mode).finish()
    }
}

impl Functional {
    pub fn new(labels: Vec<String>, eval: impl Fn(&Probe) -> Result<Vec<f64>> + Send + Sync + 'static) -> Self {
        Self { labels, eval: Arc::new(eval), analytic: None, mode: GradientMode::FiniteDiff }
    }

    pub fn with_analytic(
        mut self,
        grad: impl Fn(&FourierSymbol) -> Result<Vec<Vec<C64>>> + Send + Sync + 'static,
    ) -> Self {
        self.analytic = Some(Arc::new(grad));
        self.mode = GradientMode::Analytic;
        self
    }

    /// Same functional, forced to finite differences.
    pub fn finite_diff(mut self) -> Self {
        self.mode = GradientMode::FiniteDiff;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn evaluate(&self, u: &FourierSymbol) -> Result<Vec<f64>> {
        let base = Base::new(u.coeffs());
        self.eval_at(&Probe::new(u.coeffs(), &base))
    }

    fn eval_at(&self, p: &Probe) -> Result<Vec<f64>> {
        let v = (self.eval)(p)?;
        if v.len() != self.labels.len() {
            return Err(Error::EvalFailure(format!("{}: {} values for {} labels", self.labels.join(","), v.len(), self.labels.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::EvalFailure(format!("{}: non-finite value", self.labels.join(","))));
        }
        Ok(v)
    }

    /// Product of component `i` of `a` with component `j` of `b`.
    pub fn product(a: &Functional, i: usize, b: &Functional, j: usize) -> Functional {
        let (a2, b2) = (a.clone(), b.clone());
        let label = format!("{}*{}", a.labels[i], b.labels[j]);
        Functional::new(vec![label], move |p| Ok(vec![a2.eval_at(p)?[i] * b2.eval_at(p)?[j]]))
    }
}

pub fn mass() -> Functional {
    Functional::new(vec!["Q".into()], |p| Ok(vec![p.q()]))
        .with_analytic(|u| Ok(vec![u.coeffs().iter().map(|z| 2.0 * z).collect()]))
}

pub fn momentum() -> Functional {
    Functional::new(vec!["M".into()], |p| {
        Ok(vec![p.c.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()])
    })
    .with_analytic(|u| Ok(vec![u.coeffs().iter().enumerate().map(|(n, z)| 2.0 * n as f64 * z).collect()]))
}

pub fn hamiltonian() -> Functional {
    Functional::new(vec!["H".into()], |p| {
        let u2 = conv::convolve(p.c, p.c, p.c.len());
        Ok(vec![0.5 * dot(&u2, p.c).norm_sqr()])
    })
    .with_analytic(|u| {
        let x = flow::vector_field_h(u);
        Ok(vec![x.coeffs().iter().map(|z| C64::new(0.0, 1.0) * z).collect()])
    })
}

fn ells_of(p: &Probe, count: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let k = p.k_svd();
    if k.rank() < count {
        return Err(Error::EvalFailure(format!("K_u has rank {} < {count}", k.rank())));
    }
    let q = p.q();
    let w = conv::correlate(p.c, p.c);
    let mut u_inf = p.c.to_vec();
    let mut w_inf = w.clone();
    let mut s2 = Vec::new();
    let mut ells = Vec::new();
    for (s, e) in k.values.iter().zip(&k.vectors) {
        let a = dot(p.c, e);
        let b = dot(&w, e);
        for ((x, y), z) in u_inf.iter_mut().zip(w_inf.iter_mut()).zip(e) {
            *x -= a * z;
            *y -= b * z;
        }
        s2.push(s * s);
        ells.push((2.0 * q + s * s) * a.norm_sqr() - b.norm_sqr());
    }
    let norm2 = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let ell_inf = 2.0 * q * norm2(&u_inf) - norm2(&w_inf);
    s2.truncate(count);
    ells.truncate(count);
    Ok((s2, ells, ell_inf))
}

/// `ℓ_1..ℓ_count` (finite differences).
pub fn ells(count: usize) -> Functional {
    let labels = (1..=count).map(|k| format!("ell_{k}")).collect();
    Functional::new(labels, move |p| Ok(ells_of(p, count)?.1))
}

/// `ℓ_∞` (finite differences).
pub fn ell_inf() -> Functional {
    Functional::new(vec!["ell_inf".into()], |p| Ok(vec![ells_of(p, 0)?.2]))
}

/// `σ_1²..σ_count²`, with first-order perturbation gradients `2σ·S(f²)`, `f` the vector
/// with `K_u f = σ f`.
pub fn sigmas(count: usize) -> Functional {
    let labels = (1..=count).map(|k| format!("sigma2_{k}")).collect();
    Functional::new(labels, move |p| Ok(ells_of(p, count)?.0)).with_analytic(move |u| {
        let c = u.coeffs();
        let n = c.len();
        let kc = shifted_coeffs(c);
        let svd = linalg::hankel_svd(&kc, RANK_FLOOR);
        if svd.rank() < count {
            return Err(Error::EvalFailure(format!("K_u has rank {} < {count}", svd.rank())));
        }
        let mut out = Vec::new();
        for (s, e) in svd.values.iter().zip(&svd.vectors).take(count) {
            let lam = dot(&conv::correlate(&kc, e), e);
            let f: Vec<C64> = e.iter().map(|z| z * C64::from_polar(1.0, lam.arg() / 2.0)).collect();
            let ff = conv::convolve(&f, &f, n);
            let mut g = vec![C64::new(0.0, 0.0); n];
            for m in 1..n {
                g[m] = 2.0 * s * ff[m - 1];
            }
            out.push(g);
        }
        Ok(out)
    })
}

/// The generating functionals of one `x`: `𝒥(x)`, `Z(x)` (re, im), `𝒥'(x)`, `𝒥⁽³⁾(x)` (re, im)
/// and `ℱ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValues {
    pub j0: f64,
    pub z: C64,
    pub j2: f64,
    pub j3: C64,
    pub f: f64,
}

pub fn series_values(p: &Probe, x: f64) -> Result<SeriesValues> {
    let n = p.c.len();
    let mut one = vec![C64::new(0.0, 0.0); n];
    one[0] = C64::new(1.0, 0.0);
    let w0 = p.resolve_h(x, &one)?;
    let w1 = p.resolve_h(x, p.c)?;
    let w = conv::correlate(p.c, p.c);
    let j0 = w0[0].re;
    let j2 = dot(&w1, p.c).re;
    let j3 = dot(&w1, &w);
    let f = (2.0 * p.q() + x * j2 * j2 - x * x * j3.norm_sqr()) / j0;
    Ok(SeriesValues { j0, z: w1[0], j2, j3, f })
}

pub const SERIES_LABELS: [&str; 7] = ["J", "reZ", "imZ", "Jp", "reJi", "imJi", "F"];

pub fn series(x: f64) -> Functional {
    let labels = SERIES_LABELS.iter().map(|l| format!("{l}({x})")).collect();
    Functional::new(labels, move |p| {
        let s = series_values(p, x)?;
        Ok(vec![s.j0, s.z.re, s.z.im, s.j2, s.j3.re, s.j3.im, s.f])
    })
}

/// `ℱ(x)` for several `x` at once.
pub fn generating(xs: &[f64]) -> Functional {
    let xs = xs.to_vec();
    let labels = xs.iter().map(|x| format!("F({x})")).collect();
    Functional::new(labels, move |p| xs.iter().map(|x| Ok(series_values(p, *x)?.f)).collect())
}

/// Functional and component index for a label: `Q`, `M`, `H`, `ell_k`, `sigma2_k`, `ell_inf`,
/// `F(x)`, or one of the series labels `J(x)`, `reZ(x)`, `imZ(x)`, `Jp(x)`, `reJi(x)`, `imJi(x)`.
pub fn functional_by_label(label: &str) -> Result<(Functional, usize)> {
    let bad = || Error::Config(format!("unknown functional label {label:?}"));
    let index = |rest: &str| rest.parse::<usize>().ok().filter(|k| *k >= 1).ok_or_else(bad);
    match label {
        "Q" => return Ok((mass(), 0)),
        "M" => return Ok((momentum(), 0)),
        "H" => return Ok((hamiltonian(), 0)),
        "ell_inf" => return Ok((ell_inf(), 0)),
        _ => {}
    }
    if let Some(rest) = label.strip_prefix("ell_") {
        let k = index(rest)?;
        return Ok((ells(k), k - 1));
    }
    if let Some(rest) = label.strip_prefix("sigma2_") {
        let k = index(rest)?;
        return Ok((sigmas(k), k - 1));
    }
    let (name, arg) = label.strip_suffix(')').and_then(|l| l.split_once('(')).ok_or_else(bad)?;
    let x: f64 = arg.trim().parse().map_err(|_| bad())?;
    if name == "F" {
        return Ok((generating(&[x]), 0));
    }
    let i = SERIES_LABELS.iter().position(|l| *l == name).ok_or_else(bad)?;
    Ok((series(x), i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Relative step `h = h0·max(1, ‖u‖)`.
    pub h0: f64,
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h0: 1e-5, richardson: false }
    }
}

/// Gradients of every component of `f` at `u`.
pub fn gradient(f: &Functional, u: &FourierSymbol, opts: FdOptions) -> Result<Vec<Vec<C64>>> {
    if f.mode == GradientMode::Analytic {
        if let Some(g) = &f.analytic {
            return g(u);
        }
    }
    let h = opts.h0 * u.norm().max(1.0);
    let d1 = fd_gradient(f, u.coeffs(), h)?;
    if !opts.richardson {
        return Ok(d1);
    }
    let d2 = fd_gradient(f, u.coeffs(), 0.5 * h)?;
    Ok(d1
        .iter()
        .zip(&d2)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (4.0 * y - x) / 3.0).collect())
        .collect())
}

fn fd_gradient(f: &Functional, c: &[C64], h: f64) -> Result<Vec<Vec<C64>>> {
    let n = c.len();
    let comps = f.labels.len();
    let base = Base::new(c);
    let coord = |m: usize| -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); comps];
        let mut pt = c.to_vec();
        for (dir, unit) in [(0, C64::new(h, 0.0)), (1, C64::new(0.0, h))] {
            pt[m] = c[m] + unit;
            let plus = f.eval_at(&Probe::new(&pt, &base))?;
            pt[m] = c[m] - unit;
            let minus = f.eval_at(&Probe::new(&pt, &base))?;
            pt[m] = c[m];
            for (o, (a, b)) in out.iter_mut().zip(plus.iter().zip(&minus)) {
                let d = (a - b) / (2.0 * h);
                if dir == 0 {
                    o.re = d;
                } else {
                    o.im = d;
                }
            }
        }
        Ok(out)
    };
    let threads = crate::worker_threads().min(n).max(1);
    let cols: Vec<Vec<C64>> = if threads == 1 {
        (0..n).map(coord).collect::<Result<_>>()?
    } else {
        let chunk = n.div_ceil(threads);
        let parts: Vec<Result<Vec<Vec<C64>>>> = std::thread::scope(|scope| {
            let coord = &coord;
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|lo| scope.spawn(move || (lo..(lo + chunk).min(n)).map(coord).collect()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("gradient worker panicked")).collect()
        });
        let mut cols = Vec::with_capacity(n);
        for p in parts {
            cols.extend(p?);
        }
        cols
    };
    Ok((0..comps).map(|k| cols.iter().map(|col| col[k]).collect()).collect())
}

/// `{F, G} = Im(g_F | g_G)`.
pub fn bracket_of(gf: &[C64], gg: &[C64]) -> f64 {
    dot(gf, gg).im
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bracket of the first components of `f` and `g`.
pub fn bracket(f: &Functional, g: &Functional, u: &FourierSymbol) -> Result<f64> {
    let gf = gradient(f, u, FdOptions::default())?;
    let gg = gradient(g, u, FdOptions::default())?;
    Ok(bracket_of(&gf[0], &gg[0]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    /// `max |g_i|·|g_j|` over asserted pairs.
    pub scale: f64,
    /// `max |{F_i, F_j}| / (|g_i|·|g_j|)` over asserted pairs (`i ≠ j`).
    pub max_normalized_entry: f64,
    /// Rows reported but not asserted.
    pub informational: Vec<String>,
}

impl BracketReport {
    pub fn from_gradients(labels: Vec<String>, grads: &[Vec<C64>], informational: Vec<String>) -> Self {
        let m = grads.len();
        let norms: Vec<f64> = grads.iter().map(|g| norm(g)).collect();
        let mut matrix = vec![vec![0.0; m]; m];
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                matrix[i][j] = bracket_of(&grads[i], &grads[j]);
                if i == j || informational.contains(&labels[i]) || informational.contains(&labels[j]) {
                    continue;
                }
                let s = norms[i] * norms[j];
                scale = scale.max(s);
                if s > 0.0 {
                    worst = worst.max(matrix[i][j].abs() / s);
                }
            }
        }
        Self { labels, matrix, scale, max_normalized_entry: worst, informational }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.matrix[i][j])
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let m = self.labels.len();
        let mut d: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                d = d.max((self.matrix[i][j] + self.matrix[j][i]).abs());
            }
        }
        d
    }
}

/// Gradients of several functional bundles, flattened with their labels.
pub fn gradients(fs: &[Functional], u: &FourierSymbol, opts: FdOptions) -> Result<(Vec<String>, Vec<Vec<C64>>)> {
    let mut labels = Vec::new();
    let mut grads = Vec::new();
    for f in fs {
        labels.extend(f.labels.iter().cloned());
        grads.extend(gradient(f, u, opts)?);
    }
    Ok((labels, grads))
}

/// `x` values for the `ℱ(x)` pairs of the involution report: two negative, one positive,
/// scaled by `ρ₁²`.
pub fn involution_xs(u: &FourierSymbol) -> Vec<f64> {
    let rho1 = linalg::hankel_svd(u.coeffs(), RANK_FLOOR).values.first().copied().unwrap_or(1.0);
    let r2 = rho1 * rho1;
    vec![-1.0 / r2, -0.3 / r2, 0.2 / r2]
}

/// All brackets among `ℓ_k`, `σ_k²`, `ℓ_∞` (informational) and `ℱ(x)`.
pub fn involution_report(u: &FourierSymbol) -> Result<BracketReport> {
    let sd = hankel::spectrum(u)?;
    if !sd.is_simple() || sd.k_eigs.is_empty() {
        return Err(Error::DegenerateSpectrum("involution needs a simple, nonzero K-spectrum".into()));
    }
    let count = sd.k_eigs.len();
    let fs = [ells(count), sigmas(count), ell_inf(), generating(&involution_xs(u))];
    let (labels, grads) = gradients(&fs, u, FdOptions::default())?;
    Ok(BracketReport::from_gradients(labels, &grads, vec!["ell_inf".into()]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub lhs: C64,
    pub rhs: C64,
    /// `|lhs − rhs| / max(|rhs|, 1e-8·|g_F||g_G|)`; for vanishing right sides, `|lhs| / (|g_F||g_G|)`.
    pub residual: f64,
}

/// Bracket of two complex functionals given by (re, im) gradient pairs.
fn cbracket(f: (&[C64], &[C64]), g: (&[C64], &[C64]), conj_g: bool) -> C64 {
    let b = |a: &[C64], c: &[C64]| bracket_of(a, c);
    let (rr, ii, ri, ir) = (b(f.0, g.0), b(f.1, g.1), b(f.0, g.1), b(f.1, g.0));
    if conj_g {
        C64::new(rr + ii, ir - ri)
    } else {
        C64::new(rr - ii, ri + ir)
    }
}

fn combo(a: &[C64], wa: f64, b: &[C64], wb: f64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x * wa + y * wb).collect()
}

/// The bracket lemmas at `(x, y)`: `{|Z(x)|², |Z(y)|²}`, `{𝒥(x), |Z(y)|²}`, `{𝒥⁽³⁾(x), 𝒥⁽³⁾(y)}`,
/// `{𝒥⁽³⁾(x), conj 𝒥⁽³⁾(y)}` and `{Q, |𝒥⁽³⁾(y)|²} = 0`.
pub fn bracket_lemma_checks(u: &FourierSymbol, x: f64, y: f64) -> Result<Vec<LemmaCheck>> {
    if x == y || x == 0.0 || y == 0.0 {
        return Err(Error::InconsistentInputs("bracket lemmas need distinct nonzero x, y".into()));
    }
    let fx = series(x);
    let fy = series(y);
    let base = Base::new(u.coeffs());
    let probe = Probe::new(u.coeffs(), &base);
    let (sx, sy) = (series_values(&probe, x)?, series_values(&probe, y)?);
    let opts = FdOptions::default();
    let gx = gradient(&fx, u, opts)?;
    let gy = gradient(&fy, u, opts)?;
    let gq = gradient(&mass(), u, opts)?.remove(0);
    // Component order: J, reZ, imZ, Jp, reJi, imJi, F.
    let zabs = |g: &[Vec<C64>], z: C64| combo(&g[1], 2.0 * z.re, &g[2], 2.0 * z.im);
    let jiabs = |g: &[Vec<C64>], z: C64| combo(&g[4], 2.0 * z.re, &g[5], 2.0 * z.im);
    let i = C64::new(0.0, 1.0);
    let dxy = x - y;
    let imzz = (sx.z * sy.z.conj()).im;
    let mut out = Vec::new();
    let mut push = |name: &str, lhs: C64, rhs: C64, ga: &[C64], gb: &[C64]| {
        let floor = 1e-8 * norm(ga) * norm(gb);
        out.push(LemmaCheck { name: name.into(), lhs, rhs, residual: (lhs - rhs).norm() / rhs.norm().max(floor) });
    };
    let (zx2, zy2) = (zabs(&gx, sx.z), zabs(&gy, sy.z));
    push(
        "ZZ",
        bracket_of(&zx2, &zy2).into(),
        (4.0 * imzz / dxy
            * (x * sx.j0 * sx.j0 - y * sy.j0 * sy.j0 + x * x * sx.z.norm_sqr() - y * y * sy.z.norm_sqr()))
        .into(),
        &zx2,
        &zy2,
    );
    push("JZ", bracket_of(&gx[0], &zy2).into(), (4.0 * x * x * sx.j0 / dxy * imzz).into(), &gx[0], &zy2);
    let jx = (&gx[4][..], &gx[5][..]);
    let jy = (&gy[4][..], &gy[5][..]);
    let t = x * sx.j3 - y * sy.j3;
    let nx = norm(&gx[4]).max(norm(&gx[5]));
    let ny = norm(&gy[4]).max(norm(&gy[5]));
    let fl = vec![C64::new(nx, 0.0)];
    let gl = vec![C64::new(ny, 0.0)];
    push("JiJi", cbracket(jx, jy, false), -2.0 * i / dxy * t * t, &fl, &gl);
    push(
        "JiJibar",
        cbracket(jx, jy, true),
        2.0 * i / dxy * (sx.j0 * sx.j0 / x - sy.j0 * sy.j0 / y - 1.0 / x + 1.0 / y),
        &fl,
        &gl,
    );
    let jy2 = jiabs(&gy, sy.j3);
    let lhs = bracket_of(&gq, &jy2);
    let scale = (norm(&gq) * norm(&jy2)).max(f64::MIN_POSITIVE);
    out.push(LemmaCheck { name: "QJi".into(), lhs: lhs.into(), rhs: 0.0.into(), residual: lhs.abs() / scale });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{rational_to_fourier_auto, RationalSymbol};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> FourierSymbol {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        crate::corpus::random_generic(4, &mut rng).unwrap().u
    }

    fn rel(a: &[C64], b: &[C64]) -> f64 {
        let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d) / norm(b).max(1e-300)
    }

    #[test]
    fn trivial_gradients() {
        let u = sample();
        for f in [mass(), momentum(), hamiltonian()] {
            let a = gradient(&f, &u, FdOptions::default()).unwrap();
            let d = gradient(&f.clone().finite_diff(), &u, FdOptions::default()).unwrap();
            assert!(rel(&d[0], &a[0]) < 1e-7, "{:?}", f.labels());
        }
        let q = gradient(&mass(), &u, FdOptions::default()).unwrap();
        let m = gradient(&momentum(), &u, FdOptions::default()).unwrap();
        assert!(bracket_of(&q[0], &m[0]).abs() < 1e-12 * norm(&q[0]) * norm(&m[0]));
    }

    #[test]
    fn sigma_gradient_matches_differences() {
        let u = sample();
        let a = gradient(&sigmas(2), &u, FdOptions::default()).unwrap();
        let d = gradient(&sigmas(2).finite_diff(), &u, FdOptions::default()).unwrap();
        for k in 0..2 {
            assert!(rel(&d[k], &a[k]) < 1e-6, "k={k}: {}", rel(&d[k], &a[k]));
        }
    }

    #[test]
    fn involution_small() {
        let u = rational_to_fourier_auto(&RationalSymbol::double_pole(C64::new(0.5, 0.0))).unwrap();
        let rep = involution_report(&u).unwrap();
        assert!(rep.max_normalized_entry < 1e-5, "{rep:?}");
        assert!(rep.antisymmetry_defect() <= 1e-12 * rep.scale);
    }

    #[test]
    fn field_f_is_symplectic_gradient() {
        let u = sample();
        let x = -0.4;
        let g = gradient(&generating(&[x]), &u, FdOptions::default()).unwrap();
        let xf = flow::vector_field_f(&u, x).unwrap();
        let ig: Vec<C64> = xf.coeffs().iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        assert!(rel(&ig, &g[0]) < 1e-6, "{}", rel(&ig, &g[0]));
    }

    #[test]
    fn lemmas() {
        let u = sample();
        let s1 = linalg::hankel_svd(u.coeffs(), RANK_FLOOR).values[0].powi(2);
        for (x, y) in [(-0.3 / s1, 0.2 / s1), (0.2 / s1, -0.3 / s1), (-1.0 / s1, -0.4 / s1)] {
            for c in bracket_lemma_checks(&u, x, y).unwrap() {
                assert!(c.residual < 1e-4, "{c:?}");
            }
        }
    }
}
