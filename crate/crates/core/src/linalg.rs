//! Singular value decomposition of (finite-rank) Hankel coefficient matrices.
//!
//! The Hankel matrix `A_{jm} = c(j+m)` (zero for `j+m ≥ N`) is applied through FFT
//! correlations, and its numerical range is captured with a seeded randomized range
//! finder. The sketch is widened until its trailing singular value falls below the rank
//! floor; if that does not happen early, a dense SVD is used instead.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{conv, C64};

/// Singular values below `RANK_FLOOR·s₁` are treated as zero (squared floor 1e-20).
pub const RANK_FLOOR: f64 = 1e-10;
const DENSE_LIMIT: usize = 96;
const SKETCH_SEED: u64 = 0x5eed_1a7e;

/// Leading singular triples `A = Σ s_i e_i f_iᴴ` (left vectors only).
#[derive(Debug, Clone)]
pub struct HankelSvd {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl HankelSvd {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// `Σ_i φ(s_i²) (v|e_i) e_i`.
    pub fn apply_fn(&self, v: &[C64], phi: impl Fn(f64) -> f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (s, e) in self.values.iter().zip(&self.vectors) {
            let w = phi(s * s);
            if w == 0.0 {
                continue;
            }
            let c = crate::symbol::dot(v, e) * w;
            for (o, x) in out.iter_mut().zip(e) {
                *o += c * x;
            }
        }
        out
    }
}

/// `A v` with `A_{jm} = c(j+m)`.
pub fn hankel_apply(c: &[C64], v: &[C64]) -> Vec<C64> {
    let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    conv::correlate(c, &conj)
}

pub fn hankel_matrix(c: &[C64]) -> DMatrix<C64> {
    let n = c.len();
    DMatrix::from_fn(n, n, |j, m| if j + m < n { c[j + m] } else { C64::new(0.0, 0.0) })
}

fn finish(mut pairs: Vec<(f64, Vec<C64>)>, floor: f64) -> HankelSvd {
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let s1 = pairs.first().map(|p| p.0).unwrap_or(0.0);
    pairs.retain(|p| s1 > 0.0 && p.0 > floor * s1);
    let (values, vectors) = pairs.into_iter().unzip();
    HankelSvd { values, vectors }
}

pub fn hankel_svd_dense(c: &[C64], floor: f64) -> HankelSvd {
    let a = hankel_matrix(c);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let pairs = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, u.column(i).iter().copied().collect()))
        .collect();
    finish(pairs, floor)
}

/// SVD of the Hankel matrix of `c`, keeping singular values above `floor·s₁`.
pub fn hankel_svd(c: &[C64], floor: f64) -> HankelSvd {
    let n = c.len();
    if c.iter().all(|z| z.norm_sqr() == 0.0) {
        return HankelSvd { values: vec![], vectors: vec![] };
    }
    if n <= DENSE_LIMIT {
        return hankel_svd_dense(c, floor);
    }
    let mut k = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
    while 2 * k < n {
        if let Some(svd) = sketch(c, k, floor, &mut rng) {
            return svd;
        }
        k *= 2;
    }
    hankel_svd_dense(c, floor)
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

fn sketch(c: &[C64], k: usize, floor: f64, rng: &mut ChaCha8Rng) -> Option<HankelSvd> {
    let n = c.len();
    let mut y = DMatrix::<C64>::zeros(n, k);
    for j in 0..k {
        let col = hankel_apply(c, &gaussian(n, rng));
        y.column_mut(j).copy_from_slice(&col);
    }
    let q = y.qr().q();
    // Aᴴ Q = conj(A conj(Q)), A being complex symmetric.
    let mut bt = DMatrix::<C64>::zeros(n, k);
    for j in 0..k {
        let qj: Vec<C64> = q.column(j).iter().map(|z| z.conj()).collect();
        let col: Vec<C64> = hankel_apply(c, &qj).into_iter().map(|z| z.conj()).collect();
        bt.column_mut(j).copy_from_slice(&col);
    }
    let svd = bt.svd(false, true);
    let s = &svd.singular_values;
    let s1 = s.max();
    let smin = s.min();
    if smin > floor * s1 {
        return None;
    }
    // Probe the range residual once to guard against an unlucky sketch.
    let g = gaussian(n, rng);
    let ag = hankel_apply(c, &g);
    let mut resid = ag.clone();
    for j in 0..k {
        let qj = q.column(j);
        let coef: C64 = qj.iter().zip(&ag).map(|(a, b)| a.conj() * b).sum();
        for (r, x) in resid.iter_mut().zip(qj.iter()) {
            *r -= coef * x;
        }
    }
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm(&resid) > 1e-9 * norm(&ag) {
        return None;
    }
    // Bᴴ = V S Uᴴ, so the left vectors of A are Q V, with V = (Vᴴ)ᴴ.
    let v_t = svd.v_t.expect("right vectors requested");
    let left = &q * v_t.adjoint();
    let pairs = (0..s.len())
        .map(|i| (s[i], left.column(i).iter().copied().collect()))
        .collect();
    Some(finish(pairs, floor))
}

/// Leading singular pairs of the Hankel matrix of `c`, refined by subspace iteration on
/// `A Aᴴ` from a nearby basis (`start`, e.g. the decomposition at an unperturbed symbol).
/// Cheap and accurate when `c` is a small perturbation of a finite-rank symbol.
pub fn refine_svd(c: &[C64], start: &[Vec<C64>], max_iter: usize) -> HankelSvd {
    let r = start.len();
    if r == 0 {
        return HankelSvd { values: vec![], vectors: vec![] };
    }
    let n = c.len();
    let square = |v: &[C64]| conv::correlate(c, &conv::correlate(c, v));
    let mut v = orthonormal(start, n);
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..max_iter {
        let w: Vec<Vec<C64>> = v.iter().map(|x| square(x)).collect();
        let norms: Vec<f64> = w.iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
        v = orthonormal(&w, n);
        if let Some(p) = &prev {
            if p.iter().zip(&norms).all(|(a, b)| (a - b).abs() <= 1e-15 * norms[0]) {
                break;
            }
        }
        prev = Some(norms);
    }
    let w: Vec<Vec<C64>> = v.iter().map(|x| square(x)).collect();
    let g = DMatrix::from_fn(r, r, |i, j| crate::symbol::dot(&w[j], &v[i]));
    let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = g.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<C64>)> = (0..r)
        .map(|k| {
            let z = eig.eigenvectors.column(k);
            let mut e = vec![C64::new(0.0, 0.0); n];
            for (i, vi) in v.iter().enumerate() {
                for (o, x) in e.iter_mut().zip(vi) {
                    *o += z[i] * x;
                }
            }
            (eig.eigenvalues[k].max(0.0).sqrt(), e)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let (values, vectors) = pairs.into_iter().unzip();
    HankelSvd { values, vectors }
}

/// Twice-applied modified Gram–Schmidt.
fn orthonormal(vs: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut x = v.clone();
        x.resize(n, C64::new(0.0, 0.0));
        for _ in 0..2 {
            for q in &out {
                let c = crate::symbol::dot(&x, q);
                for (a, b) in x.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
        }
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nx > 0.0 {
            x.iter_mut().for_each(|z| *z /= nx);
        }
        out.push(x);
    }
    out
}
