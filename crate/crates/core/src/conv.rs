//! Truncated products of coefficient sequences, FFT-backed for long inputs.

use std::cell::RefCell;

use rustfft::FftPlanner;

use crate::C64;

const DIRECT_LIMIT: usize = 48;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn full_convolution(a: &[C64], b: &[C64], out_len: usize) -> Vec<C64> {
    let need = a.len() + b.len() - 1;
    let l = need.next_power_of_two();
    let mut fa = vec![C64::new(0.0, 0.0); l];
    let mut fb = vec![C64::new(0.0, 0.0); l];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fwd = p.plan_fft_forward(l);
        let inv = p.plan_fft_inverse(l);
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= *y;
        }
        inv.process(&mut fa);
    });
    let scale = 1.0 / l as f64;
    fa.truncate(out_len.min(need));
    for x in fa.iter_mut() {
        *x *= scale;
    }
    fa.resize(out_len, C64::new(0.0, 0.0));
    fa
}

/// First `n` coefficients of the product `a·b`.
pub fn convolve(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return vec![C64::new(0.0, 0.0); n];
    }
    if a.len().min(b.len()) <= DIRECT_LIMIT || n <= DIRECT_LIMIT {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut s = C64::new(0.0, 0.0);
            if lo <= hi {
                for i in lo..=hi {
                    s += a[i] * b[k - i];
                }
            }
            *o = s;
        }
        return out;
    }
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    full_convolution(a, b, n)
}

/// `c_n = Σ_m a(n+m)·conj(b(m))` for `n < a.len()`, i.e. `Π(a·b̄)` truncated to the length of `a`.
pub fn correlate(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len();
    if n == 0 || b.is_empty() {
        return vec![C64::new(0.0, 0.0); n];
    }
    let m = b.len().min(n);
    if n.min(m) <= DIRECT_LIMIT {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..m.min(n - k) {
                s += a[k + j] * b[j].conj();
            }
            *o = s;
        }
        return out;
    }
    let rev: Vec<C64> = b[..m].iter().rev().map(|z| z.conj()).collect();
    let full = full_convolution(a, &rev, n + m - 1);
    full[m - 1..m - 1 + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn naive_conv(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if i + j < n {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    #[test]
    fn fft_paths_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[5usize, 70, 257] {
            let a = random(n, &mut rng);
            let b = random(n, &mut rng);
            let c = convolve(&a, &b, n);
            let e = naive_conv(&a, &b, n);
            for (x, y) in c.iter().zip(&e) {
                assert!((x - y).norm() < 1e-12);
            }
            let r = correlate(&a, &b);
            for k in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for j in 0..n - k {
                    s += a[k + j] * b[j].conj();
                }
                assert!((r[k] - s).norm() < 1e-12);
            }
        }
    }
}
