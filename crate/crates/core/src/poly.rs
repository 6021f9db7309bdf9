//! Dense complex polynomials in ascending-coefficient order.

use crate::C64;

pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Degree after dropping trailing coefficients below `tol·max|c|`; `None` for the zero polynomial.
pub fn degree(p: &[C64], tol: f64) -> Option<usize> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    p.iter().rposition(|c| c.norm() > tol * scale)
}

pub fn trim(p: &[C64], tol: f64) -> Vec<C64> {
    match degree(p, tol) {
        Some(d) => p[..=d].to_vec(),
        None => Vec::new(),
    }
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `Π (1 − r_k z)` for the given reciprocal roots.
pub fn from_inverse_roots(p: &[C64]) -> Vec<C64> {
    p.iter()
        .fold(vec![C64::new(1.0, 0.0)], |acc, r| mul(&acc, &[C64::new(1.0, 0.0), -r]))
}

/// All roots by Aberth–Ehrlich iteration followed by Newton polishing.
pub fn roots(p: &[C64]) -> Vec<C64> {
    let p = trim(p, 1e-300);
    if p.len() <= 1 {
        return Vec::new();
    }
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    let dp = derivative(&monic);
    // Cauchy bound for the initial circle.
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let r0 = radius.min(1e6) * 0.5 + 0.1;
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pv = eval(&monic, z[i]);
            let dv = eval(&dp, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = eval(&dp, *zi);
            if dv.norm() == 0.0 {
                break;
            }
            let step = eval(&monic, *zi) / dv;
            if step.is_finite() {
                *zi -= step;
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_known_quadratic() {
        // (1 - 0.5 z)^2 has a double root at 2.
        let p = from_inverse_roots(&[C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        for r in roots(&p) {
            assert!((r - C64::new(2.0, 0.0)).norm() < 1e-6);
        }
        let q = from_inverse_roots(&[C64::new(0.3, 0.4), C64::new(-0.7, 0.1), C64::new(0.0, 0.5)]);
        let mut rs = roots(&q);
        rs.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        let expect = [C64::new(-0.7, 0.1).inv(), C64::new(0.3, 0.4).inv(), C64::new(0.0, 0.5).inv()];
        let mut ex = expect.to_vec();
        ex.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        for (a, b) in rs.iter().zip(&ex) {
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
    }
}
