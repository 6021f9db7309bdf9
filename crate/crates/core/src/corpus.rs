//! Seeded random generic symbols in 𝒱(d).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hankel;
use crate::symbol::{rational_to_fourier_auto, FourierSymbol, RationalSymbol};
use crate::{poly, Error, Result, C64};

pub const MIN_POLE: f64 = 0.2;
pub const MAX_POLE: f64 = 0.8;
/// Minimal relative gap between consecutive singular values (squared), and to zero.
pub const MIN_GAP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Sample {
    pub rational: RationalSymbol,
    pub u: FourierSymbol,
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A rational symbol of class `d` with inverse poles of modulus in `[0.2, 0.8]`, whether or not generic.
pub fn random_rational(d: usize, rng: &mut ChaCha8Rng) -> Result<RationalSymbol> {
    let nb = d / 2;
    let na = if d.is_multiple_of(2) { nb } else { nb + 1 };
    let inv_poles: Vec<C64> = (0..nb)
        .map(|_| {
            let r = rng.random_range(MIN_POLE..=MAX_POLE);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, t)
        })
        .collect();
    let num: Vec<C64> = (0..na).map(|_| gaussian(rng)).collect();
    RationalSymbol::new(num, poly::from_inverse_roots(&inv_poles))
}

/// Generic: simple alternating spectrum of the right size with gaps ≥ `MIN_GAP·σ₁²`.
pub fn is_generic(u: &FourierSymbol, d: usize) -> bool {
    let Ok(sd) = hankel::spectrum(u) else { return false };
    if sd.merged.len() != d || !sd.is_simple() || !hankel::alternation_check(&sd) {
        return false;
    }
    let s1 = sd.k_eigs.first().map(|g| g.value).unwrap_or(sd.h_eigs[0].value);
    let mut vals: Vec<f64> = sd.merged.iter().map(|m| m.value).collect();
    vals.push(0.0);
    vals.windows(2).all(|w| w[0] - w[1] >= MIN_GAP * s1) && sd.rank_h() + sd.rank_k() == d
}

pub fn random_generic(d: usize, rng: &mut ChaCha8Rng) -> Result<Sample> {
    for _ in 0..1000 {
        let Ok(r) = random_rational(d, rng) else { continue };
        if r.class_d() != d {
            continue;
        }
        let Ok(u) = rational_to_fourier_auto(&r) else { continue };
        if is_generic(&u, d) {
            return Ok(Sample { rational: r, u });
        }
    }
    Err(Error::DegenerateSpectrum(format!("no generic V({d}) sample found")))
}

/// `count` generic samples of each requested class, deterministic in `seed`.
pub fn corpus(seed: u64, classes: &[usize], count: usize) -> Result<Vec<Sample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        for &d in classes {
            out.push(random_generic(d, &mut rng)?);
        }
    }
    Ok(out)
}
