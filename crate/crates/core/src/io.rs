//! JSON schema for symbols: `{"type":"rational","num":[[re,im],..],"den":[[re,im],..]}` or
//! `{"type":"fourier","coeffs":[[re,im],..]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::{rational_to_fourier, rational_to_fourier_auto, FourierSymbol, RationalSymbol};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolSpec {
    Rational { num: Vec<[f64; 2]>, den: Vec<[f64; 2]> },
    Fourier { coeffs: Vec<[f64; 2]> },
}

fn to_c(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

fn from_c(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl SymbolSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("symbol: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol serializes")
    }

    pub fn from_rational(r: &RationalSymbol) -> Self {
        SymbolSpec::Rational { num: from_c(r.num()), den: from_c(r.den()) }
    }

    pub fn from_fourier(u: &FourierSymbol) -> Self {
        SymbolSpec::Fourier { coeffs: from_c(u.coeffs()) }
    }

    pub fn rational(&self) -> Option<Result<RationalSymbol>> {
        match self {
            SymbolSpec::Rational { num, den } => Some(RationalSymbol::new(to_c(num), to_c(den))),
            SymbolSpec::Fourier { .. } => None,
        }
    }

    /// Truncated Fourier form; rational symbols are expanded at `n` (or the smallest
    /// resolving power of two when `None`).
    pub fn to_fourier(&self, n: Option<usize>) -> Result<FourierSymbol> {
        match self {
            SymbolSpec::Rational { .. } => {
                let r = self.rational().expect("rational variant")?;
                match n {
                    Some(n) => rational_to_fourier(&r, n),
                    None => rational_to_fourier_auto(&r),
                }
            }
            SymbolSpec::Fourier { coeffs } => {
                let u = FourierSymbol::new(to_c(coeffs))?;
                Ok(match n {
                    Some(n) if n > u.len() => u.resized(n),
                    _ => u,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_forms() {
        let s = SymbolSpec::parse(r#"{"type":"rational","num":[[0,0],[1,0]],"den":[[1,0],[-1,0],[0.25,0]]}"#).unwrap();
        let u = s.to_fourier(None).unwrap();
        assert!((u.coeffs()[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((u.coeffs()[2] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let f = SymbolSpec::from_fourier(&u);
        assert_eq!(SymbolSpec::parse(&f.to_json()).unwrap(), f);
        assert!(matches!(SymbolSpec::parse(r#"{"type":"poly"}"#), Err(Error::Config(_))));
    }
}
