//! Exact rational arithmetic over the corruption parameter.
//!
//! Integrating out the uniform marks leaves (corruption bit, compass slot)
//! per vertex, so every probability computed by the enumeration engine is a
//! sum of atom counts bucketed by corruption mass m, weighted by
//! p^m (1-p)^(M-m) over a power-of-d denominator. This module turns those
//! integer buckets into polynomials and exact values.

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// One-arm probability as an exact polynomial in the corruption parameter.
#[derive(Clone, Debug)]
pub struct ThetaPolynomial {
    spec: LatticeSpec,
    n: u32,
    /// coeffs[j] multiplies p^j.
    coeffs: Vec<BigRational>,
}

impl ThetaPolynomial {
    /// Assemble from per-mass hit counts: counts[m] atoms of corruption mass
    /// m evaluate to 1, each carrying weight p^m (1-p)^(sites-m) / d^sites.
    pub(crate) fn from_mass_counts(
        spec: LatticeSpec,
        n: u32,
        counts: &[u64],
        sites: usize,
        arity: usize,
    ) -> Self {
        debug_assert_eq!(counts.len(), sites + 1);
        let mut numer = vec![BigInt::zero(); sites + 1];
        for m in 0..=sites {
            if counts[m] == 0 {
                continue;
            }
            let c = BigInt::from(counts[m]);
            // p^m (1-p)^(sites-m) = sum_i C(sites-m, i) (-1)^i p^(m+i).
            for i in 0..=(sites - m) {
                let term = &c * binom(sites - m, i);
                if i % 2 == 0 {
                    numer[m + i] += term;
                } else {
                    numer[m + i] -= term;
                }
            }
        }
        let den = BigInt::from(arity).pow(sites as u32);
        let coeffs = numer
            .into_iter()
            .map(|c| BigRational::new(c, den.clone()))
            .collect();
        ThetaPolynomial { spec, n, coeffs }
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn radius(&self) -> u32 {
        self.n
    }

    /// Degree of the polynomial after dropping trailing zero coefficients.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coefficient_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn evaluate(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c;
        }
        acc
    }

    pub fn evaluate_f64(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * p + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    pub fn derivative_at(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for j in (1..self.coeffs.len()).rev() {
            acc = acc * p + &self.coeffs[j] * BigRational::from_integer(j.into());
        }
        acc
    }
}

pub(crate) fn binom(n: usize, k: usize) -> BigInt {
    num::integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Exact value of sum_m counts[m] p^m (1-p)^(deg-m) / den.
pub(crate) fn mass_basis_value(
    counts: &[u64],
    deg: usize,
    den: &BigInt,
    p: &BigRational,
) -> BigRational {
    debug_assert!(counts.len() <= deg + 1);
    let q = BigRational::one() - p;
    let mut p_pow = vec![BigRational::one(); deg + 1];
    let mut q_pow = vec![BigRational::one(); deg + 1];
    for i in 1..=deg {
        p_pow[i] = &p_pow[i - 1] * p;
        q_pow[i] = &q_pow[i - 1] * &q;
    }
    let mut acc = BigRational::zero();
    for (m, &c) in counts.iter().enumerate() {
        if c != 0 {
            acc += BigRational::from_integer(c.into()) * &p_pow[m] * &q_pow[deg - m];
        }
    }
    acc / BigRational::from_integer(den.clone())
}

/// Parse "a/b", an integer, or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parameter(format!("cannot parse '{s}' as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parameter(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') {
            -1
        } else {
            1
        };
        let i: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let whole = i * &scale + BigInt::from(sign) * f;
        return Ok(BigRational::new(whole, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Probability-range check shared by the oracle entry points.
pub(crate) fn check_probability(p: &BigRational) -> Result<()> {
    if p.is_negative() || p > &BigRational::one() {
        return Err(Error::Parameter(format!("p = {p} must lie in [0, 1]")));
    }
    Ok(())
}
