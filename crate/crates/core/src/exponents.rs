//! Exact rational algebra for the scaling exponents of the kinetic nonlocal
//! Gagliardo–Nirenberg inequalities.
//!
//! Everything in this module is computed with arbitrary-precision rationals:
//! the identities between exponents hold exactly, not to tolerance. Floating
//! point appears only at the boundary to the numerics modules via
//! [`to_f64`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// Shorthand for building a rational from machine integers.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse `"num/den"` or `"num"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::InvalidParameter(format!("cannot parse rational from {s:?}"));
    match parts.as_slice() {
        [n] => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
        [n, d] => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        _ => Err(bad()),
    }
}

/// Render a rational as the exact string `"num/den"`.
pub fn rational_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Convert to `f64` at the boundary to the numerics modules.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

/// Container for `(d, sigma, p)` and the conjugate exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentContext {
    pub d: u32,
    pub sigma: BigRational,
    pub p: BigRational,
    pub p_conj: BigRational,
}

impl ExponentContext {
    pub fn new(d: u32, sigma: BigRational, p: BigRational) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        if sigma <= BigRational::zero() || sigma >= BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} must lie in (0, 1)",
                rational_string(&sigma)
            )));
        }
        if p <= BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "p = {} must exceed 1",
                rational_string(&p)
            )));
        }
        let p_conj = &p / (&p - BigRational::one());
        Ok(ExponentContext { d, sigma, p, p_conj })
    }

    fn d_rat(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.d))
    }
}

/// Derived exponents of the main theorems and their corollaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedExponents {
    pub p_lo: BigRational,
    pub p_hi: BigRational,
    pub q: BigRational,
    pub rho: BigRational,
    pub a_balance: BigRational,
    pub b_balance: BigRational,
    pub a_exp: BigRational,
    pub b_exp: BigRational,
    pub gamma: BigRational,
}

/// The homogeneous dimension `Q` and the critical integrability indices.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelIndices {
    pub alpha: BigRational,
    pub beta: BigRational,
    pub capital_q: BigRational,
    pub theta1: BigRational,
    pub theta2: BigRational,
}

/// Admissible range of `p`: `(2 - 2 sigma/(2d + d sigma + 2 sigma), 2 + 2/d)`.
pub fn admissible_p_range(d: u32, sigma: &BigRational) -> Result<(BigRational, BigRational)> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    if *sigma <= BigRational::zero() || *sigma >= BigRational::one() {
        return Err(Error::InvalidParameter("sigma must lie in (0, 1)".into()));
    }
    let two = rat(2, 1);
    let dr = BigRational::from_integer(BigInt::from(d));
    let p_lo = &two - &two * sigma / (&two * &dr + &dr * sigma + &two * sigma);
    let p_hi = &two + &two / &dr;
    Ok((p_lo, p_hi))
}

fn require_in_range(ctx: &ExponentContext, strict: bool) -> Result<()> {
    let (lo, hi) = admissible_p_range(ctx.d, &ctx.sigma)?;
    let inside = if strict {
        ctx.p > lo && ctx.p < hi
    } else {
        ctx.p >= lo && ctx.p <= hi
    };
    if !inside {
        return Err(Error::InvalidParameter(format!(
            "p = {} outside admissible range ({}, {})",
            rational_string(&ctx.p),
            rational_string(&lo),
            rational_string(&hi)
        )));
    }
    Ok(())
}

/// `q = 2 p (d sigma + d + sigma) / (d (p sigma + 2))`.
pub fn gain_exponent_q(ctx: &ExponentContext) -> Result<BigRational> {
    require_in_range(ctx, false)?;
    let two = rat(2, 1);
    let d = ctx.d_rat();
    let num = &two * &ctx.p * (&d * &ctx.sigma + &d + &ctx.sigma);
    let den = &d * (&ctx.p * &ctx.sigma + &two);
    Ok(num / den)
}

/// `rho = (d(p-2) + 2 p sigma + 2) / (2 (d(p-2) + p sigma))`, the ratio
/// `beta/alpha` that balances the two integrated-kernel exponents.
pub fn critical_ratio_rho(ctx: &ExponentContext) -> Result<BigRational> {
    let two = rat(2, 1);
    let d = ctx.d_rat();
    let den_core = &d * (&ctx.p - &two) + &ctx.p * &ctx.sigma;
    if den_core.is_zero() {
        return Err(Error::InvalidParameter(
            "d(p-2) + p sigma = 0: rho undefined".into(),
        ));
    }
    let num = &d * (&ctx.p - &two) + &two * &ctx.p * &ctx.sigma + &two;
    Ok(num / (&two * den_core))
}

/// The `nu`-balancing exponents `A`, `B` and the resulting multiplicative
/// exponents `B/(B-A)` and `-A/(B-A)`, together with the corollary exponent
/// `Gamma`.
pub fn balance_exponents(ctx: &ExponentContext) -> Result<DerivedExponents> {
    require_in_range(ctx, true)?;
    let (p_lo, p_hi) = admissible_p_range(ctx.d, &ctx.sigma)?;
    let q = gain_exponent_q(ctx)?;
    let rho = critical_ratio_rho(ctx)?;
    let one = BigRational::one();
    let d1 = ctx.d_rat() + &one;
    let inv = |x: &BigRational| &one / x;

    let a_balance = &d1 * (inv(&q) - inv(&ctx.p));
    let b_balance = &one + &d1 * (inv(&q) - inv(&ctx.p_conj));
    if !(a_balance.is_negative() && b_balance.is_positive()) {
        return Err(Error::InvalidParameter(format!(
            "balance exponents have wrong signs: A = {}, B = {}",
            rational_string(&a_balance),
            rational_string(&b_balance)
        )));
    }
    let span = &b_balance - &a_balance;
    let a_exp = &b_balance / &span;
    let b_exp = -&a_balance / &span;

    // Gamma = (p sigma (d+1) + 2d) / (2 (d sigma + d + sigma))
    let two = rat(2, 1);
    let d = ctx.d_rat();
    let gamma =
        (&ctx.p * &ctx.sigma * &d1 + &two * &d) / (&two * (&d * &ctx.sigma + &d + &ctx.sigma));

    Ok(DerivedExponents {
        p_lo,
        p_hi,
        q,
        rho,
        a_balance,
        b_balance,
        a_exp,
        b_exp,
        gamma,
    })
}

/// `Q = (2 beta - alpha) d + alpha` and the critical indices
/// `theta_1 = Q/(Q - sigma(beta-alpha))`,
/// `theta_2 = Q/(Q - alpha + sigma(beta-alpha))`.
pub fn kernel_indices(
    d: u32,
    sigma: &BigRational,
    alpha: &BigRational,
    beta: &BigRational,
) -> Result<KernelIndices> {
    if *alpha <= BigRational::zero() || beta <= alpha {
        return Err(Error::InvalidParameter(
            "need 0 < alpha < beta for kernel indices".into(),
        ));
    }
    let one = BigRational::one();
    let window_hi = alpha * (&one + &one / sigma);
    if *beta >= window_hi {
        return Err(Error::InvalidParameter(format!(
            "beta = {} outside admissible window (alpha, alpha(1 + 1/sigma)) = ({}, {})",
            rational_string(beta),
            rational_string(alpha),
            rational_string(&window_hi)
        )));
    }
    let d = BigRational::from_integer(BigInt::from(d));
    let two = rat(2, 1);
    let capital_q = (&two * beta - alpha) * &d + alpha;
    let gap = sigma * (beta - alpha);
    let theta1 = &capital_q / (&capital_q - &gap);
    let theta2 = &capital_q / (&capital_q - alpha + &gap);
    Ok(KernelIndices {
        alpha: alpha.clone(),
        beta: beta.clone(),
        capital_q,
        theta1,
        theta2,
    })
}

/// Every derived exponent as an exact `"num/den"` string, as emitted by the
/// `exponents` CLI subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentTable {
    pub d: u32,
    pub sigma: String,
    pub p: String,
    pub p_conj: String,
    pub p_lo: String,
    pub p_hi: String,
    pub q: String,
    pub rho: String,
    pub big_a: String,
    pub big_b: String,
    pub a_exp: String,
    pub b_exp: String,
    pub gamma: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capital_q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta2: Option<String>,
}

/// Assemble the full table for `(d, sigma, p)` and optionally `(alpha, beta)`.
pub fn exponent_table(
    ctx: &ExponentContext,
    dilation: Option<(&BigRational, &BigRational)>,
) -> Result<ExponentTable> {
    let der = balance_exponents(ctx)?;
    let indices = match dilation {
        Some((alpha, beta)) => Some(kernel_indices(ctx.d, &ctx.sigma, alpha, beta)?),
        None => None,
    };
    Ok(ExponentTable {
        d: ctx.d,
        sigma: rational_string(&ctx.sigma),
        p: rational_string(&ctx.p),
        p_conj: rational_string(&ctx.p_conj),
        p_lo: rational_string(&der.p_lo),
        p_hi: rational_string(&der.p_hi),
        q: rational_string(&der.q),
        rho: rational_string(&der.rho),
        big_a: rational_string(&der.a_balance),
        big_b: rational_string(&der.b_balance),
        a_exp: rational_string(&der.a_exp),
        b_exp: rational_string(&der.b_exp),
        gamma: rational_string(&der.gamma),
        alpha: indices.as_ref().map(|i| rational_string(&i.alpha)),
        beta: indices.as_ref().map(|i| rational_string(&i.beta)),
        capital_q: indices.as_ref().map(|i| rational_string(&i.capital_q)),
        theta1: indices.as_ref().map(|i| rational_string(&i.theta1)),
        theta2: indices.as_ref().map(|i| rational_string(&i.theta2)),
    })
}

/// The two exponent relations solved by `rho`, checked exactly:
/// `1/q + sigma(rho-1)/((2 rho - 1) d + 1) = 1/p` and
/// `1/q + (1 - sigma(rho-1))/((2 rho - 1) d + 1) = 1/p'`.
pub fn exponent_relations_hold(ctx: &ExponentContext) -> Result<bool> {
    let q = gain_exponent_q(ctx)?;
    let rho = critical_ratio_rho(ctx)?;
    let one = BigRational::one();
    let two = rat(2, 1);
    let d = ctx.d_rat();
    let denom = (&two * &rho - &one) * &d + &one;
    let lhs_v = &one / &q + &ctx.sigma * (&rho - &one) / &denom;
    let lhs_s = &one / &q + (&one - &ctx.sigma * (&rho - &one)) / &denom;
    Ok(lhs_v == &one / &ctx.p && lhs_s == &one / &ctx.p_conj)
}

/// Young-exponent compatibility of the critical indices:
/// `1/q + 1 = 1/theta_1 + 1/p` and `1/q + 1 = 1/theta_2 + 1/p'`, exactly,
/// when `beta/alpha = rho`.
pub fn theta_relations_hold(ctx: &ExponentContext, alpha: &BigRational) -> Result<bool> {
    let rho = critical_ratio_rho(ctx)?;
    let beta = alpha * &rho;
    let idx = kernel_indices(ctx.d, &ctx.sigma, alpha, &beta)?;
    let q = gain_exponent_q(ctx)?;
    let one = BigRational::one();
    let lhs = &one / &q + &one;
    Ok(lhs == &one / &idx.theta1 + &one / &ctx.p && lhs == &one / &idx.theta2 + &one / &ctx.p_conj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32, s: (i64, i64), p: (i64, i64)) -> ExponentContext {
        ExponentContext::new(d, rat(s.0, s.1), rat(p.0, p.1)).unwrap()
    }

    #[test]
    fn admissible_range_d1_sigma_half() {
        let (lo, hi) = admissible_p_range(1, &rat(1, 2)).unwrap();
        assert_eq!(lo, rat(12, 7));
        assert_eq!(hi, rat(4, 1));
    }

    #[test]
    fn admissible_range_d2_sigma_half() {
        let (lo, hi) = admissible_p_range(2, &rat(1, 2)).unwrap();
        assert_eq!(lo, rat(11, 6));
        assert_eq!(hi, rat(3, 1));
    }

    #[test]
    fn admissible_range_rejects_bad_sigma() {
        assert!(admissible_p_range(1, &rat(3, 2)).is_err());
        assert!(admissible_p_range(1, &rat(0, 1)).is_err());
        assert!(admissible_p_range(0, &rat(1, 2)).is_err());
    }

    #[test]
    fn gain_exponent_reference_values() {
        assert_eq!(gain_exponent_q(&ctx(1, (1, 2), (2, 1))).unwrap(), rat(8, 3));
        assert_eq!(gain_exponent_q(&ctx(2, (1, 2), (2, 1))).unwrap(), rat(7, 3));
        // boundary p = 2 + 2/d gives q = p
        assert_eq!(gain_exponent_q(&ctx(1, (1, 2), (4, 1))).unwrap(), rat(4, 1));
    }

    #[test]
    fn gain_exponent_rejects_outside_range() {
        assert!(gain_exponent_q(&ctx(1, (1, 2), (9, 2))).is_err());
    }

    #[test]
    fn rho_reference_values() {
        assert_eq!(
            critical_ratio_rho(&ctx(1, (1, 2), (2, 1))).unwrap(),
            rat(2, 1)
        );
        // rho = 1 exactly at the upper boundary p = 2 + 2/d
        assert_eq!(
            critical_ratio_rho(&ctx(1, (1, 2), (4, 1))).unwrap(),
            rat(1, 1)
        );
    }

    #[test]
    fn balance_reference_values() {
        let der = balance_exponents(&ctx(1, (1, 2), (2, 1))).unwrap();
        assert_eq!(der.a_exp, rat(3, 4));
        assert_eq!(der.b_exp, rat(1, 4));
        assert_eq!(der.gamma, rat(1, 1));
        assert!(der.a_balance.is_negative() && der.b_balance.is_positive());
        // Gamma = a + (p-1) b
        let p = rat(2, 1);
        assert_eq!(
            der.gamma,
            &der.a_exp + (&p - BigRational::one()) * &der.b_exp
        );
    }

    #[test]
    fn kernel_indices_reference_values() {
        let idx = kernel_indices(1, &rat(1, 2), &rat(1, 1), &rat(2, 1)).unwrap();
        assert_eq!(idx.capital_q, rat(4, 1));
        assert_eq!(idx.theta1, rat(8, 7));
        assert_eq!(idx.theta2, rat(8, 7));

        let idx = kernel_indices(2, &rat(1, 2), &rat(1, 1), &rat(3, 2)).unwrap();
        assert_eq!(idx.capital_q, rat(5, 1));
        assert_eq!(idx.theta1, rat(20, 19));

        // beta at the edge of the admissibility window is rejected
        assert!(kernel_indices(1, &rat(1, 2), &rat(1, 1), &rat(3, 1)).is_err());
    }

    #[test]
    fn exponent_relations_exact_on_sweep() {
        let (lo, hi) = admissible_p_range(1, &rat(1, 2)).unwrap();
        for k in 1..=50i64 {
            let p = &lo + (&hi - &lo) * rat(k, 51);
            let c = ExponentContext::new(1, rat(1, 2), p.clone()).unwrap();
            assert!(exponent_relations_hold(&c).unwrap(), "p = {p}");
            let der = balance_exponents(&c).unwrap();
            assert_eq!(&der.a_exp + &der.b_exp, BigRational::one());
            assert_eq!(
                der.gamma,
                &der.a_exp + (&p - BigRational::one()) * &der.b_exp
            );
            // q > p iff p < 2 + 2/d, q > p' iff p > p_lo: strict inside
            let q = gain_exponent_q(&c).unwrap();
            assert!(q > c.p && q > c.p_conj);
            assert!(theta_relations_hold(&c, &rat(1, 1)).unwrap());
            let rho = critical_ratio_rho(&c).unwrap();
            assert!(rho > BigRational::one());
            assert!(rho < BigRational::one() + &BigRational::one() / &c.sigma);
        }
    }

    #[test]
    fn parse_and_render_roundtrip() {
        let x = parse_rational("12/7").unwrap();
        assert_eq!(x, rat(12, 7));
        assert_eq!(rational_string(&x), "12/7");
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }
}
