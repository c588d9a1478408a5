//! Maximize `min{(1-βd)²d, βd((m+2)⁻¹ - βd²/τ)/τ²}` over `(d, β)`.
//!
//! Arithmetic is fixed-point on big integers with 60 decimal digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

const DIGITS: usize = 60;

fn scale() -> BigInt {
    num_traits::pow(BigInt::from(10), DIGITS)
}

/// Signed fixed-point decimal with `DIGITS` fractional digits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dec(BigInt);

impl Dec {
    pub fn zero() -> Self {
        Dec(BigInt::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Dec(BigInt::from(n) * scale())
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Dec::from_rational(&BigRational::new(n.into(), d.into()))
    }

    /// Rounded to nearest.
    pub fn from_rational(x: &BigRational) -> Self {
        let num = x.numer() * scale() * BigInt::from(2) + x.denom();
        Dec(num.div_floor(&(x.denom() * BigInt::from(2))))
    }

    pub fn from_f64(x: f64) -> Self {
        Dec::from_rational(&BigRational::from_float(x).expect("finite"))
    }

    /// Exact value of this decimal.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.0.clone(), scale())
    }

    /// Rational with `sig` significant digits.
    pub fn round_sig(&self, sig: u32) -> BigRational {
        let s = self.0.abs().to_string();
        let digits = s.len() as i64;
        let drop = (digits - sig as i64).max(0) as usize;
        let unit = num_traits::pow(BigInt::from(10), drop);
        let two = BigInt::from(2);
        let q = (&self.0 * &two + &unit).div_floor(&(&unit * &two)) * &unit;
        BigRational::new(q, scale())
    }

    pub fn to_f64(&self) -> f64 {
        crate::ratcore::to_f64(&self.to_rational())
    }

    pub fn abs(&self) -> Self {
        Dec(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.0.is_negative(), "sqrt of negative");
        Dec(Roots::sqrt(&(&self.0 * scale())))
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn min(self, o: Self) -> Self {
        if o < self {
            o
        } else {
            self
        }
    }

    /// Decimal string with `n` fractional digits (truncated toward zero).
    pub fn to_string_digits(&self, n: usize) -> String {
        let neg = self.0.is_negative();
        let a = self.0.abs();
        let (ip, fp) = a.div_rem(&scale());
        let fs = format!("{:0>width$}", fp.to_string(), width = DIGITS);
        let sign = if neg { "-" } else { "" };
        format!("{sign}{ip}.{}", &fs[..n.min(DIGITS)])
    }
}

impl fmt::Display for Dec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_digits(40))
    }
}

impl Add for &Dec {
    type Output = Dec;
    fn add(self, o: &Dec) -> Dec {
        Dec(&self.0 + &o.0)
    }
}

impl Sub for &Dec {
    type Output = Dec;
    fn sub(self, o: &Dec) -> Dec {
        Dec(&self.0 - &o.0)
    }
}

impl Mul for &Dec {
    type Output = Dec;
    fn mul(self, o: &Dec) -> Dec {
        Dec((&self.0 * &o.0).div_floor(&scale()))
    }
}

impl Div for &Dec {
    type Output = Dec;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Dec) -> Dec {
        Dec((&self.0 * scale()).div_floor(&o.0))
    }
}

impl Neg for &Dec {
    type Output = Dec;
    fn neg(self) -> Dec {
        Dec(-&self.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Dec {
            type Output = Dec;
            fn $f(self, o: Dec) -> Dec { (&self).$f(&o) }
        }
        impl $tr<&Dec> for Dec {
            type Output = Dec;
            fn $f(self, o: &Dec) -> Dec { (&self).$f(o) }
        }
        impl $tr<Dec> for &Dec {
            type Output = Dec;
            fn $f(self, o: Dec) -> Dec { self.$f(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

fn c_of(m: u64) -> Dec {
    Dec::from_ratio(1, m as i64 + 2)
}

/// Both branches; `None` when `(d, β)` violates `0 < d <= 1`, `0 <= β < min{τ/(d²(m+2)), 1/d}`.
pub fn branches(d: &Dec, beta: &Dec, m: u64, tau: &Dec) -> Option<(Dec, Dec)> {
    let one = Dec::from_int(1);
    if d <= &Dec::zero() || d > &one || beta.is_negative() {
        return None;
    }
    let bd = beta * d;
    if bd >= one {
        return None;
    }
    let d2 = d * d;
    let m2 = Dec::from_int(m as i64 + 2);
    if beta * &(&d2 * &m2) >= *tau {
        return None;
    }
    let u = &one - &bd;
    let b1 = &(&u * &u) * d;
    let inner = c_of(m) - &(&bd * d) / tau;
    let b2 = &(&bd * &inner) / &(tau * tau);
    Some((b1, b2))
}

/// `min` of the two branches with `τ = 1`; `None` stands for the infeasible sentinel.
pub fn objective(d: &Dec, beta: &Dec, m: u64) -> Option<Dec> {
    objective_tau(d, beta, m, &Dec::from_int(1))
}

pub fn objective_tau(d: &Dec, beta: &Dec, m: u64, tau: &Dec) -> Option<Dec> {
    branches(d, beta, m, tau).map(|(a, b)| a.min(b))
}

/// Smaller root of `β²d²(1 + τ⁻³) - β(2d + (m+2)⁻¹τ⁻²) + 1 = 0`, which
/// equates the two branches. With `τ = 1` this is `2β²d² - β(2d + (m+2)⁻¹) + 1 = 0`.
pub fn beta_equilibrium_tau(d: &Dec, m: u64, tau: &Dec) -> Option<Dec> {
    let one = Dec::from_int(1);
    let t3 = &(tau * tau) * tau;
    let a = &(d * d) * &(&one + &(&one / &t3));
    let b = &(d + d) + &(c_of(m) / &(tau * tau));
    let disc = &(&b * &b) - &(&Dec::from_int(4) * &a);
    if disc.is_negative() || a <= Dec::zero() {
        return None;
    }
    Some(&(&b - &disc.sqrt()) / &(&a + &a))
}

pub fn beta_equilibrium(d: &Dec, m: u64) -> Option<Dec> {
    beta_equilibrium_tau(d, m, &Dec::from_int(1))
}

/// `(2d + (m+2)⁻¹)² - 8d²`; for `m = 50` this is `d/13 + 1/52² - 4d²` scaled by 4.
pub fn discriminant(d: &Dec, m: u64) -> Dec {
    let b = &(d + d) + &c_of(m);
    &(&b * &b) - &(&Dec::from_int(8) * &(d * d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub m: u64,
    #[serde(with = "dec_str")]
    pub tau: Dec,
    #[serde(with = "dec_str")]
    pub d_star: Dec,
    #[serde(with = "dec_str")]
    pub beta_star: Dec,
    #[serde(with = "dec_str")]
    pub bound: Dec,
    #[serde(with = "dec_str")]
    pub branch_gap: Dec,
    /// 2-D neighbourhood search found nothing better than `bound` by more than 1e-12 relative.
    pub refinement_ok: bool,
    /// Both feasibility constraints strict at the optimum.
    pub interior: bool,
    pub decimals: String,
}

mod dec_str {
    use super::Dec;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Dec, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string_digits(40))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Dec, D::Error> {
        let s = String::deserialize(d)?;
        let r = crate::ratcore::parse_rational(&s).map_err(D::Error::custom)?;
        Ok(Dec::from_rational(&r))
    }
}

fn h(d: &Dec, m: u64, tau: &Dec) -> Option<Dec> {
    let b = beta_equilibrium_tau(d, m, tau)?;
    objective_tau(d, &b, m, tau)
}

pub fn solve(m: u64) -> OptResult {
    solve_with_tau(m, &Dec::from_int(1))
}

/// Golden-section search on `d` along the equilibrium curve, then a 2-D
/// neighbourhood check.
pub fn solve_with_tau(m: u64, tau: &Dec) -> OptResult {
    assert!(m >= 1);
    // coarse bracket on a log grid
    let grid: Vec<Dec> = (0..=600).map(|i| Dec::from_f64(10f64.powf(-6.0 + 6.0 * i as f64 / 600.0))).collect();
    let vals: Vec<Option<Dec>> = grid.iter().map(|d| h(d, m, tau)).collect();
    let (ibest, _) = vals
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("no feasible d");
    let mut lo = grid[ibest.saturating_sub(1)].clone();
    let mut hi = grid[(ibest + 1).min(grid.len() - 1)].clone();
    let invphi = (Dec::from_int(5).sqrt() - Dec::from_int(1)) / Dec::from_int(2);
    let eval = |d: &Dec| h(d, m, tau).unwrap_or(Dec::from_int(-1));
    let mut x1 = &hi - &(&invphi * &(&hi - &lo));
    let mut x2 = &lo + &(&invphi * &(&hi - &lo));
    let (mut f1, mut f2) = (eval(&x1), eval(&x2));
    for _ in 0..260 {
        if f1 < f2 {
            lo = x1;
            x1 = x2.clone();
            f1 = f2.clone();
            x2 = &lo + &(&invphi * &(&hi - &lo));
            f2 = eval(&x2);
        } else {
            hi = x2;
            x2 = x1.clone();
            f2 = f1.clone();
            x1 = &hi - &(&invphi * &(&hi - &lo));
            f1 = eval(&x1);
        }
    }
    let d = (&lo + &hi) / Dec::from_int(2);
    let beta = beta_equilibrium_tau(&d, m, tau).expect("equilibrium exists at optimum");
    let (b1, b2) = branches(&d, &beta, m, tau).expect("optimum feasible");
    let bound = b1.clone().min(b2.clone());
    let branch_gap = (&b1 - &b2).abs();

    // neighbourhood check at several scales
    let tol = &bound * &Dec::from_rational(&BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 12)));
    let mut refinement_ok = true;
    for e in [2i32, 4, 6, 8] {
        let step = Dec::from_f64(10f64.powi(-e));
        for i in -3i64..=3 {
            for j in -3i64..=3 {
                let dd = &d * &(Dec::from_int(1) + &(&Dec::from_int(i) * &step));
                let bb = &beta * &(Dec::from_int(1) + &(&Dec::from_int(j) * &step));
                if let Some(v) = objective_tau(&dd, &bb, m, tau) {
                    if v > &bound + &tol {
                        refinement_ok = false;
                    }
                }
            }
        }
    }
    let one = Dec::from_int(1);
    let interior = &beta * &d < one && &beta * &(&(&d * &d) * &Dec::from_int(m as i64 + 2)) < *tau;
    OptResult {
        m,
        tau: tau.clone(),
        d_star: d,
        beta_star: beta,
        bound,
        branch_gap,
        refinement_ok,
        interior,
        decimals: "approximate, 40 digits shown".into(),
    }
}

/// Rational `(d, β)` near an optimum, rounded to `sig` significant digits, for
/// use as exact construction parameters.
pub fn rational_params(r: &OptResult, sig: u32) -> (BigRational, BigRational) {
    (r.d_star.round_sig(sig), r.beta_star.round_sig(sig))
}

impl PartialOrd<BigRational> for Dec {
    fn partial_cmp(&self, other: &BigRational) -> Option<Ordering> {
        self.to_rational().partial_cmp(other)
    }
}

impl PartialEq<BigRational> for Dec {
    fn eq(&self, other: &BigRational) -> bool {
        self.to_rational() == *other
    }
}
