//! Nested-interval construction of a pair `(ξ, ζ)` from iterated witnesses,
//! with exact lower bounds on `Q_k · min_{n<=Q_k} ‖nξ‖‖nζ‖`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{min_product, MinHit};
use crate::optimize::{rational_params, solve_with_tau, Dec};
use crate::ratcore::{floor, rat, rat_int, RatInterval};
use crate::witness::{find_witnesses_with, Quadruple, SearchConfig, Strategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuilderParams {
    pub m: u64,
    #[serde(with = "crate::json::rational")]
    pub tau: BigRational,
    #[serde(with = "crate::json::rational")]
    pub d: BigRational,
    #[serde(with = "crate::json::rational")]
    pub alpha: BigRational,
    #[serde(with = "crate::json::rational")]
    pub beta: BigRational,
    pub steps: usize,
    /// Starting intervals and the level-0 prime range.
    pub search: SearchConfig,
    /// Later levels search successive windows `[T, 4T]` up to this bound.
    pub max_prime: u64,
}

pub const DEFAULT_MAX_PRIME: u64 = 10_000_000_000_000;

impl BuilderParams {
    /// `(d, β)` from the optimizer for `(m, τ)` and `α = β(1 - 10⁻⁶)`.
    #[allow(non_snake_case)]
    pub fn from_optimizer(m: u64, tau: BigRational, steps: usize, I0: RatInterval, J0: RatInterval, T_lo: u64, T_hi: u64) -> Self {
        let opt = solve_with_tau(m, &Dec::from_rational(&tau));
        let (d, beta) = rational_params(&opt, 12);
        let alpha = &beta * rat(999_999, 1_000_000);
        let search = SearchConfig::new(I0, J0, tau.clone(), m, T_lo, T_hi);
        Self { m, tau, d, alpha, beta, steps, search, max_prime: DEFAULT_MAX_PRIME }
    }

    /// `C = (m+2)⁻¹ - β τ⁻¹ d²`
    pub fn c_constant(&self) -> BigRational {
        rat_int(self.m + 2).recip() - &self.beta / &self.tau * &self.d * &self.d
    }
}

/// Every violated constraint, by name; empty when the parameters are admissible.
pub fn validate_params(p: &BuilderParams) -> Vec<String> {
    let mut v = Vec::new();
    let one = BigRational::one();
    if p.m == 0 {
        v.push("m ≥ 1".to_string());
    }
    if p.tau < one {
        v.push("τ ≥ 1".to_string());
    }
    if !p.d.is_positive() || p.d > one {
        v.push("d ∈ (0,1]".to_string());
    }
    if !p.alpha.is_positive() {
        v.push("α > 0".to_string());
    }
    if p.alpha >= p.beta {
        v.push("α < β".to_string());
    }
    if p.d.is_positive() && p.beta >= &p.tau / (&p.d * &p.d * rat_int(p.m + 2)) {
        v.push("β < τ/(d²(m+2))".to_string());
    }
    if &p.beta * &p.d >= one {
        v.push("(1−βd) ≤ 0".to_string());
    }
    if p.tau.is_positive() && !p.c_constant().is_positive() {
        v.push("(m+2)⁻¹ − βτ⁻¹d² > 0".to_string());
    }
    v
}

/// `min{(1-βd)²d, αd((m+2)⁻¹ - βτ⁻¹d²)/τ²}`
pub fn analytic_bound(p: &BuilderParams) -> BigRational {
    let a = &one_minus(&(&p.beta * &p.d));
    let first = a * a * &p.d;
    let second = &p.alpha * &p.d * p.c_constant() / (&p.tau * &p.tau);
    first.min(second)
}

fn one_minus(x: &BigRational) -> BigRational {
    BigRational::one() - x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(flatten)]
    pub quadruple: Quadruple,
    #[serde(rename = "Qk", with = "crate::json::rational")]
    pub q_k: BigRational,
    /// The intervals after this step.
    #[serde(rename = "I", with = "crate::json::interval")]
    pub i_next: RatInterval,
    #[serde(rename = "J", with = "crate::json::interval")]
    pub j_next: RatInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionState {
    pub level: usize,
    #[serde(rename = "I", with = "crate::json::interval")]
    pub i: RatInterval,
    #[serde(rename = "J", with = "crate::json::interval")]
    pub j: RatInterval,
    pub history: Vec<StepRecord>,
}

impl ConstructionState {
    pub fn start(p: &BuilderParams) -> Self {
        Self { level: 0, i: p.search.I.clone(), j: p.search.J.clone(), history: Vec::new() }
    }
}

/// `[p/q + α q⁻³, p/q + β q⁻³]`
pub fn right_interval(p: u64, q: u64, alpha: &BigRational, beta: &BigRational) -> RatInterval {
    let c = rat(p as i64, q as i64);
    let q3 = rat_int(BigInt::from(q).pow(3));
    RatInterval::new(&c + alpha / &q3, &c + beta / &q3).expect("alpha <= beta")
}

fn fits(p: u64, q: u64, beta: &BigRational, outer: &RatInterval) -> bool {
    let q3 = rat_int(BigInt::from(q).pow(3));
    rat(p as i64, q as i64) + beta / q3 <= *outer.hi()
}

/// Smallest `T` with a fraction of denominator about `T` expected in an interval of this width.
fn window_start(width: &BigRational) -> u64 {
    let inv = width.recip();
    let t = floor(&inv).sqrt() / 2u32;
    t.to_u64().unwrap_or(u64::MAX).max(2)
}

pub fn step(state: &ConstructionState, p: &BuilderParams) -> Result<ConstructionState> {
    let accept = |w: &Quadruple| fits(w.p, w.q, &p.beta, &state.i) && fits(w.r, w.s, &p.beta, &state.j);
    let mut cfg = p.search.clone();
    cfg.I = state.i.clone();
    cfg.J = state.j.clone();
    cfg.tau = p.tau.clone();
    cfg.m = p.m;
    cfg.max_witnesses = Some(1);
    let first = if state.level == 0 { p.search.T_lo } else { window_start(&state.i.width().min(state.j.width())) };
    let ranges: Vec<(u64, u64)> = if state.level == 0 {
        vec![(p.search.T_lo, p.search.T_hi)]
    } else {
        let mut t = first;
        let mut out = Vec::new();
        while t <= p.max_prime {
            let hi = t.saturating_mul(4).min(p.max_prime);
            out.push((t, hi));
            if hi == p.max_prime {
                break;
            }
            t = hi;
        }
        cfg.strategy = Strategy::FractionScan;
        out
    };
    for &(lo, hi) in &ranges {
        cfg.T_lo = lo;
        cfg.T_hi = hi;
        if let Some(w) = find_witnesses_with(&cfg, accept)?.into_iter().next() {
            let quad = w.quadruple;
            let q_k = &p.d * rat_int(BigInt::from(quad.q) * BigInt::from(quad.s)) / &p.tau;
            let i_next = right_interval(quad.p, quad.q, &p.alpha, &p.beta);
            let j_next = right_interval(quad.r, quad.s, &p.alpha, &p.beta);
            if !state.i.contains_interval(&i_next) || !state.j.contains_interval(&j_next) {
                return Err(Error::Verification(format!("level {} intervals do not nest", state.level + 1)));
            }
            let mut history = state.history.clone();
            history.push(StepRecord { quadruple: quad, q_k, i_next: i_next.clone(), j_next: j_next.clone() });
            return Ok(ConstructionState { level: state.level + 1, i: i_next, j: j_next, history });
        }
    }
    let t_hi = ranges.last().map_or(p.max_prime, |r| r.1);
    Err(Error::WitnessNotFound { level: state.level, t_lo: first.to_string(), t_hi: t_hi.to_string() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Generic,
    MultipleOfPq,
    MultipleOfRs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseMin {
    pub case: Case,
    /// `None` when no `n <= Q_k` falls in this case.
    #[serde(with = "crate::json::bigint_opt")]
    pub n: Option<BigInt>,
    /// `Q_k` times the smallest product in this case.
    #[serde(with = "crate::json::rational_opt")]
    pub value: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepCertificate {
    pub k: usize,
    #[serde(rename = "Qk", with = "crate::json::rational")]
    pub q_k: BigRational,
    #[serde(with = "crate::json::rational")]
    pub analytic_bound: BigRational,
    #[serde(with = "crate::json::rational")]
    pub certified_lower: BigRational,
    #[serde(with = "crate::json::bigint_str")]
    pub argmin_n: BigInt,
    pub case: Case,
    pub case_breakdown: Vec<CaseMin>,
}

pub fn classify(n: &BigInt, quad: &Quadruple) -> Case {
    if (n % BigInt::from(quad.q)).is_zero() {
        Case::MultipleOfPq
    } else if (n % BigInt::from(quad.s)).is_zero() {
        Case::MultipleOfRs
    } else {
        Case::Generic
    }
}

/// Exact lower bound at level `k`, valid on the current enclosure rectangle.
pub fn certify(state: &ConstructionState, k: usize, p: &BuilderParams) -> Result<StepCertificate> {
    if k + 1 > state.history.len() {
        return Err(Error::Inconclusive(format!("level {k} needs {} steps, have {}", k + 1, state.history.len())));
    }
    let rec = &state.history[k];
    let quad = rec.quadruple;
    let n_max = floor(&rec.q_k);
    let boxes = [state.i.clone(), state.j.clone()];
    let total = min_product(&boxes, &n_max, |_| true)?.ok_or_else(|| Error::Inconclusive("Q_k < 1".into()))?;

    let (q, s) = (BigInt::from(quad.q), BigInt::from(quad.s));
    let scaled = |f: &BigInt| -> Result<Option<MinHit>> {
        let sub = [state.i.scale(f), state.j.scale(f)];
        Ok(min_product(&sub, &(&n_max / f), |_| true)?.map(|h| MinHit { value: h.value, n: h.n * f }))
    };
    let generic = min_product(&boxes, &n_max, |n| !(n % &q).is_zero() && !(n % &s).is_zero())?;
    let cases = [(Case::Generic, generic), (Case::MultipleOfPq, scaled(&q)?), (Case::MultipleOfRs, scaled(&s)?)];

    let best = cases.iter().filter_map(|(_, h)| h.as_ref()).min_by(|a, b| (&a.value, &a.n).cmp(&(&b.value, &b.n)));
    if best != Some(&total) {
        return Err(Error::Verification(format!("case minima do not reproduce the global minimum at level {k}")));
    }
    let certified_lower = &rec.q_k * &total.value;
    if !certified_lower.is_positive() {
        return Err(Error::Inconclusive(format!("enclosure too wide to certify level {k}; run more steps")));
    }
    let case_breakdown = cases
        .iter()
        .map(|(c, h)| CaseMin { case: *c, n: h.as_ref().map(|h| h.n.clone()), value: h.as_ref().map(|h| &rec.q_k * &h.value) })
        .collect();
    Ok(StepCertificate {
        k,
        q_k: rec.q_k.clone(),
        analytic_bound: analytic_bound(p),
        certified_lower,
        case: classify(&total.n, &quad),
        argmin_n: total.n,
        case_breakdown,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildResult {
    pub params: BuilderParams,
    pub status: String,
    pub steps: Vec<StepRecord>,
    pub certificates: Vec<StepCertificate>,
    #[serde(with = "crate::json::interval")]
    pub xi: RatInterval,
    #[serde(with = "crate::json::interval")]
    pub zeta: RatInterval,
}

pub fn run(p: &BuilderParams) -> Result<BuildResult> {
    let violations = validate_params(p);
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(format!("parameter constraints violated: {}", violations.join("; "))));
    }
    if p.tau <= BigRational::one() {
        return Err(Error::InvalidConfig("the construction needs τ > 1".into()));
    }
    if p.steps == 0 {
        return Err(Error::InvalidConfig("steps must be positive".into()));
    }
    let mut state = ConstructionState::start(p);
    for _ in 0..p.steps {
        state = step(&state, p)?;
    }
    let certificates = (0..p.steps - 1).map(|k| certify(&state, k, p)).collect::<Result<Vec<_>>>()?;
    let status = if certificates.is_empty() { "no certifiable level".to_string() } else { "ok".to_string() };
    Ok(BuildResult { params: p.clone(), status, steps: state.history.clone(), certificates, xi: state.i.clone(), zeta: state.j.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params() -> BuilderParams {
        let iv: RatInterval = "1/5:4/5".parse().unwrap();
        let beta = rat(271_023, 10_000);
        BuilderParams {
            m: 50,
            tau: rat(1, 1),
            d: rat(1465, 100_000),
            alpha: &beta - rat(1, 1_000_000_000),
            beta,
            steps: 1,
            search: SearchConfig::new(iv.clone(), iv, rat(1, 1), 50, 2, 100),
            max_prime: DEFAULT_MAX_PRIME,
        }
    }

    #[test]
    fn validation() {
        let p = paper_params();
        assert!(validate_params(&p).is_empty());
        let mut bad = p.clone();
        bad.alpha = bad.beta.clone();
        assert_eq!(validate_params(&bad), vec!["α < β".to_string()]);
        let mut bad = p.clone();
        bad.beta = bad.d.recip();
        assert!(validate_params(&bad).contains(&"(1−βd) ≤ 0".to_string()));
    }

    #[test]
    fn bounds() {
        let mut p = paper_params();
        p.alpha = p.beta.clone();
        assert!(analytic_bound(&p) > rat(5326, 1_000_000));
        p.beta = p.d.recip();
        assert!(analytic_bound(&p).is_zero());
    }
}
