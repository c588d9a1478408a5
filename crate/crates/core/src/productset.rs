//! Desk-scale checks of the finite-field product-set lemma.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{rat_int, to_f64};
use crate::zaremba::{is_prime, mod_inverse};

/// Erdős–Turán constant used for the reported bound.
pub const C_ET: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ProductSetInstance {
    pub N: u64,
    pub M: Vec<u64>,
    pub L: u64,
    pub H: u64,
}

impl ProductSetInstance {
    #[allow(non_snake_case)]
    pub fn new(N: u64, mut M: Vec<u64>, L: u64, H: u64) -> Result<Self> {
        if !is_prime(N) {
            return Err(Error::Domain(format!("N = {N} is not prime")));
        }
        if H == 0 || L + H > N - 1 {
            return Err(Error::InvalidConfig(format!("window {{{}..{}}} must lie in [1, N-1]", L + 1, L + H)));
        }
        M.sort_unstable();
        M.dedup();
        if M.is_empty() {
            return Err(Error::InvalidConfig("M must be nonempty".into()));
        }
        if M.iter().any(|&m| m >= N) {
            return Err(Error::InvalidConfig("elements of M must lie in [0, N-1]".into()));
        }
        Ok(Self { N, M, L, H })
    }

    /// Window `{⌊N/3⌋+1, ..., 2⌊N/3⌋}`.
    #[allow(non_snake_case)]
    pub fn middle_third(N: u64, M: Vec<u64>) -> Result<Self> {
        Self::new(N, M, N / 3, N / 3)
    }

    pub fn d(&self) -> f64 {
        self.H as f64 / self.N as f64
    }

    pub fn sigma_floor(&self) -> f64 {
        (self.M.len() as f64).ln() / (self.N as f64).ln()
    }

    fn in_window(&self, r: u64) -> bool {
        r > self.L && r <= self.L + self.H
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ExceptionalReport {
    pub E: Vec<u64>,
    pub card: usize,
    pub eta_fit: Option<f64>,
}

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// `e` in `[1, N-1]` with `e⁻¹ h mod N` outside `M` for every `h` in `targets`.
pub fn exceptional_for_targets(n: u64, m: &[u64], targets: &[u64]) -> Result<Vec<u64>> {
    if !is_prime(n) {
        return Err(Error::Domain(format!("N = {n} is not prime")));
    }
    let mut member = vec![false; n as usize];
    for &x in m {
        member[(x % n) as usize] = true;
    }
    Ok((1..n)
        .into_par_iter()
        .filter(|&e| {
            let inv = mod_inverse(e, n).expect("N prime");
            targets.iter().all(|&h| !member[mul_mod(inv, h, n) as usize])
        })
        .collect())
}

pub fn exceptional_set(inst: &ProductSetInstance) -> Result<ExceptionalReport> {
    let targets: Vec<u64> = (inst.L + 1..=inst.L + inst.H).collect();
    let via_inverse = exceptional_for_targets(inst.N, &inst.M, &targets)?;
    // second characterization: e·M misses the window
    let via_dilation: Vec<u64> =
        (1..inst.N).into_par_iter().filter(|&e| inst.M.iter().all(|&m| !inst.in_window(mul_mod(e, m, inst.N)))).collect();
    if via_inverse != via_dilation {
        return Err(Error::Verification("the two characterizations of the exceptional set disagree".into()));
    }
    let card = via_inverse.len();
    let eta_fit = (card >= 1).then(|| 1.0 - (card as f64).ln() / (inst.N as f64).ln());
    Ok(ExceptionalReport { E: via_inverse, card, eta_fit })
}

/// `|Σ_{e∈E} Σ_{m∈M} e(λ e m / N)|` in double precision.
pub fn exp_sum(lambda: i64, e: &[u64], m: &[u64], n: u64) -> f64 {
    let lam = lambda.rem_euclid(n as i64) as u64;
    if lam == 0 {
        return (e.len() * m.len()) as f64;
    }
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for &x in e {
        let lx = mul_mod(lam, x, n);
        for &y in m {
            let r = mul_mod(lx, y, n);
            let th = TAU * r as f64 / n as f64;
            re += th.cos();
            im += th.sin();
        }
    }
    re.hypot(im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VinogradovReport {
    pub bound: f64,
    pub max_ratio: f64,
    pub argmax_lambda: Option<u64>,
    pub violations: Vec<u64>,
    pub ok: bool,
}

/// Checks `|S(λ)| <= sqrt(N|E||M|)` (relative tolerance 1e-6) for every `λ` in `[1, N-1]`.
pub fn verify_vinogradov(inst: &ProductSetInstance, e: &[u64]) -> VinogradovReport {
    let n = inst.N;
    let bound = ((n as usize * e.len() * inst.M.len()) as f64).sqrt();
    if e.is_empty() {
        return VinogradovReport { bound, max_ratio: 0.0, argmax_lambda: None, violations: vec![], ok: true };
    }
    let sums: Vec<(u64, f64)> = (1..n).into_par_iter().map(|l| (l, exp_sum(l as i64, e, &inst.M, n))).collect();
    let tol = 1e-6 * bound;
    let violations: Vec<u64> = sums.iter().filter(|(_, s)| *s > bound + tol).map(|(l, _)| *l).collect();
    let (argmax, smax) = sums.iter().fold((0, -1.0), |acc, &(l, s)| if s > acc.1 { (l, s) } else { acc });
    VinogradovReport { bound, max_ratio: smax / bound, argmax_lambda: Some(argmax), ok: violations.is_empty(), violations }
}

/// Exact star discrepancy of a finite multiset in `[0, 1)`.
pub fn star_discrepancy(points: &[BigRational]) -> Result<BigRational> {
    if points.is_empty() {
        return Err(Error::Domain("star discrepancy of an empty set".into()));
    }
    let mut xs = points.to_vec();
    xs.sort();
    let n = rat_int(xs.len() as u64);
    let mut best = BigRational::zero();
    for (i, x) in xs.iter().enumerate() {
        let k = rat_int(i as u64 + 1);
        let a = &k / &n - x;
        let b = x - (&k - rat_int(1)) / &n;
        best = best.max(a).max(b);
    }
    Ok(best)
}

/// Star discrepancy of `{r_i / n}` for integer residues, without building rationals.
fn residue_discrepancy(mut rs: Vec<u64>, n: u64) -> BigRational {
    rs.sort_unstable();
    let cnt = rs.len() as u128;
    // compare k/cnt - r/n and r/n - (k-1)/cnt over the common denominator cnt*n
    let mut best: i128 = 0;
    for (i, &r) in rs.iter().enumerate() {
        let k = i as i128 + 1;
        let a = k * n as i128 - r as i128 * cnt as i128;
        let b = r as i128 * cnt as i128 - (k - 1) * n as i128;
        best = best.max(a).max(b);
    }
    BigRational::new(BigInt::from(best), BigInt::from(cnt * n as u128))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErdosTuranReport {
    pub status: String,
    #[serde(with = "crate::json::rational_opt")]
    pub discrepancy: Option<BigRational>,
    pub bound: Option<f64>,
    pub et_ok: bool,
    pub window_count: usize,
}

/// Discrepancy of `Γ = {e m / N}` against the Erdős–Turán bound with `K = N-1`,
/// and the count of `Γ` inside the window (zero by definition of `E`).
pub fn erdos_turan_chain(inst: &ProductSetInstance, e: &[u64]) -> ErdosTuranReport {
    if e.is_empty() {
        return ErdosTuranReport { status: "empty".into(), discrepancy: None, bound: None, et_ok: true, window_count: 0 };
    }
    let n = inst.N;
    let gamma: Vec<u64> = e.iter().flat_map(|&x| inst.M.iter().map(move |&y| mul_mod(x, y, n))).collect();
    let window_count = gamma.iter().filter(|&&r| inst.in_window(r)).count();
    let delta = residue_discrepancy(gamma, n);
    let k = n - 1;
    let em = (e.len() * inst.M.len()) as f64;
    let tail: f64 = (1..=k).into_par_iter().map(|h| exp_sum(h as i64, e, &inst.M, n) / (h as f64 * em)).collect::<Vec<f64>>().iter().sum();
    let bound = C_ET * (1.0 / k as f64 + tail);
    let et_ok = to_f64(&delta) <= bound;
    ErdosTuranReport {
        status: if et_ok { "ok".into() } else { "violated".into() },
        discrepancy: Some(delta),
        bound: Some(bound),
        et_ok,
        window_count,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ProductSetReport {
    pub N: u64,
    pub M_card: usize,
    pub L: u64,
    pub H: u64,
    pub d: f64,
    pub sigma_floor: f64,
    pub E: Vec<u64>,
    pub E_card: usize,
    pub eta_fit: Option<f64>,
    /// `|E| H² |M| / (N³ (log N)²)`, reported only.
    pub raw_ratio: f64,
    pub max_vinogradov_ratio: f64,
    pub vinogradov_ok: bool,
    pub et_status: String,
    #[serde(with = "crate::json::rational_opt")]
    pub discrepancy: Option<BigRational>,
    pub et_bound: Option<f64>,
    pub et_ok: bool,
    pub window_count: usize,
}

impl ProductSetReport {
    pub fn ok(&self) -> bool {
        self.vinogradov_ok && self.et_ok && self.window_count == 0
    }
}

pub fn analyze(inst: &ProductSetInstance) -> Result<ProductSetReport> {
    let ex = exceptional_set(inst)?;
    let vin = verify_vinogradov(inst, &ex.E);
    let et = erdos_turan_chain(inst, &ex.E);
    let n = inst.N as f64;
    let raw_ratio = ex.card as f64 * (inst.H as f64).powi(2) * inst.M.len() as f64 / (n.powi(3) * n.ln().powi(2));
    Ok(ProductSetReport {
        N: inst.N,
        M_card: inst.M.len(),
        L: inst.L,
        H: inst.H,
        d: inst.d(),
        sigma_floor: inst.sigma_floor(),
        E_card: ex.card,
        eta_fit: ex.eta_fit,
        E: ex.E,
        raw_ratio,
        max_vinogradov_ratio: vin.max_ratio,
        vinogradov_ok: vin.ok,
        et_status: et.status,
        discrepancy: et.discrepancy,
        et_bound: et.bound,
        et_ok: et.et_ok,
        window_count: et.window_count,
    })
}
