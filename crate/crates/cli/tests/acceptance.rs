//! Exit criteria, one test each. Every test prints a single
//! `criterion NN: PASS|FAIL ...` line before asserting.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ulc_core::builder::{BuildResult, Case};
use ulc_core::evaluate::{dmin, dmin_big};
use ulc_core::optimize::{solve, Dec};
use ulc_core::ratcore::{floor, parse_rational, rat, rat_int};
use ulc_core::sarith::{PadicCertificate, STwistedCase, STwistedCertificate, SingletonRow};
use ulc_core::twisted::TwistedTrace;
use ulc_core::witness::{verify_witness, WitnessCertificate};
use ulc_core::zaremba::zaremba_numerators;

const OPTIMIZE: &[&str] = &["optimize", "--m", "50"];
const WITNESS: &[&str] = &["witness", "--m", "5", "--tau", "3/2", "--range", "50:10000", "--I", "1/5:4/5", "--J", "1/5:4/5"];
const BUILD: &[&str] = &["build", "--m", "5", "--tau", "3/2", "--steps", "4", "--prime-range", "11:200", "--alpha-ratio", "1/2"];
const PRODUCTSET: &[&str] = &["productset", "--N", "13", "--M", "5,8", "--L", "3", "--H", "6"];
const PADIC2: &[&str] = &["sarith", "padic", "--p", "2", "--beta", "1/10", "--depth", "3"];
const PADIC3: &[&str] = &["sarith", "padic", "--p", "3", "--beta", "1/10", "--depth", "3"];
const PADIC2_SCHEDULE: &[&str] = &["sarith", "padic", "--p", "2", "--beta", "1/10,1/20,1/40", "--depth", "3"];
const PADIC3_SCHEDULE: &[&str] = &["sarith", "padic", "--p", "3", "--beta", "1/10,1/20,1/40", "--depth", "3"];
const S_TWISTED: &[&str] = &["sarith", "twisted", "--S", "include:3,5", "--base", "2", "--phi", "sqrt", "--depth", "3"];
const SINGLETON: &[&str] = &["sarith", "singleton", "--xi", "sqrt2", "--exclude", "3", "--Q", "100,10000"];
const TWISTED: &[&str] = &["twisted", "--zeta", "golden", "--phi", "identity", "--psi", "one", "--levels", "3"];
const EVAL: &[&str] = &["eval", "--x", "2/7,3/5", "--Q", "4"];

struct Criterion {
    n: u32,
    what: &'static str,
    limit: Duration,
    start: Instant,
    failures: Vec<String>,
}

impl Criterion {
    fn new(n: u32, what: &'static str, limit_secs: u64) -> Self {
        Self { n, what, limit: Duration::from_secs(limit_secs), start: Instant::now(), failures: Vec::new() }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn finish(mut self) {
        let took = self.start.elapsed();
        let limit = self.limit;
        self.expect(took < limit, || format!("runtime {took:?} over {limit:?}"));
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {:02}: {status} {} ({} ms)", self.n, self.what, took.as_millis());
        for f in &self.failures {
            println!("    {f}");
        }
        assert!(self.failures.is_empty(), "criterion {} failed: {:?}", self.n, self.failures);
    }
}

fn run_ulc(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_ulc")).args(args).output().expect("spawn ulc");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn ulc_json(c: &mut Criterion, args: &[&str]) -> Value {
    let (code, stdout) = run_ulc(args);
    c.expect(code == 0, || format!("`ulc {}` exited {code}", args.join(" ")));
    serde_json::from_slice(&stdout).unwrap_or(Value::Null)
}

fn field<T: serde::de::DeserializeOwned>(v: &Value, key: &str) -> T {
    serde_json::from_value(v[key].clone()).unwrap_or_else(|e| panic!("field {key}: {e}"))
}

fn decimal(v: &Value, key: &str) -> BigRational {
    parse_rational(v[key].as_str().expect("decimal string")).unwrap()
}

#[test]
fn criterion_01_constant_reproduction() {
    let mut c = Criterion::new(1, "optimize --m 50: bound > 0.005326 and > 1/188, d* and β* match", 1);
    let v = ulc_json(&mut c, OPTIMIZE);
    let bound = decimal(&v, "bound");
    let d = decimal(&v, "d_star");
    let beta = decimal(&v, "beta_star");
    c.expect(bound > rat(5326, 1_000_000), || format!("bound {bound} <= 0.005326"));
    c.expect(bound > rat(1, 188), || format!("bound {bound} <= 1/188"));
    c.expect((&d - rat(1465, 100_000)).abs() <= rat(1, 10_000), || format!("d* = {d}"));
    c.expect((&beta - rat(271_023, 10_000)).abs() <= rat(1, 100), || format!("β* = {beta}"));
    c.finish();
}

#[test]
fn criterion_02_conditional_constants() {
    let mut c = Criterion::new(2, "solve(2) in (1/15, 0.07), solve(5) > 0.0414 > 1/25, solve(m) > 1/(4(m+2)) for m in 2..=60", 10);
    let bound = |m: u64| solve(m).bound.to_rational();
    let b2 = bound(2);
    c.expect(b2 > rat(1, 15) && b2 < rat(7, 100), || format!("solve(2) = {}", Dec::from_rational(&b2)));
    let b5 = bound(5);
    c.expect(rat(414, 10_000) > rat(1, 25), || "0.0414 <= 1/25".into());
    c.expect(b5 > rat(414, 10_000), || format!("solve(5) = {} is not above 0.0414", Dec::from_rational(&b5).to_string_digits(10)));
    for m in 2..=60u64 {
        let b = if m == 2 {
            b2.clone()
        } else if m == 5 {
            b5.clone()
        } else {
            bound(m)
        };
        let floor = rat_int(4 * (m + 2)).recip();
        c.expect(b > floor, || format!("solve({m}) = {} <= 1/(4({m}+2))", Dec::from_rational(&b)));
    }
    c.finish();
}

fn euclid_bounded(u: u64, q: u64, m: u64) -> bool {
    // u/q reduced in (0,1) with quotients <= m in [.., t] or its twin [.., t-1, 1]
    let (mut a, mut b) = (q, u);
    let mut quotients = Vec::new();
    while b != 0 {
        quotients.push(a / b);
        (a, b) = (b, a % b);
    }
    let last = quotients.pop().unwrap_or(0);
    a == 1 && quotients.iter().all(|&t| t <= m) && last <= m + 1
}

#[test]
fn criterion_03_witness_existence() {
    let mut c = Criterion::new(3, "witnesses for m=5, τ=3/2, I=J=[1/5,4/5], primes in [50, 10^4], all re-verified", 60);
    let v = ulc_json(&mut c, WITNESS);
    let found: Vec<WitnessCertificate> = field(&v, "witnesses");
    c.expect(!found.is_empty(), || "no witness".into());
    let iv = "1/5:4/5".parse().unwrap();
    let tau = rat(3, 2);
    for w in &found {
        let q = w.quadruple;
        let again = verify_witness(&q, &iv, &iv, &tau, 5);
        c.expect(again.passed() && &again == w, || format!("({},{},{},{}) fails {:?}", q.p, q.q, q.r, q.s, again.failed()));
        let (u, v) = ((q.p * q.s) % q.q, (q.q * q.r) % q.s);
        c.expect(euclid_bounded(u, q.q, 5) && euclid_bounded(v, q.s, 5), || {
            format!("({},{},{},{}) fails C3 by Euclid", q.p, q.q, q.r, q.s)
        });
        c.expect((50..=10_000).contains(&q.q), || format!("q = {} outside the range", q.q));
    }
    c.finish();
}

#[test]
fn criterion_04_construction_certificates() {
    let mut c = Criterion::new(4, "4-step build, m=5, τ=3/2: certified_lower > 0, dominated at midpoints, all cases covered", 300);
    let v = ulc_json(&mut c, BUILD);
    let res: BuildResult = serde_json::from_value(v).expect("build schema");
    c.expect(res.certificates.len() == 3, || format!("{} certificates", res.certificates.len()));
    let mids = [res.xi.mid(), res.zeta.mid()];
    for cert in &res.certificates {
        let k = cert.k;
        c.expect(cert.certified_lower.is_positive(), || format!("level {k}: certified_lower = {}", cert.certified_lower));
        let n = floor(&cert.q_k);
        let at_mid = match n.to_u64().filter(|&n| n <= 100_000) {
            Some(n) => dmin(&mids, n).unwrap(),
            None => dmin_big(&mids, &n).unwrap(),
        };
        let oracle = at_mid / rat_int(n) * &cert.q_k;
        c.expect(cert.certified_lower <= oracle, || format!("level {k}: {} > midpoint value {oracle}", cert.certified_lower));
        let cases: Vec<Case> = cert.case_breakdown.iter().map(|m| m.case).collect();
        c.expect(cases == [Case::Generic, Case::MultipleOfPq, Case::MultipleOfRs], || format!("level {k}: cases {cases:?}"));
        let least = cert.case_breakdown.iter().filter_map(|m| m.value.clone()).min();
        c.expect(least.as_ref() == Some(&cert.certified_lower), || format!("level {k}: case minimum {least:?}"));
    }
    c.finish();
}

fn exceptional_oracle(n: u64, m: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    // e is exceptional when no h in the window has e^-1 h in M, i.e. e*u never lands in the window
    (1..n).filter(|&e| !m.iter().any(|&u| (lo..=hi).contains(&(e * u % n)))).collect()
}

#[test]
fn criterion_05_product_set_lemma() {
    let mut c =
        Criterion::new(5, "N=13 fixture E = {2,3,5,8,10,11}; primes 50..300 with M_N(5): Vinogradov ratio <= 1+1e-6, no window hits", 120);
    let v = ulc_json(&mut c, PRODUCTSET);
    let e: Vec<u64> = field(&v, "E");
    let oracle = exceptional_oracle(13, &[5, 8], 4, 9);
    c.expect(oracle == [2, 3, 5, 8, 10, 11], || format!("oracle gives {oracle:?}"));
    c.expect(e == oracle && v["E_card"] == 6, || format!("E = {e:?}"));
    let limit = 1.0 + 1e-6;
    let mut swept = 0;
    for n in (50..=300u64).filter(|&n| ulc_core::zaremba::is_prime(n)) {
        let m = zaremba_numerators(n, 5).numerators;
        if m.is_empty() {
            continue;
        }
        let ns = n.to_string();
        let v = ulc_json(&mut c, &["productset", "--N", &ns, "--m", "5"]);
        let ratio = v["max_vinogradov_ratio"].as_f64().unwrap_or(f64::INFINITY);
        c.expect(ratio <= limit, || format!("N = {n}: Vinogradov ratio {ratio}"));
        c.expect(v["window_count"] == 0, || format!("N = {n}: window count {}", v["window_count"]));
        let third = n / 3;
        let e: Vec<u64> = field(&v, "E");
        c.expect(e == exceptional_oracle(n, &m, third + 1, 2 * third), || format!("N = {n}: E disagrees with the oracle"));
        swept += 1;
    }
    c.expect(swept == 47, || format!("{swept} primes swept"));
    c.finish();
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Continued fraction of n/d by Euclid, `[a0, a1, ...]`.
fn euclid_cf(mut n: i128, mut d: i128) -> Vec<i128> {
    let mut out = Vec::new();
    while d != 0 {
        out.push(n.div_euclid(d));
        (n, d) = (d, n.rem_euclid(d));
    }
    out
}

#[test]
fn criterion_06_proposition_suites() {
    let mut c = Criterion::new(6, "gap bound on 10^3 instances, convergent quality on 10^3 rationals, independent branch for q <= 50", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    // |q xi - p| < c q^-2, cd < 1, 0 < v < d q^2, u/v != p/q  =>  (1-cd)^2 d <= Q |v xi - u|^2 with Q = d q^2
    let mut violations = 0u64;
    for _ in 0..1000 {
        let q: i128 = rng.gen_range(2..=60);
        let p: i128 = loop {
            let p = rng.gen_range(0..q);
            if gcd(p, q) == 1 {
                break p;
            }
        };
        let (dn, dd): (i128, i128) = (rng.gen_range(1..=20), 20);
        // c = cn/8 with cd < 1
        let (cn, cd) = (rng.gen_range(1..=8 * (dd / dn) - 1), 8i128);
        let en: i128 = rng.gen_range(-(cn * 100 - 1)..=(cn * 100 - 1));
        let b = q * q * q * cd * 100;
        let a = p * (b / q) + en;
        for v in (1i128..).take_while(|v| v * dd < dn * q * q) {
            let f = (v * a).div_euclid(b);
            for u in f - 1..=f + 2 {
                if u * q == v * p {
                    continue;
                }
                let g = (v * a - u * b).abs();
                let k = cd * dd - cn * dn;
                if g * g * q * q * (cd * dd) * (cd * dd) < k * k * b * b {
                    violations += 1;
                }
            }
        }
    }
    c.expect(violations == 0, || format!("gap bound: {violations} violations"));

    // (a_{k+1} + 2)^-1 q_k^-1 <= |q_k x - p_k| for every convergent with a successor
    let mut violations = 0u64;
    for _ in 0..1000 {
        let d: i128 = rng.gen_range(2..=100_000);
        let n: i128 = rng.gen_range(1..d);
        let a = euclid_cf(n, d);
        let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, a[0], 1i128);
        for k in 0..a.len() - 1 {
            let a_next = a[k + 1];
            // 1/((a+2) q) <= |q n/d - p|  <=>  d <= (a+2) q |q n - p d|
            if d > (a_next + 2) * q1 * (q1 * n - p1 * d).abs() {
                violations += 1;
            }
            (p0, p1) = (p1, a_next * p1 + p0);
            (q0, q1) = (q1, a_next * q1 + q0);
        }
    }
    c.expect(violations == 0, || format!("convergent quality: {violations} violations"));

    // |s xi - r| >= 1/(3q) for (r,s) not a multiple of (p,q) and s < |q xi - p|^-1 / 3,
    // xi = p/q + 1/(j q Q) for j in 6, 4, 3 (ends and middle of the level interval)
    let mut violations = 0u64;
    let mut checked = 0u64;
    for q in 1..=50i128 {
        for p in (0..q).filter(|&p| gcd(p, q) == 1) {
            for big_q in [1i128, 2, 3, 5, 8, 13, 21, 34, 55, 89] {
                for j in [6i128, 4, 3] {
                    // xi = (j p Q + 1) / (j q Q); |q xi - p| = 1/(j Q), so s < j Q / 3
                    let (num, den) = (j * p * big_q + 1, j * q * big_q);
                    for s in (1i128..).take_while(|s| 3 * s < j * big_q) {
                        let f = (s * num).div_euclid(den);
                        for r in [f, f + 1] {
                            if r * q == s * p {
                                continue;
                            }
                            checked += 1;
                            if 3 * q * (s * num - r * den).abs() < den {
                                violations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    c.expect(violations == 0 && checked > 10_000, || format!("independent branch: {violations} violations in {checked}"));
    c.finish();
}

fn padic_values(c: &mut Criterion, args: &[&str]) -> Vec<PadicCertificate> {
    let v = ulc_json(c, args);
    field(&v, "certificates")
}

#[test]
fn criterion_07_padic_construction() {
    let mut c = Criterion::new(7, "p-adic, p=2,3, β=1/10, depth 3: values in [4/5, 1]; schedule 1/10,1/20,1/40 strictly increasing", 60);
    for (p, args) in [(2, PADIC2), (3, PADIC3)] {
        let certs = padic_values(&mut c, args);
        c.expect(certs.len() == 3, || format!("p = {p}: {} certificates", certs.len()));
        for cert in &certs {
            let ok = cert.value >= rat(4, 5) && cert.value <= BigRational::one();
            c.expect(ok, || format!("p = {p} level {}: value {}", cert.k, cert.value));
        }
    }
    for (p, args) in [(2, PADIC2_SCHEDULE), (3, PADIC3_SCHEDULE)] {
        let certs = padic_values(&mut c, args);
        c.expect(certs.len() == 3, || format!("p = {p}: {} certificates", certs.len()));
        for w in certs.windows(2) {
            c.expect(w[0].value < w[1].value, || format!("p = {p}: value {} then {}", w[0].value, w[1].value));
        }
    }
    c.finish();
}

#[test]
fn criterion_08_s_twisted_construction() {
    let mut c = Criterion::new(8, "S-twisted, base 2, Φ = floor sqrt, S = {3,5}, depth 3: values >= 1/3, multiple-branch >= Φ(Q)/6", 120);
    let v = ulc_json(&mut c, S_TWISTED);
    let certs: Vec<STwistedCertificate> = field(&v, "certificates");
    c.expect(certs.len() == 3, || format!("{} certificates", certs.len()));
    for cert in &certs {
        let k = cert.k;
        c.expect(cert.value >= rat(1, 3), || format!("level {k}: value {}", cert.value));
        if let Some(m) = &cert.multiple_min {
            let floor = &cert.phi_Q / rat_int(6);
            c.expect(m >= &floor, || format!("level {k}: multiple branch {m} < {floor}"));
        }
        if cert.case == STwistedCase::MultipleOfPq {
            c.expect(cert.multiple_min.as_ref() == Some(&cert.value), || format!("level {k}: case does not match its branch"));
        }
    }
    c.finish();
}

#[test]
fn criterion_09_singleton_decay() {
    let mut c = Criterion::new(9, "ξ = sqrt 2, S = all primes but 3: f(10^4) < f(10^2) and f(10^4) < 0.01", 120);
    let v = ulc_json(&mut c, SINGLETON);
    let rows: Vec<SingletonRow> = field(&v, "scan");
    c.expect(rows.len() == 2, || format!("{} rows", rows.len()));
    if let [small, large] = &rows[..] {
        c.expect(small.Q == BigInt::from(100) && large.Q == BigInt::from(10_000), || "wrong Q".into());
        c.expect(large.value_upper < small.value, || format!("f(10^4) <= {} is not below f(10^2) >= {}", large.value_upper, small.value));
        c.expect(large.value_upper < rat(1, 100), || format!("f(10^4) <= {} is not below 0.01", large.value_upper));
        c.expect(small.exhaustive && large.exhaustive, || "rows not confirmed by the full loop".into());
    }
    c.finish();
}

#[test]
fn criterion_10_going_up_construction() {
    let mut c = Criterion::new(10, "ζ = golden ratio, Φ(t) = t, Ψ = 1, 3 levels: C >= 1/3, every level >= 1/18", 120);
    let v = ulc_json(&mut c, TWISTED);
    let tr: TwistedTrace = serde_json::from_value(v).expect("twisted schema");
    c.expect(tr.c >= rat(1, 3), || format!("C = {}", tr.c));
    c.expect(tr.certificates.len() == 3, || format!("{} levels", tr.certificates.len()));
    for cert in &tr.certificates {
        c.expect(cert.certified >= rat(1, 18), || format!("level {}: certified {}", cert.k, cert.certified));
    }
    c.finish();
}

/// Q min_{n<=Q} ‖n a1/b1‖ ‖n a2/b2‖ by a plain loop.
fn naive_dmin(a1: i64, b1: i64, a2: i64, b2: i64, q: i64) -> BigRational {
    let dist = |a: i64, b: i64, n: i64| {
        let r = (n * a).rem_euclid(b);
        r.min(b - r)
    };
    let best = (1..=q).map(|n| dist(a1, b1, n) * dist(a2, b2, n)).min().unwrap();
    BigRational::new(BigInt::from(q * best), BigInt::from(b1 * b2))
}

#[test]
fn criterion_11_evaluator_oracle() {
    let mut c = Criterion::new(11, "dmin([2/7, 3/5], 4) = 4/35; 10^3 random pairs match a naive loop", 30);
    let v = ulc_json(&mut c, EVAL);
    c.expect(v["rows"][0]["value"] == "4/35", || format!("eval gives {}", v["rows"][0]["value"]));
    c.expect(dmin(&[rat(2, 7), rat(3, 5)], 4).unwrap() == rat(4, 35), || "library dmin".into());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..1000 {
        let (b1, b2): (i64, i64) = (rng.gen_range(1..=1000), rng.gen_range(1..=1000));
        let (a1, a2) = (rng.gen_range(0..b1), rng.gen_range(0..b2));
        let q = rng.gen_range(1..=300);
        if dmin(&[rat(a1, b1), rat(a2, b2)], q as u64).unwrap() != naive_dmin(a1, b1, a2, b2, q) {
            bad += 1;
        }
    }
    c.expect(bad == 0, || format!("{bad} disagreements"));
    c.finish();
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ulc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn criterion_12_determinism() {
    let mut c = Criterion::new(12, "every acceptance command is byte-identical with --threads 1 and --threads 8", 600);
    let dir = tempdir();
    let commands = [
        OPTIMIZE,
        WITNESS,
        BUILD,
        PRODUCTSET,
        PADIC2,
        PADIC3,
        PADIC2_SCHEDULE,
        PADIC3_SCHEDULE,
        S_TWISTED,
        SINGLETON,
        TWISTED,
        EVAL,
        &["productset", "--N", "101", "--m", "5"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let path = dir.join(format!("{i}-{threads}.json"));
            let p = path.to_str().unwrap();
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--threads", threads, "--out", p]);
            let (code, _) = run_ulc(&full);
            c.expect(code == 0, || format!("`ulc {}` exited {code}", full.join(" ")));
            outputs.push(std::fs::read(&path).unwrap_or_default());
        }
        c.expect(!outputs[0].is_empty() && outputs[0] == outputs[1], || format!("`ulc {}` differs across thread counts", args.join(" ")));
    }
    std::fs::remove_dir_all(&dir).ok();
    c.finish();
}
