use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use ulc_core::builder::{self, BuilderParams, DEFAULT_MAX_PRIME};
use ulc_core::evaluate::profile;
use ulc_core::json::bigint_value;
use ulc_core::optimize::{solve_with_tau, Dec};
use ulc_core::productset::{analyze, ProductSetInstance};
use ulc_core::ratcore::{cf_expand, convergents, fmt_rational, rat_int, to_f64};
use ulc_core::sarith::{padic_run, s_twisted_run, singleton_scan, PadicParams, STwistedParams};
use ulc_core::twisted::{build_and_certify, BadTupleSpec, TwistedParams};
use ulc_core::witness::{find_witnesses, verify_witness, SearchConfig, Strategy};
use ulc_core::zaremba::{density_report, zaremba_numerators, zaremba_numerators_dfs, ZarembaParams};

use crate::error::CliError;
use crate::report::{Report, Table};
use crate::{
    BuildArgs, CfArgs, DensityArgs, EvalArgs, OptimizeArgs, ProductsetArgs, SarithMode, StrategyArg, TwistedArgs, WitnessArgs, ZarembaArgs,
};

/// Longest `--Q-range` accepted.
const MAX_ROWS: u64 = 1_000_000;

fn pairs_json(cs: &[(BigInt, BigInt)]) -> Vec<Value> {
    cs.iter().map(|(p, q)| json!({ "p": bigint_value(p), "q": bigint_value(q) })).collect()
}

fn pairs_table(cs: &[(BigInt, BigInt)]) -> Table {
    let mut t = Table::new(&["k", "p", "q"]);
    for (k, (p, q)) in cs.iter().enumerate() {
        t.push(vec![k.to_string(), p.to_string(), q.to_string()]);
    }
    t
}

pub fn cf(a: &CfArgs) -> Result<Report, CliError> {
    if let Some(x) = &a.x {
        let w = cf_expand(x);
        let cs = convergents(&w);
        let r = Report::new(json!({
            "x": fmt_rational(x),
            "cf": w,
            "convergents": pairs_json(&cs),
        }))?;
        return Ok(r.with_table(pairs_table(&cs)));
    }
    let number = a.number.as_ref().expect("clap group");
    if !a.qmax.is_positive() {
        return Err(CliError::Usage("--qmax must be positive".into()));
    }
    let cs = number.convergents_upto(Some(&a.qmax));
    let r = Report::new(json!({
        "number": number.to_string(),
        "qmax": bigint_value(&a.qmax),
        "convergents": pairs_json(&cs),
    }))?;
    Ok(r.with_table(pairs_table(&cs)))
}

fn joined(us: &[u64]) -> String {
    us.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn zaremba(a: &ZarembaArgs) -> Result<Report, CliError> {
    if a.m == 0 {
        return Err(CliError::Usage("--m must be positive".into()));
    }
    let mut table = Table::new(&["q", "card", "numerators"]);
    if let Some(q) = a.q {
        if q < 2 {
            return Err(CliError::Usage("--q must be at least 2".into()));
        }
        let set = zaremba_numerators(q, a.m);
        table.push(vec![q.to_string(), set.card().to_string(), joined(&set.numerators)]);
        return Ok(Report::new(&set)?.with_table(table));
    }
    let (lo, hi) = a.range.expect("clap group");
    let by_q = zaremba_numerators_dfs(lo.max(2), hi, a.m);
    let rows: Vec<Value> = by_q
        .iter()
        .map(|(q, us)| {
            table.push(vec![q.to_string(), us.len().to_string(), joined(us)]);
            json!({ "q": q, "card": us.len(), "numerators": us })
        })
        .collect();
    Ok(Report::new(json!({ "m": a.m, "range": [lo, hi], "rows": rows }))?.with_table(table))
}

pub fn density(a: &DensityArgs) -> Result<Report, CliError> {
    let sigma = match &a.sigma {
        Some(s) => to_f64(s),
        None => ZarembaParams::known(a.m)
            .sigma
            .ok_or_else(|| CliError::Usage(format!("--sigma is required: no tabulated dimension for m = {}", a.m)))?,
    };
    let rep = density_report(a.t, to_f64(&a.gamma), a.m, sigma)?;
    let mut table = Table::new(&["q", "card", "pass"]);
    for r in &rep.primes {
        table.push(vec![r.q.to_string(), r.card.to_string(), r.pass.to_string()]);
    }
    Ok(Report::new(&rep)?.with_table(table))
}

pub fn productset(a: &ProductsetArgs) -> Result<Report, CliError> {
    let set = match (&a.set, a.m) {
        (Some(s), _) => s.clone(),
        (None, Some(m)) => zaremba_numerators(a.n, m).numerators,
        (None, None) => unreachable!("clap group"),
    };
    let inst = match (a.window_start, a.window_len) {
        (Some(l), Some(h)) => ProductSetInstance::new(a.n, set, l, h)?,
        _ => ProductSetInstance::middle_third(a.n, set)?,
    };
    let rep = analyze(&inst)?;
    let mut r = Report::new(&rep)?;
    r.check(rep.vinogradov_ok, || format!("vinogradov_ok: max ratio {} exceeds 1", rep.max_vinogradov_ratio));
    r.check(rep.et_ok, || format!("et_ok: {} (bound {:?})", rep.et_status, rep.et_bound));
    r.check(rep.window_count == 0, || format!("window_count: {} points of Γ in the window", rep.window_count));
    Ok(r)
}

pub fn witness(a: &WitnessArgs) -> Result<Report, CliError> {
    let mut cfg = SearchConfig::new(a.i.clone(), a.j.clone(), a.tau.clone(), a.m, a.range.0, a.range.1);
    cfg.max_witnesses = (a.max_witnesses > 0).then_some(a.max_witnesses);
    cfg.left_margin = a.left_margin.clone();
    cfg.strategy = match a.strategy {
        StrategyArg::Auto => Strategy::Auto,
        StrategyArg::Inversion => Strategy::Inversion,
        StrategyArg::FractionScan => Strategy::FractionScan,
    };
    let found = find_witnesses(&cfg)?;
    let mut table = Table::new(&["p", "q", "r", "s", "ratio"]);
    for w in &found {
        let qd = &w.quadruple;
        table.push(vec![qd.p.to_string(), qd.q.to_string(), qd.r.to_string(), qd.s.to_string(), fmt_rational(&w.ratio)]);
    }
    let mut r = Report::new(json!({ "config": cfg, "witnesses": found, "count": found.len() }))?.with_table(table);
    for w in &found {
        let again = verify_witness(&w.quadruple, &cfg.I, &cfg.J, &cfg.tau, cfg.m);
        let q = w.quadruple;
        r.check(again.passed() && &again == w, || {
            format!(
                "witness (p,q,r,s)=({},{},{},{}): {} (ratio {})",
                q.p,
                q.q,
                q.r,
                q.s,
                again.failed().join(", "),
                fmt_rational(&again.ratio)
            )
        });
    }
    Ok(r)
}

pub fn build(a: &BuildArgs) -> Result<Report, CliError> {
    let mut p = BuilderParams::from_optimizer(a.m, a.tau.clone(), a.steps, a.i.clone(), a.j.clone(), a.prime_range.0, a.prime_range.1);
    if let (Some(d), Some(beta)) = (&a.d, &a.beta) {
        p.d = d.clone();
        p.beta = beta.clone();
    }
    p.alpha = match &a.alpha {
        Some(alpha) => alpha.clone(),
        None => &p.beta * &a.alpha_ratio,
    };
    p.max_prime = a.max_prime.unwrap_or(DEFAULT_MAX_PRIME);
    let violations = builder::validate_params(&p);
    if !violations.is_empty() {
        return Err(CliError::Usage(format!("parameter constraints violated: {}", violations.join("; "))));
    }
    let res = builder::run(&p)?;
    let mut table = Table::new(&["k", "Qk", "certified_lower", "analytic_bound", "argmin_n", "case"]);
    for c in &res.certificates {
        table.push(vec![
            c.k.to_string(),
            fmt_rational(&c.q_k),
            fmt_rational(&c.certified_lower),
            fmt_rational(&c.analytic_bound),
            c.argmin_n.to_string(),
            serde_json::to_value(c.case)?.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let mut r = Report::new(&res)?.with_table(table);
    for c in &res.certificates {
        r.check(c.certified_lower.is_positive(), || format!("level {}: certified_lower = {}", c.k, fmt_rational(&c.certified_lower)));
    }
    Ok(r)
}

pub fn twisted(a: &TwistedArgs) -> Result<Report, CliError> {
    let mut p = TwistedParams::new(BadTupleSpec::single(a.zeta.clone()), a.phi.clone(), a.psi.clone(), a.levels);
    p.i0 = a.i0.clone();
    p.scan_to = a.scan_to;
    if let Some(c) = &a.cutoff {
        p.cutoff = c.clone();
    }
    let tr = build_and_certify(&p)?;
    let mut table = Table::new(&["k", "Q", "certified", "bound", "argmin_n", "case"]);
    for c in &tr.certificates {
        table.push(vec![
            c.k.to_string(),
            c.big_q.to_string(),
            fmt_rational(&c.certified),
            fmt_rational(&c.bound),
            c.argmin_n.to_string(),
            serde_json::to_value(c.case)?.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let mut r = Report::new(&tr)?.with_table(table);
    for c in &tr.certificates {
        r.check(c.meets_bound, || format!("level {}: certified {} < C/(6K) = {}", c.k, fmt_rational(&c.certified), fmt_rational(&c.bound)));
    }
    Ok(r)
}

pub fn sarith(mode: &SarithMode) -> Result<Report, CliError> {
    match mode {
        SarithMode::Padic { p, beta, depth, a0 } => {
            let mut params = PadicParams::new(*p, beta.clone(), *depth);
            params.a0 = *a0;
            params.validate()?;
            let rep = padic_run(&params)?;
            let mut table = Table::new(&["k", "Q", "value", "floor", "argmin_s"]);
            for c in &rep.certificates {
                table.push(vec![c.k.to_string(), c.Q.to_string(), fmt_rational(&c.value), fmt_rational(&c.floor), c.argmin_s.to_string()]);
            }
            let r = Report::new(json!({
                "mode": "padic",
                "params": rep.params,
                "construction": rep.construction,
                "enclosure": rep.enclosure.to_string(),
                "certificates": rep.certificates,
                "scan": [],
            }))?;
            Ok(r.with_table(table))
        }
        SarithMode::Twisted { s, base, phi, depth, max_exponent } => {
            let mut params = STwistedParams::new(s.clone(), *base, phi.clone(), *depth);
            params.max_exponent = *max_exponent;
            params.validate()?;
            let rep = s_twisted_run(&params)?;
            let mut table = Table::new(&["k", "Q", "value", "argmin_s", "case"]);
            for c in &rep.certificates {
                table.push(vec![
                    c.k.to_string(),
                    c.Q.to_string(),
                    fmt_rational(&c.value),
                    c.argmin_s.to_string(),
                    serde_json::to_value(c.case)?.as_str().unwrap_or_default().to_string(),
                ]);
            }
            let r = Report::new(json!({
                "mode": "twisted",
                "params": rep.params,
                "construction": rep.construction,
                "enclosure": rep.enclosure.to_string(),
                "certificates": rep.certificates,
                "scan": [],
            }))?;
            Ok(r.with_table(table))
        }
        SarithMode::Singleton { xi, exclude, q } => {
            let rows = singleton_scan(xi, *exclude, q)?;
            let mut table = Table::new(&["Q", "value", "value_upper", "argmin", "exhaustive"]);
            for row in &rows {
                table.push(vec![
                    row.Q.to_string(),
                    fmt_rational(&row.value),
                    fmt_rational(&row.value_upper),
                    row.argmin.to_string(),
                    row.exhaustive.to_string(),
                ]);
            }
            let r = Report::new(json!({
                "mode": "singleton",
                "params": { "xi": xi.to_string(), "excluded": exclude },
                "construction": [],
                "certificates": [],
                "scan": rows,
            }))?;
            Ok(r.with_table(table))
        }
    }
}

pub fn eval(a: &EvalArgs) -> Result<Report, CliError> {
    let q_list: Vec<BigInt> = match (&a.q, a.q_range) {
        (Some(qs), _) => qs.clone(),
        (None, Some((lo, hi))) => {
            if hi - lo >= MAX_ROWS {
                return Err(CliError::Usage(format!("--Q-range: at most {MAX_ROWS} values")));
            }
            (lo.max(1)..=hi).map(BigInt::from).collect()
        }
        (None, None) => unreachable!("clap group"),
    };
    if q_list.iter().any(|q| !q.is_positive()) {
        return Err(CliError::Usage("--Q: values must be positive".into()));
    }
    let rows = profile(&a.x, &q_list)?;
    let mut table = Table::new(&["Q", "value", "inner_min", "argmin", "approx"]);
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        table.push(vec![
            row.Q.to_string(),
            fmt_rational(&row.value),
            fmt_rational(&row.inner_min),
            row.argmin.to_string(),
            row.approx.to_string(),
        ]);
        let mut v = serde_json::to_value(row)?;
        if let Some(psi) = &a.psi {
            let w = psi.eval(&row.Q);
            if w.is_zero() {
                return Err(CliError::Usage(format!("--psi vanishes at Q = {}", row.Q)));
            }
            let weighted: BigRational = rat_int(row.Q.clone()) / w * &row.inner_min;
            v["weighted"] = Value::from(fmt_rational(&weighted));
        }
        out.push(v);
    }
    let x: Vec<String> = a.x.iter().map(|b| if b.width().is_zero() { fmt_rational(b.lo()) } else { b.to_string() }).collect();
    let r = Report::new(json!({
        "x": x,
        "psi": a.psi.as_ref().map(|p| p.to_string()),
        "rows": out,
    }))?;
    Ok(r.with_table(table))
}

pub fn optimize(a: &OptimizeArgs) -> Result<Report, CliError> {
    if a.m == 0 {
        return Err(CliError::Usage("--m must be positive".into()));
    }
    if a.tau < rat_int(1) {
        return Err(CliError::Usage("--tau must be at least 1".into()));
    }
    let res = solve_with_tau(a.m, &Dec::from_rational(&a.tau));
    let mut r = Report::new(&res)?;
    r.check(res.refinement_ok, || {
        format!("refinement_ok: a neighbour of (d, β) = ({}, {}) beats bound {}", res.d_star, res.beta_star, res.bound)
    });
    r.check(!res.bound.is_negative(), || format!("bound: {} is negative", res.bound));
    Ok(r)
}
