use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use cubesum::circle::{self, GeneratingSum, OscMethod, Regime};
use cubesum::convolution::MAX_TRANSFORM_LEN;
use cubesum::reps::{self, CountMode};
use cubesum::{dickman, expsums, localsolve, predict, series};

use crate::output::{exact, Report, Table};
use crate::{Command, Failure, Global, MethodArg, ModeArg, RegimeArgs, SumKindArg};

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn regime(args: &RegimeArgs, s: Option<u32>) -> Result<Regime, Failure> {
    match (args.xi, args.kappa) {
        (Some(xi), _) => match s {
            Some(s) => Ok(Regime::Xi { xi, s }),
            None => usage("--xi needs --s"),
        },
        (None, kappa) => Ok(Regime::Kappa {
            kappa: kappa.unwrap_or(Regime::DEFAULT_KAPPA),
        }),
    }
}

/// Runs one command. The flag is false only when a verification failed.
pub fn dispatch(cmd: &Command, global: &Global) -> Result<(Report, bool), Failure> {
    let report = match cmd {
        Command::Expsum { q, a, k, kind, b } => expsum(*q, *a, *k, *kind, *b)?,
        Command::Series { n, s, k, q, levels } => series_cmd(*n, *s, *k, *q, *levels)?,
        Command::Local { p, h, s, k, n, m33 } => local(*p, *h, *s, *k, *n, *m33)?,
        Command::Reps {
            p,
            s,
            k,
            mode,
            eta,
            n_max,
        } => reps_cmd(*p, *s, *k, *mode, *eta, *n_max)?,
        Command::Rho { x } => rho(x),
        Command::Smoothcount { m, q, r, eta, p } => {
            let mut rep = Report::new("smoothcount", json!({"m": m, "q": q, "r": r, "eta": eta, "P": p}));
            rep.results = to_value(&dickman::smooth_progression_count(*m, *q, *r, *eta, *p)?);
            rep.guards = json!({"sieve_limit": reps::SIEVE_LIMIT_GUARD});
            rep
        }
        Command::Dissect { n, k, s, regime: r } => dissect(*n, *k, regime(r, *s)?)?,
        Command::Arcint {
            p,
            s,
            k,
            n,
            regime: r,
            samples,
        } => arcint(*p, *s, *k, *n, regime(r, Some(*s))?, *samples)?,
        Command::Vbeta {
            beta,
            p,
            k,
            method,
            decay,
        } => vbeta(beta, *p, *k, *method, *decay)?,
        Command::Mainterm {
            k,
            s,
            n,
            eta,
            q,
            p,
            stride,
            rows,
        } => mainterm(*k, *s, *n, *eta, *q, *p, *stride, *rows)?,
        Command::Lowerbound { p, s, k, eta, big_k } => lowerbound(*p, *s, *k, *eta, *big_k)?,
        Command::Table1 { k } => table1(k)?,
        Command::Moments { p, eta, q, h, k } => moments(p, *eta, *q, *h, *k)?,
        Command::VerifyAll { quick } => {
            let (rep, ok) = crate::verify::run(*quick, global.seed);
            return Ok((rep, ok));
        }
    };
    Ok((report, true))
}

fn expsum(q: u64, a: i64, k: u32, kind: SumKindArg, b: i64) -> Result<Report, Failure> {
    if q == 0 || k == 0 {
        return usage("need q ≥ 1 and k ≥ 1");
    }
    let mut rep = Report::new("expsum", json!({"q": q, "a": a, "k": k, "kind": format!("{kind:?}").to_lowercase(), "b": b}));
    let qf = q as f64;
    rep.results = match kind {
        SumKindArg::Power | SumKindArg::Twisted => {
            let v = if kind == SumKindArg::Power {
                expsums::power_sum(q, a, k)
            } else {
                expsums::twisted_sum(q, a, b, k)
            };
            json!({"re": v.re, "im": v.im, "abs": v.norm(), "trivial_bound": qf})
        }
        SumKindArg::Triple => {
            let v = expsums::triple_sum_fast(q, a, k);
            let mut r = json!({"re": v.re, "im": v.im, "abs": v.norm(), "trivial_bound": qf.powi(3)});
            if q <= expsums::DIRECT_TRIPLE_MAX_Q {
                let d = expsums::triple_sum_direct(q, a, k)?;
                r["direct_re"] = json!(d.re);
                r["direct_im"] = json!(d.im);
                r["identity_discrepancy"] = json!((v.value() - d.value()).norm());
            }
            r
        }
    };
    rep.tolerances = json!({"identity": 1e-6 * qf.powi(3)});
    rep.guards = json!({"direct_triple_max_q": expsums::DIRECT_TRIPLE_MAX_Q});
    Ok(rep)
}

fn series_cmd(n: u64, s: u32, k: u32, q: u64, levels: u32) -> Result<Report, Failure> {
    let opts = series::SeriesOptions {
        truncation: q,
        min_levels: levels,
        level_cap: series::DEFAULT_LEVEL_CAP,
    };
    let res = series::singular_series_with(n, s, k, opts)?;
    let mut rep = Report::new("series", json!({"n": n, "s": s, "k": k, "Q": q, "levels": levels}));
    rep.results = json!({
        "partial_sum": res.partial_sum,
        "euler_product": res.euler_product,
        "discrepancy": res.discrepancy(),
        "tail_bound": res.tail_bound,
        "positive": res.positive,
    });
    let mut t = Table::new(&["p", "levels", "local_factor", "tail_estimate"]);
    for f in &res.factors {
        t.push(vec![json!(f.p), json!(f.levels), json!(f.partial_sum), json!(f.tail_estimate)]);
    }
    rep.table = Some(t);
    rep.tolerances = json!({"agreement": res.tail_bound});
    rep.guards = json!({"series_modulus": series::SERIES_MODULUS_GUARD, "level_cap": series::DEFAULT_LEVEL_CAP});
    Ok(rep)
}

fn local(p: u64, h: u32, s: u32, k: u32, n: Option<u64>, m33: bool) -> Result<Report, Failure> {
    let mut rep = Report::new("local", json!({"p": p, "h": h, "s": s, "k": k, "n": n, "m33": m33}));
    rep.guards = json!({
        "residue_modulus": localsolve::RESIDUE_MODULUS_GUARD,
        "local_count_cost": exact(localsolve::LOCAL_COUNT_COST_GUARD),
    });
    if m33 {
        let set = localsolve::m33_set(p, h)?;
        rep.results = json!({
            "modulus": set.modulus(),
            "size": set.len(),
            "full": set.is_full(),
            "missing": set.missing().collect::<Vec<_>>(),
        });
        return Ok(rep);
    }
    if let Some(n) = n {
        let c = localsolve::local_count(p, h, s, n, k)?;
        let o = localsolve::orthogonality_check(p, h, s, n, k)?;
        rep.results = json!({
            "count": exact(&c.count),
            "count_star": exact(&c.count_star),
            "orthogonality": o,
        });
        rep.tolerances = json!({"orthogonality_relative": 1e-8});
        return Ok(rep);
    }
    let table = localsolve::local_count_table(p, h, s, k)?;
    let q = table.modulus();
    let mut t = Table::new(&["n", "count", "count_star"]);
    let mut total = BigUint::default();
    for n in 0..q {
        total += table.count(n);
        t.push(vec![json!(n), exact(table.count(n)), exact(table.count_star(n))]);
    }
    rep.results = json!({"modulus": q, "total": exact(&total)});
    rep.table = Some(t);
    Ok(rep)
}

fn reps_cmd(p: f64, s: u32, k: u32, mode: ModeArg, eta: Option<f64>, n_max: Option<u64>) -> Result<Report, Failure> {
    let mode = match mode {
        ModeArg::Weighted => CountMode::Weighted,
        ModeArg::Unweighted => CountMode::Unweighted,
        ModeArg::Smooth => CountMode::Smooth,
    };
    let table = match n_max {
        Some(m) => reps::representation_table_upto(p, s, k, mode, eta, m)?,
        None => reps::representation_table(p, s, k, mode, eta)?,
    };
    let mut rep = Report::new("reps", json!({"P": p, "s": s, "k": k, "mode": mode, "eta": table.eta, "n_max": n_max}));
    let mut t = Table::new(&["n", "count"]);
    for (n, c) in table.nonzero() {
        t.push(vec![json!(n), exact(c)]);
    }
    rep.results = json!({"n_max": table.n_max(), "total": exact(table.total()), "nonzero": t.rows.len()});
    rep.table = Some(t);
    rep.guards = json!({"transform_length": MAX_TRANSFORM_LEN, "weight_box": reps::WEIGHT_BOX_GUARD});
    Ok(rep)
}

fn rho(xs: &[f64]) -> Report {
    let mut rep = Report::new("rho", json!({"x": xs}));
    let mut t = Table::new(&["x", "rho", "derivative"]);
    for &x in xs {
        t.push(vec![json!(x), json!(dickman::rho(x)), json!(dickman::rho_derivative(x))]);
    }
    rep.table = Some(t);
    rep
}

fn dissect(n: f64, k: u32, regime: Regime) -> Result<Report, Failure> {
    let d = circle::dissect(regime, n, k)?;
    let mut rep = Report::new("dissect", json!({"n": n, "k": k, "regime": regime}));
    rep.results = json!({
        "P": d.p,
        "q_max": d.q_max,
        "measure": d.measure,
        "arcs": d.arcs.len(),
        "disjoint": d.is_disjoint(),
    });
    let mut t = Table::new(&["a", "q", "center", "half_width"]);
    for a in &d.arcs {
        t.push(vec![json!(a.a), json!(a.q), json!(a.center), json!(a.half_width)]);
    }
    rep.table = Some(t);
    rep.guards = json!({"arc_denominator": circle::ARC_COUNT_GUARD});
    Ok(rep)
}

fn arcint(p: f64, s: u32, k: u32, n: u64, regime: Regime, samples: usize) -> Result<Report, Failure> {
    let big_n = p.floor().powi(3 * k as i32);
    let d = circle::dissect(regime, big_n, k)?;
    let r = circle::arc_integral(p, s, k, n, &d, samples)?;
    let exact_count = reps::representation_table_upto(p, s, k, CountMode::Weighted, None, n)?.get(n);
    let mut rep = Report::new("arcint", json!({"P": p, "s": s, "k": k, "n": n, "regime": regime, "samples": samples}));
    let mut res = to_value(&r);
    res["exact"] = exact(exact_count);
    res["error"] = json!((r.total - exact_count as f64).abs());
    res["arcs"] = json!(d.arcs.len());
    rep.results = res;
    rep.tolerances = json!({"total_vs_exact": 0.05});
    rep.guards = json!({"grid": circle::GRID_GUARD, "arc_denominator": circle::ARC_COUNT_GUARD});
    Ok(rep)
}

fn vbeta(betas: &[f64], p: f64, k: u32, method: MethodArg, decay: Option<i32>) -> Result<Report, Failure> {
    let methods: &[OscMethod] = match method {
        MethodArg::Direct3d => &[OscMethod::Direct3d],
        MethodArg::Reduced1d => &[OscMethod::Reduced1d],
        MethodArg::Both => &[OscMethod::Direct3d, OscMethod::Reduced1d],
    };
    let mut rep = Report::new("vbeta", json!({"beta": betas, "P": p, "k": k, "method": method_name(method), "decay": decay}));
    let mut t = Table::new(&["beta", "method", "re", "im", "abs", "nodes"]);
    let mut worst = 0.0f64;
    for &b in betas {
        let vals = methods
            .iter()
            .map(|&m| circle::v_beta(b, p, k, m))
            .collect::<cubesum::Result<Vec<_>>>()?;
        for v in &vals {
            t.push(vec![json!(b), to_value(&v.method), json!(v.re), json!(v.im), json!(v.value().norm()), json!(v.nodes)]);
        }
        if vals.len() == 2 {
            worst = worst.max((vals[0].value() - vals[1].value()).norm());
        }
    }
    let mut res = json!({"P3": p.powi(3)});
    if methods.len() == 2 {
        res["max_method_gap"] = json!(worst);
    }
    if let Some(j) = decay {
        res["decay_constant"] = json!(circle::decay_constant(p, k, 0..=j)?);
    }
    rep.results = res;
    rep.table = Some(t);
    rep.tolerances = json!({"method_agreement": 1e-4 * p.powi(3)});
    rep.guards = json!({
        "direct_nodes": exact(circle::DIRECT_NODE_BUDGET),
        "reduced_nodes": exact(circle::REDUCED_NODE_BUDGET),
    });
    Ok(rep)
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Direct3d => "direct-3d",
        MethodArg::Reduced1d => "reduced-1d",
        MethodArg::Both => "both",
    }
}

#[allow(clippy::too_many_arguments)]
fn mainterm(
    k: u32,
    s: u32,
    n: Option<u64>,
    eta: Option<f64>,
    q: u64,
    p: Option<f64>,
    stride: u64,
    rows: bool,
) -> Result<Report, Failure> {
    let mut rep = Report::new(
        "mainterm",
        json!({"k": k, "s": s, "n": n, "eta": eta, "Q": q, "P": p, "stride": stride}),
    );
    match (n, p) {
        (Some(n), None) => {
            rep.results = to_value(&predict::main_term(k, s, n, eta, q)?);
        }
        (None, Some(p)) => {
            let r = predict::ratio_report(k, s, p, q, stride)?;
            rep.results = to_value(&r);
            if rows {
                let mut t = Table::new(&["n", "count", "main_term", "ratio"]);
                for &(n, c, m) in &r.rows {
                    t.push(vec![json!(n), exact(c), json!(m), json!(c as f64 / m)]);
                }
                rep.table = Some(t);
            }
            rep.guards = json!({"transform_length": MAX_TRANSFORM_LEN});
        }
        _ => return usage("give exactly one of --n and --P"),
    }
    Ok(rep)
}

fn lowerbound(p: f64, s: u32, k: u32, eta: f64, big_k: f64) -> Result<Report, Failure> {
    let r = predict::lower_bound_r(k, s, p, eta, big_k)?;
    let tail = reps::multiplicity_tail(p, k, eta, big_k)?;
    let mut rep = Report::new("lowerbound", json!({"P": p, "s": s, "k": k, "eta": eta, "K": big_k}));
    let mut t = Table::new(&["n", "r_eta", "r_one", "bound", "witness"]);
    for row in r.rows.iter().filter(|row| row.r_eta > 0) {
        t.push(vec![json!(row.n), exact(row.r_eta), exact(row.r_one), json!(row.bound), exact(row.witness)]);
    }
    rep.results = json!({
        "theta": r.theta,
        "all_hold": r.all_hold,
        "checked": r.rows.len(),
        "tail": tail,
    });
    rep.table = Some(t);
    Ok(rep)
}

fn table1(ks: &[u32]) -> Result<Report, Failure> {
    let ks: Vec<u32> = if ks.is_empty() { (2..=7).collect() } else { ks.to_vec() };
    let mut rep = Report::new("table1", json!({"k": ks}));
    let mut t = Table::new(&["k", "r", "h", "xi0", "p", "q", "t", "s", "residual"]);
    for &k in &ks {
        let a = predict::table1_params(k)?;
        t.push(vec![
            json!(a.k),
            json!(a.r),
            json!(a.h),
            json!(a.xi0),
            json!(a.p_exp),
            json!(a.q_exp),
            json!(a.t),
            json!(a.s),
            json!(a.residual()),
        ]);
    }
    rep.table = Some(t);
    rep.tolerances = json!({"fixed_point": 1e-9});
    Ok(rep)
}

fn moments(ps: &[f64], eta: Option<f64>, q: Option<u64>, h: u32, k: u32) -> Result<Report, Failure> {
    let mut rep = Report::new("moments", json!({"P": ps, "eta": eta, "q": q, "h": h, "k": k}));
    let ms = ps
        .iter()
        .map(|&p| {
            let m = reps::l2_moment(p, eta)?;
            Ok(json!({"P": p, "x_max": m.x_max, "sum_of_squares": exact(m.sum_of_squares)}))
        })
        .collect::<cubesum::Result<Vec<_>>>()?;
    let mut res = json!({"moments": ms});
    if ps.len() >= 2 {
        res["fitted_exponent"] = json!(reps::l2_moment_slope(ps, eta)?.fitted_exponent);
    }
    if let Some(q) = q {
        if q == 0 {
            return usage("modulus must be positive");
        }
        let f = GeneratingSum::from_weights(&reps::weight_table_with_origin(ps[0])?, k)?;
        let lhs: f64 = (1..=q)
            .map(|a| f.eval_rational(a as i64, q).norm().powi(2 * h as i32))
            .sum();
        let n = localsolve::congruence_count(q, ps[0], h, k)?;
        let rhs = q as f64 * n as f64;
        res["identity"] = json!({
            "lhs": lhs,
            "congruence_count": exact(n),
            "rhs": rhs,
            "relative_error": (lhs - rhs).abs() / rhs.max(1.0),
        });
        rep.tolerances = json!({"identity_relative": 1e-6});
    }
    rep.results = res;
    rep.guards = json!({
        "weight_box": reps::WEIGHT_BOX_GUARD,
        "congruence_cost": exact(localsolve::CONGRUENCE_COST_GUARD),
    });
    Ok(rep)
}
