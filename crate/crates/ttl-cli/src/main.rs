use std::collections::BTreeSet;
use std::fmt::Display;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use ttl_core::algebra::{CubicAlgebra, Elem, SplittingType};
use ttl_core::branch::{BranchContext, BranchDescriptor, ZeroSet};
use ttl_core::census::{brute_force_census, singular_census, CensusQuery};
use ttl_core::counts::{brute_force_count, formula_count, is_smooth_fiber, Method};
use ttl_core::rankd::{affine_sharpness, jet_versality, rankd_classify, sharpness_construction};
use ttl_core::stats::{cube_class_tally, jet_family_statistics, singular_point};
use ttl_core::torus::TorusGroup;
use ttl_core::verify::{valid_pset, verify_all, VerifyConfig, DEFAULT_CAP_ENUM, DEFAULT_SEED};
use ttl_core::wieferich::{scan, CubicOrderSpec, ScanEntry};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn internal(e: impl Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "ttl", version, about = "Trace/norm counts, torus cosets and p-adic branch certificates for cubic algebras")]
struct Cli {
    /// Emit one JSON document instead of a table
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized sweeps
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest prime accepted by formula-only commands
    #[arg(long, global = true, default_value_t = 10_007)]
    cap_p: u64,
    /// Largest prime for which the algebra is enumerated
    #[arg(long, global = true, env = "TTL_CAP_ENUM", default_value_t = DEFAULT_CAP_ENUM)]
    cap_enum: u64,
    /// Test hook: report the named verify-all check as failed
    #[arg(long, global = true, hide = true)]
    inject_fault: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Units of B with prescribed trace and norm
    Count(CountArgs),
    /// Nodal fibers: concentration on the exceptional coset
    Nodal(NodalArgs),
    /// Coset counts against the square-root bound
    Coset(CosetArgs),
    /// Singular-line census over a union of norm fibers
    Census(CensusArgs),
    /// Certified zero set of Tr(gamma eta^n) = c mod p^k
    Branch(BranchArgs),
    /// Quadratic jet statistics over the lifts of a singular point
    Jets(JetsArgs),
    /// Cube classes of A disc(omega) over generators
    Cubeclass(CubeclassArgs),
    /// Split rank-d constructions
    Rankd(RankdArgs),
    /// Inert Wieferich scan for a norm-one unit
    Wieferich(WieferichArgs),
    /// Run the verification matrix
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long = "type", value_parser = parse_kind)]
    kind: SplittingType,
}

fn parse_kind(s: &str) -> Result<SplittingType, String> {
    s.parse().map_err(|e: ttl_core::algebra::AlgebraError| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CountMethod {
    Both,
    Brute,
    Formula,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    s: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, value_enum, default_value = "both")]
    method: CountMethod,
}

#[derive(Debug, Args)]
struct NodalArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
}

#[derive(Debug, Args)]
struct CosetArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long)]
    s: u64,
    /// Every subgroup instead of the cyclic ones
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Debug, Args)]
struct CensusArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, allow_hyphen_values = true)]
    omega: String,
    #[arg(long)]
    s: u64,
    /// Comma-separated deltas or "all"
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    fibers: String,
}

#[derive(Debug, Args)]
struct BranchArgs {
    /// "p=5;k=3;f=f0,f1,f2" or "p=5;split=r1,r2,r3"
    #[arg(long)]
    algebra: String,
    #[arg(long, allow_hyphen_values = true)]
    eta: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    c: i128,
    #[arg(long)]
    k: u32,
    /// Compare against a direct scan
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct JetsArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Singular point (defaults to the first unit on the singular line)
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega: String,
    #[arg(long)]
    c: u64,
    /// Lift U of omega (defaults to omega itself)
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
}

#[derive(Debug, Args)]
struct CubeclassArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long = "A")]
    a: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Demo {
    Sharpness,
    Versality,
    Affine,
}

#[derive(Debug, Args)]
struct RankdArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum)]
    demo: Demo,
    /// Jet coefficients in the binomial basis (versality)
    #[arg(long, allow_hyphen_values = true)]
    q_coeffs: Option<String>,
    /// Tangent coordinates (default 1..d)
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Debug, Args)]
struct WieferichArgs {
    /// g0,g1,g2 of T^3 + g2 T^2 + g1 T + g0
    #[arg(long, allow_hyphen_values = true)]
    g: String,
    /// Coefficients of 1, t, t^2
    #[arg(long, allow_hyphen_values = true)]
    eta: String,
    #[arg(long, default_value_t = 5)]
    pmin: u64,
    #[arg(long, default_value_t = 200)]
    pmax: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "5,7")]
    pset: String,
    /// Restrict to these criteria (comma-separated)
    #[arg(long)]
    criteria: Option<String>,
    /// Random branch contexts per splitting type
    #[arg(long, default_value_t = 500)]
    contexts: usize,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|t| t.trim().replace('\u{2212}', "-").parse::<T>().map_err(|_| usage(format!("bad list entry in '{s}'"))))
        .collect()
}

struct Ctx {
    json: bool,
    seed: u64,
    cap_p: u64,
    cap_enum: u64,
    fault: Option<String>,
}

impl Ctx {
    fn emit<T: Serialize>(&self, value: &T, table: impl FnOnce() -> String) -> Result<(), CliError> {
        let text = if self.json {
            serde_json::to_string_pretty(value).map_err(internal)? + "\n"
        } else {
            table()
        };
        // a closed pipe (e.g. `| head`) is not an error
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
        Ok(())
    }

    fn algebra(&self, f: &FieldArgs, k: u32) -> Result<CubicAlgebra, CliError> {
        if f.p > self.cap_p {
            return Err(usage(format!("p = {} exceeds --cap-p {}", f.p, self.cap_p)));
        }
        CubicAlgebra::standard_k(f.p, k, f.kind).map_err(usage)
    }

    fn torus(&self, f: &FieldArgs) -> Result<TorusGroup, CliError> {
        TorusGroup::enumerate(&self.algebra(f, 1)?, self.cap_enum).map_err(usage)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "ok"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct CountOut {
    p: u64,
    #[serde(rename = "type")]
    kind: SplittingType,
    s: u64,
    n: u64,
    smooth: bool,
    value_brute: Option<u64>,
    value_formula: Option<u64>,
    elliptic: Option<u64>,
    sign: i64,
    fixed_labels: u64,
    exceptional: Option<u64>,
    agree: bool,
}

fn cmd_count(cx: &Ctx, a: &CountArgs) -> Result<bool, CliError> {
    let alg = cx.algebra(&a.field, 1)?;
    let (p, s, n) = (a.field.p, a.s % a.field.p, a.n % a.field.p);
    let smooth = is_smooth_fiber(p, s, n).map_err(usage)?;
    let formula = match a.method {
        CountMethod::Brute => None,
        _ => Some(formula_count(a.field.kind, p, s, n).map_err(usage)?),
    };
    let brute = match a.method {
        CountMethod::Formula => None,
        _ => Some(brute_force_count(&alg, s, n, cx.cap_enum).map_err(usage)?.value),
    };
    let comp = formula.and_then(|f| f.components);
    let out = CountOut {
        p,
        kind: a.field.kind,
        s,
        n,
        smooth,
        value_brute: brute,
        value_formula: formula.map(|f| f.value),
        elliptic: comp.and_then(|c| c.elliptic_count),
        sign: a.field.kind.frobenius_sign(),
        fixed_labels: a.field.kind.fixed_labels(),
        exceptional: comp.and_then(|c| c.exceptional_size),
        agree: match (brute, formula) {
            (Some(b), Some(f)) => b == f.value,
            _ => true,
        },
    };
    cx.emit(&out, || {
        let mut t = format!("p={p} type={} s={s} n={n} fiber={}\n", a.field.kind, if smooth { "smooth" } else { "nodal" });
        if let Some(f) = formula {
            let how = if f.method == Method::NodalFormula { "nodal formula" } else { "smooth formula" };
            t += &format!("  {how:<15} {}\n", f.value);
        }
        if let Some(b) = brute {
            t += &format!("  {:<15} {b}\n", "brute force");
        }
        t += &format!("  {}\n", verdict(out.agree));
        t
    })?;
    Ok(out.agree)
}

fn parse_elem(alg: &CubicAlgebra, s: &str) -> Result<Elem, CliError> {
    alg.parse_elem(s).map_err(usage)
}

fn cmd_nodal(cx: &Ctx, a: &NodalArgs) -> Result<bool, CliError> {
    let t = cx.torus(&a.field)?;
    let alg = t.algebra().clone();
    let gamma = parse_elem(&alg, &a.gamma)?;
    let f = alg.modulus();
    let n = alg.norm(&gamma);
    if n == 0 {
        return Err(usage("gamma must be a unit"));
    }
    let exc = t.exceptional_group();
    let (_, reps) = t.cosets(&exc.kernel);
    #[derive(Serialize)]
    struct Fiber {
        s: u64,
        concentration: ttl_core::torus::NodalConcentration,
        cosets: Vec<ttl_core::torus::NodalCosetCheck>,
    }
    let mut fibers = Vec::new();
    for s in 1..a.field.p {
        if f.pow(s as u128, 3) != f.mul(27, n) {
            continue;
        }
        let concentration = t.nodal_concentration_check(&gamma, s).map_err(internal)?;
        let cosets = reps
            .iter()
            .map(|&g| t.nodal_coset_check(&exc.kernel, g, &gamma, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(internal)?;
        fibers.push(Fiber { s, concentration, cosets });
    }
    let pass = fibers.iter().all(|x| x.concentration.pass && x.cosets.iter().all(|c| c.pass));
    #[derive(Serialize)]
    struct Out {
        p: u64,
        #[serde(rename = "type")]
        kind: SplittingType,
        gamma: Elem,
        exceptional_size: u64,
        fibers: Vec<Fiber>,
        pass: bool,
    }
    let out = Out { p: a.field.p, kind: a.field.kind, gamma, exceptional_size: exc.size, fibers, pass };
    cx.emit(&out, || {
        let mut t = format!("p={} type={} gamma={gamma} |E_B|={}\n", out.p, out.kind, out.exceptional_size);
        if out.fibers.is_empty() {
            t += "  no nodal fiber for this norm\n";
        }
        for fb in &out.fibers {
            let c = &fb.concentration;
            t += &format!("  s={}: {} points (expected {}), h_* = {}, in one coset: {}\n", fb.s, c.points, c.expected, c.h_star, c.all_in_coset);
            let counts: Vec<u64> = fb.cosets.iter().map(|x| x.count).collect();
            t += &format!("    counts on cosets of K: {counts:?}\n");
        }
        t += &format!("  {}\n", verdict(out.pass));
        t
    })?;
    Ok(pass)
}

fn cmd_coset(cx: &Ctx, a: &CosetArgs) -> Result<bool, CliError> {
    let t = cx.torus(&a.field)?;
    let gamma = parse_elem(t.algebra(), &a.gamma)?;
    let subs = if a.exhaustive {
        t.enumerate_subgroups(None)
    } else {
        let mut seen = BTreeSet::new();
        (0..t.order())
            .map(|x| t.subgroup_generated(&[x]))
            .filter(|h| seen.insert(h.members.clone()))
            .collect()
    };
    #[derive(Serialize)]
    struct Row {
        subgroup_order: usize,
        coset: usize,
        bound: ttl_core::torus::CosetBound,
    }
    let mut rows = Vec::new();
    for h in &subs {
        let (_, reps) = t.cosets(h);
        for g in reps {
            let bound = t.verify_coset_bound(h, g, &gamma, a.s).map_err(usage)?;
            rows.push(Row { subgroup_order: h.order(), coset: g, bound });
        }
    }
    let pass = rows.iter().all(|r| r.bound.pass);
    let worst = rows
        .iter()
        .filter(|r| r.bound.rhs > 0)
        .map(|r| (r.bound.lhs as f64 / r.bound.rhs as f64, r))
        .fold(None::<(f64, &Row)>, |acc, x| match acc {
            Some(a) if a.0 >= x.0 => Some(a),
            _ => Some(x),
        });
    #[derive(Serialize)]
    struct Out<'a> {
        p: u64,
        #[serde(rename = "type")]
        kind: SplittingType,
        gamma: Elem,
        s: u64,
        subgroups: usize,
        rows: &'a [Row],
        pass: bool,
    }
    let out = Out { p: a.field.p, kind: a.field.kind, gamma, s: a.s % a.field.p, subgroups: subs.len(), rows: &rows, pass };
    cx.emit(&out, || {
        let mut s = format!(
            "p={} type={} gamma={gamma} s={}: {} subgroups, {} cosets\n",
            out.p,
            out.kind,
            out.s,
            out.subgroups,
            rows.len()
        );
        if let Some((ratio, r)) = worst {
            s += &format!(
                "  tightest: |H|={} m={} N_gH={} N_B={} (ratio {ratio:.3})\n",
                r.subgroup_order, r.bound.m, r.bound.coset_count, r.bound.fiber_size
            );
        }
        s += &format!("  {}\n", verdict(pass));
        s
    })?;
    Ok(pass)
}

fn cmd_census(cx: &Ctx, a: &CensusArgs) -> Result<bool, CliError> {
    let alg = cx.algebra(&a.field, 1)?;
    let gamma = parse_elem(&alg, &a.gamma)?;
    let omega = parse_elem(&alg, &a.omega)?;
    let p = a.field.p;
    let fibers: Vec<u64> = if a.fibers.trim() == "all" {
        (1..p).collect()
    } else {
        parse_list::<i64>(&a.fibers)?.into_iter().map(|d| d.rem_euclid(p as i64) as u64).collect()
    };
    let q = CensusQuery::new(&alg, gamma, omega, a.s, fibers).map_err(usage)?;
    let report = singular_census(&q).map_err(internal)?;
    let brute = (p <= cx.cap_enum).then(|| brute_force_census(&q));
    let pass = brute.map_or(true, |(m, s)| m == report.total && s == report.singular);
    #[derive(Serialize)]
    struct Out<'a> {
        query: &'a CensusQuery,
        census: &'a ttl_core::census::CensusReport,
        brute: Option<(u64, u64)>,
        pass: bool,
    }
    cx.emit(&Out { query: &q, census: &report, brute, pass }, || {
        let mut t = format!("{} gamma={} omega={} s={} fibers={:?}\n", q.algebra, q.gamma, q.omega, q.s, q.fibers);
        t += &format!("  M = {}  S = {}  transverse = {}\n", report.total, report.singular, report.transverse);
        for f in &report.fibers {
            t += &format!("    delta={} N={} total={} singular={}\n", f.delta, f.norm, f.total, f.singular);
        }
        if let Some((m, s)) = brute {
            t += &format!("  brute force M = {m}  S = {s}: {}\n", verdict(pass));
        }
        t
    })?;
    Ok(pass)
}

fn cmd_branch(cx: &Ctx, a: &BranchArgs) -> Result<bool, CliError> {
    let base: CubicAlgebra = a.algebra.parse().map_err(usage)?;
    if base.p() > cx.cap_p {
        return Err(usage(format!("p = {} exceeds --cap-p {}", base.p(), cx.cap_p)));
    }
    let alg = base.with_precision(a.k).map_err(usage)?;
    let eta = parse_elem(&alg, &a.eta)?;
    let gamma = parse_elem(&alg, &a.gamma)?;
    let c = alg.modulus().from_i128(a.c);
    let ctx = BranchContext::new(alg.clone(), eta, gamma, c).map_err(usage)?;
    let cert = ctx.certified_zero_set().map_err(internal)?;
    let oracle: Option<ZeroSet> = if a.oracle { Some(ctx.oracle(1 << 22).map_err(usage)?) } else { None };
    let agree = oracle.as_ref().map(|o| cert.zeros.same_as(o));
    #[derive(Serialize)]
    struct Out<'a> {
        algebra: String,
        eta: Elem,
        gamma: Elem,
        c: u128,
        period: u128,
        modulus: u128,
        s_div: u32,
        descriptors: &'a [BranchDescriptor],
        #[serde(skip_serializing_if = "Option::is_none")]
        classes: Option<&'a BTreeSet<u128>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_agrees: Option<bool>,
    }
    let show_classes = cert.zeros.classes.len() <= 4096;
    let out = Out {
        algebra: alg.spec_string(),
        eta: ctx.eta(),
        gamma: ctx.gamma(),
        c,
        period: ctx.period(),
        modulus: cert.modulus,
        s_div: cert.s_div,
        descriptors: &cert.descriptors,
        classes: show_classes.then_some(&cert.zeros.classes),
        oracle_agrees: agree,
    };
    cx.emit(&out, || {
        let mut t = format!("{} eta={} gamma={} c={c}: period {}, classes mod {}\n", out.algebra, out.eta, out.gamma, out.period, out.modulus);
        for d in &cert.descriptors {
            t += &format!("  {}\n", describe(d));
        }
        t += &format!("  {} zero classes", cert.zeros.classes.len());
        if show_classes && cert.zeros.classes.len() <= 32 {
            t += &format!(": {:?}", cert.zeros.classes);
        }
        t += "\n";
        if let Some(ok) = agree {
            t += &format!("  oracle: {}\n", if ok { "agrees" } else { "DISAGREES" });
        }
        t
    })?;
    Ok(agree.unwrap_or(true))
}

fn describe(d: &BranchDescriptor) -> String {
    use ttl_core::branch::Branch;
    let branches = |bs: &[Branch]| {
        bs.iter()
            .map(|b| match b {
                Branch::SimpleRoot { r, tau, precision } => format!("simple root {r} (t = {tau} mod p^{precision})"),
                Branch::WeierstrassDisk { r, factor } => format!("disk at {r}, factor of degree {}", factor.degree()),
            })
            .collect::<Vec<_>>()
            .join("; ")
    };
    match d {
        BranchDescriptor::AllSolutions => "all classes".into(),
        BranchDescriptor::NoSolutions => "no classes".into(),
        BranchDescriptor::DeadModP { a } => format!("a={a}: dead mod p"),
        BranchDescriptor::RetainedModP { a } => format!("a={a}: kept mod p"),
        BranchDescriptor::TransverseSimple { a, tau, precision, .. } => format!("a={a}: transverse, t = {tau} mod p^{precision}"),
        BranchDescriptor::SingularObstructed { a, obstruction } => format!("a={a}: singular, obstructed ({obstruction})"),
        BranchDescriptor::SingularAllModP2 { a } => format!("a={a}: singular, jet vanishes"),
        BranchDescriptor::SingularNoRoot { a, jet } => format!("a={a}: singular, jet {jet:?} has no root"),
        BranchDescriptor::SingularSurviving { a, jet, branches: b } => format!("a={a}: singular, jet {jet:?}: {}", branches(b)),
        BranchDescriptor::CubicNoRoot { a, jet } => format!("a={a}: cubic jet {jet:?} has no root"),
        BranchDescriptor::CubicSurviving { a, jet, branches: b } => format!("a={a}: cubic jet {jet:?}: {}", branches(b)),
        BranchDescriptor::Recursion { a, reason, residues } => format!("a={a}: digit recursion ({reason}), {} residues", residues.len()),
        BranchDescriptor::InflationWrapper { inner, free_digits } => format!("{} [+{free_digits} free digits]", describe(inner)),
    }
}

fn cmd_jets(cx: &Ctx, a: &JetsArgs) -> Result<bool, CliError> {
    let alg = cx.algebra(&a.field, 3)?;
    let omega = parse_elem(&alg, &a.omega)?;
    let x = match &a.x {
        Some(s) => parse_elem(&alg, s)?,
        None => singular_point(&alg, &omega, a.c).ok_or_else(|| usage("no unit on the singular line"))?,
    };
    let u = match &a.u {
        Some(s) => parse_elem(&alg, s)?,
        None => omega,
    };
    let cap = (cx.cap_enum as u128).pow(6).min(1 << 26);
    let t = jet_family_statistics(&alg, &omega, &x, a.c, &u, cap).map_err(usage)?;
    let pass = t.frequencies_exact && t.uniform && t.jet_identity;
    cx.emit(&t, || {
        let mut s = format!("p={} type={} x={x} omega={omega} c={}\n", a.field.p, a.field.kind, a.c);
        s += &format!("  {} of {} lifts survive\n", t.surviving, t.lifts);
        s += &format!(
            "  nonsquare {} ({}), nonzero square {} ({}), zero {} ({})\n",
            t.nonsquare, t.freq_nonsquare, t.nonzero_square, t.freq_nonzero_square, t.zero, t.freq_zero
        );
        s += &format!("  (A,B) uniform: {}  jet identity: {}  {}\n", t.uniform, t.jet_identity, verdict(pass));
        s
    })?;
    Ok(pass)
}

fn cmd_cubeclass(cx: &Ctx, a: &CubeclassArgs) -> Result<bool, CliError> {
    let alg = cx.algebra(&a.field, 1)?;
    if a.field.p > cx.cap_enum {
        return Err(usage(format!("p = {} exceeds the enumeration cap {}", a.field.p, cx.cap_enum)));
    }
    let t = cube_class_tally(&alg, a.a).map_err(usage)?;
    cx.emit(&t, || {
        let mut s = format!("q={} type={} A={}: {} generators\n", t.q, a.field.kind, t.scalar, t.generators);
        s += &format!("  cube classes {:?}, within bound {:?}\n", t.counts, t.within_bound);
        for (e, ok) in &t.character_sums {
            s += &format!("  character sum {} + {} zeta, norm {} ({})\n", e.a, e.b, e.norm(), verdict(*ok));
        }
        s += &format!("  {}\n", verdict(t.pass));
        s
    })?;
    Ok(t.pass)
}

fn cmd_rankd(cx: &Ctx, a: &RankdArgs) -> Result<bool, CliError> {
    if a.p > cx.cap_p {
        return Err(usage(format!("p = {} exceeds --cap-p {}", a.p, cx.cap_p)));
    }
    if a.d < 2 {
        return Err(usage("d must be at least 2"));
    }
    let omega: Vec<i128> = match &a.omega {
        Some(s) => parse_list(s)?,
        None => (1..=a.d as i128).collect(),
    };
    #[derive(Serialize)]
    struct Out<T: Serialize> {
        demo: &'static str,
        result: T,
        record: Option<ttl_core::rankd::RankDBranchRecord>,
    }
    match a.demo {
        Demo::Sharpness => {
            let (ctx, s) = sharpness_construction(a.p, a.d, &omega, a.k.unwrap_or(a.d as u32 + 1)).map_err(usage)?;
            let record = rankd_classify(&ctx, 0).ok();
            cx.emit(&Out { demo: "sharpness", result: &s, record }, || {
                format!("p={} d={} omega={omega:?}: F(0..d-1) = {:?}  {}\n", a.p, a.d, s.values, verdict(s.pass))
            })?;
            Ok(s.pass)
        }
        Demo::Affine => {
            let (ctx, s) = affine_sharpness(a.p, a.d, &omega, a.k.unwrap_or(a.d as u32 + 2)).map_err(usage)?;
            let record = rankd_classify(&ctx, 0).ok();
            cx.emit(&Out { demo: "affine", result: &s, record }, || {
                format!(
                    "p={} d={} omega={omega:?}: a0={} F(0..d) = {:?} (expected -a0 p^d = {})  {}\n",
                    a.p,
                    a.d,
                    s.a0,
                    s.values,
                    s.expected_last,
                    verdict(s.pass)
                )
            })?;
            Ok(s.pass)
        }
        Demo::Versality => {
            let jet: Vec<u64> = match &a.q_coeffs {
                Some(s) => parse_list::<i64>(s)?.into_iter().map(|c| c.rem_euclid(a.p as i64) as u64).collect(),
                None => vec![1; a.d],
            };
            let e = jet.len().max(1) as u32;
            let (ctx, v) = jet_versality(a.p, a.d, &omega, &jet, a.k.unwrap_or(e + 2)).map_err(usage)?;
            let record = rankd_classify(&ctx, 0).ok();
            cx.emit(&Out { demo: "versality", result: &v, record }, || {
                format!("p={} d={} jet {:?}: reduced jet {:?}, values match: {}  {}\n", a.p, a.d, v.jet, v.reduced_jet, v.values_match, verdict(v.pass))
            })?;
            Ok(v.pass)
        }
    }
}

fn cmd_wieferich(cx: &Ctx, a: &WieferichArgs) -> Result<bool, CliError> {
    if a.pmax > cx.cap_p {
        return Err(usage(format!("pmax = {} exceeds --cap-p {}", a.pmax, cx.cap_p)));
    }
    let spec = CubicOrderSpec::parse(&a.g, &a.eta).map_err(usage)?;
    let rep = scan(&spec, a.pmin, a.pmax).map_err(internal)?;
    cx.emit(&rep, || {
        let mut t = format!("g={:?} eta={:?} disc={} primes {}..={}\n", spec.g, spec.eta, spec.disc, a.pmin, a.pmax);
        for e in &rep.entries {
            match e {
                ScanEntry::Inert(w) => {
                    let r = w.r.map_or("indeterminate".to_string(), |r| r.to_string());
                    t += &format!(
                        "  p={:<4} inert  P={:<8} r={r:<3} omega={:?}{}\n",
                        w.p,
                        w.period,
                        w.omega_r.unwrap_or(w.omega_p),
                        if w.wieferich { "  WIEFERICH" } else { "" }
                    );
                }
                ScanEntry::Skipped { p, reason } => t += &format!("  p={p:<4} {reason}\n"),
            }
        }
        t += &format!("  {} inert, hits {:?}, checks {}\n", rep.inert, rep.hits, verdict(rep.all_checks));
        t
    })?;
    Ok(rep.all_checks)
}

fn cmd_verify(cx: &Ctx, a: &VerifyArgs) -> Result<bool, CliError> {
    let pset: Vec<u64> = parse_list(&a.pset)?;
    if !valid_pset(&pset) {
        return Err(usage("pset must list primes >= 5"));
    }
    let only: Vec<u8> = match &a.criteria {
        Some(s) => parse_list(s)?,
        None => Vec::new(),
    };
    if only.iter().any(|&c| !(1..=9).contains(&c)) {
        return Err(usage("criteria are numbered 1 to 9"));
    }
    let cfg = VerifyConfig {
        pset,
        seed: cx.seed,
        cap_enum: cx.cap_enum,
        branch_contexts: a.contexts,
        fault: cx.fault.clone(),
        ..VerifyConfig::default()
    };
    let m = verify_all(&cfg, &only);
    cx.emit(&m, || {
        let mut t = String::new();
        for c in &m.criteria {
            t += &format!("criterion {}: {} ({}; {} checks, {} failed)\n", c.criterion, if c.pass { "PASS" } else { "FAIL" }, c.title, c.checks, c.failed);
            for r in c.records.iter().filter(|r| !r.pass) {
                t += &format!("    {} [{}] expected {} got {}\n", r.id, r.parameters, r.expected, r.got);
            }
        }
        t += &format!("{} checks, {} failed (seed {})\n", m.checks, m.failed, cfg.seed);
        t
    })?;
    Ok(m.pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let cx = Ctx { json: cli.json, seed: cli.seed, cap_p: cli.cap_p, cap_enum: cli.cap_enum, fault: cli.inject_fault };
    match &cli.command {
        Command::Count(a) => cmd_count(&cx, a),
        Command::Nodal(a) => cmd_nodal(&cx, a),
        Command::Coset(a) => cmd_coset(&cx, a),
        Command::Census(a) => cmd_census(&cx, a),
        Command::Branch(a) => cmd_branch(&cx, a),
        Command::Jets(a) => cmd_jets(&cx, a),
        Command::Cubeclass(a) => cmd_cubeclass(&cx, a),
        Command::Rankd(a) => cmd_rankd(&cx, a),
        Command::Wieferich(a) => cmd_wieferich(&cx, a),
        Command::VerifyAll(a) => cmd_verify(&cx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("ttl: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
