//! Command-line front end.
//!
//! Every command produces a [`CommandResult`]; the binary prints its text or
//! JSON form and exits with the status code.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curve::{self, CurveTable, WeierstrassModel};
use crate::descent::{self, quadratic};
use crate::error::{Error, Result};
use crate::fieldsearch::{self, Outcome};
use crate::galois;
use crate::lseries::{self, Balance, LSeriesConfig, Verdict};
use crate::numtheory;
use crate::reduction;
use crate::rootnum::{self, Sign};

/// Default label when no curve is given.
pub const DEFAULT_LABEL: &str = "15a1";

/// Balance used for root number -1, where A = 1 makes the sum vanish
/// identically.
pub const MINUS_SIGN_BALANCE: Balance = Balance { num: 6, den: 5 };

/// Multiple of the tail bound within which a forced zero must fall.
pub const FORCED_ZERO_FACTOR: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(name = "twistgate", version, about = "Root numbers, twists and L(E,1) evidence for X0(15) and X0(21)")]
pub struct Cli {
    /// Emit one JSON document on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Required ratio |L(E,1)| / tail bound for nonzero evidence.
    #[arg(long, global = true, default_value_t = lseries::DEFAULT_MARGIN)]
    pub margin: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CurveArgs {
    /// Curve label from the table (default 15a1).
    #[arg(long, conflicts_with = "curve")]
    pub label: Option<String>,
    /// Weierstrass coefficients a1,a2,a3,a4,a6.
    #[arg(long, allow_hyphen_values = true)]
    pub curve: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants, discriminant and j-invariant.
    CurveInfo(CurveArgs),
    /// Reduction type and point count at a prime.
    Reduction {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        p: u64,
    },
    /// Global root number as a product of local factors.
    RootNumber {
        #[command(flatten)]
        curve: CurveArgs,
        /// Squarefree d: report the quadratic twist by d.
        #[arg(long, allow_hyphen_values = true)]
        twist: Option<i64>,
    },
    /// Compare the twist formula with the local product for all d <= dmax.
    TwistRootCheck {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        dmax: i64,
    },
    /// Truncated-series estimate of L(E,1).
    Lvalue {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        terms: Option<usize>,
        /// Balance A as NUM/DEN (default 1 for w = +1, 6/5 for w = -1).
        #[arg(long)]
        balance: Option<String>,
    },
    /// Hypotheses of Serre's surjectivity criterion mod ell.
    SerreCheck {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        ell: u64,
        /// Auxiliary good prime (default 7 for 15a1, 5 for 21a1).
        #[arg(long)]
        aux: Option<u64>,
    },
    /// Admissible tuples d_1 < ... < d_r <= bound.
    Search {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        bound: u64,
    },
    /// Run every character twist over Q(sqrt d_1, ..., sqrt d_r).
    CheckHypothesis {
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u64>,
    },
    /// Descent identities: eigenspace sums or the twist correspondence.
    DescentCheck(DescentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Lemma {
    Sum,
    Tmw,
}

#[derive(Debug, Args)]
pub struct DescentArgs {
    #[arg(long, value_enum)]
    pub lemma: Lemma,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Largest k for (Z/2^k)^n.
    #[arg(long, required_if_eq("lemma", "sum"))]
    pub k: Option<u32>,
    /// Largest n for (Z/2^k)^n.
    #[arg(long, required_if_eq("lemma", "sum"))]
    pub n: Option<usize>,
    /// Largest number of generators.
    #[arg(long, required_if_eq("lemma", "sum"))]
    pub r: Option<usize>,
    #[arg(long, required_if_eq("lemma", "tmw"))]
    pub d: Option<i64>,
    #[arg(long, required_if_eq("lemma", "tmw"))]
    pub height: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    CheckFailed,
    UnsupportedInput,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::UnsupportedInput => 2,
        }
    }

    fn from_pass(pass: bool) -> Status {
        if pass {
            Status::Ok
        } else {
            Status::CheckFailed
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub status: Status,
    pub command: String,
    pub payload: Value,
    #[serde(skip)]
    pub text: String,
}

impl CommandResult {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    fn from_error(command: &str, err: &Error) -> Self {
        let status = if err.is_unsupported() { Status::UnsupportedInput } else { Status::CheckFailed };
        CommandResult {
            status,
            command: command.to_string(),
            payload: json!({ "error": err.to_string() }),
            text: format!("error: {err}"),
        }
    }

    /// The single JSON document for `--json`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Resolved {
    label: Option<String>,
    model: WeierstrassModel,
}

fn resolve(args: &CurveArgs) -> Result<Resolved> {
    if let Some(c) = &args.curve {
        let bad = || Error::InvalidArgument(format!("--curve {c:?} is not five integers a1,a2,a3,a4,a6"));
        let parsed: Vec<i64> = c.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let coeffs: [i64; 5] = parsed.try_into().map_err(|_| bad())?;
        return Ok(Resolved { label: None, model: WeierstrassModel::from_coeffs(coeffs)? });
    }
    let label = args.label.clone().unwrap_or_else(|| DEFAULT_LABEL.to_string());
    let table = CurveTable::load()?;
    let model = table.get(&label)?.clone();
    Ok(Resolved { label: Some(label.to_ascii_lowercase()), model })
}

impl Resolved {
    fn name(&self) -> String {
        match &self.label {
            Some(l) => format!("{l} {}", self.model),
            None => self.model.to_string(),
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CurveInfo(_) => "curve-info",
        Command::Reduction { .. } => "reduction",
        Command::RootNumber { .. } => "root-number",
        Command::TwistRootCheck { .. } => "twist-root-check",
        Command::Lvalue { .. } => "lvalue",
        Command::SerreCheck { .. } => "serre-check",
        Command::Search { .. } => "search",
        Command::CheckHypothesis { .. } => "check-hypothesis",
        Command::DescentCheck(_) => "descent-check",
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> CommandResult {
    let name = command_name(&cli.command);
    match dispatch(cli) {
        Ok((status, payload, text)) => CommandResult { status, command: name.to_string(), payload, text },
        Err(err) => CommandResult::from_error(name, &err),
    }
}

/// Parses `argv` (program name first) and runs it. Usage errors come back
/// as `Err` with clap's rendered message.
pub fn run<I, T>(argv: I) -> std::result::Result<CommandResult, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(execute(&cli))
}

type Outcome3 = (Status, Value, String);

fn dispatch(cli: &Cli) -> Result<Outcome3> {
    if !(cli.margin.is_finite() && cli.margin > 0.0) {
        return Err(Error::InvalidArgument(format!("margin {} must be positive", cli.margin)));
    }
    match &cli.command {
        Command::CurveInfo(args) => curve_info(args),
        Command::Reduction { curve, p } => reduction_cmd(curve, *p),
        Command::RootNumber { curve, twist } => root_number_cmd(curve, *twist),
        Command::TwistRootCheck { curve, dmax } => twist_root_check(curve, *dmax),
        Command::Lvalue { curve, terms, balance } => lvalue_cmd(curve, *terms, balance.as_deref(), cli.margin),
        Command::SerreCheck { curve, ell, aux } => serre_cmd(curve, *ell, *aux),
        Command::Search { p, r, bound } => search_cmd(*p, *r, *bound),
        Command::CheckHypothesis { p, d } => check_hypothesis_cmd(*p, d, cli.margin),
        Command::DescentCheck(args) => descent_cmd(args),
    }
}

fn curve_info(args: &CurveArgs) -> Result<Outcome3> {
    let c = resolve(args)?;
    let inv = c.model.invariants()?;
    let short = curve::short_form(&c.model);
    let conductor = reduction::conductor(&c.model).ok();
    let delta_primes = reduction::discriminant_primes(&c.model)?;
    let payload = json!({
        "label": c.label,
        "model": c.model,
        "invariants": inv,
        "short_form": short,
        "conductor": conductor,
        "discriminant_primes": delta_primes,
    });
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    writeln!(t, "invariants (b2, b4, b6, b8) = ({}, {}, {}, {})", inv.b2, inv.b4, inv.b6, inv.b8).ok();
    writeln!(t, "c4 = {}, c6 = {}", inv.c4, inv.c6).ok();
    writeln!(t, "Delta = (c4^3 - c6^2)/1728 = {}", inv.delta).ok();
    writeln!(t, "j = c4^3/Delta = {}", inv.j).ok();
    writeln!(t, "short form: Y^2 = X^3 + ({})X + ({})", short.a, short.b).ok();
    match conductor {
        Some(n) => writeln!(t, "conductor: {n}").ok(),
        None => writeln!(t, "conductor: unavailable (additive reduction at 2 or 3)").ok(),
    };
    Ok((Status::Ok, payload, t))
}

fn reduction_cmd(args: &CurveArgs, p: u64) -> Result<Outcome3> {
    let c = resolve(args)?;
    let data = reduction::classify(&c.model, p)?;
    let consistent = data.is_consistent();
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    writeln!(t, "p = {p}: {} reduction", data.kind).ok();
    writeln!(t, "#E(F_{p}) = {} (affine solutions plus infinity, counted with square roots mod p)", data.points).ok();
    writeln!(t, "a_p = {}", data.a_p).ok();
    if data.kind.is_multiplicative() {
        writeln!(t, "split or nonsplit read off from p + 1 - #E(F_p) = +1 or -1").ok();
    }
    Ok((Status::from_pass(consistent), json!({ "reduction": data, "consistent": consistent }), t))
}

fn root_number_text(t: &mut String, rn: &rootnum::RootNumber) {
    for lf in &rn.local_factors {
        writeln!(t, "  w_{:<4} = {:>2}   {}", lf.place.to_string(), lf.sign.to_string(), lf.case.rule()).ok();
    }
    writeln!(t, "  w = product of local root numbers = {}", rn.value).ok();
}

fn root_number_cmd(args: &CurveArgs, twist: Option<i64>) -> Result<Outcome3> {
    let c = resolve(args)?;
    let base = rootnum::global_root_number(&c.model)?;
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    root_number_text(&mut t, &base);
    let Some(d) = twist else {
        return Ok((Status::Ok, json!({ "root_number": base }), t));
    };
    let model = curve::quadratic_twist(&c.model, d)?;
    let direct = rootnum::global_root_number(&model)?;
    writeln!(t, "twist by d = {d}: {model}").ok();
    root_number_text(&mut t, &direct);
    let formula = rootnum::twist_root_number_formula(&c.model, d);
    let (status, formula_json) = match &formula {
        Ok(sign) => {
            let n = reduction::conductor(&c.model)?;
            let chi = numtheory::jacobi(d, n)?;
            writeln!(t, "twist formula: ({d}/{n}) * w(E) = {chi} * {} = {sign}", base.value).ok();
            let agrees = *sign == direct.value;
            writeln!(t, "formula {} the local product", if agrees { "agrees with" } else { "DISAGREES with" }).ok();
            (Status::from_pass(agrees), json!({ "value": sign, "agrees": agrees }))
        }
        Err(e) => {
            writeln!(t, "twist formula not applicable: {e}").ok();
            (Status::Ok, json!({ "not_applicable": e.to_string() }))
        }
    };
    let payload = json!({
        "root_number": base,
        "twist": { "d": d, "model": model, "root_number": direct, "formula": formula_json },
    });
    Ok((status, payload, t))
}

fn twist_root_check(args: &CurveArgs, dmax: i64) -> Result<Outcome3> {
    let c = resolve(args)?;
    if dmax < 1 {
        return Err(Error::InvalidArgument("dmax must be positive".into()));
    }
    // surface hypothesis violations on the base curve before sweeping
    rootnum::twist_root_number_formula(&c.model, 1)?;
    let rows = rootnum::twist_formula_sweep(&c.model, dmax)?;
    let mismatches: Vec<i64> = rows.iter().filter(|r| !r.agrees()).map(|r| r.d).collect();
    let minus = rows.iter().filter(|r| r.formula == Sign::Minus).count();
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    writeln!(t, "twist formula w(E^(d)) = (d/N) w(E) against the local product of E^(d)").ok();
    writeln!(t, "squarefree d = 1 mod 4, gcd(d, N) = 1, d <= {dmax}: {} values", rows.len()).ok();
    writeln!(t, "root number -1 for {minus} of them").ok();
    if mismatches.is_empty() {
        writeln!(t, "all agree").ok();
    } else {
        writeln!(t, "MISMATCH at d = {}", mismatches.iter().join(", ")).ok();
    }
    let payload = json!({
        "dmax": dmax,
        "checked": rows.len(),
        "minus_count": minus,
        "mismatches": mismatches,
        "rows": rows.iter().map(|r| json!({ "d": r.d, "formula": r.formula, "direct": r.direct.value })).collect::<Vec<_>>(),
    });
    Ok((Status::from_pass(mismatches.is_empty()), payload, t))
}

fn parse_balance(s: &str) -> Result<Balance> {
    let bad = || Error::InvalidArgument(format!("balance {s:?} is not NUM/DEN"));
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    Balance::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?)
}

fn lvalue_cmd(args: &CurveArgs, terms: Option<usize>, balance: Option<&str>, margin: f64) -> Result<Outcome3> {
    let c = resolve(args)?;
    let w = rootnum::global_root_number(&c.model)?.value;
    let balance = match balance {
        Some(b) => parse_balance(b)?,
        None if w == Sign::Minus => MINUS_SIGN_BALANCE,
        None => Balance::ONE,
    };
    let config = LSeriesConfig { terms, margin, balance, sign: Some(w), ..Default::default() };
    let est = lseries::l_value_with_retry(&c.model, &config)?;
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    writeln!(
        t,
        "functional equation: L(E,1) = S(A) + w S(1/A), S(A) = sum a_n/n exp(-2 pi n A / sqrt N), A = {}/{}",
        balance.num, balance.den
    )
    .ok();
    writeln!(t, "{est}").ok();
    let (status, check) = match w {
        Sign::Plus => {
            let ok = est.verdict == Verdict::NonzeroEvidence;
            writeln!(t, "w = +1: |L(E,1)| > {margin} x tail bound: {}", if ok { "yes" } else { "no" }).ok();
            (Status::from_pass(ok), "nonzero-evidence")
        }
        Sign::Minus => {
            let ok = !balance.is_one() && est.is_zero_within(FORCED_ZERO_FACTOR);
            writeln!(
                t,
                "w = -1: L(E,1) must vanish; |value| <= {FORCED_ZERO_FACTOR} x tail bound: {}",
                if ok { "yes" } else { "no" }
            )
            .ok();
            (Status::from_pass(ok), "forced-zero")
        }
    };
    Ok((status, json!({ "estimate": est, "check": check }), t))
}

fn serre_cmd(args: &CurveArgs, ell: u64, aux: Option<u64>) -> Result<Outcome3> {
    let c = resolve(args)?;
    let aux = aux
        .or_else(|| c.label.as_deref().and_then(galois::default_aux_prime))
        .unwrap_or_else(|| galois::first_good_prime(&c.model, ell));
    let report = galois::serre_check(&c.model, ell, aux)?;
    let mut t = String::new();
    writeln!(t, "curve: {}", c.name()).ok();
    writeln!(t, "Serre's criterion: ell does not divide v_q(j) where v_q(j) < 0, nor #E(F_q) at a good q").ok();
    writeln!(t, "{report}").ok();
    Ok((Status::from_pass(report.overall), to_value(&report), t))
}

fn search_cmd(p: u64, r: usize, bound: u64) -> Result<Outcome3> {
    let tuples = fieldsearch::search(p, r, bound)?;
    let mut t = String::new();
    writeln!(
        t,
        "admissible tuples for p = {p}: squarefree, 1 mod 4, prime to {}, Jacobi symbol 1, independent mod squares",
        3 * p
    )
    .ok();
    writeln!(t, "r = {r}, bound = {bound}: {} tuples", tuples.len()).ok();
    for tuple in &tuples {
        writeln!(t, "  {tuple}").ok();
    }
    let payload = json!({ "p": p, "r": r, "bound": bound, "tuples": tuples.iter().map(|x| &x.ds).collect::<Vec<_>>() });
    Ok((Status::Ok, payload, t))
}

fn check_hypothesis_cmd(p: u64, ds: &[u64], margin: f64) -> Result<Outcome3> {
    let config = LSeriesConfig { margin, ..Default::default() };
    let report = fieldsearch::check_hypothesis(p, ds, &config)?;
    let status = match report.overall {
        Outcome::Verified => Status::Ok,
        Outcome::NotAdmissible => Status::UnsupportedInput,
        _ => Status::CheckFailed,
    };
    let mut t = String::new();
    writeln!(t, "X = X0({}) = {}", 3 * p, curve::x0_label(p)?).ok();
    writeln!(t, "each character s of Gal(K/Q) gives the twist X^(s) = X^(d_s); rank 0 needs w = +1 and L(X^(s),1) != 0").ok();
    writeln!(t, "{report}").ok();
    Ok((status, to_value(&report), t))
}

fn descent_cmd(args: &DescentArgs) -> Result<Outcome3> {
    match args.lemma {
        Lemma::Sum => {
            let (k, n, r) = (args.k.unwrap_or(1), args.n.unwrap_or(1), args.r.unwrap_or(1));
            if k > 8 || n > 3 || r > 4 {
                return Err(Error::InvalidArgument("sum check supports k <= 8, n <= 3, r <= 4".into()));
            }
            let family = descent::signed_module_family(k, n, r);
            let mut elements = 0usize;
            let mut failures = Vec::new();
            for module in &family {
                let cert = descent::lemma_sum_check(module)?;
                elements += cert.decompositions.len();
                if !cert.pass() {
                    failures.push(to_value(module));
                }
            }
            let mut t = String::new();
            writeln!(t, "identity 2^r m = sum_s sum_sigma s(sigma) m^sigma, each inner sum in M_s").ok();
            writeln!(
                t,
                "modules (Z/2^k)^n with k <= {k}, n <= {n} and 1..={r} commuting signed-permutation involutions"
            )
            .ok();
            writeln!(t, "{} modules, {elements} elements certified, {} failures", family.len(), failures.len()).ok();
            let payload = json!({
                "k": k, "n": n, "r": r,
                "modules": family.len(),
                "elements": elements,
                "failures": failures,
            });
            Ok((Status::from_pass(failures.is_empty()), payload, t))
        }
        Lemma::Tmw => {
            let c = resolve(&args.curve)?;
            let (d, height) = (args.d.unwrap_or(0), args.height.unwrap_or(0));
            let short = curve::short_form(&c.model);
            let points = quadratic::quad_point_search(&short, d, height)?;
            let report = quadratic::eigenspace_check(&short, d, height)?;
            let mut t = String::new();
            writeln!(t, "curve: {} short form Y^2 = X^3 + ({})X + ({})", c.name(), short.a, short.b).ok();
            writeln!(t, "twist map (x, y) -> (d x, d sqrt(d) y) onto Y^2 = X^3 + A d^2 X + B d^3, d = {d}").ok();
            for p in &points {
                let image = quadratic::twist_map(p, d)?;
                let kind = match (p.is_invariant(), p.is_anti_invariant()) {
                    (true, true) => "2-torsion",
                    (true, false) => "invariant",
                    (false, true) => "anti-invariant",
                    (false, false) => "other",
                };
                writeln!(t, "  {p:<40} {kind:<15} -> {image}").ok();
            }
            writeln!(
                t,
                "anti-invariant images: {} / twist rational points: {}; invariant: {} / rational points of E: {}",
                report.anti_invariant, report.twist_rational, report.invariant, report.base_rational
            )
            .ok();
            writeln!(t, "eigenspace correspondence: {}", if report.pass() { "verified" } else { "FAILED" }).ok();
            let rational = |x: &BigRational| x.to_string();
            let payload = json!({
                "report": report,
                "points": points.iter().map(|p| {
                    let image = quadratic::twist_map(p, d).ok();
                    json!({
                        "x": p.x.to_string(),
                        "y": p.y.to_string(),
                        "anti_invariant": p.is_anti_invariant(),
                        "image": image.as_ref().and_then(|q| q.rational_coords())
                            .map(|(x, y)| json!([rational(&x), rational(&y)])),
                    })
                }).collect::<Vec<_>>(),
            });
            Ok((Status::from_pass(report.pass()), payload, t))
        }
    }
}
