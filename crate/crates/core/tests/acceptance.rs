//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use twistgate::cli;
use twistgate::curve::{self, short_form, CurveTable, WeierstrassModel};
use twistgate::descent::{self, quadratic};
use twistgate::fieldsearch::{self, Outcome};
use twistgate::galois;
use twistgate::lseries::{self, Balance, LSeriesConfig, Verdict};
use twistgate::numtheory;
use twistgate::reduction::{self, ReductionKind};
use twistgate::rootnum::{self, CaseTag, Place, Sign};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn table() -> CurveTable {
    CurveTable::bundled()
}

fn model(label: &str) -> WeierstrassModel {
    table().get(label).unwrap().clone()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn factored(num: &[(u64, u32)], den: &[(u64, u32)]) -> BigRational {
    let pp = |fs: &[(u64, u32)]| fs.iter().fold(BigInt::from(1), |acc, &(p, e)| acc * BigInt::from(p).pow(e));
    BigRational::new(pp(num), pp(den))
}

fn j_invariants() -> Check {
    let start = Instant::now();
    let cases = [
        ("15a1", factored(&[(13, 3), (37, 3)], &[(3, 4), (5, 4)])),
        ("21a1", factored(&[(193, 3)], &[(3, 4), (7, 2)])),
    ];
    let mut shown = Vec::new();
    for (label, expected) in cases {
        let r = cli::run(["twistgate", "curve-info", "--label", label]).map_err(|e| e.to_string())?;
        ensure(r.status == cli::Status::Ok, format!("{label}: status {:?}", r.status))?;
        let j = r.payload["invariants"]["j"].as_str().ok_or("no j in payload")?.to_string();
        ensure(j == expected.to_string(), format!("{label}: j = {j}, expected {expected}"))?;
        ensure(curve::invariants(&model(label)).unwrap().j == expected, format!("{label}: library j"))?;
        shown.push(format!("j({label}) = {j}"));
    }
    within(Duration::from_secs(1), start)?;
    Ok(shown.join(", "))
}

fn point_counts() -> Check {
    let start = Instant::now();
    let a = reduction::count_points(&model("15a1"), 7).map_err(|e| e.to_string())?;
    let b = reduction::count_points(&model("21a1"), 5).map_err(|e| e.to_string())?;
    ensure(a == 8 && b == 8, format!("#15a1(F_7) = {a}, #21a1(F_5) = {b}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("#15a1(F_7) = {a}, #21a1(F_5) = {b}"))
}

fn twist_formula() -> Check {
    let start = Instant::now();
    let mut shown = Vec::new();
    for label in ["15a1", "21a1"] {
        let rows = rootnum::twist_formula_sweep(&model(label), 1000).map_err(|e| e.to_string())?;
        let bad: Vec<i64> = rows.iter().filter(|r| !r.agrees()).map(|r| r.d).collect();
        ensure(bad.is_empty(), format!("{label}: mismatches at {bad:?}"))?;
        let n = reduction::conductor(&model(label)).unwrap() as i64;
        let expected: Vec<i64> = (1..=1000i64)
            .filter(|d| d % 4 == 1 && (2..*d).all(|q| q * q > *d || d % (q * q) != 0))
            .filter(|d| (2..=n).all(|q| n % q != 0 || d % q != 0))
            .collect();
        let swept: Vec<i64> = rows.iter().map(|r| r.d).collect();
        ensure(swept == expected, format!("{label}: swept {} values, expected {}", swept.len(), expected.len()))?;
        let minus = rows.iter().filter(|r| r.formula == Sign::Minus).count();
        shown.push(format!("{label}: {} d, {minus} with w = -1", rows.len()));
    }
    within(Duration::from_secs(120), start)?;
    Ok(shown.join("; "))
}

fn global_root_numbers() -> Check {
    let w15 = rootnum::global_root_number(&model("15a1")).map_err(|e| e.to_string())?;
    let w21 = rootnum::global_root_number(&model("21a1")).map_err(|e| e.to_string())?;
    ensure(w15.value == Sign::Plus && w21.value == Sign::Plus, "expected w = +1 for both")?;
    let at = |p| w15.factor_at(Place::Finite(p)).map(|f| f.case);
    ensure(at(3) == Some(CaseTag::NonsplitMult), format!("15a1 at 3: {:?}", at(3)))?;
    ensure(at(5) == Some(CaseTag::SplitMult), format!("15a1 at 5: {:?}", at(5)))?;
    ensure(
        reduction::classify(&model("15a1"), 3).unwrap().kind == ReductionKind::MultNonsplit,
        "reduction type at 3",
    )?;
    Ok(format!("w(15a1) = {w15}, w(21a1) = {w21}"))
}

fn serre_sweep() -> Check {
    let start = Instant::now();
    let cases = [("15a1", vec![(3, -4), (5, -4)]), ("21a1", vec![(3, -4), (7, -2)])];
    let ells: Vec<u64> = numtheory::primes_up_to(97).into_iter().filter(|&l| l >= 3).collect();
    for (label, expected) in &cases {
        let e = model(label);
        let aux = galois::default_aux_prime(label).unwrap();
        for &ell in &ells {
            let r = galois::serre_check(&e, ell, aux).map_err(|e| e.to_string())?;
            ensure(r.overall, format!("{label}, ell = {ell}: {r}"))?;
            ensure(r.j_exponents() == *expected, format!("{label}: j exponents {:?}", r.j_exponents()))?;
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!("{} primes ell per curve, exponents {:?} and {:?}", ells.len(), cases[0].1, cases[1].1))
}

fn lemma_sum() -> Check {
    let start = Instant::now();
    let family = descent::signed_module_family(3, 2, 2);
    let mut elements = 0;
    for m in &family {
        let cert = descent::lemma_sum_check(m).map_err(|e| e.to_string())?;
        ensure(cert.decompositions.len() as u64 == m.size(), "missing elements")?;
        for d in &cert.decompositions {
            ensure(d.verified, format!("module {m:?}, m = {:?}", d.m))?;
            ensure(d.parts.len() == 1 << m.rank(), "wrong number of characters")?;
            // replay the certificate independently
            let q = m.modulus();
            let total: Vec<u64> = (0..m.n).map(|i| d.parts.iter().map(|(_, c)| c[i]).sum::<u64>() % q).collect();
            let target: Vec<u64> = d.m.iter().map(|&x| (x << m.rank()) % q).collect();
            ensure(total == target, "certificate sum")?;
            ensure(d.parts.iter().all(|(s, c)| m.in_eigenspace(s, c)), "certificate eigenspaces")?;
        }
        elements += cert.decompositions.len();
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{} modules, {elements} elements certified", family.len()))
}

fn twist_correspondence() -> Check {
    let e = short_form(&model("15a1"));
    let candidates = fieldsearch::search(5, 1, 500).map_err(|e| e.to_string())?;
    let mut used = Vec::new();
    for t in candidates {
        let d = t.ds[0] as i64;
        let points = quadratic::quad_point_search(&e, d, 50).map_err(|e| e.to_string())?;
        if points.is_empty() {
            continue;
        }
        let twist = e.twist(d);
        for p in &points {
            let image = quadratic::twist_map(p, d).map_err(|e| e.to_string())?;
            if p.is_anti_invariant() {
                let (x, y) = image.rational_coords().ok_or(format!("d = {d}: {p} maps to {image}"))?;
                ensure(twist.contains(&x, &y), format!("d = {d}: image of {p} not on twist"))?;
            }
            if p.is_invariant() && !p.y.is_zero() {
                ensure(image.rational_coords().is_none(), format!("d = {d}: {p} maps to a rational point"))?;
            }
        }
        let report = quadratic::eigenspace_check(&e, d, 50).map_err(|e| e.to_string())?;
        ensure(report.pass(), format!("d = {d}: {report:?}"))?;
        used.push(d);
        if used.len() == 3 {
            break;
        }
    }
    ensure(used.len() == 3, format!("only {} usable d", used.len()))?;
    Ok(format!("d = {used:?} at height 50"))
}

/// Independent filter: Euler's criterion at 3 and p, square test by
/// trial square roots.
fn brute_force_search(p: u64, r: usize, bound: u64) -> Vec<Vec<u64>> {
    fn legendre(a: u64, q: u64) -> i64 {
        let v = (0..(q - 1) / 2).fold(1, |acc, _| acc * (a % q) % q);
        if v == 1 {
            1
        } else if v == 0 {
            0
        } else {
            -1
        }
    }
    fn square(n: u128) -> bool {
        let mut k = (n as f64).sqrt() as u128;
        while k * k > n {
            k -= 1;
        }
        while (k + 1) * (k + 1) <= n {
            k += 1;
        }
        k * k == n
    }
    let ok = |d: u64| {
        (2..=d).take_while(|q| q * q <= d).all(|q| !d.is_multiple_of(q * q))
            && d % 4 == 1
            && !d.is_multiple_of(3)
            && !d.is_multiple_of(p)
            && legendre(d, 3) * legendre(d, p) == 1
    };
    let singles: Vec<u64> = (1..=bound).filter(|&d| ok(d)).collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u64>> = singles.iter().map(|&d| vec![d]).collect();
    stack.reverse();
    while let Some(t) = stack.pop() {
        if t.len() == r {
            let independent = (1u32..1 << r).all(|mask| {
                let prod: u128 = t.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d as u128).product();
                !square(prod)
            });
            if independent {
                out.push(t);
            }
            continue;
        }
        let last = *t.last().unwrap();
        for &d in singles.iter().rev().filter(|&&d| d > last) {
            let mut next = t.clone();
            next.push(d);
            stack.push(next);
        }
    }
    out
}

fn search_oracle() -> Check {
    let mut shown = Vec::new();
    for r in [1, 2] {
        let found: Vec<Vec<u64>> = fieldsearch::search(5, r, 100).map_err(|e| e.to_string())?.into_iter().map(|t| t.ds).collect();
        let oracle = brute_force_search(5, r, 100);
        ensure(found == oracle, format!("r = {r}: search {found:?} vs oracle {oracle:?}"))?;
        for t in &found {
            let tuple = fieldsearch::AdmissibleTuple { p: 5, ds: t.clone() };
            ensure(fieldsearch::exponent_rank_mod2(t).unwrap() == r, "rank mod 2")?;
            for s in descent::Character::all(r) {
                let d = fieldsearch::character_discriminant(&tuple, &s).unwrap();
                if d > 1 {
                    ensure(fieldsearch::single_condition_failure(5, d).unwrap().is_none(), format!("closure fails at {d}"))?;
                }
            }
        }
        shown.push(format!("r = {r}: {} tuples", found.len()));
        if r == 2 {
            ensure(found.iter().any(|t| t == &[17, 61]), "[17, 61] missing")?;
            ensure(!found.iter().any(|t| t.contains(&13)), "tuple with 13 present")?;
        }
    }
    Ok(shown.join(", "))
}

fn hypothesis_pipeline() -> Check {
    let start = Instant::now();
    let config = LSeriesConfig::default();
    let mut shown = Vec::new();
    for ds in [vec![17], vec![17, 61]] {
        let report = fieldsearch::check_hypothesis(5, &ds, &config).map_err(|e| e.to_string())?;
        ensure(report.per_character.len() == 1 << ds.len(), "character count")?;
        for c in &report.per_character {
            ensure(c.root_number.value == Sign::Plus, format!("{ds:?} {}: w = -1", c.character))?;
            ensure(c.formula_agrees(), format!("{ds:?} {}: formula mismatch", c.character))?;
            let l = &c.lvalue;
            ensure(l.margin >= 10.0, "margin below 10")?;
            match l.verdict {
                Verdict::NonzeroEvidence => ensure(!l.is_zero_within(l.margin), "verdict without margin")?,
                Verdict::Inconclusive => ensure(l.retried, "inconclusive without retry")?,
            }
        }
        let verdicts: Vec<String> = report.per_character.iter().map(|c| format!("{}", c.lvalue.verdict)).collect();
        ensure(report.overall != Outcome::NotAdmissible, "not admissible")?;
        shown.push(format!("{ds:?}: {} ({})", outcome_name(report.overall), verdicts.join(", ")));
    }
    within(Duration::from_secs(300), start)?;
    Ok(shown.join("; "))
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Verified => "Verified*",
        Outcome::RootNumberObstruction => "root number obstruction",
        Outcome::InconclusiveLValue => "inconclusive",
        Outcome::FormulaMismatch => "formula mismatch",
        Outcome::NotAdmissible => "not admissible",
    }
}

fn forced_zeros() -> Check {
    let mut shown = Vec::new();
    let e = model("15a1");
    let n = reduction::conductor(&e).unwrap();
    let ds: Vec<i64> = rootnum::formula_twists(&e, 1000)
        .unwrap()
        .into_iter()
        .filter(|&d| numtheory::jacobi(d, n).unwrap() == -1)
        .take(5)
        .collect();
    ensure(ds.len() == 5, "not enough twists")?;
    for d in ds {
        let t = curve::quadratic_twist(&e, d).map_err(|e| e.to_string())?;
        let w = rootnum::global_root_number(&t).map_err(|e| e.to_string())?.value;
        ensure(w == Sign::Minus, format!("d = {d}: w = {w}"))?;
        let config = LSeriesConfig { balance: Balance::new(6, 5).unwrap(), ..Default::default() };
        let est = lseries::l_value_at_1(&t, &config).map_err(|e| e.to_string())?;
        ensure(
            est.is_zero_within(3.0),
            format!("d = {d}: |L| = {:e} > 3 x {:e}", est.value_f64().abs(), est.tail_bound_f64()),
        )?;
        shown.push(format!("d = {d}: |L| = {:.1e} (tail {:.1e})", est.value_f64().abs(), est.tail_bound_f64()));
    }
    Ok(shown.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("j-invariants of 15a1 and 21a1", j_invariants),
        ("point counts over F_7 and F_5", point_counts),
        ("twist root number formula, d <= 1000", twist_formula),
        ("global root numbers via local product", global_root_numbers),
        ("Serre criterion sweep, 3 <= ell <= 97", serre_sweep),
        ("eigenspace sum identity, exhaustive family", lemma_sum),
        ("twist correspondence for quadratic points", twist_correspondence),
        ("field search against brute force", search_oracle),
        ("character twist pipeline", hypothesis_pipeline),
        ("forced zeros for root number -1", forced_zeros),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{took:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{took:.2}s]: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
