//! Acceptance suite: one line per criterion, exit status 1 if any fails.

mod common;

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use maxmin_core::configlp::{
    self, build_certificate_thm3, build_certificate_thm8, decide_configuration_lp, verify_certificate,
    verify_primal_witness, DualCertificate, LpVerdict,
};
use maxmin_core::exact::opt_maxmin;
use maxmin_core::generators::{
    gen_gap_instance, gen_sylvester_additive, lift_to_submodular, sylvester_limit_ratio,
};
use maxmin_core::greedy::{
    approx_candidates, attempt, greedy_with_threshold, run_inequalities, solve_approx, verify_trace,
};
use maxmin_core::valuation::{check_submodular_monotone, CheckMode};
use maxmin_core::{Allocation, Instance, ItemSet, SetFunction, TieBreakPolicy, Value};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn v(n: i64) -> Value {
    Value::from_int(n)
}

const GREEDY_SUITE: u64 = 500;
const CARDINALITY_SUITE: u64 = 200;
const CERTIFICATE_SUITE: u64 = 200;

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, u64); 9] = [
        (1, "integrality gap instance", c1_gap_instance, 1),
        (2, "greedy 2/5 guarantee", c2_greedy_suite, 300),
        (3, "cardinality 1/3 guarantee", c3_cardinality_suite, 300),
        (4, "sylvester tightness construction", c4_sylvester, 60),
        (5, "3-OPT dual certificates", c5_thm3_suite, 600),
        (6, "5-OPT matroid dual certificates", c6_thm8_suite, 600),
        (7, "duality consistency", c7_duality, 1200),
        (8, "submodular algebra", c8_algebra, 60),
        (9, "run-level greedy inequalities", c9_run_inequalities, 300),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{name}]: {} ({}; {:.2}s of {limit}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_maxmin"))
        .args(args)
        .output()
        .expect("run maxmin");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn c1_gap_instance() -> Outcome {
    let inst = gen_gap_instance();
    let (opt, _) = opt_maxmin(&inst).unwrap();
    let lp = configlp::lp_opt(&inst).unwrap();
    let gap = configlp::integrality_gap(&inst).unwrap();
    let dir = std::env::temp_dir().join(format!("maxmin-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gap.json");
    std::fs::write(&path, maxmin_core::format::write_instance(&inst)).unwrap();
    let p = path.to_str().unwrap();
    let (c_exact, exact_out) = cli(&["exact", p]);
    let (c_lp, lp_out) = cli(&["lp", p, "--scan", "--gap"]);
    let cli_ok = c_exact == 0
        && exact_out.starts_with("opt 3\n")
        && c_lp == 0
        && lp_out == "lp_opt 4\nopt 3\ngap 4/3\n";
    outcome(
        opt == v(3) && lp == v(4) && gap == Value::ratio(4, 3) && cli_ok,
        format!("OPT {opt}, lp_opt {lp}, gap {gap}, cli agrees {cli_ok}"),
    )
}

fn c2_greedy_suite() -> Outcome {
    let alpha = Value::ratio(2, 5);
    let mut bad = Vec::new();
    let mut worst: Option<Value> = None;
    for seed in 0..GREEDY_SUITE {
        let inst = random_instance(seed, 8, 4);
        let (opt, _) = opt_maxmin(&inst).unwrap();
        let r = solve_approx(&inst, &alpha, &TieBreakPolicy::Lexicographic).unwrap();
        if r.achieved_min < &alpha * &opt {
            bad.push(seed);
        }
        if opt.is_positive() {
            let ratio = &r.achieved_min / &opt;
            if worst.as_ref().map_or(true, |w| ratio < *w) {
                worst = Some(ratio);
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{GREEDY_SUITE} instances, violations {bad:?}, worst achieved/OPT {}",
            worst.map_or("n/a".into(), |w| w.to_string())
        ),
    )
}

fn c3_cardinality_suite() -> Outcome {
    let alpha = Value::ratio(1, 3);
    let mut bad = Vec::new();
    let mut worst: Option<Value> = None;
    for seed in 0..CARDINALITY_SUITE {
        let base = random_instance(10_000 + seed, 8, 4);
        let (n, m) = (base.items(), base.players());
        let k = m + (seed as usize) % (n - m + 1);
        let inst = base.with_cardinality_cap(Some(k)).unwrap();
        let (opt_k, _) = opt_maxmin(&inst).unwrap();
        let r = solve_approx(&inst, &alpha, &TieBreakPolicy::Lexicographic).unwrap();
        let within_cap = r.allocation.allocated(n).len() <= k;
        if !within_cap || r.achieved_min < &alpha * &opt_k {
            bad.push(seed);
        }
        if opt_k.is_positive() {
            let ratio = &r.achieved_min / &opt_k;
            if worst.as_ref().map_or(true, |w| ratio < *w) {
                worst = Some(ratio);
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{CARDINALITY_SUITE} capped instances, violations {bad:?}, worst achieved/OPT_k {}",
            worst.map_or("n/a".into(), |w| w.to_string())
        ),
    )
}

fn c4_sylvester() -> Outcome {
    let fam = gen_sylvester_additive(3).unwrap();
    let inst = &fam.instance;
    let delta = fam.delta.clone();
    let two_delta = v(2) + &delta;
    let mut notes = Vec::new();

    // Additive family: the listed greedy run and the partial allocation.
    let (greedy, trace) = greedy_with_threshold(inst, &fam.threshold, &fam.policy).unwrap();
    let replay_ok = verify_trace(inst, &fam.threshold, &fam.policy, &trace).is_ok();
    let listed = greedy == fam.greedy_reference;
    let all_allocated = greedy.unallocated(inst.items()).is_empty();
    let above = fam.threshold > two_delta;
    let drop_one_ok = greedy.bundles().iter().all(|b| {
        b.iter()
            .all(|j| inst.value(&b.without(j)) <= two_delta)
    });
    let partial_min = fam.partial_reference.min_value(inst);
    let left = fam.partial_reference.unallocated(inst.items());
    let partial_ok = partial_min == v(3) - &delta
        && left.to_vec() == vec![fam.unallocated_item]
        && inst.singleton_value(fam.unallocated_item).is_positive();
    notes.push(format!(
        "delta {delta}, additive greedy min {}, partial min {partial_min}",
        greedy.min_value(inst)
    ));

    // Lifted submodular instance.
    let lifted = lift_to_submodular(&fam).unwrap();
    let li = &lifted.instance;
    let b_star_values = lifted.reference.values(li);
    let b_star_min = b_star_values.iter().min().cloned().unwrap();
    let (run, _) = greedy_with_threshold(li, &lifted.threshold, &lifted.policy).unwrap();
    let p_star = run.values(li)[lifted.special_player].clone();
    let run_min = run.min_value(li);
    let lifted_all = run.unallocated(li.items()).is_empty();
    let ratio = &p_star / v(5);
    notes.push(format!(
        "lifted n {} m {}, p* gets {p_star}, run min {run_min}, B* min {b_star_min}, ratio {ratio}, limit ratio {:.4}",
        li.items(),
        li.players(),
        sylvester_limit_ratio()
    ));
    let pass = replay_ok
        && listed
        && all_allocated
        && above
        && drop_one_ok
        && partial_ok
        && delta == Value::ratio(1, 27)
        && b_star_min >= v(5)
        && p_star == two_delta
        && run_min <= two_delta
        && lifted_all
        && ratio == Value::ratio(11, 27);
    outcome(pass, notes.join("; "))
}

/// Smallest grid value strictly above `t`, if any.
fn grid_successor(inst: &Instance, t: &Value) -> Option<Value> {
    inst.value_grid().unwrap().into_iter().find(|g| g > t)
}

struct CertRecord {
    inst: Instance,
    opt: Value,
    cert: DualCertificate,
    lp: Value,
}

fn certificate_suite(matroids: bool, factor: i64) -> (Vec<u64>, Option<Value>, Vec<CertRecord>) {
    let mut bad = Vec::new();
    let mut worst: Option<Value> = None;
    let mut records = Vec::new();
    let mut seed = if matroids { 50_000 } else { 20_000 };
    while (records.len() as u64) < CERTIFICATE_SUITE {
        seed += 1;
        let inst = if matroids {
            random_matroid_instance(seed, 7, 3)
        } else {
            random_instance(seed, 7, 3)
        };
        let (opt, _) = opt_maxmin(&inst).unwrap();
        if !opt.is_positive() {
            continue;
        }
        let cert = if matroids {
            build_certificate_thm8(&inst)
        } else {
            build_certificate_thm3(&inst)
        };
        let t = v(factor) * &opt;
        let Ok(cert) = cert else {
            bad.push(seed);
            continue;
        };
        let verified = cert.threshold == t && cert.verification.as_ref().is_some_and(|x| x.is_valid());
        let above_ok = match grid_successor(&inst, &t) {
            Some(next) => !decide_configuration_lp(&inst, &next).unwrap().is_feasible(),
            None => true,
        };
        let lp = configlp::lp_opt(&inst).unwrap();
        let ratio = &lp / &opt;
        if !verified || !above_ok || ratio > v(factor) {
            bad.push(seed);
        }
        if worst.as_ref().map_or(true, |w| ratio > *w) {
            worst = Some(ratio);
        }
        records.push(CertRecord { inst, opt, cert, lp });
    }
    (bad, worst, records)
}

fn c5_thm3_suite() -> Outcome {
    let (bad, worst, _) = certificate_suite(false, 3);
    outcome(
        bad.is_empty(),
        format!(
            "{CERTIFICATE_SUITE} instances, failures {bad:?}, max lp_opt/OPT {}",
            worst.map_or("n/a".into(), |w| w.to_string())
        ),
    )
}

fn c6_thm8_suite() -> Outcome {
    let (bad, worst, _) = certificate_suite(true, 5);
    outcome(
        bad.is_empty(),
        format!(
            "{CERTIFICATE_SUITE} matroid instances, failures {bad:?}, max lp_opt/OPT {}",
            worst.map_or("n/a".into(), |w| w.to_string())
        ),
    )
}

/// Decides the LP at `t` and checks the verdict independently. Returns an
/// error string on any inconsistency.
fn consistent_at(r: &CertRecord, t: &Value) -> Result<bool, String> {
    let inst = &r.inst;
    let verdict = decide_configuration_lp(inst, t).map_err(|e| e.to_string())?;
    match verdict {
        LpVerdict::PrimalFeasible(w) => {
            verify_primal_witness(inst, &w)?;
            // The verified certificate rules out every threshold above its own.
            if t > &r.cert.threshold {
                return Err(format!("witness at {t} above certified threshold {}", r.cert.threshold));
            }
            Ok(true)
        }
        LpVerdict::PrimalInfeasible(c) => {
            let check = verify_certificate(inst, &c).map_err(|e| e.to_string())?;
            if !(check.covered && check.nonnegative && check.sum_below_m) {
                return Err(format!("dual at {t} does not verify"));
            }
            Ok(false)
        }
    }
}

fn c7_duality() -> Outcome {
    let mut pairs = 0;
    let mut errors = Vec::new();
    for (matroids, factor) in [(false, 3), (true, 5)] {
        let (_, _, records) = certificate_suite(matroids, factor);
        for r in &records {
            let t = v(factor) * &r.opt;
            let mut ts = vec![v(0), r.opt.clone(), r.lp.clone(), t.clone()];
            ts.extend(grid_successor(&r.inst, &t));
            ts.extend(grid_successor(&r.inst, &r.lp));
            for (i, th) in ts.iter().enumerate() {
                pairs += 1;
                match consistent_at(r, th) {
                    // OPT, lp_opt and 0 must be feasible; successor of lp_opt must not be.
                    Ok(feasible) => {
                        let expected = match i {
                            0..=2 => Some(true),
                            5 => Some(false),
                            _ => None,
                        };
                        if expected.is_some_and(|e| e != feasible) {
                            errors.push(format!("unexpected verdict at {th}"));
                        }
                    }
                    Err(e) => errors.push(e),
                }
            }
        }
    }
    outcome(
        errors.is_empty(),
        format!("{pairs} instance/threshold pairs, inconsistencies {}", errors.len()),
    )
}

/// All compositions exercised by the algebra suite, each on at most six items.
fn compositions() -> Vec<(String, SetFunction)> {
    let mut r = rng(0xa1);
    let mut bases: Vec<(String, SetFunction)> = Vec::new();
    for n in 1..=5 {
        for k in 0..3 {
            bases.push((format!("coverage{n}.{k}"), random_coverage(&mut r, n)));
        }
        bases.push((format!("additive{n}"), random_additive(&mut r, n)));
    }
    let gap = gen_gap_instance().valuation().clone();
    let mut out = vec![("gap".to_string(), gap.clone())];
    for (name, f) in &bases {
        let n = f.ground_size();
        out.push((name.clone(), f.clone()));
        for cap in [Value::ratio(1, 2), v(2), v(5)] {
            out.push((format!("trunc({name},{cap})"), SetFunction::truncated(f.clone(), cap).unwrap()));
        }
        for t in [v(0), Value::ratio(3, 2)] {
            let aug = SetFunction::augmented(f.clone(), t.clone()).unwrap();
            out.push((format!("trunc(aug({name},{t}),3)"), SetFunction::truncated(aug.clone(), v(3)).unwrap()));
            out.push((format!("aug({name},{t})"), aug));
        }
        if n >= 2 {
            let keep: Vec<usize> = (0..n).step_by(2).collect();
            out.push((format!("restrict({name})"), SetFunction::restricted(f.clone(), keep).unwrap()));
        }
        if n <= 3 {
            let other = random_coverage(&mut r, 6 - n);
            out.push((format!("sum({name},cov)"), SetFunction::disjoint_sum(vec![f.clone(), other])));
        }
    }
    out.push((
        "restrict(gap)".into(),
        SetFunction::restricted(gap, vec![0, 1, 3, 5]).unwrap(),
    ));
    out
}

fn c8_algebra() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0u64;
    let funcs = compositions();
    for (name, f) in &funcs {
        let n = f.ground_size();
        let table = f.value_table().unwrap();
        let val = |s: &ItemSet| table[s.mask() as usize].clone();
        let report = check_submodular_monotone(f, CheckMode::Exhaustive).unwrap();
        if !(report.submodular && report.monotone && report.normalized) {
            failures.push(format!("{name}: not submodular monotone"));
        }
        // Augmentation shifts exactly the sets containing the new item.
        if let SetFunction::Augmented { inner, bonus } = f {
            let z = n - 1;
            let inner_table = inner.value_table().unwrap();
            for mask in 0..(1u64 << n) {
                let s = ItemSet::from_mask(n, mask);
                let base = &inner_table[(mask & !(1 << z)) as usize];
                let want = if s.contains(z) { base + bonus } else { base.clone() };
                if val(&s) != want {
                    failures.push(format!("{name}: augmented value at {mask:#b}"));
                }
            }
        }
        // Restriction agrees with the inner function on mapped sets.
        if let SetFunction::Restricted { inner, keep } = f {
            for mask in 0..(1u64 << n) {
                let s = ItemSet::from_mask(n, mask);
                let mapped = ItemSet::from_items(inner.ground_size(), s.iter().map(|i| keep[i])).unwrap();
                if val(&s) != inner.evaluate(&mapped).unwrap() {
                    failures.push(format!("{name}: restricted value at {mask:#b}"));
                }
            }
        }
        for sm in 0..(1u64 << n) {
            let s = ItemSet::from_mask(n, sm);
            for tm in 0..(1u64 << n) {
                let t = ItemSet::from_mask(n, tm);
                checks += 1;
                let d = f.marginal_set(&s, &t).unwrap();
                // Telescoping along ascending and descending insertion orders.
                let mut up = Value::zero();
                let mut cur = t.clone();
                for j in s.iter() {
                    up += f.marginal(j, &cur).unwrap();
                    cur.insert(j);
                }
                let mut down = Value::zero();
                let mut cur = t.clone();
                for j in s.to_vec().into_iter().rev() {
                    down += f.marginal(j, &cur).unwrap();
                    cur.insert(j);
                }
                let singles: Value = s.iter().map(|j| f.marginal(j, &t).unwrap()).sum();
                let ok = d == up
                    && d == down
                    && d == val(&s.union(&t)) - val(&t)
                    && d <= singles
                    && val(&s.union(&t)) == val(&t) + f.marginal_set(&s, &t).unwrap()
                    && val(&t.union(&s)) == val(&s) + f.marginal_set(&t, &s).unwrap()
                    && (!s.is_subset(&t) || d.is_zero());
                if !ok {
                    failures.push(format!("{name}: S {sm:#b} T {tm:#b}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} compositions, {checks} (S, T) pairs, failures {}{}",
            funcs.len(),
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(", first {f}"))
        ),
    )
}

fn c9_run_inequalities() -> Outcome {
    let alpha = Value::ratio(2, 5);
    let policy = TieBreakPolicy::Lexicographic;
    let mut runs = 0u64;
    let mut active = 0u64;
    let mut bad = Vec::new();
    for seed in 0..GREEDY_SUITE {
        let inst = random_instance(seed, 8, 4);
        let accepted = solve_approx(&inst, &alpha, &policy).unwrap().guessed_opt;
        let mut cache: HashMap<(Vec<usize>, usize), Allocation> = HashMap::new();
        for guess in approx_candidates(&inst).unwrap() {
            let threshold = &alpha * &guess;
            let att = attempt(&inst, &threshold, &policy).unwrap();
            if let (Some(reduced), Some((alloc, _))) = (&att.reduction.instance, &att.reduced) {
                runs += 1;
                let key = (att.reduction.kept_items.clone(), reduced.players());
                let reference = cache
                    .entry(key)
                    .or_insert_with(|| opt_maxmin(reduced).unwrap().1)
                    .clone();
                let ineq = run_inequalities(reduced, &threshold, alloc, &reference);
                if ineq.marginal_sum_bound.is_some() {
                    active += 1;
                }
                if !ineq.all_hold() {
                    bad.push((seed, guess.to_string()));
                }
            }
            if att.succeeded() {
                if guess != accepted {
                    bad.push((seed, "scan mismatch".into()));
                }
                break;
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{runs} greedy runs ({active} below threshold), violations {bad:?}"),
    )
}
