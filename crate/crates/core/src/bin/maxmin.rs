use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use maxmin_core::configlp::{self, LpVerdict};
use maxmin_core::exact;
use maxmin_core::format;
use maxmin_core::generators::{self, RandomKind};
use maxmin_core::greedy;
use maxmin_core::valuation::{check_submodular_monotone, CheckMode, MAX_ENUMERATION_ITEMS};
use maxmin_core::{Allocation, Error, Instance, Result, TieBreakPolicy, Value};

#[derive(Parser)]
#[command(name = "maxmin", version, about = "Submodular max-min allocation toolkit")]
struct Cli {
    /// Emit a JSON document instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate max-min allocation with the threshold greedy.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "2/5")]
        alpha: String,
        /// `lex` or a path to a permutation file.
        #[arg(long, default_value = "lex")]
        tiebreak: String,
        /// Run a single greedy pass at this threshold instead of the search.
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long)]
        trace: bool,
    },
    /// Exact optimum by exhaustive search.
    Exact {
        instance: PathBuf,
        /// Node budget; defaults to MAXMIN_BUDGET or 10^8.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Configuration LP at one threshold, or its optimum.
    Lp {
        instance: PathBuf,
        #[arg(long, conflicts_with = "scan", required_unless_present = "scan")]
        threshold: Option<String>,
        #[arg(long)]
        scan: bool,
        /// With --scan, also compute OPT and the integrality gap.
        #[arg(long, requires = "scan")]
        gap: bool,
    },
    /// Build and verify a dual certificate.
    Certify {
        instance: PathBuf,
        #[arg(long, value_parser = ["3", "8"])]
        theorem: String,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Output path; stdout when absent.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
        /// Also write the tie-break permutation file here.
        #[arg(long, global = true)]
        policy_out: Option<PathBuf>,
    },
    /// Check submodularity and monotonicity of the valuation.
    Check {
        instance: PathBuf,
        /// Sample this many triples instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Six items, three players, integrality gap 4/3.
    Gap,
    /// Additive adversarial family built from Sylvester's sequence.
    Sylvester {
        terms: usize,
        /// Emit the submodular lift instead of the additive instance.
        #[arg(long)]
        lift: bool,
    },
    /// Seeded random instance.
    Random {
        kind: Kind,
        n: usize,
        m: usize,
        seed: u64,
        bound: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Additive,
    Coverage,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error for a report.
            let _ = io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("maxmin: {e}");
            if let Error::CertificateInvalid {
                witness: Some(w), ..
            } = &e
            {
                eprintln!("witness {}", w.join(","));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance> {
    format::read_instance(&read_file(path)?)
}

fn parse_value(s: &str, what: &str) -> Result<Value> {
    s.parse::<Value>()
        .map_err(|_| Error::Usage(format!("{what} must be a rational p/q, got {s:?}")))
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Solve {
            instance,
            alpha,
            tiebreak,
            threshold,
            trace,
        } => solve(cli.json, instance, alpha, tiebreak, threshold.as_deref(), *trace),
        Command::Exact { instance, budget } => exact_cmd(cli.json, instance, *budget),
        Command::Lp {
            instance,
            threshold,
            scan,
            gap,
        } => lp(cli.json, instance, threshold.as_deref(), *scan, *gap),
        Command::Certify { instance, theorem } => certify(cli.json, instance, theorem),
        Command::Gen {
            family,
            output,
            policy_out,
        } => gen(family, output.as_deref(), policy_out.as_deref()),
        Command::Check {
            instance,
            samples,
            seed,
        } => check(cli.json, instance, *samples, *seed),
    }
}

fn render_allocation(out: &mut String, inst: &Instance, a: &Allocation) {
    for (p, (b, v)) in a.bundles().iter().zip(a.values(inst)).enumerate() {
        let _ = writeln!(out, "player {p} value {v} items {}", inst.set_labels(b).join(","));
    }
    let left = a.unallocated(inst.items());
    if !left.is_empty() {
        let _ = writeln!(out, "unallocated {}", inst.set_labels(&left).join(","));
    }
}

fn allocation_json(inst: &Instance, a: &Allocation) -> Json {
    json!({
        "bundles": format::allocation_to_json(inst, a.bundles()),
        "values": a.values(inst).iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "unallocated": inst.set_labels(&a.unallocated(inst.items())),
    })
}

fn trace_json(inst: &Instance, t: &greedy::GreedyTrace) -> Json {
    let steps = |ss: &[greedy::GreedyStep]| -> Vec<Json> {
        ss.iter()
            .map(|s| json!({"item": inst.label(s.item), "player": s.player, "marginal": s.marginal.to_string()}))
            .collect()
    };
    json!({
        "threshold": t.threshold.to_string(),
        "seeding": steps(&t.seeding),
        "steps": steps(&t.steps),
    })
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn solve(
    as_json: bool,
    path: &Path,
    alpha: &str,
    tiebreak: &str,
    threshold: Option<&str>,
    show_trace: bool,
) -> Result<String> {
    let inst = load(path)?;
    let alpha = parse_value(alpha, "--alpha")?;
    let policy = if tiebreak == "lex" {
        TieBreakPolicy::Lexicographic
    } else {
        format::read_policy(&inst, &read_file(Path::new(tiebreak))?)?
    };
    if !inst.matroids().is_empty() {
        return Err(Error::Unsupported("greedy does not support matroids".into()));
    }
    let (alloc, trace, guessed) = match threshold {
        Some(t) => {
            let t = parse_value(t, "--threshold")?;
            let (a, tr) = if inst.cardinality_cap().is_some() {
                greedy::greedy_cardinality(&inst, &t, &policy)?
            } else {
                greedy::greedy_with_threshold(&inst, &t, &policy)?
            };
            (a, tr, None)
        }
        None => {
            let r = greedy::solve_approx(&inst, &alpha, &policy)?;
            (r.allocation, r.trace, Some(r.guessed_opt))
        }
    };
    let min = alloc.min_value(&inst);
    if as_json {
        let mut doc = json!({
            "min": min.to_string(),
            "threshold": trace.threshold.to_string(),
            "allocation": allocation_json(&inst, &alloc),
        });
        if let Some(g) = &guessed {
            doc["alpha"] = json!(alpha.to_string());
            doc["guessed_opt"] = json!(g.to_string());
        }
        if show_trace {
            doc["trace"] = trace_json(&inst, &trace);
        }
        return Ok(pretty(&doc));
    }
    let mut out = String::new();
    let _ = writeln!(out, "min {min}");
    let _ = writeln!(out, "threshold {}", trace.threshold);
    if let Some(g) = guessed {
        let _ = writeln!(out, "alpha {alpha}");
        let _ = writeln!(out, "guessed_opt {g}");
    }
    render_allocation(&mut out, &inst, &alloc);
    if show_trace {
        out.push_str(&trace.render(&inst));
    }
    Ok(out)
}

fn exact_cmd(as_json: bool, path: &Path, budget: Option<u64>) -> Result<String> {
    let inst = load(path)?;
    let budget = budget.unwrap_or_else(exact::default_budget);
    let (opt, alloc) = exact::opt_maxmin_with_budget(&inst, budget)?;
    if as_json {
        return Ok(pretty(&json!({"opt": opt.to_string(), "allocation": allocation_json(&inst, &alloc)})));
    }
    let mut out = format!("opt {opt}\n");
    render_allocation(&mut out, &inst, &alloc);
    Ok(out)
}

fn lp(as_json: bool, path: &Path, threshold: Option<&str>, scan: bool, gap: bool) -> Result<String> {
    let inst = load(path)?;
    if scan {
        let lp_opt = configlp::lp_opt(&inst)?;
        let mut doc = json!({"lp_opt": lp_opt.to_string()});
        let mut out = format!("lp_opt {lp_opt}\n");
        if gap {
            let (opt, _) = exact::opt_maxmin(&inst)?;
            if opt.is_zero() {
                return Err(Error::Domain("integrality gap is undefined when OPT = 0".into()));
            }
            let g = &lp_opt / &opt;
            let _ = writeln!(out, "opt {opt}\ngap {g}");
            doc["opt"] = json!(opt.to_string());
            doc["gap"] = json!(g.to_string());
        }
        return Ok(if as_json { pretty(&doc) } else { out });
    }
    let t = parse_value(threshold.expect("clap enforces one of the flags"), "--threshold")?;
    let verdict = configlp::decide_configuration_lp(&inst, &t)?;
    let mut out = String::new();
    let doc = match &verdict {
        LpVerdict::PrimalFeasible(w) => {
            let _ = writeln!(out, "FEASIBLE at {t}");
            for (c, x) in w.configs.iter().zip(&w.weights) {
                let _ = writeln!(out, "config {} weight {x}", inst.set_labels(c).join(","));
            }
            json!({
                "verdict": "feasible",
                "threshold": t.to_string(),
                "configs": w.configs.iter().zip(&w.weights)
                    .map(|(c, x)| json!({"items": inst.set_labels(c), "weight": x.to_string()}))
                    .collect::<Vec<_>>(),
            })
        }
        LpVerdict::PrimalInfeasible(c) => {
            let _ = writeln!(out, "INFEASIBLE at {t}");
            for (j, v) in c.y.iter().enumerate() {
                let _ = writeln!(out, "y {} {v}", inst.label(j));
            }
            let _ = writeln!(out, "sum {}", c.sum());
            json!({
                "verdict": "infeasible",
                "threshold": t.to_string(),
                "y": labelled(&inst, &c.y),
                "sum": c.sum().to_string(),
            })
        }
    };
    Ok(if as_json { pretty(&doc) } else { out })
}

fn labelled(inst: &Instance, y: &[Value]) -> Json {
    let map: serde_json::Map<String, Json> = y
        .iter()
        .enumerate()
        .map(|(j, v)| (inst.label(j).to_string(), json!(v.to_string())))
        .collect();
    Json::Object(map)
}

fn certify(as_json: bool, path: &Path, theorem: &str) -> Result<String> {
    let inst = load(path)?;
    let cert = match theorem {
        "3" => configlp::build_certificate_thm3(&inst)?,
        _ => configlp::build_certificate_thm8(&inst)?,
    };
    if as_json {
        let v = cert.verification.as_ref();
        return Ok(pretty(&json!({
            "verdict": "verified",
            "threshold": cert.threshold.to_string(),
            "opt": cert.opt.as_ref().map(|o| o.to_string()),
            "y": labelled(&inst, &cert.y),
            "sum": cert.sum().to_string(),
            "configurations": v.map(|v| v.configurations),
        })));
    }
    let mut out = cert.render(&inst);
    let _ = writeln!(out, "VERIFIED at T={}", cert.threshold);
    Ok(out)
}

fn gen(family: &Family, output: Option<&Path>, policy_out: Option<&Path>) -> Result<String> {
    let (inst, policy, note) = match family {
        Family::Gap => (generators::gen_gap_instance(), None, None),
        Family::Sylvester { terms, lift } => {
            let fam = generators::gen_sylvester_additive(*terms)?;
            if *lift {
                let l = generators::lift_to_submodular(&fam)?;
                (l.instance, Some(l.policy), Some(l.threshold))
            } else {
                (fam.instance, Some(fam.policy), Some(fam.threshold))
            }
        }
        Family::Random {
            kind,
            n,
            m,
            seed,
            bound,
        } => {
            let kind = match kind {
                Kind::Additive => RandomKind::Additive,
                Kind::Coverage => RandomKind::Coverage,
            };
            (generators::gen_random(kind, *n, *m, *seed, *bound)?, None, None)
        }
    };
    if let Some(p) = policy_out {
        let policy = policy.unwrap_or(TieBreakPolicy::Lexicographic);
        write_file(p, &format::write_policy(&inst, &policy))?;
    }
    if let Some(t) = note {
        eprintln!("greedy threshold {t}");
    }
    let text = format::write_instance(&inst);
    match output {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn check(as_json: bool, path: &Path, samples: Option<usize>, seed: u64) -> Result<String> {
    let inst = load(path)?;
    let mode = match samples {
        Some(samples) => CheckMode::Sampled { samples, seed },
        None if inst.items() <= MAX_ENUMERATION_ITEMS => CheckMode::Exhaustive,
        None => CheckMode::Sampled { samples: 10_000, seed },
    };
    let r = check_submodular_monotone(inst.valuation(), mode)?;
    let mode_name = match r.mode {
        CheckMode::Exhaustive => "exhaustive".to_string(),
        CheckMode::Sampled { samples, seed } => format!("sampled {samples} seed {seed}"),
    };
    let witness = r.witness.as_ref().map(|(j, s, t)| {
        (inst.label(*j).to_string(), inst.set_labels(s), inst.set_labels(t))
    });
    let monotone_witness = r
        .monotone_witness
        .as_ref()
        .map(|(s, t)| (inst.set_labels(s), inst.set_labels(t)));
    if as_json {
        return Ok(pretty(&json!({
            "mode": mode_name,
            "normalized": r.normalized,
            "submodular": r.submodular,
            "monotone": r.monotone,
            "checks": r.checks,
            "witness": witness.as_ref().map(|(j, s, t)| json!({"item": j, "s": s, "t": t})),
            "monotone_witness": monotone_witness.as_ref().map(|(s, t)| json!({"s": s, "t": t})),
        })));
    }
    let mut out = String::new();
    let _ = writeln!(out, "mode {mode_name}");
    let _ = writeln!(out, "normalized {}", r.normalized);
    let _ = writeln!(out, "submodular {}", r.submodular);
    let _ = writeln!(out, "monotone {}", r.monotone);
    let _ = writeln!(out, "checks {}", r.checks);
    if let Some((j, s, t)) = witness {
        let _ = writeln!(out, "witness item {j} S {{{}}} T {{{}}}", s.join(","), t.join(","));
    }
    if let Some((s, t)) = monotone_witness {
        let _ = writeln!(out, "monotone_witness S {{{}}} T {{{}}}", s.join(","), t.join(","));
    }
    Ok(out)
}
