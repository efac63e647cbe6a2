use std::path::Path;

use kcdb::circuit::{classify, smooth, write_nnf, Circuit, Var};
use kcdb::cnf::{compile_dpll_with, parse_dimacs_dnf, CompileOptions};
use kcdb::cq::{compile_cq_with, default_order, Answers, CqOptions, FactId};
use kcdb::provenance::{
    fact_names, pqe, provenance_circuit_sjf, provenance_dnf_ucq, provenance_read_once, shapley, uniform_reliability,
    PqeMode, Tid,
};
use kcdb::queries::{
    best_valuation, count_by_cardinality, model_count, prepare_for_counting, wmc, ApproxParams, Models,
    RationalSemiring, Sampler,
};
use kcdb::relational::write_rel;
use kcdb::tree::{answer_circuit, pqe_tree, read_automaton, read_tree, ProbTree, TreeAutomaton, DETERMINIZE_CAP};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::input::*;
use crate::report::{self, Report};
use crate::{ApproxArgs, CircuitArgs, Command, DbArgs, PqeModeArg, ProvMethod};

pub fn run(cmd: Command, seed: u64) -> CliResult<Report> {
    match cmd {
        Command::CompileCnf { cnf, heuristic, no_cache, output } => {
            let f = parse_dimacs(&cnf)?;
            let opts = CompileOptions { heuristic: heuristic.into(), cache: !no_cache };
            let (c, stats) = compile_dpll_with(&f, opts);
            let text = write_nnf(&c)?;
            eprintln!(
                "decisions {} unit_propagations {} cache_hits {} component_splits {}",
                stats.decision_count, stats.unit_propagations, stats.cache_hits, stats.component_splits
            );
            let json = json!({
                "nnf": text,
                "nodes": c.num_nodes(),
                "edges": c.size(),
                "decisions": stats.decision_count,
                "cache_hits": stats.cache_hits,
                "component_splits": stats.component_splits,
            });
            emit_document(text, output.as_deref(), json)
        }
        Command::CheckClass(a) => check_class(&circuit(&a)?),
        Command::Count { circuit: a, by_cardinality } => {
            let c = circuit(&a)?;
            let c = prepare_for_counting(&c)?;
            if by_cardinality {
                let counts = count_by_cardinality(&c)?;
                let lines = counts.iter().map(BigUint::to_string).collect();
                Ok(Report::new(lines, json!({ "by_cardinality": counts.iter().map(report::nat).collect::<Vec<_>>() })))
            } else {
                let n = model_count(&c)?;
                Ok(Report::single(n.to_string(), json!({ "count": report::nat(&n) })))
            }
        }
        Command::Wmc { circuit: a, weights } => {
            let c = circuit(&a)?;
            let w = load_weights(weights.as_deref(), c.universe(), (BigRational::one(), BigRational::one()))?;
            let r = wmc(&*prepare_for_counting(&c)?, &w, &RationalSemiring)?;
            Ok(Report::single(report::rat_text(&r), json!({ "wmc": report::rat(&r) })))
        }
        Command::Enum { circuit: a, limit } => {
            let c = circuit(&a)?;
            let models = Models::new(&c)?.take(limit.map_or(usize::MAX, |l| l as usize));
            valuations(models)
        }
        Command::Sample { circuit: a, count } => {
            let c = circuit(&a)?;
            let c = prepare_for_counting(&c)?;
            let s = Sampler::new(&c)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Result<Vec<_>, _> = (0..count).map(|_| s.sample(&mut rng)).collect();
            valuations(draws?.into_iter())
        }
        Command::Best { circuit: a, weights } => {
            let c = circuit(&a)?;
            let c = if c.properties().is_smooth { c } else { smooth(&c)? };
            let w = load_weights(weights.as_deref(), c.universe(), (BigRational::one(), BigRational::one()))?;
            let (nu, weight) = best_valuation(&c, &w)?;
            Ok(Report::new(
                vec![report::rat_text(&weight), report::lits_text(&nu)],
                json!({ "weight": report::rat(&weight), "valuation": report::lits(&nu) }),
            ))
        }
        Command::ApproxDnf { dnf, weights, approx } => {
            let (n, d) = parse_dimacs_dnf(&read_text(&dnf)?).map_err(|e| in_file(&dnf)(&e))?;
            let universe = (0..n as u32).map(Var).collect();
            let half = BigRational::new(1.into(), 2.into());
            let w = load_weights(weights.as_deref(), &universe, (half.clone(), half))?;
            let r = kcdb::queries::approx_count_dnf(&d, &w, &approx_params(&approx, seed)?)?;
            Ok(Report::single(report::rat_text(&r), json!({ "estimate": report::rat(&r) })))
        }
        Command::CqCompile { query, db, order, no_cache, no_semijoin, output } => {
            let q = load_cq(&query)?;
            let d = database(&db)?;
            let order = match order {
                Some(o) => parse_order(&o),
                None => default_order(&q),
            };
            let opts = CqOptions { cache: !no_cache, semijoin: !no_semijoin };
            let compiled = compile_cq_with(&q, &d, &order, opts).map_err(|e| match e {
                kcdb::cq::CqError::OrderMissingVariables(_) | kcdb::cq::CqError::OrderUnknownVariable(_) => usage(e),
                e => e.into(),
            })?;
            for w in &compiled.warnings {
                eprintln!("warning: {w}");
            }
            let s = compiled.stats;
            eprintln!("decisions {} cache_hits {} component_splits {}", s.decisions, s.cache_hits, s.component_splits);
            let text = write_rel(&compiled.circuit);
            let json = json!({
                "rc": text,
                "order": compiled.order,
                "nodes": compiled.circuit.num_nodes(),
                "edges": compiled.circuit.size(),
                "warnings": compiled.warnings,
            });
            emit_document(text, output.as_deref(), json)
        }
        Command::CqCount { query, db } => {
            let n = Answers::new(&load_cq(&query)?, &database(&db)?)?.count();
            Ok(Report::single(n.to_string(), json!({ "count": report::nat(&n) })))
        }
        Command::CqEnum { query, db, limit } => {
            let answers = Answers::new(&load_cq(&query)?, &database(&db)?)?;
            let limit = limit.map_or(usize::MAX, |l| l as usize);
            let mut rows = Vec::new();
            answers.enumerate(|r| {
                if rows.len() < limit {
                    rows.push(r.to_vec());
                }
            });
            Ok(Report::new(
                rows.iter().map(|r| report::row_text(r)).collect(),
                json!({ "head": answers.head(), "answers": rows.iter().map(|r| report::row(r)).collect::<Vec<_>>() }),
            ))
        }
        Command::CqAccess { query, db, index } => {
            let i: BigUint =
                index.parse().map_err(|_| usage(format!("--index must be a positive integer, got `{index}`")))?;
            if i.is_zero() {
                return Err(usage("--index is 1-based"));
            }
            let answers = Answers::new(&load_cq(&query)?, &database(&db)?)?;
            let r = answers.access(&i)?;
            Ok(Report::single(
                report::row_text(&r),
                json!({ "head": answers.head(), "order": answers.order(), "answer": report::row(&r) }),
            ))
        }
        Command::Prov { query, db, method } => {
            let u = load_ucq(&query)?;
            let d = database(&db)?;
            let names = fact_names(&d);
            let comments: String = names.iter().map(|(v, n)| format!("c {} {n}\n", v.0 + 1)).collect();
            let facts: Vec<&str> = names.iter().map(|(_, n)| n.as_str()).collect();
            match method {
                ProvMethod::Circuit => {
                    let [q] = u.disjuncts.as_slice() else {
                        return Err(CliError::Domain("--method circuit takes a single conjunctive query".into()));
                    };
                    let text = format!("{comments}{}", write_nnf(&provenance_circuit_sjf(&q.boolean(), &d)?)?);
                    let json = json!({ "nnf": text, "facts": facts });
                    Ok(Report::new(text.lines().map(String::from).collect(), json))
                }
                ProvMethod::Dnf => {
                    let dnf = provenance_dnf_ucq(&u, &d)?;
                    let text = format!("{comments}{}", kcdb::cnf::write_dimacs_dnf(d.len(), &dnf));
                    let json = json!({ "dnf": text, "facts": facts });
                    Ok(Report::new(text.lines().map(String::from).collect(), json))
                }
                ProvMethod::ReadOnce => {
                    let [q] = u.disjuncts.as_slice() else {
                        return Err(CliError::Domain("--method read-once takes a single conjunctive query".into()));
                    };
                    let f = provenance_read_once(q, &d)?.display(&d).to_string();
                    Ok(Report::single(f.clone(), json!({ "formula": f })))
                }
            }
        }
        Command::Pqe { query, tid, mode, approx } => {
            let u = load_ucq(&query)?;
            let tid = load_tid(&tid)?;
            let mode = match mode {
                PqeModeArg::Exact => PqeMode::ExactHierarchical,
                PqeModeArg::Approx => PqeMode::ApproxDnf(approx_params(&approx, seed)?),
                PqeModeArg::Brute => PqeMode::BruteForce,
            };
            let p = pqe(&u, &tid, &mode)?;
            Ok(Report::single(report::rat_text(&p), json!({ "probability": report::rat(&p) })))
        }
        Command::Ur { query, db } => {
            let n = uniform_reliability(&load_ucq(&query)?, &database(&db)?)?;
            Ok(Report::single(n.to_string(), json!({ "count": report::nat(&n) })))
        }
        Command::Shapley { query, db, fact } => {
            let u = load_ucq(&query)?;
            let tid = match (&db.tid, &db.db, db.rel.is_empty()) {
                (Some(p), None, true) => load_tid(p)?,
                _ => Tid::uniform(database(&db)?, BigRational::new(1.into(), 2.into()))?,
            };
            let targets = match fact {
                Some(0) => return Err(usage("--fact is 1-based")),
                Some(k) if k > tid.db.len() => {
                    return Err(usage(format!("--fact {k} exceeds the {} facts of the input", tid.db.len())))
                }
                Some(k) => vec![FactId(k as u32 - 1)],
                None => tid.endogenous(),
            };
            let mut lines = Vec::new();
            let mut values = Vec::new();
            for f in targets {
                let v = shapley(&u, &tid, f)?;
                let name = tid.db.fact(f).to_string();
                lines.push(format!("{name}\t{}", report::rat_text(&v)));
                values.push(json!({ "fact": name, "index": f.0 + 1, "value": report::rat(&v) }));
            }
            Ok(Report::new(lines, json!({ "shapley": values })))
        }
        Command::TreePqe { tree, automaton } => {
            let pt = ProbTree::from_json(&read_text(&tree)?).map_err(|e| in_file(&tree)(&e))?;
            let a = load_automaton(&automaton)?;
            let p = pqe_tree(&a, &pt)?;
            Ok(Report::single(report::rat_text(&p), json!({ "probability": report::rat(&p) })))
        }
        Command::TreeEnum { tree, automaton, limit } => {
            let (t, _) = read_tree(&read_text(&tree)?).map_err(|e| in_file(&tree)(&e))?;
            let a = load_automaton(&automaton)?;
            let (c, _) = answer_circuit(&a, &t)?;
            let limit = limit.map_or(usize::MAX, |l| l as usize);
            let sets: Vec<Vec<u32>> =
                Models::new(&c)?.take(limit).map(|nu| nu.true_vars().iter().map(|v| v.0).collect()).collect();
            let lines = sets.iter().map(|s| s.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")).collect();
            Ok(Report::new(lines, json!({ "answers": sets })))
        }
    }
}

fn parse_dimacs(path: &Path) -> CliResult<kcdb::cnf::CnfFormula> {
    kcdb::cnf::parse_dimacs(&read_text(path)?).map_err(|e| in_file(path)(&e))
}

fn circuit(a: &CircuitArgs) -> CliResult<Circuit> {
    load_circuit(a.nnf.as_deref(), a.cnf.as_deref(), a.heuristic.into())
}

fn database(a: &DbArgs) -> CliResult<kcdb::cq::Database> {
    load_db(a.db.as_deref(), &a.rel, a.tid.as_deref())
}

fn load_automaton(path: &Path) -> CliResult<TreeAutomaton> {
    let a = read_automaton(&read_text(path)?).map_err(|e| in_file(path)(&e))?;
    Ok(if a.is_deterministic() { a } else { a.determinize(DETERMINIZE_CAP)? })
}

fn approx_params(a: &ApproxArgs, seed: u64) -> CliResult<ApproxParams> {
    Ok(ApproxParams {
        epsilon: parse_unit_rational("epsilon", &a.epsilon)?,
        delta: parse_unit_rational("delta", &a.delta)?,
        seed,
    })
}

/// A text document on standard output, or written to `output`.
fn emit_document(text: String, output: Option<&Path>, json: Json) -> CliResult<Report> {
    match output {
        Some(p) => {
            write_text(p, &text)?;
            Ok(Report::new(Vec::new(), json))
        }
        None => Ok(Report::new(text.lines().map(String::from).collect(), json)),
    }
}

fn valuations(it: impl Iterator<Item = kcdb::circuit::Valuation>) -> CliResult<Report> {
    let all: Vec<_> = it.collect();
    Ok(Report::new(
        all.iter().map(report::lits_text).collect(),
        json!({ "valuations": all.iter().map(report::lits).collect::<Vec<_>>() }),
    ))
}

fn check_class(c: &Circuit) -> CliResult<Report> {
    let r = classify(c, None);
    let deterministic = r.proven_deterministic || (r.is_dnnf() && c.is_certified_deterministic());
    let order: Option<Vec<String>> = r.obdd_order.as_ref().map(|o| o.iter().map(Var::to_string).collect());
    let flags = [
        ("nnf", r.is_nnf),
        ("decomposable", r.is_decomposable),
        ("deterministic", deterministic),
        ("decision", r.all_or_decision),
        ("smooth", r.is_smooth),
        ("structured", r.structured_witness.is_some()),
    ];
    let mut lines = vec![format!("class {}", r.class_name())];
    lines.extend(flags.iter().map(|(k, v)| format!("{k} {v}")));
    if let Some(o) = &order {
        lines.push(format!("obdd_order {}", o.join(" ")));
    }
    let mut json = json!({ "class": r.class_name(), "obdd_order": order });
    for (k, v) in flags {
        json[k] = json!(v);
    }
    Ok(Report::new(lines, json))
}
