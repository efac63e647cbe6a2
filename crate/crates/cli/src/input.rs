use std::fmt::Display;
use std::fs;
use std::path::Path;

use kcdb::circuit::{read_nnf, Circuit, Var, VarSet};
use kcdb::cnf::{compile_dpll_with, parse_dimacs, CompileOptions, Heuristic};
use kcdb::cq::{parse_ucq, ConjunctiveQuery, Database, Ucq};
use kcdb::provenance::Tid;
use kcdb::queries::WeightMap;
use kcdb::value::parse_rational;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exit 2 for usage and input-format errors, 1 for everything else.
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn in_file(path: &Path) -> impl Fn(&dyn Display) -> CliError + '_ {
    move |e| CliError::Usage(format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| in_file(path)(&e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

/// A circuit from a `.nnf` file, or compiled from a DIMACS CNF.
pub fn load_circuit(nnf: Option<&Path>, cnf: Option<&Path>, heuristic: Heuristic) -> CliResult<Circuit> {
    match (nnf, cnf) {
        (Some(p), None) => read_nnf(&read_text(p)?).map_err(|e| in_file(p)(&e)),
        (None, Some(p)) => {
            let f = parse_dimacs(&read_text(p)?).map_err(|e| in_file(p)(&e))?;
            Ok(compile_dpll_with(&f, CompileOptions { heuristic, cache: true }).0)
        }
        _ => Err(usage("exactly one of --nnf and --cnf is required")),
    }
}

/// Weight lines `v w+ w-` or `v p` (then `w- = 1 - p`), with `v` a 1-based
/// variable. Variables of `universe` not listed get `default`.
pub fn load_weights(
    path: Option<&Path>,
    universe: &VarSet,
    default: (BigRational, BigRational),
) -> CliResult<WeightMap<BigRational>> {
    let mut w = WeightMap::uniform(universe, default.0, default.1);
    let Some(path) = path else { return Ok(w) };
    let text = read_text(path)?;
    let bad = |ln: usize, msg: &str| CliError::Usage(format!("{}: line {ln}: {msg}", path.display()));
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(['c', '#']) {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let v: u32 =
            toks[0].parse().ok().filter(|&v| v > 0).ok_or_else(|| bad(i + 1, "expected a positive variable"))?;
        let nums: Option<Vec<BigRational>> = toks[1..].iter().map(|t| parse_rational(t)).collect();
        let (pos, neg) = match nums.as_deref() {
            Some([p]) if *p >= BigRational::zero() && *p <= BigRational::one() => (p.clone(), BigRational::one() - p),
            Some([_]) => return Err(bad(i + 1, "a single weight must be a probability")),
            Some([p, n]) => (p.clone(), n.clone()),
            _ => return Err(bad(i + 1, "expected `var weight` or `var pos neg`")),
        };
        w.set(Var(v - 1), pos, neg);
    }
    Ok(w)
}

pub fn load_ucq(path: &Path) -> CliResult<Ucq> {
    parse_ucq(&read_text(path)?).map_err(|e| in_file(path)(&e))
}

pub fn load_cq(path: &Path) -> CliResult<ConjunctiveQuery> {
    let mut u = load_ucq(path)?;
    if u.disjuncts.len() != 1 {
        return Err(CliError::Domain("this command takes a single conjunctive query".into()));
    }
    Ok(u.disjuncts.remove(0))
}

/// A database from a combined TSV, `NAME=PATH` relation files, or a TID file.
pub fn load_db(db: Option<&Path>, rels: &[String], tid: Option<&Path>) -> CliResult<Database> {
    match (db, rels.is_empty(), tid) {
        (Some(p), true, None) => Database::parse_tsv(&read_text(p)?).map_err(|e| in_file(p)(&e)),
        (None, false, None) => {
            let mut d = Database::new();
            for spec in rels {
                let (name, path) =
                    spec.split_once('=').ok_or_else(|| usage(format!("--rel expects NAME=PATH, got `{spec}`")))?;
                let path = Path::new(path);
                d.add_relation_tsv(name, &read_text(path)?).map_err(|e| in_file(path)(&e))?;
            }
            Ok(d)
        }
        (None, true, Some(p)) => Ok(load_tid(p)?.db),
        _ => Err(usage("exactly one of --db, --rel and --tid is required")),
    }
}

pub fn load_tid(path: &Path) -> CliResult<Tid> {
    Tid::parse_tsv(&read_text(path)?).map_err(|e| in_file(path)(&e))
}

pub fn parse_order(s: &str) -> Vec<String> {
    s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
}

pub fn parse_unit_rational(flag: &str, s: &str) -> CliResult<BigRational> {
    parse_rational(s)
        .filter(|r| *r > BigRational::zero() && *r < BigRational::one())
        .ok_or_else(|| usage(format!("--{flag} must be a number in (0, 1), got `{s}`")))
}
