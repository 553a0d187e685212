//! Command-line front end for `contractnet_core`.
//!
//! [`run`] parses an argument vector, dispatches to the library and returns
//! the exit code together with the rendered output. Exit codes: `0` the
//! property holds or the command succeeded, `1` the property fails (the
//! report carries a witness), `2` input, precondition or resource error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use contractnet_core::bruteforce::{self, EquipmentMix, GeneratorConfig};
use contractnet_core::choice::{self, DEFAULT_CAP};
use contractnet_core::instance::{augment_autarkic, prune_null_contracts, validate};
use contractnet_core::metastable::{self, DominationRule};
use contractnet_core::reduction::reduce_to_weak_orders;
use contractnet_core::stability::{self, DEFAULT_ENUM_CAP};
use contractnet_core::{
    ChoiceFunction, ChoiceSpec, ContractId, ContractSystem, Error, Instance, InstanceFile,
};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "contractnet",
    version,
    about = "Stable and meta-stable contract networks with path-independent choice"
)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on ground-set and contract-set sizes for exhaustive scans.
    #[arg(long, global = true, value_name = "N")]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file against every invariant.
    Validate { instance: PathBuf },
    /// Apply a choice function to a menu.
    Choose {
        spec: PathBuf,
        /// JSON array of contract ids, or a file holding one.
        menu: String,
    },
    /// Test path independence, heredity and outcast of a choice function.
    CheckPlott { spec: PathBuf },
    /// Decompose a path-independent choice function into linear orders.
    Decompose { spec: PathBuf },
    /// Split agents until all equipment is weakly ordered.
    Reduce {
        instance: PathBuf,
        /// Write the reduced instance here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Write the split map here.
        #[arg(long, value_name = "FILE")]
        map_out: Option<PathBuf>,
    },
    /// Stability of a system, or all stable systems.
    Stable(StableArgs),
    /// Meta-stability: solve, check or minimize.
    Metastable(MetastableArgs),
    /// Compromise vector of the prepared (linear, augmented) instance.
    Compromise {
        instance: PathBuf,
        /// List every compromise on the utility grid.
        #[arg(long)]
        all: bool,
    },
    /// Shrink a meta-stable system to a minimal one.
    Minimize { instance: PathBuf, system: String },
    /// Exhaustive reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Emit a seeded random instance.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["check", "enumerate"])))]
struct StableArgs {
    instance: PathBuf,
    /// System to check (JSON array of ids or a file).
    #[arg(long, value_name = "SYSTEM")]
    check: Option<String>,
    /// List every stable system.
    #[arg(long)]
    enumerate: bool,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["solve", "check", "minimize"])))]
struct MetastableArgs {
    instance: PathBuf,
    #[arg(long)]
    solve: bool,
    #[arg(long, value_name = "SYSTEM")]
    check: Option<String>,
    #[arg(long, value_name = "SYSTEM")]
    minimize: Option<String>,
    /// Only contracts outside the system may dominate it.
    #[arg(long)]
    exclude_members: bool,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Every meta-stable system by exhaustive scan.
    Metastable { instance: PathBuf },
    /// Every stable system by exhaustive scan.
    Stable { instance: PathBuf },
    /// Every compromise of the prepared instance.
    Compromises { instance: PathBuf },
    /// Meta-stability of one system with the independent predicate.
    Check { instance: PathBuf, system: String },
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    min_agents: usize,
    #[arg(long, default_value_t = 4)]
    max_agents: usize,
    #[arg(long, default_value_t = 3)]
    min_contracts: usize,
    #[arg(long, default_value_t = 7)]
    max_contracts: usize,
    #[arg(long, default_value_t = 3)]
    max_participants: usize,
    /// Exactly this many agents choose by a union of two linear orders.
    #[arg(long)]
    union_agents: Option<usize>,
    /// Only linear equipment.
    #[arg(long)]
    linear_only: bool,
    /// Do not give every agent an autarkic contract.
    #[arg(long)]
    no_autarkic: bool,
}

/// Everything a command reports. Field order is fixed by declaration.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub exit_code: i32,
    pub verdict: String,
    pub result: Value,
    pub timing_ms: f64,
}

/// Exit code and rendered output of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    /// Text for stdout (reports) or stderr (usage and errors).
    pub output: String,
}

struct Caps {
    choice: usize,
    contracts: usize,
}

impl Caps {
    fn from(cap: Option<usize>) -> Caps {
        Caps {
            choice: cap.unwrap_or(DEFAULT_CAP),
            contracts: cap.unwrap_or(DEFAULT_ENUM_CAP),
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let args = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_HOLDS };
            return Outcome {
                code,
                report: None,
                output: e.render().to_string(),
            };
        }
    };
    let name = command_name(&cli.command);
    let started = Instant::now();
    let caps = Caps::from(cli.cap);
    let (code, verdict, result) = match dispatch(&cli.command, &caps) {
        Ok(r) => r,
        Err(e) => {
            let violations = match &e {
                Error::Invalid(v) => v.iter().map(|x| x.to_string()).collect(),
                _ => Vec::new(),
            };
            (
                EXIT_ERROR,
                "error".to_string(),
                json!({"error": e.to_string(), "violations": violations}),
            )
        }
    };
    let report = Report {
        command: name.to_string(),
        args,
        exit_code: code,
        verdict,
        result,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let output = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serializes")
    } else if let (Command::Generate(_), EXIT_HOLDS) = (&cli.command, code) {
        report.result["instance"].to_string()
    } else {
        render_text(&report)
    };
    Outcome {
        code,
        report: Some(report),
        output,
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Choose { .. } => "choose",
        Command::CheckPlott { .. } => "check-plott",
        Command::Decompose { .. } => "decompose",
        Command::Reduce { .. } => "reduce",
        Command::Stable(_) => "stable",
        Command::Metastable(_) => "metastable",
        Command::Compromise { .. } => "compromise",
        Command::Minimize { .. } => "minimize",
        Command::Oracle(_) => "oracle",
        Command::Generate(_) => "generate",
    }
}

/// Verdict line, then one line per result field.
fn render_text(r: &Report) -> String {
    let mut out = format!("{}: {}\n", r.command, r.verdict);
    if let Value::Object(map) = &r.result {
        for (k, v) in map {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("  {k}: {shown}\n"));
        }
    }
    out
}

type Dispatched = Result<(i32, String, Value), Error>;

fn holds(flag: bool, yes: &str, no: &str) -> (i32, String) {
    if flag {
        (EXIT_HOLDS, yes.to_string())
    } else {
        (EXIT_FAILS, no.to_string())
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    Instance::from_json(&read(path)?)
}

fn load_spec(path: &Path) -> Result<ChoiceFunction, Error> {
    let spec: ChoiceSpec = serde_json::from_str(&read(path)?)?;
    ChoiceFunction::from_spec(&spec, None)
}

/// A JSON array of ids given inline or as a file path.
fn load_ids(arg: &str) -> Result<Vec<ContractId>, Error> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn load_system(g: &Instance, arg: &str) -> Result<ContractSystem, Error> {
    g.system(&load_ids(arg)?)
}

fn ids(g: &Instance, s: ContractSystem) -> Value {
    json!(g.system_ids(s))
}

fn dispatch(command: &Command, caps: &Caps) -> Dispatched {
    match command {
        Command::Validate { instance } => {
            let file = InstanceFile::from_json(&read(instance)?)?;
            let violations = validate(&file);
            if violations.is_empty() {
                Ok((EXIT_HOLDS, "valid".into(), json!({"violations": []})))
            } else {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                Ok((EXIT_ERROR, "invalid".into(), json!({"violations": list})))
            }
        }
        Command::Choose { spec, menu } => {
            let f = load_spec(spec)?;
            let menu = load_ids(menu)?;
            let chosen = f.choose_ids(&menu)?;
            Ok((EXIT_HOLDS, "ok".into(), json!({"menu": menu, "chosen": chosen})))
        }
        Command::CheckPlott { spec } => {
            let f = load_spec(spec)?;
            let pi = choice::is_path_independent(&f, caps.choice)?;
            let h = choice::check_heredity(&f, caps.choice)?;
            let o = choice::check_outcast(&f, caps.choice)?;
            let nulls = if pi.is_none() {
                json!(choice::largest_null_set(&f, caps.choice)?.members)
            } else {
                Value::Null
            };
            let (code, verdict) = holds(pi.is_none(), "path independent", "not path independent");
            Ok((
                code,
                verdict,
                json!({
                    "path_independent": pi.is_none(),
                    "path_witness": pi,
                    "heredity_witness": h,
                    "outcast_witness": o,
                    "largest_null_set": nulls,
                }),
            ))
        }
        Command::Decompose { spec } => {
            let f = load_spec(spec)?;
            let parts = choice::am_decompose(&f, caps.choice)?;
            let orders: Vec<Vec<ContractId>> = parts
                .iter()
                .map(|p| p.ranking().unwrap().iter().map(|&i| p.ground()[i].clone()).collect())
                .collect();
            Ok((EXIT_HOLDS, format!("{} linear orders", orders.len()), json!({"orders": orders})))
        }
        Command::Reduce {
            instance,
            out,
            map_out,
        } => {
            let g = load_instance(instance)?;
            let red = reduce_to_weak_orders(&g, caps.choice)?;
            let reduced = red.reduced.to_file();
            let write = |path: &Option<PathBuf>, text: String| -> Result<(), Error> {
                if let Some(p) = path {
                    std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                }
                Ok(())
            };
            write(out, red.reduced.to_json())?;
            write(map_out, serde_json::to_string_pretty(&red.map)?)?;
            Ok((
                EXIT_HOLDS,
                format!("{} split(s)", red.map.steps.len()),
                json!({"splits": red.map.steps.len(), "instance": reduced, "map": red.map}),
            ))
        }
        Command::Stable(a) => {
            let g = load_instance(&a.instance)?;
            if let Some(sys) = &a.check {
                let s = load_system(&g, sys)?;
                let v = stability::is_stable(&g, s);
                let (code, verdict) = holds(v.stable, "stable", "not stable");
                Ok((code, verdict, json!({"system": ids(&g, s), "verdict": v})))
            } else {
                let all = stability::enumerate_stable(&g, caps.contracts)?;
                let list: Vec<Value> = all.iter().map(|&s| ids(&g, s)).collect();
                Ok((
                    EXIT_HOLDS,
                    format!("{} stable system(s)", list.len()),
                    json!({"count": list.len(), "systems": list}),
                ))
            }
        }
        Command::Metastable(a) => {
            let g = load_instance(&a.instance)?;
            let rule = if a.exclude_members {
                DominationRule::ExcludeMembers
            } else {
                DominationRule::IncludeMembers
            };
            if a.solve {
                let sol = metastable::solve_metastable(&g, caps.choice)?;
                let check = metastable::is_metastable(&g, sol.system, rule);
                Ok((
                    EXIT_HOLDS,
                    "meta-stable system found".into(),
                    json!({
                        "system": ids(&g, sol.system),
                        "metastable": check.metastable,
                        "pruned": ids(&g, sol.pruned),
                        "compromise": sol.compromise,
                        "threshold": ids(&sol.prepared, sol.threshold),
                    }),
                ))
            } else if let Some(sys) = &a.check {
                let s = load_system(&g, sys)?;
                let v = metastable::is_metastable(&g, s, rule);
                let (code, verdict) = holds(v.metastable, "meta-stable", "dominated");
                Ok((code, verdict, json!({"system": ids(&g, s), "verdict": v})))
            } else {
                let sys = a.minimize.as_deref().expect("clap enforces a mode");
                minimize(&g, sys)
            }
        }
        Command::Compromise { instance, all } => {
            let g = load_instance(instance)?;
            let prepared = prepare(&g, caps)?;
            let x = metastable::find_compromise(&prepared, metastable::DEFAULT_GRID_CAP)?;
            let s = metastable::system_from_compromise(&prepared, &x)?;
            let mut result = json!({
                "compromise": x,
                "threshold": ids(&prepared, s),
                "system": ids(&g, prepared.transfer(s, &g)),
            });
            if *all {
                let every = bruteforce::enumerate_compromises(&prepared, bruteforce::DEFAULT_GRID_CAP)?;
                result["all"] = json!(every);
            }
            Ok((EXIT_HOLDS, "compromise found".into(), result))
        }
        Command::Minimize { instance, system } => {
            let g = load_instance(instance)?;
            minimize(&g, system)
        }
        Command::Oracle(o) => oracle(o, caps),
        Command::Generate(a) => {
            let config = GeneratorConfig {
                seed: a.seed,
                agents: (a.min_agents, a.max_agents),
                contracts: (a.min_contracts, a.max_contracts),
                max_participants: a.max_participants,
                mix: if a.linear_only {
                    EquipmentMix::linear_only()
                } else {
                    EquipmentMix::default()
                },
                autarkic: !a.no_autarkic,
                exact_union_agents: a.union_agents,
            };
            let g = bruteforce::generate(&config)?;
            Ok((EXIT_HOLDS, "generated".into(), json!({"instance": g.to_file()})))
        }
    }
}

/// Null pruning, linearization and augmentation, as in the solver.
fn prepare(g: &Instance, caps: &Caps) -> Result<Instance, Error> {
    let (pruned, _) = prune_null_contracts(g, caps.choice)?;
    let linear = metastable::linearize_equipment(&pruned, caps.choice)?;
    augment_autarkic(&linear, false)
}

fn minimize(g: &Instance, sys: &str) -> Dispatched {
    let s = load_system(g, sys)?;
    let m = metastable::minimize(g, s)?;
    let minimal = if (0..g.agents().len()).all(|i| g.has_autarkic(i)) {
        json!(metastable::is_minimal_metastable(g, m)?)
    } else {
        Value::Null
    };
    Ok((
        EXIT_HOLDS,
        "minimized".into(),
        json!({"input": ids(g, s), "system": ids(g, m), "minimal": minimal}),
    ))
}

fn oracle(o: &OracleCommand, caps: &Caps) -> Dispatched {
    match o {
        OracleCommand::Metastable { instance } => {
            let g = load_instance(instance)?;
            let all = bruteforce::enumerate_metastable(&g, caps.contracts)?;
            let list: Vec<Value> = all.iter().map(|&s| ids(&g, s)).collect();
            Ok((
                EXIT_HOLDS,
                format!("{} meta-stable system(s)", list.len()),
                json!({"count": list.len(), "systems": list}),
            ))
        }
        OracleCommand::Stable { instance } => {
            let g = load_instance(instance)?;
            let all = stability::enumerate_stable(&g, caps.contracts)?;
            let list: Vec<Value> = all.iter().map(|&s| ids(&g, s)).collect();
            Ok((
                EXIT_HOLDS,
                format!("{} stable system(s)", list.len()),
                json!({"count": list.len(), "systems": list}),
            ))
        }
        OracleCommand::Compromises { instance } => {
            let g = load_instance(instance)?;
            let prepared = prepare(&g, caps)?;
            let all = bruteforce::enumerate_compromises(&prepared, bruteforce::DEFAULT_GRID_CAP)?;
            Ok((
                EXIT_HOLDS,
                format!("{} compromise(s)", all.len()),
                json!({"count": all.len(), "compromises": all}),
            ))
        }
        OracleCommand::Check { instance, system } => {
            let g = load_instance(instance)?;
            let s = load_system(&g, system)?;
            let ok = bruteforce::oracle_is_metastable(&g, s);
            let (code, verdict) = holds(ok, "meta-stable", "dominated");
            Ok((code, verdict, json!({"system": ids(&g, s), "metastable": ok})))
        }
    }
}
