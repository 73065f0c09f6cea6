use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use psll::atpg::{dump_patterns, generate_test_patterns, AtpgOptions, Engine, Fault};
use psll::attack::{attack, AttackError, AttackOptions, FamilyChoice};
use psll::lock::{bits_to_string, lock, parse_bits, DtlGate, LockSpec, Secrets, Technique};
use psll::netlist::{emit_bench, parse_bench_named, Circuit};
use psll::report::{aggregate, run_campaign, score, to_csv, write_trial, AttackReport, CampaignConfig};
use psll::resynth::{external_synth_roundtrip, Recipe, ResynthError};
use psll::sat::{check_equivalence, substitute_key};
use psll::sim::{eval, Oracle, TernaryPattern};

const USAGE: u8 = 1;
const PARSE: u8 = 2;
const INCOMPLETE: u8 = 3;
const NOT_EQUIVALENT: u8 = 4;
const EXTERNAL: u8 = 5;

/// Logic-locking workbench: lock netlists, attack them, verify keys.
#[derive(Parser)]
#[command(name = "psll", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lock a BENCH netlist; writes locked.bench, manifest.json and secret.key.
    Lock(LockArgs),
    /// Recover the key of a locked netlist.
    Attack(AttackArgs),
    /// Check a key by equivalence against the original netlist.
    Verify(VerifyArgs),
    /// Generate test cubes for one stuck-at fault.
    Atpg(AtpgArgs),
    /// Simulate one input pattern.
    Sim(SimArgs),
    /// Resynthesize a netlist with a built-in recipe or an external tool.
    Resynth(ResynthArgs),
    /// Run a lock/attack campaign and print the aggregate table as CSV.
    Campaign(CampaignArgs),
}

#[derive(Args)]
struct LockArgs {
    input: PathBuf,
    #[arg(long)]
    technique: Technique,
    #[arg(long)]
    key_size: usize,
    /// Protected patterns (SFLL-flex).
    #[arg(long)]
    num_pp: Option<usize>,
    /// Diversified comparator pairs (DTL variants).
    #[arg(long)]
    dtl: Option<usize>,
    /// Gate used by DTL diversification: or, nand, nor.
    #[arg(long, default_value = "or", value_parser = parse_dtl_gate)]
    dtl_gate: DtlGate,
    /// Blocks (SAS).
    #[arg(long)]
    sas: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    locked: PathBuf,
    /// `none`, an unlocked netlist, or `<locked.bench>+<key bits or key file>`.
    #[arg(long, default_value = "none")]
    oracle: String,
    #[arg(long, default_value = "auto")]
    family: FamilyChoice,
    #[arg(long, default_value_t = 1)]
    num_pp: usize,
    /// Where to write the JSON report.
    #[arg(short, long)]
    report: Option<PathBuf>,
    /// Secret file or key bits used to score the report.
    #[arg(long)]
    secret: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    locked: PathBuf,
    original: PathBuf,
    /// Key bits or a key file.
    #[arg(long)]
    key: String,
}

#[derive(Args)]
struct AtpgArgs {
    input: PathBuf,
    #[arg(long)]
    net: String,
    /// Stuck-at value, 0 or 1.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    fault: u8,
    #[arg(long, default_value_t = 16)]
    max_patterns: usize,
    /// Use SAT enumeration instead of PODEM.
    #[arg(long)]
    sat: bool,
}

#[derive(Args)]
struct SimArgs {
    input: PathBuf,
    /// One character per port (inputs, then key inputs): 0, 1 or x.
    #[arg(long)]
    pattern: String,
}

#[derive(Args)]
struct ResynthArgs {
    input: PathBuf,
    #[arg(long, value_parser = parse_recipe, conflicts_with = "external", required_unless_present = "external")]
    recipe: Option<Recipe>,
    /// Shell command with `{in}` and `{out}` placeholders.
    #[arg(long)]
    external: Option<String>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct CampaignArgs {
    config: PathBuf,
    /// Overrides the worker count in the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_dtl_gate(s: &str) -> Result<DtlGate, String> {
    DtlGate::parse(s).ok_or_else(|| format!("unknown DTL gate `{s}` (or, nand, nor)"))
}

fn parse_recipe(s: &str) -> Result<Recipe, String> {
    Recipe::parse(s).ok_or_else(|| format!("unknown recipe `{s}` (light, medium, heavy)"))
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl ToString) -> Failure {
    Failure {
        code,
        msg: msg.to_string(),
    }
}

type Outcome = Result<(), Failure>;

fn read_netlist(path: &Path) -> Result<Circuit, Failure> {
    let text = fs::read_to_string(path).map_err(|e| fail(PARSE, format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("top");
    parse_bench_named(&text, name).map_err(|e| fail(PARSE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| fail(USAGE, format!("{}: {e}", path.display())))
}

/// Key bits given inline or in a file (plain bits or a secret.key JSON).
fn read_key(arg: &str) -> Result<Vec<bool>, Failure> {
    if let Some(k) = parse_bits(arg) {
        if !arg.trim().is_empty() {
            return Ok(k);
        }
    }
    let text = fs::read_to_string(arg).map_err(|e| fail(PARSE, format!("{arg}: {e}")))?;
    let bits = match serde_json::from_str::<Secrets>(&text) {
        Ok(s) => s.key,
        Err(_) => text,
    };
    parse_bits(&bits).ok_or_else(|| fail(PARSE, format!("{arg}: not a key")))
}

fn build_oracle(spec: &str) -> Result<Option<Oracle>, Failure> {
    if spec == "none" {
        return Ok(None);
    }
    match spec.rsplit_once('+') {
        Some((net, key)) => {
            let c = read_netlist(Path::new(net))?;
            let k = read_key(key)?;
            if k.len() != c.key_inputs().len() {
                return Err(fail(USAGE, format!("oracle key has {} bits, netlist {}", k.len(), c.key_inputs().len())));
            }
            Ok(Some(Oracle::with_key(c, k)))
        }
        None => {
            let c = read_netlist(Path::new(spec))?;
            if !c.key_inputs().is_empty() {
                return Err(fail(USAGE, "oracle netlist has key inputs; pass <locked.bench>+<key>"));
            }
            Ok(Some(Oracle::new(c)))
        }
    }
}

fn cmd_lock(a: LockArgs) -> Outcome {
    let c = read_netlist(&a.input)?;
    let mut spec = LockSpec::new(a.technique, a.key_size, a.seed);
    spec.num_pp = a.num_pp;
    spec.dtl_replacements = a.dtl;
    spec.dtl_gate = a.dtl_gate;
    if let Some(b) = a.sas {
        spec.sas_blocks = b;
    }
    let art = lock(&c, &spec).map_err(|e| fail(USAGE, e))?;
    write_trial(&a.out, &art.locked, &art.manifest(c.name()), &art.secrets()).map_err(|e| fail(USAGE, e))?;
    println!(
        "locked {} with {} ({} key bits) into {}",
        c.name(),
        a.technique,
        a.key_size,
        a.out.display()
    );
    Ok(())
}

fn cmd_attack(a: AttackArgs) -> Outcome {
    let c = read_netlist(&a.locked)?;
    let oracle = build_oracle(&a.oracle)?;
    let opts = AttackOptions {
        family: a.family,
        num_pp: a.num_pp,
        ..AttackOptions::default()
    };
    let out = attack(&c, oracle.as_ref(), &opts).map_err(|e| match e {
        AttackError::Sat(_) | AttackError::Netlist(_) => fail(USAGE, e),
        _ => fail(INCOMPLETE, e),
    })?;
    let mut report = AttackReport::draft(c.name(), &out);
    if let Some(s) = &a.secret {
        let planted = read_key(s)?;
        report = score(report, &planted, &c).map_err(|e| fail(USAGE, e))?;
    }
    if let Some(p) = &a.report {
        write_file(p, &report.to_json())?;
    }
    println!("key {}", out.key);
    if !out.mapping.is_empty() {
        println!("mapping {}", bits_to_string(&out.mapping));
    }
    println!(
        "oracle-less {} dips {} queries {}",
        out.oracle_less(),
        out.dip_count,
        out.oracle_queries
    );
    if out.complete() {
        Ok(())
    } else {
        Err(fail(
            INCOMPLETE,
            format!("{} key bits unresolved; provide --oracle to finish", out.key.count_x()),
        ))
    }
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let locked = read_netlist(&a.locked)?;
    let orig = read_netlist(&a.original)?;
    let key = read_key(&a.key)?;
    let unlocked = substitute_key(&locked, &TernaryPattern::from_bools(&key)).map_err(|e| fail(USAGE, e))?;
    let eq = check_equivalence(&orig, &unlocked).map_err(|e| fail(USAGE, e))?;
    if eq.is_equivalent() {
        println!("equivalent");
        Ok(())
    } else {
        println!("not equivalent");
        Err(fail(NOT_EQUIVALENT, "key does not unlock the circuit"))
    }
}

fn cmd_atpg(a: AtpgArgs) -> Outcome {
    let c = read_netlist(&a.input)?;
    let net = c.net(&a.net).ok_or_else(|| fail(USAGE, format!("no net `{}`", a.net)))?;
    let mut opts = AtpgOptions::new(a.max_patterns);
    if a.sat {
        opts.engine = Engine::Sat;
    }
    let r = generate_test_patterns(&c, Fault::new(net, a.fault == 1), &opts);
    print!("{}", dump_patterns(&r.cubes));
    if r.untestable() {
        eprintln!("untestable");
    } else if !r.complete {
        eprintln!("more patterns exist");
    }
    Ok(())
}

fn cmd_sim(a: SimArgs) -> Outcome {
    let c = read_netlist(&a.input)?;
    let p: TernaryPattern = a.pattern.parse().map_err(|e| fail(USAGE, e))?;
    if p.width() != c.num_ports() {
        return Err(fail(USAGE, format!("pattern has {} bits, circuit {} ports", p.width(), c.num_ports())));
    }
    match p.to_bools() {
        Some(bits) => println!("{}", bits_to_string(&eval(&c, &bits).map_err(|e| fail(USAGE, e))?)),
        None => println!(
            "{}",
            psll::sim::eval_ternary(&c, &p).map_err(|e| fail(USAGE, e))?
        ),
    }
    Ok(())
}

fn cmd_resynth(a: ResynthArgs) -> Outcome {
    let c = read_netlist(&a.input)?;
    let out = match (&a.recipe, &a.external) {
        (Some(r), _) => r.apply(&c),
        (None, Some(cmd)) => external_synth_roundtrip(&c, cmd).map_err(|e| match e {
            ResynthError::Netlist(_) => fail(PARSE, e),
            _ => fail(EXTERNAL, e),
        })?,
        (None, None) => return Err(fail(USAGE, "give --recipe or --external")),
    };
    write_file(&a.out, &emit_bench(&out))?;
    println!("{} gates -> {} gates", c.num_gates(), out.num_gates());
    Ok(())
}

fn cmd_campaign(a: CampaignArgs) -> Outcome {
    let text = fs::read_to_string(&a.config).map_err(|e| fail(PARSE, format!("{}: {e}", a.config.display())))?;
    let mut cfg: CampaignConfig =
        serde_json::from_str(&text).map_err(|e| fail(PARSE, format!("{}: {e}", a.config.display())))?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let reports = run_campaign(&cfg).map_err(|e| fail(USAGE, e))?;
    let csv = to_csv(&aggregate(&reports));
    match &a.csv {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Lock(a) => cmd_lock(a),
        Cmd::Attack(a) => cmd_attack(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Atpg(a) => cmd_atpg(a),
        Cmd::Sim(a) => cmd_sim(a),
        Cmd::Resynth(a) => cmd_resynth(a),
        Cmd::Campaign(a) => cmd_campaign(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("psll: {}", f.msg.lines().next().unwrap_or(""));
            ExitCode::from(f.code)
        }
    }
}
