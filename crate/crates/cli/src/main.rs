//! `dyadic-walsh`: command-line access to the core computations and the
//! seeded experiment sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use dyadic_walsh::experiments::{self, BlowupMode, FamilyKind};
use dyadic_walsh::index::{self, parse_index_list};
use dyadic_walsh::{
    fixture, walsh, Atom, CosetSelector, Error, ExperimentReport, Exponent, Martingale, NormValue,
    WeightFamily,
};

const OUT_ENV: &str = "DYADIC_WALSH_OUT";

/// Exact Walsh-Fourier analysis on the dyadic group.
#[derive(Parser, Clone, Debug, PartialEq)]
#[command(name = "dyadic-walsh", version)]
pub struct RunConfig {
    /// Seed for every random choice. Equal seeds give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for the sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for CSV reports.
    #[arg(long, global = true, env = OUT_ENV, default_value = ".")]
    pub out: PathBuf,

    /// Timestamp used in CSV file names (default: current unix time).
    #[arg(long, global = true)]
    pub timestamp: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Binary profile of a natural number n: lowest and highest set bit,
    /// their gap rho(n), and the variation V(n) = number of digit changes
    /// in the binary expansion read with a leading zero.
    Index {
        /// Index n >= 1.
        n: u64,
    },
    /// Decomposition of n into maximal runs of one-digits, each run given by
    /// its lowest and highest bit position.
    Blocks {
        /// Index n >= 1.
        n: u64,
    },
    /// Union of run endpoints over a family of indices that all lie in the
    /// window [2^s, 2^(s+1)), with its cardinality and the window spread.
    Boundary(BoundaryArgs),
    /// Walsh-Dirichlet kernel D_n = w_0 + ... + w_(n-1). Prints the kernel as a
    /// fixture, or with --norm its exact L1 norm (the Lebesgue constant).
    Dirichlet(DirichletArgs),
    /// Walsh-Fourier partial sum S_n f of a step-function fixture.
    PartialSum(PartialSumArgs),
    /// Martingale Hardy norm: the Lp norm of the maximal function
    /// sup_m |E_m f| over the dyadic filtration.
    Hpnorm(HpnormArgs),
    /// Checks that a fixture is a p-atom on the coset of depth M with the given
    /// anchor: supported there, mean zero, and bounded by mu(I)^(-1/p). For a
    /// valid atom it also prints the weak-L1 size of the variation-weighted
    /// maximal function of partial sums outside the support.
    AtomCheck(AtomCheckArgs),
    /// Seeded random 1-atoms at each support depth M, reporting the largest
    /// weak-type statistic per depth. Writes a CSV report.
    WeaktypeSweep(WeaktypeArgs),
    /// Checks V(n)/8 <= ||D_n||_1 <= V(n) for every n up to n_max and for
    /// seeded random samples of larger n. Writes a CSV report.
    LebesgueSweep(LebesgueArgs),
    /// Empirical constant in ||S_n f||_H1 <= C V(n) ||f||_H1 over seeded
    /// random test functions. Writes a CSV report.
    SnormSweep(SnormArgs),
    /// Ratio of the L1 norm of the variation-weighted maximal function to the
    /// H1 norm for the counterexample of order n_k. The ratio grows without
    /// bound in n_k, so the operator is unbounded from H1 to L1.
    Blowup(BlowupArgs),
    /// Exploratory: the maximal operator weighted by boundary-set
    /// cardinalities over built-in index families. Writes a CSV report.
    Conjecture(ConjectureArgs),
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct BoundaryArgs {
    /// Window exponent s.
    #[arg(long)]
    pub s: u32,
    /// Comma-separated indices, e.g. 9,13.
    pub indices: String,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct DirichletArgs {
    /// Kernel order n >= 1.
    #[arg(long)]
    pub n: u64,
    /// Print the exact L1 norm instead of the kernel values.
    #[arg(long)]
    pub norm: bool,
    /// Resolution of the printed kernel (default: the smallest that fits).
    #[arg(long)]
    pub resolution: Option<u32>,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct PartialSumArgs {
    /// Step-function fixture.
    #[arg(long)]
    pub input: PathBuf,
    /// Partial-sum order n, 1 <= n <= 2^N.
    #[arg(long)]
    pub n: u64,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct HpnormArgs {
    /// Step-function fixture.
    #[arg(long)]
    pub input: PathBuf,
    /// Exponent p, e.g. 1, 1/2 or 0.75.
    #[arg(long, default_value = "1")]
    pub p: Exponent,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct AtomCheckArgs {
    /// Step-function fixture holding the atom values.
    #[arg(long)]
    pub input: PathBuf,
    /// Support depth M.
    #[arg(long)]
    pub depth: u32,
    /// Support anchor: the first M coordinates as an integer.
    #[arg(long, default_value_t = 0)]
    pub anchor: u64,
    /// Exponent p, 0 < p <= 1.
    #[arg(long, default_value = "1")]
    pub p: Exponent,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct WeaktypeArgs {
    /// Atoms per depth.
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    /// Support depths M, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8,9,10")]
    pub depths: Vec<u32>,
    /// Resolution N; every M must be below it.
    #[arg(long, default_value_t = 12)]
    pub resolution: u32,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct LebesgueArgs {
    /// Check every n in 1..=n_max.
    #[arg(long, default_value_t = 8192)]
    pub n_max: u64,
    /// Extra seeded random indices below 2^21.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct SnormArgs {
    /// Largest partial-sum order.
    #[arg(long, default_value_t = 2048)]
    pub n_max: u64,
    /// Random test functions.
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct BlowupArgs {
    /// Counterexample order n_k >= 3.
    #[arg(long)]
    pub nk: u32,
    /// full: every index up to 2^N. witness: the n_k indices 2^n_k + 2^s.
    /// auto: full for small N.
    #[arg(long, default_value = "auto")]
    pub mode: BlowupMode,
    /// Resolution N > n_k (default n_k + 1).
    #[arg(long)]
    pub resolution: Option<u32>,
}

#[derive(Args, Clone, Debug, PartialEq)]
pub struct ConjectureArgs {
    /// Index families: powers, ones, alternating, random.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "powers,ones,alternating,random"
    )]
    pub families: Vec<FamilyKind>,
    /// Resolution N, at most 16.
    #[arg(long, default_value_t = 10)]
    pub resolution: u32,
    /// Seeded random test functions besides the counterexamples.
    #[arg(long, default_value_t = 4)]
    pub functions: u64,
}

impl RunConfig {
    /// An argument vector that parses back to `self`.
    pub fn to_argv(&self) -> Vec<String> {
        let mut v: Vec<String> = vec!["dyadic-walsh".into()];
        let flag = |v: &mut Vec<String>, name: &str, value: String| {
            v.push(format!("--{name}"));
            v.push(value);
        };
        flag(&mut v, "seed", self.seed.to_string());
        if let Some(t) = self.threads {
            flag(&mut v, "threads", t.to_string());
        }
        flag(&mut v, "out", self.out.display().to_string());
        if let Some(t) = self.timestamp {
            flag(&mut v, "timestamp", t.to_string());
        }
        let join = |xs: &[String]| xs.join(",");
        match &self.command {
            Command::Index { n } => v.extend(["index".into(), n.to_string()]),
            Command::Blocks { n } => v.extend(["blocks".into(), n.to_string()]),
            Command::Boundary(a) => {
                v.push("boundary".into());
                flag(&mut v, "s", a.s.to_string());
                v.push(a.indices.clone());
            }
            Command::Dirichlet(a) => {
                v.push("dirichlet".into());
                flag(&mut v, "n", a.n.to_string());
                if a.norm {
                    v.push("--norm".into());
                }
                if let Some(r) = a.resolution {
                    flag(&mut v, "resolution", r.to_string());
                }
            }
            Command::PartialSum(a) => {
                v.push("partial-sum".into());
                flag(&mut v, "input", a.input.display().to_string());
                flag(&mut v, "n", a.n.to_string());
                if let Some(o) = &a.output {
                    flag(&mut v, "output", o.display().to_string());
                }
            }
            Command::Hpnorm(a) => {
                v.push("hpnorm".into());
                flag(&mut v, "input", a.input.display().to_string());
                flag(&mut v, "p", a.p.to_string());
            }
            Command::AtomCheck(a) => {
                v.push("atom-check".into());
                flag(&mut v, "input", a.input.display().to_string());
                flag(&mut v, "depth", a.depth.to_string());
                flag(&mut v, "anchor", a.anchor.to_string());
                flag(&mut v, "p", a.p.to_string());
            }
            Command::WeaktypeSweep(a) => {
                v.push("weaktype-sweep".into());
                flag(&mut v, "count", a.count.to_string());
                let depths: Vec<String> = a.depths.iter().map(u32::to_string).collect();
                flag(&mut v, "depths", join(&depths));
                flag(&mut v, "resolution", a.resolution.to_string());
            }
            Command::LebesgueSweep(a) => {
                v.push("lebesgue-sweep".into());
                flag(&mut v, "n-max", a.n_max.to_string());
                flag(&mut v, "samples", a.samples.to_string());
            }
            Command::SnormSweep(a) => {
                v.push("snorm-sweep".into());
                flag(&mut v, "n-max", a.n_max.to_string());
                flag(&mut v, "trials", a.trials.to_string());
            }
            Command::Blowup(a) => {
                v.push("blowup".into());
                flag(&mut v, "nk", a.nk.to_string());
                flag(&mut v, "mode", a.mode.as_str().to_string());
                if let Some(r) = a.resolution {
                    flag(&mut v, "resolution", r.to_string());
                }
            }
            Command::Conjecture(a) => {
                v.push("conjecture".into());
                let kinds: Vec<String> =
                    a.families.iter().map(|k| k.as_str().to_string()).collect();
                flag(&mut v, "families", join(&kinds));
                flag(&mut v, "resolution", a.resolution.to_string());
                flag(&mut v, "functions", a.functions.to_string());
            }
        }
        v
    }
}

#[derive(Debug)]
enum Failure {
    /// Bad input; exit code 2.
    Invalid(String),
    /// Anything else; exit code 1.
    Internal(String),
}

/// Attributes a core error to the flag that caused it.
fn at(flag: &'static str) -> impl Fn(Error) -> Failure {
    move |e| match e {
        Error::Io(msg) => Failure::Internal(format!("{flag}: {msg}")),
        e => Failure::Invalid(format!("{flag}: {e}")),
    }
}

fn invalid(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Invalid(format!("{flag}: {msg}"))
}

fn read_fixture(path: &Path) -> Result<dyadic_walsh::StepFunction, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid("--input", format!("{}: {e}", path.display())))?;
    fixture::parse_step_function(&text)
        .map_err(|e| invalid("--input", format!("{}: {e}", path.display())))
}

fn render_norm(v: &NormValue) -> String {
    match v {
        NormValue::Exact(d) => format!(
            "{} exact={} decimal={}",
            d.to_rational(),
            d,
            dyadic_walsh::value::decimal(d.to_f64())
        ),
        NormValue::Approx(x) => format!(
            "{} decimal={}",
            dyadic_walsh::value::decimal(*x),
            dyadic_walsh::value::decimal(*x)
        ),
    }
}

fn timestamp(cfg: &RunConfig) -> u64 {
    cfg.timestamp.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn emit(cfg: &RunConfig, report: ExperimentReport) -> Result<(), Failure> {
    log::info!(
        "{} finished in {:.3}s",
        report.name,
        report.runtime.as_secs_f64()
    );
    let path = report
        .write_csv(&cfg.out, timestamp(cfg))
        .map_err(|e| Failure::Internal(format!("--out: {e}")))?;
    println!("{}", report.summary_line());
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cfg: &RunConfig) -> Result<(), Failure> {
    match &cfg.command {
        Command::Index { n } => {
            let p = index::index_profile(*n).map_err(at("<n>"))?;
            println!(
                "low={} high={} rho={} V={}",
                p.low, p.high, p.gap, p.variation
            );
        }
        Command::Blocks { n } => {
            let d = index::blocks(*n).map_err(at("<n>"))?;
            let runs: Vec<String> = d
                .blocks
                .iter()
                .map(|b| format!("[{},{}]", b.low, b.high))
                .collect();
            println!(
                "blocks={} runs={} V={}",
                d.len(),
                runs.join(" "),
                index::variation(*n)
            );
        }
        Command::Boundary(a) => {
            let indices = parse_index_list(&a.indices).map_err(at("<indices>"))?;
            let set = index::boundary_set(&indices, a.s).map_err(at("--s"))?;
            let w = index::window_profile(&indices, a.s).map_err(at("--s"))?;
            let members: Vec<String> = set.members.iter().map(u32::to_string).collect();
            println!(
                "s={} cardinality={} members={} s_minus={} rho_s={}",
                a.s,
                set.cardinality(),
                members.join(","),
                w.s_minus,
                w.rho_s
            );
        }
        Command::Dirichlet(a) => {
            if a.norm {
                let norm = walsh::lebesgue_constant(a.n).map_err(at("--n"))?;
                println!(
                    "n={} L1={} exact={} decimal={}",
                    a.n,
                    norm.to_rational(),
                    norm,
                    dyadic_walsh::value::decimal(norm.to_f64())
                );
            } else {
                let kernel = match a.resolution {
                    Some(r) => {
                        experiments::check_resolution_arg(r).map_err(at("--resolution"))?;
                        walsh::dirichlet_closed(a.n, r).map_err(at("--n"))?
                    }
                    None => walsh::dirichlet(a.n).map_err(at("--n"))?,
                };
                print!("{}", fixture::to_text(&kernel));
            }
        }
        Command::PartialSum(a) => {
            let f = read_fixture(&a.input)?;
            let s = walsh::partial_sum(&f, a.n).map_err(at("--n"))?;
            let text = fixture::to_text(&s);
            match &a.output {
                Some(path) => {
                    std::fs::write(path, text)
                        .map_err(|e| Failure::Internal(format!("--output: {e}")))?;
                    println!(
                        "partial-sum n={} N={} wrote {}",
                        a.n,
                        s.resolution(),
                        path.display()
                    );
                }
                None => print!("{text}"),
            }
        }
        Command::Hpnorm(a) => {
            let f = read_fixture(&a.input)?;
            let n = f.resolution();
            let v = dyadic_walsh::hp_norm(&Martingale::from_terminal(f), a.p);
            println!("p={} N={} Hp={}", a.p, n, render_norm(&v));
        }
        Command::AtomCheck(a) => {
            let values = read_fixture(&a.input)?;
            let support = CosetSelector::coset(a.depth, a.anchor).map_err(at("--anchor"))?;
            if a.depth > values.resolution() {
                return Err(invalid(
                    "--depth",
                    format!(
                        "depth {} exceeds the fixture resolution {}",
                        a.depth,
                        values.resolution()
                    ),
                ));
            }
            let atom = Atom {
                p: a.p,
                support,
                values,
            };
            let report = dyadic_walsh::validate_atom(&atom);
            if !report.is_valid() {
                return Err(invalid(
                    "--input",
                    format!("not a {}-atom: {}", a.p, report.diagnostics().join("; ")),
                ));
            }
            let mut line = format!(
                "atom-check valid=true M={} anchor={} p={} mean={} sup={}",
                a.depth, a.anchor, a.p, report.mean, report.sup
            );
            if a.depth < atom.values.resolution() {
                let stat = dyadic_walsh::weak_type_statistic(&atom, &WeightFamily::Variation)
                    .map_err(at("--input"))?;
                line.push_str(&format!(
                    " weak_statistic={} decimal={}",
                    stat,
                    dyadic_walsh::value::decimal(stat.to_f64())
                ));
            }
            println!("{line}");
        }
        Command::WeaktypeSweep(a) => {
            experiments::check_resolution_arg(a.resolution).map_err(at("--resolution"))?;
            if a.depths.is_empty() {
                return Err(invalid("--depths", "at least one depth is required"));
            }
            if let Some(&m) = a.depths.iter().find(|&&m| m >= a.resolution) {
                return Err(invalid(
                    "--depths",
                    format!("depth {m} is not below --resolution {}", a.resolution),
                ));
            }
            let report = experiments::weak_type_sweep(a.count, &a.depths, a.resolution, cfg.seed)
                .map_err(at("--resolution"))?;
            emit(cfg, report)?;
        }
        Command::LebesgueSweep(a) => {
            let report =
                experiments::lebesgue_sweep(a.n_max, a.samples, cfg.seed).map_err(at("--n-max"))?;
            emit(cfg, report)?;
        }
        Command::SnormSweep(a) => {
            if a.trials == 0 {
                return Err(invalid("--trials", "must be at least 1"));
            }
            let report = experiments::partial_sum_norm_sweep(a.n_max, a.trials, cfg.seed)
                .map_err(at("--n-max"))?;
            emit(cfg, report)?;
        }
        Command::Blowup(a) => {
            if a.nk < 3 {
                return Err(invalid("--nk", Error::CounterexampleOrder(a.nk)));
            }
            let resolution = a.resolution.unwrap_or(a.nk + 1);
            experiments::check_resolution_arg(resolution).map_err(at("--resolution"))?;
            if resolution <= a.nk {
                return Err(invalid(
                    "--resolution",
                    format!("must exceed --nk {}, got {resolution}", a.nk),
                ));
            }
            let b = experiments::blowup_ratio(a.nk, a.mode, resolution).map_err(at("--mode"))?;
            println!(
                "blowup nk={} N={} mode={} ratio={} exact={} decimal={} maximal_L1={} H1={}",
                b.order,
                b.resolution,
                b.mode.as_str(),
                b.ratio,
                dyadic_walsh::value::render_rational(&b.ratio),
                dyadic_walsh::value::decimal(dyadic_walsh::value::rational_to_f64(&b.ratio)),
                b.maximal_norm,
                b.hardy_norm
            );
        }
        Command::Conjecture(a) => {
            if a.families.is_empty() {
                return Err(invalid("--families", "at least one family is required"));
            }
            let report =
                experiments::conjecture_explorer(&a.families, a.resolution, a.functions, cfg.seed)
                    .map_err(at("--resolution"))?;
            emit(cfg, report)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cfg.threads {
        if threads == 0 {
            eprintln!("error: --threads: must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
