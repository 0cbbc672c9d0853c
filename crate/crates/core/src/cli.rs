//! Command-line front end. [`run`] is the whole program minus process exit,
//! so tests can drive it with in-memory streams.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{
    check_controllability, simulate_laplacians, ArrayState, OscillatorSystem, SimulationParams,
};
use crate::error::Error;
use crate::fixtures;
use crate::format::{self, InterconnectionFile};
use crate::graphs::{EdgeKind, Interconnection};
use crate::laplacians::{laplacian, WeightMap};
use crate::report::{analyze, AnalysisOptions};
use crate::spectral::spectrum;
use crate::structural::{
    construct_synchronizing_weights, falsify_by_sampling, is_sss, verify_witness, witness_images,
    witness_to_laplacians, ConstructionCase, FalsifyOptions, SssOptions, DEFAULT_BUDGET,
};
use crate::topology::{classify, fast_path};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "structsync",
    version,
    about = "Structural synchronization of dissipative/restorative oscillator networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Largest restorative edge count searched for a sign witness.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Worker threads for the sign-pattern search.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SearchArgs {
    fn options(&self) -> SssOptions {
        SssOptions {
            budget: self.budget,
            jobs: self.jobs,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide structural and strong structural synchronization.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Seed for the sampling cross-check; skipped when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Spectrum of the certificate pair (witness or synthesized weights).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Where to write the sign witness, if there is one.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Append wall time per phase.
        #[arg(long)]
        timings: bool,
    },
    /// Check a sign witness and the laplacian pair it induces.
    Verify {
        file: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        /// Spectrum of the induced pair.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print weights with a positive synchronization margin.
    Synthesize {
        file: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample weight pairs looking for one without a positive margin.
    Falsify {
        file: PathBuf,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integrate the oscillator array from seeded random initial states.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = crate::dynamics::DEFAULT_HORIZON)]
        horizon: f64,
        #[arg(long, default_value_t = crate::dynamics::DEFAULT_STEP)]
        step: f64,
        /// Trajectory as `t,delta,y1..yq`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fast-path against general verdicts over the fixture gallery, as CSV.
    Bench {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn at(path: &Path, e: Error) -> Self {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => EXIT_INPUT,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<InterconnectionFile, Failure> {
    format::parse_interconnection(&read(path)?).map_err(|e| Failure::at(path, e))
}

fn weights_or_unit(
    file: &InterconnectionFile,
    kind: EdgeKind,
) -> std::result::Result<WeightMap, Failure> {
    let given = match kind {
        EdgeKind::Dissipative => &file.dissipative_weights,
        EdgeKind::Restorative => &file.restorative_weights,
    };
    match given {
        Some(w) => Ok(w.clone()),
        None => Ok(WeightMap::uniform(
            file.interconnection.edges(kind).len(),
            1.0,
        )?),
    }
}

fn describe_case(case: &ConstructionCase) -> String {
    match case {
        ConstructionCase::Blocks { components } => format!("{components} restorative components"),
        ConstructionCase::Pair => "single vertex pair".to_string(),
        ConstructionCase::Split { split_edge } => format!("split across {split_edge}"),
    }
}

fn cmd_analyze(
    file: &Path,
    search: &SearchArgs,
    seed: Option<u64>,
    trials: usize,
    csv: Option<&Path>,
    witness: Option<&Path>,
    timings: bool,
) -> Outcome {
    let ic = load(file)?.interconnection;
    let report = analyze(
        &ic,
        AnalysisOptions {
            sss: search.options(),
            falsify: seed.map(|s| (trials, s)),
        },
    )?;
    let mut out = report.render(timings);
    if let Some(path) = witness {
        match &report.sss.witness {
            Some(w) => write_file(path, &format::write_witness(w))?,
            None => out.push_str("witness file: not written (no witness)\n"),
        }
    }
    if let Some(path) = csv {
        if let Some(s) = &report.witness_spectrum {
            write_file(path, &s.to_csv())?;
        } else if report.ss.is_ss {
            let w = construct_synchronizing_weights(&ic)?;
            write_file(path, &spectrum(&w.d, &w.r)?.to_csv())?;
        } else {
            out.push_str("spectrum file: not written (no certificate pair)\n");
        }
    }
    let code = if report.is_consistent() {
        0
    } else {
        EXIT_INCONSISTENT
    };
    Ok((out, code))
}

fn cmd_verify(file: &Path, witness: &Path, csv: Option<&Path>) -> Outcome {
    let f = load(file)?;
    let ic = &f.interconnection;
    let x = format::parse_witness(&read(witness)?, ic.restorative().len())
        .map_err(|e| Failure::at(witness, e))?;
    let img = witness_images(ic, &x)?;
    let list = |v: &[num_rational::BigRational]| {
        v.iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "G_r x = ({})", list(&img.potentials));
    let _ = writeln!(out, "G_r^T G_r x = ({})", list(&img.feedback));
    let _ = writeln!(out, "G_d^T G_r x = ({})", list(&img.dissipative_mismatch));
    if !verify_witness(ic, &x)? {
        out.push_str("witness: rejected\n");
        return Ok((out, EXIT_FAILURE));
    }
    let dw = weights_or_unit(&f, EdgeKind::Dissipative)?;
    let (d, r) = witness_to_laplacians(ic, &x, &dw)?;
    let s = spectrum(&d, &r)?;
    let _ = writeln!(
        out,
        "witness: accepted; induced pair margin {:e} ({})",
        s.margin(),
        s.classify()
    );
    if let Some(path) = csv {
        write_file(path, &s.to_csv())?;
    }
    Ok((out, 0))
}

fn cmd_synthesize(file: &Path, csv: Option<&Path>) -> Outcome {
    let ic = load(file)?.interconnection;
    let w = construct_synchronizing_weights(&ic)?;
    let mut out = format!(
        "# construction: {}\n# margin: {:e}\n",
        describe_case(&w.case),
        w.margin
    );
    out.push_str(&format::write_weighted(&ic, &w.d, &w.r));
    if let Some(path) = csv {
        write_file(path, &spectrum(&w.d, &w.r)?.to_csv())?;
    }
    Ok((out, 0))
}

fn cmd_falsify(file: &Path, trials: usize, seed: u64, csv: Option<&Path>) -> Outcome {
    let ic = load(file)?.interconnection;
    let found = falsify_by_sampling(&ic, trials, seed, &FalsifyOptions::default())?;
    let out = match found {
        None => format!("no counterexample found in {trials} trials (seed {seed})\n"),
        Some(c) => {
            if let Some(path) = csv {
                write_file(path, &spectrum(&c.d, &c.r)?.to_csv())?;
            }
            let mut s = format!(
                "counterexample at trial {}: margin {:e}\n",
                c.trial, c.margin
            );
            s.push_str(&format::write_weighted(&ic, &c.d, &c.r));
            s
        }
    };
    Ok((out, 0))
}

fn cmd_simulate(file: &Path, seed: u64, horizon: f64, step: f64, csv: Option<&Path>) -> Outcome {
    let f = load(file)?;
    let ic = &f.interconnection;
    let sys = f.system.clone().unwrap_or_else(OscillatorSystem::harmonic);
    let d = laplacian(
        ic.q(),
        ic.dissipative(),
        &weights_or_unit(&f, EdgeKind::Dissipative)?,
    )?;
    let r = laplacian(
        ic.q(),
        ic.restorative(),
        &weights_or_unit(&f, EdgeKind::Restorative)?,
    )?;
    let initial = ArrayState::random(ic.q(), sys.order(), seed);
    let trace = simulate_laplacians(&sys, &d, &r, &initial, SimulationParams { horizon, step })?;
    let s = spectrum(&d, &r)?;
    let mut out = String::new();
    if !check_controllability(&sys) {
        out.push_str("warning: oscillator is not controllable; the margin test does not apply\n");
    }
    let _ = writeln!(out, "margin: {:e} ({})", s.margin(), s.classify());
    let _ = writeln!(
        out,
        "tail deviation: {:e} ({})",
        trace.tail,
        crate::dynamics::classify_tail(trace.tail)
    );
    if let Some(path) = csv {
        write_file(path, &trace.to_csv())?;
    }
    Ok((out, 0))
}

/// Gallery rows `fixture,topology,fast_path,general,agree`, and whether
/// every conclusive fast path matched.
pub fn bench_table(options: SssOptions) -> crate::error::Result<(String, bool)> {
    let mut corpus: Vec<(String, Interconnection)> = vec![
        ("example1".into(), fixtures::example1()),
        ("example2".into(), fixtures::example2()),
    ];
    corpus.extend(
        fixtures::gallery()
            .into_iter()
            .map(|g| (g.name.to_string(), g.interconnection)),
    );
    let mut out = String::from("fixture,topology,fast_path,general,agree\n");
    let mut all = true;
    for (name, ic) in corpus {
        let class = classify(ic.q(), &crate::graphs::reduce(&ic).union_edges())?;
        let general = is_sss(&ic, options)?.is_sss;
        let yn = |b: bool| if b { "yes" } else { "no" };
        let (fast, agree) = match fast_path(&ic)? {
            Some(v) => {
                all &= v == general;
                (yn(v), yn(v == general))
            }
            None => ("none", "-"),
        };
        let _ = writeln!(out, "{name},{},{fast},{},{agree}", class.kind, yn(general));
    }
    Ok((out, all))
}

fn cmd_bench(search: &SearchArgs, csv: Option<&Path>) -> Outcome {
    let (table, all) = bench_table(search.options())?;
    if let Some(path) = csv {
        write_file(path, &table)?;
    }
    Ok((table, if all { 0 } else { EXIT_INCONSISTENT }))
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze {
            file,
            search,
            seed,
            trials,
            csv,
            witness,
            timings,
        } => cmd_analyze(
            &file,
            &search,
            seed,
            trials,
            csv.as_deref(),
            witness.as_deref(),
            timings,
        ),
        Command::Verify { file, witness, csv } => cmd_verify(&file, &witness, csv.as_deref()),
        Command::Synthesize { file, csv } => cmd_synthesize(&file, csv.as_deref()),
        Command::Falsify {
            file,
            trials,
            seed,
            csv,
        } => cmd_falsify(&file, trials, seed, csv.as_deref()),
        Command::Simulate {
            file,
            seed,
            horizon,
            step,
            csv,
        } => cmd_simulate(&file, seed, horizon, step, csv.as_deref()),
        Command::Bench { search, csv } => cmd_bench(&search, csv.as_deref()),
    }
}

/// Runs the program and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli) {
        Ok((text, code)) => {
            let _ = stdout.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
