use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use orthostab::additive::reduce_additive;
use orthostab::direct_method::{coeffs_closed, coeffs_recurrence, series_sum, stability_bound};
use orthostab::fspace::check_fnorm_axioms;
use orthostab::ortho::{check_fs_axioms, check_gc_axioms, check_ratz_axioms, check_sec3_axioms};
use orthostab::quadratic::reduce_quadratic;
use orthostab::report::{read_report, write_report_to, ReportFormat};
use orthostab::{run_experiment, Error, ExperimentConfig, FNormSpace, NormKind, OrthoRelation, Rational, Result};

#[derive(Parser)]
#[command(name = "orthostab", version, about = "Direct-method stability checks for orthogonal functional equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxiomSuite {
    Fs,
    Gc,
    Sec3,
    Ratz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Additive,
    Quadratic,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the F-norm axioms of a codomain space.
    CheckSpace {
        #[arg(long)]
        kind: NormKind,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample the axioms of an orthogonality relation on Z^dim.
    CheckOrtho {
        #[arg(long, default_value = "inner-product")]
        relation: OrthoRelation,
        #[arg(long, value_enum)]
        axioms: AxiomSuite,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the coefficient recurrence next to its closed form.
    Coeffs {
        #[arg(long, allow_hyphen_values = true)]
        alpha: Rational,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Rational,
        #[arg(long)]
        n: usize,
    },
    /// Print the reduced parameters and the stability bound.
    Bound {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long = "M", allow_hyphen_values = true)]
        m: Option<Rational>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<i64>,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
    },
    /// Run an experiment config and write its report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a saved report as JSON or as the CSV iteration trace.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::CheckSpace {
            kind,
            beta,
            dim,
            samples,
            seed,
        } => {
            if !(beta > 0.0 && beta.is_finite()) || dim == 0 {
                return Err(Error::InvalidArgument("need beta > 0 and dim >= 1".into()));
            }
            // Out-of-range beta is allowed here so broken spaces can be inspected.
            let space = FNormSpace::new_unchecked(kind, beta, dim);
            let report = check_fnorm_axioms(&space, samples, seed);
            print!("{report}");
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::CheckOrtho {
            relation,
            axioms,
            dim,
            samples,
            seed,
        } => {
            let report = match axioms {
                AxiomSuite::Fs => check_fs_axioms(&relation, dim, samples, seed),
                AxiomSuite::Gc => check_gc_axioms(&relation, dim, samples, seed),
                AxiomSuite::Sec3 => check_sec3_axioms(&relation, dim, samples, seed),
                AxiomSuite::Ratz => check_ratz_axioms(dim, samples, seed)?,
            };
            print!("{report}");
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Command::Coeffs { alpha, gamma, n } => {
            println!("n\tA (recurrence)\tB (recurrence)\tA (closed)\tB (closed)\tequal");
            for k in 0..=n {
                let rec = coeffs_recurrence(&alpha, &gamma, k);
                let closed = coeffs_closed(&alpha, &gamma, k);
                let equal = rec == closed;
                println!("{k}\t{}\t{}\t{}\t{}\t{equal}", rec.a, rec.b, closed.a, closed.b);
            }
            Ok(0)
        }
        Command::Bound {
            mode,
            m,
            lambda,
            beta,
            epsilon,
        } => {
            let red = match mode {
                Mode::Additive => {
                    let m = m.ok_or_else(|| Error::InvalidArgument("--M is required in additive mode".into()))?;
                    reduce_additive(&m, beta, epsilon)?
                }
                Mode::Quadratic => {
                    let lambda =
                        lambda.ok_or_else(|| Error::InvalidArgument("--lambda is required in quadratic mode".into()))?;
                    reduce_quadratic(lambda, beta, epsilon)?
                }
            };
            let p = &red.params;
            let s = series_sum(&p.alpha, &p.gamma, beta, 1e-12)?;
            println!("alpha = {}", p.alpha);
            println!("gamma = {}", p.gamma);
            println!("omega = {}", p.omega);
            println!("u = {}", red.u);
            println!("v = {}", red.v);
            match &red.defect_factor_exact {
                Some(exact) => println!("C = {} (= {exact} * epsilon)", p.c),
                None => println!("C = {}", p.c),
            }
            println!("S = {}", s.value);
            println!("bound = {}", stability_bound(p.c, s.value));
            Ok(0)
        }
        Command::Solve { config, out } => {
            let config = ExperimentConfig::load(&config)?;
            let report = run_experiment(&config);
            write_report_to(&report, ReportFormat::Json, output(out.as_ref())?)?;
            if let Some(f) = &report.pass.failure {
                eprintln!("error[{}]: {}", f.code, f.message);
            }
            Ok(report.exit_code() as u8)
        }
        Command::Report { input, format, out } => {
            let report = read_report(&input)?;
            write_report_to(&report, format, output(out.as_ref())?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_invalid_parameters() { 2 } else { 1 })
        }
    }
}
