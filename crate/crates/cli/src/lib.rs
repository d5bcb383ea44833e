//! `diracinv`: command-line access to the direct and inverse spectral solvers.
//!
//! Exit codes: 0 on success, 1 when the input is invalid, 2 when a numerical
//! stage fails. Failures print one JSON record on standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dirac_inverse::accelerant::{accelerant_from_measure, free_spectrum, AccelerantOptions};
use dirac_inverse::direct::{Potential, SolverOptions};
use dirac_inverse::error::{Error, Result};
use dirac_inverse::io;
use dirac_inverse::krein::theta;
use dirac_inverse::matcore::{op_norm, ComplexMatrix};
use dirac_inverse::pipeline::{
    check_conditions, estimate_u, forward_t, forward_window, inverse_t, roundtrip, PipelineParams,
};
use dirac_inverse::random::haar_unitary;
use dirac_inverse::reduction::{resolve_sign_convention, TAU_C5};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "diracinv", version, about = "Direct and inverse spectral problems for Dirac operators on (-1,1)")]
pub struct Cli {
    /// Upper bound on worker threads; the solvers run on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Directory for CSV tables (eigenvalues, |q(x)|, errors against M).
    #[arg(long, global = true)]
    pub emit_plots: Option<PathBuf>,
    /// Seed for randomly drawn boundary matrices.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Numerics {
    /// Windows per side in the accelerant sum.
    #[arg(long = "big-m", default_value_t = 40)]
    pub big_m: i64,
    /// Krein grid intervals on [0, 1].
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Tail periods used to estimate the boundary matrix.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Bound on the diagonal blocks of the reconstructed auxiliary potential.
    #[arg(long, default_value_t = TAU_C5)]
    pub tau_c5: f64,
}

impl Numerics {
    fn params(&self) -> PipelineParams {
        PipelineParams {
            big_m: self.big_m,
            n: self.n,
            k: self.k,
            tau_c5: self.tau_c5,
            ..PipelineParams::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free spectrum gamma_k + pi n of a boundary matrix.
    Free {
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Block size of a random boundary matrix when no file is given.
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 4)]
        periods: i64,
    },
    /// Spectral data of T_{q,U}.
    Forward {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Windows per side covered by the data.
        #[arg(long, default_value_t = 40)]
        window: i64,
        /// Extra windows beyond `window`.
        #[arg(long, default_value_t = 2)]
        pad: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruction of (q, U) from spectral data; writes q.json, U.json and report.json.
    Inverse {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Conditions (C1)-(C5) on spectral data.
    Check {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Forward map, reconstruction and re-forward.
    Roundtrip {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        unitary: Option<PathBuf>,
        /// Further truncation levels reported in the error table.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<i64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Accelerant of spectral data.
    Accelerant {
        #[arg(long)]
        data: PathBuf,
        /// Boundary matrix of the free comparison operator; estimated from the data if absent.
        #[arg(long)]
        unitary: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Theta(H) = i R(x, 0) for an accelerant file.
    Krein {
        #[arg(long)]
        accelerant: PathBuf,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sign relating the boundary matrices of the two operator forms.
    SignCheck {
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
}

/// Paths and numeric parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub counts: Vec<(&'static str, i64)>,
    pub reals: Vec<(&'static str, f64)>,
    pub seed: u64,
}

impl JobConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        let mut counts = vec![("threads", cli.threads as i64)];
        let mut reals = Vec::new();
        let mut numerics = |n: &Numerics, counts: &mut Vec<(&'static str, i64)>| {
            counts.extend([("big-m", n.big_m), ("n", n.n as i64), ("k", n.k as i64)]);
            reals.push(("tau-c5", n.tau_c5));
        };
        let command = match &cli.command {
            Command::Free { unitary, r, periods } => {
                inputs.extend(unitary.clone());
                counts.extend([("r", *r as i64), ("periods", *periods)]);
                "free"
            }
            Command::Forward {
                potential,
                unitary,
                window,
                pad,
                out,
            } => {
                inputs.push(potential.clone());
                inputs.extend(unitary.clone());
                outputs.push(out.clone());
                counts.push(("window", *window));
                if *pad < 0 {
                    counts.push(("pad", *pad));
                }
                "forward"
            }
            Command::Inverse { data, out, numerics: n } => {
                inputs.push(data.clone());
                outputs.push(out.clone());
                numerics(n, &mut counts);
                "inverse"
            }
            Command::Check { data, numerics: n } => {
                inputs.push(data.clone());
                numerics(n, &mut counts);
                "check"
            }
            Command::Roundtrip {
                potential,
                unitary,
                sweep,
                numerics: n,
            } => {
                inputs.push(potential.clone());
                inputs.extend(unitary.clone());
                numerics(n, &mut counts);
                counts.extend(sweep.iter().map(|&m| ("sweep", m)));
                "roundtrip"
            }
            Command::Accelerant {
                data,
                unitary,
                out,
                numerics: n,
            } => {
                inputs.push(data.clone());
                inputs.extend(unitary.clone());
                outputs.push(out.clone());
                numerics(n, &mut counts);
                "accelerant"
            }
            Command::Krein { accelerant, n, out } => {
                inputs.push(accelerant.clone());
                outputs.push(out.clone());
                counts.push(("n", *n as i64));
                "krein"
            }
            Command::SignCheck { r } => {
                counts.push(("r", *r as i64));
                "sign-check"
            }
        };
        outputs.extend(cli.emit_plots.clone());
        Self {
            command,
            inputs,
            outputs,
            counts,
            reals,
            seed: cli.seed,
        }
    }

    /// Every path distinct, every count and tolerance positive.
    pub fn validate(&self) -> Result<()> {
        let all: Vec<&PathBuf> = self.inputs.iter().chain(&self.outputs).collect();
        for (i, a) in all.iter().enumerate() {
            if all[i + 1..].contains(a) {
                return Err(Error::InvalidInput(format!("path {} is used twice", a.display())));
            }
        }
        if let Some((name, _)) = self.counts.iter().find(|(_, v)| *v <= 0) {
            return Err(Error::InvalidInput(format!("--{name} must be positive")));
        }
        if let Some((name, _)) = self.reals.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("--{name} must be positive")));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

fn report_error(kind: &str, message: String, exit_code: i32) -> i32 {
    let record = ErrorRecord {
        error: kind,
        message,
        exit_code,
    };
    eprintln!("{}", serde_json::to_string(&record).unwrap_or_default());
    exit_code
}

/// Runs one command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return report_error("Usage", e.to_string().trim().to_string(), 1);
        }
    };
    let config = JobConfig::from_cli(&cli);
    match config.validate().and_then(|_| execute(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            let code = if e.is_validation() { 1 } else { 2 };
            report_error(e.kind(), e.to_string(), code)
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn unitary_or_random(path: &Option<PathBuf>, d: usize, seed: u64) -> Result<ComplexMatrix> {
    match path {
        Some(p) => io::read_unitary(p),
        None => Ok(haar_unitary(d, &mut ChaCha8Rng::seed_from_u64(seed))),
    }
}

fn write_csv(dir: &Path, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(text, "{}", line.join(","));
    }
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn potential_rows(q: &Potential) -> Vec<Vec<f64>> {
    let n = q.intervals();
    q.samples()
        .iter()
        .enumerate()
        .map(|(i, m)| vec![-1.0 + 2.0 * i as f64 / n as f64, op_norm(m)])
        .collect()
}

fn execute(cli: &Cli) -> Result<()> {
    let plots = cli.emit_plots.as_deref();
    let solver = SolverOptions::default();
    match &cli.command {
        Command::Free { unitary, r, periods } => {
            let u = unitary_or_random(unitary, 2 * r, cli.seed)?;
            let fs = free_spectrum(&u, -periods, *periods)?;
            println!("m\tzeta\trank");
            for e in &fs.entries {
                println!("{}\t{:.17e}\t{}", e.index, e.zeta, e.projector.trace().re.round());
            }
            if let Some(dir) = plots {
                let rows: Vec<Vec<f64>> = fs.entries.iter().map(|e| vec![e.index as f64, e.zeta]).collect();
                write_csv(dir, "eigenvalues.csv", "index,lambda", &rows)?;
            }
        }
        Command::Forward {
            potential,
            unitary,
            window,
            pad,
            out,
        } => {
            let q = io::read_potential(potential)?;
            let u = unitary_or_random(unitary, 2 * q.r(), cli.seed)?;
            let w = forward_window(&u, *window, *pad)?;
            let a = forward_t(&q, &u, w, &solver)?;
            io::write_spectral_data(out, &a)?;
            if let Some(dir) = plots {
                let rows: Vec<Vec<f64>> = a.eigenvalues().iter().enumerate().map(|(j, l)| vec![j as f64, *l]).collect();
                write_csv(dir, "eigenvalues.csv", "index,lambda", &rows)?;
            }
        }
        Command::Inverse { data, out, numerics } => {
            let a = io::read_spectral_data(data)?;
            let rec = inverse_t(&a, &numerics.params())?;
            io::write_potential(&out.join("q.json"), &rec.q)?;
            io::write_unitary(&out.join("U.json"), &rec.u)?;
            io::write_json(&out.join("report.json"), &rec.report)?;
            if let Some(dir) = plots {
                write_csv(dir, "q_abs.csv", "x,abs_q", &potential_rows(&rec.q))?;
            }
        }
        Command::Check { data, numerics } => {
            let a = io::read_spectral_data(data)?;
            print_json(&check_conditions(&a, &numerics.params()))?;
        }
        Command::Roundtrip {
            potential,
            unitary,
            sweep,
            numerics,
        } => {
            let q = io::read_potential(potential)?;
            let u = unitary_or_random(unitary, 2 * q.r(), cli.seed)?;
            let params = numerics.params();
            let (metrics, rec) = roundtrip(&q, &u, &params)?;
            print_json(&metrics)?;
            if let Some(dir) = plots {
                // the reconstruction lives on the Krein grid; compare there
                let rows: Vec<Vec<f64>> = potential_rows(&rec.q)
                    .into_iter()
                    .map(|r| vec![r[0], op_norm(&q.eval(r[0])), r[1]])
                    .collect();
                write_csv(dir, "q_abs.csv", "x,abs_q,abs_q_rec", &rows)?;
                let mut table = vec![vec![params.big_m as f64, metrics.q_err_rel_l2, metrics.u_err_opnorm]];
                for &m in sweep.iter().filter(|&&m| m != params.big_m) {
                    let (mm, _) = roundtrip(&q, &u, &PipelineParams { big_m: m, ..params.clone() })?;
                    table.push(vec![m as f64, mm.q_err_rel_l2, mm.u_err_opnorm]);
                }
                table.sort_by(|a, b| a[0].total_cmp(&b[0]));
                write_csv(dir, "error_vs_m.csv", "M,q_err_rel_l2,u_err_opnorm", &table)?;
            }
        }
        Command::Accelerant {
            data,
            unitary,
            out,
            numerics,
        } => {
            let a = io::read_spectral_data(data)?;
            let u = match unitary {
                Some(p) => io::read_unitary(p)?,
                None => estimate_u(&a, numerics.k)?.u,
            };
            let h = accelerant_from_measure(&a, &u, numerics.n, numerics.big_m, &AccelerantOptions::default())?;
            io::write_accelerant(out, &h)?;
        }
        Command::Krein { accelerant, n, out } => {
            let h = io::read_accelerant(accelerant)?;
            io::write_s_potential(out, &theta(&h, *n)?)?;
        }
        Command::SignCheck { r } => {
            let sign = resolve_sign_convention(*r)?;
            #[derive(Serialize)]
            struct Sign {
                sigma: i8,
                evidence: Vec<(i8, f64)>,
            }
            print_json(&Sign {
                sigma: sign.sigma,
                evidence: sign.evidence,
            })?;
        }
    }
    Ok(())
}
