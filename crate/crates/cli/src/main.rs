//! `cghz` — run the logic Bell-state and C-GHZ analyzers, evaluate the loss
//! model and emit CSV/JSON data.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cghz_core::elements::BsConvention;
use cghz_core::fock::PhotonicState;
use cghz_core::measure::{QndModel, QndVariant, UNCLASSIFIED};
use cghz_core::protocols::loss::exponents;
use cghz_core::protocols::{
    canonical_circuit, make_cghz, make_labeled, make_logic_bell, monte_carlo_success, run_cghz_analysis, run_logic_bsa,
    run_protocol, success_probability_formula, sweep, Circuit, Counting, LogicBell, LogicStateLabel, MonteCarloParams,
    Protocol, ProtocolReport, RunStatus, Sign,
};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

/// Environment variable naming the directory for relative `--out` paths.
const OUT_DIR_ENV: &str = "CGHZ_OUT_DIR";

#[derive(Parser)]
#[command(name = "cghz", version, about = "Linear-optics logic Bell-state and C-GHZ state analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum QndArg {
    #[value(name = "one_bell")]
    OneBell,
    #[value(name = "two_bell")]
    TwoBell,
}

impl From<QndArg> for QndVariant {
    fn from(q: QndArg) -> Self {
        match q {
            QndArg::OneBell => QndVariant::OneBell,
            QndArg::TwoBell => QndVariant::TwoBell,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QndModelArg {
    Projection,
    /// Beam-splitter coincidence, real-reflection convention.
    InterferometerReal,
    /// Beam-splitter coincidence, imaginary-reflection convention.
    InterferometerImaginary,
}

impl From<QndModelArg> for QndModel {
    fn from(m: QndModelArg) -> Self {
        match m {
            QndModelArg::Projection => QndModel::Projection,
            QndModelArg::InterferometerReal => QndModel::Interferometer { convention: BsConvention::Real },
            QndModelArg::InterferometerImaginary => {
                QndModel::Interferometer { convention: BsConvention::ImaginaryReflection }
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CountingArg {
    Paper,
    Structural,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    LogicBsa,
    Cghz,
}

#[derive(Clone)]
enum InputSel {
    All,
    One(LogicBell),
}

fn parse_input(s: &str) -> Result<InputSel, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(InputSel::All);
    }
    s.parse::<LogicBell>().map(InputSel::One).map_err(|e| e.to_string())
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    s.parse::<Sign>().map_err(|e| e.to_string())
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

fn parse_group_size(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(format!("`{s}` is not an integer >= 2")),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("`{s}` is not a range like 2..8"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let hi: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end `{b}`"))?;
    if lo < 2 || hi < lo {
        return Err(format!("range {s} must satisfy 2 <= start <= end"));
    }
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Run the logic Bell-state analyzer.
    ///
    /// Detector labels: D(2j-1), D(2j) herald QND j (primed names mark the
    /// second success outcome of two_bell); the Bell analyzer on pair j uses
    /// D(2M+4j-3) … D(2M+4j) = first output H, first output V, second output
    /// H, second output V. For M=2: D1–D4 heralds, D5–D8 pair 1, D9–D12
    /// pair 2.
    AnalyzeBell {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
        #[arg(long, value_enum, default_value = "one_bell")]
        qnd: QndArg,
        #[arg(long, value_enum, default_value = "projection")]
        qnd_model: QndModelArg,
        /// Φ+, Φ-, Ψ+, Ψ- (or phi+, psi-, …) or all.
        #[arg(long, default_value = "all", value_parser = parse_input, allow_hyphen_values = true)]
        input: InputSel,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the C-GHZ analyzer on family member Φ_k^±.
    ///
    /// Paths and detectors of position group j carry the prefix `g{j}.`;
    /// `Q{k}a`, `Q{k}b` herald the QND on PBS k and `D(2i-1)`, `D(2i)` are
    /// the H and V detectors of analyzer photon i.
    AnalyzeCghz {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=26))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
        #[arg(long, default_value_t = 1)]
        index: u32,
        #[arg(long, default_value = "+", value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long, value_enum, default_value = "one_bell")]
        qnd: QndArg,
        #[arg(long, value_enum, default_value = "projection")]
        qnd_model: QndModelArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Evaluate the lossy success probability P_t.
    SuccessProb {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long, value_parser = parse_probability)]
        ps: f64,
        #[arg(long, value_parser = parse_probability)]
        pd: f64,
        #[arg(long, value_enum, default_value = "both")]
        counting: CountingArg,
    },
    /// Write P_t over a grid of N and M as CSV.
    Sweep {
        #[arg(long, default_value = "2,3,4", value_delimiter = ',', value_parser = parse_group_size)]
        n_list: Vec<usize>,
        #[arg(long, default_value = "2..8", value_parser = parse_range)]
        m_range: (usize, usize),
        #[arg(long, value_parser = parse_probability)]
        ps: f64,
        #[arg(long, value_parser = parse_probability)]
        pd: f64,
        /// Output file; relative paths resolve against $CGHZ_OUT_DIR when set.
        /// Writes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the lossy success probability.
    Montecarlo {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long, value_parser = parse_probability)]
        ps: f64,
        #[arg(long, value_parser = parse_probability)]
        pd: f64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "one_bell")]
        qnd: QndArg,
        #[arg(long, value_enum, default_value = "text")]
        format: TextFormat,
    },
    /// Print the circuit JSON of a protocol.
    Circuit {
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=26))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
        #[arg(long, value_enum, default_value = "one_bell")]
        qnd: QndArg,
    },
    /// Print an input state as JSON.
    State {
        /// Φ+, Ψ-, … for two logic qubits, or Φ<k>± (e.g. Φ1+) for C-GHZ.
        #[arg(long, allow_hyphen_values = true)]
        label: String,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=26))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        m: u64,
    },
    /// Run a circuit JSON file on a state JSON file.
    Replay {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<cghz_core::Error> for Failure {
    fn from(e: cghz_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ValueValidation, msg).exit(),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::AnalyzeBell { m, qnd, qnd_model, input, format } => {
            let labels = match input {
                InputSel::All => LogicBell::ALL.to_vec(),
                InputSel::One(l) => vec![l],
            };
            let m = m as usize;
            let mut reports = Vec::new();
            for l in labels {
                let circuit = canonical_circuit(Protocol::LogicBsa, 2, m, qnd.into())?.with_qnd_model(qnd_model.into());
                let state = make_logic_bell(l, m)?;
                let report = if matches!(qnd_model, QndModelArg::Projection) {
                    run_logic_bsa(&state, m, qnd.into())?
                } else {
                    run_protocol(&circuit, &state)?
                };
                reports.push(report);
            }
            emit_reports(&mut out, &reports, format)
        }
        Command::AnalyzeCghz { n, m, index, sign, qnd, qnd_model, format } => {
            let (n, m) = (n as usize, m as usize);
            let size = 1u32 << (n - 1);
            if index < 1 || index > size {
                return Err(Failure::Usage(format!("--index {index} is out of range 1..={size} for N={n}")));
            }
            let state = make_cghz(n, m, index, sign)?;
            let report = if matches!(qnd_model, QndModelArg::Projection) {
                run_cghz_analysis(&state, n, m, qnd.into())?
            } else {
                let circuit = canonical_circuit(Protocol::Cghz, n, m, qnd.into())?.with_qnd_model(qnd_model.into());
                run_protocol(&circuit, &state)?
            };
            emit_reports(&mut out, &[report], format)
        }
        Command::SuccessProb { m, n, ps, pd, counting } => {
            let (m, n) = (m as usize, n as usize);
            let which = match counting {
                CountingArg::Paper => vec![Counting::Paper],
                CountingArg::Structural => vec![Counting::Structural],
                CountingArg::Both => vec![Counting::Paper, Counting::Structural],
            };
            for c in which {
                let (es, ed) = exponents(m, n, c)?;
                let pt = success_probability_formula(m, n, ps, pd, c)?;
                writeln!(out, "{c}: P_t = p_s^{es} * p_d^{ed} = {pt:.8} ({pt:e})")?;
            }
            if matches!(counting, CountingArg::Paper | CountingArg::Both) {
                writeln!(
                    out,
                    "note: the published value P_t ≈ 0.00656 for M=N=2, p_s=0.1, p_d=0.9 is not reproduced by this \
                     formula (which gives 0.00430467 there); 0.00656 equals 0.1^2 * 0.9^4."
                )?;
            }
            Ok(())
        }
        Command::Sweep { n_list, m_range, ps, pd, out: path } => {
            let rows = sweep(&n_list, m_range.0..=m_range.1, ps, pd)?;
            match path {
                Some(p) => {
                    let p = resolve_out(&p);
                    let file = File::create(&p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                    write_sweep(file, &rows)
                }
                None => write_sweep(&mut out, &rows),
            }
        }
        Command::Montecarlo { m, n, ps, pd, shots, seed, qnd, format } => {
            let est = monte_carlo_success(MonteCarloParams {
                m: m as usize,
                n: n as usize,
                ps,
                pd,
                shots,
                seed,
                qnd: qnd.into(),
            })?;
            match format {
                TextFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&est)?)?,
                TextFormat::Text => {
                    writeln!(out, "shots: {shots}  seed: {seed}")?;
                    for (name, e, reference) in [
                        ("gated", est.gated, est.analytic_gated),
                        ("resource_only", est.resource_only, est.analytic_resource_only),
                    ] {
                        writeln!(
                            out,
                            "{name}: estimate {:.8}  se {:.8}  analytic {:.8}  z {:.3}",
                            e.mean,
                            e.standard_error,
                            reference,
                            e.z_score(reference)
                        )?;
                    }
                }
            }
            Ok(())
        }
        Command::Circuit { protocol, n, m, qnd } => {
            let protocol = match protocol {
                ProtocolArg::LogicBsa => Protocol::LogicBsa,
                ProtocolArg::Cghz => Protocol::Cghz,
            };
            let circuit = canonical_circuit(protocol, n as usize, m as usize, qnd.into())?;
            writeln!(out, "{}", circuit.to_json()?)?;
            Ok(())
        }
        Command::State { label, n, m } => {
            let label: LogicStateLabel = label.parse()?;
            let state = make_labeled(label, n as usize, m as usize)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&state)?)?;
            Ok(())
        }
        Command::Replay { circuit, input, format } => {
            let circuit_text =
                std::fs::read_to_string(&circuit).map_err(|e| Failure::Io(format!("{}: {e}", circuit.display())))?;
            let state_text =
                std::fs::read_to_string(&input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
            let circuit = Circuit::from_json(&circuit_text)?;
            let state = PhotonicState::from_json(&state_text)?;
            let report = run_protocol(&circuit, &state)?;
            emit_reports(&mut out, &[report], format)
        }
    }
}

fn resolve_out(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => Path::new(&dir).join(p),
        _ => p.to_path_buf(),
    }
}

fn write_sweep<W: Write>(w: W, rows: &[cghz_core::protocols::SweepRow]) -> CliResult {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn input_name(r: &ProtocolReport) -> String {
    r.input_label.map_or_else(|| "custom".to_string(), |l| l.to_string())
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Analyzed => "analyzed",
        RunStatus::RejectedByConstruction => "rejected_by_construction",
    }
}

fn emit_reports<W: Write>(out: &mut W, reports: &[ProtocolReport], format: Format) -> CliResult {
    match format {
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(reports)?)?;
            Ok(())
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(out);
            wtr.write_record([
                "input",
                "pattern",
                "conditional_probability",
                "classified_as",
                "success_probability",
                "heralds",
                "probability",
                "status",
                "post_selection_probability",
            ])?;
            for r in reports {
                let post = r.ledger.first().map_or(String::new(), |e| e.probability.to_string());
                let input = input_name(r);
                let success = r.success_probability.to_string();
                if r.branches.is_empty() {
                    wtr.write_record([
                        input.as_str(),
                        "",
                        "0",
                        "",
                        success.as_str(),
                        "",
                        "0",
                        status_name(r.status),
                        post.as_str(),
                    ])?;
                }
                for b in &r.branches {
                    let label = r.label_of(&b.pattern).map_or_else(|| UNCLASSIFIED.to_string(), |l| l.to_string());
                    wtr.write_record([
                        input.clone(),
                        r.analyzer_pattern(&b.pattern).to_string(),
                        r.conditional_probability(b).to_string(),
                        label,
                        success.clone(),
                        r.herald_pattern(&b.pattern).to_string(),
                        b.probability.to_string(),
                        status_name(r.status).to_string(),
                        post.clone(),
                    ])?;
                }
            }
            wtr.flush()?;
            Ok(())
        }
    }
}
