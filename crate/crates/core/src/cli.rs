//! Command-line front end.
//!
//! Exit status follows the SAT-competition convention: 10 for SAT, 20 for
//! UNSAT, 1 for any error (including a failed cross-check).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use crate::formula::parse_dimacs;
use crate::pipeline::{run, DenseCheck, OracleCheck, PipelineOptions, PipelineOutcome, VerdictLabel};
use crate::simulator::{DEFAULT_BRANCH_CAP, DEFAULT_QUBIT_CAP, DEFAULT_THETA};
use crate::Error;

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "qsat",
    version,
    about = "Decide CNF satisfiability by simulating a reversible SAT circuit"
)]
pub struct Args {
    /// DIMACS CNF file; `-` or omitted reads stdin.
    pub input: Option<PathBuf>,

    /// Phase θ of V_θ, in radians.
    #[arg(long, default_value_t = DEFAULT_THETA, allow_negative_numbers = true)]
    pub theta: f64,

    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,

    /// Write the compiled circuit to this path.
    #[arg(long, value_name = "PATH")]
    pub emit_circuit: Option<PathBuf>,

    /// Skip the brute-force model count cross-check.
    #[arg(long)]
    pub no_oracle: bool,

    /// Cross-check against the dense simulator (registers of at most 22 qubits).
    #[arg(long)]
    pub dense_check: bool,

    /// Refuse formulas with more variables than this.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    pub max_vars: usize,

    /// Refuse registers wider than this.
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    pub max_qubits: usize,

    /// Also report V_θ applied literally, without renormalisation.
    #[arg(long)]
    pub literal_v_theta: bool,

    /// List every branch of the final state (text mode only).
    #[arg(long)]
    pub show_state: bool,
}

impl Args {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            theta: self.theta,
            max_vars: self.max_vars,
            qubit_cap: self.max_qubits,
            oracle: !self.no_oracle,
            dense_check: self.dense_check,
            literal_v_theta: self.literal_v_theta,
        }
    }
}

/// Run the CLI; returns the process exit status.
pub fn main_with<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match Args::try_parse_from(&raw) {
        Ok(args) => args,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            if raw.iter().any(|a| a == "--json") {
                emit_json_error(stdout, &e.to_string(), None);
            } else {
                let _ = write!(stderr, "{e}");
            }
            return EXIT_ERROR;
        }
    };

    match execute(&args, stdin) {
        Ok(outcome) => {
            let report = &outcome.report;
            if args.json {
                let _ = writeln!(
                    stdout,
                    "{}",
                    serde_json::to_string_pretty(report).expect("report serializes")
                );
            } else {
                let _ = write!(stdout, "{}", render_text(&outcome, args.show_state));
            }
            if !report.checks_pass() {
                let _ = writeln!(stderr, "error: cross-check disagreement");
                return EXIT_ERROR;
            }
            match report.verdict {
                VerdictLabel::Sat => EXIT_SAT,
                VerdictLabel::Unsat => EXIT_UNSAT,
            }
        }
        Err(e) => {
            if args.json {
                let line = match &e {
                    Error::Parse(p) => p.line(),
                    _ => None,
                };
                emit_json_error(stdout, &e.to_string(), line);
            } else {
                let _ = writeln!(stderr, "error: {e}");
            }
            EXIT_ERROR
        }
    }
}

fn execute(args: &Args, stdin: &mut dyn Read) -> Result<PipelineOutcome, Error> {
    let text = match &args.input {
        Some(path) if path.as_os_str() != "-" => {
            std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?
        }
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|source| Error::Io {
                path: "<stdin>".into(),
                source,
            })?;
            s
        }
    };
    let formula = parse_dimacs(&text)?;
    let outcome = run(&formula, &args.options())?;
    if let Some(path) = &args.emit_circuit {
        let mut text = outcome.circuit.serialize();
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(outcome)
}

fn emit_json_error(out: &mut dyn Write, message: &str, line: Option<usize>) {
    let value = json!({
        "verdict": "ERROR",
        "error": message.trim_end(),
        "line": line,
    });
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
}

fn render_text(outcome: &PipelineOutcome, show_state: bool) -> String {
    let r = &outcome.report;
    let c = &r.complexity;
    let mut s = String::new();
    let verdict = match r.verdict {
        VerdictLabel::Sat => "SAT",
        VerdictLabel::Unsat => "UNSAT",
    };
    let _ = writeln!(s, "verdict       {verdict}");
    let _ = writeln!(s, "model count   {}", r.model_count);
    let _ = writeln!(s, "beta^2        {:.12}", r.beta_squared);
    let _ = writeln!(s, "<E>           {:.12}", r.expectation_e);
    let _ = writeln!(
        s,
        "alpha, beta   {:.12}, {:.12}  (theta = {:.12})",
        r.alpha, r.beta, r.theta
    );
    let _ = writeln!(
        s,
        "qubits        n={} l={} result={} total={}",
        r.qubits.vars, r.qubits.dust, r.qubits.result, r.qubits.total
    );
    let _ = writeln!(s, "gates         {}", r.gate_count);
    let _ = writeln!(
        s,
        "complexity    N1={} N2={} N3={}  dust {} <= {}, gates {} <= {}: {}",
        c.n1_input_size,
        c.n2_dust_bound,
        c.n3_step_bound,
        c.actual_dust,
        c.n2_dust_bound,
        c.actual_gates,
        c.n3_step_bound,
        if c.within_bounds { "ok" } else { "EXCEEDED" }
    );
    if let Some(w) = &c.warning {
        let _ = writeln!(s, "warning       {w}");
    }
    match &r.oracle {
        OracleCheck::Checked { model_count, agrees } => {
            let _ = writeln!(
                s,
                "oracle        {model_count} ({})",
                if *agrees { "agrees" } else { "DISAGREES" }
            );
        }
        OracleCheck::Skipped { reason } => {
            let _ = writeln!(s, "oracle        skipped: {reason}");
        }
    }
    match &r.dense_check {
        Some(DenseCheck::Checked {
            max_deviation,
            agrees,
            ..
        }) => {
            let _ = writeln!(
                s,
                "dense check   max deviation {max_deviation:.3e} ({})",
                if *agrees { "agrees" } else { "DISAGREES" }
            );
        }
        Some(DenseCheck::Skipped { reason }) => {
            let _ = writeln!(s, "dense check   skipped: {reason}");
        }
        None => {}
    }
    if let Some(lit) = &r.literal_v_theta {
        let _ = writeln!(
            s,
            "literal V     ({:.6}{:+.6}i)|0> + ({:.6}{:+.6}i)|1>, norm^2 {:.6}",
            lit.zero.re, lit.zero.im, lit.one.re, lit.one.im, lit.norm_sqr
        );
    }
    let _ = writeln!(s, "wall time     {:.3} ms", r.wall_time_ms);
    if show_state {
        let st = &outcome.final_state;
        for i in 0..st.len() {
            let a = st.amplitude_at(i);
            let _ = writeln!(s, "  {:+.6}{:+.6}i |{}>", a.re, a.im, st.label(i));
        }
    }
    s
}
