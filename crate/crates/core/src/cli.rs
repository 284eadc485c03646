//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hill::{self, DEFAULT_HILL_TOL};
use crate::model::{uniform_grid, validate, MathieuParams, PeriodicBranch, DEFAULT_GRID_LEN};
use crate::monodromy::{self, IntegratorConfig};
use crate::study::{self, OutputFormat, PointSettings, Quantity, SweepConfig};
use crate::wkb::{self, PhaseMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mathieu-floquet",
    version,
    about = "Floquet exponents and periodic parts of the damped Mathieu equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Characteristic exponents by one or all methods.
    Exponents {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Hill determinant Delta(0), its series bounds and the implied exponents.
    Hill {
        #[command(flatten)]
        common: Common,
    },
    /// WKB predictions, phase integrals and error envelopes over one period.
    Wkb {
        #[command(flatten)]
        common: Common,
    },
    /// Numerical periodic parts next to their WKB predictions.
    Periodic {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = BranchArg::Max)]
        branch: BranchArg,
        #[arg(long, default_value_t = DEFAULT_GRID_LEN)]
        grid_len: usize,
    },
    /// Convergence sweep over m with a log-log rate fit.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = QuantityArg::ExponentMax)]
        quantity: QuantityArg,
        #[arg(long, allow_negative_numbers = true, default_value_t = study::DEFAULT_M_MIN)]
        m_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = study::DEFAULT_M_MAX)]
        m_max: f64,
        #[arg(long, default_value_t = study::DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_GRID_LEN)]
        grid_len: usize,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Mass (ignored by sweep).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    m: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    omega: f64,
    /// Machine-readable JSON output.
    #[arg(long)]
    json: bool,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = DEFAULT_HILL_TOL)]
    hill_tol: f64,
    /// Fixed-step implicit midpoint integration (lifts the stiffness guard).
    #[arg(long)]
    stiff: bool,
}

impl Common {
    fn params(&self) -> MathieuParams {
        MathieuParams { m: self.m, gamma: self.gamma, epsilon: self.epsilon, omega: self.omega }
    }

    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::default().with_rel_tol(self.rel_tol).with_stiff(self.stiff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Monodromy,
    Hill,
    Wkb,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantityArg {
    #[value(alias = "exponent_max")]
    ExponentMax,
    #[value(alias = "exponent_min")]
    ExponentMin,
    #[value(alias = "delta0_deficit")]
    Delta0,
    #[value(alias = "periodic_max")]
    PeriodicMax,
    #[value(alias = "periodic_min")]
    PeriodicMin,
    #[value(alias = "truncated_det")]
    TruncatedDet,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::ExponentMax => Quantity::ExponentMax,
            QuantityArg::ExponentMin => Quantity::ExponentMin,
            QuantityArg::Delta0 => Quantity::Delta0Deficit,
            QuantityArg::PeriodicMax => Quantity::PeriodicMax,
            QuantityArg::PeriodicMin => Quantity::PeriodicMin,
            QuantityArg::TruncatedDet => Quantity::TruncatedDet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let subcommand = argv.get(1).and_then(|s| s.to_str()).map(str::to_owned);
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = writeln!(err, "{}", e.render());
            let _ = write!(err, "{}", flag_table(subcommand.as_deref()));
            return EXIT_USAGE;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e @ (Error::InvalidParams(_) | Error::InvalidConfig(_))) => {
            let _ = writeln!(err, "error: {e}\n");
            let _ = write!(err, "{}", flag_table(subcommand.as_deref()));
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_COMPUTE
        }
    }
}

/// Help text of the named subcommand, or of the whole program.
fn flag_table(subcommand: Option<&str>) -> String {
    let mut command = Cli::command();
    command.build();
    match subcommand.and_then(|name| command.find_subcommand_mut(name)) {
        Some(sub) => sub.render_help().to_string(),
        None => command.render_help().to_string(),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Exponents { common, method } => exponents(common, *method, out),
        Command::Hill { common } => hill_command(common, out),
        Command::Wkb { common } => wkb_command(common, out),
        Command::Periodic { common, branch, grid_len } => periodic(common, *branch, *grid_len, out),
        Command::Sweep { common, quantity, m_min, m_max, points, grid_len, out: path, format } => {
            if !(*m_min > 0.0 && *m_max >= *m_min && m_max.is_finite()) || *points == 0 {
                return Err(Error::InvalidConfig(format!(
                    "need 0 < m_min <= m_max and points >= 1, got m_min = {m_min}, m_max = {m_max}, points = {points}"
                )));
            }
            let config = SweepConfig {
                base: common.params(),
                m_values: study::log_spaced(*m_min, *m_max, *points),
                quantity: (*quantity).into(),
                settings: PointSettings {
                    integrator: common.integrator(),
                    hill_tol: common.hill_tol,
                    grid_len: *grid_len,
                },
                out_format: match format {
                    FormatArg::Csv => OutputFormat::Csv,
                    FormatArg::Json => OutputFormat::Json,
                },
            };
            let report = study::sweep(&config)?;
            let text = study::render(&report, &config);
            match path {
                Some(path) => std::fs::write(path, text)?,
                None => emit(out, &text)?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn checked_params(common: &Common) -> Result<MathieuParams> {
    let params = common.params();
    let report = validate(&params);
    if !report.is_ok() {
        return Err(Error::InvalidParams(report.to_string()));
    }
    common.integrator().validate()?;
    if !(common.hill_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("hill_tol must be positive, got {}", common.hill_tol)));
    }
    Ok(params)
}

type Row = (&'static str, Result<(f64, f64)>);

fn exponents(common: &Common, method: MethodArg, out: &mut dyn Write) -> Result<i32> {
    let params = checked_params(common)?;
    let wanted = |m: MethodArg| method == MethodArg::All || method == m;
    let mut rows: Vec<Row> = Vec::new();
    if wanted(MethodArg::Monodromy) {
        let r = monodromy::floquet(&params, &common.integrator()).map(|f| (f.lambda_max, f.lambda_min));
        rows.push(("monodromy", r));
    }
    if wanted(MethodArg::Hill) {
        let r = hill::hill(&params, common.hill_tol).map(|h| (h.lambda_max_hill, h.lambda_min_hill));
        rows.push(("hill", r));
    }
    if wanted(MethodArg::Wkb) {
        rows.push(("wkb", Ok(wkb::wkb_exponents(&params))));
    }
    let ok: Vec<(&str, (f64, f64))> = rows.iter().filter_map(|(n, r)| r.as_ref().ok().map(|v| (*n, *v))).collect();
    let mut deltas = Vec::new();
    for i in 0..ok.len() {
        for j in i + 1..ok.len() {
            deltas.push((format!("{}-{}", ok[i].0, ok[j].0), ok[i].1 .0 - ok[j].1 .0, ok[i].1 .1 - ok[j].1 .1));
        }
    }
    let failed = rows.iter().any(|(_, r)| r.is_err());
    if common.json {
        let methods: serde_json::Map<String, serde_json::Value> = rows
            .iter()
            .map(|(name, r)| {
                let v = match r {
                    Ok((max, min)) => json!({ "lambda_max": max, "lambda_min": min }),
                    Err(e) => json!({ "error": e.to_string() }),
                };
                (name.to_string(), v)
            })
            .collect();
        let deltas: Vec<_> =
            deltas.iter().map(|(p, dmax, dmin)| json!({ "pair": p, "lambda_max": dmax, "lambda_min": dmin })).collect();
        let doc = json!({ "params": params, "methods": methods, "deltas": deltas });
        emit(out, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    } else {
        let mut text = format!("{:<16} {:>24} {:>24}\n", "method", "lambda_max", "lambda_min");
        for (name, r) in &rows {
            match r {
                Ok((max, min)) => text += &format!("{name:<16} {max:>24.16e} {min:>24.16e}\n"),
                Err(e) => text += &format!("{name:<16} error: {e}\n"),
            }
        }
        for (pair, dmax, dmin) in &deltas {
            text += &format!("{:<16} {dmax:>24.6e} {dmin:>24.6e}\n", format!("d {pair}"));
        }
        emit(out, &text)?;
    }
    Ok(if failed { EXIT_COMPUTE } else { EXIT_OK })
}

fn hill_command(common: &Common, out: &mut dyn Write) -> Result<i32> {
    let params = checked_params(common)?;
    let result = hill::hill(&params, common.hill_tol)?;
    let s = hill::series_s_bruteforce(&params, result.truncation_n);
    let bounds = hill::series_s_bounds(&params);
    let det3 = hill::det_truncated(&params, 1);
    if common.json {
        let doc = json!({
            "params": params,
            "result": result,
            "det_m3": det3,
            "series_s": s,
            "series_bounds": bounds,
        });
        emit(out, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    } else {
        let text = format!(
            "delta0          {:.16e}\ndeficit         {:.16e}\ntruncation_n    {}\nc               {:.16e}\n\
             lambda_max      {:.16e}\nlambda_min      {:.16e}\npath            {}\ndet_m3          {:.16e}\n\
             series_s        {:.16e}\nseries_lower    {:.16e}\nseries_upper    {:.16e}\n",
            result.delta0,
            result.deficit,
            result.truncation_n,
            result.c_exponent,
            result.lambda_max_hill,
            result.lambda_min_hill,
            result.path,
            det3,
            s,
            bounds.lower,
            bounds.upper,
        );
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}

fn wkb_command(common: &Common, out: &mut dyn Write) -> Result<i32> {
    let params = checked_params(common)?;
    let period = params.period();
    let (lambda_max, lambda_min) = wkb::wkb_exponents(&params);
    let quad = wkb::phase_integral(&params, period, PhaseMethod::Quadrature)?;
    let taylor = wkb::phase_integral(&params, period, PhaseMethod::Taylor)?;
    let envelope = wkb::olver_error_envelope(&params, period, period)?;
    if common.json {
        let doc = json!({
            "params": params,
            "lambda_max_pred": lambda_max,
            "lambda_min_pred": lambda_min,
            "phase_at_period": { "quadrature": quad, "taylor": taylor },
            "envelope_at_period": envelope,
        });
        emit(out, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    } else {
        let text = format!(
            "lambda_max_pred     {:.16e}\nlambda_min_pred     {:.16e}\nphase_quadrature    {:.16e}\n\
             phase_taylor        {:.16e}\nf1                  {:.16e}\neps_bound_1         {:.16e}\n\
             eps_bound_1_alt     {:.16e}\ndelta_bound         {:.16e}\n",
            lambda_max,
            lambda_min,
            quad,
            taylor,
            envelope.f1,
            envelope.eps_bound_1,
            envelope.eps_bound_1_alt,
            envelope.delta_bound,
        );
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}

fn periodic(common: &Common, branch: BranchArg, grid_len: usize, out: &mut dyn Write) -> Result<i32> {
    let params = checked_params(common)?;
    if grid_len < 2 {
        return Err(Error::InvalidConfig(format!("grid_len must be at least 2, got {grid_len}")));
    }
    let branch = match branch {
        BranchArg::Max => PeriodicBranch::Max,
        BranchArg::Min => PeriodicBranch::Min,
    };
    let cfg = common.integrator();
    let result = monodromy::floquet(&params, &cfg)?;
    let numeric = monodromy::periodic_part(&params, &result, branch, grid_len, &cfg)?;
    let predicted = if params.wkb_valid() {
        Some(wkb::wkb_periodic(&params, &uniform_grid(params.period(), grid_len), branch)?)
    } else {
        None
    };
    if common.json {
        let doc = json!({
            "params": params,
            "numeric": numeric,
            "predicted": predicted,
            "sup_distance": predicted.as_ref().map(|p| numeric.sup_distance(p)),
        });
        emit(out, &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    } else {
        let mut text = String::from("t,numeric,predicted\n");
        for (k, t) in numeric.grid.iter().enumerate() {
            let pred = predicted.as_ref().map_or_else(|| "nan".to_string(), |p| format!("{:e}", p.values[k]));
            text += &format!("{t:e},{:e},{pred}\n", numeric.values[k]);
        }
        if let Some(p) = &predicted {
            text += &format!("# sup_distance={:e}\n", numeric.sup_distance(p));
        }
        text += &format!("# normalization={:e}\n", numeric.normalization);
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("mathieu-floquet").chain(args.iter().copied());
        let code = run_cli_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn negative_mass_is_a_usage_error() {
        let (code, _, err) = run(&["exponents", "--m", "-1", "--gamma", "1", "--epsilon", "1", "--omega", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("m > 0"));
        assert!(err.contains("--rel-tol"));
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run(&["exponents", "--mass", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
    }

    #[test]
    fn all_methods_table() {
        let (code, out, _) = run(&["exponents", "--m", "0.1", "--method", "all"]);
        assert_eq!(code, EXIT_OK);
        for label in ["monodromy", "hill", "wkb", "d monodromy-hill", "d monodromy-wkb", "d hill-wkb"] {
            assert!(out.contains(label), "missing {label}");
        }
    }

    #[test]
    fn quantity_accepts_both_spellings() {
        assert!(Cli::try_parse_from(["x", "sweep", "--quantity", "exponent_max"]).is_ok());
        assert!(Cli::try_parse_from(["x", "sweep", "--quantity", "exponent-max"]).is_ok());
        assert!(Cli::try_parse_from(["x", "sweep", "--quantity", "delta0"]).is_ok());
    }
}
