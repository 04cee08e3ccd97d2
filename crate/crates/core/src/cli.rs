//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fock::PSD_FLOOR;
use crate::measures::log_negativity;
use crate::optimize::{optimize_displacement, sweep, sweep_optimized, OptimizedRow, SweepGrid, SweepParam};
use crate::protocols::{run_realistic, LocalOp, ProtocolParams};
use crate::validate::{run_checks, DEFAULT_LAMBDA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PARAMS: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "photonsub", version, about = "Entanglement concentration by local photon subtraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the realistic protocol once.
    Run(ProtocolArgs),
    /// Evaluate the protocol over one or more parameter grids.
    Sweep(ProtocolArgs),
    /// Find the displacement α = −β that maximizes E_N.
    Optimize(ProtocolArgs),
    /// Run the built-in oracle checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ProtocolArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Tap reflectance R [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub reflectance: Option<f64>,
    /// Detector efficiency [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Channel loss per mode [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub squeezing: Option<f64>,
    /// Fock cutoff n_max [default: 10]
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// name:start:stop:step, repeatable
    #[arg(long = "grid", allow_hyphen_values = true)]
    pub grids: Vec<String>,
    #[arg(long)]
    pub optimize_alpha: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ValidateArgs {
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lambda: Option<f64>,
    reflectance: Option<f64>,
    eta: Option<f64>,
    nu: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    squeezing: Option<f64>,
    cutoff: Option<usize>,
    #[serde(default)]
    grid: Vec<String>,
    #[serde(default)]
    optimize_alpha: bool,
    output: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved and validated settings of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ProtocolParams,
    pub grids: Vec<SweepGrid>,
    pub optimize_alpha: bool,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(args: &ProtocolArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let grid_specs = if args.grids.is_empty() { &file.grid } else { &args.grids };
        let grids = grid_specs.iter().map(|g| g.parse()).collect::<Result<Vec<SweepGrid>>>()?;
        for (i, g) in grids.iter().enumerate() {
            if grids[..i].iter().any(|h| h.param == g.param) {
                return Err(Error::InvalidGrid(format!("{} swept twice", g.param)));
            }
        }
        let lambda_grid = grids.iter().find(|g| g.param == SweepParam::Lambda).map(|g| g.samples()[0]);
        let lambda = args
            .lambda
            .or(file.lambda)
            .or(lambda_grid)
            .ok_or_else(|| Error::Config("--lambda is required".into()))?;
        let mut params = ProtocolParams::new(lambda, args.reflectance.or(file.reflectance).unwrap_or(0.1))
            .with_eta(args.eta.or(file.eta).unwrap_or(1.0))
            .with_nu(args.nu.or(file.nu).unwrap_or(0.0))
            .with_cutoff(args.cutoff.or(file.cutoff).unwrap_or(ProtocolParams::DEFAULT_CUTOFF));
        let alpha = args.alpha.or(file.alpha);
        let beta = args.beta.or(file.beta);
        let squeezing = args.squeezing.or(file.squeezing);
        params.local_op = match (alpha, beta, squeezing) {
            (None, None, None) => LocalOp::None,
            (None, None, Some(s)) => LocalOp::Squeezing { s },
            (a, b, None) => LocalOp::displacement(a.unwrap_or(0.0), b.unwrap_or(0.0)),
            _ => return Err(Error::Config("displacement and squeezing are mutually exclusive".into())),
        };
        let config = RunConfig {
            params,
            grids,
            optimize_alpha: args.optimize_alpha || file.optimize_alpha,
            output: args.output.clone().or(file.output),
            format: args.format.or(file.format),
        };
        config.check()?;
        Ok(config)
    }

    /// Rejects invalid parameters before any computation. Swept parameters
    /// are checked per grid point by the sweep itself.
    fn check(&self) -> Result<()> {
        if self.grids.is_empty() {
            return self.params.validate();
        }
        // only the non-swept parameters must be valid on their own
        let swept = |name: &str| self.grids.iter().any(|g| g.param.name() == name);
        let p = &self.params;
        if !swept("reflectance") {
            crate::gaussian::BeamSplitterSpec::new(p.reflectance)?;
        }
        if !swept("eta") {
            crate::states::DetectorSpec::new(p.eta)?;
        }
        if !swept("nu") {
            crate::states::LossSpec::new(p.nu)?;
        }
        if !swept("lambda") {
            p.tmsv_spec()?;
        }
        if p.cutoff < ProtocolParams::MIN_CUTOFF {
            return Err(Error::Cutoff { got: p.cutoff, min: ProtocolParams::MIN_CUTOFF });
        }
        Ok(())
    }
}

fn local_op_json(op: LocalOp) -> Value {
    match op {
        LocalOp::None => json!({ "kind": "none" }),
        LocalOp::Displacement { alpha, beta } => json!({
            "kind": "displacement",
            "alpha_re": alpha.re, "alpha_im": alpha.im,
            "beta_re": beta.re, "beta_im": beta.im,
        }),
        LocalOp::Squeezing { s } => json!({ "kind": "squeezing", "s": s }),
    }
}

fn params_json(p: &ProtocolParams) -> Value {
    json!({
        "lambda": p.lambda,
        "reflectance": p.reflectance,
        "eta": p.eta,
        "nu": p.nu,
        "local_op": local_op_json(p.local_op),
        "cutoff": p.cutoff,
    })
}

/// Flat `(column, value)` pairs of the parameters, in flag order.
fn params_columns(p: &ProtocolParams) -> Vec<(&'static str, String)> {
    let mut cols = vec![
        ("lambda", num(p.lambda)),
        ("reflectance", num(p.reflectance)),
        ("eta", num(p.eta)),
        ("nu", num(p.nu)),
    ];
    let (alpha, beta, squeezing) = match p.local_op {
        LocalOp::None => (String::new(), String::new(), String::new()),
        LocalOp::Displacement { alpha, beta } => (num(alpha.re), num(beta.re), String::new()),
        LocalOp::Squeezing { s } => (String::new(), String::new(), num(s)),
    };
    cols.extend([("alpha", alpha), ("beta", beta), ("squeezing", squeezing), ("cutoff", p.cutoff.to_string())]);
    cols
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the payload to the output file plus a metadata sidecar, or to stdout.
fn emit(config: &RunConfig, command: &str, payload: Vec<u8>, rows: usize) -> Result<()> {
    match &config.output {
        Some(path) => {
            fs::write(path, &payload).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".meta.json");
            let meta = json!({
                "command": command,
                "version": env!("CARGO_PKG_VERSION"),
                "params": params_json(&config.params),
                "grids": config.grids.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "optimize_alpha": config.optimize_alpha,
                "rows": rows,
            });
            let sidecar = PathBuf::from(sidecar);
            fs::write(&sidecar, json_bytes(&meta)?).map_err(|e| Error::Io(format!("{}: {e}", sidecar.display())))
        }
        None => std::io::stdout().write_all(&payload).map_err(Error::from),
    }
}

fn cmd_run(config: &RunConfig) -> Result<()> {
    let p = &config.params;
    let out = run_realistic(p)?;
    let report = log_negativity(&out.rho_out_normalized)?;
    let deficit = p.tmsv_spec()?.truncation_deficit();
    let min_eig = out.rho_out_normalized.min_eigenvalue()?;
    let payload = match config.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&json!({
            "params": params_json(p),
            "log_negativity": report.log_negativity,
            "success_probability": out.success_probability,
            "trace_norm_pt": report.trace_norm_pt,
            "min_pt_eigenvalue": report.min_pt_eigenvalue,
            "truncation_deficit": deficit,
            "min_state_eigenvalue": min_eig,
            "psd_floor": PSD_FLOOR,
        }))?,
        Format::Csv => {
            let mut cols = params_columns(p);
            cols.extend([
                ("e_n", num(report.log_negativity)),
                ("p_succ", num(out.success_probability)),
                ("trace_norm_pt", num(report.trace_norm_pt)),
                ("min_pt_eigenvalue", num(report.min_pt_eigenvalue)),
                ("truncation_deficit", num(deficit)),
                ("min_state_eigenvalue", num(min_eig)),
            ]);
            let (header, row): (Vec<String>, Vec<String>) = cols.into_iter().map(|(k, v)| (k.to_string(), v)).unzip();
            csv_bytes(&header, &[row])?
        }
    };
    emit(config, "run", payload, 1)
}

fn cmd_sweep(config: &RunConfig) -> Result<()> {
    if config.grids.is_empty() {
        return Err(Error::Config("sweep needs at least one --grid".into()));
    }
    let names: Vec<String> = config.grids.iter().map(|g| g.param.to_string()).collect();
    let format = config.format.unwrap_or(Format::Csv);
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = if config.optimize_alpha {
        let rows = sweep_optimized(&config.params, &config.grids)?;
        let mut header = names.clone();
        header.extend(OptimizedRow::COLUMNS.iter().map(|s| s.to_string()));
        header.push("error".into());
        let rows = rows
            .iter()
            .map(|r| {
                let mut cells: Vec<String> = r.values.iter().map(|&v| num(v)).collect();
                cells.extend(r.columns().into_iter().map(opt));
                cells.push(r.error.clone().unwrap_or_default());
                cells
            })
            .collect();
        (header, rows)
    } else {
        let rows = sweep(&config.params, &config.grids)?;
        let mut header = names.clone();
        header.extend(["e_n", "p_succ", "error"].map(String::from));
        let rows = rows
            .iter()
            .map(|r| {
                let mut cells: Vec<String> = r.values.iter().map(|&v| num(v)).collect();
                cells.extend([opt(r.log_negativity), opt(r.success_probability), r.error.clone().unwrap_or_default()]);
                cells
            })
            .collect();
        (header, rows)
    };
    let count = rows.len();
    let payload = match format {
        Format::Csv => csv_bytes(&header, &rows)?,
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .map(|cells| {
                    let obj: Map<String, Value> = header
                        .iter()
                        .zip(cells)
                        .map(|(k, v)| {
                            let value = if v.is_empty() {
                                Value::Null
                            } else if k == "error" {
                                Value::String(v.clone())
                            } else {
                                v.parse::<f64>().map(|x| json!(x)).unwrap_or(Value::String(v.clone()))
                            };
                            (k.clone(), value)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            json_bytes(&Value::Array(records))?
        }
    };
    emit(config, "sweep", payload, count)
}

fn cmd_optimize(config: &RunConfig) -> Result<()> {
    let o = optimize_displacement(&config.params)?;
    let payload = match config.format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&json!({ "params": params_json(&config.params), "optimum": o }))?,
        Format::Csv => {
            let header = ["alpha_opt", "e_n_at_opt", "p_succ_at_opt", "iterations", "bracket_lo", "bracket_hi"]
                .map(String::from)
                .to_vec();
            let row = vec![
                num(o.alpha_opt),
                num(o.e_n_at_opt),
                num(o.p_succ_at_opt),
                o.iterations.to_string(),
                num(o.bracket.0),
                num(o.bracket.1),
            ];
            csv_bytes(&header, &[row])?
        }
    };
    emit(config, "optimize", payload, 1)
}

fn cmd_validate(args: &ValidateArgs) -> i32 {
    let checks = run_checks(args.cutoff.unwrap_or(ProtocolParams::DEFAULT_CUTOFF), args.lambda.unwrap_or(DEFAULT_LAMBDA));
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("all {} checks passed", checks.len());
        EXIT_OK
    } else {
        println!("{failed} of {} checks failed", checks.len());
        EXIT_VALIDATION
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_PARAMS,
    }
}

fn report(err: &Error) -> i32 {
    eprintln!("{}", json!({ "error": err.tag(), "message": err.to_string() }));
    exit_code(err)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMS } else { EXIT_OK };
        }
    };
    let (args, action): (&ProtocolArgs, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Validate(v) => return cmd_validate(v),
        Command::Run(a) => (a, cmd_run),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Optimize(a) => (a, cmd_optimize),
    };
    match RunConfig::resolve(args).and_then(|c| action(&c)) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e),
    }
}
