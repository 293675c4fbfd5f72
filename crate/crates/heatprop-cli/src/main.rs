//! Command-line front end for the heat-kernel library.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, malformed
//! input), 2 on domain or numerical failures (past the validity horizon,
//! divergent data integrals, …). Every failure prints exactly one line
//! `error: <kind>: <detail>` on standard error.
//!
//! All numeric output uses fixed 12-significant-digit formatting (6 for the
//! single-point `kernel` query), so identical invocations produce
//! byte-identical output.

// Guards are written `!(x > 0.0)` rather than `x <= 0.0` so NaN fails
// validation instead of slipping past it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use heatprop::characteristic::solve_characteristic;
use heatprop::coeffs::{parse_source_expr, CoefficientSet};
use heatprop::grid::{GridField, GridSpec};
use heatprop::kernel::{heat_kernel, KernelEngine};
use heatprop::ode::OdeOptions;
use heatprop::presets::{Preset, PresetKind, ProblemSpec};
use heatprop::propagator::{duhamel_solve, InitialData, NumericParams, Propagator};
use heatprop::util::{env_thread_count, format_sig, linspace};
use heatprop::verify::pde_residual;
use heatprop::{Error, Result};

#[derive(Parser)]
#[command(
    name = "heatprop",
    version,
    about = "Exact heat kernels and initial-value solvers for \
             u_t = a(t)u_xx - b(t)x^2 u + c(t)x u_x + d(t)u + f(t)x u - g(t)u_x"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in coefficient models
    Presets(PresetsCmd),
    /// Tabulate the characteristic solution mu(t) and its derivative
    Mu(MuCmd),
    /// Print the six kernel exponent coefficients at a time t as JSON
    Coeffs(CoeffsCmd),
    /// Evaluate the heat kernel at a point or over an (x, y) grid
    Kernel(KernelCmd),
    /// Solve the homogeneous initial-value problem at time t
    Solve(SolveCmd),
    /// Solve the non-homogeneous problem with a source term F(s, x)
    Duhamel(DuhamelCmd),
    /// Run self-checks for a preset and report JSON residuals
    Verify(VerifyCmd),
}

/// Where the coefficients come from: a named preset or a JSON problem file.
#[derive(Args, Clone)]
struct ProblemArgs {
    /// Built-in model name (see `presets`)
    #[arg(long, conflicts_with = "problem")]
    preset: Option<String>,
    /// JSON file: {"preset": .., "params": ..?, "t0": ..?} or
    /// {"a": "..", .., "g": "..", "t0": ..?}
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Anchor time t0 (overrides the problem file)
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
}

impl ProblemArgs {
    fn build(&self) -> Result<(CoefficientSet, f64)> {
        let (cs, file_t0) = match (&self.preset, &self.problem) {
            (Some(name), None) => {
                let preset = Preset::by_name(name, &BTreeMap::new())?;
                (preset.into_coefficients(), 0.0)
            }
            (None, Some(path)) => {
                let text = read_file(path)?;
                ProblemSpec::from_json(&text)?.build()?
            }
            _ => {
                return Err(Error::InvalidParameter {
                    detail: "provide exactly one problem source: --preset or --problem".to_string(),
                })
            }
        };
        let t0 = self.t0.unwrap_or(file_t0);
        if !t0.is_finite() {
            return Err(Error::InvalidParameter {
                detail: format!("t0 must be finite, got {t0}"),
            });
        }
        Ok((cs, t0))
    }
}

#[derive(Args, Clone)]
struct NumericArgs {
    /// Tolerance for the characteristic ODE integration
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Tolerance for the kernel-coefficient and data quadratures
    #[arg(long, default_value_t = 1e-10)]
    qtol: f64,
}

impl NumericArgs {
    fn ode(&self) -> Result<OdeOptions> {
        if !(self.tol > 0.0) || !(self.qtol > 0.0) {
            return Err(Error::InvalidParameter {
                detail: "--tol and --qtol must be positive".to_string(),
            });
        }
        Ok(OdeOptions::with_tol(self.tol))
    }

    fn params(&self) -> NumericParams {
        NumericParams {
            tol: self.tol,
            qtol: self.qtol,
            ..NumericParams::default()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for tabular data
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct PresetsCmd {
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MuCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Final time of the tabulation (default t0 + 10)
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Number of equally spaced sample times including the endpoints
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CoeffsCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Evaluation time (must be greater than t0)
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Evaluation time (must be greater than t0)
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Single-point x (requires --y; prints one 6-digit value)
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Single-point y (requires --x)
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    xmin: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    xmax: f64,
    #[arg(long, default_value_t = 21)]
    nx: usize,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    ymin: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    ymax: f64,
    #[arg(long, default_value_t = 21)]
    ny: usize,
    /// Emit ln K instead of K
    #[arg(long)]
    log: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SolveCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Evaluation time (must be greater than t0)
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Initial data: constant:<v>, delta:<x0>, or file:<csv with x,u rows>
    #[arg(long)]
    data: String,
    /// Output points as min:max:n
    #[arg(long, default_value = "-2:2:81", allow_hyphen_values = true)]
    grid: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DuhamelCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Evaluation time (must be greater than t0)
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Source term F as an expression in s (time) and x
    #[arg(long, allow_hyphen_values = true)]
    source: String,
    /// Initial data: constant:<v>, delta:<x0>, or file:<csv with x,u rows>
    #[arg(long, default_value = "constant:0")]
    data: String,
    /// Number of time panels for the source integral
    #[arg(long, default_value_t = 16)]
    slices: usize,
    /// Output points as min:max:n
    #[arg(long, default_value = "-2:2:81", allow_hyphen_values = true)]
    grid: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyCmd {
    /// Built-in model name (see `presets`)
    #[arg(long)]
    preset: String,
    #[command(flatten)]
    numeric: NumericArgs,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: usage: {first}");
            std::process::exit(1);
        }
    };
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}: {}", err.kind(), err);
            std::process::exit(if err.is_usage() { 1 } else { 2 });
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Presets(cmd) => {
            let text = render_presets(cmd.output.format);
            write_output(cmd.output.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Mu(cmd) => {
            let text = run_mu(&cmd)?;
            write_output(cmd.output.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Coeffs(cmd) => {
            let text = run_coeffs(&cmd)?;
            write_output(cmd.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Kernel(cmd) => {
            let text = run_kernel(&cmd)?;
            write_output(cmd.output.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Solve(cmd) => {
            let text = run_solve(&cmd)?;
            write_output(cmd.output.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Duhamel(cmd) => {
            let text = run_duhamel(&cmd)?;
            write_output(cmd.output.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify(cmd) => {
            let (text, all_pass) = run_verify(&cmd)?;
            write_output(cmd.out.as_deref(), &text)?;
            Ok(if all_pass { 0 } else { 2 })
        }
    }
}

// ---------------------------------------------------------------- output

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter {
        detail: format!("cannot read {}: {e}", path.display()),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidParameter {
            detail: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sig12(v: f64) -> String {
    format_sig(v, 12)
}

/// Renders columns of equal length as CSV or as a JSON object of arrays,
/// with every number at 12 significant digits.
fn render_table(format: Format, columns: &[(&str, &[f64])]) -> String {
    match format {
        Format::Csv => {
            let mut text = String::new();
            let names: Vec<&str> = columns.iter().map(|&(n, _)| n).collect();
            text.push_str(&names.join(","));
            text.push('\n');
            let rows = columns.first().map_or(0, |&(_, c)| c.len());
            for i in 0..rows {
                let row: Vec<String> = columns.iter().map(|&(_, c)| sig12(c[i])).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text
        }
        Format::Json => {
            let fields: Vec<String> = columns
                .iter()
                .map(|&(name, col)| {
                    let vals: Vec<String> = col.iter().map(|&v| sig12(v)).collect();
                    format!("\"{name}\": [{}]", vals.join(", "))
                })
                .collect();
            format!("{{{}}}\n", fields.join(", "))
        }
    }
}

fn render_presets(format: Format) -> String {
    let mut text = String::new();
    match format {
        Format::Csv => {
            text.push_str("name,parameters,validity\n");
            for kind in PresetKind::all() {
                let params: Vec<String> = kind
                    .default_params()
                    .iter()
                    .map(|&(k, v)| format!("{k}={v}"))
                    .collect();
                let params = if params.is_empty() {
                    "-".to_string()
                } else {
                    params.join(" ")
                };
                text.push_str(&format!(
                    "{},{},{}\n",
                    kind.name(),
                    params,
                    kind.validity_note()
                ));
            }
        }
        Format::Json => {
            let items: Vec<String> = PresetKind::all()
                .iter()
                .map(|kind| {
                    let params: Vec<String> = kind
                        .default_params()
                        .iter()
                        .map(|&(k, v)| format!("\"{k}\": {v}"))
                        .collect();
                    format!(
                        "{{\"name\": \"{}\", \"parameters\": {{{}}}, \"validity\": \"{}\"}}",
                        kind.name(),
                        params.join(", "),
                        kind.validity_note()
                    )
                })
                .collect();
            text.push_str(&format!("[{}]\n", items.join(", ")));
        }
    }
    text
}

// ------------------------------------------------------------- commands

fn run_mu(cmd: &MuCmd) -> Result<String> {
    let (cs, t0) = cmd.problem.build()?;
    let opts = cmd.numeric.ode()?;
    let t_end = cmd.t_end.unwrap_or(t0 + 10.0);
    if !(t_end > t0) {
        return Err(Error::OutOfRange {
            t: t_end,
            lo: t0,
            hi: f64::INFINITY,
        });
    }
    if cmd.samples < 2 {
        return Err(Error::InvalidParameter {
            detail: format!("--samples must be at least 2, got {}", cmd.samples),
        });
    }
    let sol = solve_characteristic(&cs, t0, t_end, &opts)?;
    let ts = linspace(t0, t_end, cmd.samples);
    let mut mus = Vec::with_capacity(ts.len());
    let mut dmus = Vec::with_capacity(ts.len());
    for &t in &ts {
        let (m, dm) = sol.mu_dmu(t)?;
        mus.push(m);
        dmus.push(dm);
    }
    Ok(render_table(
        cmd.output.format,
        &[("t", &ts), ("mu", &mus), ("dmu", &dmus)],
    ))
}

fn run_coeffs(cmd: &CoeffsCmd) -> Result<String> {
    let (cs, t0) = cmd.problem.build()?;
    let hk = heat_kernel(&cs, t0, cmd.t, cmd.numeric.ode()?.tol, cmd.numeric.qtol)?;
    let c = hk.coefficients();
    Ok(format!(
        "{{\"t\": {}, \"t0\": {}, \"alpha\": {}, \"beta\": {}, \"gamma\": {}, \
         \"delta\": {}, \"epsilon\": {}, \"kappa\": {}}}\n",
        sig12(c.t),
        sig12(c.t0),
        sig12(c.alpha),
        sig12(c.beta),
        sig12(c.gamma),
        sig12(c.delta),
        sig12(c.epsilon),
        sig12(c.kappa),
    ))
}

fn run_kernel(cmd: &KernelCmd) -> Result<String> {
    let (cs, t0) = cmd.problem.build()?;
    let hk = heat_kernel(&cs, t0, cmd.t, cmd.numeric.ode()?.tol, cmd.numeric.qtol)?;
    match (cmd.x, cmd.y) {
        (Some(x), Some(y)) => {
            let v = if cmd.log {
                hk.log_eval(x, y)
            } else {
                hk.eval(x, y)?
            };
            Ok(format!("{}\n", format_sig(v, 6)))
        }
        (None, None) => {
            let xpts = GridSpec {
                x_min: cmd.xmin,
                x_max: cmd.xmax,
                n: cmd.nx,
            }
            .points()?;
            let ypts = GridSpec {
                x_min: cmd.ymin,
                x_max: cmd.ymax,
                n: cmd.ny,
            }
            .points()?;
            let mut xs = Vec::with_capacity(cmd.nx * cmd.ny);
            let mut ys = Vec::with_capacity(cmd.nx * cmd.ny);
            let mut ks = Vec::with_capacity(cmd.nx * cmd.ny);
            for &x in &xpts {
                for &y in &ypts {
                    xs.push(x);
                    ys.push(y);
                    ks.push(if cmd.log {
                        hk.log_eval(x, y)
                    } else {
                        hk.eval(x, y)?
                    });
                }
            }
            let value_name = if cmd.log { "log_k" } else { "k" };
            Ok(render_table(
                cmd.output.format,
                &[("x", &xs), ("y", &ys), (value_name, &ks)],
            ))
        }
        _ => Err(Error::InvalidParameter {
            detail: "point evaluation needs both --x and --y (omit both for a grid)".to_string(),
        }),
    }
}

/// Parses `--data constant:<v> | delta:<x0> | file:<path>`.
fn parse_data(spec: &str) -> Result<InitialData> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidParameter {
            detail: format!(
                "--data must be constant:<v>, delta:<x0>, or file:<path>, got '{spec}'"
            ),
        })?;
    match kind {
        "constant" => Ok(InitialData::Constant(parse_number(arg, "constant value")?)),
        "delta" => Ok(InitialData::Delta {
            x0: parse_number(arg, "delta location")?,
        }),
        "file" => Ok(InitialData::Grid(read_grid_csv(Path::new(arg))?)),
        other => Err(Error::InvalidParameter {
            detail: format!("unknown data variant '{other}' (use constant, delta, or file)"),
        }),
    }
}

fn parse_number(text: &str, what: &str) -> Result<f64> {
    let v: f64 = text.parse().map_err(|_| Error::InvalidParameter {
        detail: format!("{what} must be a number, got '{text}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter {
            detail: format!("{what} must be finite, got '{text}'"),
        });
    }
    Ok(v)
}

/// Reads `x,value` rows (header and `#` comment lines are skipped) into a
/// uniform grid field.
fn read_grid_csv(path: &Path) -> Result<GridField> {
    let text = read_file(path)?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let first = parts.next().unwrap_or("").trim();
        let x: f64 = match first.parse() {
            Ok(v) => v,
            Err(_) => continue, // header row
        };
        let second = parts.next().unwrap_or("").trim();
        let v: f64 = second.parse().map_err(|_| Error::InvalidParameter {
            detail: format!("bad data row '{line}' in {}", path.display()),
        })?;
        xs.push(x);
        vs.push(v);
    }
    GridField::new(xs, vs)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let gs: GridSpec = spec.parse()?;
    gs.points()
}

fn run_solve(cmd: &SolveCmd) -> Result<String> {
    let (cs, t0) = cmd.problem.build()?;
    let data = parse_data(&cmd.data)?;
    let xs = parse_grid(&cmd.grid)?;
    let hk = heat_kernel(&cs, t0, cmd.t, cmd.numeric.ode()?.tol, cmd.numeric.qtol)?;
    let prop = Propagator::new(hk, &cmd.numeric.params());
    let us = prop.apply_many(&data, &xs, env_thread_count())?;
    Ok(render_table(cmd.output.format, &[("x", &xs), ("u", &us)]))
}

fn run_duhamel(cmd: &DuhamelCmd) -> Result<String> {
    let (cs, t0) = cmd.problem.build()?;
    let data = parse_data(&cmd.data)?;
    let xs = parse_grid(&cmd.grid)?;
    let source = parse_source_expr(&cmd.source)?;
    let us = duhamel_solve(
        &cs,
        t0,
        &data,
        &source,
        &xs,
        cmd.t,
        cmd.slices,
        &cmd.numeric.params(),
        env_thread_count(),
    )?;
    Ok(render_table(cmd.output.format, &[("x", &xs), ("u", &us)]))
}

// --------------------------------------------------------------- verify

struct Check {
    name: &'static str,
    max_residual: f64,
    scale: f64,
    probe_count: usize,
    dx: f64,
    dt: f64,
    threshold: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.max_residual.is_finite() && self.max_residual <= self.threshold
    }

    fn render(&self) -> String {
        format!(
            "{{\"check\": \"{}\", \"max_residual\": {}, \"scale\": {}, \
             \"probe_count\": {}, \"dx\": {}, \"dt\": {}, \"threshold\": {}, \
             \"pass\": {}}}\n",
            self.name,
            sig12(self.max_residual),
            sig12(self.scale),
            self.probe_count,
            sig12(self.dx),
            sig12(self.dt),
            sig12(self.threshold),
            self.pass()
        )
    }
}

/// Self-checks for one preset: the analytic reference kernel and the
/// numerical pipeline kernel both satisfy the PDE by finite differences,
/// the characteristic solution satisfies its second-order equation, and μ
/// matches its closed form.
fn run_verify(cmd: &VerifyCmd) -> Result<(String, bool)> {
    let preset = Preset::by_name(&cmd.preset, &BTreeMap::new())?;
    let cs = preset.coefficients().clone();
    let opts = cmd.numeric.ode()?;
    let qtol = cmd.numeric.qtol;

    // All presets are regular on [0, 0.75] anchored at t0 = 0.
    let t_cover = 0.75;
    let sol = solve_characteristic(&cs, 0.0, t_cover, &opts)?;
    let engine = KernelEngine::new(&cs, sol, &opts)?;

    let mut probes = Vec::new();
    for &t in &[0.35, 0.65] {
        for &x in &[-0.8, 0.1, 0.9] {
            probes.push((t, x));
        }
    }
    let h = 1e-3;
    let y_probe = 0.3;

    let mut checks = Vec::new();

    let analytic = pde_residual(
        |t, x| {
            preset
                .analytic_log_kernel(x, y_probe, t)
                .map(f64::exp)
                .ok_or(Error::OutOfRange {
                    t,
                    lo: 0.0,
                    hi: t_cover,
                })
        },
        &cs,
        &probes,
        h,
    )?;
    checks.push(Check {
        name: "analytic_kernel_pde_residual",
        max_residual: analytic.max_residual,
        scale: analytic.scale,
        probe_count: analytic.probe_count,
        dx: analytic.dx,
        dt: analytic.dt,
        threshold: 1e-4,
    });

    let pipeline = pde_residual(
        |t, x| engine.kernel(t, qtol)?.eval(x, y_probe),
        &cs,
        &probes,
        h,
    )?;
    checks.push(Check {
        name: "pipeline_kernel_pde_residual",
        max_residual: pipeline.max_residual,
        scale: pipeline.scale,
        probe_count: pipeline.probe_count,
        dx: pipeline.dx,
        dt: pipeline.dt,
        threshold: (10.0 * analytic.max_residual).max(1e-4),
    });

    // Characteristic equation residual: centered differences of μ′ against
    // τμ′ + 4σμ.
    let sol = engine.solution();
    let hc = 1e-4;
    let ts = linspace(0.05, t_cover - 0.05, 9);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &t in &ts {
        let (_, dp) = sol.mu_dmu(t + hc)?;
        let (_, dm) = sol.mu_dmu(t - hc)?;
        let (m, d) = sol.mu_dmu(t)?;
        let (tau, sigma) = cs.tau_sigma(t)?;
        let fd = (dp - dm) / (2.0 * hc);
        let rhs = tau * d + 4.0 * sigma * m;
        worst = worst.max((fd - rhs).abs());
        scale = scale.max(fd.abs());
    }
    checks.push(Check {
        name: "characteristic_ode_residual",
        max_residual: worst / scale.max(1e-300),
        scale: scale.max(1e-300),
        probe_count: ts.len(),
        dx: 0.0,
        dt: hc,
        threshold: 1e-5,
    });

    if preset.analytic_mu(0.0, 0.5).is_some() {
        let ts = linspace(0.0, t_cover, 41);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for &t in &ts {
            let exact = preset.analytic_mu(0.0, t).expect("analytic mu");
            let got = sol.mu(t)?;
            worst = worst.max((got - exact).abs());
            scale = scale.max(exact.abs());
        }
        checks.push(Check {
            name: "analytic_mu_agreement",
            max_residual: worst / scale.max(1e-300),
            scale: scale.max(1e-300),
            probe_count: ts.len(),
            dx: 0.0,
            dt: 0.0,
            threshold: 1e-8,
        });
    }

    let mut text = String::new();
    let mut all_pass = true;
    for check in &checks {
        all_pass &= check.pass();
        text.push_str(&check.render());
    }
    Ok((text, all_pass))
}
