//! Command-line surface: reproduce the built-in worked examples, run bound
//! reports on user-configured models, and emit the discharge-time sweep as
//! CSV.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::battery::{
    cavity_battery_report, harmonic_sweep, power_report, CavityBatteryParams,
    EffectiveDriveParams, HarmonicDischarge, SweepRow,
};
use crate::bounds::{bound_report, BoundReport};
use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::geometry::{bargmann_half_distance, curve_length, horizontal_lift, reference_section};
use crate::purification::{
    entangled_reference_section, lift_and_propagate, mixed_fluctuation, rqsl_time_mixed,
};
use crate::quantum::{
    pauli_x, pauli_z, propagate, DensityMatrix, HamiltonianModel, PureState,
};

pub const DEFAULT_N_STEPS: usize = 4096;

/// Horizon of the symmetric spin quench, `pi / (2 sqrt(2))`.
const SPIN_T: f64 = PI / (2.0 * SQRT_2);

#[derive(Debug, Parser)]
#[command(
    name = "qslb",
    about = "Geometric evolution-time and discharging-power bounds for driven quantum systems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recompute a built-in worked example and compare against its reference values
    Reproduce {
        #[arg(value_enum)]
        target: ReproduceTarget,
        /// Time-grid resolution override
        #[arg(long, default_value_t = DEFAULT_N_STEPS)]
        n_steps: usize,
    },
    /// Bound report for the model described by a config file
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Time-grid resolution override (wins over the config file)
        #[arg(long)]
        n_steps: Option<usize>,
    },
    /// Discharge-time sweep of the harmonic battery, written to a CSV file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (written atomically)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Time-grid resolution override (wins over the config file)
        #[arg(long)]
        n_steps: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTarget {
    SpinPure,
    SpinMixed,
    Jc,
    BatteryHarmonic,
    BatteryCavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

/// One comparison row of a `reproduce` run.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl CheckRow {
    fn new(name: impl Into<String>, computed: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            reference,
            tolerance,
        }
    }

    pub fn delta(&self) -> f64 {
        (self.computed - self.reference).abs()
    }

    pub fn passes(&self) -> bool {
        self.delta() <= self.tolerance
    }
}

/// The comparison rows of one reproduction target at the given resolution.
pub fn reproduce_rows(target: ReproduceTarget, n_steps: usize) -> Result<Vec<CheckRow>> {
    match target {
        ReproduceTarget::SpinPure => spin_pure_rows(n_steps),
        ReproduceTarget::SpinMixed => spin_mixed_rows(n_steps),
        ReproduceTarget::Jc => jc_rows(n_steps),
        ReproduceTarget::BatteryHarmonic => battery_harmonic_rows(n_steps),
        ReproduceTarget::BatteryCavity => battery_cavity_rows(n_steps),
    }
}

fn spin_quench_trajectory(n_steps: usize) -> Result<crate::quantum::Trajectory> {
    let model = HamiltonianModel::quench(pauli_z(), pauli_x(), 1.0)?;
    let initial = PureState::basis_state(2, 0)?;
    propagate(&model, &initial, SPIN_T, n_steps)
}

fn spin_pure_rows(n_steps: usize) -> Result<Vec<CheckRow>> {
    let traj = spin_quench_trajectory(n_steps)?;
    let lift = horizontal_lift(&traj)?;
    let section = reference_section(&traj)?;
    let report = bound_report(&traj)?;
    Ok(vec![
        CheckRow::new(
            "l(psi_bar)",
            curve_length(lift.times(), lift.states())?,
            1.1107,
            2e-3,
        ),
        CheckRow::new(
            "l(chi)",
            curve_length(section.times(), section.states())?,
            1.2526,
            2e-3,
        ),
        CheckRow::new("T_qsl", report.t_qsl, 0.7853, 1e-3),
        CheckRow::new("T_rqsl", report.t_rqsl, 1.2526, 2e-3),
    ])
}

fn spin_mixed_rows(n_steps: usize) -> Result<Vec<CheckRow>> {
    let rho0 = DensityMatrix::from_diagonal(&[1.0 / 3.0, 2.0 / 3.0])?;
    let model = HamiltonianModel::quench(pauli_z(), pauli_x(), 1.0)?;
    let ptraj = lift_and_propagate(&rho0, &model, SPIN_T, n_steps)?;
    let section = entangled_reference_section(&ptraj)?;
    Ok(vec![
        CheckRow::new(
            "Delta_H_S",
            mixed_fluctuation(&ptraj)?,
            17.0f64.sqrt() / 3.0,
            1e-6,
        ),
        CheckRow::new(
            "l(chi_SA)",
            curve_length(section.times(), section.states())?,
            2.2458,
            3e-3,
        ),
        CheckRow::new("T_rqsl", rqsl_time_mixed(&ptraj)?, 1.6341, 3e-3),
    ])
}

fn jc_rows(n_steps: usize) -> Result<Vec<CheckRow>> {
    let model = HamiltonianModel::jaynes_cummings_block(1.0, 1.0, 0, 1.0)?;
    let initial = PureState::basis_state(2, 1)?;
    let traj = propagate(&model, &initial, FRAC_PI_2, n_steps)?;
    let lift = horizontal_lift(&traj)?;
    let section = reference_section(&traj)?;
    let report = bound_report(&traj)?;
    Ok(vec![
        CheckRow::new(
            "l(chi)",
            curve_length(section.times(), section.states())?,
            FRAC_PI_2,
            1e-6,
        ),
        CheckRow::new(
            "l(psi_bar)",
            curve_length(lift.times(), lift.states())?,
            FRAC_PI_2,
            1e-6,
        ),
        CheckRow::new(
            "s0_half",
            bargmann_half_distance(traj.initial(), traj.final_state())?,
            FRAC_PI_2,
            1e-6,
        ),
        CheckRow::new(
            "saturation",
            (report.t_rqsl - report.t_qsl) / report.t_actual.max(1.0),
            0.0,
            1e-6,
        ),
    ])
}

fn battery_harmonic_rows(n_steps: usize) -> Result<Vec<CheckRow>> {
    // tuned case: zero detuning discharges along a geodesic
    let spec = HarmonicDischarge::new(EffectiveDriveParams {
        eps_bar: 0.0,
        a_bar: 1.0,
    });
    let t_final = FRAC_PI_2;
    let power = power_report(&spec, t_final, n_steps)?;
    let traj = crate::battery::harmonic_trajectory(&spec.drive, spec.hbar, t_final, n_steps)?;
    let report = bound_report(&traj)?;
    Ok(vec![
        CheckRow::new(
            "power_lower_gap",
            (power.p_avg - power.p_lower) / power.p_avg,
            0.0,
            1e-6,
        ),
        CheckRow::new(
            "power_upper_gap",
            (power.p_upper - power.p_avg) / power.p_avg,
            0.0,
            1e-6,
        ),
        CheckRow::new(
            "time_saturation",
            (report.t_rqsl - report.t_qsl) / report.t_actual.max(1.0),
            0.0,
            1e-6,
        ),
        CheckRow::new("work_released", power.work, 2.0, 1e-6),
    ])
}

fn battery_cavity_rows(n_steps: usize) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for n_photons in [0u32, 3] {
        let params = CavityBatteryParams {
            omega: 1.0,
            lambda: 1.0,
            n_photons,
            n_cells: 1,
            hbar: 1.0,
        };
        let window = params.discharge_window();
        for (label, t_final) in [("pi/8", FRAC_PI_8), ("pi/4", FRAC_PI_4), ("pi/2", FRAC_PI_2)] {
            if t_final > window * (1.0 + 1e-12) {
                continue; // outside this cell's discharge window
            }
            let report = cavity_battery_report(&params, t_final, n_steps)?;
            rows.push(CheckRow::new(
                format!("saturation n={n_photons} T={label}"),
                (report.t_rqsl - report.t_qsl) / report.t_actual.max(1.0),
                0.0,
                1e-6,
            ));
        }
    }
    Ok(rows)
}

fn target_name(target: ReproduceTarget) -> &'static str {
    match target {
        ReproduceTarget::SpinPure => "spin-pure",
        ReproduceTarget::SpinMixed => "spin-mixed",
        ReproduceTarget::Jc => "jc",
        ReproduceTarget::BatteryHarmonic => "battery-harmonic",
        ReproduceTarget::BatteryCavity => "battery-cavity",
    }
}

fn cmd_reproduce(target: ReproduceTarget, n_steps: usize, w: &mut dyn Write) -> Result<bool> {
    let rows = reproduce_rows(target, n_steps)?;
    writeln!(w, "{} reproduction (n_steps = {n_steps})", target_name(target))
        .map_err(io_error)?;
    writeln!(
        w,
        "  {:<26} {:>14} {:>14} {:>10} {:>8}  status",
        "quantity", "computed", "reference", "|delta|", "tol"
    )
    .map_err(io_error)?;
    let mut all_ok = true;
    for row in &rows {
        let ok = row.passes();
        all_ok &= ok;
        writeln!(
            w,
            "  {:<26} {:>14.8} {:>14.8} {:>10.2e} {:>8.0e}  {}",
            row.name,
            row.computed,
            row.reference,
            row.delta(),
            row.tolerance,
            if ok { "pass" } else { "FAIL" }
        )
        .map_err(io_error)?;
    }
    writeln!(
        w,
        "{}",
        if all_ok {
            "all quantities within tolerance"
        } else {
            "TOLERANCE FAILURE"
        }
    )
    .map_err(io_error)?;
    Ok(all_ok)
}

const BOUNDS_COMMON_KEYS: &[&str] = &["family", "hbar", "initial", "t_final", "n_steps", "format"];

fn parse_bounds_model(cfg: &ConfigFile) -> Result<HamiltonianModel> {
    let family = cfg.require("family")?;
    let hbar = match cfg.get("hbar") {
        Some(e) => e.as_f64()?,
        None => 1.0,
    };
    match family.as_str() {
        "constant" => {
            cfg.check_keys(&[BOUNDS_COMMON_KEYS, &["h0"]].concat())?;
            HamiltonianModel::constant(cfg.require("h0")?.as_matrix()?, hbar)
        }
        "quench" => {
            cfg.check_keys(&[BOUNDS_COMMON_KEYS, &["h_base", "h_kick"]].concat())?;
            HamiltonianModel::quench(
                cfg.require("h_base")?.as_matrix()?,
                cfg.require("h_kick")?.as_matrix()?,
                hbar,
            )
        }
        "rwa-drive" => {
            cfg.check_keys(&[BOUNDS_COMMON_KEYS, &["eps_bar", "a_bar"]].concat())?;
            HamiltonianModel::rwa_drive(
                cfg.require("eps_bar")?.as_f64()?,
                cfg.require("a_bar")?.as_f64()?,
                hbar,
            )
        }
        "jaynes-cummings" => {
            cfg.check_keys(&[BOUNDS_COMMON_KEYS, &["omega", "lambda", "n_photons"]].concat())?;
            HamiltonianModel::jaynes_cummings_block(
                cfg.require("omega")?.as_f64()?,
                cfg.require("lambda")?.as_f64()?,
                cfg.require("n_photons")?.as_u32()?,
                hbar,
            )
        }
        other => Err(Error::Config(format!(
            "line {}: unknown family `{other}` (expected constant | quench | rwa-drive | jaynes-cummings)",
            family.line
        ))),
    }
}

fn config_n_steps(cfg: &ConfigFile, flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match cfg.get("n_steps") {
        Some(e) => e.as_usize(),
        None => Ok(DEFAULT_N_STEPS),
    }
}

fn cmd_bounds(config: &Path, n_steps_flag: Option<usize>, w: &mut dyn Write) -> Result<bool> {
    let cfg = ConfigFile::load(config)?;
    let model = parse_bounds_model(&cfg)?;
    let initial = PureState::new(cfg.require("initial")?.as_vector()?)?;
    let t_final = cfg.require("t_final")?.as_f64()?;
    let n_steps = config_n_steps(&cfg, n_steps_flag)?;
    let format = match cfg.get("format") {
        Some(e) => match e.as_str() {
            "table" => OutputFormat::Table,
            "csv" => OutputFormat::Csv,
            other => {
                return Err(Error::Config(format!(
                    "line {}: unknown format `{other}` (expected table | csv)",
                    e.line
                )))
            }
        },
        None => OutputFormat::Table,
    };

    let traj = propagate(&model, &initial, t_final, n_steps)?;
    let report = bound_report(&traj)?;
    render_bound_report(&report, n_steps, format, w)?;
    Ok(true)
}

fn render_bound_report(
    report: &BoundReport,
    n_steps: usize,
    format: OutputFormat,
    w: &mut dyn Write,
) -> Result<()> {
    match format {
        OutputFormat::Table => {
            writeln!(w, "bound report (n_steps = {n_steps})").map_err(io_error)?;
            writeln!(w, "  t_qsl             {:>14.8}", report.t_qsl).map_err(io_error)?;
            writeln!(w, "  t_actual          {:>14.8}", report.t_actual).map_err(io_error)?;
            writeln!(w, "  t_rqsl            {:>14.8}", report.t_rqsl).map_err(io_error)?;
            writeln!(w, "  mean_fluctuation  {:>14.8}", report.mean_fluctuation)
                .map_err(io_error)?;
            writeln!(w, "  s0_half           {:>14.8}", report.s0_half).map_err(io_error)?;
            writeln!(w, "  l_reference       {:>14.8}", report.l_reference).map_err(io_error)?;
            writeln!(w, "  saturated         {:>14}", report.saturated).map_err(io_error)?;
        }
        OutputFormat::Csv => {
            writeln!(
                w,
                "t_qsl,t_actual,t_rqsl,mean_fluctuation,s0_half,l_reference,saturated"
            )
            .map_err(io_error)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                format_sig(report.t_qsl, 6),
                format_sig(report.t_actual, 6),
                format_sig(report.t_rqsl, 6),
                format_sig(report.mean_fluctuation, 6),
                format_sig(report.s0_half, 6),
                format_sig(report.l_reference, 6),
                report.saturated
            )
            .map_err(io_error)?;
        }
    }
    Ok(())
}

const SWEEP_KEYS: &[&str] = &[
    "target", "eps_bar", "a_bar", "hbar", "n_cells", "rows", "t_max", "n_steps",
];

fn cmd_sweep(
    config: &Path,
    out: &Path,
    format: OutputFormat,
    n_steps_flag: Option<usize>,
) -> Result<bool> {
    if format == OutputFormat::Table {
        return Err(Error::Config(
            "the sweep command only emits csv (use --format csv)".into(),
        ));
    }
    let cfg = ConfigFile::load(config)?;
    cfg.check_keys(SWEEP_KEYS)?;
    let target = cfg.require("target")?;
    if target.as_str() != "battery-harmonic" {
        return Err(Error::Config(format!(
            "line {}: sweep target must be `battery-harmonic`, got `{}`",
            target.line,
            target.as_str()
        )));
    }
    let hbar = match cfg.get("hbar") {
        Some(e) => e.as_f64()?,
        None => 1.0,
    };
    let drive = EffectiveDriveParams {
        eps_bar: match cfg.get("eps_bar") {
            Some(e) => e.as_f64()?,
            None => 2.0 * hbar,
        },
        a_bar: match cfg.get("a_bar") {
            Some(e) => e.as_f64()?,
            None => hbar,
        },
    };
    let n_cells = match cfg.get("n_cells") {
        Some(e) => e.as_u32()?,
        None => 100,
    };
    let rows = match cfg.get("rows") {
        Some(e) => e.as_usize()?,
        None => 100,
    };
    let t_max = match cfg.get("t_max") {
        Some(e) => e.as_f64()?,
        None => drive.full_discharge_horizon(hbar),
    };
    let n_steps = config_n_steps(&cfg, n_steps_flag)?;

    let table = harmonic_sweep(&drive, hbar, n_cells, t_max, rows, n_steps)?;
    write_sweep_csv(out, &table)?;
    Ok(true)
}

/// Render one sweep table as CSV text: exact header, LF endings, six
/// significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("T,T_qsl,T_actual,T_rqsl\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(row.t, 6),
            format_sig(row.t_qsl, 6),
            format_sig(row.t_actual, 6),
            format_sig(row.t_rqsl, 6)
        ));
    }
    out
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    // stage into a sibling temp file so a failure never leaves a partial CSV
    let tmp = path.with_file_name(format!(
        "{}.tmp{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sweep.csv".into()),
        std::process::id()
    ));
    std::fs::write(&tmp, sweep_csv(rows))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Config(format!("cannot move sweep output to {}: {e}", path.display()))
    })
}

/// Format with `sig` significant digits, printf `%g` style: plain decimal in
/// mid range, scientific outside, trailing zeros stripped.
pub fn format_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let formatted = format!("{:.*e}", sig - 1, x);
    let (mant, exp_str) = formatted.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp_str.parse().expect("exponent is an integer");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp < -4 || exp >= sig as i32 {
        let d = digits.trim_end_matches('0');
        let d = if d.is_empty() { "0" } else { d };
        if d.len() == 1 {
            format!("{d}e{exp}")
        } else {
            format!("{}.{}e{exp}", &d[..1], &d[1..])
        }
    } else if exp >= 0 {
        let point = (exp + 1) as usize;
        let frac = digits[point..].trim_end_matches('0');
        if frac.is_empty() {
            digits[..point].to_string()
        } else {
            format!("{}.{frac}", &digits[..point])
        }
    } else {
        let frac = format!("{}{}", "0".repeat((-exp - 1) as usize), digits);
        format!("0.{}", frac.trim_end_matches('0'))
    };
    if x < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::Config(format!("cannot write output: {e}"))
}

fn dispatch(cli: Cli, w: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Reproduce { target, n_steps } => cmd_reproduce(target, n_steps, w),
        Command::Bounds { config, n_steps } => cmd_bounds(&config, n_steps, w),
        Command::Sweep {
            config,
            out,
            format,
            n_steps,
        } => cmd_sweep(&config, &out, format, n_steps),
    }
}

/// Parse the process arguments, run the selected command, and map the
/// outcome to the exit-code contract: 0 success, 1 reproduction outside
/// tolerance, 2 config or numerics errors.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match dispatch(cli, &mut stdout.lock()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
