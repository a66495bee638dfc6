//! Command-line front end.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coil::LoadCondition;
use crate::error::{Error, Result};
use crate::experiments::{self, Table};
use crate::matchnet::{SwitchConfig, Technology};
use crate::models::Models;
use crate::netcore::Frequency;
use crate::pneumo::{parse_script, standard_script, BounceConfig};
use crate::scenario::{Band, Dimension, Quantity, Scenario};

#[derive(Debug, Parser)]
#[command(name = "airmatch", version, about = "Switched capacitor-array matching network simulator")]
pub struct Cli {
    /// Scenario file, or `paper-default` for the bundled one.
    #[arg(long, global = true, default_value = "paper-default")]
    pub scenario: PathBuf,
    /// Directory for `<command>.csv` outputs; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S11 sweep of one configuration.
    Sweep {
        #[command(flatten)]
        band: BandArgs,
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long, value_enum, default_value_t = Tech::Aero)]
        technology: Tech,
        /// Switch pattern as four bits, c4 first.
        #[arg(long)]
        config: Option<SwitchConfig>,
    },
    /// Reflection points of all configurations with frozen trimmers.
    Smith {
        #[arg(long, value_enum)]
        technology: Option<Tech>,
        #[arg(long, value_parser = parse_frequency)]
        target_freq: Option<Frequency>,
    },
    /// Trimmer search over every configuration.
    Tune {
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long, value_enum, default_value_t = Tech::Aero)]
        technology: Tech,
        #[arg(long, value_parser = parse_frequency)]
        target_freq: Option<Frequency>,
    },
    /// Transmission of the bare switch boards.
    Array {
        #[command(flatten)]
        band: BandArgs,
        #[arg(long)]
        config: Option<SwitchConfig>,
    },
    /// Air control timing on a script.
    Pneumo {
        /// CSV of `time_s,channel,state`; the standard close/open script
        /// on channel 0 when omitted.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        overpressure: bool,
    },
    /// Thermal calibration and relative SNR.
    Thermal,
    /// Loaded and unloaded Q for every configuration and technology.
    Qtable {
        #[arg(long, value_parser = parse_frequency)]
        target_freq: Option<Frequency>,
    },
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[arg(long, value_parser = parse_frequency)]
    pub from: Option<Frequency>,
    #[arg(long, value_parser = parse_frequency)]
    pub to: Option<Frequency>,
    #[arg(long)]
    pub points: Option<usize>,
}

impl BandArgs {
    fn resolve(&self, default: Band) -> Result<Band> {
        let b = Band {
            from: self.from.unwrap_or(default.from),
            to: self.to.unwrap_or(default.to),
            points: self.points.unwrap_or(default.points),
        };
        if b.from.hz() >= b.to.hz() {
            return Err(Error::invalid("--from must lie below --to"));
        }
        if b.points < 3 {
            return Err(Error::invalid("--points must be at least 3"));
        }
        Ok(b)
    }
}

#[derive(Debug, Args)]
pub struct LoadArgs {
    #[arg(long, conflicts_with = "unloaded")]
    pub loaded: bool,
    #[arg(long)]
    pub unloaded: bool,
}

impl LoadArgs {
    fn condition(&self) -> LoadCondition {
        if self.unloaded {
            LoadCondition::Unloaded
        } else {
            LoadCondition::Loaded
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tech {
    Aero,
    Pin,
    Standard,
}

impl From<Tech> for Technology {
    fn from(t: Tech) -> Self {
        match t {
            Tech::Aero => Technology::AeroSwitch,
            Tech::Pin => Technology::PinDiode,
            Tech::Standard => Technology::Standard,
        }
    }
}

/// Accepts `298MHz`, `298 MHz` or a bare value in hertz.
fn parse_frequency(text: &str) -> std::result::Result<Frequency, String> {
    let hz = Quantity::Text(text.to_string()).value("frequency", Dimension::Frequency).map_err(|e| e.to_string())?;
    Frequency::new(hz).map_err(|e| e.to_string())
}

/// One file of command output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub file_name: String,
    pub contents: String,
}

fn csv_output(file_stem: &str, command: &str, table: &Table, s: &Scenario) -> Result<Output> {
    Ok(Output { file_name: format!("{file_stem}.csv"), contents: table.to_csv(command, &s.hash)? })
}

/// Runs the command and returns its outputs without writing them.
pub fn execute(cli: &Cli) -> Result<Vec<Output>> {
    let s = Scenario::load(&cli.scenario)?;
    let needs_models = !matches!(cli.command, Command::Pneumo { .. });
    let m = if needs_models { Some(Models::fit(&s)?) } else { None };
    let models = || m.as_ref().expect("models fitted for this command");
    match &cli.command {
        Command::Sweep { band, load, technology, config } => {
            let config = config.unwrap_or(s.qtable.mid_config);
            let t = experiments::sweep_table(
                models(),
                (*technology).into(),
                load.condition(),
                config,
                band.resolve(s.sweep)?,
            )?;
            Ok(vec![csv_output("sweep", "sweep", &t, &s)?])
        }
        Command::Smith { technology, target_freq } => {
            let techs: Vec<Technology> = match technology {
                Some(t) => vec![(*t).into()],
                None => experiments::QTABLE_TECHNOLOGIES.to_vec(),
            };
            let pts = experiments::smith(&s, models(), &techs, *target_freq)?;
            Ok(vec![csv_output("smith", "smith", &experiments::smith_table(&pts), &s)?])
        }
        Command::Tune { load, technology, target_freq } => {
            let f = target_freq.unwrap_or(s.tuner.target);
            let r = experiments::tune(&s, models(), (*technology).into(), load.condition(), f)?;
            let mut stderr = std::io::stderr().lock();
            let _ = writeln!(
                stderr,
                "best config {} at {}: c_m = {:.4} pF, c_t = {:.4} pF, |S11| = {:.3} dB ({} evaluations)",
                r.best_config,
                f,
                r.c_m * 1e12,
                r.c_t * 1e12,
                r.s11_db_at_target,
                r.evaluations
            );
            Ok(vec![csv_output("tune", "tune", &experiments::tune_table(&r), &s)?])
        }
        Command::Array { band, config } => {
            let configs: Vec<SwitchConfig> = match config {
                Some(c) => vec![*c],
                None => SwitchConfig::all().collect(),
            };
            let t = experiments::array_table(&s, models(), &configs, band.resolve(s.sweep)?)?;
            Ok(vec![csv_output("array", "array", &t, &s)?])
        }
        Command::Pneumo { script, seed, overpressure } => {
            let edges = match script {
                Some(p) => parse_script(&read(p)?)?,
                None => standard_script(0),
            };
            let bounce = BounceConfig {
                overpressure: *overpressure || s.pneumo.overpressure,
                seed: seed.unwrap_or(s.pneumo.bounce_seed),
            };
            let out = experiments::pneumo(&s, &edges, bounce)?;
            Ok(vec![
                csv_output("pneumo", "pneumo", &out.timing_table(&s), &s)?,
                csv_output("pneumo_trace", "pneumo", &out.trace, &s)?,
            ])
        }
        Command::Thermal => {
            let cal = experiments::thermal(&s, models())?;
            Ok(vec![
                csv_output("thermal", "thermal", &experiments::thermal_table(&s, &cal), &s)?,
                csv_output("thermal_snr", "thermal", &experiments::snr_table(&s, models())?, &s)?,
            ])
        }
        Command::Qtable { target_freq } => {
            let q = experiments::qtable(&s, models(), *target_freq)?;
            Ok(vec![csv_output("qtable", "qtable", &q.table(), &s)?])
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes outputs into `dir`, or the first output to stdout when no
/// directory is given (the pneumatic trace is only written to files).
pub fn emit(outputs: &[Output], dir: Option<&Path>) -> Result<()> {
    let io = |path: &Path, e: std::io::Error| Error::Io { path: path.to_path_buf(), message: e.to_string() };
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            for o in outputs {
                let p = dir.join(&o.file_name);
                std::fs::write(&p, &o.contents).map_err(|e| io(&p, e))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for o in outputs.iter().filter(|o| o.file_name != "pneumo_trace.csv") {
                match stdout.write_all(o.contents.as_bytes()) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
                    r => r.map_err(|e| io(Path::new("<stdout>"), e))?,
                }
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli).and_then(|o| emit(&o, cli.out.as_deref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("airmatch: {e}");
            1
        }
    }
}
