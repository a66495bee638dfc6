//! Bench experiments as deterministic tables: each command of the CLI is one
//! function here.

use std::fmt::Write as _;

use crate::coil::LoadCondition;
use crate::components::{SwitchKind, SwitchState};
use crate::error::{Error, Result};
use crate::matchnet::{
    array_s21, bank_capacitance_tenths, linear_grid, network_s11, s11_sweep, MatchNetworkSpec, SwitchConfig,
    Technology, SWEEP_COLUMNS,
};
use crate::models::Models;
use crate::netcore::{Complex, Frequency};
use crate::pneumo::{
    measure_timing, simulate, BounceConfig, ElectronicChannel, ScriptEdge, TimingParams, TimingReport,
};
use crate::qfactor::{find_resonance, q_from_s11_with};
use crate::scenario::{Band, Scenario};
use crate::thermo::{
    calibrate_thermal, celsius_to_kelvin, copper_resistance, relative_snr, EndpointTemperatures, IsolationAnchor,
    SnrInputs, ThermalCalibration, ThermalDrive,
};
use crate::tuner::{freeze_trimmers, tune_full, ConfigOptimum, TunerResult};

/// Rows of formatted cells under named columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text with a leading comment line naming the command and scenario.
    pub fn to_csv(&self, command: &str, scenario_hash: &str) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# airmatch {command} scenario_sha256={scenario_hash}").expect("string write");
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn tenths_label(t: i64) -> String {
    format!("{}.{}", t / 10, t % 10)
}

pub fn technology_label(t: Technology) -> &'static str {
    match t {
        Technology::AeroSwitch => "aeroswitch",
        Technology::PinDiode => "pin",
        Technology::Standard => "standard",
    }
}

/// Trimmers tuned once on the loaded mid configuration and then held.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenMatch {
    pub technology: Technology,
    pub f_match: Frequency,
    pub spec: MatchNetworkSpec,
    pub optimum: ConfigOptimum,
}

/// With no explicit frequency, matches where the nominal network's loaded
/// mid configuration resonates inside the Q band.
pub fn frozen_match(s: &Scenario, m: &Models, tech: Technology, f_match: Option<Frequency>) -> Result<FrozenMatch> {
    let mid = s.qtable.mid_config;
    let load = m.load(LoadCondition::Loaded);
    let f_match = match f_match {
        Some(f) => f,
        None => {
            let b = s.qtable.band;
            find_resonance(&s11_sweep(&m.spec(tech), mid, &load, b.from, b.to, b.points)?)?
        }
    };
    let problem = m.tuner_problem(s, tech, LoadCondition::Loaded, f_match);
    let (spec, optimum) = freeze_trimmers(&problem, mid)?;
    Ok(FrozenMatch { technology: tech, f_match, spec, optimum })
}

pub const QTABLE_TECHNOLOGIES: [Technology; 3] = [Technology::Standard, Technology::PinDiode, Technology::AeroSwitch];

#[derive(Debug, Clone, PartialEq)]
pub struct QRow {
    pub config: SwitchConfig,
    pub c_tenths: i64,
    /// Indexed like [`QTABLE_TECHNOLOGIES`], then unloaded and loaded.
    pub q: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub matches: [FrozenMatch; 3],
    pub rows: Vec<QRow>,
}

pub fn qtable(s: &Scenario, m: &Models, f_match: Option<Frequency>) -> Result<QTable> {
    let b = s.qtable.band;
    let mut matches = Vec::with_capacity(3);
    for tech in QTABLE_TECHNOLOGIES {
        matches.push(frozen_match(s, m, tech, f_match)?);
    }
    let matches: [FrozenMatch; 3] = matches.try_into().expect("three technologies");
    let nominal = m.spec(Technology::Standard);
    let mut rows = Vec::with_capacity(SwitchConfig::COUNT);
    for config in SwitchConfig::all() {
        let mut q = [[0.0; 2]; 3];
        for (k, fm) in matches.iter().enumerate() {
            for (j, cond) in LoadCondition::BOTH.into_iter().enumerate() {
                let sweep = s11_sweep(&fm.spec, config, &m.load(cond), b.from, b.to, b.points)?;
                q[k][j] = q_from_s11_with(&sweep, s.qtable.reference)?.q;
            }
        }
        rows.push(QRow { config, c_tenths: bank_capacitance_tenths(config, &nominal), q });
    }
    Ok(QTable { matches, rows })
}

impl QTable {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "config",
            "C_pF",
            "q_standard_unloaded",
            "q_standard_loaded",
            "q_pin_unloaded",
            "q_pin_loaded",
            "q_aero_unloaded",
            "q_aero_loaded",
        ]);
        for r in &self.rows {
            let mut row = vec![r.config.to_string(), tenths_label(r.c_tenths)];
            row.extend(r.q.iter().flatten().map(|q| format!("{q:.4}")));
            t.push(row);
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmithPoint {
    pub technology: Technology,
    pub condition: LoadCondition,
    pub config: SwitchConfig,
    pub c_tenths: i64,
    pub gamma: Complex,
}

/// Reflection at the match frequency for every configuration and load, with
/// trimmers frozen per technology.
pub fn smith(s: &Scenario, m: &Models, techs: &[Technology], f_match: Option<Frequency>) -> Result<Vec<SmithPoint>> {
    let nominal = m.spec(Technology::Standard);
    let mut out = Vec::new();
    for &tech in techs {
        let fm = frozen_match(s, m, tech, f_match)?;
        for condition in LoadCondition::BOTH {
            let load = m.load(condition);
            for config in SwitchConfig::all() {
                out.push(SmithPoint {
                    technology: tech,
                    condition,
                    config,
                    c_tenths: bank_capacitance_tenths(config, &nominal),
                    gamma: network_s11(&fm.spec, config, &load, fm.f_match)?,
                });
            }
        }
    }
    Ok(out)
}

pub fn smith_table(points: &[SmithPoint]) -> Table {
    let mut t = Table::new(&["technology", "condition", "config", "c_pF", "re_gamma", "im_gamma"]);
    for p in points {
        t.push(vec![
            technology_label(p.technology).into(),
            p.condition.label().into(),
            p.config.to_string(),
            tenths_label(p.c_tenths),
            format!("{:.9}", p.gamma.re),
            format!("{:.9}", p.gamma.im),
        ]);
    }
    t
}

/// Least-squares circle through the points (algebraic fit), as centre and
/// radius.
pub fn fit_circle(points: &[Complex]) -> Option<(Complex, f64)> {
    if points.len() < 3 {
        return None;
    }
    // x^2 + y^2 + D x + E y + F = 0, normal equations
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in points {
        let row = [p.re, p.im, 1.0];
        let z = -(p.re * p.re + p.im * p.im);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * z;
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut sol = [0.0; 3];
    for (k, s) in sol.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = rhs[i];
        }
        *s = det3(&m) / d;
    }
    let centre = Complex::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = centre.norm_sqr() - sol[2];
    (r2 > 0.0).then(|| (centre, r2.sqrt()))
}

/// True when the points, taken in the given order, advance in one direction
/// around their fitted circle.
pub fn arc_is_monotone(points: &[Complex]) -> bool {
    let Some((centre, _)) = fit_circle(points) else {
        return false;
    };
    let angles: Vec<f64> = points.iter().map(|p| (p - centre).arg()).collect();
    let steps: Vec<f64> = angles
        .windows(2)
        .map(|w| {
            let mut d = w[1] - w[0];
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            d
        })
        .collect();
    steps.iter().all(|&d| d > 0.0) || steps.iter().all(|&d| d < 0.0)
}

/// Largest distance between any two points.
pub fn cluster_diameter(points: &[Complex]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// Points of one trace ordered by bank capacitance.
pub fn trace(points: &[SmithPoint], tech: Technology, condition: LoadCondition) -> Vec<Complex> {
    let mut sel: Vec<&SmithPoint> =
        points.iter().filter(|p| p.technology == tech && p.condition == condition).collect();
    sel.sort_by_key(|p| p.c_tenths);
    sel.iter().map(|p| p.gamma).collect()
}

pub fn tune(
    s: &Scenario,
    m: &Models,
    tech: Technology,
    condition: LoadCondition,
    f_target: Frequency,
) -> Result<TunerResult> {
    tune_full(&m.tuner_problem(s, tech, condition, f_target))
}

pub fn tune_table(r: &TunerResult) -> Table {
    let mut t = Table::new(&["config", "c_m_pF", "c_t_pF", "s11_db"]);
    for c in &r.per_config_best {
        t.push(vec![
            c.config.to_string(),
            format!("{:.6}", c.c_m * 1e12),
            format!("{:.6}", c.c_t * 1e12),
            format!("{:.6}", c.s11_db),
        ]);
    }
    t
}

pub fn sweep_table(
    m: &Models,
    tech: Technology,
    condition: LoadCondition,
    config: SwitchConfig,
    band: Band,
) -> Result<Table> {
    let sweep = s11_sweep(&m.spec(tech), config, &m.load(condition), band.from, band.to, band.points)?;
    let mut t = Table::new(&SWEEP_COLUMNS);
    for (i, f) in sweep.frequencies.iter().enumerate() {
        let (g, z) = (sweep.s11[i], sweep.z_in[i]);
        t.push(vec![
            format!("{:.6}", f.hz()),
            format!("{:.12e}", g.re),
            format!("{:.12e}", g.im),
            format!("{:.9}", crate::netcore::magnitude_db(g)),
            format!("{:.12e}", z.re),
            format!("{:.12e}", z.im),
            config.to_string(),
        ]);
    }
    Ok(t)
}

/// Transmission of the bare switch boards for each configuration.
pub fn array_table(s: &Scenario, m: &Models, configs: &[SwitchConfig], band: Band) -> Result<Table> {
    let grid = linear_grid(band.from, band.to, band.points)?;
    let mut t = Table::new(&["technology", "config", "frequency_hz", "s21_db"]);
    for (kind, label) in [(SwitchKind::AeroSwitch, "aeroswitch"), (SwitchKind::PinDiode, "pin")] {
        let board = m.array_board(kind);
        for &config in configs {
            for &f in &grid {
                t.push(vec![
                    label.into(),
                    config.to_string(),
                    format!("{:.6}", f.hz()),
                    format!("{:.6}", array_s21(&board, config, f, s.z0)?),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn timing_params(s: &Scenario) -> Result<TimingParams> {
    let p = &s.pneumo;
    let mut t = TimingParams::calibrated(
        p.latency,
        p.switching_time,
        p.positive_setpoint,
        p.vacuum_limit,
        p.pressure_threshold,
        p.plunger_mass,
    )?;
    if let Some(tau) = p.fill_time_constant {
        t.fill_time_constant = tau;
        t.validate()?;
    }
    Ok(t)
}

pub fn pin_reference(s: &Scenario) -> ElectronicChannel {
    ElectronicChannel { driver_delay: s.pneumo.pin_driver_delay, time_constant: s.pneumo.pin_time_constant }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PneumoOutput {
    pub params: TimingParams,
    pub timing: TimingReport,
    pub pin_switching_time: f64,
    pub trace: Table,
}

pub fn pneumo(s: &Scenario, script: &[ScriptEdge], bounce: BounceConfig) -> Result<PneumoOutput> {
    let params = timing_params(s)?;
    let timing = measure_timing(script, params, s.pneumo.dt)?;
    let pin = pin_reference(s);
    let pin_switching_time = pin.switching_time()?;
    let until =
        script.iter().map(|e| e.time).fold(0.0, f64::max) + 10.0 * params.fill_time_constant + params.travel_time;
    let runs = simulate(script, params, s.pneumo.dt, bounce, until)?;
    let mut trace = Table::new(&["time_s", "channel", "pressure_mmHg", "position", "contact"]);
    for run in &runs {
        for r in &run.rows {
            trace.push(vec![
                format!("{:.6}", r.time),
                r.channel.to_string(),
                format!("{:.6}", r.pressure),
                format!("{:.6}", r.position),
                u8::from(r.contact).to_string(),
            ]);
        }
    }
    Ok(PneumoOutput { params, timing, pin_switching_time, trace })
}

impl PneumoOutput {
    pub fn timing_table(&self, s: &Scenario) -> Table {
        let mut t = Table::new(&["source", "channel", "edge_time_s", "direction", "latency_s", "switching_time_s"]);
        let dir = |closing: bool| if closing { "close" } else { "open" };
        for e in &self.timing.edges {
            t.push(vec![
                "pneumatic".into(),
                e.channel.to_string(),
                format!("{:.6}", e.edge_time),
                dir(e.closing).into(),
                format!("{:.9}", e.latency),
                format!("{:.9}", e.switching_time),
            ]);
        }
        for (closing, lat, sw) in
            [(true, self.timing.t_lr, self.timing.t_r), (false, self.timing.t_lf, self.timing.t_f)]
        {
            t.push(vec![
                "pneumatic-mean".into(),
                String::new(),
                String::new(),
                dir(closing).into(),
                format!("{lat:.9}"),
                format!("{sw:.9}"),
            ]);
        }
        t.push(vec![
            "pin-reference".into(),
            String::new(),
            String::new(),
            "close".into(),
            format!("{:.12}", s.pneumo.pin_driver_delay),
            format!("{:.12}", self.pin_switching_time),
        ]);
        t
    }
}

pub fn thermal(s: &Scenario, m: &Models) -> Result<ThermalCalibration> {
    let th = &s.thermal;
    let temps =
        EndpointTemperatures { aero_on: th.aero_on, aero_off: th.aero_off, pin_on: th.pin_on, pin_off: th.pin_off };
    let anchor = |sec: &crate::scenario::SwitchSection| IsolationAnchor {
        isolation_db: sec.isolation_db,
        frequency: sec.fit_frequency,
    };
    let drive = ThermalDrive { frequency: th.frequency, incident_power: th.incident_power, z0: s.z0 };
    calibrate_thermal(&temps, th.ambient, (&m.aero, anchor(&s.aeroswitch)), (&m.pin, anchor(&s.pin)), &drive)
}

pub fn thermal_table(s: &Scenario, cal: &ThermalCalibration) -> Table {
    let th = &s.thermal;
    let mut t = Table::new(&[
        "device",
        "state",
        "p_dissipated_W",
        "temperature_C",
        "measured_C",
        "residual_C",
        "theta_K_per_W",
        "r_off_ohm",
        "c_off_pF",
        "exact",
    ]);
    for (label, dev, on, off) in
        [("aeroswitch", &cal.aero, th.aero_on, th.aero_off), ("pin", &cal.pin, th.pin_on, th.pin_off)]
    {
        for (state, p, temp, measured, residual) in [
            (SwitchState::ON, dev.p_on, dev.t_on, on, dev.residual_on),
            (SwitchState::OFF, dev.p_off, dev.t_off, off, dev.residual_off),
        ] {
            t.push(vec![
                label.into(),
                state.label().into(),
                format!("{p:.6}"),
                format!("{temp:.4}"),
                format!("{measured:.4}"),
                format!("{residual:.4}"),
                format!("{:.6}", dev.theta),
                format!("{:.4}", dev.model.r_off()),
                format!("{:.6}", dev.model.c_off() * 1e12),
                dev.exact.to_string(),
            ]);
        }
    }
    t
}

/// Noise inputs for a coil switched by `device`, with the switch resistance
/// raised to its measured ON temperature.
pub fn snr_inputs(s: &Scenario, m: &Models, r_on: f64, t_on: f64) -> SnrInputs {
    let r_u = m.coil.resistance(LoadCondition::Unloaded);
    let r_l = m.coil.resistance(LoadCondition::Loaded);
    SnrInputs {
        b1: s.snr.b1,
        r_sample: r_l - r_u,
        t_sample: celsius_to_kelvin(s.snr.sample_temperature),
        r_coil: r_u + copper_resistance(r_on, s.thermal.ambient, t_on),
        t_coil: celsius_to_kelvin(t_on),
    }
}

pub fn snr_table(s: &Scenario, m: &Models) -> Result<Table> {
    let aero = snr_inputs(s, m, m.aero.r_on(), s.thermal.aero_on);
    let pin = snr_inputs(s, m, m.pin.r_on(), s.thermal.pin_on);
    let mut t = Table::new(&["quantity", "value"]);
    t.push(vec!["relative_snr_aero_over_pin".into(), format!("{:.6}", relative_snr(&aero, &pin)?)]);
    t.push(vec!["r_coil_aero_ohm".into(), format!("{:.6}", aero.r_coil)]);
    t.push(vec!["r_coil_pin_ohm".into(), format!("{:.6}", pin.r_coil)]);
    t.push(vec!["r_sample_ohm".into(), format!("{:.6}", aero.r_sample)]);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_fit_recovers_circle() {
        let c = Complex::new(0.2, -0.1);
        let pts: Vec<Complex> = (0..8).map(|k| c + Complex::from_polar(0.5, 0.3 * k as f64)).collect();
        let (centre, r) = fit_circle(&pts).unwrap();
        assert!((centre - c).norm() < 1e-12 && (r - 0.5).abs() < 1e-12);
        assert!(arc_is_monotone(&pts));
        let mut shuffled = pts.clone();
        shuffled.swap(2, 5);
        assert!(!arc_is_monotone(&shuffled));
        assert!((cluster_diameter(&pts) - (pts[0] - pts[7]).norm()).abs() < 1e-12);
    }

    #[test]
    fn csv_header_carries_hash() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv("cmd", "abc").unwrap(), "# airmatch cmd scenario_sha256=abc\na,b\n1,\"x,y\"\n");
    }
}
