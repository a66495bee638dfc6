//! Air-control state machine and plunger timing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Plunger position at or above which the contacts close.
pub const CONTACT_POSITION: f64 = 0.98;

/// Largest accepted time step.
pub const MAX_DT: f64 = 1e-4;

pub const DEFAULT_DT: f64 = 10e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelInput {
    Neutral,
    Pressurize,
    Vacuum,
}

impl ChannelInput {
    pub fn code(self) -> char {
        match self {
            ChannelInput::Neutral => 'N',
            ChannelInput::Pressurize => 'P',
            ChannelInput::Vacuum => 'V',
        }
    }
}

impl FromStr for ChannelInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "neutral" => Ok(ChannelInput::Neutral),
            "p" | "pressurize" => Ok(ChannelInput::Pressurize),
            "v" | "vacuum" => Ok(ChannelInput::Vacuum),
            _ => Err(Error::invalid(format!("channel input must be N, P or V, got {:?}", s.trim()))),
        }
    }
}

impl fmt::Display for ChannelInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Suction,
}

/// One pump and its solenoid valve. Both share a trigger, so the valve
/// can only be open while the pump runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PumpValveUnit {
    pub pump_on: bool,
    pub valve_open: bool,
    pub polarity: Polarity,
}

impl PumpValveUnit {
    pub fn off(polarity: Polarity) -> Self {
        Self { pump_on: false, valve_open: false, polarity }
    }

    fn drive(&mut self, on: bool) {
        self.pump_on = on;
        self.valve_open = on;
    }
}

/// Requested (positive, suction) trigger states for an input.
pub fn drive_logic(input: ChannelInput) -> (bool, bool) {
    match input {
        ChannelInput::Neutral => (false, false),
        ChannelInput::Pressurize => (true, false),
        ChannelInput::Vacuum => (false, true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    /// Time constant of the tube pressure, seconds.
    pub fill_time_constant: f64,
    /// Pressure magnitude that starts the plunger moving, mmHg.
    pub pressure_threshold: f64,
    /// Full-stroke travel time, seconds.
    pub travel_time: f64,
    /// Positive pump setpoint, mmHg.
    pub positive_setpoint: f64,
    /// Vacuum magnitude, mmHg.
    pub vacuum_limit: f64,
    /// Kilograms; carried for reporting only.
    pub plunger_mass: f64,
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.fill_time_constant, "fill_time_constant"),
            (self.pressure_threshold, "pressure_threshold"),
            (self.travel_time, "travel_time"),
            (self.positive_setpoint, "positive_setpoint"),
            (self.vacuum_limit, "vacuum_limit"),
            (self.plunger_mass, "plunger_mass"),
        ];
        for (v, name) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.vacuum_limit > 420.0 {
            return Err(Error::invalid(format!(
                "vacuum limit {} mmHg exceeds the 420 mmHg pump capability",
                self.vacuum_limit
            )));
        }
        if self.pressure_threshold >= self.positive_setpoint.min(self.vacuum_limit) {
            return Err(Error::invalid("pressure threshold must lie below both pump setpoints"));
        }
        Ok(())
    }

    /// Chooses the time constant and travel time that give `latency` and a
    /// 10 to 90 % `switching_time` on a closing edge from rest.
    pub fn calibrated(
        latency: f64,
        switching_time: f64,
        positive_setpoint: f64,
        vacuum_limit: f64,
        pressure_threshold: f64,
        plunger_mass: f64,
    ) -> Result<Self> {
        let travel_time = switching_time / 0.8;
        let lag = (positive_setpoint / (positive_setpoint - pressure_threshold)).ln();
        let pneumatic = latency - CONTACT_POSITION * travel_time;
        if !(lag.is_finite() && lag > 0.0 && pneumatic > 0.0) {
            return Err(Error::invalid("latency is too short for the requested switching time"));
        }
        let p = Self {
            fill_time_constant: pneumatic / lag,
            pressure_threshold,
            travel_time,
            positive_setpoint,
            vacuum_limit,
            plunger_mass,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Contact chatter on closure, enabled only in overpressure operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BounceConfig {
    pub overpressure: bool,
    pub seed: u64,
}

/// One momentary contact opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceEvent {
    pub open_at: f64,
    pub close_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Motion {
    Still,
    Closing,
    Opening,
}

#[derive(Debug, Clone)]
pub struct PneumaticChannel {
    pub positive_unit: PumpValveUnit,
    pub suction_unit: PumpValveUnit,
    pub pressure: f64,
    pub plunger_position: f64,
    pub contact: bool,
    pub params: TimingParams,
    motion: Motion,
    steps: u64,
    dt: f64,
    bounce: BounceConfig,
    rng: ChaCha8Rng,
    bounce_trace: Vec<BounceEvent>,
    pending: Vec<BounceEvent>,
}

impl PneumaticChannel {
    pub fn new(params: TimingParams, dt: f64, bounce: BounceConfig) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::invalid(format!("time step must lie in (0, {MAX_DT}] s, got {dt}")));
        }
        Ok(Self {
            positive_unit: PumpValveUnit::off(Polarity::Positive),
            suction_unit: PumpValveUnit::off(Polarity::Suction),
            pressure: 0.0,
            plunger_position: 0.0,
            contact: false,
            params,
            motion: Motion::Still,
            steps: 0,
            dt,
            bounce,
            rng: ChaCha8Rng::seed_from_u64(bounce.seed),
            bounce_trace: Vec::new(),
            pending: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn bounce_trace(&self) -> &[BounceEvent] {
        &self.bounce_trace
    }

    /// Advances the channel by one time step under `input`.
    pub fn step(&mut self, input: ChannelInput) {
        let (want_pos, want_suc) = drive_logic(input);
        // a reversal spends one step with both units off
        let reversing = (want_pos && self.suction_unit.pump_on) || (want_suc && self.positive_unit.pump_on);
        if reversing {
            self.positive_unit.drive(false);
            self.suction_unit.drive(false);
        } else {
            self.positive_unit.drive(want_pos);
            self.suction_unit.drive(want_suc);
        }

        let p = &self.params;
        let setpoint = if self.positive_unit.valve_open {
            p.positive_setpoint
        } else if self.suction_unit.valve_open {
            -p.vacuum_limit
        } else {
            0.0
        };
        let alpha = 1.0 - (-self.dt / p.fill_time_constant).exp();
        self.pressure += (setpoint - self.pressure) * alpha;

        if self.pressure >= p.pressure_threshold {
            self.motion = Motion::Closing;
        } else if self.pressure <= -p.pressure_threshold {
            self.motion = Motion::Opening;
        }
        let rate = self.dt / p.travel_time;
        match self.motion {
            Motion::Closing => self.plunger_position = (self.plunger_position + rate).min(1.0),
            Motion::Opening => self.plunger_position = (self.plunger_position - rate).max(0.0),
            Motion::Still => {}
        }
        if matches!(self.motion, Motion::Closing) && self.plunger_position >= 1.0
            || matches!(self.motion, Motion::Opening) && self.plunger_position <= 0.0
        {
            self.motion = Motion::Still;
        }

        self.steps += 1;
        let t = self.time();
        let touching = self.plunger_position >= CONTACT_POSITION;
        if touching && !self.contact && self.pending.is_empty() && self.bounce.overpressure {
            self.schedule_bounce(t);
        }
        let chattering = self.pending.iter().any(|e| t >= e.open_at && t < e.close_at);
        self.pending.retain(|e| t < e.close_at);
        self.contact = touching && !chattering;
    }

    fn schedule_bounce(&mut self, closed_at: f64) {
        // every opening fits inside one switching-time window after closure
        let window = 0.8 * self.params.travel_time;
        let count = self.rng.random_range(1..=3usize);
        let slot = window / count as f64;
        for k in 0..count {
            let start = closed_at + k as f64 * slot + self.rng.random_range(0.1..0.4) * slot;
            let length = self.rng.random_range(0.1..0.45) * slot;
            let event = BounceEvent { open_at: start, close_at: start + length };
            self.pending.push(event);
            self.bounce_trace.push(event);
        }
    }
}

/// Whether the channel satisfies the interlock rules.
pub fn interlock_holds(ch: &PneumaticChannel) -> bool {
    let units = [ch.positive_unit, ch.suction_unit];
    !(units[0].pump_on && units[1].pump_on)
        && units.iter().all(|u| !u.valve_open || u.pump_on)
        && (!ch.contact || ch.plunger_position >= CONTACT_POSITION)
}

/// Input change for one channel at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptEdge {
    pub time: f64,
    pub channel: usize,
    pub input: ChannelInput,
}

/// Reads `time_s,channel,state` rows. A header line is optional.
pub fn parse_script(text: &str) -> Result<Vec<ScriptEdge>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut edges = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("script line {}: {e}", line + 1)))?;
        if rec.len() != 3 {
            return Err(Error::invalid(format!("script line {}: expected 3 fields", line + 1)));
        }
        if line == 0 && rec[0].parse::<f64>().is_err() {
            continue;
        }
        let time: f64 =
            rec[0].parse().map_err(|_| Error::invalid(format!("script line {}: bad time {:?}", line + 1, &rec[0])))?;
        let channel: usize = rec[1]
            .parse()
            .map_err(|_| Error::invalid(format!("script line {}: bad channel {:?}", line + 1, &rec[1])))?;
        edges.push(ScriptEdge { time, channel, input: rec[2].parse()? });
    }
    Ok(edges)
}

/// Neutral at rest, close on pressure, release, open on vacuum, release.
pub fn standard_script(channel: usize) -> Vec<ScriptEdge> {
    [
        (0.0, ChannelInput::Neutral),
        (0.010, ChannelInput::Pressurize),
        (0.250, ChannelInput::Neutral),
        (0.500, ChannelInput::Vacuum),
        (0.750, ChannelInput::Neutral),
    ]
    .into_iter()
    .map(|(time, input)| ScriptEdge { time, channel, input })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub channel: usize,
    pub pressure: f64,
    pub position: f64,
    pub contact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRun {
    pub channel: usize,
    pub rows: Vec<TraceRow>,
    pub bounce: Vec<BounceEvent>,
}

fn channel_edges(script: &[ScriptEdge], channel: usize) -> Result<Vec<ScriptEdge>> {
    let mut edges: Vec<ScriptEdge> = script.iter().copied().filter(|e| e.channel == channel).collect();
    for e in &edges {
        if !(e.time.is_finite() && e.time >= 0.0) {
            return Err(Error::invalid(format!("script time {} is not a non-negative number", e.time)));
        }
    }
    edges.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(edges)
}

/// Steps one channel through its part of `script` until `until` seconds.
pub fn run_channel(
    script: &[ScriptEdge],
    channel: usize,
    params: TimingParams,
    dt: f64,
    bounce: BounceConfig,
    until: f64,
) -> Result<ChannelRun> {
    let edges = channel_edges(script, channel)?;
    let mut ch = PneumaticChannel::new(params, dt, bounce)?;
    let steps = (until / dt).ceil() as u64;
    let mut rows = Vec::with_capacity(steps as usize);
    let mut input = ChannelInput::Neutral;
    let mut next = 0;
    for _ in 0..steps {
        // an edge at time t applies to the step that ends after t
        while next < edges.len() && edges[next].time <= ch.time() + 0.5 * dt {
            input = edges[next].input;
            next += 1;
        }
        ch.step(input);
        rows.push(TraceRow {
            time: ch.time(),
            channel,
            pressure: ch.pressure,
            position: ch.plunger_position,
            contact: ch.contact,
        });
    }
    Ok(ChannelRun { channel, rows, bounce: ch.bounce_trace().to_vec() })
}

/// Runs every channel named in `script`, in channel order.
pub fn simulate(
    script: &[ScriptEdge],
    params: TimingParams,
    dt: f64,
    bounce: BounceConfig,
    until: f64,
) -> Result<Vec<ChannelRun>> {
    let mut channels: Vec<usize> = script.iter().map(|e| e.channel).collect();
    channels.sort_unstable();
    channels.dedup();
    channels
        .into_iter()
        .map(|c| {
            let seeded = BounceConfig { seed: bounce.seed.wrapping_add(c as u64), ..bounce };
            run_channel(script, c, params, dt, seeded, until)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeTiming {
    pub channel: usize,
    pub edge_time: f64,
    pub closing: bool,
    pub latency: f64,
    pub switching_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub edges: Vec<EdgeTiming>,
    /// Mean latency of closing edges.
    pub t_lr: f64,
    /// Mean latency of opening edges.
    pub t_lf: f64,
    /// Mean 10 to 90 % time of closing edges.
    pub t_r: f64,
    /// Mean 90 to 10 % time of opening edges.
    pub t_f: f64,
}

fn crossing_time(rows: &[TraceRow], from: usize, pred: impl Fn(&TraceRow) -> bool) -> Option<(usize, f64)> {
    rows[from..].iter().position(pred).map(|k| (from + k, rows[from + k].time))
}

/// Latency and switching time for every actuating edge in `script`.
pub fn measure_timing(script: &[ScriptEdge], params: TimingParams, dt: f64) -> Result<TimingReport> {
    if script.is_empty() {
        return Err(Error::MeasurementInvalid("empty script".into()));
    }
    let settle = 10.0 * params.fill_time_constant + params.travel_time;
    let until = script.iter().map(|e| e.time).fold(0.0, f64::max) + settle;
    let runs = simulate(script, params, dt, BounceConfig::default(), until)?;
    let mut edges = Vec::new();
    for run in &runs {
        let script_edges = channel_edges(script, run.channel)?;
        let actuating: Vec<&ScriptEdge> = script_edges.iter().filter(|e| e.input != ChannelInput::Neutral).collect();
        for (n, e) in actuating.iter().enumerate() {
            let closing = e.input == ChannelInput::Pressurize;
            let start = run.rows.partition_point(|r| r.time < e.time);
            let contact_before = run.rows.get(start.saturating_sub(1)).is_some_and(|r| r.contact);
            if contact_before == closing {
                return Err(Error::MeasurementInvalid(format!(
                    "edge at {:.6} s on channel {} does not change the contact state",
                    e.time, run.channel
                )));
            }
            let change = crossing_time(&run.rows, start, |r| r.contact != contact_before);
            let (lo, hi) = if closing { (0.1, 0.9) } else { (0.9, 0.1) };
            let t10 = crossing_time(&run.rows, start, |r| if closing { r.position >= lo } else { r.position <= lo });
            let t90 = t10.and_then(|(k, _)| {
                crossing_time(&run.rows, k, |r| if closing { r.position >= hi } else { r.position <= hi })
            });
            let (Some((_, t_change)), Some((_, a)), Some((k90, b))) = (change, t10, t90) else {
                return Err(Error::MeasurementInvalid(format!(
                    "transition after edge at {:.6} s never completes",
                    e.time
                )));
            };
            // the transition must finish before any later edge on the channel
            let next_edge = script_edges.iter().find(|x| x.time > e.time).map(|x| x.time);
            if let Some(next) = next_edge {
                if run.rows[k90].time > next || t_change > next {
                    return Err(Error::MeasurementInvalid(format!(
                        "edge at {:.6} s follows the previous one before it settled",
                        next
                    )));
                }
            }
            if n + 1 < actuating.len() && actuating[n + 1].time <= t_change {
                return Err(Error::MeasurementInvalid("edges too close to measure".into()));
            }
            edges.push(EdgeTiming {
                channel: run.channel,
                edge_time: e.time,
                closing,
                latency: t_change - e.time,
                switching_time: b - a,
            });
        }
    }
    let mean = |closing: bool, f: fn(&EdgeTiming) -> f64| -> Option<f64> {
        let v: Vec<f64> = edges.iter().filter(|e| e.closing == closing).map(f).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let (Some(t_lr), Some(t_lf)) = (mean(true, |e| e.latency), mean(false, |e| e.latency)) else {
        return Err(Error::MeasurementInvalid("script needs at least one closing and one opening edge".into()));
    };
    Ok(TimingReport {
        t_r: mean(true, |e| e.switching_time).expect("closing edge present"),
        t_f: mean(false, |e| e.switching_time).expect("opening edge present"),
        t_lr,
        t_lf,
        edges,
    })
}

/// Bias-driven PIN switch: a fixed driver delay followed by a first-order
/// RF envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronicChannel {
    pub driver_delay: f64,
    pub time_constant: f64,
}

impl Default for ElectronicChannel {
    fn default() -> Self {
        Self { driver_delay: 20e-9, time_constant: 40e-9 }
    }
}

impl ElectronicChannel {
    /// Simulated 10 to 90 % time of the RF envelope after a bias step.
    pub fn switching_time(&self) -> Result<f64> {
        if !(self.time_constant > 0.0 && self.driver_delay >= 0.0) {
            return Err(Error::invalid("electronic channel needs a positive time constant"));
        }
        let dt = self.time_constant / 200.0;
        let alpha = 1.0 - (-dt / self.time_constant).exp();
        let (mut y, mut t) = (0.0f64, 0.0f64);
        let (mut t10, mut t90) = (None, None);
        while t90.is_none() {
            t += dt;
            if t > self.driver_delay {
                y += (1.0 - y) * alpha;
            }
            if t10.is_none() && y >= 0.1 {
                t10 = Some(t);
            }
            if y >= 0.9 {
                t90 = Some(t);
            }
        }
        Ok(t90.unwrap() - t10.unwrap())
    }
}
