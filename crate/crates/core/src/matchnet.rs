//! Switched capacitor bank, L-match network and the bare switch-array board.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::coil::{LoadCondition, LoopCoilModel};
use crate::components::{bisect, switch_branch, CapacitorModel, SwitchKind, SwitchModel, SwitchState};
use crate::error::{Error, Result};
use crate::netcore::{
    abcd_to_s, cascade, gamma_from_z, magnitude_db, series_element, shunt_element, Complex, Frequency, Impedance, Z0,
};

/// State of the four bank switches. Bit 0 drives C1 and is the rightmost
/// character of the textual form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwitchConfig(u8);

impl SwitchConfig {
    pub const COUNT: usize = 16;

    pub fn new(bits: u8) -> Result<Self> {
        if bits >= 16 {
            return Err(Error::invalid(format!("switch configuration {bits} exceeds 4 bits")));
        }
        Ok(Self(bits))
    }

    /// All configurations, 0000 first.
    pub fn all() -> impl Iterator<Item = SwitchConfig> {
        (0u8..16).map(SwitchConfig)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Whether branch `i` (0 for C1 ... 3 for C4) is switched on.
    pub fn is_on(self, i: usize) -> bool {
        i < 4 && (self.0 >> i) & 1 == 1
    }

    pub fn state(self, i: usize) -> SwitchState {
        SwitchState { on: self.is_on(i) }
    }

    pub fn is_subset_of(self, other: SwitchConfig) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Display for SwitchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04b}", self.0)
    }
}

impl FromStr for SwitchConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 4 || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::invalid(format!("switch configuration must be 4 characters of 0/1, got {s:?}")));
        }
        Ok(Self(u8::from_str_radix(s, 2).expect("validated binary digits")))
    }
}

/// The four switched capacitors, C1 first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitorBank {
    pub caps: [CapacitorModel; 4],
}

impl CapacitorBank {
    pub fn new(caps: [CapacitorModel; 4]) -> Self {
        Self { caps }
    }
}

impl Default for CapacitorBank {
    fn default() -> Self {
        let c = |pf: f64| CapacitorModel { capacitance: pf * 1e-12, esr: 0.0 };
        Self { caps: [c(1.0), c(1.2), c(1.5), c(1.8)] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technology {
    AeroSwitch,
    PinDiode,
    /// Capacitors wired in directly; each configuration is an ideal switch state.
    Standard,
}

impl Technology {
    pub fn label(self) -> &'static str {
        match self {
            Technology::AeroSwitch => "aeroswitch",
            Technology::PinDiode => "pin",
            Technology::Standard => "standard",
        }
    }
}

impl From<SwitchKind> for Technology {
    fn from(k: SwitchKind) -> Self {
        match k {
            SwitchKind::AeroSwitch => Technology::AeroSwitch,
            SwitchKind::PinDiode => Technology::PinDiode,
        }
    }
}

/// Position of the shunt trimmer relative to the series arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NodeOrder {
    /// Shunt `c_t` across the source port, series arm towards the coil.
    #[default]
    ShuntFirst,
    /// Series arm from the source, shunt `c_t` across the coil.
    SeriesFirst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchNetworkSpec {
    pub bank: CapacitorBank,
    pub c_m: CapacitorModel,
    pub c_t: CapacitorModel,
    /// `None` builds the standard network.
    pub switch: Option<SwitchModel>,
    pub order: NodeOrder,
}

impl MatchNetworkSpec {
    pub fn technology(&self) -> Technology {
        self.switch.map_or(Technology::Standard, |s| s.kind().into())
    }

    pub fn with_trimmers(&self, c_m: f64, c_t: f64) -> Result<Self> {
        let mut s = *self;
        s.c_m = CapacitorModel::new(c_m, self.c_m.esr)?;
        s.c_t = CapacitorModel::new(c_t, self.c_t.esr)?;
        Ok(s)
    }

    /// Impedance of the series arm: `c_m` in parallel with the four branches.
    pub fn series_arm(&self, config: SwitchConfig, f: Frequency) -> Result<Impedance> {
        let mut y = 1.0 / self.c_m.impedance(f);
        for (i, cap) in self.bank.caps.iter().enumerate() {
            let zc = cap.impedance(f);
            match &self.switch {
                None if config.is_on(i) => y += 1.0 / zc,
                None => {}
                Some(sw) => y += 1.0 / (zc + switch_branch(sw, config.state(i), f)),
            }
        }
        if y.norm() == 0.0 || !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::DegenerateNetwork("series arm admittance"));
        }
        Ok(1.0 / y)
    }
}

/// One-port termination of the matching network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Coil { model: LoopCoilModel, condition: LoadCondition },
    Fixed(Impedance),
}

impl Load {
    pub fn impedance(&self, f: Frequency) -> Impedance {
        match self {
            Load::Coil { model, condition } => model.impedance(*condition, f),
            Load::Fixed(z) => *z,
        }
    }
}

/// Sum of the trimmer and every switched-in capacitor, treating switches
/// as ideal.
pub fn bank_capacitance(config: SwitchConfig, spec: &MatchNetworkSpec) -> f64 {
    spec.c_m.capacitance + (0..4).filter(|&i| config.is_on(i)).map(|i| spec.bank.caps[i].capacitance).sum::<f64>()
}

/// [`bank_capacitance`] in integer tenths of a picofarad, each value rounded
/// before summation so that decimal inputs add exactly.
pub fn bank_capacitance_tenths(config: SwitchConfig, spec: &MatchNetworkSpec) -> i64 {
    let tenths = |c: f64| (c * 1e13).round() as i64;
    tenths(spec.c_m.capacitance)
        + (0..4).filter(|&i| config.is_on(i)).map(|i| tenths(spec.bank.caps[i].capacitance)).sum::<i64>()
}

pub fn network_input_impedance(
    spec: &MatchNetworkSpec,
    config: SwitchConfig,
    load: &Load,
    f: Frequency,
) -> Result<Impedance> {
    let series = series_element(spec.series_arm(config, f)?)?;
    let shunt = shunt_element(1.0 / spec.c_t.impedance(f))?;
    let m = match spec.order {
        NodeOrder::ShuntFirst => cascade(&shunt, &series)?,
        NodeOrder::SeriesFirst => cascade(&series, &shunt)?,
    };
    m.input_impedance(load.impedance(f))
}

pub fn network_s11(spec: &MatchNetworkSpec, config: SwitchConfig, load: &Load, f: Frequency) -> Result<Complex> {
    gamma_from_z(network_input_impedance(spec, config, load, f)?, Z0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub frequencies: Vec<Frequency>,
    pub s11: Vec<Complex>,
    pub z_in: Vec<Impedance>,
}

impl SweepResult {
    pub fn new(frequencies: Vec<Frequency>, s11: Vec<Complex>, z_in: Vec<Impedance>) -> Result<Self> {
        if frequencies.len() != s11.len() || frequencies.len() != z_in.len() {
            return Err(Error::invalid("sweep columns differ in length"));
        }
        if frequencies.windows(2).any(|w| w[1].hz() <= w[0].hz()) {
            return Err(Error::invalid("sweep frequencies must be strictly increasing"));
        }
        Ok(Self { frequencies, s11, z_in })
    }

    /// Sweep of a one-port given only its reflection coefficients.
    pub fn from_reflection(frequencies: Vec<Frequency>, s11: Vec<Complex>) -> Result<Self> {
        let z_in = s11.iter().map(|g| Z0 * (1.0 + g) / (1.0 - g)).collect();
        Self::new(frequencies, s11, z_in)
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn s11_db(&self) -> Vec<f64> {
        self.s11.iter().map(|g| magnitude_db(*g)).collect()
    }

    /// Writes the sweep as CSV rows tagged with `config`.
    pub fn write_csv<W: Write>(&self, out: &mut csv::Writer<W>, config: SwitchConfig) -> Result<()> {
        let tag = config.to_string();
        for ((f, g), z) in self.frequencies.iter().zip(&self.s11).zip(&self.z_in) {
            out.write_record([
                format!("{:.6}", f.hz()),
                format!("{:.12e}", g.re),
                format!("{:.12e}", g.im),
                format!("{:.9}", magnitude_db(*g)),
                format!("{:.12e}", z.re),
                format!("{:.12e}", z.im),
                tag.clone(),
            ])
            .map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
        }
        Ok(())
    }
}

pub const SWEEP_COLUMNS: [&str; 7] = ["frequency_hz", "re_s11", "im_s11", "s11_db", "re_zin", "im_zin", "config"];

/// `n` evenly spaced frequencies from `f_start` to `f_stop` inclusive.
pub fn linear_grid(f_start: Frequency, f_stop: Frequency, n: usize) -> Result<Vec<Frequency>> {
    if f_start.hz() >= f_stop.hz() {
        return Err(Error::invalid(format!("sweep start {f_start} must lie below stop {f_stop}")));
    }
    if n < 3 {
        return Err(Error::invalid(format!("a sweep needs at least 3 points, got {n}")));
    }
    let (a, b) = (f_start.hz(), f_stop.hz());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { f_stop } else { Frequency::new(a + step * i as f64).expect("positive") })
        .map(Ok)
        .collect()
}

pub fn s11_sweep(
    spec: &MatchNetworkSpec,
    config: SwitchConfig,
    load: &Load,
    f_start: Frequency,
    f_stop: Frequency,
    n_points: usize,
) -> Result<SweepResult> {
    let frequencies = linear_grid(f_start, f_stop, n_points)?;
    let z_in =
        frequencies.par_iter().map(|&f| network_input_impedance(spec, config, load, f)).collect::<Result<Vec<_>>>()?;
    let s11 = z_in.iter().map(|&z| gamma_from_z(z, Z0)).collect::<Result<Vec<_>>>()?;
    SweepResult::new(frequencies, s11, z_in)
}

/// Switch board without series capacitors: all four branches in parallel
/// between the ports, plus trace-to-trace coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayBoard {
    pub switch: SwitchModel,
    pub pcb_coupling: CapacitorModel,
}

pub fn array_s21(board: &ArrayBoard, config: SwitchConfig, f: Frequency, z0: f64) -> Result<f64> {
    let mut y = 1.0 / board.pcb_coupling.impedance(f);
    for i in 0..4 {
        y += 1.0 / switch_branch(&board.switch, config.state(i), f);
    }
    let s = abcd_to_s(&series_element(1.0 / y)?, z0)?;
    Ok(magnitude_db(s.s21))
}

/// Coupling capacitance that puts the all-off board at `isolation_db`
/// at frequency `f`.
pub fn fit_pcb_coupling(switch: &SwitchModel, isolation_db: f64, f: Frequency, z0: f64) -> Result<CapacitorModel> {
    let off = SwitchConfig(0);
    let eval = |c: f64| -> Result<f64> {
        let board = ArrayBoard { switch: *switch, pcb_coupling: CapacitorModel::ideal(c)? };
        array_s21(&board, off, f, z0)
    };
    let floor = eval(1e-21)?;
    if floor >= isolation_db {
        return Err(Error::NonPhysicalFit(format!(
            "switches alone leak {floor:.2} dB, above the {isolation_db} dB target"
        )));
    }
    let c = bisect(1e-21, 1e-9, isolation_db, eval)?;
    CapacitorModel::ideal(c)
}
