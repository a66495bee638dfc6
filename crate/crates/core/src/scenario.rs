//! Scenario files: TOML sections with unit-suffixed quantities.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::coil::LoadCondition;
use crate::error::{Error, Result};
use crate::matchnet::{NodeOrder, SwitchConfig};
use crate::netcore::Frequency;
use crate::qfactor::BandReference;

pub const PAPER_DEFAULT_NAME: &str = "paper-default";
pub const PAPER_DEFAULT: &str = include_str!("../scenarios/paper-default.toml");

/// A number, or a string holding a number followed by a unit.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Capacitance,
    Inductance,
    Resistance,
    Frequency,
    Time,
    Pressure,
    Mass,
    Power,
    Temperature,
    Ratio,
}

impl Dimension {
    /// Accepted suffixes with their scale to SI (pressure stays in mmHg,
    /// temperature in degrees Celsius).
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Capacitance => &[("pF", 1e-12), ("nF", 1e-9), ("uF", 1e-6), ("F", 1.0)],
            Dimension::Inductance => &[("nH", 1e-9), ("uH", 1e-6), ("mH", 1e-3), ("H", 1.0)],
            Dimension::Resistance => &[("kohm", 1e3), ("ohm", 1.0), ("Ω", 1.0)],
            Dimension::Frequency => &[("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("Hz", 1.0)],
            Dimension::Time => &[("ns", 1e-9), ("us", 1e-6), ("µs", 1e-6), ("ms", 1e-3), ("s", 1.0)],
            Dimension::Pressure => &[("mmHg", 1.0)],
            Dimension::Mass => &[("mg", 1e-6), ("kg", 1.0), ("g", 1e-3)],
            Dimension::Power => &[("mW", 1e-3), ("kW", 1e3), ("W", 1.0)],
            Dimension::Temperature => &[("degC", 1.0)],
            Dimension::Ratio => &[],
        }
    }
}

impl Quantity {
    /// Value in SI units. Bare numbers are taken as already in SI.
    pub fn value(&self, field: &str, dim: Dimension) -> Result<f64> {
        let v = match self {
            Quantity::Number(v) => *v,
            Quantity::Text(s) => parse_with_unit(s, dim).ok_or_else(|| {
                let units: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
                Error::validation(field, format!("cannot read {s:?}; expected a number with one of {units:?}"))
            })?,
        };
        if !v.is_finite() {
            return Err(Error::validation(field, "value is not finite"));
        }
        Ok(v)
    }
}

fn parse_with_unit(text: &str, dim: Dimension) -> Option<f64> {
    let t = text.trim();
    for (suffix, scale) in dim.units() {
        if let Some(num) = t.strip_suffix(suffix) {
            if let Ok(v) = num.trim().parse::<f64>() {
                return Some(v * scale);
            }
        }
    }
    t.parse::<f64>().ok()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    network: RawNetwork,
    coil: RawCoil,
    bank: RawBank,
    trimmers: RawTrimmers,
    aeroswitch: RawSwitch,
    pin: RawPin,
    array: RawArray,
    tuner: RawTuner,
    sweep: RawSweep,
    qtable: RawQTable,
    pneumo: RawPneumo,
    thermal: RawThermal,
    snr: RawSnr,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    z0: Quantity,
    order: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoil {
    impedance_re: Quantity,
    impedance_im: Quantity,
    frequency: Quantity,
    c_dist: Quantity,
    measured: String,
    loading_ratio: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBank {
    c1: Quantity,
    c2: Quantity,
    c3: Quantity,
    c4: Quantity,
    esr: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrimmers {
    c_m: Quantity,
    c_t: Quantity,
    c_m_min: Quantity,
    c_m_max: Quantity,
    c_t_min: Quantity,
    c_t_max: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwitch {
    insertion_loss_db: Quantity,
    isolation_db: Quantity,
    fit_frequency: Quantity,
    r_on: Option<Quantity>,
    c_off: Option<Quantity>,
    r_off: Option<Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPin {
    insertion_loss_db: Quantity,
    isolation_db: Quantity,
    fit_frequency: Quantity,
    r_on: Option<Quantity>,
    c_off: Option<Quantity>,
    r_off: Option<Quantity>,
    dc_block: Quantity,
    choke: Quantity,
    decoupling: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    isolation_db: Quantity,
    frequency: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTuner {
    target: Quantity,
    tolerance_db: Quantity,
    max_evaluations: u64,
    seed_grid: u64,
    oracle_grid: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    from: Quantity,
    to: Quantity,
    points: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQTable {
    from: Quantity,
    to: Quantity,
    points: u64,
    band: String,
    mid_config: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPneumo {
    dt: Quantity,
    latency: Quantity,
    switching_time: Quantity,
    positive_setpoint: Quantity,
    vacuum_limit: Quantity,
    pressure_threshold: Quantity,
    plunger_mass: Quantity,
    fill_time_constant: Option<Quantity>,
    overpressure: bool,
    bounce_seed: u64,
    pin_driver_delay: Quantity,
    pin_time_constant: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    ambient: Quantity,
    incident_power: Quantity,
    frequency: Quantity,
    duration: Quantity,
    aero_on: Quantity,
    aero_off: Quantity,
    pin_on: Quantity,
    pin_off: Quantity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnr {
    b1: Quantity,
    sample_temperature: Quantity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoilSection {
    pub impedance_re: f64,
    pub impedance_im: f64,
    pub frequency: Frequency,
    pub c_dist: f64,
    pub measured: LoadCondition,
    pub loading_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimmerSection {
    pub c_m: f64,
    pub c_t: f64,
    pub c_m_range: (f64, f64),
    pub c_t_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSection {
    pub insertion_loss_db: f64,
    pub isolation_db: f64,
    pub fit_frequency: Frequency,
    pub r_on: Option<f64>,
    pub c_off: Option<f64>,
    pub r_off: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSection {
    pub dc_block: f64,
    pub choke: f64,
    pub decoupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunerSection {
    pub target: Frequency,
    pub tolerance_db: f64,
    pub max_evaluations: usize,
    pub seed_grid: usize,
    pub oracle_grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub from: Frequency,
    pub to: Frequency,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTableSection {
    pub band: Band,
    pub reference: BandReference,
    pub mid_config: SwitchConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PneumoSection {
    pub dt: f64,
    pub latency: f64,
    pub switching_time: f64,
    pub positive_setpoint: f64,
    pub vacuum_limit: f64,
    pub pressure_threshold: f64,
    pub plunger_mass: f64,
    pub fill_time_constant: Option<f64>,
    pub overpressure: bool,
    pub bounce_seed: u64,
    pub pin_driver_delay: f64,
    pub pin_time_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSection {
    pub ambient: f64,
    pub incident_power: f64,
    pub frequency: Frequency,
    pub duration: f64,
    pub aero_on: f64,
    pub aero_off: f64,
    pub pin_on: f64,
    pub pin_off: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrSection {
    pub b1: f64,
    pub sample_temperature: f64,
}

/// A validated scenario. Quantities are SI except pressures (mmHg) and
/// temperatures (degrees Celsius).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Hex SHA-256 of the source text.
    pub hash: String,
    pub z0: f64,
    pub order: NodeOrder,
    pub coil: CoilSection,
    pub bank: [f64; 4],
    pub bank_esr: f64,
    pub trimmers: TrimmerSection,
    pub aeroswitch: SwitchSection,
    pub pin: SwitchSection,
    pub bias: BiasSection,
    pub array_isolation_db: f64,
    pub array_frequency: Frequency,
    pub tuner: TunerSection,
    pub sweep: Band,
    pub qtable: QTableSection,
    pub pneumo: PneumoSection,
    pub thermal: ThermalSection,
    pub snr: SnrSection,
}

struct Reader<'a> {
    section: &'a str,
}

impl Reader<'_> {
    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.section, key)
    }

    fn any(&self, key: &str, q: &Quantity, dim: Dimension) -> Result<f64> {
        q.value(&self.path(key), dim)
    }

    fn positive(&self, key: &str, q: &Quantity, dim: Dimension) -> Result<f64> {
        let v = self.any(key, q, dim)?;
        if v <= 0.0 {
            return Err(Error::validation(self.path(key), format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &str, q: &Quantity, dim: Dimension) -> Result<f64> {
        let v = self.any(key, q, dim)?;
        if v < 0.0 {
            return Err(Error::validation(self.path(key), format!("must not be negative, got {v}")));
        }
        Ok(v)
    }

    fn negative_db(&self, key: &str, q: &Quantity) -> Result<f64> {
        let v = self.any(key, q, Dimension::Ratio)?;
        if v >= 0.0 {
            return Err(Error::validation(self.path(key), format!("must be a negative dB value, got {v}")));
        }
        Ok(v)
    }

    fn frequency(&self, key: &str, q: &Quantity) -> Result<Frequency> {
        let v = self.positive(key, q, Dimension::Frequency)?;
        Frequency::new(v).map_err(|e| Error::validation(self.path(key), e.to_string()))
    }

    fn count(&self, key: &str, v: u64, min: u64) -> Result<usize> {
        if v < min {
            return Err(Error::validation(self.path(key), format!("must be at least {min}, got {v}")));
        }
        usize::try_from(v).map_err(|_| Error::validation(self.path(key), "too large"))
    }

    fn band(&self, from: &Quantity, to: &Quantity, points: u64) -> Result<Band> {
        let band = Band {
            from: self.frequency("from", from)?,
            to: self.frequency("to", to)?,
            points: self.count("points", points, 3)?,
        };
        if band.from.hz() >= band.to.hz() {
            return Err(Error::validation(self.path("to"), "must lie above `from`"));
        }
        Ok(band)
    }

    fn range(&self, lo_key: &str, lo: &Quantity, hi_key: &str, hi: &Quantity) -> Result<(f64, f64)> {
        let a = self.positive(lo_key, lo, Dimension::Capacitance)?;
        let b = self.positive(hi_key, hi, Dimension::Capacitance)?;
        if a > b {
            return Err(Error::validation(self.path(hi_key), format!("must not lie below {lo_key}")));
        }
        Ok((a, b))
    }

    fn optional(&self, key: &str, q: &Option<Quantity>, dim: Dimension, allow_zero: bool) -> Result<Option<f64>> {
        q.as_ref()
            .map(|q| if allow_zero { self.non_negative(key, q, dim) } else { self.positive(key, q, dim) })
            .transpose()
    }
}

fn switch_section(
    r: &Reader,
    il: &Quantity,
    iso: &Quantity,
    f: &Quantity,
    r_on: &Option<Quantity>,
    c_off: &Option<Quantity>,
    r_off: &Option<Quantity>,
) -> Result<SwitchSection> {
    let isolation_db = r.negative_db("isolation_db", iso)?;
    if isolation_db >= -6.0 {
        return Err(Error::validation(r.path("isolation_db"), "must lie below -6 dB"));
    }
    Ok(SwitchSection {
        insertion_loss_db: r.negative_db("insertion_loss_db", il)?,
        isolation_db,
        fit_frequency: r.frequency("fit_frequency", f)?,
        r_on: r.optional("r_on", r_on, Dimension::Resistance, false)?,
        c_off: r.optional("c_off", c_off, Dimension::Capacitance, false)?,
        r_off: r.optional("r_off", r_off, Dimension::Resistance, true)?,
    })
}

impl Scenario {
    pub fn paper_default() -> Self {
        Self::from_str_named(PAPER_DEFAULT, PAPER_DEFAULT_NAME).expect("bundled scenario is valid")
    }

    /// Loads a scenario from disk; the name `paper-default` selects the
    /// bundled file.
    pub fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == PAPER_DEFAULT_NAME {
            return Ok(Self::paper_default());
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    pub fn from_str_named(text: &str, name: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text)
            .map_err(|e| Error::Scenario { path: name.to_string(), message: e.to_string().trim_end().to_string() })?;
        let mut hash = String::with_capacity(64);
        for b in Sha256::digest(text.as_bytes()) {
            write!(hash, "{b:02x}").expect("writing to a String cannot fail");
        }
        Self::validate(raw, name, hash)
    }

    fn validate(raw: RawScenario, name: &str, hash: String) -> Result<Self> {
        let r = Reader { section: "network" };
        let z0 = r.positive("z0", &raw.network.z0, Dimension::Resistance)?;
        if z0 != crate::netcore::Z0 {
            return Err(Error::validation(
                "network.z0",
                format!("only a {} ohm reference is supported", crate::netcore::Z0),
            ));
        }
        let order = match raw.network.order.as_str() {
            "shunt-first" => NodeOrder::ShuntFirst,
            "series-first" => NodeOrder::SeriesFirst,
            other => {
                return Err(Error::validation(
                    "network.order",
                    format!("expected shunt-first or series-first, got {other:?}"),
                ))
            }
        };

        let r = Reader { section: "coil" };
        let c = &raw.coil;
        let coil = CoilSection {
            impedance_re: r.positive("impedance_re", &c.impedance_re, Dimension::Resistance)?,
            impedance_im: r.any("impedance_im", &c.impedance_im, Dimension::Resistance)?,
            frequency: r.frequency("frequency", &c.frequency)?,
            c_dist: r.positive("c_dist", &c.c_dist, Dimension::Capacitance)?,
            measured: match c.measured.as_str() {
                "loaded" => LoadCondition::Loaded,
                "unloaded" => LoadCondition::Unloaded,
                other => {
                    return Err(Error::validation(
                        "coil.measured",
                        format!("expected loaded or unloaded, got {other:?}"),
                    ))
                }
            },
            loading_ratio: {
                let v = r.positive("loading_ratio", &c.loading_ratio, Dimension::Ratio)?;
                if v <= 1.0 {
                    return Err(Error::validation("coil.loading_ratio", "must exceed 1"));
                }
                v
            },
        };

        let r = Reader { section: "bank" };
        let b = &raw.bank;
        let bank = [
            r.positive("c1", &b.c1, Dimension::Capacitance)?,
            r.positive("c2", &b.c2, Dimension::Capacitance)?,
            r.positive("c3", &b.c3, Dimension::Capacitance)?,
            r.positive("c4", &b.c4, Dimension::Capacitance)?,
        ];
        let bank_esr = r.non_negative("esr", &b.esr, Dimension::Resistance)?;

        let r = Reader { section: "trimmers" };
        let t = &raw.trimmers;
        let trimmers = TrimmerSection {
            c_m: r.positive("c_m", &t.c_m, Dimension::Capacitance)?,
            c_t: r.positive("c_t", &t.c_t, Dimension::Capacitance)?,
            c_m_range: r.range("c_m_min", &t.c_m_min, "c_m_max", &t.c_m_max)?,
            c_t_range: r.range("c_t_min", &t.c_t_min, "c_t_max", &t.c_t_max)?,
        };
        for (key, v, (lo, hi)) in [("c_m", trimmers.c_m, trimmers.c_m_range), ("c_t", trimmers.c_t, trimmers.c_t_range)]
        {
            if v < lo || v > hi {
                return Err(Error::validation(r.path(key), "nominal value lies outside its range"));
            }
        }

        let a = &raw.aeroswitch;
        let aeroswitch = switch_section(
            &Reader { section: "aeroswitch" },
            &a.insertion_loss_db,
            &a.isolation_db,
            &a.fit_frequency,
            &a.r_on,
            &a.c_off,
            &a.r_off,
        )?;
        let p = &raw.pin;
        let pr = Reader { section: "pin" };
        let pin =
            switch_section(&pr, &p.insertion_loss_db, &p.isolation_db, &p.fit_frequency, &p.r_on, &p.c_off, &p.r_off)?;
        let bias = BiasSection {
            dc_block: pr.positive("dc_block", &p.dc_block, Dimension::Capacitance)?,
            choke: pr.positive("choke", &p.choke, Dimension::Inductance)?,
            decoupling: pr.positive("decoupling", &p.decoupling, Dimension::Capacitance)?,
        };

        let r = Reader { section: "array" };
        let array_isolation_db = r.negative_db("isolation_db", &raw.array.isolation_db)?;
        let array_frequency = r.frequency("frequency", &raw.array.frequency)?;

        let r = Reader { section: "tuner" };
        let tu = &raw.tuner;
        let tuner = TunerSection {
            target: r.frequency("target", &tu.target)?,
            tolerance_db: r.negative_db("tolerance_db", &tu.tolerance_db)?,
            max_evaluations: r.count("max_evaluations", tu.max_evaluations, 100)?,
            seed_grid: r.count("seed_grid", tu.seed_grid, 2)?,
            oracle_grid: r.count("oracle_grid", tu.oracle_grid, 2)?,
        };

        let sweep = Reader { section: "sweep" }.band(&raw.sweep.from, &raw.sweep.to, raw.sweep.points)?;

        let r = Reader { section: "qtable" };
        let q = &raw.qtable;
        let qtable = QTableSection {
            band: r.band(&q.from, &q.to, q.points)?,
            reference: match q.band.as_str() {
                "half-absorbed-power" => BandReference::HalfAbsorbedPower,
                "dip-relative" => BandReference::DipRelative,
                other => {
                    return Err(Error::validation(
                        "qtable.band",
                        format!("expected half-absorbed-power or dip-relative, got {other:?}"),
                    ))
                }
            },
            mid_config: q
                .mid_config
                .parse()
                .map_err(|e: Error| Error::validation("qtable.mid_config", e.to_string()))?,
        };

        let r = Reader { section: "pneumo" };
        let pn = &raw.pneumo;
        let pneumo = PneumoSection {
            dt: r.positive("dt", &pn.dt, Dimension::Time)?,
            latency: r.positive("latency", &pn.latency, Dimension::Time)?,
            switching_time: r.positive("switching_time", &pn.switching_time, Dimension::Time)?,
            positive_setpoint: r.positive("positive_setpoint", &pn.positive_setpoint, Dimension::Pressure)?,
            vacuum_limit: r.positive("vacuum_limit", &pn.vacuum_limit, Dimension::Pressure)?,
            pressure_threshold: r.positive("pressure_threshold", &pn.pressure_threshold, Dimension::Pressure)?,
            plunger_mass: r.positive("plunger_mass", &pn.plunger_mass, Dimension::Mass)?,
            fill_time_constant: r.optional("fill_time_constant", &pn.fill_time_constant, Dimension::Time, false)?,
            overpressure: pn.overpressure,
            bounce_seed: pn.bounce_seed,
            pin_driver_delay: r.non_negative("pin_driver_delay", &pn.pin_driver_delay, Dimension::Time)?,
            pin_time_constant: r.positive("pin_time_constant", &pn.pin_time_constant, Dimension::Time)?,
        };
        if pneumo.dt > crate::pneumo::MAX_DT {
            return Err(Error::validation("pneumo.dt", format!("must not exceed {} s", crate::pneumo::MAX_DT)));
        }
        if pneumo.vacuum_limit > 420.0 {
            return Err(Error::validation("pneumo.vacuum_limit", "must not exceed 420 mmHg"));
        }

        let r = Reader { section: "thermal" };
        let th = &raw.thermal;
        let thermal = ThermalSection {
            ambient: r.any("ambient", &th.ambient, Dimension::Temperature)?,
            incident_power: r.non_negative("incident_power", &th.incident_power, Dimension::Power)?,
            frequency: r.frequency("frequency", &th.frequency)?,
            duration: r.positive("duration", &th.duration, Dimension::Time)?,
            aero_on: r.any("aero_on", &th.aero_on, Dimension::Temperature)?,
            aero_off: r.any("aero_off", &th.aero_off, Dimension::Temperature)?,
            pin_on: r.any("pin_on", &th.pin_on, Dimension::Temperature)?,
            pin_off: r.any("pin_off", &th.pin_off, Dimension::Temperature)?,
        };
        for (key, v) in [
            ("aero_on", thermal.aero_on),
            ("aero_off", thermal.aero_off),
            ("pin_on", thermal.pin_on),
            ("pin_off", thermal.pin_off),
        ] {
            if v < thermal.ambient {
                return Err(Error::validation(r.path(key), "lies below the ambient temperature"));
            }
        }

        let r = Reader { section: "snr" };
        let snr = SnrSection {
            b1: r.positive("b1", &raw.snr.b1, Dimension::Ratio)?,
            sample_temperature: r.any("sample_temperature", &raw.snr.sample_temperature, Dimension::Temperature)?,
        };

        Ok(Scenario {
            name: name.to_string(),
            hash,
            z0,
            order,
            coil,
            bank,
            bank_esr,
            trimmers,
            aeroswitch,
            pin,
            bias,
            array_isolation_db,
            array_frequency,
            tuner,
            sweep,
            qtable,
            pneumo,
            thermal,
            snr,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default_loads() {
        let s = Scenario::paper_default();
        assert_eq!(s.bank, [1.0e-12, 1.2e-12, 1.5e-12, 1.8e-12]);
        assert!((s.trimmers.c_m - 6e-12).abs() < 1e-24);
        assert_eq!(s.tuner.target.hz(), 298e6);
        assert_eq!(s.pneumo.plunger_mass, 63.1e-6);
        assert_eq!(s.hash.len(), 64);
        assert_eq!(Scenario::load(Path::new("paper-default")).unwrap(), s);
    }

    #[test]
    fn negative_capacitor_names_field() {
        let text = PAPER_DEFAULT.replace("c1 = \"1.0 pF\"", "c1 = \"-1 pF\"");
        match Scenario::from_str_named(&text, "t") {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "bank.c1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_has_location() {
        let text = PAPER_DEFAULT.replace("c4 = \"1.8 pF\"", "c4 = \"1.8 pF\"\nc5 = \"2.0 pF\"");
        match Scenario::from_str_named(&text, "t") {
            Err(Error::Scenario { message, .. }) => {
                assert!(message.contains("c5"), "{message}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_parsing() {
        let q = |s: &str| Quantity::Text(s.into());
        assert_eq!(q("6 pF").value("x", Dimension::Capacitance).unwrap(), 6e-12);
        assert_eq!(q("330nH").value("x", Dimension::Inductance).unwrap(), 330e-9);
        assert_eq!(q("298 MHz").value("x", Dimension::Frequency).unwrap(), 298e6);
        assert_eq!(q("250 us").value("x", Dimension::Time).unwrap(), 250e-6);
        assert_eq!(q("40 ms").value("x", Dimension::Time).unwrap(), 0.04);
        assert_eq!(q("420 mmHg").value("x", Dimension::Pressure).unwrap(), 420.0);
        assert!(q("6 nH").value("x", Dimension::Capacitance).is_err());
        assert_eq!(Quantity::Number(2.5).value("x", Dimension::Ratio).unwrap(), 2.5);
    }

    #[test]
    fn hash_tracks_content() {
        let a = Scenario::from_str_named(PAPER_DEFAULT, "a").unwrap();
        let b = Scenario::from_str_named(&PAPER_DEFAULT.replace("# assumed\n", "#\n"), "b").unwrap();
        assert_ne!(a.hash, b.hash);
    }
}
