//! Lumped elements and behavioral switch models.

use crate::error::{Error, Result};
use crate::netcore::{
    abcd_to_s, cascade_all, magnitude_db, series_element, shunt_element, Abcd, Complex, Frequency, Impedance,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitorModel {
    pub capacitance: f64,
    pub esr: f64,
}

impl CapacitorModel {
    pub fn new(capacitance: f64, esr: f64) -> Result<Self> {
        if !(capacitance.is_finite() && capacitance > 0.0) {
            return Err(Error::invalid(format!("capacitance must be positive, got {capacitance}")));
        }
        if !(esr.is_finite() && esr >= 0.0) {
            return Err(Error::invalid(format!("capacitor ESR must be non-negative, got {esr}")));
        }
        Ok(Self { capacitance, esr })
    }

    pub fn ideal(capacitance: f64) -> Result<Self> {
        Self::new(capacitance, 0.0)
    }

    pub fn impedance(&self, f: Frequency) -> Impedance {
        capacitor_impedance(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductorModel {
    pub inductance: f64,
    pub esr: f64,
}

impl InductorModel {
    pub fn new(inductance: f64, esr: f64) -> Result<Self> {
        if !(inductance.is_finite() && inductance > 0.0) {
            return Err(Error::invalid(format!("inductance must be positive, got {inductance}")));
        }
        if !(esr.is_finite() && esr >= 0.0) {
            return Err(Error::invalid(format!("inductor ESR must be non-negative, got {esr}")));
        }
        Ok(Self { inductance, esr })
    }

    pub fn ideal(inductance: f64) -> Result<Self> {
        Self::new(inductance, 0.0)
    }

    pub fn impedance(&self, f: Frequency) -> Impedance {
        inductor_impedance(self, f)
    }
}

pub fn capacitor_impedance(c: &CapacitorModel, f: Frequency) -> Impedance {
    Complex::new(c.esr, -1.0 / (f.omega() * c.capacitance))
}

pub fn inductor_impedance(l: &InductorModel, f: Frequency) -> Impedance {
    Complex::new(l.esr, f.omega() * l.inductance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SwitchKind {
    AeroSwitch,
    PinDiode,
}

impl SwitchKind {
    pub fn label(self) -> &'static str {
        match self {
            SwitchKind::AeroSwitch => "aeroswitch",
            SwitchKind::PinDiode => "pin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchState {
    pub on: bool,
}

impl SwitchState {
    pub const ON: SwitchState = SwitchState { on: true };
    pub const OFF: SwitchState = SwitchState { on: false };

    pub fn label(self) -> &'static str {
        if self.on {
            "on"
        } else {
            "off"
        }
    }
}

/// DC feed around a PIN diode: series blocks on both sides of the diode,
/// a feed choke returning through the decoupling capacitor and a ground
/// choke on the far side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasNetwork {
    pub dc_block: [CapacitorModel; 2],
    pub choke: [InductorModel; 2],
    pub decoupling: CapacitorModel,
}

impl BiasNetwork {
    pub fn new(dc_block: f64, choke: f64, decoupling: f64) -> Result<Self> {
        let block = CapacitorModel::ideal(dc_block)?;
        let rfc = InductorModel::ideal(choke)?;
        Ok(Self { dc_block: [block, block], choke: [rfc, rfc], decoupling: CapacitorModel::ideal(decoupling)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchModel {
    kind: SwitchKind,
    r_on: f64,
    c_off: f64,
    r_off: f64,
    bias: Option<BiasNetwork>,
}

impl SwitchModel {
    pub fn new(kind: SwitchKind, r_on: f64, c_off: f64, r_off: f64, bias: Option<BiasNetwork>) -> Result<Self> {
        if !(r_on.is_finite() && r_on > 0.0) {
            return Err(Error::invalid(format!("r_on must be positive, got {r_on}")));
        }
        if !(c_off.is_finite() && c_off > 0.0) {
            return Err(Error::invalid(format!("c_off must be positive, got {c_off}")));
        }
        if !(r_off.is_finite() && r_off >= 0.0) {
            return Err(Error::invalid(format!("r_off must be non-negative, got {r_off}")));
        }
        match (kind, bias.is_some()) {
            (SwitchKind::AeroSwitch, true) => return Err(Error::invalid("an AeroSwitch has no bias network")),
            (SwitchKind::PinDiode, false) => return Err(Error::invalid("a PIN diode switch requires a bias network")),
            _ => {}
        }
        Ok(Self { kind, r_on, c_off, r_off, bias })
    }

    pub fn aero(r_on: f64, c_off: f64, r_off: f64) -> Result<Self> {
        Self::new(SwitchKind::AeroSwitch, r_on, c_off, r_off, None)
    }

    pub fn pin(r_on: f64, c_off: f64, r_off: f64, bias: BiasNetwork) -> Result<Self> {
        Self::new(SwitchKind::PinDiode, r_on, c_off, r_off, Some(bias))
    }

    pub fn kind(&self) -> SwitchKind {
        self.kind
    }
    pub fn r_on(&self) -> f64 {
        self.r_on
    }
    pub fn c_off(&self) -> f64 {
        self.c_off
    }
    pub fn r_off(&self) -> f64 {
        self.r_off
    }
    pub fn bias(&self) -> Option<&BiasNetwork> {
        self.bias.as_ref()
    }

    pub fn with_r_on(&self, r_on: f64) -> Result<Self> {
        Self::new(self.kind, r_on, self.c_off, self.r_off, self.bias)
    }

    pub fn with_off(&self, c_off: f64, r_off: f64) -> Result<Self> {
        Self::new(self.kind, self.r_on, c_off, r_off, self.bias)
    }

    /// Impedance of the switching element alone, without any DC block.
    pub fn element_impedance(&self, state: SwitchState, f: Frequency) -> Impedance {
        if state.on {
            Complex::new(self.r_on, 0.0)
        } else {
            Complex::new(self.r_off, -1.0 / (f.omega() * self.c_off))
        }
    }
}

/// Two-terminal impedance of one switched branch as it sits inside a
/// capacitor bank. A PIN branch carries its series DC block.
pub fn switch_branch(model: &SwitchModel, state: SwitchState, f: Frequency) -> Impedance {
    let z = model.element_impedance(state, f);
    match model.bias() {
        Some(b) => z + b.dc_block[0].impedance(f),
        None => z,
    }
}

/// Full single-switch test board as a two-port.
pub fn single_switch_chain(model: &SwitchModel, state: SwitchState, f: Frequency) -> Result<Abcd> {
    let element = series_element(model.element_impedance(state, f))?;
    match model.bias() {
        None => Ok(element),
        Some(b) => {
            let feed = b.choke[0].impedance(f) + b.decoupling.impedance(f);
            let chain = [
                series_element(b.dc_block[0].impedance(f))?,
                shunt_element(1.0 / feed)?,
                element,
                shunt_element(1.0 / b.choke[1].impedance(f))?,
                series_element(b.dc_block[1].impedance(f))?,
            ];
            cascade_all(chain.iter())
        }
    }
}

pub fn single_switch_s21(model: &SwitchModel, state: SwitchState, f: Frequency, z0: f64) -> Result<f64> {
    let s = abcd_to_s(&single_switch_chain(model, state, f)?, z0)?;
    Ok(magnitude_db(s.s21))
}

/// Series resistance giving the requested insertion loss (negative dB).
pub fn fit_r_on(insertion_loss_db: f64, z0: f64) -> Result<f64> {
    if !insertion_loss_db.is_finite() {
        return Err(Error::NonFinite("insertion loss"));
    }
    if insertion_loss_db > 0.0 {
        return Err(Error::invalid(format!("insertion loss must be negative dB, got {insertion_loss_db}")));
    }
    let il = -insertion_loss_db;
    Ok(2.0 * z0 * (10f64.powf(il / 20.0) - 1.0))
}

/// Series capacitance giving the requested isolation (negative dB) at `f`.
pub fn fit_c_off(isolation_db: f64, f: Frequency, z0: f64) -> Result<f64> {
    fit_c_off_with_loss(isolation_db, f, z0, 0.0)
}

/// As [`fit_c_off`] with a series OFF-state resistance already in place.
pub fn fit_c_off_with_loss(isolation_db: f64, f: Frequency, z0: f64, r_off: f64) -> Result<f64> {
    if !isolation_db.is_finite() {
        return Err(Error::NonFinite("isolation"));
    }
    if isolation_db >= -6.0 {
        return Err(Error::IsolationTooShallow(isolation_db));
    }
    let m = 10f64.powf(isolation_db / 20.0);
    let total = 2.0 * z0 / m;
    let x2 = total * total - (2.0 * z0 + r_off).powi(2);
    if x2 <= 0.0 {
        return Err(Error::NonPhysicalFit(format!(
            "r_off = {r_off} ohm alone already exceeds {isolation_db} dB isolation"
        )));
    }
    Ok(1.0 / (f.omega() * x2.sqrt()))
}

/// Bisection on a scalar parameter until `eval(p) == target`, where `eval`
/// is monotone on `[lo, hi]`.
pub(crate) fn bisect<F>(mut lo: f64, mut hi: f64, target: f64, mut eval: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = eval(lo)? - target;
    let fhi = eval(hi)? - target;
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        return Err(Error::NonPhysicalFit(format!("target {target} not bracketed on [{lo:e}, {hi:e}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(mid)? - target;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Refines `r_on` so the complete single-switch board, bias network
/// included, shows `insertion_loss_db` at `f`.
pub fn calibrate_r_on(model: &SwitchModel, insertion_loss_db: f64, f: Frequency, z0: f64) -> Result<SwitchModel> {
    let seed = fit_r_on(insertion_loss_db, z0)?.max(1e-6);
    let ideal = single_switch_s21(&model.with_r_on(1e-9)?, SwitchState::ON, f, z0)?;
    if ideal <= insertion_loss_db {
        return Err(Error::NonPhysicalFit(format!(
            "bias network alone loses {ideal:.4} dB, below the {insertion_loss_db} dB target"
        )));
    }
    let r = bisect(1e-9, seed * 4.0 + 1.0, insertion_loss_db, |r| {
        single_switch_s21(&model.with_r_on(r)?, SwitchState::ON, f, z0)
    })?;
    model.with_r_on(r)
}

/// Refines `c_off` so the complete board shows `isolation_db` at `f` with
/// the model's current `r_off`.
pub fn calibrate_c_off(model: &SwitchModel, isolation_db: f64, f: Frequency, z0: f64) -> Result<SwitchModel> {
    let seed = fit_c_off_with_loss(isolation_db, f, z0, model.r_off())?;
    let r_off = model.r_off();
    let c = bisect(seed * 1e-3, seed * 1e3, isolation_db, |c| {
        single_switch_s21(&model.with_off(c, r_off)?, SwitchState::OFF, f, z0)
    })?;
    model.with_off(c, r_off)
}
