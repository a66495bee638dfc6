//! Switch dissipation, steady-state heating and the relative SNR estimate.

use crate::components::{bisect, calibrate_c_off, single_switch_chain, single_switch_s21, SwitchModel, SwitchState};
use crate::error::{Error, Result};
use crate::netcore::{abcd_to_s, Frequency};

/// Temperature coefficient of copper resistance, per kelvin.
pub const COPPER_ALPHA: f64 = 0.00393;

pub const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalScenario {
    pub incident_power: f64,
    pub ambient: f64,
    /// Kelvin per watt.
    pub theta: f64,
    pub duration: f64,
}

impl ThermalScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.incident_power.is_finite() && self.incident_power >= 0.0) {
            return Err(Error::invalid("incident power must be non-negative"));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::invalid("thermal resistance must be positive"));
        }
        if !self.ambient.is_finite() {
            return Err(Error::NonFinite("ambient temperature"));
        }
        Ok(())
    }
}

pub fn dissipated_power(model: &SwitchModel, state: SwitchState, f: Frequency, incident: f64, z0: f64) -> Result<f64> {
    if !(incident.is_finite() && incident >= 0.0) {
        return Err(Error::invalid(format!("incident power must be non-negative, got {incident}")));
    }
    let s = abcd_to_s(&single_switch_chain(model, state, f)?, z0)?;
    Ok(incident * s.absorbed_fraction().clamp(0.0, 1.0))
}

pub fn steady_temperature(p_dissipated: f64, scenario: &ThermalScenario) -> f64 {
    scenario.ambient + scenario.theta * p_dissipated
}

pub fn copper_resistance(r0: f64, t0: f64, t: f64) -> f64 {
    r0 * (1.0 + COPPER_ALPHA * (t - t0))
}

/// Steady endpoint temperatures in degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointTemperatures {
    pub aero_on: f64,
    pub aero_off: f64,
    pub pin_on: f64,
    pub pin_off: f64,
}

/// Operating point shared by all four thermal measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalDrive {
    pub frequency: Frequency,
    pub incident_power: f64,
    pub z0: f64,
}

/// OFF-state isolation that the refitted OFF model must keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationAnchor {
    pub isolation_db: f64,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceCalibration {
    pub model: SwitchModel,
    pub theta: f64,
    pub p_on: f64,
    pub p_off_required: f64,
    pub p_off: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub residual_on: f64,
    pub residual_off: f64,
    /// False when no OFF resistance can produce the required dissipation
    /// while keeping the isolation anchor; the closest model is returned.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalCalibration {
    pub ambient: f64,
    pub aero: DeviceCalibration,
    pub pin: DeviceCalibration,
}

/// Largest OFF resistance that still leaves room for a capacitance meeting
/// the isolation anchor.
fn r_off_ceiling(model: &SwitchModel, anchor: &IsolationAnchor, z0: f64) -> Result<f64> {
    let iso = |r: f64| -> Result<f64> {
        let m = model.with_off(1e-3, r)?;
        single_switch_s21(&m, SwitchState::OFF, anchor.frequency, z0)
    };
    bisect(0.0, 1e9, anchor.isolation_db, iso)
}

fn calibrate_device(
    model: &SwitchModel,
    t_on: f64,
    t_off: f64,
    ambient: f64,
    drive: &ThermalDrive,
    anchor: &IsolationAnchor,
) -> Result<DeviceCalibration> {
    if !(t_on > ambient) {
        return Err(Error::InconsistentCalibration(format!(
            "{} ON temperature {t_on} C is not above ambient {ambient} C",
            model.kind().label()
        )));
    }
    if t_off < ambient {
        return Err(Error::InconsistentCalibration(format!(
            "{} OFF temperature {t_off} C is below ambient {ambient} C",
            model.kind().label()
        )));
    }
    let p_on = dissipated_power(model, SwitchState::ON, drive.frequency, drive.incident_power, drive.z0)?;
    if !(p_on > 0.0) {
        return Err(Error::InconsistentCalibration("ON-state model dissipates no power".into()));
    }
    let theta = (t_on - ambient) / p_on;
    let p_off_required = (t_off - ambient) / theta;

    let refit = |r_off: f64| -> Result<SwitchModel> {
        let seeded = model.with_off(model.c_off(), r_off)?;
        calibrate_c_off(&seeded, anchor.isolation_db, anchor.frequency, drive.z0)
    };
    let p_off_of =
        |m: &SwitchModel| dissipated_power(m, SwitchState::OFF, drive.frequency, drive.incident_power, drive.z0);

    let (model_off, exact) = if p_off_required == 0.0 {
        (refit(0.0)?, true)
    } else {
        let ceiling = r_off_ceiling(model, anchor, drive.z0)? * (1.0 - 1e-9);
        // dissipation rises from zero, peaks, then falls towards the ceiling
        let n = 400;
        let mut peak = (0.0, 0.0);
        for k in 1..n {
            let r = ceiling * k as f64 / n as f64;
            let p = p_off_of(&refit(r)?)?;
            if p > peak.1 {
                peak = (r, p);
            }
        }
        let (mut a, mut b) = ((peak.0 - ceiling / n as f64).max(0.0), (peak.0 + ceiling / n as f64).min(ceiling));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = b - phi * (b - a);
            let x2 = a + phi * (b - a);
            if p_off_of(&refit(x1)?)? < p_off_of(&refit(x2)?)? {
                a = x1;
            } else {
                b = x2;
            }
        }
        let r_peak = 0.5 * (a + b);
        let p_peak = p_off_of(&refit(r_peak)?)?;
        if p_peak < p_off_required {
            (refit(r_peak)?, false)
        } else {
            let r = bisect(0.0, r_peak, p_off_required, |r| p_off_of(&refit(r)?))?;
            (refit(r)?, true)
        }
    };

    let p_off = p_off_of(&model_off)?;
    let scenario = ThermalScenario { incident_power: drive.incident_power, ambient, theta, duration: 0.0 };
    let pred_on = steady_temperature(p_on, &scenario);
    let pred_off = steady_temperature(p_off, &scenario);
    Ok(DeviceCalibration {
        model: model_off,
        theta,
        p_on,
        p_off_required,
        p_off,
        t_on: pred_on,
        t_off: pred_off,
        residual_on: pred_on - t_on,
        residual_off: pred_off - t_off,
        exact,
    })
}

/// Per device: thermal resistance from the ON point, then the OFF-state
/// resistance (with capacitance refitted to keep the isolation anchor) from
/// the OFF point.
pub fn calibrate_thermal(
    temps: &EndpointTemperatures,
    ambient: f64,
    aero: (&SwitchModel, IsolationAnchor),
    pin: (&SwitchModel, IsolationAnchor),
    drive: &ThermalDrive,
) -> Result<ThermalCalibration> {
    Ok(ThermalCalibration {
        ambient,
        aero: calibrate_device(aero.0, temps.aero_on, temps.aero_off, ambient, drive, &aero.1)?,
        pin: calibrate_device(pin.0, temps.pin_on, temps.pin_off, ambient, drive, &pin.1)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrInputs {
    pub b1: f64,
    pub r_sample: f64,
    /// Kelvin.
    pub t_sample: f64,
    pub r_coil: f64,
    /// Kelvin.
    pub t_coil: f64,
}

impl SnrInputs {
    fn value(&self) -> Result<f64> {
        if !(self.r_sample >= 0.0 && self.r_coil >= 0.0 && self.t_sample > 0.0 && self.t_coil > 0.0) {
            return Err(Error::invalid("SNR inputs need non-negative resistances and positive temperatures"));
        }
        let noise = self.r_sample * self.t_sample + self.r_coil * self.t_coil;
        if !(noise > 0.0) {
            return Err(Error::invalid("SNR noise term is zero"));
        }
        Ok(self.b1 / noise.sqrt())
    }
}

/// SNR of `a` relative to `b`.
pub fn relative_snr(a: &SnrInputs, b: &SnrInputs) -> Result<f64> {
    let vb = b.value()?;
    if vb == 0.0 {
        return Err(Error::invalid("reference SNR is zero"));
    }
    Ok(a.value()? / vb)
}

pub fn celsius_to_kelvin(t: f64) -> f64 {
    t + KELVIN_OFFSET
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{fit_c_off, BiasNetwork};
    use crate::netcore::Z0;

    fn mhz(v: f64) -> Frequency {
        Frequency::mhz(v).unwrap()
    }

    #[test]
    fn series_resistor_dissipation() {
        let m = SwitchModel::aero(1.742, 1e-13, 0.0).unwrap();
        let p = dissipated_power(&m, SwitchState::ON, mhz(300.0), 100.0, Z0).unwrap();
        let closed = 100.0 * 4.0 * Z0 * 1.742 / (2.0 * Z0 + 1.742f64).powi(2);
        assert!((p - closed).abs() < 1e-9);
        assert!((p - 3.37).abs() < 5e-3);
        let lossless = SwitchModel::aero(1e-300, 1e-13, 0.0).unwrap();
        assert!(dissipated_power(&lossless, SwitchState::OFF, mhz(300.0), 100.0, Z0).unwrap() < 1e-9);
    }

    #[test]
    fn temperatures_and_copper() {
        let s = ThermalScenario { incident_power: 100.0, ambient: 22.0, theta: 1.5, duration: 600.0 };
        assert_eq!(steady_temperature(0.0, &s), 22.0);
        assert_eq!(copper_resistance(2.0, 20.0, 20.0), 2.0);
        assert!((copper_resistance(1.0, 20.0, 30.0) - 1.0393).abs() < 1e-12);
        assert!((copper_resistance(1.0, 0.0, 1.0) - 1.00393).abs() < 1e-12);
    }

    #[test]
    fn theta_from_on_point() {
        let f = mhz(300.0);
        let aero = SwitchModel::aero(1.742, fit_c_off(-35.0, f, Z0).unwrap(), 0.0).unwrap();
        let anchor = IsolationAnchor { isolation_db: -35.0, frequency: f };
        let drive = ThermalDrive { frequency: f, incident_power: 100.0, z0: Z0 };
        let c = calibrate_device(&aero, 26.9, 22.0, 22.0, &drive, &anchor).unwrap();
        assert!((c.theta - 4.9 / 3.3657).abs() < 2e-3);
        assert!((c.theta - 1.456).abs() < 5e-3);
        assert_eq!(c.model.r_off(), 0.0);
        assert!(c.exact);
        assert!(calibrate_device(&aero, 21.0, 22.0, 22.0, &drive, &anchor).is_err());
    }

    #[test]
    fn pin_off_inversion() {
        let f = mhz(300.0);
        let bias = BiasNetwork::new(560e-12, 330e-9, 1e-9).unwrap();
        let pin = SwitchModel::pin(2.92, fit_c_off(-20.0, f, Z0).unwrap(), 0.0, bias).unwrap();
        let anchor = IsolationAnchor { isolation_db: -20.0, frequency: f };
        let drive = ThermalDrive { frequency: mhz(500.0), incident_power: 100.0, z0: Z0 };
        let c = calibrate_device(&pin, 29.7, 40.5, 22.0, &drive, &anchor).unwrap();
        assert!(c.exact);
        assert!(c.residual_off.abs() < 1e-6 && c.residual_on.abs() < 1e-9);
        let iso = single_switch_s21(&c.model, SwitchState::OFF, f, Z0).unwrap();
        assert!((iso + 20.0).abs() < 1e-6);
    }

    #[test]
    fn snr_ratios() {
        let a = SnrInputs { b1: 1.0, r_sample: 3.0, t_sample: 310.0, r_coil: 1.0, t_coil: 295.0 };
        assert_eq!(relative_snr(&a, &a).unwrap(), 1.0);
        let base = SnrInputs { r_sample: 0.0, ..a };
        let doubled = SnrInputs { r_coil: 2.0, ..base };
        assert!((relative_snr(&base, &doubled).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let zero = SnrInputs { r_sample: 0.0, r_coil: 0.0, ..a };
        assert!(relative_snr(&a, &zero).is_err());
    }
}
