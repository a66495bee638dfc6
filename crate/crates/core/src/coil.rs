//! Series R-L-C model of the loop coil used as the matching load.

use crate::error::{Error, Result};
use crate::netcore::{Complex, Frequency, Impedance};

/// Ratio of loaded to unloaded series resistance used when only one
/// condition was measured (146.5 / 30.8).
pub const DEFAULT_LOADING_RATIO: f64 = 146.5 / 30.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LoadCondition {
    Unloaded,
    Loaded,
}

impl LoadCondition {
    pub const BOTH: [LoadCondition; 2] = [LoadCondition::Unloaded, LoadCondition::Loaded];

    pub fn label(self) -> &'static str {
        match self {
            LoadCondition::Unloaded => "unloaded",
            LoadCondition::Loaded => "loaded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopCoilModel {
    inductance: f64,
    r_unloaded: f64,
    r_loaded: f64,
    c_dist: f64,
}

/// Result of inverting one measured impedance point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilFit {
    pub inductance: f64,
    pub resistance: f64,
}

impl LoopCoilModel {
    pub fn new(inductance: f64, r_unloaded: f64, r_loaded: f64, c_dist: f64) -> Result<Self> {
        for (v, name) in [(inductance, "inductance"), (c_dist, "c_dist")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("coil {name} must be positive, got {v}")));
            }
        }
        if !(r_unloaded.is_finite() && r_loaded.is_finite() && 0.0 < r_unloaded && r_unloaded < r_loaded) {
            return Err(Error::invalid(format!(
                "coil resistances need 0 < r_unloaded < r_loaded, got {r_unloaded} and {r_loaded}"
            )));
        }
        Ok(Self { inductance, r_unloaded, r_loaded, c_dist })
    }

    /// Builds the model from one measured point. The other condition's
    /// resistance follows from `loading_ratio = r_loaded / r_unloaded`.
    pub fn from_measurement(
        z_meas: Impedance,
        f: Frequency,
        c_dist: f64,
        measured: LoadCondition,
        loading_ratio: f64,
    ) -> Result<Self> {
        if !(loading_ratio.is_finite() && loading_ratio > 1.0) {
            return Err(Error::invalid(format!("loading ratio must exceed 1, got {loading_ratio}")));
        }
        let fit = fit_coil(z_meas, f, c_dist)?;
        let (r_unloaded, r_loaded) = match measured {
            LoadCondition::Loaded => (fit.resistance / loading_ratio, fit.resistance),
            LoadCondition::Unloaded => (fit.resistance, fit.resistance * loading_ratio),
        };
        Self::new(fit.inductance, r_unloaded, r_loaded, c_dist)
    }

    pub fn inductance(&self) -> f64 {
        self.inductance
    }
    pub fn c_dist(&self) -> f64 {
        self.c_dist
    }
    pub fn resistance(&self, cond: LoadCondition) -> f64 {
        match cond {
            LoadCondition::Loaded => self.r_loaded,
            LoadCondition::Unloaded => self.r_unloaded,
        }
    }

    /// Self-resonant frequency of the bare coil.
    pub fn self_resonance(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * (self.inductance * self.c_dist).sqrt())
    }

    pub fn impedance(&self, cond: LoadCondition, f: Frequency) -> Impedance {
        coil_impedance(self, cond, f)
    }
}

pub fn coil_impedance(model: &LoopCoilModel, cond: LoadCondition, f: Frequency) -> Impedance {
    let w = f.omega();
    Complex::new(model.resistance(cond), w * model.inductance - 1.0 / (w * model.c_dist))
}

pub fn fit_coil(z_meas: Impedance, f: Frequency, c_dist: f64) -> Result<CoilFit> {
    if !(z_meas.re.is_finite() && z_meas.im.is_finite()) {
        return Err(Error::NonFinite("measured coil impedance"));
    }
    if !(c_dist.is_finite() && c_dist > 0.0) {
        return Err(Error::invalid(format!("c_dist must be positive, got {c_dist}")));
    }
    let w = f.omega();
    let xl = z_meas.im + 1.0 / (w * c_dist);
    if xl <= 0.0 {
        return Err(Error::NonPhysicalFit(format!("inductive reactance {xl:.3} ohm is not positive")));
    }
    if z_meas.re <= 0.0 {
        return Err(Error::NonPhysicalFit(format!("coil resistance {} ohm is not positive", z_meas.re)));
    }
    Ok(CoilFit { inductance: xl / w, resistance: z_meas.re })
}
