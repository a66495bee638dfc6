//! Turns a scenario into fitted component models.

use crate::coil::{LoadCondition, LoopCoilModel};
use crate::components::{
    calibrate_c_off, calibrate_r_on, fit_c_off_with_loss, fit_r_on, BiasNetwork, CapacitorModel, SwitchKind,
    SwitchModel,
};
use crate::error::Result;
use crate::matchnet::{fit_pcb_coupling, ArrayBoard, CapacitorBank, Load, MatchNetworkSpec, NodeOrder, Technology};
use crate::netcore::{Complex, Frequency};
use crate::scenario::{Scenario, SwitchSection};
use crate::tuner::{Range, TunerProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Models {
    pub z0: f64,
    pub order: NodeOrder,
    pub coil: LoopCoilModel,
    pub bank: CapacitorBank,
    pub c_m: CapacitorModel,
    pub c_t: CapacitorModel,
    pub c_m_range: Range,
    pub c_t_range: Range,
    pub aero: SwitchModel,
    pub pin: SwitchModel,
    /// Trace coupling across the switch board, fitted on the AeroSwitch
    /// board and shared by both layouts.
    pub pcb_coupling: CapacitorModel,
}

/// Closed-form seed, then refinement on the full one-switch board for every
/// parameter the scenario does not pin.
fn fit_switch(kind: SwitchKind, sec: &SwitchSection, bias: Option<BiasNetwork>, z0: f64) -> Result<SwitchModel> {
    let f = sec.fit_frequency;
    let r_off = sec.r_off.unwrap_or(0.0);
    let r_on = match sec.r_on {
        Some(r) => r,
        None => fit_r_on(sec.insertion_loss_db, z0)?.max(1e-6),
    };
    let c_off = match sec.c_off {
        Some(c) => c,
        None => fit_c_off_with_loss(sec.isolation_db, f, z0, r_off)?,
    };
    let mut m = SwitchModel::new(kind, r_on, c_off, r_off, bias)?;
    if sec.r_on.is_none() {
        m = calibrate_r_on(&m, sec.insertion_loss_db, f, z0)?;
    }
    if sec.c_off.is_none() {
        m = calibrate_c_off(&m, sec.isolation_db, f, z0)?;
    }
    Ok(m)
}

impl Models {
    pub fn fit(s: &Scenario) -> Result<Self> {
        let coil = LoopCoilModel::from_measurement(
            Complex::new(s.coil.impedance_re, s.coil.impedance_im),
            s.coil.frequency,
            s.coil.c_dist,
            s.coil.measured,
            s.coil.loading_ratio,
        )?;
        let mut caps = [CapacitorModel::ideal(1e-12)?; 4];
        for (c, &v) in caps.iter_mut().zip(&s.bank) {
            *c = CapacitorModel::new(v, s.bank_esr)?;
        }
        let bias = BiasNetwork::new(s.bias.dc_block, s.bias.choke, s.bias.decoupling)?;
        let aero = fit_switch(SwitchKind::AeroSwitch, &s.aeroswitch, None, s.z0)?;
        let pin = fit_switch(SwitchKind::PinDiode, &s.pin, Some(bias), s.z0)?;
        let pcb_coupling = fit_pcb_coupling(&aero, s.array_isolation_db, s.array_frequency, s.z0)?;
        Ok(Self {
            z0: s.z0,
            order: s.order,
            coil,
            bank: CapacitorBank::new(caps),
            c_m: CapacitorModel::ideal(s.trimmers.c_m)?,
            c_t: CapacitorModel::ideal(s.trimmers.c_t)?,
            c_m_range: Range::new(s.trimmers.c_m_range.0, s.trimmers.c_m_range.1)?,
            c_t_range: Range::new(s.trimmers.c_t_range.0, s.trimmers.c_t_range.1)?,
            aero,
            pin,
            pcb_coupling,
        })
    }

    pub fn switch(&self, tech: Technology) -> Option<SwitchModel> {
        match tech {
            Technology::AeroSwitch => Some(self.aero),
            Technology::PinDiode => Some(self.pin),
            Technology::Standard => None,
        }
    }

    /// Network at the nominal trimmer values.
    pub fn spec(&self, tech: Technology) -> MatchNetworkSpec {
        MatchNetworkSpec { bank: self.bank, c_m: self.c_m, c_t: self.c_t, switch: self.switch(tech), order: self.order }
    }

    pub fn load(&self, condition: LoadCondition) -> Load {
        Load::Coil { model: self.coil, condition }
    }

    pub fn array_board(&self, kind: SwitchKind) -> ArrayBoard {
        let switch = match kind {
            SwitchKind::AeroSwitch => self.aero,
            SwitchKind::PinDiode => self.pin,
        };
        ArrayBoard { switch, pcb_coupling: self.pcb_coupling }
    }

    pub fn tuner_problem(
        &self,
        s: &Scenario,
        tech: Technology,
        condition: LoadCondition,
        f_target: Frequency,
    ) -> TunerProblem {
        TunerProblem {
            spec: self.spec(tech),
            load: self.load(condition),
            f_target,
            c_m_range: self.c_m_range,
            c_t_range: self.c_t_range,
            tolerance_db: s.tuner.tolerance_db,
            max_evaluations: s.tuner.max_evaluations,
            seed_grid: s.tuner.seed_grid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{single_switch_s21, SwitchState};

    #[test]
    fn default_fits_hit_their_anchors() {
        let s = Scenario::paper_default();
        let m = Models::fit(&s).unwrap();
        for (sw, sec) in [(m.aero, &s.aeroswitch), (m.pin, &s.pin)] {
            let f = sec.fit_frequency;
            let il = single_switch_s21(&sw, SwitchState::ON, f, s.z0).unwrap();
            let iso = single_switch_s21(&sw, SwitchState::OFF, f, s.z0).unwrap();
            assert!((il - sec.insertion_loss_db).abs() < 1e-6, "{il}");
            assert!((iso - sec.isolation_db).abs() < 1e-6, "{iso}");
        }
        assert!((m.coil.inductance() - 241.750e-9).abs() < 1e-12);
    }

    #[test]
    fn overrides_are_kept() {
        let mut s = Scenario::paper_default();
        s.aeroswitch.r_on = Some(2.0);
        s.aeroswitch.c_off = Some(0.1e-12);
        let m = Models::fit(&s).unwrap();
        assert_eq!(m.aero.r_on(), 2.0);
        assert_eq!(m.aero.c_off(), 0.1e-12);
    }
}
