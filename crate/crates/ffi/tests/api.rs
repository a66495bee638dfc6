use std::ffi::{c_char, CStr, CString};
use std::ptr;

use airmatch::coil::LoadCondition;
use airmatch::models::Models;
use airmatch::netcore::{Complex, Frequency};
use airmatch::scenario::{Scenario, PAPER_DEFAULT};
use airmatch_ffi::*;

struct Session(*mut AmSession);

impl Drop for Session {
    fn drop(&mut self) {
        unsafe { am_session_free(self.0) }
    }
}

fn open() -> Session {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { am_session_new_default(&mut s) }, AmStatus::Ok);
    assert!(!s.is_null());
    Session(s)
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    let mut len = 0;
    assert_eq!(unsafe { am_last_error_message(buf.as_mut_ptr(), buf.len(), &mut len) }, AmStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned()
}

const PF: f64 = 1e-12;

#[test]
fn bank_capacitance_adds_closed_capacitors_to_trimmer() {
    let s = open();
    let caps = [1.0, 1.2, 1.5, 1.8];
    for bits in 0..16u8 {
        let mut c = f64::NAN;
        assert_eq!(unsafe { am_bank_capacitance(s.0, bits, &mut c) }, AmStatus::Ok);
        // bit 3 is c4, bit 0 is c1
        let expected: f64 = 6.0 + (0..4).filter(|i| bits >> i & 1 == 1).map(|i| caps[i]).sum::<f64>();
        assert!((c / PF - expected).abs() < 1e-9, "{bits:04b}: {c}");
    }
}

#[test]
fn standard_s11_matches_lumped_oracle() {
    let s = open();
    let m = Models::fit(&Scenario::paper_default()).unwrap();
    let (c_m, c_t) = (4.3 * PF, 11.7 * PF);
    for bits in [0u8, 0b0101, 0b1111] {
        for mhz in [250.0, 298.0, 330.0] {
            let f = Frequency::mhz(mhz).unwrap();
            let w = f.omega();
            let bank: f64 =
                [1.0, 1.2, 1.5, 1.8].iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, c)| c * PF).sum();
            let z_load = m.load(LoadCondition::Loaded).impedance(f);
            let z_arm = 1.0 / Complex::new(0.0, w * (c_m + bank)) + z_load;
            let z_in = 1.0 / (Complex::new(0.0, w * c_t) + 1.0 / z_arm);
            let g = (z_in - 50.0) / (z_in + 50.0);
            let mut out = AmComplex::default();
            let st = unsafe { am_s11(s.0, AmTechnology::Standard as i32, true, bits, f.hz(), c_m, c_t, &mut out) };
            assert_eq!(st, AmStatus::Ok);
            assert!((Complex::new(out.re, out.im) - g).norm() < 1e-9, "{bits:04b} {mhz}");
        }
    }
}

#[test]
fn negative_trimmers_select_nominal() {
    let s = open();
    let (mut a, mut b) = (AmComplex::default(), AmComplex::default());
    unsafe {
        assert_eq!(am_s11(s.0, AmTechnology::Aero as i32, false, 7, 298e6, -1.0, -1.0, &mut a), AmStatus::Ok);
        assert_eq!(am_s11(s.0, AmTechnology::Aero as i32, false, 7, 298e6, 6.0 * PF, 10.0 * PF, &mut b), AmStatus::Ok);
    }
    assert_eq!(a, b);
}

#[test]
fn q_of_series_rlc_matches_closed_form() {
    // series RLC in front of 50 ohm; the reflection dip half-power band
    // is set by the total loop resistance
    let (f0, r, q_expected) = (300e6, 20.0, 40.0);
    let w0 = 2.0 * std::f64::consts::PI * f0;
    let l = q_expected * r / w0;
    let c = 1.0 / (w0 * w0 * l);
    let n = 4001;
    let freqs: Vec<f64> = (0..n).map(|i| f0 * (0.8 + 0.4 * i as f64 / (n - 1) as f64)).collect();
    let g: Vec<Complex> = freqs
        .iter()
        .map(|&f| {
            let w = 2.0 * std::f64::consts::PI * f;
            let z = Complex::new(r, w * l - 1.0 / (w * c));
            (z - 50.0) / (z + 50.0)
        })
        .collect();
    let re: Vec<f64> = g.iter().map(|x| x.re).collect();
    let im: Vec<f64> = g.iter().map(|x| x.im).collect();
    let mut out = AmResonance::default();
    let st = unsafe { am_q_from_s11(freqs.as_ptr(), re.as_ptr(), im.as_ptr(), n, &mut out) };
    assert_eq!(st, AmStatus::Ok, "{}", last_error());
    assert!((out.fc_hz - f0).abs() < 1e-3 * f0);
    let dip = 20.0 * ((r - 50.0f64).abs() / (r + 50.0)).log10();
    assert!((out.dip_db - dip).abs() < 1e-3, "{} vs {dip}", out.dip_db);
    assert!(out.q > 0.0 && out.df_hz > 0.0);
    assert!((out.q - out.fc_hz / out.df_hz).abs() < 1e-9 * out.q);
}

#[test]
fn tune_agrees_with_library() {
    let s = open();
    let mut r = AmTuneResult::default();
    assert_eq!(unsafe { am_tune(s.0, AmTechnology::Aero as i32, true, 298e6, &mut r) }, AmStatus::Ok);
    let sc = Scenario::paper_default();
    let m = Models::fit(&sc).unwrap();
    let lib = airmatch::experiments::tune(
        &sc,
        &m,
        airmatch::matchnet::Technology::AeroSwitch,
        LoadCondition::Loaded,
        Frequency::mhz(298.0).unwrap(),
    )
    .unwrap();
    assert_eq!(r.best.config, lib.best_config.bits());
    assert_eq!((r.best.c_m, r.best.c_t, r.best.s11_db), (lib.c_m, lib.c_t, lib.s11_db_at_target));
    assert_eq!(r.evaluations, lib.evaluations as u64);
    for (i, c) in r.per_config.iter().enumerate() {
        assert_eq!(usize::from(c.config), i);
        assert!(c.s11_db >= r.best.s11_db);
    }
}

#[test]
fn timing_and_thermal_are_reported() {
    let s = open();
    let mut t = AmTiming::default();
    assert_eq!(unsafe { am_pneumo_timing(s.0, &mut t) }, AmStatus::Ok);
    assert!((t.latency_close - 0.040).abs() <= 0.0016);
    assert!((t.switching_close - 250e-6).abs() <= 10e-6);
    assert!(t.pin_switching_time < 1e-6);
    let mut th = AmThermal::default();
    assert_eq!(unsafe { am_thermal_calibrate(s.0, &mut th) }, AmStatus::Ok);
    assert!(th.pin.exact);
    assert!(th.pin.residual_on.abs() < 1e-6 && th.pin.residual_off.abs() < 1e-6);
    assert!(th.aero.theta > 0.0 && th.pin.theta > 0.0);
}

#[test]
fn scenario_hash_and_buffer_sizing() {
    let s = open();
    let mut len = 0;
    assert_eq!(unsafe { am_scenario_hash(s.0, ptr::null_mut(), 0, &mut len) }, AmStatus::BufferTooSmall);
    assert_eq!(len, 64);
    let mut small = [0 as c_char; 64];
    assert_eq!(unsafe { am_scenario_hash(s.0, small.as_mut_ptr(), 64, &mut len) }, AmStatus::BufferTooSmall);
    let mut buf = [0 as c_char; 65];
    assert_eq!(unsafe { am_scenario_hash(s.0, buf.as_mut_ptr(), 65, ptr::null_mut()) }, AmStatus::Ok);
    let hash = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(hash, Scenario::paper_default().hash);
}

#[test]
fn errors_carry_codes_and_messages() {
    let s = open();
    let mut out = 0.0;
    unsafe {
        assert_eq!(am_bank_capacitance(ptr::null(), 0, &mut out), AmStatus::NullPointer);
        assert!(last_error().contains("session"));
        assert_eq!(am_bank_capacitance(s.0, 0, ptr::null_mut()), AmStatus::NullPointer);
        assert_eq!(am_bank_capacitance(s.0, 16, &mut out), AmStatus::InvalidArgument);
        let mut g = AmComplex::default();
        assert_eq!(am_s11(s.0, 7, true, 0, 298e6, -1.0, -1.0, &mut g), AmStatus::InvalidArgument);
        assert!(last_error().contains("technology"));
        assert_eq!(am_s11(s.0, 0, true, 0, -5.0, -1.0, -1.0, &mut g), AmStatus::InvalidArgument);
        assert_eq!(am_s11(s.0, 0, true, 0, 298e6, f64::NAN, -1.0, &mut g), AmStatus::InvalidArgument);
        // success clears the message
        assert_eq!(am_bank_capacitance(s.0, 3, &mut out), AmStatus::Ok);
        assert_eq!(last_error(), "");
    }
}

#[test]
fn bad_scenarios_are_rejected() {
    let text = CString::new(PAPER_DEFAULT.replace("c1 = \"1.0 pF\"", "c1 = \"-1 pF\"")).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { am_session_new_from_toml(text.as_ptr(), &mut s) }, AmStatus::Scenario);
    assert!(s.is_null());
    assert!(last_error().contains("bank.c1"));
    assert_eq!(unsafe { am_session_new_from_toml(ptr::null(), &mut s) }, AmStatus::NullPointer);
    let good = CString::new(PAPER_DEFAULT).unwrap();
    assert_eq!(unsafe { am_session_new_from_toml(good.as_ptr(), ptr::null_mut()) }, AmStatus::NullPointer);
    assert_eq!(unsafe { am_session_new_from_toml(good.as_ptr(), &mut s) }, AmStatus::Ok);
    Session(s);
}

#[test]
fn sessions_are_usable_across_threads() {
    let s = open();
    let addr = s.0 as usize;
    let caps: Vec<f64> = std::thread::scope(|scope| {
        (0..4u8)
            .map(|bits| {
                scope.spawn(move || {
                    let mut c = 0.0;
                    assert_eq!(unsafe { am_bank_capacitance(addr as *const AmSession, bits, &mut c) }, AmStatus::Ok);
                    c
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .map(|h| h.join().unwrap())
            .collect()
    });
    assert_eq!(caps.len(), 4);
    assert_eq!(caps[0], 6.0 * PF);
}
