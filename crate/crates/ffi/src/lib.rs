//! C ABI over the airmatch simulator.
//!
//! Every call returns an [`AmStatus`]. On failure the message is kept per
//! thread and can be copied out with [`am_last_error_message`]. Results
//! go through caller-provided out pointers; nothing returned needs to be
//! freed except an [`AmSession`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use airmatch::coil::LoadCondition;
use airmatch::experiments;
use airmatch::matchnet::{bank_capacitance, network_s11, SweepResult, SwitchConfig, Technology};
use airmatch::models::Models;
use airmatch::netcore::{Complex, Frequency};
use airmatch::pneumo::standard_script;
use airmatch::qfactor::q_from_s11;
use airmatch::scenario::Scenario;
use airmatch::Error;

/// Result code of every `am_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Scenario = 3,
    Numeric = 4,
    Fit = 5,
    Measurement = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Values for the `technology` argument.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmTechnology {
    Aero = 0,
    Pin = 1,
    Standard = 2,
}

/// Checked conversion; technology arguments cross the ABI as plain
/// integers so an out-of-range value is an error rather than undefined.
fn to_technology(t: i32) -> Result<Technology, Failure> {
    match t {
        x if x == AmTechnology::Aero as i32 => Ok(Technology::AeroSwitch),
        x if x == AmTechnology::Pin as i32 => Ok(Technology::PinDiode),
        x if x == AmTechnology::Standard as i32 => Ok(Technology::Standard),
        _ => Err(Failure(AmStatus::InvalidArgument, format!("unknown technology {t}"))),
    }
}

/// Scenario plus the device models fitted from it.
pub struct AmSession {
    scenario: Scenario,
    models: Models,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmConfigOptimum {
    pub config: u8,
    pub c_m: f64,
    pub c_t: f64,
    pub s11_db: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmTuneResult {
    pub best: AmConfigOptimum,
    pub evaluations: u64,
    /// Indexed by configuration bits.
    pub per_config: [AmConfigOptimum; 16],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmResonance {
    pub fc_hz: f64,
    pub df_hz: f64,
    pub q: f64,
    pub dip_db: f64,
}

/// Mean timing of the standard close/open script, in seconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmTiming {
    pub latency_close: f64,
    pub latency_open: f64,
    pub switching_close: f64,
    pub switching_open: f64,
    pub pin_switching_time: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmDeviceThermal {
    /// Thermal resistance in K/W.
    pub theta: f64,
    pub r_off: f64,
    pub c_off: f64,
    pub p_on: f64,
    pub p_off: f64,
    pub residual_on: f64,
    pub residual_off: f64,
    pub exact: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmThermal {
    pub aero: AmDeviceThermal,
    pub pin: AmDeviceThermal,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AmStatus {
    match e {
        Error::InvalidArgument(_) | Error::TrimmerOutOfRange(_) => AmStatus::InvalidArgument,
        Error::NonFinite(_) | Error::DegenerateNetwork(_) | Error::ReflectionPole => AmStatus::Numeric,
        Error::NonPhysicalFit(_) | Error::IsolationTooShallow(_) | Error::InconsistentCalibration(_) => AmStatus::Fit,
        Error::ResonanceOutOfBand(_) | Error::BandwidthUnresolved(_) | Error::MeasurementInvalid(_) => {
            AmStatus::Measurement
        }
        Error::Scenario { .. } | Error::Validation { .. } => AmStatus::Scenario,
        Error::Io { .. } => AmStatus::Io,
    }
}

struct Failure(AmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Outcome) -> AmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AmStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AmStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(AmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn session<'a>(s: *const AmSession) -> Result<&'a AmSession, Failure> {
    s.as_ref().ok_or_else(|| null("session"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn config(bits: u8) -> Result<SwitchConfig, Failure> {
    Ok(SwitchConfig::new(bits)?)
}

fn condition(loaded: bool) -> LoadCondition {
    if loaded {
        LoadCondition::Loaded
    } else {
        LoadCondition::Unloaded
    }
}

fn open(scenario: Scenario, out: *mut *mut AmSession) -> Outcome {
    let models = Models::fit(&scenario)?;
    let boxed = Box::into_raw(Box::new(AmSession { scenario, models }));
    // SAFETY: caller guarantees `out` points to writable storage when non-null.
    unsafe {
        if let Err(e) = write(out, boxed) {
            drop(Box::from_raw(boxed));
            return Err(e);
        }
    }
    Ok(())
}

/// Opens a session on the bundled default scenario.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn am_session_new_default(out: *mut *mut AmSession) -> AmStatus {
    guard(|| open(Scenario::paper_default(), out))
}

/// Opens a session on a scenario given as TOML text.
///
/// # Safety
/// `toml` must be null or a nul-terminated string; `out` as for
/// [`am_session_new_default`].
#[no_mangle]
pub unsafe extern "C" fn am_session_new_from_toml(toml: *const c_char, out: *mut *mut AmSession) -> AmStatus {
    guard(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| Failure(AmStatus::InvalidArgument, "scenario text is not UTF-8".into()))?;
        open(Scenario::from_str_named(text, "<ffi>")?, out)
    })
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer returned by an `am_session_new_*` call,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn am_session_free(s: *mut AmSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Copies `src` with a terminating nul into `buf`, reporting the length
/// without the nul in `len_out` either way.
unsafe fn copy_string(src: &[u8], buf: *mut c_char, cap: usize, len_out: *mut usize) -> Outcome {
    if !len_out.is_null() {
        len_out.write(src.len());
    }
    if buf.is_null() || cap <= src.len() {
        return Err(Failure(AmStatus::BufferTooSmall, format!("need {} bytes", src.len() + 1)));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr().cast::<c_char>(), buf, src.len());
    buf.add(src.len()).write(0);
    Ok(())
}

/// Hex SHA-256 of the scenario text.
///
/// # Safety
/// `buf` must be null or hold `cap` bytes; `len_out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_scenario_hash(
    s: *const AmSession,
    buf: *mut c_char,
    cap: usize,
    len_out: *mut usize,
) -> AmStatus {
    guard(|| copy_string(session(s)?.scenario.hash.as_bytes(), buf, cap, len_out))
}

/// Message of the last failed call on this thread. Writes an empty
/// string when the last call succeeded.
///
/// # Safety
/// As for [`am_scenario_hash`].
#[no_mangle]
pub unsafe extern "C" fn am_last_error_message(buf: *mut c_char, cap: usize, len_out: *mut usize) -> AmStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().as_ref().map(|c| c.as_bytes().to_vec())).unwrap_or_default();
    // not routed through `guard`, which would clear the message
    match copy_string(&msg, buf, cap, len_out) {
        Ok(()) => AmStatus::Ok,
        Err(Failure(status, _)) => status,
    }
}

/// Series-arm capacitance of `config_bits` in farads with ideal
/// switches: the nominal `c_m` plus every closed bank capacitor.
///
/// # Safety
/// `s` must be a live session; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_bank_capacitance(s: *const AmSession, config_bits: u8, out: *mut f64) -> AmStatus {
    guard(|| {
        let s = session(s)?;
        write(out, bank_capacitance(config(config_bits)?, &s.models.spec(Technology::Standard)))
    })
}

/// Input reflection of the matching network with trimmers `c_m`, `c_t`
/// in farads. Pass a negative trimmer value to use the scenario nominal.
///
/// # Safety
/// `s` must be a live session; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_s11(
    s: *const AmSession,
    technology: i32,
    loaded: bool,
    config_bits: u8,
    frequency_hz: f64,
    c_m: f64,
    c_t: f64,
    out: *mut AmComplex,
) -> AmStatus {
    guard(|| {
        let s = session(s)?;
        let nominal = s.models.spec(to_technology(technology)?);
        let spec = nominal.with_trimmers(
            if c_m < 0.0 { nominal.c_m.capacitance } else { c_m },
            if c_t < 0.0 { nominal.c_t.capacitance } else { c_t },
        )?;
        let g =
            network_s11(&spec, config(config_bits)?, &s.models.load(condition(loaded)), Frequency::new(frequency_hz)?)?;
        write(out, AmComplex { re: g.re, im: g.im })
    })
}

/// Trimmer search over all sixteen configurations at `target_hz`.
///
/// # Safety
/// `s` must be a live session; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_tune(
    s: *const AmSession,
    technology: i32,
    loaded: bool,
    target_hz: f64,
    out: *mut AmTuneResult,
) -> AmStatus {
    guard(|| {
        let s = session(s)?;
        let r = experiments::tune(
            &s.scenario,
            &s.models,
            to_technology(technology)?,
            condition(loaded),
            Frequency::new(target_hz)?,
        )?;
        let mut res = AmTuneResult {
            best: AmConfigOptimum { config: r.best_config.bits(), c_m: r.c_m, c_t: r.c_t, s11_db: r.s11_db_at_target },
            evaluations: r.evaluations as u64,
            ..Default::default()
        };
        for c in &r.per_config_best {
            res.per_config[usize::from(c.config.bits())] =
                AmConfigOptimum { config: c.config.bits(), c_m: c.c_m, c_t: c.c_t, s11_db: c.s11_db };
        }
        write(out, res)
    })
}

/// Resonance and Q of a reflection sweep given as `n` frequencies and
/// the real and imaginary parts of S11.
///
/// # Safety
/// `freqs_hz`, `re` and `im` must each point to `n` readable doubles;
/// `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_q_from_s11(
    freqs_hz: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut AmResonance,
) -> AmStatus {
    guard(|| {
        if freqs_hz.is_null() || re.is_null() || im.is_null() {
            return Err(null("sweep array"));
        }
        let (f, re, im) = (
            std::slice::from_raw_parts(freqs_hz, n),
            std::slice::from_raw_parts(re, n),
            std::slice::from_raw_parts(im, n),
        );
        let freqs = f.iter().map(|&h| Frequency::new(h)).collect::<airmatch::Result<Vec<_>>>()?;
        let s11 = re.iter().zip(im).map(|(&a, &b)| Complex::new(a, b)).collect();
        let r = q_from_s11(&SweepResult::from_reflection(freqs, s11)?)?;
        write(out, AmResonance { fc_hz: r.fc.hz(), df_hz: r.df, q: r.q, dip_db: r.dip_db })
    })
}

/// Air control timing on a standard close/open script.
///
/// # Safety
/// `s` must be a live session; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_pneumo_timing(s: *const AmSession, out: *mut AmTiming) -> AmStatus {
    guard(|| {
        let s = session(s)?;
        let params = experiments::timing_params(&s.scenario)?;
        let t = airmatch::pneumo::measure_timing(&standard_script(0), params, s.scenario.pneumo.dt)?;
        let pin = experiments::pin_reference(&s.scenario).switching_time()?;
        write(
            out,
            AmTiming {
                latency_close: t.t_lr,
                latency_open: t.t_lf,
                switching_close: t.t_r,
                switching_open: t.t_f,
                pin_switching_time: pin,
            },
        )
    })
}

/// Thermal calibration of both switch technologies.
///
/// # Safety
/// `s` must be a live session; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn am_thermal_calibrate(s: *const AmSession, out: *mut AmThermal) -> AmStatus {
    guard(|| {
        let s = session(s)?;
        let cal = experiments::thermal(&s.scenario, &s.models)?;
        let dev = |d: &airmatch::thermo::DeviceCalibration| AmDeviceThermal {
            theta: d.theta,
            r_off: d.model.r_off(),
            c_off: d.model.c_off(),
            p_on: d.p_on,
            p_off: d.p_off,
            residual_on: d.residual_on,
            residual_off: d.residual_off,
            exact: d.exact,
        };
        write(out, AmThermal { aero: dev(&cal.aero), pin: dev(&cal.pin) })
    })
}
