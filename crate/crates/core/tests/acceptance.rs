//! Acceptance checks against the bundled default scenario. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::time::Instant;

use airmatch::coil::LoadCondition;
use airmatch::components::{single_switch_s21, SwitchState};
use airmatch::experiments::{self, arc_is_monotone, cluster_diameter, trace};
use airmatch::matchnet::{SweepResult, SwitchConfig, Technology};
use airmatch::models::Models;
use airmatch::netcore::{
    abcd_to_s, cascade_all, gamma_from_z, series_element, shunt_element, Abcd, Complex, Frequency,
};
use airmatch::pneumo::{
    interlock_holds, measure_timing, standard_script, BounceConfig, ChannelInput, PneumaticChannel,
};
use airmatch::qfactor::q_from_s11;
use airmatch::scenario::Scenario;
use airmatch::tuner::grid_oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn setup() -> Result<(Scenario, Models), String> {
    let s = Scenario::paper_default();
    let m = Models::fit(&s).map_err(|e| e.to_string())?;
    Ok((s, m))
}

fn capacitance_column() -> Check {
    let start = Instant::now();
    let (s, m) = setup()?;
    let out = experiments::qtable(&s, &m, None).map_err(|e| e.to_string())?;
    let csv = out.table().to_csv("qtable", &s.hash).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let expected = [
        "6.0", "7.0", "7.2", "8.2", "7.5", "8.5", "8.7", "9.7", "7.8", "8.8", "9.0", "10.0", "9.3", "10.3", "10.5",
        "11.5",
    ];
    let got: Vec<String> = csv.lines().skip(2).map(|l| l.split(',').nth(1).unwrap_or("").to_string()).collect();
    ensure(got == expected, format!("C column {got:?}"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!("16/16 values exact in {elapsed:.3} s"))
}

fn loss_model_fits() -> Check {
    let (s, m) = setup()?;
    let mut notes = Vec::new();
    for (name, sw, sec) in [("aeroswitch", m.aero, &s.aeroswitch), ("pin", m.pin, &s.pin)] {
        let f = Frequency::mhz(300.0).unwrap();
        let il = single_switch_s21(&sw, SwitchState::ON, f, s.z0).map_err(|e| e.to_string())?;
        let iso = single_switch_s21(&sw, SwitchState::OFF, f, s.z0).map_err(|e| e.to_string())?;
        ensure((il - sec.insertion_loss_db).abs() <= 0.01, format!("{name} insertion loss {il:.4} dB"))?;
        ensure((iso - sec.isolation_db).abs() <= 0.5, format!("{name} isolation {iso:.3} dB"))?;
        notes.push(format!("{name} {il:.3}/{iso:.2} dB"));
    }
    Ok(notes.join(", "))
}

/// Coupling ratio R/z0 that makes the dip-relative edges fall where the
/// reactance equals R, so extracted Q equals the circuit Q.
fn matched_ratio() -> f64 {
    let k = 10f64.powf(0.3);
    let h = |r: f64| {
        let g = (r - 1.0) / (r + 1.0);
        (k - 1.0) * (r - 1.0).powi(2) - r * r * (1.0 - k * g * g)
    };
    let (mut lo, mut hi) = (0.05, 0.99);
    assert!(h(lo) * h(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(lo) * h(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn q_extraction_oracle() -> Check {
    let start = Instant::now();
    let z0 = 50.0;
    let r = matched_ratio();
    let f0 = 300e6;
    let w0 = 2.0 * std::f64::consts::PI * f0;
    let mut notes = Vec::new();
    for q in [10.0, 50.0, 150.0] {
        let res = r * z0;
        let l = q * res / w0;
        let c = 1.0 / (w0 * w0 * l);
        let n = 2001;
        let (a, b) = (f0 * (1.0 - 2.0 / q), f0 * (1.0 + 2.0 / q));
        let freqs: Vec<Frequency> =
            (0..n).map(|i| Frequency::new(a + (b - a) * i as f64 / (n - 1) as f64).unwrap()).collect();
        let s11 = freqs
            .iter()
            .map(|f| {
                let w = f.omega();
                gamma_from_z(Complex::new(res, w * l - 1.0 / (w * c)), z0)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let sweep = SweepResult::from_reflection(freqs, s11).map_err(|e| e.to_string())?;
        let got = q_from_s11(&sweep).map_err(|e| e.to_string())?.q;
        let err = (got - q).abs() / q;
        ensure(err < 0.01, format!("Q {q}: extracted {got:.4}"))?;
        notes.push(format!("{q}->{got:.3}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 5.0, format!("took {elapsed:.3} s"))?;
    Ok(notes.join(", "))
}

fn q_ordering() -> Check {
    let (s, m) = setup()?;
    let out = experiments::qtable(&s, &m, None).map_err(|e| e.to_string())?;
    // technologies are standard, pin, aero
    let mut wins = 0;
    for row in &out.rows {
        for j in 0..2 {
            if row.q[2][j] > row.q[1][j] {
                wins += 1;
            }
        }
    }
    ensure(wins == 32, format!("aero above pin in {wins}/32"))?;
    let mut sorted = out.rows.clone();
    sorted.sort_by_key(|r| r.c_tenths);
    for (k, name) in ["standard", "pin", "aeroswitch"].iter().enumerate() {
        let loaded: Vec<f64> = sorted.iter().map(|r| r.q[k][1]).collect();
        ensure(loaded.windows(2).all(|w| w[1] < w[0]), format!("{name} loaded Q not decreasing: {loaded:?}"))?;
    }
    Ok("32/32 comparisons, loaded Q decreasing for all technologies".into())
}

fn tuner_vs_grid() -> Check {
    let (s, m) = setup()?;
    let problem = m.tuner_problem(&s, Technology::AeroSwitch, LoadCondition::Loaded, s.tuner.target);
    let start = Instant::now();
    let a = airmatch::tuner::tune_full(&problem).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let b = airmatch::tuner::tune_full(&problem).map_err(|e| e.to_string())?;
    ensure(a == b, "tune_full differs between runs")?;
    ensure(a.s11_db_at_target <= -25.0, format!("best {:.3} dB", a.s11_db_at_target))?;
    let mut oracle = f64::INFINITY;
    for config in SwitchConfig::all() {
        oracle = oracle.min(grid_oracle(&problem, config, s.tuner.oracle_grid).map_err(|e| e.to_string())?.s11_db);
    }
    ensure(a.s11_db_at_target <= oracle + 0.5, format!("tuner {:.3} dB vs grid {oracle:.3} dB", a.s11_db_at_target))?;
    ensure(elapsed < 60.0, format!("took {elapsed:.3} s"))?;
    Ok(format!("best {} at {:.2} dB, grid {oracle:.2} dB, {elapsed:.3} s", a.best_config, a.s11_db_at_target))
}

fn smith_arcs() -> Check {
    let (s, m) = setup()?;
    let techs = experiments::QTABLE_TECHNOLOGIES;
    let pts = experiments::smith(&s, &m, &techs, None).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for tech in techs {
        let name = experiments::technology_label(tech);
        let un = trace(&pts, tech, LoadCondition::Unloaded);
        let lo = trace(&pts, tech, LoadCondition::Loaded);
        ensure(un.len() == 16 && lo.len() == 16, "missing points")?;
        ensure(arc_is_monotone(&un), format!("{name} unloaded arc not monotone"))?;
        ensure(arc_is_monotone(&lo), format!("{name} loaded arc not monotone"))?;
        let (du, dl) = (cluster_diameter(&un), cluster_diameter(&lo));
        ensure(du > dl, format!("{name} diameters unloaded {du:.4} loaded {dl:.4}"))?;
        notes.push(format!("{name} {du:.3}>{dl:.3}"));
    }
    Ok(notes.join(", "))
}

fn pneumatic_timing() -> Check {
    let s = Scenario::paper_default();
    let params = experiments::timing_params(&s).map_err(|e| e.to_string())?;
    let t = measure_timing(&standard_script(0), params, s.pneumo.dt).map_err(|e| e.to_string())?;
    for (name, v) in [("rise latency", t.t_lr), ("fall latency", t.t_lf)] {
        ensure((v - 0.040).abs() <= 0.005, format!("{name} {v}"))?;
    }
    for (name, v) in [("rise time", t.t_r), ("fall time", t.t_f)] {
        ensure((v - 250e-6).abs() <= 50e-6, format!("{name} {v}"))?;
    }
    let pin = experiments::pin_reference(&s).switching_time().map_err(|e| e.to_string())?;
    ensure(pin < 200e-9, format!("pin {pin}"))?;
    Ok(format!(
        "latency {:.2}/{:.2} ms, switching {:.0}/{:.0} us, pin {:.1} ns",
        t.t_lr * 1e3,
        t.t_lf * 1e3,
        t.t_r * 1e6,
        t.t_f * 1e6,
        pin * 1e9
    ))
}

fn pneumatic_safety() -> Check {
    let s = Scenario::paper_default();
    let params = experiments::timing_params(&s).map_err(|e| e.to_string())?;
    let steps = 100_000;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounce = BounceConfig { overpressure: seed % 2 == 1, seed };
        let mut ch = PneumaticChannel::new(params, s.pneumo.dt, bounce).map_err(|e| e.to_string())?;
        let mut input = ChannelInput::Neutral;
        for k in 0..steps {
            // mostly held inputs with occasional changes, some on every step
            if rng.random_bool(if seed % 10 == 0 { 1.0 } else { 0.002 }) {
                input = [ChannelInput::Neutral, ChannelInput::Pressurize, ChannelInput::Vacuum][rng.random_range(0..3)];
            }
            ch.step(input);
            ensure(interlock_holds(&ch), format!("seed {seed} step {k}: interlock violated"))?;
        }
    }
    Ok(format!("100 seeds x {steps} steps"))
}

fn thermal_round_trip() -> Check {
    let (s, m) = setup()?;
    let cal = experiments::thermal(&s, &m).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    for (name, dev) in [("aeroswitch", &cal.aero), ("pin", &cal.pin)] {
        for (state, r) in [("on", dev.residual_on), ("off", dev.residual_off)] {
            if r.abs() > 0.5 {
                bad.push(format!("{name} {state} residual {r:.3} C"));
            }
        }
    }
    ensure(cal.pin.p_off > cal.aero.p_off, "pin OFF dissipation not above aeroswitch")?;
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok(format!("OFF dissipation pin {:.2} W > aeroswitch {:.2} W", cal.pin.p_off, cal.aero.p_off))
}

fn random_network(rng: &mut ChaCha8Rng, lossless: bool) -> Vec<Abcd> {
    let n = rng.random_range(1..=6);
    (0..n)
        .map(|_| {
            let r = if lossless { 0.0 } else { rng.random_range(0.0..200.0) };
            let z = Complex::new(r, rng.random_range(-500.0..500.0));
            if rng.random_bool(0.5) {
                series_element(z).unwrap()
            } else {
                shunt_element(1.0 / (z + Complex::new(if lossless { 0.0 } else { 1e-3 }, 1.0))).unwrap()
            }
        })
        .collect()
}

fn network_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let lossless = i % 2 == 1;
        let chain = random_network(&mut rng, lossless);
        let m = cascade_all(chain.iter()).map_err(|e| e.to_string())?;
        let det_err = (m.determinant() - 1.0).norm();
        let sp = abcd_to_s(&m, 50.0).map_err(|e| e.to_string())?;
        let power = sp.s11.norm_sqr() + sp.s21.norm_sqr();
        worst.0 = worst.0.max(det_err);
        ensure(det_err <= 1e-9, format!("network {i}: det error {det_err:e}"))?;
        ensure(power <= 1.0 + 1e-9, format!("network {i}: power {power}"))?;
        if lossless {
            worst.2 = worst.2.max((power - 1.0).abs());
            ensure((power - 1.0).abs() <= 1e-9, format!("network {i}: lossless power {power}"))?;
        } else {
            worst.1 = worst.1.max(power - 1.0);
        }
    }
    Ok(format!("worst det error {:.1e}, lossless deviation {:.1e}", worst.0, worst.2))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 10] = [
        ("capacitance column", capacitance_column),
        ("loss-model fits", loss_model_fits),
        ("Q extraction oracle", q_extraction_oracle),
        ("Q ordering", q_ordering),
        ("tuner vs grid oracle", tuner_vs_grid),
        ("Smith arcs", smith_arcs),
        ("pneumatic timing", pneumatic_timing),
        ("pneumatic safety", pneumatic_safety),
        ("thermal round trip", thermal_round_trip),
        ("network invariants", network_invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(note) => println!("PASS {:2} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
