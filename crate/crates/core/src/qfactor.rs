//! Resonance location and Q = fc / df extraction from reflection sweeps.

use crate::error::{Error, Result};
use crate::matchnet::SweepResult;
use crate::netcore::{magnitude_db, Frequency};

/// Lowest dB value used when a sample is an exact null.
const DB_FLOOR: f64 = -300.0;

/// Minimum number of samples inside the measured band.
pub const MIN_BAND_POINTS: usize = 5;

/// Level that defines the edges of the resonance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BandReference {
    /// |S11| rises 3 dB above the dip minimum.
    #[default]
    DipRelative,
    /// Absorbed power `1 - |S11|^2` falls to half its peak.
    HalfAbsorbedPower,
}

impl BandReference {
    pub fn label(self) -> &'static str {
        match self {
            BandReference::DipRelative => "dip-relative",
            BandReference::HalfAbsorbedPower => "half-absorbed-power",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceSummary {
    pub fc: Frequency,
    pub df: f64,
    pub q: f64,
    pub dip_db: f64,
}

fn db_values(sweep: &SweepResult) -> Vec<f64> {
    sweep.s11.iter().map(|g| magnitude_db(*g).max(DB_FLOOR)).collect()
}

fn discrete_minimum(sweep: &SweepResult, db: &[f64]) -> Result<usize> {
    if sweep.len() < 3 {
        return Err(Error::invalid("resonance search needs at least 3 samples"));
    }
    let i = (0..db.len()).min_by(|&a, &b| db[a].total_cmp(&db[b])).expect("non-empty");
    if i == 0 || i == db.len() - 1 {
        return Err(Error::ResonanceOutOfBand(sweep.frequencies[i].hz()));
    }
    Ok(i)
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (d0, d2) = (x[0] - x[1], x[2] - x[1]);
    let (e0, e2) = (y[0] - y[1], y[2] - y[1]);
    // y - y1 = a t^2 + b t with t = x - x1
    let den = d0 * d2 * (d0 - d2);
    if den == 0.0 {
        return None;
    }
    let a = (e0 * d2 - e2 * d0) / den;
    let b = (e2 * d0 * d0 - e0 * d2 * d2) / den;
    if a <= 0.0 {
        return None;
    }
    let t = -b / (2.0 * a);
    if t < d0 || t > d2 {
        return None;
    }
    Some((x[1] + t, y[1] + a * t * t + b * t))
}

fn refined_dip(sweep: &SweepResult, db: &[f64], i: usize) -> (f64, f64) {
    let x = [sweep.frequencies[i - 1].hz(), sweep.frequencies[i].hz(), sweep.frequencies[i + 1].hz()];
    let y = [db[i - 1], db[i], db[i + 1]];
    parabola_vertex(x, y).unwrap_or((x[1], y[1]))
}

/// Frequency of the global |S11| minimum, refined by a quadratic fit in dB.
pub fn find_resonance(sweep: &SweepResult) -> Result<Frequency> {
    let db = db_values(sweep);
    let i = discrete_minimum(sweep, &db)?;
    Frequency::new(refined_dip(sweep, &db, i).0)
}

/// Q extraction with the dip-relative -3 dB band.
pub fn q_from_s11(sweep: &SweepResult) -> Result<ResonanceSummary> {
    q_from_s11_with(sweep, BandReference::DipRelative)
}

pub fn q_from_s11_with(sweep: &SweepResult, reference: BandReference) -> Result<ResonanceSummary> {
    let db = db_values(sweep);
    let i = discrete_minimum(sweep, &db)?;
    let (fc, dip_db) = refined_dip(sweep, &db, i);
    let dip_db = dip_db.min(db[i]);
    if dip_db > -3.0 + 1e-12 {
        return Err(Error::BandwidthUnresolved(format!("dip of {dip_db:.3} dB is shallower than 3 dB")));
    }

    // `edge` is negative inside the band and crosses zero at its boundary.
    let edge: Vec<f64> = match reference {
        BandReference::DipRelative => {
            let level = dip_db + 3.0;
            db.iter().map(|v| v - level).collect()
        }
        BandReference::HalfAbsorbedPower => {
            let p: Vec<f64> = db.iter().map(|v| 1.0 - 10f64.powf(v / 10.0)).collect();
            let half = 0.5 * p[i];
            p.iter().map(|v| half - v).collect()
        }
    };
    let f = |k: usize| sweep.frequencies[k].hz();
    let cross = |a: usize, b: usize| -> f64 {
        let (ea, eb) = (edge[a], edge[b]);
        if eb == ea {
            return f(a);
        }
        f(a) + (0.0 - ea) * (f(b) - f(a)) / (eb - ea)
    };

    let mut lo = i;
    while lo > 0 && edge[lo] < 0.0 {
        lo -= 1;
    }
    let mut hi = i;
    while hi < edge.len() - 1 && edge[hi] < 0.0 {
        hi += 1;
    }
    if edge[lo] < 0.0 || edge[hi] < 0.0 {
        return Err(Error::BandwidthUnresolved(format!(
            "{} band edge not bracketed within the sweep",
            reference.label()
        )));
    }
    let inside = hi - lo - 1;
    if inside < MIN_BAND_POINTS {
        return Err(Error::BandwidthUnresolved(format!(
            "only {inside} samples inside the band, need {MIN_BAND_POINTS}"
        )));
    }
    let f_lo = cross(lo, lo + 1);
    let f_hi = cross(hi - 1, hi);
    let df = f_hi - f_lo;
    if !(df > 0.0) {
        return Err(Error::BandwidthUnresolved("zero bandwidth".into()));
    }
    Ok(ResonanceSummary { fc: Frequency::new(fc)?, df, q: fc / df, dip_db })
}

pub fn q_ratio(unloaded: f64, loaded: f64) -> Result<f64> {
    if !(unloaded > 0.0 && loaded > 0.0 && unloaded.is_finite() && loaded.is_finite()) {
        return Err(Error::invalid(format!("Q values must be positive, got {unloaded} and {loaded}")));
    }
    Ok(unloaded / loaded)
}

/// Relative advantage of `a` over `b` in percent.
pub fn improvement_percent(a: f64, b: f64) -> f64 {
    (a / b - 1.0) * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSummary {
    pub mean_unloaded: f64,
    pub mean_loaded: f64,
    pub mean_combined: f64,
}

impl QSummary {
    /// Improvement of this column set over `other`, on the combined means.
    pub fn improvement_over(&self, other: &QSummary) -> f64 {
        improvement_percent(self.mean_combined, other.mean_combined)
    }
}

pub fn q_summary(unloaded: &[f64], loaded: &[f64]) -> Result<QSummary> {
    if unloaded.len() != 16 || loaded.len() != 16 {
        return Err(Error::invalid(format!(
            "Q summary needs 16 values per condition, got {} and {}",
            unloaded.len(),
            loaded.len()
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (u, l) = (mean(unloaded), mean(loaded));
    Ok(QSummary { mean_unloaded: u, mean_loaded: l, mean_combined: 0.5 * (u + l) })
}
