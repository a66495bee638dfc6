//! Auto-matching search over the 16 bank configurations and two trimmers.

use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matchnet::{network_s11, Load, MatchNetworkSpec, SwitchConfig};
use crate::netcore::{magnitude_db, Frequency};

/// Objective values are clipped here so an exact match stays finite.
pub const FLOOR_DB: f64 = -100.0;

/// Relative slack allowed on trimmer bounds before a value counts as out of range.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && min <= max) {
            return Err(Error::invalid(format!("range [{min:e}, {max:e}] is empty or non-positive")));
        }
        Ok(Self { min, max })
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn at(&self, u: f64) -> f64 {
        if self.span() == 0.0 {
            self.min
        } else {
            (self.min + u.clamp(0.0, 1.0) * self.span()).clamp(self.min, self.max)
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let slack = RANGE_SLACK * self.max.abs();
        v >= self.min - slack && v <= self.max + slack
    }

    /// `n` evenly spaced values from `min` to `max` inclusive.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        if n <= 1 || self.span() == 0.0 {
            return vec![self.min];
        }
        (0..n).map(|k| self.at(k as f64 / (n - 1) as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunerProblem {
    pub spec: MatchNetworkSpec,
    pub load: Load,
    pub f_target: Frequency,
    pub c_m_range: Range,
    pub c_t_range: Range,
    /// Attained |S11| at or below this level counts as matched.
    pub tolerance_db: f64,
    /// Budget for the simplex phase of each configuration.
    pub max_evaluations: usize,
    /// Points per axis of the seed grid.
    pub seed_grid: usize,
}

impl TunerProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance_db < 0.0) {
            return Err(Error::invalid(format!("tolerance_db must be negative, got {}", self.tolerance_db)));
        }
        if self.max_evaluations < 100 {
            return Err(Error::invalid(format!("max_evaluations must be at least 100, got {}", self.max_evaluations)));
        }
        if self.seed_grid < 2 {
            return Err(Error::invalid("seed grid needs at least 2 points per axis"));
        }
        Ok(())
    }
}

pub fn evaluate_objective(problem: &TunerProblem, config: SwitchConfig, c_m: f64, c_t: f64) -> Result<f64> {
    if !problem.c_m_range.contains(c_m) {
        return Err(Error::TrimmerOutOfRange(format!(
            "c_m = {:.6} pF outside [{:.3}, {:.3}] pF",
            c_m * 1e12,
            problem.c_m_range.min * 1e12,
            problem.c_m_range.max * 1e12
        )));
    }
    if !problem.c_t_range.contains(c_t) {
        return Err(Error::TrimmerOutOfRange(format!(
            "c_t = {:.6} pF outside [{:.3}, {:.3}] pF",
            c_t * 1e12,
            problem.c_t_range.min * 1e12,
            problem.c_t_range.max * 1e12
        )));
    }
    let spec = problem.spec.with_trimmers(c_m, c_t)?;
    let g = network_s11(&spec, config, &problem.load, problem.f_target)?;
    Ok(magnitude_db(g).max(FLOOR_DB))
}

/// Outcome of a bounded two-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMinimum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

type Point = ([f64; 2], f64);

/// Most promising seed points per start of the simplex phase.
const MAX_STARTS: usize = 4;
/// Fresh simplices built around each converged point.
const MAX_RESTARTS: usize = 3;

/// Seed-grid plus Nelder-Mead minimization of `f` over `rx` x `ry`.
///
/// The simplex moves freely in a plane folded onto the unit square by
/// `u = (1 - cos(pi t)) / 2`, so vertices never pile up on the boundary. It
/// starts from the best local minima of the seed grid and is rebuilt, with a
/// shrinking edge, around each converged point until that stops helping.
/// Each simplex stops once its diameter falls below `1e-6` in the folded
/// plane; the whole phase stops after `max_evaluations` objective calls.
pub fn minimize_box<F>(f: F, rx: Range, ry: Range, seed_grid: usize, max_evaluations: usize) -> Result<BoxMinimum>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let evaluations = Cell::new(0usize);
    let eval = |u: [f64; 2]| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let v = f(rx.at(u[0]), ry.at(u[1]))?;
        if v.is_nan() {
            return Err(Error::NonFinite("objective"));
        }
        Ok(v)
    };

    if rx.span() == 0.0 && ry.span() == 0.0 {
        let value = eval([0.0, 0.0])?;
        return Ok(BoxMinimum { x: rx.min, y: ry.min, value, evaluations: 1, budget_exhausted: false });
    }

    let n = seed_grid.max(2);
    let step = 1.0 / (n - 1) as f64;
    let mut grid = vec![f64::INFINITY; n * n];
    for i in 0..n {
        for j in 0..n {
            grid[i * n + j] = eval([i as f64 * step, j as f64 * step])?;
        }
    }
    let seed_evals = evaluations.get();
    let budget_left = || evaluations.get() - seed_evals < max_evaluations;

    // grid points no worse than any neighbour, best first, row-major on ties
    let mut starts: Vec<Point> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j];
            let mut local = true;
            for (di, dj) in [(-1i64, -1i64), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (a, b) = (i as i64 + di, j as i64 + dj);
                if (0..n as i64).contains(&a) && (0..n as i64).contains(&b) && grid[a as usize * n + b as usize] < v {
                    local = false;
                }
            }
            if local {
                starts.push(([i as f64 * step, j as f64 * step], v));
            }
        }
    }
    starts.sort_by(|a, b| a.1.total_cmp(&b.1));
    starts.truncate(MAX_STARTS);

    let eval_folded = |t: [f64; 2]| eval(fold(t));
    let mut best = (unfold(starts[0].0), starts[0].1);
    let mut exhausted = false;
    'starts: for start in starts {
        let mut current = (unfold(start.0), start.1);
        let mut edge = step;
        for _ in 0..=MAX_RESTARTS {
            let (found, out_of_budget) = simplex_search(&eval_folded, current, edge, &budget_left)?;
            edge /= 3.0;
            let improved = found.1 < current.1;
            if found.1 < best.1 {
                best = found;
            }
            current = if improved { found } else { current };
            if out_of_budget {
                exhausted = true;
                break 'starts;
            }
            if !improved {
                break;
            }
        }
    }
    let u = fold(best.0);
    Ok(BoxMinimum {
        x: rx.at(u[0]),
        y: ry.at(u[1]),
        value: best.1,
        evaluations: evaluations.get(),
        budget_exhausted: exhausted,
    })
}

fn fold(t: [f64; 2]) -> [f64; 2] {
    let f = |x: f64| 0.5 * (1.0 - (std::f64::consts::PI * x).cos());
    [f(t[0]), f(t[1])]
}

fn unfold(u: [f64; 2]) -> [f64; 2] {
    let g = |x: f64| (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
    [g(u[0]), g(u[1])]
}

/// One unconstrained Nelder-Mead run from `start` with an initial edge of
/// `step`. Returns the best vertex and whether the budget ran out.
fn simplex_search<E, B>(eval: &E, start: Point, step: f64, budget_left: &B) -> Result<(Point, bool)>
where
    E: Fn([f64; 2]) -> Result<f64>,
    B: Fn() -> bool,
{
    let p0 = start.0;
    let p1 = [p0[0] + step, p0[1]];
    let p2 = [p0[0], p0[1] + step];
    let mut simplex = [start, (p1, eval(p1)?), (p2, eval(p2)?)];
    let diameter = |s: &[Point; 3]| {
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d(s[0].0, s[1].0).max(d(s[0].0, s[2].0)).max(d(s[1].0, s[2].0))
    };
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    let mut exhausted = false;
    loop {
        // stable ordering keeps ties deterministic
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < 1e-6 {
            break;
        }
        if !budget_left() {
            exhausted = true;
            break;
        }
        let centroid = [0.5 * (simplex[0].0[0] + simplex[1].0[0]), 0.5 * (simplex[0].0[1] + simplex[1].0[1])];
        let worst = simplex[2];
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = eval(reflected)?;
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = eval(expanded)?;
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = lerp(centroid, reflected, 0.5);
            (c, eval(c)?)
        } else {
            let c = lerp(centroid, worst.0, 0.5);
            (c, eval(c)?)
        };
        if fc < worst.1.min(fr) {
            simplex[2] = (contracted, fc);
            continue;
        }
        let b = simplex[0].0;
        for v in &mut simplex[1..] {
            let p = lerp(b, v.0, 0.5);
            *v = (p, eval(p)?);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok((simplex[0], exhausted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigOptimum {
    pub config: SwitchConfig,
    pub c_m: f64,
    pub c_t: f64,
    pub s11_db: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

pub fn tune_continuous(problem: &TunerProblem, config: SwitchConfig) -> Result<ConfigOptimum> {
    problem.validate()?;
    let m = minimize_box(
        |c_m, c_t| evaluate_objective(problem, config, c_m, c_t),
        problem.c_m_range,
        problem.c_t_range,
        problem.seed_grid,
        problem.max_evaluations,
    )?;
    Ok(ConfigOptimum {
        config,
        c_m: m.x,
        c_t: m.y,
        s11_db: m.value,
        evaluations: m.evaluations,
        budget_exhausted: m.budget_exhausted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunerResult {
    pub best_config: SwitchConfig,
    pub c_m: f64,
    pub c_t: f64,
    pub s11_db_at_target: f64,
    pub evaluations: usize,
    pub per_config_best: Vec<ConfigOptimum>,
}

impl TunerResult {
    pub fn meets(&self, tolerance_db: f64) -> bool {
        self.s11_db_at_target <= tolerance_db
    }
}

/// Picks the lowest objective, keeping the earliest configuration on ties.
fn select_best(per_config: &[ConfigOptimum]) -> ConfigOptimum {
    let mut best = per_config[0];
    for c in &per_config[1..] {
        if c.s11_db < best.s11_db {
            best = *c;
        }
    }
    best
}

pub fn tune_full(problem: &TunerProblem) -> Result<TunerResult> {
    problem.validate()?;
    let configs: Vec<SwitchConfig> = SwitchConfig::all().collect();
    let per_config_best = configs.par_iter().map(|&c| tune_continuous(problem, c)).collect::<Result<Vec<_>>>()?;
    let best = select_best(&per_config_best);
    Ok(TunerResult {
        best_config: best.config,
        c_m: best.c_m,
        c_t: best.c_t,
        s11_db_at_target: best.s11_db,
        evaluations: per_config_best.iter().map(|c| c.evaluations).sum(),
        per_config_best,
    })
}

/// Exhaustive `n` x `n` trimmer grid for one configuration.
pub fn grid_oracle(problem: &TunerProblem, config: SwitchConfig, n: usize) -> Result<ConfigOptimum> {
    let xs = problem.c_m_range.grid(n);
    let ys = problem.c_t_range.grid(n);
    let rows = xs
        .par_iter()
        .map(|&c_m| {
            let mut best = (c_m, ys[0], f64::INFINITY);
            for &c_t in &ys {
                let v = evaluate_objective(problem, config, c_m, c_t)?;
                if v < best.2 {
                    best = (c_m, c_t, v);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = rows[0];
    for r in &rows[1..] {
        if r.2 < best.2 {
            best = *r;
        }
    }
    Ok(ConfigOptimum {
        config,
        c_m: best.0,
        c_t: best.1,
        s11_db: best.2,
        evaluations: xs.len() * ys.len(),
        budget_exhausted: false,
    })
}

/// Tunes one configuration and returns the network with its trimmers fixed
/// at the optimum.
pub fn freeze_trimmers(problem: &TunerProblem, config: SwitchConfig) -> Result<(MatchNetworkSpec, ConfigOptimum)> {
    let opt = tune_continuous(problem, config)?;
    Ok((problem.spec.with_trimmers(opt.c_m, opt.c_t)?, opt))
}
