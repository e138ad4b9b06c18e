use std::collections::HashMap;

use rayon::prelude::*;

use super::{DesignEvaluation, DesignResult, Termination, TraceEntry};
use crate::error::{Error, Result};

/// Fixed penalty added to the objective of infeasible designs.
pub const PENALTY: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSettings {
    pub budget: usize,
    /// Stop once every vertex lies within this distance of every other, in
    /// units of the bound range.
    pub diameter_tol: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl SimplexSettings {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            diameter_tol: 1e-3,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

struct Search<'a, F> {
    bounds: &'a [(f64, f64)],
    j_min: f64,
    budget: usize,
    trace: Vec<TraceEntry>,
    /// Objective of every point already evaluated, keyed by its bits; a
    /// revisited vertex costs nothing and adds no trace row.
    seen: HashMap<Vec<u64>, f64>,
    eval: F,
}

impl<F> Search<'_, F>
where
    F: Fn(&[f64]) -> Result<DesignEvaluation> + Sync,
{
    fn physical(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.bounds)
            .map(|(&t, &(lo, hi))| if t >= 1.0 { hi } else { lo + t * (hi - lo) })
            .collect()
    }

    fn objective(&self, e: &DesignEvaluation) -> f64 {
        if e.feasible && e.omega_effective.is_finite() {
            return e.omega_effective;
        }
        let shortfall = if e.j_star_uev.is_finite() {
            ((self.j_min - e.j_star_uev) / self.j_min).max(0.0)
        } else {
            1.0
        };
        let no_top = if e.omega_effective.is_finite() { 0.0 } else { 1.0 };
        PENALTY * (1.0 + no_top + shortfall)
    }

    /// Evaluates `points` in parallel and records new ones in order. Stops
    /// at the first point the budget cannot cover, so the result may be
    /// shorter than the input.
    fn batch(&mut self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let key = |u: &[f64]| u.iter().map(|t| t.to_bits()).collect::<Vec<u64>>();
        let mut fresh: Vec<Vec<f64>> = Vec::new();
        let mut covered = 0;
        for u in points {
            let k = key(u);
            if !self.seen.contains_key(&k) && !fresh.iter().any(|f| key(f) == k) {
                if self.trace.len() + fresh.len() == self.budget {
                    break;
                }
                fresh.push(u.clone());
            }
            covered += 1;
        }
        let xs: Vec<Vec<f64>> = fresh.iter().map(|u| self.physical(u)).collect();
        let eval = &self.eval;
        let results: Vec<Result<DesignEvaluation>> = xs.par_iter().map(|x| eval(x)).collect();
        for ((u, x), r) in fresh.iter().zip(xs).zip(results) {
            let e = r?;
            let feasible = e.feasible && e.omega_effective.is_finite() && e.j_star_uev >= self.j_min;
            self.seen.insert(key(u), self.objective(&e));
            self.trace.push(TraceEntry {
                eval: self.trace.len() + 1,
                parameters: x,
                omega_effective: e.omega_effective,
                j_star_uev: e.j_star_uev,
                feasible,
            });
        }
        Ok(points[..covered].iter().map(|u| self.seen[&key(u)]).collect())
    }

    fn single(&mut self, u: Vec<f64>) -> Result<Option<f64>> {
        Ok(self.batch(&[u])?.pop())
    }
}

fn clamp_unit(u: Vec<f64>) -> Vec<f64> {
    u.into_iter().map(|t| t.clamp(0.0, 1.0)).collect()
}

fn along(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    clamp_unit(from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect())
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for a in simplex {
        for b in simplex {
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            d = d.max(s.sqrt());
        }
    }
    d
}

/// Nelder–Mead in bound-normalized coordinates with projection onto the box.
///
/// The start vertex is the midpoint of the bounds; vertex `i` adds a quarter
/// of the range along parameter `i`. Infeasible evaluations are penalized by
/// [`PENALTY`] plus the relative J shortfall. Evaluations that belong to one
/// step (the initial simplex, a shrink) run concurrently, but the candidate
/// set and the trace order are fixed beforehand, so the search is
/// deterministic.
pub fn minimize<F>(
    bounds: &[(f64, f64)],
    names: Vec<String>,
    j_min: f64,
    settings: &SimplexSettings,
    eval: F,
) -> Result<DesignResult>
where
    F: Fn(&[f64]) -> Result<DesignEvaluation> + Sync,
{
    let d = bounds.len();
    if d == 0 || settings.budget < d + 2 {
        return Err(Error::InvalidInput(format!(
            "simplex search over {d} parameters needs a budget of at least {}",
            d + 2
        )));
    }
    let mut search = Search {
        bounds,
        j_min,
        budget: settings.budget,
        trace: Vec::new(),
        seen: HashMap::new(),
        eval,
    };
    let mut simplex: Vec<Vec<f64>> = vec![vec![0.5; d]];
    for i in 0..d {
        let mut u = vec![0.5; d];
        u[i] += 0.25;
        simplex.push(u);
    }
    let mut values = search.batch(&simplex)?;

    let termination = loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < settings.diameter_tol {
            break Termination::Converged;
        }
        if search.trace.len() >= settings.budget {
            break Termination::Budget;
        }
        let mut centroid = vec![0.0; d];
        for v in &simplex[..d] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let reflected = along(&centroid, &worst, -settings.reflection);
        let Some(fr) = search.single(reflected.clone())? else {
            break Termination::Budget;
        };
        if fr < values[0] {
            let expanded = along(&centroid, &reflected, settings.expansion);
            let Some(fe) = search.single(expanded.clone())? else {
                simplex[d] = reflected;
                values[d] = fr;
                break Termination::Budget;
            };
            if fe < fr {
                simplex[d] = expanded;
                values[d] = fe;
            } else {
                simplex[d] = reflected;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = reflected;
            values[d] = fr;
            continue;
        }
        let (candidate, reference) = if fr < values[d] {
            (along(&centroid, &reflected, settings.contraction), fr)
        } else {
            (along(&centroid, &worst, settings.contraction), values[d])
        };
        let Some(fc) = search.single(candidate.clone())? else {
            break Termination::Budget;
        };
        if fc < reference || (fc == reference && fr < values[d]) {
            simplex[d] = candidate;
            values[d] = fc;
            continue;
        }
        let shrunk: Vec<Vec<f64>> = simplex[1..]
            .iter()
            .map(|v| along(&simplex[0], v, settings.shrink))
            .collect();
        let fs = search.batch(&shrunk)?;
        let complete = fs.len() == shrunk.len();
        for (i, f) in fs.into_iter().enumerate() {
            simplex[i + 1] = shrunk[i].clone();
            values[i + 1] = f;
        }
        if !complete {
            break Termination::Budget;
        }
    };

    let trace = search.trace;
    let best = trace
        .iter()
        .filter(|e| e.feasible)
        .fold(None::<&TraceEntry>, |best, e| match best {
            Some(b) if b.omega_effective <= e.omega_effective => Some(b),
            _ => Some(e),
        })
        .cloned();
    match best {
        Some(b) => Ok(DesignResult {
            parameter_names: names,
            best_parameters: b.parameters,
            best_omega_effective: b.omega_effective,
            j_star_uev: b.j_star_uev,
            termination,
            trace,
        }),
        None => Err(Error::Infeasible { trace }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(x: &[f64]) -> Result<DesignEvaluation> {
        Ok(DesignEvaluation {
            omega_effective: (x[0] - 3.7) * (x[0] - 3.7) + 0.01,
            j_star_uev: 1.0,
            feasible: true,
        })
    }

    #[test]
    fn one_dimensional_quadratic() {
        let r = minimize(&[(0.0, 10.0)], vec!["x".into()], 0.5, &SimplexSettings::with_budget(200), quadratic).unwrap();
        assert_eq!(r.termination, Termination::Converged);
        assert!((r.best_parameters[0] - 3.7).abs() < 1e-3 * 10.0);
        assert_eq!(r.trace[0].parameters, vec![5.0]);
        assert_eq!(r.trace[1].parameters, vec![7.5]);
    }

    #[test]
    fn budget_stops_the_search() {
        let r = minimize(&[(0.0, 10.0)], vec!["x".into()], 0.5, &SimplexSettings::with_budget(5), quadratic).unwrap();
        assert_eq!(r.termination, Termination::Budget);
        assert_eq!(r.trace.len(), 5);
    }

    #[test]
    fn incumbent_never_worsens_and_is_deterministic() {
        let f = |x: &[f64]| -> Result<DesignEvaluation> {
            let (a, b) = (x[0] - 1.0, x[1] + 0.5);
            Ok(DesignEvaluation {
                omega_effective: a * a + 3.0 * b * b + 0.3 * a * b,
                j_star_uev: 1.0 + x[0],
                feasible: true,
            })
        };
        let bounds = [(-2.0, 2.0), (-2.0, 2.0)];
        let names = vec!["a".into(), "b".into()];
        let s = SimplexSettings::with_budget(60);
        let r1 = minimize(&bounds, names.clone(), 0.5, &s, f).unwrap();
        let r2 = minimize(&bounds, names, 0.5, &s, f).unwrap();
        assert_eq!(r1, r2);
        let mut best = f64::INFINITY;
        for e in &r1.trace {
            assert_eq!(e.feasible, e.j_star_uev >= 0.5);
            if e.feasible {
                best = best.min(e.omega_effective);
            }
        }
        assert_eq!(best, r1.best_omega_effective);
        assert!(r1.best_parameters[1] >= -2.0 && r1.best_parameters[1] <= 2.0);
    }

    #[test]
    fn all_infeasible_is_an_error() {
        let f = |_: &[f64]| Ok(DesignEvaluation::infeasible(0.1));
        let r = minimize(&[(0.0, 1.0)], vec!["x".into()], 0.5, &SimplexSettings::with_budget(8), f);
        match r {
            Err(Error::Infeasible { trace }) => assert_eq!(trace.len(), 8),
            other => panic!("{other:?}"),
        }
    }
}
