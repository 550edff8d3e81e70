//! Continuation in the exponent `p`.

use crate::geometry::{Domain, MeshOptions, Point};

use super::{
    least_energy_init, newton_refine, InitOptions, NewtonOptions, Problem, SolveRecord, SolverError,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub newton: NewtonOptions,
    pub init: InitOptions,
    /// Largest continuation step in `p`.
    pub max_step: f64,
    /// Steps that needed more Newton iterations than this are halved.
    pub slow_iterations: usize,
    pub min_step: f64,
    /// Warm-start from the previous exponent; otherwise every exponent is
    /// initialized from the least-energy minimizer.
    pub continuation: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            init: InitOptions::default(),
            max_step: 1.0,
            slow_iterations: 8,
            min_step: 1.0 / 64.0,
            continuation: true,
        }
    }
}

/// Outcome for one requested exponent.
#[derive(Debug, Clone)]
pub struct SweepItem {
    pub p: f64,
    pub outcome: Result<SolveRecord, SolverError>,
    /// Intermediate continuation solves taken to reach `p`.
    pub substeps: usize,
    /// The final solve needed more than `slow_iterations` Newton steps,
    /// which can indicate a jump to another branch.
    pub iteration_spike: bool,
}

/// `u_{p_k}·M^{(p_k − p_{k+1})/(p_{k+1} − 1)}`: matches the peak height
/// to the fixed-point scaling of the next exponent.
pub fn rescaled_seed(rec: &SolveRecord, p_next: f64) -> Vec<f64> {
    let s = rec.m.powf((rec.p - p_next) / (p_next - 1.0));
    rec.u.values().iter().map(|v| v * s).collect()
}

fn validate(p_values: &[f64]) -> Result<(), SolverError> {
    if p_values.is_empty() {
        return Err(SolverError::InvalidParameter("no exponents given".into()));
    }
    for w in p_values.windows(2) {
        if !(w[1] > w[0]) {
            return Err(SolverError::InvalidParameter(
                "exponents must be strictly ascending".into(),
            ));
        }
    }
    if let Some(bad) = p_values.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
        return Err(SolverError::InvalidParameter(format!(
            "exponent must exceed 1, got {bad}"
        )));
    }
    Ok(())
}

/// Solves for every exponent in ascending order. The first solvable one
/// starts from the least-energy minimizer; later ones are warm-started
/// from the previous solution with adaptive intermediate steps. A failure
/// is recorded and the sweep continues from the last good solution.
pub fn continuation_sweep(
    problem: &Problem,
    p_values: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepItem>, SolverError> {
    validate(p_values)?;
    let mut items = Vec::with_capacity(p_values.len());
    let mut last: Option<SolveRecord> = None;
    let mut step = opts.max_step;
    for &target in p_values {
        let prev = if opts.continuation {
            last.as_ref()
        } else {
            None
        };
        let item = match prev {
            None => {
                let outcome = least_energy_init(problem, target, &opts.init)
                    .and_then(|u0| newton_refine(problem, &u0, target, &opts.newton));
                let spike = matches!(&outcome, Ok(r) if r.iterations > opts.slow_iterations);
                SweepItem {
                    p: target,
                    outcome,
                    substeps: 0,
                    iteration_spike: spike,
                }
            }
            Some(prev) => continue_to(problem, prev.clone(), target, &mut step, opts),
        };
        if let Ok(rec) = &item.outcome {
            last = Some(rec.clone());
        }
        items.push(item);
    }
    if items.iter().all(|i| i.outcome.is_err()) {
        return Err(SolverError::SweepEmpty);
    }
    Ok(items)
}

fn continue_to(
    problem: &Problem,
    mut current: SolveRecord,
    target: f64,
    step: &mut f64,
    opts: &SweepOptions,
) -> SweepItem {
    let mut substeps = 0;
    loop {
        let q = (current.p + *step).min(target);
        let seed = rescaled_seed(&current, q);
        match newton_refine(problem, &seed, q, &opts.newton) {
            Ok(rec) => {
                let slow = rec.iterations > opts.slow_iterations;
                if slow {
                    *step = (*step * 0.5).max(opts.min_step);
                } else if rec.iterations <= 4 {
                    *step = (*step * 2.0).min(opts.max_step);
                }
                if q >= target {
                    return SweepItem {
                        p: target,
                        outcome: Ok(rec),
                        substeps,
                        iteration_spike: slow,
                    };
                }
                substeps += 1;
                current = rec;
            }
            Err(err) => {
                if *step <= opts.min_step {
                    *step = opts.max_step;
                    return SweepItem {
                        p: target,
                        outcome: Err(err),
                        substeps,
                        iteration_spike: false,
                    };
                }
                *step = (*step * 0.5).max(opts.min_step);
            }
        }
    }
}

/// Peak location from a coarse sweep on a uniform mesh up to
/// `min(p_max, 10)`, used to center the graded refinement.
pub fn locate_peak(
    domain: &Domain,
    h: f64,
    p_values: &[f64],
    opts: &SweepOptions,
) -> Result<Point, SolverError> {
    validate(p_values)?;
    let problem = Problem::generate(domain.clone(), &MeshOptions::uniform(h))?;
    let first = p_values[0];
    let last = p_values[p_values.len() - 1].min(10.0).max(first);
    let ps: Vec<f64> = if last > first {
        vec![first, last]
    } else {
        vec![first]
    };
    let items = continuation_sweep(&problem, &ps, opts)?;
    items
        .iter()
        .rev()
        .find_map(|i| i.outcome.as_ref().ok().map(|r| r.x_max))
        .ok_or(SolverError::SweepEmpty)
}
