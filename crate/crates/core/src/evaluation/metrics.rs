//! Relative dominated volume, effective runtime and break-even simulation time.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::RunState;
use crate::pareto::{hypervolume, pareto_subset};
use crate::types::Dataset;

/// `V(Pareto(D_y*)) / V_true`, clipped to `[0, 1]`.
pub fn relative_dominated_volume<V: AsRef<[f64]>>(objectives: &[V], reference: &[f64], true_volume: f64) -> f64 {
    assert!(true_volume > 0.0, "true volume must be positive, got {true_volume}");
    (hypervolume(&pareto_subset(objectives), reference) / true_volume).clamp(0.0, 1.0)
}

/// `T_sim · ⌈N_seq / N_sim⌉ · N_iter + T_pure`.
pub fn effective_runtime(n_seq: usize, n_sim: usize, n_iter: usize, t_sim: f64, t_pure: f64) -> f64 {
    assert!(n_sim >= 1, "at least one simulation slot is required");
    assert!(t_sim >= 0.0 && t_pure >= 0.0, "times must be nonnegative");
    t_sim * n_seq.div_ceil(n_sim) as f64 * n_iter as f64 + t_pure
}

/// One row of a [`RunRecord`]. Times are cumulative seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub iter: usize,
    pub evals: usize,
    pub dv: f64,
    pub t_pure_s: f64,
    pub t_model_s: f64,
    pub t_acq_s: f64,
}

/// Per-iteration trace of one run; row 0 describes the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub n_seq: usize,
    pub rows: Vec<RecordRow>,
}

fn prefix_volume(data: &Dataset, len: usize, reference: &[f64], true_volume: f64) -> f64 {
    let ys: Vec<&[f64]> = data.samples()[..len].iter().filter_map(|s| s.objectives()).collect();
    relative_dominated_volume(&ys, reference, true_volume)
}

impl RunRecord {
    /// Builds the trace from a run state. The pure runtime is model plus
    /// acquisition time; black-box evaluation time is excluded.
    pub fn from_state(
        algorithm: impl Into<String>,
        n_seq: usize,
        state: &RunState,
        reference: &[f64],
        true_volume: f64,
    ) -> Self {
        let data = &state.dataset;
        let mut rows = vec![RecordRow {
            iter: 0,
            evals: state.initial_size,
            dv: prefix_volume(data, state.initial_size, reference, true_volume),
            t_pure_s: 0.0,
            t_model_s: 0.0,
            t_acq_s: 0.0,
        }];
        let (mut model, mut acq) = (0.0, 0.0);
        let mut best = rows[0].dv;
        for it in &state.iterations {
            model += it.model_seconds;
            acq += it.acquisition_seconds;
            // volumes can only grow with the data; max guards rounding
            best = best.max(prefix_volume(data, it.evaluations, reference, true_volume));
            rows.push(RecordRow {
                iter: it.iteration,
                evals: it.evaluations,
                dv: best,
                t_pure_s: model + acq,
                t_model_s: model,
                t_acq_s: acq,
            });
        }
        RunRecord {
            algorithm: algorithm.into(),
            n_seq,
            rows,
        }
    }

    pub fn last(&self) -> Option<&RecordRow> {
        self.rows.last()
    }

    /// First row with `dv >= threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<&RecordRow> {
        self.rows.iter().find(|r| r.dv >= threshold)
    }

    /// Columns `iter,evals,dv,t_pure_s,t_model_s,t_acq_s`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(algorithm: impl Into<String>, n_seq: usize, r: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let rows = input.deserialize().collect::<std::result::Result<Vec<RecordRow>, _>>()?;
        Ok(RunRecord {
            algorithm: algorithm.into(),
            n_seq,
            rows,
        })
    }
}

/// Break-even simulation time with a single simulation slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenResult {
    pub threshold: f64,
    /// Iterations to the threshold, adaptive then NSGA-II.
    pub iterations: (usize, usize),
    /// Pure runtimes to the threshold in seconds.
    pub pure_times: (f64, f64),
    /// `ν = N_seq · N_iter`.
    pub evaluations: (usize, usize),
    /// Simulation time above which the adaptive algorithm finishes first.
    pub tau: f64,
}

impl std::fmt::Display for BreakEvenResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "threshold: {}", self.threshold)?;
        writeln!(f, "iterations: adaptive {} nsgaii {}", self.iterations.0, self.iterations.1)?;
        writeln!(f, "evaluations: adaptive {} nsgaii {}", self.evaluations.0, self.evaluations.1)?;
        writeln!(f, "pure_time_s: adaptive {} nsgaii {}", self.pure_times.0, self.pure_times.1)?;
        write!(f, "tau_s: {}", self.tau)
    }
}

/// Break-even time from two traces reaching `threshold`.
pub fn break_even_time(adaptive: &RunRecord, nsgaii: &RunRecord, threshold: f64) -> Result<BreakEvenResult> {
    let a = adaptive.first_reaching(threshold).ok_or(Error::ThresholdUnreached(threshold))?;
    let n = nsgaii.first_reaching(threshold).ok_or(Error::ThresholdUnreached(threshold))?;
    break_even_from_parts(
        threshold,
        (a.iter, n.iter),
        (adaptive.n_seq, nsgaii.n_seq),
        (a.t_pure_s, n.t_pure_s),
    )
}

/// `τ = (T_a − T_n) / (ν_n − ν_a)` with `ν = N_seq · N_iter`.
pub fn break_even_from_parts(
    threshold: f64,
    iterations: (usize, usize),
    n_seq: (usize, usize),
    pure_times: (f64, f64),
) -> Result<BreakEvenResult> {
    let nu = (n_seq.0 * iterations.0, n_seq.1 * iterations.1);
    if nu.1 <= nu.0 {
        return Err(Error::NotApplicable(format!(
            "NSGA-II needs {} evaluations, adaptive {}",
            nu.1, nu.0
        )));
    }
    Ok(BreakEvenResult {
        threshold,
        iterations,
        pure_times,
        evaluations: nu,
        tau: (pure_times.0 - pure_times.1) / (nu.1 - nu.0) as f64,
    })
}
