//! Outer minimax loop: surrogate build, inner solve, sequence update.
//!
//! Each outer iteration rebuilds the correlation table, assembles the
//! linear surrogate at the current iterate, solves the inner simplex
//! problem, and recovers the next unit-modulus iterate from the inner
//! minimizer. A candidate that raises the peak sidelobe level is retried
//! once with a doubled inner budget and otherwise rejected, so the
//! recorded trace is non-increasing.

use std::time::Instant;

use crate::correlation::{correlate_all_fft, isl, psl_argmax, LagConstraintSet};
use crate::error::{Error, Result};
use crate::mda::{mda_solve, MdaConfig};
use crate::sequence::SequenceSet;
use crate::surrogate::{build_surrogate, EigenMode};

/// Outer-loop configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub l: usize,
    pub m: usize,
    pub max_outer_iters: usize,
    /// Relative peak-level change below which the loop stops.
    pub eps: f64,
    pub seed: u64,
    pub mda: MdaConfig,
    pub eigen_mode: EigenMode,
}

impl SolverConfig {
    pub fn new(l: usize, m: usize) -> Self {
        SolverConfig {
            l,
            m,
            max_outer_iters: 500,
            eps: 1e-6,
            seed: 0,
            mda: MdaConfig::default(),
            eigen_mode: EigenMode::SpectralBoundD,
        }
    }
}

/// Why the outer loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    /// Relative peak-level change fell below the threshold.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// A retried candidate still raised the peak level; the previous
    /// iterate was kept.
    Stalled,
}

impl std::fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminationStatus::Converged => write!(f, "converged"),
            TerminationStatus::MaxIters => write!(f, "max-iters"),
            TerminationStatus::Stalled => write!(f, "stalled"),
        }
    }
}

/// One accepted outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub psl: f64,
    pub isl: f64,
    /// Inner iterations spent this outer step, retries included.
    pub inner_iters: usize,
    pub seconds: f64,
}

/// Full design run output: per-iteration records and the final set.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub final_set: SequenceSet,
    pub status: TerminationStatus,
    /// `(outer, inner, objective)` samples when inner tracing was enabled.
    pub inner_trace: Vec<(usize, usize, f64)>,
}

impl SolverTrace {
    pub fn initial_psl(&self) -> f64 {
        self.records.first().map(|r| r.psl).unwrap_or(f64::NAN)
    }

    pub fn final_psl(&self) -> f64 {
        self.records.last().map(|r| r.psl).unwrap_or(f64::NAN)
    }

    pub fn final_isl(&self) -> f64 {
        self.records.last().map(|r| r.isl).unwrap_or(f64::NAN)
    }
}

/// Random-phase initialization, reproducible per seed.
pub fn init_random(l: usize, m: usize, seed: u64) -> Result<SequenceSet> {
    SequenceSet::random(l, m, seed)
}

/// Relative change of the peak level between consecutive iterations.
pub fn stopping_eps(psl_t: f64, psl_prev: f64) -> Result<f64> {
    if psl_prev <= 0.0 {
        return Err(Error::argument("previous peak level must be positive"));
    }
    Ok((psl_t - psl_prev).abs() / psl_prev)
}

/// Recovers a sequence set from the realified stacked vector `[Re; Im]`.
fn sequences_from_real(x: &[f64], l: usize, m: usize) -> Result<SequenceSet> {
    let ml = l * m;
    debug_assert_eq!(x.len(), 2 * ml);
    let phases: Vec<f64> = (0..ml).map(|n| x[n + ml].atan2(x[n])).collect();
    SequenceSet::from_flat_phases(l, m, phases)
}

/// Runs the outer loop from `initial` until convergence, the iteration
/// budget, or a stall.
pub fn design(cfg: &SolverConfig, initial: &SequenceSet) -> Result<SolverTrace> {
    if initial.num_sequences() != cfg.l || initial.length() != cfg.m {
        return Err(Error::argument("initial set does not match configured (L, M)"));
    }
    if cfg.max_outer_iters == 0 {
        return Err(Error::argument("need at least one outer iteration"));
    }
    let k_set = LagConstraintSet::full(cfg.l, cfg.m)?;

    let mut current = initial.clone();
    let mut table = correlate_all_fft(&current);
    let (mut psl_cur, _) = psl_argmax(&table, &k_set)?;
    let mut isl_cur = isl(&table, &k_set)?;
    if !psl_cur.is_finite() {
        return Err(Error::numeric("initial peak level is not finite"));
    }

    let mut records = vec![IterationRecord {
        iter: 0,
        psl: psl_cur,
        isl: isl_cur,
        inner_iters: 0,
        seconds: 0.0,
    }];
    let mut inner_trace = Vec::new();
    let mut status = TerminationStatus::MaxIters;

    for t in 1..=cfg.max_outer_iters {
        let tic = Instant::now();
        let sys = build_surrogate(&current, &k_set, &table, cfg.eigen_mode)?;

        let mut result = mda_solve(&sys, &cfg.mda)?;
        let mut inner_spent = result.iterations;
        if cfg.mda.collect_trace {
            for (m_it, g) in result.trace.iter().enumerate() {
                inner_trace.push((t, m_it, *g));
            }
        }
        let mut candidate = sequences_from_real(&result.x, cfg.l, cfg.m)?;
        let mut cand_table = correlate_all_fft(&candidate);
        let (mut psl_new, _) = psl_argmax(&cand_table, &k_set)?;

        if psl_new > psl_cur + 1e-9 {
            // One retry with a doubled inner budget before giving up.
            let retry_cfg = MdaConfig {
                max_inner_iters: cfg.mda.max_inner_iters * 2,
                ..cfg.mda.clone()
            };
            result = mda_solve(&sys, &retry_cfg)?;
            inner_spent += result.iterations;
            candidate = sequences_from_real(&result.x, cfg.l, cfg.m)?;
            cand_table = correlate_all_fft(&candidate);
            (psl_new, _) = psl_argmax(&cand_table, &k_set)?;
            if psl_new > psl_cur + 1e-9 {
                status = TerminationStatus::Stalled;
                break;
            }
        }
        if !psl_new.is_finite() {
            return Err(Error::numeric("peak level became non-finite"));
        }

        let eps_t = stopping_eps(psl_new, psl_cur)?;
        current = candidate;
        table = cand_table;
        psl_cur = psl_new;
        isl_cur = isl(&table, &k_set)?;
        records.push(IterationRecord {
            iter: t,
            psl: psl_cur,
            isl: isl_cur,
            inner_iters: inner_spent,
            seconds: tic.elapsed().as_secs_f64(),
        });
        if eps_t < cfg.eps {
            status = TerminationStatus::Converged;
            break;
        }
    }

    Ok(SolverTrace {
        records,
        final_set: current,
        status,
        inner_trace,
    })
}
