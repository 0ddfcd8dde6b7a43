//! Closed-loop orchestration: scenario configuration, the simulation loop,
//! stopping criterion, logging, paper-experiment presets, and artifact
//! emission.

pub mod io;
pub mod plots;
pub mod presets;
pub mod signal;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adaptive_controller::{
    compute_delta, current_gains, select_input, theta_update, update_buffers, ControllerConfig,
    DataBuffers, InputMode, ThetaState,
};
use crate::error::{Error, Result};
use crate::informativity::{solve_v, update_tracker, InformativeTimeTracker, Trajectory};
use crate::linalg::{numeric_rank, RankTolerance};
use crate::lti_models::{matching_residual, reference_step, step, GainPair, ReferenceModel, StateSpacePlant};

pub use signal::{reference_signal, ReferenceSpec};

/// A complete closed-loop experiment. The plant is hidden from the
/// controller; it is used only to step the true system and to compute
/// diagnostics.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub plant: StateSpacePlant,
    pub model: ReferenceModel,
    pub reference: ReferenceSpec,
    /// Initial plant state; drawn i.i.d. standard normal from the seed when
    /// absent.
    pub x0: Option<DVector<f64>>,
    /// Initial reference-model state; drawn like `x0` when absent.
    pub xm0: Option<DVector<f64>>,
    /// Standard deviation of the seed-drawn entries of `x0` and `xm0`;
    /// ignored for explicitly given initial states.
    pub init_scale: f64,
    pub controller: ControllerConfig,
    pub epsilon: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let n = self.plant.state_dim();
        let m = self.plant.input_dim();
        let p = self.model.reference_dim();
        if self.model.state_dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "plant has n = {} but model has n = {}",
                n,
                self.model.state_dim()
            )));
        }
        if p > m {
            return Err(Error::Config(format!(
                "reference dimension p = {p} must not exceed input dimension m = {m}"
            )));
        }
        if self.reference.dim_or(p) != p {
            return Err(Error::DimensionMismatch(
                "constant reference vector length must equal p".into(),
            ));
        }
        if self.controller.u0.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "u(0) has length {}, expected m = {}",
                self.controller.u0.len(),
                m
            )));
        }
        for (label, v) in [("x0", &self.x0), ("xm0", &self.xm0)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{label} has length {}, expected n = {n}",
                        v.len()
                    )));
                }
            }
        }
        if !(self.init_scale > 0.0) {
            return Err(Error::Config("init_scale must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converged,
    Unsolvable,
    MaxSteps,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Converged => write!(f, "Converged"),
            Verdict::Unsolvable => write!(f, "Unsolvable"),
            Verdict::MaxSteps => write!(f, "MaxSteps"),
        }
    }
}

/// One row of the step log.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub t: usize,
    pub x: DVector<f64>,
    pub xm: DVector<f64>,
    pub u: DVector<f64>,
    pub mode: InputMode,
    pub e_norm: f64,
    pub residual_sq: f64,
    /// Hidden-plant diagnostic.
    pub matching_error: f64,
    pub informative: bool,
}

/// Per-run outcome.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub t_star: Option<usize>,
    pub verdict: Verdict,
    pub stop_step: usize,
    pub final_gains: GainPair,
    pub final_matching_error: f64,
    pub final_residual_sq: f64,
    pub seed: u64,
}

/// Full run output, including diagnostics that only tests consume.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub steps: Vec<StepRecord>,
    /// `Theta(t)` for each executed step `t >= 1`, recorded before the
    /// update at `t`; empty unless tracing was requested.
    pub theta_log: Vec<(usize, DMatrix<f64>)>,
    /// The collected trajectory at the informative time.
    pub informative_trajectory: Option<Trajectory>,
}

pub fn run(scenario: &Scenario) -> Result<(RunReport, Vec<StepRecord>)> {
    let out = run_inner(scenario, false)?;
    Ok((out.report, out.steps))
}

/// Like [`run`] but also records the adaptive-parameter history and the
/// trajectory frozen at the informative time.
pub fn run_traced(scenario: &Scenario) -> Result<RunOutcome> {
    run_inner(scenario, true)
}

fn run_inner(scenario: &Scenario, traced: bool) -> Result<RunOutcome> {
    scenario.validate()?;
    let plant = &scenario.plant;
    let model = &scenario.model;
    let cfg = &scenario.controller;
    let n = plant.state_dim();
    let m = plant.input_dim();
    let p = model.reference_dim();
    let horizon = n + m;
    let target = model.target_block();

    // Draw order is fixed for reproducibility: x0, xm0, then r(0), r(1), ...
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let scale = scenario.init_scale;
    let mut draw_state = |given: &Option<DVector<f64>>| match given {
        Some(v) => v.clone(),
        None => {
            DVector::from_fn(n, |_, _| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
        }
    };
    let mut x = draw_state(&scenario.x0);
    let mut xm = draw_state(&scenario.xm0);

    let mut tracker = InformativeTimeTracker::new(model, m)?;
    let mut bufs = DataBuffers::empty(n, m, cfg.sigma);
    let mut theta = ThetaState::initial(n, p, cfg.gamma);

    // Raw trajectory columns, kept only while the tracker still needs them.
    let mut u_cols: Vec<DVector<f64>> = Vec::new();
    let mut x_cols: Vec<DVector<f64>> = vec![x.clone()];
    let mut informative_trajectory = None;

    let mut steps: Vec<StepRecord> = Vec::new();
    let mut theta_log: Vec<(usize, DMatrix<f64>)> = Vec::new();

    let mut r = reference_signal(&scenario.reference, p, &mut rng);
    let mut u = cfg.u0.clone();
    steps.push(StepRecord {
        t: 0,
        x: x.clone(),
        xm: xm.clone(),
        u: u.clone(),
        mode: InputMode::Adaptive,
        e_norm: (&x - &xm).norm(),
        residual_sq: target.norm_squared(),
        matching_error: matching_residual(
            plant,
            model,
            &GainPair {
                k: DMatrix::zeros(m, n),
                l: DMatrix::zeros(m, p),
            },
        ),
        informative: false,
    });

    // Rank of the stacked buffers before an exploration step; the next
    // buffer update must raise it by exactly one.
    let mut pending_rank: Option<usize> = None;
    let mut held_streak = 0usize;
    let mut starvation_warned = false;

    let mut verdict = Verdict::MaxSteps;
    let mut stop_step = scenario.max_steps;

    for t in 1..=scenario.max_steps {
        let x_prev = x.clone();
        x = step(plant, &x, &u)?;
        xm = reference_step(model, &xm, &r)?;

        let tracker_active = tracker.t_star().is_none() && !tracker.is_unsolvable();
        if tracker_active {
            u_cols.push(u.clone());
            x_cols.push(x.clone());
            let traj = Trajectory::new(
                DMatrix::from_columns(&u_cols),
                DMatrix::from_columns(&x_cols),
            )?;
            tracker = update_tracker(&tracker, &traj, model)?;
            if tracker.t_star() == Some(t) {
                informative_trajectory = Some(traj);
            }
        }

        let new_bufs = update_buffers(&bufs, t, tracker.t_star(), &u, &x_prev, &x);
        let held = tracker
            .t_star()
            .is_some_and(|ts| t > ts + 1 && new_bufs == bufs);
        bufs = new_bufs;
        if held {
            held_streak += 1;
            if held_streak > 10 * horizon && !starvation_warned {
                eprintln!(
                    "warning: data buffers held for {held_streak} consecutive steps; sigma = {} is likely too small",
                    cfg.sigma
                );
                starvation_warned = true;
            }
        } else {
            held_streak = 0;
        }

        if let Some(rank_before) = pending_rank.take() {
            let rank_now =
                numeric_rank(&bufs.stacked_state_input(), RankTolerance::new(cfg.rank_tau))?;
            // The new column increases the rank in exact arithmetic; a huge
            // dynamic range across columns can still hide old directions
            // below the relative SVD cutoff, so only warn.
            if rank_now != rank_before + 1 {
                eprintln!(
                    "warning: step {t}: exploration changed the data rank from {rank_before} to {rank_now}, expected {}",
                    rank_before + 1
                );
            }
        }

        if tracker.t_star() == Some(t) && cfg.warm_start > 0.0 {
            // The data just became informative, so the matching system is
            // solvable from the collected columns; restarting the parameter
            // near that solution keeps the closed loop stable while the
            // gradient law removes the damping residual.
            let traj = informative_trajectory
                .as_ref()
                .expect("trajectory is captured at the informative time");
            let (v1, v2) = solve_v(traj, model)?;
            theta = ThetaState::warm_start(&v1, &v2, cfg.warm_start, cfg.gamma);
        }

        if traced {
            theta_log.push((t, theta.theta().clone()));
        }

        let residual_sq = (bufs.phi_x() * theta.theta() - &target).norm_squared();
        let gains = current_gains(&bufs, &theta, n);
        let matching_error = matching_residual(plant, model, &gains);
        let informative = tracker.t_star().is_some();

        r = reference_signal(&scenario.reference, p, &mut rng);
        let (u_next, mode) = select_input(
            &bufs,
            &theta,
            &x,
            &r,
            t,
            informative,
            horizon,
            cfg,
        )
        .map_err(|e| match e {
            Error::NoAnnihilator => Error::Numerical {
                step: t,
                reason: "no exploration direction found".into(),
            },
            other => other,
        })?;
        if mode == InputMode::Exploration {
            pending_rank = Some(numeric_rank(
                &bufs.stacked_state_input(),
                RankTolerance::new(cfg.rank_tau),
            )?);
        }

        steps.push(StepRecord {
            t,
            x: x.clone(),
            xm: xm.clone(),
            u: u_next.clone(),
            mode,
            e_norm: (&x - &xm).norm(),
            residual_sq,
            matching_error,
            informative,
        });

        if tracker.is_unsolvable() {
            verdict = Verdict::Unsolvable;
            stop_step = t;
            break;
        }
        if informative && residual_sq <= scenario.epsilon {
            verdict = Verdict::Converged;
            stop_step = t;
            break;
        }

        let delta = compute_delta(&bufs, &theta, t, tracker.t_star(), model)?;
        theta = theta_update(&theta, &bufs, &delta, t, tracker.t_star())?;
        u = u_next;

        if !tracker_active && !u_cols.is_empty() {
            // The tracker is done; the raw trajectory is no longer needed.
            u_cols.clear();
            u_cols.shrink_to_fit();
            x_cols.clear();
            x_cols.shrink_to_fit();
        }
    }

    let last = steps.last().expect("at least the initial record exists");
    let report = RunReport {
        t_star: tracker.t_star(),
        verdict,
        stop_step,
        final_gains: current_gains(&bufs, &theta, n),
        final_matching_error: last.matching_error,
        final_residual_sq: last.residual_sq,
        seed: scenario.seed,
    };
    Ok(RunOutcome {
        report,
        steps,
        theta_log,
        informative_trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsolvable_pair_is_flagged_at_n_plus_m() {
        let scenario = presets::unsolvable_counterexample();
        let (report, _) = run(&scenario).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert_eq!(report.stop_step, 3);
        assert!(report.t_star.is_none());
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let scenario = presets::paper_scenarios()[0].clone();
        let (r1, s1) = run(&scenario).unwrap();
        let (r2, s2) = run(&scenario).unwrap();
        assert_eq!(r1.t_star, r2.t_star);
        assert_eq!(r1.stop_step, r2.stop_step);
        assert_eq!(r1.final_gains.k, r2.final_gains.k);
        assert_eq!(s1.len(), s2.len());
        for (a, b) in s1.iter().zip(s2.iter()) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.u, b.u);
        }
    }
}
