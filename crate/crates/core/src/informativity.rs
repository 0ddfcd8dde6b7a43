//! Data-informativity machinery: Hankel/PE checks, informativity for system
//! identification and for model reference control, informative-time tracking,
//! and offline gain extraction from informative data.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, numeric_rank, RankTolerance};
use crate::lti_models::{GainPair, ReferenceModel, StateSpacePlant};

pub use crate::linalg::numeric_rank as rank;

/// Relative residual tolerance for image-inclusion tests.
pub const IMG_TOL: f64 = 1e-8;

/// Recorded input-state data: inputs `u(0..t-1)` as columns of an `m x t`
/// matrix and states `x(0..t)` as columns of an `n x (t+1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    u_minus: DMatrix<f64>,
    x: DMatrix<f64>,
}

impl Trajectory {
    pub fn new(u_minus: DMatrix<f64>, x: DMatrix<f64>) -> Result<Self> {
        let t = u_minus.ncols();
        if t < 1 {
            return Err(Error::Config("trajectory needs t >= 1".into()));
        }
        if x.ncols() != t + 1 {
            return Err(Error::DimensionMismatch(format!(
                "trajectory with {} inputs needs {} states, got {}",
                t,
                t + 1,
                x.ncols()
            )));
        }
        Ok(Self { u_minus, x })
    }

    /// Simulate `inputs.ncols()` steps of the plant from `x0` and record the
    /// resulting trajectory.
    pub fn from_plant(
        plant: &StateSpacePlant,
        x0: &DVector<f64>,
        inputs: &DMatrix<f64>,
    ) -> Result<Self> {
        let t = inputs.ncols();
        let n = plant.state_dim();
        let mut x = DMatrix::zeros(n, t + 1);
        x.set_column(0, x0);
        for k in 0..t {
            let xk = DVector::from(x.column(k));
            let uk = DVector::from(inputs.column(k));
            let next = crate::lti_models::step(plant, &xk, &uk)?;
            x.set_column(k + 1, &next);
        }
        Self::new(inputs.clone(), x)
    }

    /// Number of recorded inputs.
    pub fn len(&self) -> usize {
        self.u_minus.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false // t >= 1 by construction
    }

    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.u_minus.nrows()
    }

    pub fn u_minus(&self) -> &DMatrix<f64> {
        &self.u_minus
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// First `t` state columns `x(0..t-1)`.
    pub fn x_minus(&self) -> DMatrix<f64> {
        self.x.columns(0, self.len()).into()
    }

    /// Last `t` state columns `x(1..t)`.
    pub fn x_plus(&self) -> DMatrix<f64> {
        self.x.columns(1, self.len()).into()
    }

    /// Stacked `[X_-; U_-]`, size `(n+m) x t`.
    pub fn stacked_state_input(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let m = self.input_dim();
        let t = self.len();
        let mut s = DMatrix::zeros(n + m, t);
        s.view_mut((0, 0), (n, t)).copy_from(&self.x_minus());
        s.view_mut((n, 0), (m, t)).copy_from(&self.u_minus);
        s
    }

    /// Stacked `[X_-; X_+]`, size `2n x t`.
    pub fn stacked_states(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let t = self.len();
        let mut s = DMatrix::zeros(2 * n, t);
        s.view_mut((0, 0), (n, t)).copy_from(&self.x_minus());
        s.view_mut((n, 0), (n, t)).copy_from(&self.x_plus());
        s
    }

    /// The prefix trajectory of length `t`.
    pub fn prefix(&self, t: usize) -> Result<Self> {
        if t < 1 || t > self.len() {
            return Err(Error::Config(format!(
                "prefix length {} out of range 1..={}",
                t,
                self.len()
            )));
        }
        Self::new(self.u_minus.columns(0, t).into(), self.x.columns(0, t + 1).into())
    }

    /// Write the trajectory as CSV: one row per step with columns
    /// `t, u_1..u_m, x_1..x_n`; the final row carries the state only.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let m = self.input_dim();
        let n = self.state_dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("u{i}")));
        header.extend((1..=n).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for k in 0..=self.len() {
            let mut rec = vec![k.to_string()];
            if k < self.len() {
                rec.extend(self.u_minus.column(k).iter().map(|v| format!("{v}")));
            } else {
                rec.extend(std::iter::repeat(String::new()).take(m));
            }
            rec.extend(self.x.column(k).iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a trajectory from the CSV layout written by [`export_csv`].
    /// Input and state widths are inferred from the `u*`/`x*` header columns.
    pub fn import_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        let m = header.iter().filter(|h| h.starts_with('u')).count();
        let n = header.iter().filter(|h| h.starts_with('x')).count();
        if m == 0 || n == 0 {
            return Err(Error::Config("trajectory CSV needs u* and x* columns".into()));
        }
        let mut u_cols: Vec<f64> = Vec::new();
        let mut x_cols: Vec<f64> = Vec::new();
        let mut rows = 0usize;
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 1 + m + n {
                return Err(Error::Config(format!(
                    "trajectory CSV row has {} fields, expected {}",
                    rec.len(),
                    1 + m + n
                )));
            }
            let u_fields: Vec<&str> = (1..=m).map(|i| rec.get(i).unwrap()).collect();
            let has_u = u_fields.iter().any(|f| !f.trim().is_empty());
            if has_u {
                for f in &u_fields {
                    u_cols.push(f.trim().parse().map_err(|_| {
                        Error::Config(format!("bad input value {f:?} in trajectory CSV"))
                    })?);
                }
            }
            for i in 0..n {
                let f = rec.get(1 + m + i).unwrap();
                x_cols.push(f.trim().parse().map_err(|_| {
                    Error::Config(format!("bad state value {f:?} in trajectory CSV"))
                })?);
            }
            rows += 1;
        }
        let t = rows.saturating_sub(1);
        if t < 1 || u_cols.len() != m * t {
            return Err(Error::Config(
                "trajectory CSV must have t input rows followed by one state-only row".into(),
            ));
        }
        // One record per step, fields pushed per column: already column-major.
        let u = DMatrix::from_iterator(m, t, u_cols.iter().copied());
        let x = DMatrix::from_iterator(n, t + 1, x_cols.iter().copied());
        Self::new(u, x)
    }
}

/// Block-Hankel matrix of depth `depth`: entry block `(i, j)` is column
/// `i + j` of `u`.
pub fn hankel(u: &DMatrix<f64>, depth: usize) -> Result<DMatrix<f64>> {
    let m = u.nrows();
    let t = u.ncols();
    if depth == 0 || depth > t {
        return Err(Error::HankelDepth { depth, len: t });
    }
    let cols = t - depth + 1;
    let mut h = DMatrix::zeros(m * depth, cols);
    for i in 0..depth {
        for j in 0..cols {
            h.view_mut((i * m, j), (m, 1)).copy_from(&u.column(i + j));
        }
    }
    Ok(h)
}

/// Persistence of excitation of order `order`: the depth-`order` Hankel
/// matrix of the input has full row rank.
pub fn is_pe(u: &DMatrix<f64>, order: usize) -> Result<bool> {
    let h = hankel(u, order)?;
    Ok(numeric_rank(&h, RankTolerance::default())? == u.nrows() * order)
}

/// The data determine the plant uniquely iff `[X_-; U_-]` has rank `n + m`.
pub fn informative_for_sysid(traj: &Trajectory) -> Result<bool> {
    let s = traj.stacked_state_input();
    Ok(numeric_rank(&s, RankTolerance::default())? == traj.state_dim() + traj.input_dim())
}

/// Informativity for model reference control, checked through the rank
/// equality between `[X_-; X_+]` and the same matrix augmented with the
/// target block `[I, 0; A_m, B_m]`.
pub fn informative_for_mrc(traj: &Trajectory, model: &ReferenceModel) -> Result<bool> {
    let n = traj.state_dim();
    if n != model.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory state dim {} vs model state dim {}",
            n,
            model.state_dim()
        )));
    }
    let p = model.reference_dim();
    let t = traj.len();
    let stacked = traj.stacked_states();
    let mut augmented = DMatrix::zeros(2 * n, t + n + p);
    augmented.view_mut((0, 0), (2 * n, t)).copy_from(&stacked);
    augmented
        .view_mut((0, t), (2 * n, n + p))
        .copy_from(&model.target_block());
    let tol = RankTolerance::default();
    Ok(numeric_rank(&stacked, tol)? == numeric_rank(&augmented, tol)?)
}

/// Minimal-norm solution `(V1, V2)` of `[X_-; X_+] [V1 V2] = [I, 0; A_m, B_m]`.
/// Errors if the least-squares residual exceeds the image tolerance, which
/// signals that the data were not informative for model reference control.
pub fn solve_v(traj: &Trajectory, model: &ReferenceModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = traj.state_dim();
    let p = model.reference_dim();
    let stacked = traj.stacked_states();
    let target = model.target_block();
    let w = lstsq_min_norm(&stacked, &target, RankTolerance::default().tau)?;
    let residual = (&stacked * &w - &target).norm();
    let tol = IMG_TOL * (1.0 + target.norm());
    if residual > tol {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance: tol,
        });
    }
    Ok((w.columns(0, n).into(), w.columns(n, p).into()))
}

/// Offline gain extraction from informative data: `K = U_- V1`, `L = U_- V2`.
pub fn gains_from_data(traj: &Trajectory, model: &ReferenceModel) -> Result<GainPair> {
    let (v1, v2) = solve_v(traj, model)?;
    Ok(GainPair {
        k: traj.u_minus() * v1,
        l: traj.u_minus() * v2,
    })
}

/// Tracks the first time the trajectory becomes informative for model
/// reference control. `t_star` never changes once set; if no informative
/// time is found by `t = n + m` the matching equations have no solution.
#[derive(Debug, Clone, PartialEq)]
pub struct InformativeTimeTracker {
    t_star: Option<usize>,
    unsolvable: bool,
    /// `n + m`: the latest step at which an informative time can occur.
    horizon: usize,
    /// `n + rank(B_m)`: checks are skipped below this step.
    lower_bound: usize,
}

impl InformativeTimeTracker {
    pub fn new(model: &ReferenceModel, input_dim: usize) -> Result<Self> {
        let n = model.state_dim();
        let bm_rank = numeric_rank(model.bm(), RankTolerance::default())?;
        Ok(Self {
            t_star: None,
            unsolvable: false,
            horizon: n + input_dim,
            lower_bound: n + bm_rank,
        })
    }

    pub fn t_star(&self) -> Option<usize> {
        self.t_star
    }

    pub fn is_unsolvable(&self) -> bool {
        self.unsolvable
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn lower_bound(&self) -> usize {
        self.lower_bound
    }
}

/// Advance the tracker with the full trajectory collected so far. Checks are
/// skipped while `t < n + rank(B_m)`; the first informative step fixes
/// `t_star`; reaching `t = n + m` without success marks the run unsolvable.
pub fn update_tracker(
    tracker: &InformativeTimeTracker,
    traj: &Trajectory,
    model: &ReferenceModel,
) -> Result<InformativeTimeTracker> {
    let mut next = tracker.clone();
    if next.t_star.is_some() || next.unsolvable {
        return Ok(next);
    }
    let t = traj.len();
    if t < next.lower_bound {
        return Ok(next);
    }
    if informative_for_mrc(traj, model)? {
        next.t_star = Some(t);
    } else if t >= next.horizon {
        next.unsolvable = true;
    }
    Ok(next)
}

/// Initial-excitation diagnostic: true iff the Gram matrix
/// `sum_t [x; u][x; u]^T - delta I` is positive definite.
pub fn initial_excitation_holds(traj: &Trajectory, delta: f64) -> Result<bool> {
    assert!(delta > 0.0, "delta must be positive");
    let s = traj.stacked_state_input();
    let gram = &s * s.transpose();
    let min_eig = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(min_eig > delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hankel_scalar_depth_two() {
        let u = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let h = hankel(&u, 2).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }

    #[test]
    fn hankel_depth_one_is_identity() {
        let u = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(hankel(&u, 1).unwrap(), u);
    }

    #[test]
    fn hankel_rejects_excess_depth() {
        let u = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(hankel(&u, 3), Err(Error::HankelDepth { .. })));
    }

    #[test]
    fn pe_of_constant_sequence() {
        let u = DMatrix::from_row_slice(1, 5, &[2.0; 5]);
        assert!(is_pe(&u, 1).unwrap());
        assert!(!is_pe(&u, 2).unwrap());
    }

    #[test]
    fn zero_input_is_never_pe() {
        let u = DMatrix::<f64>::zeros(1, 6);
        for order in 1..=3 {
            assert!(!is_pe(&u, order).unwrap());
        }
    }

    #[test]
    fn scalar_rank_one_data_not_sysid_informative() {
        // n = m = 1, data (u, x) = ((1), (0, 1)): stacked [[0], [1]] has rank 1.
        let traj = Trajectory::new(
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
        )
        .unwrap();
        assert!(!informative_for_sysid(&traj).unwrap());
    }

    #[test]
    fn model_data_with_zero_reference_not_mrc_informative() {
        // States from the model under r = 0 only span the autonomous part,
        // so im B_m is not covered.
        let model = ReferenceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        let n = 2;
        let mut xs = DMatrix::zeros(n, n + 1);
        xs.set_column(0, &DVector::from_row_slice(&[1.0, 0.0]));
        xs.set_column(1, &DVector::from_row_slice(&[0.0, 1.0]));
        // x(2) = Am x(1)
        let x2 = model.am() * xs.column(1);
        xs.set_column(2, &DVector::from(x2));
        // inputs are irrelevant for the MRC check; fill with zeros
        let traj = Trajectory::new(DMatrix::zeros(1, 2), xs).unwrap();
        assert!(!informative_for_mrc(&traj, &model).unwrap());
    }

    #[test]
    fn solve_v_on_identity_data() {
        // X_- = I, X_+ = A_m, with an appended zero-reference column so the
        // target includes B_m columns; residual must flag non-informativity.
        let model = ReferenceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        let mut x = DMatrix::zeros(2, 3);
        x.set_column(0, &DVector::from_row_slice(&[1.0, 0.0]));
        x.set_column(1, &DVector::from_row_slice(&[0.0, 1.0]));
        x.set_column(2, &DVector::from(model.am() * x.column(1)));
        let traj = Trajectory::new(DMatrix::zeros(1, 2), x).unwrap();
        assert!(matches!(
            solve_v(&traj, &model),
            Err(Error::ResidualTooLarge { .. })
        ));
    }

    #[test]
    fn trajectory_prefix_and_views() {
        let u = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let x = DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 3.0, 6.0]);
        let traj = Trajectory::new(u, x).unwrap();
        assert_eq!(traj.x_minus(), DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 3.0]));
        assert_eq!(traj.x_plus(), DMatrix::from_row_slice(1, 3, &[1.0, 3.0, 6.0]));
        let pre = traj.prefix(2).unwrap();
        assert_eq!(pre.len(), 2);
        assert_eq!(pre.x().ncols(), 3);
    }

    #[test]
    fn zero_data_fails_initial_excitation() {
        let traj = Trajectory::new(DMatrix::zeros(1, 3), DMatrix::zeros(1, 4)).unwrap();
        assert!(!initial_excitation_holds(&traj, 1e-12).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let u = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, -2.0, -3.0]);
        let x = DMatrix::from_row_slice(1, 4, &[0.5, 1.5, 2.5, 3.5]);
        let traj = Trajectory::new(u, x).unwrap();
        let dir = std::env::temp_dir().join("dimrac_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.csv");
        traj.export_csv(&path).unwrap();
        let back = Trajectory::import_csv(&path).unwrap();
        assert_eq!(back, traj);
    }
}
