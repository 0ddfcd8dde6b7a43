//! Discrete-time LTI plant and reference-model dynamics, structural checks,
//! and the ground-truth matching oracle used in tests and diagnostics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, numeric_rank, spectral_radius, RankTolerance};

/// Margin below 1 for the strict Schur check.
pub const SCHUR_MARGIN: f64 = 1e-10;

/// Relative residual tolerance for the matching-equation oracle.
pub const MATCH_TOL: f64 = 1e-8;

/// The unknown system `x(t+1) = A x(t) + B u(t)`. Controllability of `(A, B)`
/// is checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpacePlant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl StateSpacePlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || b.ncols() == 0 {
            return Err(Error::Config("plant needs n >= 1 and m >= 1".into()));
        }
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "plant A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "plant B has {} rows, expected {}",
                b.nrows(),
                a.nrows()
            )));
        }
        if !is_controllable(&a, &b)? {
            return Err(Error::Config("plant (A, B) is not controllable".into()));
        }
        Ok(Self { a, b })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
}

/// The known target `x_m(t+1) = A_m x_m(t) + B_m r(t)`, with `A_m` Schur and
/// `(A_m, B_m)` controllable.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    am: DMatrix<f64>,
    bm: DMatrix<f64>,
}

impl ReferenceModel {
    pub fn new(am: DMatrix<f64>, bm: DMatrix<f64>) -> Result<Self> {
        if am.nrows() == 0 || bm.ncols() == 0 {
            return Err(Error::Config("reference model needs n >= 1 and p >= 1".into()));
        }
        if !am.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "model A_m must be square, got {}x{}",
                am.nrows(),
                am.ncols()
            )));
        }
        if bm.nrows() != am.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "model B_m has {} rows, expected {}",
                bm.nrows(),
                am.nrows()
            )));
        }
        if !is_schur(&am)? {
            return Err(Error::Config("reference model A_m is not Schur".into()));
        }
        if !is_controllable(&am, &bm)? {
            return Err(Error::Config("reference model (A_m, B_m) is not controllable".into()));
        }
        Ok(Self { am, bm })
    }

    pub fn state_dim(&self) -> usize {
        self.am.nrows()
    }

    pub fn reference_dim(&self) -> usize {
        self.bm.ncols()
    }

    pub fn am(&self) -> &DMatrix<f64> {
        &self.am
    }

    pub fn bm(&self) -> &DMatrix<f64> {
        &self.bm
    }

    /// Stacked target block `[I, 0; A_m, B_m]`, size `2n x (n+p)`.
    pub fn target_block(&self) -> DMatrix<f64> {
        let n = self.state_dim();
        let p = self.reference_dim();
        let mut t = DMatrix::zeros(2 * n, n + p);
        t.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
        t.view_mut((n, 0), (n, n)).copy_from(&self.am);
        t.view_mut((n, n), (n, p)).copy_from(&self.bm);
        t
    }
}

/// Static feedback gains `u = K x + L r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainPair {
    pub k: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

/// One plant transition: `A x + B u`.
pub fn step(plant: &StateSpacePlant, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != plant.state_dim() || u.len() != plant.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "step: got x of len {}, u of len {}; plant is {}x{}",
            x.len(),
            u.len(),
            plant.state_dim(),
            plant.input_dim()
        )));
    }
    Ok(&plant.a * x + &plant.b * u)
}

/// One reference-model transition: `A_m x_m + B_m r`.
pub fn reference_step(
    model: &ReferenceModel,
    xm: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<DVector<f64>> {
    if xm.len() != model.state_dim() || r.len() != model.reference_dim() {
        return Err(Error::DimensionMismatch(format!(
            "reference_step: got x_m of len {}, r of len {}; model is {}x{}",
            xm.len(),
            r.len(),
            model.state_dim(),
            model.reference_dim()
        )));
    }
    Ok(&model.am * xm + &model.bm * r)
}

/// True iff the controllability matrix `[B, AB, ..., A^{n-1}B]` has numeric
/// rank `n`.
pub fn is_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<bool> {
    if a.nrows() != a.ncols() || b.nrows() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "is_controllable: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let n = a.nrows();
    let q = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * q);
    let mut block = b.clone();
    for i in 0..n {
        ctrb.view_mut((0, i * q), (n, q)).copy_from(&block);
        if i + 1 < n {
            block = a * block;
        }
    }
    Ok(numeric_rank(&ctrb, RankTolerance::default())? == n)
}

/// True iff the spectral radius is below `1 - SCHUR_MARGIN`.
pub fn is_schur(a: &DMatrix<f64>) -> Result<bool> {
    Ok(spectral_radius(a)? < 1.0 - SCHUR_MARGIN)
}

/// Frobenius norm of the stacked block `[A_s + B_s K - A_m, B_s L - B_m]`.
/// Diagnostic only: needs the hidden plant.
pub fn matching_residual(plant: &StateSpacePlant, model: &ReferenceModel, gains: &GainPair) -> f64 {
    let da = plant.a() + plant.b() * &gains.k - model.am();
    let db = plant.b() * &gains.l - model.bm();
    (da.norm_squared() + db.norm_squared()).sqrt()
}

/// Ground-truth matching oracle: candidate gains from the pseudoinverse of
/// `B_s`, accepted iff the residual is small relative to the target norms.
/// Returns `None` when the matching equations have no solution.
pub fn matching_solvable(plant: &StateSpacePlant, model: &ReferenceModel) -> Result<Option<GainPair>> {
    let k = lstsq_min_norm(plant.b(), &(model.am() - plant.a()), 1e-12)?;
    let l = lstsq_min_norm(plant.b(), model.bm(), 1e-12)?;
    let gains = GainPair { k, l };
    let scale = (model.am().norm_squared() + model.bm().norm_squared()).sqrt();
    if matching_residual(plant, model, &gains) <= MATCH_TOL * (1.0 + scale) {
        Ok(Some(gains))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brunovsky() -> (DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
    }

    #[test]
    fn step_at_origin_is_zero() {
        let (a, b) = brunovsky();
        let plant = StateSpacePlant::new(a, b).unwrap();
        let x = DVector::zeros(2);
        let u = DVector::zeros(1);
        assert_eq!(step(&plant, &x, &u).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let (a, b) = brunovsky();
        let plant = StateSpacePlant::new(a, b).unwrap();
        let x = DVector::zeros(3);
        let u = DVector::zeros(1);
        assert!(matches!(
            step(&plant, &x, &u),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn brunovsky_pair_is_controllable() {
        let (a, b) = brunovsky();
        assert!(is_controllable(&a, &b).unwrap());
    }

    #[test]
    fn invariant_subspace_is_not_controllable() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        assert!(!is_controllable(&a, &b).unwrap());
    }

    #[test]
    fn zero_matrix_is_schur_identity_is_not() {
        assert!(is_schur(&DMatrix::zeros(3, 3)).unwrap());
        assert!(!is_schur(&DMatrix::identity(3, 3)).unwrap());
    }

    #[test]
    fn exact_gains_have_zero_residual() {
        // B_s = I so K = A_m - A_s, L = B_m solve the matching equations.
        let a_s = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, -0.2, 0.1]);
        let b_s = DMatrix::identity(2, 2);
        let a_m = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.1, -0.4]);
        let b_m = DMatrix::from_row_slice(2, 1, &[1.0, 0.5]);
        let plant = StateSpacePlant::new(a_s.clone(), b_s.clone()).unwrap();
        let model = ReferenceModel::new(a_m.clone(), b_m.clone()).unwrap();
        let gains = GainPair {
            k: &a_m - &a_s,
            l: b_m.clone(),
        };
        assert!(matching_residual(&plant, &model, &gains) < 1e-14);
        let solved = matching_solvable(&plant, &model).unwrap().unwrap();
        assert!(matching_residual(&plant, &model, &solved) < 1e-12);
    }

    #[test]
    fn image_obstruction_is_unsolvable() {
        // im B_m is not contained in im B_s, so no L exists.
        let plant = StateSpacePlant::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        )
        .unwrap();
        let model = ReferenceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.5]),
            DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
        )
        .unwrap();
        assert!(matching_solvable(&plant, &model).unwrap().is_none());
    }

    #[test]
    fn matching_residual_matches_direct_summation() {
        // Zero plant/model: residual is the Frobenius norm of [K_img, L_img]
        // computed by element-wise sums of squares.
        let b_s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let plant = StateSpacePlant::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            b_s.clone(),
        )
        .unwrap();
        let model = ReferenceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.1, 0.05, 0.0, 0.2]),
            DMatrix::from_row_slice(2, 1, &[0.2, -0.3]),
        )
        .unwrap();
        let gains = GainPair {
            k: DMatrix::from_row_slice(2, 2, &[0.5, -1.0, 2.0, 0.25]),
            l: DMatrix::from_row_slice(2, 1, &[1.5, -0.5]),
        };
        let da = plant.a() + &b_s * &gains.k - model.am();
        let db = &b_s * &gains.l - model.bm();
        let mut ss = 0.0;
        for v in da.iter().chain(db.iter()) {
            ss += v * v;
        }
        let direct = ss.sqrt();
        assert!((matching_residual(&plant, &model, &gains) - direct).abs() < 1e-14);
    }
}
