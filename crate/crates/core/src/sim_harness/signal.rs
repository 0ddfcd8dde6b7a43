use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Reference-input specification: i.i.d. normal draws with a configured
/// standard deviation, or a fixed constant vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    NormalRandom { stddev: f64 },
    Constant { vector: Vec<f64> },
}

impl ReferenceSpec {
    pub fn dim_or(&self, default: usize) -> usize {
        match self {
            ReferenceSpec::NormalRandom { .. } => default,
            ReferenceSpec::Constant { vector } => vector.len(),
        }
    }
}

/// Draw `r(t)`. The RNG carries all run randomness, so each call consumes
/// `p` draws for the normal spec and none for the constant one.
pub fn reference_signal<R: Rng>(spec: &ReferenceSpec, p: usize, rng: &mut R) -> DVector<f64> {
    match spec {
        ReferenceSpec::NormalRandom { stddev } => {
            DVector::from_fn(p, |_, _| stddev * rng.sample::<f64, _>(StandardNormal))
        }
        ReferenceSpec::Constant { vector } => DVector::from_row_slice(vector),
    }
}
