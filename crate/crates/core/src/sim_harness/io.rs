//! File formats: scenario JSON, step-log CSV, and report JSON.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::adaptive_controller::ControllerConfig;
use crate::error::{Error, Result};
use crate::lti_models::{ReferenceModel, StateSpacePlant};

use super::{ReferenceSpec, RunReport, Scenario, StepRecord};

fn to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Config(format!("{what}: matrix must be nonempty")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: ragged matrix rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(rename = "Am")]
    pub am: Vec<Vec<f64>>,
    #[serde(rename = "Bm")]
    pub bm: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<ReferenceModel> {
        let file: ModelFile = serde_json::from_reader(std::fs::File::open(path)?)?;
        ReferenceModel::new(to_matrix(&file.am, "Am")?, to_matrix(&file.bm, "Bm")?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllerFile {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Defaults to the unit-norm all-ones vector.
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default = "default_c_r")]
    pub c_r: f64,
    #[serde(default = "default_warm_start")]
    pub warm_start: f64,
    #[serde(default = "default_rank_tau")]
    pub rank_tau: f64,
}

fn default_gamma() -> f64 {
    1.99
}
fn default_sigma() -> f64 {
    1e2
}
fn default_c_r() -> f64 {
    1.0
}
fn default_warm_start() -> f64 {
    0.995
}
fn default_rank_tau() -> f64 {
    1e-9
}

impl Default for ControllerFile {
    fn default() -> Self {
        Self {
            gamma: default_gamma(),
            sigma: default_sigma(),
            u0: None,
            c_r: default_c_r(),
            warm_start: default_warm_start(),
            rank_tau: default_rank_tau(),
        }
    }
}

/// On-disk scenario schema. Matrices are row-major arrays of arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub plant: PlantFile,
    pub model: ModelFile,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub xm0: Option<Vec<f64>>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub controller: ControllerFile,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_epsilon() -> f64 {
    1e-10
}
fn default_init_scale() -> f64 {
    1.0
}
fn default_max_steps() -> usize {
    10_000
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
    }

    pub fn into_scenario(self) -> Result<Scenario> {
        let plant = StateSpacePlant::new(
            to_matrix(&self.plant.a, "plant.A")?,
            to_matrix(&self.plant.b, "plant.B")?,
        )?;
        let model = ReferenceModel::new(
            to_matrix(&self.model.am, "model.Am")?,
            to_matrix(&self.model.bm, "model.Bm")?,
        )?;
        let m = plant.input_dim();
        let u0 = match &self.controller.u0 {
            Some(v) => DVector::from_row_slice(v),
            None => DVector::from_element(m, 1.0 / (m as f64).sqrt()),
        };
        let controller = ControllerConfig::new(
            self.controller.gamma,
            self.controller.sigma,
            u0,
            self.controller.c_r,
            self.controller.warm_start,
            self.controller.rank_tau,
        )?;
        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "scenario".to_string()),
            plant,
            model,
            reference: self.reference,
            x0: self.x0.map(|v| DVector::from_row_slice(&v)),
            xm0: self.xm0.map(|v| DVector::from_row_slice(&v)),
            init_scale: self.init_scale,
            controller,
            epsilon: self.epsilon,
            max_steps: self.max_steps,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Step-log CSV: `t, mode, u_1..u_m, x_1..x_n, xm_1..xm_n, e_norm,
/// residual_sq, matching_error, informative`.
pub fn export_csv(steps: &[StepRecord], n: usize, m: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "mode".to_string()];
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=n).map(|i| format!("xm_{i}")));
    header.extend(
        ["e_norm", "residual_sq", "matching_error", "informative"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    for rec in steps {
        let mut row = vec![rec.t.to_string(), rec.mode.to_string()];
        row.extend(rec.u.iter().map(|v| format!("{v}")));
        row.extend(rec.x.iter().map(|v| format!("{v}")));
        row.extend(rec.xm.iter().map(|v| format!("{v}")));
        row.push(format!("{}", rec.e_norm));
        row.push(format!("{}", rec.residual_sq));
        row.push(format!("{}", rec.matching_error));
        row.push(rec.informative.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportJson {
    t_star: Option<usize>,
    verdict: String,
    stop_step: usize,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    l: Vec<Vec<f64>>,
    final_matching_error: f64,
    final_residual_sq: f64,
    seed: u64,
}

/// Serialize the run report as JSON. The output is byte-stable for equal
/// inputs.
pub fn report_to_json(report: &RunReport) -> Result<String> {
    let json = ReportJson {
        t_star: report.t_star,
        verdict: report.verdict.to_string(),
        stop_step: report.stop_step,
        k: from_matrix(&report.final_gains.k),
        l: from_matrix(&report.final_gains.l),
        final_matching_error: report.final_matching_error,
        final_residual_sq: report.final_residual_sq,
        seed: report.seed,
    };
    Ok(serde_json::to_string_pretty(&json)?)
}

pub fn export_report(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_to_json(report)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_harness::presets;

    #[test]
    fn scenario_file_round_trip() {
        let json = r#"{
            "plant": {
                "A": [[0.0, 1.0], [0.0, 0.0]],
                "B": [[0.0], [1.0]]
            },
            "model": {
                "Am": [[0.0, 1.0], [0.0, 0.5]],
                "Bm": [[1.0], [1.0]]
            },
            "reference": {"kind": "constant", "vector": [0.1]},
            "epsilon": 1e-10,
            "max_steps": 50,
            "seed": 9
        }"#;
        let file: ScenarioFile = serde_json::from_str(json).unwrap();
        let scenario = file.into_scenario().unwrap();
        assert_eq!(scenario.seed, 9);
        assert_eq!(scenario.max_steps, 50);
        assert_eq!(scenario.controller.gamma, 1.99);
        assert_eq!(scenario.plant.input_dim(), 1);
    }

    #[test]
    fn empty_log_yields_header_only_csv() {
        let dir = std::env::temp_dir().join("dimrac_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        export_csv(&[], 2, 1, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        // 3 fixed + m + n + n + 3 trailing columns
        assert_eq!(text.trim().split(',').count(), 2 + 1 + 2 + 2 + 4);
    }

    #[test]
    fn report_json_is_stable() {
        let scenario = presets::unsolvable_counterexample();
        let (report, _) = crate::sim_harness::run(&scenario).unwrap();
        let a = report_to_json(&report).unwrap();
        let b = report_to_json(&report).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"verdict\": \"Unsolvable\""));
    }
}
