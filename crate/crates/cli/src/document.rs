//! The JSON document format shared by all subcommands.
//!
//! Every document is an object `{schema_version, kind, payload}`. Complex
//! numbers are `[re, im]` pairs and angles are radians.

use cohtomo_core::fock::{CoherenceIndex, CoherenceTensor, FixedNState, StateRepr};
use cohtomo_core::gadget::{EulerAngles, MeasurementSetting, PlateAngles, TableRow};
use cohtomo_core::recipe::{MeasurementRecord, Parity, Reconstruction, SettingsPlan};
use cohtomo_core::tomography::{DensityEstimate, StokesCovariance, StokesVector, Warning};
use cohtomo_core::Complex64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

pub type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: String,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Body {
    State(StatePayload),
    Plan(PlanPayload),
    Records(RecordsPayload),
    Tensor(TensorPayload),
    Density(DensityPayload),
    Table(TablePayload),
    Plates(PlatesPayload),
    Stokes(StokesPayload),
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::State(_) => "state",
            Body::Plan(_) => "plan",
            Body::Records(_) => "records",
            Body::Tensor(_) => "tensor",
            Body::Density(_) => "density",
            Body::Table(_) => "table",
            Body::Plates(_) => "plates",
            Body::Stokes(_) => "stokes",
        }
    }
}

impl Document {
    pub fn new(body: Body) -> Self {
        Document { schema_version: SCHEMA_VERSION.to_string(), body }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents hold only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: Document = serde_json::from_str(text).map_err(|e| format!("malformed document: {e}"))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}", doc.schema_version));
        }
        Ok(doc)
    }
}

/// Either `amplitudes` (pure) or `density` (mixed); index `n` counts
/// photons in mode 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePayload {
    pub photons: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Angle {
    pub label: String,
    pub radians: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingPayload {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanPayload {
    pub order: usize,
    pub parity: String,
    pub thetas: Vec<Angle>,
    pub phis: Vec<Angle>,
    pub settings: Vec<SettingPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `exact` or `simulated`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordPayload {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsPayload {
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Provenance>,
    pub records: Vec<RecordPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPayload {
    pub m: usize,
    pub betas: Vec<i64>,
    pub size: usize,
    /// `null` when not finite.
    pub condition: Option<f64>,
    pub scaled_condition: Option<f64>,
    pub residual: Option<f64>,
}

/// `entries[w][y]` is `⟨a1†^(N−w) a2†^w a1^(N−y) a2^y⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorPayload {
    pub order: usize,
    pub entries: Vec<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPayload {
    pub photons: usize,
    pub rho: Vec<Vec<Pair>>,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub warnings: Vec<String>,
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRowPayload {
    pub theta_label: String,
    pub phi_label: String,
    pub theta: f64,
    pub phi: f64,
    /// `[ξ, η, ζ]`.
    pub euler: [f64; 3],
    /// `[QP1, QP2, HP]`.
    pub plates: [f64; 3],
    pub printed_euler: [f64; 3],
    pub printed_plates: [f64; 3],
    pub euler_deviation: f64,
    pub plates_deviation: f64,
    pub euler_from_printed_plates: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePayload {
    pub rows: Vec<TableRowPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatesPayload {
    pub theta: f64,
    pub phi: f64,
    pub euler: [f64; 3],
    pub plates: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesPayload {
    /// `[S0, S1, S2, S3]`.
    pub means: [f64; 4],
    pub covariance: [[f64; 4]; 4],
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn matrix_rows(m: &DMatrix<Complex64>) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().map(|z| pair(*z)).collect()).collect()
}

fn square_matrix(rows: &[Vec<Pair>], dim: usize, what: &str) -> Result<DMatrix<Complex64>, String> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(format!("{what} must be {dim}×{dim}"));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| complex(rows[i][j])))
}

impl StatePayload {
    pub fn from_state(state: &FixedNState) -> Self {
        match state.repr() {
            StateRepr::Pure(c) => StatePayload {
                photons: state.photons(),
                amplitudes: Some(c.iter().map(|z| pair(*z)).collect()),
                density: None,
            },
            StateRepr::Mixed(rho) => {
                StatePayload { photons: state.photons(), amplitudes: None, density: Some(matrix_rows(rho)) }
            }
        }
    }

    /// Pure amplitudes are normalized on the way in.
    pub fn to_state(&self) -> Result<FixedNState, String> {
        let dim = self.photons + 1;
        match (&self.amplitudes, &self.density) {
            (Some(a), None) => {
                let amps: Vec<Complex64> = a.iter().map(|p| complex(*p)).collect();
                cohtomo_core::fock::make_fixed_n_state(self.photons, &amps).map(|s| s.state).map_err(|e| e.to_string())
            }
            (None, Some(rows)) => {
                FixedNState::mixed(self.photons, square_matrix(rows, dim, "density")?).map_err(|e| e.to_string())
            }
            _ => Err("state payload needs exactly one of `amplitudes` and `density`".into()),
        }
    }
}

impl PlanPayload {
    pub fn from_plan(plan: &SettingsPlan) -> Self {
        let angle = |f: &cohtomo_core::recipe::PiFraction| Angle { label: f.to_string(), radians: f.radians() };
        PlanPayload {
            order: plan.order,
            parity: match plan.parity {
                Parity::Even => "even".into(),
                Parity::Odd => "odd".into(),
            },
            thetas: plan.thetas.iter().map(angle).collect(),
            phis: plan.phis.iter().map(angle).collect(),
            settings: plan.settings.iter().map(|s| SettingPayload { theta: s.theta(), phi: s.phi() }).collect(),
        }
    }
}

impl RecordsPayload {
    pub fn new(order: usize, source: Option<Provenance>, records: &[MeasurementRecord]) -> Self {
        RecordsPayload {
            order,
            source,
            records: records
                .iter()
                .map(|r| RecordPayload {
                    theta: r.setting.theta(),
                    phi: r.setting.phi(),
                    value: r.value,
                    stderr: r.stderr,
                })
                .collect(),
        }
    }

    pub fn to_records(&self) -> Vec<MeasurementRecord> {
        self.records
            .iter()
            .map(|r| MeasurementRecord {
                setting: MeasurementSetting::new(r.theta, r.phi),
                value: r.value,
                stderr: r.stderr,
            })
            .collect()
    }
}

impl TensorPayload {
    pub fn from_tensor(tensor: &CoherenceTensor) -> Self {
        TensorPayload { order: tensor.order(), entries: matrix_rows(tensor.entries()), stderr: None, groups: vec![] }
    }

    pub fn from_reconstruction(rec: &Reconstruction) -> Self {
        let mut p = TensorPayload::from_tensor(&rec.tensor);
        p.stderr = rec.stderr.as_ref().map(|s| s.row_iter().map(|r| r.iter().copied().collect()).collect());
        p.groups = rec
            .groups
            .iter()
            .map(|g| GroupPayload {
                m: g.m,
                betas: g.betas.clone(),
                size: g.size,
                condition: finite(g.condition),
                scaled_condition: finite(g.scaled_condition),
                residual: finite(g.residual),
            })
            .collect();
        p
    }

    pub fn to_tensor(&self) -> Result<CoherenceTensor, String> {
        let m = square_matrix(&self.entries, self.order + 1, "tensor entries")?;
        CoherenceTensor::from_entries(self.order, m).map_err(|e| e.to_string())
    }

    pub fn get(&self, idx: CoherenceIndex) -> Complex64 {
        complex(self.entries[idx.w][idx.y])
    }
}

impl DensityPayload {
    pub fn from_estimate(est: &DensityEstimate) -> Self {
        DensityPayload {
            photons: est.photons,
            rho: matrix_rows(&est.rho),
            trace: est.trace,
            min_eigenvalue: est.min_eigenvalue,
            warnings: est.warnings.iter().map(describe_warning).collect(),
            projected: false,
        }
    }

    pub fn from_projected(est: &DensityEstimate, state: &FixedNState) -> Self {
        let rho = state.density();
        DensityPayload {
            photons: state.photons(),
            rho: matrix_rows(&rho),
            trace: rho.trace().re,
            min_eigenvalue: cohtomo_core::fock::min_eigenvalue(&rho),
            warnings: est.warnings.iter().map(describe_warning).collect(),
            projected: true,
        }
    }

    pub fn rho(&self) -> Result<DMatrix<Complex64>, String> {
        square_matrix(&self.rho, self.photons + 1, "rho")
    }
}

pub fn describe_warning(w: &Warning) -> String {
    match w {
        Warning::Normalization { trace } => format!("normalization: trace {trace:.6} differs from 1 by more than 0.05"),
        Warning::Positivity { min_eigenvalue } => format!("positivity: smallest eigenvalue {min_eigenvalue:.3e}"),
    }
}

fn euler_array(e: &EulerAngles) -> [f64; 3] {
    [e.xi, e.eta, e.zeta]
}

fn plate_array(p: &PlateAngles) -> [f64; 3] {
    [p.qp1, p.qp2, p.hp]
}

impl TablePayload {
    pub fn from_rows(rows: &[TableRow]) -> Self {
        TablePayload {
            rows: rows
                .iter()
                .map(|r| TableRowPayload {
                    theta_label: r.theta_label.to_string(),
                    phi_label: r.phi_label.to_string(),
                    theta: r.setting.theta(),
                    phi: r.setting.phi(),
                    euler: euler_array(&r.euler),
                    plates: plate_array(&r.plates),
                    printed_euler: euler_array(&r.printed_euler),
                    printed_plates: plate_array(&r.printed_plates),
                    euler_deviation: r.euler_deviation,
                    plates_deviation: r.plates_deviation,
                    euler_from_printed_plates: euler_array(&r.euler_from_printed_plates),
                    note: r.note.map(str::to_string),
                })
                .collect(),
        }
    }
}

impl PlatesPayload {
    pub fn new(setting: &MeasurementSetting, euler: &EulerAngles, plates: &PlateAngles) -> Self {
        PlatesPayload {
            theta: setting.theta(),
            phi: setting.phi(),
            euler: euler_array(euler),
            plates: plate_array(plates),
        }
    }
}

impl StokesPayload {
    pub fn new(means: &StokesVector, cov: &StokesCovariance) -> Self {
        let mut covariance = [[0.0; 4]; 4];
        for (i, row) in covariance.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = cov.v[(i, j)];
            }
        }
        StokesPayload { means: means.as_array(), covariance }
    }
}
