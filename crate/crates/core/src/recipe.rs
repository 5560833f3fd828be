//! Measurement plans and reconstruction of all order-`N` coherences from
//! `(N+1)^2` single-port intensity moments.
//!
//! Writing the moment behind the gadget with `α = w + y` and `β = y − w`,
//! the phase enters only as `e^{iβφ}`:
//!
//! ```text
//! x(θ, φ) = Σ_β e^{iβφ} Σ_{α ∈ G_β} C(N, (α+β)/2) C(N, (α−β)/2)
//!                 cos^(2N−α) θ sin^α θ  T(w, y)
//! ```
//!
//! The plan measures on `K` equally spaced phases `φ_k = 2πk/K`. Averaging
//! the records of one `θ_j` with weights `e^{imφ_k}` cancels every `β` except
//! those with `β ≡ −m (mod K)`, because the nontrivial `K`-th roots of unity
//! sum to zero. Each weight `m` leaves a small square system in the
//! surviving coherences whose columns carry pairwise distinct powers of
//! `tan θ_j`, so it is a generalized Vandermonde system and nonsingular.
//!
//! * Even `N`: `K = N+1` phases and `N+1` angles `θ_j = jπ/(2(N+2))`. Weight
//!   `m = 0` isolates the populations; `m = 1..=N/2` leaves
//!   `β ∈ {−m, N+1−m}`.
//! * Odd `N`: `K = N+2` phases, `N` angles `θ_j = jπ/(2(N+1))` and one extra
//!   record at `(0, 0)` that pins `⟨a1†^N a1^N⟩`. Weight `m = 1` leaves
//!   `β = −1`; `m = 2..=(N+1)/2` leaves `β ∈ {−m, N+2−m}`.
//!
//! The remaining coherences follow from `T(y, w) = conj(T(w, y))`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CoherenceIndex, CoherenceTensor};
use crate::gadget::MeasurementSetting;
use crate::linalg::{condition_number, scaled_condition_number, ScaledLu};
use crate::math::{binomial, MAX_ORDER};

/// Records are matched to plan settings within this angular tolerance.
pub const SETTING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// An angle `num/den · π`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PiFraction {
    pub num: u64,
    pub den: u64,
}

impl PiFraction {
    pub fn new(num: u64, den: u64) -> Self {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(num, den).max(1);
        PiFraction { num: num / g, den: den / g }
    }

    pub fn radians(&self) -> f64 {
        self.num as f64 * std::f64::consts::PI / self.den as f64
    }
}

impl fmt::Display for PiFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (1, 1) => write!(f, "π"),
            (n, 1) => write!(f, "{n}π"),
            (1, d) => write!(f, "π/{d}"),
            (n, d) => write!(f, "{n}π/{d}"),
        }
    }
}

/// The `(N+1)^2` settings that determine all order-`N` coherences.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingsPlan {
    pub order: usize,
    pub parity: Parity,
    pub thetas: Vec<PiFraction>,
    /// `φ_k = 2πk/K` for `k = 1..=K`; the last one is `2π`, which the
    /// corresponding [`MeasurementSetting`] stores as `0`.
    pub phis: Vec<PiFraction>,
    /// `(0, 0)` for odd orders.
    pub extra: Option<MeasurementSetting>,
    /// `θ`-major cross product of `thetas × phis`, followed by `extra`.
    pub settings: Vec<MeasurementSetting>,
}

pub fn settings_plan(order: usize) -> Result<SettingsPlan> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Range { what: "order", detail: format!("{order} not in 1..={MAX_ORDER}") });
    }
    let n = order as u64;
    let (parity, thetas, phis): (_, Vec<_>, Vec<_>) = if order.is_multiple_of(2) {
        (
            Parity::Even,
            (1..=n + 1).map(|j| PiFraction::new(j, 2 * (n + 2))).collect(),
            (1..=n + 1).map(|k| PiFraction::new(2 * k, n + 1)).collect(),
        )
    } else {
        (
            Parity::Odd,
            (1..=n).map(|j| PiFraction::new(j, 2 * (n + 1))).collect(),
            (1..=n + 2).map(|k| PiFraction::new(2 * k, n + 2)).collect(),
        )
    };
    let extra = (parity == Parity::Odd).then(|| MeasurementSetting::new(0.0, 0.0));
    let mut settings: Vec<MeasurementSetting> = thetas
        .iter()
        .flat_map(|t| phis.iter().map(move |p| MeasurementSetting::new(t.radians(), p.radians())))
        .collect();
    settings.extend(extra);
    Ok(SettingsPlan { order, parity, thetas, phis, extra, settings })
}

impl SettingsPlan {
    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Number of equally spaced phases `K`.
    pub fn phase_count(&self) -> usize {
        self.phis.len()
    }

    /// Aggregation weights needed to reach every coherence.
    pub fn weights(&self) -> Vec<usize> {
        match self.parity {
            Parity::Even => (0..=self.order / 2).collect(),
            Parity::Odd => (0..=self.order.div_ceil(2)).collect(),
        }
    }

    /// `β ∈ [−N, N]` with `β ≡ −m (mod K)`: the terms that survive weight `m`.
    pub fn surviving_betas(&self, m: usize) -> Vec<i64> {
        let n = self.order as i64;
        let k = self.phase_count() as i64;
        (-n..=n).filter(|b| (b + m as i64).rem_euclid(k) == 0).collect()
    }

    fn grid_slot(&self, j: usize, k: usize) -> usize {
        j * self.phis.len() + k
    }
}

/// One measured or simulated `⟨b1†^N b1^N⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub setting: MeasurementSetting,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl MeasurementRecord {
    pub fn exact(setting: MeasurementSetting, value: f64) -> Self {
        MeasurementRecord { setting, value, stderr: None }
    }

    pub fn estimated(setting: MeasurementSetting, value: f64, stderr: f64) -> Self {
        MeasurementRecord { setting, value, stderr: Some(stderr) }
    }

    /// Intensity moments are non-negative; estimates may dip by three
    /// standard errors.
    pub fn validate(&self) -> Result<()> {
        let slack = 3.0 * self.stderr.unwrap_or(0.0) + 1e-9 * self.value.abs().max(1.0);
        if !self.value.is_finite() || self.value < -slack {
            return Err(Error::InvalidRecord(format!(
                "value {} at (θ, φ) = ({}, {})",
                self.value,
                self.setting.theta(),
                self.setting.phi()
            )));
        }
        if let Some(s) = self.stderr {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidRecord(format!("stderr {s}")));
            }
        }
        Ok(())
    }
}

/// Record values arranged on the plan grid.
#[derive(Debug, Clone, PartialEq)]
struct PlanData {
    /// Values in plan order: grid slots, then the extra setting.
    values: Vec<f64>,
    stderrs: Option<Vec<f64>>,
}

fn arrange(records: &[MeasurementRecord], plan: &SettingsPlan) -> Result<PlanData> {
    let mut slots: Vec<Option<usize>> = vec![None; plan.len()];
    for (i, rec) in records.iter().enumerate() {
        let p = plan.settings.iter().position(|s| s.approx_eq(&rec.setting, SETTING_TOL)).ok_or_else(|| {
            Error::PlanMismatch(format!(
                "record {i} at (θ, φ) = ({}, {}) is not a setting of the order-{} plan",
                rec.setting.theta(),
                rec.setting.phi(),
                plan.order
            ))
        })?;
        if let Some(prev) = slots[p] {
            return Err(Error::PlanMismatch(format!("records {prev} and {i} share setting {p}")));
        }
        slots[p] = Some(i);
    }
    let mut values = Vec::with_capacity(plan.len());
    let mut stderrs = Some(Vec::with_capacity(plan.len()));
    for (p, slot) in slots.iter().enumerate() {
        let i = slot.ok_or_else(|| {
            let s = plan.settings[p];
            Error::PlanMismatch(format!("no record for setting {p} at (θ, φ) = ({}, {})", s.theta(), s.phi()))
        })?;
        values.push(records[i].value);
        stderrs = match (stderrs, records[i].stderr) {
            (Some(mut v), Some(s)) => {
                v.push(s);
                Some(v)
            }
            _ => None,
        };
    }
    Ok(PlanData { values, stderrs })
}

fn aggregate_values(plan: &SettingsPlan, values: &[f64], m: usize) -> Vec<Complex64> {
    let k_count = plan.phis.len();
    let weights: Vec<Complex64> =
        plan.phis.iter().map(|p| Complex64::from_polar(1.0 / k_count as f64, m as f64 * p.radians())).collect();
    (0..plan.thetas.len()).map(|j| (0..k_count).map(|k| weights[k] * values[plan.grid_slot(j, k)]).sum()).collect()
}

/// `Σ_k e^{imφ_k} x(θ_j, φ_k) / K` for every `θ_j` of the plan.
pub fn aggregate(records: &[MeasurementRecord], plan: &SettingsPlan, m: usize) -> Result<Vec<Complex64>> {
    let data = arrange(records, plan)?;
    Ok(aggregate_values(plan, &data.values, m))
}

/// The square system left after aggregating with weight `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSystem {
    pub order: usize,
    pub m: usize,
    pub betas: Vec<i64>,
    /// Column order of `matrix`.
    pub unknowns: Vec<CoherenceIndex>,
    /// `C(N,w) C(N,y) cos^(2N−α) θ_j sin^α θ_j`, one row per `θ_j`, plus the
    /// `θ = 0` row for odd `N` and `m = 0`.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<Complex64>,
    /// 2-norm condition number of `matrix`.
    pub condition: f64,
    /// Condition number after unit column scaling, as seen by the solver.
    pub scaled_condition: f64,
}

impl GroupSystem {
    /// Power of `cos θ` carried by each column.
    pub fn cos_exponents(&self) -> Vec<usize> {
        self.unknowns.iter().map(|idx| 2 * self.order - idx.alpha()).collect()
    }
}

fn group_matrix(plan: &SettingsPlan, m: usize) -> Result<(Vec<i64>, Vec<CoherenceIndex>, DMatrix<f64>)> {
    if !plan.weights().contains(&m) {
        return Err(Error::Range { what: "aggregation weight", detail: format!("{m} not in {:?}", plan.weights()) });
    }
    let n = plan.order;
    let betas = plan.surviving_betas(m);
    let unknowns: Vec<CoherenceIndex> = betas
        .iter()
        .flat_map(|&b| {
            CoherenceIndex::alphas_for_beta(n, b)
                .into_iter()
                .map(move |a| CoherenceIndex::from_alpha_beta(n, a, b).expect("α from G_β is admissible"))
        })
        .collect();
    let pins_population = plan.parity == Parity::Odd && m == 0;
    let rows = plan.thetas.len() + usize::from(pins_population);
    let mut matrix = DMatrix::zeros(rows, unknowns.len());
    for (j, theta) in plan.thetas.iter().enumerate() {
        let (s, c) = theta.radians().sin_cos();
        for (col, idx) in unknowns.iter().enumerate() {
            let a = idx.alpha() as i32;
            let binom = (binomial(n, idx.w) * binomial(n, idx.y)) as f64;
            matrix[(j, col)] = binom * c.powi(2 * n as i32 - a) * s.powi(a);
        }
    }
    if pins_population {
        // at θ = 0 only ⟨a1†^N a1^N⟩ contributes
        let col = unknowns.iter().position(|i| *i == CoherenceIndex::new(0, 0)).expect("β = 0 family present");
        matrix[(rows - 1, col)] = 1.0;
    }
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::PlanMismatch(format!("weight {m} gives a {}×{} system", matrix.nrows(), matrix.ncols())));
    }
    Ok((betas, unknowns, matrix))
}

/// Assembles the system for weight `m` from aggregated values (one per
/// `θ_j`) and, for odd orders with `m = 0`, the extra `θ = 0` record.
pub fn build_group_system(
    plan: &SettingsPlan,
    m: usize,
    aggregated: &[Complex64],
    extra: Option<&MeasurementRecord>,
) -> Result<GroupSystem> {
    let (betas, unknowns, matrix) = group_matrix(plan, m)?;
    if aggregated.len() != plan.thetas.len() {
        return Err(Error::Dimension { expected: plan.thetas.len(), actual: aggregated.len() });
    }
    let mut rhs: Vec<Complex64> = aggregated.to_vec();
    if matrix.nrows() > aggregated.len() {
        let rec = extra.ok_or_else(|| Error::PlanMismatch("odd order needs the extra (0, 0) record".into()))?;
        if rec.setting.theta().abs() > SETTING_TOL {
            return Err(Error::PlanMismatch(format!("extra record has θ = {}, expected 0", rec.setting.theta())));
        }
        rhs.push(Complex64::new(rec.value, 0.0));
    }
    Ok(GroupSystem {
        order: plan.order,
        m,
        betas,
        unknowns,
        condition: condition_number(&matrix),
        scaled_condition: scaled_condition_number(&matrix),
        rhs: DVector::from_vec(rhs),
        matrix,
    })
}

/// Diagnostics for one solved group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub m: usize,
    pub betas: Vec<i64>,
    pub size: usize,
    pub condition: f64,
    pub scaled_condition: f64,
    /// `‖A x − b‖ / ‖b‖`.
    pub residual: f64,
}

/// Reconstructed tensor with per-group diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub tensor: CoherenceTensor,
    pub groups: Vec<GroupReport>,
    /// Standard error of every entry, propagated linearly from the record
    /// standard errors. Present only when every record carries one.
    pub stderr: Option<DMatrix<f64>>,
}

struct PreparedGroup {
    m: usize,
    betas: Vec<i64>,
    unknowns: Vec<CoherenceIndex>,
    lu: ScaledLu,
    condition: f64,
    scaled_condition: f64,
}

/// Factorized group systems of one plan, reused for every right-hand side.
struct Solver<'a> {
    plan: &'a SettingsPlan,
    groups: Vec<PreparedGroup>,
}

impl<'a> Solver<'a> {
    fn new(plan: &'a SettingsPlan) -> Result<Self> {
        let groups = plan
            .weights()
            .into_iter()
            .map(|m| {
                let (betas, unknowns, matrix) = group_matrix(plan, m)?;
                let lu = ScaledLu::new(&matrix).ok_or(Error::SingularSystem { m })?;
                Ok(PreparedGroup {
                    m,
                    betas,
                    unknowns,
                    lu,
                    condition: condition_number(&matrix),
                    scaled_condition: scaled_condition_number(&matrix),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Solver { plan, groups })
    }

    /// `values` in plan order.
    fn solve(&self, values: &[f64]) -> (CoherenceTensor, Vec<GroupReport>) {
        let n = self.plan.order;
        let mut tensor = CoherenceTensor::zeros(n);
        let mut reports = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let mut rhs = aggregate_values(self.plan, values, g.m);
            if self.plan.parity == Parity::Odd && g.m == 0 {
                rhs.push(Complex64::new(values[values.len() - 1], 0.0));
            }
            let sol = g.lu.solve(&DVector::from_vec(rhs));
            for (idx, &v) in g.unknowns.iter().zip(sol.x.iter()) {
                if idx.w == idx.y {
                    tensor.set(*idx, Complex64::new(v.re, 0.0));
                } else {
                    tensor.set(*idx, v);
                    tensor.set(CoherenceIndex::new(idx.y, idx.w), v.conj());
                }
            }
            reports.push(GroupReport {
                m: g.m,
                betas: g.betas.clone(),
                size: g.unknowns.len(),
                condition: g.condition,
                scaled_condition: g.scaled_condition,
                residual: sol.residual,
            });
        }
        (tensor, reports)
    }
}

/// Recovers every order-`order` coherence from records that match
/// [`settings_plan`]`(order)` one to one, in any order.
pub fn reconstruct(records: &[MeasurementRecord], order: usize) -> Result<Reconstruction> {
    let plan = settings_plan(order)?;
    for r in records {
        r.validate()?;
    }
    let data = arrange(records, &plan)?;
    let solver = Solver::new(&plan)?;
    let (tensor, groups) = solver.solve(&data.values);

    let stderr = data.stderrs.map(|sigmas| {
        // the reconstruction is linear in the records
        let mut var = DMatrix::<f64>::zeros(order + 1, order + 1);
        let mut unit = vec![0.0; plan.len()];
        for (i, s) in sigmas.iter().enumerate() {
            if *s == 0.0 {
                continue;
            }
            unit[i] = 1.0;
            let (response, _) = solver.solve(&unit);
            unit[i] = 0.0;
            for (v, g) in var.iter_mut().zip(response.entries().iter()) {
                *v += g.norm_sqr() * s * s;
            }
        }
        var.map(f64::sqrt)
    });
    Ok(Reconstruction { tensor, groups, stderr })
}

/// Condition number of every group matrix of the plan, keyed by weight.
pub fn condition_report(plan: &SettingsPlan) -> Result<BTreeMap<usize, f64>> {
    plan.weights().into_iter().map(|m| Ok((m, condition_number(&group_matrix(plan, m)?.2)))).collect()
}
