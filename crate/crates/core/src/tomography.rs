//! Density matrices from coherences, and quantum Stokes parameters.
//!
//! For an `N`-photon state the order-`N` coherences and the density matrix
//! carry the same information:
//! `T(w, y) = √((N−w)! w! (N−y)! y!) · ⟨N−y|ρ|N−w⟩`, with the basis index
//! counting photons in mode 1. Reconstructing all coherences is therefore a
//! full state tomography.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{min_eigenvalue, CoherenceIndex, CoherenceTensor, FixedNState};
use crate::math::factorial;

const SYMMETRY_TOL: f64 = 1e-10;
const TRACE_WARN: f64 = 0.05;
const POSITIVITY_WARN: f64 = 1e-6;

/// Non-fatal findings about a density estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The trace is more than `0.05` away from one.
    Normalization { trace: f64 },
    /// An eigenvalue lies below `-1e-6`.
    Positivity { min_eigenvalue: f64 },
}

/// Density matrix obtained from a coherence tensor, before any repair.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub photons: usize,
    /// `ρ_{mn} = ⟨m|ρ|n⟩`, Hermitian by construction.
    pub rho: DMatrix<Complex64>,
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub warnings: Vec<Warning>,
}

fn sqrt_weight(n: usize, m: usize) -> f64 {
    ((factorial(m) * factorial(n - m)) as f64).sqrt()
}

pub fn density_from_coherences(tensor: &CoherenceTensor) -> Result<DensityEstimate> {
    tensor.check_hermitian(SYMMETRY_TOL)?;
    let n = tensor.order();
    let dim = n + 1;
    let mut rho = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for k in 0..dim {
            let t = tensor.get(CoherenceIndex::new(n - k, n - m));
            rho[(m, k)] = t / (sqrt_weight(n, m) * sqrt_weight(n, k));
        }
    }
    // average away the rounding-level anti-Hermitian part
    let rho = (&rho + rho.adjoint()).scale(0.5);
    let trace = rho.trace().re;
    let min_eig = min_eigenvalue(&rho);
    let mut warnings = Vec::new();
    if (trace - 1.0).abs() > TRACE_WARN {
        warnings.push(Warning::Normalization { trace });
    }
    if min_eig < -POSITIVITY_WARN {
        warnings.push(Warning::Positivity { min_eigenvalue: min_eig });
    }
    Ok(DensityEstimate { photons: n, rho, trace, min_eigenvalue: min_eig, warnings })
}

impl DensityEstimate {
    /// The estimate as a validated state; fails unless it is already a
    /// density matrix within the tolerances of [`FixedNState::mixed`].
    pub fn to_state(&self) -> Result<FixedNState> {
        FixedNState::mixed(self.photons, self.rho.clone())
    }

    /// Nearest positive semidefinite matrix with unit trace: negative
    /// eigenvalues are clipped to zero and the rest rescaled.
    pub fn project_psd(&self) -> Result<FixedNState> {
        let eig = self.rho.clone().symmetric_eigen();
        let clipped = eig.eigenvalues.map(|l| l.max(0.0));
        let total: f64 = clipped.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Normalization("no positive eigenvalue to keep".into()));
        }
        let vecs = &eig.eigenvectors;
        let diag = DMatrix::from_diagonal(&clipped.map(|l| Complex64::new(l / total, 0.0)));
        let rho = vecs * diag * vecs.adjoint();
        let rho = (&rho + rho.adjoint()).scale(0.5);
        FixedNState::mixed(self.photons, rho)
    }
}

/// Exact inverse of [`density_from_coherences`].
pub fn coherences_from_density(state: &FixedNState) -> CoherenceTensor {
    let n = state.photons();
    let rho = state.density();
    let mut t = CoherenceTensor::zeros(n);
    for idx in CoherenceIndex::all(n) {
        let weight = sqrt_weight(n, n - idx.w) * sqrt_weight(n, n - idx.y);
        t.set(idx, rho[(n - idx.y, n - idx.w)] * weight);
    }
    t
}

/// `(S0, S1, S2, S3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    /// `S1² + S2² + S3² − S0²`, non-positive up to rounding.
    pub fn polarization_excess(&self) -> f64 {
        self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3 - self.s0 * self.s0
    }
}

/// Stokes parameters of a classical field with amplitudes `α1`, `α2`.
pub fn classical_stokes(alpha1: Complex64, alpha2: Complex64) -> StokesVector {
    let cross = alpha1.conj() * alpha2;
    let s3 = Complex64::new(0.0, -1.0) * (cross - alpha1 * alpha2.conj());
    StokesVector {
        s0: alpha1.norm_sqr() + alpha2.norm_sqr(),
        s1: alpha1.norm_sqr() - alpha2.norm_sqr(),
        s2: 2.0 * cross.re,
        s3: s3.re,
    }
}

/// `S_i = Σ_{kl} M^i_{kl} a_k† a_l` with `M = (1, σ3, σ1, σ2)`.
fn stokes_generators() -> [Matrix2<Complex64>; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [Matrix2::new(o, z, z, o), Matrix2::new(o, z, z, -o), Matrix2::new(z, o, o, z), Matrix2::new(z, -i, i, z)]
}

fn check_first_order(first: &CoherenceTensor) -> Result<()> {
    if first.order() != 1 {
        return Err(Error::Dimension { expected: 2, actual: first.order() + 1 });
    }
    first.check_hermitian(SYMMETRY_TOL)
}

/// Mean Stokes parameters from the four first-order coherences.
pub fn stokes_means(first: &CoherenceTensor) -> Result<StokesVector> {
    check_first_order(first)?;
    let g = |w, y| first.get(CoherenceIndex::new(w, y));
    let (n1, n2) = (g(0, 0).re, g(1, 1).re);
    // ⟨a1†a2⟩ is (w, y) = (0, 1)
    let (c12, c21) = (g(0, 1), g(1, 0));
    Ok(StokesVector { s0: n1 + n2, s1: n1 - n2, s2: (c12 + c21).re, s3: (Complex64::new(0.0, -1.0) * (c12 - c21)).re })
}

/// `V_ij = ½⟨{S_i, S_j}⟩ − ⟨S_i⟩⟨S_j⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesCovariance {
    pub v: Matrix4<f64>,
}

/// One normally-ordered moment in the anticommutator table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalTerm {
    pub coefficient: Complex64,
    /// 1 or 2.
    pub order: usize,
    pub index: CoherenceIndex,
}

/// `½⟨{S_i, S_j}⟩` as a combination of first- and second-order coherences.
///
/// Generated once by normal ordering
/// `a_k† a_l a_p† a_q = a_k† a_p† a_l a_q + δ_lp a_k† a_q`.
pub fn anticommutator_table() -> &'static [[Vec<NormalTerm>; 4]; 4] {
    static TABLE: OnceLock<[[Vec<NormalTerm>; 4]; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gens = stokes_generators();
        let mut table: [[Vec<NormalTerm>; 4]; 4] = Default::default();
        for (i, row) in table.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut terms: Vec<NormalTerm> = Vec::new();
                let mut push = |coefficient: Complex64, order: usize, index: CoherenceIndex| {
                    if coefficient.norm() == 0.0 {
                        return;
                    }
                    match terms.iter_mut().find(|t| t.order == order && t.index == index) {
                        Some(t) => t.coefficient += coefficient,
                        None => terms.push(NormalTerm { coefficient, order, index }),
                    }
                };
                for (a, b) in [(i, j), (j, i)] {
                    for k in 0..2 {
                        for l in 0..2 {
                            for p in 0..2 {
                                for q in 0..2 {
                                    let c = gens[a][(k, l)] * gens[b][(p, q)] * 0.5;
                                    push(c, 2, CoherenceIndex::new(k + p, l + q));
                                    if l == p {
                                        push(c, 1, CoherenceIndex::new(k, q));
                                    }
                                }
                            }
                        }
                    }
                }
                terms.retain(|t| t.coefficient.norm() > 0.0);
                *cell = terms;
            }
        }
        table
    })
}

/// Stokes covariance from the first- and second-order coherences.
pub fn stokes_variances(first: &CoherenceTensor, second: &CoherenceTensor) -> Result<StokesCovariance> {
    check_first_order(first)?;
    if second.order() != 2 {
        return Err(Error::Dimension { expected: 3, actual: second.order() + 1 });
    }
    second.check_hermitian(SYMMETRY_TOL)?;
    let means = stokes_means(first)?.as_array();
    let table = anticommutator_table();
    let mut v = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let sym: Complex64 = table[i][j]
                .iter()
                .map(|t| t.coefficient * if t.order == 1 { first.get(t.index) } else { second.get(t.index) })
                .sum();
            let value = sym.re - means[i] * means[j];
            v[(i, j)] = value;
            v[(j, i)] = value;
        }
    }
    Ok(StokesCovariance { v })
}
