//! Brute-force reference computations on an explicit two-mode Fock space.
//!
//! Each mode is truncated at `N` photons, which is exact for the `N`-photon
//! states used here: annihilators never leave the truncated space and the
//! number-conserving Stokes operators stay inside the `N`-photon sector.

#![allow(dead_code)]

use cohtomo_core::fock::FixedNState;
use cohtomo_core::gadget::{gadget_unitary, MeasurementSetting};
use cohtomo_core::Complex64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

/// Truncated two-mode space with ladder operators as dense matrices.
pub struct FockSpace {
    pub cutoff: usize,
    pub a1: CMatrix,
    pub a2: CMatrix,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut a = CMatrix::zeros(d, d);
        for n in 1..d {
            a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        let id = CMatrix::identity(d, d);
        FockSpace { cutoff, a1: a.kronecker(&id), a2: id.kronecker(&a) }
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.cutoff + 1) + n2
    }

    /// `ρ` of an `N`-photon state embedded in the product basis.
    pub fn embed(&self, state: &FixedNState) -> CMatrix {
        let n = state.photons();
        assert!(n <= self.cutoff);
        let rho = state.density();
        let mut big = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..=n {
            for j in 0..=n {
                big[(self.index(i, n - i), self.index(j, n - j))] = rho[(i, j)];
            }
        }
        big
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }
}

pub fn power(m: &CMatrix, k: usize) -> CMatrix {
    (0..k).fold(CMatrix::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
}

/// `Tr(ρ A† B)` computed as `Tr(B ρ A†)`.
fn expectation(rho: &CMatrix, a: &CMatrix, b: &CMatrix) -> Complex64 {
    (b * rho * a.adjoint()).trace()
}

/// `⟨a1†^(K−w) a2†^w a1^(K−y) a2^y⟩` for any order `K`.
pub fn oracle_coherence(space: &FockSpace, rho: &CMatrix, order: usize, w: usize, y: usize) -> Complex64 {
    let a = power(&space.a1, order - w) * power(&space.a2, w);
    let b = power(&space.a1, order - y) * power(&space.a2, y);
    expectation(rho, &a, &b)
}

/// Output modes of the gadget as matrices.
pub fn output_modes(space: &FockSpace, setting: &MeasurementSetting) -> (CMatrix, CMatrix) {
    let u = gadget_unitary(setting);
    let b1 = &space.a1 * u[(0, 0)] + &space.a2 * u[(0, 1)];
    let b2 = &space.a1 * u[(1, 0)] + &space.a2 * u[(1, 1)];
    (b1, b2)
}

/// `⟨b1†^i b2†^(N−i) b1^i b2^(N−i)⟩`.
pub fn oracle_correlation(state: &FixedNState, setting: &MeasurementSetting, port1: usize) -> f64 {
    let n = state.photons();
    let space = FockSpace::new(n);
    let rho = space.embed(state);
    let (b1, b2) = output_modes(&space, setting);
    let op = power(&b1, port1) * power(&b2, n - port1);
    expectation(&rho, &op, &op).re
}

pub fn oracle_moment(state: &FixedNState, setting: &MeasurementSetting) -> f64 {
    oracle_correlation(state, setting, state.photons())
}

/// `S_0..S_3` as matrices on the truncated space.
pub fn stokes_operators(space: &FockSpace) -> [CMatrix; 4] {
    let n1 = space.a1.adjoint() * &space.a1;
    let n2 = space.a2.adjoint() * &space.a2;
    let c12 = space.a1.adjoint() * &space.a2;
    let c21 = space.a2.adjoint() * &space.a1;
    let i = Complex64::new(0.0, 1.0);
    [&n1 + &n2, &n1 - &n2, &c12 + &c21, (&c21 - &c12) * i]
}

/// Means and `½⟨{S_i, S_j}⟩ − ⟨S_i⟩⟨S_j⟩` by explicit matrix products.
pub fn oracle_stokes(state: &FixedNState) -> ([f64; 4], [[f64; 4]; 4]) {
    let space = FockSpace::new(state.photons().max(1));
    let rho = space.embed(state);
    let s = stokes_operators(&space);
    let mean: Vec<f64> = s.iter().map(|op| (&rho * op).trace().re).collect();
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let anti = &s[i] * &s[j] + &s[j] * &s[i];
            v[i][j] = 0.5 * (&rho * anti).trace().re - mean[i] * mean[j];
        }
    }
    ([mean[0], mean[1], mean[2], mean[3]], v)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_amplitudes(n: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let v = DVector::from_fn(n + 1, |_, _| gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> FixedNState {
    let v = random_amplitudes(n, rng);
    cohtomo_core::fock::make_fixed_n_state(n, v.as_slice()).unwrap().state
}

/// Full-rank Ginibre state `G G† / Tr(G G†)`.
pub fn random_mixed(n: usize, rng: &mut ChaCha8Rng) -> FixedNState {
    let g = CMatrix::from_fn(n + 1, n + 1, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let rho = rho / tr;
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    FixedNState::mixed(n, rho).unwrap()
}

pub fn random_setting(rng: &mut ChaCha8Rng) -> MeasurementSetting {
    MeasurementSetting::new(
        rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
