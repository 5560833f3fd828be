//! Two-mode Fock space with a fixed total photon number.
//!
//! A state with `N` photons lives in the `(N+1)`-dimensional span of
//! `|n⟩₁|N−n⟩₂`, indexed by `n`, the number of photons in mode 1, in
//! ascending order. Everything here is exact ladder-operator algebra on that
//! basis and serves as the reference the measurement pipeline is checked
//! against.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{factorial, falling_factorial, MAX_ORDER};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

/// Pure or mixed state of two bosonic modes with `N` photons in total.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedNState {
    photons: usize,
    repr: StateRepr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateRepr {
    /// Amplitudes `c_n` of `|n⟩₁|N−n⟩₂`.
    Pure(DVector<Complex64>),
    /// Density matrix `ρ_{mn} = ⟨m|ρ|n⟩`.
    Mixed(DMatrix<Complex64>),
}

/// Result of [`make_fixed_n_state`]: the normalized state and the norm of the
/// amplitudes it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedState {
    pub state: FixedNState,
    pub norm: f64,
}

/// Builds a pure `N`-photon state from unnormalized amplitudes.
pub fn make_fixed_n_state(photons: usize, amplitudes: &[Complex64]) -> Result<NormalizedState> {
    if amplitudes.len() != photons + 1 {
        return Err(Error::Dimension { expected: photons + 1, actual: amplitudes.len() });
    }
    let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Normalization(format!("amplitude norm is {norm}")));
    }
    let amps = DVector::from_iterator(photons + 1, amplitudes.iter().map(|c| c / norm));
    Ok(NormalizedState { state: FixedNState { photons, repr: StateRepr::Pure(amps) }, norm })
}

impl FixedNState {
    /// Fock basis state `|n⟩₁|N−n⟩₂`.
    pub fn basis(photons: usize, n: usize) -> Result<Self> {
        if n > photons {
            return Err(Error::Range { what: "basis index", detail: format!("{n} > N = {photons}") });
        }
        let mut amps = DVector::zeros(photons + 1);
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(FixedNState { photons, repr: StateRepr::Pure(amps) })
    }

    /// `(|N,0⟩ + |0,N⟩)/√2`.
    pub fn noon(photons: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); photons + 1];
        amps[0] += 1.0;
        amps[photons] += 1.0;
        make_fixed_n_state(photons, &amps).expect("NOON amplitudes are nonzero").state
    }

    /// Mixed state from a density matrix in the `n`-ascending basis.
    ///
    /// The matrix must have unit trace and be Hermitian to within `1e-12`,
    /// with no eigenvalue below `-1e-10`.
    pub fn mixed(photons: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let dim = photons + 1;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::Dimension { expected: dim, actual: rho.nrows().max(rho.ncols()) });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let herm = hermiticity_defect(&rho);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("density is not Hermitian ({herm:.3e})")));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < -EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(FixedNState { photons, repr: StateRepr::Mixed(rho) })
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.photons + 1
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<Complex64>> {
        match &self.repr {
            StateRepr::Pure(c) => Some(c),
            StateRepr::Mixed(_) => None,
        }
    }

    /// Density matrix `ρ_{mn} = ⟨m|ρ|n⟩`; for pure states `c_m c̄_n`.
    pub fn density(&self) -> DMatrix<Complex64> {
        match &self.repr {
            StateRepr::Pure(c) => c * c.adjoint(),
            StateRepr::Mixed(rho) => rho.clone(),
        }
    }

    /// `⟨m|ρ|n⟩` without materializing the matrix.
    fn element(&self, m: usize, n: usize) -> Complex64 {
        match &self.repr {
            StateRepr::Pure(c) => c[m] * c[n].conj(),
            StateRepr::Mixed(rho) => rho[(m, n)],
        }
    }

    /// Same state with the trace (or norm) measured, for invariance checks.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(c) => c.norm_squared(),
            StateRepr::Mixed(rho) => rho.trace().re,
        }
    }
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `⟨a1†^p a2†^q a1^r a2^s⟩` by ladder-operator algebra on the Fock basis.
///
/// The operator moves `|n⟩₁|N−n⟩₂` out of the `N`-photon space unless
/// `p + q = r + s`, so other moments vanish identically.
pub fn normally_ordered_moment(state: &FixedNState, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
    let total = state.photons;
    if p + q != r + s {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=total {
        let n2 = total - n;
        if n < r || n2 < s {
            continue;
        }
        // annihilate r in mode 1 and s in mode 2, then create p and q
        let (k1, k2) = (n - r, n2 - s);
        let (m1, m2) = (k1 + p, k2 + q);
        let weight =
            (falling_factorial(n, r) * falling_factorial(n2, s) * falling_factorial(m1, p) * falling_factorial(m2, q))
                .sqrt();
        // O|n⟩ = weight |m1⟩, so Tr(ρ O) picks up ⟨n|ρ|m1⟩
        acc += state.element(n, m1) * weight;
    }
    acc
}

/// Checks `U†U = 1` to within `1e-10`.
pub fn check_unitary(u: &Matrix2<Complex64>) -> Result<()> {
    let deviation = (u.adjoint() * u - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > UNITARY_TOL || !deviation.is_finite() {
        return Err(Error::Unitarity { deviation });
    }
    Ok(())
}

/// Fock-space representation `D(U)` of the mode transformation
/// `(b1, b2)ᵀ = U (a1, a2)ᵀ` on the `N`-photon space.
///
/// `D` is chosen so that moments of `a` in `D|ψ⟩` equal moments of `b` in
/// `|ψ⟩`. It maps `a_i† ↦ Σ_j U_ji a_j†` and fixes the vacuum; column `n` is
/// obtained by expanding `(U11 a1† + U21 a2†)^n (U12 a1† + U22 a2†)^(N−n)`.
/// `D(U2)·D(U1) = D(U2·U1)`.
pub fn fock_representation(photons: usize, u: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let dim = photons + 1;
    let sqrt_fact: Vec<f64> = (0..dim).map(|n| ((factorial(n) * factorial(photons - n)) as f64).sqrt()).collect();
    let mut rep = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        // poly[k] is the coefficient of a1†^k a2†^(deg-k)
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for (times, (x, y)) in [(n, (u[(0, 0)], u[(1, 0)])), (photons - n, (u[(0, 1)], u[(1, 1)]))] {
            for _ in 0..times {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += x * c;
                    next[k] += y * c;
                }
                poly = next;
            }
        }
        for (m, &c) in poly.iter().enumerate() {
            rep[(m, n)] = c * (sqrt_fact[m] / sqrt_fact[n]);
        }
    }
    rep
}

/// The state after the gadget, in the sense of [`fock_representation`].
pub fn apply_two_mode_unitary(state: &FixedNState, u: &Matrix2<Complex64>) -> Result<FixedNState> {
    check_unitary(u)?;
    let rep = fock_representation(state.photons, u);
    let repr = match &state.repr {
        StateRepr::Pure(c) => StateRepr::Pure(&rep * c),
        StateRepr::Mixed(rho) => StateRepr::Mixed(&rep * rho * rep.adjoint()),
    };
    Ok(FixedNState { photons: state.photons, repr })
}

/// Probability of finding `n` photons in mode 1, `n = 0..=N`.
pub fn photon_number_distribution(state: &FixedNState) -> Vec<f64> {
    match &state.repr {
        StateRepr::Pure(c) => c.iter().map(|z| z.norm_sqr()).collect(),
        StateRepr::Mixed(rho) => rho.diagonal().iter().map(|z| z.re.max(0.0)).collect(),
    }
}

/// Index of an order-`N` coherence `⟨a1†^(N−w) a2†^w a1^(N−y) a2^y⟩`.
///
/// `w` and `y` are the mode-2 powers of the creation and annihilation parts.
/// The combinations `α = w + y` and `β = y − w` organize the expansion behind
/// the gadget: the phase `φ` enters only through `e^{iβφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoherenceIndex {
    pub w: usize,
    pub y: usize,
}

impl CoherenceIndex {
    pub fn new(w: usize, y: usize) -> Self {
        CoherenceIndex { w, y }
    }

    pub fn alpha(self) -> usize {
        self.w + self.y
    }

    pub fn beta(self) -> i64 {
        self.y as i64 - self.w as i64
    }

    /// Inverse of `(alpha, beta)`; `None` unless `α ± β` is even and both
    /// powers fit in `0..=order`.
    pub fn from_alpha_beta(order: usize, alpha: usize, beta: i64) -> Option<Self> {
        let a = alpha as i64;
        if (a + beta) % 2 != 0 || a < beta.abs() {
            return None;
        }
        let y = ((a + beta) / 2) as usize;
        let w = ((a - beta) / 2) as usize;
        (w <= order && y <= order).then_some(CoherenceIndex { w, y })
    }

    /// The set `G_β = {2(N−κ) − |β| : κ = 0..=N−|β|}` of admissible `α`,
    /// in ascending order.
    pub fn alphas_for_beta(order: usize, beta: i64) -> Vec<usize> {
        let b = beta.unsigned_abs() as usize;
        if b > order {
            return Vec::new();
        }
        (0..=order - b).rev().map(|kappa| 2 * (order - kappa) - b).collect()
    }

    /// All `(N+1)^2` indices, `w`-major.
    pub fn all(order: usize) -> impl Iterator<Item = CoherenceIndex> {
        (0..=order).flat_map(move |w| (0..=order).map(move |y| CoherenceIndex { w, y }))
    }
}

/// All order-`N` normally-ordered moments of a two-mode field, stored as a
/// matrix indexed by `(w, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTensor {
    order: usize,
    entries: DMatrix<Complex64>,
}

impl CoherenceTensor {
    pub fn zeros(order: usize) -> Self {
        CoherenceTensor { order, entries: DMatrix::zeros(order + 1, order + 1) }
    }

    pub fn from_entries(order: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != order + 1 || entries.ncols() != order + 1 {
            return Err(Error::Dimension { expected: order + 1, actual: entries.nrows().max(entries.ncols()) });
        }
        Ok(CoherenceTensor { order, entries })
    }

    /// Order-`order` moments of `state` by direct ladder-operator evaluation.
    /// `order` need not equal the photon number of the state.
    pub fn from_state(state: &FixedNState, order: usize) -> Self {
        let mut t = CoherenceTensor::zeros(order);
        for idx in CoherenceIndex::all(order) {
            t.entries[(idx.w, idx.y)] = normally_ordered_moment(state, order - idx.w, idx.w, order - idx.y, idx.y);
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, idx: CoherenceIndex) -> Complex64 {
        self.entries[(idx.w, idx.y)]
    }

    pub fn set(&mut self, idx: CoherenceIndex, value: Complex64) {
        self.entries[(idx.w, idx.y)] = value;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `|entry(w,y) − conj(entry(y,w))|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }

    /// Largest entry magnitude, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Fails with [`Error::Symmetry`] when the Hermitian defect exceeds
    /// `rel_tol · max(1, scale)`.
    pub fn check_hermitian(&self, rel_tol: f64) -> Result<()> {
        let deviation = self.hermiticity_defect();
        if deviation > rel_tol * self.scale().max(1.0) || !deviation.is_finite() {
            return Err(Error::Symmetry { deviation });
        }
        Ok(())
    }

    /// Largest entrywise distance to another tensor of the same order.
    pub fn max_abs_diff(&self, other: &CoherenceTensor) -> f64 {
        assert_eq!(self.order, other.order, "tensor orders differ");
        self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Orders above [`MAX_ORDER`] are rejected by the plan and tomography code.
pub fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Range { what: "order", detail: format!("{order} > {MAX_ORDER}") });
    }
    Ok(())
}
