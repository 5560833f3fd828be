//! Correlations behind the gadget as linear functionals of the input
//! coherences.
//!
//! With `b1 = cos θ a1 + e^{iφ} sin θ a2` and
//! `b2 = −e^{−iφ} sin θ a1 + cos θ a2`, the correlation
//! `⟨b1†^i b2†^(N−i) b1^i b2^(N−i)⟩` expands into order-`N` coherences of the
//! input modes. Expanding `b1†^i` and `b1^i` with summation indices `w`, `y`
//! and `b2†^(N−i)`, `b2^(N−i)` with `x`, `z` gives the term
//!
//! ```text
//! C(i,w) C(i,y) C(N−i,x) C(N−i,z) cos^(2N−w−x−y−z) θ sin^(w+x+y+z) θ
//!     (−1)^(x+z) e^{iφ(x+y−w−z)} ⟨a1†^(i+x−w) a2†^(N−i−x+w) a1^(i+z−y) a2^(N−i−z+y)⟩.
//! ```
//!
//! For `i = N` only `x = z = 0` remains and every coherence appears in
//! exactly one term.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{CoherenceIndex, CoherenceTensor};
use crate::gadget::MeasurementSetting;
use crate::math::binomial;

const SYMMETRY_TOL: f64 = 1e-10;

/// Total order `N` and the intensity-moment order `i` taken in port `b1`
/// (`N − i` in port `b2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelationSpec {
    order: usize,
    port1: usize,
}

impl CorrelationSpec {
    pub fn new(order: usize, port1: usize) -> Result<Self> {
        if port1 > order {
            return Err(Error::Range { what: "port-1 moment order", detail: format!("{port1} > N = {order}") });
        }
        Ok(CorrelationSpec { order, port1 })
    }

    /// The single-port Nth-order intensity moment `⟨b1†^N b1^N⟩`.
    pub fn intensity(order: usize) -> Self {
        CorrelationSpec { order, port1: order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn port1(&self) -> usize {
        self.port1
    }
}

/// Coefficients of every coherence in one correlation, indexed by `(w, y)`,
/// together with the number of expansion terms that contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationExpansion {
    pub order: usize,
    pub coefficients: DMatrix<Complex64>,
    pub term_counts: DMatrix<u32>,
}

impl CorrelationExpansion {
    pub fn get(&self, idx: CoherenceIndex) -> Complex64 {
        self.coefficients[(idx.w, idx.y)]
    }

    /// `Σ coefficient · coherence`.
    pub fn apply(&self, tensor: &CoherenceTensor) -> Complex64 {
        assert_eq!(tensor.order(), self.order, "tensor order does not match the expansion");
        self.coefficients.iter().zip(tensor.entries().iter()).map(|(c, t)| c * t).sum()
    }
}

pub fn correlation_coefficients(spec: CorrelationSpec, setting: &MeasurementSetting) -> CorrelationExpansion {
    let n = spec.order;
    let i = spec.port1;
    let rest = n - i;
    let (s, co) = setting.theta().sin_cos();
    let cos_pow: Vec<f64> = (0..=2 * n).map(|k| co.powi(k as i32)).collect();
    let sin_pow: Vec<f64> = (0..=2 * n).map(|k| s.powi(k as i32)).collect();

    let mut coefficients = DMatrix::zeros(n + 1, n + 1);
    let mut term_counts = DMatrix::zeros(n + 1, n + 1);
    for w in 0..=i {
        for y in 0..=i {
            for x in 0..=rest {
                for z in 0..=rest {
                    let binom = binomial(i, w) * binomial(i, y) * binomial(rest, x) * binomial(rest, z);
                    let sines = w + x + y + z;
                    let sign = if (x + z) % 2 == 0 { 1.0 } else { -1.0 };
                    let magnitude = binom as f64 * cos_pow[2 * n - sines] * sin_pow[sines] * sign;
                    let phase = (x + y) as f64 - (w + z) as f64;
                    let term = Complex64::from_polar(magnitude, phase * setting.phi());
                    // mode-2 powers of the creation and annihilation parts
                    let idx = CoherenceIndex::new(rest - x + w, rest - z + y);
                    coefficients[(idx.w, idx.y)] += term;
                    term_counts[(idx.w, idx.y)] += 1;
                }
            }
        }
    }
    CorrelationExpansion { order: n, coefficients, term_counts }
}

/// Correlation `spec` predicted from the order-`N` coherences of the input.
pub fn predicted_correlation(
    tensor: &CoherenceTensor,
    spec: CorrelationSpec,
    setting: &MeasurementSetting,
) -> Result<f64> {
    if tensor.order() != spec.order {
        return Err(Error::Dimension { expected: spec.order + 1, actual: tensor.order() + 1 });
    }
    tensor.check_hermitian(SYMMETRY_TOL)?;
    let value = correlation_coefficients(spec, setting).apply(tensor);
    // For Hermitian tensors the expansion pairs (w,y) with (y,w) and is real;
    // what remains is rounding.
    Ok(value.re)
}

/// `⟨b1†^N b1^N⟩` at the given setting, `N` being the tensor order.
pub fn predicted_moment(tensor: &CoherenceTensor, setting: &MeasurementSetting) -> Result<f64> {
    predicted_correlation(tensor, CorrelationSpec::intensity(tensor.order()), setting)
}
