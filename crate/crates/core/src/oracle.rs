//! Exact ground states: dense diagonalization and a restarted Krylov solver,
//! both driven by bitmask application of Pauli words to state vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dims, IqccError, Result};
use crate::operator::Operator;
use crate::pauli::{PauliWord, YParity};

pub const DENSE_QUBIT_LIMIT: usize = 10;
pub const ITERATIVE_QUBIT_LIMIT: usize = 16;
pub const KRYLOV_DIMENSION: usize = 50;
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

const KRYLOV_KEEP: usize = 6;
const MAX_MATVECS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Dense,
    Iterative,
}

impl SolverMode {
    /// Dense up to 8 qubits, Krylov beyond.
    pub fn auto(n_qubits: usize) -> Self {
        if n_qubits <= 8 {
            SolverMode::Dense
        } else {
            SolverMode::Iterative
        }
    }

    pub fn qubit_limit(self) -> usize {
        match self {
            SolverMode::Dense => DENSE_QUBIT_LIMIT,
            SolverMode::Iterative => ITERATIVE_QUBIT_LIMIT,
        }
    }
}

/// Unit-norm vector of `2^n` amplitudes; qubit `j` is bit `j` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Normalizes the input; rejects zero vectors and non power-of-two lengths.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(IqccError::InvalidArgument(format!(
                "state length {len} is not 2^n with n >= 1"
            )));
        }
        let norm = norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(IqccError::InvalidArgument(
                "zero or non-finite state".into(),
            ));
        }
        Ok(StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn apply_word(&self, w: &PauliWord) -> Result<StateVector> {
        check_dims(self.n_qubits, w.n_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        accumulate_word(&self.amplitudes, w, Complex64::new(1.0, 0.0), &mut out);
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// `<v|h|v>`; the imaginary part must vanish for a Hermitian operator.
    pub fn expectation(&self, h: &Operator) -> Result<f64> {
        check_dims(self.n_qubits, h.n_qubits())?;
        let hv = apply_operator(h, &self.amplitudes);
        let value = dot(&self.amplitudes, &hv);
        if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
            return Err(IqccError::ContractViolation(format!(
                "expectation has imaginary part {}",
                value.im
            )));
        }
        Ok(value.re)
    }
}

/// `out += coef · w · v`.
///
/// `w|b> = i^{|y|} (-1)^{|b & z|} |b ^ x>`.
fn accumulate_word(v: &[Complex64], w: &PauliWord, coef: Complex64, out: &mut [Complex64]) {
    let x = w.x_mask() as usize;
    let z = w.z_mask() as usize;
    let base = crate::pauli::Phase::from_exponent(w.y_mask().count_ones()).to_complex() * coef;
    let neg = -base;
    for (b, amp) in v.iter().enumerate() {
        let f = if (b & z).count_ones() % 2 == 0 {
            base
        } else {
            neg
        };
        out[b ^ x] += f * amp;
    }
}

pub(crate) fn apply_operator(h: &Operator, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (w, c) in h.iter() {
        accumulate_word(v, w, Complex64::new(c, 0.0), &mut out);
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest eigenpair of `h`.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub residual: f64,
}

pub fn ground_state(h: &Operator, mode: SolverMode) -> Result<GroundState> {
    let n = h.n_qubits();
    if n > mode.qubit_limit() {
        return Err(IqccError::BudgetExceeded {
            what: match mode {
                SolverMode::Dense => "dense diagonalization",
                SolverMode::Iterative => "iterative diagonalization",
            },
            required: n,
            budget: mode.qubit_limit(),
        });
    }
    match mode {
        SolverMode::Dense => dense_ground_state(h),
        SolverMode::Iterative => krylov_ground_state(h),
    }
}

pub fn ground_energy(h: &Operator, mode: SolverMode) -> Result<f64> {
    ground_state(h, mode).map(|g| g.energy)
}

fn residual_norm(h: &Operator, v: &[Complex64], e: f64) -> f64 {
    let hv = apply_operator(h, v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * e).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dense_ground_state(h: &Operator) -> Result<GroundState> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let real = h.iter().all(|(w, _)| w.y_parity() == YParity::Even);
    let (energy, vector) = if real {
        // Even-Y words have real matrices.
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (w, c) in h.iter() {
            let x = w.x_mask() as usize;
            let z = w.z_mask() as usize;
            let sign = if w.y_mask().count_ones() % 4 == 0 {
                c
            } else {
                -c
            };
            for b in 0..dim {
                let s = if (b & z).count_ones() % 2 == 0 {
                    sign
                } else {
                    -sign
                };
                m[(b ^ x, b)] += s;
            }
        }
        let eig = m.symmetric_eigen();
        let (i, e) = argmin(eig.eigenvalues.iter().copied());
        let v: Vec<Complex64> = eig
            .eigenvectors
            .column(i)
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        (e, v)
    } else {
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            let mut e = vec![Complex64::new(0.0, 0.0); dim];
            e[b] = Complex64::new(1.0, 0.0);
            let col = apply_operator(h, &e);
            for (r, val) in col.into_iter().enumerate() {
                m[(r, b)] = val;
            }
        }
        let eig = m.symmetric_eigen();
        let (i, e) = argmin(eig.eigenvalues.iter().copied());
        (e, eig.eigenvectors.column(i).iter().copied().collect())
    };
    let state = StateVector::from_amplitudes(vector)?;
    let residual = residual_norm(h, state.amplitudes(), energy);
    Ok(GroundState {
        energy,
        state,
        residual,
    })
}

fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values.enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, v)| if v < best.1 { (i, v) } else { best },
    )
}

/// Thick-restart Krylov (Lanczos-equivalent subspace) with full
/// re-orthogonalization and explicit Rayleigh-Ritz on the stored basis.
fn krylov_ground_state(h: &Operator) -> Result<GroundState> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    if dim <= KRYLOV_DIMENSION {
        return dense_ground_state(h);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(KRYLOV_DIMENSION);
    let mut images: Vec<Vec<Complex64>> = Vec::with_capacity(KRYLOV_DIMENSION);
    let mut next = start;
    let mut matvecs = 0;
    let mut best: Option<(f64, Vec<Complex64>, f64)> = None;

    loop {
        if !orthonormalize(&basis, &mut next) {
            // The subspace is invariant; the current Ritz pair is exact.
            if let Some((e, v, _)) = best.take() {
                let residual = residual_norm(h, &v, e);
                return Ok(GroundState {
                    energy: e,
                    state: StateVector::from_amplitudes(v)?,
                    residual,
                });
            }
            return Err(IqccError::ContractViolation(
                "Krylov start vector vanished".into(),
            ));
        }
        images.push(apply_operator(h, &next));
        basis.push(next);
        matvecs += 1;

        let m = basis.len();
        let mut t = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = dot(&basis[i], &images[j]);
                t[(i, j)] = v;
                t[(j, i)] = v.conj();
            }
        }
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let e0 = eig.eigenvalues[order[0]];
        let y0 = eig.eigenvectors.column(order[0]);
        let ritz = combine(&basis, y0.as_slice());
        let hritz = combine(&images, y0.as_slice());
        let residual: Vec<Complex64> = hritz.iter().zip(&ritz).map(|(a, b)| a - b * e0).collect();
        let rnorm = norm(&residual);
        best = Some((e0, ritz.clone(), rnorm));
        if rnorm < RESIDUAL_TOLERANCE {
            let state = StateVector::from_amplitudes(ritz)?;
            let residual = residual_norm(h, state.amplitudes(), e0);
            return Ok(GroundState {
                energy: e0,
                state,
                residual,
            });
        }
        if matvecs >= MAX_MATVECS {
            return Err(IqccError::ContractViolation(format!(
                "Krylov solver did not converge: residual {rnorm:e} after {matvecs} products"
            )));
        }
        if m == KRYLOV_DIMENSION {
            let keep = KRYLOV_KEEP.min(m);
            let coeffs: Vec<DVector<Complex64>> = order[..keep]
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect();
            let new_basis: Vec<_> = coeffs
                .iter()
                .map(|y| combine(&basis, y.as_slice()))
                .collect();
            let new_images: Vec<_> = coeffs
                .iter()
                .map(|y| combine(&images, y.as_slice()))
                .collect();
            basis = new_basis;
            images = new_images;
            // Ritz vectors drift from orthonormality through roundoff; clean them.
            let mut cleaned_basis: Vec<Vec<Complex64>> = Vec::with_capacity(keep);
            let mut cleaned_images: Vec<Vec<Complex64>> = Vec::with_capacity(keep);
            for (mut v, _) in basis.into_iter().zip(images.into_iter()) {
                if orthonormalize(&cleaned_basis, &mut v) {
                    cleaned_images.push(apply_operator(h, &v));
                    matvecs += 1;
                    cleaned_basis.push(v);
                }
            }
            basis = cleaned_basis;
            images = cleaned_images;
        }
        next = residual;
    }
}

fn combine(vectors: &[Vec<Complex64>], coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); vectors[0].len()];
    for (v, &c) in vectors.iter().zip(coeffs) {
        for (o, a) in out.iter_mut().zip(v) {
            *o += a * c;
        }
    }
    out
}

/// Two passes of Gram-Schmidt against `basis`, then normalize. Returns false
/// when nothing independent is left.
fn orthonormalize(basis: &[Vec<Complex64>], v: &mut [Complex64]) -> bool {
    let before = norm(v);
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= y * proj;
            }
        }
    }
    let after = norm(v);
    if after <= 1e-13 * before || after == 0.0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= after;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> Operator {
        Operator::parse_text(s).unwrap()
    }

    #[test]
    fn identity_word_leaves_state() {
        let v = StateVector::basis(2, 3);
        assert_eq!(v.apply_word(&"II".parse().unwrap()).unwrap(), v);
    }

    #[test]
    fn x0_flips_qubit_zero() {
        let v = StateVector::basis(2, 0);
        let out = v.apply_word(&"XI".parse().unwrap()).unwrap();
        assert_eq!(out, StateVector::basis(2, 1));
    }

    #[test]
    fn z_sum_ground_state() {
        let g = ground_state(&op("1 ZI\n1 IZ"), SolverMode::Dense).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12);
        assert!((g.state.amplitudes()[3].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn x_ground_with_residual_check() {
        let h = op("1 X");
        let g = ground_state(&h, SolverMode::Dense).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert!(g.residual < 1e-10);
    }

    #[test]
    fn diagonal_expectation() {
        let h = op("0.5 ZI\n-0.25 ZZ\n2 II");
        let v = StateVector::basis(2, 0);
        assert!((v.expectation(&h).unwrap() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn budget_refusal() {
        let h = Operator::identity(11, 1.0);
        assert!(matches!(
            ground_state(&h, SolverMode::Dense),
            Err(IqccError::BudgetExceeded { .. })
        ));
        let h = Operator::identity(17, 1.0);
        assert!(ground_state(&h, SolverMode::Iterative).is_err());
    }

    #[test]
    fn krylov_handles_invariant_start() {
        // Diagonal with a single dominant term; the Krylov space closes quickly.
        let h = op("1 ZIIIIII\n0.5 IIIIIIZ");
        let g = ground_state(&h, SolverMode::Iterative).unwrap();
        assert!((g.energy + 1.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_amplitudes() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(0.0, 0.0); 4]).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }
}
