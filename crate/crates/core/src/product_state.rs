//! Qubit mean-field (QMF) product states.
//!
//! Each qubit is the coherent state `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`, so
//! `<X> = sinθ cosφ`, `<Y> = sinθ sinφ`, `<Z> = cosθ`, and the expectation of
//! a Pauli word is the product over its support.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, IqccError, Result};
use crate::operator::Operator;
use crate::optimize::{minimize, BfgsOptions};
use crate::pauli::{PauliLetter, PauliWord};

pub const DEFAULT_GUESSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    theta: Vec<f64>,
    phi: Vec<f64>,
}

impl BlochState {
    /// Angles are folded into θ ∈ [0, π], φ ∈ [0, 2π) without changing the state.
    pub fn new(theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        check_dims(theta.len(), phi.len())?;
        if theta.is_empty() {
            return Err(IqccError::InvalidArgument("empty Bloch state".into()));
        }
        if theta.iter().chain(&phi).any(|a| !a.is_finite()) {
            return Err(IqccError::InvalidArgument("non-finite Bloch angle".into()));
        }
        let mut s = BlochState { theta, phi };
        s.normalize();
        Ok(s)
    }

    /// All qubits in |0>.
    pub fn all_up(n: usize) -> Self {
        BlochState {
            theta: vec![0.0; n],
            phi: vec![0.0; n],
        }
    }

    pub(crate) fn from_packed(n: usize, angles: &[f64]) -> Self {
        let mut s = BlochState {
            theta: angles[..n].to_vec(),
            phi: angles[n..2 * n].to_vec(),
        };
        s.normalize();
        s
    }

    pub(crate) fn packed(&self) -> Vec<f64> {
        self.theta.iter().chain(&self.phi).copied().collect()
    }

    fn normalize(&mut self) {
        for (t, p) in self.theta.iter_mut().zip(self.phi.iter_mut()) {
            let mut th = t.rem_euclid(TAU);
            let mut ph = *p;
            // (2π - θ, φ + π) is the same point on the sphere.
            if th > PI {
                th = TAU - th;
                ph += PI;
            }
            *t = th;
            *p = ph.rem_euclid(TAU);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn expect_word(&self, w: &PauliWord) -> Result<f64> {
        check_dims(self.n_qubits(), w.n_qubits())?;
        let mut value = 1.0;
        let mut support = w.support_mask();
        while support != 0 {
            let q = support.trailing_zeros() as usize;
            support &= support - 1;
            let (t, p) = (self.theta[q], self.phi[q]);
            value *= match w.letter(q) {
                PauliLetter::X => t.sin() * p.cos(),
                PauliLetter::Y => t.sin() * p.sin(),
                PauliLetter::Z => t.cos(),
                PauliLetter::I => 1.0,
            };
        }
        Ok(value)
    }

    pub fn energy(&self, h: &Operator) -> Result<f64> {
        check_dims(self.n_qubits(), h.n_qubits())?;
        Ok(energy_and_gradient(h, &self.packed(), None))
    }

    /// Nearest Z eigenstate per qubit; θ exactly π/2 goes to +1.
    pub fn purify(&self) -> PurifiedReference {
        PurifiedReference {
            bits: self
                .theta
                .iter()
                .map(|&t| if t <= PI / 2.0 { 1 } else { -1 })
                .collect(),
        }
    }

    /// `|<Φ0|Ω>|²` with the purified reference of this state.
    pub fn purified_overlap(&self) -> f64 {
        self.theta
            .iter()
            .map(|t| {
                let c = (t / 2.0).cos().powi(2);
                c.max(1.0 - c)
            })
            .product()
    }
}

/// Energy at packed angles `[θ_0..θ_n, φ_0..φ_n]`, optionally with the
/// gradient written into `grad` in the same layout.
pub(crate) fn energy_and_gradient(h: &Operator, angles: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let n = h.n_qubits();
    let (theta, phi) = angles.split_at(n);
    // Per-qubit expectations [X, Y, Z] and their θ / φ derivatives.
    let mut ex = vec![[0.0f64; 3]; n];
    let mut dth = vec![[0.0f64; 3]; n];
    let mut dph = vec![[0.0f64; 3]; n];
    for q in 0..n {
        let (st, ct) = theta[q].sin_cos();
        let (sp, cp) = phi[q].sin_cos();
        ex[q] = [st * cp, st * sp, ct];
        dth[q] = [ct * cp, ct * sp, -st];
        dph[q] = [-st * sp, st * cp, 0.0];
    }
    let slot = |w: &PauliWord, q: usize| -> usize {
        let bit = 1u64 << q;
        match (w.x_mask() & bit != 0, w.z_mask() & bit != 0) {
            (true, false) => 0,
            (true, true) => 1,
            _ => 2,
        }
    };

    let mut energy = 0.0;
    match grad {
        None => {
            for (w, c) in h.iter() {
                let mut v = c;
                let mut s = w.support_mask();
                while s != 0 && v != 0.0 {
                    let q = s.trailing_zeros() as usize;
                    s &= s - 1;
                    v *= ex[q][slot(w, q)];
                }
                energy += v;
            }
        }
        Some(grad) => {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut qubits = [0usize; 64];
            let mut slots = [0usize; 64];
            let mut prefix = [0.0f64; 65];
            for (w, c) in h.iter() {
                let mut m = 0;
                let mut s = w.support_mask();
                while s != 0 {
                    let q = s.trailing_zeros() as usize;
                    s &= s - 1;
                    qubits[m] = q;
                    slots[m] = slot(w, q);
                    m += 1;
                }
                prefix[0] = 1.0;
                for i in 0..m {
                    prefix[i + 1] = prefix[i] * ex[qubits[i]][slots[i]];
                }
                energy += c * prefix[m];
                let mut suffix = c;
                for i in (0..m).rev() {
                    let q = qubits[i];
                    let rest = prefix[i] * suffix;
                    grad[q] += rest * dth[q][slots[i]];
                    grad[n + q] += rest * dph[q][slots[i]];
                    suffix *= ex[q][slots[i]];
                }
            }
        }
    }
    energy
}

#[derive(Debug, Clone)]
pub struct QmfResult {
    pub state: BlochState,
    pub energy: f64,
    pub grad_inf_norm: f64,
}

/// Multistart quasi-Newton minimization of the mean-field energy.
pub fn qmf_minimize(h: &Operator, n_guesses: usize, rng_seed: u64) -> Result<QmfResult> {
    if n_guesses == 0 {
        return Err(IqccError::InvalidArgument("n_guesses must be >= 1".into()));
    }
    let n = h.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<QmfResult> = None;
    for guess in 0..n_guesses {
        let start = random_angles(&mut rng, n);
        let m = minimize(
            |x, g| energy_and_gradient(h, x, Some(g)),
            start,
            BfgsOptions::default(),
        );
        log::debug!(
            "qmf guess {guess}: energy {:.12} |grad| {:.1e} after {} iterations",
            m.value,
            m.grad_inf_norm,
            m.iterations
        );
        if best.as_ref().is_none_or(|b| m.value < b.energy) {
            let state = BlochState::from_packed(n, &m.x);
            best = Some(QmfResult {
                energy: energy_and_gradient(h, &state.packed(), None),
                state,
                grad_inf_norm: m.grad_inf_norm,
            });
        }
    }
    Ok(best.expect("n_guesses >= 1"))
}

pub(crate) fn random_angles<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..PI)).collect();
    v.extend((0..n).map(|_| rng.gen_range(0.0..TAU)));
    v
}

/// Product of Z eigenstates; `bits[j]` is the Z eigenvalue of qubit `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurifiedReference {
    bits: Vec<i8>,
}

impl PurifiedReference {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() || bits.iter().any(|b| *b != 1 && *b != -1) {
            return Err(IqccError::InvalidArgument(
                "reference bits must be a nonempty list of +1/-1".into(),
            ));
        }
        Ok(PurifiedReference { bits })
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn n_qubits(&self) -> usize {
        self.bits.len()
    }

    /// Qubits in |1> (Z eigenvalue -1).
    pub fn down_mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b < 0)
            .fold(0, |m, (q, _)| m | (1u64 << q))
    }

    /// `<Φ0|w|Φ0>`: zero for any word that flips a qubit.
    pub fn expect_word(&self, w: &PauliWord) -> f64 {
        if w.x_mask() != 0 {
            return 0.0;
        }
        if (w.z_mask() & self.down_mask()).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn to_bloch(&self) -> BlochState {
        BlochState {
            theta: self
                .bits
                .iter()
                .map(|&b| if b > 0 { 0.0 } else { PI })
                .collect(),
            phi: vec![0.0; self.bits.len()],
        }
    }
}
