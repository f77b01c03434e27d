//! Dense-matrix reference implementations for tests.
//!
//! Everything here goes through explicit Kronecker products of 2x2 matrices
//! so it shares no code path with the bitmask algebra it checks. Qubit `j`
//! is bit `j` of the basis index.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use iqcc::{Operator, PauliLetter, PauliWord};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn letter_matrix(l: PauliLetter) -> CMat {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match l {
        PauliLetter::I => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        PauliLetter::X => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        PauliLetter::Y => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliLetter::Z => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

pub fn word_matrix(w: &PauliWord) -> CMat {
    let n = w.n_qubits();
    let mut m = letter_matrix(w.letter(n - 1));
    for q in (0..n - 1).rev() {
        m = m.kronecker(&letter_matrix(w.letter(q)));
    }
    m
}

pub fn operator_matrix(h: &Operator) -> CMat {
    let dim = 1usize << h.n_qubits();
    let mut m = CMat::zeros(dim, dim);
    for (w, coef) in h.iter() {
        m += word_matrix(w) * c(coef, 0.0);
    }
    m
}

pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn spectrum(h: &Operator) -> Vec<f64> {
    eigenvalues(&operator_matrix(h))
}

pub fn ground_energy(h: &Operator) -> f64 {
    spectrum(h)[0]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn matrix_max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Product of single-qubit coherent states `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
pub fn product_state(theta: &[f64], phi: &[f64]) -> CVec {
    let n = theta.len();
    let mut v = CVec::from_element(1, c(1.0, 0.0));
    for q in (0..n).rev() {
        let s = CVec::from_vec(vec![
            c((theta[q] / 2.0).cos(), 0.0),
            Complex64::from_polar((theta[q] / 2.0).sin(), phi[q]),
        ]);
        v = v.kronecker(&s);
    }
    v
}

pub fn basis_state(n: usize, index: usize) -> CVec {
    let mut v = CVec::zeros(1 << n);
    v[index] = c(1.0, 0.0);
    v
}

pub fn expectation(v: &CVec, m: &CMat) -> Complex64 {
    (v.adjoint() * m * v)[(0, 0)]
}

/// `exp(-i τ P / 2) = cos(τ/2) 1 - i sin(τ/2) P` for a Pauli word.
pub fn word_exponential(w: &PauliWord, tau: f64) -> CMat {
    let p = word_matrix(w);
    let dim = p.nrows();
    CMat::identity(dim, dim) * c((tau / 2.0).cos(), 0.0) - p * c(0.0, (tau / 2.0).sin())
}

pub fn random_word<R: Rng>(rng: &mut R, n: usize) -> PauliWord {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    PauliWord::from_masks(n, rng.gen::<u64>() & mask, rng.gen::<u64>() & mask).unwrap()
}

pub fn random_odd_y_word<R: Rng>(rng: &mut R, n: usize) -> PauliWord {
    loop {
        let w = random_word(rng, n);
        if w.y_parity() == iqcc::YParity::Odd {
            return w;
        }
    }
}

pub fn random_even_y_word<R: Rng>(rng: &mut R, n: usize) -> PauliWord {
    loop {
        let w = random_word(rng, n);
        if w.y_parity() == iqcc::YParity::Even {
            return w;
        }
    }
}

/// Random real operator with up to `terms` words (any Y parity).
pub fn random_operator<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Operator {
    let t = (0..terms)
        .map(|_| (random_word(rng, n), rng.gen_range(-1.0..1.0)))
        .collect::<Vec<_>>();
    Operator::from_terms(n, t).unwrap()
}

/// Random Hamiltonian-like operator: real coefficients on even-Y words.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Operator {
    let t = (0..terms)
        .map(|_| (random_even_y_word(rng, n), rng.gen_range(-1.0..1.0)))
        .collect::<Vec<_>>();
    Operator::from_terms(n, t).unwrap()
}

/// Exactly `terms` distinct even-Y words.
pub fn random_hamiltonian_distinct<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Operator {
    let mut words = std::collections::BTreeSet::new();
    while words.len() < terms {
        words.insert(random_even_y_word(rng, n));
    }
    let t = words
        .into_iter()
        .map(|w| {
            (
                w,
                rng.gen_range(0.05..1.0) * if rng.gen() { 1.0 } else { -1.0 },
            )
        })
        .collect::<Vec<_>>();
    Operator::from_terms(n, t).unwrap()
}

pub fn random_angles<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let pi = std::f64::consts::PI;
    (
        (0..n).map(|_| rng.gen_range(0.0..pi)).collect(),
        (0..n).map(|_| rng.gen_range(0.0..2.0 * pi)).collect(),
    )
}

/// Every one- and two-qubit even-Y word with a uniform coefficient in [-1, 1).
pub fn random_two_local<R: Rng>(rng: &mut R, n: usize) -> Operator {
    use iqcc::PauliLetter::{X, Y, Z};
    let letters = [X, Y, Z];
    let mut t = Vec::new();
    for i in 0..n {
        for &a in &letters {
            let w = PauliWord::single(n, i, a);
            if w.y_parity() == iqcc::YParity::Even {
                t.push((w, rng.gen_range(-1.0..1.0)));
            }
            for j in i + 1..n {
                for &b in &letters {
                    let w = PauliWord::single(n, i, a).with_letter(j, b);
                    if w.y_parity() == iqcc::YParity::Even {
                        t.push((w, rng.gen_range(-1.0..1.0)));
                    }
                }
            }
        }
    }
    Operator::from_terms(n, t).unwrap()
}
