//! Brute-force configuration interaction over occupation-number strings.
//!
//! The Hamiltonian is applied with ladder operators acting directly on
//! determinants (bit `p` set means spin orbital `p` occupied), with the usual
//! sign from the occupied orbitals below `p`. No Pauli algebra is involved.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;

use iqcc::IntegralData;

fn annihilate(det: u64, p: usize) -> Option<(u64, f64)> {
    if det & (1 << p) == 0 {
        return None;
    }
    let sign = if (det & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((det ^ (1 << p), sign))
}

fn create(det: u64, p: usize) -> Option<(u64, f64)> {
    if det & (1 << p) != 0 {
        return None;
    }
    let sign = if (det & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((det | (1 << p), sign))
}

/// Apply a string of ladder operators, rightmost first. `true` is a creator.
fn apply(det: u64, ops: &[(bool, usize)]) -> Option<(u64, f64)> {
    let mut d = det;
    let mut s = 1.0;
    for &(dagger, p) in ops.iter().rev() {
        let (nd, ns) = if dagger {
            create(d, p)?
        } else {
            annihilate(d, p)?
        };
        d = nd;
        s *= ns;
    }
    Some((d, s))
}

/// Full Fock-space Hamiltonian matrix, alpha spin orbitals first.
pub fn fock_matrix(data: &IntegralData) -> DMatrix<f64> {
    let norb = data.n_orbitals();
    let n = 2 * norb;
    let dim = 1usize << n;
    let spatial = |p: usize| p % norb;
    let spin = |p: usize| p / norb;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for det in 0..dim as u64 {
        m[(det as usize, det as usize)] += data.e_core;
        for p in 0..n {
            for q in 0..n {
                if spin(p) != spin(q) {
                    continue;
                }
                if let Some((d, s)) = apply(det, &[(true, p), (false, q)]) {
                    m[(d as usize, det as usize)] += s * data.h(spatial(p), spatial(q));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for t in 0..n {
                        if spin(p) != spin(r) || spin(q) != spin(t) {
                            continue;
                        }
                        let v = data.g(spatial(p), spatial(r), spatial(q), spatial(t));
                        if v == 0.0 {
                            continue;
                        }
                        if let Some((d, s)) =
                            apply(det, &[(true, p), (true, q), (false, t), (false, r)])
                        {
                            m[(d as usize, det as usize)] += 0.5 * s * v;
                        }
                    }
                }
            }
        }
    }
    m
}

pub fn fock_spectrum(data: &IntegralData) -> Vec<f64> {
    let mut ev: Vec<f64> = fock_matrix(data)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

pub fn fock_ground_energy(data: &IntegralData) -> f64 {
    fock_spectrum(data)[0]
}

/// Random integrals with the full permutational symmetry.
pub fn random_integrals<R: Rng>(rng: &mut R, norb: usize) -> IntegralData {
    let mut d = IntegralData::zeros(norb);
    for i in 0..norb {
        for j in 0..=i {
            d.set_h(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    for i in 0..norb {
        for j in 0..norb {
            for k in 0..norb {
                for l in 0..norb {
                    if d.g(i, j, k, l) == 0.0 {
                        d.set_g(i, j, k, l, rng.gen_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    d.e_core = rng.gen_range(-1.0..1.0);
    d
}
