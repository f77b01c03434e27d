//! Exact similarity transformation `e^{iτP/2} H e^{-iτP/2}` for a Pauli word `P`.
//!
//! Terms commuting with `P` pass through. An anticommuting term `C·W` becomes
//! `C cosτ · W + C sinτ · (-(i/2)[W, P])`, which is the term-wise form of
//! `H + sinτ·(-(i/2)[H, P]) + (1 - cosτ)/2·(PHP - H)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, IqccError, Result};
use crate::operator::Operator;
use crate::pauli::{PauliWord, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressingStep {
    pub generator: PauliWord,
    /// Radians, in (-π, π].
    pub tau: f64,
}

impl DressingStep {
    pub fn new(generator: PauliWord, tau: f64) -> Self {
        DressingStep {
            generator,
            tau: reduce_angle(tau),
        }
    }
}

pub(crate) fn reduce_angle(tau: f64) -> f64 {
    let r = tau.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DressStats {
    pub terms_in: usize,
    pub terms_out: usize,
    /// Input terms anticommuting with the generator.
    pub anticommuting: usize,
}

pub fn dress(h: &Operator, step: &DressingStep) -> Result<Operator> {
    dress_with_stats(h, step).map(|(op, _)| op)
}

pub fn dress_with_stats(h: &Operator, step: &DressingStep) -> Result<(Operator, DressStats)> {
    let p = &step.generator;
    check_dims(h.n_qubits(), p.n_qubits())?;
    let (s, c) = step.tau.sin_cos();
    let mut out = Vec::with_capacity(h.len() * 2);
    let mut anticommuting = 0;
    for &(w, coef) in h.terms() {
        if w.commutes_unchecked(p) {
            out.push((w, coef));
            continue;
        }
        anticommuting += 1;
        out.push((w, coef * c));
        if s != 0.0 {
            let (v, phase) = w.mul_unchecked(p);
            let sign = (phase * Phase::I).real_sign().ok_or_else(|| {
                IqccError::ContractViolation(format!("anticommuting product {w}·{p} is real"))
            })?;
            out.push((v, -sign * coef * s));
        }
    }
    let dressed = Operator::from_terms_unchecked(h.n_qubits(), out);
    let stats = DressStats {
        terms_in: h.len(),
        terms_out: dressed.len(),
        anticommuting,
    };
    Ok((dressed, stats))
}

/// Left fold of [`dress`] over `steps`.
pub fn dress_sequence(h: &Operator, steps: &[DressingStep]) -> Result<Operator> {
    let mut current = h.clone();
    for step in steps {
        current = dress(&current, step)?;
    }
    Ok(current)
}
