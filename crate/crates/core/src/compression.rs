//! Norm-sorted truncation of Pauli sums.
//!
//! Dropping a tail whose Frobenius norm is at most `ε` moves every eigenvalue
//! by at most `ε` (Weyl), and `‖A‖_F = 2^{n/2} sqrt(Σ C_j²)` for Pauli sums.

use serde::{Deserialize, Serialize};

use crate::error::{IqccError, Result};
use crate::operator::Operator;

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub epsilon: f64,
    pub terms_before: usize,
    pub terms_after: usize,
    /// Frobenius norm of the removed part.
    pub dropped_norm: f64,
}

pub fn compress(h: &Operator, epsilon: f64) -> Result<(Operator, CompressionReport)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(IqccError::InvalidArgument(format!(
            "compression epsilon must be positive, got {epsilon}"
        )));
    }
    let scale = (h.n_qubits() as f64 / 2.0).exp2();
    // Slack keeps the bound intact when the norm is recomputed in another order.
    let budget = (epsilon / scale).powi(2) * (1.0 - 1e-12);

    let mut candidates: Vec<usize> = (0..h.len())
        .filter(|&i| !h.terms()[i].0.is_identity())
        .collect();
    candidates.sort_by(|&a, &b| {
        h.terms()[a]
            .1
            .abs()
            .partial_cmp(&h.terms()[b].1.abs())
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut dropped = vec![false; h.len()];
    let mut tail = 0.0;
    let mut i = 0;
    while i < candidates.len() {
        // Equal magnitudes are dropped together or not at all.
        let mag = h.terms()[candidates[i]].1.abs();
        let mut j = i;
        let mut group = 0.0;
        while j < candidates.len() && h.terms()[candidates[j]].1.abs() == mag {
            group += mag * mag;
            j += 1;
        }
        if tail + group > budget {
            break;
        }
        tail += group;
        for &k in &candidates[i..j] {
            dropped[k] = true;
        }
        i = j;
    }

    let kept: Vec<_> = h
        .terms()
        .iter()
        .zip(&dropped)
        .filter(|(_, d)| !**d)
        .map(|(t, _)| *t)
        .collect();
    let compressed = Operator::from_sorted_unique(h.n_qubits(), kept);
    let report = CompressionReport {
        epsilon,
        terms_before: h.len(),
        terms_after: compressed.len(),
        dropped_norm: scale * tail.sqrt(),
    };
    Ok((compressed, report))
}
