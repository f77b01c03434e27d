//! Generator screening through the direct interaction set (DIS).
//!
//! On a Z-eigenstate reference only Hamiltonian terms sharing a generator's
//! flip set contribute to its gradient. Grouping terms by flip set therefore
//! yields every generator with a nonzero gradient, one gradient group per
//! sector, at a cost linear in the number of terms.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, IqccError, Result};
use crate::operator::Operator;
use crate::pauli::{mask_indices, PauliLetter, PauliWord, Phase, YParity};
use crate::product_state::{BlochState, PurifiedReference};

pub const DEFAULT_GRAD_THRESHOLD: f64 = 1e-7;

/// Hamiltonian terms sharing one flip set.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipSector {
    flips: u64,
    terms: Operator,
}

impl FlipSector {
    pub fn flip_mask(&self) -> u64 {
        self.flips
    }

    pub fn flips(&self) -> Vec<usize> {
        mask_indices(self.flips)
    }

    pub fn terms(&self) -> &Operator {
        &self.terms
    }
}

/// One sector per distinct flip set, ordered by flip mask.
pub fn partition_sectors(h: &Operator) -> Vec<FlipSector> {
    let mut by_flips: BTreeMap<u64, Vec<(PauliWord, f64)>> = BTreeMap::new();
    for &(w, c) in h.terms() {
        by_flips.entry(w.flip_mask()).or_default().push((w, c));
    }
    by_flips
        .into_iter()
        .map(|(flips, terms)| FlipSector {
            flips,
            terms: Operator::from_sorted_unique(h.n_qubits(), terms),
        })
        .collect()
}

/// Y on the lowest flip index, X on the others; `None` for an empty set.
pub fn dis_representative(n_qubits: usize, flips: u64) -> Option<PauliWord> {
    if flips == 0 {
        return None;
    }
    let lowest = flips & flips.wrapping_neg();
    PauliWord::from_masks(n_qubits, flips, lowest).ok()
}

/// Signed `<Φ0| -(i/2)[H, P] |Φ0>` summed over the given terms.
fn reference_gradient<'a>(
    terms: impl Iterator<Item = &'a (PauliWord, f64)>,
    p: &PauliWord,
    reference: &PurifiedReference,
) -> Result<f64> {
    let down = reference.down_mask();
    let mut g = 0.0;
    for (w, c) in terms {
        if w.flip_mask() != p.flip_mask() || w.commutes_unchecked(p) {
            continue;
        }
        let (v, phase) = w.mul_unchecked(p);
        let sign = (phase * Phase::I)
            .real_sign()
            .ok_or_else(|| IqccError::ContractViolation(format!("{w}·{p} has a real phase")))?;
        let diag = if (v.z_mask() & down).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        g -= sign * c * diag;
    }
    Ok(g)
}

/// Signed gradient `dE/dτ` at τ = 0 for generator `p` against the full `h`.
pub fn generator_gradient(
    h: &Operator,
    p: &PauliWord,
    reference: &PurifiedReference,
) -> Result<f64> {
    check_dims(h.n_qubits(), p.n_qubits())?;
    check_dims(h.n_qubits(), reference.n_qubits())?;
    reference_gradient(h.terms().iter(), p, reference)
}

/// Bloch vectors of a product state, for repeated word expectations.
#[derive(Debug, Clone)]
pub struct StateExpectations {
    /// `[<X>, <Y>, <Z>]` per qubit.
    bloch: Vec<[f64; 3]>,
}

impl StateExpectations {
    pub fn new(state: &BlochState) -> Self {
        let bloch = state
            .theta()
            .iter()
            .zip(state.phi())
            .map(|(t, p)| {
                let (st, ct) = t.sin_cos();
                let (sp, cp) = p.sin_cos();
                [st * cp, st * sp, ct]
            })
            .collect();
        StateExpectations { bloch }
    }

    pub fn n_qubits(&self) -> usize {
        self.bloch.len()
    }

    pub fn word(&self, w: &PauliWord) -> f64 {
        let mut v = 1.0;
        let mut s = w.support_mask();
        while s != 0 {
            let q = s.trailing_zeros() as usize;
            let bit = s & s.wrapping_neg();
            s &= s - 1;
            let slot = match (w.x_mask() & bit != 0, w.z_mask() & bit != 0) {
                (true, false) => 0,
                (true, true) => 1,
                _ => 2,
            };
            v *= self.bloch[q][slot];
        }
        v
    }

    /// Signed `<Ω| -(i/2)[H, P] |Ω>`.
    pub fn gradient(&self, h: &Operator, p: &PauliWord) -> Result<f64> {
        check_dims(h.n_qubits(), self.n_qubits())?;
        check_dims(h.n_qubits(), p.n_qubits())?;
        let mut g = 0.0;
        for (w, c) in h.iter() {
            if w.commutes_unchecked(p) {
                continue;
            }
            let (v, phase) = w.mul_unchecked(p);
            let sign = (phase * Phase::I)
                .real_sign()
                .ok_or_else(|| IqccError::ContractViolation(format!("{w}·{p} has a real phase")))?;
            g -= sign * c * self.word(&v);
        }
        Ok(g)
    }
}

/// Signed gradient `dE/dτ` at τ = 0 on an arbitrary product state.
pub fn state_gradient(h: &Operator, p: &PauliWord, state: &BlochState) -> Result<f64> {
    StateExpectations::new(state).gradient(h, p)
}

pub fn sector_gradient(
    sector: &FlipSector,
    rep: &PauliWord,
    reference: &PurifiedReference,
) -> Result<f64> {
    check_dims(sector.terms.n_qubits(), rep.n_qubits())?;
    check_dims(sector.terms.n_qubits(), reference.n_qubits())?;
    if rep.flip_mask() != sector.flips {
        return Err(IqccError::ContractViolation(format!(
            "generator {rep} does not match sector flips {:?}",
            sector.flips()
        )));
    }
    Ok(reference_gradient(sector.terms.terms().iter(), rep, reference)?.abs())
}

/// One DIS equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientGroup {
    pub flips: u64,
    pub representative: PauliWord,
    pub gradient_magnitude: f64,
}

impl GradientGroup {
    pub fn flip_indices(&self) -> Vec<usize> {
        mask_indices(self.flips)
    }

    /// `2^(n-1)` for every group.
    pub fn size(&self) -> u64 {
        1u64 << (self.representative.n_qubits() - 1)
    }

    pub fn members(&self) -> GroupMembers {
        group_members(self, self.representative.n_qubits())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningStats {
    pub sectors: usize,
    /// Term-level products evaluated while ranking.
    pub term_evaluations: usize,
}

pub fn build_dis(h: &Operator, reference: &PurifiedReference) -> Result<Vec<GradientGroup>> {
    build_dis_with_stats(h, reference).map(|(g, _)| g)
}

pub fn build_dis_with_stats(
    h: &Operator,
    reference: &PurifiedReference,
) -> Result<(Vec<GradientGroup>, ScreeningStats)> {
    check_dims(h.n_qubits(), reference.n_qubits())?;
    let sectors = partition_sectors(h);
    let mut stats = ScreeningStats {
        sectors: sectors.len(),
        term_evaluations: 0,
    };
    let mut groups = Vec::new();
    for sector in &sectors {
        let Some(rep) = dis_representative(h.n_qubits(), sector.flips) else {
            continue;
        };
        stats.term_evaluations += sector.terms.len();
        let gradient_magnitude = sector_gradient(sector, &rep, reference)?;
        groups.push(GradientGroup {
            flips: sector.flips,
            representative: rep,
            gradient_magnitude,
        });
    }
    groups.sort_by(|a, b| {
        b.gradient_magnitude
            .partial_cmp(&a.gradient_magnitude)
            .unwrap()
            .then(a.representative.cmp(&b.representative))
    });
    Ok((groups, stats))
}

/// Lazy enumeration of a group's `2^(n-1)` members.
///
/// Member index bits, low to high: the X/Y choice on every flip qubit except
/// the lowest (which is then fixed by odd Y parity), then the I/Z choice on
/// every non-flip qubit. Index 0 is the representative.
#[derive(Debug, Clone)]
pub struct GroupMembers {
    n_qubits: usize,
    flips: Vec<usize>,
    others: Vec<usize>,
    next: u64,
    end: u64,
}

pub fn group_members(group: &GradientGroup, n_qubits: usize) -> GroupMembers {
    let flips = mask_indices(group.flips);
    let others = (0..n_qubits)
        .filter(|q| group.flips & (1u64 << q) == 0)
        .collect();
    GroupMembers {
        n_qubits,
        flips,
        others,
        next: 0,
        end: 1u64 << (n_qubits - 1),
    }
}

impl GroupMembers {
    pub fn count_members(&self) -> u64 {
        self.end
    }

    pub fn member(&self, index: u64) -> PauliWord {
        debug_assert!(index < self.end);
        let mut w = PauliWord::identity(self.n_qubits);
        let mut bits = index;
        let mut ys = 0;
        for &q in &self.flips[1..] {
            let y = bits & 1 == 1;
            bits >>= 1;
            ys += y as u32;
            w = w.with_letter(q, if y { PauliLetter::Y } else { PauliLetter::X });
        }
        let first = if ys % 2 == 0 {
            PauliLetter::Y
        } else {
            PauliLetter::X
        };
        w = w.with_letter(self.flips[0], first);
        for &q in &self.others {
            if bits & 1 == 1 {
                w = w.with_letter(q, PauliLetter::Z);
            }
            bits >>= 1;
        }
        w
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliWord {
        self.member(rng.gen_range(0..self.end))
    }
}

impl Iterator for GroupMembers {
    type Item = PauliWord;

    fn next(&mut self) -> Option<PauliWord> {
        if self.next >= self.end {
            return None;
        }
        let w = self.member(self.next);
        self.next += 1;
        Some(w)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolKind {
    Dis,
    FermionicSd,
    TwoQubitPauli,
}

impl std::str::FromStr for PoolKind {
    type Err = IqccError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dis" => Ok(PoolKind::Dis),
            "fermionic-sd" | "fermionic" | "sd" => Ok(PoolKind::FermionicSd),
            "two-qubit-pauli" | "two-qubit" | "2q" => Ok(PoolKind::TwoQubitPauli),
            other => Err(IqccError::InvalidArgument(format!(
                "unknown pool {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorPool {
    /// Built on demand from the current Hamiltonian.
    Dis,
    /// Pauli words split out of mapped single and double excitations.
    FermionicSd(Vec<PauliWord>),
    /// Every word acting nontrivially on one or two qubits.
    TwoQubitPauli { n_qubits: usize },
}

impl OperatorPool {
    pub fn kind(&self) -> PoolKind {
        match self {
            OperatorPool::Dis => PoolKind::Dis,
            OperatorPool::FermionicSd(_) => PoolKind::FermionicSd,
            OperatorPool::TwoQubitPauli { .. } => PoolKind::TwoQubitPauli,
        }
    }

    /// Explicit members; the DIS pool has none until screened.
    pub fn members(&self) -> Box<dyn Iterator<Item = PauliWord> + '_> {
        match self {
            OperatorPool::Dis => Box::new(std::iter::empty()),
            OperatorPool::FermionicSd(words) => Box::new(words.iter().copied()),
            OperatorPool::TwoQubitPauli { n_qubits } => Box::new(two_qubit_words(*n_qubits)),
        }
    }
}

fn two_qubit_words(n: usize) -> impl Iterator<Item = PauliWord> {
    const LETTERS: [PauliLetter; 3] = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
    let singles =
        (0..n).flat_map(move |q| LETTERS.iter().map(move |&l| PauliWord::single(n, q, l)));
    let pairs = (0..n).flat_map(move |i| {
        (i + 1..n).flat_map(move |j| {
            LETTERS.iter().flat_map(move |&a| {
                LETTERS
                    .iter()
                    .map(move |&b| PauliWord::single(n, i, a).with_letter(j, b))
            })
        })
    });
    singles.chain(pairs)
}

/// Top `top` generators of `pool` by gradient magnitude, ties in word order.
pub fn pool_gradients(
    h: &Operator,
    reference: &PurifiedReference,
    pool: &OperatorPool,
    top: usize,
) -> Result<Vec<(PauliWord, f64)>> {
    if top == 0 {
        return Err(IqccError::InvalidArgument("top must be >= 1".into()));
    }
    check_dims(h.n_qubits(), reference.n_qubits())?;
    if let OperatorPool::Dis = pool {
        return Ok(build_dis(h, reference)?
            .into_iter()
            .take(top)
            .map(|g| (g.representative, g.gradient_magnitude))
            .collect());
    }
    let mut scored = Vec::new();
    for p in pool.members() {
        check_dims(h.n_qubits(), p.n_qubits())?;
        let g = if p.y_parity() == YParity::Even {
            0.0
        } else {
            generator_gradient(h, &p, reference)?.abs()
        };
        scored.push((p, g));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.dedup_by(|a, b| a.0 == b.0);
    scored.truncate(top);
    Ok(scored)
}

/// One uniformly drawn member from each of the top `min(n_g, #groups above
/// threshold)` groups. `groups` must already be ranked.
pub fn sample_generators<R: Rng + ?Sized>(
    groups: &[GradientGroup],
    n_g: usize,
    threshold: f64,
    rng: &mut R,
) -> Vec<PauliWord> {
    groups
        .iter()
        .filter(|g| g.gradient_magnitude > threshold)
        .take(n_g)
        .map(|g| g.members().sample(rng))
        .collect()
}
