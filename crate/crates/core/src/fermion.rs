//! Fermion-to-qubit mappings, symmetry operators and stationary-qubit reduction.
//!
//! Spin orbitals are ordered alpha block first: spatial orbital `i` gives
//! spin orbitals `i` (alpha) and `i + norb` (beta). An occupied spin orbital
//! is qubit state |1>.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, IqccError, Result};
use crate::fcidump::IntegralData;
use crate::operator::Operator;
use crate::oracle::{ground_energy, SolverMode};
use crate::pauli::{PauliLetter, PauliWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mapping {
    JordanWigner,
    Parity,
}

impl std::str::FromStr for Mapping {
    type Err = IqccError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" => Ok(Mapping::JordanWigner),
            "parity" => Ok(Mapping::Parity),
            other => Err(IqccError::InvalidArgument(format!(
                "unknown mapping {other:?}"
            ))),
        }
    }
}

/// Complex Pauli sum used while assembling fermionic products.
#[derive(Debug, Clone)]
struct ComplexSum {
    n: usize,
    terms: Vec<(PauliWord, Complex64)>,
}

impl ComplexSum {
    fn zero(n: usize) -> Self {
        ComplexSum {
            n,
            terms: Vec::new(),
        }
    }

    fn canonical(mut self) -> Self {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PauliWord, Complex64)> = Vec::with_capacity(self.terms.len());
        for (w, c) in self.terms {
            match merged.last_mut() {
                Some((lw, lc)) if *lw == w => *lc += c,
                _ => merged.push((w, c)),
            }
        }
        merged.retain(|(_, c)| c.norm() >= 1e-14);
        ComplexSum {
            n: self.n,
            terms: merged,
        }
    }

    fn mul(&self, other: &ComplexSum) -> ComplexSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (w, ph) = a.mul_unchecked(b);
                terms.push((w, ca * cb * ph.to_complex()));
            }
        }
        ComplexSum { n: self.n, terms }.canonical()
    }

    fn add_scaled(&mut self, other: &ComplexSum, s: Complex64) {
        self.terms
            .extend(other.terms.iter().map(|(w, c)| (*w, c * s)));
    }

    fn adjoint(&self) -> ComplexSum {
        ComplexSum {
            n: self.n,
            terms: self.terms.iter().map(|(w, c)| (*w, c.conj())).collect(),
        }
    }

    /// Real part as an [`Operator`]; fails if any imaginary part survives.
    fn into_real(self) -> Result<Operator> {
        let s = self.canonical();
        let mut out = Vec::with_capacity(s.terms.len());
        for (w, c) in s.terms {
            if c.im.abs() > 1e-10 {
                return Err(IqccError::ContractViolation(format!(
                    "mapped operator has imaginary coefficient {} on {w}",
                    c.im
                )));
            }
            out.push((w, c.re));
        }
        Ok(Operator::from_terms_unchecked(s.n, out))
    }
}

/// Qubit image of `a_j` (`dagger = false`) or `a†_j`.
fn ladder(n: usize, j: usize, dagger: bool, mapping: Mapping) -> ComplexSum {
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, if dagger { -0.5 } else { 0.5 });
    let (mut xw, mut yw) = (PauliWord::identity(n), PauliWord::identity(n));
    match mapping {
        Mapping::JordanWigner => {
            // a†_j = Z_{<j} (X_j - i Y_j) / 2
            for k in 0..j {
                xw = xw.with_letter(k, PauliLetter::Z);
                yw = yw.with_letter(k, PauliLetter::Z);
            }
            xw = xw.with_letter(j, PauliLetter::X);
            yw = yw.with_letter(j, PauliLetter::Y);
        }
        Mapping::Parity => {
            // a†_j = (X_j Z_{j-1} - i Y_j) X_{>j} / 2
            if j > 0 {
                xw = xw.with_letter(j - 1, PauliLetter::Z);
            }
            xw = xw.with_letter(j, PauliLetter::X);
            yw = yw.with_letter(j, PauliLetter::Y);
            for k in j + 1..n {
                xw = xw.with_letter(k, PauliLetter::X);
                yw = yw.with_letter(k, PauliLetter::X);
            }
        }
    }
    ComplexSum {
        n,
        terms: vec![(xw, half), (yw, ihalf)],
    }
}

struct LadderTable {
    create: Vec<ComplexSum>,
    annihilate: Vec<ComplexSum>,
}

impl LadderTable {
    fn new(n: usize, mapping: Mapping) -> Self {
        LadderTable {
            create: (0..n).map(|j| ladder(n, j, true, mapping)).collect(),
            annihilate: (0..n).map(|j| ladder(n, j, false, mapping)).collect(),
        }
    }

    /// `a†_p a_q`.
    fn excitation(&self, p: usize, q: usize) -> ComplexSum {
        self.create[p].mul(&self.annihilate[q])
    }
}

fn spin_orbital_count(data: &IntegralData) -> Result<usize> {
    let n = data.n_spin_orbitals();
    if n == 0 || n > crate::pauli::MAX_QUBITS {
        return Err(IqccError::InvalidArgument(format!(
            "{n} spin orbitals unsupported"
        )));
    }
    Ok(n)
}

/// `Σ h_pq a†_p a_q + ½ Σ (pr|qs) a†_p a†_q a_s a_r + E_core`.
pub fn map_hamiltonian(data: &IntegralData, mapping: Mapping) -> Result<Operator> {
    let n_so = spin_orbital_count(data)?;
    let norb = data.n_orbitals();
    let table = LadderTable::new(n_so, mapping);
    let excitations: Vec<Vec<ComplexSum>> = (0..n_so)
        .map(|p| (0..n_so).map(|q| table.excitation(p, q)).collect())
        .collect();
    let spatial = |p: usize| p % norb;
    let spin = |p: usize| p / norb;

    let mut total = ComplexSum::zero(n_so);
    total
        .terms
        .push((PauliWord::identity(n_so), Complex64::new(data.e_core, 0.0)));
    for p in 0..n_so {
        for q in 0..n_so {
            if spin(p) != spin(q) {
                continue;
            }
            let v = data.h(spatial(p), spatial(q));
            if v != 0.0 {
                total.add_scaled(&excitations[p][q], Complex64::new(v, 0.0));
            }
        }
    }
    // a†_p a†_q a_s a_r = E_pr E_qs - δ_qr E_ps
    for p in 0..n_so {
        for r in 0..n_so {
            if spin(p) != spin(r) {
                continue;
            }
            let mut inner = ComplexSum::zero(n_so);
            for q in 0..n_so {
                for s in 0..n_so {
                    if spin(q) != spin(s) {
                        continue;
                    }
                    let v = data.g(spatial(p), spatial(r), spatial(q), spatial(s));
                    if v == 0.0 {
                        continue;
                    }
                    inner.add_scaled(&excitations[q][s], Complex64::new(0.5 * v, 0.0));
                    if q == r {
                        total.add_scaled(&excitations[p][s], Complex64::new(-0.5 * v, 0.0));
                    }
                }
            }
            if !inner.terms.is_empty() {
                let product = excitations[p][r].mul(&inner.canonical());
                total.add_scaled(&product, Complex64::new(1.0, 0.0));
            }
        }
        total = total.canonical();
    }
    total.into_real()
}

pub fn jordan_wigner(data: &IntegralData) -> Result<Operator> {
    map_hamiltonian(data, Mapping::JordanWigner)
}

pub fn parity_map(data: &IntegralData) -> Result<Operator> {
    map_hamiltonian(data, Mapping::Parity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    N,
    Sz,
    S2,
}

/// Qubit image of `N`, `S_z` or `S²` on `n_so` spin orbitals (alpha block first).
pub fn build_symmetry_operator(
    kind: SymmetryKind,
    n_so: usize,
    mapping: Mapping,
) -> Result<Operator> {
    if n_so == 0 || n_so % 2 != 0 || n_so > crate::pauli::MAX_QUBITS {
        return Err(IqccError::InvalidArgument(format!(
            "spin-orbital count {n_so} must be even and in 2..=64"
        )));
    }
    let norb = n_so / 2;
    let table = LadderTable::new(n_so, mapping);
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let mut sz = ComplexSum::zero(n_so);
    for i in 0..norb {
        sz.add_scaled(&table.excitation(i, i), half);
        sz.add_scaled(&table.excitation(i + norb, i + norb), -half);
    }
    let sz = sz.canonical();
    let result = match kind {
        SymmetryKind::N => {
            let mut n = ComplexSum::zero(n_so);
            for p in 0..n_so {
                n.add_scaled(&table.excitation(p, p), one);
            }
            n
        }
        SymmetryKind::Sz => sz,
        SymmetryKind::S2 => {
            let mut plus = ComplexSum::zero(n_so);
            for i in 0..norb {
                plus.add_scaled(&table.excitation(i, i + norb), one);
            }
            let plus = plus.canonical();
            let minus = plus.adjoint();
            let mut s2 = sz.mul(&sz);
            s2.add_scaled(&plus.mul(&minus), half);
            s2.add_scaled(&minus.mul(&plus), half);
            s2
        }
    };
    result.into_real()
}

/// `h + (μ/2) S²`.
pub fn spin_penalize(h: &Operator, s2: &Operator, mu: f64) -> Result<Operator> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(IqccError::InvalidArgument(format!(
            "spin penalty must be positive, got {mu}"
        )));
    }
    h.linear_combination(1.0, s2, mu / 2.0)
}

/// Whether `[s, p]` vanishes.
pub fn symmetry_commutes(p: &PauliWord, s: &Operator) -> Result<bool> {
    check_dims(s.n_qubits(), p.n_qubits())?;
    // Distinct words of s map to distinct products, so nothing can cancel.
    Ok(s.iter().all(|(w, _)| w.commutes_unchecked(p)))
}

/// Pauli words of the mapped spin-conserving singles and doubles
/// `T - T†`, deduplicated and sorted.
pub fn fermionic_sd_pool(n_so: usize, mapping: Mapping) -> Result<Vec<PauliWord>> {
    if n_so < 2 || n_so % 2 != 0 || n_so > crate::pauli::MAX_QUBITS {
        return Err(IqccError::InvalidArgument(format!(
            "spin-orbital count {n_so} must be even and in 2..=64"
        )));
    }
    let norb = n_so / 2;
    let spin = |p: usize| p / norb;
    let table = LadderTable::new(n_so, mapping);
    let mut words = Vec::new();
    let mut collect = |t: ComplexSum| {
        let mut gen = t.clone();
        gen.add_scaled(&t.adjoint(), Complex64::new(-1.0, 0.0));
        for (w, c) in gen.canonical().terms {
            if c.norm() > 1e-12 {
                words.push(w);
            }
        }
    };
    for p in 0..n_so {
        for q in 0..p {
            if spin(p) == spin(q) {
                collect(table.excitation(p, q));
            }
        }
    }
    // a†_p a†_q a_s a_r with p > q, r > s, (p,q) > (r,s), spin conserved.
    for p in 0..n_so {
        for q in 0..p {
            for r in 0..n_so {
                for s in 0..r {
                    if (p, q) <= (r, s) || spin(p) + spin(q) != spin(r) + spin(s) {
                        continue;
                    }
                    let t = table.create[p]
                        .mul(&table.create[q])
                        .mul(&table.annihilate[s])
                        .mul(&table.annihilate[r]);
                    collect(t);
                }
            }
        }
    }
    words.sort();
    words.dedup();
    Ok(words)
}

/// Qubits on which every term acts with I or Z.
pub fn find_stationary_qubits(h: &Operator) -> Vec<usize> {
    let flips = h.iter().fold(0u64, |m, (w, _)| m | w.x_mask());
    (0..h.n_qubits())
        .filter(|q| flips & (1u64 << q) == 0)
        .collect()
}

/// Z eigenvalues fixed on stationary qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitAssignment {
    pub positions: Vec<usize>,
    pub eigenvalues: Vec<i8>,
}

impl QubitAssignment {
    pub fn new(positions: Vec<usize>, eigenvalues: Vec<i8>) -> Result<Self> {
        check_dims(positions.len(), eigenvalues.len())?;
        if eigenvalues.iter().any(|e| *e != 1 && *e != -1) {
            return Err(IqccError::InvalidArgument(
                "eigenvalues must be +1 or -1".into(),
            ));
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != positions.len() {
            return Err(IqccError::InvalidArgument("repeated qubit position".into()));
        }
        Ok(QubitAssignment {
            positions,
            eigenvalues,
        })
    }

    fn masks(&self) -> (u64, u64) {
        let mut all = 0u64;
        let mut negative = 0u64;
        for (&p, &e) in self.positions.iter().zip(&self.eigenvalues) {
            all |= 1u64 << p;
            if e < 0 {
                negative |= 1u64 << p;
            }
        }
        (all, negative)
    }
}

/// Substitute the assigned eigenvalues and drop those qubits.
pub fn reduce_qubits(h: &Operator, a: &QubitAssignment) -> Result<Operator> {
    let n = h.n_qubits();
    if let Some(&p) = a.positions.iter().find(|&&p| p >= n) {
        return Err(IqccError::InvalidArgument(format!(
            "qubit {p} out of range"
        )));
    }
    if a.positions.len() >= n {
        return Err(IqccError::InvalidArgument(
            "reduction would remove every qubit".into(),
        ));
    }
    let (removed, negative) = a.masks();
    let mut out = Vec::with_capacity(h.len());
    for (w, c) in h.iter() {
        if w.x_mask() & removed != 0 {
            return Err(IqccError::ContractViolation(format!(
                "term {w} flips an assigned qubit"
            )));
        }
        let sign = if (w.z_mask() & negative).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        out.push((w.compact(removed), sign * c));
    }
    Ok(Operator::from_terms_unchecked(n - a.positions.len(), out))
}

/// Reduce a list of generator words; words flipping an assigned qubit are
/// dropped, Z on assigned qubits is absorbed (sign is irrelevant for a pool).
pub fn reduce_words(words: &[PauliWord], a: &QubitAssignment) -> Vec<PauliWord> {
    let (removed, _) = a.masks();
    let mut out: Vec<PauliWord> = words
        .iter()
        .filter(|w| w.x_mask() & removed == 0)
        .map(|w| w.compact(removed))
        .filter(|w| !w.is_identity())
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEnergy {
    pub eigenvalues: Vec<i8>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorChoice {
    pub assignment: QubitAssignment,
    pub ground_energy: f64,
    /// Every candidate, in enumeration order.
    pub sectors: Vec<SectorEnergy>,
}

/// Try every eigenvalue assignment of the stationary qubits and keep the one
/// holding the global ground state (the full operator is block diagonal in
/// them, so its ground energy is the minimum over sectors). Ties within
/// 1e-10 go to the lexicographically smallest assignment with -1 < +1.
pub fn choose_sector(h: &Operator, oracle_budget: usize) -> Result<SectorChoice> {
    let positions = find_stationary_qubits(h);
    if positions.is_empty() {
        return Err(IqccError::InvalidArgument(
            "operator has no stationary qubits".into(),
        ));
    }
    let s = positions.len();
    let reduced_n = h.n_qubits().saturating_sub(s);
    if reduced_n == 0 {
        return Err(IqccError::InvalidArgument(
            "every qubit is stationary".into(),
        ));
    }
    let budget = oracle_budget.min(crate::oracle::ITERATIVE_QUBIT_LIMIT);
    if reduced_n > budget || s > 16 {
        return Err(IqccError::BudgetExceeded {
            what: "sector selection",
            required: reduced_n,
            budget,
        });
    }
    let mut sectors = Vec::with_capacity(1 << s);
    // Bit k set means position k gets -1; counting down from all -1 gives
    // lexicographic order with -1 < +1.
    for code in (0..(1u64 << s)).rev() {
        let eigenvalues: Vec<i8> = (0..s)
            .map(|k| {
                if code & (1u64 << (s - 1 - k)) != 0 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        let a = QubitAssignment::new(positions.clone(), eigenvalues.clone())?;
        let reduced = reduce_qubits(h, &a)?;
        let energy = ground_energy(&reduced, SolverMode::auto(reduced_n))?;
        log::info!(
            "{}",
            serde_json::json!({"event": "sector", "positions": positions, "eigenvalues": eigenvalues, "energy": energy})
        );
        sectors.push(SectorEnergy {
            eigenvalues,
            energy,
        });
    }
    let min = sectors
        .iter()
        .map(|s| s.energy)
        .fold(f64::INFINITY, f64::min);
    let best = sectors
        .iter()
        .find(|s| s.energy <= min + 1e-10)
        .expect("at least one sector")
        .clone();
    Ok(SectorChoice {
        assignment: QubitAssignment::new(positions, best.eigenvalues)?,
        ground_energy: best.energy,
        sectors,
    })
}
