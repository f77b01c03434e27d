//! Real linear combinations of Pauli words.

use std::fmt::Write as _;

use crate::error::{check_dims, IqccError, Result};
use crate::pauli::{PauliWord, MAX_QUBITS};

/// Coefficients below this magnitude are dropped when terms are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// `Σ_k C_k P_k` with real `C_k`, each word at most once, sorted by word.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    terms: Vec<(PauliWord, f64)>,
}

impl Operator {
    pub fn new(n_qubits: usize) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        Operator {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize, c: f64) -> Self {
        Operator::from_terms_unchecked(n_qubits, vec![(PauliWord::identity(n_qubits), c)])
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliWord, f64)>,
    {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(IqccError::InvalidArgument(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let terms: Vec<_> = terms.into_iter().collect();
        for (w, c) in &terms {
            check_dims(n_qubits, w.n_qubits())?;
            if !c.is_finite() {
                return Err(IqccError::InvalidArgument(format!(
                    "non-finite coefficient on {w}"
                )));
            }
        }
        Ok(Operator::from_terms_unchecked(n_qubits, terms))
    }

    /// Merges duplicates in insertion order, so sums are reproducible.
    pub(crate) fn from_terms_unchecked(n_qubits: usize, mut terms: Vec<(PauliWord, f64)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(PauliWord, f64)> = Vec::with_capacity(terms.len());
        for (w, c) in terms {
            match merged.last_mut() {
                Some((lw, lc)) if *lw == w => *lc += c,
                _ => merged.push((w, c)),
            }
        }
        merged.retain(|(_, c)| c.abs() >= MERGE_TOLERANCE);
        Operator {
            n_qubits,
            terms: merged,
        }
    }

    /// Takes terms already sorted with unique words; only filters dust.
    pub(crate) fn from_sorted_unique(n_qubits: usize, mut terms: Vec<(PauliWord, f64)>) -> Self {
        debug_assert!(terms.windows(2).all(|p| p[0].0 < p[1].0));
        terms.retain(|(_, c)| c.abs() >= MERGE_TOLERANCE);
        Operator { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(PauliWord, f64)] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliWord, f64)> + '_ {
        self.terms.iter().map(|(w, c)| (w, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &PauliWord) -> f64 {
        self.terms
            .binary_search_by(|(w, _)| w.cmp(word))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.coefficient(&PauliWord::identity(self.n_qubits))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Operator, b: f64) -> Result<Operator> {
        check_dims(self.n_qubits, other.n_qubits)?;
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let next = match (self.terms.get(i), other.terms.get(j)) {
                (Some(l), Some(r)) if l.0 == r.0 => {
                    i += 1;
                    j += 1;
                    (l.0, a * l.1 + b * r.1)
                }
                (Some(l), Some(r)) if l.0 < r.0 => {
                    i += 1;
                    (l.0, a * l.1)
                }
                (Some(l), None) => {
                    i += 1;
                    (l.0, a * l.1)
                }
                (_, Some(r)) => {
                    j += 1;
                    (r.0, b * r.1)
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        Ok(Operator::from_sorted_unique(self.n_qubits, out))
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator::from_sorted_unique(
            self.n_qubits,
            self.terms.iter().map(|&(w, c)| (w, c * factor)).collect(),
        )
    }

    /// `-(i/2)[self, p]`. Only terms anticommuting with `p` survive, and each
    /// maps to a distinct word with a real coefficient.
    pub fn commutator_half(&self, p: &PauliWord) -> Result<Operator> {
        check_dims(self.n_qubits, p.n_qubits())?;
        let mut out = Vec::new();
        for &(w, c) in &self.terms {
            if w.commutes_unchecked(p) {
                continue;
            }
            // [w, p] = 2 w p = 2 i^k v, and -(i/2) * 2 i^k = -i^{k+1}
            let (v, phase) = w.mul_unchecked(p);
            let sign = (phase * crate::pauli::Phase::I)
                .real_sign()
                .ok_or_else(|| {
                    IqccError::ContractViolation(format!(
                        "anticommuting product {w}·{p} has a real phase"
                    ))
                })?;
            out.push((v, -sign * c));
        }
        Ok(Operator::from_terms_unchecked(self.n_qubits, out))
    }

    /// `p · self · p`: same words, sign flipped on terms anticommuting with `p`.
    pub fn conjugate_by_word(&self, p: &PauliWord) -> Result<Operator> {
        check_dims(self.n_qubits, p.n_qubits())?;
        Ok(Operator {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|&(w, c)| (w, if w.commutes_unchecked(p) { c } else { -c }))
                .collect(),
        })
    }

    /// `sqrt(Tr(H†H)) = 2^{n/2} sqrt(Σ C_j²)`.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self.terms.iter().map(|(_, c)| c * c).sum();
        (self.n_qubits as f64 / 2.0).exp2() * sum.sqrt()
    }

    /// Largest magnitude coefficient; zero for the empty operator.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, (_, c)| m.max(c.abs()))
    }

    /// Parse the line format `<coefficient> <letters>`, qubit 0 leftmost.
    ///
    /// Text after `#` is ignored. A `# qubits: N` comment fixes the qubit
    /// count, which is the only way to write an empty operator.
    pub fn parse_text(text: &str) -> Result<Operator> {
        let mut n_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let (body, comment) = match raw.find('#') {
                Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
                None => (raw, None),
            };
            if let Some(hint) = comment.and_then(|c| c.trim().strip_prefix("qubits:")) {
                let n: usize = hint
                    .trim()
                    .parse()
                    .map_err(|_| IqccError::parse(line_no, "bad qubit count"))?;
                match n_qubits {
                    Some(prev) if prev != n => {
                        return Err(IqccError::parse(line_no, "conflicting qubit count"))
                    }
                    _ => n_qubits = Some(n),
                }
            }
            let mut tokens = body.split_whitespace();
            let Some(coef) = tokens.next() else { continue };
            let letters = tokens
                .next()
                .ok_or_else(|| IqccError::parse(line_no, "missing Pauli letters"))?;
            if tokens.next().is_some() {
                return Err(IqccError::parse(line_no, "trailing tokens"));
            }
            let c: f64 = coef
                .parse()
                .map_err(|_| IqccError::parse(line_no, format!("bad coefficient {coef:?}")))?;
            if !c.is_finite() {
                return Err(IqccError::parse(line_no, "non-finite coefficient"));
            }
            let w: PauliWord = letters
                .parse()
                .map_err(|e: IqccError| IqccError::parse(line_no, e.to_string()))?;
            match n_qubits {
                Some(n) if n != w.n_qubits() => {
                    return Err(IqccError::parse(
                        line_no,
                        format!("expected {n} letters, found {}", w.n_qubits()),
                    ))
                }
                None => n_qubits = Some(w.n_qubits()),
                _ => {}
            }
            terms.push((w, c));
        }
        let n = n_qubits.ok_or_else(|| IqccError::parse(0, "no terms and no qubit count"))?;
        if !(1..=MAX_QUBITS).contains(&n) {
            return Err(IqccError::parse(0, format!("qubit count {n} out of range")));
        }
        Ok(Operator::from_terms_unchecked(n, terms))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits: {}\n", self.n_qubits);
        for (w, c) in &self.terms {
            let _ = writeln!(s, "{c:e} {w}");
        }
        s
    }
}
