//! FCIDUMP-style integral files.
//!
//! Header `&FCI NORB=..., NELEC=..., MS2=..., &END` (or a `/` terminator),
//! then records `value i j k l` with 1-based spatial orbital indices:
//! `i j k l` two-electron `(ij|kl)`, `i j 0 0` one-electron, `0 0 0 0` core
//! energy. `i 0 0 0` orbital energies are accepted and ignored. Optional
//! header keys `NAO`, `NCORE`, `NFROZEN` carry active-space metadata.

use std::fmt::Write as _;

use crate::error::{IqccError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralData {
    norb: usize,
    /// One-electron integrals `h_ij`, row-major `norb x norb` (hartree).
    h: Vec<f64>,
    /// Chemist-notation `(ij|kl)`, row-major `norb^4` (hartree).
    g: Vec<f64>,
    pub e_core: f64,
    pub n_electrons: Option<usize>,
    pub ms2: Option<i64>,
    pub n_ao: Option<usize>,
    pub n_core: Option<usize>,
    pub n_frozen: Option<usize>,
}

impl IntegralData {
    pub fn zeros(norb: usize) -> Self {
        IntegralData {
            norb,
            h: vec![0.0; norb * norb],
            g: vec![0.0; norb.pow(4)],
            e_core: 0.0,
            n_electrons: None,
            ms2: None,
            n_ao: None,
            n_core: None,
            n_frozen: None,
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.norb
    }

    /// Spin orbitals: the alpha block then the beta block.
    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.norb
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.norb + j]
    }

    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.g[self.g_index(i, j, k, l)]
    }

    fn g_index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.norb + j) * self.norb + k) * self.norb + l
    }

    /// Sets `h_ij` and `h_ji`.
    pub fn set_h(&mut self, i: usize, j: usize, v: f64) {
        let n = self.norb;
        self.h[i * n + j] = v;
        self.h[j * n + i] = v;
    }

    /// Sets `(ij|kl)` and its seven real-orbital permutations.
    pub fn set_g(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        for (a, b, c, d) in [
            (i, j, k, l),
            (j, i, k, l),
            (i, j, l, k),
            (j, i, l, k),
            (k, l, i, j),
            (l, k, i, j),
            (k, l, j, i),
            (l, k, j, i),
        ] {
            let idx = self.g_index(a, b, c, d);
            self.g[idx] = v;
        }
    }

    fn check_metadata(&self) -> Result<()> {
        if let Some(n_ao) = self.n_ao {
            let core = self.n_core.unwrap_or(0);
            let frozen = self.n_frozen.unwrap_or(0);
            if n_ao < core + frozen || 2 * (n_ao - core - frozen) != self.n_spin_orbitals() {
                return Err(IqccError::parse(
                    0,
                    format!(
                        "spin-orbital count {} != 2*NAO - 2*NCORE - 2*NFROZEN = 2*{n_ao} - 2*{core} - 2*{frozen}",
                        self.n_spin_orbitals()
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut header = String::new();
        let mut closed = false;
        for (_, line) in lines.by_ref() {
            let t = line.trim();
            let upper = t.to_ascii_uppercase();
            if upper == "/"
                || upper.ends_with("&END")
                || upper.ends_with("$END")
                || upper.ends_with('/')
            {
                header.push(' ');
                header.push_str(
                    upper
                        .trim_end_matches("&END")
                        .trim_end_matches("$END")
                        .trim_end_matches('/'),
                );
                closed = true;
                break;
            }
            header.push(' ');
            header.push_str(&upper);
        }
        if !closed || !header.contains("&FCI") {
            return Err(IqccError::parse(1, "missing &FCI ... &END header"));
        }
        let fields = header_fields(&header.replace("&FCI", " "));
        let get = |key: &str| -> Result<Option<i64>> {
            match fields.iter().find(|(k, _)| k == key) {
                None => Ok(None),
                Some((_, vals)) => vals
                    .first()
                    .ok_or_else(|| IqccError::parse(1, format!("{key} has no value")))?
                    .parse::<i64>()
                    .map(Some)
                    .map_err(|_| IqccError::parse(1, format!("bad {key} value"))),
            }
        };
        let as_count = |v: Option<i64>, key: &str| -> Result<Option<usize>> {
            v.map(|x| {
                usize::try_from(x).map_err(|_| IqccError::parse(1, format!("negative {key}")))
            })
            .transpose()
        };
        let norb = as_count(get("NORB")?, "NORB")?
            .ok_or_else(|| IqccError::parse(1, "header lacks NORB"))?;
        if norb == 0 || 2 * norb > crate::pauli::MAX_QUBITS {
            return Err(IqccError::parse(1, format!("NORB={norb} outside 1..=32")));
        }
        let mut data = IntegralData::zeros(norb);
        data.n_electrons = as_count(get("NELEC")?, "NELEC")?;
        data.ms2 = get("MS2")?;
        data.n_ao = as_count(get("NAO")?, "NAO")?;
        data.n_core = as_count(get("NCORE")?, "NCORE")?;
        data.n_frozen = as_count(get("NFROZEN")?, "NFROZEN")?;

        for (idx, line) in lines {
            let line_no = idx + 1;
            let mut tok = line.split_whitespace();
            let Some(first) = tok.next() else { continue };
            let value: f64 = first
                .replace(['D', 'd'], "e")
                .parse()
                .map_err(|_| IqccError::parse(line_no, format!("bad value {first:?}")))?;
            let mut idx4 = [0usize; 4];
            for slot in idx4.iter_mut() {
                let t = tok
                    .next()
                    .ok_or_else(|| IqccError::parse(line_no, "expected value and four indices"))?;
                *slot = t
                    .parse()
                    .map_err(|_| IqccError::parse(line_no, format!("bad index {t:?}")))?;
                if *slot > norb {
                    return Err(IqccError::parse(
                        line_no,
                        format!("index {slot} exceeds NORB={norb}"),
                    ));
                }
            }
            if tok.next().is_some() {
                return Err(IqccError::parse(line_no, "trailing tokens"));
            }
            match idx4 {
                [0, 0, 0, 0] => data.e_core = value,
                [i, 0, 0, 0] if i > 0 => {}
                [i, j, 0, 0] if i > 0 && j > 0 => data.set_h(i - 1, j - 1, value),
                [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                    data.set_g(i - 1, j - 1, k - 1, l - 1, value)
                }
                _ => return Err(IqccError::parse(line_no, "malformed index pattern")),
            }
        }
        data.check_metadata()?;
        Ok(data)
    }

    /// Unique nonzero entries, shortest round-trip float formatting.
    pub fn to_fcidump_string(&self) -> String {
        let n = self.norb;
        let mut s = format!("&FCI NORB={n},");
        if let Some(ne) = self.n_electrons {
            let _ = write!(s, "NELEC={ne},");
        }
        if let Some(ms2) = self.ms2 {
            let _ = write!(s, "MS2={ms2},");
        }
        if let Some(v) = self.n_ao {
            let _ = write!(s, "NAO={v},");
        }
        if let Some(v) = self.n_core {
            let _ = write!(s, "NCORE={v},");
        }
        if let Some(v) = self.n_frozen {
            let _ = write!(s, "NFROZEN={v},");
        }
        s.push_str("\n&END\n");
        for i in 0..n {
            for j in 0..=i {
                for k in 0..n {
                    for l in 0..=k {
                        if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                            continue;
                        }
                        let v = self.g(i, j, k, l);
                        if v != 0.0 {
                            let _ = writeln!(s, "{v:e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                let v = self.h(i, j);
                if v != 0.0 {
                    let _ = writeln!(s, "{v:e} {} {} 0 0", i + 1, j + 1);
                }
            }
        }
        let _ = writeln!(s, "{:e} 0 0 0 0", self.e_core);
        s
    }
}

fn header_fields(header: &str) -> Vec<(String, Vec<String>)> {
    let mut fields: Vec<(String, Vec<String>)> = Vec::new();
    for tok in header.replace(',', " ").split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            let mut vals = Vec::new();
            if !v.is_empty() {
                vals.push(v.to_string());
            }
            fields.push((k.to_string(), vals));
        } else if let Some((_, vals)) = fields.last_mut() {
            vals.push(tok.to_string());
        }
    }
    fields
}
