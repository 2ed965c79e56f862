//! Pauli strings, grouped Hamiltonians and their dense matrices.

mod models;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64, ZERO};

pub use models::{build_model, Grouping, Model};

/// Largest qubit count accepted by [`to_dense`] unless a caller raises it.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Tensor product `σ_1 ⊗ … ⊗ σ_n`; qubit 0 is the most significant bit of
/// the computational basis index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::param("n", "a Pauli string needs at least one qubit"));
        }
        Ok(PauliString { letters })
    }

    pub fn identity(n: usize) -> Result<Self> {
        PauliString::new(alloc::vec![Pauli::I; n])
    }

    /// Places `ops` on the given qubits of an otherwise trivial string.
    pub fn on_sites(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = alloc::vec![Pauli::I; n];
        for &(site, p) in ops {
            if site >= n {
                return Err(Error::param("site", format!("{site} out of range for {n} qubits")));
            }
            letters[site] = p;
        }
        PauliString::new(letters)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_letter(c).ok_or_else(|| Error::param("pauli", format!("bad letter `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks of the X part, the Z part, and the number of Y letters.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.len();
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u32);
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => xm |= bit,
                Pauli::Y => {
                    xm |= bit;
                    zm |= bit;
                    ny += 1;
                }
                Pauli::Z => zm |= bit,
            }
        }
        (xm, zm, ny)
    }

    /// Adds `coefficient * σ` into `out` (dimension `2^n`).
    fn accumulate(&self, coefficient: f64, out: &mut Matrix) {
        let (xm, zm, ny) = self.masks();
        let base = match ny % 4 {
            0 => C64::new(coefficient, 0.0),
            1 => C64::new(0.0, coefficient),
            2 => C64::new(-coefficient, 0.0),
            _ => C64::new(0.0, -coefficient),
        };
        // Y = iXZ: Z contributes (-1)^bit on the input, X flips the bit.
        for col in 0..out.cols() {
            let row = col ^ xm;
            let sign = if (col & zm).count_ones() % 2 == 0 { base } else { -base };
            out[(row, col)] += sign;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PauliTerm {
    pub string: PauliString,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(string: PauliString, coefficient: f64) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::param("coefficient", "must be finite"));
        }
        if string.is_identity() {
            log::warn!("constant shift term {coefficient} on {string}");
        }
        Ok(PauliTerm { string, coefficient })
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermGroup {
    pub name: String,
    pub terms: Vec<PauliTerm>,
}

/// `H = Σ_γ H_γ` with each `H_γ` an experimentally realizable block.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HamiltonianSpec {
    n: usize,
    groups: Vec<TermGroup>,
    model: Option<Model>,
}

impl HamiltonianSpec {
    pub fn new(n: usize, groups: Vec<TermGroup>) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", "need at least one qubit"));
        }
        if groups.is_empty() {
            return Err(Error::param("groups", "need at least one group"));
        }
        for g in &groups {
            for t in &g.terms {
                if t.string.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: t.string.len(),
                    });
                }
            }
        }
        Ok(HamiltonianSpec {
            n,
            groups,
            model: None,
        })
    }

    pub(crate) fn with_model(mut self, model: Model) -> Self {
        self.model = Some(model);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[TermGroup] {
        &self.groups
    }

    pub fn group(&self, index: usize) -> &TermGroup {
        &self.groups[index]
    }

    pub fn model(&self) -> Option<&Model> {
        self.model.as_ref()
    }

    pub fn terms(&self) -> impl Iterator<Item = &PauliTerm> {
        self.groups.iter().flat_map(|g| g.terms.iter())
    }

    /// Dense matrix of one group.
    pub fn group_dense(&self, index: usize) -> Result<Matrix> {
        to_dense(&self.groups[index].terms, self.n)
    }

    /// Dense matrices of every group, in order.
    pub fn groups_dense(&self) -> Result<Vec<Matrix>> {
        (0..self.groups.len()).map(|g| self.group_dense(g)).collect()
    }

    /// Dense matrix of the whole Hamiltonian.
    pub fn dense(&self) -> Result<Matrix> {
        let terms: Vec<PauliTerm> = self.terms().cloned().collect();
        to_dense(&terms, self.n)
    }

    /// Pauli strings appearing in more than one group.
    pub fn shared_strings(&self) -> Vec<String> {
        let mut owner: BTreeMap<&PauliString, usize> = BTreeMap::new();
        let mut shared = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            for t in &g.terms {
                match owner.get(&t.string) {
                    Some(&o) if o != gi => {
                        let s = format!("{}", t.string);
                        if !shared.contains(&s) {
                            shared.push(s);
                        }
                    }
                    Some(_) => {}
                    None => {
                        owner.insert(&t.string, gi);
                    }
                }
            }
        }
        shared
    }

    /// Plain-text echo of the model and its explicit term list.
    pub fn provenance(&self) -> String {
        let mut s = String::new();
        if let Some(m) = &self.model {
            s.push_str(&format!("model = \"{}\"\n", m.name()));
            for (k, v) in m.params() {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s.push_str(&format!("n = {}\n", self.n));
        for g in &self.groups {
            s.push_str(&format!("\n[group {}]\n", g.name));
            for t in &g.terms {
                s.push_str(&format!("{} {:+.17e}\n", t.string, t.coefficient));
            }
        }
        s
    }
}

/// `J_γ² = Σ_{σ∈H_γ} J_σ²` for each group, without the `2^n` trace factor.
///
/// Repeated strings within a group are combined before squaring.
pub fn group_weight_squares(spec: &HamiltonianSpec) -> Result<Vec<f64>> {
    let shared = spec.shared_strings();
    if !shared.is_empty() {
        return Err(Error::OverlappingSupport(shared));
    }
    Ok(spec
        .groups
        .iter()
        .map(|g| {
            let mut acc: BTreeMap<&PauliString, f64> = BTreeMap::new();
            for t in &g.terms {
                *acc.entry(&t.string).or_insert(0.0) += t.coefficient;
            }
            acc.values().map(|c| c * c).sum()
        })
        .collect())
}

/// `Σ J_σ σ` as a dense `2^n × 2^n` matrix.
pub fn to_dense(terms: &[PauliTerm], n: usize) -> Result<Matrix> {
    to_dense_capped(terms, n, DENSE_QUBIT_CAP)
}

pub fn to_dense_capped(terms: &[PauliTerm], n: usize, cap: usize) -> Result<Matrix> {
    if n > cap {
        return Err(Error::TooManyQubits { n, cap });
    }
    let d = 1usize << n;
    let mut out = Matrix::zeros(d, d);
    for t in terms {
        if t.string.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.string.len(),
            });
        }
        t.string.accumulate(t.coefficient, &mut out);
    }
    debug_assert!(out.as_slice().iter().all(|z| *z == ZERO || z.re.is_finite()));
    Ok(out)
}
