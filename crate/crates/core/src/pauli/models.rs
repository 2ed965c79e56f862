//! Benchmark models.
//!
//! Sites are 0-based. Boundary conditions: `xy_chain` and
//! `powerlaw_heisenberg` are open; `ising_tl`, `heisenberg_chain`,
//! `cluster_spt` and `zxz_field` are periodic. Terms with a zero
//! coefficient are omitted, and a periodic bond that wraps onto an existing
//! bond (n = 2) is merged into it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::{HamiltonianSpec, Pauli, PauliString, PauliTerm, TermGroup};
use crate::error::{Error, Result};

/// How three-site models are split into groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Grouping {
    /// The whole Hamiltonian is one group.
    Single,
    /// Three groups by the site index (mod 3) each term is anchored at.
    Sublattice,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum Model {
    /// `A = Σ X_i X_{i+1} + h Σ X_i`, `B = Σ Y_i Y_{i+1}`.
    XyChain { n: usize, h: f64 },
    /// Groups `H_X, H_Y, H_Z` with couplings `1/|i-j|^α` over all pairs.
    PowerlawHeisenberg { n: usize, alpha: f64 },
    /// `A = Σ X_i X_{i+1} + μ Σ X_i`, `B = λ Σ Z_i`.
    IsingTl { n: usize, mu: f64, lambda: f64 },
    /// `Σ (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})`, grouped into even and
    /// odd bonds.
    HeisenbergChain { n: usize },
    /// `-Σ (J Z_{i-1} X_i Z_{i+1} + V X_i X_{i+1} + h X_i)`.
    ClusterSpt {
        n: usize,
        j: f64,
        v: f64,
        h: f64,
        grouping: Grouping,
    },
    /// `-Σ (Z_{i-1} X_i Z_{i+1} + Y_i)`.
    ZxzField { n: usize, grouping: Grouping },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::XyChain { .. } => "xy_chain",
            Model::PowerlawHeisenberg { .. } => "powerlaw_heisenberg",
            Model::IsingTl { .. } => "ising_tl",
            Model::HeisenbergChain { .. } => "heisenberg_chain",
            Model::ClusterSpt { .. } => "cluster_spt",
            Model::ZxzField { .. } => "zxz_field",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Model::XyChain { n, .. }
            | Model::PowerlawHeisenberg { n, .. }
            | Model::IsingTl { n, .. }
            | Model::HeisenbergChain { n }
            | Model::ClusterSpt { n, .. }
            | Model::ZxzField { n, .. } => n,
        }
    }

    /// Numeric parameters in a fixed order (grouping reported as 1 or 3).
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        let g = |g: &Grouping| match g {
            Grouping::Single => 1.0,
            Grouping::Sublattice => 3.0,
        };
        match self {
            Model::XyChain { h, .. } => vec![("h", *h)],
            Model::PowerlawHeisenberg { alpha, .. } => vec![("alpha", *alpha)],
            Model::IsingTl { mu, lambda, .. } => vec![("mu", *mu), ("lambda", *lambda)],
            Model::HeisenbergChain { .. } => vec![],
            Model::ClusterSpt {
                j, v, h, grouping, ..
            } => vec![("j", *j), ("v", *v), ("h", *h), ("groups", g(grouping))],
            Model::ZxzField { grouping, .. } => vec![("groups", g(grouping))],
        }
    }

    pub fn min_qubits(&self) -> usize {
        match self {
            Model::ClusterSpt { .. } | Model::ZxzField { .. } => 3,
            _ => 2,
        }
    }

    /// Builds the grouped Hamiltonian.
    pub fn build(&self) -> Result<HamiltonianSpec> {
        let n = self.n();
        if n < self.min_qubits() {
            return Err(Error::param(
                "n",
                format!("{} needs n >= {}, got {n}", self.name(), self.min_qubits()),
            ));
        }
        let groups = match *self {
            Model::XyChain { h, .. } => {
                let mut a = Builder::new(n);
                let mut b = Builder::new(n);
                for i in 0..n - 1 {
                    a.add(&[(i, Pauli::X), (i + 1, Pauli::X)], 1.0)?;
                    b.add(&[(i, Pauli::Y), (i + 1, Pauli::Y)], 1.0)?;
                }
                for i in 0..n {
                    a.add(&[(i, Pauli::X)], h)?;
                }
                vec![a.finish("A"), b.finish("B")]
            }
            Model::PowerlawHeisenberg { alpha, .. } => {
                if !(alpha >= 0.0) {
                    return Err(Error::param("alpha", "must be non-negative"));
                }
                let mut out = Vec::new();
                for (p, name) in [(Pauli::X, "H_X"), (Pauli::Y, "H_Y"), (Pauli::Z, "H_Z")] {
                    let mut g = Builder::new(n);
                    for j in 0..n {
                        for i in j + 1..n {
                            let c = 1.0 / ((i - j) as f64).powf(alpha);
                            g.add(&[(j, p), (i, p)], c)?;
                        }
                    }
                    out.push(g.finish(name));
                }
                out
            }
            Model::IsingTl { mu, lambda, .. } => {
                let mut a = Builder::new(n);
                let mut b = Builder::new(n);
                for i in 0..n {
                    a.add(&[(i, Pauli::X), ((i + 1) % n, Pauli::X)], 1.0)?;
                }
                for i in 0..n {
                    a.add(&[(i, Pauli::X)], mu)?;
                    b.add(&[(i, Pauli::Z)], lambda)?;
                }
                vec![a.finish("A"), b.finish("B")]
            }
            Model::HeisenbergChain { .. } => {
                let mut even = Builder::new(n);
                let mut odd = Builder::new(n);
                for i in 0..n {
                    let g = if i % 2 == 0 { &mut even } else { &mut odd };
                    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                        g.add(&[(i, p), ((i + 1) % n, p)], 1.0)?;
                    }
                }
                vec![even.finish("even"), odd.finish("odd")]
            }
            Model::ClusterSpt {
                j, v, h, grouping, ..
            } => {
                let mut blocks = Blocks::new(n, grouping);
                for i in 0..n {
                    let g = blocks.at(i);
                    g.add(&[((i + n - 1) % n, Pauli::Z), (i, Pauli::X), ((i + 1) % n, Pauli::Z)], -j)?;
                    g.add(&[(i, Pauli::X), ((i + 1) % n, Pauli::X)], -v)?;
                    g.add(&[(i, Pauli::X)], -h)?;
                }
                blocks.finish()
            }
            Model::ZxzField { grouping, .. } => {
                let mut blocks = Blocks::new(n, grouping);
                for i in 0..n {
                    let g = blocks.at(i);
                    g.add(&[((i + n - 1) % n, Pauli::Z), (i, Pauli::X), ((i + 1) % n, Pauli::Z)], -1.0)?;
                    g.add(&[(i, Pauli::Y)], -1.0)?;
                }
                blocks.finish()
            }
        };
        Ok(HamiltonianSpec::new(n, groups)?.with_model(self.clone()))
    }
}

/// Builds a model from its id and a parameter map.
///
/// | id | parameters |
/// |----|------------|
/// | `xy_chain` | `n`, `h` |
/// | `powerlaw_heisenberg` | `n`, `alpha` |
/// | `ising_tl` | `n`, `mu`, `lambda` |
/// | `heisenberg_chain` | `n` |
/// | `cluster_spt` | `n`, `j`, `v`, `h`, optional `groups` (1 or 3, default 3) |
/// | `zxz_field` | `n`, optional `groups` (1 or 3, default 3) |
pub fn build_model(name: &str, params: &BTreeMap<String, f64>) -> Result<HamiltonianSpec> {
    parse_model(name, params)?.build()
}

fn parse_model(name: &str, params: &BTreeMap<String, f64>) -> Result<Model> {
    let allowed: &[&str] = match name {
        "xy_chain" => &["n", "h"],
        "powerlaw_heisenberg" => &["n", "alpha"],
        "ising_tl" => &["n", "mu", "lambda"],
        "heisenberg_chain" => &["n"],
        "cluster_spt" => &["n", "j", "v", "h", "groups"],
        "zxz_field" => &["n", "groups"],
        _ => return Err(Error::UnknownModel(name.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::param("params", format!("`{k}` is not a parameter of {name}")));
    }
    let get = |key: &'static str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::param(key, format!("required by {name}")))
    };
    let n = {
        let x = get("n")?;
        if !(x >= 1.0) || x.fract() != 0.0 {
            return Err(Error::param("n", "must be a positive integer"));
        }
        x as usize
    };
    let grouping = || -> Result<Grouping> {
        match params.get("groups").copied() {
            None => Ok(Grouping::Sublattice),
            Some(3.0) => Ok(Grouping::Sublattice),
            Some(1.0) => Ok(Grouping::Single),
            Some(_) => Err(Error::param("groups", "must be 1 or 3")),
        }
    };
    Ok(match name {
        "xy_chain" => Model::XyChain { n, h: get("h")? },
        "powerlaw_heisenberg" => Model::PowerlawHeisenberg {
            n,
            alpha: get("alpha")?,
        },
        "ising_tl" => Model::IsingTl {
            n,
            mu: get("mu")?,
            lambda: get("lambda")?,
        },
        "heisenberg_chain" => Model::HeisenbergChain { n },
        "cluster_spt" => Model::ClusterSpt {
            n,
            j: get("j")?,
            v: get("v")?,
            h: get("h")?,
            grouping: grouping()?,
        },
        _ => Model::ZxzField {
            n,
            grouping: grouping()?,
        },
    })
}

/// Accumulates terms of one group, merging repeated strings.
struct Builder {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { n, terms: Vec::new() }
    }

    fn add(&mut self, ops: &[(usize, Pauli)], c: f64) -> Result<()> {
        if c == 0.0 {
            return Ok(());
        }
        if !c.is_finite() {
            return Err(Error::param("coefficient", "must be finite"));
        }
        let s = PauliString::on_sites(self.n, ops)?;
        if let Some(t) = self.terms.iter_mut().find(|t| t.string == s) {
            t.coefficient += c;
        } else {
            self.terms.push(PauliTerm::new(s, c)?);
        }
        Ok(())
    }

    fn finish(self, name: &str) -> TermGroup {
        TermGroup {
            name: name.to_string(),
            terms: self.terms,
        }
    }
}

struct Blocks {
    grouping: Grouping,
    parts: Vec<Builder>,
}

impl Blocks {
    fn new(n: usize, grouping: Grouping) -> Self {
        let count = match grouping {
            Grouping::Single => 1,
            Grouping::Sublattice => 3,
        };
        Blocks {
            grouping,
            parts: (0..count).map(|_| Builder::new(n)).collect(),
        }
    }

    fn at(&mut self, site: usize) -> &mut Builder {
        match self.grouping {
            Grouping::Single => &mut self.parts[0],
            Grouping::Sublattice => &mut self.parts[site % 3],
        }
    }

    fn finish(self) -> Vec<TermGroup> {
        match self.grouping {
            Grouping::Single => self.parts.into_iter().map(|b| b.finish("H")).collect(),
            Grouping::Sublattice => self
                .parts
                .into_iter()
                .enumerate()
                .map(|(r, b)| b.finish(&format!("s{r}")))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, Matrix};
    use crate::pauli::group_weight_squares;

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn xy_chain_counts_and_weights() {
        let spec = build_model("xy_chain", &params(&[("n", 6.0), ("h", 1.0)])).unwrap();
        assert_eq!(spec.group(0).terms.len(), 11);
        assert_eq!(spec.group(1).terms.len(), 5);
        assert_eq!(group_weight_squares(&spec).unwrap(), vec![11.0, 5.0]);
    }

    #[test]
    fn two_site_heisenberg() {
        let spec = build_model("powerlaw_heisenberg", &params(&[("n", 2.0), ("alpha", 0.0)])).unwrap();
        let strings: Vec<String> = spec.terms().map(|t| format!("{}", t.string)).collect();
        assert_eq!(strings, vec!["XX", "YY", "ZZ"]);
    }

    #[test]
    fn powerlaw_weights() {
        let spec = build_model("powerlaw_heisenberg", &params(&[("n", 3.0), ("alpha", 1.0)])).unwrap();
        for w in group_weight_squares(&spec).unwrap() {
            assert!((w - 2.25).abs() < 1e-15);
        }
    }

    #[test]
    fn ising_without_fields() {
        let spec = build_model("ising_tl", &params(&[("n", 5.0), ("mu", 0.0), ("lambda", 0.0)])).unwrap();
        assert_eq!(spec.group(0).terms.len(), 5);
        assert!(spec.group(1).terms.is_empty());
        assert_eq!(format!("{}", spec.group(0).terms[4].string), "XIIIX");
    }

    #[test]
    fn xy_two_site_spectrum() {
        let spec = build_model("xy_chain", &params(&[("n", 2.0), ("h", 0.0)])).unwrap();
        let e = hermitian_eigen(&spec.dense().unwrap()).unwrap();
        for (got, want) in e.values.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(build_model("nope", &params(&[("n", 4.0)])), Err(Error::UnknownModel(_))));
        assert!(build_model("xy_chain", &params(&[("n", 1.0), ("h", 1.0)])).is_err());
        assert!(build_model("powerlaw_heisenberg", &params(&[("n", 4.0), ("alpha", -1.0)])).is_err());
        assert!(build_model("zxz_field", &params(&[("n", 2.0)])).is_err());
        assert!(build_model("xy_chain", &params(&[("n", 4.0), ("h", 1.0), ("mu", 1.0)])).is_err());
    }

    #[test]
    fn dense_is_sum_of_groups() {
        for (name, p) in [
            ("cluster_spt", params(&[("n", 6.0), ("j", 1.0), ("v", -1.0), ("h", 1.0)])),
            ("zxz_field", params(&[("n", 6.0)])),
            ("powerlaw_heisenberg", params(&[("n", 4.0), ("alpha", 1.5)])),
        ] {
            let spec = build_model(name, &p).unwrap();
            let mut sum = Matrix::zeros(spec.dim(), spec.dim());
            for g in spec.groups_dense().unwrap() {
                sum += &g;
            }
            let h = spec.dense().unwrap();
            assert!((&sum - &h).frobenius_norm() < 1e-12);
            assert!(h.hermiticity_residual() < 1e-14);
        }
    }

    #[test]
    fn single_and_sublattice_groupings_agree() {
        let one = build_model("cluster_spt", &params(&[("n", 6.0), ("j", 1.0), ("v", -1.0), ("h", 1.0), ("groups", 1.0)])).unwrap();
        let three = build_model("cluster_spt", &params(&[("n", 6.0), ("j", 1.0), ("v", -1.0), ("h", 1.0)])).unwrap();
        assert_eq!(one.num_groups(), 1);
        assert_eq!(three.num_groups(), 3);
        assert!((&one.dense().unwrap() - &three.dense().unwrap()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn provenance_echoes_terms() {
        let spec = build_model("ising_tl", &params(&[("n", 3.0), ("mu", 2.0), ("lambda", 0.5)])).unwrap();
        let doc = spec.provenance();
        assert!(doc.starts_with("model = \"ising_tl\"\nmu = 2\nlambda = 0.5\nn = 3\n"));
        assert!(doc.contains("ZII +5.00000000000000000e-1"));
    }
}
