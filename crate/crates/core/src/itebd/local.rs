//! Local Hamiltonian blocks of translationally invariant chains, one per
//! term group, placed on a window of the unit cell.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pauli::{to_dense, Grouping, Model, Pauli, PauliString, PauliTerm};

/// `h_g` acting on `width` consecutive sites starting at `offset` (mod the
/// cell size).
#[derive(Clone, Debug)]
pub struct LocalBlock {
    pub group: usize,
    pub offset: usize,
    pub matrix: Matrix,
}

#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    pub cell_size: usize,
    pub width: usize,
    /// Indexed by group.
    pub blocks: Vec<LocalBlock>,
}

impl LocalHamiltonian {
    pub fn num_groups(&self) -> usize {
        self.blocks.len()
    }
}

fn dense(width: usize, terms: &[(&[(usize, Pauli)], f64)]) -> Result<Matrix> {
    let mut out = Vec::new();
    for (ops, c) in terms {
        if *c != 0.0 {
            out.push(PauliTerm::new(PauliString::on_sites(width, ops)?, *c)?);
        }
    }
    to_dense(&out, width)
}

/// Local blocks for the chain models that iTEBD supports.
///
/// * `heisenberg_chain`: 2-site cell; group 0 is the bond (0,1), group 1 the
///   bond (1,2), each `XX + YY + ZZ`.
/// * `zxz_field`, `cluster_spt` with three groups: 3-site cell; group `g`
///   holds the terms anchored at site `g`, placed on sites `(g-1, g, g+1)`.
pub fn local_hamiltonian(model: &Model) -> Result<LocalHamiltonian> {
    use Pauli::{X, Y, Z};
    match *model {
        Model::HeisenbergChain { .. } => {
            let h = dense(
                2,
                &[(&[(0, X), (1, X)], 1.0), (&[(0, Y), (1, Y)], 1.0), (&[(0, Z), (1, Z)], 1.0)],
            )?;
            let blocks = (0..2)
                .map(|g| LocalBlock {
                    group: g,
                    offset: g,
                    matrix: h.clone(),
                })
                .collect();
            Ok(LocalHamiltonian {
                cell_size: 2,
                width: 2,
                blocks,
            })
        }
        Model::ZxzField { grouping, .. } => {
            require_sublattice(grouping)?;
            let h = dense(3, &[(&[(0, Z), (1, X), (2, Z)], -1.0), (&[(1, Y)], -1.0)])?;
            Ok(three_site(h))
        }
        Model::ClusterSpt {
            j, v, h, grouping, ..
        } => {
            require_sublattice(grouping)?;
            let m = dense(
                3,
                &[(&[(0, Z), (1, X), (2, Z)], -j), (&[(1, X), (2, X)], -v), (&[(1, X)], -h)],
            )?;
            Ok(three_site(m))
        }
        _ => Err(Error::param(
            "model",
            "iTEBD supports heisenberg_chain, zxz_field and cluster_spt",
        )),
    }
}

fn require_sublattice(grouping: Grouping) -> Result<()> {
    if grouping != Grouping::Sublattice {
        return Err(Error::param("groups", "3-site iTEBD needs groups = 3"));
    }
    Ok(())
}

fn three_site(h: Matrix) -> LocalHamiltonian {
    let blocks = (0..3)
        .map(|g| LocalBlock {
            group: g,
            offset: (g + 2) % 3,
            matrix: h.clone(),
        })
        .collect();
    LocalHamiltonian {
        cell_size: 3,
        width: 3,
        blocks,
    }
}
