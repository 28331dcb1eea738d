//! Lattice files: `{"dim": n, "basis": [[...], ...]}`, rows are basis vectors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Lattice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

impl LatticeFile {
    pub fn from_lattice(l: &Lattice<f64>) -> Self {
        Self {
            dim: l.dim(),
            basis: l.basis().clone(),
        }
    }

    pub fn into_lattice(self) -> Result<Lattice<f64>> {
        if self.basis.len() != self.dim {
            return Err(Error::Parse(format!(
                "field `basis`: {} rows but dim = {}",
                self.basis.len(),
                self.dim
            )));
        }
        for (i, row) in self.basis.iter().enumerate() {
            if row.len() != self.dim {
                return Err(Error::Parse(format!(
                    "field `basis`: row {i} has {} entries but dim = {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        Lattice::new(self.basis)
    }
}

pub fn parse_lattice(text: &str) -> Result<Lattice<f64>> {
    let file: LatticeFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_lattice()
}

pub fn read_lattice(path: &Path) -> Result<Lattice<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_lattice(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_json(l: &Lattice<f64>) -> String {
    serde_json::to_string_pretty(&LatticeFile::from_lattice(l)).expect("lattice serialises")
}

pub fn write_lattice(path: &Path, l: &Lattice<f64>) -> Result<()> {
    std::fs::write(path, to_json(l) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_basis_is_named() {
        let err = parse_lattice(r#"{"dim": 2}"#).unwrap_err();
        assert!(err.to_string().contains("basis"), "{err}");
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_lattice(r#"{"dim": 2, "basis": [[1, 0], [0]]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let l = Lattice::new(vec![vec![0.1, 1.0 / 3.0], vec![std::f64::consts::PI, 1e-7]]).unwrap();
        let back = parse_lattice(&to_json(&l)).unwrap();
        for (a, b) in l.basis().iter().flatten().zip(back.basis().iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
