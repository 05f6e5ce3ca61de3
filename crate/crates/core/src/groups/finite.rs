use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite group given by an explicit, validated multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct FiniteGroup {
    table: Vec<Vec<u32>>,
    identity: u32,
    inverses: Vec<u32>,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses exhaustively.
    pub fn from_table(table: Vec<Vec<u32>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {i} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&v| v as usize >= n) {
                return Err(Error::InvalidTable(format!("entry {bad} in row {i} out of range")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] as usize == x && table[x][e] as usize == x))
            .ok_or_else(|| Error::InvalidTable("no two-sided identity".into()))?
            as u32;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b] as usize;
                for c in 0..n {
                    let bc = table[b][c] as usize;
                    if table[ab][c] != table[a][bc] {
                        return Err(Error::InvalidTable(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {a} has no inverse")))?;
            inverses.push(inv as u32);
        }
        Ok(FiniteGroup {
            table,
            identity,
            inverses,
        })
    }

    /// ℤ/n with addition.
    pub fn cyclic(n: u32) -> Self {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::from_table(table).expect("cyclic table is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize][b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as usize) < self.table.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.table.len() as u32
    }

    pub fn table(&self) -> &[Vec<u32>] {
        &self.table
    }
}

impl TryFrom<Vec<Vec<u32>>> for FiniteGroup {
    type Error = Error;

    fn try_from(table: Vec<Vec<u32>>) -> Result<Self> {
        FiniteGroup::from_table(table)
    }
}

impl From<FiniteGroup> for Vec<Vec<u32>> {
    fn from(g: FiniteGroup) -> Self {
        g.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_tables_validate() {
        let z3 = FiniteGroup::cyclic(3);
        assert_eq!(z3.mul(2, 2), 1);
        assert_eq!(z3.inv(1), 2);
        assert_eq!(z3.identity(), 0);
    }

    #[test]
    fn rejects_non_associative_table() {
        // A Latin square with identity 0 that is not associative.
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table(t), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn rejects_missing_identity() {
        let t = vec![vec![1, 0], vec![1, 0]];
        assert!(FiniteGroup::from_table(t).is_err());
    }
}
