//! Interaction expansion: one column per monomial of total degree `1..=ord`
//! in the base columns, in graded lexicographic order.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::data::ColMatrix;
use crate::error::{Error, Result};

// Expanded matrices beyond this many cells are refused.
const MAX_CELLS: usize = 1 << 30;

/// Number of monomials of degree `1..=ord` in `k` variables,
/// `C(k + ord, ord) - 1`, or `None` on overflow.
pub fn interaction_count(k: usize, ord: usize) -> Option<usize> {
    let mut c: u128 = 1;
    for i in 1..=ord as u128 {
        c = c.checked_mul(k as u128 + i)? / i;
    }
    usize::try_from(c - 1).ok()
}

/// Decode table of an expanded design: the base-column multiset of every
/// expanded column. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialTable {
    k: usize,
    monomials: Vec<Vec<usize>>,
    position: HashMap<Vec<usize>, usize>,
}

impl MonomialTable {
    /// All monomials of degree `1..=ord` in `k` variables.
    pub fn new(k: usize, ord: usize) -> Result<Self> {
        if ord == 0 {
            return Err(Error::domain("interaction order must be at least 1"));
        }
        if k == 0 {
            return Err(Error::domain("no base columns to expand"));
        }
        let count = interaction_count(k, ord).ok_or_else(|| Error::Size {
            count: format!("C({} + {ord}, {ord}) - 1", k),
        })?;
        let mut monomials: Vec<Vec<usize>> = Vec::with_capacity(count);
        monomials.extend((0..k).map(|j| vec![j]));
        let mut prev = 0..k;
        for _ in 2..=ord {
            let start = monomials.len();
            for p in prev.clone() {
                let last = *monomials[p].last().unwrap();
                for j in last..k {
                    let mut m = monomials[p].clone();
                    m.push(j);
                    monomials.push(m);
                }
            }
            prev = start..monomials.len();
        }
        debug_assert_eq!(monomials.len(), count);
        Ok(Self::from_monomials(k, monomials))
    }

    fn from_monomials(k: usize, monomials: Vec<Vec<usize>>) -> Self {
        let position = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Self {
            k,
            monomials,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Number of base columns.
    pub fn base_columns(&self) -> usize {
        self.k
    }

    /// Sorted base-column multiset of expanded column `column`.
    pub fn decode(&self, column: usize) -> Result<&[usize]> {
        self.monomials
            .get(column)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::domain(format!(
                    "expanded column {} out of range 1..={}",
                    column + 1,
                    self.len()
                ))
            })
    }

    /// Expanded column holding the given multiset (any order).
    pub fn encode(&self, multiset: &[usize]) -> Option<usize> {
        let mut key = multiset.to_vec();
        key.sort_unstable();
        self.position.get(&key).copied()
    }

    /// Text form: one line per expanded column with its base indices,
    /// 1-based and space separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.monomials {
            let line = m.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Parses the text form produced by [`MonomialTable::to_text`].
    pub fn from_text(text: &str, k: usize) -> Result<Self> {
        let mut monomials = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut m = Vec::new();
            for (col, tok) in line.split_whitespace().enumerate() {
                let j: usize = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    column: col + 1,
                    message: format!("'{tok}' is not a column index"),
                })?;
                if j == 0 || j > k {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        column: col + 1,
                        message: format!("index {j} out of range 1..={k}"),
                    });
                }
                m.push(j - 1);
            }
            if m.is_empty() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: "empty monomial".into(),
                });
            }
            m.sort_unstable();
            monomials.push(m);
        }
        Ok(Self::from_monomials(k, monomials))
    }

    /// Header-friendly name such as `x1*x2^2` built from base labels.
    pub fn name(&self, column: usize, labels: &[String]) -> Result<String> {
        let m = self.decode(column)?;
        let mut parts = Vec::new();
        let mut i = 0;
        while i < m.len() {
            let run = m[i..].iter().take_while(|&&v| v == m[i]).count();
            let base = &labels[m[i]];
            parts.push(if run == 1 {
                base.clone()
            } else {
                format!("{base}^{run}")
            });
            i += run;
        }
        Ok(parts.join("*"))
    }
}

/// Expands `x` to all monomials of degree `1..=ord`.
pub fn gen_interactions(x: &ColMatrix, ord: usize) -> Result<(ColMatrix, MonomialTable)> {
    let k = x.ncols();
    let count = interaction_count(k, ord).ok_or_else(|| Error::Size {
        count: format!("C({k} + {ord}, {ord}) - 1"),
    })?;
    let n = x.nrows();
    if n.checked_mul(count).is_none_or(|cells| cells > MAX_CELLS) {
        return Err(Error::Size {
            count: count.to_string(),
        });
    }
    let table = MonomialTable::new(k, ord)?;
    let mut data = Vec::with_capacity(n * count);
    for m in &table.monomials {
        if m.len() == 1 {
            data.extend_from_slice(x.col(m[0]));
        } else {
            // The parent monomial (last factor dropped) precedes m.
            let parent = table.position[&m[..m.len() - 1]];
            let last = x.col(*m.last().unwrap());
            let start = parent * n;
            for i in 0..n {
                data.push(data[start + i] * last[i]);
            }
        }
    }
    Ok((ColMatrix::from_col_major(n, count, data)?, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_variables_degree_two() {
        let x = ColMatrix::from_columns(&[vec![2.0, 3.0, 1.0], vec![5.0, 7.0, -1.0]]).unwrap();
        let (e, t) = gen_interactions(&x, 2).unwrap();
        assert_eq!(e.ncols(), 5);
        assert_eq!(t.decode(0).unwrap(), &[0]);
        assert_eq!(t.decode(1).unwrap(), &[1]);
        assert_eq!(t.decode(2).unwrap(), &[0, 0]);
        assert_eq!(t.decode(3).unwrap(), &[0, 1]);
        assert_eq!(t.decode(4).unwrap(), &[1, 1]);
        assert_eq!(e.col(2), &[4.0, 9.0, 1.0]);
        assert_eq!(e.col(3), &[10.0, 21.0, -1.0]);
        assert_eq!(e.col(4), &[25.0, 49.0, 1.0]);
        assert!(t.decode(5).is_err());
    }

    #[test]
    fn single_variable_powers() {
        let x = ColMatrix::from_columns(&[vec![2.0, -1.0, 0.5]]).unwrap();
        let (e, _) = gen_interactions(&x, 3).unwrap();
        assert_eq!(e.ncols(), 3);
        assert_eq!(e.col(2), &[8.0, -1.0, 0.125]);
    }

    #[test]
    fn counts_and_limits() {
        assert_eq!(interaction_count(13, 7), Some(77_519));
        assert_eq!(interaction_count(2, 2), Some(5));
        assert_eq!(interaction_count(usize::MAX / 2, 40), None);
        assert!(MonomialTable::new(3, 0).is_err());
        let x = ColMatrix::from_columns(&vec![vec![1.0; 4]; 200]).unwrap();
        assert!(matches!(gen_interactions(&x, 8), Err(Error::Size { .. })));
    }

    #[test]
    fn text_round_trip_and_names() {
        let t = MonomialTable::new(3, 3).unwrap();
        let back = MonomialTable::from_text(&t.to_text(), 3).unwrap();
        assert_eq!(t, back);
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let col = t.encode(&[2, 0, 0]).unwrap();
        assert_eq!(t.name(col, &labels).unwrap(), "a^2*c");
        assert!(MonomialTable::from_text("1 4\n", 3).is_err());
    }
}
