use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairwiseKind {
    NemenyiP,
    RopeProb,
}

/// Symmetric algorithm × algorithm matrix with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseMatrix {
    pub kind: PairwiseKind,
    pub algorithms: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl PairwiseMatrix {
    /// Fills the upper triangle with `f(i, j)` and mirrors it.
    pub fn from_fn(
        kind: PairwiseKind,
        algorithms: Vec<String>,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let k = algorithms.len();
        let mut values = vec![vec![None; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let v = f(i, j);
                values[i][j] = Some(v);
                values[j][i] = Some(v);
            }
        }
        PairwiseMatrix {
            kind,
            algorithms,
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.algorithms.iter().position(|a| a == name)
    }

    pub fn get_by_name(&self, a: &str, b: &str) -> Option<f64> {
        self.get(self.index(a)?, self.index(b)?)
    }

    /// Reorders rows and columns to follow `order` (names must be a
    /// permutation of the current algorithms).
    pub fn reordered(&self, order: &[String]) -> Option<PairwiseMatrix> {
        let idx: Option<Vec<usize>> = order.iter().map(|n| self.index(n)).collect();
        let idx = idx?;
        if idx.len() != self.algorithms.len() {
            return None;
        }
        let values = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.values[i][j]).collect())
            .collect();
        Some(PairwiseMatrix {
            kind: self.kind,
            algorithms: order.to_vec(),
            values,
        })
    }
}
