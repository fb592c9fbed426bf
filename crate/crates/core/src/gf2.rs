//! Dense linear algebra over GF(2).

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<bool>>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![vec![false; cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = true;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<bool>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        BitMatrix { rows: rows.len(), cols, data: rows }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r][c] = v;
    }

    pub fn row(&self, r: usize) -> &[bool] {
        &self.data[r]
    }

    pub fn mul_vec(&self, v: &[bool]) -> Vec<bool> {
        assert_eq!(v.len(), self.cols);
        self.data.iter().map(|row| row.iter().zip(v).fold(false, |acc, (a, b)| acc ^ (a & b))).collect()
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k] {
                    for j in 0..other.cols {
                        out.data[i][j] ^= other.data[k][j];
                    }
                }
            }
        }
        out
    }

    fn xor_row(&mut self, dst: usize, src: usize) {
        for c in 0..self.cols {
            let v = self.data[src][c];
            self.data[dst][c] ^= v;
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.data[i][c]) else { continue };
            self.data.swap(r, p);
            for i in 0..self.rows {
                if i != r && self.data[i][c] {
                    self.xor_row(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Some solution `x` of `self · x = b`.
    pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.data[i][..self.cols].copy_from_slice(&self.data[i]);
            aug.data[i][self.cols] = b[i];
        }
        let pivots = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = aug.data[i][self.cols];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<BitMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = BitMatrix::zeros(n, 2 * n);
        for i in 0..n {
            aug.data[i][..n].copy_from_slice(&self.data[i]);
            aug.data[i][n + i] = true;
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(BitMatrix::from_rows(aug.data.into_iter().map(|r| r[n..].to_vec()).collect()))
    }

    /// Basis of the right null space.
    pub fn nullspace(&self) -> Vec<Vec<bool>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![false; self.cols];
                v[f] = true;
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = m.data[i][f];
                }
                v
            })
            .collect()
    }
}
