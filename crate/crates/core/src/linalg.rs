//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::number::Rat;

/// Dense rational matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul_vec(&self, x: &[Rat]) -> Vec<Rat> {
        (0..self.rows)
            .map(|r| {
                let mut acc = Rat::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !x[c].is_zero() {
                        acc += a * &x[c];
                    }
                }
                acc
            })
            .collect()
    }

    /// Row echelon reduction in place; returns pivot columns.
    fn eliminate(&mut self, rhs: &mut [Rat]) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
                rhs.swap(p, row);
            }
            let inv = self.get(row, col).recip();
            for c in col..self.cols {
                let v = self.get(row, c) * &inv;
                self.set(row, c, v);
            }
            rhs[row] = &rhs[row] * &inv;
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let sub = &factor * self.get(row, c);
                    if !sub.is_zero() {
                        let v = self.get(r, c) - sub;
                        self.set(r, c, v);
                    }
                }
                let sub = &factor * &rhs[row];
                rhs[r] = &rhs[r] - sub;
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut copy = self.clone();
        let mut rhs = vec![Rat::zero(); self.rows];
        copy.eliminate(&mut rhs).len()
    }

    /// Unique solution of a square nonsingular system, or `None`.
    pub fn solve(&self, rhs: &[Rat]) -> Option<Vec<Rat>> {
        if !self.is_square() || rhs.len() != self.rows {
            return None;
        }
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let pivots = a.eliminate(&mut b);
        if pivots.len() != self.cols {
            return None;
        }
        debug_assert!((0..self.rows).all(|r| a.get(r, r).is_one()));
        Some(b)
    }
}
