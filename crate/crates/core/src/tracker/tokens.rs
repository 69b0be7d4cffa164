use ndarray::Array2;

use crate::error::{Error, Result};

/// `n x d` token matrix laid out on a `rows x cols` spatial grid (row-major, `rows * cols == n`).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSeq {
    tokens: Array2<f64>,
    rows: usize,
    cols: usize,
}

impl TokenSeq {
    pub fn new(tokens: Array2<f64>, rows: usize, cols: usize) -> Result<Self> {
        let (n, d) = tokens.dim();
        if n == 0 || d == 0 {
            return Err(Error::Shape(format!("token sequence must be non-empty, got {n}x{d}")));
        }
        if rows * cols != n {
            return Err(Error::Shape(format!(
                "layout {rows}x{cols} does not hold {n} tokens"
            )));
        }
        if tokens.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("token sequence contains non-finite entries".into()));
        }
        Ok(TokenSeq {
            tokens: tokens.as_standard_layout().into_owned(),
            rows,
            cols,
        })
    }

    /// Tokens on a single row.
    pub fn from_rows(tokens: Array2<f64>) -> Result<Self> {
        let n = tokens.nrows();
        Self::new(tokens, 1, n)
    }

    pub fn tokens(&self) -> &Array2<f64> {
        &self.tokens
    }

    pub fn into_tokens(self) -> Array2<f64> {
        self.tokens
    }

    pub fn n(&self) -> usize {
        self.tokens.nrows()
    }

    pub fn d(&self) -> usize {
        self.tokens.ncols()
    }

    pub fn layout(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_layout_and_values() {
        assert!(TokenSeq::new(Array2::zeros((6, 2)), 2, 3).is_ok());
        assert!(matches!(TokenSeq::new(Array2::zeros((6, 2)), 2, 2), Err(Error::Shape(_))));
        assert!(matches!(TokenSeq::new(Array2::zeros((0, 2)), 0, 0), Err(Error::Shape(_))));
        let mut bad = Array2::zeros((1, 1));
        bad[[0, 0]] = f64::INFINITY;
        assert!(matches!(TokenSeq::new(bad, 1, 1), Err(Error::Numeric(_))));
    }
}
