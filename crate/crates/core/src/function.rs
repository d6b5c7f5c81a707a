use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// A real-valued function on the vertices `0..n` of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Directed gradient ∇_{xy} f = f(y) − f(x).
    #[inline]
    pub fn gradient(&self, x: usize, y: usize) -> f64 {
        self.0[y] - self.0[x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Checks that the function lives on `g` and is finite everywhere.
    pub fn check_domain(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.num_vertices() {
            return Err(Error::DomainMismatch {
                expected: g.num_vertices(),
                found: self.len(),
            });
        }
        if let Some(vertex) = self.0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { vertex });
        }
        Ok(())
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.0.iter().position(|&v| v < 0.0) {
            Some(vertex) => Err(Error::NegativeValue {
                vertex,
                value: self.0[vertex],
            }),
            None => Ok(()),
        }
    }
}

impl Index<usize> for VertexFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for VertexFunction {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
