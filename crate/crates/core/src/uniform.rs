//! Opponent exploitation under a uniform prior over a polyhedron of mixed
//! strategies, represented by the polyhedron's vertices.
//!
//! Each vertex carries a weight. A sighting of action `a` multiplies every
//! vertex weight by that vertex's probability of playing `a`; the model we
//! respond to is the weight-averaged vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{check_distribution, OpponentStrategy};

/// Weighted vertex set over directly observed actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexPrior {
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl VertexPrior {
    /// Vertices with equal weight `1 / V`.
    pub fn uniform(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let v = vertices.len();
        Self::with_weights(vertices, vec![1.0 / v.max(1) as f64; v])
    }

    pub fn with_weights(vertices: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySupport);
        }
        if weights.len() != vertices.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} vertices",
                weights.len(),
                vertices.len()
            )));
        }
        let m = vertices[0].len();
        for (k, v) in vertices.iter().enumerate() {
            if v.len() != m {
                return Err(Error::Dimension(format!(
                    "vertex {k} has {} actions, expected {m}",
                    v.len()
                )));
            }
            check_distribution(v, &format!("vertex {k}"))?;
        }
        check_distribution(&weights, "vertex weights")?;
        Ok(Self { vertices, weights })
    }

    /// Parse a JSON list of strategy vectors; weights start uniform.
    pub fn from_json(s: &str) -> Result<Self> {
        let vertices: Vec<Vec<f64>> = serde_json::from_str(s)?;
        Self::uniform(vertices)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn renormalize(mut w: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ImpossibleObservations);
    }
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// Reweight the vertices after seeing `observed_action`.
pub fn vertex_posterior_update(vp: &VertexPrior, observed_action: usize) -> Result<VertexPrior> {
    let m = vp.vertices[0].len();
    if observed_action >= m {
        return Err(Error::Dimension(format!(
            "action {observed_action} out of range for {m} actions"
        )));
    }
    let w = vp
        .weights
        .iter()
        .zip(&vp.vertices)
        .map(|(p, v)| p * v[observed_action])
        .collect();
    Ok(VertexPrior {
        vertices: vp.vertices.clone(),
        weights: renormalize(w)?,
    })
}

/// Weight-averaged vertex.
pub fn vertex_mean(vp: &VertexPrior) -> Vec<f64> {
    let m = vp.vertices[0].len();
    let mut mean = vec![0.0; m];
    for (p, v) in vp.weights.iter().zip(&vp.vertices) {
        for (acc, x) in mean.iter_mut().zip(v) {
            *acc += p * x;
        }
    }
    mean
}

/// Extension to hidden private states: every vertex is a full conditional
/// strategy and a sighting of `a` has likelihood `sum_i pi_i v(a | i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVertexPrior {
    vertices: Vec<OpponentStrategy>,
    weights: Vec<f64>,
}

impl LatentVertexPrior {
    pub fn uniform(vertices: Vec<OpponentStrategy>) -> Result<Self> {
        let v = vertices.len();
        Self::with_weights(vertices, vec![1.0 / v.max(1) as f64; v])
    }

    pub fn with_weights(vertices: Vec<OpponentStrategy>, weights: Vec<f64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySupport);
        }
        if weights.len() != vertices.len() {
            return Err(Error::Dimension("one weight per vertex required".into()));
        }
        let (n, m) = (vertices[0].n_states(), vertices[0].n_actions());
        if vertices
            .iter()
            .any(|v| v.n_states() != n || v.n_actions() != m)
        {
            return Err(Error::Dimension("vertices differ in shape".into()));
        }
        check_distribution(&weights, "vertex weights")?;
        Ok(Self { vertices, weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn update(&self, pi: &[f64], observed_action: usize) -> Result<Self> {
        let w = self
            .weights
            .iter()
            .zip(&self.vertices)
            .map(|(p, v)| p * v.action_marginals(pi)[observed_action])
            .collect();
        Ok(Self {
            vertices: self.vertices.clone(),
            weights: renormalize(w)?,
        })
    }

    pub fn mean(&self) -> OpponentStrategy {
        let (n, m) = (self.vertices[0].n_states(), self.vertices[0].n_actions());
        let mut rows = vec![vec![0.0; m]; n];
        for (p, v) in self.weights.iter().zip(&self.vertices) {
            for (acc, row) in rows.iter_mut().zip(v.rows()) {
                for (a, x) in acc.iter_mut().zip(row) {
                    *a += p * x;
                }
            }
        }
        OpponentStrategy::new(rows).expect("convex combination of strategies")
    }
}
