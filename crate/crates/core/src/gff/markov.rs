use serde::Serialize;

use super::field::GffSample;
use super::laplace::LaplaceFactor;
use crate::error::{Error, Result};

/// `field = zero_part + remainder`, with `remainder` discrete harmonic on `U` and equal
/// to the field elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovDecomposition {
    pub zero_part: GffSample,
    pub remainder: GffSample,
    /// Largest `|Δ remainder|` over the vertices of `U`.
    pub max_residual: f64,
}

/// Splits `field` on the vertex set `u` into its harmonic extension from `∂U` and a
/// zero-boundary field on `U`.
pub fn markov_decompose(field: &GffSample, u: &[bool]) -> Result<MarkovDecomposition> {
    let lat = field.lattice;
    if u.len() != lat.n * lat.n {
        return Err(Error::Invalid(format!(
            "mask has {} entries for {} vertices",
            u.len(),
            lat.n * lat.n
        )));
    }
    let interior = lat.interior();
    if u.iter().zip(&interior).any(|(&a, &b)| a && !b) {
        return Err(Error::Invalid("U must lie strictly inside the domain".into()));
    }
    let factor = LaplaceFactor::new(lat.lattice(), u);
    let mut x: Vec<f64> = factor
        .vertices
        .iter()
        .map(|&v| {
            lat.lattice()
                .neighbors(v)
                .filter(|&w| !u[w])
                .map(|w| field.values[w])
                .sum()
        })
        .collect();
    factor.solve(&mut x);

    let mut rem = field.values.clone();
    let mut zero = vec![0.0; rem.len()];
    for (k, &v) in factor.vertices.iter().enumerate() {
        rem[v] = x[k];
        zero[v] = field.values[v] - x[k];
    }
    let max_residual = (0..factor.len())
        .map(|k| factor.apply_at(k, &x, &field.values).abs())
        .fold(0.0, f64::max);
    Ok(MarkovDecomposition {
        zero_part: GffSample {
            values: zero,
            shift: 0.0,
            ..field.clone()
        },
        remainder: GffSample {
            values: rem,
            ..field.clone()
        },
        max_residual,
    })
}

/// Interior vertices whose positions satisfy `pred`.
pub fn vertex_set(field: &GffSample, pred: impl Fn(num_complex::Complex64) -> bool) -> Vec<bool> {
    let lat = field.lattice;
    lat.interior()
        .iter()
        .enumerate()
        .map(|(v, &inside)| inside && pred(lat.position_of(v)))
        .collect()
}
