use serde::Serialize;

use crate::error::{domain, Result};
use crate::loopsoup::{cle_from_soup, sample_cle, thin_soup, CleConfig};
use crate::params::{carpet_dimension, kappa_from_intensity};

use super::xi::{estimate_xi, CarpetMeasure, XiConfig};

/// One level `c_n` of the coupled sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingLevel {
    pub c: f64,
    pub kappa: f64,
    pub d: f64,
    pub carpet_cells: usize,
    pub total: f64,
    pub measure: CarpetMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub levels: Vec<CouplingLevel>,
    /// Cells in the carpet of a level but not of the previous one; zero under the coupling.
    pub monotonicity_violations: usize,
}

impl CouplingReport {
    /// The κ = 4 estimate (last level).
    pub fn limit(&self) -> &CarpetMeasure {
        &self.levels.last().expect("at least one level").measure
    }
}

/// One soup at `c = 1`, thinned to each `c_n`; Ξ^{κ_n} per level with `κ_n = κ(c_n)`.
///
/// `grid_config.kappa` is ignored: the soup is always sampled at κ = 4. Level measures use
/// the same Ξ seed, so a one-level sequence `(1)` reproduces a direct κ = 4 run.
pub fn cle4_measure_via_coupling(
    c_sequence: &[f64],
    grid_config: &CleConfig,
    xi: &XiConfig,
    seed: u64,
) -> Result<CouplingReport> {
    if c_sequence.is_empty() {
        return Err(domain("c_sequence", f64::NAN, "non-empty, increasing, ending at 1"));
    }
    for w in c_sequence.windows(2) {
        if !(w[1] > w[0]) {
            return Err(domain("c_sequence", w[1], "strictly increasing"));
        }
    }
    let last = c_sequence[c_sequence.len() - 1];
    if last != 1.0 || !(c_sequence[0] > 0.0) {
        return Err(domain("c_sequence", last, "values in (0, 1] ending at 1"));
    }
    let config = CleConfig {
        kappa: 4.0,
        ..*grid_config
    };
    let (soup, _) = sample_cle(&config, seed)?;
    let mut levels: Vec<CouplingLevel> = Vec::with_capacity(c_sequence.len());
    let mut violations = 0;
    let mut previous: Option<Vec<bool>> = None;
    for &c in c_sequence {
        let kappa = kappa_from_intensity(c)?;
        let thinned = thin_soup(&soup, c, seed)?;
        let cle = cle_from_soup(&thinned, kappa, config.grid);
        if let Some(prev) = &previous {
            violations += cle.carpet.cells.iter().zip(prev).filter(|(now, before)| **now && !**before).count();
        }
        previous = Some(cle.carpet.cells.clone());
        let measure = estimate_xi(&cle, xi, seed)?;
        levels.push(CouplingLevel {
            c,
            kappa,
            d: carpet_dimension(kappa)?,
            carpet_cells: cle.carpet.count(),
            total: measure.total(),
            measure,
        });
    }
    Ok(CouplingReport {
        levels,
        monotonicity_violations: violations,
    })
}
