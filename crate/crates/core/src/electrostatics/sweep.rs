use crate::error::{Error, Result};

use super::newton::{PoissonSolver, PotentialField};

/// Solves every bias in order, warm-starting each point from the previous
/// converged field. A point that fails to converge is kept (flagged) and the
/// next point starts from the last converged field instead.
pub fn bias_sweep(solver: &PoissonSolver, biases: &[f64]) -> Result<Vec<PotentialField>> {
    let ascending = biases.windows(2).all(|w| w[1] >= w[0]);
    let descending = biases.windows(2).all(|w| w[1] <= w[0]);
    if !(ascending || descending) {
        return Err(Error::Contract("sweep biases must be ordered".into()));
    }
    let mut fields: Vec<PotentialField> = Vec::with_capacity(biases.len());
    let mut last_good: Option<usize> = None;
    for &bias in biases {
        let guess = last_good.map(|k| &fields[k]);
        let field = solver.solve(bias, guess)?;
        if field.converged {
            last_good = Some(fields.len());
        }
        fields.push(field);
    }
    Ok(fields)
}
