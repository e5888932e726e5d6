//! Observable dictionaries. The span must contain the constant function and
//! every coordinate function so the full-state observable can be
//! reconstructed from the fitted operator.

use serde::{Deserialize, Serialize};

use super::EdmdError;

/// A finite ordered family of scalar observables.
///
/// `TensorHermite` takes products `He_i(x_1) ... He_k(x_n)` of probabilists'
/// Hermite polynomials up to per-axis degree `degree`, in lexicographic
/// multi-index order, giving `(degree + 1)^n` entries. `Monomial` takes all
/// monomials of total degree up to `degree` in graded order, coordinates
/// first within each degree block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dictionary {
    TensorHermite { degree: usize, state_dim: usize },
    Monomial { degree: usize, state_dim: usize },
}

impl Dictionary {
    pub fn tensor_hermite(degree: usize, state_dim: usize) -> Self {
        Dictionary::TensorHermite { degree, state_dim }
    }

    pub fn monomial(degree: usize, state_dim: usize) -> Self {
        Dictionary::Monomial { degree, state_dim }
    }

    pub fn state_dim(&self) -> usize {
        match *self {
            Dictionary::TensorHermite { state_dim, .. } => state_dim,
            Dictionary::Monomial { state_dim, .. } => state_dim,
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            Dictionary::TensorHermite { degree, state_dim } => (degree + 1).pow(state_dim as u32),
            Dictionary::Monomial { degree, state_dim } => {
                monomial_exponents(degree, state_dim).len()
            }
        }
    }

    /// Index of each coordinate function within the dictionary, if the
    /// coordinates are members (requires degree >= 1).
    pub fn coordinate_indices(&self) -> Option<Vec<usize>> {
        match *self {
            Dictionary::TensorHermite { degree, state_dim } => {
                if degree < 1 {
                    return None;
                }
                // He_1(t) = t, so coordinate j is the multi-index e_j.
                Some(
                    (0..state_dim)
                        .map(|j| (degree + 1).pow((state_dim - 1 - j) as u32))
                        .collect(),
                )
            }
            Dictionary::Monomial { degree, state_dim } => {
                if degree < 1 {
                    return None;
                }
                Some((0..state_dim).map(|j| 1 + j).collect())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EdmdError> {
        let mut out = vec![0.0; self.size()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), EdmdError> {
        if x.len() != self.state_dim() {
            return Err(EdmdError::DimensionMismatch {
                expected: self.state_dim(),
                got: x.len(),
            });
        }
        debug_assert_eq!(out.len(), self.size());
        match *self {
            Dictionary::TensorHermite { degree, state_dim } => {
                // Per-axis Hermite values, then the tensor product as a
                // mixed-radix counter over multi-indices.
                let d1 = degree + 1;
                let mut he = vec![0.0; state_dim * d1];
                for (axis, &t) in x.iter().enumerate() {
                    hermite_values(t, &mut he[axis * d1..(axis + 1) * d1]);
                }
                for (flat, slot) in out.iter_mut().enumerate() {
                    let mut rem = flat;
                    let mut prod = 1.0;
                    for axis in (0..state_dim).rev() {
                        let idx = rem % d1;
                        rem /= d1;
                        prod *= he[axis * d1 + idx];
                    }
                    *slot = prod;
                }
            }
            Dictionary::Monomial { degree, state_dim } => {
                let exps = monomial_exponents(degree, state_dim);
                for (slot, e) in out.iter_mut().zip(exps.iter()) {
                    let mut prod = 1.0;
                    for (axis, &p) in e.iter().enumerate() {
                        if p > 0 {
                            prod *= x[axis].powi(p as i32);
                        }
                    }
                    *slot = prod;
                }
            }
        }
        Ok(())
    }
}

/// Probabilists' Hermite polynomials `He_0..He_d` at `t`, via the recurrence
/// `He_{k+1}(t) = t He_k(t) - k He_{k-1}(t)`.
pub fn hermite_values(t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = t * out[k] - k as f64 * out[k - 1];
    }
}

/// Exponent vectors of total degree <= `degree`, graded, coordinates first
/// within each block (x1 before x2 before ...).
fn monomial_exponents(degree: usize, state_dim: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut current = vec![0u32; state_dim];
        emit_block(total as u32, 0, &mut current, &mut out);
    }
    out
}

fn emit_block(remaining: u32, axis: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(current.clone());
        current[axis] = 0;
        return;
    }
    // Descending exponent on the leading axis puts x1 ahead of x2.
    for e in (0..=remaining).rev() {
        current[axis] = e;
        emit_block(remaining - e, axis + 1, current, out);
        current[axis] = 0;
    }
}
