//! Mass-action-kinetics networks: the polynomial vector field, its Jacobian,
//! and the analytic equilibrium structure of the bundled autocatalytic
//! replicator example.

use std::ops::Deref;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MakError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative concentration at component {index}: {value}")]
    NegativeConcentration { index: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state is not an equilibrium (rhs residual {residual:.3e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("sample lies on the simplex boundary (component {index} is zero)")]
    SampleOnBoundary { index: usize },
    #[error("network definition error: {0}")]
    NetworkDefinition(String),
}

/// Concentration vector. Components are nonnegative; for closed systems the
/// components sum to one, and for the reduced two-state replicator
/// `x1 + x2 <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(Vec<f64>);

impl State {
    pub fn new(x: Vec<f64>) -> Result<Self, MakError> {
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(MakError::NegativeConcentration { index: i, value: v });
            }
        }
        Ok(State(x))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for State {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for State {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Reconstructs the eliminated third concentration of the reduced two-state
/// replicator.
pub fn x3_from_reduced(x1: f64, x2: f64) -> f64 {
    1.0 - x1 - x2
}

/// A reaction network `sum_j alpha_ij s_j -> sum_j beta_ij s_j` with rate
/// constants kappa, inducing the vector field `[B - A]^T (kappa ⊙ x^A)`.
/// The on-disk representation is [`NetworkSpec`].
#[derive(Debug, Clone)]
pub struct StoichiometricNetwork {
    species: Vec<String>,
    reactants: Array2<u32>,
    products: Array2<u32>,
    rates: Vec<f64>,
}

impl StoichiometricNetwork {
    pub fn new(
        species: Vec<String>,
        reactants: Array2<u32>,
        products: Array2<u32>,
        rates: Vec<f64>,
    ) -> Result<Self, MakError> {
        let n = species.len();
        let m = rates.len();
        if n == 0 || m == 0 {
            return Err(MakError::InvalidParameter(
                "network needs at least one species and one reaction".into(),
            ));
        }
        if reactants.dim() != (m, n) || products.dim() != (m, n) {
            return Err(MakError::InvalidParameter(format!(
                "stoichiometry matrices must be {m}x{n}, got {:?} and {:?}",
                reactants.dim(),
                products.dim()
            )));
        }
        for &k in &rates {
            if !(k > 0.0) || !k.is_finite() {
                return Err(MakError::InvalidParameter(format!(
                    "rate constants must be positive, got {k}"
                )));
            }
        }
        Ok(StoichiometricNetwork {
            species,
            reactants,
            products,
            rates,
        })
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.rates.len()
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactants(&self) -> &Array2<u32> {
        &self.reactants
    }

    pub fn products(&self) -> &Array2<u32> {
        &self.products
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Monomial vector `x^A`, one entry per reaction, with the convention
    /// `0^0 = 1` so zero-order reactants contribute the multiplicative
    /// identity.
    fn monomials(&self, x: &[f64], out: &mut [f64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let mut m = self.rates[j];
            for (k, &xk) in x.iter().enumerate() {
                let a = self.reactants[(j, k)];
                if a > 0 {
                    m *= xk.powi(a as i32);
                }
            }
            *slot = m;
        }
    }

    /// Vector field without domain checks. The integrator evaluates
    /// Runge-Kutta stages that may transiently leave the first orthant;
    /// the polynomial RHS is well defined there.
    pub fn rhs_into(&self, x: &[f64], out: &mut [f64]) {
        let m = self.n_reactions();
        let mut flux = vec![0.0; m];
        self.monomials(x, &mut flux);
        for v in out.iter_mut() {
            *v = 0.0;
        }
        for j in 0..m {
            let f = flux[j];
            for k in 0..x.len() {
                let net = self.products[(j, k)] as i64 - self.reactants[(j, k)] as i64;
                if net != 0 {
                    out[k] += net as f64 * f;
                }
            }
        }
    }

    /// `[B - A]^T (kappa ⊙ x^A)` with full precondition checks.
    pub fn rhs(&self, x: &State) -> Result<Vec<f64>, MakError> {
        let n = self.n_species();
        if x.dim() != n {
            return Err(MakError::DimensionMismatch {
                expected: n,
                got: x.dim(),
            });
        }
        let mut out = vec![0.0; n];
        self.rhs_into(x, &mut out);
        Ok(out)
    }

    /// Analytic Jacobian of the vector field, term by term from the
    /// polynomial structure.
    pub fn jacobian(&self, x: &[f64]) -> Result<Array2<f64>, MakError> {
        let n = self.n_species();
        if x.len() != n {
            return Err(MakError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let m = self.n_reactions();
        let mut jac = Array2::zeros((n, n));
        for j in 0..m {
            for l in 0..n {
                let a_l = self.reactants[(j, l)];
                if a_l == 0 {
                    continue;
                }
                // d/dx_l of kappa_j * prod_k x_k^a_k
                let mut d = self.rates[j] * a_l as f64 * x[l].powi(a_l as i32 - 1);
                for (k, &xk) in x.iter().enumerate() {
                    if k == l {
                        continue;
                    }
                    let a = self.reactants[(j, k)];
                    if a > 0 {
                        d *= xk.powi(a as i32);
                    }
                }
                if d == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let net = self.products[(j, k)] as i64 - self.reactants[(j, k)] as i64;
                    if net != 0 {
                        jac[(k, l)] += net as f64 * d;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Central finite-difference Jacobian, the independent cross-check for
    /// [`Self::jacobian`].
    pub fn jacobian_fd(&self, x: &[f64], step: f64) -> Result<Array2<f64>, MakError> {
        let n = self.n_species();
        if x.len() != n {
            return Err(MakError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut jac = Array2::zeros((n, n));
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for l in 0..n {
            let orig = xp[l];
            xp[l] = orig + step;
            self.rhs_into(&xp, &mut fp);
            xp[l] = orig - step;
            self.rhs_into(&xp, &mut fm);
            xp[l] = orig;
            for k in 0..n {
                jac[(k, l)] = (fp[k] - fm[k]) / (2.0 * step);
            }
        }
        Ok(jac)
    }
}

/// Parameters of the autocatalytic replicator in a continuous flow stirred
/// tank reactor: replication rate `k1 > k2`, death rate `k2`, in/out-flow
/// `g`, and the feed composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicatorParams {
    pub k1: f64,
    pub k2: f64,
    pub g: f64,
    #[serde(default = "default_inflow")]
    pub inflow: [f64; 3],
}

fn default_inflow() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

impl ReplicatorParams {
    pub fn new(k1: f64, k2: f64, g: f64) -> Result<Self, MakError> {
        let p = ReplicatorParams {
            k1,
            k2,
            g,
            inflow: default_inflow(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MakError> {
        if !(self.k2 > 0.0) || !(self.k1 > self.k2) {
            return Err(MakError::InvalidParameter(format!(
                "need k1 > k2 > 0, got k1={}, k2={}",
                self.k1, self.k2
            )));
        }
        if !(self.g > 0.0) {
            return Err(MakError::InvalidParameter(format!(
                "need g > 0, got g={}",
                self.g
            )));
        }
        let sum: f64 = self.inflow.iter().sum();
        if self.inflow.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(MakError::InvalidParameter(
                "inflow must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(())
    }

    fn has_default_inflow(&self) -> bool {
        self.inflow == default_inflow()
    }
}

/// Which realization of the replicator network to build.
///
/// `Full` carries the environment species `s0` explicitly (6 reactions, 4
/// species, feed fixed at the reservoir). `ReducedThreeSpecies` drops the
/// environment column, turning inflow into a zero-order source.
/// `ReducedTwoState` additionally eliminates `x3`, which is a linear
/// combination of the other two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplicatorForm {
    Full,
    ReducedThreeSpecies,
    ReducedTwoState,
}

/// Builds the replicator network of the bundled example.
pub fn build_replicator_network(
    params: &ReplicatorParams,
    form: ReplicatorForm,
) -> Result<StoichiometricNetwork, MakError> {
    params.validate()?;
    let (k1, k2, g) = (params.k1, params.k2, params.g);
    let feed = params.inflow;

    let mut rows_a: Vec<Vec<u32>> = Vec::new();
    let mut rows_b: Vec<Vec<u32>> = Vec::new();
    let mut rates: Vec<f64> = Vec::new();

    match form {
        ReplicatorForm::Full => {
            // s1 + 2 s2 -> 3 s2, s2 -> s3, s_i -> s0 (outflow), s0 -> s_i (feed).
            let species = vec!["s1".into(), "s2".into(), "s3".into(), "s0".into()];
            rows_a.push(vec![1, 2, 0, 0]);
            rows_b.push(vec![0, 3, 0, 0]);
            rates.push(k1);
            rows_a.push(vec![0, 1, 0, 0]);
            rows_b.push(vec![0, 0, 1, 0]);
            rates.push(k2);
            for i in 0..3 {
                let mut a = vec![0u32; 4];
                a[i] = 1;
                rows_a.push(a);
                rows_b.push(vec![0, 0, 0, 1]);
                rates.push(g);
            }
            for i in 0..3 {
                if feed[i] > 0.0 {
                    let mut b = vec![0u32; 4];
                    b[i] = 1;
                    rows_a.push(vec![0, 0, 0, 1]);
                    rows_b.push(b);
                    rates.push(g * feed[i]);
                }
            }
            build_from_rows(species, rows_a, rows_b, rates)
        }
        ReplicatorForm::ReducedThreeSpecies => {
            let species = vec!["s1".into(), "s2".into(), "s3".into()];
            rows_a.push(vec![1, 2, 0]);
            rows_b.push(vec![0, 3, 0]);
            rates.push(k1);
            rows_a.push(vec![0, 1, 0]);
            rows_b.push(vec![0, 0, 1]);
            rates.push(k2);
            for i in 0..3 {
                let mut a = vec![0u32; 3];
                a[i] = 1;
                rows_a.push(a);
                rows_b.push(vec![0, 0, 0]);
                rates.push(g);
            }
            for i in 0..3 {
                if feed[i] > 0.0 {
                    let mut b = vec![0u32; 3];
                    b[i] = 1;
                    rows_a.push(vec![0, 0, 0]);
                    rows_b.push(b);
                    rates.push(g * feed[i]);
                }
            }
            build_from_rows(species, rows_a, rows_b, rates)
        }
        ReplicatorForm::ReducedTwoState => {
            if feed[2] > 0.0 {
                return Err(MakError::InvalidParameter(
                    "two-state reduction requires zero feed of the death species".into(),
                ));
            }
            let species = vec!["s1".into(), "s2".into()];
            rows_a.push(vec![1, 2]);
            rows_b.push(vec![0, 3]);
            rates.push(k1);
            rows_a.push(vec![0, 1]);
            rows_b.push(vec![0, 0]);
            rates.push(k2);
            for i in 0..2 {
                let mut a = vec![0u32; 2];
                a[i] = 1;
                rows_a.push(a);
                rows_b.push(vec![0, 0]);
                rates.push(g);
            }
            for i in 0..2 {
                if feed[i] > 0.0 {
                    let mut b = vec![0u32; 2];
                    b[i] = 1;
                    rows_a.push(vec![0, 0]);
                    rows_b.push(b);
                    rates.push(g * feed[i]);
                }
            }
            build_from_rows(species, rows_a, rows_b, rates)
        }
    }
}

fn build_from_rows(
    species: Vec<String>,
    rows_a: Vec<Vec<u32>>,
    rows_b: Vec<Vec<u32>>,
    rates: Vec<f64>,
) -> Result<StoichiometricNetwork, MakError> {
    let m = rows_a.len();
    let n = species.len();
    let mut a = Array2::zeros((m, n));
    let mut b = Array2::zeros((m, n));
    for (j, row) in rows_a.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            a[(j, k)] = v;
        }
    }
    for (j, row) in rows_b.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            b[(j, k)] = v;
        }
    }
    StoichiometricNetwork::new(species, a, b, rates)
}

/// `gamma(k1, k2, g) = sqrt(-4g^2 - 8 g k2 + k1 g - 4 k2^2)`, which controls
/// existence of the nontrivial equilibria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaValue {
    Real(f64),
    /// Radicand is negative; no nontrivial equilibria at these parameters.
    Imaginary {
        radicand: f64,
    },
}

impl GammaValue {
    pub fn is_real(&self) -> bool {
        matches!(self, GammaValue::Real(_))
    }
}

pub fn gamma(k1: f64, k2: f64, g: f64) -> Result<GammaValue, MakError> {
    if !(k1 > 0.0 && k2 > 0.0 && g > 0.0) {
        return Err(MakError::InvalidParameter(format!(
            "gamma requires positive arguments, got ({k1}, {k2}, {g})"
        )));
    }
    let radicand = -4.0 * g * g - 8.0 * g * k2 + k1 * g - 4.0 * k2 * k2;
    if radicand >= 0.0 {
        Ok(GammaValue::Real(radicand.sqrt()))
    } else {
        Ok(GammaValue::Imaginary { radicand })
    }
}

/// Endpoints in `g` of the interval on which `gamma` is real, i.e. the roots
/// of the radicand `-4g^2 + (k1 - 8 k2) g - 4 k2^2`. `None` when the
/// radicand never becomes nonnegative for `g > 0` (requires `k1 >= 16 k2`).
pub fn gamma_real_interval(k1: f64, k2: f64) -> Result<Option<(f64, f64)>, MakError> {
    if !(k1 > 0.0 && k2 > 0.0) {
        return Err(MakError::InvalidParameter(format!(
            "gamma_real_interval requires positive arguments, got ({k1}, {k2})"
        )));
    }
    // Roots of 4g^2 - (k1 - 8 k2) g + 4 k2^2 = 0.
    let b = k1 - 8.0 * k2;
    let disc = b * b - 64.0 * k2 * k2;
    if b <= 0.0 || disc < 0.0 {
        return Ok(None);
    }
    let q = 0.5 * (b + disc.sqrt());
    let hi = q / 4.0;
    let lo = 4.0 * k2 * k2 / q;
    Ok(Some((lo, hi)))
}

/// All equilibria of the replicator example in three-species coordinates.
///
/// The trivial washout point `(1, 0, 0)` always exists. When `gamma` is real
/// the two nontrivial points follow from the quadratic
/// `(k2+g) x2^2 - g x2 + g (k2+g)/k1 = 0` with `x1 = (k2+g)/(k1 x2)` and
/// `x3 = k2 x2 / g`; the quadratic route is numerically stable and has the
/// correct signs, unlike the closed forms it is cross-checked against.
pub fn analytic_equilibria(params: &ReplicatorParams) -> Result<Vec<State>, MakError> {
    params.validate()?;
    if !params.has_default_inflow() {
        return Err(MakError::InvalidParameter(
            "analytic equilibria are only available for the (1, 0, 0) feed".into(),
        ));
    }
    let (k1, k2, g) = (params.k1, params.k2, params.g);
    let mut out = vec![State::new(vec![1.0, 0.0, 0.0])?];
    if let GammaValue::Real(_) = gamma(k1, k2, g)? {
        let a = k2 + g;
        let c = g * a / k1;
        let disc = g * g - 4.0 * a * c;
        if disc >= 0.0 {
            let q = 0.5 * (g + disc.sqrt());
            let x2_hi = q / a;
            let x2_lo = c / q;
            for x2 in [x2_lo, x2_hi] {
                let x1 = a / (k1 * x2);
                let x3 = k2 * x2 / g;
                out.push(State::new(vec![x1, x2, x3])?);
            }
        }
    }
    Ok(out)
}

/// Per-sample entry of the Lyapunov diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub state: Vec<f64>,
    pub v: f64,
    pub v_dot: f64,
}

/// Report of `V(x) = -sum_i x*_i ln(x_i / x*_i)` and its numeric derivative
/// along trajectories. Sign statistics only; no definiteness claim is made.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub equilibrium: Vec<f64>,
    pub samples: Vec<LyapunovSample>,
    pub nonpositive_v_dot: usize,
    pub positive_v_dot: usize,
    pub min_v_dot: f64,
    pub max_v_dot: f64,
}

/// Evaluates the relative-entropy Lyapunov candidate at each sample.
/// Terms with `x*_i = 0` contribute zero (limit convention), so the
/// diagnostic applies at the washout equilibrium `(1, 0, 0)`.
pub fn lyapunov_diagnostic(
    params: &ReplicatorParams,
    x_eq: &State,
    samples: &[State],
) -> Result<LyapunovReport, MakError> {
    let net = build_replicator_network(params, ReplicatorForm::ReducedThreeSpecies)?;
    let n = net.n_species();
    if x_eq.dim() != n {
        return Err(MakError::DimensionMismatch {
            expected: n,
            got: x_eq.dim(),
        });
    }
    let residual = l2_norm(&net.rhs(x_eq)?);
    if residual >= 1e-8 {
        return Err(MakError::NotAnEquilibrium { residual });
    }

    let mut entries = Vec::with_capacity(samples.len());
    let mut nonpos = 0usize;
    let mut pos = 0usize;
    let mut min_vd = f64::INFINITY;
    let mut max_vd = f64::NEG_INFINITY;
    for s in samples {
        if s.dim() != n {
            return Err(MakError::DimensionMismatch {
                expected: n,
                got: s.dim(),
            });
        }
        for (i, (&xi, &xs)) in s.iter().zip(x_eq.iter()).enumerate() {
            if xs > 0.0 && xi == 0.0 {
                return Err(MakError::SampleOnBoundary { index: i });
            }
        }
        let mut v = 0.0;
        for (&xi, &xs) in s.iter().zip(x_eq.iter()) {
            if xs > 0.0 {
                v -= xs * (xi / xs).ln();
            }
        }
        let xdot = net.rhs(s)?;
        let mut v_dot = 0.0;
        for ((&xi, &xs), &fi) in s.iter().zip(x_eq.iter()).zip(xdot.iter()) {
            if xs > 0.0 {
                v_dot += (-xs / xi) * fi;
            }
        }
        if v_dot <= 0.0 {
            nonpos += 1;
        } else {
            pos += 1;
        }
        min_vd = min_vd.min(v_dot);
        max_vd = max_vd.max(v_dot);
        entries.push(LyapunovSample {
            state: s.to_vec(),
            v,
            v_dot,
        });
    }
    Ok(LyapunovReport {
        equilibrium: x_eq.to_vec(),
        samples: entries,
        nonpositive_v_dot: nonpos,
        positive_v_dot: pos,
        min_v_dot: min_vd,
        max_v_dot: max_vd,
    })
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigenvalues of a 2x2 matrix via the trace/determinant closed form.
pub fn eig2(j: &Array2<f64>) -> [Complex64; 2] {
    debug_assert_eq!(j.dim(), (2, 2));
    let tr = j[(0, 0)] + j[(1, 1)];
    let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [
            Complex64::new(0.5 * (tr - s), 0.0),
            Complex64::new(0.5 * (tr + s), 0.0),
        ]
    } else {
        let s = (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, -0.5 * s),
            Complex64::new(0.5 * tr, 0.5 * s),
        ]
    }
}

/// On-disk network definition: either explicit stoichiometry or the
/// replicator shorthand `{ "replicator": { "k1": .., "k2": .., "g": .. } }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSpec {
    Replicator {
        replicator: ReplicatorShorthand,
    },
    Explicit {
        species: Vec<String>,
        reactants: Vec<Vec<u32>>,
        products: Vec<Vec<u32>>,
        rates: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicatorShorthand {
    pub k1: f64,
    pub k2: f64,
    pub g: f64,
    #[serde(default = "default_form")]
    pub form: ReplicatorForm,
}

fn default_form() -> ReplicatorForm {
    ReplicatorForm::ReducedTwoState
}

impl NetworkSpec {
    pub fn build(&self) -> Result<StoichiometricNetwork, MakError> {
        match self {
            NetworkSpec::Replicator { replicator } => {
                let params = ReplicatorParams::new(replicator.k1, replicator.k2, replicator.g)?;
                build_replicator_network(&params, replicator.form)
            }
            NetworkSpec::Explicit {
                species,
                reactants,
                products,
                rates,
            } => {
                let n = species.len();
                for row in reactants.iter().chain(products.iter()) {
                    if row.len() != n {
                        return Err(MakError::NetworkDefinition(format!(
                            "stoichiometry row length {} does not match {} species",
                            row.len(),
                            n
                        )));
                    }
                }
                if reactants.len() != rates.len() || products.len() != rates.len() {
                    return Err(MakError::NetworkDefinition(
                        "reactants, products and rates must list the same number of reactions"
                            .into(),
                    ));
                }
                build_from_rows(
                    species.clone(),
                    reactants.clone(),
                    products.clone(),
                    rates.clone(),
                )
            }
        }
    }

    pub fn replicator_params(&self) -> Option<ReplicatorParams> {
        match self {
            NetworkSpec::Replicator { replicator } => {
                ReplicatorParams::new(replicator.k1, replicator.k2, replicator.g).ok()
            }
            NetworkSpec::Explicit { .. } => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MakError> {
        serde_json::from_str(text).map_err(|e| MakError::NetworkDefinition(e.to_string()))
    }
}

/// Hand-coded closed-form RHS of the three-species replicator, kept as an
/// independent route against the matrix evaluation.
pub fn replicator_rhs_closed_form(params: &ReplicatorParams, x: &[f64]) -> [f64; 3] {
    let (k1, k2, g) = (params.k1, params.k2, params.g);
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    [
        -k1 * x1 * x2 * x2 + g - g * x1,
        k1 * x1 * x2 * x2 - k2 * x2 - g * x2,
        k2 * x2 - g * x3,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_params() -> ReplicatorParams {
        ReplicatorParams::new(10.0, 0.1, 0.02).unwrap()
    }

    fn example_net3() -> StoichiometricNetwork {
        build_replicator_network(&example_params(), ReplicatorForm::ReducedThreeSpecies).unwrap()
    }

    #[test]
    fn replicator_full_matches_published_stoichiometry() {
        let net =
            build_replicator_network(&ReplicatorParams::new(1.0, 0.5, 1.0).unwrap(), ReplicatorForm::Full)
                .unwrap();
        assert_eq!(net.n_species(), 4);
        assert_eq!(net.n_reactions(), 6);
        // First reaction: s1 + 2 s2 -> 3 s2.
        assert_eq!(
            net.reactants().row(0).to_vec(),
            vec![1, 2, 0, 0],
        );
        assert_eq!(net.products().row(0).to_vec(), vec![0, 3, 0, 0]);
        assert_eq!(net.rates(), &[1.0, 0.5, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn replicator_rejects_bad_parameters() {
        assert!(ReplicatorParams::new(0.1, 0.2, 1.0).is_err());
        assert!(ReplicatorParams::new(1.0, 0.5, 0.0).is_err());
        assert!(ReplicatorParams::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rhs_vanishes_at_washout() {
        let net = example_net3();
        let f = net.rhs(&State::new(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(f, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_matches_hand_substitution() {
        let net = example_net3();
        let f = net.rhs(&State::new(vec![0.5, 0.5, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(f[0], -1.24, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 1.19, epsilon = 1e-12);
        assert_abs_diff_eq!(f[2], 0.05, epsilon = 1e-12);
    }

    #[test]
    fn matrix_rhs_agrees_with_closed_form_everywhere() {
        let params = example_params();
        let net = example_net3();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let via_matrix = net.rhs(&State::new(x.to_vec()).unwrap()).unwrap();
            let closed = replicator_rhs_closed_form(&params, &x);
            for k in 0..3 {
                assert_abs_diff_eq!(via_matrix[k], closed[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn simplex_conservation() {
        let params = example_params();
        let net = example_net3();
        let g = params.g;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // General nonnegative states: sum of the RHS is g (1 - sum x).
        for _ in 0..1000 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let f = net.rhs(&State::new(x.to_vec()).unwrap()).unwrap();
            let total: f64 = f.iter().sum();
            let expected = g * (1.0 - x.iter().sum::<f64>());
            assert_abs_diff_eq!(total, expected, epsilon = 1e-12);
        }
        // On the simplex the sum vanishes.
        for _ in 0..1000 {
            let a = rng.random::<f64>();
            let b = rng.random::<f64>() * (1.0 - a);
            let x = [a, b, 1.0 - a - b];
            let f = net.rhs(&State::new(x.to_vec()).unwrap()).unwrap();
            assert_abs_diff_eq!(f.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_network_conserves_total_mass() {
        let net = build_replicator_network(&example_params(), ReplicatorForm::Full).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let f = net.rhs(&State::new(x).unwrap()).unwrap();
            assert_abs_diff_eq!(f.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_at_washout_is_diagonal() {
        let net =
            build_replicator_network(&example_params(), ReplicatorForm::ReducedTwoState).unwrap();
        let j = net.jacobian(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(j[(0, 0)], -0.02, epsilon = 1e-14);
        assert_abs_diff_eq!(j[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(j[(1, 1)], -0.12, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let net = example_net3();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let a = 0.05 + 0.9 * rng.random::<f64>();
            let b = (1.0 - a) * (0.05 + 0.9 * rng.random::<f64>());
            let c = (1.0 - a - b).max(0.01);
            let x = [a, b, c];
            let ja = net.jacobian(&x).unwrap();
            let jf = net.jacobian_fd(&x, 1e-6).unwrap();
            let scale = ja.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for (va, vf) in ja.iter().zip(jf.iter()) {
                assert!(
                    (va - vf).abs() <= 1e-6 * scale,
                    "analytic {va} vs fd {vf} (scale {scale})"
                );
            }
        }
    }

    #[test]
    fn zero_net_change_gives_zero_field() {
        // A = B means every reaction leaves the state unchanged.
        let a = Array2::from_shape_vec((1, 2), vec![1, 1]).unwrap();
        let net = StoichiometricNetwork::new(
            vec!["u".into(), "v".into()],
            a.clone(),
            a,
            vec![3.0],
        )
        .unwrap();
        let f = net.rhs(&State::new(vec![0.4, 0.6]).unwrap()).unwrap();
        assert_eq!(f, vec![0.0, 0.0]);
        let j = net.jacobian(&[0.4, 0.6]).unwrap();
        assert!(j.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equilibria_match_quadratic_oracle() {
        let eq = analytic_equilibria(&example_params()).unwrap();
        assert_eq!(eq.len(), 3);
        assert_eq!(eq[0].as_ref(), &[1.0, 0.0, 0.0]);
        // Digits from the quadratic route.
        assert_abs_diff_eq!(eq[1][0], 0.92190, epsilon = 5e-5);
        assert_abs_diff_eq!(eq[1][1], 0.01302, epsilon = 5e-5);
        assert_abs_diff_eq!(eq[1][2], 0.06508, epsilon = 5e-5);
        assert_abs_diff_eq!(eq[2][0], 0.07810, epsilon = 5e-5);
        assert_abs_diff_eq!(eq[2][1], 0.15365, epsilon = 5e-5);
        assert_abs_diff_eq!(eq[2][2], 0.76825, epsilon = 5e-5);
        let net = example_net3();
        for e in &eq {
            let f = net.rhs(e).unwrap();
            assert!(l2_norm(&f) < 1e-9, "residual {}", l2_norm(&f));
            assert_abs_diff_eq!(e.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn equilibria_collapse_when_gamma_imaginary() {
        let params = ReplicatorParams::new(10.0, 0.1, 3.0).unwrap();
        let eq = analytic_equilibria(&params).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq[0].as_ref(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn quadratic_roots_cross_check_published_closed_forms() {
        // The focus point admits the closed form
        //   x2 = sqrt(g) (gamma + sqrt(g k1)) / (2 sqrt(k1) (g + k2)),
        // and the saddle shares the closed-form x1 = 1 + (gamma - sqrt(g k1)) / (2 sqrt(g k1)).
        // The corresponding closed forms for the saddle's x2 and x3 come out
        // negative, so only the quadratic route yields admissible
        // concentrations there.
        let p = example_params();
        let (k1, k2, g) = (p.k1, p.k2, p.g);
        let gam = match gamma(k1, k2, g).unwrap() {
            GammaValue::Real(v) => v,
            _ => panic!("gamma should be real"),
        };
        let eq = analytic_equilibria(&p).unwrap();
        let focus_x2 = g.sqrt() * (gam + (g * k1).sqrt()) / (2.0 * k1.sqrt() * (g + k2));
        assert_abs_diff_eq!(eq[2][1], focus_x2, epsilon = 1e-12);
        let focus_x3 = k2 * (gam + (g * k1).sqrt()) / (2.0 * (g * k1).sqrt() * (g + k2));
        assert_abs_diff_eq!(eq[2][2], focus_x3, epsilon = 1e-12);
        let saddle_x1 = 1.0 + (gam - (g * k1).sqrt()) / (2.0 * (g * k1).sqrt());
        assert_abs_diff_eq!(eq[1][0], saddle_x1, epsilon = 1e-10);
    }

    #[test]
    fn gamma_values() {
        match gamma(10.0, 0.1, 0.02).unwrap() {
            GammaValue::Real(v) => assert_abs_diff_eq!(v, 0.377359, epsilon = 1e-6),
            _ => panic!("expected real gamma"),
        }
        match gamma(10.0, 0.1, 3.0).unwrap() {
            GammaValue::Imaginary { radicand } => assert!(radicand < 0.0),
            _ => panic!("expected imaginary gamma"),
        }
        assert!(gamma(10.0, 0.1, -1.0).is_err());
    }

    #[test]
    fn gamma_interval_endpoints() {
        let (lo, hi) = gamma_real_interval(10.0, 0.1).unwrap().unwrap();
        // Roots of -4g^2 + 9.2g - 0.04 = 0.
        assert_abs_diff_eq!(lo, 0.0043562, epsilon = 1e-6);
        assert_abs_diff_eq!(hi, 2.2956438, epsilon = 1e-6);
        // Radicand vanishes at both endpoints.
        for e in [lo, hi] {
            let r = -4.0 * e * e + 9.2 * e - 0.04;
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        }
        // No real interval when k1 < 16 k2.
        assert!(gamma_real_interval(1.0, 0.1).unwrap().is_none());
    }

    #[test]
    fn lyapunov_values_at_washout() {
        let p = example_params();
        let x_eq = State::new(vec![1.0, 0.0, 0.0]).unwrap();
        let report = lyapunov_diagnostic(
            &p,
            &x_eq,
            &[
                State::new(vec![1.0, 0.0, 0.0]).unwrap(),
                State::new(vec![0.5, 0.25, 0.25]).unwrap(),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(report.samples[0].v, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.samples[1].v, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_is_nonnegative_on_interior_samples() {
        let p = example_params();
        let x_eq = State::new(vec![1.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let samples: Vec<State> = (0..200)
            .map(|_| {
                let a = 0.05 + 0.9 * rng.random::<f64>();
                let b = (1.0 - a) * rng.random::<f64>() * 0.9 + 0.01;
                let c = (1.0 - a - b).max(0.01);
                State::new(vec![a, b, c]).unwrap()
            })
            .collect();
        let report = lyapunov_diagnostic(&p, &x_eq, &samples).unwrap();
        for s in &report.samples {
            assert!(s.v >= 0.0, "V must be nonnegative, got {}", s.v);
        }
        // Both signs of V-dot occur over the simplex: the candidate is not a
        // global Lyapunov function (the focus has its own basin).
        assert!(report.positive_v_dot > 0);
        assert!(report.nonpositive_v_dot > 0);
    }

    #[test]
    fn lyapunov_rejects_boundary_samples_and_non_equilibria() {
        let p = example_params();
        let x_eq = State::new(vec![1.0, 0.0, 0.0]).unwrap();
        let err = lyapunov_diagnostic(&p, &x_eq, &[State::new(vec![0.0, 0.5, 0.5]).unwrap()]);
        assert!(matches!(err, Err(MakError::SampleOnBoundary { index: 0 })));
        let not_eq = State::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!(matches!(
            lyapunov_diagnostic(&p, &not_eq, &[]),
            Err(MakError::NotAnEquilibrium { .. })
        ));
    }

    #[test]
    fn network_spec_round_trip() {
        let text = r#"{"replicator": {"k1": 10.0, "k2": 0.1, "g": 0.02}}"#;
        let spec = NetworkSpec::from_json(text).unwrap();
        let net = spec.build().unwrap();
        assert_eq!(net.n_species(), 2);
        let explicit = r#"{
            "species": ["u", "v"],
            "reactants": [[1, 0], [0, 1]],
            "products": [[0, 1], [1, 0]],
            "rates": [1.0, 2.0]
        }"#;
        let net = NetworkSpec::from_json(explicit).unwrap().build().unwrap();
        assert_eq!(net.n_reactions(), 2);
        let f = net.rhs(&State::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn state_rejects_negative_components() {
        assert!(State::new(vec![0.1, -0.2]).is_err());
        assert!(State::new(vec![f64::NAN]).is_err());
    }
}
