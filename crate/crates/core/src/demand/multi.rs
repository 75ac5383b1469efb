//! Multi-product demand specified through its revenue function.
//!
//! The revenue `r(x) = g'x + x'Hx/2` is a strictly concave quadratic on the box
//! `D = [0, box_hi]`. It corresponds to the linear inverse demand
//! `p = f^-1(x) = g + Hx/2`, so `r(x) = <x, f^-1(x)>` holds exactly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{DemandError, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiKind {
    /// Each product sells one unit with probability equal to its demand rate,
    /// independently across products given the rates.
    QuadraticBernoulli,
    /// Independent uniform noise on `[-w, w]` per product.
    QuadraticAdditive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiDemandSpec {
    pub kind: MultiKind,
    pub g: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    pub box_hi: Vec<f64>,
    #[serde(default)]
    pub noise_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultiDemandSpec", into = "MultiDemandSpec")]
pub struct MultiDemandModel {
    kind: MultiKind,
    g: DVector<f64>,
    h: DMatrix<f64>,
    box_hi: DVector<f64>,
    noise_half_width: f64,
}

/// Outcome of checking the multi-product regularity assumptions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiValidation {
    /// `-lambda_max(H)`; positive iff `H` is negative definite.
    pub m_prime: f64,
    pub spectral_norm: f64,
    pub violations: Vec<Violation>,
}

impl MultiValidation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl TryFrom<MultiDemandSpec> for MultiDemandModel {
    type Error = DemandError;

    fn try_from(s: MultiDemandSpec) -> Result<Self, Self::Error> {
        let n = s.g.len();
        if s.h.len() != n || s.h.iter().any(|row| row.len() != n) {
            return Err(DemandError::Malformed(format!("H must be {n}x{n}")));
        }
        let h = DMatrix::from_fn(n, n, |i, j| s.h[i][j]);
        MultiDemandModel::new(s.kind, s.g, h, s.box_hi, s.noise_half_width)
    }
}

impl From<MultiDemandModel> for MultiDemandSpec {
    fn from(m: MultiDemandModel) -> Self {
        let n = m.n();
        MultiDemandSpec {
            kind: m.kind,
            g: m.g.iter().copied().collect(),
            h: (0..n).map(|i| (0..n).map(|j| m.h[(i, j)]).collect()).collect(),
            box_hi: m.box_hi.iter().copied().collect(),
            noise_half_width: m.noise_half_width,
        }
    }
}

impl MultiDemandModel {
    /// Checks shapes and finiteness only; see [`Self::validate`] for the assumptions.
    pub fn new(
        kind: MultiKind,
        g: Vec<f64>,
        h: DMatrix<f64>,
        box_hi: Vec<f64>,
        noise_half_width: f64,
    ) -> Result<Self, DemandError> {
        let n = g.len();
        if n == 0 {
            return Err(DemandError::Malformed("empty product set".into()));
        }
        if h.nrows() != n || h.ncols() != n || box_hi.len() != n {
            return Err(DemandError::Malformed(format!(
                "dimension mismatch: g has {n} entries, H is {}x{}, box_hi has {}",
                h.nrows(),
                h.ncols(),
                box_hi.len()
            )));
        }
        let finite = g.iter().chain(h.iter()).chain(box_hi.iter()).all(|v| v.is_finite());
        if !finite || !noise_half_width.is_finite() {
            return Err(DemandError::Malformed("non-finite parameter".into()));
        }
        Ok(Self {
            kind,
            g: DVector::from_vec(g),
            h,
            box_hi: DVector::from_vec(box_hi),
            noise_half_width,
        })
    }

    pub fn bernoulli(g: Vec<f64>, h: DMatrix<f64>, box_hi: Vec<f64>) -> Result<Self, DemandError> {
        Self::new(MultiKind::QuadraticBernoulli, g, h, box_hi, 0.0)
    }

    /// Two substitutable products, `H = [[-2, -1/2], [-1/2, -2]]`, `g = (1, 1)`,
    /// rates in `[0, 0.8]^2` so that all prices stay nonnegative.
    pub fn two_product_instance() -> Self {
        let h = DMatrix::from_row_slice(2, 2, &[-2.0, -0.5, -0.5, -2.0]);
        Self::bernoulli(vec![1.0, 1.0], h, vec![0.8, 0.8]).expect("valid instance")
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn kind(&self) -> MultiKind {
        self.kind
    }

    pub fn gradient_at_zero(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn box_hi(&self) -> &DVector<f64> {
        &self.box_hi
    }

    pub fn noise_half_width(&self) -> f64 {
        self.noise_half_width
    }

    pub fn revenue(&self, x: &DVector<f64>) -> f64 {
        self.g.dot(x) + 0.5 * x.dot(&(&self.h * x))
    }

    pub fn revenue_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g + &self.h * x
    }

    /// Price vector `g + Hx/2` for demand-rate vector `x`.
    pub fn prices_for_rates(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.g + (&self.h * x) * 0.5
    }

    /// Demand rates that the price vector `p` induces, `2 H^-1 (p - g)`.
    pub fn demand_at(&self, p: &DVector<f64>) -> Result<DVector<f64>, DemandError> {
        let lu = self.h.clone().lu();
        let x = lu
            .solve(&((p - &self.g) * 2.0))
            .ok_or_else(|| DemandError::Malformed("singular H".into()))?;
        for k in 0..self.n() {
            if x[k] < -super::DOMAIN_TOL || x[k] > self.box_hi[k] + super::DOMAIN_TOL {
                return Err(DemandError::OutOfDomain {
                    what: "demand rate",
                    value: x[k],
                    lo: 0.0,
                    hi: self.box_hi[k],
                });
            }
        }
        Ok(x)
    }

    /// Almost-sure bound on the Euclidean norm of the noise vector.
    pub fn noise_bound(&self) -> f64 {
        let n = self.n() as f64;
        match self.kind {
            MultiKind::QuadraticBernoulli => n.sqrt(),
            MultiKind::QuadraticAdditive => self.noise_half_width * n.sqrt(),
        }
    }

    /// Noise for product `k` at rate `rate` from a single uniform.
    #[inline]
    pub fn noise_from_uniform(&self, rate: f64, u: f64) -> f64 {
        match self.kind {
            MultiKind::QuadraticBernoulli => {
                if u < rate {
                    1.0 - rate
                } else {
                    -rate
                }
            }
            MultiKind::QuadraticAdditive => self.noise_half_width * (2.0 * u - 1.0),
        }
    }

    pub fn validate(&self) -> MultiValidation {
        let n = self.n();
        let mut violations = Vec::new();
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.h[(i, j)] - self.h[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            violations.push(Violation::new("B2", format!("H not symmetric (max asymmetry {asym:e})")));
        }
        let sym = (&self.h + self.h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spectral_norm = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let m_prime = -lambda_max;
        if lambda_max >= -1e-12 {
            violations.push(Violation::new(
                "B2",
                format!("H not negative definite (largest eigenvalue {lambda_max})"),
            ));
        }
        for k in 0..n {
            if self.box_hi[k] <= 0.0 {
                violations.push(Violation::new("B1", format!("box_hi[{k}] = {} leaves D without interior", self.box_hi[k])));
            }
            if self.kind == MultiKind::QuadraticBernoulli && self.box_hi[k] > 1.0 {
                violations.push(Violation::new("B4", format!("box_hi[{k}] = {} is not a probability", self.box_hi[k])));
            }
        }
        if violations.is_empty() {
            // Prices are affine in x, so their minimum over the box sits at a vertex.
            let min_price = (0..(1usize << n.min(16)))
                .map(|mask| {
                    let x = DVector::from_fn(n, |k, _| if mask >> k & 1 == 1 { self.box_hi[k] } else { 0.0 });
                    self.prices_for_rates(&x).min()
                })
                .fold(f64::INFINITY, f64::min);
            if min_price < -1e-12 {
                violations.push(Violation::new("B1", format!("negative price {min_price} inside D")));
            }
            if let Some(chol) = (-&sym).cholesky() {
                let x_u = chol.solve(&self.g);
                let interior = (0..n).all(|k| x_u[k] > 0.0 && x_u[k] < self.box_hi[k]);
                if !interior {
                    violations.push(Violation::new("B2", "unconstrained maximizer of r is not interior to D"));
                }
            }
        }
        if self.kind == MultiKind::QuadraticAdditive && self.noise_half_width < 0.0 {
            violations.push(Violation::new("B4", "negative noise half-width"));
        }
        MultiValidation { m_prime, spectral_norm, violations }
    }

    pub(crate) fn require_valid(&self) -> Result<MultiValidation, DemandError> {
        let v = self.validate();
        if v.is_valid() {
            Ok(v)
        } else {
            Err(DemandError::Invalid(v.violations))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scaled_is_valid() {
        let m = MultiDemandModel::new(MultiKind::QuadraticAdditive, vec![1.0], DMatrix::from_element(1, 1, -1.0), vec![2.0], 0.0).unwrap();
        let v = m.validate();
        assert!(v.is_valid(), "{:?}", v.violations);
        assert!((v.m_prime - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_eigenvalue_violates_b2() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let m = MultiDemandModel::bernoulli(vec![0.5, 0.5], h, vec![0.8, 0.8]).unwrap();
        let v = m.validate();
        assert!(v.violations.iter().any(|v| v.assumption == "B2"));
    }

    #[test]
    fn two_product_eigenvalues() {
        let m = MultiDemandModel::two_product_instance();
        let v = m.validate();
        assert!(v.is_valid(), "{:?}", v.violations);
        // eigenvalues -1.5 and -2.5
        assert!((v.m_prime - 1.5).abs() < 1e-12);
        assert!((v.spectral_norm - 2.5).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_h_is_reported() {
        let h = DMatrix::from_row_slice(2, 2, &[-2.0, -0.5, 0.1, -2.0]);
        let m = MultiDemandModel::bernoulli(vec![1.0, 1.0], h, vec![0.8, 0.8]).unwrap();
        assert!(!m.validate().is_valid());
    }

    #[test]
    fn prices_and_demand_invert() {
        let m = MultiDemandModel::two_product_instance();
        let x = DVector::from_vec(vec![0.2, 0.35]);
        let p = m.prices_for_rates(&x);
        let back = m.demand_at(&p).unwrap();
        assert!((back - &x).norm() < 1e-12);
        assert!((m.revenue(&x) - x.dot(&p)).abs() < 1e-14);
    }

    #[test]
    fn json_uses_capital_h() {
        let m = MultiDemandModel::two_product_instance();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"H\":[[-2.0,-0.5],[-0.5,-2.0]]"), "{s}");
        let back: MultiDemandModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"kind":"quadratic-bernoulli","g":[1,1],"H":[[-2,0]],"box_hi":[1,1]}"#;
        assert!(serde_json::from_str::<MultiDemandModel>(bad).is_err());
    }
}
