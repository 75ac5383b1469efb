use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{wasserstein2_discrete, DemandError, Violation, DOMAIN_TOL};

/// Spacing of the price grid used for the noise-family constants `L` and `sigma^2`.
const PRICE_GRID_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandKind {
    /// One unit sells with probability `f(p)` in every period.
    LinearBernoulli,
    /// Demand is `f(p) + xi` with `xi` uniform on `[-w, w]`, independent of price.
    LinearAdditive,
}

/// Price interval together with the demand rates at its endpoints.
/// `d_hi = f(p_lo)` and `d_lo = f(p_hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceInterval {
    pub p_lo: f64,
    pub p_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
}

/// On-disk form of a single-product model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSpec {
    pub kind: DemandKind,
    pub alpha: f64,
    pub beta: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    #[serde(default)]
    pub noise_half_width: f64,
}

/// Linear single-product demand model. Construction validates the model, so
/// every method may assume a decreasing demand curve and a strictly concave
/// revenue curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DemandSpec", into = "DemandSpec")]
pub struct DemandModel {
    kind: DemandKind,
    alpha: f64,
    beta: f64,
    interval: PriceInterval,
    noise_half_width: f64,
}

/// Constants appearing in the regularity assumptions on the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionConstants {
    /// Strong concavity: `r''(d) <= -m`.
    pub m: f64,
    /// Bound on `|r'''(d)|`.
    pub big_m: f64,
    /// Lipschitz constant of `r` on the demand interval.
    pub lipschitz_revenue: f64,
    /// Almost-sure bound on `|xi|`.
    pub noise_bound: f64,
    /// Lipschitz constant of `p -> Q(p)` in W2 per unit of demand rate, on the price grid.
    pub wasserstein_lipschitz: f64,
    /// Smallest noise variance over the price grid.
    pub sigma_sq: f64,
}

impl TryFrom<DemandSpec> for DemandModel {
    type Error = DemandError;

    fn try_from(s: DemandSpec) -> Result<Self, Self::Error> {
        DemandModel::new(s.kind, s.alpha, s.beta, s.p_lo, s.p_hi, s.noise_half_width)
    }
}

impl From<DemandModel> for DemandSpec {
    fn from(m: DemandModel) -> Self {
        DemandSpec {
            kind: m.kind,
            alpha: m.alpha,
            beta: m.beta,
            p_lo: m.interval.p_lo,
            p_hi: m.interval.p_hi,
            noise_half_width: m.noise_half_width,
        }
    }
}

impl DemandModel {
    pub fn new(
        kind: DemandKind,
        alpha: f64,
        beta: f64,
        p_lo: f64,
        p_hi: f64,
        noise_half_width: f64,
    ) -> Result<Self, DemandError> {
        let mut violations = Vec::new();
        if ![alpha, beta, p_lo, p_hi, noise_half_width].iter().all(|v| v.is_finite()) {
            return Err(DemandError::Malformed("non-finite parameter".into()));
        }
        if p_lo >= p_hi {
            violations.push(Violation::new("A1", format!("empty price interval [{p_lo}, {p_hi}]")));
        }
        if beta <= 0.0 {
            violations.push(Violation::new("A1", format!("demand not strictly decreasing (beta = {beta})")));
            violations.push(Violation::new("A2", format!("revenue not strictly concave (r'' = -2/beta, beta = {beta})")));
        }
        let d_hi = alpha - beta * p_lo;
        let d_lo = alpha - beta * p_hi;
        if d_lo < 0.0 {
            violations.push(Violation::new("A1", format!("negative demand rate {d_lo} at p_hi")));
        }
        match kind {
            DemandKind::LinearBernoulli => {
                if d_hi > 1.0 {
                    violations.push(Violation::new("A4", format!("sale probability {d_hi} exceeds one at p_lo")));
                }
                if noise_half_width != 0.0 {
                    violations.push(Violation::new("A4", "noise_half_width is only meaningful for additive noise"));
                }
            }
            DemandKind::LinearAdditive => {
                if noise_half_width < 0.0 {
                    violations.push(Violation::new("A4", "negative noise half-width"));
                } else if d_lo < noise_half_width {
                    violations.push(Violation::new(
                        "A4",
                        format!("realized demand can be negative: d_lo = {d_lo} < w = {noise_half_width}"),
                    ));
                }
            }
        }
        if !violations.is_empty() {
            return Err(DemandError::Invalid(violations));
        }
        Ok(Self {
            kind,
            alpha,
            beta,
            interval: PriceInterval { p_lo, p_hi, d_lo, d_hi },
            noise_half_width,
        })
    }

    pub fn linear_bernoulli(alpha: f64, beta: f64, p_lo: f64, p_hi: f64) -> Result<Self, DemandError> {
        Self::new(DemandKind::LinearBernoulli, alpha, beta, p_lo, p_hi, 0.0)
    }

    pub fn linear_additive(alpha: f64, beta: f64, p_lo: f64, p_hi: f64, w: f64) -> Result<Self, DemandError> {
        Self::new(DemandKind::LinearAdditive, alpha, beta, p_lo, p_hi, w)
    }

    /// `Pr[sale] = 3/4 - p/2` on `p in [0, 1]`, the instance used for the regret tables.
    pub fn benchmark_instance() -> Self {
        Self::linear_bernoulli(0.75, 0.5, 0.0, 1.0).expect("benchmark instance is valid")
    }

    pub fn kind(&self) -> DemandKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn interval(&self) -> PriceInterval {
        self.interval
    }

    pub fn noise_half_width(&self) -> f64 {
        self.noise_half_width
    }

    pub fn is_bernoulli(&self) -> bool {
        self.kind == DemandKind::LinearBernoulli
    }

    pub fn demand_at(&self, p: f64) -> Result<f64, DemandError> {
        let PriceInterval { p_lo, p_hi, d_lo, d_hi } = self.interval;
        check("price", p, p_lo, p_hi)?;
        Ok((self.alpha - self.beta * p).clamp(d_lo, d_hi))
    }

    pub fn inverse_demand(&self, d: f64) -> Result<f64, DemandError> {
        let PriceInterval { p_lo, p_hi, d_lo, d_hi } = self.interval;
        check("demand rate", d, d_lo, d_hi)?;
        Ok(self.price_for_rate(d).clamp(p_lo, p_hi))
    }

    /// Mean revenue per period `r(d) = d * f^-1(d)`.
    pub fn revenue_rate(&self, d: f64) -> Result<f64, DemandError> {
        let PriceInterval { d_lo, d_hi, .. } = self.interval;
        check("demand rate", d, d_lo, d_hi)?;
        Ok(self.revenue_formula(d))
    }

    /// `f^-1` without the domain check.
    #[inline]
    pub fn price_for_rate(&self, d: f64) -> f64 {
        (self.alpha - d) / self.beta
    }

    /// The quadratic `d (alpha - d) / beta`, evaluated anywhere on the real line.
    /// Below `d_lo` this is the natural concave extension used by fluid bounds.
    #[inline]
    pub fn revenue_formula(&self, d: f64) -> f64 {
        d * (self.alpha - d) / self.beta
    }

    /// `r'(d)`.
    #[inline]
    pub fn revenue_slope(&self, d: f64) -> f64 {
        (self.alpha - 2.0 * d) / self.beta
    }

    /// `r''(d)`, constant for linear demand.
    #[inline]
    pub fn revenue_curvature(&self) -> f64 {
        -2.0 / self.beta
    }

    /// Maximizer of `r` over `[d_lo, d_hi]`.
    pub fn unconstrained_optimum(&self) -> f64 {
        (self.alpha / 2.0).clamp(self.interval.d_lo, self.interval.d_hi)
    }

    pub fn max_revenue_rate(&self) -> f64 {
        self.revenue_formula(self.unconstrained_optimum())
    }

    /// Almost-sure bound on the demand noise.
    pub fn noise_bound(&self) -> f64 {
        match self.kind {
            DemandKind::LinearBernoulli => 1.0,
            DemandKind::LinearAdditive => self.noise_half_width,
        }
    }

    /// Maps one uniform draw `u in [0, 1)` to a noise realization at demand rate `rate`.
    /// Every period consumes exactly one uniform, which keeps two policies driven by the
    /// same stream aligned period by period.
    #[inline]
    pub fn noise_from_uniform(&self, rate: f64, u: f64) -> f64 {
        match self.kind {
            DemandKind::LinearBernoulli => {
                if u < rate {
                    1.0 - rate
                } else {
                    -rate
                }
            }
            DemandKind::LinearAdditive => self.noise_half_width * (2.0 * u - 1.0),
        }
    }

    pub fn sample_noise<R: RngCore + ?Sized>(&self, p: f64, rng: &mut R) -> Result<f64, DemandError> {
        let rate = self.demand_at(p)?;
        Ok(self.noise_from_uniform(rate, unit_uniform(rng)))
    }

    /// Noise variance at demand rate `rate`.
    pub fn noise_variance(&self, rate: f64) -> f64 {
        match self.kind {
            DemandKind::LinearBernoulli => rate * (1.0 - rate),
            DemandKind::LinearAdditive => self.noise_half_width * self.noise_half_width / 3.0,
        }
    }

    pub fn assumption_constants(&self) -> AssumptionConstants {
        let PriceInterval { d_lo, d_hi, .. } = self.interval;
        let grid = self.price_grid();
        let (wasserstein_lipschitz, sigma_sq) = match self.kind {
            DemandKind::LinearBernoulli => {
                let rates: Vec<f64> = grid.iter().map(|&p| self.alpha - self.beta * p).collect();
                let atoms = |q: f64| [(-q, 1.0 - q), (1.0 - q, q)];
                let mut lip = 0.0f64;
                for (i, &qi) in rates.iter().enumerate() {
                    for &qj in &rates[i + 1..] {
                        let (lo, hi) = if qi < qj { (qi, qj) } else { (qj, qi) };
                        let w2 = wasserstein2_discrete(&atoms(lo), &atoms(hi));
                        lip = lip.max(w2 / (hi - lo));
                    }
                }
                let sigma = rates.iter().map(|&q| q * (1.0 - q)).fold(f64::INFINITY, f64::min);
                (lip, sigma)
            }
            DemandKind::LinearAdditive => (0.0, self.noise_variance(0.0)),
        };
        AssumptionConstants {
            m: 2.0 / self.beta,
            big_m: 0.0,
            lipschitz_revenue: self.revenue_slope(d_lo).abs().max(self.revenue_slope(d_hi).abs()),
            noise_bound: self.noise_bound(),
            wasserstein_lipschitz,
            sigma_sq,
        }
    }

    fn price_grid(&self) -> Vec<f64> {
        let PriceInterval { p_lo, p_hi, .. } = self.interval;
        let steps = ((p_hi - p_lo) / PRICE_GRID_STEP).floor() as usize;
        let mut grid: Vec<f64> = (0..=steps).map(|i| p_lo + i as f64 * PRICE_GRID_STEP).collect();
        if p_hi - grid[grid.len() - 1] > DOMAIN_TOL {
            grid.push(p_hi);
        }
        grid
    }
}

fn check(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), DemandError> {
    let tol = DOMAIN_TOL * (1.0 + lo.abs().max(hi.abs()));
    if value.is_nan() || value < lo - tol || value > hi + tol {
        return Err(DemandError::OutOfDomain { what, value, lo, hi });
    }
    Ok(())
}

/// 53-bit uniform in `[0, 1)`.
#[inline]
pub(crate) fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
