use serde::Serialize;
use statrs::function::erf::erfc;

/// Two-sided normal quantiles.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const Z99: f64 = 2.575_829_303_548_901;

/// Pairwise summation in a fixed order, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Sample mean with a normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub std_dev: f64,
    pub n: usize,
}

impl MeanCi {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower() && v <= self.upper()
    }
}

pub fn mean_ci(samples: &[f64], z: f64) -> MeanCi {
    let n = samples.len();
    if n == 0 {
        return MeanCi { mean: f64::NAN, half_width: f64::NAN, std_dev: f64::NAN, n };
    }
    let mean = pairwise_sum(samples) / n as f64;
    let sq: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let std_dev = if n > 1 { (pairwise_sum(&sq) / (n - 1) as f64).sqrt() } else { 0.0 };
    MeanCi {
        mean,
        half_width: z * std_dev / (n as f64).sqrt(),
        std_dev,
        n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ~ a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len(), "linear_fit: length mismatch");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Average ranks (1-based), ties share the mean rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spearman {
    pub rho: f64,
    /// `P(rho' >= rho)` under exchangeability.
    pub p_value_positive: f64,
}

const EXACT_PERMUTATION_MAX: usize = 9;

/// Spearman rank correlation with a one-sided test for positive association:
/// exact permutation distribution up to 9 points, normal approximation above.
pub fn spearman(x: &[f64], y: &[f64]) -> Spearman {
    assert_eq!(x.len(), y.len(), "spearman: length mismatch");
    let rx = ranks(x);
    let ry = ranks(y);
    let rho = pearson(&rx, &ry);
    let n = x.len();
    let p_value_positive = if n <= EXACT_PERMUTATION_MAX {
        let mut perm = ry.clone();
        let mut hits = 0usize;
        let mut total = 0usize;
        permute(&mut perm, 0, &mut |p| {
            total += 1;
            if pearson(&rx, p) >= rho - 1e-12 {
                hits += 1;
            }
        });
        hits as f64 / total as f64
    } else {
        let z = rho * ((n - 1) as f64).sqrt();
        0.5 * erfc(z / std::f64::consts::SQRT_2)
    };
    Spearman { rho, p_value_positive }
}

fn permute(v: &mut Vec<f64>, k: usize, f: &mut impl FnMut(&[f64])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
