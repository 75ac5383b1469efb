/// L2-Wasserstein distance between two discrete distributions on the real line.
///
/// Atoms are `(value, probability)` pairs sorted by value; probabilities of each
/// side must sum to one. In one dimension the quantile (monotone) coupling is
/// optimal, so the distance is computed by sweeping both CDFs together.
pub fn wasserstein2_discrete(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    debug_assert!(a.windows(2).all(|w| w[0].0 <= w[1].0));
    debug_assert!(b.windows(2).all(|w| w[0].0 <= w[1].0));
    let (mut i, mut j) = (0usize, 0usize);
    let (mut left_a, mut left_b) = (a.first().map_or(0.0, |x| x.1), b.first().map_or(0.0, |x| x.1));
    let mut cost = 0.0;
    while i < a.len() && j < b.len() {
        let mass = left_a.min(left_b);
        let gap = a[i].0 - b[j].0;
        cost += mass * gap * gap;
        left_a -= mass;
        left_b -= mass;
        // Advance whichever atom is exhausted; both may be.
        if left_a <= 1e-15 {
            i += 1;
            if i < a.len() {
                left_a = a[i].1;
            }
        }
        if left_b <= 1e-15 {
            j += 1;
            if j < b.len() {
                left_b = b[j].1;
            }
        }
    }
    cost.max(0.0).sqrt()
}
