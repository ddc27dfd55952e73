//! Streaming weighted moment accumulators.
//!
//! The importance-sampling estimator of a leg value is the plain average of
//! the weighted samples `w_i x_i`; its sampling error is the sample standard
//! deviation of those products over the square root of the sample count.
//! The accumulator therefore tracks the sums of `w x`, `(w x)^2`, `x`,
//! `x^2` and `w` with compensated addition, and merges associatively so
//! chunked parallel runs reduce to the same statistics up to rounding.

/// Kahan compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Kahan) {
        self.add(other.sum);
        self.add(-other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Weighted first and second moments of one observable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightedStats {
    n: u64,
    sum_wx: Kahan,
    sum_wx2: Kahan,
    sum_x: Kahan,
    sum_x2: Kahan,
    sum_w: Kahan,
}

impl WeightedStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one sample `x` carrying weight `w`.
    pub fn push(&mut self, x: f64, w: f64) {
        let wx = w * x;
        self.n += 1;
        self.sum_wx.add(wx);
        self.sum_wx2.add(wx * wx);
        self.sum_x.add(x);
        self.sum_x2.add(x * x);
        self.sum_w.add(w);
    }

    /// Build an accumulator from already-reduced plain sums.
    pub fn from_sums(n: u64, sum_wx: f64, sum_wx2: f64, sum_x: f64, sum_x2: f64, sum_w: f64) -> Self {
        let mut s = Self { n, ..Self::default() };
        s.sum_wx.add(sum_wx);
        s.sum_wx2.add(sum_wx2);
        s.sum_x.add(sum_x);
        s.sum_x2.add(sum_x2);
        s.sum_w.add(sum_w);
        s
    }

    /// Fold another accumulator into this one; associative and
    /// order-independent up to floating rounding.
    pub fn merge(&mut self, other: &WeightedStats) {
        self.n += other.n;
        self.sum_wx.merge(&other.sum_wx);
        self.sum_wx2.merge(&other.sum_wx2);
        self.sum_x.merge(&other.sum_x);
        self.sum_x2.merge(&other.sum_x2);
        self.sum_w.merge(&other.sum_w);
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Estimator of the real-measure mean: average of the products `w x`.
    pub fn weighted_mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum_wx.value() / self.n as f64
    }

    /// Sample variance of the products `w x`.
    pub fn weighted_variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let mean = self.sum_wx.value() / n;
        ((self.sum_wx2.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn weighted_sd(&self) -> f64 {
        self.weighted_variance().sqrt()
    }

    /// Standard error of [`weighted_mean`](Self::weighted_mean): `sd / sqrt(n)`.
    pub fn std_error(&self) -> f64 {
        self.weighted_sd() / (self.n as f64).sqrt()
    }

    /// Unweighted sample mean of `x`.
    pub fn raw_mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum_x.value() / self.n as f64
    }

    /// Unweighted sample variance of `x`.
    pub fn raw_variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let mean = self.sum_x.value() / n;
        ((self.sum_x2.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn raw_sd(&self) -> f64 {
        self.raw_variance().sqrt()
    }

    /// Average carried weight; estimates 1 under a correct measure change.
    pub fn mean_weight(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum_w.value() / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_weights_reduce_to_plain_statistics() {
        let mut s = WeightedStats::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            s.push(x, 1.0);
        }
        assert_relative_eq!(s.weighted_mean(), 2.5);
        assert_relative_eq!(s.raw_mean(), 2.5);
        // sample variance of {1,2,3,4}
        assert_relative_eq!(s.weighted_variance(), 5.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.std_error(), (5.0f64 / 3.0 / 4.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.mean_weight(), 1.0);
    }

    #[test]
    fn weighted_moments_follow_the_products() {
        let mut s = WeightedStats::new();
        s.push(2.0, 0.5); // wx = 1
        s.push(1.0, 3.0); // wx = 3
        assert_relative_eq!(s.weighted_mean(), 2.0);
        assert_relative_eq!(s.weighted_variance(), 2.0); // var of {1,3}
        assert_relative_eq!(s.raw_mean(), 1.5);
    }

    #[test]
    fn empty_and_singleton_edge_cases() {
        let s = WeightedStats::new();
        assert!(s.is_empty());
        assert!(s.weighted_mean().is_nan());
        let mut s1 = WeightedStats::new();
        s1.push(1.0, 1.0);
        assert!(s1.weighted_variance().is_nan());
    }

    proptest! {
        #[test]
        fn merge_equals_sequential_push(xs in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 2..200), split in 0usize..200) {
            let split = split.min(xs.len());
            let mut whole = WeightedStats::new();
            for &(x, w) in &xs {
                whole.push(x, w);
            }
            let mut left = WeightedStats::new();
            let mut right = WeightedStats::new();
            for &(x, w) in &xs[..split] {
                left.push(x, w);
            }
            for &(x, w) in &xs[split..] {
                right.push(x, w);
            }
            left.merge(&right);
            prop_assert_eq!(left.len(), whole.len());
            let scale = whole.weighted_mean().abs().max(1e-30);
            prop_assert!((left.weighted_mean() - whole.weighted_mean()).abs() <= 1e-10 * scale);
            let vscale = whole.weighted_variance().abs().max(1e-30);
            prop_assert!((left.weighted_variance() - whole.weighted_variance()).abs() <= 1e-10 * vscale);
        }

        #[test]
        fn merge_is_associative_to_rounding(xs in prop::collection::vec((0.0f64..10.0, 0.0f64..5.0), 3..120)) {
            let third = xs.len() / 3;
            let mut parts: Vec<WeightedStats> = Vec::new();
            for chunk in [&xs[..third], &xs[third..2*third], &xs[2*third..]] {
                let mut s = WeightedStats::new();
                for &(x, w) in chunk {
                    s.push(x, w);
                }
                parts.push(s);
            }
            // (a + b) + c
            let mut left = parts[0];
            left.merge(&parts[1]);
            left.merge(&parts[2]);
            // a + (b + c)
            let mut bc = parts[1];
            bc.merge(&parts[2]);
            let mut right = parts[0];
            right.merge(&bc);
            let scale = left.weighted_mean().abs().max(1e-30);
            prop_assert!((left.weighted_mean() - right.weighted_mean()).abs() <= 1e-12 * scale);
        }
    }
}
