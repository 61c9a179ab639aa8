use rand::Rng;

/// Univariate slice sampler with stepping out and shrinkage, operating on a
/// log density. The initial bracket width can be tuned from the spread of
/// visited values while adaptation is on, and is frozen afterwards.
#[derive(Debug, Clone)]
pub struct SliceSampler {
    width: f64,
    lower: f64,
    upper: f64,
    adapting: bool,
    // Welford accumulators for the adaptation phase.
    n: u64,
    mean: f64,
    m2: f64,
}

const MAX_STEPS_OUT: usize = 64;
const MAX_SHRINK: usize = 200;

impl SliceSampler {
    pub fn new(width: f64, lower: f64, upper: f64) -> Self {
        SliceSampler {
            width,
            lower,
            upper,
            adapting: false,
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn set_adapting(&mut self, on: bool) {
        if self.adapting && !on && self.n >= 20 {
            self.retune();
        }
        self.adapting = on;
    }

    fn retune(&mut self) {
        let sd = (self.m2 / (self.n - 1) as f64).sqrt();
        if sd.is_finite() && sd > 0.0 {
            self.width = 2.0 * sd;
        }
    }

    fn record(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        if self.n.is_multiple_of(50) {
            self.retune();
        }
    }

    /// One slice-sampling transition from `x0`.
    pub fn sample<R: Rng + ?Sized>(
        &mut self,
        x0: f64,
        ln_f: impl Fn(f64) -> f64,
        rng: &mut R,
    ) -> f64 {
        let f0 = ln_f(x0);
        let level = f0 + rng.random::<f64>().ln();
        let w = self.width;

        let mut left = x0 - w * rng.random::<f64>();
        let mut right = left + w;
        // Step budget split at random between the two sides keeps the
        // bounded stepping-out procedure reversible.
        let mut steps_left = (MAX_STEPS_OUT as f64 * rng.random::<f64>()) as usize;
        let mut steps_right = MAX_STEPS_OUT - 1 - steps_left;
        while steps_left > 0 && left > self.lower && ln_f(left) > level {
            left -= w;
            steps_left -= 1;
        }
        while steps_right > 0 && right < self.upper && ln_f(right) > level {
            right += w;
            steps_right -= 1;
        }
        left = left.max(self.lower);
        right = right.min(self.upper);

        let mut x = x0;
        for _ in 0..MAX_SHRINK {
            let cand = left + rng.random::<f64>() * (right - left);
            if ln_f(cand) > level {
                x = cand;
                break;
            }
            if cand < x0 {
                left = cand;
            } else {
                right = cand;
            }
        }
        if self.adapting {
            self.record(x);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangle_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = SliceSampler::new(0.3, 0.0, 1.0);
        let mut x = 0.5;
        let mut sum = 0.0;
        let n = 100_000;
        for _ in 0..n {
            x = s.sample(
                x,
                |x: f64| {
                    if x > 0.0 && x < 1.0 {
                        x.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                },
                &mut rng,
            );
            sum += x;
        }
        assert!((sum / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_moments_and_adaptation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = SliceSampler::new(0.01, f64::NEG_INFINITY, f64::INFINITY);
        let ln_f = |x: f64| -0.5 * ((x - 3.0) / 2.0).powi(2);
        let mut x = 0.0;
        s.set_adapting(true);
        for _ in 0..2000 {
            x = s.sample(x, ln_f, &mut rng);
        }
        s.set_adapting(false);
        let w = s.width();
        assert!(w > 2.0 && w < 8.0, "width {w}");
        let n = 100_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            x = s.sample(x, ln_f, &mut rng);
            m1 += x;
            m2 += x * x;
        }
        assert_eq!(s.width(), w);
        let mean = m1 / n as f64;
        let var = m2 / n as f64 - mean * mean;
        assert!((mean - 3.0).abs() < 0.05, "{mean}");
        assert!((var - 4.0).abs() < 0.15, "{var}");
    }
}
