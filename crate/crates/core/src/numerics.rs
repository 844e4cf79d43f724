//! Small numerical helpers shared across modules.

use num_complex::Complex64;

/// Japanese bracket `⟨n⟩ = √(1+n²)`.
#[inline]
pub fn japanese(n: i64) -> f64 {
    let n = n as f64;
    (1.0 + n * n).sqrt()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated complex accumulator (componentwise).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahan {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Pairwise (tree) sum with a fixed association order, independent of how the
/// slice was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Adaptive Simpson quadrature of a complex integrand over `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let flm = f(0.5 * (a + m));
        let frm = f(0.5 * (m + b));
        let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
        let err = left + right - whole;
        if depth == 0 || err.norm() <= 15.0 * tol {
            return left + right + err / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Smallest `2^a 3^b 5^c` not below `n`.
pub fn smooth_fft_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-15);
    }

    #[test]
    fn simpson_integrates_oscillation() {
        let v = adaptive_simpson(&|s| Complex64::cis(3.0 * s), 0.0, 2.0, 1e-13);
        let exact = (Complex64::cis(6.0) - 1.0) / Complex64::new(0.0, 3.0);
        assert!((v - exact).norm() < 1e-11);
    }

    #[test]
    fn smooth_lengths() {
        assert_eq!(smooth_fft_len(1026), 1080);
        assert_eq!(smooth_fft_len(1024), 1024);
        assert_eq!(smooth_fft_len(7), 8);
        assert_eq!(smooth_fft_len(1), 1);
    }

    #[test]
    fn pairwise_matches_naive_for_exact_data() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
