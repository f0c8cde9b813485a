use super::c_beta_table;

/// `d_β(1..=N)`, the Dirichlet coefficients of `ζ(s)^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorWeightTable {
    beta: f64,
    values: Vec<f64>,
}

impl DivisorWeightTable {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `d_β(n)` for `1 <= n <= N`.
    pub fn get(&self, n: usize) -> f64 {
        assert!(n >= 1, "d_beta is indexed from 1");
        self.values[n]
    }
}

/// `spf[n]` is the smallest prime factor of `n` (`spf[0] = spf[1] = 0`).
pub fn smallest_prime_factors(n: usize) -> Vec<usize> {
    let mut spf = vec![0usize; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    spf
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub(crate) fn factorize(mut n: usize, spf: &[usize]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::new();
    while n > 1 {
        let q = spf[n];
        match out.last_mut() {
            Some((last, k)) if *last == q => *k += 1,
            _ => out.push((q, 1)),
        }
        n /= q;
    }
    out
}

pub fn d_beta_table(beta: f64, n: usize) -> DivisorWeightTable {
    let n = n.max(1);
    let spf = smallest_prime_factors(n);
    let max_exp = (usize::BITS - n.leading_zeros()) as usize;
    let c = c_beta_table(beta, max_exp);
    let mut values = vec![0.0; n + 1];
    values[1] = 1.0;
    for (m, slot) in values.iter_mut().enumerate().skip(2) {
        *slot = factorize(m, &spf)
            .into_iter()
            .map(|(_, k)| c.get(k as usize))
            .product();
    }
    DivisorWeightTable { beta, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn beta_one_is_all_ones() {
        let t = d_beta_table(1.0, 100);
        assert!((1..=100).all(|n| t.get(n) == 1.0));
    }

    #[test]
    fn beta_two_counts_divisors() {
        let t = d_beta_table(2.0, 200);
        for n in 1..=200usize {
            let tau = (1..=n).filter(|d| n % d == 0).count();
            assert_eq!(t.get(n), tau as f64, "n = {n}");
        }
        assert_eq!(t.get(6), 4.0);
        assert_eq!(t.get(12), 6.0);
        assert_eq!(t.get(7), 2.0);
    }

    #[test]
    fn multiplicative_on_coprime_pairs() {
        let t = d_beta_table(2.0 / 1.5, 200);
        for m in 1..=200usize {
            for n in 1..=200 / m {
                if gcd(m, n) == 1 {
                    let prod = t.get(m) * t.get(n);
                    assert!((t.get(m * n) - prod).abs() <= 1e-14 * prod);
                }
            }
        }
    }

    #[test]
    fn prime_powers_match_binomial() {
        let beta = 0.7;
        let t = d_beta_table(beta, 256);
        let c = c_beta_table(beta, 8);
        for k in 0..=8u32 {
            assert_eq!(t.get(2usize.pow(k)), c.get(k as usize));
        }
        assert_eq!(t.get(243), c.get(5));
    }
}
