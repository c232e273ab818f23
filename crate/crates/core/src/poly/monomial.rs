use std::cmp::Ordering;

/// Exponent vector over the variable slots `x1..xn, h` (h is always the last slot).
///
/// Ordered graded-lexicographically: total degree first, ties broken
/// lexicographically with `x1 > x2 > ... > h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(slots: usize) -> Self {
        Monomial(vec![0; slots])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn var(slots: usize, index: usize, power: u32) -> Self {
        let mut e = vec![0; slots];
        e[index] = power;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn slots(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Total degree ignoring the trailing `h` slot.
    pub fn x_degree(&self) -> u32 {
        self.0[..self.0.len() - 1].iter().sum()
    }

    pub fn exp(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn with_exp(&self, index: usize, e: u32) -> Monomial {
        let mut v = self.0.clone();
        v[index] = e;
        Monomial(v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        // x1^2 > x1*x2 > x2^2 > x1 > h > 1 for slots (x1, x2, h)
        let m = |e: &[u32]| Monomial::from_exponents(e.to_vec());
        let mut v = vec![
            m(&[0, 0, 1]),
            m(&[1, 1, 0]),
            m(&[0, 0, 0]),
            m(&[2, 0, 0]),
            m(&[1, 0, 0]),
            m(&[0, 2, 0]),
        ];
        v.sort();
        v.reverse();
        assert_eq!(
            v,
            vec![
                m(&[2, 0, 0]),
                m(&[1, 1, 0]),
                m(&[0, 2, 0]),
                m(&[1, 0, 0]),
                m(&[0, 0, 1]),
                m(&[0, 0, 0]),
            ]
        );
    }
}
