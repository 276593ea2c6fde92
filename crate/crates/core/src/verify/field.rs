//! Small finite fields as lookup tables.
//!
//! Elements are integers `0..q`; for `q = p^e` the integer's base-`p` digits
//! are the polynomial coefficients, lowest degree first. Extension fields
//! reduce modulo fixed Conway polynomials.

/// Reduction polynomial for each supported extension field: `(q, p,
/// coefficients of x^0 .. x^(e-1) of the monic modulus)`.
const MODULI: &[(usize, usize, &[usize])] = &[
    (4, 2, &[1, 1]),       // x^2 + x + 1
    (8, 2, &[1, 1, 0]),    // x^3 + x + 1
    (9, 3, &[2, 2]),       // x^2 + 2x + 2
    (16, 2, &[1, 1, 0, 0]), // x^4 + x + 1
];

#[derive(Clone, Debug)]
pub struct FiniteField {
    q: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
}

fn is_prime(x: usize) -> bool {
    x >= 2 && (2..x).take_while(|d| d * d <= x).all(|d| x % d != 0)
}

impl FiniteField {
    /// Primes below 64 and the extension fields 4, 8, 9, 16.
    pub fn new(q: usize) -> Option<Self> {
        if is_prime(q) && q < 64 {
            let add = (0..q * q).map(|t| (t / q + t % q) % q).collect();
            let mul = (0..q * q).map(|t| (t / q) * (t % q) % q).collect();
            return Some(FiniteField { q, add, mul });
        }
        let &(_, p, modulus) = MODULI.iter().find(|m| m.0 == q)?;
        let e = modulus.len();
        let digits = |mut x: usize| -> Vec<usize> {
            (0..e)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let value = |c: &[usize]| c.iter().rev().fold(0, |acc, &d| acc * p + d);
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = value(&sum);

                let mut prod = vec![0; 2 * e - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // x^e = -(modulus lower terms)
                for deg in (e..prod.len()).rev() {
                    let c = prod[deg];
                    if c == 0 {
                        continue;
                    }
                    prod[deg] = 0;
                    for (t, &m) in modulus.iter().enumerate() {
                        let idx = deg - e + t;
                        prod[idx] = (prod[idx] + c * (p - m % p)) % p;
                    }
                }
                mul[a * q + b] = value(&prod[..e]);
            }
        }
        Some(FiniteField { q, add, mul })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_field(f: &FiniteField) {
        let q = f.order();
        for a in 0..q {
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.mul(a, 1), a);
            assert!((0..q).any(|b| f.add(a, b) == 0));
            if a != 0 {
                assert_eq!((0..q).filter(|&b| f.mul(a, b) == 1).count(), 1, "inverse of {a} in GF({q})");
            }
            for b in 0..q {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..q {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                }
            }
        }
    }

    #[test]
    fn field_axioms() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            check_field(&FiniteField::new(q).unwrap());
        }
    }

    #[test]
    fn unsupported_orders() {
        for q in [0, 1, 6, 10, 12, 15, 25, 27, 32] {
            assert!(FiniteField::new(q).is_none(), "q = {q}");
        }
    }

    #[test]
    fn gf16_generator() {
        // x has multiplicative order 15 modulo x^4 + x + 1
        let f = FiniteField::new(16).unwrap();
        let mut acc = 1;
        let mut order = 0;
        loop {
            acc = f.mul(acc, 2);
            order += 1;
            if acc == 1 {
                break;
            }
        }
        assert_eq!(order, 15);
    }
}
