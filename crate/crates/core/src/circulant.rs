//! k-circulant matrices over F2, their generating polynomials, cyclotomic
//! cosets, and the counting formulas for shift-invariant bijections and
//! invertible circulants.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest matrix dimension; rows are stored in a `u64`.
pub const MAX_CIRCULANT_DIM: usize = 64;

#[inline]
fn row_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `S^j` on an `n`-bit row (right shift of the coordinate vector).
#[inline]
pub fn rotate_row(row: u64, j: usize, n: usize) -> u64 {
    let j = j % n;
    if j == 0 {
        return row;
    }
    ((row << j) | (row >> (n - j))) & row_mask(n)
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Polynomial over F2; bit `i` is the coefficient of `z^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct F2Polynomial(pub u128);

impl F2Polynomial {
    pub fn zero() -> Self {
        F2Polynomial(0)
    }

    pub fn one() -> Self {
        F2Polynomial(1)
    }

    /// `z^n - 1` (which equals `z^n + 1` over F2).
    pub fn cyclic_modulus(n: usize) -> Self {
        F2Polynomial((1u128 << n) | 1)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(self) -> Option<u32> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros())
    }

    /// Carry-less product; panics on overflow past degree 127.
    fn clmul(self, other: Self) -> Self {
        if let (Some(da), Some(db)) = (self.degree(), other.degree()) {
            assert!(da + db < 128, "product degree exceeds 127");
        }
        let mut acc = 0u128;
        let mut b = other.0;
        let mut shift = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= self.0 << shift;
            }
            b >>= 1;
            shift += 1;
        }
        F2Polynomial(acc)
    }

    /// Quotient and remainder.
    pub fn div_rem(self, divisor: Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut q = 0u128;
        let mut r = self.0;
        while let Some(dr) = F2Polynomial(r).degree() {
            if dr < dd {
                break;
            }
            q |= 1 << (dr - dd);
            r ^= divisor.0 << (dr - dd);
        }
        (F2Polynomial(q), F2Polynomial(r))
    }

    pub fn gcd(self, other: Self) -> Self {
        let (mut a, mut b) = (self, other);
        while !b.is_zero() {
            let r = a % b;
            a = b;
            b = r;
        }
        a
    }

    /// Inverse modulo `modulus` by the extended Euclidean algorithm.
    pub fn inverse_mod(self, modulus: Self) -> Option<Self> {
        let (mut r0, mut r1) = (modulus, self % modulus);
        let (mut t0, mut t1) = (F2Polynomial::zero(), F2Polynomial::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(r1);
            r0 = r1;
            r1 = r;
            let t = t0 + (q * t1) % modulus;
            t0 = t1;
            t1 = t;
        }
        (r0 == F2Polynomial::one()).then(|| t0 % modulus)
    }
}

impl std::ops::Add for F2Polynomial {
    type Output = Self;
    // Coefficients live in GF(2), where addition is xor.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, other: Self) -> Self {
        F2Polynomial(self.0 ^ other.0)
    }
}

impl std::ops::Mul for F2Polynomial {
    type Output = Self;
    fn mul(self, other: Self) -> Self {
        self.clmul(other)
    }
}

impl std::ops::Rem for F2Polynomial {
    type Output = Self;
    fn rem(self, divisor: Self) -> Self {
        self.div_rem(divisor).1
    }
}

/// Dense square matrix over F2; bit `j` of `rows[i]` is entry `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize, rows: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_CIRCULANT_DIM || rows.len() != n {
            return Err(Error::Domain(format!("bad matrix shape n={n}, rows={}", rows.len())));
        }
        let rows = rows.into_iter().map(|r| r & row_mask(n)).collect();
        Ok(BitMatrix { n, rows })
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix { n, rows: (0..n).map(|i| 1u64 << i).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// `A x` where `x` is a column vector packed like the rows.
    #[inline]
    pub fn mul_vec(&self, x: u64) -> u64 {
        self.rows.iter().enumerate().fold(0, |acc, (i, r)| acc | (u64::from((r & x).count_ones() & 1) << i))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0u64;
                for (j, &orow) in other.rows.iter().enumerate() {
                    if r >> j & 1 == 1 {
                        acc ^= orow;
                    }
                }
                acc
            })
            .collect();
        BitMatrix { n: self.n, rows }
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![0u64; self.n];
        for (i, &r) in self.rows.iter().enumerate() {
            for (j, out) in rows.iter_mut().enumerate() {
                *out |= (r >> j & 1) << i;
            }
        }
        BitMatrix { n: self.n, rows }
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..self.n).find(|&i| rows[i] >> col & 1 == 1) else { continue };
            rows.swap(rank, p);
            for i in 0..self.n {
                if i != rank && rows[i] >> col & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
        rank
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv = BitMatrix::identity(n).rows;
        for col in 0..n {
            let p = (col..n).find(|&i| a[i] >> col & 1 == 1).ok_or(Error::Singular)?;
            a.swap(col, p);
            inv.swap(col, p);
            for i in 0..n {
                if i != col && a[i] >> col & 1 == 1 {
                    a[i] ^= a[col];
                    inv[i] ^= inv[col];
                }
            }
        }
        Ok(BitMatrix { n, rows: inv })
    }

    /// Step `k` such that every row is the `k`-step right shift of the previous one.
    pub fn circulant_step(&self) -> Option<usize> {
        let n = self.n;
        if n == 1 {
            return Some(1);
        }
        (1..=n).find(|&k| {
            (1..n).all(|i| self.rows[i] == rotate_row(self.rows[i - 1], k, n))
                && rotate_row(self.rows[n - 1], k, n) == self.rows[0]
        })
    }
}

/// `C_k(a_1, ..., a_n)`: row `i + 1` is the `k`-step right shift of row `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CirculantKMatrix {
    n: usize,
    step: usize,
    first_row: u64,
}

impl CirculantKMatrix {
    /// `first_row` bit `j` holds `a_{j+1}`.
    pub fn new(n: usize, step: usize, first_row: u64) -> Result<Self> {
        if n == 0 || n > MAX_CIRCULANT_DIM {
            return Err(Error::TooLarge { n, max: MAX_CIRCULANT_DIM });
        }
        if step == 0 || step > n {
            return Err(Error::Domain(format!("step {step} must lie in 1..={n}")));
        }
        if first_row & !row_mask(n) != 0 {
            return Err(Error::Domain("first row exceeds n bits".into()));
        }
        Ok(CirculantKMatrix { n, step, first_row })
    }

    /// Ordinary circulant (`k = 1`).
    pub fn circulant(n: usize, first_row: u64) -> Result<Self> {
        Self::new(n, 1, first_row)
    }

    pub fn identity(n: usize) -> Self {
        CirculantKMatrix { n, step: 1, first_row: 1 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn first_row(&self) -> u64 {
        self.first_row
    }

    /// `F(z) = a_1 + a_2 z + ... + a_n z^(n-1)`.
    pub fn generating_polynomial(&self) -> F2Polynomial {
        F2Polynomial(u128::from(self.first_row))
    }

    pub fn row(&self, i: usize) -> u64 {
        rotate_row(self.first_row, i * self.step, self.n)
    }

    pub fn to_matrix(&self) -> BitMatrix {
        BitMatrix { n: self.n, rows: (0..self.n).map(|i| self.row(i)).collect() }
    }

    #[inline]
    pub fn mul_vec(&self, x: u64) -> u64 {
        (0..self.n).fold(0, |acc, i| acc | (u64::from((self.row(i) & x).count_ones() & 1) << i))
    }

    /// Invertibility through the generating polynomial; `gcd(k, n) > 1` is never invertible.
    pub fn is_invertible(&self) -> bool {
        if gcd(self.step % self.n, self.n) != 1 && self.n > 1 {
            return false;
        }
        self.generating_polynomial().gcd(F2Polynomial::cyclic_modulus(self.n)) == F2Polynomial::one()
    }

    /// Inverse matrix, again a k'-circulant.
    ///
    /// `C_k(a)` is a row permutation of `C_1(a)`, whose inverse is `C_1(F*)` with
    /// `F F* = 1 mod z^n - 1`.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::Singular);
        }
        let n = self.n;
        let modulus = F2Polynomial::cyclic_modulus(n);
        let inv_poly = self.generating_polynomial().inverse_mod(modulus).ok_or(Error::Singular)?;
        let plain_inverse = CirculantKMatrix { n, step: 1, first_row: inv_poly.0 as u64 }.to_matrix();
        // Row i of C_k(a) is row (i k mod n) of C_1(a): C_k = P C_1, so C_k^{-1} = C_1^{-1} P^T.
        let mut rows = vec![0u64; n];
        for (r, out) in plain_inverse.rows.iter().zip(rows.iter_mut()) {
            for i in 0..n {
                let src = (i * self.step) % n;
                *out |= (r >> src & 1) << i;
            }
        }
        let m = BitMatrix { n, rows };
        let step = m.circulant_step().ok_or(Error::Singular)?;
        Ok(CirculantKMatrix { n, step, first_row: m.rows[0] })
    }
}

/// Inverse of a circulant (`k = 1`) computed purely from polynomials.
pub fn circulant_inverse(c: &CirculantKMatrix) -> Result<CirculantKMatrix> {
    c.inverse()
}

/// Every invertible k-circulant of dimension `n`, ordered by (step, first row).
pub fn invertible_cyclic_matrices(n: usize) -> Result<Vec<CirculantKMatrix>> {
    if n == 0 || n > 20 {
        return Err(Error::TooLarge { n, max: 20 });
    }
    let mut out = Vec::new();
    for step in 1..=n {
        if gcd(step % n, n) != 1 && n > 1 {
            continue;
        }
        for row in 0..1u64 << n {
            let c = CirculantKMatrix { n, step, first_row: row };
            if c.is_invertible() {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Cyclotomic cosets of 2 modulo an odd `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicCosets {
    pub modulus: u64,
    /// Each coset sorted ascending; cosets ordered by their minimal element.
    pub cosets: Vec<Vec<u64>>,
}

impl CyclotomicCosets {
    pub fn sizes(&self) -> Vec<usize> {
        self.cosets.iter().map(Vec::len).collect()
    }

    pub fn representatives(&self) -> Vec<u64> {
        self.cosets.iter().map(|c| c[0]).collect()
    }
}

pub fn cyclotomic_cosets(n: u64) -> Result<CyclotomicCosets> {
    if n.is_multiple_of(2) {
        return Err(Error::Domain(format!("cyclotomic cosets of 2 need an odd modulus, got {n}")));
    }
    if n > 1 << 24 {
        return Err(Error::TooLarge { n: n as usize, max: 1 << 24 });
    }
    let mut seen = vec![false; n as usize];
    let mut cosets = Vec::new();
    for i in 0..n {
        if seen[i as usize] {
            continue;
        }
        let mut coset = Vec::new();
        let mut j = i;
        while !seen[j as usize] {
            seen[j as usize] = true;
            coset.push(j);
            j = (j * 2) % n;
        }
        coset.sort_unstable();
        cosets.push(coset);
    }
    Ok(CyclotomicCosets { modulus: n, cosets })
}

/// Number of invertible `n x n` circulants over F2.
///
/// Odd `n`: product of `2^l - 1` over the coset sizes `l` of 2 mod `n`.
/// `n = 2^t s` with `s` odd: `2^(n - s) c_s`.
pub fn count_invertible_circulant(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let t = n.trailing_zeros();
    let odd = n >> t;
    let cosets = cyclotomic_cosets(odd)?;
    let mut count = BigUint::one();
    for size in cosets.sizes() {
        count *= (BigUint::one() << size) - BigUint::one();
    }
    Ok(count << (n - odd))
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn moebius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of rotation orbits of exact length `d` among binary words.
pub fn primitive_necklaces(d: u64) -> BigUint {
    let mut total = num_bigint::BigInt::zero();
    for e in divisors(d) {
        let term = num_bigint::BigInt::one() << e;
        match moebius(d / e) {
            1 => total += term,
            -1 => total -= term,
            _ => {}
        }
    }
    (total / num_bigint::BigInt::from(d)).to_biguint().expect("necklace count is nonnegative")
}

fn factorial(n: &BigUint) -> BigUint {
    let mut acc = BigUint::one();
    let mut i = BigUint::one();
    while &i <= n {
        acc *= &i;
        i += 1u32;
    }
    acc
}

/// Orbit-size multiset of the rotation action on `F2^n`: (length, count) pairs.
pub fn orbit_profile(n: u64) -> Vec<(u64, BigUint)> {
    divisors(n).into_iter().map(|d| (d, primitive_necklaces(d))).collect()
}

/// Number of shift-invariant bijections of `F2^n`: `prod_d d^(N_d) N_d!`.
pub fn count_shift_invariant_bijections(n: u64) -> Result<BigUint> {
    if n == 0 || n > 64 {
        return Err(Error::TooLarge { n: n as usize, max: 64 });
    }
    let mut total = BigUint::one();
    for (d, count) in orbit_profile(n) {
        let exp: u32 = count.clone().try_into().map_err(|_| Error::TooLarge { n: n as usize, max: 64 })?;
        total *= BigUint::from(d).pow(exp) * factorial(&count);
    }
    Ok(total)
}

/// `|GL(n, F2)| = prod_{i=1}^{n} (2^n - 2^(i-1))`.
pub fn gl_size(n: u64) -> BigUint {
    let full = BigUint::one() << n;
    (0..n).map(|i| &full - (BigUint::one() << i)).product()
}

/// Affine group order: `2^n |GL(n, F2)|`.
pub fn affine_size(n: u64) -> BigUint {
    gl_size(n) << n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_invertible(c: &CirculantKMatrix) -> bool {
        c.to_matrix().rank() == c.n()
    }

    #[test]
    fn polynomial_arithmetic() {
        let a = F2Polynomial(0b111); // 1 + z + z^2
        let b = F2Polynomial(0b11); // 1 + z
        assert_eq!(a * b, F2Polynomial(0b1001));
        assert_eq!(F2Polynomial(0b1001).div_rem(b), (a, F2Polynomial::zero()));
        assert_eq!(F2Polynomial::cyclic_modulus(3).gcd(F2Polynomial(0b011)), b);
        let m = F2Polynomial::cyclic_modulus(5);
        let inv = F2Polynomial(0b00111).inverse_mod(m).unwrap();
        assert_eq!((inv * F2Polynomial(0b00111)) % m, F2Polynomial::one());
        assert_eq!(F2Polynomial(0b11).inverse_mod(m), None);
    }

    #[test]
    fn invertibility_examples() {
        assert!(CirculantKMatrix::circulant(3, 0b001).unwrap().is_invertible());
        let c = CirculantKMatrix::circulant(3, 0b011).unwrap();
        assert!(!c.is_invertible());
        assert!(!rank_invertible(&c));
        for row in 0..16 {
            assert!(!CirculantKMatrix::new(4, 2, row).unwrap().is_invertible());
        }
    }

    #[test]
    fn polynomial_route_matches_rank() {
        for n in 1..=9usize {
            for step in 1..=n {
                for row in 0..1u64 << n {
                    let c = CirculantKMatrix::new(n, step, row).unwrap();
                    assert_eq!(c.is_invertible(), rank_invertible(&c), "n={n} k={step} row={row:b}");
                }
            }
        }
    }

    #[test]
    fn k_circulant_rows_follow_display() {
        // C_2(a1..a5): second row (a4, a5, a1, a2, a3)
        let c = CirculantKMatrix::new(5, 2, 0b00001).unwrap();
        assert_eq!(c.row(1), 0b00100);
        let c = CirculantKMatrix::new(5, 2, 0b10011).unwrap();
        assert_eq!(c.row(1), rotate_row(0b10011, 2, 5));
    }

    #[test]
    fn inverses() {
        let id = CirculantKMatrix::identity(4);
        assert_eq!(circulant_inverse(&id).unwrap(), id);
        let s = CirculantKMatrix::circulant(3, 0b010).unwrap();
        assert_eq!(circulant_inverse(&s).unwrap().first_row(), 0b100);
        let c = CirculantKMatrix::circulant(5, 0b00111).unwrap();
        let inv = circulant_inverse(&c).unwrap();
        assert_eq!(c.to_matrix().mul(&inv.to_matrix()), BitMatrix::identity(5));
        let m = F2Polynomial::cyclic_modulus(5);
        assert_eq!((c.generating_polynomial() * inv.generating_polynomial()) % m, F2Polynomial::one());
        assert_eq!(CirculantKMatrix::circulant(3, 0b011).unwrap().inverse(), Err(Error::Singular));
    }

    #[test]
    fn k_circulant_inverses_are_cyclic() {
        for n in 1..=8usize {
            for c in invertible_cyclic_matrices(n).unwrap() {
                let inv = c.inverse().unwrap();
                assert_eq!(c.to_matrix().mul(&inv.to_matrix()), BitMatrix::identity(n));
                assert_eq!(inv.to_matrix(), c.to_matrix().inverse().unwrap());
            }
        }
    }

    #[test]
    fn cosets() {
        let c15 = cyclotomic_cosets(15).unwrap();
        assert_eq!(c15.cosets, vec![vec![0], vec![1, 2, 4, 8], vec![3, 6, 9, 12], vec![5, 10], vec![7, 11, 13, 14]]);
        assert_eq!(c15.representatives(), vec![0, 1, 3, 5, 7]);
        assert_eq!(cyclotomic_cosets(1).unwrap().cosets, vec![vec![0]]);
        assert_eq!(cyclotomic_cosets(7).unwrap().sizes(), vec![1, 3, 3]);
        assert!(cyclotomic_cosets(8).is_err());
        for n in (1..200).step_by(2) {
            assert_eq!(cyclotomic_cosets(n).unwrap().sizes().iter().sum::<usize>(), n as usize);
        }
    }

    #[test]
    fn circulant_counts_small() {
        let expected = [1u64, 2, 3, 8, 15, 24, 49];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(count_invertible_circulant(i as u64 + 1).unwrap(), BigUint::from(e));
        }
        assert_eq!(count_invertible_circulant(32).unwrap(), BigUint::from(2147483648u64));
        for s in 1..=16u64 {
            assert_eq!(count_invertible_circulant(2 * s).unwrap(), count_invertible_circulant(s).unwrap() << s);
        }
        for p in 0..6 {
            let n = 1u64 << p;
            assert_eq!(count_invertible_circulant(n).unwrap(), BigUint::one() << (n - 1));
        }
    }

    #[test]
    fn invertible_rows_have_odd_weight() {
        for n in 1..=10usize {
            for c in invertible_cyclic_matrices(n).unwrap() {
                assert_eq!(c.first_row().count_ones() % 2, 1);
            }
        }
    }

    #[test]
    fn bijection_counts() {
        assert_eq!(count_shift_invariant_bijections(3).unwrap(), BigUint::from(36u32));
        assert_eq!(count_shift_invariant_bijections(5).unwrap(), BigUint::from(22_500_000u32));
        assert_eq!(count_shift_invariant_bijections(6).unwrap(), BigUint::from(263_303_591_362_560u64));
    }

    #[test]
    fn group_sizes() {
        assert_eq!(gl_size(1), BigUint::one());
        assert_eq!(gl_size(3), BigUint::from(168u32));
        assert_eq!(affine_size(2), BigUint::from(24u32));
        // brute-force GL(3, F2)
        let brute = (0..1u64 << 9)
            .filter(|bits| BitMatrix::new(3, vec![bits & 7, bits >> 3 & 7, bits >> 6 & 7]).unwrap().rank() == 3)
            .count();
        assert_eq!(brute, 168);
        // affine bijections of F2^2: x -> Ax + c, counted as distinct maps
        let mut maps = std::collections::HashSet::new();
        for bits in 0..16u64 {
            let m = BitMatrix::new(2, vec![bits & 3, bits >> 2]).unwrap();
            for c in 0..4u64 {
                let table: Vec<u64> = (0..4).map(|x| m.mul_vec(x) ^ c).collect();
                let mut sorted = table.clone();
                sorted.sort();
                if sorted == vec![0, 1, 2, 3] {
                    maps.insert(table);
                }
            }
        }
        assert_eq!(maps.len(), 24);
    }

    #[test]
    fn necklace_orbit_counts() {
        assert_eq!(primitive_necklaces(1), BigUint::from(2u32));
        assert_eq!(primitive_necklaces(6), BigUint::from(9u32));
        let profile = orbit_profile(4);
        let total: BigUint = profile.iter().map(|(d, c)| c * BigUint::from(*d)).sum();
        assert_eq!(total, BigUint::from(16u32));
    }
}
