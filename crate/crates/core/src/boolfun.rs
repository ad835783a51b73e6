//! Single-output Boolean functions.
//!
//! Inputs are packed little-endian: the point `(x_1, ..., x_k)` lives at
//! index `x_1 + 2 x_2 + ... + 2^(k-1) x_k`, so `x_1` is bit 0. Every other
//! module relies on this convention.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported arity.
pub const MAX_ARITY: usize = 24;

/// A Boolean function on `k` variables stored as a packed truth table.
#[derive(Clone)]
pub struct BooleanFunction {
    arity: usize,
    words: Vec<u64>,
    anf: OnceLock<AnfPolynomial>,
}

impl PartialEq for BooleanFunction {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.words == other.words
    }
}

impl Eq for BooleanFunction {}

impl std::hash::Hash for BooleanFunction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.words.hash(state);
    }
}

impl PartialOrd for BooleanFunction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by arity, then by truth table read as an integer (highest index most significant).
impl Ord for BooleanFunction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.arity.cmp(&other.arity).then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanFunction({}; {})", self.arity, self.anf())
    }
}

fn word_count(arity: usize) -> usize {
    if arity <= 6 {
        1
    } else {
        1 << (arity - 6)
    }
}

fn tail_mask(arity: usize) -> u64 {
    if arity >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << arity)) - 1
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity > MAX_ARITY {
        return Err(Error::TooLarge { n: arity, max: MAX_ARITY });
    }
    Ok(())
}

impl BooleanFunction {
    fn from_words_unchecked(arity: usize, mut words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), word_count(arity));
        words[0] &= tail_mask(arity);
        BooleanFunction { arity, words, anf: OnceLock::new() }
    }

    /// The constant-zero function.
    pub fn zero(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Self::from_words_unchecked(arity, vec![0; word_count(arity)]))
    }

    /// The constant-one function.
    pub fn one(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Self::from_words_unchecked(arity, vec![u64::MAX; word_count(arity)]))
    }

    /// Builds a function by evaluating `rule` on every input index.
    pub fn from_fn(arity: usize, rule: impl Fn(u32) -> bool) -> Result<Self> {
        check_arity(arity)?;
        let mut words = vec![0u64; word_count(arity)];
        for x in 0..(1u32 << arity) {
            if rule(x) {
                words[(x >> 6) as usize] |= 1 << (x & 63);
            }
        }
        Ok(Self::from_words_unchecked(arity, words))
    }

    /// Builds a function of at most six variables from its truth table integer.
    pub fn from_u64(arity: usize, table: u64) -> Result<Self> {
        if arity > 6 {
            return Err(Error::Domain(format!("u64 truth table holds at most 6 variables, got {arity}")));
        }
        Ok(Self::from_words_unchecked(arity, vec![table]))
    }

    /// Builds a function from packed 64-bit words (bit `i` of word `j` is input `64 j + i`).
    pub fn from_words(arity: usize, words: Vec<u64>) -> Result<Self> {
        check_arity(arity)?;
        if words.len() != word_count(arity) {
            return Err(Error::Domain(format!(
                "expected {} words for arity {arity}, got {}",
                word_count(arity),
                words.len()
            )));
        }
        Ok(Self::from_words_unchecked(arity, words))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Truth table as an integer; only meaningful for arity at most six.
    pub fn as_u64(&self) -> Option<u64> {
        (self.arity <= 6).then(|| self.words[0])
    }

    #[inline]
    pub fn eval(&self, x: u32) -> bool {
        (self.words[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    /// Hamming weight of the truth table.
    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.arity > 0 && self.weight() == 1u64 << (self.arity - 1)
    }

    /// Algebraic normal form, computed once and cached.
    pub fn anf(&self) -> &AnfPolynomial {
        self.anf.get_or_init(|| {
            let mut coeffs = self.words.clone();
            moebius_in_place(&mut coeffs, self.arity);
            AnfPolynomial::from_coefficient_words(self.arity, &coeffs)
        })
    }

    /// Largest monomial size in the ANF; the zero function has degree 0.
    pub fn degree(&self) -> usize {
        self.anf().degree()
    }

    pub fn walsh_spectrum(&self) -> WalshSpectrum {
        let mut values: Vec<i32> = (0..1u32 << self.arity).map(|x| if self.eval(x) { -1 } else { 1 }).collect();
        fwht_in_place(&mut values);
        WalshSpectrum { arity: self.arity, values }
    }

    /// Distance to the closest affine function.
    pub fn nonlinearity(&self) -> u64 {
        let max = self.walsh_spectrum().max_abs();
        (1u64 << self.arity) / 2 - max / 2
    }

    /// `x -> f(x + a) + f(x)`.
    pub fn derivative(&self, a: u32) -> Result<Self> {
        if u64::from(a) >> self.arity != 0 {
            return Err(Error::Domain(format!("direction {a} outside F2^{}", self.arity)));
        }
        Self::from_fn(self.arity, |x| self.eval(x ^ a) ^ self.eval(x))
    }

    pub fn is_plateaued(&self) -> bool {
        self.walsh_spectrum().is_plateaued()
    }

    /// Output complement `f + 1`.
    pub fn complement(&self) -> Self {
        Self::from_words_unchecked(self.arity, self.words.iter().map(|w| !w).collect())
    }

    /// Composes with an input permutation: returns `x -> f(map(x))`.
    pub fn compose_input(&self, map: impl Fn(u32) -> u32) -> Self {
        Self::from_fn(self.arity, |x| self.eval(map(x))).expect("arity already validated")
    }

    /// The same rule viewed as a function of `arity` variables, ignoring the extra ones.
    pub fn extend_arity(&self, arity: usize) -> Result<Self> {
        if arity < self.arity {
            return Err(Error::Dimension { k: self.arity, n: arity });
        }
        let mask = (1u32 << self.arity) - 1;
        Self::from_fn(arity, |x| self.eval(x & mask))
    }

    /// Sum over F2 of two functions of the same arity.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Domain("arity mismatch".into()));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(Self::from_words_unchecked(self.arity, words))
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self.anf(), f)
    }
}

/// In-place binary Möbius transform over packed truth-table words.
///
/// Involution: applying it twice returns the input.
pub fn moebius_in_place(words: &mut [u64], arity: usize) {
    const LOW: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    for (i, low) in LOW.iter().enumerate().take(arity.min(6)) {
        for w in words.iter_mut() {
            *w ^= (*w & low) << (1 << i);
        }
    }
    for i in 6..arity {
        let stride = 1usize << (i - 6);
        for block in words.chunks_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h ^= *l;
            }
        }
    }
}

/// In-place fast Walsh–Hadamard butterfly (unnormalized).
pub fn fwht_in_place(values: &mut [i32]) {
    let len = values.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Walsh–Hadamard spectrum `W_f(u) = sum_x (-1)^(f(x) + u.x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshSpectrum {
    arity: usize,
    values: Vec<i32>,
}

impl WalshSpectrum {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn at(&self, u: u32) -> i32 {
        self.values[u as usize]
    }

    pub fn max_abs(&self) -> u64 {
        self.values.iter().map(|v| u64::from(v.unsigned_abs())).max().unwrap_or(0)
    }

    /// Sum of squares; equals `2^(2k)` for every Boolean function.
    pub fn parseval_sum(&self) -> u64 {
        self.values.iter().map(|&v| (i64::from(v) * i64::from(v)) as u64).sum()
    }

    /// True iff every value lies in `{0, +mu, -mu}` for one amplitude `mu`.
    pub fn is_plateaued(&self) -> bool {
        is_plateaued_slice(&self.values)
    }
}

pub(crate) fn is_plateaued_slice(values: &[i32]) -> bool {
    let mut amplitude = 0u32;
    for v in values {
        let a = v.unsigned_abs();
        if a == 0 {
            continue;
        }
        if amplitude == 0 {
            amplitude = a;
        } else if a != amplitude {
            return false;
        }
    }
    true
}

/// Multilinear polynomial over F2; each monomial is a bitmask of the variables it contains.
/// The empty mask is the constant 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnfPolynomial {
    arity: usize,
    monomials: BTreeSet<u32>,
}

impl AnfPolynomial {
    pub fn new(arity: usize, monomials: impl IntoIterator<Item = u32>) -> Result<Self> {
        check_arity(arity)?;
        let mut set = BTreeSet::new();
        for m in monomials {
            if u64::from(m) >> arity != 0 {
                return Err(Error::Domain(format!("monomial {m:#b} uses a variable beyond x{arity}")));
            }
            // Repeated monomials cancel over F2.
            if !set.insert(m) {
                set.remove(&m);
            }
        }
        Ok(AnfPolynomial { arity, monomials: set })
    }

    fn from_coefficient_words(arity: usize, coeffs: &[u64]) -> Self {
        let mut monomials = BTreeSet::new();
        for (j, &w) in coeffs.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros();
                monomials.insert((j as u32) * 64 + b);
                w &= w - 1;
            }
        }
        AnfPolynomial { arity, monomials }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn monomials(&self) -> &BTreeSet<u32> {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn has_constant(&self) -> bool {
        self.monomials.contains(&0)
    }

    /// Evaluates the polynomial at one point.
    pub fn eval(&self, x: u32) -> bool {
        self.monomials.iter().filter(|&&m| x & m == m).count() % 2 == 1
    }

    /// Sum over F2 (symmetric difference of monomial sets).
    pub fn add(&self, other: &Self) -> Self {
        AnfPolynomial {
            arity: self.arity.max(other.arity),
            monomials: self.monomials.symmetric_difference(&other.monomials).copied().collect(),
        }
    }

    /// Product over F2 with multilinear reduction (`x_i^2 = x_i`).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BTreeSet::new();
        for a in &self.monomials {
            for b in &other.monomials {
                let m = a | b;
                if !out.insert(m) {
                    out.remove(&m);
                }
            }
        }
        AnfPolynomial { arity: self.arity.max(other.arity), monomials: out }
    }

    /// Reinterprets the polynomial over a larger variable set.
    pub fn with_arity(&self, arity: usize) -> Result<Self> {
        Self::new(arity, self.monomials.iter().copied())
    }

    /// Truth table via the Möbius transform.
    pub fn to_function(&self) -> BooleanFunction {
        let mut words = vec![0u64; word_count(self.arity)];
        for &m in &self.monomials {
            words[(m >> 6) as usize] |= 1 << (m & 63);
        }
        moebius_in_place(&mut words, self.arity);
        BooleanFunction::from_words_unchecked(self.arity, words)
    }

    /// Parses an ANF string with the given arity; the arity must cover every variable used.
    pub fn parse_with_arity(text: &str, arity: usize) -> Result<Self> {
        let poly = parse_anf(text)?;
        if poly.arity > arity {
            return Err(Error::Domain(format!("polynomial uses x{} but arity is {arity}", poly.arity)));
        }
        poly.with_arity(arity)
    }

    /// Canonical monomial order: by degree, then by variable indices.
    pub fn canonical_monomials(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.monomials.iter().copied().collect();
        v.sort_by_key(|&m| monomial_key(m));
        v
    }
}

fn monomial_key(m: u32) -> (u32, std::cmp::Reverse<u32>) {
    // Within one degree, x1x2 < x1x3 < x2x3: compare the reversed bit pattern.
    (m.count_ones(), std::cmp::Reverse(m.reverse_bits()))
}

impl PartialOrd for AnfPolynomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// ANF-lexicographic order: compare canonical monomial sequences term by term.
impl Ord for AnfPolynomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.canonical_monomials();
        let b = other.canonical_monomials();
        a.iter().map(|&m| monomial_key(m)).cmp(b.iter().map(|&m| monomial_key(m))).then(self.arity.cmp(&other.arity))
    }
}

impl fmt::Display for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for m in self.canonical_monomials() {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if m == 0 {
                f.write_str("1")?;
                continue;
            }
            let mut firstvar = true;
            for i in 0..32 {
                if m >> i & 1 == 1 {
                    if !firstvar {
                        f.write_str("*")?;
                    }
                    firstvar = false;
                    write!(f, "x{}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Anf({}; {})", self.arity, self)
    }
}

impl FromStr for AnfPolynomial {
    type Err = Error;

    /// Parses with the smallest arity covering every variable.
    fn from_str(s: &str) -> Result<Self> {
        parse_anf(s)
    }
}

/// Grammar: `sum := term ('+' term)*`, `term := factor ('*'? factor)*`,
/// `factor := 'x' digits | '~x' digits | '!x' digits | '1' | '0'`.
/// A complemented variable `~xi` stands for `xi + 1`.
fn parse_anf(text: &str) -> Result<AnfPolynomial> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut total = AnfPolynomial { arity: 0, monomials: BTreeSet::new() };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let err = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };

    loop {
        skip_ws(&mut pos);
        let mut term = AnfPolynomial { arity: 0, monomials: BTreeSet::from([0]) };
        let mut factors = 0;
        loop {
            skip_ws(&mut pos);
            if pos >= bytes.len() {
                break;
            }
            let c = bytes[pos];
            let negated = c == b'~' || c == b'!';
            let start = pos;
            if negated {
                pos += 1;
                skip_ws(&mut pos);
            }
            if pos >= bytes.len() {
                return Err(err(pos, "expected a variable after complement"));
            }
            match bytes[pos] {
                b'x' | b'X' => {
                    pos += 1;
                    let digits = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if digits == pos {
                        return Err(err(digits, "expected variable index after 'x'"));
                    }
                    let idx: usize = text[digits..pos].parse().map_err(|_| err(digits, "bad index"))?;
                    if idx == 0 || idx > 32 {
                        return Err(err(digits, "variable index must be in 1..=32"));
                    }
                    let var = AnfPolynomial { arity: idx, monomials: BTreeSet::from([1u32 << (idx - 1)]) };
                    let factor = if negated {
                        var.add(&AnfPolynomial { arity: 0, monomials: BTreeSet::from([0]) })
                    } else {
                        var
                    };
                    term = term.mul(&factor);
                }
                b'1' if !negated => {
                    pos += 1;
                }
                b'0' if !negated => {
                    pos += 1;
                    term = AnfPolynomial { arity: term.arity, monomials: BTreeSet::new() };
                }
                _ => return Err(err(start, "unexpected character")),
            }
            factors += 1;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
                skip_ws(&mut pos);
                if pos >= bytes.len() || bytes[pos] == b'+' {
                    return Err(err(pos, "dangling '*'"));
                }
                continue;
            }
            if pos < bytes.len() && bytes[pos] == b'+' {
                break;
            }
        }
        if factors == 0 {
            return Err(err(pos, "empty term"));
        }
        total = total.add(&term);
        if pos >= bytes.len() {
            break;
        }
        // bytes[pos] == b'+'
        pos += 1;
    }
    if total.arity > MAX_ARITY {
        return Err(Error::TooLarge { n: total.arity, max: MAX_ARITY });
    }
    Ok(total)
}

/// Parses an ANF string into a function; `arity` defaults to the largest variable index used.
pub fn parse_function(text: &str, arity: Option<usize>) -> Result<BooleanFunction> {
    let poly = parse_anf(text)?;
    let poly = match arity {
        Some(k) => {
            if poly.arity > k {
                return Err(Error::Domain(format!("polynomial uses x{} but arity is {k}", poly.arity)));
            }
            poly.with_arity(k)?
        }
        None => poly.with_arity(poly.arity.max(1))?,
    };
    Ok(poly.to_function())
}
