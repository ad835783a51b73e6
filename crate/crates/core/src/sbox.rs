//! Rotation-symmetric S-boxes induced by a Boolean rule.
//!
//! For a rule `f` on `k` variables and `n >= k`, coordinate `i` of the induced
//! map is `f(x_i, x_{i+1}, ..., x_{i+k-1})` with indices taken mod `n`.
//! Words are packed with `x_1` as bit 0, so the right shift
//! `S(x_1, ..., x_n) = (x_n, x_1, ..., x_{n-1})` is a left rotation of the word.

use std::io::{BufRead, Read, Write};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::boolfun::{parse_function, BooleanFunction};
use crate::error::{Error, Result};

/// Largest dimension for which a full lookup table is materialized.
pub const MAX_TABLE_DIM: usize = 24;
/// Largest dimension for which single evaluations are supported.
pub const MAX_DIM: usize = 32;
/// Default cap on the largest dimension scanned by [`inv_set`].
pub const DEFAULT_INV_SET_CAP: usize = 20;

#[inline]
pub fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Right shift `S` on `n`-bit words.
#[inline]
pub fn shift(x: u32, n: usize) -> u32 {
    rotate(x, 1, n)
}

/// `S^j` on `n`-bit words; `j` may be negative.
#[inline]
pub fn rotate(x: u32, j: i64, n: usize) -> u32 {
    let r = j.rem_euclid(n as i64) as u32;
    if r == 0 {
        return x;
    }
    let x = u64::from(x);
    (((x << r) | (x >> (n as u32 - r))) & u64::from(mask(n))) as u32
}

/// Full lookup table of a map `F2^n -> F2^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LookupTable {
    n: usize,
    values: Vec<u32>,
}

impl LookupTable {
    pub fn new(n: usize, values: Vec<u32>) -> Result<Self> {
        if n > MAX_TABLE_DIM {
            return Err(Error::TooLarge { n, max: MAX_TABLE_DIM });
        }
        if values.len() != 1usize << n {
            return Err(Error::Domain(format!("table for n={n} needs {} entries, got {}", 1usize << n, values.len())));
        }
        if values.iter().any(|&v| v & !mask(n) != 0) {
            return Err(Error::Domain("table entry exceeds n bits".into()));
        }
        Ok(LookupTable { n, values })
    }

    pub fn from_fn(n: usize, map: impl Fn(u32) -> u32 + Sync) -> Result<Self> {
        if n > MAX_TABLE_DIM {
            return Err(Error::TooLarge { n, max: MAX_TABLE_DIM });
        }
        let values = (0..1u32 << n).into_par_iter().map(|x| map(x) & mask(n)).collect();
        Ok(LookupTable { n, values })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |x| x)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u32) -> u32 {
        self.values[x as usize]
    }

    /// Occupancy-bitset injectivity check.
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![0u64; self.values.len().div_ceil(64)];
        for &y in &self.values {
            let (w, b) = ((y >> 6) as usize, y & 63);
            if seen[w] >> b & 1 == 1 {
                return false;
            }
            seen[w] |= 1 << b;
        }
        true
    }

    pub fn inverse(&self) -> Result<Self> {
        let mut inv = vec![u32::MAX; self.values.len()];
        for (x, &y) in self.values.iter().enumerate() {
            if inv[y as usize] != u32::MAX {
                return Err(Error::NotBijective);
            }
            inv[y as usize] = x as u32;
        }
        Ok(LookupTable { n: self.n, values: inv })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        Ok(LookupTable { n: self.n, values: other.values.iter().map(|&y| self.values[y as usize]).collect() })
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(x, &y)| x as u32 == y)
    }

    /// `F ∘ S = S^k ∘ F` on every input.
    pub fn is_k_shift_invariant(&self, k: usize) -> bool {
        let n = self.n;
        (0..1u32 << n).all(|x| self.get(shift(x, n)) == rotate(self.get(x), k as i64, n))
    }

    pub fn is_shift_invariant(&self) -> bool {
        self.is_k_shift_invariant(1)
    }
}

/// A shift-invariant map on `n` bits generated by a `k`-variable rule.
#[derive(Debug, Clone)]
pub struct RSBox {
    n: usize,
    generator: BooleanFunction,
    table: OnceLock<LookupTable>,
}

impl PartialEq for RSBox {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.generator == other.generator
    }
}

impl Eq for RSBox {}

/// Induces the shift-invariant map of `f` on `n` bits.
pub fn induce(f: &BooleanFunction, n: usize) -> Result<RSBox> {
    RSBox::new(f.clone(), n)
}

impl RSBox {
    pub fn new(generator: BooleanFunction, n: usize) -> Result<Self> {
        let k = generator.arity();
        if k > n || k == 0 {
            return Err(Error::Dimension { k, n });
        }
        if n > MAX_DIM {
            return Err(Error::TooLarge { n, max: MAX_DIM });
        }
        Ok(RSBox { n, generator, table: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.generator.arity()
    }

    pub fn generator(&self) -> &BooleanFunction {
        &self.generator
    }

    /// Evaluates all `n` windows of `x`.
    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        let n = self.n;
        let kmask = mask(self.k()) as u64;
        let doubled = u64::from(x) | (u64::from(x) << n);
        let mut out = 0u32;
        for i in 0..n {
            let w = ((doubled >> i) & kmask) as u32;
            out |= u32::from(self.generator.eval(w)) << i;
        }
        out
    }

    /// Materialized lookup table, built on first use.
    pub fn lookup_table(&self) -> Result<&LookupTable> {
        if self.n > MAX_TABLE_DIM {
            return Err(Error::TooLarge { n: self.n, max: MAX_TABLE_DIM });
        }
        Ok(self.table.get_or_init(|| LookupTable::from_fn(self.n, |x| self.apply(x)).expect("dimension checked")))
    }

    /// Direct bijectivity test: every output word is hit at most once.
    pub fn is_bijection(&self) -> Result<bool> {
        if self.n > MAX_TABLE_DIM {
            return Err(Error::TooLarge { n: self.n, max: MAX_TABLE_DIM });
        }
        if let Some(t) = self.table.get() {
            return Ok(t.is_bijection());
        }
        let mut seen = vec![0u64; (1usize << self.n).div_ceil(64)];
        for x in 0..1u32 << self.n {
            let y = self.apply(x);
            let (w, b) = ((y >> 6) as usize, y & 63);
            if seen[w] >> b & 1 == 1 {
                return Ok(false);
            }
            seen[w] |= 1 << b;
        }
        Ok(true)
    }

    /// `F ∘ F = id` on all inputs.
    pub fn is_involution(&self) -> Result<bool> {
        if self.n > MAX_TABLE_DIM {
            return Err(Error::TooLarge { n: self.n, max: MAX_TABLE_DIM });
        }
        Ok((0..1u32 << self.n).into_par_iter().all(|x| self.apply(self.apply(x)) == x))
    }

    /// Writes the permutation table as `2^n` little-endian 32-bit words.
    pub fn write_table(&self, out: &mut impl Write) -> Result<()> {
        let table = self.lookup_table()?;
        for &v in table.values() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Sidecar header describing a binary table export.
    pub fn header(&self) -> String {
        format!("k={}\nn={}\nanf={}\n", self.k(), self.n, self.generator.anf())
    }
}

/// Reads a sidecar header and its binary table back; the table is checked against the rule.
pub fn read_export(header: impl BufRead, mut table: impl Read) -> Result<(RSBox, LookupTable)> {
    let mut k = None;
    let mut n = None;
    let mut anf = None;
    for line in header.lines() {
        let line = line?;
        if let Some((key, value)) = line.split_once('=') {
            match key.trim() {
                "k" => k = value.trim().parse::<usize>().ok(),
                "n" => n = value.trim().parse::<usize>().ok(),
                "anf" => anf = Some(value.trim().to_string()),
                _ => {}
            }
        }
    }
    let (k, n, anf) = match (k, n, anf) {
        (Some(k), Some(n), Some(a)) => (k, n, a),
        _ => return Err(Error::Domain("header must define k, n and anf".into())),
    };
    let rsbox = RSBox::new(parse_function(&anf, Some(k))?, n)?;
    if n > MAX_TABLE_DIM {
        return Err(Error::TooLarge { n, max: MAX_TABLE_DIM });
    }
    let mut bytes = Vec::new();
    table.read_to_end(&mut bytes)?;
    if bytes.len() != 4usize << n {
        return Err(Error::Domain(format!("table has {} bytes, expected {}", bytes.len(), 4usize << n)));
    }
    let values: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let lt = LookupTable::new(n, values)?;
    if lt != *rsbox.lookup_table()? {
        return Err(Error::Domain("table does not match the rule in the header".into()));
    }
    Ok((rsbox, lt))
}

/// One rotation orbit of `n`-bit words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NecklaceClass {
    /// Cycle size; divides `n`.
    pub length: usize,
    /// Smallest word (as an integer) in the orbit.
    pub representative: u32,
}

/// Smallest rotation of `x` and the orbit length.
pub fn necklace_of(x: u32, n: usize) -> NecklaceClass {
    let mut rep = x;
    let mut length = n;
    let mut y = x;
    for j in 1..=n {
        y = shift(y, n);
        if y == x {
            length = j;
            break;
        }
        rep = rep.min(y);
    }
    NecklaceClass { length, representative: rep }
}

/// Partition of `F2^n` into rotation orbits, sorted by (length, representative).
pub fn necklace_decomposition(n: usize) -> Result<Vec<NecklaceClass>> {
    if n > MAX_TABLE_DIM || n == 0 {
        return Err(Error::TooLarge { n, max: MAX_TABLE_DIM });
    }
    let mut classes: Vec<NecklaceClass> = (0..1u32 << n)
        .into_par_iter()
        .filter_map(|x| {
            let c = necklace_of(x, n);
            (c.representative == x).then_some(c)
        })
        .collect();
    classes.sort();
    Ok(classes)
}

/// Bijectivity through orbits: `F` must send each orbit onto an orbit of the same
/// length and permute the orbits of each length.
pub fn cycle_criterion_bijective(f: &RSBox) -> Result<bool> {
    let n = f.n();
    let classes = necklace_decomposition(n)?;
    let mut images: Vec<(usize, u32)> = Vec::with_capacity(classes.len());
    for c in &classes {
        let image = necklace_of(f.apply(c.representative), n);
        if image.length != c.length {
            return Ok(false);
        }
        images.push((image.length, image.representative));
    }
    images.sort_unstable();
    Ok(images.windows(2).all(|w| w[0] != w[1]))
}

/// Options for [`inv_set_with`].
#[derive(Debug, Clone, Copy)]
pub struct InvSetOptions {
    pub max_dim: usize,
}

impl Default for InvSetOptions {
    fn default() -> Self {
        InvSetOptions { max_dim: DEFAULT_INV_SET_CAP }
    }
}

/// Dimensions `n` in `[k, m]` on which `f` induces a bijection.
pub fn inv_set(f: &BooleanFunction, m: usize) -> Result<Vec<usize>> {
    inv_set_with(f, m, InvSetOptions::default())
}

pub fn inv_set_with(f: &BooleanFunction, m: usize, opts: InvSetOptions) -> Result<Vec<usize>> {
    let cap = opts.max_dim.min(MAX_TABLE_DIM);
    if m > cap {
        return Err(Error::TooLarge { n: m, max: cap });
    }
    let k = f.arity();
    (k..=m)
        .into_par_iter()
        .map(|n| induce(f, n)?.is_bijection().map(|b| b.then_some(n)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Outcome of [`verify_mutual_inverse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutualInverseCheck {
    /// `(G ∘ F)_1(x) = x_1` on every input.
    pub holds: bool,
    /// `j` with `(G ∘ F)_1(x) = x_{j+1}` on every input, inside the `k + l - 1` window.
    /// Then `G ∘ F = S^(-j)`; `Some(0)` is the literal identity.
    pub offset: Option<usize>,
    /// Both rules are liftings on every dimension at least their arity.
    pub certifies_local_invertibility: bool,
}

/// Checks whether the maps induced by `f` and `g` on `n` bits are mutually inverse,
/// possibly up to a rotation.
///
/// Requires `k + l <= n + 1` so that the composed first coordinate reads a
/// window without wrap-around; then the check does not depend on `n`.
pub fn verify_mutual_inverse(f: &BooleanFunction, g: &BooleanFunction, n: usize) -> Result<MutualInverseCheck> {
    let (k, l) = (f.arity(), g.arity());
    if k + l > n + 1 {
        return Err(Error::Precondition("composition wraps around; need k + l <= n + 1".into()));
    }
    let big_f = induce(f, n)?;
    let big_g = induce(g, n)?;
    if n > MAX_TABLE_DIM {
        return Err(Error::TooLarge { n, max: MAX_TABLE_DIM });
    }
    let offset =
        (0..k + l - 1).find(|&j| (0..1u32 << n).into_par_iter().all(|x| big_g.apply(big_f.apply(x)) & 1 == x >> j & 1));
    Ok(MutualInverseCheck { holds: offset == Some(0), offset, certifies_local_invertibility: offset.is_some() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfun::parse_function;

    fn rule(text: &str, k: usize) -> BooleanFunction {
        parse_function(text, Some(k)).unwrap()
    }

    #[test]
    fn shift_moves_last_bit_first() {
        // (x1,x2,x3,x4) = (1,0,0,1) -> (1,1,0,0)
        assert_eq!(shift(0b1001, 4), 0b0011);
        assert_eq!(rotate(shift(0b1011, 5), -1, 5), 0b1011);
    }

    #[test]
    fn coordinate_windows_follow_convention() {
        // f = x2: coordinate i reads x_{i+1}, so F = S^{-1}.
        let f = induce(&rule("x2", 2), 5).unwrap();
        for x in 0..32 {
            assert_eq!(f.apply(x), rotate(x, -1, 5));
        }
    }

    #[test]
    fn identity_rule() {
        let f = induce(&rule("x1", 1), 6).unwrap();
        assert_eq!(f.apply(13), 13);
        assert!(f.lookup_table().unwrap().is_identity());
    }

    #[test]
    fn arity_above_dimension_is_rejected() {
        assert_eq!(induce(&rule("x1*x2*x3+x4", 4), 3), Err(Error::Dimension { k: 4, n: 3 }));
    }

    #[test]
    fn chi_bijectivity_by_parity() {
        let chi = rule("x1+~x2*x3", 3);
        assert!(induce(&chi, 5).unwrap().is_bijection().unwrap());
        assert!(!induce(&chi, 4).unwrap().is_bijection().unwrap());
        assert_eq!(induce(&chi, 5).unwrap().apply(0), 0);
    }

    #[test]
    fn shift_invariance_of_induced_maps() {
        for (text, k) in [("x1+~x2*x3", 3), ("x2+x1*~x3*x4", 4), ("x1*x2+x3*x5+x4", 5)] {
            for n in k..=9 {
                let f = induce(&rule(text, k), n).unwrap();
                for x in 0..1u32 << n {
                    assert_eq!(f.apply(shift(x, n)), shift(f.apply(x), n));
                }
            }
        }
    }

    #[test]
    fn projection_rules_are_bijective() {
        for j in 1..=4 {
            for n in 4..=9 {
                let f = induce(&rule(&format!("x{j}"), 4), n).unwrap();
                assert!(f.is_bijection().unwrap());
            }
        }
    }

    #[test]
    fn necklaces_small() {
        let four = necklace_decomposition(4).unwrap();
        let count = |len| four.iter().filter(|c| c.length == len).count();
        assert_eq!((count(1), count(2), count(4)), (2, 1, 3));
        assert!(four.contains(&NecklaceClass { length: 2, representative: 0b0101 }));
        let three = necklace_decomposition(3).unwrap();
        assert_eq!(three.iter().map(|c| c.length).collect::<Vec<_>>(), vec![1, 1, 3, 3]);
        for n in 1..=12 {
            let total: usize = necklace_decomposition(n).unwrap().iter().map(|c| c.length).sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn cycle_criterion_examples() {
        assert!(cycle_criterion_bijective(&induce(&rule("x1", 1), 7).unwrap()).unwrap());
        let chi5 = induce(&rule("x1+~x2*x3", 3), 5).unwrap();
        assert!(cycle_criterion_bijective(&chi5).unwrap());
        // the six length-5 orbits are permuted among themselves
        let classes = necklace_decomposition(5).unwrap();
        let mut images: Vec<u32> = classes
            .iter()
            .filter(|c| c.length == 5)
            .map(|c| necklace_of(chi5.apply(c.representative), 5).representative)
            .collect();
        images.sort();
        let reps: Vec<u32> = classes.iter().filter(|c| c.length == 5).map(|c| c.representative).collect();
        assert_eq!(images, reps);
        let constant = induce(&BooleanFunction::zero(3).unwrap(), 5).unwrap();
        assert!(!cycle_criterion_bijective(&constant).unwrap());
    }

    #[test]
    fn cycle_criterion_agrees_with_direct_check() {
        for table in 0..256u64 {
            let f = BooleanFunction::from_u64(3, table).unwrap();
            for n in 3..=8 {
                let big = induce(&f, n).unwrap();
                assert_eq!(big.is_bijection().unwrap(), cycle_criterion_bijective(&big).unwrap(), "{f:?} n={n}");
            }
        }
    }

    #[test]
    fn inv_sets_of_named_families() {
        assert_eq!(inv_set(&rule("x2+x1*x3*~x4", 4), 12).unwrap(), vec![5, 7, 9, 11]);
        assert_eq!(inv_set(&rule("x1+~x2*x3*x4", 4), 12).unwrap(), vec![4, 5, 7, 8, 10, 11]);
        assert_eq!(inv_set(&rule("x1", 1), 8).unwrap(), (1..=8).collect::<Vec<_>>());
        assert!(inv_set(&rule("x1", 1), 21).is_err());
        assert_eq!(inv_set_with(&rule("x1", 1), 21, InvSetOptions { max_dim: 22 }).unwrap().len(), 21);
    }

    #[test]
    fn n_not_divisible_by_three_family() {
        let f = rule("x1+x2*x3*~x4", 4);
        assert!(!induce(&f, 6).unwrap().is_bijection().unwrap());
        assert!(induce(&f, 7).unwrap().is_bijection().unwrap());
    }

    #[test]
    fn mutual_inverse_checks() {
        let x1 = rule("x1", 1);
        assert!(verify_mutual_inverse(&x1, &x1, 4).unwrap().holds);
        let patt = rule("x2+x1*~x3*x4", 4);
        // Patt flips the second bit, so F = S^{-1} P with P an involution and F F = S^{-2}.
        let check = verify_mutual_inverse(&patt, &patt, 7).unwrap();
        assert!(!check.holds && check.certifies_local_invertibility);
        assert_eq!(check.offset, Some(2));
        let chi = rule("x1+~x2*x3", 3);
        assert!(!verify_mutual_inverse(&chi, &chi, 7).unwrap().certifies_local_invertibility);
        assert!(matches!(verify_mutual_inverse(&patt, &patt, 6), Err(Error::Precondition(_))));
    }

    #[test]
    fn involutions() {
        assert!(induce(&rule("x1", 1), 5).unwrap().is_involution().unwrap());
        assert!(!induce(&rule("x1+~x2*x3", 3), 5).unwrap().is_involution().unwrap());
    }

    #[test]
    fn export_round_trip() {
        let f = induce(&rule("x1+~x2*x3", 3), 7).unwrap();
        let mut bin = Vec::new();
        f.write_table(&mut bin).unwrap();
        assert_eq!(bin.len(), 4 * 128);
        assert_eq!(&bin[4..8], &f.apply(1).to_le_bytes());
        let header = f.header();
        assert_eq!(header, "k=3\nn=7\nanf=x1+x3+x2*x3\n");
        let (back, table) = read_export(header.as_bytes(), bin.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(&table, f.lookup_table().unwrap());
        assert!(read_export(header.as_bytes(), &bin[..8]).is_err());
    }
}
