//! Closed-form lifting families: chi, the Patt rule, the odd-k quadratic
//! family lifting to `k + 2` bits, and flip-pattern (landscape) rules.

use std::fmt;
use std::str::FromStr;

use crate::boolfun::{AnfPolynomial, BooleanFunction};
use crate::error::{Error, Result};
use crate::sbox::{induce, rotate, LookupTable};

/// `x1 + (x2 + 1) x3`.
pub fn chi() -> BooleanFunction {
    AnfPolynomial::new(3, [0b001, 0b100, 0b110]).expect("valid").to_function()
}

/// `x2 + x1 (x3 + 1) x4`.
pub fn patt() -> BooleanFunction {
    AnfPolynomial::new(4, [0b0010, 0b1001, 0b1101]).expect("valid").to_function()
}

fn var(i: usize) -> u32 {
    1 << (i - 1)
}

/// `x1 + x2 + x_{k-1} + x_k + sum_{i=1}^{k-2} x_i x_{i+1}` for odd `k >= 3`,
/// with repeated terms cancelled.
pub fn k_plus_2_generator(k: usize) -> Result<BooleanFunction> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(Error::Domain(format!("k must be odd and at least 3, got {k}")));
    }
    let mut terms = vec![var(1), var(2), var(k - 1), var(k)];
    terms.extend((1..=k - 2).map(|i| var(i) | var(i + 1)));
    Ok(AnfPolynomial::new(k, terms)?.to_function())
}

/// Result of [`reduction_identity_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionCheck {
    pub k: usize,
    /// `k mod 8`.
    pub case: usize,
    /// The 1-based coordinates that are summed.
    pub coordinates: Vec<usize>,
    /// Symbolic sum of those coordinates over `k + 2` variables.
    pub sum: AnfPolynomial,
    /// The trinomial `x_a + x_a x_{a+1} + x_{a+2}` named for this case.
    pub target: AnfPolynomial,
    /// `sum == target`.
    pub literal: bool,
    /// Start index `a` (1-based) if `sum` is `x_a + x_a x_{a+1} + x_{a+2}` for some `a`.
    pub trinomial_start: Option<usize>,
}

impl ReductionCheck {
    /// The sum is a rotated chi-type trinomial, whose lift on an odd number of bits is bijective.
    pub fn reduces_to_trinomial(&self) -> bool {
        self.trinomial_start.is_some()
    }
}

/// Coordinate `i` (1-based) of the lift on `n` bits, as a polynomial in `n` variables.
fn coordinate_anf(f: &AnfPolynomial, i: usize, n: usize) -> AnfPolynomial {
    AnfPolynomial::new(n, f.monomials().iter().map(|&m| rotate(m, i as i64 - 1, n))).expect("fits in n bits")
}

fn trinomial(a: usize, n: usize) -> AnfPolynomial {
    let x = |i: usize| 1u32 << ((i - 1) % n);
    AnfPolynomial::new(n, [x(a), x(a) | x(a + 1), x(a + 2)]).expect("valid")
}

/// Adds the coordinate functions prescribed for `k mod 8` and compares the
/// result with the trinomial for that case.
pub fn reduction_identity_check(k: usize) -> Result<ReductionCheck> {
    let f = k_plus_2_generator(k)?;
    let n = k + 2;
    let case = k % 8;
    let (coordinates, start): (Vec<usize>, usize) = match case {
        1 => {
            let mut c = vec![1];
            c.extend((1..=(k - 1) / 4).map(|i| 4 * i));
            (c, k + 2)
        }
        3 => ((0..=(k - 3) / 4).map(|i| 4 * i + 1).collect(), k),
        5 => {
            let mut c: Vec<usize> = (0..=(k - 5) / 4).flat_map(|i| [4 * i + 1, 4 * i + 2, 4 * i + 3]).collect();
            c.extend([k, k + 1]);
            (c, k - 2)
        }
        7 => {
            let mut c = vec![1];
            c.extend((0..=(k - 3) / 4).flat_map(|i| [4 * i + 2, 4 * i + 3, 4 * i + 4]));
            (c, k + 2)
        }
        _ => unreachable!("k is odd"),
    };
    let anf = f.anf().with_arity(n)?;
    let sum = coordinates.iter().fold(AnfPolynomial::new(n, [])?, |acc, &i| acc.add(&coordinate_anf(&anf, i, n)));
    let target = trinomial(start, n);
    let trinomial_start = (1..=n).find(|&a| trinomial(a, n) == sum);
    Ok(ReductionCheck { k, case, coordinates, literal: sum == target, sum, target, trinomial_start })
}

/// A finite bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryString {
    pub bits: Vec<bool>,
}

impl BinaryString {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Self {
        BinaryString { bits: self.bits.iter().chain(&other.bits).copied().collect() }
    }
}

impl FromStr for BinaryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse { pos: i, msg: format!("expected 0 or 1, found {c:?}") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(|bits| BinaryString { bits })
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Longest run of consecutive positions on which `b` and its right shift by
/// `shift` agree, inside their overlapping window.
pub fn overlap(b: &BinaryString, shift: usize) -> Result<usize> {
    if shift == 0 || shift >= b.len() {
        return Err(Error::Domain(format!("shift must lie in 1..{}, got {shift}", b.len())));
    }
    let mut best = 0;
    let mut run = 0;
    for i in shift..b.len() {
        if b.bits[i] == b.bits[i - shift] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LandscapeCell {
    Zero,
    One,
    Dash,
    Star,
}

/// Flip pattern: the starred cell flips when every `0`/`1` cell fits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Landscape {
    cells: Vec<LandscapeCell>,
    star_index: usize,
}

impl Landscape {
    pub fn new(cells: Vec<LandscapeCell>) -> Result<Self> {
        let stars: Vec<usize> =
            cells.iter().enumerate().filter(|(_, c)| **c == LandscapeCell::Star).map(|(i, _)| i).collect();
        match stars.as_slice() {
            [s] => Ok(Landscape { star_index: *s, cells }),
            [] => Err(Error::Parse { pos: cells.len(), msg: "landscape needs exactly one '*'".into() }),
            [_, second, ..] => Err(Error::Parse { pos: *second, msg: "landscape has more than one '*'".into() }),
        }
    }

    pub fn cells(&self) -> &[LandscapeCell] {
        &self.cells
    }

    /// Zero-based position of the star.
    pub fn star_index(&self) -> usize {
        self.star_index
    }

    /// Length, equal to the arity of the generated rule.
    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn has_dash(&self) -> bool {
        self.cells.contains(&LandscapeCell::Dash)
    }

    fn bits(cells: &[LandscapeCell]) -> Result<BinaryString> {
        cells
            .iter()
            .map(|c| match c {
                LandscapeCell::Zero => Ok(false),
                LandscapeCell::One => Ok(true),
                _ => Err(Error::Precondition("overlap condition needs a landscape without '-'".into())),
            })
            .collect::<Result<Vec<_>>>()
            .map(|bits| BinaryString { bits })
    }

    /// Cells left and right of the star, as bit strings.
    pub fn blocks(&self) -> Result<(BinaryString, BinaryString)> {
        Ok((Self::bits(&self.cells[..self.star_index])?, Self::bits(&self.cells[self.star_index + 1..])?))
    }
}

impl FromStr for Landscape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cells = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(LandscapeCell::Zero),
                '1' => Ok(LandscapeCell::One),
                '-' => Ok(LandscapeCell::Dash),
                '*' | '⋆' => Ok(LandscapeCell::Star),
                _ => Err(Error::Parse { pos: i, msg: format!("unexpected landscape character {c:?}") }),
            })
            .collect::<Result<Vec<_>>>()?;
        Landscape::new(cells)
    }
}

impl fmt::Display for Landscape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cells {
            f.write_str(match c {
                LandscapeCell::Zero => "0",
                LandscapeCell::One => "1",
                LandscapeCell::Dash => "-",
                LandscapeCell::Star => "*",
            })?;
        }
        Ok(())
    }
}

/// `x_s + prod_{i != s} (x_i + e_i)` with dash cells left out of the product.
pub fn landscape_to_rule(l: &Landscape) -> BooleanFunction {
    let k = l.k();
    let mut product = AnfPolynomial::new(k, [0]).expect("valid");
    for (i, c) in l.cells().iter().enumerate() {
        let factor = match c {
            LandscapeCell::Zero => AnfPolynomial::new(k, [1 << i]),
            LandscapeCell::One => AnfPolynomial::new(k, [1 << i, 0]),
            LandscapeCell::Dash | LandscapeCell::Star => continue,
        }
        .expect("valid");
        product = product.mul(&factor);
    }
    let star = AnfPolynomial::new(k, [1 << l.star_index()]).expect("valid");
    star.add(&product).to_function()
}

/// `S^(s-1) F` for a landscape rule with its star at position `s`.
///
/// The induced map `F` flips the star bit and then rotates it into the first
/// coordinate; undoing the rotation leaves the pure flip map, which is an
/// involution whenever flips never disturb each other's context.
pub fn landscape_flip_map(l: &Landscape, n: usize) -> Result<LookupTable> {
    let f = induce(&landscape_to_rule(l), n)?;
    let shift = l.star_index() as i64;
    LookupTable::from_fn(n, |x| rotate(f.apply(x), shift, n))
}

/// Overlap condition on `B2 B1`: for every shift `1 <= l < len(B2 B1)`,
/// `ov(B2 B1, l) < min(len B1, len B2)`.
pub fn is_valid_landscape(l: &Landscape) -> Result<bool> {
    let (b1, b2) = l.blocks()?;
    let joined = b2.concat(&b1);
    let bound = b1.len().min(b2.len());
    for shift in 1..joined.len() {
        if overlap(&joined, shift)? >= bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The landscape family `1*01` (k = 4) and `1^(k-4) 0*01` / `1^(k-4) 0*10`
/// for even / odd `k >= 5`.
pub fn standard_landscape(k: usize) -> Result<Landscape> {
    match k {
        0..=3 => Err(Error::Domain(format!("landscape family starts at k = 4, got {k}"))),
        4 => "1*01".parse(),
        _ => {
            let tail = if k.is_multiple_of(2) { "0*01" } else { "0*10" };
            format!("{}{tail}", "1".repeat(k - 4)).parse()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfun::parse_function;
    use crate::sbox::induce;

    #[test]
    fn named_rules() {
        assert_eq!(chi().anf().to_string(), "x1+x3+x2*x3");
        assert_eq!(chi(), parse_function("x1+~x2*x3", Some(3)).unwrap());
        assert_eq!(patt(), parse_function("x2+x1*~x3*x4", Some(4)).unwrap());
        assert!(induce(&chi(), 5).unwrap().is_bijection().unwrap());
    }

    #[test]
    fn k_plus_2_canonical_forms() {
        // the quadratic sum runs to i = k - 2, so k = 3 keeps only x1*x2
        assert_eq!(k_plus_2_generator(3).unwrap().anf().to_string(), "x1+x3+x1*x2");
        assert_eq!(k_plus_2_generator(5).unwrap().anf().to_string(), "x1+x2+x4+x5+x1*x2+x2*x3+x3*x4");
        assert!(k_plus_2_generator(4).is_err());
        assert!(k_plus_2_generator(1).is_err());
    }

    #[test]
    fn k_plus_2_properties() {
        let f5 = k_plus_2_generator(5).unwrap();
        assert!(f5.is_balanced());
        assert_eq!(f5.nonlinearity(), 12);
        let f7 = k_plus_2_generator(7).unwrap();
        assert!(induce(&f7, 9).unwrap().is_bijection().unwrap());
    }

    #[test]
    fn reduction_sums_are_trinomials() {
        for k in (3..=21).step_by(2) {
            let check = reduction_identity_check(k).unwrap();
            assert!(check.reduces_to_trinomial(), "k={k}: {}", check.sum);
        }
        assert!(reduction_identity_check(9).unwrap().literal);
    }

    #[test]
    fn overlap_worked_values() {
        let b: BinaryString = "1011".parse().unwrap();
        assert_eq!(overlap(&b, 1).unwrap(), 1);
        assert_eq!(overlap(&b, 2).unwrap(), 1);
        assert_eq!(overlap(&b, 3).unwrap(), 1);
        assert_eq!(overlap(&"0000".parse().unwrap(), 1).unwrap(), 3);
        assert!(overlap(&b, 4).is_err());
    }

    #[test]
    fn landscape_parsing() {
        assert!("1*0*".parse::<Landscape>().is_err());
        assert!("101".parse::<Landscape>().is_err());
        assert!("1x*".parse::<Landscape>().is_err());
        let l: Landscape = "1-*0".parse().unwrap();
        assert_eq!((l.k(), l.star_index(), l.to_string()), (4, 2, "1-*0".to_string()));
        assert!(is_valid_landscape(&l).is_err());
    }

    #[test]
    fn landscape_rules_match_listed_polynomials() {
        let cases = [
            ("1*01", "x2+x3+x1*x3+x3*x4+x1*x3*x4"),
            ("10*10", "x3+x2*x5+x1*x2*x5+x2*x4*x5+x1*x2*x4*x5"),
            ("110*01", "x4+x3*x5+x1*x3*x5+x2*x3*x5+x1*x2*x3*x5+x3*x5*x6+x1*x3*x5*x6+x2*x3*x5*x6+x1*x2*x3*x5*x6"),
            // the empty product is 1, so a lone star always flips
            ("*", "1+x1"),
        ];
        for (pattern, anf) in cases {
            let rule = landscape_to_rule(&pattern.parse().unwrap());
            assert_eq!(rule, parse_function(anf, Some(rule.arity())).unwrap(), "{pattern}");
        }
    }

    #[test]
    fn dash_cells_drop_out() {
        let rule = landscape_to_rule(&"1-*0".parse().unwrap());
        assert_eq!(rule, parse_function("x3+~x1*x4", Some(4)).unwrap());
    }

    #[test]
    fn standard_patterns() {
        assert_eq!(standard_landscape(4).unwrap().to_string(), "1*01");
        assert_eq!(standard_landscape(5).unwrap().to_string(), "10*10");
        assert_eq!(standard_landscape(6).unwrap().to_string(), "110*01");
        assert_eq!(standard_landscape(7).unwrap().to_string(), "1110*10");
        assert!(standard_landscape(3).is_err());
    }
}
