//! Equivalence relations between shift-invariant maps.
//!
//! A witness `(A, B, e, d)` certifies `F(Ax + e) = B G(x) + d` where `A`, `B`
//! are invertible k-circulants and `e`, `d` are either all zeros or all ones.
//! Strong affine equivalence is the case `B = I`.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfun::BooleanFunction;
use crate::circulant::{invertible_cyclic_matrices, BitMatrix, CirculantKMatrix};
use crate::error::{Error, Result};
use crate::sbox::{mask, rotate, LookupTable, RSBox};

/// Largest dimension for witness searches.
pub const MAX_EQUIV_DIM: usize = 8;
/// Largest dimension for intertwiner counts.
pub const MAX_INTERTWINER_DIM: usize = 6;
/// Largest dimension for the GL-based affine comparison.
pub const MAX_AFFINE_DIM: usize = 4;

/// Orbit of `f` under input complement, input reversal and output complement.
/// Iteration order is by truth table, so the first element is the class representative.
pub fn essential_orbit(f: &BooleanFunction) -> BTreeSet<BooleanFunction> {
    let k = f.arity();
    let all = mask(k);
    let reverse = move |x: u32| x.reverse_bits() >> (32 - k);
    let mut orbit = BTreeSet::new();
    for flip in [false, true] {
        for rev in [false, true] {
            let g = f.compose_input(|x| {
                let x = if flip { x ^ all } else { x };
                if rev {
                    reverse(x)
                } else {
                    x
                }
            });
            orbit.insert(g.complement());
            orbit.insert(g);
        }
    }
    orbit
}

/// `g_b(x) = sum_j b_j g(S^(1-j) x) + d`, the first coordinate of `BG(x) + d`
/// when `g` is the first coordinate of `G`.
pub fn g_b_transform(g: &BooleanFunction, b_row: u64, d_const: bool) -> Result<BooleanFunction> {
    let n = g.arity();
    if n == 0 || n > 32 || b_row >> n != 0 {
        return Err(Error::Domain(format!("b_row must fit in {n} bits")));
    }
    let mut acc = if d_const { BooleanFunction::one(n)? } else { BooleanFunction::zero(n)? };
    for j in 0..n {
        if b_row >> j & 1 == 1 {
            let shifted = g.compose_input(|x| rotate(x, -(j as i64), n));
            acc = acc.xor(&shifted)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Essential,
    StrongAffine,
    Cyclic,
}

/// `F(Ax + e) = B G(x) + d` with `e`, `d` all zeros or all ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub kind: WitnessKind,
    pub n: usize,
    pub a_step: usize,
    pub a_row: u64,
    pub b_step: usize,
    pub b_row: u64,
    pub e_const: bool,
    pub d_const: bool,
}

impl EquivalenceWitness {
    pub fn a(&self) -> Result<CirculantKMatrix> {
        CirculantKMatrix::new(self.n, self.a_step, self.a_row)
    }

    pub fn b(&self) -> Result<CirculantKMatrix> {
        CirculantKMatrix::new(self.n, self.b_step, self.b_row)
    }

    /// Checks the defining identity on every input.
    pub fn replay(&self, f: &LookupTable, g: &LookupTable) -> Result<bool> {
        let n = self.n;
        if f.n() != n || g.n() != n {
            return Ok(false);
        }
        let (a, b) = (self.a()?, self.b()?);
        if !a.is_invertible() || !b.is_invertible() {
            return Ok(false);
        }
        let all = u64::from(mask(n));
        let e = if self.e_const { all } else { 0 };
        let d = if self.d_const { all } else { 0 };
        Ok((0..1u64 << n).all(|x| {
            let lhs = f.get((a.mul_vec(x) ^ e) as u32);
            let rhs = b.mul_vec(u64::from(g.get(x as u32))) ^ d;
            u64::from(lhs) == rhs
        }))
    }
}

fn check_dim(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooLarge { n, max });
    }
    Ok(())
}

fn same_dim(f: &LookupTable, g: &LookupTable) -> Result<usize> {
    if f.n() != g.n() {
        return Err(Error::Domain(format!("dimensions differ: {} and {}", f.n(), g.n())));
    }
    Ok(f.n())
}

/// For fixed `A`, `e`, `d`, the only candidate `B` with `B G(x) = F(Ax + e) + d`
/// when `G` is a bijection, returned as a k-circulant if it is one.
fn derive_b(f: &LookupTable, g_inv: &LookupTable, a: &CirculantKMatrix, e: u64, d: u64) -> Option<CirculantKMatrix> {
    let n = f.n();
    let h = |y: u32| u64::from(f.get((a.mul_vec(u64::from(g_inv.get(y))) ^ e) as u32)) ^ d;
    if h(0) != 0 {
        return None;
    }
    let mut rows = vec![0u64; n];
    for j in 0..n {
        let col = h(1 << j);
        for (i, row) in rows.iter_mut().enumerate() {
            *row |= (col >> i & 1) << j;
        }
    }
    let m = BitMatrix::new(n, rows).ok()?;
    let step = m.circulant_step()?;
    let b = CirculantKMatrix::new(n, step, m.rows()[0]).ok()?;
    b.is_invertible().then_some(b)
}

/// Searches invertible k-circulant pairs `(A, B)` and constants.
/// Returns the first witness in the order (A step, A row, e, d, B).
pub fn cyclic_equivalent_tables(f: &LookupTable, g: &LookupTable) -> Result<Option<EquivalenceWitness>> {
    let n = same_dim(f, g)?;
    check_dim(n, MAX_EQUIV_DIM)?;
    let mats = invertible_cyclic_matrices(n)?;
    let all = u64::from(mask(n));
    let g_inv = g.inverse().ok();
    let found = mats.par_iter().find_map_first(|a| {
        for (e_const, d_const) in [(false, false), (false, true), (true, false), (true, true)] {
            let (e, d) = (if e_const { all } else { 0 }, if d_const { all } else { 0 });
            let candidates: Vec<CirculantKMatrix> = match &g_inv {
                Some(inv) => derive_b(f, inv, a, e, d).into_iter().collect(),
                None => mats.clone(),
            };
            for b in candidates {
                let w = EquivalenceWitness {
                    kind: WitnessKind::Cyclic,
                    n,
                    a_step: a.step(),
                    a_row: a.first_row(),
                    b_step: b.step(),
                    b_row: b.first_row(),
                    e_const,
                    d_const,
                };
                if w.replay(f, g).unwrap_or(false) {
                    return Some(w);
                }
            }
        }
        None
    });
    Ok(found)
}

/// Cyclic equivalence of two induced maps.
pub fn cyclic_equivalent(f: &RSBox, g: &RSBox) -> Result<Option<EquivalenceWitness>> {
    check_dim(f.n(), MAX_EQUIV_DIM)?;
    cyclic_equivalent_tables(f.lookup_table()?, g.lookup_table()?)
}

/// `F(Ax + e) = G(x) + d` with `A` an invertible k-circulant.
pub fn strong_affine_equivalent_tables(f: &LookupTable, g: &LookupTable) -> Result<Option<EquivalenceWitness>> {
    let n = same_dim(f, g)?;
    check_dim(n, MAX_EQUIV_DIM)?;
    let mats = invertible_cyclic_matrices(n)?;
    let found = mats.par_iter().find_map_first(|a| {
        [(false, false), (false, true), (true, false), (true, true)].into_iter().find_map(|(e_const, d_const)| {
            let w = EquivalenceWitness {
                kind: WitnessKind::StrongAffine,
                n,
                a_step: a.step(),
                a_row: a.first_row(),
                b_step: 1,
                b_row: 1,
                e_const,
                d_const,
            };
            w.replay(f, g).unwrap_or(false).then_some(w)
        })
    });
    Ok(found)
}

pub fn strong_affine_equivalent(f: &RSBox, g: &RSBox) -> Result<Option<EquivalenceWitness>> {
    check_dim(f.n(), MAX_EQUIV_DIM)?;
    strong_affine_equivalent_tables(f.lookup_table()?, g.lookup_table()?)
}

/// Witness for essential equivalence of two induced maps with generators of equal arity.
///
/// Input reversal of the rule shows up on the map as `F(Rx) = P G(x)`, where `R`
/// reverses the coordinates and `P` is `R` followed by a shift; both are
/// `(n-1)`-circulants.
pub fn essential_equivalent(f: &RSBox, g: &RSBox) -> Result<Option<EquivalenceWitness>> {
    let n = same_dim(f.lookup_table()?, g.lookup_table()?)?;
    if f.k() != g.k() {
        return Ok(None);
    }
    if !essential_orbit(g.generator()).contains(f.generator()) {
        return Ok(None);
    }
    let k = g.k();
    let (ft, gt) = (f.lookup_table()?, g.lookup_table()?);
    let reversal_step = if n == 1 { 1 } else { n - 1 };
    let pairs = [(1usize, 1u64, 1usize, 1u64), (reversal_step, 1 << (n - 1), reversal_step, 1 << ((n - k) % n))];
    for (a_step, a_row, b_step, b_row) in pairs {
        for (e_const, d_const) in [(false, false), (false, true), (true, false), (true, true)] {
            let w =
                EquivalenceWitness { kind: WitnessKind::Essential, n, a_step, a_row, b_step, b_row, e_const, d_const };
            if w.replay(ft, gt)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// Counts pairs `(A, B)` of invertible circulants (step 1) with `F A = B F`.
pub fn intertwiner_count(f: &RSBox) -> Result<BigUint> {
    intertwiner_count_with(f.lookup_table()?, false)
}

/// Same as [`intertwiner_count`] but over k-circulants of every invertible step.
pub fn intertwiner_count_all_steps(f: &RSBox) -> Result<BigUint> {
    intertwiner_count_with(f.lookup_table()?, true)
}

pub fn intertwiner_pairs(t: &LookupTable, all_steps: bool) -> Result<Vec<(CirculantKMatrix, CirculantKMatrix)>> {
    let n = t.n();
    check_dim(n, MAX_INTERTWINER_DIM)?;
    let mats: Vec<CirculantKMatrix> =
        invertible_cyclic_matrices(n)?.into_iter().filter(|m| all_steps || m.step() == 1 || n == 1).collect();
    let inv = t.inverse().ok();
    let intertwines = |a: &CirculantKMatrix, b: &CirculantKMatrix| {
        (0..1u64 << n).all(|x| u64::from(t.get(a.mul_vec(x) as u32)) == b.mul_vec(u64::from(t.get(x as u32))))
    };
    Ok(mats
        .par_iter()
        .flat_map_iter(|a| {
            let bs: Vec<CirculantKMatrix> = match &inv {
                Some(inv) => derive_b(t, inv, a, 0, 0).into_iter().filter(|b| mats.contains(b)).collect(),
                None => mats.clone(),
            };
            bs.into_iter().filter(|b| intertwines(a, b)).map(|b| (*a, b)).collect::<Vec<_>>()
        })
        .collect())
}

fn intertwiner_count_with(t: &LookupTable, all_steps: bool) -> Result<BigUint> {
    Ok(BigUint::from(intertwiner_pairs(t, all_steps)?.len()))
}

/// Every invertible `n x n` matrix over F2, as row lists.
pub fn general_linear_group(n: usize) -> Result<Vec<BitMatrix>> {
    check_dim(n, MAX_AFFINE_DIM)?;
    let size = 1u64 << n;
    let mut out = Vec::new();
    let mut rows = vec![0u64; n];
    fn rec(i: usize, n: usize, size: u64, rows: &mut Vec<u64>, out: &mut Vec<BitMatrix>) {
        if i == n {
            let m = BitMatrix::new(n, rows.clone()).expect("valid shape");
            if m.rank() == n {
                out.push(m);
            }
            return;
        }
        for r in 1..size {
            rows[i] = r;
            rec(i + 1, n, size, rows, out);
        }
    }
    rec(0, n, size, &mut rows, &mut out);
    Ok(out)
}

/// `F(A1 x + c1) = A2 G(x) + c2` for some affine pair over the full group.
/// Needs `G` bijective; intended for `n <= 4`.
pub fn affine_equivalent(f: &LookupTable, g: &LookupTable, gl: &[BitMatrix]) -> Result<bool> {
    let n = same_dim(f, g)?;
    check_dim(n, MAX_AFFINE_DIM)?;
    let g_inv = g.inverse()?;
    let size = 1u64 << n;
    Ok(gl.par_iter().any(|a1| {
        (0..size).any(|c1| {
            // H(y) = F(A1 G^{-1}(y) + c1) must be affine.
            let h = |y: u64| u64::from(f.get((a1.mul_vec(u64::from(g_inv.get(y as u32))) ^ c1) as u32));
            let c2 = h(0);
            let cols: Vec<u64> = (0..n).map(|j| h(1 << j) ^ c2).collect();
            (0..size).all(|y| {
                let lin = (0..n).filter(|&j| y >> j & 1 == 1).fold(0u64, |acc, j| acc ^ cols[j]);
                h(y) == lin ^ c2
            })
        })
    }))
}

/// Outcome of comparing affine and cyclic classes on a list of bijections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineCyclicReport {
    pub n: usize,
    pub affine_classes: Vec<Vec<usize>>,
    pub cyclic_classes: Vec<Vec<usize>>,
    /// Pairs that are affine but not cyclically equivalent.
    pub disagreements: Vec<(usize, usize)>,
}

impl AffineCyclicReport {
    pub fn agree(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn classes_by(count: usize, related: impl Fn(usize, usize) -> Result<bool>) -> Result<Vec<Vec<usize>>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..count {
        for class in classes.iter_mut() {
            if related(class[0], i)? {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }
    Ok(classes)
}

/// Partitions `tables` by full affine equivalence and by cyclic equivalence and reports where they differ.
pub fn affine_vs_cyclic(tables: &[LookupTable]) -> Result<AffineCyclicReport> {
    let n = tables.first().map(LookupTable::n).ok_or_else(|| Error::Domain("empty input".into()))?;
    check_dim(n, MAX_AFFINE_DIM)?;
    let gl = general_linear_group(n)?;
    let affine_classes = classes_by(tables.len(), |i, j| affine_equivalent(&tables[i], &tables[j], &gl))?;
    let cyclic_classes =
        classes_by(tables.len(), |i, j| Ok(cyclic_equivalent_tables(&tables[i], &tables[j])?.is_some()))?;
    let class_of = |classes: &[Vec<usize>], i: usize| classes.iter().position(|c| c.contains(&i));
    let mut disagreements = Vec::new();
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            if class_of(&affine_classes, i) == class_of(&affine_classes, j)
                && class_of(&cyclic_classes, i) != class_of(&cyclic_classes, j)
            {
                disagreements.push((i, j));
            }
        }
    }
    Ok(AffineCyclicReport { n, affine_classes, cyclic_classes, disagreements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfun::parse_function;
    use crate::circulant::count_invertible_circulant;
    use crate::metrics::metrics_record;
    use crate::sbox::{induce, inv_set};
    use crate::search::{enumerate_liftings, SearchConstraints};

    fn rule(text: &str, k: usize) -> BooleanFunction {
        parse_function(text, Some(k)).unwrap()
    }

    fn table_of(map: impl Fn(u32) -> u32 + Sync, n: usize) -> LookupTable {
        LookupTable::from_fn(n, map).unwrap()
    }

    /// `x -> B G(A^{-1}(x + e)) + d`, which satisfies `F(Ax + e) = B G(x) + d`.
    fn conjugate(g: &LookupTable, a: &CirculantKMatrix, b: &CirculantKMatrix, e: bool, d: bool) -> LookupTable {
        let n = g.n();
        let all = u64::from(mask(n));
        let a_inv = a.inverse().unwrap();
        let (e, d) = (if e { all } else { 0 }, if d { all } else { 0 });
        table_of(|x| (b.mul_vec(u64::from(g.get(a_inv.mul_vec(u64::from(x) ^ e) as u32))) ^ d) as u32, n)
    }

    #[test]
    fn orbit_sizes() {
        let lin = rule("x1+x2+x3", 3);
        let orbit = essential_orbit(&lin);
        assert_eq!(orbit.len(), 2);
        for f in [rule("x1+x3+x1*x2", 3), rule("x4+x1*x2+x1*x2*x3", 5), lin.clone()] {
            let orbit = essential_orbit(&f);
            assert_eq!(8 % orbit.len(), 0);
            for g in &orbit {
                assert_eq!(&essential_orbit(g), &orbit);
            }
        }
    }

    #[test]
    fn chi_orbit_holds_the_nonlinear_three_five_liftings() {
        let mut c = SearchConstraints::new(3, vec![5]);
        c.nonlinear_only = true;
        let reports = enumerate_liftings(&c).unwrap();
        let orbit = essential_orbit(&rule("x1+x3+x1*x2", 3));
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| orbit.contains(&r.generator)));
    }

    #[test]
    fn g_b_trivial_rows() {
        let g = rule("x1+x3+x1*x2", 3).extend_arity(5).unwrap();
        assert_eq!(g_b_transform(&g, 1, false).unwrap(), g);
        assert_eq!(g_b_transform(&g, 0, true).unwrap(), BooleanFunction::one(5).unwrap());
    }

    #[test]
    fn g_b_of_two_shifts() {
        // S^{-1} on the first coordinate of chi gives the second coordinate x2 + x4 + x2 x3.
        let g = rule("x1+x3+x1*x2", 3).extend_arity(5).unwrap();
        let expected = parse_function("x1+x2+x3+x4+x1*x2+x2*x3", Some(5)).unwrap();
        assert_eq!(g_b_transform(&g, 0b11, false).unwrap(), expected);
    }

    #[test]
    fn g_b_matches_matrix_product() {
        let f = rule("x2+x1*x3+x2*x4+x1*x5+x3*x5", 5);
        for n in [5usize, 6, 7, 8] {
            let sbox = induce(&f, n).unwrap();
            let g = f.extend_arity(n).unwrap();
            for row in [1u64, 3, 5, 0b1011, (1 << n) - 2] {
                let b = CirculantKMatrix::circulant(n, row).unwrap();
                for d in [false, true] {
                    let gb = g_b_transform(&g, row, d).unwrap();
                    for x in 0..1u32 << n {
                        let bg = b.mul_vec(u64::from(sbox.apply(x))) & 1;
                        assert_eq!(gb.eval(x), (bg == 1) ^ d);
                    }
                }
            }
        }
    }

    #[test]
    fn self_equivalence_is_identity_witness() {
        let f = induce(&rule("x1+x3+x1*x2", 3), 5).unwrap();
        let w = cyclic_equivalent(&f, &f).unwrap().unwrap();
        assert_eq!((w.a_step, w.a_row, w.b_step, w.b_row, w.e_const, w.d_const), (1, 1, 1, 1, false, false));
        let s = strong_affine_equivalent(&f, &f).unwrap().unwrap();
        assert_eq!((s.a_row, s.e_const, s.d_const), (1, false, false));
    }

    #[test]
    fn chi_and_its_complement_conjugate() {
        let chi = rule("x1+x3+x1*x2", 3);
        let conj = chi.compose_input(|x| x ^ 7);
        let (f, g) = (induce(&chi, 5).unwrap(), induce(&conj, 5).unwrap());
        let w = cyclic_equivalent(&f, &g).unwrap().unwrap();
        assert!(w.replay(f.lookup_table().unwrap(), g.lookup_table().unwrap()).unwrap());
    }

    #[test]
    fn essential_witnesses_replay() {
        let mut c = SearchConstraints::new(4, vec![6]);
        c.nonlinear_only = true;
        let reports = enumerate_liftings(&c).unwrap();
        for r in reports.iter().take(6) {
            for g in essential_orbit(&r.generator) {
                let (fs, gs) = (induce(&r.generator, 6).unwrap(), induce(&g, 6).unwrap());
                let w = essential_equivalent(&fs, &gs).unwrap().expect("orbit member");
                assert!(w.replay(fs.lookup_table().unwrap(), gs.lookup_table().unwrap()).unwrap());
                let cyc = cyclic_equivalent(&fs, &gs).unwrap().expect("essential implies cyclic");
                assert!(cyc.replay(fs.lookup_table().unwrap(), gs.lookup_table().unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn identity_not_equivalent_to_nonlinear() {
        let id = induce(&rule("x1", 1), 5).unwrap();
        let chi = induce(&rule("x1+x3+x1*x2", 3), 5).unwrap();
        assert_eq!(cyclic_equivalent(&id, &chi).unwrap(), None);
        assert_eq!(strong_affine_equivalent(&id, &chi).unwrap(), None);
    }

    #[test]
    fn constructed_pairs_are_recovered() {
        let chi = induce(&rule("x1+x3+x1*x2", 3), 6).unwrap();
        let g = chi.lookup_table().unwrap();
        let mats = invertible_cyclic_matrices(6).unwrap();
        for (i, a) in mats.iter().enumerate().filter(|(i, _)| i % 37 == 0) {
            let b = mats[(i * 7 + 3) % mats.len()];
            let f = conjugate(g, a, &b, i % 2 == 0, i % 3 == 0);
            let w = cyclic_equivalent_tables(&f, g).unwrap().expect("constructed pair");
            assert!(w.replay(&f, g).unwrap());
            let f_strong = conjugate(g, a, &CirculantKMatrix::identity(6), i % 2 == 1, false);
            let s = strong_affine_equivalent_tables(&f_strong, g).unwrap().expect("constructed pair");
            assert!(s.replay(&f_strong, g).unwrap());
        }
    }

    #[test]
    fn witness_json_round_trip() {
        let f = induce(&rule("x1+x3+x1*x2", 3), 5).unwrap();
        let w = cyclic_equivalent(&f, &f).unwrap().unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"kind\":\"cyclic\""));
        assert_eq!(serde_json::from_str::<EquivalenceWitness>(&text).unwrap(), w);
    }

    #[test]
    fn intertwiners_of_identity() {
        let id = induce(&rule("x1", 1), 3).unwrap();
        assert_eq!(intertwiner_count(&id).unwrap(), BigUint::from(3u32));
        assert_eq!(intertwiner_count_all_steps(&id).unwrap(), BigUint::from(6u32));
        for n in 1..=5u64 {
            let id = induce(&rule("x1", 1), n as usize).unwrap();
            assert_eq!(intertwiner_count(&id).unwrap(), count_invertible_circulant(n).unwrap());
        }
    }

    #[test]
    fn intertwiners_form_a_group() {
        let f = induce(&rule("x1+x3+x1*x2", 3), 5).unwrap();
        let t = f.lookup_table().unwrap();
        let pairs = intertwiner_pairs(t, true).unwrap();
        assert!(pairs.len() >= 5);
        let set: BTreeSet<_> =
            pairs.iter().map(|(a, b)| (a.to_matrix().rows().to_vec(), b.to_matrix().rows().to_vec())).collect();
        for (a1, b1) in &pairs {
            for (a2, b2) in &pairs {
                let a = a1.to_matrix().mul(&a2.to_matrix());
                let b = b1.to_matrix().mul(&b2.to_matrix());
                assert!(set.contains(&(a.rows().to_vec(), b.rows().to_vec())));
            }
        }
        for i in 0..5 {
            let s = CirculantKMatrix::circulant(5, 1 << i).unwrap();
            assert!(pairs.contains(&(s, s)));
        }
    }

    /// Brute force over all affine maps: shift-invariant ones strongly equivalent to the identity.
    #[test]
    fn class_of_identity() {
        for n in [3usize, 4] {
            let gl = general_linear_group(n).unwrap();
            let id = LookupTable::identity(n).unwrap();
            let mut count = 0u64;
            for m in &gl {
                for c in 0..1u64 << n {
                    let t = table_of(|x| (m.mul_vec(u64::from(x)) ^ c) as u32, n);
                    if t.is_shift_invariant() {
                        count += 1;
                        assert!(strong_affine_equivalent_tables(&t, &id).unwrap().is_some());
                    }
                }
            }
            assert_eq!(BigUint::from(count), count_invertible_circulant(n as u64).unwrap() * 2u32);
        }
    }

    #[test]
    fn general_linear_group_sizes() {
        assert_eq!(general_linear_group(2).unwrap().len(), 6);
        assert_eq!(general_linear_group(3).unwrap().len(), 168);
    }

    #[test]
    fn shift_invariance_transfers() {
        let n = 5;
        let base = induce(&rule("x1+x3+x1*x2", 3), n).unwrap().lookup_table().unwrap().clone();
        let s = CirculantKMatrix::circulant(n, 1 << 1).unwrap();
        // S^j G is (1 + j)-shift-invariant
        let gs: Vec<LookupTable> = (0..3).map(|j| table_of(|x| rotate(base.get(x), j, n), n)).collect();
        let mats = invertible_cyclic_matrices(n).unwrap();
        for g in &gs {
            for (i, a) in mats.iter().enumerate().filter(|(i, _)| i % 11 == 0) {
                let b = mats.iter().filter(|m| m.step() == a.step()).nth(i % 7).unwrap();
                let f = conjugate(g, a, b, i % 2 == 0, false);
                for m in 1..=n {
                    assert_eq!(f.is_k_shift_invariant(m), g.is_k_shift_invariant(m), "m={m}");
                }
            }
        }
        assert!(s.is_invertible());
    }

    #[test]
    fn essential_equivalence_preserves_invariants() {
        let mut c = SearchConstraints::new(4, vec![7]);
        c.nonlinear_only = true;
        let reports = enumerate_liftings(&c).unwrap();
        for r in reports.iter().take(4) {
            let base_inv = inv_set(&r.generator, 12).unwrap();
            let base_metrics = metrics_record(&induce(&r.generator, 7).unwrap()).unwrap();
            for g in essential_orbit(&r.generator) {
                assert_eq!(inv_set(&g, 12).unwrap(), base_inv);
                assert_eq!(metrics_record(&induce(&g, 7).unwrap()).unwrap(), base_metrics);
            }
        }
    }

    #[test]
    fn affine_harness_small() {
        let mut tables = Vec::new();
        for text in ["x1", "x1+x2+x3", "x2", "x1+x3+x1*x2", "x2+x1*x3+x2*x3"] {
            let sbox = induce(&rule(text, 3), 3).unwrap();
            if sbox.is_bijection().unwrap() {
                tables.push(sbox.lookup_table().unwrap().clone());
            }
        }
        let report = affine_vs_cyclic(&tables).unwrap();
        assert!(report.affine_classes.len() <= report.cyclic_classes.len());
        let flat: usize = report.cyclic_classes.iter().map(Vec::len).sum();
        assert_eq!(flat, tables.len());
    }
}
