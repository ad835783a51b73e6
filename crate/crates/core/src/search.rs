//! Exhaustive enumeration of liftings with balance-based pruning, and
//! classification under essential equivalence.
//!
//! Candidates are enumerated by their ANF coefficient vector over the allowed
//! monomials (never including the full monomial `x_1 ... x_k`, since a lifting
//! has degree below `k`). A candidate survives when
//!
//! 1. it is balanced and `f(1...1) != f(0...0)` (the trivial cycles must be swapped or fixed);
//! 2. the block of `t` consecutive coordinates is balanced over `F2^(k+t-1)` for
//!    `t = 2, ..., min(n - k + 1, 8)`;
//! 3. the induced map on `n` bits is a bijection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::boolfun::{moebius_in_place, AnfPolynomial, BooleanFunction};
use crate::equivalence::essential_orbit;
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::sbox::{induce, mask};

/// Largest block size used by the pruning schedule.
pub const MAX_BLOCK: usize = 8;
/// Largest dimension accepted in `n_list`.
pub const MAX_SEARCH_DIM: usize = 20;

/// Optional restriction on the shape of the ANF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shape {
    #[default]
    Any,
    /// Degree at most two.
    QuadraticOnly,
    /// Exactly one cubic monomial and nothing of degree four or more.
    OneCubicTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConstraints {
    pub k: usize,
    pub n_list: Vec<usize>,
    /// Require `f(0) = 0`, i.e. no constant term.
    pub fix_zero: bool,
    pub max_degree: Option<usize>,
    /// Require `f(1...1) != f(0...0)`; with `fix_zero` this is an odd number of monomials.
    pub require_odd_terms: bool,
    pub shape: Shape,
    /// Drop affine generators.
    pub nonlinear_only: bool,
    /// Allow the unfiltered `k = 5` space (2^30 candidates) or `k = 6`.
    pub allow_large: bool,
    /// Stop after this many candidates and report a resume token.
    pub budget: Option<u64>,
}

impl SearchConstraints {
    pub fn new(k: usize, n_list: Vec<usize>) -> Self {
        SearchConstraints {
            k,
            n_list,
            fix_zero: true,
            max_degree: None,
            require_odd_terms: true,
            shape: Shape::Any,
            nonlinear_only: false,
            allow_large: false,
            budget: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 6 {
            return Err(Error::Domain(format!("search supports 1 <= k <= 6, got {}", self.k)));
        }
        if self.n_list.is_empty() {
            return Err(Error::Domain("n_list is empty".into()));
        }
        for &n in &self.n_list {
            if n < self.k {
                return Err(Error::Dimension { k: self.k, n });
            }
            if n > MAX_SEARCH_DIM {
                return Err(Error::TooLarge { n, max: MAX_SEARCH_DIM });
            }
        }
        let bits = self.allowed_monomials().len() + usize::from(!self.fix_zero);
        let space_bits = match self.shape {
            Shape::OneCubicTerm => bits + 4,
            _ => bits,
        };
        if space_bits > 24 && !self.allow_large {
            return Err(Error::Domain(format!(
                "candidate space of about 2^{space_bits} needs allow_large (use a degree or shape filter)"
            )));
        }
        Ok(())
    }

    fn degree_cap(&self) -> usize {
        let mut cap = self.k.saturating_sub(1);
        if let Some(d) = self.max_degree {
            cap = cap.min(d);
        }
        match self.shape {
            Shape::QuadraticOnly | Shape::OneCubicTerm => cap.min(2),
            Shape::Any => cap,
        }
    }

    /// Free (non-constant) monomials, in canonical order.
    fn allowed_monomials(&self) -> Vec<u32> {
        let cap = self.degree_cap() as u32;
        let mut v: Vec<u32> = (1u32..1 << self.k).filter(|m| m.count_ones() <= cap).collect();
        v.sort_by_key(|&m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
        v
    }

    fn cubic_monomials(&self) -> Vec<u32> {
        if self.shape != Shape::OneCubicTerm || self.max_degree.is_some_and(|d| d < 3) || self.k < 4 {
            return Vec::new();
        }
        let mut v: Vec<u32> = (1u32..1 << self.k).filter(|m| m.count_ones() == 3).collect();
        v.sort_by_key(|&m| std::cmp::Reverse(m.reverse_bits()));
        v
    }
}

/// Candidate space in enumeration order.
struct CandidateSpace {
    k: usize,
    free: Vec<u32>,
    cubic: Vec<u32>,
    constant: bool,
}

impl CandidateSpace {
    fn new(c: &SearchConstraints) -> Self {
        CandidateSpace { k: c.k, free: c.allowed_monomials(), cubic: c.cubic_monomials(), constant: !c.fix_zero }
    }

    fn free_bits(&self) -> usize {
        self.free.len() + usize::from(self.constant)
    }

    fn size(&self) -> u64 {
        let base = 1u64 << self.free_bits();
        if self.cubic.is_empty() {
            base
        } else {
            base * self.cubic.len() as u64
        }
    }

    /// Truth table of candidate `index`.
    fn truth_table(&self, index: u64) -> u64 {
        let bits = self.free_bits();
        let low = index & ((1u64 << bits) - 1);
        let mut coeffs = 0u64;
        for (i, &m) in self.free.iter().enumerate() {
            if low >> i & 1 == 1 {
                coeffs |= 1 << m;
            }
        }
        if self.constant && low >> self.free.len() & 1 == 1 {
            coeffs |= 1;
        }
        if !self.cubic.is_empty() {
            coeffs |= 1 << self.cubic[(index >> bits) as usize];
        }
        let mut words = [coeffs];
        moebius_in_place(&mut words, self.k);
        words[0]
    }
}

/// Filters that do not depend on `n`.
pub fn candidate_filter(f: &BooleanFunction, c: &SearchConstraints) -> bool {
    let k = f.arity();
    if k != c.k || !f.is_balanced() {
        return false;
    }
    let at_zero = f.eval(0);
    if c.fix_zero && at_zero {
        return false;
    }
    if c.require_odd_terms && f.eval(mask(k)) == at_zero {
        return false;
    }
    let degree = f.degree();
    if degree >= k {
        return false;
    }
    if c.max_degree.is_some_and(|d| degree > d) {
        return false;
    }
    if c.nonlinear_only && degree < 2 {
        return false;
    }
    let anf = f.anf();
    match c.shape {
        Shape::Any => true,
        Shape::QuadraticOnly => degree <= 2,
        Shape::OneCubicTerm => degree == 3 && anf.monomials().iter().filter(|m| m.count_ones() == 3).count() == 1,
    }
}

#[inline]
fn eval_tt(tt: u64, x: u32) -> bool {
    tt >> x & 1 == 1
}

/// Balance of `t` consecutive coordinates, read without wrap-around on `k + t - 1` inputs.
fn block_balanced_tt(tt: u64, k: usize, t: usize) -> bool {
    let width = k + t - 1;
    let kmask = mask(k);
    let mut counts = vec![0u32; 1 << t];
    for x in 0u32..1 << width {
        let mut v = 0usize;
        for i in 0..t {
            v |= usize::from(eval_tt(tt, (x >> i) & kmask)) << i;
        }
        counts[v] += 1;
    }
    let expected = 1u32 << (width - t);
    counts.iter().all(|&c| c == expected)
}

/// Block test for `t` consecutive coordinates of the lift of `f` on `n` bits.
pub fn block_balance_prune(f: &BooleanFunction, n: usize, t: usize) -> Result<bool> {
    let k = f.arity();
    if t == 0 || k + t - 1 > n {
        return Err(Error::Precondition(format!("block of {t} windows needs k + t - 1 <= n (k={k}, n={n})")));
    }
    if k + t - 1 > 24 {
        return Err(Error::TooLarge { n: k + t - 1, max: 24 });
    }
    let width = k + t - 1;
    let kmask = mask(k);
    let mut counts = vec![0u32; 1 << t];
    for x in 0u32..1 << width {
        let mut v = 0usize;
        for i in 0..t {
            v |= usize::from(f.eval((x >> i) & kmask)) << i;
        }
        counts[v] += 1;
    }
    let expected = 1u32 << (width - t);
    Ok(counts.iter().all(|&c| c == expected))
}

/// Largest `t <= limit` such that every block size `2..=t` is balanced (1 if none).
fn surviving_block(tt: u64, k: usize, limit: usize) -> usize {
    let mut t = 1;
    while t < limit && block_balanced_tt(tt, k, t + 1) {
        t += 1;
    }
    t
}

fn lift_is_bijective(tt: u64, k: usize, n: usize) -> bool {
    let kmask = u64::from(mask(k));
    let mut seen = vec![0u64; (1usize << n).div_ceil(64)];
    for x in 0u32..1 << n {
        let doubled = u64::from(x) | (u64::from(x) << n);
        let mut y = 0u32;
        for i in 0..n {
            y |= u32::from(eval_tt(tt, ((doubled >> i) & kmask) as u32)) << i;
        }
        let (w, b) = ((y >> 6) as usize, y & 63);
        if seen[w] >> b & 1 == 1 {
            return false;
        }
        seen[w] |= 1 << b;
    }
    true
}

/// One generator found by the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingReport {
    pub generator: BooleanFunction,
    /// Requested dimensions on which the generator lifts to a bijection.
    pub dims: Vec<usize>,
    pub metrics: BTreeMap<usize, MetricsRecord>,
    pub class_id: Option<usize>,
}

impl LiftingReport {
    pub fn anf(&self) -> String {
        self.generator.anf().to_string()
    }
}

/// Per-worker progress: the contiguous candidate range `[start, end)` and the next index to process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerRange {
    pub start: u64,
    pub end: u64,
    pub next: u64,
}

/// Where an interrupted search continues. Text form: one `start end next` line per worker range.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResumeToken {
    pub ranges: Vec<WorkerRange>,
}

impl ResumeToken {
    pub fn is_finished(&self) -> bool {
        self.ranges.iter().all(|r| r.next >= r.end)
    }
}

impl fmt::Display for ResumeToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.ranges {
            writeln!(f, "{} {} {}", r.start, r.end, r.next)?;
        }
        Ok(())
    }
}

impl FromStr for ResumeToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut ranges = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|w| w.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse { pos: lineno, msg: "resume line must hold three integers".into() })?;
            match nums.as_slice() {
                &[start, end, next] if start <= next && next <= end => ranges.push(WorkerRange { start, end, next }),
                _ => {
                    return Err(Error::Parse {
                        pos: lineno,
                        msg: "expected `start end next` with start <= next <= end".into(),
                    })
                }
            }
        }
        Ok(ResumeToken { ranges })
    }
}

/// Candidate count of the search space described by `c`.
pub fn candidate_space_size(c: &SearchConstraints) -> Result<u64> {
    c.validate()?;
    Ok(CandidateSpace::new(c).size())
}

/// Full search; see [`enumerate_liftings_from`] for resumable runs.
pub fn enumerate_liftings(c: &SearchConstraints) -> Result<Vec<LiftingReport>> {
    enumerate_liftings_from(c, None)
}

/// A candidate index with the dimensions it lifts to.
type Hit = (u64, Vec<usize>);

/// Runs the search, optionally continuing from a resume token.
///
/// Results are sorted ANF-lexicographically. When the budget runs out the error
/// carries the partial results and a token for the unfinished ranges.
pub fn enumerate_liftings_from(c: &SearchConstraints, resume: Option<&ResumeToken>) -> Result<Vec<LiftingReport>> {
    c.validate()?;
    let space = CandidateSpace::new(c);
    let total = space.size();
    let ranges: Vec<WorkerRange> = match resume {
        Some(token) => token.ranges.clone(),
        None => {
            let workers = (rayon::current_num_threads() as u64 * 4).clamp(1, total.max(1));
            let chunk = total.div_ceil(workers);
            (0..workers)
                .map(|w| {
                    let start = (w * chunk).min(total);
                    let end = ((w + 1) * chunk).min(total);
                    WorkerRange { start, end, next: start }
                })
                .collect()
        }
    };
    let per_range = c.budget.map(|b| b.div_ceil(ranges.len().max(1) as u64));
    let mut n_sorted = c.n_list.clone();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let limit = n_sorted.iter().map(|&n| (n - c.k + 1).min(MAX_BLOCK)).max().unwrap_or(1);

    let outcomes: Vec<(Vec<Hit>, WorkerRange)> = ranges
        .par_iter()
        .map(|range| {
            let mut found = Vec::new();
            let stop = match per_range {
                Some(b) => range.end.min(range.next.saturating_add(b)),
                None => range.end,
            };
            for index in range.next..stop {
                let tt = space.truth_table(index);
                if !quick_filter(tt, c) {
                    continue;
                }
                let survived = surviving_block(tt, c.k, limit);
                let dims: Vec<usize> = n_sorted
                    .iter()
                    .copied()
                    .filter(|&n| survived >= (n - c.k + 1).min(MAX_BLOCK) && lift_is_bijective(tt, c.k, n))
                    .collect();
                if !dims.is_empty() {
                    found.push((tt, dims));
                }
            }
            (found, WorkerRange { next: stop, ..*range })
        })
        .collect();

    let mut reports = Vec::new();
    let mut token = ResumeToken::default();
    for (found, range) in outcomes {
        token.ranges.push(range);
        for (tt, dims) in found {
            let generator = BooleanFunction::from_u64(c.k, tt)?;
            reports.push(LiftingReport { generator, dims, metrics: BTreeMap::new(), class_id: None });
        }
    }
    reports.sort_by(|a, b| a.generator.anf().cmp(b.generator.anf()));
    if token.is_finished() {
        Ok(reports)
    } else {
        Err(Error::BudgetExceeded { budget: c.budget.unwrap_or(0), partial: reports, resume: token })
    }
}

/// [`candidate_filter`] on a raw truth table, skipping the ANF when possible.
fn quick_filter(tt: u64, c: &SearchConstraints) -> bool {
    let k = c.k;
    let size = 1u32 << k;
    let full = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
    let tt = tt & full;
    if u64::from(tt.count_ones()) != u64::from(size / 2) {
        return false;
    }
    let at_zero = tt & 1 == 1;
    if c.fix_zero && at_zero {
        return false;
    }
    if c.require_odd_terms && eval_tt(tt, size - 1) == at_zero {
        return false;
    }
    if c.nonlinear_only {
        let mut coeffs = [tt];
        moebius_in_place(&mut coeffs, k);
        if (1u32..size).all(|m| m.count_ones() < 2 || coeffs[0] >> m & 1 == 0) {
            return false;
        }
    }
    true
}

/// Essential-equivalence class of search results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialClass {
    pub id: usize,
    /// Orbit member with `f(0) = 0` and the smallest truth table.
    pub representative: BooleanFunction,
    /// Members among the classified reports, ANF-ordered.
    pub members: Vec<BooleanFunction>,
}

/// Groups generators into orbits of input complement, input reversal and output complement.
/// Class ids follow the order of the first member in `reports`.
pub fn classify_essential(reports: &mut [LiftingReport]) -> Vec<EssentialClass> {
    let mut by_rep: BTreeMap<BooleanFunction, usize> = BTreeMap::new();
    let mut classes: Vec<EssentialClass> = Vec::new();
    for report in reports.iter_mut() {
        let rep = essential_representative(&report.generator);
        let id = *by_rep.entry(rep.clone()).or_insert_with(|| {
            classes.push(EssentialClass { id: classes.len(), representative: rep, members: Vec::new() });
            classes.len() - 1
        });
        classes[id].members.push(report.generator.clone());
        report.class_id = Some(id);
    }
    for class in &mut classes {
        class.members.sort_by(|a, b| a.anf().cmp(b.anf()));
    }
    classes
}

/// Orbit representative: the smallest truth table among members with `f(0) = 0`.
/// Output complement guarantees such a member exists.
pub fn essential_representative(f: &BooleanFunction) -> BooleanFunction {
    essential_orbit(f).into_iter().find(|g| !g.eval(0)).expect("orbit is closed under complement")
}

/// Anf strings of a report list, in order.
pub fn anf_list(reports: &[LiftingReport]) -> Vec<String> {
    reports.iter().map(LiftingReport::anf).collect()
}

/// Collects the distinct generators as a set, for comparisons in tests and tools.
pub fn generator_set(reports: &[LiftingReport]) -> BTreeSet<BooleanFunction> {
    reports.iter().map(|r| r.generator.clone()).collect()
}

/// Parses an ANF for `k` variables; convenience for tables and tests.
pub fn rule(text: &str, k: usize) -> Result<BooleanFunction> {
    Ok(AnfPolynomial::parse_with_arity(text, k)?.to_function())
}

/// Confirms every claimed dimension of every report with a fresh direct check.
pub fn verify_reports(reports: &[LiftingReport]) -> Result<bool> {
    for r in reports {
        for &n in &r.dims {
            if !induce(&r.generator, n)?.is_bijection()? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbox::cycle_criterion_bijective;

    fn three_variable_candidates() -> Vec<BooleanFunction> {
        let c = SearchConstraints::new(3, vec![3]);
        (0..256u64).map(|t| BooleanFunction::from_u64(3, t).unwrap()).filter(|f| candidate_filter(f, &c)).collect()
    }

    #[test]
    fn twenty_three_variable_candidates() {
        let cands = three_variable_candidates();
        assert_eq!(cands.len(), 20);
        let listed = [
            "x2",
            "x1*x3+x2+x3",
            "x2*x3+x1+x3",
            "x1*x2+x1*x3+x2*x3+x1+x2",
            "x1*x3+x2*x3+x1",
            "x1",
            "x1*x2+x1*x3+x2*x3+x2+x3",
            "x1*x2+x2+x3",
            "x3",
            "x1*x2+x1*x3+x2",
            "x1*x2+x1*x3+x2*x3+x1+x3",
            "x1*x2+x2*x3+x1",
            "x1*x2+x1+x3",
            "x2*x3+x1+x2",
            "x1*x2+x2*x3+x3",
            "x1+x2+x3",
            "x1*x2+x1*x3+x2*x3",
            "x1*x3+x1+x2",
            "x1*x2+x1*x3+x3",
            "x1*x3+x2*x3+x2",
        ];
        let listed: BTreeSet<BooleanFunction> = listed.iter().map(|s| rule(s, 3).unwrap()).collect();
        assert_eq!(cands.into_iter().collect::<BTreeSet<_>>(), listed);
    }

    #[test]
    fn full_monomial_rejected_projection_accepted() {
        let c = SearchConstraints::new(4, vec![4]);
        assert!(!candidate_filter(&rule("x1*x2*x3*x4", 4).unwrap(), &c));
        assert!(candidate_filter(&rule("x1", 4).unwrap(), &c));
    }

    #[test]
    fn block_pruning_twenty_to_ten_to_eight() {
        let cands = three_variable_candidates();
        let t2: Vec<_> = cands.iter().filter(|f| block_balance_prune(f, 4, 2).unwrap()).collect();
        assert_eq!(t2.len(), 10);
        let t5: Vec<_> = t2.iter().filter(|f| block_balance_prune(f, 7, 5).unwrap()).collect();
        assert_eq!(t5.len(), 8);
        // The two casualties already have unequal frequencies at t = 3, although
        // every 3- and 4-bit value still occurs; at t = 5 only 30 of 32 values occur.
        let t3: Vec<_> = t2.iter().filter(|f| block_balance_prune(f, 5, 3).unwrap()).collect();
        assert_eq!(t3.len(), 8);
        for f in t2.iter().filter(|f| !t5.contains(f)) {
            let image = |t: usize| {
                (0u32..1 << (t + 2))
                    .map(|x| (0..t).fold(0u32, |v, i| v | u32::from(f.eval((x >> i) & 7)) << i))
                    .collect::<BTreeSet<_>>()
                    .len()
            };
            assert_eq!((image(3), image(4), image(5)), (8, 16, 30));
        }
        for t in 1..=6 {
            assert!(block_balance_prune(&rule("x1", 3).unwrap(), 8, t).unwrap());
        }
        assert!(block_balance_prune(&rule("x1", 3).unwrap(), 4, 3).is_err());
    }

    #[test]
    fn three_five_search() {
        let reports = enumerate_liftings(&SearchConstraints::new(3, vec![5])).unwrap();
        assert_eq!(reports.len(), 8);
        assert!(verify_reports(&reports).unwrap());
    }

    #[test]
    fn search_is_sorted_and_resumable() {
        let mut c = SearchConstraints::new(4, vec![6, 7]);
        let full = enumerate_liftings(&c).unwrap();
        let mut sorted = full.clone();
        sorted.sort_by(|a, b| a.generator.anf().cmp(b.generator.anf()));
        assert_eq!(full, sorted);

        c.budget = Some(1000);
        let mut collected = Vec::new();
        let mut token: Option<ResumeToken> = None;
        let mut rounds = 0;
        loop {
            rounds += 1;
            match enumerate_liftings_from(&c, token.as_ref()) {
                Ok(rest) => {
                    collected.extend(rest);
                    break;
                }
                Err(Error::BudgetExceeded { partial, resume, .. }) => {
                    collected.extend(partial);
                    let text = resume.to_string();
                    token = Some(text.parse().unwrap());
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(rounds > 1);
        collected.sort_by(|a, b| a.generator.anf().cmp(b.generator.anf()));
        assert_eq!(collected, full);
    }

    #[test]
    fn reports_pass_independent_cycle_check() {
        let reports = enumerate_liftings(&SearchConstraints::new(4, vec![5, 6, 7, 8])).unwrap();
        for r in &reports {
            assert!(r.generator.degree() < 4);
            for &n in &r.dims {
                assert!(cycle_criterion_bijective(&induce(&r.generator, n).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn unfixed_search_doubles() {
        let fixed = enumerate_liftings(&SearchConstraints::new(4, vec![6])).unwrap();
        let mut c = SearchConstraints::new(4, vec![6]);
        c.fix_zero = false;
        let all = enumerate_liftings(&c).unwrap();
        assert_eq!(all.len(), 2 * fixed.len());
    }

    #[test]
    fn resume_token_text() {
        let t: ResumeToken = "0 10 4\n10 20 20\n".parse().unwrap();
        assert_eq!(t.ranges.len(), 2);
        assert!(!t.is_finished());
        assert_eq!(t.to_string(), "0 10 4\n10 20 20\n");
        assert!("0 10".parse::<ResumeToken>().is_err());
        assert!("5 10 4".parse::<ResumeToken>().is_err());
    }

    #[test]
    fn large_space_needs_opt_in() {
        let c = SearchConstraints::new(5, vec![5]);
        assert!(enumerate_liftings(&c).is_err());
        assert!(SearchConstraints::new(4, vec![3]).validate().is_err());
    }

    #[test]
    fn essential_classes_of_three_five() {
        let mut c = SearchConstraints::new(3, vec![5]);
        c.nonlinear_only = true;
        let mut reports = enumerate_liftings(&c).unwrap();
        assert_eq!(reports.len(), 4);
        let classes = classify_essential(&mut reports);
        assert_eq!(classes.len(), 1);
        assert!(reports.iter().all(|r| r.class_id == Some(0)));
    }
}
