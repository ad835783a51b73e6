//! Table generators. Every table is plain TSV with a header line.

use std::fmt::Write;

use num_bigint::BigUint;
use rsbox::circulant::{count_invertible_circulant, count_shift_invariant_bijections, orbit_profile};
use rsbox::metrics::metrics_record;
use rsbox::search::{classify_essential, enumerate_liftings, SearchConstraints, Shape};
use rsbox::{induce, inv_set, parse_function, BooleanFunction, Error, Result};

pub const NAMES: [&str; 7] = ["table1", "table2", "table3", "table4", "table5", "oeis", "table2-right"];

/// Built-in golden copy of a table.
pub fn golden(name: &str) -> Option<&'static str> {
    Some(match name {
        "table1" => include_str!("../golden/table1.tsv"),
        "table2" => include_str!("../golden/table2.tsv"),
        "table2-right" => include_str!("../golden/table2-right.tsv"),
        "table3" => include_str!("../golden/table3.tsv"),
        "table4" => include_str!("../golden/table4.tsv"),
        "table5" => include_str!("../golden/table5.tsv"),
        "oeis" => include_str!("../golden/oeis.tsv"),
        _ => return None,
    })
}

/// Output of a table run; `complete` is false when a budget cut it short.
pub struct TableOutput {
    pub text: String,
    pub complete: bool,
}

pub fn render(name: &str, budget: Option<u64>) -> Result<TableOutput> {
    let text = match name {
        "table1" => table1()?,
        "table2" => return table2_left(budget),
        "table2-right" => return table2_right(budget),
        "table3" => table3()?,
        "table4" => table4()?,
        "table5" => table5()?,
        "oeis" => oeis()?,
        other => return Err(Error::Domain(format!("unknown table {other}; expected one of {}", NAMES.join(", ")))),
    };
    Ok(TableOutput { text, complete: true })
}

fn table1() -> Result<String> {
    let mut out = String::from("n\tdecomposition\tbijections\n");
    for n in 1..=7u64 {
        let mut factors = Vec::new();
        for (d, count) in orbit_profile(n) {
            let count: u64 = count.try_into().expect("small orbit count");
            for j in (1..=count).rev() {
                factors.push((d * j).to_string());
            }
        }
        writeln!(out, "{n}\t{}\t{}", factors.join("*"), count_shift_invariant_bijections(n)?).unwrap();
    }
    Ok(out)
}

fn degree_columns(
    k: usize,
    ns: std::ops::RangeInclusive<usize>,
    max_degree: Option<usize>,
    budget: Option<u64>,
) -> Result<(Vec<rsbox::LiftingReport>, bool)> {
    let mut c = SearchConstraints::new(k, ns.collect());
    c.max_degree = max_degree;
    c.budget = budget;
    match enumerate_liftings(&c) {
        Ok(r) => Ok((r, true)),
        Err(Error::BudgetExceeded { partial, .. }) => Ok((partial, false)),
        Err(e) => Err(e),
    }
}

fn table2_left(budget: Option<u64>) -> Result<TableOutput> {
    let (reports, complete) = degree_columns(4, 4..=15, None, budget)?;
    let mut text = String::from("n\tliftings\tdeg<=1\tdeg<=2\n");
    for n in 4..=15 {
        let on_n: Vec<_> = reports.iter().filter(|r| r.dims.contains(&n)).collect();
        let d1 = on_n.iter().filter(|r| r.generator.degree() <= 1).count();
        let d2 = on_n.iter().filter(|r| r.generator.degree() <= 2).count();
        writeln!(text, "{n}\t{}\t{d1}\t{d2}", on_n.len()).unwrap();
    }
    if !complete {
        text.push_str("# partial: search budget exceeded\n");
    }
    Ok(TableOutput { text, complete })
}

/// `k = 5`: the total is known only for `n = 5` (half the shift-invariant bijections).
fn table2_right(budget: Option<u64>) -> Result<TableOutput> {
    let (reports, complete) = degree_columns(5, 5..=15, Some(2), budget)?;
    let mut text = String::from("n\tliftings\tdeg<=1\tdeg<=2\n");
    for n in 5..=15 {
        let on_n: Vec<_> = reports.iter().filter(|r| r.dims.contains(&n)).collect();
        let d1 = on_n.iter().filter(|r| r.generator.degree() <= 1).count();
        let total = if n == 5 { (count_shift_invariant_bijections(5)? / 2u32).to_string() } else { String::new() };
        writeln!(text, "{n}\t{total}\t{d1}\t{}", on_n.len()).unwrap();
    }
    if !complete {
        text.push_str("# partial: search budget exceeded\n");
    }
    Ok(TableOutput { text, complete })
}

pub fn inv_text(f: &BooleanFunction, m: usize) -> Result<String> {
    Ok(inv_set(f, m)?.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
}

fn metric_rows(out: &mut String, generators: &[(BooleanFunction, String)], n: usize) -> Result<()> {
    for (f, extra) in generators {
        let record = metrics_record(&induce(f, n)?)?;
        writeln!(out, "{}\t{}\t{record}{extra}", inv_text(f, 15)?, f.anf()).unwrap();
    }
    Ok(())
}

/// Listed class representatives of `(5,n)`-liftings with few quadratic terms, measured at `n = 7`.
const FEW_QUADRATIC_ROWS: [&str; 14] = [
    "x1+x3+x1*x2",
    "x1+x5+x1*x3",
    "x1+x2+x2*x3",
    "x2+x4+x2*x3",
    "x1+x5+x1*x4",
    "x1+x2+x1*x5",
    "x2+x5+x1*x2+x2*x3+x3*x4",
    "x1+x5+x1*x2+x2*x4+x3*x4",
    "x2+x1*x3+x2*x4+x1*x5+x3*x5",
    "x2+x1*x3+x1*x4+x2*x5+x3*x5",
    "x2+x4+x5+x1*x2+x1*x3+x1*x4+x2*x4",
    "x3+x5+x1*x2+x1*x3+x1*x4+x2*x4+x3*x4",
    "x1+x4+x1*x2+x1*x3+x1*x4+x2*x4+x2*x5",
    "x1+x2+x3+x4+x1*x3+x2*x3+x2*x4+x3*x4+x3*x5",
];

fn table3() -> Result<String> {
    let mut out = String::from("inv15\tpolynomial\t(nl,p,DU,BU)\n");
    let rows: Vec<_> = FEW_QUADRATIC_ROWS
        .iter()
        .map(|s| parse_function(s, Some(5)).map(|f| (f, String::new())))
        .collect::<Result<_>>()?;
    metric_rows(&mut out, &rows, 7)?;
    Ok(out)
}

fn classified(c: &SearchConstraints) -> Result<Vec<(BooleanFunction, String)>> {
    let mut reports = enumerate_liftings(c)?;
    let classes = classify_essential(&mut reports);
    Ok(classes.into_iter().map(|cl| (cl.representative, format!("\t{}", cl.members.len()))).collect())
}

/// Every essential class of nonlinear quadratic `(5,9)`-liftings, measured at `n = 9`.
fn table4() -> Result<String> {
    let mut c = SearchConstraints::new(5, vec![9]);
    c.shape = Shape::QuadraticOnly;
    c.nonlinear_only = true;
    let mut out = String::from("inv15\tpolynomial\t(nl,p,DU,BU)\tmembers\n");
    metric_rows(&mut out, &classified(&c)?, 9)?;
    Ok(out)
}

/// Every essential class of `(5,7)`-liftings with exactly one cubic term, measured at `n = 7`.
fn table5() -> Result<String> {
    let mut c = SearchConstraints::new(5, vec![7]);
    c.shape = Shape::OneCubicTerm;
    let mut out = String::from("inv15\tpolynomial\t(nl,p,DU,BU)\tmembers\n");
    metric_rows(&mut out, &classified(&c)?, 7)?;
    Ok(out)
}

fn oeis() -> Result<String> {
    let mut out = String::from("n\tinvertible_circulants\n");
    for n in 1..=32u64 {
        let c: BigUint = count_invertible_circulant(n)?;
        writeln!(out, "{n}\t{c}").unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_has_a_golden_copy() {
        for name in NAMES {
            assert!(golden(name).is_some_and(|g| !g.is_empty()), "{name}");
        }
        assert!(golden("nope").is_none());
    }

    #[test]
    fn budget_marks_partial_output() {
        let out = render("table2", Some(10)).unwrap();
        assert!(!out.complete);
        assert!(out.text.ends_with("# partial: search budget exceeded\n"));
    }

    #[test]
    fn inv_text_lists_dimensions() {
        let f = parse_function("x1+x3+x1*x2", Some(5)).unwrap();
        assert_eq!(inv_text(&f, 9).unwrap(), "5,7,9");
    }
}
