//! Fixed-column MPS output.
//!
//! Data lines place fields at columns 2-3, 5-12, 15-22, 25-36, 40-47 and
//! 50-61. Rows are named `R0000001...` (objective `COST`), columns
//! `C0000001...`. Infinite-cost columns are fixed at zero and omitted with a
//! comment line. Numbers that do not fit the 12-character field in shortest
//! round-trip form are rounded to the most accurate form that fits, which is
//! the format's inherent limit.

use std::io::{self, Write};

use super::LinearProgram;

fn row_name(i: usize) -> String {
    format!("R{:07}", i + 1)
}

fn col_name(j: usize) -> String {
    format!("C{:07}", j + 1)
}

/// Formats `v` in at most 12 characters, choosing the most accurate of the
/// fixed and exponent forms that fit.
pub(crate) fn number(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 12 {
        return s;
    }
    let candidates = (0..=11usize)
        .map(|p| format!("{v:.p$}"))
        .chain((0..=11usize).map(|p| format!("{v:.p$e}")));
    candidates
        .filter(|c| c.len() <= 12)
        .filter_map(|c| c.parse::<f64>().ok().map(|x| ((x - v).abs(), c)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .unwrap_or_else(|| format!("{v:.0e}"))
}

fn data_line(f1: &str, f2: &str, pairs: &[(String, String)]) -> String {
    let mut line = format!(" {f1:<2} {f2:<8}");
    for (k, (name, value)) in pairs.iter().enumerate() {
        if k == 0 {
            line.push_str(&format!("  {name:<8}  {value:>12}"));
        } else {
            line.push_str(&format!("   {name:<8}  {value:>12}"));
        }
    }
    line.trim_end().to_string()
}

pub fn write_mps<W: Write>(lp: &LinearProgram, name: &str, mut out: W) -> io::Result<()> {
    let name: String = name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    writeln!(out, "NAME          {name}")?;
    writeln!(out, "ROWS")?;
    writeln!(out, " N  COST")?;
    for i in 0..lp.rows() {
        writeln!(out, " E  {}", row_name(i))?;
    }
    writeln!(out, "COLUMNS")?;
    for j in 0..lp.cols() {
        let c = lp.objective()[j];
        if c.is_infinite() {
            writeln!(out, "* {} omitted: infinite cost, fixed at zero", col_name(j))?;
            continue;
        }
        let mut entries = Vec::new();
        if c != 0.0 {
            entries.push(("COST".to_string(), number(c)));
        }
        let (idx, val) = lp.matrix().column(j);
        entries.extend(idx.iter().zip(val).map(|(&i, &v)| (row_name(i), number(v))));
        if entries.is_empty() {
            entries.push(("COST".to_string(), number(0.0)));
        }
        for pair in entries.chunks(2) {
            writeln!(out, "{}", data_line("", &col_name(j), pair))?;
        }
    }
    writeln!(out, "RHS")?;
    let rhs: Vec<(String, String)> = lp
        .rhs()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(i, &b)| (row_name(i), number(b)))
        .collect();
    for pair in rhs.chunks(2) {
        writeln!(out, "{}", data_line("", "RHS", pair))?;
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Reads back a fixed-column file by slicing the documented columns.
    fn parse(text: &str) -> (HashMap<(String, String), f64>, HashMap<String, f64>) {
        let mut section = "";
        let mut entries = HashMap::new();
        let mut rhs = HashMap::new();
        let field = |line: &str, a: usize, b: usize| -> String {
            line.get(a - 1..b.min(line.len())).unwrap_or("").trim().to_string()
        };
        for line in text.lines() {
            if line.starts_with('*') {
                continue;
            }
            if !line.starts_with(' ') {
                section = line.split_whitespace().next().unwrap_or("");
                continue;
            }
            let f2 = field(line, 5, 12);
            for (a, b) in [((15, 22), (25, 36)), ((40, 47), (50, 61))] {
                let key = field(line, a.0, a.1);
                if key.is_empty() {
                    continue;
                }
                let v: f64 = field(line, b.0, b.1).parse().unwrap();
                match section {
                    "COLUMNS" => {
                        entries.insert((f2.clone(), key), v);
                    }
                    "RHS" => {
                        rhs.insert(key, v);
                    }
                    _ => {}
                }
            }
        }
        (entries, rhs)
    }

    #[test]
    fn fixed_columns_round_trip() {
        let lp = LinearProgram::from_dense(
            vec![0.36787944117144233, f64::INFINITY, 0.0, 2.5],
            &[vec![1.0, 1.0, 0.0, -3.0], vec![0.0, 1.0, 0.0, 1.0 / 3.0]],
            vec![1.0, 0.5],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_mps(&lp, "test lp", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("NAME          testlp\nROWS\n N  COST\n E  R0000001\n"));
        assert!(text.contains("* C0000002 omitted"));
        assert!(text.lines().all(|l| l.len() <= 61));
        let (entries, rhs) = parse(&text);
        let get = |c: &str, r: &str| entries[&(c.to_string(), r.to_string())];
        assert!((get("C0000001", "COST") - 0.36787944117144233).abs() < 1e-10);
        assert_eq!(get("C0000003", "COST"), 0.0);
        assert_eq!(get("C0000004", "R0000001"), -3.0);
        assert!((get("C0000004", "R0000002") - 1.0 / 3.0).abs() < 1e-10);
        assert_eq!(rhs["R0000002"], 0.5);
        assert!(!entries.keys().any(|(c, _)| c == "C0000002"));
    }

    #[test]
    fn numbers_fit_the_field() {
        for v in [1.0 / 3.0, -1.0 / 3.0, 1e-300, -1.2345678901234e200, 0.5, 12345678901234.0] {
            let s = number(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 5e-6 * v.abs(), "{v} -> {s}");
        }
    }
}
