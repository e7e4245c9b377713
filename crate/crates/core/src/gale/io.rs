//! Gale CSV files.
//!
//! ```text
//! # family=dyadic
//! # s=1/2
//! # depth=3
//! level,index,value_numerator,value_denominator,radicand
//! 0,0,2,1,2
//! ```
//!
//! A row contributes `num/den * radicand^{1/q}` to the set's capital, where
//! `q` is the denominator of `s` (or the `# root=` header when present). The
//! radicand column is optional and defaults to 1; repeated rows for one set
//! are summed. `# max_term=T` records a continued-fraction window.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{GaleError, Supergale};
use crate::covering::{CoveringFamily, Family, Window};
use crate::numeric::{parse_rational, Exponent, Rational, Surd};

pub fn write_gale_csv(d: &Supergale) -> String {
    let root = d.values.values().fold(d.s.den(), |acc, v| acc.lcm(&v.root()));
    let mut out = format!("# family={}\n# s={}\n# depth={}\n", d.family.id(), d.s, d.depth);
    if root != d.s.den() {
        out.push_str(&format!("# root={root}\n"));
    }
    if let Some(t) = d.window.max_term {
        out.push_str(&format!("# max_term={t}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "index", "value_numerator", "value_denominator", "radicand"])
        .expect("in-memory write");
    for ((level, index), v) in &d.values {
        for (t, c) in v.lift(root).terms() {
            w.write_record([
                level.to_string(),
                index.to_string(),
                c.numer().to_string(),
                c.denom().to_string(),
                t.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
    out
}

pub fn read_gale_csv(text: &str) -> Result<Supergale, GaleError> {
    let bad = |m: String| GaleError::Parse(m);
    let mut family = None;
    let mut s = None;
    let mut depth = None;
    let mut root = None;
    let mut max_term = None;
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        let Some((k, v)) = line.trim_start_matches('#').split_once('=') else { continue };
        let v = v.trim();
        match k.trim() {
            "family" => family = Some(CoveringFamily::parse(v)?),
            "s" => {
                let r = parse_rational(v).map_err(|e| bad(e.to_string()))?;
                s = Some(Exponent::from_rational(&r)?);
            }
            "depth" => depth = Some(v.parse::<u32>().map_err(|_| bad(format!("bad depth `{v}`")))?),
            "root" => root = Some(v.parse::<u32>().map_err(|_| bad(format!("bad root `{v}`")))?),
            "max_term" => max_term = Some(v.parse::<u64>().map_err(|_| bad(format!("bad max_term `{v}`")))?),
            _ => {}
        }
    }
    let family = Arc::new(family.ok_or_else(|| bad("missing `# family=` header".into()))?);
    let s = s.ok_or_else(|| bad("missing `# s=` header".into()))?;
    let depth = depth.ok_or_else(|| bad("missing `# depth=` header".into()))?;
    let root = root.unwrap_or(s.den());
    let window = Window { max_term, index_range: None };
    let mut g = Supergale::new(Arc::clone(&family), s, depth).with_window(window);

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(0) == Some("level") {
            continue;
        }
        let field = |j: usize| rec.get(j).ok_or_else(|| bad(format!("row {}: missing column {j}", i + 1)));
        let level: u32 = field(0)?.parse().map_err(|_| bad(format!("row {}: bad level", i + 1)))?;
        let index: BigUint = field(1)?.parse().map_err(|_| bad(format!("row {}: bad index", i + 1)))?;
        let num: BigInt = field(2)?.parse().map_err(|_| bad(format!("row {}: bad numerator", i + 1)))?;
        let den: BigInt = field(3)?.parse().map_err(|_| bad(format!("row {}: bad denominator", i + 1)))?;
        if den.is_zero() {
            return Err(bad(format!("row {}: zero denominator", i + 1)));
        }
        let radicand: BigUint = match rec.get(4).filter(|t| !t.is_empty()) {
            Some(t) => t.parse().map_err(|_| bad(format!("row {}: bad radicand", i + 1)))?,
            None => BigUint::one(),
        };
        if radicand.is_zero() {
            return Err(bad(format!("row {}: zero radicand", i + 1)));
        }
        let u = family.set_at(level, &index)?;
        let term = Surd::radical(root, &radicand).scale(&Rational::new(num, den));
        let v = g.value(&u) + term;
        g.set(&u, v)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gale::cover_to_gale;
    use crate::numeric::rat;

    #[test]
    fn round_trip_irrational_values() {
        let f = Arc::new(CoveringFamily::dyadic());
        let cover = f.level_sets(3, &Window::all()).unwrap();
        let g = cover_to_gale(&cover, Exponent::new(1, 2), Arc::clone(&f), 3).unwrap();
        let text = write_gale_csv(&g);
        assert!(text.contains("0,0,2,1,2"), "{text}");
        let back = read_gale_csv(&text).unwrap();
        assert_eq!(back.values, g.values);
        assert_eq!(back.depth(), 3);
    }

    #[test]
    fn rows_are_summed_and_radicand_defaults() {
        let text = "# family=dyadic\n# s=1\n# depth=1\nlevel,index,value_numerator,value_denominator\n0,0,1,2\n0,0,1,2\n1,1,2,1\n";
        let g = read_gale_csv(text).unwrap();
        let root = g.family().set_at(0, &0u32.into()).unwrap();
        assert_eq!(g.value(&root).as_rational(), Some(rat(1, 1)));
        assert!(read_gale_csv("# s=1\n# depth=1\n").is_err());
        assert!(read_gale_csv("# family=dyadic\n# s=1\n# depth=1\n0,5,1,1\n").is_err());
    }
}
