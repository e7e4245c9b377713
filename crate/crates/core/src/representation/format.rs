//! Digit-stream files.
//!
//! A digit file starts with `#repr <spec>` and then holds one decimal digit
//! (or partial quotient) per line. Bit sequences may instead be written as a
//! single packed string of `0`/`1` characters, and continued-fraction words as
//! `[a1,a2,...]`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{BitSequence, CantorDigits, CfWord, Digits, ReprError, ReprSpec};

pub fn write_digits(d: &Digits) -> String {
    match d {
        Digits::Bits(b) => format!("{b}\n"),
        _ => {
            let mut out = format!("#repr {}\n", d.spec());
            for s in d.digit_strings() {
                out.push_str(&s);
                out.push('\n');
            }
            out
        }
    }
}

/// Parses digit input. The `#repr` header, when present, names the
/// representation; otherwise `spec` must be given. When both are present they
/// must agree.
pub fn parse_digits(text: &str, spec: Option<&ReprSpec>) -> Result<Digits, ReprError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();
    let header = match lines.peek() {
        Some(l) if l.starts_with("#repr") => {
            let s = l.trim_start_matches("#repr").trim().to_string();
            lines.next();
            Some(ReprSpec::parse(&s)?)
        }
        _ => None,
    };
    let spec = match (header, spec) {
        (Some(h), Some(s)) if h != *s => {
            return Err(ReprError::Parse(format!("file declares `{h}` but `{s}` was requested")))
        }
        (Some(h), _) => h,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(ReprError::Parse("no representation given".into())),
    };
    let body: Vec<&str> = lines.collect();
    let tokens: Vec<String> = if body.len() == 1 {
        let line = body[0].trim_start_matches('[').trim_end_matches(']');
        if matches!(spec, ReprSpec::Binary) && !line.contains([',', ' ']) {
            line.chars().map(|c| c.to_string()).collect()
        } else {
            line.split([',', ' ']).filter(|t| !t.is_empty()).map(str::to_string).collect()
        }
    } else {
        body.iter().map(|s| s.to_string()).collect()
    };
    let nums = tokens
        .iter()
        .map(|t| t.trim().parse::<BigUint>().map_err(|_| ReprError::Parse(format!("bad digit `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let out_of_range = |k: usize, d: &BigUint, bound: &str| ReprError::DigitOutOfRange {
        k: k + 1,
        digit: d.to_string(),
        bound: bound.to_string(),
    };
    Ok(match spec {
        ReprSpec::Binary => {
            let mut bits = Vec::with_capacity(nums.len());
            for (k, d) in nums.iter().enumerate() {
                match d.to_u8() {
                    Some(0) => bits.push(false),
                    Some(1) => bits.push(true),
                    _ => return Err(out_of_range(k, d, "2")),
                }
            }
            Digits::Bits(BitSequence::new(bits))
        }
        ReprSpec::Base(b) => {
            let mut digits = Vec::with_capacity(nums.len());
            for (k, d) in nums.iter().enumerate() {
                match d.to_u32() {
                    Some(v) if v < b => digits.push(v),
                    _ => return Err(out_of_range(k, d, &b.to_string())),
                }
            }
            Digits::Radix { base: b, digits }
        }
        ReprSpec::Cantor(q) => Digits::Cantor(CantorDigits { q: Arc::clone(&q), digits: nums }),
        ReprSpec::Cf => Digits::Cf(CfWord::new(nums)?),
    })
}
