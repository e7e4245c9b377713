use std::fmt;
use std::sync::Mutex;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::NumericError;

/// The generator behind a [`QSequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QKind {
    /// `n_k = b`
    Const(BigUint),
    /// `n_k = 2^k`
    Pow2,
    /// `n_k = 2^(2^k)`
    DoublePow2,
    /// `n_k = k + 1`
    Factorial,
    /// Explicit finite prefix; terms beyond its length are an error.
    List(Vec<BigUint>),
}

/// An integer `odd * 2^twos`. Prefix products are kept in this form so that
/// sequences made of huge powers of two never have to be materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factored {
    pub odd: BigUint,
    pub twos: BigUint,
}

impl Factored {
    pub fn one() -> Self {
        Factored { odd: BigUint::one(), twos: BigUint::zero() }
    }

    pub fn from_uint(n: &BigUint) -> Self {
        let tz = n.trailing_zeros().unwrap_or(0);
        Factored { odd: n >> tz, twos: BigUint::from(tz) }
    }

    pub fn mul(&self, other: &Factored) -> Factored {
        Factored { odd: &self.odd * &other.odd, twos: &self.twos + &other.twos }
    }

    /// `floor(log2(value))`, exact.
    pub fn floor_log2(&self) -> BigUint {
        &self.twos + BigUint::from(self.odd.bits() - 1)
    }

    pub fn to_uint(&self) -> Result<BigUint, NumericError> {
        // Refuse anything beyond 2^32 bits.
        let twos = self
            .twos
            .to_u64()
            .filter(|t| *t + self.odd.bits() <= 1 << 32)
            .ok_or_else(|| NumericError::TooLarge { what: format!("odd * 2^{}", self.twos) })?;
        Ok(&self.odd << twos)
    }
}

/// A computable sequence `k -> n_k >= 2` (k >= 1) defining a Cantor series
/// expansion. Prefix products `Q_k = n_1 ... n_k` are memoized so each new
/// level costs one multiplication.
pub struct QSequence {
    kind: QKind,
    prefixes: Mutex<Vec<Factored>>,
}

impl QSequence {
    pub fn new(kind: QKind) -> Result<Self, NumericError> {
        match &kind {
            QKind::Const(b) if *b < BigUint::from(2u32) => {
                return Err(NumericError::TermTooSmall(b.clone()))
            }
            QKind::List(terms) => {
                if let Some(t) = terms.iter().find(|t| **t < BigUint::from(2u32)) {
                    return Err(NumericError::TermTooSmall(t.clone()));
                }
            }
            _ => {}
        }
        Ok(QSequence { kind, prefixes: Mutex::new(vec![Factored::one()]) })
    }

    pub fn constant(b: u64) -> Result<Self, NumericError> {
        Self::new(QKind::Const(BigUint::from(b)))
    }

    pub fn list(terms: &[u64]) -> Result<Self, NumericError> {
        Self::new(QKind::List(terms.iter().map(|&t| BigUint::from(t)).collect()))
    }

    pub fn pow2() -> Self {
        Self::new(QKind::Pow2).expect("valid")
    }

    pub fn double_pow2() -> Self {
        Self::new(QKind::DoublePow2).expect("valid")
    }

    pub fn factorial() -> Self {
        Self::new(QKind::Factorial).expect("valid")
    }

    /// Parses the Q-spec mini-language: `const:B`, `pow2:`, `doublepow2:`,
    /// `factorial:`, `list:a,b,c`. The trailing colon is optional for the
    /// parameterless forms.
    pub fn parse(spec: &str) -> Result<Self, NumericError> {
        let bad = || NumericError::InvalidQSpec(spec.to_string());
        let s = spec.trim();
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        let kind = match head {
            "const" => QKind::Const(arg.trim().parse().map_err(|_| bad())?),
            "pow2" if arg.is_empty() => QKind::Pow2,
            "doublepow2" if arg.is_empty() => QKind::DoublePow2,
            "factorial" if arg.is_empty() => QKind::Factorial,
            "list" => {
                let terms = arg
                    .split(',')
                    .map(|t| t.trim().parse::<BigUint>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                if terms.is_empty() {
                    return Err(bad());
                }
                QKind::List(terms)
            }
            _ => return Err(bad()),
        };
        Self::new(kind)
    }

    pub fn kind(&self) -> &QKind {
        &self.kind
    }

    /// Number of defined terms, `None` for infinite generators.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            QKind::List(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn is_defined(&self, k: usize) -> bool {
        self.len().is_none_or(|n| k <= n)
    }

    fn check_k(&self, k: usize) -> Result<(), NumericError> {
        assert!(k >= 1, "Q-sequence terms are indexed from 1");
        match self.len() {
            Some(len) if k > len => Err(NumericError::ListExhausted { k, len }),
            _ => Ok(()),
        }
    }

    /// `n_k` in factored form.
    pub fn term_factored(&self, k: usize) -> Result<Factored, NumericError> {
        self.check_k(k)?;
        Ok(match &self.kind {
            QKind::Pow2 => Factored { odd: BigUint::one(), twos: BigUint::from(k) },
            QKind::DoublePow2 => Factored { odd: BigUint::one(), twos: BigUint::one() << k },
            QKind::Const(b) => Factored::from_uint(b),
            QKind::Factorial => Factored::from_uint(&BigUint::from(k + 1)),
            QKind::List(t) => Factored::from_uint(&t[k - 1]),
        })
    }

    /// `n_k` as a plain integer.
    pub fn term(&self, k: usize) -> Result<BigUint, NumericError> {
        self.term_factored(k)?.to_uint()
    }

    /// `Q_k = n_1 ... n_k` in factored form; `Q_0 = 1`.
    pub fn prefix_factored(&self, k: usize) -> Result<Factored, NumericError> {
        if k > 0 {
            self.check_k(k)?;
        }
        let mut memo = self.prefixes.lock().expect("memo poisoned");
        while memo.len() <= k {
            let next_k = memo.len();
            let t = self.term_factored(next_k)?;
            let next = memo[next_k - 1].mul(&t);
            memo.push(next);
        }
        Ok(memo[k].clone())
    }

    /// `Q_k = n_1 ... n_k` exactly (`n_0 = 1`, so `Q_0 = 1`).
    pub fn product_prefix(&self, k: usize) -> Result<BigUint, NumericError> {
        self.prefix_factored(k)?.to_uint()
    }

    /// `m_k = floor(log2 Q_k)`, from the bit length of `Q_k`.
    pub fn scale_index(&self, k: usize) -> Result<BigUint, NumericError> {
        assert!(k >= 1, "scale index is defined for k >= 1");
        Ok(self.prefix_factored(k)?.floor_log2())
    }

    pub fn scale_index_usize(&self, k: usize) -> Result<usize, NumericError> {
        let m = self.scale_index(k)?;
        m.to_usize().ok_or_else(|| NumericError::TooLarge { what: format!("m_{k}") })
    }

    /// If every term is a power of one fixed base `r` (itself not a perfect
    /// power), returns `r`. Used to compute log ratios exactly.
    pub fn common_base(&self) -> Option<BigUint> {
        match &self.kind {
            QKind::Pow2 | QKind::DoublePow2 => Some(BigUint::from(2u32)),
            QKind::Const(b) => Some(primitive_root(b).0),
            QKind::Factorial => None,
            QKind::List(terms) => {
                let base = primitive_root(&terms[0]).0;
                terms.iter().all(|t| primitive_root(t).0 == base).then_some(base)
            }
        }
    }

    /// `e` with `n_k = base^e`, where `base` is [`Self::common_base`].
    pub fn term_exponent(&self, k: usize) -> Option<Result<BigUint, NumericError>> {
        self.common_base()?;
        if let Err(e) = self.check_k(k) {
            return Some(Err(e));
        }
        Some(Ok(match &self.kind {
            QKind::Pow2 => BigUint::from(k),
            QKind::DoublePow2 => BigUint::one() << k,
            QKind::Const(b) => BigUint::from(primitive_root(b).1),
            QKind::List(t) => BigUint::from(primitive_root(&t[k - 1]).1),
            QKind::Factorial => unreachable!(),
        }))
    }
}

/// Writes `n = r^e` with `e` maximal.
fn primitive_root(n: &BigUint) -> (BigUint, u64) {
    let bits = n.bits();
    for e in (2..=bits.max(2)).rev() {
        let r = n.nth_root(e as u32);
        if r > BigUint::one() && r.pow(e as u32) == *n {
            let (rr, ee) = primitive_root(&r);
            return (rr, ee * e);
        }
    }
    (n.clone(), 1)
}

impl Clone for QSequence {
    fn clone(&self) -> Self {
        QSequence::new(self.kind.clone()).expect("already validated")
    }
}

impl PartialEq for QSequence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for QSequence {}

impl fmt::Debug for QSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSequence({self})")
    }
}

impl fmt::Display for QSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            QKind::Const(b) => write!(f, "const:{b}"),
            QKind::Pow2 => write!(f, "pow2:"),
            QKind::DoublePow2 => write!(f, "doublepow2:"),
            QKind::Factorial => write!(f, "factorial:"),
            QKind::List(t) => {
                let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn product_prefix_examples() {
        let q = QSequence::parse("list:2,3,4").unwrap();
        assert_eq!(q.product_prefix(0).unwrap(), u(1));
        assert_eq!(q.product_prefix(3).unwrap(), u(24));
        assert_eq!(QSequence::constant(2).unwrap().product_prefix(10).unwrap(), u(1024));
        assert_eq!(QSequence::factorial().product_prefix(3).unwrap(), u(24));
    }

    #[test]
    fn scale_index_examples() {
        assert_eq!(QSequence::parse("list:2,3,4").unwrap().scale_index(3).unwrap(), u(4));
        assert_eq!(QSequence::constant(2).unwrap().scale_index(7).unwrap(), u(7));
        assert_eq!(QSequence::double_pow2().scale_index(3).unwrap(), u(14));
    }

    #[test]
    fn double_pow2_scale_is_symbolic_at_depth() {
        // m_k = 2^{k+1} - 2 without materializing Q_k.
        let q = QSequence::double_pow2();
        let m = q.scale_index(200).unwrap();
        assert_eq!(m, (BigUint::one() << 201u32) - 2u32);
        assert!(q.product_prefix(200).is_err());
    }

    #[test]
    fn list_exhaustion_is_an_error() {
        let q = QSequence::parse("list:2,3").unwrap();
        assert_eq!(q.term(2).unwrap(), u(3));
        assert_eq!(q.term(3), Err(NumericError::ListExhausted { k: 3, len: 2 }));
        assert!(q.product_prefix(3).is_err());
    }

    #[test]
    fn spec_parsing() {
        for s in ["const:10", "pow2:", "doublepow2:", "factorial:", "list:2,3,4"] {
            assert_eq!(QSequence::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(QSequence::parse("pow2").unwrap().to_string(), "pow2:");
        for s in ["const:1", "list:2,1", "list:", "nope:", "const:x", "pow2:3"] {
            assert!(QSequence::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn common_base_detection() {
        assert_eq!(QSequence::constant(8).unwrap().common_base(), Some(u(2)));
        assert_eq!(QSequence::constant(10).unwrap().common_base(), Some(u(10)));
        assert_eq!(QSequence::parse("list:4,8,2").unwrap().common_base(), Some(u(2)));
        assert_eq!(QSequence::parse("list:2,3").unwrap().common_base(), None);
        assert_eq!(QSequence::factorial().common_base(), None);
        let q = QSequence::constant(8).unwrap();
        assert_eq!(q.term_exponent(5).unwrap().unwrap(), u(3));
    }

    proptest! {
        #[test]
        fn scale_index_brackets_prefix(terms in proptest::collection::vec(2u64..1000, 1..40)) {
            let q = QSequence::list(&terms).unwrap();
            let mut prev = BigUint::zero();
            for k in 1..=terms.len() {
                let m = q.scale_index(k).unwrap();
                let qk = q.product_prefix(k).unwrap();
                let m64 = m.to_u64().unwrap();
                prop_assert!(BigUint::one() << m64 <= qk);
                prop_assert!(qk < BigUint::one() << (m64 + 1));
                prop_assert!(m >= prev);
                prev = m;
            }
        }
    }
}
