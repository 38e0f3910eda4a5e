//! Exact counting of the binarization-function search space.
//!
//! The number of candidate code orderings is lower-bounded by the number of
//! labeled DAGs on the code space, which explodes superexponentially (the
//! 256-code count has over 10,000 digits), hence arbitrary-precision
//! arithmetic throughout.

use num_bigint::{BigInt, BigUint, Sign};
use serde::Serialize;

/// Arbitrary-precision nonnegative count.
pub type BigCount = BigUint;

/// Memoized labeled-DAG counter.
///
/// `a(0) = 1` and
/// `a(m) = sum_{k=1..m} (-1)^(k-1) C(m,k) 2^(k(m-k)) a(m-k)`.
#[derive(Debug, Default)]
pub struct DagCounter {
    memo: Vec<BigCount>,
}

impl DagCounter {
    pub fn new() -> Self {
        Self {
            memo: vec![BigUint::from(1u32)],
        }
    }

    /// Exact count of labeled DAGs on `m` nodes.
    pub fn count(&mut self, m: usize) -> BigCount {
        while self.memo.len() <= m {
            let n = self.memo.len();
            let mut acc = BigInt::from(0u32);
            // running binomial C(n, k), updated multiplicatively
            let mut binom = BigUint::from(1u32);
            for k in 1..=n {
                binom = binom * (n - k + 1) / k;
                let pow = BigUint::from(1u32) << (k * (n - k));
                let term = BigInt::from_biguint(
                    if k % 2 == 1 { Sign::Plus } else { Sign::Minus },
                    &binom * &pow * &self.memo[n - k],
                );
                acc += term;
            }
            let (sign, value) = acc.into_parts();
            debug_assert_ne!(sign, Sign::Minus, "DAG counts are nonnegative");
            self.memo.push(value);
        }
        self.memo[m].clone()
    }
}

/// Exact count of labeled DAGs on `m` nodes.
pub fn dag_count(m: usize) -> BigCount {
    DagCounter::new().count(m)
}

/// Code-space variants whose sizes seed the DAG counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeVariant {
    RotationInvariant,
    Uniform,
    Traditional,
}

impl CodeVariant {
    pub const ALL: [CodeVariant; 3] = [
        CodeVariant::RotationInvariant,
        CodeVariant::Uniform,
        CodeVariant::Traditional,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CodeVariant::RotationInvariant => "rotation-invariant",
            CodeVariant::Uniform => "uniform",
            CodeVariant::Traditional => "traditional",
        }
    }
}

fn totient(mut x: usize) -> usize {
    let mut result = x;
    let mut p = 2;
    while p * p <= x {
        if x % p == 0 {
            while x % p == 0 {
                x /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if x > 1 {
        result -= result / x;
    }
    result
}

/// Number of distinct labels for an `n`-bit code space under the variant:
/// `2^n` for traditional codes, the necklace count
/// `(1/n) sum_{d|n} phi(d) 2^(n/d)` for rotation-invariant codes, and
/// `n(n-1) + 3` for the uniform label space (uniform patterns plus the
/// catch-all bin).
pub fn code_space_size(n: u32, variant: CodeVariant) -> usize {
    assert!((2..=8).contains(&n), "n = {n} outside [2, 8]");
    let n = n as usize;
    match variant {
        CodeVariant::Traditional => 1 << n,
        CodeVariant::Uniform => n * (n - 1) + 3,
        CodeVariant::RotationInvariant => {
            let sum: usize = (1..=n)
                .filter(|d| n % d == 0)
                .map(|d| totient(d) * (1 << (n / d)))
                .sum();
            sum / n
        }
    }
}

/// `mantissa * 10^exponent` with a single truncated mantissa digit, matching
/// the table's rendering (29281 prints as `2·10^4`).
pub fn truncated_scientific(value: &BigCount) -> String {
    let digits = value.to_string();
    format!("{}·10^{}", &digits[..1], digits.len() - 1)
}

/// One row of the search-space table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub n: u32,
    pub rotation_invariant: String,
    pub uniform: String,
    pub traditional: String,
}

/// Computes `dag_count(code_space_size(n, variant))` for every `n` in the
/// range, rendered as truncated mantissa times a power of ten.
pub fn table1(n_range: std::ops::RangeInclusive<u32>) -> Vec<TableRow> {
    let mut counter = DagCounter::new();
    n_range
        .map(|n| {
            let mut cell =
                |v: CodeVariant| truncated_scientific(&counter.count(code_space_size(n, v)));
            TableRow {
                n,
                rotation_invariant: cell(CodeVariant::RotationInvariant),
                uniform: cell(CodeVariant::Uniform),
                traditional: cell(CodeVariant::Traditional),
            }
        })
        .collect()
}

/// Aligned text rendering of the table.
pub fn format_table_text(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>2}  {:>20}  {:>20}  {:>20}\n",
        "n", "rotation-invariant", "uniform", "traditional"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:>2}  {:>20}  {:>20}  {:>20}\n",
            r.n, r.rotation_invariant, r.uniform, r.traditional
        ));
    }
    out
}

/// CSV rendering with a header row.
pub fn format_table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("n,rotation_invariant,uniform,traditional\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n, r.rotation_invariant, r.uniform, r.traditional
        ));
    }
    out
}
