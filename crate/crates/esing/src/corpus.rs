//! A fixed corpus of test curves: ADE singularities in several
//! characteristics, the standard pathological families of bad
//! characteristic, and seeded random reduced polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::resolution::resolve;
use crate::spec::{parse_spec, CurveSpec};

/// Seed of [`random_curves`] used by [`full`].
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

/// A named specification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub spec: String,
}

impl CorpusEntry {
    pub fn new(name: impl Into<String>, spec: impl Into<String>) -> Self {
        CorpusEntry { name: name.into(), spec: spec.into() }
    }

    pub fn parse(&self) -> Result<CurveSpec> {
        parse_spec(&self.spec)
    }
}

/// Simple singularities in characteristic 0, 2, 3 and 5, in normal forms
/// that stay reduced in the given characteristic.
pub fn ade() -> Vec<CorpusEntry> {
    let list: &[(&str, u64, &str)] = &[
        ("A1", 0, "x*y"),
        ("A2", 0, "y^2 - x^3"),
        ("A3", 0, "y^2 - x^4"),
        ("A4", 0, "y^2 - x^5"),
        ("D4", 0, "x^2*y - y^3"),
        ("D5", 0, "x^2*y + y^4"),
        ("E6", 0, "y^3 - x^4"),
        ("E7", 0, "y^3 - y*x^3"),
        ("E8", 0, "y^3 - x^5"),
        ("A2", 2, "y^2 + x^3"),
        ("A3", 2, "y^2 + x^2*y"),
        ("A4", 2, "y^2 + x^5"),
        ("D4", 2, "x^2*y + x*y^2"),
        ("E6", 2, "y^3 + x^4"),
        ("E8", 2, "y^3 + x^5"),
        ("A2", 3, "y^2 - x^3"),
        ("A3", 3, "y^2 - x^4"),
        ("D4", 3, "x^2*y - y^3"),
        ("E6", 3, "y^3 + x^4"),
        ("E8", 3, "y^3 + x^5"),
        ("A2", 5, "y^2 - x^3"),
        ("A4", 5, "y^2 - x^5"),
        ("D5", 5, "x^2*y + y^4"),
        ("E7", 5, "y^3 - y*x^3"),
        ("E8", 5, "y^3 - x^5"),
    ];
    list.iter().map(|(n, p, f)| CorpusEntry::new(format!("{n}/char{p}"), format!("p={p}; f = {f}"))).collect()
}

/// `y^{2p} + x^{2p+1} + x^p y^{p+1}`: one branch of multiplicity `2p`.
pub fn two_p_curve(p: u64) -> CorpusEntry {
    CorpusEntry::new(format!("two-p/p{p}"), format!("p={p}; f = y^{} + x^{} + x^{p}*y^{}", 2 * p, 2 * p + 1, p + 1))
}

/// `y^4 + x^6 + x^7` in characteristic two.
pub fn quartic_char_two() -> CorpusEntry {
    CorpusEntry::new("quartic/p2", "p=2; f = y^4 + x^6 + x^7")
}

/// `(y^p − x^{p+1})^p − x^{p²+p+1}`.
pub fn iterated_power(p: u64) -> CorpusEntry {
    CorpusEntry::new(format!("iterated/p{p}"), format!("p={p}; f = (y^{p} - x^{})^{p} - x^{}", p + 1, p * p + p + 1))
}

/// `y^p − x^{p+2} + x^l y^l` with `p = 2l − 1`.
pub fn wild_branch(p: u64) -> CorpusEntry {
    let l = p.div_ceil(2);
    CorpusEntry::new(format!("wild/p{p}"), format!("p={p}; f = y^{p} - x^{} + x^{l}*y^{l}", p + 2))
}

/// `y (y − x²) ⋯ (y − x^{r−1}) (y^p − x^{p+1})`: `r` branches.
pub fn line_and_branch(p: u64, r: usize) -> CorpusEntry {
    let mut f = String::from("y");
    for k in 2..r {
        f += &format!("*(y - x^{k})");
    }
    f += &format!("*(y^{p} - x^{})", p + 1);
    CorpusEntry::new(format!("lines{r}/p{p}"), format!("p={p}; f = {f}"))
}

/// The pathological families of bad characteristic at small primes.
pub fn bad_characteristic() -> Vec<CorpusEntry> {
    let mut v = Vec::new();
    for p in [2, 3, 5] {
        v.push(two_p_curve(p));
    }
    v.push(quartic_char_two());
    v.push(iterated_power(2));
    for p in [3, 5] {
        v.push(wild_branch(p));
    }
    for p in [2, 3, 5] {
        v.push(line_and_branch(p, 2));
    }
    for p in [2, 3] {
        v.push(line_and_branch(p, 3));
    }
    v
}

/// Parametrized inputs.
pub fn parametrized() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry::new("cusp-param/p5", "p=5; branches = [(t^2, t^3)]"),
        CorpusEntry::new("two-branches/p0", "p=0; branches = [(t^2, t^3), (t, -t^2)]"),
        CorpusEntry::new("extension/p3", "p=3; ext=2; f = y^2 - a*x^2 + x^3"),
    ]
}

/// `n` random reduced curves of degree at most six, singular at the
/// origin, over F_2, F_3, F_5, F_7 or Q.  The same seed gives the same
/// curves.
pub fn random_curves(seed: u64, n: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempt = 0;
    while out.len() < n {
        attempt += 1;
        let p = [0u64, 2, 3, 5, 7][rng.gen_range(0..5)];
        let deg = rng.gen_range(3..=6);
        let mut terms = Vec::new();
        for i in 0..=deg {
            for j in 0..=(deg - i) {
                if i + j >= 2 && rng.gen_bool(0.3) {
                    let c: i64 = if p == 0 { rng.gen_range(-3..=3) } else { rng.gen_range(0..p as i64) };
                    if c != 0 {
                        terms.push(term(c, i, j));
                    }
                }
            }
        }
        if terms.is_empty() {
            continue;
        }
        let spec = format!("p={p}; f = {}", terms.join(" + ").replace("+ -", "- "));
        let entry = CorpusEntry::new(format!("random{}/p{p}", out.len()), spec);
        let ok = entry
            .parse()
            .and_then(|s| s.equation())
            .and_then(|f| resolve(&f))
            .map(|t| t.numeric_invariants().delta <= 12 && t.field.degree() <= 4)
            .unwrap_or(false);
        if ok {
            out.push(entry);
        }
        assert!(attempt < 10_000, "random corpus generation does not converge");
    }
    out
}

fn term(c: i64, i: usize, j: usize) -> String {
    let mut parts = Vec::new();
    if c != 1 || (i == 0 && j == 0) {
        parts.push(c.to_string());
    }
    match i {
        0 => {}
        1 => parts.push("x".into()),
        _ => parts.push(format!("x^{i}")),
    }
    match j {
        0 => {}
        1 => parts.push("y".into()),
        _ => parts.push(format!("y^{j}")),
    }
    parts.join("*")
}

/// The whole corpus: ADE curves, the bad-characteristic families, the
/// parametrized inputs and ten random curves.
pub fn full() -> Vec<CorpusEntry> {
    let mut v = ade();
    v.extend(bad_characteristic());
    v.extend(parametrized());
    v.extend(random_curves(DEFAULT_SEED, 10));
    v
}

/// Specifications that must be rejected, one per error path reachable
/// from the command line, with the expected error code.
pub fn error_fixtures() -> Vec<(CorpusEntry, &'static str)> {
    vec![
        (CorpusEntry::new("syntax", "p=3; f = y^2 - * x^3"), "Parse"),
        (CorpusEntry::new("unknown-variable", "p=3; f = y^2 - z^3"), "Parse"),
        (CorpusEntry::new("missing-p", "f = y^2 - x^3"), "Parse"),
        (CorpusEntry::new("non-prime", "p=4; f = y^2 - x^3"), "UnsupportedCharacteristic"),
        (CorpusEntry::new("both-inputs", "p=3; f = x*y; branches = [(t, t^2)]"), "Parse"),
        (CorpusEntry::new("extension-of-q", "p=0; ext=2; f = y^2 - x^3"), "ExtensionOfCharZero"),
        (CorpusEntry::new("not-reduced", "p=3; f = y^2"), "NotReduced"),
        (CorpusEntry::new("smooth-off-origin", "p=3; f = 1 + x + y^2"), "InvalidInput"),
        (CorpusEntry::new("irrational-tangent", "p=0; f = y^2 - 2*x^2"), "IrrationalTangent"),
        (CorpusEntry::new("degenerate-branch", "p=5; branches = [(t^2, 1 + t^2)]"), "DegenerateParametrization"),
        (CorpusEntry::new("non-primitive-branch", "p=5; branches = [(t^2, t^4)]"), "DegenerateParametrization"),
        (CorpusEntry::new("zero-degree-bound", "p=3; pdeg=0; f = y^2 - x^3"), "TruncationTooCoarse"),
    ]
}
