//! Sparse polynomials in `z` and `z̄` with exact Wirtinger differentiation.
//!
//! A term `c · z^a · z̄^b` is keyed by the pair of multi-exponents `(a, b)`.
//! [`PolyExpr`] is an arbitrary complex-valued polynomial; [`PolyPotential`]
//! additionally carries the Hermitian symmetry `c(a, b) = conj(c(b, a))`, which
//! makes it real-valued. Exponents are exact integers, coefficients are `f64`
//! complex, and zero coefficients are pruned with threshold exactly zero.
//!
//! Variable indices are 0-based in this API; the file format and reports
//! display them 1-based (`z1`, `z2`, ...).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Per-variable exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiExponent(Vec<u32>);

impl MultiExponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `|a|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn decremented(&self, index: usize) -> Self {
        let mut out = self.0.clone();
        out[index] -= 1;
        Self(out)
    }
}

impl From<Vec<u32>> for MultiExponent {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[u32; N]> for MultiExponent {
    fn from(v: [u32; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for MultiExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

/// A point of `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint(Vec<C64>);

impl CPoint {
    pub fn new(coords: Vec<C64>) -> Self {
        Self(coords)
    }

    /// Builds a point from `(re, im)` pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Self {
        Self(parts.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    /// Builds a point with real coordinates.
    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Parses a comma-separated list of complex numbers, e.g. `1+0i, 0.5-2i`.
    pub fn parse(text: &str) -> Option<Self> {
        text.split(',')
            .map(parse_complex)
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }
}

impl Index<usize> for CPoint {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl From<Vec<C64>> for CPoint {
    fn from(v: Vec<C64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_complex(*c))?;
        }
        write!(f, ")")
    }
}

/// Parses `<re>`, `<im>i` or `<re><sign><im>i`. Whitespace is ignored.
pub fn parse_complex(text: &str) -> Option<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let re = re_text.parse::<f64>().ok()?;
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().ok()?,
    };
    Some(C64::new(re, im))
}

/// Formats a complex number in the `<re><sign><im>i` form accepted by
/// [`parse_complex`]; the shortest round-trip representation is used.
pub fn format_complex(c: C64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", c.re, sign, c.im.abs())
}

/// Powers `z_j^k` and `conj(z_j)^k` for `k` up to a fixed bound.
pub struct PowerTable {
    holo: Vec<Vec<C64>>,
    anti: Vec<Vec<C64>>,
}

impl PowerTable {
    pub fn new(z: &[C64], max_exponent: u32) -> Self {
        let len = max_exponent as usize + 1;
        let mut holo = Vec::with_capacity(z.len());
        let mut anti = Vec::with_capacity(z.len());
        for &zj in z {
            let mut h = Vec::with_capacity(len);
            let mut a = Vec::with_capacity(len);
            let mut ph = C64::new(1.0, 0.0);
            let mut pa = C64::new(1.0, 0.0);
            for _ in 0..len {
                h.push(ph);
                a.push(pa);
                ph *= zj;
                pa *= zj.conj();
            }
            holo.push(h);
            anti.push(a);
        }
        Self { holo, anti }
    }

    #[inline]
    fn monomial(&self, a: &MultiExponent, b: &MultiExponent) -> C64 {
        let mut m = C64::new(1.0, 0.0);
        for (j, (&aj, &bj)) in a.0.iter().zip(&b.0).enumerate() {
            if aj > 0 {
                m *= self.holo[j][aj as usize];
            }
            if bj > 0 {
                m *= self.anti[j][bj as usize];
            }
        }
        m
    }
}

type TermKey = (MultiExponent, MultiExponent);

/// Complex-valued polynomial in `z` and `z̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyExpr {
    dim: usize,
    terms: BTreeMap<TermKey, C64>,
}

impl PolyExpr {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Collects terms, summing repeated keys and pruning exact zeros.
    pub fn from_terms<I, A, B>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B, C64)>,
        A: Into<MultiExponent>,
        B: Into<MultiExponent>,
    {
        let mut out = Self::zero(dim);
        for (a, b, c) in terms {
            let (a, b) = (a.into(), b.into());
            for e in [&a, &b] {
                if e.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: e.len(),
                    });
                }
            }
            *out.terms.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += c;
        }
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiExponent, &MultiExponent, C64)> {
        self.terms.iter().map(|((a, b), c)| (a, b, *c))
    }

    pub fn coefficient(&self, a: &MultiExponent, b: &MultiExponent) -> C64 {
        self.terms
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or_default()
    }

    /// Largest single-variable exponent appearing in any term.
    pub fn max_exponent(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|(a, b)| a.0.iter().chain(&b.0))
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Sum of absolute values of the coefficients.
    pub fn coefficient_mass(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    fn check_point(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, z: &CPoint) -> Result<C64> {
        self.check_point(z.coords())?;
        Ok(self.evaluate_with(&PowerTable::new(z.coords(), self.max_exponent())))
    }

    /// Evaluates against a precomputed power table, which must cover
    /// [`Self::max_exponent`].
    pub fn evaluate_with(&self, powers: &PowerTable) -> C64 {
        self.terms
            .iter()
            .map(|((a, b), c)| c * powers.monomial(a, b))
            .sum()
    }

    /// Returns the value and the accumulated magnitude `Σ |c z^a z̄^b|`.
    fn evaluate_with_mass(&self, powers: &PowerTable) -> (C64, f64) {
        let mut sum = C64::new(0.0, 0.0);
        let mut mass = 0.0;
        for ((a, b), c) in &self.terms {
            let t = c * powers.monomial(a, b);
            sum += t;
            mass += t.norm();
        }
        (sum, mass)
    }

    /// `∂/∂z^index`: `c z^a z̄^b ↦ c·a_index z^(a-e) z̄^b`.
    pub fn wirtinger_z(&self, index: usize) -> Result<Self> {
        self.differentiate(index, true)
    }

    /// `∂/∂z̄^index`, the mirror of [`Self::wirtinger_z`] acting on `b`.
    pub fn wirtinger_zbar(&self, index: usize) -> Result<Self> {
        self.differentiate(index, false)
    }

    fn differentiate(&self, index: usize, holomorphic: bool) -> Result<Self> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim,
            });
        }
        let mut out = Self::zero(self.dim);
        for ((a, b), c) in &self.terms {
            let e = if holomorphic { a.0[index] } else { b.0[index] };
            if e == 0 {
                continue;
            }
            let key = if holomorphic {
                (a.decremented(index), b.clone())
            } else {
                (a.clone(), b.decremented(index))
            };
            *out.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += c * e as f64;
        }
        out.prune();
        Ok(out)
    }

    /// Groups terms by bidegree `(|a|, |b|)`.
    pub fn bidegree_decompose(&self) -> BTreeMap<(u32, u32), PolyExpr> {
        let mut out: BTreeMap<(u32, u32), PolyExpr> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            out.entry((a.degree(), b.degree()))
                .or_insert_with(|| Self::zero(self.dim))
                .terms
                .insert((a.clone(), b.clone()), *c);
        }
        out
    }

    /// Term-wise sum; exact zeros produced by cancellation are pruned.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
        out.prune();
        Ok(out)
    }
}

/// Real-valued polynomial potential `ρ`: a [`PolyExpr`] with Hermitian
/// symmetric coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPotential {
    expr: PolyExpr,
}

impl PolyPotential {
    pub fn from_terms<I, A, B>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B, C64)>,
        A: Into<MultiExponent>,
        B: Into<MultiExponent>,
    {
        Self::from_expr(PolyExpr::from_terms(dim, terms)?)
    }

    /// Adopts `expr` if its coefficients are exactly Hermitian symmetric.
    pub fn from_expr(expr: PolyExpr) -> Result<Self> {
        for ((a, b), c) in &expr.terms {
            let partner = expr.terms.get(&(b.clone(), a.clone())).copied();
            if partner != Some(c.conj()) {
                return Err(Error::NonHermitian {
                    alpha: a.0.clone(),
                    beta: b.0.clone(),
                });
            }
        }
        if expr.dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(Self { expr })
    }

    pub fn as_expr(&self) -> &PolyExpr {
        &self.expr
    }

    pub fn dim(&self) -> usize {
        self.expr.dim
    }

    pub fn num_terms(&self) -> usize {
        self.expr.num_terms()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiExponent, &MultiExponent, C64)> {
        self.expr.terms()
    }

    pub fn evaluate(&self, z: &CPoint) -> Result<f64> {
        Ok(self.evaluate_with_defect(z)?.0)
    }

    /// Value together with the relative size of the discarded imaginary part,
    /// `|Im Σ| / Σ|term|` (zero when every term vanishes).
    pub fn evaluate_with_defect(&self, z: &CPoint) -> Result<(f64, f64)> {
        self.expr.check_point(z.coords())?;
        let powers = PowerTable::new(z.coords(), self.expr.max_exponent());
        let (sum, mass) = self.expr.evaluate_with_mass(&powers);
        let defect = if mass > 0.0 { sum.im.abs() / mass } else { 0.0 };
        Ok((sum.re, defect))
    }

    pub fn wirtinger_z(&self, index: usize) -> Result<PolyExpr> {
        self.expr.wirtinger_z(index)
    }

    pub fn wirtinger_zbar(&self, index: usize) -> Result<PolyExpr> {
        self.expr.wirtinger_zbar(index)
    }

    pub fn bidegree_decompose(&self) -> BTreeMap<(u32, u32), PolyExpr> {
        self.expr.bidegree_decompose()
    }

    /// Returns `2k` when every term has total degree `|a| + |b| = 2k`.
    /// Mixed or odd total degrees give `None`, as does the zero polynomial.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.expr.terms.keys().map(|(a, b)| a.degree() + b.degree());
        let first = degrees.next()?;
        if first % 2 != 0 || degrees.any(|d| d != first) {
            return None;
        }
        Some(first)
    }

    /// Parses the potential file format:
    ///
    /// ```text
    /// n = 2
    /// # comment
    /// monomial: a=[1,0] b=[1,0] c=1+0i
    /// ```
    ///
    /// `;` separates declarations on one line and the `monomial:` prefix is
    /// optional. Repeated keys are summed before the symmetry check.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut terms: Vec<(MultiExponent, MultiExponent, C64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("");
            for decl in content.split(';').map(str::trim).filter(|d| !d.is_empty()) {
                let syntax = |message: String| Error::Syntax { line, message };
                match dim {
                    None => dim = Some(parse_dimension(decl).map_err(syntax)?),
                    Some(n) => {
                        let (a, b, c) = parse_monomial(decl).map_err(syntax)?;
                        for e in [&a, &b] {
                            if e.len() != n {
                                return Err(Error::Syntax {
                                    line,
                                    message: format!(
                                        "dimension mismatch: exponent {e} has {} entries, expected n = {n}",
                                        e.len()
                                    ),
                                });
                            }
                        }
                        terms.push((a, b, c));
                    }
                }
            }
        }
        let n = dim.ok_or(Error::Syntax {
            line: 1,
            message: "missing dimension declaration `n = <positive int>`".into(),
        })?;
        Self::from_terms(n, terms)
    }

    /// Renders the potential in the file format read by [`Self::parse`].
    pub fn to_file_string(&self) -> String {
        self.to_string()
    }
}

impl FromStr for PolyPotential {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for PolyPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.dim())?;
        for (a, b, c) in self.terms() {
            writeln!(f, "monomial: a={a} b={b} c={}", format_complex(c))?;
        }
        Ok(())
    }
}

fn parse_dimension(decl: &str) -> std::result::Result<usize, String> {
    let (key, value) = decl
        .split_once('=')
        .ok_or_else(|| format!("expected `n = <positive int>`, found `{decl}`"))?;
    if key.trim() != "n" {
        return Err(format!("expected `n = <positive int>`, found `{decl}`"));
    }
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("dimension must be a positive integer, found `{}`", value.trim())),
    }
}

fn parse_monomial(decl: &str) -> std::result::Result<(MultiExponent, MultiExponent, C64), String> {
    let body = decl.strip_prefix("monomial:").unwrap_or(decl);
    let mut a = None;
    let mut b = None;
    let mut c = None;
    for (key, value) in key_values(body)? {
        let slot_taken = match key.as_str() {
            "a" => a.replace(parse_exponent(&value)?).is_some(),
            "b" => b.replace(parse_exponent(&value)?).is_some(),
            "c" => c
                .replace(parse_complex(&value).ok_or_else(|| format!("invalid coefficient `{value}`"))?)
                .is_some(),
            other => return Err(format!("unknown field `{other}`")),
        };
        if slot_taken {
            return Err(format!("field `{key}` given twice"));
        }
    }
    match (a, b, c) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(format!("monomial needs fields a=[..] b=[..] c=<complex>, found `{}`", body.trim())),
    }
}

fn key_values(body: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i >= chars.len() {
            break;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_alphabetic() {
            i += 1;
        }
        let key: String = chars[start..i].iter().collect();
        if key.is_empty() {
            return Err(format!("unexpected character `{}`", chars[i]));
        }
        skip_ws(&mut i);
        if i >= chars.len() || chars[i] != '=' {
            return Err(format!("expected `=` after `{key}`"));
        }
        i += 1;
        skip_ws(&mut i);
        let start = i;
        if i < chars.len() && chars[i] == '[' {
            while i < chars.len() && chars[i] != ']' {
                i += 1;
            }
            if i >= chars.len() {
                return Err(format!("unterminated `[` in field `{key}`"));
            }
            i += 1;
        } else {
            while i < chars.len() && !chars[i].is_whitespace() {
                i += 1;
            }
        }
        out.push((key, chars[start..i].iter().collect()));
    }
    Ok(out)
}

fn parse_exponent(value: &str) -> std::result::Result<MultiExponent, String> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| format!("exponent must be a bracketed list, found `{value}`"))?;
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("exponent entries must be non-negative integers, found `{}`", t.trim()))
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(MultiExponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn weighted() -> PolyPotential {
        PolyPotential::parse("n = 2\nmonomial: a=[1,0] b=[1,0] c=1+0i\nmonomial: a=[0,2] b=[0,2] c=1+0i\n")
            .unwrap()
    }

    #[test]
    fn parses_one_line_ball() {
        let p = PolyPotential::parse("n=2; a=[1,0] b=[1,0] c=1+0i; a=[0,1] b=[0,1] c=1+0i").unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.evaluate(&CPoint::from_parts(&[(1.0, 0.0), (0.0, 1.0)])).unwrap(), 2.0);
    }

    #[test]
    fn parses_weighted_keys() {
        let p = weighted();
        let keys: Vec<_> = p.terms().map(|(a, b, _)| (a.clone(), b.clone())).collect();
        assert_eq!(
            keys,
            vec![
                (MultiExponent::from([0, 2]), MultiExponent::from([0, 2])),
                (MultiExponent::from([1, 0]), MultiExponent::from([1, 0])),
            ]
        );
        assert_eq!(p.evaluate(&CPoint::real(&[1.0, 1.0])).unwrap(), 2.0);
    }

    #[test]
    fn rejects_missing_conjugate_partner() {
        let err = PolyPotential::parse("n = 2\na=[1,0] b=[0,1] c=1+0i\n").unwrap_err();
        assert!(err.to_string().contains("non-Hermitian"), "{err}");
    }

    #[test]
    fn rejects_complex_diagonal_coefficient() {
        assert!(matches!(
            PolyPotential::parse("n = 1\na=[1] b=[1] c=1+1i\n"),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = PolyPotential::parse("n = 2\n# ok\n\na=[1,0] b=[1,0] c=1+0i\na=[1,0 b=[1,0] c=1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 5, .. }), "{err:?}");
        let err = PolyPotential::parse("n = 2\na=[1,0,0] b=[1,0,0] c=1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }));
        assert!(err.to_string().contains("dimension mismatch"));
        assert!(matches!(PolyPotential::parse("n = 0\n"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(PolyPotential::parse("# nothing\n"), Err(Error::Syntax { .. })));
        assert!(matches!(
            PolyPotential::parse("n = 1\na=[1] b=[1] c=1 d=2\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn repeated_terms_are_collected_and_zeros_pruned() {
        let p = PolyPotential::parse("n=1; a=[1] b=[1] c=1; a=[1] b=[1] c=-1; a=[2] b=[2] c=0.5; a=[2] b=[2] c=0.5").unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.evaluate(&CPoint::real(&[2.0])).unwrap(), 16.0);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1+0i"), Some(C64::new(1.0, 0.0)));
        assert_eq!(parse_complex("0.5-2i"), Some(C64::new(0.5, -2.0)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("2.5i"), Some(C64::new(0.0, 2.5)));
        assert_eq!(parse_complex("1e-3+2e2i"), Some(C64::new(1e-3, 200.0)));
        assert_eq!(parse_complex("-1.5e+1-3E-1i"), Some(C64::new(-15.0, -0.3)));
        assert_eq!(parse_complex("3"), Some(C64::new(3.0, 0.0)));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn evaluate_examples() {
        let ball = PolyPotential::from_terms(2, [([1, 0], [1, 0], c(1.0)), ([0, 1], [0, 1], c(1.0))]).unwrap();
        assert_eq!(ball.evaluate(&CPoint::from_parts(&[(1.0, 0.0), (0.0, 1.0)])).unwrap(), 2.0);
        let bad = PolyPotential::from_terms(
            2,
            [([1, 0], [1, 0], c(1.0)), ([0, 1], [0, 1], c(1.0)), ([1, 1], [1, 1], c(1.0))],
        )
        .unwrap();
        assert_eq!(bad.evaluate(&CPoint::real(&[1.0, 1.0])).unwrap(), 3.0);
        assert!(matches!(
            bad.evaluate(&CPoint::real(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn wirtinger_examples() {
        let ball1 = PolyPotential::from_terms(1, [([1], [1], c(1.0))]).unwrap();
        let dz = ball1.wirtinger_z(0).unwrap();
        assert_eq!(dz, PolyExpr::from_terms(1, [([0], [1], c(1.0))]).unwrap());
        let dzb = ball1.wirtinger_zbar(0).unwrap();
        assert_eq!(dzb, PolyExpr::from_terms(1, [([1], [0], c(1.0))]).unwrap());

        let quartic2 = PolyPotential::from_terms(2, [([0, 2], [0, 2], c(1.0))]).unwrap();
        assert_eq!(
            quartic2.wirtinger_z(1).unwrap(),
            PolyExpr::from_terms(2, [([0, 1], [0, 2], c(2.0))]).unwrap()
        );
        assert_eq!(
            quartic2.wirtinger_zbar(1).unwrap(),
            PolyExpr::from_terms(2, [([0, 2], [0, 1], c(2.0))]).unwrap()
        );
        assert!(quartic2.wirtinger_z(0).unwrap().is_zero());

        let ball2 = PolyPotential::from_terms(2, [([0, 1], [0, 1], c(1.0))]).unwrap();
        assert!(ball2.wirtinger_zbar(1).unwrap().wirtinger_zbar(1).unwrap().is_zero());
        assert!(matches!(ball2.wirtinger_z(2), Err(Error::IndexOutOfRange { index: 2, dim: 2 })));
    }

    #[test]
    fn bidegree_and_homogeneity_examples() {
        let ball_sq = PolyPotential::from_terms(
            2,
            [([2, 0], [2, 0], c(1.0)), ([1, 1], [1, 1], c(2.0)), ([0, 2], [0, 2], c(1.0))],
        )
        .unwrap();
        assert_eq!(ball_sq.bidegree_decompose().keys().copied().collect::<Vec<_>>(), vec![(2, 2)]);
        assert_eq!(ball_sq.homogeneous_degree(), Some(4));

        let mixed = PolyPotential::from_terms(
            2,
            [
                ([2, 0], [2, 0], c(1.0)),
                ([0, 2], [0, 2], c(1.0)),
                ([3, 0], [0, 1], c(0.5)),
                ([0, 1], [3, 0], c(0.5)),
            ],
        )
        .unwrap();
        assert_eq!(
            mixed.bidegree_decompose().keys().copied().collect::<Vec<_>>(),
            vec![(1, 3), (2, 2), (3, 1)]
        );
        assert_eq!(mixed.homogeneous_degree(), Some(4));

        let w = weighted();
        assert_eq!(w.bidegree_decompose().keys().copied().collect::<Vec<_>>(), vec![(1, 1), (2, 2)]);
        assert_eq!(w.homogeneous_degree(), None);
    }

    #[test]
    fn file_format_round_trip() {
        let text = "n = 2\nmonomial: a=[3,0] b=[0,1] c=0.5-0.25i\nmonomial: a=[0,1] b=[3,0] c=0.5+0.25i\n";
        let p = PolyPotential::parse(text).unwrap();
        assert_eq!(PolyPotential::parse(&p.to_file_string()).unwrap(), p);
    }

    // Random Hermitian potentials on C^2 with per-variable degree <= 2.
    fn hermitian_potential() -> impl Strategy<Value = PolyPotential> {
        let exp = prop::collection::vec(0u32..=2, 2);
        let term = (exp.clone(), exp, -10.0f64..10.0, -10.0f64..10.0);
        prop::collection::vec(term, 1..6).prop_map(|raw| {
            let mut terms = Vec::new();
            for (a, b, re, im) in raw {
                let cf = if a == b { C64::new(re, 0.0) } else { C64::new(re, im) };
                terms.push((MultiExponent(a.clone()), MultiExponent(b.clone()), cf));
                if a != b {
                    terms.push((MultiExponent(b), MultiExponent(a), cf.conj()));
                }
            }
            // Collisions between a random key and another term's partner can
            // break symmetry after summation; symmetrize those keys exactly.
            let expr = PolyExpr::from_terms(2, terms).unwrap();
            let sym: Vec<_> = expr
                .terms()
                .map(|(a, b, cf)| {
                    let partner = expr.coefficient(b, a);
                    (a.clone(), b.clone(), (cf + partner.conj()) * 0.5)
                })
                .collect();
            PolyPotential::from_terms(2, sym).unwrap_or_else(|_| {
                PolyPotential::from_terms(2, [([1, 0], [1, 0], C64::new(1.0, 0.0))]).unwrap()
            })
        })
    }

    fn point_in_ball(radius: f64) -> impl Strategy<Value = CPoint> {
        prop::collection::vec(-1.0f64..1.0, 4).prop_filter_map("outside ball", move |v| {
            let p = CPoint::from_parts(&[(v[0], v[1]), (v[2], v[3])]);
            (p.norm() <= 1.0).then(|| CPoint::new(p.coords().iter().map(|c| c * radius).collect()))
        })
    }

    proptest! {
        #[test]
        fn mixed_derivatives_commute(p in hermitian_potential(), mu in 0usize..2, nu in 0usize..2) {
            let zz = p.wirtinger_z(mu).unwrap().wirtinger_zbar(nu).unwrap();
            let zbz = p.wirtinger_zbar(nu).unwrap().wirtinger_z(mu).unwrap();
            prop_assert_eq!(zz, zbz);
        }

        #[test]
        fn wirtinger_matches_finite_differences(p in hermitian_potential(), z in point_in_ball(2.0), mu in 0usize..2) {
            let h = 1e-4;
            let f = |dx: f64, dy: f64| {
                let mut c = z.coords().to_vec();
                c[mu] += C64::new(dx, dy);
                p.evaluate(&CPoint::new(c)).unwrap()
            };
            let fd = C64::new((f(h, 0.0) - f(-h, 0.0)) / (2.0 * h), -(f(0.0, h) - f(0.0, -h)) / (2.0 * h)) * 0.5;
            let grad: Vec<C64> = (0..2).map(|j| p.wirtinger_z(j).unwrap().evaluate(&z).unwrap()).collect();
            let scale = grad.iter().map(|g| g.norm()).fold(1.0, f64::max);
            prop_assert!((grad[mu] - fd).norm() / scale < 1e-5);
        }

        #[test]
        fn bidegree_components_sum_to_input(p in hermitian_potential()) {
            let mut total = PolyExpr::zero(2);
            for comp in p.bidegree_decompose().values() {
                total = total.add(comp).unwrap();
            }
            prop_assert_eq!(&total, p.as_expr());
        }
    }

    #[test]
    fn hermitian_symmetry_keeps_values_real() {
        use rand::{Rng, SeedableRng};
        let p = PolyPotential::from_terms(
            2,
            [
                ([2, 0], [2, 0], c(1.0)),
                ([0, 2], [0, 2], c(1.0)),
                ([3, 0], [0, 1], C64::new(0.5, 0.3)),
                ([0, 1], [3, 0], C64::new(0.5, -0.3)),
                ([1, 1], [0, 2], C64::new(-2.0, 7.0)),
                ([0, 2], [1, 1], C64::new(-2.0, -7.0)),
            ],
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let z = CPoint::from_parts(&[
                (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            ]);
            let (_, defect) = p.evaluate_with_defect(&z).unwrap();
            assert!(defect < 1e-12, "defect {defect}");
        }
    }
}
