//! Homogeneous polynomials and diagonal vector fields.
//!
//! A hypersurface `M` in `CP^n` is given by a homogeneous polynomial
//! `F(Z0, ..., Zn) = 0` of degree `d`, stored sparsely as a map from
//! exponent vectors to complex coefficients. A diagonal field
//! `f = sum_i f_i Z_i d/dZ_i` acts on a monomial `Z^a` by the scalar
//! `<a, f>`, so `f` is tangent to `M` exactly when that scalar is the
//! same for every monomial of `F`; the common value is the weight
//! (`kappa` for `v`, `lambda` for `X`).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for the tangency (weight-spread) test.
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-9;

/// Singular-value cutoff for the tangent-family nullspace, relative to
/// the largest singular value.
pub const DEFAULT_NULLSPACE_TOL: f64 = 1e-10;

/// Tolerance for the sum-to-zero normalization of a [`DiagonalField`],
/// absolute after max-norm scaling.
const SUM_ZERO_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// Sparse homogeneous polynomial defining a hypersurface of `CP^n`.
///
/// Invariants enforced at construction: `n >= 2`, at least one term,
/// every exponent vector has length `n + 1` and the same total degree
/// `d >= 1`, no zero coefficients, no duplicate exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    n: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, C64>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exps: Vec<u32>,
    re: f64,
    im: f64,
}

impl HomogeneousPolynomial {
    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// exact-zero coefficients.
    pub fn new(n: usize, raw: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::AmbientTooSmall(n));
        }
        let mut terms: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (exps, coeff) in raw {
            if exps.len() != n + 1 {
                return Err(Error::LengthMismatch {
                    got: exps.len(),
                    expected: n + 1,
                });
            }
            let entry = terms.entry(exps).or_insert(C64::new(0.0, 0.0));
            *entry += coeff;
        }
        terms.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        if terms.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        let mut degrees = terms.keys().map(|a| a.iter().sum::<u32>());
        let degree = degrees.next().expect("nonempty");
        if let Some(other) = degrees.find(|&g| g != degree) {
            return Err(Error::NotHomogeneous {
                first: degree,
                second: other,
            });
        }
        if degree == 0 {
            return Err(Error::MalformedInput(
                "constant polynomial (degree 0) does not define a hypersurface".into(),
            ));
        }
        Ok(Self { n, degree, terms })
    }

    /// Ambient dimension `n` of `CP^n`.
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Common total degree `d` of the monomials.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The scalar `s = n - d + 1` driving every series; positive exactly
    /// in the Fano range `d <= n`.
    pub fn chern_scale(&self) -> f64 {
        self.n as f64 - self.degree as f64 + 1.0
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (lexicographic exponent) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.terms.iter().map(|(a, &c)| (a.as_slice(), c))
    }

    /// Exponent vectors in canonical order.
    pub fn exponents(&self) -> impl Iterator<Item = &[u32]> {
        self.terms.keys().map(|a| a.as_slice())
    }

    /// Parses the structured JSON form
    /// `{"n": int, "terms": [{"exps": [int...], "re": float, "im": float}...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: PolyJson = serde_json::from_str(text)
            .map_err(|e| Error::MalformedInput(format!("invalid polynomial JSON: {e}")))?;
        Self::new(
            parsed.n,
            parsed
                .terms
                .into_iter()
                .map(|t| (t.exps, C64::new(t.re, t.im))),
        )
    }

    /// Serializes to the structured JSON form accepted by [`Self::from_json`].
    pub fn to_json(&self) -> String {
        let doc = PolyJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson {
                    exps: a.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain struct serializes")
    }

    /// Applies a coordinate permutation: `Z_i -> Z_{perm[i]}`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        assert_eq!(perm.len(), self.n + 1, "permutation length");
        Self::new(
            self.n,
            self.terms.iter().map(|(a, &c)| {
                let mut b = vec![0u32; a.len()];
                for (i, &e) in a.iter().enumerate() {
                    b[perm[i]] = e;
                }
                (b, c)
            }),
        )
    }
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (exps, coeff) in &self.terms {
            let mono: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("Z{i}")
                    } else {
                        format!("Z{i}^{e}")
                    }
                })
                .collect();
            let mono = mono.join("*");
            let piece = if coeff.im == 0.0 {
                if coeff.re == 1.0 && !mono.is_empty() {
                    mono.clone()
                } else if coeff.re == -1.0 && !mono.is_empty() {
                    format!("-{mono}")
                } else if mono.is_empty() {
                    format!("{}", coeff.re)
                } else {
                    format!("{}*{}", coeff.re, mono)
                }
            } else {
                let lit = format_complex(*coeff);
                if mono.is_empty() {
                    format!("({lit})")
                } else {
                    format!("({lit})*{mono}")
                }
            };
            if first {
                write!(f, "{piece}")?;
                first = false;
            } else if let Some(rest) = piece.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {piece}")?;
            }
        }
        Ok(())
    }
}

/// Formats a complex scalar as `a`, `bi`, or `a+bi` with round-trip `f64`
/// precision.
pub fn format_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

// ---------------------------------------------------------------------------
// Text grammar
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    /// A numeric literal immediately followed by `i`, e.g. `3i`; bare `i`
    /// lexes as `Imag(1.0)`.
    Imag(f64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push(Token::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Token::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Token::Star);
                i += 1;
            }
            '^' => {
                toks.push(Token::Caret);
                i += 1;
            }
            '(' => {
                toks.push(Token::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Token::RParen);
                i += 1;
            }
            'Z' | 'z' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start {
                    return Err(Error::MalformedInput(
                        "variable 'Z' must be followed by an index".into(),
                    ));
                }
                let idx: usize = text[start..j]
                    .parse()
                    .map_err(|_| Error::MalformedInput("variable index overflow".into()))?;
                toks.push(Token::Var(idx));
                i = j;
            }
            'i' | 'I' => {
                toks.push(Token::Imag(1.0));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                // optional exponent part
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let value: f64 = text[start..j]
                    .parse()
                    .map_err(|_| Error::MalformedInput(format!("bad number '{}'", &text[start..j])))?;
                if j < bytes.len() && (bytes[j] == b'i' || bytes[j] == b'I') {
                    toks.push(Token::Imag(value));
                    i = j + 1;
                } else {
                    toks.push(Token::Num(value));
                    i = j;
                }
            }
            other => {
                return Err(Error::MalformedInput(format!(
                    "unexpected character '{other}'"
                )))
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Parses a parenthesized complex literal body: `a`, `bi`, `a+bi`, ...
    /// The sequence of signed parts is summed.
    fn complex_body(&mut self) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        let mut any = false;
        loop {
            let mut sign = 1.0;
            loop {
                match self.peek() {
                    Some(Token::Plus) => {
                        self.bump();
                    }
                    Some(Token::Minus) => {
                        sign = -sign;
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.bump() {
                Some(Token::Num(x)) => acc += C64::new(sign * x, 0.0),
                Some(Token::Imag(y)) => acc += C64::new(0.0, sign * y),
                _ => return Err(Error::MalformedInput("expected complex literal".into())),
            }
            any = true;
            match self.peek() {
                Some(Token::Plus) | Some(Token::Minus) => continue,
                _ => break,
            }
        }
        if !any {
            return Err(Error::MalformedInput("empty complex literal".into()));
        }
        Ok(acc)
    }

    /// One multiplicative term: product of numeric factors, parenthesized
    /// complex literals, and powered variables. The `*` is optional.
    fn term(&mut self, n: usize) -> Result<(Vec<u32>, C64)> {
        let mut coeff = C64::new(1.0, 0.0);
        let mut exps = vec![0u32; n + 1];
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(Token::Num(x)) => {
                    coeff *= C64::new(*x, 0.0);
                    self.bump();
                }
                Some(Token::Imag(y)) => {
                    coeff *= C64::new(0.0, *y);
                    self.bump();
                }
                Some(Token::LParen) => {
                    self.bump();
                    let lit = self.complex_body()?;
                    match self.bump() {
                        Some(Token::RParen) => {}
                        _ => return Err(Error::MalformedInput("missing ')'".into())),
                    }
                    coeff *= lit;
                }
                Some(Token::Var(idx)) => {
                    let idx = *idx;
                    if idx > n {
                        return Err(Error::UnknownVariable { index: idx, n });
                    }
                    self.bump();
                    let mut exp = 1u32;
                    if let Some(Token::Caret) = self.peek() {
                        self.bump();
                        match self.bump() {
                            Some(Token::Num(x)) if x.fract() == 0.0 && *x >= 0.0 => {
                                exp = *x as u32;
                            }
                            _ => {
                                return Err(Error::MalformedInput(
                                    "exponent must be a nonnegative integer".into(),
                                ))
                            }
                        }
                    }
                    exps[idx] += exp;
                }
                Some(Token::Star) => {
                    self.bump();
                    if !saw_factor {
                        return Err(Error::MalformedInput("'*' without left factor".into()));
                    }
                    continue;
                }
                _ => break,
            }
            saw_factor = true;
        }
        if !saw_factor {
            return Err(Error::MalformedInput("empty term".into()));
        }
        Ok((exps, coeff))
    }
}

/// Parses polynomial text in the grammar
/// `c * Z0^e0 * Z1^e1 * ...  +  ...` where `c` is a decimal or a
/// parenthesized `a+bi` complex literal (omitted `c` means 1, `*` and
/// `^1` are optional, variables are `Z0..Zn`).
///
/// Input starting with `{` is handled as the structured JSON form.
pub fn parse_polynomial(text: &str, n: usize) -> Result<HomogeneousPolynomial> {
    if text.trim_start().starts_with('{') {
        let poly = HomogeneousPolynomial::from_json(text)?;
        if poly.ambient_dim() != n {
            return Err(Error::LengthMismatch {
                got: poly.ambient_dim() + 1,
                expected: n + 1,
            });
        }
        return Ok(poly);
    }
    if n < 2 {
        return Err(Error::AmbientTooSmall(n));
    }
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::EmptyPolynomial);
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
    };
    let mut raw = Vec::new();
    loop {
        let mut sign = 1.0;
        while let Some(tok) = parser.peek() {
            match tok {
                Token::Plus => {
                    parser.bump();
                }
                Token::Minus => {
                    sign = -sign;
                    parser.bump();
                }
                _ => break,
            }
        }
        let (exps, coeff) = parser.term(n)?;
        raw.push((exps, coeff * C64::new(sign, 0.0)));
        match parser.peek() {
            None => break,
            Some(Token::Plus) | Some(Token::Minus) => continue,
            Some(t) => {
                return Err(Error::MalformedInput(format!(
                    "unexpected token {t:?} between terms"
                )))
            }
        }
    }
    HomogeneousPolynomial::new(n, raw)
}

/// Largest variable index mentioned in polynomial text (or JSON), useful
/// for inferring the ambient dimension before a full parse.
pub fn max_variable_index(text: &str) -> Result<usize> {
    if text.trim_start().starts_with('{') {
        let parsed: PolyJson = serde_json::from_str(text)
            .map_err(|e| Error::MalformedInput(format!("invalid polynomial JSON: {e}")))?;
        return Ok(parsed.n);
    }
    let toks = tokenize(text)?;
    toks.iter()
        .filter_map(|t| match t {
            Token::Var(i) => Some(*i),
            _ => None,
        })
        .max()
        .ok_or(Error::EmptyPolynomial)
}

// ---------------------------------------------------------------------------
// Complex literals (shared with the CLI vector grammar)
// ---------------------------------------------------------------------------

/// Parses a standalone complex literal: `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::MalformedInput("empty complex literal".into()));
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
    };
    let value = parser.complex_body()?;
    if parser.pos != toks.len() {
        return Err(Error::MalformedInput(format!(
            "trailing input in complex literal '{text}'"
        )));
    }
    Ok(value)
}

/// Parses a comma-separated vector of complex literals.
pub fn parse_complex_vector(text: &str) -> Result<Vec<C64>> {
    text.split(',').map(|s| parse_complex(s.trim())).collect()
}

// ---------------------------------------------------------------------------
// Diagonal fields
// ---------------------------------------------------------------------------

/// Coefficient vector of a diagonal holomorphic field
/// `sum_i c_i Z_i d/dZ_i`, normalized so the coordinates sum to zero
/// (the Euler field acts trivially on `CP^n`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalField {
    coeffs: Vec<C64>,
}

impl DiagonalField {
    /// Wraps a coefficient vector, enforcing the sum-to-zero invariant
    /// (tolerance 1e-12 absolute after max-norm scaling).
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if scale > 0.0 {
            let sum: C64 = coeffs.iter().sum();
            if sum.norm() > SUM_ZERO_TOL * scale {
                return Err(Error::NotNormalized(sum.norm() / scale));
            }
        }
        Ok(Self { coeffs })
    }

    /// The zero field on `CP^n` (pass `len = n + 1`).
    pub fn zero(len: usize) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Largest coordinate magnitude.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `self * a` (tangency and the sum-zero invariant are preserved).
    pub fn scale(&self, a: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + other`, entrywise.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Real linear combination `sum_j weights[j] * fields[j]`.
    pub fn combine(fields: &[DiagonalField], weights: &[f64]) -> Self {
        assert_eq!(fields.len(), weights.len(), "combination length mismatch");
        assert!(!fields.is_empty(), "empty combination");
        let len = fields[0].len();
        let mut coeffs = vec![C64::new(0.0, 0.0); len];
        for (field, &w) in fields.iter().zip(weights) {
            for (acc, c) in coeffs.iter_mut().zip(field.coeffs()) {
                *acc += c * w;
            }
        }
        Self { coeffs }
    }

    /// Applies a coordinate permutation: entry `i` moves to `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len(), "permutation length");
        let mut coeffs = vec![C64::new(0.0, 0.0); self.len()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[perm[i]] = c;
        }
        Self { coeffs }
    }
}

impl fmt::Display for DiagonalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|&c| format_complex(c)).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Projects an arbitrary coefficient vector onto the sum-zero gauge by
/// subtracting the mean, returning the normalized field and the shift.
///
/// Any weight computed for the normalized field differs from the raw
/// field's by `-shift * d`. A second centering pass absorbs the rounding
/// of the first so the constructor's tolerance always holds.
pub fn normalize_field(raw: &[C64]) -> (DiagonalField, C64) {
    let len = raw.len().max(1) as f64;
    let mean: C64 = raw.iter().sum::<C64>() / len;
    let mut coeffs: Vec<C64> = raw.iter().map(|&c| c - mean).collect();
    let residue: C64 = coeffs.iter().sum::<C64>() / len;
    for c in coeffs.iter_mut() {
        *c -= residue;
    }
    let field = DiagonalField::new(coeffs).expect("centered vector sums to zero");
    (field, mean + residue)
}

// ---------------------------------------------------------------------------
// Weights and the tangent family
// ---------------------------------------------------------------------------

/// The eigenvalue of a tangent diagonal field acting on `F`, together with
/// a monomial witnessing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    /// The common value `<a, f>` over all monomials of `F`.
    pub value: C64,
    /// An exponent vector of `F` attaining the value (largest magnitude).
    pub witness_exponent: Vec<u32>,
}

fn monomial_weight(exps: &[u32], field: &DiagonalField) -> C64 {
    exps.iter()
        .zip(field.coeffs())
        .map(|(&a, &c)| c * a as f64)
        .sum()
}

/// Extracts the weight of a diagonal field on `F`, failing with
/// [`Error::NotTangent`] when the per-monomial values `<a_j, f>` spread
/// beyond `tol` relative to the largest weight magnitude.
///
/// A floor of `64 eps * d * max|f_i|` (the roundoff scale of the dot
/// products themselves) keeps fields with an exactly-zero weight, such as
/// numerically computed tangent-basis elements, from failing spuriously.
pub fn weight_of(p: &HomogeneousPolynomial, f: &DiagonalField, tol: f64) -> Result<Weight> {
    if f.len() != p.ambient_dim() + 1 {
        return Err(Error::LengthMismatch {
            got: f.len(),
            expected: p.ambient_dim() + 1,
        });
    }
    let weights: Vec<C64> = p.exponents().map(|a| monomial_weight(a, f)).collect();
    let (idx_max, w_max) = weights
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
        .map(|(i, w)| (i, *w))
        .expect("polynomial is nonempty");
    let spread = weights
        .iter()
        .map(|w| (w - w_max).norm())
        .fold(0.0f64, f64::max);
    let noise_floor = 64.0 * f64::EPSILON * p.degree() as f64 * f.max_norm();
    let allowed = (tol * w_max.norm()).max(noise_floor);
    if spread > allowed {
        return Err(Error::NotTangent { spread, allowed });
    }
    let witness = p.exponents().nth(idx_max).expect("witness index in range");
    Ok(Weight {
        value: w_max,
        witness_exponent: witness.to_vec(),
    })
}

/// Orthonormal basis of the real tangent diagonal family
/// `{f : sum_i f_i = 0 and <a_j - a_1, f> = 0 for all monomials a_j}`.
///
/// Computed as the nullspace of the stacked constraint matrix by singular
/// value decomposition with cutoff `tol` times the largest singular value.
/// Returns the empty vector when only `f = 0` solves the system.
pub fn tangent_field_basis(p: &HomogeneousPolynomial, tol: f64) -> Vec<DiagonalField> {
    let cols = p.ambient_dim() + 1;
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0; cols]];
    let mut exps = p.exponents();
    let first: Vec<u32> = exps.next().expect("nonempty").to_vec();
    for a in exps {
        rows.push(
            a.iter()
                .zip(&first)
                .map(|(&aj, &a1)| aj as f64 - a1 as f64)
                .collect(),
        );
    }
    // Pad with zero rows so the thin SVD still carries all right singular
    // vectors (the kernel lives in V).
    while rows.len() < cols {
        rows.push(vec![0.0; cols]);
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let mat = nalgebra::DMatrix::from_row_slice(rows.len(), cols, &flat);
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = tol * sigma_max;
    let mut basis = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            let row: Vec<f64> = v_t.row(j).iter().copied().collect();
            basis.push(DiagonalField::from_real(&row).expect("kernel vector is traceless"));
        }
    }
    basis
}
