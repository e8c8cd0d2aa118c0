//! Monomials over `n` variables and the degree-lexicographic term order.
//!
//! Within a fixed total degree, exponent tuples are scanned from the first
//! variable to the last; at the first position where they differ, the term
//! with the *larger* exponent is the *smaller* term. For two variables
//! `x` (first) and `y` this gives `x < y < x^2 < xy < y^2 < x^3 < x^2y < ...`.
//! Variable order is the column order of the data, so reordering features
//! can change which generators are found.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Human-readable name of the term order, written into serialized models.
pub const TERM_ORDER: &str =
    "deglex: total degree first; on ties the earliest variable with the larger exponent gives the smaller term";

/// A monomial `x1^e1 * ... * xn^en`, stored as its exponent tuple.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Term {
    exponents: Box<[u32]>,
    degree: u32,
}

impl Term {
    pub fn new(exponents: impl Into<Vec<u32>>) -> Self {
        let exponents: Box<[u32]> = exponents.into().into_boxed_slice();
        let degree = exponents.iter().sum();
        Self { exponents, degree }
    }

    /// The constant monomial `1` in `nvars` variables.
    pub fn one(nvars: usize) -> Self {
        Self::new(vec![0; nvars])
    }

    /// The degree-1 monomial `x_{var+1}` (zero-based `var`).
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        Self::new(e)
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    fn check_same_arity(&self, other: &Term) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::Dimension {
                expected: self.nvars(),
                found: other.nvars(),
            });
        }
        Ok(())
    }

    /// Exponentwise sum.
    pub fn multiply(&self, other: &Term) -> Result<Term> {
        self.check_same_arity(other)?;
        Ok(Term::new(
            self.exponents
                .iter()
                .zip(other.exponents.iter())
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        ))
    }

    /// `true` iff `self` divides `other`, i.e. exponentwise `self <= other`.
    pub fn divides(&self, other: &Term) -> Result<bool> {
        self.check_same_arity(other)?;
        Ok(self.divides_unchecked(other))
    }

    pub(crate) fn divides_unchecked(&self, other: &Term) -> bool {
        self.degree <= other.degree && self.exponents.iter().zip(other.exponents.iter()).all(|(a, b)| a <= b)
    }

    /// `self / x_var`, or `None` if `x_var` does not divide `self`.
    pub fn divide_by_variable(&self, var: usize) -> Option<Term> {
        if self.exponents.get(var).copied().unwrap_or(0) == 0 {
            return None;
        }
        let mut e = self.exponents.to_vec();
        e[var] -= 1;
        Some(Term::new(e))
    }

    /// Factorization used by the evaluation cache: the term divided by its
    /// lowest-index variable with positive exponent, together with that
    /// variable. `None` for the constant term.
    pub fn factorization(&self) -> Option<(Term, usize)> {
        let var = self.exponents.iter().position(|&e| e > 0)?;
        Some((self.divide_by_variable(var)?, var))
    }

    /// Direct evaluation at a single point via repeated multiplication.
    pub fn evaluate_at<T: crate::Scalar>(&self, point: &[T]) -> T {
        self.exponents
            .iter()
            .zip(point)
            .fold(T::one(), |acc, (&e, &x)| acc * x.powi(e as i32))
    }

    /// Renders the term using caller-supplied variable names.
    pub fn render_with(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.exponents.iter().enumerate() {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
            match e {
                0 => {}
                1 => parts.push(name),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        parts.join("*")
    }

    fn cmp_same_arity(&self, other: &Term) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.exponents.iter().zip(other.exponents.iter()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    // Larger exponent on the earliest differing variable is the smaller term.
                    ord => return ord.reverse(),
                }
            }
            Ordering::Equal
        })
    }
}

/// Degree-lexicographic comparison of two terms over the same variables.
pub fn deglex_compare(a: &Term, b: &Term) -> Result<Ordering> {
    a.check_same_arity(b)?;
    Ok(a.cmp_same_arity(b))
}

impl Ord for Term {
    /// Degree-lexicographic order; terms over different variable counts are
    /// ordered by arity last so that `Ord` stays total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_same_arity(other)
            .then_with(|| self.nvars().cmp(&other.nvars()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&[]))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.exponents.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Vec::<u32>::deserialize(deserializer).map(Term::new)
    }
}

/// All terms of exactly degree `d` in `nvars` variables, ascending.
pub fn terms_of_degree(nvars: usize, d: u32) -> Vec<Term> {
    fn rec(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Term>) {
        if slots == 1 {
            prefix.push(left);
            out.push(Term::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(prefix, left - e, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(&mut Vec::with_capacity(nvars), d, nvars, &mut out);
    out.sort();
    out
}
