//! Point sets, polynomials and their evaluation vectors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomials::Term;
use crate::scalar::{dot, norm_sq, Scalar};

/// `m` points in `n` dimensions, stored column by column so that the
/// evaluation vector of `x_i` is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T> {
    columns: Vec<Vec<T>>,
    len: usize,
}

impl<T: Scalar> PointSet<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Data("point set is empty".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::Data("points have no coordinates".into()));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Data(format!("non-finite value at point {i}, coordinate {j}")));
                }
                columns[j].push(v);
            }
        }
        Ok(Self {
            columns,
            len: rows.len(),
        })
    }

    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let len = columns.first().map(Vec::len).unwrap_or(0);
        if columns.is_empty() || len == 0 {
            return Err(Error::Data("point set is empty".into()));
        }
        for c in &columns {
            if c.len() != len {
                return Err(Error::Dimension {
                    expected: len,
                    found: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data("non-finite value in point set".into()));
            }
        }
        Ok(Self { columns, len })
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of coordinates `n`.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, var: usize) -> &[T] {
        &self.columns[var]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.len).map(|i| self.row(i)).collect()
    }

    /// Points at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data("selection is empty".into()));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| indices.iter().map(|&i| c[i]).collect())
            .collect();
        Ok(Self {
            columns,
            len: indices.len(),
        })
    }

    pub fn map_columns(&self, mut f: impl FnMut(usize, &[T]) -> Vec<T>) -> Result<Self> {
        Self::from_columns(self.columns.iter().enumerate().map(|(j, c)| f(j, c)).collect())
    }
}

/// Cached evaluation vectors of terms over one point set.
///
/// Every non-constant entry was produced as `parent(X) * x_var(X)` for the
/// factorization returned by [`Term::factorization`].
#[derive(Clone, Debug, Default)]
pub struct EvaluationCache<T> {
    vectors: HashMap<Term, Vec<T>>,
    factors: HashMap<Term, (Term, usize)>,
}

impl<T: Scalar> EvaluationCache<T> {
    pub fn new() -> Self {
        Self {
            vectors: HashMap::new(),
            factors: HashMap::new(),
        }
    }

    pub fn get(&self, t: &Term) -> Option<&[T]> {
        self.vectors.get(t).map(Vec::as_slice)
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.vectors.contains_key(t)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The `(parent, variable)` pair whose product produced `t`.
    pub fn factorization_of(&self, t: &Term) -> Option<&(Term, usize)> {
        self.factors.get(t)
    }

    /// Evaluates `t` over `points`, inserting the result in the cache.
    ///
    /// Degree 0 and 1 come straight from the data; higher degrees need the
    /// parent (one degree lower) to be cached already.
    pub fn evaluate_term(&mut self, t: &Term, points: &PointSet<T>) -> Result<&[T]> {
        if t.nvars() != points.dim() {
            return Err(Error::Dimension {
                expected: points.dim(),
                found: t.nvars(),
            });
        }
        if !self.vectors.contains_key(t) {
            let v = match t.degree() {
                0 => vec![T::one(); points.len()],
                1 => {
                    let var = t.exponents().iter().position(|&e| e == 1).expect("degree 1");
                    points.column(var).to_vec()
                }
                _ => {
                    let (parent, var) = t.factorization().expect("non-constant");
                    let pv = self.vectors.get(&parent).ok_or_else(|| Error::MissingParent {
                        term: t.to_string(),
                        parent: parent.to_string(),
                    })?;
                    let col = points.column(var);
                    let v = pv.iter().zip(col).map(|(&a, &b)| a * b).collect();
                    self.factors.insert(t.clone(), (parent, var));
                    v
                }
            };
            self.vectors.insert(t.clone(), v);
        }
        Ok(self.vectors.get(t).expect("inserted"))
    }

    /// Like [`evaluate_term`](Self::evaluate_term) but first evaluates any
    /// missing ancestors along the factorization chain.
    pub fn ensure_term(&mut self, t: &Term, points: &PointSet<T>) -> Result<&[T]> {
        let mut chain = Vec::new();
        let mut cur = t.clone();
        while cur.degree() > 1 && !self.vectors.contains_key(&cur) {
            let (parent, _) = cur.factorization().expect("non-constant");
            chain.push(cur);
            cur = parent;
        }
        self.evaluate_term(&cur, points)?;
        for term in chain.iter().rev() {
            self.evaluate_term(term, points)?;
        }
        self.evaluate_term(t, points)
    }
}

/// A polynomial `sum_i c_i t_i + t` with leading term `t` and leading
/// coefficient fixed to one. Non-leading terms are strictly ascending and
/// all smaller than the leading term; zero coefficients are kept so that
/// the coefficient vector has one entry per term of the order ideal it was
/// fitted against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Polynomial<T> {
    terms: Vec<Term>,
    coefficients: Vec<T>,
    leading: Term,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(terms: Vec<Term>, coefficients: Vec<T>, leading: Term) -> Result<Self> {
        if terms.len() != coefficients.len() {
            return Err(Error::Dimension {
                expected: terms.len(),
                found: coefficients.len(),
            });
        }
        for t in &terms {
            if t.nvars() != leading.nvars() {
                return Err(Error::Dimension {
                    expected: leading.nvars(),
                    found: t.nvars(),
                });
            }
        }
        let ascending = terms
            .iter()
            .chain(std::iter::once(&leading))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[0] < w[1]);
        if !ascending {
            return Err(Error::Data(
                "polynomial support must be strictly ascending with the leading term last".into(),
            ));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("non-finite polynomial coefficient".into()));
        }
        Ok(Self {
            terms,
            coefficients,
            leading,
        })
    }

    /// The polynomial consisting of the single term `t`.
    pub fn monomial(t: Term) -> Self {
        Self {
            terms: Vec::new(),
            coefficients: Vec::new(),
            leading: t,
        }
    }

    pub fn leading_term(&self) -> &Term {
        &self.leading
    }

    pub fn leading_coefficient(&self) -> T {
        T::one()
    }

    /// Non-leading terms, ascending.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficients of [`terms`](Self::terms); the leading 1 is not included.
    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    /// All terms including the leading one, ascending.
    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().chain(std::iter::once(&self.leading))
    }

    pub fn degree(&self) -> u32 {
        self.leading.degree()
    }

    pub fn nvars(&self) -> usize {
        self.leading.nvars()
    }

    /// Direct evaluation at one point.
    pub fn evaluate_at(&self, point: &[T]) -> T {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .fold(self.leading.evaluate_at(point), |acc, (t, &c)| {
                acc + c * t.evaluate_at(point)
            })
    }

    pub fn render_with(&self, names: &[String]) -> String {
        let mut s = self.leading.render_with(names);
        for (t, &c) in self.terms.iter().zip(&self.coefficients).rev() {
            if c == T::zero() {
                continue;
            }
            let sign = if c < T::zero() { '-' } else { '+' };
            s.push_str(&format!(" {sign} {}*{}", c.abs(), t.render_with(names)));
        }
        s
    }
}

/// `f(X) = sum_i c_i t_i(X) + lt(f)(X)`.
pub fn evaluate_polynomial<T: Scalar>(
    f: &Polynomial<T>,
    points: &PointSet<T>,
    cache: &mut EvaluationCache<T>,
) -> Result<Vec<T>> {
    let mut out = cache.ensure_term(&f.leading, points)?.to_vec();
    for (t, &c) in f.terms.iter().zip(&f.coefficients) {
        if c == T::zero() {
            continue;
        }
        let v = cache.ensure_term(t, points)?;
        for (o, &x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// `(1/m) * ||v||^2`.
pub fn mean_square<T: Scalar>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    norm_sq(v) / T::from_usize(v.len()).expect("length")
}

/// Mean squared error `(1/m) ||f(X)||^2` of a polynomial over a point set.
pub fn mse<T: Scalar>(f: &Polynomial<T>, points: &PointSet<T>) -> Result<T> {
    let mut cache = EvaluationCache::new();
    Ok(mean_square(&evaluate_polynomial(f, points, &mut cache)?))
}

/// Regularized vanishing value `mse(f, X) + (lambda/2) ||c||^2` where `c`
/// excludes the leading coefficient.
pub fn regularized_mse<T: Scalar>(f: &Polynomial<T>, points: &PointSet<T>, lambda: T) -> Result<T> {
    let c = f.coefficients();
    Ok(mse(f, points)? + lambda * T::lit(0.5) * dot(c, c))
}
