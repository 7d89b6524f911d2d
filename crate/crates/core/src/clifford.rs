//! The Clifford algebra of an orthonormal frame, with the
//! spinor-representation trace used by every boundary-case computation.
//!
//! Only orthonormal-frame relations are implemented (`c_i c_j = -c_j c_i` for
//! `i ≠ j`, `c_i² = -1`): the whole boundary computation happens at a single
//! point in an orthonormal frame, so general-metric products are unnecessary.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::{ExactScalar, GaussianRational};
use crate::{Error, Result};

/// Product `c(e_{i₁})⋯c(e_{i_k})` in canonical form: indices strictly
/// increasing, the empty word is the identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct CliffordWord(Vec<u8>);

impl CliffordWord {
    pub fn identity() -> Self {
        CliffordWord(Vec::new())
    }

    /// Panics if the indices are not strictly increasing or contain zero.
    pub fn new(indices: Vec<u8>) -> Self {
        assert!(
            indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i > 0),
            "clifford word indices must be strictly increasing and 1-based"
        );
        CliffordWord(indices)
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for CliffordWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        for i in &self.0 {
            write!(f, "c(e_{i})")?;
        }
        Ok(())
    }
}

/// Finite sum of ordered Clifford words with [`ExactScalar`] weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliffordElement {
    n: u8,
    terms: BTreeMap<CliffordWord, ExactScalar>,
}

impl CliffordElement {
    pub fn zero(n: u8) -> Self {
        CliffordElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(n: u8, c: ExactScalar) -> Self {
        let mut out = CliffordElement::zero(n);
        out.add_term(CliffordWord::identity(), c);
        out
    }

    pub fn one(n: u8) -> Self {
        CliffordElement::scalar(n, ExactScalar::one())
    }

    /// The generator `c(e_i)`, 1-based.
    pub fn generator(n: u8, i: u8) -> Self {
        assert!(i >= 1 && i <= n, "generator index out of range");
        let mut out = CliffordElement::zero(n);
        out.add_term(CliffordWord::new(vec![i]), ExactScalar::one());
        out
    }

    pub fn word(n: u8, w: CliffordWord, c: ExactScalar) -> Self {
        assert!(w.indices().iter().all(|&i| i <= n));
        let mut out = CliffordElement::zero(n);
        out.add_term(w, c);
        out
    }

    pub fn dimension(&self) -> u8 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CliffordWord, &ExactScalar)> {
        self.terms.iter()
    }

    /// Coefficient of the identity word.
    pub fn scalar_part(&self) -> ExactScalar {
        self.terms
            .get(&CliffordWord::identity())
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    /// `true` iff the element is a multiple of the identity word.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|w| w.is_empty())
    }

    fn add_term(&mut self, w: CliffordWord, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_dim(&self, other: &CliffordElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &CliffordElement) -> Result<CliffordElement> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> CliffordElement {
        CliffordElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), -c))
                .collect(),
        }
    }

    pub fn scale(&self, c: &ExactScalar) -> CliffordElement {
        if c.is_zero() {
            return CliffordElement::zero(self.n);
        }
        let mut out = CliffordElement::zero(self.n);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    pub fn scale_gaussian(&self, c: &GaussianRational) -> CliffordElement {
        self.scale(&ExactScalar::from_gaussian(c.clone()))
    }

    /// Word-level product reduced by the orthonormal relations.
    fn mul_words(a: &CliffordWord, b: &CliffordWord) -> (CliffordWord, i8) {
        let mut v = a.0.clone();
        let mut sign: i8 = 1;
        for &x in &b.0 {
            // Walk x leftwards past larger indices; each swap anticommutes.
            let mut pos = v.len();
            while pos > 0 && v[pos - 1] > x {
                pos -= 1;
                sign = -sign;
            }
            if pos > 0 && v[pos - 1] == x {
                // c_x c_x = -1
                v.remove(pos - 1);
                sign = -sign;
            } else {
                v.insert(pos, x);
            }
        }
        (CliffordWord(v), sign)
    }

    pub fn mul(&self, other: &CliffordElement) -> Result<CliffordElement> {
        self.check_dim(other)?;
        let mut out = CliffordElement::zero(self.n);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let (w, sign) = CliffordElement::mul_words(wa, wb);
                let mut c = ca * cb;
                if sign < 0 {
                    c = -c;
                }
                out.add_term(w, c);
            }
        }
        Ok(out)
    }

    /// Default spinor-representation dimension `2^{⌊n/2⌋}`.
    pub fn default_rep_dim(n: u8) -> u32 {
        1u32 << (n / 2)
    }

    /// Spinor trace: `rep_dim` on the identity word, zero on every other
    /// canonical word, extended linearly.
    pub fn trace_with_rep_dim(&self, rep_dim: u32) -> ExactScalar {
        &self.scalar_part() * &ExactScalar::from_int(rep_dim as i64)
    }

    pub fn trace(&self) -> ExactScalar {
        self.trace_with_rep_dim(Self::default_rep_dim(self.n))
    }

    /// Substitute a generator of the coefficient ring in every weight.
    pub fn substitute(&self, g: crate::scalar::Generator, value: &ExactScalar) -> CliffordElement {
        let mut out = CliffordElement::zero(self.n);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.substitute(g, value));
        }
        out
    }
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                if w.is_empty() {
                    format!("({})", c)
                } else {
                    format!("({})*{}", c, w)
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}
