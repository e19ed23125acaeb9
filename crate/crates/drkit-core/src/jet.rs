//! Truncated Taylor series ("jets") in one variable.
//!
//! A [`Jet`] stores the Taylor coefficients `c[k] = f^(k)(x0)/k!` of a
//! function at an implicit base point, up to a fixed order.  Arithmetic on
//! jets is exact on polynomial truncations, which makes them the right tool
//! for applying iterated first-order derivations of the form `f -> -f'/g`
//! (see [`jet_apply_derivation`]) without symbolic algebra and without the
//! noise of nested finite differences.
//!
//! Orders are capped at [`JET_MAX`]` - 1`: the deepest derivation chains in
//! this crate consume well under ten derivative orders, and a fixed-size
//! array keeps jets `Copy` and allocation-free inside quadrature loops.

use crate::{DrError, Result};

/// Maximum number of stored coefficients (maximum order + 1).
pub const JET_MAX: usize = 17;

/// Truncated Taylor expansion of a function at an implicit base point.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    len: usize,
    c: [f64; JET_MAX],
}

impl Jet {
    /// Jet of the constant function `v`, carried to the given order.
    pub fn constant(v: f64, order: usize) -> Jet {
        assert!(order < JET_MAX, "jet order {order} exceeds cap {}", JET_MAX - 1);
        let mut c = [0.0; JET_MAX];
        c[0] = v;
        Jet { len: order + 1, c }
    }

    /// Jet of the identity function at base point `x0`.
    pub fn variable(x0: f64, order: usize) -> Jet {
        assert!(order < JET_MAX, "jet order {order} exceeds cap {}", JET_MAX - 1);
        let mut c = [0.0; JET_MAX];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { len: order + 1, c }
    }

    /// Jet with explicit Taylor coefficients `coeffs[k] = f^(k)(x0)/k!`.
    pub fn from_coeffs(coeffs: &[f64]) -> Jet {
        assert!(!coeffs.is_empty() && coeffs.len() <= JET_MAX);
        let mut c = [0.0; JET_MAX];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Jet { len: coeffs.len(), c }
    }

    pub fn order(&self) -> usize {
        self.len - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    /// k-th Taylor coefficient (0 beyond the stored order).
    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.c[k]
        } else {
            0.0
        }
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// j-th derivative at the base point, i.e. `c[j] * j!`.
    pub fn deriv_at_base(&self, j: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=j {
            fact *= i as f64;
        }
        self.coeff(j) * fact
    }

    fn bin_len(&self, o: &Jet) -> usize {
        self.len.min(o.len)
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let len = self.bin_len(o);
        let mut c = [0.0; JET_MAX];
        for k in 0..len {
            c[k] = self.c[k] + o.c[k];
        }
        Jet { len, c }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let len = self.bin_len(o);
        let mut c = [0.0; JET_MAX];
        for k in 0..len {
            c[k] = self.c[k] - o.c[k];
        }
        Jet { len, c }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, w: f64) -> Jet {
        let mut out = *self;
        for k in 0..self.len {
            out.c[k] *= w;
        }
        out
    }

    pub fn add_scalar(&self, v: f64) -> Jet {
        let mut out = *self;
        out.c[0] += v;
        out
    }

    /// Cauchy product, truncated to the shorter operand.
    pub fn mul(&self, o: &Jet) -> Jet {
        let len = self.bin_len(o);
        let mut c = [0.0; JET_MAX];
        for i in 0..len {
            let ai = self.c[i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..len - i {
                c[i + j] += ai * o.c[j];
            }
        }
        Jet { len, c }
    }

    /// Quotient; requires a nonzero constant coefficient in the divisor.
    pub fn try_div(&self, o: &Jet) -> Result<Jet> {
        if o.c[0] == 0.0 {
            return Err(DrError::Domain(
                "jet division by zero constant coefficient".into(),
            ));
        }
        let len = self.bin_len(o);
        let mut q = [0.0; JET_MAX];
        for k in 0..len {
            let mut acc = self.c[k];
            for i in 0..k {
                acc -= q[i] * o.c[k - i];
            }
            q[k] = acc / o.c[0];
        }
        Ok(Jet { len, c: q })
    }

    /// Reciprocal jet `1/self`.
    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(1.0, self.order()).try_div(self)
    }

    pub fn exp(&self) -> Jet {
        let len = self.len;
        let mut e = [0.0; JET_MAX];
        e[0] = self.c[0].exp();
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (j as f64) * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Jet { len, c: e }
    }

    pub fn ln(&self) -> Result<Jet> {
        if self.c[0] <= 0.0 {
            return Err(DrError::Domain(format!(
                "jet ln of non-positive constant coefficient {}",
                self.c[0]
            )));
        }
        let len = self.len;
        let mut l = [0.0; JET_MAX];
        l[0] = self.c[0].ln();
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..k {
                acc += (j as f64) * l[j] * self.c[k - j];
            }
            l[k] = (self.c[k] - acc / k as f64) / self.c[0];
        }
        Ok(Jet { len, c: l })
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.c[0] <= 0.0 {
            return Err(DrError::Domain(format!(
                "jet sqrt of non-positive constant coefficient {}",
                self.c[0]
            )));
        }
        let len = self.len;
        let mut s = [0.0; JET_MAX];
        s[0] = self.c[0].sqrt();
        for k in 1..len {
            let mut acc = 0.0;
            for j in 1..k {
                acc += s[j] * s[k - j];
            }
            s[k] = (self.c[k] - acc) / (2.0 * s[0]);
        }
        Ok(Jet { len, c: s })
    }

    /// Real power `self^p` for a positive constant coefficient.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        Ok(self.ln()?.scale(p).exp())
    }

    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        let e = self.exp();
        let em = self.neg().exp();
        (e.sub(&em).scale(0.5), e.add(&em).scale(0.5))
    }

    pub fn sinh(&self) -> Jet {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Jet {
        self.sinh_cosh().1
    }

    /// Derivative jet, one order lower: `d[k] = (k+1) c[k+1]`.
    pub fn derive(&self) -> Result<Jet> {
        if self.len < 2 {
            return Err(DrError::Domain(
                "jet order exhausted: cannot differentiate an order-0 jet".into(),
            ));
        }
        let len = self.len - 1;
        let mut d = [0.0; JET_MAX];
        for k in 0..len {
            d[k] = (k as f64 + 1.0) * self.c[k + 1];
        }
        Ok(Jet { len, c: d })
    }

    /// Composition `outer(inner(.))`.  `outer` must be expanded at the base
    /// value `inner.value()`.
    pub fn compose(outer: &Jet, inner: &Jet) -> Jet {
        let len = outer.bin_len(inner);
        let mut dx = *inner;
        dx.len = len;
        dx.c[0] = 0.0;
        let mut acc = Jet::constant(outer.c[len - 1], len - 1);
        for k in (0..len - 1).rev() {
            acc = acc.mul(&dx).add_scalar(outer.c[k]);
        }
        acc
    }

    /// Horner evaluation at offset `dx` from the base point.
    pub fn eval(&self, dx: f64) -> f64 {
        let mut acc = self.c[self.len - 1];
        for k in (0..self.len - 1).rev() {
            acc = acc * dx + self.c[k];
        }
        acc
    }

    /// j-th derivative evaluated at offset `dx` from the base point.
    pub fn eval_deriv(&self, dx: f64, j: usize) -> f64 {
        if j >= self.len {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in (j..self.len).rev() {
            // falling factorial k (k-1) ... (k-j+1)
            let mut fall = 1.0;
            for i in 0..j {
                fall *= (k - i) as f64;
            }
            acc = acc * dx + self.c[k] * fall;
        }
        acc
    }
}

/// Applies the derivation `f -> -f'/g` and returns a jet one order lower.
///
/// This is the numeric form of the radial derivations `-(1/sinh r) d/dr`
/// and `-(1/sinh(r/2)) d/dr` used throughout the kernel recursions: `g` is
/// the jet of the denominator at the same base point.
pub fn jet_apply_derivation(f: &Jet, g_denominator: &Jet) -> Result<Jet> {
    let d = f.derive()?;
    d.neg().try_div(g_denominator)
}
