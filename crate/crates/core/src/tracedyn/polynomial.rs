use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;
use rand_distr::{Distribution, Uniform};

use super::{TraceError, TracePhaseSpace};
use crate::numkit::ComplexMatrix;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Q(usize),
    P(usize),
}

impl Symbol {
    pub fn index(self) -> usize {
        match self {
            Symbol::Q(r) | Symbol::P(r) => r,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Q(r) => write!(f, "q{r}"),
            Symbol::P(r) => write!(f, "p{r}"),
        }
    }
}

pub type Word = Vec<Symbol>;

fn canonical_rotation(w: &[Symbol]) -> Word {
    (0..w.len()).map(|k| w[k..].iter().chain(&w[..k]).copied().collect::<Word>()).min().unwrap_or_default()
}

/// `Σ c_k Tr(w_k)` with words stored as written (no reordering).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TracePolynomial {
    pub terms: Vec<(f64, Word)>,
}

impl TracePolynomial {
    pub fn new(terms: Vec<(f64, Word)>) -> Result<Self, TraceError> {
        if terms.iter().any(|(_, w)| w.is_empty()) {
            return Err(TraceError::EmptyWord);
        }
        Ok(Self { terms })
    }

    /// Parses `"0.5 p0 p0 + 0.5 q0 q0 - 0.1 q0 p1 q0 p1"`. A missing coefficient means 1.
    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        let mut word = Word::new();
        let flush = |sign: f64, coef: &mut Option<f64>, word: &mut Word, terms: &mut Vec<(f64, Word)>| -> Result<(), TraceError> {
            if word.is_empty() {
                return Err(TraceError::EmptyWord);
            }
            terms.push((sign * coef.take().unwrap_or(1.0), core::mem::take(word)));
            Ok(())
        };
        let mut pending = false;
        for tok in text.split_whitespace() {
            match tok {
                "+" | "-" => {
                    if pending {
                        flush(sign, &mut coef, &mut word, &mut terms)?;
                    } else if !terms.is_empty() || coef.is_some() {
                        return Err(TraceError::Parse(tok.to_string()));
                    }
                    sign = if tok == "-" { -1.0 } else { 1.0 };
                    pending = false;
                }
                _ => {
                    let head = tok.as_bytes()[0];
                    if head == b'q' || head == b'p' {
                        let r: usize = tok[1..].parse().map_err(|_| TraceError::Parse(tok.to_string()))?;
                        word.push(if head == b'q' { Symbol::Q(r) } else { Symbol::P(r) });
                        pending = true;
                    } else if !pending && coef.is_none() {
                        coef = Some(tok.parse().map_err(|_| TraceError::Parse(tok.to_string()))?);
                    } else {
                        return Err(TraceError::Parse(tok.to_string()));
                    }
                }
            }
        }
        flush(sign, &mut coef, &mut word, &mut terms)?;
        Ok(Self { terms })
    }

    /// `Tr Σ_r (½ p_r² + ½ q_r²)` plus `λ Σ_r Tr q_r⁴`.
    pub fn anharmonic(r: usize, quartic: f64) -> Self {
        let mut terms = Vec::new();
        for k in 0..r {
            terms.push((0.5, alloc::vec![Symbol::P(k), Symbol::P(k)]));
            terms.push((0.5, alloc::vec![Symbol::Q(k), Symbol::Q(k)]));
            if quartic != 0.0 {
                terms.push((quartic, alloc::vec![Symbol::Q(k); 4]));
            }
        }
        Self { terms }
    }

    /// Random polynomial: `n_terms` words of length 1..=`max_degree` over `r` degrees of
    /// freedom, coefficients uniform in [-1, 1].
    pub fn random<R: RngCore + ?Sized>(rng: &mut R, r: usize, max_degree: usize, n_terms: usize) -> Self {
        let len = Uniform::new_inclusive(1, max_degree.max(1)).unwrap();
        let sym = Uniform::new(0, 2 * r.max(1)).unwrap();
        let coef = Uniform::new_inclusive(-1.0, 1.0).unwrap();
        let terms = (0..n_terms)
            .map(|_| {
                let m = len.sample(rng);
                let w = (0..m)
                    .map(|_| {
                        let s = sym.sample(rng);
                        if s % 2 == 0 { Symbol::Q(s / 2) } else { Symbol::P(s / 2) }
                    })
                    .collect();
                (coef.sample(rng), w)
            })
            .collect();
        Self { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Largest degree-of-freedom index used, plus one.
    pub fn dof(&self) -> usize {
        self.terms.iter().flat_map(|(_, w)| w.iter().map(|s| s.index() + 1)).max().unwrap_or(0)
    }

    pub fn check(&self, state: &TracePhaseSpace) -> Result<(), TraceError> {
        for (_, w) in &self.terms {
            if w.is_empty() {
                return Err(TraceError::EmptyWord);
            }
            if let Some(s) = w.iter().find(|s| s.index() >= state.dof()) {
                return Err(TraceError::SymbolOutOfRange(*s));
            }
        }
        Ok(())
    }

    /// Whether the polynomial equals its word-reversed image up to cyclic rotation, so that
    /// it is real on Hermitian states and its flow keeps them Hermitian.
    pub fn is_self_adjoint(&self) -> bool {
        let collect = |rev: bool| {
            let mut v: Vec<(Word, f64)> = Vec::new();
            for (c, w) in &self.terms {
                let w: Word = if rev { w.iter().rev().copied().collect() } else { w.clone() };
                let key = canonical_rotation(&w);
                match v.iter_mut().find(|(k, _)| *k == key) {
                    Some(e) => e.1 += c,
                    None => v.push((key, *c)),
                }
            }
            v.retain(|(_, c)| *c != 0.0);
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        let (a, b) = (collect(false), collect(true));
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= 1e-14 * (1.0 + x.1.abs()))
    }
}

/// Matrix-valued polynomial `Σ c_k w_k`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixPolynomial {
    pub terms: Vec<(f64, Word)>,
}

fn word_product(w: &[Symbol], state: &TracePhaseSpace) -> ComplexMatrix {
    let mut it = w.iter();
    match it.next() {
        None => ComplexMatrix::identity(state.dim()),
        Some(s) => it.fold(state.get(*s).clone(), |acc, s| &acc * state.get(*s)),
    }
}

impl MatrixPolynomial {
    pub fn eval(&self, state: &TracePhaseSpace) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(state.dim());
        for (c, w) in &self.terms {
            out = out.axpy(*c, &word_product(w, state));
        }
        out
    }
}

pub fn trace_eval(poly: &TracePolynomial, state: &TracePhaseSpace) -> Result<Complex64, TraceError> {
    poly.check(state)?;
    Ok(poly.terms.iter().map(|(c, w)| word_product(w, state).trace() * *c).sum())
}

/// `δ Tr P / δ symbol`: every occurrence contributes the rest of its word rotated to
/// start just after it.
pub fn trace_derivative(poly: &TracePolynomial, symbol: Symbol) -> MatrixPolynomial {
    let mut terms = Vec::new();
    for (c, w) in &poly.terms {
        for (i, s) in w.iter().enumerate() {
            if *s == symbol {
                terms.push((*c, w[i + 1..].iter().chain(&w[..i]).copied().collect()));
            }
        }
    }
    MatrixPolynomial { terms }
}

/// Central difference `(Tr P(A + εE) − Tr P(A − εE)) / 2ε` against `Tr(E · δP/δA)`.
pub fn directional_check(poly: &TracePolynomial, state: &TracePhaseSpace, symbol: Symbol, direction: &ComplexMatrix, eps: f64) -> Result<(Complex64, Complex64), TraceError> {
    poly.check(state)?;
    let shifted = |s: f64| {
        let mut st = state.clone();
        *st.get_mut(symbol) = state.get(symbol).axpy(s, direction);
        trace_eval(poly, &st)
    };
    let fd = (shifted(eps)? - shifted(-eps)?) / (2.0 * eps);
    let symbolic = (direction * &trace_derivative(poly, symbol).eval(state)).trace();
    Ok((fd, symbolic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;
    use alloc::vec;
    use Symbol::{P, Q};

    #[test]
    fn parse_and_display() {
        let h = TracePolynomial::parse("0.5 p0 p0 + 0.5 q0 q0 - 0.1 q1 q1 q1 q1").unwrap();
        assert_eq!(h.terms, vec![(0.5, vec![P(0), P(0)]), (0.5, vec![Q(0), Q(0)]), (-0.1, vec![Q(1); 4])]);
        assert_eq!(h.dof(), 2);
        assert_eq!(h.degree(), 4);
        assert_eq!(TracePolynomial::parse("q0 p0").unwrap().terms, vec![(1.0, vec![Q(0), P(0)])]);
        assert_eq!(TracePolynomial::parse("- 2 q0").unwrap().terms, vec![(-2.0, vec![Q(0)])]);
        for bad in ["", "0.5", "0.5 q0 +", "q0 0.5", "x0", "qz", "0.5 0.5 q0"] {
            assert!(TracePolynomial::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(alloc::format!("{}", P(3)), "p3");
    }

    #[test]
    fn scalar_reduction() {
        let s = TracePhaseSpace::new(vec![ComplexMatrix::diag(&[1.5])], vec![ComplexMatrix::diag(&[-0.5])]).unwrap();
        let h = TracePolynomial::parse("0.5 p0 p0 + 0.5 q0 q0 + 0.1 q0 q0 q0 q0 + 2 q0 p0").unwrap();
        let (q, p) = (1.5_f64, -0.5_f64);
        let want = 0.5 * p * p + 0.5 * q * q + 0.1 * q.powi(4) + 2.0 * q * p;
        assert!((trace_eval(&h, &s).unwrap().re - want).abs() < 1e-14);
        let dq = trace_derivative(&h, Q(0)).eval(&s)[(0, 0)].re;
        assert!((dq - (q + 0.4 * q.powi(3) + 2.0 * p)).abs() < 1e-14);
    }

    #[test]
    fn commutator_trace_vanishes_and_matches_direct_products() {
        let s = TracePhaseSpace::random(RngStream::new(3, 0), 2, 4, false);
        let c = TracePolynomial::parse("q0 p0 - p0 q0").unwrap();
        assert!(trace_eval(&c, &s).unwrap().norm() < 1e-12);
        let poly = TracePolynomial::parse("0.3 q0 p1 q1 - 0.7 p0 p0 q1 p1").unwrap();
        let direct = (&(&s.q[0] * &s.p[1]) * &s.q[1]).trace() * 0.3 - (&(&(&s.p[0] * &s.p[0]) * &s.q[1]) * &s.p[1]).trace() * 0.7;
        assert!((trace_eval(&poly, &s).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn derivative_examples() {
        let s = TracePhaseSpace::random(RngStream::new(5, 0), 1, 3, true);
        let q2 = TracePolynomial::parse("q0 q0").unwrap();
        assert!(trace_derivative(&q2, Q(0)).eval(&s).max_abs_diff(&s.q[0].scale_real(2.0)) < 1e-14);
        let qpqp = TracePolynomial::parse("q0 p0 q0 p0").unwrap();
        let want = (&(&s.p[0] * &s.q[0]) * &s.p[0]).scale_real(2.0);
        assert!(trace_derivative(&qpqp, Q(0)).eval(&s).max_abs_diff(&want) < 1e-13);
        assert!(trace_derivative(&qpqp, Q(1)).terms.is_empty());
        let e = TracePhaseSpace::random(RngStream::new(6, 0), 1, 3, false).q[0].clone();
        let (fd, sym) = directional_check(&qpqp, &s, Q(0), &e, 1e-5).unwrap();
        assert!((fd - sym).norm() < 1e-6);
    }

    #[test]
    fn out_of_range_symbol() {
        let s = TracePhaseSpace::random(RngStream::new(1, 0), 1, 2, true);
        let h = TracePolynomial::parse("q1 q1").unwrap();
        assert_eq!(trace_eval(&h, &s).unwrap_err(), TraceError::SymbolOutOfRange(Q(1)));
        assert_eq!(TracePolynomial::new(vec![(1.0, vec![])]).unwrap_err(), TraceError::EmptyWord);
    }

    #[test]
    fn self_adjointness() {
        assert!(TracePolynomial::anharmonic(2, 0.1).is_self_adjoint());
        assert!(TracePolynomial::parse("q0 p0 q0 p0 + q0 q0 p0").unwrap().is_self_adjoint());
        // q p r and its reverse r p q differ under rotation
        assert!(!TracePolynomial::parse("q0 p0 q1").unwrap().is_self_adjoint());
        assert!(TracePolynomial::parse("q0 p0 q1 + q1 p0 q0").unwrap().is_self_adjoint());
        let s = TracePhaseSpace::random(RngStream::new(8, 0), 2, 3, true);
        let h = TracePolynomial::parse("q0 p0 q1 + q1 p0 q0").unwrap();
        assert!(trace_eval(&h, &s).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn random_polynomials_pass_directional_checks() {
        for k in 0..100u64 {
            let stream = RngStream::new(17, k);
            let mut rng = stream.rng();
            let dim = 1 + (k as usize % 6);
            let poly = TracePolynomial::random(&mut rng, 2, 4, 5);
            assert!(poly.degree() <= 4);
            let s = TracePhaseSpace::random(stream.derive(1), 2, dim, false);
            let e = TracePhaseSpace::random(stream.derive(2), 2, dim, false);
            for sym in [Q(0), Q(1), P(0), P(1)] {
                let (fd, an) = directional_check(&poly, &s, sym, e.get(sym), 1e-4).unwrap();
                assert!((fd - an).norm() < 1e-6, "poly {k} {sym}: {fd} vs {an}");
            }
        }
    }
}
