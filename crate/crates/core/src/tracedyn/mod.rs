//! Trace dynamics over matrix phase space: trace polynomials in non-commuting
//! matrix variables `q_r`, `p_r`, derivatives by cyclic rotation, the trace
//! Hamilton flow, the Millard charge and trace Poisson brackets.
//!
//! The derivative of `Tr P` with respect to a matrix `A` is the matrix `D` with
//! `δ Tr P = Tr(δA · D)`. Hamiltonians that depend on the state density (such as a
//! quantum-potential correction) are not trace polynomials and are handled by
//! `emergent`/`waveengine`.

mod flow;
mod polynomial;

pub use flow::{hamilton_flow, millard_charge, trace_poisson_bracket, TraceFlow, TracePhaseSpace};
pub use polynomial::{directional_check, trace_derivative, trace_eval, MatrixPolynomial, Symbol, TracePolynomial, Word};

use crate::numkit::NumError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("symbol {0} refers to a degree of freedom the state does not have")]
    SymbolOutOfRange(Symbol),
    #[error("empty word in trace polynomial")]
    EmptyWord,
    #[error("cannot parse trace polynomial near {0:?}")]
    Parse(alloc::string::String),
    #[error("state matrices must share one positive dimension")]
    Shape,
    #[error("state is not finite")]
    NonFinite,
    #[error(transparent)]
    Numerics(#[from] NumError),
}
