use alloc::vec::Vec;

use super::{ComplexMatrix, NumError};

/// Classical fixed-step RK4 for a system of matrix ODEs.
///
/// Returns the full trajectory `[state0, state(dt), ..., state(steps dt)]`.
pub fn rk4_matrix_flow<F>(
    rhs: F,
    state0: Vec<ComplexMatrix>,
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<ComplexMatrix>>, NumError>
where
    F: FnMut(f64, &[ComplexMatrix]) -> Vec<ComplexMatrix>,
{
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state0.clone());
    rk4_matrix_flow_observe(rhs, state0, t0, dt, steps, |_, _, s| out.push(s.to_vec()))?;
    Ok(out)
}

/// Same integrator, handing each new state to `observer(step, t, state)` instead
/// of storing it. Returns the final state.
pub fn rk4_matrix_flow_observe<F, O>(
    mut rhs: F,
    state0: Vec<ComplexMatrix>,
    t0: f64,
    dt: f64,
    steps: usize,
    mut observer: O,
) -> Result<Vec<ComplexMatrix>, NumError>
where
    F: FnMut(f64, &[ComplexMatrix]) -> Vec<ComplexMatrix>,
    O: FnMut(usize, f64, &[ComplexMatrix]),
{
    if !(dt.is_finite() && dt != 0.0) {
        return Err(NumError::InvalidArgument("dt must be finite and non-zero"));
    }
    if state0.iter().any(|m| !m.is_finite()) {
        return Err(NumError::NonFinite { step: 0 });
    }
    let mut state = state0;
    let combine = |base: &[ComplexMatrix], k: &[ComplexMatrix], h: f64| -> Vec<ComplexMatrix> {
        base.iter().zip(k).map(|(b, k)| b.axpy(h, k)).collect()
    };
    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        let k1 = rhs(t, &state);
        if k1.len() != state.len() {
            return Err(NumError::DimensionMismatch { expected: state.len(), got: k1.len() });
        }
        let k2 = rhs(t + 0.5 * dt, &combine(&state, &k1, 0.5 * dt));
        let k3 = rhs(t + 0.5 * dt, &combine(&state, &k2, 0.5 * dt));
        let k4 = rhs(t + dt, &combine(&state, &k3, dt));
        let next: Vec<ComplexMatrix> = (0..state.len())
            .map(|i| {
                state[i]
                    .axpy(dt / 6.0, &k1[i])
                    .axpy(dt / 3.0, &k2[i])
                    .axpy(dt / 3.0, &k3[i])
                    .axpy(dt / 6.0, &k4[i])
            })
            .collect();
        if next.iter().any(|m| !m.is_finite()) {
            return Err(NumError::NonFinite { step });
        }
        state = next;
        observer(step, t0 + step as f64 * dt, &state);
    }
    Ok(state)
}
