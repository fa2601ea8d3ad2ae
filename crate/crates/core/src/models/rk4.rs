use super::ModelError;
use crate::Scalar;

/// One classical fourth-order Runge-Kutta step of an autonomous field.
pub fn rk4_step<T, F>(derivative: F, state: &[T], h: T) -> Result<Vec<T>, ModelError>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    if !(h > T::zero()) || !h.is_finite() {
        return Err(ModelError::NonPositiveStep);
    }
    let eval = |y: &[T]| -> Result<Vec<T>, ModelError> {
        let d = derivative(y);
        if d.len() != y.len() || d.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteDerivative);
        }
        Ok(d)
    };
    let two = T::lit(2.0);
    let half = h / two;
    let offset = |k: &[T], scale: T| -> Vec<T> {
        state.iter().zip(k).map(|(&y, &k)| y + scale * k).collect()
    };
    let k1 = eval(state)?;
    let k2 = eval(&offset(&k1, half))?;
    let k3 = eval(&offset(&k2, half))?;
    let k4 = eval(&offset(&k3, h))?;
    let sixth = h / T::lit(6.0);
    Ok((0..state.len())
        .map(|i| state[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect())
}
