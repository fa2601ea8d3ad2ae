use super::ExchangeError;
use crate::Scalar;

/// Largest-remainder (Hamilton) apportionment of `total` units in proportion to
/// `weights`.
///
/// Shares are floored; the units left over go to the largest fractional
/// remainders, ties to the lowest index. Remainders within a few ulps of each
/// other count as tied, and shares within a few ulps of an integer count as
/// integral, so float noise in the shares cannot change the outcome.
pub fn apportion<T: Scalar>(weights: &[T], total: u64) -> Result<Vec<u64>, ExchangeError> {
    if let Some(index) = weights.iter().position(|w| !w.is_finite() || *w < T::zero()) {
        return Err(ExchangeError::InvalidWeight { index });
    }
    if total == 0 {
        return Ok(vec![0; weights.len()]);
    }
    let sum = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if sum <= T::zero() {
        return Err(ExchangeError::DegenerateWeights { total });
    }
    let units = T::from_count(total);
    let eps = T::epsilon() * T::lit(64.0) * units;

    let mut counts = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for &w in weights {
        let share = w * units / sum;
        let nearest = share.round();
        let base = if (share - nearest).abs() <= eps {
            nearest
        } else {
            share.floor()
        };
        counts.push(base.to_u64().unwrap_or(0));
        remainders.push(if base == nearest && (share - nearest).abs() <= eps {
            T::zero()
        } else {
            share - base
        });
    }

    let assigned: u64 = counts.iter().sum();
    let mut given = vec![false; counts.len()];
    for _ in assigned..total {
        let pick = best(&remainders, &given, eps, |a, b| a > b);
        counts[pick] += 1;
        given[pick] = true;
    }
    // snapping every share up can overshoot by a unit in degenerate inputs
    let mut taken = vec![false; counts.len()];
    for _ in total..assigned {
        let eligible: Vec<bool> = counts
            .iter()
            .zip(&taken)
            .map(|(&c, &t)| t || c == 0)
            .collect();
        let pick = best(&remainders, &eligible, eps, |a, b| a < b);
        counts[pick] -= 1;
        taken[pick] = true;
    }
    Ok(counts)
}

/// Lowest index whose remainder beats all others by more than `eps` under `better`.
fn best<T: Scalar>(rem: &[T], skip: &[bool], eps: T, better: impl Fn(T, T) -> bool) -> usize {
    let mut pick: Option<usize> = None;
    for i in 0..rem.len() {
        if skip[i] {
            continue;
        }
        match pick {
            None => pick = Some(i),
            Some(p) => {
                if (rem[i] - rem[p]).abs() > eps && better(rem[i], rem[p]) {
                    pick = Some(i);
                }
            }
        }
    }
    pick.expect("one unit per entry at most")
}
