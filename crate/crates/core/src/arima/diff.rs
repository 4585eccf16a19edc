use crate::error::{Error, Result};

/// `∇^d ∇_s^D x`. The result is `d + D·s` values shorter than `x`.
pub fn difference(x: &[f64], d: usize, seasonal_d: usize, season: usize) -> Result<Vec<f64>> {
    let lags = stage_lags(d, seasonal_d, season)?;
    let loss: usize = lags.iter().sum();
    if x.len() <= loss {
        return Err(Error::Range(format!(
            "differencing loses {loss} values, series has {}",
            x.len()
        )));
    }
    Ok(lags.iter().fold(x.to_vec(), |out, &lag| difference_once(&out, lag)))
}

/// Inverts [`difference`]: turns values of the differenced series that
/// follow `history` into values of the original series. `history` must hold
/// at least `d + D·s` original values.
///
/// The differencing passes are undone one at a time in reverse order, each
/// seeded with the matching partial differences of `history`.
pub fn integrate(differenced: &[f64], history: &[f64], d: usize, seasonal_d: usize, season: usize) -> Result<Vec<f64>> {
    let lags = stage_lags(d, seasonal_d, season)?;
    let order: usize = lags.iter().sum();
    if history.len() < order {
        return Err(Error::Range(format!(
            "integration needs {order} past values, history has {}",
            history.len()
        )));
    }
    let mut seeds = vec![history[history.len() - order..].to_vec()];
    for &lag in &lags[..lags.len().saturating_sub(1)] {
        let next = difference_once(seeds.last().expect("seeded"), lag);
        seeds.push(next);
    }
    let mut out = differenced.to_vec();
    for (&lag, seed) in lags.iter().zip(&seeds).rev() {
        let mut levels = seed[seed.len() - lag..].to_vec();
        levels.reserve(out.len());
        for &w in &out {
            let level = levels[levels.len() - lag] + w;
            levels.push(level);
        }
        out = levels.split_off(lag);
    }
    Ok(out)
}

fn stage_lags(d: usize, seasonal_d: usize, season: usize) -> Result<Vec<usize>> {
    if seasonal_d > 0 && season == 0 {
        return Err(Error::Config("seasonal differencing needs a season length".into()));
    }
    let mut lags = vec![season; seasonal_d];
    lags.extend(std::iter::repeat_n(1, d));
    Ok(lags)
}

fn difference_once(x: &[f64], lag: usize) -> Vec<f64> {
    x.windows(lag + 1).map(|w| w[lag] - w[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_difference() {
        assert_eq!(difference(&[1.0, 3.0, 6.0], 1, 0, 0).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn seasonal_difference() {
        assert_eq!(difference(&[1.0, 2.0, 4.0, 8.0], 0, 1, 2).unwrap(), vec![3.0, 6.0]);
    }

    #[test]
    fn short_series() {
        assert!(matches!(difference(&[1.0, 2.0], 2, 0, 0), Err(Error::Range(_))));
        assert!(matches!(integrate(&[1.0], &[1.0], 2, 0, 0), Err(Error::Range(_))));
    }

    #[test]
    fn integrate_inverts_difference() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 7919) % 23) as f64 - 0.5 * i as f64).collect();
        for d in 0..=2 {
            for sd in 0..=1 {
                let w = difference(&x, d, sd, 5).unwrap();
                let loss = d + 5 * sd;
                let back = integrate(&w[10..], &x[..10 + loss], d, sd, 5).unwrap();
                assert_eq!(back, x[10 + loss..].to_vec(), "d={d} D={sd}");
            }
        }
    }
}
