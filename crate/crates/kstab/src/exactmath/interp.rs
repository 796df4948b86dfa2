//! Exact polynomial interpolation by divided differences.

use super::{Rat, UniPoly};
use crate::error::{KstabError, Result};

/// Fits the unique polynomial of the given degree through the first
/// `degree + 1` samples, using Newton divided differences in exact
/// arithmetic. Any further samples are verification samples: the fit is
/// evaluated at them and a disagreement is an error, never least-squares
/// data. A disagreement signals a wrong degree bound or a counting bug
/// upstream.
pub fn interpolate(samples: &[(Rat, Rat)], degree: usize) -> Result<UniPoly> {
    if samples.len() < degree + 1 {
        return Err(KstabError::InvalidInput(format!(
            "interpolation of degree {degree} needs {} samples, got {}",
            degree + 1,
            samples.len()
        )));
    }
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            if samples[i].0 == samples[j].0 {
                return Err(KstabError::InvalidInput(format!(
                    "duplicate interpolation argument {}",
                    samples[i].0
                )));
            }
        }
    }

    let nodes: Vec<Rat> = samples[..=degree].iter().map(|(x, _)| x.clone()).collect();
    // Divided-difference table, kept exactly.
    let mut table: Vec<Rat> = samples[..=degree].iter().map(|(_, y)| y.clone()).collect();
    for level in 1..=degree {
        for i in (level..=degree).rev() {
            let dx = &nodes[i] - &nodes[i - level];
            table[i] = (&table[i] - &table[i - 1]).checked_div(&dx)?;
        }
    }

    // Expand the Newton form into monomial coefficients.
    let mut poly = UniPoly::zero();
    let mut basis = UniPoly::constant(Rat::one());
    for (i, coeff) in table.iter().enumerate() {
        poly = &poly + &basis.scale(coeff);
        if i < degree {
            let factor = UniPoly::from_coeffs(vec![-&nodes[i], Rat::one()]);
            basis = &basis * &factor;
        }
    }

    for (x, y) in &samples[degree + 1..] {
        let got = poly.eval(x);
        if &got != y {
            return Err(KstabError::InconsistentSamples(format!(
                "verification sample at {x} expected {y}, fitted polynomial gives {got}"
            )));
        }
    }
    Ok(poly)
}

/// Interpolation over the integer arguments `args`, with values produced by
/// `f`. The first `degree + 1` arguments fit and the remainder verify.
pub fn interpolate_checked<F>(args: impl IntoIterator<Item = i64>, degree: usize, mut f: F) -> Result<UniPoly>
where
    F: FnMut(i64) -> Result<Rat>,
{
    let mut samples = Vec::new();
    for a in args {
        samples.push((Rat::from_int(a), f(a)?));
    }
    interpolate(&samples, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn linear_fit_with_consistent_extra_sample() {
        // {(0,1),(1,3),(2,5)} at degree 1 -> 2x + 1, third sample verifies.
        let p = interpolate(&[(r(0), r(1)), (r(1), r(3)), (r(2), r(5))], 1).unwrap();
        assert_eq!(p.coeffs(), &[r(1), r(2)]);
    }

    #[test]
    fn zero_polynomial() {
        let p = interpolate(&[(r(0), r(0)), (r(1), r(0))], 0).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn quadratic_from_lattice_counts_of_dilated_triangle() {
        // Lattice points of the r-dilated unit triangle, counted by direct
        // enumeration, determine (r^2 + 3r + 2)/2.
        let count = |r: i64| -> Rat {
            let mut c = 0;
            for x in 0..=r {
                for y in 0..=r {
                    if x + y <= r {
                        c += 1;
                    }
                }
            }
            Rat::from_int(c)
        };
        let samples: Vec<(Rat, Rat)> = (1..=4).map(|i| (r(i), count(i))).collect();
        let p = interpolate(&samples, 2).unwrap();
        assert_eq!(p.coeffs(), &[r(1), Rat::new(3, 2).unwrap(), Rat::new(1, 2).unwrap()]);
    }

    #[test]
    fn disagreeing_extra_sample_is_an_error() {
        let err = interpolate(&[(r(0), r(1)), (r(1), r(3)), (r(2), r(6))], 1).unwrap_err();
        assert!(matches!(err, KstabError::InconsistentSamples(_)));
    }

    #[test]
    fn held_out_samples_reproduce_exactly() {
        // Fit from 4 samples of a cubic, then check 3 fresh arguments.
        let cubic = |x: &Rat| {
            let c2 = Rat::new(-7, 3).unwrap();
            x.pow(3) + c2 * x.pow(2) + Rat::new(1, 2).unwrap() * x + Rat::from_int(11)
        };
        let samples: Vec<(Rat, Rat)> = (0..4).map(|i| (r(i), cubic(&r(i)))).collect();
        let p = interpolate(&samples, 3).unwrap();
        for i in [17, -5, 40] {
            assert_eq!(p.eval(&r(i)), cubic(&r(i)));
        }
    }
}
