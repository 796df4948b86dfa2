//! Mixed volumes by full inclusion–exclusion over Minkowski sums.
//!
//! The ambient dimension is at most four in practice, so the 2^d sums are
//! affordable and the formula is trivially correct.

use std::collections::BTreeMap;

use super::hull::QPolytope;
use super::lattice::LatticePolytope;
use crate::error::{KstabError, Result};
use crate::exactmath::Rat;

/// Normalized mixed volume V(P_1, ..., P_d) in ambient dimension d, with
/// V(P, ..., P) = vol(P). Symmetric and Minkowski-multilinear.
pub fn mixed_volume_q(bodies: &[QPolytope]) -> Result<Rat> {
    let d = bodies.len();
    if d == 0 {
        return Err(KstabError::InvalidInput("mixed volume of an empty list".into()));
    }
    for b in bodies {
        if b.ambient_dim() != d {
            return Err(KstabError::DimensionMismatch(format!(
                "mixed volume of {d} bodies needs ambient dimension {d}, got {}",
                b.ambient_dim()
            )));
        }
    }
    // Group identical bodies so repeated summands become dilations, and
    // cache sum volumes by multiplicity vector.
    let mut groups: Vec<(&QPolytope, usize)> = Vec::new();
    let mut which: Vec<usize> = Vec::with_capacity(d);
    for b in bodies {
        match groups.iter().position(|(g, _)| *g == b) {
            Some(i) => {
                groups[i].1 += 1;
                which.push(i);
            }
            None => {
                groups.push((b, 1));
                which.push(groups.len() - 1);
            }
        }
    }
    let mut cache: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
    let mut acc = Rat::zero();
    for mask in 1u32..(1 << d) {
        let mut counts = vec![0usize; groups.len()];
        for i in 0..d {
            if mask >> i & 1 == 1 {
                counts[which[i]] += 1;
            }
        }
        let vol = match cache.get(&counts) {
            Some(v) => v.clone(),
            None => {
                let v = sum_volume(&groups, &counts)?;
                cache.insert(counts.clone(), v.clone());
                v
            }
        };
        let size = mask.count_ones() as usize;
        if (d - size) % 2 == 0 {
            acc += &vol;
        } else {
            acc -= &vol;
        }
    }
    acc.checked_div(&Rat::factorial(d))
}

fn sum_volume(groups: &[(&QPolytope, usize)], counts: &[usize]) -> Result<Rat> {
    let mut body: Option<QPolytope> = None;
    for (i, &(g, _)) in groups.iter().enumerate() {
        if counts[i] == 0 {
            continue;
        }
        let scaled = g.dilate(&Rat::from_int(counts[i] as i64));
        body = Some(match body {
            None => scaled,
            Some(acc) => acc.minkowski_sum(&scaled)?,
        });
    }
    body.expect("nonempty subset").volume()
}

/// Mixed volume of lattice polytopes (the module's public entry point).
pub fn mixed_volume(polytopes: &[LatticePolytope]) -> Result<Rat> {
    let bodies: Vec<QPolytope> = polytopes.iter().map(LatticePolytope::to_rational).collect();
    mixed_volume_q(&bodies)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(d: usize, axis: usize, len: i64) -> LatticePolytope {
        let mut v = vec![0i64; d];
        v[axis] = len;
        LatticePolytope::new(d, vec![vec![0; d], v]).unwrap()
    }

    #[test]
    fn single_body_is_volume() {
        let p = LatticePolytope::segment(0, 1);
        assert_eq!(mixed_volume(&[p]).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn unit_square_self_mixed_volume() {
        let sq = LatticePolytope::cube(2, 1);
        assert_eq!(mixed_volume(&[sq.clone(), sq]).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn crossing_segments_realize_intersection_one() {
        // d! V(horizontal segment, vertical segment) realizes L.T = 1 for
        // O(1,1)-type data; the normalized value itself is 1/2.
        let h = seg(2, 0, 1);
        let v = seg(2, 1, 1);
        let mv = mixed_volume(&[h, v]).unwrap();
        assert_eq!(mv, Rat::new(1, 2).unwrap());
        assert_eq!(Rat::factorial(2) * mv, Rat::from_int(1));
    }

    #[test]
    fn point_is_volume_absorbing() {
        let sq = LatticePolytope::cube(2, 3);
        let pt = LatticePolytope::point(vec![1, 1]);
        assert_eq!(mixed_volume(&[sq, pt]).unwrap(), Rat::zero());
    }

    #[test]
    fn symmetry_and_multilinearity() {
        let a = LatticePolytope::standard_simplex(2, 1);
        let b = LatticePolytope::cube(2, 1);
        let ab = mixed_volume(&[a.clone(), b.clone()]).unwrap();
        let ba = mixed_volume(&[b.clone(), a.clone()]).unwrap();
        assert_eq!(ab, ba);
        // V(2a + b, b) = 2 V(a,b) + V(b,b)
        let two_a = a.dilate(2);
        let lhs = mixed_volume(&[two_a.minkowski_sum(&b).unwrap(), b.clone()]).unwrap();
        let rhs = Rat::from_int(2) * mixed_volume(&[a, b.clone()]).unwrap() + b.volume().unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s1 = LatticePolytope::segment(0, 1);
        assert!(matches!(
            mixed_volume(&[s1.clone(), s1.clone()]),
            Err(KstabError::DimensionMismatch(_))
        ));
    }
}
