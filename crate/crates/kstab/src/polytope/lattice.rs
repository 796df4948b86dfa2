//! Lattice polytopes, dilation lattice-point enumeration, and Ehrhart
//! polynomials.
//!
//! Enumeration is a bounding-box scan with exact half-space membership
//! tests. Dimensions stay at or below four, so this is the right tradeoff.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::hull::QPolytope;
use crate::error::{KstabError, Result};
use crate::exactmath::{interpolate, Rat, UniPoly};

/// The moment polytope of a polarised toric pair: integer vertices,
/// irredundant, with its affine dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticePolytopeRaw", into = "LatticePolytopeRaw")]
pub struct LatticePolytope {
    ambient_dim: usize,
    vertices: Vec<Vec<i64>>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct LatticePolytopeRaw {
    ambient_dim: usize,
    vertices: Vec<Vec<i64>>,
}

impl TryFrom<LatticePolytopeRaw> for LatticePolytope {
    type Error = KstabError;
    fn try_from(raw: LatticePolytopeRaw) -> Result<Self> {
        LatticePolytope::new(raw.ambient_dim, raw.vertices)
    }
}

impl From<LatticePolytope> for LatticePolytopeRaw {
    fn from(p: LatticePolytope) -> Self {
        LatticePolytopeRaw {
            ambient_dim: p.ambient_dim,
            vertices: p.vertices,
        }
    }
}

impl LatticePolytope {
    /// Hull of the given lattice points; the stored vertex list is
    /// irredundant.
    pub fn new(ambient_dim: usize, points: Vec<Vec<i64>>) -> Result<LatticePolytope> {
        let rational: Vec<Vec<Rat>> = points
            .iter()
            .map(|p| p.iter().map(|&x| Rat::from_int(x)).collect())
            .collect();
        let hull = QPolytope::from_points(ambient_dim, rational)?;
        let vertices: Vec<Vec<i64>> = hull
            .vertices()
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| x.numer().to_i64().expect("integer vertex"))
                    .collect()
            })
            .collect();
        let dim = hull.affine_dim();
        Ok(LatticePolytope {
            ambient_dim,
            vertices,
            dim,
        })
    }

    /// Segment [a, b] on the line.
    pub fn segment(a: i64, b: i64) -> LatticePolytope {
        LatticePolytope::new(1, vec![vec![a], vec![b]]).expect("segment")
    }

    /// A single lattice point.
    pub fn point(coords: Vec<i64>) -> LatticePolytope {
        let d = coords.len();
        LatticePolytope::new(d, vec![coords]).expect("point")
    }

    /// The standard simplex conv{0, s·e_1, ..., s·e_d}.
    pub fn standard_simplex(d: usize, s: i64) -> LatticePolytope {
        let mut pts = vec![vec![0; d]];
        for i in 0..d {
            let mut v = vec![0; d];
            v[i] = s;
            pts.push(v);
        }
        LatticePolytope::new(d, pts).expect("simplex")
    }

    /// The box [0, s]^d.
    pub fn cube(d: usize, s: i64) -> LatticePolytope {
        let mut pts = Vec::new();
        for mask in 0..(1u32 << d) {
            let v: Vec<i64> = (0..d).map(|i| if mask >> i & 1 == 1 { s } else { 0 }).collect();
            pts.push(v);
        }
        LatticePolytope::new(d, pts).expect("cube")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.ambient_dim
    }

    pub fn to_rational(&self) -> QPolytope {
        QPolytope::from_points(
            self.ambient_dim,
            self.vertices
                .iter()
                .map(|v| v.iter().map(|&x| Rat::from_int(x)).collect())
                .collect(),
        )
        .expect("vertices are already a hull")
    }

    /// Dilation by a positive integer, as a lattice polytope.
    pub fn dilate(&self, r: i64) -> LatticePolytope {
        LatticePolytope {
            ambient_dim: self.ambient_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|&x| x * r).collect())
                .collect(),
            dim: if r == 0 { 0 } else { self.dim },
        }
    }

    /// Minkowski sum of lattice polytopes.
    pub fn minkowski_sum(&self, other: &LatticePolytope) -> Result<LatticePolytope> {
        if self.ambient_dim != other.ambient_dim {
            return Err(KstabError::DimensionMismatch(
                "Minkowski sum of polytopes in different ambient dimensions".into(),
            ));
        }
        let mut pts = Vec::new();
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        LatticePolytope::new(self.ambient_dim, pts)
    }

    /// All lattice points of the polytope itself.
    pub fn lattice_points(&self) -> Result<Vec<Vec<i64>>> {
        enumerate_lattice_points(&self.to_rational())
    }

    /// |rP ∩ Z^d| for a positive dilation factor, exactly.
    pub fn lattice_count(&self, r: i64) -> Result<u64> {
        if r < 1 {
            return Err(KstabError::InvalidInput(format!("dilation factor {r} must be >= 1")));
        }
        Ok(self.dilate(r).lattice_points()?.len() as u64)
    }

    /// Strict-interior lattice points of rP (full-dimensional P only).
    pub fn interior_count(&self, r: i64) -> Result<u64> {
        if !self.is_full_dimensional() {
            return Err(KstabError::InvalidInput(
                "interior count needs a full-dimensional polytope".into(),
            ));
        }
        let dilated = self.dilate(r).to_rational();
        let facets = dilated.facets()?;
        let mut count = 0u64;
        for p in enumerate_box(&dilated) {
            let pr: Vec<Rat> = p.iter().map(|&x| Rat::from_int(x)).collect();
            if facets.iter().all(|f| f.eval(&pr) < f.rhs) {
                count += 1;
            }
        }
        Ok(count)
    }

    /// The Ehrhart polynomial: fitted to exact counts at r = 1..dim+1, with
    /// the counts at dim+2 and dim+3 as verification samples, and the
    /// constant term checked to be 1.
    pub fn ehrhart(&self) -> Result<UniPoly> {
        if !self.is_full_dimensional() {
            return Err(KstabError::InvalidInput(
                "Ehrhart polynomial needs a full-dimensional polytope".into(),
            ));
        }
        let d = self.dim;
        let mut samples = Vec::new();
        for r in 1..=(d as i64 + 3) {
            samples.push((Rat::from_int(r), Rat::from_int(self.lattice_count(r)? as i64)));
        }
        let p = interpolate(&samples, d)?;
        if p.coeff(0) != Rat::one() {
            return Err(KstabError::InconsistentSamples(format!(
                "Ehrhart constant term is {}, expected 1",
                p.coeff(0)
            )));
        }
        Ok(p)
    }

    /// Euclidean volume by exact triangulation; cross-checked against the
    /// Ehrhart leading coefficient in the test suite.
    pub fn volume(&self) -> Result<Rat> {
        self.to_rational().volume()
    }
}

/// Bounding-box integer points of a rational polytope (no membership test).
fn enumerate_box(p: &QPolytope) -> Vec<Vec<i64>> {
    let d = p.ambient_dim();
    if d == 0 {
        return vec![vec![]];
    }
    let mut lo = vec![BigInt::zero(); d];
    let mut hi = vec![BigInt::zero(); d];
    for (i, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
        let mut min: Option<Rat> = None;
        let mut max: Option<Rat> = None;
        for v in p.vertices() {
            let x = v[i].clone();
            if min.as_ref().is_none_or(|m| x < *m) {
                min = Some(x.clone());
            }
            if max.as_ref().is_none_or(|m| x > *m) {
                max = Some(x);
            }
        }
        *l = min.unwrap().ceil();
        *h = max.unwrap().floor();
    }
    let lo: Vec<i64> = lo.iter().map(|x| x.to_i64().expect("box bound fits i64")).collect();
    let hi: Vec<i64> = hi.iter().map(|x| x.to_i64().expect("box bound fits i64")).collect();
    let mut out = Vec::new();
    let mut cur = lo.clone();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == lo.len() {
                return out;
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// Exact lattice points of a rational polytope of any affine dimension.
pub fn enumerate_lattice_points(p: &QPolytope) -> Result<Vec<Vec<i64>>> {
    let d = p.ambient_dim();
    if d == 0 {
        return Ok(vec![vec![]]);
    }
    let adim = p.affine_dim();
    if adim == d {
        let facets = p.facets()?;
        return Ok(enumerate_box(p)
            .into_iter()
            .filter(|pt| {
                let pr: Vec<Rat> = pt.iter().map(|&x| Rat::from_int(x)).collect();
                facets.iter().all(|f| f.satisfied_by(&pr))
            })
            .collect());
    }
    // Lower-dimensional: cut the box down by the affine-hull equations,
    // then test membership through an injective coordinate projection.
    let verts = p.vertices();
    let hull_eqs = affine_hull_equations(verts, d);
    let coords = pick_injective_coords(verts, adim);
    let projected: Vec<Vec<Rat>> = verts
        .iter()
        .map(|v| coords.iter().map(|&c| v[c].clone()).collect())
        .collect();
    let proj_poly = QPolytope::from_points(adim.max(1), if adim == 0 {
        vec![vec![Rat::zero()]]
    } else {
        projected.clone()
    })?;
    let proj_facets = if adim == 0 { vec![] } else { proj_poly.facets()? };
    let mut out = Vec::new();
    'point: for pt in enumerate_box(p) {
        let pr: Vec<Rat> = pt.iter().map(|&x| Rat::from_int(x)).collect();
        for (normal, rhs) in &hull_eqs {
            let mut acc = Rat::zero();
            for (n, x) in normal.iter().zip(&pr) {
                acc += n * x;
            }
            if acc != *rhs {
                continue 'point;
            }
        }
        if adim == 0 {
            // The affine hull is the single vertex.
            if pr == verts[0] {
                out.push(pt);
            }
            continue;
        }
        let proj: Vec<Rat> = coords.iter().map(|&c| pr[c].clone()).collect();
        if proj_facets.iter().all(|f| f.satisfied_by(&proj)) {
            out.push(pt);
        }
    }
    Ok(out)
}

/// Equations <normal, x> = rhs cutting out the affine hull of a point set.
fn affine_hull_equations(points: &[Vec<Rat>], d: usize) -> Vec<(Vec<Rat>, Rat)> {
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let mut eqs = Vec::new();
    let mut rows = diffs;
    loop {
        match super::linalg::kernel_vector(&rows, d) {
            None => break,
            Some(normal) => {
                let rhs: Rat = normal.iter().zip(base).map(|(n, x)| n * x).sum::<Rat>();
                rows.push(normal.clone());
                eqs.push((normal, rhs));
            }
        }
    }
    eqs
}

fn pick_injective_coords(points: &[Vec<Rat>], want: usize) -> Vec<usize> {
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let ncols = base.len();
    let mut chosen: Vec<usize> = Vec::new();
    for c in 0..ncols {
        if chosen.len() == want {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(c);
        let sub: Vec<Vec<Rat>> = diffs
            .iter()
            .map(|row| trial.iter().map(|&i| row[i].clone()).collect())
            .collect();
        if super::linalg::rank(&sub) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_counts() {
        // unit segment [0,1] at r=3 -> 4 points
        assert_eq!(LatticePolytope::segment(0, 1).lattice_count(3).unwrap(), 4);
        // [0,2] at r=5 -> 11
        assert_eq!(LatticePolytope::segment(0, 2).lattice_count(5).unwrap(), 11);
    }

    #[test]
    fn triangle_count() {
        let t = LatticePolytope::standard_simplex(2, 1);
        assert_eq!(t.lattice_count(2).unwrap(), 6);
    }

    #[test]
    fn ehrhart_examples() {
        let seg = LatticePolytope::segment(0, 2);
        let p = seg.ehrhart().unwrap();
        assert_eq!(p.coeffs(), &[Rat::from_int(1), Rat::from_int(2)]);

        let tri = LatticePolytope::standard_simplex(2, 1);
        let p = tri.ehrhart().unwrap();
        assert_eq!(
            p.coeffs(),
            &[Rat::from_int(1), Rat::new(3, 2).unwrap(), Rat::new(1, 2).unwrap()]
        );

        let sq = LatticePolytope::cube(2, 1);
        let p = sq.ehrhart().unwrap();
        assert_eq!(p.coeffs(), &[Rat::from_int(1), Rat::from_int(2), Rat::from_int(1)]);
    }

    #[test]
    fn volume_matches_ehrhart_leading_coefficient() {
        for p in [
            LatticePolytope::segment(0, 2),
            LatticePolytope::standard_simplex(2, 1),
            LatticePolytope::cube(2, 2),
            LatticePolytope::standard_simplex(3, 2),
        ] {
            let d = p.dim();
            let e = p.ehrhart().unwrap();
            assert_eq!(e.coeff(d), p.volume().unwrap());
        }
    }

    #[test]
    fn ehrhart_reciprocity_smoke() {
        // |E(-1)| equals the interior count, here on dims 1..3.
        for p in [
            LatticePolytope::segment(0, 3),
            LatticePolytope::standard_simplex(2, 3),
            LatticePolytope::cube(2, 2),
            LatticePolytope::cube(3, 2),
        ] {
            let e = p.ehrhart().unwrap();
            let at_minus_one = e.eval(&Rat::from_int(-1)).abs();
            assert_eq!(at_minus_one, Rat::from_int(p.interior_count(1).unwrap() as i64));
        }
    }

    #[test]
    fn lower_dimensional_lattice_points() {
        // A diagonal segment in the plane.
        let p = LatticePolytope::new(2, vec![vec![0, 0], vec![3, 3]]).unwrap();
        assert_eq!(p.dim(), 1);
        let pts = p.lattice_points().unwrap();
        assert_eq!(pts.len(), 4);
        // A single point.
        let q = LatticePolytope::point(vec![5, -2]);
        assert_eq!(q.lattice_points().unwrap(), vec![vec![5, -2]]);
    }

    #[test]
    fn minkowski_scaling_of_triangle() {
        let t = LatticePolytope::standard_simplex(2, 1);
        let sum = t.minkowski_sum(&t).unwrap();
        assert_eq!(sum.volume().unwrap(), Rat::from_int(2));
    }
}
