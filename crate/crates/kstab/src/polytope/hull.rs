//! Convex polytopes with exact rational vertices.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linalg;
use crate::error::{KstabError, Result};
use crate::exactmath::Rat;

/// A facet inequality `<normal, x> <= rhs` with a primitive integer normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub rhs: Rat,
}

impl Facet {
    pub fn eval(&self, point: &[Rat]) -> Rat {
        dot_int_rat(&self.normal, point)
    }

    pub fn satisfied_by(&self, point: &[Rat]) -> bool {
        self.eval(point) <= self.rhs
    }
}

pub fn dot_int_rat(a: &[BigInt], x: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (ai, xi) in a.iter().zip(x) {
        if !ai.is_zero() {
            acc += &Rat::from(ai) * xi;
        }
    }
    acc
}

/// A convex polytope given by its irredundant vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPolytope {
    ambient_dim: usize,
    vertices: Vec<Vec<Rat>>,
}

impl QPolytope {
    /// Convex hull of a point set: deduplicates and removes non-vertices.
    pub fn from_points(ambient_dim: usize, points: Vec<Vec<Rat>>) -> Result<QPolytope> {
        if points.is_empty() {
            return Err(KstabError::InvalidInput("polytope needs at least one point".into()));
        }
        for p in &points {
            if p.len() != ambient_dim {
                return Err(KstabError::DimensionMismatch(format!(
                    "point of length {} in ambient dimension {ambient_dim}",
                    p.len()
                )));
            }
        }
        let mut pts: Vec<Vec<Rat>> = Vec::new();
        for p in points {
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        pts.sort();
        let mut vertices = Vec::new();
        for i in 0..pts.len() {
            let others: Vec<&[Rat]> = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| q.as_slice())
                .collect();
            if others.is_empty() || !in_convex_hull(&pts[i], &others) {
                vertices.push(pts[i].clone());
            }
        }
        Ok(QPolytope { ambient_dim, vertices })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    /// Affine dimension of the hull.
    pub fn affine_dim(&self) -> usize {
        affine_rank(&self.vertices)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == self.ambient_dim
    }

    /// Scales by a nonnegative rational factor.
    pub fn dilate(&self, c: &Rat) -> QPolytope {
        if c.is_zero() {
            return QPolytope {
                ambient_dim: self.ambient_dim,
                vertices: vec![vec![Rat::zero(); self.ambient_dim]],
            };
        }
        QPolytope {
            ambient_dim: self.ambient_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    /// Minkowski sum. Candidate points are pairwise sums; the hull cleanup
    /// removes the interior ones.
    pub fn minkowski_sum(&self, other: &QPolytope) -> Result<QPolytope> {
        if self.ambient_dim != other.ambient_dim {
            return Err(KstabError::DimensionMismatch(format!(
                "Minkowski sum in dimensions {} and {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let mut candidates = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                candidates.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        QPolytope::from_points(self.ambient_dim, candidates)
    }

    /// Facet inequalities of a full-dimensional polytope, by hyperplane
    /// enumeration over vertex subsets. Vertex counts here stay small, so
    /// the combinatorial sweep is exact and affordable.
    pub fn facets(&self) -> Result<Vec<Facet>> {
        let d = self.ambient_dim;
        if !self.is_full_dimensional() {
            return Err(KstabError::TriangulationFailure(format!(
                "facets of a non-full-dimensional polytope (affine dim {} in ambient {d})",
                self.affine_dim()
            )));
        }
        if d == 0 {
            return Ok(vec![]);
        }
        let n = self.vertices.len();
        let mut seen: BTreeSet<(Vec<BigInt>, Rat)> = BTreeSet::new();
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..d).collect();
        loop {
            if let Some(normal) = hyperplane_normal(&self.vertices, &idx, d) {
                let b = dot_int_rat(&normal, &self.vertices[idx[0]]);
                let mut any_below = false;
                let mut any_above = false;
                for v in &self.vertices {
                    match dot_int_rat(&normal, v).cmp(&b) {
                        std::cmp::Ordering::Less => any_below = true,
                        std::cmp::Ordering::Greater => any_above = true,
                        std::cmp::Ordering::Equal => {}
                    }
                    if any_below && any_above {
                        break;
                    }
                }
                if !(any_below && any_above) {
                    let (normal, rhs) = if any_above {
                        (normal.iter().map(|x| -x).collect::<Vec<BigInt>>(), -&b)
                    } else {
                        (normal, b)
                    };
                    if seen.insert((normal.clone(), rhs.clone())) {
                        out.push(Facet { normal, rhs });
                    }
                }
            }
            // next d-combination of vertex indices
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if idx[i] != i + n - d {
                    idx[i] += 1;
                    for j in i + 1..d {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Membership test for a full-dimensional polytope.
    pub fn contains(&self, point: &[Rat], facets: &[Facet]) -> bool {
        facets.iter().all(|f| f.satisfied_by(point))
    }

    /// Exact integral of an affine function <linear, x> + constant over
    /// the polytope: per simplex, volume times the value at the centroid.
    pub fn integrate_affine(&self, linear: &[Rat], constant: &Rat) -> Result<Rat> {
        let d = self.ambient_dim;
        if d == 0 || self.affine_dim() < d {
            return Ok(Rat::zero());
        }
        let simplices = triangulate(&self.vertices, d)?;
        let dinv = Rat::from_int(d as i64 + 1).recip()?;
        let mut acc = Rat::zero();
        for s in &simplices {
            let v0 = &self.vertices[s[0]];
            let mat: Vec<Vec<Rat>> = s[1..]
                .iter()
                .map(|&i| self.vertices[i].iter().zip(v0).map(|(a, b)| a - b).collect())
                .collect();
            let vol = linalg::det(&mat).abs().checked_div(&Rat::factorial(d))?;
            if vol.is_zero() {
                continue;
            }
            let mut centroid = vec![Rat::zero(); d];
            for &i in s {
                for (c, x) in centroid.iter_mut().zip(&self.vertices[i]) {
                    *c += x;
                }
            }
            let mut value = constant.clone();
            for (a, c) in linear.iter().zip(&centroid) {
                value += &(a * c) * &dinv;
            }
            acc += vol * value;
        }
        Ok(acc)
    }

    /// Euclidean volume, zero when not full-dimensional, by exact
    /// simplicial triangulation.
    pub fn volume(&self) -> Result<Rat> {
        let d = self.ambient_dim;
        if d == 0 {
            return Ok(Rat::one());
        }
        if self.affine_dim() < d {
            return Ok(Rat::zero());
        }
        let simplices = triangulate(&self.vertices, d)?;
        let mut vol = Rat::zero();
        for s in &simplices {
            let v0 = &self.vertices[s[0]];
            let mat: Vec<Vec<Rat>> = s[1..]
                .iter()
                .map(|&i| self.vertices[i].iter().zip(v0).map(|(a, b)| a - b).collect())
                .collect();
            vol += linalg::det(&mat).abs();
        }
        Ok(vol.checked_div(&Rat::factorial(d))?)
    }
}

/// Exact convex-combination membership: is `p` in the hull of `points`?
/// A direct phase-one simplex on the convex-combination system.
pub fn in_convex_hull(p: &[Rat], points: &[&[Rat]]) -> bool {
    let d = p.len();
    let n = points.len();
    let rows = d + 1;
    // System: sum_j lambda_j q_j = p, sum_j lambda_j = 1, lambda >= 0.
    let mut m: Vec<Vec<Rat>> = Vec::with_capacity(rows);
    let mut rhs: Vec<Rat> = Vec::with_capacity(rows);
    for i in 0..d {
        let mut row: Vec<Rat> = (0..n).map(|j| points[j][i].clone()).collect();
        let mut b = p[i].clone();
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
            b = -b;
        }
        m.push(row);
        rhs.push(b);
    }
    m.push(vec![Rat::one(); n]);
    rhs.push(Rat::one());

    // Append artificial columns and minimize their sum (maximize negative).
    let width = n + rows;
    for (i, row) in m.iter_mut().enumerate() {
        for j in 0..rows {
            row.push(if j == i { Rat::one() } else { Rat::zero() });
        }
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();
    loop {
        // reduced costs for cost = -1 on artificials
        let mut entering = None;
        for j in 0..width {
            if basis.contains(&j) {
                continue;
            }
            let mut red = if j >= n { Rat::from_int(-1) } else { Rat::zero() };
            for (i, &bv) in basis.iter().enumerate() {
                if bv >= n && !m[i][j].is_zero() {
                    red += &m[i][j];
                }
            }
            if red.is_positive() {
                entering = Some(j);
                break;
            }
        }
        let Some(col) = entering else {
            let infeas: Rat = basis
                .iter()
                .enumerate()
                .filter(|(_, &bv)| bv >= n)
                .fold(Rat::zero(), |acc, (i, _)| acc + &rhs[i]);
            return infeas.is_zero();
        };
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..rows {
            if m[i][col].is_positive() {
                let ratio = rhs[i].checked_div(&m[i][col]).expect("positive pivot");
                let better = match &leave {
                    None => true,
                    Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((prow, _)) = leave else {
            return false;
        };
        let inv = m[prow][col].recip().expect("pivot nonzero");
        for v in m[prow].iter_mut() {
            *v = &*v * &inv;
        }
        rhs[prow] = &rhs[prow] * &inv;
        for i in 0..rows {
            if i == prow || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].clone();
            for j in 0..width {
                let t = &factor * &m[prow][j];
                m[i][j] -= &t;
            }
            let t = &factor * &rhs[prow];
            rhs[i] -= &t;
        }
        basis[prow] = col;
    }
}

/// Affine rank (dimension of the affine hull) of a point set.
pub fn affine_rank(points: &[Vec<Rat>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = &points[0];
    let diffs: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    linalg::rank(&diffs)
}

/// Primitive integer normal of the hyperplane through the indexed points,
/// or `None` when they do not span one.
fn hyperplane_normal(points: &[Vec<Rat>], idx: &[usize], d: usize) -> Option<Vec<BigInt>> {
    let base = &points[idx[0]];
    let diffs: Vec<Vec<Rat>> = idx[1..]
        .iter()
        .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    if linalg::rank(&diffs) != d - 1 {
        return None;
    }
    let normal = linalg::kernel_vector(&diffs, d)?;
    Some(to_primitive_integer(&normal))
}

/// Scales a rational vector to a primitive integer vector with a canonical
/// sign (first nonzero entry positive).
pub fn to_primitive_integer(v: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = gcd.gcd(x);
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for x in ints.iter_mut() {
            *x = &*x / &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -&*x;
            }
        }
    }
    ints
}

/// Triangulates a full-dimensional point set into d-simplices, returned as
/// index lists. Recursion: cone from the lexicographically least vertex
/// over triangulations of the facets that miss it.
fn triangulate(points: &[Vec<Rat>], d: usize) -> Result<Vec<Vec<usize>>> {
    if d == 1 {
        let lo = (0..points.len()).min_by(|&a, &b| points[a].cmp(&points[b])).unwrap();
        let hi = (0..points.len()).max_by(|&a, &b| points[a].cmp(&points[b])).unwrap();
        if lo == hi {
            return Err(KstabError::TriangulationFailure("degenerate segment".into()));
        }
        return Ok(vec![vec![lo, hi]]);
    }
    let poly = QPolytope {
        ambient_dim: d,
        vertices: points.to_vec(),
    };
    let facets = poly.facets()?;
    if facets.is_empty() {
        return Err(KstabError::TriangulationFailure("no facets found".into()));
    }
    let apex = (0..points.len()).min_by(|&a, &b| points[a].cmp(&points[b])).unwrap();
    let mut out = Vec::new();
    for f in &facets {
        if f.eval(&points[apex]) == f.rhs {
            continue;
        }
        let tight: Vec<usize> = (0..points.len()).filter(|&i| f.eval(&points[i]) == f.rhs).collect();
        let fpoints: Vec<Vec<Rat>> = tight.iter().map(|&i| points[i].clone()).collect();
        let coords = injective_coords(&fpoints, d - 1).ok_or_else(|| {
            KstabError::TriangulationFailure("facet projection not injective".into())
        })?;
        let projected: Vec<Vec<Rat>> = fpoints
            .iter()
            .map(|p| coords.iter().map(|&c| p[c].clone()).collect())
            .collect();
        for sub in triangulate(&projected, d - 1)? {
            let mut simplex = vec![apex];
            simplex.extend(sub.into_iter().map(|i| tight[i]));
            out.push(simplex);
        }
    }
    Ok(out)
}

/// A coordinate subset of the requested size on which the point set's
/// affine hull projects injectively.
fn injective_coords(points: &[Vec<Rat>], want: usize) -> Option<Vec<usize>> {
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
        if linalg::rank(&sub) == trial.len() {
            chosen = trial;
        }
    }
    (chosen.len() == want).then_some(chosen)
}
