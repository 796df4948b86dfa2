//! Rational piecewise-linear convex functions on polytopes.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::hull::QPolytope;
use super::lattice::LatticePolytope;
use super::linalg;
use super::simplex;
use crate::error::{KstabError, Result};
use crate::exactmath::Rat;

/// One affine piece <linear, x> + constant.
///
/// Linear parts are rationals: flag-ideal envelopes produce slopes like
/// -1/2, so the integer-only representation is too small. Integral entries
/// still serialize as plain JSON integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLPiece {
    #[serde(
        serialize_with = "serialize_linear",
        deserialize_with = "deserialize_linear"
    )]
    pub linear: Vec<Rat>,
    pub constant: Rat,
}

fn serialize_linear<S: Serializer>(v: &Vec<Rat>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    use num_traits::ToPrimitive;
    let mut seq = ser.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_integer() {
            match x.numer().to_i64() {
                Some(i) => seq.serialize_element(&i)?,
                None => seq.serialize_element(&x.to_string())?,
            }
        } else {
            seq.serialize_element(&x.to_string())?;
        }
    }
    seq.end()
}

fn deserialize_linear<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<Rat>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Int(i64),
        Str(String),
    }
    let raw = Vec::<Entry>::deserialize(de)?;
    raw.into_iter()
        .map(|e| match e {
            Entry::Int(i) => Ok(Rat::from_int(i)),
            Entry::Str(s) => s.parse::<Rat>().map_err(|err| D::Error::custom(err.to_string())),
        })
        .collect()
}

impl PLPiece {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        let mut acc = self.constant.clone();
        for (a, xi) in self.linear.iter().zip(x) {
            acc += a * xi;
        }
        acc
    }
}

/// A convex function given as the maximum of finitely many affine pieces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLConvexFunction {
    pieces: Vec<PLPiece>,
}

impl PLConvexFunction {
    pub fn new(dim: usize, pieces: Vec<PLPiece>) -> Result<PLConvexFunction> {
        if pieces.is_empty() {
            return Err(KstabError::InvalidInput("PL function needs at least one piece".into()));
        }
        let mut kept: Vec<PLPiece> = Vec::new();
        for p in pieces {
            if p.linear.len() != dim {
                return Err(KstabError::DimensionMismatch(format!(
                    "PL piece with linear part of length {}, expected {dim}",
                    p.linear.len()
                )));
            }
            if !kept.contains(&p) {
                kept.push(p);
            }
        }
        Ok(PLConvexFunction { pieces: kept })
    }

    /// The constant function.
    pub fn constant(dim: usize, c: Rat) -> PLConvexFunction {
        PLConvexFunction {
            pieces: vec![PLPiece {
                linear: vec![Rat::zero(); dim],
                constant: c,
            }],
        }
    }

    pub fn pieces(&self) -> &[PLPiece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].linear.len()
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .max()
            .expect("at least one piece")
    }

    /// f_r(x) = r f(x/r) = max(<a, x> + r c), on integer points.
    pub fn eval_scaled(&self, x: &[i64], r: i64) -> Rat {
        let xr: Vec<Rat> = x.iter().map(|&v| Rat::from_int(v)).collect();
        let rr = Rat::from_int(r);
        self.pieces
            .iter()
            .map(|p| {
                let mut acc = &p.constant * &rr;
                for (a, xi) in p.linear.iter().zip(&xr) {
                    acc += a * xi;
                }
                acc
            })
            .max()
            .expect("at least one piece")
    }

    /// f + c.
    pub fn shift(&self, c: &Rat) -> PLConvexFunction {
        PLConvexFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| PLPiece {
                    linear: p.linear.clone(),
                    constant: &p.constant + c,
                })
                .collect(),
        }
    }

    /// x -> m f(x/m): the PL datum of the m-rescaled configuration.
    pub fn rescale(&self, m: i64) -> PLConvexFunction {
        let mr = Rat::from_int(m);
        PLConvexFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| PLPiece {
                    linear: p.linear.clone(),
                    constant: &p.constant * &mr,
                })
                .collect(),
        }
    }

    /// Keeps only the pieces attained somewhere on P.
    pub fn irredundant_on(&self, p: &LatticePolytope) -> Result<PLConvexFunction> {
        let facets = p.to_rational().facets()?;
        let d = self.dim();
        let mut kept = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let mut a: Vec<Vec<Rat>> = Vec::new();
            let mut b: Vec<Rat> = Vec::new();
            for f in &facets {
                a.push(f.normal.iter().map(Rat::from).collect());
                b.push(f.rhs.clone());
            }
            for (j, other) in self.pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                let row: Vec<Rat> = other
                    .linear
                    .iter()
                    .zip(&piece.linear)
                    .map(|(oj, pi)| oj - pi)
                    .collect();
                a.push(row);
                b.push(&piece.constant - &other.constant);
            }
            debug_assert_eq!(a[0].len(), d);
            if simplex::feasible(&a, &b) {
                kept.push(piece.clone());
            }
        }
        PLConvexFunction::new(d, kept)
    }

    /// Exact minimum over P (linear program).
    pub fn min_on(&self, p: &LatticePolytope) -> Result<Rat> {
        let facets = p.to_rational().facets()?;
        let d = self.dim();
        // variables (x, t): maximize -t subject to x in P, t >= piece(x)
        let mut a: Vec<Vec<Rat>> = Vec::new();
        let mut b: Vec<Rat> = Vec::new();
        for f in &facets {
            let mut row: Vec<Rat> = f.normal.iter().map(Rat::from).collect();
            row.push(Rat::zero());
            a.push(row);
            b.push(f.rhs.clone());
        }
        for piece in &self.pieces {
            let mut row: Vec<Rat> = piece.linear.clone();
            row.push(Rat::from_int(-1));
            a.push(row);
            b.push(-&piece.constant);
        }
        let mut c = vec![Rat::zero(); d];
        c.push(Rat::from_int(-1));
        match simplex::maximize(&c, &a, &b) {
            simplex::LpOutcome::Optimal { value, .. } => Ok(-value),
            simplex::LpOutcome::Infeasible => {
                Err(KstabError::InvalidInput("empty polytope in PL minimization".into()))
            }
            simplex::LpOutcome::Unbounded => {
                Err(KstabError::InvalidInput("unbounded PL minimization".into()))
            }
        }
    }

    /// Exact maximum over P: a convex function peaks at a vertex.
    pub fn max_on(&self, p: &LatticePolytope) -> Rat {
        p.vertices()
            .iter()
            .map(|v| {
                let x: Vec<Rat> = v.iter().map(|&c| Rat::from_int(c)).collect();
                self.eval(&x)
            })
            .max()
            .expect("polytope has vertices")
    }

    pub fn is_constant_on(&self, p: &LatticePolytope) -> Result<bool> {
        Ok(self.min_on(p)? == self.max_on(p))
    }

    /// Exact integral of f over P, summed cell by cell.
    pub fn integral_on(&self, p: &LatticePolytope) -> Result<Rat> {
        let cells = self.cell_vertices_on(p)?;
        let mut acc = Rat::zero();
        for (piece, verts) in self.pieces.iter().zip(cells) {
            if verts.is_empty() {
                continue;
            }
            let cell = QPolytope::from_points(self.dim(), verts)?;
            acc += cell.integrate_affine(&piece.linear, &piece.constant)?;
        }
        Ok(acc)
    }

    /// Vertices of the linearity cells {x in P : piece_i(x) = f(x)},
    /// one vertex list per piece (possibly empty).
    pub fn cell_vertices_on(&self, p: &LatticePolytope) -> Result<Vec<Vec<Vec<Rat>>>> {
        let facets = p.to_rational().facets()?;
        let d = self.dim();
        let mut out = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let mut ineq: Vec<(Vec<Rat>, Rat)> = facets
                .iter()
                .map(|f| (f.normal.iter().map(Rat::from).collect(), f.rhs.clone()))
                .collect();
            for (j, other) in self.pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                let row: Vec<Rat> = other
                    .linear
                    .iter()
                    .zip(&piece.linear)
                    .map(|(oj, pi)| oj - pi)
                    .collect();
                ineq.push((row, &piece.constant - &other.constant));
            }
            out.push(vertices_from_inequalities(&ineq, d));
        }
        Ok(out)
    }
}

/// Vertex enumeration of {x : <a_i, x> <= b_i} by basis enumeration.
/// Intended for small systems (cells of PL subdivisions).
pub fn vertices_from_inequalities(ineqs: &[(Vec<Rat>, Rat)], d: usize) -> Vec<Vec<Rat>> {
    let m = ineqs.len();
    let mut out: Vec<Vec<Rat>> = Vec::new();
    if m < d {
        return out;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a: Vec<Vec<Rat>> = idx.iter().map(|&i| ineqs[i].0.clone()).collect();
        let b: Vec<Rat> = idx.iter().map(|&i| ineqs[i].1.clone()).collect();
        if let Some(x) = linalg::solve(&a, &b) {
            let ok = ineqs.iter().all(|(row, rhs)| {
                let lhs: Rat = row.iter().zip(&x).map(|(r, xi)| r * xi).sum();
                lhs <= *rhs
            });
            if ok && !out.contains(&x) {
                out.push(x);
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - d {
                idx[i] += 1;
                for j in i + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Graph polytope Q = {(x, t) : x in P, 0 <= t <= R - f(x)} of a
/// test-configuration datum. Its dilations carry the weight sums.
#[derive(Debug, Clone)]
pub struct GraphPolytope {
    solid: QPolytope,
    base: LatticePolytope,
    f: PLConvexFunction,
    r_cap: Rat,
}

impl GraphPolytope {
    pub fn solid(&self) -> &QPolytope {
        &self.solid
    }

    pub fn base(&self) -> &LatticePolytope {
        &self.base
    }

    pub fn r_cap(&self) -> &Rat {
        &self.r_cap
    }

    /// Fibre height R - f(x) over a rational point of P.
    pub fn roof(&self, x: &[Rat]) -> Rat {
        &self.r_cap - &self.f.eval(x)
    }
}

/// Builds the graph polytope, checking 0 <= f <= R on P.
pub fn graph_polytope(p: &LatticePolytope, f: &PLConvexFunction, r_cap: &Rat) -> Result<GraphPolytope> {
    if !p.is_full_dimensional() {
        return Err(KstabError::InvalidInput(
            "graph polytope needs a full-dimensional base".into(),
        ));
    }
    if f.dim() != p.ambient_dim() {
        return Err(KstabError::DimensionMismatch(
            "PL function and polytope dimensions differ".into(),
        ));
    }
    let fmin = f.min_on(p)?;
    if fmin.is_negative() {
        return Err(KstabError::FunctionOutOfRange(format!(
            "PL function dips to {fmin} < 0 on the polytope"
        )));
    }
    let fmax = f.max_on(p);
    if &fmax > r_cap {
        return Err(KstabError::FunctionOutOfRange(format!(
            "PL function reaches {fmax} > R = {r_cap} on the polytope"
        )));
    }
    let n = p.ambient_dim();
    let mut points: Vec<Vec<Rat>> = Vec::new();
    for v in p.vertices() {
        let mut base: Vec<Rat> = v.iter().map(|&c| Rat::from_int(c)).collect();
        base.push(Rat::zero());
        points.push(base);
    }
    for cell in f.cell_vertices_on(p)? {
        for w in cell {
            let height = r_cap - &f.eval(&w);
            let mut lifted = w;
            lifted.push(height);
            points.push(lifted);
        }
    }
    let solid = QPolytope::from_points(n + 1, points)?;
    Ok(GraphPolytope {
        solid,
        base: p.clone(),
        f: f.clone(),
        r_cap: r_cap.clone(),
    })
}
