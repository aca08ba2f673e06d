//! Exact bounded convex regions in dimension at most 3, represented by their
//! vertex set. Used as the feasibility engine behind the partial-vector
//! queries: each query region is an intersection of half-spaces clipped out
//! of a large bounding box, and strictness is decided from vertex margins.

use crate::arith::Scalar;

/// A closed half-space `coeffs . x <= rhs`; `strict` marks rows whose
/// underlying constraint is a strict inequality (handled by margin checks on
/// the closed relaxation).
#[derive(Debug, Clone)]
pub struct Row<S: Scalar> {
    pub coeffs: Vec<S>,
    pub rhs: S,
    pub strict: bool,
}

impl<S: Scalar> Row<S> {
    /// `rhs - coeffs . x`; nonnegative exactly when `x` satisfies the closed
    /// row. The second return value is a magnitude scale for floating-point
    /// sign classification.
    fn residual(&self, x: &[S]) -> (S, S) {
        let mut dot = S::zero();
        let mut scale = self.rhs.abs();
        for (a, v) in self.coeffs.iter().zip(x.iter()) {
            let term = a.clone() * v.clone();
            scale = scale + term.abs();
            dot = dot + term;
        }
        (self.rhs.clone() - dot, scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    On,
    Out,
}

fn side_of<S: Scalar>(residual: &S, scale: &S) -> Side {
    if S::EXACT {
        if *residual > S::zero() {
            Side::In
        } else if *residual < S::zero() {
            Side::Out
        } else {
            Side::On
        }
    } else {
        let eps = S::from_f64(1e-12) * S::max_of(scale.clone(), S::one());
        if residual.abs() <= eps {
            Side::On
        } else if *residual > S::zero() {
            Side::In
        } else {
            Side::Out
        }
    }
}

#[derive(Debug, Clone)]
struct Vertex<S: Scalar> {
    coords: Vec<S>,
    /// Sorted ids of the stored rows this vertex lies on.
    tight: Vec<u32>,
}

/// Intersection of half-spaces inside a `[-bound, bound]^d` box, tracked by
/// its vertices. The box keeps every region bounded, so emptiness is exactly
/// "no vertices".
#[derive(Debug, Clone)]
pub struct Region<S: Scalar> {
    dim: usize,
    rows: Vec<Row<S>>,
    vertices: Vec<Vertex<S>>,
}

impl<S: Scalar> Region<S> {
    /// The full box `[-bound, bound]^d`.
    pub fn full(dim: usize, bound: f64) -> Self {
        assert!((1..=3).contains(&dim), "region engine supports d in 1..=3");
        let b = S::from_f64(bound);
        let mut rows = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            let mut pos = vec![S::zero(); dim];
            pos[axis] = S::one();
            rows.push(Row {
                coeffs: pos.clone(),
                rhs: b.clone(),
                strict: false,
            });
            let mut neg = vec![S::zero(); dim];
            neg[axis] = -S::one();
            rows.push(Row {
                coeffs: neg,
                rhs: b.clone(),
                strict: false,
            });
        }
        let mut vertices = Vec::with_capacity(1 << dim);
        for corner in 0..(1u32 << dim) {
            let mut coords = Vec::with_capacity(dim);
            let mut tight = Vec::with_capacity(dim);
            for axis in 0..dim {
                if corner >> axis & 1 == 0 {
                    coords.push(b.clone());
                    tight.push(2 * axis as u32);
                } else {
                    coords.push(-b.clone());
                    tight.push(2 * axis as u32 + 1);
                }
            }
            tight.sort_unstable();
            vertices.push(Vertex { coords, tight });
        }
        Region {
            dim,
            rows,
            vertices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_coords(&self) -> impl Iterator<Item = &[S]> {
        self.vertices.iter().map(|v| v.coords.as_slice())
    }

    /// Clip by the closed half-space of `row`. Returns whether the region
    /// stayed non-empty.
    pub fn clip(&mut self, row: Row<S>) -> bool {
        let id = self.rows.len() as u32;
        let sides: Vec<Side> = self
            .vertices
            .iter()
            .map(|v| {
                let (r, scale) = row.residual(&v.coords);
                side_of(&r, &scale)
            })
            .collect();
        self.rows.push(row);

        if sides.iter().all(|s| *s != Side::Out) {
            // Nothing cut away; just record tangency.
            for (vertex, side) in self.vertices.iter_mut().zip(sides.iter()) {
                if *side == Side::On {
                    vertex.tight.push(id);
                    vertex.tight.sort_unstable();
                }
            }
            return true;
        }

        let mut kept: Vec<Vertex<S>> = Vec::new();
        let mut cut: Vec<Vertex<S>> = Vec::new();
        for (vertex, side) in self.vertices.drain(..).zip(sides.iter()) {
            match side {
                Side::Out => cut.push(vertex),
                Side::On => {
                    let mut v = vertex;
                    v.tight.push(id);
                    v.tight.sort_unstable();
                    kept.push(v);
                }
                Side::In => kept.push(vertex),
            }
        }
        if kept.is_empty() {
            self.vertices.clear();
            return false;
        }

        // Cut every edge running from a kept strictly-interior vertex to a
        // removed one. Edge test: the shared tight rows must span a
        // (d-1)-dimensional face.
        let row_ref = &self.rows[id as usize];
        let mut created: Vec<Vertex<S>> = Vec::new();
        for inside in kept.iter().filter(|v| !v.tight.contains(&id)) {
            for outside in cut.iter() {
                let shared = intersect_sorted(&inside.tight, &outside.tight);
                if shared.len() < self.dim - 1 {
                    continue;
                }
                if self.dim > 1
                    && rank(
                        &shared
                            .iter()
                            .map(|&r| self.rows[r as usize].coeffs.clone())
                            .collect::<Vec<_>>(),
                    ) < self.dim - 1
                {
                    continue;
                }
                // Preferred: solve the defining system directly, which keeps
                // coordinates accurate when the edge endpoints sit at box
                // scale. Fall back to interpolating along the edge.
                let defining: Vec<u32> = shared.iter().copied().chain([id]).collect();
                let coords = match solve_tight_system(&self.rows, &defining, self.dim) {
                    Some(coords) => coords,
                    None => {
                        let (r_in, _) = row_ref.residual(&inside.coords);
                        let (r_out, _) = row_ref.residual(&outside.coords);
                        // theta in (0, 1) along the segment, where the
                        // residual hits zero.
                        let theta = r_in.clone() / (r_in.clone() - r_out.clone());
                        inside
                            .coords
                            .iter()
                            .zip(outside.coords.iter())
                            .map(|(a, b)| a.clone() + theta.clone() * (b.clone() - a.clone()))
                            .collect()
                    }
                };
                // The construction already knows these rows are tight.
                let mut tight = shared;
                tight.push(id);
                tight.sort_unstable();
                created.push(Vertex { coords, tight });
            }
        }

        // Rescan adds any further coincidences, then dedupe coordinates.
        for vertex in created.iter_mut() {
            for (rid, r) in self.rows.iter().enumerate() {
                let rid = rid as u32;
                if vertex.tight.contains(&rid) {
                    continue;
                }
                let (res, scale) = r.residual(&vertex.coords);
                if side_of(&res, &scale) == Side::On {
                    vertex.tight.push(rid);
                }
            }
            vertex.tight.sort_unstable();
        }
        'outer: for vertex in created {
            for existing in kept.iter_mut() {
                if existing.coords == vertex.coords {
                    let merged = union_sorted(&existing.tight, &vertex.tight);
                    existing.tight = merged;
                    continue 'outer;
                }
            }
            kept.push(vertex);
        }

        self.vertices = kept;
        true
    }

    /// Largest residual of `row` over the vertices (None when empty).
    pub fn max_margin(&self, row: &Row<S>) -> Option<S> {
        self.vertices
            .iter()
            .map(|v| row.residual(&v.coords).0)
            .reduce(S::max_of)
    }

    /// Average of the vertices; lies in the relative interior, so any strict
    /// row with a positive-margin vertex is strictly satisfied here.
    pub fn centroid(&self) -> Option<Vec<S>> {
        if self.vertices.is_empty() {
            return None;
        }
        let count = S::from_usize(self.vertices.len());
        let mut acc = vec![S::zero(); self.dim];
        for v in &self.vertices {
            for (a, c) in acc.iter_mut().zip(v.coords.iter()) {
                *a = a.clone() + c.clone();
            }
        }
        Some(acc.into_iter().map(|a| a / count.clone()).collect())
    }

    /// Stored strict rows.
    pub fn strict_rows(&self) -> impl Iterator<Item = &Row<S>> {
        self.rows.iter().filter(|r| r.strict)
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = a.to_vec();
    for v in b {
        if !out.contains(v) {
            out.push(*v);
        }
    }
    out.sort_unstable();
    out
}

/// Solve `a_i . x = b_i` for up to `dim` unknowns over the given tight rows;
/// None when they do not pin a unique point.
fn solve_tight_system<S: Scalar>(rows: &[Row<S>], ids: &[u32], dim: usize) -> Option<Vec<S>> {
    // Augmented matrix [coeffs | rhs].
    let mut mat: Vec<Vec<S>> = ids
        .iter()
        .map(|&id| {
            let row = &rows[id as usize];
            let mut r = row.coeffs.clone();
            r.push(row.rhs.clone());
            r
        })
        .collect();
    let mut pivot_cols = Vec::with_capacity(dim);
    let mut r = 0;
    for c in 0..dim {
        // Partial pivoting for floating stability; a pivot must stand out
        // against its row's magnitude so rounding noise never pivots.
        let mut best: Option<(usize, S)> = None;
        for (i, row) in mat.iter().enumerate().skip(r) {
            let scale = row[..dim]
                .iter()
                .fold(S::one(), |acc, v| S::max_of(acc, v.abs()));
            let mag = row[c].abs();
            if side_of(&row[c], &scale) != Side::On {
                match &best {
                    Some((_, incumbent)) if mag <= *incumbent => {}
                    _ => best = Some((i, mag)),
                }
            }
        }
        let Some((p, _)) = best else { continue };
        mat.swap(r, p);
        let pivot = mat[r][c].clone();
        let pivot_row: Vec<S> = mat[r].iter().map(|v| v.clone() / pivot.clone()).collect();
        mat[r] = pivot_row.clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c].clone();
            if factor.is_zero() {
                continue;
            }
            for k in 0..=dim {
                row[k] = row[k].clone() - factor.clone() * pivot_row[k].clone();
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    if pivot_cols.len() < dim {
        return None;
    }
    let mut coords = vec![S::zero(); dim];
    for (row_idx, &c) in pivot_cols.iter().enumerate() {
        coords[c] = mat[row_idx][dim].clone();
    }
    Some(coords)
}

/// Rank of a small set of d-vectors by Gaussian elimination.
fn rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut mat: Vec<Vec<S>> = rows.to_vec();
    let cols = mat[0].len();
    let mut r = 0;
    let mut scale = S::one();
    for row in &mat {
        for v in row {
            scale = S::max_of(scale.clone(), v.abs());
        }
    }
    for c in 0..cols {
        let pivot = (r..mat.len()).find(|&i| side_of(&mat[i][c], &scale) != Side::On);
        let Some(p) = pivot else { continue };
        mat.swap(r, p);
        let pivot_val = mat[r][c].clone();
        let pivot_row = mat[r].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i != r {
                let factor = row[c].clone() / pivot_val.clone();
                for (entry, pivot_entry) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *entry = entry.clone() - factor.clone() * pivot_entry.clone();
                }
            }
        }
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Q;

    fn q(v: i64) -> Q {
        <Q as Scalar>::from_i64(v)
    }

    fn row(coeffs: Vec<i64>, rhs: i64, strict: bool) -> Row<Q> {
        Row {
            coeffs: coeffs.into_iter().map(q).collect(),
            rhs: q(rhs),
            strict,
        }
    }

    #[test]
    fn box_has_expected_corners() {
        let region = Region::<Q>::full(2, 8.0);
        assert_eq!(region.vertices.len(), 4);
        assert!(!region.is_empty());
    }

    #[test]
    fn clipping_to_a_triangle() {
        let mut region = Region::<Q>::full(2, 8.0);
        // x + y <= 1, x >= 0, y >= 0.
        assert!(region.clip(row(vec![1, 1], 1, false)));
        assert!(region.clip(row(vec![-1, 0], 0, false)));
        assert!(region.clip(row(vec![0, -1], 0, false)));
        let mut coords: Vec<Vec<Q>> = region.vertex_coords().map(|c| c.to_vec()).collect();
        coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            coords,
            vec![vec![q(0), q(0)], vec![q(0), q(1)], vec![q(1), q(0)],]
        );
    }

    #[test]
    fn infeasible_after_contradictory_rows() {
        let mut region = Region::<Q>::full(1, 8.0);
        assert!(region.clip(row(vec![1], -1, false))); // x <= -1
        assert!(!region.clip(row(vec![-1], -2, false))); // x >= 2
        assert!(region.is_empty());
    }

    #[test]
    fn margins_track_the_most_interior_vertex() {
        let mut region = Region::<Q>::full(1, 4.0);
        assert!(region.clip(row(vec![1], 4, false))); // redundant
                                                      // Box vertices are -4 and 4; the far vertex gives margin 8.
        assert_eq!(region.max_margin(&row(vec![1], 4, true)), Some(q(8)));
        // Pin the region to the single point x = 4: the strict row x <= 4 is
        // tight everywhere, so its best margin collapses to zero.
        assert!(region.clip(row(vec![-1], -4, false)));
        assert_eq!(region.max_margin(&row(vec![1], 4, true)), Some(q(0)));
        assert_eq!(region.max_margin(&row(vec![1], 10, true)), Some(q(6)));
    }

    #[test]
    fn centroid_of_full_box_is_origin() {
        let region = Region::<Q>::full(3, 16.0);
        assert_eq!(region.centroid().unwrap(), vec![q(0), q(0), q(0)]);
    }

    #[test]
    fn degenerate_single_point_region() {
        let mut region = Region::<Q>::full(2, 8.0);
        assert!(region.clip(row(vec![1, 0], 2, false)));
        assert!(region.clip(row(vec![-1, 0], -2, false))); // x == 2
        assert!(region.clip(row(vec![0, 1], 3, false)));
        assert!(region.clip(row(vec![0, -1], -3, false))); // y == 3
        let coords: Vec<Vec<Q>> = region.vertex_coords().map(|c| c.to_vec()).collect();
        assert_eq!(coords, vec![vec![q(2), q(3)]]);
        // Still a valid region; a further cut below the point empties it.
        let mut gone = region.clone();
        assert!(!gone.clip(row(vec![0, 1], 2, false)));
    }

    #[test]
    fn rank_detects_dependence() {
        assert_eq!(rank(&[vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
        assert_eq!(rank(&[vec![q(1), q(0)], vec![q(0), q(3)]]), 2);
        assert_eq!(rank::<Q>(&[]), 0);
    }

    #[test]
    fn three_dimensional_clip_produces_new_vertices() {
        let mut region = Region::<Q>::full(3, 2.0);
        // Cut the corner x + y + z <= 5 (slices one corner of the 4^3 box).
        assert!(region.clip(row(vec![1, 1, 1], 5, false)));
        // One corner (2,2,2) removed, three new vertices added.
        assert_eq!(region.vertices.len(), 7 + 3);
        for v in region.vertex_coords() {
            let sum = v[0].clone() + v[1].clone() + v[2].clone();
            assert!(sum <= q(5));
        }
    }
}
