//! Incremental convex hull in `R^d` for small `d` (3 to 6).
//!
//! Beneath-beyond with outside sets: facets are simplices with outward unit
//! normals and neighbour links across ridges. Points within `eps` of a facet
//! plane are treated as not visible, so coplanar input points are dropped
//! rather than producing sliver facets.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct HullFacet {
    /// Indices of the `d` input points spanning the facet.
    pub vertices: Vec<usize>,
    /// Outward unit normal.
    pub normal: DVector<f64>,
    /// `normal'p = offset` on the facet.
    pub offset: f64,
}

struct Work {
    verts: Vec<usize>,
    normal: DVector<f64>,
    offset: f64,
    neighbors: Vec<usize>,
    outside: Vec<usize>,
    alive: bool,
}

/// Unit normal of the hyperplane through `d` points in `R^d`, via cofactors.
fn plane_normal(points: &[DVector<f64>], idx: &[usize]) -> Option<DVector<f64>> {
    let d = points[idx[0]].len();
    let base = &points[idx[0]];
    let mut m = DMatrix::zeros(d - 1, d);
    for (r, &i) in idx[1..].iter().enumerate() {
        let diff = &points[i] - base;
        m.row_mut(r).copy_from(&diff.transpose());
    }
    let mut n = DVector::zeros(d);
    for j in 0..d {
        let minor = m.clone().remove_column(j);
        let det = if d == 1 { 1.0 } else { minor.determinant() };
        n[j] = if j % 2 == 0 { det } else { -det };
    }
    let norm = n.norm();
    (norm > 0.0 && norm.is_finite()).then(|| n / norm)
}

/// Facets of the convex hull of `points`, which must be full-dimensional.
pub fn convex_hull(points: &[DVector<f64>]) -> Result<Vec<HullFacet>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("convex hull of an empty set".into()));
    }
    let d = points[0].len();
    if d < 2 {
        return Err(Error::InvalidInput("convex hull needs dimension >= 2".into()));
    }
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-11 * scale;

    let simplex = initial_simplex(points, d, scale)?;
    let centroid = simplex.iter().fold(DVector::zeros(d), |acc, &i| acc + &points[i]) / (d + 1) as f64;

    let mut facets: Vec<Work> = Vec::new();
    for omit in 0..=d {
        let verts: Vec<usize> = simplex.iter().enumerate().filter(|(j, _)| *j != omit).map(|(_, &v)| v).collect();
        let (normal, offset) = oriented_plane(points, &verts, &centroid)?;
        facets.push(Work { verts, normal, offset, neighbors: vec![usize::MAX; d], outside: Vec::new(), alive: true });
    }
    // Facet `f` omits simplex vertex `f`; its vertex at position r is simplex[r'],
    // and the neighbour across it is the facet omitting that vertex.
    for f in 0..=d {
        for r in 0..d {
            let v = facets[f].verts[r];
            let other = simplex.iter().position(|&s| s == v).unwrap();
            facets[f].neighbors[r] = other;
        }
    }
    for p in 0..points.len() {
        if simplex.contains(&p) {
            continue;
        }
        for f in facets.iter_mut() {
            if f.normal.dot(&points[p]) - f.offset > eps {
                f.outside.push(p);
                break;
            }
        }
    }

    let mut queue: VecDeque<usize> = (0..facets.len()).collect();
    while let Some(fi) = queue.pop_front() {
        if !facets[fi].alive || facets[fi].outside.is_empty() {
            continue;
        }
        let apex = *facets[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = facets[fi].normal.dot(&points[a]);
                let db = facets[fi].normal.dot(&points[b]);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let p = &points[apex];

        // Visible region by flood fill.
        let mut visible = vec![fi];
        let mut is_visible: HashMap<usize, bool> = HashMap::new();
        is_visible.insert(fi, true);
        let mut stack = vec![fi];
        while let Some(v) = stack.pop() {
            for r in 0..d {
                let nb = facets[v].neighbors[r];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = facets[nb].normal.dot(p) - facets[nb].offset > eps;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    stack.push(nb);
                }
            }
        }

        // Horizon ridges and new cone of facets.
        let mut new_ids = Vec::new();
        let mut ridge_map: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &v in &visible {
            for r in 0..d {
                let nb = facets[v].neighbors[r];
                if is_visible[&nb] {
                    continue;
                }
                let mut verts: Vec<usize> = facets[v].verts.iter().enumerate().filter(|(j, _)| *j != r).map(|(_, &x)| x).collect();
                verts.push(apex);
                let (normal, offset) = oriented_plane(points, &verts, &centroid)?;
                let id = facets.len();
                let mut neighbors = vec![usize::MAX; d];
                neighbors[d - 1] = nb;
                let slot = facets[nb].neighbors.iter().position(|&x| x == v).unwrap();
                facets[nb].neighbors[slot] = id;
                facets.push(Work { verts, normal, offset, neighbors, outside: Vec::new(), alive: true });
                new_ids.push(id);
            }
        }
        for &id in &new_ids {
            for r in 0..d - 1 {
                let mut key: Vec<usize> = facets[id].verts.iter().enumerate().filter(|(j, _)| *j != r).map(|(_, &x)| x).collect();
                key.sort_unstable();
                if let Some((other, other_r)) = ridge_map.remove(&key) {
                    facets[id].neighbors[r] = other;
                    facets[other].neighbors[other_r] = id;
                } else {
                    ridge_map.insert(key, (id, r));
                }
            }
        }
        if !ridge_map.is_empty() {
            return Err(Error::Numerical("convex hull horizon is not closed".into()));
        }

        let mut orphans = Vec::new();
        for &v in &visible {
            facets[v].alive = false;
            orphans.append(&mut facets[v].outside);
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            for &id in &new_ids {
                if facets[id].normal.dot(&points[q]) - facets[id].offset > eps {
                    facets[id].outside.push(q);
                    break;
                }
            }
        }
        queue.extend(new_ids);
    }

    Ok(facets
        .into_iter()
        .filter(|f| f.alive)
        .map(|f| HullFacet { vertices: f.verts, normal: f.normal, offset: f.offset })
        .collect())
}

fn oriented_plane(points: &[DVector<f64>], verts: &[usize], interior: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let n = plane_normal(points, verts).ok_or_else(|| Error::Numerical("degenerate hull facet".into()))?;
    let off = n.dot(&points[verts[0]]);
    if n.dot(interior) - off > 0.0 {
        Ok((-n, -off))
    } else {
        Ok((n, off))
    }
}

/// Greedy choice of `d + 1` affinely independent points of large volume.
fn initial_simplex(points: &[DVector<f64>], d: usize, scale: f64) -> Result<Vec<usize>> {
    let first = (0..points.len())
        .max_by(|&a, &b| points[a].norm().partial_cmp(&points[b].norm()).unwrap())
        .unwrap();
    let mut chosen = vec![first];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < d + 1 {
        let mut best = (0.0, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut r = p - &points[first];
            for b in &basis {
                let proj = b.dot(&r);
                r -= b * proj;
            }
            let dist = r.norm();
            if dist > best.0 {
                best = (dist, i);
            }
        }
        if best.0 <= 1e-9 * scale || best.1 == usize::MAX {
            return Err(Error::Numerical("point set is not full-dimensional".into()));
        }
        let mut r = &points[best.1] - &points[first];
        for b in &basis {
            let proj = b.dot(&r);
            r -= b * proj;
        }
        basis.push(&r / r.norm());
        chosen.push(best.1);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_points() -> Vec<DVector<f64>> {
        let mut pts = Vec::new();
        for x in [-1.0, 1.0] {
            for y in [-1.0, 1.0] {
                for z in [-1.0, 1.0] {
                    pts.push(DVector::from_vec(vec![x, y, z]));
                }
            }
        }
        pts.push(DVector::from_vec(vec![0.1, 0.2, -0.3]));
        pts
    }

    #[test]
    fn cube_hull_has_only_corner_vertices() {
        let pts = cube_points();
        let facets = convex_hull(&pts).unwrap();
        // Each square face splits into two triangles.
        assert_eq!(facets.len(), 12);
        for f in &facets {
            assert!(!f.vertices.contains(&8));
            for p in &pts {
                assert!(f.normal.dot(p) - f.offset <= 1e-12);
            }
        }
    }

    #[test]
    fn cross_polytope_in_four_dimensions() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for s in [-1.0, 1.0] {
                let mut v = DVector::zeros(4);
                v[i] = s;
                pts.push(v);
            }
        }
        let facets = convex_hull(&pts).unwrap();
        assert_eq!(facets.len(), 16);
        for f in &facets {
            assert!((f.offset - 0.5).abs() < 1e-12);
        }
    }
}
