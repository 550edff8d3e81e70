use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::io::{self, BufRead, Write};

use serde::Serialize;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::{Domain, GeometryError, Point};

/// Minimum interior angle every generated mesh must reach.
pub const MIN_ANGLE_DEG: f64 = 20.0;
const SMOOTHING_MIN_PASSES: usize = 4;
const SMOOTHING_MAX_PASSES: usize = 40;
const ARC_TABLE_SAMPLES: usize = 16384;

/// Geometric grading of the mesh toward a point, used to resolve the
/// concentrating peak of solutions at large exponents.
///
/// Inside a disk of `radius` around `center` nodes are laid out on
/// concentric rings whose radii shrink geometrically down to `min_radius`;
/// element size is proportional to the distance from the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRefinement {
    pub center: Point,
    pub radius: f64,
    pub min_radius: f64,
}

impl PeakRefinement {
    pub const DEFAULT_RADIUS: f64 = 0.2;
    pub const DEFAULT_MIN_RADIUS: f64 = 1e-13;

    pub fn at(center: Point) -> Self {
        Self {
            center,
            radius: Self::DEFAULT_RADIUS,
            min_radius: Self::DEFAULT_MIN_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshOptions {
    pub h: f64,
    pub refinement: Option<PeakRefinement>,
}

impl MeshOptions {
    pub fn uniform(h: f64) -> Self {
        Self {
            h,
            refinement: None,
        }
    }

    pub fn refined(h: f64, refinement: PeakRefinement) -> Self {
        Self {
            h,
            refinement: Some(refinement),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryEdge {
    /// Endpoints in counter-clockwise boundary order.
    pub nodes: [usize; 2],
    /// The unique triangle containing this edge.
    pub triangle: usize,
    pub normal: Point,
    pub length: f64,
}

impl BoundaryEdge {
    pub fn midpoint(&self, mesh: &Mesh) -> Point {
        let a = mesh.nodes[self.nodes[0]];
        let b = mesh.nodes[self.nodes[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    boundary_edges: Vec<BoundaryEdge>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from raw parts, deriving boundary edges from the
    /// triangle connectivity (edges used by exactly one triangle).
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        h: f64,
    ) -> Result<Self, GeometryError> {
        let mut edge_use: HashMap<(usize, usize), Vec<(usize, [usize; 2])>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                edge_use
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((t, [a, b]));
            }
        }
        let mut boundary = vec![false; nodes.len()];
        let mut boundary_edges = Vec::new();
        let mut keys: Vec<_> = edge_use.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let uses = &edge_use[&key];
            match uses.len() {
                1 => {
                    let (t, [a, b]) = uses[0];
                    boundary[a] = true;
                    boundary[b] = true;
                    boundary_edges.push(make_edge(&nodes, [a, b], t));
                }
                2 => {}
                n => {
                    return Err(GeometryError::MeshFailure(format!(
                        "edge {key:?} shared by {n} triangles"
                    )))
                }
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary,
            boundary_edges,
            h,
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Target edge length away from any refinement zone.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                min_angle(a, b, c)
            })
            .fold(180.0, f64::min)
    }

    /// Sorted neighbor lists of every node.
    pub fn node_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.nodes.len()];
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    }

    /// Longest edge among triangles incident to `node`.
    pub fn local_size(&self, node: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for tri in self.triangles.iter().filter(|t| t.contains(&node)) {
            for e in 0..3 {
                let p = self.nodes[tri[e]];
                let q = self.nodes[tri[(e + 1) % 3]];
                worst = worst.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        worst
    }

    /// Checks every structural invariant; `domain` enables the
    /// boundary-proximity check.
    pub fn validate(&self, domain: Option<&Domain>) -> Result<(), GeometryError> {
        let fail = |m: String| Err(GeometryError::MeshFailure(m));
        for t in 0..self.triangles.len() {
            if !(self.signed_area(t) > 0.0) {
                return fail(format!("triangle {t} has non-positive area"));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary_set: std::collections::HashSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
            .collect();
        for (edge, count) in &edge_count {
            let expected = if boundary_set.contains(edge) { 1 } else { 2 };
            if *count != expected {
                return fail(format!(
                    "edge {edge:?} used by {count} triangles, expected {expected}"
                ));
            }
        }
        for e in &self.boundary_edges {
            let len = e.normal[0].hypot(e.normal[1]);
            if (len - 1.0).abs() > 1e-12 {
                return fail(format!("boundary normal of length {len}"));
            }
            if !self.triangles[e.triangle].contains(&e.nodes[0])
                || !self.triangles[e.triangle].contains(&e.nodes[1])
            {
                return fail("boundary edge not owned by its triangle".into());
            }
        }
        if let Some(domain) = domain {
            let tol = 10.0 * self.h * self.h;
            for (i, p) in self.nodes.iter().enumerate() {
                if self.boundary[i] {
                    let d = domain.distance_to_boundary(*p);
                    if d > tol {
                        return fail(format!("boundary node {i} lies {d:e} off the curve"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Plain-text export: header `nodes N triangles T`, then `x y flag` per
    /// node and `i j k` (0-based) per triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "nodes {} triangles {}",
            self.nodes.len(),
            self.triangles.len()
        )?;
        for (p, &b) in self.nodes.iter().zip(&self.boundary) {
            writeln!(out, "{:e} {:e} {}", p[0], p[1], u8::from(b))?;
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Mesh::write_text`].
    pub fn read_text<R: BufRead>(input: R, h: f64) -> Result<Self, GeometryError> {
        let bad = |m: &str| GeometryError::MeshFailure(format!("mesh text: {m}"));
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty input"))?
            .map_err(|e| bad(&e.to_string()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "nodes" || parts[2] != "triangles" {
            return Err(bad("malformed header"));
        }
        let n: usize = parts[1].parse().map_err(|_| bad("node count"))?;
        let t: usize = parts[3].parse().map_err(|_| bad("triangle count"))?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| bad("truncated"))?
                .map_err(|e| bad(&e.to_string()))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .take(2)
                .map(|s| s.parse().map_err(|_| bad("coordinate")))
                .collect::<Result<_, _>>()?;
            nodes.push([v[0], v[1]]);
        }
        let mut triangles = Vec::with_capacity(t);
        for _ in 0..t {
            let line = lines
                .next()
                .ok_or_else(|| bad("truncated"))?
                .map_err(|e| bad(&e.to_string()))?;
            let v: Vec<usize> = line
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("index")))
                .collect::<Result<_, _>>()?;
            if v.len() != 3 || v.iter().any(|&i| i >= n) {
                return Err(bad("triangle line"));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        Self::from_parts(nodes, triangles, h)
    }

    /// Copy of the mesh with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.nodes {
            p[0] *= factor;
            p[1] *= factor;
        }
        for e in &mut out.boundary_edges {
            e.length *= factor;
        }
        out.h *= factor;
        out
    }
}

fn make_edge(nodes: &[Point], [a, b]: [usize; 2], triangle: usize) -> BoundaryEdge {
    let pa = nodes[a];
    let pb = nodes[b];
    let d = [pb[0] - pa[0], pb[1] - pa[1]];
    let length = d[0].hypot(d[1]);
    BoundaryEdge {
        nodes: [a, b],
        triangle,
        normal: [d[1] / length, -d[0] / length],
        length,
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn min_angle(a: Point, b: Point, c: Point) -> f64 {
    let la = (b[0] - c[0]).hypot(b[1] - c[1]);
    let lb = (a[0] - c[0]).hypot(a[1] - c[1]);
    let lc = (a[0] - b[0]).hypot(a[1] - b[1]);
    let angle = |opp: f64, s1: f64, s2: f64| {
        ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2))
            .clamp(-1.0, 1.0)
            .acos()
            .to_degrees()
    };
    angle(la, lb, lc)
        .min(angle(lb, la, lc))
        .min(angle(lc, la, lb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeRole {
    Boundary,
    /// Smoothed lattice node.
    Free,
    /// Ring nodes and the pinned center.
    Pinned,
}

struct Grading {
    center: Point,
    outer: f64,
    rings: Vec<f64>,
    per_ring: usize,
}

impl Grading {
    fn new(domain: &Domain, r: &PeakRefinement, h: f64) -> Result<Self, GeometryError> {
        if !domain.contains(r.center) {
            return Err(GeometryError::InvalidParameter(
                "refinement center must lie inside the domain".into(),
            ));
        }
        if !(r.radius > 0.0 && r.min_radius > 0.0 && r.min_radius < r.radius) {
            return Err(GeometryError::InvalidParameter(
                "refinement needs 0 < min_radius < radius".into(),
            ));
        }
        let clearance = domain.distance_to_boundary(r.center);
        let outer = r.radius.min(0.45 * clearance);
        let per_ring = ((TAU * outer / h).ceil() as usize).max(12);
        let ratio = 1.0 - 3f64.sqrt() * PI / per_ring as f64;
        let scale = r.center[0].abs().max(r.center[1].abs());
        let floor = r.min_radius.max(1e3 * f64::EPSILON * scale);
        let mut rings = vec![outer];
        while rings.last().unwrap() * ratio >= floor {
            rings.push(rings.last().unwrap() * ratio);
        }
        Ok(Self {
            center: r.center,
            outer,
            rings,
            per_ring,
        })
    }

    fn excludes(&self, p: Point, h: f64) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.outer + 0.5 * h
    }

    fn push_points(&self, points: &mut Vec<Point>, roles: &mut Vec<NodeRole>) {
        let c = self.center;
        let n = self.per_ring;
        for (k, &r) in self.rings.iter().enumerate() {
            let offset = if k % 2 == 1 { PI / n as f64 } else { 0.0 };
            for j in 0..n {
                let t = TAU * j as f64 / n as f64 + offset;
                points.push([c[0] + r * t.cos(), c[1] + r * t.sin()]);
                roles.push(NodeRole::Pinned);
            }
        }
        // Small hexagonal patch closing the innermost ring.
        let last = *self.rings.last().unwrap();
        let spacing = TAU * last / n as f64;
        let reach = last - 0.5 * spacing;
        let m = (reach / spacing).ceil() as i64 + 1;
        let dy = spacing * 3f64.sqrt() / 2.0;
        for j in -m..=m {
            for i in -m..=m {
                let x = (i as f64 + if j.rem_euclid(2) == 1 { 0.5 } else { 0.0 }) * spacing;
                let y = j as f64 * dy;
                if x.hypot(y) < reach {
                    points.push([c[0] + x, c[1] + y]);
                    roles.push(if i == 0 && j == 0 {
                        NodeRole::Pinned
                    } else {
                        NodeRole::Free
                    });
                }
            }
        }
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

fn polygon_distance(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| segment_distance(p, poly[k], poly[(k + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn inside_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1])
            && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0]
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Far enough inside the curved boundary to host an interior node.
fn clear_of_boundary(domain: &Domain, poly: &[Point], p: Point, min_dist: f64, h: f64) -> bool {
    if !domain.contains(p) {
        return false;
    }
    let gap = domain.rho(p[1].atan2(p[0])) - p[0].hypot(p[1]);
    gap > 3.0 * h || (inside_polygon(p, poly) && polygon_distance(p, poly) > min_dist)
}

fn boundary_angles(domain: &Domain, h: f64) -> Vec<f64> {
    let (thetas, s) = domain.arc_length_table(ARC_TABLE_SAMPLES);
    let perimeter = *s.last().unwrap();
    let count = ((perimeter / h) * (1.0 + 1e-9)).ceil().max(8.0) as usize;
    let mut out = Vec::with_capacity(count);
    let mut j = 0;
    for k in 0..count {
        let target = perimeter * k as f64 / count as f64;
        while s[j + 1] < target {
            j += 1;
        }
        let frac = (target - s[j]) / (s[j + 1] - s[j]);
        out.push(thetas[j] + frac * (thetas[j + 1] - thetas[j]));
    }
    out
}

fn triangulate(points: &[Point], n_boundary: usize) -> Result<Vec<[usize; 3]>, GeometryError> {
    let vertices: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let edges: Vec<[usize; 2]> = (0..n_boundary).map(|k| [k, (k + 1) % n_boundary]).collect();
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| GeometryError::MeshFailure(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != points.len() {
        return Err(GeometryError::MeshFailure(
            "duplicate mesh points were merged".into(),
        ));
    }
    let poly = &points[..n_boundary];
    let mut tris = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        if a < n_boundary && b < n_boundary && c < n_boundary {
            let centroid = [
                (points[a][0] + points[b][0] + points[c][0]) / 3.0,
                (points[a][1] + points[b][1] + points[c][1]) / 3.0,
            ];
            if !inside_polygon(centroid, poly) {
                continue;
            }
        }
        if signed_area(points[a], points[b], points[c]) > 0.0 {
            tris.push([a, b, c]);
        } else {
            tris.push([a, c, b]);
        }
    }
    Ok(tris)
}

fn worst_angle(points: &[Point], tris: &[[usize; 3]]) -> f64 {
    tris.iter()
        .map(|t| min_angle(points[t[0]], points[t[1]], points[t[2]]))
        .fold(180.0, f64::min)
}

/// Uniform mesh with target edge length `h`.
pub fn generate_mesh(domain: &Domain, h: f64) -> Result<Mesh, GeometryError> {
    generate_mesh_with(domain, &MeshOptions::uniform(h))
}

/// Conforming triangulation of `domain`: boundary nodes exactly on the curve
/// at arc-length spacing ≤ h, a hexagonal lattice inside, optional graded
/// rings around a refinement center, then Laplacian smoothing with
/// re-triangulation until every angle is at least [`MIN_ANGLE_DEG`].
pub fn generate_mesh_with(domain: &Domain, opts: &MeshOptions) -> Result<Mesh, GeometryError> {
    let h = opts.h;
    let limit = 0.5 * domain.min_radius();
    if !(h > 0.0 && h < limit) {
        return Err(GeometryError::InvalidMeshSize { h, limit });
    }
    let grading = opts
        .refinement
        .as_ref()
        .map(|r| Grading::new(domain, r, h))
        .transpose()?;

    let mut points: Vec<Point> = boundary_angles(domain, h)
        .into_iter()
        .map(|t| domain.boundary_point(t))
        .collect();
    let n_boundary = points.len();
    let mut roles = vec![NodeRole::Boundary; n_boundary];
    let poly: Vec<Point> = points.clone();

    let dy = h * 3f64.sqrt() / 2.0;
    let reach = domain.max_radius();
    let rows = (reach / dy).ceil() as i64 + 1;
    let cols = (reach / h).ceil() as i64 + 1;
    for j in -rows..=rows {
        for i in -cols..=cols {
            let x = (i as f64 + if j.rem_euclid(2) == 1 { 0.5 } else { 0.0 }) * h;
            let y = j as f64 * dy;
            let p = [x, y];
            if grading.as_ref().is_some_and(|g| g.excludes(p, h)) {
                continue;
            }
            if clear_of_boundary(domain, &poly, p, 0.5 * h, h) {
                points.push(p);
                roles.push(if i == 0 && j == 0 {
                    NodeRole::Pinned
                } else {
                    NodeRole::Free
                });
            }
        }
    }
    if let Some(g) = &grading {
        g.push_points(&mut points, &mut roles);
    }

    let mut tris = triangulate(&points, n_boundary)?;
    let mut pass = 0;
    loop {
        let quality = worst_angle(&points, &tris);
        if pass >= SMOOTHING_MIN_PASSES && quality >= MIN_ANGLE_DEG {
            break;
        }
        if pass >= SMOOTHING_MAX_PASSES {
            return Err(GeometryError::MeshFailure(format!(
                "minimum angle {quality:.2}° below {MIN_ANGLE_DEG}° after {pass} smoothing passes"
            )));
        }
        let mut sum = vec![[0.0f64; 2]; points.len()];
        let mut count = vec![0usize; points.len()];
        for t in &tris {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                for (from, to) in [(a, b), (b, a)] {
                    sum[from][0] += points[to][0];
                    sum[from][1] += points[to][1];
                    count[from] += 1;
                }
            }
        }
        for i in 0..points.len() {
            if roles[i] != NodeRole::Free || count[i] == 0 {
                continue;
            }
            let target = [sum[i][0] / count[i] as f64, sum[i][1] / count[i] as f64];
            if clear_of_boundary(domain, &poly, target, 0.25 * h, h) {
                points[i] = target;
            }
        }
        tris = triangulate(&points, n_boundary)?;
        pass += 1;
    }

    let mut used = vec![false; points.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    if let Some(orphan) = used.iter().position(|u| !u) {
        return Err(GeometryError::MeshFailure(format!(
            "node {orphan} is not part of any triangle"
        )));
    }

    let boundary: Vec<bool> = roles.iter().map(|r| *r == NodeRole::Boundary).collect();
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in tris.iter().enumerate() {
        for e in 0..3 {
            let a = tri[e];
            let b = tri[(e + 1) % 3];
            if boundary[a] && boundary[b] {
                owner.insert((a, b), t);
            }
        }
    }
    let mut boundary_edges = Vec::with_capacity(n_boundary);
    for k in 0..n_boundary {
        let pair = [k, (k + 1) % n_boundary];
        let t = *owner.get(&(pair[0], pair[1])).ok_or_else(|| {
            GeometryError::MeshFailure(format!("boundary edge {pair:?} was not recovered"))
        })?;
        boundary_edges.push(make_edge(&points, pair, t));
    }

    let mesh = Mesh {
        nodes: points,
        triangles: tris,
        boundary,
        boundary_edges,
        h,
    };
    mesh.validate(None)?;
    Ok(mesh)
}
