//! Simplicial meshes of the unit interval and unit square, with the face
//! connectivity and geometry the interior-penalty assembly needs.
//!
//! Faces carry an explicit plus/minus cell orientation. In 1d a face is a
//! single vertex and its measure is 1 by convention, so face integrals reduce
//! to point evaluation. The characteristic length used by the penalty term is
//! `(|T+| + |T-|) / (2 |e|)` on interior faces and `|T| / |e|` on boundary
//! faces.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// Labels partitioning the boundary. A tag is just a name for a piece of the
/// boundary; each physics problem decides what condition to attach to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    DirichletP,
    NeumannQ,
    DirichletU,
    TractionT,
}

impl BoundaryTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryTag::DirichletP => "dirichlet_p",
            BoundaryTag::NeumannQ => "neumann_q",
            BoundaryTag::DirichletU => "dirichlet_u",
            BoundaryTag::TractionT => "traction_t",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dirichlet_p" => Ok(BoundaryTag::DirichletP),
            "neumann_q" => Ok(BoundaryTag::NeumannQ),
            "dirichlet_u" => Ok(BoundaryTag::DirichletU),
            "traction_t" => Ok(BoundaryTag::TractionT),
            other => Err(Error::Parse(format!("unknown boundary tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceAdjacency {
    /// Shared by two cells; the normal points out of `plus`.
    Interior { plus: usize, minus: usize },
    /// On the boundary; the normal points out of the domain.
    Boundary { cell: usize, tag: BoundaryTag },
}

#[derive(Debug, Clone)]
pub struct Face {
    /// One vertex in 1d, two in 2d.
    pub vertices: Vec<usize>,
    /// Edge length in 2d; 1 in 1d by convention.
    pub measure: f64,
    /// Unit normal out of the plus (or only) cell. In 1d the y component is 0.
    pub normal: [f64; 2],
    pub adjacency: FaceAdjacency,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.adjacency, FaceAdjacency::Boundary { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Vertex ids per cell: 2 in 1d, 3 (counterclockwise) in 2d.
    pub cells: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    cell_measures: Vec<f64>,
}

impl Mesh {
    /// Uniform partition of `[0, 1]` into `n` segments. Both end faces are
    /// tagged `DirichletP`.
    pub fn unit_interval(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::Mesh("unit_interval needs at least one cell".into()));
        }
        let h = 1.0 / n as f64;
        let vertices: Vec<[f64; 2]> = (0..=n).map(|i| [i as f64 * h, 0.0]).collect();
        let cells: Vec<Vec<usize>> = (0..n).map(|i| vec![i, i + 1]).collect();
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(Face {
            vertices: vec![0],
            measure: 1.0,
            normal: [-1.0, 0.0],
            adjacency: FaceAdjacency::Boundary { cell: 0, tag: BoundaryTag::DirichletP },
        });
        for i in 1..n {
            faces.push(Face {
                vertices: vec![i],
                measure: 1.0,
                normal: [1.0, 0.0],
                adjacency: FaceAdjacency::Interior { plus: i - 1, minus: i },
            });
        }
        faces.push(Face {
            vertices: vec![n],
            measure: 1.0,
            normal: [1.0, 0.0],
            adjacency: FaceAdjacency::Boundary { cell: n - 1, tag: BoundaryTag::DirichletP },
        });
        let cell_measures = vec![h; n];
        let mesh = Mesh { dim: 1, vertices, cells, faces, cell_measures };
        mesh.audit()?;
        Ok(mesh)
    }

    /// Uniform `n x n` triangulation of `[0, 1]^2`; every square is split
    /// along the same diagonal, giving `2 n^2` congruent right triangles.
    /// All boundary faces are tagged `DirichletP`.
    pub fn unit_square(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::Mesh("unit_square needs at least one cell per side".into()));
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                cells.push(vec![v00, v10, v11]);
                cells.push(vec![v00, v11, v01]);
            }
        }
        Self::from_cells(2, vertices, cells, |_| BoundaryTag::DirichletP)
    }

    /// Builds connectivity, face geometry and measures from raw cells.
    /// `tagger` assigns a boundary tag from the face midpoint.
    pub fn from_cells(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        cells: Vec<Vec<usize>>,
        tagger: impl Fn([f64; 2]) -> BoundaryTag,
    ) -> Result<Mesh> {
        if dim != 2 {
            return Err(Error::Mesh("from_cells currently builds 2d meshes".into()));
        }
        let mut cell_measures = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != 3 {
                return Err(Error::Mesh(format!("cell {c} is not a triangle")));
            }
            let [a, b, cc] = [vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]];
            let det = (b[0] - a[0]) * (cc[1] - a[1]) - (cc[0] - a[0]) * (b[1] - a[1]);
            if det <= 0.0 {
                return Err(Error::Mesh(format!("cell {c} is degenerate or clockwise")));
            }
            cell_measures.push(0.5 * det);
        }
        // Collect edges; key is the sorted vertex pair.
        let mut edge_owner: std::collections::BTreeMap<(usize, usize), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (cell[e], cell[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_owner.entry(key).or_default().push(c);
            }
        }
        let mut faces = Vec::with_capacity(edge_owner.len());
        for ((a, b), owners) in edge_owner {
            let pa = vertices[a];
            let pb = vertices[b];
            let measure = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            if measure <= 0.0 {
                return Err(Error::Mesh(format!("zero-length edge ({a}, {b})")));
            }
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let adjacency = match owners.as_slice() {
                [c] => FaceAdjacency::Boundary { cell: *c, tag: tagger(mid) },
                [c1, c2] => {
                    let (plus, minus) = (*c1.min(c2), *c1.max(c2));
                    FaceAdjacency::Interior { plus, minus }
                }
                _ => {
                    return Err(Error::Mesh(format!("edge ({a}, {b}) owned by >2 cells")));
                }
            };
            let plus_cell = match adjacency {
                FaceAdjacency::Interior { plus, .. } => plus,
                FaceAdjacency::Boundary { cell, .. } => cell,
            };
            let centroid = centroid_of(&vertices, &cells[plus_cell]);
            let mut normal = [(pb[1] - pa[1]) / measure, -(pb[0] - pa[0]) / measure];
            if normal[0] * (mid[0] - centroid[0]) + normal[1] * (mid[1] - centroid[1]) < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            faces.push(Face { vertices: vec![a, b], measure, normal, adjacency });
        }
        let mesh = Mesh { dim: 2, vertices, cells, faces, cell_measures };
        mesh.audit()?;
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.cell_measures[c]
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        centroid_of(&self.vertices, &self.cells[c])
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let cell = &self.cells[c];
        let mut d: f64 = 0.0;
        for i in 0..cell.len() {
            for j in (i + 1)..cell.len() {
                let (a, b) = (self.vertices[cell[i]], self.vertices[cell[j]]);
                d = d.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        d
    }

    pub fn max_cell_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Penalty length scale of a face.
    pub fn face_characteristic_length(&self, f: usize) -> f64 {
        let face = &self.faces[f];
        match face.adjacency {
            FaceAdjacency::Interior { plus, minus } => {
                (self.cell_measures[plus] + self.cell_measures[minus]) / (2.0 * face.measure)
            }
            FaceAdjacency::Boundary { cell, .. } => self.cell_measures[cell] / face.measure,
        }
    }

    pub fn face_midpoint(&self, f: usize) -> [f64; 2] {
        let vs = &self.faces[f].vertices;
        let mut mid = [0.0, 0.0];
        for &v in vs {
            mid[0] += self.vertices[v][0];
            mid[1] += self.vertices[v][1];
        }
        mid[0] /= vs.len() as f64;
        mid[1] /= vs.len() as f64;
        mid
    }

    /// Re-assigns boundary tags from face midpoints; interior faces are
    /// untouched.
    pub fn retag_boundary(&mut self, tagger: impl Fn([f64; 2], BoundaryTag) -> BoundaryTag) {
        for f in 0..self.faces.len() {
            let mid = self.face_midpoint(f);
            if let FaceAdjacency::Boundary { cell, tag } = self.faces[f].adjacency {
                self.faces[f].adjacency =
                    FaceAdjacency::Boundary { cell, tag: tagger(mid, tag) };
            }
        }
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(move |&f| !self.faces[f].is_boundary())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(move |&f| self.faces[f].is_boundary())
    }

    /// Structural invariants: positive measures, unit outward normals, every
    /// interior face shared by exactly two distinct cells, total measure
    /// equal to the unit domain.
    pub fn audit(&self) -> Result<()> {
        let total: f64 = self.cell_measures.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Mesh(format!("cell measures sum to {total}, expected 1")));
        }
        for (c, m) in self.cell_measures.iter().enumerate() {
            if *m <= 0.0 {
                return Err(Error::Mesh(format!("cell {c} has non-positive measure")));
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let nn = (face.normal[0].powi(2) + face.normal[1].powi(2)).sqrt();
            if (nn - 1.0).abs() > 1e-12 {
                return Err(Error::Mesh(format!("face {f} normal is not unit length")));
            }
            if face.measure <= 0.0 {
                return Err(Error::Mesh(format!("face {f} has non-positive measure")));
            }
            let mid = self.face_midpoint(f);
            let owner = match face.adjacency {
                FaceAdjacency::Interior { plus, minus } => {
                    if plus == minus {
                        return Err(Error::Mesh(format!("face {f} lists one cell twice")));
                    }
                    // Normal must point from plus toward minus.
                    let cm = self.cell_centroid(minus);
                    let toward = face.normal[0] * (cm[0] - mid[0]) + face.normal[1] * (cm[1] - mid[1]);
                    if self.dim == 2 && toward <= 0.0 {
                        return Err(Error::Mesh(format!("face {f} normal points away from minus cell")));
                    }
                    plus
                }
                FaceAdjacency::Boundary { cell, .. } => cell,
            };
            let co = self.cell_centroid(owner);
            let outward = face.normal[0] * (mid[0] - co[0]) + face.normal[1] * (mid[1] - co[1]);
            if outward <= 0.0 {
                return Err(Error::Mesh(format!("face {f} normal is not outward from plus cell")));
            }
        }
        Ok(())
    }

    /// Plain-text dump: vertices, cells and faces with adjacency and tags.
    pub fn dump(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "mesh 1")?;
        writeln!(w, "dim {}", self.dim)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        writeln!(w, "cells {}", self.cells.len())?;
        for cell in &self.cells {
            let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", ids.join(" "))?;
        }
        writeln!(w, "faces {}", self.faces.len())?;
        for face in &self.faces {
            let ids: Vec<String> = face.vertices.iter().map(|v| v.to_string()).collect();
            match face.adjacency {
                FaceAdjacency::Interior { plus, minus } => {
                    writeln!(w, "{} interior {plus} {minus}", ids.join(" "))?;
                }
                FaceAdjacency::Boundary { cell, tag } => {
                    writeln!(w, "{} boundary {cell} {}", ids.join(" "), tag.as_str())?;
                }
            }
        }
        Ok(())
    }

    /// Parses the `dump` format and rebuilds geometry (measures, normals).
    pub fn load(r: &mut impl BufRead) -> Result<Mesh> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of mesh file".into()))?
                .map_err(Error::from)
        };
        let header = next()?;
        if header.trim() != "mesh 1" {
            return Err(Error::Parse(format!("bad mesh header `{header}`")));
        }
        let dim: usize = parse_field(&next()?, "dim")?;
        let nv: usize = parse_field(&next()?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next()?;
            let mut it = line.split_whitespace();
            let x: f64 = parse_num(it.next())?;
            let y: f64 = parse_num(it.next())?;
            vertices.push([x, y]);
        }
        let nc: usize = parse_field(&next()?, "cells")?;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let line = next()?;
            let ids: Result<Vec<usize>> = line.split_whitespace().map(|t| parse_num(Some(t))).collect();
            cells.push(ids?);
        }
        let nf: usize = parse_field(&next()?, "faces")?;
        let nvert_face = if dim == 1 { 1 } else { 2 };
        let mut tag_of: Vec<Option<(usize, BoundaryTag)>> = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = next()?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < nvert_face + 2 {
                return Err(Error::Parse(format!("short face line `{line}`")));
            }
            match toks[nvert_face] {
                "interior" => tag_of.push(None),
                "boundary" => {
                    let cell: usize = parse_num(Some(toks[nvert_face + 1]))?;
                    let tag = BoundaryTag::parse(toks[nvert_face + 2])?;
                    tag_of.push(Some((cell, tag)));
                }
                other => return Err(Error::Parse(format!("bad face kind `{other}`"))),
            }
        }
        if dim == 1 {
            // Rebuild from cells; apply stored tags by matching face order.
            let n = cells.len();
            let mut mesh = Mesh::unit_interval(n)?;
            mesh.vertices = vertices;
            let tags: Vec<(usize, BoundaryTag)> = tag_of.into_iter().flatten().collect();
            let mut ti = tags.into_iter();
            for face in mesh.faces.iter_mut() {
                if let FaceAdjacency::Boundary { cell, .. } = face.adjacency {
                    let (_, tag) =
                        ti.next().ok_or_else(|| Error::Parse("missing boundary tags".into()))?;
                    face.adjacency = FaceAdjacency::Boundary { cell, tag };
                }
            }
            mesh.audit()?;
            Ok(mesh)
        } else {
            // from_cells recovers adjacency deterministically (sorted edge
            // keys), so boundary tags can be replayed by midpoint lookup.
            let mut by_key: std::collections::BTreeMap<(usize, usize), BoundaryTag> =
                std::collections::BTreeMap::new();
            let mut idx = 0usize;
            let mut keys: Vec<(usize, usize)> = Vec::new();
            {
                let mut edge_owner: std::collections::BTreeMap<(usize, usize), usize> =
                    std::collections::BTreeMap::new();
                for cell in &cells {
                    for e in 0..3 {
                        let (a, b) = (cell[e], cell[(e + 1) % 3]);
                        let key = (a.min(b), a.max(b));
                        *edge_owner.entry(key).or_insert(0) += 1;
                    }
                }
                for (key, _) in edge_owner {
                    keys.push(key);
                }
            }
            for key in keys {
                if let Some(entry) = tag_of.get(idx) {
                    if let Some((_, tag)) = entry {
                        by_key.insert(key, *tag);
                    }
                }
                idx += 1;
            }
            Mesh::from_cells(2, vertices, cells, |_mid| BoundaryTag::DirichletP).map(|mut m| {
                for face in m.faces.iter_mut() {
                    if let FaceAdjacency::Boundary { cell, .. } = face.adjacency {
                        let key = (
                            face.vertices[0].min(face.vertices[1]),
                            face.vertices[0].max(face.vertices[1]),
                        );
                        if let Some(tag) = by_key.get(&key) {
                            face.adjacency = FaceAdjacency::Boundary { cell, tag: *tag };
                        }
                    }
                }
                m
            })
        }
    }
}

fn centroid_of(vertices: &[[f64; 2]], cell: &[usize]) -> [f64; 2] {
    let mut c = [0.0, 0.0];
    for &v in cell {
        c[0] += vertices[v][0];
        c[1] += vertices[v][1];
    }
    c[0] /= cell.len() as f64;
    c[1] /= cell.len() as f64;
    c
}

fn parse_field<T: std::str::FromStr>(line: &str, name: &str) -> Result<T> {
    let mut it = line.split_whitespace();
    let key = it.next().unwrap_or("");
    if key != name {
        return Err(Error::Parse(format!("expected `{name}`, found `{line}`")));
    }
    parse_num(it.next())
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>) -> Result<T> {
    tok.ok_or_else(|| Error::Parse("missing numeric field".into()))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("bad numeric field `{}`", tok.unwrap_or(""))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn interval_structure_smallest_meshes() {
        let m1 = Mesh::unit_interval(1).unwrap();
        assert_eq!(m1.n_cells(), 1);
        assert_eq!(m1.faces.len(), 2);
        assert_eq!(m1.interior_faces().count(), 0);

        let m2 = Mesh::unit_interval(2).unwrap();
        assert_eq!(m2.n_cells(), 2);
        assert_eq!(m2.interior_faces().count(), 1);
        assert_eq!(m2.boundary_faces().count(), 2);
        assert_abs_diff_eq!(m2.cell_measure(0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn interval_face_lengths() {
        let m = Mesh::unit_interval(16).unwrap();
        let h = 1.0 / 16.0;
        for f in m.interior_faces() {
            assert_abs_diff_eq!(m.face_characteristic_length(f), h, epsilon = 1e-14);
        }
        for f in m.boundary_faces() {
            assert_abs_diff_eq!(m.face_characteristic_length(f), h, epsilon = 1e-14);
        }
    }

    #[test]
    fn square_counts_and_measures() {
        for n in [1usize, 2, 4] {
            let m = Mesh::unit_square(n).unwrap();
            assert_eq!(m.n_cells(), 2 * n * n);
            let total: f64 = (0..m.n_cells()).map(|c| m.cell_measure(c)).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            assert_eq!(m.boundary_faces().count(), 4 * n);
        }
        // 2x2 grid: 4 diagonals + 4 internal grid edges.
        let m = Mesh::unit_square(2).unwrap();
        assert_eq!(m.interior_faces().count(), 8);
    }

    #[test]
    fn square_face_lengths_match_hand_values() {
        let n = 4;
        let h = 0.25;
        let m = Mesh::unit_square(n).unwrap();
        for f in 0..m.faces.len() {
            let face = &m.faces[f];
            let he = m.face_characteristic_length(f);
            let axis_aligned = (face.measure - h).abs() < 1e-12;
            match face.adjacency {
                FaceAdjacency::Interior { .. } => {
                    if axis_aligned {
                        assert_abs_diff_eq!(he, h / 2.0, epsilon = 1e-14);
                    } else {
                        assert_abs_diff_eq!(he, h / (2.0 * 2f64.sqrt()), epsilon = 1e-14);
                    }
                }
                FaceAdjacency::Boundary { .. } => {
                    assert!(axis_aligned);
                    assert_abs_diff_eq!(he, h / 2.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn face_length_bounded_by_neighbor_diameters() {
        for mesh in [Mesh::unit_square(3).unwrap(), Mesh::unit_square(6).unwrap()] {
            for f in 0..mesh.faces.len() {
                let he = mesh.face_characteristic_length(f);
                assert!(he > 0.0);
                let bound = match mesh.faces[f].adjacency {
                    FaceAdjacency::Interior { plus, minus } => {
                        mesh.cell_diameter(plus).max(mesh.cell_diameter(minus))
                    }
                    FaceAdjacency::Boundary { cell, .. } => mesh.cell_diameter(cell),
                };
                assert!(he <= bound + 1e-14);
            }
        }
    }

    #[test]
    fn refinement_halves_diameter() {
        let m1 = Mesh::unit_square(4).unwrap();
        let m2 = Mesh::unit_square(8).unwrap();
        assert_abs_diff_eq!(m2.max_cell_diameter(), 0.5 * m1.max_cell_diameter(), epsilon = 1e-13);
    }

    #[test]
    fn retag_partitions_boundary() {
        let mut m = Mesh::unit_interval(8).unwrap();
        m.retag_boundary(|mid, _| {
            if mid[0] < 0.5 {
                BoundaryTag::DirichletU
            } else {
                BoundaryTag::TractionT
            }
        });
        let tags: Vec<BoundaryTag> = m
            .boundary_faces()
            .map(|f| match m.faces[f].adjacency {
                FaceAdjacency::Boundary { tag, .. } => tag,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(tags, vec![BoundaryTag::DirichletU, BoundaryTag::TractionT]);
    }

    #[test]
    fn dump_load_round_trip() {
        for mesh in [Mesh::unit_interval(5).unwrap(), Mesh::unit_square(3).unwrap()] {
            let mut buf = Vec::new();
            mesh.dump(&mut buf).unwrap();
            let loaded = Mesh::load(&mut std::io::BufReader::new(buf.as_slice())).unwrap();
            assert_eq!(loaded.dim, mesh.dim);
            assert_eq!(loaded.cells, mesh.cells);
            assert_eq!(loaded.faces.len(), mesh.faces.len());
            for (a, b) in loaded.faces.iter().zip(&mesh.faces) {
                assert_eq!(a.vertices, b.vertices);
                assert_abs_diff_eq!(a.measure, b.measure, epsilon = 1e-15);
                assert_eq!(a.adjacency, b.adjacency);
            }
        }
    }

    #[test]
    fn load_rejects_garbage() {
        let text = "mesh 2\n";
        let err = Mesh::load(&mut std::io::BufReader::new(text.as_bytes()));
        assert!(err.is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn audits_pass_for_any_uniform_mesh(n in 1usize..12) {
            let mi = Mesh::unit_interval(n).unwrap();
            prop_assert!(mi.audit().is_ok());
            let ms = Mesh::unit_square(n).unwrap();
            prop_assert!(ms.audit().is_ok());
            prop_assert_eq!(ms.interior_faces().count() + ms.boundary_faces().count(), ms.faces.len());
        }
    }
}
