//! Adapted hexahedral mesh topology and mortar decomposition.
//!
//! Meshes are structured: a base grid of cells over a box, where each cell is
//! either kept (level 0) or subdivided once into 8 children (level 1). This
//! covers every 2:1 nonconforming case (hanging faces and hanging edges)
//! without a general octree. Levels never differ by more than one, so 2:1
//! balance holds by construction; a validation pass guards the invariant
//! anyway.
//!
//! Mortar elements tile every element boundary exactly once. Conforming
//! interfaces carry a single mortar. A nonconforming interface carries either
//! one full-side mortar (conforming to the large face, four hanging plus-side
//! faces) or four split-side mortars (each conforming to one hanging face,
//! plus side a quadrant of the large face).

use crate::basis::face_tangents;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("base grid dimensions must all be at least 1")]
    EmptyBase,
    #[error("refined cell index {0:?} outside the base grid")]
    RefinedOutOfRange([usize; 3]),
    #[error("mesh violates 2:1 balance")]
    Unbalanced,
}

/// Structured mesh description: base grid, once-refined cells, periodicity,
/// and the physical box covered by the base coordinates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshSpec {
    pub base: [usize; 3],
    #[serde(default)]
    pub refined: Vec<[usize; 3]>,
    pub periodic: [bool; 3],
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl MeshSpec {
    pub fn unit_box(base: [usize; 3], refined: Vec<[usize; 3]>, periodic: [bool; 3]) -> Self {
        MeshSpec {
            base,
            refined,
            periodic,
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }

    /// Uniform bisection: every element splits into 8. The result is again a
    /// base-grid-plus-flags mesh on the doubled grid.
    pub fn bisect(&self) -> MeshSpec {
        let base = [self.base[0] * 2, self.base[1] * 2, self.base[2] * 2];
        let mut refined = Vec::with_capacity(self.refined.len() * 8);
        for c in &self.refined {
            for dz in 0..2 {
                for dy in 0..2 {
                    for dx in 0..2 {
                        refined.push([2 * c[0] + dx, 2 * c[1] + dy, 2 * c[2] + dz]);
                    }
                }
            }
        }
        MeshSpec {
            base,
            refined,
            periodic: self.periodic,
            lo: self.lo,
            hi: self.hi,
        }
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.hi[0] - self.lo[0],
            self.hi[1] - self.lo[1],
            self.hi[2] - self.lo[2],
        ]
    }
}

/// One hexahedral element: refinement level and integer grid coordinates at
/// that level (cell `idx[d]` of `base[d] << level`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub level: u8,
    pub idx: [usize; 3],
}

/// What sits across a given face of an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaceNeighbor {
    Boundary,
    Conforming {
        elem: usize,
        face: u8,
    },
    /// Neighbor one level coarser; our face covers `quadrant` of its face.
    /// `shift` is -1/0/+1 per axis: coordinates from the coarse chart map
    /// into ours by adding `shift * extent` (nonzero only across a periodic
    /// wrap, and only along the face normal).
    Coarse {
        elem: usize,
        face: u8,
        quadrant: u8,
        shift: [i8; 3],
    },
    /// Neighbor one level finer; children listed by quadrant of our face.
    Refined { children: [(usize, u8); 4] },
}

/// A fine-element edge lying on the full edge of a coarser element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePiece {
    pub elem: usize,
    pub edge: u8,
    /// which half of the owner edge this piece covers (0 = lower)
    pub half: u8,
    /// owner chart -> piece chart, as multiples of the domain extent
    pub shift: [i8; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HangingEdge {
    pub owner: usize,
    pub edge: u8,
    pub pieces: Vec<EdgePiece>,
}

#[derive(Debug, Clone)]
enum CellKind {
    Coarse(usize),
    Refined([usize; 8]),
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: MeshSpec,
    pub elements: Vec<Element>,
    pub neighbors: Vec<[FaceNeighbor; 6]>,
    pub hanging_edges: Vec<HangingEdge>,
}

/// Edge numbering: `edge = axis*4 + s_u + 2*s_v` where (u, v) are the other
/// two axes in increasing order and s_u, s_v pick the -1/+1 corner.
#[inline]
pub fn edge_axes(edge: u8) -> (usize, usize, usize) {
    let d = (edge / 4) as usize;
    let (u, v) = match d {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    (d, u, v)
}

#[inline]
pub fn edge_corner(edge: u8) -> (usize, usize) {
    (((edge % 4) & 1) as usize, ((edge % 4) >> 1) as usize)
}

#[inline]
fn opposite(face: u8) -> u8 {
    face ^ 1
}

pub fn build_adapted_box(spec: &MeshSpec) -> Result<Mesh, MeshError> {
    if spec.base.iter().any(|&n| n == 0) {
        return Err(MeshError::EmptyBase);
    }
    let mut spec = spec.clone();
    spec.refined.sort_unstable();
    spec.refined.dedup();
    for c in &spec.refined {
        if (0..3).any(|d| c[d] >= spec.base[d]) {
            return Err(MeshError::RefinedOutOfRange(*c));
        }
    }
    let nb = spec.base;
    let ncells = nb[0] * nb[1] * nb[2];
    let cell_id = |c: [usize; 3]| c[0] + nb[0] * (c[1] + nb[1] * c[2]);
    let mut refined_flag = vec![false; ncells];
    for c in &spec.refined {
        refined_flag[cell_id(*c)] = true;
    }

    let mut elements = Vec::new();
    let mut cells: Vec<Option<CellKind>> = vec![None; ncells];
    for cz in 0..nb[2] {
        for cy in 0..nb[1] {
            for cx in 0..nb[0] {
                let c = [cx, cy, cz];
                if refined_flag[cell_id(c)] {
                    let mut ch = [0usize; 8];
                    for dz in 0..2 {
                        for dy in 0..2 {
                            for dx in 0..2 {
                                ch[dx + 2 * dy + 4 * dz] = elements.len();
                                elements.push(Element {
                                    level: 1,
                                    idx: [2 * cx + dx, 2 * cy + dy, 2 * cz + dz],
                                });
                            }
                        }
                    }
                    cells[cell_id(c)] = Some(CellKind::Refined(ch));
                } else {
                    cells[cell_id(c)] = Some(CellKind::Coarse(elements.len()));
                    elements.push(Element {
                        level: 0,
                        idx: c,
                    });
                }
            }
        }
    }

    // step one cell along `axis`; None at a non-periodic boundary
    let step = |idx: usize, dims: usize, dir: isize, periodic: bool| -> Option<(usize, bool)> {
        let next = idx as isize + dir;
        if next < 0 || next >= dims as isize {
            if periodic {
                Some((next.rem_euclid(dims as isize) as usize, true))
            } else {
                None
            }
        } else {
            Some((next as usize, false))
        }
    };

    let mut neighbors: Vec<[FaceNeighbor; 6]> = Vec::with_capacity(elements.len());
    for el in &elements {
        let mut nbrs = std::array::from_fn(|_| FaceNeighbor::Boundary);
        for f in 0..6u8 {
            let axis = (f / 2) as usize;
            let dir: isize = if f % 2 == 0 { -1 } else { 1 };
            let (ta, tb) = face_tangents(f as usize);
            nbrs[f as usize] = if el.level == 0 {
                match step(el.idx[axis], nb[axis], dir, spec.periodic[axis]) {
                    None => FaceNeighbor::Boundary,
                    Some((nc, _)) => {
                        let mut c = el.idx;
                        c[axis] = nc;
                        match cells[cell_id(c)].as_ref().unwrap() {
                            CellKind::Coarse(e) => FaceNeighbor::Conforming {
                                elem: *e,
                                face: opposite(f),
                            },
                            CellKind::Refined(ch) => {
                                // children on the side facing us
                                let side = if dir > 0 { 0 } else { 1 };
                                let children = std::array::from_fn(|q| {
                                    let (qa, qb) = (q & 1, q >> 1);
                                    let mut cc = [0usize; 3];
                                    cc[axis] = side;
                                    cc[ta] = qa;
                                    cc[tb] = qb;
                                    (ch[cc[0] + 2 * cc[1] + 4 * cc[2]], opposite(f))
                                });
                                FaceNeighbor::Refined { children }
                            }
                        }
                    }
                }
            } else {
                let g = nb[axis] * 2;
                match step(el.idx[axis], g, dir, spec.periodic[axis]) {
                    None => FaceNeighbor::Boundary,
                    Some((nf, wrapped)) => {
                        let mut fidx = el.idx;
                        fidx[axis] = nf;
                        let parent = [fidx[0] / 2, fidx[1] / 2, fidx[2] / 2];
                        match cells[cell_id(parent)].as_ref().unwrap() {
                            CellKind::Refined(ch) => FaceNeighbor::Conforming {
                                elem: ch[(fidx[0] & 1) + 2 * (fidx[1] & 1) + 4 * (fidx[2] & 1)],
                                face: opposite(f),
                            },
                            CellKind::Coarse(e) => {
                                let quadrant = ((el.idx[ta] & 1) + 2 * (el.idx[tb] & 1)) as u8;
                                let mut shift = [0i8; 3];
                                if wrapped {
                                    shift[axis] = dir as i8;
                                }
                                FaceNeighbor::Coarse {
                                    elem: *e,
                                    face: opposite(f),
                                    quadrant,
                                    shift,
                                }
                            }
                        }
                    }
                }
            };
        }
        neighbors.push(nbrs);
    }

    let hanging_edges = find_hanging_edges(&spec, &elements, &cells, &cell_id);

    let mesh = Mesh {
        spec,
        elements,
        neighbors,
        hanging_edges,
    };
    mesh.validate_balance()?;
    Ok(mesh)
}

fn find_hanging_edges(
    spec: &MeshSpec,
    elements: &[Element],
    cells: &[Option<CellKind>],
    cell_id: &dyn Fn([usize; 3]) -> usize,
) -> Vec<HangingEdge> {
    use std::collections::BTreeMap;
    let nb = spec.base;
    // keyed by (owner elem, owner edge id) to keep deterministic order
    let mut records: BTreeMap<(usize, u8), Vec<EdgePiece>> = BTreeMap::new();

    for (eid, el) in elements.iter().enumerate() {
        if el.level != 1 {
            continue;
        }
        for edge in 0..12u8 {
            let (d, u, v) = edge_axes(edge);
            let (su, sv) = edge_corner(edge);
            let tu = el.idx[u] + su;
            let tv = el.idx[v] + sv;
            if tu % 2 != 0 || tv % 2 != 0 {
                continue; // not on a base-grid line
            }
            let gu = nb[u] * 2;
            let gv = nb[v] * 2;
            let bd = el.idx[d] / 2;
            // base cells around the line (in base-grid units)
            let lu = tu / 2;
            let lv = tv / 2;
            let mut owner: Option<(usize, u8, [i8; 3])> = None;
            for cu in [lu as isize - 1, lu as isize] {
                for cv in [lv as isize - 1, lv as isize] {
                    // normalize with periodic wrap; skip cells outside the grid
                    let norm = |c: isize, n: usize, periodic: bool| -> Option<usize> {
                        if (0..n as isize).contains(&c) {
                            Some(c as usize)
                        } else if periodic {
                            Some(c.rem_euclid(n as isize) as usize)
                        } else {
                            None
                        }
                    };
                    let (Some(bu), Some(bv)) = (
                        norm(cu, nb[u], spec.periodic[u]),
                        norm(cv, nb[v], spec.periodic[v]),
                    ) else {
                        continue;
                    };
                    let mut base_c = [0usize; 3];
                    base_c[d] = bd;
                    base_c[u] = bu;
                    base_c[v] = bv;
                    if let Some(CellKind::Coarse(oe)) = cells[cell_id(base_c)].as_ref() {
                        // corner of the owner matching the line, and the chart
                        // shift from owner to a piece at (tu, tv)
                        let su_o = if (2 * bu) % gu == tu % gu { 0 } else { 1 };
                        let sv_o = if (2 * bv) % gv == tv % gv { 0 } else { 1 };
                        let line_u = 2 * bu + su_o * 2; // owner line in fine units
                        let line_v = 2 * bv + sv_o * 2;
                        let mut shift = [0i8; 3];
                        shift[u] = ((tu as isize - line_u as isize) / gu as isize) as i8;
                        shift[v] = ((tv as isize - line_v as isize) / gv as isize) as i8;
                        let oedge = (d * 4 + su_o + 2 * sv_o) as u8;
                        let cand = (*oe, oedge, shift);
                        if owner.map_or(true, |(cur, _, _)| *oe < cur) {
                            owner = Some(cand);
                        }
                    }
                }
            }
            if let Some((oe, oedge, shift)) = owner {
                records.entry((oe, oedge)).or_default().push(EdgePiece {
                    elem: eid,
                    edge,
                    half: (el.idx[d] & 1) as u8,
                    shift,
                });
            }
        }
    }

    records
        .into_iter()
        .map(|((owner, edge), pieces)| HangingEdge {
            owner,
            edge,
            pieces,
        })
        .collect()
}

impl Mesh {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Physical corner coordinates of an element's box (before any transform).
    pub fn element_box(&self, e: usize) -> ([f64; 3], [f64; 3]) {
        let el = &self.elements[e];
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for d in 0..3 {
            let cells = (self.spec.base[d] << el.level) as f64;
            let ext = self.spec.hi[d] - self.spec.lo[d];
            lo[d] = self.spec.lo[d] + ext * (el.idx[d] as f64) / cells;
            hi[d] = self.spec.lo[d] + ext * ((el.idx[d] + 1) as f64) / cells;
        }
        (lo, hi)
    }

    fn validate_balance(&self) -> Result<(), MeshError> {
        for nbrs in &self.neighbors {
            for nb in nbrs {
                match nb {
                    FaceNeighbor::Coarse { .. } | FaceNeighbor::Refined { .. } => {
                        // relations only ever connect adjacent levels here;
                        // a deeper hierarchy would need real propagation
                    }
                    _ => {}
                }
            }
        }
        let ok = self.elements.iter().all(|e| e.level <= 1);
        if ok {
            Ok(())
        } else {
            Err(MeshError::Unbalanced)
        }
    }

    pub fn summary(&self) -> MeshSummary {
        let mut conforming = 0usize;
        let mut nonconforming = 0usize;
        let mut boundary = 0usize;
        for (e, nbrs) in self.neighbors.iter().enumerate() {
            for (f, nb) in nbrs.iter().enumerate() {
                match nb {
                    FaceNeighbor::Boundary => boundary += 1,
                    FaceNeighbor::Conforming { elem, face } => {
                        if (e, f as u8) <= (*elem, *face) {
                            conforming += 1;
                        }
                    }
                    FaceNeighbor::Refined { .. } => nonconforming += 1,
                    FaceNeighbor::Coarse { .. } => {}
                }
            }
        }
        MeshSummary {
            elements: self.num_elements(),
            refined_elements: self.elements.iter().filter(|e| e.level == 1).count(),
            conforming_interfaces: conforming,
            nonconforming_interfaces: nonconforming,
            boundary_faces: boundary,
            hanging_edges: self.hanging_edges.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MeshSummary {
    pub elements: usize,
    pub refined_elements: usize,
    pub conforming_interfaces: usize,
    pub nonconforming_interfaces: usize,
    pub boundary_faces: usize,
    pub hanging_edges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MortarKind {
    Full,
    Split,
}

/// One side of a mortar. `quadrant`, when present, locates the hanging face
/// within the full face (and selects the half-interval operators).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MortarSide {
    pub elem: usize,
    pub face: u8,
    pub quadrant: Option<u8>,
    pub orientation: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mortar {
    pub minus: MortarSide,
    /// empty for physical-boundary mortars
    pub plus: Vec<MortarSide>,
}

impl Mortar {
    pub fn is_boundary(&self) -> bool {
        self.plus.is_empty()
    }

    pub fn sides(&self) -> impl Iterator<Item = (&MortarSide, bool)> {
        std::iter::once((&self.minus, false)).chain(self.plus.iter().map(|s| (s, true)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MortarSet {
    pub kind: MortarKind,
    pub mortars: Vec<Mortar>,
}

pub fn build_mortars(mesh: &Mesh, kind: MortarKind) -> MortarSet {
    let mut mortars = Vec::new();
    let side = |elem: usize, face: u8, quadrant: Option<u8>| MortarSide {
        elem,
        face,
        quadrant,
        orientation: crate::basis::orientation::IDENTITY,
    };
    for (e, nbrs) in mesh.neighbors.iter().enumerate() {
        for (f, nb) in nbrs.iter().enumerate() {
            let f = f as u8;
            match nb {
                FaceNeighbor::Boundary => mortars.push(Mortar {
                    minus: side(e, f, None),
                    plus: vec![],
                }),
                FaceNeighbor::Conforming { elem, face } => {
                    // visit once; the smaller (elem, face) is the minus side
                    if (e, f) < (*elem, *face) {
                        mortars.push(Mortar {
                            minus: side(e, f, None),
                            plus: vec![side(*elem, *face, None)],
                        });
                    }
                }
                FaceNeighbor::Refined { children } => {
                    if kind == MortarKind::Full {
                        mortars.push(Mortar {
                            minus: side(e, f, None),
                            plus: children
                                .iter()
                                .enumerate()
                                .map(|(q, (ce, cf))| side(*ce, *cf, Some(q as u8)))
                                .collect(),
                        });
                    }
                }
                FaceNeighbor::Coarse {
                    elem,
                    face,
                    quadrant,
                    ..
                } => {
                    if kind == MortarKind::Split {
                        mortars.push(Mortar {
                            minus: side(e, f, None),
                            plus: vec![side(*elem, *face, Some(*quadrant))],
                        });
                    }
                }
            }
        }
    }
    MortarSet { kind, mortars }
}
