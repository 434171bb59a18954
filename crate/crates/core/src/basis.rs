//! One-dimensional Legendre-Gauss-Lobatto rules, derivative/interpolation
//! operators, and the tensor-product kernels used on hexahedral elements.
//!
//! All 3D fields use lexicographic node ordering with the first reference
//! direction fastest: node (i, j, k) is stored at `i + j*(N+1) + k*(N+1)^2`.
//! Every module in the crate shares this convention.

use crate::linalg::Mat;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("polynomial order must be at least 1")]
    OrderTooLow,
    #[error("interpolation source nodes must be distinct")]
    DuplicateNodes,
    #[error("field length {got} does not match expected {want}")]
    ShapeMismatch { got: usize, want: usize },
}

/// Legendre polynomial value and first derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // derivative from the recurrence (1-x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = if x.abs() < 1.0 {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    } else {
        // endpoint limit: P_n'(+-1) = (+-1)^{n-1} n(n+1)/2
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        s * n as f64 * (n as f64 + 1.0) / 2.0
    };
    (p1, dp)
}

/// Legendre-Gauss-Lobatto quadrature rule on [-1, 1].
///
/// Nodes are the roots of (1 - x^2) P_N'(x); the rule integrates polynomials
/// of degree 2N-1 exactly.
#[derive(Debug, Clone)]
pub struct LglRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn lgl_rule(order: usize) -> Result<LglRule, BasisError> {
    if order < 1 {
        return Err(BasisError::OrderTooLow);
    }
    let n = order;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for k in 1..n {
        // Chebyshev-Lobatto initial guess, refined by Newton on P_N'.
        let mut x = -(std::f64::consts::PI * k as f64 / n as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            // P_N'' from the Legendre ODE
            let d2p = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[k] = x;
    }
    // enforce exact symmetry of the computed interior nodes
    for k in 1..n {
        if 2 * k < n {
            let s = 0.5 * (nodes[k] - nodes[n - k]);
            nodes[k] = s;
            nodes[n - k] = -s;
        } else if 2 * k == n {
            nodes[k] = 0.0;
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n, x);
            2.0 / ((n * (n + 1)) as f64 * p * p)
        })
        .collect();
    Ok(LglRule {
        order,
        nodes,
        weights,
    })
}

/// Gauss-Legendre rule with `npts` points (degree 2*npts - 1 exact).
///
/// Used to assemble exact mass matrices; the solver itself collocates on LGL.
pub fn gauss_rule(npts: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    for i in 0..npts {
        let mut x =
            (std::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * npts as f64 + 2.0)).cos();
        x = -x;
        for _ in 0..100 {
            let (p, dp) = legendre(npts, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(npts, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Lagrange interpolation matrix from values at `src` nodes to values at
/// `dst` points. Exact on polynomials up to the source degree.
pub fn interp_matrix(src: &[f64], dst: &[f64]) -> Result<Mat, BasisError> {
    let n = src.len();
    for i in 0..n {
        for j in i + 1..n {
            if src[i] == src[j] {
                return Err(BasisError::DuplicateNodes);
            }
        }
    }
    let mut m = Mat::zeros(dst.len(), n);
    for (r, &x) in dst.iter().enumerate() {
        for j in 0..n {
            let mut v = 1.0;
            for k in 0..n {
                if k != j {
                    v *= (x - src[k]) / (src[j] - src[k]);
                }
            }
            m[(r, j)] = v;
        }
    }
    Ok(m)
}

/// Vandermonde matrix of Legendre polynomials P_0..P_N at the given nodes.
pub fn legendre_vandermonde(nodes: &[f64]) -> Mat {
    let n = nodes.len();
    let mut v = Mat::zeros(n, n);
    for (i, &x) in nodes.iter().enumerate() {
        for j in 0..n {
            v[(i, j)] = legendre(j, x).0;
        }
    }
    v
}

/// Nodal operator that removes the highest Legendre mode: the exact 1D
/// L2 projection from degree N to degree N-1 evaluated at the same nodes.
pub fn degree_lower_matrix(nodes: &[f64]) -> Mat {
    let n = nodes.len();
    let v = legendre_vandermonde(nodes);
    let vinv = v.inverse();
    let mut trunc = Mat::identity(n);
    trunc[(n - 1, n - 1)] = 0.0;
    v.matmul(&trunc).matmul(&vinv)
}

/// 1D nodal basis: LGL rule plus the Lagrange derivative matrix.
///
/// The pair (W, D) satisfies the summation-by-parts identity
/// `W D + D^T W = e_N e_N^T - e_0 e_0^T`.
#[derive(Debug, Clone)]
pub struct Basis1d {
    pub rule: LglRule,
    pub diff: Mat,
    pub diff_t: Mat,
}

pub fn diff_matrix(rule: &LglRule) -> Basis1d {
    let n = rule.order + 1;
    let x = &rule.nodes;
    // barycentric weights
    let mut lam = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                lam[i] *= x[i] - x[j];
            }
        }
        lam[i] = 1.0 / lam[i];
    }
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                d[(i, j)] = (lam[j] / lam[i]) / (x[i] - x[j]);
                s += d[(i, j)];
            }
        }
        d[(i, i)] = -s;
    }
    let dt = d.transpose();
    Basis1d {
        rule: rule.clone(),
        diff: d,
        diff_t: dt,
    }
}

impl Basis1d {
    /// Max-norm residual of the summation-by-parts identity.
    pub fn sbp_residual(&self) -> f64 {
        let n = self.rule.order + 1;
        let wd = self.diff.scale_rows(&self.rule.weights);
        let mut r = wd.add(&wd.transpose());
        r[(n - 1, n - 1)] -= 1.0;
        r[(0, 0)] += 1.0;
        r.max_abs()
    }
}

/// Face numbering on the reference hexahedron:
/// faces 0/1 sit at r1 = -1/+1, faces 2/3 at r2 = -1/+1, faces 4/5 at r3 = -1/+1.
/// Face coordinates are the remaining reference directions in increasing
/// order, with the lower one fastest.
pub const NUM_FACES: usize = 6;

#[inline]
pub fn face_axis(face: usize) -> usize {
    face / 2
}

#[inline]
pub fn face_sign(face: usize) -> f64 {
    if face % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

/// The two face-tangential axes in increasing order.
#[inline]
pub fn face_tangents(face: usize) -> (usize, usize) {
    match face_axis(face) {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// 3D tensor-product operator bundle for one polynomial order.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    pub order: usize,
    pub basis: Basis1d,
    /// removes the highest Legendre mode along one direction
    pub degree_lower: Mat,
    /// volume quadrature weights w_i w_j w_k at every node
    pub vol_weights: Vec<f64>,
    /// face quadrature weights w_a w_b at every face node
    pub face_weights: Vec<f64>,
    /// volume node indices for each of the six faces
    face_nodes: [Vec<usize>; 6],
}

impl TensorBasis {
    pub fn new(order: usize) -> Result<Self, BasisError> {
        let rule = lgl_rule(order)?;
        let basis = diff_matrix(&rule);
        let degree_lower = degree_lower_matrix(&rule.nodes);
        let n = order + 1;
        let mut vol_weights = vec![0.0; n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    vol_weights[i + n * (j + n * k)] =
                        rule.weights[i] * rule.weights[j] * rule.weights[k];
                }
            }
        }
        let mut face_weights = vec![0.0; n * n];
        for b in 0..n {
            for a in 0..n {
                face_weights[a + n * b] = rule.weights[a] * rule.weights[b];
            }
        }
        let face_nodes = std::array::from_fn(|f| {
            let mut idx = Vec::with_capacity(n * n);
            let axis = face_axis(f);
            let pos = if f % 2 == 0 { 0 } else { order };
            for b in 0..n {
                for a in 0..n {
                    let mut c = [0usize; 3];
                    let (ta, tb) = face_tangents(f);
                    c[axis] = pos;
                    c[ta] = a;
                    c[tb] = b;
                    idx.push(c[0] + n * (c[1] + n * c[2]));
                }
            }
            idx
        });
        Ok(TensorBasis {
            order,
            basis,
            degree_lower,
            vol_weights,
            face_weights,
            face_nodes,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.order + 1
    }

    #[inline]
    pub fn vol_len(&self) -> usize {
        let n = self.n();
        n * n * n
    }

    #[inline]
    pub fn face_len(&self) -> usize {
        let n = self.n();
        n * n
    }

    #[inline]
    pub fn face_node_ids(&self, face: usize) -> &[usize] {
        &self.face_nodes[face]
    }

    /// Volume node indices along one element edge (see `mesh::edge_axes` for
    /// the numbering).
    pub fn edge_node_ids(&self, edge: u8) -> Vec<usize> {
        let n = self.n();
        let d = (edge / 4) as usize;
        let (u, v) = match d {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let su = ((edge % 4) & 1) as usize * (n - 1);
        let sv = ((edge % 4) >> 1) as usize * (n - 1);
        (0..n)
            .map(|i| {
                let mut c = [0usize; 3];
                c[d] = i;
                c[u] = su;
                c[v] = sv;
                c[0] + n * (c[1] + n * c[2])
            })
            .collect()
    }

    /// Restrict a volume field to face values (gather).
    pub fn face_restrict(&self, face: usize, vol: &[f64], out: &mut [f64]) {
        for (o, &id) in out.iter_mut().zip(&self.face_nodes[face]) {
            *o = vol[id];
        }
    }

    /// Accumulate face values into a volume field (scatter-add, L^f transpose).
    pub fn face_scatter_add(&self, face: usize, fv: &[f64], vol: &mut [f64]) {
        for (v, &id) in fv.iter().zip(&self.face_nodes[face]) {
            vol[id] += v;
        }
    }

    /// Apply a 1D operator along reference direction `dir` of a volume field.
    pub fn apply_dir(&self, dir: usize, op: &Mat, src: &[f64], dst: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(src.len(), n * n * n);
        debug_assert_eq!(dst.len(), n * n * n);
        debug_assert_eq!((op.rows, op.cols), (n, n));
        let m = &op.data;
        match dir {
            0 => {
                for fib in 0..n * n {
                    let s = &src[fib * n..(fib + 1) * n];
                    let d = &mut dst[fib * n..(fib + 1) * n];
                    for i in 0..n {
                        let row = &m[i * n..(i + 1) * n];
                        let mut acc = 0.0;
                        for p in 0..n {
                            acc += row[p] * s[p];
                        }
                        d[i] = acc;
                    }
                }
            }
            1 => {
                for k in 0..n {
                    let base = k * n * n;
                    for j in 0..n {
                        let d = &mut dst[base + j * n..base + (j + 1) * n];
                        d.fill(0.0);
                        let row = &m[j * n..(j + 1) * n];
                        for p in 0..n {
                            let c = row[p];
                            let s = &src[base + p * n..base + (p + 1) * n];
                            for i in 0..n {
                                d[i] += c * s[i];
                            }
                        }
                    }
                }
            }
            2 => {
                let plane = n * n;
                for k in 0..n {
                    let d = &mut dst[k * plane..(k + 1) * plane];
                    d.fill(0.0);
                    let row = &m[k * n..(k + 1) * n];
                    for p in 0..n {
                        let c = row[p];
                        let s = &src[p * plane..(p + 1) * plane];
                        for i in 0..plane {
                            d[i] += c * s[i];
                        }
                    }
                }
            }
            _ => panic!("direction out of range"),
        }
    }

    /// Apply `ops[d]` along direction d for all three directions
    /// (the Kronecker product ops[2] x ops[1] x ops[0]) without forming it.
    pub fn apply_tensor(
        &self,
        ops: [Option<&Mat>; 3],
        field: &[f64],
    ) -> Result<Vec<f64>, BasisError> {
        if field.len() != self.vol_len() {
            return Err(BasisError::ShapeMismatch {
                got: field.len(),
                want: self.vol_len(),
            });
        }
        let mut cur = field.to_vec();
        let mut tmp = vec![0.0; field.len()];
        for d in 0..3 {
            if let Some(op) = ops[d] {
                self.apply_dir(d, op, &cur, &mut tmp);
                std::mem::swap(&mut cur, &mut tmp);
            }
        }
        Ok(cur)
    }

    /// Derivative along reference direction `dir`.
    pub fn diff_dir(&self, dir: usize, src: &[f64], dst: &mut [f64]) {
        self.apply_dir(dir, &self.basis.diff, src, dst);
    }

    /// Transposed derivative along reference direction `dir`.
    pub fn diff_dir_t(&self, dir: usize, src: &[f64], dst: &mut [f64]) {
        self.apply_dir(dir, &self.basis.diff_t, src, dst);
    }

    /// Apply a 1D operator along the first face coordinate.
    pub fn apply_face_a(&self, op: &Mat, src: &[f64], dst: &mut [f64]) {
        let n = self.n();
        let m = &op.data;
        for b in 0..n {
            let s = &src[b * n..(b + 1) * n];
            let d = &mut dst[b * n..(b + 1) * n];
            for a in 0..n {
                let row = &m[a * n..(a + 1) * n];
                let mut acc = 0.0;
                for p in 0..n {
                    acc += row[p] * s[p];
                }
                d[a] = acc;
            }
        }
    }

    /// Apply a 1D operator along the second face coordinate.
    pub fn apply_face_b(&self, op: &Mat, src: &[f64], dst: &mut [f64]) {
        let n = self.n();
        let m = &op.data;
        for b in 0..n {
            let d = &mut dst[b * n..(b + 1) * n];
            d.fill(0.0);
            let row = &m[b * n..(b + 1) * n];
            for p in 0..n {
                let c = row[p];
                let s = &src[p * n..(p + 1) * n];
                for a in 0..n {
                    d[a] += c * s[a];
                }
            }
        }
    }
}

/// Face orientation codes: the dihedral group of the square encoded as
/// `swap*4 + flip_b*2 + flip_a`. Code 0 is the identity. `apply` maps data
/// indexed by face coordinates to data indexed by mortar coordinates.
pub mod orientation {
    pub const IDENTITY: u8 = 0;
    pub const COUNT: u8 = 8;

    #[inline]
    fn map(code: u8, n: usize, a: usize, b: usize) -> (usize, usize) {
        let (mut a, mut b) = (a, b);
        if code & 1 != 0 {
            a = n - 1 - a;
        }
        if code & 2 != 0 {
            b = n - 1 - b;
        }
        if code & 4 != 0 {
            std::mem::swap(&mut a, &mut b);
        }
        (a, b)
    }

    /// dst (mortar indexing) from src (face indexing).
    pub fn apply(code: u8, n: usize, src: &[f64], dst: &mut [f64]) {
        if code == IDENTITY {
            dst.copy_from_slice(src);
            return;
        }
        for bm in 0..n {
            for am in 0..n {
                let (af, bf) = map(code, n, am, bm);
                dst[am + n * bm] = src[af + n * bf];
            }
        }
    }

    /// Code of the inverse permutation.
    pub fn inverse(code: u8) -> u8 {
        if code & 4 == 0 {
            code
        } else {
            // swap first on the way back: conjugate the flips
            4 | ((code & 1) << 1) | ((code & 2) >> 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn lgl_rejects_order_zero() {
        assert!(lgl_rule(0).is_err());
    }

    #[test]
    fn lgl_order_one_is_trapezoid() {
        let r = lgl_rule(1).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 1.0]);
        assert_eq!(r.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn lgl_order_two_from_moment_conditions() {
        // independent oracle: the 3-point rule must integrate 1, x, x^2, x^3
        // exactly, which pins the weights to {1/3, 4/3, 1/3} at {-1, 0, 1}.
        let r = lgl_rule(2).unwrap();
        for (k, exact) in [(0, 2.0), (1, 0.0), (2, 2.0 / 3.0), (3, 0.0)] {
            let q: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            assert!((q - exact).abs() < 1e-14, "moment {k}");
        }
        assert!((r.nodes[1]).abs() < 1e-15);
        assert!((r.weights[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((r.weights[1] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn lgl_order_four_weight_sum_and_parity() {
        let r = lgl_rule(4).unwrap();
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // exact through degree 2N-1 = 7; the first even monomial above that
        // is under-integrated
        let q6: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(6))
            .sum();
        assert!((q6 - 2.0 / 7.0).abs() < 1e-14);
        let q8: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((q8 - 2.0 / 9.0).abs() > 1e-4, "x^8 must be under-integrated");
        let q7: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert!(q7.abs() < 1e-15, "odd moments vanish by symmetry");
    }

    #[test]
    fn rule_invariants_hold_up_to_order_eight() {
        for n in 1..=8 {
            let r = lgl_rule(n).unwrap();
            assert_eq!(r.nodes[0], -1.0);
            assert_eq!(r.nodes[n], 1.0);
            for i in 0..n {
                assert!(r.nodes[i] < r.nodes[i + 1]);
            }
            for i in 0..=n {
                assert!(r.weights[i] > 0.0);
                assert!((r.weights[i] - r.weights[n - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadrature_exact_to_degree_2n_minus_1() {
        let mut rng = Rng::new(7);
        for n in 2..=7 {
            let r = lgl_rule(n).unwrap();
            // random p, q with deg(p*q) <= 2N-1
            let dp = n;
            let dq = n - 1;
            let p: Vec<f64> = (0..=dp).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let q: Vec<f64> = (0..=dq).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let eval = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            let quad: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(&x, &w)| w * eval(&p, x) * eval(&q, x))
                .sum();
            // exact integral of the product via coefficient convolution
            let mut prod = vec![0.0; dp + dq + 1];
            for (i, &a) in p.iter().enumerate() {
                for (j, &b) in q.iter().enumerate() {
                    prod[i + j] += a * b;
                }
            }
            let exact: f64 = prod
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if k % 2 == 0 {
                        2.0 * c / (k as f64 + 1.0)
                    } else {
                        0.0
                    }
                })
                .sum();
            assert!(
                (quad - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                "order {n}"
            );
        }
    }

    #[test]
    fn gauss_rule_is_exact() {
        let (x, w) = gauss_rule(5);
        for k in 0..=9 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn diff_kills_constants_and_matches_order_one() {
        for n in 1..=8 {
            let b = diff_matrix(&lgl_rule(n).unwrap());
            let ones = vec![1.0; n + 1];
            let d = b.diff.matvec(&ones);
            for v in d {
                assert!(v.abs() < 1e-13);
            }
        }
        let b = diff_matrix(&lgl_rule(1).unwrap());
        for (i, j, want) in [(0, 0, -0.5), (0, 1, 0.5), (1, 0, -0.5), (1, 1, 0.5)] {
            assert!((b.diff[(i, j)] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn diff_exact_on_monomials() {
        for n in 2..=6 {
            let b = diff_matrix(&lgl_rule(n).unwrap());
            for k in 0..=n {
                let f: Vec<f64> = b.rule.nodes.iter().map(|x| x.powi(k as i32)).collect();
                let df = b.diff.matvec(&f);
                for (x, d) in b.rule.nodes.iter().zip(df) {
                    let want = if k == 0 {
                        0.0
                    } else {
                        k as f64 * x.powi(k as i32 - 1)
                    };
                    assert!((d - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sbp_identity_orders_one_through_eight() {
        for n in 1..=8 {
            let b = diff_matrix(&lgl_rule(n).unwrap());
            assert!(b.sbp_residual() <= 1e-13, "order {n}");
        }
    }

    #[test]
    fn interp_identity_and_half_interval() {
        let r = lgl_rule(3).unwrap();
        let id = interp_matrix(&r.nodes, &r.nodes).unwrap();
        assert!(id.sub(&Mat::identity(4)).max_abs() == 0.0);

        let bottom: Vec<f64> = r.nodes.iter().map(|x| (x - 1.0) / 2.0).collect();
        let ib = interp_matrix(&r.nodes, &bottom).unwrap();
        for i in 0..4 {
            let s: f64 = (0..4).map(|j| ib[(i, j)]).sum();
            assert!((s - 1.0).abs() < 1e-14, "rows act as identity on constants");
        }
        // exact on x itself
        let fx = ib.matvec(&r.nodes);
        for (got, want) in fx.iter().zip(&bottom) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn interp_rejects_duplicate_nodes() {
        assert!(interp_matrix(&[0.0, 0.0, 1.0], &[0.5]).is_err());
    }

    #[test]
    fn degree_lower_truncates_top_mode_only() {
        let r = lgl_rule(4).unwrap();
        let p = degree_lower_matrix(&r.nodes);
        // leaves degree N-1 data alone
        let f: Vec<f64> = r.nodes.iter().map(|x| 1.0 + x + x * x * x).collect();
        let pf = p.matvec(&f);
        for (a, b) in pf.iter().zip(&f) {
            assert!((a - b).abs() < 1e-13);
        }
        // annihilates the top Legendre mode
        let top: Vec<f64> = r.nodes.iter().map(|&x| legendre(4, x).0).collect();
        let pt = p.matvec(&top);
        for v in pt {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn tensor_apply_identity_and_coordinate_derivative() {
        let tb = TensorBasis::new(3).unwrap();
        let n = tb.n();
        let mut rng = Rng::new(3);
        let f: Vec<f64> = (0..tb.vol_len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let same = tb.apply_tensor([None, None, None], &f).unwrap();
        assert_eq!(same, f);

        // D along r1 applied to the nodal r1 coordinate gives ones
        let mut r1 = vec![0.0; tb.vol_len()];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    r1[i + n * (j + n * k)] = tb.basis.rule.nodes[i];
                }
            }
        }
        let d = tb.apply_tensor([Some(&tb.basis.diff), None, None], &r1).unwrap();
        for v in d {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tensor_apply_matches_dense_kronecker() {
        let tb = TensorBasis::new(2).unwrap();
        let n = tb.n();
        let v = tb.vol_len();
        let mut rng = Rng::new(11);
        let mk = |rng: &mut Rng| {
            let mut m = Mat::zeros(n, n);
            for x in m.data.iter_mut() {
                *x = rng.uniform(-1.0, 1.0);
            }
            m
        };
        let (a1, a2, a3) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
        let f: Vec<f64> = (0..v).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let fast = tb.apply_tensor([Some(&a1), Some(&a2), Some(&a3)], &f).unwrap();

        // dense 27x27 Kronecker product oracle: a3 (x) a2 (x) a1
        let mut dense = Mat::zeros(v, v);
        for r3 in 0..n {
            for r2 in 0..n {
                for r1 in 0..n {
                    for c3 in 0..n {
                        for c2 in 0..n {
                            for c1 in 0..n {
                                let r = r1 + n * (r2 + n * r3);
                                let c = c1 + n * (c2 + n * c3);
                                dense[(r, c)] = a3[(r3, c3)] * a2[(r2, c2)] * a1[(r1, c1)];
                            }
                        }
                    }
                }
            }
        }
        let slow = dense.matvec(&f);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_apply_rejects_bad_shape() {
        let tb = TensorBasis::new(2).unwrap();
        assert!(tb.apply_tensor([None, None, None], &[0.0; 5]).is_err());
    }

    #[test]
    fn volume_derivatives_commute() {
        let tb = TensorBasis::new(4).unwrap();
        let mut rng = Rng::new(17);
        let f: Vec<f64> = (0..tb.vol_len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut a = vec![0.0; f.len()];
        let mut b = vec![0.0; f.len()];
        let mut ab = vec![0.0; f.len()];
        let mut ba = vec![0.0; f.len()];
        for d1 in 0..3 {
            for d2 in 0..3 {
                tb.diff_dir(d1, &f, &mut a);
                tb.diff_dir(d2, &a, &mut ab);
                tb.diff_dir(d2, &f, &mut b);
                tb.diff_dir(d1, &b, &mut ba);
                for (x, y) in ab.iter().zip(&ba) {
                    assert!((x - y).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn face_restriction_commutes_with_tangential_derivative() {
        let tb = TensorBasis::new(3).unwrap();
        let n = tb.n();
        let mut rng = Rng::new(23);
        let f: Vec<f64> = (0..tb.vol_len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut df = vec![0.0; f.len()];
        let mut fa = vec![0.0; tb.face_len()];
        let mut fb = vec![0.0; tb.face_len()];
        let mut tmp = vec![0.0; tb.face_len()];
        for face in 0..NUM_FACES {
            let (ta, tb_ax) = face_tangents(face);
            for (fd, axis) in [(0usize, ta), (1usize, tb_ax)] {
                tb.diff_dir(axis, &f, &mut df);
                tb.face_restrict(face, &df, &mut fa);
                tb.face_restrict(face, &f, &mut tmp);
                if fd == 0 {
                    tb.apply_face_a(&tb.basis.diff, &tmp, &mut fb);
                } else {
                    tb.apply_face_b(&tb.basis.diff, &tmp, &mut fb);
                }
                for (x, y) in fa.iter().zip(&fb) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
        // L^f selects exactly (N+1)^2 distinct nodes
        for face in 0..NUM_FACES {
            let ids = tb.face_node_ids(face);
            assert_eq!(ids.len(), n * n);
            let mut sorted = ids.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), n * n);
        }
    }

    #[test]
    fn orientation_codes_invert() {
        let n = 4;
        let mut rng = Rng::new(5);
        let src: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut fwd = vec![0.0; n * n];
        let mut back = vec![0.0; n * n];
        for code in 0..orientation::COUNT {
            orientation::apply(code, n, &src, &mut fwd);
            orientation::apply(orientation::inverse(code), n, &fwd, &mut back);
            assert_eq!(back, src, "code {code}");
        }
    }
}
