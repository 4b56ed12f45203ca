//! Operator matrices derived from a quiver: gradient, Kirchhoff, one-form,
//! signless and Hodge Laplacians, plus the connection matrix and its exact
//! Green inverse for simple graphs.
//!
//! Everything here is exact integer arithmetic; floating point only enters
//! in the spectral layer.

use ndarray::Array2;
use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::quiver::Quiver;

/// Gradient matrix `F` (m x n): row `e` carries `+1` at the tail and `-1`
/// at the head of edge `e`; a loop contributes a single `+1`.
pub fn gradient(q: &Quiver) -> Array2<i64> {
    let mut f = Array2::zeros((q.m(), q.n()));
    for (row, &(a, b)) in q.edges().iter().enumerate() {
        f[[row, a]] += 1;
        if a != b {
            f[[row, b]] -= 1;
        }
    }
    f
}

/// Kirchhoff matrix `K = F^T F`, accumulated edge by edge.
pub fn kirchhoff(q: &Quiver) -> Array2<i64> {
    let mut k = Array2::zeros((q.n(), q.n()));
    for &(a, b) in q.edges() {
        if a == b {
            k[[a, a]] += 1;
        } else {
            k[[a, a]] += 1;
            k[[b, b]] += 1;
            k[[a, b]] -= 1;
            k[[b, a]] -= 1;
        }
    }
    k
}

/// One-form Laplacian `K' = F F^T` (m x m). Depends on the edge
/// orientations, unlike `K`; its spectrum does not.
pub fn one_form(q: &Quiver) -> Array2<i64> {
    let f = gradient(q);
    let m = q.m();
    // accumulate over vertices: only incident edge pairs contribute
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); q.n()];
    for (e, &(a, b)) in q.edges().iter().enumerate() {
        incident[a].push(e);
        if a != b {
            incident[b].push(e);
        }
    }
    let mut k1 = Array2::zeros((m, m));
    for (v, edges_at_v) in incident.iter().enumerate() {
        for &e in edges_at_v {
            for &e2 in edges_at_v {
                k1[[e, e2]] += f[[e, v]] * f[[e2, v]];
            }
        }
    }
    k1
}

/// Entry-wise absolute value; `|K| = D + A` is the signless Laplacian.
pub fn abs_matrix(m: &Array2<i64>) -> Array2<i64> {
    m.mapv(|x| x.abs())
}

/// Signless Laplacian `|K|`.
pub fn signless(q: &Quiver) -> Array2<i64> {
    abs_matrix(&kirchhoff(q))
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Array2<i64>, b: &Array2<i64>) -> Array2<i64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra + rb, ca + cb));
    for i in 0..ra {
        for j in 0..ca {
            out[[i, j]] = a[[i, j]];
        }
    }
    for i in 0..rb {
        for j in 0..cb {
            out[[ra + i, ca + j]] = b[[i, j]];
        }
    }
    out
}

/// All operator matrices derived from one quiver.
pub struct IncidencePack {
    pub n: usize,
    pub m: usize,
    /// Gradient, m x n.
    pub f: Array2<i64>,
    /// Kirchhoff `F^T F`, n x n.
    pub k: Array2<i64>,
    /// One-form Laplacian `F F^T`, m x m.
    pub k1: Array2<i64>,
    /// `|K|`.
    pub signless_k: Array2<i64>,
    /// `|K'|`.
    pub signless_k1: Array2<i64>,
    /// Hodge Laplacian `diag(K, K')`, (n+m) x (n+m).
    pub hodge: Array2<i64>,
    /// `diag(|K|, |K'|)`.
    pub signless_hodge: Array2<i64>,
}

pub fn incidence_pack(q: &Quiver) -> IncidencePack {
    let f = gradient(q);
    let k = kirchhoff(q);
    let k1 = one_form(q);
    let signless_k = abs_matrix(&k);
    let signless_k1 = abs_matrix(&k1);
    let hodge = block_diag(&k, &k1);
    let signless_hodge = block_diag(&signless_k, &signless_k1);
    IncidencePack {
        n: q.n(),
        m: q.m(),
        f,
        k,
        k1,
        signless_k,
        signless_k1,
        hodge,
        signless_hodge,
    }
}

/// Supertrace on forms: the first `n` diagonal entries count positively
/// (0-forms), the remaining ones negatively (1-forms).
pub fn supertrace(m: &Array2<i64>, n: usize) -> Result<i64> {
    let (rows, cols) = m.dim();
    if rows != cols || n > rows {
        return Err(Error::DimensionMismatch(format!(
            "supertrace needs a square matrix with at least {n} rows, got {rows} x {cols}"
        )));
    }
    let mut s = 0i64;
    for i in 0..rows {
        if i < n {
            s += m[[i, i]];
        } else {
            s -= m[[i, i]];
        }
    }
    Ok(s)
}

/// Same on a real matrix (used for heat-kernel supertraces).
pub fn supertrace_f64(m: &Array2<f64>, n: usize) -> Result<f64> {
    let (rows, cols) = m.dim();
    if rows != cols || n > rows {
        return Err(Error::DimensionMismatch(format!(
            "supertrace needs a square matrix with at least {n} rows, got {rows} x {cols}"
        )));
    }
    let mut s = 0.0;
    for i in 0..rows {
        if i < n {
            s += m[[i, i]];
        } else {
            s -= m[[i, i]];
        }
    }
    Ok(s)
}

/// A simplex of the one-dimensional complex of a simple graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Simplex {
    Vertex(usize),
    /// Edge by its index in the quiver's edge list.
    Edge(usize),
}

impl Simplex {
    pub fn dim(&self) -> usize {
        match self {
            Simplex::Vertex(_) => 0,
            Simplex::Edge(_) => 1,
        }
    }

    /// `w(x) = (-1)^dim(x)`.
    pub fn weight(&self) -> i64 {
        match self {
            Simplex::Vertex(_) => 1,
            Simplex::Edge(_) => -1,
        }
    }
}

/// Connection matrix `L`, its exact inverse `g`, determinant and signature
/// for the one-dimensional simplicial complex of a simple graph.
pub struct ConnectionPack {
    /// All n vertices, then all m edges.
    pub simplices: Vec<Simplex>,
    /// 0/1 intersection matrix, (n+m) x (n+m).
    pub l: Array2<i64>,
    /// Green matrix: `g[x][y] = w(x) w(y) chi(U(x) /\ U(y))` with `U` the star.
    pub g: Array2<i64>,
    /// Exact determinant of `L` (unimodular: +1 or -1).
    pub det_l: i64,
    /// (positive, negative) eigenvalue counts of `L`.
    pub signature: (usize, usize),
}

/// Builds the connection pack of a simple graph.
pub fn connection(q: &Quiver) -> Result<ConnectionPack> {
    if !q.is_simple() {
        return Err(Error::NotSimple);
    }
    let n = q.n();
    let m = q.m();
    let size = n + m;
    let edges = q.edges();

    let mut simplices = Vec::with_capacity(size);
    simplices.extend((0..n).map(Simplex::Vertex));
    simplices.extend((0..m).map(Simplex::Edge));

    let mut l = Array2::zeros((size, size));
    for v in 0..n {
        l[[v, v]] = 1;
    }
    for (e, &(a, b)) in edges.iter().enumerate() {
        let row = n + e;
        l[[row, row]] = 1;
        l[[a, row]] = 1;
        l[[row, a]] = 1;
        l[[b, row]] = 1;
        l[[row, b]] = 1;
        for (e2, &(c, d)) in edges.iter().enumerate().skip(e + 1) {
            if a == c || a == d || b == c || b == d {
                let row2 = n + e2;
                l[[row, row2]] = 1;
                l[[row2, row]] = 1;
            }
        }
    }

    // Green matrix from the star formula. For a vertex x, U(x) is x plus its
    // incident edges; for an edge, U(x) = {x}.
    let deg = q.vertex_degrees();
    let mut g = Array2::zeros((size, size));
    for v in 0..n {
        g[[v, v]] = 1 - deg[v] as i64;
    }
    for &(a, b) in edges {
        // two distinct vertex stars intersect in their common edge
        g[[a, b]] = -1;
        g[[b, a]] = -1;
    }
    for (e, &(a, b)) in edges.iter().enumerate() {
        let row = n + e;
        g[[row, row]] = -1;
        g[[a, row]] = 1;
        g[[row, a]] = 1;
        g[[b, row]] = 1;
        g[[row, b]] = 1;
    }

    let det = det_exact(&l);
    let det_l = i64::try_from(&det)
        .map_err(|_| Error::Overflow(format!("det L = {det} does not fit in i64")))?;

    let spectrum = crate::spectra::eigen_desc(&l)?;
    let pos = spectrum.values.iter().filter(|&&x| x > 0.0).count();
    let neg = spectrum.values.iter().filter(|&&x| x < 0.0).count();

    Ok(ConnectionPack {
        simplices,
        l,
        g,
        det_l,
        signature: (pos, neg),
    })
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn det_exact(m: &Array2<i64>) -> BigInt {
    let (rows, cols) = m.dim();
    assert_eq!(rows, cols, "determinant needs a square matrix");
    let n = rows;
    if n == 0 {
        return BigInt::from(1);
    }
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(m[[i, j]])).collect())
        .collect();
    let mut sign = 1i64;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k] == BigInt::from(0) {
            let Some(pivot) = (k + 1..n).find(|&i| a[i][k] != BigInt::from(0)) else {
                return BigInt::from(0);
            };
            a.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev; // exact division in Bareiss
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact integer matrix product.
pub fn matmul(a: &Array2<i64>, b: &Array2<i64>) -> Array2<i64> {
    a.dot(b)
}

/// CSV export, one row per line.
pub fn matrix_csv(m: &Array2<i64>) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON export: `{rows, cols, data}` with row-major data.
pub fn matrix_json(m: &Array2<i64>) -> serde_json::Value {
    let (rows, cols) = m.dim();
    let data: Vec<i64> = m.iter().copied().collect();
    serde_json::json!({ "rows": rows, "cols": cols, "data": data })
}
