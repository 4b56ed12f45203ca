//! Quiver data model and structural operations.
//!
//! A quiver is a finite graph in which self-loops and multiple (parallel)
//! edges are allowed. The edge list is ordered: it fixes the row order of
//! the gradient matrix, so two quivers with the same edge multiset but
//! different list order are distinct values (their spectra agree).

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

/// A finite graph with loops and multiplicities.
///
/// Vertices are `0..n`. An edge is an ordered pair `(tail, head)`;
/// `tail == head` encodes a loop and repeated pairs encode multiplicities.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quiver {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl fmt::Debug for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quiver(n={}, edges={:?})", self.n, self.edges)
    }
}

/// Vertex degrees sorted non-increasingly. A loop contributes exactly 1
/// to the degree of its vertex, so entry `i` equals the `i`-th largest
/// diagonal entry of the Kirchhoff matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    sorted: Vec<u64>,
}

impl DegreeSequence {
    pub fn as_slice(&self) -> &[u64] {
        &self.sorted
    }

    /// `d_j` with 1-based `j`; `d_{n+1} = 0` by convention.
    pub fn get(&self, j: usize) -> u64 {
        if j >= 1 && j <= self.sorted.len() {
            self.sorted[j - 1]
        } else {
            0
        }
    }

    /// Maximal vertex degree `d_1` (0 for the edgeless quiver).
    pub fn max(&self) -> u64 {
        self.sorted.first().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// A BFS spanning tree: `tree` holds the n-1 chosen edge indices in
/// discovery order, `rest` the remaining edge indices in list order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub tree: Vec<usize>,
    pub rest: Vec<usize>,
}

impl Quiver {
    /// Validates `n >= 1` and that all endpoints lie in `[0, n)`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQuiver("vertex count must be >= 1".into()));
        }
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidQuiver(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
        }
        Ok(Quiver { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges, loops and multiplicities included.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == b).count()
    }

    pub fn non_loop_count(&self) -> usize {
        self.m() - self.loop_count()
    }

    /// Multiplicity of the unordered pair `{a, b}`, `a != b`.
    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(x, y)| (x == a && y == b) || (x == b && y == a))
            .count()
    }

    /// True iff there are no loops and no repeated unordered pair.
    pub fn is_simple(&self) -> bool {
        !self.has_loops() && !self.has_multi_connections()
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|&(a, b)| a == b)
    }

    /// True iff some unordered pair of distinct vertices carries more
    /// than one edge.
    pub fn has_multi_connections(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &self.edges {
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return true;
            }
        }
        false
    }

    /// Unsorted vertex degrees; a loop counts 1.
    pub fn vertex_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            if a != b {
                deg[b] += 1;
            }
        }
        deg
    }

    /// Degrees sorted non-increasingly.
    pub fn degrees(&self) -> DegreeSequence {
        let mut sorted = self.vertex_degrees();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        DegreeSequence { sorted }
    }

    /// Redundancy: the minimal number of edges whose removal kills all
    /// multiple connections. Loops do not contribute.
    pub fn redundancy(&self) -> u64 {
        let mut mult = std::collections::HashMap::new();
        for &(a, b) in &self.edges {
            if a != b {
                *mult.entry((a.min(b), a.max(b))).or_insert(0u64) += 1;
            }
        }
        mult.values().map(|&c| c.saturating_sub(1)).sum()
    }

    /// Returns the quiver with edge `e` deleted; the vertex set is unchanged.
    pub fn remove_edge(&self, e: usize) -> Result<Quiver> {
        if e >= self.m() {
            return Err(Error::EdgeOutOfRange { edge: e, m: self.m() });
        }
        let mut edges = self.edges.clone();
        edges.remove(e);
        Ok(Quiver { n: self.n, edges })
    }

    /// Appends a loop at `v`.
    pub fn add_loop(&self, v: usize) -> Result<Quiver> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        let mut edges = self.edges.clone();
        edges.push((v, v));
        Ok(Quiver { n: self.n, edges })
    }

    /// Appends an edge `(a, b)` with `a != b` (may duplicate an existing pair).
    pub fn add_edge(&self, a: usize, b: usize) -> Result<Quiver> {
        if a >= self.n {
            return Err(Error::VertexOutOfRange { vertex: a, n: self.n });
        }
        if b >= self.n {
            return Err(Error::VertexOutOfRange { vertex: b, n: self.n });
        }
        if a == b {
            return Err(Error::InvalidQuiver(
                "add_edge requires two distinct vertices; use add_loop".into(),
            ));
        }
        let mut edges = self.edges.clone();
        edges.push((a, b));
        Ok(Quiver { n: self.n, edges })
    }

    /// Snap reduction: deletes vertex `v`, morphs every non-loop edge at `v`
    /// into a loop at its other endpoint and drops loops at `v`. Indices
    /// above `v` shift down by one. The Kirchhoff matrix of the result is
    /// exactly the principal submatrix of the input's with row/column `v`
    /// removed.
    ///
    /// Requires a quiver without multiple connections and `n >= 2`.
    pub fn snap(&self, v: usize) -> Result<Quiver> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        if self.has_multi_connections() {
            return Err(Error::MultiConnection);
        }
        if self.n < 2 {
            return Err(Error::InvalidQuiver(
                "snap requires at least 2 vertices".into(),
            ));
        }
        let shift = |w: usize| if w > v { w - 1 } else { w };
        let mut edges = Vec::with_capacity(self.m());
        for &(a, b) in &self.edges {
            if a == v && b == v {
                continue; // loop at the removed vertex disappears
            } else if a == v {
                edges.push((shift(b), shift(b)));
            } else if b == v {
                edges.push((shift(a), shift(a)));
            } else {
                edges.push((shift(a), shift(b)));
            }
        }
        Ok(Quiver { n: self.n - 1, edges })
    }

    /// Simple graph on the same vertices holding exactly the non-edges.
    pub fn complement(&self) -> Result<Quiver> {
        if !self.is_simple() {
            return Err(Error::NotSimple);
        }
        let mut adj = vec![false; self.n * self.n];
        for &(a, b) in &self.edges {
            adj[a * self.n + b] = true;
            adj[b * self.n + a] = true;
        }
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !adj[i * self.n + j] {
                    edges.push((i, j));
                }
            }
        }
        Ok(Quiver { n: self.n, edges })
    }

    /// Edge subdivision (one new vertex per edge): edge `e = (a, b)` becomes
    /// `(a, n+e)` and `(n+e, b)`. Requires a simple, triangle-free input.
    pub fn subdivide(&self) -> Result<Quiver> {
        if !self.is_simple() {
            return Err(Error::NotSimple);
        }
        let mut adj = vec![false; self.n * self.n];
        for &(a, b) in &self.edges {
            adj[a * self.n + b] = true;
            adj[b * self.n + a] = true;
        }
        for &(a, b) in &self.edges {
            for c in 0..self.n {
                if c != a && c != b && adj[a * self.n + c] && adj[b * self.n + c] {
                    return Err(Error::TriangleFound(a.min(b).min(c), {
                        let mut t = [a, b, c];
                        t.sort_unstable();
                        t[1]
                    }, {
                        let mut t = [a, b, c];
                        t.sort_unstable();
                        t[2]
                    }));
                }
            }
        }
        let mut edges = Vec::with_capacity(2 * self.m());
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let w = self.n + e;
            edges.push((a, w));
            edges.push((w, b));
        }
        Ok(Quiver {
            n: self.n + self.m(),
            edges,
        })
    }

    /// Connectivity of the underlying undirected multigraph; loops are
    /// ignored, so a loop-only vertex is its own component.
    pub fn is_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(a, b) in &self.edges {
                if a == b {
                    continue;
                }
                let other = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    count += 1;
                    queue.push_back(other);
                }
            }
        }
        count == self.n
    }

    /// Deterministic spanning tree: BFS from vertex 0 with neighbors scanned
    /// in edge-list order. Errors on disconnected input.
    pub fn spanning_tree(&self) -> Result<SpanningTree> {
        let mut seen = vec![false; self.n];
        let mut in_tree = vec![false; self.m()];
        let mut tree = Vec::new();
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        while let Some(u) = queue.pop_front() {
            for (i, &(a, b)) in self.edges.iter().enumerate() {
                if a == b {
                    continue;
                }
                let other = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    in_tree[i] = true;
                    tree.push(i);
                    queue.push_back(other);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Disconnected);
        }
        let rest = (0..self.m()).filter(|&i| !in_tree[i]).collect();
        Ok(SpanningTree { tree, rest })
    }

    /// Serializes to the `.qvr` text format: `"n m"` then one `"tail head"`
    /// line per edge in list order.
    pub fn to_qvr(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for &(a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    /// Parses the `.qvr` format. Lines starting with `#` and blank lines
    /// are ignored; errors carry 1-based line numbers.
    pub fn from_qvr(text: &str) -> Result<Quiver> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first = parts.next().ok_or(Error::Parse {
                line: line_no,
                message: "expected two integers".into(),
            })?;
            let second = parts.next().ok_or(Error::Parse {
                line: line_no,
                message: "expected two integers".into(),
            })?;
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected exactly two integers".into(),
                });
            }
            let x: usize = first.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid integer `{first}`"),
            })?;
            let y: usize = second.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid integer `{second}`"),
            })?;
            match header {
                None => header = Some((x, y)),
                Some((_, m)) => {
                    if edges.len() == m {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("more than the declared {m} edges"),
                        });
                    }
                    edges.push((x, y));
                }
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: last_line.max(1),
            message: "missing `n m` header".into(),
        })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: last_line.max(1),
                message: format!("declared {m} edges, found {}", edges.len()),
            });
        }
        Quiver::new(n, edges).map_err(|e| Error::Parse {
            line: last_line.max(1),
            message: e.to_string(),
        })
    }
}
