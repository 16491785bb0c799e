//! Graphs, colorings and the graph-state basis index algebra.
//!
//! Vertices are 0-based in the API. The edge-list text format is 1-based:
//! the first line holds `n`, each further line one `a b` pair.
//!
//! A basis index packs `µ ∈ {0,1}^n` into a `u64` with bit `i` equal to `µ_i`,
//! so `|µ⟩_G = ∏_j Z_j^{µ_j} |G⟩`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagsim::dense;
use crate::error::{Result, SimError};
use crate::pauli::{Pauli, PauliString};

/// Packed graph-state basis index.
pub type BasisIndex = u64;

/// Simple undirected graph on at most 64 vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr { n: self.n, edges: self.edges() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GraphRepr::deserialize(d)?;
        Graph::new(r.n, &r.edges).map_err(serde::de::Error::custom)
    }
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Result<Graph> {
        if n == 0 || n > 64 {
            return Err(SimError::GraphSize(n));
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    /// Star graph: the graph-state form of an `n`-qubit GHZ state.
    pub fn star(n: usize, center: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        g.check_vertex(center)?;
        for v in (0..n).filter(|&v| v != center) {
            g.add_edge(center, v)?;
        }
        Ok(g)
    }

    /// GHZ graph with center vertex 0.
    pub fn ghz(n: usize) -> Result<Graph> {
        Graph::star(n, 0)
    }

    pub fn ring(n: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        if n >= 3 {
            for v in 0..n {
                g.add_edge(v, (v + 1) % n)?;
            }
        } else if n == 2 {
            g.add_edge(0, 1)?;
        }
        Ok(g)
    }

    pub fn line(n: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for v in 1..n {
            g.add_edge(v - 1, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b)?;
            }
        }
        Ok(g)
    }

    /// Ring on vertices `0..n-1` plus a hub `n` joined to every ring vertex.
    pub fn wheel(ring: usize) -> Result<Graph> {
        let mut g = Graph::empty(ring + 1)?;
        for v in 0..ring {
            g.add_edge(v, (v + 1) % ring)?;
            g.add_edge(v, ring)?;
        }
        Ok(g)
    }

    /// Resource graph of the five-qubit cluster-ring code: 5-ring with the read-in
    /// vertex 5 joined to all ring vertices.
    pub fn cluster_ring_resource() -> Graph {
        Graph::wheel(5).expect("static graph")
    }

    /// Three-colorable 6-vertex graph locally equivalent to the cluster-ring
    /// resource; local complementation at vertex 0 maps it to
    /// [`Graph::cluster_ring_resource`].
    pub fn cluster_ring_three_colorable() -> Graph {
        Graph::cluster_ring_resource().local_complement(0).expect("static graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(SimError::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(SimError::InvalidEdge(a, b));
        }
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
        Ok(())
    }

    pub fn toggle_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b);
        self.adj[a] ^= 1 << b;
        self.adj[b] ^= 1 << a;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.adj[a] >> b & 1 == 1
    }

    /// Edges as sorted `(a, b)` pairs with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    /// Neighborhood of `a` as a bit mask.
    pub fn neighbor_mask(&self, a: usize) -> u64 {
        self.adj[a]
    }

    /// Neighborhood of `a` as a sorted vertex list.
    pub fn neighborhood(&self, a: usize) -> Result<Vec<usize>> {
        self.check_vertex(a)?;
        Ok(bits(self.adj[a]).collect())
    }

    /// Local complementation at `a`: toggles every edge inside the neighborhood of `a`.
    pub fn local_complement(&self, a: usize) -> Result<Graph> {
        self.check_vertex(a)?;
        let mut g = self.clone();
        let nb: Vec<usize> = bits(self.adj[a]).collect();
        for (i, &b) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                g.toggle_edge(b, c);
            }
        }
        Ok(g)
    }

    /// Subgraph keeping only the edges incident to `vertices` (same vertex set).
    pub fn edges_incident_to(&self, vertices: u64) -> Graph {
        let mut g = Graph { n: self.n, adj: vec![0; self.n] };
        for (a, b) in self.edges() {
            if vertices >> a & 1 == 1 || vertices >> b & 1 == 1 {
                g.toggle_edge(a, b);
            }
        }
        g
    }

    /// Induced subgraph on `vertices`, relabelled in increasing order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Graph> {
        let mut g = Graph::empty(vertices.len())?;
        for (i, &a) in vertices.iter().enumerate() {
            for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.add_edge(i, j)?;
                }
            }
        }
        Ok(g)
    }

    /// Relabels vertex `v` to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let edges: Vec<(usize, usize)> =
            self.edges().into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
        Graph::new(self.n, &edges)
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    fn bipartition(&self) -> Option<Vec<usize>> {
        let mut color = vec![usize::MAX; self.n];
        for start in 0..self.n {
            if color[start] != usize::MAX {
                continue;
            }
            color[start] = 0;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in bits(self.adj[v]) {
                    if color[w] == usize::MAX {
                        color[w] = 1 - color[v];
                        stack.push(w);
                    } else if color[w] == color[v] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    /// Proper coloring. Bipartite graphs get two colors with set A (color 0) the
    /// smaller class, ties broken by the class holding the lowest vertex. Other
    /// graphs are colored greedily in order of ascending degree, ties by label.
    pub fn color(&self) -> Coloring {
        if self.adj.iter().all(|&a| a == 0) {
            return Coloring { colors: vec![0; self.n], k: 1 };
        }
        if let Some(mut colors) = self.bipartition() {
            let ones = colors.iter().filter(|&&c| c == 1).count();
            if ones < self.n - ones {
                colors.iter_mut().for_each(|c| *c = 1 - *c);
            }
            return Coloring { colors, k: 2 };
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| (self.degree(v), v));
        let mut colors = vec![usize::MAX; self.n];
        for &v in &order {
            let used: Vec<usize> = bits(self.adj[v])
                .map(|w| colors[w])
                .filter(|&c| c != usize::MAX)
                .collect();
            colors[v] = (0..).find(|c| !used.contains(c)).unwrap();
        }
        let k = colors.iter().max().map_or(0, |m| m + 1);
        Coloring { colors, k }
    }

    /// Correlation operator `K_a = X_a ∏_{b ∈ N_a} Z_b`.
    pub fn correlation_operator(&self, a: usize) -> Result<PauliString> {
        self.check_vertex(a)?;
        Ok(PauliString::from_masks(self.n, 1 << a, self.adj[a], 0))
    }

    /// XOR mask `m` with `P|µ⟩_G ∝ |µ ⊕ m⟩_G`.
    pub fn pauli_index_action(&self, p: &PauliString) -> Result<BasisIndex> {
        if p.len() != self.n {
            return Err(SimError::GraphMismatch(format!(
                "pauli of length {} on graph with {} vertices",
                p.len(),
                self.n
            )));
        }
        Ok(self.pauli_masks_action(p.x_mask(), p.z_mask()))
    }

    /// Index mask produced by `X^x Z^z` (phases dropped).
    pub fn pauli_masks_action(&self, x: u64, z: u64) -> BasisIndex {
        let mut m = z;
        for a in bits(x) {
            m ^= self.adj[a];
        }
        m
    }

    /// Index mask of a single-qubit Pauli on `qubit`.
    pub fn single_pauli_mask(&self, qubit: usize, letter: Pauli) -> BasisIndex {
        match letter {
            Pauli::I => 0,
            Pauli::X => self.adj[qubit],
            Pauli::Y => self.adj[qubit] ^ (1 << qubit),
            Pauli::Z => 1 << qubit,
        }
    }

    /// Basis permutation induced by local complementation at `a`:
    /// `µ'_b = µ_a ⊕ µ_b` for `b ∈ N_a`, unchanged otherwise.
    pub fn lc_transform_index(&self, mu: BasisIndex, a: usize) -> BasisIndex {
        if mu >> a & 1 == 1 {
            mu ^ self.adj[a]
        } else {
            mu
        }
    }

    /// Dense amplitude vector of `|G⟩` (oracle use only).
    pub fn graph_state_dense(&self) -> Result<Vec<Complex64>> {
        dense::graph_state_vector(self)
    }

    /// Edge-list text, 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{} {}", a + 1, b + 1);
        }
        s
    }

    /// Parses the 1-based edge-list text format.
    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| SimError::Parse("empty edge list".into()))?
            .parse()
            .map_err(|e| SimError::Parse(format!("vertex count: {e}")))?;
        let mut g = Graph::empty(n)?;
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(SimError::Parse(format!("bad edge line {line:?}")));
            }
            let parse = |t: &str| -> Result<usize> {
                let v: usize =
                    t.parse().map_err(|e| SimError::Parse(format!("vertex {t:?}: {e}")))?;
                if v == 0 || v > n {
                    return Err(SimError::VertexOutOfRange { vertex: v, n });
                }
                Ok(v - 1)
            };
            let (a, b) = (parse(parts[0])?, parse(parts[1])?);
            if g.has_edge(a, b) {
                return Err(SimError::Parse(format!("duplicate edge {line:?}")));
            }
            g.add_edge(a, b)?;
        }
        Ok(g)
    }
}

/// Iterates the set bits of a mask.
pub fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// Proper vertex coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    k: usize,
}

impl Coloring {
    /// Validates a user-supplied coloring against `g`.
    pub fn from_colors(g: &Graph, colors: Vec<usize>) -> Result<Coloring> {
        if colors.len() != g.n() {
            return Err(SimError::GraphMismatch("coloring length".into()));
        }
        for (a, b) in g.edges() {
            if colors[a] == colors[b] {
                return Err(SimError::InvalidEdge(a, b));
            }
        }
        let k = colors.iter().max().map_or(0, |m| m + 1);
        Ok(Coloring { colors, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color_of(&self, v: usize) -> usize {
        self.colors[v]
    }

    /// Vertices of color `c` as a mask.
    pub fn class_mask(&self, c: usize) -> u64 {
        self.colors
            .iter()
            .enumerate()
            .filter(|(_, &col)| col == c)
            .fold(0, |m, (v, _)| m | 1 << v)
    }

    pub fn is_two_colorable(&self) -> bool {
        self.k <= 2
    }

    /// Set A of a two-coloring.
    pub fn set_a(&self) -> u64 {
        self.class_mask(0)
    }

    /// Set B of a two-coloring.
    pub fn set_b(&self) -> u64 {
        self.class_mask(1)
    }

    pub fn is_proper_for(&self, g: &Graph) -> bool {
        self.colors.len() == g.n() && g.edges().iter().all(|&(a, b)| self.colors[a] != self.colors[b])
    }
}

/// One graph per isomorphism class on `n ≤ 7` vertices, by minimal edge mask over all
/// relabelings.
pub fn nonisomorphic_graphs(n: usize) -> Result<Vec<Graph>> {
    if n == 0 || n > 7 {
        return Err(SimError::GraphSize(n));
    }
    let mut slot = vec![vec![0usize; n]; n];
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            slot[a][b] = pairs.len();
            slot[b][a] = pairs.len();
            pairs.push((a, b));
        }
    }
    let mut perms = vec![vec![]];
    for k in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p: Vec<usize>| (0..=k).map(move |i| {
                let mut q = p.clone();
                q.insert(i, k);
                q
            }))
            .collect();
    }
    // edge k moves to slot maps[perm][k]
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| pairs.iter().map(|&(a, b)| slot[p[a]][p[b]]).collect()).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for m in 0u64..1 << pairs.len() {
        let canon = maps.iter().map(|map| bits(m).fold(0u64, |acc, k| acc | 1 << map[k])).min().unwrap_or(0);
        if seen.insert(canon) {
            let edges: Vec<(usize, usize)> = bits(m).map(|k| pairs[k]).collect();
            out.push(Graph::new(n, &edges)?);
        }
    }
    Ok(out)
}
