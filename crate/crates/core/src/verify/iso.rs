//! Colour refinement and individualization search on Levi graphs.
//!
//! Points are vertices `0..v`, lines `v..v+b`; the two sides start in
//! different colours so only point-to-point, line-to-line maps are found.
//! Refinement assigns each vertex the rank of `(colour, sorted neighbour
//! colours)` among all signatures, which is independent of the labelling, so
//! two graphs refined side by side get comparable colours. The trace hash
//! records every round's signature multiset and must agree between graphs
//! on any branch that can still lead to an isomorphism.
//!
//! The search individualizes a vertex of the largest non-singleton class.
//! Automorphisms found between matching leaves prune sibling branches that
//! lie in one orbit.

use xxhash_rust::xxh3::xxh3_64_with_seed;

use super::Configuration;

pub(crate) struct Levi {
    adj: Vec<Vec<u32>>,
    points: usize,
}

impl Levi {
    pub(crate) fn new(c: &Configuration) -> Self {
        let points = c.v();
        let mut adj = vec![Vec::new(); points + c.lines().len()];
        for (t, line) in c.lines().iter().enumerate() {
            let lv = (points + t) as u32;
            for &p in line {
                adj[p - 1].push(lv);
                adj[lv as usize].push((p - 1) as u32);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Levi { adj, points }
    }

    pub(crate) fn len(&self) -> usize {
        self.adj.len()
    }

    fn initial_colors(&self) -> Vec<u32> {
        (0..self.adj.len()).map(|x| (x >= self.points) as u32).collect()
    }

    /// Refines `colors` to the coarsest equitable partition below it.
    fn refine(&self, colors: &mut [u32]) -> u64 {
        let mut trace = 0u64;
        let mut ncolors = count_colors(colors);
        let mut sigs: Vec<(u32, Vec<u32>, u32)> = Vec::with_capacity(colors.len());
        let mut bytes = Vec::new();
        loop {
            sigs.clear();
            for (x, nb) in self.adj.iter().enumerate() {
                let mut s: Vec<u32> = nb.iter().map(|&y| colors[y as usize]).collect();
                s.sort_unstable();
                sigs.push((colors[x], s, x as u32));
            }
            sigs.sort_unstable_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
            bytes.clear();
            let mut rank = 0u32;
            for t in 0..sigs.len() {
                if t > 0 && (sigs[t].0, &sigs[t].1) != (sigs[t - 1].0, &sigs[t - 1].1) {
                    rank += 1;
                }
                if t == 0 || (sigs[t].0, &sigs[t].1) != (sigs[t - 1].0, &sigs[t - 1].1) {
                    bytes.extend_from_slice(&u32::MAX.to_le_bytes());
                    bytes.extend_from_slice(&sigs[t].0.to_le_bytes());
                    for c in &sigs[t].1 {
                        bytes.extend_from_slice(&c.to_le_bytes());
                    }
                }
                bytes.extend_from_slice(&[1]);
                colors[sigs[t].2 as usize] = rank;
            }
            trace = xxh3_64_with_seed(&bytes, trace);
            let now = rank as usize + 1;
            if now == ncolors {
                return trace;
            }
            ncolors = now;
        }
    }
}

fn count_colors(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

fn individualize(colors: &mut [u32], x: usize) {
    colors[x] = count_colors(colors) as u32;
}

fn is_discrete(colors: &[u32]) -> bool {
    count_colors(colors) == colors.len()
}

/// Largest colour class, lowest colour on ties.
fn target_cell(colors: &[u32]) -> Option<u32> {
    let mut sizes = vec![0usize; count_colors(colors)];
    for &c in colors {
        sizes[c as usize] += 1;
    }
    sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1)
        .min_by_key(|&(c, &s)| (std::cmp::Reverse(s), c))
        .map(|(c, _)| c as u32)
}

fn members(colors: &[u32], cell: u32) -> impl Iterator<Item = usize> + '_ {
    colors.iter().enumerate().filter(move |(_, &c)| c == cell).map(|(x, _)| x)
}

/// Refinement traces and target cells along the path that always
/// individualizes the first vertex of the target cell.
struct FirstPath {
    traces: Vec<u64>,
    cells: Vec<u32>,
    leaf: Vec<u32>,
}

impl FirstPath {
    fn new(g: &Levi, mut colors: Vec<u32>) -> Self {
        let mut traces = Vec::new();
        let mut cells = Vec::new();
        loop {
            traces.push(g.refine(&mut colors));
            let Some(cell) = target_cell(&colors) else {
                return FirstPath { traces, cells, leaf: colors };
            };
            cells.push(cell);
            let x = members(&colors, cell).next().expect("target cell is non-empty");
            individualize(&mut colors, x);
        }
    }
}

/// Sends each vertex of the `from` leaf to the vertex of equal colour in
/// the `to` leaf.
fn leaf_map(from: &[u32], to: &[u32]) -> Vec<u32> {
    let mut by_color = vec![0u32; to.len()];
    for (y, &c) in to.iter().enumerate() {
        by_color[c as usize] = y as u32;
    }
    from.iter().map(|&c| by_color[c as usize]).collect()
}

fn preserves_adjacency(a: &Levi, b: &Levi, map: &[u32]) -> bool {
    a.adj.iter().enumerate().all(|(x, nb)| {
        let bx = &b.adj[map[x] as usize];
        nb.len() == bx.len() && nb.iter().all(|&y| bx.binary_search(&map[y as usize]).is_ok())
    })
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Orbit partition of the group generated by the generators that fix
/// every vertex of `fixed`.
fn orbits(gens: &[Vec<u32>], fixed: &[usize], n: usize) -> Vec<u32> {
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for g in gens.iter().filter(|g| fixed.iter().all(|&v| g[v] as usize == v)) {
        for (x, &y) in g.iter().enumerate() {
            let (rx, ry) = (find(&mut parent, x as u32), find(&mut parent, y));
            if rx != ry {
                parent[rx.max(ry) as usize] = rx.min(ry);
            }
        }
    }
    parent
}

/// Depth-first search of `b`'s tree for a leaf matching `a`'s first path.
/// Automorphisms of `b` found between matching leaves prune siblings in the
/// same orbit.
struct Matcher<'a> {
    a: &'a Levi,
    b: &'a Levi,
    path_a: FirstPath,
    first_leaf_b: Option<Vec<u32>>,
    gens: &'a mut Vec<Vec<u32>>,
}

impl<'a> Matcher<'a> {
    fn new(a: &'a Levi, ca: Vec<u32>, b: &'a Levi, gens: &'a mut Vec<Vec<u32>>) -> Self {
        Matcher {
            a,
            b,
            path_a: FirstPath::new(a, ca),
            first_leaf_b: None,
            gens,
        }
    }

    fn explore(&mut self, level: usize, mut cb: Vec<u32>, path: &mut Vec<usize>) -> Option<Vec<u32>> {
        if self.b.refine(&mut cb) != self.path_a.traces[level] {
            return None;
        }
        if level == self.path_a.cells.len() {
            if !is_discrete(&cb) {
                return None;
            }
            let map = leaf_map(&self.path_a.leaf, &cb);
            if preserves_adjacency(self.a, self.b, &map) {
                return Some(map);
            }
            match &self.first_leaf_b {
                None => self.first_leaf_b = Some(cb),
                Some(first) => {
                    let g = leaf_map(first, &cb);
                    if preserves_adjacency(self.b, self.b, &g) && !self.gens.contains(&g) {
                        self.gens.push(g);
                    }
                }
            }
            return None;
        }
        let cell = self.path_a.cells[level];
        let candidates: Vec<usize> = members(&cb, cell).collect();
        let mut tried: Vec<u32> = Vec::new();
        for y in candidates {
            if !tried.is_empty() {
                let mut parent = orbits(self.gens, path, cb.len());
                let ry = find(&mut parent, y as u32);
                if tried.iter().any(|&t| find(&mut parent, t) == ry) {
                    continue;
                }
            }
            tried.push(y as u32);
            let mut child = cb.clone();
            individualize(&mut child, y);
            path.push(y);
            let found = self.explore(level + 1, child, path);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

pub(crate) fn isomorphic(a: &Levi, b: &Levi) -> bool {
    if a.len() != b.len() || a.points != b.points {
        return false;
    }
    let mut gens = Vec::new();
    Matcher::new(a, a.initial_colors(), b, &mut gens)
        .explore(0, b.initial_colors(), &mut Vec::new())
        .is_some()
}

/// Order of the automorphism group, by orbit-stabilizer along a chain of
/// individualized base vertices.
pub(crate) fn automorphism_count(g: &Levi) -> u128 {
    let n = g.len();
    let mut colors = g.initial_colors();
    g.refine(&mut colors);
    let mut gens: Vec<Vec<u32>> = Vec::new();
    let mut base: Vec<usize> = Vec::new();
    let mut order: u128 = 1;
    while let Some(cell) = target_cell(&colors) {
        let cell_members: Vec<usize> = members(&colors, cell).collect();
        let x = cell_members[0];
        for &y in &cell_members[1..] {
            let mut parent = orbits(&gens, &base, n);
            if find(&mut parent, x as u32) == find(&mut parent, y as u32) {
                continue;
            }
            let mut cx = colors.clone();
            let mut cy = colors.clone();
            individualize(&mut cx, x);
            individualize(&mut cy, y);
            let mut path = base.clone();
            path.push(y);
            let found = Matcher::new(g, cx, g, &mut gens).explore(0, cy, &mut path);
            if let Some(map) = found {
                gens.push(map);
            }
        }
        let mut parent = orbits(&gens, &base, n);
        let rx = find(&mut parent, x as u32);
        let orbit = cell_members.iter().filter(|&&y| find(&mut parent, y as u32) == rx).count();
        order *= orbit as u128;
        base.push(x);
        individualize(&mut colors, x);
        g.refine(&mut colors);
    }
    order
}
