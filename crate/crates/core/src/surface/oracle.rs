//! An independent model of the group for cross-checks.
//!
//! Nothing here shares logic with the ring construction: the ball is
//! built by free expansion plus relator tracing with a union-find, the
//! standard coset-enumeration closure. Octagons are recovered by tracing
//! relator cycles, and the octagon-distance layers fall out of a generic
//! BFS where one step moves anywhere inside a shared octagon. The word
//! problem is answered by walking the table; for a word of length `n`,
//! prefixes of an identity walk never leave the radius `n/2` ball, so a
//! table of radius 5 decides every word up to length 10.

use super::{inv, Gen, RELATOR};

const NONE: usize = usize::MAX;

struct Enumerator {
    tab: Vec<[usize; 8]>,
    uf: Vec<usize>,
    pending: Vec<(usize, usize)>,
}

impl Enumerator {
    fn new() -> Self {
        Enumerator {
            tab: vec![[NONE; 8]],
            uf: vec![0],
            pending: Vec::new(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.uf[v] != v {
            self.uf[v] = self.uf[self.uf[v]];
            v = self.uf[v];
        }
        v
    }

    fn slot(&mut self, v: usize, g: Gen) -> usize {
        let x = self.tab[v][g as usize];
        if x == NONE {
            return NONE;
        }
        let r = self.find(x);
        self.tab[v][g as usize] = r;
        r
    }

    fn fresh(&mut self, v: usize, g: Gen) -> usize {
        let w = self.tab.len();
        self.tab.push([NONE; 8]);
        self.uf.push(w);
        self.tab[v][g as usize] = w;
        self.tab[w][inv(g) as usize] = v;
        w
    }

    /// Record `u --g--> v`, queueing coincidences on conflicts.
    fn join(&mut self, u: usize, g: Gen, v: usize) {
        let u = self.find(u);
        let v = self.find(v);
        let cur = self.slot(u, g);
        if cur == NONE {
            self.tab[u][g as usize] = v;
        } else if cur != v {
            self.pending.push((cur, v));
        }
        let rcur = self.slot(v, inv(g));
        if rcur == NONE {
            self.tab[v][inv(g) as usize] = u;
        } else if rcur != u {
            self.pending.push((rcur, u));
        }
    }

    fn process(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            self.uf[drop] = keep;
            let row = self.tab[drop];
            self.tab[drop] = [NONE; 8];
            for (g, &x) in row.iter().enumerate() {
                if x != NONE {
                    let x = self.find(x);
                    self.join(keep, g as Gen, x);
                }
            }
        }
    }

    /// One relator trace anchored at `v`: forward until stuck, backward
    /// until stuck, then either deduce the bridging edge or report the
    /// closure coincidence. Returns true when the table changed.
    fn scan(&mut self, v: usize, cycle: &[Gen; 8]) -> bool {
        let v = self.find(v);
        let mut f = v;
        let mut i = 0;
        while i < 8 {
            let n = self.slot(f, cycle[i]);
            if n == NONE {
                break;
            }
            f = n;
            i += 1;
        }
        if i == 8 {
            if f != v {
                self.pending.push((f, v));
                self.process();
                return true;
            }
            return false;
        }
        let mut b = v;
        let mut j = 8;
        while j > i + 1 {
            let n = self.slot(b, inv(cycle[j - 1]));
            if n == NONE {
                break;
            }
            b = n;
            j -= 1;
        }
        if j == i + 1 {
            self.join(f, cycle[i], b);
            self.process();
            return true;
        }
        false
    }

    fn close(&mut self, cycles: &[[Gen; 8]]) {
        loop {
            let mut changed = false;
            for v in 0..self.tab.len() {
                if self.uf[v] != v {
                    continue;
                }
                for cycle in cycles {
                    changed |= self.scan(v, cycle);
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn distances(&mut self) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.tab.len()];
        let root = self.find(0);
        dist[root] = 0;
        let mut frontier = vec![root];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for v in frontier {
                for g in 0u8..8 {
                    let w = self.slot(v, g);
                    if w != NONE && dist[w] == u32::MAX {
                        dist[w] = dist[v] + 1;
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        dist
    }
}

/// A verified neighbor table for the ball of the requested word-metric
/// radius, with true distances on every vertex.
pub struct TraceBall {
    tab: Vec<[usize; 8]>,
    dist: Vec<u32>,
    radius: u32,
}

pub fn trace_ball(radius: u32) -> TraceBall {
    let cycles: Vec<[Gen; 8]> = (0..8)
        .map(|r| {
            let mut c = [0 as Gen; 8];
            for i in 0..8 {
                c[i] = RELATOR[(r + i) % 8];
            }
            c
        })
        .collect();

    let mut e = Enumerator::new();
    loop {
        e.close(&cycles);
        let dist = e.distances();
        let mut defined = false;
        for v in 0..e.tab.len() {
            if e.uf[v] != v || dist[v] >= radius {
                continue;
            }
            for g in 0u8..8 {
                if e.slot(v, g) == NONE {
                    e.fresh(v, g);
                    defined = true;
                }
            }
        }
        if !defined {
            break;
        }
    }

    // compact the live vertices into dense ids
    let n = e.tab.len();
    let mut dense = vec![NONE; n];
    let mut count = 0usize;
    for v in 0..n {
        if e.uf[v] == v {
            dense[v] = count;
            count += 1;
        }
    }
    let mut tab = vec![[NONE; 8]; count];
    for v in 0..n {
        if e.uf[v] != v {
            continue;
        }
        for g in 0..8 {
            let x = e.tab[v][g];
            if x != NONE {
                tab[dense[v]][g] = dense[e.find(x)];
            }
        }
    }
    let dist_old = e.distances();
    let mut dist = vec![u32::MAX; count];
    for v in 0..n {
        if e.uf[v] == v {
            dist[dense[v]] = dist_old[v];
        }
    }
    TraceBall { tab, dist, radius }
}

impl TraceBall {
    pub const ORIGIN: usize = 0;

    pub fn len(&self) -> usize {
        self.tab.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self, v: usize, g: Gen) -> Option<usize> {
        let w = self.tab[v][g as usize];
        (w != NONE).then_some(w)
    }

    pub fn dist(&self, v: usize) -> u32 {
        self.dist[v]
    }

    pub fn sphere_count(&self, k: u32) -> usize {
        self.dist.iter().filter(|&&d| d == k).count()
    }

    pub fn walk(&self, from: usize, word: &[Gen]) -> Option<usize> {
        let mut v = from;
        for &g in word {
            v = self.step(v, g)?;
        }
        Some(v)
    }

    /// Decides the word problem when the table certifies it. `None` only
    /// for words longer than twice the trusted radius whose walk escapes.
    pub fn is_identity(&self, word: &[Gen]) -> Option<bool> {
        let n = word.len();
        let mut v = Self::ORIGIN;
        for (k, &g) in word.iter().enumerate() {
            let bound = (k + 1).min(n - k - 1) as u32;
            match self.step(v, g) {
                Some(w) if self.dist[w] <= bound => v = w,
                // an identity walk stays within min(k, n-k) of the origin
                _ if bound < self.radius => return Some(false),
                Some(w) => v = w,
                None => return None,
            }
        }
        Some(v == Self::ORIGIN)
    }

    /// Cells of each octagon through `v`, one per relator corner, in trace
    /// order. Octagons leaving the table are omitted.
    pub fn octagons_at(&self, v: usize) -> Vec<[usize; 8]> {
        let mut out = Vec::new();
        for r in 0..8 {
            let mut cells = [NONE; 8];
            cells[0] = v;
            let mut ok = true;
            let mut cur = v;
            for i in 0..7 {
                match self.step(cur, RELATOR[(r + i) % 8]) {
                    Some(w) => {
                        cur = w;
                        cells[i + 1] = w;
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && self.step(cur, RELATOR[(r + 7) % 8]) == Some(v) {
                out.push(cells);
            }
        }
        out
    }

    /// Octagon-distance layers out to `depth`: layer `k+1` collects the
    /// unassigned cells sharing an octagon with layer `k`.
    pub fn octagon_layers(&self, depth: usize) -> Vec<Vec<usize>> {
        let mut layer_of = vec![usize::MAX; self.len()];
        layer_of[Self::ORIGIN] = 0;
        let mut layers = vec![vec![Self::ORIGIN]];
        for k in 0..depth {
            let mut next = Vec::new();
            for &v in &layers[k] {
                for oct in self.octagons_at(v) {
                    for &u in &oct {
                        if layer_of[u] == usize::MAX {
                            layer_of[u] = k + 1;
                            next.push(u);
                        }
                    }
                }
            }
            layers.push(next);
        }
        layers
    }

    /// Neighbors of `v` in the given set (for type classification).
    pub fn neighbors_within(&self, v: usize, set: &[bool]) -> usize {
        (0u8..8)
            .filter_map(|g| self.step(v, g))
            .filter(|&w| set[w])
            .count()
    }
}
