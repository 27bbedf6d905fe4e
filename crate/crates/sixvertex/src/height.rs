//! Height surfaces on the face lattice and their contraction maps.
//!
//! A height field assigns an integer to every face of a finite vertex window,
//! subject to the gradient constraints `h(p+e1) - h(p) ∈ {0,-1}` and
//! `h(p+e2) - h(p) ∈ {0,1}`. These are exactly the surfaces traced by
//! up-right path ensembles on the quadrant. The module provides
//!
//! - validation against the gradient constraints and the step boundary,
//! - disagreement regions of two surfaces and their vertex boundaries,
//! - the shift `tau_k`, the region swap `iota_p`, and the bijective
//!   contraction `Upsilon_p^k = (tau_{-k} x Id) ∘ iota_p ∘ (tau_k x Id)`,
//! - the minimal lift `k*` whose disagreement boundary inside the window
//!   has at most `(MN)^(7/8)` vertices.
//!
//! Faces are stored at integer indices: index `(i, j)` is the face centered
//! at `(i + 1/2, j + 1/2)`, so all half-integer arithmetic stays integral.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Face of the dual lattice, addressed by integer indices.
///
/// Index `(i, j)` stands for the face centered at `(i + 1/2, j + 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face {
    pub i: usize,
    pub j: usize,
}

impl Face {
    pub fn new(i: usize, j: usize) -> Self {
        Face { i, j }
    }
}

/// Lattice vertex with coordinates `x, y >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSite {
    pub x: usize,
    pub y: usize,
}

impl VertexSite {
    pub fn new(x: usize, y: usize) -> Self {
        debug_assert!(x >= 1 && y >= 1);
        VertexSite { x, y }
    }

    /// Face `v - e1/2 + e2/2`.
    pub fn nw(self) -> Face {
        Face::new(self.x - 1, self.y)
    }

    /// Face `v + e1/2 + e2/2`.
    pub fn ne(self) -> Face {
        Face::new(self.x, self.y)
    }

    /// Face `v - e1/2 - e2/2`.
    pub fn sw(self) -> Face {
        Face::new(self.x - 1, self.y - 1)
    }

    /// Face `v + e1/2 - e2/2`.
    pub fn se(self) -> Face {
        Face::new(self.x, self.y - 1)
    }
}

/// A gradient constraint broken at `face`, in the given axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub face: Face,
    /// `1` for the rightward gradient, `2` for the upward one.
    pub axis: u8,
    /// The offending difference `h(p + e_axis) - h(p)`.
    pub delta: i64,
}

/// Integer height surface on the `(M+1) x (N+1)` faces of an `M x N`
/// vertex window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeightField {
    m: usize,
    n: usize,
    /// Row-major by `i`: entry `(i, j)` sits at `i * (n + 1) + j`.
    values: Vec<i64>,
}

impl HeightField {
    /// All-zero surface (a valid member of the gradient class, but not a
    /// step-boundary one).
    pub fn zero(m: usize, n: usize) -> Self {
        HeightField {
            m,
            n,
            values: vec![0; (m + 1) * (n + 1)],
        }
    }

    /// The minimal step surface `h(i, j) = j`, i.e. every path travelling
    /// horizontally.
    pub fn step(m: usize, n: usize) -> Self {
        let mut h = HeightField::zero(m, n);
        for i in 0..=m {
            for j in 0..=n {
                h.set(Face::new(i, j), j as i64);
            }
        }
        h
    }

    /// Builds a field from explicit values; `values[i][j]` is the face
    /// `(i + 1/2, j + 1/2)`.
    pub fn from_rows(values: &[Vec<i64>]) -> Result<Self> {
        if values.is_empty() || values[0].is_empty() {
            return Err(Error::Config("empty height array".into()));
        }
        let m = values.len() - 1;
        let n = values[0].len() - 1;
        if values.iter().any(|row| row.len() != n + 1) {
            return Err(Error::Config("ragged height array".into()));
        }
        let mut h = HeightField::zero(m, n);
        for (i, row) in values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                h.set(Face::new(i, j), v);
            }
        }
        Ok(h)
    }

    /// Vertex-window extents `(M, N)`.
    pub fn window(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn contains(&self, p: Face) -> bool {
        p.i <= self.m && p.j <= self.n
    }

    #[inline]
    pub fn get(&self, p: Face) -> i64 {
        self.values[p.i * (self.n + 1) + p.j]
    }

    #[inline]
    pub fn set(&mut self, p: Face, v: i64) {
        self.values[p.i * (self.n + 1) + p.j] = v;
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        let n = self.n;
        (0..=self.m).flat_map(move |i| (0..=n).map(move |j| Face::new(i, j)))
    }

    /// Checks both gradient constraints on every in-window face pair and
    /// reports the offenders. The field is a valid height surface iff the
    /// report is empty.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for i in 0..=self.m {
            for j in 0..=self.n {
                let p = Face::new(i, j);
                if i < self.m {
                    let d = self.get(Face::new(i + 1, j)) - self.get(p);
                    if d != 0 && d != -1 {
                        out.push(Violation {
                            face: p,
                            axis: 1,
                            delta: d,
                        });
                    }
                }
                if j < self.n {
                    let d = self.get(Face::new(i, j + 1)) - self.get(p);
                    if d != 0 && d != 1 {
                        out.push(Violation {
                            face: p,
                            axis: 2,
                            delta: d,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// True iff the surface carries the step boundary: the bottom face row
    /// is identically `0` and the left face column reads `0, 1, 2, ...`.
    pub fn is_step_boundary(&self) -> bool {
        (0..=self.m).all(|i| self.get(Face::new(i, 0)) == 0)
            && (0..=self.n).all(|j| self.get(Face::new(0, j)) == j as i64)
    }

    /// The lift `tau_k`: adds `k` to every face value.
    pub fn shift(&self, k: i64) -> HeightField {
        let mut out = self.clone();
        for v in &mut out.values {
            *v += k;
        }
        out
    }

    /// Serializes as CSV with header `i,j,h`; exact integer round-trip.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,h\n");
        for p in self.faces() {
            s.push_str(&format!("{},{},{}\n", p.i, p.j, self.get(p)));
        }
        s
    }

    /// Parses the `i,j,h` CSV produced by [`HeightField::to_csv`]. Every
    /// face of the window spanned by the listed indices must be present.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('i')) {
                continue;
            }
            let mut it = line.split(',');
            let parse = |tok: Option<&str>, lineno: usize| -> Result<i64> {
                tok.ok_or(Error::Csv {
                    line: lineno + 1,
                    msg: "missing field".into(),
                })?
                .trim()
                .parse()
                .map_err(|e| Error::Csv {
                    line: lineno + 1,
                    msg: format!("{e}"),
                })
            };
            let i = parse(it.next(), lineno)? as usize;
            let j = parse(it.next(), lineno)? as usize;
            let v = parse(it.next(), lineno)?;
            entries.insert((i, j), v);
        }
        let m = entries.keys().map(|&(i, _)| i).max().ok_or(Error::Csv {
            line: 0,
            msg: "no data rows".into(),
        })?;
        let n = entries.keys().map(|&(_, j)| j).max().unwrap();
        if entries.len() != (m + 1) * (n + 1) {
            return Err(Error::Csv {
                line: 0,
                msg: format!(
                    "expected {} faces for a {}x{} window, found {}",
                    (m + 1) * (n + 1),
                    m,
                    n,
                    entries.len()
                ),
            });
        }
        let mut h = HeightField::zero(m, n);
        for ((i, j), v) in entries {
            h.set(Face::new(i, j), v);
        }
        Ok(h)
    }

    fn check_window(&self, other: &HeightField) -> Result<()> {
        if self.window() != other.window() {
            let (m2, n2) = other.window();
            return Err(Error::WindowMismatch(self.m, self.n, m2, n2));
        }
        Ok(())
    }

    fn check_face(&self, p: Face) -> Result<()> {
        if !self.contains(p) {
            return Err(Error::FaceOutOfWindow {
                i: p.i,
                j: p.j,
                m: self.m,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// A finite set of faces inside a window, with 4-adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    m: usize,
    n: usize,
    mask: Vec<bool>,
    count: usize,
}

impl Region {
    fn empty(m: usize, n: usize) -> Self {
        Region {
            m,
            n,
            mask: vec![false; (m + 1) * (n + 1)],
            count: 0,
        }
    }

    #[inline]
    fn idx(&self, p: Face) -> usize {
        p.i * (self.n + 1) + p.j
    }

    pub fn window(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn contains(&self, p: Face) -> bool {
        p.i <= self.m && p.j <= self.n && self.mask[self.idx(p)]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        let n = self.n;
        self.mask
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(move |(k, _)| Face::new(k / (n + 1), k % (n + 1)))
    }

    fn insert(&mut self, p: Face) {
        let k = self.idx(p);
        if !self.mask[k] {
            self.mask[k] = true;
            self.count += 1;
        }
    }
}

fn flood_fill<F: Fn(Face) -> bool>(m: usize, n: usize, p: Face, pred: F) -> Region {
    let mut r = Region::empty(m, n);
    if !pred(p) {
        return r;
    }
    let mut stack = vec![p];
    r.insert(p);
    while let Some(f) = stack.pop() {
        let push = |g: Face, r: &mut Region, stack: &mut Vec<Face>| {
            if !r.contains(g) && pred(g) {
                r.insert(g);
                stack.push(g);
            }
        };
        if f.i > 0 {
            push(Face::new(f.i - 1, f.j), &mut r, &mut stack);
        }
        if f.i < m {
            push(Face::new(f.i + 1, f.j), &mut r, &mut stack);
        }
        if f.j > 0 {
            push(Face::new(f.i, f.j - 1), &mut r, &mut stack);
        }
        if f.j < n {
            push(Face::new(f.i, f.j + 1), &mut r, &mut stack);
        }
    }
    r
}

/// Connected component of `{z : h(z) < h'(z)}` containing `p`; empty when
/// `h(p) >= h'(p)`.
pub fn region_less(h: &HeightField, hp: &HeightField, p: Face) -> Result<Region> {
    h.check_window(hp)?;
    h.check_face(p)?;
    let (m, n) = h.window();
    Ok(flood_fill(m, n, p, |f| h.get(f) < hp.get(f)))
}

/// Connected component of `{z : h(z) != h'(z)}` containing `p`; empty when
/// the surfaces agree at `p`. By the adjacency property of gradient
/// surfaces this component equals either `region_less(h, h', p)` or
/// `region_less(h', h, p)`.
pub fn region_neq(h: &HeightField, hp: &HeightField, p: Face) -> Result<Region> {
    h.check_window(hp)?;
    h.check_face(p)?;
    let (m, n) = h.window();
    Ok(flood_fill(m, n, p, |f| h.get(f) != hp.get(f)))
}

/// Vertices of the window interior adjacent to at least one face inside `r`
/// and at least one outside. Only vertices whose four faces all lie in the
/// window qualify; everything downstream intersects with a vertex rectangle
/// anyway.
pub fn boundary(r: &Region) -> Vec<VertexSite> {
    let (m, n) = r.window();
    let mut out = Vec::new();
    for x in 1..=m {
        for y in 1..=n {
            let v = VertexSite::new(x, y);
            let inside = [v.sw(), v.se(), v.nw(), v.ne()]
                .iter()
                .filter(|&&f| r.contains(f))
                .count();
            if inside > 0 && inside < 4 {
                out.push(v);
            }
        }
    }
    out
}

/// Number of boundary vertices of `r` inside the vertex rectangle
/// `{1..m_lim} x {1..n_lim}`.
pub fn boundary_count_in(r: &Region, m_lim: usize, n_lim: usize) -> usize {
    boundary(r)
        .into_iter()
        .filter(|v| v.x <= m_lim && v.y <= n_lim)
        .count()
}

/// The involution `iota_p`: swaps the two surfaces on the connected
/// disagreement component at `p`, leaving them unchanged elsewhere. Both
/// outputs remain valid surfaces; applying it twice returns the inputs.
pub fn iota(h: &HeightField, hp: &HeightField, p: Face) -> Result<(HeightField, HeightField)> {
    let r = region_neq(h, hp, p)?;
    let mut a = h.clone();
    let mut b = hp.clone();
    for f in r.faces() {
        let (va, vb) = (a.get(f), b.get(f));
        a.set(f, vb);
        b.set(f, va);
    }
    Ok((a, b))
}

/// The contraction `Upsilon_p^k = (tau_{-k} x Id) ∘ iota_p ∘ (tau_k x Id)`.
///
/// Conjugating the involution `iota_p` by a shift keeps it an involution:
/// applying the same `(p, k)` twice returns the inputs, so each
/// `Upsilon_p^k` is a self-inverse bijection on pairs of surfaces. When
/// `h'(p) >= h(p) + k` the outputs satisfy `ht(p) = h'(p) - k` and
/// `ht'(p) = h(p) + k`, pulling the two values at `p` together.
pub fn upsilon(
    h: &HeightField,
    hp: &HeightField,
    p: Face,
    k: i64,
) -> Result<(HeightField, HeightField)> {
    let lifted = h.shift(k);
    let (a, b) = iota(&lifted, hp, p)?;
    Ok((a.shift(-k), b))
}

/// Minimal lift `k >= ceil((r'-r)/2)` whose disagreement boundary at `p`
/// meets `{1..m_lim} x {1..n_lim}` in at most `(m_lim * n_lim)^(7/8)`
/// vertices. Requires `h(p) < h'(p)`; the caller orders the pair. For
/// windows larger than 8x8 the result also satisfies
/// `k* <= ceil((r'-r)/2) + (m_lim * n_lim)^(2/5)`.
pub fn k_star(
    h: &HeightField,
    hp: &HeightField,
    p: Face,
    m_lim: usize,
    n_lim: usize,
) -> Result<i64> {
    h.check_window(hp)?;
    h.check_face(p)?;
    let r = h.get(p);
    let r_prime = hp.get(p);
    if r >= r_prime {
        return Err(Error::UnorderedHeights { r, r_prime });
    }
    let threshold = ((m_lim * n_lim) as f64).powf(7.0 / 8.0);
    let floor = (r_prime - r + 1) / 2;
    // The scan terminates: once the lift clears the maximal difference the
    // component swallows the window and its interior boundary is empty.
    let mut k = floor;
    loop {
        let region = region_neq(&h.shift(k), hp, p)?;
        if (boundary_count_in(&region, m_lim, n_lim) as f64) <= threshold {
            return Ok(k);
        }
        k += 1;
    }
}
