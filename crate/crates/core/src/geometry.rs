//! Point sets in AG(2,p), directions in PG(1,p), projections and the affine
//! group AGL(2,p).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fp::{FieldElement, PrimeModulus};
use crate::poly::{Polynomial, ValueTable};

/// Largest p accepted by [`canonical_form`].
pub const CANONICAL_FORM_MAX_P: u32 = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub fn new(x: u32, y: u32) -> Self {
        Point { x, y }
    }

    pub fn from_elements(x: FieldElement, y: FieldElement) -> Result<Self> {
        if x.modulus() != y.modulus() {
            return Err(Error::ModulusMismatch {
                left: x.modulus().get(),
                right: y.modulus().get(),
            });
        }
        Ok(Point::new(x.lift(), y.lift()))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// A point of PG(1,p): the class of `(1, m)` or of `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Slope(u32),
    Vertical,
}

impl Direction {
    /// Slopes map to `0..p`, vertical to `p`.
    #[inline]
    pub fn index(self, p: PrimeModulus) -> usize {
        match self {
            Direction::Slope(m) => m as usize,
            Direction::Vertical => p.order(),
        }
    }

    pub fn from_index(p: PrimeModulus, i: usize) -> Direction {
        if i >= p.order() {
            Direction::Vertical
        } else {
            Direction::Slope(i as u32)
        }
    }

    /// All `p + 1` directions, slopes first.
    pub fn all(p: PrimeModulus) -> impl Iterator<Item = Direction> {
        (0..=p.order()).map(move |i| Direction::from_index(p, i))
    }

    /// Class of the nonzero vector `(dx, dy)`.
    pub fn of_vector(p: PrimeModulus, dx: u32, dy: u32) -> Result<Direction> {
        match (dx, dy) {
            (0, 0) => Err(Error::SamePoint),
            (0, _) => Ok(Direction::Vertical),
            _ => Ok(Direction::Slope(p.mul_raw(dy, p.inv_raw(dx).unwrap()))),
        }
    }

    /// A representative vector of the class.
    pub fn vector(self) -> (u32, u32) {
        match self {
            Direction::Slope(m) => (1, m),
            Direction::Vertical => (0, 1),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Slope(m) => write!(f, "{m}"),
            Direction::Vertical => write!(f, "inf"),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(Direction::Vertical),
            t => t
                .parse::<u32>()
                .map(Direction::Slope)
                .map_err(|_| Error::Parse(format!("bad direction {s:?}"))),
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Direction::Slope(m) => s.serialize_u32(*m),
            Direction::Vertical => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Slope(u32),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Slope(m) => Ok(Direction::Slope(m)),
            Raw::Tag(t) if t == "inf" => Ok(Direction::Vertical),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("bad direction {t:?}"))),
        }
    }
}

/// Direction through two distinct points.
pub fn direction_of(p: PrimeModulus, a: Point, b: Point) -> Result<Direction> {
    Direction::of_vector(p, p.sub_raw(b.x, a.x), p.sub_raw(b.y, a.y))
}

/// A subset of AG(2,p) stored as a `p x p` bit grid; cell `x * p + y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    modulus: PrimeModulus,
    words: Vec<u64>,
    len: usize,
}

impl PointSet {
    pub fn empty(modulus: PrimeModulus) -> Self {
        let cells = modulus.order() * modulus.order();
        PointSet {
            modulus,
            words: vec![0; cells.div_ceil(64)],
            len: 0,
        }
    }

    /// Duplicates collapse; coordinates must already be canonical.
    pub fn from_points<I: IntoIterator<Item = Point>>(modulus: PrimeModulus, points: I) -> Result<Self> {
        let mut set = Self::empty(modulus);
        for pt in points {
            for v in [pt.x, pt.y] {
                if v >= modulus.get() {
                    return Err(Error::OutOfRange {
                        value: v as u64,
                        p: modulus.get(),
                    });
                }
            }
            set.insert_cell(pt.x as usize * modulus.order() + pt.y as usize);
        }
        Ok(set)
    }

    pub fn from_cells(modulus: PrimeModulus, cells: &[usize]) -> Self {
        let mut set = Self::empty(modulus);
        for &c in cells {
            debug_assert!(c < modulus.order() * modulus.order());
            set.insert_cell(c);
        }
        set
    }

    /// Parse whitespace-separated `x,y` pairs.
    pub fn parse(modulus: PrimeModulus, text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for tok in text.split_whitespace() {
            let (x, y) = tok
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected x,y but found {tok:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad coordinate {s:?}")))
            };
            let (x, y) = (parse(x)?, parse(y)?);
            for v in [x, y] {
                if v >= modulus.get() as u64 {
                    return Err(Error::OutOfRange {
                        value: v,
                        p: modulus.get(),
                    });
                }
            }
            pts.push(Point::new(x as u32, y as u32));
        }
        Self::from_points(modulus, pts)
    }

    /// Graph `{(x, g(x))}` of a polynomial function.
    pub fn graph(g: &Polynomial) -> Self {
        let m = g.modulus();
        let pts = (0..m.get()).map(|x| Point::new(x, g.eval_raw(x)));
        Self::from_points(m, pts).expect("graph points are canonical")
    }

    fn insert_cell(&mut self, cell: usize) {
        let (w, b) = (cell / 64, cell % 64);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, pt: Point) -> bool {
        let p = self.modulus.get();
        if pt.x >= p || pt.y >= p {
            return false;
        }
        let cell = pt.x as usize * p as usize + pt.y as usize;
        self.words[cell / 64] & (1 << (cell % 64)) != 0
    }

    /// Occupied cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Points in lexicographic `(x, y)` order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let p = self.modulus.order();
        self.cells()
            .map(move |c| Point::new((c / p) as u32, (c % p) as u32))
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.points().collect()
    }

    /// Distinct x-coordinates.
    pub fn x_support(&self) -> usize {
        self.points().map(|pt| pt.x).collect::<BTreeSet<_>>().len()
    }

    /// Distinct y-coordinates.
    pub fn y_support(&self) -> usize {
        self.points().map(|pt| pt.y).collect::<BTreeSet<_>>().len()
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet(p={}, {{{self}}})", self.modulus)
    }
}

/// Sorted `x,y` pairs separated by single spaces.
impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pt) in self.points().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{pt}")?;
        }
        Ok(())
    }
}

/// D(H) by enumerating all pairs.
pub fn direction_set(h: &PointSet) -> Result<BTreeSet<Direction>> {
    if h.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            actual: h.len(),
        });
    }
    let p = h.modulus();
    let pts = h.to_vec();
    let mut out = BTreeSet::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            out.insert(direction_of(p, a, b)?);
        }
    }
    Ok(out)
}

/// D(H) from projections: `c` is determined iff some line with direction
/// `c` holds two or more points of H.
pub fn direction_set_by_projection(h: &PointSet) -> Result<BTreeSet<Direction>> {
    if h.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            actual: h.len(),
        });
    }
    Ok(Direction::all(h.modulus())
        .filter(|&c| projection_counts(h, c).iter().any(|&n| n >= 2))
        .collect())
}

/// Index of the line with direction `c` through `pt`: the x-coordinate for
/// vertical lines, the intercept `t = y - m x` for slope `m`.
#[inline]
pub fn line_index(p: PrimeModulus, c: Direction, pt: Point) -> u32 {
    match c {
        Direction::Vertical => pt.x,
        Direction::Slope(m) => p.sub_raw(pt.y, p.mul_raw(m, pt.x)),
    }
}

/// Exact point counts on each of the `p` lines with direction `c`.
pub fn projection_counts(h: &PointSet, c: Direction) -> Vec<u32> {
    let p = h.modulus();
    let mut counts = vec![0u32; p.order()];
    for pt in h.points() {
        counts[line_index(p, c, pt) as usize] += 1;
    }
    counts
}

/// Projection counts reduced mod p.
pub fn projection_values(h: &PointSet, c: Direction) -> ValueTable {
    let p = h.modulus();
    let counts: Vec<u64> = projection_counts(h, c).into_iter().map(u64::from).collect();
    ValueTable::new(p, &counts).expect("p counts")
}

pub fn projection_polynomial(h: &PointSet, c: Direction) -> Polynomial {
    Polynomial::interpolate(&projection_values(h, c))
}

/// All points collinear; sets of at most two points count as lines.
pub fn is_line(h: &PointSet) -> bool {
    let pts = h.to_vec();
    if pts.len() <= 2 {
        return true;
    }
    let p = h.modulus();
    let c = direction_of(p, pts[0], pts[1]).expect("distinct points");
    pts[2..]
        .iter()
        .all(|&q| direction_of(p, pts[0], q).expect("distinct points") == c)
}

pub fn cartesian_product(p: PrimeModulus, xs: &BTreeSet<u32>, ys: &BTreeSet<u32>) -> Result<PointSet> {
    PointSet::from_points(
        p,
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| Point::new(x, y))),
    )
}

/// `(x, y) -> (a x + b y + u, c x + d y + v)` with `ad - bc != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineTransform {
    modulus: PrimeModulus,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    pub u: u32,
    pub v: u32,
}

impl AffineTransform {
    pub fn new(modulus: PrimeModulus, linear: [u64; 4], translation: [u64; 2]) -> Result<Self> {
        let r = |v: u64| modulus.element(v).lift();
        let t = AffineTransform {
            modulus,
            a: r(linear[0]),
            b: r(linear[1]),
            c: r(linear[2]),
            d: r(linear[3]),
            u: r(translation[0]),
            v: r(translation[1]),
        };
        if t.determinant() == 0 {
            return Err(Error::SingularTransform);
        }
        Ok(t)
    }

    pub fn identity(modulus: PrimeModulus) -> Self {
        Self::new(modulus, [1, 0, 0, 1], [0, 0]).unwrap()
    }

    pub fn translation(modulus: PrimeModulus, u: u64, v: u64) -> Self {
        Self::new(modulus, [1, 0, 0, 1], [u, v]).unwrap()
    }

    /// `(x, y) -> (y, x)`.
    pub fn swap(modulus: PrimeModulus) -> Self {
        Self::new(modulus, [0, 1, 1, 0], [0, 0]).unwrap()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn determinant(&self) -> u32 {
        let m = self.modulus;
        m.sub_raw(m.mul_raw(self.a, self.d), m.mul_raw(self.b, self.c))
    }

    #[inline]
    pub fn apply_point(&self, pt: Point) -> Point {
        let m = self.modulus;
        let x = m.add_raw(m.add_raw(m.mul_raw(self.a, pt.x), m.mul_raw(self.b, pt.y)), self.u);
        let y = m.add_raw(m.add_raw(m.mul_raw(self.c, pt.x), m.mul_raw(self.d, pt.y)), self.v);
        Point::new(x, y)
    }

    pub fn apply(&self, h: &PointSet) -> Result<PointSet> {
        if h.modulus() != self.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: h.modulus().get(),
            });
        }
        PointSet::from_points(self.modulus, h.points().map(|pt| self.apply_point(pt)))
    }

    /// Image of a direction under the linear part.
    pub fn map_direction(&self, dir: Direction) -> Direction {
        let m = self.modulus;
        let (dx, dy) = dir.vector();
        let nx = m.add_raw(m.mul_raw(self.a, dx), m.mul_raw(self.b, dy));
        let ny = m.add_raw(m.mul_raw(self.c, dx), m.mul_raw(self.d, dy));
        Direction::of_vector(m, nx, ny).expect("invertible linear part")
    }

    pub fn inverse(&self) -> AffineTransform {
        let m = self.modulus;
        let det_inv = m.inv_raw(self.determinant()).expect("invertible");
        let a = m.mul_raw(self.d, det_inv);
        let b = m.mul_raw(m.neg_raw(self.b), det_inv);
        let c = m.mul_raw(m.neg_raw(self.c), det_inv);
        let d = m.mul_raw(self.a, det_inv);
        let u = m.neg_raw(m.add_raw(m.mul_raw(a, self.u), m.mul_raw(b, self.v)));
        let v = m.neg_raw(m.add_raw(m.mul_raw(c, self.u), m.mul_raw(d, self.v)));
        AffineTransform {
            modulus: m,
            a,
            b,
            c,
            d,
            u,
            v,
        }
    }
}

/// Invertible 2x2 matrices `[a, b, c, d]` over F_p, in lexicographic order.
pub fn general_linear(p: PrimeModulus) -> Vec<[u32; 4]> {
    let n = p.get();
    let mut out = Vec::with_capacity(((n * n - 1) * (n * n - n)) as usize);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if p.mul_raw(a, d) != p.mul_raw(b, c) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// `|AGL(2,p)| = p^2 (p^2 - 1)(p^2 - p)`.
pub fn affine_group_order(p: PrimeModulus) -> u64 {
    let n = p.get() as u64;
    n * n * (n * n - 1) * (n * n - n)
}

/// Orbit-invariant serialization of a point set under AGL(2,p).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Bit grid with cell 0 in the most significant bit of word 0, so that word
/// order agrees with lexicographic order of the serialized bytes.
pub(crate) type GridKey = [u64; 3];

#[inline]
pub(crate) fn grid_key_insert(key: &mut GridKey, cell: usize) {
    key[cell / 64] |= 1u64 << (63 - cell % 64);
}

pub(crate) fn grid_key_bytes(p: PrimeModulus, key: &GridKey) -> Vec<u8> {
    let nbytes = (p.order() * p.order()).div_ceil(8);
    key.iter()
        .flat_map(|w| w.to_be_bytes())
        .take(nbytes)
        .collect()
}

pub(crate) fn grid_key(h: &PointSet) -> GridKey {
    let mut key = [0u64; 3];
    for c in h.cells() {
        grid_key_insert(&mut key, c);
    }
    key
}

/// Apply every element of AGL(2,p) to the points, reporting each image key.
pub(crate) fn for_each_image<F: FnMut(GridKey)>(p: PrimeModulus, pts: &[Point], mut f: F) {
    let n = p.get();
    let mut linear_images = vec![Point::new(0, 0); pts.len()];
    for [a, b, c, d] in general_linear(p) {
        for (img, pt) in linear_images.iter_mut().zip(pts) {
            *img = Point::new(
                p.add_raw(p.mul_raw(a, pt.x), p.mul_raw(b, pt.y)),
                p.add_raw(p.mul_raw(c, pt.x), p.mul_raw(d, pt.y)),
            );
        }
        for u in 0..n {
            for v in 0..n {
                let mut key = [0u64; 3];
                for img in &linear_images {
                    let x = img.x + u;
                    let x = if x >= n { x - n } else { x };
                    let y = img.y + v;
                    let y = if y >= n { y - n } else { y };
                    grid_key_insert(&mut key, (x * n + y) as usize);
                }
                f(key);
            }
        }
    }
}

/// Lexicographically least bit-grid serialization over the AGL(2,p) orbit.
pub fn canonical_form(h: &PointSet) -> Result<CanonicalForm> {
    let p = h.modulus();
    if p.get() > CANONICAL_FORM_MAX_P {
        return Err(Error::Guard(format!(
            "canonical forms are limited to p <= {CANONICAL_FORM_MAX_P} (got p = {p})"
        )));
    }
    let pts = h.to_vec();
    let mut best = grid_key(h);
    for_each_image(p, &pts, |key| {
        if key < best {
            best = key;
        }
    });
    Ok(CanonicalForm(grid_key_bytes(p, &best)))
}
