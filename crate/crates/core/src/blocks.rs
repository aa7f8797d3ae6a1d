//! Named block layouts for stacked vectors.
//!
//! Every stacked quantity in the filter and value recursions (`[v; v̂^{-i}]`,
//! `[v; a^i; v̂^{-i}; x^i; f]` and so on) is described by a `Layout`. Sub-block
//! reads and writes go through it instead of hand-computed offsets.

use crate::Mat;
use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Blk {
    /// The static state V.
    V,
    /// A player's own private estimate v̂^i.
    Vh(usize),
    /// Player j's action.
    A(usize),
    /// Player i's next private observation.
    X(usize),
    /// Public offset block f^j.
    F(usize),
}

#[derive(Clone, Debug, Default)]
pub struct Layout {
    blocks: Vec<(Blk, usize, usize)>,
    dim: usize,
}

impl Layout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, b: Blk, len: usize) -> Self {
        assert!(self.find(b).is_none(), "duplicate block {b:?}");
        self.blocks.push((b, self.dim, len));
        self.dim += len;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn find(&self, b: Blk) -> Option<&(Blk, usize, usize)> {
        self.blocks.iter().find(|(k, _, _)| *k == b)
    }

    pub fn has(&self, b: Blk) -> bool {
        self.find(b).is_some()
    }

    pub fn range(&self, b: Blk) -> Range<usize> {
        let (_, off, len) = *self.find(b).unwrap_or_else(|| panic!("no block {b:?} in layout"));
        off..off + len
    }

    /// Contiguous range spanning the listed blocks, which must be adjacent.
    pub fn span(&self, bs: &[Blk]) -> Range<usize> {
        let first = self.range(bs[0]);
        let mut end = first.end;
        for &b in &bs[1..] {
            let r = self.range(b);
            assert_eq!(r.start, end, "blocks not adjacent");
            end = r.end;
        }
        first.start..end
    }
}

pub fn get(m: &Mat, rows: Range<usize>, cols: Range<usize>) -> Mat {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

pub fn set(m: &mut Mat, rows: Range<usize>, cols: Range<usize>, v: &Mat) {
    assert_eq!((rows.len(), cols.len()), v.shape(), "block shape mismatch");
    m.view_mut((rows.start, cols.start), (rows.len(), cols.len())).copy_from(v);
}

pub fn add(m: &mut Mat, rows: Range<usize>, cols: Range<usize>, v: &Mat) {
    assert_eq!((rows.len(), cols.len()), v.shape(), "block shape mismatch");
    let mut view = m.view_mut((rows.start, cols.start), (rows.len(), cols.len()));
    view += v;
}

/// Indices of all players except `i`, ascending.
pub fn others(n: usize, i: usize) -> Vec<usize> {
    (0..n).filter(|&j| j != i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_follow_push_order() {
        let l = Layout::new().push(Blk::V, 2).push(Blk::A(0), 1).push(Blk::Vh(1), 2);
        assert_eq!(l.range(Blk::A(0)), 2..3);
        assert_eq!(l.range(Blk::Vh(1)), 3..5);
        assert_eq!(l.span(&[Blk::A(0), Blk::Vh(1)]), 2..5);
        assert_eq!(l.dim(), 5);
    }

    #[test]
    #[should_panic]
    fn missing_block_panics() {
        Layout::new().push(Blk::V, 1).range(Blk::F(0));
    }
}
