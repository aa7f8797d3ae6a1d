use pbe_core::blocks::others;
use pbe_core::{Blk, Layout};

/// Block layouts used by player i's stage problem.
#[derive(Clone, Debug)]
pub struct StageLayouts {
    /// `[v̂^i; a^i; f]`, the decision-time variables.
    pub dec: Layout,
    /// `[v; a^i; v̂^{-i}; f]`, the argument of the lifted reward.
    pub rew: Layout,
    /// `[v̂^i; a^i; v̂^{-i}; x^i_{t+1}; f]`, the argument of the next-state map.
    pub prop: Layout,
    /// `[v̂^i; f]`, the value-function argument.
    pub val: Layout,
}

fn push_f(mut l: Layout, n: usize, nv: usize) -> Layout {
    for j in 0..n {
        l = l.push(Blk::F(j), nv);
    }
    l
}

impl StageLayouts {
    pub fn new(n: usize, nv: usize, na: usize, i: usize) -> Self {
        let oth = others(n, i);
        let dec = push_f(Layout::new().push(Blk::Vh(i), nv).push(Blk::A(i), na), n, nv);
        let mut rew = Layout::new().push(Blk::V, nv).push(Blk::A(i), na);
        let mut prop = Layout::new().push(Blk::Vh(i), nv).push(Blk::A(i), na);
        for &j in &oth {
            rew = rew.push(Blk::Vh(j), nv);
            prop = prop.push(Blk::Vh(j), nv);
        }
        let rew = push_f(rew, n, nv);
        let prop = push_f(prop.push(Blk::X(i), nv), n, nv);
        let val = push_f(Layout::new().push(Blk::Vh(i), nv), n, nv);
        StageLayouts { dec, rew, prop, val }
    }

    /// Range covering all of f in the given layout.
    pub fn f_range(l: &Layout, n: usize) -> std::ops::Range<usize> {
        l.range(Blk::F(0)).start..l.range(Blk::F(n - 1)).end
    }
}
