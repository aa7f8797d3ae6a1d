#![allow(dead_code)]

use pbe_core::{LqgGameSpec, Mat};

pub fn m(r: usize, c: usize, v: &[f64]) -> Mat {
    Mat::from_row_slice(r, c, v)
}

/// Two agents, scalar effort game with unit prior variance.
pub fn scalar(q1: f64, q2: f64, tt: usize) -> LqgGameSpec {
    let r1 = m(3, 3, &[0.0, 0.5, 0.0, 0.5, -1.0, 0.25, 0.0, 0.25, 0.0]);
    let r2 = m(3, 3, &[0.0, 0.0, 0.5, 0.0, 0.0, 0.25, 0.5, 0.25, -1.0]);
    LqgGameSpec::new(tt, 1, m(1, 1, &[1.0]), vec![m(1, 1, &[q1]), m(1, 1, &[q2])], vec![r1, r2]).unwrap()
}

/// Two agents, two-dimensional attribute, diagonal noise.
pub fn planar(q1: [f64; 2], q2: [f64; 2]) -> LqgGameSpec {
    let r1 = m(4, 4, &[0., 0., 0.5, 0., 0., 0., 0., 0., 0.5, 0., -1., 0.5, 0., 0., 0.5, 0.]);
    let r2 = m(4, 4, &[0., 0., 0., 0., 0., 0., 0., 0.5, 0., 0., 0., 0.5, 0., 0.5, 0.5, -1.]);
    let d = |q: [f64; 2]| m(2, 2, &[q[0], 0.0, 0.0, q[1]]);
    LqgGameSpec::new(2, 1, Mat::identity(2, 2), vec![d(q1), d(q2)], vec![r1, r2]).unwrap()
}
