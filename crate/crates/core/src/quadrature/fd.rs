use num_complex::Complex64;

use crate::fields::CylPoint;

/// A complex vector field sampled at Cartesian coordinates, returning
/// Cartesian components.
pub trait VectorField: Fn([f64; 3]) -> [Complex64; 3] {}

impl<F: Fn([f64; 3]) -> [Complex64; 3]> VectorField for F {}

fn shifted(x: [f64; 3], axis: usize, delta: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += delta;
    y
}

/// d field_comp / d x_axis by central differences with one Richardson step.
fn partial<F: VectorField>(field: &F, x: [f64; 3], axis: usize, h: f64) -> [Complex64; 3] {
    let central = |step: f64| {
        let fp = field(shifted(x, axis, step));
        let fm = field(shifted(x, axis, -step));
        [0, 1, 2].map(|c| (fp[c] - fm[c]) / (2.0 * step))
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    [0, 1, 2].map(|c| (4.0 * fine[c] - coarse[c]) / 3.0)
}

fn second_partial<F: VectorField>(field: &F, x: [f64; 3], axis: usize, h: f64, f0: &[Complex64; 3]) -> [Complex64; 3] {
    let central = |step: f64| {
        let fp = field(shifted(x, axis, step));
        let fm = field(shifted(x, axis, -step));
        [0, 1, 2].map(|c| (fp[c] - 2.0 * f0[c] + fm[c]) / (step * step))
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    [0, 1, 2].map(|c| (4.0 * fine[c] - coarse[c]) / 3.0)
}

pub fn fd_divergence<F: VectorField>(field: F, p: &CylPoint, h: f64) -> Complex64 {
    let x = p.to_cartesian();
    (0..3).map(|axis| partial(&field, x, axis, h)[axis]).sum()
}

pub fn fd_curl<F: VectorField>(field: F, p: &CylPoint, h: f64) -> [Complex64; 3] {
    let x = p.to_cartesian();
    let d = [0, 1, 2].map(|axis| partial(&field, x, axis, h));
    // d[j][i] is d field_i / d x_j
    [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]]
}

/// Componentwise Cartesian Laplacian.
pub fn fd_laplacian<F: VectorField>(field: F, p: &CylPoint, h: f64) -> [Complex64; 3] {
    let x = p.to_cartesian();
    let f0 = field(x);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for axis in 0..3 {
        let d2 = second_partial(&field, x, axis, h, &f0);
        for c in 0..3 {
            out[c] += d2[c];
        }
    }
    out
}
