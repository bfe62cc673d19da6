//! Dense row-major tensors of arbitrary order and their mode products.

use nalgebra::DMatrix;

use crate::par::{map_indexed, Exec};

/// Contract axis `axis` of `data` (shape `shape`) against the columns of `b`:
/// `out[.., a, ..] = Σ_p b[p, a] · data[.., p, ..]`. `b` is `shape[axis] × m`.
pub(crate) fn mode_product(
    exec: Exec,
    data: &[f64],
    shape: &[usize],
    axis: usize,
    b: &DMatrix<f64>,
) -> (Vec<f64>, Vec<usize>) {
    let n = shape[axis];
    debug_assert_eq!(b.nrows(), n);
    let m = b.ncols();
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();

    let chunks = map_indexed(exec, outer * m, |item| {
        let (o, a) = (item / m, item % m);
        let mut acc = vec![0.0; inner];
        for p in 0..n {
            let w = b[(p, a)];
            if w == 0.0 {
                continue;
            }
            let src = &data[(o * n + p) * inner..(o * n + p + 1) * inner];
            for (dst, s) in acc.iter_mut().zip(src) {
                *dst += w * s;
            }
        }
        acc
    });

    let mut new_shape = shape.to_vec();
    new_shape[axis] = m;
    (chunks.concat(), new_shape)
}

/// Apply `b` (`n × m`) to every slot of an order-`order` tensor of side `n`.
pub(crate) fn transform_all(exec: Exec, data: &[f64], n: usize, order: usize, b: &DMatrix<f64>) -> Vec<f64> {
    let mut shape = vec![n; order];
    let mut cur = data.to_vec();
    for axis in 0..order {
        let (next, s) = mode_product(exec, &cur, &shape, axis, b);
        cur = next;
        shape = s;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_product_matches_matrix_product() {
        // order-2 tensor T, transform_all gives Bᵀ T B
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, -1.0, 2.0, 0.0, 1.0]);
        let data: Vec<f64> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| t[(i, j)])
            .collect();
        let out = transform_all(Exec::Sequential, &data, 2, 2, &b);
        let expected = b.transpose() * t * &b;
        for i in 0..3 {
            for j in 0..3 {
                assert!((out[i * 3 + j] - expected[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
