use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

const UNIMODULAR_TOL: f64 = 1e-10;

/// Iwasawa decomposition `g = u · r` of a unimodular matrix by Gram–Schmidt on the
/// columns: `u` unitary, `r` upper triangular with positive real diagonal.
pub fn iwasawa_gram_schmidt(g: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch(n, g.ncols()));
    }
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut u = CMatrix::zeros(n, n);
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut v = g.column(j).into_owned();
        // Two passes of classical Gram-Schmidt keep the columns orthogonal to rounding.
        for _ in 0..2 {
            for i in 0..j {
                let proj: C64 = u.column(i).dotc(&v);
                r[(i, j)] += proj;
                v -= u.column(i) * proj;
            }
        }
        let norm = v.norm();
        if norm <= 1e-13 * scale {
            return Err(Error::RankDeficient);
        }
        u.set_column(j, &(v / C64::new(norm, 0.0)));
        r[(j, j)] = C64::new(norm, 0.0);
    }
    let det_defect = (linalg::det(g) - 1.0).norm();
    if det_defect > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular(det_defect));
    }
    Ok((u, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_dist;

    fn real(rows: &[&[f64]]) -> CMatrix {
        let n = rows.len();
        CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn triangular_input_is_its_own_r() {
        let g = real(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let (u, r) = iwasawa_gram_schmidt(&g).unwrap();
        assert!(max_dist(&u, &linalg::identity(2)) < 1e-15);
        assert!(max_dist(&r, &g) < 1e-15);
    }

    #[test]
    fn hand_computed_example() {
        let g = real(&[&[0.0, -1.0], &[1.0, 1.0]]);
        let (u, r) = iwasawa_gram_schmidt(&g).unwrap();
        assert!(max_dist(&u, &real(&[&[0.0, -1.0], &[1.0, 0.0]])) < 1e-15);
        assert!(max_dist(&r, &real(&[&[1.0, 1.0], &[0.0, 1.0]])) < 1e-15);
    }

    #[test]
    fn rank_deficient_and_non_unimodular() {
        let g = real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(iwasawa_gram_schmidt(&g), Err(Error::RankDeficient)));
        let g = real(&[&[2.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(iwasawa_gram_schmidt(&g), Err(Error::NotUnimodular(_))));
    }
}
