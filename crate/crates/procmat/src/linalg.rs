//! Small dense-matrix helpers shared by the process and Fock layers.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

/// Haar-ish random unitary via QR of a complex Gaussian matrix, with the
/// R-diagonal phases normalized away.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase.conj();
        }
    }
    q
}

/// Random unit vector with complex Gaussian-ish entries.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

pub fn is_unitary(m: &DMatrix<C64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let n = m.nrows();
    let prod = m.adjoint() * m;
    for r in 0..n {
        for c in 0..n {
            let expect = if r == c { C64::ONE } else { C64::ZERO };
            if (prod[(r, c)] - expect).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Permanent by direct expansion over permutations. Fine for the k ≤ 4
/// sector sizes used here.
pub fn permanent(m: &DMatrix<C64>) -> C64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent requires a square matrix");
    if n == 0 {
        return C64::ONE;
    }
    let mut total = C64::ZERO;
    let mut perm: Vec<usize> = (0..n).collect();
    permanent_rec(m, &mut perm, 0, &mut total);
    total
}

fn permanent_rec(m: &DMatrix<C64>, perm: &mut Vec<usize>, k: usize, total: &mut C64) {
    let n = perm.len();
    if k == n {
        let mut prod = C64::ONE;
        for (row, &col) in perm.iter().enumerate() {
            prod *= m[(row, col)];
        }
        *total += prod;
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permanent_rec(m, perm, k + 1, total);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=4 {
            for _ in 0..10 {
                let u = random_unitary(&mut rng, dim);
                assert!(is_unitary(&u, 1e-10));
            }
        }
    }

    #[test]
    fn permanent_small_cases() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        // per = 1*4 + 2*3
        assert_eq!(permanent(&m), C64::new(10.0, 0.0));
        let ones = DMatrix::from_element(3, 3, C64::ONE);
        assert_eq!(permanent(&ones), C64::new(6.0, 0.0));
    }
}
