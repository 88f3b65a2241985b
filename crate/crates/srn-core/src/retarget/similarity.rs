/// Norms below this are treated as zero vectors; their cosine is 0
/// ("unrelated"), matching the fallback for nodes missing from the graph.
pub const NORM_EPS: f64 = 1e-12;

/// Cosine similarity in `[-1, 1]`; 0 when either vector is (near) zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let na = na.sqrt();
    let nb = nb.sqrt();
    if na < NORM_EPS || nb < NORM_EPS {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Accumulates `d_cos * d cosine/d a` into `da` and likewise for `db`.
/// Zero-norm inputs took the constant-0 branch, so they get no gradient.
pub fn cosine_backward(a: &[f64], b: &[f64], d_cos: f64, da: &mut [f64], db: &mut [f64]) {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = 0.0;
    let mut na2 = 0.0;
    let mut nb2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na2 += x * x;
        nb2 += y * y;
    }
    let na = na2.sqrt();
    let nb = nb2.sqrt();
    if na < NORM_EPS || nb < NORM_EPS {
        return;
    }
    let c = dot / (na * nb);
    let inv = 1.0 / (na * nb);
    for i in 0..a.len() {
        da[i] += d_cos * (b[i] * inv - c * a[i] / na2);
        db[i] += d_cos * (a[i] * inv - c * b[i] / nb2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::gradcheck::{finite_difference_max_rel_err, FD_STEP};

    #[test]
    fn identical_vectors_have_cosine_one() {
        let v = [0.3, -0.7, 2.0];
        assert!((cosine_similarity(&v, &v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_vectors_have_cosine_zero() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn forty_five_degrees() {
        let c = cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]);
        assert!((c - 0.7071068).abs() < 1e-7);
    }

    #[test]
    fn zero_vector_falls_back_to_unrelated() {
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
        assert_eq!(cosine_similarity(&[1.0, 2.0], &[0.0; 2]), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = vec![0.4, -0.2, 0.9, 0.1];
        let b = vec![-0.3, 0.8, 0.5, -0.6];
        let mut da = vec![0.0; 4];
        let mut db = vec![0.0; 4];
        cosine_backward(&a, &b, 1.0, &mut da, &mut db);

        let mut params = a.clone();
        params.extend_from_slice(&b);
        let mut analytic = da.clone();
        analytic.extend_from_slice(&db);
        let err = finite_difference_max_rel_err(&params, &analytic, FD_STEP, |p| {
            cosine_similarity(&p[..4], &p[4..])
        });
        assert!(err < 1e-6, "max rel err {err}");
    }
}
