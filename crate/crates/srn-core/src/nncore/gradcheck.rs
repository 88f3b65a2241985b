/// Central finite-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Compares analytic gradients of a scalar loss against central finite
/// differences and returns the worst relative error over all parameters.
///
/// `loss` is called with a perturbed copy of `params` and must recompute the
/// scalar loss from scratch (independent of the backward pass under test).
/// Non-finite values anywhere are a hard failure.
pub fn finite_difference_max_rel_err<F>(
    params: &[f64],
    analytic: &[f64],
    step: f64,
    mut loss: F,
) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(
        params.len(),
        analytic.len(),
        "analytic gradient length mismatch"
    );
    assert!(
        analytic.iter().all(|g| g.is_finite()),
        "non-finite analytic gradient"
    );
    let mut work = params.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..params.len() {
        let orig = work[i];
        work[i] = orig + step;
        let up = loss(&work);
        work[i] = orig - step;
        let down = loss(&work);
        work[i] = orig;
        assert!(up.is_finite() && down.is_finite(), "non-finite loss");
        let numeric = (up - down) / (2.0 * step);
        let denom = (numeric.abs() + analytic[i].abs()).max(1e-6);
        let rel = (numeric - analytic[i]).abs() / denom;
        if rel > worst {
            worst = rel;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::dense::{Activation, DenseLayer};
    use crate::nncore::embedding::EmbeddingTable;
    use crate::nncore::gru::GruCell;
    use crate::nncore::init::seeded_rng;
    use crate::nncore::matrix::dot;
    use rand::Rng;

    #[test]
    fn dense_layer_with_sigmoid_passes() {
        let mut rng = seeded_rng(101, &[]);
        let mut layer = DenseLayer::new(4, 3, Activation::Sigmoid, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..0.9)).collect();

        // loss = 0.5 * sum (out - target)^2
        let cache = layer.forward(&x);
        let d_out: Vec<f64> = cache
            .output
            .iter()
            .zip(&target)
            .map(|(o, t)| o - t)
            .collect();
        layer.zero_grad();
        let mut dx = vec![0.0; 4];
        layer.backward(&cache, &d_out, &mut dx);

        let mut params = Vec::new();
        layer.read_params(&mut params);
        let mut analytic = Vec::new();
        layer.read_grads(&mut analytic);

        let proto = layer.clone();
        let x2 = x.clone();
        let t2 = target.clone();
        let err = finite_difference_max_rel_err(&params, &analytic, FD_STEP, |p| {
            let mut l = proto.clone();
            l.write_params(&mut p.iter().copied());
            let c = l.forward(&x2);
            c.output
                .iter()
                .zip(&t2)
                .map(|(o, t)| 0.5 * (o - t) * (o - t))
                .sum()
        });
        assert!(err < 1e-5, "max rel err {err}");
    }

    #[test]
    fn gru_two_step_unroll_passes() {
        let mut rng = seeded_rng(202, &[]);
        let mut cell = GruCell::new(3, 2, &mut rng);
        let inputs: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let h0 = vec![0.1, -0.2];
        let readout: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();

        // loss = dot(readout, h_final)
        let (_, cache) = cell.forward(&inputs, &h0);
        cell.zero_grad();
        cell.backward_from_final(&cache, &readout);

        let mut params = Vec::new();
        cell.read_params(&mut params);
        let mut analytic = Vec::new();
        cell.read_grads(&mut analytic);

        let proto = cell.clone();
        let err = finite_difference_max_rel_err(&params, &analytic, FD_STEP, |p| {
            let mut c = proto.clone();
            c.write_params(&mut p.iter().copied());
            let (_, cache) = c.forward(&inputs, &h0);
            dot(&readout, GruCell::final_state(&cache))
        });
        assert!(err < 1e-4, "max rel err {err}");
    }

    #[test]
    fn gru_input_gradients_pass() {
        let mut rng = seeded_rng(203, &[]);
        let mut cell = GruCell::new(2, 2, &mut rng);
        let inputs: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let h0 = vec![0.0, 0.0];
        let readout = vec![0.7, -0.3];

        let (_, cache) = cell.forward(&inputs, &h0);
        cell.zero_grad();
        let d_inputs = cell.backward_from_final(&cache, &readout);

        let flat: Vec<f64> = inputs.iter().flatten().copied().collect();
        let analytic: Vec<f64> = d_inputs.iter().flatten().copied().collect();
        let proto = cell.clone();
        let err = finite_difference_max_rel_err(&flat, &analytic, FD_STEP, |p| {
            let seq: Vec<Vec<f64>> = p.chunks(2).map(|c| c.to_vec()).collect();
            let (_, cache) = proto.forward(&seq, &h0);
            dot(&readout, GruCell::final_state(&cache))
        });
        assert!(err < 1e-4, "max rel err {err}");
    }

    #[test]
    fn embedding_lookup_with_dot_product_passes() {
        let mut rng = seeded_rng(303, &[]);
        let mut table = EmbeddingTable::new(6, 4, &mut rng);
        let probe: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ids = [1u32, 4, 1];

        // loss = sum_i dot(probe, emb[id_i])
        table.zero_grad();
        for &id in &ids {
            table.accumulate_grad(id, &probe);
        }
        let mut params = Vec::new();
        table.read_params(&mut params);
        let mut analytic = Vec::new();
        table.read_grads(&mut analytic);

        let proto = table.clone();
        let err = finite_difference_max_rel_err(&params, &analytic, FD_STEP, |p| {
            let mut t = proto.clone();
            t.write_params(&mut p.iter().copied());
            ids.iter().map(|&id| dot(&probe, t.lookup(id))).sum()
        });
        assert!(err < 1e-6, "max rel err {err}");
    }

    #[test]
    #[should_panic(expected = "non-finite analytic gradient")]
    fn non_finite_gradient_is_a_hard_failure() {
        finite_difference_max_rel_err(&[1.0], &[f64::NAN], FD_STEP, |p| p[0]);
    }
}
