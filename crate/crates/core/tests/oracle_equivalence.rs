use bvm_core::inference::{
    glm_laplace, grid_box_from_moments, posterior_grid_oracle, sample_glm_posterior_rw,
    GlmPosterior, Prior, RwSettings,
};
use bvm_core::models::glm::{random_design, sample_responses, GlmFamily, GlmModel};
use bvm_core::rng;
use nalgebra::DVector;

fn instance(family: GlmFamily, seed: u64) -> GlmModel {
    let mut r = rng::stream(seed, 0);
    let n = if family == GlmFamily::Logistic {
        400
    } else {
        150
    };
    let x = random_design(n, 2, &mut r);
    let ups = DVector::from_vec(vec![0.3, -0.2]);
    let y = sample_responses(family, &x, &ups, &mut r).unwrap();
    GlmModel::new(x, family, y).unwrap()
}

#[test]
fn random_walk_agrees_with_quadrature() {
    for seed in 0..6u64 {
        let family = if seed % 2 == 0 {
            GlmFamily::Logistic
        } else {
            GlmFamily::Poisson
        };
        let model = instance(family, seed);
        let (mle, prec) = glm_laplace(&model, &Prior::Flat).unwrap();
        let (c, h) = grid_box_from_moments(&mle, &prec.try_inverse().unwrap(), 10.0);
        let post = GlmPosterior::new(&model, Prior::Flat).unwrap();
        let grid = posterior_grid_oracle(&post, &c, &h, 81, 2).unwrap();
        let rw =
            sample_glm_posterior_rw(&model, Prior::Flat, &RwSettings::new(40_000), 2, seed + 100)
                .unwrap();
        for j in 0..2 {
            assert!(
                (rw.mean[j] - grid.mean[j]).abs() <= 4.0 * rw.mean_se[j],
                "seed {seed} mean {j}"
            );
            for k in 0..2 {
                assert!(
                    (rw.cov[(j, k)] - grid.cov[(j, k)]).abs() <= 4.0 * rw.cov_se[(j, k)],
                    "seed {seed} cov ({j},{k})"
                );
            }
        }
    }
}
