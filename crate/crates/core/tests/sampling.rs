use subgauss_core::model::{empirical_law, sample_gaussian, sample_source};
use subgauss_core::transport::wasserstein1;
use subgauss_core::{DiscreteLaw, GaussianSpec, IndexSet, ProcessSource};

fn three_atoms() -> DiscreteLaw {
    DiscreteLaw::new(
        IndexSet::numbered(2).unwrap(),
        vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -2.0]],
        vec![0.5, 0.3, 0.2],
    )
    .unwrap()
}

#[test]
fn empirical_law_is_close_in_w1() {
    let law = three_atoms();
    let batch = sample_source(&ProcessSource::Law(law.clone()), 10_000, 42).unwrap();
    let hat = empirical_law(&batch).unwrap();
    assert!(hat.num_atoms() <= 3);
    assert!(wasserstein1(&hat, &law).unwrap() < 0.1);
}

#[test]
fn gaussian_sample_mean_within_five_sigma() {
    let cov = nalgebra::DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.5]);
    let spec = GaussianSpec::new(IndexSet::numbered(3).unwrap(), vec![1.0, -2.0, 0.5], cov).unwrap();
    let m = 20_000;
    let batch = sample_gaussian(&spec, m, 9).unwrap();
    let mean = batch.mean();
    let slack = 5.0 * (2.0 / m as f64).sqrt();
    for (a, b) in mean.iter().zip(spec.mean()) {
        assert!((a - b).abs() < slack, "{a} vs {b}");
    }
    assert_eq!(batch, sample_gaussian(&spec, m, 9).unwrap());
}
