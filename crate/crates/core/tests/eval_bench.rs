use std::collections::HashSet;
use std::sync::Arc;

use iirnet::designers::{MywConfig, SgdConfig};
use iirnet::dsp::{coeff_response_db, make_grid, CoefficientFilter};
use iirnet::eval::{build_eval_set, evaluate, order_study, EvalSet, Method, ReportRow};
use iirnet::mlp::{MlpModel, MlpShape};
use iirnet::randfilt::{draw_rng, FamilyId, SamplerConfig, Stream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn myw_on_ar_targets() {
    let grid = make_grid(512, 44100.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let targets = (0..50)
        .map(|_| {
            // Stable AR(4) from two random pole pairs.
            let mut a = vec![1.0];
            for _ in 0..2 {
                let r: f64 = rng.random_range(0.2..0.9);
                let th: f64 = rng.random_range(0.1..3.0);
                a = iirnet::poly::convolve(&a, &[1.0, -2.0 * r * th.cos(), r * r]);
            }
            coeff_response_db(&CoefficientFilter::new(vec![1.0], a).unwrap(), &grid).unwrap()
        })
        .collect();
    let set = EvalSet {
        name: "ar4".into(),
        targets,
    };
    let row = ReportRow::from_results("myw", "ar4", &evaluate(&Method::Myw(MywConfig::new(4, 512)), &set), None);
    assert_eq!(row.failures, 0);
    assert!(row.mean_db_mse < 0.5, "{}", row.mean_db_mse);
}

#[test]
fn eval_and_train_streams_never_collide() {
    let mut seen = HashSet::new();
    for i in 0..2000u64 {
        for stream in [Stream::Train, Stream::Eval] {
            assert!(seen.insert(draw_rng(3, stream, i, 0).random::<[u64; 2]>()));
        }
    }
}

#[test]
fn sgd_budget_rows_improve() {
    let grid = make_grid(512, 44100.0).unwrap();
    let set = build_eval_set(FamilyId::G, 16, 20, 8, &grid, &SamplerConfig::default()).unwrap();
    let means: Vec<f64> = [10, 100]
        .iter()
        .map(|&s| {
            let m = Method::Sgd(SgdConfig::new(16, s, 1));
            ReportRow::from_results(&m.name(), &set.name, &evaluate(&m, &set), None).mean_db_mse
        })
        .collect();
    assert!(means[1] < means[0], "{means:?}");
}

#[test]
fn evaluation_is_thread_count_invariant() {
    let grid = make_grid(128, 44100.0).unwrap();
    let set = build_eval_set(FamilyId::G, 4, 30, 2, &grid, &SamplerConfig::default()).unwrap();
    let model = Arc::new(MlpModel::<f32>::new_init(MlpShape::new(128, 16, 4).unwrap(), &mut ChaCha8Rng::seed_from_u64(1)));
    let run = |n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| {
            [Method::IirNet(model.clone()), Method::Sgd(SgdConfig::new(4, 5, 0))]
                .iter()
                .map(|m| ReportRow::from_results(&m.name(), "", &evaluate(m, &set), None))
                .collect::<Vec<_>>()
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn order_study_table_shape() {
    let grid = make_grid(64, 44100.0).unwrap();
    let models: Vec<_> = [4, 8]
        .iter()
        .map(|&n| (n, Arc::new(MlpModel::<f32>::zeros(MlpShape::new(64, 8, n).unwrap()))))
        .collect();
    let study = order_study(&models, &[4, 6, 8], FamilyId::G, 5, 0, &grid, &SamplerConfig::default()).unwrap();
    assert_eq!(study.table.len(), 2);
    assert!(study.table.iter().all(|r| r.len() == 3 && r.iter().all(|v| v.is_finite())));
    let md = study.to_markdown();
    assert!(md.starts_with("| train \\ test | 4 | 6 | 8 |"));
    assert_eq!(md.lines().count(), 4);
}
