use levyq::limitlaw;
use levyq::model::{JumpDistribution, LevyModel};

fn main() {
    let model = LevyModel::queue(1.0, JumpDistribution::Pareto { scale: 1.0, index: 2.5 })
        .validated()
        .unwrap();
    for tol in [1e-6, 1e-8, 1e-10] {
        let mass = limitlaw::queue_ccdf_by_double_integral(&model, &[0.0], &[0.0], tol).unwrap()[0][0];
        println!("tol {tol:e}: mass deficit {:e}", 1.0 - mass);
    }
}
