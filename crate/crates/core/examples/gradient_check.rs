//! Compares analytic gradients with central finite differences on the
//! tiny network, in double precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superchat::model::{init_model, Network};
use superchat::ModelConfig;

fn main() {
    let config = ModelConfig::tiny(0);
    let net = Network::new(&config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params: Vec<f64> = init_model(&config)
        .unwrap()
        .parameters
        .iter()
        .map(|&p| p as f64 + rng.random_range(-0.05..0.05))
        .collect();
    let input: Vec<f64> = (0..16 * 16).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (loss, analytic) = net.loss_and_gradient(&params, &input, 2).unwrap();
    println!("{} parameters, loss {loss:.6}", params.len());

    let h = 1e-5;
    let mut probe = params.clone();
    let mut worst = (0, 0.0f64);
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let up = net.loss(&probe, &input, 2).unwrap();
        probe[i] = params[i] - h;
        let down = net.loss(&probe, &input, 2).unwrap();
        probe[i] = params[i];
        let numeric = (up - down) / (2.0 * h);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
        if rel > worst.1 {
            worst = (i, rel);
        }
    }
    let block = config
        .layout_table()
        .into_iter()
        .find(|b| (b.offset..b.offset + b.len).contains(&worst.0))
        .unwrap();
    println!("worst relative error {:.2e} at parameter {} ({})", worst.1, worst.0, block.name);
}
