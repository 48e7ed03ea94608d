//! The improved binary PSO on a 15-item knapsack. Prints the convergence
//! history with the iterations where chaotic reseeding fired.

use adn_planner::ibpso::{run, SwarmConfig};

fn main() -> adn_planner::Result<()> {
    let weights = [23, 31, 29, 44, 53, 38, 63, 85, 89, 82, 12, 17, 45, 61, 27].map(f64::from);
    let values = [92, 57, 49, 68, 60, 43, 67, 84, 87, 72, 25, 31, 66, 70, 40].map(f64::from);
    let capacity = 250.0;
    let fitness = |g: &[bool]| {
        let (w, v) = g
            .iter()
            .zip(weights.iter().zip(&values))
            .filter(|(b, _)| **b)
            .fold((0.0, 0.0), |acc, (_, (w, v))| (acc.0 + w, acc.1 + v));
        if w <= capacity {
            -v
        } else {
            w - capacity
        }
    };
    let cfg = SwarmConfig::default().with_seed(42);
    let out = run(15, fitness, &cfg)?;
    for r in out.history.iter().filter(|r| r.iteration % 10 == 0 || r.chaos_triggered) {
        println!(
            "iter {:>3}  best {:>7.1}  mean {:>8.2}  pfv {:.3}{}",
            r.iteration,
            -r.best_fitness,
            r.mean_fitness,
            r.pfv,
            if r.chaos_triggered { "  chaos" } else { "" }
        );
    }
    let picked: Vec<usize> = out.best.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
    println!("best value {} with items {picked:?} after {} evaluations", -out.best_fitness, out.evaluations);
    Ok(())
}
