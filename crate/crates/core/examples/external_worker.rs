//! Fitness over the line protocol. A worker thread serves surrogate
//! fitness on a local TCP port, and the engine talks to it through
//! `ExternalEvaluator`. The same search with the in-process surrogate gives
//! the same history.
//!
//! Point `Transport::Command` at a real trainer (for instance
//! `["python", "-m", "trainer_worker"]`) to train networks instead.

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use cnnga::evaluators::worker;
use cnnga::{run, EvaluationSettings, EvolutionConfig, ExternalEvaluator, Result, SurrogateEvaluator, Transport};

fn main() -> Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().expect("address").to_string();
    thread::spawn(move || worker::serve_tcp(listener));

    let config = EvolutionConfig { population_size: 10, max_generations: 5, rng_seed: 3, ..Default::default() };
    let settings = EvaluationSettings { worker_count: 4, ..Default::default() };

    let remote = ExternalEvaluator::new(Transport::Tcp(addr.clone()), "cifar10").with_timeout(Duration::from_secs(10));
    let over_wire = run(config.clone(), settings.clone(), remote)?;
    let local = run(config, settings, SurrogateEvaluator)?;

    println!("worker at {addr}");
    print!("{}", over_wire.history.to_csv());
    println!("best {} ({:.4})", over_wire.best.genome(), over_wire.best.fitness().unwrap_or_default());
    println!("matches in-process surrogate: {}", over_wire.history.to_csv() == local.history.to_csv());
    Ok(())
}
