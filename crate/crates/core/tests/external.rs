mod support;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use cnnga::evaluators::protocol::{WireRequest, WireResponse};
use cnnga::evaluators::{surrogate_fitness, worker};
use cnnga::{
    decode, run, EvaluationJob, EvaluationSettings, Evaluator, EvaluatorKind, EvaluatorSpec, EvolutionConfig,
    ExternalEvaluator, Genome, InputShape, SurrogateEvaluator, Transport,
};
use support::genome;

/// What a scripted server does with one request line.
enum Reply {
    Line(String),
    Hang,
    Close,
}

/// TCP server running `script(connection_index, request_line)` per line.
fn scripted<F>(script: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(usize, &str) -> Reply + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let connections = Arc::new(AtomicUsize::new(0));
    let counter = connections.clone();
    let script = Arc::new(script);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let index = counter.fetch_add(1, Ordering::SeqCst);
            let script = script.clone();
            thread::spawn(move || {
                let reader = BufReader::new(stream.try_clone().unwrap());
                for line in reader.lines() {
                    let Ok(line) = line else { return };
                    match script(index, &line) {
                        Reply::Line(text) => {
                            if writeln!(stream, "{text}").is_err() {
                                return;
                            }
                        }
                        Reply::Hang => thread::sleep(Duration::from_secs(5)),
                        Reply::Close => return,
                    }
                }
            });
        }
    });
    (addr, connections)
}

fn job(text: &str) -> EvaluationJob {
    let g: Genome = genome(text);
    EvaluationJob {
        job_id: "job-0".into(),
        arch: decode(&g, InputShape::square(32, 3), 10).unwrap(),
        genome: g,
        epochs: 2,
        seed: 99,
    }
}

fn echo(line: &str) -> String {
    let request: WireRequest = serde_json::from_str(line).unwrap();
    serde_json::to_string(&worker::surrogate_handler(&request)).unwrap()
}

fn small_config() -> EvolutionConfig {
    EvolutionConfig { population_size: 10, max_generations: 4, rng_seed: 13, ..Default::default() }
}

#[test]
fn echo_over_tcp_matches_in_process_surrogate() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || worker::serve_tcp(listener));
    let settings = EvaluationSettings { worker_count: 4, ..Default::default() };
    let remote = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    let a = run(small_config(), settings.clone(), remote).unwrap();
    let b = run(small_config(), settings, SurrogateEvaluator).unwrap();
    assert_eq!(a.history.to_csv(), b.history.to_csv());
}

#[test]
fn echo_worker_binary_over_stdio_matches() {
    let argv = vec![env!("CARGO_BIN_EXE_cnnga").to_string(), "echo-worker".to_string()];
    let settings = EvaluationSettings { worker_count: 2, ..Default::default() };
    let remote = ExternalEvaluator::new(Transport::Command(argv), "cifar10");
    let a = run(small_config(), settings.clone(), remote).unwrap();
    let b = run(small_config(), settings, SurrogateEvaluator).unwrap();
    assert_eq!(a.history.to_csv(), b.history.to_csv());
}

#[test]
fn spec_built_evaluator_uses_the_binary() {
    let spec = EvaluatorSpec {
        kind: EvaluatorKind::External,
        command: Some(vec![env!("CARGO_BIN_EXE_cnnga").to_string(), "echo-worker".to_string()]),
        timeout_secs: Some(30.0),
        ..Default::default()
    };
    let evaluator = spec.build().unwrap();
    let result = evaluator.evaluate(&job("S:64:128-P:max")).unwrap();
    assert_eq!(result.fitness, Some(surrogate_fitness(&genome("S:64:128-P:max"))));
}

#[test]
fn requests_are_protocol_conformant() {
    let (addr, _) = scripted(|_, line| {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        for key in ["job_id", "genome", "arch", "epochs", "seed", "dataset"] {
            assert!(keys.contains(&key), "missing {key} in {line}");
        }
        assert_eq!(value["dataset"], "cifar100");
        assert_eq!(value["epochs"], 2);
        assert_eq!(value["seed"], 99);
        assert_eq!(value["arch"]["head"]["num_classes"], 10);
        Reply::Line(echo(line))
    });
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar100");
    let result = evaluator.evaluate(&job("S:64:128")).unwrap();
    assert!(result.is_ok(), "{result:?}");
}

#[test]
fn error_status_is_an_error_result_and_costs_the_penalty() {
    let (addr, _) = scripted(|_, line| {
        let request: WireRequest = serde_json::from_str(line).unwrap();
        let response = if request.genome.contains('P') {
            WireResponse::error(request.job_id, "CUDA out of memory")
        } else {
            WireResponse::ok(request.job_id, 0.75)
        };
        Reply::Line(serde_json::to_string(&response).unwrap())
    });
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    let bad = evaluator.evaluate(&job("S:64:64-P:max")).unwrap();
    assert_eq!(bad.fitness, None);
    assert_eq!(bad.message.as_deref(), Some("CUDA out of memory"));

    let mut pop: Vec<cnnga::Individual> =
        ["S:64:64", "S:64:64-P:max"].iter().map(|t| cnnga::Individual::new(genome(t))).collect();
    let stats = cnnga::evaluate_population(
        &mut pop,
        &evaluator,
        &mut cnnga::FitnessCache::new(),
        &EvaluationSettings::default(),
        &cnnga::SeedStreams::new(0),
        &mut 0,
    )
    .unwrap();
    assert_eq!(pop[0].fitness(), Some(0.75));
    assert_eq!(pop[1].fitness(), Some(0.0));
    assert_eq!(stats.failures.len(), 1);
}

#[test]
fn lost_connection_is_retried_once() {
    let (addr, connections) = scripted(|conn, line| if conn == 0 { Reply::Close } else { Reply::Line(echo(line)) });
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    let result = evaluator.evaluate(&job("S:64:128")).unwrap();
    assert_eq!(result.fitness, Some(surrogate_fitness(&genome("S:64:128"))));
    assert_eq!(connections.load(Ordering::SeqCst), 2);
}

#[test]
fn second_loss_becomes_an_error_result() {
    let (addr, connections) = scripted(|_, _| Reply::Close);
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    let result = evaluator.evaluate(&job("S:64:128")).unwrap();
    assert_eq!(result.fitness, None);
    assert!(result.message.unwrap().contains("lost"));
    assert_eq!(connections.load(Ordering::SeqCst), 2);
}

#[test]
fn silent_worker_times_out() {
    let (addr, _) = scripted(|_, _| Reply::Hang);
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10").with_timeout(Duration::from_millis(200));
    let started = Instant::now();
    let result = evaluator.evaluate(&job("S:64:128")).unwrap();
    assert!(started.elapsed() < Duration::from_secs(3));
    assert_eq!(result.fitness, None);
    assert!(result.message.unwrap().contains("timed out"));
}

#[test]
fn garbage_and_mismatched_replies_are_errors() {
    let (addr, _) = scripted(|conn, _| {
        Reply::Line(if conn == 0 {
            "not json".to_string()
        } else {
            r#"{"job_id":"someone-else","status":"ok","fitness":0.5}"#.to_string()
        })
    });
    let a = ExternalEvaluator::new(Transport::Tcp(addr.clone()), "cifar10");
    let b = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    let first = a.evaluate(&job("S:64:128")).unwrap();
    assert!(first.message.unwrap().contains("malformed"));
    let second = b.evaluate(&job("S:64:128")).unwrap();
    assert_eq!(second.fitness, None);
}

#[test]
fn unreachable_worker_is_a_transport_error() {
    let addr = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().to_string()
    };
    let evaluator = ExternalEvaluator::new(Transport::Tcp(addr), "cifar10");
    assert_eq!(evaluator.evaluate(&job("S:64:128")).unwrap_err().kind(), "transport");

    let missing = ExternalEvaluator::new(Transport::Command(vec!["/nonexistent/trainer".into()]), "cifar10");
    assert_eq!(missing.evaluate(&job("S:64:128")).unwrap_err().kind(), "transport");
}
