//! Server side of the line protocol.
//!
//! [`serve`] drives any request handler over a reader/writer pair; the
//! bundled [`surrogate_handler`] answers with the surrogate fitness of the
//! requested genome. It backs the `cnnga echo-worker` command, which stands
//! in for a real trainer in tests and demos.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use log::warn;

use super::protocol::{WireRequest, WireResponse};
use super::surrogate::surrogate_fitness;
use crate::arch::decode;
use crate::genome::Genome;

/// Answers every request line with exactly one response line until the input
/// closes. Lines that do not parse as requests get an error response; if no
/// job id can be recovered from them it is left empty.
pub fn serve<R, W, F>(input: R, mut output: W, mut handler: F) -> io::Result<u64>
where
    R: BufRead,
    W: Write,
    F: FnMut(&WireRequest) -> WireResponse,
{
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<WireRequest>(&line) {
            Ok(request) => handler(&request),
            Err(e) => WireResponse::error(recover_job_id(&line), format!("bad request: {e}")),
        };
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
        served += 1;
    }
    Ok(served)
}

fn recover_job_id(line: &str) -> String {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()
        .and_then(|v| v.get("job_id").and_then(|id| id.as_str()).map(str::to_string))
        .unwrap_or_default()
}

/// Checks the request the way a trainer would before building the network,
/// then answers with the surrogate fitness.
pub fn surrogate_handler(request: &WireRequest) -> WireResponse {
    if request.epochs == 0 {
        return WireResponse::error(&request.job_id, "epochs must be at least 1");
    }
    let genome: Genome = match request.genome.parse() {
        Ok(g) => g,
        Err(e) => return WireResponse::error(&request.job_id, e.to_string()),
    };
    if let Err(e) = decode(&genome, request.arch.input_shape, request.arch.num_classes) {
        return WireResponse::error(&request.job_id, e.to_string());
    }
    WireResponse::ok(&request.job_id, surrogate_fitness(&genome))
}

pub fn serve_stdio() -> io::Result<u64> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    serve(stdin.lock(), stdout.lock(), surrogate_handler)
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(s) => BufReader::new(s),
                Err(e) => {
                    warn!("cannot clone connection: {e}");
                    return;
                }
            };
            if let Err(e) = serve(reader, stream, surrogate_handler) {
                warn!("connection ended: {e}");
            }
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::InputShape;
    use crate::evaluators::protocol::Status;

    fn request(job_id: &str, genome: &str, epochs: u32) -> String {
        let g: Genome = "S:64:64".parse().unwrap();
        let arch = decode(&g, InputShape::square(32, 3), 10).unwrap();
        let req = WireRequest {
            job_id: job_id.into(),
            genome: genome.into(),
            arch,
            epochs,
            seed: 1,
            dataset: "cifar10".into(),
        };
        req.to_line()
    }

    fn run(input: &str) -> Vec<WireResponse> {
        let mut out = Vec::new();
        serve(input.as_bytes(), &mut out, surrogate_handler).unwrap();
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }

    #[test]
    fn one_response_per_request_in_order() {
        let input = [request("a", "S:64:64", 2), request("b", "P:max", 2), request("c", "S:64:128", 2)].concat();
        let out = run(&input);
        let ids: Vec<_> = out.iter().map(|r| r.job_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(out.iter().all(|r| r.status == Status::Ok));
    }

    #[test]
    fn bad_requests_get_error_responses() {
        let pools = ["P:max"; 6].join("-");
        let input = [
            request("pools", &pools, 2),
            request("zero", "S:64:64", 0),
            "{\"job_id\":\"junk\"}\n".to_string(),
            "garbage\n".to_string(),
        ]
        .concat();
        let out = run(&input);
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|r| r.status == Status::Error));
        assert_eq!(out[2].job_id, "junk");
        assert_eq!(out[3].job_id, "");
    }
}
