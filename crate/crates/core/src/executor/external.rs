//! External evaluator backend: persistent worker processes speaking
//! newline-delimited JSON over stdin/stdout.
//!
//! Request:  `{"id": 1, "point": [0.5], "budget": 10, "prior_budget": 0}`
//! Response: `{"id": 1, "loss": 0.5}`
//!
//! Any other stdout line is a protocol violation. Worker stderr is inherited
//! so evaluator logs end up next to the run log.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{check_finite, validate_batch, BatchExecutor, EvalRequest, EvalResult};
use crate::error::{Error, PartialBatch, Result};

pub const DEFAULT_TIMEOUT_SECS: f64 = 3600.0;

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

/// How to launch one evaluator worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorSpec {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_dir: Option<PathBuf>,
    /// Per-request timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl EvaluatorSpec {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            working_dir: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.command.is_empty() || self.command[0].is_empty() {
            return Err(Error::invalid("evaluator command must not be empty"));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(Error::invalid("evaluator timeout must be positive"));
        }
        Ok(())
    }

    fn display(&self) -> String {
        self.command.join(" ")
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    id: u64,
    point: &'a [f64],
    budget: u64,
    prior_budget: u64,
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Worker {
    fn spawn(spec: &EvaluatorSpec) -> Result<Self> {
        let mut cmd = Command::new(&spec.command[0]);
        cmd.args(&spec.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        if let Some(dir) = &spec.working_dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd.spawn().map_err(|source| Error::Spawn {
            command: spec.display(),
            source,
        })?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines: rx,
        })
    }

    fn call(&mut self, request: &EvalRequest, timeout: f64) -> Result<f64> {
        let wire = WireRequest {
            id: request.request_id,
            point: &request.point,
            budget: request.cumulative_budget,
            prior_budget: request.prior_budget,
        };
        let mut line = serde_json::to_string(&wire)?;
        line.push('\n');
        if let Err(e) = self.stdin.write_all(line.as_bytes()).and_then(|_| self.stdin.flush()) {
            return Err(Error::WorkerExited(format!("{} (write failed: {e})", self.exit_status())));
        }
        match self.lines.recv_timeout(Duration::from_secs_f64(timeout)) {
            Ok(Ok(reply)) => parse_response(&reply, request.request_id),
            Ok(Err(e)) => Err(Error::Protocol(format!("unreadable evaluator output: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(Error::WorkerExited(self.exit_status())),
        }
    }

    fn exit_status(&mut self) -> String {
        // Give a closing process a moment to be reaped.
        for _ in 0..50 {
            if let Ok(Some(status)) = self.child.try_wait() {
                return status.to_string();
            }
            thread::sleep(Duration::from_millis(10));
        }
        "closed its output".to_string()
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Parses and validates one response line.
pub(crate) fn parse_response(line: &str, expected_id: u64) -> Result<f64> {
    let value: Value = serde_json::from_str(line)
        .map_err(|e| Error::Protocol(format!("malformed response {line:?}: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Protocol(format!("response is not an object: {line:?}")))?;
    if obj.len() != 2 {
        return Err(Error::Protocol(format!("response must have exactly `id` and `loss`: {line:?}")));
    }
    let id = obj
        .get("id")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Protocol(format!("response without integer id: {line:?}")))?;
    if id != expected_id {
        return Err(Error::Protocol(format!("expected id {expected_id}, got {id}")));
    }
    match obj.get("loss") {
        Some(Value::Number(n)) => {
            let loss = n
                .as_f64()
                .ok_or_else(|| Error::Protocol(format!("loss not representable: {n}")))?;
            check_finite(id, loss)
        }
        // Non-finite floats cannot be JSON numbers; evaluators commonly send them as strings.
        Some(Value::String(s)) if s.parse::<f64>().is_ok_and(|v| !v.is_finite()) => Err(Error::InvalidLoss {
            source_name: format!("request {id}"),
            value: s.clone(),
        }),
        _ => Err(Error::Protocol(format!("response loss must be a number: {line:?}"))),
    }
}

/// Pool of persistent evaluator processes, one per parallel slot.
///
/// A worker that times out, exits or violates the protocol is killed and
/// replaced before the next batch.
pub struct ExternalEvaluator {
    spec: EvaluatorSpec,
    workers: Vec<Option<Worker>>,
    batches: usize,
}

impl ExternalEvaluator {
    pub fn new(spec: EvaluatorSpec, parallelism: usize) -> Result<Self> {
        spec.validate()?;
        if parallelism == 0 {
            return Err(Error::invalid("parallelism must be positive"));
        }
        let workers = (0..parallelism)
            .map(|_| Worker::spawn(&spec).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            workers,
            batches: 0,
        })
    }

    pub fn spec(&self) -> &EvaluatorSpec {
        &self.spec
    }

    fn respawn_missing(&mut self) -> Result<()> {
        for slot in &mut self.workers {
            if slot.is_none() {
                *slot = Some(Worker::spawn(&self.spec)?);
            }
        }
        Ok(())
    }
}

impl BatchExecutor for ExternalEvaluator {
    fn run_batch(&mut self, requests: &[EvalRequest]) -> Result<Vec<EvalResult>> {
        validate_batch(requests)?;
        self.respawn_missing()?;
        let batch = self.batches;
        self.batches += 1;
        let timeout = self.spec.timeout_secs;
        let next = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let slots: Vec<Mutex<Option<Result<EvalResult>>>> = requests.iter().map(|_| Mutex::new(None)).collect();

        thread::scope(|scope| {
            for slot in self.workers.iter_mut() {
                let (next, abort, slots) = (&next, &abort, &slots);
                scope.spawn(move || {
                    while !abort.load(Ordering::SeqCst) {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        let Some(request) = requests.get(i) else { break };
                        let worker = slot.as_mut().expect("workers respawned before batch");
                        let start = Instant::now();
                        let outcome = worker.call(request, timeout).map(|loss| EvalResult {
                            request_id: request.request_id,
                            loss,
                            wall_time_ms: start.elapsed().as_millis() as u64,
                        });
                        let failed = outcome.is_err();
                        *slots[i].lock().expect("result slot poisoned") = Some(outcome);
                        if failed {
                            abort.store(true, Ordering::SeqCst);
                            // The worker's state is unknown; replace it.
                            *slot = None;
                            break;
                        }
                    }
                });
            }
        });

        let outcomes: Vec<Option<Result<EvalResult>>> = slots
            .into_iter()
            .map(|m| m.into_inner().expect("result slot poisoned"))
            .collect();
        let completed = outcomes.iter().filter(|o| matches!(o, Some(Ok(_)))).count();
        let mut results = Vec::with_capacity(requests.len());
        let mut failure = None;
        for outcome in outcomes {
            match outcome {
                Some(Ok(r)) => results.push(r),
                Some(Err(e)) => {
                    failure.get_or_insert(e);
                }
                None => {}
            }
        }
        match failure {
            None => Ok(results),
            Some(e @ Error::InvalidLoss { .. }) => Err(e),
            Some(e) => {
                log::error!("evaluator batch {batch} failed after {completed}/{} requests: {e}", requests.len());
                Err(Error::BatchFailed {
                    batch,
                    partial: PartialBatch {
                        completed,
                        total: requests.len(),
                    },
                    source: Box::new(e),
                })
            }
        }
    }
}
