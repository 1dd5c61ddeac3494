use blie::executor::{BatchExecutor, EvalRequest, EvaluatorSpec, ExternalEvaluator};
use blie::runner::{run_with, ProblemInfo};
use blie::trace::BatchKind;
use blie::{AlgorithmConfig, Error};

const ECHO: &str = env!("CARGO_BIN_EXE_blie-echo-evaluator");

fn evaluator(args: &[&str], timeout_secs: f64, parallelism: usize) -> ExternalEvaluator {
    let mut command = vec![ECHO.to_string()];
    command.extend(args.iter().map(|s| s.to_string()));
    let spec = EvaluatorSpec {
        timeout_secs,
        ..EvaluatorSpec::new(command)
    };
    ExternalEvaluator::new(spec, parallelism).unwrap()
}

fn batch(n: u64) -> Vec<EvalRequest> {
    (0..n)
        .map(|i| EvalRequest::new(i, vec![i as f64 / n as f64, 0.25], 4, 0))
        .collect()
}

fn root_cause(err: &Error) -> &Error {
    match err {
        Error::BatchFailed { source, .. } => source,
        other => other,
    }
}

#[test]
fn echoes_sup_norm_in_request_order() {
    let mut ex = evaluator(&[], 10.0, 3);
    let results = ex.run_batch(&batch(8)).unwrap();
    assert_eq!(results.len(), 8);
    for (i, r) in results.iter().enumerate() {
        assert_eq!(r.request_id, i as u64);
        assert_eq!(r.loss, (i as f64 / 8.0).max(0.25));
    }
}

#[test]
fn nan_loss_is_invalid_loss() {
    let mut ex = evaluator(&["--fail", "nan"], 10.0, 1);
    let err = ex.run_batch(&batch(2)).unwrap_err();
    assert!(matches!(root_cause(&err), Error::InvalidLoss { .. }), "{err}");
}

#[test]
fn garbage_line_is_protocol_error() {
    let mut ex = evaluator(&["--fail", "garbage"], 10.0, 1);
    let err = ex.run_batch(&batch(2)).unwrap_err();
    assert!(matches!(err, Error::BatchFailed { batch: 0, .. }), "{err}");
    assert!(matches!(root_cause(&err), Error::Protocol(_)), "{err}");
}

#[test]
fn mismatched_id_is_protocol_error() {
    let mut ex = evaluator(&["--fail", "wrong-id"], 10.0, 1);
    let err = ex.run_batch(&batch(2)).unwrap_err();
    assert!(matches!(root_cause(&err), Error::Protocol(_)), "{err}");
}

#[test]
fn silent_worker_times_out() {
    let mut ex = evaluator(&["--fail", "sleep"], 0.3, 1);
    let err = ex.run_batch(&batch(1)).unwrap_err();
    assert!(matches!(root_cause(&err), Error::Timeout(_)), "{err}");
}

#[test]
fn exiting_worker_is_reported() {
    let mut ex = evaluator(&["--fail", "exit"], 10.0, 1);
    let err = ex.run_batch(&batch(1)).unwrap_err();
    assert!(matches!(root_cause(&err), Error::WorkerExited(_)), "{err}");
}

#[test]
fn worker_is_replaced_after_a_failure() {
    // Fails only on request 1; the next batch must be served by a fresh worker.
    let mut ex = evaluator(&["--fail", "exit", "--fail-at", "1"], 10.0, 1);
    assert!(ex.run_batch(&batch(2)).is_err());
    let again = vec![EvalRequest::new(7, vec![0.5, 0.125], 2, 0)];
    assert_eq!(ex.run_batch(&again).unwrap()[0].loss, 0.5);
}

#[test]
fn missing_program_fails_to_spawn() {
    let spec = EvaluatorSpec::new(vec!["/nonexistent/evaluator".into()]);
    let err = ExternalEvaluator::new(spec, 1)
        .and_then(|mut ex| ex.run_batch(&batch(1)))
        .unwrap_err();
    assert!(matches!(root_cause(&err), Error::Spawn { .. }), "{err}");
}

#[test]
fn blie_runs_end_to_end_against_the_evaluator() {
    let mut ex = evaluator(&[], 10.0, 4);
    let algo = AlgorithmConfig::Blie {
        alpha: Some(4.0),
        beta: None,
        schedule: Default::default(),
    };
    let info = ProblemInfo::black_box(2);
    let trace = run_with(&algo, &info, 1 << 12, 3, &mut ex).unwrap();
    assert!(trace.total_spent <= 1 << 12);
    assert_eq!(trace.incremental_spend(), trace.total_spent);
    // Clean-up requests top up arms that already hold budget.
    if let Some(cleanup) = trace.batches.iter().find(|b| b.kind == BatchKind::Cleanup) {
        assert!(cleanup.arms.iter().all(|a| a.prior_budget > 0 && a.cumulative_budget > a.prior_budget));
    }
    let sup = trace.output.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert_eq!(trace.best_loss, sup);
    assert!(trace.best_loss < 0.5);
}
