use std::collections::VecDeque;
use std::sync::Mutex;
use std::thread;

use super::{EngineError, EngineLimits, EngineSession, Evaluation};
use crate::board::Position;

/// Evaluates every position exactly once, spreading work over `pool`.
///
/// Output order matches input order. A session that fails is retired (removed
/// from `pool`) and its in-flight position goes back on the queue for the
/// survivors. If every session fails the whole batch is an error.
pub fn evaluate_batch(
    pool: &mut Vec<EngineSession>,
    positions: &[Position],
    limits: EngineLimits,
) -> Result<Vec<(Position, Evaluation)>, EngineError> {
    evaluate_batch_with_progress(pool, positions, limits, &|_| {})
}

/// [`evaluate_batch`] with a callback receiving the number of completed positions.
pub fn evaluate_batch_with_progress(
    pool: &mut Vec<EngineSession>,
    positions: &[Position],
    limits: EngineLimits,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<Vec<(Position, Evaluation)>, EngineError> {
    if pool.is_empty() {
        return Err(EngineError::EmptyPool);
    }
    if positions.is_empty() {
        return Ok(Vec::new());
    }
    let queue = Mutex::new((0..positions.len()).collect::<VecDeque<_>>());
    let results: Mutex<Vec<Option<Evaluation>>> = Mutex::new(vec![None; positions.len()]);
    let done = Mutex::new(0usize);
    let failures: Mutex<Vec<EngineError>> = Mutex::new(Vec::new());
    let sessions = pool.len();

    thread::scope(|scope| {
        for session in pool.iter_mut() {
            let (queue, results, done, failures) = (&queue, &results, &done, &failures);
            scope.spawn(move || loop {
                let Some(index) = queue.lock().unwrap().pop_front() else { return };
                match session.evaluate(&positions[index], limits) {
                    Ok(eval) => {
                        results.lock().unwrap()[index] = Some(eval);
                        let mut n = done.lock().unwrap();
                        *n += 1;
                        progress(*n);
                    }
                    Err(e) => {
                        queue.lock().unwrap().push_front(index);
                        failures.lock().unwrap().push(e);
                        return;
                    }
                }
            });
        }
    });

    pool.retain(|s| !s.is_dead());
    let results = results.into_inner().unwrap();
    if results.iter().any(Option::is_none) {
        let last = failures.into_inner().unwrap().pop().unwrap_or(EngineError::SessionDead);
        return Err(EngineError::AllSessionsFailed { sessions, last: Box::new(last) });
    }
    Ok(positions.iter().cloned().zip(results.into_iter().map(Option::unwrap)).collect())
}
