//! Minimal scoped parallel map with a process-wide thread cap.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

static THREAD_LIMIT: AtomicUsize = AtomicUsize::new(0);

/// Caps internal parallelism; `0` restores the default (available cores).
pub fn set_thread_limit(n: usize) {
    THREAD_LIMIT.store(n, Ordering::Relaxed);
}

pub fn thread_limit() -> usize {
    match THREAD_LIMIT.load(Ordering::Relaxed) {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
}

/// `items.iter().map(f)` spread over at most [`thread_limit`] threads,
/// results in input order.
pub(crate) fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = thread_limit().min(items.len());
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| scope.spawn(move || c.iter().map(f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<usize> = (0..103).collect();
        assert_eq!(map(&xs, |x| x * 2), xs.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert!(map(&Vec::<usize>::new(), |x| *x).is_empty());
    }
}
