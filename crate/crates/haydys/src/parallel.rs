//! Thread-backed [`Parallel`] for the two block solves of each iteration.

use haydys_core::haydys::Parallel;

/// Runs the two closures on scoped threads when more than one thread is
/// allowed. The closures share nothing mutable, so results do not depend
/// on the thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threads(pub usize);

impl Threads {
    /// `flag`, else `HAYDYS_THREADS`, else one.
    pub fn resolve(flag: Option<usize>) -> Threads {
        let n = flag
            .or_else(|| std::env::var("HAYDYS_THREADS").ok().and_then(|s| s.trim().parse().ok()))
            .unwrap_or(1);
        Threads(n.max(1))
    }
}

impl Parallel for Threads {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        if self.0 < 2 {
            return (a(), b());
        }
        std::thread::scope(|s| {
            let hb = s.spawn(b);
            let ra = a();
            (ra, hb.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
        })
    }
}
