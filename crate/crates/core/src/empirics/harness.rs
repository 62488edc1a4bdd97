use rayon::prelude::*;

/// Worker-thread budget for replication tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Auto,
    Threads(usize),
}

impl Parallelism {
    pub fn threads(self) -> usize {
        match self {
            Parallelism::Auto => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Parallelism::Threads(n) => n.max(1),
        }
    }
}

/// Runs `task(0..count)` on up to `parallelism` threads and returns the
/// results in index order.
pub fn run_tasks<T, F>(count: usize, parallelism: Parallelism, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let threads = parallelism.threads();
    if threads <= 1 || count <= 1 {
        return (0..count).map(task).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&task).collect()),
        Err(_) => (0..count).map(task).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = run_tasks(100, Parallelism::Threads(1), |i| i * i);
        let par = run_tasks(100, Parallelism::Threads(8), |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
