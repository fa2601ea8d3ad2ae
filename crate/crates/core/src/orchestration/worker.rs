use crate::Result;

/// A task executor owned by a director or a pool.
///
/// Workers keep their state between tasks.
pub trait Worker: Send + 'static {
    type Task: Send + 'static;
    type Output: Send + 'static;

    fn run(&mut self, task: Self::Task) -> Result<Self::Output>;
}
