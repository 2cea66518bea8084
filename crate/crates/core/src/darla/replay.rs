use rand::Rng;

/// Fixed-capacity FIFO ring; once full, each push overwrites the oldest item.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    items: Vec<T>,
    capacity: usize,
    /// Slot the next push writes to once the buffer is full.
    cursor: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            cursor: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.cursor] = item;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    /// Items from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        let (newer, older) = self.items.split_at(self.cursor);
        older.iter().chain(newer)
    }

    /// True once the buffer holds more than `min_size` items.
    pub fn is_ready(&self, min_size: usize) -> bool {
        self.items.len() > min_size
    }

    /// `batch_size` uniform draws with replacement, or `None` while the
    /// buffer holds `min_size` items or fewer.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        min_size: usize,
        rng: &mut R,
    ) -> Option<Vec<&T>> {
        if !self.is_ready(min_size) || self.items.is_empty() {
            return None;
        }
        Some(
            (0..batch_size)
                .map(|_| &self.items[rng.random_range(0..self.items.len())])
                .collect(),
        )
    }
}
