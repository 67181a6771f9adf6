use super::nn::NetInput;
use crate::geometry::Action;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T = f32> {
    pub obs: NetInput<T>,
    pub action: u8,
    pub reward: T,
    pub next_obs: NetInput<T>,
    pub done: bool,
    pub next_mask: [bool; Action::COUNT],
}

/// Fixed-capacity ring buffer; when full, the oldest transition is replaced.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T = f32> {
    capacity: usize,
    items: Vec<Transition<T>>,
    next: usize,
}

impl<T: Clone> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(4096)),
            next: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition<T>) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Stored transitions, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<T>> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    /// `n` distinct transitions chosen uniformly (fewer if the buffer is smaller).
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Transition<T>> {
        let n = n.min(self.items.len());
        rand::seq::index::sample(rng, self.items.len(), n)
            .into_iter()
            .map(|i| &self.items[i])
            .collect()
    }
}
